//! High-precision evaluation of `Phi(X) = sum A_k e^{kX}`, its first three
//! derivatives, the free energy `f(t2, t3) = phi(tau) / t3`, and residuals of
//! the associativity equation `f222 f233 + f333 = f223^2`.

use std::io::Write;

use rug::ops::Pow;
use rug::{Assign, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::CoefficientTable;
use crate::precision::{to_decimal, PrecisionContext};

/// Ratios `a e^X` at least this close to 1 count as on (or past) the
/// boundary of the convergence disk. The growth base is only known to a few
/// parts in 10^6 from a finite table, so the boundary is fuzzy at that scale.
pub const BOUNDARY_TOLERANCE: f64 = 1e-4;

/// Partial sums `Phi^{(r)}(X) = sum_{k<=n} k^r A_k e^{kX}` for `r = 0..3`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiValues {
    pub x: Float,
    pub phi0: Float,
    pub phi1: Float,
    pub phi2: Float,
    pub phi3: Float,
    pub n_terms: usize,
    /// Estimated geometric ratio `a e^X` of the tail.
    pub tail_ratio: f64,
}

impl PhiValues {
    /// The point is on or beyond the estimated radius of convergence, where
    /// only the proven-finite values `phi0..phi2` are meaningful.
    pub fn outside_proven_region(&self) -> bool {
        self.tail_ratio >= 1.0 - BOUNDARY_TOLERANCE
    }

    /// `phi3` is a partial sum of a divergent series at this point.
    pub fn phi3_divergent(&self) -> bool {
        self.outside_proven_region()
    }

    /// Copy with `phi2` replaced by `(27 + 2 phi1)/3`, the value the
    /// constraint at `X0` forces; the direct partial sum converges slowly there.
    pub fn with_refined_phi2(&self) -> PhiValues {
        PhiValues {
            phi2: refined_phi2(&self.phi1),
            ..self.clone()
        }
    }

    pub fn derivative(&self, r: usize) -> &Float {
        match r {
            0 => &self.phi0,
            1 => &self.phi1,
            2 => &self.phi2,
            3 => &self.phi3,
            _ => panic!("only derivatives 0..=3 are tracked"),
        }
    }
}

/// Coefficients of a table converted once to floating point at a fixed
/// precision.
#[derive(Debug, Clone)]
pub struct SeriesEvaluator {
    ctx: PrecisionContext,
    coeffs: Vec<Float>,
    growth_base: f64,
}

impl SeriesEvaluator {
    pub fn new(table: &CoefficientTable, ctx: PrecisionContext) -> Self {
        let coeffs = table.coefficients().iter().map(|a| ctx.from_rational(a)).collect();
        SeriesEvaluator {
            ctx,
            coeffs,
            growth_base: estimate_growth_base(table),
        }
    }

    /// Replaces the table-derived estimate of `a` (used only for
    /// convergence diagnostics and tail bounds), e.g. with a fitted value.
    pub fn with_growth_base(mut self, a: f64) -> Self {
        self.growth_base = a;
        self
    }

    pub fn ctx(&self) -> PrecisionContext {
        self.ctx
    }

    pub fn n_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn growth_base(&self) -> f64 {
        self.growth_base
    }

    /// Raw power sums `S_r = sum_{k<=n} k^r A_k w^k` for `r = 0..3`.
    fn power_sums(&self, w: &Float) -> [Float; 4] {
        let bits = self.ctx.bits();
        let mut sums = [
            Float::new(bits),
            Float::new(bits),
            Float::new(bits),
            Float::new(bits),
        ];
        let mut power = Float::with_val(bits, 1);
        let mut term = Float::new(bits);
        for (idx, a) in self.coeffs.iter().enumerate() {
            let k = idx as u32 + 1;
            power *= w;
            term.assign(a * &power);
            sums[0] += &term;
            for s in sums.iter_mut().skip(1) {
                term *= k;
                *s += &term;
            }
        }
        sums
    }

    pub fn phi(&self, x: &Float) -> PhiValues {
        let x = Float::with_val(self.ctx.bits(), x);
        let ex = Float::with_val(self.ctx.bits(), x.exp_ref());
        let [phi0, phi1, phi2, phi3] = self.power_sums(&ex);
        PhiValues {
            tail_ratio: self.growth_base * ex.to_f64(),
            x,
            phi0,
            phi1,
            phi2,
            phi3,
            n_terms: self.n_terms(),
        }
    }

    /// Geometric majorant of `sum_{k>n} k^r A_k |w|^k`, assuming the
    /// coefficient ratios `A_{k+1}/A_k` stay below `a` past the table.
    /// `None` when the majorant does not converge at `|w|`.
    pub fn tail_bound(&self, abs_w: &Float, r: u32) -> Option<Float> {
        let bits = self.ctx.bits();
        let n = self.n_terms() as u32;
        let a = Float::with_val(bits, self.growth_base);
        let q = Float::with_val(bits, &a * abs_w);
        // (N+j)^r <= (N+1)^r exp(r (j-1)/(N+1)) for j >= 1
        let stretch = Float::with_val(bits, Float::with_val(bits, r) / (n + 1)).exp();
        let q_eff = Float::with_val(bits, &q * &stretch);
        if q_eff >= 1 {
            return None;
        }
        let last = self.coeffs.last().expect("evaluator is never empty");
        let mut first_omitted = Float::with_val(bits, abs_w.pow(n));
        first_omitted *= last;
        first_omitted *= &q;
        first_omitted *= Float::with_val(bits, n + 1).pow(r);
        Some(first_omitted / (1 - q_eff))
    }

    /// Tail bounds for `r = 0..3` at `X`.
    pub fn phi_tail_bounds(&self, x: &Float) -> Option<[Float; 4]> {
        let w = Float::with_val(self.ctx.bits(), x.exp_ref());
        Some([
            self.tail_bound(&w, 0)?,
            self.tail_bound(&w, 1)?,
            self.tail_bound(&w, 2)?,
            self.tail_bound(&w, 3)?,
        ])
    }

    /// `f(t2, t3) = phi(tau) / t3` with `tau = t3^3 e^{t2}`.
    pub fn f(&self, t2: &Float, t3: &Float) -> Result<FreeEnergy> {
        let tau = self.tau(t2, t3)?;
        let [s0, ..] = self.power_sums(&tau);
        let margin = Float::with_val(53, tau.abs_ref()).to_f64() * self.growth_base;
        Ok(FreeEnergy {
            value: s0 / t3,
            convergence_margin: margin,
            tau,
        })
    }

    fn tau(&self, t2: &Float, t3: &Float) -> Result<Float> {
        if t3.is_zero() {
            return Err(Error::SingularChart);
        }
        let bits = self.ctx.bits();
        let mut tau = Float::with_val(bits, t3.pow(3u32));
        tau *= Float::with_val(bits, t2.exp_ref());
        Ok(tau)
    }

    /// Evaluates `f222 f233 + f333 - f223^2` from termwise-differentiated
    /// partial sums, together with a bound on how large that residual may be
    /// for a truncated, rounded evaluation of an exact solution.
    pub fn pde_residual(&self, t2: &Float, t3: &Float) -> Result<PdeResidual> {
        let bits = self.ctx.bits();
        let tau = self.tau(t2, t3)?;
        let abs_tau = Float::with_val(bits, tau.abs_ref());
        let ratio = self.growth_base * abs_tau.to_f64();
        if ratio >= 1.0 - BOUNDARY_TOLERANCE {
            return Err(Error::Domain(format!(
                "|t3^3 e^t2| * a = {ratio:.6} is not inside the convergence disk"
            )));
        }

        // With X = t2 + 3 ln t3: d/dt2 = d/dX and d/dt3 (t3^p G(X)) = t3^(p-1) (p G + 3 G').
        let [p0, p1, p2, p3] = self.power_sums(&tau);
        let lin = |terms: &[(i32, &Float)]| linear_combination(bits, terms);
        let t3_2 = Float::with_val(bits, t3.square_ref());
        let t3_3 = Float::with_val(bits, &t3_2 * t3);
        let t3_4 = Float::with_val(bits, t3_2.square_ref());

        let f222 = Float::with_val(bits, &p3 / t3);
        let f223 = (Float::with_val(bits, 3 * &p3) - &p2) / &t3_2;
        let f233 = (Float::with_val(bits, 2 * &p1) - Float::with_val(bits, 9 * Float::with_val(bits, &p2 - &p3))) / &t3_3;
        let f333 = (lin(&[(-6, &p0), (33, &p1), (-54, &p2), (27, &p3)])) / &t3_4;

        let residual = Float::with_val(bits, &f222 * &f233) + &f333 - Float::with_val(bits, f223.square_ref());

        let abs = |v: &Float| Float::with_val(bits, v.abs_ref());
        let (m0, m1, m2, m3) = (abs(&p0), abs(&p1), abs(&p2), abs(&p3));

        // Size of the ODE expression's individual terms, for the rounding budget.
        let scale = lin(&[(6, &m0), (33, &m1), (54, &m2)])
            + Float::with_val(bits, m2.square_ref())
            + (lin(&[(2, &m1), (3, &m2)]) + 27u32) * &m3;
        // Each partial sum carries at most ~4n roundings of relative size 2^-bits.
        let unit = Float::with_val(bits, Float::i_exp(1, 1 - bits as i32));
        let rounding = Float::with_val(bits, &scale * &unit) * (16 * self.n_terms() as u32 + 64) / &abs(&t3_4);

        let truncation = match (0..4)
            .map(|r| self.tail_bound(&abs_tau, r))
            .collect::<Option<Vec<_>>>()
        {
            Some(t) => {
                // |E(Phi_n)| where E(Phi) = 0, expanded in the tails T_r.
                let (t0, t1, t2, t3t) = (&t[0], &t[1], &t[2], &t[3]);
                let linear = lin(&[(6, t0), (33, t1), (54, t2), (27, t3t)]);
                let quad = lin(&[(2, &m2)]) * t2
                    + Float::with_val(bits, t2.square_ref())
                    + lin(&[(2, t1), (3, t2)]) * &m3
                    + lin(&[(2, &m1), (3, &m2)]) * t3t
                    + lin(&[(2, t1), (3, t2)]) * t3t;
                Some((linear + quad) / abs(&t3_4))
            }
            None => None,
        };

        Ok(PdeResidual {
            residual,
            truncation_bound: truncation,
            rounding_bound: rounding,
        })
    }
}

/// `sum c_i x_i` at `bits` precision.
pub(crate) fn linear_combination(bits: u32, terms: &[(i32, &Float)]) -> Float {
    let mut out = Float::new(bits);
    for (c, x) in terms {
        out += Float::with_val(bits, *c * *x);
    }
    out
}

/// Estimates `a = lim A_{k+1}/A_k` from the last two coefficients,
/// correcting for the `k^{-7/2}` factor of the asymptotic law.
pub fn estimate_growth_base(table: &CoefficientTable) -> f64 {
    let n = table.n_max();
    if n < 2 {
        // Any value in the a priori bracket (1/108, 2/3) serves for a one-term table.
        return 2.0 / 3.0;
    }
    let ratio = rug::Rational::from(table.get(n).unwrap() / table.get(n - 1).unwrap());
    let n = n as f64;
    ratio.to_f64() * (n / (n - 1.0)).powf(3.5)
}

/// `f(t2, t3)` with its convergence diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeEnergy {
    pub value: Float,
    pub tau: Float,
    /// `|tau| a`; below 1 inside the convergence disk.
    pub convergence_margin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeResidual {
    pub residual: Float,
    /// Majorant of the residual caused by dropping `k > n_max`; `None` when
    /// the geometric majorant does not converge at this point.
    pub truncation_bound: Option<Float>,
    pub rounding_bound: Float,
}

impl PdeResidual {
    /// Total admissible residual for an exact solution.
    pub fn bound(&self) -> Option<Float> {
        self.truncation_bound
            .as_ref()
            .map(|t| Float::with_val(self.rounding_bound.prec(), t + &self.rounding_bound))
    }

    pub fn within_bound(&self) -> bool {
        self.bound()
            .map(|b| Float::with_val(b.prec(), self.residual.abs_ref()) <= b)
            .unwrap_or(false)
    }
}

pub fn eval_phi(table: &CoefficientTable, x: &Float, ctx: PrecisionContext) -> PhiValues {
    SeriesEvaluator::new(table, ctx).phi(x)
}

/// `Phi''(X0)` recovered from `Phi'(X0)` through `27 + 2 Phi' - 3 Phi'' = 0`.
pub fn refined_phi2(phi1: &Float) -> Float {
    let mut out = Float::with_val(phi1.prec(), 2 * phi1);
    out += 27;
    out /= 3;
    out
}

/// `27 + 2 Phi' - 3 Phi''`, which vanishes at `X0` for the exact series.
pub fn constraint_residual(values: &PhiValues) -> Float {
    constraint_residual_of(&values.phi1, &values.phi2)
}

pub fn constraint_residual_of(phi1: &Float, phi2: &Float) -> Float {
    let prec = phi1.prec().max(phi2.prec());
    let mut out = Float::with_val(prec, 2 * phi1);
    out += 27;
    out -= Float::with_val(prec, 3 * phi2);
    out
}

pub fn eval_f(
    table: &CoefficientTable,
    t2: &Float,
    t3: &Float,
    ctx: PrecisionContext,
) -> Result<FreeEnergy> {
    SeriesEvaluator::new(table, ctx).f(t2, t3)
}

pub fn pde_residual(
    table: &CoefficientTable,
    t2: &Float,
    t3: &Float,
    ctx: PrecisionContext,
) -> Result<PdeResidual> {
    SeriesEvaluator::new(table, ctx).pde_residual(t2, t3)
}

/// Log-log slope of `Phi'''(X0 - delta)` against `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularExponentEstimate {
    pub exponent: Float,
    /// Smallest and largest `delta` sampled.
    pub window: (f64, f64),
    pub points: usize,
}

/// Ten logarithmically spaced offsets in `[0.02, 0.2]`.
pub fn default_singular_samples() -> Vec<f64> {
    let (lo, hi) = (0.02f64, 0.2f64);
    let steps = 9;
    (0..=steps)
        .map(|i| lo * (hi / lo).powf(i as f64 / steps as f64))
        .collect()
}

pub(crate) fn validate_deltas(samples: &[f64], open_upper: Option<f64>) -> Result<()> {
    for &d in samples {
        let ok = d.is_finite() && d > 0.0 && open_upper.is_none_or(|u| d < u);
        if !ok {
            return Err(Error::InvalidArgument(format!(
                "sample offset {d} must lie in (0, {})",
                open_upper.map_or("inf".to_owned(), |u| u.to_string())
            )));
        }
    }
    Ok(())
}

pub fn estimate_singular_exponent(
    table: &CoefficientTable,
    x0: &Float,
    ctx: PrecisionContext,
    samples: &[f64],
) -> Result<SingularExponentEstimate> {
    if samples.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    validate_deltas(samples, Some(0.5))?;
    let eval = SeriesEvaluator::new(table, ctx);
    let bits = ctx.bits();
    let mut deltas = Vec::with_capacity(samples.len());
    let mut values = Vec::with_capacity(samples.len());
    for &d in samples {
        let delta = ctx.float(d);
        let x = Float::with_val(bits, x0 - &delta);
        values.push(eval.phi(&x).phi3);
        deltas.push(delta);
    }
    let exponent = power_law_exponent(&deltas, &values)?;
    Ok(SingularExponentEstimate {
        exponent,
        window: window_of(samples),
        points: samples.len(),
    })
}

pub(crate) fn window_of(samples: &[f64]) -> (f64, f64) {
    samples
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &d| (lo.min(d), hi.max(d)))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn power_law_exponent(xs: &[Float], ys: &[Float]) -> Result<Float> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "power-law fit needs at least two paired samples".into(),
        ));
    }
    if xs.iter().chain(ys).any(|v| *v <= 0) {
        return Err(Error::Domain("power-law fit needs positive samples".into()));
    }
    let bits = xs.iter().chain(ys).map(Float::prec).max().unwrap();
    let lx: Vec<Float> = xs.iter().map(|x| Float::with_val(bits, x.ln_ref())).collect();
    let ly: Vec<Float> = ys.iter().map(|y| Float::with_val(bits, y.ln_ref())).collect();
    let (slope, _) = crate::fit::least_squares_line(&lx, &ly)?;
    Ok(slope)
}

/// Serialized form of [`PhiValues`]; numerics are decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiRecord {
    #[serde(rename = "X")]
    pub x: String,
    pub phi0: String,
    pub phi1: String,
    pub phi2: String,
    pub phi3: String,
    pub n_terms: usize,
    /// Significant digits printed per value.
    pub digits: usize,
    pub outside_proven_region: bool,
}

impl PhiValues {
    pub fn record(&self, digits: usize) -> PhiRecord {
        PhiRecord {
            x: to_decimal(&self.x, digits),
            phi0: to_decimal(&self.phi0, digits),
            phi1: to_decimal(&self.phi1, digits),
            phi2: to_decimal(&self.phi2, digits),
            phi3: to_decimal(&self.phi3, digits),
            n_terms: self.n_terms,
            digits,
            outside_proven_region: self.outside_proven_region(),
        }
    }
}

pub fn write_phi_csv<W: Write>(w: W, rows: &[PhiValues], digits: usize) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in rows {
        out.serialize(row.record(digits))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_phi_json<W: Write>(mut w: W, rows: &[PhiValues], digits: usize) -> Result<()> {
    let records: Vec<PhiRecord> = rows.iter().map(|r| r.record(digits)).collect();
    serde_json::to_writer(&mut w, &records)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invariants::compute_coefficients;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(60).unwrap()
    }

    #[test]
    fn refined_and_constraint_are_consistent() {
        let c = ctx();
        assert_eq!(refined_phi2(&c.float(0)), 9);
        assert_eq!(refined_phi2(&c.float(-13.5)), 0);
        let r = refined_phi2(&c.parse("5.408").unwrap());
        assert!((r.to_f64() - 12.605333).abs() < 1e-6);

        let phi1 = c.parse("5.408").unwrap();
        assert!(constraint_residual_of(&phi1, &refined_phi2(&phi1)).to_f64().abs() < 1e-55);
        assert_eq!(constraint_residual_of(&c.float(0), &c.float(0)), 27);
    }

    #[test]
    fn leading_term_dominates_far_left() {
        let table = compute_coefficients(20).unwrap();
        let c = ctx();
        let v = eval_phi(&table, &c.float(-50), c);
        let lead = Float::with_val(c.bits(), c.float(-50).exp()) / 2;
        let rel: Float = Float::with_val(c.bits(), &v.phi0 - &lead) / &lead;
        // relative correction ~ (A_2 / A_1) e^{-50}
        assert!(rel.to_f64().abs() < (-50f64).exp());
        assert!(!v.outside_proven_region());
    }

    #[test]
    fn one_term_pde_defect() {
        // Phi = e^X / 2 leaves E(Phi) = -2 Phi^2 = -e^{2X} / 2.
        let table = compute_coefficients(1).unwrap();
        let c = ctx();
        let r = pde_residual(&table, &c.float(0), &c.float(1), c).unwrap();
        assert_eq!(r.residual, -0.5);
        let r = pde_residual(&table, &c.float(-3), &c.float(2), c).unwrap();
        let tau = 8.0 * (-3f64).exp();
        let expected = -0.5 * tau * tau / 16.0;
        assert!((r.residual.to_f64() - expected).abs() < 1e-14);
    }

    #[test]
    fn singular_chart_rejected() {
        let table = compute_coefficients(3).unwrap();
        let c = ctx();
        assert!(matches!(eval_f(&table, &c.float(0), &c.float(0), c), Err(Error::SingularChart)));
        assert!(matches!(
            pde_residual(&table, &c.float(0), &c.float(0), c),
            Err(Error::SingularChart)
        ));
    }

    #[test]
    fn pde_outside_disk_is_domain_error() {
        let table = compute_coefficients(30).unwrap();
        let c = ctx();
        assert!(matches!(
            pde_residual(&table, &c.float(3), &c.float(1), c),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn negative_t3_uses_signed_tau() {
        let table = compute_coefficients(30).unwrap();
        let c = ctx();
        let pos = eval_f(&table, &c.float(-3), &c.float(1), c).unwrap();
        let neg = eval_f(&table, &c.float(-3), &c.float(-1), c).unwrap();
        assert!(neg.tau < 0);
        // phi(-tau) / (-1) differs from phi(tau) / 1 only through odd powers.
        assert!(neg.value != pos.value);
        let r = pde_residual(&table, &c.float(-3), &c.float(-1), c).unwrap();
        assert!(r.within_bound(), "{r:?}");
    }

    #[test]
    fn exponent_of_synthetic_power_laws() {
        let c = ctx();
        let xs: Vec<Float> = default_singular_samples().into_iter().map(|d| c.float(d)).collect();
        let sqrt: Vec<Float> = xs
            .iter()
            .map(|x| Float::with_val(c.bits(), x.recip_sqrt_ref()))
            .collect();
        let slope = power_law_exponent(&xs, &sqrt).unwrap();
        assert!((slope + 0.5f64).to_f64().abs() < 1e-50);

        let flat = vec![c.float(7); xs.len()];
        assert!(power_law_exponent(&xs, &flat).unwrap().to_f64().abs() < 1e-50);
    }

    #[test]
    fn exponent_needs_three_valid_samples() {
        let table = compute_coefficients(10).unwrap();
        let c = ctx();
        let x0 = c.float(1.98);
        assert!(matches!(
            estimate_singular_exponent(&table, &x0, c, &[0.1, 0.2]),
            Err(Error::InvalidArgument(_))
        ));
        assert!(estimate_singular_exponent(&table, &x0, c, &[0.1, 0.2, 0.0]).is_err());
        assert!(estimate_singular_exponent(&table, &x0, c, &[0.1, 0.2, 0.6]).is_err());
    }

    #[test]
    fn default_samples_span_window() {
        let s = default_singular_samples();
        assert_eq!(s.len(), 10);
        assert!((s[0] - 0.02).abs() < 1e-15 && (s[9] - 0.2).abs() < 1e-15);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn csv_header_and_row_shape() {
        let table = compute_coefficients(5).unwrap();
        let c = PrecisionContext::new(20).unwrap();
        let rows = vec![eval_phi(&table, &c.float(-1), c)];
        let mut buf = Vec::new();
        write_phi_csv(&mut buf, &rows, 20).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next(),
            Some("X,phi0,phi1,phi2,phi3,n_terms,digits,outside_proven_region")
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 8);
        assert_eq!(row[0], "-1.0000000000000000000");
        assert_eq!(row[5], "5");
        assert_eq!(row[6], "20");
        assert_eq!(row[7], "false");
    }
}
