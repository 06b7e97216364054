//! Frobenius structure of `QH*(CP²)` near the boundary of the Kontsevich
//! series: flat metric, Euler field, intersection form, canonical
//! coordinates and the Jacobian of `u -> t`.
//!
//! The free energy is `F = (t1^2 t3 + t1 t2^2)/2 + Phi(X)/t3` with
//! `X = t2 + 3 ln t3`; all second derivatives of `F` are therefore finite
//! combinations of `Phi, Phi', Phi''` and powers of `t3`.

use std::io::Write;
use std::ops::{Add, Mul, Sub};

use rug::ops::Pow;
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::cubic::{canonical_order, root_condition, solve_monic_cubic, Complex};
use crate::error::{Error, Result};
use crate::invariants::CoefficientTable;
use crate::precision::{to_decimal, PrecisionContext};
use crate::series::{linear_combination, power_law_exponent, validate_deltas, PhiValues, SeriesEvaluator};

/// Point `(t1, t2, t3)` in flat coordinates, off the degenerate chart `t3 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatPoint {
    pub t1: Float,
    pub t2: Float,
    pub t3: Float,
}

impl FlatPoint {
    pub fn new(t1: Float, t2: Float, t3: Float) -> Result<Self> {
        if t3.is_zero() {
            return Err(Error::SingularChart);
        }
        Ok(FlatPoint { t1, t2, t3 })
    }

    /// Point with `t2` chosen so that `t2 + 3 ln t3 = x`.
    pub fn from_x(t1: Float, x: &Float, t3: Float) -> Result<Self> {
        if t3 <= 0 {
            return Err(Error::InvalidArgument(
                "X determines t2 only on the t3 > 0 chart".into(),
            ));
        }
        let prec = x.prec().max(t3.prec());
        let t2 = Float::with_val(prec, x - Float::with_val(prec, t3.ln_ref()) * 3u32);
        FlatPoint::new(t1, t2, t3)
    }

    /// `X = t2 + 3 ln t3` on the `t3 > 0` chart.
    pub fn x(&self) -> Result<Float> {
        if self.t3 <= 0 {
            return Err(Error::InvalidArgument(
                "X = t2 + 3 ln t3 needs t3 > 0; pass X explicitly for t3 < 0".into(),
            ));
        }
        let prec = self.t2.prec().max(self.t3.prec());
        Ok(Float::with_val(prec, &self.t2 + Float::with_val(prec, self.t3.ln_ref()) * 3u32))
    }

    /// `tau = t3^3 e^{t2}`.
    pub fn tau(&self) -> Float {
        let prec = self.t2.prec().max(self.t3.prec());
        Float::with_val(prec, (&self.t3).pow(3u32)) * Float::with_val(prec, self.t2.exp_ref())
    }
}

/// `eta^{ab}`: ones on the antidiagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatMetric {
    pub entries: [[i64; 3]; 3],
}

impl FlatMetric {
    pub const fn standard() -> Self {
        FlatMetric {
            entries: [[0, 0, 1], [0, 1, 0], [1, 0, 0]],
        }
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    pub fn square(&self) -> [[i64; 3]; 3] {
        let e = &self.entries;
        let mut out = [[0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| e[i][k] * e[k][j]).sum();
            }
        }
        out
    }

    pub fn is_involutive(&self) -> bool {
        self.square() == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    }
}

/// Charges, dimension and quadratic correction of the Euler field
/// `E = t1 d1 + 3 d2 - t3 d3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EulerData {
    pub charges: [i64; 3],
    pub dimension: i64,
    /// `A^{ab}` in `E(F) = (3 - d) F + A_{ab} t^a t^b` raised with `eta`.
    pub quadratic: [[i64; 3]; 3],
}

impl EulerData {
    pub const fn cp2() -> Self {
        EulerData {
            charges: [0, 1, 2],
            dimension: 2,
            quadratic: [[0, 0, 0], [0, 0, 3], [0, 3, 0]],
        }
    }

    /// Weight `1 + d - q_a - q_b` of `d^a d^b F` in the intersection form.
    pub fn weight(&self, a: usize, b: usize) -> i64 {
        1 + self.dimension - self.charges[a] - self.charges[b]
    }

    /// Components of `E` at a point.
    pub fn vector_field(&self, point: &FlatPoint) -> [Float; 3] {
        let p = point.t1.prec();
        [
            point.t1.clone(),
            Float::with_val(p, 3),
            Float::with_val(point.t3.prec(), -&point.t3),
        ]
    }

    /// `E(F) - F`, which equals `3 t1 t2` identically.
    pub fn quasi_homogeneity_defect(&self, point: &FlatPoint, phi: &PhiValues) -> Float {
        let grad = free_energy_gradient(point, phi);
        let e = self.vector_field(point);
        let prec = phi.phi0.prec();
        let mut ef = Float::new(prec);
        for (ei, gi) in e.iter().zip(&grad) {
            ef += Float::with_val(prec, ei * gi);
        }
        ef - free_energy(point, phi)
    }
}

/// `F(t) = (t1^2 t3 + t1 t2^2)/2 + Phi/t3`.
pub fn free_energy(point: &FlatPoint, phi: &PhiValues) -> Float {
    let p = phi.phi0.prec();
    let FlatPoint { t1, t2, t3 } = point;
    let cubic = (Float::with_val(p, t1.square_ref()) * t3 + Float::with_val(p, t2.square_ref()) * t1) / 2u32;
    cubic + Float::with_val(p, &phi.phi0 / t3)
}

/// `(d1 F, d2 F, d3 F)`.
pub fn free_energy_gradient(point: &FlatPoint, phi: &PhiValues) -> [Float; 3] {
    let p = phi.phi0.prec();
    let FlatPoint { t1, t2, t3 } = point;
    let t3_sq = Float::with_val(p, t3.square_ref());
    let d1 = Float::with_val(p, t1 * t3) + Float::with_val(p, t2.square_ref()) / 2u32;
    let d2 = Float::with_val(p, t1 * t2) + Float::with_val(p, &phi.phi1 / t3);
    let d3 = Float::with_val(p, t1.square_ref()) / 2u32
        + (Float::with_val(p, 3 * &phi.phi1) - &phi.phi0) / &t3_sq;
    [d1, d2, d3]
}

/// Minimal field interface so the intersection form and its determinant can
/// be built over exact rationals as well as MPFR reals.
pub trait Scalar:
    Clone + for<'a> Add<&'a Self, Output = Self> + for<'a> Sub<&'a Self, Output = Self> + for<'a> Mul<&'a Self, Output = Self>
{
    fn int_like(&self, v: i64) -> Self;
    fn div_by(&self, d: &Self) -> Self;
}

impl Scalar for Rational {
    fn int_like(&self, v: i64) -> Self {
        Rational::from(v)
    }

    fn div_by(&self, d: &Self) -> Self {
        Rational::from(self / d)
    }
}

impl Scalar for Float {
    fn int_like(&self, v: i64) -> Self {
        Float::with_val(self.prec(), v)
    }

    fn div_by(&self, d: &Self) -> Self {
        Float::with_val(self.prec().max(d.prec()), self / d)
    }
}

/// Hessian `d_a d_b F` at `(t1, t2, t3)` with the given `Phi, Phi', Phi''`.
pub fn free_energy_hessian<T: Scalar>(t1: &T, t2: &T, t3: &T, phi: [&T; 3]) -> [[T; 3]; 3] {
    let [p0, p1, p2] = phi;
    let t3_2 = t3.clone() * t3;
    let t3_3 = t3_2.clone() * t3;
    let c = |v: i64| t1.int_like(v);
    let f11 = t3.clone();
    let f12 = t2.clone();
    let f13 = t1.clone();
    let f22 = t1.clone() + &p2.div_by(t3);
    let f23 = (c(3) * p2 - p1).div_by(&t3_2);
    let f33 = (c(2) * p0 - &(c(9) * p1) + &(c(9) * p2)).div_by(&t3_3);
    [
        [f11, f12.clone(), f13.clone()],
        [f12, f22, f23.clone()],
        [f13, f23, f33],
    ]
}

/// `g^{ab} = (1 + d - q_a - q_b) eta^{am} eta^{bn} d_m d_n F + A^{ab}`.
pub fn intersection_matrix<T: Scalar>(t1: &T, t2: &T, t3: &T, phi: [&T; 3]) -> [[T; 3]; 3] {
    let hess = free_energy_hessian(t1, t2, t3, phi);
    let euler = EulerData::cp2();
    let eta = FlatMetric::standard().entries;
    let raise = |a: usize| (0..3).find(|&m| eta[a][m] == 1).unwrap();
    let entry = |a: usize, b: usize| {
        let w = t1.int_like(euler.weight(a, b));
        w * &hess[raise(a)][raise(b)] + &t1.int_like(euler.quadratic[a][b])
    };
    [
        [entry(0, 0), entry(0, 1), entry(0, 2)],
        [entry(1, 0), entry(1, 1), entry(1, 2)],
        [entry(2, 0), entry(2, 1), entry(2, 2)],
    ]
}

/// Coefficients `[c3, c2, c1, c0]` of `det(g - u eta)` in `u`, expanded
/// along the first row with entries linear in `u`.
pub fn pencil_determinant<T: Scalar>(g: &[[T; 3]; 3]) -> [T; 4] {
    let eta = FlatMetric::standard().entries;
    let zero = g[0][0].int_like(0);
    // entry (i, j) as (constant, u-coefficient)
    let lin = |i: usize, j: usize| (g[i][j].clone(), g[0][0].int_like(-eta[i][j]));

    type Poly<T> = Vec<T>;
    let mul = |a: &Poly<T>, b: &Poly<T>| -> Poly<T> {
        let mut out = vec![zero.clone(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] = out[i + j].clone() + &(x.clone() * y);
            }
        }
        out
    };
    let sub = |a: &Poly<T>, b: &Poly<T>| -> Poly<T> {
        let n = a.len().max(b.len());
        (0..n)
            .map(|i| {
                let x = a.get(i).cloned().unwrap_or_else(|| zero.clone());
                let y = b.get(i).cloned().unwrap_or_else(|| zero.clone());
                x - &y
            })
            .collect()
    };
    let poly = |i: usize, j: usize| {
        let (c, u) = lin(i, j);
        vec![c, u]
    };
    let minor = |r0: usize, r1: usize, c0: usize, c1: usize| {
        sub(&mul(&poly(r0, c0), &poly(r1, c1)), &mul(&poly(r0, c1), &poly(r1, c0)))
    };

    let t0 = mul(&poly(0, 0), &minor(1, 2, 1, 2));
    let t1 = mul(&poly(0, 1), &minor(1, 2, 0, 2));
    let t2 = mul(&poly(0, 2), &minor(1, 2, 0, 1));
    let total = sub(&t0, &t1);
    let total: Vec<T> = total
        .iter()
        .zip(t2.iter())
        .map(|(a, b)| a.clone() + b)
        .collect();
    [total[3].clone(), total[2].clone(), total[1].clone(), total[0].clone()]
}

/// Intersection form `g^{ab}` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct IntersectionForm {
    pub g: [[Float; 3]; 3],
    pub source_point: FlatPoint,
    pub phi: PhiValues,
}

impl IntersectionForm {
    pub fn determinant(&self) -> Float {
        let g = &self.g;
        let p = self.phi.phi0.prec();
        let m = |a: &Float, b: &Float, c: &Float, d: &Float| {
            Float::with_val(p, a * b) - Float::with_val(p, c * d)
        };
        Float::with_val(p, &g[0][0] * m(&g[1][1], &g[2][2], &g[1][2], &g[2][1]))
            - Float::with_val(p, &g[0][1] * m(&g[1][0], &g[2][2], &g[1][2], &g[2][0]))
            + Float::with_val(p, &g[0][2] * m(&g[1][0], &g[2][1], &g[1][1], &g[2][0]))
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.g[i][j] == self.g[j][i]))
    }
}

/// Builds `g^{ab}` at `point` from `phi`, which must have been evaluated at
/// the point's `X` (checked on the `t3 > 0` chart; for `t3 < 0` the caller's
/// `X` is taken as given).
pub fn intersection_form(point: &FlatPoint, phi: &PhiValues) -> Result<IntersectionForm> {
    if point.t3 > 0 {
        let x = point.x()?;
        let prec = x.prec().min(phi.x.prec());
        let diff = Float::with_val(prec, &x - &phi.x).abs();
        let scale = Float::with_val(prec, x.abs_ref()).max(&Float::with_val(prec, 1));
        let tol = Float::with_val(prec, Float::i_exp(1, -(prec as i32) / 2)) * scale;
        if diff > tol {
            return Err(Error::InvalidArgument(format!(
                "Phi was evaluated at X = {} but the point has X = {}",
                phi.x.to_f64(),
                x.to_f64()
            )));
        }
    }
    let prec = phi.phi0.prec();
    let lift = |v: &Float| Float::with_val(prec, v);
    let g = intersection_matrix(
        &lift(&point.t1),
        &lift(&point.t2),
        &lift(&point.t3),
        [&phi.phi0, &phi.phi1, &phi.phi2],
    );
    Ok(IntersectionForm {
        g,
        source_point: point.clone(),
        phi: phi.clone(),
    })
}

/// Monic cubic `u^3 + c2 u^2 + c1 u + c0 = det(g - u eta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicCubic {
    pub c2: Float,
    pub c1: Float,
    pub c0: Float,
    /// `|route (i) - route (ii)|` per coefficient `[c2, c1, c0]`, where route
    /// (i) is the determinant expansion and route (ii) the hand-expanded
    /// reference polynomial of [`expanded_reference_coefficients`].
    pub reference_discrepancy: [Float; 3],
}

/// The hand-expanded characteristic polynomial as commonly quoted for this
/// structure:
///
/// ```text
/// u^3 - (3t1 + Phi''/t3) u^2
///     - (-3 t1^2 - 2 t1 Phi''/t3 + (9 Phi'' + 15 Phi' - 6 Phi)/t3^2) u
///     + P(t, Phi),
/// P = ( -9 t1 t3 Phi'' + 243 Phi'' - 243 Phi' + 6 Phi Phi' - 9 Phi''^2
///       + 6 t1 t3 Phi + t1^2 t3^2 Phi'' - 3 Phi' Phi'' + t1^3 t3^3
///       - 4 Phi'^2 + 54 Phi - 15 t1 t3 Phi' ) / t3^3.
/// ```
///
/// Its `u^2` and `u` coefficients agree with the determinant; its constant
/// term does not (wrong overall sign, and `Phi Phi'` where the determinant
/// has `Phi Phi''`). It is kept only as the comparison route.
pub fn expanded_reference_coefficients(point: &FlatPoint, phi: &PhiValues) -> [Float; 3] {
    let p = phi.phi0.prec();
    let f = |v: &Float| Float::with_val(p, v);
    let (t1, t3) = (f(&point.t1), f(&point.t3));
    let (p0, p1, p2) = (&phi.phi0, &phi.phi1, &phi.phi2);
    let t3_2 = Float::with_val(p, t3.square_ref());
    let t3_3 = Float::with_val(p, &t3_2 * &t3);
    let t1t3 = Float::with_val(p, &t1 * &t3);

    let c2 = -(Float::with_val(p, 3 * &t1) + Float::with_val(p, p2 / &t3));
    let t1_sq = Float::with_val(p, t1.square_ref());
    let mixed = Float::with_val(p, 2 * &t1) * p2 / &t3;
    let tail = linear_combination(p, &[(9, p2), (15, p1), (-6, p0)]) / &t3_2;
    let c1: Float = -(Float::with_val(p, -3 * &t1_sq) - mixed + tail);

    let mut num = Float::with_val(p, -9 * &t1t3) * p2;
    num += Float::with_val(p, 243 * p2);
    num -= Float::with_val(p, 243 * p1);
    num += Float::with_val(p, 6 * p0) * p1;
    num -= Float::with_val(p, 9 * Float::with_val(p, p2.square_ref()));
    num += Float::with_val(p, 6 * &t1t3) * p0;
    num += Float::with_val(p, t1t3.square_ref()) * p2;
    num -= Float::with_val(p, 3 * p1) * p2;
    num += Float::with_val(p, (&t1t3).pow(3u32));
    num -= Float::with_val(p, 4 * Float::with_val(p, p1.square_ref()));
    num += Float::with_val(p, 54 * p0);
    num -= Float::with_val(p, 15 * &t1t3) * p1;
    let c0 = num / &t3_3;
    [c2, c1, c0]
}

pub fn characteristic_cubic(form: &IntersectionForm) -> CharacteristicCubic {
    let [lead, c2, c1, c0] = pencil_determinant(&form.g);
    let (c2, c1, c0) = (c2.div_by(&lead), c1.div_by(&lead), c0.div_by(&lead));
    let reference = expanded_reference_coefficients(&form.source_point, &form.phi);
    let gap = |a: &Float, b: &Float| Float::with_val(a.prec(), a - b).abs();
    let reference_discrepancy = [
        gap(&c2, &reference[0]),
        gap(&c1, &reference[1]),
        gap(&c0, &reference[2]),
    ];
    CharacteristicCubic {
        c2,
        c1,
        c0,
        reference_discrepancy,
    }
}

/// Roots `u1, u2, u3` of the characteristic cubic.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalCoords {
    pub u: [Complex; 3],
    /// `min_{i<j} |u_i - u_j|`.
    pub separation: Float,
    /// Set when the roots are within `sqrt(eps)` of colliding relative to
    /// their scale.
    pub near_degenerate: bool,
    pub condition: f64,
}

impl CanonicalCoords {
    pub fn sum(&self) -> Complex {
        self.u[0].add(&self.u[1]).add(&self.u[2])
    }

    pub fn product(&self) -> Complex {
        self.u[0].mul(&self.u[1]).mul(&self.u[2])
    }
}

const NEWTON_STEPS: usize = 6;

pub fn canonical_coordinates(cubic: &CharacteristicCubic, ctx: PrecisionContext) -> CanonicalCoords {
    let bits = ctx.bits();
    let lift = |v: &Float| Float::with_val(bits, v);
    let (c2, c1, c0) = (lift(&cubic.c2), lift(&cubic.c1), lift(&cubic.c0));
    let mut u = solve_monic_cubic(&c2, &c1, &c0, NEWTON_STEPS);
    u.sort_by(canonical_order);

    let separation = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| u[i].sub(&u[j]).abs())
        .reduce(|a, b| if b < a { b } else { a })
        .unwrap();
    let scale = u
        .iter()
        .map(Complex::abs)
        .fold(Float::with_val(bits, 1), |m, v| if v > m { v } else { m });
    let threshold = Float::with_val(bits, Float::i_exp(1, -(bits as i32) / 2)) * &scale;
    let condition = root_condition(&c2, &c1, &c0, &u);
    CanonicalCoords {
        near_degenerate: separation <= threshold,
        separation,
        condition,
        u,
    }
}

/// Gradient of `u1 + u2 + u3 = 3 t1 + Phi''/t3` in flat coordinates:
/// `(3, Phi'''/t3, (3 Phi''' - Phi'')/t3^2)`.
pub fn coordinate_jacobian_row(point: &FlatPoint, phi: &PhiValues) -> [Float; 3] {
    let p = phi.phi0.prec();
    let t3 = Float::with_val(p, &point.t3);
    let t3_sq = Float::with_val(p, t3.square_ref());
    [
        Float::with_val(p, 3),
        Float::with_val(p, &phi.phi3 / &t3),
        (Float::with_val(p, 3 * &phi.phi3) - &phi.phi2) / &t3_sq,
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanRow {
    pub delta: Float,
    pub x: Float,
    pub coords: CanonicalCoords,
    pub j2: Float,
    pub j3: Float,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityScan {
    /// Rows in ascending `delta`.
    pub rows: Vec<ScanRow>,
    /// Log-log slope of `|j2|` against `delta`; needs two distinct offsets.
    pub j2_exponent: Option<Float>,
}

impl SingularityScan {
    pub fn min_separation(&self) -> Option<&Float> {
        self.rows
            .iter()
            .map(|r| &r.coords.separation)
            .reduce(|a, b| if b < a { b } else { a })
    }
}

/// One scan row at `X = x0 - delta` for the point `(t1, ., t3)`.
pub fn scan_row(
    eval: &SeriesEvaluator,
    t1: &Float,
    t3: &Float,
    x0: &Float,
    delta: f64,
) -> Result<ScanRow> {
    let ctx = eval.ctx();
    let bits = ctx.bits();
    let delta = ctx.float(delta);
    let x = Float::with_val(bits, x0 - &delta);
    let phi = eval.phi(&x);
    if phi.outside_proven_region() {
        return Err(Error::Domain(format!(
            "X = {} is not inside the convergence region (a e^X = {:.6})",
            x.to_f64(),
            phi.tail_ratio
        )));
    }
    let point = FlatPoint::from_x(t1.clone(), &x, t3.clone())?;
    let form = intersection_form(&point, &phi)?;
    let coords = canonical_coordinates(&characteristic_cubic(&form), ctx);
    let [_, j2, j3] = coordinate_jacobian_row(&point, &phi);
    Ok(ScanRow {
        delta,
        x,
        coords,
        j2,
        j3,
    })
}

/// Canonical coordinates and Jacobian row along `X = x0 - delta`.
pub fn singularity_scan(
    table: &CoefficientTable,
    point_template: (&Float, &Float),
    x0: &Float,
    deltas: &[f64],
    ctx: PrecisionContext,
) -> Result<SingularityScan> {
    if deltas.is_empty() {
        return Err(Error::InvalidArgument("scan needs at least one offset".into()));
    }
    validate_deltas(deltas, None)?;
    let (t1, t3) = point_template;
    let eval = SeriesEvaluator::new(table, ctx);
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup();

    let rows = sorted
        .iter()
        .map(|&d| scan_row(&eval, t1, t3, x0, d))
        .collect::<Result<Vec<_>>>()?;

    let j2_exponent = if rows.len() >= 2 {
        let ds: Vec<Float> = rows.iter().map(|r| r.delta.clone()).collect();
        let js: Vec<Float> = rows.iter().map(|r| Float::with_val(bits_of(r), r.j2.abs_ref())).collect();
        Some(power_law_exponent(&ds, &js)?)
    } else {
        None
    };
    Ok(SingularityScan { rows, j2_exponent })
}

fn bits_of(row: &ScanRow) -> u32 {
    row.j2.prec()
}

/// Serialized scan row; numerics are decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub delta: String,
    #[serde(rename = "X")]
    pub x: String,
    pub separation: String,
    pub u1_re: String,
    pub u1_im: String,
    pub u2_re: String,
    pub u2_im: String,
    pub u3_re: String,
    pub u3_im: String,
    pub j2: String,
    pub j3: String,
}

impl ScanRow {
    pub fn record(&self, digits: usize) -> ScanRecord {
        let d = |v: &Float| to_decimal(v, digits);
        let [u1, u2, u3] = &self.coords.u;
        ScanRecord {
            delta: d(&self.delta),
            x: d(&self.x),
            separation: d(&self.coords.separation),
            u1_re: d(&u1.re),
            u1_im: d(&u1.im),
            u2_re: d(&u2.re),
            u2_im: d(&u2.im),
            u3_re: d(&u3.re),
            u3_im: d(&u3.im),
            j2: d(&self.j2),
            j3: d(&self.j3),
        }
    }
}

pub fn write_scan_csv<W: Write>(w: W, rows: &[ScanRow], digits: usize) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r.record(digits))?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_scan_json<W: Write>(mut w: W, rows: &[ScanRow], digits: usize) -> Result<()> {
    let records: Vec<ScanRecord> = rows.iter().map(|r| r.record(digits)).collect();
    serde_json::to_writer(&mut w, &records)?;
    writeln!(w)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionContext {
        PrecisionContext::new(50).unwrap()
    }

    fn phi_at(c: PrecisionContext, x: f64, p: [f64; 4]) -> PhiValues {
        PhiValues {
            x: c.float(x),
            phi0: c.float(p[0]),
            phi1: c.float(p[1]),
            phi2: c.float(p[2]),
            phi3: c.float(p[3]),
            n_terms: 1,
            tail_ratio: 0.0,
        }
    }

    #[test]
    fn metric_is_antidiagonal_involution() {
        let eta = FlatMetric::standard();
        assert!(eta.is_symmetric());
        assert!(eta.is_involutive());
    }

    #[test]
    fn euler_weights() {
        let e = EulerData::cp2();
        assert_eq!(e.weight(0, 0), 3);
        assert_eq!(e.weight(0, 1), 2);
        assert_eq!(e.weight(1, 1), 1);
        assert_eq!(e.weight(0, 2), 1);
        assert_eq!(e.weight(1, 2), 0);
        assert_eq!(e.weight(2, 2), -1);
    }

    #[test]
    fn zero_t3_is_singular_chart() {
        let c = ctx();
        assert!(matches!(
            FlatPoint::new(c.float(1), c.float(0), c.float(0)),
            Err(Error::SingularChart)
        ));
        let p = FlatPoint::new(c.float(1), c.float(0), c.float(-1)).unwrap();
        assert!(p.x().is_err());
    }

    #[test]
    fn form_matches_displayed_entries() {
        let c = ctx();
        let (t1, t3) = (1.5f64, 2.0f64);
        let point = FlatPoint::new(c.float(t1), c.float(0.25), c.float(t3)).unwrap();
        let x = point.x().unwrap().to_f64();
        let p = [0.7, 1.3, 2.9, 5.0];
        let phi = PhiValues {
            x: point.x().unwrap(),
            ..phi_at(c, x, p)
        };
        let form = intersection_form(&point, &phi).unwrap();
        assert!(form.is_symmetric());
        let g = |i: usize, j: usize| form.g[i][j].to_f64();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(close(g(0, 0), 3.0 / t3.powi(3) * (2.0 * p[0] - 9.0 * p[1] + 9.0 * p[2])));
        assert!(close(g(0, 1), 2.0 / t3.powi(2) * (3.0 * p[2] - p[1])));
        assert!(close(g(0, 2), t1));
        assert!(close(g(1, 1), t1 + p[2] / t3));
        assert_eq!(form.g[1][2], 3);
        assert_eq!(form.g[2][2], -t3);
    }

    #[test]
    fn mismatched_x_is_rejected() {
        let c = ctx();
        let point = FlatPoint::new(c.float(1), c.float(0.5), c.float(1)).unwrap();
        let phi = phi_at(c, 0.6, [1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(intersection_form(&point, &phi), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn quasi_homogeneity_defect_is_3_t1_t2() {
        let c = ctx();
        let point = FlatPoint::new(c.float(0.75), c.float(-0.5), c.float(1.25)).unwrap();
        let phi = phi_at(c, 0.0, [0.3, 0.8, 1.9, 4.0]);
        let defect = EulerData::cp2().quasi_homogeneity_defect(&point, &phi);
        assert!((defect.to_f64() - 3.0 * 0.75 * -0.5).abs() < 1e-40);
    }

    #[test]
    fn jacobian_by_substitution() {
        let c = ctx();
        let point = FlatPoint::new(c.float(0), c.float(0), c.float(2)).unwrap();
        let phi = phi_at(c, 0.0, [0.0, 0.0, 4.0, 0.0]);
        let j = coordinate_jacobian_row(&point, &phi);
        assert_eq!(j[0], 3);
        assert_eq!(j[1], 0);
        assert_eq!(j[2], -1);
    }

    #[test]
    fn triple_root_flags_degeneracy() {
        let c = ctx();
        let cubic = CharacteristicCubic {
            c2: c.float(0),
            c1: c.float(0),
            c0: c.float(0),
            reference_discrepancy: [c.float(0), c.float(0), c.float(0)],
        };
        let coords = canonical_coordinates(&cubic, c);
        assert!(coords.separation.is_zero());
        assert!(coords.near_degenerate);
        assert!(coords.condition.is_infinite());
    }

    #[test]
    fn factored_cubic_in_convention_order() {
        let c = ctx();
        let cubic = CharacteristicCubic {
            c2: c.float(-6),
            c1: c.float(11),
            c0: c.float(-6),
            reference_discrepancy: [c.float(0), c.float(0), c.float(0)],
        };
        let coords = canonical_coordinates(&cubic, c);
        let re: Vec<f64> = coords.u.iter().map(|u| u.re.to_f64()).collect();
        assert_eq!(re, vec![3.0, 2.0, 1.0]);
        assert!(!coords.near_degenerate);
        assert!((coords.separation.to_f64() - 1.0).abs() < 1e-40);
    }

    #[test]
    fn scan_records_have_all_columns() {
        let c = PrecisionContext::new(20).unwrap();
        let table = crate::invariants::compute_coefficients(40).unwrap();
        let scan = singularity_scan(&table, (&c.float(1), &c.float(1)), &c.float(1.9), &[0.3, 0.1], c).unwrap();
        assert_eq!(scan.rows.len(), 2);
        assert!(scan.rows[0].delta < scan.rows[1].delta);
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &scan.rows, 6).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "delta,X,separation,u1_re,u1_im,u2_re,u2_im,u3_re,u3_im,j2,j3"
        );
        assert!(singularity_scan(&table, (&c.float(1), &c.float(1)), &c.float(1.9), &[], c).is_err());
        assert!(singularity_scan(&table, (&c.float(1), &c.float(1)), &c.float(1.9), &[-0.1], c).is_err());
    }
}
