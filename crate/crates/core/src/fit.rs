//! Least-squares estimation of the growth constants in
//! `A_k ~ b a^k k^{-7/2}`.
//!
//! The exponent `-7/2` is fixed. With `y_k = ln(A_k k^{7/2})` the law is the
//! line `y_k = k ln a + ln b`, fitted by ordinary least squares over a window
//! `n0..=n` of the exact table.

use std::io::Write;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::CoefficientTable;
use crate::precision::{to_decimal, PrecisionContext};

/// Inclusive index range `n0..=n` used by a fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FitWindow {
    n0: usize,
    n: usize,
}

impl FitWindow {
    pub fn new(n0: usize, n: usize) -> Result<Self> {
        if n0 == 0 || n0 >= n {
            return Err(Error::InvalidArgument(format!(
                "fit window needs 1 <= n0 < n, got n0={n0}, n={n}"
            )));
        }
        Ok(FitWindow { n0, n })
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n - self.n0 + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn check_against(&self, table: &CoefficientTable) -> Result<()> {
        if self.n > table.n_max() {
            return Err(Error::InvalidArgument(format!(
                "fit window ends at {} but the table stops at {}",
                self.n,
                table.n_max()
            )));
        }
        Ok(())
    }
}

/// The headline window.
pub const DEFAULT_WINDOW: (usize, usize) = (900, 1000);

/// Windows `N0 = 500, 700, 900` with `N = 1000`.
pub const PRESET_WINDOWS: [(usize, usize); 3] = [(500, 1000), (700, 1000), (900, 1000)];

pub fn preset_windows() -> Vec<FitWindow> {
    PRESET_WINDOWS
        .iter()
        .map(|&(n0, n)| FitWindow { n0, n })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub a: Float,
    pub b: Float,
    pub ln_a: Float,
    pub ln_b: Float,
    pub window: FitWindow,
    /// Root mean square of `y_k - (k ln a + ln b)` over the window.
    pub rms_residual: Float,
}

impl FitResult {
    /// Two-point windows determine the line exactly and carry no residual
    /// information.
    pub fn low_confidence(&self) -> bool {
        self.window.len() < 3
    }

    pub fn record(&self, digits: usize) -> FitRecord {
        FitRecord {
            n0: self.window.n0,
            n: self.window.n,
            a: to_decimal(&self.a, digits),
            b: to_decimal(&self.b, digits),
            rms: to_decimal(&self.rms_residual, digits),
        }
    }
}

/// Serialized form of a [`FitResult`]; numerics are decimal strings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitRecord {
    pub n0: usize,
    pub n: usize,
    pub a: String,
    pub b: String,
    pub rms: String,
}

pub fn write_fit_json<W: Write>(mut w: W, records: &[FitRecord]) -> Result<()> {
    match records {
        [single] => serde_json::to_writer(&mut w, single)?,
        many => serde_json::to_writer(&mut w, many)?,
    }
    writeln!(w)?;
    Ok(())
}

pub fn write_fit_csv<W: Write>(w: W, records: &[FitRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in records {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

/// Ordinary least-squares line through `(xs, ys)`: returns `(slope, intercept)`.
pub fn least_squares_line(xs: &[Float], ys: &[Float]) -> Result<(Float, Float)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument(
            "least squares needs at least two paired samples".into(),
        ));
    }
    let bits = xs.iter().chain(ys).map(Float::prec).max().unwrap();
    let count = xs.len() as u32;
    let x_bar = Float::with_val(bits, Float::sum(xs.iter())) / count;
    let y_bar = Float::with_val(bits, Float::sum(ys.iter())) / count;

    let mut sxy = Float::new(bits);
    let mut sxx = Float::new(bits);
    for (x, y) in xs.iter().zip(ys) {
        let dx = Float::with_val(bits, x - &x_bar);
        let dy = Float::with_val(bits, y - &y_bar);
        sxy += Float::with_val(bits, &dx * &dy);
        sxx += Float::with_val(bits, dx.square_ref());
    }
    if sxx.is_zero() {
        return Err(Error::InvalidArgument(
            "least squares needs at least two distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - Float::with_val(bits, &slope * &x_bar);
    Ok((slope, intercept))
}

pub fn fit_growth(
    table: &CoefficientTable,
    window: FitWindow,
    ctx: PrecisionContext,
) -> Result<FitResult> {
    window.check_against(table)?;
    let bits = ctx.bits();
    let seven_halves = ctx.float(3.5);

    let ks: Vec<Float> = (window.n0..=window.n).map(|k| ctx.float(k as u32)).collect();
    let ys: Vec<Float> = (window.n0..=window.n)
        .zip(&ks)
        .map(|(k, kf)| {
            let a_k = table.get(k).expect("window checked against table");
            let mut y = ctx.from_rational(a_k).ln();
            y += Float::with_val(bits, kf.ln_ref()) * &seven_halves;
            y
        })
        .collect();

    let (ln_a, ln_b) = least_squares_line(&ks, &ys)?;

    let mut sq = Float::new(bits);
    for (k, y) in ks.iter().zip(&ys) {
        let predicted = Float::with_val(bits, &ln_a * k) + &ln_b;
        sq += Float::with_val(bits, y - &predicted).square();
    }
    let rms_residual = (sq / window.len() as u32).sqrt();

    Ok(FitResult {
        a: Float::with_val(bits, ln_a.exp_ref()),
        b: Float::with_val(bits, ln_b.exp_ref()),
        ln_a,
        ln_b,
        window,
        rms_residual,
    })
}

/// Adjacent ratios `(k, A_{k+1}/A_k)` for `k` in the window.
pub fn ratio_diagnostics(
    table: &CoefficientTable,
    window: FitWindow,
) -> Result<Vec<(usize, Rational)>> {
    if window.n >= table.n_max() {
        return Err(Error::InvalidArgument(format!(
            "ratio window must end before n_max={}, got n={}",
            table.n_max(),
            window.n
        )));
    }
    Ok((window.n0..=window.n)
        .map(|k| {
            let ratio = Rational::from(table.get(k + 1).unwrap() / table.get(k).unwrap());
            (k, ratio)
        })
        .collect())
}

/// `X0 = ln(1/a)`, the real boundary point of the convergence disk in `X`.
pub fn derive_x0(fit: &FitResult) -> Result<Float> {
    x0_from_growth_base(&fit.a)
}

pub fn x0_from_growth_base(a: &Float) -> Result<Float> {
    if !(*a > 0 && *a < 1) {
        return Err(Error::Domain(format!(
            "growth base must lie in (0, 1), got {}",
            a.to_f64()
        )));
    }
    Ok(-Float::with_val(a.prec(), a.ln_ref()))
}
