//! Complex roots of monic cubics at arbitrary precision.
//!
//! Roots come from Cardano's formula evaluated in complex arithmetic and are
//! then polished with Newton steps on the undepressed polynomial.

use std::cmp::Ordering;
use std::fmt;

use rug::Float;

/// Complex number over MPFR reals; both parts share one precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Complex { re, im }
    }

    pub fn real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Complex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        Complex::real(Float::new(prec))
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn add(&self, o: &Complex) -> Complex {
        let p = self.prec();
        Complex::new(
            Float::with_val(p, &self.re + &o.re),
            Float::with_val(p, &self.im + &o.im),
        )
    }

    pub fn sub(&self, o: &Complex) -> Complex {
        let p = self.prec();
        Complex::new(
            Float::with_val(p, &self.re - &o.re),
            Float::with_val(p, &self.im - &o.im),
        )
    }

    pub fn mul(&self, o: &Complex) -> Complex {
        let p = self.prec();
        let re = Float::with_val(p, &self.re * &o.re) - Float::with_val(p, &self.im * &o.im);
        let im = Float::with_val(p, &self.re * &o.im) + Float::with_val(p, &self.im * &o.re);
        Complex::new(re, im)
    }

    pub fn scale(&self, s: &Float) -> Complex {
        let p = self.prec();
        Complex::new(Float::with_val(p, &self.re * s), Float::with_val(p, &self.im * s))
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    pub fn conj(&self) -> Complex {
        Complex::new(self.re.clone(), Float::with_val(self.im.prec(), -&self.im))
    }

    pub fn recip(&self) -> Complex {
        let n = self.norm_sqr();
        let p = self.prec();
        Complex::new(
            Float::with_val(p, &self.re / &n),
            Float::with_val(p, -Float::with_val(p, &self.im / &n)),
        )
    }

    pub fn div(&self, o: &Complex) -> Complex {
        self.mul(&o.recip())
    }

    fn polar(r: Float, theta: &Float) -> Complex {
        let p = r.prec();
        let (s, c) = Float::with_val(p, theta).sin_cos(Float::new(p));
        Complex::new(Float::with_val(p, &r * &c), Float::with_val(p, &r * &s))
    }

    fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Complex {
        if self.is_zero() {
            return self.clone();
        }
        let theta = self.arg() / 2u32;
        Complex::polar(self.abs().sqrt(), &theta)
    }

    /// Principal cube root.
    pub fn cbrt(&self) -> Complex {
        if self.is_zero() {
            return self.clone();
        }
        let theta = self.arg() / 3u32;
        Complex::polar(self.abs().cbrt(), &theta)
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(12);
        let re = crate::precision::to_decimal(&self.re, digits);
        let im_abs = Float::with_val(self.im.prec(), self.im.abs_ref());
        let im = crate::precision::to_decimal(&im_abs, digits);
        let sign = if self.im.is_sign_negative() { '-' } else { '+' };
        write!(f, "{re} {sign} {im}i")
    }
}

/// Evaluates `u^3 + c2 u^2 + c1 u + c0` and its derivative at `u`.
fn eval_with_derivative(c: &[Float; 3], u: &Complex) -> (Complex, Complex) {
    let p = u.prec();
    let [c2, c1, c0] = c;
    // Horner on (1, c2, c1, c0)
    let mut val = Complex::real(Float::with_val(p, 1));
    let mut der = Complex::zero(p);
    for coef in [c2, c1, c0] {
        der = der.mul(u).add(&val);
        val = val.mul(u).add(&Complex::real(Float::with_val(p, coef)));
    }
    (val, der)
}

/// Roots of the monic cubic `u^3 + c2 u^2 + c1 u + c0` with real
/// coefficients. One root is real and the other two are a conjugate pair,
/// or all three are real; the returned roots respect that structure
/// exactly. Order is unspecified.
pub fn solve_monic_cubic(c2: &Float, c1: &Float, c0: &Float, newton_steps: usize) -> [Complex; 3] {
    let p = c2.prec().max(c1.prec()).max(c0.prec());
    let f = |v: &Float| Float::with_val(p, v);

    // u = v - c2/3 gives v^3 + pp v + qq = 0.
    let shift = f(c2) / 3u32;
    let c2_sq = Float::with_val(p, c2.square_ref());
    let pp = f(c1) - Float::with_val(p, &c2_sq / 3u32);
    let qq = Float::with_val(p, &c2_sq * c2) * 2u32 / 27u32 - Float::with_val(p, c2 * c1) / 3u32 + c0;

    let half_q = Float::with_val(p, &qq / 2u32);
    let third_p = Float::with_val(p, &pp / 3u32);
    let disc = Float::with_val(p, half_q.square_ref()) + Float::with_val(p, third_p.square_ref()) * &third_p;

    let sqrt_disc = Complex::real(disc.clone()).sqrt();
    let minus_half_q = Complex::real(-half_q);
    // Take the larger of -q/2 +- sqrt(disc) to avoid cancellation.
    let cand_plus = minus_half_q.add(&sqrt_disc);
    let cand_minus = minus_half_q.sub(&sqrt_disc);
    let radicand = if cand_plus.norm_sqr() >= cand_minus.norm_sqr() {
        cand_plus
    } else {
        cand_minus
    };
    let big_c = radicand.cbrt();

    let half = Float::with_val(p, 0.5);
    let root3_half = Float::with_val(p, 3).sqrt() / 2u32;
    let omegas = [
        Complex::real(Float::with_val(p, 1)),
        Complex::new(Float::with_val(p, -&half), root3_half.clone()),
        Complex::new(Float::with_val(p, -&half), -root3_half),
    ];

    let coeffs = [f(c2), f(c1), f(c0)];
    let mut roots: Vec<Complex> = omegas
        .iter()
        .map(|w| {
            let v = if big_c.is_zero() {
                Complex::zero(p)
            } else {
                let cw = big_c.mul(w);
                cw.sub(&Complex::real(f(&pp)).div(&cw.scale(&Float::with_val(p, 3))))
            };
            let mut u = v.sub(&Complex::real(shift.clone()));
            for _ in 0..newton_steps {
                let (val, der) = eval_with_derivative(&coeffs, &u);
                if der.is_zero() || val.is_zero() {
                    break;
                }
                u = u.sub(&val.div(&der));
            }
            u
        })
        .collect();

    impose_real_structure(&mut roots, disc > 0);
    [roots.remove(0), roots.remove(0), roots.remove(0)]
}

// With real coefficients and positive discriminant there is one real root
// and a conjugate pair; otherwise all roots are real.
fn impose_real_structure(roots: &mut [Complex], one_real: bool) {
    if !one_real {
        for r in roots.iter_mut() {
            r.im = Float::new(r.im.prec());
        }
        return;
    }
    let real_idx = (0..3)
        .min_by(|&i, &j| {
            let a = Float::with_val(53, roots[i].im.abs_ref());
            let b = Float::with_val(53, roots[j].im.abs_ref());
            a.partial_cmp(&b).unwrap_or(Ordering::Equal)
        })
        .unwrap();
    roots[real_idx].im = Float::new(roots[real_idx].im.prec());
    let others: Vec<usize> = (0..3).filter(|&i| i != real_idx).collect();
    let (i, j) = (others[0], others[1]);
    let p = roots[i].prec();
    let re = Float::with_val(p, &roots[i].re + &roots[j].re) / 2u32;
    let im = (Float::with_val(p, roots[i].im.abs_ref()) + Float::with_val(p, roots[j].im.abs_ref())) / 2u32;
    roots[i] = Complex::new(re.clone(), Float::with_val(p, -&im));
    roots[j] = Complex::new(re, im);
}

/// Descending real part, ties broken by ascending imaginary part.
pub fn canonical_order(a: &Complex, b: &Complex) -> Ordering {
    b.re
        .partial_cmp(&a.re)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal))
}

/// `max_i (1 + |u_i| + |u_i|^2) / |P'(u_i)|`: sensitivity of the roots to
/// unit relative perturbations of the coefficients. Infinite at a multiple
/// root.
pub fn root_condition(c2: &Float, c1: &Float, c0: &Float, roots: &[Complex; 3]) -> f64 {
    let coeffs = [c2.clone(), c1.clone(), c0.clone()];
    roots
        .iter()
        .map(|u| {
            let (_, der) = eval_with_derivative(&coeffs, u);
            let d = der.abs().to_f64();
            let m = u.abs().to_f64();
            if d == 0.0 {
                f64::INFINITY
            } else {
                (1.0 + m + m * m) / d
            }
        })
        .fold(0.0, f64::max)
}
