//! The published headline numbers are reproduced when the series is summed
//! at `X = ln(1/0.138)` (the growth base rounded to three digits) and the
//! direct-sum `Phi''` is kept in the cubic.

use std::sync::OnceLock;

use kontsevich_cp2::frobenius::FlatPoint;
use kontsevich_cp2::*;
use rug::Float;

fn table() -> &'static CoefficientTable {
    static TABLE: OnceLock<CoefficientTable> = OnceLock::new();
    TABLE.get_or_init(|| compute_coefficients(1000).unwrap())
}

fn ctx() -> PrecisionContext {
    PrecisionContext::new(60).unwrap()
}

fn rounded_x0() -> Float {
    let c = ctx();
    let a = c.parse("0.138").unwrap();
    Float::with_val(c.bits(), a.recip_ref()).ln()
}

fn close(got: &Float, want: f64, tol: f64) {
    let g = got.to_f64();
    assert!((g - want).abs() <= tol, "got {g}, want {want} +- {tol}");
}

#[test]
fn phi_values_at_rounded_growth_base() {
    let v = eval_phi(table(), &rounded_x0(), ctx());
    close(&v.phi0, 4.268908, 1e-5);
    close(&v.phi1, 5.408, 1e-3);
    close(&v.phi2, 12.25, 0.02);
    close(&constraint_residual(&v), 1.07, 0.03);
    close(&refined_phi2(&v.phi1), 12.60, 0.01);
}

#[test]
fn roots_with_direct_sum_second_derivative() {
    let c = ctx();
    let x = rounded_x0();
    let phi = eval_phi(table(), &x, c);
    let point = FlatPoint::from_x(c.float(1), &x, c.float(1)).unwrap();
    let coords = canonical_coordinates(&characteristic_cubic(&intersection_form(&point, &phi).unwrap()), c);
    let [u1, u2, u3] = &coords.u;
    close(&u1.re, 22.25, 0.05);
    close(&u2.re, -3.5, 0.05);
    close(&u2.im, -2.29, 0.05);
    assert_eq!(*u3, u2.conj());
}

#[test]
fn fitted_base_differs_from_rounded_base() {
    let c = ctx();
    let fit = fit_growth(table(), FitWindow::new(900, 1000).unwrap(), c).unwrap();
    let x0 = derive_x0(&fit).unwrap();
    let shift = Float::with_val(c.bits(), rounded_x0() - &x0).to_f64();
    assert!(shift > 6e-5 && shift < 8e-5, "X shift {shift}");
    let fitted = eval_phi(table(), &x0, c);
    let rounded = eval_phi(table(), &rounded_x0(), c);
    assert!(rounded.phi0 > fitted.phi0);
    assert!(rounded.phi2 > fitted.phi2);
}
