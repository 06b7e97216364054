//! Exact Kontsevich coefficients `A_k` and the integer invariants
//! `N_k = A_k (3k-1)!`.
//!
//! The coefficients satisfy
//!
//! ```text
//! A_k = sum_{i=1}^{k-1} A_i A_{k-i} i(k-i) [(3i-2)(3k-3i-2)(k+2) + 8k - 8]
//!       / [6 (3k-1)(3k-2)(3k-3)],        A_1 = 1/2.
//! ```
//!
//! [`compute_coefficients`] evaluates this sum over the common denominator
//! `(3k-2)!`, which turns every product `A_i A_{k-i}` into an integer times a
//! binomial coefficient and leaves a single reduction per `k`.
//! [`compute_coefficients_rational`] evaluates the same sum term by term in
//! reduced rationals and serves as a reference for the fast path.

use std::io::{BufRead, Write};

use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Exact coefficients `A_1..A_{n_max}` of `phi(tau) = sum A_k tau^k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTable {
    coeffs: Vec<Rational>,
}

impl CoefficientTable {
    /// Wraps externally supplied coefficients. `coeffs[0]` is `A_1`.
    pub fn from_coefficients(coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("coefficient table is empty".into()));
        }
        Ok(CoefficientTable { coeffs })
    }

    pub fn n_max(&self) -> usize {
        self.coeffs.len()
    }

    /// `A_k` for `1 <= k <= n_max`.
    pub fn get(&self, k: usize) -> Option<&Rational> {
        k.checked_sub(1).and_then(|i| self.coeffs.get(i))
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Iterates `(k, A_k)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        self.coeffs.iter().enumerate().map(|(i, a)| (i + 1, a))
    }

    /// Table restricted to `A_1..A_n`.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.n_max() {
            return Err(Error::InvalidArgument(format!(
                "cannot truncate a table of {} terms to {n}",
                self.n_max()
            )));
        }
        Ok(CoefficientTable {
            coeffs: self.coeffs[..n].to_vec(),
        })
    }

    /// Writes the table in the line-oriented text format:
    ///
    /// ```text
    /// # kontsevich-A version=1 n_max=<N>
    /// <k> <numerator> <denominator>
    /// ```
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{TABLE_MAGIC} version={TABLE_VERSION} n_max={}", self.n_max())?;
        for (k, a) in self.iter() {
            writeln!(w, "{k} {} {}", a.numer(), a.denom())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| format_err(1, "missing header"))??;
        let n_max = parse_header(&header)?;

        let mut coeffs = Vec::with_capacity(n_max);
        for (idx, line) in lines.enumerate() {
            let line_no = idx + 2;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split_whitespace();
            let (Some(k), Some(num), Some(den), None) =
                (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(format_err(line_no, "expected `<k> <numerator> <denominator>`"));
            };
            let k: usize = k
                .parse()
                .map_err(|_| format_err(line_no, "index is not a positive integer"))?;
            if k != coeffs.len() + 1 {
                return Err(format_err(
                    line_no,
                    &format!("expected index {}, found {k}", coeffs.len() + 1),
                ));
            }
            let num = parse_decimal_integer(num).ok_or_else(|| format_err(line_no, "bad numerator"))?;
            let den = parse_decimal_integer(den).ok_or_else(|| format_err(line_no, "bad denominator"))?;
            if den <= 0 {
                return Err(format_err(line_no, "denominator must be positive"));
            }
            coeffs.push(Rational::from((num, den)));
        }
        if coeffs.len() != n_max {
            return Err(format_err(
                coeffs.len() + 1,
                &format!("header declares n_max={n_max} but {} records follow", coeffs.len()),
            ));
        }
        CoefficientTable::from_coefficients(coeffs)
    }
}

const TABLE_MAGIC: &str = "# kontsevich-A";
const TABLE_VERSION: u32 = 1;

fn format_err(line: usize, reason: &str) -> Error {
    Error::TableFormat {
        line,
        reason: reason.to_owned(),
    }
}

fn parse_header(header: &str) -> Result<usize> {
    let rest = header
        .strip_prefix(TABLE_MAGIC)
        .ok_or_else(|| format_err(1, "not a kontsevich-A table"))?;
    let mut version = None;
    let mut n_max = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("version", v)) => version = v.parse::<u32>().ok(),
            Some(("n_max", v)) => n_max = v.parse::<usize>().ok(),
            _ => return Err(format_err(1, &format!("unexpected header field `{field}`"))),
        }
    }
    match (version, n_max) {
        (Some(TABLE_VERSION), Some(n)) if n >= 1 => Ok(n),
        (Some(v), _) if v != TABLE_VERSION => {
            Err(format_err(1, &format!("unsupported table version {v}")))
        }
        _ => Err(format_err(1, "header needs version=1 and n_max>=1")),
    }
}

// Decimal only: no sign other than a leading '-', no exponent, no radix prefix.
fn parse_decimal_integer(s: &str) -> Option<Integer> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Integer::from_str_radix(s, 10).ok()
}

/// Degree-`k` genus-zero invariant of CP²: the number of rational curves of
/// degree `k` through `3k-1` generic points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GwInvariant {
    pub k: usize,
    pub value: Integer,
}

/// Coefficient of `e^{mX}` after substituting the truncated series into the
/// ODE satisfied by `Phi(X)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OdeResidualReport {
    pub order: usize,
    pub residual: Rational,
}

/// The bracket `(3i-2)(3k-3i-2)(k+2) + 8k - 8` times `i(k-i)`.
fn recurrence_weight(k: i64, i: i64) -> Integer {
    let j = k - i;
    let bracket = Integer::from((3 * i - 2) * (3 * j - 2)) * (k + 2) + (8 * k - 8);
    bracket * (i * j)
}

/// `6 (3k-1)(3k-2)(3k-3)`.
fn recurrence_denominator(k: i64) -> Integer {
    Integer::from(6) * (3 * k - 1) * (3 * k - 2) * (3 * k - 3)
}

fn check_n_max(n_max: usize) -> Result<()> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    Ok(())
}

/// Computes `A_1..A_{n_max}` exactly.
pub fn compute_coefficients(n_max: usize) -> Result<CoefficientTable> {
    check_n_max(n_max)?;

    // n_ints[k-1] = N_k, the numerator of A_k over (3k-1)!.
    let mut n_ints: Vec<Integer> = Vec::with_capacity(n_max);
    let mut coeffs: Vec<Rational> = Vec::with_capacity(n_max);
    n_ints.push(Integer::from(1));
    coeffs.push(Rational::from((1, 2)));

    // (3k-1)! for the current k, starting at k = 1.
    let mut factorial = Integer::from(2);

    for k in 2..=n_max as i64 {
        let top = 3 * k - 2;
        // binom = C(3k-2, 3i-1), starting at i = 1.
        let mut binom = Integer::from(top) * (top - 1) / 2u32;
        let mut sum = Integer::new();
        for i in 1..=k / 2 {
            let j = k - i;
            let mut term = Integer::from(&n_ints[i as usize - 1] * &n_ints[j as usize - 1]);
            term *= &binom;
            term *= recurrence_weight(k, i);
            if i != j {
                term <<= 1;
            }
            sum += term;

            // C(n, m+3) = C(n, m) (n-m)(n-m-1)(n-m-2) / ((m+1)(m+2)(m+3))
            let m = 3 * i - 1;
            binom *= Integer::from((top - m) * (top - m - 1)) * (top - m - 2);
            binom.div_exact_mut(&(Integer::from((m + 1) * (m + 2)) * (m + 3)));
        }

        // A_k = sum / (6 (3k-2)(3k-3) (3k-1)!), so N_k = sum / (6 (3k-2)(3k-3)).
        let small_den = Integer::from(6) * (3 * k - 2) * (3 * k - 3);
        factorial *= Integer::from((3 * k - 3) * (3 * k - 2)) * (3 * k - 1);
        if !sum.is_divisible(&small_den) {
            return Err(Error::InternalConsistency(format!(
                "A_{k} * (3k-1)! is not an integer"
            )));
        }
        let n_k = sum.div_exact(&small_den);
        coeffs.push(Rational::from((n_k.clone(), factorial.clone())));
        n_ints.push(n_k);
    }
    Ok(CoefficientTable { coeffs })
}

/// Computes `A_1..A_{n_max}` by summing the recurrence term by term in
/// reduced rationals. Quadratically slower in operand size than
/// [`compute_coefficients`]; intended as a reference.
pub fn compute_coefficients_rational(n_max: usize) -> Result<CoefficientTable> {
    check_n_max(n_max)?;
    let mut coeffs: Vec<Rational> = vec![Rational::from((1, 2))];
    for k in 2..=n_max as i64 {
        let mut sum = Rational::new();
        for i in 1..=k / 2 {
            let j = k - i;
            let mut term = Rational::from(&coeffs[i as usize - 1] * &coeffs[j as usize - 1]);
            term *= recurrence_weight(k, i);
            if i != j {
                term *= 2u32;
            }
            sum += term;
        }
        sum /= recurrence_denominator(k);
        coeffs.push(sum);
    }
    Ok(CoefficientTable { coeffs })
}

/// `N_k = A_k (3k-1)!`, checked to be an integer.
pub fn gw_invariant(table: &CoefficientTable, k: usize) -> Result<GwInvariant> {
    let a = table.get(k).ok_or_else(|| {
        Error::InvalidArgument(format!("degree {k} outside 1..={}", table.n_max()))
    })?;
    let factorial = Integer::from(Integer::factorial(3 * k as u32 - 1));
    let product = Rational::from(a * &factorial);
    if *product.denom() != 1 {
        return Err(Error::InternalConsistency(format!(
            "A_{k} * (3k-1)! = {product} is not an integer"
        )));
    }
    Ok(GwInvariant {
        k,
        value: product.into_numer_denom().0,
    })
}

/// Substitutes `Phi(X) = sum A_k e^{kX}` into
///
/// ```text
/// -6 Phi + 33 Phi' - 54 Phi'' - (Phi'')^2 + Phi''' (27 + 2 Phi' - 3 Phi'') = 0
/// ```
///
/// and returns the exact coefficient of `e^{mX}` for every `m <= n_max`.
/// With `Phi^{(r)} = sum k^r A_k e^{kX}` that coefficient is
///
/// ```text
/// (27m^3 - 54m^2 + 33m - 6) A_m
///   + sum_{i+j=m} A_i A_j [ i^3 (2j - 3j^2) - i^2 j^2 ]
/// ```
///
/// This does not use the recurrence, so zero residuals are an independent
/// confirmation of the table.
pub fn verify_ode_coefficients(table: &CoefficientTable) -> Vec<OdeResidualReport> {
    verify_ode_coefficients_up_to(table, table.n_max())
}

/// As [`verify_ode_coefficients`], for orders `1..=min(m_max, n_max)`.
pub fn verify_ode_coefficients_up_to(
    table: &CoefficientTable,
    m_max: usize,
) -> Vec<OdeResidualReport> {
    let a = table.coefficients();
    (1..=m_max.min(table.n_max()))
        .map(|m| {
            let mi = m as i64;
            let linear = Integer::from(27 * mi * mi * mi - 54 * mi * mi + 33 * mi - 6);
            let mut residual = Rational::from(&a[m - 1] * &linear);
            for i in 1..m {
                let j = m - i;
                let (ii, jj) = (i as i64, j as i64);
                let weight =
                    Integer::from(ii * ii * ii) * (2 * jj - 3 * jj * jj) - Integer::from(ii * ii * jj * jj);
                residual += Rational::from(&a[i - 1] * &a[j - 1]) * weight;
            }
            OdeResidualReport {
                order: m,
                residual,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn first_coefficients_by_hand() {
        let t = compute_coefficients(3).unwrap();
        assert_eq!(t.get(1), Some(&q(1, 2)));
        assert_eq!(t.get(2), Some(&q(1, 120)));
        assert_eq!(t.get(3), Some(&q(1, 3360)));
        assert_eq!(t.get(4), None);
        assert_eq!(t.get(0), None);
    }

    #[test]
    fn zero_terms_rejected() {
        assert!(matches!(compute_coefficients(0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            compute_coefficients_rational(0),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn fast_and_rational_routes_agree() {
        let fast = compute_coefficients(80).unwrap();
        let slow = compute_coefficients_rational(80).unwrap();
        assert_eq!(fast, slow);
    }

    #[test]
    fn known_invariants() {
        // 1, 1, 12, 620, 87304, 26312976: the classical counts.
        let t = compute_coefficients(6).unwrap();
        let expected = [1u64, 1, 12, 620, 87304, 26312976];
        for (k, &n) in (1..=6).zip(expected.iter()) {
            assert_eq!(gw_invariant(&t, k).unwrap().value, n, "N_{k}");
        }
    }

    #[test]
    fn invariant_out_of_range() {
        let t = compute_coefficients(3).unwrap();
        assert!(matches!(gw_invariant(&t, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(gw_invariant(&t, 4), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn corrupted_table_fails_integrality() {
        let t = CoefficientTable::from_coefficients(vec![q(1, 2), q(1, 7)]).unwrap();
        assert!(matches!(
            gw_invariant(&t, 2),
            Err(Error::InternalConsistency(_))
        ));
    }

    #[test]
    fn ode_residual_small_orders() {
        let t = compute_coefficients(3).unwrap();
        let reports = verify_ode_coefficients(&t);
        assert_eq!(reports.len(), 3);
        assert!(reports.iter().all(|r| r.residual == 0));

        // A wrong A_2 must show up at order 2 and nowhere earlier.
        let bad = CoefficientTable::from_coefficients(vec![q(1, 2), q(1, 121)]).unwrap();
        let reports = verify_ode_coefficients(&bad);
        assert_eq!(reports[0].residual, 0);
        assert_ne!(reports[1].residual, 0);
    }

    #[test]
    fn one_term_table_satisfies_first_order() {
        let t = compute_coefficients(1).unwrap();
        let reports = verify_ode_coefficients(&t);
        assert_eq!(reports, vec![OdeResidualReport { order: 1, residual: Rational::new() }]);
    }

    #[test]
    fn table_text_format() {
        let t = compute_coefficients(3).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "# kontsevich-A version=1 n_max=3\n1 1 2\n2 1 120\n3 1 3360\n"
        );
        let back = CoefficientTable::read_from(text.as_bytes()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn table_reader_rejects_malformed_input() {
        let cases = [
            "",
            "# something-else version=1 n_max=1\n1 1 2\n",
            "# kontsevich-A version=2 n_max=1\n1 1 2\n",
            "# kontsevich-A version=1 n_max=2\n1 1 2\n",
            "# kontsevich-A version=1 n_max=1\n2 1 2\n",
            "# kontsevich-A version=1 n_max=1\n1 1 0\n",
            "# kontsevich-A version=1 n_max=1\n1 1e3 2\n",
            "# kontsevich-A version=1 n_max=1\n1 1 2 extra\n",
        ];
        for text in cases {
            assert!(CoefficientTable::read_from(text.as_bytes()).is_err(), "{text:?}");
        }
    }

    #[test]
    fn truncation() {
        let t = compute_coefficients(5).unwrap();
        assert_eq!(t.truncated(2).unwrap(), compute_coefficients(2).unwrap());
        assert!(t.truncated(0).is_err());
        assert!(t.truncated(6).is_err());
    }
}
