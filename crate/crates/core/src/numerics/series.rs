use crate::error::{Error, Result};

/// Partial sum of a series together with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    pub tail_bound: f64,
}

const MAX_TERMS: usize = 10_000_000;

/// Sums an alternating series with terms of decreasing magnitude.
///
/// Summation stops at the first term whose magnitude is below `tol`; by the
/// Leibniz criterion the tail is bounded by that term, which is reported as
/// `tail_bound` and not added. Zero terms are allowed anywhere (they carry no
/// sign), any other break of the sign pattern is an error.
pub fn alternating_sum<F: Fn(usize) -> f64>(term: F, tol: f64) -> Result<SeriesResult> {
    crate::error::positive("tol", tol)?;
    let mut sum = 0.0;
    let mut compensation = 0.0;
    let mut last_sign = 0.0_f64;
    for n in 0..MAX_TERMS {
        let t = term(n);
        if !t.is_finite() {
            return Err(Error::SeriesDivergence { terms: n, last: t });
        }
        if t != 0.0 {
            let sign = t.signum();
            if last_sign != 0.0 && sign == last_sign {
                return Err(Error::NonAlternating { term: n });
            }
            last_sign = sign;
        }
        if t.abs() < tol {
            return Ok(SeriesResult {
                value: sum,
                terms_used: n,
                tail_bound: t.abs(),
            });
        }
        // Kahan summation.
        let y = t - compensation;
        let s = sum + y;
        compensation = (s - sum) - y;
        sum = s;
    }
    Err(Error::SeriesDivergence {
        terms: MAX_TERMS,
        last: term(MAX_TERMS),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn leibniz_gives_pi() {
        let r = alternating_sum(|n| 4.0 * (-1f64).powi(n as i32) / (2 * n + 1) as f64, 1e-6).unwrap();
        assert!((r.value - PI).abs() <= r.tail_bound);
        assert!(r.tail_bound < 1e-6);
    }

    #[test]
    fn geometric_alternating() {
        let r = alternating_sum(|n| (-0.5f64).powi(n as i32), 1e-15).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_same_sign_terms() {
        let err = alternating_sum(|n| 1.0 / (n + 1) as f64, 1e-3).unwrap_err();
        assert_eq!(err, Error::NonAlternating { term: 1 });
    }
}
