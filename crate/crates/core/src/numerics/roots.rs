use crate::error::{Error, Result};

/// Locates the point in `[lo, hi]` where `predicate` flips, to within `tol`.
pub fn bisect<P: FnMut(f64) -> bool>(mut predicate: P, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::Domain(format!("bisect needs lo < hi and tol > 0 (lo={lo}, hi={hi}, tol={tol})")));
    }
    let at_lo = predicate(lo);
    if at_lo == predicate(hi) {
        return Err(Error::Bracketing { lo, hi });
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if predicate(mid) == at_lo {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_root_of_two() {
        let x = bisect(|x| x * x > 2.0, 1.0, 2.0, 1e-10).unwrap();
        assert!((x - 2f64.sqrt()).abs() <= 1e-10);
    }

    #[test]
    fn step_function() {
        let x = bisect(|x| x > 0.5, 0.0, 1.0, 1e-6).unwrap();
        assert!((x - 0.5).abs() <= 1e-6);
    }

    #[test]
    fn missing_sign_change() {
        assert!(matches!(
            bisect(|x| x > 5.0, 0.0, 1.0, 1e-6),
            Err(Error::Bracketing { .. })
        ));
    }

    proptest! {
        #[test]
        fn finds_monotone_flip(flip in -10.0f64..10.0, tol in 1e-12f64..1e-2) {
            let x = bisect(|x| x >= flip, -10.5, 10.5, tol).unwrap();
            prop_assert!((x - flip).abs() <= tol);
        }
    }
}
