//! Exact fractions for leakage fractions, share-size ratios and the grid search.

use num_traits::{Signed, Zero};

/// A fraction kept in lowest terms with a positive denominator.
pub type Rational = num_rational::Ratio<i128>;

pub fn ratio(num: i128, den: i128) -> Rational {
    Rational::new(num, den)
}

pub fn int(n: i128) -> Rational {
    Rational::from_integer(n)
}

/// `max(x, 0)`.
pub fn positive_part(x: Rational) -> Rational {
    if x.is_negative() {
        Rational::zero()
    } else {
        x
    }
}

/// Parses `p/q` or a bare integer.
pub fn parse(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    let r = match s.split_once('/') {
        Some((n, d)) => {
            let n: i128 = n.trim().parse().map_err(|e| format!("bad numerator in {s:?}: {e}"))?;
            let d: i128 = d.trim().parse().map_err(|e| format!("bad denominator in {s:?}: {e}"))?;
            if d == 0 {
                return Err(format!("zero denominator in {s:?}"));
            }
            Rational::new(n, d)
        }
        None => int(s.parse().map_err(|e| format!("bad rational {s:?}: {e}"))?),
    };
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsing() {
        assert_eq!(parse("1/4").unwrap(), ratio(1, 4));
        assert_eq!(parse("2/8").unwrap(), ratio(1, 4));
        assert_eq!(parse("0/1").unwrap(), int(0));
        assert_eq!(parse(" 3 ").unwrap(), int(3));
        assert_eq!(parse("3/-6").unwrap(), ratio(-1, 2));
        assert!(parse("1/0").is_err());
        assert!(parse("a/2").is_err());
    }

    #[test]
    fn lowest_terms() {
        let r = ratio(6, -4);
        assert_eq!((*r.numer(), *r.denom()), (-3, 2));
        assert_eq!(positive_part(r), int(0));
        assert_eq!(positive_part(ratio(1, 3)), ratio(1, 3));
    }
}
