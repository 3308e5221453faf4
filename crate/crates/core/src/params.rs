use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::field::PrimeField;
use crate::rational::{ratio, Rational};

/// The designer's knobs: `servers` shares, any `tau` of which recover the
/// file, while any `z` of them learn at most a fraction `alpha` of it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SchemeParams {
    pub servers: usize,
    pub tau: usize,
    pub z: usize,
    pub alpha: Rational,
    pub field: PrimeField,
}

impl SchemeParams {
    pub fn new(servers: usize, tau: usize, z: usize, alpha: Rational, field: PrimeField) -> Result<Self> {
        let p = SchemeParams {
            servers,
            tau,
            z,
            alpha,
            field,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same as [`SchemeParams::new`] with a raw modulus.
    pub fn with_modulus(servers: usize, tau: usize, z: usize, alpha: Rational, q: u64) -> Result<Self> {
        Self::new(servers, tau, z, alpha, PrimeField::new(q)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if self.servers == 0 || self.servers > u16::MAX as usize {
            return bad(format!("T = {} must lie in [1, 65535]", self.servers));
        }
        if self.tau < 1 || self.tau > self.servers {
            return bad(format!("tau = {} must lie in [1, T = {}]", self.tau, self.servers));
        }
        if self.z < 1 || self.z >= self.tau {
            return bad(format!("z = {} must lie in [1, tau - 1 = {}]", self.z, self.tau as i64 - 1));
        }
        if self.alpha < Rational::zero() || self.alpha > Rational::one() {
            return bad(format!("alpha = {} must lie in [0, 1]", self.alpha));
        }
        if self.field.modulus() <= self.servers as u64 {
            return bad(format!(
                "q = {} must exceed T = {} to give every server a distinct nonzero point",
                self.field.modulus(),
                self.servers
            ));
        }
        Ok(())
    }

    /// z / tau, the leakage at which a single (tau, tau, T) ramp already suffices.
    pub fn ramp_threshold(&self) -> Rational {
        ratio(self.z as i128, self.tau as i128)
    }

    /// True when alpha < z/tau and the two-ramp composition is needed.
    pub fn is_composed(&self) -> bool {
        self.alpha < self.ramp_threshold()
    }
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "T={} tau={} z={} alpha={} q={}",
            self.servers,
            self.tau,
            self.z,
            self.alpha,
            self.field.modulus()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    #[test]
    fn ranges() {
        let q = 65_537;
        assert!(SchemeParams::with_modulus(4, 3, 2, ratio(1, 4), q).is_ok());
        assert!(SchemeParams::with_modulus(4, 5, 2, ratio(1, 4), q).is_err());
        assert!(SchemeParams::with_modulus(4, 3, 3, ratio(1, 4), q).is_err());
        assert!(SchemeParams::with_modulus(4, 3, 0, ratio(1, 4), q).is_err());
        assert!(SchemeParams::with_modulus(4, 1, 1, int(0), q).is_err());
        assert!(SchemeParams::with_modulus(4, 3, 2, ratio(5, 4), q).is_err());
        assert!(SchemeParams::with_modulus(4, 3, 2, ratio(-1, 4), q).is_err());
        assert!(SchemeParams::with_modulus(4, 3, 2, int(0), 3).is_err());
        assert!(SchemeParams::with_modulus(4, 3, 2, int(0), 5).is_ok());
        assert!(SchemeParams::with_modulus(4, 3, 2, int(0), 9).is_err());
    }

    #[test]
    fn case_split() {
        let p = |a| SchemeParams::with_modulus(4, 3, 2, a, 11).unwrap();
        assert!(p(ratio(1, 4)).is_composed());
        assert!(!p(ratio(2, 3)).is_composed());
        assert!(!p(int(1)).is_composed());
    }
}
