//! Closed-form optimal share size and randomness.
//!
//! Pure arithmetic on `(tau, z, alpha)`, with no dependency on the field or
//! the encoder, so the oracle can hold constructions against it.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::leaky::{self, SuperblockLayout};
use crate::params::SchemeParams;
use crate::rational::{int, positive_part, ratio, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlanCase {
    /// `alpha >= z/tau`: one (tau, tau, T) ramp.
    RampOnly,
    /// `alpha < z/tau`: two ramps side by side.
    Composed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemePlan {
    pub params: SchemeParams,
    /// Per-server share size over file entropy.
    pub lambda_ratio: Rational,
    /// Sum of all share sizes over file entropy.
    pub lambda_sum_ratio: Rational,
    /// Encoder randomness over file entropy.
    pub rho_ratio: Rational,
    pub layout: SuperblockLayout,
    pub case: PlanCase,
}

/// `max((1 - alpha)/(tau - z), 1/tau)`.
pub fn lambda_ratio(tau: usize, z: usize, alpha: Rational) -> Rational {
    let privacy = (Rational::one() - alpha) / int((tau - z) as i128);
    privacy.max(ratio(1, tau as i128))
}

/// `[z - tau alpha]^+ / (tau - z)`.
pub fn rho_ratio(tau: usize, z: usize, alpha: Rational) -> Rational {
    positive_part(int(z as i128) - int(tau as i128) * alpha) / int((tau - z) as i128)
}

pub fn plan(params: &SchemeParams) -> Result<SchemePlan> {
    params.validate()?;
    let lambda = lambda_ratio(params.tau, params.z, params.alpha);
    Ok(SchemePlan {
        params: *params,
        lambda_ratio: lambda,
        lambda_sum_ratio: lambda * int(params.servers as i128),
        rho_ratio: rho_ratio(params.tau, params.z, params.alpha),
        layout: leaky::layout(params),
        case: if params.is_composed() {
            PlanCase::Composed
        } else {
            PlanCase::RampOnly
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepRow {
    pub z: usize,
    pub alpha: Rational,
    pub lambda: Rational,
    pub rho: Rational,
}

/// Optimal ratios over a grid of privacy thresholds and leakage levels.
pub fn sweep(servers: usize, tau: usize, z_range: RangeInclusive<usize>, alpha_grid: &[Rational]) -> Result<Vec<SweepRow>> {
    if tau < 2 || tau > servers {
        return Err(Error::InvalidParams(format!("need 2 <= tau <= T, got tau = {tau}, T = {servers}")));
    }
    if *z_range.start() < 1 || *z_range.end() >= tau {
        return Err(Error::InvalidParams(format!(
            "z range {}..={} must lie in [1, {}]",
            z_range.start(),
            z_range.end(),
            tau - 1
        )));
    }
    if let Some(a) = alpha_grid.iter().find(|a| **a < Rational::zero() || **a > Rational::one()) {
        return Err(Error::InvalidParams(format!("alpha = {a} outside [0, 1]")));
    }
    let mut rows = Vec::with_capacity(z_range.clone().count() * alpha_grid.len());
    for z in z_range {
        for &alpha in alpha_grid {
            rows.push(SweepRow {
                z,
                alpha,
                lambda: lambda_ratio(tau, z, alpha),
                rho: rho_ratio(tau, z, alpha),
            });
        }
    }
    Ok(rows)
}

/// `{k/den : k = 0..=den}`.
pub fn alpha_grid(den: usize) -> Vec<Rational> {
    (0..=den).map(|k| ratio(k as i128, den as i128)).collect()
}

pub const SWEEP_CSV_HEADER: &str = "z,alpha_num,alpha_den,lambda_num,lambda_den,rho_num,rho_den";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(32 * (rows.len() + 1));
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.z,
            r.alpha.numer(),
            r.alpha.denom(),
            r.lambda.numer(),
            r.lambda.denom(),
            r.rho.numer(),
            r.rho.denom()
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use proptest::prelude::*;

    fn p(t: usize, tau: usize, z: usize, alpha: Rational) -> SchemeParams {
        SchemeParams::new(t, tau, z, alpha, PrimeField::default()).unwrap()
    }

    #[test]
    fn shamir_point() {
        let plan = plan(&p(12, 7, 6, int(0))).unwrap();
        assert_eq!(plan.lambda_ratio, int(1));
        assert_eq!(plan.rho_ratio, int(6));
        assert_eq!(plan.lambda_sum_ratio, int(12));
        assert_eq!(plan.case, PlanCase::Composed);
    }

    #[test]
    fn plug_in_values() {
        let plan2 = plan(&p(12, 7, 2, int(0))).unwrap();
        assert_eq!((plan2.lambda_ratio, plan2.rho_ratio), (ratio(1, 5), ratio(2, 5)));
        let boundary = plan(&p(12, 7, 2, ratio(2, 7))).unwrap();
        assert_eq!((boundary.lambda_ratio, boundary.rho_ratio), (ratio(1, 7), int(0)));
        assert_eq!(boundary.case, PlanCase::RampOnly);
        // Both branches agree at the kink.
        assert_eq!((int(1) - ratio(2, 7)) / int(5), ratio(1, 7));
    }

    #[test]
    fn ramp_special_case() {
        // alpha = 0, z = tau - L: share 1/L, randomness (tau - L)/L.
        for tau in 2..8usize {
            for l in 1..tau {
                let plan = plan(&p(8, tau, tau - l, int(0))).unwrap();
                assert_eq!(plan.lambda_ratio, ratio(1, l as i128));
                assert_eq!(plan.rho_ratio, ratio((tau - l) as i128, l as i128));
            }
        }
    }

    #[test]
    fn invalid_ranges_are_reported() {
        let bad = SchemeParams {
            servers: 4,
            tau: 3,
            z: 3,
            alpha: int(0),
            field: PrimeField::default(),
        };
        let err = plan(&bad).unwrap_err();
        assert!(err.to_string().contains("z = 3"));
    }

    #[test]
    fn sweep_grid_values() {
        let rows = sweep(12, 7, 1..=6, &alpha_grid(28)).unwrap();
        assert_eq!(rows.len(), 6 * 29);
        let z6: Vec<_> = rows.iter().filter(|r| r.z == 6).collect();
        assert_eq!(z6[0].lambda, int(1));
        for r in &z6 {
            if r.alpha >= ratio(6, 7) {
                assert_eq!(r.lambda, ratio(1, 7));
            }
        }
        for r in &rows {
            assert!(r.lambda >= ratio(1, 7));
            let threshold = ratio(r.z as i128, 7);
            assert_eq!(r.rho.is_zero(), r.alpha >= threshold);
        }
        let csv = sweep_csv(&rows[..2]);
        assert_eq!(csv, format!("{SWEEP_CSV_HEADER}\n1,0,1,1,6,1,6\n1,1,28,9,56,1,8\n"));
        assert!(sweep(12, 7, 0..=6, &[]).is_err());
        assert!(sweep(12, 7, 1..=7, &[]).is_err());
        assert!(sweep(12, 7, 1..=6, &[ratio(3, 2)]).is_err());
    }

    proptest! {
        #[test]
        fn monotone(tau in 2usize..12, z_seed in 0usize..12, a in 0i128..60, b in 0i128..60, den in 1i128..60) {
            let z = 1 + z_seed % (tau - 1);
            let (lo, hi) = (ratio(a.min(b).min(den), den), ratio(a.max(b).min(den), den));
            prop_assert!(lambda_ratio(tau, z, hi) <= lambda_ratio(tau, z, lo));
            prop_assert!(rho_ratio(tau, z, hi) <= rho_ratio(tau, z, lo));
            if z + 1 < tau && lo < ratio(z as i128, tau as i128) {
                prop_assert!(lambda_ratio(tau, z, lo) <= lambda_ratio(tau, z + 1, lo));
            }
        }
    }
}
