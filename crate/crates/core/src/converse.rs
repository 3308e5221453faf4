//! The share-size lower bound as a finite optimization.
//!
//! Any uniform scheme's per-server share size, over `H(F)`, is at least the
//! minimum of [`gradient_objective`] over non-decreasing profiles on
//! `[z, tau + 1]` pinned at `phi(z) = alpha` and `phi(tau) = phi(tau + 1) = 1`.
//! This module searches that minimum exhaustively on a rational grid and
//! checks the concave-envelope facts the bound rests on.
//!
//! A grid search certifies the bound on the grid only; it cannot refute it
//! for off-grid profiles.

use num_integer::Integer;
use num_traits::{One, Zero};

use crate::access::{concave_envelope, gradient_objective};
pub use crate::access::GridFunction;
use crate::error::{Error, Result};
use crate::rational::{int, positive_part, ratio, Rational};

/// Upper limit on the number of grid profiles one search may visit.
pub const MAX_SEARCH_STATES: u128 = 2_000_000;

/// Non-decreasing sequences of length `k` over `m` values: C(m + k - 1, k).
fn sequence_count(m: u128, k: u128) -> u128 {
    let mut c = 1u128;
    for i in 0..k {
        c = c * (m + i) / (i + 1);
        if c > MAX_SEARCH_STATES * 1000 {
            return c;
        }
    }
    c
}

struct Search {
    // Profile numerators over the grid denominator; pinned ends included.
    values: Vec<i64>,
    best: i64,
    best_values: Vec<i64>,
}

impl Search {
    fn objective(&self) -> i64 {
        self.values
            .windows(3)
            .map(|w| (2 * w[1] - w[0] - w[2]).max(0))
            .sum()
    }

    /// Fills interior slot `i` (1-based within `values`) onwards.
    fn fill(&mut self, i: usize, top: i64) {
        let last_interior = self.values.len() - 3;
        if i > last_interior {
            let obj = self.objective();
            if obj < self.best {
                self.best = obj;
                self.best_values.clone_from(&self.values);
            }
            return;
        }
        // Monotone and bounded by the pin phi(tau) = top.
        for v in self.values[i - 1]..=top {
            self.values[i] = v;
            self.fill(i + 1, top);
        }
    }
}

/// Exact minimum of the gradient objective over every non-decreasing profile
/// on `[z, tau + 1]` with values in `{k / den}` and the boundary pins, plus
/// one minimizer.
pub fn min_gradient_objective(z: usize, tau: usize, alpha: Rational, den: u64) -> Result<(Rational, GridFunction)> {
    if alpha > Rational::one() || alpha < Rational::zero() {
        return Err(Error::Infeasible(format!("phi(z) = alpha = {alpha} outside [0, 1]")));
    }
    if tau <= z {
        return Err(Error::InvalidParams(format!("need z < tau, got z = {z}, tau = {tau}")));
    }
    if den == 0 {
        return Err(Error::InvalidParams("grid denominator must be positive".into()));
    }
    let scaled = alpha * int(den as i128);
    if !scaled.is_integer() {
        return Err(Error::InvalidParams(format!("alpha = {alpha} is not on the 1/{den} grid")));
    }
    let low = scaled.to_integer() as i64;
    let top = den as i64;
    let interior = tau - z - 1;
    let states = sequence_count((top - low + 1) as u128, interior as u128);
    if states > MAX_SEARCH_STATES {
        return Err(Error::SearchTooLarge(format!(
            "{states} profiles for z = {z}, tau = {tau}, 1/{den} grid exceeds {MAX_SEARCH_STATES}"
        )));
    }

    let mut values = vec![low; interior + 3];
    values[interior + 1] = top;
    values[interior + 2] = top;
    let mut search = Search {
        best_values: values.clone(),
        values,
        best: i64::MAX,
    };
    search.fill(1, top);

    let d = den as i128;
    let argmin = GridFunction::new(
        z as i64,
        search.best_values.iter().map(|&v| ratio(v as i128, d)).collect(),
    );
    Ok((ratio(search.best as i128, d), argmin))
}

/// The piecewise-linear profile on `[z, tau + 1]`: rises from `alpha` to 1 at
/// constant slope, then stays at 1.
pub fn linear_profile(z: usize, tau: usize, alpha: Rational) -> GridFunction {
    let slope = (Rational::one() - alpha) / int((tau - z) as i128);
    let mut values: Vec<Rational> = (0..=(tau - z)).map(|k| alpha + slope * int(k as i128)).collect();
    values.push(Rational::one());
    GridFunction::new(z as i64, values)
}

/// Outcome of [`envelope_properties`].
#[derive(Clone, Debug)]
pub struct EnvelopeReport {
    pub envelope: GridFunction,
    pub failures: Vec<String>,
}

impl EnvelopeReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks, for `phi` and its concave envelope `env`:
/// (i) `env >= phi` with equal endpoints;
/// (ii) wherever `env(i) != phi(i)` at an interior point, `env` is linear
///      across `i - 1, i, i + 1`;
/// (iii) wherever `env(i) = phi(i)`, phi's clipped second difference is at
///      least env's;
/// (iv) for profiles in the feasible set (monotone, last two values 1), the
///      objective is at least `env(z + 1) - env(z)`, which is at least
///      `(1 - phi(z)) / (tau - z)`.
pub fn envelope_properties(phi: &GridFunction) -> EnvelopeReport {
    let env = concave_envelope(phi);
    let mut failures = Vec::new();
    let p = phi.values();
    let e = env.values();
    let n = p.len();
    let at = |i: usize| phi.start() + i as i64;

    if n > 0 && (e[0] != p[0] || e[n - 1] != p[n - 1]) {
        failures.push("envelope moves an endpoint".to_string());
    }
    for i in 0..n {
        if e[i] < p[i] {
            failures.push(format!("envelope below phi at {}", at(i)));
        }
    }
    if !env.is_concave() {
        failures.push("envelope is not concave".to_string());
    }
    let second = |v: &[Rational], i: usize| (v[i] - v[i - 1]) - (v[i + 1] - v[i]);
    for i in 1..n.saturating_sub(1) {
        if e[i] != p[i] {
            if !second(e, i).is_zero() {
                failures.push(format!("envelope not linear around {} where it exceeds phi", at(i)));
            }
        } else if positive_part(second(p, i)) < positive_part(second(e, i)) {
            failures.push(format!("clipped second difference of phi below envelope's at {}", at(i)));
        }
    }

    let feasible = n >= 3 && phi.is_non_decreasing() && p[n - 1].is_one() && p[n - 2].is_one();
    if feasible {
        let z = phi.start();
        let tau = phi.end() - 1;
        let objective = gradient_objective(phi, z, tau).expect("domain matches");
        let first_step = e[1] - e[0];
        let bound = (Rational::one() - p[0]) / int((tau - z) as i128);
        if objective < first_step {
            failures.push(format!("objective {objective} below envelope's first step {first_step}"));
        }
        if first_step < bound {
            failures.push(format!("envelope's first step {first_step} below {bound}"));
        }
    }

    EnvelopeReport {
        envelope: env,
        failures,
    }
}

/// Both branches of the share-size lower bound, searched on the grid.
#[derive(Clone, Debug)]
pub struct BoundCheck {
    /// Minimum with the privacy pin `phi(z) = alpha`.
    pub privacy_min: Rational,
    pub privacy_argmin: GridFunction,
    /// `(1 - alpha) / (tau - z)`.
    pub privacy_bound: Rational,
    /// Minimum of the `z = 0`, `alpha = 0` variant, on a grid that contains `1/tau`.
    pub threshold_min: Rational,
    /// `1 / tau`.
    pub threshold_bound: Rational,
}

impl BoundCheck {
    pub fn holds(&self) -> bool {
        self.privacy_min >= self.privacy_bound && self.threshold_min >= self.threshold_bound
    }

    /// `max` of the two certified lower bounds.
    pub fn certified(&self) -> Rational {
        self.privacy_min.max(self.threshold_min)
    }
}

pub fn bound_check(z: usize, tau: usize, alpha: Rational, den: u64) -> Result<BoundCheck> {
    let (privacy_min, privacy_argmin) = min_gradient_objective(z, tau, alpha, den)?;
    let threshold_den = den.lcm(&(tau as u64));
    let (threshold_min, _) = min_gradient_objective(0, tau, Rational::zero(), threshold_den)?;
    Ok(BoundCheck {
        privacy_min,
        privacy_argmin,
        privacy_bound: (Rational::one() - alpha) / int((tau - z) as i128),
        threshold_min,
        threshold_bound: ratio(1, tau as i128),
    })
}

/// True when the grid search certifies `max((1 - alpha)/(tau - z), 1/tau)` as
/// a lower bound.
pub fn verify_theorem1_bound(z: usize, tau: usize, alpha: Rational, den: u64) -> Result<bool> {
    Ok(bound_check(z, tau, alpha, den)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(n: i128, d: i128) -> Rational {
        ratio(n, d)
    }

    /// Objective minimum by walking every grid vector (monotone or not) and
    /// discarding infeasible ones: no recursion, no shared code with the search.
    fn brute_min(z: usize, tau: usize, alpha: Rational, den: i128) -> Rational {
        let k = tau - z - 1;
        let states = (den + 1).pow(k as u32);
        let mut best: Option<Rational> = None;
        for mut idx in 0..states {
            let mut vals = vec![alpha];
            for _ in 0..k {
                vals.push(r(idx % (den + 1), den));
                idx /= den + 1;
            }
            vals.push(Rational::one());
            vals.push(Rational::one());
            let phi = GridFunction::new(z as i64, vals);
            if !phi.is_non_decreasing() {
                continue;
            }
            let obj = gradient_objective(&phi, z as i64, tau as i64).unwrap();
            best = Some(best.map_or(obj, |b: Rational| b.min(obj)));
        }
        best.unwrap()
    }

    #[test]
    fn search_matches_brute_force() {
        for (z, tau, alpha, den) in [
            (1, 3, r(0, 1), 6),
            (2, 4, r(1, 4), 8),
            (2, 3, r(1, 4), 8),
            (1, 2, r(1, 2), 4),
            (0, 3, r(0, 1), 6),
            (1, 4, r(1, 3), 6),
            (1, 4, r(0, 1), 5),
        ] {
            let (min, argmin) = min_gradient_objective(z, tau, alpha, den).unwrap();
            assert_eq!(min, brute_min(z, tau, alpha, den as i128), "z={z} tau={tau} alpha={alpha} D={den}");
            assert_eq!(gradient_objective(&argmin, z as i64, tau as i64).unwrap(), min);
        }
    }

    #[test]
    fn search_examples() {
        let (min, argmin) = min_gradient_objective(1, 3, r(0, 1), 6).unwrap();
        assert_eq!(min, r(1, 2));
        assert_eq!(gradient_objective(&linear_profile(1, 3, r(0, 1)), 1, 3).unwrap(), r(1, 2));
        assert!(argmin.is_non_decreasing());

        assert_eq!(min_gradient_objective(2, 4, r(1, 4), 8).unwrap().0, r(3, 8));
        assert_eq!(min_gradient_objective(5, 6, r(0, 1), 7).unwrap().0, r(1, 1));
    }

    #[test]
    fn search_errors() {
        assert!(matches!(min_gradient_objective(1, 3, r(3, 2), 4), Err(Error::Infeasible(_))));
        assert!(matches!(min_gradient_objective(1, 3, r(1, 3), 4), Err(Error::InvalidParams(_))));
        assert!(min_gradient_objective(3, 3, r(0, 1), 4).is_err());
        assert!(min_gradient_objective(1, 3, r(0, 1), 0).is_err());
        assert!(matches!(min_gradient_objective(0, 12, r(0, 1), 24), Err(Error::SearchTooLarge(_))));
    }

    #[test]
    fn bound_check_examples() {
        let c = bound_check(2, 3, r(1, 4), 8).unwrap();
        assert!(c.holds());
        assert_eq!(c.privacy_min, r(3, 4));
        let c = bound_check(1, 2, r(1, 1), 4).unwrap();
        assert!(c.holds());
        assert_eq!(c.privacy_min, r(0, 1));
        assert_eq!(c.threshold_min, r(1, 2));
        assert_eq!(c.certified(), r(1, 2));
        assert!(verify_theorem1_bound(1, 3, r(0, 1), 6).unwrap());
    }

    #[test]
    fn envelope_examples() {
        let concave = GridFunction::new(1, vec![r(0, 1), r(1, 2), r(3, 4), r(1, 1)]);
        let rep = envelope_properties(&concave);
        assert!(rep.passed());
        assert_eq!(rep.envelope, concave);

        let step = GridFunction::new(2, vec![r(1, 4), r(1, 4), r(1, 1), r(1, 1)]);
        let rep = envelope_properties(&step);
        assert!(rep.passed(), "{:?}", rep.failures);
        assert_eq!(rep.envelope.values(), &[r(1, 4), r(5, 8), r(1, 1), r(1, 1)]);
    }

    #[test]
    fn envelope_random_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let gap = rng.gen_range(1..=5usize);
            let z = rng.gen_range(0..4usize);
            let den = rng.gen_range(1..=24i128);
            let mut v = rng.gen_range(0..=den);
            let mut vals = vec![r(v, den)];
            for _ in 1..gap {
                v = rng.gen_range(v..=den);
                vals.push(r(v, den));
            }
            vals.push(Rational::one());
            vals.push(Rational::one());
            let phi = GridFunction::new(z as i64, vals);
            let rep = envelope_properties(&phi);
            assert!(rep.passed(), "{phi:?}: {:?}", rep.failures);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn bound_holds_and_is_tight(z in 0usize..3, gap in 1usize..5, k in 0i128..=12, den_mult in 1u64..3) {
            let tau = z + gap;
            let den = 12 * den_mult;
            let alpha = if z == 0 { Rational::zero() } else { r(k, 12) };
            let (min, _) = min_gradient_objective(z, tau, alpha, den * gap as u64).unwrap();
            let bound = (Rational::one() - alpha) / int(gap as i128);
            prop_assert_eq!(min, bound);
            prop_assert_eq!(gradient_objective(&linear_profile(z, tau, alpha), z as i64, tau as i64).unwrap(), bound);
        }

        #[test]
        fn refinement_keeps_bound(z in 1usize..3, gap in 1usize..4, k in 0i128..=4) {
            let tau = z + gap;
            let alpha = r(k, 4);
            let coarse = min_gradient_objective(z, tau, alpha, 4).unwrap().0;
            let fine = min_gradient_objective(z, tau, alpha, 8).unwrap().0;
            let bound = (Rational::one() - alpha) / int(gap as i128);
            prop_assert!(fine >= bound);
            prop_assert!(coarse >= fine);
        }
    }
}
