//! Access functions: the fraction of the file leaked to a coalition, as a
//! function of the coalition's size.
//!
//! Everything here is exact rational arithmetic. The converse search depends
//! on exact ties, and the construction identities (`g = g1 + g2`, the slopes
//! of each component) hold with equality.

use std::fmt::Write as _;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::params::SchemeParams;
use crate::rational::{int, positive_part, ratio, Rational};

/// Leakage profile `g : [0, T] -> [0, 1]` with `g(0) = 0`, non-decreasing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AccessFunction {
    values: Vec<Rational>,
}

impl AccessFunction {
    /// Checks the access-function invariants; `values[t]` is `g(t)`.
    pub fn new(values: Vec<Rational>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidParams(m));
        if values.is_empty() {
            return bad("access function needs at least g(0)".into());
        }
        if !values[0].is_zero() {
            return bad(format!("g(0) = {} must be 0", values[0]));
        }
        for (t, v) in values.iter().enumerate() {
            if *v < Rational::zero() || *v > Rational::one() {
                return bad(format!("g({t}) = {v} outside [0, 1]"));
            }
        }
        if let Some(t) = values.windows(2).position(|w| w[1] < w[0]) {
            return bad(format!("g decreases between t = {t} and t = {}", t + 1));
        }
        Ok(AccessFunction { values })
    }

    /// Number of servers T (the domain is `[0, T]`).
    pub fn servers(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn at(&self, t: usize) -> Rational {
        self.values[t]
    }

    /// CSV with header `t,numerator,denominator`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,numerator,denominator\n");
        for (t, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{t},{},{}", v.numer(), v.denom());
        }
        out
    }

    /// The restriction to `[z, tau + 1]`, with the convention `g(tau + 1) = g(tau)`.
    pub fn window(&self, z: usize, tau: usize) -> GridFunction {
        let mut values: Vec<Rational> = (z..=tau).map(|t| self.values[t]).collect();
        values.push(self.values[tau]);
        GridFunction::new(z as i64, values)
    }
}

/// Profile of a (tau, L, T) linear ramp scheme: nothing leaks up to `tau - L`
/// shares, then leakage grows by `1/L` per share until `tau` shares recover
/// everything.
pub fn linear_ramp_g(tau: usize, l: usize, servers: usize) -> Result<AccessFunction> {
    if !(1 <= l && l <= tau && tau <= servers) {
        return Err(Error::InvalidParams(format!(
            "ramp profile needs 1 <= L <= tau <= T, got L = {l}, tau = {tau}, T = {servers}"
        )));
    }
    let values = (0..=servers)
        .map(|t| {
            if t + l <= tau {
                Rational::zero()
            } else if t >= tau {
                Rational::one()
            } else {
                ratio((t + l - tau) as i128, l as i128)
            }
        })
        .collect();
    AccessFunction::new(values)
}

/// The piecewise-linear profile realized by the two-ramp composition: slope
/// `alpha/z` up to `z`, then slope `(1 - alpha)/(tau - z)` up to `tau`.
pub fn optimal_g(params: &SchemeParams) -> Result<AccessFunction> {
    params.validate()?;
    if !params.is_composed() {
        return Err(Error::NotComposedCase {
            alpha: params.alpha,
            threshold: params.ramp_threshold(),
        });
    }
    let (z, tau) = (params.z as i128, params.tau as i128);
    let alpha = params.alpha;
    let low = alpha / int(z);
    let high = (Rational::one() - alpha) / int(tau - z);
    let values = (0..=params.servers as i128)
        .map(|t| {
            if t <= z {
                low * int(t)
            } else if t <= tau {
                high * int(t - z) + alpha
            } else {
                Rational::one()
            }
        })
        .collect();
    AccessFunction::new(values)
}

/// The profile a correct construction for `params` must exhibit: the optimal
/// composed profile, or the (tau, tau, T) ramp profile when `alpha >= z/tau`.
pub fn planned_g(params: &SchemeParams) -> Result<AccessFunction> {
    if params.is_composed() {
        optimal_g(params)
    } else {
        linear_ramp_g(params.tau, params.tau, params.servers)
    }
}

/// Splits the composed profile into the (tau, tau, T) component
/// `g1(t) = (alpha/z) min(t, tau)` and the (tau, tau - z, T) component `g2 = g - g1`.
pub fn decompose(g: &AccessFunction, params: &SchemeParams) -> Result<(AccessFunction, AccessFunction)> {
    if g.servers() != params.servers {
        return Err(Error::Decomposition(format!(
            "profile covers {} servers, parameters say {}",
            g.servers(),
            params.servers
        )));
    }
    let slope = params.alpha / int(params.z as i128);
    let g1: Vec<Rational> = (0..=params.servers)
        .map(|t| slope * int(t.min(params.tau) as i128))
        .collect();
    let g2: Vec<Rational> = g.values.iter().zip(&g1).map(|(a, b)| a - b).collect();
    if let Some(t) = g2.iter().position(|v| *v < Rational::zero()) {
        return Err(Error::Decomposition(format!("g2({t}) = {} is negative", g2[t])));
    }
    let g1 = AccessFunction::new(g1).map_err(|e| Error::Decomposition(format!("g1: {e}")))?;
    let g2 = AccessFunction::new(g2).map_err(|e| Error::Decomposition(format!("g2: {e}")))?;
    Ok((g1, g2))
}

/// Largest single-step increase `max_t g(t+1) - g(t)`; zero for a one-point profile.
pub fn max_gradient(g: &AccessFunction) -> Rational {
    g.values
        .windows(2)
        .map(|w| w[1] - w[0])
        .max()
        .unwrap_or_else(Rational::zero)
}

/// A rational-valued function on the integer interval `[start, start + len - 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridFunction {
    start: i64,
    values: Vec<Rational>,
}

impl GridFunction {
    pub fn new(start: i64, values: Vec<Rational>) -> Self {
        GridFunction { start, values }
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Last point of the domain.
    pub fn end(&self) -> i64 {
        self.start + self.values.len() as i64 - 1
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at the absolute grid point `i`.
    pub fn at(&self, i: i64) -> Rational {
        self.values[(i - self.start) as usize]
    }

    pub fn is_non_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// Discrete concavity: consecutive differences never increase.
    pub fn is_concave(&self) -> bool {
        self.values
            .windows(3)
            .all(|w| w[2] - w[1] <= w[1] - w[0])
    }
}

/// Least concave majorant on the grid: the upper convex hull of the points
/// `(i, phi(i))`, read back at every integer.
pub fn concave_envelope(phi: &GridFunction) -> GridFunction {
    let n = phi.values.len();
    if n <= 2 {
        return phi.clone();
    }
    // Monotone chain, upper hull, indices into phi.values.
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Drop b when it lies on or below the chord a -> i.
            let lhs = (phi.values[b] - phi.values[a]) * int((i - a) as i128);
            let rhs = (phi.values[i] - phi.values[a]) * int((b - a) as i128);
            if lhs <= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mut values = Vec::with_capacity(n);
    for seg in hull.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let slope = (phi.values[b] - phi.values[a]) / int((b - a) as i128);
        for i in a..b {
            values.push(phi.values[a] + slope * int((i - a) as i128));
        }
    }
    values.push(phi.values[n - 1]);
    GridFunction::new(phi.start, values)
}

/// `sum_{i=z+1}^{tau} [(phi(i) - phi(i-1)) - (phi(i+1) - phi(i))]^+` for `phi`
/// on `[z, tau + 1]`: the per-share size lower bound as a function of the profile.
pub fn gradient_objective(phi: &GridFunction, z: i64, tau: i64) -> Result<Rational> {
    if phi.start != z || phi.end() != tau + 1 || tau <= z {
        return Err(Error::InvalidParams(format!(
            "objective needs a function on [{z}, {}], got [{}, {}]",
            tau + 1,
            phi.start,
            phi.end()
        )));
    }
    let v = &phi.values;
    Ok(v.windows(3)
        .map(|w| positive_part((w[1] - w[0]) - (w[2] - w[1])))
        .fold(Rational::zero(), |acc, x| acc + x))
}
