//! Packed-polynomial (tau, L, T) linear ramp secret sharing.
//!
//! A block of `L` secret symbols and `tau - L` random symbols are the
//! coefficients of a polynomial of degree below `tau`, secret first. Server
//! `t` stores the polynomial's value at its evaluation point. Any `tau`
//! servers interpolate the whole polynomial; any `tau - L` or fewer see
//! values masked by the random coefficients; in between, each extra share
//! reveals one more secret symbol's worth of information.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RampParams {
    tau: usize,
    l: usize,
    servers: usize,
    field: PrimeField,
    eval_points: Vec<FieldElement>,
}

impl RampParams {
    /// Evaluation points `1, 2, ..., T`.
    pub fn new(tau: usize, l: usize, servers: usize, field: PrimeField) -> Result<Self> {
        if field.modulus() <= servers as u64 {
            return Err(Error::InvalidParams(format!(
                "q = {} leaves fewer than T = {servers} nonzero evaluation points",
                field.modulus()
            )));
        }
        let points = (1..=servers as u64).map(|x| field.elem(x)).collect();
        Self::with_points(tau, l, field, points)
    }

    pub fn with_points(tau: usize, l: usize, field: PrimeField, eval_points: Vec<FieldElement>) -> Result<Self> {
        let servers = eval_points.len();
        if !(1 <= l && l <= tau && tau <= servers) {
            return Err(Error::InvalidParams(format!(
                "ramp needs 1 <= L <= tau <= T, got L = {l}, tau = {tau}, T = {servers}"
            )));
        }
        let mut seen = HashSet::new();
        for p in &eval_points {
            field.check(*p)?;
            if p.is_zero() {
                return Err(Error::InvalidParams("evaluation point 0 is not allowed".into()));
            }
            if !seen.insert(p.value()) {
                return Err(Error::DuplicateShare(p.value()));
            }
        }
        Ok(RampParams {
            tau,
            l,
            servers,
            field,
            eval_points,
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Secret symbols per block.
    pub fn secret_len(&self) -> usize {
        self.l
    }

    /// Random symbols per block, `tau - L`.
    pub fn randomness_len(&self) -> usize {
        self.tau - self.l
    }

    pub fn servers(&self) -> usize {
        self.servers
    }

    pub fn field(&self) -> PrimeField {
        self.field
    }

    pub fn eval_points(&self) -> &[FieldElement] {
        &self.eval_points
    }

    fn server_of(&self, point: FieldElement) -> Option<usize> {
        self.eval_points.iter().position(|p| *p == point)
    }
}

/// One symbol per server for a single block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockShares(pub Vec<FieldElement>);

impl BlockShares {
    pub fn symbols(&self) -> &[FieldElement] {
        &self.0
    }

    /// `(point, value)` pairs for the given 0-based servers.
    pub fn pick(&self, params: &RampParams, servers: &[usize]) -> Vec<(FieldElement, FieldElement)> {
        servers.iter().map(|&s| (params.eval_points[s], self.0[s])).collect()
    }
}

pub fn split_block(secret: &[FieldElement], randomness: &[FieldElement], params: &RampParams) -> Result<BlockShares> {
    if secret.len() != params.l {
        return Err(Error::WrongLength {
            what: "secret symbols",
            expected: params.l,
            actual: secret.len(),
        });
    }
    if randomness.len() != params.randomness_len() {
        return Err(Error::WrongLength {
            what: "random symbols",
            expected: params.randomness_len(),
            actual: randomness.len(),
        });
    }
    let coeffs: Vec<FieldElement> = secret.iter().chain(randomness).copied().collect();
    let shares = params
        .eval_points
        .iter()
        .map(|&x| params.field.eval_poly(&coeffs, x))
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockShares(shares))
}

/// Recovers the `L` secret symbols from at least `tau` shares. Only the first
/// `tau` shares are used.
pub fn reconstruct_block(shares: &[(FieldElement, FieldElement)], params: &RampParams) -> Result<Vec<FieldElement>> {
    let points: Vec<FieldElement> = shares.iter().map(|(p, _)| *p).collect();
    let rec = Reconstructor::new(params, &points)?;
    let values: Vec<u64> = shares[..params.tau]
        .iter()
        .map(|(_, v)| params.field.check(*v).map(|_| v.value()))
        .collect::<Result<_>>()?;
    Ok(rec.apply(&values).into_iter().map(|v| params.field.elem(v)).collect())
}

/// Interpolation weights for a fixed set of `tau` servers: row `k` holds the
/// coefficients that map the `tau` share values to polynomial coefficient `k`
/// (the first `L` rows of the inverse Vandermonde matrix).
#[derive(Clone, Debug)]
pub struct Reconstructor {
    field: PrimeField,
    weights: Vec<Vec<u64>>,
}

impl Reconstructor {
    /// Checks the points (enough, distinct, known) and precomputes weights
    /// from the first `tau` of them.
    pub fn new(params: &RampParams, points: &[FieldElement]) -> Result<Self> {
        if points.len() < params.tau {
            return Err(Error::InsufficientShares {
                needed: params.tau,
                available: points.len(),
            });
        }
        let mut seen = HashSet::new();
        for p in points {
            params.field.check(*p)?;
            if params.server_of(*p).is_none() {
                return Err(Error::UnknownPoint(p.value()));
            }
            if !seen.insert(p.value()) {
                return Err(Error::DuplicateShare(p.value()));
            }
        }
        let f = params.field;
        let xs: Vec<u64> = points[..params.tau].iter().map(|p| p.value()).collect();
        let n = xs.len();

        // P(x) = prod (x - x_m), coefficients low to high.
        let mut full = vec![1u64];
        for &xm in &xs {
            let mut next = vec![0u64; full.len() + 1];
            for (i, &c) in full.iter().enumerate() {
                next[i + 1] = f.add_raw(next[i + 1], c);
                next[i] = f.sub_raw(next[i], f.mul_raw(c, xm));
            }
            full = next;
        }

        let mut weights = vec![vec![0u64; n]; params.l];
        for (j, &xj) in xs.iter().enumerate() {
            // P(x) / (x - x_j) by synthetic division, high to low.
            let mut quotient = vec![0u64; n];
            let mut carry = 0u64;
            for k in (1..=n).rev() {
                carry = f.add_raw(full[k], f.mul_raw(carry, xj));
                quotient[k - 1] = carry;
            }
            let denom = xs
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != j)
                .fold(1u64, |acc, (_, &xm)| f.mul_raw(acc, f.sub_raw(xj, xm)));
            let scale = f.inv_raw(denom)?;
            for (k, row) in weights.iter_mut().enumerate() {
                row[j] = f.mul_raw(quotient[k], scale);
            }
        }
        Ok(Reconstructor { field: f, weights })
    }

    /// Row `k` maps the chosen servers' values to secret symbol `k`.
    pub(crate) fn weights(&self) -> &[Vec<u64>] {
        &self.weights
    }

    /// Secret symbols from the raw share values of the chosen servers, in the
    /// order the points were given.
    #[inline]
    pub fn apply(&self, values: &[u64]) -> Vec<u64> {
        self.weights.iter().map(|w| self.field.dot_raw(w, values)).collect()
    }

    /// Writes the secret symbols into `out` (length `L`).
    #[inline]
    pub fn apply_into(&self, values: &[u64], out: &mut [u64]) {
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o = self.field.dot_raw(w, values);
        }
    }
}

/// The block's linear map: shares = A * secret + B * randomness, with A the
/// Vandermonde columns `x^0 .. x^(L-1)` and B the columns `x^L .. x^(tau-1)`.
pub fn encoding_matrices(params: &RampParams) -> (Matrix, Matrix) {
    let f = params.field;
    let mut a = Matrix::zeros(f, params.servers, params.l);
    let mut b = Matrix::zeros(f, params.servers, params.randomness_len());
    for (t, x) in params.eval_points.iter().enumerate() {
        let mut power = 1u64;
        for k in 0..params.tau {
            if k < params.l {
                a.set(t, k, power);
            } else {
                b.set(t, k - params.l, power);
            }
            power = f.mul_raw(power, x.value());
        }
    }
    (a, b)
}
