//! Exact leakage measurement for built schemes.
//!
//! Two instruments. [`rank_leakage`] uses the fact that for a linear scheme
//! `M = A F + B R` with uniform independent inputs,
//! `I(F; M_S) = (rank [A_S B_S] - rank B_S) log q`; it is exact and scales to
//! every subset of a dozen servers. [`enum_leakage`] runs the encoder on every
//! possible input and computes the mutual information from the joint
//! distribution by definition. It touches neither matrices nor ranks and
//! serves as the reference the rank path is validated against.

use std::collections::{BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::ops::Range;

use num_traits::{One, Zero};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::access::{self, AccessFunction};
use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::leaky::{self, FixedRandomness, GlobalMaps, Randomness, RngRandomness};
use crate::matrix::Matrix;
use crate::params::SchemeParams;
use crate::planner;
use crate::rational::{int, ratio, Rational};

/// Largest input space [`enum_leakage`] will walk.
pub const ENUMERATION_LIMIT: u128 = 10_000_000;

/// Largest server count [`check_scheme`] scans (2^T subsets).
pub const MAX_SCAN_SERVERS: usize = 12;

/// `I(F; M_S) / H(F)` for the servers in `subset` (0-based), with `H(F)` the
/// `a.cols()` file symbols.
pub fn rank_leakage(a: &Matrix, b: &Matrix, server_rows: &[Range<usize>], subset: &[usize]) -> Rational {
    if a.cols() == 0 {
        return Rational::zero();
    }
    let rows: Vec<usize> = subset.iter().flat_map(|&s| server_rows[s].clone()).collect();
    let joint = a.select_rows(&rows).hstack(&b.select_rows(&rows)).rank();
    let masked = b.select_rows(&rows).rank();
    ratio((joint - masked) as i128, a.cols() as i128)
}

/// [`rank_leakage`] on a scheme's superblock maps.
pub fn scheme_leakage(maps: &GlobalMaps, subset: &[usize]) -> Rational {
    rank_leakage(&maps.a, &maps.b, &maps.server_rows, subset)
}

/// `I(F; M_S)` in bits by exhaustive enumeration of `q^(n_f + n_r)` uniform inputs.
///
/// `encoder` maps `(file symbols, random symbols)` to every server's share
/// symbols, one `Vec` per server.
pub fn enum_leakage<E>(encoder: E, n_f: usize, n_r: usize, field: PrimeField, subset: &[usize]) -> Result<f64>
where
    E: Fn(&[FieldElement], &[FieldElement]) -> Result<Vec<Vec<FieldElement>>>,
{
    let q = field.modulus() as u128;
    let states = (0..n_f + n_r).try_fold(1u128, |acc, _| acc.checked_mul(q).filter(|s| *s <= ENUMERATION_LIMIT));
    let Some(states) = states else {
        return Err(Error::StateSpaceTooLarge {
            states: q.saturating_pow((n_f + n_r) as u32),
            limit: ENUMERATION_LIMIT,
        });
    };
    let file_states = q.pow(n_f as u32);

    let mut joint: HashMap<(u128, Vec<u64>), u64> = HashMap::new();
    let mut marginal: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut digits = vec![0u64; n_f + n_r];
    for index in 0..states {
        let mut rest = index;
        for d in digits.iter_mut() {
            *d = (rest % q) as u64;
            rest /= q;
        }
        let input: Vec<FieldElement> = digits.iter().map(|&d| field.elem(d)).collect();
        let (f, r) = input.split_at(n_f);
        let shares = encoder(f, r)?;
        let view: Vec<u64> = subset
            .iter()
            .flat_map(|&s| shares[s].iter().map(|e| e.value()))
            .collect();
        let file_index = index % file_states;
        *marginal.entry(view.clone()).or_default() += 1;
        *joint.entry((file_index, view)).or_default() += 1;
    }

    // p(f, m) = c_fm / N, p(f) = 1 / |F|, p(m) = c_m / N.
    let n = states as f64;
    let mut bits = 0.0;
    for ((_, view), &c) in &joint {
        let c_m = marginal[view] as f64;
        let c = c as f64;
        bits += c / n * (c * file_states as f64 / c_m).log2();
    }
    Ok(bits)
}

/// Leakage of one subset of servers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetLeak {
    /// Bit `t - 1` set for server `t`.
    pub mask: u32,
    pub size: usize,
    pub leakage: Rational,
    pub recoverable: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// A subset of at least tau servers cannot rebuild the file.
    Recoverability { mask: u32, leakage: Rational },
    /// A subset of at most z servers learns more than alpha.
    Privacy { mask: u32, leakage: Rational },
    /// Same-size subsets leak different amounts.
    Asymmetric { size: usize, values: Vec<Rational> },
    /// Adding a server decreased the leakage.
    NotMonotone { mask: u32, superset: u32 },
    /// Measured profile differs from the planned one.
    ProfileMismatch { size: usize, measured: Rational, planned: Rational },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Recoverability { mask, leakage } => {
                write!(f, "subset {mask:#b} should recover the file but leaks only {leakage}")
            }
            Violation::Privacy { mask, leakage } => write!(f, "subset {mask:#b} leaks {leakage}, above alpha"),
            Violation::Asymmetric { size, values } => {
                write!(f, "subsets of size {size} leak different amounts: {values:?}")
            }
            Violation::NotMonotone { mask, superset } => {
                write!(f, "subset {superset:#b} leaks less than its subset {mask:#b}")
            }
            Violation::ProfileMismatch {
                size,
                measured,
                planned,
            } => write!(f, "g({size}) measured {measured}, planned {planned}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LeakageReport {
    pub params: SchemeParams,
    /// Empty set first, then every nonempty subset in bitmask order.
    pub subsets: Vec<SubsetLeak>,
    /// Distinct leakage values seen at each coalition size.
    pub per_size: Vec<BTreeSet<Rational>>,
    pub symmetric: bool,
    pub measured_g: Option<AccessFunction>,
    pub planned_g: AccessFunction,
    pub violations: Vec<Violation>,
}

impl LeakageReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// CSV with header `subset_bitmask,size,leak_num,leak_den,recoverable`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("subset_bitmask,size,leak_num,leak_den,recoverable\n");
        for s in &self.subsets {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                s.mask,
                s.size,
                s.leakage.numer(),
                s.leakage.denom(),
                s.recoverable
            );
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "scheme: {}", self.params);
        let _ = writeln!(out, "subsets scanned: {}", self.subsets.len() - 1);
        let _ = writeln!(out, "symmetric: {}", self.symmetric);
        let show = |g: &AccessFunction| g.values().iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ");
        let _ = writeln!(out, "planned g:  [{}]", show(&self.planned_g));
        match &self.measured_g {
            Some(g) => {
                let _ = writeln!(out, "measured g: [{}]", show(g));
            }
            None => {
                let _ = writeln!(out, "measured g: (not symmetric)");
            }
        }
        for v in &self.violations {
            let _ = writeln!(out, "violation: {v}");
        }
        let _ = writeln!(out, "{}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

fn members(mask: u32, servers: usize) -> Vec<usize> {
    (0..servers).filter(|i| mask >> i & 1 == 1).collect()
}

/// Decodes a random superblock from exactly the servers in `mask`.
fn decodes_from(params: &SchemeParams, bundles: &[leaky::ShareBundle], file: &[FieldElement], mask: u32) -> bool {
    let chosen: Vec<_> = members(mask, params.servers)
        .into_iter()
        .map(|i| bundles[i].clone())
        .collect();
    leaky::decode(&chosen).is_ok_and(|d| d == file)
}

/// Scans every subset of servers and checks recoverability, privacy,
/// leakage symmetry and the measured profile against the plan.
pub fn check_scheme(params: &SchemeParams) -> Result<LeakageReport> {
    params.validate()?;
    if params.servers > MAX_SCAN_SERVERS {
        return Err(Error::InvalidParams(format!(
            "subset scan limited to T <= {MAX_SCAN_SERVERS}, got T = {}",
            params.servers
        )));
    }
    let t = params.servers;
    let maps = leaky::global_encoding_matrices(params)?;
    let planned_g = access::planned_g(params)?;

    // One random superblock to confirm recovering subsets actually decode.
    let lay = leaky::layout(params);
    let mut rng = StdRng::seed_from_u64(0x6c6b7373);
    let probe: Vec<FieldElement> = (0..lay.n_prime)
        .map(|_| params.field.elem(rng.gen_range(0..params.field.modulus())))
        .collect();
    let bundles = leaky::encode(&probe, params, &mut RngRandomness::new(rng))?;

    let mut violations = Vec::new();
    let mut subsets = Vec::with_capacity(1 << t);
    let mut leak_by_mask = vec![Rational::zero(); 1 << t];
    let mut per_size = vec![BTreeSet::new(); t + 1];
    for mask in 0u32..1 << t {
        let set = members(mask, t);
        let leakage = scheme_leakage(&maps, &set);
        let size = set.len();
        let recoverable = leakage.is_one() && decodes_from(params, &bundles, &probe, mask);
        if size >= params.tau && !recoverable {
            violations.push(Violation::Recoverability { mask, leakage });
        }
        if size <= params.z && leakage > params.alpha {
            violations.push(Violation::Privacy { mask, leakage });
        }
        leak_by_mask[mask as usize] = leakage;
        per_size[size].insert(leakage);
        subsets.push(SubsetLeak {
            mask,
            size,
            leakage,
            recoverable,
        });
    }

    for mask in 0u32..1 << t {
        for i in 0..t {
            let superset = mask | 1 << i;
            if superset != mask && leak_by_mask[superset as usize] < leak_by_mask[mask as usize] {
                violations.push(Violation::NotMonotone { mask, superset });
            }
        }
    }

    let mut symmetric = true;
    for (size, values) in per_size.iter().enumerate() {
        if values.len() != 1 {
            symmetric = false;
            violations.push(Violation::Asymmetric {
                size,
                values: values.iter().copied().collect(),
            });
        }
    }

    let measured_g = if symmetric {
        let g = AccessFunction::new(per_size.iter().map(|v| *v.first().unwrap()).collect())?;
        for s in 0..=t {
            if g.at(s) != planned_g.at(s) {
                violations.push(Violation::ProfileMismatch {
                    size: s,
                    measured: g.at(s),
                    planned: planned_g.at(s),
                });
            }
        }
        Some(g)
    } else {
        None
    };

    Ok(LeakageReport {
        params: *params,
        subsets,
        per_size,
        symmetric,
        measured_g,
        planned_g,
        violations,
    })
}

/// Share sizes and randomness of a built scheme, measured, next to the
/// closed-form optima.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumRateReport {
    /// `H(M_t) / H(F)` per server, from the rank of each server's rows of `[A B]`.
    pub share_entropy: Vec<Rational>,
    pub share_entropy_sum: Rational,
    /// `T max((1 - alpha)/(tau - z), 1/tau)`.
    pub sum_bound: Rational,
    /// Random symbols drawn by the encoder per file symbol.
    pub randomness: Rational,
    /// `[z - tau alpha]^+ / (tau - z)`.
    pub randomness_bound: Rational,
}

impl SumRateReport {
    pub fn tight(&self) -> bool {
        self.share_entropy_sum == self.sum_bound && self.randomness == self.randomness_bound
    }
}

pub fn sum_rate(params: &SchemeParams) -> Result<SumRateReport> {
    params.validate()?;
    let maps = leaky::global_encoding_matrices(params)?;
    let ab = maps.a.hstack(&maps.b);
    let n = int(maps.a.cols() as i128);
    let share_entropy: Vec<Rational> = maps
        .server_rows
        .iter()
        .map(|rows| int(ab.select_rows(&rows.clone().collect::<Vec<_>>()).rank() as i128) / n)
        .collect();
    let share_entropy_sum = share_entropy.iter().fold(Rational::zero(), |acc, x| acc + x);

    let lay = leaky::layout(params);
    let zeros = vec![params.field.zero(); lay.n_prime];
    let mut source = FixedRandomness::new(vec![params.field.one(); lay.rand_per_superblock], 0);
    leaky::encode(&zeros, params, &mut source)?;
    let randomness = int(source.consumed() as i128) / n;

    Ok(SumRateReport {
        share_entropy,
        share_entropy_sum,
        sum_bound: int(params.servers as i128) * planner::lambda_ratio(params.tau, params.z, params.alpha),
        randomness,
        randomness_bound: planner::rho_ratio(params.tau, params.z, params.alpha),
    })
}
