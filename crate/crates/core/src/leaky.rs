//! The (alpha, z)-private storage scheme.
//!
//! When `alpha >= z/tau` a single (tau, tau, T) ramp already leaks at most
//! `z/tau <= alpha` to any `z` servers, so the whole file goes through it.
//! Otherwise the file is cut into superblocks of `n'` symbols. The first
//! `n1 = (alpha/z) tau n'` symbols of each superblock go through
//! (tau, tau, T) ramp blocks, which use no randomness; the remaining `n2`
//! symbols go through (tau, tau - z, T) ramp blocks, which mix `z` random
//! symbols into every block. The leakage profiles of the two parts add up to
//! the piecewise-linear optimum.

use std::borrow::Borrow;
use std::collections::HashSet;
use std::ops::Range;

use num_integer::Integer;
use rand::{Rng, RngCore};

use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::lincomb::Combiner;
use crate::matrix::Matrix;
use crate::params::SchemeParams;
use crate::ramp::{self, RampParams, Reconstructor};
use crate::rational::int;

/// Symbol accounting for one superblock.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SuperblockLayout {
    /// File symbols per superblock.
    pub n_prime: usize,
    /// Symbols routed through the (tau, tau, T) ramp.
    pub n1: usize,
    /// Symbols routed through the (tau, tau - z, T) ramp.
    pub n2: usize,
    pub blocks1: usize,
    pub blocks2: usize,
    pub rand_per_superblock: usize,
    pub share_symbols_per_server: usize,
}

/// Smallest superblock on which the n1/n2 split is integral and both parts
/// fill whole ramp blocks.
pub fn layout(params: &SchemeParams) -> SuperblockLayout {
    let (tau, z) = (params.tau, params.z);
    if !params.is_composed() {
        return SuperblockLayout {
            n_prime: tau,
            n1: tau,
            n2: 0,
            blocks1: 1,
            blocks2: 0,
            rand_per_superblock: 0,
            share_symbols_per_server: 1,
        };
    }
    // n1 / n' = alpha tau / z = a / b in lowest terms, a < b. Then n' = b k,
    // n1 = a k, n2 = (b - a) k, and k must make tau | a k and (tau - z) | (b - a) k.
    let r = params.alpha * int(tau as i128) / int(z as i128);
    let (a, b) = (*r.numer() as usize, *r.denom() as usize);
    let k1 = tau / tau.gcd(&a);
    let k2 = (tau - z) / (tau - z).gcd(&(b - a));
    let k = k1.lcm(&k2);
    let (n_prime, n1, n2) = (b * k, a * k, (b - a) * k);
    let blocks1 = n1 / tau;
    let blocks2 = n2 / (tau - z);
    SuperblockLayout {
        n_prime,
        n1,
        n2,
        blocks1,
        blocks2,
        rand_per_superblock: z * blocks2,
        share_symbols_per_server: blocks1 + blocks2,
    }
}

/// Source of the encoder's private random symbols.
pub trait Randomness {
    /// A uniform symbol of `field`.
    fn next_symbol(&mut self, field: PrimeField) -> Result<FieldElement>;

    /// Fills `out` with the next `out.len()` symbols as residues; the same
    /// symbols `next_symbol` would have returned.
    fn fill_symbols(&mut self, field: PrimeField, out: &mut [u32]) -> Result<()> {
        for o in out {
            let s = self.next_symbol(field)?;
            field.check(s)?;
            *o = u32::try_from(s.value()).map_err(|_| Error::InvalidParams(format!("symbol {} exceeds 32 bits", s.value())))?;
        }
        Ok(())
    }

    /// Identifier tying together the shares of one encode call.
    fn scheme_id(&mut self) -> u128;

    /// Random symbols handed out so far.
    fn consumed(&self) -> u64;
}

/// Uniform symbols drawn from any RNG.
///
/// For `q < 2^32` each symbol reads the narrowest of 1, 2 or 4 bytes that
/// covers `q` and rejects values past the largest multiple of `q`.
pub struct RngRandomness<R> {
    rng: R,
    consumed: u64,
    buf: Box<[u8; RNG_BUF]>,
    pos: usize,
}

const RNG_BUF: usize = 4096;

impl<R: RngCore> RngRandomness<R> {
    pub fn new(rng: R) -> Self {
        RngRandomness {
            rng,
            consumed: 0,
            buf: Box::new([0; RNG_BUF]),
            pos: RNG_BUF,
        }
    }

    fn sample(&mut self, q: u32) -> u32 {
        let width = match q {
            0..=0x100 => 1,
            0x101..=0x1_0000 => 2,
            _ => 4,
        };
        let zone = (1u64 << (8 * width)) / q as u64 * q as u64;
        loop {
            if self.pos + width > RNG_BUF {
                self.rng.fill_bytes(&mut self.buf[..]);
                self.pos = 0;
            }
            let b = &self.buf[self.pos..];
            let v = match width {
                1 => b[0] as u32,
                2 => u16::from_le_bytes([b[0], b[1]]) as u32,
                _ => u32::from_le_bytes([b[0], b[1], b[2], b[3]]),
            };
            self.pos += width;
            if (v as u64) < zone {
                return v % q;
            }
        }
    }
}

impl<R: RngCore> Randomness for RngRandomness<R> {
    fn next_symbol(&mut self, field: PrimeField) -> Result<FieldElement> {
        self.consumed += 1;
        let v = match u32::try_from(field.modulus()) {
            Ok(q) => self.sample(q) as u64,
            Err(_) => self.rng.gen_range(0..field.modulus()),
        };
        Ok(field.elem(v))
    }

    fn fill_symbols(&mut self, field: PrimeField, out: &mut [u32]) -> Result<()> {
        let Ok(q) = u32::try_from(field.modulus()) else {
            return Err(Error::InvalidParams(format!("q = {} exceeds 32 bits", field.modulus())));
        };
        for o in out.iter_mut() {
            *o = self.sample(q);
        }
        self.consumed += out.len() as u64;
        Ok(())
    }

    fn scheme_id(&mut self) -> u128 {
        self.rng.gen()
    }

    fn consumed(&self) -> u64 {
        self.consumed
    }
}

/// A fixed, finite list of symbols; errors once it runs dry.
#[derive(Clone, Debug)]
pub struct FixedRandomness {
    symbols: Vec<FieldElement>,
    pos: usize,
    id: u128,
}

impl FixedRandomness {
    pub fn new(symbols: Vec<FieldElement>, id: u128) -> Self {
        FixedRandomness { symbols, pos: 0, id }
    }
}

impl Randomness for FixedRandomness {
    fn next_symbol(&mut self, field: PrimeField) -> Result<FieldElement> {
        let s = *self
            .symbols
            .get(self.pos)
            .ok_or(Error::RandomnessExhausted(self.pos as u64))?;
        field.check(s)?;
        self.pos += 1;
        Ok(s)
    }

    fn scheme_id(&mut self) -> u128 {
        self.id
    }

    fn consumed(&self) -> u64 {
        self.pos as u64
    }
}

/// What server `server_index` stores.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShareBundle {
    pub scheme_id: u128,
    /// 1-based.
    pub server_index: usize,
    pub params: SchemeParams,
    /// Length of the file before padding. [`encode`] records symbols; the
    /// share-file layer replaces it with the byte length.
    pub original_length: u64,
    /// This server's symbols as residues mod `params.field`.
    pub payload: Vec<u32>,
}

impl ShareBundle {
    pub fn superblock_count(&self) -> usize {
        let per = layout(&self.params).share_symbols_per_server;
        self.payload.len() / per
    }

    pub fn symbols(&self) -> Vec<FieldElement> {
        self.payload.iter().map(|&v| self.params.field.elem(v as u64)).collect()
    }
}

fn ramps(params: &SchemeParams) -> Result<(RampParams, RampParams)> {
    let (tau, z, t, f) = (params.tau, params.z, params.servers, params.field);
    Ok((RampParams::new(tau, tau, t, f)?, RampParams::new(tau, tau - z, t, f)?))
}

/// Each server's row of the block map `shares = V * (secret ++ randomness)`.
fn vandermonde_rows(ramp: &RampParams) -> Vec<Vec<u64>> {
    let (a, b) = ramp::encoding_matrices(ramp);
    (0..ramp.servers()).map(|t| a.row(t).iter().chain(b.row(t)).copied().collect()).collect()
}

fn wrong_field(symbols: &[FieldElement], f: PrimeField) -> Option<FieldElement> {
    symbols.iter().find(|e| e.field() != f).copied()
}

/// In-memory payloads hold 32-bit residues.
fn check_symbol_width(f: PrimeField) -> Result<()> {
    if f.modulus() > u32::MAX as u64 {
        return Err(Error::InvalidParams(format!(
            "share payloads hold 32-bit symbols; q = {} is too large",
            f.modulus()
        )));
    }
    Ok(())
}

/// Encodes a file already padded to a whole number of superblocks.
pub fn encode(file_symbols: &[FieldElement], params: &SchemeParams, randomness: &mut impl Randomness) -> Result<Vec<ShareBundle>> {
    let f = params.field;
    check_symbol_width(f)?;
    if let Some(e) = wrong_field(file_symbols, f) {
        f.check(e)?;
    }
    let values: Vec<u32> = file_symbols.iter().map(|e| e.value() as u32).collect();
    encode_values(&values, params, randomness)
}

/// [`encode`] on residues, which must be below `q`.
pub(crate) fn encode_values(file: &[u32], params: &SchemeParams, randomness: &mut impl Randomness) -> Result<Vec<ShareBundle>> {
    params.validate()?;
    let f = params.field;
    check_symbol_width(f)?;
    let lay = layout(params);
    if !file.len().is_multiple_of(lay.n_prime) {
        return Err(Error::InvalidParams(format!(
            "file of {} symbols is not a multiple of the superblock size {}",
            file.len(),
            lay.n_prime
        )));
    }
    let (ramp1, ramp2) = ramps(params)?;
    let (rows1, rows2) = (vandermonde_rows(&ramp1), vandermonde_rows(&ramp2));
    let comb = Combiner::new(f, params.tau);
    let (tau, z) = (params.tau, params.z);
    let per = lay.share_symbols_per_server;
    let superblocks = file.len() / lay.n_prime;
    let mut payloads = vec![vec![0u32; superblocks * per]; params.servers];

    // Runs of superblocks: gather each block position's polynomial
    // coefficients into contiguous streams, then evaluate column-wise.
    let run = (RUN_SYMBOLS / lay.n_prime).next_multiple_of(8).min(superblocks.max(1));
    let mut coeffs = vec![vec![0u32; run]; tau];
    let mut rand = vec![0u32; run * lay.rand_per_superblock];
    let mut first = 0;
    while first < superblocks {
        let count = run.min(superblocks - first);
        let rand = &mut rand[..count * lay.rand_per_superblock];
        randomness.fill_symbols(f, rand)?;
        for p in 0..per {
            let (rows, secret, offset) = if p < lay.blocks1 {
                (&rows1, tau, p * tau)
            } else {
                (&rows2, tau - z, lay.n1 + (p - lay.blocks1) * (tau - z))
            };
            for (j, c) in coeffs.iter_mut().enumerate() {
                let c = &mut c[..count];
                if j < secret {
                    let col = file[(first * lay.n_prime + offset + j)..].iter().step_by(lay.n_prime);
                    for (dst, &v) in c.iter_mut().zip(col) {
                        *dst = v;
                    }
                } else {
                    // Consumption order: superblock, then scheme-2 block, then coefficient.
                    let k = p - lay.blocks1;
                    let col = rand[k * z + (j - secret)..].iter().step_by(lay.rand_per_superblock);
                    for (dst, &v) in c.iter_mut().zip(col) {
                        *dst = v;
                    }
                }
            }
            let streams: Vec<&[u32]> = coeffs.iter().map(|c| &c[..count]).collect();
            for (payload, row) in payloads.iter_mut().zip(rows) {
                let max = comb.columns(row, &streams, (0, 1), count, payload, (first * per + p, per));
                if max as u64 >= f.modulus() {
                    return Err(Error::InvalidParams(format!("symbol {max} is not below q = {}", f.modulus())));
                }
            }
        }
        first += count;
    }

    let scheme_id = randomness.scheme_id();
    Ok(payloads
        .into_iter()
        .enumerate()
        .map(|(t, payload)| ShareBundle {
            scheme_id,
            server_index: t + 1,
            params: *params,
            original_length: file.len() as u64,
            payload,
        })
        .collect())
}

/// Checks the bundles belong together and returns the `tau` of them used for decoding.
fn consistent<B: Borrow<ShareBundle>>(bundles: &[B]) -> Result<(SchemeParams, Vec<&ShareBundle>)> {
    let first = bundles
        .first()
        .ok_or(Error::InsufficientShares {
            needed: 1,
            available: 0,
        })?
        .borrow();
    let params = first.params;
    params.validate()?;
    let mut seen = HashSet::new();
    for b in bundles {
        let b = b.borrow();
        if b.scheme_id != first.scheme_id {
            return Err(Error::SchemeIdMismatch);
        }
        if b.params != params {
            return Err(Error::InconsistentShares(format!(
                "server {} has parameters {}, server {} has {}",
                first.server_index, params, b.server_index, b.params
            )));
        }
        if b.original_length != first.original_length || b.payload.len() != first.payload.len() {
            return Err(Error::InconsistentShares(format!(
                "servers {} and {} disagree on the file length",
                first.server_index, b.server_index
            )));
        }
        if b.server_index == 0 || b.server_index > params.servers {
            return Err(Error::InconsistentShares(format!(
                "server index {} outside [1, {}]",
                b.server_index, params.servers
            )));
        }
        if !seen.insert(b.server_index) {
            return Err(Error::DuplicateShare(b.server_index as u64));
        }
    }
    if bundles.len() < params.tau {
        return Err(Error::InsufficientShares {
            needed: params.tau,
            available: bundles.len(),
        });
    }
    let per = layout(&params).share_symbols_per_server;
    if first.payload.len() % per != 0 {
        return Err(Error::InconsistentShares(format!(
            "payload of {} symbols is not a multiple of {per}",
            first.payload.len()
        )));
    }
    Ok((params, bundles[..params.tau].iter().map(Borrow::borrow).collect()))
}

/// Recovers the padded file symbols from at least `tau` bundles of one split.
pub fn decode<B: Borrow<ShareBundle>>(bundles: &[B]) -> Result<Vec<FieldElement>> {
    let (f, values) = decode_values(bundles)?;
    Ok(values.into_iter().map(|v| f.elem(v as u64)).collect())
}

/// [`decode`] as residues.
pub(crate) fn decode_values<B: Borrow<ShareBundle>>(bundles: &[B]) -> Result<(PrimeField, Vec<u32>)> {
    let mut out = Vec::new();
    let f = decode_chunks(bundles, |chunk| out.extend_from_slice(chunk))?;
    Ok((f, out))
}

/// Decodes a run of whole superblocks at a time and hands each run's file
/// symbols to `sink`, in file order. Every run except the last holds a
/// multiple of 8 symbols. On error, `sink` may have seen garbage.
pub(crate) fn decode_chunks<B, S>(bundles: &[B], mut sink: S) -> Result<PrimeField>
where
    B: Borrow<ShareBundle>,
    S: FnMut(&[u32]),
{
    let (params, used) = consistent(bundles)?;
    let lay = layout(&params);
    let f = params.field;
    check_symbol_width(f)?;
    let (ramp1, ramp2) = ramps(&params)?;
    let points: Vec<FieldElement> = used.iter().map(|b| f.elem(b.server_index as u64)).collect();
    let rec1 = Reconstructor::new(&ramp1, &points)?;
    let rec2 = Reconstructor::new(&ramp2, &points)?;

    // Each position within a superblock has fixed weights, so decode one
    // position across a run of superblocks at a time.
    let per = lay.share_symbols_per_server;
    let superblocks = used[0].payload.len() / per;
    let run = (RUN_SYMBOLS / lay.n_prime).next_multiple_of(8);
    let streams: Vec<&[u32]> = used.iter().map(|b| &b.payload[..]).collect();
    let comb = Combiner::new(f, params.tau);
    let mut out = vec![0u32; run.min(superblocks) * lay.n_prime];
    let mut max = 0;
    let mut first = 0;
    while first < superblocks {
        let count = run.min(superblocks - first);
        let out = &mut out[..count * lay.n_prime];
        for p in 0..per {
            let (rec, base) = if p < lay.blocks1 {
                (&rec1, p * params.tau)
            } else {
                (&rec2, lay.n1 + (p - lay.blocks1) * (params.tau - params.z))
            };
            for (k, w) in rec.weights().iter().enumerate() {
                let read = comb.columns(w, &streams, (first * per + p, per), count, out, (base + k, lay.n_prime));
                max = max.max(read);
            }
        }
        sink(out);
        first += count;
    }
    if max as u64 >= f.modulus() {
        return Err(Error::InconsistentShares(format!(
            "share symbol {max} is not below q = {}",
            f.modulus()
        )));
    }
    Ok(f)
}

/// Target size of one decoded run, small enough to stay in L1/L2.
const RUN_SYMBOLS: usize = 4096;

/// The superblock's linear map: all servers' symbols = A * F + B * R, with F
/// the `n'` file symbols and R the superblock's random symbols in consumption
/// order.
#[derive(Clone, Debug)]
pub struct GlobalMaps {
    pub a: Matrix,
    pub b: Matrix,
    /// Rows of `a` and `b` belonging to each server (0-based server index).
    pub server_rows: Vec<Range<usize>>,
}

impl GlobalMaps {
    /// Row indices of the servers in `subset` (0-based).
    pub fn rows_of(&self, subset: &[usize]) -> Vec<usize> {
        subset.iter().flat_map(|&s| self.server_rows[s].clone()).collect()
    }
}

pub fn global_encoding_matrices(params: &SchemeParams) -> Result<GlobalMaps> {
    params.validate()?;
    let lay = layout(params);
    let (ramp1, ramp2) = ramps(params)?;
    let (a1, _) = ramp::encoding_matrices(&ramp1);
    let (a2, b2) = ramp::encoding_matrices(&ramp2);
    let per = lay.share_symbols_per_server;
    let f = params.field;
    let mut a = Matrix::zeros(f, params.servers * per, lay.n_prime);
    let mut b = Matrix::zeros(f, params.servers * per, lay.rand_per_superblock);
    let (w1, w2, z) = (params.tau, params.tau - params.z, params.z);
    for t in 0..params.servers {
        let base = t * per;
        for k in 0..lay.blocks1 {
            for j in 0..w1 {
                a.set(base + k, k * w1 + j, a1.get(t, j));
            }
        }
        for k in 0..lay.blocks2 {
            let row = base + lay.blocks1 + k;
            for j in 0..w2 {
                a.set(row, lay.n1 + k * w2 + j, a2.get(t, j));
            }
            for j in 0..z {
                b.set(row, k * z + j, b2.get(t, j));
            }
        }
    }
    let server_rows = (0..params.servers).map(|t| t * per..(t + 1) * per).collect();
    Ok(GlobalMaps { a, b, server_rows })
}
