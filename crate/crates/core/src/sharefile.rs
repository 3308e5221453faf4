//! Files to symbols and back, and the on-disk share format.
//!
//! A share file is a fixed 69-byte header followed by the payload symbols as
//! 4-byte little-endian words:
//!
//! ```text
//! offset size field
//!      0    4 magic "LKSS"
//!      4    1 version (1)
//!      5    8 q
//!     13    2 T
//!     15    2 tau
//!     17    2 z
//!     19    8 alpha numerator
//!     27    8 alpha denominator
//!     35   16 scheme id
//!     51    2 server index (1-based)
//!     53    8 original file length in bytes
//!     61    8 superblock count
//! ```
//!
//! All integers are little-endian.

use std::borrow::Borrow;


use crate::error::{Error, Result};
use crate::field::{FieldElement, PrimeField};
use crate::leaky::{self, Randomness, ShareBundle};
use crate::params::SchemeParams;
use crate::rational::Rational;

pub const MAGIC: &[u8; 4] = b"LKSS";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 69;

/// Bits of file data carried by one symbol: whole bytes when `q >= 256`,
/// otherwise `floor(log2 q)` bits.
pub fn bits_per_symbol(field: PrimeField) -> u32 {
    let b = field.bits_floor().min(32);
    if b >= 8 {
        b / 8 * 8
    } else {
        b
    }
}

/// Reads `data` as a big-endian bit string, `bits_per_symbol` bits per
/// symbol; the last symbol is zero-filled on the right.
pub fn bytes_to_symbols(data: &[u8], field: PrimeField) -> Vec<FieldElement> {
    bytes_to_values(data, field, 0).into_iter().map(|v| field.elem(v as u64)).collect()
}

/// [`bytes_to_symbols`] as residues, zero-padded to a multiple of `pad_to`.
/// Every value is below `2^b <= q`, so none needs reducing.
fn bytes_to_values(data: &[u8], field: PrimeField, pad_to: usize) -> Vec<u32> {
    let b = bits_per_symbol(field) as u64;
    let total_bits = data.len() as u64 * 8;
    let count = total_bits.div_ceil(b) as usize;
    let mut out = Vec::with_capacity(count.next_multiple_of(pad_to.max(1)));
    let mut acc: u64 = 0;
    let mut held: u64 = 0;
    for &byte in data {
        acc = acc << 8 | byte as u64;
        held += 8;
        while held >= b {
            held -= b;
            out.push((acc >> held) as u32);
            acc &= (1 << held) - 1;
        }
    }
    if held > 0 {
        out.push((acc << (b - held)) as u32);
    }
    out.resize(count.next_multiple_of(pad_to.max(1)), 0);
    out
}

/// Inverse of [`bytes_to_symbols`], truncated to `len` bytes.
pub fn symbols_to_bytes(symbols: &[FieldElement], field: PrimeField, len: usize) -> Result<Vec<u8>> {
    if let Some(e) = symbols.iter().find(|e| e.field() != field) {
        field.check(*e)?;
    }
    if let Some(e) = symbols.iter().find(|e| e.value() > u32::MAX as u64) {
        return Err(Error::InconsistentShares(format!("symbol {} does not fit the packing", e.value())));
    }
    let values: Vec<u32> = symbols.iter().map(|s| s.value() as u32).collect();
    let mut packer = Packer::new(field, len);
    packer.push(&values);
    packer.finish()
}

/// Streams symbols back into bytes, `bits_per_symbol` bits each.
struct Packer {
    bits: u32,
    len: usize,
    /// Symbols still needed to cover `len` bytes.
    remaining: usize,
    out: Vec<u8>,
    filled: usize,
    overflow: u32,
}

impl Packer {
    fn new(field: PrimeField, len: usize) -> Self {
        let bits = bits_per_symbol(field);
        let needed = (len * 8).div_ceil(bits as usize);
        let (g, group_bytes) = group_shape(bits);
        Packer {
            bits,
            len,
            remaining: needed,
            out: vec![0; needed.div_ceil(g) * group_bytes],
            filled: 0,
            overflow: 0,
        }
    }

    /// All but the last call must pass a multiple of 8 symbols.
    fn push(&mut self, values: &[u32]) {
        let values = &values[..values.len().min(self.remaining)];
        self.remaining -= values.len();
        let out = &mut self.out[self.filled..];
        let (written, overflow) = match self.bits {
            1 => pack_bits::<1>(values, out),
            2 => pack_bits::<2>(values, out),
            3 => pack_bits::<3>(values, out),
            4 => pack_bits::<4>(values, out),
            5 => pack_bits::<5>(values, out),
            6 => pack_bits::<6>(values, out),
            7 => pack_bits::<7>(values, out),
            8 => pack_bytes::<1>(values, out),
            16 => pack_bytes::<2>(values, out),
            24 => pack_bytes::<3>(values, out),
            _ => pack_bytes::<4>(values, out),
        };
        self.filled += written;
        self.overflow |= overflow;
    }

    fn finish(mut self) -> Result<Vec<u8>> {
        if self.remaining > 0 {
            return Err(Error::InconsistentShares(format!(
                "{} more symbols needed to hold {} bytes",
                self.remaining, self.len
            )));
        }
        if self.overflow != 0 {
            return Err(Error::InconsistentShares(format!(
                "decoded symbols do not fit in {} bits; shares are corrupted",
                self.bits
            )));
        }
        self.out.truncate(self.len);
        Ok(self.out)
    }
}

/// Symbols per group and bytes per group, the smallest run that fills whole
/// bytes.
const fn group_shape(bits: u32) -> (usize, usize) {
    let (mut a, mut b) = (bits, 8);
    while b != 0 {
        (a, b) = (b, a % b);
    }
    let group_bits = (bits * 8 / a) as usize;
    (group_bits / bits as usize, group_bits / 8)
}

/// Returns bytes written and the OR of all out-of-range high bits.
#[inline]
fn pack_bits<const B: u32>(values: &[u32], out: &mut [u8]) -> (usize, u32) {
    let (g, group_bytes) = const { group_shape(B) };
    let mut overflow = 0;
    let mut written = 0;
    let mut groups = values.chunks_exact(g);
    for (c, o) in (&mut groups).zip(out.chunks_exact_mut(group_bytes)) {
        let mut word = 0u64;
        for &v in c {
            overflow |= v >> B;
            word = word << B | v as u64;
        }
        o.copy_from_slice(&word.to_be_bytes()[8 - group_bytes..]);
        written += group_bytes;
    }
    let rest = groups.remainder();
    if !rest.is_empty() {
        let mut word = 0u64;
        for &v in rest {
            overflow |= v >> B;
            word = word << B | v as u64;
        }
        word <<= B as usize * (g - rest.len());
        out[written..written + group_bytes].copy_from_slice(&word.to_be_bytes()[8 - group_bytes..]);
        written += group_bytes;
    }
    (written, overflow)
}

#[inline]
fn pack_bytes<const N: usize>(values: &[u32], out: &mut [u8]) -> (usize, u32) {
    let mut overflow = 0;
    for (&v, o) in values.iter().zip(out.chunks_exact_mut(N)) {
        overflow |= ((v as u64) >> (8 * N)) as u32;
        o.copy_from_slice(&v.to_be_bytes()[4 - N..]);
    }
    (values.len() * N, overflow)
}

/// Splits raw bytes: pack into symbols, zero-pad to whole superblocks, encode.
/// Each bundle records the unpadded byte length.
pub fn split_bytes(data: &[u8], params: &SchemeParams, randomness: &mut impl Randomness) -> Result<Vec<ShareBundle>> {
    params.validate()?;
    check_file_params(params)?;
    let values = bytes_to_values(data, params.field, leaky::layout(params).n_prime);
    let mut bundles = leaky::encode_values(&values, params, randomness)?;
    for b in &mut bundles {
        b.original_length = data.len() as u64;
    }
    Ok(bundles)
}

/// Decodes bundles produced by [`split_bytes`] back into the original bytes.
pub fn recover_bytes<B: Borrow<ShareBundle>>(bundles: &[B]) -> Result<Vec<u8>> {
    let first = bundles.first().map(Borrow::borrow).ok_or(Error::InsufficientShares {
        needed: 1,
        available: 0,
    })?;
    let mut packer = Packer::new(first.params.field, first.original_length as usize);
    leaky::decode_chunks(bundles, |chunk| packer.push(chunk))?;
    packer.finish()
}

fn check_file_params(params: &SchemeParams) -> Result<()> {
    if params.field.modulus() > u32::MAX as u64 {
        return Err(Error::InvalidParams(format!(
            "share files store 4-byte symbols; q = {} is too large",
            params.field.modulus()
        )));
    }
    if *params.alpha.numer() < 0 || *params.alpha.denom() > u64::MAX as i128 {
        return Err(Error::InvalidParams(format!("alpha = {} does not fit the header", params.alpha)));
    }
    Ok(())
}

fn format_err(m: impl Into<String>) -> Error {
    Error::FileFormat(m.into())
}

/// Serializes one bundle as a share file.
pub fn write_share(bundle: &ShareBundle) -> Result<Vec<u8>> {
    let p = &bundle.params;
    check_file_params(p)?;
    let per = leaky::layout(p).share_symbols_per_server;
    if !bundle.payload.len().is_multiple_of(per) {
        return Err(format_err(format!(
            "payload of {} symbols is not a whole number of superblocks",
            bundle.payload.len()
        )));
    }
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * bundle.payload.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&p.field.modulus().to_le_bytes());
    out.extend_from_slice(&(p.servers as u16).to_le_bytes());
    out.extend_from_slice(&(p.tau as u16).to_le_bytes());
    out.extend_from_slice(&(p.z as u16).to_le_bytes());
    out.extend_from_slice(&(*p.alpha.numer() as u64).to_le_bytes());
    out.extend_from_slice(&(*p.alpha.denom() as u64).to_le_bytes());
    out.extend_from_slice(&bundle.scheme_id.to_le_bytes());
    out.extend_from_slice(&(bundle.server_index as u16).to_le_bytes());
    out.extend_from_slice(&bundle.original_length.to_le_bytes());
    out.extend_from_slice(&((bundle.payload.len() / per) as u64).to_le_bytes());
    debug_assert_eq!(out.len(), HEADER_LEN);
    for s in &bundle.payload {
        out.extend_from_slice(&s.to_le_bytes());
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> [u8; N] {
        let mut a = [0u8; N];
        a.copy_from_slice(&self.buf[self.pos..self.pos + N]);
        self.pos += N;
        a
    }
    fn u16(&mut self) -> u16 {
        u16::from_le_bytes(self.take())
    }
    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take())
    }
}

/// Parses and validates a share file.
pub fn read_share(bytes: &[u8]) -> Result<ShareBundle> {
    if bytes.len() < HEADER_LEN {
        return Err(format_err(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let mut r = Reader { buf: bytes, pos: 0 };
    if &r.take::<4>() != MAGIC {
        return Err(format_err("bad magic, not a share file"));
    }
    let version = r.take::<1>()[0];
    if version != VERSION {
        return Err(format_err(format!("unsupported version {version}")));
    }
    let q = r.u64();
    let servers = r.u16() as usize;
    let tau = r.u16() as usize;
    let z = r.u16() as usize;
    let alpha_num = r.u64();
    let alpha_den = r.u64();
    let scheme_id = u128::from_le_bytes(r.take());
    let server_index = r.u16() as usize;
    let original_length = r.u64();
    let superblock_count = r.u64();

    if alpha_den == 0 {
        return Err(format_err("alpha denominator is zero"));
    }
    let alpha = Rational::new(alpha_num as i128, alpha_den as i128);
    let params = SchemeParams::with_modulus(servers, tau, z, alpha, q)?;
    check_file_params(&params)?;
    if server_index == 0 || server_index > servers {
        return Err(format_err(format!("server index {server_index} outside [1, {servers}]")));
    }
    let lay = leaky::layout(&params);
    let symbols = superblock_count
        .checked_mul(lay.share_symbols_per_server as u64)
        .ok_or_else(|| format_err("superblock count overflows"))?;
    let payload_bytes = bytes.len() - HEADER_LEN;
    if symbols.checked_mul(4) != Some(payload_bytes as u64) {
        return Err(format_err(format!(
            "payload is {payload_bytes} bytes, header promises {symbols} symbols"
        )));
    }
    let capacity = superblock_count as u128 * lay.n_prime as u128 * bits_per_symbol(params.field) as u128;
    if (original_length as u128) * 8 > capacity {
        return Err(format_err(format!(
            "original length {original_length} exceeds what {superblock_count} superblocks hold"
        )));
    }
    let payload = bytes[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| {
            let v = u32::from_le_bytes(c.try_into().unwrap());
            if v as u64 >= q {
                Err(format_err(format!("payload symbol {v} is not below q = {q}")))
            } else {
                Ok(v)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ShareBundle {
        scheme_id,
        server_index,
        params,
        original_length,
        payload,
    })
}
