//! Fixed-weight linear combinations over GF(q), the inner loops of encoding
//! and decoding. Reduction is deferred to the end of each sum whenever the
//! unreduced sum cannot overflow.

use crate::field::PrimeField;

#[derive(Clone, Copy, Debug)]
enum Lanes {
    /// Sums fit in u32; reduce with a Barrett constant `floor(2^32 / q)`.
    Narrow { m: u64 },
    /// Sums fit in u64.
    Wide,
    /// Reduce after every product.
    Scalar,
}

/// Columns are accumulated this many at a time so the sums stay in L1.
const CHUNK: usize = 2048;

#[derive(Clone, Copy, Debug)]
pub(crate) struct Combiner {
    field: PrimeField,
    q: u64,
    lanes: Lanes,
}

impl Combiner {
    /// For sums of at most `terms` products of reduced values. `q` must be
    /// below 2^32.
    pub(crate) fn new(field: PrimeField, terms: usize) -> Self {
        let q = field.modulus();
        debug_assert!(q <= u32::MAX as u64);
        let worst = (q as u128 - 1) * (q as u128 - 1) * terms.max(1) as u128;
        let lanes = if worst <= u32::MAX as u128 {
            Lanes::Narrow { m: (1u64 << 32) / q }
        } else if worst <= u64::MAX as u128 {
            Lanes::Wide
        } else {
            Lanes::Scalar
        };
        Combiner { field, q, lanes }
    }

    /// For `j < count`: `out[out_start + j * out_stride] = sum_i w[i] * streams[i][start + j * stride]`.
    ///
    /// Returns the largest stream value read. Sums are only meaningful when
    /// it is below `q`.
    pub(crate) fn columns(
        &self,
        w: &[u64],
        streams: &[&[u32]],
        (start, stride): (usize, usize),
        count: usize,
        out: &mut [u32],
        (out_start, out_stride): (usize, usize),
    ) -> u32 {
        let w32: Vec<u32> = w.iter().map(|&x| x as u32).collect();
        let mut scratch32 = Vec::new();
        let mut scratch64: Vec<u64> = Vec::new();
        let mut max = 0;
        let mut done = 0;
        while done < count {
            let n = CHUNK.min(count - done);
            let from = start + done * stride;
            match self.lanes {
                Lanes::Narrow { m } => {
                    let qm = (self.q, m);
                    if out_stride == 1 {
                        let dst = &mut out[out_start + done..out_start + done + n];
                        max = max.max(narrow_chunk(&w32, streams, from, stride, qm, dst));
                    } else {
                        scratch32.resize(n, 0);
                        let sums = &mut scratch32[..n];
                        max = max.max(narrow_chunk(&w32, streams, from, stride, qm, sums));
                        let dst = out[out_start + done * out_stride..].iter_mut().step_by(out_stride);
                        for (o, &a) in dst.zip(sums.iter()) {
                            *o = a;
                        }
                    }
                }
                Lanes::Wide | Lanes::Scalar => {
                    scratch64.clear();
                    scratch64.resize(n, 0);
                    let sums = &mut scratch64[..n];
                    for (&wi, s) in w.iter().zip(streams) {
                        let col = s[from..].iter().step_by(stride);
                        if matches!(self.lanes, Lanes::Wide) {
                            for (a, &v) in sums.iter_mut().zip(col) {
                                *a = (*a).wrapping_add(wi.wrapping_mul(v as u64));
                                max = max.max(v);
                            }
                        } else {
                            for (a, &v) in sums.iter_mut().zip(col) {
                                *a = self.field.add_raw(*a, self.field.mul_raw(wi, v as u64));
                                max = max.max(v);
                            }
                        }
                    }
                    let dst = out[out_start + done * out_stride..].iter_mut().step_by(out_stride);
                    for (o, &a) in dst.zip(sums.iter()) {
                        *o = (a % self.q) as u32;
                    }
                }
            }
            done += n;
        }
        max
    }
}

#[inline(always)]
fn reduce_narrow(a: u32, q: u64, m: u64) -> u64 {
    let r = (a as u64).wrapping_sub(((a as u64).wrapping_mul(m) >> 32).wrapping_mul(q));
    if r >= q {
        r - q
    } else {
        r
    }
}

/// Reduced sums of one chunk of columns into `out`; returns the largest
/// stream value read.
fn narrow_chunk(w: &[u32], streams: &[&[u32]], from: usize, stride: usize, qm: (u64, u64), out: &mut [u32]) -> u32 {
    #[cfg(target_arch = "x86_64")]
    if stride == 1 {
        if std::arch::is_x86_feature_detected!("avx512f") {
            // SAFETY: the CPU supports AVX-512F, checked just above.
            return unsafe { narrow_chunk_avx512(w, streams, from, qm, out) };
        }
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2, checked just above.
            return unsafe { narrow_chunk_avx2(w, streams, from, qm, out) };
        }
    }
    narrow_chunk_generic(w, streams, from, stride, qm, out)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx512f")]
unsafe fn narrow_chunk_avx512(w: &[u32], streams: &[&[u32]], from: usize, qm: (u64, u64), out: &mut [u32]) -> u32 {
    narrow_chunk_generic(w, streams, from, 1, qm, out)
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn narrow_chunk_avx2(w: &[u32], streams: &[&[u32]], from: usize, qm: (u64, u64), out: &mut [u32]) -> u32 {
    narrow_chunk_generic(w, streams, from, 1, qm, out)
}


#[inline(always)]
fn narrow_chunk_generic(w: &[u32], streams: &[&[u32]], from: usize, stride: usize, (q, m): (u64, u64), out: &mut [u32]) -> u32 {
    let n = out.len();
    let mut max = 0;
    for (i, (&wi, s)) in w.iter().zip(streams).enumerate() {
        // The first term overwrites whatever `out` held. Lane choice already
        // rules out overflow, so wrapping ops only skip the checks.
        let keep = if i == 0 { 0 } else { u32::MAX };
        if stride == 1 {
            for (a, &v) in out.iter_mut().zip(&s[from..from + n]) {
                *a = (*a & keep).wrapping_add(wi.wrapping_mul(v));
                max = max.max(v);
            }
        } else {
            for (a, &v) in out.iter_mut().zip(s[from..].iter().step_by(stride)) {
                *a = (*a & keep).wrapping_add(wi.wrapping_mul(v));
                max = max.max(v);
            }
        }
    }
    if w.is_empty() {
        out.fill(0);
    }
    for a in out.iter_mut() {
        *a = reduce_narrow(*a, q, m) as u32;
    }
    max
}
