//! Seeded samplers for states and channels.

use alloc::vec::Vec;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channels::KrausChannel;
use crate::linalg::{psd_inv_sqrt, CMatrix, C64, SUPPORT_TOL};
use crate::math;
use crate::states::{DensityState, PureState};

/// Generator for stream `stream` of `seed`.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform on `[0, 1)` with 53 random bits.
pub fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal pair by Box-Muller.
pub fn gaussian_pair(rng: &mut impl RngCore) -> (f64, f64) {
    let u1 = 1.0 - uniform(rng);
    let u2 = uniform(rng);
    let r = math::sqrt(-2.0 * math::ln(u1));
    let t = 2.0 * core::f64::consts::PI * u2;
    (r * math::cos(t), r * math::sin(t))
}

pub fn complex_gaussian(rng: &mut impl RngCore) -> C64 {
    let (a, b) = gaussian_pair(rng);
    C64::new(a, b) * core::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_vector(rng: &mut impl RngCore, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

pub fn gaussian_matrix(rng: &mut impl RngCore, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_vec(rows, cols, gaussian_vector(rng, rows * cols))
}

/// Haar-random pure state.
pub fn pure_state(rng: &mut impl RngCore, d: usize) -> PureState {
    loop {
        if let Ok(s) = PureState::normalized(gaussian_vector(rng, d), alloc::vec![d]) {
            return s;
        }
    }
}

/// Full-rank density matrix `G G^dag / Tr` with Gaussian `G`.
pub fn density_state(rng: &mut impl RngCore, d: usize) -> DensityState {
    let g = gaussian_matrix(rng, d, d);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    DensityState::from_parts(m.scale_real(1.0 / tr), alloc::vec![d])
}

/// Random probability vector of length `n` (normalized exponentials).
pub fn simplex(rng: &mut impl RngCore, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -math::ln(1.0 - uniform(rng))).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random channel with Kraus rank drawn from `ceil(d_in/d_out)..=d_in*d_out`,
/// Gaussian Kraus operators rescaled by `(sum K^dag K)^(-1/2)`.
pub fn channel(rng: &mut impl RngCore, d_in: usize, d_out: usize) -> KrausChannel {
    let min_rank = min_rank(d_in, d_out);
    let span = d_in * d_out - min_rank + 1;
    let rank = min_rank + (rng.next_u64() % span as u64) as usize;
    channel_with_rank(rng, d_in, d_out, rank)
}

fn min_rank(d_in: usize, d_out: usize) -> usize {
    d_in.div_ceil(d_out).max(1)
}

/// Ranks below `ceil(d_in/d_out)` cannot be trace preserving and are raised.
pub fn channel_with_rank(rng: &mut impl RngCore, d_in: usize, d_out: usize, rank: usize) -> KrausChannel {
    let rank = rank.max(min_rank(d_in, d_out));
    loop {
        let ops: Vec<CMatrix> = (0..rank).map(|_| gaussian_matrix(rng, d_out, d_in)).collect();
        if let Ok(ch) = normalize_kraus(d_in, d_out, &ops) {
            return ch;
        }
    }
}

/// Rescales `ops` to a trace-preserving set, `K -> K S^(-1/2)` with
/// `S = sum K^dag K`. Fails if `S` is singular.
pub fn normalize_kraus(d_in: usize, d_out: usize, ops: &[CMatrix]) -> crate::Result<KrausChannel> {
    let mut s = CMatrix::zeros(d_in, d_in);
    for k in ops {
        s = &s + &k.adjoint().matmul(k);
    }
    let eig = crate::linalg::hermitian_eig(&s)?;
    if eig.values[0] <= SUPPORT_TOL * eig.max_abs_value() {
        return Err(crate::Error::NotTracePreserving(f64::INFINITY));
    }
    let inv = psd_inv_sqrt(&s, SUPPORT_TOL)?;
    KrausChannel::new(d_in, d_out, ops.iter().map(|k| k.matmul(&inv)).collect())
}

/// Haar-random unitary via Gram-Schmidt on a Gaussian matrix.
pub fn unitary(rng: &mut impl RngCore, d: usize) -> CMatrix {
    let g = gaussian_matrix(rng, d, d);
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.col(j);
        for q in &cols {
            let p = crate::linalg::inner(q, &v);
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= p * qi;
            }
        }
        let n = crate::linalg::norm(&v);
        for vi in v.iter_mut() {
            *vi /= n;
        }
        cols.push(v);
    }
    CMatrix::from_fn(d, d, |i, j| cols[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_channels_are_valid() {
        let mut r = rng(7, 0);
        for d in 1..=3 {
            for _ in 0..5 {
                let ch = channel(&mut r, d, d + 1);
                assert!(ch.validate().passed);
            }
        }
    }

    #[test]
    fn streams_are_reproducible() {
        let a = gaussian_vector(&mut rng(3, 5), 4);
        let b = gaussian_vector(&mut rng(3, 5), 4);
        let c = gaussian_vector(&mut rng(3, 6), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn unitary_is_unitary() {
        let u = unitary(&mut rng(1, 1), 4);
        assert!(u.adjoint().matmul(&u).max_abs_diff(&CMatrix::identity(4)) < 1e-12);
    }
}
