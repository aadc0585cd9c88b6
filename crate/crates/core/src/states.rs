//! Density and pure states, and the state-level entropic quantities the channel
//! definitions are built from.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{self, hermitian_eig, CMatrix, C64, SUPPORT_TOL};
use crate::math;

/// Support-containment threshold for the Umegaki relative entropy.
pub const CONTAINMENT_TOL: f64 = 1e-9;

/// A quantity in bits that may be `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bits {
    Finite(f64),
    Infinite,
}

impl Bits {
    pub fn is_finite(self) -> bool {
        matches!(self, Bits::Finite(_))
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Bits::Finite(v) => Some(v),
            Bits::Infinite => None,
        }
    }

    /// `f64` view, with `Infinite` mapped to `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            Bits::Finite(v) => v,
            Bits::Infinite => f64::INFINITY,
        }
    }

    pub fn max(self, other: Bits) -> Bits {
        if other.total_cmp(&self) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    /// Total order with `Infinite` above every finite value.
    pub fn total_cmp(&self, other: &Bits) -> Ordering {
        match (self, other) {
            (Bits::Infinite, Bits::Infinite) => Ordering::Equal,
            (Bits::Infinite, _) => Ordering::Greater,
            (_, Bits::Infinite) => Ordering::Less,
            (Bits::Finite(a), Bits::Finite(b)) => a.total_cmp(b),
        }
    }
}

impl PartialOrd for Bits {
    fn partial_cmp(&self, other: &Bits) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bits::Finite(v) => fmt::Display::fmt(v, f),
            Bits::Infinite => f.write_str("inf"),
        }
    }
}

/// Positive unit-trace Hermitian matrix with a tensor factorization of its space.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityState {
    matrix: CMatrix,
    dims: Vec<usize>,
}

impl DensityState {
    /// Validates Hermiticity (1e-10), positivity (1e-10) and unit trace (1e-9).
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        ensure_dim(matrix.rows(), matrix.cols())?;
        ensure_dim(n, matrix.rows())?;
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
            return Err(Error::InvalidState(format!("trace {} differs from 1", tr.re)));
        }
        let eig = hermitian_eig(&matrix)?;
        let min = eig.values.first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::NotPsd(min));
        }
        Ok(Self { matrix: matrix.hermitian_part(), dims })
    }

    /// Single-factor state.
    pub fn from_matrix(matrix: CMatrix) -> Result<Self> {
        let n = matrix.rows();
        Self::new(matrix, vec![n])
    }

    /// For values known to be valid states up to rounding (channel outputs).
    pub(crate) fn from_parts(matrix: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), matrix.rows());
        Self { matrix: matrix.hermitian_part(), dims }
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::from_matrix(CMatrix::from_real_diag(probs))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self::from_parts(CMatrix::identity(d).scale_real(1.0 / d as f64), vec![d])
    }

    pub fn basis(d: usize, i: usize) -> Self {
        PureState::basis(d, i).to_density()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Same matrix with a new factorization of the same total dimension.
    pub fn with_dims(&self, dims: Vec<usize>) -> Result<Self> {
        ensure_dim(self.dim(), dims.iter().product())?;
        Ok(Self { matrix: self.matrix.clone(), dims })
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        let m = self.matrix.partial_trace(&self.dims, keep)?;
        let mut kept: Vec<usize> = keep.to_vec();
        kept.sort_unstable();
        kept.dedup();
        let mut dims: Vec<usize> = kept.iter().map(|&k| self.dims[k]).collect();
        if dims.is_empty() {
            dims.push(1);
        }
        Ok(Self::from_parts(m, dims))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::from_parts(self.matrix.kron(&other.matrix), dims)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eig(&self.matrix).map(|e| e.values).unwrap_or_default()
    }
}

/// Unit vector with a tensor factorization.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
    dims: Vec<usize>,
}

impl PureState {
    /// Requires unit norm within 1e-10.
    pub fn new(amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        ensure_dim(dims.iter().product(), amps.len())?;
        let norm = linalg::norm(&amps);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { amps, dims })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(mut amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        ensure_dim(dims.iter().product(), amps.len())?;
        let norm = linalg::norm(&amps);
        if !(norm > 1e-300) || !norm.is_finite() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok(Self { amps, dims })
    }

    pub(crate) fn from_parts(amps: Vec<C64>, dims: Vec<usize>) -> Self {
        Self { amps, dims }
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::normalized(amps.iter().map(|&a| C64::new(a, 0.0)).collect(), vec![amps.len()])
    }

    pub fn basis(d: usize, i: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); d];
        amps[i] = C64::new(1.0, 0.0);
        Self { amps, dims: vec![d] }
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn to_density(&self) -> DensityState {
        DensityState::from_parts(CMatrix::outer(&self.amps), self.dims.clone())
    }

    pub fn tensor(&self, other: &Self) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { amps: linalg::kron_vec(&self.amps, &other.amps), dims }
    }
}

/// `1/sqrt(d) sum_i |ii>` on factors `(d, d)`.
pub fn maximally_entangled(d: usize) -> PureState {
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    let w = 1.0 / math::sqrt(d as f64);
    for i in 0..d {
        amps[i * d + i] = C64::new(w, 0.0);
    }
    PureState { amps, dims: vec![d, d] }
}

fn spectrum_entropy(values: &[f64]) -> f64 {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let thr = SUPPORT_TOL * max;
    let h: f64 = values
        .iter()
        .filter(|&&v| v > thr && v > 0.0)
        .map(|&v| -v * math::log2(v))
        .sum();
    h.max(0.0)
}

pub(crate) fn entropy_of(m: &CMatrix) -> Result<f64> {
    Ok(spectrum_entropy(&hermitian_eig(m)?.values))
}

pub(crate) fn renyi0_of(m: &CMatrix) -> Result<f64> {
    let rank = hermitian_eig(m)?.rank(SUPPORT_TOL);
    Ok(if rank == 0 { 0.0 } else { math::log2(rank as f64) })
}

pub(crate) fn conditional_entropy_of(m: &CMatrix, dims: &[usize], a_factors: &[usize]) -> Result<f64> {
    if dims.len() < 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: dims.len() });
    }
    let b: Vec<usize> = (0..dims.len()).filter(|k| !a_factors.contains(k)).collect();
    let rho_b = m.partial_trace(dims, &b)?;
    Ok(entropy_of(m)? - entropy_of(&rho_b)?)
}

/// Relative entropy of two matrices of equal size.
pub(crate) fn relative_entropy_of(rho: &CMatrix, sigma: &CMatrix) -> Result<Bits> {
    ensure_dim(rho.rows(), sigma.rows())?;
    let es = hermitian_eig(sigma)?;
    let thr = es.threshold(SUPPORT_TOL);
    let mut leak = 0.0;
    let mut cross = 0.0;
    for (k, &mu) in es.values.iter().enumerate() {
        let w = es.vector(k);
        let p = linalg::expectation(rho, &w);
        if mu > thr && mu > 0.0 {
            cross += p * math::log2(mu);
        } else {
            leak += p;
        }
    }
    if leak > CONTAINMENT_TOL {
        return Ok(Bits::Infinite);
    }
    let v = -entropy_of(rho)? - cross;
    Ok(Bits::Finite(if v < 0.0 && v > -1e-9 { 0.0 } else { v }))
}

/// `-log2 Tr[Pi_rho sigma]` for matrices of equal size.
pub(crate) fn hypothesis_divergence_of(rho: &CMatrix, sigma: &CMatrix) -> Result<Bits> {
    ensure_dim(rho.rows(), sigma.rows())?;
    let er = hermitian_eig(rho)?;
    let thr = er.threshold(SUPPORT_TOL);
    let mut overlap = 0.0;
    for (k, &lambda) in er.values.iter().enumerate() {
        if lambda > thr && lambda > 0.0 {
            overlap += linalg::expectation(sigma, &er.vector(k));
        }
    }
    let overlap = overlap.clamp(0.0, 1.0);
    if overlap <= SUPPORT_TOL {
        return Ok(Bits::Infinite);
    }
    Ok(Bits::Finite((-math::log2(overlap)).max(0.0)))
}

/// `-sum lambda log2 lambda` over the support.
pub fn von_neumann_entropy(rho: &DensityState) -> f64 {
    spectrum_entropy(&rho.eigenvalues())
}

/// `log2 rank(rho)`.
pub fn renyi0_entropy(rho: &DensityState) -> f64 {
    renyi0_of(&rho.matrix).unwrap_or(0.0)
}

/// `-log2 lambda_max`.
pub fn min_entropy(rho: &DensityState) -> f64 {
    let max = rho.eigenvalues().last().copied().unwrap_or(1.0);
    (-math::log2(max)).max(0.0)
}

/// `S(AB) - S(B)`, where `B` is every factor not listed in `a_factors`.
pub fn conditional_entropy(rho: &DensityState, a_factors: &[usize]) -> Result<f64> {
    conditional_entropy_of(&rho.matrix, &rho.dims, a_factors)
}

/// `Tr[rho log2 rho - rho log2 sigma]`, or `Infinite` when
/// `Tr[(I - Pi_sigma) rho] > 1e-9`.
pub fn relative_entropy(rho: &DensityState, sigma: &DensityState) -> Result<Bits> {
    relative_entropy_of(&rho.matrix, &sigma.matrix)
}

/// Hypothesis-testing divergence at zero error, `-log2 Tr[Pi_rho sigma]`.
pub fn hypothesis_divergence_zero(rho: &DensityState, sigma: &DensityState) -> Result<Bits> {
    hypothesis_divergence_of(&rho.matrix, &sigma.matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn diag(p: &[f64]) -> DensityState {
        DensityState::diagonal(p).unwrap()
    }

    #[test]
    fn maximally_entangled_examples() {
        let phi = maximally_entangled(2);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(phi.amplitudes()[0].re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.amplitudes()[3].re, h, epsilon = 1e-15);
        assert_eq!(phi.dims(), &[2, 2]);
        let one = maximally_entangled(1);
        assert_eq!(one.amplitudes(), &[C64::new(1.0, 0.0)]);
        let red = maximally_entangled(3).to_density().partial_trace(&[0]).unwrap();
        assert!(red.matrix().max_abs_diff(&CMatrix::identity(3).scale_real(1.0 / 3.0)) < 1e-15);
    }

    #[test]
    fn entropies() {
        assert_abs_diff_eq!(von_neumann_entropy(&DensityState::basis(2, 0)), 0.0);
        assert_abs_diff_eq!(von_neumann_entropy(&diag(&[0.5, 0.5])), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(von_neumann_entropy(&diag(&[0.25, 0.25, 0.5])), 1.5, epsilon = 1e-14);

        assert_abs_diff_eq!(renyi0_entropy(&DensityState::basis(3, 1)), 0.0);
        assert_abs_diff_eq!(renyi0_entropy(&diag(&[0.25, 0.0, 0.25, 0.5])), libm::log2(3.0), epsilon = 1e-14);
        assert_abs_diff_eq!(renyi0_entropy(&DensityState::maximally_mixed(5)), libm::log2(5.0), epsilon = 1e-14);

        assert_abs_diff_eq!(min_entropy(&diag(&[0.5, 0.5])), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(min_entropy(&DensityState::basis(2, 1)), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(min_entropy(&diag(&[0.75, 0.25])), -libm::log2(0.75), epsilon = 1e-14);
    }

    #[test]
    fn conditional_entropy_examples() {
        let phi = maximally_entangled(2).to_density();
        assert_abs_diff_eq!(conditional_entropy(&phi, &[0]).unwrap(), -1.0, epsilon = 1e-12);

        let a = diag(&[0.3, 0.7]);
        let b = diag(&[0.5, 0.25, 0.25]);
        let ab = a.tensor(&b);
        assert_abs_diff_eq!(conditional_entropy(&ab, &[0]).unwrap(), von_neumann_entropy(&a), epsilon = 1e-12);

        let cc = diag(&[0.5, 0.0, 0.0, 0.5]).with_dims(vec![2, 2]).unwrap();
        assert_abs_diff_eq!(conditional_entropy(&cc, &[0]).unwrap(), 0.0, epsilon = 1e-12);

        assert!(conditional_entropy(&a, &[0]).is_err());
    }

    #[test]
    fn relative_entropy_examples() {
        let rho = diag(&[0.2, 0.3, 0.5]);
        assert_eq!(relative_entropy(&rho, &rho).unwrap(), Bits::Finite(0.0));
        let s = relative_entropy(&rho, &DensityState::maximally_mixed(3)).unwrap().to_f64();
        assert_abs_diff_eq!(s, libm::log2(3.0) - von_neumann_entropy(&rho), epsilon = 1e-12);
        assert_eq!(
            relative_entropy(&DensityState::basis(2, 0), &DensityState::basis(2, 1)).unwrap(),
            Bits::Infinite
        );
        assert!(relative_entropy(&rho, &DensityState::maximally_mixed(2)).is_err());
    }

    #[test]
    fn hypothesis_divergence_examples() {
        let rho = diag(&[0.25, 0.0, 0.25, 0.5]);
        let d = hypothesis_divergence_zero(&rho, &DensityState::maximally_mixed(4)).unwrap().to_f64();
        assert_abs_diff_eq!(d, 2.0 - renyi0_entropy(&rho), epsilon = 1e-12);
        let full = diag(&[0.1, 0.9]);
        assert_abs_diff_eq!(hypothesis_divergence_zero(&full, &full).unwrap().to_f64(), 0.0, epsilon = 1e-12);
        let d = hypothesis_divergence_zero(&DensityState::basis(2, 1), &DensityState::maximally_mixed(2)).unwrap();
        assert_abs_diff_eq!(d.to_f64(), 1.0, epsilon = 1e-12);
        let d = hypothesis_divergence_zero(&DensityState::basis(2, 1), &DensityState::basis(2, 0)).unwrap();
        assert_eq!(d, Bits::Infinite);
    }

    #[test]
    fn state_validation() {
        assert!(DensityState::diagonal(&[0.5, 0.6]).is_err());
        assert!(matches!(DensityState::diagonal(&[1.5, -0.5]), Err(Error::NotPsd(_))));
        assert!(PureState::new(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)], vec![2]).is_err());
    }

    #[test]
    fn bits_order() {
        assert!(Bits::Infinite > Bits::Finite(1e300));
        assert!(Bits::Finite(1.0) > Bits::Finite(0.5));
        assert_eq!(Bits::Finite(1.0).max(Bits::Infinite), Bits::Infinite);
    }
}
