//! Quantum channels in Kraus and Choi form.
//!
//! A [`KrausChannel`] maps an input system `A'` (dimension `dim_in`) to an
//! output system `A` (dimension `dim_out`). Bipartite states fed to
//! [`KrausChannel::apply_extended`] carry the channel input as their first
//! factor; the output keeps the ancilla factors after the channel output.
//!
//! Choi states are normalized to unit trace, `J = (N (x) I)(Phi+)`, with factor
//! order `(out, in)`: entry `(a*d_in + i, b*d_in + j)` is `<a|N(|i><j|)|b> / d_in`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{hermitian_eig, CMatrix, C64};
use crate::math;
use crate::states::{maximally_entangled, DensityState, PureState};

/// Trace-preservation tolerance on `max |sum K^dag K - I|`.
pub const TP_TOL: f64 = 1e-9;

/// Eigenvalue cut-off when extracting Kraus operators from a Choi matrix.
pub const KRAUS_CUTOFF: f64 = 1e-12;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Outcome of [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus_count: usize,
    /// One entry per Kraus operator whose shape is not `dim_out x dim_in`.
    pub shape_errors: Vec<String>,
    /// `max |I - sum K^dag K|` entrywise; `inf` when shapes are wrong.
    pub residual: f64,
    /// `I - sum K^dag K`, present when every shape is right.
    pub residual_matrix: Option<CMatrix>,
    pub passed: bool,
}

/// Checks shapes and trace preservation of a Kraus set.
pub fn validate(dim_in: usize, dim_out: usize, kraus: &[CMatrix]) -> ValidationReport {
    let shape_errors: Vec<String> = kraus
        .iter()
        .enumerate()
        .filter(|(_, k)| k.rows() != dim_out || k.cols() != dim_in)
        .map(|(idx, k)| format!("operator {idx} is {}x{}, expected {dim_out}x{dim_in}", k.rows(), k.cols()))
        .collect();
    if !shape_errors.is_empty() || dim_in == 0 || dim_out == 0 {
        return ValidationReport {
            dim_in,
            dim_out,
            kraus_count: kraus.len(),
            shape_errors,
            residual: f64::INFINITY,
            residual_matrix: None,
            passed: false,
        };
    }
    let mut sum = CMatrix::zeros(dim_in, dim_in);
    for k in kraus {
        sum = &sum + &k.adjoint().matmul(k);
    }
    let resid = &CMatrix::identity(dim_in) - &sum;
    let residual = resid.data().iter().fold(0.0f64, |m, z| m.max(z.norm()));
    ValidationReport {
        dim_in,
        dim_out,
        kraus_count: kraus.len(),
        shape_errors,
        residual,
        residual_matrix: Some(resid),
        passed: residual <= TP_TOL,
    }
}

/// CPTP map `rho -> sum_k K_k rho K_k^dag`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        let report = validate(dim_in, dim_out, &kraus);
        if !report.shape_errors.is_empty() || dim_in == 0 || dim_out == 0 {
            let bad = kraus.iter().find(|k| k.rows() != dim_out || k.cols() != dim_in);
            return Err(Error::DimensionMismatch {
                expected: dim_out * dim_in,
                got: bad.map_or(0, |k| k.rows() * k.cols()),
            });
        }
        if !report.passed {
            return Err(Error::NotTracePreserving(report.residual));
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    fn from_parts(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix>) -> Self {
        Self { dim_in, dim_out, kraus }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self.dim_in, self.dim_out, &self.kraus)
    }

    pub fn apply_matrix(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out = &out + &k.matmul(rho).matmul(&k.adjoint());
        }
        out
    }

    pub fn apply(&self, rho: &DensityState) -> Result<DensityState> {
        ensure_dim(self.dim_in, rho.dim())?;
        Ok(DensityState::from_parts(self.apply_matrix(rho.matrix()), vec![self.dim_out]))
    }

    /// `(N (x) I)(rho)` with the channel acting on the first factor of `rho`.
    pub fn apply_extended(&self, rho: &DensityState) -> Result<DensityState> {
        ensure_dim(self.dim_in, rho.dims()[0])?;
        let e = rho.dim() / self.dim_in;
        let out = self.apply_matrix_extended(rho.matrix(), e);
        let mut dims = vec![self.dim_out];
        dims.extend_from_slice(&rho.dims()[1..]);
        Ok(DensityState::from_parts(out, dims))
    }

    /// Applies the channel to factor `factor` of `rho`, leaving the others.
    pub fn apply_to_factor(&self, rho: &DensityState, factor: usize) -> Result<DensityState> {
        let dims = rho.dims();
        if factor >= dims.len() {
            return Err(Error::DimensionMismatch { expected: dims.len(), got: factor });
        }
        let mut perm: Vec<usize> = vec![factor];
        perm.extend((0..dims.len()).filter(|&k| k != factor));
        let front = rho.matrix().permute_subsystems(dims, &perm)?;
        let front_dims: Vec<usize> = perm.iter().map(|&k| dims[k]).collect();
        let mapped = self.apply_extended(&DensityState::from_parts(front, front_dims))?;
        let mut inverse = vec![0usize; perm.len()];
        for (pos, &k) in perm.iter().enumerate() {
            inverse[k] = pos;
        }
        let out = mapped.matrix().permute_subsystems(mapped.dims(), &inverse)?;
        let mut out_dims = dims.to_vec();
        out_dims[factor] = self.dim_out;
        Ok(DensityState::from_parts(out, out_dims))
    }

    /// `(N (x) I_e)(rho)` on a raw matrix of size `dim_in * e`.
    pub fn apply_matrix_extended(&self, rho: &CMatrix, e: usize) -> CMatrix {
        if e == 1 {
            return self.apply_matrix(rho);
        }
        let id = CMatrix::identity(e);
        let mut out = CMatrix::zeros(self.dim_out * e, self.dim_out * e);
        for k in &self.kraus {
            let ke = k.kron(&id);
            out = &out + &ke.matmul(rho).matmul(&ke.adjoint());
        }
        out
    }

    /// `(N (x) I_e)(|psi><psi|)` for a vector of length `dim_in * e`.
    pub fn apply_pure_extended(&self, psi: &[C64], e: usize) -> CMatrix {
        debug_assert_eq!(psi.len(), self.dim_in * e);
        let n = self.dim_out * e;
        let mut out = CMatrix::zeros(n, n);
        let mut phi = vec![ZERO; n];
        for k in &self.kraus {
            for a in 0..self.dim_out {
                for x in 0..e {
                    let mut acc = ZERO;
                    for i in 0..self.dim_in {
                        acc += k[(a, i)] * psi[i * e + x];
                    }
                    phi[a * e + x] = acc;
                }
            }
            for r in 0..n {
                if phi[r] == ZERO {
                    continue;
                }
                for c in 0..n {
                    out[(r, c)] += phi[r] * phi[c].conj();
                }
            }
        }
        out
    }

    pub fn choi_matrix(&self) -> CMatrix {
        let phi = maximally_entangled(self.dim_in);
        self.apply_pure_extended(phi.amplitudes(), self.dim_in)
    }

    pub fn to_choi(&self) -> ChoiMatrix {
        ChoiMatrix { matrix: self.choi_matrix(), dim_in: self.dim_in, dim_out: self.dim_out }
    }

    pub fn from_choi(choi: &ChoiMatrix) -> Result<Self> {
        let (din, dout) = (choi.dim_in, choi.dim_out);
        let eig = hermitian_eig(&choi.matrix).map_err(|e| Error::InvalidChoi(format!("{e}")))?;
        let mut kraus = Vec::new();
        for k in (0..eig.dim()).rev() {
            let lambda = eig.values[k];
            if lambda <= KRAUS_CUTOFF {
                continue;
            }
            let scale = math::sqrt(lambda * din as f64);
            let v = eig.vector(k);
            kraus.push(CMatrix::from_fn(dout, din, |a, i| v[a * din + i] * scale));
        }
        let report = validate(din, dout, &kraus);
        if !report.passed {
            return Err(Error::InvalidChoi(format!(
                "extracted Kraus set is not trace preserving (residual {:e})",
                report.residual
            )));
        }
        Ok(Self::from_parts(din, dout, kraus))
    }

    /// Same channel with at most `dim_in * dim_out` Kraus operators.
    pub fn reduce_rank(&self) -> Self {
        if self.kraus.len() <= self.dim_in * self.dim_out || self.dim_in * self.dim_out > crate::linalg::MAX_DIM {
            return self.clone();
        }
        Self::from_choi(&self.to_choi()).unwrap_or_else(|_| self.clone())
    }

    /// `self` after `first`.
    pub fn after(&self, first: &KrausChannel) -> Result<Self> {
        compose(self, first)
    }

    pub fn tensor(&self, other: &KrausChannel) -> Self {
        tensor(self, other)
    }

    pub fn identity(d: usize) -> Self {
        Self::from_parts(d, d, vec![CMatrix::identity(d)])
    }

    /// `rho -> Tr[rho] I / d_out`.
    pub fn depolarizing(d_in: usize, d_out: usize) -> Self {
        let w = C64::new(1.0 / math::sqrt(d_out as f64), 0.0);
        let mut kraus = Vec::with_capacity(d_in * d_out);
        for a in 0..d_out {
            for i in 0..d_in {
                let mut k = CMatrix::zeros(d_out, d_in);
                k[(a, i)] = w;
                kraus.push(k);
            }
        }
        Self::from_parts(d_in, d_out, kraus)
    }

    /// Completely dephasing channel in the computational basis.
    pub fn dephasing(d: usize) -> Self {
        let kraus = (0..d)
            .map(|i| {
                let mut k = CMatrix::zeros(d, d);
                k[(i, i)] = ONE;
                k
            })
            .collect();
        Self::from_parts(d, d, kraus)
    }

    /// Completely dephasing channel in an orthonormal basis.
    pub fn dephasing_in_basis(basis: &[PureState]) -> Result<Self> {
        let d = basis.len();
        let mut kraus = Vec::with_capacity(d);
        for b in basis {
            ensure_dim(d, b.dim())?;
            kraus.push(CMatrix::outer(b.amplitudes()));
        }
        Self::new(d, d, kraus)
    }

    /// `rho -> Tr[rho] target`.
    pub fn replacement(d_in: usize, target: &DensityState) -> Self {
        let d_out = target.dim();
        let eig = hermitian_eig(target.matrix()).expect("density states are Hermitian");
        let mut kraus = Vec::new();
        for k in (0..eig.dim()).rev() {
            let lambda = eig.values[k];
            if lambda <= KRAUS_CUTOFF {
                continue;
            }
            let w = eig.vector(k);
            let s = math::sqrt(lambda);
            for i in 0..d_in {
                let mut op = CMatrix::zeros(d_out, d_in);
                for a in 0..d_out {
                    op[(a, i)] = w[a] * s;
                }
                kraus.push(op);
            }
        }
        Self::from_parts(d_in, d_out, kraus)
    }

    /// Channel with trivial input preparing `target`.
    pub fn state_preparation(target: &DensityState) -> Self {
        Self::replacement(1, target)
    }

    /// `rho -> sum_k Tr[M_k rho] tau_k`.
    pub fn measurement_channel(m: &Measurement) -> Self {
        let (d_in, d_out) = (m.dim_in(), m.dim_out());
        let mut kraus = Vec::new();
        for (povm, out) in m.povm.iter().zip(&m.outputs) {
            let ep = hermitian_eig(povm).expect("validated POVM");
            let eo = hermitian_eig(out.matrix()).expect("validated state");
            for p in (0..ep.dim()).rev() {
                if ep.values[p] <= KRAUS_CUTOFF {
                    continue;
                }
                let u = ep.vector(p);
                for o in (0..eo.dim()).rev() {
                    if eo.values[o] <= KRAUS_CUTOFF {
                        continue;
                    }
                    let w = eo.vector(o);
                    let s = math::sqrt(ep.values[p] * eo.values[o]);
                    kraus.push(CMatrix::outer2(&w, &u).scale_real(s));
                }
            }
        }
        Self::from_parts(d_in, d_out, kraus)
    }

    /// `rho -> V rho V^dag`; requires `V^dag V = I` within 1e-9.
    pub fn isometry(v: CMatrix) -> Result<Self> {
        let gram = v.adjoint().matmul(&v);
        let resid = gram.max_abs_diff(&CMatrix::identity(v.cols()));
        if resid > TP_TOL {
            return Err(Error::NotIsometry(resid));
        }
        Ok(Self::from_parts(v.cols(), v.rows(), vec![v]))
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotIsometry(f64::INFINITY));
        }
        Self::isometry(u)
    }

    /// Exchange of two factors, `|x>|y> -> |y>|x>` on `d1 (x) d2`.
    pub fn swap(d1: usize, d2: usize) -> Self {
        let n = d1 * d2;
        let mut u = CMatrix::zeros(n, n);
        for x in 0..d1 {
            for y in 0..d2 {
                u[(y * d1 + x, x * d2 + y)] = ONE;
            }
        }
        Self::from_parts(n, n, vec![u])
    }

    /// Qubit channel sending `|0>` to `|1>` with probability `gamma` and
    /// fixing `|1>`. At `gamma = 1/2` this is the example `N0`.
    pub fn decay_to_one(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidState(format!("decay probability {gamma} outside [0, 1]")));
        }
        let (keep, jump) = (math::sqrt(1.0 - gamma), math::sqrt(gamma));
        Ok(Self::from_parts(
            2,
            2,
            vec![
                CMatrix::from_real_rows(&[&[keep, 0.0], &[0.0, 0.0]]),
                CMatrix::from_real_rows(&[&[0.0, 0.0], &[jump, 0.0]]),
                CMatrix::from_real_rows(&[&[0.0, 0.0], &[0.0, 1.0]]),
            ],
        ))
    }
}

/// `f` after `g`: Kraus set `{F_i G_j}`.
pub fn compose(f: &KrausChannel, g: &KrausChannel) -> Result<KrausChannel> {
    ensure_dim(f.dim_in, g.dim_out)?;
    let mut kraus = Vec::with_capacity(f.kraus.len() * g.kraus.len());
    for fi in &f.kraus {
        for gj in &g.kraus {
            kraus.push(fi.matmul(gj));
        }
    }
    Ok(KrausChannel::from_parts(g.dim_in, f.dim_out, kraus).reduce_rank())
}

/// `f (x) g`: Kraus set `{F_i (x) G_j}`.
pub fn tensor(f: &KrausChannel, g: &KrausChannel) -> KrausChannel {
    let mut kraus = Vec::with_capacity(f.kraus.len() * g.kraus.len());
    for fi in &f.kraus {
        for gj in &g.kraus {
            kraus.push(fi.kron(gj));
        }
    }
    KrausChannel::from_parts(f.dim_in * g.dim_in, f.dim_out * g.dim_out, kraus).reduce_rank()
}

/// Convex combination `sum_k p_k N_k`.
pub fn mixture(parts: &[(f64, &KrausChannel)]) -> Result<KrausChannel> {
    let first = parts
        .first()
        .ok_or_else(|| Error::InvalidState("empty mixture".into()))?
        .1;
    let mut total = 0.0;
    let mut kraus = Vec::new();
    for &(p, ch) in parts {
        ensure_dim(first.dim_in, ch.dim_in)?;
        ensure_dim(first.dim_out, ch.dim_out)?;
        if !(p >= 0.0) {
            return Err(Error::InvalidState(format!("negative mixture weight {p}")));
        }
        total += p;
        if p == 0.0 {
            continue;
        }
        let s = math::sqrt(p);
        kraus.extend(ch.kraus.iter().map(|k| k.scale_real(s)));
    }
    if (total - 1.0).abs() > TP_TOL {
        return Err(Error::InvalidState(format!("mixture weights sum to {total}")));
    }
    KrausChannel::new(first.dim_in, first.dim_out, kraus).map(|c| c.reduce_rank())
}

/// Frobenius distance between Choi states.
pub fn channel_distance(a: &KrausChannel, b: &KrausChannel) -> Result<f64> {
    ensure_dim(a.dim_in, b.dim_in)?;
    ensure_dim(a.dim_out, b.dim_out)?;
    Ok((&a.choi_matrix() - &b.choi_matrix()).frobenius_norm())
}

/// Unit-trace Choi state on factors `(dim_out, dim_in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    matrix: CMatrix,
    dim_in: usize,
    dim_out: usize,
}

impl ChoiMatrix {
    /// Checks positivity (1e-10) and the input marginal `I / dim_in` (1e-9).
    pub fn new(matrix: CMatrix, dim_in: usize, dim_out: usize) -> Result<Self> {
        let n = dim_in * dim_out;
        if matrix.rows() != n || matrix.cols() != n {
            return Err(Error::InvalidChoi(format!(
                "matrix is {}x{}, expected {n}x{n}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let eig = hermitian_eig(&matrix).map_err(|e| Error::InvalidChoi(format!("{e}")))?;
        if let Some(&min) = eig.values.first() {
            if min < -1e-10 {
                return Err(Error::InvalidChoi(format!("negative eigenvalue {min:e}")));
            }
        }
        let marginal = matrix.partial_trace(&[dim_out, dim_in], &[1])?;
        let target = CMatrix::identity(dim_in).scale_real(1.0 / dim_in as f64);
        let resid = marginal.max_abs_diff(&target);
        if resid > TP_TOL {
            return Err(Error::InvalidChoi(format!("input marginal deviates from I/d by {resid:e}")));
        }
        Ok(Self { matrix: matrix.hermitian_part(), dim_in, dim_out })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn to_state(&self) -> DensityState {
        DensityState::from_parts(self.matrix.clone(), vec![self.dim_out, self.dim_in])
    }
}

/// Channel transformation `N -> post o (N (x) I_E) o pre`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superchannel {
    pub pre: KrausChannel,
    pub ancilla_dim: usize,
    pub post: KrausChannel,
}

impl Superchannel {
    pub fn new(pre: KrausChannel, ancilla_dim: usize, post: KrausChannel) -> Result<Self> {
        if ancilla_dim == 0 || !pre.dim_out.is_multiple_of(ancilla_dim) {
            return Err(Error::DimensionMismatch { expected: ancilla_dim, got: pre.dim_out });
        }
        if !post.dim_in.is_multiple_of(ancilla_dim) {
            return Err(Error::DimensionMismatch { expected: ancilla_dim, got: post.dim_in });
        }
        Ok(Self { pre, ancilla_dim, post })
    }

    /// Pre- and post-processing only.
    pub fn sandwich(pre: KrausChannel, post: KrausChannel) -> Self {
        Self { pre, ancilla_dim: 1, post }
    }

    pub fn apply(&self, n: &KrausChannel) -> Result<KrausChannel> {
        ensure_dim(self.pre.dim_out, n.dim_in * self.ancilla_dim)?;
        ensure_dim(self.post.dim_in, n.dim_out * self.ancilla_dim)?;
        let middle = tensor(n, &KrausChannel::identity(self.ancilla_dim));
        compose(&self.post, &compose(&middle, &self.pre)?)
    }
}

pub fn apply_superchannel(phi: &Superchannel, n: &KrausChannel) -> Result<KrausChannel> {
    phi.apply(n)
}

/// POVM with one output state per element.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    povm: Vec<CMatrix>,
    outputs: Vec<DensityState>,
}

impl Measurement {
    pub fn new(povm: Vec<CMatrix>, outputs: Vec<DensityState>) -> Result<Self> {
        if povm.is_empty() || povm.len() != outputs.len() {
            return Err(Error::InvalidMeasurement(format!(
                "{} POVM elements but {} output states",
                povm.len(),
                outputs.len()
            )));
        }
        let d = povm[0].rows();
        let d_out = outputs[0].dim();
        let mut sum = CMatrix::zeros(d, d);
        for (idx, m) in povm.iter().enumerate() {
            if m.rows() != d || m.cols() != d {
                return Err(Error::InvalidMeasurement(format!("element {idx} has the wrong shape")));
            }
            let eig = hermitian_eig(m).map_err(|e| Error::InvalidMeasurement(format!("element {idx}: {e}")))?;
            if eig.values[0] < -1e-10 {
                return Err(Error::InvalidMeasurement(format!(
                    "element {idx} has negative eigenvalue {:e}",
                    eig.values[0]
                )));
            }
            sum = &sum + m;
        }
        if outputs.iter().any(|o| o.dim() != d_out) {
            return Err(Error::InvalidMeasurement("output states differ in dimension".into()));
        }
        let resid = sum.max_abs_diff(&CMatrix::identity(d));
        if resid > TP_TOL {
            return Err(Error::InvalidMeasurement(format!("elements sum to identity only within {resid:e}")));
        }
        Ok(Self { povm, outputs })
    }

    /// Projective measurement onto an orthonormal basis, outputting `outputs[k]`
    /// on outcome `k`.
    pub fn projective(basis: &[PureState], outputs: Vec<DensityState>) -> Result<Self> {
        Self::new(basis.iter().map(|b| CMatrix::outer(b.amplitudes())).collect(), outputs)
    }

    pub fn povm(&self) -> &[CMatrix] {
        &self.povm
    }

    pub fn outputs(&self) -> &[DensityState] {
        &self.outputs
    }

    pub fn dim_in(&self) -> usize {
        self.povm[0].rows()
    }

    pub fn dim_out(&self) -> usize {
        self.outputs[0].dim()
    }
}

/// Which half of a bipartite channel a subchannel keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keep {
    A,
    C,
}

/// Subchannel of a bipartite channel `A'C' -> AC`: freezes the other input to
/// `frozen` and traces out the other output.
///
/// `dims_in = [d_A', d_C']`, `dims_out = [d_A, d_C]`.
pub fn subchannel(
    n: &KrausChannel,
    dims_in: [usize; 2],
    dims_out: [usize; 2],
    keep: Keep,
    frozen: &DensityState,
) -> Result<KrausChannel> {
    ensure_dim(n.dim_in, dims_in[0] * dims_in[1])?;
    ensure_dim(n.dim_out, dims_out[0] * dims_out[1])?;
    let [ai, ci] = dims_in;
    let [ao, co] = dims_out;
    let (frozen_dim, kept_in, kept_out, traced_out) = match keep {
        Keep::A => (ci, ai, ao, co),
        Keep::C => (ai, ci, co, ao),
    };
    ensure_dim(frozen_dim, frozen.dim())?;

    let eig = hermitian_eig(frozen.matrix())?;
    let mut kraus = Vec::new();
    for m in (0..eig.dim()).rev() {
        let p = eig.values[m];
        if p <= KRAUS_CUTOFF {
            continue;
        }
        let phi = eig.vector(m);
        let s = math::sqrt(p);
        for k in &n.kraus {
            for t in 0..traced_out {
                let op = CMatrix::from_fn(kept_out, kept_in, |x, y| {
                    let mut acc = ZERO;
                    for (z, &amp) in phi.iter().enumerate() {
                        let (row, col) = match keep {
                            Keep::A => (x * co + t, y * ci + z),
                            Keep::C => (t * co + x, z * ci + y),
                        };
                        acc += k[(row, col)] * amp;
                    }
                    acc * s
                });
                kraus.push(op);
            }
        }
    }
    KrausChannel::new(kept_in, kept_out, kraus).map(|c| c.reduce_rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    pub(crate) fn n0() -> KrausChannel {
        KrausChannel::decay_to_one(0.5).unwrap()
    }

    fn plus() -> PureState {
        PureState::from_real(&[1.0, 1.0]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(n0().validate().passed);
        assert!(validate(2, 2, &[CMatrix::identity(2)]).passed);
        let r = validate(2, 2, &[CMatrix::from_real_diag(&[1.0, 0.0])]);
        assert!(!r.passed);
        assert!(r.residual_matrix.unwrap().max_abs_diff(&CMatrix::from_real_diag(&[0.0, 1.0])) < 1e-15);
        assert!(!validate(2, 2, &[CMatrix::identity(3)]).passed);
    }

    #[test]
    fn apply_examples() {
        let one = DensityState::basis(2, 1);
        assert!(n0().apply(&one).unwrap().matrix().max_abs_diff(one.matrix()) < 1e-15);
        let rho = plus().to_density();
        assert!(KrausChannel::identity(2).apply(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-15);
        let out = KrausChannel::depolarizing(2, 3).apply(&rho).unwrap();
        assert!(out.matrix().max_abs_diff(&CMatrix::identity(3).scale_real(1.0 / 3.0)) < 1e-15);
    }

    #[test]
    fn apply_extended_examples() {
        let phi = maximally_entangled(2).to_density();
        let out = n0().apply_extended(&phi).unwrap();
        assert!(out.matrix().max_abs_diff(&CMatrix::from_real_diag(&[0.25, 0.0, 0.25, 0.5])) < 1e-15);
        assert_eq!(out.dims(), &[2, 2]);
        let id = KrausChannel::identity(2).apply_extended(&phi).unwrap();
        assert!(id.matrix().max_abs_diff(phi.matrix()) < 1e-15);
        let d = KrausChannel::depolarizing(2, 2).apply_extended(&phi).unwrap();
        assert!(d.matrix().max_abs_diff(&CMatrix::identity(4).scale_real(0.25)) < 1e-15);
    }

    #[test]
    fn apply_to_second_factor() {
        let rho = DensityState::basis(2, 0).tensor(&plus().to_density());
        let out = KrausChannel::dephasing(2).apply_to_factor(&rho, 1).unwrap();
        let expect = DensityState::basis(2, 0).tensor(&DensityState::maximally_mixed(2));
        assert!(out.matrix().max_abs_diff(expect.matrix()) < 1e-15);
    }

    #[test]
    fn choi_examples() {
        assert!(n0().choi_matrix().max_abs_diff(&CMatrix::from_real_diag(&[0.25, 0.0, 0.25, 0.5])) < 1e-15);
        let phi = maximally_entangled(2).to_density();
        assert!(KrausChannel::identity(2).choi_matrix().max_abs_diff(phi.matrix()) < 1e-15);
        let d = KrausChannel::depolarizing(2, 2).choi_matrix();
        assert!(d.max_abs_diff(&CMatrix::identity(4).scale_real(0.25)) < 1e-15);
    }

    #[test]
    fn from_choi_round_trips() {
        let choi = ChoiMatrix::new(CMatrix::identity(4).scale_real(0.25), 2, 2).unwrap();
        let ch = KrausChannel::from_choi(&choi).unwrap();
        for i in 0..2 {
            let out = ch.apply(&DensityState::basis(2, i)).unwrap();
            assert!(out.matrix().max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-12);
        }
        let id = KrausChannel::from_choi(&KrausChannel::identity(2).to_choi()).unwrap();
        assert_eq!(id.kraus().len(), 1);
        assert!(channel_distance(&id, &KrausChannel::identity(2)).unwrap() < 1e-12);
        let back = KrausChannel::from_choi(&n0().to_choi()).unwrap();
        assert!(channel_distance(&back, &n0()).unwrap() < 1e-12);
        assert!(ChoiMatrix::new(CMatrix::from_real_diag(&[0.5, 0.0, 0.5, 0.0]), 2, 2).is_err());
    }

    #[test]
    fn compose_and_tensor() {
        let id = KrausChannel::identity(2);
        assert!(channel_distance(&compose(&id, &n0()).unwrap(), &n0()).unwrap() < 1e-12);
        assert!(channel_distance(&compose(&n0(), &id).unwrap(), &n0()).unwrap() < 1e-12);
        let dd = compose(&KrausChannel::dephasing(3), &KrausChannel::dephasing(3)).unwrap();
        assert!(channel_distance(&dd, &KrausChannel::dephasing(3)).unwrap() < 1e-10);
        assert!(compose(&KrausChannel::identity(3), &id).is_err());

        let ii = tensor(&id, &id);
        assert!(channel_distance(&ii, &KrausChannel::identity(4)).unwrap() < 1e-12);
        let dd = tensor(&KrausChannel::depolarizing(2, 2), &KrausChannel::depolarizing(2, 2));
        assert!(channel_distance(&dd, &KrausChannel::depolarizing(4, 4)).unwrap() < 1e-12);
    }

    #[test]
    fn tensor_choi_is_permuted_product() {
        let t = tensor(&n0(), &KrausChannel::identity(2));
        let lhs = t.choi_matrix();
        // factors of Choi(N0) (x) Choi(I): (out0, in0, out1, in1) -> (out0, out1, in0, in1)
        let prod = n0().choi_matrix().kron(&KrausChannel::identity(2).choi_matrix());
        let rhs = prod.permute_subsystems(&[2, 2, 2, 2], &[0, 2, 1, 3]).unwrap();
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn superchannel_examples() {
        let id = KrausChannel::identity(2);
        let trivial = Superchannel::new(id.clone(), 1, id.clone()).unwrap();
        assert!(channel_distance(&trivial.apply(&n0()).unwrap(), &n0()).unwrap() < 1e-12);

        let pre = KrausChannel::dephasing(2);
        let post = KrausChannel::depolarizing(2, 3);
        let s = Superchannel::sandwich(pre.clone(), post.clone());
        let direct = compose(&post, &compose(&n0(), &pre).unwrap()).unwrap();
        assert!(channel_distance(&s.apply(&n0()).unwrap(), &direct).unwrap() < 1e-12);

        let phi = maximally_entangled(2).to_density();
        let prep = KrausChannel::state_preparation(&phi);
        let s = Superchannel::new(prep, 2, KrausChannel::identity(4)).unwrap();
        let out = s.apply(&n0()).unwrap();
        assert!(out.validate().passed);
        assert_eq!((out.dim_in(), out.dim_out()), (1, 4));
        assert!(out.choi_matrix().max_abs_diff(&n0().choi_matrix()) < 1e-12);
    }

    #[test]
    fn constructors() {
        let d = KrausChannel::depolarizing(2, 2).apply(&DensityState::basis(2, 0)).unwrap();
        assert!(d.matrix().max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);
        let p = KrausChannel::dephasing(2).apply(&plus().to_density()).unwrap();
        assert!(p.matrix().max_abs_diff(&CMatrix::identity(2).scale_real(0.5)) < 1e-15);
        let one = DensityState::basis(2, 1);
        let r = KrausChannel::replacement(2, &one).apply(&plus().to_density()).unwrap();
        assert!(r.matrix().max_abs_diff(one.matrix()) < 1e-15);
        assert!(matches!(
            KrausChannel::isometry(CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.5]])),
            Err(Error::NotIsometry(_))
        ));
        let v = CMatrix::from_real_rows(&[&[1.0], &[0.0], &[0.0]]);
        let iso = KrausChannel::isometry(v).unwrap();
        assert_eq!((iso.dim_in(), iso.dim_out()), (1, 3));
    }

    #[test]
    fn measurement_channel_matches_definition() {
        let minus = PureState::from_real(&[1.0, -1.0]).unwrap();
        let basis = [plus(), minus.clone()];
        let m = Measurement::projective(&basis, vec![DensityState::basis(2, 0), DensityState::basis(2, 1)]).unwrap();
        let ch = KrausChannel::measurement_channel(&m);
        assert!(ch.validate().passed);
        let out = ch.apply(&plus().to_density()).unwrap();
        assert!(out.matrix().max_abs_diff(&CMatrix::from_real_diag(&[1.0, 0.0])) < 1e-12);

        let deph = KrausChannel::dephasing_in_basis(&basis).unwrap();
        let m = Measurement::projective(&basis, vec![plus().to_density(), minus.to_density()]).unwrap();
        assert!(channel_distance(&KrausChannel::measurement_channel(&m), &deph).unwrap() < 1e-12);

        assert!(Measurement::new(vec![CMatrix::from_real_diag(&[1.0, 0.0])], vec![DensityState::basis(2, 0)]).is_err());
    }

    #[test]
    fn subchannel_examples() {
        let ii = tensor(&KrausChannel::identity(2), &KrausChannel::identity(2));
        let rho = DensityState::diagonal(&[0.3, 0.7]).unwrap();
        let s = subchannel(&ii, [2, 2], [2, 2], Keep::A, &rho).unwrap();
        assert!(channel_distance(&s, &KrausChannel::identity(2)).unwrap() < 1e-12);

        let swap = KrausChannel::swap(2, 2);
        let s = subchannel(&swap, [2, 2], [2, 2], Keep::A, &plus().to_density()).unwrap();
        let expect = KrausChannel::replacement(2, &plus().to_density());
        assert!(channel_distance(&s, &expect).unwrap() < 1e-12);

        let di = tensor(&KrausChannel::depolarizing(2, 2), &KrausChannel::identity(2));
        let s = subchannel(&di, [2, 2], [2, 2], Keep::C, &plus().to_density()).unwrap();
        assert!(channel_distance(&s, &KrausChannel::identity(2)).unwrap() < 1e-12);

        assert!(subchannel(&di, [2, 2], [2, 2], Keep::C, &DensityState::maximally_mixed(3)).is_err());
    }

    #[test]
    fn distance_examples() {
        assert_abs_diff_eq!(channel_distance(&n0(), &n0()).unwrap(), 0.0);
        let a = KrausChannel::identity(2);
        let b = KrausChannel::depolarizing(2, 2);
        assert_abs_diff_eq!(channel_distance(&a, &b).unwrap(), libm::sqrt(3.0) / 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(channel_distance(&b, &a).unwrap(), channel_distance(&a, &b).unwrap());
    }

    #[test]
    fn mixture_weights_checked() {
        let a = KrausChannel::identity(2);
        let b = KrausChannel::depolarizing(2, 2);
        let m = mixture(&[(0.5, &a), (0.5, &b)]).unwrap();
        assert!(m.validate().passed);
        assert!(mixture(&[(0.5, &a), (0.4, &b)]).is_err());
    }
}
