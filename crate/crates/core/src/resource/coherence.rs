//! Coherence of channels: `C^x(N) = min_{C in x} S_AB(N || C)` for the
//! detection (`d`), creation (`c`) and detection-creation (`dc`) incoherent
//! free sets.
//!
//! Each free set is searched through a family that is free by construction:
//!
//! * `dc`: classical channels `|i><i| -> sum_a p(a|i) |a><a|`;
//! * `c`: a POVM followed by preparation of `|a><a|`;
//! * `d`: `rho -> sum_i <i|rho|i> tau_i` with arbitrary states `tau_i`;
//!
//! in the channel scope each is mixed with incoherent unitaries (permutations
//! with phases) when input and output dimensions agree.
//!
//! The outer search evaluates candidates with a cheap inner `S_AB` search
//! seeded from a pool of inputs. The winner is re-evaluated with the full
//! budget; if that exposes a better input, the input joins the pool and the
//! outer search resumes from the winner.

use alloc::vec;
use alloc::vec::Vec;

use super::{is_free, BoundKind, CoherenceResult, FreeScope, FreeSetKind};
use crate::channels::{compose, KrausChannel};
use crate::divergence::{channel_divergence, divergence_at_input, DivergenceKind, Family};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, psd_inv_sqrt, psd_sqrt, CMatrix, C64, SUPPORT_TOL};
use crate::math;
use crate::optimizer::{maximize_over_pure_states, minimize_over_parameters_from, OptimizerConfig};
use crate::states::{maximally_entangled, Bits, PureState};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Budgets of the nested search.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceConfig {
    /// Minimization over free-family parameters.
    pub outer: OptimizerConfig,
    /// `S_AB` search inside the outer objective; random restarts default to
    /// zero, starts come from the input pool.
    pub inner: OptimizerConfig,
    /// Re-evaluation of each round's winner.
    pub final_eval: OptimizerConfig,
    /// Maximum number of outer rounds.
    pub rounds: usize,
    pub scope: FreeScope,
}

impl CoherenceConfig {
    /// Defaults for the nested searches around a final-evaluation budget.
    pub fn from_final(cfg: &OptimizerConfig) -> Self {
        Self::with_scope(cfg, FreeScope::Channels)
    }

    pub fn with_scope(cfg: &OptimizerConfig, scope: FreeScope) -> Self {
        Self {
            outer: OptimizerConfig {
                restarts: 0,
                max_iters: 200,
                step_tolerance: 1e-3,
                seed: cfg.seed,
                warm_starts: Vec::new(),
                structured_starts: false,
                initial_step: 0.1,
            },
            inner: OptimizerConfig {
                restarts: 0,
                max_iters: 30,
                step_tolerance: 1e-4,
                seed: cfg.seed,
                warm_starts: Vec::new(),
                structured_starts: false,
                initial_step: 0.1,
            },
            final_eval: cfg.clone(),
            rounds: 3,
            scope,
        }
    }
}

impl Default for CoherenceConfig {
    fn default() -> Self {
        Self::from_final(&OptimizerConfig::default())
    }
}

/// Closed-form coherence of a qubit state's diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementCoherence {
    /// Min-entropy of the diagonal.
    pub c_min: f64,
    /// Shannon entropy of the diagonal.
    pub c_rel: f64,
}

pub fn qubit_measurement_coherence_analytic(basis: &PureState) -> Result<MeasurementCoherence> {
    crate::error::ensure_dim(2, basis.dim())?;
    let p: Vec<f64> = basis.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    let top = p[0].max(p[1]);
    let c_min = if top >= 1.0 { 0.0 } else { -math::log2(top) };
    let c_rel = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * math::log2(x)).sum::<f64>();
    Ok(MeasurementCoherence { c_min, c_rel: c_rel.max(0.0) })
}

/// Projective measurement in the qubit basis `{psi0, psi0_perp}` that keeps
/// the post-measurement state.
pub fn measurement_in_basis(psi0: &PureState) -> Result<KrausChannel> {
    crate::error::ensure_dim(2, psi0.dim())?;
    let a = psi0.amplitudes();
    let perp = PureState::normalized(vec![-a[1].conj(), a[0].conj()], vec![2])?;
    let first = PureState::normalized(a.to_vec(), vec![2])?;
    KrausChannel::dephasing_in_basis(&[first, perp])
}

/// [`coherence_measure_with`] using [`CoherenceConfig::from_final`].
pub fn coherence_measure(kind: FreeSetKind, n: &KrausChannel, cfg: &OptimizerConfig) -> Result<CoherenceResult> {
    coherence_measure_with(kind, n, &CoherenceConfig::from_final(cfg))
}

pub fn coherence_measure_with(kind: FreeSetKind, n: &KrausChannel, cfg: &CoherenceConfig) -> Result<CoherenceResult> {
    if kind == FreeSetKind::SeparableRestricted {
        return Err(Error::UnsupportedDimension("separable channels are not a coherence free set".into()));
    }
    let (din, dout) = (n.dim_in(), n.dim_out());
    if din > 3 || dout > 3 {
        return Err(Error::UnsupportedDimension(alloc::format!(
            "coherence search supports up to 3 -> 3 channels, got {din} -> {dout}"
        )));
    }
    let fam = FreeFamily::new(kind, din, dout, cfg.scope);
    let bounds = fam.bounds();
    let mut warm = fam.warm_starts(n);
    let mut pool = initial_pool(din);

    let mut best: Option<(f64, KrausChannel)> = None;
    for _ in 0..cfg.rounds.max(1) {
        let objective = |x: &[f64]| match fam.build(x) {
            Some(c) => cheap_sab(n, &c, &pool, &cfg.inner),
            None => f64::INFINITY,
        };
        let opt = minimize_over_parameters_from(objective, &bounds, &cfg.outer, &warm, 1e-9);
        let Some(ch) = fam.build(&opt.argmin) else { break };
        let mut fin = cfg.final_eval.clone();
        fin.warm_starts.extend(pool.iter().cloned());
        let full = channel_divergence(DivergenceKind::SAB, n, &ch, &fin)?;
        let v = full.value.to_f64();
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, ch));
        }
        if v <= opt.value + 1e-6 {
            break;
        }
        match full.achieving_input {
            Some(input) => pool.push(input),
            None => break,
        }
        warm.insert(0, opt.argmin);
    }
    let (value, ch) = best.ok_or_else(|| Error::InvalidState("no feasible free channel".into()))?;
    let check = is_free(kind, &ch, 1e-8)?;
    Ok(CoherenceResult {
        kind,
        scope: cfg.scope,
        value,
        achieving_free_channel: ch,
        bound_kind: BoundKind::UpperBoundOfMeasure,
        witness_residual: check.residual,
    })
}

/// `Phi+` and `|i>|0>` on `A'B`.
fn initial_pool(d: usize) -> Vec<PureState> {
    let mut pool = vec![maximally_entangled(d)];
    for i in 0..d {
        pool.push(PureState::basis(d, i).tensor(&PureState::basis(d, 0)));
    }
    pool
}

/// Lower estimate of `S_AB(n || c)`: the best pool inputs refined by a short
/// local search.
pub(crate) fn cheap_sab(n: &KrausChannel, c: &KrausChannel, pool: &[PureState], inner: &OptimizerConfig) -> f64 {
    let eval = |x: &[C64]| divergence_at_input(Family::Umegaki, n, c, x).unwrap_or(Bits::Finite(f64::NEG_INFINITY));
    let mut scored: Vec<(Bits, usize)> = Vec::with_capacity(pool.len());
    for (i, p) in pool.iter().enumerate() {
        let v = eval(p.amplitudes());
        if v == Bits::Infinite {
            return f64::INFINITY;
        }
        scored.push((v, i));
    }
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let dim = n.dim_in() * n.dim_in();
    let mut cfg = inner.clone();
    cfg.warm_starts = scored.iter().take(2).map(|&(_, i)| pool[i].clone()).collect();
    let r = maximize_over_pure_states(eval, dim, &cfg);
    let top = scored.first().map_or(Bits::Finite(f64::NEG_INFINITY), |s| s.0);
    r.value.max(top).to_f64()
}

/// Transition matrix `p[i][a] = <a|ch(|i><i|)|a>`.
fn classical_part(ch: &KrausChannel) -> Vec<Vec<f64>> {
    (0..ch.dim_in())
        .map(|i| {
            let out = ch.apply_matrix(&basis_projector(ch.dim_in(), i));
            (0..ch.dim_out()).map(|a| out[(a, a)].re.max(0.0)).collect()
        })
        .collect()
}

fn basis_projector(d: usize, i: usize) -> CMatrix {
    let mut m = CMatrix::zeros(d, d);
    m[(i, i)] = C64::new(1.0, 0.0);
    m
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, d: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == d {
            out.push(prefix.clone());
            return;
        }
        for x in 0..d {
            if !prefix.contains(&x) {
                prefix.push(x);
                rec(prefix, d, out);
                prefix.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), d, &mut out);
    out
}

/// Parameterized free channels of one kind.
///
/// Layout: the core block, then (when permutations are mixed in) the core
/// weight followed by, per permutation, its weight and `d - 1` phases.
struct FreeFamily {
    kind: FreeSetKind,
    din: usize,
    dout: usize,
    perms: Vec<Vec<usize>>,
}

impl FreeFamily {
    fn new(kind: FreeSetKind, din: usize, dout: usize, scope: FreeScope) -> Self {
        let perms = if scope == FreeScope::Channels && din == dout && din > 1 { permutations(din) } else { Vec::new() };
        Self { kind, din, dout, perms }
    }

    fn core_len(&self) -> usize {
        match self.kind {
            FreeSetKind::DetectionCreationIncoherent => self.din * (self.dout - 1),
            FreeSetKind::CreationIncoherent => self.dout * 2 * self.din * self.din,
            _ => self.din * 2 * self.dout * self.dout,
        }
    }

    fn mix_len(&self) -> usize {
        if self.perms.is_empty() {
            0
        } else {
            1 + self.perms.len() * self.din
        }
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        let core = match self.kind {
            FreeSetKind::DetectionCreationIncoherent => (0.0, 1.0),
            _ => (-1.0, 1.0),
        };
        let mut b = vec![core; self.core_len()];
        if !self.perms.is_empty() {
            b.push((0.0, 1.0));
            for _ in &self.perms {
                b.push((0.0, 1.0));
                b.extend(core::iter::repeat_n((-core::f64::consts::PI, core::f64::consts::PI), self.din - 1));
            }
        }
        b
    }

    /// Weight vector selecting the core channel only.
    fn core_only_mix(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.mix_len()];
        if !m.is_empty() {
            m[0] = 1.0;
        }
        m
    }

    fn warm_starts(&self, n: &KrausChannel) -> Vec<Vec<f64>> {
        let p = classical_part(n);
        let mut cores = Vec::new();
        match self.kind {
            FreeSetKind::CreationIncoherent => {
                let dout = KrausChannel::dephasing(self.dout);
                if let Ok(c) = compose(&dout, n) {
                    if let Some(x) = self.encode_povm_of(&c) {
                        cores.push(x);
                    }
                }
            }
            FreeSetKind::DetectionIncoherent => {
                if let Some(x) = self.encode_preparations_of(n) {
                    cores.push(x);
                }
            }
            _ => {}
        }
        cores.push(self.encode_classical(&p));
        let uniform = vec![vec![1.0 / self.dout as f64; self.dout]; self.din];
        cores.push(self.encode_classical(&uniform));

        let mut out: Vec<Vec<f64>> = cores
            .iter()
            .map(|c| {
                let mut x = c.clone();
                x.extend(self.core_only_mix());
                x
            })
            .collect();
        for k in 0..self.perms.len() {
            let mut x = cores[0].clone();
            let mut mix = vec![0.0; self.mix_len()];
            mix[1 + k * self.din] = 1.0;
            x.extend(mix);
            out.push(x);
        }
        out
    }

    fn encode_classical(&self, p: &[Vec<f64>]) -> Vec<f64> {
        let (din, dout) = (self.din, self.dout);
        match self.kind {
            FreeSetKind::DetectionCreationIncoherent => {
                let mut x = Vec::with_capacity(self.core_len());
                for row in p {
                    let mut rest = 1.0;
                    for &pa in &row[..dout - 1] {
                        x.push(if rest > 1e-15 { (pa / rest).clamp(0.0, 1.0) } else { 0.0 });
                        rest -= pa;
                    }
                }
                x
            }
            FreeSetKind::CreationIncoherent => {
                let mut x = vec![0.0; self.core_len()];
                for a in 0..dout {
                    for i in 0..din {
                        x[self.povm_index(a, i, i)] = math::sqrt(p[i][a]);
                    }
                }
                x
            }
            _ => {
                let mut x = vec![0.0; self.core_len()];
                for (i, row) in p.iter().enumerate() {
                    for (a, &pa) in row.iter().enumerate() {
                        x[self.prep_index(i, a, a)] = math::sqrt(pa);
                    }
                }
                x
            }
        }
    }

    /// POVM elements `M_a = c^dag(|a><a|)` of a channel with diagonal outputs.
    fn encode_povm_of(&self, c: &KrausChannel) -> Option<Vec<f64>> {
        let mut x = vec![0.0; self.core_len()];
        for a in 0..self.dout {
            let mut m = CMatrix::zeros(self.din, self.din);
            for k in c.kraus() {
                let row = CMatrix::from_fn(1, self.din, |_, j| k[(a, j)]);
                m = &m + &row.adjoint().matmul(&row);
            }
            let g = psd_sqrt(&m.hermitian_part()).ok()?;
            self.write_block(&mut x, self.povm_index(a, 0, 0), &g);
        }
        Some(x)
    }

    /// Square roots of the images of the basis states.
    fn encode_preparations_of(&self, n: &KrausChannel) -> Option<Vec<f64>> {
        let mut x = vec![0.0; self.core_len()];
        for i in 0..self.din {
            let tau = n.apply_matrix(&basis_projector(self.din, i)).hermitian_part();
            let g = psd_sqrt(&tau).ok()?;
            self.write_block(&mut x, self.prep_index(i, 0, 0), &g);
        }
        Some(x)
    }

    fn write_block(&self, x: &mut [f64], start: usize, g: &CMatrix) {
        for (k, z) in g.data().iter().enumerate() {
            x[start + 2 * k] = z.re.clamp(-1.0, 1.0);
            x[start + 2 * k + 1] = z.im.clamp(-1.0, 1.0);
        }
    }

    fn povm_index(&self, a: usize, r: usize, c: usize) -> usize {
        let d = self.din;
        a * 2 * d * d + 2 * (r * d + c)
    }

    fn prep_index(&self, i: usize, r: usize, c: usize) -> usize {
        let d = self.dout;
        i * 2 * d * d + 2 * (r * d + c)
    }

    fn block(&self, x: &[f64], start: usize, d: usize) -> CMatrix {
        CMatrix::from_fn(d, d, |r, c| C64::new(x[start + 2 * (r * d + c)], x[start + 2 * (r * d + c) + 1]))
    }

    fn core_kraus(&self, x: &[f64]) -> Option<Vec<CMatrix>> {
        let (din, dout) = (self.din, self.dout);
        let mut kraus = Vec::new();
        match self.kind {
            FreeSetKind::DetectionCreationIncoherent => {
                for i in 0..din {
                    let mut rest = 1.0;
                    for a in 0..dout {
                        let pa = if a + 1 == dout { rest } else { rest * x[i * (dout - 1) + a] };
                        rest -= pa;
                        if pa > 0.0 {
                            let mut k = CMatrix::zeros(dout, din);
                            k[(a, i)] = C64::new(math::sqrt(pa), 0.0);
                            kraus.push(k);
                        }
                    }
                }
            }
            FreeSetKind::CreationIncoherent => {
                let gs: Vec<CMatrix> = (0..dout).map(|a| self.block(x, self.povm_index(a, 0, 0), din)).collect();
                let mut s = CMatrix::zeros(din, din);
                for g in &gs {
                    s = &s + &g.adjoint().matmul(g);
                }
                let eig = hermitian_eig(&s).ok()?;
                if eig.values[0] <= 1e-9 * eig.max_abs_value().max(1e-300) {
                    return None;
                }
                let w = psd_inv_sqrt(&s, SUPPORT_TOL).ok()?;
                for (a, g) in gs.iter().enumerate() {
                    let b = g.matmul(&w);
                    for r in 0..din {
                        if (0..din).all(|c| b[(r, c)] == ZERO) {
                            continue;
                        }
                        kraus.push(CMatrix::from_fn(dout, din, |row, c| if row == a { b[(r, c)] } else { ZERO }));
                    }
                }
            }
            _ => {
                for i in 0..din {
                    let g = self.block(x, self.prep_index(i, 0, 0), dout);
                    let t: f64 = g.data().iter().map(|z| z.norm_sqr()).sum();
                    if t <= 1e-12 {
                        return None;
                    }
                    let s = 1.0 / math::sqrt(t);
                    for c in 0..dout {
                        if (0..dout).all(|r| g[(r, c)] == ZERO) {
                            continue;
                        }
                        kraus.push(CMatrix::from_fn(dout, din, |r, col| if col == i { g[(r, c)] * s } else { ZERO }));
                    }
                }
            }
        }
        Some(kraus)
    }

    fn build(&self, x: &[f64]) -> Option<KrausChannel> {
        let (din, dout) = (self.din, self.dout);
        let core = self.core_kraus(&x[..self.core_len()])?;
        if self.perms.is_empty() {
            return KrausChannel::new(din, dout, core).ok();
        }
        let mix = &x[self.core_len()..];
        let weights: Vec<f64> = core::iter::once(mix[0]).chain((0..self.perms.len()).map(|k| mix[1 + k * din])).collect();
        let total: f64 = weights.iter().sum();
        if total <= 1e-12 {
            return None;
        }
        let mut kraus = Vec::new();
        if weights[0] > 0.0 {
            let s = math::sqrt(weights[0] / total);
            kraus.extend(core.iter().map(|k| k.scale_real(s)));
        }
        for (k, perm) in self.perms.iter().enumerate() {
            let w = weights[k + 1];
            if w <= 0.0 {
                continue;
            }
            let s = math::sqrt(w / total);
            let phases = &mix[2 + k * din..1 + (k + 1) * din];
            let u = CMatrix::from_fn(dout, din, |r, c| {
                if r != perm[c] {
                    return ZERO;
                }
                let t = if c == 0 { 0.0 } else { phases[c - 1] };
                C64::new(math::cos(t) * s, math::sin(t) * s)
            });
            kraus.push(u);
        }
        KrausChannel::new(din, dout, kraus).ok()
    }
}
