//! Entanglement of bipartite channels `A'C' -> AC`.
//!
//! The lower bound maximizes the `S_AB` channel entropy of subchannels. The
//! upper bound minimizes `S_AB(N || E)` over
//! `E = w (A0 (x) C0) + (1 - w) (A1 (x) C1) o SWAP`, a strict subset of the
//! separable channels, with every local channel a full-rank Kraus stack.

use alloc::vec;
use alloc::vec::Vec;

use super::coherence::cheap_sab;
use super::{BoundKind, Bipartition, CoherenceResult, FreeScope, FreeSetKind};
use crate::channels::{channel_distance, compose, mixture, subchannel, tensor, Keep, KrausChannel};
use crate::divergence::{channel_divergence, channel_entropy, DivergenceKind};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kron_vec, CMatrix, C64};
use crate::optimizer::{maximize_over_pure_states, minimize_over_parameters_from, structured, OptimizerConfig};
use crate::random::normalize_kraus;
use crate::states::{maximally_entangled, Bits, DensityState, PureState};

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundResult {
    /// Largest subchannel `S_AB` channel entropy found.
    pub value: f64,
    pub keep: Keep,
    /// Pure state frozen on the other input.
    pub frozen: PureState,
}

fn cheap(cfg: &OptimizerConfig) -> OptimizerConfig {
    OptimizerConfig {
        restarts: cfg.restarts.min(2),
        structured_starts: false,
        step_tolerance: 1e-7,
        ..cfg.clone()
    }
}

/// `max_{keep, phi} S_AB channel entropy of subchannel(n, keep, phi)`.
pub fn entanglement_lower_bound(n: &KrausChannel, parts: Bipartition, cfg: &OptimizerConfig) -> Result<LowerBoundResult> {
    parts.check(n)?;
    let quick = cheap(cfg);
    let mut best: Option<(f64, Keep, Vec<C64>)> = None;
    for keep in [Keep::A, Keep::C] {
        let f = match keep {
            Keep::A => parts.dims_in[1],
            Keep::C => parts.dims_in[0],
        };
        let entropy = |phi: &[C64], c: &OptimizerConfig| -> Result<f64> {
            let frozen = DensityState::from_parts(CMatrix::outer(phi), vec![f]);
            let sub = subchannel(n, parts.dims_in, parts.dims_out, keep, &frozen)?;
            channel_entropy(DivergenceKind::SAB, &sub, c)
        };
        let mut local: Option<(f64, Vec<C64>)> = None;
        for phi in structured(f) {
            let v = entropy(&phi, &quick)?;
            if local.as_ref().is_none_or(|(b, _)| v > *b) {
                local = Some((v, phi));
            }
        }
        let (_, mut phi) = local.expect("grid is never empty");
        if f > 1 {
            let search = OptimizerConfig {
                restarts: cfg.restarts.min(2),
                max_iters: 40,
                step_tolerance: 1e-4,
                structured_starts: false,
                warm_starts: vec![PureState::from_parts(phi.clone(), vec![f])],
                ..cfg.clone()
            };
            let r = maximize_over_pure_states(
                |x| entropy(x, &quick).map_or(Bits::Finite(f64::NEG_INFINITY), Bits::Finite),
                f,
                &search,
            );
            phi = r.argmax.amplitudes().to_vec();
        }
        let v = entropy(&phi, cfg)?;
        if best.as_ref().is_none_or(|(b, _, _)| v > *b) {
            best = Some((v, keep, phi));
        }
    }
    let (value, keep, phi) = best.expect("two halves evaluated");
    let f = phi.len();
    Ok(LowerBoundResult { value, keep, frozen: PureState::from_parts(phi, vec![f]) })
}

/// Largest negativity `max(0, -lambda_min)` of the partial transpose of outputs
/// on product inputs: a grid of local states, then alternating local searches.
///
/// Exact as a separability test of each output only when `d_A d_C <= 6`.
pub fn separability_residual(ch: &KrausChannel, parts: Bipartition) -> Result<f64> {
    parts.check(ch)?;
    let [da, dc] = parts.dims_out;
    if da.min(dc) >= 2 && da * dc > 6 {
        return Err(Error::UnsupportedDimension(alloc::format!(
            "separability check supports outputs up to 2x3, got {da}x{dc}"
        )));
    }
    if da.min(dc) == 1 {
        return Ok(0.0);
    }
    let [ia, ic] = parts.dims_in;
    let negativity = |a: &[C64], c: &[C64]| -> f64 {
        let out = ch.apply_matrix(&CMatrix::outer(&kron_vec(a, c)));
        let pt = out.partial_transpose(&[da, dc], &[1]).expect("dimensions checked");
        hermitian_eig(&pt.hermitian_part()).map_or(f64::INFINITY, |e| -e.values[0])
    };
    let mut best = (f64::NEG_INFINITY, Vec::new(), Vec::new());
    for a in structured(ia) {
        for c in structured(ic) {
            let v = negativity(&a, &c);
            if v > best.0 {
                best = (v, a.clone(), c.clone());
            }
        }
    }
    let search = |warm: &[C64], d: usize| OptimizerConfig {
        restarts: 2,
        max_iters: 100,
        step_tolerance: 1e-6,
        structured_starts: false,
        warm_starts: vec![PureState::from_parts(warm.to_vec(), vec![d])],
        ..OptimizerConfig::default()
    };
    for _ in 0..2 {
        if ia > 1 {
            let c = best.2.clone();
            let r = maximize_over_pure_states(|x| Bits::Finite(negativity(x, &c)), ia, &search(&best.1, ia));
            if r.value.to_f64() > best.0 {
                best = (r.value.to_f64(), r.argmax.amplitudes().to_vec(), c);
            }
        }
        if ic > 1 {
            let a = best.1.clone();
            let r = maximize_over_pure_states(|x| Bits::Finite(negativity(&a, x)), ic, &search(&best.2, ic));
            if r.value.to_f64() > best.0 {
                best = (r.value.to_f64(), a, r.argmax.amplitudes().to_vec());
            }
        }
    }
    Ok(best.0.max(0.0))
}

/// Local channel as a stack of `d_in * d_out` Kraus operators, rescaled to be
/// trace preserving.
#[derive(Clone, Copy)]
struct Local {
    din: usize,
    dout: usize,
}

impl Local {
    fn rank(&self) -> usize {
        self.din * self.dout
    }

    fn len(&self) -> usize {
        2 * self.rank() * self.din * self.dout
    }

    fn build(&self, x: &[f64]) -> Option<KrausChannel> {
        let size = self.din * self.dout;
        let ops: Vec<CMatrix> = (0..self.rank())
            .map(|k| {
                let b = &x[2 * k * size..2 * (k + 1) * size];
                CMatrix::from_fn(self.dout, self.din, |r, c| {
                    let j = 2 * (r * self.din + c);
                    C64::new(b[j], b[j + 1])
                })
            })
            .collect();
        normalize_kraus(self.din, self.dout, &ops).ok()
    }

    fn encode(&self, ch: &KrausChannel) -> Vec<f64> {
        let mut x = vec![0.0; self.len()];
        let ops = ch.reduce_rank();
        for (k, op) in ops.kraus().iter().take(self.rank()).enumerate() {
            for (j, z) in op.data().iter().enumerate() {
                x[2 * (k * self.din * self.dout + j)] = z.re.clamp(-1.0, 1.0);
                x[2 * (k * self.din * self.dout + j) + 1] = z.im.clamp(-1.0, 1.0);
            }
        }
        x
    }
}

struct SeparableFamily {
    parts: Bipartition,
    /// `A0, C0, A1, C1`.
    locals: [Local; 4],
}

impl SeparableFamily {
    fn new(parts: Bipartition) -> Self {
        let [ia, ic] = parts.dims_in;
        let [oa, oc] = parts.dims_out;
        Self {
            parts,
            locals: [
                Local { din: ia, dout: oa },
                Local { din: ic, dout: oc },
                Local { din: ic, dout: oa },
                Local { din: ia, dout: oc },
            ],
        }
    }

    fn len(&self) -> usize {
        1 + self.locals.iter().map(Local::len).sum::<usize>()
    }

    fn bounds(&self) -> Vec<(f64, f64)> {
        let mut b = vec![(0.0, 1.0)];
        b.extend(core::iter::repeat_n((-1.0, 1.0), self.len() - 1));
        b
    }

    fn build(&self, x: &[f64]) -> Option<KrausChannel> {
        let mut at = 1;
        let mut chans = Vec::with_capacity(4);
        for l in &self.locals {
            chans.push(l.build(&x[at..at + l.len()])?);
            at += l.len();
        }
        let [ia, ic] = self.parts.dims_in;
        let plain = tensor(&chans[0], &chans[1]);
        let swapped = compose(&tensor(&chans[2], &chans[3]), &KrausChannel::swap(ia, ic)).ok()?;
        let w = x[0];
        mixture(&[(w, &plain), (1.0 - w, &swapped)]).ok()
    }

    fn encode(&self, w: f64, chans: [&KrausChannel; 4]) -> Vec<f64> {
        let mut x = vec![w];
        for (l, c) in self.locals.iter().zip(chans) {
            x.extend(l.encode(c));
        }
        x
    }

    /// Products of the maximally-mixed-frozen subchannels of `n` and of
    /// `n o SWAP`.
    fn warm_starts(&self, n: &KrausChannel) -> Result<Vec<Vec<f64>>> {
        let Bipartition { dims_in: [ia, ic], dims_out } = self.parts;
        let sub = |ch: &KrausChannel, dims_in: [usize; 2], keep: Keep| {
            let f = if keep == Keep::A { dims_in[1] } else { dims_in[0] };
            subchannel(ch, dims_in, dims_out, keep, &DensityState::maximally_mixed(f))
        };
        let a0 = sub(n, [ia, ic], Keep::A)?;
        let c0 = sub(n, [ia, ic], Keep::C)?;
        let ns = compose(n, &KrausChannel::swap(ic, ia))?;
        let a1 = sub(&ns, [ic, ia], Keep::A)?;
        let c1 = sub(&ns, [ic, ia], Keep::C)?;
        let mut out = vec![self.encode(1.0, [&a0, &c0, &a1, &c1]), self.encode(0.0, [&a0, &c0, &a1, &c1])];
        out.extend(self.correlated_start(n));
        Ok(out)
    }

    /// Two-term mixture of replacements by the two heaviest product basis
    /// states of `n(I/d)`.
    fn correlated_start(&self, n: &KrausChannel) -> Option<Vec<f64>> {
        let [oa, oc] = self.parts.dims_out;
        let out = n.apply_matrix(DensityState::maximally_mixed(n.dim_in()).matrix());
        let mut diag: Vec<(f64, usize)> = (0..oa * oc).map(|k| (out[(k, k)].re, k)).collect();
        diag.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let (p0, k0) = diag[0];
        let (p1, k1) = diag[1];
        if p0 + p1 <= 0.0 {
            return None;
        }
        let prep = |l: &Local, b: usize, d: usize| KrausChannel::replacement(l.din, &DensityState::basis(d, b));
        let [l0, l1, l2, l3] = self.locals;
        Some(self.encode(
            p0 / (p0 + p1),
            [&prep(&l0, k0 / oc, oa), &prep(&l1, k0 % oc, oc), &prep(&l2, k1 / oc, oa), &prep(&l3, k1 % oc, oc)],
        ))
    }
}

/// `min S_AB(n || E)` over the restricted separable family.
///
/// Supports outputs `2 x 2` and inputs of at most `2 x 2`.
pub fn entanglement_upper_bound(n: &KrausChannel, parts: Bipartition, cfg: &OptimizerConfig) -> Result<CoherenceResult> {
    parts.check(n)?;
    if parts.dims_out != [2, 2] || parts.dims_in.iter().any(|&d| d > 2) {
        return Err(Error::UnsupportedDimension(alloc::format!(
            "restricted separable search supports {{1,2}}x{{1,2}} -> 2x2, got {:?} -> {:?}",
            parts.dims_in,
            parts.dims_out
        )));
    }
    let fam = SeparableFamily::new(parts);
    let d = n.dim_in();
    let mut pool = vec![maximally_entangled(d)];
    for i in 0..d {
        pool.push(PureState::basis(d, i).tensor(&PureState::basis(d, 0)));
    }
    let inner = OptimizerConfig {
        restarts: 0,
        max_iters: if d >= 4 { 0 } else { 60 },
        step_tolerance: 1e-5,
        structured_starts: false,
        initial_step: 0.2,
        ..cfg.clone()
    };
    let outer = OptimizerConfig {
        restarts: 0,
        max_iters: 30,
        step_tolerance: 1e-2,
        structured_starts: false,
        initial_step: 0.1,
        ..cfg.clone()
    };
    let mut warm = fam.warm_starts(n)?;
    let mut best: Option<(f64, KrausChannel)> = None;
    for _ in 0..3 {
        let objective = |x: &[f64]| match fam.build(x) {
            Some(e) => cheap_sab(n, &e, &pool, &inner),
            None => f64::INFINITY,
        };
        let opt = minimize_over_parameters_from(objective, &fam.bounds(), &outer, &warm, 1e-9);
        let Some(e) = fam.build(&opt.argmin) else { break };
        let (v, input) = if channel_distance(n, &e)? < 1e-12 {
            (0.0, None)
        } else {
            let fin = OptimizerConfig {
                restarts: if d >= 4 { cfg.restarts.min(1) } else { cfg.restarts },
                structured_starts: d < 4,
                step_tolerance: if d >= 4 { 1e-6 } else { cfg.step_tolerance },
                warm_starts: pool.clone(),
                ..cfg.clone()
            };
            let full = channel_divergence(DivergenceKind::SAB, n, &e, &fin)?;
            (full.value.to_f64(), full.achieving_input)
        };
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, e));
        }
        if v <= opt.value + 1e-6 {
            break;
        }
        match input {
            Some(i) => pool.push(i),
            None => break,
        }
        warm.insert(0, opt.argmin);
    }
    let (value, e) = best.ok_or_else(|| Error::InvalidState("no feasible separable channel".into()))?;
    let residual = separability_residual(&e, parts)?;
    Ok(CoherenceResult {
        kind: FreeSetKind::SeparableRestricted,
        scope: FreeScope::Channels,
        value,
        achieving_free_channel: e,
        bound_kind: BoundKind::RestrictedFamilyUpperBound,
        witness_residual: residual,
    })
}
