//! Relative entropies between channels and the channel entropy.
//!
//! For channels `N, M: A' -> A` three input scenarios are compared:
//!
//! * `A`: pure inputs on `A'` alone, `max_psi D(N(psi) || M(psi))`;
//! * `Phi`: the maximally entangled input, i.e. the divergence of Choi states;
//! * `AB`: pure inputs on `A'B` with `d_B = d_A'`, `max_psi D((N (x) I)(psi) || (M (x) I)(psi))`.
//!
//! `D*` kinds use the hypothesis-testing divergence at zero error, `S*` kinds
//! the Umegaki relative entropy. The `A` and `AB` values come from the
//! optimizer and are lower bounds of the true suprema.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::channels::KrausChannel;
use crate::error::{ensure_dim, Error, Result};
use crate::linalg::{hermitian_eig, kron_vec, CMatrix, C64};
use crate::math;
use crate::optimizer::{maximize_over_pure_states, OptResult, OptimizerConfig};
use crate::states::{
    conditional_entropy_of, entropy_of, hypothesis_divergence_of, maximally_entangled, relative_entropy_of,
    renyi0_of, Bits, DensityState, PureState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DivergenceKind {
    DA,
    DPhi,
    DAB,
    SA,
    SPhi,
    SAB,
}

/// State divergence underlying a kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    HypothesisTesting,
    Umegaki,
}

/// Input scenario of a kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    A,
    Phi,
    AB,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 6] = [
        DivergenceKind::DA,
        DivergenceKind::DPhi,
        DivergenceKind::DAB,
        DivergenceKind::SA,
        DivergenceKind::SPhi,
        DivergenceKind::SAB,
    ];

    pub fn new(family: Family, scenario: Scenario) -> Self {
        use DivergenceKind::*;
        match (family, scenario) {
            (Family::HypothesisTesting, Scenario::A) => DA,
            (Family::HypothesisTesting, Scenario::Phi) => DPhi,
            (Family::HypothesisTesting, Scenario::AB) => DAB,
            (Family::Umegaki, Scenario::A) => SA,
            (Family::Umegaki, Scenario::Phi) => SPhi,
            (Family::Umegaki, Scenario::AB) => SAB,
        }
    }

    pub fn family(self) -> Family {
        match self {
            DivergenceKind::DA | DivergenceKind::DPhi | DivergenceKind::DAB => Family::HypothesisTesting,
            _ => Family::Umegaki,
        }
    }

    pub fn scenario(self) -> Scenario {
        match self {
            DivergenceKind::DA | DivergenceKind::SA => Scenario::A,
            DivergenceKind::DPhi | DivergenceKind::SPhi => Scenario::Phi,
            DivergenceKind::DAB | DivergenceKind::SAB => Scenario::AB,
        }
    }

    pub fn is_closed_form(self) -> bool {
        self.scenario() == Scenario::Phi
    }

    /// Short command-line name, e.g. `dPhi`.
    pub fn name(self) -> &'static str {
        match self {
            DivergenceKind::DA => "dA",
            DivergenceKind::DPhi => "dPhi",
            DivergenceKind::DAB => "dAB",
            DivergenceKind::SA => "sA",
            DivergenceKind::SPhi => "sPhi",
            DivergenceKind::SAB => "sAB",
        }
    }

    /// Typeset label, e.g. `D_Phi+`.
    pub fn label(self) -> &'static str {
        match self {
            DivergenceKind::DA => "D_A",
            DivergenceKind::DPhi => "D_Phi+",
            DivergenceKind::DAB => "D_AB",
            DivergenceKind::SA => "S_A",
            DivergenceKind::SPhi => "S_Phi+",
            DivergenceKind::SAB => "S_AB",
        }
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DivergenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        DivergenceKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s) || k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidState(alloc::format!("unknown divergence kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceResult {
    pub kind: DivergenceKind,
    pub value: Bits,
    /// Best input found; `None` for the closed-form kinds.
    pub achieving_input: Option<PureState>,
    /// True for optimizer-backed kinds.
    pub lower_bound_only: bool,
    pub restarts_converged: usize,
}

fn divergence_of(family: Family, rho: &CMatrix, sigma: &CMatrix) -> Bits {
    let r = match family {
        Family::HypothesisTesting => hypothesis_divergence_of(rho, sigma),
        Family::Umegaki => relative_entropy_of(rho, sigma),
    };
    r.unwrap_or(Bits::Finite(f64::NEG_INFINITY))
}

fn check_pair(n: &KrausChannel, m: &KrausChannel) -> Result<()> {
    ensure_dim(n.dim_in(), m.dim_in())?;
    ensure_dim(n.dim_out(), m.dim_out())
}

/// Divergence at a fixed pure input on `A'` (ancilla dimension `len / d_in`).
pub fn divergence_at_input(family: Family, n: &KrausChannel, m: &KrausChannel, input: &[C64]) -> Result<Bits> {
    check_pair(n, m)?;
    if !input.len().is_multiple_of(n.dim_in()) {
        return Err(Error::DimensionMismatch { expected: n.dim_in(), got: input.len() });
    }
    let e = input.len() / n.dim_in();
    Ok(divergence_of(family, &n.apply_pure_extended(input, e), &m.apply_pure_extended(input, e)))
}

fn phi_value(family: Family, n: &KrausChannel, m: &KrausChannel) -> Bits {
    divergence_of(family, &n.choi_matrix(), &m.choi_matrix())
}

fn optimize<F>(objective: F, dim: usize, cfg: &OptimizerConfig, extra: Vec<PureState>) -> OptResult
where
    F: Fn(&[C64]) -> Bits + Sync,
{
    let mut cfg = cfg.clone();
    let mut warm = extra;
    warm.append(&mut cfg.warm_starts);
    cfg.warm_starts = warm;
    maximize_over_pure_states(objective, dim, &cfg)
}

/// Warm starts for an AB search: `Phi+`, `a_arg (x) |0>`, and configured warm
/// starts on `A'` lifted the same way.
fn ab_warm_starts(d: usize, a_arg: Option<&PureState>, cfg: &OptimizerConfig) -> Vec<PureState> {
    let mut warm = vec![maximally_entangled(d)];
    let zero = PureState::basis(d, 0);
    if let Some(a) = a_arg {
        warm.push(a.tensor(&zero));
    }
    for w in &cfg.warm_starts {
        if w.dim() == d {
            warm.push(w.tensor(&zero));
        }
    }
    warm
}

fn with_dims(state: PureState, dims: Vec<usize>) -> PureState {
    PureState::from_parts(state.amplitudes().to_vec(), dims)
}

struct Triple {
    a: DivergenceResult,
    phi: DivergenceResult,
    ab: DivergenceResult,
}

fn evaluate_family(family: Family, n: &KrausChannel, m: &KrausChannel, cfg: &OptimizerConfig) -> Triple {
    let d = n.dim_in();
    let a_opt = optimize(
        |x| divergence_of(family, &n.apply_pure_extended(x, 1), &m.apply_pure_extended(x, 1)),
        d,
        cfg,
        Vec::new(),
    );
    let a = DivergenceResult {
        kind: DivergenceKind::new(family, Scenario::A),
        value: a_opt.value,
        achieving_input: Some(with_dims(a_opt.argmax, vec![d])),
        lower_bound_only: true,
        restarts_converged: a_opt.restarts_converged,
    };
    let phi = DivergenceResult {
        kind: DivergenceKind::new(family, Scenario::Phi),
        value: phi_value(family, n, m),
        achieving_input: None,
        lower_bound_only: false,
        restarts_converged: 0,
    };
    let ab_opt = optimize(
        |x| divergence_of(family, &n.apply_pure_extended(x, d), &m.apply_pure_extended(x, d)),
        d * d,
        cfg,
        ab_warm_starts(d, a.achieving_input.as_ref(), cfg),
    );
    let ab = finish_ab(family, ab_opt, &a, phi.value, d);
    Triple { a, phi, ab }
}

/// Final AB value: the optimum, raised to the `Phi+` and `A` values whenever
/// rounding left it below them.
fn finish_ab(family: Family, opt: OptResult, a: &DivergenceResult, phi: Bits, d: usize) -> DivergenceResult {
    let mut value = opt.value;
    let mut input = with_dims(opt.argmax, vec![d, d]);
    if phi.total_cmp(&value) == core::cmp::Ordering::Greater {
        value = phi;
        input = maximally_entangled(d);
    }
    if a.value.total_cmp(&value) == core::cmp::Ordering::Greater {
        value = a.value;
        if let Some(arg) = &a.achieving_input {
            input = arg.tensor(&PureState::basis(d, 0));
        }
    }
    DivergenceResult {
        kind: DivergenceKind::new(family, Scenario::AB),
        value,
        achieving_input: Some(input),
        lower_bound_only: true,
        restarts_converged: opt.restarts_converged,
    }
}

/// Divergence of `n` from `m` of the given kind.
pub fn channel_divergence(
    kind: DivergenceKind,
    n: &KrausChannel,
    m: &KrausChannel,
    cfg: &OptimizerConfig,
) -> Result<DivergenceResult> {
    check_pair(n, m)?;
    let family = kind.family();
    let d = n.dim_in();
    Ok(match kind.scenario() {
        Scenario::Phi => DivergenceResult {
            kind,
            value: phi_value(family, n, m),
            achieving_input: None,
            lower_bound_only: false,
            restarts_converged: 0,
        },
        Scenario::A => {
            let opt = optimize(
                |x| divergence_of(family, &n.apply_pure_extended(x, 1), &m.apply_pure_extended(x, 1)),
                d,
                cfg,
                Vec::new(),
            );
            DivergenceResult {
                kind,
                value: opt.value,
                achieving_input: Some(with_dims(opt.argmax, vec![d])),
                lower_bound_only: true,
                restarts_converged: opt.restarts_converged,
            }
        }
        Scenario::AB => evaluate_family(family, n, m, cfg).ab,
    })
}

/// Divergence from the completely depolarizing channel, using the entropic
/// closed forms (`DAB` goes through the generic search).
pub fn divergence_to_depolarizing(kind: DivergenceKind, n: &KrausChannel, cfg: &OptimizerConfig) -> Result<DivergenceResult> {
    let (d, dout) = (n.dim_in(), n.dim_out());
    let log_out = math::log2(dout as f64);
    let log_choi = math::log2((dout * d) as f64);
    let closed = |value: f64| DivergenceResult {
        kind,
        value: Bits::Finite(value),
        achieving_input: None,
        lower_bound_only: false,
        restarts_converged: 0,
    };
    let a_search = |family: Family| {
        let opt = optimize(
            |x| {
                let out = n.apply_pure_extended(x, 1);
                let h = match family {
                    Family::HypothesisTesting => renyi0_of(&out),
                    Family::Umegaki => entropy_of(&out),
                };
                h.map_or(Bits::Finite(f64::NEG_INFINITY), |h| Bits::Finite(log_out - h))
            },
            d,
            cfg,
            Vec::new(),
        );
        DivergenceResult {
            kind: DivergenceKind::new(family, Scenario::A),
            value: opt.value,
            achieving_input: Some(with_dims(opt.argmax, vec![d])),
            lower_bound_only: true,
            restarts_converged: opt.restarts_converged,
        }
    };
    Ok(match kind {
        DivergenceKind::DPhi => closed(log_choi - renyi0_of(&n.choi_matrix())?),
        DivergenceKind::SPhi => closed(log_choi - entropy_of(&n.choi_matrix())?),
        DivergenceKind::DA => a_search(Family::HypothesisTesting),
        DivergenceKind::SA => a_search(Family::Umegaki),
        DivergenceKind::SAB => {
            let a = a_search(Family::Umegaki);
            let phi = Bits::Finite(log_choi - entropy_of(&n.choi_matrix())?);
            let dims = [dout, d];
            let opt = optimize(
                |x| {
                    let out = n.apply_pure_extended(x, d);
                    conditional_entropy_of(&out, &dims, &[0])
                        .map_or(Bits::Finite(f64::NEG_INFINITY), |h| Bits::Finite(log_out - h))
                },
                d * d,
                cfg,
                ab_warm_starts(d, a.achieving_input.as_ref(), cfg),
            );
            finish_ab(Family::Umegaki, opt, &a, phi, d)
        }
        DivergenceKind::DAB => channel_divergence(kind, n, &KrausChannel::depolarizing(d, dout), cfg)?,
    })
}

/// `log2 d_out - D(N || depolarizing)`.
pub fn channel_entropy(kind: DivergenceKind, n: &KrausChannel, cfg: &OptimizerConfig) -> Result<f64> {
    let r = divergence_to_depolarizing(kind, n, cfg)?;
    let v = r
        .value
        .finite()
        .ok_or_else(|| Error::InvalidState("divergence to the depolarizing channel is infinite".into()))?;
    Ok(math::log2(n.dim_out() as f64) - v)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    /// One result per kind, in [`DivergenceKind::ALL`] order.
    pub results: Vec<DivergenceResult>,
    /// `D_AB - max(D_A, D_Phi+)`; `+inf` when `D_AB` is infinite.
    pub d_gap: f64,
    /// `S_AB - max(S_A, S_Phi+)`.
    pub s_gap: f64,
    pub holds: bool,
}

impl OrderingReport {
    pub fn value(&self, kind: DivergenceKind) -> Bits {
        self.results.iter().find(|r| r.kind == kind).map_or(Bits::Finite(f64::NAN), |r| r.value)
    }
}

fn gap(ab: Bits, a: Bits, phi: Bits) -> f64 {
    match (ab, a.max(phi)) {
        (Bits::Infinite, _) => f64::INFINITY,
        (Bits::Finite(_), Bits::Infinite) => f64::NEG_INFINITY,
        (Bits::Finite(x), Bits::Finite(y)) => x - y,
    }
}

/// Evaluates all six kinds and checks `AB >= max(A, Phi+)` in both families.
pub fn ordering_check(n: &KrausChannel, m: &KrausChannel, cfg: &OptimizerConfig) -> Result<OrderingReport> {
    check_pair(n, m)?;
    let d = evaluate_family(Family::HypothesisTesting, n, m, cfg);
    let s = evaluate_family(Family::Umegaki, n, m, cfg);
    let d_gap = gap(d.ab.value, d.a.value, d.phi.value);
    let s_gap = gap(s.ab.value, s.a.value, s.phi.value);
    Ok(OrderingReport {
        results: vec![d.a, d.phi, d.ab, s.a, s.phi, s.ab],
        d_gap,
        s_gap,
        holds: d_gap >= -1e-9 && s_gap >= -1e-9,
    })
}

/// Canonical purification `sum_j sqrt(mu_j) |a_j>|j>` of the first-factor
/// marginal of `state`, whose first factor has dimension `d`.
///
/// Any input on `A'` (x) ancilla whose `A'` marginal is `rho` is, up to an
/// isometry on the ancilla and a partial trace, this vector, so AB
/// divergences evaluated here are never smaller.
pub fn purify_marginal(state: &DensityState, d: usize) -> Result<PureState> {
    if !state.dim().is_multiple_of(d) {
        return Err(Error::DimensionMismatch { expected: d, got: state.dim() });
    }
    let marginal = state.matrix().partial_trace(&[d, state.dim() / d], &[0])?;
    Ok(purify(&marginal))
}

/// Canonical purification of a `d x d` density matrix on `d (x) d`.
pub fn purify(rho: &CMatrix) -> PureState {
    let d = rho.rows();
    let eig = hermitian_eig(rho).expect("density matrices are Hermitian");
    let mut amps = vec![C64::new(0.0, 0.0); d * d];
    for (j, &mu) in eig.values.iter().enumerate() {
        if mu <= 0.0 {
            continue;
        }
        let s = math::sqrt(mu);
        let v = eig.vector(j);
        for i in 0..d {
            amps[i * d + j] = v[i] * s;
        }
    }
    PureState::normalized(amps, vec![d, d]).unwrap_or_else(|_| maximally_entangled(d))
}

/// `a (x) b` for inputs living on `A'_0 B_0` and `A'_1 B_1`, reordered to
/// `(A'_0 A'_1)(B_0 B_1)`.
pub fn product_input(a: &PureState, da: usize, b: &PureState, db: usize) -> PureState {
    let ea = a.dim() / da;
    let eb = b.dim() / db;
    let raw = kron_vec(a.amplitudes(), b.amplitudes());
    let mut out = vec![C64::new(0.0, 0.0); raw.len()];
    for x in 0..da {
        for y in 0..ea {
            for u in 0..db {
                for v in 0..eb {
                    let src = ((x * ea + y) * db + u) * eb + v;
                    let dst = ((x * db + u) * ea + y) * eb + v;
                    out[dst] = raw[src];
                }
            }
        }
    }
    PureState::from_parts(out, vec![da * db, ea * eb])
}
