//! Deterministic multi-start derivative-free search.
//!
//! Every start is refined by a compass search whose step halves after a sweep
//! without improvement. Starts are processed in a fixed order (warm starts,
//! structured starts, then seeded random starts) and the best value wins, ties
//! going to the lowest start index. Random start `i` draws from ChaCha stream
//! `i` of `seed`, so results do not depend on how starts are scheduled.

use alloc::vec;
use alloc::vec::Vec;

use crate::linalg::{fix_phase, norm, C64};
use crate::math;
use crate::random;
use crate::states::{Bits, PureState};

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Seeded random starts, in addition to warm and structured starts. At
    /// least one random start runs when there is no other start.
    pub restarts: usize,
    /// Maximum compass sweeps per start.
    pub max_iters: usize,
    /// A start stops once its step falls below this.
    pub step_tolerance: f64,
    pub seed: u64,
    /// Extra starting points; entries of the wrong dimension are ignored.
    pub warm_starts: Vec<PureState>,
    /// Adds basis vectors and, up to dimension 4, equal-weight superpositions
    /// of pairs of basis vectors with phases `1, i, -1, -i`.
    pub structured_starts: bool,
    /// First step: an angle for pure states, a fraction of the box width for
    /// parameter search.
    pub initial_step: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            restarts: 64,
            max_iters: 500,
            step_tolerance: 1e-9,
            seed: 0,
            warm_starts: Vec::new(),
            structured_starts: true,
            initial_step: 0.5,
        }
    }
}

impl OptimizerConfig {
    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_warm_starts(mut self, warm: Vec<PureState>) -> Self {
        self.warm_starts = warm;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptResult {
    pub value: Bits,
    pub argmax: PureState,
    /// Starts that ended on the step tolerance (or on `+inf`) rather than on
    /// the sweep limit.
    pub restarts_converged: usize,
    pub best_restart_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamOptResult {
    pub value: f64,
    pub argmin: Vec<f64>,
    pub restarts_converged: usize,
    pub best_restart_index: usize,
}

#[derive(Clone, Copy)]
enum Move {
    Rotate(usize, usize),
    RotateImag(usize, usize),
    Phase(usize),
}

fn moves(dim: usize) -> Vec<Move> {
    let mut out = Vec::new();
    for j in 0..dim {
        for k in (j + 1)..dim {
            out.push(Move::Rotate(j, k));
            out.push(Move::RotateImag(j, k));
        }
    }
    for j in 1..dim {
        out.push(Move::Phase(j));
    }
    out
}

fn apply_move(x: &[C64], m: Move, t: f64, out: &mut Vec<C64>) {
    out.clear();
    out.extend_from_slice(x);
    let (c, s) = (math::cos(t), math::sin(t));
    match m {
        Move::Rotate(j, k) => {
            out[j] = x[j] * c - x[k] * s;
            out[k] = x[j] * s + x[k] * c;
        }
        Move::RotateImag(j, k) => {
            let is = C64::new(0.0, s);
            out[j] = x[j] * c + x[k] * is;
            out[k] = x[j] * is + x[k] * c;
        }
        Move::Phase(j) => {
            out[j] = x[j] * C64::new(c, s);
        }
    }
}

pub(crate) fn structured(dim: usize) -> Vec<Vec<C64>> {
    let zero = C64::new(0.0, 0.0);
    let mut out = Vec::new();
    for i in 0..dim {
        let mut v = vec![zero; dim];
        v[i] = C64::new(1.0, 0.0);
        out.push(v);
    }
    if dim <= 4 {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        let phases = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
        for i in 0..dim {
            for j in (i + 1)..dim {
                for w in phases {
                    let mut v = vec![zero; dim];
                    v[i] = C64::new(h, 0.0);
                    v[j] = w * h;
                    out.push(v);
                }
            }
        }
    }
    out
}

struct StartOutcome<T> {
    value: T,
    point: Vec<C64>,
    converged: bool,
}

fn refine_pure<F>(objective: &F, start: Vec<C64>, mv: &[Move], cfg: &OptimizerConfig) -> StartOutcome<Bits>
where
    F: Fn(&[C64]) -> Bits,
{
    let mut x = start;
    let mut f = objective(&x);
    if f == Bits::Infinite {
        return StartOutcome { value: f, point: x, converged: true };
    }
    let mut step = cfg.initial_step;
    let mut trial = Vec::with_capacity(x.len());
    let mut converged = mv.is_empty();
    if !converged {
        for _ in 0..cfg.max_iters {
            let mut improved = false;
            for &m in mv {
                for t in [step, -step] {
                    apply_move(&x, m, t, &mut trial);
                    let ft = objective(&trial);
                    if ft == Bits::Infinite {
                        return StartOutcome { value: ft, point: trial, converged: true };
                    }
                    if let (Bits::Finite(a), Bits::Finite(b)) = (ft, f) {
                        if a > b + 1e-14 {
                            core::mem::swap(&mut x, &mut trial);
                            f = ft;
                            improved = true;
                            break;
                        }
                    }
                }
            }
            if !improved {
                step *= 0.5;
                if step < cfg.step_tolerance {
                    converged = true;
                    break;
                }
            }
        }
    }
    StartOutcome { value: f, point: x, converged }
}

/// Runs `run(i)` for `i in 0..n` and keeps results up to and including the
/// first one for which `stop` holds.
fn run_starts<T, R, S>(n: usize, run: R, stop: S) -> Vec<T>
where
    T: Send,
    R: Fn(usize) -> T + Sync + Send,
    S: Fn(&T) -> bool,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let mut all: Vec<T> = (0..n).into_par_iter().map(&run).collect();
        if let Some(pos) = all.iter().position(&stop) {
            all.truncate(pos + 1);
        }
        all
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let r = run(i);
            let done = stop(&r);
            out.push(r);
            if done {
                break;
            }
        }
        out
    }
}

fn starting_points(dim: usize, cfg: &OptimizerConfig) -> Vec<Vec<C64>> {
    let mut starts: Vec<Vec<C64>> = cfg
        .warm_starts
        .iter()
        .filter(|w| w.dim() == dim && norm(w.amplitudes()) > 1e-12)
        .map(|w| {
            let n = norm(w.amplitudes());
            w.amplitudes().iter().map(|a| a / n).collect()
        })
        .collect();
    if cfg.structured_starts {
        starts.extend(structured(dim));
    }
    starts
}

/// Maximizes `objective` over unit vectors of length `dim`.
pub fn maximize_over_pure_states<F>(objective: F, dim: usize, cfg: &OptimizerConfig) -> OptResult
where
    F: Fn(&[C64]) -> Bits + Sync,
{
    assert!(dim >= 1, "dimension must be positive");
    if dim == 1 {
        let x = vec![C64::new(1.0, 0.0)];
        return OptResult {
            value: objective(&x),
            argmax: PureState::from_parts(x, vec![1]),
            restarts_converged: 1,
            best_restart_index: 0,
        };
    }
    let fixed = starting_points(dim, cfg);
    let total = fixed.len() + if fixed.is_empty() { cfg.restarts.max(1) } else { cfg.restarts };
    let mv = moves(dim);
    let outcomes = run_starts(
        total,
        |i| {
            let start = if i < fixed.len() {
                fixed[i].clone()
            } else {
                let mut r = random::rng(cfg.seed, (i - fixed.len()) as u64);
                let v = random::gaussian_vector(&mut r, dim);
                let n = norm(&v);
                v.into_iter().map(|a| a / n).collect()
            };
            refine_pure(&objective, start, &mv, cfg)
        },
        |o| o.value == Bits::Infinite,
    );

    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value.total_cmp(&outcomes[best].value) == core::cmp::Ordering::Greater {
            best = i;
        }
    }
    let mut point = outcomes[best].point.clone();
    let n = norm(&point);
    for a in point.iter_mut() {
        *a /= n;
    }
    fix_phase(&mut point);
    OptResult {
        value: outcomes[best].value,
        argmax: PureState::from_parts(point, vec![dim]),
        restarts_converged: outcomes.iter().filter(|o| o.converged).count(),
        best_restart_index: best,
    }
}

fn clamp_to(bounds: &[(f64, f64)], x: &mut [f64]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

fn refine_params<F>(objective: &F, start: Vec<f64>, bounds: &[(f64, f64)], cfg: &OptimizerConfig, floor: f64) -> (f64, Vec<f64>, bool)
where
    F: Fn(&[f64]) -> f64,
{
    let mut x = start;
    let mut f = sanitize(objective(&x));
    if f <= floor {
        return (f, x, true);
    }
    let mut step = cfg.initial_step;
    let mut trial = x.clone();
    for _ in 0..cfg.max_iters {
        let mut improved = false;
        for j in 0..x.len() {
            let (lo, hi) = bounds[j];
            let width = hi - lo;
            if width <= 0.0 {
                continue;
            }
            for dir in [1.0, -1.0] {
                trial.copy_from_slice(&x);
                trial[j] = (x[j] + dir * step * width).clamp(lo, hi);
                if trial[j] == x[j] {
                    continue;
                }
                let ft = sanitize(objective(&trial));
                if ft < f - 1e-14 {
                    core::mem::swap(&mut x, &mut trial);
                    f = ft;
                    improved = true;
                    break;
                }
            }
            if f <= floor {
                return (f, x, true);
            }
        }
        if !improved {
            step *= 0.5;
            if step < cfg.step_tolerance {
                return (f, x, true);
            }
        }
    }
    (f, x, false)
}

/// Minimizes `objective` over the box `bounds`.
pub fn minimize_over_parameters<F>(objective: F, bounds: &[(f64, f64)], cfg: &OptimizerConfig) -> ParamOptResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    minimize_over_parameters_from(objective, bounds, cfg, &[], f64::NEG_INFINITY)
}

/// As [`minimize_over_parameters`], with extra starting points tried first and
/// a known lower bound `floor`: search stops as soon as it is reached.
pub fn minimize_over_parameters_from<F>(
    objective: F,
    bounds: &[(f64, f64)],
    cfg: &OptimizerConfig,
    warm: &[Vec<f64>],
    floor: f64,
) -> ParamOptResult
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let dim = bounds.len();
    let mut fixed: Vec<Vec<f64>> = warm.iter().filter(|w| w.len() == dim).cloned().collect();
    for w in fixed.iter_mut() {
        clamp_to(bounds, w);
    }
    if cfg.structured_starts {
        fixed.push(bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect());
    }
    let total = fixed.len() + if fixed.is_empty() { cfg.restarts.max(1) } else { cfg.restarts };
    let outcomes = run_starts(
        total,
        |i| {
            let start = if i < fixed.len() {
                fixed[i].clone()
            } else {
                let mut r = random::rng(cfg.seed, (i - fixed.len()) as u64);
                bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * random::uniform(&mut r)).collect()
            };
            refine_params(&objective, start, bounds, cfg, floor)
        },
        |o| o.0 <= floor,
    );
    let mut best = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.0 < outcomes[best].0 {
            best = i;
        }
    }
    ParamOptResult {
        value: outcomes[best].0,
        argmin: outcomes[best].1.clone(),
        restarts_converged: outcomes.iter().filter(|o| o.2).count(),
        best_restart_index: best,
    }
}
