//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use chanent_core::divergence::{channel_divergence, channel_entropy, ordering_check, DivergenceKind};
use chanent_core::properties::{phi_monotonicity_violation, run_table1, table1_mismatches, Property};
use chanent_core::random;
use chanent_core::resource::{
    coherence_measure_with, entanglement_lower_bound, entanglement_upper_bound, measurement_in_basis,
    qubit_measurement_coherence_analytic, Bipartition, CoherenceConfig, FreeScope, FreeSetKind,
};
use chanent_core::states::{
    hypothesis_divergence_zero, maximally_entangled, relative_entropy, von_neumann_entropy, Bits, DensityState,
};
use chanent_core::{CMatrix, KrausChannel, OptimizerConfig, PureState};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { pass: true, lines: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {what}", if ok { "ok  " } else { "FAIL" }));
    }

    fn close(&mut self, label: &str, got: f64, want: f64, tol: f64) {
        self.check((got - want).abs() <= tol, format!("{label} = {got:.10} (want {want:.10} +- {tol:e})"));
    }
}

fn n0() -> KrausChannel {
    KrausChannel::decay_to_one(0.5).unwrap()
}

fn dep2() -> KrausChannel {
    KrausChannel::depolarizing(2, 2)
}

fn value(kind: DivergenceKind, n: &KrausChannel, m: &KrausChannel) -> f64 {
    channel_divergence(kind, n, m, &OptimizerConfig::default()).unwrap().value.to_f64()
}

fn finite(b: Bits) -> f64 {
    b.to_f64()
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    o.close("D_Phi+(N0||D)", value(DivergenceKind::DPhi, &n0(), &dep2()), (4.0f64 / 3.0).log2(), 1e-9);
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    o.close("S_Phi+(N0||D)", value(DivergenceKind::SPhi, &n0(), &dep2()), 0.5, 1e-9);
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    for kind in [DivergenceKind::DA, DivergenceKind::SA] {
        let v = value(kind, &n0(), &dep2());
        o.check((1.0 - 1e-6..=1.0 + 1e-9).contains(&v), format!("{}(N0||D) = {v:.10} in [1 - 1e-6, log2 d = 1]", kind.label()));
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    let report = ordering_check(&n0(), &dep2(), &OptimizerConfig::default()).unwrap();
    o.close("D_AB(N0||D)", finite(report.value(DivergenceKind::DAB)), 1.0, 1e-6);
    o.close("S_AB(N0||D)", finite(report.value(DivergenceKind::SAB)), 1.0, 1e-6);
    o.check(report.d_gap >= 0.0, format!("D_AB - max(D_A, D_Phi+) = {:e} >= 0", report.d_gap));
    o.check(report.s_gap >= 0.0, format!("S_AB - max(S_A, S_Phi+) = {:e} >= 0", report.s_gap));
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let id = KrausChannel::identity(2);
    for (kind, want, tol) in [
        (DivergenceKind::DPhi, 2.0, 1e-9),
        (DivergenceKind::SPhi, 2.0, 1e-9),
        (DivergenceKind::DA, 1.0, 1e-6),
        (DivergenceKind::SA, 1.0, 1e-6),
        (DivergenceKind::DAB, 2.0, 1e-6),
        (DivergenceKind::SAB, 2.0, 1e-6),
    ] {
        o.close(&format!("{}(I||D)", kind.label()), value(kind, &id, &dep2()), want, tol);
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let v = phi_monotonicity_violation().unwrap();
    let w = v.witness.as_ref().expect("witness");
    o.close("D_Phi+(N0||D)", w.bound, (4.0f64 / 3.0).log2(), 1e-9);
    o.close("D_Phi+(N0 o V||D o V)", finite(w.value), 1.0, 1e-9);
    o
}

/// Mixture of `rank` random pure states.
fn low_rank_state(rng: &mut ChaCha8Rng, d: usize, rank: usize) -> DensityState {
    let weights = random::simplex(rng, rank);
    let mut m = CMatrix::zeros(d, d);
    for w in weights {
        let psi = random::pure_state(rng, d);
        m = &m + &CMatrix::outer(psi.amplitudes()).scale_real(w);
    }
    DensityState::from_matrix(m).unwrap()
}

fn d_h(rho: &DensityState, sigma: &DensityState) -> Bits {
    hypothesis_divergence_zero(rho, sigma).unwrap()
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let mut convexity = f64::NEG_INFINITY;
    let mut additivity: f64 = 0.0;
    for (d, count) in [(2usize, 50u64), (3, 50)] {
        for i in 0..count {
            let mut rng = random::rng(0, ((d as u64) << 32) | i);
            let r = &mut rng;
            let rho0 = low_rank_state(r, d, 1 + i as usize % (d - 1));
            let rho1 = low_rank_state(r, d, 1 + (i as usize / 2) % (d - 1));
            let sigma0 = random::density_state(r, d);
            let sigma1 = random::density_state(r, d);
            let p = random::uniform(r);
            let mix = |a: &DensityState, b: &DensityState| {
                DensityState::from_matrix(&a.matrix().scale_real(p) + &b.matrix().scale_real(1.0 - p)).unwrap()
            };
            let lhs = finite(d_h(&mix(&rho0, &rho1), &mix(&sigma0, &sigma1)));
            let rhs = p * finite(d_h(&rho0, &sigma0)) + (1.0 - p) * finite(d_h(&rho1, &sigma1));
            convexity = convexity.max(lhs - rhs);
            let joint = finite(d_h(&rho0.tensor(&rho1), &sigma0.tensor(&sigma1)));
            let parts = finite(d_h(&rho0, &sigma0)) + finite(d_h(&rho1, &sigma1));
            additivity = additivity.max((joint - parts).abs());
        }
    }
    o.check(convexity <= 1e-9, format!("D_H joint convexity: worst excess {convexity:e} <= 1e-9 (100 instances)"));
    o.check(additivity <= 1e-9, format!("D_H additivity: worst |gap| {additivity:e} <= 1e-9 (100 instances)"));

    let table = run_table1(0, 50).unwrap();
    for v in table.iter().filter(|v| v.kind.is_closed_form()) {
        if matches!(v.property, Property::StrictAdditivity | Property::Stability) {
            o.check(
                v.worst_residual <= 1e-9,
                format!("{} {}: worst residual {:e} <= 1e-9 ({} instances)", v.kind.label(), v.property, v.worst_residual, v.instances),
            );
        }
    }
    let mismatches = table1_mismatches(&table);
    o.check(mismatches.is_empty(), format!("verdict grid matches the reference pattern (mismatches: {mismatches:?})"));
    for v in &table {
        o.lines.push(format!(
            "       {:<7} {:<20} {:<25} expected {:<4} worst {:e}",
            v.kind.label(),
            v.property.name(),
            v.verdict.name(),
            v.expected().name(),
            v.worst_residual
        ));
    }
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    let cfg = CoherenceConfig::with_scope(&OptimizerConfig::default(), FreeScope::Measurements);
    let angle = std::f64::consts::PI / 8.0;
    let bases = [
        ("|+>", PureState::from_real(&[1.0, 1.0]).unwrap()),
        ("cos(pi/8)|0> + sin(pi/8)|1>", PureState::from_real(&[angle.cos(), angle.sin()]).unwrap()),
    ];
    for (label, psi) in bases {
        let n = measurement_in_basis(&psi).unwrap();
        let reference = qubit_measurement_coherence_analytic(&psi).unwrap();
        for kind in [FreeSetKind::CreationIncoherent, FreeSetKind::DetectionCreationIncoherent] {
            let v = coherence_measure_with(kind, &n, &cfg).unwrap().value;
            o.close(&format!("C^{kind} for {label}"), v, reference.c_rel, 2e-2);
        }
        let v = coherence_measure_with(FreeSetKind::DetectionIncoherent, &n, &cfg).unwrap().value;
        let (lo, hi) = (reference.c_min - 2e-2, reference.c_rel + 2e-2);
        o.check(v >= lo && v <= hi, format!("C^d for {label} = {v:.6} in [{lo:.6}, {hi:.6}]"));
    }
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    let bell = KrausChannel::state_preparation(&maximally_entangled(2).to_density());
    let parts = Bipartition::new([1, 1], [2, 2]);
    let cfg = OptimizerConfig::default();
    let lower = entanglement_lower_bound(&bell, parts, &cfg).unwrap().value;
    o.close("entanglement lower bound", lower, 1.0, 1e-6);
    let upper = entanglement_upper_bound(&bell, parts, &cfg).unwrap().value;
    o.check(upper >= lower - 1e-6, format!("restricted upper bound {upper:.10} >= lower bound - 1e-6"));
    o
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new();
    let cfg = OptimizerConfig {
        restarts: 1,
        max_iters: 30,
        step_tolerance: 1e-4,
        structured_starts: false,
        ..OptimizerConfig::default()
    };
    let mut worst = f64::INFINITY;
    for i in 0..100u64 {
        let d = if i < 80 { 2 } else { 3 };
        let mut rng = random::rng(10, i);
        let n = random::channel(&mut rng, d, d);
        let m = random::channel(&mut rng, d, d);
        for kind in DivergenceKind::ALL {
            let v = channel_divergence(kind, &n, &m, &cfg).unwrap().value;
            worst = worst.min(v.to_f64());
        }
    }
    o.check(worst >= -1e-9, format!("non-negativity, 100 pairs x 6 kinds: smallest value {worst:e} >= -1e-9"));

    let mut s_excess = f64::NEG_INFINITY;
    let mut h_excess = f64::NEG_INFINITY;
    for i in 0..100u64 {
        let d = 2 + (i % 2) as usize;
        let mut rng = random::rng(11, i);
        let rho = low_rank_state(&mut rng, d, 1 + (i as usize / 2) % d);
        let sigma = random::density_state(&mut rng, d);
        let ch = random::channel(&mut rng, d, d);
        let (a, b) = (ch.apply(&rho).unwrap(), ch.apply(&sigma).unwrap());
        let excess = |after: Bits, before: Bits| match (after, before) {
            (Bits::Finite(x), Bits::Finite(y)) => x - y,
            (_, Bits::Infinite) => f64::NEG_INFINITY,
            (Bits::Infinite, Bits::Finite(_)) => f64::INFINITY,
        };
        s_excess = s_excess.max(excess(relative_entropy(&a, &b).unwrap(), relative_entropy(&rho, &sigma).unwrap()));
        h_excess = h_excess.max(excess(d_h(&a, &b), d_h(&rho, &sigma)));
    }
    o.check(s_excess <= 1e-9, format!("S monotonicity, 100 maps: worst excess {s_excess:e}"));
    o.check(h_excess <= 1e-9, format!("D_H monotonicity, 100 maps: worst excess {h_excess:e}"));

    let mut worst_a: f64 = 0.0;
    let mut worst_ab: f64 = 0.0;
    for i in 0..20u64 {
        let d = 2 + (i % 2) as usize;
        let mut rng = random::rng(12, i);
        let rho = random::density_state(&mut rng, d);
        let prep = KrausChannel::state_preparation(&rho);
        let s = von_neumann_entropy(&rho);
        let cfg = OptimizerConfig::default();
        worst_a = worst_a.max((channel_entropy(DivergenceKind::SA, &prep, &cfg).unwrap() - s).abs());
        worst_ab = worst_ab.max((channel_entropy(DivergenceKind::SAB, &prep, &cfg).unwrap() - s).abs());
    }
    o.check(worst_a <= 1e-6, format!("S_A entropy of preparation channels vs S(rho), 20 states: worst {worst_a:e}"));
    o.check(worst_ab <= 1e-6, format!("S_AB entropy of preparation channels vs S(rho), 20 states: worst {worst_ab:e}"));
    o
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("D_Phi+(N0||D) = log2(4/3)", criterion_1),
        ("S_Phi+(N0||D) = 1/2", criterion_2),
        ("D_A(N0||D) = S_A(N0||D) = 1", criterion_3),
        ("D_AB(N0||D) = S_AB(N0||D) = 1 with ordering", criterion_4),
        ("identity channel against depolarizing, d = 2", criterion_5),
        ("Phi+ weak monotonicity violation", criterion_6),
        ("closed-form property battery and verdict grid", criterion_7),
        ("qubit measurement coherence", criterion_8),
        ("Bell preparation entanglement bounds", criterion_9),
        ("non-negativity, state monotonicity, preparation entropies", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let status = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {status}  {name}  ({:.1?})", i + 1, start.elapsed());
        for line in &out.lines {
            println!("    {line}");
        }
        if !out.pass {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 10 criteria PASS");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} of 10 criteria PASS; failing: {failed:?}", 10 - failed.len());
        ExitCode::FAILURE
    }
}
