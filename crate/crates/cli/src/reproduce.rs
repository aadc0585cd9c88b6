//! Worked examples, each checked against its reference value.

use std::f64::consts::PI;

use chanent_core::divergence::{channel_divergence, channel_entropy, ordering_check, DivergenceKind};
use chanent_core::properties::phi_monotonicity_violation;
use chanent_core::resource::{
    coherence_measure_with, entanglement_lower_bound, entanglement_upper_bound, measurement_in_basis,
    qubit_measurement_coherence_analytic, Bipartition, CoherenceConfig, FreeScope, FreeSetKind,
};
use chanent_core::states::DensityState;
use chanent_core::{KrausChannel, OptimizerConfig, PureState};

use crate::channel_file::{load, BUNDLED_PREFIX};
use crate::commands::coherence_bound;
use crate::report::{Bound, Expect, ResultRow, RunReport};
use crate::CliError;

fn exact(value: f64) -> Expect {
    Expect::Value { value, tol: 1e-9 }
}

fn near(value: f64) -> Expect {
    Expect::Value { value, tol: 1e-6 }
}

fn bundled(report: &mut RunReport, name: &str) -> Result<KrausChannel, CliError> {
    let f = load(&format!("{BUNDLED_PREFIX}{name}"))?;
    report.inputs.push(f.digest.clone());
    f.channel()
}

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

pub fn run(report: &mut RunReport, cfg: &OptimizerConfig) -> Result<(), CliError> {
    let err = |e: chanent_core::Error| CliError::Validation(e.to_string());
    let n0 = bundled(report, "n0")?;
    let id = bundled(report, "identity2")?;
    let dep = bundled(report, "depolarizing2")?;
    let bell = bundled(report, "bellprep")?;
    let plus = bundled(report, "plusminus-measurement")?;

    // N0 against the depolarizing channel
    let d_phi = channel_divergence(DivergenceKind::DPhi, &n0, &dep, cfg).map_err(err)?.value.to_f64();
    report.push(ResultRow::new("dPhi(n0 || depolarizing)", d_phi, Bound::Exact).expect(exact((4.0f64 / 3.0).log2())));
    let s_phi = channel_divergence(DivergenceKind::SPhi, &n0, &dep, cfg).map_err(err)?.value.to_f64();
    report.push(ResultRow::new("sPhi(n0 || depolarizing)", s_phi, Bound::Exact).expect(exact(0.5)));
    for (label, n, ab) in [("n0", &n0, 1.0), ("identity2", &id, 2.0)] {
        let o = ordering_check(n, &dep, cfg).map_err(err)?;
        for kind in [DivergenceKind::DA, DivergenceKind::SA] {
            let row = ResultRow::new(format!("{}({label} || depolarizing)", kind.name()), o.value(kind).to_f64(), Bound::Lower);
            report.push(row.expect(Expect::Range(1.0 - 1e-6, 1.0 + 1e-9)));
        }
        if label == "identity2" {
            for kind in [DivergenceKind::DPhi, DivergenceKind::SPhi] {
                let row = ResultRow::new(format!("{}({label} || depolarizing)", kind.name()), o.value(kind).to_f64(), Bound::Exact);
                report.push(row.expect(exact(2.0)));
            }
        }
        for kind in [DivergenceKind::DAB, DivergenceKind::SAB] {
            let row = ResultRow::new(format!("{}({label} || depolarizing)", kind.name()), o.value(kind).to_f64(), Bound::Lower);
            report.push(row.expect(near(ab)));
        }
        report.push(ResultRow::new(format!("dAB - max(dA, dPhi) for {label}"), o.d_gap, Bound::Check).expect(Expect::AtLeast(0.0)));
        report.push(ResultRow::new(format!("sAB - max(sA, sPhi) for {label}"), o.s_gap, Bound::Check).expect(Expect::AtLeast(0.0)));
    }

    // Phi+ kinds are not monotone under pre-processing
    let v = phi_monotonicity_violation().map_err(err)?;
    let w = v.witness.as_ref().ok_or_else(|| CliError::Validation("no witness".into()))?;
    report.push(ResultRow::new("dPhi(n0 || depolarizing), reference", w.bound, Bound::Exact).expect(exact((4.0f64 / 3.0).log2())));
    report.push(
        ResultRow::new("dPhi(n0 o V || depolarizing o V)", w.value.to_f64(), Bound::Exact)
            .expect(exact(1.0))
            .note("V replaces the input by |1>"),
    );

    // channel entropies
    let s_dep = channel_entropy(DivergenceKind::SA, &dep, cfg).map_err(err)?;
    report.push(ResultRow::new("sA entropy of depolarizing2", s_dep, Bound::Upper).expect(near(1.0)));
    let s_id = channel_entropy(DivergenceKind::SAB, &id, cfg).map_err(err)?;
    report.push(ResultRow::new("sAB entropy of identity2", s_id, Bound::Upper).expect(near(-1.0)));
    let rho = DensityState::diagonal(&[0.25, 0.75]).map_err(err)?;
    let s_prep = channel_entropy(DivergenceKind::SA, &KrausChannel::state_preparation(&rho), cfg).map_err(err)?;
    report.push(ResultRow::new("sA entropy of prep(diag(1/4, 3/4))", s_prep, Bound::Upper).expect(near(h2(0.25))));

    // measurement coherence
    let ccfg = CoherenceConfig::with_scope(cfg, FreeScope::Measurements);
    let tilted = PureState::from_real(&[(PI / 8.0).cos(), (PI / 8.0).sin()]).map_err(err)?;
    let bases = [
        ("|+>", plus, PureState::from_real(&[1.0, 1.0]).map_err(err)?),
        ("cos(pi/8)|0> + sin(pi/8)|1>", measurement_in_basis(&tilted).map_err(err)?, tilted),
    ];
    for (label, n, psi) in bases {
        let reference = qubit_measurement_coherence_analytic(&psi).map_err(err)?;
        for set in [FreeSetKind::CreationIncoherent, FreeSetKind::DetectionCreationIncoherent, FreeSetKind::DetectionIncoherent] {
            let r = coherence_measure_with(set, &n, &ccfg).map_err(err)?;
            let expect = if set == FreeSetKind::DetectionIncoherent {
                Expect::Range(reference.c_min - 2e-2, reference.c_rel + 2e-2)
            } else {
                Expect::Value { value: reference.c_rel, tol: 2e-2 }
            };
            report.push(ResultRow::new(format!("C^{set} of measurement in {label}"), r.value, coherence_bound(&r)).expect(expect));
        }
    }

    // Bell-state preparation
    let parts = Bipartition::new([1, 1], [2, 2]);
    let lower = entanglement_lower_bound(&bell, parts, cfg).map_err(err)?.value;
    report.push(ResultRow::new("E lower(bellprep)", lower, Bound::Lower).expect(near(1.0)));
    let upper = entanglement_upper_bound(&bell, parts, cfg).map_err(err)?;
    report.push(ResultRow::new("E upper(bellprep)", upper.value, coherence_bound(&upper)).expect(Expect::AtLeast(lower - 1e-6)));
    Ok(())
}
