use chanent_core::divergence::{channel_divergence, channel_entropy, divergence_to_depolarizing, DivergenceKind};
use chanent_core::properties::{run_table1, table1_mismatches};
use chanent_core::resource::{
    coherence_measure_with, entanglement_lower_bound, entanglement_upper_bound, Bipartition, BoundKind, CoherenceConfig,
    CoherenceResult, FreeScope, FreeSetKind,
};
use chanent_core::{KrausChannel, OptimizerConfig};

use crate::channel_file::{describe_failure, load, ChannelFile};
use crate::report::{Bound, ResultRow, RunReport};
use crate::CliError;

fn core_err(e: chanent_core::Error) -> CliError {
    CliError::Validation(e.to_string())
}

fn open(report: &mut RunReport, source: &str) -> Result<(ChannelFile, KrausChannel), CliError> {
    let file = load(source)?;
    report.inputs.push(file.digest.clone());
    let ch = file.channel()?;
    Ok((file, ch))
}

pub fn validate(report: &mut RunReport, source: &str, tol: f64) -> Result<(), CliError> {
    let file = load(source)?;
    report.inputs.push(file.digest.clone());
    let v = file.validation();
    let ok = v.shape_errors.is_empty() && v.residual <= tol;
    report.push(
        ResultRow::new("trace-preservation residual", v.residual, Bound::Check)
            .pass(ok)
            .note(format!("{} Kraus operators, {} -> {}, tolerance {tol:e}", v.kraus_count, v.dim_in, v.dim_out)),
    );
    if ok {
        Ok(())
    } else {
        Err(CliError::Validation(describe_failure(source, &v)))
    }
}

pub fn divergence(
    report: &mut RunReport,
    kind: DivergenceKind,
    channel: &str,
    reference: Option<&str>,
    cfg: &OptimizerConfig,
) -> Result<(), CliError> {
    let (nf, n) = open(report, channel)?;
    let (label, r) = match reference {
        Some(path) => {
            let (mf, m) = open(report, path)?;
            (mf.name, channel_divergence(kind, &n, &m, cfg).map_err(core_err)?)
        }
        None => ("depolarizing".to_string(), divergence_to_depolarizing(kind, &n, cfg).map_err(core_err)?),
    };
    let bound = if r.lower_bound_only { Bound::Lower } else { Bound::Exact };
    let note = if r.lower_bound_only { format!("{} starts converged", r.restarts_converged) } else { String::new() };
    report.push(ResultRow::new(format!("{}({} || {label})", kind.name(), nf.name), r.value.to_f64(), bound).note(note));
    Ok(())
}

pub fn entropy(report: &mut RunReport, kind: DivergenceKind, channel: &str, cfg: &OptimizerConfig) -> Result<(), CliError> {
    let (nf, n) = open(report, channel)?;
    let v = channel_entropy(kind, &n, cfg).map_err(core_err)?;
    // log d minus a lower bound of the divergence
    let bound = if kind.is_closed_form() { Bound::Exact } else { Bound::Upper };
    report.push(ResultRow::new(format!("{} entropy of {}", kind.name(), nf.name), v, bound));
    Ok(())
}

pub fn coherence_bound(r: &CoherenceResult) -> Bound {
    match r.bound_kind {
        BoundKind::UpperBoundOfMeasure => Bound::Upper,
        BoundKind::RestrictedFamilyUpperBound => Bound::RestrictedUpper,
    }
}

pub fn coherence(
    report: &mut RunReport,
    set: FreeSetKind,
    channel: &str,
    scope: Option<FreeScope>,
    cfg: &OptimizerConfig,
) -> Result<(), CliError> {
    let (nf, n) = open(report, channel)?;
    let scope = scope.unwrap_or(if nf.measurement { FreeScope::Measurements } else { FreeScope::Channels });
    let r = coherence_measure_with(set, &n, &CoherenceConfig::with_scope(cfg, scope)).map_err(core_err)?;
    report.push(
        ResultRow::new(format!("C^{set}({})", nf.name), r.value, coherence_bound(&r))
            .note(format!("scope {}, witness residual {:.1e}", scope.name(), r.witness_residual)),
    );
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntanglementBound {
    Lower,
    Upper,
}

pub fn entanglement(
    report: &mut RunReport,
    which: EntanglementBound,
    channel: &str,
    cfg: &OptimizerConfig,
) -> Result<(), CliError> {
    let (nf, n) = open(report, channel)?;
    let parts = Bipartition::infer(n.dim_in(), n.dim_out());
    let split = format!(
        "{}x{} -> {}x{}",
        parts.dims_in[0], parts.dims_in[1], parts.dims_out[0], parts.dims_out[1]
    );
    let row = match which {
        EntanglementBound::Lower => {
            let r = entanglement_lower_bound(&n, parts, cfg).map_err(core_err)?;
            ResultRow::new(format!("E lower({})", nf.name), r.value, Bound::Lower)
        }
        EntanglementBound::Upper => {
            let r = entanglement_upper_bound(&n, parts, cfg).map_err(core_err)?;
            ResultRow::new(format!("E upper({})", nf.name), r.value, coherence_bound(&r))
        }
    };
    report.push(row.note(format!("bipartition {split}")));
    Ok(())
}

pub fn properties(report: &mut RunReport, seed: u64, samples: usize) -> Result<(), CliError> {
    let grid = run_table1(seed, samples).map_err(core_err)?;
    for v in &grid {
        report.push(
            ResultRow::new(format!("{} {}", v.kind.name(), v.property.name()), v.worst_residual, Bound::Sampled)
                .pass(v.matches_expected())
                .note(format!("{}, expected {}, {} instances", v.verdict.name(), v.expected().name(), v.instances)),
        );
    }
    let mismatches = table1_mismatches(&grid).len();
    report.push(ResultRow::new("verdict grid mismatches", mismatches as f64, Bound::Check).pass(mismatches == 0));
    Ok(())
}
