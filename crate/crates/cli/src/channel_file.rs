//! Channel files: `{name, dim_in, dim_out, kraus}` with every entry a
//! `[re, im]` pair, plus an optional `measurement` flag.

use std::fs;

use chanent_core::channels::{validate, ValidationReport, TP_TOL};
use chanent_core::{CMatrix, KrausChannel, C64};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::report::InputDigest;
use crate::CliError;

/// Prefix that selects a channel shipped inside the binary.
pub const BUNDLED_PREFIX: &str = "bundled:";

pub const BUNDLED: [(&str, &str); 6] = [
    ("n0", include_str!("../channels/n0.json")),
    ("identity2", include_str!("../channels/identity2.json")),
    ("depolarizing2", include_str!("../channels/depolarizing2.json")),
    ("dephasing2", include_str!("../channels/dephasing2.json")),
    ("bellprep", include_str!("../channels/bellprep.json")),
    ("plusminus-measurement", include_str!("../channels/plusminus-measurement.json")),
];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    #[serde(default)]
    name: Option<String>,
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<Vec<Vec<[f64; 2]>>>,
    /// Marks a measure-and-prepare channel, for which coherence defaults to
    /// the measurement free sets.
    #[serde(default)]
    measurement: bool,
}

#[derive(Debug, Clone)]
pub struct ChannelFile {
    pub name: String,
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<CMatrix>,
    pub measurement: bool,
    pub digest: InputDigest,
}

impl ChannelFile {
    pub fn validation(&self) -> ValidationReport {
        validate(self.dim_in, self.dim_out, &self.kraus)
    }

    /// The channel, validated at the load tolerance.
    pub fn channel(&self) -> Result<KrausChannel, CliError> {
        let report = self.validation();
        if !report.passed {
            return Err(CliError::Validation(describe_failure(&self.digest.source, &report)));
        }
        KrausChannel::new(self.dim_in, self.dim_out, self.kraus.clone()).map_err(|e| CliError::Validation(e.to_string()))
    }
}

pub fn describe_failure(source: &str, report: &ValidationReport) -> String {
    if report.shape_errors.is_empty() && report.residual.is_finite() {
        format!("{source}: not trace preserving, max |I - sum K^dag K| = {:e} > {TP_TOL:e}", report.residual)
    } else if report.shape_errors.is_empty() {
        format!("{source}: dimensions must be positive")
    } else {
        format!("{source}: {}", report.shape_errors.join("; "))
    }
}

/// Reads a file, or a bundled channel given as `bundled:<name>`.
pub fn load(source: &str) -> Result<ChannelFile, CliError> {
    let text = match source.strip_prefix(BUNDLED_PREFIX) {
        Some(name) => BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| t.to_string())
            .ok_or_else(|| CliError::Parse(format!("no bundled channel `{name}`; available: {}", bundled_names())))?,
        None => fs::read_to_string(source).map_err(|e| CliError::Io(format!("{source}: {e}")))?,
    };
    parse(source, &text)
}

pub fn bundled_names() -> String {
    BUNDLED.iter().map(|(n, _)| *n).collect::<Vec<_>>().join(", ")
}

pub fn parse(source: &str, text: &str) -> Result<ChannelFile, CliError> {
    let raw: RawChannel = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("{source}: {e}")))?;
    let kraus = raw
        .kraus
        .iter()
        .enumerate()
        .map(|(k, rows)| matrix(rows).ok_or_else(|| CliError::Parse(format!("{source}: Kraus operator {k} has ragged or empty rows"))))
        .collect::<Result<Vec<_>, _>>()?;
    if kraus.is_empty() {
        return Err(CliError::Parse(format!("{source}: no Kraus operators")));
    }
    let sha256 = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
    let name = raw.name.unwrap_or_else(|| source.to_string());
    Ok(ChannelFile {
        digest: InputDigest { source: source.to_string(), name: name.clone(), sha256 },
        name,
        dim_in: raw.dim_in,
        dim_out: raw.dim_out,
        kraus,
        measurement: raw.measurement,
    })
}

fn matrix(rows: &[Vec<[f64; 2]>]) -> Option<CMatrix> {
    let cols = rows.first()?.len();
    if cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return None;
    }
    let data = rows.iter().flatten().map(|&[re, im]| C64::new(re, im)).collect();
    Some(CMatrix::from_vec(rows.len(), cols, data))
}
