//! Resource measures `min_{C free} S_AB(N || C)` for coherence and
//! entanglement of channels.
//!
//! Minimizations run over parameterized families whose members are free by
//! construction, so every reported value is attained by a concrete free
//! channel (returned as the witness). The inner `S_AB` is itself a search, a
//! lower bound of the true divergence.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::channels::{channel_distance, compose, KrausChannel};
use crate::error::{Error, Result};

pub mod coherence;
pub mod entanglement;

pub use coherence::{
    coherence_measure, coherence_measure_with, measurement_in_basis, qubit_measurement_coherence_analytic,
    CoherenceConfig, MeasurementCoherence,
};
pub use entanglement::{
    entanglement_lower_bound, entanglement_upper_bound, separability_residual, LowerBoundResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FreeSetKind {
    /// `Delta o C = Delta o C o Delta`.
    DetectionIncoherent,
    /// `C o Delta = Delta o C o Delta`.
    CreationIncoherent,
    /// `Delta o C = C o Delta`.
    DetectionCreationIncoherent,
    /// Maps product inputs to PPT outputs across a fixed bipartition.
    SeparableRestricted,
}

impl FreeSetKind {
    pub const COHERENCE: [FreeSetKind; 3] = [
        FreeSetKind::DetectionIncoherent,
        FreeSetKind::CreationIncoherent,
        FreeSetKind::DetectionCreationIncoherent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FreeSetKind::DetectionIncoherent => "d",
            FreeSetKind::CreationIncoherent => "c",
            FreeSetKind::DetectionCreationIncoherent => "dc",
            FreeSetKind::SeparableRestricted => "sep",
        }
    }
}

impl fmt::Display for FreeSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FreeSetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d" | "detection" => Ok(FreeSetKind::DetectionIncoherent),
            "c" | "creation" => Ok(FreeSetKind::CreationIncoherent),
            "dc" | "detection-creation" => Ok(FreeSetKind::DetectionCreationIncoherent),
            "sep" | "separable" => Ok(FreeSetKind::SeparableRestricted),
            _ => Err(Error::InvalidState(String::from("unknown free set ") + s)),
        }
    }
}

/// Which channels a coherence free set ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FreeScope {
    /// Measurement-form free channels mixed with incoherent unitaries.
    #[default]
    Channels,
    /// Measurement-form free channels only: a diagonal POVM followed by
    /// arbitrary outputs (`d`), any POVM followed by `|a><a|` (`c`), a
    /// diagonal POVM followed by `|a><a|` (`dc`).
    Measurements,
}

impl FreeScope {
    pub fn name(self) -> &'static str {
        match self {
            FreeScope::Channels => "channels",
            FreeScope::Measurements => "measurements",
        }
    }
}

impl FromStr for FreeScope {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "channels" | "channel" => Ok(FreeScope::Channels),
            "measurements" | "measurement" => Ok(FreeScope::Measurements),
            _ => Err(Error::InvalidState(String::from("unknown scope ") + s)),
        }
    }
}

/// What a reported resource value bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundKind {
    /// Attained by a member of the full free set: an upper bound of the
    /// measure (up to the inner search, which is a lower bound).
    UpperBoundOfMeasure,
    /// Attained inside a strict subset of the free set.
    RestrictedFamilyUpperBound,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::UpperBoundOfMeasure => "upper_bound_of_measure",
            BoundKind::RestrictedFamilyUpperBound => "restricted_family_upper_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceResult {
    pub kind: FreeSetKind,
    pub scope: FreeScope,
    /// `S_AB(N || witness)`, in bits.
    pub value: f64,
    pub achieving_free_channel: KrausChannel,
    pub bound_kind: BoundKind,
    /// `is_free` residual of the witness.
    pub witness_residual: f64,
}

/// Result of a free-set membership check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeCheck {
    pub free: bool,
    pub residual: f64,
}

/// Split of a bipartite channel `A'C' -> AC`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bipartition {
    pub dims_in: [usize; 2],
    pub dims_out: [usize; 2],
}

impl Bipartition {
    pub fn new(dims_in: [usize; 2], dims_out: [usize; 2]) -> Self {
        Self { dims_in, dims_out }
    }

    /// Splits each side as `p x d/p` with `p` the smallest prime factor
    /// (`1 x 1` for dimension one).
    pub fn infer(dim_in: usize, dim_out: usize) -> Self {
        Self { dims_in: split(dim_in), dims_out: split(dim_out) }
    }

    pub fn check(&self, ch: &KrausChannel) -> Result<()> {
        crate::error::ensure_dim(self.dims_in[0] * self.dims_in[1], ch.dim_in())?;
        crate::error::ensure_dim(self.dims_out[0] * self.dims_out[1], ch.dim_out())
    }
}

fn split(d: usize) -> [usize; 2] {
    if d <= 1 {
        return [1, 1];
    }
    let p = (2..=d).find(|p| d.is_multiple_of(*p)).unwrap_or(d);
    [p, d / p]
}

/// Membership test for `kind`; separability uses [`Bipartition::infer`].
pub fn is_free(kind: FreeSetKind, ch: &KrausChannel, tol: f64) -> Result<FreeCheck> {
    is_free_bipartite(kind, ch, Bipartition::infer(ch.dim_in(), ch.dim_out()), tol)
}

/// Membership test with an explicit bipartition (ignored by coherence kinds).
pub fn is_free_bipartite(kind: FreeSetKind, ch: &KrausChannel, parts: Bipartition, tol: f64) -> Result<FreeCheck> {
    let residual = match kind {
        FreeSetKind::SeparableRestricted => separability_residual(ch, parts)?,
        _ => coherence_residual(kind, ch)?,
    };
    Ok(FreeCheck { free: residual <= tol, residual })
}

/// Choi-state Frobenius distance between the two sides of the defining
/// identity of a coherence free set.
pub fn coherence_residual(kind: FreeSetKind, ch: &KrausChannel) -> Result<f64> {
    let din = KrausChannel::dephasing(ch.dim_in());
    let dout = KrausChannel::dephasing(ch.dim_out());
    let out_after = || compose(&dout, ch);
    let in_before = || compose(ch, &din);
    let both = || compose(&dout, &compose(ch, &din)?);
    match kind {
        FreeSetKind::DetectionIncoherent => channel_distance(&out_after()?, &both()?),
        FreeSetKind::CreationIncoherent => channel_distance(&in_before()?, &both()?),
        FreeSetKind::DetectionCreationIncoherent => channel_distance(&out_after()?, &in_before()?),
        FreeSetKind::SeparableRestricted => Err(Error::InvalidState("not a coherence free set".into())),
    }
}

/// All coherence kinds whose free set contains `ch`.
pub fn coherence_free_kinds(ch: &KrausChannel, tol: f64) -> Result<Vec<FreeSetKind>> {
    let mut out = Vec::new();
    for k in FreeSetKind::COHERENCE {
        if coherence_residual(k, ch)? <= tol {
            out.push(k);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{CMatrix, C64};

    fn hadamard() -> KrausChannel {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        KrausChannel::unitary(CMatrix::from_real_rows(&[&[h, h], &[h, -h]])).unwrap()
    }

    #[test]
    fn dephasing_is_free_for_every_coherence_kind() {
        let d = KrausChannel::dephasing(2);
        for k in FreeSetKind::COHERENCE {
            let r = is_free(k, &d, 1e-9).unwrap();
            assert!(r.free, "{k}: {}", r.residual);
        }
    }

    #[test]
    fn hadamard_creates_coherence() {
        let r = is_free(FreeSetKind::CreationIncoherent, &hadamard(), 1e-9).unwrap();
        assert!(!r.free);
        assert!(r.residual > 0.1);
    }

    #[test]
    fn hadamard_is_in_no_coherence_free_set() {
        assert!(coherence_free_kinds(&hadamard(), 1e-9).unwrap().is_empty());
    }

    #[test]
    fn phase_gate_is_free() {
        let u = CMatrix::from_fn(2, 2, |i, j| if i != j { C64::new(0.0, 0.0) } else if i == 0 { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) });
        let ch = KrausChannel::unitary(u).unwrap();
        assert_eq!(coherence_free_kinds(&ch, 1e-9).unwrap().len(), 3);
    }

    #[test]
    fn bipartition_inference() {
        assert_eq!(Bipartition::infer(4, 6), Bipartition::new([2, 2], [2, 3]));
        assert_eq!(Bipartition::infer(1, 4), Bipartition::new([1, 1], [2, 2]));
        assert_eq!(Bipartition::infer(3, 9), Bipartition::new([3, 1], [3, 3]));
    }

    #[test]
    fn names_round_trip() {
        for k in [
            FreeSetKind::DetectionIncoherent,
            FreeSetKind::CreationIncoherent,
            FreeSetKind::DetectionCreationIncoherent,
            FreeSetKind::SeparableRestricted,
        ] {
            assert_eq!(k.name().parse::<FreeSetKind>().unwrap(), k);
        }
    }
}
