//! # chanent-core
//!
//! Relative entropies of quantum channels, channel entropies, and the resource
//! measures built on top of them.
//!
//! Three input scenarios are supported for comparing a channel `N` against a
//! hypothesis `M`, each in a one-shot (hypothesis-testing, zero smoothing) and an
//! asymptotic (Umegaki relative entropy) flavour:
//!
//! | kind  | input                                   | evaluation          |
//! |-------|-----------------------------------------|---------------------|
//! | `DA`, `SA`   | pure state on the channel input only   | optimizer (lower bound) |
//! | `DPhi`, `SPhi` | maximally entangled state (Choi state) | closed form |
//! | `DAB`, `SAB` | pure state on input plus ancilla       | optimizer (lower bound) |
//!
//! Everything here is a pure function on immutable values. The crate is
//! `no_std` (it needs `alloc`); the `parallel` feature runs optimizer restarts
//! on rayon with results identical to the serial path.
//!
//! All logarithms are base 2.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

mod math;

pub mod channels;
pub mod divergence;
pub mod error;
pub mod linalg;
pub mod optimizer;
pub mod properties;
pub mod random;
pub mod resource;
pub mod states;

pub use channels::{ChoiMatrix, KrausChannel, Measurement, Superchannel};
pub use divergence::{DivergenceKind, DivergenceResult};
pub use error::{Error, Result};
pub use linalg::{CMatrix, EigenDecomposition, C64};
pub use optimizer::{OptResult, OptimizerConfig};
pub use states::{Bits, DensityState, PureState};
