//! Parameter identification for lithium-ion cells.
//!
//! The crate is organised around a single-particle model with electrolyte
//! (`model`), the test-current generators that excite it (`profiles`),
//! variance-based sensitivity analysis (`sensitivity`), bounded global and
//! local optimizers (`optimize`), and the identification pipelines that tie
//! them together (`identify`). `harness` holds file I/O, synthetic data
//! generation and reporting.

pub mod error;
pub mod harness;
pub mod identify;
pub mod model;
pub mod optimize;
pub mod profiles;
pub mod sensitivity;

pub use error::{Error, Result};
pub use model::{
    CellGeometry, CellParameters, CellState, CompositionParams, MaterialConstants, OcpCurve,
    StoichPair, TransportParams, VoltageTrace,
};
pub use profiles::{CurrentProfile, CutPoints, PulseSet, SegmentedTrace};
