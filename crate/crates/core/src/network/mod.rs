//! Grid description, steady-state solution and linear assembly of DC and AC
//! sub-grids and the hybrid grid.

mod assembly;
pub mod config;
mod equilibrium;
mod frame;

pub use assembly::{
    assemble, assemble_ac_subgrid, assemble_at, assemble_converter, assemble_dc_subgrid,
    assemble_grid, assemble_hybrid, Scope,
};
pub use config::{
    BusConfig, BusKind, DcConverterConfig, GridConfig, IcConfig, LineConfig, LineKind, LoadConfig,
    LoadKind, VscConfig,
};
pub use equilibrium::{solve_equilibrium, OperatingPoints};
pub use frame::{frame_rotation, frame_rotation_derivative, linearized_rotation};

use crate::params::InvalidParam;
use crate::sstate::LtiError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("`{field}` refers to unknown bus `{bus}`")]
    UnknownBus { field: String, bus: String },
    #[error("bus `{0}` has nothing connected to it")]
    IslandedBus(String),
    #[error("the configuration has no interlinking converter")]
    MissingInterlink,
    #[error("unknown converter `{0}`")]
    UnknownConverter(String),
    #[error("steady-state iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence {
        residual: f64,
        iterate: Vec<f64>,
        iterations: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Param(#[from] InvalidParam),
    #[error(transparent)]
    Lti(#[from] LtiError),
}
