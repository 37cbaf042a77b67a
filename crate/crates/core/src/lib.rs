//! Small-signal modelling and stability analysis of hybrid AC/DC microgrids.
//!
//! The crate builds linearized state-space models of droop-controlled DC-DC
//! converters, dq-frame voltage-source converters and an interlinking
//! converter, assembles them into sub-grids and a hybrid grid, and analyses
//! the result with its own dense eigen-solver and pole-placement routines.

pub mod linalg;
pub mod serial;
pub mod sstate;
pub mod acconv;
pub mod dcconv;
pub mod interlink;
pub mod params;
pub mod network;
pub mod stability;
