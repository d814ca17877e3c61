//! Channel model, performance metrics and the joint beamforming / mode-selection
//! optimizer for ISAC systems assisted by a reconfigurable distributed antenna and
//! reflecting surface (RDARS).
//!
//! Every RDARS element works either in reflection mode (a passive unit-modulus phase
//! shifter) or in connected mode (a remote antenna wired to the base station). The
//! optimizer maximizes the radar output SNR of a point target subject to per-user
//! SINR targets and a total power budget, alternating over the receive filter, the
//! compound transmit beamformer, the reflection phases and the two selection
//! matrices.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, experiment sweeps and the
//! command line live in the companion `rdars-sim` crate.

#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod assignment;
pub mod channel;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod scenario;
pub mod schemes;
pub mod socp;
pub mod surrogate;

pub use channel::{assemble_composites, synthesize_channels, ChannelSet, Composites, RdarsState};
pub use error::{Error, Result};
pub use linalg::{C64, CMat, CVec};
pub use metrics::{beampattern_bs, beampattern_rdars, penalty_residuals, radar_snr, user_sinr, Beamformer};
pub use optimizer::{run_joint_optimization, BlockFlags, JointSolution, TraceRow};
pub use scenario::{derive_geometry, Geometry, SystemConfig};
pub use schemes::{apply_scheme, Scheme, SchemeSpec};
