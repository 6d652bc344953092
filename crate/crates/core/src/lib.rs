//! Christoffel-weighted sampling, weighted least-squares recovery and certified
//! worst-case errors over reproducing kernel Hilbert space balls.

pub mod alpha;
pub mod basis;
pub mod bounds;
pub mod christoffel;
pub mod error;
pub mod grid;
pub mod harness;
pub mod index_set;
pub mod lift;
pub mod linalg;
pub mod rate;
pub mod recovery;
pub mod rkhs;
pub mod sampling;
pub mod special;
pub mod spectrum;
pub mod worstcase;

pub use basis::{BasisFamily, BasisSystem, MeasureSpace, Points, C64};
pub use error::{Error, Result};
pub use recovery::{Approximant, RecoveryOperator, Weighting};
pub use rkhs::RkhsSpec;
pub use sampling::{SamplePlan, SamplingDensity};
