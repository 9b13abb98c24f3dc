//! Software model of a hybrid-dataflow negacyclic NTT accelerator.
//!
//! * [`modmath`]: word-size modular arithmetic, Shoup multiplication,
//!   NTT-prime search and twiddle tables.
//! * [`poly`]: polynomials in `Z_q[X]/(X^n + 1)` and the golden transforms.
//! * [`fragmentation`]: the XOR bank mapping and its conflict/burst checks.
//! * [`twiddle`]: per-NTT-unit twiddle assignment and replication accounting.
//! * [`dataflow`]: engine configuration, mode schedule and the bit-exact
//!   functional simulator.
//! * [`perf`]: roofline, cycle and bandwidth model.

pub mod dataflow;
pub mod error;
pub mod fragmentation;
pub mod hply;
pub mod modmath;
pub mod perf;
pub mod poly;
pub mod twiddle;

pub use dataflow::{run_transform, EngineConfig, ModeSchedule, SimTrace, Simulator};
pub use error::{Error, Result};
pub use fragmentation::{map_layout, BankLayout};
pub use modmath::{ModulusContext, PrimeModulus, ShoupPair};
pub use poly::Polynomial;
pub use twiddle::{arrange_twiddles, TwiddleAssignment};
