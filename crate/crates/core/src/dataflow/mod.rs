//! The hybrid-dataflow engine: configuration, mode scheduling, functional
//! simulation and trace auditing.

pub mod audit;
pub mod config;
pub mod schedule;
pub mod sim;

pub use audit::{audit_trace, AuditCheck, AuditReport};
pub use config::{EngineConfig, Half};
pub use schedule::{
    classify_stages, mode_schedule, BuMode, HalfModes, ModeSchedule, StageClass, StageKind,
};
pub use sim::{butterfly, run_transform, BuOp, ButterflyUnit, SimTrace, Simulator, TraceRecord};
