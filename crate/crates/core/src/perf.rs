//! Analytical roofline, cycle and bandwidth model.
//!
//! Work is counted in radix-2 butterflies, `(n/2) log2 n` per transform, and
//! traffic in bytes moved to or from off-chip memory. `w` (twiddle words) is
//! charged per butterfly for the stage-based design, per pipeline pass of a
//! coefficient pair for the pipeline-based design, and per coefficient for
//! the hybrid design (`w = 1` loads the whole `n`-entry table once per
//! `twiddle_reuse` transforms).
//!
//! Throughput is reported in transforms per second.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::Serialize;

use crate::dataflow::config::EngineConfig;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArchKind {
    StageBased,
    PipelineBased,
    Hybrid,
}

impl ArchKind {
    pub const ALL: [ArchKind; 3] = [
        ArchKind::StageBased,
        ArchKind::PipelineBased,
        ArchKind::Hybrid,
    ];
}

impl fmt::Display for ArchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArchKind::StageBased => "stage",
            ArchKind::PipelineBased => "pipeline",
            ArchKind::Hybrid => "hybrid",
        })
    }
}

impl FromStr for ArchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stage" => Ok(ArchKind::StageBased),
            "pipeline" => Ok(ArchKind::PipelineBased),
            "hybrid" => Ok(ArchKind::Hybrid),
            other => Err(Error::BadConfig(format!("unknown architecture {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RooflineParams {
    /// `b`: bytes per coefficient or twiddle word.
    pub bytes_per_element: f64,
    /// `w`: twiddle words fetched per unit of data access (see module docs).
    pub twiddle_words: f64,
    /// Transforms sharing one hybrid twiddle-table load.
    pub twiddle_reuse: f64,
    pub freq_mhz: f64,
    pub hbm_gbps: f64,
    /// Engine length used for hybrid rows.
    pub n_part: usize,
    /// Pipeline registers per NTT unit; fill/drain is `log2 n_part` times this.
    pub nttu_depth: u64,
}

impl Default for RooflineParams {
    fn default() -> Self {
        Self {
            bytes_per_element: 8.0,
            twiddle_words: 1.0,
            twiddle_reuse: 1.0,
            freq_mhz: 300.0,
            hbm_gbps: 460.0,
            n_part: 256,
            nttu_depth: 1,
        }
    }
}

impl RooflineParams {
    pub fn for_config(config: &EngineConfig) -> Self {
        Self {
            freq_mhz: config.freq_mhz,
            hbm_gbps: config.hbm_gbps,
            n_part: config.n_part,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.bytes_per_element > 0.0
            && self.twiddle_words >= 0.0
            && self.twiddle_reuse > 0.0
            && self.freq_mhz > 0.0
            && self.hbm_gbps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::BadConfig(
                "roofline parameters must be positive".into(),
            ))
        }
    }
}

pub fn butterflies(n: usize) -> f64 {
    (n / 2) as f64 * n.trailing_zeros() as f64
}

fn check_shape(kind: ArchKind, n: usize, p: usize, params: &RooflineParams) -> Result<()> {
    if n < 4 || !n.is_power_of_two() || p == 0 || !p.is_power_of_two() {
        return Err(Error::BadConfig(format!(
            "n = {n} and p = {p} must be powers of two"
        )));
    }
    match kind {
        ArchKind::StageBased if p > n / 2 => {
            Err(Error::BadConfig(format!("p = {p} exceeds n/2 butterflies")))
        }
        ArchKind::PipelineBased if !(n.trailing_zeros() as usize).is_multiple_of(p) => {
            Err(Error::BadConfig(format!(
                "pipeline depth p = {p} must divide log2 n = {}",
                n.trailing_zeros()
            )))
        }
        ArchKind::Hybrid => {
            EngineConfig::with_clock(n, params.n_part, p, params.freq_mhz, params.hbm_gbps)
                .map(|_| ())
        }
        _ => Ok(()),
    }
}

/// Off-chip bytes moved by one transform.
pub fn traffic_bytes(kind: ArchKind, n: usize, p: usize, params: &RooflineParams) -> f64 {
    let b = params.bytes_per_element;
    let w = params.twiddle_words;
    let log_n = n.trailing_zeros() as f64;
    match kind {
        ArchKind::StageBased => butterflies(n) * b * (2.0 + w),
        ArchKind::PipelineBased => (n / 2) as f64 * (log_n / p as f64) * b * (2.0 + w),
        ArchKind::Hybrid => n as f64 * b * (2.0 + w / params.twiddle_reuse),
    }
}

/// Butterflies per off-chip byte.
pub fn intensity(kind: ArchKind, n: usize, p: usize, params: &RooflineParams) -> f64 {
    butterflies(n) / traffic_bytes(kind, n, p, params)
}

/// Butterflies per scratchpad byte for the hybrid engine: every iteration
/// reads and writes `n_part` coefficients.
pub fn scratchpad_intensity(config: &EngineConfig, params: &RooflineParams) -> f64 {
    let bytes = config.iterations() as f64 * config.n_part as f64 * 2.0 * params.bytes_per_element;
    butterflies(config.n) / bytes
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CycleEstimate {
    /// `iterations * n_part / 2p`: one `2p`-wide round per cycle, Swap passes included.
    pub steady_state: u64,
    pub fill_drain: u64,
    pub total: u64,
}

pub fn default_fill_drain(config: &EngineConfig, params: &RooflineParams) -> u64 {
    config.log_n_part() as u64 * params.nttu_depth
}

pub fn cycle_estimate(config: &EngineConfig, fill_drain: u64) -> Result<CycleEstimate> {
    config.validate()?;
    let steady_state = (config.iterations() * config.rounds_per_iteration()) as u64;
    Ok(CycleEstimate {
        steady_state,
        fill_drain,
        total: steady_state + fill_drain,
    })
}

/// `freq / cycles`. With `fill_drain = 0` this is the model ceiling.
pub fn peak_throughput(config: &EngineConfig, fill_drain: u64) -> Result<f64> {
    let cycles = cycle_estimate(config, fill_drain)?;
    Ok(config.freq_mhz * 1e6 / cycles.total as f64)
}

fn kind_cycles(
    kind: ArchKind,
    n: usize,
    p: usize,
    params: &RooflineParams,
    fill_drain: u64,
) -> Result<u64> {
    check_shape(kind, n, p, params)?;
    let log_n = n.trailing_zeros() as u64;
    Ok(match kind {
        ArchKind::StageBased => (n / 2 / p) as u64 * log_n,
        ArchKind::PipelineBased => (log_n / p as u64) * (n / 2) as u64,
        ArchKind::Hybrid => {
            let cfg =
                EngineConfig::with_clock(n, params.n_part, p, params.freq_mhz, params.hbm_gbps)?;
            cycle_estimate(&cfg, fill_drain)?.total
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandwidthDemand {
    pub data_gbps: f64,
    pub twiddle_gbps: f64,
    pub total_gbps: f64,
    pub hbm_gbps: f64,
    pub memory_bound: bool,
}

/// Off-chip bandwidth needed to sustain `achieved_ops` hybrid transforms per
/// second: `2n` coefficients each, plus the amortised twiddle table.
pub fn bandwidth_demand(
    config: &EngineConfig,
    achieved_ops: f64,
    params: &RooflineParams,
) -> BandwidthDemand {
    let n = config.n as f64;
    let b = params.bytes_per_element;
    let data_gbps = achieved_ops * 2.0 * n * b / 1e9;
    let twiddle_gbps = achieved_ops * params.twiddle_words * n * b / params.twiddle_reuse / 1e9;
    let total_gbps = data_gbps + twiddle_gbps;
    BandwidthDemand {
        data_gbps,
        twiddle_gbps,
        total_gbps,
        hbm_gbps: config.hbm_gbps,
        memory_bound: total_gbps > config.hbm_gbps,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    Compute,
    Memory,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Bound::Compute => "compute",
            Bound::Memory => "memory",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerfReport {
    pub kind: ArchKind,
    pub n: usize,
    pub p: usize,
    /// Butterflies per off-chip byte.
    pub intensity: f64,
    /// Hybrid only: butterflies per scratchpad byte.
    pub scratchpad_intensity: Option<f64>,
    pub compute_ceiling_ops: f64,
    pub memory_ceiling_ops: f64,
    pub peak_throughput_ops: f64,
    pub cycle_estimate: u64,
    pub bandwidth_demand_gbps: f64,
    pub bound: Bound,
}

impl PerfReport {
    /// `min(compute, memory)` ceiling in transforms per second.
    pub fn ceiling(&self) -> f64 {
        self.peak_throughput_ops
    }
}

/// Roofline evaluation of one design point.
pub fn analyze(
    kind: ArchKind,
    n: usize,
    p: usize,
    params: &RooflineParams,
    fill_drain: u64,
) -> Result<PerfReport> {
    params.validate()?;
    let cycles = kind_cycles(kind, n, p, params, fill_drain)?;
    let traffic = traffic_bytes(kind, n, p, params);
    let compute = params.freq_mhz * 1e6 / cycles as f64;
    let memory = params.hbm_gbps * 1e9 / traffic;
    let (peak, bound) = if memory < compute {
        (memory, Bound::Memory)
    } else {
        (compute, Bound::Compute)
    };
    let scratch = match kind {
        ArchKind::Hybrid => Some(scratchpad_intensity(
            &EngineConfig::with_clock(n, params.n_part, p, params.freq_mhz, params.hbm_gbps)?,
            params,
        )),
        _ => None,
    };
    Ok(PerfReport {
        kind,
        n,
        p,
        intensity: butterflies(n) / traffic,
        scratchpad_intensity: scratch,
        compute_ceiling_ops: compute,
        memory_ceiling_ops: memory,
        peak_throughput_ops: peak,
        cycle_estimate: cycles,
        bandwidth_demand_gbps: peak * traffic / 1e9,
        bound,
    })
}

/// Ceiling rows over a sweep; illegal design points (a pipeline depth that
/// does not divide `log2 n`, a hybrid shape the engine rejects) are skipped.
pub fn roofline_table(
    kinds: &[ArchKind],
    ns: &[usize],
    ps: &[usize],
    params: &RooflineParams,
) -> Result<Vec<PerfReport>> {
    if kinds.is_empty() || ns.is_empty() || ps.is_empty() {
        return Err(Error::BadConfig("empty sweep".into()));
    }
    params.validate()?;
    let mut rows = Vec::new();
    for &kind in kinds {
        for &n in ns {
            for &p in ps {
                if check_shape(kind, n, p, params).is_ok() {
                    rows.push(analyze(kind, n, p, params, 0)?);
                }
            }
        }
    }
    Ok(rows)
}

/// `kind,n,p,intensity,ceiling_ops,bound`
pub fn write_roofline_csv<W: Write>(mut out: W, rows: &[PerfReport]) -> std::io::Result<()> {
    writeln!(out, "kind,n,p,intensity,ceiling_ops,bound")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{:.6},{:.3},{}",
            r.kind, r.n, r.p, r.intensity, r.peak_throughput_ops, r.bound
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_engine(n: usize) -> EngineConfig {
        EngineConfig::new(n, 256, 16).unwrap()
    }

    #[test]
    fn stage_intensity_is_flat() {
        let pr = RooflineParams::default();
        let a = intensity(ArchKind::StageBased, 1 << 12, 16, &pr);
        let b = intensity(ArchKind::StageBased, 1 << 16, 16, &pr);
        assert_eq!(a / b, 1.0);
        assert_eq!(a, 1.0 / 24.0);
    }

    #[test]
    fn hybrid_intensity_scales_with_log_n() {
        let pr = RooflineParams::default();
        let r = intensity(ArchKind::Hybrid, 1 << 16, 16, &pr)
            / intensity(ArchKind::Hybrid, 1 << 8, 16, &pr);
        assert_eq!(r, 2.0);
    }

    #[test]
    fn pipeline_intensity_linear_in_depth() {
        let pr = RooflineParams::default();
        let i4 = intensity(ArchKind::PipelineBased, 1 << 4, 4, &pr);
        let i8 = intensity(ArchKind::PipelineBased, 1 << 8, 8, &pr);
        let i16 = intensity(ArchKind::PipelineBased, 1 << 16, 16, &pr);
        assert_eq!(i8 / i4, 2.0);
        assert_eq!(i16 / i4, 4.0);
    }

    #[test]
    fn cycle_examples() {
        assert_eq!(
            cycle_estimate(&reference_engine(1 << 16), 0).unwrap().steady_state,
            4096
        );
        assert_eq!(
            cycle_estimate(&reference_engine(1 << 13), 0).unwrap().steady_state,
            512
        );
        assert_eq!(cycle_estimate(&reference_engine(256), 0).unwrap().steady_state, 8);
        let pr = RooflineParams::default();
        let c =
            cycle_estimate(&reference_engine(1 << 16), default_fill_drain(&reference_engine(1 << 16), &pr)).unwrap();
        assert_eq!(c.fill_drain, 8);
        assert_eq!(c.total, 4104);
    }

    #[test]
    fn throughput_ceilings() {
        let t16 = peak_throughput(&reference_engine(1 << 16), 0).unwrap();
        assert!((t16 - 300e6 / 4096.0).abs() < 1e-6);
        assert!(t16 >= 64_172.0);
        let t14 = peak_throughput(&reference_engine(1 << 14), 0).unwrap();
        assert!((t14 - 292_968.75).abs() < 1e-6);
        let slow = EngineConfig::with_clock(1 << 16, 256, 16, 150.0, 460.0).unwrap();
        assert_eq!(peak_throughput(&slow, 0).unwrap() * 2.0, t16);
        assert!(peak_throughput(&reference_engine(1 << 16), 8).unwrap() < t16);
    }

    #[test]
    fn bandwidth() {
        let pr = RooflineParams::default();
        assert_eq!(bandwidth_demand(&reference_engine(1 << 16), 0.0, &pr).total_gbps, 0.0);
        let d = bandwidth_demand(&reference_engine(1 << 16), 64_172.0, &pr);
        assert!((d.data_gbps - 67.0).abs() <= 1.0, "{}", d.data_gbps);
        assert!(!d.memory_bound);
        let d2 = bandwidth_demand(&reference_engine(1 << 16), 2.0 * 64_172.0, &pr);
        assert!((d2.total_gbps - 2.0 * d.total_gbps).abs() < 1e-9);
    }

    #[test]
    fn roofline_rows() {
        let pr = RooflineParams::default();
        let ns: Vec<usize> = (8..=16).map(|k| 1 << k).collect();
        let ps = [2, 4, 8, 16, 32, 64, 128];
        let rows = roofline_table(&ArchKind::ALL, &ns, &ps, &pr).unwrap();
        for r in &rows {
            let want = if r.memory_ceiling_ops < r.compute_ceiling_ops {
                Bound::Memory
            } else {
                Bound::Compute
            };
            assert_eq!(r.bound, want);
            if r.kind == ArchKind::PipelineBased {
                assert_eq!(r.n.trailing_zeros() as usize % r.p, 0);
            }
        }
        let stage: Vec<_> = rows
            .iter()
            .filter(|r| r.kind == ArchKind::StageBased)
            .collect();
        assert!(stage.iter().all(|r| r.intensity == stage[0].intensity));
        // wide stage-based designs run into the bandwidth roof
        assert!(stage.iter().any(|r| r.p == 128 && r.bound == Bound::Memory));

        let hybrid = analyze(ArchKind::Hybrid, 1 << 16, 16, &pr, 0).unwrap();
        assert_eq!(hybrid.bound, Bound::Compute);

        let wide = RooflineParams {
            hbm_gbps: 920.0,
            ..pr
        };
        let rows2 = roofline_table(&ArchKind::ALL, &ns, &ps, &wide).unwrap();
        for (a, b) in rows.iter().zip(&rows2) {
            assert_eq!(b.memory_ceiling_ops, 2.0 * a.memory_ceiling_ops);
            assert_eq!(b.compute_ceiling_ops, a.compute_ceiling_ops);
            if a.bound == Bound::Compute {
                assert_eq!(a.peak_throughput_ops, b.peak_throughput_ops);
            }
        }
        assert!(roofline_table(&[], &ns, &ps, &pr).is_err());
    }

    #[test]
    fn csv_rows() {
        let pr = RooflineParams::default();
        let rows = roofline_table(&[ArchKind::Hybrid], &[1 << 16], &[16], &pr).unwrap();
        let mut buf = Vec::new();
        write_roofline_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("hybrid,65536,16,"));
        assert!(text.trim_end().ends_with("compute"));
    }

    #[test]
    fn arch_parse() {
        assert_eq!("hybrid".parse::<ArchKind>().unwrap(), ArchKind::Hybrid);
        assert!("gpu".parse::<ArchKind>().is_err());
    }
}
