use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use hybrid_ntt::dataflow::{audit_trace, classify_stages, mode_schedule, Half};
use hybrid_ntt::fragmentation::audit_layout;
use hybrid_ntt::hply::{read_polynomial, write_polynomial};
use hybrid_ntt::perf::{
    analyze as analyze_point, bandwidth_demand, default_fill_drain, roofline_table,
    write_roofline_csv, ArchKind, RooflineParams,
};
use hybrid_ntt::poly::{random_polynomial, reference_forward_ntt};
use hybrid_ntt::{arrange_twiddles, BankLayout, ModulusContext, Simulator};
use rand_xoshiro::rand_core::SeedableRng;
use rand_xoshiro::SplitMix64;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::error::CliError;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Runs `fill` against a fresh file at `path`, mapping every failure to I/O.
fn write_file<F, E>(path: &Path, fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<(), E>,
    E: std::fmt::Display,
{
    let mut out = create(path)?;
    fill(&mut out).map_err(|e| CliError::io(path, e))?;
    out.flush().map_err(|e| CliError::io(path, e))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::config(e.to_string()))?;
    println!("{text}");
    Ok(())
}

pub fn params(rc: &RunConfig, floor: u64, twiddle_csv: Option<&Path>) -> Result<(), CliError> {
    let n = rc.require_n()?;
    let engine = rc.engine(n)?;
    let ctx = rc.context(n, floor)?;
    if let Some(path) = twiddle_csv {
        write_file(path, |out| ctx.write_twiddle_csv(out))?;
    }
    print_json(&rc.record(&engine, &ctx))
}

pub fn transform(
    rc: &RunConfig,
    input: &Path,
    output: &Path,
    trace_path: Option<&Path>,
) -> Result<(), CliError> {
    let file = File::open(input).map_err(|e| CliError::io(input, e))?;
    let poly = read_polynomial(BufReader::new(file)).map_err(|e| CliError::io(input, e))?;
    let n = poly.len();
    if let Some(want) = rc.n.filter(|&want| want != n) {
        return Err(CliError::config(format!(
            "configured n = {want}, input has {n} coefficients"
        )));
    }
    if let Some(q) = rc.q.filter(|&q| q != poly.q()) {
        return Err(CliError::config(format!(
            "configured q = {q}, input is over q = {}",
            poly.q()
        )));
    }
    let engine = rc.engine(n)?;
    let ctx = ModulusContext::new(poly.q(), n)?;
    let (out, trace) = Simulator::new(engine, &ctx)?.run(&poly, trace_path.is_some())?;
    write_file(output, |w| write_polynomial(w, &out))?;
    if let (Some(path), Some(trace)) = (trace_path, &trace) {
        write_file(path, |w| trace.write_jsonl(w))?;
    }
    let mut summary = json!({ "config": rc.record(&engine, &ctx) });
    if let Some(t) = &trace {
        summary["read_rounds"] = json!(t.read_rounds);
        summary["write_rounds"] = json!(t.write_rounds);
        summary["multiplications"] = json!(t.multiplications);
    }
    print_json(&summary)
}

#[derive(Serialize)]
struct RunFailure {
    run: u64,
    seed: u64,
    output_matches: bool,
    failed_checks: Vec<String>,
}

pub fn verify(rc: &RunConfig, floor: u64, runs: u64) -> Result<(), CliError> {
    if runs == 0 {
        return Err(CliError::config("--runs must be at least 1"));
    }
    let n = rc.require_n()?;
    let engine = rc.engine(n)?;
    let ctx = rc.context(n, floor)?;
    let mut sim = Simulator::new(engine, &ctx)?;
    let schedule = *sim.schedule();
    let grid = arrange_twiddles(&engine, &schedule, &ctx)?;
    let mut failures = Vec::new();
    for run in 0..runs {
        let seed = rc.seed.wrapping_add(run);
        let a = random_polynomial(&ctx, &mut SplitMix64::seed_from_u64(seed));
        let want = reference_forward_ntt(&ctx, &a)?;
        let (got, trace) = sim.run(&a, true)?;
        let report = trace.map(|t| audit_trace(&t, &engine, &schedule, &grid, &ctx));
        let failed_checks: Vec<String> = report
            .iter()
            .flat_map(|r| {
                r.checks
                    .iter()
                    .filter(|c| !c.passed)
                    .map(|c| c.name.to_string())
            })
            .collect();
        if got != want || !failed_checks.is_empty() {
            failures.push(RunFailure {
                run,
                seed,
                output_matches: got == want,
                failed_checks,
            });
        }
    }
    print_json(&json!({
        "config": rc.record(&engine, &ctx),
        "runs": runs,
        "passed": failures.is_empty(),
        "failures": failures,
    }))?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::verification(format!(
            "{} of {runs} runs failed",
            failures.len()
        )))
    }
}

pub fn map(rc: &RunConfig, csv: Option<&Path>, naive: bool) -> Result<(), CliError> {
    let n = rc.require_n()?;
    let engine = rc.engine(n)?;
    let layout = if naive {
        BankLayout::identity(&engine)?
    } else {
        BankLayout::from_config(&engine)?
    };
    if let Some(path) = csv {
        write_file(path, |out| layout.write_csv(out))?;
    }
    let audit = audit_layout(&layout, &mode_schedule(engine.n, engine.n_part)?)?;
    print_json(&audit)?;
    if audit.passed() {
        Ok(())
    } else {
        Err(CliError::verification(format!(
            "{} conflicting rounds, burst clean: {}",
            audit.conflicts.len(),
            audit.burst_clean
        )))
    }
}

pub fn schedule(
    rc: &RunConfig,
    floor: u64,
    twiddles: Option<&Path>,
    as_json: bool,
) -> Result<(), CliError> {
    let n = rc.require_n()?;
    let engine = rc.engine(n)?;
    let sched = mode_schedule(engine.n, engine.n_part)?;
    let stages = classify_stages(&engine);
    if let Some(path) = twiddles {
        let ctx = rc.context(n, floor)?;
        let grid = arrange_twiddles(&engine, &sched, &ctx)?;
        write_file(path, |out| serde_json::to_writer_pretty(out, &grid))?;
    }
    if as_json {
        return print_json(&json!({
            "iterations": sched.iterations,
            "partial_stages": sched.partial_stages,
            "first_half": sched.half(Half::First).to_string(),
            "second_half": sched.half(Half::Second).to_string(),
            "stages": stages,
        }));
    }
    println!("iterations: {}", sched.iterations);
    if engine.is_single_pass() {
        println!("single pass: {}", sched.half(Half::Single));
    } else {
        println!("first half: {}", sched.first_half);
        println!("second half: {}", sched.second_half);
    }
    println!("stage stride kind");
    for s in &stages {
        println!("{:>5} {:>6} {:?}", s.stage, s.stride, s.kind);
    }
    Ok(())
}

pub struct AnalyzeArgs {
    pub arch: String,
    pub sweep_n: Option<String>,
    pub sweep_p: Option<String>,
    pub achieved_ops: Option<f64>,
    pub csv: Option<PathBuf>,
}

fn parse_kinds(arch: &str) -> Result<Vec<ArchKind>, CliError> {
    if arch == "all" {
        return Ok(ArchKind::ALL.to_vec());
    }
    arch.split(',')
        .map(|s| s.trim().parse().map_err(CliError::from))
        .collect()
}

/// `A..B` (inclusive) or a single exponent.
fn parse_exponents(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::config(format!("bad --sweep-n {text:?}, expected A..B"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (
            a.trim().parse::<u32>().map_err(|_| bad())?,
            b.trim().parse::<u32>().map_err(|_| bad())?,
        ),
        None => {
            let e = text.trim().parse::<u32>().map_err(|_| bad())?;
            (e, e)
        }
    };
    if lo > hi || hi > 40 {
        return Err(bad());
    }
    Ok((lo..=hi).map(|e| 1usize << e).collect())
}

fn parse_list(text: &str) -> Result<Vec<usize>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::config(format!("bad --sweep-p entry {s:?}")))
        })
        .collect()
}

pub fn analyze(rc: &RunConfig, args: &AnalyzeArgs) -> Result<(), CliError> {
    let kinds = parse_kinds(&args.arch)?;
    let mut params = RooflineParams {
        freq_mhz: rc.freq_mhz as f64,
        hbm_gbps: rc.hbm_gbps,
        ..RooflineParams::default()
    };
    if let Some(np) = rc.n_part {
        params.n_part = np;
    }
    let sweeping = args.sweep_n.is_some() || args.sweep_p.is_some();
    if !sweeping {
        let n = rc.require_n()?;
        let engine = rc.engine(n)?;
        params.n_part = engine.n_part;
        let fill_drain = default_fill_drain(&engine, &params);
        let mut reports = Vec::new();
        for &kind in &kinds {
            reports.push(analyze_point(kind, n, engine.p, &params, fill_drain)?);
        }
        if let Some(path) = &args.csv {
            write_file(path, |out| write_roofline_csv(out, &reports))?;
        }
        let mut out = json!({ "reports": reports });
        if let Some(ops) = args.achieved_ops {
            out["bandwidth"] = json!(bandwidth_demand(&engine, ops, &params));
        }
        return print_json(&out);
    }
    let ns = match &args.sweep_n {
        Some(text) => parse_exponents(text)?,
        None => vec![rc.require_n()?],
    };
    let ps = match &args.sweep_p {
        Some(text) => parse_list(text)?,
        None => vec![rc.p.unwrap_or(16)],
    };
    let rows = roofline_table(&kinds, &ns, &ps, &params)?;
    if let Some(path) = &args.csv {
        write_file(path, |out| write_roofline_csv(out, &rows))?;
    }
    print_json(&json!({ "reports": rows }))
}
