use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use kolmo::apriori::{
    background_fit, default_candidates, peak_report, read_jsonl, BackgroundFit, Dyadic, PeakReport,
    SemimeasureTable, Window, MAX_PROGRAM_BITS,
};
use kolmo::codec::TermGenerator;
use kolmo::complexity::{
    k_exp, lz_upper_bound, IndexScan, OrderSegment, ScanStats, DEFAULT_M_MAX, DEFAULT_STEP_BUDGET,
    MAX_CENSUS_BITS,
};
use kolmo::empiric::{
    calibrate, compare_apriori, extract_with_source, spurious_scan, BaseRates, FrequencyTable,
    ScanParams, TestKind,
};
use kolmo::nbody::{
    circular_binary, divergence_probe, integrate, pythagorean, IntegrateOptions, Method,
    NbodyError, ProbeOptions, SystemConfig,
};
use kolmo::Nat;

use crate::output::{emit, json_document, read_text, write_atomic};
use crate::{invalid, Failure, Format, Global, Outcome};

/// Largest index range a scan accepts: programs up to 40 bits.
const MAX_INDEX: u64 = 1 << 40;

fn json_only(g: &Global, cmd: &str) -> Outcome {
    match g.format {
        Some(Format::Csv) => invalid(format!("{cmd} has no CSV output")),
        _ => Ok(()),
    }
}

fn emit_json<T: Serialize>(g: &Global, kind: &str, data: &T) -> Outcome {
    emit(g.out.as_deref(), &json_document(kind, data)?)?;
    Ok(())
}

fn check_budget(budget: u64) -> Outcome {
    if budget == 0 {
        return invalid("--budget must be at least 1");
    }
    Ok(())
}

fn check_index_range(name: &str, m: u64) -> Outcome {
    if m == 0 || m > MAX_INDEX {
        return invalid(format!("{name} must lie in [1, 2^40], got {m}"));
    }
    Ok(())
}

/// Parses a document written by this tool (or its bare payload).
fn read_document<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T, Failure> {
    let text = read_text(path)?;
    let mut v: serde_json::Value = match serde_json::from_str(&text) {
        Ok(v) => v,
        Err(e) => return invalid(format!("{}: {e}", path.display())),
    };
    if let Some(obj) = v.as_object_mut() {
        if let Some(found) = obj.remove("kind") {
            if found != kind {
                return invalid(format!(
                    "{}: expected a {kind} document, found {found}",
                    path.display()
                ));
            }
        }
        obj.remove("schema_version");
        obj.remove("layout_hash");
    }
    serde_json::from_value(v).or_else(|e| invalid(format!("{}: {e}", path.display())))
}

#[derive(Args, Debug)]
pub struct KArgs {
    /// The object: a natural number in decimal.
    #[arg(long, allow_hyphen_values = true)]
    pub x: String,
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
    pub budget: u64,
    /// Largest index tried.
    #[arg(long, default_value_t = DEFAULT_M_MAX)]
    pub mmax: u64,
}

pub fn k(g: &Global, a: KArgs) -> Outcome {
    json_only(g, "k")?;
    let x: Nat = match a.x.trim().parse() {
        Ok(x) => x,
        Err(_) => return invalid(format!("--x must be a natural number, got {:?}", a.x)),
    };
    check_budget(a.budget)?;
    check_index_range("--mmax", a.mmax)?;
    let started = Instant::now();
    let rec = k_exp(&x, a.budget, a.mmax);
    log::info!(
        "cmd=k x={x} k_value={:?} elapsed_ms={}",
        rec.k_value,
        started.elapsed().as_millis()
    );
    emit_json(g, "complexity", &rec)
}

#[derive(Serialize, Deserialize)]
struct OrderCheckpoint {
    format: String,
    version: u32,
    scan: IndexScan,
}

const ORDER_CHECKPOINT: &str = "kolmo-order-checkpoint";

#[derive(Args, Debug)]
pub struct OrderArgs {
    /// Scan indices 1..=n.
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
    pub budget: u64,
    /// Process at most this many program lengths, save the checkpoint, and stop.
    #[arg(long, requires = "checkpoint")]
    pub stop_after: Option<usize>,
}

fn load_order_checkpoint(path: &Path) -> Result<IndexScan, Failure> {
    let c: OrderCheckpoint = serde_json::from_str(&read_text(path)?)
        .or_else(|e| invalid(format!("checkpoint {}: {e}", path.display())))?;
    if c.format != ORDER_CHECKPOINT || c.version != 1 {
        return invalid(format!("checkpoint {}: unsupported format", path.display()));
    }
    Ok(c.scan)
}

pub fn order(g: &Global, a: OrderArgs) -> Outcome {
    check_index_range("--n", a.n)?;
    check_budget(a.budget)?;
    let mut scan = match &g.checkpoint {
        Some(p) if p.exists() => {
            let s = load_order_checkpoint(p)?;
            if (s.m_max, s.step_budget) != (a.n, a.budget) {
                return invalid(format!(
                    "checkpoint is for n={} budget={}, not n={} budget={}",
                    s.m_max, s.step_budget, a.n, a.budget
                ));
            }
            log::info!("cmd=order resumed_at_len={}", s.next_len);
            s
        }
        _ => IndexScan::new(a.n, a.budget),
    };
    let mut gen = TermGenerator::new(scan.max_len());
    let mut rounds = 0;
    while !scan.is_done() {
        if a.stop_after == Some(rounds) {
            log::info!("cmd=order paused_at_len={}", scan.next_len);
            return Ok(());
        }
        let started = Instant::now();
        scan.advance(&mut gen);
        rounds += 1;
        if let Some(p) = &g.checkpoint {
            let c = OrderCheckpoint {
                format: ORDER_CHECKPOINT.into(),
                version: 1,
                scan: scan.clone(),
            };
            write_atomic(
                p,
                serde_json::to_string(&c)
                    .map_err(anyhow::Error::from)?
                    .as_bytes(),
            )?;
        }
        log::info!(
            "cmd=order len={} objects={} elapsed_ms={}",
            scan.next_len - 1,
            scan.first.len(),
            started.elapsed().as_millis()
        );
    }
    let seg = OrderSegment::from_scan(&scan);
    match g.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(g, "order", &seg),
        Format::Csv => Ok(emit(g.out.as_deref(), &seg.to_csv())?),
    }
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    /// Objects below 2^bits are counted.
    #[arg(long)]
    pub bits: u32,
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
    pub budget: u64,
    /// Thresholds 2^0..=2^j are reported and indices up to 2^j scanned (default: bits).
    #[arg(long)]
    pub max_threshold_log2: Option<u32>,
}

pub fn census(g: &Global, a: CensusArgs) -> Outcome {
    if a.bits == 0 || a.bits > MAX_CENSUS_BITS {
        return invalid(format!(
            "--bits must lie in [1, {MAX_CENSUS_BITS}], got {}",
            a.bits
        ));
    }
    check_budget(a.budget)?;
    let j = a.max_threshold_log2.unwrap_or(a.bits);
    if j > 40 {
        return invalid("--max-threshold-log2 must be at most 40");
    }
    let started = Instant::now();
    let report = kolmo::complexity::census(a.bits, a.budget, j);
    log::info!(
        "cmd=census bits={} objects={} pigeonhole={} elapsed_ms={}",
        a.bits,
        report.objects_found,
        report.pigeonhole_all_thresholds,
        started.elapsed().as_millis()
    );
    match g.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(g, "census", &report),
        Format::Csv => {
            let mut s = String::from("log2_t,t,count,fraction,holds\n");
            for r in &report.thresholds {
                s.push_str(&format!(
                    "{},{},{},{},{}\n",
                    r.log2_t, r.t, r.count, r.fraction, r.holds
                ));
            }
            Ok(emit(g.out.as_deref(), &s)?)
        }
    }
}

#[derive(Args, Debug)]
pub struct LzArgs {
    /// Input file (`-` for stdin).
    #[arg(long)]
    pub file: PathBuf,
}

pub fn lz(g: &Global, a: LzArgs) -> Outcome {
    json_only(g, "lz")?;
    let data = if a.file.as_os_str() == "-" {
        let mut v = Vec::new();
        std::io::Read::read_to_end(&mut std::io::stdin(), &mut v)?;
        v
    } else {
        std::fs::read(&a.file).map_err(|e| anyhow::anyhow!("reading {}: {e}", a.file.display()))?
    };
    let bound = lz_upper_bound(&data);
    log::info!(
        "cmd=lz bytes={} bits={}",
        bound.input_bytes,
        bound.total_bits
    );
    emit_json(g, "lz", &bound)
}

#[derive(Args, Debug)]
pub struct AprioriArgs {
    /// Longest program, in bits.
    #[arg(long)]
    pub max_bits: u32,
    #[arg(long, default_value_t = DEFAULT_STEP_BUDGET)]
    pub budget: u64,
    /// Process at most this many program lengths, save the checkpoint, and stop.
    #[arg(long, requires = "checkpoint")]
    pub stop_after: Option<usize>,
    /// Also write peak ratios and the background fit here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Relative half-width of the peak comparison window.
    #[arg(long, default_value_t = 0.05)]
    pub window: f64,
    /// Background fit range `[a, b]`.
    #[arg(long, num_args = 2, value_names = ["A", "B"], default_values_t = [10, 100_000])]
    pub fit_range: Vec<u64>,
}

#[derive(Serialize)]
struct AprioriReport {
    max_bits: u32,
    step_budget: u64,
    entries: usize,
    total: Dyadic,
    total_f64: f64,
    stats: ScanStats,
    window: Window,
    peaks: Vec<PeakReport>,
    background: Option<BackgroundFit>,
    background_error: Option<String>,
}

pub fn apriori(g: &Global, a: AprioriArgs) -> Outcome {
    json_only(g, "apriori")?;
    if a.max_bits > MAX_PROGRAM_BITS {
        return invalid(format!("--max-bits must be at most {MAX_PROGRAM_BITS}"));
    }
    check_budget(a.budget)?;
    if !(a.window > 0.0 && a.window < 1.0) {
        return invalid("--window must lie in (0, 1)");
    }
    let mut table = match &g.checkpoint {
        Some(p) if p.exists() => {
            let t = SemimeasureTable::from_checkpoint(&read_text(p)?)
                .or_else(|e| invalid(format!("{}: {e}", p.display())))?;
            if (t.max_bits, t.step_budget) != (a.max_bits, a.budget) {
                return invalid(format!(
                    "checkpoint is for max-bits={} budget={}, not max-bits={} budget={}",
                    t.max_bits, t.step_budget, a.max_bits, a.budget
                ));
            }
            log::info!("cmd=apriori resumed_at_len={}", t.lengths_done);
            t
        }
        _ => SemimeasureTable::new(a.max_bits, a.budget).or_else(|e| invalid(e.to_string()))?,
    };
    let mut gen = TermGenerator::new(a.max_bits as usize);
    let mut rounds = 0;
    while !table.is_complete() {
        if a.stop_after == Some(rounds) {
            log::info!("cmd=apriori paused_at_len={}", table.lengths_done);
            return Ok(());
        }
        let started = Instant::now();
        table.advance(&mut gen).map_err(anyhow::Error::from)?;
        rounds += 1;
        if let Some(p) = &g.checkpoint {
            write_atomic(p, table.to_checkpoint().as_bytes())?;
        }
        log::info!(
            "cmd=apriori len={} entries={} total={} elapsed_ms={}",
            table.lengths_done - 1,
            table.mass.len(),
            table.total,
            started.elapsed().as_millis()
        );
    }
    emit(g.out.as_deref(), &table.to_jsonl())?;
    if let Some(path) = &a.report {
        let window = Window::Relative(a.window);
        let (background, background_error) =
            match background_fit(&table.mass, a.fit_range[0], a.fit_range[1]) {
                Ok(f) => (Some(f), None),
                Err(e) => (None, Some(e.to_string())),
            };
        let report = AprioriReport {
            max_bits: table.max_bits,
            step_budget: table.step_budget,
            entries: table.mass.len(),
            total: table.total,
            total_f64: table.total.to_f64(),
            stats: table.stats,
            window,
            peaks: peak_report(&table.mass, &default_candidates(), window),
            background,
            background_error,
        };
        write_atomic(path, json_document("apriori-report", &report)?.as_bytes())?;
    }
    Ok(())
}

#[derive(Args, Debug)]
pub struct NumeralsArgs {
    /// UTF-8 text (`-` for stdin).
    #[arg(long = "in")]
    pub input: PathBuf,
}

pub fn numerals(g: &Global, a: NumeralsArgs) -> Outcome {
    let text = read_text(&a.input)?;
    let table = extract_with_source(&text, &a.input.display().to_string());
    log::info!(
        "cmd=numerals tokens={} mentions={} distinct={}",
        table.tokens,
        table.total_mentions(),
        table.counts.len()
    );
    match g.format.unwrap_or(Format::Json) {
        Format::Json => emit_json(g, "numerals", &table),
        Format::Csv => {
            let mut s = String::from("x,count\n");
            for (x, c) in &table.counts {
                s.push_str(&format!("{x},{c}\n"));
            }
            Ok(emit(g.out.as_deref(), &s)?)
        }
    }
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Output of `kolmo numerals`.
    #[arg(long)]
    pub freq: PathBuf,
    /// JSON-lines table from `kolmo apriori`.
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub window: f64,
}

pub fn compare(g: &Global, a: CompareArgs) -> Outcome {
    json_only(g, "compare")?;
    if !(a.window > 0.0 && a.window < 1.0) {
        return invalid("--window must lie in (0, 1)");
    }
    let freq: FrequencyTable = read_document(&a.freq, "numerals")?;
    let mass = read_jsonl(&read_text(&a.table)?)
        .or_else(|e| invalid(format!("{}: {e}", a.table.display())))?;
    let c = compare_apriori(
        &freq,
        &mass,
        &default_candidates(),
        Window::Relative(a.window),
    )
    .or_else(|e| invalid(e.to_string()))?;
    log::info!("cmd=compare shared={} spearman={}", c.shared, c.spearman);
    emit_json(g, "compare", &c)
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum TestArg {
    Yates,
    Z,
}

#[derive(Args, Debug)]
pub struct SpuriousArgs {
    #[arg(long, default_value_t = 100_000)]
    pub pop: u64,
    #[arg(long, default_value_t = 12)]
    pub groups: u32,
    #[arg(long, default_value_t = 200)]
    pub outcomes: u32,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Base rates are log-uniform in [rate-lo, rate-hi].
    #[arg(long, default_value_t = 1e-4)]
    pub rate_lo: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub rate_hi: f64,
    #[arg(long, value_enum, default_value_t = TestArg::Yates)]
    pub test: TestArg,
    /// Repeat over seeds seed, seed+1, ... and report calibration instead.
    #[arg(long, default_value_t = 1)]
    pub repeat: u64,
}

pub fn spurious(g: &Global, a: SpuriousArgs) -> Outcome {
    let mut params = ScanParams::new(a.pop, a.groups, a.outcomes, a.alpha, a.seed);
    params.base_rates = BaseRates::LogUniform {
        lo: a.rate_lo,
        hi: a.rate_hi,
    };
    params.test = match a.test {
        TestArg::Yates => TestKind::Yates,
        TestArg::Z => TestKind::Z,
    };
    params.validate().or_else(|e| invalid(e.to_string()))?;
    if a.repeat == 0 {
        return invalid("--repeat must be at least 1");
    }
    let format = g.format.unwrap_or(Format::Json);
    if a.repeat > 1 {
        let seeds: Vec<u64> = (0..a.repeat).map(|i| a.seed.wrapping_add(i)).collect();
        let c = calibrate(&params, &seeds).or_else(|e| invalid(e.to_string()))?;
        log::info!(
            "cmd=spurious seeds={} mean_nominal={} corrected_zero_seeds={}",
            seeds.len(),
            c.mean_nominal,
            c.corrected_zero_seeds
        );
        return match format {
            Format::Json => emit_json(g, "spurious-calibration", &c),
            Format::Csv => {
                let mut s = String::from("seed,nominal,corrected\n");
                for ((seed, n), c) in c
                    .seeds
                    .iter()
                    .zip(&c.nominal_counts)
                    .zip(&c.corrected_counts)
                {
                    s.push_str(&format!("{seed},{n},{c}\n"));
                }
                Ok(emit(g.out.as_deref(), &s)?)
            }
        };
    }
    let r = spurious_scan(&params).or_else(|e| invalid(e.to_string()))?;
    log::info!(
        "cmd=spurious tests={} nominal={} corrected={} skipped_groups={}",
        r.tests,
        r.nominal_significant,
        r.corrected_significant,
        r.skipped_groups.len()
    );
    match format {
        Format::Json => emit_json(g, "spurious", &r),
        Format::Csv => {
            let mut s =
                String::from("group,outcome,group_size,group_cases,rest_cases,p_value,direction\n");
            for t in &r.records {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    t.group,
                    t.outcome,
                    t.group_size,
                    t.group_cases,
                    t.rest_cases,
                    t.p_value,
                    t.direction
                ));
            }
            Ok(emit(g.out.as_deref(), &s)?)
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum Preset {
    /// Two unit masses on a circular orbit, separation 1.
    Circular,
    /// Masses 3, 4, 5 at rest on a 3-4-5 right triangle.
    Pythagorean,
}

#[derive(Args, Debug)]
pub struct NbodyArgs {
    /// System JSON: `{"G": .., "bodies": [{"mass", "q", "v"}], "softening": ..}`.
    #[arg(long, conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    #[arg(long, default_value = "leapfrog")]
    pub method: Method,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1000)]
    pub steps: u64,
    /// Steps between samples (default 1, or 100 with --probe).
    #[arg(long)]
    pub stride: Option<u64>,
    /// Integrate a perturbed copy alongside and report their divergence.
    #[arg(long)]
    pub probe: bool,
    /// Perturbation of the first body's x coordinate.
    #[arg(long, default_value_t = 1e-9)]
    pub delta: f64,
    /// Probe horizon in time units (default: steps · dt).
    #[arg(long)]
    pub horizon: Option<f64>,
}

fn nbody_invalid(e: NbodyError) -> Failure {
    Failure::Invalid(e.to_string())
}

pub fn nbody(g: &Global, a: NbodyArgs) -> Outcome {
    let (state, gravity) = match (&a.config, a.preset) {
        (Some(path), _) => {
            let cfg: SystemConfig = serde_json::from_str(&read_text(path)?)
                .or_else(|e| invalid(format!("{}: {e}", path.display())))?;
            (
                cfg.state().map_err(nbody_invalid)?,
                cfg.gravity().map_err(nbody_invalid)?,
            )
        }
        (None, Some(Preset::Circular)) => (circular_binary(), Default::default()),
        (None, Some(Preset::Pythagorean)) => (pythagorean(), Default::default()),
        (None, None) => return invalid("one of --config or --preset is required"),
    };
    if !(a.dt > 0.0 && a.dt.is_finite()) {
        return invalid("--dt must be positive");
    }
    if a.probe {
        let horizon = a.horizon.unwrap_or(a.dt * a.steps as f64);
        let mut opts = ProbeOptions::new(a.delta, horizon, a.dt);
        opts.method = a.method;
        opts.gravity = gravity;
        opts.stride = a.stride.unwrap_or(opts.stride);
        let report = divergence_probe(&state, &opts).map_err(nbody_invalid)?;
        log::info!(
            "cmd=nbody probe=true max_ratio={} samples={} aborted={:?}",
            report.max_ratio,
            report.samples.len(),
            report.aborted
        );
        return match g.format.unwrap_or(Format::Json) {
            Format::Json => emit_json(g, "divergence", &report),
            Format::Csv => {
                let mut s = String::from("t,distance\n");
                for (t, d) in &report.samples {
                    s.push_str(&format!("{t},{d}\n"));
                }
                Ok(emit(g.out.as_deref(), &s)?)
            }
        };
    }
    let mut opts = IntegrateOptions::new(a.dt, a.steps, a.method);
    opts.stride = a.stride.unwrap_or(1);
    opts.gravity = gravity;
    let traj = integrate(&state, &opts, None).map_err(nbody_invalid)?;
    if let Some(why) = &traj.aborted {
        log::warn!("cmd=nbody aborted={why:?} samples={}", traj.samples.len());
    }
    log::info!(
        "cmd=nbody method={} samples={} energy_drift={:e} momentum_drift={:e}",
        a.method,
        traj.samples.len(),
        traj.relative_energy_drift(),
        traj.relative_momentum_drift()
    );
    match g.format.unwrap_or(Format::Csv) {
        Format::Csv => Ok(emit(g.out.as_deref(), &traj.to_csv())?),
        Format::Json => emit_json(g, "trajectory", &traj),
    }
}
