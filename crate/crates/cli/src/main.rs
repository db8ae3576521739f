use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use xchan::bounds::{det_bounds, gauss_bounds, gauss_sum_gap, max_sum_rate, sandwich_check, strong_direct_grid, LABELS};
use xchan::channel::{ChannelLevels, DetChannelGains, FineGains, Rx};
use xchan::det_link::{alignment_ok, roundtrip_ok, DetMessages};
use xchan::gauss_link::{build_constellation, mc_symbol_error, min_distance, ReceiverConstellation, SimOptions, DEFAULT_BUDGET};
use xchan::outage::{
    det_sample_gains, mac_outage_map, mc_groshev_measure, mc_outage_det, mc_outage_gauss, GroshevParams, OutageEstimate,
};
use xchan::rates::{
    allocate, allocate_penalized, capacity_approx, check_det_conditions, check_gauss_conditions, Case, Model,
    OutageTarget, Penalty, RateAllocation,
};
use xchan::seed::sample_rng;
use xchan::sweep::dof_table;
use xchan::{Error, Rate};

#[derive(Parser, Serialize)]
#[command(name = "xchan", version, about = "Interference alignment laboratory for the two-user X-channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Case, capacity approximation, ideal and penalized allocations.
    Rates(RatesArgs),
    /// Deterministic-model round trips over sampled gains and messages.
    DetSim(DetSimArgs),
    /// Gaussian symbol-error simulation at fixed gains.
    GaussSim(GaussSimArgs),
    /// Minimum constellation distance at both receivers.
    Mindist(MindistArgs),
    /// Monte Carlo outage estimate.
    Outage(OutageArgs),
    /// Measure of the small-linear-form event against its analytic bound.
    Groshev(GroshevArgs),
    /// Outage map of the two-user MAC.
    MacMap(MacMapArgs),
    /// Rate-region bounds, LP optimum and sandwich check.
    Bounds(BoundsArgs),
    /// Achieved rate per level over symmetric channels.
    DofTable(DofArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModelArg {
    Det,
    Gauss,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Det => Model::Det,
            ModelArg::Gauss => Model::Gauss,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
    Pgm,
}

fn parse_list<T: std::str::FromStr, const K: usize>(s: &str) -> Result<[T; K], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != K {
        return Err(format!("expected {K} comma-separated values, got {}", parts.len()));
    }
    let mut out = Vec::with_capacity(K);
    for p in parts {
        out.push(p.parse::<T>().map_err(|_| format!("cannot parse `{p}`"))?);
    }
    out.try_into().map_err(|_| "internal length mismatch".to_string())
}

fn parse_levels(s: &str) -> Result<ChannelLevels, String> {
    let [a, b, c, d] = parse_list::<u32, 4>(s)?;
    Ok(ChannelLevels::new(a, b, c, d))
}

fn parse_gains(s: &str) -> Result<FineGains, String> {
    let [a, b, c, d] = parse_list::<f64, 4>(s)?;
    FineGains::new(a, b, c, d).map_err(|e| e.to_string())
}

fn parse_alloc(s: &str) -> Result<RateAllocation, String> {
    let [r11p, r22p, r11c, r22c, r12, r21] = parse_list::<u32, 6>(s)?;
    Ok(RateAllocation { r11c, r11p, r12, r21, r22c, r22p, case: Case::V })
}

fn parse_delta(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("cannot parse `{s}`"))?;
    OutageTarget::new(v).map(|t| t.delta()).map_err(|e| e.to_string())
}

#[derive(Args, Serialize)]
struct RatesArgs {
    /// Levels `n11,n12,n21,n22`.
    #[arg(long, value_parser = parse_levels)]
    n: ChannelLevels,
    #[arg(long, default_value = "0.5", value_parser = parse_delta)]
    delta: f64,
    #[arg(long, value_enum, default_value = "det")]
    model: ModelArg,
}

/// Allocation source shared by the Gaussian commands: an explicit tuple,
/// or the penalized allocation for `delta`.
#[derive(Args, Serialize)]
struct AllocArgs {
    /// Explicit rates `r11p,r22p,r11c,r22c,r12,r21`.
    #[arg(long, value_parser = parse_alloc)]
    alloc: Option<RateAllocation>,
    #[arg(long, default_value = "0.5", value_parser = parse_delta)]
    delta: f64,
}

impl AllocArgs {
    fn resolve(&self, n: &ChannelLevels, model: Model) -> xchan::Result<RateAllocation> {
        match self.alloc {
            Some(a) => Ok(a),
            None => allocate_penalized(n, OutageTarget::new(self.delta)?, model),
        }
    }
}

#[derive(Args, Serialize)]
struct DetSimArgs {
    #[arg(long, value_parser = parse_levels)]
    n: ChannelLevels,
    #[arg(long, default_value = "1000")]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Use the ideal allocation instead of the penalized one.
    #[arg(long)]
    ideal: bool,
    #[arg(long, default_value = "0.5", value_parser = parse_delta)]
    delta: f64,
}

#[derive(Args, Serialize)]
struct GaussSimArgs {
    #[arg(long, value_parser = parse_levels)]
    n: ChannelLevels,
    /// Fine gains `h11,h12,h21,h22` in (1, 2].
    #[arg(long, value_parser = parse_gains)]
    h: FineGains,
    #[command(flatten)]
    alloc: AllocArgs,
    #[arg(long, default_value = "100000")]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = "1.0")]
    noise_std: f64,
    /// Quantize the gains to `max n_mk` bits at both ends.
    #[arg(long)]
    mismatched: bool,
    #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
    budget: u64,
}

#[derive(Args, Serialize)]
struct MindistArgs {
    #[arg(long, value_parser = parse_levels)]
    n: ChannelLevels,
    #[arg(long, value_parser = parse_gains)]
    h: FineGains,
    #[command(flatten)]
    alloc: AllocArgs,
    #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
    budget: u64,
}

#[derive(Args, Serialize)]
struct OutageArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long, value_parser = parse_levels)]
    n: ChannelLevels,
    #[command(flatten)]
    alloc: AllocArgs,
    #[arg(long, default_value = "10000")]
    samples: u64,
    #[arg(long)]
    seed: u64,
    /// Distance below which a Gaussian sample counts as an outage.
    #[arg(long, default_value = "32")]
    threshold: f64,
    #[arg(long, default_value_t = DEFAULT_BUDGET as u64)]
    budget: u64,
}

#[derive(Args, Serialize)]
struct GroshevArgs {
    #[arg(long)]
    beta: f64,
    /// `a1,a2`.
    #[arg(long, value_parser = parse_list::<u64, 2>)]
    a: [u64; 2],
    /// `Q0,Q1,Q2`.
    #[arg(long, value_parser = parse_list::<u64, 3>)]
    q: [u64; 3],
    #[arg(long, default_value = "100000")]
    samples: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct MacMapArgs {
    #[arg(long)]
    n: u32,
    #[arg(long, default_value = "512")]
    grid: usize,
    #[arg(long, default_value = "8")]
    q1: u32,
    #[arg(long, default_value = "2")]
    q2: u32,
    /// Map file; the summary record goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Map format; inferred from the file extension when omitted.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    #[arg(long, value_parser = parse_levels, required_unless_present = "sweep_max")]
    n: Option<ChannelLevels>,
    /// Also evaluate the Gaussian bounds at these gains.
    #[arg(long, value_parser = parse_gains)]
    h: Option<FineGains>,
    /// Check every strong-direct channel with levels up to this value.
    #[arg(long)]
    sweep_max: Option<u32>,
}

#[derive(Args, Serialize)]
struct DofArgs {
    #[arg(long, default_value = "6")]
    n_min: u32,
    #[arg(long)]
    n_max: u32,
    #[arg(long, default_value = "0.5", value_parser = parse_delta)]
    delta: f64,
    /// Monte Carlo samples per row; zero skips the outage estimate.
    #[arg(long, default_value = "0")]
    samples: u64,
    /// Required when `samples` is nonzero.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

/// Failure modes mapped onto exit codes.
enum Failure {
    Violation(String),
    Usage(String),
    Budget(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            Error::Infeasible | Error::AlignmentFailure | Error::InconsistentOutput => Failure::Violation(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type CmdResult = Result<(), Failure>;

fn rate_json(r: &Rate) -> Value {
    json!({ "exact": r.to_string(), "value": xchan::rates::rate_to_f64(r) })
}

fn alloc_json(a: &RateAllocation) -> Value {
    json!({
        "r11p": a.r11p, "r22p": a.r22p, "r11c": a.r11c, "r22c": a.r22c, "r12": a.r12, "r21": a.r21,
        "sum_rate": a.sum_rate(),
    })
}

struct Out<'a> {
    config: &'a Command,
    sink: io::StdoutLock<'a>,
}

impl Out<'_> {
    /// One JSON object per line, with the full configuration embedded.
    fn record(&mut self, body: Value) -> io::Result<()> {
        let mut obj = serde_json::Map::new();
        obj.insert("config".into(), serde_json::to_value(self.config).expect("config serializes"));
        if let Value::Object(m) = body {
            obj.extend(m);
        }
        writeln!(self.sink, "{}", Value::Object(obj))
    }
}

fn cmd_rates(a: &RatesArgs, out: &mut Out) -> CmdResult {
    let cap = capacity_approx(&a.n)?;
    let ideal = allocate(&a.n)?;
    let target = OutageTarget::new(a.delta)?;
    let model = Model::from(a.model);
    let penalized = allocate_penalized(&a.n, target, model);
    let conditions = |x: &RateAllocation, p: Penalty| match model {
        Model::Det => check_det_conditions(x, &a.n, p),
        Model::Gauss => check_gauss_conditions(x, &a.n, p),
    };
    out.record(json!({
        "case": ideal.case.to_string(),
        "D": rate_json(&cap.d),
        "D1": rate_json(&cap.d1),
        "D2": rate_json(&cap.d2),
        "D3": rate_json(&cap.d3),
        "D4": rate_json(&cap.d4),
        "allocation": alloc_json(&ideal),
        "conditions": conditions(&ideal, Penalty::Ideal),
        "penalized_allocation": penalized.as_ref().ok().map(alloc_json),
        "penalized_conditions": penalized.as_ref().ok().map(|p| conditions(p, target.into())),
    }))?;
    penalized.map(|_| ()).map_err(Failure::from)
}

fn cmd_det_sim(a: &DetSimArgs, out: &mut Out) -> CmdResult {
    let alloc = if a.ideal { allocate(&a.n)? } else { allocate_penalized(&a.n, OutageTarget::new(a.delta)?, Model::Det)? };
    let est = mc_outage_det(&a.n, &alloc, a.samples, a.seed)?;
    let example = match est.first_failures.first() {
        Some(&i) => {
            let mut rng = sample_rng(a.seed, i);
            let g: DetChannelGains = det_sample_gains(&mut rng);
            let msgs = DetMessages::random(&alloc, &mut rng);
            Some(json!({
                "index": i,
                "gains": g.as_array(),
                "aligned": alignment_ok(&g, &alloc, &a.n)?,
                "roundtrip": roundtrip_ok(&msgs, &alloc, &a.n, &g)?,
            }))
        }
        None => None,
    };
    out.record(json!({ "allocation": alloc_json(&alloc), "outage": est, "first_failure": example }))?;
    Ok(())
}

fn cmd_gauss_sim(a: &GaussSimArgs, out: &mut Out) -> CmdResult {
    let alloc = a.alloc.resolve(&a.n, Model::Gauss)?;
    let opts = SimOptions { mismatched: a.mismatched, noise_std: a.noise_std, budget: u128::from(a.budget) };
    let r = mc_symbol_error(&a.h, &a.n, &alloc, a.trials, a.seed, &opts)?;
    out.record(json!({ "allocation": alloc_json(&alloc), "symbol_error": r }))?;
    Ok(())
}

fn cmd_mindist(a: &MindistArgs, out: &mut Out) -> CmdResult {
    let alloc = a.alloc.resolve(&a.n, Model::Gauss)?;
    let budget = u128::from(a.budget);
    let c = build_constellation(&alloc, &a.n)?;
    let g = xchan::channel::effective_gains(&a.h);
    let mut reports = Vec::new();
    for rx in Rx::BOTH {
        let rc = ReceiverConstellation::new(&c, rx, budget)?;
        let r = min_distance(&g.receiver(rx), &rc, budget)?;
        reports.push(json!({ "rx": rx.to_string(), "d": r.d, "argmin": r.argmin, "sizes": r.sizes, "difference_sizes": r.difference_sizes }));
    }
    out.record(json!({ "allocation": alloc_json(&alloc), "receivers": reports }))?;
    Ok(())
}

fn cmd_outage(a: &OutageArgs, out: &mut Out) -> CmdResult {
    let model = Model::from(a.model);
    let alloc = a.alloc.resolve(&a.n, model)?;
    let est: OutageEstimate = match model {
        Model::Det => mc_outage_det(&a.n, &alloc, a.samples, a.seed)?,
        Model::Gauss => mc_outage_gauss(&a.n, &alloc, a.samples, a.seed, a.threshold, u128::from(a.budget))?,
    };
    out.record(json!({ "allocation": alloc_json(&alloc), "outage": est }))?;
    Ok(())
}

fn cmd_groshev(a: &GroshevArgs, out: &mut Out) -> CmdResult {
    let p = GroshevParams::new(a.beta, a.a[0], a.a[1], a.q[0], a.q[1], a.q[2])?;
    let e = mc_groshev_measure(&p, a.samples, a.seed)?;
    let within = e.measure <= e.bound + 3.0 * e.sigma;
    out.record(json!({ "estimate": e, "within_bound": within }))?;
    if within {
        Ok(())
    } else {
        Err(Failure::Violation("measured set exceeds the analytic bound".into()))
    }
}

fn cmd_mac_map(a: &MacMapArgs, out: &mut Out) -> CmdResult {
    let map = mac_outage_map(a.n, a.grid, a.q1, a.q2)?;
    if let Some(path) = &a.out {
        let format = a.format.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Format::Csv,
            Some("json") => Format::Json,
            _ => Format::Pgm,
        });
        let mut w = BufWriter::new(File::create(path)?);
        match format {
            Format::Pgm => map.write_pgm(&mut w)?,
            Format::Csv => map.write_csv(&mut w)?,
            Format::Json => serde_json::to_writer(&mut w, &map).map_err(io::Error::other)?,
        }
        w.flush()?;
    }
    out.record(json!({
        "grid": map.grid,
        "black_fraction": map.black_fraction(),
        "strip_count": map.strip_count(),
    }))?;
    Ok(())
}

fn cmd_bounds(a: &BoundsArgs, out: &mut Out) -> CmdResult {
    if let Some(max) = a.sweep_max {
        let grid = strong_direct_grid(max);
        let mut violations = Vec::new();
        let mut tight = 0usize;
        for n in &grid {
            let r = sandwich_check(n)?;
            tight += usize::from(r.lp_tight());
            if !r.ok() {
                violations.push(json!({ "n": n.to_string(), "violations": r.violations }));
            }
        }
        let count = violations.len();
        out.record(json!({ "tuples": grid.len(), "lp_tight": tight, "violations": violations }))?;
        if count > 0 {
            return Err(Failure::Violation(format!("{count} sandwich violations")));
        }
    }
    let Some(n) = a.n else { return Ok(()) };
    let det = det_bounds(&n);
    let lp = max_sum_rate(&det)?;
    let labelled = |vals: Vec<Value>| -> Value {
        LABELS.iter().zip(vals).map(|(l, v)| (l.to_string(), v)).collect::<serde_json::Map<_, _>>().into()
    };
    let mut body = json!({
        "det": labelled(det.rhs.iter().map(rate_json).collect()),
        "lp": {
            "optimum": rate_json(&lp.optimum),
            "vertex": lp.vertex.iter().map(rate_json).collect::<Vec<_>>(),
            "active": lp.active.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        },
    });
    let mut failed = None;
    if n.strong_direct() {
        let r = sandwich_check(&n)?;
        if !r.ok() {
            failed = Some(format!("sandwich violations: {:?}", r.violations));
        }
        body["sandwich"] = serde_json::to_value(&r).expect("report serializes");
    }
    if let Some(h) = &a.h {
        let g = gauss_bounds(&n, h);
        body["gauss"] = labelled(g.rhs.iter().map(|v| json!(v)).collect());
        if n.strong_direct() {
            body["gauss_sum_gap"] = json!(gauss_sum_gap(&n, h)?);
        }
    }
    out.record(body)?;
    failed.map_or(Ok(()), |m| Err(Failure::Violation(m)))
}

fn cmd_dof_table(a: &DofArgs, out: &mut Out) -> CmdResult {
    if a.n_min > a.n_max {
        return Err(Failure::Usage("--n-min exceeds --n-max".into()));
    }
    let seed = match (a.samples, a.seed) {
        (0, s) => s.unwrap_or(0),
        (_, Some(s)) => s,
        (_, None) => return Err(Failure::Usage("--seed is required when --samples is nonzero".into())),
    };
    let rows = dof_table(a.n_min..=a.n_max, OutageTarget::new(a.delta)?, a.samples, seed)?;
    match a.format {
        Format::Json => {
            for r in &rows {
                out.record(serde_json::to_value(r).expect("row serializes"))?;
            }
        }
        Format::Csv => {
            writeln!(out.sink, "n,achieved_rate,achieved_per_level,limit,envelope,outage_estimate,wilson_hi")?;
            for r in &rows {
                let (e, hi) = r.outage.as_ref().map_or((String::new(), String::new()), |o| {
                    (o.estimate.to_string(), o.wilson_hi.to_string())
                });
                writeln!(out.sink, "{},{},{},{},{},{e},{hi}", r.n, r.achieved_rate, r.achieved_per_level, r.limit, r.envelope)?;
            }
        }
        Format::Pgm => return Err(Failure::Usage("dof-table supports json and csv".into())),
    }
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("XCHAN_THREADS") else { return Ok(()) };
    let threads: usize = v.parse().map_err(|_| Failure::Usage(format!("XCHAN_THREADS=`{v}` is not a count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: &Cli) -> CmdResult {
    configure_threads()?;
    let stdout = io::stdout();
    let mut out = Out { config: &cli.command, sink: stdout.lock() };
    match &cli.command {
        Command::Rates(a) => cmd_rates(a, &mut out),
        Command::DetSim(a) => cmd_det_sim(a, &mut out),
        Command::GaussSim(a) => cmd_gauss_sim(a, &mut out),
        Command::Mindist(a) => cmd_mindist(a, &mut out),
        Command::Outage(a) => cmd_outage(a, &mut out),
        Command::Groshev(a) => cmd_groshev(a, &mut out),
        Command::MacMap(a) => cmd_mac_map(a, &mut out),
        Command::Bounds(a) => cmd_bounds(a, &mut out),
        Command::DofTable(a) => cmd_dof_table(a, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Violation(m) => (1, m),
                Failure::Usage(m) => (2, m),
                Failure::Budget(m) => (3, m),
                Failure::Io(e) => (1, e.to_string()),
            };
            eprintln!("xchan: {msg}");
            ExitCode::from(code)
        }
    }
}
