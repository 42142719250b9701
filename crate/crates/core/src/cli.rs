//! Command-line front end. `dispatch` parses arguments, runs one subcommand
//! and returns the process exit code: 0 on success, 1 on usage errors, 2 on
//! data errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;
use serde::Serialize;
use serde_json::{json, Value};

use crate::baselines::{baf_filter, cmax_run, sequential_pipeline, BafConfig};
use crate::contrast::{hard_map, smooth_map, ConfidenceMap};
use crate::error::Error;
use crate::events::{
    read_events, window_stream, write_events, EventFormat, EventLabels, EventStream, EventWindow,
    ReadOptions, SensorGeometry, WindowPolicy,
};
use crate::joint::{classify, solve, EaBaseline, JointConfig, JointResult, Penalty, TraceRecord};
use crate::metrics::{confusion, esr, motion_rmse, read_trajectory, write_trajectory, EvalReport};
use crate::render::{write_pgm, write_png};
use crate::synth::{generate, Pattern, SceneSpec};
use crate::warp::{warp, MotionModel, MotionParams};

#[derive(Debug, Parser, Serialize)]
#[command(name = "evjoint", version, about = "Joint motion compensation and denoising of event streams")]
struct Cli {
    /// Log format on stderr. `json` also streams per-iteration traces.
    #[arg(long, global = true, value_enum, default_value_t = LogFormat::Text)]
    log: LogFormat,
    /// Worker threads for map accumulation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum LogFormat {
    Text,
    Json,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Generate a labeled synthetic stream.
    Synth(SynthArgs),
    /// Label events as signal or noise.
    Denoise(DenoiseArgs),
    /// Estimate per-window motion.
    EstimateMotion(EstimateArgs),
    /// Score predicted labels and motion against ground truth.
    Eval(EvalArgs),
    /// Write the (optionally warped) event map as an image.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum PatternKind {
    Edge,
    Dot,
    MultiEdge,
}

#[derive(Debug, Args, Serialize)]
struct SynthArgs {
    #[arg(long, value_enum, default_value_t = PatternKind::Edge)]
    pattern: PatternKind,
    /// Edge position for `edge`.
    #[arg(long, default_value_t = 10.0)]
    x0: f64,
    /// Dot center `x,y` (default: sensor center).
    #[arg(long, value_delimiter = ',')]
    center: Option<Vec<f64>>,
    #[arg(long, default_value_t = 3.0)]
    radius: f64,
    #[arg(long, default_value_t = 7.0)]
    spacing: f64,
    #[arg(long, default_value = "translation2d")]
    model: MotionModel,
    /// Pattern motion: `vx,vy` in px/s, or `omega` in rad/s.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "20,0")]
    motion: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    width: usize,
    #[arg(long, default_value_t = 64)]
    height: usize,
    #[arg(long, default_value_t = 0.1)]
    duration: f64,
    #[arg(long, default_value_t = 1.0)]
    threshold: f64,
    #[arg(long, default_value_t = 1.0)]
    log_contrast: f64,
    #[arg(long, default_value_t = 0.0)]
    noise_rate: f64,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the compensating motion as a trajectory CSV.
    #[arg(long)]
    gt: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct InputArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Sensor size for formats that do not store it (default: bounding box).
    #[arg(long, requires = "height")]
    width: Option<usize>,
    #[arg(long, requires = "width")]
    height: Option<usize>,
    /// Sort out-of-order input instead of rejecting it.
    #[arg(long)]
    sort: bool,
}

#[derive(Debug, Args, Serialize)]
struct WindowArgs {
    #[arg(long, conflicts_with = "window_count")]
    window_ms: Option<f64>,
    #[arg(long)]
    window_count: Option<usize>,
}

impl WindowArgs {
    fn policy(&self) -> Option<WindowPolicy> {
        match (self.window_ms, self.window_count) {
            (Some(ms), _) => Some(WindowPolicy::FixedDuration(ms * 1e-3)),
            (None, Some(n)) => Some(WindowPolicy::FixedCount(n)),
            (None, None) => None,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct SolverArgs {
    #[arg(long, default_value = "translation2d")]
    model: MotionModel,
    /// L1 weight, relative to the map's mass-weighted mean square value.
    #[arg(long)]
    alpha: Option<f64>,
    /// Fidelity weight, relative to the pixel count.
    #[arg(long)]
    beta: Option<f64>,
    /// b_EA as a multiple of the alignment-only warm start's f_EA.
    #[arg(long, conflicts_with = "b_ea")]
    kappa: Option<f64>,
    /// Explicit b_EA (skips the warm start).
    #[arg(long, allow_hyphen_values = true)]
    b_ea: Option<f64>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Motion step size in pixels of displacement across the window.
    #[arg(long)]
    lr_theta: Option<f64>,
    #[arg(long)]
    lr_logits: Option<f64>,
}

impl SolverArgs {
    fn config(&self) -> JointConfig {
        let d = JointConfig::default();
        let b_ea = match (self.b_ea, self.kappa) {
            (Some(b), _) => EaBaseline::Explicit(b),
            (None, Some(k)) => EaBaseline::WarmstartScaled(k),
            (None, None) => d.b_ea,
        };
        JointConfig {
            model: self.model,
            alpha: self.alpha.map_or(d.alpha, Penalty::Scaled),
            beta: self.beta.map_or(d.beta, Penalty::Scaled),
            b_ea,
            iterations: self.iters.unwrap_or(d.iterations),
            lr_theta: self.lr_theta.unwrap_or(d.lr_theta),
            lr_logits: self.lr_logits.unwrap_or(d.lr_logits),
            sigma: self.sigma.unwrap_or(d.sigma),
            tau: self.tau.unwrap_or(d.tau),
            ..d
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DenoiseMethod {
    Baf,
    CmaxSeq,
    Joint,
}

#[derive(Debug, Args, Serialize)]
struct BafArgs {
    #[arg(long, default_value_t = 10.0)]
    baf_dt_ms: f64,
    #[arg(long, default_value_t = 1)]
    baf_radius: usize,
    #[arg(long, default_value_t = 1)]
    baf_support: usize,
}

impl BafArgs {
    fn config(&self) -> BafConfig {
        BafConfig {
            dt_max: self.baf_dt_ms * 1e-3,
            radius: self.baf_radius,
            min_support: self.baf_support,
        }
    }
}

#[derive(Debug, Args, Serialize)]
struct DenoiseArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = DenoiseMethod::Joint)]
    method: DenoiseMethod,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    baf: BafArgs,
    /// Sidecar path (default: `<output>.json`).
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MotionMethod {
    Cmax,
    Joint,
}

#[derive(Debug, Args, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Trajectory CSV.
    #[arg(short, long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value_t = MotionMethod::Joint)]
    method: MotionMethod,
    #[command(flatten)]
    window: WindowArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    sidecar: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct EvalArgs {
    /// Events labeled by a denoiser.
    #[arg(long)]
    pred: PathBuf,
    /// The same events with ground-truth labels.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Report ESR of the kept events.
    #[arg(long)]
    esr: bool,
    /// ESR reference count (default: number of kept events).
    #[arg(long, requires = "esr")]
    m_ref: Option<usize>,
    /// Estimated trajectory CSV.
    #[arg(long, requires = "gt")]
    rmse: Option<PathBuf>,
    /// Ground-truth trajectory CSV.
    #[arg(long, requires = "rmse")]
    gt: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct RenderArgs {
    #[command(flatten)]
    input: InputArgs,
    /// PGM output.
    #[arg(short, long)]
    output: PathBuf,
    /// Warp by these parameters first (`vx,vy` or `omega`).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Option<Vec<f64>>,
    #[arg(long, default_value = "translation2d")]
    model: MotionModel,
    /// Gaussian width; omitted means hard counts.
    #[arg(long)]
    sigma: Option<f64>,
    /// Also write a PNG.
    #[arg(long)]
    png: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidConfig(_) | Error::InvalidSigma(_) | Error::DimensionMismatch { .. } => {
                Failure::Usage(e.to_string())
            }
            e => Failure::Data(e),
        }
    }
}

type Outcome<T = ()> = std::result::Result<T, Failure>;

/// Run the command line `args` (including the program name) and return the
/// exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    init_logging(cli.log);
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let outcome = match cli.threads {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| run(&cli, &argv)),
            Err(e) => Err(Failure::Usage(format!("cannot start {n} threads: {e}"))),
        },
        None => run(&cli, &argv),
    };
    match outcome {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn init_logging(format: LogFormat) {
    let mut builder = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"));
    if format == LogFormat::Json {
        builder.format(|buf, record| {
            let line = json!({"level": record.level().as_str(), "target": record.target(), "msg": record.args().to_string()});
            writeln!(buf, "{line}")
        });
    }
    // a second dispatch in the same process keeps the first logger
    let _ = builder.try_init();
}

fn run(cli: &Cli, argv: &[String]) -> Outcome {
    match &cli.command {
        Command::Synth(a) => run_synth(cli, a),
        Command::Denoise(a) => run_denoise(cli, a, argv),
        Command::EstimateMotion(a) => run_estimate(cli, a, argv),
        Command::Eval(a) => run_eval(a),
        Command::Render(a) => run_render(a),
    }
}

fn run_synth(cli: &Cli, a: &SynthArgs) -> Outcome {
    let geometry = SensorGeometry::new(a.width, a.height)?;
    let pattern = match a.pattern {
        PatternKind::Edge => Pattern::VerticalEdge { x0: a.x0 },
        PatternKind::Dot => {
            let center = match a.center.as_deref() {
                Some([x, y]) => [*x, *y],
                Some(other) => {
                    return Err(Failure::Usage(format!("--center takes x,y; got {other:?}")));
                }
                None => [a.width as f64 / 2.0, a.height as f64 / 2.0],
            };
            Pattern::Dot {
                center,
                radius: a.radius,
            }
        }
        PatternKind::MultiEdge => Pattern::MultiEdge { spacing: a.spacing },
    };
    let motion = MotionParams::new(a.model, a.motion.clone())?;
    let spec = SceneSpec {
        duration: a.duration,
        contrast_threshold: a.threshold,
        noise_rate: a.noise_rate,
        log_contrast: a.log_contrast,
        ..SceneSpec::new(geometry, pattern, motion)
    };
    let scene = generate(&spec, cli.seed)?;
    write_events(
        &a.output,
        EventFormat::from_path(&a.output),
        scene.window.events(),
        Some(&scene.labels),
        geometry,
    )?;
    if let Some(gt) = &a.gt {
        let theta = scene.compensating();
        write_trajectory(gt, &[(0.0, theta.clone()), (a.duration, theta)])?;
    }
    info!(
        "wrote {} events ({} signal) to {}",
        scene.labels.len(),
        scene.labels.signal_count(),
        a.output.display()
    );
    Ok(())
}

fn load(input: &InputArgs) -> Outcome<(EventStream, SensorGeometry)> {
    let stream = read_events(
        &input.input,
        EventFormat::from_path(&input.input),
        ReadOptions { sort: input.sort },
    )?;
    let geometry = match (input.width, input.height) {
        (Some(w), Some(h)) => SensorGeometry::new(w, h)?,
        _ => stream.geometry_or_bounding(),
    };
    Ok((stream, geometry))
}

fn windows_of(stream: &EventStream, geometry: SensorGeometry, args: &WindowArgs) -> Outcome<Vec<EventWindow>> {
    Ok(match args.policy() {
        Some(policy) => window_stream(&stream.events, geometry, policy)?,
        None if stream.events.is_empty() => Vec::new(),
        None => vec![EventWindow::spanning(stream.events.clone(), geometry)?],
    })
}

fn sidecar_path(output: &Path, explicit: &Option<PathBuf>) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut s = output.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    })
}

fn emit_trace(cli: &Cli, window: usize, trace: &[TraceRecord]) {
    if cli.log != LogFormat::Json {
        return;
    }
    let stderr = std::io::stderr();
    let mut out = stderr.lock();
    for rec in trace {
        let mut v = serde_json::to_value(rec).unwrap_or(Value::Null);
        if let Value::Object(map) = &mut v {
            map.insert("window".into(), json!(window));
        }
        let _ = writeln!(out, "{v}");
    }
}

fn window_record(window: &EventWindow, result: &JointResult) -> Value {
    let parts = result.final_parts.or_else(|| result.trace.last().map(|r| r.parts));
    json!({
        "t_start": window.t_start(),
        "t_end": window.t_end(),
        "t_ref": window.t_ref(),
        "theta": result.theta.values,
        "f_EA": parts.map(|p| p.f_ea),
        "f_ED": parts.map(|p| p.f_ed),
        "R": parts.map(|p| p.regret),
        "iterations": result.trace.len(),
        "counts": {"events": window.len(), "kept": result.labels.signal_count()},
        "weights": result.weights,
        "event_weights": result.event_weights,
    })
}

fn write_json(path: &Path, value: &Value) -> Outcome {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))?;
    Ok(())
}

fn provenance(cli: &Cli, argv: &[String]) -> Value {
    json!({
        "argv": argv,
        "config": cli,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

fn run_denoise(cli: &Cli, a: &DenoiseArgs, argv: &[String]) -> Outcome {
    let (stream, geometry) = load(&a.input)?;
    let cfg = a.solver.config();
    cfg.validate()?;
    let baf = a.baf.config();
    baf.validate()?;
    let windows = windows_of(&stream, geometry, &a.window)?;
    let mut labels = Vec::with_capacity(stream.events.len());
    let mut records = Vec::with_capacity(windows.len());
    for (k, w) in windows.iter().enumerate() {
        let result = match a.method {
            DenoiseMethod::Joint => solve(w, &cfg)?,
            DenoiseMethod::CmaxSeq => sequential_pipeline(w, &baf, &cfg)?,
            DenoiseMethod::Baf => baf_only(w, &baf, &cfg)?,
        };
        emit_trace(cli, k, &result.trace);
        info!(
            "window {k}: {} events, {} kept, theta {:?}",
            w.len(),
            result.labels.signal_count(),
            result.theta.values
        );
        labels.extend(result.labels.iter());
        records.push(window_record(w, &result));
    }
    let labels = EventLabels(labels);
    write_events(
        &a.output,
        EventFormat::from_path(&a.output),
        &stream.events,
        Some(&labels),
        geometry,
    )?;
    let mut sidecar = provenance(cli, argv);
    sidecar["solver"] = serde_json::to_value(&cfg).unwrap_or(Value::Null);
    sidecar["windows"] = Value::Array(records);
    write_json(&sidecar_path(&a.output, &a.sidecar), &sidecar)
}

fn baf_only(window: &EventWindow, baf: &BafConfig, cfg: &JointConfig) -> crate::error::Result<JointResult> {
    let labels = baf_filter(window, baf)?;
    let event_weights = labels.iter().map(|s| if s { 1.0 } else { 0.0 }).collect();
    Ok(JointResult {
        theta: MotionParams::zero(cfg.model),
        conf: ConfidenceMap::filled(window.geometry(), 0.0),
        labels,
        event_weights,
        trace: Vec::new(),
        weights: crate::joint::ObjectiveWeights {
            alpha: 0.0,
            beta: 0.0,
            b_ea: 0.0,
            b_ed: 0.0,
        },
        warm_start: None,
        final_parts: None,
    })
}

fn run_estimate(cli: &Cli, a: &EstimateArgs, argv: &[String]) -> Outcome {
    let (stream, geometry) = load(&a.input)?;
    let cfg = a.solver.config();
    cfg.validate()?;
    let windows = windows_of(&stream, geometry, &a.window)?;
    let mut samples = Vec::with_capacity(windows.len());
    let mut records = Vec::with_capacity(windows.len());
    for (k, w) in windows.iter().enumerate() {
        let result = match a.method {
            MotionMethod::Joint => solve(w, &cfg)?,
            MotionMethod::Cmax => {
                let run = cmax_run(w, cfg.model, &cfg)?;
                let conf = ConfidenceMap::filled(geometry, 40.0);
                let (labels, event_weights) = classify(w, &run.theta, &conf, cfg.tau);
                JointResult {
                    theta: run.theta,
                    conf,
                    labels,
                    event_weights,
                    trace: Vec::new(),
                    weights: crate::joint::ObjectiveWeights {
                        alpha: 0.0,
                        beta: 0.0,
                        b_ea: 0.0,
                        b_ed: 0.0,
                    },
                    warm_start: None,
                    final_parts: None,
                }
            }
        };
        emit_trace(cli, k, &result.trace);
        info!("window {k}: t_ref {} theta {:?}", w.t_ref(), result.theta.values);
        samples.push((w.t_ref(), result.theta.clone()));
        records.push(window_record(w, &result));
    }
    write_trajectory(&a.output, &samples)?;
    let mut sidecar = provenance(cli, argv);
    sidecar["solver"] = serde_json::to_value(&cfg).unwrap_or(Value::Null);
    sidecar["windows"] = Value::Array(records);
    write_json(&sidecar_path(&a.output, &a.sidecar), &sidecar)
}

fn run_eval(a: &EvalArgs) -> Outcome {
    let pred = read_events(&a.pred, EventFormat::from_path(&a.pred), ReadOptions::default())?;
    let pred_labels = pred
        .labels
        .clone()
        .ok_or_else(|| Error::Metric(format!("{} carries no labels", a.pred.display())))?;
    let kept: Vec<_> = pred
        .events
        .iter()
        .zip(pred_labels.iter())
        .filter_map(|(e, s)| s.then_some(*e))
        .collect();
    let mut report = EvalReport {
        esr: None,
        m_ref: None,
        sensitivity: None,
        specificity: None,
        rmse: None,
        counts: None,
        kept: kept.len(),
        total: pred.events.len(),
    };
    if let Some(truth_path) = &a.truth {
        let truth = read_events(truth_path, EventFormat::from_path(truth_path), ReadOptions::default())?;
        let truth_labels = truth
            .labels
            .ok_or_else(|| Error::Metric(format!("{} carries no labels", truth_path.display())))?;
        let c = confusion(&pred_labels, &truth_labels)?;
        report.sensitivity = Some(c.sensitivity);
        report.specificity = Some(c.specificity);
        report.counts = Some(c.counts);
    }
    if a.esr {
        let m_ref = a.m_ref.unwrap_or(kept.len().max(1));
        report.esr = Some(esr(&kept, pred.geometry_or_bounding(), m_ref)?);
        report.m_ref = Some(m_ref);
    }
    if let (Some(est), Some(gt)) = (&a.rmse, &a.gt) {
        report.rmse = Some(motion_rmse(&read_trajectory(est)?, &read_trajectory(gt)?)?);
    }
    let value = serde_json::to_value(&report).unwrap_or(Value::Null);
    match &a.output {
        Some(path) => write_json(path, &value),
        None => {
            println!("{}", serde_json::to_string_pretty(&value).unwrap_or_default());
            Ok(())
        }
    }
}

fn run_render(a: &RenderArgs) -> Outcome {
    let (stream, geometry) = load(&a.input)?;
    let window = EventWindow::spanning(stream.events, geometry)?;
    let positions = match &a.theta {
        Some(values) => warp(&window, &MotionParams::new(a.model, values.clone())?)?.positions,
        None => window.positions(),
    };
    let map = match a.sigma {
        Some(s) => smooth_map(&positions, geometry, s)?,
        None => hard_map(&positions, geometry),
    };
    write_pgm(&a.output, &map)?;
    if let Some(png) = &a.png {
        write_png(png, &map)?;
    }
    Ok(())
}
