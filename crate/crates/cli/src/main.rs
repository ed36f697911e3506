//! Command-line front end: certify jobs read from JSON files.

mod job;

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use job::{JobConfig, PipelineKind, Target};
use koopman_gate::certify::{
    affine_only_1d, finite_section_norm, monomial_ratio_witness, polyaut_2d_certificate, replay,
    span_check_2x2, theorem1_certificate,
};
use koopman_gate::dynamics::{PeriodicOrbit, Stability};
use koopman_gate::{CertifyOptions, Error, ProbeSource, SpaceDescriptor, Tolerances};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

const SCHEMA: &str = "v1";

#[derive(Parser)]
#[command(name = "koopman-gate", version, about = "Certify unboundedness of composition operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for `batch` (0 uses all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    r_max: Option<usize>,
    #[arg(long, global = true)]
    n_max: Option<u32>,
    #[arg(long, global = true, value_enum)]
    tolerance_profile: Option<Profile>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one job from a JSON file.
    Run { job: PathBuf },
    /// Run one job per line of an NDJSON file.
    Batch {
        #[arg(value_name = "JOBS")]
        file: PathBuf,
    },
    /// Recompute a certificate from a saved report and compare.
    Replay { report: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Default,
    Strict,
}

impl Profile {
    fn name(self) -> &'static str {
        match self {
            Profile::Default => "default",
            Profile::Strict => "strict",
        }
    }
}

/// Flags that override per-job parameters.
#[derive(Clone, Copy)]
struct Overrides {
    seed: Option<u64>,
    r_max: Option<usize>,
    n_max: Option<u32>,
    profile: Option<Profile>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum FailKind {
    Config,
    Numerical,
}

impl FailKind {
    fn exit_code(self) -> u8 {
        match self {
            FailKind::Config => 2,
            FailKind::Numerical => 3,
        }
    }
}

#[derive(Debug)]
struct Failure {
    kind: FailKind,
    message: String,
}

impl Failure {
    fn config(message: impl Into<String>) -> Self {
        Failure {
            kind: FailKind::Config,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::OrbitResidual { .. } | Error::NotFixedPoint { .. } | Error::BlockLeakage { .. } | Error::Numerical(_) => {
                FailKind::Numerical
            }
            _ => FailKind::Config,
        };
        Failure {
            kind,
            message: e.to_string(),
        }
    }
}

fn options(job: &JobConfig, ov: Overrides) -> Result<CertifyOptions, Failure> {
    let p = &job.params;
    let mut o = CertifyOptions::default();
    let profile = ov
        .profile
        .map(|p| p.name().to_string())
        .or_else(|| p.tolerance_profile.clone())
        .unwrap_or_else(|| "default".into());
    o.tolerances =
        Tolerances::profile(&profile).ok_or_else(|| Failure::config(format!("unknown tolerance profile {profile:?}")))?;
    p.tolerances.apply(&mut o.tolerances);
    o.tolerances.validate()?;
    if let Some(v) = ov.r_max.or(p.r_max) {
        o.r_max = v;
    }
    if let Some(v) = ov.n_max.or(p.n_max) {
        o.n_max = v;
    }
    if let Some(v) = ov.seed.or(p.seed) {
        o.seed = v;
    }
    if let Some(v) = p.norm_trace {
        o.norm_trace = v;
    }
    if let Some(v) = p.saddle_starts {
        o.saddle_starts = v;
    }
    if let Some(v) = p.dimension_depth {
        o.dimension_depth = v;
    }
    if o.r_max == 0 {
        return Err(Failure::config("r_max must be at least 1"));
    }
    Ok(o)
}

fn need<'a, V>(v: &'a Option<V>, field: &str, pipeline: &str) -> Result<&'a V, Failure> {
    v.as_ref()
        .ok_or_else(|| Failure::config(format!("pipeline {pipeline} requires field \"{field}\"")))
}

fn need_map<'a>(job: &'a JobConfig, pipeline: &str) -> Result<&'a koopman_gate::Map, Failure> {
    match need(&job.target, "target", pipeline)? {
        Target::Map(m) => Ok(m),
        Target::Word(_) => Err(Failure::config(format!("pipeline {pipeline} needs a polynomial map target, not a word"))),
    }
}

fn to_value<S: Serialize>(v: &S) -> Result<Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure {
        kind: FailKind::Numerical,
        message: format!("serialization failed: {e}"),
    })
}

/// Runs the pipeline and returns its `result` payload.
fn execute(job: &JobConfig, ov: Overrides) -> Result<Value, Failure> {
    let opts = options(job, ov)?;
    let space = || -> Result<&SpaceDescriptor, Failure> {
        job.space
            .as_ref()
            .ok_or_else(|| Failure::config("field \"space\" is required for this pipeline"))
    };
    match job.pipeline {
        PipelineKind::Theorem1 => {
            let f = need_map(job, "theorem1")?;
            let pts = job::points(need(&job.orbit, "orbit", "theorem1")?);
            if pts.is_empty() {
                return Err(Failure::config("orbit must contain at least one point"));
            }
            let orbit = PeriodicOrbit {
                period: pts.len(),
                points: pts,
                multipliers: vec![],
                class: Stability::Indifferent,
                residual: 0.0,
            };
            to_value(&theorem1_certificate(space()?, f, &orbit, &opts)?)
        }
        PipelineKind::Affine1d => to_value(&affine_only_1d(space()?, need_map(job, "affine1d")?, &opts)?),
        PipelineKind::Polyaut2d => {
            let w = match need(&job.target, "target", "polyaut2d")? {
                Target::Word(w) => w,
                Target::Map(_) => return Err(Failure::config("pipeline polyaut2d needs a word target with \"letters\"")),
            };
            let probe = match &job.probe {
                None => ProbeSource::Default,
                Some(v) if v.is_empty() => ProbeSource::None,
                Some(v) => ProbeSource::Custom(v.iter().map(job::matrix).collect()),
            };
            to_value(&polyaut_2d_certificate(space()?, w, &probe, &opts)?)
        }
        PipelineKind::SpanCheck => {
            let mats: Vec<_> = need(&job.matrices, "matrices", "span_check")?.iter().map(job::matrix).collect();
            to_value(&span_check_2x2(&mats)?)
        }
        PipelineKind::FiniteSection => {
            let f = need_map(job, "finite_section")?;
            let p = job::point(need(&job.point, "point", "finite_section")?);
            let n = job.n.unwrap_or(opts.n_max);
            let sp = space()?;
            let trace = (1..=n)
                .map(|k| finite_section_norm(sp, f, &p, k))
                .collect::<koopman_gate::Result<Vec<_>>>()?;
            Ok(json!({ "norms": to_value(&trace)? }))
        }
        PipelineKind::MonomialWitness => {
            let f = need_map(job, "monomial_witness")?;
            let n = job.n.unwrap_or(opts.n_max);
            let ratios = monomial_ratio_witness(space()?, f, n)?;
            let ratios: Vec<Value> = ratios.into_iter().map(|(n, r)| json!({ "n": n, "ratio": r })).collect();
            Ok(json!({ "ratios": ratios }))
        }
    }
}

fn pipeline_name(k: PipelineKind) -> &'static str {
    match k {
        PipelineKind::Theorem1 => "theorem1",
        PipelineKind::Affine1d => "affine1d",
        PipelineKind::Polyaut2d => "polyaut2d",
        PipelineKind::SpanCheck => "span_check",
        PipelineKind::FiniteSection => "finite_section",
        PipelineKind::MonomialWitness => "monomial_witness",
    }
}

fn ok_report(job: &JobConfig, result: Value) -> Value {
    json!({
        "schema": SCHEMA,
        "id": job.id,
        "pipeline": pipeline_name(job.pipeline),
        "status": "ok",
        "result": result,
    })
}

fn error_report(id: Option<&str>, pipeline: Option<PipelineKind>, f: &Failure) -> Value {
    json!({
        "schema": SCHEMA,
        "id": id,
        "pipeline": pipeline.map(pipeline_name),
        "status": "error",
        "error": { "kind": f.kind, "message": f.message },
    })
}

/// Parses and runs one job; the report is produced even on failure.
fn process(text: &str, ov: Overrides) -> (Value, Option<FailKind>) {
    let job = match job::parse_job(text) {
        Ok(j) => j,
        Err(msg) => {
            let f = Failure::config(msg);
            // best effort: keep the id when the rest of the object is bad
            let id = serde_json::from_str::<Value>(text)
                .ok()
                .and_then(|v| v.get("id").and_then(Value::as_str).map(str::to_owned));
            return (error_report(id.as_deref(), None, &f), Some(f.kind));
        }
    };
    log::info!("job {:?}: pipeline {}", job.id, pipeline_name(job.pipeline));
    match execute(&job, ov) {
        Ok(result) => (ok_report(&job, result), None),
        Err(f) => {
            log::warn!("job {:?} failed: {}", job.id, f.message);
            (error_report(job.id.as_deref(), Some(job.pipeline), &f), Some(f.kind))
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::config(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::config(format!("cannot write to stdout: {e}"))),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))
}

fn run_one(path: &Path, out: Option<&Path>, ov: Overrides) -> Result<(), Failure> {
    let text = read(path)?;
    // malformed JSON is reported on stderr only
    serde_json::from_str::<Value>(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let (report, fail) = process(&text, ov);
    let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
    s.push('\n');
    emit(out, &s)?;
    match fail {
        None => Ok(()),
        Some(kind) => Err(Failure {
            kind,
            message: report["error"]["message"].as_str().unwrap_or_default().to_owned(),
        }),
    }
}

fn run_batch(path: &Path, out: Option<&Path>, jobs: usize, ov: Overrides) -> Result<(), Failure> {
    let text = read(path)?;
    let lines: Vec<&str> = text.lines().filter(|l| !l.trim().is_empty()).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Failure::config(format!("cannot start worker pool: {e}")))?;
    let reports: Vec<(Value, Option<FailKind>)> = pool.install(|| lines.par_iter().map(|l| process(l, ov)).collect());
    let mut s = String::new();
    for (r, _) in &reports {
        s.push_str(&serde_json::to_string(r).expect("report serializes"));
        s.push('\n');
    }
    emit(out, &s)?;
    let failed = reports.iter().filter(|(_, f)| f.is_some()).count();
    if failed > 0 {
        log::warn!("{failed} of {} jobs failed", reports.len());
    }
    Ok(())
}

fn run_replay(path: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let text = read(path)?;
    let report: Value = serde_json::from_str(&text).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
    let cert_value = report
        .get("result")
        .cloned()
        .ok_or_else(|| Failure::config("report has no \"result\" field"))?;
    let cert: koopman_gate::Certificate = serde_json::from_value(cert_value.clone())
        .map_err(|e| Failure::config(format!("result is not a certificate: {e}")))?;
    let again = replay(&cert)?;
    let again_value = to_value(&again)?;
    let same = again_value == cert_value;
    let summary = json!({
        "schema": SCHEMA,
        "id": report.get("id").cloned().unwrap_or(Value::Null),
        "pipeline": "replay",
        "status": "ok",
        "result": { "identical": same, "verdict": to_value(&again.verdict)? },
    });
    let mut s = serde_json::to_string_pretty(&summary).expect("report serializes");
    s.push('\n');
    emit(out, &s)?;
    if same {
        Ok(())
    } else {
        Err(Failure {
            kind: FailKind::Numerical,
            message: "replayed certificate differs from the stored one".into(),
        })
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KOOPMAN_GATE_LOG", "warn")).init();
    let cli = Cli::parse();
    let ov = Overrides {
        seed: cli.seed,
        r_max: cli.r_max,
        n_max: cli.n_max,
        profile: cli.tolerance_profile,
    };
    let out = cli.out.as_deref();
    let result = match &cli.command {
        Command::Run { job } => run_one(job, out, ov),
        Command::Batch { file } => run_batch(file, out, cli.jobs, ov),
        Command::Replay { report } => run_replay(report, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("koopman-gate: {}", f.message);
            ExitCode::from(f.kind.exit_code())
        }
    }
}
