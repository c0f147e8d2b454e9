use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::json;

use sscomp::backends::{compile, parse_space, serialize_space, Backend, CompileOptions, CompiledSpace};
use sscomp::dataset::Dataset;
use sscomp::decode::{decode_point, point_from_json, point_to_json};
use sscomp::normalize::{normalize_with, NormalizeOptions};
use sscomp::operators::Registry;
use sscomp::pipeline::{parse_pipeline, serialize_pipeline, PipelineExpr};
use sscomp::search::{grid_search, random_search, trial_rng, Metric, Objective, SearchHistory};
use sscomp::search::sample_point;
use sscomp::value::Config;

use crate::args::*;

/// A failure that means the library broke its own guarantees.
#[derive(Debug)]
pub struct Internal(pub String);

impl fmt::Display for Internal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "internal consistency error: {}", self.0)
    }
}

impl std::error::Error for Internal {}

pub fn run(cli: &Cli) -> Result<()> {
    let cap = cli.disjunct_cap;
    match &cli.command {
        Command::Compile(a) => cmd_compile(a, cap),
        Command::Validate(a) => cmd_validate(a),
        Command::Normalize(a) => cmd_normalize(a, cap),
        Command::Sample(a) => cmd_sample(a),
        Command::Decode(a) => cmd_decode(a),
        Command::Search(a) => cmd_search(a, cap),
        Command::GridSearch(a) => cmd_grid_search(a, cap),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("cannot write {}", path.display())),
        None => stdout(text),
    }
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn stdout(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn load_registry(a: &RegistryArgs) -> Result<Registry> {
    let reg = match &a.registry {
        Some(path) => Registry::parse(&read(path)?).with_context(|| format!("{}", path.display()))?,
        None => Registry::bundled(),
    };
    Ok(if a.no_constraints { reg.without_constraints() } else { reg })
}

fn load_pipeline(path: &Path) -> Result<PipelineExpr> {
    parse_pipeline(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn load_space(path: &Path) -> Result<CompiledSpace> {
    parse_space(&read(path)?).with_context(|| format!("{}", path.display()))
}

fn backend(b: BackendArg) -> Backend {
    match b {
        BackendArg::Flat => Backend::Flat,
        BackendArg::Grid => Backend::Grid,
        BackendArg::Nested => Backend::Nested,
    }
}

fn cmd_compile(a: &CompileArgs, cap: usize) -> Result<()> {
    let reg = load_registry(&a.registry)?;
    let p = load_pipeline(&a.pipeline)?;
    let opts = CompileOptions {
        disjunct_cap: cap,
        cuts: a.cuts,
        seed: a.seed,
    };
    let space = compile(&p, &reg, backend(a.backend), &opts)?;
    emit(a.output.as_deref(), &serialize_space(&space))
}

fn parse_config(arg: &str) -> Result<Config> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        read(Path::new(arg))?
    };
    let json: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("configuration `{arg}`"))?;
    Ok(point_from_json(&json)?)
}

fn cmd_validate(a: &ValidateArgs) -> Result<()> {
    let reg = load_registry(&a.registry)?;
    let config = parse_config(&a.config)?;
    reg.lookup(&a.op)?.validate(&config)?;
    stdout("ok\n")?;
    Ok(())
}

fn cmd_normalize(a: &NormalizeArgs, cap: usize) -> Result<()> {
    let reg = load_registry(&a.registry)?;
    let spec = reg.lookup(&a.op)?;
    let (space, _) = normalize_with(&spec.hyperparams, &NormalizeOptions { disjunct_cap: cap })?;
    stdout(&format!("{}\n", serde_json::to_string_pretty(&space.to_json())?))?;
    Ok(())
}

fn cmd_sample(a: &SampleArgs) -> Result<()> {
    let space = load_space(&a.space)?;
    let mut out = String::new();
    for i in 0..a.n {
        let point = sample_point(&space, &mut trial_rng(a.seed, i))?;
        out.push_str(&point_to_json(&point).to_string());
        out.push('\n');
    }
    emit(a.output.as_deref(), &out)
}

fn cmd_decode(a: &DecodeArgs) -> Result<()> {
    let reg = load_registry(&a.registry)?;
    let planned = load_pipeline(&a.pipeline)?;
    let space = load_space(&a.space)?;
    let json: serde_json::Value = serde_json::from_str(&read(&a.point)?)
        .with_context(|| format!("{}", a.point.display()))?;
    let point = point_from_json(&json).with_context(|| format!("{}", a.point.display()))?;
    let configured = decode_point(&planned, &space, &point, &reg).map_err(|e| match e {
        sscomp::Error::SchemaViolation { .. } => anyhow::Error::new(Internal(format!(
            "a point of the space decodes to an invalid configuration: {e}"
        ))),
        other => other.into(),
    })?;
    let mut text = serialize_pipeline(&configured);
    text.push('\n');
    emit(a.output.as_deref(), &text)
}

fn objective(c: &SearchCommon) -> Result<Objective> {
    let data = Dataset::from_csv_path(&c.data)?;
    let metric = match c.metric {
        MetricArg::Accuracy => Metric::Accuracy,
        MetricArg::ErrorRate => Metric::ErrorRate,
    };
    Ok(Objective::new(data, metric, c.folds, c.seed)?)
}

fn report(c: &SearchCommon, history: &SearchHistory) -> Result<()> {
    if let Some(path) = &c.output {
        fs::write(path, history.to_jsonl()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    if let Some(path) = &c.convergence {
        fs::write(path, history.convergence_csv()).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let Some(best) = history.best() else {
        stdout(&format!("{}\n", json!({"trials": 0})))?;
        return Ok(());
    };
    stdout(&format!(
        "{}\n",
        json!({
            "trials": history.trials.len(),
            "failed": history.failed(),
            "best_trial": best.index,
            "best_loss": best.loss,
            "best_point": point_to_json(&best.point),
        })
    ))?;
    Ok(())
}

fn cmd_search(a: &SearchArgs, cap: usize) -> Result<()> {
    let c = &a.common;
    let reg = load_registry(&c.registry)?;
    let p = load_pipeline(&c.pipeline)?;
    let obj = objective(c)?;
    let opts = CompileOptions {
        disjunct_cap: cap,
        ..CompileOptions::default()
    };
    let space = compile(&p, &reg, backend(a.backend), &opts)?;
    let history = random_search(&p, &space, &reg, &obj, a.iters, c.seed)?;
    report(c, &history)
}

fn cmd_grid_search(a: &GridSearchArgs, cap: usize) -> Result<()> {
    let c = &a.common;
    let reg = load_registry(&c.registry)?;
    let p = load_pipeline(&c.pipeline)?;
    let obj = objective(c)?;
    let opts = CompileOptions {
        disjunct_cap: cap,
        cuts: a.cuts,
        seed: c.seed,
    };
    let CompiledSpace::Grid(grid) = compile(&p, &reg, Backend::Grid, &opts)? else {
        bail!("grid compilation returned another backend");
    };
    let history = grid_search(&p, &grid, &reg, &obj, a.cap)?;
    report(c, &history)
}
