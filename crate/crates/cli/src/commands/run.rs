use std::path::Path;

use quest_core::pareto::metric;
use quest_core::registry::{Kind, PlatformDescriptor, Repository};
use quest_core::runner::{
    aggregate, detect_platform, execute, plan_run, snapshot_environment, AggregationPolicy, RawRun, RunnerError,
    Scalar, WorkflowDescriptor,
};
use serde_json::{json, Map, Value};

use super::{read_json_file, repository, split_pair, write_json};
use crate::args::RunArgs;
use crate::config::CliConfig;
use crate::{Failure, Io, EXIT_AGGREGATION};

pub(super) fn run(cfg: &CliConfig, args: RunArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let repo = repository(cfg)?;
    let mut workflow = match &args.workflow {
        Some(path) => read_json_file::<WorkflowDescriptor>(path)?,
        None => {
            let program = args
                .program
                .clone()
                .expect("clap requires --program without --workflow");
            let mut w = WorkflowDescriptor::new(program);
            w.model_ref = args.model.clone();
            w.dataset_ref = args.dataset.clone();
            w.repetitions = cfg.default_repetitions;
            for raw in &args.params {
                let (k, v) = split_pair(raw, '=')?;
                w.parameters.insert(k, Scalar::parse_loose(&v));
            }
            w
        }
    };
    if let Some(n) = args.repetitions {
        workflow.repetitions = n;
    }

    let platform = match &args.platform {
        Some(selector) => {
            let catalog = repo.catalog();
            let pkg = catalog
                .select(selector, None)
                .filter(|p| p.kind == Kind::Platform)
                .ok_or_else(|| Failure::usage(format!("no platform package matches `{selector}`")))?;
            PlatformDescriptor::from_meta(&pkg.meta)?
        }
        None => detect_platform(),
    };

    let plan = plan_run(&workflow, &repo, &platform).map_err(|e| Failure::usage(e.to_string()))?;
    for note in &plan.notes {
        let _ = writeln_err(io, &format!("note: {note}"));
    }
    let runs = execute(&plan, workflow.repetitions).map_err(|e| Failure::usage(e.to_string()))?;
    let policy = if args.strict {
        AggregationPolicy::Strict
    } else {
        AggregationPolicy::Lenient
    };
    let (metrics, dispersion) = match aggregate(&runs, policy) {
        Ok(result) => result,
        Err(e @ (RunnerError::NoSuccessfulRuns { .. } | RunnerError::StrictFailure { .. })) => {
            return Err(Failure::new(EXIT_AGGREGATION, failure_message(&e, &runs)));
        }
        Err(e) => return Err(Failure::usage(e.to_string())),
    };
    let environment = snapshot_environment(&platform, &plan.resolved_packages);

    let mut static_metrics = Map::new();
    if let Some(model) = &plan.model {
        static_metrics.insert(metric::MODEL_BYTES.into(), json!(dir_size(&repo, model)? as f64));
    }
    if let Some(price) = platform.price_usd {
        static_metrics.insert(metric::COST_USD.into(), json!(price));
    }

    write_json(
        io,
        &json!({
            "workflow": workflow,
            "metrics": metrics,
            "dispersion": dispersion,
            "environment": environment,
            "raw_runs": runs,
            "static_metrics": Value::Object(static_metrics),
        }),
    )
}

fn writeln_err(io: &mut Io<'_>, line: &str) -> std::io::Result<()> {
    use std::io::Write;
    writeln!(io.stderr, "{line}")
}

fn failure_message(err: &RunnerError, runs: &[RawRun]) -> String {
    let mut message = err.to_string();
    if let Some(last) = runs.iter().rev().find(|r| !r.exit_ok) {
        let excerpt = last.log_excerpt.trim_end();
        if !excerpt.is_empty() {
            message.push_str(&format!(
                "\nlast failed repetition ({}):\n{excerpt}",
                last.repetition_index
            ));
        }
    }
    message
}

fn dir_size(repo: &Repository, pkg: &quest_core::registry::ArtifactPackage) -> Result<u64, Failure> {
    fn walk(path: &Path) -> std::io::Result<u64> {
        let meta = std::fs::symlink_metadata(path)?;
        if !meta.is_dir() {
            return Ok(meta.len());
        }
        let mut total = 0;
        for entry in std::fs::read_dir(path)? {
            total += walk(&entry?.path())?;
        }
        Ok(total)
    }
    let dir = repo.payload_dir(pkg);
    walk(&dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))
}
