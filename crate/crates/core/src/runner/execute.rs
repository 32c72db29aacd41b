use std::fs;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ExecutionPlan, RunnerError};

/// Name of the file a program may leave in its working directory.
pub const RESULT_FILE: &str = "result.json";

const EXCERPT_BYTES: usize = 2048;

/// One measured repetition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRun {
    pub repetition_index: u32,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub peak_mem_bytes: Option<u64>,
    pub exit_ok: bool,
    #[serde(default)]
    pub log_excerpt: String,
}

#[derive(Debug, Default, PartialEq)]
struct Reported {
    accuracy: Option<f64>,
    energy_j: Option<f64>,
    peak_mem_bytes: Option<u64>,
}

fn read_result_file(dir: &Path) -> Result<Reported, String> {
    let path = dir.join(RESULT_FILE);
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Reported::default()),
        Err(e) => return Err(format!("{RESULT_FILE}: {e}")),
    };
    let doc: Value = serde_json::from_slice(&bytes).map_err(|e| format!("{RESULT_FILE}: {e}"))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| format!("{RESULT_FILE}: expected a JSON object"))?;
    let number = |key: &str, ok: fn(f64) -> bool| -> Result<Option<f64>, String> {
        match obj.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => match v.as_f64() {
                Some(x) if x.is_finite() && ok(x) => Ok(Some(x)),
                _ => Err(format!("{RESULT_FILE}: `{key}` out of range: {v}")),
            },
        }
    };
    let peak_mem_bytes = match obj.get("peak_mem_bytes") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_u64()
                .ok_or_else(|| format!("{RESULT_FILE}: `peak_mem_bytes` must be a non-negative integer"))?,
        ),
    };
    Ok(Reported {
        accuracy: number("accuracy", |x| (0.0..=1.0).contains(&x))?,
        energy_j: number("energy_j", |x| x >= 0.0)?,
        peak_mem_bytes,
    })
}

fn excerpt(stdout: &[u8], stderr: &[u8], extra: Option<&str>) -> String {
    let mut text = String::from_utf8_lossy(stdout).into_owned();
    text.push_str(&String::from_utf8_lossy(stderr));
    if let Some(extra) = extra {
        text.push_str(extra);
        text.push('\n');
    }
    if text.len() <= EXCERPT_BYTES {
        return text;
    }
    let mut start = text.len() - EXCERPT_BYTES;
    while !text.is_char_boundary(start) {
        start += 1;
    }
    text[start..].to_string()
}

/// Runs the plan `repetitions` times, one child process at a time.
///
/// Each repetition gets a fresh scratch working directory so result files
/// never leak between runs. Failing repetitions are recorded, not retried.
pub fn execute(plan: &ExecutionPlan, repetitions: u32) -> Result<Vec<RawRun>, RunnerError> {
    if repetitions == 0 {
        return Err(RunnerError::InvalidRepetitions);
    }
    let (program, args) = plan.argv.split_first().ok_or_else(|| RunnerError::NotLaunchable {
        command: plan.entry_command.clone(),
        source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty command"),
    })?;

    let mut runs = Vec::with_capacity(repetitions as usize);
    for repetition_index in 0..repetitions {
        let scratch = tempfile::Builder::new()
            .prefix("quest-run-")
            .tempdir()
            .map_err(|source| RunnerError::Io {
                context: "creating scratch directory".into(),
                source,
            })?;
        let mut cmd = Command::new(program);
        cmd.args(args)
            .current_dir(scratch.path())
            .env("QUEST_PROGRAM_DIR", &plan.working_dir)
            .env("QUEST_REPETITION", repetition_index.to_string())
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped());

        let started = Instant::now();
        let child = cmd.spawn().map_err(|source| RunnerError::NotLaunchable {
            command: plan.entry_command.clone(),
            source,
        })?;
        let output = child.wait_with_output().map_err(|source| RunnerError::Io {
            context: format!("waiting for `{}`", plan.entry_command),
            source,
        })?;
        let wall_time_s = started.elapsed().as_secs_f64().max(1e-9);

        let mut run = RawRun {
            repetition_index,
            wall_time_s,
            accuracy: None,
            energy_j: None,
            peak_mem_bytes: None,
            exit_ok: output.status.success(),
            log_excerpt: String::new(),
        };
        let mut note = None;
        if run.exit_ok {
            match read_result_file(scratch.path()) {
                Ok(reported) => {
                    run.accuracy = reported.accuracy;
                    run.energy_j = reported.energy_j;
                    run.peak_mem_bytes = reported.peak_mem_bytes;
                }
                Err(msg) => {
                    run.exit_ok = false;
                    note = Some(msg);
                }
            }
        } else {
            note = Some(format!("exited with {}", output.status));
        }
        run.log_excerpt = excerpt(&output.stdout, &output.stderr, note.as_deref());
        runs.push(run);
    }
    Ok(runs)
}
