use std::io::Write;

use quest_core::registry::{NewPackage, SearchQuery, Severity};
use serde_json::{Map, Value};

use super::{read_json_file, repository, stdout_error};
use crate::args::{PackArgs, SearchArgs};
use crate::config::CliConfig;
use crate::{Failure, Io};

pub(super) fn pack(cfg: &CliConfig, args: PackArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let meta: Value = match (&args.meta, &args.meta_json) {
        (Some(path), _) => read_json_file(path)?,
        (None, Some(text)) => serde_json::from_str(text).map_err(|e| Failure::usage(format!("--meta-json: {e}")))?,
        (None, None) => Value::Object(Map::new()),
    };
    let Value::Object(meta) = meta else {
        return Err(Failure::usage("package metadata must be a JSON object"));
    };
    let repo = repository(cfg)?;
    let report = quest_core::registry::validate_meta(&Value::Object(meta.clone()), args.kind);
    for issue in report.issues.iter().filter(|i| i.severity == Severity::Warning) {
        let _ = writeln!(
            io.stderr,
            "warning: meta{}: {}",
            display_path(&issue.path),
            issue.message
        );
    }
    let created = repo.create_package(NewPackage {
        kind: args.kind,
        name: args.name,
        version: args.version,
        tags: args.tags.into_iter().filter(|t| !t.is_empty()).collect(),
        dependencies: args.deps,
        payload_path: args.payload,
        meta,
    })?;
    writeln!(io.stdout, "{}", created.uid).map_err(stdout_error)
}

fn display_path(path: &str) -> String {
    if path.is_empty() {
        String::new()
    } else {
        format!(".{path}")
    }
}

pub(super) fn search(cfg: &CliConfig, args: SearchArgs, io: &mut Io<'_>) -> Result<(), Failure> {
    let repo = repository(cfg)?;
    let query = SearchQuery {
        kind: args.kind,
        tags: args.tags.into_iter().collect(),
        name_substring: args.name,
    };
    for pkg in repo.search(&query) {
        let tags: Vec<&str> = pkg.tags.iter().map(String::as_str).collect();
        writeln!(
            io.stdout,
            "{}\t{}\t{}\t{}\t{}",
            pkg.uid,
            pkg.kind,
            pkg.name,
            pkg.version,
            tags.join(",")
        )
        .map_err(stdout_error)?;
    }
    Ok(())
}
