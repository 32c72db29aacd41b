use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{RunnerError, WorkflowDescriptor};
use crate::registry::{ArtifactPackage, Kind, OsFamily, PlatformDescriptor, Repository};

/// Everything needed to launch one workflow, computed without side effects.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExecutionPlan {
    /// Dependency closure of the program package, program last.
    pub resolved_packages: Vec<ArtifactPackage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ArtifactPackage>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<ArtifactPackage>,
    /// Entry command with every placeholder bound.
    pub entry_command: String,
    /// `entry_command` split into program and arguments.
    pub argv: Vec<String>,
    /// Payload directory of the program package.
    pub working_dir: PathBuf,
    pub parameter_bindings: BTreeMap<String, String>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ExecutionPlan {
    pub fn program(&self) -> &ArtifactPackage {
        self.resolved_packages.last().expect("plan always contains the program")
    }
}

/// Substitutes `{name}` placeholders. A `{` without a closing `}` is an
/// error; a stray `}` is kept literally.
pub fn render_template(template: &str, bindings: &BTreeMap<String, String>) -> Result<String, RunnerError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or_else(|| RunnerError::MalformedTemplate {
            template: template.to_string(),
            reason: format!("unmatched `{{` at byte {}", template.len() - rest.len() + open),
        })?;
        let name = &after[..close];
        if name.is_empty() || name.contains('{') {
            return Err(RunnerError::MalformedTemplate {
                template: template.to_string(),
                reason: format!("bad placeholder `{{{name}}}`"),
            });
        }
        let value = bindings
            .get(name)
            .ok_or_else(|| RunnerError::UnboundPlaceholder(name.to_string()))?;
        out.push_str(value);
        rest = &after[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn declared_os_families(meta: &serde_json::Map<String, Value>) -> Option<Vec<OsFamily>> {
    let parse = |v: &Value| v.as_str().and_then(|s| s.parse::<OsFamily>().ok());
    match meta.get("os_family")? {
        Value::Array(items) => Some(items.iter().filter_map(parse).collect()),
        v => parse(v).map(|f| vec![f]),
    }
}

/// Resolves the workflow against the repository and binds the program's
/// entry command. Reads only; the repository is left untouched.
pub fn plan_run(
    workflow: &WorkflowDescriptor,
    repository: &Repository,
    platform: &PlatformDescriptor,
) -> Result<ExecutionPlan, RunnerError> {
    workflow.check()?;
    let catalog = repository.catalog();
    let lookup = |role: &'static str, dep| {
        catalog
            .select(dep, None)
            .cloned()
            .ok_or_else(|| RunnerError::Unresolvable {
                role,
                selector: dep.to_string(),
            })
    };

    let program = lookup("program", &workflow.program_ref)?;
    if program.kind != Kind::Program {
        return Err(RunnerError::NotAProgram {
            uid: program.uid,
            kind: program.kind,
        });
    }
    if let Some(families) = declared_os_families(&program.meta) {
        if !families.contains(&platform.os_family) {
            return Err(RunnerError::PlatformIncompatible {
                program: program.uid,
                supported: families,
                actual: platform.os_family,
            });
        }
    }
    let template = program
        .meta
        .get("entry_command")
        .and_then(Value::as_str)
        .ok_or_else(|| RunnerError::MissingEntryCommand(program.uid.clone()))?
        .to_string();

    let model = workflow.model_ref.as_ref().map(|r| lookup("model", r)).transpose()?;
    let dataset = workflow
        .dataset_ref
        .as_ref()
        .map(|r| lookup("dataset", r))
        .transpose()?;
    let resolution = catalog.resolve(&program.uid)?;

    let working_dir = repository.payload_dir(&program);
    let mut bindings = BTreeMap::new();
    bindings.insert("program_dir".to_string(), working_dir.display().to_string());
    if let Some(m) = &model {
        bindings.insert("model_dir".to_string(), repository.payload_dir(m).display().to_string());
    }
    if let Some(d) = &dataset {
        bindings.insert(
            "dataset_dir".to_string(),
            repository.payload_dir(d).display().to_string(),
        );
    }
    for (k, v) in &workflow.parameters {
        bindings.insert(k.clone(), v.to_string());
    }

    let words = shlex::split(&template).ok_or_else(|| RunnerError::MalformedTemplate {
        template: template.clone(),
        reason: "unbalanced quotes".into(),
    })?;
    let argv = words
        .iter()
        .map(|w| render_template(w, &bindings))
        .collect::<Result<Vec<_>, _>>()?;
    if argv.is_empty() {
        return Err(RunnerError::MissingEntryCommand(program.uid));
    }
    let entry_command = render_template(&template, &bindings)?;

    Ok(ExecutionPlan {
        resolved_packages: resolution.packages,
        model,
        dataset,
        entry_command,
        argv,
        working_dir,
        parameter_bindings: bindings,
        notes: resolution.notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bindings(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn substitutes_placeholders() {
        let b = bindings(&[("batch", "1")]);
        assert_eq!(render_template("run --batch={batch}", &b).unwrap(), "run --batch=1");
        assert_eq!(render_template("no placeholders }", &b).unwrap(), "no placeholders }");
    }

    #[test]
    fn unbound_and_unmatched() {
        let b = bindings(&[]);
        assert!(matches!(
            render_template("run {threads}", &b),
            Err(RunnerError::UnboundPlaceholder(name)) if name == "threads"
        ));
        assert!(matches!(
            render_template("run {threads", &b),
            Err(RunnerError::MalformedTemplate { .. })
        ));
        assert!(matches!(
            render_template("run {}", &b),
            Err(RunnerError::MalformedTemplate { .. })
        ));
    }
}
