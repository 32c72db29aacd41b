use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Kind, OsFamily};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub path: String,
    pub message: String,
    pub severity: Severity,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    fn from_issues(issues: Vec<Issue>) -> Self {
        let valid = !issues.iter().any(|i| i.severity == Severity::Error);
        Self { valid, issues }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Issue> {
        self.issues.iter().filter(|i| i.severity == Severity::Warning)
    }
}

#[derive(Clone, Copy)]
enum Rule {
    NonEmptyString,
    OptionalString,
    StringArray,
    Count,
    NonNegativeNumber,
    OsFamily,
    OsFamilySet,
}

struct Field {
    key: &'static str,
    required: bool,
    rule: Rule,
}

const fn req(key: &'static str, rule: Rule) -> Field {
    Field {
        key,
        required: true,
        rule,
    }
}

const fn opt(key: &'static str, rule: Rule) -> Field {
    Field {
        key,
        required: false,
        rule,
    }
}

const PROGRAM: &[Field] = &[
    req("entry_command", Rule::NonEmptyString),
    opt("os_family", Rule::OsFamilySet),
    opt("description", Rule::OptionalString),
];

const MODEL: &[Field] = &[
    req("files", Rule::StringArray),
    opt("framework", Rule::OptionalString),
    opt("format", Rule::OptionalString),
    opt("description", Rule::OptionalString),
];

const DATASET: &[Field] = &[
    req("item_count", Rule::Count),
    opt("files", Rule::StringArray),
    opt("description", Rule::OptionalString),
];

const LIBRARY: &[Field] = &[
    opt("language", Rule::OptionalString),
    opt("description", Rule::OptionalString),
];

const PLATFORM: &[Field] = &[
    req("cpu", Rule::NonEmptyString),
    req("os_family", Rule::OsFamily),
    req("ram_bytes", Rule::Count),
    opt("accelerator", Rule::OptionalString),
    opt("price_usd", Rule::NonNegativeNumber),
    opt("labels", Rule::StringArray),
    opt("description", Rule::OptionalString),
];

fn fields(kind: Kind) -> &'static [Field] {
    match kind {
        Kind::Program => PROGRAM,
        Kind::Model => MODEL,
        Kind::Dataset => DATASET,
        Kind::Library => LIBRARY,
        Kind::Platform => PLATFORM,
    }
}

fn check(rule: Rule, value: &Value) -> Option<String> {
    let string_array = |v: &Value| v.as_array().is_some_and(|a| a.iter().all(Value::is_string));
    let ok = match rule {
        Rule::NonEmptyString => value.as_str().is_some_and(|s| !s.trim().is_empty()),
        Rule::OptionalString => value.is_string() || value.is_null(),
        Rule::StringArray => string_array(value),
        Rule::Count => value.as_u64().is_some(),
        Rule::NonNegativeNumber => value.as_f64().is_some_and(|x| x >= 0.0),
        Rule::OsFamily => value.as_str().is_some_and(|s| s.parse::<OsFamily>().is_ok()),
        Rule::OsFamilySet => match value {
            Value::String(s) => s.parse::<OsFamily>().is_ok(),
            Value::Array(items) => items
                .iter()
                .all(|i| i.as_str().is_some_and(|s| s.parse::<OsFamily>().is_ok())),
            _ => false,
        },
    };
    if ok {
        return None;
    }
    Some(
        match rule {
            Rule::NonEmptyString => "expected a non-empty string",
            Rule::OptionalString => "expected a string",
            Rule::StringArray => "expected an array of strings",
            Rule::Count => "expected a non-negative integer",
            Rule::NonNegativeNumber => "expected a non-negative number",
            Rule::OsFamily => "expected one of linux, windows, macos, android, other",
            Rule::OsFamilySet => "expected an os family or an array of os families",
        }
        .to_string(),
    )
}

/// Checks a meta document against the per-kind field table. Unknown keys
/// are reported as warnings; the document is never modified.
pub fn validate_meta(meta: &Value, kind: Kind) -> ValidationReport {
    let Some(object) = meta.as_object() else {
        return ValidationReport::from_issues(vec![Issue {
            path: String::new(),
            message: "meta must be a JSON object".into(),
            severity: Severity::Error,
        }]);
    };
    let table = fields(kind);
    let mut issues = Vec::new();
    for field in table {
        match object.get(field.key) {
            None if field.required => issues.push(Issue {
                path: field.key.to_string(),
                message: format!("required for {kind} packages"),
                severity: Severity::Error,
            }),
            None => {}
            Some(value) => {
                if let Some(message) = check(field.rule, value) {
                    issues.push(Issue {
                        path: field.key.to_string(),
                        message,
                        severity: Severity::Error,
                    });
                }
            }
        }
    }
    for key in object.keys() {
        if !table.iter().any(|f| f.key == key) {
            issues.push(Issue {
                path: key.clone(),
                message: format!("unknown key for {kind} packages; kept as-is"),
                severity: Severity::Warning,
            });
        }
    }
    ValidationReport::from_issues(issues)
}

#[cfg(test)]
mod tests {
    use serde_json::json;

    use super::*;

    #[test]
    fn platform_missing_os_family() {
        let meta = json!({"cpu": "cortex-a53", "ram_bytes": 2_000_000_000u64});
        let report = validate_meta(&meta, Kind::Platform);
        assert!(!report.valid);
        assert_eq!(report.issues.len(), 1);
        assert_eq!(report.issues[0].path, "os_family");
        assert_eq!(report.issues[0].severity, Severity::Error);
    }

    #[test]
    fn complete_program_is_clean() {
        let meta = json!({"entry_command": "python run.py --batch={batch}", "os_family": ["linux", "android"]});
        let report = validate_meta(&meta, Kind::Program);
        assert!(report.valid);
        assert!(report.issues.is_empty());
    }

    #[test]
    fn unknown_keys_are_warnings() {
        let meta = json!({"files": ["a.bin"], "top1": 0.57});
        let report = validate_meta(&meta, Kind::Model);
        assert!(report.valid);
        assert_eq!(report.warnings().count(), 1);
        assert_eq!(report.errors().count(), 0);
    }

    #[test]
    fn type_errors_and_non_objects() {
        let report = validate_meta(&json!({"item_count": -1}), Kind::Dataset);
        assert!(!report.valid);
        assert_eq!(report.issues[0].path, "item_count");
        assert!(!validate_meta(&json!([1, 2]), Kind::Library).valid);
        assert!(validate_meta(&json!({}), Kind::Library).valid);
    }

    #[test]
    fn input_is_untouched() {
        let meta = json!({"cpu": 3});
        let before = meta.clone();
        let _ = validate_meta(&meta, Kind::Platform);
        assert_eq!(meta, before);
    }
}
