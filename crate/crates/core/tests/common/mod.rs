#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, TimeZone, Utc};
use quest_core::pareto::{MetricSpace, MetricVector};
use quest_core::registry::{DependencyRef, Kind, OsFamily, PlatformDescriptor, Uid};
use quest_core::runner::{DispersionReport, EnvironmentSnapshot, WorkflowDescriptor};
use quest_core::scoreboard::{NewTournament, SubmissionRequest};

pub fn uid(n: u64) -> Uid {
    format!("{n:016x}").parse().unwrap()
}

pub fn at(secs: i64) -> DateTime<Utc> {
    Utc.timestamp_opt(1_700_000_000 + secs, 0).unwrap()
}

pub fn platform(labels: &[&str]) -> PlatformDescriptor {
    PlatformDescriptor {
        cpu: "mock-cpu".into(),
        accelerator: None,
        os_family: OsFamily::Android,
        ram_bytes: 2 << 30,
        price_usd: Some(120.0),
        labels: labels.iter().map(|s| s.to_string()).collect(),
    }
}

pub fn environment(labels: &[&str]) -> EnvironmentSnapshot {
    EnvironmentSnapshot {
        os_name: "Android".into(),
        os_version: "8.1".into(),
        kernel_version: "4.4.0".into(),
        hostname_hash: "0123456789abcdef".into(),
        dependency_versions: BTreeMap::new(),
        timestamp_utc: "2017-12-01T00:00:00.000Z".into(),
        platform: platform(labels),
    }
}

pub fn request(metrics: &[(&str, f64)]) -> SubmissionRequest {
    SubmissionRequest {
        workflow: WorkflowDescriptor::new(DependencyRef::tags(Kind::Program, ["classify"])),
        environment: environment(&["android"]),
        metrics: MetricVector::try_from_pairs(metrics.iter().map(|(k, v)| (*k, *v))).unwrap(),
        dispersion: DispersionReport::default(),
        labels: BTreeMap::new(),
        nonce: None,
    }
}

pub fn tournament(space: MetricSpace) -> NewTournament {
    NewTournament {
        title: "desk-scale tournament".into(),
        space,
        opens_at: at(0),
        closes_at: at(86_400),
    }
}

/// Independent O(n²) frontier oracle: a point survives when no other point
/// is at least as good in every dimension and strictly better in one.
/// `maximize[d]` gives the direction of dimension `d`.
pub fn brute_force_frontier(points: &[Vec<f64>], maximize: &[bool]) -> BTreeSet<usize> {
    let better_or_equal = |a: f64, b: f64, max: bool| if max { a >= b } else { a <= b };
    let strictly_better = |a: f64, b: f64, max: bool| if max { a > b } else { a < b };
    (0..points.len())
        .filter(|&i| {
            !(0..points.len()).any(|j| {
                j != i
                    && (0..maximize.len()).all(|d| better_or_equal(points[j][d], points[i][d], maximize[d]))
                    && (0..maximize.len()).any(|d| strictly_better(points[j][d], points[i][d], maximize[d]))
            })
        })
        .collect()
}

/// Per-dimension loop dominance, direction by direction.
pub fn oracle_dominates(a: &[f64], b: &[f64], maximize: &[bool]) -> bool {
    let mut no_worse = true;
    let mut better = false;
    for d in 0..maximize.len() {
        if maximize[d] {
            no_worse &= a[d] >= b[d];
            better |= a[d] > b[d];
        } else {
            no_worse &= a[d] <= b[d];
            better |= a[d] < b[d];
        }
    }
    no_worse && better
}
