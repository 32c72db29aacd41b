use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{RawRun, RunnerError};
use crate::pareto::{metric, MetricVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AggregationPolicy {
    /// Aggregate over the successful runs; at least one is required.
    #[default]
    Lenient,
    /// Every run must have succeeded.
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    pub min: f64,
    pub max: f64,
    pub iqr: f64,
}

/// Spread of each aggregated metric across the successful runs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DispersionReport(pub BTreeMap<String, Dispersion>);

/// Median of an ascending slice; mean of the middle pair for even lengths.
fn median_sorted(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

/// Linear-interpolation quantile of an ascending slice.
fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    let h = (xs.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(xs.len() - 1);
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}

/// Per-metric median over successful runs plus min, max and IQR.
pub fn aggregate(runs: &[RawRun], policy: AggregationPolicy) -> Result<(MetricVector, DispersionReport), RunnerError> {
    if policy == AggregationPolicy::Strict {
        let failed: Vec<u32> = runs.iter().filter(|r| !r.exit_ok).map(|r| r.repetition_index).collect();
        if !failed.is_empty() {
            return Err(RunnerError::StrictFailure { failed });
        }
    }
    let ok: Vec<&RawRun> = runs.iter().filter(|r| r.exit_ok).collect();
    if ok.is_empty() {
        return Err(RunnerError::NoSuccessfulRuns { total: runs.len() });
    }

    let mut samples: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for run in ok {
        samples.entry(metric::LATENCY_S).or_default().push(run.wall_time_s);
        if let Some(a) = run.accuracy {
            samples.entry(metric::ACCURACY).or_default().push(a);
        }
        if let Some(e) = run.energy_j {
            samples.entry(metric::ENERGY_J).or_default().push(e);
        }
        if let Some(m) = run.peak_mem_bytes {
            samples.entry(metric::PEAK_MEM_BYTES).or_default().push(m as f64);
        }
    }

    let mut vector = MetricVector::new();
    let mut dispersion = DispersionReport::default();
    for (id, mut xs) in samples {
        xs.sort_by(f64::total_cmp);
        vector
            .insert(id, median_sorted(&xs))
            .map_err(|e| RunnerError::InvalidMeasurement(e.to_string()))?;
        dispersion.0.insert(
            id.to_string(),
            Dispersion {
                min: xs[0],
                max: xs[xs.len() - 1],
                iqr: quantile_sorted(&xs, 0.75) - quantile_sorted(&xs, 0.25),
            },
        );
    }
    Ok((vector, dispersion))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn run(i: u32, wall: f64, ok: bool) -> RawRun {
        RawRun {
            repetition_index: i,
            wall_time_s: wall,
            accuracy: None,
            energy_j: None,
            peak_mem_bytes: None,
            exit_ok: ok,
            log_excerpt: String::new(),
        }
    }

    #[test]
    fn median_of_three() {
        let runs = [run(0, 1.0, true), run(1, 9.0, true), run(2, 1.2, true)];
        let (v, d) = aggregate(&runs, AggregationPolicy::Lenient).unwrap();
        assert_eq!(v.get("latency_s"), Some(1.2));
        assert_eq!(v.len(), 1);
        assert_eq!(d.0["latency_s"].min, 1.0);
        assert_eq!(d.0["latency_s"].max, 9.0);
        // quartiles at 1.1 and 5.1
        assert!((d.0["latency_s"].iqr - 4.0).abs() < 1e-12);
    }

    #[test]
    fn singleton_has_zero_width() {
        let mut r = run(0, 0.3, true);
        r.accuracy = Some(0.71);
        r.peak_mem_bytes = Some(4096);
        let (v, d) = aggregate(&[r], AggregationPolicy::Strict).unwrap();
        assert_eq!(v.get("latency_s"), Some(0.3));
        assert_eq!(v.get("accuracy"), Some(0.71));
        assert_eq!(v.get("peak_mem_bytes"), Some(4096.0));
        assert!(v.get("energy_j").is_none());
        for disp in d.0.values() {
            assert_eq!(disp.max - disp.min, 0.0);
            assert_eq!(disp.iqr, 0.0);
        }
    }

    #[test]
    fn failures_and_policies() {
        let runs = [run(0, 1.0, false), run(1, 2.0, true)];
        let (v, _) = aggregate(&runs, AggregationPolicy::Lenient).unwrap();
        assert_eq!(v.get("latency_s"), Some(2.0));
        assert!(matches!(
            aggregate(&runs, AggregationPolicy::Strict),
            Err(RunnerError::StrictFailure { failed }) if failed == vec![0]
        ));
        assert!(matches!(
            aggregate(&[run(0, 1.0, false)], AggregationPolicy::Lenient),
            Err(RunnerError::NoSuccessfulRuns { total: 1 })
        ));
        assert!(aggregate(&[], AggregationPolicy::Lenient).is_err());
    }
}
