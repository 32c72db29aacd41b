use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ParetoError;

/// Well-known metric ids of the canonical tournament space.
pub mod metric {
    pub const ACCURACY: &str = "accuracy";
    pub const LATENCY_S: &str = "latency_s";
    pub const ENERGY_J: &str = "energy_j";
    pub const PEAK_MEM_BYTES: &str = "peak_mem_bytes";
    pub const MODEL_BYTES: &str = "model_bytes";
    pub const COST_USD: &str = "cost_usd";
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dimension {
    pub metric_id: String,
    pub direction: Direction,
    pub unit: String,
}

impl Dimension {
    pub fn new(metric_id: impl Into<String>, direction: Direction, unit: impl Into<String>) -> Self {
        Self {
            metric_id: metric_id.into(),
            direction,
            unit: unit.into(),
        }
    }
}

/// An ordered, non-empty list of optimization objectives with unique ids.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct MetricSpace {
    dimensions: Vec<Dimension>,
}

#[derive(Deserialize)]
struct RawSpace {
    dimensions: Vec<Dimension>,
}

impl TryFrom<RawSpace> for MetricSpace {
    type Error = ParetoError;

    fn try_from(raw: RawSpace) -> Result<Self, Self::Error> {
        MetricSpace::new(raw.dimensions)
    }
}

impl MetricSpace {
    pub fn new(dimensions: Vec<Dimension>) -> Result<Self, ParetoError> {
        if dimensions.is_empty() {
            return Err(ParetoError::EmptySpace);
        }
        let mut seen = BTreeSet::new();
        for dim in &dimensions {
            if !seen.insert(dim.metric_id.as_str()) {
                return Err(ParetoError::DuplicateDimension(dim.metric_id.clone()));
            }
        }
        Ok(Self { dimensions })
    }

    /// accuracy, latency, energy, peak memory, model footprint and cost.
    pub fn canonical() -> Self {
        use metric::*;
        Self {
            dimensions: vec![
                Dimension::new(ACCURACY, Direction::Maximize, "ratio"),
                Dimension::new(LATENCY_S, Direction::Minimize, "seconds"),
                Dimension::new(ENERGY_J, Direction::Minimize, "joules"),
                Dimension::new(PEAK_MEM_BYTES, Direction::Minimize, "bytes"),
                Dimension::new(MODEL_BYTES, Direction::Minimize, "bytes"),
                Dimension::new(COST_USD, Direction::Minimize, "USD"),
            ],
        }
    }

    pub fn dimensions(&self) -> &[Dimension] {
        &self.dimensions
    }

    pub fn dimension(&self, metric_id: &str) -> Option<&Dimension> {
        self.dimensions.iter().find(|d| d.metric_id == metric_id)
    }

    pub fn direction(&self, metric_id: &str) -> Option<Direction> {
        self.dimension(metric_id).map(|d| d.direction)
    }

    pub fn contains(&self, metric_id: &str) -> bool {
        self.dimension(metric_id).is_some()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.dimensions.iter().map(|d| d.metric_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.dimensions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dimensions.is_empty()
    }

    /// The space restricted to `ids`, in the order given.
    pub fn subspace(&self, ids: &[&str]) -> Result<MetricSpace, ParetoError> {
        let dims = ids
            .iter()
            .map(|id| {
                self.dimension(id)
                    .cloned()
                    .ok_or_else(|| ParetoError::UnknownMetric(id.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        MetricSpace::new(dims)
    }
}

/// One point in a metric space: metric id to finite value.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MetricVector(BTreeMap<String, f64>);

impl MetricVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector, rejecting non-finite values.
    pub fn try_from_pairs<I, K>(pairs: I) -> Result<Self, ParetoError>
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        let mut v = Self::new();
        for (k, x) in pairs {
            v.insert(k, x)?;
        }
        Ok(v)
    }

    pub fn insert(&mut self, metric_id: impl Into<String>, value: f64) -> Result<(), ParetoError> {
        let metric_id = metric_id.into();
        if !value.is_finite() {
            return Err(ParetoError::NonFinite { metric: metric_id });
        }
        self.0.insert(metric_id, value);
        Ok(())
    }

    pub fn get(&self, metric_id: &str) -> Option<f64> {
        self.0.get(metric_id).copied()
    }

    pub fn contains(&self, metric_id: &str) -> bool {
        self.0.contains_key(metric_id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }

    pub fn same_ids(&self, other: &MetricVector) -> bool {
        self.0.len() == other.0.len() && self.0.keys().eq(other.0.keys())
    }

    /// Keeps only `ids`; `None` if any of them is missing.
    pub fn restrict(&self, ids: &[&str]) -> Option<MetricVector> {
        let mut out = BTreeMap::new();
        for id in ids {
            out.insert(id.to_string(), self.get(id)?);
        }
        Some(MetricVector(out))
    }

    /// True when every metric of `space` is present.
    pub fn covers(&self, space: &MetricSpace) -> bool {
        space.ids().all(|id| self.contains(id))
    }

    /// Checks the value-level invariants against a governing space.
    pub fn validate(&self, space: &MetricSpace) -> Result<(), ParetoError> {
        for (id, value) in self.iter() {
            let dim = space
                .dimension(id)
                .ok_or_else(|| ParetoError::UnknownMetric(id.to_string()))?;
            if !value.is_finite() {
                return Err(ParetoError::NonFinite { metric: id.to_string() });
            }
            if id == metric::ACCURACY && !(0.0..=1.0).contains(&value) {
                return Err(ParetoError::OutOfRange {
                    metric: id.to_string(),
                    value,
                    reason: "accuracy must lie in [0, 1]",
                });
            }
            if dim.direction == Direction::Minimize && value < 0.0 {
                return Err(ParetoError::OutOfRange {
                    metric: id.to_string(),
                    value,
                    reason: "minimized metrics must be non-negative",
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for MetricVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}: {v}")?;
        }
        f.write_str("}")
    }
}
