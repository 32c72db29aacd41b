use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{Direction, MetricSpace, MetricVector, ParetoError};

pub type PointId = String;

/// Membership change emitted by an incremental insert.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrontierEventKind {
    Entered,
    RejectedDominated,
    Displaced,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrontierEvent {
    pub kind: FrontierEventKind,
    pub point_id: PointId,
    /// For `displaced`, the newly entered point; for `rejected_dominated`,
    /// the member (lowest id) that dominates the rejected point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cause_point_id: Option<PointId>,
}

/// The non-dominated members of a point set under a metric space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParetoFrontier {
    space: MetricSpace,
    members: BTreeMap<PointId, MetricVector>,
}

/// Maps a vector onto "smaller is better" coordinates in sorted-id order.
///
/// Negative zero is folded into positive zero so `total_cmp` agrees with
/// numeric equality.
fn oriented(v: &MetricVector, space: &MetricSpace) -> Result<Vec<f64>, ParetoError> {
    v.iter()
        .map(|(id, x)| {
            let dir = space
                .direction(id)
                .ok_or_else(|| ParetoError::UnknownMetric(id.to_string()))?;
            if !x.is_finite() {
                return Err(ParetoError::NonFinite { metric: id.to_string() });
            }
            Ok(match dir {
                Direction::Minimize => x + 0.0,
                Direction::Maximize => -x + 0.0,
            })
        })
        .collect()
}

fn dominates_oriented(a: &[f64], b: &[f64]) -> bool {
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

fn mismatch(a: &MetricVector, b: &MetricVector) -> ParetoError {
    ParetoError::MismatchedMetrics {
        left: a.ids().map(str::to_owned).collect(),
        right: b.ids().map(str::to_owned).collect(),
    }
}

/// Strict Pareto dominance: `a` is no worse than `b` everywhere and strictly
/// better somewhere. Values are compared exactly.
pub fn dominates(a: &MetricVector, b: &MetricVector, space: &MetricSpace) -> Result<bool, ParetoError> {
    if !a.same_ids(b) {
        return Err(mismatch(a, b));
    }
    Ok(dominates_oriented(&oriented(a, space)?, &oriented(b, space)?))
}

/// Batch frontier of `points`.
///
/// Sort-filter scan: after a lexicographic sort of the oriented vectors every
/// dominator of a point precedes it, so each point only needs checking
/// against the members accepted so far.
pub fn compute_frontier(
    points: &[(PointId, MetricVector)],
    space: &MetricSpace,
) -> Result<ParetoFrontier, ParetoError> {
    let Some((_, first)) = points.first() else {
        return Ok(ParetoFrontier::empty(space.clone()));
    };
    let mut ids = BTreeSet::new();
    let mut coords = Vec::with_capacity(points.len());
    for (id, v) in points {
        if !v.same_ids(first) {
            return Err(mismatch(first, v));
        }
        if !ids.insert(id.as_str()) {
            return Err(ParetoError::DuplicatePoint(id.clone()));
        }
        coords.push(oriented(v, space)?);
    }

    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| lexicographic(&coords[i], &coords[j]).then_with(|| points[i].0.cmp(&points[j].0)));

    let mut accepted: Vec<usize> = Vec::new();
    for &i in &order {
        if !accepted.iter().any(|&m| dominates_oriented(&coords[m], &coords[i])) {
            accepted.push(i);
        }
    }
    let members = accepted
        .into_iter()
        .map(|i| (points[i].0.clone(), points[i].1.clone()))
        .collect();
    Ok(ParetoFrontier {
        space: space.clone(),
        members,
    })
}

fn lexicographic(a: &[f64], b: &[f64]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Functional form of [`ParetoFrontier::insert`].
pub fn insert_incremental(
    frontier: &ParetoFrontier,
    point_id: impl Into<PointId>,
    vector: MetricVector,
) -> Result<(ParetoFrontier, Vec<FrontierEvent>), ParetoError> {
    let mut next = frontier.clone();
    let events = next.insert(point_id, vector)?;
    Ok((next, events))
}

/// Frontier of `points` restricted to the `dim_x` × `dim_y` plane.
///
/// Points missing either metric are left out.
pub fn project(
    points: &[(PointId, MetricVector)],
    space: &MetricSpace,
    dim_x: &str,
    dim_y: &str,
) -> Result<ParetoFrontier, ParetoError> {
    let plane = projection_space(space, dim_x, dim_y)?;
    let projected: Vec<(PointId, MetricVector)> = points
        .iter()
        .filter_map(|(id, v)| v.restrict(&[dim_x, dim_y]).map(|r| (id.clone(), r)))
        .collect();
    compute_frontier(&projected, &plane)
}

/// The two-dimensional subspace used by [`project`].
pub fn projection_space(space: &MetricSpace, dim_x: &str, dim_y: &str) -> Result<MetricSpace, ParetoError> {
    if dim_x == dim_y {
        return Err(ParetoError::SameAxis(dim_x.to_string()));
    }
    space.subspace(&[dim_x, dim_y])
}

/// Zero when no member dominates `vector`; otherwise the smallest Chebyshev
/// distance to a member after min-max normalizing every metric over the
/// members plus `vector`.
pub fn distance_to_frontier(
    vector: &MetricVector,
    frontier: &ParetoFrontier,
    space: &MetricSpace,
) -> Result<f64, ParetoError> {
    let reference = frontier.members.values().next().ok_or(ParetoError::EmptyFrontier)?;
    if !vector.same_ids(reference) {
        return Err(mismatch(reference, vector));
    }
    let target = oriented(vector, space)?;
    let members = frontier
        .members
        .values()
        .map(|m| oriented(m, space))
        .collect::<Result<Vec<_>, _>>()?;
    if !members.iter().any(|m| dominates_oriented(m, &target)) {
        return Ok(0.0);
    }

    let dims = target.len();
    let mut lo = target.clone();
    let mut hi = target.clone();
    for m in &members {
        for d in 0..dims {
            lo[d] = lo[d].min(m[d]);
            hi[d] = hi[d].max(m[d]);
        }
    }
    let distance = members
        .iter()
        .map(|m| {
            (0..dims)
                .map(|d| {
                    let span = hi[d] - lo[d];
                    if span > 0.0 {
                        (target[d] - m[d]).abs() / span
                    } else {
                        0.0
                    }
                })
                .fold(0.0_f64, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    Ok(distance)
}

impl ParetoFrontier {
    pub fn empty(space: MetricSpace) -> Self {
        Self {
            space,
            members: BTreeMap::new(),
        }
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn members(&self) -> &BTreeMap<PointId, MetricVector> {
        &self.members
    }

    pub fn member_ids(&self) -> BTreeSet<PointId> {
        self.members.keys().cloned().collect()
    }

    pub fn contains(&self, point_id: &str) -> bool {
        self.members.contains_key(point_id)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Adds one point, keeping the member set equal to the batch frontier of
    /// everything inserted so far. Returns the membership changes.
    pub fn insert(
        &mut self,
        point_id: impl Into<PointId>,
        vector: MetricVector,
    ) -> Result<Vec<FrontierEvent>, ParetoError> {
        let point_id = point_id.into();
        if self.members.contains_key(&point_id) {
            return Err(ParetoError::DuplicatePoint(point_id));
        }
        if let Some(reference) = self.members.values().next() {
            if !reference.same_ids(&vector) {
                return Err(mismatch(reference, &vector));
            }
        }
        let incoming = oriented(&vector, &self.space)?;

        let mut displaced = Vec::new();
        for (id, member) in &self.members {
            let m = oriented(member, &self.space)?;
            if dominates_oriented(&m, &incoming) {
                return Ok(vec![FrontierEvent {
                    kind: FrontierEventKind::RejectedDominated,
                    point_id,
                    cause_point_id: Some(id.clone()),
                }]);
            }
            if dominates_oriented(&incoming, &m) {
                displaced.push(id.clone());
            }
        }

        let mut events = Vec::with_capacity(displaced.len() + 1);
        events.push(FrontierEvent {
            kind: FrontierEventKind::Entered,
            point_id: point_id.clone(),
            cause_point_id: None,
        });
        for id in displaced {
            self.members.remove(&id);
            events.push(FrontierEvent {
                kind: FrontierEventKind::Displaced,
                point_id: id,
                cause_point_id: Some(point_id.clone()),
            });
        }
        self.members.insert(point_id, vector);
        Ok(events)
    }
}
