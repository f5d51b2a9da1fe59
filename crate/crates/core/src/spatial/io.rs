//! `.snapshot.json` reading and writing.

use serde::{Deserialize, Serialize};

use super::{validate_snapshot, CarOccupancy, Interval, Pedestrian, Sign, TrafficSnapshot, Violation};
use crate::rational::{serde_rational, Rational};

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("malformed snapshot JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("snapshot violates invariants: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.0.as_str()).collect::<Vec<_>>().join("; ")
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CarRepr {
    id: String,
    reservation: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    claim: Option<Interval>,
    #[serde(with = "serde_rational")]
    size: Rational,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SnapshotRepr {
    extent: Interval,
    ego: String,
    cars: Vec<CarRepr>,
    crossing: Interval,
    pedestrians: Vec<Pedestrian>,
    signs: Vec<Sign>,
    #[serde(with = "serde_rational")]
    perception_distance: Rational,
    #[serde(with = "serde_rational")]
    approach_distance: Rational,
}

/// Parses and validates a snapshot document.
pub fn load_snapshot(text: &str) -> Result<TrafficSnapshot, SnapshotError> {
    let repr: SnapshotRepr = serde_json::from_str(text)?;
    let snap = TrafficSnapshot {
        extent: repr.extent,
        ego_id: repr.ego,
        cars: repr
            .cars
            .into_iter()
            .map(|c| CarOccupancy {
                id: c.id,
                reservation: c.reservation,
                claim: c.claim,
                size: c.size,
            })
            .collect(),
        crossing: repr.crossing,
        pedestrians: repr.pedestrians,
        signs: repr.signs,
        perception_distance: repr.perception_distance,
        approach_distance: repr.approach_distance,
    };
    let violations = validate_snapshot(&snap);
    if violations.is_empty() {
        Ok(snap)
    } else {
        Err(SnapshotError::Invalid(violations))
    }
}

pub fn snapshot_to_json(s: &TrafficSnapshot) -> serde_json::Value {
    let repr = SnapshotRepr {
        extent: s.extent.clone(),
        ego: s.ego_id.clone(),
        cars: s
            .cars
            .iter()
            .map(|c| CarRepr {
                id: c.id.clone(),
                reservation: c.reservation.clone(),
                claim: c.claim.clone(),
                size: c.size,
            })
            .collect(),
        crossing: s.crossing.clone(),
        pedestrians: s.pedestrians.clone(),
        signs: s.signs.clone(),
        perception_distance: s.perception_distance,
        approach_distance: s.approach_distance,
    };
    serde_json::to_value(repr).expect("snapshot serializes")
}
