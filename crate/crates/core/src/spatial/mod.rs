//! One-dimensional traffic snapshots along the ego vehicle's planned path.
//!
//! A snapshot is a closed world: a finite set of cars with reservations (and
//! optional claims ahead of them), pedestrians, signs, and the stretch of the
//! path that lies on the junction.

mod io;
mod universe;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::{self, serde_rational, Rational};

pub use io::{load_snapshot, snapshot_to_json, SnapshotError};
pub use universe::{enumerate_universe, EgoParams, PedestrianOption, SizeValue, UniverseParams};

/// Closed interval `[lo, hi]` of path positions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    /// Panics if `lo > hi`; use [`Interval::try_new`] for untrusted input.
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "interval lower bound exceeds upper bound");
        Interval { lo, hi }
    }

    pub fn try_new(lo: Rational, hi: Rational) -> Option<Self> {
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn ints(lo: i64, hi: i64) -> Self {
        Interval::new(rational::int(lo), rational::int(hi))
    }

    pub fn point(p: Rational) -> Self {
        Interval { lo: p, hi: p }
    }

    pub fn contains_point(&self, p: &Rational) -> bool {
        &self.lo <= p && p <= &self.hi
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// True if the closed interval `self` meets the open interior of `view`.
    pub fn meets_interior(&self, view: &Interval) -> bool {
        self.hi > view.lo && self.lo < view.hi
    }

    /// True if the closed intervals share at least one point.
    pub fn intersects(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// True if the intersection has positive length.
    pub fn overlaps_positively(&self, other: &Interval) -> bool {
        self.lo.max(other.lo) < self.hi.min(other.hi)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            rational::Display(&self.lo),
            rational::Display(&self.hi)
        )
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeTuple;
        struct R<'a>(&'a Rational);
        impl Serialize for R<'_> {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                serde_rational::serialize(self.0, s)
            }
        }
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&R(&self.lo))?;
        t.serialize_element(&R(&self.hi))?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Pair(
            #[serde(with = "serde_rational")] Rational,
            #[serde(with = "serde_rational")] Rational,
        );
        let Pair(lo, hi) = Pair::deserialize(d)?;
        Interval::try_new(lo, hi)
            .ok_or_else(|| serde::de::Error::custom("interval lower bound exceeds upper bound"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CarOccupancy {
    pub id: String,
    pub reservation: Interval,
    pub claim: Option<Interval>,
    pub size: Rational,
}

impl CarOccupancy {
    pub fn new(id: impl Into<String>, reservation: Interval, size: Rational) -> Self {
        CarOccupancy {
            id: id.into(),
            reservation,
            claim: None,
            size,
        }
    }

    pub fn with_claim(mut self, claim: Interval) -> Self {
        self.claim = Some(claim);
        self
    }

    /// Front of the reservation in driving direction.
    pub fn front(&self) -> &Rational {
        &self.reservation.hi
    }

    pub fn footprint(&self) -> impl Iterator<Item = &Interval> {
        std::iter::once(&self.reservation).chain(self.claim.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pedestrian {
    pub on: Interval,
    pub started_crossing: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sign {
    pub kind: String,
    #[serde(with = "serde_rational")]
    pub at: Rational,
}

impl Sign {
    pub fn new(kind: impl Into<String>, at: Rational) -> Self {
        Sign {
            kind: kind.into(),
            at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TrafficSnapshot {
    pub extent: Interval,
    pub ego_id: String,
    pub cars: Vec<CarOccupancy>,
    pub crossing: Interval,
    pub pedestrians: Vec<Pedestrian>,
    pub signs: Vec<Sign>,
    pub perception_distance: Rational,
    /// Distance at which the ego counts as being at the junction.
    pub approach_distance: Rational,
}

impl TrafficSnapshot {
    pub fn car(&self, id: &str) -> Option<&CarOccupancy> {
        self.cars.iter().find(|c| c.id == id)
    }

    pub fn ego(&self) -> Option<&CarOccupancy> {
        self.car(&self.ego_id)
    }

    pub fn car_ids(&self) -> impl Iterator<Item = &str> {
        self.cars.iter().map(|c| c.id.as_str())
    }
}

/// One broken snapshot invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation(pub String);

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Checks every snapshot invariant. An empty list means the snapshot is valid.
pub fn validate_snapshot(s: &TrafficSnapshot) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |msg: String| out.push(Violation(msg));
    let ext = &s.extent;

    let mut seen = HashSet::new();
    for car in &s.cars {
        if !seen.insert(car.id.as_str()) {
            push(format!("duplicate id `{}`", car.id));
        }
        if car.id.is_empty() {
            push("car with empty id".to_string());
        }
        if car.size <= rational::int(0) {
            push(format!("car `{}` has non-positive size", car.id));
        }
        if !ext.contains(&car.reservation) {
            push(format!(
                "occupancy outside extent: reservation {} of `{}`",
                car.reservation, car.id
            ));
        }
        if let Some(claim) = &car.claim {
            if !ext.contains(claim) {
                push(format!(
                    "occupancy outside extent: claim {} of `{}`",
                    claim, car.id
                ));
            }
            if claim.lo < car.reservation.hi {
                push(format!("claim of `{}` starts behind its reservation front", car.id));
            }
        }
    }
    match s.cars.iter().filter(|c| c.id == s.ego_id).count() {
        1 => {}
        0 => push(format!("ego `{}` is not among the cars", s.ego_id)),
        _ => {} // already reported as duplicate id
    }
    if !ext.contains(&s.crossing) {
        push(format!("crossing {} outside extent", s.crossing));
    }
    for p in &s.pedestrians {
        if !ext.contains(&p.on) {
            push(format!("pedestrian {} outside extent", p.on));
        }
    }
    for sign in &s.signs {
        if sign.kind.is_empty() {
            push("sign with empty kind".to_string());
        }
        if !ext.contains_point(&sign.at) {
            push(format!(
                "sign `{}` at {} outside extent",
                sign.kind,
                rational::Display(&sign.at)
            ));
        }
    }
    if !rational::is_nonnegative(&s.perception_distance) {
        push("negative perception distance".to_string());
    }
    if !rational::is_nonnegative(&s.approach_distance) {
        push("negative approach distance".to_string());
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("view {view} is not within extent {extent}")]
pub struct ViewOutsideExtent {
    pub view: Interval,
    pub extent: Interval,
}

/// Endpoints of `v` plus every occupancy, crossing and pedestrian endpoint
/// lying inside `v`, ascending and deduplicated.
pub fn event_points(s: &TrafficSnapshot, v: &Interval) -> Result<Vec<Rational>, ViewOutsideExtent> {
    if !s.extent.contains(v) {
        return Err(ViewOutsideExtent {
            view: v.clone(),
            extent: s.extent.clone(),
        });
    }
    Ok(event_points_unchecked(s, v).into_iter().collect())
}

pub(crate) fn event_points_unchecked(s: &TrafficSnapshot, v: &Interval) -> BTreeSet<Rational> {
    let mut pts = BTreeSet::new();
    pts.insert(v.lo);
    pts.insert(v.hi);
    let intervals = s
        .cars
        .iter()
        .flat_map(|c| c.footprint())
        .chain(std::iter::once(&s.crossing))
        .chain(s.pedestrians.iter().map(|p| &p.on));
    for iv in intervals {
        for p in [iv.lo, iv.hi] {
            if v.contains_point(&p) {
                pts.insert(p);
            }
        }
    }
    pts
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::rational::int;

    /// Ego `A` at [0,2], crossing [8,14], extent [0,20].
    pub fn road() -> TrafficSnapshot {
        TrafficSnapshot {
            extent: Interval::ints(0, 20),
            ego_id: "A".into(),
            cars: vec![CarOccupancy::new("A", Interval::ints(0, 2), int(2))],
            crossing: Interval::ints(8, 14),
            pedestrians: vec![],
            signs: vec![],
            perception_distance: int(4),
            approach_distance: int(4),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::road;
    use super::*;
    use crate::rational::int;

    #[test]
    fn valid_snapshot_has_no_violations() {
        assert!(validate_snapshot(&road()).is_empty());
    }

    #[test]
    fn occupancy_outside_extent() {
        let mut s = road();
        s.cars.push(CarOccupancy::new("B", Interval::ints(18, 22), int(4)));
        let v = validate_snapshot(&s);
        assert_eq!(v.len(), 1);
        assert!(v[0].0.contains("occupancy outside extent"));
    }

    #[test]
    fn duplicate_ids() {
        let mut s = road();
        s.cars.push(CarOccupancy::new("A", Interval::ints(4, 6), int(2)));
        let v = validate_snapshot(&s);
        assert!(v.iter().any(|x| x.0.contains("duplicate id")));
    }

    #[test]
    fn missing_ego() {
        let mut s = road();
        s.ego_id = "Z".into();
        assert!(validate_snapshot(&s)
            .iter()
            .any(|x| x.0.contains("not among the cars")));
    }

    fn bare(extent: Interval) -> TrafficSnapshot {
        TrafficSnapshot {
            extent: extent.clone(),
            ego_id: "E".into(),
            cars: vec![CarOccupancy::new("E", Interval::point(extent.lo), int(1))],
            crossing: Interval::point(extent.hi),
            pedestrians: vec![],
            signs: vec![],
            perception_distance: int(0),
            approach_distance: int(0),
        }
    }

    #[test]
    fn event_points_of_empty_view() {
        let s = bare(Interval::ints(0, 20));
        let pts = event_points(&s, &Interval::ints(0, 10)).unwrap();
        assert_eq!(pts, vec![int(0), int(10)]);
    }

    #[test]
    fn event_points_single_car() {
        let mut s = bare(Interval::ints(0, 20));
        s.cars.push(CarOccupancy::new("B", Interval::ints(3, 5), int(2)));
        let pts = event_points(&s, &Interval::ints(0, 10)).unwrap();
        assert_eq!(pts, vec![int(0), int(3), int(5), int(10)]);
    }

    #[test]
    fn event_points_clip_crossing() {
        let mut s = bare(Interval::ints(0, 20));
        s.crossing = Interval::ints(8, 14);
        let v = Interval::ints(0, 10);
        let pts = event_points(&s, &v).unwrap();
        // oracle: enumerate every endpoint and keep the ones inside v
        let mut expected: Vec<_> = [0, 10, 0, 0, 8, 14]
            .into_iter()
            .map(int)
            .filter(|p| v.contains_point(p))
            .collect();
        expected.sort();
        expected.dedup();
        assert_eq!(pts, expected);
        assert_eq!(pts, vec![int(0), int(8), int(10)]);
    }

    #[test]
    fn event_points_reject_outside_view() {
        let s = bare(Interval::ints(0, 20));
        assert!(event_points(&s, &Interval::ints(5, 25)).is_err());
    }

    #[test]
    fn interval_relations() {
        let a = Interval::ints(0, 2);
        assert!(a.meets_interior(&Interval::ints(1, 5)));
        assert!(!a.meets_interior(&Interval::ints(2, 5)));
        assert!(a.intersects(&Interval::ints(2, 5)));
        assert!(a.overlaps_positively(&Interval::ints(1, 5)));
        assert!(!a.overlaps_positively(&Interval::ints(2, 5)));
    }
}
