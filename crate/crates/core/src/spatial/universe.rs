//! Bounded snapshot universes for exhaustive checking.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::{validate_snapshot, CarOccupancy, Interval, Pedestrian, Sign, TrafficSnapshot};
use crate::rational::{self, int, serde_rational, Rational};

/// One choice for the pedestrian dimension: the full list of pedestrians
/// present in the snapshot (possibly none).
pub type PedestrianOption = Vec<Pedestrian>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoParams {
    pub id: String,
    pub reservation: Interval,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub claim: Option<Interval>,
    #[serde(with = "serde_rational")]
    pub size: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniverseParams {
    /// Other cars besides the ego: every count from 0 to this bound.
    pub max_cars: usize,
    #[serde(with = "serde_rational")]
    pub position_grid_step: Rational,
    pub car_sizes: Vec<SizeValue>,
    /// An empty list means the single choice "no pedestrians".
    #[serde(default)]
    pub pedestrian_options: Vec<PedestrianOption>,
    /// Every subset of these signs is enumerated.
    #[serde(default)]
    pub sign_kinds: Vec<Sign>,
    pub extent: Interval,
    pub crossing: Interval,
    pub ego: EgoParams,
    #[serde(with = "serde_rational")]
    pub perception_distance: Rational,
    #[serde(with = "serde_rational")]
    pub approach_distance: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SizeValue(#[serde(with = "serde_rational")] pub Rational);

const MAX_SIGN_KINDS: usize = 16;

impl UniverseParams {
    pub fn validate(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.position_grid_step <= int(0) {
            out.push("grid step must be positive".to_string());
        } else if let Ok(len) = rational::sub(&self.extent.hi, &self.extent.lo) {
            if !(len / self.position_grid_step).is_integer() {
                out.push("grid step does not divide extent length".to_string());
            }
        } else {
            out.push("extent too large".to_string());
        }
        if self.car_sizes.iter().any(|s| s.0 <= int(0)) {
            out.push("car sizes must be positive".to_string());
        }
        if self.sign_kinds.len() > MAX_SIGN_KINDS {
            out.push(format!("at most {MAX_SIGN_KINDS} signs can be enumerated"));
        }
        out
    }

    /// The road used by the bundled rules: extent [0,20], junction [8,14],
    /// ego `E` on [4,6] claiming [6,8], at most one other car on a grid of 2,
    /// an optional started-crossing pedestrian on the ego's claim, and one
    /// sign at position 7 for each requested kind.
    pub fn default_road<S: AsRef<str>>(sign_kinds: &[S]) -> Self {
        UniverseParams {
            max_cars: 1,
            position_grid_step: int(2),
            car_sizes: vec![SizeValue(int(2))],
            pedestrian_options: vec![
                vec![],
                vec![Pedestrian {
                    on: Interval::ints(7, 8),
                    started_crossing: true,
                }],
            ],
            sign_kinds: sign_kinds
                .iter()
                .map(|k| Sign::new(k.as_ref(), int(7)))
                .collect(),
            extent: Interval::ints(0, 20),
            crossing: Interval::ints(8, 14),
            ego: EgoParams {
                id: "E".into(),
                reservation: Interval::ints(4, 6),
                claim: Some(Interval::ints(6, 8)),
                size: int(2),
            },
            perception_distance: int(4),
            approach_distance: int(4),
        }
    }

    fn placements(&self) -> Vec<(Rational, Rational)> {
        let mut out = Vec::new();
        if self.position_grid_step <= int(0) {
            return out;
        }
        let mut pos = self.extent.lo;
        while pos <= self.extent.hi {
            for size in &self.car_sizes {
                if let Ok(end) = rational::add(&pos, &size.0) {
                    if end <= self.extent.hi && size.0 > int(0) {
                        out.push((pos, size.0));
                    }
                }
            }
            match rational::add(&pos, &self.position_grid_step) {
                Ok(next) => pos = next,
                Err(_) => break,
            }
        }
        out
    }

    fn car_ids(&self, n: usize) -> Vec<String> {
        (1..)
            .map(|i| format!("C{i}"))
            .filter(|id| *id != self.ego.id)
            .take(n)
            .collect()
    }
}

/// Lazily yields every valid snapshot composable from `p`: other cars in
/// strictly increasing (position, size) order, each pedestrian option, each
/// sign subset. Invalid parameter sets yield nothing.
pub fn enumerate_universe(p: &UniverseParams) -> impl Iterator<Item = TrafficSnapshot> + '_ {
    let ok = p.validate().is_empty();
    let placements = if ok { p.placements() } else { Vec::new() };
    let max_cars = if ok { p.max_cars.min(placements.len()) } else { 0 };
    let ids = p.car_ids(max_cars);
    let ped_opts: Vec<PedestrianOption> = if p.pedestrian_options.is_empty() {
        vec![vec![]]
    } else {
        p.pedestrian_options.clone()
    };
    let sign_masks = if ok { 1u32 << p.sign_kinds.len() } else { 0 };
    let ego = CarOccupancy {
        id: p.ego.id.clone(),
        reservation: p.ego.reservation.clone(),
        claim: p.ego.claim.clone(),
        size: p.ego.size,
    };

    let car_sets = (0..=max_cars)
        .flat_map(move |k| placements.clone().into_iter().combinations(k))
        .take(if ok { usize::MAX } else { 0 });

    car_sets
        .flat_map(move |cars| {
            let ped_opts = ped_opts.clone();
            (0..ped_opts.len()).flat_map(move |pi| {
                let cars = cars.clone();
                let peds = ped_opts[pi].clone();
                (0..sign_masks).map(move |mask| (cars.clone(), peds.clone(), mask))
            })
        })
        .map(move |(cars, peds, mask)| {
            let mut all = vec![ego.clone()];
            all.extend(cars.iter().zip(&ids).map(|((pos, size), id)| {
                CarOccupancy::new(
                    id.clone(),
                    Interval::new(*pos, *pos + *size),
                    *size,
                )
            }));
            TrafficSnapshot {
                extent: p.extent.clone(),
                ego_id: p.ego.id.clone(),
                cars: all,
                crossing: p.crossing.clone(),
                pedestrians: peds,
                signs: p
                    .sign_kinds
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, s)| s.clone())
                    .collect(),
                perception_distance: p.perception_distance,
                approach_distance: p.approach_distance,
            }
        })
        .filter(|s| validate_snapshot(s).is_empty())
}
