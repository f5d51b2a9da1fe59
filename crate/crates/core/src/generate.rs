//! Seeded random formulas, snapshots and rule automata for differential
//! testing.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::automata::{Bound, ClockAtom, ClockConstraint, ClockOp, Location, RuleAutomaton, Transition};
use crate::rational::{self, Rational};
use crate::spatial::{CarOccupancy, Interval, Pedestrian, Sign, TrafficSnapshot};
use crate::usltr::{CarRef, Formula, LenExpr};

pub const SIGN_KINDS: [&str; 3] = ["Stop", "SWL", "GreenArrow"];

#[derive(Debug, Clone)]
pub struct FormulaParams {
    /// Maximum nesting of non-atomic operators.
    pub max_depth: usize,
    /// Concrete car ids that atoms may mention.
    pub cars: Vec<String>,
    /// Length constants are `k * lattice` for `k` in `0..=max_multiple`.
    pub lattice: Rational,
    pub max_multiple: i64,
}

impl Default for FormulaParams {
    fn default() -> Self {
        FormulaParams {
            max_depth: 3,
            cars: vec!["E".into(), "C1".into(), "C2".into()],
            lattice: rational::int(1),
            max_multiple: 6,
        }
    }
}

/// A closed formula.
pub fn formula<R: Rng>(rng: &mut R, p: &FormulaParams) -> Formula {
    let mut scope = Vec::new();
    gen_formula(rng, p, p.max_depth, &mut scope)
}

fn car_ref<R: Rng>(rng: &mut R, p: &FormulaParams, scope: &[String]) -> CarRef {
    if !scope.is_empty() && (p.cars.is_empty() || rng.gen_bool(0.6)) {
        CarRef::var(scope.choose(rng).unwrap().as_str())
    } else {
        CarRef::id(p.cars.choose(rng).map(String::as_str).unwrap_or("E"))
    }
}

fn atom<R: Rng>(rng: &mut R, p: &FormulaParams, scope: &[String]) -> Formula {
    match rng.gen_range(0..11) {
        0 => Formula::True,
        1 => Formula::False,
        2 | 3 => Formula::Free,
        4 => Formula::Cs,
        5 => Formula::Re(car_ref(rng, p, scope)),
        6 => Formula::Sg(car_ref(rng, p, scope)),
        7 => Formula::Pc(car_ref(rng, p, scope)),
        8 => Formula::Pa(car_ref(rng, p, scope)),
        9 => Formula::Ob(SIGN_KINDS.choose(rng).unwrap().to_string()),
        _ => {
            if rng.gen_bool(0.25) {
                Formula::LengthGe(LenExpr::Size(car_ref(rng, p, scope)))
            } else {
                let k = rng.gen_range(0..=p.max_multiple);
                Formula::LengthGe(LenExpr::Const(p.lattice * rational::int(k)))
            }
        }
    }
}

fn gen_formula<R: Rng>(rng: &mut R, p: &FormulaParams, depth: usize, scope: &mut Vec<String>) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        return atom(rng, p, scope);
    }
    let sub = |rng: &mut R, scope: &mut Vec<String>| gen_formula(rng, p, depth - 1, scope);
    match rng.gen_range(0..8) {
        0 => Formula::not(sub(rng, scope)),
        1 => Formula::and(sub(rng, scope), sub(rng, scope)),
        2 => Formula::or(sub(rng, scope), sub(rng, scope)),
        3 | 4 => Formula::Chop(Box::new(sub(rng, scope)), Box::new(sub(rng, scope))),
        5 => Formula::Somewhere(Box::new(sub(rng, scope))),
        k => {
            let var = ["c", "d", "e"][scope.len().min(2)].to_string();
            scope.push(var.clone());
            let body = sub(rng, scope);
            scope.pop();
            if k == 6 {
                Formula::Exists(var, Box::new(body))
            } else {
                Formula::Forall(var, Box::new(body))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SnapshotParams {
    /// Number of cars including the ego, at least 1.
    pub max_cars: usize,
    /// Extent is `[0, length]`; every position is an integer.
    pub length: i64,
}

impl Default for SnapshotParams {
    fn default() -> Self {
        SnapshotParams { max_cars: 3, length: 12 }
    }
}

fn interval<R: Rng>(rng: &mut R, lo: i64, hi: i64, max_len: i64) -> Interval {
    let a = rng.gen_range(lo..=hi);
    let len = rng.gen_range(0..=max_len.min(hi - a));
    Interval::ints(a, a + len)
}

/// A valid snapshot with ego `E` and other cars `C1`, `C2`, ..., all
/// positions on the integer grid.
pub fn snapshot<R: Rng>(rng: &mut R, p: &SnapshotParams) -> TrafficSnapshot {
    let n = p.length.max(2);
    let cars = rng.gen_range(1..=p.max_cars.max(1));
    let mut out = Vec::new();
    for i in 0..cars {
        let id = if i == 0 { "E".to_string() } else { format!("C{i}") };
        let size = rng.gen_range(1..=3.min(n));
        let lo = rng.gen_range(0..=n - size);
        let mut car = CarOccupancy::new(id, Interval::ints(lo, lo + size), rational::int(size));
        if lo + size < n && rng.gen_bool(0.5) {
            let end = rng.gen_range(lo + size..=n.min(lo + size + 3));
            car = car.with_claim(Interval::ints(lo + size, end));
        }
        out.push(car);
    }
    let pedestrians = (0..rng.gen_range(0..=1))
        .map(|_| Pedestrian { on: interval(rng, 0, n, 2), started_crossing: rng.gen_bool(0.5) })
        .collect();
    let mut signs = Vec::new();
    for k in SIGN_KINDS {
        if rng.gen_bool(0.4) {
            signs.push(Sign::new(k, rational::int(rng.gen_range(0..=n))));
        }
    }
    TrafficSnapshot {
        extent: Interval::ints(0, n),
        ego_id: "E".into(),
        cars: out,
        crossing: interval(rng, 0, n, 5),
        pedestrians,
        signs,
        perception_distance: rational::int(rng.gen_range(0..=4)),
        approach_distance: rational::int(rng.gen_range(0..=4)),
    }
}

#[derive(Debug, Clone)]
pub struct AutomatonParams {
    pub max_locations: usize,
    pub max_clocks: usize,
    pub max_constant: i64,
    pub max_transitions: usize,
}

impl Default for AutomatonParams {
    fn default() -> Self {
        AutomatonParams { max_locations: 4, max_clocks: 2, max_constant: 5, max_transitions: 6 }
    }
}

/// Spatial guards drawn by [`automaton`].
pub fn guard_pool() -> Vec<Formula> {
    let ob = |k: &str| Formula::Ob(k.into());
    vec![
        Formula::True,
        Formula::True,
        ob("Stop"),
        Formula::not(ob("Stop")),
        Formula::and(ob("Stop"), ob("SWL")),
        Formula::or(ob("GreenArrow"), Formula::not(ob("SWL"))),
        Formula::Somewhere(Box::new(Formula::Free)),
        Formula::not(Formula::exists("c", Formula::Pc(CarRef::var("c")))),
        Formula::Somewhere(Box::new(Formula::and(Formula::Cs, Formula::Re(CarRef::id("E"))))),
    ]
}

fn constraint<R: Rng>(rng: &mut R, clocks: &[String], consts: &[(String, i64)], p: &AutomatonParams, upper_only: bool) -> ClockConstraint {
    if clocks.is_empty() {
        return ClockConstraint::default();
    }
    let atoms = rng.gen_range(0..=2);
    ClockConstraint(
        (0..atoms)
            .map(|_| {
                let op = if upper_only || rng.gen_bool(0.5) { ClockOp::Le } else { ClockOp::Ge };
                let bound = if !consts.is_empty() && rng.gen_bool(0.3) {
                    let (n, v) = consts.choose(rng).unwrap();
                    Bound::named(n.as_str(), *v)
                } else {
                    Bound::lit(rng.gen_range(0..=p.max_constant))
                };
                ClockAtom::new(clocks.choose(rng).unwrap().as_str(), op, bound)
            })
            .collect(),
    )
}

/// A valid rule automaton named `name` over clocks `x`, `y` and actions
/// `a0`, `a1`, `a2`.
pub fn automaton<R: Rng>(rng: &mut R, name: &str, p: &AutomatonParams) -> RuleAutomaton {
    let mut a = RuleAutomaton::new(name);
    a.clocks = ["x", "y"][..rng.gen_range(0..=p.max_clocks.min(2))].iter().map(|s| s.to_string()).collect();
    let consts: Vec<(String, i64)> = (0..rng.gen_range(0..=2))
        .map(|i| (format!("k{i}"), rng.gen_range(0..=p.max_constant)))
        .collect();
    a.constants = consts.iter().map(|(n, v)| (n.clone(), rational::int(*v))).collect();
    a.alphabet = ["a0", "a1", "a2"].iter().map(|s| s.to_string()).collect();
    let n = rng.gen_range(1..=p.max_locations.max(1));
    let names: Vec<String> = (0..n).map(|i| format!("L{i}")).collect();
    let pool = guard_pool();
    for (i, name) in names.iter().enumerate() {
        let mut l = Location::new(name.as_str());
        l.initial = i == 0;
        if rng.gen_bool(0.4) {
            l.invariant = constraint(rng, &a.clocks, &consts, p, true);
        }
        if rng.gen_bool(0.15) {
            l.forbid = vec![a.alphabet.choose(rng).unwrap().clone()];
        }
        if rng.gen_bool(0.1) {
            l.spatial_invariant = Some(pool.choose(rng).unwrap().clone());
        }
        if rng.gen_bool(0.2) {
            l.role = Some(format!("step {i}"));
        }
        a.locations.push(l);
    }
    // a spanning tree out of the initial location, then random extra edges
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.gen_range(0..i), i)).collect();
    edges.truncate(p.max_transitions);
    let extra = rng.gen_range(0..=p.max_transitions - edges.len());
    edges.extend((0..extra).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))));
    for (src, dst) in edges {
        let mut t = Transition::new(
            names[src].as_str(),
            names[dst].as_str(),
            a.alphabet.choose(rng).unwrap().as_str(),
        );
        t.spatial_guard = pool.choose(rng).unwrap().clone();
        t.clock_guard = constraint(rng, &a.clocks, &consts, p, false);
        t.resets = a.clocks.iter().filter(|_| rng.gen_bool(0.4)).cloned().collect();
        a.transitions.push(t);
    }
    a
}
