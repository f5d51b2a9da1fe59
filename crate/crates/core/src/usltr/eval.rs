//! Exact evaluation over a snapshot.
//!
//! Atoms are piecewise constant in the view endpoints: their truth only
//! changes at event points of the snapshot and at distances given by the
//! length constants of the formula. For a chop we therefore collect the
//! critical points (event points shifted by sums of at most `depth` length
//! constants, where `depth` is the split nesting below the chop) and probe
//! each critical point plus the midpoint of every pair of neighbouring ones.
//! Midpoints are needed because negated atoms hold on open intervals.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use super::ast::{CarRef, Formula, LenExpr};
use crate::rational::{self, Overflow, Rational};
use crate::spatial::{event_points_unchecked, Interval, TrafficSnapshot, ViewOutsideExtent};

/// Variable name to car id.
pub type Valuation = BTreeMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error(transparent)]
    View(#[from] ViewOutsideExtent),
    #[error(transparent)]
    Overflow(#[from] Overflow),
    #[error("grid step must be positive")]
    NonPositiveStep,
}

/// Truth of `f` on view `v`.
pub fn evaluate(
    f: &Formula,
    s: &TrafficSnapshot,
    v: &Interval,
    env: &Valuation,
) -> Result<bool, EvalError> {
    check_view(s, v)?;
    let mut ev = Evaluator::new(s);
    ev.register(f);
    let env = ev.intern(env.clone());
    ev.holds(f, v, env)
}

pub(crate) fn check_view(s: &TrafficSnapshot, v: &Interval) -> Result<(), ViewOutsideExtent> {
    if s.extent.contains(v) {
        Ok(())
    } else {
        Err(ViewOutsideExtent {
            view: v.clone(),
            extent: s.extent.clone(),
        })
    }
}

/// A split chosen while proving a chop or somewhere formula true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitWitness {
    pub formula: String,
    pub view: Interval,
    /// One split point for a chop, the chosen subinterval's endpoints for a
    /// somewhere.
    pub points: Vec<Rational>,
}

/// Evaluates `f` and, when it holds, the split points that make it hold.
pub fn evaluate_explained(
    f: &Formula,
    s: &TrafficSnapshot,
    v: &Interval,
    env: &Valuation,
) -> Result<(bool, Vec<SplitWitness>), EvalError> {
    check_view(s, v)?;
    let mut ev = Evaluator::new(s);
    ev.register(f);
    let env = ev.intern(env.clone());
    let holds = ev.holds(f, v, env)?;
    let mut out = Vec::new();
    if holds {
        ev.witness(f, v, env, &mut out)?;
    }
    Ok((holds, out))
}

/// Critical split points of `f` (normally a chop or somewhere) on `v`: the
/// event points of `v`, closed under shifting by the length constants of
/// `f` up to its split depth, clipped to `v`.
pub fn split_candidates(
    f: &Formula,
    s: &TrafficSnapshot,
    v: &Interval,
    env: &Valuation,
) -> Result<BTreeSet<Rational>, EvalError> {
    check_view(s, v)?;
    let mut consts = BTreeSet::new();
    length_constants(f, s, env, &mut consts);
    critical_points(s, v, &consts, f.split_depth().max(1))
}

fn critical_points(
    s: &TrafficSnapshot,
    v: &Interval,
    consts: &BTreeSet<Rational>,
    depth: usize,
) -> Result<BTreeSet<Rational>, EvalError> {
    let mut all = event_points_unchecked(s, v);
    let zero = rational::int(0);
    let shifts: Vec<&Rational> = consts.iter().filter(|k| **k > zero).collect();
    if let Some(kmax) = shifts.last() {
        let mut frontier: Vec<Rational> = all.iter().copied().collect();
        for round in 0..depth {
            // points further out than the remaining shifts can bring back are useless
            let slack = rational::mul(kmax, &rational::int((depth - round - 1) as i64))?;
            let lo = rational::sub(&v.lo, &slack)?;
            let hi = rational::add(&v.hi, &slack)?;
            let mut next = Vec::new();
            for p in &frontier {
                for k in &shifts {
                    for q in [rational::add(p, k)?, rational::sub(p, k)?] {
                        if lo <= q && q <= hi && all.insert(q) {
                            next.push(q);
                        }
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            frontier = next;
        }
    }
    Ok(all.into_iter().filter(|p| v.contains_point(p)).collect())
}

fn probe_points(
    s: &TrafficSnapshot,
    v: &Interval,
    consts: &BTreeSet<Rational>,
    depth: usize,
) -> Result<Vec<Rational>, EvalError> {
    let crit: Vec<Rational> = critical_points(s, v, consts, depth)?.into_iter().collect();
    let mut out = Vec::with_capacity(crit.len() * 2);
    for (i, p) in crit.iter().enumerate() {
        out.push(*p);
        if let Some(q) = crit.get(i + 1) {
            out.push(rational::midpoint(p, q)?);
        }
    }
    Ok(out)
}

/// Length thresholds that can matter inside `f`: explicit constants and the
/// sizes of the cars it can refer to.
fn length_constants(f: &Formula, s: &TrafficSnapshot, env: &Valuation, out: &mut BTreeSet<Rational>) {
    let mut sizes = |r: &CarRef| match r {
        CarRef::Id(id) => out.extend(s.car(id).map(|c| c.size)),
        CarRef::Var(x) => match env.get(x).and_then(|id| s.car(id)) {
            Some(c) => {
                out.insert(c.size);
            }
            None => out.extend(s.cars.iter().map(|c| c.size)),
        },
    };
    match f {
        Formula::LengthGe(LenExpr::Const(k)) => {
            out.insert(*k);
        }
        Formula::LengthGe(LenExpr::Size(r)) | Formula::Sg(r) => sizes(r),
        other => {
            for c in other.children() {
                length_constants(c, s, env, out);
            }
        }
    }
}

fn resolve<'a>(r: &'a CarRef, env: &'a Valuation) -> Result<&'a str, EvalError> {
    match r {
        CarRef::Id(id) => Ok(id),
        CarRef::Var(x) => env
            .get(x)
            .map(String::as_str)
            .ok_or_else(|| EvalError::UnboundVariable(x.clone())),
    }
}

fn is_free(s: &TrafficSnapshot, v: &Interval) -> bool {
    let interior = |iv: &Interval| v.lo < v.hi && iv.meets_interior(v);
    !s.cars.iter().any(|c| interior(&c.reservation)) && !s.pedestrians.iter().any(|p| interior(&p.on))
}

fn length_at_least(v: &Interval, k: &Rational) -> Result<bool, EvalError> {
    Ok(v.hi >= rational::add(&v.lo, k)?)
}

/// Truth of a view-level atom. Cars not present in the snapshot make
/// `re`, `sg`, `pc`, `pa` and `l >= size(..)` false.
pub(crate) fn atom_holds(
    s: &TrafficSnapshot,
    f: &Formula,
    v: &Interval,
    env: &Valuation,
) -> Result<bool, EvalError> {
    use Formula::*;
    Ok(match f {
        True => true,
        False => false,
        Free => is_free(s, v),
        Cs => s.crossing.contains(v),
        Re(r) => s
            .car(resolve(r, env)?)
            .is_some_and(|c| c.reservation.contains(v)),
        LengthGe(LenExpr::Const(k)) => length_at_least(v, k)?,
        LengthGe(LenExpr::Size(r)) => match s.car(resolve(r, env)?) {
            Some(c) => length_at_least(v, &c.size)?,
            None => false,
        },
        Sg(r) => match s.car(resolve(r, env)?) {
            Some(c) => is_free(s, v) && length_at_least(v, &c.size)?,
            None => false,
        },
        Pc(r) => {
            let id = resolve(r, env)?;
            match (s.car(id), s.ego()) {
                (Some(c), Some(ego)) if c.id != ego.id => c
                    .footprint()
                    .any(|a| ego.footprint().any(|b| a.overlaps_positively(b))),
                _ => false,
            }
        }
        Pa(r) => match s.car(resolve(r, env)?) {
            Some(c) => match &c.claim {
                Some(claim) if claim.hi >= *c.front() => {
                    let ahead = Interval::new(claim.lo.max(*c.front()), claim.hi);
                    s.pedestrians
                        .iter()
                        .any(|p| p.started_crossing && p.on.intersects(&ahead))
                }
                _ => false,
            },
            None => false,
        },
        Ob(kind) => match s.ego() {
            Some(ego) => {
                let front = *ego.front();
                let reach = rational::add(&front, &s.perception_distance)?;
                s.signs
                    .iter()
                    .any(|sg| sg.kind == *kind && front <= sg.at && sg.at <= reach)
            }
            None => false,
        },
        _ => unreachable!("atom_holds called on a compound formula"),
    })
}

#[derive(Clone, Copy)]
enum Part<'f> {
    F(&'f Formula),
    True,
    /// `f chop true`, the right half of a somewhere.
    Tail(&'f Formula),
}

type MemoKey = (usize, u8, Rational, Rational, usize);
type ProbeKey = (Rational, Rational, usize, Vec<Rational>);

/// Memoizing evaluator bound to one snapshot. Reuse it to evaluate many
/// formulas or views on the same snapshot; results for shared subformulas
/// carry over between formulas.
pub struct Evaluator<'s> {
    snap: &'s TrafficSnapshot,
    envs: Vec<Valuation>,
    env_ids: HashMap<Valuation, usize>,
    // structural ids, stable across calls
    ids: HashMap<Formula, usize>,
    // node address to structural id, rebuilt for every formula evaluated
    addr: HashMap<usize, usize>,
    memo: HashMap<MemoKey, bool>,
    probes: HashMap<ProbeKey, Rc<Vec<Rational>>>,
}

impl<'s> Evaluator<'s> {
    pub fn new(snap: &'s TrafficSnapshot) -> Self {
        Evaluator {
            snap,
            envs: Vec::new(),
            env_ids: HashMap::new(),
            ids: HashMap::new(),
            addr: HashMap::new(),
            memo: HashMap::new(),
            probes: HashMap::new(),
        }
    }

    fn register(&mut self, f: &Formula) {
        self.addr.clear();
        let mut stack = vec![f];
        while let Some(node) = stack.pop() {
            let next = self.ids.len();
            let id = *self.ids.entry(node.clone()).or_insert(next);
            self.addr.insert(node as *const Formula as usize, id);
            stack.extend(node.children());
        }
    }

    /// Evaluates a closed formula on the full extent.
    pub fn holds_on_extent(&mut self, f: &Formula) -> Result<bool, EvalError> {
        self.register(f);
        let env = self.intern(Valuation::new());
        let view = self.snap.extent.clone();
        self.holds(f, &view, env)
    }

    fn intern(&mut self, env: Valuation) -> usize {
        if let Some(&id) = self.env_ids.get(&env) {
            return id;
        }
        let id = self.envs.len();
        self.envs.push(env.clone());
        self.env_ids.insert(env, id);
        id
    }

    fn bind(&mut self, env: usize, var: &str, car: &str) -> usize {
        let mut e = self.envs[env].clone();
        e.insert(var.to_string(), car.to_string());
        self.intern(e)
    }

    /// Cars not already bound in `env`.
    fn domain(&self, env: usize) -> Vec<String> {
        let used: BTreeSet<&String> = self.envs[env].values().collect();
        self.snap
            .cars
            .iter()
            .filter(|c| !used.contains(&c.id))
            .map(|c| c.id.clone())
            .collect()
    }

    fn holds(&mut self, f: &Formula, v: &Interval, env: usize) -> Result<bool, EvalError> {
        use Formula::*;
        match f {
            Not(a) => Ok(!self.holds(a, v, env)?),
            And(a, b) => Ok(self.holds(a, v, env)? && self.holds(b, v, env)?),
            Or(a, b) => Ok(self.holds(a, v, env)? || self.holds(b, v, env)?),
            Chop(a, b) => self.memoized(f, 0, v, env, |ev| {
                ev.chop(Part::F(a), Part::F(b), f.split_depth(), v, env)
                    .map(|w| w.is_some())
            }),
            Somewhere(a) => self.memoized(f, 0, v, env, |ev| {
                ev.chop(Part::True, Part::Tail(a), f.split_depth(), v, env)
                    .map(|w| w.is_some())
            }),
            Exists(x, body) => {
                for car in self.domain(env) {
                    let e = self.bind(env, x, &car);
                    if self.holds(body, v, e)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Forall(x, body) => {
                for car in self.domain(env) {
                    let e = self.bind(env, x, &car);
                    if !self.holds(body, v, e)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            atom => atom_holds(self.snap, atom, v, &self.envs[env]),
        }
    }

    fn memoized(
        &mut self,
        node: &Formula,
        tag: u8,
        v: &Interval,
        env: usize,
        compute: impl FnOnce(&mut Self) -> Result<bool, EvalError>,
    ) -> Result<bool, EvalError> {
        let id = self.addr[&(node as *const Formula as usize)];
        let key = (id, tag, v.lo, v.hi, env);
        if let Some(&b) = self.memo.get(&key) {
            return Ok(b);
        }
        let b = compute(self)?;
        self.memo.insert(key, b);
        Ok(b)
    }

    fn part_holds(&mut self, p: Part<'_>, v: &Interval, env: usize) -> Result<bool, EvalError> {
        match p {
            Part::F(f) => self.holds(f, v, env),
            Part::True => Ok(true),
            Part::Tail(body) => self.memoized(body, 1, v, env, |ev| {
                ev.chop(Part::F(body), Part::True, 1 + body.split_depth(), v, env)
                    .map(|w| w.is_some())
            }),
        }
    }

    fn part_constants(&self, p: Part<'_>, env: usize, out: &mut BTreeSet<Rational>) {
        match p {
            Part::F(f) | Part::Tail(f) => length_constants(f, self.snap, &self.envs[env], out),
            Part::True => {}
        }
    }

    /// First split point (ascending) at which `left` holds before and
    /// `right` after, if any.
    fn chop(
        &mut self,
        left: Part<'_>,
        right: Part<'_>,
        depth: usize,
        v: &Interval,
        env: usize,
    ) -> Result<Option<Rational>, EvalError> {
        let mut consts = BTreeSet::new();
        self.part_constants(left, env, &mut consts);
        self.part_constants(right, env, &mut consts);
        let key = (v.lo, v.hi, depth, consts.into_iter().collect::<Vec<_>>());
        let points = match self.probes.get(&key) {
            Some(p) => Rc::clone(p),
            None => {
                let consts: BTreeSet<Rational> = key.3.iter().copied().collect();
                let p = Rc::new(probe_points(self.snap, v, &consts, depth)?);
                self.probes.insert(key, Rc::clone(&p));
                p
            }
        };
        for &m in points.iter() {
            if self.part_holds(left, &Interval::new(v.lo, m), env)?
                && self.part_holds(right, &Interval::new(m, v.hi), env)?
            {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    fn witness(
        &mut self,
        f: &Formula,
        v: &Interval,
        env: usize,
        out: &mut Vec<SplitWitness>,
    ) -> Result<(), EvalError> {
        use Formula::*;
        match f {
            And(a, b) => {
                self.witness(a, v, env, out)?;
                self.witness(b, v, env, out)?;
            }
            Or(a, b) => {
                if self.holds(a, v, env)? {
                    self.witness(a, v, env, out)?;
                } else {
                    self.witness(b, v, env, out)?;
                }
            }
            Chop(a, b) => {
                if let Some(m) = self.chop(Part::F(a), Part::F(b), f.split_depth(), v, env)? {
                    out.push(SplitWitness {
                        formula: f.to_string(),
                        view: v.clone(),
                        points: vec![m],
                    });
                    self.witness(a, &Interval::new(v.lo, m), env, out)?;
                    self.witness(b, &Interval::new(m, v.hi), env, out)?;
                }
            }
            Somewhere(a) => {
                let start = self.chop(Part::True, Part::Tail(a), f.split_depth(), v, env)?;
                if let Some(lo) = start {
                    let tail = Interval::new(lo, v.hi);
                    if let Some(hi) = self.chop(Part::F(a), Part::True, 1 + a.split_depth(), &tail, env)? {
                        out.push(SplitWitness {
                            formula: f.to_string(),
                            view: v.clone(),
                            points: vec![lo, hi],
                        });
                        self.witness(a, &Interval::new(lo, hi), env, out)?;
                    }
                }
            }
            Exists(x, body) => {
                for car in self.domain(env) {
                    let e = self.bind(env, x, &car);
                    if self.holds(body, v, e)? {
                        return self.witness(body, v, e, out);
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use crate::spatial::fixtures::road;
    use crate::spatial::{CarOccupancy, Pedestrian, Sign};
    use crate::usltr::parse_formula;

    fn empty() -> TrafficSnapshot {
        TrafficSnapshot {
            extent: Interval::ints(0, 20),
            ego_id: "E".into(),
            cars: vec![CarOccupancy::new("E", Interval::ints(0, 0), int(1))],
            crossing: Interval::ints(20, 20),
            pedestrians: vec![],
            signs: vec![],
            perception_distance: int(0),
            approach_distance: int(0),
        }
    }

    fn eval(text: &str, s: &TrafficSnapshot, v: Interval) -> bool {
        evaluate(&parse_formula(text).unwrap(), s, &v, &Valuation::new()).unwrap()
    }

    #[test]
    fn free_on_empty_snapshot() {
        assert!(eval("free", &empty(), Interval::ints(0, 10)));
    }

    #[test]
    fn safe_gap_on_junction_in_the_example_road() {
        let f = Formula::safe_gap_on_junction("A");
        let s = road();
        assert!(evaluate(&f, &s, &Interval::ints(0, 12), &Valuation::new()).unwrap());
        // somewhere reading holds on the whole extent, the bare body does not
        assert!(!evaluate(&f, &s, &s.extent, &Valuation::new()).unwrap());
        assert!(evaluate(&Formula::somewhere(f), &s, &s.extent, &Valuation::new()).unwrap());
    }

    #[test]
    fn safe_gap_blocked_by_car_on_junction() {
        let mut s = road();
        s.cars.push(CarOccupancy::new("B", Interval::ints(9, 11), int(2)));
        let f = Formula::somewhere(Formula::safe_gap_on_junction("A"));
        assert!(!evaluate(&f, &s, &s.extent, &Valuation::new()).unwrap());
    }

    #[test]
    fn chop_of_lengths() {
        // dense-grid oracle at step 1/4 (see oracle tests) gives false / true
        let f = "(free and l >= 2) chop (free and l >= 3)";
        assert!(!eval(f, &empty(), Interval::ints(0, 4)));
        assert!(eval(f, &empty(), Interval::ints(0, 5)));
    }

    #[test]
    fn negation_needs_interior_points() {
        // only splits strictly between 1 and 2 work
        let f = "not l >= 2 chop not l >= 2";
        assert!(eval(f, &empty(), Interval::ints(0, 3)));
        assert!(!eval(f, &empty(), Interval::ints(0, 4)));
    }

    #[test]
    fn candidates_reduce_to_event_points() {
        let mut s = empty();
        s.cars.push(CarOccupancy::new("B", Interval::ints(3, 5), int(2)));
        let f = parse_formula("free chop re(B)").unwrap();
        let c = split_candidates(&f, &s, &Interval::ints(0, 10), &Valuation::new()).unwrap();
        // size of B does not occur in the formula
        assert_eq!(c, [0, 3, 5, 10].map(int).into());
    }

    #[test]
    fn candidates_shift_by_constants() {
        let f = parse_formula("l >= 2 chop l >= 3").unwrap();
        let c = split_candidates(&f, &empty(), &Interval::ints(0, 10), &Valuation::new()).unwrap();
        // 0±2, 0±3, 10±2, 10±3 clipped to [0,10]
        assert_eq!(c, [0, 2, 3, 7, 8, 10].map(int).into());
    }

    #[test]
    fn candidates_of_point_view() {
        let f = parse_formula("l >= 2 chop l >= 3").unwrap();
        let v = Interval::ints(4, 4);
        let c = split_candidates(&f, &empty(), &v, &Valuation::new()).unwrap();
        assert_eq!(c, [int(4)].into());
    }

    #[test]
    fn cs_and_re() {
        let s = road();
        assert!(!eval("cs", &s, Interval::ints(0, 2)));
        assert!(eval("cs", &s, Interval::ints(9, 10)));
        assert!(eval("re(A)", &s, Interval::new(ratio(1, 2), int(2))));
        assert!(!eval("re(Z)", &s, Interval::ints(0, 1)));
    }

    #[test]
    fn potential_collision_uses_claims() {
        let mut s = road();
        s.cars[0] = s.cars[0].clone().with_claim(Interval::ints(2, 5));
        s.cars.push(CarOccupancy::new("B", Interval::ints(5, 7), int(2)));
        assert!(!eval("exists c : pc(c)", &s, s.extent.clone()));
        s.cars[1] = CarOccupancy::new("B", Interval::ints(4, 6), int(2));
        assert!(eval("exists c : pc(c)", &s, s.extent.clone()));
        assert!(!eval("pc(A)", &s, s.extent.clone()));
    }

    #[test]
    fn pedestrian_ahead_needs_started_crossing() {
        let mut s = road();
        s.cars[0] = s.cars[0].clone().with_claim(Interval::ints(2, 6));
        s.pedestrians.push(Pedestrian {
            on: Interval::ints(5, 6),
            started_crossing: false,
        });
        assert!(!eval("pa(A)", &s, s.extent.clone()));
        s.pedestrians[0].started_crossing = true;
        assert!(eval("pa(A)", &s, s.extent.clone()));
    }

    #[test]
    fn observed_sign_within_perception() {
        let mut s = road();
        s.signs.push(Sign::new("Stop", int(6)));
        assert!(eval("ob(Stop)", &s, s.extent.clone()));
        s.signs[0].at = int(7);
        assert!(!eval("ob(Stop)", &s, s.extent.clone()));
        assert!(!eval("ob(SWL)", &s, s.extent.clone()));
    }

    #[test]
    fn quantifiers_skip_bound_cars() {
        let mut s = road();
        s.cars.push(CarOccupancy::new("B", Interval::ints(4, 6), int(2)));
        // two distinct cars exist, three do not
        assert!(eval("exists c : exists d : true", &s, s.extent.clone()));
        assert!(!eval("exists c : exists d : exists e : true", &s, s.extent.clone()));
        assert!(eval("forall c : l >= size(c)", &s, Interval::ints(0, 2)));
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let f = parse_formula("pc(c)").unwrap();
        let s = road();
        assert_eq!(
            evaluate(&f, &s, &s.extent, &Valuation::new()),
            Err(EvalError::UnboundVariable("c".into()))
        );
        let env: Valuation = [("c".to_string(), "A".to_string())].into();
        assert_eq!(evaluate(&f, &s, &s.extent, &env), Ok(false));
    }

    #[test]
    fn view_outside_extent_is_an_error() {
        let s = road();
        assert!(matches!(
            evaluate(&Formula::Free, &s, &Interval::ints(10, 30), &Valuation::new()),
            Err(EvalError::View(_))
        ));
    }

    #[test]
    fn explain_reports_splits() {
        let s = road();
        let f = Formula::safe_gap_on_junction("A");
        let (holds, splits) =
            evaluate_explained(&f, &s, &Interval::ints(0, 12), &Valuation::new()).unwrap();
        assert!(holds);
        let points: Vec<_> = splits.iter().map(|w| w.points.clone()).collect();
        assert_eq!(points, vec![vec![int(2)], vec![int(8)]]);
    }
}
