//! Brute-force reference evaluator.
//!
//! Splits range over a regular grid anchored at the view's lower end (plus
//! the event points), and a somewhere tries every pair of grid points
//! directly. When all positions and constants lie on a lattice of width `g`
//! and the formula nests at most `d` splits, a step of `g / (d + 1)` makes
//! the grid complete for the exact semantics.

use std::collections::HashMap;

use num_integer::Integer;

use super::ast::{Formula, LenExpr};
use super::eval::{atom_holds, check_view, EvalError, Valuation};
use crate::rational::{self, Rational};
use crate::spatial::{event_points_unchecked, Interval, TrafficSnapshot};

pub fn evaluate_oracle(
    f: &Formula,
    s: &TrafficSnapshot,
    v: &Interval,
    env: &Valuation,
    grid_step: &Rational,
) -> Result<bool, EvalError> {
    if *grid_step <= rational::int(0) {
        return Err(EvalError::NonPositiveStep);
    }
    check_view(s, v)?;
    Oracle {
        snap: s,
        step: *grid_step,
        memo: HashMap::new(),
    }
    .holds(f, v, env)
}

/// Step that makes the grid oracle complete for `f` when all data lies on
/// multiples of `lattice`.
pub fn oracle_step(f: &Formula, lattice: &Rational) -> Rational {
    lattice / rational::int(f.split_depth() as i64 + 1)
}

/// Largest width `g` such that every position, size and distance in `s`,
/// the view ends and every length constant in `f` are multiples of `g`.
/// Falls back to 1 when all of them are zero.
pub fn data_lattice(f: &Formula, s: &TrafficSnapshot, v: &Interval) -> Rational {
    fn consts(f: &Formula, out: &mut Vec<Rational>) {
        use Formula::*;
        match f {
            LengthGe(LenExpr::Const(k)) => out.push(*k),
            Not(a) | Somewhere(a) | Exists(_, a) | Forall(_, a) => consts(a, out),
            And(a, b) | Or(a, b) | Chop(a, b) => {
                consts(a, out);
                consts(b, out);
            }
            _ => {}
        }
    }
    let mut vals = vec![v.lo, v.hi, s.extent.lo, s.extent.hi, s.crossing.lo, s.crossing.hi];
    vals.push(s.perception_distance);
    vals.push(s.approach_distance);
    for c in &s.cars {
        vals.push(c.size);
        for i in c.footprint() {
            vals.extend([i.lo, i.hi]);
        }
    }
    for p in &s.pedestrians {
        vals.extend([p.on.lo, p.on.hi]);
    }
    vals.extend(s.signs.iter().map(|g| g.at));
    consts(f, &mut vals);
    let denom = vals.iter().fold(1i64, |acc, r| acc.lcm(r.denom()));
    let numer = vals
        .iter()
        .fold(0i64, |acc, r| acc.gcd(&(r.numer() * (denom / r.denom()))));
    if numer == 0 {
        rational::int(1)
    } else {
        Rational::new(numer, denom)
    }
}

struct Oracle<'s> {
    snap: &'s TrafficSnapshot,
    step: Rational,
    memo: HashMap<(usize, Rational, Rational, Valuation), bool>,
}

impl Oracle<'_> {
    fn grid(&self, v: &Interval) -> Result<Vec<Rational>, EvalError> {
        let mut pts = event_points_unchecked(self.snap, v);
        let mut p = v.lo;
        while p <= v.hi {
            pts.insert(p);
            p = rational::add(&p, &self.step)?;
        }
        Ok(pts.into_iter().collect())
    }

    fn holds(&mut self, f: &Formula, v: &Interval, env: &Valuation) -> Result<bool, EvalError> {
        use Formula::*;
        match f {
            Not(a) => Ok(!self.holds(a, v, env)?),
            And(a, b) => Ok(self.holds(a, v, env)? && self.holds(b, v, env)?),
            Or(a, b) => Ok(self.holds(a, v, env)? || self.holds(b, v, env)?),
            Chop(..) | Somewhere(_) => {
                let key = (f as *const Formula as usize, v.lo, v.hi, env.clone());
                if let Some(&b) = self.memo.get(&key) {
                    return Ok(b);
                }
                let b = self.split(f, v, env)?;
                self.memo.insert(key, b);
                Ok(b)
            }
            Exists(x, body) | Forall(x, body) => {
                let want = matches!(f, Exists(..));
                let cars: Vec<String> = self
                    .snap
                    .cars
                    .iter()
                    .map(|c| c.id.clone())
                    .filter(|id| !env.values().any(|b| b == id))
                    .collect();
                for id in cars {
                    let mut e = env.clone();
                    e.insert(x.clone(), id);
                    if self.holds(body, v, &e)? == want {
                        return Ok(want);
                    }
                }
                Ok(!want)
            }
            atom => atom_holds(self.snap, atom, v, env),
        }
    }

    fn split(&mut self, f: &Formula, v: &Interval, env: &Valuation) -> Result<bool, EvalError> {
        let grid = self.grid(v)?;
        match f {
            Formula::Chop(a, b) => {
                for m in &grid {
                    if self.holds(a, &Interval::new(v.lo, *m), env)?
                        && self.holds(b, &Interval::new(*m, v.hi), env)?
                    {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Formula::Somewhere(a) => {
                for (i, lo) in grid.iter().enumerate() {
                    for hi in &grid[i..] {
                        if self.holds(a, &Interval::new(*lo, *hi), env)? {
                            return Ok(true);
                        }
                    }
                }
                Ok(false)
            }
            _ => unreachable!(),
        }
    }
}
