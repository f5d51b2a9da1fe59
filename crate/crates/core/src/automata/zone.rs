//! Difference-bound matrices with closed integer bounds.
//!
//! Index 0 is the zero reference; clock `i` lives at index `i` (1-based).
//! Entry `(i, j)` bounds `x_i - x_j <= d`.

use std::fmt;

use super::ClockOp;

pub const INF: i64 = i64::MAX / 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Zone {
    dim: usize,
    d: Vec<i64>,
}

fn add(a: i64, b: i64) -> i64 {
    if a >= INF || b >= INF {
        INF
    } else {
        a + b
    }
}

impl Zone {
    /// All clocks equal to zero.
    pub fn zero(clocks: usize) -> Self {
        let dim = clocks + 1;
        Zone {
            dim,
            d: vec![0; dim * dim],
        }
    }

    /// Every nonnegative valuation.
    pub fn universe(clocks: usize) -> Self {
        let dim = clocks + 1;
        let mut d = vec![INF; dim * dim];
        for i in 0..dim {
            d[i * dim + i] = 0;
            d[i] = 0;
        }
        Zone { dim, d }
    }

    pub fn clocks(&self) -> usize {
        self.dim - 1
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.d[i * self.dim + j]
    }

    fn set(&mut self, i: usize, j: usize, v: i64) {
        self.d[i * self.dim + j] = v;
    }

    pub fn is_empty(&self) -> bool {
        (0..self.dim).any(|i| self.get(i, i) < 0)
    }

    fn make_empty(&mut self) {
        self.set(0, 0, -1);
    }

    /// Shortest-path closure.
    pub fn canon(&mut self) {
        if self.is_empty() {
            return;
        }
        let n = self.dim;
        for k in 0..n {
            for i in 0..n {
                let ik = self.get(i, k);
                if ik >= INF {
                    continue;
                }
                for j in 0..n {
                    let via = add(ik, self.get(k, j));
                    if via < self.get(i, j) {
                        self.set(i, j, via);
                    }
                }
            }
            if self.get(k, k) < 0 {
                self.make_empty();
                return;
            }
        }
        if (0..n).any(|i| self.get(i, i) < 0) {
            self.make_empty();
        }
    }

    /// Lets time pass without bound.
    pub fn up(&mut self) {
        if self.is_empty() {
            return;
        }
        for i in 1..self.dim {
            self.set(i, 0, INF);
        }
    }

    /// Intersects with `x_clock op c`, keeping the zone canonical.
    pub fn constrain(&mut self, clock: usize, op: ClockOp, c: i64) {
        if self.is_empty() {
            return;
        }
        let (i, j, v) = match op {
            ClockOp::Le => (clock, 0, c),
            ClockOp::Ge => (0, clock, -c),
        };
        if v >= self.get(i, j) {
            return;
        }
        if add(v, self.get(j, i)) < 0 {
            self.make_empty();
            return;
        }
        self.set(i, j, v);
        let n = self.dim;
        for a in 0..n {
            for b in 0..n {
                let via = add(add(self.get(a, i), v), self.get(j, b));
                if via < self.get(a, b) {
                    self.set(a, b, via);
                }
            }
        }
    }

    pub fn constrain_all(&mut self, atoms: &[(usize, ClockOp, i64)]) {
        for &(x, op, c) in atoms {
            self.constrain(x, op, c);
        }
    }

    pub fn reset(&mut self, clock: usize) {
        if self.is_empty() {
            return;
        }
        for j in 0..self.dim {
            let zj = self.get(0, j);
            let jz = self.get(j, 0);
            self.set(clock, j, zj);
            self.set(j, clock, jz);
        }
        self.set(clock, clock, 0);
    }

    /// Widens bounds beyond `m` so that exploration terminates.
    pub fn extrapolate(&mut self, m: i64) {
        if self.is_empty() {
            return;
        }
        let mut changed = false;
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i == j {
                    continue;
                }
                let v = self.get(i, j);
                if v < INF && v > m {
                    self.set(i, j, INF);
                    changed = true;
                } else if v < -m && v != -(m + 1) {
                    self.set(i, j, -(m + 1));
                    changed = true;
                }
            }
        }
        if changed {
            self.canon();
        }
    }

    /// `self` contains every valuation of `other`. Both must be canonical.
    pub fn includes(&self, other: &Zone) -> bool {
        if other.is_empty() {
            return true;
        }
        if self.is_empty() {
            return false;
        }
        self.d.iter().zip(&other.d).all(|(a, b)| a >= b)
    }

    /// Membership of a valuation given in units of `1/scale`.
    pub fn contains_scaled(&self, v: &[i64], scale: i64) -> bool {
        if self.is_empty() {
            return false;
        }
        let val = |i: usize| if i == 0 { 0 } else { v[i - 1] };
        for i in 0..self.dim {
            for j in 0..self.dim {
                let b = self.get(i, j);
                if b < INF && val(i) - val(j) > b * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.contains_scaled(v, 1)
    }

    /// Constraint list using the given clock names.
    pub fn describe(&self, names: &[String]) -> String {
        if self.is_empty() {
            return "false".into();
        }
        let name = |i: usize| names.get(i - 1).cloned().unwrap_or_else(|| format!("c{i}"));
        let mut parts = Vec::new();
        for i in 1..self.dim {
            let lo = -self.get(0, i);
            let hi = self.get(i, 0);
            if hi < INF && lo == hi {
                parts.push(format!("{} = {lo}", name(i)));
                continue;
            }
            if lo > 0 {
                parts.push(format!("{} >= {lo}", name(i)));
            }
            if hi < INF {
                parts.push(format!("{} <= {hi}", name(i)));
            }
        }
        for i in 1..self.dim {
            for j in 1..self.dim {
                let b = self.get(i, j);
                let implied = add(self.get(i, 0), self.get(0, j));
                if i != j && b < INF && b < implied {
                    parts.push(format!("{} - {} <= {b}", name(i), name(j)));
                }
            }
        }
        if parts.is_empty() {
            "true".into()
        } else {
            parts.join(", ")
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..self.dim).map(|i| format!("x{i}")).collect();
        f.write_str(&self.describe(&names))
    }
}
