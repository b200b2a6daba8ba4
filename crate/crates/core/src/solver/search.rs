use std::ops::ControlFlow;
use std::time::Instant;

use super::ground::{GTerm, GroundConstraint, GroundModel};
use super::{Limits, Solution, SolveError};
use crate::frontend::CmpOp;
use crate::transpile::{ConstraintKind, Sense};

/// Live values of a cell as a bitmask over `lo..=hi`.
#[derive(Clone, Copy, Debug)]
struct Dom {
    lo: i64,
    mask: u64,
}

impl Dom {
    fn min(&self) -> i64 {
        self.lo + self.mask.trailing_zeros() as i64
    }

    fn max(&self) -> i64 {
        self.lo + 63 - self.mask.leading_zeros() as i64
    }

    fn single(&self) -> Option<i64> {
        (self.mask.count_ones() == 1).then(|| self.min())
    }

    fn values(&self) -> impl Iterator<Item = i64> + '_ {
        (0..64).filter(|b| self.mask >> b & 1 == 1).map(|b| self.lo + b)
    }

    fn only(&self, v: i64) -> Dom {
        Dom { lo: self.lo, mask: 1 << (v - self.lo) }
    }

    fn without(&self, v: i64) -> Dom {
        Dom { lo: self.lo, mask: self.mask & !(1 << (v - self.lo)) }
    }
}

fn interval(t: &GTerm, doms: &[Dom]) -> (i64, i64) {
    match t {
        GTerm::Const(c) => (*c, *c),
        GTerm::Cell(i) => (doms[*i].min(), doms[*i].max()),
        GTerm::Add(ts) => ts.iter().fold((0, 0), |(a, b), x| {
            let (l, h) = interval(x, doms);
            (a + l, b + h)
        }),
        GTerm::Mul(ts) => ts.iter().fold((1, 1), |(a, b), x| {
            let (l, h) = interval(x, doms);
            let c = [a * l, a * h, b * l, b * h];
            (*c.iter().min().unwrap_or(&0), *c.iter().max().unwrap_or(&0))
        }),
        GTerm::Sub(a, b) => {
            let ((al, ah), (bl, bh)) = (interval(a, doms), interval(b, doms));
            (al - bh, ah - bl)
        }
        GTerm::Cmp(op, a, b) => {
            let ((al, ah), (bl, bh)) = (interval(a, doms), interval(b, doms));
            let (yes, no) = match op {
                CmpOp::Eq => (al == ah && bl == bh && al == bl, ah < bl || bh < al),
                CmpOp::Ne => (ah < bl || bh < al, al == ah && bl == bh && al == bl),
                CmpOp::Lt => (ah < bl, al >= bh),
                CmpOp::Le => (ah <= bl, al > bh),
                CmpOp::Gt => (al > bh, ah <= bl),
                CmpOp::Ge => (al >= bh, ah < bl),
            };
            if yes {
                (1, 1)
            } else if no {
                (0, 0)
            } else {
                (0, 1)
            }
        }
    }
}

/// `Some(true)` when surely nonzero, `Some(false)` when surely zero.
fn truth(t: &GTerm, doms: &[Dom]) -> Option<bool> {
    let (l, h) = interval(t, doms);
    if l > 0 || h < 0 {
        Some(true)
    } else if l == 0 && h == 0 {
        Some(false)
    } else {
        None
    }
}

fn violated(c: &GroundConstraint, doms: &[Dom]) -> bool {
    let (l, r) = (truth(&c.lhs, doms), truth(&c.rhs, doms));
    match c.kind {
        ConstraintKind::Implies => l == Some(true) && r == Some(false),
        ConstraintKind::Iff => matches!((l, r), (Some(a), Some(b)) if a != b),
    }
}

pub(super) struct Search<'a> {
    g: &'a GroundModel,
    extra: Vec<GroundConstraint>,
    watch: Vec<Vec<usize>>,
    doms: Vec<Dom>,
    trail: Vec<(usize, Dom)>,
    limits: Limits,
    started: Instant,
    pub nodes: u64,
    best: Option<i64>,
    optimize: Option<Sense>,
}

impl<'a> Search<'a> {
    pub fn new(g: &'a GroundModel, limits: Limits, extra: Vec<GroundConstraint>) -> Result<Search<'a>, SolveError> {
        let mut doms = Vec::with_capacity(g.cells.len());
        for c in &g.cells {
            let width = c.hi - c.lo + 1;
            if !(1..=63).contains(&width) {
                return Err(SolveError::EmptyRange(format!("{} has {width} values", c.array)));
            }
            doms.push(Dom { lo: c.lo, mask: (1u64 << width) - 1 });
        }
        let mut watch = vec![Vec::new(); g.cells.len()];
        for (k, c) in g.constraints.iter().chain(&extra).enumerate() {
            for &cell in &c.cells {
                watch[cell].push(k);
            }
        }
        Ok(Search {
            g,
            extra,
            watch,
            doms,
            trail: Vec::new(),
            limits,
            started: Instant::now(),
            nodes: 0,
            best: None,
            optimize: None,
        })
    }

    fn constraint(&self, k: usize) -> &GroundConstraint {
        let n = self.g.constraints.len();
        if k < n {
            &self.g.constraints[k]
        } else {
            &self.extra[k - n]
        }
    }

    fn set(&mut self, cell: usize, d: Dom) {
        self.trail.push((cell, self.doms[cell]));
        self.doms[cell] = d;
    }

    fn undo(&mut self, mark: usize) {
        while self.trail.len() > mark {
            if let Some((c, d)) = self.trail.pop() {
                self.doms[c] = d;
            }
        }
    }

    /// Forward checking from the cells in `queue`: a violated constraint
    /// fails; one whose cells are all fixed but one prunes that cell.
    fn propagate(&mut self, mut queue: Vec<usize>) -> bool {
        while let Some(cell) = queue.pop() {
            for wi in 0..self.watch[cell].len() {
                let k = self.watch[cell][wi];
                if violated(self.constraint(k), &self.doms) {
                    return false;
                }
                let open: Vec<usize> =
                    self.constraint(k).cells.iter().copied().filter(|&c| self.doms[c].single().is_none()).collect();
                if open.len() != 1 {
                    continue;
                }
                let u = open[0];
                let before = self.doms[u];
                let mut d = before;
                for v in before.values().collect::<Vec<_>>() {
                    self.doms[u] = before.only(v);
                    if violated(self.constraint(k), &self.doms) {
                        d = d.without(v);
                    }
                }
                self.doms[u] = before;
                if d.mask == 0 {
                    return false;
                }
                if d.mask != before.mask {
                    self.set(u, d);
                    queue.push(u);
                }
            }
        }
        true
    }

    fn check_limits(&mut self) -> Result<(), SolveError> {
        self.nodes += 1;
        if self.nodes > self.limits.node_limit {
            return Err(SolveError::ResourceLimit(format!("node limit {} reached", self.limits.node_limit)));
        }
        if let Some(t) = self.limits.time_limit {
            if self.nodes.is_multiple_of(1024) && self.started.elapsed() > t {
                return Err(SolveError::ResourceLimit(format!("time limit {t:?} reached")));
            }
        }
        Ok(())
    }

    fn bound_ok(&self) -> bool {
        let (Some(sense), Some(best), Some((_, obj))) = (self.optimize, self.best, &self.g.objective) else {
            return true;
        };
        let (lo, hi) = interval(obj, &self.doms);
        match sense {
            Sense::Minimize => lo < best,
            Sense::Maximize => hi > best,
        }
    }

    fn dfs(
        &mut self,
        from: usize,
        f: &mut dyn FnMut(&Solution) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>, SolveError> {
        self.check_limits()?;
        if !self.bound_ok() {
            return Ok(ControlFlow::Continue(()));
        }
        let next = (from..self.doms.len()).find(|&i| self.doms[i].single().is_none());
        let Some(cell) = next else {
            let values: Vec<i64> = self.doms.iter().map(|d| d.min()).collect();
            if !self.g.check(&values) || !self.extra.iter().all(|c| c.holds(&values)) {
                return Ok(ControlFlow::Continue(()));
            }
            let objective = self.g.objective_value(&values);
            if self.optimize.is_some() {
                self.best = objective;
            }
            return Ok(f(&Solution { values, objective }));
        };
        let d = self.doms[cell];
        for v in d.values().collect::<Vec<_>>() {
            let mark = self.trail.len();
            self.set(cell, d.only(v));
            if self.propagate(vec![cell]) {
                if let ControlFlow::Break(()) = self.dfs(cell + 1, f)? {
                    self.undo(mark);
                    return Ok(ControlFlow::Break(()));
                }
            }
            self.undo(mark);
        }
        Ok(ControlFlow::Continue(()))
    }

    fn start(&mut self) -> bool {
        if self.g.unsat {
            return false;
        }
        // Constraints over a single cell prune before the search starts.
        let all: Vec<usize> = (0..self.doms.len()).collect();
        self.propagate(all)
    }

    pub fn each(&mut self, f: &mut dyn FnMut(&Solution) -> ControlFlow<()>) -> Result<(), SolveError> {
        if self.start() {
            let _ = self.dfs(0, f)?;
        }
        Ok(())
    }

    /// Branch and bound; each improving solution tightens the bound.
    pub fn best(&mut self, sense: Sense) -> Result<Option<Solution>, SolveError> {
        self.optimize = Some(sense);
        let mut incumbent = None;
        if self.start() {
            let _ = self.dfs(0, &mut |s| {
                incumbent = Some(s.clone());
                ControlFlow::Continue(())
            })?;
        }
        Ok(incumbent)
    }
}
