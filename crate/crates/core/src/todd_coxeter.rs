//! Coset enumeration for presentations on involutory generators.
//!
//! The strategy is relator-based (HLT): cosets are processed in order, every
//! relator is traced from the current coset and completed by defining new
//! cosets, and any coincidence is propagated to a fixpoint before the next
//! definition is made. Because every generator is an involution, a single
//! column per generator suffices and each defined entry `c·x = d` is always
//! stored together with `d·x = c`.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{eval_word, Perm};
use crate::words::{Presentation, Word};

pub const DEFAULT_MAX_COSETS: usize = 100_000;
pub const MAX_COSETS_ENV: &str = "TIGHTPOLY_MAX_COSETS";

const UNDEF: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("coset enumeration did not close within {budget} cosets")]
    BudgetExceeded { budget: usize },
    #[error("subgroup generator {0} is out of range")]
    BadSubgroupGenerator(usize),
    #[error("relator {relator} does not act trivially at point {point}")]
    RelatorViolation { relator: Word, point: usize },
}

static BUDGET_OVERRIDE: AtomicUsize = AtomicUsize::new(0);

/// Replaces the default budget for the rest of the process (`0` restores it).
pub fn set_default_budget(budget: usize) {
    BUDGET_OVERRIDE.store(budget, Ordering::Relaxed);
}

/// The coset budget: an explicit override if one was set, otherwise the
/// default raised by `TIGHTPOLY_MAX_COSETS` when that is set.
pub fn default_budget() -> usize {
    match BUDGET_OVERRIDE.load(Ordering::Relaxed) {
        0 => {}
        b => return b,
    }
    std::env::var(MAX_COSETS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&b: &usize| b > 0)
        .map_or(DEFAULT_MAX_COSETS, |b| b.max(DEFAULT_MAX_COSETS))
}

/// A closed coset table. Coset 0 is the subgroup itself and the numbering is
/// in standard form (order of first appearance in a row-major scan).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CosetTable {
    ngens: usize,
    rows: usize,
    action: Vec<u32>,
    subgroup_gens: Vec<usize>,
}

impl CosetTable {
    /// Wraps a complete table. The caller guarantees every column is an involution.
    pub(crate) fn from_action(ngens: usize, action: Vec<u32>, subgroup_gens: Vec<usize>) -> Self {
        let rows = action.len() / ngens.max(1);
        CosetTable {
            ngens,
            rows,
            action,
            subgroup_gens,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    pub fn subgroup_gens(&self) -> &[usize] {
        &self.subgroup_gens
    }

    #[inline]
    pub fn get(&self, coset: usize, gen: usize) -> usize {
        self.action[coset * self.ngens + gen] as usize
    }

    pub fn raw(&self) -> &[u32] {
        &self.action
    }

    /// Follows `w` from `coset`.
    pub fn trace(&self, mut coset: usize, w: &Word) -> usize {
        for &l in w.letters() {
            coset = self.get(coset, l);
        }
        coset
    }

    /// One line per coset: `c g0→d g1→e …`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in 0..self.rows {
            let _ = write!(out, "{c}");
            for g in 0..self.ngens {
                let _ = write!(out, " g{g}→{}", self.get(c, g));
            }
            out.push('\n');
        }
        out
    }
}

/// Faithful-or-not permutation images of the generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermRep {
    pub degree: usize,
    pub gens: Vec<Perm>,
}

impl PermRep {
    pub fn new(degree: usize, gens: Vec<Perm>) -> Self {
        debug_assert!(gens.iter().all(|g| g.degree() == degree));
        PermRep { degree, gens }
    }

    pub fn ngens(&self) -> usize {
        self.gens.len()
    }

    pub fn eval(&self, w: &Word) -> Perm {
        eval_word(&self.gens, self.degree, w)
    }

    pub fn element_order(&self, w: &Word) -> u64 {
        self.eval(w).order()
    }

    pub fn satisfies(&self, w: &Word) -> bool {
        self.eval(w).is_identity()
    }

    /// First relator that fails, if any.
    pub fn check_relators(&self, pres: &Presentation) -> Result<(), EnumerationError> {
        for r in &pres.relators {
            let p = self.eval(r);
            if let Some(point) = (0..self.degree).find(|&i| p.apply(i) != i) {
                return Err(EnumerationError::RelatorViolation {
                    relator: r.clone(),
                    point,
                });
            }
        }
        Ok(())
    }
}

struct Enumerator<'a> {
    ngens: usize,
    relators: &'a [Word],
    table: Vec<u32>,
    parent: Vec<u32>,
    budget: usize,
    queue: Vec<u32>,
}

impl<'a> Enumerator<'a> {
    fn new(pres: &'a Presentation, budget: usize) -> Self {
        let mut e = Enumerator {
            ngens: pres.ngens,
            relators: &pres.relators,
            table: Vec::new(),
            parent: Vec::new(),
            budget,
            queue: Vec::new(),
        };
        e.push_row();
        e
    }

    fn len(&self) -> usize {
        self.parent.len()
    }

    fn push_row(&mut self) -> u32 {
        let c = self.parent.len() as u32;
        self.parent.push(c);
        self.table.extend(std::iter::repeat_n(UNDEF, self.ngens));
        c
    }

    #[inline]
    fn get(&self, c: u32, g: usize) -> u32 {
        self.table[c as usize * self.ngens + g]
    }

    #[inline]
    fn set(&mut self, c: u32, g: usize, d: u32) {
        self.table[c as usize * self.ngens + g] = d;
    }

    #[inline]
    fn link(&mut self, c: u32, g: usize, d: u32) {
        self.set(c, g, d);
        self.set(d, g, c);
    }

    fn is_live(&self, c: u32) -> bool {
        self.parent[c as usize] == c
    }

    fn rep(&mut self, c: u32) -> u32 {
        let mut root = c;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut x = c;
        while self.parent[x as usize] != root {
            let next = self.parent[x as usize];
            self.parent[x as usize] = root;
            x = next;
        }
        root
    }

    fn define(&mut self, c: u32, g: usize) -> Result<u32, EnumerationError> {
        if self.len() >= self.budget {
            return Err(EnumerationError::BudgetExceeded {
                budget: self.budget,
            });
        }
        let d = self.push_row();
        self.link(c, g, d);
        Ok(d)
    }

    fn merge(&mut self, a: u32, b: u32) {
        let (a, b) = (self.rep(a), self.rep(b));
        if a == b {
            return;
        }
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.parent[hi as usize] = lo;
        self.queue.push(hi);
    }

    /// Identifies `a` and `b` and every consequence of doing so.
    fn coincidence(&mut self, a: u32, b: u32) {
        self.queue.clear();
        self.merge(a, b);
        let mut i = 0;
        while i < self.queue.len() {
            let e = self.queue[i];
            i += 1;
            for g in 0..self.ngens {
                let f = self.get(e, g);
                if f == UNDEF {
                    continue;
                }
                self.set(f, g, UNDEF);
                self.set(e, g, UNDEF);
                let e1 = self.rep(e);
                let f1 = self.rep(f);
                let x = self.get(e1, g);
                if x != UNDEF {
                    self.merge(f1, x);
                    continue;
                }
                let y = self.get(f1, g);
                if y != UNDEF {
                    self.merge(e1, y);
                } else {
                    self.link(e1, g, f1);
                }
            }
        }
    }

    /// Traces `w` from `c`, defining cosets until the trace closes.
    fn scan_and_fill(&mut self, c: u32, w: &[usize]) -> Result<(), EnumerationError> {
        let len = w.len();
        if len == 0 {
            return Ok(());
        }
        loop {
            let mut f = c;
            let mut i = 0;
            while i < len {
                let next = self.get(f, w[i]);
                if next == UNDEF {
                    break;
                }
                f = next;
                i += 1;
            }
            if i == len {
                if f != c {
                    self.coincidence(f, c);
                }
                return Ok(());
            }
            let mut b = c;
            let mut j = len;
            while j > i {
                let next = self.get(b, w[j - 1]);
                if next == UNDEF {
                    break;
                }
                b = next;
                j -= 1;
            }
            if j == i {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i + 1 {
                self.link(f, w[i], b);
                return Ok(());
            }
            self.define(f, w[i])?;
        }
    }

    fn run(&mut self, subgroup_gens: &[usize]) -> Result<(), EnumerationError> {
        for &g in subgroup_gens {
            let cur = self.get(0, g);
            if cur == UNDEF {
                self.link(0, g, 0);
            } else if self.rep(cur) != 0 {
                self.coincidence(cur, 0);
            }
        }
        let mut c: u32 = 0;
        while (c as usize) < self.len() {
            for r in 0..self.relators.len() {
                if !self.is_live(c) {
                    break;
                }
                let w = self.relators[r].letters();
                self.scan_and_fill(c, w)?;
            }
            for g in 0..self.ngens {
                if !self.is_live(c) {
                    break;
                }
                if self.get(c, g) == UNDEF {
                    self.define(c, g)?;
                }
            }
            c += 1;
        }
        Ok(())
    }

    /// Renumbers the live cosets into standard form starting at 0.
    fn standardize(&mut self, subgroup_gens: &[usize]) -> CosetTable {
        let n = self.ngens;
        let mut order: Vec<u32> = vec![0];
        let mut new_index = vec![UNDEF; self.len()];
        new_index[0] = 0;
        let mut k = 0;
        while k < order.len() {
            let c = order[k];
            for g in 0..n {
                let d = self.rep(self.get(c, g));
                if new_index[d as usize] == UNDEF {
                    new_index[d as usize] = order.len() as u32;
                    order.push(d);
                }
            }
            k += 1;
        }
        let mut action = Vec::with_capacity(order.len() * n);
        for &c in &order {
            for g in 0..n {
                let d = self.rep(self.get(c, g));
                action.push(new_index[d as usize]);
            }
        }
        CosetTable::from_action(n, action, subgroup_gens.to_vec())
    }
}

/// Enumerates the cosets of `⟨x_i : i ∈ subgroup_gens⟩` in the group defined by `pres`.
pub fn enumerate(
    pres: &Presentation,
    subgroup_gens: &BTreeSet<usize>,
    max_cosets: usize,
) -> Result<CosetTable, EnumerationError> {
    if let Some(&g) = subgroup_gens.iter().find(|&&g| g >= pres.ngens) {
        return Err(EnumerationError::BadSubgroupGenerator(g));
    }
    let gens: Vec<usize> = subgroup_gens.iter().copied().collect();
    let mut e = Enumerator::new(pres, max_cosets.max(1));
    e.run(&gens)?;
    let table = e.standardize(&gens);
    debug_assert!(verify_closed(&table, pres));
    Ok(table)
}

/// Full re-scan: every column is an involution, every relator closes from
/// every coset and the subgroup generators fix coset 0.
pub fn verify_closed(table: &CosetTable, pres: &Presentation) -> bool {
    let columns_ok = (0..table.rows()).all(|c| {
        (0..table.ngens()).all(|g| {
            let d = table.get(c, g);
            d < table.rows() && table.get(d, g) == c
        })
    });
    columns_ok
        && (0..table.rows()).all(|c| pres.relators.iter().all(|r| table.trace(c, r) == c))
        && table.subgroup_gens().iter().all(|&g| table.get(0, g) == 0)
}

/// Permutation images of the generators on the cosets; every relator is checked.
pub fn perm_rep(table: &CosetTable, pres: &Presentation) -> Result<PermRep, EnumerationError> {
    let rep = table_perm_rep(table);
    rep.check_relators(pres)?;
    Ok(rep)
}

/// Permutation images read straight off a closed table, without a relator check.
pub fn table_perm_rep(table: &CosetTable) -> PermRep {
    let gens = (0..table.ngens())
        .map(|g| {
            Perm::from_fn(table.rows(), |c| table.get(c, g))
                .expect("closed coset table columns are permutations")
        })
        .collect();
    PermRep::new(table.rows(), gens)
}

/// Enumerates over the trivial subgroup and returns the regular representation.
pub fn regular_rep(pres: &Presentation, budget: usize) -> Result<PermRep, EnumerationError> {
    let table = enumerate(pres, &BTreeSet::new(), budget)?;
    perm_rep(&table, pres)
}

pub fn group_order(pres: &Presentation, budget: usize) -> Result<u64, EnumerationError> {
    Ok(enumerate(pres, &BTreeSet::new(), budget)?.rows() as u64)
}
