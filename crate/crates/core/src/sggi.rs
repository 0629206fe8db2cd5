//! Verdicts on a group with distinguished generators: the sggi property,
//! the orders of consecutive products, the intersection condition and
//! orientability.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::group::{ElementSet, Group};
use crate::todd_coxeter::PermRep;
use crate::words::Word;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientability {
    Orientable,
    NonOrientable,
}

/// Which maximal parabolic subgroup the quotient criterion inspects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuotientSide {
    /// `⟨x_0, …, x_{n-2}⟩`
    Facet,
    /// `⟨x_1, …, x_{n-1}⟩`
    VertexFigure,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SggiCheck {
    pub is_sggi: bool,
    /// Generators that act as the identity.
    pub degenerate: Vec<usize>,
}

/// A failing pair `(I, J)` with `Γ_I ∩ Γ_J ≠ Γ_{I∩J}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntersectionWitness {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
}

impl fmt::Display for IntersectionWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: &[usize]| {
            let parts: Vec<String> = s.iter().map(|x| x.to_string()).collect();
            format!("{{{}}}", parts.join(","))
        };
        write!(f, "I={}, J={}", show(&self.i), show(&self.j))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SggiProfile {
    pub rank: usize,
    pub group_order: u64,
    pub is_sggi: bool,
    pub degenerate: Vec<usize>,
    /// Orders of `x_{i-1} x_i` for `i = 1..n-1`.
    pub schlafli: Vec<u32>,
    pub is_string_c_group: bool,
    pub witness: Option<IntersectionWitness>,
    pub orientability: Orientability,
}

impl SggiProfile {
    pub fn orientable(&self) -> bool {
        self.orientability == Orientability::Orientable
    }
}

pub fn check_sggi(rep: &PermRep) -> SggiCheck {
    let n = rep.ngens();
    let involutions = rep.gens.iter().all(|g| g.then(g).is_identity());
    let commuting = (0..n).all(|i| (i + 2..n).all(|j| rep.satisfies(&Word::new([i, j]).pow(2))));
    let degenerate = (0..n).filter(|&i| rep.gens[i].is_identity()).collect();
    SggiCheck {
        is_sggi: involutions && commuting,
        degenerate,
    }
}

/// Orders of the consecutive products `x_{i-1} x_i`.
pub fn schlafli_of_group(rep: &PermRep) -> Vec<u32> {
    (1..rep.ngens())
        .map(|i| rep.element_order(&Word::new([i - 1, i])) as u32)
        .collect()
}

/// All subsets of `0..n`, shortest first and lexicographic within a size.
fn subsets_shortlex(n: usize) -> Vec<BTreeSet<usize>> {
    let mut all: Vec<BTreeSet<usize>> = (0u32..1 << n)
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
        .collect();
    all.sort_by(|a, b| {
        a.len()
            .cmp(&b.len())
            .then_with(|| a.iter().cmp(b.iter()))
    });
    all
}

/// Brute-force intersection condition over every pair of generator subsets.
/// The witness is the first failing `(I, J)` with subsets in shortlex order.
pub fn check_intersection_condition(group: &Group) -> Result<(), IntersectionWitness> {
    let n = group.ngens();
    let subsets = subsets_shortlex(n);
    let closures: Vec<ElementSet> = subsets.iter().map(|s| group.closure(s)).collect();
    let position = |s: &BTreeSet<usize>| subsets.iter().position(|t| t == s).unwrap();
    for (a, i) in subsets.iter().enumerate() {
        for (b, j) in subsets.iter().enumerate() {
            let meet: BTreeSet<usize> = i.intersection(j).copied().collect();
            let lhs = closures[a].intersection(&closures[b]);
            if lhs != closures[position(&meet)] {
                return Err(IntersectionWitness {
                    i: i.iter().copied().collect(),
                    j: j.iter().copied().collect(),
                });
            }
        }
    }
    Ok(())
}

/// Prop-2.1-style criterion: when `quotient` is a string C-group image of
/// `group` under `x_i ↦ y_i`, equal orders of the chosen maximal parabolic
/// on both sides certify that the map is one-to-one there.
pub fn quotient_criterion(group: &Group, quotient: &Group, side: QuotientSide) -> bool {
    let n = group.ngens();
    if n != quotient.ngens() || n == 0 {
        return false;
    }
    let gens: BTreeSet<usize> = match side {
        QuotientSide::Facet => (0..n - 1).collect(),
        QuotientSide::VertexFigure => (1..n).collect(),
    };
    group.closure(&gens).len() == quotient.closure(&gens).len()
}

/// Even-word subgroup `⟨x_i x_j⟩`.
pub fn rotation_subgroup(group: &Group) -> ElementSet {
    let n = group.ngens();
    let words: Vec<Word> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| Word::new([i, j])))
        .collect();
    group.closure_words(&words)
}

pub fn orientability(group: &Group) -> Orientability {
    if rotation_subgroup(group).len() * 2 == group.order() {
        Orientability::Orientable
    } else {
        Orientability::NonOrientable
    }
}

pub fn profile(group: &Group) -> SggiProfile {
    let rep = group.rep();
    let sggi = check_sggi(rep);
    let witness = check_intersection_condition(group).err();
    SggiProfile {
        rank: rep.ngens(),
        group_order: group.order() as u64,
        is_sggi: sggi.is_sggi,
        degenerate: sggi.degenerate,
        schlafli: schlafli_of_group(rep),
        is_string_c_group: sggi.is_sggi && witness.is_none(),
        witness,
        orientability: orientability(group),
    }
}
