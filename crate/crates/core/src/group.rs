//! Finite group computations on a permutation representation: element
//! enumeration, subgroup closure, element orders, conjugation and
//! generator-map checks.

use std::collections::{BTreeSet, HashMap, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::Perm;
use crate::todd_coxeter::PermRep;
use crate::words::{Presentation, Word};

pub const DEFAULT_ELEMENT_CAP: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GroupError {
    #[error("group has more than {cap} elements")]
    CapExceeded { cap: usize },
}

/// All elements of the group generated by a `PermRep`, in breadth-first
/// order from the identity, with the right-multiplication table by each
/// generator.
#[derive(Clone, Debug)]
pub struct Group {
    rep: PermRep,
    elements: Vec<Perm>,
    index: HashMap<Perm, u32>,
    right: Vec<u32>,
}

/// A subgroup as a sorted set of element indices of its ambient [`Group`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ElementSet(Vec<u32>);

impl ElementSet {
    pub fn from_indices(mut v: Vec<u32>) -> Self {
        v.sort_unstable();
        v.dedup();
        ElementSet(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, e: u32) -> bool {
        self.0.binary_search(&e).is_ok()
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn intersection(&self, other: &ElementSet) -> ElementSet {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(self.0[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        ElementSet(out)
    }

    pub fn is_subset(&self, other: &ElementSet) -> bool {
        self.0.iter().all(|&e| other.contains(e))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conjugation {
    Fixes,
    Inverts,
    Neither,
}

/// Outcome of substituting words for the generators of a presentation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorMapReport {
    /// Every source relator maps to the identity.
    pub homomorphism: bool,
    /// Relators that fail, by index.
    pub failing_relators: Vec<usize>,
    /// Order of the subgroup generated by the images.
    pub image_order: usize,
    pub surjective: bool,
}

impl Group {
    pub fn new(rep: &PermRep, cap: usize) -> Result<Self, GroupError> {
        let degree = rep.degree;
        let id = Perm::identity(degree);
        let mut elements = vec![id.clone()];
        let mut index = HashMap::new();
        index.insert(id, 0u32);
        let ngens = rep.ngens();
        let mut right = Vec::new();
        let mut k = 0;
        while k < elements.len() {
            for g in 0..ngens {
                let prod = elements[k].then(&rep.gens[g]);
                let idx = match index.get(&prod) {
                    Some(&i) => i,
                    None => {
                        if elements.len() >= cap {
                            return Err(GroupError::CapExceeded { cap });
                        }
                        let i = elements.len() as u32;
                        index.insert(prod.clone(), i);
                        elements.push(prod);
                        i
                    }
                };
                right.push(idx);
            }
            k += 1;
        }
        Ok(Group {
            rep: rep.clone(),
            elements,
            index,
            right,
        })
    }

    pub fn rep(&self) -> &PermRep {
        &self.rep
    }

    pub fn ngens(&self) -> usize {
        self.rep.ngens()
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, e: u32) -> &Perm {
        &self.elements[e as usize]
    }

    pub fn index_of(&self, p: &Perm) -> Option<u32> {
        self.index.get(p).copied()
    }

    /// `e · x_g`.
    #[inline]
    pub fn mul_gen(&self, e: u32, g: usize) -> u32 {
        self.right[e as usize * self.ngens() + g]
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        let p = self.element(a).then(self.element(b));
        self.index[&p]
    }

    pub fn inverse(&self, a: u32) -> u32 {
        self.index[&self.element(a).inverse()]
    }

    /// `e · w`.
    pub fn mul_word(&self, mut e: u32, w: &Word) -> u32 {
        for &l in w.letters() {
            e = self.mul_gen(e, l);
        }
        e
    }

    pub fn word_element(&self, w: &Word) -> u32 {
        self.mul_word(0, w)
    }

    pub fn all(&self) -> ElementSet {
        ElementSet((0..self.order() as u32).collect())
    }

    /// `Γ_I = ⟨x_i : i ∈ I⟩` by breadth-first closure from the identity.
    pub fn closure(&self, gens: &BTreeSet<usize>) -> ElementSet {
        let gens: Vec<usize> = gens.iter().copied().collect();
        self.bfs(|e, out| {
            for &g in &gens {
                out.push(self.mul_gen(e, g));
            }
        })
    }

    /// Subgroup generated by arbitrary words.
    pub fn closure_words(&self, words: &[Word]) -> ElementSet {
        self.bfs(|e, out| {
            for w in words {
                out.push(self.mul_word(e, w));
            }
        })
    }

    /// Subgroup generated by arbitrary elements.
    pub fn closure_elements(&self, gens: &[u32]) -> ElementSet {
        self.bfs(|e, out| {
            for &g in gens {
                out.push(self.mul(e, g));
            }
        })
    }

    /// Connected component of `start` under right multiplication by the given
    /// generators: the left coset `start · Γ_I`.
    pub fn left_coset(&self, start: u32, gens: &[usize], seen: &mut [bool]) -> Vec<u32> {
        let mut out = vec![start];
        seen[start as usize] = true;
        let mut k = 0;
        while k < out.len() {
            let e = out[k];
            for &g in gens {
                let f = self.mul_gen(e, g);
                if !seen[f as usize] {
                    seen[f as usize] = true;
                    out.push(f);
                }
            }
            k += 1;
        }
        out
    }

    fn bfs(&self, mut step: impl FnMut(u32, &mut Vec<u32>)) -> ElementSet {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut queue = VecDeque::from([0u32]);
        let mut found = vec![0u32];
        let mut buf = Vec::new();
        while let Some(e) = queue.pop_front() {
            buf.clear();
            step(e, &mut buf);
            for &f in &buf {
                if !seen[f as usize] {
                    seen[f as usize] = true;
                    found.push(f);
                    queue.push_back(f);
                }
            }
        }
        ElementSet::from_indices(found)
    }

    pub fn element_order(&self, w: &Word) -> u64 {
        let ord = self.rep.element_order(w);
        debug_assert_eq!(self.order() as u64 % ord, 0, "Lagrange");
        ord
    }

    /// Classifies `g w g⁻¹` against `w` and `w⁻¹`.
    pub fn conjugation_class(&self, g: &Word, w: &Word) -> Conjugation {
        let gp = self.rep.eval(g);
        let wp = self.rep.eval(w);
        let conj = gp.then(&wp).then(&gp.inverse());
        if conj == wp {
            Conjugation::Fixes
        } else if conj == wp.inverse() {
            Conjugation::Inverts
        } else {
            Conjugation::Neither
        }
    }

    pub fn is_central_in(&self, w: &Word, subgroup: &ElementSet) -> bool {
        let wp = self.rep.eval(w);
        subgroup
            .indices()
            .iter()
            .all(|&e| self.element(e).commutes_with(&wp))
    }

    pub fn is_normal(&self, subgroup: &ElementSet) -> bool {
        (0..self.ngens()).all(|g| {
            subgroup.indices().iter().all(|&e| {
                let x = self.mul_gen(0, g);
                subgroup.contains(self.mul(self.mul(self.inverse(x), e), x))
            })
        })
    }

    /// Substitutes `images[i]` (words in this group's generators) for
    /// generator `i` of `src` and evaluates every relator. Relators are
    /// evaluated literally, so `src` may use non-involutory generators
    /// written as positive words.
    pub fn check_generator_map(&self, src: &Presentation, images: &[Word]) -> GeneratorMapReport {
        assert_eq!(images.len(), src.ngens, "one image per source generator");
        let image_elems: Vec<u32> = images.iter().map(|w| self.word_element(w)).collect();
        let failing_relators: Vec<usize> = src
            .relators
            .iter()
            .enumerate()
            .filter(|(_, r)| {
                r.letters()
                    .iter()
                    .fold(0u32, |e, &l| self.mul(e, image_elems[l]))
                    != 0
            })
            .map(|(i, _)| i)
            .collect();
        let image_order = self.closure_words(images).len();
        GeneratorMapReport {
            homomorphism: failing_relators.is_empty(),
            failing_relators,
            image_order,
            surjective: image_order == self.order(),
        }
    }

    /// Normal closure of a set of elements.
    pub fn normal_closure(&self, elems: &[u32]) -> ElementSet {
        let mut gens: BTreeSet<u32> = BTreeSet::new();
        for &e in elems {
            for h in 0..self.order() as u32 {
                gens.insert(self.mul(self.mul(self.inverse(h), e), h));
            }
        }
        let gens: Vec<u32> = gens.into_iter().collect();
        self.closure_elements(&gens)
    }

    /// Every normal subgroup, as joins of normal closures of single
    /// elements. Quadratic in the group order; intended for small groups.
    pub fn normal_subgroups(&self) -> Vec<ElementSet> {
        let mut minimal: BTreeSet<ElementSet> = BTreeSet::new();
        for e in 0..self.order() as u32 {
            minimal.insert(self.normal_closure(&[e]));
        }
        let mut all: BTreeSet<ElementSet> = minimal.clone();
        let mut frontier: Vec<ElementSet> = all.iter().cloned().collect();
        while let Some(n) = frontier.pop() {
            for m in &minimal {
                if m.is_subset(&n) {
                    continue;
                }
                let mut gens = n.indices().to_vec();
                gens.extend_from_slice(m.indices());
                let join = self.closure_elements(&gens);
                if all.insert(join.clone()) {
                    frontier.push(join);
                }
            }
        }
        all.into_iter().collect()
    }
}

/// True iff `x_i ↦ y_i` on standard generators extends to an isomorphism.
pub fn standard_isomorphic(a: &Group, b: &Group) -> bool {
    if a.order() != b.order() || a.ngens() != b.ngens() {
        return false;
    }
    // Walk both Cayley graphs in lockstep from the identity.
    let mut map = vec![u32::MAX; a.order()];
    let mut used = vec![false; b.order()];
    map[0] = 0;
    used[0] = true;
    let mut queue = VecDeque::from([0u32]);
    while let Some(e) = queue.pop_front() {
        let f = map[e as usize];
        for g in 0..a.ngens() {
            let (e2, f2) = (a.mul_gen(e, g), b.mul_gen(f, g));
            match map[e2 as usize] {
                u32::MAX => {
                    if used[f2 as usize] {
                        return false;
                    }
                    used[f2 as usize] = true;
                    map[e2 as usize] = f2;
                    queue.push_back(e2);
                }
                m if m != f2 => return false,
                _ => {}
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::todd_coxeter::{regular_rep, DEFAULT_MAX_COSETS};
    use crate::words::*;

    fn group(p: &Presentation) -> Group {
        Group::new(&regular_rep(p, DEFAULT_MAX_COSETS).unwrap(), DEFAULT_ELEMENT_CAP).unwrap()
    }

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn closures_in_gamma_3_6() {
        let g = group(&gamma_pq_presentation(3, 6).unwrap());
        assert_eq!(g.order(), 36);
        assert_eq!(g.closure(&set(&[0, 1])).len(), 6);
        assert_eq!(g.closure(&set(&[1, 2])).len(), 12);
        assert_eq!(g.closure(&set(&[])).len(), 1);
        assert_eq!(g.closure(&set(&[0, 1, 2])).len(), 36);
    }

    #[test]
    fn element_orders() {
        let g = group(&gamma_pq_presentation(3, 6).unwrap());
        assert_eq!(g.element_order(&Word::new([1, 2])), 6);
        assert_eq!(g.element_order(&Word::new([0, 1])), 3);
        let l = group(&lambda_k_presentation(3).unwrap());
        assert_eq!(l.element_order(&Word::new([0, 1])), 9);
    }

    #[test]
    fn conjugation_of_omega() {
        let g = group(&gamma_pq_presentation(3, 6).unwrap());
        let omega = Word::new([1, 2]).pow(2);
        assert_eq!(g.conjugation_class(&Word::new([1]), &omega), Conjugation::Inverts);
        assert_eq!(g.conjugation_class(&Word::new([0]), &omega), Conjugation::Inverts);
        assert_eq!(g.conjugation_class(&Word::identity(), &omega), Conjugation::Fixes);
    }

    #[test]
    fn centrality_of_omega() {
        let g = group(&gamma_pq_presentation(3, 6).unwrap());
        let omega = Word::new([1, 2]).pow(2);
        let rot = g.closure_words(&[Word::new([0, 1]), Word::new([1, 2])]);
        assert_eq!(rot.len(), 18);
        assert!(g.is_central_in(&omega, &rot));
        assert!(!g.is_central_in(&omega, &g.all()));
        assert!(g.is_central_in(&Word::identity(), &g.all()));
    }

    #[test]
    fn epimorphism_onto_dihedral() {
        // Γ(p,q) → D_q with x0 ↦ (y1 y2)^(p-1) y1, x1 ↦ y1, x2 ↦ y2.
        for (p, q) in [(3, 6), (5, 10), (5, 2), (7, 14)] {
            let d = group(&coxeter_presentation(&SchlafliSymbol::new(vec![q]).unwrap()));
            let x0 = Word::new([0, 1]).pow(p as usize - 1).concat(&Word::new([0]));
            let images = [x0, Word::new([0]), Word::new([1])];
            let r = d.check_generator_map(&gamma_pq_presentation(p, q).unwrap(), &images);
            assert!(r.homomorphism && r.surjective, "({p},{q})");
        }
    }

    #[test]
    fn identity_map_is_homomorphism() {
        let pres = gamma_pq_presentation(3, 6).unwrap();
        let g = group(&pres);
        let images: Vec<Word> = (0..3).map(|i| Word::new([i])).collect();
        let r = g.check_generator_map(&pres, &images);
        assert!(r.homomorphism && r.surjective);
        let bad = [Word::new([0]), Word::new([0]), Word::new([1])];
        assert!(!g.check_generator_map(&pres, &bad).homomorphism);
    }

    #[test]
    fn normal_subgroups_of_s3() {
        let g = group(&coxeter_presentation(&SchlafliSymbol::new(vec![3]).unwrap()));
        let sizes: Vec<usize> = g.normal_subgroups().iter().map(|n| n.len()).collect();
        let mut sizes = sizes;
        sizes.sort();
        assert_eq!(sizes, vec![1, 3, 6]);
        assert!(g.normal_subgroups().iter().all(|n| g.is_normal(n)));
    }

    #[test]
    fn standard_isomorphism() {
        let a = group(&gamma_pq_presentation(4, 4).unwrap());
        let b = group(&gamma_tuple_presentation(&SchlafliSymbol::new(vec![4, 4]).unwrap()).unwrap());
        assert!(standard_isomorphic(&a, &b));
        let c = group(&coxeter_presentation(&SchlafliSymbol::new(vec![4, 2]).unwrap()));
        let d = group(&coxeter_presentation(&SchlafliSymbol::new(vec![2, 4]).unwrap()));
        assert_eq!(c.order(), d.order());
        assert!(!standard_isomorphic(&c, &d));
    }

    #[test]
    fn cap_is_loud() {
        let rep = regular_rep(&gamma_pq_presentation(3, 6).unwrap(), 1000).unwrap();
        assert_eq!(Group::new(&rep, 10).unwrap_err(), GroupError::CapExceeded { cap: 10 });
    }
}
