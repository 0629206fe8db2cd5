//! Permutations on `0..degree`, acting on the right: `x^(ab) = (x^a)^b`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::words::Word;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Perm(Vec<u32>);

impl Perm {
    pub fn identity(degree: usize) -> Self {
        Perm((0..degree as u32).collect())
    }

    /// Builds a permutation from its image array, or `None` if `images` is not a bijection.
    pub fn from_images(images: Vec<u32>) -> Option<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            let slot = seen.get_mut(i as usize)?;
            if *slot {
                return None;
            }
            *slot = true;
        }
        Some(Perm(images))
    }

    pub fn from_fn(degree: usize, f: impl Fn(usize) -> usize) -> Option<Self> {
        Self::from_images((0..degree).map(|i| f(i) as u32).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.0
    }

    #[inline]
    pub fn apply(&self, point: usize) -> usize {
        self.0[point] as usize
    }

    /// `self` followed by `other`.
    pub fn then(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.degree(), other.degree());
        Perm(self.0.iter().map(|&i| other.0[i as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn pow(&self, e: u64) -> Perm {
        let mut result = Perm::identity(self.degree());
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.then(&base);
            }
            base = base.then(&base);
            e >>= 1;
        }
        result
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i as u32 == j)
    }

    /// Multiplicative order: the lcm of the cycle lengths.
    pub fn order(&self) -> u64 {
        let mut seen = vec![false; self.0.len()];
        let mut order = 1u64;
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut len = 0u64;
            let mut x = start;
            while !seen[x] {
                seen[x] = true;
                x = self.0[x] as usize;
                len += 1;
            }
            order = lcm(order, len);
        }
        order
    }

    pub fn commutes_with(&self, other: &Perm) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .all(|(&a, &b)| other.0[a as usize] == self.0[b as usize])
    }

    /// `self^-1 · other^-1 · self · other`.
    pub fn commutator(&self, other: &Perm) -> Perm {
        self.inverse()
            .then(&other.inverse())
            .then(self)
            .then(other)
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm{:?}", self.0)
    }
}

pub fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// Evaluates a word letter by letter on a list of generator permutations.
pub fn eval_word(gens: &[Perm], degree: usize, w: &Word) -> Perm {
    let mut p = Perm::identity(degree);
    for &l in w.letters() {
        p = p.then(&gens[l]);
    }
    p
}

/// Image of a single point under a word, without materialising the permutation.
pub fn trace_point(gens: &[Perm], mut point: usize, w: &Word) -> usize {
    for &l in w.letters() {
        point = gens[l].apply(point);
    }
    point
}
