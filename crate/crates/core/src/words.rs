//! Words over involutory generators, presentations and the relator families
//! used to build Coxeter groups and their tight quotients.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("Schläfli symbol must have at least one entry")]
    EmptySymbol,
    #[error("Schläfli entry p{index}={value} is below 2")]
    EntryTooSmall { index: usize, value: u32 },
    #[error("p{index}={a} and p{next}={b} are both odd; no extra relator applies", next = index + 1)]
    AdjacentOddPair { index: usize, a: u32, b: u32 },
    #[error("k={0} must be a positive odd integer")]
    BadLambdaParameter(u32),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A word in the generators `x_0, …, x_{n-1}`. Every generator is an
/// involution, so a letter is its own inverse and no signed letters exist.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn new(letters: impl Into<Vec<usize>>) -> Self {
        Word(letters.into())
    }

    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn pow(&self, e: usize) -> Word {
        Word(self.0.repeat(e))
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// The inverse word: letters reversed (each letter is self-inverse).
    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    pub fn max_letter(&self) -> Option<usize> {
        self.0.iter().copied().max()
    }

    /// Canonical representative under cyclic rotation and inversion, i.e.
    /// the minimum over all rotations of the word and of its inverse.
    pub fn cyclic_normal_form(&self) -> Word {
        if self.0.is_empty() {
            return self.clone();
        }
        let inv = self.inverse();
        let n = self.0.len();
        let mut best: Option<Vec<usize>> = None;
        for w in [&self.0, &inv.0] {
            for r in 0..n {
                let rot: Vec<usize> = w[r..].iter().chain(&w[..r]).copied().collect();
                if best.as_ref().is_none_or(|b| rot < *b) {
                    best = Some(rot);
                }
            }
        }
        Word(best.unwrap())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for &l in &self.0 {
            write!(f, "x{l}")?;
        }
        Ok(())
    }
}

/// A finitely presented group on `ngens` involutory generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Presentation {
    pub ngens: usize,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new(ngens: usize, relators: Vec<Word>) -> Self {
        debug_assert!(relators
            .iter()
            .all(|r| r.max_letter().is_none_or(|m| m < ngens)));
        Presentation { ngens, relators }
    }

    /// Appends a relator unless an identical one is already present.
    pub fn with_relator(mut self, w: Word) -> Self {
        if !self.relators.contains(&w) {
            self.relators.push(w);
        }
        self
    }

    pub fn all_even_length(&self) -> bool {
        self.relators.iter().all(|r| r.len() % 2 == 0)
    }

    /// Writes the plain-text form: `gens N` followed by one `rel …` line per relator.
    pub fn to_text(&self) -> String {
        let mut out = format!("gens {}\n", self.ngens);
        for r in &self.relators {
            out.push_str("rel");
            for l in &r.0 {
                out.push(' ');
                out.push_str(&l.to_string());
            }
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, WordError> {
        let err = |line: usize, message: String| WordError::Parse { line, message };
        let mut lines = text.lines().enumerate();
        let ngens = loop {
            match lines.next() {
                None => return Err(err(1, "missing `gens N` header".into())),
                Some((_, l)) if l.trim().is_empty() => continue,
                Some((i, l)) => {
                    let rest = l
                        .strip_prefix("gens ")
                        .ok_or_else(|| err(i + 1, format!("expected `gens N`, found `{l}`")))?;
                    let n: usize = rest
                        .parse()
                        .map_err(|_| err(i + 1, format!("bad generator count `{rest}`")))?;
                    if n == 0 {
                        return Err(err(i + 1, "generator count must be positive".into()));
                    }
                    break n;
                }
            }
        };
        let mut relators = Vec::new();
        for (i, l) in lines {
            if l.trim().is_empty() {
                continue;
            }
            let rest = if l == "rel" {
                ""
            } else {
                l.strip_prefix("rel ")
                    .ok_or_else(|| err(i + 1, format!("expected `rel …`, found `{l}`")))?
            };
            let mut letters = Vec::new();
            if !rest.is_empty() {
                for tok in rest.split(' ') {
                    let g: usize = tok
                        .parse()
                        .map_err(|_| err(i + 1, format!("bad generator index `{tok}`")))?;
                    if g >= ngens {
                        return Err(err(
                            i + 1,
                            format!("generator {g} out of range (gens {ngens})"),
                        ));
                    }
                    letters.push(g);
                }
            }
            relators.push(Word(letters));
        }
        Ok(Presentation { ngens, relators })
    }
}

/// Schläfli symbol `{p_1, …, p_{n-1}}` with finite entries `p_i ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SchlafliSymbol(Vec<u32>);

impl SchlafliSymbol {
    pub fn new(entries: impl Into<Vec<u32>>) -> Result<Self, WordError> {
        let entries = entries.into();
        if entries.is_empty() {
            return Err(WordError::EmptySymbol);
        }
        if let Some((i, &v)) = entries.iter().enumerate().find(|(_, &v)| v < 2) {
            return Err(WordError::EntryTooSmall {
                index: i + 1,
                value: v,
            });
        }
        Ok(SchlafliSymbol(entries))
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    /// Rank of the polytope, one more than the number of entries.
    pub fn rank(&self) -> usize {
        self.0.len() + 1
    }

    /// 1-based entry accessor matching the usual `p_i` numbering.
    pub fn p(&self, i: usize) -> u32 {
        self.0[i - 1]
    }

    pub fn reversed(&self) -> SchlafliSymbol {
        SchlafliSymbol(self.0.iter().rev().copied().collect())
    }

    /// `2 · p_1 ⋯ p_{n-1}`, the flag count of a tight polytope of this type.
    pub fn tight_flag_count(&self) -> u64 {
        2 * self.0.iter().map(|&p| p as u64).product::<u64>()
    }
}

impl fmt::Display for SchlafliSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl FromStr for SchlafliSymbol {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_start_matches('{').trim_end_matches('}');
        let entries: Result<Vec<u32>, _> = s.split(',').map(|t| t.trim().parse::<u32>()).collect();
        let entries = entries.map_err(|e| WordError::Parse {
            line: 1,
            message: format!("bad tuple `{s}`: {e}"),
        })?;
        SchlafliSymbol::new(entries)
    }
}

fn alternating(a: usize, b: usize, times: usize) -> Word {
    Word([a, b].repeat(times))
}

/// The string Coxeter group `[p_1, …, p_{n-1}]`. Relators are ordered as
/// involutions, then commuting pairs `(x_i x_j)^2` with `j ≥ i+2`, then the
/// braid relators `(x_{i-1} x_i)^{p_i}`.
pub fn coxeter_presentation(sym: &SchlafliSymbol) -> Presentation {
    let n = sym.rank();
    let mut rels = Vec::new();
    for i in 0..n {
        rels.push(Word(vec![i, i]));
    }
    for i in 0..n {
        for j in i + 2..n {
            rels.push(alternating(i, j, 2));
        }
    }
    for (i, &p) in sym.entries().iter().enumerate() {
        rels.push(alternating(i, i + 1, p as usize));
    }
    Presentation::new(n, rels)
}

/// The extra relator `r_i` (1-based `i`, `1 ≤ i ≤ n-2`) of the tight group.
pub fn tight_relator(sym: &SchlafliSymbol, i: usize) -> Result<Word, WordError> {
    let (a, b) = (sym.p(i), sym.p(i + 1));
    let (prev, mid, next) = (i - 1, i, i + 1);
    let base = match (a % 2 == 0, b % 2 == 0) {
        (true, true) => vec![prev, mid, next, mid],
        (false, true) => vec![prev, mid, next, mid, next],
        (true, false) => vec![next, mid, prev, mid, prev],
        (false, false) => return Err(WordError::AdjacentOddPair { index: i, a, b }),
    };
    Ok(Word(base).pow(2))
}

/// `Γ(p_1, …, p_{n-1})`: the Coxeter group plus the `n-2` relators `r_i`.
pub fn gamma_tuple_presentation(sym: &SchlafliSymbol) -> Result<Presentation, WordError> {
    let mut pres = coxeter_presentation(sym);
    for i in 1..sym.rank() - 1 {
        pres.relators.push(tight_relator(sym, i)?);
    }
    Ok(pres)
}

/// `Γ(p, q)`: `[p, q]` plus `(x_0 x_1 x_2 x_1 x_2)^2`.
pub fn gamma_pq_presentation(p: u32, q: u32) -> Result<Presentation, WordError> {
    let sym = SchlafliSymbol::new(vec![p, q])?;
    let mut pres = coxeter_presentation(&sym);
    pres.relators.push(Word(vec![0, 1, 2, 1, 2]).pow(2));
    Ok(pres)
}

/// `Λ(k)` for odd `k ≥ 1`: `[3k, 4]` plus the odd-length relator
/// `x_0 x_1 x_2 x_1 x_0 x_1 x_2 x_1 x_2`.
pub fn lambda_k_presentation(k: u32) -> Result<Presentation, WordError> {
    if k == 0 || k.is_multiple_of(2) {
        return Err(WordError::BadLambdaParameter(k));
    }
    let sym = SchlafliSymbol::new(vec![3 * k, 4])?;
    let mut pres = coxeter_presentation(&sym);
    pres.relators.push(Word(vec![0, 1, 2, 1, 0, 1, 2, 1, 2]));
    Ok(pres)
}

/// Where an odd entry fails the neighbour condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityViolation {
    /// 1-based index of the odd entry `p_i`.
    pub odd_index: usize,
    pub odd_value: u32,
    /// 1-based index of the offending neighbour.
    pub neighbor_index: usize,
    pub neighbor_value: u32,
}

impl fmt::Display for AdmissibilityViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "p{}={} is not an even divisor of 2p{}={}",
            self.neighbor_index,
            self.neighbor_value,
            self.odd_index,
            2 * self.odd_value
        )
    }
}

/// Checks that every odd `p_i` has neighbours that are even divisors of
/// `2p_i`. Returns the first violation, scanning odd entries left to right
/// and the left neighbour before the right one.
pub fn is_admissible(sym: &SchlafliSymbol) -> Result<(), AdmissibilityViolation> {
    let e = sym.entries();
    for (i, &p) in e.iter().enumerate() {
        if p % 2 == 0 {
            continue;
        }
        let neighbours = [i.checked_sub(1), Some(i + 1).filter(|&j| j < e.len())];
        for j in neighbours.into_iter().flatten() {
            let v = e[j];
            if !v.is_multiple_of(2) || (2 * p) % v != 0 {
                return Err(AdmissibilityViolation {
                    odd_index: i + 1,
                    odd_value: p,
                    neighbor_index: j + 1,
                    neighbor_value: v,
                });
            }
        }
    }
    Ok(())
}

/// Adds the relations `x_i = 1` for every generator outside `keep`: killed
/// letters are deleted, relators that become empty are dropped and the
/// surviving generators are renumbered densely in their original order.
pub fn kill_generators(pres: &Presentation, keep: &BTreeSet<usize>) -> Presentation {
    let mut renumber = vec![None; pres.ngens];
    for (new, &old) in keep.iter().filter(|&&g| g < pres.ngens).enumerate() {
        renumber[old] = Some(new);
    }
    let ngens = renumber.iter().flatten().count();
    let relators = pres
        .relators
        .iter()
        .map(|r| Word(r.0.iter().filter_map(|&l| renumber[l]).collect()))
        .filter(|w| !w.is_empty())
        .collect();
    Presentation { ngens, relators }
}

/// `{lo, …, hi-1}` as a generator index set.
pub fn index_range(lo: usize, hi: usize) -> BTreeSet<usize> {
    (lo..hi).collect()
}
