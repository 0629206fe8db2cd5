//! Exhaustive classification of tight regular polyhedra of type `{p, q}` by
//! a low-index search for normal subgroups of the string Coxeter group
//! `[p, q]`.
//!
//! The search builds the regular action of the quotient directly. Coset
//! tables are filled in standard form (each new coset is the first undefined
//! entry in row-major order), so every normal subgroup of the requested
//! index is produced exactly once. Besides relator scanning, every partial
//! table is closed under the left translations `ψ_d : 0·w ↦ d·w`, which
//! exist exactly when the point stabilizer is normal.

use sha2::{Digest, Sha256};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::families::{analyse, group_of, FamilyError};
use crate::group::{Group, GroupError, DEFAULT_ELEMENT_CAP};
use crate::sggi::{rotation_subgroup, SggiProfile};
use crate::todd_coxeter::{table_perm_rep, CosetTable};
use crate::words::{
    coxeter_presentation, gamma_pq_presentation, lambda_k_presentation, Presentation,
    SchlafliSymbol, Word,
};

pub const DEFAULT_INDEX_CAP: usize = 128;

const UNDEF: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifierError {
    #[error("index {index} is above the cap {cap}")]
    CapExceeded { index: usize, cap: usize },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Group(#[from] GroupError),
}

impl ClassifierError {
    pub fn is_resource(&self) -> bool {
        match self {
            ClassifierError::CapExceeded { .. } | ClassifierError::Group(_) => true,
            ClassifierError::Family(e) => e.is_resource(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub cap: usize,
    /// Words that must not act trivially in the quotient.
    pub forbidden: Vec<Word>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            cap: DEFAULT_INDEX_CAP,
            forbidden: Vec::new(),
        }
    }
}

/// Words `(x_0 x_1)^{p/r}` and `(x_1 x_2)^{q/r}` for every prime `r`
/// dividing `p` (resp. `q`): a quotient avoiding them has exact type `{p, q}`.
pub fn exact_type_words(p: u32, q: u32) -> Vec<Word> {
    let mut out = Vec::new();
    for (m, pair) in [(p, [0, 1]), (q, [1, 2])] {
        for r in prime_factors(m) {
            out.push(Word::new(pair).pow((m / r) as usize));
        }
    }
    out
}

fn prime_factors(mut m: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= m {
        if m.is_multiple_of(d) {
            out.push(d);
            while m.is_multiple_of(d) {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

#[derive(Clone)]
struct State {
    n: usize,
    table: Vec<u32>,
    psi: Vec<u32>,
    inv: Vec<u32>,
}

struct Conflict;

enum Fact {
    Edge(usize, usize),
    Psi(usize, usize),
}

struct Search<'a> {
    index: usize,
    ngens: usize,
    /// Cyclic conjugates of every relator, grouped by first letter.
    conjugates: Vec<Vec<Vec<usize>>>,
    forbidden: &'a [Word],
    pres: &'a Presentation,
    found: Vec<CosetTable>,
}

impl State {
    fn new(index: usize, ngens: usize) -> Self {
        let mut s = State {
            n: 1,
            table: vec![UNDEF; index * ngens],
            psi: vec![UNDEF; index * index],
            inv: vec![UNDEF; index * index],
        };
        s.psi[0] = 0;
        s.inv[0] = 0;
        s
    }
}

impl<'a> Search<'a> {
    fn new(pres: &'a Presentation, index: usize, forbidden: &'a [Word]) -> Self {
        let ngens = pres.ngens;
        let mut conjugates = vec![Vec::new(); ngens];
        for r in &pres.relators {
            let l = r.letters();
            // x² holds by construction since every column is an involution
            if l.len() == 2 && l[0] == l[1] || l.is_empty() {
                continue;
            }
            for s in 0..l.len() {
                let c: Vec<usize> = l[s..].iter().chain(&l[..s]).copied().collect();
                if !conjugates[c[0]].contains(&c) {
                    conjugates[c[0]].push(c);
                }
            }
        }
        Search {
            index,
            ngens,
            conjugates,
            forbidden,
            pres,
            found: Vec::new(),
        }
    }

    #[inline]
    fn get(&self, s: &State, c: usize, x: usize) -> u32 {
        s.table[c * self.ngens + x]
    }

    fn define_edge(
        &self,
        s: &mut State,
        c: usize,
        x: usize,
        e: usize,
        queue: &mut Vec<Fact>,
    ) -> Result<(), Conflict> {
        let cur = self.get(s, c, x);
        if cur == e as u32 {
            return Ok(());
        }
        if cur != UNDEF {
            return Err(Conflict);
        }
        let back = self.get(s, e, x);
        if back != UNDEF && back != c as u32 {
            return Err(Conflict);
        }
        s.table[c * self.ngens + x] = e as u32;
        s.table[e * self.ngens + x] = c as u32;
        queue.push(Fact::Edge(c, x));
        Ok(())
    }

    fn set_psi(
        &self,
        s: &mut State,
        d: usize,
        a: usize,
        b: usize,
        queue: &mut Vec<Fact>,
    ) -> Result<(), Conflict> {
        let k = self.index;
        let cur = s.psi[d * k + a];
        if cur == b as u32 {
            return Ok(());
        }
        if cur != UNDEF || s.inv[d * k + b] != UNDEF {
            return Err(Conflict);
        }
        s.psi[d * k + a] = b as u32;
        s.inv[d * k + b] = a as u32;
        queue.push(Fact::Psi(d, a));
        Ok(())
    }

    /// `ψ_d(f) = g` and the edges labelled `x` at `f` and `g`.
    fn translate(
        &self,
        s: &mut State,
        d: usize,
        f: usize,
        g: usize,
        x: usize,
        queue: &mut Vec<Fact>,
    ) -> Result<(), Conflict> {
        let k = self.index;
        let (a, b) = (self.get(s, f, x), self.get(s, g, x));
        match (a != UNDEF, b != UNDEF) {
            (true, true) => self.set_psi(s, d, a as usize, b as usize, queue),
            (true, false) => match s.psi[d * k + a as usize] {
                UNDEF => Ok(()),
                b2 => self.define_edge(s, g, x, b2 as usize, queue),
            },
            (false, true) => match s.inv[d * k + b as usize] {
                UNDEF => Ok(()),
                a2 => self.define_edge(s, f, x, a2 as usize, queue),
            },
            (false, false) => Ok(()),
        }
    }

    fn scan(
        &self,
        s: &mut State,
        c: usize,
        w: &[usize],
        queue: &mut Vec<Fact>,
    ) -> Result<(), Conflict> {
        let (mut f, mut i) = (c, 0);
        while i < w.len() {
            match self.get(s, f, w[i]) {
                UNDEF => break,
                e => f = e as usize,
            }
            i += 1;
        }
        if i == w.len() {
            return if f == c { Ok(()) } else { Err(Conflict) };
        }
        let (mut b, mut j) = (c, w.len());
        while j > i {
            match self.get(s, b, w[j - 1]) {
                UNDEF => break,
                e => b = e as usize,
            }
            j -= 1;
        }
        if j == i {
            return if f == b { Ok(()) } else { Err(Conflict) };
        }
        if j == i + 1 {
            return self.define_edge(s, f, w[i], b, queue);
        }
        Ok(())
    }

    fn propagate(&self, s: &mut State, mut queue: Vec<Fact>) -> Result<(), Conflict> {
        let k = self.index;
        while let Some(fact) = queue.pop() {
            match fact {
                Fact::Edge(c, x) => {
                    let e = self.get(s, c, x) as usize;
                    for u in [c, e] {
                        for w in &self.conjugates[x] {
                            self.scan(s, u, w, &mut queue)?;
                        }
                        for d in 1..s.n {
                            let g = s.psi[d * k + u];
                            if g != UNDEF {
                                self.translate(s, d, u, g as usize, x, &mut queue)?;
                            }
                            let f = s.inv[d * k + u];
                            if f != UNDEF {
                                self.translate(s, d, f as usize, u, x, &mut queue)?;
                            }
                        }
                        if e == c {
                            break;
                        }
                    }
                }
                Fact::Psi(d, a) => {
                    let g = s.psi[d * k + a] as usize;
                    for x in 0..self.ngens {
                        self.translate(s, d, a, g, x, &mut queue)?;
                    }
                }
            }
        }
        for w in self.forbidden {
            for c in 0..s.n {
                let mut f = c;
                let mut complete = true;
                for &l in w.letters() {
                    match self.get(s, f, l) {
                        UNDEF => {
                            complete = false;
                            break;
                        }
                        e => f = e as usize,
                    }
                }
                if complete && f == c {
                    return Err(Conflict);
                }
            }
        }
        Ok(())
    }

    fn new_coset(&self, s: &mut State, queue: &mut Vec<Fact>) -> usize {
        let k = self.index;
        let c = s.n;
        s.n += 1;
        s.psi[c] = c as u32;
        s.inv[c] = c as u32;
        s.psi[c * k] = c as u32;
        s.inv[c * k + c] = 0;
        queue.push(Fact::Psi(c, 0));
        c
    }

    fn first_gap(&self, s: &State) -> Option<(usize, usize)> {
        let pos = s.table[..s.n * self.ngens].iter().position(|&e| e == UNDEF)?;
        Some((pos / self.ngens, pos % self.ngens))
    }

    fn run(&mut self, s: State) {
        let Some((c, x)) = self.first_gap(&s) else {
            if s.n == self.index {
                self.accept(&s);
            }
            return;
        };
        for e in 0..=s.n {
            if e == s.n && s.n == self.index {
                break;
            }
            if e < s.n && e != c && self.get(&s, e, x) != UNDEF {
                continue;
            }
            let mut t = s.clone();
            let mut queue = Vec::new();
            let target = if e == s.n {
                self.new_coset(&mut t, &mut queue)
            } else {
                e
            };
            if self.define_edge(&mut t, c, x, target, &mut queue).is_ok()
                && self.propagate(&mut t, queue).is_ok()
            {
                self.run(t);
            }
        }
    }

    fn accept(&mut self, s: &State) {
        let table = CosetTable::from_action(self.ngens, s.table.clone(), Vec::new());
        let rows = table.rows();
        let closed = (0..rows).all(|c| self.pres.relators.iter().all(|r| table.trace(c, r) == c));
        if !closed {
            return;
        }
        // regular action: the generated group has exactly `index` elements
        let rep = table_perm_rep(&table);
        if Group::new(&rep, self.index).is_ok_and(|g| g.order() == self.index) {
            self.found.push(table);
        }
    }
}

/// All normal subgroups of index exactly `index` in the group presented by
/// `pres` (all generators involutions), each given by the coset table of the
/// regular action of the quotient, in standard form.
pub fn low_index_normal(
    pres: &Presentation,
    index: usize,
    options: &SearchOptions,
) -> Result<Vec<CosetTable>, ClassifierError> {
    if index > options.cap {
        return Err(ClassifierError::CapExceeded {
            index,
            cap: options.cap,
        });
    }
    if index == 0 {
        return Ok(Vec::new());
    }
    let mut search = Search::new(pres, index, &options.forbidden);
    let mut start = State::new(index, pres.ngens);
    if search.propagate(&mut start, Vec::new()).is_ok() {
        search.run(start);
    }
    let mut found = search.found;
    found.sort_by(|a, b| a.raw().cmp(b.raw()));
    Ok(found)
}

/// Short stable id of a quotient: the first 16 hex digits of the SHA-256 of
/// its table dump.
pub fn kernel_id(table: &CosetTable) -> String {
    let digest = Sha256::digest(table.dump().as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum OrientabilityFilter {
    #[default]
    Any,
    Orientable,
    NonOrientable,
}

impl OrientabilityFilter {
    fn admits(self, orientable: bool) -> bool {
        match self {
            OrientabilityFilter::Any => true,
            OrientabilityFilter::Orientable => orientable,
            OrientabilityFilter::NonOrientable => !orientable,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CensusRecord {
    pub p: u32,
    pub q: u32,
    pub kernel_id: String,
    /// Regular action of the quotient on itself.
    #[serde(skip)]
    pub table: CosetTable,
    pub quotient_order: u64,
    pub flag_count: u64,
    pub profile: SggiProfile,
    pub tight: bool,
    pub orientable: bool,
    pub polytope_verified: bool,
    /// `x_i ↦ x_i` extends to an isomorphism from `Γ(p, q)`.
    pub isomorphic_to_gamma: bool,
    /// Same for `Λ(k)` when the type is `{3k, 4}` with `k` odd.
    pub isomorphic_to_lambda: Option<bool>,
    /// For orientable records with `p` odd: `(x_1 x_2)^2` is central in the
    /// rotation subgroup.
    pub omega_central: Option<bool>,
    pub q_divides_2p: bool,
}

fn isomorphic_from(group: &Group, src: &Presentation) -> Result<bool, ClassifierError> {
    let other = group_of(src)?;
    if other.order() != group.order() {
        return Ok(false);
    }
    let images: Vec<Word> = (0..src.ngens).map(|i| Word::new([i])).collect();
    let r = group.check_generator_map(src, &images);
    Ok(r.homomorphism && r.surjective)
}

/// Tight regular polyhedra of type `{p, q}`: quotients of `[p, q]` of order
/// `2pq` with exact type `{p, q}` that are string C-groups with a verified,
/// tight face poset.
pub fn classify(
    p: u32,
    q: u32,
    filter: OrientabilityFilter,
    cap: usize,
) -> Result<Vec<CensusRecord>, ClassifierError> {
    let sym = SchlafliSymbol::new(vec![p, q]).map_err(FamilyError::from)?;
    let index = sym.tight_flag_count() as usize;
    let pres = coxeter_presentation(&sym);
    let options = SearchOptions {
        cap,
        forbidden: exact_type_words(p, q),
    };
    let tables = low_index_normal(&pres, index, &options)?;
    let gamma = gamma_pq_presentation(p, q).map_err(FamilyError::from)?;
    let lambda = (q == 4 && p.is_multiple_of(3) && (p / 3) % 2 == 1)
        .then(|| lambda_k_presentation(p / 3).map_err(FamilyError::from))
        .transpose()?;
    let mut out = Vec::new();
    for table in &tables {
        let group = Group::new(&table_perm_rep(table), DEFAULT_ELEMENT_CAP.max(index))?;
        let a = analyse(&group);
        let orientable = a.profile.orientable();
        let tight = a.tight == Some(true) && group.order() == index;
        let keep = a.profile.is_sggi
            && a.profile.schlafli == [p, q]
            && a.profile.is_string_c_group
            && a.polytope.passes()
            && tight
            && filter.admits(orientable);
        if !keep {
            continue;
        }
        let omega_central = (orientable && p % 2 == 1).then(|| {
            let rot = rotation_subgroup(&group);
            group.is_central_in(&Word::new([1, 2, 1, 2]), &rot)
        });
        out.push(CensusRecord {
            p,
            q,
            kernel_id: kernel_id(table),
            table: table.clone(),
            quotient_order: group.order() as u64,
            flag_count: a.flag_count,
            profile: a.profile,
            tight,
            orientable,
            polytope_verified: true,
            isomorphic_to_gamma: isomorphic_from(&group, &gamma)?,
            isomorphic_to_lambda: lambda
                .as_ref()
                .map(|l| isomorphic_from(&group, l))
                .transpose()?,
            omega_central,
            q_divides_2p: (2 * p).is_multiple_of(q),
        });
    }
    Ok(out)
}

/// `classify` restricted to orientable records when `require_orientable`.
pub fn classify_tight(
    p: u32,
    q: u32,
    require_orientable: bool,
) -> Result<Vec<CensusRecord>, ClassifierError> {
    let filter = if require_orientable {
        OrientabilityFilter::Orientable
    } else {
        OrientabilityFilter::Any
    };
    classify(p, q, filter, DEFAULT_INDEX_CAP)
}

pub fn census_nonorientable(p: u32, q: u32) -> Result<Vec<CensusRecord>, ClassifierError> {
    classify(p, q, OrientabilityFilter::NonOrientable, DEFAULT_INDEX_CAP)
}

/// Types `{p, q}` admitting a tight orientably-regular polyhedron: both even,
/// or one odd and the other an even divisor of twice it.
pub fn tight_orientable_exists(p: u32, q: u32) -> bool {
    match (p % 2, q % 2) {
        (0, 0) => true,
        (1, 0) => (2 * p).is_multiple_of(q),
        (0, 1) => (2 * q).is_multiple_of(p),
        _ => false,
    }
}
