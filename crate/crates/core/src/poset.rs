//! Ranked face posets: the coset construction from a group with
//! distinguished involutory generators, the polytope axioms, flags,
//! sections, flatness, tightness and duality.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::Group;
use crate::words::SchlafliSymbol;

pub const POSET_SCHEMA_VERSION: u32 = 1;
pub const MAX_FLAGS: usize = 2_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("faces {0} and {1} are not comparable")]
    NotComparable(usize, usize),
    #[error("flag {flag} has {count} candidate {j}-adjacent flags")]
    DiamondViolation { flag: usize, j: usize, count: usize },
    #[error("more than {0} flags")]
    TooManyFlags(usize),
    #[error("not equivelar: rank-2 sections for p{index} have sizes {a} and {b}")]
    NotEquivelar { index: usize, a: usize, b: usize },
    #[error("degenerate section for p{index} with {size} vertices")]
    DegenerateSection { index: usize, size: usize },
    #[error("rank {0} poset has no Schläfli symbol")]
    RankTooSmall(i32),
    #[error("tightness routes disagree: flag count says {by_flags}, flatness says {by_flatness}")]
    RouteDisagreement { by_flags: bool, by_flatness: bool },
}

/// A ranked poset with faces of rank `-1..=rank`. Faces are numbered by rank
/// and, inside a rank, in construction order (for group-built posets: by
/// the smallest group element in the coset).
#[derive(Clone, Debug)]
pub struct FacePoset {
    rank: i32,
    face_rank: Vec<i32>,
    by_rank: Vec<Vec<usize>>,
    up: Vec<Vec<usize>>,
    down: Vec<Vec<usize>>,
    above: Vec<FixedBitSet>,
    below: Vec<FixedBitSet>,
}

/// Pass/fail for each polytope axiom plus the first failure found.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolytopeReport {
    pub bounded: bool,
    pub chains: bool,
    pub connected: bool,
    pub diamond: bool,
    pub first_failure: Option<String>,
}

impl PolytopeReport {
    pub fn passes(&self) -> bool {
        self.bounded && self.chains && self.connected && self.diamond
    }
}

#[derive(Clone, Debug)]
pub struct FlagSystem {
    /// Each flag lists one face per rank, `-1` first.
    pub flags: Vec<Vec<usize>>,
    /// `adjacency[f][j]` is the index of the `j`-adjacent flag of flag `f`.
    pub adjacency: Vec<Vec<usize>>,
}

impl FlagSystem {
    pub fn count(&self) -> usize {
        self.flags.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tightness {
    pub tight: bool,
    pub flags: u64,
    pub bound: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetExport {
    pub schema_version: u32,
    pub rank: i32,
    /// Face counts for ranks `-1..=rank`.
    pub face_counts: Vec<usize>,
    /// `[r, a, b]`: face `a` of rank `r` is incident with face `b` of rank `r+1`
    /// (indices within their rank).
    pub incidences: Vec<[i64; 3]>,
    pub flag_count: u64,
}

/// Coset poset of a group: the `i`-faces are the cosets of
/// `Γ_i = ⟨x_j : j ≠ i⟩`, ordered by nonempty intersection between
/// consecutive ranks.
pub fn build_poset(group: &Group) -> FacePoset {
    let n = group.ngens();
    let order = group.order();
    let mut face_rank = vec![-1];
    // face_of[i][e]: global id of the i-face containing element e
    let mut face_of: Vec<Vec<usize>> = Vec::with_capacity(n);
    for i in 0..n {
        let gens: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let mut seen = vec![false; order];
        let mut ids = vec![0usize; order];
        for start in 0..order as u32 {
            if seen[start as usize] {
                continue;
            }
            let id = face_rank.len();
            face_rank.push(i as i32);
            for e in group.left_coset(start, &gens, &mut seen) {
                ids[e as usize] = id;
            }
        }
        face_of.push(ids);
    }
    let top = face_rank.len();
    face_rank.push(n as i32);
    let mut edges: Vec<(usize, usize)> = Vec::new();
    if n == 0 {
        edges.push((0, top));
    } else {
        for e in 0..order {
            edges.push((0, face_of[0][e]));
            edges.push((face_of[n - 1][e], top));
            for i in 0..n - 1 {
                edges.push((face_of[i][e], face_of[i + 1][e]));
            }
        }
    }
    FacePoset::from_covers(n as i32, face_rank, edges)
}

impl FacePoset {
    /// Builds a poset from face ranks (which must be sorted ascending) and
    /// cover pairs `(lower, upper)` between consecutive ranks; the order is
    /// the transitive closure of the covers.
    pub fn from_covers(rank: i32, face_rank: Vec<i32>, mut edges: Vec<(usize, usize)>) -> Self {
        debug_assert!(face_rank.windows(2).all(|w| w[0] <= w[1]));
        let nf = face_rank.len();
        edges.sort_unstable();
        edges.dedup();
        let mut up = vec![Vec::new(); nf];
        let mut down = vec![Vec::new(); nf];
        for &(a, b) in &edges {
            debug_assert_eq!(face_rank[a] + 1, face_rank[b]);
            up[a].push(b);
            down[b].push(a);
        }
        let mut by_rank = vec![Vec::new(); (rank + 2).max(1) as usize];
        for (f, &r) in face_rank.iter().enumerate() {
            by_rank[(r + 1) as usize].push(f);
        }
        let mut above = vec![FixedBitSet::with_capacity(nf); nf];
        for f in (0..nf).rev() {
            let mut s = FixedBitSet::with_capacity(nf);
            s.insert(f);
            for &g in &up[f] {
                s.union_with(&above[g]);
            }
            above[f] = s;
        }
        let mut below = vec![FixedBitSet::with_capacity(nf); nf];
        for f in 0..nf {
            let mut s = FixedBitSet::with_capacity(nf);
            s.insert(f);
            for &g in &down[f] {
                s.union_with(&below[g]);
            }
            below[f] = s;
        }
        FacePoset {
            rank,
            face_rank,
            by_rank,
            up,
            down,
            above,
            below,
        }
    }

    pub fn rank(&self) -> i32 {
        self.rank
    }

    pub fn num_faces(&self) -> usize {
        self.face_rank.len()
    }

    pub fn face_rank(&self, f: usize) -> i32 {
        self.face_rank[f]
    }

    pub fn faces_of_rank(&self, r: i32) -> &[usize] {
        if r < -1 || r > self.rank {
            return &[];
        }
        &self.by_rank[(r + 1) as usize]
    }

    pub fn face_counts(&self) -> Vec<usize> {
        self.by_rank.iter().map(|v| v.len()).collect()
    }

    pub fn covers_up(&self, f: usize) -> &[usize] {
        &self.up[f]
    }

    pub fn covers_down(&self, f: usize) -> &[usize] {
        &self.down[f]
    }

    /// `a ≤ b`.
    #[inline]
    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.above[a].contains(b)
    }

    pub fn incident(&self, a: usize, b: usize) -> bool {
        self.leq(a, b) || self.leq(b, a)
    }

    fn bottom(&self) -> Option<usize> {
        match self.faces_of_rank(-1) {
            [f] => Some(*f),
            _ => None,
        }
    }

    /// Number of maximal chains from the bottom through every rank, by
    /// dynamic programming over the covers.
    pub fn flag_count(&self) -> u64 {
        let mut ways = vec![0u64; self.num_faces()];
        for &f in self.faces_of_rank(-1) {
            ways[f] = 1;
        }
        for r in 0..=self.rank {
            for &f in self.faces_of_rank(r) {
                ways[f] = self.down[f].iter().map(|&g| ways[g]).sum();
            }
        }
        self.faces_of_rank(self.rank).iter().map(|&f| ways[f]).sum()
    }

    pub fn flags(&self) -> Result<Vec<Vec<usize>>, PosetError> {
        let mut out = Vec::new();
        let mut chain = Vec::with_capacity((self.rank + 2) as usize);
        for &b in self.faces_of_rank(-1) {
            chain.push(b);
            self.extend_flags(&mut chain, &mut out)?;
            chain.pop();
        }
        Ok(out)
    }

    fn extend_flags(
        &self,
        chain: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<(), PosetError> {
        let last = *chain.last().unwrap();
        if self.face_rank[last] == self.rank {
            if out.len() >= MAX_FLAGS {
                return Err(PosetError::TooManyFlags(MAX_FLAGS));
            }
            out.push(chain.clone());
            return Ok(());
        }
        for &g in &self.up[last] {
            chain.push(g);
            self.extend_flags(chain, out)?;
            chain.pop();
        }
        Ok(())
    }

    /// All flags with their `j`-adjacency maps for `0 ≤ j ≤ rank-1`.
    pub fn flags_and_adjacency(&self) -> Result<FlagSystem, PosetError> {
        let flags = self.flags()?;
        let lookup: HashMap<&[usize], usize> = flags
            .iter()
            .enumerate()
            .map(|(i, f)| (f.as_slice(), i))
            .collect();
        let mut adjacency = Vec::with_capacity(flags.len());
        for (fi, flag) in flags.iter().enumerate() {
            let mut adj = Vec::with_capacity(self.rank.max(0) as usize);
            for j in 0..self.rank.max(0) as usize {
                // positions j, j+1, j+2 hold ranks j-1, j, j+1
                let (lo, cur, hi) = (flag[j], flag[j + 1], flag[j + 2]);
                let candidates: Vec<usize> = self.up[lo]
                    .iter()
                    .copied()
                    .filter(|&h| h != cur && self.leq(h, hi))
                    .collect();
                if candidates.len() != 1 {
                    return Err(PosetError::DiamondViolation {
                        flag: fi,
                        j,
                        count: candidates.len(),
                    });
                }
                let mut other = flag.clone();
                other[j + 1] = candidates[0];
                adj.push(lookup[other.as_slice()]);
            }
            adjacency.push(adj);
        }
        Ok(FlagSystem { flags, adjacency })
    }

    /// Faces strictly between `f` and `g`.
    fn open_interval(&self, f: usize, g: usize) -> Vec<usize> {
        let mut s = self.above[f].clone();
        s.intersect_with(&self.below[g]);
        s.set(f, false);
        s.set(g, false);
        s.ones().collect()
    }

    fn interval_connected(&self, f: usize, g: usize) -> bool {
        let inner = self.open_interval(f, g);
        if inner.is_empty() {
            return false;
        }
        let pos: HashMap<usize, usize> = inner.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let mut parent: Vec<usize> = (0..inner.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut components = inner.len();
        for (i, &h) in inner.iter().enumerate() {
            for &k in &self.up[h] {
                if let Some(&j) = pos.get(&k) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                        components -= 1;
                    }
                }
            }
        }
        components == 1
    }

    /// Checks the four polytope axioms exhaustively.
    pub fn verify_polytope(&self) -> PolytopeReport {
        let mut report = PolytopeReport {
            bounded: true,
            chains: true,
            connected: true,
            diamond: true,
            first_failure: None,
        };
        let fail = |report: &mut PolytopeReport, msg: String| {
            if report.first_failure.is_none() {
                report.first_failure = Some(msg);
            }
        };
        let bottoms = self.faces_of_rank(-1).len();
        let tops = self.faces_of_rank(self.rank).len();
        if bottoms != 1 || tops != 1 {
            report.bounded = false;
            fail(
                &mut report,
                format!("bounded: {bottoms} least and {tops} greatest faces"),
            );
        } else {
            let (b, t) = (self.faces_of_rank(-1)[0], self.faces_of_rank(self.rank)[0]);
            if let Some(f) = (0..self.num_faces()).find(|&f| !self.leq(b, f) || !self.leq(f, t)) {
                report.bounded = false;
                fail(&mut report, format!("bounded: face {f} is not between the extremes"));
            }
        }
        for f in 0..self.num_faces() {
            let r = self.face_rank[f];
            if (r > -1 && self.down[f].is_empty()) || (r < self.rank && self.up[f].is_empty()) {
                report.chains = false;
                fail(&mut report, format!("chains: face {f} of rank {r} ends a short flag"));
                break;
            }
        }
        'outer: for f in 0..self.num_faces() {
            for g in self.above[f].ones() {
                let gap = self.face_rank[g] - self.face_rank[f];
                if gap == 2 {
                    let between = self.open_interval(f, g).len();
                    if between != 2 && report.diamond {
                        report.diamond = false;
                        fail(
                            &mut report,
                            format!("diamond: section {g}/{f} has {between} middle faces"),
                        );
                    }
                } else if gap >= 3 && report.connected && !self.interval_connected(f, g) {
                    report.connected = false;
                    fail(&mut report, format!("connectivity: section {g}/{f} is disconnected"));
                }
                if !report.diamond && !report.connected {
                    break 'outer;
                }
            }
        }
        report
    }

    /// The section `G/F = {H : F ≤ H ≤ G}` of rank `rank(G) - rank(F) - 1`.
    pub fn section(&self, f: usize, g: usize) -> Result<FacePoset, PosetError> {
        if !self.leq(f, g) {
            return Err(PosetError::NotComparable(f, g));
        }
        let mut members = self.above[f].clone();
        members.intersect_with(&self.below[g]);
        let faces: Vec<usize> = members.ones().collect();
        let index: HashMap<usize, usize> = faces.iter().enumerate().map(|(i, &h)| (h, i)).collect();
        let shift = self.face_rank[f] + 1;
        let face_rank: Vec<i32> = faces.iter().map(|&h| self.face_rank[h] - shift).collect();
        let edges = faces
            .iter()
            .flat_map(|&h| {
                self.up[h]
                    .iter()
                    .filter_map(|k| index.get(k).map(|&j| (index[&h], j)))
                    .collect::<Vec<_>>()
            })
            .collect();
        Ok(FacePoset::from_covers(
            self.face_rank[g] - shift,
            face_rank,
            edges,
        ))
    }

    /// Face `f` as a polytope in its own right: `F/F_{-1}`.
    pub fn face_section(&self, f: usize) -> Result<FacePoset, PosetError> {
        let b = self.bottom().ok_or(PosetError::NotComparable(f, f))?;
        self.section(b, f)
    }

    /// Co-face at `f`: `F_n/F`.
    pub fn coface_section(&self, f: usize) -> Result<FacePoset, PosetError> {
        let t = match self.faces_of_rank(self.rank) {
            [t] => *t,
            _ => return Err(PosetError::NotComparable(f, f)),
        };
        self.section(f, t)
    }

    /// Sizes of the rank-2 sections `G/F` with `F` an `(i-2)`-face and `G`
    /// an incident `(i+1)`-face; they must all agree for every `i`.
    pub fn combinatorial_schlafli(&self) -> Result<SchlafliSymbol, PosetError> {
        if self.rank < 2 {
            return Err(PosetError::RankTooSmall(self.rank));
        }
        let mut entries = Vec::new();
        for i in 1..self.rank {
            let mut size: Option<usize> = None;
            for &f in self.faces_of_rank(i - 2) {
                for g in self.above[f].ones() {
                    if self.face_rank[g] != i + 1 {
                        continue;
                    }
                    let s = self
                        .open_interval(f, g)
                        .into_iter()
                        .filter(|&h| self.face_rank[h] == i - 1)
                        .count();
                    match size {
                        None => size = Some(s),
                        Some(a) if a != s => {
                            return Err(PosetError::NotEquivelar {
                                index: i as usize,
                                a,
                                b: s,
                            })
                        }
                        _ => {}
                    }
                }
            }
            let s = size.unwrap_or(0);
            if s < 2 {
                return Err(PosetError::DegenerateSection {
                    index: i as usize,
                    size: s,
                });
            }
            entries.push(s as u32);
        }
        Ok(SchlafliSymbol::new(entries).expect("entries checked ≥ 2"))
    }

    /// Every `k`-face is incident with every `m`-face.
    pub fn is_flat(&self, k: i32, m: i32) -> bool {
        let (lo, hi) = if k <= m { (k, m) } else { (m, k) };
        self.faces_of_rank(lo)
            .iter()
            .all(|&a| self.faces_of_rank(hi).iter().all(|&b| self.leq(a, b)))
    }

    /// Tightness by flag count (`2 ∏ p_i`) and, independently, by
    /// `(i, i+2)`-flatness for `0 ≤ i ≤ n-3`. The two must agree.
    pub fn is_tight(&self) -> Result<Tightness, PosetError> {
        let sym = self.combinatorial_schlafli()?;
        let bound = sym.tight_flag_count();
        let flags = self.flag_count();
        let by_flags = flags == bound;
        let by_flatness = (0..=self.rank - 3).all(|i| self.is_flat(i, i + 2));
        if by_flags != by_flatness {
            return Err(PosetError::RouteDisagreement {
                by_flags,
                by_flatness,
            });
        }
        Ok(Tightness {
            tight: by_flags,
            flags,
            bound,
        })
    }

    /// The order-reversed poset.
    pub fn dual(&self) -> FacePoset {
        let n = self.rank;
        let nf = self.num_faces();
        // renumber so faces stay sorted by (new) rank
        let order: Vec<usize> = (-1..=n)
            .rev()
            .flat_map(|r| self.faces_of_rank(r).iter().copied())
            .collect();
        let mut new_id = vec![0usize; nf];
        for (i, &f) in order.iter().enumerate() {
            new_id[f] = i;
        }
        let face_rank = order.iter().map(|&f| n - 1 - self.face_rank[f]).collect();
        let edges = (0..nf)
            .flat_map(|a| self.up[a].iter().map(move |&b| (b, a)))
            .map(|(lo, hi)| (new_id[lo], new_id[hi]))
            .collect();
        FacePoset::from_covers(n, face_rank, edges)
    }

    pub fn export(&self) -> PosetExport {
        let mut within = vec![0usize; self.num_faces()];
        for faces in &self.by_rank {
            for (i, &f) in faces.iter().enumerate() {
                within[f] = i;
            }
        }
        let mut incidences = Vec::new();
        for r in -1..self.rank {
            for &a in self.faces_of_rank(r) {
                for &b in &self.up[a] {
                    incidences.push([r as i64, within[a] as i64, within[b] as i64]);
                }
            }
        }
        PosetExport {
            schema_version: POSET_SCHEMA_VERSION,
            rank: self.rank,
            face_counts: self.face_counts(),
            incidences,
            flag_count: self.flag_count(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.export()).expect("poset export serializes")
    }
}
