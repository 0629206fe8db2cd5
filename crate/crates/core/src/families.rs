//! End-to-end pipelines for the tight families: build a presentation,
//! enumerate it, and record every claim about the resulting group and
//! polytope as pass/fail rather than as an error.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::group::{Group, GroupError, DEFAULT_ELEMENT_CAP};
use crate::perm::Perm;
use crate::poset::{build_poset, PolytopeReport, PosetError};
use crate::sggi::{self, SggiProfile};
use crate::todd_coxeter::{default_budget, regular_rep, EnumerationError, PermRep};
use crate::words::{
    gamma_tuple_presentation, is_admissible, kill_generators, lambda_k_presentation,
    AdmissibilityViolation, Presentation, SchlafliSymbol, Word, WordError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FamilyError {
    #[error("not admissible: {0}")]
    NotAdmissible(AdmissibilityViolation),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}

impl FamilyError {
    /// Budget and cap failures, as opposed to bad input.
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            FamilyError::Enumeration(EnumerationError::BudgetExceeded { .. })
                | FamilyError::Group(GroupError::CapExceeded { .. })
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gamma,
    Lambda,
    Census,
}

/// Group-level and poset-level facts about one group with distinguished
/// generators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analysis {
    pub profile: SggiProfile,
    pub polytope: PolytopeReport,
    pub flag_count: u64,
    pub combinatorial_type: Option<Vec<u32>>,
    /// `None` when the poset is not equivelar.
    pub tight: Option<bool>,
    /// The flag-count and flatness tests for tightness gave the same answer.
    pub tight_routes_agree: bool,
}

pub fn analyse(group: &Group) -> Analysis {
    let profile = sggi::profile(group);
    let poset = build_poset(group);
    let polytope = poset.verify_polytope();
    let flag_count = poset.flag_count();
    let combinatorial_type = poset
        .combinatorial_schlafli()
        .ok()
        .map(|s| s.entries().to_vec());
    let (tight, tight_routes_agree) = match poset.is_tight() {
        Ok(t) => (Some(t.tight), true),
        Err(PosetError::RouteDisagreement { .. }) => (None, false),
        Err(_) => (None, true),
    };
    Analysis {
        profile,
        polytope,
        flag_count,
        combinatorial_type,
        tight,
        tight_routes_agree,
    }
}

pub fn group_of(pres: &Presentation) -> Result<Group, FamilyError> {
    let rep = regular_rep(pres, default_budget())?;
    Ok(Group::new(&rep, DEFAULT_ELEMENT_CAP)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyVerdict {
    pub tuple: Vec<u32>,
    pub family: Family,
    pub presentation: Presentation,
    pub group_order: u64,
    pub expected_order: u64,
    pub analysis: Analysis,
    pub claims: BTreeMap<String, bool>,
}

impl FamilyVerdict {
    pub fn passes(&self) -> bool {
        self.claims.values().all(|&ok| ok)
    }

    pub fn failed_claims(&self) -> Vec<&str> {
        self.claims
            .iter()
            .filter(|(_, &ok)| !ok)
            .map(|(k, _)| k.as_str())
            .collect()
    }

    pub fn orientable(&self) -> bool {
        self.analysis.profile.orientable()
    }

    pub fn tight(&self) -> bool {
        self.analysis.tight == Some(true)
    }
}

fn verdict(
    sym: &SchlafliSymbol,
    family: Family,
    pres: Presentation,
    group: &Group,
    expect_orientable: bool,
) -> FamilyVerdict {
    let tuple = sym.entries().to_vec();
    let expected_order = sym.tight_flag_count();
    let group_order = group.order() as u64;
    let analysis = analyse(group);
    let mut claims = BTreeMap::new();
    let mut claim = |name: &str, ok: bool| {
        claims.insert(name.to_string(), ok);
    };
    claim("order", group_order == expected_order);
    claim("schlafli", analysis.profile.schlafli == tuple);
    claim("string_c_group", analysis.profile.is_string_c_group);
    claim("polytope", analysis.polytope.passes());
    claim("flags_equal_order", analysis.flag_count == group_order);
    claim(
        "combinatorial_type",
        analysis.combinatorial_type.as_deref() == Some(&tuple[..]),
    );
    claim("tight", analysis.tight == Some(true));
    claim("tight_routes_agree", analysis.tight_routes_agree);
    claim(
        if expect_orientable {
            "orientable"
        } else {
            "non_orientable"
        },
        analysis.profile.orientable() == expect_orientable,
    );
    FamilyVerdict {
        tuple,
        family,
        presentation: pres,
        group_order,
        expected_order,
        analysis,
        claims,
    }
}

/// Builds `Γ(p_1, …, p_{n-1})` for an admissible tuple and checks that it is
/// a tight orientably-regular polytope of that type.
pub fn verify_gamma_family(sym: &SchlafliSymbol) -> Result<FamilyVerdict, FamilyError> {
    is_admissible(sym).map_err(FamilyError::NotAdmissible)?;
    let pres = gamma_tuple_presentation(sym)?;
    let group = group_of(&pres)?;
    Ok(verdict(sym, Family::Gamma, pres, &group, true))
}

/// Builds `Λ(k)` and checks that it is a tight non-orientably-regular
/// polyhedron of type `{3k, 4}` with a normal Klein 4-subgroup
/// `⟨x_2, x_1 x_2 x_1⟩` whose quotient has order `6k`.
pub fn verify_lambda_family(k: u32) -> Result<FamilyVerdict, FamilyError> {
    let pres = lambda_k_presentation(k)?;
    let sym = SchlafliSymbol::new(vec![3 * k, 4])?;
    let group = group_of(&pres)?;
    let mut v = verdict(&sym, Family::Lambda, pres, &group, false);
    let klein = klein_subgroup(&group);
    v.claims.insert("klein4_normal".into(), klein.normal && klein.order == 4 && klein.exponent_two);
    v.claims.insert(
        "klein4_quotient_6k".into(),
        group.order() / klein.order.max(1) == 6 * k as usize,
    );
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KleinCheck {
    pub order: usize,
    pub exponent_two: bool,
    pub normal: bool,
}

/// The subgroup `⟨x_2, x_1 x_2 x_1⟩` of a rank-3 group.
pub fn klein_subgroup(group: &Group) -> KleinCheck {
    let n = group.closure_words(&[Word::new([2]), Word::new([1, 2, 1])]);
    let exponent_two = n
        .indices()
        .iter()
        .all(|&e| group.element(e).then(group.element(e)).is_identity());
    KleinCheck {
        order: n.len(),
        exponent_two,
        normal: group.is_normal(&n),
    }
}

/// Which parabolic subgroup the flat amalgamation property is tested on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FapSide {
    /// The `k`-faces: keep `x_0, …, x_{k-1}`.
    Faces(usize),
    /// The co-`k`-faces: keep `x_{k+1}, …, x_{n-1}`.
    CoFaces(usize),
}

impl FapSide {
    pub fn two_faces() -> Self {
        FapSide::Faces(2)
    }

    /// Co-`(n-3)`-faces of a rank-`n` polytope.
    pub fn co_faces(rank: usize) -> Self {
        FapSide::CoFaces(rank.saturating_sub(3))
    }

    fn keep(self, rank: usize) -> BTreeSet<usize> {
        match self {
            FapSide::Faces(k) => (0..k.min(rank)).collect(),
            FapSide::CoFaces(k) => (k + 1..rank).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FapReport {
    pub quotient_order: u64,
    pub parabolic_order: u64,
    pub holds: bool,
}

/// Kills the generators outside the chosen parabolic subgroup and compares
/// the order of the resulting group with that of the parabolic subgroup.
/// The parabolic subgroup is always a quotient of the killed group, so equal
/// orders mean the relations `x_i = 1` present it.
pub fn check_fap(sym: &SchlafliSymbol, side: FapSide) -> Result<FapReport, FamilyError> {
    let pres = gamma_tuple_presentation(sym)?;
    let keep = side.keep(pres.ngens);
    let group = group_of(&pres)?;
    let parabolic_order = group.closure(&keep).len() as u64;
    let quotient = kill_generators(&pres, &keep);
    let quotient_order = regular_rep(&quotient, default_budget())?.degree as u64;
    Ok(FapReport {
        quotient_order,
        parabolic_order,
        holds: quotient_order == parabolic_order,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OeoReport {
    pub rep: PermRep,
    /// Indices (0-based) of the eight rotation-group relators that fail.
    pub failing_relators: Vec<usize>,
    pub orders: [u64; 3],
}

impl OeoReport {
    pub fn relators_hold(&self) -> bool {
        self.failing_relators.is_empty()
    }
}

/// Permutations `π_1, π_2, π_3` on `Z_{p_1} × Z_{p_2}` (point `(j, k)` is
/// `j·p_2 + k`) for the rotation subgroup of `Γ(p_1, p_2, p_3)` with `p_1`,
/// `p_3` odd and `p_2` an even divisor of `2p_1` and `2p_3`.
pub fn oeo_permutation_rep(p1: u32, p2: u32, p3: u32) -> Result<OeoReport, FamilyError> {
    if p1.is_multiple_of(2) || p3.is_multiple_of(2) || !p2.is_multiple_of(2) || !(2 * p1).is_multiple_of(p2) || !(2 * p3).is_multiple_of(p2) {
        return Err(FamilyError::PreconditionViolated(format!(
            "({p1},{p2},{p3}) needs p1, p3 odd and p2 an even divisor of 2p1 and 2p3"
        )));
    }
    let (a, b) = (p1 as i64, p2 as i64);
    let point = |j: i64, k: i64| (j.rem_euclid(a) * b + k.rem_euclid(b)) as usize;
    let split = |x: usize| (x as i64 / b, x as i64 % b);
    let degree = (a * b) as usize;
    let pi1 = Perm::from_fn(degree, |x| {
        let (j, k) = split(x);
        if k % 2 == 0 {
            point(j + 1, k)
        } else {
            point(j - 1, k - 2)
        }
    });
    let pi2 = Perm::from_fn(degree, |x| {
        let (j, k) = split(x);
        point(j, k + 1)
    });
    let pi3 = Perm::from_fn(degree, |x| {
        let (j, k) = split(x);
        if k % 2 == 0 {
            point(j, k - 2 * j)
        } else {
            point(j, k + 2 * (j - 1))
        }
    });
    let gens: Vec<Perm> = [pi1, pi2, pi3]
        .into_iter()
        .map(|p| p.expect("case-defined maps are bijections"))
        .collect();
    let [y1, y2, y3] = [&gens[0], &gens[1], &gens[2]];
    let y22 = y2.then(y2);
    let relators = [
        y1.pow(p1 as u64),
        y2.pow(p2 as u64),
        y3.pow(p3 as u64),
        y1.then(y2).pow(2),
        y2.then(y3).pow(2),
        y1.then(y2).then(y3).pow(2),
        y1.commutator(&y22),
        y3.commutator(&y22),
    ];
    let failing_relators = relators
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_identity())
        .map(|(i, _)| i)
        .collect();
    let orders = [gens[0].order(), gens[1].order(), gens[2].order()];
    Ok(OeoReport {
        rep: PermRep::new(degree, gens),
        failing_relators,
        orders,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgroupSplit {
    /// 1-based index `i` with `p_i = 2`.
    pub index: usize,
    pub prefix_order: u64,
    pub prefix_expected: u64,
    pub prefix_ok: bool,
    pub suffix_order: u64,
    pub suffix_expected: u64,
    pub suffix_ok: bool,
}

/// For every `p_i = 2`, checks `⟨x_0..x_i⟩ ≅ Γ(p_1..p_i)` and
/// `⟨x_{i-1}..x_{n-1}⟩ ≅ Γ(p_i..p_{n-1})`: the relators of the smaller
/// group hold on the shifted generators, and the orders agree.
pub fn subgroup_2_check(sym: &SchlafliSymbol) -> Result<Vec<SubgroupSplit>, FamilyError> {
    let e = sym.entries();
    if !e.contains(&2) {
        return Err(FamilyError::PreconditionViolated(format!(
            "{sym} has no entry equal to 2"
        )));
    }
    let group = group_of(&gamma_tuple_presentation(sym)?)?;
    let n = sym.rank();
    let part = |lo: usize, hi: usize, entries: &[u32]| -> Result<(u64, u64, bool), FamilyError> {
        let small = gamma_tuple_presentation(&SchlafliSymbol::new(entries.to_vec())?)?;
        let expected = regular_rep(&small, default_budget())?.degree as u64;
        let gens: BTreeSet<usize> = (lo..hi).collect();
        let order = group.closure(&gens).len() as u64;
        let images: Vec<Word> = (lo..hi).map(|g| Word::new([g])).collect();
        let hom = group.check_generator_map(&small, &images).homomorphism;
        Ok((order, expected, hom && order == expected))
    };
    let mut out = Vec::new();
    for i in (1..n).filter(|&i| e[i - 1] == 2) {
        let (prefix_order, prefix_expected, prefix_ok) = part(0, i + 1, &e[..i])?;
        let (suffix_order, suffix_expected, suffix_ok) = part(i - 1, n, &e[i - 1..])?;
        out.push(SubgroupSplit {
            index: i,
            prefix_order,
            prefix_expected,
            prefix_ok,
            suffix_order,
            suffix_expected,
            suffix_ok,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualityReport {
    pub forward: bool,
    pub backward: bool,
    pub orders_equal: bool,
}

impl DualityReport {
    pub fn isomorphic(&self) -> bool {
        self.forward && self.backward && self.orders_equal
    }
}

/// `x_i ↦ y_{n-1-i}` between `Γ(p_1..p_{n-1})` and `Γ(p_{n-1}..p_1)`, checked
/// as a homomorphism in both directions.
pub fn check_duality(sym: &SchlafliSymbol) -> Result<DualityReport, FamilyError> {
    let rev = sym.reversed();
    let (pa, pb) = (gamma_tuple_presentation(sym)?, gamma_tuple_presentation(&rev)?);
    let (ga, gb) = (group_of(&pa)?, group_of(&pb)?);
    let n = pa.ngens;
    let images: Vec<Word> = (0..n).map(|i| Word::new([n - 1 - i])).collect();
    let forward = gb.check_generator_map(&pa, &images);
    let backward = ga.check_generator_map(&pb, &images);
    Ok(DualityReport {
        forward: forward.homomorphism && forward.surjective,
        backward: backward.homomorphism && backward.surjective,
        orders_equal: ga.order() == gb.order(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sym(v: &[u32]) -> SchlafliSymbol {
        SchlafliSymbol::new(v.to_vec()).unwrap()
    }

    #[test]
    fn gamma_3_6() {
        let v = verify_gamma_family(&sym(&[3, 6])).unwrap();
        assert!(v.passes(), "{:?}", v.failed_claims());
        assert_eq!(v.group_order, 36);
        assert_eq!(v.expected_order, 36);
    }

    #[test]
    fn gamma_5_10_5() {
        let v = verify_gamma_family(&sym(&[5, 10, 5])).unwrap();
        assert!(v.passes(), "{:?}", v.failed_claims());
        assert_eq!(v.group_order, 500);
        assert_eq!(v.analysis.profile.schlafli, vec![5, 10, 5]);
    }

    #[test]
    fn gamma_3_6_6_3() {
        let v = verify_gamma_family(&sym(&[3, 6, 6, 3])).unwrap();
        assert!(v.passes(), "{:?}", v.failed_claims());
        assert_eq!(v.group_order, 648);
    }

    #[test]
    fn not_admissible() {
        match verify_gamma_family(&sym(&[3, 4])) {
            Err(FamilyError::NotAdmissible(w)) => {
                assert_eq!(w.to_string(), "p2=4 is not an even divisor of 2p1=6")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lambda_family() {
        for (k, order) in [(1, 24), (3, 72), (9, 216)] {
            let v = verify_lambda_family(k).unwrap();
            assert!(v.passes(), "k={k}: {:?}", v.failed_claims());
            assert_eq!(v.group_order, order);
            assert!(!v.orientable());
        }
        assert!(verify_lambda_family(2).is_err());
    }

    #[test]
    fn fap() {
        let r = check_fap(&sym(&[3, 6, 4]), FapSide::two_faces()).unwrap();
        assert!(r.holds);
        assert_eq!(r.parabolic_order, 6);
        assert!(check_fap(&sym(&[4, 6, 3]), FapSide::co_faces(4)).unwrap().holds);
        let r = check_fap(&sym(&[5]), FapSide::two_faces()).unwrap();
        assert!(r.holds && r.quotient_order == 10);
    }

    #[test]
    fn oeo_rep() {
        let r = oeo_permutation_rep(3, 6, 3).unwrap();
        assert!(r.relators_hold(), "{:?}", r.failing_relators);
        assert_eq!(r.orders[0], 3);
        assert_eq!(r.orders[1], 6);
        assert_eq!(3 % r.orders[2], 0);
        let r = oeo_permutation_rep(5, 10, 5).unwrap();
        assert_eq!(r.rep.degree, 50);
        assert!(r.relators_hold());
        assert!(oeo_permutation_rep(3, 4, 3).is_err());
    }

    #[test]
    fn subgroup_2_splits() {
        let s = subgroup_2_check(&sym(&[3, 2, 5])).unwrap();
        assert_eq!(s[0].prefix_order, 12);
        assert!(s[0].prefix_ok && s[0].suffix_ok);
        let s = subgroup_2_check(&sym(&[3, 2])).unwrap();
        assert_eq!((s[0].prefix_order, s[0].suffix_order), (12, 4));
        let s = subgroup_2_check(&sym(&[5, 2, 4, 4])).unwrap();
        assert!(s[0].suffix_ok);
        assert_eq!(s[0].suffix_order, 2 * 2 * 4 * 4);
        assert!(subgroup_2_check(&sym(&[3, 6])).is_err());
    }

    #[test]
    fn duality() {
        for t in [&[3, 6, 4][..], &[5, 10, 5], &[4, 4, 4]] {
            assert!(check_duality(&sym(t)).unwrap().isomorphic());
            let (a, b) = (
                verify_gamma_family(&sym(t)).unwrap(),
                verify_gamma_family(&sym(t).reversed()).unwrap(),
            );
            assert_eq!(a.passes(), b.passes());
        }
    }
}
