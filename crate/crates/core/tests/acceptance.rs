//! Acceptance suite: twelve end-to-end criteria, one PASS/FAIL line each.
//! Runs without the libtest harness so the lines always reach the output.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use tightpoly::classifier::{classify, classify_tight, CensusRecord, OrientabilityFilter};
use tightpoly::families::{
    check_fap, group_of, oeo_permutation_rep, verify_gamma_family, verify_lambda_family, FapSide,
};
use tightpoly::group::{standard_isomorphic, Conjugation, Group};
use tightpoly::par::{self, Workers};
use tightpoly::poset::{build_poset, PosetError};
use tightpoly::sggi::{profile, rotation_subgroup};
use tightpoly::todd_coxeter::{group_order, table_perm_rep, DEFAULT_MAX_COSETS};
use tightpoly::words::{
    coxeter_presentation, gamma_pq_presentation, gamma_tuple_presentation,
    lambda_k_presentation, SchlafliSymbol, Word,
};

const HIGHER_RANK: [&[u32]; 7] = [
    &[3, 6, 4],
    &[6, 3, 6],
    &[3, 6, 3],
    &[5, 10, 5],
    &[3, 6, 6, 3],
    &[3, 6, 3, 6],
    &[4, 4, 4, 4],
];

fn sym(v: &[u32]) -> SchlafliSymbol {
    SchlafliSymbol::new(v.to_vec()).unwrap()
}

/// `(p, q)` with `p` odd and `q` an even divisor of `2p`, for the odd `p` listed.
fn order_grid() -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for p in [3u32, 5, 7, 9] {
        for q in (2..=2 * p).step_by(2) {
            if (2 * p) % q == 0 {
                out.push((p, q));
            }
        }
    }
    out
}

fn small_types() -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for p in 2..=25u32 {
        for q in 2..=25u32 {
            if 2 * p * q <= 100 {
                out.push((p, q));
            }
        }
    }
    out
}

fn census(types: &[(u32, u32)], filter: OrientabilityFilter) -> Vec<CensusRecord> {
    par::map(types, Workers::default(), |&(p, q)| classify(p, q, filter, 128).unwrap())
        .into_iter()
        .flatten()
        .collect()
}

fn record_group(r: &CensusRecord) -> Group {
    Group::new(&table_perm_rep(&r.table), 5000).unwrap()
}

/// Every group the criteria build, with the type it should have.
fn all_instances() -> Vec<(String, Group)> {
    let mut out = Vec::new();
    for (p, q) in order_grid() {
        out.push((format!("Γ({p},{q})"), group_of(&gamma_pq_presentation(p, q).unwrap()).unwrap()));
    }
    for k in [1, 3, 5, 7] {
        out.push((format!("Λ({k})"), group_of(&lambda_k_presentation(k).unwrap()).unwrap()));
    }
    for t in HIGHER_RANK {
        out.push((format!("Γ{t:?}"), group_of(&gamma_tuple_presentation(&sym(t)).unwrap()).unwrap()));
    }
    let mut types = small_types();
    types.push((4, 8));
    for r in census(&types, OrientabilityFilter::Any) {
        out.push((format!("census {{{},{}}} {}", r.p, r.q, r.kernel_id), record_group(&r)));
    }
    out
}

fn time_limit(label: &str, limit: Duration, start: Instant) {
    let t = start.elapsed();
    assert!(t < limit, "{label} took {t:.2?} (limit {limit:?})");
}

// 1
fn order_grid_criterion() -> String {
    let grid = order_grid();
    for &(p, q) in &grid {
        let start = Instant::now();
        let order = group_order(&gamma_pq_presentation(p, q).unwrap(), DEFAULT_MAX_COSETS).unwrap();
        assert_eq!(order, 2 * p as u64 * q as u64, "|Γ({p},{q})|");
        time_limit(&format!("Γ({p},{q})"), Duration::from_secs(1), start);
    }
    format!("{} groups of order 2pq", grid.len())
}

// 2
fn classification_grid() -> String {
    let start = Instant::now();
    let types = small_types();
    let results = par::map(&types, Workers::default(), |&(p, q)| {
        ((p, q), classify_tight(p, q, true).unwrap())
    });
    let mut nonempty = 0;
    for ((p, q), records) in &results {
        let (p, q) = (*p, *q);
        let expected = match (p % 2, q % 2) {
            (0, 0) => true,
            (1, 0) => (2 * p) % q == 0,
            (0, 1) => (2 * q) % p == 0,
            _ => false,
        };
        assert_eq!(!records.is_empty(), expected, "type {{{p},{q}}}");
        if expected {
            nonempty += 1;
        }
        if p % 2 == 1 && expected {
            assert_eq!(records.len(), 1, "type {{{p},{q}}} should be unique");
            let g = record_group(&records[0]);
            let gamma = group_of(&gamma_pq_presentation(p, q).unwrap()).unwrap();
            assert!(standard_isomorphic(&g, &gamma), "{{{p},{q}}} ≇ Γ({p},{q})");
            assert!(records[0].isomorphic_to_gamma);
        }
    }
    time_limit("classification grid", Duration::from_secs(600), start);
    format!("{} types, {} nonempty, {:.2?}", types.len(), nonempty, start.elapsed())
}

// 3
fn non_uniqueness() -> String {
    let start = Instant::now();
    let records = classify_tight(4, 8, true).unwrap();
    time_limit("{4,8}", Duration::from_secs(300), start);
    assert!(records.len() >= 2, "only {} records", records.len());
    let groups: Vec<Group> = records.iter().map(record_group).collect();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            assert!(!standard_isomorphic(&groups[i], &groups[j]));
            assert!(!standard_isomorphic(&groups[j], &groups[i]));
        }
    }
    format!("{} pairwise non-isomorphic records", records.len())
}

// 4
fn lambda_family() -> String {
    for k in [1u32, 3, 5, 7] {
        let start = Instant::now();
        let v = verify_lambda_family(k).unwrap();
        time_limit(&format!("Λ({k})"), Duration::from_secs(2), start);
        assert!(v.passes(), "Λ({k}) failed {:?}", v.failed_claims());
        assert_eq!(v.group_order, 24 * k as u64);
        assert_eq!(v.analysis.profile.schlafli, vec![3 * k, 4]);
        assert!(v.analysis.profile.is_string_c_group && v.tight() && !v.orientable());
        let g = group_of(&v.presentation).unwrap();
        let n = g.closure_words(&[Word::new([2]), Word::new([1, 2, 1])]);
        assert_eq!(n.len(), 4);
        assert!(g.is_normal(&n));
        assert_eq!(g.order() / n.len(), 6 * k as usize);
    }
    "k = 1, 3, 5, 7".into()
}

// 5
fn higher_ranks() -> String {
    for t in HIGHER_RANK {
        let start = Instant::now();
        let v = verify_gamma_family(&sym(t)).unwrap();
        time_limit(&format!("{t:?}"), Duration::from_secs(30), start);
        assert!(v.passes(), "{t:?} failed {:?}", v.failed_claims());
        assert_eq!(v.group_order, 2 * t.iter().map(|&p| p as u64).product::<u64>());
        assert!(v.group_order <= 2000);
        assert_eq!(v.analysis.profile.schlafli, t);
        assert!(v.tight() && v.orientable());
    }
    format!("{} tuples", HIGHER_RANK.len())
}

// 6
fn tight_iff_flat() -> String {
    let instances = all_instances();
    for (name, g) in &instances {
        let poset = build_poset(g);
        match poset.is_tight() {
            Ok(t) => assert!(t.tight, "{name} is not tight"),
            Err(PosetError::RouteDisagreement { .. }) => panic!("{name}: routes disagree"),
            Err(e) => panic!("{name}: {e}"),
        }
    }
    for (t, flags, bound) in [(&[4u32, 3][..], 48u64, 24u64), (&[3, 3], 24, 18)] {
        let g = group_of(&coxeter_presentation(&sym(t))).unwrap();
        let poset = build_poset(&g);
        let r = poset.is_tight().unwrap();
        assert!(!r.tight && r.flags == flags && r.bound == bound, "{t:?}: {r:?}");
        assert_eq!(poset.flags().unwrap().len() as u64, flags);
        assert!(!(0..=poset.rank() - 3).all(|i| poset.is_flat(i, i + 2)));
    }
    format!("{} instances agree, cube and simplex not tight", instances.len())
}

// 7
fn conjugation_of_squares() -> String {
    let mut checked = 0;
    let mut violations = 0;
    for t in [&[3u32, 6, 4][..], &[4, 4, 4]] {
        let g = group_of(&gamma_tuple_presentation(&sym(t)).unwrap()).unwrap();
        for i in 1..=t.len() {
            if t[i - 1] % 2 != 0 {
                continue;
            }
            let w = Word::new([i - 1, i]).pow(2);
            for x in 0..g.ngens() {
                checked += 1;
                if g.conjugation_class(&Word::new([x]), &w) == Conjugation::Neither {
                    violations += 1;
                }
            }
        }
    }
    assert_eq!(violations, 0);
    format!("{checked} conjugations, 0 violations")
}

// 8
fn fap() -> String {
    let a = check_fap(&sym(&[3, 6, 4]), FapSide::two_faces()).unwrap();
    let b = check_fap(&sym(&[4, 6, 3]), FapSide::co_faces(4)).unwrap();
    assert!(a.holds, "{a:?}");
    assert!(b.holds, "{b:?}");
    format!("orders {} and {}", a.parabolic_order, b.parabolic_order)
}

// 9
fn permutation_rep() -> String {
    for (p1, p2, p3) in [(3u32, 6u32, 3u32), (5, 10, 5)] {
        let r = oeo_permutation_rep(p1, p2, p3).unwrap();
        assert!(r.relators_hold(), "({p1},{p2},{p3}) fails {:?}", r.failing_relators);
        let gens = &r.rep.gens;
        assert_eq!(gens[1].order(), p2 as u64);
        assert_eq!((p2 as u64 / 2) % gens[2].order(), 0);
    }
    "(3,6,3) and (5,10,5)".into()
}

// 10
fn central_square() -> String {
    let mut types = small_types();
    types.push((4, 8));
    let records = census(&types, OrientabilityFilter::Orientable);
    let mut checked = 0;
    for r in records.iter().filter(|r| r.p % 2 == 1) {
        let g = record_group(r);
        assert_eq!(rotation_subgroup(&g).len() * 2, g.order());
        let rot = rotation_subgroup(&g);
        let omega = g.word_element(&Word::new([1, 2, 1, 2]));
        for &e in rot.indices() {
            assert_eq!(g.mul(e, omega), g.mul(omega, e), "{{{},{}}}", r.p, r.q);
        }
        assert_eq!((2 * r.p) % r.q, 0, "{{{},{}}}", r.p, r.q);
        checked += 1;
    }
    assert!(checked > 0);
    format!("{checked} orientable records with p odd")
}

// 11
fn polytope_axioms() -> String {
    let mut instances = all_instances();
    for t in [&[4u32, 3][..], &[3, 3], &[2], &[5]] {
        instances.push((format!("[{t:?}]"), group_of(&coxeter_presentation(&sym(t))).unwrap()));
    }
    for (name, g) in &instances {
        let poset = build_poset(g);
        let report = poset.verify_polytope();
        assert!(report.passes(), "{name}: {:?}", report.first_failure);
        assert_eq!(poset.flag_count(), g.order() as u64, "{name}");
        let prof = profile(g);
        assert!(prof.is_string_c_group, "{name}");
        if g.ngens() >= 3 {
            assert_eq!(poset.combinatorial_schlafli().unwrap().entries(), prof.schlafli, "{name}");
        }
    }
    format!("{} instances", instances.len())
}

// 12
fn determinism() -> String {
    let dir = std::env::temp_dir().join(format!("tightpoly-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let run = |name: &str, threads: Option<usize>| -> Vec<u8> {
        let out = dir.join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_tightpoly"));
        cmd.args(["atlas", "--max-flags", "500", "--max-rank", "4", "--out"]).arg(&out);
        if let Some(t) = threads {
            cmd.args(["--threads", &t.to_string()]);
        }
        let status = cmd.status().unwrap();
        assert!(status.success(), "atlas exited with {status}");
        std::fs::read(&out).unwrap()
    };
    let a = run("a.jsonl", None);
    let b = run("b.jsonl", None);
    let c = run("c.jsonl", Some(1));
    let d = run("d.jsonl", Some(4));
    std::fs::remove_dir_all(&dir).ok();
    assert!(!a.is_empty());
    assert_eq!(a, b, "two runs differ");
    assert_eq!(a, c, "1 thread differs");
    assert_eq!(a, d, "4 threads differ");
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    let tuples: BTreeSet<&[u8]> = a.split(|&c| c == b'\n').filter(|l| !l.is_empty()).collect();
    assert_eq!(tuples.len(), lines);
    format!("{lines} entries, byte-identical across runs and thread counts")
}

fn main() {
    let criteria: [(&str, fn() -> String); 12] = [
        ("order grid", order_grid_criterion),
        ("classification grid", classification_grid),
        ("non-uniqueness of {4,8}", non_uniqueness),
        ("Λ family", lambda_family),
        ("higher ranks", higher_ranks),
        ("tight iff flat", tight_iff_flat),
        ("conjugation of squares", conjugation_of_squares),
        ("flat amalgamation property", fap),
        ("permutation representation", permutation_rep),
        ("central square in rotation group", central_square),
        ("polytope axioms", polytope_axioms),
        ("atlas determinism", determinism),
    ];
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if filter.as_deref().is_some_and(|s| !name.contains(s)) {
            continue;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f));
        let t = start.elapsed();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({t:.2?})", i + 1),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("criterion {:>2} FAIL  {name}: {msg} ({t:.2?})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
