use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use tightpoly::atlas::{self, AtlasEntry};
use tightpoly::classifier::{self, OrientabilityFilter, DEFAULT_INDEX_CAP};
use tightpoly::families::{self, analyse, FamilyError};
use tightpoly::group::{Group, DEFAULT_ELEMENT_CAP};
use tightpoly::par::Workers;
use tightpoly::todd_coxeter::{default_budget, regular_rep, set_default_budget, EnumerationError};
use tightpoly::words::{
    gamma_tuple_presentation, lambda_k_presentation, Presentation, SchlafliSymbol,
};

const EXIT_CLAIM: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "tightpoly", version, about = "Tight regular polytopes from string Coxeter groups")]
struct Cli {
    /// Coset budget for every enumeration.
    #[arg(long, global = true)]
    max_cosets: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify the tight polytope of an admissible tuple.
    Verify {
        #[arg(long, value_parser = parse_symbol)]
        tuple: SchlafliSymbol,
    },
    /// Verify every admissible tuple under a flag bound and write JSONL.
    Atlas {
        #[arg(long)]
        max_flags: u64,
        #[arg(long)]
        max_rank: usize,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (1 runs sequentially).
        #[arg(long)]
        threads: Option<usize>,
        /// Record wall time per entry (makes the file non-reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Find every tight regular polyhedron of a type.
    Classify {
        #[arg(long = "type", value_parser = parse_symbol)]
        ty: SchlafliSymbol,
        #[command(flatten)]
        orientation: Orientation,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Largest quotient order searched.
        #[arg(long, default_value_t = DEFAULT_INDEX_CAP)]
        cap: usize,
    },
    /// Run the full pipeline on a presentation file.
    Check {
        #[arg(long)]
        presentation: PathBuf,
    },
    /// Print a presentation from one of the builders.
    Family {
        #[command(subcommand)]
        which: FamilyKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
#[group(multiple = false)]
struct Orientation {
    #[arg(long)]
    orientable: bool,
    #[arg(long)]
    non_orientable: bool,
}

#[derive(Subcommand)]
enum FamilyKind {
    Gamma {
        #[arg(long, value_parser = parse_symbol)]
        tuple: SchlafliSymbol,
    },
    Lambda {
        #[arg(long)]
        k: u32,
    },
}

fn parse_symbol(s: &str) -> Result<SchlafliSymbol, String> {
    s.parse::<SchlafliSymbol>().map_err(|e| e.to_string())
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn family_exit(e: &FamilyError) -> u8 {
    if e.is_resource() {
        EXIT_BUDGET
    } else {
        EXIT_INPUT
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(b) = cli.max_cosets {
        set_default_budget(b);
    }
    match cli.command {
        Command::Verify { tuple } => verify(&tuple),
        Command::Atlas {
            max_flags,
            max_rank,
            out,
            threads,
            timings,
        } => run_atlas(max_flags, max_rank, &out, threads, timings),
        Command::Classify {
            ty,
            orientation,
            out,
            cap,
        } => classify(&ty, &orientation, out.as_deref(), cap),
        Command::Check { presentation } => check(&presentation),
        Command::Family { which, out } => family(which, out.as_deref()),
    }
}

fn verify(sym: &SchlafliSymbol) -> ExitCode {
    let v = match families::verify_gamma_family(sym) {
        Ok(v) => v,
        Err(FamilyError::NotAdmissible(w)) => return fail(EXIT_INPUT, format!("not admissible: {w}")),
        Err(e) => return fail(family_exit(&e), e),
    };
    let factors: Vec<String> = sym.entries().iter().map(|p| p.to_string()).collect();
    println!("Γ{}", sym.to_string().replace('{', "(").replace('}', ")"));
    println!(
        "order {} {} 2·{}",
        v.group_order,
        if v.group_order == v.expected_order { "=" } else { "≠" },
        factors.join("·")
    );
    for (claim, ok) in &v.claims {
        println!("  [{}] {claim}", if *ok { "pass" } else { "FAIL" });
    }
    if v.passes() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CLAIM)
    }
}

fn run_atlas(
    max_flags: u64,
    max_rank: usize,
    out: &std::path::Path,
    threads: Option<usize>,
    timings: bool,
) -> ExitCode {
    let tuples = match atlas::atlas_tuples(max_flags, max_rank) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let entries = match atlas::build_atlas(&tuples, Workers(threads), timings) {
        Ok(e) => e,
        Err(e) => {
            let code = if e.is_resource() { EXIT_BUDGET } else { EXIT_INPUT };
            return fail(code, e);
        }
    };
    if let Err(e) = atlas::write_atomic(out, &atlas::render_jsonl(&entries)) {
        return fail(EXIT_INPUT, e);
    }
    let failing: Vec<&AtlasEntry> = entries
        .iter()
        .filter(|e| !e.claims.values().all(|&ok| ok))
        .collect();
    println!("{} tuples written to {}", entries.len(), out.display());
    for e in &failing {
        println!("  FAIL {:?}", e.tuple);
    }
    if failing.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CLAIM)
    }
}

fn classify(
    sym: &SchlafliSymbol,
    orientation: &Orientation,
    out: Option<&std::path::Path>,
    cap: usize,
) -> ExitCode {
    let &[p, q] = sym.entries() else {
        return fail(EXIT_INPUT, "classify expects a type p,q");
    };
    let filter = if orientation.orientable {
        OrientabilityFilter::Orientable
    } else if orientation.non_orientable {
        OrientabilityFilter::NonOrientable
    } else {
        OrientabilityFilter::Any
    };
    let start = Instant::now();
    let records = match classifier::classify(p, q, filter, cap) {
        Ok(r) => r,
        Err(e) => {
            let code = if e.is_resource() { EXIT_BUDGET } else { EXIT_INPUT };
            return fail(code, e);
        }
    };
    println!("type {{{p},{q}}}: count {}", records.len());
    for r in &records {
        let mut notes = vec![if r.orientable { "orientable" } else { "non-orientable" }.to_string()];
        if r.isomorphic_to_gamma {
            notes.push(format!("≅ Γ({p},{q})"));
        }
        if r.isomorphic_to_lambda == Some(true) {
            notes.push(format!("≅ Λ({})", p / 3));
        }
        println!("  {} order {} {}", r.kernel_id, r.quotient_order, notes.join(", "));
    }
    if let Some(path) = out {
        let entries: Vec<AtlasEntry> = records
            .iter()
            .map(|r| AtlasEntry::from_census(r, None))
            .collect();
        if let Err(e) = atlas::write_atomic(path, &atlas::render_jsonl(&entries)) {
            return fail(EXIT_INPUT, e);
        }
    }
    eprintln!("classified in {:.2?}", start.elapsed());
    ExitCode::SUCCESS
}

fn check(path: &std::path::Path) -> ExitCode {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", path.display())),
    };
    let pres = match Presentation::parse_text(&text) {
        Ok(p) => p,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", path.display())),
    };
    let rep = match regular_rep(&pres, default_budget()) {
        Ok(r) => r,
        Err(e @ EnumerationError::BudgetExceeded { .. }) => return fail(EXIT_BUDGET, e),
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let group = match Group::new(&rep, DEFAULT_ELEMENT_CAP) {
        Ok(g) => g,
        Err(e) => return fail(EXIT_BUDGET, e),
    };
    let a = analyse(&group);
    let mut summary = Vec::new();
    if !a.profile.is_sggi {
        summary.push("not a string group generated by involutions".to_string());
    } else if let Some(w) = &a.profile.witness {
        summary.push(format!("intersection condition FAILS at {w}"));
    } else {
        summary.push("string C-group".to_string());
    }
    if a.polytope.passes() {
        match (a.tight, &a.combinatorial_type) {
            (Some(true), _) => summary.push("tight".to_string()),
            (Some(false), Some(t)) => {
                let bound = 2 * t.iter().map(|&p| p as u64).product::<u64>();
                summary.push(format!("NOT tight ({} flags vs {bound})", a.flag_count));
            }
            _ => summary.push("not equivelar".to_string()),
        }
    } else if let Some(f) = &a.polytope.first_failure {
        summary.push(format!("not a polytope ({f})"));
    }
    summary.push(if a.profile.orientable() { "orientable" } else { "non-orientable" }.to_string());
    if let Some(t) = &a.combinatorial_type {
        let parts: Vec<String> = t.iter().map(|p| p.to_string()).collect();
        summary.push(format!("type {{{}}}", parts.join(",")));
    }
    println!("{}", summary.join(", "));
    println!("group order {}, flags {}", group.order(), a.flag_count);
    println!("orders of consecutive products {:?}", a.profile.schlafli);
    if a.profile.is_string_c_group && a.polytope.passes() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CLAIM)
    }
}

fn family(which: FamilyKind, out: Option<&std::path::Path>) -> ExitCode {
    let pres = match which {
        FamilyKind::Gamma { tuple } => gamma_tuple_presentation(&tuple),
        FamilyKind::Lambda { k } => lambda_k_presentation(k),
    };
    let text = match pres {
        Ok(p) => p.to_text(),
        Err(e) => return fail(EXIT_INPUT, e),
    };
    match out {
        Some(path) => {
            if let Err(e) = atlas::write_atomic(path, &text) {
                return fail(EXIT_INPUT, e);
            }
        }
        None => print!("{text}"),
    }
    ExitCode::SUCCESS
}
