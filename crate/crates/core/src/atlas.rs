//! Batch verification of admissible tuples and the JSONL atlas format.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::CensusRecord;
use crate::families::{verify_gamma_family, Family, FamilyError, FamilyVerdict};
use crate::par::{self, Workers};
use crate::words::{is_admissible, SchlafliSymbol};

pub const ATLAS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AtlasError {
    #[error("max-flags must be at least 4 (got {0})")]
    MaxFlagsTooSmall(u64),
    #[error("max-rank must be at least 3 (got {0})")]
    MaxRankTooSmall(usize),
    #[error("tuple {tuple:?}: {source}")]
    Family {
        tuple: Vec<u32>,
        #[source]
        source: FamilyError,
    },
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AtlasError {
    pub fn is_resource(&self) -> bool {
        matches!(self, AtlasError::Family { source, .. } if source.is_resource())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasEntry {
    pub schema_version: u32,
    pub tuple: Vec<u32>,
    pub family: Family,
    pub group_order: u64,
    pub flag_count: u64,
    pub tight: bool,
    pub orientable: bool,
    pub string_c_group: bool,
    pub claims: BTreeMap<String, bool>,
    /// Wall time, only recorded on request so files stay reproducible.
    pub ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_id: Option<String>,
}

impl AtlasEntry {
    pub fn from_verdict(v: &FamilyVerdict, ms: Option<u64>) -> Self {
        AtlasEntry {
            schema_version: ATLAS_SCHEMA_VERSION,
            tuple: v.tuple.clone(),
            family: v.family,
            group_order: v.group_order,
            flag_count: v.analysis.flag_count,
            tight: v.tight(),
            orientable: v.orientable(),
            string_c_group: v.analysis.profile.is_string_c_group,
            claims: v.claims.clone(),
            ms,
            source: None,
            kernel_id: None,
        }
    }

    pub fn from_census(r: &CensusRecord, ms: Option<u64>) -> Self {
        let mut claims = BTreeMap::new();
        claims.insert("polytope".to_string(), r.polytope_verified);
        claims.insert("isomorphic_to_gamma".to_string(), r.isomorphic_to_gamma);
        if let Some(l) = r.isomorphic_to_lambda {
            claims.insert("isomorphic_to_lambda".to_string(), l);
        }
        if let Some(c) = r.omega_central {
            claims.insert("omega_central".to_string(), c);
            claims.insert("q_divides_2p".to_string(), r.q_divides_2p);
        }
        AtlasEntry {
            schema_version: ATLAS_SCHEMA_VERSION,
            tuple: vec![r.p, r.q],
            family: Family::Census,
            group_order: r.quotient_order,
            flag_count: r.flag_count,
            tight: r.tight,
            orientable: r.orientable,
            string_c_group: r.profile.is_string_c_group,
            claims,
            ms,
            source: Some("census".to_string()),
            kernel_id: Some(r.kernel_id.clone()),
        }
    }

    /// Schema and internal-consistency checks.
    pub fn validate(&self) -> Result<(), String> {
        if self.schema_version != ATLAS_SCHEMA_VERSION {
            return Err(format!("unsupported schema_version {}", self.schema_version));
        }
        if self.tuple.is_empty() || self.tuple.iter().any(|&p| p < 2) {
            return Err(format!("bad tuple {:?}", self.tuple));
        }
        let verified = self.claims.values().all(|&ok| ok);
        if verified && self.flag_count != self.group_order {
            return Err(format!(
                "verified entry has {} flags but group order {}",
                self.flag_count, self.group_order
            ));
        }
        for (name, value) in [
            ("tight", self.tight),
            ("string_c_group", self.string_c_group),
        ] {
            if self.claims.get(name).is_some_and(|&c| c != value) {
                return Err(format!("field {name} disagrees with its claim"));
            }
        }
        if self.tight && self.group_order != 2 * self.tuple.iter().map(|&p| p as u64).product::<u64>() {
            return Err("tight entry does not have 2·∏p flags".into());
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("atlas entries serialize")
    }
}

/// Admissible tuples of length `2..=max_rank-1` with entries `≥ 2` and
/// `2 ∏ p_i ≤ max_flags`, in ascending lexicographic order.
pub fn atlas_tuples(max_flags: u64, max_rank: usize) -> Result<Vec<SchlafliSymbol>, AtlasError> {
    if max_flags < 4 {
        return Err(AtlasError::MaxFlagsTooSmall(max_flags));
    }
    if max_rank < 3 {
        return Err(AtlasError::MaxRankTooSmall(max_rank));
    }
    let budget = max_flags / 2;
    let mut out = Vec::new();
    let mut prefix = Vec::new();
    extend_tuples(&mut prefix, 1, budget, max_rank - 1, &mut out);
    out.sort();
    Ok(out
        .into_iter()
        .filter_map(|t| SchlafliSymbol::new(t).ok())
        .filter(|s| is_admissible(s).is_ok())
        .collect())
}

fn extend_tuples(prefix: &mut Vec<u32>, product: u64, budget: u64, max_len: usize, out: &mut Vec<Vec<u32>>) {
    if prefix.len() >= 2 {
        out.push(prefix.clone());
    }
    if prefix.len() == max_len {
        return;
    }
    let mut p = 2u64;
    while product * p <= budget {
        prefix.push(p as u32);
        extend_tuples(prefix, product * p, budget, max_len, out);
        prefix.pop();
        p += 1;
    }
}

/// Verifies every tuple, in input order. Fails on the first tuple (in input
/// order) that could not be verified at all.
pub fn build_atlas(
    tuples: &[SchlafliSymbol],
    workers: Workers,
    timings: bool,
) -> Result<Vec<AtlasEntry>, AtlasError> {
    let results = par::map(tuples, workers, |sym| {
        let start = Instant::now();
        let v = verify_gamma_family(sym);
        let ms = timings.then(|| start.elapsed().as_millis() as u64);
        v.map(|v| AtlasEntry::from_verdict(&v, ms))
            .map_err(|source| AtlasError::Family {
                tuple: sym.entries().to_vec(),
                source,
            })
    });
    results.into_iter().collect()
}

pub fn render_jsonl(entries: &[AtlasEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        out.push_str(&e.to_line());
        out.push('\n');
    }
    out
}

/// Writes through a temporary file in the destination directory and renames
/// it into place, so a failed run never leaves a partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), AtlasError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| AtlasError::Io(e.error))?;
    Ok(())
}

pub fn parse_atlas(text: &str) -> Result<Vec<AtlasEntry>, AtlasError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let invalid = |message: String| AtlasError::Invalid {
            line: i + 1,
            message,
        };
        let entry: AtlasEntry = serde_json::from_str(line).map_err(|e| invalid(e.to_string()))?;
        entry.validate().map_err(invalid)?;
        out.push(entry);
    }
    Ok(out)
}

pub fn load_atlas(path: &Path) -> Result<Vec<AtlasEntry>, AtlasError> {
    parse_atlas(&fs::read_to_string(path)?)
}
