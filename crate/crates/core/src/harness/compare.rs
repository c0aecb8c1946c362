use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{parse_records, EpisodeRecord, HarnessError, SummaryReport};

#[derive(Debug, Clone, PartialEq)]
pub struct PairedRow {
    pub seed: u64,
    pub a: f64,
    pub b: f64,
    pub delta: f64,
    pub finesses_a: usize,
    pub finesses_b: usize,
}

/// Per-seed paired comparison of two runs, `B - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<PairedRow>,
    pub mean_delta: f64,
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    pub finesse_delta: i64,
}

pub fn compare(a: &[EpisodeRecord], b: &[EpisodeRecord]) -> Result<Comparison, HarnessError> {
    let index = |rs: &[EpisodeRecord]| -> BTreeMap<u64, (f64, usize)> {
        rs.iter().map(|r| (r.seed, (r.total_return, r.completed_finesses()))).collect()
    };
    let (ia, ib) = (index(a), index(b));
    let only_a = ia.keys().filter(|s| !ib.contains_key(s)).count();
    let only_b = ib.keys().filter(|s| !ia.contains_key(s)).count();
    if only_a > 0 || only_b > 0 || ia.len() != a.len() || ib.len() != b.len() {
        return Err(HarnessError::MismatchedSeeds { only_a, only_b });
    }
    let rows: Vec<PairedRow> = ia
        .iter()
        .map(|(&seed, &(ra, fa))| {
            let (rb, fb) = ib[&seed];
            PairedRow {
                seed,
                a: ra,
                b: rb,
                delta: rb - ra,
                finesses_a: fa,
                finesses_b: fb,
            }
        })
        .collect();
    let n = rows.len().max(1) as f64;
    Ok(Comparison {
        mean_delta: rows.iter().map(|r| r.delta).sum::<f64>() / n,
        wins: rows.iter().filter(|r| r.delta > 0.0).count(),
        losses: rows.iter().filter(|r| r.delta < 0.0).count(),
        ties: rows.iter().filter(|r| r.delta == 0.0).count(),
        finesse_delta: rows.iter().map(|r| r.finesses_b as i64 - r.finesses_a as i64).sum(),
        rows,
    })
}

impl Comparison {
    /// Per-seed table followed by `#`-prefixed totals.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("seed\ta\tb\tdelta\tfinesses_a\tfinesses_b\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}\t{}\t{}\t{}\t{}\t{}", r.seed, r.a, r.b, r.delta, r.finesses_a, r.finesses_b);
        }
        let _ = writeln!(out, "# episodes\t{}", self.rows.len());
        let _ = writeln!(out, "# mean_delta\t{}", self.mean_delta);
        let _ = writeln!(out, "# wins/losses/ties\t{}/{}/{}", self.wins, self.losses, self.ties);
        let _ = writeln!(out, "# finesse_delta\t{}", self.finesse_delta);
        out
    }
}

/// Loads a run directory (`episodes.jsonl` plus optional `summary.tsv`) or
/// a bare episodes file.
pub fn load_run(path: &Path) -> Result<(Option<SummaryReport>, Vec<EpisodeRecord>), HarnessError> {
    let read = |p: &Path| fs::read_to_string(p).map_err(|e| HarnessError::io(p, e));
    if path.is_dir() {
        let records = parse_records(&read(&path.join("episodes.jsonl"))?)?;
        let summary_path = path.join("summary.tsv");
        let summary = if summary_path.exists() {
            Some(SummaryReport::from_tsv(&read(&summary_path)?)?)
        } else {
            None
        };
        Ok((summary, records))
    } else {
        Ok((None, parse_records(&read(path)?)?))
    }
}

/// Compares two stored runs, checking that they share the environment.
pub fn compare_paths(a: &Path, b: &Path) -> Result<Comparison, HarnessError> {
    let (sa, ra) = load_run(a)?;
    let (sb, rb) = load_run(b)?;
    if let (Some(sa), Some(sb)) = (&sa, &sb) {
        if sa.env != sb.env {
            return Err(HarnessError::MismatchedEnv(sa.env.clone(), sb.env.clone()));
        }
    }
    compare(&ra, &rb)
}
