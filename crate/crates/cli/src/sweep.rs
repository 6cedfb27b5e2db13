//! Parameter sweeps over uniform set and multiset instances, kept as a
//! key-sorted CSV that can be extended by later runs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use crossint_core::arith::{binom, format_ratio, parse_ratio};
use crossint_core::bounds::ReductionProfile;
use crossint_core::search::SearchOptions;
use crossint_core::verify::{verify_multi, verify_nrs};
use crossint_core::{IntersectionParams, Ratio};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Nrs,
    Multi,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub kind: SweepKind,
    pub m: usize,
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub u: String,
    pub hypothesis_ok: bool,
    pub bound: String,
    pub search_max: String,
    pub agrees: bool,
    pub maximizers_are_stars: bool,
    /// `ok`, or `skipped` when the instance is over the size cap.
    pub status: String,
    pub runtime_ms: u64,
}

type Key = (SweepKind, usize, usize, usize, usize, usize, Ratio);

impl SweepRecord {
    fn key(&self) -> Result<Key, Failure> {
        let u = parse_ratio(&self.u).map_err(|e| Failure::Usage(e.to_string()))?;
        Ok((self.kind, self.m, self.n, self.r, self.s, self.t, u))
    }

    /// Inside the hypotheses but the bound or the star uniqueness failed.
    pub fn violation(&self) -> bool {
        self.status == "ok" && self.hypothesis_ok && !(self.agrees && self.maximizers_are_stars)
    }
}

#[derive(Clone, Debug)]
pub struct Grid {
    pub kind: SweepKind,
    pub m: Vec<usize>,
    /// `None` runs the diagonal `n = m`.
    pub n: Option<Vec<usize>>,
    pub r: Vec<usize>,
    /// `None` runs `s = r`.
    pub s: Option<Vec<usize>>,
    pub t: Vec<usize>,
    pub u: Ratio,
    /// Largest family size searched; bigger points are recorded as skipped.
    pub cap: usize,
}

impl Grid {
    /// Admissible points in key order: `1 <= t <= r <= s`, and for sets
    /// `r <= m`, `s <= n`.
    pub fn points(&self) -> Vec<ReductionProfile> {
        let mut out = Vec::new();
        for &m in &self.m {
            let ns = self.n.clone().unwrap_or_else(|| vec![m]);
            for &n in &ns {
                for &r in &self.r {
                    let ss = self.s.clone().unwrap_or_else(|| vec![r]);
                    for &s in &ss {
                        for &t in &self.t {
                            let sets_ok = self.kind == SweepKind::Multi || (r <= m && s <= n);
                            if m >= 1 && n >= 1 && sets_ok {
                                if let Ok(p) = ReductionProfile::new(m, n, r, s, t, self.u.clone()) {
                                    out.push(p);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn family_size(kind: SweepKind, n: usize, r: usize) -> usize {
    let (a, b) = match kind {
        SweepKind::Nrs => (n as i64, r as i64),
        SweepKind::Multi => ((n + r - 1) as i64, r as i64),
    };
    binom(a, b).try_into().unwrap_or(usize::MAX)
}

fn run_point(kind: SweepKind, p: &ReductionProfile, cap: usize, opts: &SearchOptions) -> Result<SweepRecord, Failure> {
    let mut rec = SweepRecord {
        kind,
        m: p.m,
        n: p.n,
        r: p.r,
        s: p.s,
        t: p.t,
        u: format_ratio(&p.u),
        hypothesis_ok: false,
        bound: String::new(),
        search_max: String::new(),
        agrees: false,
        maximizers_are_stars: false,
        status: "skipped".into(),
        runtime_ms: 0,
    };
    let bound = match kind {
        SweepKind::Nrs => p.nrs_bound(),
        SweepKind::Multi => p.multi_bound(),
    };
    rec.bound = format_ratio(&Ratio::from_integer(bound));
    if family_size(kind, p.m, p.r) > cap || family_size(kind, p.n, p.s) > cap {
        let threshold_ok = match kind {
            SweepKind::Nrs => p.nrs_threshold_ok(),
            SweepKind::Multi => p.multi_threshold_ok(),
        };
        rec.hypothesis_ok = threshold_ok && IntersectionParams { t: p.t, u: p.u.clone() }.in_proven_regime();
        return Ok(rec);
    }
    let start = Instant::now();
    let v = match kind {
        SweepKind::Nrs => verify_nrs(p, opts),
        SweepKind::Multi => verify_multi(p, opts),
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    rec.runtime_ms = start.elapsed().as_millis() as u64;
    rec.hypothesis_ok = v.hypothesis_ok;
    rec.search_max = format_ratio(&v.search_max);
    rec.agrees = v.agrees;
    rec.maximizers_are_stars = v.maximizers_are_stars;
    rec.status = "ok".into();
    Ok(rec)
}

/// Runs every grid point not already present in `existing` (all of them with
/// `force`) and returns the merged records in key order.
pub fn run(grid: &Grid, existing: Vec<SweepRecord>, force: bool, opts: &SearchOptions) -> Result<Vec<SweepRecord>, Failure> {
    let mut merged: BTreeMap<Key, SweepRecord> = BTreeMap::new();
    for rec in existing {
        merged.insert(rec.key()?, rec);
    }
    let todo: Vec<ReductionProfile> = grid
        .points()
        .into_iter()
        .filter(|p| force || !merged.contains_key(&(grid.kind, p.m, p.n, p.r, p.s, p.t, p.u.clone())))
        .collect();
    let fresh: Vec<SweepRecord> = todo
        .par_iter()
        .map(|p| run_point(grid.kind, p, grid.cap, opts))
        .collect::<Result<_, _>>()?;
    for rec in fresh {
        merged.insert(rec.key()?, rec);
    }
    Ok(merged.into_values().collect())
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRecord>, Failure> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    rd.deserialize()
        .map(|r| r.map_err(|e| Failure::Usage(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn to_csv(records: &[SweepRecord]) -> Result<String, Failure> {
    let mut wr = csv::Writer::from_writer(Vec::new());
    if records.is_empty() {
        wr.write_record(COLUMNS).map_err(csv_err)?;
    }
    for r in records {
        wr.serialize(r).map_err(csv_err)?;
    }
    let bytes = wr.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Usage(e.to_string())
}

pub const COLUMNS: [&str; 14] = [
    "kind",
    "m",
    "n",
    "r",
    "s",
    "t",
    "u",
    "hypothesis_ok",
    "bound",
    "search_max",
    "agrees",
    "maximizers_are_stars",
    "status",
    "runtime_ms",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crossint_core::arith::int;

    fn grid(kind: SweepKind, m: Vec<usize>) -> Grid {
        Grid { kind, m, n: None, r: vec![2], s: None, t: vec![1], u: int(2), cap: 200 }
    }

    #[test]
    fn set_grid_records() {
        let recs = run(&grid(SweepKind::Nrs, vec![4, 5, 6, 7]), vec![], false, &SearchOptions::default()).unwrap();
        assert_eq!(recs.len(), 4);
        let hyp: Vec<bool> = recs.iter().map(|r| r.hypothesis_ok).collect();
        assert_eq!(hyp, vec![false, false, true, true]);
        let stars: Vec<bool> = recs.iter().map(|r| r.maximizers_are_stars).collect();
        assert_eq!(stars, vec![false, true, true, true]);
        assert!(recs.iter().all(|r| r.agrees && r.status == "ok" && !r.violation()));
        assert_eq!(recs[0].search_max, "9/1");
    }

    #[test]
    fn multiset_grid_records() {
        let recs = run(&grid(SweepKind::Multi, vec![4, 5, 6]), vec![], false, &SearchOptions::default()).unwrap();
        let hyp: Vec<bool> = recs.iter().map(|r| r.hypothesis_ok).collect();
        assert_eq!(hyp, vec![false, true, true]);
        assert!(recs[1..].iter().all(|r| r.agrees && r.maximizers_are_stars));
    }

    #[test]
    fn csv_round_trip_and_merge() {
        let opts = SearchOptions::default();
        let first = run(&grid(SweepKind::Nrs, vec![5, 4]), vec![], false, &opts).unwrap();
        let text = to_csv(&first).unwrap();
        assert!(text.starts_with(&COLUMNS.join(",")));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        std::fs::write(&path, &text).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back, first);
        // existing keys are kept verbatim, new ones are added in key order
        let mut stale = back.clone();
        stale[0].runtime_ms = 123456;
        let merged = run(&grid(SweepKind::Nrs, vec![4, 5, 6]), stale, false, &opts).unwrap();
        assert_eq!(merged.len(), 3);
        assert_eq!(merged[0].runtime_ms, 123456);
        assert_eq!(merged.iter().map(|r| r.m).collect::<Vec<_>>(), vec![4, 5, 6]);
    }

    #[test]
    fn empty_grid_has_header_only() {
        let recs = run(&grid(SweepKind::Nrs, vec![]), vec![], false, &SearchOptions::default()).unwrap();
        assert_eq!(to_csv(&recs).unwrap(), format!("{}\n", COLUMNS.join(",")));
    }

    #[test]
    fn over_cap_is_skipped() {
        let mut g = grid(SweepKind::Nrs, vec![9]);
        g.cap = 20;
        let recs = run(&g, vec![], false, &SearchOptions::default()).unwrap();
        assert_eq!(recs[0].status, "skipped");
        assert_eq!(recs[0].bound, "64/1");
        assert!(!recs[0].violation());
    }
}
