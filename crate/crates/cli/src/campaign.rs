//! Campaigns: run a set of per-instance checks over every digraph on `n`
//! vertices, or over a seeded random sample, on a bounded worker pool.
//!
//! Per-instance results fold into a [`Tally`], whose merge is commutative and
//! associative, and the final tally is sorted before it is reported. Worker
//! count and scheduling therefore never reach the report.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use qkforge_core::genspace::{self, ENUMERATION_CAP, MASK_CAP};
use qkforge_core::{ArcMask, Check, Counterexample, Digraph, Selector};

#[derive(Debug, thiserror::Error)]
pub enum CampaignError {
    #[error(transparent)]
    Core(#[from] qkforge_core::Error),
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CampaignError + '_ {
    move |source| CampaignError::Io { path: path.to_owned(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exhaustive,
    Sample,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exhaustive" => Ok(Mode::Exhaustive),
            "sample" => Ok(Mode::Sample),
            other => Err(format!("unknown mode `{other}` (expected exhaustive or sample)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exhaustive => "exhaustive",
            Mode::Sample => "sample",
        })
    }
}

#[derive(Debug, Clone)]
pub struct CampaignConfig {
    pub mode: Mode,
    pub n: usize,
    pub checks: Vec<Check>,
    pub selector: Selector,
    pub workers: usize,
    /// Sampling only.
    pub seed: u64,
    pub p: f64,
    pub count: u64,
    /// Where `report.json` and escrow files go; `None` keeps everything in memory.
    pub out: Option<PathBuf>,
}

impl CampaignConfig {
    pub fn exhaustive(n: usize, checks: Vec<Check>) -> Self {
        CampaignConfig {
            mode: Mode::Exhaustive,
            n,
            checks,
            selector: Selector::Lex,
            workers: 1,
            seed: 0,
            p: 0.5,
            count: 0,
            out: None,
        }
    }

    pub fn sample(n: usize, p: f64, count: u64, seed: u64, checks: Vec<Check>) -> Self {
        CampaignConfig { mode: Mode::Sample, p, count, seed, ..CampaignConfig::exhaustive(n, checks) }
    }

    fn validate(&self) -> Result<(), CampaignError> {
        if self.checks.is_empty() {
            return Err(CampaignError::Config("no checks selected".into()));
        }
        if self.workers == 0 {
            return Err(CampaignError::Config("worker count must be positive".into()));
        }
        match self.mode {
            Mode::Exhaustive if self.n > ENUMERATION_CAP => {
                Err(qkforge_core::Error::CapExceeded { n: self.n, cap: ENUMERATION_CAP }.into())
            }
            Mode::Sample if self.n > MASK_CAP => {
                Err(qkforge_core::Error::CapExceeded { n: self.n, cap: MASK_CAP }.into())
            }
            Mode::Sample if !(0.0..=1.0).contains(&self.p) => {
                Err(qkforge_core::Error::InvalidProbability(self.p).into())
            }
            _ => Ok(()),
        }
    }
}

/// Order-independent aggregate of per-instance results.
#[derive(Debug, Clone, Default)]
struct Tally {
    instances: u64,
    checked: BTreeMap<Check, u64>,
    failures: Vec<Counterexample>,
    notes: BTreeMap<String, u64>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.instances += other.instances;
        for (k, v) in other.checked {
            *self.checked.entry(k).or_default() += v;
        }
        self.failures.extend(other.failures);
        for (k, v) in other.notes {
            *self.notes.entry(k).or_default() += v;
        }
        self
    }

    fn observe(mut self, d: &Digraph, checks: &[Check], selector: Selector) -> Tally {
        let mut any = false;
        for &check in checks {
            let Some(outcome) = check.run(d, selector) else { continue };
            any = true;
            *self.checked.entry(check).or_default() += 1;
            for note in &outcome.notes {
                *self.notes.entry((*note).to_owned()).or_default() += 1;
            }
            if let Some(evidence) = outcome.violation {
                let id = ArcMask::of(d).map(ArcMask::id).unwrap_or_else(|_| format!("{}:?", d.n()));
                self.failures.push(Counterexample { id, kind: check, selector, graph: d.clone(), evidence });
            }
        }
        if any {
            self.instances += 1;
        }
        self
    }
}

/// The reproducible part of a campaign's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub mode: Mode,
    pub n: usize,
    pub selector: Selector,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sampling: Option<Sampling>,
    /// Instances at least one selected check applied to.
    pub instance_count: u64,
    pub checked: BTreeMap<Check, u64>,
    pub axiom_witness_failures: u64,
    pub bound_failures: u64,
    pub lemma_check_failures: BTreeMap<Check, u64>,
    /// One `"n:mask"` per escrowed violation, sorted by mask then check.
    pub counterexample_ids: Vec<String>,
    pub escrow_files: Vec<String>,
    pub notes: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    pub p: f64,
    pub count: u64,
    pub seed: u64,
}

impl CampaignReport {
    pub fn failure_count(&self) -> u64 {
        self.axiom_witness_failures + self.bound_failures + self.lemma_check_failures.values().sum::<u64>()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises") + "\n"
    }

    /// Header line plus one data line.
    pub fn to_csv(&self) -> String {
        let checks: Vec<&str> = self.checks.iter().map(|c| c.name()).collect();
        let lemma: Vec<String> =
            self.lemma_check_failures.iter().map(|(c, v)| format!("{}={v}", c.name())).collect();
        let (p, count, seed) = match &self.sampling {
            Some(s) => (s.p.to_string(), s.count.to_string(), s.seed.to_string()),
            None => Default::default(),
        };
        format!(
            "mode,n,selector,checks,p,count,seed,instance_count,axiom_witness_failures,bound_failures,lemma_check_failures,counterexamples\n\
             {},{},{},{},{},{},{},{},{},{},{},{}\n",
            self.mode,
            self.n,
            self.selector,
            checks.join(";"),
            p,
            count,
            seed,
            self.instance_count,
            self.axiom_witness_failures,
            self.bound_failures,
            lemma.join(";"),
            self.counterexample_ids.len(),
        )
    }
}

#[derive(Debug, Clone)]
pub struct CampaignOutcome {
    pub report: CampaignReport,
    pub counterexamples: Vec<Counterexample>,
    pub wall_time_seconds: f64,
}

pub fn escrow_file_name(ce: &Counterexample) -> String {
    format!("ce-{}-{}.json", ce.id.replace(':', "-"), ce.kind.name())
}

/// Runs the campaign and, if `config.out` is set, writes `report.json`,
/// `timing.json` and one escrow file per counterexample under it.
pub fn run_campaign(config: &CampaignConfig) -> Result<CampaignOutcome, CampaignError> {
    config.validate()?;
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CampaignError::Config(e.to_string()))?;

    let checks = &config.checks;
    let selector = config.selector;
    let tally = pool.install(|| match config.mode {
        Mode::Exhaustive => {
            let total = genspace::digraph_count(config.n).expect("validated") as u64;
            let n = config.n;
            (0..total)
                .into_par_iter()
                .fold(Tally::default, |t, bits| {
                    t.observe(&ArcMask { n, bits: bits as u128 }.to_digraph(), checks, selector)
                })
                .reduce(Tally::default, Tally::merge)
        }
        Mode::Sample => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let seeds: Vec<u64> = (0..config.count).map(|_| rng.next_u64()).collect();
            let (n, p) = (config.n, config.p);
            seeds
                .into_par_iter()
                .fold(Tally::default, |t, s| {
                    let d = genspace::random_digraph(n, p, s).expect("validated");
                    t.observe(&d, checks, selector)
                })
                .reduce(Tally::default, Tally::merge)
        }
    });

    let Tally { instances, checked, mut failures, notes } = tally;
    failures.sort_by(|a, b| {
        let key = |c: &Counterexample| (ArcMask::of(&c.graph).map(|m| m.bits).unwrap_or(0), c.kind);
        key(a).cmp(&key(b))
    });
    failures.dedup_by(|a, b| a.id == b.id && a.kind == b.kind);

    let count_of = |check: Check| failures.iter().filter(|c| c.kind == check).count() as u64;
    let lemma_check_failures = checks
        .iter()
        .filter(|c| !matches!(c, Check::Axiom | Check::Bound))
        .map(|&c| (c, count_of(c)))
        .collect();
    let escrow_files: Vec<String> = if config.out.is_some() {
        failures.iter().map(escrow_file_name).collect()
    } else {
        Vec::new()
    };

    let report = CampaignReport {
        mode: config.mode,
        n: config.n,
        selector,
        checks: checks.clone(),
        sampling: (config.mode == Mode::Sample).then_some(Sampling {
            p: config.p,
            count: config.count,
            seed: config.seed,
        }),
        instance_count: instances,
        checked,
        axiom_witness_failures: count_of(Check::Axiom),
        bound_failures: count_of(Check::Bound),
        lemma_check_failures,
        counterexample_ids: failures.iter().map(|c| c.id.clone()).collect(),
        escrow_files,
        notes,
    };
    let wall_time_seconds = started.elapsed().as_secs_f64();

    if let Some(dir) = &config.out {
        write_outputs(dir, &report, &failures, wall_time_seconds)?;
    }
    Ok(CampaignOutcome { report, counterexamples: failures, wall_time_seconds })
}

fn write_outputs(
    dir: &Path,
    report: &CampaignReport,
    failures: &[Counterexample],
    wall_time_seconds: f64,
) -> Result<(), CampaignError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let report_path = dir.join("report.json");
    fs::write(&report_path, report.to_json()).map_err(io_err(&report_path))?;
    let timing_path = dir.join("timing.json");
    let timing = serde_json::json!({ "wall_time_seconds": wall_time_seconds });
    fs::write(&timing_path, format!("{timing}\n")).map_err(io_err(&timing_path))?;
    if !failures.is_empty() {
        let escrow = dir.join("escrow");
        fs::create_dir_all(&escrow).map_err(io_err(&escrow))?;
        for ce in failures {
            let path = escrow.join(escrow_file_name(ce));
            let body = serde_json::to_string_pretty(ce).expect("counterexample serialises") + "\n";
            fs::write(&path, body).map_err(io_err(&path))?;
        }
    }
    Ok(())
}

/// Result of re-checking an escrow file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub id: String,
    pub kind: Check,
    /// The stored id matches the stored graph.
    pub id_matches: bool,
    /// Re-running the check on the stored graph fails again.
    pub confirmed: bool,
}

pub fn verify_counterexample(ce: &Counterexample) -> Verification {
    let id_matches = ArcMask::of(&ce.graph).map(|m| m.id() == ce.id).unwrap_or(false);
    Verification { id: ce.id.clone(), kind: ce.kind, id_matches, confirmed: ce.reproduces() }
}

pub fn load_counterexample(path: &Path) -> Result<Counterexample, CampaignError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| CampaignError::Config(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tally_merge_is_order_independent() {
        let graphs: Vec<Digraph> = genspace::enumerate_digraphs(3).unwrap().collect();
        let checks = [Check::Lemma1, Check::Kernel];
        let one = |gs: &[Digraph]| {
            gs.iter().fold(Tally::default(), |t, d| t.observe(d, &checks, Selector::Lex))
        };
        let forward = one(&graphs[..20]).merge(one(&graphs[20..]));
        let backward = one(&graphs[20..]).merge(one(&graphs[..20]));
        assert_eq!(forward.instances, backward.instances);
        assert_eq!(forward.checked, backward.checked);
        assert_eq!(forward.failures.len(), backward.failures.len());
    }

    #[test]
    fn exhaustive_small_counts() {
        let all = run_campaign(&CampaignConfig::exhaustive(3, Check::DEFAULT_SET.to_vec())).unwrap();
        assert_eq!(all.report.instance_count, 64);
        assert_eq!(all.report.failure_count(), 0);

        let bound = run_campaign(&CampaignConfig::exhaustive(2, vec![Check::Bound])).unwrap();
        assert_eq!(bound.report.instance_count, 1);
        assert_eq!(bound.report.bound_failures, 0);
    }

    #[test]
    fn config_errors() {
        let mut c = CampaignConfig::exhaustive(8, vec![Check::Axiom]);
        assert!(matches!(run_campaign(&c), Err(CampaignError::Core(_))));
        c.n = 3;
        c.workers = 0;
        assert!(matches!(run_campaign(&c), Err(CampaignError::Config(_))));
        let s = CampaignConfig::sample(5, 1.5, 10, 0, vec![Check::Axiom]);
        assert!(run_campaign(&s).is_err());
    }

    #[test]
    fn kernel_free_graphs_are_escrowed() {
        let outcome = run_campaign(&CampaignConfig::exhaustive(3, vec![Check::Kernel])).unwrap();
        // The two directed triangles are the only kernel-free digraphs on 3 vertices.
        assert_eq!(outcome.report.lemma_check_failures[&Check::Kernel], 2);
        assert!(outcome.counterexamples.iter().all(|ce| verify_counterexample(ce).confirmed));
        assert!(outcome.counterexamples.iter().all(|ce| verify_counterexample(ce).id_matches));
    }

    #[test]
    fn csv_has_header_and_row() {
        let outcome = run_campaign(&CampaignConfig::exhaustive(2, vec![Check::Axiom])).unwrap();
        let csv = outcome.report.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    }
}
