use std::cmp::Ordering;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};
use std::sync::Mutex;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use freysha_core::arith::{is_square_free_u64, BigReal, FactoredInteger, Precision};
use freysha_core::curves::{build_class_with, IsogenyClass};
use freysha_core::lseries::{
    checkpoint_text, evaluate_l, parse_checkpoint, root_estimate, stopping_check, truncation_bound,
    ApOracle, CoefficientCache, LSeriesError, LSeriesJob, SumContext, DEFAULT_K, DEFAULT_STEP,
};
use freysha_core::sha::{burden, make_report, sha_from_l, ShaReport};
use freysha_core::triples::AbcTriple;
use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::batch::Parallel;
use crate::error::{Error, Result};
use crate::input::{load_triples, ClassSpec};
use crate::output::ReportRecord;
use crate::store::{read_json, write_atomic, write_json, JobFiles, JsonLines, Manifest};

pub const MANIFEST_VERSION: u32 = 1;
/// Stage estimates below this many terms are flagged low-confidence.
pub const CONFIDENT_STAGE: u64 = 100_000_000;
pub const DEFAULT_Q_MAX: u64 = 1_000_000;
pub const DEFAULT_BURDEN_MAX: u64 = 1000;
pub const DEFAULT_STAGES: [u64; 2] = [10_000_000, 100_000_000];
pub const DEFAULT_MEMORY_BUDGET: u64 = 400_000_000;
/// Burden is re-evaluated after every this many steps.
pub const BURDEN_RECHECK: u64 = 10;

mod real_text {
    use freysha_core::arith::{BigReal, Precision};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigReal, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_sig_string(12))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigReal, D::Error> {
        let text = String::deserialize(d)?;
        BigReal::parse_decimal(&text, Precision::default()).map_err(serde::de::Error::custom)
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<BigReal>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(x) => super::serialize(x, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigReal>, D::Error> {
            let text = Option::<String>::deserialize(d)?;
            text.map(|t| {
                BigReal::parse_decimal(&t, Precision::default()).map_err(serde::de::Error::custom)
            })
            .transpose()
        }
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    ScreenedOut,
    Promising,
    Running,
    Converged,
    AbortedRankSuspect,
    AbortedBudget,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub status: Status,
    pub at: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Partial `L` at a fixed truncation, with the `G` it would imply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageEstimate {
    pub n: u64,
    #[serde(with = "real_text")]
    pub l: BigReal,
    #[serde(with = "real_text::option")]
    pub g: Option<BigReal>,
    pub burden: Option<u64>,
    pub low_confidence: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub triple: String,
    pub class: ClassSpec,
    pub class_hash: String,
    #[serde(with = "real_text")]
    pub g_over_l: BigReal,
    pub q_divides_r: bool,
    pub stages: Vec<StageEstimate>,
    pub history: Vec<Transition>,
}

/// One line of the candidate ledger.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub class_hash: String,
    pub triple: String,
    pub q: i64,
    #[serde(flatten)]
    pub transition: Transition,
}

impl CandidateRecord {
    pub fn new(class: &IsogenyClass, q: i64) -> Self {
        CandidateRecord {
            triple: class.triple().id(),
            class: ClassSpec::from_triple(class.triple(), q),
            class_hash: class.hash(),
            g_over_l: class.g_over_l().clone(),
            q_divides_r: class.q_divides_r(),
            stages: Vec::new(),
            history: Vec::new(),
        }
    }

    pub fn status(&self) -> Option<Status> {
        self.history.last().map(|t| t.status)
    }

    /// Appends a transition and mirrors it to `ledger`.
    pub fn transition(
        &mut self,
        status: Status,
        note: Option<String>,
        ledger: Option<&JsonLines>,
    ) -> Result<()> {
        let t = Transition {
            status,
            at: now(),
            note,
        };
        if let Some(ledger) = ledger {
            ledger.append(&self.ledger_entry(&t))?;
        }
        self.history.push(t);
        Ok(())
    }

    fn ledger_entry(&self, t: &Transition) -> LedgerEntry {
        LedgerEntry {
            class_hash: self.class_hash.clone(),
            triple: self.triple.clone(),
            q: self.class.q,
            transition: t.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub triples: PathBuf,
    pub q_max: u64,
    pub gl_min: BigReal,
    pub burden_max: u64,
    pub stages: Vec<u64>,
    /// Candidates whose stage estimate of `L` falls below this are demoted.
    pub l_min: BigReal,
    pub precision: Precision,
    pub memory_budget: u64,
    pub k: BigReal,
}

impl ScanConfig {
    pub fn new(triples: impl Into<PathBuf>) -> Self {
        let precision = Precision::default();
        ScanConfig {
            triples: triples.into(),
            q_max: DEFAULT_Q_MAX,
            gl_min: BigReal::one(precision),
            burden_max: DEFAULT_BURDEN_MAX,
            stages: DEFAULT_STAGES.to_vec(),
            l_min: BigReal::one(precision),
            precision,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            k: BigReal::from_integer(DEFAULT_K, precision),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q_max < 1 {
            return Err(Error::Validation("q_max must be at least 1".into()));
        }
        if self.stages.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "stages must be strictly increasing: {:?}",
                self.stages
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanFailure {
    pub triple: String,
    pub q: i64,
    pub error: String,
}

#[derive(Clone, Debug, Default)]
pub struct ScanOutcome {
    /// Kept candidates, best `G/L` first.
    pub candidates: Vec<CandidateRecord>,
    pub screened_out: u64,
    pub failures: Vec<ScanFailure>,
}

/// Square-free `q` with `1 <= q <= q_max`.
pub fn square_free_up_to(q_max: u64) -> Vec<u64> {
    let n = q_max as usize;
    let mut free = vec![true; n + 1];
    let mut d = 2usize;
    while d * d <= n {
        let sq = d * d;
        for m in (sq..=n).step_by(sq) {
            free[m] = false;
        }
        d += 1;
    }
    (1..=n).filter(|&i| free[i]).map(|i| i as u64).collect()
}

/// Twists of one triple in the order they are tried: divisors of the radical
/// first, then by magnitude, positive before negative.
pub fn twist_order(triple: &AbcTriple, q_max: u64) -> Vec<i64> {
    let r = triple.radical().value();
    let zero = BigInt::from(0);
    let mut qs: Vec<(bool, u64)> = square_free_up_to(q_max)
        .into_iter()
        .map(|q| (r % BigInt::from(q) != zero, q))
        .collect();
    qs.sort();
    qs.into_iter()
        .flat_map(|(_, q)| [q as i64, -(q as i64)])
        .collect()
}

fn candidate_order(x: &CandidateRecord, y: &CandidateRecord) -> Ordering {
    y.g_over_l
        .partial_cmp(&x.g_over_l)
        .unwrap_or(Ordering::Equal)
        .then_with(|| y.q_divides_r.cmp(&x.q_divides_r))
        .then_with(|| x.triple.cmp(&y.triple))
        .then_with(|| x.class.q.unsigned_abs().cmp(&y.class.q.unsigned_abs()))
        .then_with(|| y.class.q.cmp(&x.class.q))
}

/// `G/L` pre-filter over every triple and square-free twist.
pub fn scan_triples(
    triples: &[AbcTriple],
    config: &ScanConfig,
    ledger: Option<&JsonLines>,
) -> Result<ScanOutcome> {
    config.validate()?;
    let mut outcome = ScanOutcome::default();
    for triple in triples {
        let qs = twist_order(triple, config.q_max);
        let results: Vec<(i64, std::result::Result<IsogenyClass, String>)> = qs
            .par_iter()
            .map(|&q| {
                let class =
                    build_class_with(triple, &FactoredInteger::from_i64(q), config.precision);
                (q, class.map_err(|e| e.to_string()))
            })
            .collect();
        for (q, class) in results {
            match class {
                Ok(class) if *class.g_over_l() >= config.gl_min => {
                    outcome.candidates.push(CandidateRecord::new(&class, q));
                }
                Ok(_) => outcome.screened_out += 1,
                Err(error) => outcome.failures.push(ScanFailure {
                    triple: triple.id(),
                    q,
                    error,
                }),
            }
        }
    }
    outcome.candidates.sort_by(candidate_order);
    for c in &mut outcome.candidates {
        c.transition(
            Status::Promising,
            Some(format!("G/L = {}", c.g_over_l.to_sig_string(6))),
            ledger,
        )?;
    }
    Ok(outcome)
}

pub fn scan(config: &ScanConfig, ledger: Option<&JsonLines>) -> Result<ScanOutcome> {
    let (triples, bad) = load_triples(&config.triples, config.precision)?;
    let mut outcome = scan_triples(&triples, config, ledger)?;
    for e in bad {
        outcome.failures.push(ScanFailure {
            triple: format!("line {}", e.line),
            q: 0,
            error: e.error.to_string(),
        });
    }
    Ok(outcome)
}

/// `|Sha|` implied by `l`, its `G` and the burden; `None` when `l <= 0`.
pub fn estimate_from_l(class: &IsogenyClass, l: &BigReal) -> Option<(BigReal, BigReal, u64)> {
    let sha = sha_from_l(l, class, class.k_star()).ok()?;
    let p = sha.precision();
    let g = &sha
        / &BigReal::from_integer(class.conductor_value().clone(), p)
            .sqrt()
            .ok()?;
    let arg = &sha.sqrt().ok()?.mul_int(4) / &l.mul_pow2(class.t() as i64);
    let b = if arg <= BigReal::one(p) {
        0
    } else {
        burden(&sha, &g, l, class.t(), &class.bad_prime_squares()).unwrap_or(u64::MAX)
    };
    Some((sha, g, b))
}

/// Partial `L` at `stage_n` terms.
pub fn rough_estimate(
    class: &IsogenyClass,
    stage_n: u64,
    precision: Precision,
    memory_budget: u64,
) -> Result<StageEstimate> {
    let l = if stage_n == 0 {
        BigReal::zero(precision)
    } else {
        let oracle = ApOracle::from_class(class);
        let mut cache = CoefficientCache::with_memory_budget(memory_budget, &oracle);
        evaluate_l(
            class,
            stage_n,
            precision,
            &mut cache,
            &oracle,
            &Parallel::default(),
        )?
    };
    let est = estimate_from_l(class, &l);
    Ok(StageEstimate {
        n: stage_n,
        g: est.as_ref().map(|e| e.1.clone()),
        burden: est.map(|e| e.2),
        l,
        low_confidence: stage_n < CONFIDENT_STAGE,
    })
}

/// Runs the configured stages, demoting the candidate when `L` drops below
/// `l_min` or the burden exceeds the budget.
pub fn refine(
    candidate: &mut CandidateRecord,
    config: &ScanConfig,
    ledger: Option<&JsonLines>,
) -> Result<()> {
    let class = candidate.class.class(config.precision)?;
    for &n in &config.stages {
        let est = rough_estimate(&class, n, config.precision, config.memory_budget)?;
        let low_l = est.l < config.l_min;
        let over = est.burden.is_some_and(|b| b > config.burden_max);
        let note = format!("L = {} at n = {n}", est.l.to_sig_string(6));
        candidate.stages.push(est);
        if low_l || over {
            let why = if low_l {
                "L below threshold"
            } else {
                "burden over budget"
            };
            candidate.transition(Status::ScreenedOut, Some(format!("{why}: {note}")), ledger)?;
            return Ok(());
        }
        candidate.transition(Status::Promising, Some(note), ledger)?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub checkpoint_dir: PathBuf,
    pub step: u64,
    pub precision: Precision,
    pub memory_budget: u64,
    pub k: BigReal,
    pub burden_max: u64,
    /// Give up past this many terms; derived from the truncation bound when unset.
    pub max_terms: Option<u64>,
    /// Stop this invocation after this many steps.
    pub max_steps: Option<u64>,
    /// Known estimate of `L` for the burden pre-check.
    pub estimate: Option<BigReal>,
}

impl RunOptions {
    pub fn new(checkpoint_dir: impl Into<PathBuf>) -> Self {
        let precision = Precision::default();
        RunOptions {
            checkpoint_dir: checkpoint_dir.into(),
            step: DEFAULT_STEP,
            precision,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            k: BigReal::from_integer(DEFAULT_K, precision),
            burden_max: DEFAULT_BURDEN_MAX,
            max_terms: None,
            max_steps: None,
            estimate: None,
        }
    }
}

/// Candidate ledger and result list shared by concurrent jobs.
#[derive(Debug)]
pub struct Journal {
    pub ledger: JsonLines,
    pub results: JsonLines,
}

impl Journal {
    pub fn new(ledger: impl Into<PathBuf>, results: impl Into<PathBuf>) -> Self {
        Journal {
            ledger: JsonLines::new(ledger),
            results: JsonLines::new(results),
        }
    }

    /// `ledger.jsonl` and `results.jsonl` inside `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        Journal::new(dir.join("ledger.jsonl"), dir.join("results.jsonl"))
    }
}

/// Terms used for the pre-run estimate of `L`.
pub fn estimate_terms(class: &IsogenyClass) -> u64 {
    let p = Precision::digits(20);
    let root = BigReal::from_integer(class.conductor_value().clone(), p)
        .sqrt()
        .expect("N > 0");
    let n = u64::try_from(root.mul_int(2).floor()).unwrap_or(u64::MAX);
    n.saturating_add(1).min(DEFAULT_STAGES[0])
}

/// `4 max(m_K, sqrt N) + 20 step`, with `m_K` the truncation bound for the
/// estimate `l`.
pub fn default_max_terms(class: &IsogenyClass, l: Option<&BigReal>, k: &BigReal, step: u64) -> u64 {
    let p = class.precision();
    let root_n: u64 = BigReal::from_integer(class.conductor_value().clone(), p)
        .sqrt()
        .expect("N > 0")
        .floor()
        .try_into()
        .unwrap_or(u64::MAX / 8);
    let m = l
        .and_then(|l| {
            let (sha, g, _) = estimate_from_l(class, l)?;
            truncation_bound(&sha, &g, l, class.t(), k).ok()
        })
        .unwrap_or(0);
    m.max(root_n + 1)
        .saturating_mul(4)
        .saturating_add(step.saturating_mul(20))
}

struct Job<'a> {
    class: IsogenyClass,
    record: CandidateRecord,
    manifest: Manifest,
    files: JobFiles,
    journal: &'a Journal,
    ctx: SumContext,
    job: LSeriesJob,
}

impl Job<'_> {
    fn abort(&mut self, status: Status, note: String) -> Result<()> {
        self.record
            .transition(status, Some(note), Some(&self.journal.ledger))
    }

    fn log(&self, line: &str) -> Result<()> {
        use std::io::Write;
        let path = &self.files.log;
        let mut f = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(Error::io(path))?;
        writeln!(f, "{line}").map_err(Error::io(path))
    }

    fn save(&self) -> Result<()> {
        write_atomic(
            &self.files.checkpoint,
            checkpoint_text(&self.job, &self.ctx).as_bytes(),
        )
    }

    fn drive(mut self, max_steps: Option<u64>) -> Result<ShaReport> {
        let started = Instant::now();
        let oracle = ApOracle::from_class(&self.class);
        let mut cache = CoefficientCache::with_memory_budget(self.manifest.memory_budget, &oracle);
        let batch = Parallel::default();
        let max_terms = self.manifest.max_terms.unwrap_or(u64::MAX);
        let step = self.job.step();
        let mut steps = 0u64;
        loop {
            let check = stopping_check(&self.job, &self.ctx, &self.class);
            let n = self.job.n_current();
            if check.rank_suspect {
                let l = self.job.partial_l(&self.ctx).to_sig_string(6);
                self.abort(
                    Status::AbortedRankSuspect,
                    format!("partial sums near 0 at n = {n}"),
                )?;
                return Err(Error::RankSuspect { n, l });
            }
            if check.converged {
                let report = make_report(&self.job, &self.ctx, &self.class)?;
                let record = ReportRecord::from_report(&report, started.elapsed().as_secs_f64());
                write_json(&self.files.report, &record)?;
                self.journal.results.append(&record)?;
                let note = format!("|Sha| = {} at n = {n}", record.sha);
                self.record.transition(
                    Status::Converged,
                    Some(note),
                    Some(&self.journal.ledger),
                )?;
                return Ok(report);
            }
            if n >= max_terms {
                return Err(Error::NotConverged(n));
            }
            if max_steps == Some(steps) {
                return Err(Error::Interrupted(n));
            }
            let rec = self.job.run_step(&self.ctx, &mut cache, &oracle, &batch)?;
            steps += 1;
            self.save()?;
            let root = root_estimate(&rec.l, &self.class);
            self.log(&format!(
                "n={} L={} root={} at={}",
                rec.n,
                rec.l.to_sig_string(20),
                root.to_sig_string(12),
                now()
            ))?;
            if (rec.n / step) % BURDEN_RECHECK == 0 {
                if let Some((_, _, b)) = estimate_from_l(&self.class, &rec.l) {
                    if b > self.manifest.burden_max {
                        self.abort(
                            Status::AbortedBudget,
                            format!("burden {b} at n = {}", rec.n),
                        )?;
                        return Err(Error::BudgetExceeded {
                            burden: b,
                            max: self.manifest.burden_max,
                        });
                    }
                }
            }
        }
    }
}

/// Full evaluation of one class with a checkpoint after every step. An
/// existing checkpoint for the class is resumed instead.
pub fn run(spec: &ClassSpec, opts: &RunOptions, journal: &Journal) -> Result<ShaReport> {
    if opts.step == 0 {
        return Err(Error::Validation("step must be positive".into()));
    }
    let class = spec.class(opts.precision)?;
    let hash = class.hash();
    fs::create_dir_all(&opts.checkpoint_dir).map_err(Error::io(&opts.checkpoint_dir))?;
    let files = JobFiles::new(&opts.checkpoint_dir, &hash);
    if files.checkpoint.exists() {
        return resume_with(&files.checkpoint, opts.max_steps, journal);
    }
    let mut record = CandidateRecord::new(&class, spec.q);
    let l = match &opts.estimate {
        Some(l) => l.clone(),
        None => {
            rough_estimate(
                &class,
                estimate_terms(&class),
                opts.precision,
                opts.memory_budget,
            )?
            .l
        }
    };
    if let Some((_, _, b)) = estimate_from_l(&class, &l) {
        if b > opts.burden_max {
            let note = format!("estimated burden {b} from L = {}", l.to_sig_string(6));
            record.transition(Status::AbortedBudget, Some(note), Some(&journal.ledger))?;
            return Err(Error::BudgetExceeded {
                burden: b,
                max: opts.burden_max,
            });
        }
    }
    let max_terms = opts
        .max_terms
        .unwrap_or_else(|| default_max_terms(&class, Some(&l), &opts.k, opts.step));
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        class: ClassSpec {
            b: Some(class.triple().b().render()),
            ..spec.clone()
        },
        class_hash: hash,
        precision: opts.precision.decimal_digits(),
        step: opts.step,
        k: opts.k.to_sig_string(12),
        burden_max: opts.burden_max,
        memory_budget: opts.memory_budget,
        max_terms: Some(max_terms),
    };
    write_json(&files.manifest, &manifest)?;
    let ctx = SumContext::for_class(&class, opts.precision)?;
    let job = LSeriesJob::new(&class, opts.step, opts.precision);
    record.transition(
        Status::Running,
        Some(format!("max terms {max_terms}")),
        Some(&journal.ledger),
    )?;
    let job = Job {
        class,
        record,
        manifest,
        files,
        journal,
        ctx,
        job,
    };
    job.save()?;
    job.drive(opts.max_steps)
}

/// Continues the job whose checkpoint is at `path`.
pub fn resume(path: &Path, journal: &Journal) -> Result<ShaReport> {
    resume_with(path, None, journal)
}

pub fn resume_with(path: &Path, max_steps: Option<u64>, journal: &Journal) -> Result<ShaReport> {
    let files = JobFiles::for_checkpoint(path);
    let manifest: Manifest = read_json(&files.manifest)?;
    if manifest.version != MANIFEST_VERSION {
        return Err(Error::Validation(format!(
            "unsupported job manifest version {}",
            manifest.version
        )));
    }
    let precision = Precision::digits(manifest.precision);
    let class = manifest.class.class(precision)?;
    if class.hash() != manifest.class_hash {
        return Err(LSeriesError::ClassMismatch {
            expected: manifest.class_hash.clone(),
            found: class.hash(),
        }
        .into());
    }
    let text = fs::read_to_string(path).map_err(Error::io(path))?;
    let job = parse_checkpoint(&text, Some(&manifest.class_hash))?;
    if job.precision() != precision || job.step() != manifest.step {
        return Err(LSeriesError::Checkpoint(
            "precision or step differs from the job manifest".into(),
        )
        .into());
    }
    let ctx = SumContext::for_class(&class, precision)?;
    let mut record = CandidateRecord::new(&class, manifest.class.q);
    let note = format!("resumed at n = {}", job.n_current());
    record.transition(Status::Running, Some(note), Some(&journal.ledger))?;
    Job {
        class,
        record,
        manifest,
        files,
        journal,
        ctx,
        job,
    }
    .drive(max_steps)
}

/// Runs up to `threads` jobs at a time; results come back in input order.
pub fn run_many(
    specs: &[ClassSpec],
    opts: &RunOptions,
    journal: &Journal,
    threads: usize,
) -> Vec<Result<ShaReport>> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<ShaReport>>>> =
        Mutex::new((0..specs.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads.max(1).min(specs.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, AtomicOrdering::Relaxed);
                let Some(spec) = specs.get(i) else { break };
                let r = run(spec, opts, journal);
                results.lock().unwrap_or_else(|e| e.into_inner())[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

/// `true` when `q` is an admissible twist.
pub fn is_admissible_twist(q: i64) -> bool {
    q != 0 && is_square_free_u64(q.unsigned_abs())
}
