//! Executes a manifest against a directory, reusing cached outputs.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};

use crate::cache::{digest, fingerprint, write_atomic, Cache};
use crate::manifest::{Manifest, Op, Step};
use crate::ops;

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub cache_dir: PathBuf,
    pub jobs: usize,
    pub dry_run: bool,
    /// Re-execute cache hits and compare output digests.
    pub verify: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepStatus {
    Executed,
    Cached,
    /// Outputs of an external step were found in place.
    External,
    /// Listed by a dry run.
    Planned,
    Failed(String),
    Skipped { blocked_by: String },
}

impl StepStatus {
    pub fn succeeded(&self) -> bool {
        matches!(self, StepStatus::Executed | StepStatus::Cached | StepStatus::External | StepStatus::Planned)
    }

    fn label(&self) -> &'static str {
        match self {
            StepStatus::Executed => "executed",
            StepStatus::Cached => "cached",
            StepStatus::External => "external",
            StepStatus::Planned => "planned",
            StepStatus::Failed(_) => "FAILED",
            StepStatus::Skipped { .. } => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepReport {
    pub index: usize,
    pub name: String,
    pub op: Op,
    pub status: StepStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyMismatch {
    pub step: String,
    pub path: String,
    pub cached: String,
    pub fresh: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BuildReport {
    /// In manifest order.
    pub steps: Vec<StepReport>,
    pub verified: usize,
    pub mismatches: Vec<VerifyMismatch>,
}

impl BuildReport {
    fn count(&self, f: impl Fn(&StepStatus) -> bool) -> usize {
        self.steps.iter().filter(|s| f(&s.status)).count()
    }

    pub fn executed(&self) -> usize {
        self.count(|s| *s == StepStatus::Executed)
    }

    pub fn cached(&self) -> usize {
        self.count(|s| *s == StepStatus::Cached)
    }

    pub fn failed(&self) -> usize {
        self.count(|s| matches!(s, StepStatus::Failed(_)))
    }

    pub fn skipped(&self) -> usize {
        self.count(|s| matches!(s, StepStatus::Skipped { .. }))
    }

    pub fn executed_steps(&self) -> Vec<usize> {
        self.steps.iter().filter(|s| s.status == StepStatus::Executed).map(|s| s.index).collect()
    }

    pub fn success(&self) -> bool {
        self.failed() == 0 && self.skipped() == 0 && self.mismatches.is_empty()
    }
}

impl fmt::Display for BuildReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.steps {
            write!(f, "{:>3} {:<9} {:<8} {}", s.index + 1, s.status.label(), s.op.name(), s.name)?;
            match &s.status {
                StepStatus::Failed(why) => write!(f, ": {why}")?,
                StepStatus::Skipped { blocked_by } => write!(f, " (after {blocked_by})")?,
                _ => {}
            }
            writeln!(f)?;
        }
        for m in &self.mismatches {
            writeln!(f, "verify: {} {} cached {} fresh {}", m.step, m.path, m.cached, m.fresh)?;
        }
        write!(
            f,
            "{} executed, {} cached, {} failed, {} skipped",
            self.executed(),
            self.cached(),
            self.failed(),
            self.skipped()
        )?;
        if self.verified > 0 || !self.mismatches.is_empty() {
            write!(f, "; verified {} hits, {} digest mismatches", self.verified, self.mismatches.len())?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum RunError {
    #[error("missing inputs: {}", .0.join(", "))]
    MissingInputs(Vec<String>),
    #[error("jobs must be at least 1")]
    NoJobs,
}

struct Outcome {
    status: StepStatus,
    verified: bool,
    mismatches: Vec<VerifyMismatch>,
}

impl Outcome {
    fn of(status: StepStatus) -> Outcome {
        Outcome {
            status,
            verified: false,
            mismatches: Vec::new(),
        }
    }
}

fn read_inputs(step: &Step, base: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    step.inputs
        .iter()
        .map(|p| fs::read(base.join(p)).map(|b| (p.clone(), b)).map_err(|e| format!("reading {p}: {e}")))
        .collect()
}

fn run_step(step: &Step, base: &Path, cache: &Cache, verify: bool) -> Outcome {
    match try_step(step, base, cache, verify) {
        Ok(o) => o,
        Err(e) => Outcome::of(StepStatus::Failed(e)),
    }
}

fn try_step(step: &Step, base: &Path, cache: &Cache, verify: bool) -> Result<Outcome, String> {
    if step.op == Op::External {
        let missing: Vec<&str> = step.outputs.iter().filter(|o| !base.join(o).is_file()).map(String::as_str).collect();
        if !missing.is_empty() {
            return Err(format!("external outputs not found: {}", missing.join(", ")));
        }
        return Ok(Outcome::of(StepStatus::External));
    }
    let inputs = read_inputs(step, base)?;
    let digests: Vec<(String, String)> = step.inputs.iter().map(|p| (p.clone(), digest(&inputs[p]))).collect();
    let fp = fingerprint(step, &digests);
    // A damaged entry is treated as a miss.
    let restored = cache.lookup(&fp).filter(|entry| {
        entry.outputs.iter().all(|rec| {
            let target = base.join(&rec.path);
            let current = fs::read(&target).ok().map(|b| digest(&b));
            current.as_deref() == Some(rec.digest.as_str())
                || cache.object(&rec.digest).and_then(|bytes| write_atomic(&target, &bytes)).is_ok()
        })
    });
    if let Some(entry) = restored {
        let mut outcome = Outcome::of(StepStatus::Cached);
        if verify {
            let fresh = ops::execute(step, &inputs).map_err(|e| format!("{e:#}"))?;
            outcome.verified = true;
            for rec in &entry.outputs {
                let now = fresh.iter().find(|(p, _)| *p == rec.path).map(|(_, b)| digest(b)).unwrap_or_default();
                if now != rec.digest {
                    outcome.mismatches.push(VerifyMismatch {
                        step: step.name.clone(),
                        path: rec.path.clone(),
                        cached: rec.digest.clone(),
                        fresh: now,
                    });
                }
            }
        }
        return Ok(outcome);
    }
    let outputs = ops::execute(step, &inputs).map_err(|e| format!("{e:#}"))?;
    for (path, bytes) in &outputs {
        write_atomic(&base.join(path), bytes).map_err(|e| format!("writing {path}: {e}"))?;
    }
    cache.store(&fp, step.op.name(), &outputs).map_err(|e| format!("updating cache: {e}"))?;
    Ok(Outcome::of(StepStatus::Executed))
}

#[derive(Clone)]
enum Slot {
    Waiting,
    Running,
    Done(bool),
}

/// Runs every step of `manifest` with paths relative to `base`.
///
/// A failed step skips the steps that depend on it; independent branches
/// still run. The report lists steps in manifest order.
pub fn run(manifest: &Manifest, base: &Path, opts: &RunOptions) -> Result<BuildReport, RunError> {
    if opts.jobs == 0 {
        return Err(RunError::NoJobs);
    }
    let missing: Vec<String> = manifest
        .root_inputs()
        .into_iter()
        .filter(|p| !base.join(p).is_file())
        .map(String::from)
        .collect();
    if !missing.is_empty() {
        return Err(RunError::MissingInputs(missing));
    }
    let mut report = BuildReport::default();
    let n = manifest.steps.len();
    if opts.dry_run {
        report.steps = manifest
            .steps
            .iter()
            .map(|s| StepReport {
                index: s.index,
                name: s.name.clone(),
                op: s.op,
                status: if s.op == Op::External { StepStatus::External } else { StepStatus::Planned },
            })
            .collect();
        return Ok(report);
    }

    let cache = Cache::new(&opts.cache_dir);
    let state = Mutex::new((vec![Slot::Waiting; n], BTreeMap::<usize, Outcome>::new()));
    let wake = Condvar::new();
    let next = |slots: &mut Vec<Slot>, outcomes: &mut BTreeMap<usize, Outcome>| -> Option<Option<usize>> {
        // Some(Some(i)): run i. Some(None): wait. None: finished.
        loop {
            if slots.iter().all(|s| matches!(s, Slot::Done(_))) {
                return None;
            }
            let mut progressed = false;
            for &i in &manifest.order {
                if !matches!(slots[i], Slot::Waiting) {
                    continue;
                }
                let failed = manifest.deps[i].iter().find(|&&d| matches!(slots[d], Slot::Done(false)));
                if let Some(&d) = failed {
                    slots[i] = Slot::Done(false);
                    let blocked_by = manifest.steps[d].name.clone();
                    outcomes.insert(i, Outcome::of(StepStatus::Skipped { blocked_by }));
                    progressed = true;
                    continue;
                }
                if manifest.deps[i].iter().all(|&d| matches!(slots[d], Slot::Done(true))) {
                    slots[i] = Slot::Running;
                    return Some(Some(i));
                }
            }
            if !progressed {
                return Some(None);
            }
        }
    };
    let worker = || loop {
        let mut guard = state.lock().unwrap_or_else(|p| p.into_inner());
        let i = loop {
            let (slots, outcomes) = &mut *guard;
            match next(slots, outcomes) {
                None => {
                    wake.notify_all();
                    return;
                }
                Some(Some(i)) => break i,
                Some(None) => guard = wake.wait(guard).unwrap_or_else(|p| p.into_inner()),
            }
        };
        drop(guard);
        let outcome = run_step(&manifest.steps[i], base, &cache, opts.verify);
        let mut guard = state.lock().unwrap_or_else(|p| p.into_inner());
        guard.0[i] = Slot::Done(outcome.status.succeeded());
        guard.1.insert(i, outcome);
        wake.notify_all();
    };
    std::thread::scope(|s| {
        for _ in 0..opts.jobs.min(n.max(1)) {
            s.spawn(worker);
        }
    });

    let (_, outcomes) = state.into_inner().unwrap_or_else(|p| p.into_inner());
    for (i, o) in outcomes {
        let step = &manifest.steps[i];
        report.verified += usize::from(o.verified);
        report.mismatches.extend(o.mismatches);
        report.steps.push(StepReport {
            index: i,
            name: step.name.clone(),
            op: step.op,
            status: o.status,
        });
    }
    Ok(report)
}
