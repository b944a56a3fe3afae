//! Build manifests: INI-style `[step]` records forming a DAG from input files
//! to output files.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Tftopl,
    Pltotf,
    Vptovf,
    Vftovp,
    Afm2tfm,
    Compose,
    Ew,
    Ew2,
    Unslant,
    Map,
    /// Produced outside this tool (by a font editor); outputs must already exist.
    External,
}

impl Op {
    pub const ALL: [Op; 11] = [
        Op::Tftopl,
        Op::Pltotf,
        Op::Vptovf,
        Op::Vftovp,
        Op::Afm2tfm,
        Op::Compose,
        Op::Ew,
        Op::Ew2,
        Op::Unslant,
        Op::Map,
        Op::External,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Op::Tftopl => "tftopl",
            Op::Pltotf => "pltotf",
            Op::Vptovf => "vptovf",
            Op::Vftovp => "vftovp",
            Op::Afm2tfm => "afm2tfm",
            Op::Compose => "compose",
            Op::Ew => "ew",
            Op::Ew2 => "ew2",
            Op::Unslant => "unslant",
            Op::Map => "map",
            Op::External => "external",
        }
    }

    /// Keys whose values name files that the step reads.
    fn file_keys(self) -> &'static [&'static str] {
        match self {
            Op::Tftopl | Op::Afm2tfm | Op::Map => &["enc"],
            Op::Compose => &["plan"],
            _ => &[],
        }
    }

    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            Op::Tftopl => &["charcode-format", "enc", "declare"],
            Op::Vftovp => &["charcode-format"],
            Op::Afm2tfm => &["enc", "design", "pfb", "charcode-format"],
            Op::Map => &["enc", "pfb", "tfm-name"],
            Op::Compose => &["plan", "charcode-format"],
            Op::Ew | Op::Ew2 => &["preset", "vstem-scale", "width-scale", "lsb", "rsb", "kern-scale"],
            Op::Pltotf | Op::Vptovf | Op::Unslant => &[],
            Op::External => &[],
        }
    }
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Op {
    type Err = ();

    fn from_str(s: &str) -> Result<Op, ()> {
        Op::ALL.iter().copied().find(|op| op.name() == s).ok_or(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    /// Zero-based position in the manifest.
    pub index: usize,
    pub name: String,
    pub op: Op,
    /// Paths relative to the manifest, `in` entries first, then files named by
    /// keys such as `enc` and `plan`.
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    /// Op-specific settings, without `op`, `in`, `out` and `name`.
    pub keys: BTreeMap<String, String>,
    /// The step's method is inferred rather than documented.
    pub assumed: bool,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ManifestError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: unknown op {op:?}")]
    UnknownOp { line: usize, op: String },
    #[error("line {line}: key {key:?} is not valid for op {op}")]
    UnknownKey { line: usize, op: Op, key: String },
    #[error("step at line {line} has no {key}")]
    MissingKey { line: usize, key: &'static str },
    #[error("{path} is produced by both step {first} and step {second}")]
    DuplicateOutput { path: String, first: String, second: String },
    #[error("dependency cycle: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub steps: Vec<Step>,
    /// Step indices in a dependency-respecting order; ties go to the earlier step.
    pub order: Vec<usize>,
    /// For each step, the steps producing its inputs.
    pub deps: Vec<BTreeSet<usize>>,
}

/// Free-text keys accepted on every step.
const DOC_KEYS: [&str; 3] = ["method", "source", "note"];

fn split_list(v: &str) -> Vec<String> {
    v.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

struct Record {
    line: usize,
    fields: Vec<(usize, String, String)>,
}

fn records(src: &str) -> Result<Vec<Record>, ManifestError> {
    let mut out: Vec<Record> = Vec::new();
    for (i, raw) in src.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') || text.starts_with(';') {
            continue;
        }
        if let Some(header) = text.strip_prefix('[') {
            if header.strip_suffix(']').map(str::trim) != Some("step") {
                return Err(ManifestError::Syntax {
                    line,
                    reason: format!("expected [step], found {text}"),
                });
            }
            out.push(Record { line, fields: Vec::new() });
            continue;
        }
        let Some((k, v)) = text.split_once('=') else {
            return Err(ManifestError::Syntax {
                line,
                reason: "expected key = value".into(),
            });
        };
        let Some(rec) = out.last_mut() else {
            return Err(ManifestError::Syntax {
                line,
                reason: "key before the first [step]".into(),
            });
        };
        let v = v.split(" #").next().unwrap_or_default();
        rec.fields.push((line, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn step(index: usize, rec: Record) -> Result<Step, ManifestError> {
    let mut op = None;
    let mut name = None;
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    let mut keys = BTreeMap::new();
    let mut assumed = false;
    for (line, k, v) in rec.fields {
        let fresh = match k.as_str() {
            "op" => {
                let parsed = v.parse::<Op>().map_err(|()| ManifestError::UnknownOp { line, op: v.clone() })?;
                op.replace(parsed).is_none()
            }
            "name" => name.replace(v).is_none(),
            "in" => {
                inputs.extend(split_list(&v));
                true
            }
            "out" => {
                outputs.extend(split_list(&v));
                true
            }
            "assumed" => {
                assumed = match v.as_str() {
                    "true" | "yes" => true,
                    "false" | "no" => false,
                    _ => {
                        return Err(ManifestError::Syntax {
                            line,
                            reason: format!("assumed must be true or false, not {v:?}"),
                        })
                    }
                };
                true
            }
            _ => keys.insert(k.clone(), v).is_none(),
        };
        if !fresh {
            return Err(ManifestError::Syntax {
                line,
                reason: format!("{k} given twice"),
            });
        }
    }
    let op = op.ok_or(ManifestError::MissingKey { line: rec.line, key: "op" })?;
    for k in keys.keys() {
        if !op.allowed_keys().contains(&k.as_str()) && !DOC_KEYS.contains(&k.as_str()) {
            return Err(ManifestError::UnknownKey {
                line: rec.line,
                op,
                key: k.clone(),
            });
        }
    }
    if outputs.is_empty() {
        return Err(ManifestError::MissingKey { line: rec.line, key: "out" });
    }
    if inputs.is_empty() && op != Op::External {
        return Err(ManifestError::MissingKey { line: rec.line, key: "in" });
    }
    for k in op.file_keys() {
        if let Some(path) = keys.get(*k) {
            if !inputs.contains(path) {
                inputs.push(path.clone());
            }
        }
    }
    Ok(Step {
        index,
        name: name.unwrap_or_else(|| outputs[0].clone()),
        op,
        inputs,
        outputs,
        keys,
        assumed,
        line: rec.line,
    })
}

pub fn parse_manifest(src: &str) -> Result<Manifest, ManifestError> {
    let steps = records(src)?
        .into_iter()
        .enumerate()
        .map(|(i, r)| step(i, r))
        .collect::<Result<Vec<_>, _>>()?;
    let mut producer: HashMap<&str, usize> = HashMap::new();
    for s in &steps {
        for o in &s.outputs {
            if let Some(&first) = producer.get(o.as_str()) {
                return Err(ManifestError::DuplicateOutput {
                    path: o.clone(),
                    first: steps[first].name.clone(),
                    second: s.name.clone(),
                });
            }
            producer.insert(o, s.index);
        }
    }
    let deps: Vec<BTreeSet<usize>> = steps
        .iter()
        .map(|s| s.inputs.iter().filter_map(|i| producer.get(i.as_str()).copied()).collect())
        .collect();
    let order = topological(&steps, &deps)?;
    Ok(Manifest { steps, order, deps })
}

fn topological(steps: &[Step], deps: &[BTreeSet<usize>]) -> Result<Vec<usize>, ManifestError> {
    let mut remaining: Vec<usize> = deps.iter().map(BTreeSet::len).collect();
    let mut users: Vec<Vec<usize>> = vec![Vec::new(); steps.len()];
    for (i, d) in deps.iter().enumerate() {
        for &p in d {
            users[p].push(i);
        }
    }
    let mut ready: BTreeSet<usize> = (0..steps.len()).filter(|&i| remaining[i] == 0).collect();
    let mut order = Vec::new();
    while let Some(i) = ready.pop_first() {
        order.push(i);
        for &u in &users[i] {
            remaining[u] -= 1;
            if remaining[u] == 0 {
                ready.insert(u);
            }
        }
    }
    if order.len() == steps.len() {
        return Ok(order);
    }
    // Walk back along unfinished dependencies until a step repeats.
    let start = (0..steps.len()).find(|&i| remaining[i] > 0).unwrap_or(0);
    let mut path = vec![start];
    let mut seen = HashMap::from([(start, 0usize)]);
    let mut cur = start;
    loop {
        let next = deps[cur].iter().copied().find(|&d| remaining[d] > 0).unwrap_or(cur);
        if let Some(&pos) = seen.get(&next) {
            let mut cycle: Vec<String> = path[pos..].iter().rev().map(|&i| steps[i].name.clone()).collect();
            cycle.push(cycle[0].clone());
            return Err(ManifestError::CycleDetected(cycle));
        }
        seen.insert(next, path.len());
        path.push(next);
        cur = next;
    }
}

impl Manifest {
    /// Files read by some step and produced by none.
    pub fn root_inputs(&self) -> BTreeSet<&str> {
        let produced: BTreeSet<&str> = self.steps.iter().flat_map(|s| s.outputs.iter().map(String::as_str)).collect();
        self.steps
            .iter()
            .flat_map(|s| s.inputs.iter().map(String::as_str))
            .filter(|i| !produced.contains(i))
            .collect()
    }

    /// Non-external steps that must rerun when `path` changes. External
    /// steps stop the walk: their outputs are files made by hand and do not
    /// change when their nominal inputs do.
    pub fn cone(&self, path: &str) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        let mut changed: Vec<&str> = vec![path];
        while let Some(p) = changed.pop() {
            for s in &self.steps {
                if s.op != Op::External && s.inputs.iter().any(|i| i == p) && out.insert(s.index) {
                    changed.extend(s.outputs.iter().map(String::as_str));
                }
            }
        }
        out
    }
}
