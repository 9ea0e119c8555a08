//! Experiment reports and their on-disk forms.
//!
//! `report.json` holds `{"header": RunHeader, "reports": [ExperimentReport]}`;
//! everything outside `header` is a deterministic function of the
//! configuration. CSV files start with `#`-prefixed header lines followed
//! by a column row.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::ExperimentConfig;
use crate::error::Result;

/// Locale-independent 17-significant-digit form used in every data file.
pub fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub type Params = BTreeMap<String, Value>;

/// Builds a parameter map from (name, value) pairs.
pub fn params<const N: usize>(items: [(&str, Value); N]) -> Params {
    items.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub params: Params,
    pub metrics: BTreeMap<String, f64>,
}

impl ResultRow {
    pub fn new(params: Params) -> Self {
        Self {
            params,
            metrics: BTreeMap::new(),
        }
    }

    pub fn metric(mut self, name: &str, value: f64) -> Self {
        self.metrics.insert(name.to_string(), value);
        self
    }
}

/// Test function and evaluation point where a margin or ratio is extremal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub trial: usize,
    pub point: usize,
    pub lhs: f64,
    pub rhs: f64,
}

/// One audited inequality.
///
/// Hard rows have constant 1 and fail on any violation beyond the slack.
/// Constant-bearing rows report the empirical constant at two resolutions
/// and never fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub inequality: String,
    pub params: Params,
    pub hard: bool,
    pub passed: bool,
    pub checks: usize,
    pub violations: usize,
    /// min (rhs - lhs) for hard rows.
    pub worst_margin: Option<f64>,
    pub witness: Option<Witness>,
    pub constant: Option<f64>,
    pub refined_constant: Option<f64>,
    /// |refined / constant - 1|.
    pub relative_change: Option<f64>,
    /// Analytic quantities the constant is compared with.
    pub reference: BTreeMap<String, f64>,
}

impl AuditRow {
    pub fn hard(inequality: &str, params: Params) -> Self {
        Self {
            inequality: inequality.to_string(),
            params,
            hard: true,
            passed: true,
            checks: 0,
            violations: 0,
            worst_margin: None,
            witness: None,
            constant: None,
            refined_constant: None,
            relative_change: None,
            reference: BTreeMap::new(),
        }
    }

    pub fn constant(inequality: &str, params: Params) -> Self {
        Self {
            hard: false,
            ..Self::hard(inequality, params)
        }
    }

    /// Records one comparison lhs <= rhs.
    pub fn check(&mut self, lhs: f64, rhs: f64, slack: f64, trial: usize, point: usize) {
        self.checks += 1;
        let margin = rhs - lhs;
        if margin < -slack {
            self.violations += 1;
            self.passed = false;
        }
        if self.worst_margin.map_or(true, |w| margin < w) {
            self.worst_margin = Some(margin);
            self.witness = Some(Witness {
                trial,
                point,
                lhs,
                rhs,
            });
        }
    }

    /// Records one ratio sample lhs / rhs toward the empirical constant.
    pub fn ratio(&mut self, lhs: f64, rhs: f64, trial: usize, point: usize) {
        self.checks += 1;
        let r = lhs / rhs;
        if !r.is_finite() {
            return;
        }
        if self.constant.map_or(true, |c| r > c) {
            self.constant = Some(r);
            self.witness = Some(Witness {
                trial,
                point,
                lhs,
                rhs,
            });
        }
    }

    pub fn refined(&mut self, value: f64) {
        self.refined_constant = Some(value);
        if let Some(c) = self.constant {
            self.relative_change = Some((value / c - 1.0).abs());
        }
    }

    pub fn reference(mut self, name: &str, value: f64) -> Self {
        self.reference.insert(name.to_string(), value);
        self
    }

    /// Merges per-trial partial rows in trial order.
    pub fn merge(&mut self, other: &AuditRow) {
        self.checks += other.checks;
        self.violations += other.violations;
        self.passed &= other.passed;
        if let Some(m) = other.worst_margin {
            if self.worst_margin.map_or(true, |w| m < w) {
                self.worst_margin = Some(m);
                self.witness = other.witness.clone();
            }
        }
        if let Some(c) = other.constant {
            if self.constant.map_or(true, |s| c > s) {
                self.constant = Some(c);
                self.witness = other.witness.clone();
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: Option<ExperimentConfig>,
    pub rows: Vec<ResultRow>,
    pub audits: Vec<AuditRow>,
    /// Wall-clock seconds per stage; kept out of the serialized report.
    #[serde(skip)]
    pub runtimes: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn new(experiment: &str, config: Option<ExperimentConfig>) -> Self {
        Self {
            experiment: experiment.to_string(),
            config,
            rows: Vec::new(),
            audits: Vec::new(),
            runtimes: Vec::new(),
        }
    }

    pub fn hard_failures(&self) -> Vec<&AuditRow> {
        self.audits.iter().filter(|a| a.hard && !a.passed).collect()
    }

    pub fn audit(&self, inequality: &str) -> impl Iterator<Item = &AuditRow> {
        let name = inequality.to_string();
        self.audits.iter().filter(move |a| a.inequality == name)
    }
}

/// One point of a plot series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub series: String,
}

/// Provenance block written atop every output file.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunHeader {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub timestamp_unix: u64,
    pub config: Option<String>,
    #[serde(default)]
    pub runtimes_s: BTreeMap<String, f64>,
}

impl RunHeader {
    pub fn new(command: &str, seed: Option<u64>, config: Option<String>) -> Self {
        Self {
            tool: "riesz-sphere".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed,
            timestamp_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            config,
            runtimes_s: BTreeMap::new(),
        }
    }

    /// `# `-prefixed lines; the config echo is indented one level.
    pub fn comment_block(&self) -> String {
        let mut s = format!(
            "# {} {}\n# command: {}\n",
            self.tool, self.version, self.command
        );
        if let Some(seed) = self.seed {
            s.push_str(&format!("# seed: {seed}\n"));
        }
        s.push_str(&format!("# timestamp_unix: {}\n", self.timestamp_unix));
        if let Some(cfg) = &self.config {
            s.push_str("# config:\n");
            for line in cfg.lines() {
                s.push_str(&format!("#   {line}\n"));
            }
        }
        s
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => fmt_num(x),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// CSV text for result rows: parameter columns, then metric columns.
pub fn rows_csv(header: &RunHeader, rows: &[ResultRow]) -> String {
    let pkeys: BTreeSet<&String> = rows.iter().flat_map(|r| r.params.keys()).collect();
    let mkeys: BTreeSet<&String> = rows.iter().flat_map(|r| r.metrics.keys()).collect();
    let mut out = header.comment_block();
    let cols: Vec<&str> = pkeys.iter().chain(mkeys.iter()).map(|s| s.as_str()).collect();
    out.push_str(&cols.join(","));
    out.push('\n');
    for r in rows {
        let mut line: Vec<String> = pkeys
            .iter()
            .map(|k| r.params.get(*k).map(cell).unwrap_or_default())
            .collect();
        line.extend(mkeys.iter().map(|k| r.metrics.get(*k).map(|v| fmt_num(*v)).unwrap_or_default()));
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn audits_csv(header: &RunHeader, audits: &[AuditRow]) -> String {
    let pkeys: BTreeSet<&String> = audits.iter().flat_map(|r| r.params.keys()).collect();
    let rkeys: BTreeSet<&String> = audits.iter().flat_map(|r| r.reference.keys()).collect();
    let mut out = header.comment_block();
    let mut cols: Vec<String> = vec!["inequality".into()];
    cols.extend(pkeys.iter().map(|k| k.to_string()));
    cols.extend(
        [
            "hard",
            "passed",
            "checks",
            "violations",
            "worst_margin",
            "constant",
            "refined_constant",
            "relative_change",
            "witness_trial",
            "witness_point",
            "witness_lhs",
            "witness_rhs",
        ]
        .map(String::from),
    );
    cols.extend(rkeys.iter().map(|k| format!("ref_{k}")));
    out.push_str(&cols.join(","));
    out.push('\n');
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
    for a in audits {
        let mut line = vec![a.inequality.clone()];
        line.extend(pkeys.iter().map(|k| a.params.get(*k).map(cell).unwrap_or_default()));
        line.push(a.hard.to_string());
        line.push(a.passed.to_string());
        line.push(a.checks.to_string());
        line.push(a.violations.to_string());
        line.push(opt(a.worst_margin));
        line.push(opt(a.constant));
        line.push(opt(a.refined_constant));
        line.push(opt(a.relative_change));
        match &a.witness {
            Some(w) => {
                line.push(w.trial.to_string());
                line.push(w.point.to_string());
                line.push(fmt_num(w.lhs));
                line.push(fmt_num(w.rhs));
            }
            None => line.extend(std::iter::repeat(String::new()).take(4)),
        }
        line.extend(rkeys.iter().map(|k| opt(a.reference.get(*k).copied())));
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn plot_csv(header: &RunHeader, points: &[PlotPoint]) -> String {
    let mut out = header.comment_block();
    out.push_str("x,y,series\n");
    for p in points {
        out.push_str(&format!("{},{},{}\n", fmt_num(p.x), fmt_num(p.y), p.series));
    }
    out
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub reports: Vec<ExperimentReport>,
    pub plots: BTreeMap<String, Vec<PlotPoint>>,
}

/// Writes report.json, tables/*.csv and plotdata/*.csv under `dir`.
pub fn write_outputs(dir: &Path, header: &RunHeader, out: &RunOutput) -> Result<Vec<PathBuf>> {
    let tables = dir.join("tables");
    let plots = dir.join("plotdata");
    fs::create_dir_all(&tables)?;
    fs::create_dir_all(&plots)?;
    let mut header = header.clone();
    for r in &out.reports {
        for (stage, secs) in &r.runtimes {
            header.runtimes_s.insert(format!("{}.{stage}", r.experiment), *secs);
        }
    }
    let mut written = Vec::new();
    let json = serde_json::json!({ "header": header, "reports": out.reports });
    let path = dir.join("report.json");
    let mut f = fs::File::create(&path)?;
    serde_json::to_writer_pretty(&mut f, &json)?;
    f.write_all(b"\n")?;
    written.push(path);
    for r in &out.reports {
        if !r.rows.is_empty() {
            let path = tables.join(format!("{}.csv", r.experiment));
            fs::write(&path, rows_csv(&header, &r.rows))?;
            written.push(path);
        }
        if !r.audits.is_empty() {
            let path = tables.join(format!("{}_audits.csv", r.experiment));
            fs::write(&path, audits_csv(&header, &r.audits))?;
            written.push(path);
        }
    }
    for (name, pts) in &out.plots {
        let path = plots.join(format!("{name}.csv"));
        fs::write(&path, plot_csv(&header, pts))?;
        written.push(path);
    }
    Ok(written)
}
