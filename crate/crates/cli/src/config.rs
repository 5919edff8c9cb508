//! Plain-text run configuration.
//!
//! ```text
//! # comment
//! [operator]
//! length = 2pi
//! q = 0
//! [weight]
//! kind = quasi
//! eps = 0.01
//! ```
//!
//! Unknown sections or keys are errors. Paths are relative to the file.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use tavg_core::{Grid, OperatorSpec, WeightSpec};

use crate::csvio;
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorConfig {
    pub length: f64,
    pub diffusion: f64,
    pub q: f64,
    /// CSV `x,a,a0` on the grid nodes; overrides `diffusion`, `q` and `n_nodes`.
    pub coefficients: Option<PathBuf>,
    pub n_nodes: usize,
    pub eigensolver: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightKind {
    Average,
    Quasi,
    Constant,
    Indicator,
    Terminal,
    Table,
}

impl WeightKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "average" => WeightKind::Average,
            "quasi" => WeightKind::Quasi,
            "constant" => WeightKind::Constant,
            "indicator" => WeightKind::Indicator,
            "terminal" => WeightKind::Terminal,
            "table" => WeightKind::Table,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightConfig {
    pub kind: WeightKind,
    pub kappa: f64,
    pub value: f64,
    pub eps: f64,
    pub table: Option<PathBuf>,
    pub t1: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub horizon: f64,
    pub modes: usize,
    pub n_steps: usize,
    pub output_steps: usize,
    pub propagator: String,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureConfig {
    pub delta: f64,
    pub thetas: Vec<f64>,
    pub modes: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub operator: OperatorConfig,
    pub weight: WeightConfig,
    pub run: RunSection,
    pub figure1: FigureConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            operator: OperatorConfig {
                length: 2.0 * PI,
                diffusion: 1.0,
                q: 0.0,
                coefficients: None,
                n_nodes: 1025,
                eigensolver: "auto".into(),
            },
            weight: WeightConfig {
                kind: WeightKind::Average,
                kappa: 0.0,
                value: 1.0,
                eps: 0.01,
                table: None,
                t1: None,
            },
            run: RunSection {
                horizon: 0.1,
                modes: 300,
                n_steps: 2048,
                output_steps: 10,
                propagator: "spectral".into(),
                theta: 0.0,
            },
            figure1: FigureConfig {
                delta: 0.1,
                thetas: vec![1.0, 3.0],
                modes: None,
            },
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("operator", &["length", "diffusion", "q", "coefficients", "n_nodes", "eigensolver"]),
    ("weight", &["kind", "kappa", "value", "eps", "table", "t1"]),
    ("run", &["horizon", "modes", "n_steps", "output_steps", "propagator", "theta"]),
    ("figure1", &["delta", "thetas", "modes"]),
];

/// Real literal, also accepting `pi`, `2pi`, `2*pi` and `pi/2`.
pub fn parse_real(s: &str) -> Option<f64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    if let Some(den) = s.strip_prefix("pi/") {
        return den.trim().parse::<f64>().ok().map(|d| PI / d);
    }
    let head = s.strip_suffix("pi")?.trim_end().trim_end_matches('*').trim();
    if head.is_empty() {
        return Some(PI);
    }
    head.parse::<f64>().ok().map(|v| v * PI)
}

struct Entry {
    value: String,
    line: usize,
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::parse(&text, path, base)
    }

    /// `origin` labels errors; `base` anchors relative paths.
    pub fn parse(text: &str, origin: &Path, base: &Path) -> CliResult<Self> {
        let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let name = name.trim();
                if !SECTIONS.iter().any(|(s, _)| *s == name) {
                    return Err(CliError::parse(origin, line_no, format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::parse(origin, line_no, "expected `key = value`"));
            };
            let Some(sec) = &section else {
                return Err(CliError::parse(origin, line_no, "key outside of any section"));
            };
            let key = key.trim();
            let allowed = SECTIONS.iter().find(|(s, _)| s == sec).map(|(_, k)| *k).unwrap_or(&[]);
            if !allowed.contains(&key) {
                return Err(CliError::parse(origin, line_no, format!("unknown key '{key}' in [{sec}]")));
            }
            let slot = (sec.clone(), key.to_string());
            if entries.contains_key(&slot) {
                return Err(CliError::parse(origin, line_no, format!("duplicate key '{key}' in [{sec}]")));
            }
            entries.insert(
                slot,
                Entry {
                    value: value.trim().to_string(),
                    line: line_no,
                },
            );
        }

        let mut cfg = RunConfig::default();
        let real = |e: &Entry| {
            parse_real(&e.value).ok_or_else(|| CliError::parse(origin, e.line, format!("not a number: '{}'", e.value)))
        };
        let count = |e: &Entry| {
            e.value
                .parse::<usize>()
                .map_err(|_| CliError::parse(origin, e.line, format!("not a count: '{}'", e.value)))
        };
        let path = |e: &Entry| base.join(&e.value);

        for ((sec, key), e) in &entries {
            match (sec.as_str(), key.as_str()) {
                ("operator", "length") => cfg.operator.length = real(e)?,
                ("operator", "diffusion") => cfg.operator.diffusion = real(e)?,
                ("operator", "q") => cfg.operator.q = real(e)?,
                ("operator", "coefficients") => cfg.operator.coefficients = Some(path(e)),
                ("operator", "n_nodes") => cfg.operator.n_nodes = count(e)?,
                ("operator", "eigensolver") => cfg.operator.eigensolver = e.value.clone(),
                ("weight", "kind") => {
                    cfg.weight.kind = WeightKind::parse(&e.value).ok_or_else(|| {
                        CliError::parse(
                            origin,
                            e.line,
                            format!(
                                "unknown weight kind '{}' (average, quasi, constant, indicator, terminal, table)",
                                e.value
                            ),
                        )
                    })?
                }
                ("weight", "kappa") => cfg.weight.kappa = real(e)?,
                ("weight", "value") => cfg.weight.value = real(e)?,
                ("weight", "eps") => cfg.weight.eps = real(e)?,
                ("weight", "table") => cfg.weight.table = Some(path(e)),
                ("weight", "t1") => cfg.weight.t1 = Some(real(e)?),
                ("run", "horizon") => cfg.run.horizon = real(e)?,
                ("run", "modes") => cfg.run.modes = count(e)?,
                ("run", "n_steps") => cfg.run.n_steps = count(e)?,
                ("run", "output_steps") => cfg.run.output_steps = count(e)?,
                ("run", "propagator") => cfg.run.propagator = e.value.clone(),
                ("run", "theta") => cfg.run.theta = real(e)?,
                ("figure1", "delta") => cfg.figure1.delta = real(e)?,
                ("figure1", "thetas") => {
                    cfg.figure1.thetas = e
                        .value
                        .split(',')
                        .map(|t| {
                            parse_real(t).ok_or_else(|| CliError::parse(origin, e.line, format!("not a number: '{t}'")))
                        })
                        .collect::<CliResult<_>>()?
                }
                ("figure1", "modes") => cfg.figure1.modes = Some(count(e)?),
                _ => unreachable!("keys are checked while reading"),
            }
        }
        let kind = cfg.weight.kind;
        let touched = |key: &str| entries.contains_key(&("weight".to_string(), key.to_string()));
        let unused: &[&str] = match kind {
            WeightKind::Average => &["kappa", "value", "eps", "table", "t1"],
            WeightKind::Quasi => &["kappa", "value", "table", "t1"],
            WeightKind::Constant => &["eps", "table", "t1"],
            WeightKind::Indicator => &["table", "t1"],
            WeightKind::Terminal => &["value", "eps", "table", "t1"],
            WeightKind::Table => &["value", "eps"],
        };
        if let Some(key) = unused.iter().find(|k| touched(k)) {
            let line = entries[&("weight".to_string(), key.to_string())].line;
            return Err(CliError::parse(origin, line, format!("'{key}' has no effect for this weight kind")));
        }
        if kind == WeightKind::Table && cfg.weight.table.is_none() {
            return Err(CliError::Usage(format!("{}: weight kind 'table' needs `table = <path>`", origin.display())));
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> CliResult<Arc<Grid>> {
        match &self.operator.coefficients {
            Some(p) => Ok(csvio::read_coefficients(p, self.operator.length)?.0),
            None => Ok(Grid::uniform(self.operator.length, self.operator.n_nodes)?),
        }
    }

    pub fn operator(&self) -> CliResult<OperatorSpec> {
        match &self.operator.coefficients {
            Some(p) => {
                let (grid, a, a0) = csvio::read_coefficients(p, self.operator.length)?;
                Ok(OperatorSpec::tabulated(grid, a, a0)?)
            }
            None => {
                let grid = Grid::uniform(self.operator.length, self.operator.n_nodes)?;
                Ok(OperatorSpec::constant(grid, self.operator.diffusion, self.operator.q)?)
            }
        }
    }

    pub fn weight(&self) -> CliResult<WeightSpec> {
        let w = &self.weight;
        let t = self.run.horizon;
        Ok(match w.kind {
            WeightKind::Average => WeightSpec::average(t),
            WeightKind::Quasi => WeightSpec::quasi(w.eps, t),
            WeightKind::Constant => WeightSpec::constant(w.kappa, w.value, t),
            WeightKind::Indicator => WeightSpec::indicator(w.kappa, w.value, w.eps, t),
            WeightKind::Terminal => WeightSpec::terminal(w.kappa, t),
            WeightKind::Table => {
                let p = w.table.as_ref().expect("checked while parsing");
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                let pieces = WeightSpec::parse_table(&text)?;
                WeightSpec::table(w.kappa, pieces, t, w.t1.unwrap_or(t))
            }
        })
    }
}
