//! Query execution: build the system model, keep the states that satisfy
//! every `where` constraint, and project the selected fields.

use std::path::{Path, PathBuf};

use serde::Serialize;
use thiserror::Error;

use crate::compose::{build_system_model_with, ComposeError};
use crate::model::{ComponentLibrary, Configuration, ModeStatus, QualityMap, SystemGraph};
use crate::par::Exec;
use crate::qrmodel::QRModel;
use crate::sqdl::{parse_component_library, parse_system_file, Constraints, ParseError, Query, SelectField};
use crate::synthesize::{eval_reliability, mode_tuple, reliability_expr};

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {error}")]
    Parse { path: PathBuf, error: ParseError },
    #[error(transparent)]
    Compose(#[from] ComposeError),
}

/// Number of components whose whole segment is `0`.
pub fn failure_count(model: &QRModel, config: &Configuration) -> usize {
    (0..model.components().len())
        .filter(|&ci| model.segment(config, ci).iter().all(|s| *s == ModeStatus::Failed))
        .count()
}

/// Number of `Y` slots.
pub fn suspend_count(config: &Configuration) -> usize {
    config
        .slots()
        .iter()
        .filter(|s| **s == ModeStatus::Suspended)
        .count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    #[serde(serialize_with = "as_string")]
    pub config: Configuration,
    pub tuple: Vec<usize>,
    /// Per component, the status of each of its modes.
    #[serde(skip)]
    pub segments: Vec<Vec<ModeStatus>>,
    pub input_levels: Vec<f64>,
    pub output_values: Vec<f64>,
    pub reliability: f64,
    pub operate_prob: f64,
    pub failures: usize,
    pub suspensions: usize,
}

fn as_string<S: serde::Serializer>(c: &Configuration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Footnotes {
    /// Largest failure count among the surviving rows.
    pub max_failures: Option<usize>,
    /// Components whose full failure shows up in no surviving row.
    pub inadmissible: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub name: String,
    pub components: Vec<String>,
    pub select: Vec<SelectField>,
    pub rows: Vec<ResultRow>,
    pub footnotes: Footnotes,
}

impl ResultTable {
    pub fn configs(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.config.to_string()).collect()
    }

    pub fn row(&self, config: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.config.to_string() == config)
    }
}

/// Output requirement of constraint lists at one of the state's own levels:
/// the bound paired with the largest queried input not above `level`.
fn bound_at(levels: &[f64], bounds: &[f64], level: f64) -> Option<f64> {
    levels
        .iter()
        .zip(bounds)
        .filter(|(l, _)| **l <= level)
        .max_by(|a, b| a.0.total_cmp(b.0))
        .map(|(_, b)| *b)
}

fn quality_ok(c: &Constraints, q: &QualityMap) -> bool {
    let Some(levels) = &c.input_levels else {
        return true;
    };
    if c.output_min.is_none() && c.output_max.is_none() {
        return levels.iter().all(|&l| q.lookup(l) > 0.0);
    }
    q.pairs().iter().all(|&(level, out)| {
        let min_ok = c
            .output_min
            .as_ref()
            .and_then(|m| bound_at(levels, m, level))
            .map_or(true, |m| out >= m);
        let max_ok = c
            .output_max
            .as_ref()
            .and_then(|m| bound_at(levels, m, level))
            .map_or(true, |m| out <= m);
        min_ok && max_ok
    })
}

pub fn evaluate_query(q: &Query, graph: &SystemGraph, model: &QRModel) -> ResultTable {
    evaluate_query_with(q, graph, model, Exec::default())
}

pub fn evaluate_query_with(q: &Query, graph: &SystemGraph, model: &QRModel, exec: Exec) -> ResultTable {
    let rel_expr = reliability_expr(graph);
    let assignment = model.assignment();
    let c = &q.constraints;
    let clip = c
        .input_levels
        .as_ref()
        .and_then(|l| l.iter().copied().min_by(|a, b| a.total_cmp(b)));

    let candidates: Vec<Option<ResultRow>> = exec.map(model.states(), |s| {
        let failures = failure_count(model, &s.config);
        let suspensions = suspend_count(&s.config);
        if !c.failure.admits(failures as u32) || !c.suspend.admits(suspensions as u32) {
            return None;
        }
        let operate_prob = s.expr.eval(&assignment).expect("all model variables assigned");
        if !c.operate_prob.admits(operate_prob) {
            return None;
        }
        let reliability = eval_reliability(&rel_expr, model, &s.config);
        if !c.reliability.admits(reliability) || !quality_ok(c, &s.quality) {
            return None;
        }
        let shown = match clip {
            Some(m) => s.quality.clipped(m),
            None => s.quality.clone(),
        };
        Some(ResultRow {
            config: s.config.clone(),
            tuple: mode_tuple(model, &s.config),
            segments: (0..model.components().len())
                .map(|ci| model.segment(&s.config, ci).to_vec())
                .collect(),
            input_levels: shown.levels(),
            output_values: shown.outputs(),
            reliability,
            operate_prob,
            failures,
            suspensions,
        })
    });
    let mut rows: Vec<ResultRow> = candidates.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        b.operate_prob
            .total_cmp(&a.operate_prob)
            .then_with(|| a.config.to_string().cmp(&b.config.to_string()))
    });

    let components = model.component_names();
    let inadmissible = (0..components.len())
        .filter(|&ci| {
            !rows
                .iter()
                .any(|r| r.segments[ci].iter().all(|s| *s == ModeStatus::Failed))
        })
        .map(|ci| components[ci].clone())
        .collect();
    let footnotes = Footnotes {
        max_failures: rows.iter().map(|r| r.failures).max(),
        inadmissible,
    };
    ResultTable {
        name: q.display_name().to_string(),
        components,
        select: q.select.clone(),
        rows,
        footnotes,
    }
}

fn read(path: &Path) -> Result<String, QueryError> {
    std::fs::read_to_string(path).map_err(|source| QueryError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and validates a `.qr` file and a `.sys` file.
pub fn load_system(system: &Path, qrspec: &Path) -> Result<(SystemGraph, ComponentLibrary), QueryError> {
    let lib = parse_component_library(&read(qrspec)?).map_err(|error| QueryError::Parse {
        path: qrspec.to_path_buf(),
        error,
    })?;
    let graph = parse_system_file(&read(system)?, &lib).map_err(|error| QueryError::Parse {
        path: system.to_path_buf(),
        error,
    })?;
    Ok((graph, lib))
}

/// Runs a query whose `from` paths are resolved against `base_dir`.
pub fn run_query(q: &Query, base_dir: &Path) -> Result<ResultTable, QueryError> {
    run_query_with(q, base_dir, Exec::default())
}

pub fn run_query_with(q: &Query, base_dir: &Path, exec: Exec) -> Result<ResultTable, QueryError> {
    let (graph, lib) = load_system(&base_dir.join(&q.system_file), &base_dir.join(&q.qrspec_file))?;
    let model = build_system_model_with(&graph, &lib, graph.policy(), exec)?;
    Ok(evaluate_query_with(q, &graph, &model, exec))
}

/// `C1 = (m_1^1:OP, m_1^2:NA)` for each component.
pub fn describe_segments(components: &[String], segments: &[Vec<ModeStatus>]) -> String {
    components
        .iter()
        .zip(segments)
        .map(|(c, seg)| {
            let modes: Vec<String> = seg
                .iter()
                .enumerate()
                .map(|(k, s)| format!("m_{}^{}:{}", crate::model::short_name(c), k + 1, s.legend()))
                .collect();
            format!("{c} = ({})", modes.join(", "))
        })
        .collect::<Vec<_>>()
        .join("  ")
}
