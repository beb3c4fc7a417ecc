//! Tabular output in three encodings, plus the table builders for each
//! kind of result.

use serde_json::{json, Value};

use crate::model::{format_levels, render_mode_tuple, SystemQRSpec};
use crate::qrmodel::{EdgeKind, QRModel};
use crate::query::{describe_segments, ResultTable};
use crate::sqdl::SelectField;
use crate::synthesize::ConformanceReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Text(String),
    /// Value and the number of decimals shown in text and CSV.
    Num(f64, usize),
    Int(i64),
}

impl Cell {
    fn display(&self) -> String {
        match self {
            Cell::Text(s) => s.clone(),
            Cell::Num(v, p) => format!("{v:.p$}"),
            Cell::Int(i) => i.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Num(v, _) => json!(v),
            Cell::Int(i) => json!(i),
        }
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub notes: Vec<String>,
}

impl Table {
    pub fn new(title: impl Into<String>, columns: &[&str]) -> Self {
        Self {
            title: title.into(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.to_text(),
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_text(&self) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(Cell::display).collect())
            .collect();
        let mut widths: Vec<usize> = self.columns.iter().map(|c| c.chars().count()).collect();
        for row in &cells {
            for (w, c) in widths.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |items: &[String]| -> String {
            let padded: Vec<String> = items
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string()
        };
        let mut out = String::new();
        if !self.title.is_empty() {
            out.push_str(&self.title);
            out.push('\n');
        }
        out.push_str(&line(&self.columns));
        out.push('\n');
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        out.push_str(&rule.join("  "));
        out.push('\n');
        for row in &cells {
            out.push_str(&line(row));
            out.push('\n');
        }
        if self.rows.is_empty() {
            out.push_str("(no rows)\n");
        }
        for n in &self.notes {
            out.push_str(&format!("* {n}\n"));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::display))
                .expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }

    pub fn to_json_value(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        json!({
            "title": self.title,
            "columns": self.columns,
            "rows": rows,
            "notes": self.notes,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json_value()).expect("serializable");
        s.push('\n');
        s
    }
}

/// Several tables in one document; JSON output becomes an array.
pub fn render_all(tables: &[Table], format: Format) -> String {
    match format {
        Format::Json => {
            let values: Vec<Value> = tables.iter().map(Table::to_json_value).collect();
            let mut s = serde_json::to_string_pretty(&values).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => tables
            .iter()
            .map(Table::to_text)
            .collect::<Vec<_>>()
            .join("\n"),
        Format::Csv => tables.iter().map(Table::to_csv).collect(),
    }
}

/// One row per state: configuration, quality levels, expression and value.
pub fn model_table(title: &str, model: &QRModel) -> Table {
    let mut t = Table::new(
        title,
        &["State", "Configuration", "Input Levels", "Output Values", "Expression", "Probability"],
    );
    let vars = model.variables();
    let assignment = model.assignment();
    for (i, s) in model.states().iter().enumerate() {
        t.push(vec![
            Cell::Text(format!("s{}", i + 1)),
            s.config.to_string().into(),
            format_levels(&s.quality.levels()).into(),
            format_levels(&s.quality.outputs()).into(),
            s.expr.render_factored(&vars).into(),
            Cell::Num(s.expr.eval(&assignment).expect("assigned"), 5),
        ]);
    }
    t
}

pub fn edge_table(title: &str, model: &QRModel) -> Table {
    let mut t = Table::new(title, &["Kind", "From", "To"]);
    for kind in [EdgeKind::Failure, EdgeKind::Suspend] {
        for &(a, b) in model.edges(kind) {
            t.push(vec![
                Cell::Text(kind.symbol().to_string()),
                model.state(a).config.to_string().into(),
                model.state(b).config.to_string().into(),
            ]);
        }
    }
    t
}

pub fn spec_table(title: &str, spec: &SystemQRSpec) -> Table {
    let mut t = Table::new(title, &["System Mode", "Reliability", "Input Quality", "Output Quality"]);
    for m in &spec.modes {
        t.push(vec![
            render_mode_tuple(&spec.components, &m.tuple).into(),
            Cell::Num(m.reliability, 3),
            format_levels(&m.quality.levels()).into(),
            format_levels(&m.quality.outputs()).into(),
        ]);
    }
    t
}

pub fn conformance_table(report: &ConformanceReport) -> Table {
    let mut t = Table::new(report.summary(), &["Mode", "Status", "Field", "Expected", "Actual"]);
    for m in &report.matched {
        t.push(vec![m.clone().into(), "match".into(), "".into(), "".into(), "".into()]);
    }
    for m in &report.mismatches {
        t.push(vec![
            m.mode.clone().into(),
            "mismatch".into(),
            m.field.clone().into(),
            m.expected.clone().into(),
            m.actual.clone().into(),
        ]);
    }
    for m in &report.missing {
        t.push(vec![m.clone().into(), "missing".into(), "".into(), "".into(), "".into()]);
    }
    for m in &report.unexpected {
        t.push(vec![m.clone().into(), "unexpected".into(), "".into(), "".into(), "".into()]);
    }
    if let Some(s) = &report.structural {
        t.notes.push(s.clone());
    }
    t
}

pub fn query_table(result: &ResultTable) -> Table {
    let mut columns = vec!["Mode Configuration", "Component Operating Modes"];
    for f in &result.select {
        columns.push(match f {
            SelectField::InputQuality => "Input Quality Levels",
            SelectField::OutputQuality => "Output Quality Values",
            SelectField::OperatingMode => "Operating Mode",
            SelectField::Reliability => "Reliability",
            SelectField::OperateProb => "Operating Probability",
            SelectField::Failure => "# Failure",
            SelectField::Suspend => "# Suspend",
        });
    }
    let mut t = Table::new(result.name.clone(), &columns);
    for r in &result.rows {
        let mut row: Vec<Cell> = vec![
            r.config.to_string().into(),
            describe_segments(&result.components, &r.segments).into(),
        ];
        for f in &result.select {
            row.push(match f {
                SelectField::InputQuality => format_levels(&r.input_levels).into(),
                SelectField::OutputQuality => format_levels(&r.output_values).into(),
                SelectField::OperatingMode => render_mode_tuple(&result.components, &r.tuple).into(),
                SelectField::Reliability => Cell::Num(r.reliability, 3),
                SelectField::OperateProb => Cell::Num(r.operate_prob, 5),
                SelectField::Failure => Cell::Int(r.failures as i64),
                SelectField::Suspend => Cell::Int(r.suspensions as i64),
            });
        }
        t.push(row);
    }
    match result.footnotes.max_failures {
        Some(n) => {
            let mut note = format!("maximum number of failures tolerated = {n}");
            if !result.footnotes.inadmissible.is_empty() {
                note.push_str(&format!(
                    " (failure in {} is not admissible)",
                    result.footnotes.inadmissible.join(", ")
                ));
            }
            t.notes.push(note);
        }
        None => t.notes.push("no configuration satisfies the constraints".into()),
    }
    t
}
