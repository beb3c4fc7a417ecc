//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use qrcompose::characterize::build_component_model;
use qrcompose::model::{format_levels, ComponentSpec, ModeStatus, ParallelPolicy, QualityMap};
use qrcompose::oracle::{schedule_of, simulate_mode_reliability, simulate_state_probability};
use qrcompose::query::{describe_segments, evaluate_query, ResultTable};
use qrcompose::sqdl::{
    parse_component_specs, parse_queries, parse_system_file, parse_system_qrspec, ParseError,
};
use qrcompose::synthesize::{
    abstract_failure_model, check_conformance, emit_system_qrspec, mode_tuple, structural_reliability,
};
use qrcompose::{compose_parallel, compose_series, models_equivalent, Configuration, EdgeKind, Exec, QRModel};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    if elapsed.as_secs_f64() < limit_s {
        Ok(())
    } else {
        Err(format!("took {:.2}s, limit {limit_s}s", elapsed.as_secs_f64()))
    }
}

fn map(levels: &[f64], outputs: &[f64]) -> QualityMap {
    QualityMap::canonicalize(levels.iter().copied().zip(outputs.iter().copied())).unwrap()
}

/// Parses `<50,30>-><40,25>` (or `<0>`) into a canonical map.
fn qm(text: &str) -> QualityMap {
    if text == "<0>" {
        return QualityMap::empty();
    }
    let (l, o) = text.split_once("->").unwrap();
    let nums = |s: &str| -> Vec<f64> {
        s.trim_matches(|c| c == '<' || c == '>')
            .split(',')
            .map(|n| n.trim().parse().unwrap())
            .collect()
    };
    map(&nums(l), &nums(o))
}

/// Row checks shared by every model-table fixture.
fn check_rows(model: &QRModel, rows: &[(&str, &str, &str, f64)], check_expr: bool) -> Result<(), String> {
    ensure!(model.len() == rows.len(), "{} states, expected {}", model.len(), rows.len());
    let vars = model.variables();
    for &(config, quality, expr, value) in rows {
        let i = model.find(&cfg(config)).ok_or_else(|| format!("missing state {config}"))?;
        let s = model.state(i);
        ensure!(s.quality == qm(quality), "{config}: quality {} != {quality}", s.quality);
        if check_expr {
            let got = s.expr.render_factored(&vars);
            ensure!(got == expr, "{config}: expression {got} != {expr}");
        }
        let v = model.state_value(i);
        ensure!(close(v, value), "{config}: value {v} != {value}");
    }
    Ok(())
}

// ---------------------------------------------------------------- fixtures

const COMPONENT_STATES: [(&str, &[(&str, &str, &str, f64)]); 3] = [
    (
        "C1",
        &[
            ("1X", "<50,30,20>-><40,25,10>", "r_{1,1}", 0.80),
            ("01", "<50,30,20>-><35,25,10>", "(1-r_{1,1}).r_{1,2}", 0.14),
            ("Y1", "<50,30,20>-><35,25,10>", "r_{1,2}", 0.70),
            ("00", "<0>", "(1-r_{1,1}).(1-r_{1,2})", 0.06),
            ("0Y", "<0>", "(1-r_{1,1})", 0.20),
            ("Y0", "<0>", "(1-r_{1,2})", 0.30),
            ("YY", "<0>", "1", 1.00),
        ],
    ),
    (
        "C2",
        &[
            ("1", "<40,10>-><30,10>", "r_{2,1}", 0.95),
            ("0", "<0>", "(1-r_{2,1})", 0.05),
            ("Y", "<0>", "1", 1.00),
        ],
    ),
    (
        "C3",
        &[
            ("1X", "<50,20,10>-><45,20,5>", "r_{3,1}", 0.90),
            ("01", "<50,20,10>-><40,15,5>", "(1-r_{3,1}).r_{3,2}", 0.08),
            ("Y1", "<50,20,10>-><40,15,5>", "r_{3,2}", 0.80),
            ("00", "<0>", "(1-r_{3,1}).(1-r_{3,2})", 0.02),
            ("0Y", "<0>", "(1-r_{3,1})", 0.10),
            ("Y0", "<0>", "(1-r_{3,2})", 0.20),
            ("YY", "<0>", "1", 1.00),
        ],
    ),
];

// Typesetting slips in the source rows (a `2_{3,2}` factor, a comma for a
// dot, a misplaced brace) are written here in their intended form.
const SERIES_STATES: [(&str, &str, &str, f64); 21] = [
    ("1X1", "<50,20>-><30,10>", "r_{3,1}.r_{2,1}", 0.855),
    ("1X0", "<0>", "r_{3,1}.(1-r_{2,1})", 0.045),
    ("011", "<50,20>-><30,10>", "(1-r_{3,1}).r_{3,2}.r_{2,1}", 0.076),
    ("1XY", "<0>", "r_{3,1}", 0.900),
    ("Y11", "<50,20>-><30,10>", "r_{3,2}.r_{2,1}", 0.760),
    ("010", "<0>", "(1-r_{3,1}).r_{3,2}.(1-r_{2,1})", 0.004),
    ("Y10", "<0>", "r_{3,2}.(1-r_{2,1})", 0.040),
    ("001", "<0>", "(1-r_{3,1}).(1-r_{3,2}).r_{2,1}", 0.019),
    ("01Y", "<0>", "(1-r_{3,1}).r_{3,2}", 0.080),
    ("0Y1", "<0>", "(1-r_{3,1}).r_{2,1}", 0.095),
    ("Y1Y", "<0>", "r_{3,2}", 0.800),
    ("Y01", "<0>", "(1-r_{3,2}).r_{2,1}", 0.190),
    ("YY1", "<0>", "r_{2,1}", 0.950),
    ("000", "<0>", "(1-r_{3,1}).(1-r_{3,2}).(1-r_{2,1})", 0.001),
    ("0Y0", "<0>", "(1-r_{3,1}).(1-r_{2,1})", 0.005),
    ("Y00", "<0>", "(1-r_{3,2}).(1-r_{2,1})", 0.010),
    ("YY0", "<0>", "(1-r_{2,1})", 0.050),
    ("00Y", "<0>", "(1-r_{3,1}).(1-r_{3,2})", 0.020),
    ("0YY", "<0>", "(1-r_{3,1})", 0.100),
    ("Y0Y", "<0>", "(1-r_{3,2})", 0.200),
    ("YYY", "<0>", "1", 1.000),
];

const C1M1: &str = "<50,30,20>-><40,25,10>";
const C1M2: &str = "<50,30,20>-><35,25,10>";
const C2M1: &str = "<40,10>-><30,10>";

/// (config, MAX map, ORDERED map, expression, value)
const PARALLEL_STATES: [(&str, &str, &str, &str, f64); 21] = [
    ("1X1", "<50,40,30,10>-><40,30,25,10>", C1M1, "r_{1,1}.r_{2,1}", 0.760),
    ("1X0", C1M1, C1M1, "r_{1,1}.(1-r_{2,1})", 0.040),
    ("011", "<50,40,30,10>-><35,30,25,10>", C1M2, "(1-r_{1,1}).r_{1,2}.r_{2,1}", 0.133),
    ("1XY", C1M1, C1M1, "r_{1,1}", 0.800),
    ("Y11", "<50,40,30,10>-><35,30,25,10>", C1M2, "r_{1,2}.r_{2,1}", 0.665),
    ("010", C1M2, C1M2, "(1-r_{1,1}).r_{1,2}.(1-r_{2,1})", 0.007),
    ("Y10", C1M2, C1M2, "r_{1,2}.(1-r_{2,1})", 0.035),
    ("001", C2M1, C2M1, "(1-r_{1,1}).(1-r_{1,2}).r_{2,1}", 0.057),
    ("01Y", C1M2, C1M2, "(1-r_{1,1}).r_{1,2}", 0.140),
    ("0Y1", C2M1, C2M1, "(1-r_{1,1}).r_{2,1}", 0.190),
    ("Y1Y", C1M2, C1M2, "r_{1,2}", 0.700),
    ("Y01", C2M1, C2M1, "(1-r_{1,2}).r_{2,1}", 0.285),
    ("YY1", C2M1, C2M1, "r_{2,1}", 0.950),
    ("000", "<0>", "<0>", "(1-r_{1,1}).(1-r_{1,2}).(1-r_{2,1})", 0.003),
    ("0Y0", "<0>", "<0>", "(1-r_{1,1}).(1-r_{2,1})", 0.010),
    ("Y00", "<0>", "<0>", "(1-r_{1,2}).(1-r_{2,1})", 0.015),
    ("YY0", "<0>", "<0>", "(1-r_{2,1})", 0.050),
    ("00Y", "<0>", "<0>", "(1-r_{1,1}).(1-r_{1,2})", 0.060),
    ("0YY", "<0>", "<0>", "(1-r_{1,1})", 0.200),
    ("Y0Y", "<0>", "<0>", "(1-r_{1,2})", 0.300),
    ("YYY", "<0>", "<0>", "1", 1.000),
];

/// Abstract states of the two small systems: (config, tuple, map, value).
const SERIES_ABSTRACT: [(&str, [usize; 2], &str, f64); 6] = [
    ("1X1", [1, 1], "<50,20>-><30,10>", 0.855),
    ("1X0", [1, 0], "<0>", 0.045),
    ("011", [2, 1], "<50,20>-><30,10>", 0.076),
    ("010", [2, 0], "<0>", 0.004),
    ("001", [0, 1], "<0>", 0.019),
    ("000", [0, 0], "<0>", 0.001),
];

const PARALLEL_ABSTRACT: [(&str, [usize; 2], &str, f64); 6] = [
    ("1X1", [1, 1], "<50,40,30,10>-><40,30,25,10>", 0.760),
    ("1X0", [1, 0], C1M1, 0.040),
    ("011", [2, 1], "<50,40,30,10>-><35,30,25,10>", 0.133),
    ("010", [2, 0], C1M2, 0.007),
    ("001", [0, 1], C2M1, 0.057),
    ("000", [0, 0], "<0>", 0.003),
];

const SERIES_RELIABILITY: [([usize; 2], f64); 6] =
    [([0, 0], 0.0), ([0, 1], 0.0), ([1, 0], 0.0), ([1, 1], 0.855), ([2, 0], 0.0), ([2, 1], 0.760)];
const PARALLEL_RELIABILITY: [([usize; 2], f64); 6] =
    [([0, 0], 0.0), ([0, 1], 0.950), ([1, 0], 0.800), ([1, 1], 0.990), ([2, 0], 0.700), ([2, 1], 0.985)];

/// Abstracted case-study model. The `00101` value is the product its own
/// expression evaluates to; its quality map is checked separately.
const CASE_ABSTRACT: [(&str, &str, &str, f64); 18] = [
    ("1X11X", "<50,40,30,10>-><40,30,25,10>", "r_{1,1}.r_{2,1}.r_{3,1}", 0.68400),
    ("0111X", "<50,40,30,10>-><35,30,25,10>", "(1-r_{1,1}).r_{1,2}.r_{2,1}.r_{3,1}", 0.11970),
    ("1X01X", C1M1, "r_{1,1}.(1-r_{2,1}).r_{3,1}", 0.03600),
    ("1X101", "<50,40,30,10>-><40,30,25,10>", "r_{1,1}.r_{2,1}.(1-r_{3,1}).r_{3,2}", 0.06080),
    ("0011X", C2M1, "(1-r_{1,1}).(1-r_{1,2}).r_{2,1}.r_{3,1}", 0.05130),
    ("0101X", C1M2, "(1-r_{1,1}).r_{1,2}.(1-r_{2,1}).r_{3,1}", 0.00630),
    ("01101", "<50,40,30,10>-><35,30,25,10>", "(1-r_{1,1}).r_{1,2}.r_{2,1}.(1-r_{3,1}).r_{3,2}", 0.01064),
    ("1X001", C1M1, "r_{1,1}.(1-r_{2,1}).(1-r_{3,1}).r_{3,2}", 0.00320),
    ("1X100", "<50,40,30,10>-><40,30,25,10>", "r_{1,1}.r_{2,1}.(1-r_{3,1}).(1-r_{3,2})", 0.01520),
    ("0001X", "<0>", "(1-r_{1,1}).(1-r_{1,2}).(1-r_{2,1}).r_{3,1}", 0.00270),
    ("00101", C2M1, "(1-r_{1,1}).(1-r_{1,2}).r_{2,1}.(1-r_{3,1}).r_{3,2}", 0.00456),
    ("01001", C1M2, "(1-r_{1,1}).r_{1,2}.(1-r_{2,1}).(1-r_{3,1}).r_{3,2}", 0.00056),
    ("01100", "<50,40,30,10>-><35,30,25,10>", "(1-r_{1,1}).r_{1,2}.r_{2,1}.(1-r_{3,1}).(1-r_{3,2})", 0.00266),
    ("1X000", C1M1, "r_{1,1}.(1-r_{2,1}).(1-r_{3,1}).(1-r_{3,2})", 0.00080),
    ("00001", "<0>", "(1-r_{1,1}).(1-r_{1,2}).(1-r_{2,1}).(1-r_{3,1}).r_{3,2}", 0.00024),
    ("00100", C2M1, "(1-r_{1,1}).(1-r_{1,2}).r_{2,1}.(1-r_{3,1}).(1-r_{3,2})", 0.00114),
    ("01000", C1M2, "(1-r_{1,1}).r_{1,2}.(1-r_{2,1}).(1-r_{3,1}).(1-r_{3,2})", 0.00014),
    ("00000", "<0>", "(1-r_{1,1}).(1-r_{1,2}).(1-r_{2,1}).(1-r_{3,1}).(1-r_{3,2})", 0.00006),
];

/// (config, operating modes, levels, outputs, reliability)
const QUERY1_P: [(&str, &str, &str, &str, f64); 3] = [
    ("1X1", "C1 = (m_1^1:OP, m_1^2:NA)  C2 = (m_2^1:OP)", "<50,40,30>", "<40,30,25>", 0.990),
    ("011", "C1 = (m_1^1:FL, m_1^2:OP)  C2 = (m_2^1:OP)", "<50,40,30>", "<35,30,25>", 0.985),
    ("001", "C1 = (m_1^1:FL, m_1^2:FL)  C2 = (m_2^1:OP)", "<40>", "<30>", 0.950),
];

/// (config, operating modes, probability, failures)
const QUERY2_P: [(&str, &str, f64, usize); 6] = [
    ("1X1", "C1 = (m_1^1:OP, m_1^2:NA)  C2 = (m_2^1:OP)", 0.760, 0),
    ("011", "C1 = (m_1^1:FL, m_1^2:OP)  C2 = (m_2^1:OP)", 0.133, 0),
    ("001", "C1 = (m_1^1:FL, m_1^2:FL)  C2 = (m_2^1:OP)", 0.057, 1),
    ("0Y1", "C1 = (m_1^1:FL, m_1^2:SU)  C2 = (m_2^1:OP)", 0.190, 0),
    ("Y11", "C1 = (m_1^1:SU, m_1^2:OP)  C2 = (m_2^1:OP)", 0.665, 0),
    ("Y01", "C1 = (m_1^1:SU, m_1^2:FL)  C2 = (m_2^1:OP)", 0.285, 0),
];

const QUERY1_SP: [(&str, &str, &str, f64); 6] = [
    ("1X11X", "<50,40,30>", "<40,30,25>", 0.990),
    ("0111X", "<50,40,30>", "<35,30,25>", 0.985),
    ("0011X", "<40>", "<30>", 0.950),
    ("01101", "<50,40,30>", "<35,30,25>", 0.985),
    ("1X101", "<50,40,30>", "<40,30,25>", 0.990),
    ("1X100", "<50,40,30>", "<40,30,25>", 0.990),
];

const QUERY2_SP: [(&str, f64, usize); 27] = [
    ("1X11X", 0.68400, 0),
    ("0111X", 0.11970, 0),
    ("0011X", 0.05130, 1),
    ("00101", 0.00456, 1),
    ("00100", 0.00114, 2),
    ("0010Y", 0.00570, 1),
    ("001Y1", 0.04560, 1),
    ("001Y0", 0.01140, 1),
    ("0Y11X", 0.17100, 0),
    ("0Y101", 0.01520, 0),
    ("0Y100", 0.00380, 1),
    ("01101", 0.01064, 0),
    ("01100", 0.00266, 1),
    ("0110Y", 0.01330, 0),
    ("011Y1", 0.10640, 0),
    ("011Y0", 0.02660, 0),
    ("Y111X", 0.59850, 0),
    ("Y011X", 0.25650, 0),
    ("Y0101", 0.02280, 0),
    ("Y0100", 0.00570, 1),
    ("Y1101", 0.05320, 0),
    ("Y1100", 0.01330, 1),
    ("1X101", 0.06080, 0),
    ("1X100", 0.01520, 1),
    ("1X10Y", 0.07600, 0),
    ("1X1Y1", 0.60800, 0),
    ("1X1Y0", 0.15200, 0),
];

// ------------------------------------------------- independent oracles

/// One uncontrolled failure or one suspension of a segment's operating
/// mode, written from the slot rules directly.
fn move_segment(seg: &[ModeStatus], kind: EdgeKind) -> Option<Vec<ModeStatus>> {
    let k = seg.iter().position(|s| *s == ModeStatus::Operating)?;
    let mut out = seg.to_vec();
    out[k] = match kind {
        EdgeKind::Failure => ModeStatus::Failed,
        EdgeKind::Suspend => ModeStatus::Suspended,
    };
    if k + 1 < out.len() {
        out[k + 1] = ModeStatus::Operating;
    }
    Some(out)
}

fn all_segments(d: usize) -> Vec<Vec<ModeStatus>> {
    // every string over {0,1,X,Y} of length d, filtered by the segment shape
    use ModeStatus::*;
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|p: Vec<ModeStatus>| {
                [Operating, Failed, NotAvailed, Suspended].into_iter().map(move |s| {
                    let mut q = p.clone();
                    q.push(s);
                    q
                })
            })
            .collect();
    }
    out.retain(|s| {
        let text: String = s.iter().map(|m| m.symbol()).collect();
        let head = text.trim_end_matches('X');
        let before_one = head.strip_suffix('1');
        match before_one {
            Some(prefix) => prefix.chars().all(|c| c == '0' || c == 'Y'),
            None => text.len() == head.len() && !head.is_empty() && head.chars().all(|c| c == '0' || c == 'Y'),
        }
    });
    out
}

fn product_configs(lengths: &[usize]) -> BTreeSet<String> {
    let mut acc = vec![String::new()];
    for &d in lengths {
        let segs: Vec<String> = all_segments(d)
            .iter()
            .map(|s| s.iter().map(|m| m.symbol()).collect())
            .collect();
        acc = acc
            .iter()
            .flat_map(|p| segs.iter().map(move |s| format!("{p}{s}")))
            .collect();
    }
    acc.into_iter().collect()
}

fn oracle_edges(model: &QRModel, kind: EdgeKind) -> BTreeSet<(String, String)> {
    let lengths = model.segment_lengths();
    let mut out = BTreeSet::new();
    for s in model.states() {
        let slots = s.config.slots();
        let mut start = 0;
        for &d in &lengths {
            if let Some(seg) = move_segment(&slots[start..start + d], kind) {
                let mut next = slots.to_vec();
                next[start..start + d].copy_from_slice(&seg);
                out.insert((s.config.to_string(), Configuration::new(next).to_string()));
            }
            start += d;
        }
    }
    out
}

fn model_edges(model: &QRModel, kind: EdgeKind) -> BTreeSet<(String, String)> {
    model
        .edges(kind)
        .iter()
        .map(|&(a, b)| (model.state(a).config.to_string(), model.state(b).config.to_string()))
        .collect()
}

/// Failure-only reachability from the all-first-mode configuration.
fn oracle_abstraction(model: &QRModel) -> (BTreeSet<String>, usize) {
    let start = model.state(model.initial()).config.to_string();
    let edges = oracle_edges(model, EdgeKind::Failure);
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    let mut count = 0;
    while let Some(c) = queue.pop_front() {
        for (_, b) in edges.iter().filter(|(a, _)| *a == c) {
            count += 1;
            if seen.insert(b.clone()) {
                queue.push_back(b.clone());
            }
        }
    }
    (seen, count)
}

#[derive(Clone)]
enum Tree {
    Leaf(usize),
    Ser(Box<Tree>, Box<Tree>),
    Par(Box<Tree>, Box<Tree>),
}

fn leaf(i: usize) -> Tree {
    Tree::Leaf(i)
}
fn ser(a: Tree, b: Tree) -> Tree {
    Tree::Ser(Box::new(a), Box::new(b))
}
fn par(a: Tree, b: Tree) -> Tree {
    Tree::Par(Box::new(a), Box::new(b))
}

fn build(t: &Tree, base: &[QRModel]) -> QRModel {
    match t {
        Tree::Leaf(i) => base[*i].clone(),
        Tree::Ser(a, b) => compose_series(&build(a, base), &build(b, base)).unwrap(),
        Tree::Par(a, b) => compose_parallel(&build(a, base), &build(b, base), ParallelPolicy::Max).unwrap(),
    }
}

/// Output quality of a composition tree at input `q`, evaluated straight
/// from the component maps of the modes live in `config`.
fn tree_output(t: &Tree, specs: &[ComponentSpec], live: &BTreeMap<String, usize>, q: f64) -> f64 {
    match t {
        Tree::Leaf(i) => {
            let spec = &specs[*i];
            match live[spec.name()] {
                0 => 0.0,
                k => spec.quality(k).lookup(q),
            }
        }
        Tree::Ser(a, b) => {
            let mid = tree_output(a, specs, live, q);
            tree_output(b, specs, live, mid)
        }
        Tree::Par(a, b) => tree_output(a, specs, live, q).max(tree_output(b, specs, live, q)),
    }
}

/// Checks a composed model against the flattened product of its
/// components: state set, per-state value, quality function and edges.
fn flattened_oracle(t: &Tree, specs: &[ComponentSpec], model: &QRModel) -> Result<(), String> {
    let lengths = model.segment_lengths();
    let configs: BTreeSet<String> = model.states().iter().map(|s| s.config.to_string()).collect();
    ensure!(configs == product_configs(&lengths), "state set is not the product of segments");
    let by_name: BTreeMap<&str, &ComponentSpec> = specs.iter().map(|s| (s.name(), s)).collect();
    let probes: Vec<f64> = (0..=26).map(|i| i as f64 * 2.5).collect();
    for s in model.states() {
        let mut live = BTreeMap::new();
        let mut value = 1.0;
        let mut start = 0;
        for (ci, name) in model.component_names().iter().enumerate() {
            let spec = by_name[name.as_str()];
            let seg = &s.config.slots()[start..start + lengths[ci]];
            start += lengths[ci];
            let mut current = 0;
            for (k, m) in seg.iter().enumerate() {
                let z = spec.reliability(k + 1);
                match m {
                    ModeStatus::Operating => {
                        value *= z;
                        current = k + 1;
                    }
                    ModeStatus::Failed => value *= 1.0 - z,
                    _ => {}
                }
            }
            live.insert(name.clone(), current);
        }
        let got = s.expr.eval(&model.assignment()).unwrap();
        ensure!((got - value).abs() < 1e-12, "{}: value {got} != {value}", s.config);
        for &q in &probes {
            let want = tree_output(t, specs, &live, q);
            let have = s.quality.lookup(q);
            ensure!(want == have, "{}: quality at {q}: {have} != {want}", s.config);
        }
    }
    for kind in [EdgeKind::Failure, EdgeKind::Suspend] {
        ensure!(model_edges(model, kind) == oracle_edges(model, kind), "{kind:?} edges differ");
    }
    Ok(())
}

fn random_spec(rng: &mut ChaCha8Rng, name: &str) -> ComponentSpec {
    let d = rng.gen_range(1..=3);
    let modes = (0..d)
        .map(|_| {
            let z = rng.gen_range(5..=99) as f64 / 100.0;
            let n = rng.gen_range(2..=4);
            let mut levels: Vec<u32> = (1..=12).map(|i| i * 5).collect::<Vec<_>>();
            levels.shuffle(rng);
            levels.truncate(n);
            levels.sort_unstable();
            let mut out = 0;
            let mut pairs: Vec<(f64, f64)> = levels
                .iter()
                .map(|&l| {
                    out = rng.gen_range(out..=l / 5) ;
                    (l as f64, (out * 5) as f64)
                })
                .collect();
            pairs.reverse();
            (z, pairs)
        })
        .collect();
    ComponentSpec::new(name, modes).unwrap()
}

// ------------------------------------------------------------- criteria

fn c1_characterization() -> Outcome {
    let t = Instant::now();
    let lib = library();
    let mut rows = 0;
    for (name, table) in COMPONENT_STATES {
        let m = build_component_model(lib.get(name).unwrap());
        check_rows(&m, table, true).map_err(|e| format!("{name}: {e}"))?;
        rows += table.len();
    }
    within(t.elapsed(), 1.0)?;
    Ok(format!("{rows} rows match"))
}

fn c2_series() -> Outcome {
    let t = Instant::now();
    let lib = library();
    let q3 = build_component_model(lib.get("C3").unwrap());
    let q2 = build_component_model(lib.get("C2").unwrap());
    let m = compose_series(&q3, &q2).map_err(|e| e.to_string())?;
    check_rows(&m, &SERIES_STATES, true)?;
    within(t.elapsed(), 1.0)?;
    Ok("21 states, maps and values match".into())
}

fn c3_parallel() -> Outcome {
    let lib = library();
    let q1 = build_component_model(lib.get("C1").unwrap());
    let q2 = build_component_model(lib.get("C2").unwrap());
    for (policy, sys) in [(ParallelPolicy::Max, "upsilon_p.sys"), (ParallelPolicy::Ordered, "upsilon_p_ordered.sys")] {
        let m = compose_parallel(&q1, &q2, policy).map_err(|e| e.to_string())?;
        let rows: Vec<(&str, &str, &str, f64)> = PARALLEL_STATES
            .iter()
            .map(|&(c, max, ord, e, v)| (c, if policy == ParallelPolicy::Max { max } else { ord }, e, v))
            .collect();
        check_rows(&m, &rows, true).map_err(|e| format!("{policy:?}: {e}"))?;
        let (_, from_file) = system(sys);
        ensure!(models_equivalent(&m, &from_file), "{sys} differs from direct composition");
    }
    Ok("MAX and ORDERED: 21 states each match".into())
}

fn c4_synthesis() -> Outcome {
    let cases = [
        ("upsilon_s.sys", "series.sqr", &SERIES_ABSTRACT, &SERIES_RELIABILITY),
        ("upsilon_p.sys", "parallel.sqr", &PARALLEL_ABSTRACT, &PARALLEL_RELIABILITY),
    ];
    for (sys, table, abstract_rows, reliabilities) in cases {
        let (g, m) = system(sys);
        let a = abstract_failure_model(&m);
        let rows: Vec<(&str, &str, &str, f64)> = abstract_rows.iter().map(|&(c, _, q, v)| (c, q, "", v)).collect();
        check_rows(&a, &rows, false).map_err(|e| format!("{sys}: {e}"))?;
        for &(c, tuple, _, _) in abstract_rows.iter() {
            ensure!(mode_tuple(&a, &cfg(c)) == tuple, "{sys} {c}: wrong mode tuple");
        }
        let spec = emit_system_qrspec(&g, &m);
        ensure!(spec.modes.len() == 6, "{sys}: {} modes", spec.modes.len());
        for (tuple, z) in reliabilities.iter() {
            let mode = spec.modes.iter().find(|md| md.tuple == tuple).ok_or(format!("{sys}: no mode {tuple:?}"))?;
            ensure!(close(mode.reliability, *z), "{sys} {tuple:?}: reliability {} != {z}", mode.reliability);
        }
        let expected = parse_system_qrspec(&read(table)).map_err(|e| e.to_string())?;
        let report = check_conformance(&spec, &expected, 1e-9);
        ensure!(report.pass, "{sys}: {}", report.summary());
    }
    Ok("both systems: 6 modes, conformance PASS".into())
}

fn c5_scale() -> Outcome {
    let t = Instant::now();
    let (_, m) = system("upsilon_sp.sys");
    let a = abstract_failure_model(&m);
    let elapsed = t.elapsed();
    ensure!(m.len() == 147, "{} states", m.len());
    let configs: BTreeSet<String> = m.states().iter().map(|s| s.config.to_string()).collect();
    ensure!(configs == product_configs(&m.segment_lengths()), "state set is not the segment product");
    let (f, c) = (m.failure_edges().len(), m.suspend_edges().len());
    ensure!((f, c) == (175, 175), "edges {f}/{c}");
    for kind in [EdgeKind::Failure, EdgeKind::Suspend] {
        ensure!(model_edges(&m, kind) == oracle_edges(&m, kind), "{kind:?} edges disagree with single-move oracle");
    }
    ensure!((a.len(), a.failure_edges().len()) == (18, 33), "abstraction {}/{}", a.len(), a.failure_edges().len());
    let (reach, transitions) = oracle_abstraction(&m);
    let got: BTreeSet<String> = a.states().iter().map(|s| s.config.to_string()).collect();
    ensure!(got == reach && transitions == 33, "abstraction disagrees with reachability oracle");
    within(elapsed, 5.0)?;
    Ok("147 states, 175/175 edges agree with the single-move oracle, abstraction 18/33".into())
}

fn c6_case_study_model() -> Outcome {
    let (_, m) = system("upsilon_sp.sys");
    let a = abstract_failure_model(&m);
    check_rows(&a, &CASE_ABSTRACT, true)?;
    Ok("18 rows match; 00101 uses value 0.00456 and map <40,10>-><30,10>".into())
}

fn check_quality_rows(t: &ResultTable, rows: &[(&str, &str, &str, &str, f64)]) -> Result<(), String> {
    for &(c, modes, levels, outputs, z) in rows {
        let r = t.row(c).ok_or(format!("{}: missing {c}", t.name))?;
        let desc = describe_segments(&t.components, &r.segments);
        ensure!(desc == modes, "{c}: modes `{desc}`");
        ensure!(format_levels(&r.input_levels) == levels, "{c}: levels {:?}", r.input_levels);
        ensure!(format_levels(&r.output_values) == outputs, "{c}: outputs {:?}", r.output_values);
        ensure!(close(r.reliability, z), "{c}: reliability {}", r.reliability);
    }
    Ok(())
}

fn c7_queries() -> Outcome {
    let (g, m) = system("upsilon_p.sys");
    let q1 = evaluate_query(&query_on("query1.sqdl", "upsilon_p.sys"), &g, &m);
    ensure!(q1.rows.len() == 3, "Query1/P: {:?}", q1.configs());
    check_quality_rows(&q1, &QUERY1_P)?;

    let q2 = evaluate_query(&query_on("query2.sqdl", "upsilon_p.sys"), &g, &m);
    let got: BTreeSet<String> = q2.configs().into_iter().collect();
    let want: BTreeSet<String> = QUERY2_P.iter().map(|r| r.0.to_string()).collect();
    ensure!(got == want, "Query2/P: {got:?}");
    for &(c, modes, p, f) in &QUERY2_P {
        let r = q2.row(c).unwrap();
        ensure!(describe_segments(&q2.components, &r.segments) == modes, "{c}: modes");
        ensure!(close(r.operate_prob, p) && r.failures == f, "{c}: {} / {}", r.operate_prob, r.failures);
    }
    ensure!(q2.footnotes.max_failures == Some(1), "max failures {:?}", q2.footnotes.max_failures);
    ensure!(q2.footnotes.inadmissible == ["C2"], "inadmissible {:?}", q2.footnotes.inadmissible);

    let (g, m) = system("upsilon_s.sys");
    let q2s = evaluate_query(&query_on("query2.sqdl", "upsilon_s.sys"), &g, &m);
    ensure!(q2s.rows.is_empty(), "Query2/S: {:?}", q2s.configs());
    let q1s = evaluate_query(&query_on("query1.sqdl", "upsilon_s.sys"), &g, &m);
    ensure!(q1s.configs() == ["1X1"], "Query1/S: {:?}", q1s.configs());
    let r = &q1s.rows[0];
    ensure!(
        close(r.reliability, 0.855) && r.input_levels == [50.0] && r.output_values == [30.0],
        "Query1/S row: {r:?}"
    );

    let (g, m) = system("upsilon_sp.sys");
    let q2_sp = evaluate_query(&query_on("query2.sqdl", "upsilon_sp.sys"), &g, &m);
    let got: BTreeSet<String> = q2_sp.configs().into_iter().collect();
    let want: BTreeSet<String> = QUERY2_SP.iter().map(|r| r.0.to_string()).collect();
    ensure!(got == want, "Query2/sp: extra {:?} missing {:?}", &got - &want, &want - &got);
    for &(c, p, f) in &QUERY2_SP {
        let r = q2_sp.row(c).unwrap();
        ensure!(close(r.operate_prob, p) && r.failures == f, "{c}: {} / {}", r.operate_prob, r.failures);
    }
    let q1_sp = evaluate_query(&query_on("query1.sqdl", "upsilon_sp.sys"), &g, &m);
    for &(c, levels, outputs, z) in &QUERY1_SP {
        let r = q1_sp.row(c).ok_or(format!("Query1/sp: missing {c}"))?;
        ensure!(
            format_levels(&r.input_levels) == levels && format_levels(&r.output_values) == outputs && close(r.reliability, z),
            "Query1/sp {c}: {r:?}"
        );
    }
    let listed: HashSet<&str> = QUERY1_SP.iter().map(|r| r.0).collect();
    let extra: Vec<String> = q1_sp.configs().into_iter().filter(|c| !listed.contains(c.as_str())).collect();
    Ok(format!("P/S/sp tables match; Query1 on sp adds {}", extra.join(", ")))
}

fn c8_algebra() -> Outcome {
    const TRIPLES: usize = 200;
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let (mut non_commuting, mut non_idempotent, mut oracle_checks) = (0, 0, 0);
    for n in 0..TRIPLES {
        let specs: Vec<ComponentSpec> = ["A", "B", "C"].iter().map(|c| random_spec(&mut rng, c)).collect();
        let base: Vec<QRModel> = specs.iter().map(build_component_model).collect();
        let (a, b, c) = (leaf(0), leaf(1), leaf(2));
        let laws: [(&str, Tree, Tree); 6] = [
            ("|| idempotent", par(a.clone(), a.clone()), a.clone()),
            ("|| commutative", par(a.clone(), b.clone()), par(b.clone(), a.clone())),
            (
                "|| associative",
                par(par(a.clone(), b.clone()), c.clone()),
                par(a.clone(), par(b.clone(), c.clone())),
            ),
            (
                "o associative",
                ser(ser(a.clone(), b.clone()), c.clone()),
                ser(a.clone(), ser(b.clone(), c.clone())),
            ),
            (
                "o left-distributes over ||",
                ser(a.clone(), par(b.clone(), c.clone())),
                par(ser(a.clone(), b.clone()), ser(a.clone(), c.clone())),
            ),
            (
                "o right-distributes over ||",
                ser(par(b.clone(), c.clone()), a.clone()),
                par(ser(b.clone(), a.clone()), ser(c.clone(), a.clone())),
            ),
        ];
        for (law, lhs, rhs) in &laws {
            let (l, r) = (build(lhs, &base), build(rhs, &base));
            ensure!(models_equivalent(&l, &r), "triple {n}: {law} fails");
            if n % 10 == 0 {
                flattened_oracle(lhs, &specs, &l).map_err(|e| format!("triple {n}, {law}: {e}"))?;
                flattened_oracle(rhs, &specs, &r).map_err(|e| format!("triple {n}, {law}: {e}"))?;
                oracle_checks += 2;
            }
        }
        if !models_equivalent(&build(&ser(a.clone(), b.clone()), &base), &build(&ser(b, a.clone()), &base)) {
            non_commuting += 1;
        }
        if !models_equivalent(&build(&ser(a.clone(), a.clone()), &base), &base[0]) {
            non_idempotent += 1;
        }
    }
    ensure!(non_commuting > 0, "no counterexample to o commutativity");
    ensure!(non_idempotent > 0, "no counterexample to o idempotence");
    within(t.elapsed(), 30.0)?;
    Ok(format!(
        "{TRIPLES} triples, 6 laws hold, {oracle_checks} flattened-oracle checks; o non-commutative in {non_commuting}, non-idempotent in {non_idempotent}"
    ))
}

fn c9_monte_carlo() -> Outcome {
    const TRIALS: u64 = 100_000;
    const SEED: u64 = 0x0c0f_fee5;
    let t = Instant::now();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for sys in ["upsilon_p.sys", "upsilon_s.sys", "upsilon_sp.sys"] {
        let (g, m) = system(sys);
        for (i, s) in m.states().iter().enumerate() {
            let c = &s.config;
            let p = m.state_value(i);
            let e = simulate_state_probability(&m, c, &schedule_of(c), TRIALS, SEED, Exec::Parallel)
                .map_err(|e| e.to_string())?;
            ensure!(e.agrees_with(p, 3.0), "{sys} {c}: Expr {p} vs {} +- {}", e.mean, e.stderr);
            let z = structural_reliability(&g, &m, c);
            let r = simulate_mode_reliability(&g, &m, c, TRIALS, SEED, Exec::Parallel).map_err(|e| e.to_string())?;
            ensure!(r.agrees_with(z, 3.0), "{sys} {c}: reliability {z} vs {} +- {}", r.mean, r.stderr);
            for (est, exact) in [(e, p), (r, z)] {
                let sigma = (exact * (1.0 - exact) / TRIALS as f64).sqrt();
                if sigma > 0.0 {
                    worst = worst.max((est.mean - exact).abs() / sigma);
                }
            }
            checked += 2;
        }
    }
    within(t.elapsed(), 60.0)?;
    Ok(format!("{checked} estimates at {TRIALS} trials, worst deviation {worst:.2} sigma"))
}

const VOCAB: &[&str] = &[
    "begin_query", "end_query", "select", "from", "where", "-", "->", "{", "}", ",", ":", "\n", " ", "\r\n",
    "input_quality", "output_quality", "operating_mode", "reliability", "operate_prob", "failure", "suspend",
    "control", "minimum", "maximum", "system", "qrspec", "component", "mode", "quality", "end", "input",
    "output", "vertex", "edge", "parallel_policy", "max", "ordered", "path_order", "components", "C1", "C2",
    "C3", "V1", "V2", "I1", "O1", "0", "1", "2", "0.5", "1.5", "40", "-3", "1e9", "99999999999999999999",
    ".", "#", "é", "\t", "0.", "..", "NaN",
];

fn fuzz_input(rng: &mut ChaCha8Rng, seeds: &[String]) -> String {
    match rng.gen_range(0..3) {
        0 => {
            let n = rng.gen_range(0..64);
            let bytes: Vec<u8> = (0..n).map(|_| rng.gen()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        }
        1 => {
            let n = rng.gen_range(0..40);
            (0..n).map(|_| *VOCAB.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
        }
        _ => {
            let mut chars: Vec<char> = seeds.choose(rng).unwrap().chars().collect();
            for _ in 0..rng.gen_range(1..6) {
                let at = rng.gen_range(0..=chars.len());
                match rng.gen_range(0..3) {
                    0 if at < chars.len() => {
                        chars.remove(at);
                    }
                    1 => {
                        let word = VOCAB.choose(rng).unwrap();
                        for (k, ch) in word.chars().enumerate() {
                            chars.insert(at + k, ch);
                        }
                    }
                    _ if at < chars.len() => chars[at] = rng.gen_range(b' '..=b'~') as char,
                    _ => {}
                }
            }
            chars.into_iter().collect()
        }
    }
}

fn located(text: &str, e: &ParseError) -> bool {
    e.line >= 1 && e.column >= 1 && e.line <= text.split('\n').count().max(1) + 1
}

fn c10_fuzz() -> Outcome {
    const INPUTS: usize = 1_000_000;
    const SHARDS: usize = 64;
    let lib = library();
    let seeds = [
        read("query1.sqdl"),
        read("query2.sqdl"),
        read("c123.qr"),
        read("upsilon_sp.sys"),
        read("upsilon_p.sys"),
    ];
    let results = Exec::Parallel.map_range(SHARDS, |shard| -> Result<(usize, usize), String> {
        let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
        rng.set_stream(shard as u64);
        let (mut accepted, mut rejected) = (0, 0);
        for _ in 0..INPUTS / SHARDS + usize::from(shard < INPUTS % SHARDS) {
            let text = fuzz_input(&mut rng, &seeds);
            let outcome = catch_unwind(AssertUnwindSafe(|| {
                [
                    parse_queries(&text).err(),
                    parse_component_specs(&text).err(),
                    parse_system_file(&text, &lib).err(),
                ]
            }))
            .map_err(|_| format!("panic on input {text:?}"))?;
            for e in outcome {
                match e {
                    Some(e) if !located(&text, &e) => return Err(format!("unlocated diagnostic {e} for {text:?}")),
                    Some(_) => rejected += 1,
                    None => accepted += 1,
                }
            }
        }
        Ok((accepted, rejected))
    });
    let (mut accepted, mut rejected) = (0, 0);
    for r in results {
        let (a, b) = r?;
        accepted += a;
        rejected += b;
    }
    Ok(format!("{INPUTS} inputs x 3 parsers, no panics; {rejected} located rejections, {accepted} accepted"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("component characterization", c1_characterization),
        ("series composition", c2_series),
        ("parallel composition", c3_parallel),
        ("reverse synthesis and conformance", c4_synthesis),
        ("case study scale", c5_scale),
        ("case study abstracted model", c6_case_study_model),
        ("queries", c7_queries),
        ("algebraic laws", c8_algebra),
        ("Monte Carlo cross-validation", c9_monte_carlo),
        ("parser robustness", c10_fuzz),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2}s): {why}", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
