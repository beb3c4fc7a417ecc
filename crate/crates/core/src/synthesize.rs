//! Reverse synthesis of a system-level spec from a composed model, and the
//! conformance check against a hand-written one.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::model::{
    render_mode_tuple, Configuration, QualityMap, SegmentState, SystemGraph, SystemMode, SystemQRSpec,
};
use crate::qrmodel::{ModelState, QRModel};
use crate::rel_algebra::{path_success_expr, RelExpr, VarId};

/// Sub-model reachable from the initial state over failure edges only.
pub fn abstract_failure_model(model: &QRModel) -> QRModel {
    let mut succ: HashMap<usize, Vec<usize>> = HashMap::new();
    for &(a, b) in model.failure_edges() {
        succ.entry(a).or_default().push(b);
    }
    let mut keep = BTreeSet::new();
    let mut todo = VecDeque::from([model.initial()]);
    while let Some(i) = todo.pop_front() {
        if keep.insert(i) {
            todo.extend(succ.get(&i).into_iter().flatten().copied());
        }
    }
    let kept: Vec<usize> = keep.into_iter().collect();
    let local: HashMap<usize, usize> = kept.iter().enumerate().map(|(n, &o)| (o, n)).collect();
    let states: Vec<ModelState> = kept.iter().map(|&i| model.state(i).clone()).collect();
    let failure: Vec<(usize, usize)> = model
        .failure_edges()
        .iter()
        .filter_map(|(a, b)| Some((*local.get(a)?, *local.get(b)?)))
        .collect();
    QRModel::new(model.components().to_vec(), states, failure, Vec::new())
}

/// Per component: the operating mode index, or 0 for a dead segment.
pub fn mode_tuple(model: &QRModel, config: &Configuration) -> Vec<usize> {
    (0..model.components().len())
        .map(|ci| match model.segment_state(config, ci) {
            SegmentState::Live(k) => k,
            SegmentState::Dead => 0,
        })
        .collect()
}

/// Path-success polynomial of a graph over one symbol per component
/// (`VarId` with mode 0 standing for "current-mode reliability").
pub fn reliability_expr(graph: &SystemGraph) -> RelExpr {
    let paths: Vec<Vec<VarId>> = graph
        .component_paths()
        .into_iter()
        .map(|p| p.into_iter().map(|c| VarId::new(c, 0)).collect())
        .collect();
    path_success_expr(&paths)
}

/// Current-mode reliability of every component in `config`; dead segments,
/// whether failed or suspended, contribute 0.
pub fn component_reliabilities(model: &QRModel, config: &Configuration) -> HashMap<String, f64> {
    model
        .components()
        .iter()
        .enumerate()
        .map(|(ci, c)| {
            let z = match model.segment_state(config, ci) {
                SegmentState::Live(k) => c.reliability(k),
                SegmentState::Dead => 0.0,
            };
            (c.name().to_string(), z)
        })
        .collect()
}

/// Evaluates a `reliability_expr` for one configuration.
pub fn eval_reliability(expr: &RelExpr, model: &QRModel, config: &Configuration) -> f64 {
    let z = component_reliabilities(model, config);
    expr.eval_with(|v| z.get(v.component.as_ref()).copied())
        .expect("graph components are all in the model")
}

pub fn structural_reliability(graph: &SystemGraph, model: &QRModel, config: &Configuration) -> f64 {
    eval_reliability(&reliability_expr(graph), model, config)
}

pub fn emit_system_qrspec(graph: &SystemGraph, model: &QRModel) -> SystemQRSpec {
    let abstracted = abstract_failure_model(model);
    let expr = reliability_expr(graph);
    let mut modes: Vec<SystemMode> = abstracted
        .states()
        .iter()
        .map(|s| SystemMode {
            tuple: mode_tuple(&abstracted, &s.config),
            reliability: eval_reliability(&expr, &abstracted, &s.config),
            quality: s.quality.clone(),
        })
        .collect();
    modes.sort_by(|a, b| a.tuple.cmp(&b.tuple));
    SystemQRSpec {
        components: abstracted.component_names(),
        modes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Mismatch {
    pub mode: String,
    pub field: String,
    pub expected: String,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConformanceReport {
    pub pass: bool,
    /// Set when the two specs do not even range over the same components.
    pub structural: Option<String>,
    pub matched: Vec<String>,
    /// Modes present in the expected spec that the system cannot reach.
    pub missing: Vec<String>,
    /// Modes the system has that the expected spec does not list.
    pub unexpected: Vec<String>,
    pub mismatches: Vec<Mismatch>,
    pub total_expected: usize,
}

impl ConformanceReport {
    pub fn summary(&self) -> String {
        if let Some(s) = &self.structural {
            return format!("FAIL, {s}");
        }
        format!(
            "{}, {}/{} modes matched",
            if self.pass { "PASS" } else { "FAIL" },
            self.matched.len(),
            self.total_expected
        )
    }
}

fn maps_close(a: &QualityMap, b: &QualityMap, tolerance: f64) -> bool {
    a.pairs().len() == b.pairs().len()
        && a.pairs()
            .iter()
            .zip(b.pairs())
            .all(|(x, y)| (x.0 - y.0).abs() <= tolerance && (x.1 - y.1).abs() <= tolerance)
}

/// Mode-by-mode comparison of a derived spec against an expected one.
/// Component order may differ; tuples are matched by component name.
pub fn check_conformance(derived: &SystemQRSpec, given: &SystemQRSpec, tolerance: f64) -> ConformanceReport {
    let mut report = ConformanceReport {
        pass: false,
        structural: None,
        matched: Vec::new(),
        missing: Vec::new(),
        unexpected: Vec::new(),
        mismatches: Vec::new(),
        total_expected: given.modes.len(),
    };
    let set_d: BTreeSet<&String> = derived.components.iter().collect();
    let set_g: BTreeSet<&String> = given.components.iter().collect();
    if set_d != set_g || set_d.len() != derived.components.len() || set_g.len() != given.components.len() {
        report.structural = Some(format!(
            "component sets differ: derived [{}] vs expected [{}]",
            derived.components.join(", "),
            given.components.join(", ")
        ));
        return report;
    }
    // position in `given` of each derived component
    let perm: Vec<usize> = derived
        .components
        .iter()
        .map(|c| given.components.iter().position(|g| g == c).unwrap())
        .collect();
    let to_derived_order = |t: &[usize]| -> Vec<usize> { perm.iter().map(|&i| t[i]).collect() };

    let expected: BTreeMap<Vec<usize>, &SystemMode> = given
        .modes
        .iter()
        .map(|m| (to_derived_order(&m.tuple), m))
        .collect();
    let actual: BTreeMap<Vec<usize>, &SystemMode> =
        derived.modes.iter().map(|m| (m.tuple.clone(), m)).collect();
    let label = |t: &[usize]| render_mode_tuple(&derived.components, t);

    for (tuple, exp) in &expected {
        let Some(act) = actual.get(tuple) else {
            report.missing.push(label(tuple));
            continue;
        };
        let mut ok = true;
        if (exp.reliability - act.reliability).abs() > tolerance {
            ok = false;
            report.mismatches.push(Mismatch {
                mode: label(tuple),
                field: "reliability".into(),
                expected: format!("{:.6}", exp.reliability),
                actual: format!("{:.6}", act.reliability),
            });
        }
        if !maps_close(&exp.quality, &act.quality, tolerance) {
            ok = false;
            report.mismatches.push(Mismatch {
                mode: label(tuple),
                field: "quality".into(),
                expected: exp.quality.to_string(),
                actual: act.quality.to_string(),
            });
        }
        if ok {
            report.matched.push(label(tuple));
        }
    }
    for tuple in actual.keys() {
        if !expected.contains_key(tuple) {
            report.unexpected.push(label(tuple));
        }
    }
    report.pass = report.mismatches.is_empty() && report.missing.is_empty() && report.unexpected.is_empty();
    report
}
