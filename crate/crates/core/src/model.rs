//! Domain types shared by every stage of the pipeline: quality maps,
//! component specifications, system graphs, mode statuses and configurations.
//!
//! Everything in here is immutable once validated.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// Validation failures for domain values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("quality level {level} must be positive")]
    NonPositiveLevel { level: f64 },
    #[error("quality output {value} must be non-negative")]
    NegativeOutput { value: f64 },
    #[error("output {value} exceeds its input level {level}")]
    OutputExceedsLevel { level: f64, value: f64 },
    #[error("input level {level} is listed twice with different outputs")]
    ConflictingLevel { level: f64 },
    #[error("output quality must not increase when the input level drops (level {level})")]
    NonMonotoneOutput { level: f64 },
    #[error("input levels of mode {mode} of `{component}` are not strictly decreasing")]
    NonMonotoneLevels { component: String, mode: usize },
    #[error("component `{component}` must declare at least one operating mode")]
    NoModes { component: String },
    #[error("mode {mode} of `{component}` has reliability {value}; expected a value in (0, 1]")]
    BadReliability {
        component: String,
        mode: usize,
        value: f64,
    },
    #[error("mode {mode} of `{component}`: {source}")]
    BadQualityMap {
        component: String,
        mode: usize,
        #[source]
        source: Box<ModelError>,
    },
    #[error("vertex `{0}` is declared more than once")]
    DuplicateVertex(String),
    #[error("edge references undeclared node `{0}`")]
    UnknownNode(String),
    #[error("vertex `{vertex}` is labeled with unknown component `{component}`")]
    UnknownComponent { vertex: String, component: String },
    #[error("the graph contains a cycle through `{0}`")]
    Cycle(String),
    #[error("vertex `{0}` does not lie on any input-to-output path")]
    Dangling(String),
    #[error("the input node must not have incoming edges")]
    EdgeIntoInput,
    #[error("the output node must not have outgoing edges")]
    EdgeFromOutput,
    #[error("edge from the input directly to the output bypasses every component")]
    DirectBypass,
    #[error("the system has no input-to-output path")]
    NoPath,
    #[error("input and output node must be distinct")]
    SameEndpoints,
    #[error("path ordering must be a permutation of 1..={0}")]
    BadPathOrdering(usize),
}

/// Input-level to output-value quality map in canonical form.
///
/// Levels are strictly decreasing, outputs strictly decreasing and positive,
/// and every output is paired with the smallest level that achieves it.
/// The empty map is the all-zero map of a dead or suspended subsystem.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct QualityMap {
    pairs: Vec<(f64, f64)>,
}

impl QualityMap {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds the canonical map from arbitrary `(level, output)` pairs.
    pub fn canonicalize<I>(pairs: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (f64, f64)>,
    {
        let mut raw: Vec<(f64, f64)> = Vec::new();
        for (level, value) in pairs {
            if !(level > 0.0) || !level.is_finite() {
                return Err(ModelError::NonPositiveLevel { level });
            }
            if !(value >= 0.0) || !value.is_finite() {
                return Err(ModelError::NegativeOutput { value });
            }
            if value > level {
                return Err(ModelError::OutputExceedsLevel { level, value });
            }
            raw.push((level, value));
        }
        raw.sort_by(|a, b| b.0.total_cmp(&a.0));
        raw.dedup_by(|next, prev| next.0 == prev.0 && next.1 == prev.1);
        for w in raw.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ModelError::ConflictingLevel { level: w[0].0 });
            }
            if w[1].1 > w[0].1 {
                return Err(ModelError::NonMonotoneOutput { level: w[1].0 });
            }
        }
        Ok(Self::from_sorted_monotone(raw))
    }

    /// Canonical form of pairs already sorted by strictly decreasing level with
    /// non-increasing outputs.
    pub(crate) fn from_sorted_monotone(sorted: Vec<(f64, f64)>) -> Self {
        let mut pairs: Vec<(f64, f64)> = Vec::with_capacity(sorted.len());
        for (level, value) in sorted {
            if value <= 0.0 {
                continue;
            }
            match pairs.last_mut() {
                // same output at a lower level: keep the lower level
                Some(last) if last.1 == value => last.0 = level,
                _ => pairs.push((level, value)),
            }
        }
        Self { pairs }
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }

    pub fn levels(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn outputs(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.1).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Output guaranteed for input quality `q`: the output paired with the
    /// largest level not above `q`, or zero below the lowest level.
    pub fn lookup(&self, q: f64) -> f64 {
        self.pairs
            .iter()
            .find(|(level, _)| *level <= q)
            .map_or(0.0, |p| p.1)
    }

    /// Drops the levels below `min_level` (display helper for query results).
    pub fn clipped(&self, min_level: f64) -> QualityMap {
        QualityMap {
            pairs: self
                .pairs
                .iter()
                .copied()
                .filter(|(l, _)| *l >= min_level)
                .collect(),
        }
    }
}

impl fmt::Display for QualityMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}->{}",
            format_levels(&self.levels()),
            format_levels(&self.outputs())
        )
    }
}

/// Renders a list of quality values as `<50,40,30>`; an empty list is `<0>`.
pub fn format_levels(values: &[f64]) -> String {
    if values.is_empty() {
        return "<0>".to_string();
    }
    let inner: Vec<String> = values.iter().map(|v| format_number(*v)).collect();
    format!("<{}>", inner.join(","))
}

/// Shortest decimal rendering of a quality value.
pub fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// Unvalidated component definition as read from a spec file.
#[derive(Debug, Clone, PartialEq)]
pub struct RawComponentSpec {
    pub name: String,
    /// `(reliability, [(level, output)])` per operating mode, in mode order.
    pub modes: Vec<(f64, Vec<(f64, f64)>)>,
}

/// Validated component specification: `d` operating modes with their
/// reliabilities and quality maps. The failure mode is implicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSpec {
    name: String,
    mode_reliabilities: Vec<f64>,
    mode_quality: Vec<QualityMap>,
}

impl ComponentSpec {
    pub fn new(
        name: impl Into<String>,
        modes: Vec<(f64, Vec<(f64, f64)>)>,
    ) -> Result<Self, ModelError> {
        validate_component_spec(RawComponentSpec {
            name: name.into(),
            modes,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mode_count(&self) -> usize {
        self.mode_reliabilities.len()
    }

    /// Reliability of operating mode `k` (1-based); mode 0 is the failure mode.
    pub fn reliability(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.mode_reliabilities[k - 1]
        }
    }

    pub fn reliabilities(&self) -> &[f64] {
        &self.mode_reliabilities
    }

    /// Quality map of operating mode `k` (1-based); mode 0 maps to the empty map.
    pub fn quality(&self, k: usize) -> QualityMap {
        if k == 0 {
            QualityMap::empty()
        } else {
            self.mode_quality[k - 1].clone()
        }
    }
}

pub fn validate_component_spec(raw: RawComponentSpec) -> Result<ComponentSpec, ModelError> {
    if raw.modes.is_empty() {
        return Err(ModelError::NoModes {
            component: raw.name,
        });
    }
    let mut mode_reliabilities = Vec::with_capacity(raw.modes.len());
    let mut mode_quality = Vec::with_capacity(raw.modes.len());
    for (i, (z, pairs)) in raw.modes.into_iter().enumerate() {
        let mode = i + 1;
        if !(z > 0.0 && z <= 1.0) {
            return Err(ModelError::BadReliability {
                component: raw.name,
                mode,
                value: z,
            });
        }
        if pairs.windows(2).any(|w| !(w[0].0 > w[1].0)) {
            return Err(ModelError::NonMonotoneLevels {
                component: raw.name,
                mode,
            });
        }
        let map = QualityMap::canonicalize(pairs).map_err(|e| ModelError::BadQualityMap {
            component: raw.name.clone(),
            mode,
            source: Box::new(e),
        })?;
        mode_reliabilities.push(z);
        mode_quality.push(map);
    }
    Ok(ComponentSpec {
        name: raw.name,
        mode_reliabilities,
        mode_quality,
    })
}

/// Named set of validated component specifications in declaration order.
#[derive(Debug, Clone, Default)]
pub struct ComponentLibrary {
    specs: Vec<Arc<ComponentSpec>>,
    index: HashMap<String, usize>,
}

impl ComponentLibrary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a spec; returns `false` (and keeps the old one) on a duplicate name.
    pub fn insert(&mut self, spec: ComponentSpec) -> bool {
        if self.index.contains_key(spec.name()) {
            return false;
        }
        self.index.insert(spec.name().to_string(), self.specs.len());
        self.specs.push(Arc::new(spec));
        true
    }

    pub fn get(&self, name: &str) -> Option<&Arc<ComponentSpec>> {
        self.index.get(name).map(|&i| &self.specs[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<ComponentSpec>> {
        self.specs.iter()
    }

    pub fn len(&self) -> usize {
        self.specs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.specs.is_empty()
    }
}

impl FromIterator<ComponentSpec> for ComponentLibrary {
    fn from_iter<T: IntoIterator<Item = ComponentSpec>>(iter: T) -> Self {
        let mut lib = ComponentLibrary::new();
        for spec in iter {
            lib.insert(spec);
        }
        lib
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParallelPolicy {
    /// Best output over all live branches.
    #[default]
    Max,
    /// First live branch in precedence order.
    Ordered,
}

impl std::str::FromStr for ParallelPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(ParallelPolicy::Max),
            "ordered" => Ok(ParallelPolicy::Ordered),
            other => Err(format!("unknown parallel policy `{other}` (expected max|ordered)")),
        }
    }
}

/// Unvalidated system structure.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawSystemGraph {
    pub input: String,
    pub output: String,
    /// `(vertex, component)` in declaration order.
    pub vertices: Vec<(String, String)>,
    pub edges: Vec<(String, String)>,
    pub policy: ParallelPolicy,
    /// 1-based path indices, highest precedence first.
    pub ordering: Option<Vec<usize>>,
}

/// Labeled DAG of component instances between one input and one output node.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemGraph {
    input: String,
    output: String,
    vertices: Vec<String>,
    labels: HashMap<String, String>,
    edges: Vec<(String, String)>,
    policy: ParallelPolicy,
    ordering: Option<Vec<usize>>,
    paths: Vec<Vec<String>>,
}

impl SystemGraph {
    pub fn input(&self) -> &str {
        &self.input
    }

    pub fn output(&self) -> &str {
        &self.output
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(String, String)] {
        &self.edges
    }

    pub fn label(&self, vertex: &str) -> Option<&str> {
        self.labels.get(vertex).map(String::as_str)
    }

    pub fn policy(&self) -> ParallelPolicy {
        self.policy
    }

    pub fn with_policy(mut self, policy: ParallelPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn ordering(&self) -> Option<&[usize]> {
        self.ordering.as_deref()
    }

    /// All input-to-output paths as vertex lists, depth-first in edge
    /// declaration order.
    pub fn paths(&self) -> &[Vec<String>] {
        &self.paths
    }

    /// Paths as component-name lists, in precedence order (the declared
    /// ordering if any, else enumeration order).
    pub fn component_paths(&self) -> Vec<Vec<String>> {
        let as_components = |p: &Vec<String>| -> Vec<String> {
            p.iter().map(|v| self.labels[v].clone()).collect()
        };
        match &self.ordering {
            Some(order) => order
                .iter()
                .map(|&i| as_components(&self.paths[i - 1]))
                .collect(),
            None => self.paths.iter().map(as_components).collect(),
        }
    }

    /// Distinct components in order of first appearance among the vertex
    /// declarations.
    pub fn component_order(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.vertices
            .iter()
            .map(|v| &self.labels[v])
            .filter(|c| seen.insert(c.as_str()))
            .cloned()
            .collect()
    }
}

pub fn validate_system_graph(
    raw: RawSystemGraph,
    library: &ComponentLibrary,
) -> Result<SystemGraph, ModelError> {
    if raw.input == raw.output {
        return Err(ModelError::SameEndpoints);
    }
    let mut labels = HashMap::new();
    let mut vertices = Vec::new();
    for (v, c) in &raw.vertices {
        if v == &raw.input || v == &raw.output || labels.contains_key(v) {
            return Err(ModelError::DuplicateVertex(v.clone()));
        }
        if library.get(c).is_none() {
            return Err(ModelError::UnknownComponent {
                vertex: v.clone(),
                component: c.clone(),
            });
        }
        labels.insert(v.clone(), c.clone());
        vertices.push(v.clone());
    }
    let known = |n: &str| n == raw.input || n == raw.output || labels.contains_key(n);
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut pred: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (a, b) in &raw.edges {
        for n in [a, b] {
            if !known(n) {
                return Err(ModelError::UnknownNode(n.clone()));
            }
        }
        if b == &raw.input {
            return Err(ModelError::EdgeIntoInput);
        }
        if a == &raw.output {
            return Err(ModelError::EdgeFromOutput);
        }
        if a == &raw.input && b == &raw.output {
            return Err(ModelError::DirectBypass);
        }
        succ.entry(a).or_default().push(b);
        pred.entry(b).or_default().push(a);
    }

    // cycle check via iterative DFS colouring
    let mut colour: HashMap<&str, u8> = HashMap::new();
    let nodes: Vec<&str> = std::iter::once(raw.input.as_str())
        .chain(vertices.iter().map(String::as_str))
        .chain(std::iter::once(raw.output.as_str()))
        .collect();
    for &start in &nodes {
        if colour.get(start).copied().unwrap_or(0) != 0 {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(start, 0)];
        colour.insert(start, 1);
        while let Some((node, next)) = stack.pop() {
            let out = succ.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if next < out.len() {
                stack.push((node, next + 1));
                let child = out[next];
                match colour.get(child).copied().unwrap_or(0) {
                    0 => {
                        colour.insert(child, 1);
                        stack.push((child, 0));
                    }
                    1 => return Err(ModelError::Cycle(child.to_string())),
                    _ => {}
                }
            } else {
                colour.insert(node, 2);
            }
        }
    }

    let reach = |from: &str, adj: &BTreeMap<&str, Vec<&str>>| -> HashSet<String> {
        let mut seen: HashSet<String> = HashSet::new();
        let mut todo = vec![from.to_string()];
        while let Some(n) = todo.pop() {
            if !seen.insert(n.clone()) {
                continue;
            }
            if let Some(next) = adj.get(n.as_str()) {
                todo.extend(next.iter().map(|s| s.to_string()));
            }
        }
        seen
    };
    let forward = reach(&raw.input, &succ);
    let backward = reach(&raw.output, &pred);
    for v in &vertices {
        if !forward.contains(v) || !backward.contains(v) {
            return Err(ModelError::Dangling(v.clone()));
        }
    }

    let mut paths = Vec::new();
    let mut current = Vec::new();
    enumerate_paths(&raw.input, &raw.output, &succ, &mut current, &mut paths);
    if paths.is_empty() {
        return Err(ModelError::NoPath);
    }
    if let Some(order) = &raw.ordering {
        let mut sorted = order.clone();
        sorted.sort_unstable();
        if sorted != (1..=paths.len()).collect::<Vec<_>>() {
            return Err(ModelError::BadPathOrdering(paths.len()));
        }
    }

    Ok(SystemGraph {
        input: raw.input,
        output: raw.output,
        vertices,
        labels,
        edges: raw.edges,
        policy: raw.policy,
        ordering: raw.ordering,
        paths,
    })
}

fn enumerate_paths(
    node: &str,
    target: &str,
    succ: &BTreeMap<&str, Vec<&str>>,
    current: &mut Vec<String>,
    out: &mut Vec<Vec<String>>,
) {
    if node == target {
        out.push(current.clone());
        return;
    }
    for &next in succ.get(node).map(Vec::as_slice).unwrap_or(&[]) {
        let is_vertex = next != target;
        if is_vertex {
            current.push(next.to_string());
        }
        enumerate_paths(next, target, succ, current, out);
        if is_vertex {
            current.pop();
        }
    }
}

/// Status of one operating-mode slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ModeStatus {
    /// `1`
    Operating,
    /// `0`
    Failed,
    /// `X`
    NotAvailed,
    /// `Y`
    Suspended,
}

impl ModeStatus {
    pub fn symbol(self) -> char {
        match self {
            ModeStatus::Operating => '1',
            ModeStatus::Failed => '0',
            ModeStatus::NotAvailed => 'X',
            ModeStatus::Suspended => 'Y',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '1' => Some(ModeStatus::Operating),
            '0' => Some(ModeStatus::Failed),
            'X' => Some(ModeStatus::NotAvailed),
            'Y' => Some(ModeStatus::Suspended),
            _ => None,
        }
    }

    /// Two-letter legend used in result tables.
    pub fn legend(self) -> &'static str {
        match self {
            ModeStatus::Operating => "OP",
            ModeStatus::Failed => "FL",
            ModeStatus::NotAvailed => "NA",
            ModeStatus::Suspended => "SU",
        }
    }

    // sort rank: puts the all-operating configuration first
    fn rank(self) -> u8 {
        match self {
            ModeStatus::Operating => 0,
            ModeStatus::Failed => 1,
            ModeStatus::Suspended => 2,
            ModeStatus::NotAvailed => 3,
        }
    }
}

impl PartialOrd for ModeStatus {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ModeStatus {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.rank().cmp(&other.rank())
    }
}

/// What a single component segment says about its component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SegmentState {
    /// Operating in mode `k` (1-based).
    Live(usize),
    /// No operating slot: every mode failed or suspended.
    Dead,
}

/// Classifies a segment, or `None` if it violates the slot pattern
/// `(0|Y)* 1 X* | (0|Y)+`.
pub fn segment_state(slots: &[ModeStatus]) -> Option<SegmentState> {
    if slots.is_empty() {
        return None;
    }
    let mut i = 0;
    while i < slots.len() && matches!(slots[i], ModeStatus::Failed | ModeStatus::Suspended) {
        i += 1;
    }
    if i == slots.len() {
        return Some(SegmentState::Dead);
    }
    if slots[i] != ModeStatus::Operating {
        return None;
    }
    if slots[i + 1..].iter().all(|s| *s == ModeStatus::NotAvailed) {
        Some(SegmentState::Live(i + 1))
    } else {
        None
    }
}

/// Slot vector of a state, one segment per component.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    slots: Vec<ModeStatus>,
}

impl Configuration {
    pub fn new(slots: Vec<ModeStatus>) -> Self {
        Self { slots }
    }

    pub fn slots(&self) -> &[ModeStatus] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Checks the per-segment slot pattern for the given segment lengths.
    pub fn is_valid(&self, segment_lengths: &[usize]) -> bool {
        if segment_lengths.iter().sum::<usize>() != self.slots.len() {
            return false;
        }
        let mut start = 0;
        segment_lengths.iter().all(|&d| {
            let ok = segment_state(&self.slots[start..start + d]).is_some();
            start += d;
            ok
        })
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.slots {
            write!(f, "{}", s.symbol())?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Configuration {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| ModeStatus::from_symbol(c).ok_or_else(|| format!("bad slot symbol `{c}`")))
            .collect::<Result<Vec<_>, _>>()
            .map(Configuration::new)
    }
}

/// One mode of a system-level specification: a mode index per component
/// (0 = failed) with its reliability and quality map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemMode {
    pub tuple: Vec<usize>,
    pub reliability: f64,
    pub quality: QualityMap,
}

/// System-level quality/reliability specification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemQRSpec {
    pub components: Vec<String>,
    pub modes: Vec<SystemMode>,
}

impl SystemQRSpec {
    /// Union of all input levels over the modes, decreasing.
    pub fn input_levels(&self) -> Vec<f64> {
        let mut levels: Vec<f64> = self
            .modes
            .iter()
            .flat_map(|m| m.quality.levels())
            .collect();
        levels.sort_by(|a, b| b.total_cmp(a));
        levels.dedup();
        levels
    }

    /// Checks the mode-tuple invariants: right arity, distinct, reliabilities
    /// in `[0, 1]`.
    pub fn validate(&self) -> Result<(), String> {
        let mut seen = BTreeSet::new();
        for m in &self.modes {
            if m.tuple.len() != self.components.len() {
                return Err(format!(
                    "mode tuple {:?} has {} entries for {} components",
                    m.tuple,
                    m.tuple.len(),
                    self.components.len()
                ));
            }
            if !seen.insert(m.tuple.clone()) {
                return Err(format!("mode tuple {:?} listed twice", m.tuple));
            }
            if !(0.0..=1.0).contains(&m.reliability) {
                return Err(format!(
                    "mode {:?} has reliability {} outside [0, 1]",
                    m.tuple, m.reliability
                ));
            }
        }
        Ok(())
    }

    /// Renders a mode tuple as `(m_3^1, m_2^0)`.
    pub fn tuple_label(&self, tuple: &[usize]) -> String {
        render_mode_tuple(&self.components, tuple)
    }
}

pub fn render_mode_tuple(components: &[String], tuple: &[usize]) -> String {
    let parts: Vec<String> = components
        .iter()
        .zip(tuple)
        .map(|(c, k)| format!("m_{}^{}", short_name(c), k))
        .collect();
    format!("({})", parts.join(", "))
}

/// `C12` -> `12`; other names are used verbatim.
pub fn short_name(component: &str) -> &str {
    match component.strip_prefix('C') {
        Some(rest) if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) => rest,
        _ => component,
    }
}
