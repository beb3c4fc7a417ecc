//! Series and parallel composition of models, and whole-system assembly
//! from the input-to-output paths of a graph.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use thiserror::Error;

use crate::characterize::build_component_model_arc;
use crate::model::{ComponentLibrary, Configuration, ModeStatus, ParallelPolicy, QualityMap, SystemGraph};
use crate::par::Exec;
use crate::qrmodel::{EdgeKind, ModelState, QRModel};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ComposeError {
    #[error("the system has no input-to-output path")]
    NoPath,
    #[error("component `{0}` has no specification")]
    MissingSpec(String),
    #[error("component `{0}` is specified differently in the two operands")]
    ConflictingSpec(String),
}

/// Output chain `right(left(q))` at each of `left`'s levels.
pub fn series_quality(left: &QualityMap, right: &QualityMap) -> QualityMap {
    QualityMap::from_sorted_monotone(
        left.pairs()
            .iter()
            .map(|&(level, out)| (level, right.lookup(out)))
            .collect(),
    )
}

pub fn merge_parallel_maps(a: &QualityMap, b: &QualityMap, policy: ParallelPolicy) -> QualityMap {
    match policy {
        ParallelPolicy::Max => {
            let mut levels: Vec<f64> = a.levels().into_iter().chain(b.levels()).collect();
            levels.sort_by(|x, y| y.total_cmp(x));
            levels.dedup();
            QualityMap::from_sorted_monotone(
                levels
                    .into_iter()
                    .map(|l| (l, a.lookup(l).max(b.lookup(l))))
                    .collect(),
            )
        }
        // the preferred branch serves whenever it delivers anything at all
        ParallelPolicy::Ordered => {
            if a.is_empty() {
                b.clone()
            } else {
                a.clone()
            }
        }
    }
}

pub fn compose_series(left: &QRModel, right: &QRModel) -> Result<QRModel, ComposeError> {
    compose_with(left, right, Exec::default(), series_quality)
}

pub fn compose_parallel(
    left: &QRModel,
    right: &QRModel,
    policy: ParallelPolicy,
) -> Result<QRModel, ComposeError> {
    compose_parallel_with(left, right, policy, Exec::default())
}

pub fn compose_series_with(left: &QRModel, right: &QRModel, exec: Exec) -> Result<QRModel, ComposeError> {
    compose_with(left, right, exec, series_quality)
}

pub fn compose_parallel_with(
    left: &QRModel,
    right: &QRModel,
    policy: ParallelPolicy,
    exec: Exec,
) -> Result<QRModel, ComposeError> {
    compose_with(left, right, exec, move |a, b| merge_parallel_maps(a, b, policy))
}

/// How a right-hand component relates to the left operand.
#[derive(Clone, Copy)]
enum RightSlot {
    Shared(usize),
    New,
}

fn compose_with<F>(left: &QRModel, right: &QRModel, exec: Exec, quality: F) -> Result<QRModel, ComposeError>
where
    F: Fn(&QualityMap, &QualityMap) -> QualityMap + Sync + Send,
{
    let mut components: Vec<Arc<_>> = left.components().to_vec();
    let mut roles = Vec::with_capacity(right.components().len());
    for c in right.components() {
        match left.component_index(c.name()) {
            Some(li) => {
                if left.components()[li].as_ref() != c.as_ref() {
                    return Err(ComposeError::ConflictingSpec(c.name().to_string()));
                }
                roles.push(RightSlot::Shared(li));
            }
            None => {
                roles.push(RightSlot::New);
                components.push(c.clone());
            }
        }
    }
    let shared: Vec<(usize, usize)> = roles
        .iter()
        .enumerate()
        .filter_map(|(ri, r)| match r {
            RightSlot::Shared(li) => Some((*li, ri)),
            RightSlot::New => None,
        })
        .collect();

    let left_key = |a: usize| -> Vec<ModeStatus> {
        let cfg = &left.state(a).config;
        shared
            .iter()
            .flat_map(|&(li, _)| left.segment(cfg, li).iter().copied())
            .collect()
    };
    let right_key = |b: usize| -> Vec<ModeStatus> {
        let cfg = &right.state(b).config;
        shared
            .iter()
            .flat_map(|&(_, ri)| right.segment(cfg, ri).iter().copied())
            .collect()
    };
    let mut by_key: HashMap<Vec<ModeStatus>, Vec<usize>> = HashMap::new();
    for b in 0..right.len() {
        by_key.entry(right_key(b)).or_default().push(b);
    }

    // consistent pairs, in left-major order
    let per_left: Vec<Vec<(usize, usize)>> = exec.map_range(left.len(), |a| {
        by_key
            .get(&left_key(a))
            .map(|bs| bs.iter().map(|&b| (a, b)).collect())
            .unwrap_or_default()
    });
    let pairs: Vec<(usize, usize)> = per_left.into_iter().flatten().collect();
    let pair_index: HashMap<(usize, usize), usize> =
        pairs.iter().enumerate().map(|(i, p)| (*p, i)).collect();

    let new_components: Vec<usize> = roles
        .iter()
        .enumerate()
        .filter_map(|(ri, r)| matches!(r, RightSlot::New).then_some(ri))
        .collect();
    let states: Vec<ModelState> = exec.map(&pairs, |&(a, b)| {
        let sa = left.state(a);
        let sb = right.state(b);
        let mut slots = sa.config.slots().to_vec();
        for &ri in &new_components {
            slots.extend_from_slice(right.segment(&sb.config, ri));
        }
        ModelState {
            config: Configuration::new(slots),
            quality: quality(&sa.quality, &sb.quality),
            expr: sa.expr.mul(&sb.expr),
        }
    });

    // which component an edge moves: the one whose segment changed
    let mover = |m: &QRModel, from: usize, to: usize| -> usize {
        let (x, y) = (&m.state(from).config, &m.state(to).config);
        (0..m.components().len())
            .find(|&ci| m.segment(x, ci) != m.segment(y, ci))
            .expect("edge changes some segment")
    };
    let mut right_edges: HashMap<(EdgeKind, usize, usize), usize> = HashMap::new();
    for kind in [EdgeKind::Failure, EdgeKind::Suspend] {
        for &(b, b2) in right.edges(kind) {
            right_edges.insert((kind, b, mover(right, b, b2)), b2);
        }
    }
    let mut left_partners: Vec<Vec<usize>> = vec![Vec::new(); right.len()];
    for &(a, b) in &pairs {
        left_partners[b].push(a);
    }
    let shared_right_of: HashMap<usize, usize> = shared.iter().copied().collect();

    let mut failure = Vec::new();
    let mut suspend = Vec::new();
    for kind in [EdgeKind::Failure, EdgeKind::Suspend] {
        let out = match kind {
            EdgeKind::Failure => &mut failure,
            EdgeKind::Suspend => &mut suspend,
        };
        for &(a, a2) in left.edges(kind) {
            let li = mover(left, a, a2);
            let synced = shared_right_of.get(&li).copied();
            for &b in by_key.get(&left_key(a)).into_iter().flatten() {
                let b2 = match synced {
                    // the same component moves on both sides at once
                    Some(ri) => match right_edges.get(&(kind, b, ri)) {
                        Some(&b2) => b2,
                        None => continue,
                    },
                    None => b,
                };
                if let (Some(&from), Some(&to)) = (pair_index.get(&(a, b)), pair_index.get(&(a2, b2))) {
                    out.push((from, to));
                }
            }
        }
        for &(b, b2) in right.edges(kind) {
            let ri = mover(right, b, b2);
            if matches!(roles[ri], RightSlot::Shared(_)) {
                continue;
            }
            for &a in &left_partners[b] {
                if let (Some(&from), Some(&to)) = (pair_index.get(&(a, b)), pair_index.get(&(a, b2))) {
                    out.push((from, to));
                }
            }
        }
    }

    Ok(QRModel::new(components, states, failure, suspend))
}

/// Path models folded in parallel, each path a series fold of its
/// components; segments end up in first-appearance order of the graph.
pub fn build_system_model(graph: &SystemGraph, library: &ComponentLibrary) -> Result<QRModel, ComposeError> {
    build_system_model_with(graph, library, graph.policy(), Exec::default())
}

pub fn build_system_model_with(
    graph: &SystemGraph,
    library: &ComponentLibrary,
    policy: ParallelPolicy,
    exec: Exec,
) -> Result<QRModel, ComposeError> {
    let mut cache: HashMap<String, QRModel> = HashMap::new();
    let mut component_model = |name: &str| -> Result<QRModel, ComposeError> {
        if let Some(m) = cache.get(name) {
            return Ok(m.clone());
        }
        let spec = library
            .get(name)
            .ok_or_else(|| ComposeError::MissingSpec(name.to_string()))?;
        let m = build_component_model_arc(spec.clone());
        cache.insert(name.to_string(), m.clone());
        Ok(m)
    };

    let mut system: Option<QRModel> = None;
    for path in graph.component_paths() {
        let mut path_model: Option<QRModel> = None;
        for name in &path {
            let m = component_model(name)?;
            path_model = Some(match path_model {
                None => m,
                Some(acc) => compose_series_with(&acc, &m, exec)?,
            });
        }
        let path_model = path_model.ok_or(ComposeError::NoPath)?;
        system = Some(match system {
            None => path_model,
            Some(acc) => compose_parallel_with(&acc, &path_model, policy, exec)?,
        });
    }
    let system = system.ok_or(ComposeError::NoPath)?;
    Ok(system
        .reorder_components(&graph.component_order())
        .expect("every graph component appears in the folded model"))
}

/// Structural equality up to the order of component segments.
pub fn models_equivalent(a: &QRModel, b: &QRModel) -> bool {
    let names_a = a.component_names();
    let set_a: HashSet<&String> = names_a.iter().collect();
    let names_b = b.component_names();
    let set_b: HashSet<&String> = names_b.iter().collect();
    if set_a != set_b || a.len() != b.len() {
        return false;
    }
    for name in &names_a {
        let (ia, ib) = (a.component_index(name).unwrap(), b.component_index(name).unwrap());
        if a.components()[ia] != b.components()[ib] {
            return false;
        }
    }
    let b = match b.reorder_components(&names_a) {
        Some(m) => m,
        None => return false,
    };
    a.initial() == b.initial()
        && a.states() == b.states()
        && a.failure_edges() == b.failure_edges()
        && a.suspend_edges() == b.suspend_edges()
}
