//! The state-transition model shared by component and system levels.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::model::{segment_state, ComponentSpec, Configuration, ModeStatus, QualityMap, SegmentState};
use crate::rel_algebra::{RelExpr, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeKind {
    /// `F`: uncontrolled failure of the operating mode.
    Failure,
    /// `C`: designer-controlled suspension of the operating mode.
    Suspend,
}

impl EdgeKind {
    pub fn symbol(self) -> char {
        match self {
            EdgeKind::Failure => 'F',
            EdgeKind::Suspend => 'C',
        }
    }

    /// Status written into the slot that stops operating.
    pub fn status(self) -> ModeStatus {
        match self {
            EdgeKind::Failure => ModeStatus::Failed,
            EdgeKind::Suspend => ModeStatus::Suspended,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    pub config: Configuration,
    pub quality: QualityMap,
    pub expr: RelExpr,
}

/// States are kept sorted by configuration; edges are index pairs into
/// that order.
#[derive(Debug, Clone)]
pub struct QRModel {
    components: Vec<Arc<ComponentSpec>>,
    offsets: Vec<usize>,
    states: Vec<ModelState>,
    index: HashMap<Configuration, usize>,
    initial: usize,
    failure_edges: BTreeSet<(usize, usize)>,
    suspend_edges: BTreeSet<(usize, usize)>,
}

/// Successor of a single segment under `kind`, or `None` for a dead one.
pub fn segment_successor(slots: &[ModeStatus], kind: EdgeKind) -> Option<Vec<ModeStatus>> {
    let k = slots.iter().position(|s| *s == ModeStatus::Operating)?;
    let mut next = slots.to_vec();
    next[k] = kind.status();
    if k + 1 < next.len() {
        next[k + 1] = ModeStatus::Operating;
    }
    Some(next)
}

/// Operating-probability expression of a configuration: `r` for an
/// operating slot, `1 - r` for a failed one, `1` otherwise. `vars` is
/// aligned with the slots.
pub fn state_expr(config: &Configuration, vars: &[VarId]) -> RelExpr {
    config
        .slots()
        .iter()
        .zip(vars)
        .fold(RelExpr::one(), |acc, (s, v)| match s {
            ModeStatus::Operating => acc.mul(&RelExpr::var(v.clone())),
            ModeStatus::Failed => acc.mul(&RelExpr::complement(v.clone())),
            ModeStatus::NotAvailed | ModeStatus::Suspended => acc,
        })
}

impl QRModel {
    /// Assembles a model from states in any order plus edges indexing into
    /// that order. States are re-sorted by configuration.
    ///
    /// Panics if the configurations are not unique or the all-first-mode
    /// initial configuration is missing; both are construction bugs.
    pub fn new(
        components: Vec<Arc<ComponentSpec>>,
        states: Vec<ModelState>,
        failure_edges: impl IntoIterator<Item = (usize, usize)>,
        suspend_edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut offsets = Vec::with_capacity(components.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for c in &components {
            acc += c.mode_count();
            offsets.push(acc);
        }

        let mut order: Vec<usize> = (0..states.len()).collect();
        order.sort_by(|&a, &b| states[a].config.cmp(&states[b].config));
        let mut remap = vec![0usize; states.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut slots: Vec<Option<ModelState>> = states.into_iter().map(Some).collect();
        let states: Vec<ModelState> = order.iter().map(|&i| slots[i].take().unwrap()).collect();

        let index: HashMap<Configuration, usize> = states
            .iter()
            .enumerate()
            .map(|(i, s)| (s.config.clone(), i))
            .collect();
        assert_eq!(index.len(), states.len(), "duplicate configuration in model");

        let initial_config = initial_configuration(&components);
        let initial = *index
            .get(&initial_config)
            .expect("model lacks the initial configuration");

        let remap_edges = |edges: BTreeSet<(usize, usize)>| -> BTreeSet<(usize, usize)> {
            edges.into_iter().map(|(a, b)| (remap[a], remap[b])).collect()
        };
        Self {
            components,
            offsets,
            states,
            index,
            initial,
            failure_edges: remap_edges(failure_edges.into_iter().collect()),
            suspend_edges: remap_edges(suspend_edges.into_iter().collect()),
        }
    }

    pub fn components(&self) -> &[Arc<ComponentSpec>] {
        &self.components
    }

    pub fn component_names(&self) -> Vec<String> {
        self.components.iter().map(|c| c.name().to_string()).collect()
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|c| c.name() == name)
    }

    pub fn segment_lengths(&self) -> Vec<usize> {
        self.components.iter().map(|c| c.mode_count()).collect()
    }

    /// One variable per (component, operating mode), aligned with the slots.
    pub fn variables(&self) -> Vec<VarId> {
        self.components
            .iter()
            .flat_map(|c| {
                let name: Arc<str> = Arc::from(c.name());
                (1..=c.mode_count() as u32).map(move |k| VarId::new(name.clone(), k))
            })
            .collect()
    }

    /// Variable values taken from the component specs.
    pub fn assignment(&self) -> HashMap<VarId, f64> {
        let mut out = HashMap::new();
        for c in &self.components {
            for k in 1..=c.mode_count() {
                out.insert(VarId::new(c.name(), k as u32), c.reliability(k));
            }
        }
        out
    }

    pub fn states(&self) -> &[ModelState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &ModelState {
        &self.states[i]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn find(&self, config: &Configuration) -> Option<usize> {
        self.index.get(config).copied()
    }

    pub fn failure_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.failure_edges
    }

    pub fn suspend_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.suspend_edges
    }

    pub fn edges(&self, kind: EdgeKind) -> &BTreeSet<(usize, usize)> {
        match kind {
            EdgeKind::Failure => &self.failure_edges,
            EdgeKind::Suspend => &self.suspend_edges,
        }
    }

    /// Slots of component `ci` within `config`.
    pub fn segment<'a>(&self, config: &'a Configuration, ci: usize) -> &'a [ModeStatus] {
        &config.slots()[self.offsets[ci]..self.offsets[ci + 1]]
    }

    pub fn segment_state(&self, config: &Configuration, ci: usize) -> SegmentState {
        segment_state(self.segment(config, ci)).expect("model holds only valid configurations")
    }

    /// Evaluated operating probability of state `i`.
    pub fn state_value(&self, i: usize) -> f64 {
        let assignment = self.assignment();
        self.states[i]
            .expr
            .eval(&assignment)
            .expect("model variables are all assigned")
    }

    /// Same model with segments permuted to `order` (component names).
    /// Returns `None` unless `order` is a permutation of the components.
    pub fn reorder_components(&self, order: &[String]) -> Option<QRModel> {
        if order.len() != self.components.len() {
            return None;
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|n| self.component_index(n))
            .collect::<Option<Vec<_>>>()?;
        let mut seen = perm.clone();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != perm.len() {
            return None;
        }
        let components: Vec<Arc<ComponentSpec>> =
            perm.iter().map(|&i| self.components[i].clone()).collect();
        let states: Vec<ModelState> = self
            .states
            .iter()
            .map(|s| {
                let slots = perm
                    .iter()
                    .flat_map(|&ci| self.segment(&s.config, ci).iter().copied())
                    .collect();
                ModelState {
                    config: Configuration::new(slots),
                    quality: s.quality.clone(),
                    expr: s.expr.clone(),
                }
            })
            .collect();
        Some(QRModel::new(
            components,
            states,
            self.failure_edges.iter().copied(),
            self.suspend_edges.iter().copied(),
        ))
    }
}

/// `1 X..X` for every component.
pub fn initial_configuration(components: &[Arc<ComponentSpec>]) -> Configuration {
    let slots = components
        .iter()
        .flat_map(|c| {
            std::iter::once(ModeStatus::Operating)
                .chain(std::iter::repeat(ModeStatus::NotAvailed).take(c.mode_count() - 1))
        })
        .collect();
    Configuration::new(slots)
}
