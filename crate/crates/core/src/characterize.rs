//! Component-level model: every valid slot vector of one component, with
//! its failure and suspension successors.

use std::sync::Arc;

use crate::model::{ComponentSpec, Configuration, ModeStatus, SegmentState};
pub use crate::qrmodel::state_expr;
use crate::qrmodel::{segment_successor, EdgeKind, ModelState, QRModel};

/// All valid segments of length `d`: `(0|Y)^{k-1} 1 X^{d-k}` for each `k`,
/// then the dead ones `(0|Y)^d`. Count is `2^{d+1} - 1`.
pub fn enumerate_segments(d: usize) -> Vec<Vec<ModeStatus>> {
    let prefixes = |len: usize| -> Vec<Vec<ModeStatus>> {
        (0..1u64 << len)
            .map(|bits| {
                (0..len)
                    .map(|i| {
                        if bits >> (len - 1 - i) & 1 == 0 {
                            ModeStatus::Failed
                        } else {
                            ModeStatus::Suspended
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let mut out = Vec::with_capacity((1 << (d + 1)) - 1);
    for k in 1..=d {
        for mut p in prefixes(k - 1) {
            p.push(ModeStatus::Operating);
            p.extend(std::iter::repeat(ModeStatus::NotAvailed).take(d - k));
            out.push(p);
        }
    }
    out.extend(prefixes(d));
    out
}

pub fn build_component_model(spec: &ComponentSpec) -> QRModel {
    build_component_model_arc(Arc::new(spec.clone()))
}

pub fn build_component_model_arc(spec: Arc<ComponentSpec>) -> QRModel {
    let d = spec.mode_count();
    let vars: Vec<_> = (1..=d as u32)
        .map(|k| crate::rel_algebra::VarId::new(spec.name(), k))
        .collect();
    let segments = enumerate_segments(d);
    let states: Vec<ModelState> = segments
        .iter()
        .map(|seg| {
            let config = Configuration::new(seg.clone());
            let quality = match crate::model::segment_state(seg) {
                Some(SegmentState::Live(k)) => spec.quality(k),
                _ => crate::model::QualityMap::empty(),
            };
            let expr = state_expr(&config, &vars);
            ModelState {
                config,
                quality,
                expr,
            }
        })
        .collect();
    let position = |seg: &Vec<ModeStatus>| segments.iter().position(|s| s == seg).unwrap();
    let edges = |kind: EdgeKind| -> Vec<(usize, usize)> {
        segments
            .iter()
            .enumerate()
            .filter_map(|(i, seg)| segment_successor(seg, kind).map(|next| (i, position(&next))))
            .collect()
    };
    QRModel::new(
        vec![spec],
        states,
        edges(EdgeKind::Failure),
        edges(EdgeKind::Suspend),
    )
}
