//! Quality and reliability composition for component-based systems.
//!
//! Component specs are characterized as small degradation models, composed
//! along the series-parallel structure of a system graph, abstracted back
//! into a system-level spec, and queried with SQDL.

pub mod characterize;
pub mod compose;
pub mod model;
pub mod oracle;
pub mod par;
pub mod qrmodel;
pub mod query;
pub mod rel_algebra;
pub mod render;
pub mod sqdl;
pub mod synthesize;

pub use characterize::{build_component_model, state_expr};
pub use compose::{build_system_model, compose_parallel, compose_series, merge_parallel_maps, models_equivalent};
pub use model::{
    ComponentLibrary, ComponentSpec, Configuration, ModeStatus, ParallelPolicy, QualityMap, SystemGraph,
    SystemQRSpec,
};
pub use par::Exec;
pub use qrmodel::{EdgeKind, ModelState, QRModel};
pub use rel_algebra::{path_success_expr, poly_eval, poly_mul, RelExpr, VarId};
pub use synthesize::{abstract_failure_model, check_conformance, emit_system_qrspec, structural_reliability};
