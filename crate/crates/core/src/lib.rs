//! Design-grounded multi-robot assembly planning and closed-loop simulation.
//!
//! The pipeline runs from a CAD-style elevation drawing to a reproducible
//! scenario study:
//!
//! 1. [`dxf`] parses a DXF subset into line segments, recovers the drawing
//!    scale from the shortest segment, and reconstructs rectangular member
//!    footprints by pairing parallel edges.
//! 2. [`ontology`] classifies footprints into construction roles, derives
//!    prerequisite rules, and assembles the component array; [`scm`] and
//!    [`render`] serialize it as structured metadata and an SVG drawing.
//! 3. [`state`] maintains the installed/uninstalled partition, reconciles
//!    noisy raw observations against the assembly rules, and flags human
//!    intervention events; [`perception`] supplies the raw observations.
//! 4. [`planner`] computes admissible frontiers, payload-feasible robot
//!    coalitions, and minimal-change plan updates.
//! 5. [`bt`] compiles plans into per-robot behavior trees with
//!    synchronization barriers and ticks them against the simulated world.
//! 6. [`sim`] closes the loop with human-intervention policies and computes
//!    the evaluation metrics; [`scenarios`] holds the built-in study
//!    configurations and [`fixtures`] the 27-component timber wall.

pub mod bt;
pub mod dxf;
pub mod fixtures;
pub mod geom;
pub mod ontology;
pub mod perception;
pub mod planner;
pub mod render;
pub mod scenarios;
pub mod scm;
pub mod sim;
pub mod state;
pub mod world;

pub use bt::{compile, tick, ActionDurations, ActionKind, BTNode, BtError, TickStatus};
pub use dxf::{
    parse_design, reconstruct_rectangles, recover_scale, DxfError, EntityKind, PairingConfig,
    ParsedDesign, Reconstruction, RectCandidate, ScaleInfo, Segment,
};
pub use geom::{Bbox, Point2};
pub use ontology::{
    classify_components, compute_mass, derive_rules, AssemblyRule, ClassifyConfig, ComponentArray,
    ComponentKind, ComponentRecord, ConstructionConstants, LayerRef, OntologyError, RuleKind,
};
pub use perception::{estimate, NoiseModel, NoisyEstimator, PerfectEstimator, StateEstimator};
pub use planner::{
    edit_distance, feasible_coalitions, frontier, replan, replan_cover, replan_full, Coalition,
    Plan, PlanUpdate, RobotProfile,
};
pub use render::render_design;
pub use scm::{parse_scm, serialize_scm, ScmError};
pub use sim::{
    apply_policy, compute_metrics, run_batch, run_scenario, AggregateRow, BatchResult,
    HumanActions, HumanPolicy, MetricsReport, PlannerMode, RunRow, ScenarioConfig, TraceRecord,
};
pub use state::{detect_event, reconcile, EventKind, InterventionEvent, StateError, SymbolicState};
pub use world::{ExecEvent, World};
