//! CLI experiment driver: configuration ingestion, experiment cells, and
//! deterministic CSV/SVG emission.

pub mod config;
pub mod report;
pub mod runs;
pub mod symbols;

pub use config::{ExperimentConfig, QValue, SymbolFamilySpec, WeightPairSpec, WeightSpecJson};
pub use report::{emit, EmitFormat, ExperimentReport, ReportRow, CSV_HEADER};
pub use runs::{run, run_critical, run_equivalence, run_weak_schatten, run_wnu_equivalence, ExperimentKind};
pub use symbols::{build_family, default_family, lipschitz_tent};
