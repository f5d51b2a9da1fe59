//! Text exporters: UPPAAL XTA, Graphviz DOT and BDI plan sketches.

mod bdi;
mod dot;
mod xta;
mod xta_check;

pub use bdi::{to_bdi_sketch, PlanLine, PlanSketch};
pub use dot::{dot_counts, to_dot, to_dot_network};
pub use xta::{process_name, to_xta, SpatialMode, XtaExportError};
pub use xta_check::{xta_check, XtaCheckError, XtaProcess, XtaSummary};
