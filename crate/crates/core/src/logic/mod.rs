//! First-order logic over `(P, <=)`: formulas, evaluation and the
//! definability constructions.

mod define;
mod eval;
mod formula;

pub use define::{
    build_decoder_formula, check_monotone, define_finite_relation, graph_formula, graph_transform, lower_fringe,
    monotone_data, synthesize_monotone_definition, upper_graph, DefinitionCertificate, MonotoneData,
};
pub use eval::{evaluate, extension, Model, DEFAULT_BUDGET};
pub use formula::{Formula, Term};
