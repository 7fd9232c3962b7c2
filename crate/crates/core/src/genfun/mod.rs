//! Generating functions of the block length and replication position, their
//! inverse along the unit circle, and arc maxima of Littlewood-type polynomials.

mod arc;
mod inverse;
mod pgf;

pub use arc::{arc_max, littlewood_eval, ArcMaximum, ArcSpec};
pub use inverse::{
    arc_quadratic_bound_check, invert_on_arc, ArcBoundReport, ArcBoundRow, ArcInverter,
};
pub use pgf::{pgf_of_m, pgf_of_w, Evaluation, Pgf};
