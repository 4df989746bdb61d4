//! Integer matrices, Smith normal form and finitely generated abelian groups.

mod group;
mod matrix;
mod snf;

pub use group::{present, AbelianElement, FgAbelianGroup};
pub use matrix::{identity, mul, Dense, IntMatrix};
pub(crate) use snf::smith_normal_form_right;
pub use snf::{smith_normal_form, SnfResult};
