mod group;
mod linalg;
mod subgroup;
mod torus;

pub use group::{Character, FinAbGroup, GroupElem};
pub use linalg::{diagonalize, inv_mod, kernel_mod, solve_mod, Diagonalization, Hom};
pub use subgroup::{all_subgroups, closure, Quotient, Subgroup, SubgroupIso};
pub use torus::TorusValue;

