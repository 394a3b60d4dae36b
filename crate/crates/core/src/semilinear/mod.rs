mod exterior;
mod matrix;
mod snf;
mod submodule;

pub use exterior::{exterior_power, subset_index, subsets, wedge_columns};
pub use matrix::{det_division_free, Matrix};
pub use snf::{smith, PivotRule, Snf};
pub use submodule::Submodule;

impl Matrix {
    pub fn det(&self) -> crate::Result<crate::exactring::RingElem> {
        det_division_free(self)
    }
}
