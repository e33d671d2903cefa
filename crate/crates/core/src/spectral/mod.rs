//! Inverse Fourier machinery: FRFT, Newton–Cotes panels, grids and density tables.

pub mod density;
pub mod frft;
pub mod grid;
pub mod newton_cotes;

pub use density::{density_table, hess_index, invert_char_fn, DensityTable, DerivOrder, Inverter};
pub use frft::{frft, FrftPlan};
pub use grid::{choose_grid, choose_grid_covering, FourierGrid, DEFAULT_COVERAGE, TAIL_TOL};
pub use newton_cotes::{cumulative_integral, integrate, newton_cotes_weights};
