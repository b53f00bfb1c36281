//! Trajectory spaces, the determining map W~ and the determining-form ODE.

mod detform;
mod lipschitz;
mod norms;
mod trajectory;
mod wmap;

pub use detform::{
    beta_evolve, beta_f, beta_path, detform_rhs, find_zeros, BetaConfig, BetaFunction, BetaPath,
    BetaRoot, BetaState, DetformContext, DetformRhs, Pchip,
};
pub use lipschitz::{lipschitz_probe, LipschitzProbe};
pub use norms::{
    norm_x, norm_y, norm_y_series, norm_z, norm_z_series, sup_window_integral, TrajectoryNorms,
};
pub use trajectory::{record_reference, ReferenceRun, Trajectory};
pub use wmap::{
    recover_solution, w_map, w_map_pair, NormSeries, PairOutput, SpinUpConfig, WOutput,
};
