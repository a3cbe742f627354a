//! Non-Hermitian tunneling dynamics of coupled boson states.
//!
//! Two sites are treated in closed form and by exact diagonalization; larger
//! site networks are integrated with a fixed-step RK4 scheme.

mod network;
mod trajectory;
mod two_site;

pub use network::{localized, IntegratorOptions, SiteNetwork};
pub(crate) use network::{substeps_for, Rk4};
pub(crate) use two_site::check_normalized;
pub use trajectory::Trajectory;
pub use two_site::{
    amplitudes_closed, classify_regime, eigenvalues, eigenvector_coalescence, ep_limit, ep_scan,
    ep_scan_cell,
    find_exceptional_point, p12_closed, system_for_gamma_diff, EpScanRow, EpSearch, Regime,
    RegimeClass, TwoSiteSystem,
};
