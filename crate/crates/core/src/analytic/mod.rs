//! Closed-form ground-state quantities, special functions and quadrature.

pub mod bessel;
pub mod gr;
pub mod lieb_wu;
pub mod quadrature;

pub use crate::entropy::entropy_from_occupations;
pub use bessel::{bessel_j0, bessel_j1, bessel_j2};
pub use gr::{
    gr_charge_susceptibility, gr_e0, gr_entropy, gr_entropy_derivatives, gr_mu_of_n, gr_n_of_mu, gr_occupations, gr_w2,
    gr_w2_at, gr_w2_branch, Branch, Filling, Saturation, U_C,
};
pub use lieb_wu::{lieb_wu_mu_c, CriticalPotential};
pub use quadrature::{PanelScheme, QuadratureSpec};
