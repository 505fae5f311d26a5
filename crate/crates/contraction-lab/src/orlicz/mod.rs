//! Young functions, Orlicz norms, φ-divergences and the ρ functional.

pub mod divergence;
pub mod norm;
pub mod rho;
pub mod young;

pub use divergence::{chi2, divergence, entropy, kl, Divergence};
pub use norm::{amemiya_norm, holder_product_bound, lp_norm, luxemburg_norm, norm, Flavor};
pub use rho::{rho_functional, Rho};
pub use young::{conjugate_exponent, YoungFunction, X1};
