//! Deterministic special functions and sampling primitives shared by every
//! other module. All functions are pure and reentrant; random state lives
//! only in caller-owned [`RngStream`] values.

mod bessel;
mod gamma;
mod normal;
mod rng;

pub use bessel::{
    log_bessel_i, log_bessel_i_series, log_bessel_i_uniform, BesselRegime, BESSEL_ASYMPTOTIC_FLOOR,
};
pub use gamma::log_gamma;
pub(crate) use gamma::log_gamma_unchecked;
pub use normal::{erf, erfc, std_normal_cdf, std_normal_pdf, std_normal_quantile};
pub use rng::{sample_noncentral_chisq, RngStream};
