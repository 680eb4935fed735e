//! Special functions and seeded random streams used by the belief updates
//! and the index policies.

mod beta;
mod gamma;
mod rng;

pub use beta::{beta_cdf_pair, inv_reg_inc_beta, reg_inc_beta};
pub use gamma::{digamma, ln_beta, ln_gamma};
pub use rng::{derive_stream, sample_bernoulli, sample_beta, Role, RngStream};

pub(crate) use beta::inv_reg_inc_beta_unchecked;
pub(crate) use gamma::digamma_unchecked;
pub(crate) use rng::sample_beta_unchecked;
