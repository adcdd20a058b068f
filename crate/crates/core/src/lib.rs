//! Exact asymptotic error-probability limits for AWGN channels under
//! multifaceted power constraints, together with finite-blocklength converse
//! and achievability bounds that sandwich them.

pub mod channel;
pub mod constraints;
pub mod error;
pub mod optimizer;
pub mod oracle;
pub mod specfn;

pub use error::{Error, Result};
