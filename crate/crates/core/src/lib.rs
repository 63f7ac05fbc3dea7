pub mod bound;
pub mod certificate;
pub mod cli;
pub mod error;
pub mod moments;
pub mod numeric;
pub mod poly;
pub mod sampler;
pub mod testfns;

pub use error::{Error, Result};
pub use moments::{Domain, Moment, MomentTable};
pub use poly::{parse_polynomial, MultiIndex, Polynomial};
pub use bound::{bound_sweep, compute_bound, BoundResult};
