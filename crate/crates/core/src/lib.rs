//! Threshold storage with a tunable leakage budget.
//!
//! A file is spread over `T` servers so that any `tau` of them can rebuild it
//! while any `z` of them learn at most a fraction `alpha` of it. Allowing
//! `alpha > 0` shrinks every share and the encoder's randomness; the
//! [`planner`] gives the smallest achievable values, [`leaky`] builds a scheme
//! that meets them, and [`oracle`] and [`converse`] check both claims exactly
//! on small instances.
//!
//! ```
//! use lkss::{leaky, planner, rational::ratio, SchemeParams};
//! use rand::SeedableRng;
//!
//! let params = SchemeParams::with_modulus(4, 3, 2, ratio(1, 4), 65_537).unwrap();
//! let plan = planner::plan(&params).unwrap();
//! assert_eq!(plan.lambda_ratio, ratio(3, 4));
//!
//! let mut rng = leaky::RngRandomness::new(rand::rngs::StdRng::seed_from_u64(1));
//! let shares = lkss::sharefile::split_bytes(b"hello", &params, &mut rng).unwrap();
//! assert_eq!(lkss::sharefile::recover_bytes(&shares[1..]).unwrap(), b"hello");
//! ```

pub mod access;
pub mod converse;
pub mod error;
pub mod field;
pub mod leaky;
mod lincomb;
pub mod matrix;
pub mod oracle;
pub mod params;
pub mod planner;
pub mod ramp;
pub mod rational;
pub mod sharefile;

pub use access::{AccessFunction, GridFunction};
pub use error::{Error, Result};
pub use field::{FieldElement, PrimeField};
pub use leaky::{ShareBundle, SuperblockLayout};
pub use params::SchemeParams;
pub use planner::SchemePlan;
pub use rational::Rational;
