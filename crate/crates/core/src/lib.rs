//! Min-plus (tropical) linear algebra and low-rank approximation.
//!
//! The crate is organised bottom-up:
//!
//! - [`tropical`]: scalars, dense matrices, products, Kleene star.
//! - [`graph`]: graph loading and the bridge to min-plus matrices.
//! - [`regression`]: ∞-norm and 2-norm min-plus regression.
//! - [`factorization`]: waypoint, alternating and symmetric factorizations.
//! - [`baselines`]: truncated SVD and non-negative matrix factorization.
//!
//! ```
//! use minplus::graph::{load_edge_list, shortest_path_matrix};
//! use minplus::tropical::is_idempotent;
//!
//! let g = load_edge_list("a b 1\nb c 2", false).unwrap();
//! let d = shortest_path_matrix(&g).unwrap();
//! assert_eq!(d.get(0, 2), 3.0);
//! assert!(is_idempotent(&d, 0.0));
//! ```

pub mod baselines;
pub mod error;
pub mod factorization;
pub mod graph;
pub mod regression;
pub mod rng;
pub mod tropical;

pub use error::{Error, Result};
pub use tropical::{TropicalMatrix, TropicalScalar};
