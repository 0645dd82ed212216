//! Numerical toolkit for the free entropy and free Fisher information of a
//! pair of projections, the Grassmannian random-matrix model behind the
//! log-Sobolev inequality relating them, and the liberation flow.

pub mod error;
pub mod functions;
pub mod measure;

pub use error::{Error, Result};
pub mod report;
pub mod stats;
pub mod entropy;
pub mod fisher;
pub mod grassmann;
pub mod ensemble;
pub mod liberation;
