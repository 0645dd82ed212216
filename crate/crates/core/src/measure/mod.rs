//! Laws of projection pairs, their densities, and quadrature on `(0,1)`.

pub mod density;
pub mod law;
pub mod quadrature;

pub use density::{
    free_pair_support, ChebyshevSeries, DensityKind, DensitySpec, EdgeClass, Point, ReducedFn, TableDensity,
    Tabulated,
};
pub use law::{
    load_law, parse_law, rho, weighted_norm, weighted_norm_values, Atoms, Integrand, IntegrabilityReport,
    LawDocument, ProjectionPairLaw,
};
pub use quadrature::{QuadratureGrid, Rule};
