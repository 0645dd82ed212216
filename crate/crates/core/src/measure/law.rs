//! The representing data `(ν, {α_ij})` of a pair of projections.

use serde::{Deserialize, Serialize};
use std::path::Path;

use super::density::{DensitySpec, Point, TableDensity};
use super::quadrature::QuadratureGrid;
use crate::error::{Error, Result};

/// Tolerance on the trace identities and on user-supplied masses.
pub const LOAD_TOLERANCE: f64 = 1e-6;

/// Traces of `p∧q`, `p∧q⊥`, `p⊥∧q`, `p⊥∧q⊥`.
/// Atom masses below this are rounding noise.
const ATOM_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atoms {
    pub a11: f64,
    pub a10: f64,
    pub a01: f64,
    pub a00: f64,
}

impl Atoms {
    /// The atoms forced by generic position for given traces.
    pub fn generic(alpha: f64, beta: f64) -> Self {
        // rounding in e.g. 1 - 0.7 - 0.3 must not create a spurious atom
        let part = |v: f64| if v > ATOM_FLOOR { v } else { 0.0 };
        Self {
            a11: part(alpha + beta - 1.0),
            a10: part(alpha - beta),
            a01: part(beta - alpha),
            a00: part(1.0 - alpha - beta),
        }
    }

    pub fn total(&self) -> f64 {
        self.a11 + self.a10 + self.a01 + self.a00
    }

    /// Coefficient `α₀₁ + α₁₀` of the singularity at 0.
    pub fn coeff_zero(&self) -> f64 {
        self.a01 + self.a10
    }

    /// Coefficient `α₀₀ + α₁₁` of the singularity at 1.
    pub fn coeff_one(&self) -> f64 {
        self.a00 + self.a11
    }

    pub fn is_generic(&self) -> bool {
        self.a00 * self.a11 == 0.0 && self.a01 * self.a10 == 0.0
    }

    fn as_array(&self) -> [f64; 4] {
        [self.a11, self.a10, self.a01, self.a00]
    }
}

/// Joint law of two projections in a tracial state.
#[derive(Debug, Clone)]
pub struct ProjectionPairLaw {
    alpha: f64,
    beta: f64,
    atoms: Atoms,
    density: DensitySpec,
}

/// `min{α, β, 1-α, 1-β}`.
pub fn rho(alpha: f64, beta: f64) -> f64 {
    alpha.min(beta).min(1.0 - alpha).min(1.0 - beta).max(0.0)
}

impl ProjectionPairLaw {
    /// Validates and assembles a law. A density whose mass is off by less than
    /// [`LOAD_TOLERANCE`] is rescaled to the exact mass `1 - ∑α_ij`.
    pub fn new(alpha: f64, beta: f64, atoms: Atoms, density: DensitySpec) -> Result<Self> {
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Invariant {
                    equation: "0 <= tau(p), tau(q) <= 1",
                    detail: format!("{name} = {v} is outside [0,1]"),
                });
            }
        }
        if atoms.as_array().iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::Invariant {
                equation: "alpha_ij >= 0",
                detail: format!("atoms {atoms:?} are not all in [0,1]"),
            });
        }
        let mass = 1.0 - atoms.total();
        if mass < -LOAD_TOLERANCE {
            return Err(Error::Invariant {
                equation: "nu((0,1)) = 1 - sum alpha_ij >= 0",
                detail: format!("atoms sum to {}", atoms.total()),
            });
        }
        let mass = mass.max(0.0);
        let given = density.mass();
        if (given - mass).abs() > LOAD_TOLERANCE {
            return Err(Error::Invariant {
                equation: "nu((0,1)) = 1 - sum alpha_ij",
                detail: format!("density mass {given} but atoms leave {mass}"),
            });
        }
        let density = if mass == 0.0 {
            DensitySpec::zero()
        } else if given != mass {
            density.with_mass(mass)
        } else {
            density
        };
        let tp = atoms.a10 + atoms.a11 + mass / 2.0;
        let tq = atoms.a01 + atoms.a11 + mass / 2.0;
        if (tp - alpha).abs() > LOAD_TOLERANCE || (tq - beta).abs() > LOAD_TOLERANCE {
            return Err(Error::Invariant {
                equation: "tau(p) = a10 + a11 + nu/2, tau(q) = a01 + a11 + nu/2",
                detail: format!("traces from atoms are ({tp}, {tq}), declared ({alpha}, {beta})"),
            });
        }
        Ok(Self {
            alpha,
            beta,
            atoms,
            density,
        })
    }

    /// The law of two free projections with traces `α, β`.
    pub fn free_pair(alpha: f64, beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) || !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidArgument(format!(
                "traces ({alpha}, {beta}) must lie in [0,1]"
            )));
        }
        Self::new(alpha, beta, Atoms::generic(alpha, beta), DensitySpec::free_pair(alpha, beta))
    }

    /// Law with the given traces, generic atoms and a density rescaled to mass `2ρ`.
    pub fn generic_with_density(alpha: f64, beta: f64, density: &DensitySpec) -> Result<Self> {
        let mass = 2.0 * rho(alpha, beta);
        Self::new(alpha, beta, Atoms::generic(alpha, beta), density.with_mass(mass))
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn atoms(&self) -> &Atoms {
        &self.atoms
    }

    pub fn density(&self) -> &DensitySpec {
        &self.density
    }

    pub fn nu_mass(&self) -> f64 {
        self.density.mass()
    }

    pub fn rho(&self) -> f64 {
        rho(self.alpha, self.beta)
    }

    pub fn is_generic(&self) -> bool {
        self.atoms.is_generic()
    }

    /// Quadrature grid adapted to the support of `ν`.
    pub fn grid(&self, n: usize) -> QuadratureGrid {
        self.density.grid(n)
    }

    /// `∫ g dν`, after checking the edge behaviour of `g` against the density.
    pub fn integrate_against(&self, g: &Integrand<'_>, grid: &QuadratureGrid) -> Result<f64> {
        if self.density.is_zero() {
            return Ok(0.0);
        }
        let (lo, hi) = self.density.support();
        let (ea, eb) = self.density.edge_exponents();
        if lo == 0.0 && ea + g.at_zero <= -1.0 {
            return Err(Error::Divergent(format!(
                "integrand ~ x^{} against density ~ x^{ea} diverges at 0",
                g.at_zero
            )));
        }
        if hi == 1.0 && eb + g.at_one <= -1.0 {
            return Err(Error::Divergent(format!(
                "integrand ~ (1-x)^{} against density ~ (1-x)^{eb} diverges at 1",
                g.at_one
            )));
        }
        self.density.integrate(grid, |p| (g.f)(p))
    }

    /// Integrability of the atom drift and of `f` in `L³(x(1-x)dx)`.
    pub fn check_integrability(&self) -> IntegrabilityReport {
        let mut report = IntegrabilityReport {
            atom_term_finite: true,
            weighted_l3_finite: true,
            divergences: vec![],
        };
        if self.density.is_zero() {
            return report;
        }
        let (lo, hi) = self.density.support();
        let (ea, eb) = self.density.edge_exponents();
        let (a, b) = (self.atoms.coeff_zero(), self.atoms.coeff_one());
        if lo == 0.0 && a > 0.0 && ea <= 0.0 {
            report.atom_term_finite = false;
            report
                .divergences
                .push(format!("(a01+a10)/x against density ~ x^{ea} diverges at 0"));
        }
        if hi == 1.0 && b > 0.0 && eb <= 0.0 {
            report.atom_term_finite = false;
            report
                .divergences
                .push(format!("(a00+a11)/(1-x) against density ~ (1-x)^{eb} diverges at 1"));
        }
        if !weighted_power_finite(lo == 0.0, ea, 3.0) || !weighted_power_finite(hi == 1.0, eb, 3.0) {
            report.weighted_l3_finite = false;
            report
                .divergences
                .push(format!("density exponents ({ea}, {eb}) leave weighted L3"));
        }
        report
    }

    /// Serializable description of the law.
    pub fn to_document(&self) -> LawSummary {
        LawSummary {
            alpha: self.alpha,
            beta: self.beta,
            atoms: self.atoms,
            nu_mass: self.nu_mass(),
            rho: self.rho(),
            generic_position: self.is_generic(),
            density: self.density.describe(),
        }
    }
}

/// Whether `∫ f^p x(1-x)` is finite near one end of the support.
fn weighted_power_finite(at_singular_end: bool, exponent: f64, p: f64) -> bool {
    let weight = if at_singular_end { 1.0 } else { 0.0 };
    p * exponent + weight > -1.0
}

/// `(∫ |f|^p x(1-x) dx)^{1/p}` for `p ∈ {1, 2, 3, 6}`.
pub fn weighted_norm(density: &DensitySpec, p: f64, grid: &QuadratureGrid) -> Result<f64> {
    if ![1.0, 2.0, 3.0, 6.0].contains(&p) {
        return Err(Error::InvalidArgument(format!("weighted norm exponent {p} not in {{1,2,3,6}}")));
    }
    if density.is_zero() {
        return Ok(0.0);
    }
    let (lo, hi) = density.support();
    let (ea, eb) = density.edge_exponents();
    if !weighted_power_finite(lo == 0.0, ea, p) || !weighted_power_finite(hi == 1.0, eb, p) {
        return Err(Error::Divergent(format!(
            "density with edge exponents ({ea}, {eb}) is not in weighted L{p}"
        )));
    }
    density.check_grid(grid)?;
    let total: f64 = (0..grid.len())
        .map(|i| {
            let pt = Point::on_grid(grid, i);
            let f = density.edge_weight(pt) * density.reduced(pt).0;
            grid.weights()[i] * f.abs().powf(p) * pt.x * pt.complement
        })
        .sum();
    Ok(total.powf(1.0 / p))
}

/// `(∑ w_i |g_i|^p x_i(1-x_i))^{1/p}` for values tabulated on a grid.
pub fn weighted_norm_values(values: &[f64], p: f64, grid: &QuadratureGrid) -> Result<f64> {
    if ![1.0, 2.0, 3.0, 6.0].contains(&p) {
        return Err(Error::InvalidArgument(format!("weighted norm exponent {p} not in {{1,2,3,6}}")));
    }
    if values.len() != grid.len() {
        return Err(Error::InvalidArgument("values do not match the grid".into()));
    }
    let total: f64 = values
        .iter()
        .zip(grid.weights())
        .zip(grid.nodes().iter().zip(grid.complements()))
        .map(|((g, w), (x, c))| w * g.abs().powf(p) * x * c)
        .sum();
    Ok(total.powf(1.0 / p))
}

/// A function to integrate against `ν`, with its power-law order at 0 and 1
/// (`g ~ x^at_zero`, logarithms count as order 0).
pub struct Integrand<'a> {
    f: Box<dyn Fn(Point) -> f64 + Sync + 'a>,
    pub at_zero: f64,
    pub at_one: f64,
}

impl<'a> Integrand<'a> {
    pub fn new(f: impl Fn(Point) -> f64 + Sync + 'a, at_zero: f64, at_one: f64) -> Self {
        Self {
            f: Box::new(f),
            at_zero,
            at_one,
        }
    }

    /// Bounded integrand of `x`.
    pub fn bounded(f: impl Fn(f64) -> f64 + Sync + 'a) -> Self {
        Self::new(move |p: Point| f(p.x), 0.0, 0.0)
    }

    pub fn one() -> Self {
        Self::new(|_| 1.0, 0.0, 0.0)
    }

    pub fn eval(&self, p: Point) -> f64 {
        (self.f)(p)
    }

    /// `log x`, evaluated from the exact node.
    pub fn log_x() -> Self {
        Self::new(|p: Point| p.x.ln(), 0.0, 0.0)
    }

    /// `log(1-x)`, evaluated from the stored complement.
    pub fn log_one_minus_x() -> Self {
        Self::new(|p: Point| p.complement.ln(), 0.0, 0.0)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilityReport {
    pub atom_term_finite: bool,
    pub weighted_l3_finite: bool,
    pub divergences: Vec<String>,
}

impl IntegrabilityReport {
    pub fn ok(&self) -> bool {
        self.atom_term_finite && self.weighted_l3_finite
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LawSummary {
    pub alpha: f64,
    pub beta: f64,
    pub atoms: Atoms,
    pub nu_mass: f64,
    pub rho: f64,
    pub generic_position: bool,
    pub density: super::density::DensitySummary,
}

/// On-disk form of a law.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawDocument {
    pub alpha: f64,
    pub beta: f64,
    pub atoms: Atoms,
    pub density: DensityDocument,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityDocument {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_exponents: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mass: Option<f64>,
}

impl LawDocument {
    pub fn into_law(self) -> Result<ProjectionPairLaw> {
        let expected = (1.0 - self.atoms.total()).max(0.0);
        let mass = self.density.mass.unwrap_or(expected);
        if !(mass >= 0.0) || !mass.is_finite() {
            return Err(Error::Malformed(format!("density mass {mass} is not a nonnegative number")));
        }
        let kind = self.density.kind.trim().to_ascii_lowercase().replace('_', "-");
        let kind = kind.strip_prefix("analytic-").unwrap_or(&kind).to_string();
        let density = match kind.as_str() {
            "arcsine" => DensitySpec::arcsine(mass),
            "uniform" => DensitySpec::uniform(mass),
            "free-pair" => {
                let d = DensitySpec::free_pair(self.alpha, self.beta);
                if d.is_zero() {
                    d
                } else {
                    d.with_mass(mass)
                }
            }
            "zero" | "none" => DensitySpec::zero(),
            "table" => {
                let nodes = self
                    .density
                    .nodes
                    .ok_or_else(|| Error::Malformed("table density needs 'nodes'".into()))?;
                let values = self
                    .density
                    .values
                    .ok_or_else(|| Error::Malformed("table density needs 'values'".into()))?;
                let [a, b] = self.density.edge_exponents.unwrap_or([0.0, 0.0]);
                let table = DensitySpec::table(TableDensity::new(nodes, values, (a, b))?);
                if (table.mass() - mass).abs() > LOAD_TOLERANCE * mass.max(1.0) {
                    return Err(Error::Invariant {
                        equation: "density mass = quadrature of density",
                        detail: format!("table integrates to {} but declares {mass}", table.mass()),
                    });
                }
                table
            }
            other => return Err(Error::Malformed(format!("unknown density kind '{other}'"))),
        };
        if kind != "table" && kind != "zero" && kind != "none" && mass == 0.0 {
            return ProjectionPairLaw::new(self.alpha, self.beta, self.atoms, DensitySpec::zero());
        }
        ProjectionPairLaw::new(self.alpha, self.beta, self.atoms, density)
    }
}

/// Parses a law from JSON text.
pub fn parse_law(text: &str) -> Result<ProjectionPairLaw> {
    let doc: LawDocument =
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("law document: {e}")))?;
    doc.into_law()
}

/// Reads and validates a law file.
pub fn load_law(path: &Path) -> Result<ProjectionPairLaw> {
    let text = std::fs::read_to_string(path)?;
    parse_law(&text)
}
