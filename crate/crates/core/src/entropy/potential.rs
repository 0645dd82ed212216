//! Tilt potentials `h`: the trace `h̃ = Tr₂ h` on `(0,1)` and the diagonal
//! entries of `h` at the endpoints, which pair with the atoms.

use serde::{Deserialize, Serialize};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functions::{sampled_sup, Polynomial, ScalarFunction};
use crate::measure::{Integrand, ProjectionPairLaw, QuadratureGrid};

/// Number of intervals used to sample sup-norms.
pub const SUP_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Smoothness {
    C0,
    C1,
    C2,
}

/// `h₁₁(0), h₂₂(0), h₁₁(1), h₂₂(1)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagonalValues {
    pub h11_0: f64,
    pub h22_0: f64,
    pub h11_1: f64,
    pub h22_1: f64,
}

/// Sup-norms of `h̃` and its first two derivatives on `[0,1]`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SupNorms {
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
}

#[derive(Clone)]
pub struct PotentialSpec {
    htilde: Arc<dyn ScalarFunction>,
    label: String,
    smoothness: Smoothness,
    norms: SupNorms,
    diagonal: DiagonalValues,
}

impl std::fmt::Debug for PotentialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("label", &self.label)
            .field("smoothness", &self.smoothness)
            .field("norms", &self.norms)
            .field("diagonal", &self.diagonal)
            .finish()
    }
}

fn sampled_norms(g: &dyn ScalarFunction, smoothness: Smoothness) -> SupNorms {
    SupNorms {
        h0: sampled_sup(|x| g.value(x), SUP_SAMPLES),
        h1: if smoothness >= Smoothness::C1 {
            sampled_sup(|x| g.d1(x), SUP_SAMPLES)
        } else {
            f64::INFINITY
        },
        h2: if smoothness >= Smoothness::C2 {
            sampled_sup(|x| g.d2(x), SUP_SAMPLES)
        } else {
            f64::INFINITY
        },
    }
}

impl PotentialSpec {
    /// `h = 0`.
    pub fn zero() -> Self {
        Self::polynomial(Polynomial::zero(), DiagonalValues::default())
    }

    /// Polynomial `h̃` (smooth); norms are sampled.
    pub fn polynomial(poly: Polynomial, diagonal: DiagonalValues) -> Self {
        let label = poly.to_string();
        Self::new(Arc::new(poly), &label, Smoothness::C2, None, diagonal)
            .expect("sampled norms are consistent")
    }

    /// General `h̃`. Declared norms must dominate the sampled ones.
    pub fn new(
        htilde: Arc<dyn ScalarFunction>,
        label: &str,
        smoothness: Smoothness,
        declared: Option<SupNorms>,
        diagonal: DiagonalValues,
    ) -> Result<Self> {
        let sampled = sampled_norms(htilde.as_ref(), smoothness);
        let norms = match declared {
            None => sampled,
            Some(d) => {
                let below = |declared: f64, seen: f64| declared < seen * (1.0 - 1e-12);
                if below(d.h0, sampled.h0)
                    || (smoothness >= Smoothness::C1 && below(d.h1, sampled.h1))
                    || (smoothness >= Smoothness::C2 && below(d.h2, sampled.h2))
                {
                    return Err(Error::Invariant {
                        equation: "declared sup-norms >= sampled sup-norms",
                        detail: format!("declared {d:?}, sampled {sampled:?}"),
                    });
                }
                d
            }
        };
        Ok(Self {
            htilde,
            label: label.to_string(),
            smoothness,
            norms,
            diagonal,
        })
    }

    pub fn value(&self, x: f64) -> f64 {
        self.htilde.value(x)
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.htilde.d1(x)
    }

    pub fn d2(&self, x: f64) -> f64 {
        self.htilde.d2(x)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn norms(&self) -> SupNorms {
        self.norms
    }

    pub fn diagonal(&self) -> DiagonalValues {
        self.diagonal
    }

    /// True when `h̃` has vanishing derivative (constant tilts).
    pub fn is_flat(&self) -> bool {
        self.norms.h1 == 0.0
    }

    /// Contribution of the atoms to `τ(h)`.
    pub fn atom_term(&self, law_atoms: &crate::measure::Atoms) -> f64 {
        let d = &self.diagonal;
        law_atoms.a10 * d.h11_0 + law_atoms.a01 * d.h22_0 + law_atoms.a11 * d.h11_1 + law_atoms.a00 * d.h22_1
    }

    /// `τ(h) = atoms·diag(h) + ½ ∫ h̃ dν`.
    pub fn trace_against(&self, law: &ProjectionPairLaw, grid: &QuadratureGrid) -> Result<f64> {
        let integral = law.integrate_against(&Integrand::bounded(|x| self.value(x)), grid)?;
        Ok(self.atom_term(law.atoms()) + 0.5 * integral)
    }

    /// Reads `{"htilde": {"kind": "poly", "coeffs": [...]}, "diagonal": {...}}`.
    pub fn from_document(doc: PotentialDocument) -> Result<Self> {
        let kind = doc.htilde.kind.to_ascii_lowercase();
        if kind != "poly" && kind != "polynomial" {
            return Err(Error::Malformed(format!("unknown potential kind '{}'", doc.htilde.kind)));
        }
        if doc.htilde.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Malformed("potential coefficients must be finite".into()));
        }
        let poly = Polynomial::new(doc.htilde.coeffs);
        let label = poly.to_string();
        Self::new(
            Arc::new(poly),
            &label,
            doc.smoothness.unwrap_or(Smoothness::C2),
            doc.sup_norms,
            doc.diagonal.unwrap_or_default(),
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialDocument {
    pub htilde: FunctionDocument,
    #[serde(default)]
    pub diagonal: Option<DiagonalValues>,
    #[serde(default)]
    pub smoothness: Option<Smoothness>,
    #[serde(default)]
    pub sup_norms: Option<SupNorms>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionDocument {
    pub kind: String,
    pub coeffs: Vec<f64>,
}

pub fn parse_potential(text: &str) -> Result<PotentialSpec> {
    let doc: PotentialDocument =
        serde_json::from_str(text).map_err(|e| Error::Malformed(format!("potential document: {e}")))?;
    PotentialSpec::from_document(doc)
}

pub fn load_potential(path: &Path) -> Result<PotentialSpec> {
    parse_potential(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_norms_of_quadratic() {
        let h = PotentialSpec::polynomial(Polynomial::new(vec![0.0, 0.0, 0.5]), DiagonalValues::default());
        let n = h.norms();
        assert!((n.h0 - 0.5).abs() < 1e-12 && (n.h1 - 1.0).abs() < 1e-12 && (n.h2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn declared_norms_must_dominate() {
        let doc = r#"{"htilde":{"kind":"poly","coeffs":[0,2]},"sup_norms":{"h0":2,"h1":1,"h2":0}}"#;
        assert!(matches!(parse_potential(doc), Err(Error::Invariant { .. })));
        let ok = r#"{"htilde":{"kind":"poly","coeffs":[0,2]},"sup_norms":{"h0":2,"h1":2.5,"h2":0}}"#;
        assert_eq!(parse_potential(ok).unwrap().norms().h1, 2.5);
    }

    #[test]
    fn trace_includes_atoms() {
        let law = ProjectionPairLaw::free_pair(0.6, 0.3).unwrap();
        let diag = DiagonalValues {
            h11_0: 1.0,
            h22_0: 2.0,
            h11_1: 3.0,
            h22_1: 4.0,
        };
        let h = PotentialSpec::polynomial(Polynomial::new(vec![1.0]), diag);
        let grid = law.grid(1024);
        // a10 = 0.3, a00 = 0.1, ν-mass 0.6
        let expected = 0.3 * 1.0 + 0.1 * 4.0 + 0.5 * 0.6;
        assert!((h.trace_against(&law, &grid).unwrap() - expected).abs() < 1e-10);
    }
}
