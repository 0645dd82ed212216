//! Principal-value Hilbert transform, mutual free Fisher information, and
//! log-Sobolev margins.

use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{chi_proj, relative_sigma_h_with, EquilibriumOptions, PotentialSpec};
use crate::error::{Error, Result};
use crate::measure::{DensitySpec, EdgeClass, ProjectionPairLaw, QuadratureGrid};
use crate::report::{ext_real, ext_real_opt};

/// `(Hf)(x_i) = PV ∫ f(t)/(x_i - t) dt` at every grid node.
pub fn hilbert_transform(density: &DensitySpec, grid: &QuadratureGrid) -> Result<Vec<f64>> {
    if density.is_zero() {
        return Ok(vec![0.0; grid.len()]);
    }
    let tab = density.tabulate(grid)?;
    let class = density.class();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let ui = tab.u[i];
            let mut acc = -tab.measure[i] * tab.du[i];
            for k in 0..grid.len() {
                if k != i {
                    acc += tab.measure[k] * (tab.u[k] - ui) / grid.diff(i, k);
                }
            }
            match class {
                EdgeClass::InverseSqrt => acc,
                EdgeClass::Regular => acc + ui * (grid.gaps_lo()[i] / grid.gaps_hi()[i]).ln(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Serialize)]
pub struct FisherReport {
    #[serde(skip)]
    pub nodes: Vec<f64>,
    #[serde(skip)]
    pub phi: Vec<f64>,
    #[serde(serialize_with = "ext_real")]
    pub phi_star: f64,
    pub integrability_ok: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub divergences: Vec<String>,
}

/// `φ(x_i) = Hf(x_i) + A/x_i - B/(1-x_i)`.
pub fn phi_values(law: &ProjectionPairLaw, grid: &QuadratureGrid) -> Result<Vec<f64>> {
    let hf = hilbert_transform(law.density(), grid)?;
    let (a, b) = (law.atoms().coeff_zero(), law.atoms().coeff_one());
    Ok(hf
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let mut v = *h;
            if a > 0.0 {
                v += a / grid.nodes()[i];
            }
            if b > 0.0 {
                v -= b / grid.complements()[i];
            }
            v
        })
        .collect())
}

fn drift_norm(law: &ProjectionPairLaw, grid: &QuadratureGrid, shift: impl Fn(f64) -> f64) -> Result<FisherReport> {
    let integ = law.check_integrability();
    if !integ.ok() {
        return Ok(FisherReport {
            nodes: vec![],
            phi: vec![],
            phi_star: f64::INFINITY,
            integrability_ok: false,
            divergences: integ.divergences,
        });
    }
    let phi = phi_values(law, grid)?;
    let density = law.density();
    let value = if density.is_zero() {
        0.0
    } else {
        let tab = density.tabulate(grid)?;
        (0..grid.len())
            .map(|i| {
                let d = phi[i] - shift(grid.nodes()[i]);
                tab.measure[i] * tab.u[i] * d * d * grid.nodes()[i] * grid.complements()[i]
            })
            .sum()
    };
    if !value.is_finite() {
        return Err(Error::Numerical("Fisher information quadrature is not finite".into()));
    }
    Ok(FisherReport {
        nodes: grid.nodes().to_vec(),
        phi,
        phi_star: value,
        integrability_ok: true,
        divergences: vec![],
    })
}

/// `φ* = ∫ φ² x(1-x) dν`; `+∞` when the integrability conditions fail.
pub fn phi_star(law: &ProjectionPairLaw, grid: &QuadratureGrid) -> Result<FisherReport> {
    drift_norm(law, grid, |_| 0.0)
}

/// `Φ_h = ∫ (φ - h̃')² x(1-x) dν`.
pub fn relative_phi_h(law: &ProjectionPairLaw, h: &PotentialSpec, grid: &QuadratureGrid) -> Result<f64> {
    if h.smoothness() < crate::entropy::Smoothness::C1 {
        return Err(Error::InvalidArgument("relative Fisher information needs a C¹ tilt".into()));
    }
    Ok(drift_norm(law, grid, |x| h.d1(x))?.phi_star)
}

#[derive(Debug, Clone, Serialize)]
pub struct RelativeLsi {
    #[serde(serialize_with = "ext_real")]
    pub sigma_tilde: f64,
    #[serde(serialize_with = "ext_real")]
    pub phi_h: f64,
    pub b_h: f64,
    pub tau_h: f64,
    pub c1: f64,
    pub c2: f64,
    pub sup_h: f64,
    pub sup_dh: f64,
    pub sup_d2h: f64,
    /// `c₁‖h̃'‖ + c₂‖h̃''‖`, the quantity that enters the factor.
    pub smallness: f64,
    /// `c₁‖h̃‖ + c₂‖h̃''‖`, the same with the undifferentiated tilt.
    pub smallness_undifferentiated: f64,
    #[serde(serialize_with = "ext_real")]
    pub factor: f64,
    #[serde(serialize_with = "ext_real")]
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LsiReport {
    #[serde(serialize_with = "ext_real")]
    pub chi: f64,
    #[serde(serialize_with = "ext_real")]
    pub phi_star: f64,
    /// `φ* + χ`.
    #[serde(serialize_with = "ext_real")]
    pub margin: f64,
    /// The entropy is `-∞`, so the inequality holds trivially.
    pub vacuous: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative: Option<RelativeLsi>,
    #[serde(serialize_with = "ext_real_opt", skip_serializing_if = "Option::is_none")]
    pub equilibrium_objective: Option<f64>,
}

/// `-χ ≤ φ*` and, with a tilt, `Σ̃_h ≤ Φ_h / (1 - c₁‖h̃'‖ - c₂‖h̃''‖)`.
pub fn check_lsi(
    law: &ProjectionPairLaw,
    h: Option<&PotentialSpec>,
    c1: f64,
    c2: f64,
    grid: &QuadratureGrid,
) -> Result<LsiReport> {
    let chi = chi_proj(law, grid)?.chi;
    let fisher = phi_star(law, grid)?;
    let vacuous = chi == f64::NEG_INFINITY;
    let margin = if vacuous { f64::INFINITY } else { fisher.phi_star + chi };
    let mut report = LsiReport {
        chi,
        phi_star: fisher.phi_star,
        margin,
        vacuous,
        relative: None,
        equilibrium_objective: None,
    };
    if let Some(h) = h {
        let norms = h.norms();
        let smallness = c1 * norms.h1 + c2 * norms.h2;
        if !(smallness < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "tilt too large: c1*|h'| + c2*|h''| = {smallness} must be < 1"
            )));
        }
        let eq = crate::entropy::equilibrium_solve(law.alpha(), law.beta(), h, &EquilibriumOptions::default())?;
        let rel = relative_sigma_h_with(law, h, grid, eq.b_h)?;
        let phi_h = relative_phi_h(law, h, grid)?;
        let factor = 1.0 / (1.0 - smallness);
        let margin = if rel.sigma_tilde == f64::INFINITY {
            f64::NEG_INFINITY
        } else {
            factor * phi_h - rel.sigma_tilde
        };
        report.equilibrium_objective = Some(eq.objective);
        report.relative = Some(RelativeLsi {
            sigma_tilde: rel.sigma_tilde,
            phi_h,
            b_h: eq.b_h,
            tau_h: rel.tau_h,
            c1,
            c2,
            sup_h: norms.h0,
            sup_dh: norms.h1,
            sup_d2h: norms.h2,
            smallness,
            smallness_undifferentiated: c1 * norms.h0 + c2 * norms.h2,
            factor,
            margin,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{weighted_norm, weighted_norm_values, Atoms, Point};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn semicircle() -> DensitySpec {
        DensitySpec::custom(
            "semicircle",
            0.0,
            1.0,
            EdgeClass::InverseSqrt,
            (0.5, 0.5),
            Arc::new(|p: Point| (8.0 / PI * p.gap_lo * p.gap_hi, 8.0 / PI * (p.gap_hi - p.gap_lo))),
        )
        .unwrap()
    }

    #[test]
    fn arcsine_transform_vanishes() {
        let d = DensitySpec::arcsine(1.0);
        let g = d.grid(4096);
        let hf = hilbert_transform(&d, &g).unwrap();
        let sup = hf.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(sup < 1e-8, "{sup}");
    }

    #[test]
    fn semicircle_transform_is_affine() {
        let d = semicircle();
        assert!((d.mass() - 1.0).abs() < 1e-12);
        let g = d.grid(4096);
        let hf = hilbert_transform(&d, &g).unwrap();
        let err = hf
            .iter()
            .zip(g.nodes())
            .map(|(h, x)| (h - (8.0 * x - 4.0)).abs())
            .fold(0.0, f64::max);
        assert!(err / 4.0 < 1e-6, "{err}");
    }

    #[test]
    fn constant_density_transform_is_logit() {
        let d = DensitySpec::uniform(1.0);
        let g = d.grid(1024);
        let hf = hilbert_transform(&d, &g).unwrap();
        for i in (0..g.len()).step_by(37) {
            let exact = (g.gaps_lo()[i] / g.gaps_hi()[i]).ln();
            assert!((hf[i] - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn fisher_information_values() {
        let free = ProjectionPairLaw::free_pair(0.5, 0.5).unwrap();
        assert!(phi_star(&free, &free.grid(2048)).unwrap().phi_star < 1e-12);
        let uni = ProjectionPairLaw::new(0.5, 0.5, Atoms::default(), DensitySpec::uniform(1.0)).unwrap();
        let v = phi_star(&uni, &uni.grid(2048)).unwrap().phi_star;
        assert!((v - (PI * PI / 18.0 - 1.0 / 3.0)).abs() < 1e-9, "{v}");
        let empty = ProjectionPairLaw::free_pair(1.0, 0.5).unwrap();
        assert_eq!(phi_star(&empty, &QuadratureGrid::unit(64)).unwrap().phi_star, 0.0);
    }

    #[test]
    fn lsi_margins() {
        let uni = ProjectionPairLaw::new(0.5, 0.5, Atoms::default(), DensitySpec::uniform(1.0)).unwrap();
        let r = check_lsi(&uni, None, 1.0, 1.0, &uni.grid(2048)).unwrap();
        let exact = PI * PI / 18.0 - 1.0 / 3.0 - 0.375 + std::f64::consts::LN_2 / 2.0;
        assert!((r.margin - exact).abs() < 1e-8, "{}", r.margin);
        let free = ProjectionPairLaw::free_pair(0.3, 0.6).unwrap();
        let r = check_lsi(&free, None, 1.0, 1.0, &free.grid(2048)).unwrap();
        assert!(r.margin.abs() < 2e-6);
        let atoms = Atoms {
            a11: 0.1,
            a00: 0.1,
            ..Atoms::default()
        };
        let bad = ProjectionPairLaw::new(0.5, 0.5, atoms, DensitySpec::uniform(0.8)).unwrap();
        assert!(check_lsi(&bad, None, 1.0, 1.0, &bad.grid(256)).unwrap().vacuous);
    }

    #[test]
    fn transform_is_linear() {
        let g = QuadratureGrid::unit(1024);
        let a = DensitySpec::arcsine(1.0);
        let s = semicircle();
        let both = DensitySpec::custom(
            "mix",
            0.0,
            1.0,
            EdgeClass::InverseSqrt,
            (-0.5, -0.5),
            Arc::new(|p: Point| {
                (
                    2.0 / PI + 3.0 * 8.0 / PI * p.gap_lo * p.gap_hi,
                    3.0 * 8.0 / PI * (p.gap_hi - p.gap_lo),
                )
            }),
        )
        .unwrap();
        let (ha, hs, hb) = (
            hilbert_transform(&a, &g).unwrap(),
            hilbert_transform(&s, &g).unwrap(),
            hilbert_transform(&both, &g).unwrap(),
        );
        // rounding in u_k - u_i is amplified by 1/|x_i - x_k| at nodes pinned to the edges
        for i in (0..g.len()).filter(|&i| g.gaps_lo()[i].min(g.gaps_hi()[i]) > 1e-8) {
            let diff = (hb[i] - 2.0 * ha[i] - 3.0 * hs[i]).abs();
            assert!(diff < 1e-10 * (1.0 + hb[i].abs()), "{i}: {diff} at {}", g.nodes()[i]);
        }
    }

    #[test]
    fn weighted_riesz_sanity() {
        let g = QuadratureGrid::unit(2048);
        let d = DensitySpec::uniform(1.0);
        let hf = hilbert_transform(&d, &g).unwrap();
        let ratio = weighted_norm_values(&hf, 3.0, &g).unwrap() / weighted_norm(&d, 3.0, &g).unwrap();
        assert!(ratio.is_finite() && ratio < 10.0);
    }
}
