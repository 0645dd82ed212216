//! Quadrature grids on subintervals of (0,1).
//!
//! The workhorse is [`Rule::ChebyshevAngle`]: the interval `[lo, hi]` is
//! parametrised by `x = lo + (hi - lo) sin²(θ/2)`, `θ ∈ [0, π]`, and the angle
//! is integrated with composite Gauss–Legendre panels that are geometrically
//! graded towards both ends. Inverse square-root edges become smooth in the
//! angle, and logarithmic edge singularities are absorbed by the grading.

use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Panel order of every composite rule.
pub const PANEL_ORDER: usize = 16;

/// Width of the innermost graded panel, in the integration variable.
const GRADING_FLOOR: f64 = 1e-12;

/// Geometric ratio between consecutive edge panels of composite rules.
const GRADING_RATIO: f64 = 0.15;

/// Number of graded panels at each edge of a composite rule.
const EDGE_LEVELS: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rule {
    /// Gauss–Legendre panels in the Chebyshev angle.
    ChebyshevAngle,
    /// Gauss–Legendre panels directly in `x`, graded at both ends.
    GaussLegendre,
}

/// Nodes and weights on `[lo, hi] ⊆ [0, 1]`.
///
/// Alongside the nodes the grid stores the edge gaps `x - lo`, `hi - x` and
/// the complement `1 - x`, all computed without cancellation, so integrands
/// with edge singularities can be evaluated accurately at nodes that sit
/// within `1e-18` of an endpoint.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    rule: Rule,
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    gap_lo: Vec<f64>,
    gap_hi: Vec<f64>,
    complement: Vec<f64>,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

/// Panel breakpoints on `[0, span/2]`: uniform panels, refined dyadically
/// towards zero down to `GRADING_FLOOR`. The full grid is the mirror image.
fn half_breakpoints(span: f64, target_nodes: usize) -> Vec<f64> {
    let levels_guess = 40;
    let half_panels = ((target_nodes / PANEL_ORDER).saturating_sub(2 * levels_guess) / 2).max(4);
    let h = span / (2 * half_panels) as f64;
    let levels = ((h / GRADING_FLOOR).log2().ceil().max(1.0)) as usize;
    let mut pts = vec![0.0];
    for j in (0..levels).rev() {
        pts.push(h / 2f64.powi(j as i32 + 1));
    }
    for p in 1..=half_panels {
        pts.push(p as f64 * h);
    }
    pts
}

/// Runs `emit(gap_lo, gap_hi, weight)` over the left half of a symmetric
/// rule, then over its mirror image, so nodes come out in increasing order.
fn symmetric_nodes<F>(breaks: &[f64], mut node: F) -> Vec<(f64, f64, f64)>
where
    F: FnMut(f64, f64) -> (f64, f64, f64),
{
    let (gx, gw) = panel_rule();
    let mut left = Vec::with_capacity(breaks.len() * PANEL_ORDER);
    for pair in breaks.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        for (z, w) in gx.iter().zip(gw) {
            left.push(node(mid + half * z, w * half));
        }
    }
    let mirrored: Vec<_> = left.iter().rev().map(|&(gl, gh, w)| (gh, gl, w)).collect();
    left.extend(mirrored);
    left
}

impl QuadratureGrid {
    /// Chebyshev-angle grid on `[lo, hi]` with roughly `n` nodes.
    pub fn chebyshev_angle(lo: f64, hi: f64, n: usize) -> Result<Self> {
        check_interval(lo, hi)?;
        let len = hi - lo;
        let breaks = half_breakpoints(PI, n);
        let nodes = symmetric_nodes(&breaks, |theta, w| {
            let s = (0.5 * theta).sin();
            let c = (0.5 * theta).cos();
            (len * s * s, len * c * c, w * 0.5 * len * theta.sin())
        });
        Ok(Self::from_nodes(Rule::ChebyshevAngle, lo, hi, nodes))
    }

    /// Graded composite Gauss–Legendre grid on `[lo, hi]` in the variable `x`.
    pub fn gauss_legendre(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::composite(lo, hi, &[], n)
    }

    /// Composite Gauss–Legendre grid whose panels respect the given interior
    /// breakpoints. The first and last cells are graded geometrically towards
    /// `lo` and `hi`; every other cell is split into equal panels.
    pub fn composite(lo: f64, hi: f64, breaks: &[f64], n: usize) -> Result<Self> {
        check_interval(lo, hi)?;
        let len = hi - lo;
        let mut cuts: Vec<f64> = vec![0.0];
        if breaks.is_empty() {
            let panels = (n / PANEL_ORDER).saturating_sub(2 * EDGE_LEVELS).max(4);
            cuts.extend((1..panels).map(|j| len * j as f64 / panels as f64));
        } else {
            if breaks.iter().any(|&b| !(b > lo && b < hi)) || breaks.windows(2).any(|p| p[0] >= p[1]) {
                return Err(Error::InvalidArgument(
                    "composite breakpoints must increase strictly inside the interval".into(),
                ));
            }
            let cells = breaks.len() - 1;
            let per_cell = if cells == 0 {
                0
            } else {
                ((n / PANEL_ORDER).saturating_sub(2 * EDGE_LEVELS) / cells).max(1)
            };
            cuts.push(breaks[0] - lo);
            for w in breaks.windows(2) {
                for j in 1..=per_cell {
                    cuts.push((w[0] - lo) + (w[1] - w[0]) * j as f64 / per_cell as f64);
                }
            }
        }
        cuts.push(len);
        let (gx, gw) = panel_rule();
        let mut raw = Vec::new();
        let emit = |a: f64, b: f64, from_hi: bool, raw: &mut Vec<(f64, f64, f64)>| {
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (z, w) in gx.iter().zip(gw) {
                let off = mid + half * z;
                if from_hi {
                    raw.push((len - off, off, w * half));
                } else {
                    raw.push((off, len - off, w * half));
                }
            }
        };
        // left edge cell graded towards lo
        let first = cuts[1];
        let mut g = vec![first];
        while *g.last().unwrap() > first * GRADING_FLOOR.powi(2) {
            let next = g.last().unwrap() * GRADING_RATIO;
            g.push(next);
        }
        g.push(0.0);
        g.reverse();
        for w in g.windows(2) {
            emit(w[0], w[1], false, &mut raw);
        }
        for w in cuts[1..cuts.len() - 1].windows(2) {
            emit(w[0], w[1], false, &mut raw);
        }
        // right edge cell graded towards hi, emitted in increasing x
        let last = len - cuts[cuts.len() - 2];
        let mut g = vec![last];
        while *g.last().unwrap() > last * GRADING_FLOOR.powi(2) {
            let next = g.last().unwrap() * GRADING_RATIO;
            g.push(next);
        }
        g.push(0.0);
        for w in g.windows(2) {
            let start = raw.len();
            emit(w[1], w[0], true, &mut raw);
            raw[start..].reverse();
        }
        Ok(Self::from_nodes(Rule::GaussLegendre, lo, hi, raw))
    }

    /// Default grid on the unit interval.
    pub fn unit(n: usize) -> Self {
        Self::chebyshev_angle(0.0, 1.0, n).expect("unit interval is valid")
    }

    fn from_nodes(rule: Rule, lo: f64, hi: f64, raw: Vec<(f64, f64, f64)>) -> Self {
        let mut grid = Self {
            rule,
            lo,
            hi,
            nodes: Vec::with_capacity(raw.len()),
            weights: Vec::with_capacity(raw.len()),
            gap_lo: Vec::with_capacity(raw.len()),
            gap_hi: Vec::with_capacity(raw.len()),
            complement: Vec::with_capacity(raw.len()),
        };
        for (gl, gh, w) in raw {
            let x = if gl <= gh { lo + gl } else { hi - gh };
            grid.nodes.push(x);
            grid.weights.push(w);
            grid.gap_lo.push(gl);
            grid.gap_hi.push(gh);
            grid.complement.push((1.0 - hi) + gh);
        }
        grid
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `x_i - lo` for every node.
    pub fn gaps_lo(&self) -> &[f64] {
        &self.gap_lo
    }

    /// `hi - x_i` for every node.
    pub fn gaps_hi(&self) -> &[f64] {
        &self.gap_hi
    }

    /// `1 - x_i` for every node.
    pub fn complements(&self) -> &[f64] {
        &self.complement
    }

    /// `x_i - x_k`, evaluated from whichever edge both nodes are closest to.
    #[inline]
    pub fn diff(&self, i: usize, k: usize) -> f64 {
        let (li, lk) = (self.gap_lo[i], self.gap_lo[k]);
        let (hi, hk) = (self.gap_hi[i], self.gap_hi[k]);
        if li <= hi && lk <= hk {
            li - lk
        } else if li > hi && lk > hk {
            hk - hi
        } else {
            self.nodes[i] - self.nodes[k]
        }
    }

    /// `x_i - y` for an arbitrary point `y` given with its own gaps.
    #[inline]
    pub fn diff_point(&self, i: usize, y_gap_lo: f64, y_gap_hi: f64) -> f64 {
        let (li, hi) = (self.gap_lo[i], self.gap_hi[i]);
        if li <= hi && y_gap_lo <= y_gap_hi {
            li - y_gap_lo
        } else {
            y_gap_hi - hi
        }
    }

    /// `∑ w_i g(x_i)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }

    /// `∑ w_i v_i` for values already tabulated on the nodes.
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// True when the grid lives on `[lo, hi]` up to rounding.
    pub fn matches(&self, lo: f64, hi: f64) -> bool {
        (self.lo - lo).abs() <= 1e-13 && (self.hi - hi).abs() <= 1e-13
    }
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(0.0..1.0).contains(&lo) || !(hi > lo && hi <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quadrature interval [{lo}, {hi}] must satisfy 0 <= lo < hi <= 1"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(16);
        for deg in 0..32 {
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            assert!((q - exact).abs() < 1e-14, "degree {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn unit_mass_is_reproduced() {
        for n in [256, 2048, 4096] {
            for grid in [
                QuadratureGrid::unit(n),
                QuadratureGrid::gauss_legendre(0.0, 1.0, n).unwrap(),
            ] {
                let total: f64 = grid.weights().iter().sum();
                assert!((total - 1.0).abs() < 1e-12, "{:?} n={n}: {total}", grid.rule());
                assert!(grid.nodes().windows(2).all(|p| p[0] <= p[1]));
                assert!(grid.gaps_lo().windows(2).all(|p| p[0] <= p[1]) && grid.gaps_lo()[0] > 0.0);
                assert!(grid.gaps_hi().windows(2).all(|p| p[0] >= p[1]) && grid.gaps_hi()[grid.len() - 1] > 0.0);
                assert!(grid.weights().iter().all(|&w| w > 0.0));
            }
        }
    }

    #[test]
    fn log_singularities_are_resolved() {
        let grid = QuadratureGrid::unit(2048);
        let lx: f64 = grid
            .gaps_lo()
            .iter()
            .zip(grid.weights())
            .map(|(g, w)| w * g.ln())
            .sum();
        assert!((lx + 1.0).abs() < 1e-12, "{lx}");
        let arcsine: f64 = grid
            .gaps_lo()
            .iter()
            .zip(grid.gaps_hi())
            .zip(grid.weights())
            .map(|((a, b), w)| w * a.ln() / (PI * (a * b).sqrt()))
            .sum();
        assert!((arcsine + 2.0 * 2f64.ln()).abs() < 1e-12, "{arcsine}");
    }

    #[test]
    fn subinterval_gaps_are_consistent() {
        let grid = QuadratureGrid::chebyshev_angle(0.2, 0.7, 512).unwrap();
        for i in 0..grid.len() {
            let x = grid.nodes()[i];
            assert!((x - 0.2 - grid.gaps_lo()[i]).abs() < 1e-15);
            assert!((0.7 - x - grid.gaps_hi()[i]).abs() < 1e-15);
            assert!((1.0 - x - grid.complements()[i]).abs() < 1e-15);
        }
        assert!((grid.weights().iter().sum::<f64>() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(QuadratureGrid::chebyshev_angle(0.5, 0.5, 64).is_err());
        assert!(QuadratureGrid::chebyshev_angle(-0.1, 0.5, 64).is_err());
    }
}
