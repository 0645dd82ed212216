//! Densities of the absolutely continuous part `ν` of a two-projection law.
//!
//! Every density is stored in reduced form `f = W·u` on its support
//! `[lo, hi]`, where the edge weight `W` is either `((x-lo)(hi-x))^{-1/2}`
//! ([`EdgeClass::InverseSqrt`]) or `1` ([`EdgeClass::Regular`]) and `u` is
//! smooth on the closed support for the analytic kinds. Singular integrals
//! against `f` subtract `u(x)` and use the exact transforms of `W`.

use serde::Serialize;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::quadrature::{gauss_legendre, QuadratureGrid};
use crate::error::{Error, Result};

/// Default node count used when a density needs an internal grid.
pub const DEFAULT_GRID: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeClass {
    InverseSqrt,
    Regular,
}

/// A point of the support together with its distances to the edges and to 1.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub x: f64,
    pub gap_lo: f64,
    pub gap_hi: f64,
    pub complement: f64,
}

impl Point {
    pub fn new(x: f64, lo: f64, hi: f64) -> Self {
        Self {
            x,
            gap_lo: x - lo,
            gap_hi: hi - x,
            complement: 1.0 - x,
        }
    }

    pub fn on_grid(grid: &QuadratureGrid, i: usize) -> Self {
        Self {
            x: grid.nodes()[i],
            gap_lo: grid.gaps_lo()[i],
            gap_hi: grid.gaps_hi()[i],
            complement: grid.complements()[i],
        }
    }
}

/// Reduced density `x ↦ (u(x), u'(x))` for user-built densities.
pub type ReducedFn = Arc<dyn Fn(Point) -> (f64, f64) + Send + Sync>;

/// Piecewise-cubic (monotone Hermite) table with power-law edge extensions.
#[derive(Debug, Clone, Serialize)]
pub struct TableDensity {
    pub nodes: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(skip)]
    slopes: Vec<f64>,
    pub edge_exponents: (f64, f64),
}

impl TableDensity {
    pub fn new(nodes: Vec<f64>, values: Vec<f64>, edge_exponents: (f64, f64)) -> Result<Self> {
        if nodes.len() < 2 || nodes.len() != values.len() {
            return Err(Error::Malformed(
                "table density needs at least two nodes and one value per node".into(),
            ));
        }
        if nodes.iter().any(|&x| !(x > 0.0 && x < 1.0)) || nodes.windows(2).any(|p| p[0] >= p[1]) {
            return Err(Error::Malformed(
                "table nodes must be strictly increasing inside (0,1)".into(),
            ));
        }
        if values.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::Invariant {
                equation: "density values >= 0",
                detail: "table contains a negative or non-finite value".into(),
            });
        }
        let (a, b) = edge_exponents;
        if !(a > -1.0 && b > -1.0) {
            return Err(Error::Invariant {
                equation: "edge exponents > -1",
                detail: format!("edge exponents ({a}, {b}) make the mass infinite"),
            });
        }
        let slopes = pchip_slopes(&nodes, &values);
        Ok(Self {
            nodes,
            values,
            slopes,
            edge_exponents,
        })
    }

    /// `(f(x), f'(x))`.
    pub fn eval(&self, p: Point) -> (f64, f64) {
        let n = self.nodes.len();
        let (a, b) = self.edge_exponents;
        let (x0, xn) = (self.nodes[0], self.nodes[n - 1]);
        if p.x <= x0 {
            let v = self.values[0];
            let r = p.x / x0;
            let f = v * r.powf(a);
            return (f, if p.x > 0.0 { a * f / p.x } else { 0.0 });
        }
        if p.x >= xn {
            let v = self.values[n - 1];
            let r = p.complement / (1.0 - xn);
            let f = v * r.powf(b);
            return (f, if p.complement > 0.0 { -b * f / p.complement } else { 0.0 });
        }
        let j = self.nodes.partition_point(|&t| t <= p.x).saturating_sub(1).min(n - 2);
        let (xa, xb) = (self.nodes[j], self.nodes[j + 1]);
        let h = xb - xa;
        let t = (p.x - xa) / h;
        let (ya, yb, da, db) = (self.values[j], self.values[j + 1], self.slopes[j], self.slopes[j + 1]);
        let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
        let h10 = t * (1.0 - t) * (1.0 - t);
        let h01 = t * t * (3.0 - 2.0 * t);
        let h11 = t * t * (t - 1.0);
        let f = h00 * ya + h10 * h * da + h01 * yb + h11 * h * db;
        let d = (6.0 * t * t - 6.0 * t) / h * (ya - yb)
            + (3.0 * t * t - 4.0 * t + 1.0) * da
            + (3.0 * t * t - 2.0 * t) * db;
        (f.max(0.0), d)
    }

    /// Exact integral of the interpolant and its edge extensions.
    pub fn integral(&self) -> f64 {
        let n = self.nodes.len();
        let (a, b) = self.edge_exponents;
        let left = self.nodes[0] * self.values[0] / (a + 1.0);
        let right = (1.0 - self.nodes[n - 1]) * self.values[n - 1] / (b + 1.0);
        let inner: f64 = (0..n - 1)
            .map(|j| {
                let h = self.nodes[j + 1] - self.nodes[j];
                h * (self.values[j] + self.values[j + 1]) / 2.0
                    + h * h * (self.slopes[j] - self.slopes[j + 1]) / 12.0
            })
            .sum();
        left + inner + right
    }
}

/// Fritsch–Carlson slopes; keeps the interpolant nonnegative on nonnegative data.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let delta: Vec<f64> = (0..n - 1).map(|j| (y[j + 1] - y[j]) / (x[j + 1] - x[j])).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for j in 1..n - 1 {
        if delta[j - 1] * delta[j] > 0.0 {
            let (h0, h1) = (x[j] - x[j - 1], x[j + 1] - x[j]);
            let (w1, w2) = (2.0 * h1 + h0, h1 + 2.0 * h0);
            d[j] = (w1 + w2) / (w1 / delta[j - 1] + w2 / delta[j]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if s.signum() != d0.signum() {
            0.0
        } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            s
        }
    };
    d[0] = end(x[1] - x[0], x[2] - x[1], delta[0], delta[1]);
    d[n - 1] = end(x[n - 1] - x[n - 2], x[n - 2] - x[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Chebyshev series `u(s) = ∑ c_k T_k(s)` with `s = (2x - lo - hi)/(hi - lo)`.
#[derive(Debug, Clone, Serialize)]
pub struct ChebyshevSeries {
    pub coeffs: Vec<f64>,
    #[serde(skip)]
    deriv: Vec<f64>,
}

impl ChebyshevSeries {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let deriv = chebyshev_derivative(&coeffs);
        Self { coeffs, deriv }
    }

    pub fn eval(&self, s: f64) -> f64 {
        clenshaw(&self.coeffs, s)
    }

    /// `du/ds`.
    pub fn eval_derivative(&self, s: f64) -> f64 {
        clenshaw(&self.deriv, s)
    }
}

pub(crate) fn clenshaw(c: &[f64], s: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * s * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    match c.first() {
        Some(&c0) => s * b1 - b2 + c0,
        None => 0.0,
    }
}

fn chebyshev_derivative(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    if n <= 1 {
        return vec![0.0];
    }
    let mut d = vec![0.0; n + 1];
    for k in (0..n - 1).rev() {
        d[k] = d[k + 2] + 2.0 * (k + 1) as f64 * c[k + 1];
    }
    d[0] *= 0.5;
    d.truncate(n - 1);
    d
}

#[derive(Clone)]
pub enum DensityKind {
    Arcsine,
    Uniform,
    FreePair { alpha: f64, beta: f64 },
    Table(TableDensity),
    Chebyshev(ChebyshevSeries),
    Custom { label: String, reduced: ReducedFn },
    Zero,
}

impl fmt::Debug for DensityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityKind::Arcsine => write!(f, "Arcsine"),
            DensityKind::Uniform => write!(f, "Uniform"),
            DensityKind::FreePair { alpha, beta } => write!(f, "FreePair({alpha}, {beta})"),
            DensityKind::Table(t) => write!(f, "Table({} nodes)", t.nodes.len()),
            DensityKind::Chebyshev(c) => write!(f, "Chebyshev({} terms)", c.coeffs.len()),
            DensityKind::Custom { label, .. } => write!(f, "Custom({label})"),
            DensityKind::Zero => write!(f, "Zero"),
        }
    }
}

impl DensityKind {
    pub fn name(&self) -> &str {
        match self {
            DensityKind::Arcsine => "arcsine",
            DensityKind::Uniform => "uniform",
            DensityKind::FreePair { .. } => "free-pair",
            DensityKind::Table(_) => "table",
            DensityKind::Chebyshev(_) => "chebyshev",
            DensityKind::Custom { label, .. } => label,
            DensityKind::Zero => "zero",
        }
    }
}

/// The density `f = dν/dx` of the absolutely continuous part of a law.
#[derive(Debug, Clone)]
pub struct DensitySpec {
    kind: DensityKind,
    lo: f64,
    hi: f64,
    class: EdgeClass,
    scale: f64,
    mass: f64,
    edge_exponents: (f64, f64),
}

/// Support endpoints `r∓` of the free-pair density.
pub fn free_pair_support(alpha: f64, beta: f64) -> (f64, f64) {
    let u = (alpha * (1.0 - beta)).sqrt();
    let v = (beta * (1.0 - alpha)).sqrt();
    let snap = |r: f64, target: f64| if (r - target).abs() < 1e-14 { target } else { r };
    let lo = snap((u - v) * (u - v), 0.0).max(0.0);
    let hi = snap((u + v) * (u + v), 1.0).min(1.0);
    (lo, hi)
}

impl DensitySpec {
    /// `m / (π √(x(1-x)))` on (0,1).
    pub fn arcsine(mass: f64) -> Self {
        Self::analytic(DensityKind::Arcsine, 0.0, 1.0, EdgeClass::InverseSqrt, mass, (-0.5, -0.5))
    }

    /// Constant density `m` on (0,1).
    pub fn uniform(mass: f64) -> Self {
        Self::analytic(DensityKind::Uniform, 0.0, 1.0, EdgeClass::Regular, mass, (0.0, 0.0))
    }

    /// `√((r₊-x)(x-r₋)) / (π x(1-x))` on `[r₋, r₊]`; its mass is `2ρ`.
    pub fn free_pair(alpha: f64, beta: f64) -> Self {
        let rho = alpha.min(beta).min(1.0 - alpha).min(1.0 - beta);
        if !(rho > 0.0) {
            return Self::zero();
        }
        let (lo, hi) = free_pair_support(alpha, beta);
        // square-root vanishing at interior edges, inverse square root at 0 or 1
        let edge = |touches: bool| if touches { -0.5 } else { 0.5 };
        Self::analytic(
            DensityKind::FreePair { alpha, beta },
            lo,
            hi,
            EdgeClass::InverseSqrt,
            2.0 * rho,
            (edge(lo == 0.0), edge(hi == 1.0)),
        )
    }

    /// The zero measure.
    pub fn zero() -> Self {
        Self {
            kind: DensityKind::Zero,
            lo: 0.0,
            hi: 1.0,
            class: EdgeClass::Regular,
            scale: 0.0,
            mass: 0.0,
            edge_exponents: (0.0, 0.0),
        }
    }

    /// Tabulated density on (0,1); mass is the exact integral of the interpolant.
    pub fn table(table: TableDensity) -> Self {
        let mass = table.integral();
        let exps = table.edge_exponents;
        Self {
            kind: DensityKind::Table(table),
            lo: 0.0,
            hi: 1.0,
            class: EdgeClass::Regular,
            scale: 1.0,
            mass,
            edge_exponents: exps,
        }
    }

    /// `((x-lo)(hi-x))^{-1/2} ∑ c_k T_k(s)`; mass `π c₀`.
    pub fn chebyshev(lo: f64, hi: f64, coeffs: Vec<f64>) -> Result<Self> {
        QuadratureGrid::chebyshev_angle(lo, hi, 16)?;
        let series = ChebyshevSeries::new(coeffs);
        let tol = 1e-10 * series.coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
        let edge = |s: f64| if series.eval(s).abs() <= tol { 0.5 } else { -0.5 };
        let exps = (edge(-1.0), edge(1.0));
        let mass = PI * series.coeffs.first().copied().unwrap_or(0.0);
        Ok(Self {
            kind: DensityKind::Chebyshev(series),
            lo,
            hi,
            class: EdgeClass::InverseSqrt,
            scale: 1.0,
            mass,
            edge_exponents: exps,
        })
    }

    /// Density given by a reduced function `u` (and `u'`) on `[lo, hi]`.
    ///
    /// `edge_exponents` give the power laws `f ~ (x-lo)^a` and `f ~ (hi-x)^b`
    /// at the two ends of the support. The mass is computed by quadrature.
    pub fn custom(
        label: &str,
        lo: f64,
        hi: f64,
        class: EdgeClass,
        edge_exponents: (f64, f64),
        reduced: ReducedFn,
    ) -> Result<Self> {
        let mut d = Self {
            kind: DensityKind::Custom {
                label: label.to_string(),
                reduced,
            },
            lo,
            hi,
            class,
            scale: 1.0,
            mass: 1.0,
            edge_exponents,
        };
        let grid = QuadratureGrid::chebyshev_angle(lo, hi, 4 * DEFAULT_GRID)?;
        d.mass = d.integrate(&grid, |_| 1.0)?;
        if !(d.mass >= 0.0) || !d.mass.is_finite() {
            return Err(Error::Invariant {
                equation: "density mass >= 0",
                detail: format!("custom density has mass {}", d.mass),
            });
        }
        Ok(d)
    }

    fn analytic(kind: DensityKind, lo: f64, hi: f64, class: EdgeClass, mass: f64, exps: (f64, f64)) -> Self {
        let base = match kind {
            DensityKind::FreePair { alpha, beta } => {
                2.0 * alpha.min(beta).min(1.0 - alpha).min(1.0 - beta)
            }
            _ => 1.0,
        };
        Self {
            kind,
            lo,
            hi,
            class,
            scale: if base > 0.0 { mass / base } else { 0.0 },
            mass,
            edge_exponents: exps,
        }
    }

    /// Same shape, total mass multiplied by `factor >= 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut d = self.clone();
        d.scale *= factor;
        d.mass *= factor;
        d
    }

    /// Same shape rescaled to the given mass.
    pub fn with_mass(&self, mass: f64) -> Self {
        if self.mass > 0.0 {
            self.scaled(mass / self.mass)
        } else {
            self.clone()
        }
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn class(&self) -> EdgeClass {
        self.class
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, DensityKind::Zero) || self.mass == 0.0
    }

    /// Power laws of `f` at the two ends of its support.
    pub fn edge_exponents(&self) -> (f64, f64) {
        self.edge_exponents
    }

    /// Exponent `a` in `f ~ x^a` if the support reaches 0.
    pub fn exponent_at_zero(&self) -> Option<f64> {
        (self.lo == 0.0).then_some(self.edge_exponents.0)
    }

    /// Exponent `b` in `f ~ (1-x)^b` if the support reaches 1.
    pub fn exponent_at_one(&self) -> Option<f64> {
        (self.hi == 1.0).then_some(self.edge_exponents.1)
    }

    /// Grid adapted to the density: Chebyshev-angle panels on the support, or
    /// Gauss–Legendre panels aligned with the nodes of a table.
    pub fn grid(&self, n: usize) -> QuadratureGrid {
        match &self.kind {
            DensityKind::Table(t) => QuadratureGrid::composite(0.0, 1.0, &t.nodes, n),
            _ => QuadratureGrid::chebyshev_angle(self.lo, self.hi, n),
        }
        .expect("support is a valid interval")
    }

    pub fn check_grid(&self, grid: &QuadratureGrid) -> Result<()> {
        if self.is_zero() || grid.matches(self.lo, self.hi) {
            Ok(())
        } else {
            let (glo, ghi) = grid.interval();
            Err(Error::GridMismatch {
                grid_lo: glo,
                grid_hi: ghi,
                lo: self.lo,
                hi: self.hi,
            })
        }
    }

    /// Edge weight `W` at a point.
    #[inline]
    pub fn edge_weight(&self, p: Point) -> f64 {
        match self.class {
            EdgeClass::InverseSqrt => 1.0 / (p.gap_lo * p.gap_hi).sqrt(),
            EdgeClass::Regular => 1.0,
        }
    }

    /// Reduced density `(u, u')` with `f = W u` (scale included).
    pub fn reduced(&self, p: Point) -> (f64, f64) {
        let (u, du) = match &self.kind {
            DensityKind::Arcsine => (1.0 / PI, 0.0),
            DensityKind::Uniform => (1.0, 0.0),
            DensityKind::FreePair { .. } => {
                let num = p.gap_lo * p.gap_hi;
                let den = p.x * p.complement;
                let u = num / (PI * den);
                let du = ((p.gap_hi - p.gap_lo) * den - num * (1.0 - 2.0 * p.x)) / (PI * den * den);
                (u, du)
            }
            DensityKind::Table(t) => t.eval(p),
            DensityKind::Chebyshev(c) => {
                let len = self.hi - self.lo;
                let s = (p.gap_lo - p.gap_hi) / len;
                (c.eval(s), 2.0 * c.eval_derivative(s) / len)
            }
            DensityKind::Custom { reduced, .. } => reduced(p),
            DensityKind::Zero => (0.0, 0.0),
        };
        (self.scale * u, self.scale * du)
    }

    /// `f(x)`; zero off the support.
    pub fn value(&self, x: f64) -> f64 {
        if self.is_zero() || x <= self.lo || x >= self.hi {
            return 0.0;
        }
        let p = Point::new(x, self.lo, self.hi);
        self.edge_weight(p) * self.reduced(p).0
    }

    /// `u`, `u'` and the measure weights `m_i = w_i W(x_i)` on a matching grid.
    pub fn tabulate(&self, grid: &QuadratureGrid) -> Result<Tabulated> {
        self.check_grid(grid)?;
        let n = grid.len();
        let mut t = Tabulated {
            u: Vec::with_capacity(n),
            du: Vec::with_capacity(n),
            measure: Vec::with_capacity(n),
        };
        for i in 0..n {
            let p = Point::on_grid(grid, i);
            let (u, du) = if self.is_zero() { (0.0, 0.0) } else { self.reduced(p) };
            t.u.push(u);
            t.du.push(du);
            t.measure.push(grid.weights()[i] * self.edge_weight(p));
        }
        Ok(t)
    }

    /// Density values `f(x_i)` on the grid nodes.
    pub fn values_on(&self, grid: &QuadratureGrid) -> Result<Vec<f64>> {
        self.check_grid(grid)?;
        Ok((0..grid.len())
            .map(|i| {
                let p = Point::on_grid(grid, i);
                if self.is_zero() {
                    0.0
                } else {
                    self.edge_weight(p) * self.reduced(p).0
                }
            })
            .collect())
    }

    /// `∫ g(x) f(x) dx` on a matching grid; `g` receives the node with its gaps.
    pub fn integrate<G: Fn(Point) -> f64>(&self, grid: &QuadratureGrid, g: G) -> Result<f64> {
        if self.is_zero() {
            return Ok(0.0);
        }
        self.check_grid(grid)?;
        Ok((0..grid.len())
            .map(|i| {
                let p = Point::on_grid(grid, i);
                grid.weights()[i] * self.edge_weight(p) * self.reduced(p).0 * g(p)
            })
            .sum())
    }

    /// `ν([lo, x])`, by graded Gauss–Legendre panels in the Chebyshev angle.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.is_zero() || x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return self.mass;
        }
        let len = self.hi - self.lo;
        let theta_end = 2.0 * ((x - self.lo) / len).sqrt().min(1.0).asin();
        self.angle_integral(theta_end)
    }

    fn angle_integral(&self, theta_end: f64) -> f64 {
        static RULE: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
        let (gx, gw) = RULE.get_or_init(|| gauss_legendre(20));
        let len = self.hi - self.lo;
        // dyadic panels towards θ = 0, uniform panels of width <= 0.05 elsewhere
        let mut breaks = vec![0.0];
        let base = theta_end.min(0.05);
        let mut b = base * 1e-10;
        while b < base {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(base);
        let rest = theta_end - base;
        if rest > 0.0 {
            let m = (rest / 0.05).ceil() as usize;
            for j in 1..=m {
                breaks.push(base + rest * j as f64 / m as f64);
            }
        }
        let mut total = 0.0;
        for pair in breaks.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
            for (z, w) in gx.iter().zip(gw) {
                let th = mid + half * z;
                let (s, c) = ((0.5 * th).sin(), (0.5 * th).cos());
                let (gl, gh) = (len * s * s, len * c * c);
                let xv = if gl <= gh { self.lo + gl } else { self.hi - gh };
                let p = Point {
                    x: xv,
                    gap_lo: gl,
                    gap_hi: gh,
                    complement: (1.0 - self.hi) + gh,
                };
                let jac = match self.class {
                    EdgeClass::InverseSqrt => 1.0,
                    EdgeClass::Regular => 0.5 * len * th.sin(),
                };
                total += w * half * jac * self.reduced(p).0;
            }
        }
        total
    }

    /// Points `x` with `ν([lo, x]) = p` for each requested mass `p`.
    pub fn quantiles(&self, masses: &[f64]) -> Vec<f64> {
        masses
            .iter()
            .map(|&target| {
                let len = self.hi - self.lo;
                let (mut a, mut b) = (0.0, PI);
                for _ in 0..64 {
                    let mid = 0.5 * (a + b);
                    if self.angle_integral(mid) < target {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                let th = 0.5 * (a + b);
                self.lo + len * (0.5 * th).sin().powi(2)
            })
            .collect()
    }

    /// Short description used in reports.
    pub fn describe(&self) -> DensitySummary {
        DensitySummary {
            kind: self.kind.name().to_string(),
            support: [self.lo, self.hi],
            edge_class: self.class,
            mass: self.mass,
            edge_exponents: [self.edge_exponents.0, self.edge_exponents.1],
        }
    }
}

/// Reduced density and measure weights tabulated on a grid.
#[derive(Debug, Clone)]
pub struct Tabulated {
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    /// `w_i W(x_i)`; `∑ m_i u_i g(x_i) ≈ ∫ g dν`.
    pub measure: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensitySummary {
    pub kind: String,
    pub support: [f64; 2],
    pub edge_class: EdgeClass,
    pub mass: f64,
    pub edge_exponents: [f64; 2],
}
