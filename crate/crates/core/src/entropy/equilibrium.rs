//! Maximiser of `¼Σ(ν) + ½∫(A log x + B log(1-x) - h̃) dν` over measures of
//! mass `2ρ`, where `A = α₀₁+α₁₀` and `B = α₀₀+α₁₁` are the generic atoms.
//!
//! On a single support interval `[a, b]` the optimality condition is the
//! singular integral equation `∫ log|x-y| dν(y) = -V(x) + const`. Writing
//! `V = ∑ v_k T_k(s)` in Chebyshev polynomials of the rescaled variable and
//! `dν/dx = ∑ c_k T_k(s) / √((x-a)(b-x))`, it is solved exactly by
//! `c_k = k v_k / π` for `k ≥ 1` and `c₀ = 2ρ/π`. Soft edges are located by
//! Newton's method on `u(±1) = 0`.

use serde::Serialize;
use std::f64::consts::PI;

use super::constant_c_for;
use super::potential::PotentialSpec;
use crate::error::{Error, Result};
use crate::measure::density::clenshaw;
use crate::measure::{free_pair_support, rho, Atoms, DensitySpec, ProjectionPairLaw};

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumOptions {
    /// Largest Chebyshev expansion tried.
    pub max_terms: usize,
    /// Relative size of the coefficient tail accepted as converged.
    pub tail_tolerance: f64,
    pub max_newton: usize,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            max_terms: 4096,
            tail_tolerance: 1e-14,
            max_newton: 60,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumResult {
    pub density: DensitySpec,
    pub law: ProjectionPairLaw,
    /// Maximal value `J*_h` of the functional.
    pub objective: f64,
    pub c: f64,
    /// `B_h = J*_h - C - atoms·diag(h)`.
    pub b_h: f64,
    pub support: (f64, f64),
    pub terms: usize,
    pub newton_iterations: usize,
    /// `max |u|` at soft edges after the final Newton step, relative to `c₀`.
    pub edge_residual: f64,
    pub converged: bool,
}

impl EquilibriumResult {
    /// `C_h = C + B_h`.
    pub fn c_h(&self) -> f64 {
        self.c + self.b_h
    }

    pub fn summary(&self) -> EquilibriumSummary {
        EquilibriumSummary {
            objective: self.objective,
            c: self.c,
            b_h: self.b_h,
            c_h: self.c_h(),
            support: [self.support.0, self.support.1],
            terms: self.terms,
            newton_iterations: self.newton_iterations,
            edge_residual: self.edge_residual,
            converged: self.converged,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSummary {
    pub objective: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub b_h: f64,
    pub c_h: f64,
    pub support: [f64; 2],
    pub terms: usize,
    pub newton_iterations: usize,
    pub edge_residual: f64,
    pub converged: bool,
}

struct Problem<'a> {
    a_coef: f64,
    b_coef: f64,
    h: &'a PotentialSpec,
    mass: f64,
    opts: &'a EquilibriumOptions,
}

struct Fixed {
    v: Vec<f64>,
    c: Vec<f64>,
}

impl Fixed {
    fn edge(&self, side: f64) -> f64 {
        clenshaw(&self.c, side)
    }
}

/// Chebyshev coefficients of `g` on `[-1,1]` from `K` first-kind nodes.
fn chebyshev_coefficients(values: &[f64]) -> Vec<f64> {
    let k = values.len();
    let m = 4 * k;
    let table: Vec<f64> = (0..m).map(|j| (PI * j as f64 / (2 * k) as f64).cos()).collect();
    (0..k)
        .map(|deg| {
            let mut acc = 0.0;
            for (j, v) in values.iter().enumerate() {
                acc += v * table[(deg * (2 * j + 1)) % m];
            }
            let c = 2.0 * acc / k as f64;
            if deg == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

impl Problem<'_> {
    fn potential(&self, x: f64, gap_lo: f64, gap_hi: f64, lo: f64, hi: f64) -> f64 {
        let mut v = -self.h.value(x);
        if self.a_coef > 0.0 {
            let xv = if lo == 0.0 { gap_lo } else { x };
            v += self.a_coef * xv.ln();
        }
        if self.b_coef > 0.0 {
            let cv = if hi == 1.0 { gap_hi } else { 1.0 - x };
            v += self.b_coef * cv.ln();
        }
        v
    }

    fn solve_fixed(&self, lo: f64, hi: f64) -> Fixed {
        let len = hi - lo;
        let mut k = 64;
        loop {
            let values: Vec<f64> = (0..k)
                .map(|j| {
                    let th = PI * (j as f64 + 0.5) / k as f64;
                    let (sn, cs) = ((0.5 * th).sin(), (0.5 * th).cos());
                    // s = cos θ runs from 1 to -1; gaps from the endpoints
                    let (gap_hi, gap_lo) = (len * sn * sn, len * cs * cs);
                    let x = if gap_lo <= gap_hi { lo + gap_lo } else { hi - gap_hi };
                    self.potential(x, gap_lo, gap_hi, lo, hi)
                })
                .collect();
            let v = chebyshev_coefficients(&values);
            let scale = v.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1e-300);
            let tail = v[3 * k / 4..].iter().map(|c| c.abs()).fold(0.0, f64::max);
            if tail <= self.opts.tail_tolerance * scale || 2 * k > self.opts.max_terms {
                let mut c: Vec<f64> = v.iter().enumerate().map(|(j, vj)| j as f64 * vj / PI).collect();
                c[0] = self.mass / PI;
                // drop the noise floor
                let floor = 1e-17 * scale;
                while c.len() > 1 && c.last().is_some_and(|x| x.abs() < floor) {
                    c.pop();
                }
                return Fixed { v, c };
            }
            k *= 2;
        }
    }
}

/// Solves the equilibrium problem for traces `α, β` and tilt `h`.
pub fn equilibrium_solve(
    alpha: f64,
    beta: f64,
    h: &PotentialSpec,
    opts: &EquilibriumOptions,
) -> Result<EquilibriumResult> {
    let r = rho(alpha, beta);
    let (_, c) = constant_c_for(alpha, beta);
    let atom_term = h.atom_term(&Atoms::generic(alpha, beta));
    if r == 0.0 {
        let law = ProjectionPairLaw::free_pair(alpha, beta)?;
        return Ok(EquilibriumResult {
            density: DensitySpec::zero(),
            law,
            objective: 0.0,
            c,
            b_h: -c - atom_term,
            support: (0.0, 1.0),
            terms: 0,
            newton_iterations: 0,
            edge_residual: 0.0,
            converged: true,
        });
    }
    let problem = Problem {
        a_coef: (alpha - beta).abs(),
        b_coef: (alpha + beta - 1.0).abs(),
        h,
        mass: 2.0 * r,
        opts,
    };
    let (mut lo, mut hi) = free_pair_support(alpha, beta);
    let mut soft = [problem.a_coef > 0.0 || lo > 0.0, problem.b_coef > 0.0 || hi < 1.0];
    let c0 = problem.mass / PI;
    let edge_tol = 1e-13 * c0;
    let mut iterations = 0;
    let mut residual;
    let mut fixed;
    'outer: loop {
        loop {
            fixed = problem.solve_fixed(lo, hi);
            let f = [fixed.edge(-1.0), fixed.edge(1.0)];
            residual = (0..2).filter(|&e| soft[e]).map(|e| f[e].abs()).fold(0.0, f64::max);
            // a hard edge with a negative density must become soft
            if !soft[0] && f[0] < -edge_tol {
                soft[0] = true;
                lo += 1e-3 * (hi - lo);
                continue 'outer;
            }
            if !soft[1] && f[1] < -edge_tol {
                soft[1] = true;
                hi -= 1e-3 * (hi - lo);
                continue 'outer;
            }
            if residual <= edge_tol || iterations >= opts.max_newton {
                break 'outer;
            }
            iterations += 1;
            let step = 1e-7 * (hi - lo);
            let eval = |l: f64, u: f64| {
                let fx = problem.solve_fixed(l, u);
                [fx.edge(-1.0), fx.edge(1.0)]
            };
            let (new_lo, new_hi) = match soft {
                [true, true] => {
                    let fa = eval(lo + step, hi);
                    let fb = eval(lo, hi - step);
                    let j = [
                        [(fa[0] - f[0]) / step, -(fb[0] - f[0]) / step],
                        [(fa[1] - f[1]) / step, -(fb[1] - f[1]) / step],
                    ];
                    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
                    if det == 0.0 || !det.is_finite() {
                        return Err(Error::Numerical("singular Jacobian in the edge equations".into()));
                    }
                    let da = (f[0] * j[1][1] - f[1] * j[0][1]) / det;
                    let db = (j[0][0] * f[1] - j[1][0] * f[0]) / det;
                    (lo - da, hi - db)
                }
                [true, false] => {
                    let fa = eval(lo + step, hi);
                    (lo - f[0] * step / (fa[0] - f[0]), hi)
                }
                [false, true] => {
                    let fb = eval(lo, hi - step);
                    (lo, hi + f[1] * step / (fb[1] - f[1]))
                }
                [false, false] => (lo, hi),
            };
            // damped update that keeps the interval inside [0,1]
            let mut t = 1.0;
            let (mut nl, mut nh) = (new_lo, new_hi);
            while !(nl >= 0.0 && nh <= 1.0 && nl < nh) && t > 1e-6 {
                t *= 0.5;
                nl = lo + t * (new_lo - lo);
                nh = hi + t * (new_hi - hi);
            }
            if soft[0] && problem.a_coef == 0.0 && nl <= 0.0 {
                soft[0] = false;
                nl = 0.0;
            }
            if soft[1] && problem.b_coef == 0.0 && nh >= 1.0 {
                soft[1] = false;
                nh = 1.0;
            }
            lo = nl.max(0.0);
            hi = nh.min(1.0);
        }
    }
    let density = DensitySpec::chebyshev(lo, hi, fixed.c.clone())?;
    let min_u = (0..=2000)
        .map(|j| clenshaw(&fixed.c, -1.0 + 2.0 * j as f64 / 2000.0))
        .fold(f64::INFINITY, f64::min);
    if min_u < -1e-8 * c0 {
        return Err(Error::Numerical(format!(
            "equilibrium density turns negative (min {min_u:.3e}); the support is not a single interval"
        )));
    }
    let half_len = 0.5 * (hi - lo);
    let cs = &fixed.c;
    let v = &fixed.v;
    let mut sigma = PI * PI * cs[0] * cs[0] * (half_len / 2.0).ln();
    let mut vint = PI * cs[0] * v[0];
    for k in 1..cs.len() {
        sigma -= 0.5 * PI * PI * cs[k] * cs[k] / k as f64;
        vint += 0.5 * PI * v[k] * cs[k];
    }
    let objective = 0.25 * sigma + 0.5 * vint;
    let law = ProjectionPairLaw::generic_with_density(alpha, beta, &density)?;
    Ok(EquilibriumResult {
        density,
        law,
        objective,
        c,
        b_h: objective - c - atom_term,
        support: (lo, hi),
        terms: fixed.c.len(),
        newton_iterations: iterations,
        edge_residual: residual / c0,
        converged: residual <= edge_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::Polynomial;
    use crate::entropy::DiagonalValues;

    #[test]
    fn untilted_optimum_is_free_pair() {
        for (a, b) in [(0.5, 0.5), (0.6, 0.3), (0.2, 0.7), (0.1, 0.1)] {
            let eq = equilibrium_solve(a, b, &PotentialSpec::zero(), &EquilibriumOptions::default()).unwrap();
            assert!(eq.converged);
            let free = DensitySpec::free_pair(a, b);
            for x in [0.05, 0.2, 0.41, 0.63, 0.9] {
                assert!((eq.density.value(x) - free.value(x)).abs() < 1e-9 * (1.0 + free.value(x)));
            }
            assert!((eq.objective - eq.c).abs() < 1e-12, "J* {} C {}", eq.objective, eq.c);
            assert!(eq.b_h.abs() < 1e-12);
        }
    }

    #[test]
    fn constant_tilt_only_shifts_objective() {
        let h = PotentialSpec::polynomial(Polynomial::new(vec![0.7]), DiagonalValues::default());
        let eq = equilibrium_solve(0.6, 0.3, &h, &EquilibriumOptions::default()).unwrap();
        let free = DensitySpec::free_pair(0.6, 0.3);
        assert!((eq.density.value(0.5) - free.value(0.5)).abs() < 1e-10);
        assert!((eq.objective - (eq.c - 0.5 * 0.7 * 0.6)).abs() < 1e-12);
    }

    #[test]
    fn linear_tilt_moves_mass_left() {
        let h = PotentialSpec::polynomial(Polynomial::new(vec![0.0, 0.5]), DiagonalValues::default());
        let eq = equilibrium_solve(0.5, 0.5, &h, &EquilibriumOptions::default()).unwrap();
        assert!(eq.converged);
        assert!((eq.density.mass() - 1.0).abs() < 1e-14);
        assert!(eq.density.value(0.1) > eq.density.value(0.9));
        assert!(eq.b_h.is_finite());
    }
}
