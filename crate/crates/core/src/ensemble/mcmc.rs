//! Component-wise random-walk Metropolis sampler for the tilted eigenvalue gas.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{EnsembleSpec, SpectrumSample};
use crate::error::{Error, Result};
use crate::stats::autocorrelation_time;

#[derive(Debug, Clone, Serialize)]
pub struct ChainOptions {
    pub burn_in: usize,
    /// Number of retained (thinned) samples.
    pub samples: usize,
    /// Fixed thinning; estimated from a pilot run when absent.
    pub thin: Option<usize>,
    pub initial_step: f64,
    pub seed: u64,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            burn_in: 10_000,
            samples: 10_000,
            thin: None,
            initial_step: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainDiagnostics {
    pub acceptance_rate: f64,
    pub autocorrelation_time: f64,
    pub thin: usize,
    pub step: f64,
}

#[derive(Debug, Clone)]
pub struct ChainResult {
    pub samples: Vec<SpectrumSample>,
    pub diagnostics: ChainDiagnostics,
}

struct Chain<'a> {
    spec: &'a EnsembleSpec,
    tilt_scale: f64,
    x: Vec<f64>,
    step: f64,
    rng: ChaCha8Rng,
    accepted: usize,
    proposed: usize,
}

impl Chain<'_> {
    /// Change of the log-density when `x_i` moves to `y`.
    fn delta(&self, i: usize, y: f64) -> f64 {
        let xi = self.x[i];
        let (a, b) = self.spec.exponents();
        let mut d = 0.0;
        if a > 0.0 {
            d += a * (y.ln() - xi.ln());
        }
        if b > 0.0 {
            d += b * ((1.0 - y).ln() - (1.0 - xi).ln());
        }
        if self.tilt_scale != 0.0 {
            d -= self.tilt_scale * self.spec.n as f64 * (self.spec.psi_value(y) - self.spec.psi_value(xi));
        }
        for (j, &xj) in self.x.iter().enumerate() {
            if j != i {
                d += 2.0 * ((y - xj).abs().ln() - (xi - xj).abs().ln());
            }
        }
        d
    }

    fn sweep(&mut self) {
        for i in 0..self.x.len() {
            let z: f64 = self.rng.sample(StandardNormal);
            let y = self.x[i] + self.step * z;
            self.proposed += 1;
            if !(y > 0.0 && y < 1.0) {
                continue;
            }
            let d = self.delta(i, y);
            if d >= 0.0 || self.rng.random::<f64>() < d.exp() {
                self.x[i] = y;
                self.accepted += 1;
            }
        }
    }

    fn rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    fn reset_counts(&mut self) {
        self.accepted = 0;
        self.proposed = 0;
    }
}

/// Samples the gas with the tilt multiplied by `tilt_scale` (1 for the target
/// ensemble, intermediate values for thermodynamic integration).
pub fn run_chain(spec: &EnsembleSpec, tilt_scale: f64, opts: &ChainOptions) -> Result<ChainResult> {
    let (n0, n1, n) = spec.multiplicities();
    if n == 0 {
        return Err(Error::InvalidArgument("the ensemble has no nontrivial eigenvalues".into()));
    }
    let mut chain = Chain {
        spec,
        tilt_scale,
        x: (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect(),
        step: opts.initial_step,
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        accepted: 0,
        proposed: 0,
    };
    let block = 100;
    for sweep in 0..opts.burn_in {
        chain.sweep();
        if (sweep + 1) % block == 0 {
            let r = chain.rate();
            if !(0.30..=0.45).contains(&r) {
                chain.step = (chain.step * ((r - 0.375) * 3.0).exp()).clamp(1e-6, 1.0);
            }
            chain.reset_counts();
        }
    }
    chain.reset_counts();
    let observable = |x: &[f64]| x.iter().sum::<f64>();
    let thin = match opts.thin {
        Some(t) => t.max(1),
        None => {
            let pilot: Vec<f64> = (0..4000)
                .map(|_| {
                    chain.sweep();
                    observable(&chain.x)
                })
                .collect();
            autocorrelation_time(&pilot).ceil() as usize
        }
    };
    let mut samples = Vec::with_capacity(opts.samples);
    let mut trace = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples {
        for _ in 0..thin {
            chain.sweep();
        }
        trace.push(observable(&chain.x));
        samples.push(SpectrumSample {
            xs: chain.x.clone(),
            n0,
            n1,
        });
    }
    let acceptance_rate = chain.rate();
    if acceptance_rate < 0.01 {
        return Err(Error::Degenerate(format!(
            "chain acceptance rate {acceptance_rate:.4} below 1%"
        )));
    }
    Ok(ChainResult {
        samples,
        diagnostics: ChainDiagnostics {
            acceptance_rate,
            autocorrelation_time: autocorrelation_time(&trace) * thin as f64,
            thin,
            step: chain.step,
        },
    })
}

/// Metropolis chain targeting the tilted joint density.
pub fn mcmc_tilted_spectrum(spec: &EnsembleSpec, opts: &ChainOptions) -> Result<ChainResult> {
    run_chain(spec, 1.0, opts)
}
