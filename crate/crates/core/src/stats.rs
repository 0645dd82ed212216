//! Goodness-of-fit statistics and distances between one-dimensional laws.

use crate::measure::quadrature::gauss_legendre;

/// One-sample Kolmogorov–Smirnov statistic `sup |F_n - F|`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = (na * nb / (na + nb)).sqrt();
    (d, kolmogorov_q((ne + 0.12 + 0.11 / ne) * d))
}

/// Tail `P(K > λ)` of the Kolmogorov distribution.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..200 {
        let term = 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// `W₁` between the empirical law of `sample` and a law with quantile function `q`.
pub fn wasserstein1_quantile(sample: &[f64], q: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let (gx, gw) = gauss_legendre(16);
    let n = xs.len() as f64;
    let mut total = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let (a, b) = (i as f64 / n, (i + 1) as f64 / n);
        // split the cell where the quantile function crosses the sample value
        let mut cuts = vec![a, b];
        if (q(a) - x) * (q(b) - x) < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if (q(lo) - x) * (q(mid) - x) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            cuts.insert(1, 0.5 * (lo + hi));
        }
        for w in cuts.windows(2) {
            let (mid, half) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
            for (z, wt) in gx.iter().zip(&gw) {
                total += wt * half * (q(mid + half * z) - x).abs();
            }
        }
    }
    total
}

/// `W₁` between two empirical laws.
pub fn wasserstein1_samples(a: &[f64], b: &[f64]) -> f64 {
    let mut pts: Vec<(f64, bool)> = a.iter().map(|&x| (x, true)).chain(b.iter().map(|&x| (x, false))).collect();
    pts.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut fa, mut fb, mut total) = (0.0, 0.0, 0.0);
    for w in 0..pts.len() {
        if pts[w].1 {
            fa += 1.0 / na;
        } else {
            fb += 1.0 / nb;
        }
        if w + 1 < pts.len() {
            total += (fa - fb).abs() * (pts[w + 1].0 - pts[w].0);
        }
    }
    total
}

/// Total variation between a histogram of `sample` on `[0,1]` and the
/// probabilities `cell_mass(a, b)` of the same cells.
pub fn tv_histogram(sample: &[f64], bins: usize, cell_mass: impl Fn(f64, f64) -> f64) -> f64 {
    let mut counts = vec![0usize; bins];
    for &x in sample {
        let b = ((x * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = sample.len() as f64;
    0.5 * counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            let p = cell_mass(b as f64 / bins as f64, (b + 1) as f64 / bins as f64);
            (c as f64 / n - p).abs()
        })
        .sum::<f64>()
}

/// Mean and standard error assuming independent draws.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Integrated autocorrelation time with Sokal's self-consistent window (c = 5).
pub fn autocorrelation_time(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c0 = series.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
    if c0 == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for lag in 1..n / 2 {
        let c = (0..n - lag).map(|i| (series[i] - mean) * (series[i + lag] - mean)).sum::<f64>() / n as f64;
        tau += 2.0 * c / c0;
        if lag as f64 >= 5.0 * tau {
            break;
        }
    }
    tau.max(1.0)
}
