//! Scalar functions on `[0,1]` with the first two derivatives.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A real function with two derivatives, evaluable on `[0,1]`.
pub trait ScalarFunction: Send + Sync {
    fn value(&self, x: f64) -> f64;
    fn d1(&self, x: f64) -> f64;
    fn d2(&self, x: f64) -> f64;
}

/// `∑ c_k x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Parses `poly:c0,c1,...` (the `poly:` prefix is optional).
    pub fn parse(text: &str) -> Result<Self> {
        let body = text.trim();
        let body = body.strip_prefix("poly:").unwrap_or(body);
        if body.is_empty() {
            return Err(Error::InvalidArgument("empty polynomial".into()));
        }
        let coeffs = body
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|c| c.is_finite())
                    .ok_or_else(|| Error::InvalidArgument(format!("bad coefficient '{s}' in '{text}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coeffs })
    }

    pub fn derivative(&self) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|&c| c == 0.0)
    }

    fn horner(c: &[f64], x: f64) -> f64 {
        c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
    }
}

impl ScalarFunction for Polynomial {
    fn value(&self, x: f64) -> f64 {
        Self::horner(&self.coeffs, x)
    }

    fn d1(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + k as f64 * c)
    }

    fn d2(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(2)
            .rev()
            .fold(0.0, |acc, (k, &c)| acc * x + (k * (k - 1)) as f64 * c)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "poly:{}", parts.join(","))
    }
}

type Real = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A function assembled from three closures (value, first and second derivative).
#[derive(Clone)]
pub struct ClosureFunction {
    f: Real,
    df: Real,
    d2f: Real,
}

impl ClosureFunction {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
        }
    }
}

impl fmt::Debug for ClosureFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("ClosureFunction")
    }
}

impl ScalarFunction for ClosureFunction {
    fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn d1(&self, x: f64) -> f64 {
        (self.df)(x)
    }
    fn d2(&self, x: f64) -> f64 {
        (self.d2f)(x)
    }
}

/// `sup_{[0,1]} |g|` sampled on `n+1` equispaced points.
pub fn sampled_sup(g: impl Fn(f64) -> f64, n: usize) -> f64 {
    (0..=n).map(|i| g(i as f64 / n as f64).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_derivatives() {
        let p = Polynomial::parse("poly:1,-2,0.5,3").unwrap();
        let x = 0.3;
        assert!((p.value(x) - (1.0 - 0.6 + 0.045 + 0.081)).abs() < 1e-15);
        assert!((p.d1(x) - (-2.0 + 0.3 + 0.81)).abs() < 1e-15);
        assert!((p.d2(x) - (1.0 + 5.4)).abs() < 1e-14);
        assert_eq!(p.derivative().coeffs(), &[-2.0, 1.0, 9.0]);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Polynomial::parse("poly:").is_err());
        assert!(Polynomial::parse("poly:1,x").is_err());
        assert!(Polynomial::parse("0,1").is_ok());
    }

    #[test]
    fn zero_polynomial_is_constant() {
        let z = Polynomial::zero();
        assert_eq!(z.value(0.4), 0.0);
        assert!(z.is_constant());
    }
}
