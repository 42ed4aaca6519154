use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the torus `(R/Z)^d`, components kept in `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TorusPoint {
    theta: Vec<f64>,
}

impl TorusPoint {
    pub fn new(theta: Vec<f64>) -> Self {
        Self { theta: theta.into_iter().map(canonical).collect() }
    }

    pub fn zero(d: usize) -> Self {
        Self { theta: vec![0.0; d] }
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.theta
    }
}

fn canonical(t: f64) -> f64 {
    let r = t.rem_euclid(1.0);
    // rem_euclid can round up to exactly 1.0 for tiny negative inputs
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Representative of `t mod 1` in `[-1/2, 1/2)`.
pub fn wrap_signed(t: f64) -> f64 {
    let r = t - (t + 0.5).floor();
    if r >= 0.5 {
        r - 1.0
    } else {
        r
    }
}

/// `rho_inf(x, y) = max_j min_m |x_j - y_j - m|`.
pub fn torus_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { left: x.len(), right: y.len() });
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| {
            let t = (a - b).rem_euclid(1.0);
            t.min(1.0 - t)
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distance_examples() {
        assert!((torus_distance(&[0.9], &[0.1]).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(torus_distance(&[0.0, 0.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(torus_distance(&[0.25, 0.5], &[0.75, 0.5]).unwrap(), 0.5);
        assert!(torus_distance(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn canonical_components() {
        let p = TorusPoint::new(vec![-0.25, 1.5, -1e-20]);
        assert_eq!(p.coords(), &[0.75, 0.5, 0.0]);
    }

    #[test]
    fn signed_wrap() {
        assert_eq!(wrap_signed(0.5), -0.5);
        assert_eq!(wrap_signed(-0.5), -0.5);
        assert!((wrap_signed(0.7) + 0.3).abs() < 1e-15);
        assert_eq!(wrap_signed(3.0), 0.0);
    }
}
