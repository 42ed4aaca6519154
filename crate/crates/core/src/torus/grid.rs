//! Uniform torus grids via the fast Fourier transform.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::caps::max_grid_points;
use crate::error::{Error, Result};
use crate::groupring::GroupRingElement;
use crate::par::Exec;

/// Number of points of an `m^d` grid, or an error if it exceeds the
/// memory cap.
pub(crate) fn grid_points(m: usize, d: usize) -> Result<usize> {
    let cap = max_grid_points();
    let points = (m as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
    if points > cap {
        return Err(Error::GridTooLarge { points, cap });
    }
    Ok(points as usize)
}

/// In-place multidimensional DFT of a row-major `m^d` array (axis 0
/// slowest). `inverse` selects the `+` sign; no normalization is applied.
pub(crate) fn transform(data: &mut Vec<Complex64>, m: usize, d: usize, inverse: bool, exec: Exec) {
    let mut planner = FftPlanner::<f64>::new();
    let fft: Arc<dyn Fft<f64>> = if inverse { planner.plan_fft_inverse(m) } else { planner.plan_fft_forward(m) };
    let n = data.len();
    let chunk = m * (4096 / m).max(1);
    for axis in 0..d {
        let stride = m.pow((d - 1 - axis) as u32);
        if stride == 1 {
            exec.for_each_chunk_mut(data, chunk, |c| fft.process(c));
            continue;
        }
        let src = &*data;
        let mut lines = exec.map_range(n, |i| {
            let (line, k) = (i / m, i % m);
            let (outer, inner) = (line / stride, line % stride);
            src[outer * m * stride + k * stride + inner]
        });
        exec.for_each_chunk_mut(&mut lines, chunk, |c| fft.process(c));
        *data = exec.map_range(n, |pos| {
            let (outer, rem) = (pos / (m * stride), pos % (m * stride));
            let (k, inner) = (rem / stride, rem % stride);
            lines[(outer * stride + inner) * m + k]
        });
    }
}

/// Row-major flat index of `e mod m`.
pub(crate) fn folded_index(e: &[i64], m: usize) -> usize {
    e.iter().fold(0usize, |acc, &x| acc * m + x.rem_euclid(m as i64) as usize)
}

/// Grid coordinates of a flat index.
pub(crate) fn unflatten(mut idx: usize, m: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; d];
    for i in (0..d).rev() {
        out[i] = idx % m;
        idx /= m;
    }
    out
}

/// Values of `f^` at `theta_j = (j + off) / m`, `j in {0..m-1}^d`, where
/// `off` is 0 or 1/2 (`midpoint`).
pub(crate) fn grid_values(f: &GroupRingElement, m: usize, midpoint: bool, exec: Exec) -> Result<Vec<Complex64>> {
    let d = f.dim();
    let n = grid_points(m, d)?;
    let mut data = vec![Complex64::new(0.0, 0.0); n];
    for (e, c) in f.float_terms() {
        let mut v = Complex64::new(c, 0.0);
        if midpoint {
            // e^{2 pi i n (j + 1/2) / m} = e^{pi i sum(n) / m} e^{2 pi i n j / m}
            let s: i64 = e.iter().sum();
            let phase = std::f64::consts::PI * ((s.rem_euclid(2 * m as i64)) as f64) / m as f64;
            v *= Complex64::from_polar(1.0, phase);
        }
        data[folded_index(&e, m)] += v;
    }
    transform(&mut data, m, d, true, exec);
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::evaluate;
    use crate::groupring::TorusPoint;

    #[test]
    fn grid_matches_direct_evaluation() {
        let f: GroupRingElement = "3 - u1*u2^2 + 2*u2^-1 - u1^-3".parse().unwrap();
        let m = 8;
        for midpoint in [false, true] {
            for exec in [Exec::Sequential, Exec::Parallel] {
                let vals = grid_values(&f, m, midpoint, exec).unwrap();
                let off = if midpoint { 0.5 } else { 0.0 };
                for (idx, v) in vals.iter().enumerate() {
                    let j = unflatten(idx, m, 2);
                    let theta = TorusPoint::new(j.iter().map(|&x| (x as f64 + off) / m as f64).collect());
                    let direct = evaluate(&f, &theta);
                    assert!((direct - v).norm() < 1e-12, "{idx}: {direct} vs {v}");
                }
            }
        }
    }

    #[test]
    fn strategies_agree_bitwise() {
        let f: GroupRingElement = "4 - u1 - u1^-1 - u2 - u2^-1 + u3".parse().unwrap();
        let a = grid_values(&f, 16, true, Exec::Sequential).unwrap();
        let b = grid_values(&f, 16, true, Exec::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
