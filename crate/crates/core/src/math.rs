//! Scalar helpers shared by the spectral and kernel code.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

pub use libm::{cos, exp, expm1, log, sin, sqrt};

#[inline]
pub fn sq(x: f64) -> f64 {
    x * x
}

/// `sin(pi * s)`, exactly zero at integer `s`.
pub fn sin_pi(s: f64) -> f64 {
    let r = s - 2.0 * libm::floor(s / 2.0);
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    // fold into [-1/2, 1/2] for accuracy
    if r < 0.5 {
        sin(PI * r)
    } else if r < 1.5 {
        sin(PI * (1.0 - r))
    } else {
        sin(PI * (r - 2.0))
    }
}

/// `cos(pi * s)`, exactly zero at half-integer `s`.
pub fn cos_pi(s: f64) -> f64 {
    sin_pi(s + 0.5)
}

/// `sin(pi * num / den)` with exact integer range reduction.
pub fn sin_pi_frac(num: usize, den: usize) -> f64 {
    let r = num % (2 * den);
    if r == 0 || r == den {
        return 0.0;
    }
    sin_pi(r as f64 / den as f64)
}

/// `cos(pi * num / den)` with exact integer range reduction.
pub fn cos_pi_frac(num: usize, den: usize) -> f64 {
    // cos(pi a) = sin(pi (a + 1/2)) = sin(pi (2 num + den) / (2 den))
    sin_pi_frac(2 * num + den, 2 * den)
}

/// Gauss-Legendre nodes and weights mapped to `[0, length]`.
pub fn gauss_legendre(q: usize, length: f64) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; q];
    let mut weights = vec![0.0; q];
    for i in 0..q.div_ceil(2) {
        let mut z = cos(PI * (i as f64 + 0.75) / (q as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(q, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(q, z);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[q - 1 - i] = z;
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    let half = 0.5 * length;
    for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
        *x = half * (*x + 1.0);
        *w *= half;
    }
    (nodes, weights)
}

fn legendre_with_derivative(q: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=q {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = q as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Composite trapezoid weights for `len` equally spaced knots.
pub fn trapezoid_weights(len: usize, dt: f64) -> Vec<f64> {
    let mut w = vec![dt; len];
    if let Some(first) = w.first_mut() {
        *first = 0.5 * dt;
    }
    if let Some(last) = w.last_mut() {
        *last = 0.5 * dt;
    }
    w
}

/// Composite Simpson weights; falls back to trapezoid when the number of
/// intervals is odd.
pub fn simpson_weights(len: usize, dt: f64) -> Vec<f64> {
    if len < 3 || !(len - 1).is_multiple_of(2) {
        return trapezoid_weights(len, dt);
    }
    (0..len)
        .map(|k| {
            let c = if k == 0 || k == len - 1 {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * dt / 3.0
        })
        .collect()
}

/// Second-order time derivative of a sampled trajectory: centered in the
/// interior, one-sided three-point stencils at both ends.
pub fn fd_time_derivative(values: &[f64], dt: f64, out: &mut [f64]) {
    let n = values.len();
    debug_assert!(n >= 3 && out.len() == n);
    let inv = 1.0 / (2.0 * dt);
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) * inv;
    for k in 1..n - 1 {
        out[k] = (values[k + 1] - values[k - 1]) * inv;
    }
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) * inv;
}

/// Empirical convergence order between two errors at refinement factor 2.
pub fn order_estimate(coarse: f64, fine: f64) -> Option<f64> {
    if coarse > 0.0 && fine > 0.0 {
        Some(log(coarse / fine) / core::f64::consts::LN_2)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_pi_is_exact_at_integers() {
        for k in -4..5 {
            assert_eq!(sin_pi(k as f64), 0.0);
        }
        assert_eq!(sin_pi_frac(33, 33), 0.0);
        assert_eq!(cos_pi_frac(1, 2), 0.0);
        assert!((sin_pi(0.25) - (PI / 4.0).sin()).abs() < 1e-16);
        assert!((cos_pi_frac(1, 3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(6, 2.0);
        // degree 11 is exact for 6 nodes
        let approx: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(11)).sum();
        let exact = 2f64.powi(12) / 12.0;
        assert!((approx - exact).abs() / exact < 1e-13);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let dt = 0.1;
        let w = simpson_weights(11, dt);
        let s: f64 = (0..11).map(|k| w[k] * (k as f64 * dt).powi(3)).sum();
        assert!((s - 0.25).abs() < 1e-14);
    }

    #[test]
    fn fd_derivative_exact_for_quadratics() {
        let dt = 0.25;
        let v: Vec<f64> = (0..6).map(|k| (k as f64 * dt).powi(2)).collect();
        let mut d = vec![0.0; 6];
        fd_time_derivative(&v, dt, &mut d);
        for (k, dk) in d.iter().enumerate() {
            assert!((dk - 2.0 * k as f64 * dt).abs() < 1e-13);
        }
    }
}
