//! Free-space heat kernel `Z`, the Dirichlet Green function `G` of the box
//! and the corrector `V = G - Z`.
//!
//! `G` has two independent constructions. The spectral one sums
//! `exp(-rho lambda_n (t - tau)) u_n(x) u_n(xi)`; the image one sums signed
//! free-space kernels at reflected sources. Both factor into one-dimensional
//! kernels per axis.

use core::f64::consts::PI;

use crate::domain::BoxDomain;
use crate::error::{invalid, Error, Result};
use crate::math::{cos_pi, exp, sin_pi, sq, sqrt};

/// Series cutoffs and the diagonal guard for kernel evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationPolicy {
    /// Modes per axis in the spectral Green function.
    pub n_kernel: usize,
    /// Image shells per axis.
    pub r_images: usize,
    /// Minimum admissible `t - tau`.
    pub eps_t: f64,
    /// Images are used for `rho (t - tau) <= crossover * min L^2`.
    pub crossover: f64,
}

impl TruncationPolicy {
    pub fn new(n_kernel: usize, r_images: usize, eps_t: f64) -> Result<Self> {
        let p = Self {
            n_kernel,
            r_images,
            eps_t,
            crossover: 0.05,
        };
        p.validate()?;
        Ok(p)
    }

    /// `N_kernel = 24`, three image shells, guard `1e-4 t_final`.
    pub fn for_horizon(t_final: f64) -> Self {
        Self {
            n_kernel: 24,
            r_images: 3,
            eps_t: 1e-4 * t_final,
            crossover: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_kernel < 1 || self.r_images < 1 || !(self.eps_t > 0.0) || !(self.crossover > 0.0)
        {
            return Err(invalid(
                "truncation policy needs N_kernel >= 1, R_images >= 1, eps_t > 0",
            ));
        }
        Ok(())
    }
}

fn separation(t: f64, tau: f64, eps_t: f64) -> Result<f64> {
    let s = t - tau;
    if !(s >= eps_t) {
        return Err(Error::TimeSeparation {
            separation: s,
            guard: eps_t,
        });
    }
    Ok(s)
}

/// One-dimensional free-space kernel with diffusion time `tau_d = rho (t - tau)`.
fn heat_1d(d: f64, tau_d: f64) -> f64 {
    exp(-d * d / (4.0 * tau_d)) / sqrt(4.0 * PI * tau_d)
}

/// `(4 pi rho (t-tau))^{-3/2} exp(-|x - xi|^2 / (4 rho (t-tau)))`.
pub fn eval_z(x: [f64; 3], t: f64, xi: [f64; 3], tau: f64, rho: f64, eps_t: f64) -> Result<f64> {
    let s = separation(t, tau, eps_t)?;
    Ok(z_unchecked(x, xi, rho * s))
}

fn z_unchecked(x: [f64; 3], xi: [f64; 3], tau_d: f64) -> f64 {
    let r2 = sq(x[0] - xi[0]) + sq(x[1] - xi[1]) + sq(x[2] - xi[2]);
    let norm = 4.0 * PI * tau_d;
    exp(-r2 / (4.0 * tau_d)) / (norm * sqrt(norm))
}

/// Gradient of `Z` in `x`.
pub fn grad_x_z(
    x: [f64; 3],
    t: f64,
    xi: [f64; 3],
    tau: f64,
    rho: f64,
    eps_t: f64,
) -> Result<[f64; 3]> {
    let s = separation(t, tau, eps_t)?;
    let z = z_unchecked(x, xi, rho * s);
    let c = z / (2.0 * rho * s);
    Ok(core::array::from_fn(|a| -(x[a] - xi[a]) * c))
}

/// Gradient of `Z` in `xi`.
pub fn grad_xi_z(
    x: [f64; 3],
    t: f64,
    xi: [f64; 3],
    tau: f64,
    rho: f64,
    eps_t: f64,
) -> Result<[f64; 3]> {
    let s = separation(t, tau, eps_t)?;
    let z = z_unchecked(x, xi, rho * s);
    let c = z / (2.0 * rho * s);
    Ok(core::array::from_fn(|a| -(xi[a] - x[a]) * c))
}

/// Kernel evaluator bound to a box and a truncation policy.
#[derive(Clone, Copy, Debug)]
pub struct Kernels {
    domain: BoxDomain,
    policy: TruncationPolicy,
}

impl Kernels {
    pub fn new(domain: BoxDomain, policy: TruncationPolicy) -> Result<Self> {
        policy.validate()?;
        Ok(Self { domain, policy })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn policy(&self) -> &TruncationPolicy {
        &self.policy
    }

    fn check_points(&self, x: [f64; 3], xi: [f64; 3]) -> Result<()> {
        if !self.domain.contains(x) || !self.domain.contains(xi) {
            return Err(invalid("kernel arguments must lie in the closed box"));
        }
        Ok(())
    }

    fn diffusion_time(&self, t: f64, tau: f64) -> Result<f64> {
        Ok(self.domain.rho() * separation(t, tau, self.policy.eps_t)?)
    }

    pub fn z(&self, x: [f64; 3], t: f64, xi: [f64; 3], tau: f64) -> Result<f64> {
        eval_z(x, t, xi, tau, self.domain.rho(), self.policy.eps_t)
    }

    pub fn grad_x_z(&self, x: [f64; 3], t: f64, xi: [f64; 3], tau: f64) -> Result<[f64; 3]> {
        grad_x_z(x, t, xi, tau, self.domain.rho(), self.policy.eps_t)
    }

    pub fn grad_xi_z(&self, x: [f64; 3], t: f64, xi: [f64; 3], tau: f64) -> Result<[f64; 3]> {
        grad_xi_z(x, t, xi, tau, self.domain.rho(), self.policy.eps_t)
    }

    fn spectral_1d(&self, axis: usize, x: f64, xi: f64, tau_d: f64, derivative: bool) -> f64 {
        let l = self.domain.lengths()[axis];
        let mut acc = 0.0;
        for k in 1..=self.policy.n_kernel {
            let kw = k as f64 * PI / l;
            let decay = exp(-kw * kw * tau_d);
            let sx = if derivative {
                kw * cos_pi(k as f64 * (x / l))
            } else {
                sin_pi(k as f64 * (x / l))
            };
            acc += decay * sx * sin_pi(k as f64 * (xi / l));
        }
        2.0 / l * acc
    }

    /// Image correction (all terms except the direct one) and the direct term.
    fn images_1d(&self, axis: usize, x: f64, xi: f64, tau_d: f64) -> (f64, f64) {
        let l = self.domain.lengths()[axis];
        let r = self.policy.r_images as i64;
        let mut correction = 0.0;
        for k in -r..=r {
            let shift = 2.0 * k as f64 * l;
            if k != 0 {
                correction += heat_1d(x - xi - shift, tau_d);
            }
            correction -= heat_1d(x + xi - shift, tau_d);
        }
        (correction, heat_1d(x - xi, tau_d))
    }

    /// Spectral Green function, symmetric in `(x, xi)` to the last bit.
    pub fn g_spectral(&self, x: [f64; 3], t: f64, xi: [f64; 3], tau: f64) -> Result<f64> {
        self.check_points(x, xi)?;
        let tau_d = self.diffusion_time(t, tau)?;
        Ok((0..3)
            .map(|a| self.spectral_1d(a, x[a], xi[a], tau_d, false))
            .product())
    }

    /// Gradient in `x` of the spectral Green function.
    pub fn grad_x_g_spectral(
        &self,
        x: [f64; 3],
        t: f64,
        xi: [f64; 3],
        tau: f64,
    ) -> Result<[f64; 3]> {
        self.check_points(x, xi)?;
        let tau_d = self.diffusion_time(t, tau)?;
        let g: [f64; 3] = core::array::from_fn(|a| self.spectral_1d(a, x[a], xi[a], tau_d, false));
        let dg: [f64; 3] = core::array::from_fn(|a| self.spectral_1d(a, x[a], xi[a], tau_d, true));
        Ok([
            dg[0] * g[1] * g[2],
            g[0] * dg[1] * g[2],
            g[0] * g[1] * dg[2],
        ])
    }

    /// Method-of-images Green function.
    pub fn g_images(&self, x: [f64; 3], t: f64, xi: [f64; 3], tau: f64) -> Result<f64> {
        self.check_points(x, xi)?;
        let tau_d = self.diffusion_time(t, tau)?;
        Ok((0..3)
            .map(|a| {
                let (c, k) = self.images_1d(a, x[a], xi[a], tau_d);
                k + c
            })
            .product())
    }

    fn uses_images(&self, tau_d: f64) -> bool {
        tau_d <= self.policy.crossover * sq(self.domain.min_length())
    }

    /// Green function from whichever construction is better conditioned.
    pub fn g(&self, x: [f64; 3], t: f64, xi: [f64; 3], tau: f64) -> Result<f64> {
        if self.uses_images(self.diffusion_time(t, tau)?) {
            self.g_images(x, t, xi, tau)
        } else {
            self.g_spectral(x, t, xi, tau)
        }
    }

    /// Corrector `V = G - Z`.
    ///
    /// For short times the image sum is expanded around its direct term so
    /// the subtraction of `Z` never cancels.
    pub fn v(&self, x: [f64; 3], t: f64, xi: [f64; 3], tau: f64) -> Result<f64> {
        self.check_points(x, xi)?;
        let tau_d = self.diffusion_time(t, tau)?;
        if self.uses_images(tau_d) {
            let parts: [(f64, f64); 3] =
                core::array::from_fn(|a| self.images_1d(a, x[a], xi[a], tau_d));
            let [(c1, k1), (c2, k2), (c3, k3)] = parts;
            let (g2, g3) = (k2 + c2, k3 + c3);
            Ok(c1 * g2 * g3 + k1 * c2 * g3 + k1 * k2 * c3)
        } else {
            Ok(self.g_spectral(x, t, xi, tau)? - z_unchecked(x, xi, tau_d))
        }
    }
}
