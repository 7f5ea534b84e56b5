//! Closed-form Stokes solutions used as oracles.
//!
//! The velocity is `curl(0, 0, chi)` with `chi = s(t) prod sin^2(pi x_i / L_i)`,
//! so it is divergence-free, vanishes on the faces and at `t = 0`. The forcing
//! is `w = du/dt - rho Laplace u - grad p`, matching `T u = w + grad p`.

use core::f64::consts::PI;

use crate::domain::BoxDomain;
use crate::math::{cos, sin};

/// Time amplitude `s(t)` of the manufactured fields.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeProfile {
    /// `s = t^2`
    Quadratic,
    /// `s = sin t`
    Sine,
}

impl TimeProfile {
    fn value(self, t: f64) -> f64 {
        match self {
            TimeProfile::Quadratic => t * t,
            TimeProfile::Sine => sin(t),
        }
    }

    fn rate(self, t: f64) -> f64 {
        match self {
            TimeProfile::Quadratic => 2.0 * t,
            TimeProfile::Sine => cos(t),
        }
    }
}

/// Spatial shape of the manufactured pressure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PressurePattern {
    Zero,
    /// `prod cos(pi x_i / L_i)`
    CosineProduct,
    /// `x_1^2 + x_2 x_3`
    Polynomial,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedCase {
    pub domain: BoxDomain,
    pub profile: TimeProfile,
    pub pressure: PressurePattern,
    /// Scale of the velocity; zero gives the trivial case when the pressure is zero too.
    pub velocity_scale: f64,
}

/// `f = sin^2(k x)` and its first three derivatives.
fn shape(k: f64, x: f64) -> [f64; 4] {
    let s = sin(k * x);
    let (s2, c2) = (sin(2.0 * k * x), cos(2.0 * k * x));
    [s * s, k * s2, 2.0 * k * k * c2, -4.0 * k * k * k * s2]
}

impl ManufacturedCase {
    pub fn new(domain: BoxDomain, profile: TimeProfile, pressure: PressurePattern) -> Self {
        Self {
            domain,
            profile,
            pressure,
            velocity_scale: 1.0,
        }
    }

    pub fn trivial(domain: BoxDomain) -> Self {
        Self {
            domain,
            profile: TimeProfile::Quadratic,
            pressure: PressurePattern::Zero,
            velocity_scale: 0.0,
        }
    }

    fn shapes(&self, x: [f64; 3]) -> [[f64; 4]; 3] {
        let l = self.domain.lengths();
        core::array::from_fn(|a| shape(PI / l[a], x[a]))
    }

    /// Spatial part of `u*` (multiply by `s(t)`).
    fn velocity_shape(&self, x: [f64; 3]) -> [f64; 3] {
        let [f1, f2, f3] = self.shapes(x);
        let c = self.velocity_scale;
        [c * f1[0] * f2[1] * f3[0], -c * f1[1] * f2[0] * f3[0], 0.0]
    }

    fn velocity_laplacian_shape(&self, x: [f64; 3]) -> [f64; 3] {
        let [f1, f2, f3] = self.shapes(x);
        let c = self.velocity_scale;
        [
            c * (f1[2] * f2[1] * f3[0] + f1[0] * f2[3] * f3[0] + f1[0] * f2[1] * f3[2]),
            -c * (f1[3] * f2[0] * f3[0] + f1[1] * f2[2] * f3[0] + f1[1] * f2[0] * f3[2]),
            0.0,
        ]
    }

    pub fn velocity(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let s = self.profile.value(t);
        self.velocity_shape(x).map(|v| s * v)
    }

    pub fn velocity_dt(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let s = self.profile.rate(t);
        self.velocity_shape(x).map(|v| s * v)
    }

    pub fn velocity_laplacian(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let s = self.profile.value(t);
        self.velocity_laplacian_shape(x).map(|v| s * v)
    }

    /// `grad u*` as rows `d u_i / d x_a`.
    pub fn velocity_gradient(&self, x: [f64; 3], t: f64) -> [[f64; 3]; 3] {
        let [f1, f2, f3] = self.shapes(x);
        let c = self.velocity_scale * self.profile.value(t);
        [
            [
                c * f1[1] * f2[1] * f3[0],
                c * f1[0] * f2[2] * f3[0],
                c * f1[0] * f2[1] * f3[1],
            ],
            [
                -c * f1[2] * f2[0] * f3[0],
                -c * f1[1] * f2[1] * f3[0],
                -c * f1[1] * f2[0] * f3[1],
            ],
            [0.0; 3],
        ]
    }

    pub fn divergence(&self, x: [f64; 3], t: f64) -> f64 {
        let g = self.velocity_gradient(x, t);
        g[0][0] + g[1][1] + g[2][2]
    }

    pub fn pressure(&self, x: [f64; 3], t: f64) -> f64 {
        let s = self.profile.value(t);
        let l = self.domain.lengths();
        match self.pressure {
            PressurePattern::Zero => 0.0,
            PressurePattern::CosineProduct => {
                s * (0..3).map(|a| cos(PI * x[a] / l[a])).product::<f64>()
            }
            PressurePattern::Polynomial => s * (x[0] * x[0] + x[1] * x[2]),
        }
    }

    pub fn pressure_gradient(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let s = self.profile.value(t);
        let l = self.domain.lengths();
        match self.pressure {
            PressurePattern::Zero => [0.0; 3],
            PressurePattern::CosineProduct => {
                let k: [f64; 3] = core::array::from_fn(|a| PI / l[a]);
                let c: [f64; 3] = core::array::from_fn(|a| cos(k[a] * x[a]));
                let sn: [f64; 3] = core::array::from_fn(|a| sin(k[a] * x[a]));
                [
                    -s * k[0] * sn[0] * c[1] * c[2],
                    -s * k[1] * c[0] * sn[1] * c[2],
                    -s * k[2] * c[0] * c[1] * sn[2],
                ]
            }
            PressurePattern::Polynomial => [2.0 * s * x[0], s * x[2], s * x[1]],
        }
    }

    /// `w = du*/dt - rho Laplace u* - grad p*`.
    pub fn forcing(&self, x: [f64; 3], t: f64) -> [f64; 3] {
        let rho = self.domain.rho();
        let ut = self.velocity_dt(x, t);
        let lap = self.velocity_laplacian(x, t);
        let gp = self.pressure_gradient(x, t);
        core::array::from_fn(|i| ut[i] - rho * lap[i] - gp[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cases() -> [ManufacturedCase; 2] {
        let d = BoxDomain::new([1.0, 1.3, 0.9], 0.7).unwrap();
        [
            ManufacturedCase::new(d, TimeProfile::Quadratic, PressurePattern::CosineProduct),
            ManufacturedCase::new(d, TimeProfile::Sine, PressurePattern::Polynomial),
        ]
    }

    #[test]
    fn divergence_free_and_vanishing_on_faces() {
        for case in cases() {
            let l = case.domain.lengths();
            let m = 32;
            let mut worst: f64 = 0.0;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let x = [
                            l[0] * i as f64 / 31.0,
                            l[1] * j as f64 / 31.0,
                            l[2] * k as f64 / 31.0,
                        ];
                        for t in [0.0, 0.1, 0.5] {
                            worst = worst.max(case.divergence(x, t).abs());
                        }
                    }
                }
            }
            assert!(worst <= 1e-12, "{worst}");
            for x in [
                [0.0, 0.4, 0.3],
                [l[0], 0.4, 0.3],
                [0.2, 0.0, 0.5],
                [0.2, l[1], 0.5],
                [0.2, 0.4, l[2]],
            ] {
                assert!(case.velocity(x, 0.4).iter().all(|v| v.abs() < 1e-15));
            }
            assert!(case
                .velocity([0.3, 0.4, 0.5], 0.0)
                .iter()
                .all(|v| *v == 0.0));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-4;
        for case in cases() {
            let x = [0.31, 0.57, 0.44];
            let t = 0.35;
            let lap = case.velocity_laplacian(x, t);
            let grad = case.velocity_gradient(x, t);
            let gp = case.pressure_gradient(x, t);
            let ut = case.velocity_dt(x, t);
            let fd_t: [f64; 3] = {
                let (a, b) = (case.velocity(x, t + h), case.velocity(x, t - h));
                core::array::from_fn(|i| (a[i] - b[i]) / (2.0 * h))
            };
            for i in 0..3 {
                assert!((ut[i] - fd_t[i]).abs() < 1e-6);
                let mut fd_lap = 0.0;
                for a in 0..3 {
                    let mut xp = x;
                    let mut xm = x;
                    xp[a] += h;
                    xm[a] -= h;
                    let (up, um, u0) = (
                        case.velocity(xp, t)[i],
                        case.velocity(xm, t)[i],
                        case.velocity(x, t)[i],
                    );
                    fd_lap += (up - 2.0 * u0 + um) / (h * h);
                    assert!((grad[i][a] - (up - um) / (2.0 * h)).abs() < 1e-6);
                    if i == 0 {
                        let fd_p = (case.pressure(xp, t) - case.pressure(xm, t)) / (2.0 * h);
                        assert!((gp[a] - fd_p).abs() < 1e-6);
                    }
                }
                assert!((lap[i] - fd_lap).abs() < 1e-4, "{} {}", lap[i], fd_lap);
            }
        }
    }

    #[test]
    fn forcing_balances_the_heat_operator() {
        for case in cases() {
            let rho = case.domain.rho();
            let x = [0.2, 0.9, 0.6];
            for t in [0.0, 0.25, 0.5] {
                let w = case.forcing(x, t);
                let ut = case.velocity_dt(x, t);
                let lap = case.velocity_laplacian(x, t);
                let gp = case.pressure_gradient(x, t);
                for i in 0..3 {
                    assert!((ut[i] - rho * lap[i] - gp[i] - w[i]).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn trivial_case_has_zero_forcing() {
        let c = ManufacturedCase::trivial(BoxDomain::unit_cube());
        assert_eq!(c.forcing([0.3, 0.2, 0.1], 0.4), [0.0; 3]);
    }
}
