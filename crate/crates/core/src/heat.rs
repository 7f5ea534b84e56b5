//! Heat-operator calculus on the box: `T`, `T*`, the Dirichlet inverse
//! Laplacian, Duhamel potentials and free decay.
//!
//! Duhamel integrals are never computed by quadrature against the kernel.
//! Each mode obeys `h' = g - rho lambda h`, which is advanced with an
//! exponential update that is exact when `g` is piecewise linear in time.

use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{Basis, SpatialGrid, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::field::{GridField, SpaceTimeField, SpectralField};
use crate::math::{exp, expm1, fd_time_derivative};
use crate::series::{eigenvalues, SeriesHistory, TrigSeries};
use crate::transform::{fd_laplacian, forward_sine, inverse_sine, spectral_laplacian};

/// One step of the exponential integrator for `h' = g - a h`:
/// `h_{k+1} = decay h_k + c0 g_k + c1 g_{k+1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtdStep {
    pub decay: f64,
    pub c0: f64,
    pub c1: f64,
}

impl EtdStep {
    /// Coefficients for rate `a = rho lambda >= 0` and step `dt`.
    pub fn new(a: f64, dt: f64) -> Self {
        let theta = a * dt;
        if theta < 1e-5 {
            let t2 = theta * theta;
            let t3 = t2 * theta;
            return Self {
                decay: exp(-theta),
                c0: dt * (0.5 - theta / 3.0 + t2 / 8.0 - t3 / 30.0),
                c1: dt * (0.5 - theta / 6.0 + t2 / 24.0 - t3 / 120.0),
            };
        }
        let decay = exp(-theta);
        if theta < 0.5 {
            // the closed form still cancels here; sum the series to 20 terms
            let (mut s0, mut s01, mut term) = (0.0, 0.0, 1.0);
            for j in 0..20 {
                // term = (-theta)^j / (j + 1)!
                term /= (j + 1) as f64;
                s01 += term;
                s0 += term * (j + 1) as f64 / (j + 2) as f64;
                term *= -theta;
            }
            return Self {
                decay,
                c0: dt * s0,
                c1: dt * (s01 - s0),
            };
        }
        let one_minus = -expm1(-theta);
        let c0 = (one_minus - theta * decay) / (a * theta);
        let c1 = one_minus / a - c0;
        Self { decay, c0, c1 }
    }

    #[inline]
    pub fn advance(&self, h: f64, g0: f64, g1: f64) -> f64 {
        self.decay * h + self.c0 * g0 + self.c1 * g1
    }
}

/// Duhamel response of one scalar trajectory; `out[0] = 0`.
pub fn duhamel_scalar(g: &[f64], rate: f64, dt: f64, out: &mut [f64]) {
    debug_assert_eq!(g.len(), out.len());
    let step = EtdStep::new(rate, dt);
    let mut h = 0.0;
    if let Some(first) = out.first_mut() {
        *first = 0.0;
    }
    for k in 1..g.len() {
        h = step.advance(h, g[k - 1], g[k]);
        out[k] = h;
    }
}

/// Sine-coefficient trajectories `g_n(t_k)` and their Duhamel responses `h_n(t_k)`.
///
/// Storage is time-major: entry `k * modes + flat(n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeHistory {
    basis: Basis,
    time: TimeGrid,
    forcing: Vec<f64>,
    response: Vec<f64>,
}

impl ModeHistory {
    /// Integrates `h_n' = g_n - rho lambda_n h_n`, `h_n(0) = 0` for every mode.
    pub fn integrate(time: TimeGrid, forcing: &[SpectralField]) -> Result<Self> {
        if forcing.len() != time.len() {
            return Err(Error::Dimension(
                "one coefficient set per time knot required".into(),
            ));
        }
        let domain = *forcing[0].domain();
        let n = forcing[0].n();
        if forcing.iter().any(|f| f.n() != n) {
            return Err(Error::Dimension(
                "coefficient sets disagree on the truncation".into(),
            ));
        }
        let basis = Basis::new(domain, n)?;
        let modes = basis.len();
        let kn = time.len();
        let mut g = vec![0.0; kn * modes];
        for (k, f) in forcing.iter().enumerate() {
            g[k * modes..(k + 1) * modes].copy_from_slice(f.coeffs());
        }
        let mut h = vec![0.0; kn * modes];
        let dt = time.dt();
        let rho = domain.rho();
        for (i, lambda) in basis.eigenvalues().iter().enumerate() {
            let step = EtdStep::new(rho * lambda, dt);
            let mut acc = 0.0;
            for k in 1..kn {
                acc = step.advance(acc, g[(k - 1) * modes + i], g[k * modes + i]);
                h[k * modes + i] = acc;
            }
        }
        Ok(Self {
            basis,
            time,
            forcing: g,
            response: h,
        })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    fn slice(&self, data: &[f64], k: usize) -> SpectralField {
        let m = self.basis.len();
        SpectralField::from_coeffs(
            *self.basis.domain(),
            self.basis.n(),
            data[k * m..(k + 1) * m].to_vec(),
        )
        .expect("sized by construction")
    }

    pub fn forcing_at(&self, k: usize) -> SpectralField {
        self.slice(&self.forcing, k)
    }

    pub fn response_at(&self, k: usize) -> SpectralField {
        self.slice(&self.response, k)
    }

    /// `h_n` trajectory of one mode.
    pub fn response_trajectory(&self, index: [usize; 3]) -> Vec<f64> {
        let m = self.basis.len();
        let i = self.basis.flat(index);
        (0..self.time.len())
            .map(|k| self.response[k * m + i])
            .collect()
    }

    /// Exact modal derivative `g_n - rho lambda_n h_n` at knot `k`.
    pub fn derivative_at(&self, k: usize) -> SpectralField {
        let m = self.basis.len();
        let rho = self.basis.domain().rho();
        let coeffs = (0..m)
            .map(|i| {
                self.forcing[k * m + i]
                    - rho * self.basis.eigenvalues()[i] * self.response[k * m + i]
            })
            .collect();
        SpectralField::from_coeffs(*self.basis.domain(), self.basis.n(), coeffs)
            .expect("sized by construction")
    }
}

/// Duhamel response of every coefficient of a mixed-parity history.
///
/// All parities share the eigenvalue `lambda_n` of their index triple.
pub fn duhamel_series(forcing: &SeriesHistory) -> SeriesHistory {
    let time = *forcing.time();
    let domain = *forcing.domain();
    let n = forcing.n();
    let lambdas = eigenvalues(&domain, n);
    let rho = domain.rho();
    let kn = time.len();
    let mut out = vec![TrigSeries::zeros(domain, n); kn];
    let steps: Vec<EtdStep> = lambdas
        .iter()
        .map(|l| EtdStep::new(rho * l, time.dt()))
        .collect();
    for parity in crate::series::Parity::all() {
        if forcing.slices().iter().all(|s| s.part(parity).is_none()) {
            continue;
        }
        let mut h = vec![0.0; lambdas.len()];
        out[0].part_mut(parity);
        for (k, slot) in out.iter_mut().enumerate().skip(1) {
            let g0 = forcing.slices()[k - 1].part(parity);
            let g1 = forcing.slices()[k].part(parity);
            for (i, step) in steps.iter().enumerate() {
                let a = g0.map_or(0.0, |c| c[i]);
                let b = g1.map_or(0.0, |c| c[i]);
                h[i] = step.advance(h[i], a, b);
            }
            slot.part_mut(parity).copy_from_slice(&h);
        }
    }
    SeriesHistory::new(time, out).expect("one slice per knot")
}

/// Which spatial Laplacian the heat operators use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Laplacian {
    /// Seven-point stencil with zero ghost values on the faces.
    FiniteDifference,
    /// Exact `-lambda_n` multiplier on the full grid sine transform.
    Spectral,
}

fn laplacian(field: &GridField, kind: Laplacian) -> GridField {
    match kind {
        Laplacian::FiniteDifference => fd_laplacian(field),
        Laplacian::Spectral => spectral_laplacian(field),
    }
}

fn heat_like(field: &SpaceTimeField, kind: Laplacian, time_sign: f64) -> Result<SpaceTimeField> {
    let time = *field.time();
    if time.steps() < 2 {
        return Err(invalid("heat operator needs at least 2 time steps"));
    }
    let grid = *field.grid();
    let kn = time.len();
    let points = grid.len();
    let mut out: Vec<GridField> = field
        .slices()
        .iter()
        .map(|s| laplacian(s, kind).scaled(-grid.domain().rho()))
        .collect();
    let mut traj = vec![0.0; kn];
    let mut deriv = vec![0.0; kn];
    for p in 0..points {
        for (t, s) in traj.iter_mut().zip(field.slices()) {
            *t = s.values()[p];
        }
        fd_time_derivative(&traj, time.dt(), &mut deriv);
        for (o, d) in out.iter_mut().zip(&deriv) {
            o.values_mut()[p] += time_sign * d;
        }
    }
    SpaceTimeField::new(time, out)
}

/// `T u = du/dt - rho Laplace u`.
pub fn apply_t(field: &SpaceTimeField, kind: Laplacian) -> Result<SpaceTimeField> {
    heat_like(field, kind, 1.0)
}

/// Adjoint `T* u = -du/dt - rho Laplace u`.
pub fn apply_t_star(field: &SpaceTimeField, kind: Laplacian) -> Result<SpaceTimeField> {
    heat_like(field, kind, -1.0)
}

/// Dirichlet inverse Laplacian on the grid: coefficient `n` scaled by `-1/lambda_n`.
pub fn inverse_laplacian(field: &GridField) -> GridField {
    let grid = *field.grid();
    let mut coeffs = forward_sine(field, grid.m()).expect("full grid transform");
    let lambdas = eigenvalues(grid.domain(), grid.m());
    for (c, l) in coeffs.coeffs_mut().iter_mut().zip(&lambdas) {
        *c /= -l;
    }
    inverse_sine(&coeffs, &grid).expect("grid holds the band")
}

/// Duhamel potential of `forcing`, truncated to `n` modes per axis and
/// synthesized on the forcing's grid.
pub fn heat_potential(forcing: &SpaceTimeField, n: usize) -> Result<SpaceTimeField> {
    let grid = *forcing.grid();
    let coeffs = forcing
        .slices()
        .iter()
        .map(|s| forward_sine(s, n))
        .collect::<Result<Vec<_>>>()?;
    let history = ModeHistory::integrate(*forcing.time(), &coeffs)?;
    synthesize_history(&history, &grid)
}

fn synthesize_history(history: &ModeHistory, grid: &SpatialGrid) -> Result<SpaceTimeField> {
    let slices = (0..history.time().len())
        .map(|k| inverse_sine(&history.response_at(k), grid))
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(*history.time(), slices)
}

/// Modal coefficients of the free decay `sum c_n exp(-rho lambda_n t) u_n` at every knot.
pub fn homogeneous_coefficients(initial: &SpectralField, time: &TimeGrid) -> Vec<SpectralField> {
    let domain = *initial.domain();
    let lambdas = eigenvalues(&domain, initial.n());
    let rho = domain.rho();
    (0..time.len())
        .map(|k| {
            let t = time.knot(k);
            let mut c = initial.clone();
            for (v, l) in c.coeffs_mut().iter_mut().zip(&lambdas) {
                *v *= exp(-rho * l * t);
            }
            c
        })
        .collect()
}

/// Free decay of `initial` sampled on `grid`.
pub fn homogeneous_solution(
    initial: &SpectralField,
    time: &TimeGrid,
    grid: &SpatialGrid,
) -> Result<SpaceTimeField> {
    let slices = homogeneous_coefficients(initial, time)
        .iter()
        .map(|c| inverse_sine(c, grid))
        .collect::<Result<Vec<_>>>()?;
    SpaceTimeField::new(*time, slices)
}
