//! Fields expanded in products of sines and cosines over the box.
//!
//! Each axis carries either `sqrt(2/L) sin(n pi x / L)` or
//! `sqrt(2/L) cos(n pi x / L)` with `n >= 1`. Derivatives of Dirichlet
//! eigenfunctions stay in this family, and every member is an eigenfunction
//! of the Laplacian with the same eigenvalue `lambda_n` as its sine parent.
//! Inner products between sine and cosine families are evaluated with their
//! closed-form one-dimensional Gram matrices, so projections of fields that do
//! not vanish on the boundary are exact up to truncation.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::domain::{mode_flat, Basis, BoxDomain, SpatialGrid, TimeGrid};
use crate::error::{Error, Result};
use crate::field::{resize_cube, GridField, SpaceTimeField, SpectralField};
use crate::math::{fd_time_derivative, sqrt};
use crate::transform::{apply_separable, BasisTables, Mat};

/// Per-axis choice of sine or cosine; bit `a` set means cosine on axis `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Parity(pub u8);

impl Parity {
    pub const SINE: Parity = Parity(0);

    /// Cosine on `axis` only: the parity of `d u_n / d x_axis`.
    pub fn gradient(axis: usize) -> Parity {
        Parity(1 << axis)
    }

    pub fn cos_bit(self, axis: usize) -> usize {
        ((self.0 >> axis) & 1) as usize
    }

    pub fn flip(self, axis: usize) -> Parity {
        Parity(self.0 ^ (1 << axis))
    }

    pub fn all() -> impl Iterator<Item = Parity> {
        (0..8u8).map(Parity)
    }
}

/// `<phi_to_r, phi_from_c>` on `[0, L]` for 1-based indices; independent of `L`.
pub fn gram_1d(to_cos: bool, from_cos: bool, n_to: usize, n_from: usize) -> Mat {
    Mat::from_fn(n_to, n_from, |r, c| {
        let (n, m) = ((r + 1) as f64, (c + 1) as f64);
        if to_cos == from_cos {
            return if r == c { 1.0 } else { 0.0 };
        }
        if (r + c) % 2 == 1 {
            // n + m odd
            let s = if to_cos { m } else { n };
            4.0 * s / (PI * (if to_cos { m * m - n * n } else { n * n - m * m }))
        } else {
            0.0
        }
    })
}

fn identity_resize(n_to: usize, n_from: usize) -> Mat {
    Mat::from_fn(n_to, n_from, |r, c| if r == c { 1.0 } else { 0.0 })
}

/// Express coefficients of parity `from` (size `n_from`) as inner products
/// against the basis of parity `to` (size `n_to`).
pub fn change_parity(
    coeffs: &[f64],
    from: Parity,
    n_from: usize,
    to: Parity,
    n_to: usize,
) -> Vec<f64> {
    let mats: [Option<Mat>; 3] = core::array::from_fn(|a| {
        let (tb, fb) = (to.cos_bit(a) == 1, from.cos_bit(a) == 1);
        if tb == fb {
            (n_to != n_from).then(|| identity_resize(n_to, n_from))
        } else {
            Some(gram_1d(tb, fb, n_to, n_from))
        }
    });
    let refs = [mats[0].as_ref(), mats[1].as_ref(), mats[2].as_ref()];
    apply_separable(coeffs, [n_from; 3], refs).0
}

/// A field written as a sum over the eight sine/cosine parities.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigSeries {
    domain: BoxDomain,
    n: usize,
    parts: [Vec<f64>; 8],
}

impl TrigSeries {
    pub fn zeros(domain: BoxDomain, n: usize) -> Self {
        Self {
            domain,
            n,
            parts: Default::default(),
        }
    }

    pub fn from_sine(field: &SpectralField) -> Self {
        let mut s = Self::zeros(*field.domain(), field.n());
        s.parts[0] = field.coeffs().to_vec();
        s
    }

    /// Coefficients of a single parity.
    pub fn from_part(
        domain: BoxDomain,
        n: usize,
        parity: Parity,
        coeffs: Vec<f64>,
    ) -> Result<Self> {
        if coeffs.len() != n * n * n {
            return Err(Error::Dimension(
                "coefficient count does not match truncation".into(),
            ));
        }
        let mut s = Self::zeros(domain, n);
        s.parts[parity.0 as usize] = coeffs;
        Ok(s)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn part(&self, parity: Parity) -> Option<&[f64]> {
        let p = &self.parts[parity.0 as usize];
        (!p.is_empty()).then_some(p.as_slice())
    }

    pub fn part_mut(&mut self, parity: Parity) -> &mut Vec<f64> {
        let len = self.n * self.n * self.n;
        let p = &mut self.parts[parity.0 as usize];
        if p.is_empty() {
            *p = vec![0.0; len];
        }
        p
    }

    pub fn parities(&self) -> impl Iterator<Item = Parity> + '_ {
        Parity::all().filter(|p| !self.parts[p.0 as usize].is_empty())
    }

    pub fn is_zero(&self) -> bool {
        self.parts.iter().all(|p| p.iter().all(|v| *v == 0.0))
    }

    /// Truncate or zero-pad every part to `n` modes per axis.
    pub fn resized(&self, n: usize) -> Self {
        let parts = core::array::from_fn(|p| {
            let c = &self.parts[p];
            if c.is_empty() {
                Vec::new()
            } else {
                resize_cube(c, self.n, n)
            }
        });
        Self {
            domain: self.domain,
            n,
            parts,
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        let parts = core::array::from_fn(|p| self.parts[p].iter().map(|v| alpha * v).collect());
        Self {
            domain: self.domain,
            n: self.n,
            parts,
        }
    }

    /// `self += alpha * other`; `other` is resized to this truncation.
    pub fn axpy(&mut self, alpha: f64, other: &TrigSeries) {
        let resized;
        let src = if other.n == self.n {
            other
        } else {
            resized = other.resized(self.n);
            &resized
        };
        for (p, part) in src.parts.iter().enumerate() {
            if part.is_empty() {
                continue;
            }
            let dst = self.part_mut(Parity(p as u8));
            for (d, s) in dst.iter_mut().zip(part) {
                *d += alpha * s;
            }
        }
    }

    /// Multiply the coefficient of every mode by `f(flat mode index)`.
    pub fn scale_modes(&mut self, f: impl Fn(usize) -> f64) {
        for part in self.parts.iter_mut() {
            for (i, v) in part.iter_mut().enumerate() {
                *v *= f(i);
            }
        }
    }

    /// Exact partial derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        let n = self.n;
        let k: Vec<f64> = (1..=n).map(|j| self.domain.wavenumber(axis, j)).collect();
        let mut out = Self::zeros(self.domain, n);
        for parity in self.parities() {
            let sign = if parity.cos_bit(axis) == 0 { 1.0 } else { -1.0 };
            let src = &self.parts[parity.0 as usize];
            let dst = out.part_mut(parity.flip(axis));
            for (i, (d, s)) in dst.iter_mut().zip(src).enumerate() {
                let ja = match axis {
                    0 => i / (n * n),
                    1 => (i / n) % n,
                    _ => i % n,
                };
                *d += sign * k[ja] * s;
            }
        }
        out
    }

    pub fn gradient(&self) -> [TrigSeries; 3] {
        core::array::from_fn(|a| self.derivative(a))
    }

    pub fn laplacian(&self) -> Self {
        let lam = eigenvalues(&self.domain, self.n);
        let mut out = self.clone();
        out.scale_modes(|i| -lam[i]);
        out
    }

    /// Inner products `<phi_n, self>` against the basis of `target` parity,
    /// truncated to `n_out` modes per axis.
    pub fn project(&self, target: Parity, n_out: usize) -> Vec<f64> {
        let mut acc = vec![0.0; n_out * n_out * n_out];
        for parity in self.parities() {
            let c = change_parity(
                &self.parts[parity.0 as usize],
                parity,
                self.n,
                target,
                n_out,
            );
            for (a, v) in acc.iter_mut().zip(&c) {
                *a += v;
            }
        }
        acc
    }

    /// Orthogonal projection onto the Dirichlet sine basis.
    pub fn sine_projection(&self, n_out: usize) -> SpectralField {
        SpectralField::from_coeffs(self.domain, n_out, self.project(Parity::SINE, n_out))
            .expect("sized")
    }

    /// Exact continuous `L2(Omega)` inner product.
    pub fn inner(&self, other: &TrigSeries) -> f64 {
        let mut total = 0.0;
        for p in self.parities() {
            let mine = &self.parts[p.0 as usize];
            let theirs = other.project(p, self.n);
            total += mine.iter().zip(&theirs).map(|(a, b)| a * b).sum::<f64>();
        }
        total
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self).max(0.0)
    }

    pub fn norm(&self) -> f64 {
        sqrt(self.norm_sq())
    }

    /// Values at the nodes of `tables` (whose truncation must match).
    pub fn sample(&self, tables: &BasisTables) -> Vec<f64> {
        let resized;
        let src = if tables.n() == self.n {
            self
        } else {
            resized = self.resized(tables.n());
            &resized
        };
        let mut out = vec![0.0; tables.nodes().len()];
        for p in src.parities() {
            let v = tables.synthesize(p, &src.parts[p.0 as usize]);
            for (o, x) in out.iter_mut().zip(&v) {
                *o += x;
            }
        }
        out
    }

    pub fn sample_grid(&self, grid: &SpatialGrid) -> GridField {
        let tables = BasisTables::for_grid(grid, self.n);
        GridField::from_values(*grid, self.sample(&tables)).expect("grid sized")
    }

    /// Pointwise evaluation (slow; for tests and probes).
    pub fn eval(&self, x: [f64; 3]) -> f64 {
        let l = self.domain.lengths();
        let n = self.n;
        let tab: [[Vec<f64>; 2]; 3] = core::array::from_fn(|a| {
            let s = sqrt(2.0 / l[a]);
            [
                (1..=n)
                    .map(|k| s * crate::math::sin_pi(k as f64 * (x[a] / l[a])))
                    .collect(),
                (1..=n)
                    .map(|k| s * crate::math::cos_pi(k as f64 * (x[a] / l[a])))
                    .collect(),
            ]
        });
        let mut total = 0.0;
        for p in self.parities() {
            let c = &self.parts[p.0 as usize];
            for i in 1..=n {
                for j in 1..=n {
                    for k in 1..=n {
                        total += c[mode_flat(n, [i, j, k])]
                            * tab[0][p.cos_bit(0)][i - 1]
                            * tab[1][p.cos_bit(1)][j - 1]
                            * tab[2][p.cos_bit(2)][k - 1];
                    }
                }
            }
        }
        total
    }
}

pub(crate) fn eigenvalues(domain: &BoxDomain, n: usize) -> Vec<f64> {
    Basis::new(*domain, n)
        .expect("n >= 1")
        .eigenvalues()
        .to_vec()
}

/// A [`TrigSeries`] at every knot of a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesHistory {
    time: TimeGrid,
    slices: Vec<TrigSeries>,
}

impl SeriesHistory {
    pub fn new(time: TimeGrid, slices: Vec<TrigSeries>) -> Result<Self> {
        if slices.len() != time.len() {
            return Err(Error::Dimension("one series per time knot required".into()));
        }
        Ok(Self { time, slices })
    }

    pub fn zeros(time: TimeGrid, domain: BoxDomain, n: usize) -> Self {
        Self {
            time,
            slices: vec![TrigSeries::zeros(domain, n); time.len()],
        }
    }

    pub fn from_sine(time: TimeGrid, fields: &[SpectralField]) -> Result<Self> {
        Self::new(time, fields.iter().map(TrigSeries::from_sine).collect())
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn slices(&self) -> &[TrigSeries] {
        &self.slices
    }

    pub fn slices_mut(&mut self) -> &mut [TrigSeries] {
        &mut self.slices
    }

    pub fn n(&self) -> usize {
        self.slices[0].n()
    }

    pub fn domain(&self) -> &BoxDomain {
        self.slices[0].domain()
    }

    pub fn map(&self, f: impl Fn(&TrigSeries) -> TrigSeries) -> Self {
        Self {
            time: self.time,
            slices: self.slices.iter().map(f).collect(),
        }
    }

    pub fn zip_map(
        &self,
        other: &Self,
        f: impl Fn(&TrigSeries, &TrigSeries) -> TrigSeries,
    ) -> Self {
        Self {
            time: self.time,
            slices: self
                .slices
                .iter()
                .zip(&other.slices)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// `self + alpha * other` slice by slice.
    pub fn plus(&self, alpha: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| {
            let mut c = a.clone();
            c.axpy(alpha, b);
            c
        })
    }

    pub fn sine_projection(&self, n_out: usize) -> Vec<SpectralField> {
        self.slices
            .iter()
            .map(|s| s.sine_projection(n_out))
            .collect()
    }

    /// `L2(Q_t)` norm, exact in space and trapezoidal in time.
    pub fn l2_norm(&self) -> f64 {
        let w = self.time.trapezoid_weights();
        sqrt(
            self.slices
                .iter()
                .zip(&w)
                .map(|(s, w)| w * s.norm_sq())
                .sum(),
        )
    }

    pub fn l2_norm_sq_weighted(&self, weights: &[f64]) -> f64 {
        self.slices
            .iter()
            .zip(weights)
            .map(|(s, w)| w * s.norm_sq())
            .sum()
    }

    /// Second-order finite-difference time derivative of every coefficient.
    pub fn time_derivative(&self) -> Self {
        let dt = self.time.dt();
        let n = self.n();
        let domain = *self.domain();
        let len = n * n * n;
        let kn = self.time.len();
        let mut out = vec![TrigSeries::zeros(domain, n); kn];
        let mut traj = vec![0.0; kn];
        let mut deriv = vec![0.0; kn];
        for parity in Parity::all() {
            if self.slices.iter().all(|s| s.part(parity).is_none()) {
                continue;
            }
            for o in out.iter_mut() {
                o.part_mut(parity);
            }
            for i in 0..len {
                for (t, s) in traj.iter_mut().zip(&self.slices) {
                    *t = s.part(parity).map_or(0.0, |c| c[i]);
                }
                fd_time_derivative(&traj, dt, &mut deriv);
                for (o, d) in out.iter_mut().zip(&deriv) {
                    o.parts[parity.0 as usize][i] = *d;
                }
            }
        }
        Self {
            time: self.time,
            slices: out,
        }
    }

    /// `(d/dt - rho Laplace)` with a finite-difference time derivative and the
    /// exact modal Laplacian.
    pub fn heat_operator(&self) -> Self {
        let rho = self.domain().rho();
        let mut out = self.time_derivative();
        for (o, s) in out.slices.iter_mut().zip(&self.slices) {
            o.axpy(-rho, &s.laplacian());
        }
        out
    }

    pub fn sample_grid(&self, grid: &SpatialGrid) -> SpaceTimeField<GridField> {
        let tables = BasisTables::for_grid(grid, self.n());
        let slices = self
            .slices
            .iter()
            .map(|s| GridField::from_values(*grid, s.sample(&tables)).expect("grid sized"))
            .collect();
        SpaceTimeField::new(self.time, slices).expect("one slice per knot")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::gauss_legendre;
    use crate::transform::NodeSet;

    #[test]
    fn gram_matches_quadrature() {
        let l = 1.7;
        let (x, w) = gauss_legendre(60, l);
        let s = sqrt(2.0 / l);
        let g = gram_1d(false, true, 6, 6);
        let gt = gram_1d(true, false, 6, 6);
        for n in 1..=6 {
            for m in 1..=6 {
                let q: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(x, w)| {
                        w * s * (n as f64 * PI * x / l).sin() * s * (m as f64 * PI * x / l).cos()
                    })
                    .sum();
                assert!((g.get(n - 1, m - 1) - q).abs() < 1e-13, "sin{n} cos{m}");
                assert!((gt.get(m - 1, n - 1) - q).abs() < 1e-13, "cos{m} sin{n}");
            }
        }
    }

    #[test]
    fn inner_product_matches_gauss_quadrature() {
        let d = BoxDomain::new([1.0, 1.3, 0.9], 1.0).unwrap();
        let n = 4;
        let mut s = TrigSeries::zeros(d, n);
        for (p, seed) in [(Parity(0), 1.0), (Parity(1), -0.5), (Parity(6), 0.3)] {
            let c = s.part_mut(p);
            for (i, v) in c.iter_mut().enumerate() {
                *v = seed / (1.0 + i as f64);
            }
        }
        let nodes = NodeSet::gauss_legendre(&d, 40);
        let tables = BasisTables::new(d, n, nodes.clone());
        let vals = s.sample(&tables);
        let quad = nodes.weighted_energy(&vals);
        assert!((s.norm_sq() - quad).abs() < 1e-11 * quad);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let d = BoxDomain::unit_cube();
        let mut s = TrigSeries::zeros(d, 3);
        s.part_mut(Parity(0))[5] = 1.0;
        s.part_mut(Parity(2))[7] = 0.4;
        let x = [0.31, 0.47, 0.62];
        let h = 1e-5;
        for a in 0..3 {
            let mut xp = x;
            let mut xm = x;
            xp[a] += h;
            xm[a] -= h;
            let fd = (s.eval(xp) - s.eval(xm)) / (2.0 * h);
            assert!((s.derivative(a).eval(x) - fd).abs() < 1e-6);
        }
    }
}
