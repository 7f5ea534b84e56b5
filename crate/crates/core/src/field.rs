//! Sampled and spectral field containers.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{mode_flat, BoxDomain, SpatialGrid, TimeGrid};
use crate::error::{Error, Result};

/// Scalar samples on the `M^3` interior nodes of a [`SpatialGrid`], x3 fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    grid: SpatialGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: SpatialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_values(grid: SpatialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Dimension(format!(
                "grid of {} nodes given {} values",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: SpatialGrid, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, j: [usize; 3]) -> f64 {
        let m = self.grid.m();
        self.values[(j[0] * m + j[1]) * m + j[2]]
    }

    pub fn axpy(&mut self, alpha: f64, other: &GridField) {
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += alpha * b;
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// Three grid components.
pub type VectorField = [GridField; 3];

/// `K + 1` slices of a field over a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeField<F = GridField> {
    time: TimeGrid,
    slices: Vec<F>,
}

impl<F> SpaceTimeField<F> {
    pub fn new(time: TimeGrid, slices: Vec<F>) -> Result<Self> {
        if slices.len() != time.len() {
            return Err(Error::Dimension(format!(
                "time grid has {} knots, got {} slices",
                time.len(),
                slices.len()
            )));
        }
        Ok(Self { time, slices })
    }

    pub fn from_fn(time: TimeGrid, f: impl FnMut(f64) -> F) -> Self {
        let slices = time.knots().into_iter().map(f).collect();
        Self { time, slices }
    }

    pub fn time(&self) -> &TimeGrid {
        &self.time
    }

    pub fn slices(&self) -> &[F] {
        &self.slices
    }

    pub fn slices_mut(&mut self) -> &mut [F] {
        &mut self.slices
    }

    pub fn into_slices(self) -> Vec<F> {
        self.slices
    }
}

impl SpaceTimeField<GridField> {
    pub fn grid(&self) -> &SpatialGrid {
        self.slices[0].grid()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.slices
            .iter()
            .zip(&other.slices)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }
}

/// Sine coefficients over the truncation cube `[1, n]^3`; coefficient `n`
/// multiplies the normalized eigenfunction `u_n`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    domain: BoxDomain,
    n: usize,
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(domain: BoxDomain, n: usize) -> Self {
        Self {
            domain,
            n,
            coeffs: vec![0.0; n * n * n],
        }
    }

    pub fn from_coeffs(domain: BoxDomain, n: usize, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != n * n * n {
            return Err(Error::Dimension(format!(
                "truncation {n} needs {} coefficients, got {}",
                n * n * n,
                coeffs.len()
            )));
        }
        Ok(Self { domain, n, coeffs })
    }

    /// Single mode with the given amplitude.
    pub fn single(domain: BoxDomain, n: usize, index: [usize; 3], amplitude: f64) -> Result<Self> {
        if index.iter().any(|&k| k < 1 || k > n) {
            return Err(crate::error::invalid(format!(
                "mode {index:?} outside truncation {n}"
            )));
        }
        let mut f = Self::zeros(domain, n);
        f.coeffs[mode_flat(n, index)] = amplitude;
        Ok(f)
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn get(&self, index: [usize; 3]) -> f64 {
        self.coeffs[mode_flat(self.n, index)]
    }

    /// Sum of squared coefficients, the continuous `L2` norm squared.
    pub fn energy(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum()
    }

    /// Truncate or zero-pad to `n` modes per axis.
    pub fn resized(&self, n: usize) -> Self {
        Self {
            domain: self.domain,
            n,
            coeffs: resize_cube(&self.coeffs, self.n, n),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            domain: self.domain,
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| alpha * c).collect(),
        }
    }
}

pub(crate) fn resize_cube(coeffs: &[f64], from: usize, to: usize) -> Vec<f64> {
    if from == to {
        return coeffs.to_vec();
    }
    let mut out = vec![0.0; to * to * to];
    let c = from.min(to);
    for i in 0..c {
        for j in 0..c {
            let src = (i * from + j) * from;
            let dst = (i * to + j) * to;
            out[dst..dst + c].copy_from_slice(&coeffs[src..src + c]);
        }
    }
    out
}
