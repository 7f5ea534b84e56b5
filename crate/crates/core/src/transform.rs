//! Separable sine/cosine transforms between grid samples and modal coefficients.
//!
//! Every transform is a sequence of one-axis matrix contractions with a fixed
//! loop order, so results do not depend on how callers schedule work.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::domain::{BoxDomain, SpatialGrid};
use crate::error::{invalid, Error, Result};
use crate::field::{GridField, SpaceTimeField, SpectralField, VectorField};
use crate::math::{cos_pi, cos_pi_frac, gauss_legendre, sin_pi, sin_pi_frac, sq, sqrt};
use crate::series::Parity;

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }
}

/// Contract `axis` of a 3D array (last index fastest) with `mat`.
pub fn apply_axis(
    input: &[f64],
    dims: [usize; 3],
    axis: usize,
    mat: &Mat,
) -> (Vec<f64>, [usize; 3]) {
    debug_assert_eq!(mat.cols, dims[axis]);
    let outer: usize = dims[..axis].iter().product();
    let inner: usize = dims[axis + 1..].iter().product();
    let len_in = dims[axis];
    let rows = mat.rows;
    let mut out = vec![0.0; outer * rows * inner];
    for o in 0..outer {
        for r in 0..rows {
            let dst = &mut out[(o * rows + r) * inner..(o * rows + r + 1) * inner];
            let row = &mat.data[r * len_in..(r + 1) * len_in];
            for (c, &m) in row.iter().enumerate() {
                if m == 0.0 {
                    continue;
                }
                let src = &input[(o * len_in + c) * inner..(o * len_in + c + 1) * inner];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += m * s;
                }
            }
        }
    }
    let mut new_dims = dims;
    new_dims[axis] = rows;
    (out, new_dims)
}

/// Apply one matrix per axis (axis 2 first); `None` leaves the axis untouched.
pub fn apply_separable(
    input: &[f64],
    dims: [usize; 3],
    mats: [Option<&Mat>; 3],
) -> (Vec<f64>, [usize; 3]) {
    let mut data = input.to_vec();
    let mut dims = dims;
    for axis in (0..3).rev() {
        if let Some(m) = mats[axis] {
            let (d, nd) = apply_axis(&data, dims, axis, m);
            data = d;
            dims = nd;
        }
    }
    (data, dims)
}

/// Per-axis node coordinates with quadrature weights.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    pub nodes: [Vec<f64>; 3],
    pub weights: [Vec<f64>; 3],
}

impl NodeSet {
    pub fn interior(grid: &SpatialGrid) -> Self {
        Self {
            nodes: core::array::from_fn(|a| grid.nodes(a)),
            weights: core::array::from_fn(|a| vec![grid.spacing(a); grid.m()]),
        }
    }

    /// Tensor Gauss-Legendre rule with `q` nodes per axis.
    pub fn gauss_legendre(domain: &BoxDomain, q: usize) -> Self {
        let l = domain.lengths();
        let rules: [(Vec<f64>, Vec<f64>); 3] = core::array::from_fn(|a| gauss_legendre(q, l[a]));
        let [(n0, w0), (n1, w1), (n2, w2)] = rules;
        Self {
            nodes: [n0, n1, n2],
            weights: [w0, w1, w2],
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        [
            self.nodes[0].len(),
            self.nodes[1].len(),
            self.nodes[2].len(),
        ]
    }

    pub fn len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, flat: usize) -> [f64; 3] {
        let d = self.dims();
        let j = [flat / (d[1] * d[2]), (flat / d[2]) % d[1], flat % d[2]];
        core::array::from_fn(|a| self.nodes[a][j[a]])
    }

    pub fn weight(&self, flat: usize) -> f64 {
        let d = self.dims();
        let j = [flat / (d[1] * d[2]), (flat / d[2]) % d[1], flat % d[2]];
        (0..3).map(|a| self.weights[a][j[a]]).product()
    }

    /// `sum_j w_j f_j^2` over the tensor rule.
    pub fn weighted_energy(&self, values: &[f64]) -> f64 {
        let d = self.dims();
        let mut total = 0.0;
        for i in 0..d[0] {
            for j in 0..d[1] {
                let wij = self.weights[0][i] * self.weights[1][j];
                let row = &values[(i * d[1] + j) * d[2]..(i * d[1] + j + 1) * d[2]];
                let s: f64 = row
                    .iter()
                    .zip(&self.weights[2])
                    .map(|(v, w)| w * v * v)
                    .sum();
                total += wij * s;
            }
        }
        total
    }
}

/// Sine and cosine basis tables evaluated at a [`NodeSet`].
///
/// Row `n - 1` of a synthesis table holds `sqrt(2/L) sin(n pi x_j / L)` (or
/// the cosine) across the nodes; projection tables carry the quadrature weights.
#[derive(Clone, Debug)]
pub struct BasisTables {
    domain: BoxDomain,
    n: usize,
    nodes: NodeSet,
    // [axis][0 = sin, 1 = cos], shape (nodes x modes)
    synth: [[Mat; 2]; 3],
    // shape (modes x nodes), weights folded in
    proj: [[Mat; 2]; 3],
}

impl BasisTables {
    pub fn new(domain: BoxDomain, n: usize, nodes: NodeSet) -> Self {
        let l = domain.lengths();
        let synth: [[Mat; 2]; 3] = core::array::from_fn(|a| {
            let scale = sqrt(2.0 / l[a]);
            let xs = &nodes.nodes[a];
            [
                Mat::from_fn(xs.len(), n, |j, k| {
                    scale * sin_pi((k + 1) as f64 * xs[j] / l[a])
                }),
                Mat::from_fn(xs.len(), n, |j, k| {
                    scale * cos_pi((k + 1) as f64 * xs[j] / l[a])
                }),
            ]
        });
        Self::assemble(domain, n, nodes, synth)
    }

    /// Tables on the interior grid, with exact integer range reduction.
    pub fn for_grid(grid: &SpatialGrid, n: usize) -> Self {
        let domain = *grid.domain();
        let l = domain.lengths();
        let m = grid.m();
        let synth: [[Mat; 2]; 3] = core::array::from_fn(|a| {
            let scale = sqrt(2.0 / l[a]);
            [
                Mat::from_fn(m, n, |j, k| scale * sin_pi_frac((k + 1) * (j + 1), m + 1)),
                Mat::from_fn(m, n, |j, k| scale * cos_pi_frac((k + 1) * (j + 1), m + 1)),
            ]
        });
        Self::assemble(domain, n, NodeSet::interior(grid), synth)
    }

    fn assemble(domain: BoxDomain, n: usize, nodes: NodeSet, synth: [[Mat; 2]; 3]) -> Self {
        let proj = core::array::from_fn(|a| {
            let w = &nodes.weights[a];
            core::array::from_fn(|p| {
                let s = &synth[a][p];
                Mat::from_fn(n, s.rows, |k, j| w[j] * s.get(j, k))
            })
        });
        Self {
            domain,
            n,
            nodes,
            synth,
            proj,
        }
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    /// Values at the nodes of `sum_n c_n phi_n` for basis functions of the given parity.
    pub fn synthesize(&self, parity: Parity, coeffs: &[f64]) -> Vec<f64> {
        let n = self.n;
        debug_assert_eq!(coeffs.len(), n * n * n);
        let mats = core::array::from_fn(|a| Some(&self.synth[a][parity.cos_bit(a)]));
        apply_separable(coeffs, [n; 3], mats).0
    }

    /// Quadrature inner products of `values` against each basis function.
    pub fn project(&self, parity: Parity, values: &[f64]) -> Vec<f64> {
        debug_assert_eq!(values.len(), self.nodes.len());
        let mats = core::array::from_fn(|a| Some(&self.proj[a][parity.cos_bit(a)]));
        apply_separable(values, self.nodes.dims(), mats).0
    }
}

/// Discrete sine transform of grid samples, truncated to `n` modes per axis.
pub fn forward_sine(field: &GridField, n: usize) -> Result<SpectralField> {
    let grid = field.grid();
    if n < 1 || grid.m() < n {
        return Err(invalid(format!(
            "grid size {} is smaller than truncation {n}",
            grid.m()
        )));
    }
    let tables = BasisTables::for_grid(grid, n);
    SpectralField::from_coeffs(
        *grid.domain(),
        n,
        tables.project(Parity::SINE, field.values()),
    )
}

/// Synthesize sine coefficients on the interior nodes of `grid`.
pub fn inverse_sine(coeffs: &SpectralField, grid: &SpatialGrid) -> Result<GridField> {
    if grid.m() < coeffs.n() {
        return Err(invalid(format!(
            "grid size {} is smaller than truncation {}",
            grid.m(),
            coeffs.n()
        )));
    }
    if grid.domain() != coeffs.domain() {
        return Err(Error::Dimension(
            "coefficients and grid belong to different boxes".into(),
        ));
    }
    let tables = BasisTables::for_grid(grid, coeffs.n());
    GridField::from_values(*grid, tables.synthesize(Parity::SINE, coeffs.coeffs()))
}

/// Discrete `L2(Omega)` norm with the transform-induced quadrature.
pub fn l2_norm(field: &GridField) -> f64 {
    let e: f64 = field.values().iter().map(|v| v * v).sum();
    sqrt(e * field.grid().cell_volume())
}

pub fn l2_norm_vector(field: &VectorField) -> f64 {
    sqrt(field.iter().map(|f| sq(l2_norm(f))).sum())
}

/// `L2(Q_t)` norm: spatial quadrature, composite trapezoid in time.
pub fn l2_norm_spacetime(field: &SpaceTimeField<GridField>) -> f64 {
    let w = field.time().trapezoid_weights();
    sqrt(
        field
            .slices()
            .iter()
            .zip(&w)
            .map(|(f, w)| w * sq(l2_norm(f)))
            .sum(),
    )
}

pub fn l2_norm_spacetime_vector(field: &SpaceTimeField<VectorField>) -> f64 {
    let w = field.time().trapezoid_weights();
    sqrt(
        field
            .slices()
            .iter()
            .zip(&w)
            .map(|(f, w)| w * sq(l2_norm_vector(f)))
            .sum(),
    )
}

/// Seven-point Laplacian with zero Dirichlet ghost values.
pub fn fd_laplacian(field: &GridField) -> GridField {
    let grid = *field.grid();
    let m = grid.m();
    let v = field.values();
    let inv_h2: [f64; 3] = core::array::from_fn(|a| 1.0 / sq(grid.spacing(a)));
    let strides = [m * m, m, 1];
    let mut out = vec![0.0; v.len()];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let idx = (i * m + j) * m + k;
                let pos = [i, j, k];
                let mut acc = 0.0;
                for a in 0..3 {
                    let lo = if pos[a] > 0 { v[idx - strides[a]] } else { 0.0 };
                    let hi = if pos[a] + 1 < m {
                        v[idx + strides[a]]
                    } else {
                        0.0
                    };
                    acc += (lo - 2.0 * v[idx] + hi) * inv_h2[a];
                }
                out[idx] = acc;
            }
        }
    }
    GridField::from_values(grid, out).expect("same grid")
}

/// Laplacian through the full-resolution sine transform (`-lambda_n` multiplier).
pub fn spectral_laplacian(field: &GridField) -> GridField {
    let grid = field.grid();
    let m = grid.m();
    let tables = BasisTables::for_grid(grid, m);
    let mut c = tables.project(Parity::SINE, field.values());
    let lam = crate::domain::Basis::new(*grid.domain(), m).expect("m >= 1");
    for (ci, l) in c.iter_mut().zip(lam.eigenvalues()) {
        *ci *= -l;
    }
    GridField::from_values(*grid, tables.synthesize(Parity::SINE, &c)).expect("same grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{enumerate_modes, eval_eigenfunction, Basis};

    fn grid(m: usize) -> SpatialGrid {
        SpatialGrid::new(BoxDomain::new([1.0, 1.5, 0.8], 1.0).unwrap(), m).unwrap()
    }

    #[test]
    fn sampled_mode_transforms_to_unit_coefficient() {
        let g = grid(9);
        let d = *g.domain();
        let modes = enumerate_modes(&d, 4).unwrap();
        let target = modes[37];
        let f = GridField::from_fn(g, |x| eval_eigenfunction(&d, &target, x).unwrap());
        let c = forward_sine(&f, 4).unwrap();
        for (i, v) in c.coeffs().iter().enumerate() {
            let expected = if i == 37 { 1.0 } else { 0.0 };
            assert!((v - expected).abs() <= 1e-12, "mode {i}: {v}");
        }
        assert!((l2_norm(&f) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_field_and_truncation_errors() {
        let g = grid(5);
        let c = forward_sine(&GridField::zeros(g), 5).unwrap();
        assert!(c.coeffs().iter().all(|v| *v == 0.0));
        assert!(forward_sine(&GridField::zeros(g), 6).is_err());
        assert!(inverse_sine(&SpectralField::zeros(*g.domain(), 6), &g).is_err());
        assert_eq!(l2_norm(&GridField::zeros(g)), 0.0);
    }

    #[test]
    fn parseval_two_modes() {
        let g = grid(8);
        let d = *g.domain();
        let mut c = SpectralField::zeros(d, 3);
        c.coeffs_mut()[0] = 3.0;
        c.coeffs_mut()[13] = 4.0;
        let f = inverse_sine(&c, &g).unwrap();
        assert!((l2_norm(&f) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn fd_laplacian_is_second_order_on_a_mode() {
        let d = BoxDomain::unit_cube();
        let mode = enumerate_modes(&d, 2).unwrap()[3];
        let err = |m: usize| {
            let g = SpatialGrid::new(d, m).unwrap();
            let f = GridField::from_fn(g, |x| eval_eigenfunction(&d, &mode, x).unwrap());
            let mut lap = fd_laplacian(&f);
            lap.axpy(mode.eigenvalue, &f);
            l2_norm(&lap)
        };
        let ratio = err(10) / err(21);
        assert!((3.6..=4.4).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn spectral_laplacian_exact_on_modes() {
        let g = grid(7);
        let d = *g.domain();
        let b = Basis::new(d, 7).unwrap();
        let c = SpectralField::single(d, 7, [2, 5, 1], 1.0).unwrap();
        let f = inverse_sine(&c, &g).unwrap();
        let mut lap = spectral_laplacian(&f);
        lap.axpy(b.eigenvalues()[b.flat([2, 5, 1])], &f);
        assert!(lap.max_abs() < 1e-9);
    }
}
