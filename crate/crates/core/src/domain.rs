//! Box geometry, Dirichlet eigenpairs and the space/time grids.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::math::{sin_pi, sq, sqrt};

/// Rectangular box `[0, L1] x [0, L2] x [0, L3]` with viscosity `rho`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoxDomain {
    lengths: [f64; 3],
    rho: f64,
}

impl BoxDomain {
    pub fn new(lengths: [f64; 3], rho: f64) -> Result<Self> {
        if lengths.iter().any(|l| !(*l > 0.0) || !l.is_finite()) {
            return Err(invalid(format!(
                "box lengths must be positive, got {lengths:?}"
            )));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(invalid(format!("viscosity must be positive, got {rho}")));
        }
        Ok(Self { lengths, rho })
    }

    pub fn unit_cube() -> Self {
        Self {
            lengths: [1.0; 3],
            rho: 1.0,
        }
    }

    pub fn lengths(&self) -> [f64; 3] {
        self.lengths
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn min_length(&self) -> f64 {
        self.lengths[0].min(self.lengths[1]).min(self.lengths[2])
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    pub fn contains(&self, x: [f64; 3]) -> bool {
        x.iter()
            .zip(&self.lengths)
            .all(|(xi, l)| *xi >= 0.0 && *xi <= *l)
    }

    pub fn center(&self) -> [f64; 3] {
        [
            0.5 * self.lengths[0],
            0.5 * self.lengths[1],
            0.5 * self.lengths[2],
        ]
    }

    /// `n pi / L` along `axis`.
    pub fn wavenumber(&self, axis: usize, n: usize) -> f64 {
        n as f64 * PI / self.lengths[axis]
    }

    pub fn eigenvalue(&self, index: [usize; 3]) -> f64 {
        (0..3).map(|a| sq(self.wavenumber(a, index[a]))).sum()
    }
}

/// Dirichlet eigenpair of the box Laplacian: `-Laplace u_n = lambda_n u_n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub index: [usize; 3],
    pub eigenvalue: f64,
}

/// All modes with indices in `[1, n]^3`, lexicographic with the last index fastest.
pub fn enumerate_modes(domain: &BoxDomain, n: usize) -> Result<Vec<Mode>> {
    if n < 1 {
        return Err(invalid("mode truncation must be at least 1"));
    }
    let mut modes = Vec::with_capacity(n * n * n);
    for n1 in 1..=n {
        for n2 in 1..=n {
            for n3 in 1..=n {
                let index = [n1, n2, n3];
                modes.push(Mode {
                    index,
                    eigenvalue: domain.eigenvalue(index),
                });
            }
        }
    }
    Ok(modes)
}

/// `u_n(x) = prod_i sqrt(2/L_i) sin(n_i pi x_i / L_i)`.
pub fn eval_eigenfunction(domain: &BoxDomain, mode: &Mode, x: [f64; 3]) -> Result<f64> {
    if !domain.contains(x) {
        return Err(invalid(format!("point {x:?} lies outside the box")));
    }
    Ok(eigenfunction_unchecked(domain, mode.index, x))
}

pub(crate) fn eigenfunction_unchecked(domain: &BoxDomain, index: [usize; 3], x: [f64; 3]) -> f64 {
    let l = domain.lengths;
    (0..3)
        .map(|a| sqrt(2.0 / l[a]) * sin_pi(index[a] as f64 * (x[a] / l[a])))
        .product()
}

/// Truncated eigenbasis `[1, n]^3` with cached wavenumbers and eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    domain: BoxDomain,
    n: usize,
    wavenumbers: [Vec<f64>; 3],
    eigenvalues: Vec<f64>,
}

impl Basis {
    pub fn new(domain: BoxDomain, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(invalid("mode truncation must be at least 1"));
        }
        let wavenumbers =
            core::array::from_fn(|a| (1..=n).map(|k| domain.wavenumber(a, k)).collect());
        let eigenvalues = enumerate_modes(&domain, n)?
            .iter()
            .map(|m| m.eigenvalue)
            .collect();
        Ok(Self {
            domain,
            n,
            wavenumbers,
            eigenvalues,
        })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `k_a(n)` for the 1-based index `n`.
    pub fn wavenumber(&self, axis: usize, n: usize) -> f64 {
        self.wavenumbers[axis][n - 1]
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Flat position of the 1-based index triple.
    pub fn flat(&self, index: [usize; 3]) -> usize {
        mode_flat(self.n, index)
    }

    pub fn index(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        [flat / (n * n) + 1, (flat / n) % n + 1, flat % n + 1]
    }
}

pub(crate) fn mode_flat(n: usize, index: [usize; 3]) -> usize {
    ((index[0] - 1) * n + (index[1] - 1)) * n + (index[2] - 1)
}

/// Uniform grid of `m` interior nodes per axis, `x_j = j L / (m + 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialGrid {
    domain: BoxDomain,
    m: usize,
}

impl SpatialGrid {
    pub fn new(domain: BoxDomain, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(invalid("grid needs at least one interior node per axis"));
        }
        Ok(Self { domain, m })
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.domain.lengths[axis] / (self.m + 1) as f64
    }

    /// Node `j` (1-based) along `axis`.
    pub fn node(&self, axis: usize, j: usize) -> f64 {
        j as f64 * self.spacing(axis)
    }

    pub fn nodes(&self, axis: usize) -> Vec<f64> {
        (1..=self.m).map(|j| self.node(axis, j)).collect()
    }

    /// Coordinates of the flat grid position (x3 fastest).
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let m = self.m;
        let j = [flat / (m * m), (flat / m) % m, flat % m];
        core::array::from_fn(|a| self.node(a, j[a] + 1))
    }

    /// Quadrature weight of one node; the rule is exact for products of in-band modes.
    pub fn cell_volume(&self) -> f64 {
        (0..3).map(|a| self.spacing(a)).product()
    }
}

/// Knots `t_k = k dt`, `k = 0..=K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final > 0.0) || !t_final.is_finite() {
            return Err(invalid(format!(
                "time horizon must be positive, got {t_final}"
            )));
        }
        if steps < 2 {
            return Err(invalid(format!("need at least 2 time steps, got {steps}")));
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of knots, `K + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn knot(&self, k: usize) -> f64 {
        k as f64 * self.dt()
    }

    pub fn knots(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.knot(k)).collect()
    }

    pub fn trapezoid_weights(&self) -> Vec<f64> {
        crate::math::trapezoid_weights(self.len(), self.dt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_cube_first_mode() {
        let modes = enumerate_modes(&BoxDomain::unit_cube(), 1).unwrap();
        assert_eq!(modes.len(), 1);
        assert_eq!(modes[0].index, [1, 1, 1]);
        assert!((modes[0].eigenvalue - 29.608813203268074).abs() < 1e-12);
    }

    #[test]
    fn elongated_box_eigenvalue() {
        let d = BoxDomain::new([1.0, 1.0, 2.0], 1.0).unwrap();
        let modes = enumerate_modes(&d, 1).unwrap();
        assert!((modes[0].eigenvalue - 22.206609902451056).abs() < 1e-12);
    }

    #[test]
    fn counting_and_ordering() {
        let modes = enumerate_modes(&BoxDomain::unit_cube(), 4).unwrap();
        assert_eq!(modes.len(), 64);
        let min = modes
            .iter()
            .map(|m| m.eigenvalue)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, 3.0 * PI * PI);
        assert_eq!(modes[1].index, [1, 1, 2]);
        assert_eq!(modes[4].index, [1, 2, 1]);
        assert!(enumerate_modes(&BoxDomain::unit_cube(), 0).is_err());
    }

    #[test]
    fn eigenfunction_values() {
        let d = BoxDomain::unit_cube();
        let m111 = Mode {
            index: [1, 1, 1],
            eigenvalue: d.eigenvalue([1, 1, 1]),
        };
        let v = eval_eigenfunction(&d, &m111, [0.5; 3]).unwrap();
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        let m222 = Mode {
            index: [2, 2, 2],
            eigenvalue: d.eigenvalue([2, 2, 2]),
        };
        let v = eval_eigenfunction(&d, &m222, [0.25; 3]).unwrap();
        assert!((v - 2.0 * 2f64.sqrt()).abs() < 1e-14);
        for face in [
            [0.0, 0.3, 0.7],
            [1.0, 0.3, 0.7],
            [0.2, 1.0, 0.1],
            [0.2, 0.4, 0.0],
        ] {
            let m = Mode {
                index: [3, 2, 5],
                eigenvalue: d.eigenvalue([3, 2, 5]),
            };
            assert_eq!(eval_eigenfunction(&d, &m, face).unwrap(), 0.0);
        }
        assert!(eval_eigenfunction(&d, &m111, [1.5, 0.5, 0.5]).is_err());
    }

    #[test]
    fn rejects_bad_geometry_and_time() {
        assert!(BoxDomain::new([1.0, 0.0, 1.0], 1.0).is_err());
        assert!(BoxDomain::new([1.0, 1.0, 1.0], -1.0).is_err());
        assert!(TimeGrid::new(0.5, 1).is_err());
        assert!(TimeGrid::new(0.0, 4).is_err());
    }

    #[test]
    fn grid_nodes_are_interior() {
        let g = SpatialGrid::new(BoxDomain::new([1.0, 2.0, 3.0], 1.0).unwrap(), 5).unwrap();
        for a in 0..3 {
            let nodes = g.nodes(a);
            assert!(nodes[0] > 0.0 && *nodes.last().unwrap() < g.domain().lengths()[a]);
            assert!((nodes[1] - nodes[0] - g.spacing(a)).abs() < 1e-15);
        }
    }
}
