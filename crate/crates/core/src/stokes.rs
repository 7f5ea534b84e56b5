//! Linear Stokes pipeline on the box: source potential `S[w]`, the explicit
//! pressure `p = -d/dt Laplace^{-1} S + rho S`, its gradient and the velocity
//! recovered from `T u_i = w_i + dp/dx_i`.
//!
//! Everything is carried as modal histories. Sine coefficients of the forcing
//! are convolved mode by mode, derivatives move between sine and cosine
//! families exactly, and projections back onto the sine basis use closed-form
//! Gram matrices. Grid samples are produced only on request.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{Basis, BoxDomain, SpatialGrid, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::field::{GridField, SpaceTimeField, VectorField};
use crate::heat::duhamel_series;
use crate::math::{simpson_weights, sin_pi, sqrt};
use crate::series::{eigenvalues, Parity, SeriesHistory, TrigSeries};
use crate::transform::{forward_sine, BasisTables, NodeSet};

/// Sum of squared `L2(Q_t)` norms of the components.
fn vector_norm_sq(components: &[SeriesHistory]) -> f64 {
    components
        .iter()
        .map(|c| {
            let n = c.l2_norm();
            n * n
        })
        .sum()
}

/// `L2(Q_t)` norm of a vector of histories, exact in space, trapezoidal in time.
pub fn vector_l2_norm(components: &[SeriesHistory]) -> f64 {
    sqrt(vector_norm_sq(components))
}

/// Sample a vector of histories on `grid`.
pub fn sample_vector(
    components: &[SeriesHistory; 3],
    grid: &SpatialGrid,
) -> SpaceTimeField<VectorField> {
    let sampled: [SpaceTimeField; 3] = core::array::from_fn(|i| components[i].sample_grid(grid));
    let time = *components[0].time();
    let slices = (0..time.len())
        .map(|k| core::array::from_fn(|i| sampled[i].slices()[k].clone()))
        .collect();
    SpaceTimeField::new(time, slices).expect("one slice per knot")
}

/// Body force `w`, stored as sine-coefficient histories of each component.
#[derive(Clone, Debug, PartialEq)]
pub struct Forcing {
    components: [SeriesHistory; 3],
}

impl Forcing {
    pub fn new(components: [SeriesHistory; 3]) -> Result<Self> {
        let (t, n, d) = (
            *components[0].time(),
            components[0].n(),
            *components[0].domain(),
        );
        for c in &components {
            if *c.time() != t || c.n() != n || *c.domain() != d {
                return Err(Error::Dimension(
                    "forcing components disagree on grid or truncation".into(),
                ));
            }
            if c.slices()
                .iter()
                .any(|s| s.parities().any(|p| p != Parity::SINE))
            {
                return Err(invalid("forcing must be given by sine coefficients"));
            }
        }
        Ok(Self { components })
    }

    pub fn zeros(domain: BoxDomain, time: TimeGrid, n: usize) -> Self {
        Self::from_modes(domain, time, n, |_, _, _| 0.0)
    }

    /// Coefficients from `f(component, mode index, t)`.
    pub fn from_modes(
        domain: BoxDomain,
        time: TimeGrid,
        n: usize,
        f: impl Fn(usize, [usize; 3], f64) -> f64,
    ) -> Self {
        let basis = Basis::new(domain, n.max(1)).expect("n >= 1");
        let components = core::array::from_fn(|i| {
            let slices = time
                .knots()
                .iter()
                .map(|t| {
                    let coeffs = (0..basis.len()).map(|m| f(i, basis.index(m), *t)).collect();
                    TrigSeries::from_part(domain, basis.n(), Parity::SINE, coeffs).expect("sized")
                })
                .collect();
            SeriesHistory::new(time, slices).expect("one slice per knot")
        });
        Self { components }
    }

    /// Grid samples projected with the discrete sine transform.
    pub fn from_grid(field: &SpaceTimeField<VectorField>, n: usize) -> Result<Self> {
        let time = *field.time();
        let mut comps: [Vec<TrigSeries>; 3] = Default::default();
        for slice in field.slices() {
            for (i, c) in slice.iter().enumerate() {
                comps[i].push(TrigSeries::from_sine(&forward_sine(c, n)?));
            }
        }
        let [a, b, c] = comps;
        Self::new([
            SeriesHistory::new(time, a)?,
            SeriesHistory::new(time, b)?,
            SeriesHistory::new(time, c)?,
        ])
    }

    /// `L2` projection of a closed-form field by tensor Gauss-Legendre quadrature
    /// with `q` nodes per axis.
    pub fn from_fn(
        domain: BoxDomain,
        time: TimeGrid,
        n: usize,
        q: usize,
        f: impl Fn([f64; 3], f64) -> [f64; 3],
    ) -> Self {
        let tables = BasisTables::new(domain, n, NodeSet::gauss_legendre(&domain, q));
        let nodes = tables.nodes();
        let points: Vec<[f64; 3]> = (0..nodes.len()).map(|j| nodes.point(j)).collect();
        let mut comps: [Vec<TrigSeries>; 3] = Default::default();
        let mut values: [Vec<f64>; 3] = core::array::from_fn(|_| vec![0.0; points.len()]);
        for t in time.knots() {
            for (j, x) in points.iter().enumerate() {
                let v = f(*x, t);
                for i in 0..3 {
                    values[i][j] = v[i];
                }
            }
            for i in 0..3 {
                let c = tables.project(Parity::SINE, &values[i]);
                comps[i].push(TrigSeries::from_part(domain, n, Parity::SINE, c).expect("sized"));
            }
        }
        let [a, b, c] = comps;
        Self {
            components: [
                SeriesHistory::new(time, a).expect("sized"),
                SeriesHistory::new(time, b).expect("sized"),
                SeriesHistory::new(time, c).expect("sized"),
            ],
        }
    }

    /// Fixed-seed random forcing supported on modes `<= n_low` per axis.
    ///
    /// Each coefficient follows `a t / T + b sin(pi t / T)` with amplitudes
    /// damped like `1 / |n|^2`, so `w(., 0) = 0` and the history is smooth.
    pub fn random(
        domain: BoxDomain,
        time: TimeGrid,
        n: usize,
        n_low: usize,
        seed: u64,
    ) -> Result<Self> {
        if n_low < 1 || n_low > n {
            return Err(invalid("random forcing needs 1 <= n_low <= n"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let basis = Basis::new(domain, n)?;
        let mut amps = vec![[0.0f64; 2]; 3 * basis.len()];
        for i in 0..3 {
            for m in 0..basis.len() {
                let idx = basis.index(m);
                if idx.iter().all(|k| *k <= n_low) {
                    let damp = 1.0 / (idx.iter().map(|k| k * k).sum::<usize>() as f64);
                    let a: f64 = rng.random_range(-1.0..1.0);
                    let b: f64 = rng.random_range(-1.0..1.0);
                    amps[i * basis.len() + m] = [a * damp, b * damp];
                }
            }
        }
        let tf = time.t_final();
        let len = basis.len();
        Ok(Self::from_modes(domain, time, n, |i, idx, t| {
            let [a, b] = amps[i * len + crate::domain::mode_flat(n, idx)];
            a * t / tf + b * sin_pi(t / tf)
        }))
    }

    pub fn components(&self) -> &[SeriesHistory; 3] {
        &self.components
    }

    pub fn time(&self) -> &TimeGrid {
        self.components[0].time()
    }

    pub fn domain(&self) -> &BoxDomain {
        self.components[0].domain()
    }

    pub fn n(&self) -> usize {
        self.components[0].n()
    }

    /// `alpha self + beta other`.
    pub fn combine(&self, alpha: f64, beta: f64, other: &Forcing) -> Forcing {
        let components = core::array::from_fn(|i| {
            self.components[i]
                .map(|s| s.scaled(alpha))
                .plus(beta, &other.components[i])
        });
        Forcing { components }
    }

    /// `L2(Q_t)` norm.
    pub fn l2_norm(&self) -> f64 {
        vector_l2_norm(&self.components)
    }

    /// `sum_i dw_i/dx_i` as a mixed-parity history.
    pub fn divergence(&self) -> SeriesHistory {
        divergence_of(&self.components)
    }

    pub fn is_zero(&self) -> bool {
        self.components
            .iter()
            .all(|c| c.slices().iter().all(TrigSeries::is_zero))
    }
}

fn divergence_of(components: &[SeriesHistory; 3]) -> SeriesHistory {
    let mut out = components[0].map(|s| s.derivative(0));
    for (i, c) in components.iter().enumerate().skip(1) {
        out = out.plus(1.0, &c.map(|s| s.derivative(i)));
    }
    out
}

/// Forcing coefficients together with their Duhamel responses `H_i`,
/// `H_i' = w_i - rho lambda H_i`, `H_i(0) = 0`.
#[derive(Clone, Debug)]
pub struct SourceDecomposition {
    forcing: Forcing,
    response: [SeriesHistory; 3],
}

impl SourceDecomposition {
    pub fn new(forcing: &Forcing) -> Self {
        let response = core::array::from_fn(|i| duhamel_series(&forcing.components[i]));
        Self {
            forcing: forcing.clone(),
            response,
        }
    }

    pub fn forcing(&self) -> &Forcing {
        &self.forcing
    }

    pub fn response(&self) -> &[SeriesHistory; 3] {
        &self.response
    }

    /// `S = sum_i dH_i/dx_i`.
    pub fn source(&self) -> SeriesHistory {
        divergence_of(&self.response)
    }

    /// `dS/dt = sum_i d/dx_i (w_i + rho Laplace H_i)`, the exact modal derivative.
    pub fn source_dt(&self) -> SeriesHistory {
        let rho = self.forcing.domain().rho();
        let rates: [SeriesHistory; 3] = core::array::from_fn(|i| {
            self.forcing.components[i].zip_map(&self.response[i], |w, h| {
                let mut r = w.clone();
                r.axpy(rho, &h.laplacian());
                r
            })
        });
        divergence_of(&rates)
    }
}

/// `S[w]` and its decomposition.
pub fn source_s(forcing: &Forcing) -> (SeriesHistory, SourceDecomposition) {
    let d = SourceDecomposition::new(forcing);
    (d.source(), d)
}

pub fn source_s_dt(decomposition: &SourceDecomposition) -> SeriesHistory {
    decomposition.source_dt()
}

/// Pressure from the explicit formula and the pieces it was built from.
#[derive(Clone, Debug)]
pub struct PressureResult {
    n_pressure: usize,
    source: SeriesHistory,
    elliptic: SeriesHistory,
    pressure: SeriesHistory,
}

impl PressureResult {
    /// Sine truncation used inside the inverse Laplacian.
    pub fn n_pressure(&self) -> usize {
        self.n_pressure
    }

    pub fn source(&self) -> &SeriesHistory {
        &self.source
    }

    /// `-Laplace^{-1} dS/dt`, sine series with `n_pressure` modes per axis.
    pub fn elliptic_part(&self) -> &SeriesHistory {
        &self.elliptic
    }

    pub fn pressure(&self) -> &SeriesHistory {
        &self.pressure
    }

    pub fn sample_grid(&self, grid: &SpatialGrid) -> SpaceTimeField {
        self.pressure.sample_grid(grid)
    }
}

/// `-Laplace^{-1}` on a mixed series: project onto sines, divide by `lambda_n`.
pub fn negative_inverse_laplacian(series: &TrigSeries, n_out: usize) -> TrigSeries {
    let lambdas = eigenvalues(series.domain(), n_out);
    let mut c = series.project(Parity::SINE, n_out);
    for (v, l) in c.iter_mut().zip(&lambdas) {
        *v /= l;
    }
    TrigSeries::from_part(*series.domain(), n_out, Parity::SINE, c).expect("sized")
}

/// `p = -Laplace^{-1} dS/dt + rho S`, with the inverse Laplacian truncated to
/// `n_pressure` sine modes per axis.
pub fn pressure(forcing: &Forcing, n_pressure: usize) -> Result<PressureResult> {
    if n_pressure < 1 {
        return Err(invalid("pressure truncation must be at least 1"));
    }
    let decomposition = SourceDecomposition::new(forcing);
    Ok(pressure_from(&decomposition, n_pressure))
}

pub fn pressure_from(decomposition: &SourceDecomposition, n_pressure: usize) -> PressureResult {
    let source = decomposition.source();
    let elliptic = decomposition
        .source_dt()
        .map(|s| negative_inverse_laplacian(s, n_pressure));
    let rho = decomposition.forcing.domain().rho();
    let n_max = n_pressure.max(source.n());
    let pressure = elliptic.zip_map(&source, |e, s| {
        let mut p = e.resized(n_max);
        p.axpy(rho, s);
        p
    });
    PressureResult {
        n_pressure,
        source,
        elliptic,
        pressure,
    }
}

/// Exact term-wise gradient of the pressure.
pub fn pressure_gradient(result: &PressureResult) -> [SeriesHistory; 3] {
    core::array::from_fn(|i| result.pressure.map(|s| s.derivative(i)))
}

/// Velocity as sine-coefficient histories.
#[derive(Clone, Debug)]
pub struct VelocityResult {
    velocity: [SeriesHistory; 3],
}

impl VelocityResult {
    pub fn components(&self) -> &[SeriesHistory; 3] {
        &self.velocity
    }

    pub fn n(&self) -> usize {
        self.velocity[0].n()
    }

    pub fn sample_grid(&self, grid: &SpatialGrid) -> SpaceTimeField<VectorField> {
        sample_vector(&self.velocity, grid)
    }

    pub fn l2_norm(&self) -> f64 {
        vector_l2_norm(&self.velocity)
    }

    /// Relative `L2(Q_t)` distance to another velocity.
    pub fn relative_difference(&self, other: &VelocityResult) -> f64 {
        let diff: Vec<SeriesHistory> = (0..3)
            .map(|i| self.velocity[i].plus(-1.0, &other.velocity[i]))
            .collect();
        vector_l2_norm(&diff) / self.l2_norm()
    }
}

/// `u_i` solving `T u_i = w_i + dp/dx_i` on `n` = forcing truncation sine modes.
pub fn velocity(forcing: &Forcing, pressure: &PressureResult) -> VelocityResult {
    let n = forcing.n();
    let rhs = velocity_rhs(forcing, pressure);
    VelocityResult {
        velocity: core::array::from_fn(|i| duhamel_series(&rhs[i]).map(|s| s.resized(n))),
    }
}

/// Sine projections of `w_i + dp/dx_i`.
pub fn velocity_rhs(forcing: &Forcing, pressure: &PressureResult) -> [SeriesHistory; 3] {
    let n = forcing.n();
    core::array::from_fn(|i| {
        forcing.components[i].zip_map(&pressure.pressure, |w, p| {
            let g = p.derivative(i).sine_projection(n);
            let mut out = TrigSeries::from_sine(&g);
            out.axpy(1.0, w);
            out
        })
    })
}

/// Default quadrature order for [`velocity_by_parts`].
pub fn by_parts_quadrature(n: usize, n_pressure: usize) -> usize {
    n + n_pressure + 16
}

/// Velocity with the pressure gradient moved onto the eigenfunctions:
/// `u_i = Duhamel(w_i) - Duhamel(q_i)` with `q_{i,n} = int du_n/dx_i p`,
/// integrated by tensor Gauss-Legendre quadrature with `q` nodes per axis.
pub fn velocity_by_parts(
    forcing: &Forcing,
    pressure: &PressureResult,
    q: usize,
) -> Result<VelocityResult> {
    if q < 2 {
        return Err(invalid("quadrature order must be at least 2"));
    }
    let domain = *forcing.domain();
    let n = forcing.n();
    let nodes = NodeSet::gauss_legendre(&domain, q);
    let p_tables = BasisTables::new(domain, pressure.pressure.n(), nodes.clone());
    let u_tables = BasisTables::new(domain, n, nodes);
    let basis = Basis::new(domain, n)?;
    let time = *forcing.time();
    let mut moments: [Vec<TrigSeries>; 3] = Default::default();
    for p in pressure.pressure.slices() {
        let values = p.sample(&p_tables);
        for (i, out) in moments.iter_mut().enumerate() {
            let mut c = u_tables.project(Parity::gradient(i), &values);
            for (m, v) in c.iter_mut().enumerate() {
                *v *= basis.wavenumber(i, basis.index(m)[i]);
            }
            out.push(TrigSeries::from_part(domain, n, Parity::SINE, c)?);
        }
    }
    let [a, b, c] = moments;
    let moments = [
        SeriesHistory::new(time, a)?,
        SeriesHistory::new(time, b)?,
        SeriesHistory::new(time, c)?,
    ];
    Ok(VelocityResult {
        velocity: core::array::from_fn(|i| {
            duhamel_series(&forcing.components[i]).plus(-1.0, &duhamel_series(&moments[i]))
        }),
    })
}

/// Divergence of a reconstructed velocity with its `L2(Q_t)` norms.
#[derive(Clone, Debug)]
pub struct DivergenceReport {
    pub field: SeriesHistory,
    pub div_norm: f64,
    pub grad_norm: f64,
}

impl DivergenceReport {
    /// `||div u|| / ||grad u||`, zero for a vanishing velocity.
    pub fn ratio(&self) -> f64 {
        if self.grad_norm == 0.0 {
            0.0
        } else {
            self.div_norm / self.grad_norm
        }
    }
}

/// Exact term-wise divergence of `u` and the norm of its full gradient.
pub fn divergence(u: &VelocityResult) -> DivergenceReport {
    let field = divergence_of(&u.velocity);
    let grad: Vec<SeriesHistory> = (0..3)
        .flat_map(|i| (0..3).map(move |a| (i, a)))
        .map(|(i, a)| u.velocity[i].map(|s| s.derivative(a)))
        .collect();
    let div_norm = field.l2_norm();
    DivergenceReport {
        field,
        div_norm,
        grad_norm: vector_l2_norm(&grad),
    }
}

/// `W_2^{2,1}(Q_t)` norm: `|u|^2 + |grad u|^2 + |Hessian u|^2 + |du/dt|^2`
/// integrated with Simpson weights in time. Space derivatives are exact, the
/// time derivative is the second-order finite difference.
pub fn sobolev_norm_w221(components: &[SeriesHistory]) -> f64 {
    let mut total = 0.0;
    for c in components {
        let w = simpson_weights(c.time().len(), c.time().dt());
        let dt = c.time_derivative();
        for ((s, ds), wk) in c.slices().iter().zip(dt.slices()).zip(&w) {
            let mut e = s.norm_sq() + ds.norm_sq();
            for a in 0..3 {
                let da = s.derivative(a);
                e += da.norm_sq();
                for b in 0..3 {
                    e += da.derivative(b).norm_sq();
                }
            }
            total += wk * e;
        }
    }
    sqrt(total)
}

/// `||D_t u - rho Laplace u - P(w + grad p)||_{L2(Q_t)}` with the finite
/// difference time derivative, and `||w||` as its normalization.
pub fn pde_residual(
    forcing: &Forcing,
    pressure: &PressureResult,
    u: &VelocityResult,
) -> (f64, f64) {
    let rhs = velocity_rhs(forcing, pressure);
    let res: Vec<SeriesHistory> = (0..3)
        .map(|i| {
            u.velocity[i]
                .heat_operator()
                .plus(-1.0, &rhs[i].map(|s| s.resized(u.n())))
        })
        .collect();
    (vector_l2_norm(&res), forcing.l2_norm())
}

/// Probe values of a history at one knot and point (slow; diagnostics only).
pub fn probe(history: &SeriesHistory, k: usize, x: [f64; 3]) -> f64 {
    history.slices()[k].eval(x)
}

/// Grid field of one pressure slice.
pub fn pressure_slice(result: &PressureResult, k: usize, grid: &SpatialGrid) -> GridField {
    result.pressure.slices()[k].sample_grid(grid)
}
