//! Guaranteed-math suites: basis exactness, heat calculus and internal
//! consistency of the Stokes pipeline. Every report here has a tolerance.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{SpatialGrid, TimeGrid};
use crate::error::Result;
use crate::field::{SpaceTimeField, SpectralField};
use crate::heat::{apply_t, heat_potential, inverse_laplacian, Laplacian, ModeHistory};
use crate::math::{cos, expm1, sin, sin_pi_frac, sq};
use crate::stokes::{by_parts_quadrature, pde_residual, pressure, velocity, velocity_by_parts};
use crate::transform::{forward_sine, inverse_sine, l2_norm_spacetime, spectral_laplacian};

use super::claims::ForcingSpec;
use super::{ConvergenceTable, ResidualReport, Resolution, Setting};

/// Tolerances of the guaranteed-math checks.
pub mod tol {
    pub const ORTHONORMALITY: f64 = 1e-12;
    pub const ROUND_TRIP: f64 = 1e-12;
    pub const INVERSE_LAPLACIAN: f64 = 1e-12;
    pub const CLOSED_FORM: f64 = 1e-13;
    pub const MIN_ORDER: f64 = 1.8;
    pub const LINEARITY: f64 = 1e-12;
    pub const VELOCITY_PATHS: f64 = 1e-6;
    pub const KERNEL_AGREEMENT: f64 = 1e-6;
    pub const SYMMETRY: f64 = 1e-12;
    pub const Z_MASS: f64 = 1e-8;
    pub const SEMIGROUP: f64 = 1e-6;
    pub const IMAGE_BOUNDARY: f64 = 1e-8;
}

fn random_coefficients(setting: &Setting, n: usize, n_low: usize, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = SpectralField::zeros(setting.domain, n);
    for i in 1..=n_low {
        for j in 1..=n_low {
            for k in 1..=n_low {
                let v: f64 = rng.random_range(-1.0..1.0);
                let idx = crate::domain::mode_flat(n, [i, j, k]);
                c.coeffs_mut()[idx] = v;
            }
        }
    }
    c
}

/// Discrete orthonormality of the sampled eigenfunctions and the transform round trip.
pub fn basis_suite(setting: &Setting, res: Resolution) -> Result<Vec<ResidualReport>> {
    let grid = SpatialGrid::new(setting.domain, res.m)?;
    let n = res.n;
    let m = res.m;
    // per-axis Gram matrices; the 3D matrix is their tensor product
    let gram: Vec<Vec<f64>> = (0..3)
        .map(|a| {
            let h = grid.spacing(a);
            let scale = 2.0 / setting.domain.lengths()[a];
            let mut g = vec![0.0; n * n];
            for r in 1..=n {
                for c in 1..=n {
                    g[(r - 1) * n + c - 1] = h
                        * scale
                        * (1..=m)
                            .map(|j| sin_pi_frac(r * j, m + 1) * sin_pi_frac(c * j, m + 1))
                            .sum::<f64>();
                }
            }
            g
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (r0, c0) in (0..n * n).map(|x| (x / n, x % n)) {
        for (r1, c1) in (0..n * n).map(|x| (x / n, x % n)) {
            for (r2, c2) in (0..n * n).map(|x| (x / n, x % n)) {
                let v = gram[0][r0 * n + c0] * gram[1][r1 * n + c1] * gram[2][r2 * n + c2];
                let delta = if r0 == c0 && r1 == c1 && r2 == c2 {
                    1.0
                } else {
                    0.0
                };
                worst = worst.max((v - delta).abs());
            }
        }
    }
    let coeffs = random_coefficients(setting, n, n, 11);
    let back = forward_sine(&inverse_sine(&coeffs, &grid)?, n)?;
    let rt = coeffs
        .coeffs()
        .iter()
        .zip(back.coeffs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        ResidualReport::value("basis", "orthonormality_max_error", Some(res), worst)?
            .with_tolerance(tol::ORTHONORMALITY),
        ResidualReport::value("basis", "transform_round_trip", Some(res), rt)?
            .with_tolerance(tol::ROUND_TRIP),
    ])
}

/// Inverse Laplacian identity and sign, Duhamel closed forms, and the order of
/// `T` applied to a heat potential across `rungs`.
pub fn heat_suite(
    setting: &Setting,
    res: Resolution,
    rungs: &[Resolution],
) -> Result<(Vec<ResidualReport>, ConvergenceTable)> {
    let d = setting.domain;
    let grid = SpatialGrid::new(d, res.m)?;
    let f = inverse_sine(&random_coefficients(setting, res.n, res.n, 5), &grid)?;
    let inv = inverse_laplacian(&f);
    let back = spectral_laplacian(&inv);
    let identity = back.max_abs_diff(&f) / f.max_abs();
    let pairing: f64 = f
        .values()
        .iter()
        .zip(inv.values())
        .map(|(a, b)| a * b)
        .sum::<f64>()
        * grid.cell_volume();

    let time = res.time(setting.t_final)?;
    let index = [1, 2, 1];
    let rate = d.rho() * d.eigenvalue(index);
    let constant = SpectralField::single(d, 2, index, 1.0)?;
    let hist = ModeHistory::integrate(time, &vec![constant.clone(); time.len()])?;
    let mut closed: f64 = 0.0;
    for (k, h) in hist.response_trajectory(index).iter().enumerate() {
        let exact = -expm1(-rate * time.knot(k)) / rate;
        closed = closed.max((h - exact).abs() / exact.abs().max(f64::MIN_POSITIVE));
    }
    let linear: Vec<SpectralField> = time.knots().iter().map(|t| constant.scaled(*t)).collect();
    let hist = ModeHistory::integrate(time, &linear)?;
    let mut lin_err: f64 = 0.0;
    for (k, h) in hist.response_trajectory(index).iter().enumerate().skip(1) {
        let t = time.knot(k);
        let exact = t / rate + expm1(-rate * t) / sq(rate);
        lin_err = lin_err.max((h - exact).abs() / exact.abs());
    }

    let rows = rungs
        .iter()
        .map(|r| heat_potential_residual(setting, *r))
        .collect::<Result<Vec<_>>>()?;
    let table = ConvergenceTable::new(rows)?.with_min_order(tol::MIN_ORDER);
    Ok((
        vec![
            ResidualReport::value("heat", "laplacian_of_inverse", Some(res), identity)?
                .with_tolerance(tol::INVERSE_LAPLACIAN),
            ResidualReport::value(
                "heat",
                "inverse_laplacian_pairing_positive_part",
                Some(res),
                pairing.max(0.0),
            )?
            .with_tolerance(0.0),
            ResidualReport::value("heat", "single_mode_closed_form", Some(res), closed)?
                .with_tolerance(tol::CLOSED_FORM),
            ResidualReport::value("heat", "linear_forcing_exactness", Some(res), lin_err)?
                .with_tolerance(tol::CLOSED_FORM),
        ],
        table,
    ))
}

/// `||T(heat_potential(p)) - p|| / ||p||` on the grid for a smooth band-limited `p`.
pub fn heat_potential_residual(setting: &Setting, res: Resolution) -> Result<ResidualReport> {
    let d = setting.domain;
    let grid = SpatialGrid::new(d, res.m)?;
    let time = TimeGrid::new(setting.t_final, res.k)?;
    let n = res.n.clamp(1, 2);
    let a = inverse_sine(&SpectralField::single(d, n, [1, 1, 1], 1.0)?, &grid)?;
    let b = inverse_sine(&SpectralField::single(d, n, [n, 1, n], 0.5)?, &grid)?;
    let p = SpaceTimeField::from_fn(time, |t| {
        let mut s = a.scaled(1.0 + sin(3.0 * t));
        s.axpy(cos(2.0 * t), &b);
        s
    });
    let u = heat_potential(&p, n)?;
    let mut r = apply_t(&u, Laplacian::Spectral)?;
    for (x, y) in r.slices_mut().iter_mut().zip(p.slices()) {
        x.axpy(-1.0, y);
    }
    ResidualReport::new(
        "heat",
        "T_of_heat_potential",
        Some(res),
        l2_norm_spacetime(&r),
        l2_norm_spacetime(&p),
    )
}

/// Linearity of the pressure, agreement of the two velocity constructions and
/// the order of the PDE residual across `rungs`.
pub fn pipeline_suite(
    setting: &Setting,
    res: Resolution,
    rungs: &[Resolution],
    seed: u64,
) -> Result<(Vec<ResidualReport>, ConvergenceTable)> {
    let n_low = (res.n / 2).max(1);
    let w1 = ForcingSpec::Random { seed, n_low }.build(setting, res)?;
    let w2 = ForcingSpec::Random {
        seed: seed + 1,
        n_low,
    }
    .build(setting, res)?;
    let (alpha, beta) = (0.75, -1.25);
    let np = res.n_pressure();
    let p = pressure(&w1.combine(alpha, beta, &w2), np)?;
    let p1 = pressure(&w1, np)?;
    let p2 = pressure(&w2, np)?;
    let lin = p1
        .pressure()
        .map(|s| s.scaled(alpha))
        .plus(beta, p2.pressure());
    let lin_err = p.pressure().plus(-1.0, &lin).l2_norm();
    let lin_norm = p.pressure().l2_norm();

    let u = velocity(&w1, &p1);
    let u2 = velocity_by_parts(&w1, &p1, by_parts_quadrature(res.n, np))?;
    let paths = u.relative_difference(&u2);

    let rows = rungs
        .iter()
        .map(|r| {
            let w = ForcingSpec::Random {
                seed,
                n_low: rungs[0].n.div_ceil(2),
            }
            .build(setting, *r)?;
            let pr = pressure(&w, r.n_pressure())?;
            let u = velocity(&w, &pr);
            let (res_norm, w_norm) = pde_residual(&w, &pr, &u);
            ResidualReport::new("pipeline", "pde_residual", Some(*r), res_norm, w_norm)
        })
        .collect::<Result<Vec<_>>>()?;
    let table = ConvergenceTable::new(rows)?.with_min_order(tol::MIN_ORDER);
    Ok((
        vec![
            ResidualReport::new(
                "pipeline",
                "pressure_linearity",
                Some(res),
                lin_err,
                lin_norm,
            )?
            .with_tolerance(tol::LINEARITY),
            ResidualReport::value("pipeline", "velocity_paths_agreement", Some(res), paths)?
                .with_tolerance(tol::VELOCITY_PATHS),
        ],
        table,
    ))
}
