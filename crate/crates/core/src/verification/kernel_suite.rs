//! Pointwise properties of `Z`, `G` and `V`.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::SpatialGrid;
use crate::error::Result;
use crate::kernels::{Kernels, TruncationPolicy};
use crate::math::{gauss_legendre, sqrt};

use super::consistency::tol;
use super::{ConvergenceTable, ResidualReport, Setting};

const SUITE: &str = "kernels";

fn value(check: &str, v: f64, tolerance: f64) -> Result<ResidualReport> {
    Ok(ResidualReport::value(SUITE, check, None, v)?.with_tolerance(tolerance))
}

fn random_point(rng: &mut ChaCha8Rng, l: [f64; 3]) -> [f64; 3] {
    core::array::from_fn(|a| rng.random_range(0.0..l[a]))
}

/// Mass of `Z` on a cube of half-width `half_widths * sqrt(rho s)` around `x`.
pub fn z_mass(kernels: &Kernels, x: [f64; 3], s: f64, half_widths: f64, q: usize) -> Result<f64> {
    let sigma = sqrt(kernels.domain().rho() * s);
    let width = 2.0 * half_widths * sigma;
    let (nodes, weights) = gauss_legendre(q, width);
    let mut total = 0.0;
    for (i, wi) in weights.iter().enumerate() {
        for (j, wj) in weights.iter().enumerate() {
            for (k, wk) in weights.iter().enumerate() {
                let xi = [
                    x[0] - 0.5 * width + nodes[i],
                    x[1] - 0.5 * width + nodes[j],
                    x[2] - 0.5 * width + nodes[k],
                ];
                total += wi * wj * wk * kernels.z(x, s, xi, 0.0)?;
            }
        }
    }
    Ok(total)
}

/// `int G(x,t;y,s) G(y,s;xi,tau) dy` on the interior grid with `m` nodes per axis.
pub fn semigroup_integral(
    kernels: &Kernels,
    x: [f64; 3],
    t: f64,
    y_time: f64,
    xi: [f64; 3],
    tau: f64,
    m: usize,
) -> Result<f64> {
    let grid = SpatialGrid::new(*kernels.domain(), m)?;
    let mut total = 0.0;
    for j in 0..grid.len() {
        let y = grid.point(j);
        total += kernels.g_spectral(x, t, y, y_time)? * kernels.g_spectral(y, y_time, xi, tau)?;
    }
    Ok(total * grid.cell_volume())
}

/// `|(d/dt - rho Laplace_x) G| / |dG/dt|` by centered differences with step `h`
/// in space and time.
pub fn heat_residual(
    kernels: &Kernels,
    x: [f64; 3],
    t: f64,
    xi: [f64; 3],
    tau: f64,
    h: f64,
) -> Result<f64> {
    let g = |x: [f64; 3], t: f64| kernels.g_spectral(x, t, xi, tau);
    let g0 = g(x, t)?;
    let dt = (g(x, t + h)? - g(x, t - h)?) / (2.0 * h);
    let mut lap = 0.0;
    for a in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[a] += h;
        xm[a] -= h;
        lap += (g(xp, t)? - 2.0 * g0 + g(xm, t)?) / (h * h);
    }
    Ok((dt - kernels.domain().rho() * lap).abs() / dt.abs())
}

/// Every kernel invariant with its tolerance, plus the finite-difference heat
/// residual of `G` under refinement.
pub fn run_kernel_suite(
    setting: &Setting,
    policy: TruncationPolicy,
) -> Result<(Vec<ResidualReport>, ConvergenceTable)> {
    let k = Kernels::new(setting.domain, policy)?;
    let d = setting.domain;
    let l = d.lengths();
    let rho = d.rho();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::new();

    let peak = k.z([0.3; 3], 1.0, [0.3; 3], 0.0)?;
    let exact_peak = 1.0 / (4.0 * PI * rho * sqrt(4.0 * PI * rho));
    out.push(value(
        "z_peak_closed_form",
        (peak - exact_peak).abs() / exact_peak,
        1e-14,
    )?);

    let mut anti: f64 = 0.0;
    for _ in 0..100 {
        let (x, xi) = (random_point(&mut rng, l), random_point(&mut rng, l));
        let s = rng.random_range(0.02..0.5);
        let gx = k.grad_x_z(x, s, xi, 0.0)?;
        let gxi = k.grad_xi_z(x, s, xi, 0.0)?;
        for a in 0..3 {
            anti = anti.max((gx[a] + gxi[a]).abs());
        }
    }
    out.push(value("z_gradient_antisymmetry", anti, 0.0)?);

    let mass = z_mass(&k, d.center(), 0.05, 12.0, 48)?;
    out.push(value("z_mass", (mass - 1.0).abs(), tol::Z_MASS)?);

    let (mut sym_s, mut sym_i, mut agree, mut scale_max): (f64, f64, f64, f64) =
        (0.0, 0.0, 0.0, 0.0);
    for _ in 0..100 {
        let (x, xi) = (random_point(&mut rng, l), random_point(&mut rng, l));
        let s = rng.random_range(0.02..0.5);
        let gs = k.g_spectral(x, s, xi, 0.0)?;
        let gi = k.g_images(x, s, xi, 0.0)?;
        let scale = gs.abs().max(k.z(x, s, x, 0.0)?);
        scale_max = scale_max.max(scale);
        sym_s = sym_s.max((gs - k.g_spectral(xi, s, x, 0.0)?).abs() / scale);
        sym_i = sym_i.max((gi - k.g_images(xi, s, x, 0.0)?).abs() / scale);
        agree = agree.max((gs - gi).abs() / scale);
    }
    out.push(value("g_spectral_symmetry", sym_s, tol::SYMMETRY)?);
    out.push(value("g_images_symmetry", sym_i, tol::SYMMETRY)?);
    out.push(value(
        "g_construction_agreement",
        agree,
        tol::KERNEL_AGREEMENT,
    )?);

    let center = d.center();
    let s_short = 1e-3 * d.min_length() * d.min_length() / rho;
    let gi = k.g_images(center, s_short, center, 0.0)?;
    let z = k.z(center, s_short, center, 0.0)?;
    out.push(value(
        "g_images_short_time_equals_z",
        (gi - z).abs() / z,
        1e-10,
    )?);

    let (mut bs, mut bi, mut vz): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for j in 0..60 {
        let x = random_point(&mut rng, l);
        let mut xi = random_point(&mut rng, l);
        let axis = j % 3;
        xi[axis] = if j % 2 == 0 { 0.0 } else { l[axis] };
        let s = rng.random_range(0.005..0.25 * d.min_length() * d.min_length() / rho);
        let zs = k.z(x, s, x, 0.0)?;
        bs = bs
            .max(k.g_spectral(x, s, xi, 0.0)?.abs())
            .max(k.g_spectral(xi, s, x, 0.0)?.abs());
        bi = bi.max(k.g_images(x, s, xi, 0.0)?.abs() / zs);
        vz = vz.max((k.v(x, s, xi, 0.0)? + k.z(x, s, xi, 0.0)?).abs() / zs);
    }
    out.push(value("g_spectral_vanishes_on_faces", bs, 0.0)?);
    out.push(value(
        "g_images_vanishes_on_faces",
        bi,
        tol::IMAGE_BOUNDARY,
    )?);
    out.push(value("v_equals_minus_z_on_faces", vz, tol::IMAGE_BOUNDARY)?);

    let v_end = k.v(center, policy.eps_t, center, 0.0)?.abs();
    out.push(value("v_terminal_value", v_end, 1e-8)?);

    let (x, xi) = (
        [0.4 * l[0], 0.5 * l[1], 0.6 * l[2]],
        [0.5 * l[0], 0.45 * l[1], 0.55 * l[2]],
    );
    let lhs = semigroup_integral(&k, x, 0.3, 0.2, xi, 0.1, 48)?;
    let rhs = k.g_spectral(x, 0.3, xi, 0.1)?;
    out.push(value(
        "semigroup",
        (lhs - rhs).abs() / rhs.abs(),
        tol::SEMIGROUP,
    )?);

    // centered differences of Z and spectral G against the analytic gradients
    let h = 1e-5;
    let (mut fd_z, mut fd_g): (f64, f64) = (0.0, 0.0);
    let (x, xi, s) = (
        [0.3 * l[0], 0.6 * l[1], 0.45 * l[2]],
        [0.5 * l[0], 0.4 * l[1], 0.5 * l[2]],
        0.07,
    );
    let gz = k.grad_x_z(x, s, xi, 0.0)?;
    let gg = k.grad_x_g_spectral(x, s, xi, 0.0)?;
    let (nz, ng) = (
        gz.iter().map(|v| v.abs()).fold(0.0, f64::max),
        gg.iter().map(|v| v.abs()).fold(0.0, f64::max),
    );
    for a in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[a] += h;
        xm[a] -= h;
        fd_z = fd_z
            .max(((k.z(xp, s, xi, 0.0)? - k.z(xm, s, xi, 0.0)?) / (2.0 * h) - gz[a]).abs() / nz);
        fd_g = fd_g.max(
            ((k.g_spectral(xp, s, xi, 0.0)? - k.g_spectral(xm, s, xi, 0.0)?) / (2.0 * h) - gg[a])
                .abs()
                / ng,
        );
    }
    out.push(value("grad_x_z_finite_difference", fd_z, 1e-6)?);
    out.push(value("grad_x_g_finite_difference", fd_g, 1e-6)?);

    let mid = (
        [0.5 * l[0], 0.5 * l[1], 0.5 * l[2]],
        [0.5 * l[0], 0.5 * l[1], 0.2 * l[2]],
    );
    let g_mid = k.grad_x_g_spectral(mid.0, 0.2, mid.1, 0.0)?;
    out.push(value(
        "grad_x_g_odd_components_at_center",
        g_mid[0].abs().max(g_mid[1].abs()),
        1e-12,
    )?);

    let (x, xi) = (
        [0.4 * l[0], 0.5 * l[1], 0.6 * l[2]],
        [0.55 * l[0], 0.5 * l[1], 0.45 * l[2]],
    );
    let rows = [0.02, 0.01, 0.005]
        .iter()
        .map(|h| {
            ResidualReport::value(
                SUITE,
                "g_heat_residual",
                None,
                heat_residual(&k, x, 0.1, xi, 0.0, *h)?,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let table = ConvergenceTable::new(rows)?.with_min_order(tol::MIN_ORDER);
    Ok((out, table))
}
