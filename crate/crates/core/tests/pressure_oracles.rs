use stokes_green_core::math::gauss_legendre;
use stokes_green_core::stokes::{pressure, pressure_gradient, source_s, source_s_dt, Forcing};
use stokes_green_core::verification::{ForcingSpec, Resolution, Setting};
use stokes_green_core::{BoxDomain, Kernels, SpatialGrid, TimeGrid, TruncationPolicy};

fn odd_box() -> BoxDomain {
    BoxDomain::new([1.0, 1.2, 0.8], 0.8).unwrap()
}

#[test]
#[allow(clippy::needless_range_loop)]
fn source_matches_direct_quadrature_of_the_kernel_gradient() {
    let d = odd_box();
    let t_final = 0.5;
    let time = TimeGrid::new(t_final, 4).unwrap();
    let w = Forcing::random(d, time, 4, 3, 17).unwrap();
    let (s, _) = source_s(&w);
    let k = time.steps();
    let t = time.knot(k);

    // n_kernel and M only need discrete orthogonality for the modes of w
    let kernels = Kernels::new(d, TruncationPolicy::new(8, 3, 1e-12).unwrap()).unwrap();
    let grid = SpatialGrid::new(d, 24).unwrap();
    let samples: Vec<[Vec<f64>; 3]> = (0..time.len())
        .map(|j| {
            core::array::from_fn(|i| {
                w.components()[i].slices()[j]
                    .sample_grid(&grid)
                    .values()
                    .to_vec()
            })
        })
        .collect();
    // panels halving toward tau = t resolve exp(-rho lambda (t - tau))
    let mut panels: Vec<(usize, f64, f64)> = (0..k - 1)
        .map(|j| (j, time.knot(j), time.knot(j + 1)))
        .collect();
    let mut width = time.dt();
    for _ in 0..12 {
        panels.push((k - 1, t - width, t - 0.5 * width));
        width *= 0.5;
    }
    panels.push((k - 1, t - width, t));
    let points = [[0.31, 0.52, 0.27], [0.5, 1.0, 0.4]];
    for x in points {
        let mut total = 0.0;
        for (interval, a, b) in &panels {
            let (nodes, weights) = gauss_legendre(10, b - a);
            for (node, weight) in nodes.iter().zip(&weights) {
                let tau = a + node;
                let frac = (tau - time.knot(*interval)) / time.dt();
                for j in 0..grid.len() {
                    let g = kernels.grad_x_g_spectral(x, t, grid.point(j), tau).unwrap();
                    for i in 0..3 {
                        let wv = (1.0 - frac) * samples[*interval][i][j]
                            + frac * samples[interval + 1][i][j];
                        total += weight * g[i] * wv;
                    }
                }
            }
        }
        total *= grid.cell_volume();
        let modal = s.slices()[k].eval(x);
        assert!(
            (modal - total).abs() <= 1e-6 * modal.abs(),
            "{modal} {total}"
        );
    }
}

#[test]
fn source_rate_matches_centered_differences() {
    let s = Setting {
        domain: odd_box(),
        t_final: 0.5,
    };
    let x = [0.4, 0.7, 0.3];
    let errs: Vec<f64> = [32, 64]
        .iter()
        .map(|k| {
            let res = Resolution::new(4, 8, *k).unwrap();
            let w = ForcingSpec::Random { seed: 2, n_low: 3 }
                .build(&s, res)
                .unwrap();
            let (src, dec) = source_s(&w);
            let rate = source_s_dt(&dec);
            let dt = res.time(s.t_final).unwrap().dt();
            (1..*k)
                .map(|j| {
                    let fd =
                        (src.slices()[j + 1].eval(x) - src.slices()[j - 1].eval(x)) / (2.0 * dt);
                    (fd - rate.slices()[j].eval(x)).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let order = (errs[0] / errs[1]).log2();
    assert!(order > 1.8, "{errs:?}");
}

#[test]
fn pressure_gradient_matches_centered_differences() {
    let s = Setting {
        domain: odd_box(),
        t_final: 0.5,
    };
    let res = Resolution::new(6, 12, 16).unwrap();
    let w = ForcingSpec::Random { seed: 8, n_low: 3 }
        .build(&s, res)
        .unwrap();
    let pr = pressure(&w, res.n_pressure()).unwrap();
    let g = pressure_gradient(&pr);
    let k = 10;
    let p = &pr.pressure().slices()[k];
    let x = [0.35, 0.61, 0.42];
    let errs: Vec<f64> = [1e-3, 5e-4]
        .iter()
        .map(|h| {
            (0..3)
                .map(|a| {
                    let (mut xp, mut xm) = (x, x);
                    xp[a] += h;
                    xm[a] -= h;
                    ((p.eval(xp) - p.eval(xm)) / (2.0 * h) - g[a].slices()[k].eval(x)).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[1] < 1e-5 && errs[1] < errs[0], "{errs:?}");
}

/// `L2(Q_t)` distance between the pressure at `coarse` and at twice the modes
/// and four times the steps, relative to the reference.
#[test]
fn single_mode_pressure_matches_refined_reference() {
    let s = Setting::unit(0.5);
    let spec = ForcingSpec::SteadyMode {
        index: [1, 2, 1],
        amplitude: 1.0,
    };
    let coarse = Resolution::new(12, 32, 128).unwrap();
    let fine = Resolution::new(24, 48, 512).unwrap();
    let pc = pressure(&spec.build(&s, coarse).unwrap(), coarse.n_pressure()).unwrap();
    let pf = pressure(&spec.build(&s, fine).unwrap(), fine.n_pressure()).unwrap();
    let weights = coarse.time(s.t_final).unwrap().trapezoid_weights();
    let (mut err, mut norm) = (0.0, 0.0);
    for (k, wk) in weights.iter().enumerate() {
        let reference = &pf.pressure().slices()[4 * k];
        let mut diff = reference.clone();
        diff.axpy(-1.0, &pc.pressure().slices()[k]);
        err += wk * diff.norm_sq();
        norm += wk * reference.norm_sq();
    }
    let rel = (err / norm).sqrt();
    assert!(rel <= 1e-4, "{rel}");
}
