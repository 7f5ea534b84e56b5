//! Measurements of identities the pressure construction relies on. None of
//! these carry a tolerance: each produces a residual per rung and a trend.

use alloc::format;
use alloc::vec::Vec;

use crate::domain::Basis;
use crate::error::{invalid, Error, Result};
use crate::heat::duhamel_series;
use crate::math::sqrt;
use crate::series::{Parity, SeriesHistory, TrigSeries};
use crate::stokes::{
    divergence, negative_inverse_laplacian, pressure, pressure_gradient, sobolev_norm_w221,
    vector_l2_norm, velocity, Forcing,
};
use crate::transform::{BasisTables, NodeSet};

use super::manufactured::ManufacturedCase;
use super::{ConvergenceTable, EstimateReport, ResidualReport, Resolution, Setting};

/// Test densities for the corrector identities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TestPressure {
    Zero,
    /// One eigenfunction, constant in time.
    Mode([usize; 3]),
    /// Random sine series on modes `<= n_low`, smooth in time; the same field on every rung.
    Random {
        seed: u64,
        n_low: usize,
    },
}

impl TestPressure {
    pub fn build(&self, setting: &Setting, res: Resolution) -> Result<SeriesHistory> {
        let time = res.time(setting.t_final)?;
        let d = setting.domain;
        match *self {
            TestPressure::Zero => Ok(SeriesHistory::zeros(time, d, res.n)),
            TestPressure::Mode(idx) => {
                if idx.iter().any(|k| *k > res.n || *k == 0) {
                    return Err(invalid(format!(
                        "mode {idx:?} outside the truncation N={}",
                        res.n
                    )));
                }
                let f =
                    Forcing::from_modes(
                        d,
                        time,
                        res.n,
                        |i, m, _| if i == 0 && m == idx { 1.0 } else { 0.0 },
                    );
                Ok(f.components()[0].clone())
            }
            TestPressure::Random { seed, n_low } => {
                Ok(
                    Forcing::random(d, time, res.n, n_low.min(res.n), seed)?.components()[0]
                        .clone(),
                )
            }
        }
    }

    pub fn label(&self) -> alloc::string::String {
        match self {
            TestPressure::Zero => "zero".into(),
            TestPressure::Mode(m) => format!("mode_{}_{}_{}", m[0], m[1], m[2]),
            TestPressure::Random { seed, .. } => format!("random_{seed}"),
        }
    }
}

/// `<du_n/dx_i, s>` for every sine index `n <= n_out`, stored as sine-indexed coefficients.
fn gradient_moments(s: &TrigSeries, axis: usize, n_out: usize) -> TrigSeries {
    let basis = Basis::new(*s.domain(), n_out).expect("n >= 1");
    let mut c = s.project(Parity::gradient(axis), n_out);
    for (m, v) in c.iter_mut().enumerate() {
        *v *= basis.wavenumber(axis, basis.index(m)[axis]);
    }
    TrigSeries::from_part(*s.domain(), n_out, Parity::SINE, c).expect("sized")
}

/// Corrector potential `int int (sum_i d^2V/dx_i dxi_i + Laplace_x V) p`.
///
/// The free-space parts cancel, leaving the Green function only:
/// `sum_n [-lambda_n h_n u_n + sum_i H_{i,n} du_n/dx_i]` with
/// `h_n = Duhamel <u_n, p>` and `H_{i,n} = Duhamel <du_n/dx_i, p>`.
pub fn corrector_potential(p: &SeriesHistory) -> SeriesHistory {
    let n = p.n();
    let h = duhamel_series(&p.map(|s| TrigSeries::from_sine(&s.sine_projection(n))));
    let mut out = h.map(TrigSeries::laplacian);
    for axis in 0..3 {
        let big_h = duhamel_series(&p.map(|s| gradient_moments(s, axis, n)));
        out = out.plus(1.0, &big_h.map(|s| s.derivative(axis)));
    }
    out
}

fn report(
    suite: &str,
    check: &str,
    res: Resolution,
    residual: f64,
    normalization: f64,
) -> Result<ResidualReport> {
    ResidualReport::new(suite, check, Some(res), residual, normalization)
}

/// `||T (V p)|| / ||V p||`; zero when the corrector potential satisfies the heat equation.
pub fn check_corrector_heat_identity(
    p_test: &SeriesHistory,
    res: Resolution,
) -> Result<ResidualReport> {
    let vp = corrector_potential(p_test);
    let r = vp.heat_operator();
    report("corrector_heat", "T(Vp)", res, r.l2_norm(), vp.l2_norm())
}

/// `||T Laplace^{-1} (V p)|| / ||Laplace^{-1} V p||`.
pub fn check_corrector_elliptic_identity(
    p_test: &SeriesHistory,
    res: Resolution,
    n_pressure: usize,
) -> Result<ResidualReport> {
    let vp = corrector_potential(p_test);
    let inv = vp.map(|s| negative_inverse_laplacian(s, n_pressure));
    let r = inv.heat_operator();
    report(
        "corrector_elliptic",
        "T(inv_lap(Vp))",
        res,
        r.l2_norm(),
        inv.l2_norm(),
    )
}

/// Residual of `p - T Laplace^{-1} V p = -T Laplace^{-1} S`, normalized by `||p||`.
pub fn check_integral_equation(w: &Forcing, res: Resolution) -> Result<ResidualReport> {
    let n_p = res.n_pressure();
    let pr = pressure(w, n_p)?;
    let p = pr.pressure();
    let vp = corrector_potential(p);
    // p + T(-inv_lap)(Vp - S)
    let diff = vp.plus(-1.0, pr.source());
    let t_term = diff
        .map(|s| negative_inverse_laplacian(s, n_p))
        .heat_operator();
    let r = p.plus(1.0, &t_term);
    report(
        "integral_equation",
        "p-TinvVp+TinvS",
        res,
        r.l2_norm(),
        p.l2_norm(),
    )
}

/// `Laplace p` against `div w` with both signs: `[Laplace p - div w, Laplace p + div w]`.
pub fn check_pressure_poisson(w: &Forcing, res: Resolution) -> Result<[ResidualReport; 2]> {
    let pr = pressure(w, res.n_pressure())?;
    let lap = pr.pressure().map(TrigSeries::laplacian);
    let n_max = lap.n();
    let div = w.divergence().map(|s| s.resized(n_max));
    let norm = div.l2_norm();
    let minus = lap.plus(-1.0, &div).l2_norm();
    let plus = lap.plus(1.0, &div).l2_norm();
    Ok([
        report("pressure_poisson", "lap_p_minus_div_w", res, minus, norm)?,
        report("pressure_poisson", "lap_p_plus_div_w", res, plus, norm)?,
    ])
}

/// `int sum ||dp/dx_i||^2` with the inverse Laplacian truncated at `N` and
/// `2N`, and the relative change between the two.
pub fn check_pressure_regularity(w: &Forcing, res: Resolution) -> Result<[ResidualReport; 3]> {
    let n_p = res.n;
    let energy = |np: usize| -> Result<f64> {
        let g = pressure_gradient(&pressure(w, np)?);
        let v = vector_l2_norm(&g);
        Ok(v * v)
    };
    let (a, b) = (energy(n_p)?, energy(2 * n_p)?);
    Ok([
        ResidualReport::value("pressure_regularity", "grad_p_energy", Some(res), a)?,
        ResidualReport::value("pressure_regularity", "grad_p_energy_2x", Some(res), b)?,
        report(
            "pressure_regularity",
            "truncation_sensitivity",
            res,
            (a - b).abs(),
            b,
        )?,
    ])
}

/// `||div u|| / ||grad u||` of the reconstructed velocity.
pub fn check_divergence(w: &Forcing, res: Resolution) -> Result<ResidualReport> {
    let pr = pressure(w, res.n_pressure())?;
    let d = divergence(&velocity(w, &pr));
    report(
        "divergence",
        "div_u_over_grad_u",
        res,
        d.div_norm,
        d.grad_norm,
    )
}

/// Forcing families used by the ladders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ForcingSpec {
    Zero,
    /// `w = (a u_m, 0, 0)`, constant in time.
    SteadyMode {
        index: [usize; 3],
        amplitude: f64,
    },
    /// `w = grad u_m`, constant in time, projected onto sines.
    GradientMode([usize; 3]),
    /// Random forcing on modes `<= n_low` (fixed across rungs).
    Random {
        seed: u64,
        n_low: usize,
    },
    Manufactured(ManufacturedCase),
}

impl ForcingSpec {
    pub fn build(&self, setting: &Setting, res: Resolution) -> Result<Forcing> {
        let time = res.time(setting.t_final)?;
        let d = setting.domain;
        let n = res.n;
        let check = |idx: [usize; 3]| {
            if idx.iter().any(|k| *k == 0 || *k > n) {
                Err(invalid(format!(
                    "mode {idx:?} outside the truncation N={n}"
                )))
            } else {
                Ok(())
            }
        };
        match *self {
            ForcingSpec::Zero => Ok(Forcing::zeros(d, time, n)),
            ForcingSpec::SteadyMode { index, amplitude } => {
                check(index)?;
                Ok(Forcing::from_modes(d, time, n, |i, m, _| {
                    if i == 0 && m == index {
                        amplitude
                    } else {
                        0.0
                    }
                }))
            }
            ForcingSpec::GradientMode(index) => {
                check(index)?;
                let mode = crate::field::SpectralField::single(d, n, index, 1.0)?;
                let g: [Vec<f64>; 3] = core::array::from_fn(|i| {
                    TrigSeries::from_sine(&mode)
                        .derivative(i)
                        .sine_projection(n)
                        .into_coeffs()
                });
                let basis = Basis::new(d, n)?;
                Ok(Forcing::from_modes(d, time, n, |i, m, _| {
                    g[i][basis.flat(m)]
                }))
            }
            ForcingSpec::Random { seed, n_low } => Forcing::random(d, time, n, n_low.min(n), seed),
            ForcingSpec::Manufactured(case) => {
                Ok(Forcing::from_fn(d, time, n, 2 * n + 16, |x, t| {
                    case.forcing(x, t)
                }))
            }
        }
    }
}

/// Ladder of one per-rung report.
pub fn run_ladder(
    rungs: &[Resolution],
    mut f: impl FnMut(Resolution) -> Result<ResidualReport>,
) -> Result<ConvergenceTable> {
    let rows = rungs.iter().map(|r| f(*r)).collect::<Result<Vec<_>>>()?;
    ConvergenceTable::new(rows)
}

/// Sup ratios of the a-priori estimate over `cases` random forcings at each resolution.
pub fn check_energy_estimate(
    setting: &Setting,
    resolutions: &[Resolution],
    cases: usize,
    seed: u64,
) -> Result<EstimateReport> {
    if resolutions.len() < 2 {
        return Err(invalid("the estimate needs at least two resolutions"));
    }
    if cases < 1 {
        return Err(invalid("the estimate needs a nonempty corpus"));
    }
    let n_low = (resolutions[0].n / 2).max(1);
    let mut pressure_ratios = Vec::new();
    let mut velocity_ratios = Vec::new();
    for res in resolutions {
        let mut pr_row = Vec::with_capacity(cases);
        let mut ve_row = Vec::with_capacity(cases);
        for c in 0..cases {
            let w = ForcingSpec::Random {
                seed: seed.wrapping_add(c as u64),
                n_low,
            }
            .build(setting, *res)?;
            let (a, b) = estimate_ratios(&w, res.n_pressure())?;
            pr_row.push(a);
            ve_row.push(b);
        }
        pressure_ratios.push(pr_row);
        velocity_ratios.push(ve_row);
    }
    Ok(EstimateReport {
        corpus: format!("random_seed{seed}_cases{cases}_nlow{n_low}"),
        resolutions: resolutions.to_vec(),
        pressure_ratios,
        velocity_ratios,
    })
}

/// Both estimate ratios for one forcing; rejects `w = 0`.
pub fn estimate_ratios(w: &Forcing, n_pressure: usize) -> Result<(f64, f64)> {
    let wn = w.l2_norm();
    if wn == 0.0 {
        return Err(Error::ZeroNormalization(
            "estimate ratio for zero forcing".into(),
        ));
    }
    let pr = pressure(w, n_pressure)?;
    let gp = vector_l2_norm(&pressure_gradient(&pr));
    let u = velocity(w, &pr);
    let u_norm = sobolev_norm_w221(u.components());
    Ok((gp * gp / (wn * wn), u_norm / wn))
}

/// Knot stride giving at most 17 sampled knots.
fn time_stride(k: usize) -> usize {
    let mut s = 1;
    while k / s > 16 && k.is_multiple_of(2 * s) {
        s *= 2;
    }
    s
}

/// `L2(Q_t)` error of numerical histories against closed-form values, on a
/// Gauss-Legendre tensor rule and a strided trapezoid rule in time.
fn l2_error<const C: usize>(
    components: &[&SeriesHistory; C],
    q: usize,
    exact: impl Fn([f64; 3], f64) -> [f64; C],
) -> (f64, f64) {
    let first = components[0];
    let domain = *first.domain();
    let nodes = NodeSet::gauss_legendre(&domain, q);
    let tables: Vec<BasisTables> = components
        .iter()
        .map(|c| BasisTables::new(domain, c.n(), nodes.clone()))
        .collect();
    let points: Vec<[f64; 3]> = (0..nodes.len()).map(|j| nodes.point(j)).collect();
    let weights: Vec<f64> = (0..nodes.len()).map(|j| nodes.weight(j)).collect();
    let time = first.time();
    let stride = time_stride(time.steps());
    let samples = time.steps() / stride + 1;
    let dt = time.dt() * stride as f64;
    let (mut err, mut norm) = (0.0, 0.0);
    for s in 0..samples {
        let k = s * stride;
        let t = time.knot(k);
        let vals: Vec<Vec<f64>> = components
            .iter()
            .zip(&tables)
            .map(|(c, tab)| c.slices()[k].sample(tab))
            .collect();
        let (mut e, mut nn) = (0.0, 0.0);
        for (j, x) in points.iter().enumerate() {
            let ex = exact(*x, t);
            for c in 0..C {
                let d = vals[c][j] - ex[c];
                e += weights[j] * d * d;
                nn += weights[j] * ex[c] * ex[c];
            }
        }
        let wt = if s == 0 || s + 1 == samples {
            0.5 * dt
        } else {
            dt
        };
        err += wt * e;
        norm += wt * nn;
    }
    (sqrt(err), sqrt(norm))
}

/// Errors of the reconstructed pressure gradient and velocity against a
/// manufactured solution, and the divergence ratio of the reconstruction,
/// across `rungs`.
pub fn run_manufactured_comparison(
    setting: &Setting,
    case: &ManufacturedCase,
    rungs: &[Resolution],
) -> Result<[ConvergenceTable; 3]> {
    let mut gp_rows = Vec::new();
    let mut u_rows = Vec::new();
    let mut div_rows = Vec::new();
    for res in rungs {
        let w = ForcingSpec::Manufactured(*case).build(setting, *res)?;
        let pr = pressure(&w, res.n_pressure())?;
        let g = pressure_gradient(&pr);
        let q = pr.pressure().n() + 8;
        let (e, n) = l2_error(&[&g[0], &g[1], &g[2]], q, |x, t| {
            case.pressure_gradient(x, t)
        });
        gp_rows.push(report("manufactured", "grad_p_error", *res, e, n)?);
        let u = velocity(&w, &pr);
        let c = u.components();
        let (e, n) = l2_error(&[&c[0], &c[1], &c[2]], res.n + 8, |x, t| {
            case.velocity(x, t)
        });
        u_rows.push(report("manufactured", "velocity_error", *res, e, n)?);
        let d = divergence(&u);
        div_rows.push(report(
            "manufactured",
            "div_u_over_grad_u",
            *res,
            d.div_norm,
            d.grad_norm,
        )?);
    }
    Ok([
        ConvergenceTable::new(gp_rows)?,
        ConvergenceTable::new(u_rows)?,
        ConvergenceTable::new(div_rows)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verification::{PressurePattern, TimeProfile};

    fn setting() -> Setting {
        Setting::unit(0.5)
    }

    #[test]
    fn zero_inputs_give_zero_residuals() {
        let res = Resolution::new(3, 8, 8).unwrap();
        let p = TestPressure::Zero.build(&setting(), res).unwrap();
        assert_eq!(
            check_corrector_heat_identity(&p, res).unwrap().normalized,
            0.0
        );
        assert_eq!(
            check_corrector_elliptic_identity(&p, res, 6)
                .unwrap()
                .normalized,
            0.0
        );
        let w = ForcingSpec::Zero.build(&setting(), res).unwrap();
        assert_eq!(check_integral_equation(&w, res).unwrap().normalized, 0.0);
        assert_eq!(
            check_pressure_regularity(&w, res).unwrap()[0].normalized,
            0.0
        );
        assert!(estimate_ratios(&w, 6).is_err());
        let t = run_manufactured_comparison(
            &setting(),
            &ManufacturedCase::trivial(setting().domain),
            &[res],
        )
        .unwrap();
        assert!(t.iter().all(|t| t.rows[0].normalized == 0.0));
    }

    #[test]
    fn corrector_of_interior_constant_is_a_heat_solution_modally() {
        // For a single mode the sine part alone satisfies the heat equation;
        // only the cosine-projected parts can leave a residual.
        let res = Resolution::new(4, 8, 32).unwrap();
        let p = TestPressure::Mode([1, 1, 1])
            .build(&setting(), res)
            .unwrap();
        let r = check_corrector_heat_identity(&p, res).unwrap();
        assert!(r.normalized.is_finite() && r.normalization > 0.0);
    }

    #[test]
    fn gradient_forcing_poisson_signs() {
        let res = Resolution::new(6, 12, 16).unwrap();
        let w = ForcingSpec::GradientMode([1, 1, 1])
            .build(&setting(), res)
            .unwrap();
        let [minus, plus] = check_pressure_poisson(&w, res).unwrap();
        assert!(
            plus.normalized < minus.normalized,
            "{} {}",
            plus.normalized,
            minus.normalized
        );
    }

    #[test]
    fn reports_are_deterministic() {
        let res = Resolution::new(4, 8, 16).unwrap();
        let w = ForcingSpec::Random { seed: 3, n_low: 2 }
            .build(&setting(), res)
            .unwrap();
        let a = check_integral_equation(&w, res).unwrap();
        let b = check_integral_equation(&w, res).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn manufactured_projection_converges() {
        // the viscous term of the forcing does not vanish on the faces, so the
        // sine series converges slowly in L2 (about N^-1/2)
        let case = ManufacturedCase::new(
            setting().domain,
            TimeProfile::Quadratic,
            PressurePattern::Zero,
        );
        let errs: Vec<f64> = [4, 8, 16]
            .iter()
            .map(|n| {
                let res = Resolution::new(*n, 2 * n, 8).unwrap();
                let w = ForcingSpec::Manufactured(case)
                    .build(&setting(), res)
                    .unwrap();
                let c = w.components();
                let (e, norm) = l2_error(&[&c[0], &c[1], &c[2]], 40, |x, t| case.forcing(x, t));
                e / norm
            })
            .collect();
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        assert!(errs[2] < 0.2);
    }
}
