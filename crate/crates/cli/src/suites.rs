//! Named verification suites, run as independent jobs, and their flattening
//! into report rows and verdicts.

use rayon::prelude::*;
use serde::{Serialize, Serializer};
use stokes_green_core::verification::{
    basis_suite, check_corrector_elliptic_identity, check_corrector_heat_identity,
    check_divergence, check_integral_equation, check_pressure_poisson, check_pressure_regularity,
    estimate_ratios, heat_suite, ladder, pipeline_suite, run_kernel_suite,
    run_manufactured_comparison, ConvergenceTable, EstimateReport, ForcingSpec, ManufacturedCase,
    PressurePattern, ResidualReport, Resolution, Setting, TestPressure, TimeProfile, Verdict,
};
use stokes_green_core::TruncationPolicy;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Cases in the estimate corpus.
pub const ESTIMATE_CASES: usize = 10;
/// Allowed spread of the estimate's sup ratios between resolutions, in percent.
pub const ESTIMATE_STABILITY_PERCENT: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteName {
    Basis,
    Kernels,
    Heat,
    Pipeline,
    CorrectorHeat,
    CorrectorElliptic,
    IntegralEquation,
    PressurePoisson,
    PressureRegularity,
    Divergence,
    Manufactured,
    Estimate,
}

impl SuiteName {
    pub const ALL: [SuiteName; 12] = [
        SuiteName::Basis,
        SuiteName::Kernels,
        SuiteName::Heat,
        SuiteName::Pipeline,
        SuiteName::CorrectorHeat,
        SuiteName::CorrectorElliptic,
        SuiteName::IntegralEquation,
        SuiteName::PressurePoisson,
        SuiteName::PressureRegularity,
        SuiteName::Divergence,
        SuiteName::Manufactured,
        SuiteName::Estimate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SuiteName::Basis => "basis",
            SuiteName::Kernels => "kernels",
            SuiteName::Heat => "heat",
            SuiteName::Pipeline => "pipeline",
            SuiteName::CorrectorHeat => "corrector_heat",
            SuiteName::CorrectorElliptic => "corrector_elliptic",
            SuiteName::IntegralEquation => "integral_equation",
            SuiteName::PressurePoisson => "pressure_poisson",
            SuiteName::PressureRegularity => "pressure_regularity",
            SuiteName::Divergence => "divergence",
            SuiteName::Manufactured => "manufactured",
            SuiteName::Estimate => "estimate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|n| n.as_str() == s)
    }

    /// Suites whose output is a refinement ladder.
    pub fn is_ladder(self) -> bool {
        !matches!(self, SuiteName::Basis | SuiteName::Estimate)
    }
}

/// Names accepted under `tolerances.`: every hard check plus the ladder order
/// and the estimate stability bound.
pub const TOLERANCE_NAMES: &[&str] = &[
    "orthonormality_max_error",
    "transform_round_trip",
    "z_peak_closed_form",
    "z_gradient_antisymmetry",
    "z_mass",
    "g_spectral_symmetry",
    "g_images_symmetry",
    "g_construction_agreement",
    "g_images_short_time_equals_z",
    "g_spectral_vanishes_on_faces",
    "g_images_vanishes_on_faces",
    "v_equals_minus_z_on_faces",
    "v_terminal_value",
    "semigroup",
    "grad_x_z_finite_difference",
    "grad_x_g_finite_difference",
    "grad_x_g_odd_components_at_center",
    "laplacian_of_inverse",
    "inverse_laplacian_pairing_positive_part",
    "single_mode_closed_form",
    "linear_forcing_exactness",
    "pressure_linearity",
    "velocity_paths_agreement",
    "min_order",
    "estimate_stability_percent",
];

pub fn is_tolerance_name(name: &str) -> bool {
    TOLERANCE_NAMES.contains(&name)
}

fn opt_f64<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_f64(*x),
        None => s.serialize_str(""),
    }
}

/// One CSV row: `suite,case,N,M,K,metric,value,normalization,order_estimate`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub suite: String,
    pub case: String,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "M")]
    pub m: Option<usize>,
    #[serde(rename = "K")]
    pub k: Option<usize>,
    pub metric: String,
    pub value: f64,
    #[serde(serialize_with = "opt_f64")]
    pub normalization: Option<f64>,
    #[serde(serialize_with = "opt_f64")]
    pub order_estimate: Option<f64>,
}

impl Row {
    fn from_report(case: &str, r: &ResidualReport, order: Option<f64>) -> Self {
        Self {
            suite: r.suite.clone(),
            case: case.into(),
            n: r.resolution.map(|x| x.n),
            m: r.resolution.map(|x| x.m),
            k: r.resolution.map(|x| x.k),
            metric: r.check.clone(),
            value: r.normalized,
            normalization: Some(r.normalization),
            order_estimate: order,
        }
    }

    pub fn plain(
        suite: &str,
        case: &str,
        res: Option<Resolution>,
        metric: &str,
        value: f64,
    ) -> Self {
        Self {
            suite: suite.into(),
            case: case.into(),
            n: res.map(|x| x.n),
            m: res.map(|x| x.m),
            k: res.map(|x| x.k),
            metric: metric.into(),
            value,
            normalization: None,
            order_estimate: None,
        }
    }
}

/// Verdict of one check, for the console summary and the exit code.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub suite: String,
    pub case: String,
    pub check: String,
    pub verdict: Verdict,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SuiteOutcome {
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
}

impl SuiteOutcome {
    pub fn failed(&self) -> bool {
        self.checks.iter().any(|c| c.verdict == Verdict::Fail)
    }

    fn report(&mut self, case: &str, r: &ResidualReport) {
        self.rows.push(Row::from_report(case, r, None));
        if let Some(tol) = r.tolerance {
            self.checks.push(Check {
                suite: r.suite.clone(),
                case: case.into(),
                check: r.check.clone(),
                verdict: r.verdict(),
                detail: format!("{:.3e} (tolerance {tol:.1e})", r.normalized),
            });
        }
    }

    fn table(&mut self, case: &str, t: &ConvergenceTable) {
        for (r, o) in t.rows.iter().zip(&t.orders) {
            self.rows.push(Row::from_report(case, r, *o));
        }
        let orders: Vec<String> = t
            .orders
            .iter()
            .flatten()
            .map(|o| format!("{o:.2}"))
            .collect();
        let last = t.rows.last().map(|r| r.normalized).unwrap_or(0.0);
        let detail = match t.min_order {
            Some(p) => format!(
                "orders [{}] (minimum {p}), finest {last:.3e}",
                orders.join(", ")
            ),
            None => {
                let flag = if t.is_flagged() { ", flagged" } else { "" };
                format!(
                    "trend {}{flag}, orders [{}], finest {last:.3e}",
                    t.trend.as_str(),
                    orders.join(", ")
                )
            }
        };
        self.checks.push(Check {
            suite: t.suite.clone(),
            case: case.into(),
            check: t.check.clone(),
            verdict: t.verdict(),
            detail,
        });
    }
}

/// Coarsest truncation a ladder may reach; the fixed test modes use index 2.
const MIN_LADDER_N: usize = 2;

/// Rungs ending at `res`: three when possible, else two, never below
/// `N = 2` on the coarsest rung.
pub fn verify_ladder(res: Resolution) -> Result<Vec<Resolution>> {
    [3, 2]
        .iter()
        .filter_map(|r| ladder(res, *r).ok())
        .find(|rungs| rungs[0].n >= MIN_LADDER_N)
        .ok_or_else(|| {
            CliError::Config(vec![format!(
                "{res} cannot be halved; ladders need N, M and K divisible by 2 and N >= {}",
                2 * MIN_LADDER_N
            )])
        })
}

fn apply_tolerances(cfg: &RunConfig, r: &mut ResidualReport) {
    if r.tolerance.is_some() {
        if let Some(t) = cfg.tolerances.get(&r.check) {
            r.tolerance = Some(*t);
        }
    }
}

fn apply_min_order(cfg: &RunConfig, t: &mut ConvergenceTable) {
    if t.min_order.is_some() {
        if let Some(p) = cfg.tolerances.get("min_order") {
            t.min_order = Some(*p);
        }
    }
}

fn manufactured_cases(setting: &Setting) -> [(&'static str, ManufacturedCase); 2] {
    [
        (
            "quadratic_cosine",
            ManufacturedCase::new(
                setting.domain,
                TimeProfile::Quadratic,
                PressurePattern::CosineProduct,
            ),
        ),
        (
            "sine_polynomial",
            ManufacturedCase::new(
                setting.domain,
                TimeProfile::Sine,
                PressurePattern::Polynomial,
            ),
        ),
    ]
}

/// Modes kept by random test fields: fixed across the ladder so every rung
/// sees the same continuous field.
fn corpus_modes(rungs: &[Resolution]) -> usize {
    rungs[0].n.div_ceil(2).max(1)
}

/// Run one suite at the configured resolution (ladders end there).
pub fn run_suite(name: SuiteName, cfg: &RunConfig, seed: u64) -> Result<SuiteOutcome> {
    let setting = cfg.setting();
    let res = cfg.resolution();
    let mut out = SuiteOutcome::default();
    let with_tol = |mut v: Vec<ResidualReport>| {
        v.iter_mut().for_each(|r| apply_tolerances(cfg, r));
        v
    };
    let with_order = |mut t: ConvergenceTable| {
        apply_min_order(cfg, &mut t);
        t
    };
    match name {
        SuiteName::Basis => {
            for r in with_tol(basis_suite(&setting, res)?) {
                out.report("default", &r);
            }
        }
        SuiteName::Kernels => {
            let (reports, table) =
                run_kernel_suite(&setting, TruncationPolicy::for_horizon(cfg.t_final))?;
            for r in with_tol(reports) {
                out.report("default", &r);
            }
            out.table("fd_steps_0.02_0.01_0.005", &with_order(table));
        }
        SuiteName::Heat => {
            let rungs = verify_ladder(res)?;
            let (reports, table) = heat_suite(&setting, res, &rungs)?;
            for r in with_tol(reports) {
                out.report("default", &r);
            }
            out.table("two_mode_oscillating", &with_order(table));
        }
        SuiteName::Pipeline => {
            let rungs = verify_ladder(res)?;
            let (reports, table) = pipeline_suite(&setting, res, &rungs, seed)?;
            for r in with_tol(reports) {
                out.report(&format!("random_{seed}"), &r);
            }
            out.table(&format!("random_{seed}"), &with_order(table));
        }
        SuiteName::CorrectorHeat | SuiteName::CorrectorElliptic => {
            let rungs = verify_ladder(res)?;
            let pressures = [
                TestPressure::Mode([1, 1, 1]),
                TestPressure::Random {
                    seed,
                    n_low: corpus_modes(&rungs),
                },
            ];
            for p in pressures {
                let rows = rungs
                    .iter()
                    .map(|r| {
                        let density = p.build(&setting, *r)?;
                        if name == SuiteName::CorrectorHeat {
                            check_corrector_heat_identity(&density, *r)
                        } else {
                            check_corrector_elliptic_identity(&density, *r, r.n_pressure())
                        }
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                out.table(&p.label(), &ConvergenceTable::new(rows)?);
            }
        }
        SuiteName::IntegralEquation | SuiteName::Divergence => {
            let rungs = verify_ladder(res)?;
            let forcings = [
                (
                    "steady_mode_1_2_1".to_string(),
                    ForcingSpec::SteadyMode {
                        index: [1, 2, 1],
                        amplitude: 1.0,
                    },
                ),
                (
                    format!("random_{seed}"),
                    ForcingSpec::Random {
                        seed,
                        n_low: corpus_modes(&rungs),
                    },
                ),
            ];
            for (label, spec) in forcings {
                let rows = rungs
                    .iter()
                    .map(|r| {
                        let w = spec.build(&setting, *r)?;
                        if name == SuiteName::IntegralEquation {
                            check_integral_equation(&w, *r)
                        } else {
                            check_divergence(&w, *r)
                        }
                    })
                    .collect::<std::result::Result<Vec<_>, _>>()?;
                out.table(&label, &ConvergenceTable::new(rows)?);
            }
        }
        SuiteName::PressurePoisson | SuiteName::PressureRegularity => {
            let rungs = verify_ladder(res)?;
            let forcings = [
                (
                    "gradient_mode_1_1_1".to_string(),
                    ForcingSpec::GradientMode([1, 1, 1]),
                ),
                (
                    format!("random_{seed}"),
                    ForcingSpec::Random {
                        seed,
                        n_low: corpus_modes(&rungs),
                    },
                ),
            ];
            for (label, spec) in forcings {
                let mut columns: Vec<Vec<ResidualReport>> = Vec::new();
                for r in &rungs {
                    let w = spec.build(&setting, *r)?;
                    let reports: Vec<ResidualReport> = if name == SuiteName::PressurePoisson {
                        check_pressure_poisson(&w, *r)?.into()
                    } else {
                        check_pressure_regularity(&w, *r)?.into()
                    };
                    columns.resize(reports.len(), Vec::new());
                    for (c, rep) in columns.iter_mut().zip(reports) {
                        c.push(rep);
                    }
                }
                for c in columns {
                    out.table(&label, &ConvergenceTable::new(c)?);
                }
            }
        }
        SuiteName::Manufactured => {
            let rungs = verify_ladder(res)?;
            for (label, case) in manufactured_cases(&setting) {
                for t in run_manufactured_comparison(&setting, &case, &rungs)? {
                    out.table(label, &t);
                }
            }
        }
        SuiteName::Estimate => {
            let coarse = ladder(res, 2).map_err(|_| {
                CliError::Config(vec![format!(
                    "the estimate compares {res} with its half, which does not exist"
                )])
            })?[0];
            let report = energy_estimate(&setting, &[coarse, res], ESTIMATE_CASES, seed)?;
            let bound = cfg
                .tolerances
                .get("estimate_stability_percent")
                .copied()
                .unwrap_or(ESTIMATE_STABILITY_PERCENT);
            estimate_rows(&mut out, &report, bound);
        }
    }
    Ok(out)
}

/// Estimate ratios over the corpus, cases computed in parallel.
pub fn energy_estimate(
    setting: &Setting,
    resolutions: &[Resolution],
    cases: usize,
    seed: u64,
) -> Result<EstimateReport> {
    let n_low = (resolutions[0].n / 2).max(1);
    let jobs: Vec<(usize, u64)> = (0..resolutions.len())
        .flat_map(|r| (0..cases as u64).map(move |c| (r, c)))
        .collect();
    let ratios = jobs
        .par_iter()
        .map(|(r, c)| {
            let res = resolutions[*r];
            let w = ForcingSpec::Random {
                seed: seed.wrapping_add(*c),
                n_low,
            }
            .build(setting, res)?;
            estimate_ratios(&w, res.n_pressure())
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let split = |f: fn(&(f64, f64)) -> f64| {
        ratios
            .chunks(cases)
            .map(|c| c.iter().map(f).collect())
            .collect()
    };
    Ok(EstimateReport {
        corpus: format!("random_seed{seed}_cases{cases}_nlow{n_low}"),
        resolutions: resolutions.to_vec(),
        pressure_ratios: split(|r| r.0),
        velocity_ratios: split(|r| r.1),
    })
}

fn estimate_rows(out: &mut SuiteOutcome, e: &EstimateReport, bound: f64) {
    let suite = "estimate";
    for (j, res) in e.resolutions.iter().enumerate() {
        for (c, (p, v)) in e.pressure_ratios[j]
            .iter()
            .zip(&e.velocity_ratios[j])
            .enumerate()
        {
            let case = format!("{}#{c}", e.corpus);
            out.rows.push(Row::plain(
                suite,
                &case,
                Some(*res),
                "grad_p_energy_over_w_energy",
                *p,
            ));
            out.rows
                .push(Row::plain(suite, &case, Some(*res), "u_w221_over_w_l2", *v));
        }
        out.rows.push(Row::plain(
            suite,
            &e.corpus,
            Some(*res),
            "sup_grad_p_energy_over_w_energy",
            e.sup_pressure()[j],
        ));
        out.rows.push(Row::plain(
            suite,
            &e.corpus,
            Some(*res),
            "sup_u_w221_over_w_l2",
            e.sup_velocity()[j],
        ));
    }
    let stab = [
        ("pressure_stability_percent", e.pressure_stability_percent()),
        ("velocity_stability_percent", e.velocity_stability_percent()),
    ];
    for (metric, v) in stab {
        out.rows.push(Row::plain(suite, &e.corpus, None, metric, v));
        let pass = e.all_finite() && v.is_finite() && v <= bound;
        out.checks.push(Check {
            suite: suite.into(),
            case: e.corpus.clone(),
            check: metric.into(),
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            detail: format!(
                "{v:.3}% (bound {bound}%), all ratios finite: {}",
                e.all_finite()
            ),
        });
    }
}

/// Run the selected suites as parallel jobs; results keep the input order.
pub fn run_suites(
    names: &[SuiteName],
    cfg: &RunConfig,
    seed: u64,
) -> Result<Vec<(SuiteName, SuiteOutcome)>> {
    names
        .par_iter()
        .map(|n| Ok((*n, run_suite(*n, cfg, seed)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> RunConfig {
        RunConfig {
            n: 4,
            m: 8,
            k: 16,
            ..RunConfig::default()
        }
    }

    #[test]
    fn ladders_stop_at_two_modes() {
        let n_of = |n, m, k| {
            verify_ladder(Resolution::new(n, m, k).unwrap())
                .unwrap()
                .iter()
                .map(|r| r.n)
                .collect::<Vec<_>>()
        };
        assert_eq!(n_of(12, 32, 128), [3, 6, 12]);
        assert_eq!(n_of(4, 8, 16), [2, 4]);
        assert!(verify_ladder(Resolution::new(2, 4, 8).unwrap()).is_err());
    }

    #[test]
    fn names_round_trip() {
        for n in SuiteName::ALL {
            assert_eq!(SuiteName::parse(n.as_str()), Some(n));
        }
        assert_eq!(SuiteName::parse("nope"), None);
    }

    #[test]
    fn every_hard_check_has_a_tolerance_name() {
        let cfg = small();
        for name in [
            SuiteName::Basis,
            SuiteName::Heat,
            SuiteName::Pipeline,
            SuiteName::Kernels,
        ] {
            for c in run_suite(name, &cfg, 1).unwrap().checks {
                if c.check != "T_of_heat_potential"
                    && c.check != "pde_residual"
                    && c.check != "g_heat_residual"
                {
                    assert!(is_tolerance_name(&c.check), "{}", c.check);
                }
            }
        }
    }

    #[test]
    fn tolerance_overrides_apply() {
        let mut cfg = small();
        cfg.tolerances
            .insert("orthonormality_max_error".into(), 0.0);
        cfg.tolerances.insert("min_order".into(), 50.0);
        let basis = run_suite(SuiteName::Basis, &cfg, 1).unwrap();
        let c = basis
            .checks
            .iter()
            .find(|c| c.check == "orthonormality_max_error")
            .unwrap();
        assert!(c.detail.contains("0.0e0"), "{}", c.detail);
        let heat = run_suite(SuiteName::Heat, &cfg, 1).unwrap();
        assert!(heat.failed());
    }

    #[test]
    fn odd_resolutions_cannot_build_a_ladder() {
        let cfg = RunConfig {
            n: 3,
            m: 7,
            k: 9,
            ..RunConfig::default()
        };
        assert!(run_suite(SuiteName::Heat, &cfg, 1).is_err());
        assert!(run_suite(SuiteName::Basis, &cfg, 1).is_ok());
    }
}
