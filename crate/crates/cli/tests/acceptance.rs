//! Desk-scale acceptance run: one PASS/FAIL line per criterion, exit status
//! nonzero if any criterion fails. Runs the default `verify` twice (one and
//! eight worker threads) and the default `solve` twice, about 7 minutes on
//! one core with optimizations.

use std::path::Path;
use std::process::ExitCode;

use stokes_green::commands::{cmd_solve, cmd_verify, SolveOutcome, VerifyOutcome};
use stokes_green::snapshot::FieldSnapshot;
use stokes_green::suites::Row;
use stokes_green::RunConfig;
use stokes_green_core::verification::Verdict;

const REPRO_TOL: f64 = 1e-13;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

/// Outcome of one criterion: failures collected as messages.
struct Criterion {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Criterion {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, msg: impl Into<String>) {
        if !ok {
            self.failures.push(msg.into());
        }
    }
}

fn rows<'a>(
    v: &'a VerifyOutcome,
    suite: &'a str,
    metric: &'a str,
) -> impl Iterator<Item = &'a Row> {
    v.rows()
        .filter(move |r| r.suite == suite && r.metric == metric)
}

/// Every row of `suite/metric` exists and is at most `tol`.
fn bounded(c: &mut Criterion, v: &VerifyOutcome, suite: &str, metric: &str, tol: f64) {
    let vals: Vec<f64> = rows(v, suite, metric).map(|r| r.value).collect();
    c.require(!vals.is_empty(), format!("{suite}/{metric} missing"));
    let worst = vals
        .iter()
        .copied()
        .fold(0.0f64, |a, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    c.require(
        worst <= tol,
        format!("{suite}/{metric} = {worst:.3e} > {tol:.0e}"),
    );
    c.notes.push(format!("{metric} {worst:.2e}"));
}

/// Every order estimate of each case of `suite/metric` is at least `min`.
fn orders(c: &mut Criterion, v: &VerifyOutcome, suite: &str, metric: &str, min: f64) {
    let o: Vec<f64> = rows(v, suite, metric)
        .filter_map(|r| r.order_estimate)
        .collect();
    c.require(
        !o.is_empty(),
        format!("{suite}/{metric} has no order estimates"),
    );
    let worst = o.iter().copied().fold(
        f64::INFINITY,
        |a, b| if b.is_nan() { f64::NAN } else { a.min(b) },
    );
    c.require(
        worst >= min,
        format!("{suite}/{metric} order {worst:.2} < {min}"),
    );
    c.notes.push(format!("{metric} order >= {worst:.2}"));
}

fn all_checks_pass(c: &mut Criterion, v: &VerifyOutcome, suite: &str) {
    let checks: Vec<_> = v.checks().filter(|k| k.suite == suite).collect();
    c.require(!checks.is_empty(), format!("{suite} produced no checks"));
    for k in checks.iter().filter(|k| k.verdict == Verdict::Fail) {
        c.failures
            .push(format!("{suite}/{} failed: {}", k.check, k.detail));
    }
}

fn basis(v: &VerifyOutcome) -> Criterion {
    let mut c = Criterion::new();
    bounded(&mut c, v, "basis", "orthonormality_max_error", 1e-12);
    bounded(&mut c, v, "basis", "transform_round_trip", 1e-12);
    all_checks_pass(&mut c, v, "basis");
    c
}

fn kernels(v: &VerifyOutcome) -> Criterion {
    let mut c = Criterion::new();
    bounded(&mut c, v, "kernels", "g_construction_agreement", 1e-6);
    bounded(&mut c, v, "kernels", "g_spectral_symmetry", 1e-12);
    bounded(&mut c, v, "kernels", "g_images_symmetry", 1e-12);
    bounded(
        &mut c,
        v,
        "kernels",
        "z_gradient_antisymmetry",
        4.0 * f64::EPSILON,
    );
    bounded(&mut c, v, "kernels", "z_mass", 1e-8);
    all_checks_pass(&mut c, v, "kernels");
    c
}

fn heat(v: &VerifyOutcome) -> Criterion {
    let mut c = Criterion::new();
    bounded(&mut c, v, "heat", "laplacian_of_inverse", 1e-12);
    bounded(&mut c, v, "heat", "single_mode_closed_form", 1e-13);
    orders(&mut c, v, "heat", "T_of_heat_potential", 1.8);
    all_checks_pass(&mut c, v, "heat");
    c
}

fn pipeline(v: &VerifyOutcome) -> Criterion {
    let mut c = Criterion::new();
    bounded(&mut c, v, "pipeline", "pressure_linearity", 1e-12);
    bounded(&mut c, v, "pipeline", "velocity_paths_agreement", 1e-6);
    orders(&mut c, v, "pipeline", "pde_residual", 1.8);
    all_checks_pass(&mut c, v, "pipeline");
    c
}

/// Largest difference between two row sets, relative to `max(1, |value|)`;
/// infinite when the rows do not line up.
fn row_distance(a: &[&Row], b: &[&Row]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        if (&x.suite, &x.case, &x.metric, x.n, x.m, x.k)
            != (&y.suite, &y.case, &y.metric, y.n, y.m, y.k)
        {
            return f64::INFINITY;
        }
        let pairs = [
            (Some(x.value), Some(y.value)),
            (x.normalization, y.normalization),
            (x.order_estimate, y.order_estimate),
        ];
        for p in pairs {
            match p {
                (Some(s), Some(t)) if s.to_bits() == t.to_bits() => {}
                (Some(s), Some(t)) => worst = worst.max((s - t).abs() / s.abs().max(1.0)),
                (None, None) => {}
                _ => return f64::INFINITY,
            }
        }
    }
    worst
}

fn claims(v: &VerifyOutcome, rerun: &VerifyOutcome) -> Criterion {
    let mut c = Criterion::new();
    let wanted = [
        ("corrector_heat", "T(Vp)"),
        ("corrector_elliptic", "T(inv_lap(Vp))"),
        ("integral_equation", "p-TinvVp+TinvS"),
        ("pressure_poisson", "lap_p_minus_div_w"),
        ("pressure_poisson", "lap_p_plus_div_w"),
        ("divergence", "div_u_over_grad_u"),
        ("manufactured", "grad_p_error"),
        ("manufactured", "velocity_error"),
    ];
    for (suite, metric) in wanted {
        let r: Vec<&Row> = rows(v, suite, metric).collect();
        c.require(r.len() >= 2, format!("{suite}/{metric}: {} rungs", r.len()));
        c.require(
            r.iter().all(|x| x.value.is_finite()),
            format!("{suite}/{metric}: non-finite entry"),
        );
        let tables: Vec<_> = v
            .checks()
            .filter(|k| k.suite == suite && k.check == metric)
            .collect();
        c.require(
            !tables.is_empty(),
            format!("{suite}/{metric}: no trend report"),
        );
        for k in tables {
            let monotone = ["trend zero", "trend decreasing", "trend increasing"]
                .iter()
                .any(|t| k.detail.starts_with(t));
            c.require(
                k.verdict == Verdict::Reported && (monotone || k.detail.contains("flagged")),
                format!("{suite}/{metric}/{}: {}", k.case, k.detail),
            );
        }
    }
    let claim_suites = [
        "corrector_heat",
        "corrector_elliptic",
        "integral_equation",
        "pressure_poisson",
        "divergence",
        "manufactured",
    ];
    let pick = |o: &VerifyOutcome| -> Vec<Row> {
        o.rows()
            .filter(|r| claim_suites.contains(&r.suite.as_str()))
            .cloned()
            .collect()
    };
    let (a, b) = (pick(v), pick(rerun));
    let d = row_distance(&a.iter().collect::<Vec<_>>(), &b.iter().collect::<Vec<_>>());
    c.require(d <= REPRO_TOL, format!("rerun differs by {d:.3e}"));
    c.notes
        .push(format!("{} claim rows, rerun difference {d:.1e}", a.len()));
    c
}

fn estimate(v: &VerifyOutcome) -> Criterion {
    let mut c = Criterion::new();
    for metric in ["pressure_stability_percent", "velocity_stability_percent"] {
        bounded(&mut c, v, "estimate", metric, 10.0);
    }
    for metric in ["grad_p_energy_over_w_energy", "u_w221_over_w_l2"] {
        let r: Vec<&Row> = rows(v, "estimate", metric).collect();
        let levels: std::collections::BTreeSet<_> = r.iter().map(|x| x.n).collect();
        c.require(
            r.len() == 20 && levels.len() == 2,
            format!(
                "estimate/{metric}: {} ratios over {} resolutions",
                r.len(),
                levels.len()
            ),
        );
        c.require(
            r.iter().all(|x| x.value.is_finite()),
            format!("estimate/{metric}: non-finite ratio"),
        );
    }
    for metric in ["sup_grad_p_energy_over_w_energy", "sup_u_w221_over_w_l2"] {
        let sups: Vec<String> = rows(v, "estimate", metric)
            .map(|r| format!("{:.4}", r.value))
            .collect();
        c.notes.push(format!("{metric} [{}]", sups.join(", ")));
    }
    all_checks_pass(&mut c, v, "estimate");
    c
}

fn same_bits(a: &FieldSnapshot, b: &FieldSnapshot) -> bool {
    a.dims == b.dims
        && a.ncomp == b.ncomp
        && a.ntimes == b.ntimes
        && a.lengths.map(f64::to_bits) == b.lengths.map(f64::to_bits)
        && a.rho.to_bits() == b.rho.to_bits()
        && a.t_final.to_bits() == b.t_final.to_bits()
        && a.data.len() == b.data.len()
        && a.data
            .iter()
            .zip(&b.data)
            .all(|(x, y)| x.to_bits() == y.to_bits())
}

fn max_snapshot_difference(a: &FieldSnapshot, b: &FieldSnapshot) -> f64 {
    if a.data.len() != b.data.len() {
        return f64::INFINITY;
    }
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn reproducibility(
    one: &VerifyOutcome,
    eight: &VerifyOutcome,
    s1: &SolveOutcome,
    s8: &SolveOutcome,
    dir: &Path,
) -> Criterion {
    let mut c = Criterion::new();
    let d = row_distance(
        &one.rows().collect::<Vec<_>>(),
        &eight.rows().collect::<Vec<_>>(),
    );
    c.require(
        d <= REPRO_TOL,
        format!("verify rows differ by {d:.3e} between 1 and 8 threads"),
    );
    c.notes.push(format!("verify rows 1 vs 8 threads {d:.1e}"));

    let pairs = [
        ("p.sgf", &s1.pressure, &s8.pressure),
        ("grad_p.sgf", &s1.pressure_gradient, &s8.pressure_gradient),
        ("u.sgf", &s1.velocity, &s8.velocity),
    ];
    let mut worst = 0.0f64;
    for (file, a, b) in pairs {
        worst = worst.max(max_snapshot_difference(a, b));
        match FieldSnapshot::load(&dir.join(file)) {
            Ok(loaded) => c.require(
                same_bits(&loaded, a),
                format!("{file} round trip is not bit-exact"),
            ),
            Err(e) => c.failures.push(format!("{file}: {e}")),
        }
    }
    c.require(
        worst <= REPRO_TOL,
        format!("solve snapshots differ by {worst:.3e} between 1 and 8 threads"),
    );
    c.notes.push(format!(
        "snapshots 1 vs 8 threads {worst:.1e}, round trip bit-exact"
    ));
    c
}

fn main() -> ExitCode {
    let cfg = RunConfig::default();
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dirs = ["verify1", "verify8", "solve1", "solve8"].map(|d| tmp.path().join(d));

    let v1 = in_pool(1, || cmd_verify(&cfg, &dirs[0])).expect("verify, 1 thread");
    let v8 = in_pool(8, || cmd_verify(&cfg, &dirs[1])).expect("verify, 8 threads");
    let s1 = in_pool(1, || cmd_solve(&cfg, &dirs[2])).expect("solve, 1 thread");
    let s8 = in_pool(8, || cmd_solve(&cfg, &dirs[3])).expect("solve, 8 threads");

    let results = [
        ("basis exactness", basis(&v1)),
        ("kernel agreement", kernels(&v1)),
        ("heat calculus", heat(&v1)),
        ("pipeline consistency", pipeline(&v1)),
        ("claim reports", claims(&v1, &v8)),
        ("energy estimate", estimate(&v1)),
        (
            "reproducibility",
            reproducibility(&v1, &v8, &s1, &s8, &dirs[2]),
        ),
    ];
    let mut ok = true;
    for (i, (name, c)) in results.iter().enumerate() {
        let pass = c.failures.is_empty();
        ok &= pass;
        let verdict = if pass { "PASS" } else { "FAIL" };
        let body = if pass {
            c.notes.join("; ")
        } else {
            c.failures.join("; ")
        };
        println!("{verdict} criterion {}: {name}: {body}", i + 1);
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
