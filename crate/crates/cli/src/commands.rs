//! The four subcommands. Each writes its artifacts and a manifest into the
//! output directory and returns what it computed.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use stokes_green_core::stokes::{
    divergence, pressure, pressure_gradient, sample_vector, sobolev_norm_w221, vector_l2_norm,
    Forcing, PressureResult, VelocityResult,
};
use stokes_green_core::verification::{
    ForcingSpec, ManufacturedCase, PressurePattern, Resolution, TimeProfile, Verdict,
};
use stokes_green_core::{enumerate_modes, velocity, SeriesHistory, SpatialGrid};

use crate::config::{ForcingKind, RunConfig};
use crate::error::Result;
use crate::manifest::{write_manifest, Manifest};
use crate::snapshot::FieldSnapshot;
use crate::suites::{run_suites, verify_ladder, Check, Row, SuiteName, SuiteOutcome};

pub const REPORT_FILE: &str = "report.csv";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const NORMS_FILE: &str = "norms.csv";

/// Forcing described by the configuration at resolution `res`. Random
/// forcings draw modes up to `random_modes` per axis.
pub fn build_forcing(cfg: &RunConfig, res: Resolution, random_modes: usize) -> Result<Forcing> {
    let setting = cfg.setting();
    let time = res.time(cfg.t_final)?;
    let d = setting.domain;
    Ok(match cfg.forcing.kind {
        ForcingKind::Modes => {
            let modes = cfg.forcing.modes.clone();
            Forcing::from_modes(d, time, res.n, move |i, idx, t| {
                modes
                    .iter()
                    .filter(|m| m.component == i + 1 && m.index == idx)
                    .map(|m| m.amplitude * m.profile.value(t))
                    .sum()
            })
        }
        ForcingKind::Manufactured => {
            let case =
                ManufacturedCase::new(d, TimeProfile::Quadratic, PressurePattern::CosineProduct);
            ForcingSpec::Manufactured(case).build(&setting, res)?
        }
        ForcingKind::Random => ForcingSpec::Random {
            seed: cfg.forcing.seed,
            n_low: random_modes.max(1),
        }
        .build(&setting, res)?,
    })
}

pub fn forcing_label(cfg: &RunConfig) -> String {
    match cfg.forcing.kind {
        ForcingKind::Modes => format!("modes_{}", cfg.forcing.modes.len()),
        ForcingKind::Manufactured => "manufactured_quadratic_cosine".into(),
        ForcingKind::Random => format!("random_{}", cfg.forcing.seed),
    }
}

fn write_rows(path: &Path, rows: &[Row]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    if rows.is_empty() {
        w.write_record([
            "suite",
            "case",
            "N",
            "M",
            "K",
            "metric",
            "value",
            "normalization",
            "order_estimate",
        ])?;
    }
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Eigenpairs of the truncated basis, sorted by eigenvalue.
pub fn cmd_modes(cfg: &RunConfig) -> Result<String> {
    let d = cfg.domain();
    let mut modes = enumerate_modes(&d, cfg.n)?;
    modes.sort_by(|a, b| {
        a.eigenvalue
            .total_cmp(&b.eigenvalue)
            .then(a.index.cmp(&b.index))
    });
    let mut out = String::new();
    writeln!(
        out,
        "{:>4} {:>4} {:>4} {:>22} {:>14}",
        "n1", "n2", "n3", "lambda", "decay_rate"
    )
    .unwrap();
    for m in modes {
        let [a, b, c] = m.index;
        writeln!(
            out,
            "{a:>4} {b:>4} {c:>4} {:>22.15e} {:>14.6e}",
            m.eigenvalue,
            cfg.rho * m.eigenvalue
        )
        .unwrap();
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub rows: Vec<Row>,
    pub pressure: FieldSnapshot,
    pub pressure_gradient: FieldSnapshot,
    pub velocity: FieldSnapshot,
    pub manifest: Manifest,
}

type Solution = (Vec<Row>, [SeriesHistory; 3], PressureResult, VelocityResult);

fn solve_norms(cfg: &RunConfig, res: Resolution, random_modes: usize) -> Result<Solution> {
    let w = build_forcing(cfg, res, random_modes)?;
    let pr = pressure(&w, res.n_pressure())?;
    let g = pressure_gradient(&pr);
    let u = velocity(&w, &pr);
    let div = divergence(&u);
    let case = forcing_label(cfg);
    let rows = [
        ("w_l2", w.l2_norm()),
        ("p_l2", pr.pressure().l2_norm()),
        ("grad_p_l2", vector_l2_norm(&g)),
        ("u_l2", u.l2_norm()),
        ("u_w221", sobolev_norm_w221(u.components())),
        ("div_u_over_grad_u", div.ratio()),
    ]
    .iter()
    .map(|(m, v)| Row::plain("solve", &case, Some(res), m, *v))
    .collect();
    Ok((rows, g, pr, u))
}

/// Pressure, its gradient and the velocity for the configured forcing,
/// sampled on the `M`-node interior grid.
pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<SolveOutcome> {
    fs::create_dir_all(out)?;
    let res = cfg.resolution();
    let (rows, g, pr, u) = solve_norms(cfg, res, res.n / 2)?;
    let grid = SpatialGrid::new(cfg.domain(), cfg.m)?;
    let p_snap = FieldSnapshot::from_scalar(&pr.sample_grid(&grid))?;
    let g_snap = FieldSnapshot::from_vector(&sample_vector(&g, &grid))?;
    let u_snap = FieldSnapshot::from_vector(&u.sample_grid(&grid))?;
    p_snap.save(&out.join("p.sgf"))?;
    g_snap.save(&out.join("grad_p.sgf"))?;
    u_snap.save(&out.join("u.sgf"))?;
    write_rows(&out.join(NORMS_FILE), &rows)?;
    let files = ["p.sgf", "grad_p.sgf", "u.sgf", NORMS_FILE].map(String::from);
    let manifest = write_manifest(out, "solve", cfg, &files)?;
    Ok(SolveOutcome {
        rows,
        pressure: p_snap,
        pressure_gradient: g_snap,
        velocity: u_snap,
        manifest,
    })
}

#[derive(Clone, Debug)]
pub struct VerifyOutcome {
    pub suites: Vec<(SuiteName, SuiteOutcome)>,
    /// Norms of the configured forcing's solution per rung (sweep only).
    pub solve_rows: Vec<Row>,
    pub manifest: Manifest,
}

impl VerifyOutcome {
    pub fn checks(&self) -> impl Iterator<Item = &Check> {
        self.suites.iter().flat_map(|(_, s)| &s.checks)
    }

    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.suites
            .iter()
            .flat_map(|(_, s)| &s.rows)
            .chain(&self.solve_rows)
    }

    pub fn passed(&self) -> bool {
        self.checks().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn suite(&self, name: SuiteName) -> Option<&SuiteOutcome> {
        self.suites.iter().find(|(n, _)| *n == name).map(|(_, s)| s)
    }
}

/// Selected suites at the configured resolution, written to `report.csv`.
pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> Result<VerifyOutcome> {
    fs::create_dir_all(out)?;
    let suites = run_suites(&cfg.suites, cfg, cfg.forcing.seed)?;
    let rows: Vec<Row> = suites
        .iter()
        .flat_map(|(_, s)| s.rows.iter().cloned())
        .collect();
    write_rows(&out.join(REPORT_FILE), &rows)?;
    let manifest = write_manifest(out, "verify", cfg, &[REPORT_FILE.into()])?;
    Ok(VerifyOutcome {
        suites,
        solve_rows: Vec::new(),
        manifest,
    })
}

/// Ladder suites plus the configured forcing solved on every rung, with
/// self-convergence orders of its norms, written to `sweep.csv`.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<VerifyOutcome> {
    fs::create_dir_all(out)?;
    let rungs = verify_ladder(cfg.resolution())?;
    let ladders: Vec<SuiteName> = cfg
        .suites
        .iter()
        .copied()
        .filter(|s| s.is_ladder())
        .collect();
    let suites = run_suites(&ladders, cfg, cfg.forcing.seed)?;

    // one continuous forcing for the whole ladder
    let random_modes = rungs[0].n.div_ceil(2);
    let per_rung = rungs
        .par_iter()
        .map(|r| Ok(solve_norms(cfg, *r, random_modes)?.0))
        .collect::<Result<Vec<Vec<Row>>>>()?;
    let mut solve_rows = Vec::new();
    let metrics = per_rung[0].len();
    for j in 0..metrics {
        let values: Vec<f64> = per_rung.iter().map(|rows| rows[j].value).collect();
        for (i, rows) in per_rung.iter().enumerate() {
            let mut row = rows[j].clone();
            // successive differences |v_i - v_{i-1}| shrink by 2^order per halving
            if i >= 2 {
                let (a, b) = (
                    (values[i - 1] - values[i - 2]).abs(),
                    (values[i] - values[i - 1]).abs(),
                );
                row.order_estimate = (a > 0.0 && b > 0.0).then(|| (a / b).log2());
            }
            solve_rows.push(row);
        }
    }
    let rows: Vec<Row> = suites
        .iter()
        .flat_map(|(_, s)| s.rows.iter().cloned())
        .chain(solve_rows.iter().cloned())
        .collect();
    write_rows(&out.join(SWEEP_FILE), &rows)?;
    let manifest = write_manifest(out, "sweep", cfg, &[SWEEP_FILE.into()])?;
    Ok(VerifyOutcome {
        suites,
        solve_rows,
        manifest,
    })
}

/// One console line per check.
pub fn format_checks<'a>(checks: impl Iterator<Item = &'a Check>) -> String {
    let mut out = String::new();
    for c in checks {
        writeln!(
            out,
            "{:<6} {:<20} {:<28} {:<40} {}",
            c.verdict.as_str(),
            c.suite,
            c.case,
            c.check,
            c.detail
        )
        .unwrap();
    }
    out
}
