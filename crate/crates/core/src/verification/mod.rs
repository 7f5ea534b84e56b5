//! Verification harness: residual reports, refinement ladders and the suites
//! that exercise the kernels, the heat calculus and the Stokes pipeline.
//!
//! Two kinds of checks live here. Guaranteed-math checks carry a tolerance and
//! a hard verdict. Claim checks only measure a residual across a ladder and
//! record the trend; they take no position on the outcome.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::domain::{BoxDomain, TimeGrid};
use crate::error::{invalid, Error, Result};
use crate::math::order_estimate;

pub mod claims;
pub mod consistency;
pub mod kernel_suite;
pub mod manufactured;

pub use claims::*;
pub use consistency::*;
pub use kernel_suite::run_kernel_suite;
pub use manufactured::{ManufacturedCase, PressurePattern, TimeProfile};

/// Discretization triple: modes per axis, grid nodes per axis, time steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Resolution {
    pub n: usize,
    pub m: usize,
    pub k: usize,
}

impl Resolution {
    pub fn new(n: usize, m: usize, k: usize) -> Result<Self> {
        let r = Self { n, m, k };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(invalid("N must be at least 1"));
        }
        if self.m < 2 * self.n {
            return Err(invalid(format!(
                "M >= 2N violated: M={}, N={}",
                self.m, self.n
            )));
        }
        if self.k < 2 {
            return Err(invalid(format!("K >= 2 violated: K={}", self.k)));
        }
        Ok(())
    }

    pub fn time(&self, t_final: f64) -> Result<TimeGrid> {
        TimeGrid::new(t_final, self.k)
    }

    /// Truncation of the inverse Laplacian inside the pressure formula: the
    /// number of sine modes a transform on the `m`-node grid resolves.
    pub fn n_pressure(&self) -> usize {
        self.m
    }
}

impl core::fmt::Display for Resolution {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "N={} M={} K={}", self.n, self.m, self.k)
    }
}

/// Rungs `(N, M, K) / 2^j`, coarsest first, ending at `finest`.
pub fn ladder(finest: Resolution, rungs: usize) -> Result<Vec<Resolution>> {
    if rungs < 1 {
        return Err(invalid("a ladder needs at least one rung"));
    }
    let mut out = Vec::with_capacity(rungs);
    for j in (0..rungs).rev() {
        let f = 1usize << j;
        if !finest.n.is_multiple_of(f) || !finest.m.is_multiple_of(f) || !finest.k.is_multiple_of(f)
        {
            return Err(invalid(format!("{finest} cannot be halved {j} times")));
        }
        out.push(Resolution::new(finest.n / f, finest.m / f, finest.k / f)?);
    }
    Ok(out)
}

/// Problem setting shared by every suite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Setting {
    pub domain: BoxDomain,
    pub t_final: f64,
}

impl Setting {
    pub fn unit(t_final: f64) -> Self {
        Self {
            domain: BoxDomain::unit_cube(),
            t_final,
        }
    }
}

/// Outcome class of a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    /// Measured only; no tolerance applies.
    Reported,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Reported => "REPORT",
        }
    }
}

/// One measured residual.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualReport {
    pub suite: String,
    pub check: String,
    pub resolution: Option<Resolution>,
    pub residual: f64,
    pub normalization: f64,
    pub normalized: f64,
    pub tolerance: Option<f64>,
}

impl ResidualReport {
    /// `residual / normalization`. A zero normalization is accepted only when
    /// the residual is exactly zero as well.
    pub fn new(
        suite: &str,
        check: &str,
        resolution: Option<Resolution>,
        residual: f64,
        normalization: f64,
    ) -> Result<Self> {
        if !(residual >= 0.0) || !(normalization >= 0.0) {
            return Err(invalid(format!(
                "{check}: residual and normalization must be nonnegative"
            )));
        }
        let normalized = if normalization == 0.0 {
            if residual != 0.0 {
                return Err(Error::ZeroNormalization(check.into()));
            }
            0.0
        } else {
            residual / normalization
        };
        Ok(Self {
            suite: suite.into(),
            check: check.into(),
            resolution,
            residual,
            normalization,
            normalized,
            tolerance: None,
        })
    }

    /// Already dimensionless value such as a maximum relative error.
    pub fn value(
        suite: &str,
        check: &str,
        resolution: Option<Resolution>,
        value: f64,
    ) -> Result<Self> {
        Self::new(suite, check, resolution, value, 1.0)
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn verdict(&self) -> Verdict {
        match self.tolerance {
            None => Verdict::Reported,
            Some(t) if self.normalized <= t && self.normalized.is_finite() => Verdict::Pass,
            Some(_) => Verdict::Fail,
        }
    }
}

/// Trend of a ladder of normalized residuals.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    /// Identically zero on every rung.
    Zero,
    Decreasing,
    Increasing,
    /// Neither monotone direction; flagged.
    Mixed,
}

impl Trend {
    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Zero => "zero",
            Trend::Decreasing => "decreasing",
            Trend::Increasing => "increasing",
            Trend::Mixed => "mixed",
        }
    }
}

/// A residual measured on every rung of a ladder.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceTable {
    pub suite: String,
    pub check: String,
    pub rows: Vec<ResidualReport>,
    /// Empirical order between consecutive rows (`None` for the first row or
    /// when a residual is zero).
    pub orders: Vec<Option<f64>>,
    pub trend: Trend,
    /// Minimum required order on every step, for guaranteed-math ladders.
    pub min_order: Option<f64>,
}

impl ConvergenceTable {
    pub fn new(rows: Vec<ResidualReport>) -> Result<Self> {
        let first = rows
            .first()
            .ok_or_else(|| invalid("a convergence table needs rows"))?;
        let (suite, check) = (first.suite.clone(), first.check.clone());
        let mut orders = Vec::with_capacity(rows.len());
        orders.push(None);
        for w in rows.windows(2) {
            orders.push(order_estimate(w[0].normalized, w[1].normalized));
        }
        let vals: Vec<f64> = rows.iter().map(|r| r.normalized).collect();
        let trend = if vals.iter().all(|v| *v == 0.0) {
            Trend::Zero
        } else if vals.windows(2).all(|w| w[1] < w[0]) {
            Trend::Decreasing
        } else if vals.windows(2).all(|w| w[1] > w[0]) {
            Trend::Increasing
        } else {
            Trend::Mixed
        };
        Ok(Self {
            suite,
            check,
            rows,
            orders,
            trend,
            min_order: None,
        })
    }

    pub fn with_min_order(mut self, order: f64) -> Self {
        self.min_order = Some(order);
        self
    }

    /// Smallest order over all refinement steps.
    pub fn worst_order(&self) -> Option<f64> {
        self.orders.iter().flatten().copied().reduce(f64::min)
    }

    pub fn verdict(&self) -> Verdict {
        match self.min_order {
            None => Verdict::Reported,
            Some(p) => match self.worst_order() {
                Some(o) if o >= p && self.orders.iter().skip(1).all(Option::is_some) => {
                    Verdict::Pass
                }
                _ if self.trend == Trend::Zero => Verdict::Pass,
                _ => Verdict::Fail,
            },
        }
    }

    /// Reported means produced with a recorded trend; always true once built.
    pub fn is_flagged(&self) -> bool {
        matches!(self.trend, Trend::Increasing | Trend::Mixed)
    }
}

/// Ratios measured over a corpus of forcings at several resolutions.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub corpus: String,
    pub resolutions: Vec<Resolution>,
    /// `int sum ||dp/dx_i||^2 / int sum ||w_i||^2`, per resolution, per case.
    pub pressure_ratios: Vec<Vec<f64>>,
    /// `||u||_{W_2^{2,1}} / ||w||_{L2}`, per resolution, per case.
    pub velocity_ratios: Vec<Vec<f64>>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn spread_percent(sups: &[f64]) -> f64 {
    match (sups.first(), sups.last()) {
        (Some(a), Some(b)) if *b != 0.0 => 100.0 * (b - a).abs() / b.abs(),
        _ => 0.0,
    }
}

impl EstimateReport {
    pub fn sup_pressure(&self) -> Vec<f64> {
        self.pressure_ratios.iter().map(|r| sup(r)).collect()
    }

    pub fn sup_velocity(&self) -> Vec<f64> {
        self.velocity_ratios.iter().map(|r| sup(r)).collect()
    }

    /// Relative change of the sup ratio between the coarsest and finest resolution, in percent.
    pub fn pressure_stability_percent(&self) -> f64 {
        spread_percent(&self.sup_pressure())
    }

    pub fn velocity_stability_percent(&self) -> f64 {
        spread_percent(&self.sup_velocity())
    }

    pub fn all_finite(&self) -> bool {
        self.pressure_ratios
            .iter()
            .chain(&self.velocity_ratios)
            .flatten()
            .all(|v| v.is_finite())
    }
}
