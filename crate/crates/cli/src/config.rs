//! Run configuration: flat dotted keys in TOML syntax.
//!
//! ```toml
//! domain.lengths = [1.0, 1.0, 1.0]
//! physics.rho = 1.0
//! disc.N = 12
//! forcing.kind = "modes"
//! forcing.modes = [{ component = 1, index = [1, 2, 1], amplitude = 1.0, profile = "sinusoid(3.0)" }]
//! ```
//!
//! Table headers (`[disc]`) are accepted too; they flatten to the same keys.
//! Every violation is collected before reporting.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use stokes_green_core::verification::{Resolution, Setting};
use stokes_green_core::BoxDomain;
use toml::Value;

use crate::error::CliError;
use crate::suites::{is_tolerance_name, SuiteName};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ForcingKind {
    Modes,
    Manufactured,
    Random,
}

/// Time profile of one forced mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Const,
    /// `amplitude * t`
    Linear,
    /// `amplitude * sin(omega t)`
    Sinusoid(f64),
}

impl Profile {
    pub fn value(self, t: f64) -> f64 {
        match self {
            Profile::Const => 1.0,
            Profile::Linear => t,
            Profile::Sinusoid(omega) => (omega * t).sin(),
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "const" => Some(Profile::Const),
            "linear" => Some(Profile::Linear),
            other => {
                let inner = other.strip_prefix("sinusoid(")?.strip_suffix(')')?;
                inner
                    .trim()
                    .parse()
                    .ok()
                    .filter(|w: &f64| w.is_finite())
                    .map(Profile::Sinusoid)
            }
        }
    }
}

/// One forced eigenmode in one velocity component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModeForcing {
    /// 1-based component.
    pub component: usize,
    pub index: [usize; 3],
    pub amplitude: f64,
    pub profile: Profile,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ForcingConfig {
    pub kind: ForcingKind,
    pub modes: Vec<ModeForcing>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub lengths: [f64; 3],
    pub rho: f64,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub t_final: f64,
    pub forcing: ForcingConfig,
    pub suites: Vec<SuiteName>,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lengths: [1.0; 3],
            rho: 1.0,
            n: 12,
            m: 32,
            k: 128,
            t_final: 0.5,
            forcing: ForcingConfig {
                kind: ForcingKind::Random,
                modes: Vec::new(),
                seed: 1,
            },
            suites: SuiteName::ALL.to_vec(),
            tolerances: BTreeMap::new(),
            output_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn setting(&self) -> Setting {
        Setting {
            domain: self.domain(),
            t_final: self.t_final,
        }
    }

    pub fn domain(&self) -> BoxDomain {
        BoxDomain::new(self.lengths, self.rho).expect("validated")
    }

    pub fn resolution(&self) -> Resolution {
        Resolution {
            n: self.n,
            m: self.m,
            k: self.k,
        }
    }

    /// Same configuration at another resolution.
    pub fn at(&self, res: Resolution) -> Self {
        Self {
            n: res.n,
            m: res.m,
            k: res.k,
            ..self.clone()
        }
    }

    /// Every violated invariant, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if self.lengths.iter().any(|l| !(l.is_finite() && *l > 0.0)) {
            errs.push(format!(
                "domain.lengths must be positive, got {:?}",
                self.lengths
            ));
        }
        if !(self.rho.is_finite() && self.rho > 0.0) {
            errs.push(format!("physics.rho must be positive, got {}", self.rho));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            errs.push(format!(
                "disc.t_final must be positive, got {}",
                self.t_final
            ));
        }
        if self.n < 1 {
            errs.push("disc.N must be at least 1".into());
        }
        if self.m < 2 * self.n {
            errs.push(format!("M >= 2N violated: M={}, N={}", self.m, self.n));
        }
        if self.k < 2 {
            errs.push(format!("K >= 2 violated: K={}", self.k));
        }
        for (j, mode) in self.forcing.modes.iter().enumerate() {
            if !(1..=3).contains(&mode.component) {
                errs.push(format!(
                    "forcing.modes[{j}].component must be 1, 2 or 3, got {}",
                    mode.component
                ));
            }
            if mode.index.iter().any(|i| *i == 0 || *i > self.n) {
                errs.push(format!(
                    "forcing.modes[{j}].index {:?} outside 1..=N with N={}",
                    mode.index, self.n
                ));
            }
            if !mode.amplitude.is_finite() {
                errs.push(format!("forcing.modes[{j}].amplitude must be finite"));
            }
        }
        for (name, v) in &self.tolerances {
            if !(v.is_finite() && *v >= 0.0) {
                errs.push(format!(
                    "tolerances.{name} must be a nonnegative real, got {v}"
                ));
            }
        }
        errs
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, Value)>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            _ => out.push((key, v.clone())),
        }
    }
}

fn real(key: &str, v: &Value, errs: &mut Vec<String>) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => {
            errs.push(format!("{key}: malformed number {v}"));
            None
        }
    }
}

fn count(key: &str, v: &Value, errs: &mut Vec<String>) -> Option<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Some(*i as usize),
        _ => {
            errs.push(format!("{key}: expected a nonnegative integer, got {v}"));
            None
        }
    }
}

fn triple<T: Copy + Default>(
    key: &str,
    v: &Value,
    errs: &mut Vec<String>,
    f: fn(&str, &Value, &mut Vec<String>) -> Option<T>,
) -> Option<[T; 3]> {
    match v {
        Value::Array(a) if a.len() == 3 => {
            let parts: Vec<Option<T>> = a.iter().map(|x| f(key, x, errs)).collect();
            if parts.iter().all(Option::is_some) {
                Some([parts[0].unwrap(), parts[1].unwrap(), parts[2].unwrap()])
            } else {
                None
            }
        }
        _ => {
            errs.push(format!(
                "{key}: expected an array of three entries, got {v}"
            ));
            None
        }
    }
}

fn parse_mode(j: usize, v: &Value, errs: &mut Vec<String>) -> Option<ModeForcing> {
    let Value::Table(t) = v else {
        errs.push(format!("forcing.modes[{j}]: expected a table"));
        return None;
    };
    let mut mode = ModeForcing {
        component: 0,
        index: [0; 3],
        amplitude: 0.0,
        profile: Profile::Const,
    };
    let mut ok = true;
    let mut seen = [false; 3];
    for (k, v) in t {
        let key = format!("forcing.modes[{j}].{k}");
        match k.as_str() {
            "component" => {
                seen[0] = true;
                ok &= count(&key, v, errs).map(|c| mode.component = c).is_some();
            }
            "index" => {
                seen[1] = true;
                ok &= triple(&key, v, errs, count)
                    .map(|i| mode.index = i)
                    .is_some();
            }
            "amplitude" => {
                seen[2] = true;
                ok &= real(&key, v, errs).map(|a| mode.amplitude = a).is_some();
            }
            "profile" => match v.as_str().and_then(Profile::parse) {
                Some(p) => mode.profile = p,
                None => {
                    errs.push(format!(
                        "{key}: expected const, linear or sinusoid(<omega>), got {v}"
                    ));
                    ok = false;
                }
            },
            _ => {
                errs.push(format!("unknown key {key}"));
                ok = false;
            }
        }
    }
    for (name, s) in ["component", "index", "amplitude"].iter().zip(seen) {
        if !s {
            errs.push(format!("forcing.modes[{j}]: missing {name}"));
            ok = false;
        }
    }
    ok.then_some(mode)
}

/// Parse and validate a configuration; unset keys take the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(vec![e.to_string()]))?;
    let mut flat = Vec::new();
    flatten("", &table, &mut flat);
    let mut cfg = RunConfig::default();
    let mut errs = Vec::new();
    for (key, v) in &flat {
        match key.as_str() {
            "domain.lengths" => {
                if let Some(l) = triple(key, v, &mut errs, real) {
                    cfg.lengths = l;
                }
            }
            "physics.rho" => cfg.rho = real(key, v, &mut errs).unwrap_or(cfg.rho),
            "disc.N" => cfg.n = count(key, v, &mut errs).unwrap_or(cfg.n),
            "disc.M" => cfg.m = count(key, v, &mut errs).unwrap_or(cfg.m),
            "disc.K" => cfg.k = count(key, v, &mut errs).unwrap_or(cfg.k),
            "disc.t_final" => cfg.t_final = real(key, v, &mut errs).unwrap_or(cfg.t_final),
            "forcing.kind" => match v.as_str() {
                Some("modes") => cfg.forcing.kind = ForcingKind::Modes,
                Some("manufactured") => cfg.forcing.kind = ForcingKind::Manufactured,
                Some("random") => cfg.forcing.kind = ForcingKind::Random,
                _ => errs.push(format!(
                    "forcing.kind: expected modes, manufactured or random, got {v}"
                )),
            },
            "forcing.modes" => match v {
                Value::Array(a) => {
                    cfg.forcing.modes = a
                        .iter()
                        .enumerate()
                        .filter_map(|(j, m)| parse_mode(j, m, &mut errs))
                        .collect()
                }
                _ => errs.push(format!("forcing.modes: expected a list of tables, got {v}")),
            },
            "forcing.seed" => match v {
                Value::Integer(i) if *i >= 0 => cfg.forcing.seed = *i as u64,
                _ => errs.push(format!(
                    "forcing.seed: expected a nonnegative integer, got {v}"
                )),
            },
            "suites" => match v {
                Value::Array(a) => {
                    let mut names = Vec::new();
                    for s in a {
                        match s.as_str().and_then(SuiteName::parse) {
                            Some(n) if !names.contains(&n) => names.push(n),
                            Some(_) => {}
                            None => errs.push(format!("suites: unknown suite {s}")),
                        }
                    }
                    cfg.suites = names;
                }
                _ => errs.push(format!("suites: expected a list of names, got {v}")),
            },
            "output.dir" => match v.as_str() {
                Some(s) => cfg.output_dir = PathBuf::from(s),
                None => errs.push(format!("output.dir: expected a path string, got {v}")),
            },
            other => match other.strip_prefix("tolerances.") {
                Some(name) if is_tolerance_name(name) => {
                    if let Some(t) = real(key, v, &mut errs) {
                        cfg.tolerances.insert(name.to_string(), t);
                    }
                }
                Some(name) => errs.push(format!("tolerances: unknown check {name}")),
                None => errs.push(format!("unknown key {other}")),
            },
        }
    }
    errs.extend(cfg.violations());
    if errs.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Config(errs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn messages(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(CliError::Config(m)) => m,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn empty_config_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(
            (c.n, c.m, c.k, c.t_final, c.rho, c.lengths),
            (12, 32, 128, 0.5, 1.0, [1.0; 3])
        );
        assert_eq!(c.suites, SuiteName::ALL.to_vec());
    }

    #[test]
    fn dotted_keys_and_tables_agree() {
        let a = parse_config("disc.N = 4\ndisc.M = 8\nphysics.rho = 2").unwrap();
        let b = parse_config("[disc]\nN = 4\nM = 8\n[physics]\nrho = 2.0").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rho, 2.0);
    }

    #[test]
    fn m_below_two_n_is_reported() {
        let m = messages("disc.N = 12\ndisc.M = 16");
        assert_eq!(m, ["M >= 2N violated: M=16, N=12"]);
    }

    #[test]
    fn mode_outside_truncation_is_reported() {
        let m = messages(
            r#"forcing.kind = "modes"
forcing.modes = [{ component = 1, index = [13, 1, 1], amplitude = 1.0, profile = "const" }]"#,
        );
        assert_eq!(m.len(), 1);
        assert!(m[0].contains("[13, 1, 1]"), "{m:?}");
    }

    #[test]
    fn all_violations_are_listed() {
        let m = messages(
            r#"disc.K = 1
disc.M = 3
disc.N = "x"
physics.rho = -1
colour = 3
tolerances.nonsense = 1.0
forcing.modes = [{ component = 4, index = [1, 1, 1], amplitude = 1.0, profile = "sinusoid(two)" }]"#,
        );
        for needle in [
            "disc.N",
            "K >= 2",
            "M >= 2N",
            "physics.rho",
            "colour",
            "nonsense",
            "profile",
        ] {
            assert!(
                m.iter().any(|s| s.contains(needle)),
                "{needle} missing from {m:?}"
            );
        }
    }

    #[test]
    fn profiles_parse() {
        let c = parse_config(
            r#"forcing.kind = "modes"
forcing.modes = [
  { component = 2, index = [1, 2, 3], amplitude = 0.5, profile = "sinusoid(3.5)" },
  { component = 3, index = [1, 1, 1], amplitude = 2, profile = "linear" },
]"#,
        )
        .unwrap();
        assert_eq!(c.forcing.modes[0].profile, Profile::Sinusoid(3.5));
        assert_eq!(c.forcing.modes[1].profile, Profile::Linear);
        assert_eq!(c.forcing.modes[1].amplitude, 2.0);
    }
}
