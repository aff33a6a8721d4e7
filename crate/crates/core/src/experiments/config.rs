//! Scenario files: flat `key = value` lines in TOML syntax, with lists for
//! multi-valued keys and a mandatory `schema_version = 1`.
//!
//! ```text
//! schema_version = 1
//! name = "fig1"
//! n_sites = 64
//! topology = "open"          # open | ring
//! pass_order = "offset1_first"
//! p = 0.7
//! q = 0.5
//! xi = [0.0, 0.1, 1.0]       # scalar or list
//! phi_sum = "pi"             # number or multiple of pi ("pi/2", "-3pi/4")
//! phi2 = 0
//! t_max = 1000
//! initial_site = 1
//! receptor = 64              # default: N (open), N/2 + 1 (ring)
//! measure_period = 1
//! granularity = "per_step"   # per_step | per_pass
//! classical_baseline = true
//! check_psd = false
//!
//! sweep_p = [0.5, 0.7]       # also sweep_q, sweep_xi, sweep_phi_sum, sweep_period, sweep_n_sites;
//!                            # grid axes always follow that order
//! reducer = "p_tot_at"       # p_tot_at | classical_minus_quantum_at | classical_catchup | max_gap | final_p_tot
//! reducer_t = 100
//! budget = 10000
//!
//! optimize_axis = "xi"
//! optimize_values = [0.0, 0.05, 1.0]
//! optimize_horizon = 400
//! ```

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use toml::{Table, Value};

use super::{Axis, AxisName, Reducer, Scenario, SweepGrid};
use crate::automaton::{Geometry, PassOrder, Topology};
use crate::error::ExperimentError;
use crate::measurement::{Granularity, ReceptorConfig};
use crate::qchannel::StochasticMatrix2;

pub const SCHEMA_VERSION: i64 = 1;

pub const KEYS: &[&str] = &[
    "schema_version",
    "name",
    "n_sites",
    "topology",
    "pass_order",
    "p",
    "q",
    "xi",
    "phi_sum",
    "phi2",
    "t_max",
    "initial_site",
    "receptor",
    "measure_period",
    "granularity",
    "classical_baseline",
    "check_psd",
    "sweep_p",
    "sweep_q",
    "sweep_xi",
    "sweep_phi_sum",
    "sweep_period",
    "sweep_n_sites",
    "reducer",
    "reducer_t",
    "budget",
    "optimize_axis",
    "optimize_values",
    "optimize_horizon",
];

/// A real number written as a TOML float, integer, or a multiple of pi.
#[derive(Clone, Copy, Debug, PartialEq, Deserialize)]
#[serde(try_from = "RealRepr")]
struct Real(f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum RealRepr {
    Float(f64),
    Int(i64),
    Text(String),
}

impl TryFrom<RealRepr> for Real {
    type Error = String;

    fn try_from(r: RealRepr) -> Result<Self, String> {
        match r {
            RealRepr::Float(x) => Ok(Real(x)),
            RealRepr::Int(i) => Ok(Real(i as f64)),
            RealRepr::Text(s) => parse_angle(&s).map(Real),
        }
    }
}

/// Parses `pi`, `-pi`, `2pi`, `3*pi/4`, `pi/2`, `0.5pi` or a plain number.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(x) = t.parse::<f64>() {
        return Ok(x);
    }
    let bad = || format!("cannot read `{s}` as a number or multiple of pi");
    let idx = t.find("pi").ok_or_else(bad)?;
    let (head, tail) = (&t[..idx], &t[idx + 2..]);
    let head = head.strip_suffix('*').unwrap_or(head);
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|_| bad())?,
    };
    let denom = match tail {
        "" => 1.0,
        d => d
            .strip_prefix('/')
            .ok_or_else(bad)?
            .parse::<f64>()
            .map_err(|_| bad())?,
    };
    Ok(coef * PI / denom)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(Real),
    Many(Vec<Real>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    schema_version: i64,
    name: String,
    n_sites: usize,
    #[serde(default = "default_topology")]
    topology: Topology,
    #[serde(default)]
    pass_order: PassOrder,
    p: Real,
    q: Real,
    xi: Option<OneOrMany>,
    phi_sum: Option<Real>,
    phi2: Option<Real>,
    t_max: usize,
    initial_site: Option<usize>,
    receptor: Option<usize>,
    measure_period: Option<usize>,
    #[serde(default)]
    granularity: Granularity,
    #[serde(default)]
    classical_baseline: bool,
    #[serde(default)]
    check_psd: bool,
    sweep_p: Option<Vec<Real>>,
    sweep_q: Option<Vec<Real>>,
    sweep_xi: Option<Vec<Real>>,
    sweep_phi_sum: Option<Vec<Real>>,
    sweep_period: Option<Vec<Real>>,
    sweep_n_sites: Option<Vec<Real>>,
    reducer: Option<String>,
    reducer_t: Option<usize>,
    budget: Option<usize>,
    optimize_axis: Option<String>,
    optimize_values: Option<Vec<Real>>,
    optimize_horizon: Option<usize>,
}

fn default_topology() -> Topology {
    Topology::Open
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizeSpec {
    pub axis: AxisName,
    pub values: Vec<f64>,
    pub horizon: usize,
}

/// Parsed scenario file.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    pub sweep: Option<SweepGrid>,
    pub optimize: Option<OptimizeSpec>,
}

/// Parses one `key=value` override. The value is read as a TOML value, and
/// as a bare string if that fails (`topology=ring`).
pub fn parse_override(s: &str) -> Result<(String, Value), ExperimentError> {
    let (key, value) = s.split_once('=').ok_or_else(|| {
        ExperimentError::Config(format!("override `{s}` is not of the form key=value"))
    })?;
    let key = key.trim();
    if !KEYS.contains(&key) {
        return Err(ExperimentError::UnknownKey(key.to_string()));
    }
    let value = value.trim();
    let parsed = format!("v = {value}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(value.to_string()));
    Ok((key.to_string(), parsed))
}

fn line_of(text: &str, err: &toml::de::Error) -> usize {
    err.span()
        .map_or(0, |s| text[..s.start].matches('\n').count() + 1)
}

/// Parses scenario text, then applies overrides in order.
pub fn parse_scenario(
    text: &str,
    overrides: &[String],
    origin: &Path,
) -> Result<ScenarioFile, ExperimentError> {
    let mut table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| ExperimentError::Parse {
            path: origin.to_path_buf(),
            line: line_of(text, &e),
            msg: e.message().to_string(),
        })?;
    if let Some(key) = table.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(ExperimentError::UnknownKey(key.clone()));
    }
    for o in overrides {
        let (key, value) = parse_override(o)?;
        table.insert(key, value);
    }
    let raw: Raw = Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| ExperimentError::Config(e.message().to_string()))?;
    build(raw)
}

pub fn load_scenario(path: &Path, overrides: &[String]) -> Result<ScenarioFile, ExperimentError> {
    let text = fs::read_to_string(path).map_err(|e| ExperimentError::io(PathBuf::from(path), e))?;
    parse_scenario(&text, overrides, path)
}

fn reals(v: Vec<Real>) -> Vec<f64> {
    v.into_iter().map(|r| r.0).collect()
}

fn build(raw: Raw) -> Result<ScenarioFile, ExperimentError> {
    if raw.schema_version != SCHEMA_VERSION {
        return Err(ExperimentError::Config(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            raw.schema_version
        )));
    }
    let geometry = Geometry::new(raw.n_sites, raw.topology, raw.pass_order)?;
    let receptor = ReceptorConfig::new(
        &geometry,
        raw.receptor.unwrap_or(geometry.default_receptor()),
        raw.measure_period.unwrap_or(1),
        raw.granularity,
    )?;
    let xi_values = match raw.xi {
        None => vec![0.0],
        Some(OneOrMany::One(x)) => vec![x.0],
        Some(OneOrMany::Many(xs)) => reals(xs),
    };
    let mut scenario = Scenario {
        name: raw.name,
        geometry,
        receptor,
        initial_site: raw.initial_site.unwrap_or(1),
        transition: StochasticMatrix2::new(raw.p.0, raw.q.0)?,
        xi_values,
        phi_sum: 0.0,
        phi2: 0.0,
        t_max: raw.t_max,
        classical_baseline: raw.classical_baseline,
        check_psd: raw.check_psd,
    };
    scenario = scenario.with_phases(
        raw.phi_sum.map_or(0.0, |r| r.0),
        raw.phi2.map_or(0.0, |r| r.0),
    );
    scenario.validate()?;

    let axes: Vec<Axis> = [
        (AxisName::P, raw.sweep_p),
        (AxisName::Q, raw.sweep_q),
        (AxisName::Xi, raw.sweep_xi),
        (AxisName::PhiSum, raw.sweep_phi_sum),
        (AxisName::Period, raw.sweep_period),
        (AxisName::NSites, raw.sweep_n_sites),
    ]
    .into_iter()
    .filter_map(|(name, v)| {
        v.map(|v| Axis {
            name,
            values: reals(v),
        })
    })
    .collect();
    let sweep = match (axes.is_empty(), raw.reducer) {
        (true, None) => None,
        (true, Some(_)) => {
            return Err(ExperimentError::Config(
                "`reducer` given without any sweep_* axis".into(),
            ))
        }
        (false, None) => {
            return Err(ExperimentError::Config(
                "sweep axes given without `reducer`".into(),
            ))
        }
        (false, Some(r)) => Some(SweepGrid {
            axes,
            reducer: Reducer::parse(&r, raw.reducer_t)?,
            budget: raw.budget.unwrap_or(SweepGrid::DEFAULT_BUDGET),
        }),
    };

    let optimize = match raw.optimize_axis {
        None => None,
        Some(axis) => Some(OptimizeSpec {
            axis: axis.parse()?,
            values: raw.optimize_values.map(reals).unwrap_or_default(),
            horizon: raw.optimize_horizon.unwrap_or(scenario.t_max),
        }),
    };
    Ok(ScenarioFile {
        scenario,
        sweep,
        optimize,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
schema_version = 1
name = "t"
n_sites = 8
p = 0.7
q = 0.5
t_max = 20
"#;

    fn parse(extra: &str, overrides: &[&str]) -> Result<ScenarioFile, ExperimentError> {
        let overrides: Vec<String> = overrides.iter().map(|s| s.to_string()).collect();
        parse_scenario(
            &format!("{BASE}{extra}"),
            &overrides,
            Path::new("t.scenario"),
        )
    }

    #[test]
    fn defaults() {
        let f = parse("", &[]).unwrap();
        let s = &f.scenario;
        assert_eq!(s.xi_values, vec![0.0]);
        assert_eq!(s.receptor.site(), 8);
        assert_eq!(s.initial_site, 1);
        assert_eq!(s.geometry.topology(), Topology::Open);
        assert!(f.sweep.is_none() && f.optimize.is_none());
    }

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi").unwrap(), PI);
        assert_eq!(parse_angle("-pi/2").unwrap(), -PI / 2.0);
        assert_eq!(parse_angle("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_angle("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_angle("0.25").unwrap(), 0.25);
        assert!(parse_angle("tau").is_err());
        let f = parse("phi_sum = \"pi\"\nphi2 = 1\n", &[]).unwrap();
        assert_eq!((f.scenario.phi_sum, f.scenario.phi2), (PI, 1.0));
    }

    #[test]
    fn overrides_apply_after_parsing() {
        let f = parse(
            "xi = [0.0, 0.5, 1.0]\n",
            &["xi=0", "topology=ring", "n_sites=18"],
        )
        .unwrap();
        assert_eq!(f.scenario.xi_values, vec![0.0]);
        assert_eq!(f.scenario.geometry.topology(), Topology::Ring);
        assert_eq!(f.scenario.receptor.site(), 10);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(
            matches!(parse("bogus = 1\n", &[]), Err(ExperimentError::UnknownKey(k)) if k == "bogus")
        );
        assert!(
            matches!(parse("", &["nope=3"]), Err(ExperimentError::UnknownKey(k)) if k == "nope")
        );
        assert!(parse("", &["no_equals"]).is_err());
    }

    #[test]
    fn range_errors_name_the_key() {
        let err = parse("", &["p=1.5"]).unwrap_err().to_string();
        assert!(err.contains("`p`") && err.contains("[0, 1]"), "{err}");
        let err = parse("xi = 2.0\n", &[]).unwrap_err().to_string();
        assert!(err.contains("`xi`"), "{err}");
    }

    #[test]
    fn version_and_syntax() {
        let bad = BASE.replace("schema_version = 1", "schema_version = 2");
        assert!(parse_scenario(&bad, &[], Path::new("x")).is_err());
        let err = parse("p = = 3\n", &[]).unwrap_err();
        assert!(
            matches!(err, ExperimentError::Parse { line: 8, .. }),
            "{err:?}"
        );
        let missing = BASE.replace("t_max = 20", "");
        assert!(parse_scenario(&missing, &[], Path::new("x")).is_err());
    }

    #[test]
    fn sweep_and_optimize_sections() {
        let f = parse(
            "sweep_p = [0.5, 1]\nsweep_xi = [0.0]\nreducer = \"p_tot_at\"\nreducer_t = 10\n\
             optimize_axis = \"phi_sum\"\noptimize_values = [0, \"pi\"]\n",
            &[],
        )
        .unwrap();
        let g = f.sweep.unwrap();
        assert_eq!(
            g.axes[0],
            Axis {
                name: AxisName::P,
                values: vec![0.5, 1.0]
            }
        );
        assert_eq!(g.axes[1].name, AxisName::Xi);
        assert_eq!(g.reducer, Reducer::PTotAt { t: 10 });
        assert_eq!(g.budget, SweepGrid::DEFAULT_BUDGET);
        let o = f.optimize.unwrap();
        assert_eq!(
            (o.axis, o.values, o.horizon),
            (AxisName::PhiSum, vec![0.0, PI], 20)
        );
        assert!(parse("sweep_p = [0.5]\n", &[]).is_err());
        assert!(parse("reducer = \"max_gap\"\n", &[]).is_err());
    }
}
