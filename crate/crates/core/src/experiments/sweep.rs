use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{classical_catchup, max_gap, Scenario};
use crate::automaton::Geometry;
use crate::error::ExperimentError;
use crate::measurement::ReceptorConfig;
use crate::qchannel::StochasticMatrix2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AxisName {
    P,
    Q,
    Xi,
    PhiSum,
    Period,
    NSites,
}

impl AxisName {
    pub const ALL: [AxisName; 6] = [
        AxisName::P,
        AxisName::Q,
        AxisName::Xi,
        AxisName::PhiSum,
        AxisName::Period,
        AxisName::NSites,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            AxisName::P => "p",
            AxisName::Q => "q",
            AxisName::Xi => "xi",
            AxisName::PhiSum => "phi_sum",
            AxisName::Period => "period",
            AxisName::NSites => "n_sites",
        }
    }

    /// Returns `base` with this parameter set to `value`.
    pub fn apply(&self, base: &Scenario, value: f64) -> Result<Scenario, ExperimentError> {
        let mut s = base.clone();
        match self {
            AxisName::P => s.transition = StochasticMatrix2::new(value, s.transition.q())?,
            AxisName::Q => s.transition = StochasticMatrix2::new(s.transition.p(), value)?,
            AxisName::Xi => s.xi_values = vec![value],
            AxisName::PhiSum => s.phi_sum = value,
            AxisName::Period => {
                let period = as_count("period", value)?;
                s.receptor = ReceptorConfig::new(
                    &s.geometry,
                    s.receptor.site(),
                    period,
                    s.receptor.granularity(),
                )?;
            }
            AxisName::NSites => {
                let n = as_count("n_sites", value)?;
                s.geometry = Geometry::new(n, s.geometry.topology(), s.geometry.pass_order())?;
                s.receptor = ReceptorConfig::new(
                    &s.geometry,
                    s.geometry.default_receptor(),
                    s.receptor.period(),
                    s.receptor.granularity(),
                )?;
            }
        }
        Ok(s)
    }
}

fn as_count(name: &str, value: f64) -> Result<usize, ExperimentError> {
    if value >= 1.0 && value.fract() == 0.0 && value.is_finite() {
        Ok(value as usize)
    } else {
        Err(ExperimentError::Config(format!(
            "`{name}` must be a positive integer, got {value}"
        )))
    }
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxisName {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AxisName::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown axis `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

/// Observable extracted from each sweep cell. Quantum runs use the cell's
/// first dephasing value; classical runs use the oracle chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Reducer {
    /// Quantum `P_tot` after `t` steps.
    PTotAt {
        t: usize,
    },
    /// `P_tot(classical) - P_tot(quantum)` after `t` steps; negative values
    /// mean a quantum advantage.
    ClassicalMinusQuantumAt {
        t: usize,
    },
    /// First step from which the classical curve is never behind; NaN when
    /// the quantum curve still leads at the horizon.
    ClassicalCatchup,
    /// `max_t |P_tot(quantum) - P_tot(classical)|`.
    MaxGap,
    FinalPTot,
}

impl Reducer {
    pub fn name(&self) -> &'static str {
        match self {
            Reducer::PTotAt { .. } => "p_tot_at",
            Reducer::ClassicalMinusQuantumAt { .. } => "classical_minus_quantum_at",
            Reducer::ClassicalCatchup => "classical_catchup",
            Reducer::MaxGap => "max_gap",
            Reducer::FinalPTot => "final_p_tot",
        }
    }

    pub fn parse(name: &str, t: Option<usize>) -> Result<Self, ExperimentError> {
        let need_t = || {
            t.ok_or_else(|| ExperimentError::Config(format!("reducer `{name}` needs `reducer_t`")))
        };
        Ok(match name {
            "p_tot_at" => Reducer::PTotAt { t: need_t()? },
            "classical_minus_quantum_at" => Reducer::ClassicalMinusQuantumAt { t: need_t()? },
            "classical_catchup" => Reducer::ClassicalCatchup,
            "max_gap" => Reducer::MaxGap,
            "final_p_tot" => Reducer::FinalPTot,
            other => {
                return Err(ExperimentError::Config(format!(
                    "unknown reducer `{other}`"
                )))
            }
        })
    }

    pub fn evaluate(&self, s: &Scenario) -> Result<f64, ExperimentError> {
        let xi = *s
            .xi_values
            .first()
            .ok_or_else(|| ExperimentError::Config("sweep cell has no xi value".into()))?;
        if let Reducer::PTotAt { t } | Reducer::ClassicalMinusQuantumAt { t } = self {
            if *t > s.t_max {
                return Err(ExperimentError::Config(format!(
                    "reducer_t = {t} exceeds t_max = {}",
                    s.t_max
                )));
            }
        }
        let quantum = s.run_quantum(xi)?;
        Ok(match self {
            Reducer::PTotAt { t } => quantum.p_tot_at(*t),
            Reducer::FinalPTot => quantum.final_p_tot(),
            Reducer::ClassicalMinusQuantumAt { t } => {
                s.run_classical().p_tot_at(*t) - quantum.p_tot_at(*t)
            }
            Reducer::ClassicalCatchup => {
                classical_catchup(&s.run_classical(), &quantum).map_or(f64::NAN, |t| t as f64)
            }
            Reducer::MaxGap => max_gap(&quantum, &s.run_classical()),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    pub reducer: Reducer,
    pub budget: usize,
}

impl SweepGrid {
    pub const DEFAULT_BUDGET: usize = 10_000;

    pub fn cell_count(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    /// Cell coordinates in row-major order, last axis fastest.
    pub fn cells(&self) -> Vec<Vec<f64>> {
        let mut cells = vec![Vec::new()];
        for axis in &self.axes {
            cells = cells
                .into_iter()
                .flat_map(|prefix| {
                    axis.values.iter().map(move |&v| {
                        let mut c = prefix.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        cells
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub axis_names: Vec<AxisName>,
    pub reducer: Reducer,
    pub rows: Vec<(Vec<f64>, f64)>,
}

/// Evaluates the reducer over the full grid. Cells run in parallel and are
/// gathered in cell order.
pub fn sweep(base: &Scenario, grid: &SweepGrid) -> Result<SweepTable, ExperimentError> {
    if grid.axes.is_empty() || grid.axes.iter().any(|a| a.values.is_empty()) {
        return Err(ExperimentError::Config(
            "sweep axes must be nonempty".into(),
        ));
    }
    let cells = grid.cell_count();
    if cells > grid.budget {
        return Err(ExperimentError::BudgetExceeded {
            cells,
            budget: grid.budget,
        });
    }
    let rows = grid
        .cells()
        .into_par_iter()
        .map(|coords| {
            let mut s = base.clone();
            for (axis, &v) in grid.axes.iter().zip(&coords) {
                s = axis.name.apply(&s, v)?;
            }
            s.validate()?;
            let value = grid.reducer.evaluate(&s)?;
            Ok((coords, value))
        })
        .collect::<Result<Vec<_>, ExperimentError>>()?;
    Ok(SweepTable {
        axis_names: grid.axes.iter().map(|a| a.name).collect(),
        reducer: grid.reducer,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::{PassOrder, Topology};

    fn base() -> Scenario {
        let g = Geometry::new(10, Topology::Open, PassOrder::Offset1First).unwrap();
        Scenario::new("s", g, 0.5, 0.5).unwrap().with_t_max(40)
    }

    #[test]
    fn cells_row_major() {
        let grid = SweepGrid {
            axes: vec![
                Axis {
                    name: AxisName::P,
                    values: vec![0.1, 0.2],
                },
                Axis {
                    name: AxisName::Q,
                    values: vec![0.3, 0.4, 0.5],
                },
            ],
            reducer: Reducer::FinalPTot,
            budget: 100,
        };
        let cells = grid.cells();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[1], vec![0.1, 0.4]);
        assert_eq!(cells[3], vec![0.2, 0.3]);
    }

    #[test]
    fn single_cell_matches_direct_run() {
        let grid = SweepGrid {
            axes: vec![Axis {
                name: AxisName::Xi,
                values: vec![0.2],
            }],
            reducer: Reducer::PTotAt { t: 30 },
            budget: 1,
        };
        let table = sweep(&base(), &grid).unwrap();
        let direct = base().run_quantum(0.2).unwrap().p_tot_at(30);
        assert_eq!(table.rows, vec![(vec![0.2], direct)]);
    }

    #[test]
    fn budget_enforced() {
        let grid = SweepGrid {
            axes: vec![Axis {
                name: AxisName::Xi,
                values: vec![0.0, 0.5, 1.0],
            }],
            reducer: Reducer::FinalPTot,
            budget: 2,
        };
        assert!(matches!(
            sweep(&base(), &grid),
            Err(ExperimentError::BudgetExceeded {
                cells: 3,
                budget: 2
            })
        ));
    }

    #[test]
    fn ballistic_column_has_no_gap() {
        let grid = SweepGrid {
            axes: vec![
                Axis {
                    name: AxisName::Q,
                    values: vec![0.0, 0.5, 1.0],
                },
                Axis {
                    name: AxisName::Xi,
                    values: vec![0.0, 0.3, 1.0],
                },
            ],
            reducer: Reducer::ClassicalMinusQuantumAt { t: 10 },
            budget: 100,
        };
        let s = AxisName::P
            .apply(&base(), 1.0)
            .unwrap()
            .with_phases(1.0, 0.3);
        let table = sweep(&s, &grid).unwrap();
        for (coords, v) in &table.rows {
            assert!(v.abs() < 1e-12, "{coords:?}: {v}");
        }
    }

    #[test]
    fn axis_application() {
        let s = AxisName::NSites.apply(&base(), 6.0).unwrap();
        assert_eq!(s.geometry.n_sites(), 6);
        assert_eq!(s.receptor.site(), 6);
        let s = AxisName::Period.apply(&base(), 3.0).unwrap();
        assert_eq!(s.receptor.period(), 3);
        assert!(AxisName::Period.apply(&base(), 1.5).is_err());
        assert!(AxisName::P.apply(&base(), 1.5).is_err());
        assert_eq!("phi_sum".parse::<AxisName>().unwrap(), AxisName::PhiSum);
        assert!("nope".parse::<AxisName>().is_err());
    }

    #[test]
    fn reducer_parsing() {
        assert_eq!(Reducer::parse("max_gap", None).unwrap(), Reducer::MaxGap);
        assert_eq!(
            Reducer::parse("p_tot_at", Some(5)).unwrap(),
            Reducer::PTotAt { t: 5 }
        );
        assert!(Reducer::parse("p_tot_at", None).is_err());
        assert!(Reducer::parse("bogus", None).is_err());
    }
}
