//! Scenario runner, parameter sweeps, grid optimiser and result emission.

pub mod config;
pub mod emit;
pub mod optimize;
pub mod sweep;

use rayon::prelude::*;

use crate::automaton::{run, Automaton, Geometry, LatticeConfig};
use crate::classical_oracle::{run_classical, ClassicalState};
use crate::error::ExperimentError;
use crate::measurement::{AbsorptionMonitor, ReceptorConfig, RunRecord};
use crate::qchannel::{classical_to_channel, ChannelParams, StochasticMatrix2};
use crate::sector_state::SectorState;

pub use optimize::{optimize, optimize_scenario, OptimizeResult};
pub use sweep::{sweep, Axis, AxisName, Reducer, SweepGrid, SweepTable};

/// One fully validated simulation setup. A scenario yields one quantum
/// series per dephasing value plus, optionally, the classical baseline.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub geometry: Geometry,
    pub receptor: ReceptorConfig,
    pub initial_site: usize,
    pub transition: StochasticMatrix2,
    pub xi_values: Vec<f64>,
    pub phi_sum: f64,
    pub phi2: f64,
    pub t_max: usize,
    pub classical_baseline: bool,
    pub check_psd: bool,
}

impl Scenario {
    /// Open or ring lattice measured at its default receptor after every step.
    pub fn new(
        name: impl Into<String>,
        geometry: Geometry,
        p: f64,
        q: f64,
    ) -> Result<Self, ExperimentError> {
        Ok(Self {
            name: name.into(),
            receptor: ReceptorConfig::every_step(&geometry),
            geometry,
            initial_site: 1,
            transition: StochasticMatrix2::new(p, q)?,
            xi_values: vec![0.0],
            phi_sum: 0.0,
            phi2: 0.0,
            t_max: 100,
            classical_baseline: false,
            check_psd: false,
        })
    }

    pub fn with_xi(mut self, xi_values: impl Into<Vec<f64>>) -> Self {
        self.xi_values = xi_values.into();
        self
    }

    pub fn with_phases(mut self, phi_sum: f64, phi2: f64) -> Self {
        self.phi_sum = phi_sum;
        self.phi2 = phi2;
        self
    }

    pub fn with_t_max(mut self, t_max: usize) -> Self {
        self.t_max = t_max;
        self
    }

    pub fn with_classical(mut self, on: bool) -> Self {
        self.classical_baseline = on;
        self
    }

    pub fn with_receptor(mut self, receptor: ReceptorConfig) -> Self {
        self.receptor = receptor;
        self
    }

    pub fn phi1(&self) -> f64 {
        self.phi_sum - self.phi2
    }

    pub fn channel(&self, xi: f64) -> Result<ChannelParams, ExperimentError> {
        Ok(classical_to_channel(&self.transition).with(xi, self.phi1(), self.phi2)?)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.geometry.check_site(self.initial_site)?;
        self.geometry.check_site(self.receptor.site())?;
        if self.xi_values.is_empty() && !self.classical_baseline {
            return Err(ExperimentError::Config(
                "scenario has no series to run".into(),
            ));
        }
        for &xi in &self.xi_values {
            self.channel(xi)?;
        }
        Ok(())
    }

    /// Measured quantum run at dephasing strength `xi`.
    pub fn run_quantum(&self, xi: f64) -> Result<RunRecord, ExperimentError> {
        let automaton = Automaton::new(LatticeConfig::new(self.geometry, self.channel(xi)?));
        let initial = SectorState::basis_state(self.geometry.n_sites(), self.initial_site)?;
        let mut monitor = AbsorptionMonitor::new(self.receptor).with_psd_check(self.check_psd);
        run(&automaton, initial, self.t_max, &mut monitor)?;
        Ok(monitor.into_record())
    }

    pub fn run_classical(&self) -> RunRecord {
        let initial = ClassicalState::basis(self.geometry.n_sites(), self.initial_site);
        run_classical(
            &self.geometry,
            &self.transition,
            initial,
            &self.receptor,
            self.t_max,
        )
        .1
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Model {
    Quantum { xi: f64 },
    Classical,
}

impl Model {
    pub fn label(&self) -> String {
        match self {
            Model::Quantum { xi } => format!("xi={xi}"),
            Model::Classical => "classical".to_string(),
        }
    }

    /// File-name friendly tag.
    pub fn tag(&self) -> String {
        match self {
            Model::Quantum { xi } => format!("xi{xi}"),
            Model::Classical => "classical".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub model: Model,
    pub record: RunRecord,
}

/// Runs every series of a scenario. Quantum series come first in the order
/// of `xi_values`, followed by the classical baseline when requested.
pub fn run_scenario(s: &Scenario) -> Result<Vec<Series>, ExperimentError> {
    s.validate()?;
    let mut series: Vec<Series> = s
        .xi_values
        .par_iter()
        .map(|&xi| {
            Ok(Series {
                model: Model::Quantum { xi },
                record: s.run_quantum(xi)?,
            })
        })
        .collect::<Result<_, ExperimentError>>()?;
    if s.classical_baseline {
        series.push(Series {
            model: Model::Classical,
            record: s.run_classical(),
        });
    }
    Ok(series)
}

/// Steps where the integrated curve is flat after absorption has begun:
/// `p_abs_inst < flat` with `onset ≤ P_tot < ceiling`.
pub fn stationary_steps(record: &RunRecord, onset: f64, flat: f64, ceiling: f64) -> Vec<usize> {
    record
        .events
        .iter()
        .filter(|e| e.p_tot >= onset && e.p_tot < ceiling && e.p_abs_inst < flat)
        .map(|e| e.step)
        .collect()
}

/// Step of the earliest event from which `classical ≥ quantum` holds for
/// every remaining event. `None` when the quantum curve is still ahead at
/// the last event.
pub fn classical_catchup(classical: &RunRecord, quantum: &RunRecord) -> Option<usize> {
    let n = classical.len().min(quantum.len());
    let mut first = None;
    for i in (0..n).rev() {
        if classical.events[i].p_tot >= quantum.events[i].p_tot {
            first = Some(classical.events[i].step);
        } else {
            break;
        }
    }
    first
}

/// `max_t |a(t) - b(t)|` over the common prefix.
pub fn max_gap(a: &RunRecord, b: &RunRecord) -> f64 {
    a.events
        .iter()
        .zip(&b.events)
        .map(|(x, y)| (x.p_tot - y.p_tot).abs())
        .fold(0.0, f64::max)
}
