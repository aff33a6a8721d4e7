//! Receptor absorption: a projective measurement `{1 - |r⟩⟨r|, |r⟩⟨r|}`
//! repeated on a fixed schedule, with the unabsorbed branch carried forward
//! unnormalised so that its trace is the survival probability.

use serde::{Deserialize, Serialize};

use crate::automaton::{Geometry, PassHook, Tick};
use crate::error::MeasurementError;
use crate::qchannel::UnitaryParams;
use crate::sector_state::SectorState;

/// Surviving trace below which a run is considered fully absorbed.
pub const EXHAUSTED_TRACE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    #[default]
    PerStep,
    PerPass,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReceptorConfig {
    site: usize,
    period: usize,
    granularity: Granularity,
}

impl ReceptorConfig {
    pub fn new(
        geometry: &Geometry,
        site: usize,
        period: usize,
        granularity: Granularity,
    ) -> Result<Self, MeasurementError> {
        geometry.check_site(site)?;
        if period == 0 {
            return Err(MeasurementError::ZeroPeriod);
        }
        Ok(Self {
            site,
            period,
            granularity,
        })
    }

    /// Default receptor site, measured after every step.
    pub fn every_step(geometry: &Geometry) -> Self {
        Self {
            site: geometry.default_receptor(),
            period: 1,
            granularity: Granularity::PerStep,
        }
    }

    pub fn site(&self) -> usize {
        self.site
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    pub fn is_due(&self, tick: Tick) -> bool {
        match self.granularity {
            Granularity::PerStep => tick.ends_step() && tick.step.is_multiple_of(self.period),
            Granularity::PerPass => tick.passes_done().is_multiple_of(self.period),
        }
    }
}

/// One measurement. `rho_rr` is the unnormalised weight captured,
/// `p_abs_inst` the same weight conditioned on survival so far.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementEvent {
    pub step: usize,
    pub passes: usize,
    pub rho_rr: f64,
    pub p_abs_inst: f64,
    pub p_tot: f64,
    pub trace: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunRecord {
    pub events: Vec<MeasurementEvent>,
    pub granularity: Granularity,
}

impl RunRecord {
    pub fn new(granularity: Granularity) -> Self {
        Self {
            events: Vec::new(),
            granularity,
        }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn p_tot(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.p_tot).collect()
    }

    pub fn p_inst(&self) -> Vec<f64> {
        self.events.iter().map(|e| e.p_abs_inst).collect()
    }

    /// `P_tot` at the end of step `t`: the latest event with `step ≤ t`,
    /// 0 before the first event.
    pub fn p_tot_at(&self, t: usize) -> f64 {
        match self.events.partition_point(|e| e.step <= t) {
            0 => 0.0,
            i => self.events[i - 1].p_tot,
        }
    }

    pub fn final_p_tot(&self) -> f64 {
        self.events.last().map_or(0.0, |e| e.p_tot)
    }

    /// Appends an event. `P_tot` accumulates captured weights so it is
    /// nondecreasing up to the sign of rounding noise in the weights.
    pub(crate) fn push(
        &mut self,
        step: usize,
        passes: usize,
        weight: f64,
        trace_before: f64,
        trace: f64,
    ) {
        let p_abs_inst = if trace_before > 0.0 {
            weight / trace_before
        } else {
            0.0
        };
        self.events.push(MeasurementEvent {
            step,
            passes,
            rho_rr: weight,
            p_abs_inst,
            p_tot: self.final_p_tot() + weight,
            trace,
        });
    }
}

/// Projects out the receptor: returns the captured weight `ρ_rr` and leaves
/// the state with row and column `r` zeroed, not renormalised.
pub fn measure_and_condition(
    state: &mut SectorState,
    site: usize,
) -> Result<f64, MeasurementError> {
    let trace = state.trace();
    if trace < EXHAUSTED_TRACE {
        return Err(MeasurementError::Exhausted(trace));
    }
    let weight = state.population(site);
    state.zero_site(site);
    Ok(weight)
}

/// `P_tot(t) = 1 - Π_{s≤t} (1 - p̂(s))` from normalised conditional
/// absorption probabilities.
pub fn integrated_probability(conditional: &[f64]) -> Vec<f64> {
    let mut survival = 1.0;
    conditional
        .iter()
        .map(|p| {
            survival *= 1.0 - p;
            1.0 - survival
        })
        .collect()
}

/// Predicted receptor population after the next step of an open chain,
/// from the `(N-2, N-1)` block alone:
/// `|u21|² (|u21|² ρ_{N-2,N-2} + |u22|² ρ_{N-1,N-1} + 2 Re(u21 u22* ρ_{N-2,N-1}))`.
///
/// Exact when the receptor row and column are zero, the next step is purely
/// unitary and the `(N-1, N)` pair runs in the second pass. Returns `None`
/// for fewer than three sites.
pub fn predict_next_absorption(state: &SectorState, unitary: &UnitaryParams) -> Option<f64> {
    let n = state.n_sites();
    if n < 3 {
        return None;
    }
    let u = unitary.matrix();
    let (u21, u22) = (u[(1, 0)], u[(1, 1)]);
    let (a, b) = (n - 2, n - 1);
    let inner = u21.norm_sqr() * state.population(a)
        + u22.norm_sqr() * state.population(b)
        + 2.0 * (u21 * u22.conj() * state.get(a, b)).re;
    Some(u21.norm_sqr() * inner)
}

/// [`PassHook`] that measures the receptor on schedule and records events.
#[derive(Clone, Debug)]
pub struct AbsorptionMonitor {
    receptor: ReceptorConfig,
    record: RunRecord,
    exhausted: bool,
    check_psd: bool,
}

impl AbsorptionMonitor {
    pub fn new(receptor: ReceptorConfig) -> Self {
        Self {
            receptor,
            record: RunRecord::new(receptor.granularity),
            exhausted: false,
            check_psd: false,
        }
    }

    /// Also verify positive semidefiniteness at every event (O(N³) each).
    pub fn with_psd_check(mut self, on: bool) -> Self {
        self.check_psd = on;
        self
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn into_record(self) -> RunRecord {
        self.record
    }
}

impl PassHook for AbsorptionMonitor {
    type Error = MeasurementError;

    fn after_pass(&mut self, tick: Tick, state: &mut SectorState) -> Result<(), MeasurementError> {
        if !self.receptor.is_due(tick) {
            return Ok(());
        }
        if self.check_psd && !self.exhausted {
            let min_eigenvalue = state.min_eigenvalue();
            if min_eigenvalue < -1e-10 {
                return Err(MeasurementError::NotPsd {
                    step: tick.step,
                    min_eigenvalue,
                });
            }
        }
        let before = state.trace();
        let weight = if self.exhausted {
            0.0
        } else {
            match measure_and_condition(state, self.receptor.site) {
                Ok(w) => w,
                Err(MeasurementError::Exhausted(_)) => {
                    self.exhausted = true;
                    0.0
                }
                Err(e) => return Err(e),
            }
        };
        self.record
            .push(tick.step, tick.passes_done(), weight, before, state.trace());
        Ok(())
    }

    fn finished(&self) -> bool {
        self.exhausted
    }
}
