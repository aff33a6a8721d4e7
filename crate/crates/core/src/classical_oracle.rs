//! Classical Markov chain on the same pass schedule as the automaton: each
//! pair `(a, b)` applies `T_{p,q}` to `(P_a, P_b)`, with `p` the `a → b` hop.

use crate::automaton::{Geometry, PassSchedule, Tick};
use crate::measurement::{ReceptorConfig, RunRecord};
use crate::qchannel::StochasticMatrix2;

#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalState {
    probs: Vec<f64>,
}

impl ClassicalState {
    pub fn basis(n_sites: usize, site: usize) -> Self {
        let mut probs = vec![0.0; n_sites];
        probs[site - 1] = 1.0;
        Self { probs }
    }

    pub fn from_probs(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

pub fn classical_pass(
    state: &mut ClassicalState,
    schedule: &PassSchedule,
    pass: usize,
    t: &StochasticMatrix2,
) {
    for pair in schedule.pass(pass) {
        let (a, b) = (pair.a() - 1, pair.b() - 1);
        // net a → b flux; keeps P_a + P_b fixed up to one rounding
        let flux = t.p() * state.probs[a] - t.q() * state.probs[b];
        state.probs[a] -= flux;
        state.probs[b] += flux;
    }
}

pub fn classical_step(state: &mut ClassicalState, schedule: &PassSchedule, t: &StochasticMatrix2) {
    classical_pass(state, schedule, 0, t);
    classical_pass(state, schedule, 1, t);
}

/// Removes the receptor population and returns it.
pub fn classical_measure(state: &mut ClassicalState, site: usize) -> f64 {
    std::mem::take(&mut state.probs[site - 1])
}

/// Classical counterpart of a measured automaton run, producing the same
/// event series layout.
pub fn run_classical(
    geometry: &Geometry,
    t: &StochasticMatrix2,
    initial: ClassicalState,
    receptor: &ReceptorConfig,
    t_steps: usize,
) -> (ClassicalState, RunRecord) {
    let schedule = geometry.schedule();
    let mut state = initial;
    let mut record = RunRecord::new(receptor.granularity());
    for step in 1..=t_steps {
        for pass in 0..2 {
            classical_pass(&mut state, &schedule, pass, t);
            let tick = Tick { step, pass };
            if receptor.is_due(tick) {
                let before = state.total();
                let w = classical_measure(&mut state, receptor.site());
                record.push(step, tick.passes_done(), w, before, state.total());
            }
        }
    }
    (state, record)
}
