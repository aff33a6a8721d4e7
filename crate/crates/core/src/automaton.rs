//! Partitioned automaton: one step applies the pair channel to a sublattice
//! of disjoint neighbouring pairs, then to the same sublattice shifted by one
//! site.

use serde::{Deserialize, Serialize};

use crate::error::LatticeError;
use crate::qchannel::{ChannelParams, Mat2};
use crate::sector_state::{PairIndex, SectorState};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Open,
    Ring,
}

/// Which sublattice goes first within a step. `Offset1First` applies pairs
/// `(2,3), (4,5), …` before `(1,2), (3,4), …`, so that on an even open chain
/// the pair holding the last site runs last.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassOrder {
    #[default]
    Offset1First,
    Offset0First,
}

/// Lattice geometry without channel parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Geometry {
    n_sites: usize,
    topology: Topology,
    pass_order: PassOrder,
}

impl Geometry {
    pub fn new(
        n_sites: usize,
        topology: Topology,
        pass_order: PassOrder,
    ) -> Result<Self, LatticeError> {
        if n_sites < 2 {
            return Err(LatticeError::TooSmall(n_sites));
        }
        if topology == Topology::Ring && n_sites % 2 == 1 {
            return Err(LatticeError::OddRing(n_sites));
        }
        Ok(Self {
            n_sites,
            topology,
            pass_order,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn pass_order(&self) -> PassOrder {
        self.pass_order
    }

    /// Default receptor: last site of an open chain, the antipode of site 1 on a ring.
    pub fn default_receptor(&self) -> usize {
        match self.topology {
            Topology::Open => self.n_sites,
            Topology::Ring => self.n_sites / 2 + 1,
        }
    }

    pub fn check_site(&self, site: usize) -> Result<usize, LatticeError> {
        if site == 0 || site > self.n_sites {
            Err(LatticeError::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            })
        } else {
            Ok(site)
        }
    }

    pub fn schedule(&self) -> PassSchedule {
        let n = self.n_sites;
        let pair = |a, b| PairIndex::new(a, b, n).expect("scheduled pairs are adjacent");
        let odd_start: Vec<PairIndex> = (1..n).step_by(2).map(|a| pair(a, a + 1)).collect();
        let mut even_start: Vec<PairIndex> = (2..n).step_by(2).map(|a| pair(a, a + 1)).collect();
        if self.topology == Topology::Ring {
            // N is even, so (N, 1) shares no site with the other even-start pairs.
            even_start.push(pair(n, 1));
        }
        let passes = match self.pass_order {
            PassOrder::Offset1First => [even_start, odd_start],
            PassOrder::Offset0First => [odd_start, even_start],
        };
        PassSchedule { passes }
    }
}

/// The two ordered passes of one automaton step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PassSchedule {
    passes: [Vec<PairIndex>; 2],
}

impl PassSchedule {
    pub fn pass(&self, index: usize) -> &[PairIndex] {
        &self.passes[index]
    }

    pub fn passes(&self) -> &[Vec<PairIndex>; 2] {
        &self.passes
    }
}

/// Geometry plus the pair channel applied on every pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeConfig {
    pub geometry: Geometry,
    pub params: ChannelParams,
}

impl LatticeConfig {
    pub fn new(geometry: Geometry, params: ChannelParams) -> Self {
        Self { geometry, params }
    }

    pub fn n_sites(&self) -> usize {
        self.geometry.n_sites
    }
}

/// Position within a run: `step` counts from 1, `pass` is 0 or 1 within it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Tick {
    pub step: usize,
    pub pass: usize,
}

impl Tick {
    /// Passes completed so far, counting this one.
    pub fn passes_done(&self) -> usize {
        2 * (self.step - 1) + self.pass + 1
    }

    pub fn ends_step(&self) -> bool {
        self.pass == 1
    }
}

/// Called after every pass of [`run`].
pub trait PassHook {
    type Error: From<LatticeError>;

    fn after_pass(&mut self, tick: Tick, state: &mut SectorState) -> Result<(), Self::Error>;

    /// Lets a hook end a run early, e.g. once the state is exhausted.
    fn finished(&self) -> bool {
        false
    }
}

/// Hook that does nothing.
pub struct NoHook;

impl PassHook for NoHook {
    type Error = LatticeError;

    fn after_pass(&mut self, _: Tick, _: &mut SectorState) -> Result<(), LatticeError> {
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Automaton {
    config: LatticeConfig,
    schedule: PassSchedule,
    unitary: Mat2,
}

impl Automaton {
    pub fn new(config: LatticeConfig) -> Self {
        Self {
            schedule: config.geometry.schedule(),
            unitary: config.params.unitary().matrix(),
            config,
        }
    }

    pub fn config(&self) -> &LatticeConfig {
        &self.config
    }

    pub fn schedule(&self) -> &PassSchedule {
        &self.schedule
    }

    fn check(&self, state: &SectorState) -> Result<(), LatticeError> {
        if state.n_sites() != self.config.n_sites() {
            return Err(LatticeError::DimensionMismatch {
                state: state.n_sites(),
                lattice: self.config.n_sites(),
            });
        }
        Ok(())
    }

    /// `Ξ ∘ Φ ∘ U` on a single pair.
    pub fn apply_pair(&self, state: &mut SectorState, pair: PairIndex) {
        state.pair_unitary(pair, &self.unitary);
        state.pair_dephase(pair, self.config.params.xi());
        state.pair_damp(pair, self.config.params.eta());
    }

    pub fn apply_pass(&self, state: &mut SectorState, pass: usize) -> Result<(), LatticeError> {
        self.check(state)?;
        for &pair in self.schedule.pass(pass) {
            self.apply_pair(state, pair);
        }
        Ok(())
    }

    pub fn step(&self, state: &mut SectorState) -> Result<(), LatticeError> {
        self.apply_pass(state, 0)?;
        self.apply_pass(state, 1)
    }
}

/// Iterates `t_steps` automaton steps, calling `hooks` after every pass.
pub fn run<H: PassHook>(
    automaton: &Automaton,
    initial: SectorState,
    t_steps: usize,
    hooks: &mut H,
) -> Result<SectorState, H::Error> {
    let mut state = initial;
    automaton.check(&state)?;
    for step in 1..=t_steps {
        for pass in 0..2 {
            if !hooks.finished() {
                automaton.apply_pass(&mut state, pass)?;
            }
            hooks.after_pass(Tick { step, pass }, &mut state)?;
        }
    }
    Ok(state)
}
