//! Fast invariant suite behind the `selfcheck` command. Random cases are
//! drawn from a ChaCha8 stream seeded with [`SEED`], so every run checks the
//! same cases.

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

use crate::automaton::{run, Automaton, Geometry, LatticeConfig, NoHook, PassOrder, Topology};
use crate::experiments::Scenario;
use crate::measurement::integrated_probability;
use crate::qchannel::{
    classical_to_channel, embedded_apply, stochastic_apply, ChannelParams, DiagState2, Mat2,
    StochasticMatrix2, UnitaryParams, C64,
};
use crate::sector_state::SectorState;

pub const SEED: u64 = 20_130_611;

const TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// Worst deviation seen across all cases.
    pub worst: f64,
    pub cases: usize,
}

fn outcome(name: &'static str, worst: f64, cases: usize) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst.is_finite() && worst < TOL,
        worst,
        cases,
    }
}

fn random_density(rng: &mut ChaCha8Rng) -> Mat2 {
    let mut rho = Mat2::zeros();
    let mut weights = [rng.gen::<f64>(), rng.gen::<f64>()];
    let total = weights[0] + weights[1];
    weights.iter_mut().for_each(|w| *w /= total);
    for w in weights {
        let v = Vector2::new(
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
        let v = v / C64::from(v.norm());
        rho += v * v.adjoint() * C64::from(w);
    }
    rho
}

fn random_transition(rng: &mut ChaCha8Rng) -> StochasticMatrix2 {
    StochasticMatrix2::new(rng.gen(), rng.gen()).expect("unit interval")
}

fn random_channel(rng: &mut ChaCha8Rng) -> ChannelParams {
    classical_to_channel(&random_transition(rng))
        .with(rng.gen(), rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU))
        .expect("parameters in range")
}

fn random_geometry(rng: &mut ChaCha8Rng) -> Geometry {
    let topology = if rng.gen() {
        Topology::Open
    } else {
        Topology::Ring
    };
    let order = if rng.gen() {
        PassOrder::Offset1First
    } else {
        PassOrder::Offset0First
    };
    Geometry::new(2 * rng.gen_range(2..12), topology, order).expect("even size")
}

fn doubly_stochastic_identity(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let cases = 500;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let p = rng.gen();
        let t = StochasticMatrix2::new(p, p).expect("unit interval");
        let m = DiagState2::new(rng.gen()).expect("unit interval");
        let quantum = embedded_apply(&t, m, 1.0);
        worst = worst.max((quantum.m() - stochastic_apply(&t, m).m()).abs());
        worst = worst.max(classical_to_channel(&t).eta.abs());
    }
    outcome(
        "doubly stochastic maps = unitary + full dephasing",
        worst,
        cases,
    )
}

fn stochastic_identity(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let cases = 500;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let t = random_transition(rng);
        let m = DiagState2::new(rng.gen()).expect("unit interval");
        let expect = stochastic_apply(&t, m).m();
        let xi = rng.gen();
        worst = worst.max((embedded_apply(&t, m, xi).m() - expect).abs());
        let params = classical_to_channel(&t)
            .with(1.0, 0.0, 0.0)
            .expect("in range");
        let out = params.apply_2d(&m.density());
        worst = worst.max(out[(0, 1)].norm()).max(out[(1, 0)].norm());
    }
    outcome(
        "stochastic maps = unitary + dephasing + damping",
        worst,
        cases,
    )
}

fn channel_is_cptp(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let cases = 500;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let rho = random_density(rng);
        let out = random_channel(rng).apply_2d(&rho);
        worst = worst.max((out.trace().re - rho.trace().re).abs());
        worst = worst.max((out - out.adjoint()).norm());
        let min_eig = out.symmetric_eigenvalues().min();
        worst = worst.max((-min_eig).max(0.0));
    }
    outcome("pair channel preserves trace and positivity", worst, cases)
}

fn oracle_equivalence(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let cases = 12;
    let mut worst: f64 = 0.0;
    for i in 0..cases {
        let g = random_geometry(rng);
        let t = random_transition(rng);
        let mut s = Scenario::new("oracle", g, t.p(), t.q())
            .expect("in range")
            .with_xi(vec![1.0])
            .with_phases(rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU))
            .with_t_max(60);
        s.initial_site = 1 + i % g.n_sites();
        let quantum = s.run_quantum(1.0).expect("valid scenario");
        let classical = s.run_classical();
        for (a, b) in quantum.events.iter().zip(&classical.events) {
            worst = worst
                .max((a.p_tot - b.p_tot).abs())
                .max((a.rho_rr - b.rho_rr).abs());
        }
    }
    outcome("fully dephased automaton = classical chain", worst, cases)
}

fn trace_preservation(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let cases = 12;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let g = random_geometry(rng);
        let automaton = Automaton::new(LatticeConfig::new(g, random_channel(rng)));
        let start = rng.gen_range(1..=g.n_sites());
        let initial = SectorState::basis_state(g.n_sites(), start).expect("site in range");
        let out = run(&automaton, initial, 80, &mut NoHook).expect("matching sizes");
        worst = worst
            .max((out.trace() - 1.0).abs())
            .max(out.hermiticity_error());
        worst = worst.max((-out.min_eigenvalue()).max(0.0));
    }
    outcome(
        "unmeasured evolution is trace preserving and positive",
        worst,
        cases,
    )
}

fn bookkeeping(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let cases = 12;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let g = random_geometry(rng);
        let t = random_transition(rng);
        let mut s = Scenario::new("book", g, t.p(), t.q())
            .expect("in range")
            .with_phases(rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU))
            .with_t_max(80);
        s.check_psd = true;
        let xi = rng.gen();
        let record = s.run_quantum(xi).expect("valid scenario");
        let recursion = integrated_probability(&record.p_inst());
        for (e, r) in record.events.iter().zip(recursion) {
            worst = worst
                .max((e.p_tot - r).abs())
                .max((1.0 - e.trace - e.p_tot).abs());
        }
    }
    outcome(
        "integrated probability matches the survival recursion",
        worst,
        cases,
    )
}

fn phase_sum_invariance(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let cases = 12;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let mut g = random_geometry(rng);
        if g.topology() == Topology::Ring {
            g = Geometry::new(g.n_sites(), Topology::Open, g.pass_order()).expect("valid size");
        }
        let t = random_transition(rng);
        let xi = rng.gen();
        let phi_sum = rng.gen_range(0.0..TAU);
        let base = Scenario::new("phase", g, t.p(), t.q())
            .expect("in range")
            .with_t_max(60);
        let a = base
            .clone()
            .with_phases(phi_sum, rng.gen_range(0.0..TAU))
            .run_quantum(xi);
        let b = base
            .with_phases(phi_sum, rng.gen_range(0.0..TAU))
            .run_quantum(xi);
        for (x, y) in a
            .expect("valid")
            .events
            .iter()
            .zip(&b.expect("valid").events)
        {
            worst = worst.max((x.p_tot - y.p_tot).abs());
        }
    }
    outcome(
        "open-chain absorption depends only on the phase sum",
        worst,
        cases,
    )
}

fn unitary_is_unitary(rng: &mut ChaCha8Rng) -> CheckOutcome {
    let cases = 500;
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let u = UnitaryParams::new(
            rng.gen_range(0.0..std::f64::consts::PI),
            rng.gen_range(0.0..TAU),
            rng.gen_range(0.0..TAU),
        )
        .expect("in range")
        .matrix();
        worst = worst.max((u.adjoint() * u - Mat2::identity()).norm());
    }
    outcome("coherent pair rotation is unitary", worst, cases)
}

/// Runs every check from a fresh generator seeded with [`SEED`].
pub fn run_selfcheck() -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let checks: [fn(&mut ChaCha8Rng) -> CheckOutcome; 8] = [
        unitary_is_unitary,
        doubly_stochastic_identity,
        stochastic_identity,
        channel_is_cptp,
        oracle_equivalence,
        trace_preservation,
        bookkeeping,
        phase_sum_invariance,
    ];
    checks.iter().map(|check| check(&mut rng)).collect()
}
