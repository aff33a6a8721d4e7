use std::f64::consts::{PI, TAU};

use approx::assert_abs_diff_eq;
use nalgebra::Vector2;
use proptest::prelude::*;

use nqca::automaton::{run, Automaton, Geometry, LatticeConfig, NoHook, PassOrder, Topology};
use nqca::experiments::emit::record_csv_string;
use nqca::experiments::{
    max_gap, run_scenario, sweep, Axis, AxisName, Reducer, Scenario, SweepGrid,
};
use nqca::qchannel::{
    amp_damp_2d, classical_to_channel, sigma_x, DiagState2, Mat2, StochasticMatrix2, C64,
};
use nqca::sector_state::SectorState;

fn density(a: [f64; 4], b: [f64; 4], w: f64) -> Mat2 {
    let ket = |c: [f64; 4]| {
        let v = Vector2::new(C64::new(c[0], c[1]), C64::new(c[2], c[3]));
        let n = v.norm().max(1e-9);
        v / C64::from(n)
    };
    let (u, v) = (ket(a), ket(b));
    u * u.adjoint() * C64::from(w) + v * v.adjoint() * C64::from(1.0 - w)
}

fn comp() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-1.0..1.0f64)
}

fn geometry() -> impl Strategy<Value = Geometry> {
    (2usize..10, any::<bool>(), any::<bool>()).prop_map(|(half, ring, first)| {
        let topology = if ring { Topology::Ring } else { Topology::Open };
        let order = if first {
            PassOrder::Offset1First
        } else {
            PassOrder::Offset0First
        };
        Geometry::new(2 * half, topology, order).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn embedding_reproduces_stochastic_map(
        p in 0.0..=1.0f64, q in 0.0..=1.0f64, m in 0.0..=1.0f64,
        xi in 0.0..=1.0f64, phi1 in 0.0..TAU, phi2 in 0.0..TAU,
    ) {
        let rho = DiagState2::new(m).unwrap().density();
        let out = classical_to_channel(&StochasticMatrix2::new(p, q).unwrap())
            .with(xi, phi1, phi2)
            .unwrap()
            .apply_2d(&rho);
        prop_assert!((out[(0, 0)].re - ((1.0 - p - q) * m + q)).abs() < 1e-12);
        if xi == 1.0 {
            prop_assert!(out[(0, 1)].norm() < 1e-12);
        }
    }

    #[test]
    fn pair_channel_is_cptp(
        p in 0.0..=1.0f64, q in 0.0..=1.0f64, xi in 0.0..=1.0f64,
        phi1 in 0.0..TAU, phi2 in 0.0..TAU, a in comp(), b in comp(), w in 0.0..=1.0f64,
    ) {
        let rho = density(a, b, w);
        let out = classical_to_channel(&StochasticMatrix2::new(p, q).unwrap())
            .with(xi, phi1, phi2)
            .unwrap()
            .apply_2d(&rho);
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
        prop_assert!((out - out.adjoint()).norm() < 1e-12);
        prop_assert!(out.symmetric_eigenvalues().min() > -1e-12);
    }

    #[test]
    fn swapped_damping_is_sigma_x_conjugate(eta in 0.0..=1.0f64, a in comp(), b in comp(), w in 0.0..=1.0f64) {
        let rho = density(a, b, w);
        let x = sigma_x();
        let direct = amp_damp_2d(&rho, -eta);
        let conj = x * amp_damp_2d(&(x * rho * x), eta) * x;
        prop_assert!((direct - conj).norm() < 1e-12);
    }

    #[test]
    fn evolved_states_respect_pinching_bound(
        g in geometry(), p in 0.0..=1.0f64, q in 0.0..=1.0f64, xi in 0.0..=1.0f64,
        phi in 0.0..TAU, steps in 0usize..40,
    ) {
        let params = classical_to_channel(&StochasticMatrix2::new(p, q).unwrap()).with(xi, phi, 0.0).unwrap();
        let a = Automaton::new(LatticeConfig::new(g, params));
        let s = run(&a, SectorState::basis_state(g.n_sites(), 1).unwrap(), steps, &mut NoHook).unwrap();
        let n = g.n_sites();
        for i in 1..=n {
            for j in 1..=n {
                let bound = s.population(i) * s.population(j);
                prop_assert!(s.get(i, j).norm_sqr() <= bound + 1e-12);
            }
        }
        prop_assert!((s.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_dephasing_matches_classical_chain(
        g in geometry(), p in 0.0..=1.0f64, q in 0.0..=1.0f64, phi in 0.0..TAU, start in 1usize..4,
    ) {
        let mut s = Scenario::new("prop", g, p, q).unwrap().with_phases(phi, 0.3).with_t_max(60);
        s.initial_site = start;
        let quantum = s.run_quantum(1.0).unwrap();
        let classical = s.run_classical();
        for (a, b) in quantum.events.iter().zip(&classical.events) {
            prop_assert!((a.p_tot - b.p_tot).abs() < 1e-12);
        }
    }
}

#[test]
fn bias_suppresses_the_quantum_gap() {
    let gaps: Vec<f64> = [(0.5, 0.5), (0.7, 0.5), (0.9, 0.5)]
        .iter()
        .map(|&(p, q)| {
            let g = Geometry::new(64, Topology::Open, PassOrder::Offset1First).unwrap();
            let s = Scenario::new("bias", g, p, q).unwrap().with_t_max(1000);
            max_gap(&s.run_quantum(0.0).unwrap(), &s.run_quantum(1.0).unwrap())
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] <= w[0]), "{gaps:?}");
}

#[test]
fn identical_scenarios_give_identical_csv() {
    let g = Geometry::new(32, Topology::Open, PassOrder::Offset1First).unwrap();
    let s = Scenario::new("det", g, 0.6, 0.5)
        .unwrap()
        .with_xi(vec![0.0, 0.1, 1.0])
        .with_phases(PI, 0.0)
        .with_t_max(200)
        .with_classical(true);
    let render = || -> Vec<String> {
        run_scenario(&s)
            .unwrap()
            .iter()
            .map(|x| record_csv_string(&x.record))
            .collect()
    };
    assert_eq!(render(), render());
}

#[test]
fn sweep_matches_sequential_evaluation() {
    let g = Geometry::new(18, Topology::Ring, PassOrder::Offset1First).unwrap();
    let base = Scenario::new("grid", g, 0.5, 0.5).unwrap().with_t_max(120);
    let grid = SweepGrid {
        axes: vec![
            Axis {
                name: AxisName::P,
                values: vec![0.3, 0.5, 0.8],
            },
            Axis {
                name: AxisName::Xi,
                values: vec![0.0, 0.1, 1.0],
            },
        ],
        reducer: Reducer::ClassicalMinusQuantumAt { t: 80 },
        budget: 9,
    };
    let table = sweep(&base, &grid).unwrap();
    for (coords, value) in &table.rows {
        let s = AxisName::Xi
            .apply(&AxisName::P.apply(&base, coords[0]).unwrap(), coords[1])
            .unwrap();
        let expect =
            s.run_classical().p_tot_at(80) - s.run_quantum(coords[1]).unwrap().p_tot_at(80);
        assert_eq!(*value, expect);
        if coords[1] == 1.0 {
            assert_abs_diff_eq!(*value, 0.0, epsilon = 1e-12);
        }
    }
}
