use hierlab::flows::{conservation_report, evolve, max_drift, Scheme};
use hierlab::lax::LaxContext;
use hierlab::{GridFunction, HierarchyTable, Kappa, PeriodicGrid, StateFile};

#[test]
fn state_file_round_trip_is_bit_exact() {
    let phi = GridFunction::random_band_limited(PeriodicGrid::standard(), 5, 42, 0.7).unwrap();
    let text = phi.to_state().to_json();
    let back = GridFunction::from_state(&StateFile::from_json(&text).unwrap()).unwrap();
    assert_eq!(back.values(), phi.values());
    assert_eq!(back.grid(), phi.grid());
}

#[test]
fn saved_state_continues_the_flow() {
    let t = HierarchyTable::build(6, Kappa::Focusing).unwrap();
    let phi = GridFunction::random_band_limited(PeriodicGrid::standard(), 3, 5, 0.5).unwrap();
    let whole = evolve(&t, 3, &phi, 1e-3, 200, Scheme::Strang, 200).unwrap();

    let half = evolve(&t, 3, &phi, 1e-3, 100, Scheme::Strang, 100).unwrap();
    let saved = half.states.last().unwrap().to_state().to_json();
    let resumed = GridFunction::from_state(&StateFile::from_json(&saved).unwrap()).unwrap();
    let rest = evolve(&t, 3, &resumed, 1e-3, 100, Scheme::Strang, 100).unwrap();

    let diff = rest.states.last().unwrap().max_abs_diff(whole.states.last().unwrap()).unwrap();
    assert!(diff < 1e-13, "{diff}");

    let list: Vec<usize> = (1..=6).collect();
    let rows = conservation_report(&t, &whole, &list).unwrap();
    for n in list {
        assert!(max_drift(&rows, n) < 1e-6);
    }
}

#[test]
fn monodromy_trace_is_a_flow_invariant_for_every_flow() {
    for kappa in [Kappa::Defocusing, Kappa::Focusing] {
        let t = HierarchyTable::build(4, kappa).unwrap();
        let phi = GridFunction::random_band_limited(PeriodicGrid::standard(), 3, 9, 0.4).unwrap();
        let trace0 = LaxContext::conjugate_pair(&phi, kappa, 3.0).unwrap().monodromy_trace().unwrap();
        for (n, scheme) in [(3, Scheme::Strang), (4, Scheme::Ifrk4)] {
            let tr = evolve(&t, n, &phi, 2e-4, 500, scheme, 500).unwrap();
            let end = tr.states.last().unwrap();
            let trace = LaxContext::conjugate_pair(end, kappa, 3.0).unwrap().monodromy_trace().unwrap();
            assert!((trace - trace0).norm() < 1e-6 * (1.0 + trace0.norm()), "n={n}: {trace} vs {trace0}");
        }
    }
}
