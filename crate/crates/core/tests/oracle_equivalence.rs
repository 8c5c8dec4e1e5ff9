mod common;

use std::sync::Arc;

use preisach::oracle::{NaiveRelayBank, UniformContinuum};
use preisach::{DensityGrid, InitMode, PreisachState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn init_mode() -> impl Strategy<Value = InitMode> {
    prop_oneof![Just(InitMode::AllDown), Just(InitMode::AllUp), Just(InitMode::Demagnetized)]
}

fn density(n: usize, gaussian: bool) -> Arc<DensityGrid> {
    if gaussian {
        common::gaussian(n)
    } else {
        common::uniform(n)
    }
}

// Constant density with diagonal cells carrying half weight, i.e. weight ∝ area.
fn area_uniform(n: usize) -> Arc<DensityGrid> {
    let mesh = common::mesh(n);
    let raw = mesh.cells().map(|(i, j)| if i == j { 0.5 } else { 1.0 }).collect();
    Arc::new(DensityGrid::from_weights(mesh, raw, (-1.0, 1.0)).unwrap())
}

proptest! {
    #[test]
    fn running_output_matches_naive_bank(
        n in 1usize..40,
        gaussian in any::<bool>(),
        mode in init_mode(),
        inputs in prop::collection::vec(-1.3f64..1.3, 1..150),
    ) {
        let d = density(n, gaussian);
        let mut state = PreisachState::new(d.clone(), mode);
        let mut bank = NaiveRelayBank::with_states(&d, state.cell_states().map(|c| c.3).collect());
        for u in inputs {
            state.apply_input(u).unwrap();
            let y = bank.naive_step(u);
            prop_assert!((state.output() - y).abs() <= 1e-9);
            prop_assert!((state.output() - state.direct_output()).abs() <= 1e-9);
            let relays: Vec<i8> = state.cell_states().map(|c| c.3).collect();
            prop_assert_eq!(relays.as_slice(), bank.states());
            prop_assert!(state.check_invariants().is_ok(), "{:?}", state.check_invariants());
        }
    }

    #[test]
    fn sub_cell_readout_is_the_continuum_operator(
        n in 1usize..30,
        from_below in any::<bool>(),
        inputs in prop::collection::vec(-1.1f64..1.1, 1..120),
    ) {
        let mode = if from_below { InitMode::AllDown } else { InitMode::AllUp };
        let mut state = PreisachState::new(area_uniform(n), mode).with_interpolation(true);
        let mut exact = UniformContinuum::new((-1.0, 1.0), (-1.0, 1.0), from_below).unwrap();
        for u in inputs {
            state.apply_input(u).unwrap();
            let y = exact.apply(u);
            prop_assert!((state.output() - y).abs() <= 1e-11, "{} vs {}", state.output(), y);
            prop_assert!(state.check_invariants().is_ok(), "{:?}", state.check_invariants());
        }
    }

    #[test]
    fn sub_cell_and_relay_readouts_agree_on_mesh_nodes(
        n in 1usize..30,
        gaussian in any::<bool>(),
        mode in init_mode(),
        nodes in prop::collection::vec(0usize..=30, 1..60),
    ) {
        let d = density(n, gaussian);
        let edges = d.mesh().edges().to_vec();
        let mut state = PreisachState::new(d, mode).with_interpolation(true);
        for k in nodes {
            state.apply_input(edges[k.min(n)]).unwrap();
            prop_assert!((state.output() - state.discrete_output()).abs() <= 1e-12);
        }
    }
}

#[test]
fn long_random_sequences_on_the_400_mesh() {
    let mut rng = ChaCha8Rng::seed_from_u64(400);
    for gaussian in [false, true] {
        let d = density(400, gaussian);
        let mut state = PreisachState::new(d.clone(), InitMode::Demagnetized);
        let mut bank = NaiveRelayBank::with_states(&d, state.cell_states().map(|c| c.3).collect());
        for u in common::piecewise_monotone(&mut rng, 300) {
            state.apply_input(u).unwrap();
            assert!((state.output() - bank.naive_step(u)).abs() <= 1e-9);
        }
    }
}
