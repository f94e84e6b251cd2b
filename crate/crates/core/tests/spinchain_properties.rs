use num_complex::Complex64;
use proptest::prelude::*;
use qlatwit_core::criteria::Direction;
use qlatwit_core::qcore::{expectation, Axis, Observable, PauliSum};
use qlatwit_core::spinchain::{
    chain_spin, cluster_state, conjugate_by_phase_gate, phase_gate_unitary, tilde_sigma_x,
    tilde_sigma_x_all, uniform_product_state, ChainSpec, ClusterSpec, Sign,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn phase_gate_maps_sigma_x_to_correlator() {
    for n in 2..=8 {
        let chain = ChainSpec::new(n).unwrap();
        for k in 1..=n {
            let a = conjugate_by_phase_gate(&chain, k).unwrap();
            let b = tilde_sigma_x(&chain, k).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-10, "n={n} k={k}");
        }
    }
}

#[test]
fn cluster_state_is_phase_gate_on_plus() {
    for n in 2..=8 {
        let chain = ChainSpec::new(n).unwrap();
        let plus = uniform_product_state(&chain, Axis::X, Sign::Plus).unwrap();
        let prepared = plus
            .apply_unitary(&phase_gate_unitary(&chain).unwrap())
            .unwrap();
        let cluster = cluster_state(&ClusterSpec::uniform(chain)).unwrap();
        assert!(prepared.fidelity(&cluster).unwrap() > 1.0 - 1e-10, "n={n}");
    }
}

#[test]
fn correlators_commute() {
    for n in 2..=8 {
        let chain = ChainSpec::new(n).unwrap();
        let ts = tilde_sigma_x_all(&chain).unwrap();
        for a in &ts {
            for b in &ts {
                let comm = a
                    .mul(b)
                    .unwrap()
                    .add(&b.mul(a).unwrap().scale(Complex64::new(-1.0, 0.0)))
                    .unwrap();
                assert!(comm.to_operator().operator_norm() < 1e-10);
            }
        }
    }
}

#[test]
fn cluster_mean_spin_vanishes() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in [4, 5, 6] {
        let chain = ChainSpec::new(n).unwrap();
        let spin = chain_spin(&chain).unwrap();
        let state = cluster_state(&ClusterSpec::uniform(chain)).unwrap();
        let mut dirs = vec![Direction::X, Direction::Y, Direction::Z];
        for _ in 0..20 {
            let v = [
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            ];
            dirs.push(Direction::normalized(v).unwrap());
        }
        for d in dirs {
            let jn: PauliSum = spin.along(d.components()).unwrap();
            assert!(expectation(&jn, &state).unwrap().abs() < 1e-10);
        }
    }
}

fn cluster_spec() -> impl Strategy<Value = (usize, Vec<i8>)> {
    (2usize..=8).prop_flat_map(|n| {
        (
            Just(n),
            prop::collection::vec(prop::sample::select(vec![-1i8, 1]), n),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cluster_eigen_residuals((n, lambdas) in cluster_spec()) {
        let chain = ChainSpec::new(n).unwrap();
        let spec = ClusterSpec::new(chain, lambdas.clone()).unwrap();
        let psi = cluster_state(&spec).unwrap();
        for (t, l) in tilde_sigma_x_all(&chain).unwrap().iter().zip(&lambdas) {
            let residual = t.apply_vec(psi.amplitudes()) - psi.amplitudes() * Complex64::new(*l as f64, 0.0);
            prop_assert!(residual.norm() < 1e-10);
        }
    }
}
