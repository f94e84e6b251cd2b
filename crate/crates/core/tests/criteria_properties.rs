use proptest::prelude::*;
use qlatwit_core::bosonic::{embed_qubit_chain_into, lattice_spin, FockLatticeSpec};
use qlatwit_core::criteria::{
    collective_uncertainty_criterion, spin_squeezing_criterion, squared_criterion,
    variance_x_criterion, witness_criterion, CriterionReport, Direction,
};
use qlatwit_core::qcore::expectation;
use qlatwit_core::sampling::{random_product_state, random_separable_state};
use qlatwit_core::spinchain::{
    chain_spin, cluster_state, saturating_product_state, tilde_sigma_x_all, ChainSpec, ClusterSpec,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn not_violated(r: &CriterionReport) -> Result<(), TestCaseError> {
    prop_assert!(!r.violated, "{} flagged a separable state: {}", r.name, r);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn no_criterion_flags_separable_chain_states(seed in any::<u64>(), n in prop::sample::select(vec![4usize, 6])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_separable_state(&mut rng, &vec![2; n], 8).unwrap();
        let spin = chain_spin(&ChainSpec::new(n).unwrap()).unwrap();
        not_violated(&witness_criterion(&rho).unwrap())?;
        not_violated(&squared_criterion(&rho).unwrap())?;
        not_violated(&variance_x_criterion(&rho).unwrap())?;
        not_violated(&collective_uncertainty_criterion(&spin, &rho).unwrap())?;
        not_violated(&spin_squeezing_criterion(&spin, &rho, Direction::X, Direction::Y, Direction::Z).unwrap())?;
        not_violated(&spin_squeezing_criterion(&spin, &rho, Direction::Z, Direction::X, Direction::Y).unwrap())?;
    }

    #[test]
    fn no_violation_for_separable_lattice_states(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lat = FockLatticeSpec::new(4, 1).unwrap();
        let spin = lattice_spin(&lat).unwrap();
        let rho = random_separable_state(&mut rng, &[lat.site().dim(); 4], 8).unwrap();
        not_violated(&collective_uncertainty_criterion(&spin, &rho).unwrap())?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn neighbouring_correlators_bounded_on_products(seed in any::<u64>(), n in 2usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let psi = random_product_state(&mut rng, &vec![2; n]).unwrap();
        let means: Vec<f64> = tilde_sigma_x_all(&ChainSpec::new(n).unwrap())
            .unwrap()
            .iter()
            .map(|t| expectation(t, &psi).unwrap())
            .collect();
        for w in means.windows(2) {
            prop_assert!(w[0] + w[1] <= 1.0 + 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn unit_filled_products_saturate(seed in any::<u64>(), n_max in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 3;
        let lat = FockLatticeSpec::new(n, n_max).unwrap();
        let spin = lattice_spin(&lat).unwrap();
        let q = random_product_state(&mut rng, &vec![2; n]).unwrap();
        let psi = embed_qubit_chain_into(&q, &lat).unwrap();
        let r = collective_uncertainty_criterion(&spin, &psi).unwrap();
        prop_assert!((r.value - r.bound).abs() < 1e-9, "{r}");
        prop_assert!((r.bound - n as f64 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn squared_value_at_most_n(seed in any::<u64>(), n in prop::sample::select(vec![4usize, 6])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_separable_state(&mut rng, &vec![2; n], 3).unwrap();
        prop_assert!(squared_criterion(&rho).unwrap().value <= n as f64 + 1e-12);
    }

    #[test]
    fn correlator_eigenstates_have_zero_variance(lambdas in prop::collection::vec(prop::sample::select(vec![-1i8, 1]), 6)) {
        let spec = ClusterSpec::new(ChainSpec::new(6).unwrap(), lambdas).unwrap();
        let r = variance_x_criterion(&cluster_state(&spec).unwrap()).unwrap();
        prop_assert!(r.value.abs() < 1e-10);
    }
}

#[test]
fn witness_saturation_is_exact() {
    for n in [2, 4, 6, 8] {
        let r = witness_criterion(&saturating_product_state(&ChainSpec::new(n).unwrap()).unwrap())
            .unwrap();
        assert!((r.value - r.bound).abs() < 1e-10);
        assert!(!r.violated);
    }
}
