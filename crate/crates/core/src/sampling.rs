//! Random states for soundness checks: Haar-uniform single-site pure states,
//! their products, and Dirichlet-weighted mixtures of products (separable by
//! construction).

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::qcore::{c, CVector, DensityMatrix, HilbertSpace, PureState};

/// Haar-uniform pure state of one site with local dimension `dim`.
pub fn haar_site_state<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Result<PureState> {
    let amps = CVector::from_fn(dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    PureState::normalized(HilbertSpace::new(vec![dim])?, amps)
}

/// Product of independent Haar-uniform site states.
pub fn random_product_state<R: Rng + ?Sized>(rng: &mut R, dims: &[usize]) -> Result<PureState> {
    let (first, rest) = dims
        .split_first()
        .ok_or_else(|| Error::invalid("need at least one site"))?;
    let mut state = haar_site_state(rng, *first)?;
    for &d in rest {
        state = state.tensor(&haar_site_state(rng, d)?)?;
    }
    Ok(state)
}

/// Uniform weights on the probability simplex.
pub fn dirichlet_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Mixture of between 1 and `max_terms` random product states.
pub fn random_separable_state<R: Rng + ?Sized>(
    rng: &mut R,
    dims: &[usize],
    max_terms: usize,
) -> Result<DensityMatrix> {
    if max_terms == 0 {
        return Err(Error::invalid("need at least one mixture term"));
    }
    let terms = rng.random_range(1..=max_terms);
    let weights = dirichlet_weights(rng, terms);
    let states = (0..terms)
        .map(|_| random_product_state(rng, dims).map(|s| s.to_density()))
        .collect::<Result<Vec<_>>>()?;
    DensityMatrix::mixture(&weights, &states)
}

/// Haar-uniform pure state of a whole space (generally entangled).
pub fn haar_state<R: Rng + ?Sized>(rng: &mut R, space: &HilbertSpace) -> Result<PureState> {
    let amps = CVector::from_fn(space.dim(), |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        c(re, im)
    });
    PureState::normalized(space.clone(), amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn separable_samples_are_valid() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let rho = random_separable_state(&mut rng, &[2, 2, 3], 8).unwrap();
            rho.check_valid().unwrap();
        }
    }

    #[test]
    fn weights_on_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = dirichlet_weights(&mut rng, 6);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert!(w.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let a = random_product_state(&mut ChaCha8Rng::seed_from_u64(9), &[2, 2]).unwrap();
        let b = random_product_state(&mut ChaCha8Rng::seed_from_u64(9), &[2, 2]).unwrap();
        assert_eq!(a, b);
    }
}
