//! Qubit-chain builders: Pauli strings, the three-site correlators
//! `σz(k-1) σx(k) σz(k+1)`, collective spin, the nearest-neighbour phase gate,
//! cluster states and Hamiltonian evolution.
//!
//! Basis convention: `|0>` is spin up (`σz = +1`), site 1 is the most
//! significant bit. The chain is open: `σz(0) = σz(N+1) = 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{
    c, matrix_exponential, Axis, CVector, CollectiveSpin, HilbertSpace, LinearOperator, Observable,
    PauliSum, PureState, C64,
};

/// Open qubit chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChainSpec {
    n_sites: usize,
}

impl ChainSpec {
    pub fn new(n_sites: usize) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::invalid(format!(
                "a chain needs at least 2 sites, got {n_sites}"
            )));
        }
        HilbertSpace::qubits(n_sites)?;
        Ok(Self { n_sites })
    }

    /// Chain whose witness-type criteria are defined (even length).
    pub fn even(n_sites: usize) -> Result<Self> {
        let chain = Self::new(n_sites)?;
        chain.require_even()?;
        Ok(chain)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn require_even(&self) -> Result<()> {
        if self.n_sites.is_multiple_of(2) {
            Ok(())
        } else {
            Err(Error::OddChain(self.n_sites))
        }
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::qubits(self.n_sites).expect("validated at construction")
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.n_sites {
            Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            })
        } else {
            Ok(())
        }
    }
}

/// Eigenvalue pattern of a cluster state, one `±1` per site.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterSpec {
    chain: ChainSpec,
    lambdas: Vec<i8>,
}

impl ClusterSpec {
    pub fn new(chain: ChainSpec, lambdas: Vec<i8>) -> Result<Self> {
        if lambdas.len() != chain.n_sites() {
            return Err(Error::DimensionMismatch {
                expected: chain.n_sites(),
                found: lambdas.len(),
            });
        }
        if lambdas.iter().any(|&l| l != 1 && l != -1) {
            return Err(Error::invalid("cluster eigenvalues must be +1 or -1"));
        }
        Ok(Self { chain, lambdas })
    }

    /// All eigenvalues `+1`.
    pub fn uniform(chain: ChainSpec) -> Self {
        Self {
            lambdas: vec![1; chain.n_sites()],
            chain,
        }
    }

    pub fn chain(&self) -> ChainSpec {
        self.chain
    }

    pub fn lambdas(&self) -> &[i8] {
        &self.lambdas
    }
}

/// Single-site Pauli embedded in the chain (dense).
pub fn pauli(chain: &ChainSpec, site: usize, axis: Axis) -> Result<LinearOperator> {
    Ok(pauli_sum(chain, site, axis)?.to_operator())
}

/// Single-site Pauli in structured form.
pub fn pauli_sum(chain: &ChainSpec, site: usize, axis: Axis) -> Result<PauliSum> {
    chain.check_site(site)?;
    PauliSum::single(chain.n_sites(), site, axis)
}

/// `σz(k-1) σx(k) σz(k+1)` with the boundary factors dropped, structured form.
pub fn tilde_sigma_x_sum(chain: &ChainSpec, k: usize) -> Result<PauliSum> {
    chain.check_site(k)?;
    let mut factors = vec![(k, Axis::X)];
    if k > 1 {
        factors.push((k - 1, Axis::Z));
    }
    if k < chain.n_sites() {
        factors.push((k + 1, Axis::Z));
    }
    PauliSum::product(chain.n_sites(), &factors)
}

/// `σz(k-1) σx(k) σz(k+1)` with the boundary factors dropped (dense).
pub fn tilde_sigma_x(chain: &ChainSpec, k: usize) -> Result<LinearOperator> {
    Ok(tilde_sigma_x_sum(chain, k)?.to_operator())
}

/// All `N` correlators, structured.
pub fn tilde_sigma_x_all(chain: &ChainSpec) -> Result<Vec<PauliSum>> {
    (1..=chain.n_sites())
        .map(|k| tilde_sigma_x_sum(chain, k))
        .collect()
}

/// `Σ_k σ_axis(k) / 2`, structured.
pub fn collective_spin_sum(chain: &ChainSpec, axis: Axis) -> Result<PauliSum> {
    let mut acc = PauliSum::zero(chain.n_sites())?;
    for k in 1..=chain.n_sites() {
        acc = acc.add(&PauliSum::single(chain.n_sites(), k, axis)?)?;
    }
    Ok(acc.scale(c(0.5, 0.0)))
}

/// `Σ_k σ_axis(k) / 2` (dense).
pub fn collective_spin(chain: &ChainSpec, axis: Axis) -> Result<LinearOperator> {
    Ok(collective_spin_sum(chain, axis)?.to_operator())
}

/// Collective spin of a unit-filled qubit chain; the particle number is `N·1`.
pub fn chain_spin(chain: &ChainSpec) -> Result<CollectiveSpin<PauliSum>> {
    Ok(CollectiveSpin {
        x: collective_spin_sum(chain, Axis::X)?,
        y: collective_spin_sum(chain, Axis::Y)?,
        z: collective_spin_sum(chain, Axis::Z)?,
        number: PauliSum::identity(chain.n_sites())?.scale(c(chain.n_sites() as f64, 0.0)),
    })
}

/// Hermitian exponent `Σ_{k=1}^{N-1} (1 - σz(k))(1 - σz(k+1))` of the phase gate.
pub fn phase_gate_generator(chain: &ChainSpec) -> Result<LinearOperator> {
    let n = chain.n_sites();
    let one = PauliSum::identity(n)?;
    let mut acc = PauliSum::zero(n)?;
    for k in 1..n {
        let a = one.add(&PauliSum::single(n, k, Axis::Z)?.scale(c(-1.0, 0.0)))?;
        let b = one.add(&PauliSum::single(n, k + 1, Axis::Z)?.scale(c(-1.0, 0.0)))?;
        acc = acc.add(&a.mul(&b)?)?;
    }
    Ok(acc.to_operator())
}

/// `U_PG = exp{ i π/4 Σ_k (1 - σz(k))(1 - σz(k+1)) }`, a controlled phase on
/// every neighbouring pair.
pub fn phase_gate_unitary(chain: &ChainSpec) -> Result<LinearOperator> {
    matrix_exponential(&phase_gate_generator(chain)?, c(0.0, PI / 4.0))
}

/// `U_PG σx(k) U_PG`.
pub fn conjugate_by_phase_gate(chain: &ChainSpec, k: usize) -> Result<LinearOperator> {
    let u = phase_gate_unitary(chain)?;
    let x = pauli(chain, k, Axis::X)?;
    let out = u.compose(&x)?.compose(&u)?;
    // U_PG is diagonal with entries ±1, so the conjugate is Hermitian.
    out.into_hermitian()
}

const CLUSTER_REFERENCE_ATTEMPTS: u64 = 3;

/// Simultaneous eigenstate of all correlators with the given eigenvalues,
/// obtained by projecting a generic reference vector with
/// `Π_k (1 + λ_k σ̃x(k)) / 2`.
pub fn cluster_state(spec: &ClusterSpec) -> Result<PureState> {
    let chain = spec.chain();
    let space = chain.space();
    let d = space.dim();
    let projectors = tilde_sigma_x_all(&chain)?
        .into_iter()
        .zip(spec.lambdas())
        .map(|(t, &l)| {
            PauliSum::identity(chain.n_sites())?
                .add(&t.scale(c(l as f64, 0.0)))
                .map(|p| p.scale(c(0.5, 0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    for attempt in 0..CLUSTER_REFERENCE_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(0x005e_edc1_u64 + attempt);
        let mut v = CVector::from_fn(d, |_, _| {
            c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
        });
        for p in &projectors {
            v = p.apply_vec(&v);
        }
        // The projected subspace is one-dimensional, so a generic vector keeps
        // weight about 2^{-N/2}; anything near round-off means we hit the kernel.
        if v.norm() > 1e-8 {
            return PureState::normalized(space, v);
        }
    }
    Err(Error::ProjectionFailed {
        attempts: CLUSTER_REFERENCE_ATTEMPTS as usize,
    })
}

/// `+` or `-` eigenstate along a Bloch axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Single-qubit eigenstate of `σ_axis` with eigenvalue `sign`.
pub fn bloch_eigenstate(axis: Axis, sign: Sign) -> PureState {
    let s = sign.value();
    let amps = match axis {
        Axis::Z if s > 0.0 => [c(1.0, 0.0), c(0.0, 0.0)],
        Axis::Z => [c(0.0, 0.0), c(1.0, 0.0)],
        Axis::X => [c(FRAC_1_SQRT_2, 0.0), c(s * FRAC_1_SQRT_2, 0.0)],
        Axis::Y => [c(FRAC_1_SQRT_2, 0.0), c(0.0, s * FRAC_1_SQRT_2)],
    };
    PureState::new(
        HilbertSpace::qubits(1).expect("one qubit"),
        CVector::from_row_slice(&amps),
    )
    .expect("unit norm")
}

/// Tensor product of single-qubit Bloch eigenstates, one per site.
pub fn product_state(specs: &[(Axis, Sign)]) -> Result<PureState> {
    let (first, rest) = specs
        .split_first()
        .ok_or_else(|| Error::invalid("product state needs at least one site"))?;
    let mut state = bloch_eigenstate(first.0, first.1);
    for &(axis, sign) in rest {
        state = state.tensor(&bloch_eigenstate(axis, sign))?;
    }
    Ok(state)
}

/// `|+x>|+z>|+x>|+z>...`, the separable state that saturates the witness bound.
pub fn saturating_product_state(chain: &ChainSpec) -> Result<PureState> {
    let specs: Vec<_> = (0..chain.n_sites())
        .map(|k| (if k % 2 == 0 { Axis::X } else { Axis::Z }, Sign::Plus))
        .collect();
    product_state(&specs)
}

/// The same Bloch eigenstate on every site.
pub fn uniform_product_state(chain: &ChainSpec, axis: Axis, sign: Sign) -> Result<PureState> {
    product_state(&vec![(axis, sign); chain.n_sites()])
}

/// `exp(-i h t) |state>`.
pub fn evolve(h: &LinearOperator, t: f64, state: &PureState) -> Result<PureState> {
    if !h.hermitian_hint() {
        return Err(Error::NotHermitian(f64::NAN));
    }
    let u = matrix_exponential(h, C64::new(0.0, -t))?;
    state.apply_unitary(&u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{expectation, CMatrix};

    fn chain(n: usize) -> ChainSpec {
        ChainSpec::new(n).unwrap()
    }

    #[test]
    fn pauli_examples() {
        let ch = chain(2);
        let s01 = PureState::basis(ch.space(), &[0, 1]).unwrap();
        let z1 = pauli(&ch, 1, Axis::Z).unwrap();
        assert!((s01.apply_unitary(&z1).unwrap().amplitudes() - s01.amplitudes()).norm() < 1e-15);
        let x2 = pauli(&ch, 2, Axis::X).unwrap();
        let s00 = PureState::basis(ch.space(), &[0, 0]).unwrap();
        assert!((s00.apply_unitary(&x2).unwrap().amplitudes() - s01.amplitudes()).norm() < 1e-15);
        let x = pauli(&ch, 1, Axis::X).unwrap();
        let y = pauli(&ch, 1, Axis::Y).unwrap();
        let z = pauli(&ch, 1, Axis::Z).unwrap();
        let comm = x.commutator(&y).unwrap();
        assert!(comm.max_abs_diff(&z.scale_complex(c(0.0, 2.0))) < 1e-15);
        assert!(matches!(
            pauli(&ch, 3, Axis::X),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn tilde_sigma_boundary_and_bulk() {
        let ch = chain(4);
        let t1 = tilde_sigma_x(&ch, 1).unwrap();
        let expected = pauli(&ch, 1, Axis::X)
            .unwrap()
            .compose(&pauli(&ch, 2, Axis::Z).unwrap())
            .unwrap();
        assert!(t1.max_abs_diff(&expected) < 1e-15);
        let t2 = tilde_sigma_x(&ch, 2).unwrap();
        let expected = pauli(&ch, 1, Axis::Z)
            .unwrap()
            .compose(&pauli(&ch, 2, Axis::X).unwrap())
            .unwrap()
            .compose(&pauli(&ch, 3, Axis::Z).unwrap())
            .unwrap();
        assert!(t2.max_abs_diff(&expected) < 1e-15);
        for k in 1..=4 {
            let t = tilde_sigma_x(&ch, k).unwrap();
            assert!(
                t.compose(&t)
                    .unwrap()
                    .max_abs_diff(&LinearOperator::identity(&ch.space()))
                    < 1e-15
            );
        }
        assert!(tilde_sigma_x(&ch, 0).is_err());
        assert!(tilde_sigma_x(&ch, 5).is_err());
    }

    #[test]
    fn collective_spin_on_all_up() {
        let ch = chain(5);
        let up = uniform_product_state(&ch, Axis::Z, Sign::Plus).unwrap();
        let jz = collective_spin(&ch, Axis::Z).unwrap();
        assert!((expectation(&jz, &up).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn phase_gate_action() {
        let ch = chain(2);
        let u = phase_gate_unitary(&ch).unwrap();
        let m = u.matrix();
        assert!((m[(3, 3)] - c(-1.0, 0.0)).norm() < 1e-14);
        for i in 0..3 {
            assert!((m[(i, i)] - c(1.0, 0.0)).norm() < 1e-14);
        }
        assert!(u.is_diagonal());
    }

    #[test]
    fn phase_gate_squared_restores_basis_states() {
        // Diagonal phases of U_PG are integer multiples of π, so U_PG² has
        // phases that are multiples of 2π.
        let ch = chain(3);
        let u = phase_gate_unitary(&ch).unwrap();
        let u2 = u.compose(&u).unwrap();
        for i in 0..8 {
            let e = PureState::basis(ch.space(), &ch.space().digits(i)).unwrap();
            assert!((e.apply_unitary(&u2).unwrap().fidelity(&e).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugation_identity_small_cases() {
        let ch = chain(3);
        let conj = conjugate_by_phase_gate(&ch, 2).unwrap();
        assert!(conj.max_abs_diff(&tilde_sigma_x(&ch, 2).unwrap()) < 1e-10);
        let ch2 = chain(2);
        let conj = conjugate_by_phase_gate(&ch2, 1).unwrap();
        assert!(conj.max_abs_diff(&tilde_sigma_x(&ch2, 1).unwrap()) < 1e-10);
        assert!(conj.hermitian_hint());
        assert!(
            conj.compose(&conj)
                .unwrap()
                .max_abs_diff(&LinearOperator::identity(&ch2.space()))
                < 1e-10
        );
    }

    #[test]
    fn cluster_state_eigen_residuals() {
        let ch = chain(2);
        let psi = cluster_state(&ClusterSpec::uniform(ch)).unwrap();
        for k in 1..=2 {
            let t = tilde_sigma_x_sum(&ch, k).unwrap();
            let r = (t.apply_vec(psi.amplitudes()) - psi.amplitudes()).norm();
            assert!(r < 1e-10);
        }
    }

    #[test]
    fn alternating_cluster_squares_sum_to_n() {
        let ch = chain(4);
        let psi = cluster_state(&ClusterSpec::new(ch, vec![1, -1, 1, -1]).unwrap()).unwrap();
        let total: f64 = tilde_sigma_x_all(&ch)
            .unwrap()
            .iter()
            .map(|t| expectation(t, &psi).unwrap().powi(2))
            .sum();
        assert!((total - 4.0).abs() < 1e-10);
    }

    #[test]
    fn cluster_spec_validation() {
        let ch = chain(3);
        assert!(ClusterSpec::new(ch, vec![1, 0, 1]).is_err());
        assert!(ClusterSpec::new(ch, vec![1, 1]).is_err());
        assert!(ChainSpec::new(1).is_err());
        assert!(matches!(ChainSpec::even(5), Err(Error::OddChain(5))));
    }

    #[test]
    fn evolve_examples() {
        let ch1 = HilbertSpace::qubits(1).unwrap();
        let z = LinearOperator::hermitian(ch1.clone(), Axis::Z.pauli()).unwrap();
        let plus = bloch_eigenstate(Axis::X, Sign::Plus);
        let minus = bloch_eigenstate(Axis::X, Sign::Minus);
        let same = evolve(&z, 0.0, &plus).unwrap();
        assert!((same.fidelity(&plus).unwrap() - 1.0).abs() < 1e-14);
        // exp(-iπσz) = -1 on both components; a half period flips |+> to |->.
        let half = evolve(&z, PI / 2.0, &plus).unwrap();
        assert!((half.fidelity(&minus).unwrap() - 1.0).abs() < 1e-12);
        let full = evolve(&z, PI, &plus).unwrap();
        assert!((full.fidelity(&plus).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evolve_preserves_norm_for_long_times() {
        let s = HilbertSpace::qubits(3).unwrap();
        let m = CMatrix::from_fn(8, 8, |i, j| {
            c(
                ((i * 7 + j * 3) % 5) as f64 - 2.0,
                ((i + 2 * j) % 3) as f64 - 1.0,
            )
        });
        let h = LinearOperator::hermitian(s.clone(), &m + m.adjoint()).unwrap();
        let psi = PureState::basis(s, &[0, 1, 0]).unwrap();
        let out = evolve(&h, 100.0, &psi).unwrap();
        assert!((out.amplitudes().norm() - 1.0).abs() < 1e-10);
        assert_eq!(out.n_sites(), 3);
    }
}
