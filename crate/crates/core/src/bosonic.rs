//! Two-mode bosonic lattices: each site holds modes `a` and `b` truncated at
//! `n_a + n_b <= n_max`, with Schwinger angular momentum
//! `j_x = (a†b + b†a)/2`, `j_y = i(b†a - a†b)/2`, `j_z = (a†a - b†b)/2`.
//!
//! A single atom in mode `a` is spin up (`|1,0> = |1/2, 1/2>`), in mode `b`
//! spin down (`|0,1> = |1/2, -1/2>`).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::qcore::{
    c, expectation, ground_state, variance, Axis, CMatrix, CVector, CollectiveSpin, GroundState,
    HilbertSpace, LinearOperator, PureState, QuantumState,
};
use crate::spinchain::ChainSpec;

/// Default per-site particle cutoff.
pub const DEFAULT_CUTOFF: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Ladder {
    Annihilate,
    Create,
}

/// Truncated two-mode Fock space of one site.
///
/// Basis order: total particle number ascending, then `n_a` descending:
/// `|0,0>, |1,0>, |0,1>, |2,0>, |1,1>, |0,2>, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SiteFockSpace {
    n_max: usize,
    #[serde(skip)]
    basis: Vec<(usize, usize)>,
}

impl SiteFockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 1 {
            return Err(Error::invalid("site cutoff must be at least 1"));
        }
        let basis = (0..=n_max)
            .flat_map(|n| (0..=n).rev().map(move |na| (na, n - na)))
            .collect();
        Ok(Self { n_max, basis })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[(usize, usize)] {
        &self.basis
    }

    pub fn index_of(&self, n_a: usize, n_b: usize) -> Result<usize> {
        self.basis
            .iter()
            .position(|&s| s == (n_a, n_b))
            .ok_or_else(|| Error::invalid(format!("|{n_a},{n_b}> exceeds cutoff {}", self.n_max)))
    }

    pub fn hilbert_space(&self) -> HilbertSpace {
        HilbertSpace::new(vec![self.dim()]).expect("single site fits the cap")
    }

    fn matrix_from_action(
        &self,
        f: impl Fn(usize, usize) -> Option<(usize, usize, f64)>,
    ) -> CMatrix {
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        for (col, &(na, nb)) in self.basis.iter().enumerate() {
            if let Some((ma, mb, amp)) = f(na, nb) {
                if let Ok(row) = self.index_of(ma, mb) {
                    m[(row, col)] += c(amp, 0.0);
                }
            }
        }
        m
    }

    fn op(&self, m: CMatrix, hermitian: bool) -> LinearOperator {
        LinearOperator::new(self.hilbert_space(), m, hermitian).expect("well-formed site operator")
    }
}

/// Uniform lattice of two-mode sites.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FockLatticeSpec {
    n_sites: usize,
    site: SiteFockSpace,
}

impl FockLatticeSpec {
    pub fn new(n_sites: usize, n_max: usize) -> Result<Self> {
        if n_sites < 1 {
            return Err(Error::invalid("lattice needs at least one site"));
        }
        let site = SiteFockSpace::new(n_max)?;
        HilbertSpace::uniform(n_sites, site.dim())?;
        Ok(Self { n_sites, site })
    }

    /// Lattice with one particle per site available (cutoff 1).
    pub fn unit_cutoff(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, 1)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn site(&self) -> &SiteFockSpace {
        &self.site
    }

    pub fn space(&self) -> HilbertSpace {
        HilbertSpace::uniform(self.n_sites, self.site.dim()).expect("validated at construction")
    }

    /// Product of site Fock states `|n_a, n_b>`.
    pub fn product_state(&self, occupations: &[(usize, usize)]) -> Result<PureState> {
        if occupations.len() != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: occupations.len(),
            });
        }
        let digits = occupations
            .iter()
            .map(|&(na, nb)| self.site.index_of(na, nb))
            .collect::<Result<Vec<_>>>()?;
        PureState::basis(self.space(), &digits)
    }

    /// Composite indices of the unit-filled sector, listed in qubit-basis order
    /// (qubit digit 0 ↦ `|1,0>`, 1 ↦ `|0,1>`).
    pub fn unit_filling_sector(&self) -> Result<Vec<usize>> {
        let up = self.site.index_of(1, 0)?;
        let down = self.site.index_of(0, 1)?;
        let space = self.space();
        let n = self.n_sites;
        (0..1usize << n)
            .map(|bits| {
                let digits: Vec<usize> = (0..n)
                    .map(|k| {
                        if bits >> (n - 1 - k) & 1 == 0 {
                            up
                        } else {
                            down
                        }
                    })
                    .collect();
                space.index_of(&digits)
            })
            .collect()
    }
}

/// Truncated ladder operator. Creation out of the cutoff maps to zero.
pub fn mode_operator(space: &SiteFockSpace, mode: Mode, kind: Ladder) -> LinearOperator {
    let m = space.matrix_from_action(|na, nb| match (mode, kind) {
        (Mode::A, Ladder::Annihilate) if na > 0 => Some((na - 1, nb, (na as f64).sqrt())),
        (Mode::B, Ladder::Annihilate) if nb > 0 => Some((na, nb - 1, (nb as f64).sqrt())),
        (Mode::A, Ladder::Create) => Some((na + 1, nb, ((na + 1) as f64).sqrt())),
        (Mode::B, Ladder::Create) => Some((na, nb + 1, ((nb + 1) as f64).sqrt())),
        _ => None,
    });
    space.op(m, false)
}

/// Number-conserving hop `a†b` built from its action, so it is exact on the
/// top shell (a product of truncated ladders would not be).
fn a_dag_b(space: &SiteFockSpace) -> CMatrix {
    space.matrix_from_action(|na, nb| {
        (nb > 0).then(|| (na + 1, nb - 1, (((na + 1) * nb) as f64).sqrt()))
    })
}

/// Site angular momentum component.
pub fn schwinger_j(space: &SiteFockSpace, axis: Axis) -> LinearOperator {
    let raise = a_dag_b(space);
    let lower = raise.adjoint();
    let m = match axis {
        Axis::X => (&raise + &lower) * c(0.5, 0.0),
        Axis::Y => (&lower - &raise) * c(0.0, 0.5),
        Axis::Z => space.matrix_from_action(|na, nb| Some((na, nb, (na as f64 - nb as f64) / 2.0))),
    };
    space.op(m, true)
}

/// `a†a + b†b`.
pub fn site_number_operator(space: &SiteFockSpace) -> LinearOperator {
    let m = space.matrix_from_action(|na, nb| Some((na, nb, (na + nb) as f64)));
    space.op(m, true)
}

/// Operator norm of `j_x² + j_y² + j_z² - (N/2)(1 + N/2)` on the truncated site.
pub fn maximal_angular_momentum_check(space: &SiteFockSpace) -> f64 {
    let mut j2 = CMatrix::zeros(space.dim(), space.dim());
    for axis in Axis::ALL {
        let j = schwinger_j(space, axis);
        j2 += j.matrix() * j.matrix();
    }
    let n = site_number_operator(space);
    let half = n.matrix() * c(0.5, 0.0);
    let id = CMatrix::identity(space.dim(), space.dim());
    let rhs = &half * (&id + &half);
    (j2 - rhs).singular_values().max()
}

/// `Σ_k j_axis(k)` on the lattice.
pub fn collective_j_fock(lattice: &FockLatticeSpec, axis: Axis) -> Result<LinearOperator> {
    sum_of_site_ops(lattice, schwinger_j(lattice.site(), axis).matrix())
}

/// Total particle number `Σ_k N_k`.
pub fn total_number_operator(lattice: &FockLatticeSpec) -> Result<LinearOperator> {
    sum_of_site_ops(lattice, site_number_operator(lattice.site()).matrix())
}

fn sum_of_site_ops(lattice: &FockLatticeSpec, local: &CMatrix) -> Result<LinearOperator> {
    let space = lattice.space();
    let mut acc = LinearOperator::zeros(&space);
    for k in 1..=lattice.n_sites() {
        acc = acc.add(&LinearOperator::embed_local(&space, k, local)?)?;
    }
    Ok(acc)
}

/// Collective spin and total particle number of the lattice.
pub fn lattice_spin(lattice: &FockLatticeSpec) -> Result<CollectiveSpin<LinearOperator>> {
    Ok(CollectiveSpin {
        x: collective_j_fock(lattice, Axis::X)?,
        y: collective_j_fock(lattice, Axis::Y)?,
        z: collective_j_fock(lattice, Axis::Z)?,
        number: total_number_operator(lattice)?,
    })
}

/// Isometry from the qubit chain into the unit-filled sector of `lattice`.
pub fn qubit_embedding(lattice: &FockLatticeSpec) -> Result<CMatrix> {
    let sector = lattice.unit_filling_sector()?;
    let mut m = CMatrix::zeros(lattice.space().dim(), sector.len());
    for (col, &row) in sector.iter().enumerate() {
        m[(row, col)] = c(1.0, 0.0);
    }
    Ok(m)
}

/// Map a qubit-chain state into the unit-filled lattice with cutoff 1.
pub fn embed_qubit_chain(state: &PureState) -> Result<PureState> {
    let site = FockLatticeSpec::unit_cutoff(state.n_sites())?;
    embed_qubit_chain_into(state, &site)
}

/// Map a qubit-chain state into the unit-filled sector of any lattice.
pub fn embed_qubit_chain_into(state: &PureState, lattice: &FockLatticeSpec) -> Result<PureState> {
    if !state.space().is_qubit_chain() {
        return Err(Error::NotQubitChain(state.space().dims().to_vec()));
    }
    if state.n_sites() != lattice.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: lattice.n_sites(),
            found: state.n_sites(),
        });
    }
    let sector = lattice.unit_filling_sector()?;
    PureState::lift(lattice.space(), &sector, state.amplitudes())
}

/// `(|↑↓> - |↓↑>)/√2` on every adjacent pair `(2k-1, 2k)`.
pub fn singlet_chain(n_pairs: usize) -> Result<PureState> {
    if n_pairs < 1 {
        return Err(Error::invalid("need at least one singlet pair"));
    }
    embed_qubit_chain(&qubit_singlet_chain(n_pairs)?)
}

/// Qubit version of [`singlet_chain`].
pub fn qubit_singlet_chain(n_pairs: usize) -> Result<PureState> {
    if n_pairs < 1 {
        return Err(Error::invalid("need at least one singlet pair"));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let pair = PureState::new(
        HilbertSpace::qubits(2)?,
        CVector::from_row_slice(&[c(0.0, 0.0), c(h, 0.0), c(-h, 0.0), c(0.0, 0.0)]),
    )?;
    let mut out = pair.clone();
    for _ in 1..n_pairs {
        out = out.tensor(&pair)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    Antiferromagnetic,
    Ferromagnetic,
}

impl Coupling {
    fn sign(self) -> f64 {
        match self {
            Coupling::Antiferromagnetic => 1.0,
            Coupling::Ferromagnetic => -1.0,
        }
    }
}

/// `±Σ_{k=1}^{N-1} j(k)·j(k+1)` on an open chain.
pub fn heisenberg_hamiltonian(
    lattice: &FockLatticeSpec,
    coupling: Coupling,
) -> Result<LinearOperator> {
    let space = lattice.space();
    let mut bond = CMatrix::zeros(lattice.site().dim().pow(2), lattice.site().dim().pow(2));
    for axis in Axis::ALL {
        let j = schwinger_j(lattice.site(), axis);
        bond += j.matrix().kronecker(j.matrix());
    }
    bond *= c(coupling.sign(), 0.0);
    let mut acc = LinearOperator::zeros(&space);
    for k in 1..lattice.n_sites() {
        acc = acc.add(&LinearOperator::embed_block(&space, k, &bond)?)?;
    }
    acc.into_hermitian()
}

/// `J_x² + J_y² + J_z²`.
pub fn total_spin_squared(lattice: &FockLatticeSpec) -> Result<LinearOperator> {
    let space = lattice.space();
    let mut acc = CMatrix::zeros(space.dim(), space.dim());
    for axis in Axis::ALL {
        let j = collective_j_fock(lattice, axis)?;
        acc += j.matrix() * j.matrix();
    }
    LinearOperator::hermitian(space, acc)
}

/// Lowest eigenpair of `h` restricted to the span of `sector` basis indices,
/// lifted back to the full space.
pub fn sector_ground_state(h: &LinearOperator, sector: &[usize]) -> Result<GroundState> {
    if sector.is_empty() {
        return Err(Error::invalid("empty sector"));
    }
    let sub = h.restrict(sector);
    let sub_space = HilbertSpace::new(vec![sector.len()])?;
    let gs = ground_state(&LinearOperator::hermitian(sub_space, sub)?)?;
    let state = PureState::lift(h.space().clone(), sector, gs.state.amplitudes())?;
    Ok(GroundState { state, ..gs })
}

/// Ground state of the Heisenberg chain within the unit-filled sector.
pub fn heisenberg_ground_state(
    lattice: &FockLatticeSpec,
    coupling: Coupling,
) -> Result<GroundState> {
    let h = heisenberg_hamiltonian(lattice, coupling)?;
    sector_ground_state(&h, &lattice.unit_filling_sector()?)
}

/// Probability weight on sites whose occupation reached the cutoff, summed over
/// sites. Small values mean the cutoff did not distort the state.
pub fn top_shell_weight(lattice: &FockLatticeSpec, state: &PureState) -> Result<f64> {
    let space = lattice.space();
    if state.space() != &space {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: state.space().dim(),
        });
    }
    let n_max = lattice.site().n_max();
    let mut w = 0.0;
    for (i, a) in state.amplitudes().iter().enumerate() {
        let full = space
            .digits(i)
            .iter()
            .filter(|&&d| {
                let (na, nb) = lattice.site().basis()[d];
                na + nb == n_max
            })
            .count();
        w += a.norm_sqr() * full as f64;
    }
    Ok(w)
}

/// Single-site spin statistics entering the lattice uncertainty bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SiteUncertainty {
    /// `Var(j_x) + Var(j_y) + Var(j_z)`.
    pub variance_sum: f64,
    /// `<j_x>² + <j_y>² + <j_z>²`.
    pub mean_spin_squared: f64,
    pub mean_number: f64,
    pub number_variance: f64,
}

impl SiteUncertainty {
    /// `ΣVar(j) - Var(N)/4 - <N>/2`, nonnegative for every state.
    pub fn uncertainty_slack(&self) -> f64 {
        self.variance_sum - self.number_variance / 4.0 - self.mean_number / 2.0
    }

    /// `<N>²/4 - Σ<j>²`, nonnegative for every state.
    pub fn mean_spin_slack(&self) -> f64 {
        self.mean_number * self.mean_number / 4.0 - self.mean_spin_squared
    }
}

/// Spin statistics of a state of one site.
pub fn site_uncertainty<S: QuantumState + ?Sized>(
    space: &SiteFockSpace,
    state: &S,
) -> Result<SiteUncertainty> {
    let mut variance_sum = 0.0;
    let mut mean_spin_squared = 0.0;
    for axis in Axis::ALL {
        let j = schwinger_j(space, axis);
        variance_sum += variance(&j, state)?;
        mean_spin_squared += expectation(&j, state)?.powi(2);
    }
    let n = site_number_operator(space);
    Ok(SiteUncertainty {
        variance_sum,
        mean_spin_squared,
        mean_number: expectation(&n, state)?,
        number_variance: variance(&n, state)?,
    })
}

/// Unit-filled qubit chain matching `lattice`.
pub fn matching_chain(lattice: &FockLatticeSpec) -> Result<ChainSpec> {
    ChainSpec::new(lattice.n_sites())
}
