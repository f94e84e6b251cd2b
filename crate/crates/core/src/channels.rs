//! Local decoherence channels and the cluster-state decoherence experiment.
//!
//! Phase flip: `p ρ + (1-p) σz ρ σz`. Depolarizing: `p ρ + (1-p)/3 Σ_a σa ρ σa`.
//! A channel of rate κ acting for time t has `p = (1 + e^{-κt})/2`.

use serde::Serialize;

use crate::criteria::{witness_criterion, CriterionReport};
use crate::error::{Error, Result};
use crate::qcore::{
    apply_local_kraus, c, local_sandwich, negativity, partial_trace, project_local, Axis, CMatrix,
    DensityMatrix, NEGATIVITY_TOL,
};
use crate::spinchain::{self, ChainSpec, ClusterSpec, Sign};

/// Largest chain the decoherence experiment accepts.
pub const MAX_EXPERIMENT_SITES: usize = 10;
/// Largest chain the pairwise threshold accepts.
pub const MAX_PAIRWISE_SITES: usize = 8;
/// Bisection stops once the bracket is this narrow.
pub const BISECTION_WIDTH: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    PhaseFlip,
    Depolarizing,
}

impl ChannelKind {
    pub fn label(self) -> &'static str {
        match self {
            ChannelKind::PhaseFlip => "phase_flip",
            ChannelKind::Depolarizing => "depolarizing",
        }
    }

    /// Single-qubit Kraus operators with weight `p` on the identity.
    pub fn kraus(self, p: f64) -> Result<Vec<CMatrix>> {
        check_probability(p)?;
        let id = CMatrix::identity(2, 2);
        let keep = id * c(p.sqrt(), 0.0);
        Ok(match self {
            ChannelKind::PhaseFlip => vec![keep, Axis::Z.pauli() * c((1.0 - p).sqrt(), 0.0)],
            ChannelKind::Depolarizing => {
                let w = c(((1.0 - p) / 3.0).sqrt(), 0.0);
                let mut ks = vec![keep];
                ks.extend(Axis::ALL.iter().map(|a| a.pauli() * w));
                ks
            }
        })
    }
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("channel weight {p} outside [0, 1]")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecoherenceModel {
    pub kind: ChannelKind,
    pub p: f64,
}

impl DecoherenceModel {
    pub fn new(kind: ChannelKind, p: f64) -> Result<Self> {
        check_probability(p)?;
        Ok(Self { kind, p })
    }

    /// `p = (1 + e^{-κ t_d}) / 2`.
    pub fn from_rate(kind: ChannelKind, kappa: f64, t_d: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::invalid("rate must be positive"));
        }
        if !t_d.is_finite() || t_d < 0.0 {
            return Err(Error::invalid("time must be nonnegative"));
        }
        Self::new(kind, weight_at(kappa, t_d))
    }

    pub fn apply(&self, rho: &DensityMatrix, site: usize) -> Result<DensityMatrix> {
        apply_local_kraus(rho, site, &self.kind.kraus(self.p)?)
    }
}

/// `(1 + e^{-κt}) / 2`.
pub fn weight_at(kappa: f64, t: f64) -> f64 {
    (1.0 + (-kappa * t).exp()) / 2.0
}

/// Time at which `weight_at(κ, t) = p`, for `p ∈ (1/2, 1]`.
pub fn time_for_weight(kappa: f64, p: f64) -> Result<f64> {
    if p.is_nan() || p <= 0.5 || p > 1.0 {
        return Err(Error::invalid(format!(
            "weight {p} is never reached; need p in (1/2, 1]"
        )));
    }
    if kappa.is_nan() || kappa <= 0.0 {
        return Err(Error::invalid("rate must be positive"));
    }
    Ok(-(2.0 * p - 1.0).ln() / kappa)
}

fn require_qubit(rho: &DensityMatrix, site: usize) -> Result<()> {
    if rho.space().site_dim(site)? != 2 {
        return Err(Error::NotQubitChain(rho.space().dims().to_vec()));
    }
    Ok(())
}

/// `p ρ + (1-p) σz ρ σz` on `site`.
pub fn phase_flip(rho: &DensityMatrix, site: usize, p: f64) -> Result<DensityMatrix> {
    require_qubit(rho, site)?;
    DecoherenceModel::new(ChannelKind::PhaseFlip, p)?.apply(rho, site)
}

/// `p ρ + (1-p)/3 (σx ρ σx + σy ρ σy + σz ρ σz)` on `site`.
pub fn depolarizing(rho: &DensityMatrix, site: usize, p: f64) -> Result<DensityMatrix> {
    require_qubit(rho, site)?;
    DecoherenceModel::new(ChannelKind::Depolarizing, p)?.apply(rho, site)
}

/// The model applied independently on every site, in site order.
pub fn apply_all_sites(model: &DecoherenceModel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    let order: Vec<usize> = (1..=rho.n_sites()).collect();
    apply_sites_in_order(model, rho, &order)
}

/// The model applied on the listed sites in the given order.
pub fn apply_sites_in_order(
    model: &DecoherenceModel,
    rho: &DensityMatrix,
    order: &[usize],
) -> Result<DensityMatrix> {
    let kraus = model.kind.kraus(model.p)?;
    let mut out = rho.clone();
    for &site in order {
        require_qubit(&out, site)?;
        out = apply_local_kraus(&out, site, &kraus)?;
    }
    Ok(out)
}

/// One point of the decoherence experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub n: usize,
    pub p: f64,
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
}

impl From<(&CriterionReport, usize, f64)> for ExperimentRecord {
    fn from((r, n, p): (&CriterionReport, usize, f64)) -> Self {
        Self {
            n,
            p,
            value: r.value,
            bound: r.bound,
            violated: r.violated,
        }
    }
}

fn check_experiment_chain(n_sites: usize, max: usize) -> Result<ChainSpec> {
    let chain = ChainSpec::even(n_sites)?;
    if n_sites > max {
        return Err(Error::invalid(format!(
            "at most {max} sites supported, got {n_sites}"
        )));
    }
    Ok(chain)
}

/// Noisy cluster state: `U_PG |+…+>` followed by the channel on every site.
pub fn noisy_cluster_state(chain: &ChainSpec, model: &DecoherenceModel) -> Result<DensityMatrix> {
    let plus = spinchain::uniform_product_state(chain, Axis::X, Sign::Plus)?;
    let u = spinchain::phase_gate_unitary(chain)?;
    let rho = plus.to_density().conjugate(&u)?;
    apply_all_sites(model, &rho)
}

/// Prepare `|+…+>`, apply `U_PG`, decohere every site, apply `U_PG` again and
/// read out `Σ_k <σx(k)>` against the witness bound `N/2`.
pub fn decoherence_experiment(n_sites: usize, p: f64) -> Result<CriterionReport> {
    decoherence_experiment_with(n_sites, &DecoherenceModel::new(ChannelKind::PhaseFlip, p)?)
}

pub fn decoherence_experiment_with(
    n_sites: usize,
    model: &DecoherenceModel,
) -> Result<CriterionReport> {
    let chain = check_experiment_chain(n_sites, MAX_EXPERIMENT_SITES)?;
    let noisy = noisy_cluster_state(&chain, model)?;
    let restored = noisy.conjugate(&spinchain::phase_gate_unitary(&chain)?)?;
    // σx(k) on the restored state equals σ̃x(k) on the noisy cluster state,
    // which is exactly what the witness sums.
    let x = spinchain::collective_spin_sum(&chain, Axis::X)?;
    let value = 2.0 * crate::qcore::expectation(&x, &restored)?;
    let bound = n_sites as f64 / 2.0;
    let mut report = CriterionReport::new(
        "decoherence_witness",
        value,
        bound,
        crate::criteria::Sense::AtMost,
    );
    report = report
        .with(
            "channel",
            crate::criteria::AuxValue::Text(model.kind.label().into()),
        )
        .with("p", crate::criteria::AuxValue::Real(model.p));
    Ok(report)
}

/// Witness value of the noisy cluster state evaluated through the correlators
/// directly (no second `U_PG`).
pub fn noisy_cluster_witness(n_sites: usize, model: &DecoherenceModel) -> Result<CriterionReport> {
    let chain = check_experiment_chain(n_sites, MAX_EXPERIMENT_SITES)?;
    witness_criterion(&noisy_cluster_state(&chain, model)?)
}

fn bisect(
    mut lo: f64,
    mut hi: f64,
    width: f64,
    mut above: impl FnMut(f64) -> Result<bool>,
) -> Result<f64> {
    // Invariant: `above(hi)` holds and `above(lo)` does not.
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Weight `p` above which the decoherence experiment violates the witness.
/// `None` when even `p = 1` does not violate or `p = 1/2` already does.
pub fn witness_threshold(n_sites: usize, kind: ChannelKind) -> Result<Option<f64>> {
    let value = |p: f64| -> Result<f64> {
        Ok(decoherence_experiment_with(n_sites, &DecoherenceModel::new(kind, p)?)?.margin)
    };
    // Bisect on the sign of value - bound itself, so saturation sits exactly at the crossing.
    if value(1.0)? <= 0.0 || value(0.5)? > 0.0 {
        return Ok(None);
    }
    bisect(0.5, 1.0, BISECTION_WIDTH, |p| Ok(value(p)? > 0.0)).map(Some)
}

/// How the two-qubit reduced state is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMode {
    /// Measure `σz = +1` on the outer neighbours of the pair, then trace out the rest.
    MeasuredNeighbours,
    /// Plain partial trace onto the pair.
    PartialTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairwiseThreshold {
    pub n: usize,
    pub channel: ChannelKind,
    pub mode: ReductionMode,
    pub pair: (usize, usize),
    pub negativity_at_one: f64,
    /// `None` when the reduced state is not entangled even at `p = 1`.
    pub critical_p: Option<f64>,
}

/// Reduced state of sites `(k, k+1)` of the noisy cluster state.
pub fn pair_reduction(
    chain: &ChainSpec,
    model: &DecoherenceModel,
    k: usize,
    mode: ReductionMode,
) -> Result<DensityMatrix> {
    let n = chain.n_sites();
    if k < 1 || k + 1 > n {
        return Err(Error::SiteOutOfRange {
            site: k + 1,
            n_sites: n,
        });
    }
    let mut rho = noisy_cluster_state(chain, model)?;
    if mode == ReductionMode::MeasuredNeighbours {
        let up =
            CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]));
        for site in [k.wrapping_sub(1), k + 2] {
            if site >= 1 && site <= n {
                rho = project_local(&rho, site, &up)?;
            }
        }
    }
    partial_trace(&rho, &[k, k + 1])
}

/// Negativity of the pair `(k, k+1)` reduction at weight `p`.
pub fn pair_negativity(
    chain: &ChainSpec,
    kind: ChannelKind,
    p: f64,
    k: usize,
    mode: ReductionMode,
) -> Result<f64> {
    let rho = pair_reduction(chain, &DecoherenceModel::new(kind, p)?, k, mode)?;
    negativity(&rho, &[1])
}

/// Default interior pair: `(2, 3)` for chains of at least four sites.
pub fn default_pair(n_sites: usize) -> usize {
    if n_sites >= 4 {
        2
    } else {
        1
    }
}

/// Critical weight below which the neighbouring-pair reduction of the noisy
/// cluster state stops being entangled (negativity reaches zero).
pub fn pairwise_threshold(n_sites: usize) -> Result<PairwiseThreshold> {
    pairwise_threshold_with(
        n_sites,
        ChannelKind::PhaseFlip,
        ReductionMode::MeasuredNeighbours,
    )
}

pub fn pairwise_threshold_with(
    n_sites: usize,
    kind: ChannelKind,
    mode: ReductionMode,
) -> Result<PairwiseThreshold> {
    let chain = check_experiment_chain(n_sites, MAX_PAIRWISE_SITES)?;
    let k = default_pair(n_sites);
    let neg = |p: f64| pair_negativity(&chain, kind, p, k, mode);
    let at_one = neg(1.0)?;
    let critical_p = if at_one <= NEGATIVITY_TOL {
        None
    } else if neg(0.5)? > NEGATIVITY_TOL {
        Some(0.5)
    } else {
        Some(bisect(0.5, 1.0, BISECTION_WIDTH, |p| {
            Ok(neg(p)? > NEGATIVITY_TOL)
        })?)
    };
    Ok(PairwiseThreshold {
        n: n_sites,
        channel: kind,
        mode,
        pair: (k, k + 1),
        negativity_at_one: at_one,
        critical_p,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifetimeComparison {
    pub kappa: f64,
    pub t_witness: f64,
    pub t_pairwise: f64,
    pub ratio: f64,
}

/// Times at which the witness (`p = 3/4`) and the pairwise entanglement
/// (`p = p_crit`) stop detecting, and their ratio.
pub fn lifetime_comparison(kappa: f64, p_crit: f64) -> Result<LifetimeComparison> {
    lifetime_between(kappa, 0.75, p_crit)
}

/// Same comparison with an arbitrary witness threshold.
pub fn lifetime_between(kappa: f64, p_witness: f64, p_crit: f64) -> Result<LifetimeComparison> {
    let t_witness = time_for_weight(kappa, p_witness)?;
    let t_pairwise = time_for_weight(kappa, p_crit)?;
    Ok(LifetimeComparison {
        kappa,
        t_witness,
        t_pairwise,
        ratio: t_witness / t_pairwise,
    })
}

/// `σz(k) … ρ … σz(k)` for each listed site on the ideal cluster state, then the witness.
pub fn flipped_cluster_witness(n_sites: usize, flips: &[usize]) -> Result<CriterionReport> {
    let chain = ChainSpec::even(n_sites)?;
    let mut state = spinchain::cluster_state(&ClusterSpec::uniform(chain))?;
    for &k in flips {
        state = state.apply_unitary(&spinchain::pauli_sum(&chain, k, Axis::Z)?)?;
    }
    witness_criterion(&state)
}

/// Sandwich with a single-site Pauli (`σ ρ σ`).
pub fn pauli_conjugate(rho: &DensityMatrix, site: usize, axis: Axis) -> Result<DensityMatrix> {
    require_qubit(rho, site)?;
    let p = axis.pauli();
    DensityMatrix::new(
        rho.space().clone(),
        local_sandwich(rho.space(), rho.matrix(), site, &p, &p)?,
    )
}
