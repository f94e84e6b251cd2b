//! Single-pulse preparation of collective-uncertainty violating states from
//! `|↑…↑>` and a seeded Nelder–Mead search over the pulse angles.
//!
//! `U = exp(-i {θ_xx Σ j_x(k) j_x(k+1) + θ_yy Σ j_y(k) j_y(k+1) + θ_z Σ j_z(k)})`
//! with `j = σ/2` on an open chain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::criteria::collective_uncertainty_criterion;
use crate::error::{Error, Result};
use crate::qcore::{
    c, expectation, matrix_exponential, Axis, CollectiveSpin, LinearCombination, LinearOperator,
    Observable, PauliSum, PureState, QuantumState,
};
use crate::spinchain::{self, ChainSpec, Sign};

/// Largest chain a pulse is built on.
pub const MAX_PULSE_SITES: usize = 10;
pub const DEFAULT_RESTARTS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulseParams {
    pub theta_xx: f64,
    pub theta_yy: f64,
    pub theta_z: f64,
}

impl PulseParams {
    pub fn new(theta_xx: f64, theta_yy: f64, theta_z: f64) -> Result<Self> {
        Self::from_array([theta_xx, theta_yy, theta_z])
    }

    pub fn from_array(a: [f64; 3]) -> Result<Self> {
        if a.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("pulse angles must be finite"));
        }
        Ok(Self {
            theta_xx: a[0],
            theta_yy: a[1],
            theta_z: a[2],
        })
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.theta_xx, self.theta_yy, self.theta_z]
    }

    /// The pulse `(-3.2, -9.6, 0.8)`.
    pub fn reference() -> Self {
        Self {
            theta_xx: -3.2,
            theta_yy: -9.6,
            theta_z: 0.8,
        }
    }
}

fn check_chain(chain: &ChainSpec) -> Result<()> {
    if chain.n_sites() > MAX_PULSE_SITES {
        return Err(Error::invalid(format!(
            "pulses are limited to {MAX_PULSE_SITES} sites, got {}",
            chain.n_sites()
        )));
    }
    Ok(())
}

/// Hermitian pulse generator as a Pauli sum.
pub fn pulse_generator(chain: &ChainSpec, params: PulseParams) -> Result<PauliSum> {
    let n = chain.n_sites();
    let mut h = PauliSum::zero(n)?;
    for k in 1..n {
        for (axis, theta) in [(Axis::X, params.theta_xx), (Axis::Y, params.theta_yy)] {
            let pair = PauliSum::product(n, &[(k, axis), (k + 1, axis)])?;
            h = h.add(&pair.scale(c(theta / 4.0, 0.0)))?;
        }
    }
    let jz = spinchain::collective_spin_sum(chain, Axis::Z)?;
    h.add(&jz.scale(c(params.theta_z, 0.0)))
}

/// `exp(-i H(params))` on the qubit chain.
pub fn pulse_unitary(chain: &ChainSpec, params: PulseParams) -> Result<LinearOperator> {
    check_chain(chain)?;
    let h = pulse_generator(chain, params)?.to_operator();
    matrix_exponential(&h, c(0.0, -1.0))
}

/// `U(params) |↑…↑>`.
pub fn pulsed_state(chain: &ChainSpec, params: PulseParams) -> Result<PureState> {
    let up = spinchain::uniform_product_state(chain, Axis::Z, Sign::Plus)?;
    up.apply_unitary(&pulse_unitary(chain, params)?)
}

/// `1 - ΣVar(J) / (<N>/2)`: zero at saturation, one at maximal violation.
pub fn violation_ratio<O, S>(spin: &CollectiveSpin<O>, state: &S) -> Result<f64>
where
    O: LinearCombination,
    S: QuantumState + ?Sized,
{
    let number = expectation(&spin.number, state)?;
    if number.abs() < 1e-12 {
        return Err(Error::InvalidState("mean particle number is zero".into()));
    }
    let report = collective_uncertainty_criterion(spin, state)?;
    Ok(1.0 - report.value / report.bound)
}

/// Ratio reached by one pulse on `|↑…↑>`.
pub fn pulse_ratio(chain: &ChainSpec, params: PulseParams) -> Result<f64> {
    let spin = spinchain::chain_spin(chain)?;
    violation_ratio(&spin, &pulsed_state(chain, params)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimizerConfig {
    /// Total objective evaluations across all restarts.
    pub budget: usize,
    pub seed: u64,
    pub restarts: usize,
    /// Initial simplex edge length.
    pub step: f64,
    /// Spread of restart points around the best point so far.
    pub restart_spread: f64,
}

impl OptimizerConfig {
    pub fn new(budget: usize, seed: u64) -> Self {
        Self {
            budget,
            seed,
            restarts: DEFAULT_RESTARTS,
            step: 0.5,
            restart_spread: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    pub iteration: usize,
    pub params: PulseParams,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationResult {
    pub params: PulseParams,
    pub ratio: f64,
    pub initial_ratio: f64,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
}

struct Objective<'a> {
    chain: &'a ChainSpec,
    evaluations: usize,
    budget: usize,
    best: (f64, [f64; 3]),
}

impl Objective<'_> {
    fn exhausted(&self) -> bool {
        self.evaluations >= self.budget
    }

    /// Negative ratio, to be minimized.
    fn eval(&mut self, x: [f64; 3]) -> Result<f64> {
        self.evaluations += 1;
        let ratio = pulse_ratio(self.chain, PulseParams::from_array(x)?)?;
        if ratio > self.best.0 {
            self.best = (ratio, x);
        }
        Ok(-ratio)
    }
}

/// Maximize the violation ratio of `U(params)|↑…↑>` starting at `initial`.
///
/// The initial point is always evaluated first, so the result never falls
/// below it. Identical configurations give identical results.
pub fn optimize_pulse(
    chain: &ChainSpec,
    initial: PulseParams,
    config: &OptimizerConfig,
) -> Result<OptimizationResult> {
    check_chain(chain)?;
    if config.budget < 1 {
        return Err(Error::invalid("optimizer budget must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut obj = Objective {
        chain,
        evaluations: 0,
        budget: config.budget,
        best: (f64::NEG_INFINITY, initial.to_array()),
    };
    obj.eval(initial.to_array())?;
    let initial_ratio = obj.best.0;
    let mut trace = vec![TraceEntry {
        iteration: 0,
        params: initial,
        ratio: initial_ratio,
    }];
    let mut iteration = 0;
    for restart in 0..=config.restarts {
        if obj.exhausted() {
            break;
        }
        let start = if restart == 0 {
            initial.to_array()
        } else {
            let centre = obj.best.1;
            std::array::from_fn(|i| {
                centre[i] + config.restart_spread * (2.0 * rng.random::<f64>() - 1.0)
            })
        };
        nelder_mead(&mut obj, start, config.step, |obj| {
            iteration += 1;
            let (ratio, x) = obj.best;
            trace.push(TraceEntry {
                iteration,
                params: PulseParams::from_array(x).expect("finite"),
                ratio,
            });
        })?;
    }
    let (ratio, x) = obj.best;
    Ok(OptimizationResult {
        params: PulseParams::from_array(x)?,
        ratio,
        initial_ratio,
        evaluations: obj.evaluations,
        trace,
    })
}

const SIMPLEX_TOL: f64 = 1e-10;

/// Standard Nelder–Mead (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
fn nelder_mead(
    obj: &mut Objective<'_>,
    start: [f64; 3],
    step: f64,
    mut on_iteration: impl FnMut(&Objective<'_>),
) -> Result<()> {
    const DIM: usize = 3;
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(DIM + 1);
    for i in 0..=DIM {
        if obj.exhausted() {
            return Ok(());
        }
        let mut x = start;
        if i > 0 {
            x[i - 1] += step;
        }
        let f = obj.eval(x)?;
        simplex.push((x, f));
    }
    let lerp = |a: [f64; 3], b: [f64; 3], t: f64| -> [f64; 3] {
        std::array::from_fn(|i| a[i] + t * (b[i] - a[i]))
    };
    while !obj.exhausted() {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[DIM].1 - simplex[0].1 < SIMPLEX_TOL {
            break;
        }
        let centroid: [f64; 3] = std::array::from_fn(|i| {
            simplex[..DIM].iter().map(|(x, _)| x[i]).sum::<f64>() / DIM as f64
        });
        let worst = simplex[DIM];
        let xr = lerp(centroid, worst.0, -1.0);
        let fr = obj.eval(xr)?;
        if fr < simplex[0].1 {
            if obj.exhausted() {
                simplex[DIM] = (xr, fr);
            } else {
                let xe = lerp(centroid, worst.0, -2.0);
                let fe = obj.eval(xe)?;
                simplex[DIM] = if fe < fr { (xe, fe) } else { (xr, fr) };
            }
        } else if fr < simplex[DIM - 1].1 {
            simplex[DIM] = (xr, fr);
        } else {
            if obj.exhausted() {
                break;
            }
            let (xc, fc) = if fr < worst.1 {
                let x = lerp(centroid, xr, 0.5);
                (x, obj.eval(x)?)
            } else {
                let x = lerp(centroid, worst.0, 0.5);
                (x, obj.eval(x)?)
            };
            if fc < worst.1.min(fr) {
                simplex[DIM] = (xc, fc);
            } else {
                let best = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    if obj.exhausted() {
                        break;
                    }
                    let x = lerp(best, v.0, 0.5);
                    *v = (x, obj.eval(x)?);
                }
            }
        }
        on_iteration(obj);
    }
    Ok(())
}

/// Re-evaluate a result from scratch; used to confirm the reported ratio.
pub fn reevaluate(chain: &ChainSpec, result: &OptimizationResult) -> Result<f64> {
    pulse_ratio(chain, result.params)
}

/// Maximum deviation of `U U†` from the identity, for diagnostics.
pub fn pulse_unitarity_error(chain: &ChainSpec, params: PulseParams) -> Result<f64> {
    let u = pulse_unitary(chain, params)?;
    Ok(crate::qcore::unitarity_error(&u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bosonic;
    use crate::qcore::CMatrix;
    use std::f64::consts::PI;

    fn chain(n: usize) -> ChainSpec {
        ChainSpec::new(n).unwrap()
    }

    #[test]
    fn zero_pulse_is_identity() {
        let u = pulse_unitary(&chain(4), PulseParams::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        assert!((u.matrix() - CMatrix::identity(16, 16)).norm() < 1e-14);
    }

    #[test]
    fn z_rotation_periodicity() {
        let u = pulse_unitary(&chain(3), PulseParams::new(0.0, 0.0, 4.0 * PI).unwrap()).unwrap();
        let phase = u.matrix()[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-12);
        assert!((u.matrix() - CMatrix::identity(8, 8) * phase).norm() < 1e-12);
    }

    #[test]
    fn reference_pulse_halves_the_bound() {
        let r = pulse_ratio(&chain(6), PulseParams::reference()).unwrap();
        assert!((r - 0.49266).abs() < 1e-4, "{r}");
    }

    #[test]
    fn ratio_examples() {
        let lat = bosonic::FockLatticeSpec::unit_cutoff(4).unwrap();
        let spin = bosonic::lattice_spin(&lat).unwrap();
        let singlet = bosonic::singlet_chain(2).unwrap();
        assert!((violation_ratio(&spin, &singlet).unwrap() - 1.0).abs() < 1e-12);
        let up = lat.product_state(&[(1, 0); 4]).unwrap();
        assert!(violation_ratio(&spin, &up).unwrap().abs() < 1e-12);
        let vacuum = lat.product_state(&[(0, 0); 4]).unwrap();
        assert!(violation_ratio(&spin, &vacuum).is_err());
    }

    #[test]
    fn optimizer_contract() {
        let ch = chain(4);
        let cfg = OptimizerConfig::new(60, 7);
        let a = optimize_pulse(&ch, PulseParams::new(0.0, 0.0, 0.0).unwrap(), &cfg).unwrap();
        assert!(a.ratio >= a.initial_ratio);
        assert!(a.evaluations <= 60);
        let b = optimize_pulse(&ch, PulseParams::new(0.0, 0.0, 0.0).unwrap(), &cfg).unwrap();
        assert_eq!(a, b);
        assert!((reevaluate(&ch, &a).unwrap() - a.ratio).abs() < 1e-10);
        assert!(
            optimize_pulse(&ch, PulseParams::reference(), &OptimizerConfig::new(0, 1)).is_err()
        );
    }

    #[test]
    fn budget_of_one_returns_initial() {
        let ch = chain(4);
        let r = optimize_pulse(&ch, PulseParams::reference(), &OptimizerConfig::new(1, 3)).unwrap();
        assert_eq!(r.params, PulseParams::reference());
        assert_eq!(r.ratio, r.initial_ratio);
    }

    #[test]
    fn generator_is_hermitian() {
        let h = pulse_generator(&chain(3), PulseParams::reference()).unwrap();
        assert!(h.is_hermitian());
        assert_eq!(h.n_terms(), 2 * 2 + 3);
    }
}
