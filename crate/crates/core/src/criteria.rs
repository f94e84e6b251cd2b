//! Separability criteria and moment comparisons.
//!
//! Every criterion returns a [`CriterionReport`]. A report is violated only
//! when the value is strictly past the bound by more than [`VIOLATION_TOL`];
//! saturation is never flagged.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::qcore::{
    anticommutator_expectation, c, expectation, matrix_exponential, moment, variance, Axis,
    CMatrix, CollectiveSpin, DensityMatrix, HilbertSpace, LinearCombination, PauliSum,
    QuantumState, C64,
};
use crate::spinchain::{self, ChainSpec};

pub const VIOLATION_TOL: f64 = 1e-9;
/// Moments closer than this are considered equal.
pub const INDISTINGUISHABLE_TOL: f64 = 1e-9;
/// Below this the spin-squeezing denominator is treated as zero.
pub const SQUEEZING_DENOMINATOR_TOL: f64 = 1e-12;
/// Orthogonality tolerance for direction triads.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Points per Euler angle in the orientation search.
pub const EULER_GRID: usize = 24;

/// Which side of the bound separable states lie on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// Separable states satisfy `value <= bound`.
    AtMost,
    /// Separable states satisfy `value >= bound`.
    AtLeast,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Evaluated,
    /// The criterion is not applicable to this state (e.g. zero denominator).
    Undefined,
}

/// Extra numbers attached to a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AuxValue {
    Real(#[serde(serialize_with = "finite_or_null")] f64),
    Int(i64),
    Flag(bool),
    Text(String),
    List(Vec<f64>),
}

fn finite_or_null<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub name: String,
    #[serde(serialize_with = "finite_or_null")]
    pub value: f64,
    pub bound: f64,
    pub sense: Sense,
    pub violated: bool,
    /// Signed distance past the bound; positive means on the entangled side.
    #[serde(serialize_with = "finite_or_null")]
    pub margin: f64,
    pub status: Status,
    pub aux: BTreeMap<String, AuxValue>,
}

impl CriterionReport {
    pub fn new(name: &str, value: f64, bound: f64, sense: Sense) -> Self {
        let margin = match sense {
            Sense::AtMost => value - bound,
            Sense::AtLeast => bound - value,
        };
        Self {
            name: name.to_string(),
            value,
            bound,
            sense,
            violated: margin > VIOLATION_TOL,
            margin,
            status: Status::Evaluated,
            aux: BTreeMap::new(),
        }
    }

    pub fn undefined(name: &str, bound: f64, sense: Sense, reason: &str) -> Self {
        let mut r = Self {
            name: name.to_string(),
            value: f64::NAN,
            bound,
            sense,
            violated: false,
            margin: f64::NAN,
            status: Status::Undefined,
            aux: BTreeMap::new(),
        };
        r.aux.insert("reason".into(), AuxValue::Text(reason.into()));
        r
    }

    pub fn with(mut self, key: &str, value: AuxValue) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }

    pub fn is_defined(&self) -> bool {
        self.status == Status::Evaluated
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rel = match self.sense {
            Sense::AtMost => "<=",
            Sense::AtLeast => ">=",
        };
        match self.status {
            Status::Undefined => write!(
                f,
                "{}: undefined (separable iff value {rel} {})",
                self.name, self.bound
            ),
            Status::Evaluated => write!(
                f,
                "{}: value {:.12} bound {:.12} ({}) margin {:+.3e}",
                self.name,
                self.value,
                self.bound,
                if self.violated {
                    "violated"
                } else {
                    "satisfied"
                },
                self.margin
            ),
        }
    }
}

/// Unit vector `(α_x, α_y, α_z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Direction([f64; 3]);

impl Direction {
    pub const X: Direction = Direction([1.0, 0.0, 0.0]);
    pub const Y: Direction = Direction([0.0, 1.0, 0.0]);
    pub const Z: Direction = Direction([0.0, 0.0, 1.0]);

    pub fn new(alpha: [f64; 3]) -> Result<Self> {
        let norm = norm3(alpha);
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "direction has norm {norm}, expected 1"
            )));
        }
        Ok(Self(alpha))
    }

    /// Normalize an arbitrary nonzero vector.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let norm = norm3(v);
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::invalid("cannot normalize a zero vector"));
        }
        Ok(Self([v[0] / norm, v[1] / norm, v[2] / norm]))
    }

    /// Polar angle `theta` from z, azimuth `phi` from x.
    pub fn spherical(theta: f64, phi: f64) -> Self {
        Self([
            theta.sin() * phi.cos(),
            theta.sin() * phi.sin(),
            theta.cos(),
        ])
    }

    pub fn axis(axis: Axis) -> Self {
        match axis {
            Axis::X => Self::X,
            Axis::Y => Self::Y,
            Axis::Z => Self::Z,
        }
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn label(&self) -> String {
        for axis in Axis::ALL {
            if *self == Self::axis(axis) {
                return axis.label().to_string();
            }
        }
        format!("({:.6},{:.6},{:.6})", self.0[0], self.0[1], self.0[2])
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Columns of the z-y-z Euler rotation `R_z(a) R_y(b) R_z(g)`.
pub fn euler_triad(a: f64, b: f64, g: f64) -> [Direction; 3] {
    let (sa, ca) = a.sin_cos();
    let (sb, cb) = b.sin_cos();
    let (sg, cg) = g.sin_cos();
    let r = [
        [ca * cb * cg - sa * sg, -ca * cb * sg - sa * cg, ca * sb],
        [sa * cb * cg + ca * sg, -sa * cb * sg + ca * cg, sa * sb],
        [-sb * cg, sb * sg, cb],
    ];
    let col = |j: usize| Direction([r[0][j], r[1][j], r[2][j]]);
    [col(0), col(1), col(2)]
}

/// All triads on the uniform Euler grid (`EULER_GRID`³ points).
pub fn euler_grid() -> impl Iterator<Item = [Direction; 3]> {
    let step = |i: usize, span: f64| span * i as f64 / EULER_GRID as f64;
    (0..EULER_GRID).flat_map(move |i| {
        (0..EULER_GRID).flat_map(move |j| {
            (0..EULER_GRID)
                .map(move |k| euler_triad(step(i, 2.0 * PI), step(j, PI), step(k, 2.0 * PI)))
        })
    })
}

fn require_even_chain<S: QuantumState + ?Sized>(state: &S) -> Result<ChainSpec> {
    let space = state.space();
    if !space.is_qubit_chain() {
        return Err(Error::NotQubitChain(space.dims().to_vec()));
    }
    ChainSpec::even(space.n_sites())
}

fn correlator_means<S: QuantumState + ?Sized>(chain: &ChainSpec, state: &S) -> Result<Vec<f64>> {
    spinchain::tilde_sigma_x_all(chain)?
        .iter()
        .map(|t| expectation(t, state))
        .collect()
}

/// `Σ_k <σ̃x(k)>`, separable states satisfy `<= N/2`.
pub fn witness_criterion<S: QuantumState + ?Sized>(state: &S) -> Result<CriterionReport> {
    let chain = require_even_chain(state)?;
    let n = chain.n_sites();
    let means = correlator_means(&chain, state)?;
    let value: f64 = means.iter().sum();
    Ok(
        CriterionReport::new("witness", value, n as f64 / 2.0, Sense::AtMost)
            .with("quadruplets", AuxValue::Real(quadruplet_bound(value, n)?))
            .with("correlators", AuxValue::List(means)),
    )
}

/// Lower bound `J/2 - N/4` on the number of non-overlapping entangled
/// quadruplets, clipped at zero.
pub fn quadruplet_bound(witness_value: f64, n_sites: usize) -> Result<f64> {
    if !n_sites.is_multiple_of(2) {
        return Err(Error::OddChain(n_sites));
    }
    Ok((witness_value / 2.0 - n_sites as f64 / 4.0).max(0.0))
}

/// `Σ_k <σ̃x(k)>²`, separable states satisfy `<= N/2`.
pub fn squared_criterion<S: QuantumState + ?Sized>(state: &S) -> Result<CriterionReport> {
    let chain = require_even_chain(state)?;
    let means = correlator_means(&chain, state)?;
    let value = means.iter().map(|m| m * m).sum();
    Ok(CriterionReport::new(
        "squared",
        value,
        chain.n_sites() as f64 / 2.0,
        Sense::AtMost,
    )
    .with("correlators", AuxValue::List(means)))
}

/// `X_m = Σ_{k ≡ m mod 3} σ̃x(k)` for `m = 1, 2, 3`.
pub fn correlator_classes(chain: &ChainSpec) -> Result<[PauliSum; 3]> {
    let n = chain.n_sites();
    let mut classes = [PauliSum::zero(n)?, PauliSum::zero(n)?, PauliSum::zero(n)?];
    for (k, t) in (1..=n).zip(spinchain::tilde_sigma_x_all(chain)?) {
        let m = (k + 2) % 3;
        classes[m] = classes[m].add(&t)?;
    }
    Ok(classes)
}

/// `Σ_m Var(X_m)`, separable states satisfy `>= N/2`.
pub fn variance_x_criterion<S: QuantumState + ?Sized>(state: &S) -> Result<CriterionReport> {
    let chain = require_even_chain(state)?;
    let vars = correlator_classes(&chain)?
        .iter()
        .map(|x| variance(x, state))
        .collect::<Result<Vec<_>>>()?;
    let value = vars.iter().sum();
    Ok(CriterionReport::new(
        "variance_x",
        value,
        chain.n_sites() as f64 / 2.0,
        Sense::AtLeast,
    )
    .with("class_variances", AuxValue::List(vars)))
}

/// `Var(J_x) + Var(J_y) + Var(J_z)`, separable states satisfy `>= <N>/2`.
pub fn collective_uncertainty_criterion<O, S>(
    spin: &CollectiveSpin<O>,
    state: &S,
) -> Result<CriterionReport>
where
    O: LinearCombination,
    S: QuantumState + ?Sized,
{
    let vars = Axis::ALL
        .iter()
        .map(|&a| variance(spin.axis(a), state))
        .collect::<Result<Vec<_>>>()?;
    let number = expectation(&spin.number, state)?;
    let value = vars.iter().sum();
    Ok(CriterionReport::new(
        "collective_uncertainty",
        value,
        number / 2.0,
        Sense::AtLeast,
    )
    .with("variances", AuxValue::List(vars))
    .with("mean_number", AuxValue::Real(number)))
}

fn check_triad(n: &[Direction; 3]) -> Result<()> {
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let d = n[i].dot(&n[j]);
        if d.abs() > ORTHOGONALITY_TOL {
            return Err(Error::invalid(format!(
                "directions {} and {} are not orthogonal (dot {d:.3e})",
                i + 1,
                j + 1
            )));
        }
    }
    Ok(())
}

/// `<N> Var(J_n1) / (<J_n2>² + <J_n3>²)`, separable states satisfy `>= 1`.
/// Undefined when the denominator vanishes.
pub fn spin_squeezing_criterion<O, S>(
    spin: &CollectiveSpin<O>,
    state: &S,
    n1: Direction,
    n2: Direction,
    n3: Direction,
) -> Result<CriterionReport>
where
    O: LinearCombination,
    S: QuantumState + ?Sized,
{
    check_triad(&[n1, n2, n3])?;
    let number = expectation(&spin.number, state)?;
    let var = variance(&spin.along(n1.components())?, state)?;
    let m2 = expectation(&spin.along(n2.components())?, state)?;
    let m3 = expectation(&spin.along(n3.components())?, state)?;
    let denom = m2 * m2 + m3 * m3;
    let name = "spin_squeezing";
    let report = if denom < SQUEEZING_DENOMINATOR_TOL {
        CriterionReport::undefined(
            name,
            1.0,
            Sense::AtLeast,
            "mean spin vanishes; criterion cannot detect",
        )
    } else {
        CriterionReport::new(name, number * var / denom, 1.0, Sense::AtLeast)
    };
    Ok(report
        .with("variance_n1", AuxValue::Real(var))
        .with("denominator", AuxValue::Real(denom))
        .with("mean_number", AuxValue::Real(number)))
}

/// Spin squeezing minimized over the Euler orientation grid. Undefined when the
/// denominator vanishes for every orientation.
pub fn best_spin_squeezing<O, S>(spin: &CollectiveSpin<O>, state: &S) -> Result<CriterionReport>
where
    O: LinearCombination,
    S: QuantumState + ?Sized,
{
    // Means and second moments of the three components determine every
    // orientation, so evaluate them once.
    let mean: Vec<f64> = Axis::ALL
        .iter()
        .map(|&a| expectation(spin.axis(a), state))
        .collect::<Result<_>>()?;
    let sec = anticommutator_moments(spin, state)?;
    let number = expectation(&spin.number, state)?;
    let mut best: Option<(f64, [Direction; 3])> = None;
    let mut any_defined = false;
    for triad in euler_grid() {
        let [n1, n2, n3] = triad;
        let a = n1.components();
        let mean1: f64 = (0..3).map(|i| a[i] * mean[i]).sum();
        let second: f64 = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .map(|(i, j)| a[i] * a[j] * sec[i][j] / 2.0)
            .sum();
        let var = (second - mean1 * mean1).max(0.0);
        let proj = |d: Direction| -> f64 { (0..3).map(|i| d.components()[i] * mean[i]).sum() };
        let denom = proj(n2).powi(2) + proj(n3).powi(2);
        if denom < SQUEEZING_DENOMINATOR_TOL {
            continue;
        }
        any_defined = true;
        let value = number * var / denom;
        if best.as_ref().is_none_or(|(b, _)| value < *b) {
            best = Some((value, triad));
        }
    }
    match best {
        Some((_, [n1, n2, n3])) if any_defined => {
            let report = spin_squeezing_criterion(spin, state, n1, n2, n3)?;
            Ok(report.with("n1", AuxValue::List(n1.components().to_vec())))
        }
        _ => Ok(CriterionReport::undefined(
            "spin_squeezing",
            1.0,
            Sense::AtLeast,
            "mean spin vanishes for every orientation; criterion cannot detect",
        )),
    }
}

/// `<(n·J)^m>`.
pub fn angular_moment<O, S>(
    spin: &CollectiveSpin<O>,
    state: &S,
    n: Direction,
    m: u32,
) -> Result<f64>
where
    O: LinearCombination,
    S: QuantumState + ?Sized,
{
    if m < 1 {
        return Err(Error::invalid("moment order must be at least 1"));
    }
    moment(&spin.along(n.components())?, state, m)
}

/// `A_kl = <J_k J_l + J_l J_k>` for `k, l ∈ {x, y, z}`.
pub fn anticommutator_moments<O, S>(spin: &CollectiveSpin<O>, state: &S) -> Result<[[f64; 3]; 3]>
where
    O: LinearCombination,
    S: QuantumState + ?Sized,
{
    let mut a = [[0.0; 3]; 3];
    for (i, &k) in Axis::ALL.iter().enumerate() {
        for (j, &l) in Axis::ALL.iter().enumerate().skip(i) {
            let v = anticommutator_expectation(spin.axis(k), spin.axis(l), state)?;
            a[i][j] = v;
            a[j][i] = v;
        }
    }
    Ok(a)
}

/// `I / 2^N` on the qubit chain.
pub fn totally_mixed_state(n_sites: usize) -> Result<DensityMatrix> {
    Ok(DensityMatrix::maximally_mixed(HilbertSpace::qubits(
        n_sites,
    )?))
}

fn block_state(kets: &[[usize; 2]], amps: &[[C64; 2]; 2]) -> Result<DensityMatrix> {
    // Equal mixture of the two-qubit product kets built from `amps` rows.
    let space = HilbertSpace::qubits(2)?;
    let mut m = CMatrix::zeros(4, 4);
    for k in kets {
        let a = &amps[k[0]];
        let b = &amps[k[1]];
        let v: Vec<C64> = (0..4).map(|i| a[i >> 1] * b[i & 1]).collect();
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += v[i] * v[j].conj() / c(kets.len() as f64, 0.0);
            }
        }
    }
    DensityMatrix::new(space, m)
}

/// A separable state whose first and second collective moments match those of
/// the cluster state:
/// `e^{iπJ_y/4} [(|++><++| + |--><--|)/2 ⊗ (|↑↓><↑↓| + |↓↑><↓↑|)/2 ⊗ I/2^{N-4}] e^{-iπJ_y/4}`.
pub fn moment_matching_separable_state(n_sites: usize) -> Result<DensityMatrix> {
    if n_sites < 4 {
        return Err(Error::invalid(
            "moment-matching state needs at least 4 sites",
        ));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let x_basis = [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]];
    let z_basis = [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]];
    let aligned = block_state(&[[0, 0], [1, 1]], &x_basis)?;
    let anti = block_state(&[[0, 1], [1, 0]], &z_basis)?;
    let mut rho = aligned.tensor(&anti)?;
    if n_sites > 4 {
        rho = rho.tensor(&totally_mixed_state(n_sites - 4)?)?;
    }
    let jy = spinchain::collective_spin(&ChainSpec::new(n_sites)?, Axis::Y)?;
    let u = matrix_exponential(&jy, c(0.0, PI / 4.0))?;
    rho.conjugate(&u)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEntry {
    pub axis: String,
    pub direction: Direction,
    pub order: u32,
    pub value_a: f64,
    pub value_b: f64,
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentComparison {
    pub entries: Vec<MomentEntry>,
    pub max_difference: f64,
    pub indistinguishable: bool,
}

impl MomentComparison {
    /// First entry (axis-major, then order) that differs.
    pub fn first_difference(&self) -> Option<&MomentEntry> {
        self.entries
            .iter()
            .find(|e| e.difference >= INDISTINGUISHABLE_TOL)
    }
}

/// `|<J_n^m>_A - <J_n^m>_B|` for each axis and `1 <= m <= max_order`.
pub fn moment_indistinguishability<O, A, B>(
    spin: &CollectiveSpin<O>,
    a: &A,
    b: &B,
    axes: &[Direction],
    max_order: u32,
) -> Result<MomentComparison>
where
    O: LinearCombination,
    A: QuantumState + ?Sized,
    B: QuantumState + ?Sized,
{
    if a.n_sites() != b.n_sites() {
        return Err(Error::DimensionMismatch {
            expected: a.n_sites(),
            found: b.n_sites(),
        });
    }
    let mut entries = Vec::new();
    for &dir in axes {
        let op = spin.along(dir.components())?;
        for m in 1..=max_order {
            let value_a = moment(&op, a, m)?;
            let value_b = moment(&op, b, m)?;
            entries.push(MomentEntry {
                axis: dir.label(),
                direction: dir,
                order: m,
                value_a,
                value_b,
                difference: (value_a - value_b).abs(),
            });
        }
    }
    let max_difference = entries.iter().map(|e| e.difference).fold(0.0, f64::max);
    Ok(MomentComparison {
        indistinguishable: max_difference < INDISTINGUISHABLE_TOL,
        max_difference,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{negativity, PureState};
    use crate::spinchain::{
        cluster_state, saturating_product_state, uniform_product_state, ClusterSpec, Sign,
    };

    fn chain(n: usize) -> ChainSpec {
        ChainSpec::new(n).unwrap()
    }

    fn cluster(n: usize) -> PureState {
        cluster_state(&ClusterSpec::uniform(chain(n))).unwrap()
    }

    #[test]
    fn report_margin_and_strictness() {
        let r = CriterionReport::new("t", 3.0, 3.0, Sense::AtMost);
        assert!(!r.violated);
        let r = CriterionReport::new("t", 3.0 + 2e-9, 3.0, Sense::AtMost);
        assert!(r.violated);
        let r = CriterionReport::new("t", 1.0, 3.0, Sense::AtLeast);
        assert!(r.violated && (r.margin - 2.0).abs() < 1e-15);
    }

    #[test]
    fn report_serializes_undefined_as_null() {
        let r = CriterionReport::undefined("s", 1.0, Sense::AtLeast, "zero");
        let json = serde_json::to_value(&r).unwrap();
        assert!(json["value"].is_null());
        assert_eq!(json["violated"], false);
    }

    #[test]
    fn witness_examples() {
        let r = witness_criterion(&cluster(6)).unwrap();
        assert!((r.value - 6.0).abs() < 1e-10 && r.bound == 3.0 && r.violated);
        let r = witness_criterion(&saturating_product_state(&chain(6)).unwrap()).unwrap();
        assert!((r.value - 3.0).abs() < 1e-12 && !r.violated);
        let r = witness_criterion(&uniform_product_state(&chain(6), Axis::Z, Sign::Plus).unwrap())
            .unwrap();
        assert!(r.value.abs() < 1e-12 && !r.violated);
        assert!(matches!(
            witness_criterion(&cluster(5)),
            Err(Error::OddChain(5))
        ));
    }

    #[test]
    fn quadruplet_examples() {
        assert_eq!(quadruplet_bound(8.0, 8).unwrap(), 2.0);
        assert_eq!(quadruplet_bound(4.0, 8).unwrap(), 0.0);
        assert_eq!(quadruplet_bound(5.0, 8).unwrap(), 0.5);
        assert_eq!(quadruplet_bound(1.0, 8).unwrap(), 0.0);
        assert!(quadruplet_bound(1.0, 7).is_err());
    }

    #[test]
    fn squared_examples() {
        for lambdas in [vec![1, 1, 1, 1], vec![-1, 1, -1, -1], vec![1, -1, 1, -1]] {
            let spec = ClusterSpec::new(chain(4), lambdas).unwrap();
            let r = squared_criterion(&cluster_state(&spec).unwrap()).unwrap();
            assert!((r.value - 4.0).abs() < 1e-10 && r.violated);
        }
        let r = squared_criterion(&saturating_product_state(&chain(4)).unwrap()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12 && !r.violated);
        let r = squared_criterion(&totally_mixed_state(4).unwrap()).unwrap();
        assert!(r.value.abs() < 1e-14);
    }

    #[test]
    fn variance_examples() {
        let r = variance_x_criterion(&cluster(6)).unwrap();
        assert!(r.value.abs() < 1e-10 && r.violated);
        let r = variance_x_criterion(&saturating_product_state(&chain(6)).unwrap()).unwrap();
        assert!(r.value >= 3.0 - 1e-12 && !r.violated);
        let r = variance_x_criterion(&totally_mixed_state(6).unwrap()).unwrap();
        assert!((r.value - 6.0).abs() < 1e-12 && !r.violated);
    }

    #[test]
    fn classes_partition_sites() {
        let classes = correlator_classes(&chain(7)).unwrap();
        let sizes: Vec<usize> = classes.iter().map(|c| c.n_terms()).collect();
        assert_eq!(sizes, vec![3, 2, 2]);
    }

    #[test]
    fn uncertainty_on_qubit_chains() {
        let spin = spinchain::chain_spin(&chain(4)).unwrap();
        let up = uniform_product_state(&chain(4), Axis::Z, Sign::Plus).unwrap();
        let r = collective_uncertainty_criterion(&spin, &up).unwrap();
        assert!((r.value - 2.0).abs() < 1e-12 && (r.bound - 2.0).abs() < 1e-12 && !r.violated);
    }

    #[test]
    fn squeezing_examples() {
        let spin = spinchain::chain_spin(&chain(4)).unwrap();
        let r =
            spin_squeezing_criterion(&spin, &cluster(4), Direction::X, Direction::Y, Direction::Z)
                .unwrap();
        assert_eq!(r.status, Status::Undefined);
        assert!(!r.violated);
        let up = uniform_product_state(&chain(4), Axis::Z, Sign::Plus).unwrap();
        let r =
            spin_squeezing_criterion(&spin, &up, Direction::X, Direction::Z, Direction::Y).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12 && !r.violated);
        let bad = Direction::normalized([1.0, 1.0, 0.0]).unwrap();
        assert!(spin_squeezing_criterion(&spin, &up, Direction::X, bad, Direction::Z).is_err());
        let best = best_spin_squeezing(&spin, &cluster(4)).unwrap();
        assert_eq!(best.status, Status::Undefined);
        let best = best_spin_squeezing(&spin, &up).unwrap();
        assert!((best.value - 1.0).abs() < 1e-9 && !best.violated);
    }

    #[test]
    fn euler_triads_are_orthonormal() {
        for t in euler_grid().step_by(97) {
            check_triad(&t).unwrap();
            for d in t {
                assert!((norm3(d.components()) - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(euler_grid().count(), EULER_GRID.pow(3));
    }

    #[test]
    fn totally_mixed_moments() {
        let n = 9;
        let rho = totally_mixed_state(n).unwrap();
        let spin = spinchain::chain_spin(&chain(n)).unwrap();
        let m2 = angular_moment(&spin, &rho, Direction::Z, 2).unwrap();
        let m4 = angular_moment(&spin, &rho, Direction::Z, 4).unwrap();
        assert!((m2 - 9.0 / 4.0).abs() < 1e-12);
        assert!((m4 - 9.0 * 25.0 / 16.0).abs() < 1e-11);
        assert!((rho.trace() - 1.0).abs() < 1e-14);
        assert!(angular_moment(&spin, &rho, Direction::Z, 0).is_err());
    }

    #[test]
    fn cluster_anticommutators() {
        let spin = spinchain::chain_spin(&chain(4)).unwrap();
        let a = anticommutator_moments(&spin, &cluster(4)).unwrap();
        assert!(a[0][1].abs() < 1e-10 && a[1][2].abs() < 1e-10);
        assert!((a[0][2] - 1.0).abs() < 1e-10);
        for (i, row) in a.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert!((v - a[j][i]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn moment_matching_state_matches_cluster() {
        let n = 4;
        let spin = spinchain::chain_spin(&chain(n)).unwrap();
        let rho = moment_matching_separable_state(n).unwrap();
        rho.check_valid().unwrap();
        let cl = cluster(n);
        let a = anticommutator_moments(&spin, &rho).unwrap();
        let b = anticommutator_moments(&spin, &cl).unwrap();
        for i in 0..3 {
            assert!(expectation(spin.axis(Axis::ALL[i]), &rho).unwrap().abs() < 1e-12);
            for j in 0..3 {
                assert!(
                    (a[i][j] - b[i][j]).abs() < 1e-9,
                    "A[{i}][{j}] {} vs {}",
                    a[i][j],
                    b[i][j]
                );
            }
        }
        for mask in 1..(1 << (n - 1)) {
            let part: Vec<usize> = (1..=n).filter(|k| mask >> (k - 1) & 1 == 1).collect();
            assert!(negativity(&rho, &part).unwrap() < 1e-9);
        }
        assert!(moment_matching_separable_state(3).is_err());
    }

    #[test]
    fn indistinguishability_examples() {
        let n = 4;
        let spin = spinchain::chain_spin(&chain(n)).unwrap();
        let cl = cluster(n);
        let axes = [Direction::X, Direction::Y, Direction::Z];
        // Four sites already match the totally mixed state on every axis moment.
        let cmp =
            moment_indistinguishability(&spin, &cl, &totally_mixed_state(n).unwrap(), &axes, 4)
                .unwrap();
        assert!(cmp.indistinguishable);

        // Seven sites differ first at the fourth moment along x: 157/16 vs 133/16.
        let spin7 = spinchain::chain_spin(&chain(7)).unwrap();
        let cmp = moment_indistinguishability(
            &spin7,
            &cluster(7),
            &totally_mixed_state(7).unwrap(),
            &axes,
            4,
        )
        .unwrap();
        let first = cmp.first_difference().unwrap();
        assert_eq!((first.axis.as_str(), first.order), ("x", 4));
        assert!((first.value_a - 157.0 / 16.0).abs() < 1e-10);
        assert!((first.value_b - 133.0 / 16.0).abs() < 1e-10);
        let same = moment_indistinguishability(&spin, &cl, &cl, &axes, 4).unwrap();
        assert!(same.indistinguishable && same.max_difference == 0.0);
        let other = totally_mixed_state(6).unwrap();
        assert!(moment_indistinguishability(&spin, &cl, &other, &axes, 2).is_err());
    }
}
