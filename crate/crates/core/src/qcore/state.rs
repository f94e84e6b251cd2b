use super::linalg::hermitian_eigen;
use super::operator::{hermiticity_error, CMatrix, CVector, LinearOperator, Observable, C64};
use super::space::HilbertSpace;
use crate::error::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
/// Largest imaginary residue tolerated in the expectation of a Hermitian operator.
pub const IMAG_TOL: f64 = 1e-10;

fn check_finite<'a>(it: impl IntoIterator<Item = &'a C64>) -> Result<()> {
    if it
        .into_iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        Err(Error::InvalidState("non-finite amplitude".into()))
    } else {
        Ok(())
    }
}

/// Normalized state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    space: HilbertSpace,
    amps: CVector,
}

impl PureState {
    /// Accepts amplitudes whose norm is 1 within 1e-12.
    pub fn new(space: HilbertSpace, amps: CVector) -> Result<Self> {
        Self::check_len(&space, &amps)?;
        check_finite(amps.iter())?;
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { space, amps })
    }

    /// Normalizes the given amplitudes; fails on a (numerically) zero vector.
    pub fn normalized(space: HilbertSpace, amps: CVector) -> Result<Self> {
        Self::check_len(&space, &amps)?;
        check_finite(amps.iter())?;
        let norm = amps.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Ok(Self {
            space,
            amps: amps / C64::new(norm, 0.0),
        })
    }

    fn check_len(space: &HilbertSpace, amps: &CVector) -> Result<()> {
        if amps.len() != space.dim() {
            Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amps.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Computational basis state with the given per-site digits.
    pub fn basis(space: HilbertSpace, digits: &[usize]) -> Result<Self> {
        let idx = space.index_of(digits)?;
        let mut amps = CVector::zeros(space.dim());
        amps[idx] = C64::new(1.0, 0.0);
        Ok(Self { space, amps })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn n_sites(&self) -> usize {
        self.space.n_sites()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        self.space.same_as(&other.space)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|<self|other>|^2`; insensitive to global phase.
    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        Ok(Self {
            space: self.space.concat(&other.space)?,
            amps: self.amps.kronecker(&other.amps),
        })
    }

    /// Apply an operator that is expected to preserve the norm (within 1e-10).
    pub fn apply_unitary(&self, u: &impl Observable) -> Result<PureState> {
        self.space.same_as(u.space())?;
        let out = u.apply_vec(&self.amps);
        let norm = out.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::Numerical(format!("norm drifted to {norm}")));
        }
        Ok(Self {
            space: self.space.clone(),
            amps: out / C64::new(norm, 0.0),
        })
    }

    /// Apply an arbitrary operator and renormalize the image.
    pub fn project(&self, op: &impl Observable) -> Result<PureState> {
        self.space.same_as(op.space())?;
        Self::normalized(self.space.clone(), op.apply_vec(&self.amps))
    }

    pub fn to_density(&self) -> DensityMatrix {
        let m = &self.amps * self.amps.adjoint();
        DensityMatrix::from_parts(self.space.clone(), m)
    }

    /// Lift a vector given on a subset of basis indices into `space`.
    pub fn lift(space: HilbertSpace, indices: &[usize], sub: &CVector) -> Result<PureState> {
        if indices.len() != sub.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                found: sub.len(),
            });
        }
        let mut amps = CVector::zeros(space.dim());
        for (&i, &a) in indices.iter().zip(sub.iter()) {
            if i >= amps.len() {
                return Err(Error::invalid("basis index out of range"));
            }
            amps[i] = a;
        }
        Self::new(space, amps)
    }
}

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Fully validated constructor (Hermiticity, trace, and spectrum).
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let rho = Self { space, matrix };
        rho.check_valid()?;
        Ok(rho)
    }

    /// For maps that preserve validity by construction (CPTP maps, partial
    /// traces, convex mixtures). Validity is still asserted in debug builds
    /// for cheap invariants.
    pub(crate) fn from_parts(space: HilbertSpace, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), space.dim());
        Self { space, matrix }
    }

    pub fn maximally_mixed(space: HilbertSpace) -> Self {
        let d = space.dim();
        let m = CMatrix::identity(d, d) / C64::new(d as f64, 0.0);
        Self::from_parts(space, m)
    }

    /// Convex mixture; weights must be nonnegative and are normalized.
    pub fn mixture(weights: &[f64], states: &[DensityMatrix]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::invalid("mixture needs one weight per state"));
        }
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::invalid("mixture weights must be nonnegative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::invalid("mixture weights sum to zero"));
        }
        let space = states[0].space.clone();
        let d = space.dim();
        let mut m = CMatrix::zeros(d, d);
        for (w, s) in weights.iter().zip(states) {
            space.same_as(&s.space)?;
            m += &s.matrix * C64::new(w / total, 0.0);
        }
        Ok(Self::from_parts(space, m))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn n_sites(&self) -> usize {
        self.space.n_sites()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Hermiticity within 1e-12, trace 1 within 1e-12, eigenvalues >= -1e-10.
    pub fn check_valid(&self) -> Result<()> {
        let d = self.space.dim();
        if self.matrix.nrows() != d || self.matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: self.matrix.nrows(),
            });
        }
        check_finite(self.matrix.iter())?;
        let herm = hermiticity_error(&self.matrix);
        if herm > 1e-12 {
            return Err(Error::InvalidState(format!("not Hermitian ({herm:.3e})")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min = self.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let (vals, _) = hermitian_eigen(&self.matrix);
        vals.first().copied().unwrap_or(0.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(Self::from_parts(
            self.space.concat(&other.space)?,
            self.matrix.kronecker(&other.matrix),
        ))
    }

    /// `U rho U^dagger` for a unitary `U`; diagonal `U` uses an O(d^2) path.
    pub fn conjugate(&self, u: &LinearOperator) -> Result<DensityMatrix> {
        self.space.same_as(u.space())?;
        let m = if u.is_diagonal() {
            let diag = u.matrix().diagonal();
            CMatrix::from_fn(self.matrix.nrows(), self.matrix.ncols(), |i, j| {
                diag[i] * self.matrix[(i, j)] * diag[j].conj()
            })
        } else {
            u.matrix() * &self.matrix * u.matrix().adjoint()
        };
        Ok(Self::from_parts(self.space.clone(), m))
    }

    /// Replace the matrix after a trace-preserving map computed elsewhere in the crate.
    pub(crate) fn with_matrix(&self, matrix: CMatrix) -> DensityMatrix {
        Self::from_parts(self.space.clone(), matrix)
    }

    /// Renormalize to unit trace (after a projection); fails on zero trace.
    pub(crate) fn renormalized(space: HilbertSpace, matrix: CMatrix) -> Result<DensityMatrix> {
        let tr = matrix.trace().re;
        if tr <= 1e-14 {
            return Err(Error::InvalidState(
                "projection has zero probability".into(),
            ));
        }
        Ok(Self::from_parts(space, matrix / C64::new(tr, 0.0)))
    }

    /// Frobenius distance.
    pub fn distance(&self, other: &DensityMatrix) -> Result<f64> {
        self.space.same_as(&other.space)?;
        Ok((&self.matrix - &other.matrix).norm())
    }
}

/// State kinds that expectation values can be taken against.
pub trait QuantumState {
    fn space(&self) -> &HilbertSpace;

    /// `<O>` with no Hermiticity requirement.
    fn expect_raw<O: Observable + ?Sized>(&self, op: &O) -> C64;

    /// `<A B>`.
    fn expect_product<O: Observable + ?Sized>(&self, a: &O, b: &O) -> C64;

    /// `<O^m>`.
    fn expect_power<O: Observable + ?Sized>(&self, op: &O, m: u32) -> C64;

    fn density(&self) -> DensityMatrix;

    fn n_sites(&self) -> usize {
        self.space().n_sites()
    }
}

impl QuantumState for PureState {
    fn space(&self) -> &HilbertSpace {
        &self.space
    }

    fn expect_raw<O: Observable + ?Sized>(&self, op: &O) -> C64 {
        self.amps.dotc(&op.apply_vec(&self.amps))
    }

    fn expect_product<O: Observable + ?Sized>(&self, a: &O, b: &O) -> C64 {
        self.amps.dotc(&a.apply_vec(&b.apply_vec(&self.amps)))
    }

    fn expect_power<O: Observable + ?Sized>(&self, op: &O, m: u32) -> C64 {
        let mut v = self.amps.clone();
        for _ in 0..m {
            v = op.apply_vec(&v);
        }
        self.amps.dotc(&v)
    }

    fn density(&self) -> DensityMatrix {
        self.to_density()
    }
}

impl QuantumState for DensityMatrix {
    fn space(&self) -> &HilbertSpace {
        &self.space
    }

    fn expect_raw<O: Observable + ?Sized>(&self, op: &O) -> C64 {
        op.trace_with(&self.matrix)
    }

    fn expect_product<O: Observable + ?Sized>(&self, a: &O, b: &O) -> C64 {
        a.trace_with(&b.apply_mat(&self.matrix))
    }

    fn expect_power<O: Observable + ?Sized>(&self, op: &O, m: u32) -> C64 {
        if m == 0 {
            return self.matrix.trace();
        }
        let mut acc = self.matrix.clone();
        for _ in 0..m - 1 {
            acc = op.apply_mat(&acc);
        }
        op.trace_with(&acc)
    }

    fn density(&self) -> DensityMatrix {
        self.clone()
    }
}

/// The state `I/d`, kept implicit so large chains never allocate a `d x d`
/// matrix. Expectations are normalized traces.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximallyMixed {
    space: HilbertSpace,
}

impl MaximallyMixed {
    pub fn new(space: HilbertSpace) -> Self {
        Self { space }
    }

    fn basis_average(&self, f: impl Fn(&CVector) -> CVector) -> C64 {
        let d = self.space.dim();
        let mut e = CVector::zeros(d);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            e[i] = C64::new(1.0, 0.0);
            acc += f(&e)[i];
            e[i] = C64::new(0.0, 0.0);
        }
        acc / d as f64
    }
}

impl QuantumState for MaximallyMixed {
    fn space(&self) -> &HilbertSpace {
        &self.space
    }

    fn expect_raw<O: Observable + ?Sized>(&self, op: &O) -> C64 {
        op.trace() / self.space.dim() as f64
    }

    fn expect_product<O: Observable + ?Sized>(&self, a: &O, b: &O) -> C64 {
        self.basis_average(|e| a.apply_vec(&b.apply_vec(e)))
    }

    fn expect_power<O: Observable + ?Sized>(&self, op: &O, m: u32) -> C64 {
        match m {
            0 => C64::new(1.0, 0.0),
            1 => self.expect_raw(op),
            _ => self.basis_average(|e| {
                let mut v = op.apply_vec(e);
                for _ in 1..m {
                    v = op.apply_vec(&v);
                }
                v
            }),
        }
    }

    fn density(&self) -> DensityMatrix {
        DensityMatrix::maximally_mixed(self.space.clone())
    }
}

fn real_part(z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "expectation of a Hermitian operator has imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

fn check_hermitian_on<O: Observable + ?Sized, S: QuantumState + ?Sized>(
    op: &O,
    state: &S,
) -> Result<()> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian(f64::NAN));
    }
    state.space().same_as(op.space())
}

/// `<op>` for a Hermitian operator.
pub fn expectation<O, S>(op: &O, state: &S) -> Result<f64>
where
    O: Observable + ?Sized,
    S: QuantumState + ?Sized,
{
    check_hermitian_on(op, state)?;
    real_part(state.expect_raw(op))
}

/// `<op^2> - <op>^2`, clamped at zero when within -1e-10.
pub fn variance<O, S>(op: &O, state: &S) -> Result<f64>
where
    O: Observable + ?Sized,
    S: QuantumState + ?Sized,
{
    let mean = expectation(op, state)?;
    let second = real_part(state.expect_power(op, 2))?;
    let var = second - mean * mean;
    if var < 0.0 {
        if var < -PSD_TOL * second.abs().max(1.0) {
            return Err(Error::Numerical(format!("negative variance {var:.3e}")));
        }
        return Ok(0.0);
    }
    Ok(var)
}

/// `<op^m>` for a Hermitian operator.
pub fn moment<O, S>(op: &O, state: &S, m: u32) -> Result<f64>
where
    O: Observable + ?Sized,
    S: QuantumState + ?Sized,
{
    check_hermitian_on(op, state)?;
    real_part(state.expect_power(op, m))
}

/// `<A B + B A>` for Hermitian `A`, `B`.
pub fn anticommutator_expectation<O, S>(a: &O, b: &O, state: &S) -> Result<f64>
where
    O: Observable + ?Sized,
    S: QuantumState + ?Sized,
{
    check_hermitian_on(a, state)?;
    check_hermitian_on(b, state)?;
    // <AB + BA> = 2 Re<AB> when A, B are Hermitian.
    Ok(2.0 * state.expect_product(a, b).re)
}

/// Kronecker product for states and operators, left operand's sites first.
pub trait TensorProduct: Sized {
    fn tensor_product(&self, other: &Self) -> Result<Self>;
}

impl TensorProduct for PureState {
    fn tensor_product(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

impl TensorProduct for DensityMatrix {
    fn tensor_product(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

impl TensorProduct for LinearOperator {
    fn tensor_product(&self, other: &Self) -> Result<Self> {
        self.tensor(other)
    }
}

/// Kronecker product of two values of the same kind.
pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> Result<T> {
    a.tensor_product(b)
}
