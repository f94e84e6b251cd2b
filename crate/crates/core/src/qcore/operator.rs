use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::space::HilbertSpace;
use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Spin axis of a single site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    /// 2x2 Pauli matrix for this axis.
    pub fn pauli(self) -> CMatrix {
        let z = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        match self {
            Axis::X => CMatrix::from_row_slice(2, 2, &[z, one, one, z]),
            Axis::Y => CMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
            Axis::Z => CMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Largest elementwise deviation from Hermiticity, relative to the largest entry
/// (or absolute when all entries are below one).
pub(crate) fn hermiticity_error(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for j in 0..n {
        for i in 0..=j {
            let a = m[(i, j)];
            let b = m[(j, i)].conj();
            worst = worst.max((a - b).norm());
            scale = scale.max(a.norm());
        }
    }
    worst / scale
}

/// Anything that acts linearly on a state space: dense matrices and structured
/// Pauli sums. Expectation values are computed through this interface so the
/// structured forms never need to be densified.
pub trait Observable {
    fn space(&self) -> &HilbertSpace;

    fn is_hermitian(&self) -> bool;

    fn apply_vec(&self, v: &CVector) -> CVector;

    /// Left product `O·M`.
    fn apply_mat(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.nrows(), m.ncols());
        for j in 0..m.ncols() {
            let col = self.apply_vec(&m.column(j).into_owned());
            out.set_column(j, &col);
        }
        out
    }

    /// `Tr(O·M)`.
    fn trace_with(&self, m: &CMatrix) -> C64 {
        self.apply_mat(m).trace()
    }

    /// `Tr(O)`.
    fn trace(&self) -> C64 {
        let d = self.space().dim();
        let mut e = CVector::zeros(d);
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..d {
            e[i] = C64::new(1.0, 0.0);
            acc += self.apply_vec(&e)[i];
            e[i] = C64::new(0.0, 0.0);
        }
        acc
    }

    fn to_operator(&self) -> LinearOperator;
}

/// Observables that can be combined linearly with real weights.
pub trait LinearCombination: Observable + Sized {
    fn combine(terms: &[(f64, &Self)]) -> Result<Self>;
}

/// Dense square operator over a labeled Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    space: HilbertSpace,
    matrix: CMatrix,
    hermitian: bool,
}

impl LinearOperator {
    /// Build an operator. When `hermitian_hint` is set the matrix must be
    /// Hermitian within 1e-12.
    pub fn new(space: HilbertSpace, matrix: CMatrix, hermitian_hint: bool) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::invalid("operator matrix must be square"));
        }
        if matrix.nrows() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: matrix.nrows(),
            });
        }
        if matrix
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::invalid("operator has non-finite entries"));
        }
        if hermitian_hint {
            let err = hermiticity_error(&matrix);
            if err > HERMITIAN_TOL {
                return Err(Error::NotHermitian(err));
            }
        }
        Ok(Self {
            space,
            matrix,
            hermitian: hermitian_hint,
        })
    }

    pub fn hermitian(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        Self::new(space, matrix, true)
    }

    pub fn general(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        Self::new(space, matrix, false)
    }

    pub(crate) fn from_parts(space: HilbertSpace, matrix: CMatrix, hermitian: bool) -> Self {
        debug_assert_eq!(matrix.nrows(), space.dim());
        Self {
            space,
            matrix,
            hermitian,
        }
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self::from_parts(space.clone(), CMatrix::identity(d, d), true)
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self::from_parts(space.clone(), CMatrix::zeros(d, d), true)
    }

    /// Embed a single-site matrix at the 1-based `site`, identities elsewhere.
    pub fn embed_local(space: &HilbertSpace, site: usize, local: &CMatrix) -> Result<Self> {
        let d_site = space.site_dim(site)?;
        if local.nrows() != d_site || local.ncols() != d_site {
            return Err(Error::DimensionMismatch {
                expected: d_site,
                found: local.nrows(),
            });
        }
        let mut m = CMatrix::identity(1, 1);
        for (k, &d) in space.dims().iter().enumerate() {
            m = if k + 1 == site {
                m.kronecker(local)
            } else {
                m.kronecker(&CMatrix::identity(d, d))
            };
        }
        let herm = hermiticity_error(local) <= HERMITIAN_TOL;
        Ok(Self::from_parts(space.clone(), m, herm))
    }

    /// Embed a matrix acting on the contiguous block of sites starting at the
    /// 1-based `first_site`, identities elsewhere.
    pub fn embed_block(space: &HilbertSpace, first_site: usize, local: &CMatrix) -> Result<Self> {
        space.check_site(first_site)?;
        let dims = space.dims();
        let mut block = 1usize;
        let mut last = first_site - 1;
        while block < local.nrows() && last < dims.len() {
            block *= dims[last];
            last += 1;
        }
        if block != local.nrows() || local.nrows() != local.ncols() {
            return Err(Error::DimensionMismatch {
                expected: block,
                found: local.nrows(),
            });
        }
        let left: usize = dims[..first_site - 1].iter().product();
        let right: usize = dims[last..].iter().product();
        let m = CMatrix::identity(left, left)
            .kronecker(local)
            .kronecker(&CMatrix::identity(right, right));
        let herm = hermiticity_error(local) <= HERMITIAN_TOL;
        Ok(Self::from_parts(space.clone(), m, herm))
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn hermitian_hint(&self) -> bool {
        self.hermitian
    }

    /// Re-check the matrix and set the Hermitian flag.
    pub fn into_hermitian(self) -> Result<Self> {
        Self::new(self.space, self.matrix, true)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.space.clone(), self.matrix.adjoint(), self.hermitian)
    }

    /// `self · other`.
    pub fn compose(&self, other: &LinearOperator) -> Result<Self> {
        self.space.same_as(&other.space)?;
        Ok(Self::from_parts(
            self.space.clone(),
            &self.matrix * &other.matrix,
            false,
        ))
    }

    pub fn add(&self, other: &LinearOperator) -> Result<Self> {
        self.space.same_as(&other.space)?;
        Ok(Self::from_parts(
            self.space.clone(),
            &self.matrix + &other.matrix,
            self.hermitian && other.hermitian,
        ))
    }

    pub fn sub(&self, other: &LinearOperator) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::from_parts(
            self.space.clone(),
            &self.matrix * C64::new(factor, 0.0),
            self.hermitian,
        )
    }

    pub fn scale_complex(&self, factor: C64) -> Self {
        Self::from_parts(
            self.space.clone(),
            &self.matrix * factor,
            self.hermitian && factor.im == 0.0,
        )
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &LinearOperator) -> Result<Self> {
        let ab = self.compose(other)?;
        let ba = other.compose(self)?;
        ab.sub(&ba)
    }

    /// Kronecker product with `self`'s sites first.
    pub fn tensor(&self, other: &LinearOperator) -> Result<Self> {
        Ok(Self::from_parts(
            self.space.concat(&other.space)?,
            self.matrix.kronecker(&other.matrix),
            self.hermitian && other.hermitian,
        ))
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.matrix[(i, j)] == C64::new(0.0, 0.0)))
    }

    /// Max-abs entry of `self - other`.
    pub fn max_abs_diff(&self, other: &LinearOperator) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Spectral norm estimate: largest singular value.
    pub fn operator_norm(&self) -> f64 {
        self.matrix.clone().singular_values().max()
    }

    /// Restrict to the span of the given computational-basis indices.
    pub fn restrict(&self, indices: &[usize]) -> CMatrix {
        CMatrix::from_fn(indices.len(), indices.len(), |i, j| {
            self.matrix[(indices[i], indices[j])]
        })
    }
}

impl Observable for LinearOperator {
    fn space(&self) -> &HilbertSpace {
        &self.space
    }

    fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    fn apply_vec(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    fn apply_mat(&self, m: &CMatrix) -> CMatrix {
        &self.matrix * m
    }

    fn trace_with(&self, m: &CMatrix) -> C64 {
        // Tr(OM) = sum_ij O_ij M_ji
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                acc += self.matrix[(i, j)] * m[(j, i)];
            }
        }
        acc
    }

    fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    fn to_operator(&self) -> LinearOperator {
        self.clone()
    }
}

impl LinearCombination for LinearOperator {
    fn combine(terms: &[(f64, &Self)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::invalid("empty linear combination"))?;
        let mut acc = LinearOperator::zeros(&first.space);
        for (w, op) in terms {
            acc = acc.add(&op.scale(*w))?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_algebra() {
        let x = Axis::X.pauli();
        let y = Axis::Y.pauli();
        let z = Axis::Z.pauli();
        let comm = &x * &y - &y * &x;
        let expected = &z * C64::new(0.0, 2.0);
        assert!((comm - expected).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian_hint() {
        let s = HilbertSpace::qubits(1).unwrap();
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(
            LinearOperator::hermitian(s.clone(), m.clone()),
            Err(Error::NotHermitian(_))
        ));
        assert!(LinearOperator::general(s, m).is_ok());
    }

    #[test]
    fn embed_flips_second_site() {
        let s = HilbertSpace::qubits(2).unwrap();
        let x2 = LinearOperator::embed_local(&s, 2, &Axis::X.pauli()).unwrap();
        let mut v = CVector::zeros(4);
        v[0] = c(1.0, 0.0);
        let out = x2.apply_vec(&v);
        assert_eq!(out[1], c(1.0, 0.0));
        assert!(x2.hermitian_hint());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let s = HilbertSpace::qubits(2).unwrap();
        let m = CMatrix::identity(2, 2);
        assert!(matches!(
            LinearOperator::general(s, m),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
