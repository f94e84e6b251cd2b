//! Pauli strings over qubit chains, stored as `X`/`Z` bit masks.
//!
//! A string `X^x Z^z` acts on a big-endian basis index `b` as
//! `X^x Z^z |b> = (-1)^{popcount(b & z)} |b ^ x>`, so application and
//! traces cost O(dim) per string instead of a dense matrix product.

use std::collections::BTreeMap;

use super::operator::{Axis, CMatrix, CVector, LinearCombination, LinearOperator, Observable, C64};
use super::space::HilbertSpace;
use crate::error::{Error, Result};

const MAX_PAULI_SITES: usize = 63;

/// Unit-coefficient string `X^x Z^z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    x: u64,
    z: u64,
}

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    fn bit(n_sites: usize, site: usize) -> u64 {
        1u64 << (n_sites - site)
    }

    pub fn x_mask(&self) -> u64 {
        self.x
    }

    pub fn z_mask(&self) -> u64 {
        self.z
    }

    fn sign(mask: u64) -> f64 {
        if mask.count_ones().is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `self * other = phase * (X^{x1^x2} Z^{z1^z2})`.
    fn mul(&self, other: &PauliString) -> (f64, PauliString) {
        let sign = Self::sign(self.z & other.x);
        (
            sign,
            PauliString {
                x: self.x ^ other.x,
                z: self.z ^ other.z,
            },
        )
    }
}

/// Weighted sum of Pauli strings over an `n`-qubit chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    space: HilbertSpace,
    terms: BTreeMap<PauliString, C64>,
}

impl PauliSum {
    pub fn zero(n_sites: usize) -> Result<Self> {
        if n_sites > MAX_PAULI_SITES {
            return Err(Error::invalid("too many sites for a Pauli mask"));
        }
        Ok(Self {
            space: HilbertSpace::qubits(n_sites)?,
            terms: BTreeMap::new(),
        })
    }

    pub fn identity(n_sites: usize) -> Result<Self> {
        Self::zero(n_sites)?.with_term(PauliString::IDENTITY, C64::new(1.0, 0.0))
    }

    pub fn n_sites(&self) -> usize {
        self.space.n_sites()
    }

    /// Single-site Pauli at the 1-based `site`.
    pub fn single(n_sites: usize, site: usize, axis: Axis) -> Result<Self> {
        Self::product(n_sites, &[(site, axis)])
    }

    /// Product of single-site Paulis on distinct sites.
    pub fn product(n_sites: usize, factors: &[(usize, Axis)]) -> Result<Self> {
        let base = Self::zero(n_sites)?;
        let mut string = PauliString::IDENTITY;
        let mut coeff = C64::new(1.0, 0.0);
        for &(site, axis) in factors {
            base.space.check_site(site)?;
            let b = PauliString::bit(n_sites, site);
            if (string.x | string.z) & b != 0 {
                return Err(Error::invalid(format!(
                    "site {site} repeated in Pauli product"
                )));
            }
            match axis {
                Axis::X => string.x |= b,
                Axis::Z => string.z |= b,
                Axis::Y => {
                    // Y = i X Z
                    string.x |= b;
                    string.z |= b;
                    coeff *= C64::new(0.0, 1.0);
                }
            }
        }
        base.with_term(string, coeff)
    }

    fn with_term(mut self, s: PauliString, coeff: C64) -> Result<Self> {
        self.add_term(s, coeff);
        Ok(self)
    }

    fn add_term(&mut self, s: PauliString, coeff: C64) {
        let entry = self.terms.entry(s).or_insert(C64::new(0.0, 0.0));
        *entry += coeff;
        if entry.norm() == 0.0 {
            self.terms.remove(&s);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PauliString, &C64)> {
        self.terms.iter()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for v in out.terms.values_mut() {
            *v *= factor;
        }
        out
    }

    pub fn add(&self, other: &PauliSum) -> Result<Self> {
        self.space.same_as(&other.space)?;
        let mut out = self.clone();
        for (s, c) in &other.terms {
            out.add_term(*s, *c);
        }
        Ok(out)
    }

    /// Operator product `self * other`.
    pub fn mul(&self, other: &PauliSum) -> Result<Self> {
        self.space.same_as(&other.space)?;
        let mut out = Self::zero(self.n_sites())?;
        for (s1, c1) in &self.terms {
            for (s2, c2) in &other.terms {
                let (sign, s) = s1.mul(s2);
                out.add_term(s, c1 * c2 * sign);
            }
        }
        Ok(out)
    }

    pub fn power(&self, m: u32) -> Result<Self> {
        let mut out = Self::identity(self.n_sites())?;
        for _ in 0..m {
            out = out.mul(self)?;
        }
        Ok(out)
    }
}

impl Observable for PauliSum {
    fn space(&self) -> &HilbertSpace {
        &self.space
    }

    fn is_hermitian(&self) -> bool {
        // (c X^x Z^z)^dagger = conj(c) (-1)^{|x&z|} X^x Z^z; distinct strings are independent.
        self.terms.iter().all(|(s, c)| {
            let sign = PauliString::sign(s.x & s.z);
            (c - c.conj() * sign).norm() <= 1e-12 * c.norm().max(1.0)
        })
    }

    fn apply_vec(&self, v: &CVector) -> CVector {
        let d = v.len();
        let mut out = CVector::zeros(d);
        for (s, c) in &self.terms {
            let x = s.x as usize;
            for b in 0..d {
                let sign = PauliString::sign(b as u64 & s.z);
                out[b ^ x] += c * v[b] * sign;
            }
        }
        out
    }

    fn trace_with(&self, m: &CMatrix) -> C64 {
        // Tr(P M) = sum_b <b|P|b^x> M[b^x, b]
        let d = m.nrows();
        let mut acc = C64::new(0.0, 0.0);
        for (s, c) in &self.terms {
            let x = s.x as usize;
            let mut part = C64::new(0.0, 0.0);
            for b in 0..d {
                let src = b ^ x;
                part += m[(src, b)] * PauliString::sign(src as u64 & s.z);
            }
            acc += c * part;
        }
        acc
    }

    fn trace(&self) -> C64 {
        // Only the identity string has nonzero trace.
        let d = self.space.dim() as f64;
        self.terms
            .iter()
            .filter(|(s, _)| s.x == 0 && s.z == 0)
            .map(|(_, c)| c * d)
            .sum()
    }

    fn to_operator(&self) -> LinearOperator {
        let d = self.space.dim();
        let mut m = CMatrix::zeros(d, d);
        for (s, c) in &self.terms {
            let x = s.x as usize;
            for b in 0..d {
                m[(b ^ x, b)] += c * PauliString::sign(b as u64 & s.z);
            }
        }
        LinearOperator::from_parts(self.space.clone(), m, self.is_hermitian())
    }
}

impl LinearCombination for PauliSum {
    fn combine(terms: &[(f64, &Self)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::invalid("empty linear combination"))?;
        let mut acc = PauliSum::zero(first.n_sites())?;
        for (w, p) in terms {
            acc = acc.add(&p.scale(C64::new(*w, 0.0)))?;
        }
        Ok(acc)
    }
}
