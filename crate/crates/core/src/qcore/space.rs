use std::sync::atomic::{AtomicUsize, Ordering};

use serde::Serialize;

use crate::error::{Error, Result};

/// Default upper bound on the composite Hilbert-space dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

static DIMENSION_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_DIMENSION_CAP);

/// Current process-wide dimension cap.
pub fn dimension_cap() -> usize {
    DIMENSION_CAP.load(Ordering::Relaxed)
}

/// Replace the process-wide dimension cap. Spaces created afterwards are checked
/// against the new value.
pub fn set_dimension_cap(cap: usize) {
    DIMENSION_CAP.store(cap.max(1), Ordering::Relaxed);
}

pub(crate) fn check_cap(dim: usize) -> Result<()> {
    let cap = dimension_cap();
    if dim > cap {
        Err(Error::DimensionCap { dim, cap })
    } else {
        Ok(())
    }
}

/// Ordered list of sites with their local dimensions.
///
/// Composite basis states are indexed big-endian: site 1 is the most significant
/// digit. Site indices in the public API are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HilbertSpace {
    dims: Vec<usize>,
}

impl HilbertSpace {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::invalid("a Hilbert space needs at least one site"));
        }
        if dims.contains(&0) {
            return Err(Error::invalid("local dimensions must be positive"));
        }
        let dim = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .ok_or(Error::DimensionCap {
                dim: usize::MAX,
                cap: dimension_cap(),
            })?;
        check_cap(dim)?;
        Ok(Self { dims })
    }

    pub fn qubits(n_sites: usize) -> Result<Self> {
        Self::new(vec![2; n_sites])
    }

    pub fn uniform(n_sites: usize, local_dim: usize) -> Result<Self> {
        Self::new(vec![local_dim; n_sites])
    }

    pub fn n_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Local dimension of the 1-based `site`.
    pub fn site_dim(&self, site: usize) -> Result<usize> {
        self.check_site(site)?;
        Ok(self.dims[site - 1])
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_qubit_chain(&self) -> bool {
        self.dims.iter().all(|&d| d == 2)
    }

    pub fn check_site(&self, site: usize) -> Result<()> {
        if site == 0 || site > self.dims.len() {
            Err(Error::SiteOutOfRange {
                site,
                n_sites: self.dims.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Sites of `self` followed by sites of `other`.
    pub fn concat(&self, other: &HilbertSpace) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(dims)
    }

    /// Sub-space over the given 1-based sites, in the order given.
    pub fn subspace(&self, sites: &[usize]) -> Result<Self> {
        let dims = sites
            .iter()
            .map(|&s| self.site_dim(s))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }

    /// Stride of each site in the big-endian composite index.
    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Per-site digits of a composite index.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        out
    }

    /// Composite index of per-site digits.
    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.dims.len() {
            return Err(Error::DimensionMismatch {
                expected: self.dims.len(),
                found: digits.len(),
            });
        }
        digits
            .iter()
            .zip(&self.dims)
            .try_fold(0usize, |acc, (&x, &d)| {
                if x >= d {
                    Err(Error::invalid(format!(
                        "digit {x} exceeds local dimension {d}"
                    )))
                } else {
                    Ok(acc * d + x)
                }
            })
    }

    pub(crate) fn same_as(&self, other: &HilbertSpace) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn big_endian_digits() {
        let s = HilbertSpace::new(vec![2, 3, 2]).unwrap();
        assert_eq!(s.dim(), 12);
        assert_eq!(s.strides(), vec![6, 2, 1]);
        assert_eq!(s.digits(7), vec![1, 0, 1]);
        assert_eq!(s.index_of(&[1, 0, 1]).unwrap(), 7);
    }

    #[test]
    fn rejects_bad_sites() {
        let s = HilbertSpace::qubits(3).unwrap();
        assert!(s.check_site(0).is_err());
        assert!(s.check_site(4).is_err());
        assert!(HilbertSpace::new(vec![]).is_err());
        assert!(HilbertSpace::new(vec![2, 0]).is_err());
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(
            HilbertSpace::qubits(13),
            Err(Error::DimensionCap { dim: 8192, .. })
        ));
    }
}
