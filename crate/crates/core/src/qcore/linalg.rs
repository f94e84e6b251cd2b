use nalgebra::SymmetricEigen;

use super::operator::{CMatrix, CVector, LinearOperator, C64};
use super::space::{check_cap, HilbertSpace};
use super::state::{DensityMatrix, PureState};
use crate::error::{Error, Result};

/// Gap below which the ground space is reported as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;
/// Negativity above this value certifies an NPT (entangled) state.
pub const NEGATIVITY_TOL: f64 = 1e-9;

/// Eigenvalues (ascending) and matching eigenvector columns of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    // Symmetrize first so round-off in the strict triangle cannot leak in.
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let n = m.nrows();
    let mut vecs = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &eig.eigenvectors.column(src));
    }
    (vals, vecs)
}

/// `exp(scale * op)`.
///
/// Diagonal generators are exponentiated entrywise, Hermitian generators through
/// their eigendecomposition, and anything else by Pade scaling and squaring.
pub fn matrix_exponential(op: &LinearOperator, scale: C64) -> Result<LinearOperator> {
    check_cap(op.dim())?;
    let space = op.space().clone();
    let m = op.matrix();
    let hermitian_out = op.hermitian_hint() && scale.im == 0.0;
    if op.is_diagonal() {
        let d = op.dim();
        let mut out = CMatrix::zeros(d, d);
        for i in 0..d {
            out[(i, i)] = (m[(i, i)] * scale).exp();
        }
        return Ok(LinearOperator::from_parts(space, out, hermitian_out));
    }
    let out = if op.hermitian_hint() {
        let (vals, vecs) = hermitian_eigen(m);
        let mut scaled = vecs.clone();
        for (j, &lambda) in vals.iter().enumerate() {
            let f = (scale * lambda).exp();
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= f;
            }
        }
        scaled * vecs.adjoint()
    } else {
        (m * scale).exp()
    };
    if out.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numerical("matrix exponential overflowed".into()));
    }
    Ok(LinearOperator::from_parts(space, out, hermitian_out))
}

/// Lowest eigenpair of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub state: PureState,
    /// Gap to the first excited level.
    pub gap: f64,
    /// Set when `gap < DEGENERACY_GAP`; `state` is then one of several ground vectors.
    pub degenerate: bool,
}

pub fn ground_state(h: &LinearOperator) -> Result<GroundState> {
    if !h.hermitian_hint() {
        return Err(Error::NotHermitian(f64::NAN));
    }
    check_cap(h.dim())?;
    let (vals, vecs) = hermitian_eigen(h.matrix());
    let gap = if vals.len() > 1 {
        vals[1] - vals[0]
    } else {
        f64::INFINITY
    };
    let v: CVector = vecs.column(0).into_owned();
    Ok(GroundState {
        energy: vals[0],
        state: PureState::normalized(h.space().clone(), v)?,
        gap,
        degenerate: gap < DEGENERACY_GAP,
    })
}

fn normalize_sites(space: &HilbertSpace, sites: &[usize]) -> Result<Vec<usize>> {
    if sites.is_empty() {
        return Err(Error::invalid("site list must not be empty"));
    }
    let mut sorted = sites.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != sites.len() {
        return Err(Error::invalid("site list has duplicates"));
    }
    for &s in &sorted {
        space.check_site(s)?;
    }
    Ok(sorted)
}

/// Reduced state on `keep_sites` (1-based), in their original relative order.
pub fn partial_trace(rho: &DensityMatrix, keep_sites: &[usize]) -> Result<DensityMatrix> {
    let space = rho.space();
    let keep = normalize_sites(space, keep_sites)?;
    let traced: Vec<usize> = (1..=space.n_sites())
        .filter(|s| !keep.contains(s))
        .collect();
    let kept_space = space.subspace(&keep)?;
    if traced.is_empty() {
        return Ok(rho.clone());
    }
    let traced_space = space.subspace(&traced)?;
    let d = space.dim();
    let mut kept_idx = vec![0usize; d];
    let mut traced_idx = vec![0usize; d];
    for i in 0..d {
        let digits = space.digits(i);
        let k: Vec<usize> = keep.iter().map(|&s| digits[s - 1]).collect();
        let t: Vec<usize> = traced.iter().map(|&s| digits[s - 1]).collect();
        kept_idx[i] = kept_space.index_of(&k)?;
        traced_idx[i] = traced_space.index_of(&t)?;
    }
    let dk = kept_space.dim();
    let mut out = CMatrix::zeros(dk, dk);
    let m = rho.matrix();
    for j in 0..d {
        for i in 0..d {
            if traced_idx[i] == traced_idx[j] {
                out[(kept_idx[i], kept_idx[j])] += m[(i, j)];
            }
        }
    }
    Ok(DensityMatrix::from_parts(kept_space, out))
}

/// Partial transpose over the sites in `part` (1-based).
pub fn partial_transpose(rho: &DensityMatrix, part: &[usize]) -> Result<CMatrix> {
    let space = rho.space();
    let part = normalize_sites(space, part)?;
    let strides = space.strides();
    let d = space.dim();
    let m = rho.matrix();
    let mut out = CMatrix::zeros(d, d);
    for j in 0..d {
        let dj = space.digits(j);
        for i in 0..d {
            let di = space.digits(i);
            // swap the row and column digits on the transposed sites
            let mut ii = i;
            let mut jj = j;
            for &s in &part {
                let k = s - 1;
                ii = ii - di[k] * strides[k] + dj[k] * strides[k];
                jj = jj - dj[k] * strides[k] + di[k] * strides[k];
            }
            out[(i, j)] = m[(ii, jj)];
        }
    }
    Ok(out)
}

/// Sum of the magnitudes of the negative eigenvalues of the partial transpose
/// over `part`. Both sides of the bipartition must be nonempty.
pub fn negativity(rho: &DensityMatrix, part: &[usize]) -> Result<f64> {
    let n = rho.space().n_sites();
    let part_sorted = normalize_sites(rho.space(), part)?;
    if part_sorted.len() == n {
        return Err(Error::invalid("bipartition must leave both sides nonempty"));
    }
    let pt = partial_transpose(rho, &part_sorted)?;
    let (vals, _) = hermitian_eigen(&pt);
    Ok(vals.iter().filter(|&&v| v < 0.0).map(|v| -v).sum())
}

/// `(I ⊗ left ⊗ I) M (I ⊗ right ⊗ I)^dagger` with the local factors on `site`.
pub(crate) fn local_sandwich(
    space: &HilbertSpace,
    m: &CMatrix,
    site: usize,
    left: &CMatrix,
    right: &CMatrix,
) -> Result<CMatrix> {
    let d_site = space.site_dim(site)?;
    let stride = space.strides()[site - 1];
    let d = space.dim();
    let digit = |i: usize| (i / stride) % d_site;
    // rows: (L M)[i, j] = sum_a L[x_i, a] M[base_i + a stride, j]
    let mut lm = CMatrix::zeros(d, d);
    for j in 0..d {
        for i in 0..d {
            let x = digit(i);
            let base = i - x * stride;
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..d_site {
                let l = left[(x, a)];
                if l.re != 0.0 || l.im != 0.0 {
                    acc += l * m[(base + a * stride, j)];
                }
            }
            lm[(i, j)] = acc;
        }
    }
    // columns: (LM R^dagger)[i, j] = sum_b LM[i, base_j + b stride] conj(R[y_j, b])
    let mut out = CMatrix::zeros(d, d);
    for j in 0..d {
        let y = digit(j);
        let base = j - y * stride;
        for b in 0..d_site {
            let r = right[(y, b)].conj();
            if r.re == 0.0 && r.im == 0.0 {
                continue;
            }
            let src = base + b * stride;
            for i in 0..d {
                out[(i, j)] += lm[(i, src)] * r;
            }
        }
    }
    Ok(out)
}

/// Apply single-site Kraus operators `rho -> sum_k K rho K^dagger` on `site`.
pub fn apply_local_kraus(
    rho: &DensityMatrix,
    site: usize,
    kraus: &[CMatrix],
) -> Result<DensityMatrix> {
    let d = rho.space().dim();
    let mut acc = CMatrix::zeros(d, d);
    for k in kraus {
        acc += local_sandwich(rho.space(), rho.matrix(), site, k, k)?;
    }
    Ok(rho.with_matrix(acc))
}

/// Project `site` with the local projector `proj` and renormalize.
pub fn project_local(rho: &DensityMatrix, site: usize, proj: &CMatrix) -> Result<DensityMatrix> {
    let m = local_sandwich(rho.space(), rho.matrix(), site, proj, proj)?;
    DensityMatrix::renormalized(rho.space().clone(), m)
}

/// Conversion used throughout: `|psi><psi|`.
pub fn pure_to_density(state: &PureState) -> DensityMatrix {
    state.to_density()
}

/// Max-abs entry of `U U^dagger - I`.
pub fn unitarity_error(u: &LinearOperator) -> f64 {
    let d = u.dim();
    (u.matrix() * u.matrix().adjoint() - CMatrix::identity(d, d))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::operator::{c, Axis};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn q(n: usize) -> HilbertSpace {
        HilbertSpace::qubits(n).unwrap()
    }

    fn singlet() -> PureState {
        let amps = CVector::from_vec(vec![
            c(0., 0.),
            c(FRAC_1_SQRT_2, 0.),
            c(-FRAC_1_SQRT_2, 0.),
            c(0., 0.),
        ]);
        PureState::new(q(2), amps).unwrap()
    }

    fn taylor_exp(m: &CMatrix) -> CMatrix {
        let n = m.nrows();
        let mut term = CMatrix::identity(n, n);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &term * m / C64::new(k as f64, 0.0);
            sum += &term;
        }
        sum
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let h = LinearOperator::hermitian(q(1), Axis::X.pauli()).unwrap();
        let u = matrix_exponential(&h, c(0.0, 0.0)).unwrap();
        assert!(u.max_abs_diff(&LinearOperator::identity(&q(1))) < 1e-15);
    }

    #[test]
    fn pauli_rotation_by_pi() {
        let x = LinearOperator::hermitian(q(1), Axis::X.pauli()).unwrap();
        let u = matrix_exponential(&x, c(0.0, -PI / 2.0)).unwrap();
        let expected = x.scale_complex(c(0.0, -1.0));
        assert!(u.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn z_rotation_is_unitary() {
        let z = LinearOperator::hermitian(q(1), Axis::Z.pauli()).unwrap();
        for t in [0.1, 1.0, 10.0] {
            let u = matrix_exponential(&z, c(0.0, -t)).unwrap();
            assert!(unitarity_error(&u) < 1e-10);
        }
    }

    #[test]
    fn all_routes_agree_with_taylor() {
        let m = CMatrix::from_fn(4, 4, |i, j| {
            c(0.1 * (i + j) as f64, 0.05 * (i as f64 - j as f64))
        });
        let herm = LinearOperator::hermitian(q(2), &m + m.adjoint()).unwrap();
        let general = LinearOperator::general(q(2), m.clone()).unwrap();
        let s = c(0.3, -0.7);
        let a = matrix_exponential(&herm, s).unwrap();
        assert!((a.matrix() - taylor_exp(&(herm.matrix() * s))).norm() < 1e-10);
        let b = matrix_exponential(&general, s).unwrap();
        assert!((b.matrix() - taylor_exp(&(general.matrix() * s))).norm() < 1e-10);
    }

    #[test]
    fn cap_enforced_for_exponential() {
        // 2^12 fits the default cap; the space constructor refuses 2^13.
        assert!(HilbertSpace::qubits(13).is_err());
    }

    #[test]
    fn ground_state_of_sigma_z() {
        let z = LinearOperator::hermitian(q(1), Axis::Z.pauli()).unwrap();
        let gs = ground_state(&z).unwrap();
        assert!((gs.energy + 1.0).abs() < 1e-14);
        let one = PureState::basis(q(1), &[1]).unwrap();
        assert!((gs.state.fidelity(&one).unwrap() - 1.0).abs() < 1e-14);
        assert!(!gs.degenerate);
    }

    #[test]
    fn ground_state_of_total_spin_is_singlet() {
        let s = q(2);
        let mut j2 = LinearOperator::zeros(&s);
        for axis in Axis::ALL {
            let j = LinearOperator::embed_local(&s, 1, &axis.pauli())
                .unwrap()
                .add(&LinearOperator::embed_local(&s, 2, &axis.pauli()).unwrap())
                .unwrap()
                .scale(0.5);
            j2 = j2.add(&j.compose(&j).unwrap()).unwrap();
        }
        let gs = ground_state(&j2.into_hermitian().unwrap()).unwrap();
        assert!(gs.energy.abs() < 1e-12);
        assert!((gs.state.fidelity(&singlet()).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_ground_space_flagged() {
        let gs = ground_state(&LinearOperator::identity(&q(2))).unwrap();
        assert!(gs.degenerate);
    }

    #[test]
    fn non_hermitian_ground_state_rejected() {
        let m = CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]);
        let op = LinearOperator::general(q(1), m).unwrap();
        assert!(ground_state(&op).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let zz = PureState::basis(q(2), &[0, 0]).unwrap().to_density();
        let r = partial_trace(&zz, &[1]).unwrap();
        assert!(
            (r.matrix() - PureState::basis(q(1), &[0]).unwrap().to_density().matrix()).norm()
                < 1e-15
        );

        let r = partial_trace(&singlet().to_density(), &[1]).unwrap();
        assert!((r.matrix() - CMatrix::identity(2, 2) * c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn partial_trace_errors() {
        let rho = singlet().to_density();
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[3]).is_err());
        assert!(partial_trace(&rho, &[1, 1]).is_err());
    }

    #[test]
    fn partial_trace_keeps_original_order() {
        // |0>|1>: keep (2, 1) must give the same as keep (1, 2).
        let rho = PureState::basis(q(2), &[0, 1]).unwrap().to_density();
        let a = partial_trace(&rho, &[2, 1]).unwrap();
        assert!((a.matrix() - rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn negativity_examples() {
        let prod = PureState::basis(q(2), &[0, 1]).unwrap().to_density();
        assert!(negativity(&prod, &[1]).unwrap() < 1e-15);
        let n = negativity(&singlet().to_density(), &[1]).unwrap();
        assert!((n - 0.5).abs() < 1e-12);
        assert!(negativity(&prod, &[1, 2]).is_err());
    }

    #[test]
    fn werner_negativity_against_closed_form() {
        // Partial transpose of p*singlet + (1-p) I/4 has eigenvalues (1+p)/4 (x3)
        // and (1-3p)/4, so the negativity is max(0, (3p-1)/4).
        let oracle = |p: f64| ((3.0 * p - 1.0) / 4.0).max(0.0);
        let mixed = DensityMatrix::maximally_mixed(q(2));
        for i in 0..=20 {
            let p = i as f64 / 20.0;
            let rho =
                DensityMatrix::mixture(&[p, 1.0 - p], &[singlet().to_density(), mixed.clone()])
                    .unwrap();
            let n = negativity(&rho, &[2]).unwrap();
            assert!((n - oracle(p)).abs() < 1e-12, "p={p}: {n} vs {}", oracle(p));
        }
        let below =
            DensityMatrix::mixture(&[0.333, 0.667], &[singlet().to_density(), mixed.clone()])
                .unwrap();
        let above =
            DensityMatrix::mixture(&[0.334, 0.666], &[singlet().to_density(), mixed]).unwrap();
        assert!(negativity(&below, &[1]).unwrap() < NEGATIVITY_TOL);
        assert!(negativity(&above, &[1]).unwrap() > NEGATIVITY_TOL);
    }

    #[test]
    fn local_kraus_matches_dense_embedding() {
        let s = q(3);
        let psi = PureState::normalized(
            s.clone(),
            CVector::from_fn(8, |i, _| c((i as f64).sin(), (i as f64 * 0.7).cos())),
        )
        .unwrap();
        let rho = psi.to_density();
        let x2 = LinearOperator::embed_local(&s, 2, &Axis::Y.pauli()).unwrap();
        let dense = x2.matrix() * rho.matrix() * x2.matrix().adjoint();
        let local = apply_local_kraus(&rho, 2, &[Axis::Y.pauli()]).unwrap();
        assert!((local.matrix() - dense).norm() < 1e-13);
    }
}
