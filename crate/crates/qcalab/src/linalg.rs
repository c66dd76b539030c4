//! Dense complex linear algebra helpers: eigensolvers, SVD-based norms and
//! polar decompositions, unitary logarithms, tensor-leg permutations and
//! partial traces, and the smallest enclosing circle of a set of complex
//! eigenvalues.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eig, Eigh, QR, SVD, UPLO};
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{QcaError, Result};

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn identity(dim: usize) -> Array2<C64> {
    Array2::eye(dim)
}

pub fn frobenius_norm(m: &Array2<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unnormalized Hilbert-Schmidt inner product tr(a† b).
pub fn hs_dot(a: &Array2<C64>, b: &Array2<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// Largest singular value (the spectral norm).
pub fn operator_norm(m: &Array2<C64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    if m.nrows() == 1 {
        return m[[0, 0]].norm();
    }
    let (_, s, _) = m.svd(false, false).expect("svd failed");
    s.iter().cloned().fold(0.0_f64, f64::max)
}

/// Hermitian eigendecomposition, eigenvalues ascending; columns of the
/// returned matrix are the eigenvectors.
///
/// LAPACK sees the row-major buffer as column-major, so it diagonalizes the
/// transpose (= conjugate, for Hermitian input); conjugating the returned
/// vectors undoes that.
pub fn eigh(m: &Array2<C64>) -> (Array1<f64>, Array2<C64>) {
    let (vals, vecs) = m.eigh(UPLO::Lower).expect("hermitian eigensolve failed");
    (vals, vecs.mapv(|z| z.conj()))
}

pub fn eigvalsh(m: &Array2<C64>) -> Array1<f64> {
    use ndarray_linalg::EigValsh;
    m.eigvalsh(UPLO::Lower).expect("hermitian eigensolve failed")
}

/// exp(i s H) for Hermitian H.
pub fn exp_i_hermitian(h: &Array2<C64>, s: f64) -> Array2<C64> {
    let (vals, vecs) = eigh(h);
    let phases: Array1<C64> = vals.mapv(|l| (C64::new(0.0, s * l)).exp());
    let scaled = &vecs * &phases; // column j scaled by e^{i s λ_j}
    scaled.dot(&dagger(&vecs))
}

/// Checks ‖U†U − I‖ in spectral norm.
pub fn unitarity_defect(u: &Array2<C64>) -> f64 {
    let d = u.nrows();
    let mut g = dagger(u).dot(u);
    for i in 0..d {
        g[[i, i]] -= C64::new(1.0, 0.0);
    }
    operator_norm(&g)
}

/// Unitary factor of the polar decomposition m = u |m| (via SVD, u = W V†).
/// Returns the smallest singular value alongside so callers can detect a
/// numerically singular input.
pub fn polar_unitary(m: &Array2<C64>) -> (Array2<C64>, f64) {
    let (w, s, vt) = m.svd(true, true).expect("svd failed");
    let w = w.expect("svd U");
    let vt = vt.expect("svd Vt");
    let smin = s.iter().cloned().fold(f64::INFINITY, f64::min);
    (w.dot(&vt), smin)
}

/// Eigendecomposition of a normal matrix with an orthonormal eigenbasis.
///
/// LAPACK's general eigensolver returns independent but not necessarily
/// orthogonal eigenvectors inside degenerate clusters; we re-orthonormalize
/// per cluster and polish with a final polar correction.
pub fn eig_normal(m: &Array2<C64>) -> (Array1<C64>, Array2<C64>) {
    let d = m.nrows();
    let (vals, vecs) = m.eig().expect("eigensolve failed");
    // sort by eigenvalue (re, then im) to make clusters contiguous
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        (vals[a].re, vals[a].im)
            .partial_cmp(&(vals[b].re, vals[b].im))
            .unwrap()
    });
    let vals_sorted = Array1::from_iter(order.iter().map(|&i| vals[i]));
    let mut vecs_sorted = Array2::zeros((d, d));
    for (new_j, &old_j) in order.iter().enumerate() {
        vecs_sorted.column_mut(new_j).assign(&vecs.column(old_j));
    }
    // orthonormalize within clusters of nearby eigenvalues
    let scale = vals_sorted.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
    let cluster_tol = 1e-8 * scale;
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (vals_sorted[end] - vals_sorted[end - 1]).norm() < cluster_tol {
            end += 1;
        }
        if end - start > 1 {
            let block = vecs_sorted.slice(ndarray::s![.., start..end]).to_owned();
            let (q, _r) = block.qr().expect("qr failed");
            vecs_sorted
                .slice_mut(ndarray::s![.., start..end])
                .assign(&q.slice(ndarray::s![.., ..end - start]));
        }
        start = end;
    }
    let (u, _) = polar_unitary(&vecs_sorted);
    (vals_sorted, u)
}

/// Principal Hermitian logarithm of a unitary: returns H with u = exp(iH)
/// and the spectral margin from the branch point -1.
///
/// Errs with `LogBranchFailure` when an eigenvalue sits within `margin` of
/// the branch cut at -1.
pub fn principal_log_unitary(u: &Array2<C64>, margin: f64) -> Result<Array2<C64>> {
    let (vals, vecs) = eig_normal(u);
    let mut thetas = Array1::<f64>::zeros(vals.len());
    for (i, l) in vals.iter().enumerate() {
        if (l + C64::new(1.0, 0.0)).norm() < margin {
            return Err(QcaError::LogBranchFailure { margin });
        }
        thetas[i] = l.arg();
    }
    // H = V diag(θ) V†
    let phases: Array1<C64> = thetas.mapv(|t| C64::new(t, 0.0));
    let scaled = &vecs * &phases;
    let h = scaled.dot(&dagger(&vecs));
    // Hermitian polish
    Ok((&h + &dagger(&h)).mapv(|z| z * 0.5))
}

pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let aij = a[[i, j]];
            if aij == C64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[[i * rb + k, j * cb + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Lookup table translating a flat row-major multi-index over `dims` into the
/// flat index after reordering the legs by `perm`, where `perm[k]` is the new
/// position of leg `k`.
fn leg_permutation_table(dims: &[usize], perm: &[usize]) -> Vec<usize> {
    let n = dims.len();
    let total: usize = dims.iter().product();
    let mut new_dims = vec![0usize; n];
    for k in 0..n {
        new_dims[perm[k]] = dims[k];
    }
    // strides in the new ordering
    let mut new_strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        new_strides[k] = new_strides[k + 1] * new_dims[k + 1];
    }
    let mut table = vec![0usize; total];
    let mut digits = vec![0usize; n];
    for (idx, entry) in table.iter_mut().enumerate() {
        let mut rem = idx;
        for k in (0..n).rev() {
            digits[k] = rem % dims[k];
            rem /= dims[k];
        }
        let mut out = 0usize;
        for k in 0..n {
            out += digits[k] * new_strides[perm[k]];
        }
        *entry = out;
    }
    table
}

/// Reorders the tensor legs of a square operator. `dims` are the current leg
/// dimensions (row-major, identical for rows and columns); `perm[k]` gives
/// the new position of leg `k`.
pub fn permute_operator_legs(m: &Array2<C64>, dims: &[usize], perm: &[usize]) -> Array2<C64> {
    let table = leg_permutation_table(dims, perm);
    let d = m.nrows();
    let mut out = Array2::zeros((d, d));
    for i in 0..d {
        let ti = table[i];
        for j in 0..d {
            out[[ti, table[j]]] = m[[i, j]];
        }
    }
    out
}

/// Reorders the tensor legs of a state vector.
pub fn permute_vector_legs(v: &Array1<C64>, dims: &[usize], perm: &[usize]) -> Array1<C64> {
    let table = leg_permutation_table(dims, perm);
    let mut out = Array1::zeros(v.len());
    for i in 0..v.len() {
        out[table[i]] = v[i];
    }
    out
}

/// Partial trace over the legs with `keep[k] == false`.
pub fn partial_trace(m: &Array2<C64>, dims: &[usize], keep: &[bool]) -> Array2<C64> {
    let n = dims.len();
    assert_eq!(keep.len(), n);
    let d_keep: usize = (0..n).filter(|&k| keep[k]).map(|k| dims[k]).product();
    let d_tr: usize = (0..n).filter(|&k| !keep[k]).map(|k| dims[k]).product();
    // strides of each leg in the original flat index
    let mut strides = vec![1usize; n];
    for k in (0..n.saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let kept: Vec<usize> = (0..n).filter(|&k| keep[k]).collect();
    let traced: Vec<usize> = (0..n).filter(|&k| !keep[k]).collect();
    let flat = |legs: &[usize], digits: &[usize]| -> usize {
        legs.iter().zip(digits).map(|(&l, &d)| strides[l] * d).sum()
    };
    let digits_of = |legs: &[usize], mut idx: usize| -> Vec<usize> {
        let mut out = vec![0usize; legs.len()];
        for pos in (0..legs.len()).rev() {
            out[pos] = idx % dims[legs[pos]];
            idx /= dims[legs[pos]];
        }
        out
    };
    let mut out = Array2::zeros((d_keep, d_keep));
    for a in 0..d_keep {
        let da = digits_of(&kept, a);
        let base_a = flat(&kept, &da);
        for b in 0..d_keep {
            let db = digits_of(&kept, b);
            let base_b = flat(&kept, &db);
            let mut acc = C64::new(0.0, 0.0);
            for t in 0..d_tr {
                let dt = digits_of(&traced, t);
                let off = flat(&traced, &dt);
                acc += m[[base_a + off, base_b + off]];
            }
            out[[a, b]] = acc;
        }
    }
    out
}

/// Smallest enclosing circle of points in the plane (Welzl's algorithm).
/// Returns (center, radius).
pub fn smallest_enclosing_circle(points: &[(f64, f64)]) -> ((f64, f64), f64) {
    assert!(!points.is_empty());
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    // deterministic shuffle
    let mut state = 0x9e3779b97f4a7c15_u64;
    for i in (1..pts.len()).rev() {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let j = (state >> 33) as usize % (i + 1);
        pts.swap(i, j);
    }
    welzl(&pts)
}

fn circle_from2(a: (f64, f64), b: (f64, f64)) -> ((f64, f64), f64) {
    let c = ((a.0 + b.0) / 2.0, (a.1 + b.1) / 2.0);
    let r = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() / 2.0;
    (c, r)
}

fn circle_from3(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<((f64, f64), f64)> {
    let ax = a.0;
    let ay = a.1;
    let bx = b.0;
    let by = b.1;
    let cx = c.0;
    let cy = c.1;
    let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    if d.abs() < 1e-14 {
        return None;
    }
    let ux = ((ax * ax + ay * ay) * (by - cy)
        + (bx * bx + by * by) * (cy - ay)
        + (cx * cx + cy * cy) * (ay - by))
        / d;
    let uy = ((ax * ax + ay * ay) * (cx - bx)
        + (bx * bx + by * by) * (ax - cx)
        + (cx * cx + cy * cy) * (bx - ax))
        / d;
    let r = ((ux - ax).powi(2) + (uy - ay).powi(2)).sqrt();
    Some(((ux, uy), r))
}

fn in_circle(p: (f64, f64), c: ((f64, f64), f64)) -> bool {
    ((p.0 - c.0 .0).powi(2) + (p.1 - c.0 .1).powi(2)).sqrt() <= c.1 + 1e-12
}

fn welzl(pts: &[(f64, f64)]) -> ((f64, f64), f64) {
    let mut circle = ((pts[0].0, pts[0].1), 0.0);
    for (i, &p) in pts.iter().enumerate() {
        if in_circle(p, circle) {
            continue;
        }
        circle = ((p.0, p.1), 0.0);
        for (j, &q) in pts[..i].iter().enumerate() {
            if in_circle(q, circle) {
                continue;
            }
            circle = circle_from2(p, q);
            for &r in &pts[..j] {
                if in_circle(r, circle) {
                    continue;
                }
                circle = circle_from3(p, q, r).unwrap_or(circle);
            }
        }
    }
    circle
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> Array2<C64> {
    let g = random_ginibre(dim, rng);
    let (q, r) = g.qr().expect("qr failed");
    // fix phases so the distribution is Haar
    let mut q = q;
    for j in 0..dim {
        let rjj = r[[j, j]];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..dim {
            q[[i, j]] *= phase.conj();
        }
    }
    q
}

pub fn random_ginibre<R: Rng>(dim: usize, rng: &mut R) -> Array2<C64> {
    Array2::from_shape_fn((dim, dim), |_| gaussian_c64(rng))
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> Array2<C64> {
    let g = random_ginibre(dim, rng);
    (&g + &dagger(&g)).mapv(|z| z * 0.5)
}

fn gaussian_c64<R: Rng>(rng: &mut R) -> C64 {
    // Box-Muller
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let r = (-2.0 * u1.ln()).sqrt();
    C64::new(r * u2.cos(), r * u2.sin())
}

/// Fixes the global phase so that the largest-magnitude trace component (or
/// matrix entry, for traceless input) is real positive.
pub fn fix_phase(m: &Array2<C64>) -> Array2<C64> {
    let t = trace(m);
    let anchor = if t.norm() > 1e-8 {
        t
    } else {
        *m.iter()
            .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap())
            .unwrap()
    };
    if anchor.norm() < 1e-300 {
        return m.clone();
    }
    let phase = anchor / anchor.norm();
    m.mapv(|z| z * phase.conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn eigensolver_layouts() {
        // pin the eigenvector layout of both solvers on a genuinely complex
        // input: columns must be eigenvectors of the matrix as passed in
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = random_hermitian(5, &mut rng);
        let (vals, vecs) = eigh(&h);
        for j in 0..5 {
            let v = vecs.column(j).to_owned();
            let res = &h.dot(&v) - &v.mapv(|x| x * C64::new(vals[j], 0.0));
            assert!(res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-10);
        }
        let m = random_ginibre(5, &mut rng);
        let (mvals, mvecs) = m.eig().unwrap();
        for j in 0..5 {
            let v = mvecs.column(j).to_owned();
            let res = &m.dot(&v) - &v.mapv(|x| x * mvals[j]);
            assert!(res.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt() < 1e-9);
        }
    }

    #[test]
    fn operator_norm_of_pauli_x_is_one() {
        let x = ndarray::array![[c(0., 0.), c(1., 0.)], [c(1., 0.), c(0., 0.)]];
        assert_abs_diff_eq!(operator_norm(&x), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exp_of_pauli_z_rotates() {
        let z = ndarray::array![[c(1., 0.), c(0., 0.)], [c(0., 0.), c(-1., 0.)]];
        let u = exp_i_hermitian(&z, 0.3);
        assert_abs_diff_eq!(u[[0, 0]].re, 0.3_f64.cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(u[[0, 0]].im, 0.3_f64.sin(), epsilon = 1e-12);
        assert!(unitarity_defect(&u) < 1e-12);
    }

    #[test]
    fn polar_recovers_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let u = random_unitary(6, &mut rng);
        assert!(unitarity_defect(&u) < 1e-12);
        let stretched = u.mapv(|z| z * 2.5);
        let (w, smin) = polar_unitary(&stretched);
        assert!(smin > 2.4);
        assert!(operator_norm(&(&w - &u)) < 1e-10);
    }

    #[test]
    fn principal_log_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h0 = random_hermitian(5, &mut rng).mapv(|z| z * 0.2);
        let u = exp_i_hermitian(&h0, 1.0);
        let h = principal_log_unitary(&u, 1e-6).unwrap();
        let u2 = exp_i_hermitian(&h, 1.0);
        assert!(operator_norm(&(&u2 - &u)) < 1e-9);
    }

    #[test]
    fn log_branch_failure_at_minus_one() {
        let m = ndarray::array![[c(-1., 0.), c(0., 0.)], [c(0., 0.), c(1., 0.)]];
        assert!(matches!(
            principal_log_unitary(&m, 1e-6),
            Err(QcaError::LogBranchFailure { .. })
        ));
    }

    #[test]
    fn partial_trace_of_kron_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let ab = kron(&a, &b);
        let tr_b = partial_trace(&ab, &[2, 3], &[true, false]);
        let expect = a.mapv(|z| z * trace(&b));
        assert!(operator_norm(&(&tr_b - &expect)) < 1e-12);
    }

    #[test]
    fn leg_permutation_swaps_kron_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let ab = kron(&a, &b);
        let ba = kron(&b, &a);
        let swapped = permute_operator_legs(&ab, &[2, 3], &[1, 0]);
        assert!(operator_norm(&(&swapped - &ba)) < 1e-12);
    }

    #[test]
    fn enclosing_circle_matches_known_cases() {
        // two points: diameter
        let ((_, _), r) = smallest_enclosing_circle(&[(1.0, 0.0), (-1.0, 0.0)]);
        assert_abs_diff_eq!(2.0 * r, 2.0, epsilon = 1e-12);
        // brute-force comparison on the unit circle
        let phis = [0.0_f64, 0.2, 0.25];
        let pts: Vec<(f64, f64)> = phis.iter().map(|p| (p.cos(), p.sin())).collect();
        let ((_, _), r) = smallest_enclosing_circle(&pts);
        let expect = ((1.0 - 0.25_f64.cos()).powi(2) + 0.25_f64.sin().powi(2)).sqrt() / 2.0;
        assert_abs_diff_eq!(r, expect, epsilon = 1e-12);
    }

    #[test]
    fn eig_normal_orthonormal_for_degenerate_unitary() {
        // unitary with a doubly degenerate eigenvalue
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let v = random_unitary(4, &mut rng);
        let d = Array2::from_diag(&ndarray::arr1(&[
            c(1.0, 0.0),
            c(1.0, 0.0),
            C64::from_polar(1.0, 1.1),
            C64::from_polar(1.0, -0.4),
        ]));
        let u = v.dot(&d).dot(&dagger(&v));
        let (vals, vecs) = eig_normal(&u);
        assert!(unitarity_defect(&vecs) < 1e-9);
        let rebuilt = vecs
            .dot(&Array2::from_diag(&vals))
            .dot(&dagger(&vecs));
        assert!(operator_norm(&(&rebuilt - &u)) < 1e-9);
    }
}
