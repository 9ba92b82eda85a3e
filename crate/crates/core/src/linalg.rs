//! Dense complex linear algebra underpinning the Fock-space oracle:
//! LU solves, the scaling-and-squaring matrix exponential, a Krylov
//! propagator for exp(tL)v with matrix-free L, cyclic Jacobi for
//! Hermitian eigenvalues, and inverse iteration for spectral gaps.

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CVec = Array1<Complex64>;
pub type CMat = Array2<Complex64>;

/// Conjugated inner product ⟨v, w⟩ = Σ v̄_i w_i.
pub fn cdot(v: &CVec, w: &CVec) -> Complex64 {
    v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum()
}

/// Euclidean norm.
pub fn norm2(v: &CVec) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Induced 1-norm (maximum absolute column sum).
pub fn norm_1(a: &CMat) -> f64 {
    let mut best = 0.0_f64;
    for col in a.columns() {
        let s: f64 = col.iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

/// Kronecker product a ⊗ b.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = CMat::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[(i, j)];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn dagger(a: &CMat) -> CMat {
    a.t().mapv(|z| z.conj())
}

/// LU factorization with partial pivoting.
pub struct Lu {
    lu: CMat,
    piv: Vec<usize>,
}

impl Lu {
    pub fn decompose(a: &CMat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Linalg("LU requires a square matrix".into()));
        }
        let mut lu = a.clone();
        let mut piv = Vec::with_capacity(n);
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Linalg(format!("singular matrix at pivot {k}")));
            }
            piv.push(p);
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != Complex64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let delta = f * lu[(k, j)];
                        lu[(i, j)] -= delta;
                    }
                }
            }
        }
        Ok(Self { lu, piv })
    }

    pub fn solve(&self, b: &CVec) -> CVec {
        let n = self.lu.nrows();
        let mut x = b.clone();
        // rows were interchanged in full during factorization, so the
        // permutation applies to the right-hand side up front
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
        }
        for k in 0..n {
            let xk = x[k];
            if xk != Complex64::new(0.0, 0.0) {
                for i in k + 1..n {
                    let delta = self.lu[(i, k)] * xk;
                    x[i] -= delta;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..n {
                s -= self.lu[(k, j)] * x[j];
            }
            x[k] = s / self.lu[(k, k)];
        }
        x
    }

    /// Solve for every column of a matrix right-hand side.
    pub fn solve_mat(&self, b: &CMat) -> CMat {
        let mut out = CMat::zeros(b.raw_dim());
        for (j, col) in b.columns().into_iter().enumerate() {
            let x = self.solve(&col.to_owned());
            out.column_mut(j).assign(&x);
        }
        out
    }
}

/// Dense matrix exponential by Padé-13 approximation with scaling and
/// squaring.
pub fn expm(a: &CMat) -> Result<CMat> {
    const THETA_13: f64 = 5.371_920_351_148_152;
    #[rustfmt::skip]
    const B: [f64; 14] = [
        64_764_752_532_480_000.0, 32_382_376_266_240_000.0, 7_771_770_303_897_600.0,
        1_187_353_796_428_800.0, 129_060_195_264_000.0, 10_559_470_521_600.0,
        670_442_572_800.0, 33_522_128_640.0, 1_323_241_920.0, 40_840_800.0,
        960_960.0, 16_380.0, 182.0, 1.0,
    ];
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Linalg("expm requires a square matrix".into()));
    }
    let norm = norm_1(a);
    let s = if norm > THETA_13 { (norm / THETA_13).log2().ceil() as i32 } else { 0 };
    let a = a.mapv(|z| z / 2.0_f64.powi(s));

    let eye = CMat::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let u_inner = a6.dot(&(&a6 * B[13] + &a4 * B[11] + &a2 * B[9]))
        + &a6 * B[7]
        + &a4 * B[5]
        + &a2 * B[3]
        + &eye * B[1];
    let u = a.dot(&u_inner);
    let v = a6.dot(&(&a6 * B[12] + &a4 * B[10] + &a2 * B[8]))
        + &a6 * B[6]
        + &a4 * B[4]
        + &a2 * B[2]
        + &eye * B[0];
    let lhs = &v - &u;
    let rhs = &v + &u;
    let lu = Lu::decompose(&lhs)?;
    let mut f = lu.solve_mat(&rhs);
    for _ in 0..s {
        f = f.dot(&f);
    }
    Ok(f)
}

/// Action of the matrix exponential, w = exp(tL)v, for a matrix-free
/// operator given by `apply`, via an adaptive Arnoldi/Krylov scheme.
///
/// `tol` is the relative accuracy budget over the whole interval. The
/// per-chunk local error is estimated from the last Krylov component
/// and the step is shortened until it fits its share of the budget.
pub fn expm_action<F>(apply: &F, v: &CVec, t: f64, tol: f64) -> Result<CVec>
where
    F: Fn(&CVec) -> CVec,
{
    let n = v.len();
    let m = n.min(30);
    let mut w = v.clone();
    if t == 0.0 {
        return Ok(w);
    }
    let mut remaining = t;
    let mut tau = t;
    let t_total = t;
    let mut chunks = 0usize;
    while remaining > 0.0 {
        chunks += 1;
        if chunks > 10_000 {
            return Err(Error::Propagation("Krylov propagation exceeded 10000 chunks".into()));
        }
        let beta = norm2(&w);
        if beta == 0.0 {
            return Ok(w);
        }
        // Arnoldi with one reorthogonalization pass
        let mut basis: Vec<CVec> = Vec::with_capacity(m + 1);
        basis.push(w.mapv(|z| z / beta));
        let mut h = CMat::zeros((m + 1, m));
        let mut k = m;
        let mut happy = false;
        for j in 0..m {
            let mut p = apply(&basis[j]);
            for i in 0..=j {
                let hij = cdot(&basis[i], &p);
                h[(i, j)] += hij;
                p.scaled_add(-hij, &basis[i]);
            }
            for i in 0..=j {
                let corr = cdot(&basis[i], &p);
                h[(i, j)] += corr;
                p.scaled_add(-corr, &basis[i]);
            }
            let hnext = norm2(&p);
            if hnext < 1e-14 * beta.max(1.0) {
                k = j + 1;
                happy = true;
                break;
            }
            h[(j + 1, j)] = Complex64::new(hnext, 0.0);
            basis.push(p.mapv(|z| z / hnext));
        }
        let h_k = h.slice(ndarray::s![0..k, 0..k]).to_owned();
        let h_next = if happy { 0.0 } else { h[(k, k - 1)].re };

        loop {
            let f = expm(&h_k.mapv(|z| z * tau))?;
            let err = beta * h_next * f[(k - 1, 0)].norm();
            let budget = tol * beta.max(1.0) * (tau / t_total).max(1e-3);
            if err <= budget || happy || tau <= 1e-12 * t_total {
                let mut next = CVec::zeros(n);
                for (i, b) in basis.iter().take(k).enumerate() {
                    next.scaled_add(beta * f[(i, 0)], b);
                }
                w = next;
                remaining -= tau;
                if err < 0.1 * budget {
                    tau *= 2.0;
                }
                tau = tau.min(remaining.max(0.0));
                if remaining > 0.0 && tau == 0.0 {
                    tau = remaining;
                }
                break;
            }
            tau /= 2.0;
        }
    }
    Ok(w)
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi sweeps.
pub fn hermitian_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::Linalg("eigenvalues require a square matrix".into()));
    }
    let mut m = a.clone();
    for _sweep in 0..60 {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in p + 1..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() < 1e-14 * norm_1(&m).max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq.norm() == 0.0 {
                    continue;
                }
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let phase = apq / apq.norm();
                let theta = 0.5 * (2.0 * apq.norm()).atan2(aqq - app);
                let (c, s) = (theta.cos(), theta.sin());
                // unitary plane rotation J: columns p, q
                let jp = (Complex64::new(c, 0.0), -s * phase.conj());
                let jq = (s * phase, Complex64::new(c, 0.0));
                // m <- J† m J applied as column then row updates
                for i in 0..n {
                    let (mip, miq) = (m[(i, p)], m[(i, q)]);
                    m[(i, p)] = mip * jp.0 + miq * jp.1;
                    m[(i, q)] = mip * jq.0 + miq * jq.1;
                }
                for i in 0..n {
                    let (mpi, mqi) = (m[(p, i)], m[(q, i)]);
                    m[(p, i)] = jp.0.conj() * mpi + jp.1.conj() * mqi;
                    m[(q, i)] = jq.0.conj() * mpi + jq.1.conj() * mqi;
                }
            }
        }
    }
    Ok((0..n).map(|i| m[(i, i)].re).collect())
}

/// Modulus-smallest eigenvalue of an operator restricted to an
/// invariant subspace, by inverse iteration.
///
/// `lu` must factor a nonsingular matrix that acts like the operator on
/// the subspace; `project` re-imposes membership of the subspace after
/// each solve; `apply` is the original operator (used for the Rayleigh
/// quotient).
pub fn inverse_iteration_smallest<P, A>(
    lu: &Lu,
    n: usize,
    project: P,
    apply: A,
) -> Result<Complex64>
where
    P: Fn(&mut CVec),
    A: Fn(&CVec) -> CVec,
{
    // deterministic, structureless start vector
    let mut v: CVec = (0..n)
        .map(|i| Complex64::new(1.0 / (i + 1) as f64, ((i * 7 + 3) % 11) as f64 / 11.0))
        .collect();
    project(&mut v);
    let nv = norm2(&v);
    if nv == 0.0 {
        return Err(Error::Linalg("projection annihilated the start vector".into()));
    }
    v.mapv_inplace(|z| z / nv);
    let mut lambda = Complex64::new(f64::INFINITY, 0.0);
    for _ in 0..200 {
        let mut next = lu.solve(&v);
        project(&mut next);
        let nn = norm2(&next);
        if nn == 0.0 {
            return Err(Error::Linalg("inverse iteration collapsed to zero".into()));
        }
        next.mapv_inplace(|z| z / nn);
        let av = apply(&next);
        let new_lambda = cdot(&next, &av) / cdot(&next, &next);
        let done = (new_lambda - lambda).norm() <= 1e-12 * new_lambda.norm().max(1e-300);
        v = next;
        lambda = new_lambda;
        if done {
            break;
        }
    }
    Ok(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_like(n: usize, scale: f64) -> CMat {
        // deterministic pseudo-random fill
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMat::from_shape_fn((n, n), |_| c(next(), next()) * scale)
    }

    #[test]
    fn lu_solves_linear_systems() {
        let n = 12;
        let a = random_like(n, 1.0) + CMat::eye(n) * c(3.0, 0.0);
        let x_true: CVec = (0..n).map(|i| c(i as f64, -(i as f64) / 2.0)).collect();
        let b = a.dot(&x_true);
        let lu = Lu::decompose(&a).unwrap();
        let x = lu.solve(&b);
        assert!(norm2(&(&x - &x_true)) < 1e-10);
    }

    #[test]
    fn lu_handles_row_pivoting() {
        // unshifted pseudo-random matrices force genuine pivoting
        for n in [4usize, 17, 40] {
            let a = random_like(n, 1.0);
            let b: CVec = (0..n).map(|i| c((i as f64 * 0.31).sin(), (i as f64 * 0.17).cos())).collect();
            let lu = Lu::decompose(&a).unwrap();
            let x = lu.solve(&b);
            let resid = norm2(&(&a.dot(&x) - &b));
            assert!(resid < 1e-10 * norm2(&b).max(1.0), "n = {n}: residual {resid:.3e}");
        }
    }

    #[test]
    fn lu_rejects_singular() {
        let a = CMat::zeros((3, 3));
        assert!(Lu::decompose(&a).is_err());
    }

    #[test]
    fn expm_diagonal_and_nilpotent() {
        // diagonal: entrywise exponential
        let mut a = CMat::zeros((3, 3));
        a[(0, 0)] = c(-1.0, 0.5);
        a[(1, 1)] = c(0.3, -2.0);
        a[(2, 2)] = c(0.0, 0.0);
        let e = expm(&a).unwrap();
        for i in 0..3 {
            assert!((e[(i, i)] - a[(i, i)].exp()).norm() < 1e-13);
        }
        // nilpotent: exp([[0,1],[0,0]]) = [[1,1],[0,1]]
        let mut nil = CMat::zeros((2, 2));
        nil[(0, 1)] = c(1.0, 0.0);
        let e = expm(&nil).unwrap();
        assert!((e[(0, 1)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!((e[(0, 0)] - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_group_property() {
        let a = random_like(10, 0.8);
        let e1 = expm(&a).unwrap();
        let half = a.mapv(|z| z * 0.5);
        let e2 = expm(&half).unwrap();
        let e2sq = e2.dot(&e2);
        let diff = &e1 - &e2sq;
        assert!(norm_1(&diff) < 1e-11 * norm_1(&e1));
    }

    #[test]
    fn krylov_matches_dense_expm() {
        let n = 24;
        // contracting generator typical of a Liouvillian
        let a = random_like(n, 0.5) - CMat::eye(n) * c(1.5, 0.0);
        let v: CVec = (0..n).map(|i| c((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let apply = |x: &CVec| a.dot(x);
        for &t in &[0.3, 2.0, 17.0] {
            let dense = expm(&a.mapv(|z| z * t)).unwrap().dot(&v);
            let kry = expm_action(&apply, &v, t, 1e-11).unwrap();
            let err = norm2(&(&dense - &kry)) / norm2(&dense).max(1e-300);
            assert!(err < 1e-9, "t={t}: rel err {err:.2e}");
        }
    }

    #[test]
    fn krylov_happy_breakdown() {
        // operator with an invariant 2-dim subspace containing v
        let mut a = CMat::zeros((8, 8));
        a[(0, 0)] = c(-0.5, 0.0);
        a[(0, 1)] = c(0.2, 0.0);
        a[(1, 0)] = c(0.1, 0.0);
        a[(1, 1)] = c(-0.7, 0.0);
        a[(4, 5)] = c(3.0, 0.0);
        let mut v = CVec::zeros(8);
        v[0] = c(1.0, 0.0);
        let apply = |x: &CVec| a.dot(x);
        let w = expm_action(&apply, &v, 5.0, 1e-12).unwrap();
        let dense = expm(&a.mapv(|z| z * 5.0)).unwrap().dot(&v);
        assert!(norm2(&(&w - &dense)) < 1e-11);
    }

    #[test]
    fn jacobi_eigenvalues() {
        // known 2x2 Hermitian: [[2, i],[-i, 2]] has eigenvalues 1, 3
        let mut a = CMat::zeros((2, 2));
        a[(0, 0)] = c(2.0, 0.0);
        a[(0, 1)] = c(0.0, 1.0);
        a[(1, 0)] = c(0.0, -1.0);
        a[(1, 1)] = c(2.0, 0.0);
        let mut ev = hermitian_eigenvalues(&a).unwrap();
        ev.sort_by(f64::total_cmp);
        assert_abs_diff_eq!(ev[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1], 3.0, epsilon = 1e-12);

        // random Hermitian: eigenvalue sum = trace, sum of squares =
        // Frobenius norm squared
        let g = random_like(9, 1.0);
        let herm = (&g + &dagger(&g)).mapv(|z| z * 0.5);
        let ev = hermitian_eigenvalues(&herm).unwrap();
        let tr: f64 = (0..9).map(|i| herm[(i, i)].re).sum();
        assert_relative_eq!(ev.iter().sum::<f64>(), tr, max_relative = 1e-10);
        let fro: f64 = herm.iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(ev.iter().map(|x| x * x).sum::<f64>(), fro, max_relative = 1e-10);
    }

    #[test]
    fn inverse_iteration_finds_smallest() {
        // diagonal matrix: smallest |eigenvalue| is 0.3
        let n = 6;
        let mut a = CMat::zeros((n, n));
        for i in 0..n {
            a[(i, i)] = c(-(0.3 + i as f64), 0.0);
        }
        let lu = Lu::decompose(&a).unwrap();
        let lam = inverse_iteration_smallest(&lu, n, |_v| {}, |x| a.dot(x)).unwrap();
        assert_relative_eq!(lam.re, -0.3, max_relative = 1e-10);
    }

    #[test]
    fn kron_matches_definition() {
        let a = random_like(3, 1.0);
        let b = random_like(2, 1.0);
        let k = kron(&a, &b);
        for i in 0..3 {
            for j in 0..3 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert!((k[(2 * i + p, 2 * j + q)] - a[(i, j)] * b[(p, q)]).norm() < 1e-15);
                    }
                }
            }
        }
    }
}

