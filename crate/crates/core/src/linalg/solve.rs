use faer::linalg::solvers::SolveCore;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat};

use super::{dot, norm, CsrMatrix};
use crate::error::{Error, Result};

/// Sparse LU with partial pivoting. Fails with [`Error::SingularMatrix`] if
/// the factorization breaks down or the computed solution does not satisfy
/// the system.
pub fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "cannot solve a {:?} system with a right-hand side of length {}",
            a.shape(),
            b.len()
        )));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut triplets = Vec::with_capacity(a.nnz());
    for i in 0..n {
        let (cols, vals) = a.row(i);
        for (&c, &v) in cols.iter().zip(vals) {
            triplets.push(Triplet::new(i, c, v));
        }
    }
    let mat = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::SingularMatrix(format!("{e:?}")))?;
    let lu = mat
        .sp_lu()
        .map_err(|e| Error::SingularMatrix(format!("{e:?}")))?;
    let mut rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
    lu.solve_in_place_with_conj(Conj::No, rhs.as_mut());
    let x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)]).collect();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularMatrix("factorization produced non-finite values".into()));
    }
    let r: Vec<f64> = a.matvec(&x).iter().zip(b).map(|(ax, bi)| ax - bi).collect();
    let scale = a.frobenius_norm() * norm(&x) + norm(b);
    if norm(&r) > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SingularMatrix(format!(
            "residual {:e} after direct solve",
            norm(&r)
        )));
    }
    Ok(x)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KrylovMethod {
    Cg,
    Minres,
    Gmres { restart: usize },
}

#[derive(Clone, Debug)]
pub struct KrylovResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final true relative residual `|b - Ax| / |b|`.
    pub relative_residual: f64,
}

/// Unpreconditioned Krylov solve from a zero initial guess, stopping at
/// relative residual `tol`.
pub fn solve_krylov(
    a: &CsrMatrix,
    b: &[f64],
    method: KrylovMethod,
    tol: f64,
    maxit: usize,
) -> Result<KrylovResult> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "cannot solve a {:?} system with a right-hand side of length {}",
            a.shape(),
            b.len()
        )));
    }
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(KrylovResult {
            x: vec![0.0; n],
            iterations: 0,
            converged: true,
            relative_residual: 0.0,
        });
    }
    let (x, iterations) = match method {
        KrylovMethod::Cg => cg(a, b, tol, maxit),
        KrylovMethod::Minres => minres(a, b, tol, maxit),
        KrylovMethod::Gmres { restart } => gmres(a, b, tol, maxit, restart.max(1)),
    };
    let r: Vec<f64> = a.matvec(&x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
    let relative_residual = norm(&r) / bnorm;
    Ok(KrylovResult {
        converged: relative_residual <= tol * 1.01 && x.iter().all(|v| v.is_finite()),
        x,
        iterations,
        relative_residual,
    })
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn cg(a: &CsrMatrix, b: &[f64], tol: f64, maxit: usize) -> (Vec<f64>, usize) {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 1..=maxit {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap == 0.0 {
            return (x, it);
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * bnorm {
            return (x, it);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    (x, maxit)
}

fn minres(a: &CsrMatrix, b: &[f64], tol: f64, maxit: usize) -> (Vec<f64>, usize) {
    let n = b.len();
    let mut x = vec![0.0; n];
    let beta1 = norm(b);
    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut w = vec![0.0; n];
    let mut w1 = vec![0.0; n];
    let mut w2 = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut v = vec![0.0; n];
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    for it in 1..=maxit {
        let s = 1.0 / beta;
        for (vi, ri) in v.iter_mut().zip(&r2) {
            *vi = s * ri;
        }
        a.matvec_into(&v, &mut y);
        if it >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = norm(&r2);
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = (gbar * gbar + beta * beta).sqrt().max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        std::mem::swap(&mut w1, &mut w2);
        std::mem::swap(&mut w2, &mut w);
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        axpy(phi, &w, &mut x);
        if phibar <= tol * beta1 || beta == 0.0 {
            return (x, it);
        }
    }
    (x, maxit)
}

fn gmres(a: &CsrMatrix, b: &[f64], tol: f64, maxit: usize, restart: usize) -> (Vec<f64>, usize) {
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    let mut total = 0;
    let mut ax = vec![0.0; n];
    while total < maxit {
        a.matvec_into(&x, &mut ax);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let rnorm = norm(&r);
        if rnorm <= tol * bnorm {
            break;
        }
        let m = restart.min(maxit - total);
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / rnorm).collect()];
        // Hessenberg stored column by column, each of length j + 2
        let mut h: Vec<Vec<f64>> = Vec::with_capacity(m);
        let (mut cs, mut sn) = (Vec::<f64>::with_capacity(m), Vec::<f64>::with_capacity(m));
        let mut g = vec![0.0; m + 1];
        g[0] = rnorm;
        let mut k = 0;
        for j in 0..m {
            total += 1;
            let mut wv = a.matvec(&basis[j]);
            let mut col = vec![0.0; j + 2];
            for (i, vi) in basis.iter().enumerate() {
                col[i] = dot(&wv, vi);
                axpy(-col[i], vi, &mut wv);
            }
            col[j + 1] = norm(&wv);
            for i in 0..j {
                let t = cs[i] * col[i] + sn[i] * col[i + 1];
                col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
                col[i] = t;
            }
            let denom = col[j].hypot(col[j + 1]);
            let (c, s) = if denom == 0.0 { (1.0, 0.0) } else { (col[j] / denom, col[j + 1] / denom) };
            col[j] = denom;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            let happy = col[j + 1] == 0.0;
            col[j + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            h.push(col);
            k = j + 1;
            if g[j + 1].abs() <= tol * bnorm || happy {
                break;
            }
            let hn = h[j][j + 1].max(norm(&wv));
            basis.push(wv.iter().map(|v| v / hn).collect());
        }
        let mut yk = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|c| h[c][i] * yk[c]).sum();
            yk[i] = if h[i][i] == 0.0 { 0.0 } else { (g[i] - s) / h[i][i] };
        }
        for (yi, vi) in yk.iter().zip(&basis) {
            axpy(*yi, vi, &mut x);
        }
    }
    (x, total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            d[i * n + i] = 2.0;
            if i > 0 {
                d[i * n + i - 1] = -1.0;
                d[(i - 1) * n + i] = -1.0;
            }
        }
        CsrMatrix::from_dense(n, n, &d)
    }

    /// Symmetric indefinite saddle point: [[A, B^T], [B, 0]].
    fn saddle(n: usize) -> CsrMatrix {
        let a = laplace_1d(n).to_dense();
        let m = n + 1;
        let mut d = vec![0.0; m * m];
        for i in 0..n {
            for j in 0..n {
                d[i * m + j] = a[i * n + j];
            }
            d[i * m + n] = 1.0;
            d[n * m + i] = 1.0;
        }
        CsrMatrix::from_dense(m, m, &d)
    }

    fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.matvec(x);
        norm(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>()) / norm(b)
    }

    #[test]
    fn direct_handles_zero_diagonal() {
        let a = saddle(6);
        let b: Vec<f64> = (0..7).map(|i| 1.0 + i as f64).collect();
        let x = solve_direct(&a, &b).unwrap();
        assert!(residual(&a, &x, &b) < 1e-13);
    }

    #[test]
    fn direct_detects_singular() {
        let a = CsrMatrix::from_dense(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(solve_direct(&a, &[1.0, 0.0]), Err(Error::SingularMatrix(_))));
        let z = CsrMatrix::from_dense(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(solve_direct(&z, &[1.0, 1.0]), Err(Error::SingularMatrix(_))));
    }

    #[test]
    fn krylov_methods_converge() {
        let spd = laplace_1d(30);
        let b: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin() + 1.0).collect();
        let cg_res = solve_krylov(&spd, &b, KrylovMethod::Cg, 1e-10, 100).unwrap();
        assert!(cg_res.converged && cg_res.relative_residual < 1e-10);

        let ind = saddle(30);
        let b: Vec<f64> = (0..31).map(|i| (i as f64).cos()).collect();
        for method in [KrylovMethod::Minres, KrylovMethod::Gmres { restart: 40 }] {
            let r = solve_krylov(&ind, &b, method, 1e-10, 500).unwrap();
            assert!(r.converged, "{method:?}: {}", r.relative_residual);
            assert!(residual(&ind, &r.x, &b) < 1e-10);
        }
        let restarted = solve_krylov(&ind, &b, KrylovMethod::Gmres { restart: 5 }, 1e-8, 5000).unwrap();
        assert!(restarted.converged);
    }

    #[test]
    fn krylov_reports_non_convergence() {
        let a = laplace_1d(50);
        let b = vec![1.0; 50];
        let r = solve_krylov(&a, &b, KrylovMethod::Cg, 1e-12, 3).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 3);
    }
}
