//! Exact spectral ground truth for finite-dimensional unitaries.
//!
//! Unitaries are built with a prescribed spectrum (`V diag(e^{i theta}) V*`)
//! or diagonalized through a Hermitian surrogate and a cyclic Jacobi solver,
//! after which `f(U)` is evaluated exactly on the eigenbasis.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::funcexpr::CircleFunction;
use crate::linalg::{
    compensated_sum, inner_slices, ComplexVec, DenseMatrix, SpectralForm, UnitaryOperator, C64,
};

const MAX_ATTEMPTS: usize = 8;
/// Per-column eigen-residual `||U v - e^{i theta} v||` accepted by `recover_spectral`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;
/// Jacobi stops once the off-diagonal Frobenius norm is below this fraction of `||H||_F`.
pub const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

#[derive(Clone, Debug)]
pub struct ConstructedUnitary {
    pub spectral: SpectralForm,
    pub dense: DenseMatrix,
}

impl ConstructedUnitary {
    pub fn operator(&self) -> UnitaryOperator {
        UnitaryOperator::dense(self.dense.clone()).expect("finite nonempty matrix")
    }
}

/// `d` phases drawn uniformly from `[0, 2pi)`.
pub fn random_phases(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..dim).map(|_| rng.random_range(0.0..TAU)).collect()
}

/// Builds `V diag(e^{i theta}) V*` with `V` orthonormalized from a seeded
/// Gaussian matrix.
pub fn construct(thetas: &[f64], seed: u64) -> Result<ConstructedUnitary> {
    if thetas.is_empty() {
        return Err(Error::EmptyVector);
    }
    let n = thetas.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let a = DenseMatrix::from_fn(n, |_, _| {
            C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let Some(v) = orthonormalize_columns(&a) else {
            continue;
        };
        let spectral = SpectralForm::new(thetas.to_vec(), v)?;
        let dense = spectral.reconstruct();
        return Ok(ConstructedUnitary { spectral, dense });
    }
    Err(Error::RankDeficient {
        attempts: MAX_ATTEMPTS,
    })
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. `None` when a
/// column collapses relative to its original norm.
fn orthonormalize_columns(a: &DenseMatrix) -> Option<DenseMatrix> {
    let n = a.dim();
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(n);
    for j in 0..n {
        let mut v = a.column(j);
        let original = norm(&v);
        for _pass in 0..2 {
            for qi in &q {
                let proj = inner_slices(&v, qi);
                for (vk, qk) in v.iter_mut().zip(qi) {
                    *vk -= proj * qk;
                }
            }
        }
        let nv = norm(&v);
        if nv.is_nan() || nv <= 1e-10 * original {
            return None;
        }
        v.iter_mut().for_each(|z| *z /= nv);
        q.push(v);
    }
    Some(DenseMatrix::from_fn(n, |i, j| q[j][i]))
}

fn norm(v: &[C64]) -> f64 {
    crate::linalg::compensated_sum_real(v.iter().map(|z| z.norm_sqr())).sqrt()
}

fn off_diagonal_norm(a: &DenseMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigensolver for a Hermitian matrix. Returns eigenvalues and
/// the matrix whose columns are the matching orthonormal eigenvectors.
pub fn hermitian_eigen(h: &DenseMatrix) -> (Vec<f64>, DenseMatrix) {
    let n = h.dim();
    let mut a = h.clone();
    let mut v = DenseMatrix::identity(n);
    let total = {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += a.get(i, j).norm_sqr();
            }
        }
        s.sqrt()
    };
    let target = JACOBI_REL_TOL * total;
    for _sweep in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                // Phase e^{-i phi} on column q makes the (p,q) entry real, then a
                // real plane rotation zeroes it.
                let phase = (apq / r).conj();
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = 0.5 * (2.0 * r).atan2(aqq - app);
                let (s, c) = theta.sin_cos();
                let j_pp = C64::new(c, 0.0);
                let j_pq = C64::new(s, 0.0);
                let j_qp = phase * -s;
                let j_qq = phase * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * j_pp + akq * j_qp);
                    a.set(k, q, akp * j_pq + akq * j_qq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, j_pp.conj() * apk + j_qp.conj() * aqk);
                    a.set(q, k, j_pq.conj() * apk + j_qq.conj() * aqk);
                }
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));
                a.set(p, p, C64::new(a.get(p, p).re, 0.0));
                a.set(q, q, C64::new(a.get(q, q).re, 0.0));
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * j_pp + vkq * j_qp);
                    v.set(k, q, vkp * j_pq + vkq * j_qq);
                }
            }
        }
    }
    let values = (0..n).map(|i| a.get(i, i).re).collect();
    (values, v)
}

/// Diagonalizes a dense unitary through `H_c = (e^{-ic} U + e^{ic} U*) / 2`
/// for a seeded random phase `c`; eigenphases come from Rayleigh quotients.
pub fn recover_spectral(u: &DenseMatrix, seed: u64) -> Result<SpectralForm> {
    let op = UnitaryOperator::dense(u.clone())?;
    let report = op.verify_unitary(1, seed);
    if !report.pass {
        return Err(Error::InvalidArgument(format!(
            "matrix is not unitary (residual {:.3e})",
            report.max_residual
        )));
    }
    let n = u.dim();
    let ua = u.adjoint();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = (0usize, f64::INFINITY);
    for _ in 0..MAX_ATTEMPTS {
        let c: f64 = rng.random_range(0.0..TAU);
        let rot = C64::from_polar(1.0, -c);
        let h = DenseMatrix::from_fn(n, |i, j| {
            0.5 * (rot * u.get(i, j) + rot.conj() * ua.get(i, j))
        });
        let (_, vecs) = hermitian_eigen(&h);
        let mut phases = Vec::with_capacity(n);
        worst = (0, 0.0);
        for j in 0..n {
            let vj = vecs.column(j);
            let uv = u.matvec(&vj);
            let rq = inner_slices(&uv, &vj);
            let lambda = C64::from_polar(1.0, rq.arg());
            let res = norm(
                &uv.iter()
                    .zip(&vj)
                    .map(|(a, b)| a - lambda * b)
                    .collect::<Vec<_>>(),
            );
            if res.is_nan() || res > worst.1 {
                worst = (j, res);
            }
            phases.push(rq.arg());
        }
        if worst.1 <= EIGEN_RESIDUAL_TOL {
            return SpectralForm::new(phases, vecs);
        }
        log::debug!(
            "spectral recovery attempt rejected: column {} residual {:.3e}",
            worst.0,
            worst.1
        );
    }
    Err(Error::SpectralResidual {
        column: worst.0,
        residual: worst.1,
        attempts: MAX_ATTEMPTS,
    })
}

/// `V diag(f(e^{i theta_j})) V* v`.
pub fn exact_f_of_u(f: &CircleFunction, s: &SpectralForm, v: &ComplexVec) -> Result<ComplexVec> {
    check_dim(s, v)?;
    let vm = s.vectors();
    let coords = vm.adjoint_matvec(v.entries());
    let scaled: Vec<C64> = coords
        .iter()
        .zip(s.phases())
        .map(|(w, th)| Ok(w * f.eval(C64::from_polar(1.0, *th))?))
        .collect::<Result<_>>()?;
    ComplexVec::new(vm.matvec(&scaled)).map_err(|_| Error::NonFinite("f(U) v"))
}

/// `sum_j f(e^{i theta_j}) (V* x)_j conj((V* y)_j)`: the atomic spectral
/// measure of `(x, y)` integrated against `f`.
pub fn exact_functional(
    f: &CircleFunction,
    s: &SpectralForm,
    x: &ComplexVec,
    y: &ComplexVec,
) -> Result<C64> {
    check_dim(s, x)?;
    check_dim(s, y)?;
    let cx = s.vectors().adjoint_matvec(x.entries());
    let cy = s.vectors().adjoint_matvec(y.entries());
    let terms: Vec<C64> = s
        .phases()
        .iter()
        .zip(cx.iter().zip(&cy))
        .map(|(th, (a, b))| Ok(f.eval(C64::from_polar(1.0, *th))? * a * b.conj()))
        .collect::<Result<_>>()?;
    Ok(compensated_sum(terms))
}

fn check_dim(s: &SpectralForm, v: &ComplexVec) -> Result<()> {
    if s.dim() != v.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            found: v.dim(),
        });
    }
    Ok(())
}

/// Largest circular distance in a greedy matching of two phase multisets.
pub fn phase_multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let circ = |x: f64, y: f64| {
        let d = (x - y).rem_euclid(TAU);
        d.min(TAU - d)
    };
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for &x in a {
        let (idx, d) = b
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, &y)| (i, circ(x, y)))
            .fold((usize::MAX, f64::INFINITY), |acc, c| {
                if c.1 < acc.1 {
                    c
                } else {
                    acc
                }
            });
        if idx == usize::MAX {
            return f64::INFINITY;
        }
        used[idx] = true;
        worst = worst.max(d);
    }
    worst
}
