//! Complex vectors, dense square matrices and the unitary operator abstraction.
//!
//! Inner products are linear in the first argument and conjugate-linear in
//! the second: `inner(x, y) = sum_j x_j * conj(y_j)`.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::Index;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Max-entry tolerance for `U*U - I` on dense operators.
pub const DENSE_UNITARITY_TOL: f64 = 1e-10;
/// Tolerance for randomized round-trip checks on matrix-free and diagonal forms.
pub const SAMPLED_UNITARITY_TOL: f64 = 1e-8;

/// Neumaier-compensated sum of complex terms.
pub fn compensated_sum<I: IntoIterator<Item = C64>>(terms: I) -> C64 {
    let mut re = (0.0f64, 0.0f64);
    let mut im = (0.0f64, 0.0f64);
    for z in terms {
        neumaier_step(&mut re, z.re);
        neumaier_step(&mut im, z.im);
    }
    C64::new(re.0 + re.1, im.0 + im.1)
}

/// Neumaier-compensated sum of real terms.
pub fn compensated_sum_real<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = (0.0f64, 0.0f64);
    for x in terms {
        neumaier_step(&mut acc, x);
    }
    acc.0 + acc.1
}

#[inline]
fn neumaier_step(acc: &mut (f64, f64), x: f64) {
    let (sum, comp) = acc;
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

/// Maps an angle in radians onto `[0, 2pi)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// A nonempty vector in `C^d` with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVec(Vec<C64>);

impl ComplexVec {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        if entries
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite("vector entries"));
        }
        Ok(ComplexVec(entries))
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::new(vec![C64::new(0.0, 0.0); dim])
    }

    /// The standard basis vector `e_k` of `C^dim`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidArgument(format!(
                "basis index {k} out of range for dimension {dim}"
            )));
        }
        let mut v = vec![C64::new(0.0, 0.0); dim];
        v[k] = C64::new(1.0, 0.0);
        Self::new(v)
    }

    /// A unit vector with independent standard complex Gaussian entries, normalized.
    pub fn random_unit(dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<C64> = (0..dim)
            .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let v = Self::new(v)?;
        let n = v.norm();
        Ok(v.scale(C64::new(1.0 / n, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        compensated_sum_real(self.0.iter().map(|z| z.norm_sqr())).sqrt()
    }

    pub fn scale(&self, a: C64) -> ComplexVec {
        ComplexVec(self.0.iter().map(|z| z * a).collect())
    }

    pub fn conj(&self) -> ComplexVec {
        ComplexVec(self.0.iter().map(|z| z.conj()).collect())
    }

    /// `self - other`; panics on dimension mismatch.
    pub fn sub(&self, other: &ComplexVec) -> ComplexVec {
        assert_eq!(self.dim(), other.dim());
        ComplexVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Max-entry distance, panics on dimension mismatch.
    pub fn max_abs_diff(&self, other: &ComplexVec) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &ComplexVec) -> f64 {
        self.sub(other).norm()
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl Index<usize> for ComplexVec {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

/// `sum_j x_j * conj(y_j)`.
pub fn inner(x: &ComplexVec, y: &ComplexVec) -> Result<C64> {
    y.check_dim(x.dim())?;
    Ok(inner_slices(x.entries(), y.entries()))
}

pub(crate) fn inner_slices(x: &[C64], y: &[C64]) -> C64 {
    compensated_sum(x.iter().zip(y).map(|(a, b)| a * b.conj()))
}

/// Square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<C64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == j {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        DenseMatrix { n, data }
    }

    pub fn from_row_major(n: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(DenseMatrix { n, data })
    }

    /// The cyclic shift `e_j -> e_{j+1 mod n}`.
    pub fn cyclic_shift(n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i == (j + 1) % n {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.n + j] = value;
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn adjoint(&self) -> DenseMatrix {
        Self::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn mul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = DenseMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| {
                let row = self.row(i);
                let mut acc = C64::new(0.0, 0.0);
                for (a, b) in row.iter().zip(v) {
                    acc += a * b;
                }
                acc
            })
            .collect()
    }

    pub fn adjoint_matvec(&self, v: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.n];
        for (i, vi) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a.conj() * vi;
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |(A* A - I)_{ij}|`.
    pub fn unitarity_residual(&self) -> f64 {
        self.adjoint()
            .mul(self)
            .max_abs_diff(&DenseMatrix::identity(self.n))
    }
}

pub type ApplyFn = Arc<dyn Fn(&[C64]) -> Vec<C64> + Send + Sync>;

/// Representation of a unitary operator on `C^d`.
#[derive(Clone)]
pub enum OperatorForm {
    Dense(DenseMatrix),
    /// Diagonal operator `diag(e^{i theta_j})`, angles normalized to `[0, 2pi)`.
    DiagonalPhases(Vec<f64>),
    MatrixFree {
        forward: ApplyFn,
        adjoint: ApplyFn,
    },
}

impl fmt::Debug for OperatorForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorForm::Dense(m) => f.debug_tuple("Dense").field(m).finish(),
            OperatorForm::DiagonalPhases(t) => f.debug_tuple("DiagonalPhases").field(t).finish(),
            OperatorForm::MatrixFree { .. } => f.write_str("MatrixFree"),
        }
    }
}

/// Which power of `U` a single application uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PowerSign {
    /// `U v`
    Forward,
    /// `U* v`, which equals `U^{-1} v` for unitary `U`.
    Adjoint,
}

#[derive(Clone, Debug)]
pub struct UnitaryOperator {
    dim: usize,
    form: OperatorForm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UnitarityReport {
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl UnitaryOperator {
    /// Wraps a dense matrix. Unitarity is not checked here; see [`Self::verify_unitary`].
    pub fn dense(matrix: DenseMatrix) -> Result<Self> {
        if matrix.dim() == 0 {
            return Err(Error::EmptyVector);
        }
        if !matrix.is_finite() {
            return Err(Error::NonFinite("matrix entries"));
        }
        Ok(UnitaryOperator {
            dim: matrix.dim(),
            form: OperatorForm::Dense(matrix),
        })
    }

    pub fn diagonal_phases(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::EmptyVector);
        }
        if thetas.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("phases"));
        }
        Ok(UnitaryOperator {
            dim: thetas.len(),
            form: OperatorForm::DiagonalPhases(thetas.into_iter().map(normalize_angle).collect()),
        })
    }

    pub fn matrix_free(
        dim: usize,
        forward: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
        adjoint: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        Ok(UnitaryOperator {
            dim,
            form: OperatorForm::MatrixFree {
                forward: Arc::new(forward),
                adjoint: Arc::new(adjoint),
            },
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diagonal_phases(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &OperatorForm {
        &self.form
    }

    /// Dense matrix of the operator, if it has an explicit one (dense or diagonal).
    pub fn to_dense(&self) -> Option<DenseMatrix> {
        match &self.form {
            OperatorForm::Dense(m) => Some(m.clone()),
            OperatorForm::DiagonalPhases(t) => Some(DenseMatrix::from_fn(self.dim, |i, j| {
                if i == j {
                    C64::from_polar(1.0, t[i])
                } else {
                    C64::new(0.0, 0.0)
                }
            })),
            OperatorForm::MatrixFree { .. } => None,
        }
    }

    pub fn apply(&self, v: &ComplexVec, sign: PowerSign) -> Result<ComplexVec> {
        v.check_dim(self.dim)?;
        let out = self.apply_raw(v.entries(), sign);
        if out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: out.len(),
            });
        }
        ComplexVec::new(out).map_err(|_| Error::NonFinite("operator output"))
    }

    pub(crate) fn apply_raw(&self, v: &[C64], sign: PowerSign) -> Vec<C64> {
        match (&self.form, sign) {
            (OperatorForm::Dense(m), PowerSign::Forward) => m.matvec(v),
            (OperatorForm::Dense(m), PowerSign::Adjoint) => m.adjoint_matvec(v),
            (OperatorForm::DiagonalPhases(t), s) => {
                let sgn = if s == PowerSign::Forward { 1.0 } else { -1.0 };
                v.iter()
                    .zip(t)
                    .map(|(z, th)| z * C64::from_polar(1.0, sgn * th))
                    .collect()
            }
            (OperatorForm::MatrixFree { forward, .. }, PowerSign::Forward) => forward(v),
            (OperatorForm::MatrixFree { adjoint, .. }, PowerSign::Adjoint) => adjoint(v),
        }
    }

    /// Dense forms: exact `max |U*U - I|`. Other forms: randomized round-trip
    /// and norm-preservation residuals over `samples` seeded unit vectors.
    pub fn verify_unitary(&self, samples: usize, seed: u64) -> UnitarityReport {
        let (max_residual, tolerance) = match &self.form {
            OperatorForm::Dense(m) => (m.unitarity_residual(), DENSE_UNITARITY_TOL),
            _ => (
                self.sampled_residual(samples.max(1), seed),
                SAMPLED_UNITARITY_TOL,
            ),
        };
        UnitarityReport {
            max_residual,
            tolerance,
            pass: max_residual <= tolerance,
        }
    }

    fn sampled_residual(&self, samples: usize, seed: u64) -> f64 {
        let mut worst = 0.0f64;
        for s in 0..samples {
            let v = match ComplexVec::random_unit(self.dim, seed.wrapping_add(s as u64)) {
                Ok(v) => v,
                Err(_) => return f64::INFINITY,
            };
            let fwd = self.apply_raw(v.entries(), PowerSign::Forward);
            if fwd.len() != self.dim {
                return f64::INFINITY;
            }
            let back = self.apply_raw(&fwd, PowerSign::Adjoint);
            if back.len() != self.dim {
                return f64::INFINITY;
            }
            let round_trip = compensated_sum_real(
                back.iter()
                    .zip(v.entries())
                    .map(|(a, b)| (a - b).norm_sqr()),
            )
            .sqrt();
            let fwd_norm = compensated_sum_real(fwd.iter().map(|z| z.norm_sqr())).sqrt();
            let r = round_trip.max((fwd_norm - 1.0).abs());
            if !r.is_finite() {
                return f64::INFINITY;
            }
            worst = worst.max(r);
        }
        worst
    }
}

/// Eigen-decomposition `U = V diag(e^{i theta}) V*` of a unitary matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralForm {
    phases: Vec<f64>,
    vectors: DenseMatrix,
}

impl SpectralForm {
    /// Validates that `vectors` has orthonormal columns; phases are normalized.
    pub fn new(phases: Vec<f64>, vectors: DenseMatrix) -> Result<Self> {
        if phases.len() != vectors.dim() {
            return Err(Error::DimensionMismatch {
                expected: vectors.dim(),
                found: phases.len(),
            });
        }
        if phases.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFinite("phases"));
        }
        let r = vectors.unitarity_residual();
        if r > DENSE_UNITARITY_TOL || r.is_nan() {
            return Err(Error::InvalidArgument(format!(
                "eigenvector columns are not orthonormal (residual {r:.3e})"
            )));
        }
        Ok(SpectralForm {
            phases: phases.into_iter().map(normalize_angle).collect(),
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.phases.len()
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn vectors(&self) -> &DenseMatrix {
        &self.vectors
    }

    /// `V diag(e^{i theta}) V*`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.dim();
        let v = &self.vectors;
        let scaled =
            DenseMatrix::from_fn(n, |i, j| v.get(i, j) * C64::from_polar(1.0, self.phases[j]));
        scaled.mul(&v.adjoint())
    }
}
