//! The Fejér functional `F^N_{x,y}(f)`, the operator approximant
//! `(sigma_N f)(U) v`, spectral density estimates and the residuals of the
//! multiplicative and adjoint laws.
//!
//! `F^N_{x,y}(f)` is computed on two independent routes:
//!
//! * coefficient path: `sum_k w_k f^(k) <U^k x, y>`;
//! * quadrature path: `(1/(N+1)) (1/M) sum_j <T_N(t_j) x, T_N(t_j) y> f(e^{i t_j})`.
//!
//! With the same grid they agree up to rounding (discrete Parseval).

use std::f64::consts::TAU;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::fejer::{
    default_grid_size, fourier_coeffs, fourier_coeffs_from_samples, sup_error_default, CircleGrid,
    FejerWeights, FourierTable,
};
use crate::funcexpr::CircleFunction;
use crate::io::{fmt_f64, JsonObject};
use crate::linalg::{
    compensated_sum, inner_slices, ComplexVec, SpectralForm, UnitaryOperator, C64,
};
use crate::moments::{moment_table_streaming, power_orbit, synthesize_with_phases, PowerOrbit};
use crate::oracle::exact_functional;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalPath {
    Coefficient,
    Quadrature,
}

impl EvalPath {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalPath::Coefficient => "coefficient",
            EvalPath::Quadrature => "quadrature",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionalResult {
    pub order: usize,
    pub value: C64,
    /// `sup_error(f, N) ||x|| ||y||`.
    pub error_bound: f64,
    pub oracle_gap: Option<f64>,
    pub path: EvalPath,
    /// Grid used for coefficients or quadrature.
    pub grid_size: usize,
    /// `max |f|` over that grid.
    pub max_abs_f: f64,
    pub x_norm: f64,
    pub y_norm: f64,
}

impl FunctionalResult {
    /// `|F^N(f)| <= ||x|| ||y|| max_grid |f|`, with slack `tol`.
    pub fn satisfies_norm_bound(&self, tol: f64) -> bool {
        self.value.norm() <= self.x_norm * self.y_norm * self.max_abs_f + tol
    }

    /// `{"N":..,"value":{"re":..,"im":..},"error_bound":..,"oracle_gap":..|null,"path":..}`
    pub fn to_json(&self) -> String {
        JsonObject::new()
            .integer("N", self.order as i64)
            .complex("value", self.value)
            .number("error_bound", self.error_bound)
            .opt_number("oracle_gap", self.oracle_gap)
            .string("path", self.path.as_str())
            .finish()
    }
}

fn check_dims(u: &UnitaryOperator, vs: &[&ComplexVec]) -> Result<()> {
    for v in vs {
        if v.dim() != u.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                found: v.dim(),
            });
        }
    }
    Ok(())
}

fn require_grid(m: usize, order: usize) -> Result<()> {
    let required = 2 * order + 2;
    if m < required {
        return Err(Error::GridTooSmall { m, order, required });
    }
    Ok(())
}

fn max_abs(values: &[C64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Coefficient-path value and `max |f|` on the `m`-node grid.
fn coefficient_value(
    f: &CircleFunction,
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
    m: usize,
) -> Result<(C64, f64)> {
    check_dims(u, &[x, y])?;
    require_grid(m, order)?;
    let samples = f.sample(&CircleGrid::new(m)?)?;
    let table = fourier_coeffs_from_samples(&samples, order)?;
    let moments = moment_table_streaming(u, x, y, order)?;
    let w = FejerWeights::new(order);
    let value = compensated_sum(
        table
            .indices()
            .map(|k| w.get(k) * table.get(k) * moments.get(k)),
    );
    Ok((value, max_abs(&samples)))
}

/// Coefficient-path value alone on an `m`-node grid, without the error bound.
pub fn functional_value(
    f: &CircleFunction,
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
    m: usize,
) -> Result<C64> {
    Ok(coefficient_value(f, u, x, y, order, m)?.0)
}

/// `F^N_{x,y}(f)` by the coefficient path on the default grid `max(2N+2, 256)`.
pub fn functional_coeff(
    f: &CircleFunction,
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
) -> Result<FunctionalResult> {
    functional_coeff_on_grid(f, u, x, y, order, default_grid_size(order))
}

/// Coefficient path with Fourier coefficients taken from an `m`-node grid.
pub fn functional_coeff_on_grid(
    f: &CircleFunction,
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
    m: usize,
) -> Result<FunctionalResult> {
    let (value, max_abs_f) = coefficient_value(f, u, x, y, order, m)?;
    finish(f, x, y, order, value, EvalPath::Coefficient, m, max_abs_f)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    f: &CircleFunction,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
    value: C64,
    path: EvalPath,
    grid_size: usize,
    max_abs_f: f64,
) -> Result<FunctionalResult> {
    let (x_norm, y_norm) = (x.norm(), y.norm());
    Ok(FunctionalResult {
        order,
        value,
        error_bound: sup_error_default(f, order)? * x_norm * y_norm,
        oracle_gap: None,
        path,
        grid_size,
        max_abs_f,
        x_norm,
        y_norm,
    })
}

/// `F^N_{x,y}(f)` by trapezoid quadrature of `<T_N(t)x, T_N(t)y> f(e^{it})`.
pub fn functional_quad(
    f: &CircleFunction,
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
    m: usize,
) -> Result<FunctionalResult> {
    check_dims(u, &[x, y])?;
    require_grid(m, order)?;
    let grid = CircleGrid::new(m)?;
    let samples = f.sample(&grid)?;
    let ox = power_orbit(u, x, order)?;
    let oy = power_orbit(u, y, order)?;
    let d = u.dim();
    let terms = (0..m).map(|j| {
        // e^{-i t_j n}, n = 0..=N
        let phases: Vec<C64> = (0..=order as i64)
            .map(|n| grid.root(-(n * j as i64)))
            .collect();
        let tx = synthesize_with_phases(&ox, &phases, d);
        let ty = synthesize_with_phases(&oy, &phases, d);
        inner_slices(tx.entries(), ty.entries()) * samples[j]
    });
    let value = compensated_sum(terms.collect::<Vec<_>>()) / ((order + 1) as f64 * m as f64);
    finish(
        f,
        x,
        y,
        order,
        value,
        EvalPath::Quadrature,
        m,
        max_abs(&samples),
    )
}

/// A trigonometric polynomial `p(e^{it}) = sum_{|k|<=d} c_k e^{ikt}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPolynomial {
    degree: usize,
    coeffs: Vec<C64>,
}

impl TrigPolynomial {
    /// Coefficients ordered `k = -d..=d`; the length must be odd.
    pub fn new(coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "trigonometric polynomial needs an odd number of coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::NonFinite("polynomial coefficients"));
        }
        Ok(TrigPolynomial {
            degree: coeffs.len() / 2,
            coeffs,
        })
    }

    /// Builds from `(k, c_k)` pairs; unspecified coefficients are zero.
    pub fn from_terms(terms: &[(i64, C64)]) -> Result<Self> {
        let degree = terms
            .iter()
            .map(|(k, _)| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0);
        let mut coeffs = vec![C64::new(0.0, 0.0); 2 * degree + 1];
        for (k, c) in terms {
            coeffs[(k + degree as i64) as usize] += c;
        }
        Self::new(coeffs)
    }

    /// `sigma_N f` as an explicit polynomial of degree `N`.
    pub fn fejer_mean_of(f: &CircleFunction, order: usize) -> Result<Self> {
        let table = fourier_coeffs(f, order, default_grid_size(order))?;
        Self::new(table.fejer_damped())
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, k: i64) -> C64 {
        if k.unsigned_abs() as usize > self.degree {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.degree as i64) as usize]
        }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn eval_at(&self, t: f64) -> C64 {
        let d = self.degree as i64;
        compensated_sum((-d..=d).map(|k| self.coeff(k) * C64::from_polar(1.0, k as f64 * t)))
    }

    pub fn max_abs_on_grid(&self, grid: &CircleGrid) -> f64 {
        crate::fejer::eval_trig_on_grid(&self.coeffs, grid)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

fn combine_orbit(orbit: &PowerOrbit, coeffs: &[C64]) -> Result<ComplexVec> {
    let n = orbit.order() as i64;
    debug_assert_eq!(coeffs.len(), orbit.vectors().len());
    let out: Vec<C64> = (0..orbit.dim())
        .map(|i| compensated_sum((-n..=n).zip(coeffs).map(|(k, c)| c * orbit.get(k)[i])))
        .collect();
    ComplexVec::new(out).map_err(|_| Error::NonFinite("operator combination"))
}

/// `p(U) v = sum_k c_k U^k v`, exact (no damping).
pub fn apply_trig_poly(
    p: &TrigPolynomial,
    u: &UnitaryOperator,
    v: &ComplexVec,
) -> Result<ComplexVec> {
    let orbit = power_orbit(u, v, p.degree())?;
    combine_orbit(&orbit, p.coeffs())
}

/// `(sigma_N f)(U) v = sum_k w_k f^(k) U^k v`.
pub fn fejer_apply(
    f: &CircleFunction,
    u: &UnitaryOperator,
    v: &ComplexVec,
    order: usize,
) -> Result<ComplexVec> {
    let orbit = power_orbit(u, v, order)?;
    fejer_apply_with_orbit(f, &orbit)
}

/// [`fejer_apply`] reusing an existing orbit.
pub fn fejer_apply_with_orbit(f: &CircleFunction, orbit: &PowerOrbit) -> Result<ComplexVec> {
    let order = orbit.order();
    let table: FourierTable = fourier_coeffs(f, order, default_grid_size(order))?;
    combine_orbit(orbit, &table.fejer_damped())
}

/// Samples of `d_N(t) = (1/2pi) sum_k w_k m_k e^{-ikt}`, the Fejér smoothing
/// of the spectral measure of `(x, y)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityEstimate {
    pub order: usize,
    pub grid: CircleGrid,
    pub values: Vec<C64>,
    /// `(2pi/M) sum_j d_N(t_j)`.
    pub total_mass: C64,
}

impl DensityEstimate {
    pub fn min_real(&self) -> f64 {
        self.values
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Rows `t,re,im` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,re,im\n");
        for (t, v) in self.grid.nodes().zip(&self.values) {
            let _ = writeln!(out, "{},{},{}", fmt_f64(t), fmt_f64(v.re), fmt_f64(v.im));
        }
        out
    }
}

pub fn density(
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
    grid: &CircleGrid,
) -> Result<DensityEstimate> {
    check_dims(u, &[x, y])?;
    require_grid(grid.size(), order)?;
    let moments = moment_table_streaming(u, x, y, order)?;
    let w = FejerWeights::new(order);
    let n = order as i64;
    let m = grid.size() as i64;
    let coeffs: Vec<C64> = (-n..=n).map(|k| w.get(k) * moments.get(k) / TAU).collect();
    let values: Vec<C64> = (0..m)
        .map(|j| compensated_sum((-n..=n).zip(&coeffs).map(|(k, c)| c * grid.root(-k * j))))
        .collect();
    let total_mass = compensated_sum(values.iter().copied()) * (TAU / m as f64);
    Ok(DensityEstimate {
        order,
        grid: *grid,
        values,
        total_mass,
    })
}

/// `|F^N_{x,y}(conj f) - conj(F^N_{y,x}(f))|`; zero up to rounding at every `N`.
pub fn adjoint_residual(
    f: &CircleFunction,
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
) -> Result<f64> {
    let m = default_grid_size(order);
    let (lhs, _) = coefficient_value(&f.conj(), u, x, y, order, m)?;
    let (rhs, _) = coefficient_value(f, u, y, x, order, m)?;
    Ok((lhs - rhs.conj()).norm())
}

/// `|F^N_{x,y}(f g) - <(sigma_N g)(U) x, (sigma_N conj f)(U) y>|`.
///
/// Nonzero at finite `N`; it vanishes only in the limit.
pub fn product_residual(
    f: &CircleFunction,
    g: &CircleFunction,
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
) -> Result<f64> {
    let (lhs, _) = coefficient_value(&f.mul(g), u, x, y, order, default_grid_size(order))?;
    let gx = fejer_apply(g, u, x, order)?;
    let fy = fejer_apply(&f.conj(), u, y, order)?;
    let rhs = inner_slices(gx.entries(), fy.entries());
    Ok((lhs - rhs).norm())
}

/// Coefficient-path values along increasing orders, with the exact gap
/// `|F^N(f) - <f(U)x, y>|` when a spectral form is supplied.
pub fn convergence_sweep(
    f: &CircleFunction,
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    orders: &[usize],
    spectral: Option<&SpectralForm>,
) -> Result<Vec<FunctionalResult>> {
    if orders.is_empty() {
        return Err(Error::InvalidArgument("order list is empty".into()));
    }
    if orders.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "order list must be strictly increasing".into(),
        ));
    }
    let exact = spectral.map(|s| exact_functional(f, s, x, y)).transpose()?;
    orders
        .iter()
        .map(|&n| {
            let mut r = functional_coeff(f, u, x, y, n)?;
            r.oracle_gap = exact.map(|e| (r.value - e).norm());
            Ok(r)
        })
        .collect()
}

/// CSV for a sweep: `N,re,im,error_bound,oracle_gap` (empty gap when unavailable).
pub fn sweep_to_csv(rows: &[FunctionalResult]) -> String {
    let mut out = String::from("N,re,im,error_bound,oracle_gap\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.order,
            fmt_f64(r.value.re),
            fmt_f64(r.value.im),
            fmt_f64(r.error_bound),
            r.oracle_gap.map(fmt_f64).unwrap_or_default()
        );
    }
    out
}
