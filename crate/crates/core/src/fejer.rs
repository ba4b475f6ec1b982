//! Fejér weights and kernel, equispaced circle grids, Fourier coefficients and
//! Fejér means of circle functions.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::funcexpr::CircleFunction;
use crate::linalg::{compensated_sum, C64};

/// Default grid size for an order-`n` object: alias-free on the band `|k| <= n`
/// and fine enough to resolve smooth functions.
pub fn default_grid_size(order: usize) -> usize {
    (2 * order + 2).max(256)
}

/// Smallest grid that `sup_error` accepts for order `n`.
pub fn min_fine_grid_size(order: usize) -> usize {
    (4 * order).max(1024)
}

fn require_grid(m: usize, order: usize) -> Result<()> {
    let required = 2 * order + 2;
    if m < required {
        return Err(Error::GridTooSmall { m, order, required });
    }
    Ok(())
}

/// Weights `w_k = 1 - |k|/(N+1)` for `k = -N..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FejerWeights {
    order: usize,
    weights: Vec<f64>,
}

impl FejerWeights {
    pub fn new(order: usize) -> Self {
        let denom = (order + 1) as f64;
        let weights = (-(order as i64)..=order as i64)
            .map(|k| 1.0 - k.unsigned_abs() as f64 / denom)
            .collect();
        FejerWeights { order, weights }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `w_k`, zero outside the band.
    pub fn get(&self, k: i64) -> f64 {
        if k.unsigned_abs() as usize > self.order {
            0.0
        } else {
            self.weights[(k + self.order as i64) as usize]
        }
    }

    /// Weights ordered `k = -N..=N`.
    pub fn as_slice(&self) -> &[f64] {
        &self.weights
    }
}

pub fn fejer_weights(order: usize) -> FejerWeights {
    FejerWeights::new(order)
}

/// `K_N(tau) = (1/(N+1)) (sin((N+1)tau/2) / sin(tau/2))^2`.
pub fn fejer_kernel(order: usize, tau: f64) -> f64 {
    let n1 = (order + 1) as f64;
    let half = 0.5 * tau;
    let s = half.sin();
    if s.abs() < 1e-8 {
        // near tau = 2 pi m, expand around the nearest multiple
        let m = (tau / TAU).round();
        let d = tau - m * TAU;
        return fejer_kernel_series(order, d);
    }
    let r = (n1 * half).sin() / s;
    r * r / n1
}

/// Direct sum `1 + 2 sum_{k=1}^N w_k cos(k tau)`; used near the removable singularity.
fn fejer_kernel_series(order: usize, tau: f64) -> f64 {
    let n1 = (order + 1) as f64;
    let mut acc = 1.0;
    for k in 1..=order {
        acc += 2.0 * (1.0 - k as f64 / n1) * (k as f64 * tau).cos();
    }
    acc
}

/// Equispaced nodes `t_j = 2 pi j / M`, `j = 0..M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CircleGrid {
    m: usize,
}

impl CircleGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidArgument(
                "grid must have at least one node".into(),
            ));
        }
        Ok(CircleGrid { m })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    pub fn node(&self, j: usize) -> f64 {
        TAU * j as f64 / self.m as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(|j| self.node(j))
    }

    /// `e^{i t_j}`.
    pub fn points(&self) -> impl Iterator<Item = C64> + '_ {
        (0..self.m).map(|j| self.root(j as i64))
    }

    /// `e^{2 pi i r / M}` with `r` reduced mod `M` first, so that powers of the
    /// root are exact table lookups.
    pub fn root(&self, r: i64) -> C64 {
        let r = r.rem_euclid(self.m as i64) as f64;
        C64::from_polar(1.0, TAU * r / self.m as f64)
    }

    fn root_table(&self) -> Vec<C64> {
        (0..self.m as i64).map(|r| self.root(r)).collect()
    }
}

/// Fourier coefficients `f^(k)`, `k = -N..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTable {
    order: usize,
    coeffs: Vec<C64>,
}

impl FourierTable {
    pub fn new(order: usize, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != 2 * order + 1 {
            return Err(Error::DimensionMismatch {
                expected: 2 * order + 1,
                found: coeffs.len(),
            });
        }
        Ok(FourierTable { order, coeffs })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, k: i64) -> C64 {
        if k.unsigned_abs() as usize > self.order {
            C64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + self.order as i64) as usize]
        }
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        -(self.order as i64)..=self.order as i64
    }

    /// `w_k f^(k)` for `k = -N..=N`, the coefficients of the Fejér mean.
    pub fn fejer_damped(&self) -> Vec<C64> {
        let w = FejerWeights::new(self.order);
        self.coeffs
            .iter()
            .zip(w.as_slice())
            .map(|(c, w)| c * w)
            .collect()
    }
}

/// Discrete Fourier coefficients from samples on an equispaced grid:
/// `f^(k) = (1/M) sum_j f(t_j) e^{-i k t_j}`.
pub fn fourier_coeffs_from_samples(samples: &[C64], order: usize) -> Result<FourierTable> {
    let grid = CircleGrid::new(samples.len())?;
    require_grid(grid.size(), order)?;
    let m = grid.size() as i64;
    let roots = grid.root_table();
    let scale = 1.0 / m as f64;
    let coeffs = (-(order as i64)..=order as i64)
        .map(|k| {
            let acc = compensated_sum(
                samples
                    .iter()
                    .enumerate()
                    .map(|(j, f)| f * roots[(-k * j as i64).rem_euclid(m) as usize]),
            );
            acc * scale
        })
        .collect();
    FourierTable::new(order, coeffs)
}

/// Fourier coefficients of `f` for `|k| <= N` from `M >= 2N+2` equispaced samples.
pub fn fourier_coeffs(f: &CircleFunction, order: usize, m: usize) -> Result<FourierTable> {
    require_grid(m, order)?;
    let grid = CircleGrid::new(m)?;
    let samples = f.sample(&grid)?;
    fourier_coeffs_from_samples(&samples, order)
}

/// Evaluates `sum_k c_k e^{i k t_j}` on every grid node, `c` indexed `k = -N..=N`.
pub fn eval_trig_on_grid(coeffs: &[C64], grid: &CircleGrid) -> Vec<C64> {
    let order = (coeffs.len() / 2) as i64;
    let m = grid.size() as i64;
    let roots = grid.root_table();
    (0..m)
        .map(|j| {
            compensated_sum(
                coeffs
                    .iter()
                    .zip(-order..=order)
                    .map(|(c, k)| c * roots[(k * j).rem_euclid(m) as usize]),
            )
        })
        .collect()
}

/// Fejér mean `sigma_N f` sampled on the grid; coefficients come from the same grid.
pub fn fejer_mean(f: &CircleFunction, order: usize, grid: &CircleGrid) -> Result<Vec<C64>> {
    let table = fourier_coeffs(f, order, grid.size())?;
    Ok(eval_trig_on_grid(&table.fejer_damped(), grid))
}

/// `max_j |sigma_N f(t_j) - f(e^{i t_j})|` on a fine grid of at least
/// `max(4N, 1024)` nodes.
pub fn sup_error(f: &CircleFunction, order: usize, fine_grid: &CircleGrid) -> Result<f64> {
    let required = min_fine_grid_size(order);
    if fine_grid.size() < required {
        return Err(Error::GridTooSmall {
            m: fine_grid.size(),
            order,
            required,
        });
    }
    let samples = f.sample(fine_grid)?;
    let table = fourier_coeffs_from_samples(&samples, order)?;
    let mean = eval_trig_on_grid(&table.fejer_damped(), fine_grid);
    Ok(mean
        .iter()
        .zip(&samples)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max))
}

/// [`sup_error`] on the default fine grid for order `n`.
pub fn sup_error_default(f: &CircleFunction, order: usize) -> Result<f64> {
    sup_error(f, order, &CircleGrid::new(min_fine_grid_size(order))?)
}
