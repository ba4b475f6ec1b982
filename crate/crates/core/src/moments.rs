//! Power orbits `U^k v`, trigonometric moments `m_k = <U^k x, y>` and the
//! synthesized vectors `T_N(t) v = sum_{n=0}^N e^{-itn} U^n v`.

use std::fmt::Write as _;

use log::warn;

use crate::error::{Error, Result};
use crate::linalg::{inner_slices, ComplexVec, PowerSign, UnitaryOperator, C64};

/// Relative norm drift along an orbit above which a warning is logged.
pub const DRIFT_WARN: f64 = 1e-9;
/// Relative norm drift along an orbit above which construction fails.
pub const DRIFT_FAIL: f64 = 1e-6;

/// Tracks `| ||u_k|| - ||v|| | / ||v||` along an orbit.
#[derive(Clone, Copy, Debug)]
struct DriftMonitor {
    reference: f64,
    max_drift: f64,
    warned: bool,
}

impl DriftMonitor {
    fn new(v: &[C64]) -> Self {
        DriftMonitor {
            reference: norm(v),
            max_drift: 0.0,
            warned: false,
        }
    }

    fn observe(&mut self, power: i64, u: &[C64]) -> Result<()> {
        if self.reference == 0.0 {
            return Ok(());
        }
        let drift = (norm(u) - self.reference).abs() / self.reference;
        if drift.is_nan() || drift > DRIFT_FAIL {
            return Err(Error::OrbitDrift { power, drift });
        }
        if drift > DRIFT_WARN && !self.warned {
            warn!("orbit norm drift {drift:.3e} at power {power}");
            self.warned = true;
        }
        self.max_drift = self.max_drift.max(drift);
        Ok(())
    }
}

fn norm(v: &[C64]) -> f64 {
    crate::linalg::compensated_sum_real(v.iter().map(|z| z.norm_sqr())).sqrt()
}

/// `u_k = U^k v` for `k = -N..=N`, with negative powers taken through `U*`.
#[derive(Clone, Debug)]
pub struct PowerOrbit {
    order: usize,
    vectors: Vec<ComplexVec>,
    max_drift: f64,
}

impl PowerOrbit {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.vectors[0].dim()
    }

    /// `U^k v`; panics if `|k| > N`.
    pub fn get(&self, k: i64) -> &ComplexVec {
        assert!(
            k.unsigned_abs() as usize <= self.order,
            "power {k} outside orbit"
        );
        &self.vectors[(k + self.order as i64) as usize]
    }

    /// Orbit vectors ordered `k = -N..=N`.
    pub fn vectors(&self) -> &[ComplexVec] {
        &self.vectors
    }

    /// Largest relative norm deviation observed along the orbit.
    pub fn max_drift(&self) -> f64 {
        self.max_drift
    }
}

/// Builds the orbit with exactly `2N` operator applications.
pub fn power_orbit(u: &UnitaryOperator, v: &ComplexVec, order: usize) -> Result<PowerOrbit> {
    if v.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: v.dim(),
        });
    }
    let mut monitor = DriftMonitor::new(v.entries());
    let mut forward = Vec::with_capacity(order);
    let mut backward = Vec::with_capacity(order);
    let mut cur = v.clone();
    for k in 1..=order {
        cur = u.apply(&cur, PowerSign::Forward)?;
        monitor.observe(k as i64, cur.entries())?;
        forward.push(cur.clone());
    }
    let mut cur = v.clone();
    for k in 1..=order {
        cur = u.apply(&cur, PowerSign::Adjoint)?;
        monitor.observe(-(k as i64), cur.entries())?;
        backward.push(cur.clone());
    }
    let mut vectors = Vec::with_capacity(2 * order + 1);
    vectors.extend(backward.into_iter().rev());
    vectors.push(v.clone());
    vectors.extend(forward);
    Ok(PowerOrbit {
        order,
        vectors,
        max_drift: monitor.max_drift,
    })
}

/// Moments `m_k = <U^k x, y>` for `k = -N..=N`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    order: usize,
    moments: Vec<C64>,
    pub x_id: String,
    pub y_id: String,
    max_drift: f64,
}

impl MomentTable {
    pub fn order(&self) -> usize {
        self.order
    }

    /// `m_k`, zero outside `|k| <= N`.
    pub fn get(&self, k: i64) -> C64 {
        if k.unsigned_abs() as usize > self.order {
            C64::new(0.0, 0.0)
        } else {
            self.moments[(k + self.order as i64) as usize]
        }
    }

    /// Moments ordered `k = -N..=N`.
    pub fn as_slice(&self) -> &[C64] {
        &self.moments
    }

    pub fn max_drift(&self) -> f64 {
        self.max_drift
    }

    pub fn with_labels(mut self, x_id: impl Into<String>, y_id: impl Into<String>) -> Self {
        self.x_id = x_id.into();
        self.y_id = y_id.into();
        self
    }

    /// CSV rows `k,re,im` with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,re,im\n");
        for (k, m) in (-(self.order as i64)..=self.order as i64).zip(&self.moments) {
            let _ = writeln!(
                out,
                "{k},{},{}",
                crate::io::fmt_f64(m.re),
                crate::io::fmt_f64(m.im)
            );
        }
        out
    }
}

/// Moments read off the stored power orbit of `x`.
pub fn moment_table(
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
) -> Result<MomentTable> {
    check_pair(u, x, y)?;
    let orbit = power_orbit(u, x, order)?;
    Ok(moments_from_orbit(&orbit, y))
}

pub fn moments_from_orbit(orbit: &PowerOrbit, y: &ComplexVec) -> MomentTable {
    let moments = orbit
        .vectors()
        .iter()
        .map(|uk| inner_slices(uk.entries(), y.entries()))
        .collect();
    MomentTable {
        order: orbit.order(),
        moments,
        x_id: "x".into(),
        y_id: "y".into(),
        max_drift: orbit.max_drift(),
    }
}

/// Same moments as [`moment_table`], keeping only the running vectors in memory.
pub fn moment_table_streaming(
    u: &UnitaryOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
) -> Result<MomentTable> {
    check_pair(u, x, y)?;
    let mut monitor = DriftMonitor::new(x.entries());
    let mut moments = vec![C64::new(0.0, 0.0); 2 * order + 1];
    moments[order] = inner_slices(x.entries(), y.entries());
    for (sign, dir) in [(1i64, PowerSign::Forward), (-1, PowerSign::Adjoint)] {
        let mut cur = x.clone();
        for k in 1..=order as i64 {
            cur = u.apply(&cur, dir)?;
            monitor.observe(sign * k, cur.entries())?;
            moments[(sign * k + order as i64) as usize] = inner_slices(cur.entries(), y.entries());
        }
    }
    Ok(MomentTable {
        order,
        moments,
        x_id: "x".into(),
        y_id: "y".into(),
        max_drift: monitor.max_drift,
    })
}

fn check_pair(u: &UnitaryOperator, x: &ComplexVec, y: &ComplexVec) -> Result<()> {
    for v in [x, y] {
        if v.dim() != u.dim() {
            return Err(Error::DimensionMismatch {
                expected: u.dim(),
                found: v.dim(),
            });
        }
    }
    Ok(())
}

/// `T_N(t) v = sum_{n=0}^N e^{-itn} u_n`.
pub fn synthesize_t(orbit: &PowerOrbit, t: f64) -> ComplexVec {
    let n = orbit.order() as i64;
    let d = orbit.dim();
    let phases: Vec<C64> = (0..=n)
        .map(|k| C64::from_polar(1.0, -t * k as f64))
        .collect();
    synthesize_with_phases(orbit, &phases, d)
}

pub(crate) fn synthesize_with_phases(orbit: &PowerOrbit, phases: &[C64], d: usize) -> ComplexVec {
    let out: Vec<C64> = (0..d)
        .map(|i| {
            crate::linalg::compensated_sum(
                phases
                    .iter()
                    .enumerate()
                    .map(|(k, p)| p * orbit.get(k as i64)[i]),
            )
        })
        .collect();
    ComplexVec::new(out).expect("finite combination of finite vectors")
}
