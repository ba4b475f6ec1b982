//! Acceptance gate. Each criterion runs at its stated tolerance and prints one
//! `PASS`/`FAIL` line; the process exits nonzero if any criterion fails.

use std::f64::consts::TAU;
use std::process::Command;
use std::time::{Duration, Instant};

use fejer_core::calculus::{
    adjoint_residual, convergence_sweep, density, functional_coeff, functional_coeff_on_grid,
    functional_quad, functional_value, product_residual,
};
use fejer_core::fejer::{default_grid_size, fejer_kernel, CircleGrid};
use fejer_core::funcexpr::random_expr;
use fejer_core::io::{write_matrix_market, MatrixMarketLayout};
use fejer_core::moments::{moment_table, power_orbit, DRIFT_WARN};
use fejer_core::oracle::{
    construct, exact_f_of_u, phase_multiset_distance, random_phases, recover_spectral,
    ConstructedUnitary,
};
use fejer_core::{CircleFunction, ComplexVec, UnitaryOperator, C64};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn unitary(d: usize, seed: u64) -> ConstructedUnitary {
    construct(&random_phases(d, seed), seed).expect("construct")
}

/// Seeded vector with norm in `[0.5, 2.3]`.
fn vector(d: usize, seed: u64) -> ComplexVec {
    let scale = 0.5 + 0.45 * (seed % 5) as f64;
    ComplexVec::random_unit(d, seed)
        .unwrap()
        .scale(c(scale, 0.0))
}

/// Builtins exercised by the sweeps; the shifted pole stays off the circle.
fn builtins(seed: u64) -> Vec<CircleFunction> {
    let angle = seed as f64 * 0.7;
    vec![
        CircleFunction::one(),
        CircleFunction::z(),
        CircleFunction::re_z(),
        CircleFunction::exp_z(),
        CircleFunction::inv_shift(C64::from_polar(1.5 + (seed % 3) as f64 * 0.5, angle)).unwrap(),
        CircleFunction::inv_shift(C64::from_polar(0.4, angle)).unwrap(),
        CircleFunction::power(1 + (seed % 4) as i32),
        CircleFunction::power(-2),
    ]
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mass_identity() -> Check {
    let dims = [2usize, 8, 64];
    let orders = [0usize, 1, 7, 64];
    let one = CircleFunction::one();
    let mut worst = 0.0f64;
    for trial in 0..50u64 {
        let d = dims[trial as usize % 3];
        let n = orders[(trial as usize / 3) % 4];
        let u = unitary(d, 100 + trial).operator();
        let x = vector(d, 200 + trial);
        let want = x.norm() * x.norm();
        let q = functional_quad(&one, &u, &x, &x, n, default_grid_size(n))
            .map_err(|e| e.to_string())?;
        let k = functional_coeff(&one, &u, &x, &x, n).map_err(|e| e.to_string())?;
        for (path, v) in [("quadrature", q.value), ("coefficient", k.value)] {
            let rel = (v - c(want, 0.0)).norm() / want;
            worst = worst.max(rel);
            ensure(rel <= 1e-9, || {
                format!("trial {trial} d={d} N={n} {path}: rel err {rel:.3e}")
            })?;
        }
    }
    Ok(format!("50 trials, worst relative error {worst:.2e}"))
}

fn monomial_law() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0usize;
    for n in 0..=64usize {
        let cu = unitary(6, 300 + n as u64);
        let u = cu.operator();
        let x = vector(6, 400 + n as u64);
        let y = vector(6, 500 + n as u64);
        let m = moment_table(&u, &x, &y, n).map_err(|e| e.to_string())?;
        let grid = default_grid_size(n);
        let n_i = n as i64;
        for p in -2 * n_i..=2 * n_i {
            let v = functional_value(&CircleFunction::power(p as i32), &u, &x, &y, n, grid)
                .map_err(|e| e.to_string())?;
            let want = if p.abs() <= n_i {
                m.get(p) * (1.0 - p.abs() as f64 / (n + 1) as f64)
            } else {
                c(0.0, 0.0)
            };
            let err = (v - want).norm();
            worst = worst.max(err);
            count += 1;
            ensure(err <= 1e-10, || format!("N={n} n={p}: error {err:.3e}"))?;
        }
    }
    Ok(format!("{count} (N, n) pairs, worst error {worst:.2e}"))
}

fn norm_bound() -> Check {
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for trial in 0..200u64 {
        let d = [3usize, 8, 20][trial as usize % 3];
        let n = [0usize, 2, 9, 33][(trial as usize / 3) % 4];
        let f = if trial % 2 == 0 {
            let b = builtins(trial);
            b[(trial as usize / 2) % b.len()].clone()
        } else {
            CircleFunction::from_expr(random_expr(trial, 4))
        };
        let u = unitary(d, 600 + trial).operator();
        let x = vector(d, 700 + trial);
        let y = vector(d, 800 + trial);
        let r = functional_coeff(&f, &u, &x, &y, n).map_err(|e| e.to_string())?;
        let bound = r.x_norm * r.y_norm * r.max_abs_f;
        if !r.satisfies_norm_bound(1e-9) {
            violations += 1;
        }
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(r.value.norm() / bound);
        }
    }
    ensure(violations == 0, || {
        format!("{violations} violations of 200")
    })?;
    Ok(format!(
        "200 trials, 0 violations, max |F|/bound {worst_ratio:.3}"
    ))
}

fn path_equivalence() -> Check {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (i, &d) in [1usize, 8, 64].iter().enumerate() {
        for &n in &[0usize, 1, 7, 32, 128] {
            let seed = 900 + (10 * i + n) as u64;
            let u = unitary(d, seed).operator();
            let x = vector(d, seed + 1);
            let y = vector(d, seed + 2);
            let m = 2 * n + 2;
            for f in builtins(seed) {
                let a =
                    functional_coeff_on_grid(&f, &u, &x, &y, n, m).map_err(|e| e.to_string())?;
                let b = functional_quad(&f, &u, &x, &y, n, m).map_err(|e| e.to_string())?;
                let scale = x.norm() * y.norm() * a.max_abs_f.max(f64::MIN_POSITIVE);
                let rel = (a.value - b.value).norm() / scale;
                worst = worst.max(rel);
                count += 1;
                ensure(rel <= 1e-9, || {
                    format!("d={d} N={n} f={f}: rel diff {rel:.3e}")
                })?;
            }
        }
    }
    Ok(format!(
        "{count} cases at M = 2N+2, worst relative difference {worst:.2e}"
    ))
}

fn oracle_convergence() -> Check {
    let fs = ["re_z", "exp_z", "1/(z-2)"];
    let orders = [8usize, 32, 128, 512];
    let mut worst_ratio = 0.0f64;
    for src in fs {
        let f = CircleFunction::resolve(src).map_err(|e| e.to_string())?;
        for seed in [11u64, 12, 13] {
            let cu = unitary(16, seed);
            let u = cu.operator();
            let x = vector(16, seed + 50);
            let y = vector(16, seed + 60);
            let rows = convergence_sweep(&f, &u, &x, &y, &orders, Some(&cu.spectral))
                .map_err(|e| e.to_string())?;
            for r in &rows {
                let gap = r.oracle_gap.unwrap();
                ensure(gap <= r.error_bound + 1e-8, || {
                    format!(
                        "f={src} seed={seed} N={}: gap {gap:.3e} > bound {:.3e}",
                        r.order, r.error_bound
                    )
                })?;
            }
            let first = rows[0].oracle_gap.unwrap();
            let last = rows[3].oracle_gap.unwrap();
            let ratio = last / first;
            worst_ratio = worst_ratio.max(ratio);
            ensure(last <= 0.3 * first, || {
                format!("f={src} seed={seed}: gap(512)/gap(8) = {ratio:.3}")
            })?;
        }
    }
    Ok(format!(
        "9 sweeps within bound, worst gap(512)/gap(8) = {worst_ratio:.4}"
    ))
}

fn trig_poly_defect() -> Check {
    let mut worst = 0.0f64;
    let cu = unitary(12, 21);
    let u = cu.operator();
    let x = vector(12, 22);
    let y = vector(12, 23);
    for n in [1i32, 3] {
        let f = CircleFunction::power(n);
        let m_n = moment_table(&u, &x, &y, n as usize)
            .map_err(|e| e.to_string())?
            .get(n as i64);
        let rows = convergence_sweep(&f, &u, &x, &y, &[4, 16, 64], Some(&cu.spectral))
            .map_err(|e| e.to_string())?;
        for r in rows {
            let want = n as f64 / (r.order + 1) as f64 * m_n.norm();
            let err = (r.oracle_gap.unwrap() - want).abs();
            worst = worst.max(err);
            ensure(err <= 1e-10, || {
                format!("n={n} N={}: error {err:.3e}", r.order)
            })?;
        }
    }
    Ok(format!("6 cases, worst error {worst:.2e}"))
}

fn density_checks() -> Check {
    let mut worst_neg = 0.0f64;
    let mut worst_im = 0.0f64;
    for (i, (d, n)) in [(8usize, 0usize), (8, 7), (64, 64), (16, 200)]
        .into_iter()
        .enumerate()
    {
        let u = unitary(d, 30 + i as u64).operator();
        let x = vector(d, 40 + i as u64);
        let grid = CircleGrid::new(default_grid_size(n)).unwrap();
        let e = density(&u, &x, &x, n, &grid).map_err(|e| e.to_string())?;
        let mass = x.norm() * x.norm();
        worst_neg = worst_neg.max(-e.min_real());
        worst_im = worst_im.max(e.max_abs_imag());
        ensure(e.min_real() >= -1e-12, || {
            format!("d={d} N={n}: min density {:.3e}", e.min_real())
        })?;
        ensure(e.max_abs_imag() <= 1e-12, || {
            format!("d={d} N={n}: imag {:.3e}", e.max_abs_imag())
        })?;
        let err = (e.total_mass - c(mass, 0.0)).norm();
        ensure(err <= 1e-9, || format!("d={d} N={n}: mass error {err:.3e}"))?;
    }
    let mut worst_kernel = 0.0f64;
    for (i, n) in [3usize, 20, 100].into_iter().enumerate() {
        let phases = random_phases(9, 50 + i as u64);
        let u = UnitaryOperator::diagonal_phases(phases.clone()).unwrap();
        let x = vector(9, 60 + i as u64);
        let grid = CircleGrid::new(512).unwrap();
        let e = density(&u, &x, &x, n, &grid).map_err(|e| e.to_string())?;
        for (t, v) in grid.nodes().zip(&e.values) {
            let want: f64 = phases
                .iter()
                .enumerate()
                .map(|(j, th)| x[j].norm_sqr() * fejer_kernel(n, t - th))
                .sum::<f64>()
                / TAU;
            let err = (v - c(want, 0.0)).norm();
            worst_kernel = worst_kernel.max(err);
            ensure(err <= 1e-9, || {
                format!("diagonal N={n} t={t:.4}: error {err:.3e}")
            })?;
        }
    }
    Ok(format!(
        "min density >= -{worst_neg:.1e}, imag <= {worst_im:.1e}, diagonal kernel error {worst_kernel:.1e}"
    ))
}

fn adjoint_law() -> Check {
    let mut worst = 0.0f64;
    for trial in 0..100u64 {
        let d = [2usize, 7, 24][trial as usize % 3];
        let n = [0usize, 5, 16, 40][(trial as usize / 3) % 4];
        let f = if trial % 2 == 0 {
            let b = builtins(trial);
            b[(trial as usize / 2) % b.len()].clone()
        } else {
            CircleFunction::from_expr(random_expr(1000 + trial, 4))
        };
        let u = unitary(d, 1100 + trial).operator();
        let x = vector(d, 1200 + trial);
        let y = vector(d, 1300 + trial);
        let r = adjoint_residual(&f, &u, &x, &y, n).map_err(|e| e.to_string())?;
        worst = worst.max(r);
        ensure(r <= 1e-10, || {
            format!("trial {trial} f={f}: residual {r:.3e}")
        })?;
    }
    Ok(format!("100 trials, worst residual {worst:.2e}"))
}

fn product_law() -> Check {
    let mut worst_exact = 0.0f64;
    for trial in 0..20u64 {
        let cu = unitary(10, 1400 + trial);
        let f = CircleFunction::from_expr(random_expr(1500 + trial, 3));
        let g = CircleFunction::from_expr(random_expr(1600 + trial, 3));
        let v = vector(10, 1700 + trial);
        let s = &cu.spectral;
        let lhs = exact_f_of_u(&f.mul(&g), s, &v).map_err(|e| e.to_string())?;
        let rhs = exact_f_of_u(&f, s, &exact_f_of_u(&g, s, &v).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let err = lhs.max_abs_diff(&rhs);
        worst_exact = worst_exact.max(err);
        ensure(err <= 1e-9, || {
            format!("exact product, trial {trial}: {err:.3e}")
        })?;
    }
    let re = CircleFunction::re_z();
    let mut ratios = Vec::new();
    for seed in [71u64, 72, 73] {
        let u = unitary(16, seed).operator();
        let x = vector(16, seed + 10);
        let y = vector(16, seed + 20);
        let r16 = product_residual(&re, &re, &u, &x, &y, 16).map_err(|e| e.to_string())?;
        let r256 = product_residual(&re, &re, &u, &x, &y, 256).map_err(|e| e.to_string())?;
        ensure(r256 < r16, || {
            format!("seed {seed}: residual(256) {r256:.3e} >= residual(16) {r16:.3e}")
        })?;
        ratios.push(r256 / r16);
    }
    let id = UnitaryOperator::identity(4).unwrap();
    let v = ComplexVec::random_unit(4, 80).unwrap();
    let mut worst_closed = 0.0f64;
    for n in [0usize, 1, 4, 16, 64, 256, 1000] {
        let r = product_residual(
            &CircleFunction::z(),
            &CircleFunction::power(-1),
            &id,
            &v,
            &v,
            n,
        )
        .map_err(|e| e.to_string())?;
        let nf = n as f64;
        let want = (2.0 * nf + 1.0) / ((nf + 1.0) * (nf + 1.0));
        let err = (r - want).abs();
        worst_closed = worst_closed.max(err);
        ensure(err <= 1e-10, || {
            format!("identity closed form N={n}: {r} vs {want}")
        })?;
    }
    let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    Ok(format!(
        "exact product err {worst_exact:.1e}, max residual(256)/residual(16) {max_ratio:.3}, closed form err {worst_closed:.1e}"
    ))
}

fn oracle_round_trip() -> Check {
    let mut worst = 0.0f64;
    for d in [4usize, 16, 64] {
        for seed in 0..5u64 {
            let phases = random_phases(d, 90 + seed);
            let cu = construct(&phases, 95 + seed).map_err(|e| e.to_string())?;
            let rec = recover_spectral(&cu.dense, seed).map_err(|e| e.to_string())?;
            let dist = phase_multiset_distance(rec.phases(), &phases);
            worst = worst.max(dist);
            ensure(dist <= 1e-8, || {
                format!("d={d} seed={seed}: phase distance {dist:.3e}")
            })?;
        }
    }
    Ok(format!("15 round trips, worst phase distance {worst:.2e}"))
}

fn performance() -> Check {
    let d = 128;
    let n = 1024;
    let cu = unitary(d, 2024);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("u.mtx");
    std::fs::write(
        &path,
        write_matrix_market(&cu.dense, MatrixMarketLayout::Array),
    )
    .map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_fejer"))
        .args(["apply", "--matrix"])
        .arg(&path)
        .args(["--function", "exp(z)", "--random-seed", "7", "-N", "1024"])
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(out.status.success(), || {
        format!(
            "apply exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    let rows = String::from_utf8_lossy(&out.stdout).lines().count();
    ensure(rows == d, || {
        format!("apply wrote {rows} rows, expected {d}")
    })?;
    ensure(elapsed <= Duration::from_secs(5), || {
        format!("apply took {elapsed:.2?}")
    })?;

    let x = ComplexVec::random_unit(d, 7).unwrap();
    let orbit = power_orbit(&cu.operator(), &x, n).map_err(|e| e.to_string())?;
    ensure(orbit.max_drift() < DRIFT_WARN, || {
        format!("orbit drift {:.3e}", orbit.max_drift())
    })?;
    Ok(format!(
        "apply d={d} N={n} in {elapsed:.2?}, orbit drift {:.1e}",
        orbit.max_drift()
    ))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("mass identity", mass_identity),
        ("monomial law", monomial_law),
        ("norm bound", norm_bound),
        ("path equivalence", path_equivalence),
        ("oracle convergence", oracle_convergence),
        ("trig-poly defect closed form", trig_poly_defect),
        ("density", density_checks),
        ("adjoint law", adjoint_law),
        ("product law decay", product_law),
        ("oracle round trip", oracle_round_trip),
        ("performance sanity", performance),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.2}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail} ({secs:.2}s)", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
