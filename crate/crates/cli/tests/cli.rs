use fejer_cli::run;
use fejer_core::io::{write_matrix_market, write_vector_csv, MatrixMarketLayout};
use fejer_core::oracle::{construct, random_phases};
use fejer_core::{ComplexVec, DenseMatrix, C64};
use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn fejer(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("fejer").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn json(r: &Run) -> Value {
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stdout))
}

#[test]
fn verify_identity() {
    let r = fejer(&["verify", "--generate", "identity", "--dim", "4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert_eq!(v["pass"], true);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-15);
}

#[test]
fn functional_shift_example() {
    let r = fejer(&[
        "functional",
        "--generate",
        "shift",
        "--dim",
        "4",
        "--function",
        "z",
        "--basis",
        "0",
        "--y-basis",
        "1",
        "-N",
        "8",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    for path in ["coefficient", "quadrature"] {
        let re = v[path]["value"]["re"].as_f64().unwrap();
        assert!((re - 8.0 / 9.0).abs() < 1e-14, "{path}: {re}");
        assert_eq!(v[path]["path"], path);
    }
    assert_eq!(v["self_check"], true);
    assert!(v["difference"].as_f64().unwrap() <= v["tolerance"].as_f64().unwrap());
}

#[test]
fn functional_rejects_pole_on_circle() {
    let r = fejer(&[
        "functional",
        "--generate",
        "shift",
        "--dim",
        "4",
        "--function",
        "1/(z-1)",
        "--basis",
        "0",
        "--y-basis",
        "1",
        "-N",
        "8",
    ]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("pole check failed"), "{}", r.stderr);
    assert!(r.stdout.is_empty());
}

#[test]
fn runs_are_byte_identical() {
    let args = [
        "functional",
        "--generate",
        "constructed",
        "--dim",
        "12",
        "--seed",
        "5",
        "--function",
        "exp(z)/(z-(0,3)) + re(z)^2",
        "--random-seed",
        "1",
        "--y-random-seed",
        "2",
        "-N",
        "20",
    ];
    let a = fejer(&args);
    let b = fejer(&args);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    // constructed operators carry their spectrum, so the oracle gap is reported
    assert!(json(&a)["coefficient"]["oracle_gap"].is_f64());
}

#[test]
fn matrix_market_input_and_non_unitary_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let cu = construct(&random_phases(5, 9), 9).unwrap();
    let good = dir.path().join("u.mtx");
    std::fs::write(
        &good,
        write_matrix_market(&cu.dense, MatrixMarketLayout::Coordinate),
    )
    .unwrap();
    let good = good.to_str().unwrap();
    let r = fejer(&["verify", "--matrix", good]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(json(&r)["form"], "dense");

    let r = fejer(&[
        "oracle",
        "--matrix",
        good,
        "--function",
        "z^2",
        "--format",
        "csv",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().count(), 5);

    let scaled = DenseMatrix::from_fn(3, |i, j| {
        if i == j {
            C64::new(1.01, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let bad = dir.path().join("bad.mtx");
    std::fs::write(
        &bad,
        write_matrix_market(&scaled, MatrixMarketLayout::Array),
    )
    .unwrap();
    let bad = bad.to_str().unwrap();
    let r = fejer(&["verify", "--matrix", bad]);
    assert_eq!(r.code, 1);
    assert_eq!(json(&r)["pass"], false);
    let r = fejer(&["moments", "--matrix", bad, "-N", "2"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("not unitary"));

    let real = dir.path().join("real.mtx");
    std::fs::write(
        &real,
        "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n",
    )
    .unwrap();
    let r = fejer(&["verify", "--matrix", real.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("real"), "{}", r.stderr);

    let r = fejer(&[
        "verify",
        "--matrix",
        dir.path().join("missing.mtx").to_str().unwrap(),
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn vector_files_and_dimension_checks() {
    let dir = tempfile::tempdir().unwrap();
    let x = ComplexVec::random_unit(4, 3).unwrap();
    let xp = dir.path().join("x.csv");
    std::fs::write(&xp, write_vector_csv(&x)).unwrap();
    let r = fejer(&[
        "apply",
        "--generate",
        "random-diagonal",
        "--dim",
        "4",
        "--x",
        xp.to_str().unwrap(),
        "--function",
        "one",
        "-N",
        "3",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let back = fejer_core::io::parse_vector_csv(&r.stdout).unwrap();
    assert!(back.max_abs_diff(&x) < 1e-14);

    let r = fejer(&[
        "apply",
        "--generate",
        "shift",
        "--dim",
        "5",
        "--x",
        xp.to_str().unwrap(),
        "--function",
        "z",
        "-N",
        "3",
    ]);
    assert_eq!(r.code, 1);

    let garbage = dir.path().join("g.csv");
    std::fs::write(&garbage, "1,0\nabc\n").unwrap();
    let r = fejer(&[
        "apply",
        "--generate",
        "shift",
        "--dim",
        "2",
        "--x",
        garbage.to_str().unwrap(),
        "--function",
        "z",
        "-N",
        "1",
    ]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    std::fs::write(
        &cfg,
        r#"{"command":"functional","generate":"shift","dim":4,"function":"z","basis":0,"y_basis":1,"N":8}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let r = fejer(&["functional", "--config", cfg]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!((json(&r)["coefficient"]["value"]["re"].as_f64().unwrap() - 8.0 / 9.0).abs() < 1e-14);

    let r = fejer(&["functional", "--config", cfg, "-N", "2"]);
    assert_eq!(json(&r)["N"], 2);
    assert!((json(&r)["coefficient"]["value"]["re"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-14);

    let r = fejer(&["functional", "--config", cfg, "--y-basis", "0"]);
    assert!(
        json(&r)["coefficient"]["value"]["re"]
            .as_f64()
            .unwrap()
            .abs()
            < 1e-14
    );

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"generate":"shift","dimension":4}"#).unwrap();
    let r = fejer(&["verify", "--config", bad.to_str().unwrap()]);
    assert_eq!(r.code, 2);
}

#[test]
fn moments_density_and_convergence_outputs() {
    let r = fejer(&[
        "moments",
        "--generate",
        "shift",
        "--dim",
        "4",
        "--basis",
        "0",
        "--y-basis",
        "1",
        "-N",
        "5",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(rows[0], "k,re,im");
    assert_eq!(rows.len(), 12);
    // m_k = 1 iff k = 1 mod 4
    for row in &rows[1..] {
        let mut parts = row.split(',');
        let k: i64 = parts.next().unwrap().parse().unwrap();
        let re: f64 = parts.next().unwrap().parse().unwrap();
        assert_eq!(re, if k.rem_euclid(4) == 1 { 1.0 } else { 0.0 }, "k={k}");
    }

    let r = fejer(&[
        "density",
        "--generate",
        "dft-phases",
        "--dim",
        "8",
        "--random-seed",
        "2",
        "-N",
        "6",
        "--grid-M",
        "64",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.stdout.lines().count(), 65);
    let r = fejer(&[
        "density",
        "--generate",
        "dft-phases",
        "--dim",
        "8",
        "-N",
        "6",
        "--grid-M",
        "13",
    ]);
    assert_eq!(r.code, 1);

    let r = fejer(&[
        "convergence",
        "--generate",
        "constructed",
        "--dim",
        "8",
        "--function",
        "re_z",
        "--n-list",
        "4,16,64",
        "--format",
        "json",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    let gaps: Vec<f64> = v
        .as_array()
        .unwrap()
        .iter()
        .map(|row| row["oracle_gap"].as_f64().unwrap())
        .collect();
    assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2]);

    let r = fejer(&[
        "convergence",
        "--generate",
        "shift",
        "--dim",
        "4",
        "--function",
        "z",
        "--n-list",
        "8,4",
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn oracle_on_shift_recovers_exact_value() {
    let r = fejer(&[
        "oracle",
        "--generate",
        "shift",
        "--dim",
        "4",
        "--function",
        "z",
        "--basis",
        "0",
        "--y-basis",
        "1",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = json(&r);
    assert!((v["value"]["re"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert_eq!(v["phases"].as_array().unwrap().len(), 4);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        fejer(&["functional", "--generate", "shift", "--dim", "4", "-N", "2"]).code,
        2
    );
    assert_eq!(
        fejer(&[
            "functional",
            "--generate",
            "shift",
            "--dim",
            "4",
            "--function",
            "z +",
            "-N",
            "2"
        ])
        .code,
        2
    );
    assert_eq!(fejer(&["verify", "--generate", "shift"]).code, 2);
    assert_eq!(
        fejer(&["verify", "--generate", "bogus", "--dim", "3"]).code,
        2
    );
    assert_eq!(
        fejer(&[
            "verify",
            "--generate",
            "shift",
            "--dim",
            "3",
            "--matrix",
            "u.mtx"
        ])
        .code,
        2
    );
    assert_eq!(
        fejer(&[
            "verify",
            "--generate",
            "shift",
            "--dim",
            "3",
            "--basis",
            "0",
            "--random-seed",
            "1"
        ])
        .code,
        2
    );
    assert_eq!(fejer(&["frobnicate"]).code, 2);
    assert_eq!(fejer(&["--help"]).code, 0);
    assert_eq!(
        fejer(&[
            "functional",
            "--generate",
            "shift",
            "--dim",
            "4",
            "--function",
            "z",
            "-N",
            "-3"
        ])
        .code,
        1
    );
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let r = fejer(&[
        "verify",
        "--generate",
        "identity",
        "--dim",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.starts_with("{\"dim\":2,"));
}

#[test]
fn spectral_json_operator_source() {
    let dir = tempfile::tempdir().unwrap();
    let cu = construct(&random_phases(3, 4), 4).unwrap();
    let p = dir.path().join("s.json");
    std::fs::write(&p, fejer_core::io::spectral_form_to_json(&cu.spectral)).unwrap();
    let r = fejer(&[
        "functional",
        "--spectral",
        p.to_str().unwrap(),
        "--function",
        "z",
        "-N",
        "200",
    ]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let gap = json(&r)["coefficient"]["oracle_gap"].as_f64().unwrap();
    assert!(gap < 1.0 / 201.0 + 1e-12);
}

#[test]
fn job_config_fuzz_seeds() {
    let dir =
        std::path::PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus/job_config");
    let mut accepted = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        match fejer_cli::parse_job_config(&text) {
            Ok(job) => {
                accepted += 1;
                let sources = job.check_sources();
                assert_eq!(sources.is_err(), name == "conflict", "{name}");
                let _ = job.orders();
            }
            Err(e) => assert_eq!(name, "unknown_field", "{e}"),
        }
    }
    assert_eq!(accepted, 3);
}
