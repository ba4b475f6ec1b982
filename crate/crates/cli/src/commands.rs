use std::fmt::Write as _;

use fejer_core::calculus::{
    convergence_sweep, density, fejer_apply, functional_coeff_on_grid, functional_quad,
    sweep_to_csv, FunctionalResult,
};
use fejer_core::fejer::{default_grid_size, CircleGrid};
use fejer_core::io::{fmt_f64, json_array, json_complex, write_vector_csv, JsonObject};
use fejer_core::linalg::OperatorForm;
use fejer_core::moments::moment_table;
use fejer_core::oracle::{exact_f_of_u, exact_functional};
use fejer_core::{inner, ComplexVec, C64};

use crate::source::{self, ResolvedOperator};
use crate::{CliError, Command, JobConfig, Outcome, OutputFormat};

/// Relative tolerance of the coefficient/quadrature self-check.
pub const PATH_SELF_CHECK_TOL: f64 = 1e-9;

pub fn execute(cmd: &Command, job: &JobConfig) -> Result<Outcome, CliError> {
    job.check_sources()?;
    let op = source::operator(job)?;
    if let Command::Verify(_) = cmd {
        return Ok(verify(&op, job.format.unwrap_or(OutputFormat::Json)));
    }
    op.require_unitary()?;
    let (x, y) = source::vectors(job, op.dim())?;
    let fmt = |default| job.format.unwrap_or(default);
    match cmd {
        Command::Verify(_) => unreachable!("handled above"),
        Command::Moments(_) => moments(&op, &x, &y, job.single_order()?, fmt(OutputFormat::Csv)),
        Command::Apply(_) => apply(&op, &x, job, fmt(OutputFormat::Csv)),
        Command::Functional(_) => functional(&op, &x, &y, job, fmt(OutputFormat::Json)),
        Command::Density(_) => density_cmd(&op, &x, &y, job, fmt(OutputFormat::Csv)),
        Command::Convergence(_) => convergence(&op, &x, &y, job, fmt(OutputFormat::Csv)),
        Command::Oracle(_) => oracle(&op, &x, &y, job, fmt(OutputFormat::Json)),
    }
}

fn form_name(op: &ResolvedOperator) -> &'static str {
    match op.op.form() {
        OperatorForm::Dense(_) => "dense",
        OperatorForm::DiagonalPhases(_) => "diagonal",
        OperatorForm::MatrixFree { .. } => "matrix-free",
    }
}

fn verify(op: &ResolvedOperator, format: OutputFormat) -> Outcome {
    let r = op.op.verify_unitary(16, op.seed);
    let text = match format {
        OutputFormat::Json => {
            JsonObject::new()
                .integer("dim", op.dim() as i64)
                .string("form", form_name(op))
                .number("max_residual", r.max_residual)
                .number("tolerance", r.tolerance)
                .boolean("pass", r.pass)
                .finish()
                + "\n"
        }
        OutputFormat::Csv => format!(
            "dim,form,max_residual,tolerance,pass\n{},{},{},{},{}\n",
            op.dim(),
            form_name(op),
            fmt_f64(r.max_residual),
            fmt_f64(r.tolerance),
            r.pass
        ),
    };
    Outcome {
        text,
        failure: (!r.pass).then(|| {
            format!(
                "unitarity residual {:.3e} exceeds {:.1e}",
                r.max_residual, r.tolerance
            )
        }),
    }
}

fn vector_json(v: &ComplexVec) -> String {
    json_array(v.entries().iter().map(|z| json_complex(*z)))
}

fn moments(
    op: &ResolvedOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    order: usize,
    format: OutputFormat,
) -> Result<Outcome, CliError> {
    let table = moment_table(&op.op, x, y, order)?;
    let text = match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => {
            let n = order as i64;
            let rows = (-n..=n).map(|k| {
                let m = table.get(k);
                JsonObject::new()
                    .integer("k", k)
                    .number("re", m.re)
                    .number("im", m.im)
                    .finish()
            });
            JsonObject::new()
                .integer("N", n)
                .number("max_drift", table.max_drift())
                .raw("moments", json_array(rows))
                .finish()
                + "\n"
        }
    };
    Ok(Outcome::ok(text))
}

fn apply(
    op: &ResolvedOperator,
    x: &ComplexVec,
    job: &JobConfig,
    format: OutputFormat,
) -> Result<Outcome, CliError> {
    let f = source::function(job)?;
    let order = job.single_order()?;
    let out = fejer_apply(&f, &op.op, x, order)?;
    let text = match format {
        OutputFormat::Csv => write_vector_csv(&out),
        OutputFormat::Json => {
            JsonObject::new()
                .integer("N", order as i64)
                .string("function", f.description())
                .raw("vector", vector_json(&out))
                .finish()
                + "\n"
        }
    };
    Ok(Outcome::ok(text))
}

fn exact_value(
    op: &ResolvedOperator,
    f: &fejer_core::CircleFunction,
    x: &ComplexVec,
    y: &ComplexVec,
) -> Result<Option<C64>, CliError> {
    op.spectral
        .as_ref()
        .map(|s| exact_functional(f, s, x, y))
        .transpose()
        .map_err(Into::into)
}

fn result_csv_row(out: &mut String, r: &FunctionalResult) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{}",
        r.path.as_str(),
        r.order,
        fmt_f64(r.value.re),
        fmt_f64(r.value.im),
        fmt_f64(r.error_bound),
        r.oracle_gap.map(fmt_f64).unwrap_or_default()
    );
}

fn functional(
    op: &ResolvedOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    job: &JobConfig,
    format: OutputFormat,
) -> Result<Outcome, CliError> {
    let f = source::function(job)?;
    let order = job.single_order()?;
    let m = job.grid_m.unwrap_or_else(|| default_grid_size(order));
    let mut coeff = functional_coeff_on_grid(&f, &op.op, x, y, order, m)?;
    let mut quad = functional_quad(&f, &op.op, x, y, order, m)?;
    if let Some(exact) = exact_value(op, &f, x, y)? {
        coeff.oracle_gap = Some((coeff.value - exact).norm());
        quad.oracle_gap = Some((quad.value - exact).norm());
    }
    let difference = (coeff.value - quad.value).norm();
    let tolerance = PATH_SELF_CHECK_TOL * x.norm() * y.norm() * coeff.max_abs_f;
    let pass = difference <= tolerance;
    let text = match format {
        OutputFormat::Json => {
            JsonObject::new()
                .integer("N", order as i64)
                .string("function", f.description())
                .integer("grid_M", m as i64)
                .raw("coefficient", coeff.to_json())
                .raw("quadrature", quad.to_json())
                .number("difference", difference)
                .number("tolerance", tolerance)
                .boolean("self_check", pass)
                .finish()
                + "\n"
        }
        OutputFormat::Csv => {
            let mut out = String::from("path,N,re,im,error_bound,oracle_gap\n");
            result_csv_row(&mut out, &coeff);
            result_csv_row(&mut out, &quad);
            out
        }
    };
    Ok(Outcome {
        text,
        failure: (!pass).then(|| {
            format!("path self-check failed: difference {difference:.3e} > {tolerance:.3e}")
        }),
    })
}

fn density_cmd(
    op: &ResolvedOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    job: &JobConfig,
    format: OutputFormat,
) -> Result<Outcome, CliError> {
    let order = job.single_order()?;
    let grid = CircleGrid::new(job.grid_m.unwrap_or_else(|| default_grid_size(order)))?;
    let d = density(&op.op, x, y, order, &grid)?;
    let text = match format {
        OutputFormat::Csv => d.to_csv(),
        OutputFormat::Json => {
            let rows = grid.nodes().zip(&d.values).map(|(t, v)| {
                JsonObject::new()
                    .number("t", t)
                    .number("re", v.re)
                    .number("im", v.im)
                    .finish()
            });
            JsonObject::new()
                .integer("N", order as i64)
                .integer("M", grid.size() as i64)
                .complex("total_mass", d.total_mass)
                .raw("values", json_array(rows))
                .finish()
                + "\n"
        }
    };
    Ok(Outcome::ok(text))
}

fn convergence(
    op: &ResolvedOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    job: &JobConfig,
    format: OutputFormat,
) -> Result<Outcome, CliError> {
    let f = source::function(job)?;
    let orders = job.orders()?;
    let rows =
        convergence_sweep(&f, &op.op, x, y, &orders, op.spectral.as_ref()).map_err(
            |e| match e {
                fejer_core::Error::InvalidArgument(msg) => CliError::Usage(msg),
                other => other.into(),
            },
        )?;
    let text = match format {
        OutputFormat::Csv => sweep_to_csv(&rows),
        OutputFormat::Json => json_array(rows.iter().map(FunctionalResult::to_json)) + "\n",
    };
    Ok(Outcome::ok(text))
}

fn oracle(
    op: &ResolvedOperator,
    x: &ComplexVec,
    y: &ComplexVec,
    job: &JobConfig,
    format: OutputFormat,
) -> Result<Outcome, CliError> {
    let f = source::function(job)?;
    let s = op.spectral_form()?;
    let fx = exact_f_of_u(&f, &s, x)?;
    let text = match format {
        OutputFormat::Csv => write_vector_csv(&fx),
        OutputFormat::Json => {
            let phases = json_array(s.phases().iter().map(|p| fejer_core::io::json_number(*p)));
            JsonObject::new()
                .integer("dim", s.dim() as i64)
                .string("function", f.description())
                .raw("phases", phases)
                .complex("value", inner(&fx, y)?)
                .raw("vector", vector_json(&fx))
                .finish()
                + "\n"
        }
    };
    Ok(Outcome::ok(text))
}
