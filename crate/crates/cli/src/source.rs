//! Turns a [`JobConfig`] into an operator, vectors and a function.

use std::f64::consts::TAU;
use std::path::Path;

use fejer_core::fejer::CircleGrid;
use fejer_core::funcexpr::POLE_CHECK_MIN_GRID;
use fejer_core::io::{read_matrix_market, read_vector_csv, spectral_form_from_json};
use fejer_core::oracle::{construct, random_phases, recover_spectral};
use fejer_core::{CircleFunction, ComplexVec, DenseMatrix, SpectralForm, UnitaryOperator};

use crate::{CliError, JobConfig};

pub const GENERATORS: [&str; 5] = [
    "identity",
    "shift",
    "dft-phases",
    "constructed",
    "random-diagonal",
];

/// Samples used by the randomized unitarity check of non-dense forms.
const VERIFY_SAMPLES: usize = 16;

/// An operator together with whatever spectral data is known for free.
#[derive(Clone, Debug)]
pub struct ResolvedOperator {
    pub op: UnitaryOperator,
    pub spectral: Option<SpectralForm>,
    pub seed: u64,
}

impl ResolvedOperator {
    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Known spectral form, or one recovered from the dense matrix.
    pub fn spectral_form(&self) -> Result<SpectralForm, CliError> {
        if let Some(s) = &self.spectral {
            return Ok(s.clone());
        }
        let dense = self.op.to_dense().ok_or_else(|| {
            CliError::Validation("oracle needs a dense or constructed operator".into())
        })?;
        Ok(recover_spectral(&dense, self.seed)?)
    }

    /// Fails unless the operator passes its unitarity check.
    pub fn require_unitary(&self) -> Result<(), CliError> {
        let r = self.op.verify_unitary(VERIFY_SAMPLES, self.seed);
        if r.pass {
            Ok(())
        } else {
            Err(CliError::Validation(format!(
                "operator is not unitary: residual {:.3e} > {:.1e}",
                r.max_residual, r.tolerance
            )))
        }
    }
}

fn diagonal_spectral(phases: &[f64]) -> Result<SpectralForm, CliError> {
    Ok(SpectralForm::new(
        phases.to_vec(),
        DenseMatrix::identity(phases.len()),
    )?)
}

fn generate(name: &str, dim: usize, seed: u64) -> Result<ResolvedOperator, CliError> {
    if dim == 0 {
        return Err(CliError::Usage("--dim must be positive".into()));
    }
    let diagonal = |phases: Vec<f64>| -> Result<ResolvedOperator, CliError> {
        Ok(ResolvedOperator {
            spectral: Some(diagonal_spectral(&phases)?),
            op: UnitaryOperator::diagonal_phases(phases)?,
            seed,
        })
    };
    match name {
        "identity" => diagonal(vec![0.0; dim]),
        "dft-phases" => diagonal((0..dim).map(|j| TAU * j as f64 / dim as f64).collect()),
        "random-diagonal" => diagonal(random_phases(dim, seed)),
        "shift" => Ok(ResolvedOperator {
            op: UnitaryOperator::dense(DenseMatrix::cyclic_shift(dim))?,
            spectral: None,
            seed,
        }),
        "constructed" => {
            let c = construct(&random_phases(dim, seed), seed)?;
            Ok(ResolvedOperator {
                op: c.operator(),
                spectral: Some(c.spectral),
                seed,
            })
        }
        other => Err(CliError::Usage(format!(
            "unknown generator {other:?}; expected one of {}",
            GENERATORS.join(", ")
        ))),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub fn operator(job: &JobConfig) -> Result<ResolvedOperator, CliError> {
    let seed = job.seed.unwrap_or(0);
    if let Some(name) = &job.generate {
        let dim = job
            .dim
            .ok_or_else(|| CliError::Usage("--generate needs --dim".into()))?;
        return generate(name, dim, seed);
    }
    if let Some(path) = &job.matrix {
        let m = read_matrix_market(path)?;
        return Ok(ResolvedOperator {
            op: UnitaryOperator::dense(m)?,
            spectral: None,
            seed,
        });
    }
    if let Some(path) = &job.spectral {
        let s = spectral_form_from_json(&read_text(path)?)?;
        return Ok(ResolvedOperator {
            op: UnitaryOperator::dense(s.reconstruct())?,
            spectral: Some(s),
            seed,
        });
    }
    Err(CliError::Usage("no operator source".into()))
}

fn vector(
    dim: usize,
    path: Option<&Path>,
    basis: Option<usize>,
    seed: Option<u64>,
    label: &str,
) -> Result<Option<ComplexVec>, CliError> {
    let v = match (path, basis, seed) {
        (Some(p), _, _) => read_vector_csv(p)?,
        (_, Some(k), _) => ComplexVec::basis(dim, k).map_err(|_| {
            CliError::Validation(format!(
                "{label}: basis index {k} out of range for dimension {dim}"
            ))
        })?,
        (_, _, Some(s)) => ComplexVec::random_unit(dim, s)?,
        _ => return Ok(None),
    };
    if v.dim() != dim {
        return Err(CliError::Validation(format!(
            "{label} has dimension {}, operator has {dim}",
            v.dim()
        )));
    }
    Ok(Some(v))
}

/// `x` defaults to `e_0`; `y` defaults to `x`.
pub fn vectors(job: &JobConfig, dim: usize) -> Result<(ComplexVec, ComplexVec), CliError> {
    let x = match vector(dim, job.x.as_deref(), job.basis, job.random_seed, "x")? {
        Some(x) => x,
        None => ComplexVec::basis(dim, 0)?,
    };
    let y = vector(dim, job.y.as_deref(), job.y_basis, job.y_random_seed, "y")?
        .unwrap_or_else(|| x.clone());
    Ok((x, y))
}

/// Resolves `--function` and rejects functions with poles on the circle.
pub fn function(job: &JobConfig) -> Result<CircleFunction, CliError> {
    let src = job
        .function
        .as_deref()
        .ok_or_else(|| CliError::Usage("missing --function".into()))?;
    let f = CircleFunction::resolve(src)?;
    let report = f.pole_check(&CircleGrid::new(POLE_CHECK_MIN_GRID)?);
    if !report.pass {
        let detail = match report.min_denominator_modulus {
            Some(m) => format!("min |denominator| = {m:.3e}"),
            None => "non-finite values".into(),
        };
        return Err(CliError::Validation(format!(
            "pole check failed for {f}: {detail} on {} nodes",
            report.grid_size
        )));
    }
    Ok(f)
}
