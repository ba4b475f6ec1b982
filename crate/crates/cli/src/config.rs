use std::path::PathBuf;

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// One job, as read from a `--config` file. Every field mirrors a flag.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub command: Option<String>,
    pub matrix: Option<PathBuf>,
    pub spectral: Option<PathBuf>,
    pub generate: Option<String>,
    pub dim: Option<usize>,
    pub seed: Option<u64>,
    pub function: Option<String>,
    pub x: Option<PathBuf>,
    pub basis: Option<usize>,
    pub random_seed: Option<u64>,
    pub y: Option<PathBuf>,
    pub y_basis: Option<usize>,
    pub y_random_seed: Option<u64>,
    #[serde(rename = "N")]
    pub order: Option<i64>,
    pub n_list: Option<Vec<i64>>,
    #[serde(rename = "grid_M")]
    pub grid_m: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// Parses a JSON job file.
pub fn parse_job_config(text: &str) -> Result<JobConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
}

/// Flags shared by every subcommand.
#[derive(Clone, Debug, Default, Args)]
pub struct JobArgs {
    /// JSON job file; flags given on the command line take precedence.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Matrix Market file holding a dense complex unitary.
    #[arg(long, value_name = "PATH")]
    pub matrix: Option<PathBuf>,
    /// Spectral-form JSON file (phases plus orthonormal eigenvectors).
    #[arg(long, value_name = "PATH")]
    pub spectral: Option<PathBuf>,
    /// Builtin generator: identity, shift, dft-phases, constructed, random-diagonal.
    #[arg(long, value_name = "NAME")]
    pub generate: Option<String>,
    #[arg(long, value_name = "D")]
    pub dim: Option<usize>,
    #[arg(long, value_name = "S")]
    pub seed: Option<u64>,

    /// Builtin name or expression in z.
    #[arg(long, value_name = "EXPR", allow_hyphen_values = true)]
    pub function: Option<String>,

    #[arg(long, value_name = "PATH")]
    pub x: Option<PathBuf>,
    #[arg(long, value_name = "K")]
    pub basis: Option<usize>,
    #[arg(long, value_name = "S")]
    pub random_seed: Option<u64>,
    #[arg(long, value_name = "PATH")]
    pub y: Option<PathBuf>,
    #[arg(long, value_name = "K")]
    pub y_basis: Option<usize>,
    #[arg(long, value_name = "S")]
    pub y_random_seed: Option<u64>,

    #[arg(
        short = 'N',
        long = "order",
        value_name = "INT",
        allow_negative_numbers = true
    )]
    pub order: Option<i64>,
    /// Comma-separated increasing orders.
    #[arg(long, value_name = "CSVINTS", allow_hyphen_values = true)]
    pub n_list: Option<String>,
    #[arg(long = "grid-M", value_name = "INT")]
    pub grid_m: Option<usize>,

    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

/// Largest order accepted from the command line.
pub const MAX_ORDER: usize = 1 << 20;

fn parse_int_list(s: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| CliError::Usage(format!("--n-list: {t:?} is not an integer")))
        })
        .collect()
}

impl JobArgs {
    /// Flags as a config, with `--n-list` parsed.
    fn to_config(&self) -> Result<JobConfig, CliError> {
        Ok(JobConfig {
            command: None,
            matrix: self.matrix.clone(),
            spectral: self.spectral.clone(),
            generate: self.generate.clone(),
            dim: self.dim,
            seed: self.seed,
            function: self.function.clone(),
            x: self.x.clone(),
            basis: self.basis,
            random_seed: self.random_seed,
            y: self.y.clone(),
            y_basis: self.y_basis,
            y_random_seed: self.y_random_seed,
            order: self.order,
            n_list: self.n_list.as_deref().map(parse_int_list).transpose()?,
            grid_m: self.grid_m,
            out: self.out.clone(),
            format: self.format,
        })
    }

    /// Loads `--config` if given and overlays the flags on it.
    pub fn resolve(&self) -> Result<JobConfig, CliError> {
        let flags = self.to_config()?;
        match &self.config {
            None => Ok(flags),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
                Ok(parse_job_config(&text)?.overlay(flags))
            }
        }
    }
}

impl JobConfig {
    /// `top` wins. Mutually exclusive sources are replaced as a group, so a
    /// flag never combines with a conflicting source from the file.
    pub fn overlay(self, top: JobConfig) -> JobConfig {
        let op_from_top = top.matrix.is_some() || top.spectral.is_some() || top.generate.is_some();
        let x_from_top = top.x.is_some() || top.basis.is_some() || top.random_seed.is_some();
        let y_from_top = top.y.is_some() || top.y_basis.is_some() || top.y_random_seed.is_some();
        let n_from_top = top.order.is_some() || top.n_list.is_some();
        let base = self;
        let (matrix, spectral, generate) = if op_from_top {
            (top.matrix, top.spectral, top.generate)
        } else {
            (base.matrix, base.spectral, base.generate)
        };
        let (x, basis, random_seed) = if x_from_top {
            (top.x, top.basis, top.random_seed)
        } else {
            (base.x, base.basis, base.random_seed)
        };
        let (y, y_basis, y_random_seed) = if y_from_top {
            (top.y, top.y_basis, top.y_random_seed)
        } else {
            (base.y, base.y_basis, base.y_random_seed)
        };
        let (order, n_list) = if n_from_top {
            (top.order, top.n_list)
        } else {
            (base.order, base.n_list)
        };
        JobConfig {
            command: top.command.or(base.command),
            matrix,
            spectral,
            generate,
            dim: top.dim.or(base.dim),
            seed: top.seed.or(base.seed),
            function: top.function.or(base.function),
            x,
            basis,
            random_seed,
            y,
            y_basis,
            y_random_seed,
            order,
            n_list,
            grid_m: top.grid_m.or(base.grid_m),
            out: top.out.or(base.out),
            format: top.format.or(base.format),
        }
    }

    /// Structural checks: one operator source, at most one source per vector.
    pub fn check_sources(&self) -> Result<(), CliError> {
        let ops = [
            self.matrix.is_some(),
            self.spectral.is_some(),
            self.generate.is_some(),
        ];
        match ops.iter().filter(|b| **b).count() {
            0 => {
                return Err(CliError::Usage(
                    "no operator: give --matrix, --spectral or --generate".into(),
                ))
            }
            1 => {}
            _ => {
                return Err(CliError::Usage(
                    "give exactly one of --matrix, --spectral, --generate".into(),
                ))
            }
        }
        let xs = [
            self.x.is_some(),
            self.basis.is_some(),
            self.random_seed.is_some(),
        ];
        if xs.iter().filter(|b| **b).count() > 1 {
            return Err(CliError::Usage(
                "give at most one of --x, --basis, --random-seed".into(),
            ));
        }
        let ys = [
            self.y.is_some(),
            self.y_basis.is_some(),
            self.y_random_seed.is_some(),
        ];
        if ys.iter().filter(|b| **b).count() > 1 {
            return Err(CliError::Usage(
                "give at most one of --y, --y-basis, --y-random-seed".into(),
            ));
        }
        if self.order.is_some() && self.n_list.is_some() {
            return Err(CliError::Usage(
                "give either -N or --n-list, not both".into(),
            ));
        }
        Ok(())
    }

    /// Every requested order, validated `>= 0` and against `grid_M`.
    pub fn orders(&self) -> Result<Vec<usize>, CliError> {
        let raw: Vec<i64> = match (&self.order, &self.n_list) {
            (Some(n), _) => vec![*n],
            (None, Some(list)) => list.clone(),
            (None, None) => {
                return Err(CliError::Usage("missing order: give -N or --n-list".into()))
            }
        };
        let orders = raw
            .iter()
            .map(|&n| {
                let n = usize::try_from(n)
                    .map_err(|_| CliError::Validation(format!("order N must be >= 0, got {n}")))?;
                if n > MAX_ORDER {
                    return Err(CliError::Validation(format!(
                        "order N = {n} exceeds {MAX_ORDER}"
                    )));
                }
                Ok(n)
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(m) = self.grid_m {
            if let Some(&n) = orders.iter().max() {
                if m < 2 * n + 2 {
                    return Err(CliError::Validation(format!(
                        "grid_M = {m} is below 2N+2 = {} for N = {n}",
                        2 * n + 2
                    )));
                }
            }
        }
        Ok(orders)
    }

    /// The single order for commands that take one.
    pub fn single_order(&self) -> Result<usize, CliError> {
        if self.n_list.is_some() {
            return Err(CliError::Usage("this command takes a single -N".into()));
        }
        Ok(self.orders()?[0])
    }
}
