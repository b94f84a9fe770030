use mzi_core::experiments::{
    beta_grid, config_fig4, fit_fringe_points, oracle_check, phase_grid, poisson_fringe, qkd_visibility, sweep,
    QkdSpec, DEFAULT_BETA_POINTS,
};
use mzi_core::interferometer::{contrast_shared_env, output_probability, InterferometerSpec};
use mzi_core::optics::unpolarized;
use mzi_core::tomography::blindness_demo;

use crate::config::{Command, RunConfig};
use crate::output::{read_counts, write_csv, Cell};
use crate::CliError;

pub const DEFAULT_PHASES: usize = 64;
pub const DEFAULT_MEAN_TOTAL: u64 = 10_000;
pub const DEFAULT_ORACLE_SAMPLES: usize = 200;
/// Largest accepted |Kraus-pair contrast − oracle contrast|.
pub const ORACLE_TOL: f64 = 1e-9;

/// Executes a validated configuration, writes its CSV and returns the
/// one-line summary.
pub fn run(config: &RunConfig) -> Result<String, CliError> {
    match config.command {
        Command::Fringe => fringe(config),
        Command::Sweep => run_sweep(config),
        Command::OracleCheck => run_oracle_check(config),
        Command::Tomography => tomography(config),
        Command::Qkd => qkd(config),
        Command::Fit => fit(config),
    }
}

fn interferometer(config: &RunConfig) -> Result<InterferometerSpec, CliError> {
    match (&config.variant, &config.arms) {
        (Some(variant), _) => Ok(config_fig4(*variant, config.beta.unwrap_or(0.0))?),
        (None, Some((upper, lower))) => Ok(InterferometerSpec::new(upper.clone(), lower.clone(), unpolarized())?),
        (None, None) => Err(CliError::Usage(
            "an interferometer needs variant or upper/lower arms".into(),
        )),
    }
}

fn fringe(config: &RunConfig) -> Result<String, CliError> {
    let spec = interferometer(config)?;
    let result = contrast_shared_env(&spec)?;
    let phis = phase_grid(config.phases.unwrap_or(DEFAULT_PHASES));
    let records = poisson_fringe(
        &spec,
        &phis,
        config.mean_total.unwrap_or(DEFAULT_MEAN_TOTAL),
        config.seed.unwrap_or(0),
    )?;
    let rows = records
        .iter()
        .map(|r| {
            Ok(vec![
                Cell::Float(r.phi),
                Cell::Float(output_probability(&result, r.phi)?),
                Cell::Float(r.expected),
                Cell::Int(r.counts),
            ])
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    write_csv(&config.output_path, &["phi", "p0", "expected", "counts"], &rows)?;
    Ok(format!(
        "visibility={:.6} phase={:.6}",
        result.visibility, result.fringe_phase
    ))
}

fn run_sweep(config: &RunConfig) -> Result<String, CliError> {
    let variant = config
        .variant
        .ok_or_else(|| CliError::Usage("sweep requires variant".into()))?;
    let betas = beta_grid(config.beta_points.unwrap_or(DEFAULT_BETA_POINTS));
    let table = sweep(variant, &betas)?;
    let rows: Vec<Vec<Cell>> = table
        .iter()
        .map(|r| {
            vec![
                Cell::Float(r.beta),
                Cell::Float(r.closed_form),
                Cell::Float(r.simulated),
                Cell::Float(r.oracle),
            ]
        })
        .collect();
    write_csv(
        &config.output_path,
        &["beta", "v_closed_form", "v_simulated", "v_oracle"],
        &rows,
    )?;
    let deviation = table
        .iter()
        .map(|r| {
            (r.closed_form.abs() - r.simulated)
                .abs()
                .max((r.simulated - r.oracle).abs())
        })
        .fold(0.0, f64::max);
    Ok(format!(
        "variant={variant} points={} max_deviation={deviation:.3e}",
        table.len()
    ))
}

fn run_oracle_check(config: &RunConfig) -> Result<String, CliError> {
    let samples = config.samples.unwrap_or(DEFAULT_ORACLE_SAMPLES);
    let table = oracle_check(samples, config.seed.unwrap_or(0))?;
    let rows: Vec<Vec<Cell>> = table
        .iter()
        .map(|r| {
            vec![
                Cell::Int(r.index as u64),
                Cell::Float(r.shared.re),
                Cell::Float(r.shared.im),
                Cell::Float(r.oracle.re),
                Cell::Float(r.oracle.im),
                Cell::Float(r.abs_diff),
            ]
        })
        .collect();
    write_csv(
        &config.output_path,
        &[
            "index",
            "contrast_re",
            "contrast_im",
            "oracle_re",
            "oracle_im",
            "abs_diff",
        ],
        &rows,
    )?;
    let worst = table.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    if worst >= ORACLE_TOL {
        return Err(CliError::Check(format!(
            "oracle disagreement {worst:e} ≥ {ORACLE_TOL:e}"
        )));
    }
    Ok(format!("specs={samples} max_abs_diff={worst:.3e}"))
}

fn tomography(config: &RunConfig) -> Result<String, CliError> {
    let betas = match (config.beta, config.beta_points) {
        (Some(beta), None) => vec![beta],
        (_, Some(n)) => beta_grid(n),
        (None, None) => beta_grid(DEFAULT_BETA_POINTS),
    };
    let reports = betas
        .iter()
        .map(|&b| blindness_demo(b))
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<Cell>> = reports
        .iter()
        .map(|r| {
            vec![
                Cell::Float(r.beta),
                Cell::Float(r.chi_distance_upper),
                Cell::Float(r.chi_distance_lower),
                Cell::Float(r.visibility_a),
                Cell::Float(r.visibility_b),
                Cell::Float(r.visibility_gap),
            ]
        })
        .collect();
    write_csv(
        &config.output_path,
        &[
            "beta",
            "chi_distance_upper",
            "chi_distance_lower",
            "visibility_a",
            "visibility_b",
            "visibility_gap",
        ],
        &rows,
    )?;
    let chi_max = reports
        .iter()
        .map(|r| r.chi_distance_upper.max(r.chi_distance_lower))
        .fold(0.0, f64::max);
    let gap_max = reports.iter().map(|r| r.visibility_gap).fold(0.0, f64::max);
    Ok(format!("gap={gap_max:.6} chi_distance_max={chi_max:.3e}"))
}

fn qkd(config: &RunConfig) -> Result<String, CliError> {
    let spec = match (&config.segments, config.variant) {
        (Some([u1, u2, u3, u4]), _) => QkdSpec {
            u1: u1.clone(),
            u2: u2.clone(),
            u3: u3.clone(),
            u4: u4.clone(),
            input: unpolarized(),
        },
        (None, Some(variant)) => {
            let fig = config_fig4(variant, config.beta.unwrap_or(0.0))?;
            let split = |mut elements: Vec<_>| {
                let tail = if elements.is_empty() {
                    Vec::new()
                } else {
                    elements.split_off(1)
                };
                (elements, tail)
            };
            let (u1, u2) = split(fig.upper.elements);
            let (u3, u4) = split(fig.lower.elements);
            QkdSpec {
                u1,
                u2,
                u3,
                u4,
                input: fig.input,
            }
        }
        (None, None) => QkdSpec {
            u1: vec![],
            u2: vec![],
            u3: vec![],
            u4: vec![],
            input: unpolarized(),
        },
    };
    let result = qkd_visibility(&spec)?;
    write_csv(
        &config.output_path,
        &["visibility", "qber"],
        &[vec![Cell::Float(result.visibility), Cell::Float(result.qber)]],
    )?;
    Ok(format!("visibility={:.6} qber={:.6}", result.visibility, result.qber))
}

fn fit(config: &RunConfig) -> Result<String, CliError> {
    let points = match &config.input_path {
        Some(path) => read_counts(path)?,
        None => {
            let spec = interferometer(config)?;
            poisson_fringe(
                &spec,
                &phase_grid(config.phases.unwrap_or(DEFAULT_PHASES)),
                config.mean_total.unwrap_or(DEFAULT_MEAN_TOTAL),
                config.seed.unwrap_or(0),
            )?
            .iter()
            .map(|r| (r.phi, r.counts as f64))
            .collect()
        }
    };
    let result = fit_fringe_points(&points)?;
    write_csv(
        &config.output_path,
        &[
            "amplitude",
            "visibility_hat",
            "phase_hat",
            "stderr_visibility",
            "iterations",
            "converged",
        ],
        &[vec![
            Cell::Float(result.amplitude),
            Cell::Float(result.visibility_hat),
            Cell::Float(result.phase_hat),
            Cell::Float(result.stderr_visibility),
            Cell::Int(result.iterations as u64),
            Cell::Text(result.converged.to_string()),
        ]],
    )?;
    Ok(format!(
        "visibility={:.6} stderr={:.6} converged={}",
        result.visibility_hat, result.stderr_visibility, result.converged
    ))
}
