//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_8};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mzi_core::experiments::{
    beta_grid, closed_form, config_fig4, fit_fringe, oracle_check, phase_grid, point_rng, poisson_fringe,
    qkd_visibility, random_spec, Fig4Variant, QkdSpec, DEFAULT_BETA_POINTS,
};
use mzi_core::interferometer::contrast_shared_env;
use mzi_core::linalg::{maximally_mixed, validate_cptp};
use mzi_core::optics::{arm_channel_apply, arm_kraus_set, unpolarized};
use mzi_core::tomography::blindness_demo;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SEED: u64 = 42;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    if elapsed < limit {
        Ok(())
    } else {
        Err(format!("runtime {elapsed:?} exceeds {limit:?}"))
    }
}

fn closed_forms() -> Outcome {
    let betas = beta_grid(DEFAULT_BETA_POINTS);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for variant in [Fig4Variant::A, Fig4Variant::B, Fig4Variant::C] {
        for &beta in &betas {
            let spec = config_fig4(variant, beta).map_err(err)?;
            let v = contrast_shared_env(&spec).map_err(err)?.visibility;
            worst = worst.max((v - closed_form(variant, beta).abs()).abs());
        }
    }
    within(start.elapsed(), Duration::from_secs(1))?;
    check(
        worst < 1e-9,
        format!("max |v − |closed form|| = {worst:.2e} over 3×{} points", betas.len()),
    )
}

fn variant_d() -> Outcome {
    let at = |beta: f64| -> Result<f64, String> {
        let spec = config_fig4(Fig4Variant::D, beta).map_err(err)?;
        Ok(contrast_shared_env(&spec).map_err(err)?.visibility)
    };
    let peak = at(FRAC_PI_8)?;
    let mut worst = 0.0f64;
    for beta in beta_grid(DEFAULT_BETA_POINTS) {
        worst = worst.max((at(beta)? - (2.0 * (beta - FRAC_PI_8)).cos().abs()).abs());
    }
    check(
        (peak - 1.0).abs() < 1e-9 && worst < 1e-9,
        format!("v(π/8) = {peak:.12}, max curve deviation {worst:.2e}"),
    )
}

fn oracle_agreement() -> Outcome {
    let start = Instant::now();
    let rows = oracle_check(200, SEED).map_err(err)?;
    within(start.elapsed(), Duration::from_secs(10))?;
    let worst = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    check(
        rows.len() == 200 && worst < 1e-9,
        format!("200 random specs, max |ΔC| = {worst:.2e}"),
    )
}

fn blindness() -> Outcome {
    let r = blindness_demo(FRAC_PI_4).map_err(err)?;
    let chi_at = r.chi_distance_upper.max(r.chi_distance_lower);
    let mut chi_grid = 0.0f64;
    for beta in beta_grid(DEFAULT_BETA_POINTS) {
        let g = blindness_demo(beta).map_err(err)?;
        chi_grid = chi_grid.max(g.chi_distance_upper.max(g.chi_distance_lower));
    }
    let ok = chi_at < 1e-9
        && (r.visibility_a - 0.5).abs() < 1e-9
        && r.visibility_b.abs() < 1e-9
        && (r.visibility_gap - 0.5).abs() < 1e-9
        && chi_grid < 1e-9;
    check(
        ok,
        format!(
            "β=π/4: χ distance {chi_at:.2e}, v = {:.9} vs {:.9}, gap {:.9}; grid χ max {chi_grid:.2e}",
            r.visibility_a, r.visibility_b, r.visibility_gap
        ),
    )
}

fn channel_validity() -> Outcome {
    let mixed = maximally_mixed(2).map_err(err)?;
    let (mut residual, mut unital) = (0.0f64, 0.0f64);
    for i in 0..200u64 {
        let spec = random_spec(&mut point_rng(SEED, i), 6);
        for arm in [&spec.upper, &spec.lower] {
            residual = residual.max(validate_cptp(&arm_kraus_set(arm).map_err(err)?).residual);
            let out = arm_channel_apply(arm, &mixed).map_err(err)?;
            unital = unital.max(out.matrix().max_abs_diff(mixed.matrix()));
        }
    }
    check(
        residual < 1e-10 && unital < 1e-12,
        format!("400 arms: completeness residual {residual:.2e}, |E(I/2) − I/2| {unital:.2e}"),
    )
}

fn poisson_fit() -> Outcome {
    let spec = config_fig4(Fig4Variant::A, FRAC_PI_8).map_err(err)?;
    let start = Instant::now();
    let records = poisson_fringe(&spec, &phase_grid(64), 10_000, SEED).map_err(err)?;
    let fit = fit_fringe(&records).map_err(err)?;
    within(start.elapsed(), Duration::from_secs(1))?;
    let dev = (fit.visibility_hat - 0.75).abs();
    check(
        fit.converged && dev < 3.0 * fit.stderr_visibility && dev < 0.02,
        format!(
            "v̂ = {:.5} ± {:.5} (|v̂ − 0.75| = {dev:.5})",
            fit.visibility_hat, fit.stderr_visibility
        ),
    )
}

fn qkd() -> Outcome {
    let identity = qkd_visibility(&QkdSpec {
        u1: vec![],
        u2: vec![],
        u3: vec![],
        u4: vec![],
        input: unpolarized(),
    })
    .map_err(err)?;
    let fig = config_fig4(Fig4Variant::B, FRAC_PI_3).map_err(err)?;
    let (mut upper, mut lower) = (fig.upper.elements, fig.lower.elements);
    let (u2, u4) = (upper.split_off(1), lower.split_off(1));
    let second = qkd_visibility(&QkdSpec {
        u1: upper,
        u2,
        u3: lower,
        u4,
        input: fig.input,
    })
    .map_err(err)?;
    let ok = identity.visibility == 1.0
        && identity.qber == 0.0
        && (second.visibility - 0.25).abs() < 1e-9
        && (second.qber - 0.375).abs() < 1e-9;
    check(
        ok,
        format!(
            "identity v={} qber={}; crossed crystals at π/3 v={:.12} qber={:.12}",
            identity.visibility, identity.qber, second.visibility, second.qber
        ),
    )
}

fn run_cli(dir: &Path, name: &str, args: &[&str]) -> Result<Vec<u8>, String> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_mzi"))
        .args(args)
        .arg("--output")
        .arg(&out)
        .output()
        .map_err(err)?;
    if !status.status.success() {
        return Err(format!(
            "mzi {args:?} failed: {}",
            String::from_utf8_lossy(&status.stderr)
        ));
    }
    std::fs::read(&out).map_err(err)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(err)?;
    let commands: [&[&str]; 3] = [
        &["fringe", "--variant", "a", "--beta", "22.5deg", "--seed", "7"],
        &["fit", "--variant", "c", "--beta", "0.4", "--seed", "7"],
        &["oracle-check", "--samples", "50", "--seed", "7"],
    ];
    for (i, args) in commands.iter().enumerate() {
        let first = run_cli(dir.path(), &format!("{i}-first.csv"), args)?;
        let second = run_cli(dir.path(), &format!("{i}-second.csv"), args)?;
        if first != second || first.is_empty() {
            return Err(format!("mzi {} produced differing output", args[0]));
        }
    }
    Ok("fringe, fit and oracle-check CSVs byte-identical across runs".into())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("closed-form visibilities, variants a-c", closed_forms),
        ("variant d peak and curve", variant_d),
        ("Kraus contrast vs dilation oracle", oracle_agreement),
        ("process tomography blindness", blindness),
        ("arm channels CPTP and unital", channel_validity),
        ("Poisson fringe fit at β = π/8", poisson_fit),
        ("key-distribution visibility and QBER", qkd),
        ("seeded CLI output is deterministic", determinism),
    ];
    let mut failures = 0;
    for (n, (name, criterion)) in criteria.iter().enumerate() {
        match criterion() {
            Ok(detail) => println!("criterion {}: PASS  {name}: {detail}", n + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {}: FAIL  {name}: {detail}", n + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
