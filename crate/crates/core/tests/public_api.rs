use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

use mzi_core::experiments::{beta_grid, closed_form, config_fig4, sweep, Fig4Variant};
use mzi_core::interferometer::{
    contrast_independent_env, contrast_shared_env, oracle_port_probabilities, output_probability,
};
use mzi_core::optics::{unpolarized, ArmElement, ArmSpec};

#[test]
fn reference_visibilities() {
    let v = |variant, beta| {
        contrast_shared_env(&config_fig4(variant, beta).unwrap())
            .unwrap()
            .visibility
    };
    assert!((v(Fig4Variant::A, FRAC_PI_8) - 0.75).abs() < 1e-12);
    assert!((v(Fig4Variant::A, FRAC_PI_4) - 0.5).abs() < 1e-12);
    assert!((v(Fig4Variant::B, FRAC_PI_4) - 0.5).abs() < 1e-12);
    assert!(v(Fig4Variant::C, FRAC_PI_4).abs() < 1e-12);
    assert!((v(Fig4Variant::D, FRAC_PI_8) - 1.0).abs() < 1e-12);
}

#[test]
fn shared_environment_restores_visibility() {
    // One long crystal in each arm: independent environments wash out the
    // fringe, a shared delay line does not.
    let arm = ArmSpec::new(vec![ArmElement::crystal(0.0, 310.0)]);
    let shared = contrast_shared_env(
        &mzi_core::interferometer::InterferometerSpec::new(arm.clone(), arm.clone(), unpolarized()).unwrap(),
    )
    .unwrap();
    let independent = contrast_independent_env(&arm, &arm, &unpolarized()).unwrap();
    assert!((shared.visibility - 1.0).abs() < 1e-12);
    assert!((independent.visibility - 0.5).abs() < 1e-12);
}

#[test]
fn fringe_matches_oracle_ports() {
    let spec = config_fig4(Fig4Variant::B, 0.6).unwrap();
    let fringe = contrast_shared_env(&spec).unwrap();
    for k in 0..8 {
        let phi = k as f64 * 0.7;
        let (p0, p1) = oracle_port_probabilities(&spec, phi).unwrap();
        assert!((p0 + p1 - 1.0).abs() < 1e-12);
        assert!((output_probability(&fringe, phi).unwrap() - p0).abs() < 1e-12);
    }
}

#[test]
fn sweep_rows_agree() {
    for row in sweep(Fig4Variant::A, &beta_grid(9)).unwrap() {
        assert!((row.closed_form - closed_form(Fig4Variant::A, row.beta)).abs() < 1e-15);
        assert!((row.simulated - row.oracle).abs() < 1e-9);
    }
}
