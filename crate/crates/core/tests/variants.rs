//! End-to-end checks of the optional scheme variants: nonlinear WENO
//! weights and the Godunov first-order flux.

use mppfv::flux::MonotoneFluxKind;
use mppfv::harness::execute;
use mppfv::integrate::StepConfig;
use mppfv::problems::{make_problem, ProblemParams};
use mppfv::reconstruct::{ReconScheme, WeightMode};

#[test]
fn weno_weights_run_stays_bounded_and_accurate() {
    let problem = make_problem("advection_study_1d", &ProblemParams::default()).unwrap();
    let mut cfg = StepConfig::new(0.5).unwrap();
    cfg.scheme = ReconScheme::new(2, WeightMode::WenoJs).unwrap();
    cfg.monotone = MonotoneFluxKind::OverDiffusiveLf { alpha: 1.2 };
    cfg.dt_rule = mppfv::integrate::DtRule::CflOverAlpha { cfl: 0.7 };
    let out = execute(&problem, 100, 0, cfg).unwrap();
    assert!(out.report.final_min >= -1e-12);
    assert!(out.report.final_max <= 1.0 + 1e-12);
    // smooth data: WENO weights stay close to the linear-weight solution
    assert!(out.l1.unwrap() < 1e-3, "L1 = {:.3e}", out.l1.unwrap());
}

#[test]
fn weno_weights_rejected_above_order_five() {
    assert!(ReconScheme::new(3, WeightMode::WenoJs).is_err());
}

#[test]
fn godunov_first_order_flux_preserves_bounds() {
    let problem = make_problem("burgers_1d", &ProblemParams::default()).unwrap();
    let mut cfg = StepConfig::new(0.03).unwrap();
    cfg.monotone = MonotoneFluxKind::Godunov;
    let out = execute(&problem, 100, 0, cfg).unwrap();
    assert!(out.report.final_min >= -1e-12, "{}", out.report.final_min);
    assert!(
        out.report.final_max <= 2.0 + 1e-12,
        "{}",
        out.report.final_max
    );
    assert!(out.report.min_theta < 1.0, "limiter should engage");
}
