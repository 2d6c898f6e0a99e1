mod common;

use std::f64::consts::{PI, SQRT_2, TAU};

use common::{closed_form_violation_at_pi, scan_argmax_at_pi};
use mzi_paradox::exploration::{argmax, evaluate};
use mzi_paradox::interferometry::joint_probability;
use mzi_paradox::*;

#[test]
fn optimum_matches_closed_form_scan() {
    let (r_scan, v_scan) = scan_argmax_at_pi(1e-6);
    let opt = find_max_violation(&SweepGrid::default(), 1e-8).unwrap();
    assert!(opt.converged && !opt.boundary);
    assert!(
        (opt.r_star - r_scan).abs() < 2e-6,
        "{} vs {r_scan}",
        opt.r_star
    );
    assert!((opt.violation_star - v_scan).abs() < 1e-9);
    assert!((closed_form_violation_at_pi(opt.r_star) - opt.violation_star).abs() < 1e-9);
}

#[test]
fn optimizer_never_loses_to_grid() {
    for grid in [
        SweepGrid::new(0.05, 0.95, 17, 0.0, TAU, 13).unwrap(),
        SweepGrid::new(0.3, 0.7, 5, 2.0, 4.0, 5).unwrap(),
    ] {
        let cells = sweep(&grid).unwrap();
        let best = argmax(&cells).unwrap().violation;
        let opt = find_max_violation(&grid, 1e-8).unwrap();
        assert!(opt.violation_star >= best);
    }
}

#[test]
fn default_sweep_reproduces_the_heatmap() {
    let grid = SweepGrid::default();
    let cells = sweep(&grid).unwrap();
    assert_eq!(cells.len(), 40_000);
    let nearest = cells
        .iter()
        .min_by(|a, b| {
            let da = (a.r - 0.583).abs() + (a.phi - PI).abs();
            let db = (b.r - 0.583).abs() + (b.phi - PI).abs();
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    assert!((nearest.violation - 0.0990).abs() < 2e-3);
    for c in &cells {
        assert!((c.p_u1u2 - c.r.powi(4)).abs() < 1e-12);
        if c.phi == 0.0 {
            assert!(c.violation <= 0.0);
        }
    }
    let top = argmax(&cells).unwrap();
    assert!((top.violation - 0.0990).abs() < 2e-3);
}

#[test]
fn sweep_is_deterministic() {
    let grid = SweepGrid::new(0.1, 0.9, 31, 0.0, TAU, 29).unwrap();
    let a = sweep(&grid).unwrap();
    let b = sweep(&grid).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.violation.to_bits(), y.violation.to_bits());
        assert_eq!(x.p_c1c2.to_bits(), y.p_c1c2.to_bits());
    }
}

#[test]
fn dark_port_tuning_reproduces_zero_in_simulation() {
    let r = find_dark_port_tuning(PI).unwrap();
    assert!((r * r - (2.0 - SQRT_2) / 2.0).abs() < 1e-10);
    let bs = BeamSplitterParams::from_reflection(r).unwrap();
    let dist = run_phase(&ExperimentConfig::phase(bs, PI, false, false)).unwrap();
    assert!(joint_probability(&dist, Port::C, Port::C) < 1e-12);
}

#[test]
fn max_violation_at_fixed_phase() {
    let best = max_violation_at_phi(PI, 1e-9).unwrap();
    assert!((best.violation - 0.0990).abs() < 1e-4);
    // At phi = 0 nothing beats the LHV bound.
    let best = max_violation_at_phi(0.0, 1e-9).unwrap();
    assert!(best.violation <= 0.0);
    assert_eq!(evaluate(best.r, 0.0).unwrap(), best);
}
