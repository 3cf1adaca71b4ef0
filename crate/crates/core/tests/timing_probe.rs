use icf_core::*;
use std::sync::Arc;
use std::time::Instant;

#[test]
fn probe_run6_run7() {
    // run 6: ellipse(2,1), p = 1/2, rescaled to tau = 20 on S^1 256
    let grid = Arc::new(build_circle_grid(256).unwrap());
    let u0 = make_initial(&grid, &InitialShape::Ellipse { a: 2.0, b: 1.0 }).unwrap();
    let f = CurvatureFunction::new(CurvatureKind::Mean, 1).unwrap();
    let cfg = FlowConfig::new(0.5, f, FlowMode::Rescaled { tau_end: 20.0 });
    let start = Instant::now();
    let traj = run(&u0, &cfg).unwrap();
    let dev = traj.final_sample().u_tilde_dev;
    let kt = (traj.final_sample().kappa_tilde_min, traj.final_sample().kappa_tilde_max);
    eprintln!(
        "run6: {} steps in {:.2?}, final dev = {dev:.3e}, kappa_tilde = {kt:?}, term = {:?}",
        traj.final_state.step_count, start.elapsed(), traj.termination
    );

    // run 7: ellipsoid(1,1.3), gauss_root, p = 2, rescaled to tau = 10 on 16x32
    let grid = Arc::new(build_latlong_grid(16, 32).unwrap());
    let u0 = make_initial(&grid, &InitialShape::EllipsoidOfRevolution { a: 1.0, c: 1.3 }).unwrap();
    let f = CurvatureFunction::new(CurvatureKind::GaussRoot, 2).unwrap();
    let cfg = FlowConfig::new(2.0, f, FlowMode::Rescaled { tau_end: 10.0 });
    let start = Instant::now();
    let traj = run(&u0, &cfg).unwrap();
    let s = traj.final_sample();
    eprintln!(
        "run7: {} steps in {:.2?}, final dev = {:.3e}, osc0 = {:.4e}, osc_end = {:.4e}, grad0 = {:.4e}, grad_end = {:.4e}, term = {:?}",
        traj.final_state.step_count, start.elapsed(), s.u_tilde_dev,
        traj.samples[0].osc_u_bar, s.osc_u_bar,
        traj.samples[0].grad_sq_sup, s.grad_sq_sup, traj.termination
    );

    // run 2: blow-up, p = 2 circle 256
    let grid = Arc::new(build_circle_grid(256).unwrap());
    let u0 = make_initial(&grid, &InitialShape::Sphere { r: 1.0 }).unwrap();
    let f = CurvatureFunction::with_cone(CurvatureKind::Mean, 1, Cone::GammaPlus).unwrap();
    let mut cfg = FlowConfig::new(2.0, f, FlowMode::Unrescaled { t_end: 10.0 });
    cfg.r_max = Some(100.0);
    let start = Instant::now();
    let traj = run(&u0, &cfg).unwrap();
    let est = estimate_blow_up(&traj).unwrap();
    eprintln!(
        "run2: {} steps in {:.2?}, t_final = {:.6}, T*_est = {:.6}",
        traj.final_state.step_count, start.elapsed(), traj.final_state.t, est.t_star
    );
}
