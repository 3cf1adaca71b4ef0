//! Time integration of the scalar flow du/dt = v F^{-p} and of the rescaled
//! flow in tau-time, with adaptive step control, stopping conditions, and
//! blow-up detection.
//!
//! Both modes advance a positive radial field with a classical 4-stage
//! explicit step. The rescaled mode integrates the radial variable
//! u_tilde = u / Theta directly,
//!
//!   d u_tilde / d tau = v F(kappa_tilde)^{-p} - n^{-p} u_tilde,
//!
//! which is the exact algebraic transform of the log form
//! d phi_tilde / d tau = v u_tilde^{-1} F^{-p} - n^{-p} (the spatial
//! derivatives of phi_tilde and phi coincide, and the curvatures of the
//! u_tilde graph are exactly the rescaled curvatures kappa_i Theta).
//! The unit sphere u_tilde = 1 is the stationary point of this system.

use crate::curvature::{CurvatureFunction, PowPlan};
use crate::error::{Error, Result};
use crate::geometry::{compute_shape, GraphFunction, ShapeCore, ShapeData, shape_pass};
use crate::grid::DomainGrid;
use crate::spherical::SphericalFlow;
use std::sync::Arc;

/// Which equation is integrated and up to which horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FlowMode {
    /// Integrate u in physical time t.
    Unrescaled { t_end: f64 },
    /// Integrate u_tilde = u / Theta in tau-time.
    Rescaled { tau_end: f64 },
}

impl FlowMode {
    pub fn is_rescaled(&self) -> bool {
        matches!(self, FlowMode::Rescaled { .. })
    }
}

/// Flow parameters; see the field comments for defaults.
#[derive(Debug, Clone)]
pub struct FlowConfig {
    /// Flow exponent, 0 < p != 1.
    pub p: f64,
    pub f: CurvatureFunction,
    pub mode: FlowMode,
    /// Fraction of the parabolic stability limit to use (default 0.2).
    pub dt_safety: f64,
    /// Hard floor on the proposed step (default 1e-12); falling below it
    /// is reported as a stiffness/blow-up stop.
    pub dt_min: f64,
    /// Radius cap triggering the blow-up stop; `None` means 1e3 times the
    /// reference radius of the initial data.
    pub r_max: Option<f64>,
    /// Monitor cadence in accepted steps (default 10).
    pub sample_every: usize,
    /// Largest tolerated tilt factor before the graph is declared
    /// numerically unresolvable (default 50).
    pub v_cap: f64,
    /// Optional hard step-count limit (counts as normal completion).
    pub max_steps: Option<usize>,
    /// Times (t or tau, matching the mode) to land on exactly and record
    /// a field snapshot.
    pub checkpoints: Vec<f64>,
    /// Approximate number of evenly spaced field snapshots to retain.
    pub snapshot_count: usize,
}

impl FlowConfig {
    pub fn new(p: f64, f: CurvatureFunction, mode: FlowMode) -> Self {
        FlowConfig {
            p,
            f,
            mode,
            dt_safety: 0.2,
            dt_min: 1e-12,
            r_max: None,
            sample_every: 10,
            v_cap: 50.0,
            max_steps: None,
            checkpoints: Vec::new(),
            snapshot_count: 8,
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.p.is_finite() && self.p > 0.0 && self.p != 1.0) {
            return Err(Error::config(format!(
                "flow exponent must satisfy 0 < p != 1, got {}",
                self.p
            )));
        }
        if self.p > 1.0 && self.f.cone() != crate::curvature::Cone::GammaPlus {
            return Err(Error::config(format!(
                "p > 1 requires cone gamma_plus (strictly convex hypersurfaces), got {}",
                self.f.cone().name()
            )));
        }
        if self.f.n() != dim {
            return Err(Error::config(format!(
                "curvature function dimension {} does not match grid dimension {dim}",
                self.f.n()
            )));
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(Error::config("dt_safety must lie in (0, 1]"));
        }
        if !(self.dt_min > 0.0) {
            return Err(Error::config("dt_min must be positive"));
        }
        if self.sample_every == 0 {
            return Err(Error::config("sample_every must be >= 1"));
        }
        if !(self.v_cap > 1.0) {
            return Err(Error::config("v_cap must exceed 1"));
        }
        if let Some(r) = self.r_max {
            if !(r > 0.0) {
                return Err(Error::config("r_max must be positive"));
            }
        }
        let horizon = match self.mode {
            FlowMode::Unrescaled { t_end } => t_end,
            FlowMode::Rescaled { tau_end } => tau_end,
        };
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::config(format!(
                "integration horizon must be finite and >= 0, got {horizon}"
            )));
        }
        if self.checkpoints.iter().any(|c| !(c.is_finite() && *c >= 0.0 && *c <= horizon)) {
            return Err(Error::config("checkpoints must lie in [0, horizon]"));
        }
        Ok(())
    }
}

/// Integrator state: the evolving field plus consistent clocks.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub tau: f64,
    /// u in unrescaled mode, u_tilde in rescaled mode.
    pub field: Vec<f64>,
    /// Theta(t, r_ref) for the reference radius r_ref = (min u0 + max u0)/2.
    pub theta_ref: f64,
    pub step_count: usize,
    pub last_dt: f64,
}

/// One monitor row; all columns refer to the physical (unrescaled) surface
/// except the explicitly rescaled ones.
#[derive(Debug, Clone, Copy)]
pub struct Sample {
    pub t: f64,
    pub tau: f64,
    pub theta: f64,
    pub min_u: f64,
    pub max_u: f64,
    pub osc_u_bar: f64,
    pub f_min: f64,
    pub f_max: f64,
    pub grad_sq_sup: f64,
    /// max over nodes of |u/Theta - 1|.
    pub u_tilde_dev: f64,
    pub kappa_tilde_min: f64,
    pub kappa_tilde_max: f64,
    pub v_max: f64,
    pub dt: f64,
}

impl Sample {
    pub const COLUMNS: [&'static str; 14] = [
        "t",
        "tau",
        "theta",
        "min_u",
        "max_u",
        "osc_u_bar",
        "f_min",
        "f_max",
        "grad_sq_sup",
        "u_tilde_dev",
        "kappa_tilde_min",
        "kappa_tilde_max",
        "v_max",
        "dt",
    ];

    pub fn column_values(&self) -> [f64; 14] {
        [
            self.t,
            self.tau,
            self.theta,
            self.min_u,
            self.max_u,
            self.osc_u_bar,
            self.f_min,
            self.f_max,
            self.grad_sq_sup,
            self.u_tilde_dev,
            self.kappa_tilde_min,
            self.kappa_tilde_max,
            self.v_max,
            self.dt,
        ]
    }
}

/// A stored field snapshot (physical radial values).
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub t: f64,
    pub tau: f64,
    pub u: Vec<f64>,
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// Reached the requested horizon (or step limit).
    Completed,
    /// Physical radius reached the cap; for p > 1 this is the blow-up stop.
    RadiusCap { u_max: f64 },
    Aborted(AbortReason),
}

#[derive(Debug, Clone, PartialEq)]
pub enum AbortReason {
    AdmissibilityLost { node: usize, kappa: Vec<f64> },
    ResolutionLost { node: usize, v: f64 },
    NonPositive { node: usize },
    /// Proposed step fell below dt_min (stiffness / blow-up underresolved).
    StepFloor { dt: f64 },
    Numerical { node: usize, reason: String },
}

impl Termination {
    pub fn label(&self) -> String {
        match self {
            Termination::Completed => "completed".into(),
            Termination::RadiusCap { .. } => "blow-up".into(),
            Termination::Aborted(AbortReason::AdmissibilityLost { .. }) => "admissibility-lost".into(),
            Termination::Aborted(AbortReason::ResolutionLost { .. }) => "resolution-lost".into(),
            Termination::Aborted(AbortReason::NonPositive { .. }) => "non-positive".into(),
            Termination::Aborted(AbortReason::StepFloor { .. }) => "step-floor".into(),
            Termination::Aborted(AbortReason::Numerical { .. }) => "numerical".into(),
        }
    }
}

/// Full record of one flow run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Arc<DomainGrid>,
    pub p: f64,
    pub f_name: String,
    pub cone_name: String,
    pub mode: FlowMode,
    /// Reference radius (min u0 + max u0)/2 behind Theta, tau and u_tilde.
    pub r_ref: f64,
    /// Barrier radii pinched against the initial data.
    pub r1: f64,
    pub r2: f64,
    pub samples: Vec<Sample>,
    pub snapshots: Vec<Snapshot>,
    /// Snapshots at the exactly-landed checkpoint times, in request order.
    pub checkpoint_states: Vec<Snapshot>,
    pub termination: Termination,
    pub final_state: FlowState,
}

impl Trajectory {
    pub fn final_sample(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// Physical radial values of the final state.
    pub fn final_u(&self) -> Vec<f64> {
        match self.mode {
            FlowMode::Unrescaled { .. } => self.final_state.field.clone(),
            FlowMode::Rescaled { .. } => {
                let th = self.final_state.theta_ref;
                self.final_state.field.iter().map(|&w| w * th).collect()
            }
        }
    }
}

/// Per-node right-hand side of the unrescaled scalar flow, du/dt = v F^{-p}.
pub fn rhs_unrescaled(u: &GraphFunction, f: &CurvatureFunction, p: f64) -> Result<Vec<f64>> {
    let shape = compute_shape(u)?;
    let plan = PowPlan::new(-p);
    let mut out = vec![0.0; u.u().len()];
    for i in 0..out.len() {
        let kappa = shape.kappa_at(i);
        if !f.admissible(kappa) {
            return Err(Error::Inadmissible {
                node: i,
                kappa: kappa.to_vec(),
                cone: f.cone().name(),
            });
        }
        out[i] = shape.v[i] * plan.apply(f.eval_unchecked(kappa));
    }
    Ok(out)
}

/// Per-node right-hand side of the rescaled flow in log form,
/// d phi_tilde / d tau = v u_tilde^{-1} F(kappa_tilde)^{-p} - n^{-p}.
pub fn rhs_rescaled(
    grid: &Arc<DomainGrid>,
    phi_tilde: &[f64],
    f: &CurvatureFunction,
    p: f64,
) -> Result<Vec<f64>> {
    let u_tilde: Vec<f64> = phi_tilde.iter().map(|w| w.exp()).collect();
    let gf = GraphFunction::new(grid.clone(), u_tilde)?;
    let shape = compute_shape(&gf)?;
    let plan = PowPlan::new(-p);
    let n_inv_p = plan.apply(grid.dim() as f64);
    let mut out = vec![0.0; phi_tilde.len()];
    for i in 0..out.len() {
        let kappa = shape.kappa_at(i);
        if !f.admissible(kappa) {
            return Err(Error::Inadmissible {
                node: i,
                kappa: kappa.to_vec(),
                cone: f.cone().name(),
            });
        }
        out[i] = shape.v[i] / gf.u()[i] * plan.apply(f.eval_unchecked(kappa)) - n_inv_p;
    }
    Ok(out)
}

/// Parabolic step-size proposal: dt = dt_safety h_min^2 / D_max with
/// D_max = max over nodes of p F^{-(p+1)} (max_i dF/dkappa_i) / (v u^2),
/// the angular diffusion coefficient of the linearized operator in graph
/// coordinates (h_min includes the metric factor of the polar rings).
pub fn propose_dt(
    grid: &DomainGrid,
    shape: &ShapeData,
    f_vals: &[f64],
    field: &[f64],
    f: &CurvatureFunction,
    p: f64,
    dt_safety: f64,
) -> f64 {
    let plan = PowPlan::new(-(p + 1.0));
    propose_dt_inner(grid, &shape.v, &shape.kappa, f_vals, field, f, p, dt_safety, &plan)
}

#[allow(clippy::too_many_arguments)]
fn propose_dt_inner(
    grid: &DomainGrid,
    v: &[f64],
    kappa: &[[f64; 2]],
    f_vals: &[f64],
    field: &[f64],
    f: &CurvatureFunction,
    p: f64,
    dt_safety: f64,
    plan_p1: &PowPlan,
) -> f64 {
    let dim = grid.dim();
    let mut d_max = 0.0_f64;
    for i in 0..field.len() {
        let fg = f.max_grad_unchecked(&kappa[i][..dim], f_vals[i]);
        let d = p * plan_p1.apply(f_vals[i]) * fg / (v[i] * field[i] * field[i]);
        d_max = d_max.max(d);
    }
    let h = grid.min_spacing();
    dt_safety * h * h / d_max
}

struct Engine<'a> {
    grid: &'a Arc<DomainGrid>,
    cfg: &'a FlowConfig,
    plan_p: PowPlan,
    plan_p1: PowPlan,
    n_inv_p: f64,
    rescaled: bool,
}

impl<'a> Engine<'a> {
    /// Evaluate the shape and the flow speed of one stage field, writing
    /// into reused buffers.
    fn stage(
        &self,
        field: &[f64],
        core: &mut ShapeCore,
        f_vals: &mut Vec<f64>,
        rhs: &mut Vec<f64>,
    ) -> std::result::Result<(), AbortReason> {
        shape_pass(self.grid, field, core, None).map_err(|fault| {
            if fault.is_non_positive() {
                AbortReason::NonPositive { node: fault.node() }
            } else {
                AbortReason::Numerical {
                    node: fault.node(),
                    reason: "curvature eigen-solve failed".into(),
                }
            }
        })?;
        let n = field.len();
        let dim = self.grid.dim();
        f_vals.clear();
        f_vals.reserve(n);
        rhs.clear();
        rhs.reserve(n);
        let f = &self.cfg.f;
        for i in 0..n {
            let kappa = &core.kappa[i][..dim];
            if !f.admissible(kappa) {
                return Err(AbortReason::AdmissibilityLost {
                    node: i,
                    kappa: kappa.to_vec(),
                });
            }
            let fv = f.eval_unchecked(kappa);
            let speed = core.v[i] * self.plan_p.apply(fv);
            let r = if self.rescaled {
                speed - self.n_inv_p * field[i]
            } else {
                speed
            };
            if !r.is_finite() {
                return Err(AbortReason::Numerical {
                    node: i,
                    reason: format!("non-finite flow speed (F = {fv})"),
                });
            }
            f_vals.push(fv);
            rhs.push(r);
        }
        Ok(())
    }
}

fn axpy_into(out: &mut Vec<f64>, y: &[f64], a: f64, x: &[f64]) {
    out.clear();
    out.extend(y.iter().zip(x).map(|(yi, xi)| yi + a * xi));
}

/// Run the flow from `u0` until the horizon or a stop condition.
///
/// Initial admissibility failure (including missing strict convexity for
/// p > 1, where the cone is gamma_plus) is an immediate configuration error;
/// mid-run violations terminate the run with a structured reason instead.
pub fn run(u0: &GraphFunction, cfg: &FlowConfig) -> Result<Trajectory> {
    let grid = u0.grid().clone();
    cfg.validate(grid.dim())?;
    let shape0 = compute_shape(u0)?;
    if let Some(i) = shape0.first_inadmissible(&cfg.f) {
        return Err(Error::Inadmissible {
            node: i,
            kappa: shape0.kappa_at(i).to_vec(),
            cone: cfg.f.cone().name(),
        });
    }
    if shape0.max_v() > cfg.v_cap {
        return Err(Error::config(format!(
            "initial data is too steep: max v = {} exceeds v_cap = {}",
            shape0.max_v(),
            cfg.v_cap
        )));
    }
    let min0 = u0.min_u();
    let max0 = u0.max_u();
    let r_ref = 0.5 * (min0 + max0);
    let r1 = min0 * (1.0 - 1e-9);
    let r2 = max0 * (1.0 + 1e-9);
    let sf_ref = SphericalFlow::new(cfg.p, grid.dim(), r_ref)?;
    // The default radius cap is a blow-up guard; expanding flows with
    // 0 < p < 1 exist for all time and must reach any prescribed horizon.
    let r_max = cfg
        .r_max
        .unwrap_or(if cfg.p > 1.0 { 1e3 * r_ref } else { f64::INFINITY });
    let rescaled = cfg.mode.is_rescaled();

    let plan_p = PowPlan::new(-cfg.p);
    let engine = Engine {
        grid: &grid,
        cfg,
        plan_p,
        plan_p1: PowPlan::new(-(cfg.p + 1.0)),
        n_inv_p: plan_p.apply(grid.dim() as f64),
        rescaled,
    };
    // stage scratch, reused across all steps
    let mut core1 = ShapeCore::default();
    let mut core_s = ShapeCore::default();
    let mut f_vals1: Vec<f64> = Vec::new();
    let mut f_vals_s: Vec<f64> = Vec::new();
    let mut k1: Vec<f64> = Vec::new();
    let mut k2: Vec<f64> = Vec::new();
    let mut k3: Vec<f64> = Vec::new();
    let mut k4: Vec<f64> = Vec::new();
    let mut y_stage: Vec<f64> = Vec::new();

    let mut state = FlowState {
        t: 0.0,
        tau: 0.0,
        field: if rescaled {
            u0.u().iter().map(|&v| v / r_ref).collect()
        } else {
            u0.u().to_vec()
        },
        theta_ref: r_ref,
        step_count: 0,
        last_dt: 0.0,
    };

    let horizon = match cfg.mode {
        FlowMode::Unrescaled { t_end } => t_end,
        FlowMode::Rescaled { tau_end } => tau_end,
    };
    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.sort_by(f64::total_cmp);
    let mut next_cp = 0usize;

    let mut samples: Vec<Sample> = Vec::new();
    let mut snapshots: Vec<Snapshot> = Vec::new();
    let mut snap_stride = 1usize;
    let mut checkpoint_states: Vec<Snapshot> = Vec::new();
    let mut last_sampled_step = usize::MAX;
    let mut reached_end = horizon == 0.0;
    let mut pending_checkpoint = checkpoints.first().map_or(false, |&c| c == 0.0);
    if pending_checkpoint {
        next_cp = 1;
    }

    // Guarded reference scales: for p > 1 in unrescaled mode the flow can
    // outlive the reference sphere; clamp just below its blow-up time so
    // the bookkeeping stays finite (diagnostics treat such samples as out
    // of the reference's domain).
    let ref_scales = |t: f64| -> (f64, f64) {
        let t_eff = if cfg.p > 1.0 {
            t.min(sf_ref.t_star() * (1.0 - 1e-13))
        } else {
            t
        };
        let theta = sf_ref.theta(t_eff).expect("guarded time is in domain");
        let tau = sf_ref.tau_of_t(t_eff).expect("guarded time is in domain");
        (theta, tau)
    };

    let termination = loop {
        if let Err(reason) = engine.stage(&state.field, &mut core1, &mut f_vals1, &mut k1) {
            break Termination::Aborted(reason);
        }
        if let Some(i) = core1.v.iter().position(|&v| v > cfg.v_cap) {
            break Termination::Aborted(AbortReason::ResolutionLost {
                node: i,
                v: core1.v[i],
            });
        }

        let max_field = state.field.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let u_max_phys = if rescaled { max_field * state.theta_ref } else { max_field };
        let hit_cap = u_max_phys >= r_max;
        let hit_steps = cfg.max_steps.map_or(false, |m| state.step_count >= m);
        let terminal = reached_end || hit_cap || hit_steps;

        if pending_checkpoint {
            checkpoint_states.push(snapshot_of(&state, rescaled));
            pending_checkpoint = false;
        }
        if terminal || state.step_count % cfg.sample_every == 0 {
            if last_sampled_step != state.step_count {
                samples.push(make_sample(&state, &core1, &f_vals1, grid.dim(), rescaled));
                last_sampled_step = state.step_count;
                if samples.len().saturating_sub(1) % snap_stride == 0 {
                    snapshots.push(snapshot_of(&state, rescaled));
                    if snapshots.len() > 2 * cfg.snapshot_count.max(1) {
                        let mut idx = 0;
                        snapshots.retain(|_| {
                            let keep = idx % 2 == 0;
                            idx += 1;
                            keep
                        });
                        snap_stride *= 2;
                    }
                }
            }
        }
        if terminal {
            break if hit_cap && !reached_end {
                Termination::RadiusCap { u_max: u_max_phys }
            } else {
                Termination::Completed
            };
        }

        let dt_raw = propose_dt_inner(
            &grid,
            &core1.v,
            &core1.kappa,
            &f_vals1,
            &state.field,
            &cfg.f,
            cfg.p,
            cfg.dt_safety,
            &engine.plan_p1,
        );
        if !(dt_raw > cfg.dt_min) {
            break Termination::Aborted(AbortReason::StepFloor { dt: dt_raw });
        }
        let now = if rescaled { state.tau } else { state.t };
        let mut dt = dt_raw;
        let mut landing: Option<f64> = None;
        let mut lands_end = false;
        let mut lands_cp = false;
        if next_cp < checkpoints.len() && checkpoints[next_cp] - now <= dt {
            dt = checkpoints[next_cp] - now;
            landing = Some(checkpoints[next_cp]);
            lands_cp = true;
        }
        if horizon - now <= dt {
            dt = horizon - now;
            landing = Some(horizon);
            lands_end = true;
            lands_cp = next_cp < checkpoints.len() && checkpoints[next_cp] == horizon;
        }

        // classical 4-stage step, recomputing the shape each stage
        let abort = (|| -> std::result::Result<(), AbortReason> {
            axpy_into(&mut y_stage, &state.field, 0.5 * dt, &k1);
            engine.stage(&y_stage, &mut core_s, &mut f_vals_s, &mut k2)?;
            axpy_into(&mut y_stage, &state.field, 0.5 * dt, &k2);
            engine.stage(&y_stage, &mut core_s, &mut f_vals_s, &mut k3)?;
            axpy_into(&mut y_stage, &state.field, dt, &k3);
            engine.stage(&y_stage, &mut core_s, &mut f_vals_s, &mut k4)?;
            Ok(())
        })();
        match abort {
            Ok(()) => {
                let sixth = dt / 6.0;
                for i in 0..state.field.len() {
                    state.field[i] += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            Err(reason) => break Termination::Aborted(reason),
        }
        let new_now = landing.unwrap_or(now + dt);
        if rescaled {
            state.tau = new_now;
            state.t = sf_ref.t_of_tau(state.tau)?;
            state.theta_ref = sf_ref.theta_of_tau(state.tau);
        } else {
            state.t = new_now;
            let (theta, tau) = ref_scales(state.t);
            state.theta_ref = theta;
            state.tau = tau;
        }
        state.last_dt = dt;
        state.step_count += 1;
        if lands_cp {
            pending_checkpoint = true;
            next_cp += 1;
        }
        if lands_end {
            reached_end = true;
        }
    };

    // make sure the terminal state is recorded even if the loop broke on an
    // abort before sampling
    if last_sampled_step != state.step_count
        && engine
            .stage(&state.field, &mut core1, &mut f_vals1, &mut k1)
            .is_ok()
    {
        samples.push(make_sample(&state, &core1, &f_vals1, grid.dim(), rescaled));
        snapshots.push(snapshot_of(&state, rescaled));
    }

    Ok(Trajectory {
        grid,
        p: cfg.p,
        f_name: cfg.f.name(),
        cone_name: cfg.f.cone().name(),
        mode: cfg.mode,
        r_ref,
        r1,
        r2,
        samples,
        snapshots,
        checkpoint_states,
        termination,
        final_state: state,
    })
}

fn snapshot_of(state: &FlowState, rescaled: bool) -> Snapshot {
    let u = if rescaled {
        state.field.iter().map(|&w| w * state.theta_ref).collect()
    } else {
        state.field.clone()
    };
    Snapshot {
        t: state.t,
        tau: state.tau,
        u,
    }
}

fn make_sample(
    state: &FlowState,
    core: &ShapeCore,
    f_vals: &[f64],
    dim: usize,
    rescaled: bool,
) -> Sample {
    let theta = state.theta_ref;
    let n = state.field.len();
    let mut min_w = f64::INFINITY;
    let mut max_w = f64::NEG_INFINITY;
    let mut f_min = f64::INFINITY;
    let mut f_max = f64::NEG_INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    let mut kt_min = f64::INFINITY;
    let mut kt_max = f64::NEG_INFINITY;
    let mut ub_min = f64::INFINITY;
    let mut ub_max = f64::NEG_INFINITY;
    let mut dev = 0.0_f64;
    for i in 0..n {
        let w = state.field[i];
        min_w = min_w.min(w);
        max_w = max_w.max(w);
        f_min = f_min.min(f_vals[i]);
        f_max = f_max.max(f_vals[i]);
        v_max = v_max.max(core.v[i]);
        let ub = w / core.v[i];
        ub_min = ub_min.min(ub);
        ub_max = ub_max.max(ub);
        let ks = &core.kappa[i];
        let (klo, khi) = (ks[0], ks[if dim == 2 { 1 } else { 0 }]);
        kt_min = kt_min.min(klo);
        kt_max = kt_max.max(khi);
        let u_tilde = if rescaled { w } else { w / theta };
        dev = dev.max((u_tilde - 1.0).abs());
    }
    // In rescaled mode the shape was computed on u_tilde, so kappa is
    // already kappa Theta and F is F(kappa Theta); physical quantities
    // recover the Theta factors.
    let (min_u, max_u, osc_u_bar, f_min, f_max, kt_min, kt_max) = if rescaled {
        (
            min_w * theta,
            max_w * theta,
            (ub_max - ub_min) * theta,
            f_min / theta,
            f_max / theta,
            kt_min,
            kt_max,
        )
    } else {
        (
            min_w,
            max_w,
            ub_max - ub_min,
            f_min,
            f_max,
            kt_min * theta,
            kt_max * theta,
        )
    };
    Sample {
        t: state.t,
        tau: state.tau,
        theta,
        min_u,
        max_u,
        osc_u_bar,
        f_min,
        f_max,
        grad_sq_sup: v_max * v_max - 1.0,
        u_tilde_dev: dev,
        kappa_tilde_min: kt_min,
        kappa_tilde_max: kt_max,
        v_max,
        dt: state.last_dt,
    }
}

/// Least-squares estimate of the blow-up time from a radius-capped run.
#[derive(Debug, Clone, Copy)]
pub struct BlowUpEstimate {
    pub t_star: f64,
    pub samples_used: usize,
    pub low_confidence: bool,
}

/// Fit (max u)^{1-p} against t over the last decade of growth; the exact
/// spherical law Theta^{1-p} = r0^{1-p} - (p-1) n^{-p} t is linear, so the
/// t-intercept estimates T*. Returns (t_star, samples used).
pub(crate) fn fit_t_star(t: &[f64], max_u: &[f64], p: f64) -> Option<(f64, usize)> {
    let last_max = *max_u.last()?;
    let pts: Vec<(f64, f64)> = t
        .iter()
        .zip(max_u)
        .filter(|(_, &m)| m >= last_max / 10.0)
        .map(|(&t, &m)| (t, m.powf(1.0 - p)))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    if !(slope < 0.0) {
        return None;
    }
    Some((-intercept / slope, pts.len()))
}

/// Blow-up time estimate for a radius-capped p > 1 run.
pub fn estimate_blow_up(traj: &Trajectory) -> Option<BlowUpEstimate> {
    if traj.p <= 1.0 || !matches!(traj.termination, Termination::RadiusCap { .. }) {
        return None;
    }
    let t: Vec<f64> = traj.samples.iter().map(|s| s.t).collect();
    let max_u: Vec<f64> = traj.samples.iter().map(|s| s.max_u).collect();
    let (t_star, used) = fit_t_star(&t, &max_u, traj.p)?;
    Some(BlowUpEstimate {
        t_star,
        samples_used: used,
        low_confidence: used < 5,
    })
}
