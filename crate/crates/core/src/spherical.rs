//! Closed-form spherical solutions of the flow, their blow-up time, the
//! tau reparameterization, and barrier utilities. These are the analytic
//! oracles for everything else.
//!
//! A sphere of radius r evolves by dr/dt = n^{-p} r^p, giving
//!
//!   Theta(t, r) = { (1-p) n^{-p} t + r^{1-p} }^{1/(1-p)},
//!
//! which exists for all time when 0 < p < 1 and blows up at
//! T* = n^p r^{1-p} / (p-1) when p > 1. Time is rescaled by
//! d tau / dt = Theta^{p-1}, tau(0) = 0, under which Theta = r e^{n^{-p} tau}.

use crate::error::{Error, Result};
use crate::geometry::GraphFunction;

/// Relative distance to the blow-up time below which Theta is clamped
/// instead of overflowing; verification probes close to blow-up.
const T_STAR_GUARD: f64 = 1e-14;

/// The exact spherical flow with exponent p on S^n from initial radius r0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalFlow {
    p: f64,
    n: usize,
    r0: f64,
}

impl SphericalFlow {
    pub fn new(p: f64, n: usize, r0: f64) -> Result<Self> {
        if !(p.is_finite() && p > 0.0 && p != 1.0) {
            return Err(Error::config(format!(
                "flow exponent must satisfy 0 < p != 1, got {p}"
            )));
        }
        if n == 0 {
            return Err(Error::config("sphere dimension must be >= 1"));
        }
        if !(r0.is_finite() && r0 > 0.0) {
            return Err(Error::config(format!("initial radius must be positive, got {r0}")));
        }
        Ok(SphericalFlow { p, n, r0 })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    fn n_pow_minus_p(&self) -> f64 {
        (self.n as f64).powf(-self.p)
    }

    /// Blow-up time: n^p r0^{1-p} / (p-1) for p > 1, +infinity for p < 1.
    pub fn t_star(&self) -> f64 {
        if self.p < 1.0 {
            f64::INFINITY
        } else {
            (self.n as f64).powf(self.p) * self.r0.powf(1.0 - self.p) / (self.p - 1.0)
        }
    }

    /// The argument (1-p) n^{-p} r0^{p-1} t of the closed forms, guarded
    /// so that 1 + x stays positive (>= T_STAR_GUARD relative) for p > 1.
    fn guarded_x(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::domain(format!("time must be finite and >= 0, got {t}")));
        }
        let x = (1.0 - self.p) * self.n_pow_minus_p() * self.r0.powf(self.p - 1.0) * t;
        if self.p > 1.0 {
            if t >= self.t_star() {
                return Err(Error::domain(format!(
                    "t = {t} is at or beyond the blow-up time T* = {}",
                    self.t_star()
                )));
            }
            // 1 + x = 1 - t/T*; clamp the relative distance to blow-up
            Ok(x.max(T_STAR_GUARD - 1.0))
        } else {
            Ok(x)
        }
    }

    /// The spherical radius Theta(t, r0).
    pub fn theta(&self, t: f64) -> Result<f64> {
        if t == 0.0 {
            return Ok(self.r0);
        }
        let x = self.guarded_x(t)?;
        Ok(self.r0 * (1.0 + x).powf(1.0 / (1.0 - self.p)))
    }

    /// tau(t) = n^p/(1-p) ln(1 + (1-p) n^{-p} r0^{p-1} t); tau(0) = 0,
    /// strictly increasing, diverging as t -> T* (p > 1) or t -> inf (p < 1).
    pub fn tau_of_t(&self, t: f64) -> Result<f64> {
        let x = self.guarded_x(t)?;
        Ok(x.ln_1p() / ((1.0 - self.p) * self.n_pow_minus_p()))
    }

    /// Analytic inverse of [`Self::tau_of_t`].
    pub fn t_of_tau(&self, tau: f64) -> Result<f64> {
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::domain(format!("tau must be finite and >= 0, got {tau}")));
        }
        let a = (1.0 - self.p) * self.n_pow_minus_p();
        Ok((a * tau).exp_m1() / (a * self.r0.powf(self.p - 1.0)))
    }

    /// Theta along tau: r0 e^{n^{-p} tau}, avoiding the blow-up guard entirely.
    pub fn theta_of_tau(&self, tau: f64) -> f64 {
        self.r0 * (self.n_pow_minus_p() * tau).exp()
    }
}

/// Result of a barrier comparison at one time.
#[derive(Debug, Clone, Copy)]
pub struct BarrierCheck {
    /// min u - Theta(t, r1); positive when the lower barrier holds.
    pub lower_margin: f64,
    /// Theta(t, r2) - max u; positive when the upper barrier holds.
    pub upper_margin: f64,
    pub pass: bool,
}

/// Check the spherical barriers Theta(t, r1) < u < Theta(t, r2) strictly.
///
/// A failed barrier is a reported result, not an error; errors only arise
/// when t is outside the common existence interval of the two barriers.
pub fn check_barriers(
    u: &GraphFunction,
    t: f64,
    p: f64,
    r1: f64,
    r2: f64,
) -> Result<BarrierCheck> {
    let n = u.grid().dim();
    let lower = SphericalFlow::new(p, n, r1)?;
    let upper = SphericalFlow::new(p, n, r2)?;
    let theta1 = lower.theta(t)?;
    let theta2 = upper.theta(t)?;
    let lower_margin = u.min_u() - theta1;
    let upper_margin = theta2 - u.max_u();
    Ok(BarrierCheck {
        lower_margin,
        upper_margin,
        pass: lower_margin > 0.0 && upper_margin > 0.0,
    })
}

/// Largest t at which both barriers exist (min of the two blow-up times).
pub fn barrier_horizon(p: f64, n: usize, r1: f64, r2: f64) -> f64 {
    match (SphericalFlow::new(p, n, r1), SphericalFlow::new(p, n, r2)) {
        (Ok(a), Ok(b)) => a.t_star().min(b.t_star()),
        _ => 0.0,
    }
}
