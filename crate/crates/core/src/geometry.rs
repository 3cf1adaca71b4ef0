//! Extrinsic geometry of radial graphs M = { u(x) x : x in S^n }: tilt
//! factor, shape operator, principal curvatures, support function, and the
//! initial-shape library.
//!
//! With phi = log u the mixed, u-scaled shape operator of the graph is
//!
//!   u h^i_j = v^{-1} { delta^i_j - (sigma^{ik} - v^{-2} phi^i phi^k) phi_{;kj} },
//!
//! for the outward normal, so a round sphere of radius r has kappa_i = +1/r.
//! Principal curvatures are taken from the symmetric pencil
//! (g_ik u h^k_j, g_ij) with g_ij = phi_i phi_j + sigma_ij, which has the
//! same eigenvalues but is numerically guaranteed real.
//!
//! The phi derivatives are obtained from derivatives of u through the exact
//! identities phi_i = u_i / u and phi_{;ij} = u_{;ij} / u - phi_i phi_j,
//! which keeps transcendental calls out of the per-node loop.

use crate::curvature::CurvatureFunction;
use crate::error::{Error, Result};
use crate::grid::{self, DomainGrid, GridKind};
use std::sync::Arc;

/// A positive radial field over a [`DomainGrid`]: the hypersurface graph u.
#[derive(Debug, Clone)]
pub struct GraphFunction {
    grid: Arc<DomainGrid>,
    u: Vec<f64>,
}

impl GraphFunction {
    /// Wrap radial values; every value must be positive and finite
    /// (star-shapedness about the origin).
    pub fn new(grid: Arc<DomainGrid>, u: Vec<f64>) -> Result<Self> {
        if u.len() != grid.n_nodes() {
            return Err(Error::domain(format!(
                "field has {} values for a grid of {} nodes",
                u.len(),
                grid.n_nodes()
            )));
        }
        if let Some(i) = u.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::domain(format!(
                "radial value u[{i}] = {} is not positive", u[i]
            )));
        }
        Ok(GraphFunction { grid, u })
    }

    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Per-node extrinsic geometry of a graph.
#[derive(Debug, Clone)]
pub struct ShapeData {
    /// Tilt factor v = sqrt(1 + |D phi|^2) >= 1 (dimensionless).
    pub v: Vec<f64>,
    /// Covariant gradient of phi = log u.
    pub phi_grad: Vec<[f64; 2]>,
    /// Covariant Hessian of phi (tt, tl, ll components).
    pub phi_hess: Vec<[f64; 3]>,
    /// Mixed shape operator h^i_j (1/length), row-major 2x2 (only [0][0] on S^1).
    pub shape_op: Vec<[[f64; 2]; 2]>,
    /// Principal curvatures, ascending (1/length); slot 1 unused on S^1.
    pub kappa: Vec<[f64; 2]>,
    /// Support function u_bar = u / v (length).
    pub u_bar: Vec<f64>,
    /// chi = v / u (1/length).
    pub chi: Vec<f64>,
    dim: usize,
}

impl ShapeData {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Principal curvatures at a node as a slice of length n.
    #[inline]
    pub fn kappa_at(&self, node: usize) -> &[f64] {
        &self.kappa[node][..self.dim]
    }

    pub fn max_v(&self) -> f64 {
        self.v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First node whose curvatures leave the defining cone of `f`, if any.
    pub fn first_inadmissible(&self, f: &CurvatureFunction) -> Option<usize> {
        (0..self.kappa.len()).find(|&i| !f.admissible(self.kappa_at(i)))
    }
}

/// Compute the full extrinsic geometry of a graph.
pub fn compute_shape(gf: &GraphFunction) -> Result<ShapeData> {
    compute_shape_of(gf.grid(), gf.u())
}

/// Slice-level variant used by the flow engine's stage loop.
pub fn compute_shape_of(grid: &DomainGrid, u: &[f64]) -> Result<ShapeData> {
    let n = u.len();
    let dim = grid.dim();
    let mut core = ShapeCore::default();
    let mut full = FullShapeParts {
        phi_grad: Vec::with_capacity(n),
        phi_hess: Vec::with_capacity(n),
        shape_op: Vec::with_capacity(n),
        u_bar: Vec::with_capacity(n),
        chi: Vec::with_capacity(n),
    };
    shape_pass(grid, u, &mut core, Some(&mut full)).map_err(|fault| fault.into_error(u))?;
    Ok(ShapeData {
        v: core.v,
        phi_grad: full.phi_grad,
        phi_hess: full.phi_hess,
        shape_op: full.shape_op,
        kappa: core.kappa,
        u_bar: full.u_bar,
        chi: full.chi,
        dim,
    })
}

/// Lean per-node outputs needed by the time stepper every stage.
#[derive(Debug, Default, Clone)]
pub(crate) struct ShapeCore {
    pub v: Vec<f64>,
    pub kappa: Vec<[f64; 2]>,
    /// scratch: longitude derivative field on S^2
    f_l: Vec<f64>,
}

pub(crate) struct FullShapeParts {
    phi_grad: Vec<[f64; 2]>,
    phi_hess: Vec<[f64; 3]>,
    shape_op: Vec<[[f64; 2]; 2]>,
    u_bar: Vec<f64>,
    chi: Vec<f64>,
}

/// Kernel failure; converted to an [`Error`] or an engine abort by callers.
#[derive(Debug, Clone, Copy)]
pub(crate) enum ShapeFault {
    NonPositive(usize),
    Numerical(usize),
}

impl ShapeFault {
    #[cold]
    fn into_error(self, u: &[f64]) -> Error {
        match self {
            ShapeFault::NonPositive(i) => {
                Error::domain(format!("radial value u[{i}] = {} is not positive", u[i]))
            }
            ShapeFault::Numerical(i) => Error::Numerical {
                node: i,
                reason: "curvature eigen-solve failed (non-finite or degenerate pencil)".into(),
            },
        }
    }

    pub(crate) fn node(self) -> usize {
        match self {
            ShapeFault::NonPositive(i) | ShapeFault::Numerical(i) => i,
        }
    }

    pub(crate) fn is_non_positive(self) -> bool {
        matches!(self, ShapeFault::NonPositive(_))
    }
}

/// One pass over the nodes: finite differences of u fused with the graph
/// algebra. Fills `core` (tilt factor and principal curvatures) and, when
/// requested, the remaining [`ShapeData`] fields. This is the stepping hot
/// path, so the differences are taken ring by ring with hoisted trigonometry
/// and phi-derivatives come from u-derivatives via phi_i = u_i / u,
/// phi_{;ij} = u_{;ij} / u - phi_i phi_j (no per-node transcendentals).
///
/// The pencil uses two exact identities of g_ij = phi_i phi_j + sigma_ij:
/// the covariant u-scaled second fundamental form is (g_ij - phi_{;ij}) / v
/// (symmetric by construction) and det g = sin^2(theta) v^2.
pub(crate) fn shape_pass(
    grid: &DomainGrid,
    u: &[f64],
    core: &mut ShapeCore,
    mut full: Option<&mut FullShapeParts>,
) -> std::result::Result<(), ShapeFault> {
    let n = u.len();
    assert_eq!(n, grid.n_nodes(), "field length mismatch");
    core.v.clear();
    core.v.reserve(n);
    core.kappa.clear();
    core.kappa.reserve(n);
    match *grid.kind() {
        GridKind::Circle { .. } => {
            let h = grid.spacing()[0];
            let inv12h = 1.0 / (12.0 * h);
            let inv12h2 = 1.0 / (12.0 * h * h);
            let (p1, m1, p2, m2, _) = grid.neighbors();
            for i in 0..n {
                let f0 = u[i];
                if !(f0 > 0.0) {
                    return Err(ShapeFault::NonPositive(i));
                }
                let fp1 = u[p1[i]];
                let fm1 = u[m1[i]];
                let fp2 = u[p2[i]];
                let fm2 = u[m2[i]];
                let u_t = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) * inv12h;
                let u_tt = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) * inv12h2;
                let inv_u = 1.0 / f0;
                let pt = u_t * inv_u;
                let ptt = u_tt * inv_u - pt * pt;
                let v2 = 1.0 + pt * pt;
                let v = v2.sqrt();
                // u h = v^{-1} (1 - (1 - pt^2/v^2) ptt) = (v^2 - ptt) / v^3
                let uh = (v2 - ptt) / (v2 * v);
                let kappa = uh * inv_u;
                if !kappa.is_finite() {
                    return Err(ShapeFault::Numerical(i));
                }
                core.v.push(v);
                core.kappa.push([kappa, kappa]);
                if let Some(f) = full.as_deref_mut() {
                    f.phi_grad.push([pt, 0.0]);
                    f.phi_hess.push([ptt, 0.0, 0.0]);
                    f.shape_op.push([[kappa, 0.0], [0.0, 0.0]]);
                    f.u_bar.push(f0 / v);
                    f.chi.push(v * inv_u);
                }
            }
        }
        GridKind::LatLong { n_theta, n_lambda } => {
            let [h_t, h_l] = grid.spacing();
            let inv2ht = 1.0 / (2.0 * h_t);
            let invht2 = 1.0 / (h_t * h_t);
            let inv2hl = 1.0 / (2.0 * h_l);
            let invhl2 = 1.0 / (h_l * h_l);
            let (p1, m1, _, _, opp) = grid.neighbors();
            // longitude derivative field, needed for the mixed component
            core.f_l.clear();
            core.f_l.reserve(n);
            for j in 0..n_theta {
                let ring = &u[j * n_lambda..(j + 1) * n_lambda];
                for k in 0..n_lambda {
                    core.f_l.push((ring[p1[k]] - ring[m1[k]]) * inv2hl);
                }
            }
            let f_l = &core.f_l;
            for j in 0..n_theta {
                let (sin_t, cos_t, cot_t) = grid.trig(j);
                let s2 = sin_t * sin_t;
                let s2_inv = 1.0 / s2;
                let sc = sin_t * cos_t;
                let base = j * n_lambda;
                let (up_base, up_opp) = if j > 0 { ((j - 1) * n_lambda, false) } else { (0, true) };
                let (dn_base, dn_opp) = if j + 1 < n_theta {
                    ((j + 1) * n_lambda, false)
                } else {
                    ((n_theta - 1) * n_lambda, true)
                };
                for k in 0..n_lambda {
                    let i = base + k;
                    let ku = if up_opp { opp[k] } else { k };
                    let kd = if dn_opp { opp[k] } else { k };
                    let f0 = u[i];
                    if !(f0 > 0.0) {
                        return Err(ShapeFault::NonPositive(i));
                    }
                    let up = u[up_base + ku];
                    let dn = u[dn_base + kd];
                    let east = u[base + p1[k]];
                    let west = u[base + m1[k]];
                    let u_t = (dn - up) * inv2ht;
                    let u_tt = (dn - 2.0 * f0 + up) * invht2;
                    let u_ll = (east - 2.0 * f0 + west) * invhl2;
                    let u_tl = (f_l[dn_base + kd] - f_l[up_base + ku]) * inv2ht;
                    let u_l = f_l[i];
                    // covariant Hessian of u: Gamma^l_{tl} = cot, Gamma^t_{ll} = -sin cos
                    let u_h_tl = u_tl - cot_t * u_l;
                    let u_h_ll = u_ll + sc * u_t;
                    // phi = log u through the exact quotient identities
                    let inv_u = 1.0 / f0;
                    let pt = u_t * inv_u;
                    let pl = u_l * inv_u;
                    let ptt = u_tt * inv_u - pt * pt;
                    let ptl = u_h_tl * inv_u - pt * pl;
                    let pll = u_h_ll * inv_u - pl * pl;
                    // tilt
                    let pl_up = pl * s2_inv;
                    let dphi2 = pt * pt + pl * pl_up;
                    let v2 = 1.0 + dphi2;
                    let v = v2.sqrt();
                    let inv_v = 1.0 / v;
                    // pencil: g = phi phi + sigma, m = (g - phi_hess) / v
                    let g_tt = pt * pt + 1.0;
                    let g_tl = pt * pl;
                    let g_ll = pl * pl + s2;
                    let m_tt = (g_tt - ptt) * inv_v;
                    let m_tl = (g_tl - ptl) * inv_v;
                    let m_ll = (g_ll - pll) * inv_v;
                    let a = s2 * v2; // det g
                    let b = 2.0 * m_tl * g_tl - m_tt * g_ll - m_ll * g_tt;
                    let c = m_tt * m_ll - m_tl * m_tl;
                    if !(b.is_finite() && c.is_finite() && a > 0.0) {
                        return Err(ShapeFault::Numerical(i));
                    }
                    let mut disc = b * b - 4.0 * a * c;
                    if disc < 0.0 {
                        // the symmetric pencil is real; tolerate roundoff only
                        if disc > -1e-12 * (b * b + (4.0 * a * c).abs()) {
                            disc = 0.0;
                        } else {
                            return Err(ShapeFault::Numerical(i));
                        }
                    }
                    let sq = disc.sqrt();
                    let q = -0.5 * (b + if b >= 0.0 { sq } else { -sq });
                    // q/a keeps the round sphere exact (x/x = 1)
                    let r1 = q / a;
                    let r2 = if q != 0.0 { c / q } else { 0.0 };
                    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
                    core.v.push(v);
                    core.kappa.push([lo * inv_u, hi * inv_u]);
                    if let Some(f) = full.as_deref_mut() {
                        f.phi_grad.push([pt, pl]);
                        f.phi_hess.push([ptt, ptl, pll]);
                        // mixed operator h^i_j = g^{ik} m_kj / u
                        let inv_a = 1.0 / a;
                        let gi_tt = g_ll * inv_a;
                        let gi_tl = -g_tl * inv_a;
                        let gi_ll = g_tt * inv_a;
                        f.shape_op.push([
                            [
                                (gi_tt * m_tt + gi_tl * m_tl) * inv_u,
                                (gi_tt * m_tl + gi_tl * m_ll) * inv_u,
                            ],
                            [
                                (gi_tl * m_tt + gi_ll * m_tl) * inv_u,
                                (gi_tl * m_tl + gi_ll * m_ll) * inv_u,
                            ],
                        ]);
                        f.u_bar.push(f0 * inv_v);
                        f.chi.push(v * inv_u);
                    }
                }
            }
        }
    }
    Ok(())
}

/// |Du|^2 = sigma^{ij} phi_i phi_j per node, plus its sup over nodes.
pub fn grad_norm_sq(gf: &GraphFunction) -> (Vec<f64>, f64) {
    let grad = grid::grad_sigma(gf.grid(), gf.u());
    let mut field = vec![0.0; gf.u().len()];
    let mut sup = 0.0_f64;
    for i in 0..field.len() {
        let si = gf.grid().sigma_inv(i);
        let inv_u = 1.0 / gf.u()[i];
        let pt = grad[i][0] * inv_u;
        let pl = grad[i][1] * inv_u;
        let w = pt * pt * si[0] + pl * pl * si[1];
        field[i] = w;
        sup = sup.max(w);
    }
    (field, sup)
}

/// Closed-form initial hypersurfaces.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialShape {
    /// Round sphere of radius r (any dimension).
    Sphere { r: f64 },
    /// Planar ellipse with semi-axes a, b (S^1 only):
    /// u(theta) = a b / sqrt(b^2 cos^2 + a^2 sin^2).
    Ellipse { a: f64, b: f64 },
    /// Ellipsoid of revolution with equatorial semi-axis a and polar
    /// semi-axis c (S^2 only): u(theta) = a c / sqrt(c^2 sin^2 + a^2 cos^2).
    EllipsoidOfRevolution { a: f64, c: f64 },
    /// r (1 + eps cos(mode theta)) on S^1, r (1 + eps P_mode(cos theta)) on S^2.
    PerturbedSphere { r: f64, eps: f64, mode: u32 },
}

impl InitialShape {
    pub fn name(&self) -> String {
        match self {
            InitialShape::Sphere { r } => format!("sphere({r})"),
            InitialShape::Ellipse { a, b } => format!("ellipse({a},{b})"),
            InitialShape::EllipsoidOfRevolution { a, c } => format!("ellipsoid_of_revolution({a},{c})"),
            InitialShape::PerturbedSphere { r, eps, mode } => {
                format!("perturbed_sphere({r},{eps},{mode})")
            }
        }
    }
}

/// Sample an initial shape on a grid.
pub fn make_initial(grid: &Arc<DomainGrid>, shape: &InitialShape) -> Result<GraphFunction> {
    let positive = |name: &str, v: f64| -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::config(format!("shape parameter {name} must be positive, got {v}")))
        }
    };
    let u: Vec<f64> = match *shape {
        InitialShape::Sphere { r } => {
            positive("r", r)?;
            vec![r; grid.n_nodes()]
        }
        InitialShape::Ellipse { a, b } => {
            positive("a", a)?;
            positive("b", b)?;
            if grid.dim() != 1 {
                return Err(Error::config("ellipse initial shape requires an S^1 grid"));
            }
            grid.nodes()
                .iter()
                .map(|n| {
                    let (s, c) = n[0].sin_cos();
                    a * b / (b * b * c * c + a * a * s * s).sqrt()
                })
                .collect()
        }
        InitialShape::EllipsoidOfRevolution { a, c } => {
            positive("a", a)?;
            positive("c", c)?;
            if grid.dim() != 2 {
                return Err(Error::config(
                    "ellipsoid_of_revolution initial shape requires an S^2 grid",
                ));
            }
            grid.nodes()
                .iter()
                .map(|n| {
                    let (s, co) = n[0].sin_cos();
                    a * c / (c * c * s * s + a * a * co * co).sqrt()
                })
                .collect()
        }
        InitialShape::PerturbedSphere { r, eps, mode } => {
            positive("r", r)?;
            if !eps.is_finite() {
                return Err(Error::config("perturbation eps must be finite"));
            }
            match grid.dim() {
                1 => grid
                    .nodes()
                    .iter()
                    .map(|n| r * (1.0 + eps * (mode as f64 * n[0]).cos()))
                    .collect(),
                _ => grid
                    .nodes()
                    .iter()
                    .map(|n| r * (1.0 + eps * legendre_p(mode, n[0].cos())))
                    .collect(),
            }
        }
    };
    GraphFunction::new(grid.clone(), u)
}

/// Legendre polynomial P_l(x) by the three-term recurrence.
pub fn legendre_p(l: u32, x: f64) -> f64 {
    match l {
        0 => 1.0,
        1 => x,
        _ => {
            let mut pm = 1.0;
            let mut p = x;
            for k in 1..l {
                let kf = k as f64;
                let next = ((2.0 * kf + 1.0) * x * p - kf * pm) / (kf + 1.0);
                pm = p;
                p = next;
            }
            p
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_circle_grid, build_latlong_grid};
    use std::f64::consts::PI;

    fn circle(n: usize) -> Arc<DomainGrid> {
        Arc::new(build_circle_grid(n).unwrap())
    }

    fn latlong(nt: usize, nl: usize) -> Arc<DomainGrid> {
        Arc::new(build_latlong_grid(nt, nl).unwrap())
    }

    /// Parametric-curve oracle: curvature of the ellipse (a cos t, b sin t)
    /// at the parameter hit by graph angle theta.
    fn ellipse_kappa_oracle(a: f64, b: f64, theta: f64) -> f64 {
        let t = f64::atan2(a * theta.sin(), b * theta.cos());
        let (s, c) = t.sin_cos();
        a * b / (a * a * s * s + b * b * c * c).powf(1.5)
    }

    #[test]
    fn round_sphere_is_umbilic_exactly() {
        for gf in [
            make_initial(&circle(32), &InitialShape::Sphere { r: 2.0 }).unwrap(),
            make_initial(&latlong(8, 16), &InitialShape::Sphere { r: 2.0 }).unwrap(),
        ] {
            let sd = compute_shape(&gf).unwrap();
            for i in 0..gf.u().len() {
                assert!((sd.v[i] - 1.0).abs() < 1e-14);
                assert!((sd.u_bar[i] - 2.0).abs() < 1e-14);
                for &k in sd.kappa_at(i) {
                    assert!((k - 0.5).abs() < 1e-10, "kappa = {k} at node {i}");
                }
            }
        }
    }

    #[test]
    fn ellipse_curvature_matches_parametric_oracle() {
        let g = circle(128);
        let gf = make_initial(&g, &InitialShape::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        let sd = compute_shape(&gf).unwrap();
        let mut worst = 0.0_f64;
        for (i, n) in g.nodes().iter().enumerate() {
            let want = ellipse_kappa_oracle(2.0, 1.0, n[0]);
            worst = worst.max((sd.kappa_at(i)[0] - want).abs());
        }
        assert!(worst < 5e-4, "worst curvature error {worst}");
    }

    #[test]
    fn wavy_graph_matches_immersion_oracle() {
        // u = 2 + 0.1 sin(3 theta); independent route through the planar
        // immersion's parametric curvature formula with analytic u', u''.
        let g = circle(256);
        let u: Vec<f64> = g.nodes().iter().map(|n| 2.0 + 0.1 * (3.0 * n[0]).sin()).collect();
        let gf = GraphFunction::new(g.clone(), u).unwrap();
        let sd = compute_shape(&gf).unwrap();
        let mut worst = 0.0_f64;
        for (i, n) in g.nodes().iter().enumerate() {
            let t = n[0];
            let u0 = 2.0 + 0.1 * (3.0 * t).sin();
            let u1 = 0.3 * (3.0 * t).cos();
            let u2 = -0.9 * (3.0 * t).sin();
            let want = (u0 * u0 + 2.0 * u1 * u1 - u0 * u2)
                / (u0 * u0 + u1 * u1).powf(1.5);
            worst = worst.max((sd.kappa_at(i)[0] - want).abs());
        }
        assert!(worst < 1e-6, "worst curvature error {worst}");
    }

    #[test]
    fn ellipsoid_curvatures_match_parametric_oracle() {
        let (a, c) = (1.0, 1.3);
        let g = latlong(32, 64);
        let gf = make_initial(&g, &InitialShape::EllipsoidOfRevolution { a, c }).unwrap();
        let sd = compute_shape(&gf).unwrap();
        let mut worst = 0.0_f64;
        for (i, n) in g.nodes().iter().enumerate() {
            // parametric colatitude phi of the point at graph angle theta
            let phi = f64::atan2(c * n[0].sin(), a * n[0].cos());
            let (s, co) = phi.sin_cos();
            let w = (a * a * co * co + c * c * s * s).sqrt();
            let k_meridian = a * c / (w * w * w);
            let k_parallel = c / (a * w);
            let mut want = [k_meridian, k_parallel];
            want.sort_by(f64::total_cmp);
            let got = sd.kappa_at(i);
            worst = worst.max((got[0] - want[0]).abs().max((got[1] - want[1]).abs()));
        }
        assert!(worst < 2e-2, "worst curvature error {worst}");
    }

    #[test]
    fn pencil_eigenvalues_match_mixed_operator() {
        let g = latlong(16, 32);
        let gf = make_initial(
            &g,
            &InitialShape::PerturbedSphere { r: 1.0, eps: 0.15, mode: 3 },
        )
        .unwrap();
        let sd = compute_shape(&gf).unwrap();
        for i in 0..g.n_nodes() {
            let m = sd.shape_op[i];
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
            let mut direct = [(tr - disc) / 2.0, (tr + disc) / 2.0];
            direct.sort_by(f64::total_cmp);
            let got = sd.kappa_at(i);
            assert!(
                (got[0] - direct[0]).abs() < 1e-10 && (got[1] - direct[1]).abs() < 1e-10,
                "node {i}: pencil {:?} vs direct {:?}",
                got,
                direct
            );
        }
    }

    #[test]
    fn tilt_factor_properties() {
        let g = circle(64);
        let gf = make_initial(&g, &InitialShape::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        let sd = compute_shape(&gf).unwrap();
        for i in 0..g.n_nodes() {
            assert!(sd.v[i] >= 1.0);
            assert!(sd.u_bar[i] <= gf.u()[i] + 1e-15);
            let grad_zero = sd.phi_grad[i][0].abs() < 1e-12;
            let v_one = (sd.v[i] - 1.0).abs() < 1e-12;
            assert_eq!(grad_zero, v_one, "v = 1 iff D phi = 0 at node {i}");
        }
    }

    #[test]
    fn curvature_scales_inversely_with_dilation() {
        let g = circle(64);
        let gf = make_initial(&g, &InitialShape::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        let lambda = 3.7;
        let scaled = GraphFunction::new(
            g.clone(),
            gf.u().iter().map(|&v| lambda * v).collect(),
        )
        .unwrap();
        let sd = compute_shape(&gf).unwrap();
        let sds = compute_shape(&scaled).unwrap();
        for i in 0..g.n_nodes() {
            let want = sd.kappa_at(i)[0] / lambda;
            assert!((sds.kappa_at(i)[0] - want).abs() < 1e-10);
        }
    }

    #[test]
    fn rotation_equivariance_is_exact_on_circle() {
        let g = circle(64);
        let gf = make_initial(
            &g,
            &InitialShape::PerturbedSphere { r: 1.0, eps: 0.2, mode: 3 },
        )
        .unwrap();
        let n = g.n_nodes();
        let shifted: Vec<f64> = (0..n).map(|i| gf.u()[(i + 1) % n]).collect();
        let sd = compute_shape(&gf).unwrap();
        let sd_shift =
            compute_shape(&GraphFunction::new(g.clone(), shifted).unwrap()).unwrap();
        for i in 0..n {
            assert_eq!(sd_shift.kappa[i][0], sd.kappa[(i + 1) % n][0]);
        }
    }

    #[test]
    fn ellipse_curvature_converges_at_fourth_order() {
        let err = |n: usize| -> f64 {
            let g = circle(n);
            let gf = make_initial(&g, &InitialShape::Ellipse { a: 2.0, b: 1.0 }).unwrap();
            let sd = compute_shape(&gf).unwrap();
            g.nodes()
                .iter()
                .enumerate()
                .map(|(i, nd)| (sd.kappa_at(i)[0] - ellipse_kappa_oracle(2.0, 1.0, nd[0])).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2, e3) = (err(64), err(128), err(256));
        for ratio in [e1 / e2, e2 / e3] {
            assert!(
                (12.0..=20.0).contains(&ratio),
                "expected ~16x per doubling, got {ratio}"
            );
        }
    }

    #[test]
    fn grad_norm_sq_examples() {
        let g = circle(256);
        // constant: zero
        let gf = make_initial(&g, &InitialShape::Sphere { r: 3.0 }).unwrap();
        let (field, sup) = grad_norm_sq(&gf);
        assert!(sup == 0.0 && field.iter().all(|&w| w == 0.0));
        // u = e^{cos theta}: phi = cos theta, |D phi|^2 = sin^2 theta
        let gf = GraphFunction::new(
            g.clone(),
            g.nodes().iter().map(|n| n[0].cos().exp()).collect(),
        )
        .unwrap();
        let (field, _) = grad_norm_sq(&gf);
        for (i, n) in g.nodes().iter().enumerate() {
            let want = n[0].sin().powi(2);
            assert!((field[i] - want).abs() < 1e-6);
        }
        // ellipse sup: analytic max of |phi'|^2 is 9/16 for a=2, b=1
        let gf = make_initial(&g, &InitialShape::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        let (_, sup) = grad_norm_sq(&gf);
        assert!((sup - 0.5625).abs() < 2e-3, "sup |D phi|^2 = {sup}");
    }

    #[test]
    fn initial_shape_values_and_validation() {
        let g = circle(16);
        let gf = make_initial(&g, &InitialShape::Sphere { r: 1.0 }).unwrap();
        assert!(gf.u().iter().all(|&v| v == 1.0));

        // ellipse(2,1) at theta = 0 evaluates to a
        let gf = make_initial(&g, &InitialShape::Ellipse { a: 2.0, b: 1.0 }).unwrap();
        assert!((gf.u()[0] - 2.0).abs() < 1e-15);

        // perturbed sphere at theta = pi/2 with mode 3: 1 + 0.2 cos(3 pi/2) = 1
        let gf = make_initial(
            &g,
            &InitialShape::PerturbedSphere { r: 1.0, eps: 0.2, mode: 3 },
        )
        .unwrap();
        let i_quarter = 4; // theta = 2 pi * 4 / 16 = pi/2
        assert!((g.nodes()[i_quarter][0] - PI / 2.0).abs() < 1e-15);
        assert!((gf.u()[i_quarter] - 1.0).abs() < 1e-15);

        // too-large perturbation drives u <= 0 somewhere
        assert!(make_initial(
            &g,
            &InitialShape::PerturbedSphere { r: 1.0, eps: 1.5, mode: 2 }
        )
        .is_err());
        // dimension mismatches
        assert!(make_initial(&g, &InitialShape::EllipsoidOfRevolution { a: 1.0, c: 1.3 }).is_err());
        assert!(make_initial(&latlong(8, 16), &InitialShape::Ellipse { a: 2.0, b: 1.0 }).is_err());
        // non-positive parameters
        assert!(make_initial(&g, &InitialShape::Sphere { r: 0.0 }).is_err());
    }

    #[test]
    fn legendre_recurrence_known_values() {
        assert_eq!(legendre_p(0, 0.3), 1.0);
        assert_eq!(legendre_p(1, 0.3), 0.3);
        let x = 0.3_f64;
        assert!((legendre_p(2, x) - 0.5 * (3.0 * x * x - 1.0)).abs() < 1e-15);
        assert!((legendre_p(3, x) - 0.5 * (5.0 * x * x * x - 3.0 * x)).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_radius_rejected() {
        let g = circle(16);
        let mut u = vec![1.0; 16];
        u[5] = -0.1;
        assert!(GraphFunction::new(g.clone(), u).is_err());
        let mut u = vec![1.0; 16];
        u[3] = f64::NAN;
        assert!(GraphFunction::new(g, u).is_err());
    }
}
