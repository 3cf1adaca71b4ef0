//! Discretizations of the unit sphere S^n (n = 1, 2) with covariant
//! differential operators for the round metric.
//!
//! S^1 is a uniform periodic grid with 4th-order central stencils. S^2 is a
//! pole-free latitude-longitude grid (colatitude offset by half a cell) with
//! 2nd-order stencils; values across a pole are read from the node at
//! longitude lambda + pi on the same meridian circle.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Layout of the angular nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum GridKind {
    /// S^1, `n` uniform periodic nodes theta_i = 2 pi i / n.
    Circle { n: usize },
    /// S^2, colatitude rings theta_j = (j + 1/2) pi / n_theta, each with
    /// `n_lambda` uniform periodic longitudes.
    LatLong { n_theta: usize, n_lambda: usize },
}

/// A discretized S^n together with quadrature weights and stencil metadata.
///
/// Immutable after construction; safe to share read-only across concurrent
/// flow runs.
#[derive(Debug, Clone)]
pub struct DomainGrid {
    kind: GridKind,
    /// Angular coordinates per node: `[theta, 0]` on S^1, `[theta, lambda]` on S^2.
    nodes: Vec<[f64; 2]>,
    /// Quadrature weights, summing to |S^n|.
    weights: Vec<f64>,
    /// Spacing per angular direction (radians): `[h_theta, h_lambda]` (`h_lambda = 0` on S^1).
    spacing: [f64; 2],
    stencil_order: usize,
    /// Per-ring trigonometry on S^2 (empty on S^1): (sin, cos, cot) of colatitude.
    ring_trig: Vec<(f64, f64, f64)>,
    /// Smallest metric-weighted node spacing, used by the step-size controller.
    min_spacing: f64,
    /// Periodic neighbor tables (ring-local on S^2, global on S^1).
    idx_p1: Vec<usize>,
    idx_m1: Vec<usize>,
    /// Two-node neighbors for the 4th-order S^1 stencils (empty on S^2).
    idx_p2: Vec<usize>,
    idx_m2: Vec<usize>,
    /// Across-pole partner longitude (lambda + pi); empty on S^1.
    idx_opp: Vec<usize>,
}

impl DomainGrid {
    /// Dimension n of S^n.
    pub fn dim(&self) -> usize {
        match self.kind {
            GridKind::Circle { .. } => 1,
            GridKind::LatLong { .. } => 2,
        }
    }

    pub fn kind(&self) -> &GridKind {
        &self.kind
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    pub fn stencil_order(&self) -> usize {
        self.stencil_order
    }

    /// Smallest effective angular spacing, including the sin(theta) metric
    /// factor of the longitude direction on the polar-most rings.
    pub fn min_spacing(&self) -> f64 {
        self.min_spacing
    }

    /// Inverse round metric components `[sigma^tt, sigma^ll]` at a node.
    #[inline]
    pub fn sigma_inv(&self, node: usize) -> [f64; 2] {
        match self.kind {
            GridKind::Circle { .. } => [1.0, 0.0],
            GridKind::LatLong { n_lambda, .. } => {
                let s = self.ring_trig[node / n_lambda].0;
                [1.0, 1.0 / (s * s)]
            }
        }
    }

    /// sin, cos, cot of the colatitude of a node's ring (S^2 only).
    #[inline]
    pub(crate) fn trig(&self, ring: usize) -> (f64, f64, f64) {
        self.ring_trig[ring]
    }

    #[inline]
    pub(crate) fn neighbors(&self) -> (&[usize], &[usize], &[usize], &[usize], &[usize]) {
        (&self.idx_p1, &self.idx_m1, &self.idx_p2, &self.idx_m2, &self.idx_opp)
    }

    /// Quadrature: sum of w_i f_i, approximating the integral over S^n.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        self.weights.iter().zip(f).map(|(w, v)| w * v).sum()
    }
}

/// Build the S^1 grid with `n` nodes.
pub fn build_circle_grid(n: usize) -> Result<DomainGrid> {
    if n < 8 {
        return Err(Error::config(format!("circle grid needs n >= 8, got {n}")));
    }
    if n % 2 != 0 {
        return Err(Error::config(format!("circle grid needs even n, got {n}")));
    }
    let h = 2.0 * PI / n as f64;
    let nodes: Vec<[f64; 2]> = (0..n).map(|i| [h * i as f64, 0.0]).collect();
    let weights = vec![h; n];
    Ok(DomainGrid {
        kind: GridKind::Circle { n },
        nodes,
        weights,
        spacing: [h, 0.0],
        stencil_order: 4,
        ring_trig: Vec::new(),
        min_spacing: h,
        idx_p1: (0..n).map(|i| (i + 1) % n).collect(),
        idx_m1: (0..n).map(|i| (i + n - 1) % n).collect(),
        idx_p2: (0..n).map(|i| (i + 2) % n).collect(),
        idx_m2: (0..n).map(|i| (i + n - 2) % n).collect(),
        idx_opp: Vec::new(),
    })
}

/// Build the pole-free S^2 grid with `n_theta` colatitude rings and
/// `n_lambda` longitudes per ring.
pub fn build_latlong_grid(n_theta: usize, n_lambda: usize) -> Result<DomainGrid> {
    if n_theta < 8 {
        return Err(Error::config(format!(
            "lat-long grid needs n_theta >= 8, got {n_theta}"
        )));
    }
    if n_lambda < 16 {
        return Err(Error::config(format!(
            "lat-long grid needs n_lambda >= 16, got {n_lambda}"
        )));
    }
    if n_lambda % 2 != 0 {
        return Err(Error::config(format!(
            "lat-long grid needs even n_lambda for across-pole pairing, got {n_lambda}"
        )));
    }
    let h_t = PI / n_theta as f64;
    let h_l = 2.0 * PI / n_lambda as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_lambda);
    let mut weights = Vec::with_capacity(n_theta * n_lambda);
    let mut ring_trig = Vec::with_capacity(n_theta);
    // Exact cell areas: w = h_l (cos(theta - h/2) - cos(theta + h/2))
    //                     = 2 sin(h/2) sin(theta) h_l,
    // which telescopes to exactly 4 pi over the whole grid.
    let w_theta = 2.0 * (0.5 * h_t).sin();
    for j in 0..n_theta {
        let theta = (j as f64 + 0.5) * h_t;
        let (s, c) = theta.sin_cos();
        ring_trig.push((s, c, c / s));
        for k in 0..n_lambda {
            nodes.push([theta, h_l * k as f64]);
            weights.push(w_theta * s * h_l);
        }
    }
    let sin_min = ring_trig[0].0.min(ring_trig[n_theta - 1].0);
    let min_spacing = h_t.min(h_l * sin_min);
    Ok(DomainGrid {
        kind: GridKind::LatLong { n_theta, n_lambda },
        nodes,
        weights,
        spacing: [h_t, h_l],
        stencil_order: 2,
        ring_trig,
        min_spacing,
        idx_p1: (0..n_lambda).map(|k| (k + 1) % n_lambda).collect(),
        idx_m1: (0..n_lambda).map(|k| (k + n_lambda - 1) % n_lambda).collect(),
        idx_p2: Vec::new(),
        idx_m2: Vec::new(),
        idx_opp: (0..n_lambda).map(|k| (k + n_lambda / 2) % n_lambda).collect(),
    })
}

/// Covariant gradient components (f_theta, f_lambda) with respect to the
/// round metric, at the grid's declared stencil order.
pub fn grad_sigma(grid: &DomainGrid, f: &[f64]) -> Vec<[f64; 2]> {
    assert_eq!(f.len(), grid.n_nodes(), "field length mismatch");
    match grid.kind {
        GridKind::Circle { n } => {
            let inv12h = 1.0 / (12.0 * grid.spacing[0]);
            (0..n)
                .map(|i| {
                    let fm2 = f[(i + n - 2) % n];
                    let fm1 = f[(i + n - 1) % n];
                    let fp1 = f[(i + 1) % n];
                    let fp2 = f[(i + 2) % n];
                    [(-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) * inv12h, 0.0]
                })
                .collect()
        }
        GridKind::LatLong { n_theta, n_lambda } => {
            let inv2ht = 1.0 / (2.0 * grid.spacing[0]);
            let inv2hl = 1.0 / (2.0 * grid.spacing[1]);
            let mut out = vec![[0.0; 2]; f.len()];
            for j in 0..n_theta {
                for k in 0..n_lambda {
                    let idx = j * n_lambda + k;
                    let up = north(f, j, k, n_theta, n_lambda);
                    let dn = south(f, j, k, n_theta, n_lambda);
                    let east = f[j * n_lambda + (k + 1) % n_lambda];
                    let west = f[j * n_lambda + (k + n_lambda - 1) % n_lambda];
                    out[idx] = [(dn - up) * inv2ht, (east - west) * inv2hl];
                }
            }
            out
        }
    }
}

/// Raise the index of a covector field: f^i = sigma^{ik} f_k.
pub fn raise_index(grid: &DomainGrid, cov: &[[f64; 2]]) -> Vec<[f64; 2]> {
    (0..cov.len())
        .map(|i| {
            let si = grid.sigma_inv(i);
            [cov[i][0] * si[0], cov[i][1] * si[1]]
        })
        .collect()
}

/// Covariant Hessian components (f_;tt, f_;tl, f_;ll) with respect to the
/// round metric, Christoffel terms included (they vanish on S^1).
pub fn hessian_sigma(grid: &DomainGrid, f: &[f64]) -> Vec<[f64; 3]> {
    assert_eq!(f.len(), grid.n_nodes(), "field length mismatch");
    match grid.kind {
        GridKind::Circle { n } => {
            let h = grid.spacing[0];
            let inv12h2 = 1.0 / (12.0 * h * h);
            (0..n)
                .map(|i| {
                    let fm2 = f[(i + n - 2) % n];
                    let fm1 = f[(i + n - 1) % n];
                    let f0 = f[i];
                    let fp1 = f[(i + 1) % n];
                    let fp2 = f[(i + 2) % n];
                    let d2 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) * inv12h2;
                    [d2, 0.0, 0.0]
                })
                .collect()
        }
        GridKind::LatLong { n_theta, n_lambda } => {
            let h_t = grid.spacing[0];
            let h_l = grid.spacing[1];
            let inv2ht = 1.0 / (2.0 * h_t);
            let invht2 = 1.0 / (h_t * h_t);
            let invhl2 = 1.0 / (h_l * h_l);
            let inv2hl = 1.0 / (2.0 * h_l);
            // Longitude derivative first; it is periodic per ring and its
            // values continue across the pole like any scalar field.
            let mut f_l = vec![0.0; f.len()];
            for j in 0..n_theta {
                for k in 0..n_lambda {
                    let east = f[j * n_lambda + (k + 1) % n_lambda];
                    let west = f[j * n_lambda + (k + n_lambda - 1) % n_lambda];
                    f_l[j * n_lambda + k] = (east - west) * inv2hl;
                }
            }
            let mut out = vec![[0.0; 3]; f.len()];
            for j in 0..n_theta {
                let (s, c, cot) = grid.ring_trig[j];
                for k in 0..n_lambda {
                    let idx = j * n_lambda + k;
                    let up = north(f, j, k, n_theta, n_lambda);
                    let dn = south(f, j, k, n_theta, n_lambda);
                    let east = f[j * n_lambda + (k + 1) % n_lambda];
                    let west = f[j * n_lambda + (k + n_lambda - 1) % n_lambda];
                    let f_t = (dn - up) * inv2ht;
                    let f_tt = (dn - 2.0 * f[idx] + up) * invht2;
                    let f_ll = (east - 2.0 * f[idx] + west) * invhl2;
                    let fl_up = north(&f_l, j, k, n_theta, n_lambda);
                    let fl_dn = south(&f_l, j, k, n_theta, n_lambda);
                    let f_tl = (fl_dn - fl_up) * inv2ht;
                    // Gamma^l_{tl} = cot(theta), Gamma^t_{ll} = -sin cos.
                    out[idx] = [f_tt, f_tl - cot * f_l[idx], f_ll + s * c * f_t];
                }
            }
            out
        }
    }
}

/// Value one ring north of (j, k): ring j - 1, or across the north pole at
/// longitude lambda + pi.
#[inline]
fn north(f: &[f64], j: usize, k: usize, _n_theta: usize, n_lambda: usize) -> f64 {
    if j > 0 {
        f[(j - 1) * n_lambda + k]
    } else {
        f[(k + n_lambda / 2) % n_lambda]
    }
}

/// Value one ring south of (j, k): ring j + 1, or across the south pole.
#[inline]
fn south(f: &[f64], j: usize, k: usize, n_theta: usize, n_lambda: usize) -> f64 {
    if j + 1 < n_theta {
        f[(j + 1) * n_lambda + k]
    } else {
        f[(n_theta - 1) * n_lambda + (k + n_lambda / 2) % n_lambda]
    }
}

/// Exact max over nodes of |f|.
pub fn sup_norm(f: &[f64]) -> f64 {
    f.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Exact max - min over nodes.
pub fn osc(f: &[f64]) -> f64 {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &v in f {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}
