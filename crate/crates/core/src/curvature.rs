//! Admissible curvature functions F: symmetric, degree-1 homogeneous,
//! monotone, concave, normalized so F(1,...,1) = n, each with a defining
//! cone on which F > 0.

use crate::error::{Error, Result};

/// Defining cone Gamma of a curvature function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cone {
    /// All principal curvatures positive (strict convexity).
    GammaPlus,
    /// Positive mean: sum of the kappa_i > 0.
    MeanCone,
    /// Garding cone of sigma_k: sigma_j(kappa) > 0 for all j <= k.
    GammaK(u32),
}

impl Cone {
    /// Strict interior membership test.
    pub fn contains(&self, kappa: &[f64]) -> bool {
        match *self {
            Cone::GammaPlus => kappa.iter().all(|&k| k > 0.0),
            Cone::MeanCone => kappa.iter().sum::<f64>() > 0.0,
            Cone::GammaK(k) => {
                let e = elementary_symmetric(kappa);
                (1..=k as usize).all(|j| j < e.len() && e[j] > 0.0)
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            Cone::GammaPlus => "gamma_plus".into(),
            Cone::MeanCone => "mean_cone".into(),
            Cone::GammaK(k) => format!("gamma_{k}"),
        }
    }
}

/// The implemented family of curvature functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurvatureKind {
    /// F = sum kappa_i (the mean curvature, unnormalized by n).
    Mean,
    /// F = n (prod kappa_i)^{1/n}, the normalized n-th root of the Gauss curvature.
    GaussRoot,
    /// F = n (sigma_k / binom(n,k))^{1/k}.
    SigmaKRoot(u32),
    /// F = n (sum kappa_i^q / n)^{1/q}, q <= 1.
    PowerMean(f64),
}

impl CurvatureKind {
    pub fn name(&self) -> String {
        match self {
            CurvatureKind::Mean => "mean".into(),
            CurvatureKind::GaussRoot => "gauss_root".into(),
            CurvatureKind::SigmaKRoot(k) => format!("sigma_{k}_root"),
            CurvatureKind::PowerMean(q) => format!("power_mean({q})"),
        }
    }
}

/// A curvature function bound to a dimension and a defining cone.
///
/// Stateless value object; concurrent use is unrestricted.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureFunction {
    kind: CurvatureKind,
    n: usize,
    cone: Cone,
    /// binom(n, k) for SigmaKRoot, 1 otherwise.
    sigma_k_norm: f64,
}

impl CurvatureFunction {
    /// Construct with the kind's natural defining cone.
    pub fn new(kind: CurvatureKind, n: usize) -> Result<Self> {
        let cone = match kind {
            CurvatureKind::Mean => Cone::MeanCone,
            CurvatureKind::GaussRoot => Cone::GammaPlus,
            CurvatureKind::SigmaKRoot(k) => Cone::GammaK(k),
            CurvatureKind::PowerMean(_) => Cone::GammaPlus,
        };
        Self::with_cone(kind, n, cone)
    }

    /// Construct with an explicit cone; the cone must lie inside the
    /// domain where the formula is defined and positive.
    pub fn with_cone(kind: CurvatureKind, n: usize, cone: Cone) -> Result<Self> {
        if n == 0 {
            return Err(Error::config("curvature function needs n >= 1"));
        }
        match kind {
            CurvatureKind::Mean => {}
            CurvatureKind::GaussRoot | CurvatureKind::PowerMean(_) => {
                if cone != Cone::GammaPlus {
                    return Err(Error::config(format!(
                        "{} is only defined on gamma_plus, got {}",
                        kind.name(),
                        cone.name()
                    )));
                }
            }
            CurvatureKind::SigmaKRoot(k) => {
                if k == 0 || k as usize > n {
                    return Err(Error::config(format!(
                        "sigma_k_root needs 1 <= k <= n, got k = {k}, n = {n}"
                    )));
                }
                match cone {
                    Cone::GammaPlus => {}
                    Cone::GammaK(m) if m == k => {}
                    _ => {
                        return Err(Error::config(format!(
                            "sigma_{k}_root requires cone gamma_{k} or gamma_plus, got {}",
                            cone.name()
                        )))
                    }
                }
            }
        }
        if let CurvatureKind::PowerMean(q) = kind {
            if !(q.is_finite() && q <= 1.0 && q != 0.0) {
                return Err(Error::config(format!(
                    "power_mean needs q <= 1, q != 0, got {q}"
                )));
            }
        }
        let sigma_k_norm = match kind {
            CurvatureKind::SigmaKRoot(k) => binomial(n, k as usize),
            _ => 1.0,
        };
        Ok(CurvatureFunction {
            kind,
            n,
            cone,
            sigma_k_norm,
        })
    }

    pub fn kind(&self) -> CurvatureKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cone(&self) -> Cone {
        self.cone
    }

    pub fn name(&self) -> String {
        self.kind.name()
    }

    /// True iff kappa lies in the interior of the defining cone.
    #[inline]
    pub fn admissible(&self, kappa: &[f64]) -> bool {
        self.cone.contains(kappa)
    }

    /// Evaluate F(kappa). Errors if kappa is outside the defining cone.
    #[inline]
    pub fn eval(&self, kappa: &[f64]) -> Result<f64> {
        if !self.admissible(kappa) {
            return Err(Error::Inadmissible {
                node: usize::MAX,
                kappa: kappa.to_vec(),
                cone: self.cone.name(),
            });
        }
        Ok(self.eval_unchecked(kappa))
    }

    /// Evaluate F without the cone check (callers must have verified it).
    #[inline]
    pub fn eval_unchecked(&self, kappa: &[f64]) -> f64 {
        let nf = self.n as f64;
        match self.kind {
            CurvatureKind::Mean => kappa.iter().sum(),
            CurvatureKind::GaussRoot => {
                let prod: f64 = kappa.iter().product();
                nf * prod.powf(1.0 / nf)
            }
            CurvatureKind::SigmaKRoot(k) => {
                let e = elementary_symmetric(kappa);
                nf * (e[k as usize] / self.sigma_k_norm).powf(1.0 / k as f64)
            }
            CurvatureKind::PowerMean(q) => {
                let s: f64 = kappa.iter().map(|&x| x.powf(q)).sum();
                nf * (s / nf).powf(1.0 / q)
            }
        }
    }

    /// Analytic partial derivatives dF/dkappa_i.
    pub fn grad(&self, kappa: &[f64]) -> Result<Vec<f64>> {
        let f = self.eval(kappa)?;
        Ok(self.grad_with_value(kappa, f))
    }

    fn grad_with_value(&self, kappa: &[f64], f: f64) -> Vec<f64> {
        let nf = self.n as f64;
        match self.kind {
            CurvatureKind::Mean => vec![1.0; kappa.len()],
            CurvatureKind::GaussRoot => kappa.iter().map(|&k| f / (nf * k)).collect(),
            CurvatureKind::SigmaKRoot(k) => {
                let e = elementary_symmetric(kappa);
                let sk = e[k as usize];
                (0..kappa.len())
                    .map(|i| {
                        let reduced: Vec<f64> = kappa
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, &v)| v)
                            .collect();
                        let er = elementary_symmetric(&reduced);
                        f / (k as f64 * sk) * er[k as usize - 1]
                    })
                    .collect()
            }
            CurvatureKind::PowerMean(q) => {
                let s: f64 = kappa.iter().map(|&x| x.powf(q)).sum();
                kappa.iter().map(|&x| f * x.powf(q - 1.0) / s).collect()
            }
        }
    }

    /// Max over i of dF/dkappa_i; the diffusion scale used by the step
    /// controller. Assumes kappa is admissible.
    #[inline]
    pub fn max_grad_unchecked(&self, kappa: &[f64], f: f64) -> f64 {
        match self.kind {
            CurvatureKind::Mean => 1.0,
            CurvatureKind::GaussRoot => {
                let k_min = kappa.iter().cloned().fold(f64::INFINITY, f64::min);
                f / (self.n as f64 * k_min)
            }
            _ => self
                .grad_with_value(kappa, f)
                .into_iter()
                .fold(0.0, f64::max),
        }
    }
}

/// Elementary symmetric polynomials e_0..e_n of the entries.
pub fn elementary_symmetric(kappa: &[f64]) -> Vec<f64> {
    let n = kappa.len();
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for &k in kappa {
        for j in (1..=n).rev() {
            e[j] += k * e[j - 1];
        }
    }
    e
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut b = 1.0;
    for j in 0..k {
        b = b * (n - j) as f64 / (j + 1) as f64;
    }
    b
}

/// Evaluate x^e cheaply when 2e is a small integer (covers the p values of
/// interest: the chain 1/sqrt, squares and their products avoids powf in the
/// stepping hot path), falling back to powf otherwise.
#[derive(Debug, Clone, Copy)]
pub struct PowPlan {
    exponent: f64,
    /// 2*exponent when it is a small integer, else None.
    half_steps: Option<i32>,
}

impl PowPlan {
    pub fn new(exponent: f64) -> Self {
        let doubled = 2.0 * exponent;
        let rounded = doubled.round();
        let half_steps = if (doubled - rounded).abs() < 1e-12 && rounded.abs() <= 16.0 {
            Some(rounded as i32)
        } else {
            None
        };
        PowPlan {
            exponent,
            half_steps,
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        match self.half_steps {
            Some(h) => {
                let m = h.unsigned_abs();
                let base = if m % 2 == 1 { x.sqrt() } else { x };
                let k = if m % 2 == 1 { m } else { m / 2 };
                let mut acc = 1.0;
                let mut pow = base;
                let mut rem = k;
                while rem > 0 {
                    if rem & 1 == 1 {
                        acc *= pow;
                    }
                    pow *= pow;
                    rem >>= 1;
                }
                if h < 0 {
                    1.0 / acc
                } else {
                    acc
                }
            }
            None => x.powf(self.exponent),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(kind: CurvatureKind, n: usize) -> CurvatureFunction {
        CurvatureFunction::new(kind, n).unwrap()
    }

    #[test]
    fn normalization_and_known_values() {
        assert_eq!(f(CurvatureKind::Mean, 2).eval(&[1.0, 1.0]).unwrap(), 2.0);
        // homogeneity from kappa = (1,1) -> 2
        assert!((f(CurvatureKind::GaussRoot, 2).eval(&[2.0, 2.0]).unwrap() - 4.0).abs() < 1e-12);
        // sigma_2(1,2,3) = 11, sigma_2(1,1,1) = 3 -> 3 sqrt(11/3) = sqrt(33)
        let s2 = f(CurvatureKind::SigmaKRoot(2), 3);
        let got = s2.eval(&[1.0, 2.0, 3.0]).unwrap();
        assert!((got - 33.0_f64.sqrt()).abs() < 1e-12, "got {got}");
        assert!((got - 5.744562646538029).abs() < 1e-12);
        for kind in [
            CurvatureKind::Mean,
            CurvatureKind::GaussRoot,
            CurvatureKind::SigmaKRoot(2),
            CurvatureKind::PowerMean(0.5),
        ] {
            let n = 3;
            let cf = f(kind, n);
            let ones = vec![1.0; n];
            assert!(
                (cf.eval(&ones).unwrap() - n as f64).abs() < 1e-12,
                "{} not normalized",
                cf.name()
            );
        }
    }

    #[test]
    fn admissibility_cases() {
        assert!(!Cone::GammaPlus.contains(&[1.0, -0.1]));
        assert!(Cone::MeanCone.contains(&[2.0, -1.0]));
        // gamma_2 on (3,3,-1): sigma_1 = 5 > 0, sigma_2 = 9 - 6 = 3 > 0
        assert!(Cone::GammaK(2).contains(&[3.0, 3.0, -1.0]));
        assert!(!Cone::GammaK(3).contains(&[3.0, 3.0, -1.0]));

        let mean = f(CurvatureKind::Mean, 2);
        assert!(mean.eval(&[2.0, -1.0]).is_ok());
        assert!(mean.eval(&[-2.0, 1.0]).is_err());
    }

    #[test]
    fn cone_compatibility_enforced() {
        assert!(CurvatureFunction::with_cone(CurvatureKind::GaussRoot, 2, Cone::MeanCone).is_err());
        assert!(CurvatureFunction::with_cone(CurvatureKind::Mean, 2, Cone::GammaPlus).is_ok());
        assert!(CurvatureFunction::with_cone(CurvatureKind::SigmaKRoot(2), 3, Cone::GammaK(3)).is_err());
        assert!(CurvatureFunction::new(CurvatureKind::PowerMean(1.5), 2).is_err());
        assert!(CurvatureFunction::new(CurvatureKind::SigmaKRoot(4), 3).is_err());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let cases: Vec<(CurvatureFunction, Vec<f64>)> = vec![
            (f(CurvatureKind::Mean, 3), vec![0.7, 1.3, 2.1]),
            (f(CurvatureKind::GaussRoot, 2), vec![0.4, 2.5]),
            (f(CurvatureKind::GaussRoot, 3), vec![0.9, 1.1, 3.0]),
            (f(CurvatureKind::SigmaKRoot(2), 3), vec![0.5, 1.5, 2.5]),
            (f(CurvatureKind::PowerMean(0.5), 2), vec![0.8, 1.7]),
            (f(CurvatureKind::PowerMean(-1.0), 2), vec![0.8, 1.7]),
        ];
        for (cf, kappa) in cases {
            let grad = cf.grad(&kappa).unwrap();
            let h = 1e-6;
            for i in 0..kappa.len() {
                let mut kp = kappa.clone();
                let mut km = kappa.clone();
                kp[i] += h;
                km[i] -= h;
                let fd = (cf.eval(&kp).unwrap() - cf.eval(&km).unwrap()) / (2.0 * h);
                assert!(
                    (grad[i] - fd).abs() < 1e-6,
                    "{}: grad[{i}] = {} vs fd = {fd}",
                    cf.name(),
                    grad[i]
                );
            }
        }
    }

    #[test]
    fn gauss_root_gradient_at_umbilic() {
        // F = 2 sqrt(k1 k2): dF/dk_i at (1,1) is (1,1)
        let g = f(CurvatureKind::GaussRoot, 2).grad(&[1.0, 1.0]).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-12 && (g[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gauss_root_degenerates_on_cone_boundary() {
        let cf = f(CurvatureKind::GaussRoot, 2);
        let mut prev = f64::INFINITY;
        for e in [1e-2, 1e-4, 1e-8, 1e-12] {
            let v = cf.eval(&[e, 1.0]).unwrap();
            assert!(v < prev);
            prev = v;
        }
        assert!(prev < 1e-5);
    }

    #[test]
    fn pow_plan_matches_powf() {
        for e in [-0.5, -1.0, -1.5, -2.0, -2.5, -3.0, -4.0, 0.5, 2.0, -0.37, -1.234] {
            let plan = PowPlan::new(e);
            for x in [0.02_f64, 0.5, 1.0, 3.7, 250.0] {
                let got = plan.apply(x);
                let want = x.powf(e);
                assert!(
                    (got - want).abs() <= 1e-13 * want.abs().max(1.0),
                    "x^{e} at {x}: {got} vs {want}"
                );
            }
        }
    }
}
