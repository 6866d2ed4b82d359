//! Weight sequences and their generating functions.
//!
//! A model is a pair of nonnegative sequences: theta_j (the size-independent
//! part) and kappa_j (the part multiplied by the permutation size), plus a
//! density parameter rho that divides kappa. The weight of a cycle of length
//! j in a permutation of n points is
//!
//!   w_j(n) = theta_j + n * kappa_j / rho.
//!
//! Everything downstream consumes the two exponential generating functions
//!
//!   g_theta(z) = sum_j theta_j z^j / j,
//!   g_kappa(z) = sum_j kappa_j z^j / j,
//!
//! their modified derivatives g^{n}(z) = z^n d^n/dz^n g(z), and a profile of
//! boundary data at the common radius of convergence.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specialfn::{gamma, polylog, zeta};

/// A rule for one coefficient sequence a_1, a_2, ...
///
/// All rules produce nonnegative coefficients. The generating function
/// g(z) = sum a_j z^j / j has radius of convergence 1 for every rule except
/// `Table`, which is a polynomial and therefore entire.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeqSpec {
    /// a_j = c for every j. Generating function -c ln(1 - z).
    Constant { c: f64 },
    /// a_j = c j^(-gamma0). Generating function c Li_{1+gamma0}(z).
    Power { c: f64, gamma0: f64 },
    /// a_j = c (1 + j^(-eps)) j^(-gamma0), a decaying perturbation of the
    /// power rule. Generating function c (Li_{1+gamma0} + Li_{1+gamma0+eps}).
    Perturbed { c: f64, gamma0: f64, eps: f64 },
    /// a_j = kstar j^(-s). Identical in form to `Power`, but named for the
    /// role it plays as the canonical kappa family; the boundary profile is
    /// auto-derived from (kstar, s).
    Polylog { kstar: f64, s: f64 },
    /// Explicit finite list a_1, ..., a_m; zero beyond the list.
    Table { values: Vec<f64> },
}

impl SeqSpec {
    /// Coefficient a_j (j >= 1). Zero beyond an explicit table.
    pub fn value(&self, j: usize) -> f64 {
        debug_assert!(j >= 1);
        let jf = j as f64;
        match self {
            SeqSpec::Constant { c } => *c,
            SeqSpec::Power { c, gamma0 } => c * jf.powf(-gamma0),
            SeqSpec::Perturbed { c, gamma0, eps } => {
                c * (1.0 + jf.powf(-eps)) * jf.powf(-gamma0)
            }
            SeqSpec::Polylog { kstar, s } => kstar * jf.powf(-s),
            SeqSpec::Table { values } => values.get(j - 1).copied().unwrap_or(0.0),
        }
    }

    /// Radius of convergence of the generating function.
    pub fn radius(&self) -> f64 {
        match self {
            SeqSpec::Table { .. } => f64::INFINITY,
            _ => 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite();
        match self {
            SeqSpec::Constant { c } => {
                if !ok(*c) || *c < 0.0 {
                    return Err(Error::config("constant sequence needs c >= 0"));
                }
            }
            SeqSpec::Power { c, gamma0 } => {
                if !ok(*c) || *c < 0.0 || !ok(*gamma0) {
                    return Err(Error::config("power sequence needs c >= 0 and finite gamma0"));
                }
            }
            SeqSpec::Perturbed { c, gamma0, eps } => {
                if !ok(*c) || *c < 0.0 || !ok(*gamma0) || !ok(*eps) || *eps <= 0.0 {
                    return Err(Error::config(
                        "perturbed sequence needs c >= 0, finite gamma0, eps > 0",
                    ));
                }
            }
            SeqSpec::Polylog { kstar, s } => {
                if !ok(*kstar) || *kstar < 0.0 || !ok(*s) {
                    return Err(Error::config("polylog sequence needs kstar >= 0 and finite s"));
                }
            }
            SeqSpec::Table { values } => {
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return Err(Error::config("table entries must be finite and >= 0"));
                }
            }
        }
        Ok(())
    }

    /// g(r) = sum_j a_j r^j / j for 0 <= r <= radius.
    ///
    /// Analytic rules go through closed polylogarithm forms, which switch to
    /// the singular expansion near the radius on their own; the table rule
    /// is a finite sum. Divergent boundary values come back as domain errors.
    pub fn g(&self, r: f64) -> Result<f64> {
        self.check_arg(r)?;
        match self {
            SeqSpec::Constant { c } => {
                if r >= 1.0 {
                    return Err(Error::domain("g diverges at the radius for a constant rule"));
                }
                Ok(-c * (1.0 - r).ln())
            }
            SeqSpec::Power { c, gamma0 } => Ok(c * polylog(1.0 + gamma0, r)?),
            SeqSpec::Perturbed { c, gamma0, eps } => {
                Ok(c * (polylog(1.0 + gamma0, r)? + polylog(1.0 + gamma0 + eps, r)?))
            }
            SeqSpec::Polylog { kstar, s } => Ok(kstar * polylog(s + 1.0, r)?),
            SeqSpec::Table { values } => {
                let mut acc = 0.0;
                let mut rj = 1.0;
                for (i, v) in values.iter().enumerate() {
                    rj *= r;
                    acc += v * rj / (i + 1) as f64;
                }
                Ok(acc)
            }
        }
    }

    /// Modified derivative g^{n}(r) = r^n (d/dr)^n g(r); g^{0} is g itself.
    ///
    /// In coefficients, g^{n}(r) = sum_j (j-1)(j-2)...(j-n+1) a_j r^j, so
    /// g^{1}(r) = sum_j a_j r^j.
    pub fn g_mod_deriv(&self, n: usize, r: f64) -> Result<f64> {
        if n == 0 {
            return self.g(r);
        }
        self.check_arg(r)?;
        match self {
            SeqSpec::Constant { c } => {
                if r >= 1.0 {
                    return Err(Error::domain(
                        "modified derivative diverges at the radius for a constant rule",
                    ));
                }
                // g^{n}(r) = c (n-1)! r^n / (1-r)^n.
                let mut acc = c * (r / (1.0 - r)).powi(n as i32);
                for k in 1..n {
                    acc *= k as f64;
                }
                Ok(acc)
            }
            SeqSpec::Power { c, gamma0 } => li_mod_deriv(*c, 1.0 + gamma0, n, r),
            SeqSpec::Perturbed { c, gamma0, eps } => Ok(li_mod_deriv(*c, 1.0 + gamma0, n, r)?
                + li_mod_deriv(*c, 1.0 + gamma0 + eps, n, r)?),
            SeqSpec::Polylog { kstar, s } => li_mod_deriv(*kstar, s + 1.0, n, r),
            SeqSpec::Table { values } => {
                let mut acc = 0.0;
                let mut rj = 1.0;
                for (i, v) in values.iter().enumerate() {
                    let j = i + 1;
                    rj *= r;
                    let mut falling = 1.0;
                    for k in 1..n {
                        falling *= (j as f64) - k as f64;
                    }
                    // (j-1)...(j-n+1) vanishes for j < n, falling handles it
                    // by running through zero.
                    acc += v * falling * rj;
                }
                Ok(acc)
            }
        }
    }

    fn check_arg(&self, r: f64) -> Result<()> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::domain(format!("generating functions need r >= 0, got {r}")));
        }
        if r > self.radius() {
            return Err(Error::domain(format!(
                "r = {r} lies outside the radius of convergence {}",
                self.radius()
            )));
        }
        Ok(())
    }
}

/// g^{n} for a pure polylog generating function c Li_sigma(z).
///
/// Each application of g^{n+1} = z (g^{n})' - n g^{n} maps a combination of
/// polylogarithms to one with indices shifted down by one, because
/// z d/dz Li_sigma = Li_{sigma-1}. The coefficient table follows
/// coef[n+1][k] = coef[n][k-1] - n coef[n][k].
fn li_mod_deriv(c: f64, sigma: f64, n: usize, r: f64) -> Result<f64> {
    let mut coef = vec![0.0f64; n + 1];
    coef[0] = 1.0;
    for m in 0..n {
        let mut next = vec![0.0f64; n + 1];
        for k in 0..=m {
            next[k + 1] += coef[k];
            next[k] -= m as f64 * coef[k];
        }
        coef = next;
    }
    let mut acc = 0.0;
    for (k, ck) in coef.iter().enumerate() {
        if *ck != 0.0 {
            acc += ck * polylog(sigma - k as f64, r)?;
        }
    }
    Ok(c * acc)
}

/// Boundary data of the two generating functions at the common radius R.
///
/// `gt_value_at_r` is the regularized boundary value of g_theta: the limit
/// of g_theta(z) + theta_star * ln(1 - z/R) as z -> R. When theta_star = 0
/// this is simply g_theta(R). `gk_derivs_at_r` lists the finite modified
/// derivatives g_kappa^{1}(R), g_kappa^{2}(R), ... and stops at the first
/// divergent one; an empty list means g_kappa^{1}(R) already diverges.
/// `sing_index`/`sing_coeff` describe a power singularity
/// a_s (1 - z/R)^s of g_kappa when one exists; the coefficient is absent
/// for integer indices, where logarithmic corrections enter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenFnProfile {
    pub radius: f64,
    pub theta_star: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gt_value_at_r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sing_index: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sing_coeff: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gk_derivs_at_r: Vec<f64>,
}

fn default_rho() -> f64 {
    1.0
}

/// A complete weight model: the two sequences, the density divisor for
/// kappa, and an optional user override of the boundary profile (required
/// for table models whose asymptotics cannot be auto-derived).
///
/// Immutable after construction; all methods are pure and the type is safe
/// to share across threads.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightModel {
    pub theta: SeqSpec,
    pub kappa: SeqSpec,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<GenFnProfile>,
}

impl WeightModel {
    pub fn new(theta: SeqSpec, kappa: SeqSpec) -> Self {
        WeightModel { theta, kappa, rho: 1.0, profile: None }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_profile(mut self, profile: GenFnProfile) -> Self {
        self.profile = Some(profile);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.theta.validate()?;
        self.kappa.validate()?;
        if !self.rho.is_finite() || self.rho <= 0.0 {
            return Err(Error::config("rho must be positive and finite"));
        }
        if let Some(p) = &self.profile {
            if !(p.radius > 0.0) {
                return Err(Error::config("profile radius must be positive"));
            }
            if !(p.theta_star >= 0.0) {
                return Err(Error::config("profile theta_star must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn theta_j(&self, j: usize) -> f64 {
        self.theta.value(j)
    }

    /// kappa_j after division by the density rho.
    pub fn kappa_j(&self, j: usize) -> f64 {
        self.kappa.value(j) / self.rho
    }

    /// Cycle weight w_j(n) = theta_j + n * kappa_j.
    pub fn weight(&self, j: usize, n_points: usize) -> f64 {
        self.theta_j(j) + n_points as f64 * self.kappa_j(j)
    }

    /// Common radius of convergence of g_theta and g_kappa.
    pub fn radius(&self) -> f64 {
        self.theta.radius().min(self.kappa.radius())
    }

    pub fn g_theta(&self, r: f64) -> Result<f64> {
        self.theta.g(r)
    }

    pub fn g_kappa(&self, r: f64) -> Result<f64> {
        Ok(self.kappa.g(r)? / self.rho)
    }

    pub fn g_theta_mod_deriv(&self, n: usize, r: f64) -> Result<f64> {
        self.theta.g_mod_deriv(n, r)
    }

    pub fn g_kappa_mod_deriv(&self, n: usize, r: f64) -> Result<f64> {
        Ok(self.kappa.g_mod_deriv(n, r)? / self.rho)
    }

    /// b_1(r) = g_kappa^{1}(r), the mean-length functional.
    pub fn b1(&self, r: f64) -> Result<f64> {
        self.g_kappa_mod_deriv(1, r)
    }

    /// b_2(r) = g_kappa^{1}(r) + g_kappa^{2}(r), the curvature functional.
    pub fn b2(&self, r: f64) -> Result<f64> {
        Ok(self.g_kappa_mod_deriv(1, r)? + self.g_kappa_mod_deriv(2, r)?)
    }

    /// Eligibility for the asymptotic layer: kappa must not vanish
    /// identically, must be positive somewhere beyond j = 1, and the support
    /// must not sit on a sublattice (gcd of supporting indices = 1).
    pub fn check_asymptotic_ready(&self) -> Result<()> {
        let support: Vec<usize> = match &self.kappa {
            SeqSpec::Table { values } => (1..=values.len())
                .filter(|j| values[j - 1] > 0.0)
                .collect(),
            SeqSpec::Constant { c } => {
                if *c > 0.0 {
                    vec![1, 2]
                } else {
                    vec![]
                }
            }
            SeqSpec::Power { c, .. } => {
                if *c > 0.0 {
                    vec![1, 2]
                } else {
                    vec![]
                }
            }
            SeqSpec::Perturbed { c, .. } => {
                if *c > 0.0 {
                    vec![1, 2]
                } else {
                    vec![]
                }
            }
            SeqSpec::Polylog { kstar, .. } => {
                if *kstar > 0.0 {
                    vec![1, 2]
                } else {
                    vec![]
                }
            }
        };
        if support.iter().all(|&j| j < 2) {
            return Err(Error::config(
                "asymptotic operations need kappa_j > 0 for some j >= 2",
            ));
        }
        let g = support.iter().fold(0usize, |acc, &j| gcd(acc, j));
        if g != 1 {
            return Err(Error::config(format!(
                "kappa support lies on the sublattice {g}Z; asymptotic theory needs gcd 1",
            )));
        }
        Ok(())
    }

    /// Boundary profile: the user override when present, otherwise derived
    /// from the sequence rules. Errors when the sequences place a power
    /// singularity on g_theta (unsupported) or when derivation is impossible
    /// (a pair of explicit tables has no finite radius and needs overrides
    /// for anything beyond subcritical machinery).
    pub fn profile(&self) -> Result<GenFnProfile> {
        if let Some(p) = &self.profile {
            return Ok(p.clone());
        }
        let radius = self.radius();
        let (theta_star, gt_value) = self.theta_boundary(radius)?;
        let (sing_index, sing_coeff, gk_derivs) = self.kappa_boundary(radius)?;
        Ok(GenFnProfile {
            radius,
            theta_star,
            gt_value_at_r: gt_value,
            sing_index,
            sing_coeff,
            gk_derivs_at_r: gk_derivs,
        })
    }

    fn theta_boundary(&self, radius: f64) -> Result<(f64, Option<f64>)> {
        if radius.is_infinite() {
            // Both rules are tables; nothing singular anywhere.
            return Ok((0.0, None));
        }
        match &self.theta {
            SeqSpec::Constant { c } => Ok((*c, Some(0.0))),
            SeqSpec::Power { c, gamma0 } => {
                if *c == 0.0 {
                    Ok((0.0, Some(0.0)))
                } else if *gamma0 > 0.0 {
                    Ok((0.0, Some(c * zeta(1.0 + gamma0)?)))
                } else if *gamma0 == 0.0 {
                    Ok((*c, Some(0.0)))
                } else {
                    Err(Error::unsupported(
                        "theta with a power singularity at the radius is outside the \
                         supported asymptotic families",
                    ))
                }
            }
            SeqSpec::Perturbed { c, gamma0, eps } => {
                if *c == 0.0 {
                    Ok((0.0, Some(0.0)))
                } else if *gamma0 > 0.0 {
                    Ok((
                        0.0,
                        Some(c * (zeta(1.0 + gamma0)? + zeta(1.0 + gamma0 + eps)?)),
                    ))
                } else if *gamma0 == 0.0 {
                    // theta_j = c (1 + j^-eps): a constant part plus a decaying
                    // one, so the log singularity keeps exponent c and the
                    // perturbation contributes a nonzero regularized constant.
                    Ok((*c, Some(c * zeta(1.0 + eps)?)))
                } else {
                    Err(Error::unsupported(
                        "theta with a power singularity at the radius is outside the \
                         supported asymptotic families",
                    ))
                }
            }
            SeqSpec::Polylog { kstar, s } => {
                if *kstar == 0.0 {
                    Ok((0.0, Some(0.0)))
                } else if *s > 0.0 {
                    Ok((0.0, Some(kstar * zeta(1.0 + s)?)))
                } else if *s == 0.0 {
                    Ok((*kstar, Some(0.0)))
                } else {
                    Err(Error::unsupported(
                        "theta with a power singularity at the radius is outside the \
                         supported asymptotic families",
                    ))
                }
            }
            SeqSpec::Table { .. } => Ok((0.0, Some(self.g_theta(radius)?))),
        }
    }

    fn kappa_boundary(&self, radius: f64) -> Result<(Option<f64>, Option<f64>, Vec<f64>)> {
        if radius.is_infinite() {
            return Ok((None, None, Vec::new()));
        }
        let over_rho = |x: f64| x / self.rho;
        match &self.kappa {
            SeqSpec::Constant { c } => {
                if *c == 0.0 {
                    Ok((None, None, vec![0.0, 0.0, 0.0]))
                } else {
                    // g_kappa^{1} = c r/(1-r) blows up at the radius.
                    Ok((None, None, Vec::new()))
                }
            }
            SeqSpec::Table { .. } => {
                let derivs = (1..=3)
                    .map(|n| self.g_kappa_mod_deriv(n, radius))
                    .collect::<Result<Vec<f64>>>()?;
                Ok((None, None, derivs))
            }
            SeqSpec::Polylog { kstar, s } | SeqSpec::Power { c: kstar, gamma0: s } => {
                if *kstar == 0.0 {
                    return Ok((None, None, vec![0.0, 0.0, 0.0]));
                }
                let coeff = sing_coeff_for(over_rho(*kstar), *s);
                let mut derivs = Vec::new();
                let mut n = 1usize;
                while (*s - n as f64) > 1e-9 && n <= 3 {
                    derivs.push(self.g_kappa_mod_deriv(n, radius)?);
                    n += 1;
                }
                Ok((Some(*s), coeff, derivs))
            }
            SeqSpec::Perturbed { c, gamma0, eps: _ } => {
                if *c == 0.0 {
                    return Ok((None, None, vec![0.0, 0.0, 0.0]));
                }
                let coeff = sing_coeff_for(over_rho(*c), *gamma0);
                let mut derivs = Vec::new();
                let mut n = 1usize;
                while (*gamma0 - n as f64) > 1e-9 && n <= 3 {
                    derivs.push(self.g_kappa_mod_deriv(n, radius)?);
                    n += 1;
                }
                Ok((Some(*gamma0), coeff, derivs))
            }
        }
    }
}

/// Coefficient of the (1 - z)^s singular term of kappa's generating
/// function when the coefficients decay like kstar j^(-s): kstar Gamma(-s)
/// for non-integer s, absent at integers where the expansion turns
/// logarithmic.
fn sing_coeff_for(kstar: f64, s: f64) -> Option<f64> {
    if (s - s.round()).abs() < 1e-9 {
        None
    } else {
        Some(kstar * gamma(-s))
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if a == 0 {
        b
    } else {
        gcd(b % a, a)
    }
}
