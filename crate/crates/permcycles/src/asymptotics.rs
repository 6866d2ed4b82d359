//! Regime classification and closed-form asymptotics.
//!
//! Everything revolves around g_kappa^{1}, the first modified derivative of
//! kappa's generating function, evaluated at the common radius R:
//!
//! * subcritical: g_kappa^{1}(R) > 1 (or divergent). A saddle point r_1 < R
//!   solves g_kappa^{1}(r_1) = 1 and all cycles stay microscopic.
//! * supercritical: g_kappa^{1}(R) < 1. A macroscopic fraction
//!   nu = 1 - g_kappa^{1}(R) of the points falls into giant cycles.
//! * critical: g_kappa^{1}(R) = 1 (within a 1e-9 band).
//!
//! For each regime the module evaluates the matching closed-form growth law
//! of the partition function H_N and the matching limit law of the total
//! cycle count T_N, with every constant frozen into a serializable tag.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specialfn::ln_gamma;
use crate::weights::{GenFnProfile, WeightModel};

/// Width of the band around g_kappa^{1}(R) = 1 classified as critical.
const CRITICAL_BAND: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regime::Subcritical => write!(f, "subcritical"),
            Regime::Critical => write!(f, "critical"),
            Regime::Supercritical => write!(f, "supercritical"),
        }
    }
}

/// The applicable growth law of log H_N with its constants baked in.
/// `evaluate(n)` returns the log of the asymptotic formula at size n.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum HnLaw {
    /// Subcritical saddle point inside the disk:
    /// log H_N = g_t(r_1) + N g_k(r_1) - N ln r_1 - ln sqrt(2 pi N b_2(r_1)).
    SaddleInterior { r1: f64, gt_at_r1: f64, gk_at_r1: f64, b2_at_r1: f64 },
    /// Supercritical with log-singular theta (theta_star > 0):
    /// log H_N = A + N g_k(R) - N ln R + (theta_star - 1) ln(N nu)
    ///           - ln Gamma(theta_star),
    /// where A is the regularized boundary constant of g_theta.
    BoundaryLog { a_const: f64, gk_at_r: f64, radius: f64, theta_star: f64, nu: f64 },
    /// Supercritical with regular theta (theta_star = 0) and a power
    /// singularity of exponent s on g_kappa:
    /// log H_N = g_t(R) + N g_k(R) - N ln R + ln(kstar_eff)
    ///           - s ln(N nu) - ln nu,
    /// with kstar_eff = a_s / Gamma(-s) > 0.
    BoundaryPower { gt_at_r: f64, gk_at_r: f64, radius: f64, s: f64, kstar_eff: f64, nu: f64 },
    /// Critical with finite g_theta(R) and finite curvature: the saddle
    /// formula evaluated at the boundary.
    SaddleAtRadius { gt_at_r: f64, gk_at_r: f64, radius: f64, b2_at_r: f64 },
    /// Critical with log-singular theta and finite curvature:
    /// log H_N = A + N g_k(R) - N ln R
    ///           + ((theta_star - 1)/2) ln(N b_2(R)/2)
    ///           - ln 2 - ln Gamma((1 + theta_star)/2).
    CriticalLog { a_const: f64, gk_at_r: f64, radius: f64, theta_star: f64, b2_at_r: f64 },
    /// Critical with a stable-index singularity s in (1, 2):
    /// log H_N = A + N g_k(R) - N ln R + ((theta_star - 1)/s) ln(N a_s)
    ///           - ln s - ln Gamma((s - 1 + theta_star)/s).
    CriticalStable { a_const: f64, gk_at_r: f64, radius: f64, theta_star: f64, s: f64, a_s: f64 },
    /// No closed form is available for this configuration.
    Unsupported { reason: String },
}

impl HnLaw {
    /// log of the asymptotic H_N formula at permutation size n.
    pub fn evaluate(&self, n: usize) -> Result<f64> {
        let nf = n as f64;
        let tau = std::f64::consts::TAU;
        match self {
            HnLaw::SaddleInterior { r1, gt_at_r1, gk_at_r1, b2_at_r1 } => Ok(gt_at_r1
                + nf * gk_at_r1
                - nf * r1.ln()
                - 0.5 * (tau * nf * b2_at_r1).ln()),
            HnLaw::BoundaryLog { a_const, gk_at_r, radius, theta_star, nu } => Ok(a_const
                + nf * gk_at_r
                - nf * radius.ln()
                + (theta_star - 1.0) * (nf * nu).ln()
                - ln_gamma(*theta_star)),
            HnLaw::BoundaryPower { gt_at_r, gk_at_r, radius, s, kstar_eff, nu } => Ok(gt_at_r
                + nf * gk_at_r
                - nf * radius.ln()
                + kstar_eff.ln()
                - s * (nf * nu).ln()
                - nu.ln()),
            HnLaw::SaddleAtRadius { gt_at_r, gk_at_r, radius, b2_at_r } => Ok(gt_at_r
                + nf * gk_at_r
                - nf * radius.ln()
                - 0.5 * (tau * nf * b2_at_r).ln()),
            HnLaw::CriticalLog { a_const, gk_at_r, radius, theta_star, b2_at_r } => Ok(a_const
                + nf * gk_at_r
                - nf * radius.ln()
                + 0.5 * (theta_star - 1.0) * (nf * b2_at_r / 2.0).ln()
                - std::f64::consts::LN_2
                - ln_gamma((1.0 + theta_star) / 2.0)),
            HnLaw::CriticalStable { a_const, gk_at_r, radius, theta_star, s, a_s } => Ok(a_const
                + nf * gk_at_r
                - nf * radius.ln()
                + (theta_star - 1.0) / s * (nf * a_s).ln()
                - s.ln()
                - ln_gamma((s - 1.0 + theta_star) / s)),
            HnLaw::Unsupported { reason } => Err(Error::unsupported(reason.clone())),
        }
    }
}

/// The applicable limit law of the total cycle count T_N.
///
/// For the normal cases, (T_N - N * mean_slope)/sqrt(N * var_slope) tends
/// to a standard normal. In the gamma-shifted case the same standardization
/// tends to Z - shift_coeff * sqrt(X) with Z standard normal and
/// X ~ Gamma(gamma_shape) independent.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "case")]
pub enum TnLaw {
    #[serde(rename = "a")]
    NormalSubcritical { mean_slope: f64, var_slope: f64 },
    #[serde(rename = "b")]
    NormalSupercritical { mean_slope: f64, var_slope: f64 },
    #[serde(rename = "c-i")]
    NormalCriticalRegular { mean_slope: f64, var_slope: f64 },
    #[serde(rename = "c-ii")]
    NormalCriticalStable { mean_slope: f64, var_slope: f64 },
    #[serde(rename = "c-iii")]
    GammaShiftedCritical {
        mean_slope: f64,
        var_slope: f64,
        gamma_shape: f64,
        shift_coeff: f64,
    },
    #[serde(rename = "unsupported")]
    Unsupported { reason: String },
}

impl TnLaw {
    /// Mean of the limiting standardized variable (0 for normal cases).
    pub fn limit_mean(&self) -> Result<f64> {
        match self {
            TnLaw::GammaShiftedCritical { gamma_shape, shift_coeff, .. } => {
                // E[sqrt(X)], X ~ Gamma(a): Gamma(a + 1/2)/Gamma(a).
                let a = *gamma_shape;
                let e_sqrt =
                    (ln_gamma(a + 0.5) - ln_gamma(a)).exp();
                Ok(-shift_coeff * e_sqrt)
            }
            TnLaw::Unsupported { reason } => Err(Error::unsupported(reason.clone())),
            _ => Ok(0.0),
        }
    }
}

/// How C_j behaves as N grows: either C_j/N concentrates on a constant
/// fraction, or (when kappa_j = 0) C_j itself converges to a Poisson law.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum CycleFractionLimit {
    Fraction { value: f64 },
    Poisson { rate: f64 },
}

/// Full classification output: the regime, the saddle data, the giant-cycle
/// fraction, the critical density, and the two applicable limit laws.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegimeReport {
    pub regime: Regime,
    /// r_1 in sub/critical regimes, R in the supercritical one.
    pub r_star: f64,
    /// Root of g_kappa^{1}(r) = 1; present in sub/critical regimes.
    pub r_1: Option<f64>,
    pub theta_star: f64,
    pub b1_at: Option<f64>,
    pub b2_at: Option<f64>,
    /// Limiting fraction of points in giant cycles: 0 unless supercritical.
    pub nu_tilde: f64,
    /// Density at which the model crosses into the supercritical regime;
    /// None when the base kappa sum diverges (never supercritical).
    pub rho_crit: Option<f64>,
    pub hn_law: HnLaw,
    pub tn_law: TnLaw,
}

/// Solve g_kappa^{1}(r) = 1/v on (0, R].
///
/// g_kappa^{1} is strictly increasing, so a bracketed bisection is exact to
/// machine precision. When 1/v exceeds the boundary value the root does not
/// exist and the error names the supercritical condition.
pub fn solve_r_v(model: &WeightModel, v: f64) -> Result<f64> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::domain("solve_r_v needs finite v > 0"));
    }
    let target = 1.0 / v;
    let radius = model.radius();

    let mut hi = if radius.is_finite() {
        radius * (1.0 - 1e-12)
    } else {
        // Entire g_kappa^{1}: double outward until the target is bracketed.
        let mut h = 1.0;
        let mut guard = 0;
        while model.g_kappa_mod_deriv(1, h)? < target {
            h *= 2.0;
            guard += 1;
            if guard > 200 {
                return Err(Error::domain(
                    "g_kappa^{1} never reaches 1/v; kappa has no mass",
                ));
            }
        }
        h
    };

    let g_hi = model.g_kappa_mod_deriv(1, hi)?;
    if g_hi < target {
        // Allow the boundary case g_kappa^{1}(R) = 1/v to land exactly on R.
        if radius.is_finite() && (g_hi - target).abs() <= 1e-9 * target.max(1.0) {
            return Ok(radius);
        }
        return Err(Error::domain(format!(
            "no root: g_kappa^{{1}}(R) = {g_hi} stays below 1/v = {target} \
             (the supercritical condition at this v)",
        )));
    }

    let mut lo = 0.0f64;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g = model.g_kappa_mod_deriv(1, mid)?;
        if (g * v - 1.0).abs() < 1e-14 {
            return Ok(mid);
        }
        if g < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Critical density: the sum of the base (undivided) kappa coefficients
/// times R^j. None encodes divergence, i.e. the model can never be pushed
/// supercritical by raising the density.
pub fn critical_density(model: &WeightModel) -> Result<Option<f64>> {
    let profile = model.profile()?;
    if profile.radius.is_infinite() {
        return Ok(None);
    }
    Ok(profile
        .gk_derivs_at_r
        .first()
        .map(|gk1| model.rho * gk1))
}

/// Exact partial giant-cycle fraction 1 - sum_{j<=K} kappa_j r_*^j; it
/// decreases to nu_tilde as K grows.
pub fn nu_tilde_k(model: &WeightModel, k: usize) -> Result<f64> {
    let report = classify(model)?;
    let mut acc = 0.0;
    let mut rj = 1.0;
    for j in 1..=k {
        rj *= report.r_star;
        acc += model.kappa_j(j) * rj;
    }
    Ok(1.0 - acc)
}

/// Limit of C_j/N (or the Poisson law of C_j when kappa_j = 0).
pub fn limiting_cycle_fraction(model: &WeightModel, j: usize) -> Result<CycleFractionLimit> {
    if j == 0 {
        return Err(Error::config("cycle lengths start at 1"));
    }
    let report = classify(model)?;
    let kappa_j = model.kappa_j(j);
    let rj = report.r_star.powi(j as i32);
    if kappa_j > 0.0 {
        Ok(CycleFractionLimit::Fraction { value: kappa_j * rj / j as f64 })
    } else {
        let theta_j = model.theta_j(j);
        if theta_j > 0.0 {
            Ok(CycleFractionLimit::Poisson { rate: theta_j * rj / j as f64 })
        } else {
            Ok(CycleFractionLimit::Fraction { value: 0.0 })
        }
    }
}

/// log of the asymptotic growth formula for H_N, with the law it used.
pub fn asymptotic_log_hn(model: &WeightModel, n: usize) -> Result<(f64, HnLaw)> {
    let report = classify(model)?;
    let value = report.hn_law.evaluate(n)?;
    Ok((value, report.hn_law))
}

/// The T_N limit law for the model.
pub fn tn_limit_params(model: &WeightModel) -> Result<TnLaw> {
    Ok(classify(model)?.tn_law)
}

/// Classify the regime and assemble every asymptotic constant.
pub fn classify(model: &WeightModel) -> Result<RegimeReport> {
    model.validate()?;
    model.check_asymptotic_ready()?;
    let profile = model.profile()?;
    let radius = profile.radius;

    if radius.is_infinite() {
        // Polynomial kappa: g_kappa^{1} is unbounded, so a saddle point
        // always exists and the model is subcritical at every density.
        let r1 = solve_r_v(model, 1.0)?;
        return assemble_subcritical(model, &profile, r1, None);
    }

    let gk1_at_r = profile.gk_derivs_at_r.first().copied();
    let rho_crit = gk1_at_r.map(|g| model.rho * g);

    match gk1_at_r {
        None => {
            // First derivative diverges at R: the saddle is always interior.
            let r1 = solve_r_v(model, 1.0)?;
            assemble_subcritical(model, &profile, r1, rho_crit)
        }
        Some(gk1) if (gk1 - 1.0).abs() <= CRITICAL_BAND => {
            assemble_critical(model, &profile, gk1, rho_crit)
        }
        Some(gk1) if gk1 > 1.0 => {
            let r1 = solve_r_v(model, 1.0)?;
            assemble_subcritical(model, &profile, r1, rho_crit)
        }
        Some(gk1) => assemble_supercritical(model, &profile, gk1, rho_crit),
    }
}

fn assemble_subcritical(
    model: &WeightModel,
    profile: &GenFnProfile,
    r1: f64,
    rho_crit: Option<f64>,
) -> Result<RegimeReport> {
    let gt = model.g_theta(r1)?;
    let gk = model.g_kappa(r1)?;
    let b1 = model.b1(r1)?;
    let b2 = model.b2(r1)?;
    let hn_law = HnLaw::SaddleInterior { r1, gt_at_r1: gt, gk_at_r1: gk, b2_at_r1: b2 };
    let tn_law = TnLaw::NormalSubcritical { mean_slope: gk, var_slope: gk - 1.0 / b2 };
    Ok(RegimeReport {
        regime: Regime::Subcritical,
        r_star: r1,
        r_1: Some(r1),
        theta_star: profile.theta_star,
        b1_at: Some(b1),
        b2_at: Some(b2),
        nu_tilde: 0.0,
        rho_crit,
        hn_law,
        tn_law,
    })
}

fn assemble_supercritical(
    model: &WeightModel,
    profile: &GenFnProfile,
    gk1: f64,
    rho_crit: Option<f64>,
) -> Result<RegimeReport> {
    let radius = profile.radius;
    let nu = 1.0 - gk1;
    let gk = model.g_kappa(radius)?;
    let theta_star = profile.theta_star;
    let b2_at = if profile.gk_derivs_at_r.len() >= 2 {
        Some(profile.gk_derivs_at_r[0] + profile.gk_derivs_at_r[1])
    } else {
        None
    };

    let hn_law = if theta_star > 0.0 {
        match profile.gt_value_at_r {
            Some(a_const) => {
                HnLaw::BoundaryLog { a_const, gk_at_r: gk, radius, theta_star, nu }
            }
            None => HnLaw::Unsupported {
                reason: "supercritical law needs the regularized boundary constant of g_theta"
                    .into(),
            },
        }
    } else {
        match (profile.gt_value_at_r, profile.sing_index, profile.sing_coeff) {
            (Some(gt), Some(s), Some(a_s)) if s > 1.0 => {
                // kstar_eff = a_s / Gamma(-s) is positive for every
                // non-integer s > 1 (the signs of a_s and Gamma(-s) flip
                // together).
                let kstar_eff = a_s * crate::specialfn::recip_gamma(-s);
                HnLaw::BoundaryPower { gt_at_r: gt, gk_at_r: gk, radius, s, kstar_eff, nu }
            }
            (_, Some(s), None) => HnLaw::Unsupported {
                reason: format!(
                    "supercritical law with regular theta needs a non-integer singularity \
                     exponent; s = {s} has logarithmic corrections with no closed form here",
                ),
            },
            _ => HnLaw::Unsupported {
                reason: "supercritical law with regular theta needs a power singularity \
                         on g_kappa (index and coefficient)"
                    .into(),
            },
        }
    };

    let tn_law = TnLaw::NormalSupercritical { mean_slope: gk, var_slope: gk };

    Ok(RegimeReport {
        regime: Regime::Supercritical,
        r_star: radius,
        r_1: None,
        theta_star,
        b1_at: Some(gk1),
        b2_at,
        nu_tilde: nu,
        rho_crit,
        hn_law,
        tn_law,
    })
}

fn assemble_critical(
    model: &WeightModel,
    profile: &GenFnProfile,
    gk1: f64,
    rho_crit: Option<f64>,
) -> Result<RegimeReport> {
    let radius = profile.radius;
    let gk = model.g_kappa(radius)?;
    let theta_star = profile.theta_star;
    let curvature_finite = profile.gk_derivs_at_r.len() >= 2;
    let b2_at = if curvature_finite {
        Some(profile.gk_derivs_at_r[0] + profile.gk_derivs_at_r[1])
    } else {
        None
    };
    let stable_index = profile.sing_index.filter(|s| {
        *s > 1.0 && *s < 2.0 && (s - s.round()).abs() > 1e-9
    });

    let hn_law = if let Some(s) = stable_index {
        match (profile.gt_value_at_r, profile.sing_coeff) {
            (Some(a_const), Some(a_s)) => {
                HnLaw::CriticalStable { a_const, gk_at_r: gk, radius, theta_star, s, a_s }
            }
            _ => HnLaw::Unsupported {
                reason: "critical stable law needs the singular coefficient and the \
                         regularized theta constant"
                    .into(),
            },
        }
    } else if curvature_finite {
        let b2 = b2_at.expect("curvature checked finite");
        if theta_star == 0.0 {
            match profile.gt_value_at_r {
                Some(gt) => HnLaw::SaddleAtRadius { gt_at_r: gt, gk_at_r: gk, radius, b2_at_r: b2 },
                None => HnLaw::Unsupported {
                    reason: "critical law needs a finite g_theta(R)".into(),
                },
            }
        } else {
            match profile.gt_value_at_r {
                Some(a_const) => {
                    HnLaw::CriticalLog { a_const, gk_at_r: gk, radius, theta_star, b2_at_r: b2 }
                }
                None => HnLaw::Unsupported {
                    reason: "critical law needs the regularized boundary constant of g_theta"
                        .into(),
                },
            }
        }
    } else {
        HnLaw::Unsupported {
            reason: "critical regime with divergent curvature and no stable index in (1, 2): \
                     no closed form is available"
                .into(),
        }
    };

    let tn_law = if curvature_finite {
        let b2 = b2_at.expect("curvature checked finite");
        if theta_star == 0.0 {
            TnLaw::NormalCriticalRegular { mean_slope: gk, var_slope: gk - 1.0 / b2 }
        } else {
            TnLaw::GammaShiftedCritical {
                mean_slope: gk,
                var_slope: gk - 1.0 / b2,
                gamma_shape: theta_star / 2.0,
                shift_coeff: (2.0 / (gk * b2 - 1.0)).sqrt(),
            }
        }
    } else if stable_index.is_some() {
        TnLaw::NormalCriticalStable { mean_slope: gk, var_slope: gk }
    } else {
        TnLaw::Unsupported {
            reason: "critical regime with divergent curvature and no stable index in (1, 2)"
                .into(),
        }
    };

    Ok(RegimeReport {
        regime: Regime::Critical,
        r_star: radius,
        r_1: Some(radius),
        theta_star,
        b1_at: Some(gk1),
        b2_at,
        nu_tilde: 0.0,
        rho_crit,
        hn_law,
        tn_law,
    })
}
