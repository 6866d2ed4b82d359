//! Lattice-allocation numerics behind the kappa sequences.
//!
//! A permutation of N points in a box of side L (density rho = N/L^d)
//! weights each j-cycle by a lattice sum of e^{-j eps0(k/L)} over k in Z^d.
//! Viewed as a Riemann sum with mesh 1/L, that sum is N kappa_j + theta_j
//! plus vanishing corrections, where kappa_j comes from the corresponding
//! integral. This module evaluates both sides, the correction
//! delta = sum - L^d * integral, a dual (Poisson-transformed) route for
//! cross-checking, and the phenomenological theta correction shapes for the
//! transition zone.
//!
//! The d-dimensional objects are separable products of one-dimensional ones,
//! so everything reduces to scalar series with closed-form integrals.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::SeqSpec;

/// Decay family of the one-particle energy eps0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// eps0(s) = s^2.
    Gaussian,
    /// eps0(s) = |s|^gamma with gamma in (0, 2).
    Stable { gamma: f64 },
}

impl Family {
    fn eps0(&self, s: f64) -> f64 {
        match self {
            Family::Gaussian => s * s,
            Family::Stable { gamma } => s.abs().powf(*gamma),
        }
    }

    /// The exponent eta such that the lattice sum collapses to 1 whenever
    /// j L^{-eta} grows: 2 for Gaussian, gamma for the stable family.
    pub fn tail_exponent(&self) -> f64 {
        match self {
            Family::Gaussian => 2.0,
            Family::Stable { gamma } => *gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Family::Stable { gamma } = self {
            if !(*gamma > 0.0 && *gamma < 2.0) {
                return Err(Error::config("stable exponent must lie in (0, 2)"));
            }
        }
        Ok(())
    }
}

/// Box geometry: dimension, side length, and point density rho = N/L^d.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpatialConfig {
    pub family: Family,
    pub d: usize,
    pub l: f64,
    pub rho: f64,
}

impl SpatialConfig {
    pub fn new(family: Family, d: usize, l: f64, rho: f64) -> Self {
        SpatialConfig { family, d, l, rho }
    }

    pub fn validate(&self) -> Result<()> {
        self.family.validate()?;
        if self.d == 0 {
            return Err(Error::config("dimension must be at least 1"));
        }
        if !(self.l > 0.0) || !self.l.is_finite() {
            return Err(Error::config("box side must be finite and positive"));
        }
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(Error::config("density must be finite and positive"));
        }
        Ok(())
    }

    /// Number of points implied by the density: rho L^d.
    pub fn n_points(&self) -> f64 {
        self.rho * self.l.powi(self.d as i32)
    }
}

/// Absolute truncation threshold for lattice-series terms.
const TERM_FLOOR: f64 = 1e-18;
/// -ln(TERM_FLOOR): exponent at which a term drops below the floor.
const EXP_CUTOFF: f64 = 41.446531791074514;
/// Above this many direct terms the Gaussian sum switches to its dual form.
const DIRECT_TERM_LIMIT: f64 = 1e6;

/// One-dimensional lattice sum sum_{k in Z} e^{-j eps0(k/L)}.
///
/// Terms below 1e-18 are dropped. When the direct Gaussian series would
/// need more than a million terms (j/L^2 very small) the exact dual theta
/// series is used instead; it needs only a handful of terms there.
pub fn one_dim_lattice_sum(family: Family, j: usize, l: f64) -> Result<f64> {
    family.validate()?;
    if j == 0 {
        return Err(Error::domain("cycle lengths start at 1"));
    }
    if !(l > 0.0) || !l.is_finite() {
        return Err(Error::config("box side must be finite and positive"));
    }
    let jf = j as f64;
    let terms_needed = l * (EXP_CUTOFF / jf).powf(1.0 / family.tail_exponent());
    if terms_needed > DIRECT_TERM_LIMIT {
        match family {
            Family::Gaussian => return Ok(gaussian_dual_sum(jf, l)),
            Family::Stable { .. } => {
                return Err(Error::size_limit(format!(
                    "stable lattice sum needs about {terms_needed:.0} terms; \
                     no dual acceleration is available for this exponent",
                )))
            }
        }
    }
    // Kahan compensation keeps the many-term sums at full precision.
    let mut sum = 1.0f64;
    let mut comp = 0.0f64;
    let mut k = 1.0f64;
    loop {
        let term = 2.0 * (-jf * family.eps0(k / l)).exp();
        if term < TERM_FLOOR {
            break;
        }
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        k += 1.0;
    }
    Ok(sum)
}

/// Dual (Poisson-transformed) Gaussian theta series:
/// sum_k e^{-j k^2/L^2} = L sqrt(pi/j) sum_l e^{-pi^2 l^2 L^2 / j}.
fn gaussian_dual_sum(j: f64, l: f64) -> f64 {
    l * (std::f64::consts::PI / j).sqrt() * (1.0 + gaussian_dual_tail(j, l))
}

/// Full lattice sum over Z^d: the one-dimensional sum to the d-th power.
pub fn riemann_sum(cfg: &SpatialConfig, j: usize) -> Result<f64> {
    cfg.validate()?;
    Ok(one_dim_lattice_sum(cfg.family, j, cfg.l)?.powi(cfg.d as i32))
}

/// Closed-form integral int_{R^d} e^{-j eps(s)} ds:
/// (pi/j)^{d/2} for the Gaussian family, {2 Gamma(1+1/gamma) j^{-1/gamma}}^d
/// for the stable one.
pub fn integral_weight(cfg: &SpatialConfig, j: usize) -> Result<f64> {
    cfg.validate()?;
    if j == 0 {
        return Err(Error::domain("cycle lengths start at 1"));
    }
    let jf = j as f64;
    let per_dim = match cfg.family {
        Family::Gaussian => (std::f64::consts::PI / jf).sqrt(),
        Family::Stable { gamma } => 2.0 * crate::specialfn::gamma(1.0 + 1.0 / gamma) / jf.powf(1.0 / gamma),
    };
    Ok(per_dim.powi(cfg.d as i32))
}

/// Correction delta = lattice sum - L^d * integral. Positive in every
/// configuration this crate evaluates: the lattice always holds more mass
/// than its integral approximation.
///
/// For the Gaussian family the theta identity gives the one-dimensional sum
/// as (L sqrt(pi/j))(1 + t) with t the strictly positive dual tail, so
/// delta = (L sqrt(pi/j))^d ((1+t)^d - 1) can be formed without subtracting
/// nearly equal numbers; it stays accurate even when delta is far below the
/// rounding floor of the direct difference. The stable family uses the
/// direct difference, whose correction decays only polynomially and is
/// well resolved.
pub fn delta_correction(cfg: &SpatialConfig, j: usize) -> Result<f64> {
    cfg.validate()?;
    if j == 0 {
        return Err(Error::domain("cycle lengths start at 1"));
    }
    match cfg.family {
        Family::Gaussian => {
            let jf = j as f64;
            let base = cfg.l * (std::f64::consts::PI / jf).sqrt();
            let t = gaussian_dual_tail(jf, cfg.l);
            Ok(base.powi(cfg.d as i32) * (cfg.d as f64 * t.ln_1p()).exp_m1())
        }
        Family::Stable { .. } => {
            let sum = riemann_sum(cfg, j)?;
            let volume = cfg.l.powi(cfg.d as i32);
            Ok(sum - volume * integral_weight(cfg, j)?)
        }
    }
}

/// Dual tail t = 2 sum_{l >= 1} e^{-pi^2 l^2 L^2 / j}, truncated relative
/// to its own leading term. Underflows to 0 when the leading exponent
/// drops below what f64 can hold, which is the honest answer there.
fn gaussian_dual_tail(j: f64, l: f64) -> f64 {
    let decay = std::f64::consts::PI.powi(2) * l * l / j;
    let mut tail = 0.0f64;
    let mut k = 1.0f64;
    loop {
        let term = 2.0 * (-decay * k * k).exp();
        if term == 0.0 || (tail > 0.0 && term < tail * 1e-18) {
            break;
        }
        tail += term;
        k += 1.0;
    }
    tail
}

/// Independent dual route for the lattice sum.
///
/// Gaussian: the Poisson-transformed theta series. Stable with gamma = 1:
/// the Lorentzian-sum closed form (1+e^{-j/L})/(1-e^{-j/L}) per dimension.
/// Other stable exponents have no closed dual and return an error.
pub fn poisson_dual_sum(cfg: &SpatialConfig, j: usize) -> Result<f64> {
    cfg.validate()?;
    if j == 0 {
        return Err(Error::domain("cycle lengths start at 1"));
    }
    let jf = j as f64;
    let per_dim = match cfg.family {
        Family::Gaussian => gaussian_dual_sum(jf, cfg.l),
        Family::Stable { gamma } if gamma == 1.0 => {
            let x = (-jf / cfg.l).exp();
            (1.0 + x) / (1.0 - x)
        }
        Family::Stable { gamma } => {
            return Err(Error::unsupported(format!(
                "no closed dual series for stable exponent {gamma}",
            )))
        }
    };
    Ok(per_dim.powi(cfg.d as i32))
}

/// Order parameter eta_{j,L} = L j^{-1/2} (Gaussian) or L j^{-1/gamma}
/// (stable) that separates the integral-dominated zone (eta large) from the
/// universal zone (eta small).
pub fn order_parameter(cfg: &SpatialConfig, j: usize) -> Result<f64> {
    cfg.validate()?;
    if j == 0 {
        return Err(Error::domain("cycle lengths start at 1"));
    }
    Ok(cfg.l * (j as f64).powf(-1.0 / cfg.family.tail_exponent()))
}

/// Theta(eta) = 1/(1 - e^{-1/eta}): tends to 1 as eta -> 0 and behaves like
/// eta as eta -> infinity.
pub fn big_theta(eta: f64) -> f64 {
    1.0 / (1.0 - (-1.0 / eta).exp())
}

/// Phenomenological shape of the theta correction in the transition zone,
/// with proportionality constant fixed at 1:
/// Theta^{d-1} e^{-Theta^2} for the Gaussian family and Theta^{d-1-gamma}
/// for the stable one.
pub fn heuristic_theta(cfg: &SpatialConfig, j: usize) -> Result<f64> {
    let theta = big_theta(order_parameter(cfg, j)?);
    Ok(match cfg.family {
        Family::Gaussian => theta.powi(cfg.d as i32 - 1) * (-theta * theta).exp(),
        Family::Stable { gamma } => theta.powf(cfg.d as f64 - 1.0 - gamma),
    })
}

/// Checks the universal-tail collapse: along an increasing L grid with
/// j = ceil(L^eta ln L), the deviation |lattice sum - 1| must shrink at
/// every step. Returns false (with no error) when the pattern fails.
pub fn check_universal_tail(cfg: &SpatialConfig, l_grid: &[f64]) -> Result<bool> {
    cfg.validate()?;
    if l_grid.len() < 2 {
        return Err(Error::config("need at least two box sides to compare"));
    }
    let eta = cfg.family.tail_exponent();
    let mut prev = f64::INFINITY;
    for &l in l_grid {
        if !(l > 1.0) {
            return Err(Error::config("box sides must exceed 1 for j = L^eta ln L"));
        }
        let j = (l.powf(eta) * l.ln()).ceil() as usize;
        let probe = SpatialConfig { l, ..cfg.clone() };
        let dev = (riemann_sum(&probe, j)? - 1.0).abs();
        if dev >= prev {
            return Ok(false);
        }
        prev = dev;
    }
    Ok(true)
}

/// The base kappa sequence this geometry induces: kappa_j proportional to
/// j^{-d/2} (Gaussian) or j^{-d/gamma} (stable), with the integral constant
/// as prefactor. Pair it with `WeightModel::with_rho(cfg.rho)`, which
/// applies the 1/rho factor.
pub fn base_kappa(cfg: &SpatialConfig) -> Result<SeqSpec> {
    cfg.validate()?;
    let (kstar, s) = match cfg.family {
        Family::Gaussian => {
            (std::f64::consts::PI.powf(cfg.d as f64 / 2.0), cfg.d as f64 / 2.0)
        }
        Family::Stable { gamma } => {
            let c = 2.0 * crate::specialfn::gamma(1.0 + 1.0 / gamma);
            (c.powi(cfg.d as i32), cfg.d as f64 / gamma)
        }
    };
    Ok(SeqSpec::Polylog { kstar, s })
}
