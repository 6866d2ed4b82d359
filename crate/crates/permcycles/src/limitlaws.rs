//! Limiting objects for ordered cycle lengths: GEM and Poisson-Dirichlet
//! stick-breaking, the delayed stick-breaking process that governs giant
//! cycles in the supercritical regime, and the shifted-gamma limit of the
//! standardized total cycle count at criticality.
//!
//! Every sampler takes an explicit generator so callers control streams;
//! parallel use splits into independent substreams exactly like the exact
//! sampler does.

use rand::Rng;

use crate::error::{Error, Result};
use crate::specialfn::ln_gamma;

/// Default truncation depth for stick-breaking paths. The leftover interval
/// mass decays geometrically, so 256 terms leave no measurable tail for any
/// theta of practical size; the tail mass is reported either way.
pub const DEFAULT_N_TERMS: usize = 256;

/// One realization of the delayed stick-breaking process.
///
/// The interval starts at length 1. At step n a coin xi_n decides whether a
/// bite is taken; when it is, a Beta(1, theta_star) fraction b of the
/// remaining interval eta_{n-1} is removed. The removed lengths are the x_n
/// and satisfy x_1 + ... + x_n + eta_n = 1 at every step.
#[derive(Clone, Debug)]
pub struct StickPath {
    pub nu: f64,
    pub theta_star: f64,
    /// Coin outcomes: xi[n] is 1 when a bite happened at step n + 1.
    pub xi: Vec<bool>,
    /// Bite fractions d_n = xi_n * b_n (0 on delayed steps).
    pub d: Vec<f64>,
    /// Remaining interval after each step.
    pub eta: Vec<f64>,
    /// Removed lengths x_n = eta_{n-1} d_n.
    pub x: Vec<f64>,
    /// Steps at which a bite happened, in order.
    pub tau: Vec<usize>,
    /// eta at the truncation point: mass not accounted for by x.
    pub tail_mass: f64,
}

impl StickPath {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Removed lengths in descending order (the ranked path).
    pub fn ranked(&self) -> Vec<f64> {
        let mut v = self.x.clone();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Largest deviation of x_1 + .. + x_n + eta_n from 1 over the path.
    pub fn identity_defect(&self) -> f64 {
        let mut acc = 0.0f64;
        let mut worst = 0.0f64;
        for (xn, en) in self.x.iter().zip(&self.eta) {
            acc += xn;
            worst = worst.max((acc + en - 1.0).abs());
        }
        worst
    }
}

/// Delay probability u*(x) = nu x / (1 - nu + nu x).
fn u_star(nu: f64, x: f64) -> f64 {
    nu * x / (1.0 - nu + nu * x)
}

/// Beta(1, theta) by inversion: 1 - U^{1/theta}. Exact and branch-free;
/// the uniform is nudged off 0 so the bite never consumes the whole stick.
fn beta_one_theta(theta: f64, rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    1.0 - u.powf(1.0 / theta)
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(Error::domain("nu must lie in (0, 1]"));
    }
    Ok(())
}

/// GEM(theta) stick-breaking: y_n = b_n prod_{j<n} (1 - b_j) with the b_j
/// independent Beta(1, theta).
pub fn sample_gem(theta: f64, n_terms: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if !(theta > 0.0) || !theta.is_finite() {
        return Err(Error::domain("GEM needs finite theta > 0"));
    }
    let mut betas = Vec::with_capacity(n_terms);
    for _ in 0..n_terms {
        betas.push(beta_one_theta(theta, rng));
    }
    Ok(sticks_from_betas(&betas))
}

/// The deterministic stick arithmetic behind GEM, split out so the
/// bookkeeping can be checked against hand values.
fn sticks_from_betas(betas: &[f64]) -> Vec<f64> {
    let mut remaining = 1.0;
    let mut out = Vec::with_capacity(betas.len());
    for &b in betas {
        out.push(remaining * b);
        remaining *= 1.0 - b;
    }
    out
}

/// Poisson-Dirichlet PD(theta): ranked GEM.
pub fn sample_pd(theta: f64, n_terms: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let mut v = sample_gem(theta, n_terms, rng)?;
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

/// The delayed stick-breaking process: at step n a bite happens with
/// probability u*(eta_{n-1}), and the bite fraction is Beta(1, theta_star).
///
/// The coin is drawn first and the beta only on a hit, so at nu = 1 (where
/// u* is identically one and the coin is deterministic) the consumed random
/// stream, and therefore the sampled path, is exactly the GEM stream.
pub fn sample_stick(
    nu: f64,
    theta_star: f64,
    n_terms: usize,
    rng: &mut impl Rng,
) -> Result<StickPath> {
    check_nu(nu)?;
    if !(theta_star > 0.0) || !theta_star.is_finite() {
        return Err(Error::domain(
            "sample_stick needs theta_star > 0; use sample_stick_degenerate for theta_star = 0",
        ));
    }
    let mut path = StickPath {
        nu,
        theta_star,
        xi: Vec::with_capacity(n_terms),
        d: Vec::with_capacity(n_terms),
        eta: Vec::with_capacity(n_terms),
        x: Vec::with_capacity(n_terms),
        tau: Vec::new(),
        tail_mass: 1.0,
    };
    let mut eta = 1.0f64;
    for n in 1..=n_terms {
        let u = u_star(nu, eta);
        let hit = if u >= 1.0 { true } else { rng.gen::<f64>() < u };
        let dn = if hit { beta_one_theta(theta_star, rng) } else { 0.0 };
        if hit {
            path.tau.push(n);
        }
        path.xi.push(hit);
        path.d.push(dn);
        path.x.push(eta * dn);
        eta *= 1.0 - dn;
        path.eta.push(eta);
    }
    path.tail_mass = eta;
    Ok(path)
}

/// Degenerate theta_star = 0 path: the whole interval is taken in one bite
/// at a geometric time tau_1 with success probability nu.
pub fn sample_stick_degenerate(nu: f64, n_terms: usize, rng: &mut impl Rng) -> Result<StickPath> {
    check_nu(nu)?;
    let tau1 = if nu == 1.0 {
        1
    } else {
        let u: f64 = rng.gen();
        1 + ((1.0 - u).ln() / (1.0 - nu).ln()).floor() as usize
    };
    let mut path = StickPath {
        nu,
        theta_star: 0.0,
        xi: vec![false; n_terms],
        d: vec![0.0; n_terms],
        eta: vec![1.0; n_terms],
        x: vec![0.0; n_terms],
        tau: vec![tau1],
        tail_mass: 1.0,
    };
    if tau1 <= n_terms {
        path.xi[tau1 - 1] = true;
        path.d[tau1 - 1] = 1.0;
        path.x[tau1 - 1] = 1.0;
        for e in path.eta.iter_mut().skip(tau1 - 1) {
            *e = 0.0;
        }
        path.tail_mass = 0.0;
    }
    Ok(path)
}

/// Closed-form moments of the first two removed lengths.
///
/// * (n1, 0): E[X_1^{n1}] = nu n1! Gamma(t+1)/Gamma(t+n1+1)
/// * (n1, n2), both positive:
///   E[X_1^{n1} X_2^{n2} (1 - nu X_1)] = t nu^2 n1! n2! Gamma(t+1)/Gamma(t+n1+n2+2)
/// * (0, n2): E[X_2^{n2} (1 - nu X_1)] = {t + (n2+1)(1-nu)} nu n2! Gamma(t+1)/Gamma(t+n2+2)
///
/// with t = theta_star. All three remain valid at t = 0 (they reduce to
/// nu, 0, and (1-nu) nu respectively when the exponents are 1).
pub fn stick_moments(nu: f64, theta_star: f64, n1: u32, n2: u32) -> Result<f64> {
    check_nu(nu)?;
    if !(theta_star >= 0.0) || !theta_star.is_finite() {
        return Err(Error::domain("theta_star must be finite and nonnegative"));
    }
    if n1 == 0 && n2 == 0 {
        return Err(Error::config("at least one exponent must be positive"));
    }
    let t = theta_star;
    let ln_fact = |n: u32| ln_gamma(n as f64 + 1.0);
    let value = if n2 == 0 {
        nu * (ln_fact(n1) + ln_gamma(t + 1.0) - ln_gamma(t + n1 as f64 + 1.0)).exp()
    } else if n1 == 0 {
        let front = t + (n2 as f64 + 1.0) * (1.0 - nu);
        front * nu * (ln_fact(n2) + ln_gamma(t + 1.0) - ln_gamma(t + n2 as f64 + 2.0)).exp()
    } else {
        t * nu
            * nu
            * (ln_fact(n1) + ln_fact(n2) + ln_gamma(t + 1.0)
                - ln_gamma(t + (n1 + n2) as f64 + 2.0))
                .exp()
    };
    Ok(value)
}

/// Standard normal by the polar (Marsaglia) method. The second coordinate
/// is discarded rather than cached, so the draw count per call is fixed by
/// the rejection pattern alone and streams stay reproducible.
pub fn sample_normal(rng: &mut impl Rng) -> f64 {
    loop {
        let u: f64 = 2.0 * rng.gen::<f64>() - 1.0;
        let v: f64 = 2.0 * rng.gen::<f64>() - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * (-2.0 * s.ln() / s).sqrt();
        }
    }
}

/// Gamma(shape, 1) by the Marsaglia-Tsang squeeze; shapes below one are
/// lifted by the standard U^{1/shape} boost.
pub fn sample_gamma(shape: f64, rng: &mut impl Rng) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(Error::domain("gamma shape must be finite and positive"));
    }
    if shape < 1.0 {
        let boost: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE).powf(1.0 / shape);
        return Ok(boost * sample_gamma_at_least_one(shape + 1.0, rng));
    }
    Ok(sample_gamma_at_least_one(shape, rng))
}

fn sample_gamma_at_least_one(shape: f64, rng: &mut impl Rng) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z = sample_normal(rng);
        let t = 1.0 + c * z;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
        if u < 1.0 - 0.0331 * z.powi(4) {
            return d * v;
        }
        if u.ln() < 0.5 * z * z + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// One draw from the shifted-gamma limit Z - shift_coeff * sqrt(X) with Z
/// standard normal and X ~ Gamma(shape) independent. Z is drawn first.
pub fn sample_shifted_gamma_limit(shape: f64, shift_coeff: f64, rng: &mut impl Rng) -> Result<f64> {
    if !(shift_coeff >= 0.0) || !shift_coeff.is_finite() {
        return Err(Error::domain("shift coefficient must be finite and nonnegative"));
    }
    let z = sample_normal(rng);
    let x = sample_gamma(shape, rng)?;
    Ok(z - shift_coeff * x.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Kolmogorov-Smirnov distance of a sample against a cdf closure.
    fn ks_against(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
        samples.sort_by(|a, b| a.total_cmp(b));
        let n = samples.len() as f64;
        let mut worst = 0.0f64;
        for (i, &x) in samples.iter().enumerate() {
            let f = cdf(x);
            worst = worst.max((f - i as f64 / n).abs());
            worst = worst.max(((i + 1) as f64 / n - f).abs());
        }
        worst
    }

    #[test]
    fn stick_arithmetic_by_hand() {
        let y = sticks_from_betas(&[0.3, 0.5]);
        assert!((y[0] - 0.3).abs() < 1e-15);
        assert!((y[1] - 0.35).abs() < 1e-15);
    }

    #[test]
    fn gem_first_stick_mean() {
        let mut r = rng(11);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += sample_gem(1.0, 1, &mut r).unwrap()[0];
        }
        let mean = sum / n as f64;
        // Beta(1,1) is uniform: mean 1/2, sd of the mean about 0.0009.
        assert!((mean - 0.5).abs() < 3e-3, "mean {mean}");
    }

    #[test]
    fn gem_sticks_fill_the_interval() {
        let mut r = rng(5);
        let mut slow = 0usize;
        let draws = 1000;
        for _ in 0..draws {
            let y = sample_gem(1.0, 200, &mut r).unwrap();
            let total: f64 = y.iter().sum();
            // Strictly below 1 in exact arithmetic; allow summation ulps.
            assert!(total <= 1.0 + 1e-12);
            if total <= 1.0 - 1e-6 {
                slow += 1;
            }
        }
        assert!(slow <= draws / 100, "{slow} slow fills out of {draws}");
    }

    #[test]
    fn pd_is_ranked_and_concentrates_for_small_theta() {
        let mut r = rng(17);
        let v = sample_pd(1.0, 64, &mut r).unwrap();
        assert!(v.windows(2).all(|w| w[0] >= w[1]));

        let mut above = 0usize;
        let draws = 2000;
        for _ in 0..draws {
            let v = sample_pd(0.05, 64, &mut r).unwrap();
            if v[0] > 0.95 {
                above += 1;
            }
        }
        // Median of the top component sits above 0.95 for theta this small.
        assert!(above > draws / 2, "{above} of {draws}");
    }

    #[test]
    fn pd_top_component_mean() {
        // E of the largest part under PD(1) is the Golomb-Dickman constant,
        // 0.624329988543550870993 (computed with mpmath at 60-digit
        // precision from its integral form).
        let mut r = rng(23);
        let draws = 30_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            sum += sample_pd(1.0, 512, &mut r).unwrap()[0];
        }
        let mean = sum / draws as f64;
        assert!((mean - 0.624329988543551).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn delayed_process_reduces_to_gem_at_full_density() {
        let theta = 1.7;
        let mut r1 = rng(99);
        let mut r2 = rng(99);
        let gem = sample_gem(theta, 64, &mut r1).unwrap();
        let path = sample_stick(1.0, theta, 64, &mut r2).unwrap();
        assert_eq!(gem, path.x, "same stream must give the same path");
        assert!(path.xi.iter().all(|&b| b));
    }

    #[test]
    fn first_coin_has_probability_nu() {
        let nu = 0.3;
        let mut r = rng(41);
        let draws = 20_000;
        let mut hits = 0usize;
        for _ in 0..draws {
            let p = sample_stick(nu, 1.0, 1, &mut r).unwrap();
            if p.xi[0] {
                hits += 1;
            }
        }
        let freq = hits as f64 / draws as f64;
        assert!((freq - nu).abs() < 0.013, "freq {freq}");
    }

    #[test]
    fn removed_plus_remaining_is_one() {
        let mut r = rng(3);
        for _ in 0..200 {
            let p = sample_stick(0.4, 0.8, 256, &mut r).unwrap();
            assert!(p.identity_defect() <= 1e-14);
            assert!(p.eta.windows(2).all(|w| w[1] <= w[0]));
            assert!(p.eta.iter().all(|&e| e > 0.0));
        }
    }

    #[test]
    fn first_length_law() {
        // X_1 has an atom of mass 1 - nu at zero; conditional on being
        // positive its cdf is 1 - (1-x)^theta.
        let nu = 0.6;
        let theta = 1.5;
        let mut r = rng(29);
        let draws = 20_000;
        let mut zeros = 0usize;
        let mut positives = Vec::new();
        for _ in 0..draws {
            let x1 = sample_stick(nu, theta, 1, &mut r).unwrap().x[0];
            if x1 == 0.0 {
                zeros += 1;
            } else {
                positives.push(x1);
            }
        }
        let atom = zeros as f64 / draws as f64;
        assert!((atom - (1.0 - nu)).abs() < 0.015, "atom {atom}");
        let ks = ks_against(&mut positives, |x| 1.0 - (1.0 - x).powf(theta));
        assert!(ks < 0.02, "ks {ks}");
    }

    #[test]
    fn moment_formulas_by_hand() {
        // nu = 1/2, theta_star = 1.
        assert!((stick_moments(0.5, 1.0, 1, 0).unwrap() - 0.25).abs() < 1e-15);
        // Direct integral over the first two bites: with B uniform,
        // E[X1 X2 (1 - X1/2)] = (1/8) int_0^1 b (1-b)^2 db = 1/96, matching
        // 1 * (1/4) * Gamma(2)/Gamma(5).
        assert!((stick_moments(0.5, 1.0, 1, 1).unwrap() - 1.0 / 96.0).abs() < 1e-15);
        // Degenerate reductions at theta_star = 0.
        assert!((stick_moments(0.7, 0.0, 1, 0).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(stick_moments(0.7, 0.0, 2, 3).unwrap(), 0.0);
        assert!((stick_moments(0.7, 0.0, 0, 1).unwrap() - 0.21).abs() < 1e-15);
        assert!(stick_moments(0.5, 1.0, 0, 0).is_err());
    }

    #[test]
    fn moments_match_simulation() {
        for &(nu, theta) in &[(0.3, 0.5), (0.7, 2.0)] {
            let mut r = rng(1234);
            let draws = 100_000;
            let (mut m1, mut m2, mut m3) = (0.0f64, 0.0f64, 0.0f64);
            let (mut s1, mut s2, mut s3) = (0.0f64, 0.0f64, 0.0f64);
            for _ in 0..draws {
                let p = sample_stick(nu, theta, 2, &mut r).unwrap();
                let (x1, x2) = (p.x[0], p.x[1]);
                let a = x1;
                let b = x1 * x2 * (1.0 - nu * x1);
                let c = x2 * x2 * (1.0 - nu * x1);
                m1 += a;
                m2 += b;
                m3 += c;
                s1 += a * a;
                s2 += b * b;
                s3 += c * c;
            }
            let n = draws as f64;
            let check = |sum: f64, sumsq: f64, exact: f64, tag: &str| {
                let mean = sum / n;
                let sd = ((sumsq / n - mean * mean).max(0.0) / n).sqrt();
                assert!(
                    (mean - exact).abs() < 4.0 * sd + 1e-12,
                    "{tag} at ({nu},{theta}): {mean} vs {exact} (sd {sd})"
                );
            };
            check(m1, s1, stick_moments(nu, theta, 1, 0).unwrap(), "E[X1]");
            check(m2, s2, stick_moments(nu, theta, 1, 1).unwrap(), "E[X1 X2 (1-nu X1)]");
            check(m3, s3, stick_moments(nu, theta, 0, 2).unwrap(), "E[X2^2 (1-nu X1)]");
        }
    }

    #[test]
    fn degenerate_path_shape() {
        let mut r = rng(7);
        // nu = 1: the bite is immediate, every time.
        let p = sample_stick_degenerate(1.0, 8, &mut r).unwrap();
        assert_eq!(p.x[0], 1.0);
        assert!(p.x[1..].iter().all(|&x| x == 0.0));
        assert_eq!(p.tau, vec![1]);

        // General nu: exactly one unit entry at a geometric time.
        let nu = 0.25;
        let draws = 10_000;
        let mut sum_tau = 0.0;
        for _ in 0..draws {
            let p = sample_stick_degenerate(nu, 64, &mut r).unwrap();
            let nonzero: Vec<f64> = p.x.iter().copied().filter(|&x| x != 0.0).collect();
            if p.tau[0] <= 64 {
                assert_eq!(nonzero, vec![1.0]);
                assert!(p.identity_defect() == 0.0);
            }
            sum_tau += p.tau[0] as f64;
        }
        let mean = sum_tau / draws as f64;
        // E[tau_1] = 1/nu = 4, sd of the mean about 0.035.
        assert!((mean - 4.0).abs() < 0.12, "mean {mean}");
    }

    #[test]
    fn gamma_and_normal_primitives() {
        let mut r = rng(61);
        let draws = 100_000;
        for &shape in &[0.5f64, 1.0, 3.7] {
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..draws {
                let g = sample_gamma(shape, &mut r).unwrap();
                sum += g;
                sumsq += g * g;
            }
            let n = draws as f64;
            let mean = sum / n;
            let var = sumsq / n - mean * mean;
            let mean_sd = (shape / n).sqrt();
            assert!((mean - shape).abs() < 5.0 * mean_sd, "shape {shape}: mean {mean}");
            assert!((var - shape).abs() < 0.05 * shape.max(1.0), "shape {shape}: var {var}");
        }

        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for _ in 0..draws {
            let z = sample_normal(&mut r);
            sum += z;
            sumsq += z * z;
        }
        let n = draws as f64;
        assert!((sum / n).abs() < 0.016);
        assert!((sumsq / n - 1.0).abs() < 0.02);
    }

    #[test]
    fn shifted_gamma_limit_mean() {
        // E[Z - c sqrt(X)] = -c Gamma(shape + 1/2)/Gamma(shape).
        let shape = 0.5;
        let c = 1.77383984903428384754;
        let exact = -c * (ln_gamma(1.0) - ln_gamma(0.5)).exp();
        let mut r = rng(83);
        let draws = 100_000;
        let mut sum = 0.0;
        for _ in 0..draws {
            sum += sample_shifted_gamma_limit(shape, c, &mut r).unwrap();
        }
        let mean = sum / draws as f64;
        assert!((mean - exact).abs() < 0.02, "mean {mean} vs {exact}");
    }

    #[test]
    fn domain_errors() {
        let mut r = rng(1);
        assert!(sample_gem(0.0, 4, &mut r).is_err());
        assert!(sample_stick(0.0, 1.0, 4, &mut r).is_err());
        assert!(sample_stick(1.2, 1.0, 4, &mut r).is_err());
        assert!(sample_stick(0.5, 0.0, 4, &mut r).is_err());
        assert!(sample_gamma(-1.0, &mut r).is_err());
        assert!(stick_moments(0.0, 1.0, 1, 0).is_err());
    }
}
