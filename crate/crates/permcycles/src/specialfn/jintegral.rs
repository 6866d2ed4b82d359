//! The entire function
//!
//!   J_xi(sigma) = integral over a keyhole contour of (-w)^(-sigma)
//!                 exp(-xi w + w^2) dw,
//!
//! which shows up as the limit-shape kernel of the partition sums in the
//! critical window, together with its stable-order generalization at xi = 0
//! and the moment generating function of sqrt of a Gamma variable.
//!
//! Two independent routes are kept:
//!
//! * `j_integral` sums a pair of hypergeometric-style chains; the reciprocal
//!   Gamma prefactors make it safe at the poles, where one chain silently
//!   drops out.
//! * `j_integral_quadrature` evaluates the contour integral directly with
//!   adaptive Simpson on the three legs, for any opening angle
//!   phi in (pi/4, pi/2) and arc radius eps > 0. The value must not depend
//!   on either parameter, which is itself a useful self-test.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

use super::gamma::{gamma, recip_gamma};

/// J_xi(sigma) by series. Exact identities:
/// J_0(1) = i*pi, J_0(-1) = 0, J_xi(0) = i*sqrt(pi)*exp(-xi^2/4),
/// and in general J_0(sigma) = i*pi / Gamma((sigma+1)/2).
pub fn j_integral(xi: f64, sigma: f64) -> Complex64 {
    // Even chain: sum_k (sigma/2)_k xi^(2k) / (2k)!
    let mut even_sum = 0.0f64;
    let mut term = 1.0f64;
    for k in 0..400 {
        even_sum += term;
        let kf = k as f64;
        term *= (sigma / 2.0 + kf) * xi * xi / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
        if term.abs() < 1e-18 * even_sum.abs().max(1.0) && k >= 8 {
            break;
        }
    }
    // Odd chain: sum_k ((sigma+1)/2)_k xi^(2k+1) / (2k+1)!
    let mut odd_sum = 0.0f64;
    let mut term = xi;
    for k in 0..400 {
        odd_sum += term;
        let kf = k as f64;
        term *= ((sigma + 1.0) / 2.0 + kf) * xi * xi / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        if term.abs() < 1e-18 * odd_sum.abs().max(1.0) && k >= 8 {
            break;
        }
    }
    let value = PI
        * (-xi * xi / 4.0).exp()
        * (recip_gamma((sigma + 1.0) / 2.0) * even_sum + recip_gamma(sigma / 2.0) * odd_sum);
    Complex64::new(0.0, value)
}

/// Stable-order variant at xi = 0: 2*pi*i / (s * Gamma((s - 1 + sigma)/s)).
/// At s = 2 it reduces to J_0(sigma).
pub fn j_tilde_zero(sigma: f64, s: f64) -> Result<Complex64> {
    if !(1.0 < s && s <= 2.0) {
        return Err(Error::domain("j_tilde_zero needs s in (1, 2]"));
    }
    let value = 2.0 * PI / s * recip_gamma((s - 1.0 + sigma) / s);
    Ok(Complex64::new(0.0, value))
}

/// E[exp(xi * sqrt(X))] for X ~ Gamma(theta_star / 2, scale 1).
///
/// Same two chains as `j_integral` with a = theta_star/2 in place of
/// sigma/2, normalized so the value at xi = 0 is 1.
pub fn gamma_sqrt_mgf(theta_star: f64, xi: f64) -> Result<f64> {
    if theta_star <= 0.0 {
        return Err(Error::domain("gamma_sqrt_mgf needs theta_star > 0"));
    }
    let a = theta_star / 2.0;
    let mut even_sum = 0.0f64;
    let mut term = 1.0f64;
    for k in 0..500 {
        even_sum += term;
        let kf = k as f64;
        term *= (a + kf) * xi * xi / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
        if term.abs() < 1e-18 * even_sum.abs().max(1.0) && k >= 8 {
            break;
        }
    }
    let mut odd_sum = 0.0f64;
    let mut term = xi;
    for k in 0..500 {
        odd_sum += term;
        let kf = k as f64;
        term *= (a + 0.5 + kf) * xi * xi / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        if term.abs() < 1e-18 * odd_sum.abs().max(1.0) && k >= 8 {
            break;
        }
    }
    Ok(even_sum + gamma(a + 0.5) / gamma(a) * odd_sum)
}

/// Direct contour evaluation, used as an oracle against `j_integral`.
///
/// The contour comes in from infinity along arg w = -phi, circles the
/// origin clockwise through w = -eps (so the branch cut along the positive
/// real axis is never crossed), and returns to infinity along arg w = +phi.
/// (-w)^(-sigma) is taken on the principal branch, anchored at w = -eps
/// where -w is real and positive.
pub fn j_integral_quadrature(xi: f64, sigma: f64, phi: f64, eps: f64) -> Result<Complex64> {
    if !(PI / 4.0 < phi && phi < PI / 2.0) {
        return Err(Error::domain("opening angle must lie in (pi/4, pi/2)"));
    }
    if !(0.0 < eps && eps < 1.0) {
        return Err(Error::domain("arc radius must lie in (0, 1)"));
    }
    // Beyond u_max the integrand is below ~1e-20 thanks to
    // Re(w^2) = u^2 cos(2 phi) < 0 on both rays.
    let decay = -(2.0 * phi).cos();
    let u_max = ((50.0 + xi.abs() * 10.0) / decay).sqrt() + xi.abs() / decay + 5.0;
    let tol = 1e-12;

    let i = Complex64::i();

    // Incoming ray w = u e^{-i phi}, u from infinity down to eps:
    // dw = e^{-i phi} du against the direction of increasing u.
    let e_in = (-i * phi).exp();
    let leg_in = -e_in
        * adaptive_simpson(
            &|u: f64| {
                let w = u * e_in;
                u.powf(-sigma) * (-i * sigma * (PI - phi)).exp() * (-xi * w + w * w).exp()
            },
            eps,
            u_max,
            tol,
        );

    // Clockwise arc w = eps e^{-i t}, t from phi to 2 pi - phi:
    // dw = -i eps e^{-i t} dt, and arg(-w) = pi - t stays principal,
    // passing through 0 at the anchor t = pi.
    let arc = adaptive_simpson(
        &|t: f64| {
            let w = eps * (-i * t).exp();
            let swirl = (-i * sigma * (PI - t)).exp();
            eps.powf(-sigma) * swirl * (-xi * w + w * w).exp() * (-i * eps * (-i * t).exp())
        },
        phi,
        2.0 * PI - phi,
        tol,
    );

    // Outgoing ray w = y e^{+i phi}, y from eps to infinity, arg(-w) = phi - pi.
    let e_out = (i * phi).exp();
    let leg_out = e_out
        * adaptive_simpson(
            &|y: f64| {
                let w = y * e_out;
                y.powf(-sigma) * (-i * sigma * (phi - PI)).exp() * (-xi * w + w * w).exp()
            },
            eps,
            u_max,
            tol,
        );

    Ok(leg_in + arc + leg_out)
}

fn simpson_slice<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    fa: Complex64,
    b: f64,
    fb: Complex64,
) -> (Complex64, f64, Complex64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    ((fa + 4.0 * fm + fb) * ((b - a) / 6.0), m, fm)
}

fn simpson_recurse<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    fa: Complex64,
    b: f64,
    fb: Complex64,
    whole: Complex64,
    m: f64,
    fm: Complex64,
    tol: f64,
    depth: u32,
) -> Complex64 {
    let (left, lm, flm) = simpson_slice(f, a, fa, m, fm);
    let (right, rm, frm) = simpson_slice(f, m, fm, b, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.norm() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
        + simpson_recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature for a complex-valued integrand on [a, b].
fn adaptive_simpson<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64, tol: f64) -> Complex64 {
    // Seed with a few panels so sign-symmetric oscillation cannot fool the
    // first error estimate.
    let panels = 8;
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for p in 0..panels {
        let x0 = a + p as f64 * h;
        let x1 = x0 + h;
        let f0 = f(x0);
        let f1 = f(x1);
        let (whole, m, fm) = simpson_slice(f, x0, f0, x1, f1);
        total += simpson_recurse(f, x0, f0, x1, f1, whole, m, fm, tol / panels as f64, 40);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    // Im J_xi(sigma) computed with mpmath at 60-digit precision.
    const CASES: &[(f64, f64, f64)] = &[
        (2.0, 0.5, 2.79127877514883799929),
        (-2.0, 2.7, 0.214097203708221302071),
        (2.0, -1.5, -0.230965721960798669196),
        (0.0, 2.7, 3.32228798894853051418),
        (-2.0, 0.5, 0.582461294093748469990),
        (2.0, 2.7, 17.2364223070692736462),
        (-2.0, -1.5, 0.537358257630598895937),
        (0.0, -1.5, -0.640923338010211893237),
        (0.0, 0.5, 2.56369335204084757295),
    ];

    #[test]
    fn matches_reference_values() {
        for &(xi, sigma, want) in CASES {
            let got = j_integral(xi, sigma);
            assert!(got.re.abs() < 1e-15);
            assert!(
                (got.im - want).abs() < 1e-10 * want.abs().max(1.0),
                "J_{xi}({sigma}) = {}, want {want}",
                got.im
            );
        }
    }

    #[test]
    fn exact_identities() {
        let j01 = j_integral(0.0, 1.0);
        assert!((j01.im - PI).abs() < 1e-12 && j01.re.abs() < 1e-15);
        let jm1 = j_integral(0.0, -1.0);
        assert!(jm1.norm() < 1e-14);
        for xi in [-2.0, -0.3, 0.0, 1.0, 2.5] {
            let j = j_integral(xi, 0.0);
            let want = PI.sqrt() * (-xi * xi / 4.0).exp();
            assert!((j.im - want).abs() < 1e-13, "xi = {xi}");
        }
        for sigma in [-1.5, -0.5, 0.7, 2.0, 3.2] {
            let j = j_integral(0.0, sigma);
            let want = PI * recip_gamma((sigma + 1.0) / 2.0);
            assert!((j.im - want).abs() < 1e-13, "sigma = {sigma}");
        }
    }

    #[test]
    fn functional_equation() {
        // 2 J_xi(sigma) = (sigma + 1) J_xi(sigma + 2) - xi J_xi(sigma + 1)
        for xi in [-2.0, 0.0, 0.7, 2.0] {
            for sigma in [-1.5, -0.3, 0.5, 1.0, 2.7] {
                let lhs = 2.0 * j_integral(xi, sigma);
                let rhs =
                    (sigma + 1.0) * j_integral(xi, sigma + 2.0) - xi * j_integral(xi, sigma + 1.0);
                assert!(
                    (lhs - rhs).norm() < 1e-11 * lhs.norm().max(1.0),
                    "xi = {xi}, sigma = {sigma}"
                );
            }
        }
    }

    #[test]
    fn quadrature_agrees_with_series() {
        for &xi in &[-2.0, 0.0, 2.0] {
            for &sigma in &[-1.5, 0.5, 1.0, 2.7] {
                let series = j_integral(xi, sigma);
                let quad = j_integral_quadrature(xi, sigma, 1.1, 0.5).unwrap();
                assert!(
                    (series - quad).norm() < 1e-8 * series.norm().max(1.0),
                    "xi = {xi}, sigma = {sigma}: {series} vs {quad}"
                );
            }
        }
    }

    #[test]
    fn quadrature_contour_invariance() {
        let base = j_integral_quadrature(1.0, 0.7, 1.0, 0.5).unwrap();
        for (phi, eps) in [(0.9, 0.5), (1.3, 0.5), (1.0, 0.25), (1.2, 0.7)] {
            let other = j_integral_quadrature(1.0, 0.7, phi, eps).unwrap();
            assert!(
                (base - other).norm() < 1e-9 * base.norm(),
                "phi = {phi}, eps = {eps}"
            );
        }
    }

    #[test]
    fn stable_variant_reduces_at_two() {
        for sigma in [-1.5, -0.5, 0.5, 1.0, 2.7] {
            let a = j_tilde_zero(sigma, 2.0).unwrap();
            let b = j_integral(0.0, sigma);
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        }
        assert!(j_tilde_zero(0.5, 2.5).is_err());
    }

    #[test]
    fn mgf_reference_values() {
        // E[exp(xi sqrt(X))], X ~ Gamma(theta/2); mpmath, 60 digits.
        let cases = [
            (1.0, 0.7, 1.55914190902843298106),
            (2.0, -1.2, 0.396155405263495445334),
            (0.5, 2.0, 2.95959045437725013225),
        ];
        for (theta, xi, want) in cases {
            let got = gamma_sqrt_mgf(theta, xi).unwrap();
            assert!(
                ((got - want) / want).abs() < 1e-12,
                "theta = {theta}, xi = {xi}: {got} vs {want}"
            );
        }
        assert!((gamma_sqrt_mgf(1.7, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(gamma_sqrt_mgf(0.0, 1.0).is_err());
    }
}
