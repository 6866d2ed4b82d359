//! Cross-checking machinery: a brute-force oracle over cycle types for
//! small N, fixed reference models (one per regime), convergence studies of
//! exact quantities against their closed-form asymptotics, and the
//! statistical distances the test suites use (Kolmogorov-Smirnov and a
//! chi-square tail).

use serde::Serialize;

use crate::asymptotics::{classify, nu_tilde_k};
use crate::error::{Error, Result};
use crate::exact_stats::{expected_cycle_counts, expected_long_fraction};
use crate::series::{log_partition, SeriesTable};
use crate::specialfn::ln_gamma;
use crate::weights::{SeqSpec, WeightModel};

/// Largest N the brute-force enumeration accepts. Partition counts stay
/// tiny here (30 at N = 9), so everything downstream is exact to rounding.
pub const BRUTE_FORCE_CAP: usize = 9;

/// The full exact law over cycle types of a small permutation, obtained by
/// enumerating integer partitions rather than by the recurrence the rest of
/// the crate uses. Agreement between the two routes is the core soundness
/// check of the exact layer.
#[derive(Clone, Debug)]
pub struct BruteForce {
    pub n_points: usize,
    /// (cycle counts c_1..c_N, probability), over all partitions of N.
    pub types: Vec<(Vec<usize>, f64)>,
    /// log of the normalization sum, comparable to `log_partition`.
    pub log_h: f64,
}

/// Enumerate every cycle type of an N-permutation and weight it by
/// prod_j w_j^{c_j} / prod_j (j^{c_j} c_j!).
pub fn brute_force_oracle(model: &WeightModel, n: usize) -> Result<BruteForce> {
    model.validate()?;
    if n == 0 {
        return Err(Error::config("need at least one point"));
    }
    if n > BRUTE_FORCE_CAP {
        return Err(Error::size_limit(format!(
            "brute force enumerates partitions only up to N = {BRUTE_FORCE_CAP}, got {n}",
        )));
    }
    let weights: Vec<f64> = (1..=n).map(|j| model.weight(j, n)).collect();
    let mut types = Vec::new();
    let mut counts = vec![0usize; n];
    enumerate_partitions(n, n, &mut counts, &mut types, &weights);
    let h: f64 = types.iter().map(|(_, w)| w).sum();
    if h <= 0.0 {
        return Err(Error::domain("every cycle type has zero weight"));
    }
    for (_, w) in &mut types {
        *w /= h;
    }
    Ok(BruteForce { n_points: n, types, log_h: h.ln() })
}

fn enumerate_partitions(
    remaining: usize,
    max_part: usize,
    counts: &mut Vec<usize>,
    out: &mut Vec<(Vec<usize>, f64)>,
    weights: &[f64],
) {
    if remaining == 0 {
        out.push((counts.clone(), type_weight(counts, weights)));
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        counts[part - 1] += 1;
        enumerate_partitions(remaining - part, part, counts, out, weights);
        counts[part - 1] -= 1;
    }
}

/// prod_j w_j^{c_j} / (j^{c_j} c_j!), the probability weight of one type.
fn type_weight(counts: &[usize], weights: &[f64]) -> f64 {
    let mut w = 1.0f64;
    for (idx, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let j = (idx + 1) as f64;
        for i in 0..c {
            w *= weights[idx] / (j * (i as f64 + 1.0));
        }
    }
    w
}

impl BruteForce {
    /// P{T_N = k} for k = 0..=N (index k).
    pub fn t_pmf(&self) -> Vec<f64> {
        let mut pmf = vec![0.0; self.n_points + 1];
        for (counts, p) in &self.types {
            let k: usize = counts.iter().sum();
            pmf[k] += p;
        }
        pmf
    }

    /// P{L_1 = l} for l = 1..=N (index l-1): the cycle containing a marked
    /// point has length l with probability l c_l / N within a type.
    pub fn l1_pmf(&self) -> Vec<f64> {
        let mut pmf = vec![0.0; self.n_points];
        for (counts, p) in &self.types {
            for (idx, &c) in counts.iter().enumerate() {
                if c > 0 {
                    let l = idx + 1;
                    pmf[idx] += p * (l * c) as f64 / self.n_points as f64;
                }
            }
        }
        pmf
    }

    /// E[C_j] for j = 1..=j_max.
    pub fn expected_counts(&self, j_max: usize) -> Vec<f64> {
        let mut out = vec![0.0; j_max];
        for (counts, p) in &self.types {
            for (idx, &c) in counts.iter().enumerate().take(j_max) {
                out[idx] += p * c as f64;
            }
        }
        out
    }

    /// E[prod (C_j)_{n_j}] over the given (j, n_j) pairs.
    pub fn factorial_moment(&self, pairs: &[(usize, usize)]) -> f64 {
        let mut acc = 0.0;
        for (counts, p) in &self.types {
            let mut prod = 1.0f64;
            for &(j, nj) in pairs {
                let c = if j <= counts.len() { counts[j - 1] } else { 0 };
                for i in 0..nj {
                    prod *= (c as f64) - i as f64;
                }
                if prod == 0.0 {
                    break;
                }
            }
            acc += p * prod;
        }
        acc
    }

    /// P{L_1 = l_1, ..., L_m = l_m}: remove the cycle holding the smallest
    /// unseen point, length l with chance l c_l / (points left), repeat.
    pub fn joint_l_pmf(&self, lengths: &[usize]) -> f64 {
        let mut acc = 0.0;
        for (counts, p) in &self.types {
            acc += p * removal_chain(counts.clone(), self.n_points, lengths);
        }
        acc
    }
}

fn removal_chain(mut counts: Vec<usize>, points: usize, lengths: &[usize]) -> f64 {
    let mut prob = 1.0f64;
    let mut left = points;
    for &l in lengths {
        if l == 0 || l > counts.len() || counts[l - 1] == 0 || left == 0 {
            return 0.0;
        }
        prob *= (l * counts[l - 1]) as f64 / left as f64;
        counts[l - 1] -= 1;
        left -= l;
    }
    prob
}

/// theta_j = kappa_j = 1: the benchmark whose partition function is the
/// central binomial coefficient.
pub fn constant_model() -> WeightModel {
    WeightModel::new(SeqSpec::Constant { c: 1.0 }, SeqSpec::Constant { c: 1.0 })
}

/// theta = 1, kappa_j = kstar j^{-2} with kstar = 0.5/zeta(2): supercritical
/// with half the points in giant cycles.
pub fn supercritical_model() -> WeightModel {
    WeightModel::new(
        SeqSpec::Constant { c: 1.0 },
        // 0.5 / zeta(2), zeta(2) computed with mpmath at 60-digit precision.
        SeqSpec::Polylog { kstar: 0.30396355092701331, s: 2.0 },
    )
}

/// theta_j = j^{-1/2}, kappa_j = kstar j^{-2} (the polylog index is the
/// singularity exponent 1.5 plus the perturbation 0.5): supercritical with
/// nu = 1/2, and theta_star = 0 with integer-resistant corrections, so the
/// partition growth law is out of closed-form reach while sampling and the
/// ordered-cycle limits still apply.
pub fn giant_cycle_model() -> WeightModel {
    WeightModel::new(
        SeqSpec::Power { c: 1.0, gamma0: 0.5 },
        SeqSpec::Polylog { kstar: 0.30396355092701331, s: 2.0 },
    )
}

/// theta = 1, kappa_j = j^{-2.5}/zeta(2.5): exactly critical, with the
/// shifted-gamma limit for the total cycle count.
pub fn critical_model() -> WeightModel {
    WeightModel::new(
        SeqSpec::Constant { c: 1.0 },
        // 1 / zeta(2.5), zeta(2.5) computed with mpmath at 60-digit
        // precision: 1.34148725725091717976.
        SeqSpec::Polylog { kstar: 1.0 / 1.34148725725091717976, s: 2.5 },
    )
}

/// Which exact quantity a convergence study compares to its limit law.
#[derive(Clone, Copy, Debug)]
pub enum StudyQuantity {
    /// log H_N against the regime's growth law.
    LogPartition,
    /// E[C_j]/N against kappa_j r_*^j / j.
    CycleFraction { j: usize },
    /// E[fraction beyond length k] against the partial giant fraction.
    LongFraction { k: usize },
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub exact: f64,
    pub asymptotic: f64,
    /// Multiplicative gap: exp(asymptotic - exact) for log quantities,
    /// plain quotient otherwise. Approaches 1 as n grows.
    pub ratio: f64,
}

/// Evaluate an exact quantity against its closed-form limit across a grid
/// of sizes.
pub fn convergence_study(
    model: &WeightModel,
    quantity: StudyQuantity,
    n_grid: &[usize],
) -> Result<Vec<ConvergencePoint>> {
    let report = classify(model)?;
    let mut out = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let point = match quantity {
            StudyQuantity::LogPartition => {
                let exact = log_partition(model, n)?;
                let asym = report.hn_law.evaluate(n)?;
                ConvergencePoint { n, exact, asymptotic: asym, ratio: (asym - exact).exp() }
            }
            StudyQuantity::CycleFraction { j } => {
                let table = SeriesTable::build(model, n, n)?;
                let exact = expected_cycle_counts(&table, j)?[j - 1] / n as f64;
                let asym = model.kappa_j(j) * report.r_star.powi(j as i32) / j as f64;
                ConvergencePoint { n, exact, asymptotic: asym, ratio: exact / asym }
            }
            StudyQuantity::LongFraction { k } => {
                let table = SeriesTable::build(model, n, n)?;
                let exact = expected_long_fraction(&table, k)?;
                let asym = nu_tilde_k(model, k)?;
                ConvergencePoint { n, exact, asymptotic: asym, ratio: exact / asym }
            }
        };
        out.push(point);
    }
    Ok(out)
}

/// True when |ln ratio| is nonincreasing over the last `window` points,
/// with one slack of `tol` allowed (rounding near an exact limit).
pub fn ratios_settle(points: &[ConvergencePoint], window: usize, tol: f64) -> bool {
    let tail: Vec<f64> = points
        .iter()
        .rev()
        .take(window)
        .map(|p| p.ratio.ln().abs())
        .collect();
    let mut violations = 0;
    for w in tail.windows(2) {
        // tail is reversed: w[1] is the earlier point.
        if w[0] > w[1] + tol {
            violations += 1;
        }
    }
    violations <= 1 && points.iter().all(|p| p.ratio.is_finite() && p.ratio > 0.0)
}

/// One-sample Kolmogorov-Smirnov distance against a cdf. Sorts a copy.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        worst = worst.max((f - i as f64 / n).abs());
        worst = worst.max(((i + 1) as f64 / n - f).abs());
    }
    worst
}

/// Two-sample Kolmogorov-Smirnov distance. Sorts copies.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.total_cmp(q));
    xb.sort_by(|p, q| p.total_cmp(q));
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut worst = 0.0f64;
    while i < xa.len() && j < xb.len() {
        let t = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= t {
            i += 1;
        }
        while j < xb.len() && xb[j] <= t {
            j += 1;
        }
        worst = worst.max((i as f64 / na - j as f64 / nb).abs());
    }
    worst
}

/// Survival function of the chi-square law with `dof` degrees of freedom:
/// the regularized upper incomplete gamma Q(dof/2, x/2), evaluated by the
/// standard series / continued-fraction split.
pub fn chi_square_sf(x: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Err(Error::config("need at least one degree of freedom"));
    }
    if !(x >= 0.0) {
        return Err(Error::domain("chi-square statistic must be nonnegative"));
    }
    Ok(upper_gamma_regularized(dof as f64 / 2.0, x / 2.0))
}

/// Standard normal cdf, via the chi-square one-degree tail: for x > 0,
/// P(Z > x) = Q(1/2, x^2/2) / 2 because Z^2 is chi-square with one degree.
pub fn normal_cdf(x: f64) -> f64 {
    let tail = 0.5 * upper_gamma_regularized(0.5, 0.5 * x * x);
    if x < 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

fn upper_gamma_regularized(a: f64, x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let log_scale = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // Lower series P(a,x) = x^a e^{-x}/Gamma(a) sum_n x^n / (a)_{n+1}.
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut n = 1.0f64;
        while term.abs() > sum.abs() * 1e-17 {
            term *= x / (a + n);
            sum += term;
            n += 1.0;
            if n > 10_000.0 {
                break;
            }
        }
        1.0 - sum * log_scale.exp()
    } else {
        // Continued fraction for Q(a,x), modified Lentz iteration.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut i = 1.0f64;
        loop {
            let an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 || i > 10_000.0 {
                break;
            }
            i += 1.0;
        }
        h * log_scale.exp()
    }
}

/// One comparison between an exact value and an independent oracle.
#[derive(Clone, Debug, Serialize)]
pub struct OracleResult {
    pub quantity: String,
    pub exact: f64,
    pub oracle: f64,
    pub rel_err: f64,
    pub tol: f64,
    pub pass: bool,
}

impl OracleResult {
    fn compare(quantity: impl Into<String>, exact: f64, oracle: f64, tol: f64) -> Self {
        let scale = oracle.abs().max(1e-300);
        let rel_err = ((exact - oracle) / scale).abs();
        OracleResult { quantity: quantity.into(), exact, oracle, rel_err, tol, pass: rel_err <= tol }
    }

    /// For checks whose quantity is itself a worst-case deviation: the
    /// reference value is zero, so the comparison is absolute.
    fn max_abs_dev(quantity: impl Into<String>, worst: f64, tol: f64) -> Self {
        OracleResult {
            quantity: quantity.into(),
            exact: worst,
            oracle: 0.0,
            rel_err: worst,
            tol,
            pass: worst <= tol,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Brute-force agreement at small N plus closed-form spot checks.
    Quick,
    /// Quick plus convergence studies across all reference models.
    Full,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub suite: String,
    pub results: Vec<OracleResult>,
    pub all_pass: bool,
}

/// Run the cross-check suite over the reference models.
pub fn run_suite(suite: Suite) -> Result<ValidationReport> {
    let mut results = Vec::new();
    let models: [(&str, WeightModel); 3] = [
        ("constant", constant_model()),
        ("supercritical", supercritical_model()),
        ("giant-cycle", giant_cycle_model()),
    ];
    let n_max = if suite == Suite::Full { BRUTE_FORCE_CAP } else { 7 };

    for (tag, model) in &models {
        for n in 1..=n_max {
            let oracle = brute_force_oracle(model, n)?;
            let table = SeriesTable::build(model, n, n)?;

            results.push(OracleResult::compare(
                format!("{tag}: log H at N={n}"),
                table.log_partition()?,
                oracle.log_h,
                1e-10,
            ));

            let pmf = crate::series::tn_distribution(&table)?;
            let brute_pmf = oracle.t_pmf();
            let worst = pmf
                .pmf()
                .iter()
                .zip(brute_pmf.iter().skip(1))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            results.push(OracleResult::max_abs_dev(
                format!("{tag}: cycle-count pmf at N={n}"),
                worst,
                1e-10,
            ));

            let l1 = crate::exact_stats::l1_pmf(&table)?;
            let brute_l1 = oracle.l1_pmf();
            let worst = l1
                .iter()
                .zip(brute_l1.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            results.push(OracleResult::max_abs_dev(
                format!("{tag}: marked-cycle law at N={n}"),
                worst,
                1e-10,
            ));

            let counts = expected_cycle_counts(&table, n)?;
            let brute_counts = oracle.expected_counts(n);
            let worst = counts
                .iter()
                .zip(brute_counts.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            results.push(OracleResult::max_abs_dev(
                format!("{tag}: expected counts at N={n}"),
                worst,
                1e-10,
            ));
        }
    }

    if suite == Suite::Full {
        let grid = [32usize, 64, 128, 256, 512];
        let study = convergence_study(&constant_model(), StudyQuantity::LogPartition, &grid)?;
        let last = study.last().expect("nonempty grid");
        results.push(OracleResult::compare(
            "constant: growth-law ratio at N=512",
            last.ratio,
            1.0,
            0.02,
        ));
        let settle = ratios_settle(&study, 3, 1e-9);
        results.push(OracleResult::compare(
            "constant: growth-law ratios settle",
            if settle { 1.0 } else { 0.0 },
            1.0,
            0.0,
        ));

        for (tag, model) in [
            ("supercritical", supercritical_model()),
            ("giant-cycle", giant_cycle_model()),
        ] {
            let study = convergence_study(
                &model,
                StudyQuantity::LongFraction { k: 4 },
                &[64, 256, 1024],
            )?;
            let last = study.last().expect("nonempty grid");
            results.push(OracleResult::compare(
                format!("{tag}: long fraction vs partial giant fraction at N=1024"),
                last.ratio,
                1.0,
                0.05,
            ));
        }
    }

    let all_pass = results.iter().all(|r| r.pass);
    Ok(ValidationReport {
        suite: match suite {
            Suite::Quick => "quick".into(),
            Suite::Full => "full".into(),
        },
        results,
        all_pass,
    })
}
