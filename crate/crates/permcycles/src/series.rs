//! Exact computation of the partition-function table.
//!
//! For a permutation size N, define h_0 = 1 and
//!
//!   n h_n = sum_{j=1}^{n} w_j h_{n-j},      w_j = theta_j + N kappa_j.
//!
//! Then h_n is the coefficient of z^n in exp(g_theta(z) + N g_kappa(z)), and
//! h_N is the partition function H_N of the permutation measure. The values
//! span thousands of e-folds, so the table stores log h_n; internally the
//! recurrence runs on linear-space mantissas under a single running shift,
//! which keeps the hot loop free of transcendental calls.

use crate::error::{Error, Result};
use crate::weights::WeightModel;

/// Exact log-space table of h_0..h_n_max for a fixed permutation size.
///
/// Immutable once built; all accessors are pure.
#[derive(Clone, Debug)]
pub struct SeriesTable {
    n_points: usize,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
    log_h: Vec<f64>,
}

/// Mantissas outside this band trigger a renormalization of the running
/// shift. The band is narrow enough that sums of up to ~1e6 terms with
/// weights up to ~1e12 stay far from f64 overflow.
const MANTISSA_BAND: f64 = 1e150;

impl SeriesTable {
    /// Build the table for `h_0(n_points) .. h_{n_max}(n_points)`.
    ///
    /// Cost is O(n_max^2) multiply-adds. Zero weights are skipped, so models
    /// with sparse tables pay only for their support.
    pub fn build(model: &WeightModel, n_points: usize, n_max: usize) -> Result<SeriesTable> {
        model.validate()?;
        if n_points == 0 {
            return Err(Error::config("n_points must be at least 1"));
        }
        let weights: Vec<f64> = (1..=n_max).map(|j| model.weight(j, n_points)).collect();
        let log_weights: Vec<f64> = weights.iter().map(|w| w.ln()).collect();

        // support[i] is the index of the i-th positive weight; the inner
        // convolution walks only these.
        let support: Vec<usize> = (0..n_max).filter(|&i| weights[i] > 0.0).collect();

        let mut mantissa = vec![0.0f64; n_max + 1];
        let mut log_h = vec![f64::NEG_INFINITY; n_max + 1];
        mantissa[0] = 1.0;
        log_h[0] = 0.0;
        let mut shift = 0.0f64;

        for n in 1..=n_max {
            let mut sum = 0.0f64;
            for &i in &support {
                let j = i + 1;
                if j > n {
                    break;
                }
                sum += weights[i] * mantissa[n - j];
            }
            let mut m = sum / n as f64;
            if m == 0.0 {
                // Either genuinely zero (no composition of the support hits
                // n) or every contribution underflowed. Recompute once in
                // log space to tell the two apart.
                let log_m = log_conv(&log_weights, &log_h, &support, n);
                if log_m > f64::NEG_INFINITY {
                    log_h[n] = log_m;
                    // Re-center the window on this value so the recurrence
                    // can continue in linear space.
                    shift = log_m;
                    for k in 0..=n {
                        mantissa[k] = (log_h[k] - shift).exp();
                    }
                    continue;
                }
                log_h[n] = f64::NEG_INFINITY;
                mantissa[n] = 0.0;
                continue;
            }
            if !m.is_finite() {
                return Err(Error::domain(
                    "partition recurrence overflowed; weights span too many orders of magnitude",
                ));
            }
            log_h[n] = m.ln() + shift;
            if m > MANTISSA_BAND || m < 1.0 / MANTISSA_BAND {
                // Renormalize so the newest mantissa is exactly 1. Entries
                // that fall off the far end of the window underflow to zero;
                // they are hundreds of e-folds below the current scale and
                // no longer influence the sums they enter.
                let factor = 1.0 / m;
                for mk in mantissa.iter_mut().take(n) {
                    *mk *= factor;
                }
                shift = log_h[n];
                m = 1.0;
            }
            mantissa[n] = m;
        }

        Ok(SeriesTable { n_points, weights, log_weights, log_h })
    }

    /// The permutation size N the weights were evaluated at.
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Largest index n with h_n in the table.
    pub fn n_max(&self) -> usize {
        self.log_h.len() - 1
    }

    /// log h_n; negative infinity when h_n = 0.
    pub fn log_h(&self, n: usize) -> f64 {
        self.log_h[n]
    }

    /// w_j = theta_j + N kappa_j for j = 1..=n_max.
    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j - 1]
    }

    pub fn log_weight(&self, j: usize) -> f64 {
        self.log_weights[j - 1]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// log H_N = log h_N. The table must extend at least to n = N.
    pub fn log_partition(&self) -> Result<f64> {
        if self.n_max() < self.n_points {
            return Err(Error::config(
                "table too short: build with n_max >= n_points to reach the partition function",
            ));
        }
        Ok(self.log_h[self.n_points])
    }

    /// Conditional distribution of the length of the next cycle removed when
    /// n of the N points are still unassigned:
    ///
    ///   q_n(j) = w_j h_{n-j} / (n h_n),   j = 1..=n.
    ///
    /// Sums to 1 exactly in exact arithmetic; the defect in floating point
    /// is a sharp health check on the whole table.
    pub fn step_pmf(&self, n: usize) -> Result<Vec<f64>> {
        if n == 0 || n > self.n_max() {
            return Err(Error::config("step_pmf needs 1 <= n <= n_max"));
        }
        if self.log_h[n] == f64::NEG_INFINITY {
            return Err(Error::domain(
                "conditioning on a size with zero partition weight",
            ));
        }
        let mut q = vec![0.0f64; n];
        for j in 1..=n {
            if self.weights[j - 1] > 0.0 && self.log_h[n - j] > f64::NEG_INFINITY {
                q[j - 1] = self.weights[j - 1] / n as f64
                    * (self.log_h[n - j] - self.log_h[n]).exp();
            }
        }
        Ok(q)
    }

    /// |sum_j q_n(j) - 1| for the step distribution at n.
    pub fn step_mass_defect(&self, n: usize) -> Result<f64> {
        Ok((self.step_pmf(n)?.iter().sum::<f64>() - 1.0).abs())
    }
}

/// One row of the recurrence evaluated by log-sum-exp; the slow path.
fn log_conv(log_w: &[f64], log_h: &[f64], support: &[usize], n: usize) -> f64 {
    let mut top = f64::NEG_INFINITY;
    for &i in support {
        let j = i + 1;
        if j > n {
            break;
        }
        let t = log_w[i] + log_h[n - j];
        if t > top {
            top = t;
        }
    }
    if top == f64::NEG_INFINITY {
        return top;
    }
    let mut acc = 0.0f64;
    for &i in support {
        let j = i + 1;
        if j > n {
            break;
        }
        acc += (log_w[i] + log_h[n - j] - top).exp();
    }
    top + acc.ln() - (n as f64).ln()
}

/// log H_N for the model at permutation size n: builds the minimal table.
pub fn log_partition(model: &WeightModel, n: usize) -> Result<f64> {
    SeriesTable::build(model, n, n)?.log_partition()
}

/// Exact distribution of the total number of cycles T_N.
#[derive(Clone, Debug)]
pub struct TnDistribution {
    n_points: usize,
    pmf: Vec<f64>,
}

impl TnDistribution {
    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// P(T_N = k) for k = 1..=N; index 0 holds k = 1.
    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn prob(&self, k: usize) -> f64 {
        if k >= 1 && k <= self.n_points {
            self.pmf[k - 1]
        } else {
            0.0
        }
    }

    /// log P(T_N = k), negative infinity on underflow or off support.
    pub fn log_prob(&self, k: usize) -> f64 {
        self.prob(k).ln()
    }

    pub fn mean(&self) -> f64 {
        self.pmf
            .iter()
            .enumerate()
            .map(|(i, p)| (i + 1) as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.pmf
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let d = (i + 1) as f64 - m;
                d * d * p
            })
            .sum()
    }
}

/// Default size cap for the exact T_N distribution; the recursion costs
/// O(N^3) time, which crosses from milliseconds to minutes near 10^3.
pub const TN_EXACT_CAP: usize = 512;

/// Exact pmf of T_N by the conditioned two-index recursion
///
///   d_{n,k} = sum_j q_n(j) d_{n-j,k-1},   d_{0,0} = 1,
///
/// where d_{n,k} = P(T_n = k) for the size-n restriction of the same weight
/// table. Every quantity lives in [0, 1]; no rescaling is ever needed.
pub fn tn_distribution(table: &SeriesTable) -> Result<TnDistribution> {
    tn_distribution_with_cap(table, TN_EXACT_CAP)
}

pub fn tn_distribution_with_cap(table: &SeriesTable, cap: usize) -> Result<TnDistribution> {
    let n_pts = table.n_points();
    if table.n_max() < n_pts {
        return Err(Error::config("table too short for the T_N distribution"));
    }
    if n_pts > cap {
        return Err(Error::size_limit(format!(
            "exact T_N distribution is O(N^3); N = {n_pts} exceeds the cap {cap}. \
             Raise the cap explicitly or estimate the distribution by sampling.",
        )));
    }
    if table.log_h(n_pts) == f64::NEG_INFINITY {
        return Err(Error::domain(
            "partition function vanishes: no permutation carries positive weight",
        ));
    }

    // rows[n][k] = P(T_n = k), k = 0..=n. Rows with h_n = 0 stay zero.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n_pts + 1);
    rows.push(vec![1.0]);
    for n in 1..=n_pts {
        let mut row = vec![0.0f64; n + 1];
        if table.log_h(n) > f64::NEG_INFINITY {
            let q = table.step_pmf(n)?;
            for j in 1..=n {
                let qj = q[j - 1];
                if qj == 0.0 {
                    continue;
                }
                let prev = &rows[n - j];
                for (k, pk) in prev.iter().enumerate() {
                    if *pk > 0.0 {
                        row[k + 1] += qj * pk;
                    }
                }
            }
        }
        rows.push(row);
    }

    let last = rows.pop().expect("at least one row");
    Ok(TnDistribution { n_points: n_pts, pmf: last[1..].to_vec() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::SeqSpec;

    fn constant_model() -> WeightModel {
        WeightModel::new(SeqSpec::Constant { c: 1.0 }, SeqSpec::Constant { c: 1.0 })
    }

    #[test]
    fn tiny_tables_by_hand() {
        // N = 2, w_j = 1 + 2 = 3: h = (1, 3, 6).
        let t = SeriesTable::build(&constant_model(), 2, 2).unwrap();
        assert!((t.log_h(1) - 3.0f64.ln()).abs() < 1e-14);
        assert!((t.log_h(2) - 6.0f64.ln()).abs() < 1e-14);
        assert!((t.log_partition().unwrap() - 6.0f64.ln()).abs() < 1e-14);

        // N = 3, w_j = 4: h = (1, 4, 10, 20).
        let t = SeriesTable::build(&constant_model(), 3, 3).unwrap();
        for (n, want) in [(1usize, 4.0f64), (2, 10.0), (3, 20.0)] {
            assert!((t.log_h(n) - want.ln()).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn tn_pmf_by_hand() {
        let t2 = SeriesTable::build(&constant_model(), 2, 2).unwrap();
        let d2 = tn_distribution(&t2).unwrap();
        assert!((d2.prob(1) - 0.25).abs() < 1e-15);
        assert!((d2.prob(2) - 0.75).abs() < 1e-15);

        let t3 = SeriesTable::build(&constant_model(), 3, 3).unwrap();
        let d3 = tn_distribution(&t3).unwrap();
        assert!((d3.prob(1) - 1.0 / 15.0).abs() < 1e-15);
        assert!((d3.prob(2) - 6.0 / 15.0).abs() < 1e-15);
        assert!((d3.prob(3) - 8.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_free_weights() {
        // Only 2-cycles carry weight: h_odd = 0 and the cycle count is
        // pinned at N/2.
        let model = WeightModel::new(
            SeqSpec::Table { values: vec![0.0, 1.0] },
            SeqSpec::Table { values: vec![] },
        );
        let t = SeriesTable::build(&model, 4, 4).unwrap();
        assert_eq!(t.log_h(1), f64::NEG_INFINITY);
        assert_eq!(t.log_h(3), f64::NEG_INFINITY);
        assert!((t.log_h(2) - 0.5f64.ln()).abs() < 1e-14);
        assert!((t.log_h(4) - 0.125f64.ln()).abs() < 1e-14);
        let d = tn_distribution(&t).unwrap();
        assert!((d.prob(2) - 1.0).abs() < 1e-14);
        assert_eq!(d.prob(1), 0.0);
        assert_eq!(d.prob(3), 0.0);
    }

    #[test]
    fn identity_only_model() {
        // w_1 = 1 and nothing else: H_N = 1/N! and T_N = N surely.
        let model = WeightModel::new(
            SeqSpec::Table { values: vec![1.0] },
            SeqSpec::Table { values: vec![] },
        );
        let t = SeriesTable::build(&model, 8, 8).unwrap();
        let want = -(2..=8).map(|k| (k as f64).ln()).sum::<f64>();
        assert!((t.log_partition().unwrap() - want).abs() < 1e-12);
        let d = tn_distribution(&t).unwrap();
        assert!((d.prob(8) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn binomial_identity_with_rescaling() {
        // For theta = kappa = 1 the partition function is the central
        // binomial coefficient; N = 600 takes the mantissas through several
        // renormalizations.
        use crate::specialfn::ln_gamma;
        let n = 600usize;
        let got = log_partition(&constant_model(), n).unwrap();
        let want = ln_gamma(2.0 * n as f64 + 1.0) - 2.0 * ln_gamma(n as f64 + 1.0);
        assert!(
            ((got - want) / want).abs() < 1e-12,
            "log H_600 = {got}, want {want}"
        );
    }

    #[test]
    fn recurrence_identity_in_log_space() {
        let model = WeightModel::new(
            SeqSpec::Power { c: 0.7, gamma0: 0.4 },
            SeqSpec::Polylog { kstar: 0.9, s: 2.2 },
        );
        let t = SeriesTable::build(&model, 50, 50).unwrap();
        for n in 1..=50usize {
            let mut top = f64::NEG_INFINITY;
            for j in 1..=n {
                top = top.max(t.log_weight(j) + t.log_h(n - j));
            }
            let sum: f64 = (1..=n)
                .map(|j| (t.log_weight(j) + t.log_h(n - j) - top).exp())
                .sum();
            let lhs = (n as f64).ln() + t.log_h(n);
            let rhs = top + sum.ln();
            assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "n = {n}");
        }
    }

    #[test]
    fn step_pmf_sums_to_one() {
        let t = SeriesTable::build(&constant_model(), 40, 40).unwrap();
        for n in 1..=40 {
            assert!(t.step_mass_defect(n).unwrap() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn tn_pmf_normalized_and_supported() {
        let model = WeightModel::new(
            SeqSpec::Power { c: 0.5, gamma0: 0.5 },
            SeqSpec::Polylog { kstar: 0.3, s: 2.0 },
        );
        let t = SeriesTable::build(&model, 64, 64).unwrap();
        let d = tn_distribution(&t).unwrap();
        let total: f64 = d.pmf().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(d.pmf().len(), 64);
        assert!(d.pmf().iter().all(|p| *p >= 0.0));
        assert_eq!(d.prob(0), 0.0);
        assert_eq!(d.prob(65), 0.0);
    }

    #[test]
    fn tn_cap_is_enforced() {
        let t = SeriesTable::build(&constant_model(), 40, 40).unwrap();
        assert!(tn_distribution_with_cap(&t, 30).is_err());
        assert!(tn_distribution_with_cap(&t, 40).is_ok());
    }

    #[test]
    fn degenerate_model_rejected() {
        let model = WeightModel::new(
            SeqSpec::Table { values: vec![] },
            SeqSpec::Table { values: vec![] },
        );
        let t = SeriesTable::build(&model, 5, 5).unwrap();
        assert_eq!(t.log_partition().unwrap(), f64::NEG_INFINITY);
        assert!(tn_distribution(&t).is_err());
    }
}
