//! Exact finite-N laws derived from the partition table.
//!
//! With C_j the number of j-cycles and L_1, L_2, ... the cycle lengths in
//! order of removal (the cycle containing the smallest unexamined point
//! first), every quantity here is a ratio of table entries times a product
//! of weights, evaluated in log space:
//!
//!   E[prod_j (C_j)_{n_j}] = h_{N-K}/H_N * prod_j (w_j/j)^{n_j},  K = sum j n_j,
//!   P(L_1 = l)            = (w_l/N) h_{N-l}/H_N,
//!   P(L_1 = l_1, ..., L_m = l_m)
//!     = prod_i w_{l_i}/(N - l_1 - ... - l_{i-1}) * h_{N-sum}/H_N.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::SeriesTable;

/// A nonnegative quantity carried in both log and linear form.
///
/// `value` is exp(`log`) with deep underflow clamped to 0, so it is never
/// NaN. `beyond_support` marks results that are structurally zero because
/// the request lies outside the support (e.g. a falling factorial longer
/// than the permutation), as opposed to numerically small.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LogValue {
    pub log: f64,
    pub value: f64,
    pub beyond_support: bool,
}

impl LogValue {
    pub(crate) fn from_log(log: f64) -> Self {
        let value = if log == f64::NEG_INFINITY { 0.0 } else { log.exp() };
        LogValue { log, value, beyond_support: false }
    }

    pub(crate) fn zero_beyond_support() -> Self {
        LogValue { log: f64::NEG_INFINITY, value: 0.0, beyond_support: true }
    }
}

/// Which joint falling-factorial moment to take: pairs (j, n_j) ask for
/// prod_j (C_j)(C_j - 1)...(C_j - n_j + 1).
#[derive(Clone, Debug)]
pub struct FactorialMomentSpec {
    pairs: Vec<(usize, usize)>,
}

impl FactorialMomentSpec {
    /// Pairs must have distinct cycle lengths j >= 1 and orders n_j >= 1.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::config("factorial moment needs at least one (j, n_j) pair"));
        }
        for &(j, n) in &pairs {
            if j < 1 || n < 1 {
                return Err(Error::config("factorial moment pairs need j >= 1 and n_j >= 1"));
            }
        }
        let mut seen: Vec<usize> = pairs.iter().map(|p| p.0).collect();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::config("factorial moment pairs must have distinct j"));
        }
        Ok(FactorialMomentSpec { pairs })
    }

    /// K = sum_j j * n_j, the number of points the moment pins down.
    pub fn k_total(&self) -> usize {
        self.pairs.iter().map(|&(j, n)| j * n).sum()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }
}

fn check_table(table: &SeriesTable) -> Result<usize> {
    let n = table.n_points();
    if table.n_max() < n {
        return Err(Error::config("table too short: build with n_max >= n_points"));
    }
    if table.log_h(n) == f64::NEG_INFINITY {
        return Err(Error::domain(
            "partition function vanishes: the weight measure has empty support",
        ));
    }
    Ok(n)
}

/// E[prod_j (C_j)_{n_j}]. Requests with K > N return zero flagged as
/// beyond support: some falling factorial is literally zero on every
/// permutation of N points.
pub fn factorial_moment(table: &SeriesTable, spec: &FactorialMomentSpec) -> Result<LogValue> {
    let n = check_table(table)?;
    let k = spec.k_total();
    if k > n {
        return Ok(LogValue::zero_beyond_support());
    }
    let mut log = table.log_h(n - k) - table.log_h(n);
    for &(j, nj) in spec.pairs() {
        log += nj as f64 * (table.log_weight(j) - (j as f64).ln());
    }
    Ok(LogValue::from_log(log))
}

/// E[C_j] for j = 1..=j_max.
pub fn expected_cycle_counts(table: &SeriesTable, j_max: usize) -> Result<Vec<f64>> {
    let n = check_table(table)?;
    if j_max > n {
        return Err(Error::config("expected_cycle_counts needs j_max <= n_points"));
    }
    let log_hn = table.log_h(n);
    Ok((1..=j_max)
        .map(|j| table.weight(j) / j as f64 * (table.log_h(n - j) - log_hn).exp())
        .collect())
}

/// The law of L_1, the length of the cycle containing the first point:
/// entries P(L_1 = l) for l = 1..=N.
pub fn l1_pmf(table: &SeriesTable) -> Result<Vec<f64>> {
    let n = check_table(table)?;
    let log_hn = table.log_h(n);
    Ok((1..=n)
        .map(|l| table.weight(l) / n as f64 * (table.log_h(n - l) - log_hn).exp())
        .collect())
}

/// Joint law of the first m removed cycle lengths. A partial prefix is a
/// marginal; sum of lengths beyond N comes back as zero, beyond support.
pub fn joint_l_pmf(table: &SeriesTable, lengths: &[usize]) -> Result<LogValue> {
    let n = check_table(table)?;
    if lengths.is_empty() {
        return Err(Error::config("joint_l_pmf needs at least one length"));
    }
    if lengths.iter().any(|&l| l == 0) {
        return Err(Error::config("cycle lengths are >= 1"));
    }
    let total: usize = lengths.iter().sum();
    if total > n {
        return Ok(LogValue::zero_beyond_support());
    }
    let mut log = table.log_h(n - total) - table.log_h(n);
    let mut remaining = n;
    for &l in lengths {
        log += table.log_weight(l) - (remaining as f64).ln();
        remaining -= l;
    }
    Ok(LogValue::from_log(log))
}

/// Exact finite-N expected fraction of points in cycles longer than K:
/// 1 - (1/N) sum_{j<=K} j E[C_j].
pub fn expected_long_fraction(table: &SeriesTable, k: usize) -> Result<f64> {
    let n = check_table(table)?;
    if k >= n {
        return Err(Error::config("expected_long_fraction needs K < n_points"));
    }
    let counts = expected_cycle_counts(table, k)?;
    let short: f64 = counts
        .iter()
        .enumerate()
        .map(|(i, c)| (i + 1) as f64 * c)
        .sum();
    Ok(1.0 - short / n as f64)
}
