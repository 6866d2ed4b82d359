//! Exact statistics, exact sampling, and closed-form asymptotics for random
//! permutations whose cycle weights grow linearly with the permutation size.
//!
//! The measure on permutations of N symbols assigns probability proportional
//! to the product over cycles of w_len, with w_j = theta_j + N * kappa_j.
//! The N-proportional part makes cycle lengths of order N typical, so the
//! model interpolates between Ewens-like behavior (kappa = 0) and regimes
//! with macroscopic cycles.
//!
//! The crate is organized in layers:
//!
//! * [`weights`] declares the two coefficient sequences and their generating
//!   functions;
//! * [`series`] builds the partition-function table exactly in log space;
//! * [`exact_stats`] turns that table into closed-form finite-N laws;
//! * [`sampler`] draws exact samples in O(N) per permutation;
//! * [`asymptotics`] classifies the thermodynamic regime and evaluates the
//!   closed-form growth laws;
//! * [`limitlaws`] samples the limiting objects (Poisson-Dirichlet and its
//!   delayed stick-breaking generalization, shifted Gamma limits);
//! * [`spatial_bridge`] connects lattice-allocation weight sums to the
//!   sequences used here;
//! * [`validation`] holds brute-force oracles, reference models, and the
//!   statistical machinery used by the test suite and the CLI.
//!
//! The book under `book/` walks through the same layers with runnable
//! examples; its snippets are compiled as doc-tests of this crate.

pub mod asymptotics;
pub mod error;
pub mod exact_stats;
pub mod limitlaws;
pub mod sampler;
pub mod series;
pub mod spatial_bridge;
pub mod specialfn;
pub mod validation;
pub mod weights;

pub use asymptotics::{classify, HnLaw, Regime, RegimeReport, TnLaw};
pub use error::{Error, Result};
pub use limitlaws::{sample_gem, sample_pd, sample_stick, StickPath};
pub use sampler::{run_monte_carlo, sample_cycle_type, CycleType, McConfig, McSummary};
pub use series::{log_partition, tn_distribution, SeriesTable, TnDistribution};
pub use spatial_bridge::{Family, SpatialConfig};
pub use validation::{run_suite, Suite, ValidationReport};
pub use weights::{GenFnProfile, SeqSpec, WeightModel};

// Every code block in the book compiles and runs as a doc-test, so the
// guide cannot drift from the API it documents.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            #[allow(dead_code)]
            struct $name;
        };
    }
    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(WeightModels, "../../../book/src/weight-models.md");
    chapter!(ExactLayer, "../../../book/src/exact-layer.md");
    chapter!(Sampling, "../../../book/src/sampling.md");
    chapter!(Regimes, "../../../book/src/regimes.md");
    chapter!(LimitLaws, "../../../book/src/limit-laws.md");
    chapter!(LatticeBridge, "../../../book/src/lattice-bridge.md");
    chapter!(ValidationAndCli, "../../../book/src/validation-and-cli.md");
    chapter!(Readme, "../../../README.md");
}
