//! Finite-length experiments: sampled Tanner graphs, peeling, the Maxwell
//! decoder and exhaustive oracles for small codes.

pub mod gf2;
pub mod graph;
pub mod maxwell;
pub mod oracle;
pub mod peel;
pub mod stats;

pub use graph::{hamming, random_tree, repetition, sample_graph, sample_simple_graph, single_parity_check, TannerGraph};
pub use maxwell::{guess_count_lower_bound, maxwell_decode, Event, EventKind, GuessExpr, MaxwellRun, Strategy, TrajectorySample};
pub use oracle::{brute_force_list, exact_exit_polynomial, ExactExit};
pub use peel::{peel_bp, PeelResult};
pub use stats::{entropy_at, entropy_concentration, erasure_pattern, run_trials, trajectory_stats, trial_seeds, Concentration, StatsBin, TrialSeeds};
