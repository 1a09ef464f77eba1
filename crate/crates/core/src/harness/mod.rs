//! Configuration, run orchestration, epsilon sweeps and property suites.

mod config;
mod run;
mod suite;
mod sweep;

pub use config::{parse_config, DiagnosticsSpec, GridSpec, LadderSpec, RunSpec, SystemChoice};
pub use run::{
    initial_envelope, initial_state, run_single, simulate, write_provenance, Check, RunResult, RunSummary,
    DIVERGENCE_LIMIT, MONOTONE_SLACK, RESIDUAL_LIMIT, VERSION,
};
pub use suite::{
    bernstein_ratios, besov_oracle_defect, bony_defect, energy_balance_defects, linear_exactness, richardson_defect,
    run_property_suite, spectral_identities, Suite, SuiteReport, BALANCE, EXACT,
};
pub use sweep::{run_sweep, sweep_members, CauchyVerdict, DtjStudy, MemberSummary, PairStat, SweepReport, SweepResult};
