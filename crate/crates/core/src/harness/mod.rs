//! Instance generation, relaxation tightness, benchmark runs and
//! performance profiles.

mod bench;
mod generator;
mod profile;
mod tightness;

pub use bench::{
    bench_instance, bench_run, reference_report, report_to_csv, target_hits, BenchMode, BenchmarkReport, IncumbentStamp, InstanceReport,
    TargetHit, REFERENCE_CP_TARGETS, TARGET_FACTORS,
};
pub use generator::{
    base8_units, generate_instance, tiny_instance, tiny_suite_candidates, CetScale, GeneratorSpec, BASE8_CSV, DEFAULT_DEMAND_PROFILE,
    REFERENCE_Z_CR_ORIG, BENCHMARK_COUNTS, TINY_SUITE_SEEDS, TINY_SUITE_SHAPES,
};
pub use profile::{performance_profile, profile_to_csv, Profile, ProfileCurve, ProfileError, ProfileInput};
pub use tightness::{relax, tightness_report, RelaxationValue, TightnessReport};
