//! Experiment configuration, seeded runs, named reproductions and output.

pub mod catalog;
pub mod config;
pub mod emit;
pub mod experiment;

pub use catalog::{find_reproduction, list_reproductions, run_reproduction, HorizonRate, ReproResult, Reproduction};
pub use config::{
    build_instance, parse_config, validate_spec, BoundName, CheckSpec, ExperimentSpec, InstanceSpec, MetricName, Threshold,
};
pub use emit::{emit_csv, emit_experiment, emit_reproduction, emit_summary_json};
pub use experiment::{
    run_experiment, run_experiment_with, BoundValue, ExperimentResult, RunOptions, Verdict, VerdictStatus,
};

/// Convert a serde path such as `noise_spec.sigma` or `seeds[2]` into a JSON
/// pointer (`/noise_spec/sigma`, `/seeds/2`).
pub fn json_pointer(path: &str) -> String {
    if path.is_empty() || path == "." {
        return String::new();
    }
    let mut out = String::new();
    for seg in path.split('.') {
        let mut rest = seg;
        if let Some(i) = rest.find('[') {
            out.push('/');
            out.push_str(&rest[..i].replace('~', "~0").replace('/', "~1"));
            rest = &rest[i..];
            while let Some(end) = rest.find(']') {
                out.push('/');
                out.push_str(&rest[1..end]);
                rest = &rest[end + 1..];
            }
        } else {
            out.push('/');
            out.push_str(&rest.replace('~', "~0").replace('/', "~1"));
        }
    }
    out
}
