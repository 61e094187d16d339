//! Small replication benchmark: simulate, cross-validate, fit and score two
//! of the synthetic models, then print the mean/standard-error table and the
//! per-replication log.
//!
//! ```bash
//! cargo run --release --example benchmark_table
//! ```
//!
//! This is the library-level counterpart of `quda benchmark`; scale up
//! `reps`, `p` and `test_size` for serious runs.

use quda::{format_table, run_benchmark, write_rep_log, AdmmConfig, CvGridSpec, SyntheticSpec};

fn main() -> Result<(), quda::QudaError> {
    let grid = CvGridSpec::default();
    let admm = AdmmConfig::default();
    let mut summaries = Vec::new();
    for model_id in [2, 3] {
        let spec = SyntheticSpec::new(model_id, 50, 100, 100, 1234)?;
        summaries.push(run_benchmark(&spec, 5, 500, &grid, &admm)?);
    }
    print!("{}", format_table(&summaries));

    let mut log = Vec::new();
    write_rep_log(&summaries, &mut log)?;
    println!("\nper-replication log:\n{}", String::from_utf8_lossy(&log));
    Ok(())
}
