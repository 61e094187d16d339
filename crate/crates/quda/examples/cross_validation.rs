//! Joint 5-fold cross-validation over the two penalty grids, printing the
//! held-out error surface and the selected pair. Ties break toward the
//! sparser corner (larger penalties).
//!
//! ```bash
//! cargo run --release --example cross_validation
//! ```

use quda::{cv_select, estimate_moments, make_dataset, AdmmConfig, CvConfig, SyntheticSpec};

fn main() -> Result<(), quda::QudaError> {
    let (train, _) = make_dataset(&SyntheticSpec::new(2, 20, 80, 80, 12)?)?;
    let moments = estimate_moments(&train)?;
    let cfg = CvConfig::with_default_grids(&moments, 5, 99, 6, 2.0)?;
    let admm = AdmmConfig::default();

    let (lambda, lambda_delta, table) = cv_select(&train, &cfg, &admm)?;

    // Render the surface with lambda down the rows.
    print!("{:>10}", "");
    for ld in &cfg.lambda_delta_grid {
        print!("  ld={ld:>7.3}");
    }
    println!();
    for (i, l) in cfg.lambda_grid.iter().enumerate() {
        print!("l={l:>8.3}");
        for j in 0..cfg.lambda_delta_grid.len() {
            let entry = &table.entries[i * cfg.lambda_delta_grid.len() + j];
            print!("  {:>10.3}", entry.mean_mr);
        }
        println!();
    }
    println!("\nselected: lambda = {lambda:.4}, lambda_delta = {lambda_delta:.4}");

    let mut csv = Vec::new();
    table.write_csv(&mut csv)?;
    println!("cv table CSV is {} bytes ({} rows)", csv.len(), table.entries.len());
    Ok(())
}
