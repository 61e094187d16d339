//! Warm-started penalty path for the interaction matrix: the
//! eigendecompositions are taken once, then each solve continues from the
//! previous (Ψ, Λ) pair. Prints support growth, iteration counts and the
//! stationarity certificate along the path.
//!
//! ```bash
//! cargo run --release --example interaction_path
//! ```

use quda::{
    estimate_moments, kkt_residual_omega, log_grid, make_dataset, AdmmConfig, OmegaSolver,
    SyntheticSpec,
};

fn main() -> Result<(), quda::QudaError> {
    let (train, _) = make_dataset(&SyntheticSpec::new(4, 50, 100, 100, 21)?)?;
    let moments = estimate_moments(&train)?;
    let solver = OmegaSolver::new(&moments, &AdmmConfig::default())?;
    println!("initial penalty parameter rho = {:.4}", solver.rho());

    let lambda_max = moments.sigma_diff().max_abs();
    println!("lambda_max = {lambda_max:.4} (the level that zeroes the estimate)\n");
    println!("{:>10}  {:>6}  {:>9}  {:>12}", "lambda", "iters", "support", "kkt residual");

    let mut warm = None;
    for &lambda in &log_grid(lambda_max, 10, 2.0) {
        let (solution, state) = solver.solve_warm(lambda, warm.take())?;
        warm = Some(state);
        let kkt = kkt_residual_omega(&solution.omega_raw, &moments, lambda)?;
        println!(
            "{lambda:>10.4}  {:>6}  {:>9}  {kkt:>12.3e}",
            solution.iterations,
            solution.support_size()
        );
    }
    Ok(())
}
