//! The linear-index lasso: build the plug-in target
//! γ̂ = 4(μ̂₁ - μ̂₂) + (Σ̂₁ - Σ̂₂) Ω̂ (μ̂₁ - μ̂₂) from a fitted interaction
//! matrix and trace the coordinate-descent solution across its own penalty
//! grid, including the per-sweep objective (which never increases).
//!
//! ```bash
//! cargo run --release --example linear_index
//! ```

use quda::{
    compute_gamma_hat, estimate_moments, log_grid, make_dataset, solve_delta, solve_omega,
    AdmmConfig, SyntheticSpec,
};

fn main() -> Result<(), quda::QudaError> {
    let (train, truth) = make_dataset(&SyntheticSpec::new(2, 30, 100, 100, 5)?)?;
    let moments = estimate_moments(&train)?;
    let omega = solve_omega(&moments, 0.4, &AdmmConfig::default())?;
    let gamma = compute_gamma_hat(&moments, &omega.omega)?;

    let gamma_max = gamma.iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    println!("||gamma_hat||_max = {gamma_max:.4}");
    println!("true main effects live on {:?}\n", truth.delta_support());
    println!("{:>10}  {:>7}  {:>8}  {:>12}", "lambda_d", "sweeps", "support", "kkt residual");
    for &lambda_delta in &log_grid(gamma_max, 8, 1.5) {
        let sol = solve_delta(&moments, &gamma, lambda_delta)?;
        println!(
            "{lambda_delta:>10.4}  {:>7}  {:>8}  {:>12.3e}",
            sol.iterations,
            sol.support().len(),
            sol.kkt_residual
        );
        for pair in sol.objective_path.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12 * (1.0 + pair[0].abs()));
        }
    }
    println!("\nper-sweep objectives were monotone on every solve");
    Ok(())
}
