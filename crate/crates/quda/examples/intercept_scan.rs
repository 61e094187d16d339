//! The intercept is the one-dimensional piece of the rule: given raw
//! discriminant scores for labeled rows, the in-sample error is piecewise
//! constant in the intercept, so a sorted scan finds its exact minimizer.
//!
//! ```bash
//! cargo run --example intercept_scan
//! ```

use quda::{search_eta, ScoredSample};

fn main() -> Result<(), quda::QudaError> {
    // Hand-made scores: class 2 clusters low, class 1 high, one stray each.
    let data = [
        (-3.1, 0),
        (-2.0, 0),
        (-1.2, 0),
        (0.4, 0), // stray class-2 point above the gap
        (-0.3, 1), // stray class-1 point below it
        (1.1, 1),
        (2.4, 1),
        (3.3, 1),
    ];
    let samples: Vec<ScoredSample> = data
        .iter()
        .map(|&(score, label01)| ScoredSample::new(score, label01))
        .collect::<Result<_, _>>()?;

    let (eta, error) = search_eta(&samples)?;
    println!("chosen intercept: {eta:.3}");
    println!("in-sample error:  {error:.3} ({} of {})", (error * data.len() as f64).round(), data.len());

    println!("\n{:>7}  {:>6}  {:>10}", "score", "label", "prediction");
    for &(score, label01) in &data {
        let predicted = u8::from(score + eta > 0.0);
        println!(
            "{score:>7.2}  {:>6}  {:>10}{}",
            if label01 == 1 { "one" } else { "two" },
            if predicted == 1 { "one" } else { "two" },
            if predicted != label01 { "   <- error" } else { "" }
        );
    }
    Ok(())
}
