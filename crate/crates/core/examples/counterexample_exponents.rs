//! Decay of S_1(q_beta) along |eta| against the counterexample exponent,
//! and the Sobolev order of Im Q2 against the guaranteed ceiling.
//!
//! cargo run --release --example counterexample_exponents -- [n] [beta]

use backscatter::fields::GridSpec1D;
use backscatter::regularity::{counterexample_experiment, q2count_check, CounterexampleSettings};

fn main() -> backscatter::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().and_then(|s| s.parse().ok()).unwrap_or(3);
    let beta: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.5);

    let mut settings = CounterexampleSettings::new(GridSpec1D::logarithmic(8.0, 512.0, 24)?);
    settings.with_q2 = true;
    let result = counterexample_experiment(n, beta, &settings)?;

    println!("n = {n}, beta = {beta}");
    println!("{}", result.entry.criterion);
    println!("fit residual {:.2e}", result.fit.residual_rms);
    let q2 = q2count_check(&result, 0.1)?;
    println!("{}", q2.criterion);
    if let Some(label) = &q2.label {
        println!("label: {label}");
    }
    Ok(())
}
