//! Builds an experiment configuration the way the CLI does (file text, then
//! overrides), prints the canonical text form and the bound table that a
//! report would carry.
//!
//! cargo run --release --example experiment_config

use backscatter::cli::config::ExperimentConfig;
use backscatter::regularity::bound_table;

fn main() -> backscatter::Result<()> {
    let mut cfg = ExperimentConfig::from_text(
        "# counterexample run\n\
         n = 3\n\
         beta = 0.5\n\
         points = 32\n",
    )?;
    cfg.set("pv.near_scheme", "taylor")?;
    cfg.set("fit-max", "256")?;
    println!("{}", cfg.to_text());
    println!("fit window {:?}", cfg.window());
    println!("eta nodes {}", cfg.eta_grid()?.count());

    match cfg.set("pv.delta", "not-a-number") {
        Err(e) => println!("rejected: {e}"),
        Ok(()) => println!("unexpectedly accepted"),
    }

    let table = bound_table(cfg.require_n()?, cfg.require_beta()?, 3)?;
    println!("{}", serde_json::to_string_pretty(&table).map_err(|e| backscatter::Error::Io(e.to_string()))?);
    Ok(())
}
