//! Sobolev orders guaranteed for the Born terms, tabulated over beta.
//!
//! cargo run --release --example bound_tables -- [n]

use backscatter::regularity::{bound_table, counterexample_prediction, in_open_gap};

fn show(v: Option<f64>) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.4}"))
}

fn main() -> backscatter::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let m = bound_table(n, 0.0, 2)?.m_value;
    println!("n = {n}, m = {m:.4}");
    println!(
        "{:>6} {:>8} {:>8} {:>8} {:>8} {:>8} {:>6}",
        "beta", "main1", "main2", "Q2 ceil", "Q3 sup", "p", "gap"
    );
    for k in 0..=12 {
        let beta = 0.25 * k as f64;
        let t = bound_table(n, beta, 3)?;
        let q3 = t.teo_qj_alpha_sup.iter().find(|(j, _)| *j == 3).and_then(|(_, a)| *a);
        println!(
            "{beta:>6.2} {:>8} {:>8} {:>8} {:>8} {:>8.3} {:>6}",
            show(t.teo_main1_alpha_max),
            show(t.teo_main2_alpha_sup),
            show(t.teo_q2count_alpha_max),
            show(q3),
            counterexample_prediction(n, beta),
            if in_open_gap(n, beta) { "yes" } else { "" }
        );
    }
    Ok(())
}
