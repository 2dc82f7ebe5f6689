//! `arqe pdfdump` and `arqe sample`: tabulate or draw from a knot set.

use anyhow::Result;
use rand::Rng;

use arqe_core::cdf::MonotoneCdf;
use arqe_core::seeds::stream_rng;
use arqe_core::KnotSet;

use crate::output::OutputDir;

/// 2001-row table of (x, F(x), D(x)) over [-1, 1]; endpoints exact.
pub fn pdfdump(knots: &KnotSet, out: &OutputDir) -> Result<()> {
    let cdf = MonotoneCdf::new(knots);
    let config = serde_json::json!({ "knots": knots });
    let rows = (0..=2000).map(|k| {
        let x = (k - 1000) as f64 / 1000.0;
        let f = cdf.cdf(x).expect("grid stays in domain");
        let d = cdf.pdf(x).expect("grid stays in domain");
        format!("{x},{f},{d}")
    });
    let path = out.write_csv("pdf_table.csv", &config.to_string(), 0, "x,cdf,pdf", rows)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Seeded inverse-transform draws.
pub fn sample(knots: &KnotSet, count: usize, seed: u64, out: &OutputDir) -> Result<()> {
    let cdf = MonotoneCdf::new(knots);
    let mut rng = stream_rng(seed, 0);
    let config = serde_json::json!({ "knots": knots, "count": count, "seed": seed });
    let rows = (0..count).map(|_| {
        let epsilon = cdf
            .quantile(rng.random::<f64>())
            .expect("uniform draws stay in [0, 1)");
        epsilon.to_string()
    });
    let path = out.write_csv("samples.csv", &config.to_string(), seed, "epsilon", rows)?;
    println!("wrote {}", path.display());
    Ok(())
}
