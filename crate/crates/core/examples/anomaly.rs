//! Normal-ordered versus non-normal-ordered single-slice observables on the
//! sliced Fock space at fixed total time T.
//!
//! ```bash
//! cargo run --example anomaly
//! ```

use sqmlab::fock::anomaly_scan;

fn main() -> sqmlab::error::Result<()> {
    let t_total = 4.0;
    let rows = anomaly_scan(&[4, 8, 16, 32, 64, 128], t_total, 1, 0)?;
    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "N", "a†a", "a a†", "contraction", "N/T");
    for r in &rows {
        println!(
            "{:>5} {:>12.6} {:>12.6} {:>12.6} {:>12.6}",
            r.n,
            r.normal.extended.re,
            r.anti.extended.re,
            r.anti.internal_contraction,
            r.n as f64 / t_total
        );
    }
    for w in rows.windows(2) {
        let ratio = w[1].anti.mismatch() / w[0].anti.mismatch();
        println!("mismatch ratio {}/{}: {ratio:.4}", w[1].n, w[0].n);
    }
    Ok(())
}
