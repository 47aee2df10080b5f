//! Map seizures-per-month values to both category schemes.

use seizure_freq::binning::{bin_pragmatic, bin_purist, PURIST_BINS};
use seizure_freq::Category;

fn main() {
    println!("upper bounds (inclusive):");
    for (hi, c) in PURIST_BINS {
        println!("  x <= {hi:<6} {}", c.abbrev());
    }
    println!();
    for x in [0.0, 0.083, 0.16, 0.17, 0.5, 1.0, 1.1, 2.0, 4.0, 12.0, 30.0, 1000.0] {
        println!(
            "{x:>8} -> {:<12} {}",
            bin_purist(x).unwrap().abbrev(),
            bin_pragmatic(x).unwrap()
        );
    }
}
