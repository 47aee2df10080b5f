//! Parse free-form labels, print their canonical form and seizures per month.
//!
//!     cargo run --example label_language -- "3 to 4 per week" "2 cluster per month, 5 per cluster"

use seizure_freq::label::{format_label, normalize, parse_label, NormConfig};

fn main() {
    let mut inputs: Vec<String> = std::env::args().skip(1).collect();
    if inputs.is_empty() {
        inputs = [
            "1 per year",
            "4 to 5 per month",
            "multiple per 1 month",
            "2 cluster per 3 months, 6 per cluster",
            "unknown, multiple per cluster",
            "seizure free for 18 months",
            "no seizure frequency reference",
            "two per week",
        ]
        .map(String::from)
        .to_vec();
    }
    let cfg = NormConfig::default();
    for s in &inputs {
        match parse_label(s) {
            Ok(l) => println!(
                "{s:<40} -> {:<40} {:>8} /month  ({:?})",
                format_label(&l),
                normalize(&l, &cfg).value(),
                l.kind()
            ),
            Err(e) => println!("{s:<40} !! {e}"),
        }
    }
}
