//! Score a handful of predictions, including one that fails to parse.

use seizure_freq::binning::PragmaticClass;
use seizure_freq::codec::{to_categories, OutputFormat, Prediction};
use seizure_freq::label::{normalize, parse_label, NormConfig};
use seizure_freq::metrics::{class_report, confusion, Scored};

fn main() {
    let cfg = NormConfig::default();
    let rows = [
        ("2 per week", "2 per week"),
        ("1 per month", "1 per 2 month"),
        ("1 per year", "1 per year"),
        ("unknown", "unknown"),
        ("seizure free for 1 year", "seizure free for 1 year"),
        ("10 per day", "10 per day"),
        ("3 per month", "about three a month"),
        ("1 per 6 months", "1 per 6 month"),
    ];
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for (g, p) in rows {
        gold.push(normalize(&parse_label(g).unwrap(), &cfg).pragmatic());
        pred.push(match Prediction::parse(OutputFormat::Label, p) {
            Ok(p) => Scored::Class(to_categories(&p, &cfg).pragmatic),
            Err(_) => Scored::Invalid,
        });
    }
    let m = confusion::<PragmaticClass>(&gold, &pred).unwrap();
    println!("{}", m.render());
    println!("{}", class_report(&m).render());
}
