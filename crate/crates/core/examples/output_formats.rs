//! One gold label rendered in the four output formats, parsed back and
//! mapped to scoring categories.

use seizure_freq::codec::{format_cot, to_categories, OutputFormat, Prediction};
use seizure_freq::label::{normalize, parse_label, NormConfig};
use seizure_freq::Category;

fn main() {
    let cfg = NormConfig::default();
    let label = parse_label("4 to 5 per month").unwrap();
    let x = normalize(&label, &cfg);
    let renders = [
        (OutputFormat::XPerMonth, x.to_string()),
        (OutputFormat::Pragmatic, x.pragmatic().phrase().to_string()),
        (OutputFormat::Label, label.canonical()),
        (
            OutputFormat::Cot,
            format_cot(
                "The letter states four to five seizures a month.",
                &label,
                &["four to five seizures a month".to_string()],
            ),
        ),
    ];
    for (fmt, raw) in renders {
        let p = Prediction::parse(fmt, &raw).unwrap();
        let c = to_categories(&p, &cfg);
        println!("{:<11} {raw}", fmt.as_str());
        println!(
            "{:<11} purist {}, pragmatic {}\n",
            "",
            c.purist.map_or("n/a".to_string(), |p| p.abbrev().to_string()),
            c.pragmatic
        );
    }
}
