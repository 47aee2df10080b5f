//! Expand the bundled description templates and show a sample of pairs.

use seizure_freq::io::read_jsonl;
use seizure_freq::label::format_label;
use seizure_freq::template::{expand_corpus, DescriptionTemplate};

fn main() {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/templates.jsonl");
    let templates: Vec<DescriptionTemplate> = read_jsonl(&path).expect("templates");
    let out = expand_corpus(&templates).expect("valid templates");
    println!(
        "{} templates -> {} pairs ({} duplicates dropped)\n",
        templates.len(),
        out.pairs.len(),
        out.duplicates
    );
    for p in out.pairs.iter().step_by(23) {
        println!("{:<28} {:<55} {}", p.id, p.description, format_label(&p.label));
    }
}
