//! The whole offline pipeline on the bundled data: expand, generate, fill,
//! verify and evaluate, writing every artefact to a directory.
//!
//!     cargo run --example end_to_end -- /tmp/sf-run

use std::path::PathBuf;

use seizure_freq::commands::{
    cmd_convert, cmd_evaluate, cmd_expand, cmd_fill, cmd_generate, cmd_verify, ClientSpec, GenerateArgs, Scheme,
    VerifyArgs,
};
use seizure_freq::label::NormConfig;
use seizure_freq::pipeline::{MockProfile, RetryPolicy, ScreeningConfig};
use seizure_freq::OutputFormat;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/end_to_end".into()));
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data");
    let p = |f: &str| out.join(f);
    let client = ClientSpec::Mock(MockProfile::default());
    let cfg = NormConfig::default();

    let e = cmd_expand(&data.join("templates.jsonl"), &p("pairs.jsonl"))?;
    println!("expand:   {} pairs", e.pairs);
    let g = cmd_generate(
        &GenerateArgs {
            bases: &data.join("base_letters.jsonl"),
            pairs: &p("pairs.jsonl"),
            out_drafts: &p("drafts.jsonl"),
            out_identities: &p("identities.jsonl"),
            seed: 0,
            concurrency: 8,
            retry: RetryPolicy::default(),
        },
        &client,
    )?;
    println!("generate: {} drafts, {} failures", g.drafts, g.failures.len());
    let f = cmd_fill(&p("drafts.jsonl"), &p("identities.jsonl"), &p("letters.jsonl"))?;
    println!("fill:     {} letters", f.letters);
    let v = cmd_verify(
        &VerifyArgs {
            letters: &p("letters.jsonl"),
            exemplars: Some(&data.join("exemplars.jsonl")),
            out_retained: &p("retained.jsonl"),
            out_outcomes: Some(&p("outcomes.jsonl")),
            out_table: Some(&p("screening.tex")),
            screening: ScreeningConfig::default(),
        },
        &client,
    )?;
    println!("verify:\n{}", v.table);

    let n = cmd_convert(&p("retained.jsonl"), OutputFormat::Cot, &cfg, &p("predictions.jsonl"))?;
    println!("convert:  {n} predictions in cot format");
    let r = cmd_evaluate(
        &p("retained.jsonl"),
        &p("predictions.jsonl"),
        Scheme::Both,
        None,
        &cfg,
        Some(&p("report.json")),
    )?;
    print!("{}", r.render());
    println!("artefacts in {}", out.display());
    Ok(())
}
