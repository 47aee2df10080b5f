//! Screen letters with the scripted offline teacher and print the
//! discards-per-pass table.

use seizure_freq::label::parse_label;
use seizure_freq::pipeline::{
    run_screening, CotExemplar, InferScript, LetterRecord, ScreeningConfig, ScriptedClient,
};

fn main() {
    let scripts = [
        ("clusters", InferScript::Correct),
        ("clusters", InferScript::CorrectWithExemplar),
        ("clusters", InferScript::CorrectOnPass(3)),
        ("clusters", InferScript::NeverCorrect),
        ("plain", InferScript::Correct),
        ("plain", InferScript::CorrectOnPass(2)),
        ("plain", InferScript::NeverCorrect),
    ];
    let mut client = ScriptedClient::all_correct();
    let mut letters = Vec::new();
    for (i, (template, script)) in scripts.into_iter().enumerate() {
        let r = LetterRecord {
            id: format!("letter-{i}"),
            letter: format!("Letter {i}: clusters of 3 seizures twice a month."),
            label: parse_label("2 cluster per month, 3 per cluster").unwrap(),
            template_id: template.into(),
            base_letter_id: "base".into(),
            analysis: None,
            evidence: None,
        };
        client.add_answer(r.letter.clone(), r.label.clone());
        client.add_infer_script(r.letter.clone(), script);
        letters.push(r);
    }
    let exemplar = CotExemplar {
        id: "cot-clusters".into(),
        applicable_template_ids: vec!["clusters".into()],
        exemplar_text: "Count clusters per period, then seizures per cluster.".into(),
    };
    let out = run_screening(&client, &letters, &[exemplar], &ScreeningConfig::default());
    for o in &out.outcomes {
        println!("{:<10} {:?} after {} pass(es)", o.record_id, o.status, o.passes.len());
    }
    println!("\n{}", out.stats.render_text());
    print!("{}", out.stats.render_latex());
}
