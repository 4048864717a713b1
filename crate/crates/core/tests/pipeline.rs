use ontoroute_core::docprep::SourceDocument;
use ontoroute_core::ontogen::{persistence_threshold, run_pipeline, survives, PipelineConfig};
use ontoroute_core::query::{evaluate, parse_query};
use ontoroute_core::reasoning::{RuleCore, ScriptedCore};
use ontoroute_core::samples;

fn one_section(body: &str) -> SourceDocument {
    SourceDocument::from_json(&format!(
        r#"{{"title":"Menu","sections":[{{"heading":"Items","body":"{body}"}}]}}"#
    ))
    .unwrap()
}

#[test]
fn rule_core_is_byte_stable() {
    let doc = SourceDocument::from_json(samples::PIZZA_DOC).unwrap();
    let cfg = PipelineConfig::default();
    let a = run_pipeline(&doc, &RuleCore::new(), &cfg).unwrap();
    let b = run_pipeline(&doc, &RuleCore::new(), &cfg).unwrap();
    assert_eq!(a.merged.to_turtle(), b.merged.to_turtle());
    assert_eq!(a.modules.len(), doc.sections.len());
    for (x, y) in a.modules.iter().zip(&b.modules) {
        assert_eq!(x.to_turtle(), y.to_turtle());
    }
}

#[test]
fn unstable_scripted_term_is_dropped() {
    let core = ScriptedCore::from_labels(&[&["ham", "spam"], &["ham"], &["ham"]]);
    let cfg = PipelineConfig::default();
    let out = run_pipeline(&one_section("ham and spam are served"), &core, &cfg).unwrap();
    let text = out.merged.to_turtle();
    assert!(text.contains("Ham"), "{text}");
    assert!(!text.to_lowercase().contains("spam"), "{text}");
    let section = &out.report.sections[0];
    assert_eq!(section.dropped.len(), 1);
    assert_eq!(section.dropped[0].key, "spam");
    assert_eq!(section.dropped[0].support, 1);
}

#[test]
fn threshold_truth_table() {
    let tau = 2.0 / 3.0;
    for n in 1..=6usize {
        let want = ((n as f64) * 2.0 / 3.0).ceil().max(1.0) as usize;
        assert_eq!(persistence_threshold(n, tau), want, "n = {n}");
        for k in 0..=n {
            assert_eq!(survives(k, n, tau), 3 * k >= 2 * n, "k = {k}, n = {n}");
        }
    }
    assert_eq!(persistence_threshold(3, 1.0), 3);
    assert_eq!(persistence_threshold(4, 0.1), 1);
}

#[test]
fn rule_pipeline_answers_vegetable_question() {
    let doc = SourceDocument::from_json(samples::PIZZA_DOC).unwrap();
    let out = run_pipeline(&doc, &RuleCore::new(), &PipelineConfig::default()).unwrap();
    let q = parse_query(samples::query("pizza_vegetable_toppings").unwrap()).unwrap();
    let t = evaluate(&q, &out.merged).unwrap();
    let mut got: Vec<&str> = t.local_names("vegetableTopping");
    got.sort();
    assert_eq!(got, ["Artichokes", "Mushrooms", "Onion", "Tomatoes"]);
}

#[test]
fn failing_core_reports_stage() {
    let err = run_pipeline(
        &one_section("ham"),
        &ScriptedCore::failing("down"),
        &PipelineConfig::default(),
    )
    .unwrap_err()
    .to_string();
    assert!(err.contains("down"), "{err}");
}
