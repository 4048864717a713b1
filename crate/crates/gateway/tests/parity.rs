mod common;

#[test]
fn cli_and_http_agree_on_every_fixture() {
    let report = common::run_parity();
    assert_eq!(report.fixtures, 10);
    assert!(report.failures.is_empty(), "{}", report.failures.join("\n"));
}

#[test]
fn unknown_subcommand_exits_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, stderr) =
        common::cli_call(dir.path(), &["frobnicate".to_string()], &Default::default());
    assert_eq!(code, 2);
    assert!(stderr.contains("Usage"), "{stderr}");
}

#[test]
fn optimize_prints_best_key() {
    let dir = tempfile::tempdir().unwrap();
    let c = "@crates/core/fixtures/";
    let args = |a: &[&str]| a.iter().map(|s| s.replace("@C", c)).collect::<Vec<_>>();
    let (code, out, err) = common::cli_call(
        dir.path(),
        &args(&[
            "net-load",
            "@Cnetworks/demo/hubs.csv",
            "@Cnetworks/demo/segments.csv",
            "--id",
            "demo",
        ]),
        &Default::default(),
    );
    assert_eq!(code, 0, "{err}");
    assert!(out.contains("\"demo\""));
    let (code, out, err) = common::cli_call(
        dir.path(),
        &args(&["optimize", "demo", "@Cscenarios/nsh_nol_ghg.json"]),
        &Default::default(),
    );
    assert_eq!(code, 0, "{err}");
    assert_eq!(out.trim(), "NSH>water>MEM>water>BTR>water>NOL");
    let (code, _, err) = common::cli_call(
        dir.path(),
        &args(&["optimize", "nope", "@Cscenarios/nsh_nol_ghg.json"]),
        &Default::default(),
    );
    assert_eq!(code, 1);
    assert!(err.contains("not found"), "{err}");
}
