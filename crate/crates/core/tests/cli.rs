use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lja::cli::documents::{
    frame_document, frame_from_document, load_frame, load_profile, profile_document,
    profile_from_document, FrameDocument, ProfileDocument, Source,
};
use lja::properties::{generate_profile, GeneratorConfig, JudgmentStyle};

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn lja(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lja"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn median_table_matches_golden_output() {
    let o = lja(&[
        "aggregate",
        &fixture("co2_frame.json"),
        &fixture("three_source_profile.json"),
        "--rule",
        "median",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let expected = "\
rule: median
profile rational: no

candidates
p  p -> q  q  score   distance
1  1       1  3.5000  4.1818
1  0       0  3.5000  3.8537
0  1       1  3.3000  4.1065
0  1       0  3.6000  4.0032

winners
010  {!p, p -> q, !q}  rational
";
    assert_eq!(stdout(&o), expected);
}

#[test]
fn sequential_average_reports_addition_order() {
    let o = lja(&[
        "aggregate",
        &fixture("hotel_frame.json"),
        "--rule",
        "seq-avg",
        "--average",
        &fixture("hotel_average.json"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains("addition order: !e, x, s | t, h, a"),
        "{text}"
    );
    assert!(
        text.contains("11011  {s | t, x, !e, h, a}  rational"),
        "{text}"
    );
}

#[test]
fn validate_exit_codes() {
    let ok = lja(&[
        "validate",
        &fixture("hotel_frame.json"),
        &fixture("hotel_profile.json"),
    ]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let bad = lja(&[
        "validate",
        &fixture("co2_frame.json"),
        &fixture("three_source_profile.json"),
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("profile rational: no"));
    let nf = lja(&[
        "validate",
        &fixture("additivity_frame.json"),
        &fixture("non_final_profile.json"),
    ]);
    assert_eq!(nf.status.code(), Some(1));
    assert!(
        stdout(&nf).contains("l(p1) >= 0.5000 is implied but 0.3000 is stated"),
        "{}",
        stdout(&nf)
    );
}

#[test]
fn usage_and_parse_errors_exit_two() {
    assert_eq!(lja(&["aggregate"]).status.code(), Some(2));
    assert_eq!(lja(&["--help"]).status.code(), Some(0));
    let unknown = lja(&[
        "aggregate",
        &fixture("co2_frame.json"),
        &fixture("three_source_profile.json"),
        "--rule",
        "borda",
    ]);
    assert_eq!(unknown.status.code(), Some(2));

    let broken = scratch("broken_frame.json");
    std::fs::write(
        &broken,
        "{\n  \"atoms\": [\"p\"],\n  \"agenda\": [\"p &\"]\n}\n",
    )
    .unwrap();
    let o = lja(&["enumerate", broken.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains(&format!("{}:3:", broken.display())), "{err}");

    let typo = scratch("typo_frame.json");
    std::fs::write(
        &typo,
        "{\n  \"atoms\": [\"p\"],\n  \"agendas\": [\"p\"]\n}\n",
    )
    .unwrap();
    let o = lja(&["enumerate", typo.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains(&format!("{}:3:", typo.display())),
        "{}",
        stderr(&o)
    );

    let missing = lja(&["enumerate", "/nonexistent/frame.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn unknown_issue_is_reported_with_position() {
    let profile = scratch("unknown_issue.json");
    std::fs::write(
        &profile,
        "{\"sources\": [\n {\"name\": \"a\", \"judgments\": [\n  {\"issue\": \"r\", \"rel\": \">=\", \"a\": 0.5}]}]}\n",
    )
    .unwrap();
    let o = lja(&[
        "validate",
        &fixture("co2_frame.json"),
        profile.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains(":3:"), "{err}");
    assert!(err.contains("`r`"), "{err}");
}

#[test]
fn json_output_is_byte_identical_across_runs() {
    let commands: Vec<Vec<String>> = vec![
        vec![
            "aggregate".into(),
            fixture("co2_frame.json"),
            fixture("three_source_profile.json"),
            "--rule".into(),
            "dist-e-sum".into(),
        ],
        vec![
            "enumerate".into(),
            fixture("hotel_frame.json"),
            "--what".into(),
            "implicants".into(),
        ],
        vec![
            "lift".into(),
            fixture("co2_frame.json"),
            fixture("ministers_crisp_profile.json"),
        ],
        vec![
            "validate".into(),
            fixture("co2_frame.json"),
            fixture("three_source_profile.json"),
        ],
        vec![
            "check".into(),
            "systematicity".into(),
            "--rule".into(),
            "median".into(),
            "--samples".into(),
            "500".into(),
        ],
    ];
    for args in commands {
        let mut args: Vec<&str> = args.iter().map(String::as_str).collect();
        args.extend(["--format", "json", "--seed", "42"]);
        let a = lja(&args);
        let b = lja(&args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        serde_json::from_slice::<serde_json::Value>(&a.stdout).unwrap();
    }
}

#[test]
fn lifted_profile_validates_and_pools_to_the_majority() {
    let lifted = scratch("lifted.json");
    let o = lja(&[
        "lift",
        &fixture("co2_frame.json"),
        &fixture("ministers_crisp_profile.json"),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    std::fs::write(&lifted, &o.stdout).unwrap();
    let v = lja(&[
        "validate",
        &fixture("co2_frame.json"),
        lifted.to_str().unwrap(),
    ]);
    assert_eq!(v.status.code(), Some(0));

    let pooled = lja(&[
        "aggregate",
        &fixture("co2_frame.json"),
        lifted.to_str().unwrap(),
        "--rule",
        "quota",
        "--quota",
        "2",
        "--format",
        "json",
    ]);
    let winners = |o: &Output| {
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()["winners"].clone()
    };
    // Issue-wise majority of 111, 100, 010.
    assert_eq!(winners(&pooled)[0]["signs"], "110");
}

#[test]
fn documents_round_trip() {
    for name in [
        "co2_frame.json",
        "hotel_frame.json",
        "zpp_frame.json",
        "additivity_frame.json",
    ] {
        let frame = load_frame(Path::new(&fixture(name))).unwrap();
        let doc = frame_document(&frame);
        let text = serde_json::to_string(&doc).unwrap();
        let back: FrameDocument = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        let src = Source {
            path: PathBuf::from(name),
            text,
        };
        let again = frame_from_document(&src, &back).unwrap();
        assert_eq!(frame_document(&again), doc);
        assert_eq!(again.rational_sets(), frame.rational_sets());
    }

    let frame = load_frame(Path::new(&fixture("hotel_frame.json"))).unwrap();
    for style in [
        JudgmentStyle::Equalities,
        JudgmentStyle::LowerBounds,
        JudgmentStyle::LiftedCrisp,
    ] {
        let cfg = GeneratorConfig::default().with_style(style);
        for sample in 0..20 {
            let profile = generate_profile(&frame, &cfg, sample).unwrap();
            let doc = profile_document(&frame, &profile, false);
            let text = serde_json::to_string_pretty(&doc).unwrap();
            let back: ProfileDocument = serde_json::from_str(&text).unwrap();
            assert_eq!(back, doc);
            let src = Source {
                path: PathBuf::from("p.json"),
                text,
            };
            let parsed = profile_from_document(&src, &back, &frame).unwrap();
            assert_eq!(parsed.sources(), profile.sources());
        }
    }

    let three_source = load_profile(
        Path::new(&fixture("three_source_profile.json")),
        &load_frame(Path::new(&fixture("co2_frame.json"))).unwrap(),
    )
    .unwrap();
    assert_eq!(three_source.len(), 3);
}

#[test]
fn check_witness_replays() {
    let witness = scratch("median_witness.json");
    let o = lja(&[
        "check",
        "systematicity",
        "--rule",
        "median",
        "--witness-out",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample-found"));
    let r = lja(&[
        "check",
        "systematicity",
        "--replay",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stdout(&r).contains("counterexample reproduced"));

    let ok = lja(&[
        "check",
        "unanimity",
        "--rule",
        "dictator",
        "--samples",
        "200",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let needs_rule = lja(&["check", "zpp"]);
    assert_eq!(needs_rule.status.code(), Some(2));
}

#[test]
fn hotel_quota_outcome_is_flagged() {
    let o = lja(&[
        "aggregate",
        &fixture("hotel_frame.json"),
        &fixture("hotel_profile.json"),
        "--rule",
        "quota",
        "--quota",
        "3",
        "--uniform-c",
        "0.6",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let w = &v["winners"][0];
    assert_eq!(w["signs"], "1100-");
    assert_eq!(w["consistent"], false);
    assert_eq!(w["rational"], false);
}

#[test]
fn lower_bound_reading_of_hotel_profile_is_consistent_but_incomplete() {
    let base = [
        "aggregate",
        &fixture("hotel_frame.json"),
        "",
        "--rule",
        "quota",
        "--quota",
        "3",
        "--format",
        "json",
    ];
    let lower = fixture("hotel_lower_bounds_profile.json");
    let mut args = base;
    args[2] = &lower;
    let v: serde_json::Value = serde_json::from_slice(&lja(&args).stdout).unwrap();
    let w = &v["winners"][0];
    assert_eq!(w["signs"], "110--");
    assert_eq!(w["complete"], false);
    assert_eq!(w["consistent"], true);

    let mut with_vector: Vec<&str> = args.to_vec();
    let vector = fixture("uniform_c.json");
    with_vector.extend(["--crisp-vector", &vector]);
    assert_eq!(lja(&with_vector).stdout, lja(&args).stdout);
}

#[test]
fn inconsistent_source_is_rejected() {
    let o = lja(&[
        "validate",
        &fixture("additivity_frame.json"),
        &fixture("inconsistent_profile.json"),
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["sources"][0]["consistent"], false);
    assert_eq!(v["profile_rational"], false);
}

#[test]
fn zero_preservation_is_vacuous_when_the_certain_judgments_clash_with_constraints() {
    use lja::aggregate::{Rule, RuleOptions};
    use lja::properties::zpp_violation;
    let frame = load_frame(Path::new(&fixture("zpp_frame.json"))).unwrap();
    let profile = load_profile(Path::new(&fixture("zpp_profile.json")), &frame).unwrap();
    for name in ["quota", "median", "dist-e-sum", "kemeny", "pi-sum"] {
        let options = RuleOptions {
            quota: Some(3),
            ..RuleOptions::default()
        };
        let rule = Rule::from_name(name, &frame, &options).unwrap();
        assert_eq!(
            zpp_violation(&rule, &frame, &profile).unwrap(),
            None,
            "{name}"
        );
    }
}
