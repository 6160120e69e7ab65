mod common;

use std::time::Duration;

use common::{gateway, script, LOCALES};
use migbot_sim::record::{parse_inputs, record};
use migbot_sim::script::{Expectation, Step};
use migbot_sim::{run_script, FailKind, Http, InProcess, Verdict};

const WAIT: Duration = Duration::from_secs(2);

#[tokio::test]
async fn golden_scripts_pass_and_are_deterministic() {
    for loc in LOCALES {
        let s = script(&format!("happy_{loc}.script"));
        let gw = gateway();
        let client = InProcess(gw.clone());
        let first = run_script(&client, &s, "first", WAIT).await.unwrap();
        let second = run_script(&client, &s, "second", WAIT).await.unwrap();
        assert_eq!(first.verdict, Verdict::Pass, "{loc}");
        assert_eq!(second.verdict, Verdict::Pass, "{loc}");
        assert_eq!(first.texts(), second.texts());
        assert!(gw.store().session("first").unwrap().finalized);
    }
}

#[tokio::test]
async fn reprompt_script_passes() {
    let s = script("reprompt_en.script");
    let run = run_script(&InProcess(gateway()), &s, "u", WAIT).await.unwrap();
    assert_eq!(run.verdict, Verdict::Pass);
    assert!(run.log.iter().any(|m| m.utterance.key == "validation.reprompt"));
}

#[tokio::test]
async fn wrong_text_fails_at_its_step() {
    let mut s = script("happy_en.script");
    let idx = s
        .steps
        .iter()
        .enumerate()
        .filter(|(_, st)| matches!(st, Step::Expect(_)))
        .nth(7)
        .unwrap()
        .0;
    s.steps[idx] = Step::Expect(Expectation::Exact("something else entirely".into()));
    let run = run_script(&InProcess(gateway()), &s, "u", WAIT).await.unwrap();
    let Verdict::Fail { step, kind, expected, actual } = run.verdict else { panic!("passed") };
    assert_eq!(step, idx);
    assert_eq!(kind, FailKind::Mismatch);
    assert_eq!(expected, "something else entirely");
    assert!(!actual.is_empty());
}

#[tokio::test]
async fn missing_message_times_out() {
    let mut s = script("reprompt_en.script");
    s.steps.push(Step::Expect(Expectation::Exact("never sent".into())));
    let run = run_script(&InProcess(gateway()), &s, "u", Duration::from_millis(100)).await.unwrap();
    assert!(matches!(run.verdict, Verdict::Fail { kind: FailKind::Timeout, .. }));
}

#[tokio::test]
async fn early_batch_end_is_a_mismatch() {
    let s = migbot_sim::parse("> hi\n< /Cześć/\n<|\n").unwrap();
    let run = run_script(&InProcess(gateway()), &s, "u", WAIT).await.unwrap();
    assert!(matches!(run.verdict, Verdict::Fail { step: 2, kind: FailKind::Mismatch, .. }));
}

#[tokio::test]
async fn unfinished_session_fails_finalized_check() {
    let mut s = script("reprompt_en.script");
    s.expect_finalized = true;
    let run = run_script(&InProcess(gateway()), &s, "u", WAIT).await.unwrap();
    assert!(matches!(run.verdict, Verdict::Fail { step, .. } if step == s.steps.len()));
}

#[tokio::test]
async fn recording_reproduces_the_frozen_script() {
    let inputs = parse_inputs(&std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/inputs/happy_uk.txt")).unwrap());
    let fresh = record(&InProcess(gateway()), "rec", &inputs, Some(migbot_core::localization::Locale::Uk), WAIT)
        .await
        .unwrap();
    let frozen = std::fs::read_to_string(common::script_path("happy_uk.script")).unwrap();
    assert_eq!(fresh.to_string(), frozen);
}

#[tokio::test]
async fn runs_over_http() {
    let gw = gateway();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let app = migbot_gateway::app::router(gw.clone());
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    let client = Http::new(&format!("http://{addr}"));
    let run = run_script(&client, &script("happy_en.script"), "web", WAIT).await.unwrap();
    assert_eq!(run.verdict, Verdict::Pass);
    let local = run_script(&InProcess(gw.clone()), &script("happy_en.script"), "local", WAIT).await.unwrap();
    assert_eq!(run.texts(), local.texts());
}
