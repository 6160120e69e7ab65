use std::sync::Arc;

use migbot_core::flow::Phase;
use migbot_core::persistence::ProfileAttributes;
use migbot_gateway::envelope::InboundEvent;
use migbot_gateway::profile::{DeniedProfiles, StaticProfiles};
use migbot_gateway::testing::{in_memory_gateway, RecordingTransport};
use migbot_gateway::{Channel, Handled};

fn event(user: &str, ts: i64, text: &str) -> InboundEvent {
    InboundEvent {
        sender_id: user.into(),
        recipient_page_id: "PAGE".into(),
        timestamp: ts,
        message_text: Some(text.into()),
        quick_reply_payload: None,
    }
}

#[tokio::test]
async fn first_message_creates_session_and_greets() {
    let t = Arc::new(RecordingTransport::default());
    let mut fixture = StaticProfiles::default();
    fixture.0.insert(
        "u1".into(),
        ProfileAttributes {
            first_name: Some("Anna".into()),
            gender: Some("female".into()),
            timezone: Some(2.0),
            ..Default::default()
        },
    );
    let gw = in_memory_gateway(Some(Arc::new(fixture)), t.clone());
    let h = gw.handle_event(&event("u1", 1, "hi"), Channel::Platform).await.unwrap();
    let Handled::Processed { session_id, .. } = h else { panic!("{h:?}") };
    gw.outbox().flush().await;
    let sent = t.sent();
    assert_eq!(sent[0].utterance.key, "greeting.trilingual");
    assert_eq!(sent.iter().map(|m| m.seq).collect::<Vec<_>>(), (1..=sent.len() as u64).collect::<Vec<_>>());
    let record = gw.store().record(session_id).unwrap();
    assert_eq!(record.first_name.as_deref(), Some("Anna"));
    assert_eq!(record.gender.as_deref(), Some("female"));
    assert_eq!(record.timezone, Some(2.0));
    assert_eq!(gw.store().session("u1").unwrap().cursor.phase, Phase::LanguageSelect);
}

#[tokio::test]
async fn redelivered_event_is_processed_once() {
    let t = Arc::new(RecordingTransport::default());
    let gw = in_memory_gateway(None, t.clone());
    gw.handle_event(&event("u1", 1, "hi"), Channel::Platform).await.unwrap();
    gw.handle_event(&event("u1", 2, "3"), Channel::Platform).await.unwrap();
    let again = gw.handle_event(&event("u1", 2, "3"), Channel::Platform).await.unwrap();
    assert_eq!(again, Handled::Duplicate);
    gw.outbox().flush().await;
    let session = gw.store().session("u1").unwrap();
    assert_eq!(session.cursor.phase, Phase::Tipi);
    assert_eq!(session.cursor.index, 0);
    let transcript = gw.transcript(session.session_id).unwrap();
    assert_eq!(transcript.entries.iter().filter(|e| e.seq.is_none()).count(), 2);
}

#[tokio::test]
async fn payload_wins_over_text() {
    let t = Arc::new(RecordingTransport::default());
    let gw = in_memory_gateway(None, t.clone());
    gw.handle_event(&event("u1", 1, "hi"), Channel::Platform).await.unwrap();
    let mut ev = event("u1", 2, "English please");
    ev.quick_reply_payload = Some("1".into());
    gw.handle_event(&ev, Channel::Platform).await.unwrap();
    assert_eq!(gw.store().session("u1").unwrap().locale.map(|l| l.code()), Some("pl"));
}

#[tokio::test]
async fn denied_profile_still_starts_a_session() {
    let t = Arc::new(RecordingTransport::default());
    let gw = in_memory_gateway(Some(Arc::new(DeniedProfiles)), t.clone());
    let h = gw.handle_event(&event("u1", 1, "hi"), Channel::Platform).await.unwrap();
    let Handled::Processed { session_id, .. } = h else { panic!("{h:?}") };
    let r = gw.store().record(session_id).unwrap();
    assert!(r.first_name.is_none() && r.gender.is_none() && r.timezone.is_none());
}

#[tokio::test]
async fn finalized_session_gets_survey_complete() {
    let t = Arc::new(RecordingTransport::default());
    let gw = in_memory_gateway(None, t.clone());
    let mut ts = 0;
    let mut send = |text: &str| {
        ts += 1;
        event("u1", ts, text)
    };
    let script: Vec<&str> = ["hi", "3"]
        .into_iter()
        .chain(std::iter::repeat_n("4", 10))
        .chain(["no"])
        .chain(std::iter::repeat_n("3", 10))
        .chain(["1", "1", "1"])
        .collect();
    for text in script {
        gw.handle_event(&send(text), Channel::Platform).await.unwrap();
    }
    let s = gw.store().session("u1").unwrap();
    assert!(s.finalized);
    let r = gw.store().record(s.session_id).unwrap();
    assert!(r.finalized);
    assert_eq!(r.traits, [Some(4.0); 5]);
    assert_eq!(r.employed, Some(false));
    gw.handle_event(&send("hello?"), Channel::Platform).await.unwrap();
    gw.outbox().flush().await;
    let last = t.sent().pop().unwrap();
    assert_eq!(last.utterance.key, "survey.complete");
    assert_eq!(gw.store().records().len(), 1);
}

#[tokio::test]
async fn event_without_text_is_ignored() {
    let t = Arc::new(RecordingTransport::default());
    let gw = in_memory_gateway(None, t.clone());
    let mut ev = event("u1", 1, "");
    ev.message_text = None;
    assert_eq!(gw.handle_event(&ev, Channel::Platform).await.unwrap(), Handled::Ignored);
    assert!(gw.store().records().is_empty());
}
