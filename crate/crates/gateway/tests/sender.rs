use std::sync::Arc;
use std::time::Duration;

use migbot_core::localization::Utterance;
use migbot_core::message::{MessageKind, OutboundMessage};
use migbot_gateway::sender::{Outbox, SenderConfig};
use migbot_gateway::testing::RecordingTransport;

fn msg(user: &str, seq: u64) -> OutboundMessage {
    OutboundMessage {
        recipient_id: user.into(),
        seq,
        text: format!("message {seq}"),
        kind: MessageKind::Statement,
        quick_replies: vec![],
        utterance: Utterance::new("x"),
        part: 0,
        end_of_batch: false,
    }
}

fn cfg(delay_ms: u64) -> SenderConfig {
    SenderConfig {
        delay: Duration::from_millis(delay_ms),
        retries: 3,
        backoff: Duration::from_millis(5),
    }
}

fn seqs(t: &RecordingTransport) -> Vec<u64> {
    t.sent().iter().map(|m| m.seq).collect()
}

#[tokio::test]
async fn batch_is_sent_in_order() {
    let t = Arc::new(RecordingTransport::with_latency(Duration::from_millis(1)));
    let outbox = Outbox::new(cfg(0));
    outbox.enqueue(t.clone(), vec![msg("u", 5), msg("u", 6), msg("u", 7)]);
    outbox.flush().await;
    assert_eq!(seqs(&t), [5, 6, 7]);
}

#[tokio::test]
async fn transient_failure_is_retried_without_overtaking() {
    let t = Arc::new(RecordingTransport::default());
    t.fail("u", 6, 2);
    let outbox = Outbox::new(cfg(0));
    outbox.enqueue(t.clone(), vec![msg("u", 5), msg("u", 6), msg("u", 7)]);
    outbox.flush().await;
    assert_eq!(seqs(&t), [5, 6, 7]);
    let attempts: Vec<u64> = t.attempts().iter().map(|a| a.1).collect();
    assert_eq!(attempts, [5, 6, 6, 6, 7]);
    assert!(outbox.needs_attention().is_empty());
}

#[tokio::test]
async fn persistent_failure_parks_the_rest_in_order() {
    let t = Arc::new(RecordingTransport::default());
    t.fail("u", 6, 10);
    let outbox = Outbox::new(cfg(0));
    outbox.enqueue(t.clone(), vec![msg("u", 5), msg("u", 6), msg("u", 7)]);
    outbox.enqueue(t.clone(), vec![msg("u", 8)]);
    outbox.enqueue(t.clone(), vec![msg("v", 1)]);
    outbox.flush().await;
    assert_eq!(seqs(&t), [5, 1]);
    // one attempt plus three retries
    assert_eq!(t.attempts().iter().filter(|a| a.1 == 6).count(), 4);
    let parked = outbox.needs_attention();
    assert_eq!(parked.len(), 1);
    assert_eq!(parked[0].0, "u");
    assert_eq!(parked[0].1.iter().map(|m| m.seq).collect::<Vec<_>>(), [6, 7, 8]);

    t.fail("u", 6, 0);
    assert_eq!(outbox.resume("u", t.clone()), 3);
    outbox.flush().await;
    let to_u: Vec<u64> = t.sent().iter().filter(|m| m.recipient_id == "u").map(|m| m.seq).collect();
    assert_eq!(to_u, [5, 6, 7, 8]);
}

#[tokio::test]
async fn delay_spaces_out_sends() {
    let t = Arc::new(RecordingTransport::default());
    let outbox = Outbox::new(cfg(60));
    outbox.enqueue(t.clone(), vec![msg("u", 1), msg("u", 2), msg("u", 3)]);
    outbox.flush().await;
    let log = outbox.deliveries();
    assert_eq!(log.len(), 3);
    for pair in log.windows(2) {
        assert!(pair[1].at - pair[0].at >= Duration::from_millis(60));
    }
}

#[tokio::test]
async fn recipients_do_not_wait_for_each_other() {
    let t = Arc::new(RecordingTransport::default());
    let outbox = Outbox::new(cfg(50));
    outbox.enqueue(t.clone(), vec![msg("a", 1), msg("a", 2)]);
    outbox.enqueue(t.clone(), vec![msg("b", 1), msg("b", 2)]);
    let start = tokio::time::Instant::now();
    outbox.flush().await;
    // two paced pairs in parallel take about one delay, not three
    assert!(start.elapsed() < Duration::from_millis(140));
}
