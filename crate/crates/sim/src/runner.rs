//! Replays a script against a client and checks every expectation in order.

use std::collections::VecDeque;
use std::fmt;
use std::time::Duration;

use migbot_core::message::OutboundMessage;

use crate::client::{Client, ClientError, SendReceipt};
use crate::script::{Script, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailKind {
    Timeout,
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail {
        /// Zero-based index into the script's steps; `steps.len()` for the
        /// end-of-script finalization check.
        step: usize,
        kind: FailKind,
        expected: String,
        actual: String,
    },
}

#[derive(Debug, Clone)]
pub struct Run {
    pub user: String,
    pub verdict: Verdict,
    /// Every outbound message consumed, in order.
    pub log: Vec<OutboundMessage>,
    pub session_id: Option<u64>,
}

impl Run {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// The consumed messages as `(seq, text)` pairs; what determinism checks compare.
    pub fn texts(&self) -> Vec<(u64, String)> {
        self.log.iter().map(|m| (m.seq, m.text.clone())).collect()
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => f.write_str("PASS"),
            Verdict::Fail { step, kind, expected, actual } => {
                let kind = match kind {
                    FailKind::Timeout => "TIMEOUT",
                    FailKind::Mismatch => "MISMATCH",
                };
                write!(f, "FAIL {kind} at step {step}: expected {expected:?}, got {actual:?}")
            }
        }
    }
}

pub struct Runner<'a> {
    client: &'a dyn Client,
    user: String,
    wait: Duration,
    seen: u64,
    pending: VecDeque<OutboundMessage>,
    log: Vec<OutboundMessage>,
}

impl<'a> Runner<'a> {
    pub fn new(client: &'a dyn Client, user: impl Into<String>, wait: Duration) -> Self {
        Self {
            client,
            user: user.into(),
            wait,
            seen: 0,
            pending: VecDeque::new(),
            log: Vec::new(),
        }
    }

    async fn next(&mut self) -> Result<Option<OutboundMessage>, ClientError> {
        if self.pending.is_empty() {
            let got = self.client.poll(&self.user, self.seen, self.wait).await?;
            self.seen = got.iter().map(|m| m.seq).max().unwrap_or(self.seen);
            self.pending.extend(got);
        }
        Ok(self.pending.pop_front())
    }

    pub async fn run(mut self, script: &Script) -> Result<Run, ClientError> {
        let mut receipt = SendReceipt::default();
        let verdict = self.steps(script, &mut receipt).await?;
        Ok(Run {
            user: self.user,
            verdict,
            log: self.log,
            session_id: receipt.session_id,
        })
    }

    async fn steps(&mut self, script: &Script, receipt: &mut SendReceipt) -> Result<Verdict, ClientError> {
        for (i, step) in script.steps.iter().enumerate() {
            match step {
                Step::Send(text) => *receipt = self.client.send(&self.user, text).await?,
                Step::Expect(e) => {
                    let Some(msg) = self.next().await? else {
                        return Ok(fail(i, FailKind::Timeout, e.to_string(), String::new()));
                    };
                    let ok = e.matches(&msg.text);
                    let actual = msg.text.clone();
                    self.log.push(msg);
                    if !ok {
                        return Ok(fail(i, FailKind::Mismatch, e.to_string(), actual));
                    }
                }
                Step::BatchEnd => {
                    if !self.log.last().is_some_and(|m| m.end_of_batch) {
                        let actual = match self.next().await? {
                            Some(m) => m.text,
                            None => String::new(),
                        };
                        return Ok(fail(i, FailKind::Mismatch, "<end of batch>".into(), actual));
                    }
                }
            }
        }
        if script.expect_finalized && !receipt.finalized {
            return Ok(fail(script.steps.len(), FailKind::Mismatch, "finalized session".into(), "session still open".into()));
        }
        Ok(Verdict::Pass)
    }
}

fn fail(step: usize, kind: FailKind, expected: String, actual: String) -> Verdict {
    Verdict::Fail { step, kind, expected, actual }
}

/// Convenience wrapper around [`Runner`].
pub async fn run_script(client: &dyn Client, script: &Script, user: &str, wait: Duration) -> Result<Run, ClientError> {
    Runner::new(client, user, wait).run(script).await
}
