//! Builds a script from a list of inputs by recording what the gateway says.

use std::time::Duration;

use migbot_core::localization::Locale;

use crate::client::{Client, ClientError};
use crate::script::{Expectation, Script, Step};

/// Reads one input per line; blank lines and `#` comments are skipped.
pub fn parse_inputs(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

/// Sends each input, then waits for the batch it triggered to close.
pub async fn record(
    client: &dyn Client,
    user: &str,
    inputs: &[String],
    locale: Option<Locale>,
    wait: Duration,
) -> Result<Script, ClientError> {
    let mut script = Script {
        locale,
        ..Script::default()
    };
    let mut seen = 0;
    let mut finalized = false;
    for input in inputs {
        script.steps.push(Step::Send(input.clone()));
        finalized = client.send(user, input).await?.finalized;
        loop {
            let got = client.poll(user, seen, wait).await?;
            if got.is_empty() {
                break;
            }
            let mut closed = false;
            for m in got {
                seen = m.seq;
                script.steps.push(Step::Expect(Expectation::Exact(m.text)));
                if m.end_of_batch {
                    script.steps.push(Step::BatchEnd);
                    closed = true;
                }
            }
            if closed {
                break;
            }
        }
    }
    script.expect_finalized = finalized;
    Ok(script)
}
