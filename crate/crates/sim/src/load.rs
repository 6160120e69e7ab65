//! Several simulated users running the same script at once.

use std::collections::BTreeMap;
use std::time::Duration;

use futures::future::join_all;

use crate::client::{Client, ClientError};
use crate::runner::{run_script, Run};
use crate::script::Script;

pub async fn run_concurrent(
    client: &dyn Client,
    script: &Script,
    users: &[String],
    wait: Duration,
) -> Result<Vec<Run>, ClientError> {
    let runs = users.iter().map(|u| run_script(client, script, u, wait));
    let mut out = Vec::with_capacity(users.len());
    // one task, so the clients interleave at every await
    for r in join_all(runs).await {
        out.push(r?);
    }
    Ok(out)
}

/// Checks that each recipient's sequence numbers run 1, 2, 3, ... in the order given.
pub fn check_gap_free<'a>(log: impl IntoIterator<Item = (&'a str, u64)>) -> Result<BTreeMap<&'a str, u64>, String> {
    let mut last: BTreeMap<&str, u64> = BTreeMap::new();
    for (user, seq) in log {
        let prev = last.entry(user).or_insert(0);
        if seq != *prev + 1 {
            return Err(format!("{user}: seq {seq} after {prev}"));
        }
        *prev = seq;
    }
    Ok(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gap_free_interleaving_is_accepted() {
        let log = [("a", 1), ("b", 1), ("a", 2), ("b", 2), ("a", 3)];
        let last = check_gap_free(log).unwrap();
        assert_eq!(last["a"], 3);
        assert_eq!(last["b"], 2);
    }

    #[test]
    fn gaps_and_reordering_are_caught() {
        assert!(check_gap_free([("a", 1), ("a", 3)]).is_err());
        assert!(check_gap_free([("a", 2), ("a", 1)]).is_err());
        assert!(check_gap_free([("a", 1), ("a", 1)]).is_err());
    }
}
