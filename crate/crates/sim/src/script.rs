//! Transcript scripts.
//!
//! One step per line:
//!
//! ```text
//! @locale en              metadata
//! @profile {"first_name": "Anna"}
//! @finalized              the session must be finished after the last send
//! # comment
//! > text                  send as the simulated user
//! < text                  expect this exact message (`\n` for line breaks)
//! < /regex/               expect a message matching the pattern
//! <|                      the previous expected message closes its batch
//! ```

use std::fmt;

use migbot_core::localization::Locale;
use migbot_core::persistence::ProfileAttributes;
use regex::Regex;
use thiserror::Error;

#[derive(Debug, Clone)]
pub enum Expectation {
    Exact(String),
    Pattern(Regex),
}

impl Expectation {
    pub fn matches(&self, text: &str) -> bool {
        match self {
            Self::Exact(e) => e == text,
            Self::Pattern(r) => r.is_match(text),
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exact(e) => f.write_str(&escape(e)),
            Self::Pattern(r) => write!(f, "/{}/", r.as_str()),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Step {
    Send(String),
    Expect(Expectation),
    BatchEnd,
}

#[derive(Debug, Clone, Default)]
pub struct Script {
    pub steps: Vec<Step>,
    pub locale: Option<Locale>,
    pub profile: Option<ProfileAttributes>,
    pub expect_finalized: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    if out.starts_with('/') {
        out.insert(0, '\\');
    }
    out
}

fn unescape(text: &str) -> Result<String, String> {
    let mut out = String::with_capacity(text.len());
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some('/') => out.push('/'),
            other => return Err(format!("bad escape \\{}", other.map(String::from).unwrap_or_default())),
        }
    }
    Ok(out)
}

fn parse_locale(code: &str) -> Option<Locale> {
    Locale::ALL.into_iter().find(|l| l.code() == code)
}

pub fn parse(text: &str) -> Result<Script, ParseError> {
    let mut script = Script::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let err = |message: String| ParseError { line, message };
        let trimmed = raw.trim_end();
        if trimmed.trim().is_empty() || trimmed.starts_with('#') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('@') {
            let (name, value) = rest.split_once(' ').unwrap_or((rest, ""));
            let value = value.trim();
            match name {
                "locale" => {
                    script.locale =
                        Some(parse_locale(value).ok_or_else(|| err(format!("unknown locale {value:?}")))?)
                }
                "profile" => {
                    let v: serde_json::Value =
                        serde_json::from_str(value).map_err(|e| err(format!("profile: {e}")))?;
                    script.profile = Some(migbot_gateway::profile::parse_profile(&v));
                }
                "finalized" => script.expect_finalized = true,
                _ => return Err(err(format!("unknown directive @{name}"))),
            }
            continue;
        }
        if trimmed == "<|" {
            if !matches!(script.steps.last(), Some(Step::Expect(_))) {
                return Err(err("<| must follow an expectation".into()));
            }
            script.steps.push(Step::BatchEnd);
            continue;
        }
        let step = if let Some(rest) = trimmed.strip_prefix("> ") {
            Step::Send(unescape(rest).map_err(err)?)
        } else if let Some(rest) = trimmed.strip_prefix("< ") {
            if rest.len() >= 2 && rest.starts_with('/') && rest.ends_with('/') {
                let re = Regex::new(&rest[1..rest.len() - 1]).map_err(|e| err(e.to_string()))?;
                Step::Expect(Expectation::Pattern(re))
            } else {
                Step::Expect(Expectation::Exact(unescape(rest).map_err(err)?))
            }
        } else {
            return Err(err(format!("expected '> ', '< ', '<|', '@' or '#', found {trimmed:?}")));
        };
        if script.steps.is_empty() && !matches!(step, Step::Send(_)) {
            return Err(err("a script must start with a send".into()));
        }
        script.steps.push(step);
    }
    if script.steps.is_empty() {
        return Err(ParseError { line: 0, message: "empty script".into() });
    }
    Ok(script)
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.locale {
            writeln!(f, "@locale {}", l.code())?;
        }
        if self.expect_finalized {
            writeln!(f, "@finalized")?;
        }
        for step in &self.steps {
            match step {
                Step::Send(t) => writeln!(f, "> {}", escape(t))?,
                Step::Expect(e) => writeln!(f, "< {e}")?,
                Step::BatchEnd => writeln!(f, "<|")?,
            }
        }
        Ok(())
    }
}
