//! Message catalogs for Polish, Ukrainian and English.
//!
//! Every user-visible text is addressed by a catalog key. The engine never
//! builds raw text; it emits [`Utterance`]s that are rendered here against the
//! session's locale. Resolution never falls back to another language.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Keys whose `<key>.trilingual` variant is composed from all three catalogs.
/// They are shown before the respondent has picked a language.
pub const TRILINGUAL_KEYS: &[&str] = &["greeting", "language.prompt", "language.reprompt"];

const TRILINGUAL_SUFFIX: &str = ".trilingual";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Locale {
    Pl,
    Uk,
    En,
}

impl Locale {
    /// Display order of the trilingual greeting.
    pub const ALL: [Locale; 3] = [Locale::Pl, Locale::Uk, Locale::En];

    pub fn code(self) -> &'static str {
        match self {
            Locale::Pl => "pl",
            Locale::Uk => "uk",
            Locale::En => "en",
        }
    }
}

impl fmt::Display for Locale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Locale {
    type Err = LocalizationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pl" => Ok(Locale::Pl),
            "uk" => Ok(Locale::Uk),
            "en" => Ok(Locale::En),
            other => Err(LocalizationError::UnknownLocale(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LocalizationError {
    #[error("unknown locale {0:?}")]
    UnknownLocale(String),
    #[error("unknown catalog key {key:?} for locale {locale}")]
    UnknownKey { locale: Locale, key: String },
    #[error("{locale} catalog, line {line}: {message}")]
    Parse {
        locale: Locale,
        line: usize,
        message: String,
    },
}

/// One missing or empty entry found by [`check_completeness`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct MissingEntry {
    pub locale: Locale,
    pub key: String,
}

impl fmt::Display for MissingEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.locale, self.key)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    locale: Locale,
    entries: BTreeMap<String, String>,
}

impl Catalog {
    pub fn new(locale: Locale, entries: BTreeMap<String, String>) -> Self {
        Self { locale, entries }
    }

    /// Parses the `key = value` catalog format.
    ///
    /// Blank lines and lines starting with `#` are skipped. The first `=`
    /// separates key from value; both are trimmed. `\n` in a value becomes a
    /// line break and `\\` a backslash.
    pub fn parse(locale: Locale, text: &str) -> Result<Self, LocalizationError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| LocalizationError::Parse {
                locale,
                line: idx + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err("expected `key = value`".to_string()))?;
            let key = key.trim();
            if key.is_empty() || key.chars().any(char::is_whitespace) {
                return Err(parse_err(format!("invalid key {key:?}")));
            }
            if entries
                .insert(key.to_string(), unescape(value.trim()))
                .is_some()
            {
                return Err(parse_err(format!("duplicate key {key:?}")));
            }
        }
        Ok(Self { locale, entries })
    }

    pub fn locale(&self) -> Locale {
        self.locale
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn unescape(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            Some(other) => {
                out.push('\\');
                out.push(other);
            }
            None => out.push('\\'),
        }
    }
    out
}

/// Reports every (locale, key) pair that is absent or empty in some catalog,
/// relative to the union of all keys. Empty iff the key sets are identical and
/// no value is blank.
pub fn check_completeness(catalogs: &[Catalog]) -> Vec<MissingEntry> {
    let all_keys: BTreeSet<&str> = catalogs.iter().flat_map(Catalog::keys).collect();
    let mut missing = Vec::new();
    for catalog in catalogs {
        for key in &all_keys {
            let present = catalog.get(key).is_some_and(|v| !v.trim().is_empty());
            if !present {
                missing.push(MissingEntry {
                    locale: catalog.locale,
                    key: key.to_string(),
                });
            }
        }
    }
    missing.sort();
    missing
}

/// An argument substituted into a `{name}` placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arg {
    /// Literal, language-neutral text such as a number.
    Text(String),
    /// Another catalog key, resolved in the same locale.
    Key(String),
    /// Several keys, resolved and joined with ", ".
    Keys(Vec<String>),
}

/// A localizable message: a catalog key plus placeholder arguments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Utterance {
    pub key: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub args: Vec<(String, Arg)>,
}

impl Utterance {
    pub fn new(key: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            args: Vec::new(),
        }
    }

    pub fn text(mut self, name: &str, value: impl ToString) -> Self {
        self.args.push((name.to_string(), Arg::Text(value.to_string())));
        self
    }

    pub fn key_arg(mut self, name: &str, key: impl Into<String>) -> Self {
        self.args.push((name.to_string(), Arg::Key(key.into())));
        self
    }

    pub fn keys_arg(mut self, name: &str, keys: Vec<String>) -> Self {
        self.args.push((name.to_string(), Arg::Keys(keys)));
        self
    }

    /// Every catalog key this utterance touches.
    pub fn referenced_keys(&self) -> Vec<&str> {
        let mut keys = vec![self.key.as_str()];
        for (_, arg) in &self.args {
            match arg {
                Arg::Text(_) => {}
                Arg::Key(k) => keys.push(k),
                Arg::Keys(ks) => keys.extend(ks.iter().map(String::as_str)),
            }
        }
        keys
    }
}

/// The three catalogs together, plus the composed trilingual entries.
#[derive(Debug, Clone)]
pub struct Catalogs {
    pl: Catalog,
    uk: Catalog,
    en: Catalog,
}

impl Catalogs {
    /// Builds the set without validating it; call [`Catalogs::validate`]
    /// before serving traffic.
    pub fn new(mut pl: Catalog, mut uk: Catalog, mut en: Catalog) -> Result<Self, LocalizationError> {
        for (catalog, expected) in [(&pl, Locale::Pl), (&uk, Locale::Uk), (&en, Locale::En)] {
            if catalog.locale != expected {
                return Err(LocalizationError::UnknownLocale(format!(
                    "{} catalog given where {} was expected",
                    catalog.locale, expected
                )));
            }
        }
        for base in TRILINGUAL_KEYS {
            let parts: Option<Vec<String>> = [&pl, &uk, &en]
                .iter()
                .map(|c| c.get(base).map(str::to_string))
                .collect();
            if let Some(parts) = parts {
                let composed = parts.join("\n\n");
                let key = format!("{base}{TRILINGUAL_SUFFIX}");
                for catalog in [&mut pl, &mut uk, &mut en] {
                    catalog.entries.insert(key.clone(), composed.clone());
                }
            }
        }
        Ok(Self { pl, uk, en })
    }

    pub fn parse(pl: &str, uk: &str, en: &str) -> Result<Self, LocalizationError> {
        Self::new(
            Catalog::parse(Locale::Pl, pl)?,
            Catalog::parse(Locale::Uk, uk)?,
            Catalog::parse(Locale::En, en)?,
        )
    }

    pub fn catalog(&self, locale: Locale) -> &Catalog {
        match locale {
            Locale::Pl => &self.pl,
            Locale::Uk => &self.uk,
            Locale::En => &self.en,
        }
    }

    pub fn validate(&self) -> Vec<MissingEntry> {
        check_completeness(&[self.pl.clone(), self.uk.clone(), self.en.clone()])
    }

    pub fn contains(&self, key: &str) -> bool {
        Locale::ALL.iter().all(|&l| self.catalog(l).get(key).is_some())
    }

    pub fn resolve(&self, key: &str, locale: Locale) -> Result<&str, LocalizationError> {
        self.catalog(locale)
            .get(key)
            .ok_or_else(|| LocalizationError::UnknownKey {
                locale,
                key: key.to_string(),
            })
    }

    pub fn render(&self, utterance: &Utterance, locale: Locale) -> Result<String, LocalizationError> {
        let template = self.resolve(&utterance.key, locale)?;
        let mut values = Vec::with_capacity(utterance.args.len());
        for (name, arg) in &utterance.args {
            let value = match arg {
                Arg::Text(t) => t.clone(),
                Arg::Key(k) => self.resolve(k, locale)?.to_string(),
                Arg::Keys(ks) => ks
                    .iter()
                    .map(|k| self.resolve(k, locale))
                    .collect::<Result<Vec<_>, _>>()?
                    .join(", "),
            };
            values.push((name.as_str(), value));
        }
        Ok(fill_placeholders(template, &values))
    }
}

fn fill_placeholders(template: &str, values: &[(&str, String)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                match values.iter().find(|(n, _)| *n == name) {
                    Some((_, v)) => out.push_str(v),
                    None => {
                        out.push('{');
                        out.push_str(name);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalogs(pl: &str, uk: &str, en: &str) -> Catalogs {
        Catalogs::parse(pl, uk, en).unwrap()
    }

    #[test]
    fn resolves_fallback_text_in_english() {
        let c = catalogs(
            "fallback.repeat = Nie rozumiem, proszę powtórzyć.",
            "fallback.repeat = Я не розумію, будь ласка, повтори.",
            "fallback.repeat = I do not understand, please repeat.",
        );
        assert_eq!(
            c.resolve("fallback.repeat", Locale::En).unwrap(),
            "I do not understand, please repeat."
        );
    }

    #[test]
    fn trilingual_greeting_is_identical_in_every_locale() {
        let c = catalogs("greeting = Cześć", "greeting = Привіт", "greeting = Hi");
        let texts: Vec<_> = Locale::ALL
            .iter()
            .map(|&l| c.resolve("greeting.trilingual", l).unwrap())
            .collect();
        assert_eq!(texts[0], "Cześć\n\nПривіт\n\nHi");
        assert!(texts.iter().all(|t| *t == texts[0]));
    }

    #[test]
    fn unknown_key_is_an_error() {
        let c = catalogs("a = 1", "a = 1", "a = 1");
        assert_eq!(
            c.resolve("nope", Locale::Pl),
            Err(LocalizationError::UnknownKey {
                locale: Locale::Pl,
                key: "nope".into()
            })
        );
    }

    #[test]
    fn completeness_of_identical_key_sets() {
        let c = catalogs("a = x\nb = y", "a = x\nb = y", "b = y\na = x");
        assert!(c.validate().is_empty());
    }

    #[test]
    fn completeness_reports_missing_key() {
        let c = catalogs("a = x\nb = y", "a = x\nb = y", "a = x");
        assert_eq!(
            c.validate(),
            vec![MissingEntry {
                locale: Locale::En,
                key: "b".into()
            }]
        );
    }

    #[test]
    fn completeness_reports_empty_value() {
        let c = catalogs("a = x", "a =", "a = x");
        assert_eq!(
            c.validate(),
            vec![MissingEntry {
                locale: Locale::Uk,
                key: "a".into()
            }]
        );
    }

    #[test]
    fn render_substitutes_text_and_keys() {
        let c = catalogs(
            "frame = {n}. {text}\nq = Pytanie\nl1 = A\nl2 = B\nlist = {items}",
            "frame = {n}. {text}\nq = Питання\nl1 = A\nl2 = B\nlist = {items}",
            "frame = {n}. {text}\nq = Question\nl1 = A\nl2 = B\nlist = {items}",
        );
        let u = Utterance::new("frame").text("n", 3).key_arg("text", "q");
        assert_eq!(c.render(&u, Locale::Uk).unwrap(), "3. Питання");
        let u = Utterance::new("list").keys_arg("items", vec!["l1".into(), "l2".into()]);
        assert_eq!(c.render(&u, Locale::En).unwrap(), "A, B");
    }

    #[test]
    fn unmatched_placeholder_is_left_alone() {
        assert_eq!(fill_placeholders("a {x} {y", &[("z", "1".into())]), "a {x} {y");
    }

    #[test]
    fn parse_rejects_duplicates_and_garbage() {
        let err = Catalog::parse(Locale::Pl, "a = 1\n\na = 2").unwrap_err();
        assert!(matches!(err, LocalizationError::Parse { line: 3, .. }));
        let err = Catalog::parse(Locale::Pl, "# c\nno separator").unwrap_err();
        assert!(matches!(err, LocalizationError::Parse { line: 2, .. }));
    }

    #[test]
    fn parse_unescapes_newlines() {
        let c = Catalog::parse(Locale::En, r"k = one\ntwo \\n").unwrap();
        assert_eq!(c.get("k"), Some("one\ntwo \\n"));
    }
}
