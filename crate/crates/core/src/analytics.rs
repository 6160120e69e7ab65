//! Descriptive statistics, the pooled two-sample t-test, SUS summaries by
//! group and demographic breakdowns over exported records.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::persistence::SessionRecord;
use crate::scoring::BenchmarkFlag;

pub const NO_DATA: &str = "No data";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("need at least {needed} values, got {found}")]
    TooFew { needed: usize, found: usize },
}

impl AnalyticsError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalyticsError::TooFew { .. } => "TOO_FEW",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GroupStats {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn descriptive(values: &[f64]) -> Result<GroupStats, AnalyticsError> {
    if values.len() < 2 {
        return Err(AnalyticsError::TooFew {
            needed: 2,
            found: values.len(),
        });
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    Ok(GroupStats {
        n: values.len(),
        mean: m,
        sd: (ss / (values.len() - 1) as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: usize,
    /// Two-tailed, alpha = 0.05.
    pub significant_at_05: bool,
}

impl fmt::Display for TTestResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.significant_at_05 { "p < 0.05" } else { "p > 0.05" };
        write!(f, "t({}) = {:.3}; {p}", self.df, self.t)
    }
}

/// Two-tailed 0.05 critical values of Student's t for df = 1..=30.
const T_CRIT_05: [f64; 30] = [
    12.7062, 4.3027, 3.1824, 2.7764, 2.5706, 2.4469, 2.3646, 2.3060, 2.2622, 2.2281, 2.2010,
    2.1788, 2.1604, 2.1448, 2.1314, 2.1199, 2.1098, 2.1009, 2.0930, 2.0860, 2.0796, 2.0739,
    2.0687, 2.0639, 2.0595, 2.0555, 2.0518, 2.0484, 2.0452, 2.0423,
];

/// Upper 0.975 quantile of the standard normal.
const Z_975: f64 = 1.959_963_984_540_054;

/// Two-tailed 0.05 critical value of Student's t.
///
/// Looked up in a four-decimal table for df <= 30. Above that, the
/// Cornish-Fisher expansion of the t quantile around the normal quantile,
/// truncated after the 1/df^4 term, is accurate to better than 1e-5.
pub fn critical_value_05(df: usize) -> f64 {
    assert!(df >= 1, "df must be positive");
    if df <= T_CRIT_05.len() {
        return T_CRIT_05[df - 1];
    }
    let z = Z_975;
    let v = df as f64;
    let z3 = z.powi(3);
    let z5 = z.powi(5);
    let z7 = z.powi(7);
    let z9 = z.powi(9);
    z + (z3 + z) / (4.0 * v)
        + (5.0 * z5 + 16.0 * z3 + 3.0 * z) / (96.0 * v.powi(2))
        + (3.0 * z7 + 19.0 * z5 + 17.0 * z3 - 15.0 * z) / (384.0 * v.powi(3))
        + (79.0 * z9 + 776.0 * z7 + 1482.0 * z5 - 1920.0 * z3 - 945.0 * z) / (92160.0 * v.powi(4))
}

/// Pooled-variance Student t-test from summary statistics.
pub fn student_t_independent(a: &GroupStats, b: &GroupStats) -> Result<TTestResult, AnalyticsError> {
    for g in [a, b] {
        if g.n < 2 {
            return Err(AnalyticsError::TooFew { needed: 2, found: g.n });
        }
    }
    let (n1, n2) = (a.n as f64, b.n as f64);
    let df = a.n + b.n - 2;
    let sp2 = ((n1 - 1.0) * a.sd.powi(2) + (n2 - 1.0) * b.sd.powi(2)) / df as f64;
    let diff = a.mean - b.mean;
    let se = (sp2 * (1.0 / n1 + 1.0 / n2)).sqrt();
    let t = if diff == 0.0 { 0.0 } else { diff / se };
    Ok(TTestResult {
        t,
        df,
        significant_at_05: t.abs() > critical_value_05(df),
    })
}

pub fn student_t_raw(a: &[f64], b: &[f64]) -> Result<TTestResult, AnalyticsError> {
    student_t_independent(&descriptive(a)?, &descriptive(b)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKey {
    Device,
    Immigrant,
}

impl GroupKey {
    fn label(self, r: &SessionRecord) -> String {
        let label = match self {
            GroupKey::Device => r.device.map(|d| d.label().to_string()),
            GroupKey::Immigrant => r.immigrant.map(|b| yes_no(b).to_string()),
        };
        label.unwrap_or_else(|| NO_DATA.to_string())
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "Yes"
    } else {
        "No"
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SusRow {
    pub group: String,
    pub n: usize,
    pub mean: f64,
    /// Absent for single-record groups.
    pub sd: Option<f64>,
    pub flag: BenchmarkFlag,
}

/// SUS score summary per group over records with all ten SUS answers.
/// Groups are sorted by label, with the "No data" group last.
pub fn sus_summary(records: &[SessionRecord], key: GroupKey) -> Vec<SusRow> {
    let mut groups: BTreeMap<(bool, String), Vec<f64>> = BTreeMap::new();
    for r in records {
        if let Some(score) = r.sus_score() {
            let label = key.label(r);
            groups
                .entry((label == NO_DATA, label))
                .or_default()
                .push(score.value());
        }
    }
    groups
        .into_iter()
        .map(|((_, group), values)| {
            let m = mean(&values);
            SusRow {
                group,
                n: values.len(),
                mean: m,
                sd: descriptive(&values).ok().map(|s| s.sd),
                flag: BenchmarkFlag::of(m),
            }
        })
        .collect()
}

/// The demographic attributes tabulated for one participant.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Demographics {
    pub nationality: Option<String>,
    pub country_of_birth: Option<String>,
    pub gender: Option<String>,
    pub device: Option<String>,
    pub immigrant: Option<String>,
}

impl Demographics {
    /// Records carry no nationality; the profile hometown stands in for the
    /// country of birth.
    pub fn from_record(r: &SessionRecord) -> Self {
        Self {
            nationality: None,
            country_of_birth: r.hometown.clone(),
            gender: r.gender.clone(),
            device: r.device.map(|d| d.label().to_string()),
            immigrant: r.immigrant.map(|b| yes_no(b).to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryCount {
    pub label: String,
    pub count: usize,
    /// Share of all participants, rounded to one decimal.
    pub percent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldBreakdown {
    pub field: &'static str,
    pub rows: Vec<CategoryCount>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemographicsTable {
    pub n: usize,
    pub fields: Vec<FieldBreakdown>,
}

impl DemographicsTable {
    pub fn field(&self, name: &str) -> Option<&FieldBreakdown> {
        self.fields.iter().find(|f| f.field == name)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record(["Field", "Category", "N", "%"]);
        for f in &self.fields {
            for row in &f.rows {
                let _ = w.write_record([
                    f.field.to_string(),
                    row.label.clone(),
                    row.count.to_string(),
                    format!("{:.1}", row.percent),
                ]);
            }
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}

impl fmt::Display for DemographicsTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .fields
            .iter()
            .flat_map(|fb| fb.rows.iter().map(|r| r.label.chars().count()))
            .max()
            .unwrap_or(0)
            .max(8);
        writeln!(f, "N = {}", self.n)?;
        for fb in &self.fields {
            writeln!(f, "{}", fb.field)?;
            for r in &fb.rows {
                writeln!(f, "  {:<width$}  {:>4}  {:>5.1}", r.label, r.count, r.percent)?;
            }
        }
        Ok(())
    }
}

fn breakdown(field: &'static str, values: impl Iterator<Item = Option<String>>, n: usize) -> FieldBreakdown {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut missing = 0;
    for v in values {
        match v.filter(|s| !s.trim().is_empty()) {
            Some(s) => *counts.entry(s).or_default() += 1,
            None => missing += 1,
        }
    }
    let pct = |c: usize| ((c as f64 / n as f64) * 1000.0).round() / 10.0;
    let mut rows: Vec<CategoryCount> = counts
        .into_iter()
        .map(|(label, count)| CategoryCount {
            label,
            count,
            percent: pct(count),
        })
        .collect();
    // stable sort keeps labels alphabetical within equal counts
    rows.sort_by(|a, b| b.count.cmp(&a.count));
    if missing > 0 {
        rows.push(CategoryCount {
            label: NO_DATA.into(),
            count: missing,
            percent: pct(missing),
        });
    }
    FieldBreakdown { field, rows }
}

/// Counts and percentages per category for each demographic field.
pub fn demographics_table(rows: &[Demographics]) -> DemographicsTable {
    let n = rows.len();
    let fields = vec![
        breakdown("Nationality", rows.iter().map(|r| r.nationality.clone()), n),
        breakdown("Country of birth", rows.iter().map(|r| r.country_of_birth.clone()), n),
        breakdown("Gender", rows.iter().map(|r| r.gender.clone()), n),
        breakdown("Device", rows.iter().map(|r| r.device.clone()), n),
        breakdown("Immigrant", rows.iter().map(|r| r.immigrant.clone()), n),
    ];
    DemographicsTable { n, fields }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptive_examples() {
        let s = descriptive(&[3.0, 3.0, 3.0]).unwrap();
        assert_eq!((s.n, s.mean, s.sd), (3, 3.0, 0.0));
        let s = descriptive(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!((s.mean, s.sd), (2.0, 1.0));
        assert_eq!(descriptive(&[]).unwrap_err().code(), "TOO_FEW");
        assert_eq!(descriptive(&[1.0]).unwrap_err().code(), "TOO_FEW");
    }

    #[test]
    fn identical_groups_give_zero() {
        let r = student_t_raw(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.t, 0.0);
        assert_eq!(r.df, 4);
        assert!(!r.significant_at_05);
    }

    #[test]
    fn constant_identical_groups_give_zero() {
        let r = student_t_raw(&[2.0, 2.0], &[2.0, 2.0]).unwrap();
        assert_eq!(r.t, 0.0);
    }

    #[test]
    fn critical_value_continuity_at_table_edge() {
        // the series at df = 30 should agree with the table entry
        let z = critical_value_05(31);
        assert!(z < critical_value_05(30) && z > 2.03, "{z}");
        assert!((critical_value_05(51) - 2.008).abs() < 0.001);
        assert!((critical_value_05(100_000) - Z_975).abs() < 1e-4);
    }

    #[test]
    fn display_rounds_to_three_places() {
        let r = TTestResult {
            t: 1.01118,
            df: 51,
            significant_at_05: false,
        };
        assert_eq!(r.to_string(), "t(51) = 1.011; p > 0.05");
    }

    #[test]
    fn all_null_field_is_one_no_data_row() {
        let rows = vec![Demographics::default(); 4];
        let t = demographics_table(&rows);
        let g = t.field("Gender").unwrap();
        assert_eq!(g.rows.len(), 1);
        assert_eq!(g.rows[0].label, NO_DATA);
        assert_eq!(g.rows[0].percent, 100.0);
    }
}
