//! JSON and Markdown rendering of card reports, plus plot-ready CSV files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cards::{CardId, CardStatus, FlagLevel, Statistic, SuiteReport, ValidityCardReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Markdown,
    #[default]
    Both,
}

impl OutputFormat {
    fn json(self) -> bool {
        matches!(self, Self::Json | Self::Both)
    }

    fn markdown(self) -> bool {
        matches!(self, Self::Markdown | Self::Both)
    }
}

/// Detail keys holding point lists; these go to CSV files, not Markdown.
const POINT_LISTS: [&str; 3] = ["ecdf_high", "ecdf_low", "scatter"];

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn display_name(name: &str) -> String {
    match name {
        "icc_2_1" => "ICC(2,1)".into(),
        "icc_2_k" => "ICC(2,k)".into(),
        "icc_3_1" => "ICC(3,1) (consistency)".into(),
        other => other.into(),
    }
}

fn num(v: f64) -> String {
    format!("{v:.4}")
}

fn interval(s: &Statistic) -> String {
    match (s.ci_lo, s.ci_hi) {
        (Some(lo), Some(hi)) => format!("[{}, {}]", num(lo), num(hi)),
        _ => String::new(),
    }
}

fn ordered_statistics(report: &ValidityCardReport) -> Vec<&str> {
    let required = report.card_id.required_statistics();
    let mut names: Vec<&str> = required.iter().copied().filter(|n| report.statistics.contains_key(*n)).collect();
    names.extend(report.statistics.keys().map(String::as_str).filter(|n| !required.contains(n)));
    names
}

/// One Markdown section for a card.
pub fn render_markdown(report: &ValidityCardReport) -> String {
    let mut out = String::new();
    let id = report.card_id;
    let status = match report.status {
        CardStatus::Complete => "complete",
        CardStatus::Unavailable => "unavailable",
        CardStatus::Error => "error",
    };
    let _ = writeln!(out, "## Card {}: {}\n", id.number(), id.title());
    let _ = writeln!(out, "Status: {status}\n");

    if !report.flags.is_empty() {
        let _ = writeln!(out, "### Flags\n");
        for f in &report.flags {
            let level = match f.level {
                FlagLevel::Warn => "WARN",
                FlagLevel::Fail => "FAIL",
            };
            let _ = writeln!(out, "- **{level}** {}", f.message);
        }
        out.push('\n');
    }

    if !report.statistics.is_empty() {
        let _ = writeln!(out, "### Statistics\n");
        let _ = writeln!(out, "| statistic | value | 95% CI |");
        let _ = writeln!(out, "|---|---|---|");
        for name in ordered_statistics(report) {
            let s = &report.statistics[name];
            let _ = writeln!(out, "| {} | {} | {} |", display_name(name), num(s.value), interval(s));
        }
        out.push('\n');
    }

    if !report.unavailable.is_empty() {
        let _ = writeln!(out, "### Unavailable\n");
        for (name, reason) in &report.unavailable {
            let _ = writeln!(out, "- {}: {reason}", display_name(name));
        }
        out.push('\n');
    }

    if !report.diagnostics.is_empty() {
        let _ = writeln!(out, "### Diagnostics\n");
        let _ = writeln!(out, "| diagnostic | value |");
        let _ = writeln!(out, "|---|---|");
        for (name, v) in &report.diagnostics {
            let _ = writeln!(out, "| {name} | {} |", num(*v));
        }
        out.push('\n');
    }

    let details: Vec<_> = report.details.iter().filter(|(k, _)| !POINT_LISTS.contains(&k.as_str())).collect();
    if !details.is_empty() {
        let _ = writeln!(out, "### Details\n");
        for (name, v) in details {
            match v {
                serde_json::Value::String(s) => {
                    let _ = writeln!(out, "- {name}: {s}");
                }
                other => {
                    let _ = writeln!(out, "- {name}: `{other}`");
                }
            }
        }
        out.push('\n');
    }
    if id == CardId::KnownGroups && report.details.contains_key("ecdf_high") {
        let _ = writeln!(out, "ECDF points: `card4_ecdf.csv`\n");
    }
    if id == CardId::Convergent && report.details.contains_key("scatter") {
        let _ = writeln!(out, "Scatter points: `card2_scatter.csv`\n");
    }
    out
}

pub fn render_suite_markdown(suite: &SuiteReport) -> String {
    let overall = match suite.overall {
        crate::cards::Overall::Pass => "pass",
        crate::cards::Overall::Warn => "warn",
        crate::cards::Overall::Fail => "fail",
    };
    let mut out = format!("# Validity Card suite\n\nOverall: {overall}\n\n");
    let _ = writeln!(out, "| card | status | flags |");
    let _ = writeln!(out, "|---|---|---|");
    for r in &suite.reports {
        let worst = match r.worst_flag() {
            Some(FlagLevel::Fail) => "fail",
            Some(FlagLevel::Warn) => "warn",
            None => "none",
        };
        let status = serde_json::to_value(r.status).expect("status serializes");
        let _ = writeln!(out, "| {} {} | {} | {worst} |", r.card_id.number(), r.card_id.title(), status.as_str().unwrap_or(""));
    }
    out.push('\n');
    for r in &suite.reports {
        out.push_str(&render_markdown(r));
    }
    out
}

fn points(v: Option<&serde_json::Value>) -> Vec<(f64, f64)> {
    v.and_then(|v| serde_json::from_value(v.clone()).ok()).unwrap_or_default()
}

/// `group,x,ecdf` rows for the known-groups card.
pub fn ecdf_csv(report: &ValidityCardReport) -> Option<String> {
    if !report.details.contains_key("ecdf_high") {
        return None;
    }
    let mut out = String::from("group,x,ecdf\n");
    for group in ["high", "low"] {
        for (x, f) in points(report.details.get(&format!("ecdf_{group}"))) {
            let _ = writeln!(out, "{group},{x},{f}");
        }
    }
    Some(out)
}

/// `proxy,gold` rows for the convergent card.
pub fn scatter_csv(report: &ValidityCardReport) -> Option<String> {
    let pts = report.details.get("scatter")?;
    let mut out = String::from("proxy,gold\n");
    for (x, y) in points(Some(pts)) {
        let _ = writeln!(out, "{x},{y}");
    }
    Some(out)
}

fn write(path: PathBuf, text: &str, written: &mut Vec<PathBuf>) -> Result<()> {
    fs::write(&path, text).map_err(|e| Error::Io { path: path.clone(), source: e })?;
    written.push(path);
    Ok(())
}

/// Writes `cardN.json` / `cardN.md` and any CSV side files; returns the
/// paths written.
pub fn write_card(dir: &Path, report: &ValidityCardReport, format: OutputFormat) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    let stem = report.card_id.to_string();
    let mut written = Vec::new();
    if format.json() {
        write(dir.join(format!("{stem}.json")), &to_json(report), &mut written)?;
    }
    if format.markdown() {
        write(dir.join(format!("{stem}.md")), &render_markdown(report), &mut written)?;
    }
    if let Some(csv) = ecdf_csv(report) {
        write(dir.join("card4_ecdf.csv"), &csv, &mut written)?;
    }
    if let Some(csv) = scatter_csv(report) {
        write(dir.join("card2_scatter.csv"), &csv, &mut written)?;
    }
    Ok(written)
}

/// Writes every card's files plus `suite.json` / `suite.md`.
pub fn write_suite(dir: &Path, suite: &SuiteReport, format: OutputFormat) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    for r in &suite.reports {
        written.extend(write_card(dir, r, format)?);
    }
    if format.json() {
        write(dir.join("suite.json"), &to_json(suite), &mut written)?;
    }
    if format.markdown() {
        write(dir.join("suite.md"), &render_suite_markdown(suite), &mut written)?;
    }
    Ok(written)
}
