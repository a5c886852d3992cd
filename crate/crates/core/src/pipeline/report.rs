//! Text and JSON renderings of a [`ReportBundle`].
//!
//! Text tables are a projection of the JSON: every printed number is a field
//! of the bundle rounded to three decimals. Output depends only on the bundle.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::{ModelReport, ReportBundle};
use crate::ardl::{BoundsDecision, Estimate, Significance};
use crate::diagnostics::TestResult;
use crate::error::{Error, Result};
use crate::unitroot::{UnitRootBattery, UnitRootResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    Text,
    Json,
    #[default]
    Both,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "json" => Ok(ReportFormat::Json),
            "both" => Ok(ReportFormat::Both),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

pub const STAR_NOTE: &str = "***, **, and * indicate significance at the 1%, 5%, and 10% levels. \
Coefficients use two-sided p-values; the bounds F-statistic is starred by the tightest upper bound it exceeds; \
unit-root statistics by the tightest rejecting critical value. The same convention applies to every table.";

/// Three decimals; negative zero prints as zero.
pub fn fmt3(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

/// Two-sided p-value stars at 1%, 5%, 10%.
pub fn stars_for_p(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.10 {
        "*"
    } else {
        ""
    }
}

/// Stars for the tightest rejecting level, if any.
pub fn stars_for_level(level: Option<f64>) -> &'static str {
    match level {
        Some(l) if l <= 0.01 => "***",
        Some(l) if l <= 0.05 => "**",
        Some(_) => "*",
        None => "",
    }
}

fn decision_stars(d: BoundsDecision) -> &'static str {
    match d {
        BoundsDecision::Cointegrated(l) => stars_for_level(Some(l.value())),
        _ => "",
    }
}

fn estimate_cell(e: &Estimate) -> String {
    format!("{}{} ({})", fmt3(e.estimate), stars_for_p(e.pvalue), fmt3(e.stderr))
}

fn unit_root_cell(r: &UnitRootResult) -> String {
    format!("{}{}", fmt3(r.statistic), stars_for_level(r.strongest_rejection()))
}

fn pvalue_cell(t: &TestResult) -> String {
    fmt3(t.pvalue)
}

/// Aligned plain-text table: first column left, the rest right-aligned.
pub fn format_table(title: &str, header: &[String], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    table(&mut out, title, header, rows);
    out
}

fn table(out: &mut String, title: &str, header: &[String], rows: &[Vec<String>]) {
    let ncols = header.len();
    let mut width = vec![0; ncols];
    for row in std::iter::once(header).chain(rows.iter().map(Vec::as_slice)) {
        for (w, cell) in width.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: &[String]| {
        let mut s = String::new();
        for (j, w) in width.iter().enumerate() {
            let cell = cells.get(j).map(String::as_str).unwrap_or("");
            if j == 0 {
                let _ = write!(s, "{cell:<w$}");
            } else {
                let _ = write!(s, "  {cell:>w$}");
            }
        }
        s.trim_end().to_owned()
    };
    let total: usize = width.iter().sum::<usize>() + 2 * (ncols - 1);
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{}", "=".repeat(total));
    let _ = writeln!(out, "{}", line(header));
    let _ = writeln!(out, "{}", "-".repeat(total));
    for r in rows {
        let _ = writeln!(out, "{}", line(r));
    }
    let _ = writeln!(out);
}

fn strings(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn unit_root_table(out: &mut String, b: &ReportBundle, pick: fn(&super::UnitRootRow) -> &UnitRootBattery) {
    let Some(first) = b.unit_roots.first() else {
        return;
    };
    let header = strings(&[
        "Variable",
        "ADF level",
        "ADF 1st diff",
        "PP level",
        "PP 1st diff",
        "Order",
    ]);
    let rows: Vec<Vec<String>> = b
        .unit_roots
        .iter()
        .map(|row| {
            let u = pick(row);
            vec![
                row.variable.clone(),
                unit_root_cell(&u.adf_level),
                unit_root_cell(&u.adf_difference),
                unit_root_cell(&u.pp_level),
                unit_root_cell(&u.pp_difference),
                u.order.to_string(),
            ]
        })
        .collect();
    table(
        out,
        &format!("Unit root tests ({})", pick(first).spec.label()),
        &header,
        &rows,
    );
}

fn bounds_table(out: &mut String, b: &ReportBundle) {
    let mut header = strings(&["Model", "Lag order", "k", "F-statistic"]);
    for level in Significance::ALL {
        header.push(format!("{} I(0)", level.label()));
        header.push(format!("{} I(1)", level.label()));
    }
    header.push("Decision".into());
    let rows: Vec<Vec<String>> = b
        .models
        .iter()
        .map(|m| {
            let r = &m.bounds;
            let mut row = vec![
                m.name.clone(),
                m.spec.order_label(),
                r.k.to_string(),
                format!("{}{}", fmt3(r.fstat), decision_stars(r.decision)),
            ];
            for level in Significance::ALL {
                match r.band(level) {
                    Some(band) => {
                        row.push(fmt3(band.lower));
                        row.push(fmt3(band.upper));
                    }
                    None => row.extend(["".into(), "".into()]),
                }
            }
            row.push(r.decision.to_string());
            row
        })
        .collect();
    let case = b.models.first().map(|m| m.bounds.case.label()).unwrap_or("");
    table(out, &format!("ARDL bounds test ({case})"), &header, &rows);
}

/// Row labels in order of first appearance across models.
fn union_names<'a>(models: &'a [ModelReport], pick: fn(&'a ModelReport) -> &'a [Estimate]) -> Vec<&'a str> {
    let mut names: Vec<&str> = Vec::new();
    for m in models {
        for e in pick(m) {
            if !names.contains(&e.name.as_str()) {
                names.push(&e.name);
            }
        }
    }
    names
}

fn coefficient_table(out: &mut String, b: &ReportBundle) {
    let mut header = vec!["".to_owned()];
    header.extend(b.models.iter().map(|m| m.name.clone()));
    let blank = || vec![String::new(); b.models.len()];
    let section = |label: &str| {
        let mut r = vec![label.to_owned()];
        r.extend(blank());
        r
    };
    let estimate_rows = |rows: &mut Vec<Vec<String>>, names: &[&str], pick: fn(&ModelReport) -> &[Estimate]| {
        for name in names {
            let mut r = vec![format!("  {name}")];
            for m in &b.models {
                r.push(
                    pick(m)
                        .iter()
                        .find(|e| e.name == *name)
                        .map(estimate_cell)
                        .unwrap_or_default(),
                );
            }
            rows.push(r);
        }
    };

    let mut rows = vec![section("Short-run")];
    estimate_rows(&mut rows, &union_names(&b.models, |m| &m.short_run), |m| &m.short_run);
    let mut ect = vec!["  ECT(-1)".to_owned()];
    ect.extend(b.models.iter().map(|m| estimate_cell(&m.ect)));
    rows.push(ect);

    rows.push(section("Long-run"));
    estimate_rows(&mut rows, &union_names(&b.models, |m| &m.long_run), |m| &m.long_run);
    let mut c = vec!["  C".to_owned()];
    c.extend(b.models.iter().map(|m| estimate_cell(&m.constant)));
    rows.push(c);

    rows.push(section("Diagnostics (p-values)"));
    let diag: [(&str, fn(&ModelReport) -> String); 6] = [
        ("  Serial correlation", |m| {
            pvalue_cell(&m.diagnostics.serial_correlation)
        }),
        ("  Heteroscedasticity", |m| {
            pvalue_cell(&m.diagnostics.heteroscedasticity)
        }),
        ("  Normality", |m| pvalue_cell(&m.diagnostics.normality)),
        ("  Functional form", |m| pvalue_cell(&m.diagnostics.functional_form)),
        ("  CUSUM", |m| stable_label(m.diagnostics.cusum.stable)),
        ("  CUSUMSQ", |m| stable_label(m.diagnostics.cusumsq.stable)),
    ];
    for (label, f) in diag {
        let mut r = vec![label.to_owned()];
        r.extend(b.models.iter().map(f));
        rows.push(r);
    }
    let mut r2 = vec!["  R-squared".to_owned()];
    r2.extend(b.models.iter().map(|m| fmt3(m.r2)));
    rows.push(r2);

    table(
        out,
        "Short- and long-run estimates (standard errors in parentheses)",
        &header,
        &rows,
    );
}

fn stable_label(stable: bool) -> String {
    if stable { "Stable" } else { "Unstable" }.to_owned()
}

pub fn render_text(b: &ReportBundle) -> String {
    let mut out = String::new();
    let (first, last) = b.sample;
    let _ = writeln!(
        out,
        "{} ARDL report\nSample: {first}-{last} ({} observations)\nSeed: {}\nStrict: {}\n",
        b.index.model.name,
        last - first + 1,
        b.seed,
        if b.strict { "yes" } else { "no" }
    );

    let idx = &b.index.model;
    let rows: Vec<Vec<String>> = idx
        .indicators()
        .zip(&idx.loadings)
        .map(|(n, l)| vec![n.to_owned(), fmt3(*l)])
        .collect();
    table(
        &mut out,
        &format!("{} first-component loadings", idx.name),
        &strings(&["Indicator", "Loading"]),
        &rows,
    );
    let rows: Vec<Vec<String>> = idx
        .eigenvalues
        .iter()
        .zip(&idx.explained_variance_ratio)
        .enumerate()
        .map(|(i, (e, r))| vec![format!("PC{}", i + 1), fmt3(*e), fmt3(*r)])
        .collect();
    table(
        &mut out,
        "Principal components",
        &strings(&["Component", "Eigenvalue", "Share"]),
        &rows,
    );

    let rows: Vec<Vec<String>> = b
        .descriptives
        .iter()
        .map(|d| {
            vec![
                d.variable.clone(),
                d.nobs.to_string(),
                fmt3(d.mean),
                fmt3(d.median),
                fmt3(d.min),
                fmt3(d.max),
                fmt3(d.sd),
            ]
        })
        .collect();
    table(
        &mut out,
        "Descriptive statistics",
        &strings(&["Variable", "Obs", "Mean", "Median", "Min", "Max", "SD"]),
        &rows,
    );

    unit_root_table(&mut out, b, |r| &r.intercept);
    unit_root_table(&mut out, b, |r| &r.trend_and_intercept);
    bounds_table(&mut out, b);
    coefficient_table(&mut out, b);

    for m in &b.models {
        let _ = writeln!(
            out,
            "{}: {} on {}; ARDL{}; effective sample {}-{} ({} obs)",
            m.name,
            m.spec.dependent,
            m.spec.regressors.join(", "),
            m.spec.order_label(),
            m.sample.0,
            m.sample.1,
            m.nobs
        );
    }
    let _ = writeln!(out);
    for w in &b.warnings {
        let _ = writeln!(out, "Warning: {w}");
    }
    let _ = writeln!(out, "Note: {STAR_NOTE}");
    out
}

pub fn render_json(b: &ReportBundle) -> String {
    let mut s = serde_json::to_string_pretty(b).expect("bundle serialises");
    s.push('\n');
    s
}

/// File-name form of a model name: lowercase ASCII alphanumerics and `_`.
pub fn slug(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

fn write_file(path: PathBuf, body: &str) -> Result<PathBuf> {
    std::fs::write(&path, body).map_err(|e| Error::OutputDirNotWritable {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    Ok(path)
}

/// Writes `report.txt` and/or `report.json` plus per-model stability CSVs
/// under `stability/`. Returns the written paths in a fixed order.
pub fn render_report(b: &ReportBundle, format: ReportFormat, dir: &Path) -> Result<Vec<PathBuf>> {
    let stability = dir.join("stability");
    std::fs::create_dir_all(&stability).map_err(|e| Error::OutputDirNotWritable {
        path: dir.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut written = Vec::new();
    if matches!(format, ReportFormat::Text | ReportFormat::Both) {
        written.push(write_file(dir.join("report.txt"), &render_text(b))?);
    }
    if matches!(format, ReportFormat::Json | ReportFormat::Both) {
        written.push(write_file(dir.join("report.json"), &render_json(b))?);
    }
    for m in &b.models {
        let s = slug(&m.name);
        written.push(write_file(
            stability.join(format!("{s}_cusum.csv")),
            &m.diagnostics.cusum.to_csv(),
        )?);
        written.push(write_file(
            stability.join(format!("{s}_cusumsq.csv")),
            &m.diagnostics.cusumsq.to_csv(),
        )?);
    }
    Ok(written)
}
