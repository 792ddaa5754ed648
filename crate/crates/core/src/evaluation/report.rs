//! Report rendering: CSV and aligned Markdown tables with a `key = value`
//! header block, and per-post records as JSON lines.

use serde_json::json;

use super::{EvalReport, StudyTable};
use crate::config::Settings;
use crate::error::{Error, Result};
use crate::ids::{Dictionary, TagId};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    /// Header lines are written as `# key = value` comments.
    pub fn to_csv(&self, header: &Settings) -> Result<String> {
        let mut out = String::new();
        for (k, v) in header.iter() {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let write = |w: &mut csv::Writer<Vec<u8>>| -> csv::Result<()> {
            w.write_record(&self.columns)?;
            for row in &self.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            Ok(())
        };
        write(&mut w).map_err(|e| Error::Io(std::io::Error::other(e)))?;
        let body = w
            .into_inner()
            .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        out.push_str(&String::from_utf8(body).expect("csv output is UTF-8"));
        Ok(out)
    }

    /// The header goes in a fenced block above the table. The first column
    /// is left-aligned, the others right-aligned.
    pub fn to_markdown(&self, header: &Settings) -> String {
        let mut out = String::new();
        if header.iter().next().is_some() {
            out.push_str("```text\n");
            out.push_str(&header.to_text());
            out.push_str("```\n\n");
        }
        let n = self.columns.len();
        let width = |c: usize| {
            std::iter::once(&self.columns[c])
                .chain(self.rows.iter().filter_map(|r| r.get(c)))
                .map(|s| s.chars().count())
                .max()
                .unwrap_or(0)
                .max(3)
        };
        let widths: Vec<usize> = (0..n).map(width).collect();
        let line = |cells: &[String]| {
            let mut s = String::from("|");
            for (c, w) in widths.iter().enumerate() {
                let cell = cells.get(c).map_or("", String::as_str);
                if c == 0 {
                    s.push_str(&format!(" {cell:<w$} |"));
                } else {
                    s.push_str(&format!(" {cell:>w$} |"));
                }
            }
            s.push('\n');
            s
        };
        out.push_str(&line(&self.columns));
        out.push('|');
        for (c, w) in widths.iter().enumerate() {
            if c == 0 {
                out.push_str(&format!(":{}|", "-".repeat(w + 1)));
            } else {
                out.push_str(&format!("{}:|", "-".repeat(w + 1)));
            }
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
        }
        out
    }
}

/// One F1 row per report and one gain row per non-base report, with a
/// column per cutoff.
pub fn report_table(base: &EvalReport, others: &[EvalReport]) -> Result<Table> {
    let mut columns = vec!["run".to_owned()];
    columns.extend(base.ks.iter().map(|k| format!("top-{k}")));
    let f1_row = |r: &EvalReport| {
        let mut row = vec![format!("{} f1", r.label)];
        row.extend(r.f1.iter().map(|f| format!("{f:.4}")));
        row
    };
    let mut rows = vec![f1_row(base)];
    for r in others {
        rows.push(f1_row(r));
    }
    for r in others {
        let mut row = vec![format!("{} gain (%)", r.label)];
        for &k in &base.ks {
            row.push(format!("{:.2}", super::gain(base, r, k)?));
        }
        rows.push(row);
    }
    Ok(Table { columns, rows })
}

/// Columns: the base F1 then one per study variant; rows: F1 and gain.
pub fn study_table(t: &StudyTable) -> Table {
    let mut columns = vec!["measure".to_owned(), "base".to_owned()];
    columns.extend(t.columns.iter().cloned());
    let f1 = |r: &EvalReport| format!("{:.4}", r.f1_at(t.k).unwrap_or(0.0));
    let mut f1_row = vec![format!("f1@{}", t.k), f1(&t.base)];
    f1_row.extend(t.variants.iter().map(f1));
    let mut gain_row = vec!["gain (%)".to_owned(), "-".to_owned()];
    gain_row.extend(t.gains.iter().map(|g| format!("{g:.2}")));
    Table {
        columns,
        rows: vec![f1_row, gain_row],
    }
}

/// One JSON object per recorded post. Tags, users and items are named when
/// a dictionary is given, otherwise written as ids.
pub fn posts_jsonl(report: &EvalReport, dict: Option<&Dictionary>) -> String {
    let tag = |t: &TagId| match dict {
        Some(d) => json!(d.tag_name(*t)),
        None => json!(t.0),
    };
    let mut out = String::new();
    for p in &report.records {
        let (user, item) = match dict {
            Some(d) => (json!(d.user_name(p.user)), json!(d.item_name(p.item))),
            None => (json!(p.user.0), json!(p.item.0)),
        };
        let cutoffs: Vec<_> = p
            .cutoffs
            .iter()
            .map(|c| {
                json!({
                    "k": c.k,
                    "recommended": c.recommended.iter().map(tag).collect::<Vec<_>>(),
                    "f1": c.f1,
                    "applied": c.applied,
                    "contribution": c.contribution,
                })
            })
            .collect();
        let line = json!({
            "run": report.label,
            "post": p.post,
            "user": user,
            "item": item,
            "truth": p.truth.iter().map(tag).collect::<Vec<_>>(),
            "unknown": p.unknown,
            "cutoffs": cutoffs,
        });
        out.push_str(&line.to_string());
        out.push('\n');
    }
    out
}
