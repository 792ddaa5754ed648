use std::collections::HashSet;
use std::io::BufRead;

use super::Triple;
use crate::error::{Error, Result};
use crate::ids::Dictionary;

/// Column layout of a delimiter-separated tag assignment dump.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DatasetFormatConfig {
    pub user_col: usize,
    pub item_col: usize,
    pub tag_col: usize,
    pub delimiter: char,
    pub header: bool,
    pub lowercase_tags: bool,
}

impl Default for DatasetFormatConfig {
    fn default() -> Self {
        DatasetFormatConfig {
            user_col: 0,
            item_col: 1,
            tag_col: 2,
            delimiter: '\t',
            header: false,
            lowercase_tags: true,
        }
    }
}

impl DatasetFormatConfig {
    /// HetRec 2011 `user_taggedbookmarks.dat` / `user_taggedartists.dat` /
    /// `user_taggedmovies.dat`: `userID itemID tagID ...` with a header row.
    pub fn hetrec() -> Self {
        DatasetFormatConfig {
            header: true,
            ..Default::default()
        }
    }

    /// BibSonomy `tas` dumps: `user tag content_id content_type date`.
    pub fn bibsonomy_tas() -> Self {
        DatasetFormatConfig {
            user_col: 0,
            item_col: 2,
            tag_col: 1,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (u, i, t) = (self.user_col, self.item_col, self.tag_col);
        if u == i || u == t || i == t {
            return Err(Error::Config(format!(
                "column indices must be distinct (user={u}, item={i}, tag={t})"
            )));
        }
        Ok(())
    }

    fn min_columns(&self) -> usize {
        self.user_col.max(self.item_col).max(self.tag_col) + 1
    }
}

/// Result of parsing one source.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Parsed {
    /// Distinct triples in first-seen order.
    pub triples: Vec<Triple>,
    /// Data rows read, duplicates included.
    pub rows: usize,
    /// Rows dropped because they repeated an earlier triple.
    pub duplicates: usize,
}

/// Parses delimiter-separated rows into triples, interning names into `dict`.
///
/// Blank lines are skipped. Fields are trimmed; a row with too few columns
/// or an empty user/item/tag field is an error reported with its 1-based
/// line number.
pub fn parse_triples<R: BufRead>(
    source: R,
    cfg: &DatasetFormatConfig,
    dict: &mut Dictionary,
) -> Result<Parsed> {
    cfg.validate()?;
    let needed = cfg.min_columns();
    let mut out = Parsed::default();
    let mut seen = HashSet::new();
    for (n, line) in source.lines().enumerate() {
        let line_no = n + 1;
        let line = line?;
        if n == 0 && cfg.header {
            continue;
        }
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(cfg.delimiter).map(str::trim).collect();
        if fields.len() < needed {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected at least {needed} columns, found {}", fields.len()),
            });
        }
        let (user, item, tag) = (
            fields[cfg.user_col],
            fields[cfg.item_col],
            fields[cfg.tag_col],
        );
        for (what, value) in [("user", user), ("item", item), ("tag", tag)] {
            if value.is_empty() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("empty {what} field"),
                });
            }
        }
        let tag = if cfg.lowercase_tags {
            dict.tags.intern(&tag.to_lowercase())
        } else {
            dict.tags.intern(tag)
        };
        let triple = Triple::new(dict.users.intern(user), dict.items.intern(item), tag);
        out.rows += 1;
        if seen.insert(triple) {
            out.triples.push(triple);
        } else {
            out.duplicates += 1;
        }
    }
    Ok(out)
}
