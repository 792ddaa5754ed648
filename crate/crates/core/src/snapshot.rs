//! Line-oriented corpus snapshot, version 1.
//!
//! ```text
//! foldcons-corpus 1
//! users <n>
//! <name>            n lines, line k names user id k
//! items <n>
//! <name>
//! tags <n>
//! <name>
//! triples <n>
//! <user>\t<item>\t<tag>   n lines of decimal ids
//! ```
//!
//! Names escape `\` as `\\`, tab as `\t`, newline as `\n` and carriage
//! return as `\r`. The file is UTF-8 and ends with a newline. Writing the
//! same corpus always produces the same bytes.

use std::io::{BufRead, Write};

use crate::corpus::{Corpus, Triple};
use crate::error::{Error, Result};
use crate::ids::{Dictionary, Interner};

const HEADER: &str = "foldcons-corpus 1";

fn escape(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for c in name.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\t' => out.push_str("\\t"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn unescape(line: &str, line_no: usize) -> Result<String> {
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            other => {
                return Err(Error::Snapshot(format!(
                    "line {line_no}: bad escape {other:?}"
                )));
            }
        }
    }
    Ok(out)
}

pub fn write_snapshot<W: Write>(corpus: &Corpus, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    let dict = &corpus.dictionary;
    for (section, interner) in [
        ("users", &dict.users),
        ("items", &dict.items),
        ("tags", &dict.tags),
    ] {
        writeln!(out, "{section} {}", interner.len())?;
        for name in interner.names() {
            writeln!(out, "{}", escape(name))?;
        }
    }
    writeln!(out, "triples {}", corpus.triples.len())?;
    for t in &corpus.triples {
        writeln!(out, "{}\t{}\t{}", t.user, t.item, t.tag)?;
    }
    out.flush()?;
    Ok(())
}

struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        self.line_no += 1;
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(Error::Snapshot(format!(
                "unexpected end of file at line {}",
                self.line_no
            ))),
        }
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let line = self.next_line()?;
        line.strip_prefix(name)
            .and_then(|rest| rest.strip_prefix(' '))
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| {
                Error::Snapshot(format!(
                    "line {}: expected '{name} <count>', found '{line}'",
                    self.line_no
                ))
            })
    }

    fn names(&mut self, section: &str) -> Result<Interner> {
        let n = self.section(section)?;
        let mut interner = Interner::new();
        for _ in 0..n {
            let name = unescape(&self.next_line()?, self.line_no)?;
            if interner.get(&name).is_some() {
                return Err(Error::Snapshot(format!(
                    "line {}: duplicate {section} name '{name}'",
                    self.line_no
                )));
            }
            interner.intern(&name);
        }
        Ok(interner)
    }
}

pub fn read_snapshot<R: BufRead>(input: R) -> Result<Corpus> {
    let mut lines = Lines {
        inner: input.lines(),
        line_no: 0,
    };
    let header = lines.next_line()?;
    if header != HEADER {
        return Err(Error::Snapshot(format!("unsupported header '{header}'")));
    }
    let dictionary = Dictionary {
        users: lines.names("users")?,
        items: lines.names("items")?,
        tags: lines.names("tags")?,
    };
    let n = lines.section("triples")?;
    let bounds = [
        dictionary.users.len(),
        dictionary.items.len(),
        dictionary.tags.len(),
    ];
    let mut triples = Vec::with_capacity(n);
    for _ in 0..n {
        let line = lines.next_line()?;
        let ids: Vec<u32> = line
            .split('\t')
            .map(|f| f.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| {
                Error::Snapshot(format!("line {}: malformed triple '{line}'", lines.line_no))
            })?;
        if ids.len() != 3
            || ids
                .iter()
                .zip(bounds)
                .any(|(&id, bound)| id as usize >= bound)
        {
            return Err(Error::Snapshot(format!(
                "line {}: triple '{line}' out of range",
                lines.line_no
            )));
        }
        triples.push(Triple::new(ids[0], ids[1], ids[2]));
    }
    if let Some(extra) = lines.inner.next() {
        let extra = extra?;
        if !extra.is_empty() {
            return Err(Error::Snapshot(format!("trailing content '{extra}'")));
        }
    }
    Ok(Corpus {
        dictionary,
        triples,
    })
}
