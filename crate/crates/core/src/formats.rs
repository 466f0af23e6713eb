//! Text output formats for hit streams.
//!
//! * JSONL: one `{"n":<int>,"kind":"fib"|"lucas"}` object per line.
//! * OEIS b-file: `k a(k)` with 1-based `k`, ascending, no header.
//! * CSV pairs: header `n,t`, one row per pair.

use std::io::{self, Write};

use serde::Serialize;

use crate::scanner::{Hit, PairHit};

/// One compact JSON object per line.
pub fn write_jsonl<W: Write, T: Serialize>(mut w: W, items: &[T]) -> io::Result<()> {
    for item in items {
        write_json_line(&mut w, item)?;
    }
    Ok(())
}

pub fn write_json_line<W: Write, T: Serialize>(mut w: W, item: &T) -> io::Result<()> {
    serde_json::to_writer(&mut w, item)?;
    w.write_all(b"\n")
}

/// Streams b-file lines, numbering from `first_index`.
pub struct BFileWriter<W> {
    inner: W,
    next_index: u64,
}

impl<W: Write> BFileWriter<W> {
    pub fn new(inner: W) -> Self {
        BFileWriter {
            inner,
            next_index: 1,
        }
    }

    pub fn push(&mut self, value: u64) -> io::Result<()> {
        writeln!(self.inner, "{} {}", self.next_index, value)?;
        self.next_index += 1;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}

pub fn write_bfile<W: Write>(w: W, hits: &[Hit]) -> io::Result<()> {
    let mut b = BFileWriter::new(w);
    for h in hits {
        b.push(h.n)?;
    }
    Ok(())
}

/// Parse a b-file into its values, checking the indices run 1, 2, 3, ...
/// Lines starting with `#` and blank lines are skipped.
pub fn read_bfile(text: &str) -> Result<Vec<u64>, String> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(k), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(format!("line {}: expected `k a(k)`", lineno + 1));
        };
        let k: u64 = k.parse().map_err(|e| format!("line {}: {e}", lineno + 1))?;
        let v: u64 = v.parse().map_err(|e| format!("line {}: {e}", lineno + 1))?;
        if k != out.len() as u64 + 1 {
            return Err(format!("line {}: index {k} out of sequence", lineno + 1));
        }
        out.push(v);
    }
    Ok(out)
}

pub fn write_pairs_csv<W: Write>(mut w: W, pairs: &[PairHit]) -> io::Result<()> {
    writeln!(w, "n,t")?;
    for p in pairs {
        writeln!(w, "{},{}", p.n, p.t)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scanner::Kind;

    #[test]
    fn jsonl_schema() {
        let mut out = Vec::new();
        write_jsonl(&mut out, &[Hit { n: 24, kind: Kind::Fib }, Hit { n: 8, kind: Kind::Lucas }]).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "{\"n\":24,\"kind\":\"fib\"}\n{\"n\":8,\"kind\":\"lucas\"}\n"
        );
    }

    #[test]
    fn bfile_round_trip() {
        let hits: Vec<Hit> = [1, 2, 24].iter().map(|&n| Hit { n, kind: Kind::Fib }).collect();
        let mut out = Vec::new();
        write_bfile(&mut out, &hits).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "1 1\n2 2\n3 24\n");
        assert_eq!(read_bfile(&text).unwrap(), vec![1, 2, 24]);
        assert!(read_bfile("1 1\n3 2\n").is_err());
        assert!(read_bfile("1 x\n").is_err());
    }

    #[test]
    fn csv_header() {
        let mut out = Vec::new();
        write_pairs_csv(&mut out, &[PairHit { n: 1, t: 1 }]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "n,t\n1,1\n");
    }
}
