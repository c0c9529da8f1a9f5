//! Sparse SDPA text format (`.dat-s`).
//!
//! ```text
//! m
//! nBlocks
//! size₁ size₂ …        (negative size = diagonal block)
//! c₁ … c_m
//! var block row col value   (1-based; var 0 is F₀)
//! ```
//!
//! Output is byte-deterministic: entries sorted by (var, block, row, col), upper
//! triangle only, every float with 17 significant digits.

use std::fmt::Write as _;
use std::path::Path;

use super::{BlockKind, BlockSpec, SdpEntry, StandardSdp};
use crate::error::{Error, Result};

fn num(v: f64) -> String {
    if v == 0.0 {
        // Avoid "-0".
        return format!("{:.16e}", 0.0);
    }
    format!("{v:.16e}")
}

pub fn export_sdpa(sdp: &StandardSdp) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", sdp.num_vars());
    let _ = writeln!(s, "{}", sdp.blocks.len());
    let sizes: Vec<String> = sdp
        .blocks
        .iter()
        .map(|b| match b.kind {
            BlockKind::Psd => b.dim.to_string(),
            BlockKind::Diagonal => format!("-{}", b.dim),
        })
        .collect();
    let _ = writeln!(s, "{}", sizes.join(" "));
    let c: Vec<String> = sdp.c.iter().map(|&v| num(v)).collect();
    let _ = writeln!(s, "{}", c.join(" "));
    for e in &sdp.entries {
        let _ = writeln!(
            s,
            "{} {} {} {} {}",
            e.var,
            e.block + 1,
            e.row + 1,
            e.col + 1,
            num(e.value)
        );
    }
    s
}

/// Non-comment lines with separators `{ } ( ) ,` turned into spaces.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim_start();
        if t.is_empty() || t.starts_with('*') || t.starts_with('"') {
            return None;
        }
        let toks: Vec<&str> = t
            .split(|c: char| c.is_whitespace() || "{}(),".contains(c))
            .filter(|s| !s.is_empty())
            .collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub fn import_sdpa(text: &str) -> Result<StandardSdp> {
    let mut lines = data_lines(text).peekable();
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let mut next_header = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Parse { line: 0, msg: format!("missing {what}") })
    };

    let (l, t) = next_header("number of variables")?;
    let m: usize = t[0].parse().map_err(|e| perr(l, format!("variable count: {e}")))?;
    let (l, t) = next_header("number of blocks")?;
    let nb: usize = t[0].parse().map_err(|e| perr(l, format!("block count: {e}")))?;
    let (l, t) = next_header("block sizes")?;
    if t.len() < nb {
        return Err(perr(l, format!("expected {nb} block sizes, found {}", t.len())));
    }
    let blocks = t[..nb]
        .iter()
        .map(|s| {
            let d: i64 = s.parse().map_err(|e| perr(l, format!("block size {s:?}: {e}")))?;
            if d == 0 {
                return Err(perr(l, "block size 0".into()));
            }
            Ok(BlockSpec {
                kind: if d < 0 { BlockKind::Diagonal } else { BlockKind::Psd },
                dim: d.unsigned_abs() as usize,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut c = Vec::with_capacity(m);
    let mut entries = Vec::new();
    if m > 0 {
        let (l, t) = next_header("objective vector")?;
        for s in t.iter().take(m) {
            c.push(s.parse::<f64>().map_err(|e| perr(l, format!("objective {s:?}: {e}")))?);
        }
        if c.len() < m {
            return Err(perr(l, format!("expected {m} objective coefficients, found {}", c.len())));
        }
    }
    for (l, t) in lines {
        if t.len() < 5 {
            return Err(perr(l, format!("expected 5 fields, found {}", t.len())));
        }
        let int = |s: &str, what: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|e| perr(l, format!("{what} {s:?}: {e}")))
        };
        let var = int(t[0], "matrix index")?;
        let block = int(t[1], "block")?;
        let row = int(t[2], "row")?;
        let col = int(t[3], "column")?;
        let value: f64 = t[4].parse().map_err(|e| perr(l, format!("value {:?}: {e}", t[4])))?;
        if block == 0 || row == 0 || col == 0 {
            return Err(perr(l, "indices are 1-based".into()));
        }
        if var > m || block > nb {
            return Err(perr(l, format!("matrix {var} / block {block} out of range")));
        }
        let dim = blocks[block - 1].dim;
        if row > dim || col > dim {
            return Err(perr(l, format!("({row}, {col}) outside block of size {dim}")));
        }
        if blocks[block - 1].kind == BlockKind::Diagonal && row != col {
            return Err(perr(l, "off-diagonal entry in a diagonal block".into()));
        }
        entries.push(SdpEntry { var, block: block - 1, row: row - 1, col: col - 1, value });
    }
    StandardSdp { c, blocks, entries }.normalized()
}

pub fn write_sdpa_file(sdp: &StandardSdp, path: &Path) -> Result<()> {
    std::fs::write(path, export_sdpa(sdp)).map_err(|e| Error::io(path, e))
}

pub fn read_sdpa_file(path: &Path) -> Result<StandardSdp> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    import_sdpa(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> StandardSdp {
        StandardSdp {
            c: vec![1.0, -0.5],
            blocks: vec![
                BlockSpec { kind: BlockKind::Psd, dim: 2 },
                BlockSpec { kind: BlockKind::Diagonal, dim: 1 },
            ],
            entries: vec![
                SdpEntry { var: 1, block: 0, row: 0, col: 1, value: 1.0 },
                SdpEntry { var: 0, block: 0, row: 0, col: 0, value: -1.0 },
                SdpEntry { var: 0, block: 0, row: 1, col: 1, value: -1.0 },
                SdpEntry { var: 2, block: 1, row: 0, col: 0, value: 0.1 },
            ],
        }
        .normalized()
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let s = sample();
        let text = export_sdpa(&s);
        assert_eq!(import_sdpa(&text).unwrap(), s);
        assert_eq!(export_sdpa(&import_sdpa(&text).unwrap()), text);
    }

    #[test]
    fn accepts_sdpa_punctuation() {
        let text = "\"comment\n2 =m\n1\n{2}\n{1.0, 2.0}\n1 1 2 1 1.0\n";
        let s = import_sdpa(text).unwrap();
        assert_eq!(s.entries[0].row, 0);
        assert_eq!(s.entries[0].col, 1);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(import_sdpa("1\n1\n2\n1.0\n1 1 3 1 1.0\n").is_err());
        assert!(import_sdpa("1\n1\n-2\n1.0\n1 1 1 2 1.0\n").is_err());
        assert!(import_sdpa("1\n1\n2\n").is_err());
    }
}
