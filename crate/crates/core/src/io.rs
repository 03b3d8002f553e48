//! Text formats for labels and embeddings.

use std::io::{BufRead, Write};

use crate::eig::Embedding;
use crate::error::{invalid, Error, Result};
use crate::sim::Membership;

/// Writes `node<TAB>label` lines in node order.
pub fn write_labels<W: Write>(labels: &Membership, mut w: W) -> Result<()> {
    for (i, g) in labels.labels().iter().enumerate() {
        writeln!(w, "{i}\t{g}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `node<TAB>label` lines. Every node in `0..n` must appear exactly
/// once; the community count is `max label + 1`. `#` lines are skipped.
pub fn read_labels<R: BufRead>(reader: R) -> Result<Membership> {
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let parse = |s: Option<&str>| {
            s.and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse { line: idx + 1, message: format!("expected `node<TAB>label`, got `{t}`") })
        };
        let mut f = t.split_whitespace();
        let node = parse(f.next())?;
        let label = parse(f.next())?;
        if f.next().is_some() {
            return Err(Error::Parse { line: idx + 1, message: "too many fields".into() });
        }
        pairs.push((node, label));
    }
    let n = pairs.len();
    let mut labels = vec![usize::MAX; n];
    for (node, label) in pairs {
        if node >= n || labels[node] != usize::MAX {
            return Err(invalid(format!("node ids must be a permutation of 0..{n}; bad id {node}")));
        }
        labels[node] = label;
    }
    Membership::from_labels(labels)
}

/// Writes a `# ritz v_1 ... v_K` header, then one whitespace-separated row
/// per node.
pub fn write_embedding<W: Write>(emb: &Embedding, mut w: W) -> Result<()> {
    write!(w, "# ritz")?;
    for v in &emb.values {
        write!(w, " {v:e}")?;
    }
    writeln!(w)?;
    for row in emb.vectors.row_iter() {
        let line: Vec<String> = row.iter().map(|x| format!("{x:e}")).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn labels_round_trip() {
        let m = Membership::new(vec![2, 0, 1, 1], 3).unwrap();
        let mut buf = Vec::new();
        write_labels(&m, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "0\t2\n1\t0\n2\t1\n3\t1\n");
        assert_eq!(read_labels(buf.as_slice()).unwrap(), m);
    }

    #[test]
    fn label_errors() {
        assert!(read_labels("0\t1\n0\t2\n".as_bytes()).is_err());
        assert!(read_labels("0\t1\n5\t2\n".as_bytes()).is_err());
        assert!(matches!(read_labels("0 x\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn embedding_format() {
        let emb = Embedding { vectors: DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]), values: vec![3.0, 0.5] };
        let mut buf = Vec::new();
        write_embedding(&emb, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "# ritz 3e0 5e-1");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split_whitespace().count(), 2);
    }
}
