use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;

use crate::with_suffix;

#[derive(Args, Debug)]
pub struct RelabelArgs {
    /// Edge list with `layer id id [value]` lines; ids may be any token.
    pub edges: PathBuf,
    /// Output prefix; writes `<out>.edges.tsv` and `<out>.idmap.tsv`.
    #[arg(long)]
    pub out: PathBuf,
}

/// One parsed edge line with the original node tokens.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEdge {
    pub layer: String,
    pub from: String,
    pub to: String,
    pub value: Option<String>,
}

/// Parses `layer id id [value]` lines, skipping blanks and `#` comments.
pub fn parse_edges<R: BufRead>(reader: R) -> anyhow::Result<Vec<RawEdge>> {
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let f: Vec<&str> = t.split_whitespace().collect();
        if !(3..=4).contains(&f.len()) {
            bail!("line {}: expected `layer id id [value]`, got {} fields", idx + 1, f.len());
        }
        edges.push(RawEdge {
            layer: f[0].to_string(),
            from: f[1].to_string(),
            to: f[2].to_string(),
            value: f.get(3).map(|s| s.to_string()),
        });
    }
    Ok(edges)
}

/// Dense ids in first-seen order. Input whose ids are already exactly the
/// integers `0..m` keeps its numbering.
pub fn assign_ids(edges: &[RawEdge]) -> Vec<(String, usize)> {
    let mut order = Vec::new();
    let mut seen = HashSet::new();
    for e in edges {
        for id in [&e.from, &e.to] {
            if seen.insert(id.as_str()) {
                order.push(id.clone());
            }
        }
    }
    let numeric: Option<Vec<usize>> = order.iter().map(|s| canonical_int(s)).collect();
    if let Some(values) = numeric {
        if values.iter().all(|&v| v < values.len()) {
            return order.into_iter().zip(values).collect();
        }
    }
    order.into_iter().enumerate().map(|(i, s)| (s, i)).collect()
}

/// Parses a non-negative integer written without sign or leading zeros.
fn canonical_int(s: &str) -> Option<usize> {
    let v: usize = s.parse().ok()?;
    (v.to_string() == s).then_some(v)
}

pub fn run(a: &RelabelArgs) -> anyhow::Result<()> {
    let file = File::open(&a.edges).with_context(|| format!("opening {}", a.edges.display()))?;
    let edges = parse_edges(BufReader::new(file)).with_context(|| format!("parsing {}", a.edges.display()))?;
    let ids = assign_ids(&edges);
    let map: HashMap<&str, usize> = ids.iter().map(|(s, i)| (s.as_str(), *i)).collect();

    let mut w = BufWriter::new(File::create(with_suffix(&a.out, ".edges.tsv"))?);
    for e in &edges {
        write!(w, "{}\t{}\t{}", e.layer, map[e.from.as_str()], map[e.to.as_str()])?;
        if let Some(v) = &e.value {
            write!(w, "\t{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;

    let mut w = BufWriter::new(File::create(with_suffix(&a.out, ".idmap.tsv"))?);
    for (id, i) in &ids {
        writeln!(w, "{id}\t{i}")?;
    }
    w.flush()?;
    println!("nodes,{}", ids.len());
    println!("edges,{}", edges.len());
    Ok(())
}
