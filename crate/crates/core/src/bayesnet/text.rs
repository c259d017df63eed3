//! Plain-text form of graphs and networks:
//!
//! ```text
//! # comment
//! node: A
//! node: B
//! A -> B
//! cpt: B | A
//! Low: 0.7 0.2 0.1
//! Medium: 0.3 0.4 0.3
//! High: 0.1 0.1 0.8
//! end
//! ```
//!
//! Parent configurations are comma-separated level names (`-` for a node
//! without parents). Probabilities use the shortest round-tripping decimal,
//! so parsing a written network gives back the same bits.

use std::fmt::Write as _;

use super::{CategoricalCpt, Dag, DiscreteBayesNet, LEVELS};
use crate::discretizer::Level;
use crate::error::{Error, Result};

fn check_name(name: &str) -> Result<()> {
    let bad = name.is_empty()
        || name.trim() != name
        || name.contains("->")
        || name.contains(['|', ':', ',', '\n', '\r', '#']);
    if bad {
        return Err(Error::Format(format!("node name `{name}` cannot be written in text form")));
    }
    Ok(())
}

fn write_header(out: &mut String, dag: &Dag, comments: &[String]) -> Result<()> {
    for c in comments {
        writeln!(out, "# {c}").unwrap();
    }
    for n in dag.nodes() {
        check_name(n)?;
        writeln!(out, "node: {n}").unwrap();
    }
    for (p, c) in dag.edges() {
        writeln!(out, "{} -> {}", dag.name(p), dag.name(c)).unwrap();
    }
    Ok(())
}

pub fn write_dag(dag: &Dag, comments: &[String]) -> Result<String> {
    let mut out = String::new();
    write_header(&mut out, dag, comments)?;
    Ok(out)
}

fn config_label(parents: usize, mut j: usize) -> String {
    if parents == 0 {
        return "-".into();
    }
    let mut digits = vec![0; parents];
    for d in digits.iter_mut().rev() {
        *d = j % LEVELS;
        j /= LEVELS;
    }
    digits
        .iter()
        .map(|&d| Level::from_index(d).expect("digit < 3").name())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_net(net: &DiscreteBayesNet, comments: &[String]) -> Result<String> {
    let dag = net.dag();
    let mut out = String::new();
    write_header(&mut out, dag, comments)?;
    for cpt in net.cpts() {
        let parents: Vec<&str> = cpt.parents.iter().map(|&p| dag.name(p)).collect();
        if parents.is_empty() {
            writeln!(out, "cpt: {}", dag.name(cpt.child)).unwrap();
        } else {
            writeln!(out, "cpt: {} | {}", dag.name(cpt.child), parents.join(", ")).unwrap();
        }
        for (j, row) in cpt.rows.iter().enumerate() {
            writeln!(out, "{}: {} {} {}", config_label(parents.len(), j), row[0], row[1], row[2]).unwrap();
        }
        out.push_str("end\n");
    }
    Ok(out)
}

struct Parsed {
    dag: Dag,
    cpts: Vec<Option<CategoricalCpt>>,
}

fn parse(text: &str) -> Result<Parsed> {
    let mut nodes: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut blocks: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((i, raw)) = lines.next() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |m: String| Error::Format(format!("line {}: {m}", i + 1));
        if let Some(name) = line.strip_prefix("node:") {
            if !edges.is_empty() || !blocks.is_empty() {
                return Err(err("node declarations must come first".into()));
            }
            nodes.push(name.trim().to_string());
        } else if let Some(head) = line.strip_prefix("cpt:") {
            let mut body = Vec::new();
            loop {
                match lines.next() {
                    Some((_, l)) if l.trim() == "end" => break,
                    Some((_, l)) => body.push(l.trim().to_string()),
                    None => return Err(err("unterminated cpt block".into())),
                }
            }
            blocks.push((i + 1, head.trim().to_string(), body));
        } else if let Some((p, c)) = line.split_once("->") {
            if !blocks.is_empty() {
                return Err(err("edges must precede cpt blocks".into()));
            }
            edges.push((p.trim().to_string(), c.trim().to_string()));
        } else {
            return Err(err(format!("unrecognised line `{line}`")));
        }
    }

    let mut dag = Dag::empty(nodes)?;
    let lookup = |dag: &Dag, name: &str| {
        dag.index_of(name)
            .ok_or_else(|| Error::Format(format!("unknown node `{name}`")))
    };
    for (p, c) in &edges {
        let (pi, ci) = (lookup(&dag, p)?, lookup(&dag, c)?);
        dag.add_edge(pi, ci)?;
    }

    let mut cpts: Vec<Option<CategoricalCpt>> = vec![None; dag.n()];
    for (line, head, body) in blocks {
        let err = |m: String| Error::Format(format!("cpt at line {line}: {m}"));
        let (child, parents) = match head.split_once('|') {
            Some((c, ps)) => (
                c.trim(),
                ps.split(',').map(|p| p.trim()).collect::<Vec<_>>(),
            ),
            None => (head.as_str(), Vec::new()),
        };
        let child = lookup(&dag, child)?;
        let parents = parents
            .iter()
            .map(|p| lookup(&dag, p))
            .collect::<Result<Vec<_>>>()?;
        let q = LEVELS.pow(parents.len() as u32);
        if body.len() != q {
            return Err(err(format!("expected {q} rows, found {}", body.len())));
        }
        let rows = body
            .iter()
            .enumerate()
            .map(|(j, l)| {
                let (label, probs) = l
                    .split_once(':')
                    .ok_or_else(|| err(format!("row `{l}` has no `:`")))?;
                if label.trim() != config_label(parents.len(), j) {
                    return Err(err(format!("row {j} labelled `{}`", label.trim())));
                }
                let v = probs
                    .split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`"))))
                    .collect::<Result<Vec<_>>>()?;
                <[f64; LEVELS]>::try_from(v).map_err(|_| err("rows need three probabilities".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        if cpts[child].is_some() {
            return Err(err("duplicate cpt".into()));
        }
        cpts[child] = Some(CategoricalCpt { child, parents, rows });
    }
    Ok(Parsed { dag, cpts })
}

/// Reads the graph part of a graph or network file; CPT blocks are ignored.
pub fn parse_dag(text: &str) -> Result<Dag> {
    Ok(parse(text)?.dag)
}

pub fn parse_net(text: &str) -> Result<DiscreteBayesNet> {
    let Parsed { dag, cpts } = parse(text)?;
    let cpts = cpts
        .into_iter()
        .enumerate()
        .map(|(i, c)| c.ok_or_else(|| Error::Format(format!("no cpt for `{}`", dag.name(i)))))
        .collect::<Result<Vec<_>>>()?;
    DiscreteBayesNet::new(dag, cpts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayesnet::{fit_cpts, CategoricalData};
    use proptest::prelude::*;

    fn names() -> Vec<String> {
        vec!["Log GDP per Capita".into(), "Healthy Life Expectancy".into(), "Gini (x)".into()]
    }

    #[test]
    fn dag_text_layout() {
        let dag = Dag::from_edges(names(), &[(0, 1), (1, 2)]).unwrap();
        let text = write_dag(&dag, &["config_hash=1".into()]).unwrap();
        assert!(text.contains("\nLog GDP per Capita -> Healthy Life Expectancy\n"));
        assert_eq!(parse_dag(&text).unwrap(), dag);
    }

    #[test]
    fn rejects_unwritable_names_and_bad_files() {
        let dag = Dag::empty(vec!["a -> b".into()]).unwrap();
        assert!(write_dag(&dag, &[]).is_err());
        assert!(parse_net("node: a\ncpt: a\n-: 0.2 0.3\nend\n").is_err());
        assert!(parse_net("node: a\n").is_err());
        assert!(parse_dag("node: a\na -> b\n").is_err());
        assert!(parse_dag("node: a\nnode: b\na -> b\nb -> a\n").is_err());
    }

    proptest! {
        #[test]
        fn net_round_trip_is_lossless(rows in proptest::collection::vec(proptest::collection::vec(0u8..3, 3), 1..60),
                                      alpha in 0.0f64..3.0) {
            let data = CategoricalData::from_rows(names(), &rows).unwrap();
            let dag = Dag::from_edges(names(), &[(0, 1), (0, 2), (1, 2)]).unwrap();
            let net = fit_cpts(&dag, &data, alpha).unwrap();
            let text = write_net(&net, &[]).unwrap();
            prop_assert_eq!(parse_net(&text).unwrap(), net);
        }
    }
}
