//! Score-based structure learning: steepest-ascent hill climbing on BIC,
//! bootstrap replication, arc strengths and the thresholded consensus graph.

use std::fmt::Write as _;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bayesnet::{find_cycle, CategoricalData, Dag, ScoreCache};
use crate::data_pipeline::write_comments;
use crate::error::{Error, Result};

/// Smallest score gain that counts as an improvement.
pub const MIN_IMPROVEMENT: f64 = 1e-9;
/// Gains closer than this are ties, settled by (operator, parent, child).
const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Operator {
    Add,
    Delete,
    Reverse,
}

/// One applied operation. `parent → child` names the edge before the
/// operation (for `Reverse`, the edge that gets flipped).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub step: usize,
    pub operator: Operator,
    pub parent: usize,
    pub child: usize,
    pub score_after: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SearchTrace {
    pub initial_score: f64,
    pub steps: Vec<SearchStep>,
}

impl SearchTrace {
    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn final_score(&self) -> f64 {
        self.steps.last().map_or(self.initial_score, |s| s.score_after)
    }

    /// Applies the recorded operations to `start`, yielding every visited
    /// graph after the start.
    pub fn replay(&self, start: &Dag) -> Result<Vec<Dag>> {
        let mut dag = start.clone();
        let mut out = Vec::with_capacity(self.steps.len());
        for s in &self.steps {
            apply(&mut dag, s.operator, s.parent, s.child)?;
            out.push(dag.clone());
        }
        Ok(out)
    }
}

fn apply(dag: &mut Dag, op: Operator, parent: usize, child: usize) -> Result<()> {
    match op {
        Operator::Add => dag.add_edge(parent, child),
        Operator::Delete => dag.remove_edge(parent, child),
        Operator::Reverse => dag.reverse_edge(parent, child),
    }
}

fn with(parents: &std::collections::BTreeSet<usize>, extra: usize) -> Vec<usize> {
    let mut v: Vec<usize> = parents.iter().copied().collect();
    if let Err(pos) = v.binary_search(&extra) {
        v.insert(pos, extra);
    }
    v
}

fn without(parents: &std::collections::BTreeSet<usize>, drop: usize) -> Vec<usize> {
    parents.iter().copied().filter(|&p| p != drop).collect()
}

/// Greedy hill climbing from `start`: each step applies the single add,
/// delete or reverse with the largest BIC gain among those keeping the graph
/// acyclic, until no gain exceeds [`MIN_IMPROVEMENT`].
pub fn hill_climb(data: &CategoricalData, start: &Dag) -> Result<(Dag, SearchTrace)> {
    let mut cache = ScoreCache::new(data)?;
    cache.check(start)?;
    hill_climb_cached(&mut cache, start)
}

fn hill_climb_cached(cache: &mut ScoreCache<'_>, start: &Dag) -> Result<(Dag, SearchTrace)> {
    let n = start.n();
    let mut dag = start.clone();
    let mut family: Vec<f64> = (0..n)
        .map(|v| {
            let ps: Vec<usize> = dag.parents(v).iter().copied().collect();
            cache.family(v, &ps)
        })
        .collect();
    let mut trace = SearchTrace {
        initial_score: family.iter().sum(),
        steps: Vec::new(),
    };

    loop {
        let mut best: Option<(f64, Operator, usize, usize)> = None;
        let mut consider = |gain: f64, op: Operator, p: usize, c: usize| match best {
            Some((g, ..)) if gain <= g + TIE_TOLERANCE => {}
            _ => best = Some((gain, op, p, c)),
        };

        for p in 0..n {
            for c in 0..n {
                if dag.can_add(p, c) {
                    let gain = cache.family(c, &with(dag.parents(c), p)) - family[c];
                    consider(gain, Operator::Add, p, c);
                }
            }
        }
        let edges = dag.edges();
        for &(p, c) in &edges {
            let gain = cache.family(c, &without(dag.parents(c), p)) - family[c];
            consider(gain, Operator::Delete, p, c);
        }
        for &(p, c) in &edges {
            if dag.can_reverse(p, c) {
                let gain = cache.family(c, &without(dag.parents(c), p)) - family[c]
                    + cache.family(p, &with(dag.parents(p), c))
                    - family[p];
                consider(gain, Operator::Reverse, p, c);
            }
        }

        let Some((gain, op, p, c)) = best else { break };
        if gain <= MIN_IMPROVEMENT {
            break;
        }
        apply(&mut dag, op, p, c)?;
        for v in [p, c] {
            let ps: Vec<usize> = dag.parents(v).iter().copied().collect();
            family[v] = cache.family(v, &ps);
        }
        trace.steps.push(SearchStep {
            step: trace.steps.len() + 1,
            operator: op,
            parent: p,
            child: c,
            score_after: family.iter().sum(),
        });
    }
    Ok((dag, trace))
}

/// Directed-arc counts over bootstrap replicates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcStrengthTable {
    variables: Vec<String>,
    counts: Vec<u32>,
    replicates: u32,
}

impl ArcStrengthTable {
    pub fn from_dags(variables: Vec<String>, dags: &[Dag]) -> Result<Self> {
        if dags.is_empty() {
            return Err(Error::Parameter("need at least one graph".into()));
        }
        let n = variables.len();
        let mut counts = vec![0u32; n * n];
        for d in dags {
            if d.nodes() != variables.as_slice() {
                return Err(Error::Schema("graph nodes differ from the table variables".into()));
            }
            for (p, c) in d.edges() {
                counts[p * n + c] += 1;
            }
        }
        Ok(ArcStrengthTable {
            variables,
            counts,
            replicates: dags.len() as u32,
        })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn replicates(&self) -> u32 {
        self.replicates
    }

    pub fn count(&self, parent: usize, child: usize) -> u32 {
        self.counts[parent * self.variables.len() + child]
    }

    pub fn frequency(&self, parent: usize, child: usize) -> f64 {
        self.count(parent, child) as f64 / self.replicates as f64
    }

    /// Direction-agnostic support `f(a→b) + f(b→a)`.
    pub fn support(&self, a: usize, b: usize) -> f64 {
        (self.count(a, b) + self.count(b, a)) as f64 / self.replicates as f64
    }

    /// Writes `parent,child,directed_frequency,support` for every ordered pair.
    pub fn write_csv<W: Write>(&self, writer: W, provenance: &[String]) -> Result<()> {
        let mut writer = writer;
        write_comments(&mut writer, provenance)?;
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["parent", "child", "directed_frequency", "support"])?;
        let n = self.variables.len();
        for a in 0..n {
            for b in 0..n {
                if a != b {
                    w.write_record([
                        self.variables[a].clone(),
                        self.variables[b].clone(),
                        format!("{:.6}", self.frequency(a, b)),
                        format!("{:.6}", self.support(a, b)),
                    ])?;
                }
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

/// The empty-start hill-climb graph of one bootstrap resample.
pub fn bootstrap_replicate(data: &CategoricalData, seed: u64, replicate: u64) -> Result<Dag> {
    let n = data.n_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let sample = data.resample(&rows);
    let start = Dag::empty(data.variables().to_vec())?;
    let mut cache = ScoreCache::new(&sample)?;
    Ok(hill_climb_cached(&mut cache, &start)?.0)
}

/// Learns one graph per bootstrap resample and tallies arc frequencies.
/// Replicate `r` draws from ChaCha stream `r` of `seed`, so the table does
/// not depend on thread count or scheduling.
pub fn bootstrap_learn(data: &CategoricalData, replicates: usize, seed: u64) -> Result<ArcStrengthTable> {
    if replicates == 0 {
        return Err(Error::Parameter("replicates must be ≥ 1".into()));
    }
    if data.n_rows() == 0 {
        return Err(Error::Parameter("cannot bootstrap an empty table".into()));
    }
    let n = data.n_vars();
    let counts = (0..replicates as u64)
        .into_par_iter()
        .map(|r| {
            let dag = bootstrap_replicate(data, seed, r)?;
            let mut c = vec![0u32; n * n];
            for (p, ch) in dag.edges() {
                c[p * n + ch] += 1;
            }
            Ok::<_, Error>(c)
        })
        .try_reduce(
            || vec![0u32; n * n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    Ok(ArcStrengthTable {
        variables: data.variables().to_vec(),
        counts,
        replicates: replicates as u32,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusArc {
    pub parent: usize,
    pub child: usize,
    pub directed_frequency: f64,
    pub support: f64,
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("threshold must lie in (0, 1], got {threshold}")))
    }
}

/// Pairs whose support reaches `threshold`, oriented toward the more
/// frequent direction (ties: lexicographically smaller parent name). No
/// cycle breaking.
pub fn consensus_arcs(ast: &ArcStrengthTable, threshold: f64) -> Result<Vec<ConsensusArc>> {
    check_threshold(threshold)?;
    let names = ast.variables();
    let n = names.len();
    let mut arcs = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            let support = ast.support(a, b);
            if support + 1e-12 < threshold {
                continue;
            }
            let (ab, ba) = (ast.count(a, b), ast.count(b, a));
            let forward = ab > ba || (ab == ba && names[a] <= names[b]);
            let (parent, child) = if forward { (a, b) } else { (b, a) };
            arcs.push(ConsensusArc {
                parent,
                child,
                directed_frequency: ast.frequency(parent, child),
                support,
            });
        }
    }
    Ok(arcs)
}

/// The consensus graph: [`consensus_arcs`], then while a directed cycle
/// remains its lowest-support arc is dropped.
pub fn consensus(ast: &ArcStrengthTable, threshold: f64) -> Result<Dag> {
    let mut arcs = consensus_arcs(ast, threshold)?;
    let names = ast.variables();
    loop {
        let edges: Vec<(usize, usize)> = arcs.iter().map(|a| (a.parent, a.child)).collect();
        let Some(cycle) = find_cycle(names.len(), &edges) else { break };
        let on_cycle = |a: &ConsensusArc| {
            (0..cycle.len()).any(|i| a.parent == cycle[i] && a.child == cycle[(i + 1) % cycle.len()])
        };
        let weakest = arcs
            .iter()
            .enumerate()
            .filter(|(_, a)| on_cycle(a))
            .min_by(|(_, x), (_, y)| {
                x.support
                    .total_cmp(&y.support)
                    .then(x.directed_frequency.total_cmp(&y.directed_frequency))
                    .then((&names[y.parent], &names[y.child]).cmp(&(&names[x.parent], &names[x.child])))
            })
            .map(|(i, _)| i)
            .expect("a cycle has arcs");
        arcs.remove(weakest);
    }
    let edges: Vec<(usize, usize)> = arcs.iter().map(|a| (a.parent, a.child)).collect();
    Dag::from_edges(names.to_vec(), &edges)
}

/// Graphviz description; edge `penwidth` is 5 × support when `ast` is given.
pub fn write_dot(dag: &Dag, ast: Option<&ArcStrengthTable>, comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        writeln!(out, "// {c}").unwrap();
    }
    out.push_str("digraph consensus {\n");
    for n in dag.nodes() {
        writeln!(out, "  \"{}\";", n.replace('"', "\\\"")).unwrap();
    }
    for (p, c) in dag.edges() {
        let (pn, cn) = (dag.name(p).replace('"', "\\\""), dag.name(c).replace('"', "\\\""));
        match ast {
            Some(t) => {
                let s = t.support(p, c);
                writeln!(out, "  \"{pn}\" -> \"{cn}\" [penwidth={:.3}, label=\"{s:.2}\"];", 5.0 * s).unwrap()
            }
            None => writeln!(out, "  \"{pn}\" -> \"{cn}\";").unwrap(),
        }
    }
    out.push_str("}\n");
    out
}
