//! Exact conditional-probability queries on a [`DiscreteBayesNet`] by
//! sum-product variable elimination, with brute-force enumeration as the
//! reference semantics.

use std::collections::BTreeMap;
use std::io::Write;

use crate::bayesnet::{CategoricalCpt, DiscreteBayesNet, LEVELS};
use crate::data_pipeline::write_comments;
use crate::discretizer::Level;
use crate::error::{Error, Result};

/// Most variables [`enumerate_query`] will sweep over.
pub const MAX_ENUMERATION_VARS: usize = 16;

/// Observed levels for a subset of variables; each variable at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence(BTreeMap<String, Level>);

impl Evidence {
    pub fn new() -> Self {
        Evidence::default()
    }

    pub fn insert(&mut self, variable: impl Into<String>, level: Level) -> Result<()> {
        let variable = variable.into();
        if self.0.contains_key(&variable) {
            return Err(Error::Usage(format!("variable `{variable}` given twice in evidence")));
        }
        self.0.insert(variable, level);
        Ok(())
    }

    pub fn with(mut self, variable: impl Into<String>, level: Level) -> Result<Self> {
        self.insert(variable, level)?;
        Ok(self)
    }

    pub fn get(&self, variable: &str) -> Option<Level> {
        self.0.get(variable).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Level)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub query_variable: String,
    pub distribution: [f64; LEVELS],
}

impl Posterior {
    pub fn p(&self, level: Level) -> f64 {
        self.distribution[level.index()]
    }
}

/// A table over `scope` (ascending node indices); the first scope variable
/// is the most significant base-3 digit of the value index.
#[derive(Debug, Clone, PartialEq)]
struct Factor {
    scope: Vec<usize>,
    values: Vec<f64>,
}

fn decode(mut idx: usize, len: usize, digits: &mut [usize]) {
    for d in digits[..len].iter_mut().rev() {
        *d = idx % LEVELS;
        idx /= LEVELS;
    }
}

impl Factor {
    fn from_cpt(cpt: &CategoricalCpt, n_vars: usize) -> Self {
        let mut scope = cpt.parents.clone();
        scope.push(cpt.child);
        scope.sort_unstable();
        let size = LEVELS.pow(scope.len() as u32);
        let mut assignment = vec![0usize; n_vars];
        let mut digits = vec![0usize; scope.len()];
        let values = (0..size)
            .map(|idx| {
                decode(idx, scope.len(), &mut digits);
                for (&v, &d) in scope.iter().zip(&digits) {
                    assignment[v] = d;
                }
                cpt.row_for(&assignment)[assignment[cpt.child]]
            })
            .collect();
        Factor { scope, values }
    }

    fn contains(&self, v: usize) -> bool {
        self.scope.binary_search(&v).is_ok()
    }

    /// Index into `self.values` for a full assignment indexed by node.
    fn index_of(&self, assignment: &[usize]) -> usize {
        self.scope.iter().fold(0, |acc, &v| acc * LEVELS + assignment[v])
    }

    /// Fixes evidence variables and drops them from the scope.
    fn reduce(&self, evidence: &[Option<usize>], n_vars: usize) -> Factor {
        let scope: Vec<usize> = self.scope.iter().copied().filter(|&v| evidence[v].is_none()).collect();
        let mut assignment = vec![0usize; n_vars];
        for (v, e) in evidence.iter().enumerate() {
            if let Some(l) = e {
                assignment[v] = *l;
            }
        }
        let mut digits = vec![0usize; scope.len()];
        let values = (0..LEVELS.pow(scope.len() as u32))
            .map(|idx| {
                decode(idx, scope.len(), &mut digits);
                for (&v, &d) in scope.iter().zip(&digits) {
                    assignment[v] = d;
                }
                self.values[self.index_of(&assignment)]
            })
            .collect();
        Factor { scope, values }
    }

    fn product(&self, other: &Factor, n_vars: usize) -> Factor {
        let mut scope: Vec<usize> = self.scope.iter().chain(&other.scope).copied().collect();
        scope.sort_unstable();
        scope.dedup();
        let mut assignment = vec![0usize; n_vars];
        let mut digits = vec![0usize; scope.len()];
        let values = (0..LEVELS.pow(scope.len() as u32))
            .map(|idx| {
                decode(idx, scope.len(), &mut digits);
                for (&v, &d) in scope.iter().zip(&digits) {
                    assignment[v] = d;
                }
                self.values[self.index_of(&assignment)] * other.values[other.index_of(&assignment)]
            })
            .collect();
        Factor { scope, values }
    }

    fn sum_out(&self, var: usize, n_vars: usize) -> Factor {
        let scope: Vec<usize> = self.scope.iter().copied().filter(|&v| v != var).collect();
        let mut assignment = vec![0usize; n_vars];
        let mut digits = vec![0usize; scope.len()];
        let values = (0..LEVELS.pow(scope.len() as u32))
            .map(|idx| {
                decode(idx, scope.len(), &mut digits);
                for (&v, &d) in scope.iter().zip(&digits) {
                    assignment[v] = d;
                }
                (0..LEVELS)
                    .map(|l| {
                        assignment[var] = l;
                        self.values[self.index_of(&assignment)]
                    })
                    .sum()
            })
            .collect();
        Factor { scope, values }
    }

    fn unit() -> Factor {
        Factor {
            scope: Vec::new(),
            values: vec![1.0],
        }
    }
}

struct Resolved {
    query: usize,
    evidence: Vec<Option<usize>>,
}

fn resolve(net: &DiscreteBayesNet, q: &str, e: &Evidence) -> Result<Resolved> {
    let dag = net.dag();
    let unknown = |name: &str| {
        Error::Usage(format!(
            "unknown variable `{name}`; valid names: {}",
            dag.nodes().join(", ")
        ))
    };
    let query = dag.index_of(q).ok_or_else(|| unknown(q))?;
    let mut evidence = vec![None; net.n()];
    for (name, level) in e.iter() {
        let v = dag.index_of(name).ok_or_else(|| unknown(name))?;
        if v == query {
            return Err(Error::Usage(format!("query variable `{q}` also appears in the evidence")));
        }
        evidence[v] = Some(level.index());
    }
    Ok(Resolved { query, evidence })
}

fn normalize(q: &str, raw: [f64; LEVELS]) -> Result<Posterior> {
    let z: f64 = raw.iter().sum();
    if !(z > 0.0) {
        return Err(Error::ZeroEvidence);
    }
    Ok(Posterior {
        query_variable: q.to_string(),
        distribution: raw.map(|p| p / z),
    })
}

/// Greedy min-degree order over the hidden variables, recomputed after each
/// elimination; ties go to the smallest node index.
fn min_degree_order(factors: &[Factor], hidden: &[usize], n_vars: usize) -> Vec<usize> {
    let mut scopes: Vec<Vec<usize>> = factors.iter().map(|f| f.scope.clone()).collect();
    let mut remaining: Vec<usize> = hidden.to_vec();
    let mut order = Vec::with_capacity(hidden.len());
    while !remaining.is_empty() {
        let degree = |v: usize| {
            let mut nb = vec![false; n_vars];
            for s in scopes.iter().filter(|s| s.contains(&v)) {
                for &u in s {
                    nb[u] = true;
                }
            }
            nb.iter().filter(|&&b| b).count()
        };
        let (pos, &v) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &v)| (degree(v), v))
            .expect("nonempty");
        remaining.remove(pos);
        order.push(v);
        let (with_v, mut rest): (Vec<Vec<usize>>, Vec<Vec<usize>>) = scopes.into_iter().partition(|s| s.contains(&v));
        let mut merged: Vec<usize> = with_v.into_iter().flatten().filter(|&u| u != v).collect();
        merged.sort_unstable();
        merged.dedup();
        rest.push(merged);
        scopes = rest;
    }
    order
}

/// `P(q | e)` by variable elimination with a min-degree order.
pub fn query(net: &DiscreteBayesNet, q: &str, e: &Evidence) -> Result<Posterior> {
    run_elimination(net, q, e, None)
}

/// `P(q | e)` eliminating hidden variables in the given order, which must
/// list every variable outside `{q} ∪ vars(e)` exactly once.
pub fn query_with_order(net: &DiscreteBayesNet, q: &str, e: &Evidence, order: &[usize]) -> Result<Posterior> {
    run_elimination(net, q, e, Some(order))
}

fn run_elimination(net: &DiscreteBayesNet, q: &str, e: &Evidence, order: Option<&[usize]>) -> Result<Posterior> {
    let Resolved { query: qi, evidence } = resolve(net, q, e)?;
    let n = net.n();
    let mut factors: Vec<Factor> = net
        .cpts()
        .iter()
        .map(|c| Factor::from_cpt(c, n).reduce(&evidence, n))
        .collect();
    let hidden: Vec<usize> = (0..n).filter(|&v| v != qi && evidence[v].is_none()).collect();
    let order = match order {
        Some(o) => {
            let mut sorted = o.to_vec();
            sorted.sort_unstable();
            if sorted != hidden {
                return Err(Error::Parameter("elimination order must cover exactly the hidden variables".into()));
            }
            o.to_vec()
        }
        None => min_degree_order(&factors, &hidden, n),
    };

    for v in order {
        let (with_v, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.contains(v));
        factors = rest;
        let joined = with_v.iter().fold(Factor::unit(), |acc, f| acc.product(f, n));
        factors.push(joined.sum_out(v, n));
    }
    let result = factors.iter().fold(Factor::unit(), |acc, f| acc.product(f, n));
    debug_assert_eq!(result.scope, vec![qi]);
    let raw = [result.values[0], result.values[1], result.values[2]];
    normalize(q, raw)
}

/// `P(q | e)` by summing the factorized joint over every completion of the
/// evidence. Exponential in the number of free variables.
pub fn enumerate_query(net: &DiscreteBayesNet, q: &str, e: &Evidence) -> Result<Posterior> {
    if net.n() > MAX_ENUMERATION_VARS {
        return Err(Error::Capacity(net.n(), MAX_ENUMERATION_VARS));
    }
    let Resolved { query: qi, evidence } = resolve(net, q, e)?;
    let mut assignment: Vec<usize> = evidence.iter().map(|e| e.unwrap_or(0)).collect();
    let free: Vec<usize> = (0..net.n()).filter(|&v| evidence[v].is_none()).collect();
    let mut raw = [0.0; LEVELS];
    loop {
        raw[assignment[qi]] += net.joint_levels(&assignment);
        let mut k = 0;
        while k < free.len() {
            let v = free[k];
            assignment[v] += 1;
            if assignment[v] < LEVELS {
                break;
            }
            assignment[v] = 0;
            k += 1;
        }
        if k == free.len() {
            break;
        }
    }
    normalize(q, raw)
}

/// One posterior of `q` per level of `sweep_var`, each with that level as
/// the sole evidence.
pub fn query_sweep(net: &DiscreteBayesNet, q: &str, sweep_var: &str) -> Result<Vec<(Level, Posterior)>> {
    if q == sweep_var {
        return Err(Error::Usage("query and sweep variable must differ".into()));
    }
    Level::ALL
        .iter()
        .map(|&l| Ok((l, query(net, q, &Evidence::new().with(sweep_var, l)?)?)))
        .collect()
}

/// Writes `sweep_level,q_level,probability` rows.
pub fn write_sweep_csv<W: Write>(writer: W, sweep: &[(Level, Posterior)], provenance: &[String]) -> Result<()> {
    let mut writer = writer;
    write_comments(&mut writer, provenance)?;
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["sweep_level", "q_level", "probability"])?;
    for (sl, post) in sweep {
        for ql in Level::ALL {
            w.write_record([sl.name(), ql.name(), &format!("{:.6}", post.p(ql))])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}
