use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::error::{Error, Result};

/// A directed acyclic graph over named nodes. Mutators refuse any edit that
/// would add a self-loop, a duplicate edge or a cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    nodes: Vec<String>,
    parents: Vec<BTreeSet<usize>>,
    children: Vec<BTreeSet<usize>>,
}

impl Dag {
    pub fn empty(nodes: Vec<String>) -> Result<Self> {
        let mut seen = HashSet::new();
        for n in &nodes {
            if !seen.insert(n.as_str()) {
                return Err(Error::Graph(format!("duplicate node `{n}`")));
            }
        }
        let k = nodes.len();
        Ok(Dag {
            nodes,
            parents: vec![BTreeSet::new(); k],
            children: vec![BTreeSet::new(); k],
        })
    }

    pub fn from_edges(nodes: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut dag = Dag::empty(nodes)?;
        for &(p, c) in edges {
            dag.add_edge(p, c)?;
        }
        Ok(dag)
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn parents(&self, i: usize) -> &BTreeSet<usize> {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &BTreeSet<usize> {
        &self.children[i]
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.parents[child].contains(&parent)
    }

    /// All edges sorted by (parent, child).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .children
            .iter()
            .enumerate()
            .flat_map(|(p, cs)| cs.iter().map(move |&c| (p, c)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(BTreeSet::len).sum()
    }

    fn check_node(&self, i: usize) -> Result<()> {
        if i < self.n() {
            Ok(())
        } else {
            Err(Error::Graph(format!("node index {i} out of range")))
        }
    }

    /// Whether a directed path `from ⇝ to` exists (a node reaches itself).
    pub fn has_path(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![from];
        seen[from] = true;
        while let Some(u) = stack.pop() {
            for &v in &self.children[u] {
                if v == to {
                    return true;
                }
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        false
    }

    pub fn can_add(&self, parent: usize, child: usize) -> bool {
        parent != child && !self.has_edge(parent, child) && !self.has_path(child, parent)
    }

    /// Whether reversing the existing edge `parent → child` keeps the graph
    /// acyclic, i.e. no other path `parent ⇝ child` exists.
    pub fn can_reverse(&self, parent: usize, child: usize) -> bool {
        if !self.has_edge(parent, child) {
            return false;
        }
        let mut seen = vec![false; self.n()];
        let mut stack: Vec<usize> = self.children[parent]
            .iter()
            .copied()
            .filter(|&c| c != child)
            .collect();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(u) = stack.pop() {
            if u == child {
                return false;
            }
            for &v in &self.children[u] {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        true
    }

    pub fn add_edge(&mut self, parent: usize, child: usize) -> Result<()> {
        self.check_node(parent)?;
        self.check_node(child)?;
        if parent == child {
            return Err(Error::Graph(format!("self-loop on `{}`", self.nodes[parent])));
        }
        if self.has_edge(parent, child) {
            return Err(Error::Graph(format!(
                "duplicate edge {} -> {}",
                self.nodes[parent], self.nodes[child]
            )));
        }
        if self.has_path(child, parent) {
            return Err(Error::Graph(format!(
                "edge {} -> {} would create a cycle",
                self.nodes[parent], self.nodes[child]
            )));
        }
        self.parents[child].insert(parent);
        self.children[parent].insert(child);
        Ok(())
    }

    pub fn remove_edge(&mut self, parent: usize, child: usize) -> Result<()> {
        self.check_node(parent)?;
        self.check_node(child)?;
        if !self.parents[child].remove(&parent) {
            return Err(Error::Graph(format!(
                "no edge {} -> {}",
                self.nodes[parent], self.nodes[child]
            )));
        }
        self.children[parent].remove(&child);
        Ok(())
    }

    pub fn reverse_edge(&mut self, parent: usize, child: usize) -> Result<()> {
        if !self.can_reverse(parent, child) {
            return Err(Error::Graph(format!(
                "cannot reverse {} -> {}",
                self.nodes[parent], self.nodes[child]
            )));
        }
        self.remove_edge(parent, child)?;
        self.parents[parent].insert(child);
        self.children[child].insert(parent);
        Ok(())
    }

    pub fn topological_order(&self) -> Vec<usize> {
        topological_sort(self.n(), &self.edges()).expect("Dag is acyclic by construction")
    }

    /// Same structure with nodes reordered: new node `i` is old `perm[i]`.
    pub fn permute(&self, perm: &[usize]) -> Result<Self> {
        let mut inverse = vec![0; perm.len()];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let edges: Vec<(usize, usize)> = self
            .edges()
            .into_iter()
            .map(|(p, c)| (inverse[p], inverse[c]))
            .collect();
        Dag::from_edges(perm.iter().map(|&p| self.nodes[p].clone()).collect(), &edges)
    }
}

/// Kahn's algorithm; `None` when the digraph has a cycle. Ties are resolved
/// by smallest index.
pub fn topological_sort(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let mut indegree = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for &(p, c) in edges {
        out[p].push(c);
        indegree[c] += 1;
    }
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(u) = ready.pop_first() {
        order.push(u);
        for &v in &out[u] {
            indegree[v] -= 1;
            if indegree[v] == 0 {
                ready.insert(v);
            }
        }
    }
    (order.len() == n).then_some(order)
}

/// Depth-first search for a directed cycle; returns its nodes in order when
/// one exists. Self-loops count as cycles.
pub fn find_cycle(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let mut adj = vec![Vec::new(); n];
    for &(p, c) in edges {
        adj[p].push(c);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    let mut mark = vec![Mark::New; n];
    let mut path: Vec<usize> = Vec::new();
    for root in 0..n {
        if mark[root] != Mark::New {
            continue;
        }
        let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
        mark[root] = Mark::Active;
        path.push(root);
        while let Some(&mut (u, ref mut next)) = stack.last_mut() {
            if *next < adj[u].len() {
                let v = adj[u][*next];
                *next += 1;
                match mark[v] {
                    Mark::Active => {
                        let start = path.iter().position(|&x| x == v).expect("active node on path");
                        return Some(path[start..].to_vec());
                    }
                    Mark::New => {
                        mark[v] = Mark::Active;
                        path.push(v);
                        stack.push((v, 0));
                    }
                    Mark::Done => {}
                }
            } else {
                mark[u] = Mark::Done;
                path.pop();
                stack.pop();
            }
        }
    }
    None
}

/// Every node reachable from `from` along directed edges.
pub fn reachable(dag: &Dag, from: usize) -> BTreeSet<usize> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for &v in dag.children(u) {
            if seen.insert(v) {
                queue.push_back(v);
            }
        }
    }
    seen
}
