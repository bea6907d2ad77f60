//! Causal DAGs: d-separation, backdoor paths, adjustment sets, interventions.
//!
//! Nodes carry a role tag (treatment, confounder, outcome, …) used for display
//! and scenario bookkeeping only — none of the graph algorithms consult roles.
//! Two d-separation routes are provided: a reachability pass (Bayes-ball) as
//! the primary decision procedure, and explicit path enumeration that yields
//! [`PathWitness`] values for diagnostics; property tests hold them to
//! identical verdicts.

use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::cmp::Reverse;

use serde::{Deserialize, Serialize};
use thiserror::Error;

// ── Roles and errors ─────────────────────────────────────────────────────────

/// Display/bookkeeping tag for a node. Graph algorithms ignore it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, Default)]
pub enum NodeRole {
    Treatment,
    ObservedConfounder,
    UnobservedConfounder,
    Outcome,
    Instrument,
    AssignmentIndicator,
    CensoringIndicator,
    RunningVariable,
    #[default]
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DagError {
    #[error("cycle detected: {}", cycle.join(" -> "))]
    CycleDetected { cycle: Vec<String> },
    #[error("edge ({parent} -> {child}) references undeclared node {endpoint}")]
    UnknownEndpoint {
        parent: String,
        child: String,
        endpoint: String,
    },
    #[error("duplicate edge ({parent} -> {child})")]
    DuplicateEdge { parent: String, child: String },
    #[error("unknown node {node}")]
    UnknownNode { node: String },
    #[error("query node {node} overlaps the conditioning set")]
    OverlapError { node: String },
}

// ── Path witnesses ───────────────────────────────────────────────────────────

/// Direction in which a path step traverses a stored edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum StepDir {
    /// The DAG contains nodes[i] -> nodes[i+1].
    Forward,
    /// The DAG contains nodes[i+1] -> nodes[i].
    Backward,
}

/// Classification of an interior node by its two incident path edges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TripleClass {
    /// a -> m -> b (in path orientation).
    Chain,
    /// a <- m -> b.
    Fork,
    /// a -> m <- b.
    Collider,
}

/// An undirected path between two nodes with per-step directions and
/// per-interior-node triple classification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathWitness {
    pub nodes: Vec<String>,
    pub steps: Vec<StepDir>,
    pub triples: Vec<TripleClass>,
}

impl PathWitness {
    /// A backdoor path starts with an edge pointing INTO the source node.
    pub fn is_backdoor(&self) -> bool {
        matches!(self.steps.first(), Some(StepDir::Backward))
    }

    /// Whether the path is open (d-connecting) given a conditioning set.
    /// `cond_or_descendant` must answer "is this node, or any descendant of
    /// it, conditioned on" — the collider-opening rule.
    fn open(&self, given: &BTreeSet<String>, cond_or_descendant: &BTreeSet<String>) -> bool {
        self.triples.iter().enumerate().all(|(i, class)| {
            let mid = &self.nodes[i + 1];
            match class {
                TripleClass::Chain | TripleClass::Fork => !given.contains(mid),
                TripleClass::Collider => cond_or_descendant.contains(mid),
            }
        })
    }

    /// Human-readable rendering such as `X <- Z -> Y`.
    pub fn render(&self) -> String {
        let mut out = self.nodes[0].clone();
        for (i, step) in self.steps.iter().enumerate() {
            out.push_str(match step {
                StepDir::Forward => " -> ",
                StepDir::Backward => " <- ",
            });
            out.push_str(&self.nodes[i + 1]);
        }
        out
    }
}

// ── The DAG ──────────────────────────────────────────────────────────────────

/// Validated directed acyclic graph with role-tagged nodes.
///
/// Immutable after construction; every operation is a pure function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CausalDag {
    roles: BTreeMap<String, NodeRole>,
    parents: BTreeMap<String, BTreeSet<String>>,
    children: BTreeMap<String, BTreeSet<String>>,
    edge_count: usize,
}

/// Validating constructor; the only way to obtain a [`CausalDag`].
pub fn build_dag<N, E>(nodes: N, edges: E) -> Result<CausalDag, DagError>
where
    N: IntoIterator<Item = (String, NodeRole)>,
    E: IntoIterator<Item = (String, String)>,
{
    let roles: BTreeMap<String, NodeRole> = nodes.into_iter().collect();
    let mut parents: BTreeMap<String, BTreeSet<String>> =
        roles.keys().map(|k| (k.clone(), BTreeSet::new())).collect();
    let mut children = parents.clone();
    let mut edge_count = 0usize;

    for (p, c) in edges {
        for endpoint in [&p, &c] {
            if !roles.contains_key(endpoint) {
                return Err(DagError::UnknownEndpoint {
                    parent: p.clone(),
                    child: c.clone(),
                    endpoint: endpoint.clone(),
                });
            }
        }
        if p == c {
            return Err(DagError::CycleDetected { cycle: vec![p.clone(), c] });
        }
        if !children.get_mut(&p).unwrap().insert(c.clone()) {
            return Err(DagError::DuplicateEdge { parent: p, child: c });
        }
        parents.get_mut(&c).unwrap().insert(p.clone());
        edge_count += 1;
    }

    let dag = CausalDag { roles, parents, children, edge_count };
    if let Some(cycle) = dag.find_cycle() {
        return Err(DagError::CycleDetected { cycle });
    }
    Ok(dag)
}

impl CausalDag {
    // ── Accessors ────────────────────────────────────────────────────────────

    pub fn node_names(&self) -> impl Iterator<Item = &String> {
        self.roles.keys()
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, node: &str) -> bool {
        self.roles.contains_key(node)
    }

    pub fn role(&self, node: &str) -> Option<NodeRole> {
        self.roles.get(node).copied()
    }

    pub fn parents_of(&self, node: &str) -> Result<&BTreeSet<String>, DagError> {
        self.parents
            .get(node)
            .ok_or_else(|| DagError::UnknownNode { node: node.to_string() })
    }

    pub fn children_of(&self, node: &str) -> Result<&BTreeSet<String>, DagError> {
        self.children
            .get(node)
            .ok_or_else(|| DagError::UnknownNode { node: node.to_string() })
    }

    /// Edges in deterministic (parent, child) order.
    pub fn edges(&self) -> Vec<(String, String)> {
        self.children
            .iter()
            .flat_map(|(p, cs)| cs.iter().map(move |c| (p.clone(), c.clone())))
            .collect()
    }

    fn require(&self, node: &str) -> Result<(), DagError> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(DagError::UnknownNode { node: node.to_string() })
        }
    }

    // ── Order and reachability ───────────────────────────────────────────────

    /// Topological order with lexicographic tie-breaking; total and
    /// deterministic for any valid DAG.
    pub fn topological_order(&self) -> Vec<String> {
        let mut indegree: BTreeMap<&String, usize> =
            self.parents.iter().map(|(n, ps)| (n, ps.len())).collect();
        let mut ready: BinaryHeap<Reverse<&String>> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(n, _)| Reverse(*n))
            .collect();
        let mut order = Vec::with_capacity(self.roles.len());
        while let Some(Reverse(node)) = ready.pop() {
            order.push(node.clone());
            for child in &self.children[node] {
                let d = indegree.get_mut(child).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(Reverse(child));
                }
            }
        }
        order
    }

    /// One directed cycle, if any: a node sequence `v0 -> v1 -> … -> v0`.
    fn find_cycle(&self) -> Option<Vec<String>> {
        let order = self.topological_order();
        if order.len() == self.roles.len() {
            return None;
        }
        let placed: BTreeSet<&String> = order.iter().collect();
        // DFS among the nodes that Kahn's algorithm could not place; every
        // such node lies on or leads into a cycle.
        let start = self.roles.keys().find(|n| !placed.contains(n)).unwrap();
        let mut stack = vec![start.clone()];
        let mut on_path: Vec<String> = Vec::new();
        let mut seen: BTreeSet<String> = BTreeSet::new();
        // Iterative DFS tracking the current path; cycle nodes all have
        // unplaced status, so the walk stays inside the cyclic core.
        fn dfs(
            dag: &CausalDag,
            node: &str,
            placed: &BTreeSet<&String>,
            on_path: &mut Vec<String>,
            seen: &mut BTreeSet<String>,
        ) -> Option<Vec<String>> {
            if let Some(pos) = on_path.iter().position(|n| n == node) {
                let mut cycle = on_path[pos..].to_vec();
                cycle.push(node.to_string());
                return Some(cycle);
            }
            if !seen.insert(node.to_string()) {
                return None;
            }
            on_path.push(node.to_string());
            for child in &dag.children[node] {
                if placed.contains(child) {
                    continue;
                }
                if let Some(c) = dfs(dag, child, placed, on_path, seen) {
                    return Some(c);
                }
            }
            on_path.pop();
            None
        }
        let _ = &mut stack;
        dfs(self, start, &placed, &mut on_path, &mut seen)
    }

    /// All strict descendants of `node`.
    pub fn descendants(&self, node: &str) -> Result<BTreeSet<String>, DagError> {
        self.require(node)?;
        let mut out = BTreeSet::new();
        let mut queue: VecDeque<&String> = self.children[node].iter().collect();
        while let Some(n) = queue.pop_front() {
            if out.insert(n.clone()) {
                queue.extend(self.children[n].iter());
            }
        }
        Ok(out)
    }

    /// Nodes that are conditioned on, or have a conditioned descendant —
    /// exactly the set at which a collider is open.
    fn conditioned_or_ancestor_of_conditioned(
        &self,
        given: &BTreeSet<String>,
    ) -> BTreeSet<String> {
        let mut out = given.clone();
        let mut queue: VecDeque<String> = given.iter().cloned().collect();
        while let Some(n) = queue.pop_front() {
            for p in &self.parents[&n] {
                if out.insert(p.clone()) {
                    queue.push_back(p.clone());
                }
            }
        }
        out
    }

    // ── d-separation ─────────────────────────────────────────────────────────

    /// Standard d-separation via reachability (Bayes-ball): `true` iff every
    /// path between `x` and `y` is blocked by `given`. Chains and forks block
    /// when their middle node is conditioned; a collider blocks unless it or
    /// one of its descendants is conditioned.
    pub fn d_separated(
        &self,
        x: &str,
        y: &str,
        given: &BTreeSet<String>,
    ) -> Result<bool, DagError> {
        self.check_query(x, y, given)?;
        // An ancestor of the conditioning set receives the collider bounce.
        let open_collider_at = self.conditioned_or_ancestor_of_conditioned(given);

        // Visit states: (node, arrived-from-child?). Arriving "from a child"
        // also covers the start node, which may leave in any direction.
        let mut visited: BTreeSet<(String, bool)> = BTreeSet::new();
        let mut queue: VecDeque<(String, bool)> = VecDeque::new();
        queue.push_back((x.to_string(), true));

        while let Some((node, from_child)) = queue.pop_front() {
            if node == y {
                return Ok(false);
            }
            if !visited.insert((node.clone(), from_child)) {
                continue;
            }
            if from_child {
                if !given.contains(&node) {
                    for p in &self.parents[&node] {
                        queue.push_back((p.clone(), true));
                    }
                    for c in &self.children[&node] {
                        queue.push_back((c.clone(), false));
                    }
                }
            } else {
                if !given.contains(&node) {
                    for c in &self.children[&node] {
                        queue.push_back((c.clone(), false));
                    }
                }
                if open_collider_at.contains(&node) {
                    for p in &self.parents[&node] {
                        queue.push_back((p.clone(), true));
                    }
                }
            }
        }
        Ok(true)
    }

    fn check_query(&self, x: &str, y: &str, given: &BTreeSet<String>) -> Result<(), DagError> {
        self.require(x)?;
        self.require(y)?;
        for g in given {
            self.require(g)?;
        }
        for q in [x, y] {
            if given.contains(q) {
                return Err(DagError::OverlapError { node: q.to_string() });
            }
        }
        Ok(())
    }

    // ── Path enumeration ─────────────────────────────────────────────────────

    /// Every acyclic undirected path from `x` to `y`, lexicographic by node
    /// sequence. Exponential in the worst case; intended for the paper-scale
    /// graphs this library targets (≤ ~12 nodes).
    pub fn all_paths(&self, x: &str, y: &str) -> Result<Vec<PathWitness>, DagError> {
        self.require(x)?;
        self.require(y)?;
        let mut paths = Vec::new();
        let mut nodes = vec![x.to_string()];
        let mut steps = Vec::new();
        self.path_dfs(y, &mut nodes, &mut steps, &mut paths);
        Ok(paths)
    }

    fn path_dfs(
        &self,
        goal: &str,
        nodes: &mut Vec<String>,
        steps: &mut Vec<StepDir>,
        out: &mut Vec<PathWitness>,
    ) {
        let here = nodes.last().unwrap().clone();
        if here == goal {
            out.push(PathWitness {
                nodes: nodes.clone(),
                steps: steps.clone(),
                triples: classify(nodes, steps),
            });
            return;
        }
        // Neighbors in lexicographic order; forward steps sort before
        // backward on ties via the ordered union below.
        let mut neighbors: Vec<(String, StepDir)> = self.children[&here]
            .iter()
            .map(|c| (c.clone(), StepDir::Forward))
            .chain(self.parents[&here].iter().map(|p| (p.clone(), StepDir::Backward)))
            .collect();
        neighbors.sort();
        for (next, dir) in neighbors {
            if nodes.contains(&next) {
                continue;
            }
            nodes.push(next);
            steps.push(dir);
            self.path_dfs(goal, nodes, steps, out);
            nodes.pop();
            steps.pop();
        }
    }

    /// Paths left open by `given` — the diagnostic companion to
    /// [`CausalDag::d_separated`].
    pub fn open_paths(
        &self,
        x: &str,
        y: &str,
        given: &BTreeSet<String>,
    ) -> Result<Vec<PathWitness>, DagError> {
        self.check_query(x, y, given)?;
        let open_collider_at = self.conditioned_or_ancestor_of_conditioned(given);
        Ok(self
            .all_paths(x, y)?
            .into_iter()
            .filter(|p| p.open(given, &open_collider_at))
            .collect())
    }

    /// All backdoor paths from `treatment` to `outcome`: acyclic undirected
    /// paths whose first edge points into the treatment.
    pub fn backdoor_paths(
        &self,
        treatment: &str,
        outcome: &str,
    ) -> Result<Vec<PathWitness>, DagError> {
        if treatment == outcome {
            return Err(DagError::OverlapError { node: treatment.to_string() });
        }
        Ok(self
            .all_paths(treatment, outcome)?
            .into_iter()
            .filter(PathWitness::is_backdoor)
            .collect())
    }

    /// Backdoor adjustment validity: `z` contains no descendant of the
    /// treatment and blocks every backdoor path to the outcome.
    pub fn is_valid_adjustment_set(
        &self,
        treatment: &str,
        outcome: &str,
        z: &BTreeSet<String>,
    ) -> Result<bool, DagError> {
        self.check_query(treatment, outcome, z)?;
        let descendants = self.descendants(treatment)?;
        if z.iter().any(|n| descendants.contains(n)) {
            return Ok(false);
        }
        let open_collider_at = self.conditioned_or_ancestor_of_conditioned(z);
        Ok(self
            .backdoor_paths(treatment, outcome)?
            .iter()
            .all(|p| !p.open(z, &open_collider_at)))
    }

    // ── Intervention ─────────────────────────────────────────────────────────

    /// Graph surgery for do(targets): every edge INTO a target is removed,
    /// everything else is preserved.
    pub fn intervene(&self, targets: &BTreeSet<String>) -> Result<CausalDag, DagError> {
        for t in targets {
            self.require(t)?;
        }
        let mut out = self.clone();
        for t in targets {
            let ps = std::mem::take(out.parents.get_mut(t).unwrap());
            out.edge_count -= ps.len();
            for p in ps {
                out.children.get_mut(&p).unwrap().remove(t);
            }
        }
        Ok(out)
    }
}

fn classify(nodes: &[String], steps: &[StepDir]) -> Vec<TripleClass> {
    let _ = nodes;
    steps
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (StepDir::Forward, StepDir::Forward) => TripleClass::Chain,
            // into the middle from both sides
            (StepDir::Forward, StepDir::Backward) => TripleClass::Collider,
            // out of the middle on both sides
            (StepDir::Backward, StepDir::Forward) => TripleClass::Fork,
            // right-to-left chain
            (StepDir::Backward, StepDir::Backward) => TripleClass::Chain,
        })
        .collect()
}

// ── JSON file format ─────────────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct NodeFile {
    id: String,
    #[serde(default)]
    role: NodeRole,
}

#[derive(Serialize, Deserialize)]
struct DagFile {
    nodes: Vec<NodeFile>,
    edges: Vec<(String, String)>,
}

impl CausalDag {
    /// Parse the JSON file format:
    /// `{"nodes":[{"id":…,"role":…}], "edges":[["parent","child"], …]}`.
    pub fn from_json(text: &str) -> Result<CausalDag, String> {
        let file: DagFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        build_dag(
            file.nodes.into_iter().map(|n| (n.id, n.role)),
            file.edges,
        )
        .map_err(|e| e.to_string())
    }

    pub fn to_json(&self) -> String {
        let file = DagFile {
            nodes: self
                .roles
                .iter()
                .map(|(id, role)| NodeFile { id: id.clone(), role: *role })
                .collect(),
            edges: self.edges(),
        };
        serde_json::to_string_pretty(&file).expect("DAG serialization cannot fail")
    }

    /// DOT rendering; when `highlight_backdoor = Some((treatment, outcome))`,
    /// edges lying on any backdoor path are drawn red and dashed.
    pub fn to_dot(&self, highlight_backdoor: Option<(&str, &str)>) -> Result<String, DagError> {
        let mut marked: BTreeSet<(String, String)> = BTreeSet::new();
        if let Some((t, o)) = highlight_backdoor {
            for path in self.backdoor_paths(t, o)? {
                for (i, step) in path.steps.iter().enumerate() {
                    let (a, b) = (path.nodes[i].clone(), path.nodes[i + 1].clone());
                    marked.insert(match step {
                        StepDir::Forward => (a, b),
                        StepDir::Backward => (b, a),
                    });
                }
            }
        }
        let mut out = String::from("digraph causal {\n");
        for (node, role) in &self.roles {
            out.push_str(&format!("  \"{node}\" [comment=\"{role:?}\"];\n"));
        }
        for (p, c) in self.edges() {
            if marked.contains(&(p.clone(), c.clone())) {
                out.push_str(&format!("  \"{p}\" -> \"{c}\" [color=red, style=dashed];\n"));
            } else {
                out.push_str(&format!("  \"{p}\" -> \"{c}\";\n"));
            }
        }
        out.push_str("}\n");
        Ok(out)
    }
}

// ── Tests ────────────────────────────────────────────────────────────────────
