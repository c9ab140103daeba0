//! Structure families for the probability experiments.
//!
//! The main constructions: CFI graphs over connected 3-regular base graphs
//! (each base vertex becomes a 10-node gadget, each base edge a straight or
//! twisted pair connection), their augmentation with an ordered powerset
//! Boolean algebra, linearly ordered matched sets next to a Boolean
//! algebra, and additive structures carrying a sparse predicate.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use thiserror::Error;

use crate::structure::{Builtin, Structure, StructureError};

#[derive(Debug, Error)]
pub enum GeneratorError {
    #[error("3-regular graphs need an even vertex count, got {0}")]
    OddVertexCount(usize),
    #[error("need at least {min} vertices, got {got}")]
    TooFewVertices { min: usize, got: usize },
    #[error("edge ({0}, {1}) is out of range")]
    EdgeOutOfRange(usize, usize),
    #[error("self-loops are not allowed")]
    SelfLoop,
    #[error("parallel edge ({0}, {1}); use the multigraph constructor to allow them")]
    ParallelEdge(usize, usize),
    #[error("vertex {vertex} has degree {degree}, expected 3")]
    NotThreeRegular { vertex: usize, degree: usize },
    #[error("graph is not connected")]
    NotConnected,
    #[error("no simple connected 3-regular graph found within {0} pairing attempts")]
    RetryLimit(usize),
    #[error("twist set contains edge index {0}, but the base has fewer edges")]
    TwistOutOfRange(usize),
    #[error("not a CFI-shaped structure: {0}")]
    CfiShape(String),
    #[error("Boolean algebra on {atoms} atoms needs {required} elements, above the cap {cap}; raise the cap to build it anyway")]
    SizeCap {
        atoms: usize,
        required: u64,
        cap: u64,
    },
    #[error("matching/Boolean-algebra parameters must be at least 1, got p={p}, k={k}")]
    BadMatchingParams { p: usize, k: usize },
    #[error("sparse additive structures need a nonempty element set")]
    EmptySparseSet,
    #[error(transparent)]
    Structure(#[from] StructureError),
}

/// A connected 3-regular base graph. Parallel edges are allowed through the
/// multigraph constructor and carry distinct indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseGraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl BaseGraph {
    pub fn new(vertices: usize, edges: Vec<(usize, usize)>) -> Result<BaseGraph, GeneratorError> {
        let mut seen = BTreeSet::new();
        for &(u, v) in &edges {
            if !seen.insert((u.min(v), u.max(v))) {
                return Err(GeneratorError::ParallelEdge(u, v));
            }
        }
        Self::new_multigraph(vertices, edges)
    }

    pub fn new_multigraph(
        vertices: usize,
        edges: Vec<(usize, usize)>,
    ) -> Result<BaseGraph, GeneratorError> {
        if vertices < 2 {
            return Err(GeneratorError::TooFewVertices {
                min: 2,
                got: vertices,
            });
        }
        let mut degree = vec![0usize; vertices];
        for &(u, v) in &edges {
            if u >= vertices || v >= vertices {
                return Err(GeneratorError::EdgeOutOfRange(u, v));
            }
            if u == v {
                return Err(GeneratorError::SelfLoop);
            }
            degree[u] += 1;
            degree[v] += 1;
        }
        if let Some(vertex) = degree.iter().position(|&d| d != 3) {
            return Err(GeneratorError::NotThreeRegular {
                vertex,
                degree: degree[vertex],
            });
        }
        let graph = BaseGraph { vertices, edges };
        if !graph.is_connected() {
            return Err(GeneratorError::NotConnected);
        }
        Ok(graph)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.vertices];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.vertices];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.vertices
    }

    /// Incident edge indices of `u`, ascending; the position of an edge in
    /// this list is its slot in `u`'s gadget.
    fn incident_slots(&self, u: usize) -> Vec<usize> {
        self.edges
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a == u || b == u)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Named 3-regular bases. `Theta` is the 2-vertex graph with three parallel
/// edges, the smallest multigraph base.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseGraphName {
    K4,
    Prism,
    Petersen,
    Theta,
}

impl BaseGraphName {
    pub fn parse(name: &str) -> Option<BaseGraphName> {
        match name {
            "k4" => Some(BaseGraphName::K4),
            "prism" => Some(BaseGraphName::Prism),
            "petersen" => Some(BaseGraphName::Petersen),
            "theta" => Some(BaseGraphName::Theta),
            _ => None,
        }
    }
}

pub fn builtin_base_graph(name: BaseGraphName) -> BaseGraph {
    match name {
        BaseGraphName::K4 => {
            BaseGraph::new(4, vec![(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap()
        }
        BaseGraphName::Prism => BaseGraph::new(
            6,
            vec![
                (0, 1),
                (0, 2),
                (1, 2),
                (3, 4),
                (3, 5),
                (4, 5),
                (0, 3),
                (1, 4),
                (2, 5),
            ],
        )
        .unwrap(),
        BaseGraphName::Petersen => {
            let mut edges = Vec::new();
            for i in 0..5 {
                edges.push((i, (i + 1) % 5));
                edges.push((i, i + 5));
                edges.push((5 + i, 5 + (i + 2) % 5));
            }
            BaseGraph::new(10, edges).unwrap()
        }
        BaseGraphName::Theta => BaseGraph::new_multigraph(2, vec![(0, 1), (0, 1), (0, 1)]).unwrap(),
    }
}

/// Sample a simple connected 3-regular graph by the pairing model with
/// retries; deterministic under the seed.
pub fn random_3regular(v: usize, seed: u64) -> Result<BaseGraph, GeneratorError> {
    if v % 2 == 1 {
        return Err(GeneratorError::OddVertexCount(v));
    }
    if v < 4 {
        return Err(GeneratorError::TooFewVertices { min: 4, got: v });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    const ATTEMPTS: usize = 1000;
    for _ in 0..ATTEMPTS {
        let mut stubs: Vec<usize> = (0..3 * v).collect();
        stubs.shuffle(&mut rng);
        let edges: Vec<(usize, usize)> = stubs
            .chunks(2)
            .map(|pair| (pair[0] / 3, pair[1] / 3))
            .collect();
        if let Ok(graph) = BaseGraph::new(v, edges) {
            return Ok(graph);
        }
    }
    Err(GeneratorError::RetryLimit(ATTEMPTS))
}

/// A CFI instance: a base graph and the set of edge indices to twist.
#[derive(Debug, Clone)]
pub struct CfiSpec {
    pub base: BaseGraph,
    pub twist_set: BTreeSet<usize>,
}

impl CfiSpec {
    pub fn new(base: BaseGraph, twist_set: BTreeSet<usize>) -> Result<CfiSpec, GeneratorError> {
        if let Some(&bad) = twist_set.iter().find(|&&e| e >= base.edge_count()) {
            return Err(GeneratorError::TwistOutOfRange(bad));
        }
        Ok(CfiSpec { base, twist_set })
    }
}

// Gadget layout: base vertex u owns nodes 10u..10u+10. Nodes 10u..10u+4 are
// the centre group, one per even subset of {1,2,3} in the fixed order
// [{}, {1,2}, {1,3}, {2,3}]. Slot j of the gadget (the j-th incident edge in
// ascending edge-index order) owns the pair (a, b) = (10u+4+2j, 10u+5+2j).
// Centre node for subset S is adjacent to a_j when j+1 is in S, else b_j,
// so every centre node touches an even number of a-nodes.
const CENTRE_SUBSETS: [[bool; 3]; 4] = [
    [false, false, false],
    [true, true, false],
    [true, false, true],
    [false, true, true],
];

fn gadget_centre(u: usize, c: usize) -> usize {
    10 * u + c
}

fn gadget_pair(u: usize, slot: usize) -> (usize, usize) {
    (10 * u + 4 + 2 * slot, 10 * u + 5 + 2 * slot)
}

struct CfiParts {
    nodes: usize,
    /// Symmetric edge relation (both directions).
    edges: BTreeSet<Vec<usize>>,
    /// Centre groups per base vertex.
    centre_groups: Vec<Vec<usize>>,
    /// The (a-side, b-side) pair of each slot, indexed by base edge: the two
    /// edge groups joined by that base edge.
    edgets: Vec<[(usize, usize); 2]>,
}

fn build_cfi_parts(spec: &CfiSpec) -> CfiParts {
    let g = &spec.base;
    let mut edges = BTreeSet::new();
    let mut add = |x: usize, y: usize| {
        edges.insert(vec![x, y]);
        edges.insert(vec![y, x]);
    };
    let mut centre_groups = Vec::with_capacity(g.vertex_count());
    for u in 0..g.vertex_count() {
        centre_groups.push((0..4).map(|c| gadget_centre(u, c)).collect::<Vec<_>>());
        let slots = g.incident_slots(u);
        debug_assert_eq!(slots.len(), 3);
        for (c, subset) in CENTRE_SUBSETS.iter().enumerate() {
            for (j, &takes_a) in subset.iter().enumerate() {
                let (a, b) = gadget_pair(u, j);
                add(gadget_centre(u, c), if takes_a { a } else { b });
            }
        }
    }
    let mut edgets = Vec::with_capacity(g.edge_count());
    for (e, &(u, v)) in g.edges().iter().enumerate() {
        let slot_u = g.incident_slots(u).iter().position(|&i| i == e).unwrap();
        let slot_v = g.incident_slots(v).iter().position(|&i| i == e).unwrap();
        let (au, bu) = gadget_pair(u, slot_u);
        let (av, bv) = gadget_pair(v, slot_v);
        if spec.twist_set.contains(&e) {
            add(au, bv);
            add(bu, av);
        } else {
            add(au, av);
            add(bu, bv);
        }
        edgets.push([(au, bu), (av, bv)]);
    }
    CfiParts {
        nodes: 10 * g.vertex_count(),
        edges,
        centre_groups,
        edgets,
    }
}

fn equivalence_closure(classes: &[Vec<usize>], n: usize) -> BTreeSet<Vec<usize>> {
    let mut rel = BTreeSet::new();
    for x in 0..n {
        rel.insert(vec![x, x]);
    }
    for class in classes {
        for &x in class {
            for &y in class {
                rel.insert(vec![x, y]);
            }
        }
    }
    rel
}

/// The CFI graph of a spec, over `{E, sim}`: 10 nodes per base vertex, `sim`
/// holding one size-4 class per gadget centre group and one size-2 class
/// per edge pair.
pub fn gen_cfi(spec: &CfiSpec) -> Result<Structure, GeneratorError> {
    let parts = build_cfi_parts(spec);
    let mut classes: Vec<Vec<usize>> = parts.centre_groups.clone();
    for edget in &parts.edgets {
        for &(a, b) in edget {
            classes.push(vec![a, b]);
        }
    }
    let sim = equivalence_closure(&classes, parts.nodes);
    let mut rels = BTreeMap::new();
    rels.insert("E".to_string(), (2usize, parts.edges));
    rels.insert("sim".to_string(), (2usize, sim));
    Ok(Structure::empty(parts.nodes)?.expand(rels)?)
}

/// Recovered shape of a `{E, sim}` CFI structure under arbitrary labelling.
struct CfiShape {
    /// Size-2 sim classes, each sorted.
    edge_groups: Vec<[usize; 2]>,
    /// Size-4 sim classes.
    centre_groups: Vec<Vec<usize>>,
    /// Pairs of edge-group indices joined by cross edges.
    edgets: Vec<(usize, usize)>,
    /// Adjacency of the E relation.
    adj: Vec<BTreeSet<usize>>,
}

fn recover_cfi_shape(structure: &Structure) -> Result<CfiShape, GeneratorError> {
    let n = structure.universe_size();
    let sim = structure
        .relation("sim")
        .ok_or_else(|| GeneratorError::CfiShape("missing sim relation".into()))?;
    let e = structure
        .relation("E")
        .ok_or_else(|| GeneratorError::CfiShape("missing E relation".into()))?;

    let mut adj = vec![BTreeSet::new(); n];
    for t in e {
        if t[0] == t[1] {
            return Err(GeneratorError::CfiShape("E has a self-loop".into()));
        }
        adj[t[0]].insert(t[1]);
        if !e.contains(&vec![t[1], t[0]]) {
            return Err(GeneratorError::CfiShape("E is not symmetric".into()));
        }
    }

    let mut class_of = vec![usize::MAX; n];
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for x in 0..n {
        if class_of[x] != usize::MAX {
            continue;
        }
        let members: Vec<usize> = (0..n)
            .filter(|&y| sim.contains(&vec![x, y]) || y == x)
            .collect();
        for &y in &members {
            if class_of[y] != usize::MAX {
                return Err(GeneratorError::CfiShape("sim is not an equivalence".into()));
            }
            class_of[y] = classes.len();
            if !sim.contains(&vec![y, x]) {
                return Err(GeneratorError::CfiShape("sim is not symmetric".into()));
            }
        }
        classes.push(members);
    }

    let mut edge_groups = Vec::new();
    let mut centre_groups = Vec::new();
    let mut group_index = vec![usize::MAX; classes.len()];
    for (i, class) in classes.iter().enumerate() {
        match class.len() {
            2 => {
                group_index[i] = edge_groups.len();
                edge_groups.push([class[0], class[1]]);
            }
            4 => centre_groups.push(class.clone()),
            len => {
                return Err(GeneratorError::CfiShape(format!(
                    "sim class of size {len}; expected 2 or 4"
                )))
            }
        }
    }
    if edge_groups.len() != 3 * centre_groups.len() {
        return Err(GeneratorError::CfiShape(
            "expected three edge groups per centre group".into(),
        ));
    }

    // Edgets: edge groups joined by cross edges between their nodes.
    let mut partner = vec![usize::MAX; edge_groups.len()];
    for (g, &[a, b]) in edge_groups.iter().enumerate() {
        for &x in &[a, b] {
            for &y in &adj[x] {
                let c = class_of[y];
                let other = group_index[c];
                if other != usize::MAX && other != g {
                    if partner[g] != usize::MAX && partner[g] != other {
                        return Err(GeneratorError::CfiShape(
                            "edge group crosses into two different groups".into(),
                        ));
                    }
                    partner[g] = other;
                }
            }
        }
    }
    let mut edgets = Vec::new();
    for (g, &p) in partner.iter().enumerate() {
        if p == usize::MAX || partner[p] != g {
            return Err(GeneratorError::CfiShape(
                "cross edges do not pair the edge groups".into(),
            ));
        }
        if g < p {
            edgets.push((g, p));
        }
    }
    Ok(CfiShape {
        edge_groups,
        centre_groups,
        edgets,
        adj,
    })
}

impl CfiShape {
    /// The a-node of group `g`: the smaller node, or the larger when the
    /// group's flag is set.
    fn a_node(&self, g: usize, flipped: &[bool]) -> usize {
        let [lo, hi] = self.edge_groups[g];
        if flipped[g] {
            hi
        } else {
            lo
        }
    }

    /// Twisted edgets and odd centre groups relative to an a-labelling.
    fn parity_components(
        &self,
        flipped: &[bool],
    ) -> Result<(Vec<bool>, Vec<bool>), GeneratorError> {
        let a_nodes: BTreeSet<usize> = (0..self.edge_groups.len())
            .map(|g| self.a_node(g, flipped))
            .collect();
        let twisted = self
            .edgets
            .iter()
            .map(|&(g, h)| {
                let a = self.a_node(g, flipped);
                let b_other = self.edge_groups[h]
                    .iter()
                    .copied()
                    .find(|&x| x != self.a_node(h, flipped))
                    .unwrap();
                self.adj[a].contains(&b_other)
            })
            .collect();
        let mut odd = Vec::with_capacity(self.centre_groups.len());
        for group in &self.centre_groups {
            let parities: BTreeSet<bool> = group
                .iter()
                .map(|&c| self.adj[c].iter().filter(|x| a_nodes.contains(x)).count() % 2 == 1)
                .collect();
            if parities.len() != 1 {
                return Err(GeneratorError::CfiShape(
                    "centre nodes of one group disagree on a-neighbour parity".into(),
                ));
            }
            odd.push(parities.into_iter().next().unwrap());
        }
        Ok((twisted, odd))
    }
}

/// The twist parity of a CFI structure: choose the smallest node of each
/// edge group as its a-node; an edget is twisted when an a-node is adjacent
/// to the other side's b-node, a centre group is odd when its nodes have an
/// odd number of a-neighbours. Returns (odd groups + twisted edgets) mod 2,
/// an isomorphism invariant.
pub fn twist_parity(structure: &Structure) -> Result<u8, GeneratorError> {
    let shape = recover_cfi_shape(structure)?;
    let flipped = vec![false; shape.edge_groups.len()];
    let (twisted, odd) = shape.parity_components(&flipped)?;
    let count = twisted.iter().filter(|&&t| t).count() + odd.iter().filter(|&&o| o).count();
    Ok((count % 2) as u8)
}

/// Default cap on the Boolean algebra size of [`gen_tcfi`].
pub const DEFAULT_TCFI_CAP: u64 = 1 << 12;

/// The Boolean-algebra augmentation of a CFI graph, over
/// `{E, sim, less, sqsubseteq, P, O}`.
///
/// With `m` = edges + vertices of the base, the universe appends the 2^m
/// subsets of an m-atom powerset algebra after the CFI nodes; subset `s`
/// sits at element `10|V| + s`, so atom `i` is `10|V| + 2^i`. `P` marks the
/// algebra, `sqsubseteq` is the subset order, `O` holds for even-cardinality
/// members, `less` orders the atoms (atom `i` below atom `j` when `i < j`).
/// `sim` extends the CFI equivalence by linking atom `i` to the four nodes
/// of edget `i` (for `i` below the edge count) and atom `edges + u` to the
/// centre group of base vertex `u`; other algebra members are singletons.
pub fn gen_tcfi(spec: &CfiSpec) -> Result<Structure, GeneratorError> {
    gen_tcfi_capped(spec, DEFAULT_TCFI_CAP)
}

pub fn gen_tcfi_capped(spec: &CfiSpec, cap: u64) -> Result<Structure, GeneratorError> {
    let m = spec.base.edge_count() + spec.base.vertex_count();
    let ba_size =
        1u64.checked_shl(m as u32)
            .filter(|&s| s <= cap)
            .ok_or(GeneratorError::SizeCap {
                atoms: m,
                required: 1u64.checked_shl(m as u32).unwrap_or(u64::MAX),
                cap,
            })?;
    let parts = build_cfi_parts(spec);
    let ba_base = parts.nodes;
    let total = ba_base + ba_size as usize;
    let atom = |i: usize| ba_base + (1usize << i);

    let mut classes: Vec<Vec<usize>> = Vec::new();
    for (e, edget) in parts.edgets.iter().enumerate() {
        let mut class = vec![atom(e)];
        for &(a, b) in edget {
            class.push(a);
            class.push(b);
        }
        classes.push(class);
    }
    for (u, group) in parts.centre_groups.iter().enumerate() {
        let mut class = vec![atom(spec.base.edge_count() + u)];
        class.extend(group.iter().copied());
        classes.push(class);
    }
    let sim = equivalence_closure(&classes, total);

    let mut less = BTreeSet::new();
    for i in 0..m {
        for j in (i + 1)..m {
            less.insert(vec![atom(i), atom(j)]);
        }
    }

    let mut sqsubseteq = BTreeSet::new();
    for s in 0..ba_size as usize {
        let mut t = s;
        // Enumerate supersets of s by stepping through the complement.
        loop {
            sqsubseteq.insert(vec![ba_base + s, ba_base + t]);
            if t == ba_size as usize - 1 {
                break;
            }
            t = (t + 1) | s;
        }
    }

    let p: BTreeSet<Vec<usize>> = (0..ba_size as usize).map(|s| vec![ba_base + s]).collect();
    let o: BTreeSet<Vec<usize>> = (0..ba_size as usize)
        .filter(|s| s.count_ones() % 2 == 0)
        .map(|s| vec![ba_base + s])
        .collect();

    let mut rels = BTreeMap::new();
    rels.insert("E".to_string(), (2usize, parts.edges));
    rels.insert("sim".to_string(), (2usize, sim));
    rels.insert("less".to_string(), (2usize, less));
    rels.insert("sqsubseteq".to_string(), (2usize, sqsubseteq));
    rels.insert("P".to_string(), (1usize, p));
    rels.insert("O".to_string(), (1usize, o));
    Ok(Structure::empty(total)?.expand(rels)?)
}

/// Parameters of the matched-order structures: `2p` matched elements before
/// a `2^k`-element Boolean algebra.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchingBaSpec {
    pub pair_count: usize,
    pub atom_count: usize,
}

impl MatchingBaSpec {
    pub fn new(pair_count: usize, atom_count: usize) -> Result<MatchingBaSpec, GeneratorError> {
        if pair_count == 0 || atom_count == 0 {
            return Err(GeneratorError::BadMatchingParams {
                p: pair_count,
                k: atom_count,
            });
        }
        Ok(MatchingBaSpec {
            pair_count,
            atom_count,
        })
    }

    pub fn matched_size(&self) -> usize {
        2 * self.pair_count
    }

    pub fn algebra_size(&self) -> usize {
        1 << self.atom_count
    }
}

/// A linearly ordered structure over `{leq, E, P}`: elements `0..2p` form
/// the matched set M (marked by `P`, matched in successive pairs by `E`),
/// elements `2p..2p+2^k` carry a k-atom powerset Boolean algebra whose
/// subset order is `E` restricted to that block.
pub fn gen_matching_ba(spec: &MatchingBaSpec) -> Result<Structure, GeneratorError> {
    let m = spec.matched_size();
    let total = m + spec.algebra_size();
    let mut e = BTreeSet::new();
    for i in 0..spec.pair_count {
        e.insert(vec![2 * i, 2 * i + 1]);
        e.insert(vec![2 * i + 1, 2 * i]);
    }
    for s in 0..spec.algebra_size() {
        for t in 0..spec.algebra_size() {
            if s & t == s {
                e.insert(vec![m + s, m + t]);
            }
        }
    }
    let p: BTreeSet<Vec<usize>> = (0..m).map(|x| vec![x]).collect();
    let mut rels = BTreeMap::new();
    rels.insert("leq".to_string(), (2usize, Builtin::Leq.relation(total)));
    rels.insert("E".to_string(), (2usize, e));
    rels.insert("P".to_string(), (1usize, p));
    Ok(Structure::empty(total)?.expand(rels)?)
}

/// Whether the parameters satisfy `2^|M| >= |N|^2`, i.e. `p >= k` in
/// exact integer form.
pub fn in_class_b(spec: &MatchingBaSpec) -> bool {
    spec.pair_count >= spec.atom_count
}

/// A finite set of naturals, as used by the sparse additive structures.
pub type SparseSet = BTreeSet<usize>;

/// Whether every window `{n, ..., 3n}` contains at most one element of `q`.
pub fn is_sparse(q: &SparseSet) -> bool {
    let max = match q.iter().next_back() {
        Some(&m) => m,
        None => return true,
    };
    for n in 0..=max {
        if q.range(n..=3 * n).count() > 1 {
            return false;
        }
    }
    true
}

/// The additive structure `([0, max q], plus, P = q)` over `{plus, P}`.
pub fn gen_sparse_additive(q: &SparseSet) -> Result<Structure, GeneratorError> {
    let max = *q.iter().next_back().ok_or(GeneratorError::EmptySparseSet)?;
    let n = max + 1;
    let p: BTreeSet<Vec<usize>> = q.iter().map(|&x| vec![x]).collect();
    let mut rels = BTreeMap::new();
    rels.insert("plus".to_string(), (3usize, Builtin::Plus.relation(n)));
    rels.insert("P".to_string(), (1usize, p));
    Ok(Structure::empty(n)?.expand(rels)?)
}
