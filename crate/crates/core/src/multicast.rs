//! Routing networks and multicast-cost oracles.
//!
//! Tree networks get the exact cost of the minimal subtree spanning the
//! controller and the target members. Graph networks use the weight of a
//! minimum spanning tree over the metric closure of `Y ∪ {controller}`, which
//! is the multicast cost the routed algorithms are analysed against. Table
//! networks look the cost up in an explicit subset table.
//!
//! Also here: the metric closure itself, Kruskal MST with a fixed tie-break
//! and the light approximate shortest-path tree (LAST) built over the closure.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use petgraph::algo::{connected_components, dijkstra};
use petgraph::graph::{NodeIndex, UnGraph};
use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::model::{MemberId, MulticastOracle, VertexId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
    pub cost: u64,
}

impl Edge {
    pub fn new(u: VertexId, v: VertexId, cost: u64) -> Self {
        Self { u, v, cost }
    }
}

/// Undirected edge-weighted network. Edge order is kept as given.
#[derive(Clone, Debug)]
pub struct Network {
    graph: UnGraph<VertexId, u64>,
    index: BTreeMap<VertexId, NodeIndex>,
    edges: Vec<Edge>,
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.edges == other.edges && self.index.keys().eq(other.index.keys())
    }
}

impl Eq for Network {}

impl Network {
    /// Network over `vertices` plus every edge endpoint. Rejects self-loops
    /// and repeated undirected edges.
    pub fn new(vertices: impl IntoIterator<Item = VertexId>, edges: Vec<Edge>) -> Result<Self> {
        let mut graph = UnGraph::new_undirected();
        let mut index = BTreeMap::new();
        let all: BTreeSet<VertexId> = vertices
            .into_iter()
            .chain(edges.iter().flat_map(|e| [e.u.clone(), e.v.clone()]))
            .collect();
        for v in all {
            let ix = graph.add_node(v.clone());
            index.insert(v, ix);
        }
        let mut seen = BTreeSet::new();
        for e in &edges {
            if e.u == e.v {
                return Err(Error::InvalidNetwork(format!("self-loop at {}", e.u)));
            }
            let key = if e.u < e.v { (&e.u, &e.v) } else { (&e.v, &e.u) };
            if !seen.insert(key) {
                return Err(Error::InvalidNetwork(format!("duplicate edge {} {}", e.u, e.v)));
            }
            graph.add_edge(index[&e.u], index[&e.v], e.cost);
        }
        Ok(Self { graph, index, edges })
    }

    pub fn from_edges(edges: Vec<Edge>) -> Result<Self> {
        Self::new(std::iter::empty(), edges)
    }

    pub fn contains(&self, v: &VertexId) -> bool {
        self.index.contains_key(v)
    }

    /// Vertices in id order.
    pub fn vertices(&self) -> impl Iterator<Item = &VertexId> + '_ {
        self.index.keys()
    }

    pub fn vertex_count(&self) -> usize {
        self.index.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_connected(&self) -> bool {
        self.index.is_empty() || connected_components(&self.graph) == 1
    }

    pub fn is_tree(&self) -> bool {
        self.is_connected() && self.edges.len() + 1 == self.index.len()
    }

    fn node(&self, v: &VertexId) -> Result<NodeIndex> {
        self.index
            .get(v)
            .copied()
            .ok_or_else(|| Error::InvalidNetwork(format!("unknown vertex {v}")))
    }

    /// Shortest-path distances from `source` to every reachable vertex.
    pub fn distances_from(&self, source: &VertexId) -> Result<HashMap<VertexId, u64>> {
        let start = self.node(source)?;
        Ok(dijkstra(&self.graph, start, None, |e| *e.weight())
            .into_iter()
            .map(|(ix, d)| (self.graph[ix].clone(), d))
            .collect())
    }
}

/// Explicit multicast-cost table keyed by sorted member subsets.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CostTable {
    entries: BTreeMap<Vec<MemberId>, u64>,
}

impl CostTable {
    pub fn new(entries: impl IntoIterator<Item = (Vec<MemberId>, u64)>) -> Result<Self> {
        let mut table = BTreeMap::new();
        for (mut set, cost) in entries {
            set.sort();
            set.dedup();
            if table.insert(set.clone(), cost).is_some() {
                return Err(Error::InvalidNetwork(format!(
                    "subset {} listed twice",
                    set.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(",")
                )));
            }
        }
        Ok(Self { entries: table })
    }

    pub fn get(&self, set: &[MemberId]) -> Option<u64> {
        self.entries.get(set).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Vec<MemberId>, u64)> + '_ {
        self.entries.iter().map(|(k, v)| (k, *v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RoutingNetwork {
    Tree(Network),
    Graph(Network),
    Table(CostTable),
}

impl RoutingNetwork {
    pub fn kind(&self) -> &'static str {
        match self {
            RoutingNetwork::Tree(_) => "tree",
            RoutingNetwork::Graph(_) => "graph",
            RoutingNetwork::Table(_) => "table",
        }
    }

    /// Multicast oracle for this network over the given members.
    pub fn oracle(
        &self,
        controller: &VertexId,
        members: &[MemberId],
    ) -> Result<Box<dyn MulticastOracle + Send>> {
        Ok(match self {
            RoutingNetwork::Tree(net) => Box::new(TreeOracle::new(net, controller)?),
            RoutingNetwork::Graph(net) => Box::new(GraphOracle::new(net, controller, members)?),
            RoutingNetwork::Table(table) => Box::new(TableOracle(table.clone())),
        })
    }
}

/// Exact multicast cost on a tree network: weight of the minimal subtree that
/// connects the controller to the targets.
#[derive(Clone, Debug)]
pub struct TreeOracle {
    rooted: SpanningTree,
    index: HashMap<MemberId, usize>,
}

impl TreeOracle {
    pub fn new(net: &Network, controller: &VertexId) -> Result<Self> {
        let rooted = SpanningTree::from_tree_network(net, controller)?;
        let index = rooted
            .points
            .iter()
            .enumerate()
            .map(|(i, v)| (v.member(), i))
            .collect();
        Ok(Self { rooted, index })
    }

    pub fn rooted(&self) -> &SpanningTree {
        &self.rooted
    }
}

impl MulticastOracle for TreeOracle {
    fn multicast_cost(&self, members: &[MemberId]) -> Result<u64> {
        let mut marked = vec![false; self.rooted.points.len()];
        marked[self.rooted.root] = true;
        let mut cost = 0u64;
        for m in members {
            let mut v = *self
                .index
                .get(m)
                .ok_or_else(|| Error::UnknownMember(m.clone()))?;
            while !marked[v] {
                marked[v] = true;
                cost = cost
                    .checked_add(self.rooted.parent_cost[v])
                    .ok_or(Error::Overflow)?;
                v = self.rooted.parent[v].expect("non-root vertex has a parent");
            }
        }
        Ok(cost)
    }
}

/// Subtree cost of `targets` on a tree network rooted at `controller`.
pub fn tree_multicast_cost(net: &Network, controller: &VertexId, targets: &[MemberId]) -> Result<u64> {
    let mut sorted = targets.to_vec();
    sorted.sort();
    sorted.dedup();
    TreeOracle::new(net, controller)?.multicast_cost(&sorted)
}

/// MST-of-closure multicast cost. The closure over all members is computed
/// once and restricted per query.
#[derive(Clone, Debug)]
pub struct GraphOracle {
    metric: Metric,
}

impl GraphOracle {
    pub fn new(net: &Network, controller: &VertexId, members: &[MemberId]) -> Result<Self> {
        Ok(Self {
            metric: metric_closure(net, controller, members)?,
        })
    }

    pub fn from_metric(metric: Metric) -> Self {
        Self { metric }
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }
}

impl MulticastOracle for GraphOracle {
    fn multicast_cost(&self, members: &[MemberId]) -> Result<u64> {
        let mut points = Vec::with_capacity(members.len() + 1);
        points.push(self.metric.root);
        for m in members {
            let i = self
                .metric
                .index_of(&m.vertex())
                .ok_or_else(|| Error::UnknownMember(m.clone()))?;
            if i != self.metric.root {
                points.push(i);
            }
        }
        self.metric.mst_weight(&points)
    }
}

/// MST-of-closure multicast cost for one subset of a graph network.
pub fn graph_multicast_cost(net: &Network, controller: &VertexId, targets: &[MemberId]) -> Result<u64> {
    let mut sorted = targets.to_vec();
    sorted.sort();
    sorted.dedup();
    GraphOracle::new(net, controller, &sorted)?.multicast_cost(&sorted)
}

/// Table lookup; missing subsets are an error.
#[derive(Clone, Debug)]
pub struct TableOracle(pub CostTable);

impl MulticastOracle for TableOracle {
    fn multicast_cost(&self, members: &[MemberId]) -> Result<u64> {
        if members.is_empty() {
            return Ok(self.0.get(members).unwrap_or(0));
        }
        self.0
            .get(members)
            .ok_or_else(|| Error::OracleUndefined(members.to_vec()))
    }
}

/// Stored cost of `targets` in a table network.
pub fn table_multicast_cost(table: &CostTable, targets: &[MemberId]) -> Result<u64> {
    let mut sorted = targets.to_vec();
    sorted.sort();
    sorted.dedup();
    TableOracle(table.clone()).multicast_cost(&sorted)
}

/// Complete graph of shortest-path distances over a point set. Points are
/// kept in id order; `root` is the controller's index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Metric {
    points: Vec<VertexId>,
    root: usize,
    dist: Vec<Vec<u64>>,
}

impl Metric {
    /// Metric from an explicit distance matrix. The matrix rows follow
    /// `points`, which are re-sorted by id here.
    pub fn from_matrix(points: Vec<VertexId>, root: &VertexId, dist: Vec<Vec<u64>>) -> Result<Self> {
        let k = points.len();
        if dist.len() != k || dist.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidParams("distance matrix shape mismatch".into()));
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| points[a].cmp(&points[b]));
        let sorted: Vec<VertexId> = order.iter().map(|&i| points[i].clone()).collect();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParams("duplicate metric point".into()));
        }
        let dist = order
            .iter()
            .map(|&i| order.iter().map(|&j| dist[i][j]).collect())
            .collect();
        let root = sorted
            .binary_search(root)
            .map_err(|_| Error::InvalidParams(format!("root {root} is not a metric point")))?;
        let metric = Self {
            points: sorted,
            root,
            dist,
        };
        metric.check()?;
        Ok(metric)
    }

    /// Zero diagonal, symmetry and triangle inequality.
    pub fn check(&self) -> Result<()> {
        let k = self.points.len();
        for i in 0..k {
            if self.dist[i][i] != 0 {
                return Err(Error::InvalidParams(format!("nonzero self distance at {}", self.points[i])));
            }
            for j in 0..k {
                if self.dist[i][j] != self.dist[j][i] {
                    return Err(Error::InvalidParams("asymmetric distances".into()));
                }
                for m in 0..k {
                    if self.dist[i][j] > self.dist[i][m].saturating_add(self.dist[m][j]) {
                        return Err(Error::InvalidParams("triangle inequality violated".into()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn points(&self) -> &[VertexId] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn distance(&self, i: usize, j: usize) -> u64 {
        self.dist[i][j]
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.points.binary_search(v).ok()
    }

    /// Sub-metric on `vertices` plus the root.
    pub fn restrict(&self, vertices: &[VertexId]) -> Result<Metric> {
        let mut keep: Vec<usize> = vertices
            .iter()
            .map(|v| {
                self.index_of(v)
                    .ok_or_else(|| Error::InvalidParams(format!("{v} is not a metric point")))
            })
            .collect::<Result<_>>()?;
        keep.push(self.root);
        keep.sort_unstable();
        keep.dedup();
        let root = keep.binary_search(&self.root).expect("root kept");
        Ok(Metric {
            points: keep.iter().map(|&i| self.points[i].clone()).collect(),
            root,
            dist: keep
                .iter()
                .map(|&i| keep.iter().map(|&j| self.dist[i][j]).collect())
                .collect(),
        })
    }

    /// MST weight over a subset of point indices (Prim, dense).
    pub fn mst_weight(&self, subset: &[usize]) -> Result<u64> {
        let k = subset.len();
        if k <= 1 {
            return Ok(0);
        }
        let mut in_tree = vec![false; k];
        let mut best = vec![u64::MAX; k];
        best[0] = 0;
        let mut total = 0u64;
        for _ in 0..k {
            let (next, _) = (0..k)
                .filter(|&i| !in_tree[i])
                .map(|i| (i, best[i]))
                .min_by_key(|&(i, d)| (d, i))
                .expect("vertex left");
            in_tree[next] = true;
            total = total.checked_add(best[next]).ok_or(Error::Overflow)?;
            for i in 0..k {
                let d = self.dist[subset[next]][subset[i]];
                if !in_tree[i] && d < best[i] {
                    best[i] = d;
                }
            }
        }
        Ok(total)
    }
}

/// All-pairs shortest-path distances among `members ∪ {controller}`.
pub fn metric_closure(net: &Network, controller: &VertexId, members: &[MemberId]) -> Result<Metric> {
    let mut points: Vec<VertexId> = members.iter().map(|m| m.vertex()).collect();
    points.push(controller.clone());
    points.sort();
    points.dedup();
    let mut dist = Vec::with_capacity(points.len());
    for p in &points {
        let from = net.distances_from(p)?;
        let row = points
            .iter()
            .map(|q| from.get(q).copied().ok_or(Error::Disconnected))
            .collect::<Result<Vec<u64>>>()?;
        dist.push(row);
    }
    let root = points.binary_search(controller).expect("controller present");
    Ok(Metric { points, root, dist })
}

/// A tree over a point set, oriented away from `root`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    points: Vec<VertexId>,
    root: usize,
    parent: Vec<Option<usize>>,
    parent_cost: Vec<u64>,
}

impl SpanningTree {
    /// Orients an undirected edge list away from `root`.
    pub fn from_edges(points: Vec<VertexId>, root: usize, edges: &[(usize, usize, u64)]) -> Result<Self> {
        let k = points.len();
        if edges.len() + 1 != k {
            return Err(Error::InvalidNetwork("edge count does not span the points".into()));
        }
        let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); k];
        for &(a, b, c) in edges {
            adj[a].push((b, c));
            adj[b].push((a, c));
        }
        let mut parent = vec![None; k];
        let mut parent_cost = vec![0; k];
        let mut seen = vec![false; k];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(v, c) in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    parent[v] = Some(u);
                    parent_cost[v] = c;
                    queue.push_back(v);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Disconnected);
        }
        Ok(Self {
            points,
            root,
            parent,
            parent_cost,
        })
    }

    /// Tree network rooted at the controller; points are all vertices.
    pub fn from_tree_network(net: &Network, controller: &VertexId) -> Result<Self> {
        if !net.is_tree() {
            return Err(Error::InvalidNetwork("network is not a tree".into()));
        }
        let points: Vec<VertexId> = net.vertices().cloned().collect();
        let pos = |v: &VertexId| points.binary_search(v).expect("vertex present");
        let root = points
            .binary_search(controller)
            .map_err(|_| Error::InvalidNetwork(format!("controller {controller} is not a vertex")))?;
        let edges: Vec<(usize, usize, u64)> = net
            .edges()
            .iter()
            .map(|e| (pos(&e.u), pos(&e.v), e.cost))
            .collect();
        Self::from_edges(points, root, &edges)
    }

    fn from_parents(metric: &Metric, parent: Vec<Option<usize>>) -> Self {
        let parent_cost = parent
            .iter()
            .enumerate()
            .map(|(v, p)| p.map_or(0, |p| metric.distance(p, v)))
            .collect();
        Self {
            points: metric.points.clone(),
            root: metric.root,
            parent,
            parent_cost,
        }
    }

    pub fn points(&self) -> &[VertexId] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parent_cost(&self, v: usize) -> u64 {
        self.parent_cost[v]
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.points.binary_search(v).ok()
    }

    pub fn weight(&self) -> u64 {
        self.parent_cost.iter().sum()
    }

    /// Edges as `(parent, child, cost)`, sorted by child index.
    pub fn edges(&self) -> Vec<(usize, usize, u64)> {
        (0..self.points.len())
            .filter_map(|v| self.parent[v].map(|p| (p, v, self.parent_cost[v])))
            .collect()
    }

    /// Undirected edge set with endpoints ordered `(min, max)`.
    pub fn edge_set(&self) -> BTreeSet<(usize, usize)> {
        self.edges()
            .into_iter()
            .map(|(p, c, _)| (p.min(c), p.max(c)))
            .collect()
    }

    /// Children of every point, in index (= id) order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.points.len()];
        for v in 0..self.points.len() {
            if let Some(p) = self.parent[v] {
                children[p].push(v);
            }
        }
        children
    }

    /// Tree-path cost from the root to every point.
    pub fn root_distances(&self) -> Vec<u64> {
        let mut dist = vec![0u64; self.points.len()];
        let children = self.children();
        let mut stack = vec![self.root];
        while let Some(u) = stack.pop() {
            for &c in &children[u] {
                dist[c] = dist[u] + self.parent_cost[c];
                stack.push(c);
            }
        }
        dist
    }
}

/// Kruskal MST of the metric, ties broken on `(cost, smaller id, larger id)`.
pub fn mst_of_metric(m: &Metric) -> SpanningTree {
    let k = m.len();
    let mut candidates: Vec<(u64, usize, usize)> = Vec::with_capacity(k * k.saturating_sub(1) / 2);
    for i in 0..k {
        for j in i + 1..k {
            candidates.push((m.distance(i, j), i, j));
        }
    }
    candidates.sort_unstable();
    let mut uf = UnionFind::new(k);
    let mut chosen = Vec::with_capacity(k.saturating_sub(1));
    for (c, i, j) in candidates {
        if uf.union(i, j) {
            chosen.push((i, j, c));
            if chosen.len() + 1 == k {
                break;
            }
        }
    }
    SpanningTree::from_edges(m.points.clone(), m.root, &chosen).expect("complete metric is connected")
}

/// Trade-off parameter of the light approximate shortest-path tree:
/// stretch `alpha = 1 + sqrt(2) * gamma`, lightness `beta = 1 + sqrt(2) / gamma`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LastParams {
    gamma: Ratio<u64>,
}

impl Default for LastParams {
    fn default() -> Self {
        Self {
            gamma: Ratio::from_integer(7),
        }
    }
}

impl LastParams {
    pub fn new(gamma: Ratio<u64>) -> Result<Self> {
        if gamma.is_zero() {
            return Err(Error::InvalidParams("gamma must be positive".into()));
        }
        Ok(Self { gamma })
    }

    pub fn gamma(&self) -> Ratio<u64> {
        self.gamma
    }

    pub fn alpha(&self) -> f64 {
        1.0 + std::f64::consts::SQRT_2 * self.gamma.to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn beta(&self) -> f64 {
        1.0 + std::f64::consts::SQRT_2 / self.gamma.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Exact test of `tree_dist <= alpha * metric_dist`.
    pub fn within_stretch(&self, tree_dist: u64, metric_dist: u64) -> bool {
        if tree_dist <= metric_dist {
            return true;
        }
        // (t - d) * den <= sqrt(2) * num * d
        let lhs = BigUint::from(tree_dist - metric_dist) * BigUint::from(*self.gamma.denom());
        let rhs = BigUint::from(*self.gamma.numer()) * BigUint::from(metric_dist);
        le_sqrt2_times(&lhs, &rhs)
    }

    /// Exact test of `weight <= beta * mst_weight`.
    pub fn within_lightness(&self, weight: u64, mst_weight: u64) -> bool {
        if weight <= mst_weight {
            return true;
        }
        // (w - m) * num <= sqrt(2) * den * m
        let lhs = BigUint::from(weight - mst_weight) * BigUint::from(*self.gamma.numer());
        let rhs = BigUint::from(*self.gamma.denom()) * BigUint::from(mst_weight);
        le_sqrt2_times(&lhs, &rhs)
    }
}

/// `lhs <= sqrt(2) * rhs` for non-negative integers, by squaring.
fn le_sqrt2_times(lhs: &BigUint, rhs: &BigUint) -> bool {
    lhs * lhs <= BigUint::from(2u8) * rhs * rhs
}

/// Light approximate shortest-path tree of the metric, rooted at its root.
///
/// Walks the MST depth-first, relaxing tentative root distances across each
/// tree edge on the way down and on the way back up. When a vertex is reached
/// with a tentative distance above `alpha` times its metric distance, it is
/// re-attached to the root by the direct closure edge. The parent pointers at
/// the end form the output tree.
pub fn build_last(m: &Metric, params: &LastParams) -> SpanningTree {
    let mst = mst_of_metric(m);
    let children = mst.children();
    let root = m.root;
    let k = m.len();
    let mut dist = vec![u64::MAX; k];
    let mut parent: Vec<Option<usize>> = vec![None; k];
    dist[root] = 0;

    let relax = |dist: &mut [u64], parent: &mut [Option<usize>], u: usize, v: usize| {
        let via = dist[u].saturating_add(m.distance(u, v));
        if via < dist[v] {
            dist[v] = via;
            parent[v] = Some(u);
        }
    };

    // (vertex, index of next child to descend into)
    let mut stack: Vec<(usize, usize)> = vec![(root, 0)];
    while let Some(&mut (v, ref mut next)) = stack.last_mut() {
        if *next == 0 && v != root && !params.within_stretch(dist[v], m.distance(root, v)) {
            dist[v] = m.distance(root, v);
            parent[v] = Some(root);
        }
        if *next < children[v].len() {
            let c = children[v][*next];
            *next += 1;
            relax(&mut dist, &mut parent, v, c);
            stack.push((c, 0));
        } else {
            stack.pop();
            if let Some(&(p, _)) = stack.last() {
                relax(&mut dist, &mut parent, v, p);
            }
        }
    }
    SpanningTree::from_parents(m, parent)
}
