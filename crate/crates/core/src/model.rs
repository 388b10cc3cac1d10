//! Instances, hierarchies and exact hierarchy cost.
//!
//! A hierarchy is stored as an arena of nodes. Leaves carry a member, internal
//! nodes an ordered child list. The arena may be built in an invalid shape
//! (shared children, cycles) so that [`validate_hierarchy`] can report on it;
//! every evaluation routine re-checks the tree shape before trusting it.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::multicast::RoutingNetwork;

macro_rules! label_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(Arc<str>);

        impl $name {
            pub fn new(id: &str) -> Result<Self> {
                if id.is_empty() || id.chars().any(|c| c.is_whitespace() || c == '#') {
                    return Err(Error::InvalidId(id.to_string()));
                }
                Ok(Self(Arc::from(id)))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:?}", &*self.0)
            }
        }
    };
}

label_type!(
    /// A group member. Token without whitespace.
    MemberId
);
label_type!(
    /// A vertex of the routing network. Members of routed instances are
    /// vertices with the same name.
    VertexId
);

impl MemberId {
    pub fn vertex(&self) -> VertexId {
        VertexId(self.0.clone())
    }
}

impl VertexId {
    pub fn member(&self) -> MemberId {
        MemberId(self.0.clone())
    }
}

/// Shorthand used throughout the tests; panics on an invalid id.
pub fn mid(id: &str) -> MemberId {
    MemberId::new(id).expect("valid member id")
}

/// Shorthand for vertex ids; panics on an invalid id.
pub fn vid(id: &str) -> VertexId {
    VertexId::new(id).expect("valid vertex id")
}

/// Update frequencies keyed by member.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Weights(BTreeMap<MemberId, u64>);

impl Weights {
    pub fn new(entries: impl IntoIterator<Item = (MemberId, u64)>) -> Self {
        Self(entries.into_iter().collect())
    }

    pub fn uniform<'a>(members: impl IntoIterator<Item = &'a MemberId>, weight: u64) -> Self {
        Self(members.into_iter().map(|m| (m.clone(), weight)).collect())
    }

    pub fn get(&self, m: &MemberId) -> Option<u64> {
        self.0.get(m).copied()
    }

    pub fn weight(&self, m: &MemberId) -> Result<u64> {
        self.get(m).ok_or_else(|| Error::UnknownMember(m.clone()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = &MemberId> + '_ {
        self.0.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MemberId, u64)> + '_ {
        self.0.iter().map(|(m, w)| (m, *w))
    }

    pub fn total(&self) -> Result<u64> {
        self.0
            .values()
            .try_fold(0u64, |acc, w| acc.checked_add(*w))
            .ok_or(Error::Overflow)
    }

    /// Total weight of `members`.
    pub fn sum_of(&self, members: &[MemberId]) -> Result<u64> {
        members.iter().try_fold(0u64, |acc, m| {
            acc.checked_add(self.weight(m)?).ok_or(Error::Overflow)
        })
    }

    /// Restriction to `members`.
    pub fn restrict(&self, members: &[MemberId]) -> Result<Weights> {
        members
            .iter()
            .map(|m| Ok((m.clone(), self.weight(m)?)))
            .collect::<Result<BTreeMap<_, _>>>()
            .map(Weights)
    }

    pub fn ensure_positive(&self) -> Result<()> {
        match self.0.iter().find(|(_, w)| **w == 0) {
            Some((m, _)) => Err(Error::ZeroWeight(m.clone())),
            None => Ok(()),
        }
    }
}

/// Index of a node in a hierarchy arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Leaf(MemberId),
    Internal(Vec<NodeId>),
}

/// A rooted tree whose leaves are group members.
#[derive(Clone, Debug)]
pub struct Hierarchy {
    nodes: Vec<Node>,
    root: NodeId,
}

impl Hierarchy {
    pub fn leaf(member: MemberId) -> Self {
        Self {
            nodes: vec![Node::Leaf(member)],
            root: NodeId(0),
        }
    }

    /// Builds a hierarchy from a raw arena without checking its shape.
    pub fn from_nodes(nodes: Vec<Node>, root: NodeId) -> Self {
        Self { nodes, root }
    }

    /// New root over `parts`, children in the given order.
    pub fn combine(parts: Vec<Hierarchy>) -> Result<Hierarchy> {
        if parts.is_empty() {
            return Err(Error::EmptyCombine);
        }
        let mut seen = BTreeSet::new();
        for part in &parts {
            for m in part.leaf_members()? {
                if !seen.insert(m.clone()) {
                    return Err(Error::OverlappingMembers(m));
                }
            }
        }
        Ok(Self::combine_unchecked(parts))
    }

    pub(crate) fn combine_unchecked(parts: Vec<Hierarchy>) -> Hierarchy {
        let total: usize = parts.iter().map(|p| p.nodes.len()).sum();
        let mut nodes = Vec::with_capacity(total + 1);
        let mut roots = Vec::with_capacity(parts.len());
        for part in parts {
            let offset = nodes.len();
            roots.push(NodeId(part.root.0 + offset));
            nodes.extend(part.nodes.into_iter().map(|n| shift(n, offset)));
        }
        let root = NodeId(nodes.len());
        nodes.push(Node::Internal(roots));
        Hierarchy { nodes, root }
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        match &self.nodes[id.0] {
            Node::Internal(c) => c,
            Node::Leaf(_) => &[],
        }
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        matches!(self.nodes[id.0], Node::Leaf(_))
    }

    /// Nodes reachable from the root in preorder. Fails if the reachable part
    /// is not a tree (shared child, cycle, dangling index).
    pub fn preorder(&self) -> Result<Vec<NodeId>> {
        let n = self.nodes.len();
        if self.root.0 >= n {
            return Err(Error::NotATree(format!("root {} does not exist", self.root)));
        }
        let mut seen = vec![false; n];
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![self.root];
        seen[self.root.0] = true;
        while let Some(u) = stack.pop() {
            order.push(u);
            for &c in self.children(u).iter().rev() {
                if c.0 >= n {
                    return Err(Error::NotATree(format!("{u} references missing node {c}")));
                }
                if seen[c.0] {
                    return Err(Error::NotATree(format!("{c} is reached twice")));
                }
                seen[c.0] = true;
                stack.push(c);
            }
        }
        Ok(order)
    }

    /// Members at the leaves, in preorder.
    pub fn leaf_members(&self) -> Result<Vec<MemberId>> {
        Ok(self
            .preorder()?
            .into_iter()
            .filter_map(|u| match &self.nodes[u.0] {
                Node::Leaf(m) => Some(m.clone()),
                Node::Internal(_) => None,
            })
            .collect())
    }

    /// Sorted member set; fails if a member occurs twice.
    pub fn member_set(&self) -> Result<Vec<MemberId>> {
        let mut members = self.leaf_members()?;
        members.sort();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::NotATree(format!("member {} occurs twice", w[0])));
        }
        Ok(members)
    }

    pub fn leaf_count(&self) -> Result<usize> {
        Ok(self.leaf_members()?.len())
    }

    /// Sorted leaf set below every reachable node (empty for unreachable ones).
    pub fn subtree_members(&self) -> Result<Vec<Vec<MemberId>>> {
        let order = self.preorder()?;
        let mut sets: Vec<Vec<MemberId>> = vec![Vec::new(); self.nodes.len()];
        for &u in order.iter().rev() {
            sets[u.0] = match &self.nodes[u.0] {
                Node::Leaf(m) => vec![m.clone()],
                Node::Internal(children) => {
                    let mut acc: Vec<MemberId> = Vec::new();
                    for c in children {
                        acc = merge_sorted(&acc, &sets[c.0]);
                    }
                    acc
                }
            };
        }
        Ok(sets)
    }

    /// Parent of every reachable node.
    pub fn parents(&self) -> Result<Vec<Option<NodeId>>> {
        let order = self.preorder()?;
        let mut parent = vec![None; self.nodes.len()];
        for u in order {
            for &c in self.children(u) {
                parent[c.0] = Some(u);
            }
        }
        Ok(parent)
    }

    /// Depth (root = 0) of every reachable node.
    pub fn depths(&self) -> Result<Vec<usize>> {
        let order = self.preorder()?;
        let mut depth = vec![0; self.nodes.len()];
        for u in order {
            for &c in self.children(u) {
                depth[c.0] = depth[u.0] + 1;
            }
        }
        Ok(depth)
    }

    pub fn height(&self) -> Result<usize> {
        Ok(self.depths()?.into_iter().max().unwrap_or(0))
    }

    /// True when every internal node has exactly two children.
    pub fn is_binary(&self) -> Result<bool> {
        Ok(self
            .preorder()?
            .into_iter()
            .all(|u| self.is_leaf(u) || self.children(u).len() == 2))
    }

    /// Same tree with the arena renumbered in preorder.
    pub fn compacted(&self) -> Result<Hierarchy> {
        let order = self.preorder()?;
        let mut index = vec![usize::MAX; self.nodes.len()];
        for (i, u) in order.iter().enumerate() {
            index[u.0] = i;
        }
        let nodes = order
            .iter()
            .map(|u| match &self.nodes[u.0] {
                Node::Leaf(m) => Node::Leaf(m.clone()),
                Node::Internal(c) => Node::Internal(c.iter().map(|c| NodeId(index[c.0])).collect()),
            })
            .collect();
        Ok(Hierarchy {
            nodes,
            root: NodeId(0),
        })
    }

    /// Adds `sub` as the last child of the internal node `parent`.
    pub(crate) fn attach(&mut self, parent: NodeId, sub: Hierarchy) -> NodeId {
        let sub_root = self.absorb(sub);
        match &mut self.nodes[parent.0] {
            Node::Internal(children) => children.push(sub_root),
            Node::Leaf(_) => panic!("attach under a leaf; use splice_leaf"),
        }
        sub_root
    }

    /// Replaces `leaf` by a new internal node with children `{leaf, sub}`.
    /// Node ids referring to `leaf` now refer to the new internal node.
    pub(crate) fn splice_leaf(&mut self, leaf: NodeId, sub: Hierarchy) {
        let moved = NodeId(self.nodes.len());
        let old = std::mem::replace(&mut self.nodes[leaf.0], Node::Internal(Vec::new()));
        self.nodes.push(old);
        let sub_root = self.absorb(sub);
        self.nodes[leaf.0] = Node::Internal(vec![moved, sub_root]);
    }

    /// Appends a fresh internal node with the given children.
    pub(crate) fn push_internal(&mut self, children: Vec<NodeId>) -> NodeId {
        self.nodes.push(Node::Internal(children));
        NodeId(self.nodes.len() - 1)
    }

    pub(crate) fn set_children(&mut self, id: NodeId, children: Vec<NodeId>) {
        self.nodes[id.0] = Node::Internal(children);
    }

    fn absorb(&mut self, sub: Hierarchy) -> NodeId {
        let offset = self.nodes.len();
        let root = NodeId(sub.root.0 + offset);
        self.nodes
            .extend(sub.nodes.into_iter().map(|n| shift(n, offset)));
        root
    }

    fn structurally_equal(&self, a: NodeId, other: &Hierarchy, b: NodeId) -> bool {
        let mut stack = vec![(a, b)];
        while let Some((x, y)) = stack.pop() {
            match (self.nodes.get(x.0), other.nodes.get(y.0)) {
                (Some(Node::Leaf(m)), Some(Node::Leaf(n))) if m == n => {}
                (Some(Node::Internal(cx)), Some(Node::Internal(cy))) if cx.len() == cy.len() => {
                    stack.extend(cx.iter().copied().zip(cy.iter().copied()));
                }
                _ => return false,
            }
        }
        true
    }
}

/// Structural equality: same shape, same child order, same leaves. Arena
/// numbering is ignored.
impl PartialEq for Hierarchy {
    fn eq(&self, other: &Self) -> bool {
        if self.preorder().is_err() || other.preorder().is_err() {
            return self.nodes == other.nodes && self.root == other.root;
        }
        self.structurally_equal(self.root, other, other.root)
    }
}

impl Eq for Hierarchy {}

fn shift(node: Node, offset: usize) -> Node {
    match node {
        Node::Leaf(m) => Node::Leaf(m),
        Node::Internal(c) => Node::Internal(c.into_iter().map(|c| NodeId(c.0 + offset)).collect()),
    }
}

pub(crate) fn merge_sorted(a: &[MemberId], b: &[MemberId]) -> Vec<MemberId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i].clone());
            i += 1;
        } else {
            out.push(b[j].clone());
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Multicast cost `M(Y)` from the controller to a member subset.
///
/// `members` is always sorted and duplicate-free.
pub trait MulticastOracle: Sync {
    fn multicast_cost(&self, members: &[MemberId]) -> Result<u64>;

    /// `Some(c)` when every non-empty subset costs `c`.
    fn uniform_cost(&self) -> Option<u64> {
        None
    }
}

/// Every non-empty subset costs the same.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformOracle(pub u64);

impl Default for UniformOracle {
    fn default() -> Self {
        UniformOracle(1)
    }
}

impl MulticastOracle for UniformOracle {
    fn multicast_cost(&self, members: &[MemberId]) -> Result<u64> {
        Ok(if members.is_empty() { 0 } else { self.0 })
    }

    fn uniform_cost(&self) -> Option<u64> {
        Some(self.0)
    }
}

impl<O: MulticastOracle + ?Sized> MulticastOracle for &O {
    fn multicast_cost(&self, members: &[MemberId]) -> Result<u64> {
        (**self).multicast_cost(members)
    }

    fn uniform_cost(&self) -> Option<u64> {
        (**self).uniform_cost()
    }
}

impl<O: MulticastOracle + ?Sized> MulticastOracle for Box<O> {
    fn multicast_cost(&self, members: &[MemberId]) -> Result<u64> {
        (**self).multicast_cost(members)
    }

    fn uniform_cost(&self) -> Option<u64> {
        (**self).uniform_cost()
    }
}

/// Hierarchy cost split by member (unweighted per-update cost) and by node.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CostBreakdown {
    pub total: u64,
    pub per_member: BTreeMap<MemberId, u64>,
    pub per_node: BTreeMap<NodeId, u64>,
}

/// Sum of the leaf weights of `h`.
pub fn hierarchy_weight(h: &Hierarchy, weights: &Weights) -> Result<u64> {
    weights.sum_of(&h.leaf_members()?)
}

/// Cost of one update at member `x`: over every ancestor, the multicast cost
/// to each of its children's leaf sets. Only the subsets on that path are
/// queried.
pub fn eval_cost_member(h: &Hierarchy, x: &MemberId, oracle: &dyn MulticastOracle) -> Result<u64> {
    let sets = h.subtree_members()?;
    let parents = h.parents()?;
    let leaf = h
        .preorder()?
        .into_iter()
        .find(|&u| matches!(h.node(u), Node::Leaf(m) if m == x))
        .ok_or_else(|| Error::NotALeaf(x.clone()))?;
    let mut cost = 0u64;
    let mut cur = parents[leaf.0];
    while let Some(u) = cur {
        for c in h.children(u) {
            let m = oracle.multicast_cost(&sets[c.0])?;
            cost = cost.checked_add(m).ok_or(Error::Overflow)?;
        }
        cur = parents[u.0];
    }
    Ok(cost)
}

/// Total weighted cost, accumulated per node as `W(T_u) * sum_children M(T_v)`.
pub fn eval_cost_total(
    h: &Hierarchy,
    weights: &Weights,
    oracle: &dyn MulticastOracle,
) -> Result<CostBreakdown> {
    let order = h.preorder()?;
    let sets = h.subtree_members()?;
    h.member_set()?;
    // Sum of child multicast costs at each node.
    let mut fanout = vec![0u64; h.nodes().len()];
    let mut out = CostBreakdown::default();
    for &u in &order {
        let mut sum = 0u64;
        for c in h.children(u) {
            let m = oracle.multicast_cost(&sets[c.0])?;
            sum = sum.checked_add(m).ok_or(Error::Overflow)?;
        }
        fanout[u.0] = sum;
        let w = weights.sum_of(&sets[u.0])?;
        let node_cost = w.checked_mul(sum).ok_or(Error::Overflow)?;
        out.total = out.total.checked_add(node_cost).ok_or(Error::Overflow)?;
        out.per_node.insert(u, node_cost);
    }
    // Per-member costs accumulate top-down along root paths.
    let mut path = vec![0u64; h.nodes().len()];
    for &u in &order {
        let below = path[u.0].checked_add(fanout[u.0]).ok_or(Error::Overflow)?;
        match h.node(u) {
            Node::Leaf(m) => {
                out.per_member.insert(m.clone(), path[u.0]);
            }
            Node::Internal(children) => {
                for c in children {
                    path[c.0] = below;
                }
            }
        }
    }
    Ok(out)
}

/// Convenience wrapper returning only the total.
pub fn hierarchy_cost(h: &Hierarchy, weights: &Weights, oracle: &dyn MulticastOracle) -> Result<u64> {
    Ok(eval_cost_total(h, weights, oracle)?.total)
}

/// A group-key problem instance: members with weights, a routing network and
/// the controller vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    weights: Weights,
    network: RoutingNetwork,
    controller: VertexId,
}

impl Instance {
    pub fn new(weights: Weights, network: RoutingNetwork, controller: VertexId) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyMembers);
        }
        weights.ensure_positive()?;
        match &network {
            RoutingNetwork::Tree(net) | RoutingNetwork::Graph(net) => {
                if !net.contains(&controller) {
                    return Err(Error::InvalidInstance(format!(
                        "controller {controller} is not a vertex"
                    )));
                }
                if let Some(m) = weights.members().find(|m| !net.contains(&m.vertex())) {
                    return Err(Error::InvalidInstance(format!("member {m} is not a vertex")));
                }
                if !net.is_connected() {
                    return Err(Error::Disconnected);
                }
                if matches!(network, RoutingNetwork::Tree(_)) && !net.is_tree() {
                    return Err(Error::InvalidNetwork("tree network contains a cycle".into()));
                }
            }
            RoutingNetwork::Table(table) => {
                if let Some(m) = table
                    .entries()
                    .flat_map(|(set, _)| set.iter())
                    .find(|m| weights.get(m).is_none())
                {
                    return Err(Error::InvalidInstance(format!(
                        "cost table mentions undeclared member {m}"
                    )));
                }
            }
        }
        Ok(Self {
            weights,
            network,
            controller,
        })
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    pub fn members(&self) -> Vec<MemberId> {
        self.weights.members().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn network(&self) -> &RoutingNetwork {
        &self.network
    }

    pub fn controller(&self) -> &VertexId {
        &self.controller
    }

    /// The multicast oracle induced by the routing network.
    pub fn oracle(&self) -> Result<Box<dyn MulticastOracle + Send>> {
        self.network.oracle(&self.controller, &self.members())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub severity: Severity,
    pub message: String,
}

impl Violation {
    fn error(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            message: message.into(),
        }
    }

    fn warning(message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.severity {
            Severity::Error => write!(f, "error: {}", self.message),
            Severity::Warning => write!(f, "warning: {}", self.message),
        }
    }
}

/// True when no violation is an error (warnings allowed).
pub fn is_valid(violations: &[Violation]) -> bool {
    violations.iter().all(|v| v.severity == Severity::Warning)
}

/// Checks the hierarchy shape and that its leaves are exactly the instance
/// members. Returns every violation found.
pub fn validate_hierarchy(h: &Hierarchy, instance: &Instance) -> Vec<Violation> {
    validate_against(h, &instance.members())
}

/// As [`validate_hierarchy`], against an explicit member list.
pub fn validate_against(h: &Hierarchy, members: &[MemberId]) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = h.nodes().len();
    if h.root().0 >= n {
        out.push(Violation::error(format!("not a tree: root {} does not exist", h.root())));
        return out;
    }
    let mut parents: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (i, node) in h.nodes().iter().enumerate() {
        if let Node::Internal(children) = node {
            if children.is_empty() {
                out.push(Violation::error(format!("internal node #{i} has no children")));
            } else if children.len() == 1 {
                out.push(Violation::warning(format!("internal node #{i} has a single child")));
            }
            for c in children {
                if c.0 >= n {
                    out.push(Violation::error(format!(
                        "not a tree: #{i} references missing node {c}"
                    )));
                } else {
                    parents[c.0].push(NodeId(i));
                }
            }
        }
    }
    if !parents[h.root().0].is_empty() {
        out.push(Violation::error(format!("not a tree: root {} has a parent", h.root())));
    }
    for (i, p) in parents.iter().enumerate() {
        if p.len() > 1 {
            out.push(Violation::error(format!("not a tree: node #{i} has {} parents", p.len())));
        }
    }
    // Reachability without trusting the shape.
    let mut seen = vec![false; n];
    let mut stack = vec![h.root()];
    seen[h.root().0] = true;
    while let Some(u) = stack.pop() {
        for &c in h.children(u) {
            if c.0 < n && !seen[c.0] {
                seen[c.0] = true;
                stack.push(c);
            }
        }
    }
    for (i, s) in seen.iter().enumerate() {
        if !s {
            out.push(Violation::error(format!(
                "not a tree: node #{i} is unreachable from the root"
            )));
        }
    }
    let mut leaf_count: BTreeMap<&MemberId, usize> = BTreeMap::new();
    for node in h.nodes() {
        if let Node::Leaf(m) = node {
            *leaf_count.entry(m).or_default() += 1;
        }
    }
    for (m, count) in &leaf_count {
        if *count > 1 {
            out.push(Violation::error(format!("member {m} appears at {count} leaves")));
        }
    }
    let expected: BTreeSet<&MemberId> = members.iter().collect();
    for m in &expected {
        if !leaf_count.contains_key(m) {
            out.push(Violation::error(format!("missing member {m}")));
        }
    }
    for m in leaf_count.keys() {
        if !expected.contains(m) {
            out.push(Violation::error(format!("unknown member {m}")));
        }
    }
    out
}
