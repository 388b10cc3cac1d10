//! Routing-aware hierarchies: weight partition on a rooted spanning tree, the
//! recursive tree and graph algorithms, and binarization.

use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::model::{Hierarchy, Instance, MemberId, MulticastOracle, Node, NodeId, UniformOracle, VertexId, Weights};
use crate::multicast::{build_last, mst_of_metric, GraphOracle, LastParams, RoutingNetwork, SpanningTree, TreeOracle};
use crate::par::{self, Exec};
use crate::uniform::{ptas_build, PtasParams};

/// Split of a member set at a routing vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionResult {
    /// Members below the chosen children of `node`, sorted.
    pub x: Vec<MemberId>,
    /// The remaining members, sorted.
    pub y: Vec<MemberId>,
    pub node: VertexId,
    /// Tree path cost from the root to `node`.
    pub delta: u64,
    /// `W/3 <= W(x) <= 2W/3`; otherwise `x` is a single heavy member.
    pub balanced: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Child {
    /// The member sitting on the current vertex itself.
    Here(usize),
    Vertex(usize),
}

/// Finds a vertex and a set of its children whose members weigh between a
/// third and two thirds of the total, or a single member heavier than two
/// thirds. Members at internal vertices count as zero-cost leaf children.
pub fn partition_tree(tree: &SpanningTree, members: &[MemberId], weights: &Weights) -> Result<PartitionResult> {
    if members.is_empty() {
        return Err(Error::EmptyMembers);
    }
    let k = tree.len();
    let mut at = vec![None::<(MemberId, u64)>; k];
    for m in members {
        let i = tree
            .index_of(&m.vertex())
            .ok_or_else(|| Error::UnknownMember(m.clone()))?;
        at[i] = Some((m.clone(), weights.weight(m)?));
    }
    let children = tree.children();
    let mut sub = vec![0u128; k];
    let mut order = Vec::with_capacity(k);
    let mut stack = vec![tree.root()];
    while let Some(u) = stack.pop() {
        order.push(u);
        stack.extend(children[u].iter().copied());
    }
    for &u in order.iter().rev() {
        sub[u] = at[u].as_ref().map_or(0, |(_, w)| *w as u128) + children[u].iter().map(|&c| sub[c]).sum::<u128>();
    }
    let total = sub[tree.root()];
    if total == 0 {
        return Err(Error::EmptyMembers);
    }
    let weight_of = |c: Child| match c {
        Child::Here(u) => at[u].as_ref().map_or(0, |(_, w)| *w as u128),
        Child::Vertex(c) => sub[c],
    };
    let id_of = |c: Child| match c {
        Child::Here(u) | Child::Vertex(u) => &tree.points()[u],
    };

    let mut v = tree.root();
    let chosen: Vec<Child> = loop {
        let mut cands: Vec<Child> = children[v]
            .iter()
            .map(|&c| Child::Vertex(c))
            .filter(|&c| weight_of(c) > 0)
            .collect();
        if at[v].is_some() {
            cands.push(Child::Here(v));
        }
        if let Some(&heavy) = cands.iter().find(|&&c| 3 * weight_of(c) > 2 * total) {
            match heavy {
                Child::Vertex(c) => {
                    v = c;
                    continue;
                }
                Child::Here(_) => break vec![heavy],
            }
        }
        cands.sort_by(|&a, &b| weight_of(b).cmp(&weight_of(a)).then_with(|| id_of(a).cmp(id_of(b))).then(a.cmp(&b)));
        let mut acc = 0u128;
        let mut taken = Vec::new();
        for c in cands {
            acc += weight_of(c);
            taken.push(c);
            if 3 * acc >= total {
                break;
            }
        }
        break taken;
    };

    let mut x = Vec::new();
    for c in &chosen {
        match *c {
            Child::Here(u) => x.push(at[u].as_ref().expect("member here").0.clone()),
            Child::Vertex(c) => {
                let mut stack = vec![c];
                while let Some(u) = stack.pop() {
                    if let Some((m, _)) = &at[u] {
                        x.push(m.clone());
                    }
                    stack.extend(children[u].iter().copied());
                }
            }
        }
    }
    x.sort();
    let wx: u128 = chosen.iter().map(|&c| weight_of(c)).sum();
    let mut y: Vec<MemberId> = members.iter().filter(|m| x.binary_search(m).is_err()).cloned().collect();
    y.sort();
    Ok(PartitionResult {
        x,
        y,
        node: tree.points()[v].clone(),
        delta: tree.root_distances()[v],
        balanced: 3 * wx >= total && 3 * wx <= 2 * total,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoutedParams {
    pub ptas: PtasParams,
    pub last: LastParams,
    pub exec: Exec,
}

impl Default for RoutedParams {
    fn default() -> Self {
        Self {
            ptas: PtasParams::default(),
            last: LastParams::default(),
            exec: Exec::default(),
        }
    }
}

impl RoutedParams {
    pub fn new(epsilon: Ratio<u64>) -> Result<Self> {
        Ok(Self {
            ptas: PtasParams::new(epsilon)?,
            ..Self::default()
        })
    }

    pub fn with_gamma(mut self, gamma: Ratio<u64>) -> Result<Self> {
        self.last = LastParams::new(gamma)?;
        Ok(self)
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self.ptas.brute_force.exec = exec;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// The near part was solved recursively.
    Recurse,
    /// The near part was handed to the uniform scheme.
    Uniform,
}

/// Exact checks of one light approximate shortest-path tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LastCheck {
    pub stretch_ok: bool,
    pub light_ok: bool,
}

/// One non-trivial recursion step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelTrace {
    pub members: usize,
    pub x_len: usize,
    pub delta: u64,
    pub mcast: u64,
    pub balanced: bool,
    pub branch: Branch,
    pub last: Option<LastCheck>,
}

#[derive(Clone, Debug)]
pub struct RoutedOutcome {
    pub hierarchy: Hierarchy,
    /// Steps in preorder of the recursion (own step, near part, far part).
    pub trace: Vec<LevelTrace>,
}

type Step = Result<(Hierarchy, Vec<LevelTrace>)>;

fn uniform_part(x: &[MemberId], weights: &Weights, params: &RoutedParams) -> Result<Hierarchy> {
    Ok(ptas_build(&weights.restrict(x)?, &UniformOracle(1), &params.ptas)?.hierarchy)
}

fn assemble(level: LevelTrace, near: Step, far: Step) -> Step {
    let (t1, tr1) = near?;
    let (t2, tr2) = far?;
    let mut trace = Vec::with_capacity(1 + tr1.len() + tr2.len());
    trace.push(level);
    trace.extend(tr1);
    trace.extend(tr2);
    Ok((Hierarchy::combine_unchecked(vec![t1, t2]), trace))
}

/// Recursive partition algorithm on a tree network.
pub fn approx_tree(instance: &Instance, params: &RoutedParams) -> Result<RoutedOutcome> {
    let RoutingNetwork::Tree(net) = instance.network() else {
        return Err(Error::InvalidNetwork(format!(
            "tree algorithm needs a tree network, got {}",
            instance.network().kind()
        )));
    };
    params.ptas.check()?;
    let oracle = TreeOracle::new(net, instance.controller())?;
    let (hierarchy, trace) = tree_step(&oracle, instance.weights(), &instance.members(), params)?;
    Ok(RoutedOutcome {
        hierarchy: hierarchy.compacted()?,
        trace,
    })
}

fn tree_step(oracle: &TreeOracle, weights: &Weights, members: &[MemberId], params: &RoutedParams) -> Step {
    if let [only] = members {
        return Ok((Hierarchy::leaf(only.clone()), Vec::new()));
    }
    let part = partition_tree(oracle.rooted(), members, weights)?;
    let mcast = oracle.multicast_cost(members)?;
    let branch = branch_for(part.delta, mcast);
    let level = LevelTrace {
        members: members.len(),
        x_len: part.x.len(),
        delta: part.delta,
        mcast,
        balanced: part.balanced,
        branch,
        last: None,
    };
    let (near, far) = par::join(
        params.exec,
        || match branch {
            Branch::Recurse => tree_step(oracle, weights, &part.x, params),
            Branch::Uniform => Ok((uniform_part(&part.x, weights, params)?, Vec::new())),
        },
        || tree_step(oracle, weights, &part.y, params),
    );
    assemble(level, near, far)
}

fn branch_for(delta: u64, mcast: u64) -> Branch {
    if (delta as u128) * 5 <= mcast as u128 {
        Branch::Recurse
    } else {
        Branch::Uniform
    }
}

/// Recursive partition algorithm on a general graph. Each level partitions a
/// light approximate shortest-path tree of the closure over the current
/// members.
pub fn approx_graph(instance: &Instance, params: &RoutedParams) -> Result<RoutedOutcome> {
    let RoutingNetwork::Graph(net) = instance.network() else {
        return Err(Error::InvalidNetwork(format!(
            "graph algorithm needs a graph network, got {}",
            instance.network().kind()
        )));
    };
    params.ptas.check()?;
    let oracle = GraphOracle::new(net, instance.controller(), &instance.members())?;
    let (hierarchy, trace) = graph_step(&oracle, instance.weights(), &instance.members(), params)?;
    Ok(RoutedOutcome {
        hierarchy: hierarchy.compacted()?,
        trace,
    })
}

fn graph_step(oracle: &GraphOracle, weights: &Weights, members: &[MemberId], params: &RoutedParams) -> Step {
    if let [only] = members {
        return Ok((Hierarchy::leaf(only.clone()), Vec::new()));
    }
    let vertices: Vec<VertexId> = members.iter().map(|m| m.vertex()).collect();
    let sub = oracle.metric().restrict(&vertices)?;
    let mst = mst_of_metric(&sub);
    let mcast = mst.weight();
    let last = build_last(&sub, &params.last);
    let dist = last.root_distances();
    let check = LastCheck {
        stretch_ok: (0..sub.len()).all(|v| params.last.within_stretch(dist[v], sub.distance(sub.root(), v))),
        light_ok: params.last.within_lightness(last.weight(), mcast),
    };
    let part = partition_tree(&last, members, weights)?;
    let branch = branch_for(part.delta, mcast);
    let level = LevelTrace {
        members: members.len(),
        x_len: part.x.len(),
        delta: part.delta,
        mcast,
        balanced: part.balanced,
        branch,
        last: Some(check),
    };
    let (near, far) = par::join(
        params.exec,
        || match branch {
            Branch::Recurse => graph_step(oracle, weights, &part.x, params),
            Branch::Uniform => Ok((uniform_part(&part.x, weights, params)?, Vec::new())),
        },
        || graph_step(oracle, weights, &part.y, params),
    );
    assemble(level, near, far)
}

/// Rewrites every node of degree above two into binary form. A node whose
/// children are all at most two thirds of its weight gets two groups of at
/// least a third each; otherwise the heavy child is kept and the rest are
/// grouped under a new node. Leaves are untouched.
pub fn binarize(h: &Hierarchy, weights: &Weights) -> Result<Hierarchy> {
    let mut out = h.compacted()?;
    let sets = out.subtree_members()?;
    let mut node_weight: Vec<u128> = sets
        .iter()
        .map(|s| weights.sum_of(s).map(u128::from))
        .collect::<Result<_>>()?;
    let mut work: Vec<NodeId> = (0..out.nodes().len()).map(NodeId).rev().collect();
    while let Some(u) = work.pop() {
        let Node::Internal(children) = out.node(u).clone() else {
            continue;
        };
        if children.len() <= 2 {
            continue;
        }
        let total: u128 = children.iter().map(|c| node_weight[c.0]).sum();
        let heaviest = (0..children.len())
            .max_by(|&a, &b| node_weight[children[a].0].cmp(&node_weight[children[b].0]).then(b.cmp(&a)))
            .expect("children");
        let groups: [Vec<NodeId>; 2] = if 3 * node_weight[children[heaviest].0] <= 2 * total {
            let mut order: Vec<usize> = (0..children.len()).collect();
            order.sort_by(|&a, &b| node_weight[children[b].0].cmp(&node_weight[children[a].0]).then(a.cmp(&b)));
            let mut groups = [Vec::new(), Vec::new()];
            let mut sums = [0u128; 2];
            for i in order {
                let g = usize::from(sums[1] < sums[0]);
                sums[g] += node_weight[children[i].0];
                groups[g].push(i);
            }
            groups.map(|mut g| {
                g.sort_unstable();
                g.into_iter().map(|i| children[i]).collect()
            })
        } else {
            let rest = children
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != heaviest)
                .map(|(_, &c)| c)
                .collect();
            [vec![children[heaviest]], rest]
        };
        let mut new_children = Vec::with_capacity(2);
        for group in groups {
            if let [single] = group[..] {
                new_children.push(single);
            } else {
                let w = group.iter().map(|c| node_weight[c.0]).sum();
                let id = out.push_internal(group);
                node_weight.push(w);
                work.push(id);
                new_children.push(id);
            }
        }
        out.set_children(u, new_children);
    }
    out.compacted()
}
