//! Seeded random instances.
//!
//! All randomness comes from xoshiro256** seeded through SplitMix64
//! (`seed_from_u64`). A bounded draw `below(n)` is `next_u64() % n`, and a
//! draw in `lo..=hi` is `lo + below(hi - lo + 1)`. Draws happen in a fixed
//! order, so a spec always yields the same instance.

use num_rational::Ratio;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Error, Result};
use crate::model::{Instance, MemberId, VertexId, Weights};
use crate::multicast::{Edge, Network, RoutingNetwork};

/// The documented generator with its bounded-draw helpers.
#[derive(Clone, Debug)]
pub struct Prng(Xoshiro256StarStar);

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256StarStar::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform-ish draw in `0..n`; `n` must be positive.
    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        lo + self.below(hi - lo + 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    RandomTree,
    RandomGraph,
}

impl GenKind {
    pub fn name(self) -> &'static str {
        match self {
            GenKind::RandomTree => "random-tree",
            GenKind::RandomGraph => "random-graph",
        }
    }
}

impl std::str::FromStr for GenKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-tree" => Ok(GenKind::RandomTree),
            "random-graph" => Ok(GenKind::RandomGraph),
            other => Err(Error::InvalidParams(format!("unknown generator kind `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenSpec {
    pub kind: GenKind,
    pub n: usize,
    pub seed: u64,
    pub max_weight: u64,
    pub max_edge_cost: u64,
    /// Extra edges per member on top of the spanning tree (graphs only).
    pub extra_edge_factor: Ratio<u64>,
}

impl GenSpec {
    pub fn new(kind: GenKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            seed,
            max_weight: 10,
            max_edge_cost: 10,
            extra_edge_factor: Ratio::new(1, 2),
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParams("n must be at least 1".into()));
        }
        if self.max_weight == 0 || self.max_edge_cost == 0 {
            return Err(Error::InvalidParams("max_weight and max_edge_cost must be at least 1".into()));
        }
        Ok(())
    }
}

fn padded(prefix: &str, i: usize, count: usize) -> String {
    let width = count.to_string().len();
    format!("{prefix}{i:0width$}")
}

/// Random instance. Routers `a..` hang off earlier vertices uniformly, members
/// `m..` hang off the controller `r` or a router, so members are leaves of the
/// base tree. Graphs add `floor(factor * n)` extra edges between random
/// non-adjacent pairs.
pub fn gen_random(spec: &GenSpec) -> Result<Instance> {
    spec.check()?;
    let n = spec.n;
    let mut rng = Prng::new(spec.seed);
    let routers = rng.below(n as u64) as usize;

    let root = VertexId::new("r")?;
    let mut vertices = vec![root.clone()];
    let mut edges: Vec<Edge> = Vec::new();
    for i in 1..=routers {
        let v = VertexId::new(&padded("a", i, routers))?;
        let parent = vertices[rng.below(vertices.len() as u64) as usize].clone();
        edges.push(Edge::new(parent, v.clone(), rng.range(1, spec.max_edge_cost)));
        vertices.push(v);
    }
    let hubs = vertices.len();
    let mut members: Vec<(MemberId, u64)> = Vec::with_capacity(n);
    for i in 1..=n {
        let m = MemberId::new(&padded("m", i, n))?;
        let parent = vertices[rng.below(hubs as u64) as usize].clone();
        edges.push(Edge::new(parent, m.vertex(), rng.range(1, spec.max_edge_cost)));
        members.push((m.clone(), rng.range(1, spec.max_weight)));
        vertices.push(m.vertex());
    }

    let network = match spec.kind {
        GenKind::RandomTree => RoutingNetwork::Tree(Network::new(vertices, edges)?),
        GenKind::RandomGraph => {
            let k = vertices.len();
            let max_edges = k * (k - 1) / 2;
            let wanted = (spec.extra_edge_factor * Ratio::from_integer(n as u64)).to_integer() as usize;
            let wanted = wanted.min(max_edges - edges.len());
            let mut present: std::collections::BTreeSet<(usize, usize)> = std::collections::BTreeSet::new();
            let pos = |v: &VertexId| vertices.iter().position(|x| x == v).expect("known vertex");
            for e in &edges {
                let (a, b) = (pos(&e.u), pos(&e.v));
                present.insert((a.min(b), a.max(b)));
            }
            let mut added = 0;
            let mut attempts = 0;
            while added < wanted && attempts < 64 * (wanted + 1) {
                attempts += 1;
                let a = rng.below(k as u64) as usize;
                let b = rng.below(k as u64) as usize;
                let cost = rng.range(1, spec.max_edge_cost);
                if a == b || !present.insert((a.min(b), a.max(b))) {
                    continue;
                }
                edges.push(Edge::new(vertices[a].clone(), vertices[b].clone(), cost));
                added += 1;
            }
            RoutingNetwork::Graph(Network::new(vertices, edges)?)
        }
    };
    Instance::new(Weights::new(members), network, root)
}
