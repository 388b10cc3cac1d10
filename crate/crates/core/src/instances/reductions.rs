//! Instances built from 3-Partition and 3D-Matching inputs. Both pad the
//! input up to a power of three first.

use crate::error::{Error, Result};
use crate::model::{Instance, MemberId, VertexId, Weights};
use crate::multicast::{Edge, Network, RoutingNetwork};

/// A generated instance plus non-fatal notes about its parameters.
#[derive(Clone, Debug)]
pub struct Reduction {
    pub instance: Instance,
    pub warnings: Vec<String>,
}

/// `(exponent, 3^exponent)` for the smallest power of three `>= n`.
fn next_power_of_three(n: u64) -> (u32, u64) {
    let mut p = 1u64;
    let mut e = 0;
    while p < n {
        p *= 3;
        e += 1;
    }
    (e, p)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreePartitionSpec {
    /// The `3m` element sizes.
    pub sizes: Vec<u64>,
    /// Target sum of each triple.
    pub bound: u64,
    /// Added to every size to get member weights.
    pub base_weight: u64,
    /// Cost of the controller edge.
    pub root_cost: u64,
}

impl ThreePartitionSpec {
    pub fn check(&self) -> Result<()> {
        let n = self.sizes.len();
        if n == 0 || n % 3 != 0 {
            return Err(Error::InvalidParams(format!("need 3m sizes, got {n}")));
        }
        if let Some(s) = self.sizes.iter().find(|&&s| 4 * s <= self.bound || 2 * s >= self.bound) {
            return Err(Error::InvalidParams(format!(
                "size {s} not strictly between B/4 and B/2 for B = {}",
                self.bound
            )));
        }
        let sum: u128 = self.sizes.iter().map(|&s| s as u128).sum();
        if sum != (n as u128 / 3) * self.bound as u128 {
            return Err(Error::InvalidParams(format!("sizes sum to {sum}, expected m*B")));
        }
        Ok(())
    }

    /// Sizes after padding with `(B, 0, 0)` groups. Padding is exempt from
    /// the size bounds.
    pub fn padded_sizes(&self) -> Vec<u64> {
        let (_, target) = next_power_of_three(self.sizes.len() as u64);
        let mut sizes = self.sizes.clone();
        while (sizes.len() as u64) < target {
            sizes.extend([self.bound, 0, 0]);
        }
        sizes
    }
}

/// Star instance: controller `r`, hub `u` at cost `C`, one leaf `v_i` per
/// element at cost `w + size_i`, which is also its weight.
///
/// With `N` padded elements and `L = log3 N`, the weights must satisfy
/// `w_max * 3NL < w_min * (3NL + 1)`. A root cost `C <= W^2 * L` is reported
/// as a warning.
pub fn gen_3partition(spec: &ThreePartitionSpec) -> Result<Reduction> {
    spec.check()?;
    let sizes = spec.padded_sizes();
    let n = sizes.len() as u64;
    let (levels, _) = next_power_of_three(n);
    let weights: Vec<u64> = sizes
        .iter()
        .map(|&s| spec.base_weight.checked_add(s).ok_or(Error::Overflow))
        .collect::<Result<_>>()?;
    let (w_min, w_max) = (*weights.iter().min().expect("sizes"), *weights.iter().max().expect("sizes"));
    if w_min == 0 {
        return Err(Error::InvalidParams("base weight must make every weight positive".into()));
    }
    let scale = 3 * n as u128 * levels.max(1) as u128;
    if w_max as u128 * scale >= w_min as u128 * (scale + 1) {
        return Err(Error::InvalidParams(format!(
            "base weight {} too small: need w_max/w_min < {}/{}",
            spec.base_weight,
            scale + 1,
            scale
        )));
    }
    let total: u128 = weights.iter().map(|&w| w as u128).sum();
    let mut warnings = Vec::new();
    if (spec.root_cost as u128) <= total * total * levels as u128 {
        warnings.push(format!(
            "root cost {} is at most W^2 * log3 N = {}; the optimum may not be a balanced ternary tree",
            spec.root_cost,
            total * total * levels as u128
        ));
    }

    let root = VertexId::new("r")?;
    let hub = VertexId::new("u")?;
    let mut edges = vec![Edge::new(root.clone(), hub.clone(), spec.root_cost)];
    let mut members = Vec::with_capacity(weights.len());
    for (i, &w) in weights.iter().enumerate() {
        let m = MemberId::new(&format!("v{}", i + 1))?;
        edges.push(Edge::new(hub.clone(), m.vertex(), w));
        members.push((m, w));
    }
    let instance = Instance::new(Weights::new(members), RoutingNetwork::Tree(Network::from_edges(edges)?), root)?;
    Ok(Reduction { instance, warnings })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThreeDMatchingSpec {
    pub q: usize,
    /// 1-based `(w, u, v)` element indices.
    pub triples: Vec<(usize, usize, usize)>,
    /// Cost of the controller edge `(r, s)`.
    pub root_cost: u64,
}

impl ThreeDMatchingSpec {
    pub fn check(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::InvalidParams("q must be at least 1".into()));
        }
        if self.triples.is_empty() {
            return Err(Error::InvalidParams("no triples".into()));
        }
        let ok = |i: usize| (1..=self.q).contains(&i);
        if let Some(t) = self.triples.iter().find(|t| !(ok(t.0) && ok(t.1) && ok(t.2))) {
            return Err(Error::InvalidParams(format!("triple {t:?} has an index outside 1..={}", self.q)));
        }
        Ok(())
    }

    /// `q` and the triples after adding `q' - q` fresh matched triples.
    pub fn padded(&self) -> (usize, Vec<(usize, usize, usize)>) {
        let (_, q) = next_power_of_three(self.q as u64);
        let q = q as usize;
        let mut triples = self.triples.clone();
        triples.extend((self.q + 1..=q).map(|j| (j, j, j)));
        (q, triples)
    }
}

/// Graph instance: element vertices `w_j, u_j, v_j` (the members, unit
/// weight), one vertex `t_i` per triple joined to its three elements, a hub
/// `s` joined to every `t_i`, and the controller `r` joined to `s` at cost
/// `c`. All other edges cost 1.
pub fn gen_3dmatching(spec: &ThreeDMatchingSpec) -> Result<Reduction> {
    spec.check()?;
    let (q, triples) = spec.padded();
    let root = VertexId::new("r")?;
    let hub = VertexId::new("s")?;
    let element = |set: &str, j: usize| VertexId::new(&format!("{set}{j}"));
    let mut edges = vec![Edge::new(root.clone(), hub.clone(), spec.root_cost)];
    for (i, &(a, b, c)) in triples.iter().enumerate() {
        let t = VertexId::new(&format!("t{}", i + 1))?;
        edges.push(Edge::new(hub.clone(), t.clone(), 1));
        edges.push(Edge::new(t.clone(), element("w", a)?, 1));
        edges.push(Edge::new(t.clone(), element("u", b)?, 1));
        edges.push(Edge::new(t, element("v", c)?, 1));
    }
    let mut members = Vec::with_capacity(3 * q);
    for set in ["w", "u", "v"] {
        for j in 1..=q {
            members.push((element(set, j)?.member(), 1));
        }
    }
    let network = Network::from_edges(edges)?;
    let mut warnings = Vec::new();
    let (levels, _) = next_power_of_three(3 * q as u64);
    let floor = (triples.len() as u128 + 3 * q as u128) * 3 * (3 * q as u128) * levels as u128;
    if (spec.root_cost as u128) <= floor {
        warnings.push(format!(
            "root cost {} is at most (|M| + 3q) * 3 * 3q * log3 3q = {floor}; the optimum may not be a balanced ternary tree",
            spec.root_cost
        ));
    }
    if !network.is_connected() {
        return Err(Error::InvalidInstance("some element is in no triple".into()));
    }
    let instance = Instance::new(Weights::new(members), RoutingNetwork::Graph(network), root)?;
    Ok(Reduction { instance, warnings })
}
