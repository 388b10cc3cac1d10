//! Hierarchies that ignore routing: the approximation scheme for uniform
//! multicast cost, its equal-weight triple merge and the Huffman-style binary
//! merge.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{brute_force_opt, BruteForceConfig};
use crate::model::{Hierarchy, MemberId, MulticastOracle, Node, NodeId, Weights};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PtasParams {
    /// Accuracy parameter in `(0, 1]`.
    pub epsilon: Ratio<u64>,
    /// Upper limit on the heavy set, solved exactly.
    pub heavy_set_cap: usize,
    pub brute_force: BruteForceConfig,
}

impl Default for PtasParams {
    fn default() -> Self {
        Self {
            epsilon: Ratio::new(1, 3),
            heavy_set_cap: 9,
            brute_force: BruteForceConfig::default(),
        }
    }
}

impl PtasParams {
    pub fn new(epsilon: Ratio<u64>) -> Result<Self> {
        let params = Self {
            epsilon,
            ..Self::default()
        };
        params.check()?;
        Ok(params)
    }

    pub fn check(&self) -> Result<()> {
        if self.epsilon.is_zero() || self.epsilon > Ratio::one() {
            return Err(Error::InvalidParams(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if self.heavy_set_cap == 0 {
            return Err(Error::InvalidParams("heavy_set_cap must be at least 1".into()));
        }
        Ok(())
    }

    /// `3^ceil(1/eps^2)`, saturating.
    pub fn heavy_set_target(&self) -> usize {
        let (p, q) = (*self.epsilon.numer() as u128, *self.epsilon.denom() as u128);
        let exponent = (q * q).div_ceil(p * p);
        let mut target: usize = 1;
        for _ in 0..exponent {
            match target.checked_mul(3) {
                Some(t) => target = t,
                None => return usize::MAX,
            }
        }
        target
    }

    /// `ceil(1/eps)`, the depth limit for the attachment node.
    pub fn depth_limit(&self) -> usize {
        let (p, q) = (*self.epsilon.numer(), *self.epsilon.denom());
        q.div_ceil(p) as usize
    }

    /// True when the configured cap truncates the heavy set target, which
    /// voids the approximation guarantee.
    pub fn cap_binds(&self, n: usize) -> bool {
        self.heavy_set_cap < self.heavy_set_target().min(n)
    }
}

/// Where the light hierarchy was hung in the optimal heavy hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Attachment {
    /// No light members.
    None,
    /// Added as a new child of this internal node.
    Internal(NodeId),
    /// A new node was spliced above this leaf.
    SplicedLeaf(NodeId),
    /// No node met both weight and depth limits; attached at the root.
    RootFallback,
}

#[derive(Clone, Debug)]
pub struct PtasOutcome {
    pub hierarchy: Hierarchy,
    pub heavy: Vec<MemberId>,
    pub light: Vec<MemberId>,
    pub attachment: Attachment,
    pub cap_binding: bool,
}

/// A hierarchy in a merge pool with the weight used for merge decisions.
/// `key` is the smallest member id below it.
#[derive(Clone, Debug)]
pub struct PoolItem {
    pub tree: Hierarchy,
    pub weight: BigRational,
    pub key: MemberId,
}

impl PoolItem {
    pub fn new(tree: Hierarchy, weight: BigRational) -> Result<Self> {
        let key = tree
            .member_set()?
            .into_iter()
            .next()
            .ok_or(Error::EmptyMembers)?;
        Ok(Self { tree, weight, key })
    }

    pub fn leaf(member: MemberId, weight: BigRational) -> Self {
        Self {
            tree: Hierarchy::leaf(member.clone()),
            weight,
            key: member,
        }
    }

    fn merge(parts: Vec<PoolItem>) -> PoolItem {
        let weight = parts.iter().fold(BigRational::zero(), |acc, p| acc + &p.weight);
        let key = parts.iter().map(|p| &p.key).min().expect("non-empty").clone();
        let tree = Hierarchy::combine_unchecked(parts.into_iter().map(|p| p.tree).collect());
        PoolItem { tree, weight, key }
    }
}

/// Replaces triples of equal-weight hierarchies by their combination until no
/// three share a weight. Classes are processed by ascending weight and
/// triples taken in key order; the result is sorted by `(weight, key)`.
pub fn triple_merge_pass(pool: Vec<PoolItem>) -> Vec<PoolItem> {
    let mut classes: BTreeMap<BigRational, Vec<PoolItem>> = BTreeMap::new();
    for item in pool {
        classes.entry(item.weight.clone()).or_default().push(item);
    }
    let mut out = Vec::new();
    while let Some((_, mut items)) = classes.pop_first() {
        items.sort_by(|a, b| a.key.cmp(&b.key));
        let mut queue: VecDeque<PoolItem> = items.into();
        while queue.len() >= 3 {
            let triple: Vec<PoolItem> = queue.drain(..3).collect();
            let merged = PoolItem::merge(triple);
            classes.entry(merged.weight.clone()).or_default().push(merged);
        }
        out.extend(queue);
    }
    out.sort_by(|a, b| a.weight.cmp(&b.weight).then_with(|| a.key.cmp(&b.key)));
    out
}

/// Repeatedly combines the two lightest hierarchies (ties by key), lighter
/// one first, until one remains.
pub fn huffman_merge(pool: Vec<PoolItem>) -> Result<PoolItem> {
    if pool.is_empty() {
        return Err(Error::EmptyMembers);
    }
    let mut slots: Vec<Option<PoolItem>> = Vec::with_capacity(2 * pool.len());
    let mut heap = BinaryHeap::new();
    for item in pool {
        heap.push(Reverse((item.weight.clone(), item.key.clone(), slots.len())));
        slots.push(Some(item));
    }
    while heap.len() > 1 {
        let Reverse((_, _, a)) = heap.pop().expect("two items");
        let Reverse((_, _, b)) = heap.pop().expect("two items");
        let first = slots[a].take().expect("live slot");
        let second = slots[b].take().expect("live slot");
        let merged = PoolItem::merge(vec![first, second]);
        heap.push(Reverse((merged.weight.clone(), merged.key.clone(), slots.len())));
        slots.push(Some(merged));
    }
    let Reverse((_, _, last)) = heap.pop().expect("one item");
    Ok(slots[last].take().expect("live slot"))
}

/// Binary hierarchy by classic two-lightest merging on the given weights.
pub fn huffman_binary_build(weights: &Weights) -> Result<Hierarchy> {
    weights.ensure_positive()?;
    let pool = weights
        .iter()
        .map(|(m, w)| PoolItem::leaf(m.clone(), BigRational::from_integer(BigInt::from(w))))
        .collect();
    Ok(huffman_merge(pool)?.tree)
}

/// Smallest power of `1 + eps` that is at least `w`.
pub fn round_up_to_power(w: u64, epsilon: Ratio<u64>) -> BigRational {
    let (p, q) = (BigUint::from(*epsilon.numer()), BigUint::from(*epsilon.denom()));
    let base_num = &p + &q;
    let w = BigUint::from(w);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    while num < &w * &den {
        num *= &base_num;
        den *= &q;
    }
    BigRational::new(num.into(), den.into())
}

/// Approximation scheme for uniform multicast cost.
///
/// 1. The heaviest `min(3^ceil(1/eps^2), heavy_set_cap, |S|)` members (ties by
///    id) form the heavy set, the rest the light set.
/// 2. Light weights are rounded up to powers of `1 + eps`; the rounded values
///    drive every structural choice below.
/// 3. Equal-weight triples of light hierarchies are combined.
/// 4. The rest is merged Huffman-style into one light hierarchy.
/// 5. The heavy set is solved exactly and the light hierarchy is hung under
///    the lightest node of weight at most `eps * W(S)` and depth at most
///    `ceil(1/eps)`; a leaf gets a new parent to keep leaves as members.
pub fn ptas_build(
    weights: &Weights,
    oracle: &dyn MulticastOracle,
    params: &PtasParams,
) -> Result<PtasOutcome> {
    params.check()?;
    if oracle.uniform_cost().is_none() {
        return Err(Error::NonUniformOracle);
    }
    if weights.is_empty() {
        return Err(Error::EmptyMembers);
    }
    weights.ensure_positive()?;
    let n = weights.len();
    let heavy_count = params.heavy_set_target().min(params.heavy_set_cap).min(n);
    if heavy_count > params.brute_force.max_members {
        return Err(Error::TooLarge {
            n: heavy_count,
            cap: params.brute_force.max_members,
        });
    }

    let mut by_weight: Vec<(&MemberId, u64)> = weights.iter().collect();
    by_weight.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let mut heavy: Vec<MemberId> = by_weight[..heavy_count].iter().map(|(m, _)| (*m).clone()).collect();
    let mut light: Vec<MemberId> = by_weight[heavy_count..].iter().map(|(m, _)| (*m).clone()).collect();
    heavy.sort();
    light.sort();

    let heavy_weights = weights.restrict(&heavy)?;
    let optimum = brute_force_opt(&heavy_weights, oracle, &params.brute_force)?;
    let mut tree = optimum.hierarchy.compacted()?;
    let cap_binding = params.cap_binds(n);

    if light.is_empty() {
        return Ok(PtasOutcome {
            hierarchy: tree,
            heavy,
            light,
            attachment: Attachment::None,
            cap_binding,
        });
    }

    let pool: Vec<PoolItem> = light
        .iter()
        .map(|m| Ok(PoolItem::leaf(m.clone(), round_up_to_power(weights.weight(m)?, params.epsilon))))
        .collect::<Result<_>>()?;
    let light_tree = huffman_merge(triple_merge_pass(pool))?.tree;

    let total = weights.total()? as u128;
    let (p, q) = (*params.epsilon.numer() as u128, *params.epsilon.denom() as u128);
    let depth_limit = params.depth_limit();
    let depths = tree.depths()?;
    let sets = tree.subtree_members()?;
    let mut chosen: Option<(u64, usize, NodeId)> = None;
    for u in tree.preorder()? {
        let w = heavy_weights.sum_of(&sets[u.0])?;
        // w <= eps * W(S)
        if (w as u128) * q > p * total || depths[u.0] > depth_limit {
            continue;
        }
        let cand = (w, depths[u.0], u);
        if chosen.is_none_or(|c| cand < c) {
            chosen = Some(cand);
        }
    }
    let attachment = match chosen {
        Some((_, _, u)) if tree.is_leaf(u) => {
            tree.splice_leaf(u, light_tree);
            Attachment::SplicedLeaf(u)
        }
        Some((_, _, u)) => {
            tree.attach(u, light_tree);
            Attachment::Internal(u)
        }
        None => {
            let root = tree.root();
            if tree.is_leaf(root) {
                tree.splice_leaf(root, light_tree);
            } else {
                tree.attach(root, light_tree);
            }
            Attachment::RootFallback
        }
    };
    let hierarchy = tree.compacted()?;
    debug_assert!(matches!(hierarchy.node(hierarchy.root()), Node::Internal(_)));
    Ok(PtasOutcome {
        hierarchy,
        heavy,
        light,
        attachment,
        cap_binding,
    })
}
