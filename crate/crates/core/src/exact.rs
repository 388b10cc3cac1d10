//! Exact ground truth for small instances.
//!
//! [`brute_force_opt`] enumerates every rooted tree with internal degree at
//! least two over the member set. Hierarchy cost decomposes over the root's
//! children, so the enumeration memoizes the best subtree per member subset
//! and only enumerates the set partitions of each subset once. The closed-form
//! optimum for uniform weights and costs and the entropy-style lower bound
//! live here too.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{Hierarchy, MemberId, MulticastOracle, Weights};
use crate::par::{self, Exec};

/// Default and hard ceiling for the brute-force member count.
pub const DEFAULT_BRUTE_FORCE_CAP: usize = 9;
const MASK_BITS: usize = 24;

/// Environment variable overriding the default brute-force cap.
pub const BRUTE_FORCE_CAP_ENV: &str = "KHIER_BRUTE_CAP";

/// Relative tolerance used when comparing the lower bound to integer costs.
pub const LOWER_BOUND_REL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DegreeRestriction {
    /// Internal nodes have two or three children.
    TwoOrThree,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BruteForceConfig {
    pub max_members: usize,
    pub degree_restriction: Option<DegreeRestriction>,
    pub exec: Exec,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self {
            max_members: DEFAULT_BRUTE_FORCE_CAP,
            degree_restriction: None,
            exec: Exec::Parallel,
        }
    }
}

impl BruteForceConfig {
    /// Default config with the cap taken from `KHIER_BRUTE_CAP` when set.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(cap) = std::env::var(BRUTE_FORCE_CAP_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&c| c >= 1)
        {
            cfg.max_members = cap;
        }
        cfg
    }

    pub fn restricted(mut self) -> Self {
        self.degree_restriction = Some(DegreeRestriction::TwoOrThree);
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Optimum {
    pub hierarchy: Hierarchy,
    pub cost: u64,
}

#[derive(Clone, Debug)]
struct Best {
    cost: u64,
    blocks: Vec<u32>,
    canon: String,
}

/// Minimum-cost hierarchy by exhaustive search.
///
/// Among optimal trees the one with the smallest canonical form is returned,
/// where the canonical form of a subtree is its member id (leaf) or its
/// children's forms sorted and wrapped in parentheses. Children of the
/// returned hierarchy appear in canonical order.
pub fn brute_force_opt(
    weights: &Weights,
    oracle: &dyn MulticastOracle,
    cfg: &BruteForceConfig,
) -> Result<Optimum> {
    let members: Vec<MemberId> = weights.members().cloned().collect();
    let n = members.len();
    if n == 0 {
        return Err(Error::EmptyMembers);
    }
    if cfg.max_members == 0 {
        return Err(Error::InvalidParams("max_members must be at least 1".into()));
    }
    let cap = cfg.max_members.min(MASK_BITS);
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    if cfg.degree_restriction.is_some() && oracle.uniform_cost().is_none() {
        return Err(Error::NonUniformOracle);
    }
    let max_blocks = match cfg.degree_restriction {
        Some(DegreeRestriction::TwoOrThree) => 3,
        None => n,
    };

    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let masks: Vec<u32> = (1..=full).collect();
    let subset_of = |mask: u32| -> Vec<MemberId> {
        (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| members[i].clone())
            .collect()
    };
    // Index 0 is the empty set and never used.
    let mut weight_of = vec![0u64; full as usize + 1];
    let mut mcast_of = vec![0u64; full as usize + 1];
    let table: Vec<Result<(u64, u64)>> = par::map(cfg.exec, &masks, |&mask| {
        let set = subset_of(mask);
        Ok((weights.sum_of(&set)?, oracle.multicast_cost(&set)?))
    });
    for (mask, entry) in masks.iter().zip(table) {
        let (w, m) = entry?;
        weight_of[*mask as usize] = w;
        mcast_of[*mask as usize] = m;
    }

    let mut best: Vec<Option<Best>> = vec![None; full as usize + 1];
    for i in 0..n {
        best[1 << i] = Some(Best {
            cost: 0,
            blocks: Vec::new(),
            canon: members[i].to_string(),
        });
    }
    for size in 2..=n {
        let level: Vec<u32> = masks
            .iter()
            .copied()
            .filter(|m| m.count_ones() as usize == size)
            .collect();
        let solved: Vec<Result<Best>> = par::map(cfg.exec, &level, |&mask| {
            solve_subset(mask, max_blocks, &best, &weight_of, &mcast_of, cfg.exec)
        });
        for (mask, entry) in level.iter().zip(solved) {
            best[*mask as usize] = Some(entry?);
        }
    }

    let root = best[full as usize].as_ref().expect("solved");
    let cost = root.cost;
    let hierarchy = build(full, &best, &members);
    Ok(Optimum { hierarchy, cost })
}

fn solve_subset(
    mask: u32,
    max_blocks: usize,
    best: &[Option<Best>],
    weight_of: &[u64],
    mcast_of: &[u64],
    exec: Exec,
) -> Result<Best> {
    let partitions = set_partitions(mask, max_blocks);
    let w = weight_of[mask as usize];
    let costs: Vec<Option<u64>> = par::map(exec, &partitions, |blocks| {
        blocks.iter().try_fold(0u64, |acc, &b| {
            let sub = best[b as usize].as_ref().expect("smaller subsets solved").cost;
            let edge = w.checked_mul(mcast_of[b as usize])?;
            acc.checked_add(sub)?.checked_add(edge)
        })
    });
    let mut winner: Option<(u64, usize, String)> = None;
    for (i, cost) in costs.into_iter().enumerate() {
        let cost = cost.ok_or(Error::Overflow)?;
        let replace = match &winner {
            None => true,
            Some((c, _, canon)) => match cost.cmp(c) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => canonical(&partitions[i], best) < *canon,
            },
        };
        if replace {
            winner = Some((cost, i, canonical(&partitions[i], best)));
        }
    }
    let (cost, i, canon) = winner.expect("a subset of size >= 2 has a partition");
    let mut blocks = partitions[i].clone();
    blocks.sort_by(|a, b| {
        let ca = &best[*a as usize].as_ref().unwrap().canon;
        let cb = &best[*b as usize].as_ref().unwrap().canon;
        ca.cmp(cb)
    });
    Ok(Best { cost, blocks, canon })
}

fn canonical(blocks: &[u32], best: &[Option<Best>]) -> String {
    let mut parts: Vec<&str> = blocks
        .iter()
        .map(|b| best[*b as usize].as_ref().unwrap().canon.as_str())
        .collect();
    parts.sort_unstable();
    format!("({})", parts.join(","))
}

fn build(mask: u32, best: &[Option<Best>], members: &[MemberId]) -> Hierarchy {
    let entry = best[mask as usize].as_ref().expect("solved");
    if entry.blocks.is_empty() {
        return Hierarchy::leaf(members[mask.trailing_zeros() as usize].clone());
    }
    let parts = entry.blocks.iter().map(|&b| build(b, best, members)).collect();
    Hierarchy::combine_unchecked(parts)
}

/// Every partition of the bits of `mask` into between 2 and `max_blocks`
/// blocks. Restricted-growth order: each element joins an existing block or
/// opens the next one.
pub(crate) fn set_partitions(mask: u32, max_blocks: usize) -> Vec<Vec<u32>> {
    let elems: Vec<u32> = (0..32).filter(|i| mask & (1 << i) != 0).map(|i| 1u32 << i).collect();
    let mut out = Vec::new();
    let mut blocks: Vec<u32> = Vec::with_capacity(elems.len());
    fn rec(elems: &[u32], i: usize, max_blocks: usize, blocks: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == elems.len() {
            if blocks.len() >= 2 {
                out.push(blocks.clone());
            }
            return;
        }
        for b in 0..blocks.len() {
            blocks[b] |= elems[i];
            rec(elems, i + 1, max_blocks, blocks, out);
            blocks[b] &= !elems[i];
        }
        if blocks.len() < max_blocks {
            blocks.push(elems[i]);
            rec(elems, i + 1, max_blocks, blocks, out);
            blocks.pop();
        }
    }
    rec(&elems, 0, max_blocks, &mut blocks, &mut out);
    out
}

/// Zero-padded member ids `m1..mn`, so that id order matches numeric order.
pub fn numbered_members(n: usize) -> Vec<MemberId> {
    let width = n.to_string().len();
    (1..=n)
        .map(|i| MemberId::new(&format!("m{i:0width$}")).expect("valid id"))
        .collect()
}

/// Balanced ternary hierarchy over `n` numbered members.
pub fn uniform_optimal_build(n: usize) -> Result<Hierarchy> {
    if n == 0 {
        return Err(Error::EmptyMembers);
    }
    Ok(balanced_ternary(&numbered_members(n)))
}

/// Balanced ternary hierarchy over the given members, in order: at most three
/// members sit flat under one node, larger sets split into three consecutive
/// groups whose sizes differ by at most one, larger groups first.
pub fn balanced_ternary(members: &[MemberId]) -> Hierarchy {
    match members.len() {
        0 => panic!("balanced_ternary over an empty member list"),
        1 => Hierarchy::leaf(members[0].clone()),
        2 | 3 => Hierarchy::combine_unchecked(members.iter().cloned().map(Hierarchy::leaf).collect()),
        n => {
            let (q, r) = (n / 3, n % 3);
            let mut parts = Vec::with_capacity(3);
            let mut start = 0;
            for g in 0..3 {
                let len = q + usize::from(g < r);
                parts.push(balanced_ternary(&members[start..start + len]));
                start += len;
            }
            Hierarchy::combine_unchecked(parts)
        }
    }
}

/// Optimal cost for `n` unit-weight members under unit multicast cost.
pub fn uniform_optimal_cost_f(n: u64) -> Result<u64> {
    if n == 0 {
        return Err(Error::EmptyMembers);
    }
    let mut k = 1u64;
    let mut log = 0u64;
    while let Some(next) = k.checked_mul(3).filter(|&next| next <= n) {
        k = next;
        log += 1;
    }
    let base = 3u128 * n as u128 * log as u128;
    let value = if n < 2 * k {
        base + 4 * (n - k) as u128
    } else {
        base + 5 * n as u128 - 6 * k as u128
    };
    u64::try_from(value).map_err(|_| Error::Overflow)
}

/// `sum_v 3 w_v log_3(W / w_v)`, a lower bound on the optimum under unit
/// multicast cost.
pub fn weighted_lower_bound(weights: &Weights) -> Result<f64> {
    weights.ensure_positive()?;
    let total = weights.total()? as f64;
    let ln3 = 3f64.ln();
    Ok(weights
        .iter()
        .map(|(_, w)| {
            let w = w as f64;
            3.0 * w * (total.ln() - w.ln()) / ln3
        })
        .sum())
}

/// `bound <= cost` up to [`LOWER_BOUND_REL_TOL`].
pub fn bound_holds(bound: f64, cost: u64) -> bool {
    let cost = cost as f64;
    bound <= cost + LOWER_BOUND_REL_TOL * cost.max(1.0)
}
