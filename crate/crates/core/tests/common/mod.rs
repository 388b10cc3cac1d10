#![allow(dead_code)]

use khier::instances::Prng;
use khier::model::{Hierarchy, MemberId, MulticastOracle, Weights};
use khier::Result;

pub fn members(n: usize) -> Vec<MemberId> {
    khier::exact::numbered_members(n)
}

pub fn random_weights(rng: &mut Prng, members: &[MemberId], max: u64) -> Weights {
    Weights::new(members.iter().map(|m| (m.clone(), rng.range(1, max))))
}

/// Random hierarchy: repeatedly combine 2..=4 random parts.
pub fn random_hierarchy(rng: &mut Prng, members: &[MemberId]) -> Hierarchy {
    let mut parts: Vec<Hierarchy> = members.iter().cloned().map(Hierarchy::leaf).collect();
    while parts.len() > 1 {
        let k = rng.range(2, parts.len().min(4) as u64) as usize;
        let mut chosen = Vec::with_capacity(k);
        for _ in 0..k {
            let i = rng.below(parts.len() as u64) as usize;
            chosen.push(parts.swap_remove(i));
        }
        parts.push(Hierarchy::combine(chosen).unwrap());
    }
    parts.pop().unwrap()
}

/// Arbitrary but fixed subset costs: an FNV hash of the ids, reduced.
#[derive(Clone, Copy, Debug)]
pub struct HashOracle {
    pub salt: u64,
    pub modulus: u64,
}

impl MulticastOracle for HashOracle {
    fn multicast_cost(&self, members: &[MemberId]) -> Result<u64> {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ self.salt;
        for m in members {
            for b in m.as_str().bytes().chain([0xff]) {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        Ok(h % self.modulus)
    }
}
