mod common;

use common::{members, random_hierarchy, random_weights, HashOracle};
use khier::instances::Prng;
use khier::model::{eval_cost_member, eval_cost_total, hierarchy_cost, hierarchy_weight, Hierarchy, Node, UniformOracle, Weights};
use khier::routed::binarize;
use proptest::prelude::*;

fn reversed_children(h: &Hierarchy) -> Hierarchy {
    fn build(h: &Hierarchy, u: khier::NodeId) -> Hierarchy {
        match h.node(u) {
            Node::Leaf(m) => Hierarchy::leaf(m.clone()),
            Node::Internal(cs) => Hierarchy::combine(cs.iter().rev().map(|&c| build(h, c)).collect()).unwrap(),
        }
    }
    build(h, h.root())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn member_sum_matches_node_sum(n in 1usize..12, seed in any::<u64>(), salt in any::<u64>()) {
        let mut rng = Prng::new(seed);
        let ms = members(n);
        let w = random_weights(&mut rng, &ms, 20);
        let h = random_hierarchy(&mut rng, &ms);
        let oracle = HashOracle { salt, modulus: 50 };
        let breakdown = eval_cost_total(&h, &w, &oracle).unwrap();
        let mut by_member = 0u64;
        for m in &ms {
            let c = eval_cost_member(&h, m, &oracle).unwrap();
            prop_assert_eq!(breakdown.per_member[m], c);
            by_member += w.weight(m).unwrap() * c;
        }
        prop_assert_eq!(by_member, breakdown.total);
        prop_assert_eq!(breakdown.per_node.values().sum::<u64>(), breakdown.total);
    }

    #[test]
    fn child_order_does_not_matter(n in 1usize..10, seed in any::<u64>(), salt in any::<u64>()) {
        let mut rng = Prng::new(seed);
        let ms = members(n);
        let w = random_weights(&mut rng, &ms, 20);
        let h = random_hierarchy(&mut rng, &ms);
        let oracle = HashOracle { salt, modulus: 30 };
        prop_assert_eq!(
            hierarchy_cost(&h, &w, &oracle).unwrap(),
            hierarchy_cost(&reversed_children(&h), &w, &oracle).unwrap()
        );
    }

    #[test]
    fn cost_scales_with_weights(n in 1usize..10, seed in any::<u64>(), k in 1u64..50) {
        let mut rng = Prng::new(seed);
        let ms = members(n);
        let w = random_weights(&mut rng, &ms, 20);
        let scaled = Weights::new(w.iter().map(|(m, x)| (m.clone(), x * k)));
        let h = random_hierarchy(&mut rng, &ms);
        let oracle = HashOracle { salt: seed, modulus: 40 };
        prop_assert_eq!(
            hierarchy_cost(&h, &scaled, &oracle).unwrap(),
            k * hierarchy_cost(&h, &w, &oracle).unwrap()
        );
        prop_assert_eq!(hierarchy_weight(&h, &scaled).unwrap(), k * w.total().unwrap());
    }

    #[test]
    fn heavier_member_never_cheaper(n in 1usize..10, seed in any::<u64>(), bump in 1u64..30) {
        let mut rng = Prng::new(seed);
        let ms = members(n);
        let w = random_weights(&mut rng, &ms, 20);
        let h = random_hierarchy(&mut rng, &ms);
        let target = &ms[rng.below(n as u64) as usize];
        let heavier = Weights::new(w.iter().map(|(m, x)| (m.clone(), if m == target { x + bump } else { x })));
        let oracle = HashOracle { salt: seed, modulus: 40 };
        prop_assert!(hierarchy_cost(&h, &heavier, &oracle).unwrap() >= hierarchy_cost(&h, &w, &oracle).unwrap());
    }

    #[test]
    fn binarize_within_factor_three(n in 1usize..14, seed in any::<u64>()) {
        let mut rng = Prng::new(seed);
        let ms = members(n);
        let w = random_weights(&mut rng, &ms, 30);
        let h = random_hierarchy(&mut rng, &ms);
        let b = binarize(&h, &w).unwrap();
        prop_assert!(b.is_binary().unwrap());
        prop_assert_eq!(b.member_set().unwrap(), h.member_set().unwrap());
        let before = hierarchy_cost(&h, &w, &UniformOracle(1)).unwrap();
        let after = hierarchy_cost(&b, &w, &UniformOracle(1)).unwrap();
        prop_assert!(after <= 3 * before, "{} > 3 * {}", after, before);
    }
}
