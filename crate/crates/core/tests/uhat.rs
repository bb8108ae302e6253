mod common;

use std::collections::HashSet;

use common::{ab, combo, half, random_uhat};
use hardattn::lang::{Mask, OutputPosition, Words};
use hardattn::numeric::{dot, AffineMap, Rational, RationalVector};
use hardattn::uhat::{
    value_bound_report, AttentionLayer, Layer, ReluLayer, Tie, TokenEmbedding, Uhat, UhatError, DEFAULT_CAP,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Attended position found by scoring every unmasked position and keeping
/// the best one under the tie rule.
fn scan(layer: &AttentionLayer, seq: &[RationalVector], i: usize) -> Option<usize> {
    let q = layer.a.apply(&seq[i]).unwrap();
    let mut best: Option<(usize, Rational)> = None;
    for j in 0..seq.len() {
        let allowed = match layer.mask {
            Mask::None => true,
            Mask::Future => j < i,
            Mask::Past => j > i,
        };
        if !allowed {
            continue;
        }
        let s = dot(&q, &layer.b.apply(&seq[j]).unwrap()).unwrap();
        let better = match &best {
            None => true,
            Some((_, b)) => s > *b || (s == *b && layer.tie == Tie::Rightmost),
        };
        if better {
            best = Some((j, s));
        }
    }
    best.map(|(j, _)| j)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn attention_picks_the_scanned_position(seed in any::<u64>(), c in 0usize..6) {
        let m = random_uhat(&mut ChaCha8Rng::seed_from_u64(seed), c);
        for w in Words::new(2, 5) {
            let trace = m.simulate(&w).unwrap();
            for (l, layer) in m.layers().iter().enumerate() {
                if let Layer::Attention(att) = layer {
                    let chosen = trace.chosen[l].as_ref().unwrap();
                    for i in 0..w.len() {
                        prop_assert_eq!(chosen[i], scan(att, &trace.layers[l], i));
                    }
                }
            }
        }
    }

    #[test]
    fn reachable_sets_contain_every_simulated_value(seed in any::<u64>(), c in 0usize..6) {
        let m = random_uhat(&mut ChaCha8Rng::seed_from_u64(seed), c);
        let sets: Vec<HashSet<RationalVector>> =
            m.reachable_value_sets(DEFAULT_CAP).unwrap().into_iter().map(|s| s.into_iter().collect()).collect();
        for w in Words::new(2, 5) {
            let trace = m.simulate(&w).unwrap();
            for (l, seq) in trace.layers.iter().enumerate() {
                for v in seq {
                    prop_assert!(sets[l].contains(v), "layer {} value {:?}", l, v);
                }
            }
        }
    }

    #[test]
    fn relu_is_idempotent(xs in proptest::collection::vec(-20i64..20, 1..5), k in 0usize..5) {
        let v = RationalVector::from_ints(&xs);
        let k = k % xs.len();
        prop_assert_eq!(v.relu_at(k).relu_at(k), v.relu_at(k));
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), c in 0usize..6) {
        let m = random_uhat(&mut ChaCha8Rng::seed_from_u64(seed), c);
        prop_assert_eq!(Uhat::from_json(&m.to_json()).unwrap(), m);
    }
}

fn count_a() -> Uhat {
    // one component, 1 on a; the head copies the attended value
    let emb = TokenEmbedding::new(ab(), vec![RationalVector::from_ints(&[1]), RationalVector::from_ints(&[0])]).unwrap();
    let layer = AttentionLayer {
        a: AffineMap::identity(1),
        b: AffineMap::identity(1),
        c: AffineMap::from_dense(vec![vec![Rational::zero(), Rational::one()]], RationalVector::zeros(1)).unwrap(),
        mask: Mask::Future,
        tie: Tie::Rightmost,
    };
    Uhat::new(emb, vec![Layer::Attention(layer)], RationalVector::from_ints(&[1]), OutputPosition::Last).unwrap()
}

#[test]
fn future_mask_sees_strictly_earlier_positions() {
    let m = count_a();
    // last position sees an earlier a exactly when one exists
    assert!(m.accepts(&[0, 1]).unwrap());
    assert!(!m.accepts(&[1, 0]).unwrap());
    assert!(!m.accepts(&[0]).unwrap());
}

#[test]
fn acceptance_threshold_is_strict() {
    let m = count_a().with_accept(RationalVector::new(vec![Rational::zero()])).unwrap();
    for w in Words::new(2, 4) {
        assert!(!m.accepts(&w).unwrap());
    }
}

#[test]
fn relu_twice_in_a_model_is_relu_once() {
    let emb = TokenEmbedding::new(ab(), vec![RationalVector::from_ints(&[-2, 1]), RationalVector::from_ints(&[3, -1])]).unwrap();
    let once = Uhat::new(emb.clone(), vec![Layer::Relu(ReluLayer { coord: 0 })], RationalVector::from_ints(&[1, 1]), OutputPosition::Last).unwrap();
    let twice = Uhat::new(
        emb,
        vec![Layer::Relu(ReluLayer { coord: 0 }), Layer::Relu(ReluLayer { coord: 0 })],
        RationalVector::from_ints(&[1, 1]),
        OutputPosition::Last,
    )
    .unwrap();
    for w in Words::new(2, 3) {
        assert_eq!(once.simulate(&w).unwrap().last(), twice.simulate(&w).unwrap().last());
    }
}

#[test]
fn reachable_sum_layer() {
    let emb = TokenEmbedding::new(ab(), vec![RationalVector::from_ints(&[1]), RationalVector::from_ints(&[0])]).unwrap();
    let layer = AttentionLayer {
        a: AffineMap::identity(1),
        b: AffineMap::identity(1),
        c: AffineMap::from_dense(vec![vec![Rational::one(), Rational::one()]], RationalVector::zeros(1)).unwrap(),
        mask: Mask::None,
        tie: Tie::Leftmost,
    };
    let m = Uhat::new(emb, vec![Layer::Attention(layer)], RationalVector::from_ints(&[1]), OutputPosition::Last).unwrap();
    let sets = m.reachable_value_sets(10).unwrap();
    let v1: HashSet<_> = sets[1].iter().cloned().collect();
    for k in 0..=2 {
        assert!(v1.contains(&RationalVector::from_ints(&[k])));
    }
    assert!(matches!(m.reachable_value_sets(2), Err(UhatError::Blowup { layer: 1, .. })));
}

#[test]
fn value_sizes_do_not_grow_with_length() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..30 {
        let m = random_uhat(&mut rng, k % 6);
        let reports: Vec<u64> = [10usize, 20, 40]
            .iter()
            .map(|&n| {
                let words = [(0..n).map(|p| p % 2).collect::<Vec<_>>(), (0..n).map(|p| (p < n / 2) as usize).collect()];
                words.iter().map(|w| value_bound_report(&m.simulate(w).unwrap())).max().unwrap()
            })
            .collect();
        assert!(reports.windows(2).all(|r| r[0] == r[1]), "model {k}: {reports:?}");
    }
}

#[test]
fn half_entries_have_two_bits() {
    let emb = TokenEmbedding::new(ab(), vec![RationalVector::new(vec![half()]), RationalVector::from_ints(&[0])]).unwrap();
    let m = Uhat::new(emb, vec![], RationalVector::from_ints(&[1]), OutputPosition::Last).unwrap();
    assert_eq!(value_bound_report(&m.simulate(&[0, 1]).unwrap()), Rational::new(1, 2).unwrap().bit_length());
}

#[test]
fn every_mask_and_tie_is_generated() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut seen = HashSet::new();
    for k in 0..6 {
        let m = random_uhat(&mut rng, k);
        if let Layer::Attention(a) = &m.layers()[0] {
            seen.insert((a.mask, a.tie));
        }
        assert_eq!(combo(k), match &m.layers()[0] {
            Layer::Attention(a) => (a.mask, a.tie),
            _ => unreachable!(),
        });
    }
    assert_eq!(seen.len(), 6);
}
