mod common;

use common::{ab, naive_holds, random_ltl};
use hardattn::lang::{OutputPosition, Words};
use hardattn::ltl::{bounded_sat, parse_ltl, Ltl, LtlModel};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn formula(seed: u64, depth: usize) -> Ltl {
    random_ltl(&mut ChaCha8Rng::seed_from_u64(seed), depth, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn recurrences_match_quantifier_reading(seed in any::<u64>(), depth in 0usize..=4) {
        let f = formula(seed, depth);
        for w in Words::new(2, 5) {
            let dp = f.eval_all(&w);
            for i in 0..w.len() {
                prop_assert_eq!(dp[i], naive_holds(&f, &w, i), "{} on {:?} at {}", f.display(&ab()), w, i);
            }
        }
    }

    #[test]
    fn display_parses_back(seed in any::<u64>(), depth in 0usize..=4) {
        let f = formula(seed, depth);
        let text = f.display(&ab()).to_string();
        let g = parse_ltl(&text, &ab()).unwrap();
        for w in Words::new(2, 4) {
            prop_assert_eq!(f.eval_all(&w), g.eval_all(&w), "{}", text);
        }
    }

    #[test]
    fn de_morgan(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_ltl(&mut rng, 3, 2);
        let y = random_ltl(&mut rng, 3, 2);
        let lhs = Ltl::not(Ltl::and(x.clone(), y.clone()));
        let rhs = Ltl::or(Ltl::not(x), Ltl::not(y));
        for w in Words::new(2, 5) {
            prop_assert_eq!(lhs.eval_all(&w), rhs.eval_all(&w));
        }
    }
}

#[test]
fn globally_is_a_scan_over_the_rest_of_the_word() {
    for seed in 0..50 {
        let phi = formula(seed, 2);
        let g = Ltl::globally(phi.clone());
        for w in Words::new(2, 5) {
            let base = phi.eval_all(&w);
            let got = g.eval_all(&w);
            for i in 0..w.len() {
                assert_eq!(got[i], base[i..].iter().all(|&b| b));
            }
        }
    }
}

#[test]
fn operators_are_strict() {
    let sigma = ab();
    let a = Ltl::atom(0);
    let w = [0usize];
    // nothing lies strictly before or after the only position
    assert!(!Ltl::past(a.clone()).eval_all(&w)[0]);
    assert!(!Ltl::future(a.clone()).eval_all(&w)[0]);
    assert!(!Ltl::next(Ltl::top()).eval_all(&w)[0]);
    assert!(!Ltl::since(Ltl::top(), a.clone()).eval_all(&w)[0]);
    let s = parse_ltl("Q(a) S Q(b)", &sigma).unwrap();
    assert_eq!(s.eval_all(&[1, 0, 0, 1]), vec![false, true, true, true]);
    let u = parse_ltl("Q(a) U Q(b)", &sigma).unwrap();
    assert_eq!(u.eval_all(&[1, 0, 0, 1]), vec![true, true, true, false]);
}

#[test]
fn ab_star_is_recognized_at_first_position() {
    let sigma = ab();
    let f = parse_ltl("G (Q(a) -> X Q(b)) & G (Q(b) & X true -> X Q(a))", &sigma).unwrap();
    for w in Words::new(2, 8) {
        // every a is followed by b and every non-final b by a, so b(ab)*
        // is accepted as well
        let shaped = w.iter().enumerate().all(|(k, &s)| match s {
            0 => w.get(k + 1) == Some(&1),
            _ => w.get(k + 1).is_none_or(|&t| t == 0),
        });
        assert_eq!(f.accepts(&w, OutputPosition::First).unwrap(), shaped, "{}", sigma.render(&w));
    }
}

#[test]
fn bounded_sat_finds_shortest_model() {
    let sigma = ab();
    for seed in 0..40 {
        let f = formula(seed, 3);
        let got = bounded_sat(&f, &sigma, 4, OutputPosition::Last);
        let expected = Words::new(2, 4).find(|w| naive_holds(&f, w, w.len() - 1));
        assert_eq!(got, expected);
    }
}

#[test]
fn model_file_round_trip() {
    let text = "alphabet: a b\noutput: first\n// (ab)* shape\nG (Q(a) -> X Q(b))\n";
    let m = LtlModel::parse(text).unwrap();
    assert_eq!(m.output, OutputPosition::First);
    let again = LtlModel::parse(&m.to_string()).unwrap();
    for w in Words::new(2, 5) {
        assert_eq!(m.accepts(&w).unwrap(), again.accepts(&w).unwrap());
    }
}
