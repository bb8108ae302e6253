// Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use hardattn::brasp::{AttentionOp, BoolExpr, BraspProgram, Definition, Direction, Operation, Pos};
use hardattn::lang::{Alphabet, Mask, OutputPosition};
use hardattn::ltl::{parse_ltl, Ltl, Node};
use hardattn::numeric::{AffineMap, Rational, RationalVector};
use hardattn::tiling::{Tile, TilingInstance};
use hardattn::uhat::{AttentionLayer, Layer, ReluLayer, Tie, TokenEmbedding, Uhat};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn ab() -> Alphabet {
    Alphabet::new(["a", "b"]).unwrap()
}

pub fn half() -> Rational {
    Rational::new(1, 2).unwrap()
}

/// The six (mask, tie) combinations in a fixed order.
pub fn combo(k: usize) -> (Mask, Tie) {
    (Mask::ALL[(k / 2) % 3], Tie::ALL[k % 2])
}

fn pick(rng: &mut ChaCha8Rng, choices: &[Rational]) -> Rational {
    choices.choose(rng).unwrap().clone()
}

fn matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, choices: &[Rational], bias: &[Rational]) -> AffineMap {
    let m = (0..rows).map(|_| (0..cols).map(|_| pick(rng, choices)).collect()).collect();
    let b = (0..rows).map(|_| pick(rng, bias)).collect();
    AffineMap::from_dense(m, b).unwrap()
}

/// A small random model over {a, b}: widths at most 3, embedding entries in
/// {0, 1/2, 1}, one or two attention layers (the first using
/// `combo(first_combo)`), each optionally followed by a ReLU.
pub fn random_uhat(rng: &mut ChaCha8Rng, first_combo: usize) -> Uhat {
    let entries = [Rational::zero(), half(), Rational::one()];
    let weights = [Rational::from(-1), Rational::zero(), Rational::one()];
    let c_weights = [Rational::from(-1), Rational::zero(), half(), Rational::one()];
    let bias = [Rational::zero(), Rational::zero(), half()];
    let mut width = rng.gen_range(1..=3);
    let emb: Vec<RationalVector> = (0..2).map(|_| (0..width).map(|_| pick(rng, &entries)).collect()).collect();
    let embedding = TokenEmbedding::new(ab(), emb).unwrap();
    let heads = rng.gen_range(1..=2);
    let mut layers = Vec::new();
    for h in 0..heads {
        let (mask, tie) = if h == 0 { combo(first_combo) } else { combo(rng.gen_range(0..6)) };
        let out = rng.gen_range(1..=3);
        layers.push(Layer::Attention(AttentionLayer {
            a: matrix(rng, width, width, &weights, &bias),
            b: matrix(rng, width, width, &weights, &bias),
            c: matrix(rng, out, 2 * width, &c_weights, &bias),
            mask,
            tie,
        }));
        width = out;
        if rng.gen_bool(0.5) {
            layers.push(Layer::Relu(ReluLayer { coord: rng.gen_range(0..width) }));
        }
    }
    let mut accept: Vec<Rational> = (0..width).map(|_| pick(rng, &weights)).collect();
    if accept.iter().all(Rational::is_zero) {
        accept[0] = Rational::one();
    }
    let output = if rng.gen_bool(0.5) { OutputPosition::First } else { OutputPosition::Last };
    Uhat::new(embedding, layers, RationalVector::new(accept), output).unwrap()
}

/// Direct first-order reading of the temporal operators, quantifying over
/// positions instead of using recurrences.
pub fn naive_holds(f: &Ltl, w: &[usize], i: usize) -> bool {
    match f.node() {
        Node::True => true,
        Node::False => false,
        Node::Atom(a) => w[i] == *a,
        Node::Not(x) => !naive_holds(x, w, i),
        Node::And(x, y) => naive_holds(x, w, i) && naive_holds(y, w, i),
        Node::Or(x, y) => naive_holds(x, w, i) || naive_holds(y, w, i),
        Node::Since(x, y) => (0..i).any(|j| naive_holds(y, w, j) && (j + 1..i).all(|k| naive_holds(x, w, k))),
        Node::Until(x, y) => (i + 1..w.len()).any(|j| naive_holds(y, w, j) && (i + 1..j).all(|k| naive_holds(x, w, k))),
    }
}

pub fn random_ltl(rng: &mut ChaCha8Rng, depth: usize, symbols: usize) -> Ltl {
    if depth == 0 || rng.gen_bool(0.2) {
        return match rng.gen_range(0..6) {
            0 => Ltl::top(),
            1 => Ltl::bottom(),
            _ => Ltl::atom(rng.gen_range(0..symbols)),
        };
    }
    let sub = |rng: &mut ChaCha8Rng| random_ltl(rng, depth - 1, symbols);
    match rng.gen_range(0..9) {
        0 => Ltl::not(sub(rng)),
        1 => Ltl::and(sub(rng), sub(rng)),
        2 => Ltl::or(sub(rng), sub(rng)),
        3 => Ltl::since(sub(rng), sub(rng)),
        4 => Ltl::until(sub(rng), sub(rng)),
        5 => Ltl::past(sub(rng)),
        6 => Ltl::future(sub(rng)),
        7 => Ltl::next(sub(rng)),
        _ => Ltl::globally(sub(rng)),
    }
}

/// Formulas over {a, b} used by the translation suites.
pub const LTL_SUITE: &[&str] = &[
    "G (Q(a) -> X Q(b)) & G (Q(b) & X true -> X Q(a))",
    "Q(a) S Q(b)",
    "Q(a) U Q(b)",
    "true",
    "false",
    "Q(a)",
    "!Q(b)",
    "P Q(a)",
    "F Q(b)",
    "X Q(a)",
    "G Q(a)",
    "X X Q(b)",
    "P P Q(b)",
    "F (Q(a) & X Q(b))",
    "G (Q(a) | F Q(b))",
    "P (Q(b) & P Q(a))",
    "(Q(a) S Q(b)) U (Q(b) S Q(a))",
    "!P true",
    "!F true",
    "Q(a) & !P Q(b) & !F Q(b)",
    "G F Q(a)",
    "F G Q(b)",
    "(Q(a) -> F Q(b)) & (Q(b) -> P Q(a))",
    "X (Q(a) U (Q(b) & X Q(a)))",
    "P (Q(a) S (Q(b) & !X true))",
];

pub fn ltl_suite() -> Vec<Ltl> {
    LTL_SUITE.iter().map(|s| parse_ltl(s, &ab()).unwrap()).collect()
}

pub fn zero_tile(name: &str) -> Tile {
    Tile::new(name, 0, 0, 0, 0)
}

/// Hand-made n = 1 instances: solvable in one row, forced into two rows,
/// needing a horizontal pair, and two unsolvable ones.
pub fn named_instances() -> Vec<(&'static str, TilingInstance)> {
    vec![
        ("single", TilingInstance::new(1, vec![zero_tile("z")], "z").unwrap()),
        (
            "two_rows",
            TilingInstance::new(1, vec![Tile::new("lo", 0, 1, 0, 0), Tile::new("hi", 0, 0, 0, 1)], "hi").unwrap(),
        ),
        (
            "pair",
            TilingInstance::new(
                1,
                vec![Tile::new("l", 0, 0, 1, 0), Tile::new("r", 1, 0, 0, 0), Tile::new("x", 1, 1, 1, 1)],
                "r",
            )
            .unwrap(),
        ),
        (
            "no_left_border",
            TilingInstance::new(1, vec![Tile::new("p", 1, 0, 1, 0), Tile::new("q", 1, 0, 0, 0)], "q").unwrap(),
        ),
        (
            "final_unreachable",
            TilingInstance::new(
                1,
                vec![zero_tile("z"), Tile::new("f", 0, 0, 1, 0), Tile::new("g", 0, 1, 0, 1)],
                "f",
            )
            .unwrap(),
        ),
    ]
}

/// Seeded instances with n = 1, one to three tiles and colors in {0, 1}.
pub fn random_instances(rng: &mut ChaCha8Rng, count: usize) -> Vec<TilingInstance> {
    (0..count)
        .map(|_| {
            let k = rng.gen_range(1..=3);
            let tiles: Vec<Tile> = (0..k)
                .map(|t| {
                    let mut c = || rng.gen_range(0..2u64);
                    Tile::new(&format!("t{t}"), c(), c(), c(), c())
                })
                .collect();
            let fin = format!("t{}", rng.gen_range(0..k));
            TilingInstance::new(1, tiles, &fin).unwrap()
        })
        .collect()
}

/// Every grid of the instance with exactly `m` rows, in row-major
/// lexicographic order.
pub fn all_grids(inst: &TilingInstance, m: usize) -> Vec<hardattn::tiling::TilingGrid> {
    let w = inst.columns();
    let k = inst.tiles().len();
    let cells = w * m;
    (0..k.pow(cells as u32))
        .map(|mut code| {
            let mut flat = vec![0; cells];
            for slot in flat.iter_mut().rev() {
                *slot = code % k;
                code /= k;
            }
            hardattn::tiling::TilingGrid { rows: flat.chunks(w).map(<[usize]>::to_vec).collect() }
        })
        .collect()
}

fn random_expr(rng: &mut ChaCha8Rng, depth: usize, vectors: usize, positions: &[Pos]) -> BoolExpr {
    if depth == 0 || rng.gen_bool(0.3) {
        if rng.gen_bool(0.1) {
            return BoolExpr::Const(rng.gen_bool(0.5));
        }
        let v = rng.gen_range(0..vectors);
        return BoolExpr::Ref(v, *positions.choose(rng).unwrap());
    }
    let sub = |rng: &mut ChaCha8Rng| random_expr(rng, depth - 1, vectors, positions);
    match rng.gen_range(0..5) {
        0 => BoolExpr::not(sub(rng)),
        1 => BoolExpr::and([sub(rng), sub(rng)]),
        2 => BoolExpr::or([sub(rng), sub(rng)]),
        3 => BoolExpr::implies(sub(rng), sub(rng)),
        _ => BoolExpr::iff(sub(rng), sub(rng)),
    }
}

/// A random program over {a, b} whose attention scores are all j-only or
/// equality blocks, so that it translates to a UHAT.
pub fn random_program(rng: &mut ChaCha8Rng, defs: usize) -> BraspProgram {
    let mut out = Vec::new();
    for k in 0..defs {
        let vectors = 2 + k;
        let op = if rng.gen_bool(0.35) {
            Operation::Positionwise(random_expr(rng, 2, vectors, &[Pos::I]))
        } else {
            let score = if rng.gen_bool(0.5) {
                random_expr(rng, 2, vectors, &[Pos::J])
            } else {
                let mut parts = vec![random_expr(rng, 1, vectors, &[Pos::J])];
                for _ in 0..rng.gen_range(1..=2) {
                    let v = rng.gen_range(0..vectors);
                    parts.push(BoolExpr::iff(BoolExpr::i(v), BoolExpr::j(v)));
                }
                BoolExpr::And(parts)
            };
            Operation::Attention(AttentionOp {
                direction: if rng.gen_bool(0.5) { Direction::Min } else { Direction::Max },
                mask: *Mask::ALL.choose(rng).unwrap(),
                score,
                value: random_expr(rng, 2, vectors, &[Pos::I, Pos::J]),
                default: random_expr(rng, 1, vectors, &[Pos::I]),
            })
        };
        out.push(Definition { name: format!("V{k}"), op });
    }
    let output = if rng.gen_bool(0.5) { OutputPosition::First } else { OutputPosition::Last };
    BraspProgram::new(ab(), out, &format!("V{}", defs - 1), output).unwrap()
}
