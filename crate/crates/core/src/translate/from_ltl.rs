use std::collections::HashMap;

use crate::lang::{Alphabet, Mask, OutputPosition};
use crate::ltl::{Ltl, Node};
use crate::numeric::{Rational, RationalVector};
use crate::uhat::{Tie, TokenEmbedding, Uhat};

use super::circuit::{Circuit, Lin};

/// A UHAT built from a formula, with the component that carries each
/// subformula's truth value.
#[derive(Clone, Debug)]
pub struct LtlToUhat {
    pub uhat: Uhat,
    pub root: usize,
    pub subformulas: Vec<(Ltl, usize)>,
}

/// Embedding shared by the Boolean constructions: one indicator per symbol
/// followed by a constant-1 component.
pub(crate) fn indicator_embedding(alphabet: &Alphabet) -> TokenEmbedding {
    let k = alphabet.len();
    let vectors = (0..k)
        .map(|s| (0..=k).map(|c| Rational::from((c == s || c == k) as i64)).collect::<RationalVector>())
        .collect();
    TokenEmbedding::new(alphabet.clone(), vectors).expect("uniform width")
}

pub(crate) fn unit_accept(width: usize, comp: usize) -> RationalVector {
    (0..width).map(|k| Rational::from((k == comp) as i64)).collect()
}

struct Builder {
    circuit: Circuit,
    memo: HashMap<*const Node, usize>,
    order: Vec<(Ltl, usize)>,
}

impl Builder {
    fn component(&mut self, f: &Ltl) -> usize {
        let key: *const Node = f.node();
        if let Some(&k) = self.memo.get(&key) {
            return k;
        }
        let one = self.circuit.one;
        let k = match f.node() {
            Node::True => one,
            Node::False => self.circuit.affine(&[Lin::constant(0)]),
            Node::Atom(a) => *a,
            Node::Not(a) => {
                let x = self.component(a);
                self.circuit.affine(&[Lin::var(x).negated()])
            }
            Node::And(a, b) => {
                let (x, y) = (self.component(a), self.component(b));
                let out = self.circuit.and(vec![Lin::var(x), Lin::var(y)]);
                self.circuit.materialize(&out)
            }
            Node::Or(a, b) => {
                let (x, y) = (self.component(a), self.component(b));
                let out = self.circuit.or(vec![Lin::var(x), Lin::var(y)]);
                self.circuit.materialize(&out)
            }
            Node::Since(a, b) | Node::Until(a, b) => {
                let (x, y) = (self.component(a), self.component(b));
                // the nearest j carrying ¬φ₁ ∨ φ₂ decides: it satisfies φ₂
                // exactly when the temporal formula holds
                let guard = self.circuit.or(vec![Lin::var(x).negated(), Lin::var(y)]);
                let (mask, tie) = match f.node() {
                    Node::Since(..) => (Mask::Future, Tie::Rightmost),
                    _ => (Mask::Past, Tie::Leftmost),
                };
                let r = self.circuit.width;
                self.circuit.attention_raw(
                    vec![(0, Lin::constant(1))],
                    vec![(0, guard)],
                    vec![vec![(r + y, 1)]],
                    vec![0],
                    mask,
                    tie,
                )
            }
        };
        self.memo.insert(key, k);
        self.order.push((f.clone(), k));
        k
    }
}

/// Compiles `formula` to a UHAT that keeps one 0/1 component per distinct
/// subformula and accepts by reading the root's component.
pub fn ltl_to_uhat(formula: &Ltl, alphabet: &Alphabet, output: OutputPosition) -> LtlToUhat {
    let embedding = indicator_embedding(alphabet);
    let width = embedding.width();
    let mut b = Builder {
        circuit: Circuit::new(width, alphabet.len()),
        memo: HashMap::new(),
        order: Vec::new(),
    };
    let root = b.component(formula);
    let accept = unit_accept(b.circuit.width, root);
    let uhat = Uhat::new(embedding, b.circuit.layers, accept, output).expect("translation yields a well-formed model");
    LtlToUhat {
        uhat,
        root,
        subformulas: b.order,
    }
}
