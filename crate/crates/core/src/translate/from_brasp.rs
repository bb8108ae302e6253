use std::collections::{BTreeSet, HashMap};

use crate::brasp::{AttentionOp, BoolExpr, BraspProgram, Direction, Operation, Pos, VecId};
use crate::lang::Mask;
use crate::numeric::{AffineMap, Rational, RationalVector};
use crate::uhat::{AttentionLayer, Tie, Uhat};

use super::circuit::{Circuit, Lin};
use super::from_ltl::{indicator_embedding, unit_accept};
use super::TranslateError;

/// Shape of an attention score predicate, as far as the translation to
/// bilinear scores is concerned.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScoreClass {
    /// reads position `j` only
    JOnly,
    /// a conjunction of `j`-only guards and tests `X(i) ↔ X(j)`
    EqualityBlock {
        guards: Vec<BoolExpr>,
        vectors: Vec<VecId>,
    },
    Unsupported,
}

fn same_vector_iff(a: &BoolExpr, b: &BoolExpr) -> Option<VecId> {
    match (a, b) {
        (BoolExpr::Ref(x, Pos::I), BoolExpr::Ref(y, Pos::J)) | (BoolExpr::Ref(x, Pos::J), BoolExpr::Ref(y, Pos::I))
            if x == y =>
        {
            Some(*x)
        }
        _ => None,
    }
}

pub fn classify_score(score: &BoolExpr) -> ScoreClass {
    if !score.mentions(Pos::I) {
        return ScoreClass::JOnly;
    }
    let conjuncts: Vec<&BoolExpr> = match score {
        BoolExpr::And(items) => items.iter().collect(),
        other => vec![other],
    };
    let mut guards = Vec::new();
    let mut vectors = Vec::new();
    for c in conjuncts {
        if let BoolExpr::Iff(a, b) = c {
            if let Some(v) = same_vector_iff(a, b) {
                if !vectors.contains(&v) {
                    vectors.push(v);
                }
                continue;
            }
        }
        if c.mentions(Pos::I) {
            return ScoreClass::Unsupported;
        }
        guards.push(c.clone());
    }
    ScoreClass::EqualityBlock { guards, vectors }
}

/// `(A, B)` scoring `Σ_k [b_k(i) b_k(j) + (1−b_k(i))(1−b_k(j))]` over the
/// `(bit, complement)` component pairs, plus `(d+1)·guard(j)` when a guard is
/// given. The guard term dominates, so a maximizer satisfies the guard
/// whenever some unmasked position does, and among those it matches on all
/// bits whenever some such position does.
fn equality_maps(width: usize, pairs: &[(usize, usize)], guard: Option<&Lin>) -> (AffineMap, AffineMap) {
    let one = Rational::one();
    let d = pairs.len();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (k, (bit, comp)) in pairs.iter().enumerate() {
        for (row, col) in [(2 * k, *bit), (2 * k + 1, *comp)] {
            a.push((row, col, one.clone()));
            b.push((row, col, one.clone()));
        }
    }
    let mut a_bias = RationalVector::zeros(width).into_inner();
    let mut b_bias = RationalVector::zeros(width).into_inner();
    if let Some(g) = guard {
        a_bias[2 * d] = Rational::from(d as i64 + 1);
        b_bias[2 * d] = Rational::from(g.c);
        b.extend(g.terms.iter().map(|(col, x)| (2 * d, *col, Rational::from(*x))));
    }
    (
        AffineMap::from_entries(width, width, a, RationalVector::new(a_bias)).expect("pairs inside width"),
        AffineMap::from_entries(width, width, b, RationalVector::new(b_bias)).expect("pairs inside width"),
    )
}

/// The equality attention layer over a residual of `width` components.
/// `pairs` lists `(bit, complement)` component indices; `A = B` projects
/// onto them, so the score of `j` counts agreeing bits and equals
/// `pairs.len()` exactly on full matches. `C(v, a) = (v, a)`.
pub fn build_equality_layer(width: usize, pairs: &[(usize, usize)], mask: Mask, tie: Tie) -> AttentionLayer {
    let (a, b) = equality_maps(width, pairs, None);
    AttentionLayer {
        a,
        b,
        c: AffineMap::identity(2 * width),
        mask,
        tie,
    }
}

#[derive(Clone, Debug)]
pub struct BraspToUhat {
    pub uhat: Uhat,
    /// component of every program vector, indexed by vector id
    pub components: Vec<usize>,
    /// `(bit, complement)` pairs materialized for equality scores
    pub complements: Vec<(VecId, usize)>,
    pub classes: Vec<(String, ScoreClass)>,
}

struct Compiler {
    circuit: Circuit,
    comp: Vec<usize>,
    complement: HashMap<VecId, usize>,
    needs_complement: BTreeSet<VecId>,
}

impl Compiler {
    fn compile(&mut self, e: &BoolExpr, env: &dyn Fn(VecId, Pos) -> Lin) -> Lin {
        match e {
            BoolExpr::Const(b) => Lin::constant(*b as i64),
            BoolExpr::Ref(v, p) => env(*v, *p),
            BoolExpr::Not(x) => self.compile(x, env).negated(),
            BoolExpr::And(xs) => {
                let parts = xs.iter().map(|x| self.compile(x, env)).collect();
                self.circuit.and(parts)
            }
            BoolExpr::Or(xs) => {
                let parts = xs.iter().map(|x| self.compile(x, env)).collect();
                self.circuit.or(parts)
            }
            BoolExpr::Implies(a, b) => {
                let (x, y) = (self.compile(a, env), self.compile(b, env));
                self.circuit.or(vec![x.negated(), y])
            }
            BoolExpr::Iff(a, b) => {
                let (x, y) = (self.compile(a, env), self.compile(b, env));
                self.circuit.iff(x, y)
            }
        }
    }

    /// Compiles an expression that only reads the current position.
    fn compile_local(&mut self, e: &BoolExpr) -> Lin {
        let comp = self.comp.clone();
        self.compile(e, &move |v, _| Lin::var(comp[v]))
    }

    fn define(&mut self, v: VecId, form: Lin) {
        // every vector gets a component of its own, even a bare copy
        let k = match form.as_var() {
            Some(k) if k != self.circuit.one && !self.comp.contains(&k) => k,
            _ => self.circuit.affine(&[form]),
        };
        self.comp.push(k);
        debug_assert_eq!(self.comp.len() - 1, v);
        if self.needs_complement.contains(&v) {
            let c = self.circuit.affine(&[Lin::var(k).negated()]);
            self.complement.insert(v, c);
        }
    }

    fn attention(&mut self, op: &AttentionOp, class: &ScoreClass) -> Lin {
        let one = self.circuit.one;
        let (a_rows, b_rows, found_form, bits) = match class {
            ScoreClass::JOnly => {
                let score = self.compile_local(&op.score);
                if score.as_const() == Some(0) {
                    return self.compile_local(&op.default);
                }
                (vec![(0, Lin::constant(1))], vec![(0, score.clone())], score, Vec::new())
            }
            ScoreClass::EqualityBlock { guards, vectors } => {
                let guard = self.compile_local(&BoolExpr::and(guards.iter().cloned()));
                if guard.as_const() == Some(0) {
                    return self.compile_local(&op.default);
                }
                let pairs: Vec<(usize, usize)> = vectors.iter().map(|v| (self.comp[*v], self.complement[v])).collect();
                let (a, b) = equality_maps(self.circuit.width, &pairs, Some(&guard));
                (rows_of(&a), rows_of(&b), guard, vectors.clone())
            }
            ScoreClass::Unsupported => unreachable!("rejected before compilation"),
        };
        let r = self.circuit.width;
        // C appends the guard evaluated on the attended vector, then a copy
        // of every attended component that the value or the equality check
        // reads; a zero attention vector yields all zeros
        let mut extra = vec![found_form.homogenized(one, r)];
        let mut copied: Vec<VecId> = bits.clone();
        op.value.visit_refs(&mut |v, p| {
            if p == Pos::J && !copied.contains(&v) {
                copied.push(v);
            }
        });
        extra.extend(copied.iter().map(|v| vec![(r + self.comp[*v], 1)]));
        let tie = match op.direction {
            Direction::Min => Tie::Leftmost,
            Direction::Max => Tie::Rightmost,
        };
        let bias = vec![0; extra.len()];
        let base = self.circuit.attention_raw(a_rows, b_rows, extra, bias, op.mask, tie);
        let copy_of: HashMap<VecId, usize> = copied.iter().enumerate().map(|(k, v)| (*v, base + 1 + k)).collect();
        // the maximizer need not match when no position does, so the
        // equality is checked again on the copied bits
        let mut checks = vec![Lin::var(base)];
        for v in &bits {
            let (here, there) = (Lin::var(self.comp[*v]), Lin::var(copy_of[v]));
            checks.push(self.circuit.iff(here, there));
        }
        let found = self.circuit.and(checks);
        let comp = self.comp.clone();
        let env = move |v: VecId, p: Pos| match p {
            Pos::I => Lin::var(comp[v]),
            Pos::J => Lin::var(copy_of[&v]),
        };
        let value = self.compile(&op.value, &env);
        let default = self.compile_local(&op.default);
        self.circuit.select(found, value, default)
    }
}

fn rows_of(m: &AffineMap) -> Vec<(usize, Lin)> {
    (0..m.output_width())
        .filter_map(|r| {
            let c = int(&m.bias()[r]);
            if m.row(r).is_empty() && c == 0 {
                return None;
            }
            let mut form = Lin::constant(c);
            for (col, x) in m.row(r) {
                form = form.plus(&Lin::var(*col).scaled(int(x)));
            }
            Some((r, form))
        })
        .collect()
}

fn int(x: &Rational) -> i64 {
    assert!(x.denom() == &1.into(), "integer coefficient expected");
    x.numer().try_into().expect("small coefficient")
}

/// Compiles a program whose attention scores all classify as
/// [`ScoreClass::JOnly`] or [`ScoreClass::EqualityBlock`] into a UHAT with
/// one 0/1 component per program vector.
pub fn brasp_to_uhat(program: &BraspProgram) -> Result<BraspToUhat, TranslateError> {
    let alphabet = program.alphabet();
    let mut classes = Vec::new();
    let mut needs_complement = BTreeSet::new();
    for def in program.defs() {
        if let Operation::Attention(op) = &def.op {
            let class = classify_score(&op.score);
            match &class {
                ScoreClass::Unsupported => {
                    return Err(TranslateError::UnsupportedScore(def.name.clone()));
                }
                ScoreClass::EqualityBlock { vectors, .. } => needs_complement.extend(vectors.iter().copied()),
                ScoreClass::JOnly => {}
            }
            classes.push((def.name.clone(), class));
        }
    }
    let embedding = indicator_embedding(alphabet);
    let mut c = Compiler {
        circuit: Circuit::new(embedding.width(), alphabet.len()),
        comp: Vec::new(),
        complement: HashMap::new(),
        needs_complement,
    };
    for a in 0..alphabet.len() {
        c.comp.push(a);
        if c.needs_complement.contains(&a) {
            let k = c.circuit.affine(&[Lin::var(a).negated()]);
            c.complement.insert(a, k);
        }
    }
    let mut class_iter = classes.iter();
    for (k, def) in program.defs().iter().enumerate() {
        let v = alphabet.len() + k;
        let form = match &def.op {
            Operation::Positionwise(e) => c.compile_local(e),
            Operation::Attention(op) => {
                let (_, class) = class_iter.next().expect("one class per attention");
                c.attention(op, class)
            }
        };
        c.define(v, form);
    }
    let out = c.comp[program.output()];
    let accept = unit_accept(c.circuit.width, out);
    let uhat = Uhat::new(embedding, c.circuit.layers, accept, program.output_position())
        .expect("translation yields a well-formed model");
    let mut complements: Vec<(VecId, usize)> = c.complement.into_iter().collect();
    complements.sort_unstable();
    Ok(BraspToUhat {
        uhat,
        components: c.comp,
        complements,
        classes,
    })
}
