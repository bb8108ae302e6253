//! Boolean circuits laid out as UHAT layers.
//!
//! Values live in components of the residual vector and are 0/1-valued.
//! Linear combinations of components are kept symbolic as [`Lin`] and only
//! written to a component when a ReLU or an attention layer needs them.
//!
//! Position-wise affine maps are realized by an attention layer whose
//! score is constantly zero and whose `C` ignores the attended operand.

use std::collections::BTreeMap;

use crate::lang::Mask;
use crate::numeric::{AffineMap, Rational, RationalVector};
use crate::uhat::{AttentionLayer, Layer, ReluLayer, Tie};

/// `c + Σ coef·x[k]` with integer coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Lin {
    pub c: i64,
    pub terms: BTreeMap<usize, i64>,
}

impl Lin {
    pub fn constant(c: i64) -> Self {
        Lin { c, terms: BTreeMap::new() }
    }

    pub fn var(k: usize) -> Self {
        Lin { c: 0, terms: BTreeMap::from([(k, 1)]) }
    }

    pub fn plus(&self, other: &Lin) -> Lin {
        let mut out = self.clone();
        out.c += other.c;
        for (k, x) in &other.terms {
            *out.terms.entry(*k).or_insert(0) += x;
        }
        out.terms.retain(|_, x| *x != 0);
        out
    }

    pub fn scaled(&self, f: i64) -> Lin {
        Lin {
            c: self.c * f,
            terms: self.terms.iter().filter(|(_, x)| f != 0 && **x != 0).map(|(k, x)| (*k, x * f)).collect(),
        }
    }

    pub fn minus(&self, other: &Lin) -> Lin {
        self.plus(&other.scaled(-1))
    }

    /// `1 − self`
    pub fn negated(&self) -> Lin {
        Lin::constant(1).minus(self)
    }

    pub fn as_const(&self) -> Option<i64> {
        self.terms.is_empty().then_some(self.c)
    }

    pub fn as_var(&self) -> Option<usize> {
        match (self.c, self.terms.len()) {
            (0, 1) => self.terms.iter().next().filter(|(_, x)| **x == 1).map(|(k, _)| *k),
            _ => None,
        }
    }

    /// Column entries of this form read from a block starting at `offset`,
    /// with the constant carried by the block's `one` component so that an
    /// all-zero block evaluates to zero.
    pub fn homogenized(&self, one: usize, offset: usize) -> Vec<(usize, i64)> {
        let mut out: Vec<(usize, i64)> = self.terms.iter().map(|(k, x)| (offset + k, *x)).collect();
        if self.c != 0 {
            out.push((offset + one, self.c));
        }
        out
    }
}

pub struct Circuit {
    pub width: usize,
    pub layers: Vec<Layer>,
    /// component holding the constant 1 at every position
    pub one: usize,
}

fn rat(x: i64) -> Rational {
    Rational::from(x)
}

/// Affine map whose row `r` computes `forms[r]` (as `(row, form)` pairs;
/// missing rows are zero).
fn map_from_forms(rows: usize, cols: usize, forms: &[(usize, Lin)]) -> AffineMap {
    let mut bias = vec![Rational::zero(); rows];
    let mut entries = Vec::new();
    for (r, form) in forms {
        bias[*r] = rat(form.c);
        entries.extend(form.terms.iter().map(|(k, x)| (*r, *k, rat(*x))));
    }
    AffineMap::from_entries(rows, cols, entries, RationalVector::new(bias)).expect("forms fit the map")
}

impl Circuit {
    pub fn new(width: usize, one: usize) -> Self {
        Circuit { width, layers: Vec::new(), one }
    }

    /// Appends one component per form and returns the first new index.
    pub fn affine(&mut self, forms: &[Lin]) -> usize {
        let rows: Vec<Vec<(usize, i64)>> = forms.iter().map(|f| f.terms.iter().map(|(k, x)| (*k, *x)).collect()).collect();
        let bias: Vec<i64> = forms.iter().map(|f| f.c).collect();
        self.attention_raw(Vec::new(), Vec::new(), rows, bias, Mask::None, Tie::Leftmost)
    }

    /// Attention layer with score `⟨A v_i, B v_j⟩` given by row forms, and
    /// `C(v, a) = (v, extra)` where each extra row lists entries over the
    /// concatenated `(v, a)` columns plus a bias.
    pub fn attention_raw(
        &mut self,
        a_rows: Vec<(usize, Lin)>,
        b_rows: Vec<(usize, Lin)>,
        extra: Vec<Vec<(usize, i64)>>,
        extra_bias: Vec<i64>,
        mask: Mask,
        tie: Tie,
    ) -> usize {
        let r = self.width;
        let a = map_from_forms(r, r, &a_rows);
        let b = map_from_forms(r, r, &b_rows);
        let s = r + extra.len();
        let mut entries: Vec<(usize, usize, Rational)> = (0..r).map(|k| (k, k, Rational::one())).collect();
        for (row, cols) in extra.iter().enumerate() {
            entries.extend(cols.iter().map(|(c, x)| (r + row, *c, rat(*x))));
        }
        let mut bias = vec![Rational::zero(); s];
        for (row, x) in extra_bias.iter().enumerate() {
            bias[r + row] = rat(*x);
        }
        let c = AffineMap::from_entries(s, 2 * r, entries, RationalVector::new(bias)).expect("layer fits");
        self.layers.push(Layer::Attention(AttentionLayer { a, b, c, mask, tie }));
        self.width = s;
        r
    }

    pub fn relu(&mut self, k: usize) {
        self.layers.push(Layer::Relu(ReluLayer { coord: k }));
    }

    /// Component holding `form`, reusing one when `form` is a plain variable.
    pub fn materialize(&mut self, form: &Lin) -> usize {
        match form.as_var() {
            Some(k) => k,
            None => self.affine(std::slice::from_ref(form)),
        }
    }

    /// `relu(form)` in a fresh component.
    fn clamp(&mut self, form: Lin) -> Lin {
        let k = self.affine(&[form]);
        self.relu(k);
        Lin::var(k)
    }

    pub fn and(&mut self, xs: Vec<Lin>) -> Lin {
        let mut live = Vec::new();
        for x in xs {
            match x.as_const() {
                Some(0) => return Lin::constant(0),
                Some(_) => {}
                None => live.push(x),
            }
        }
        match live.len() {
            0 => Lin::constant(1),
            1 => live.pop().unwrap(),
            k => {
                let sum = live.iter().fold(Lin::constant(-(k as i64 - 1)), |acc, x| acc.plus(x));
                self.clamp(sum)
            }
        }
    }

    pub fn or(&mut self, xs: Vec<Lin>) -> Lin {
        let negated = xs.iter().map(Lin::negated).collect();
        self.and(negated).negated()
    }

    pub fn iff(&mut self, a: Lin, b: Lin) -> Lin {
        match (a.as_const(), b.as_const()) {
            (Some(1), _) => return b,
            (Some(_), _) => return b.negated(),
            (_, Some(1)) => return a,
            (_, Some(_)) => return a.negated(),
            _ => {}
        }
        let k = self.affine(&[a.minus(&b), b.minus(&a)]);
        self.relu(k);
        self.relu(k + 1);
        Lin::constant(1).minus(&Lin::var(k)).minus(&Lin::var(k + 1))
    }

    /// `(found ∧ yes) ∨ (¬found ∧ no)` for 0/1 forms.
    pub fn select(&mut self, found: Lin, yes: Lin, no: Lin) -> Lin {
        match found.as_const() {
            Some(0) => return no,
            Some(_) => return yes,
            None => {}
        }
        let hit = self.and(vec![found.clone(), yes]);
        let miss = self.and(vec![found.negated(), no]);
        hit.plus(&miss)
    }
}
