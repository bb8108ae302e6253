//! Boolean RASP: straight-line programs over Boolean position vectors.
//!
//! A program starts from one indicator vector `Q['a']` per alphabet symbol
//! and defines further vectors in order, each either position-wise or by an
//! attention operation
//!
//! ```text
//! P(i) = attn max j [ mask | S(i,j) ] V(i,j) default D(i)
//! ```
//!
//! which picks the rightmost (or leftmost, for `min`) unmasked `j` with
//! `S(i,j) = 1` and yields `V(i,j)`, falling back to `D(i)` when no such
//! `j` exists.

mod parse;

use std::fmt;

use thiserror::Error;

use crate::lang::{Alphabet, Mask, OutputPosition, Word, WordError};

pub use parse::parse_brasp;

/// Index of a vector in a program. Ids `0..|Σ|` are the symbol indicators.
pub type VecId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BraspError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}: vector {name:?} is not defined before use")]
    Scope { line: usize, name: String },
    #[error("definition {name:?}: {msg}")]
    Definition { name: String, msg: String },
    #[error("duplicate vector name {0:?}")]
    DuplicateName(String),
    #[error("output vector {0:?} is not defined")]
    UnknownOutput(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Which position a vector reference reads.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pos {
    I,
    J,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Const(bool),
    Ref(VecId, Pos),
    Not(Box<BoolExpr>),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
    Implies(Box<BoolExpr>, Box<BoolExpr>),
    Iff(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn i(v: VecId) -> Self {
        BoolExpr::Ref(v, Pos::I)
    }

    pub fn j(v: VecId) -> Self {
        BoolExpr::Ref(v, Pos::J)
    }

    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    /// Conjunction; the empty conjunction is `1` and a singleton is its
    /// only member.
    pub fn and(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        let mut items: Vec<BoolExpr> = items.into_iter().collect();
        match items.len() {
            0 => BoolExpr::Const(true),
            1 => items.pop().unwrap(),
            _ => BoolExpr::And(items),
        }
    }

    /// Disjunction; the empty disjunction is `0`.
    pub fn or(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        let mut items: Vec<BoolExpr> = items.into_iter().collect();
        match items.len() {
            0 => BoolExpr::Const(false),
            1 => items.pop().unwrap(),
            _ => BoolExpr::Or(items),
        }
    }

    pub fn implies(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::Iff(Box::new(a), Box::new(b))
    }

    /// Evaluates against materialized vectors. `j` must be `Some` whenever
    /// the expression reads position `j`.
    pub fn eval(&self, vectors: &[Vec<bool>], i: usize, j: Option<usize>) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Ref(v, Pos::I) => vectors[*v][i],
            BoolExpr::Ref(v, Pos::J) => vectors[*v][j.expect("j-reference outside attention")],
            BoolExpr::Not(e) => !e.eval(vectors, i, j),
            BoolExpr::And(es) => es.iter().all(|e| e.eval(vectors, i, j)),
            BoolExpr::Or(es) => es.iter().any(|e| e.eval(vectors, i, j)),
            BoolExpr::Implies(a, b) => !a.eval(vectors, i, j) || b.eval(vectors, i, j),
            BoolExpr::Iff(a, b) => a.eval(vectors, i, j) == b.eval(vectors, i, j),
        }
    }

    /// Calls `f` on every vector reference.
    pub fn visit_refs(&self, f: &mut impl FnMut(VecId, Pos)) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Ref(v, p) => f(*v, *p),
            BoolExpr::Not(e) => e.visit_refs(f),
            BoolExpr::And(es) | BoolExpr::Or(es) => es.iter().for_each(|e| e.visit_refs(f)),
            BoolExpr::Implies(a, b) | BoolExpr::Iff(a, b) => {
                a.visit_refs(f);
                b.visit_refs(f);
            }
        }
    }

    pub fn mentions(&self, pos: Pos) -> bool {
        let mut found = false;
        self.visit_refs(&mut |_, p| found |= p == pos);
        found
    }

    fn max_ref(&self) -> Option<VecId> {
        let mut max = None;
        self.visit_refs(&mut |v, _| max = max.max(Some(v)));
        max
    }

    fn precedence(&self) -> u8 {
        match self {
            BoolExpr::Iff(..) => 1,
            BoolExpr::Implies(..) => 2,
            BoolExpr::Or(_) => 3,
            BoolExpr::And(_) => 4,
            BoolExpr::Not(_) => 5,
            BoolExpr::Const(_) | BoolExpr::Ref(..) => 6,
        }
    }

    /// Writes the expression in DSL syntax, naming vectors with `names`.
    pub fn write_dsl(&self, out: &mut String, names: &dyn Fn(VecId) -> String) {
        let child = |out: &mut String, e: &BoolExpr, parent: u8| {
            if e.precedence() <= parent {
                out.push('(');
                e.write_dsl(out, names);
                out.push(')');
            } else {
                e.write_dsl(out, names);
            }
        };
        match self {
            BoolExpr::Const(b) => out.push(if *b { '1' } else { '0' }),
            BoolExpr::Ref(v, p) => {
                out.push_str(&names(*v));
                out.push_str(match p {
                    Pos::I => "(i)",
                    Pos::J => "(j)",
                });
            }
            BoolExpr::Not(e) => {
                out.push('!');
                child(out, e, 5);
            }
            BoolExpr::And(es) | BoolExpr::Or(es) => {
                let (sep, prec) = if matches!(self, BoolExpr::And(_)) {
                    (" & ", 4)
                } else {
                    (" | ", 3)
                };
                for (k, e) in es.iter().enumerate() {
                    if k > 0 {
                        out.push_str(sep);
                    }
                    child(out, e, prec);
                }
            }
            BoolExpr::Implies(a, b) | BoolExpr::Iff(a, b) => {
                let (sep, prec) = if matches!(self, BoolExpr::Implies(..)) {
                    (" -> ", 2)
                } else {
                    (" <-> ", 1)
                };
                child(out, a, prec);
                out.push_str(sep);
                child(out, b, prec);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    /// leftmost qualifying position
    Min,
    /// rightmost qualifying position
    Max,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttentionOp {
    pub direction: Direction,
    pub mask: Mask,
    pub score: BoolExpr,
    pub value: BoolExpr,
    pub default: BoolExpr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operation {
    Positionwise(BoolExpr),
    Attention(AttentionOp),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Definition {
    pub name: String,
    pub op: Operation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BraspProgram {
    alphabet: Alphabet,
    defs: Vec<Definition>,
    output: VecId,
    output_position: OutputPosition,
}

/// `Q['a']` or `Q[a]` → `a`.
fn indicator_symbol(name: &str) -> Option<&str> {
    let inner = name.strip_prefix("Q[")?.strip_suffix(']')?;
    Some(
        inner
            .strip_prefix('\'')
            .and_then(|s| s.strip_suffix('\''))
            .unwrap_or(inner),
    )
}

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl BraspProgram {
    /// Validates and assembles a program. `defs[k]` defines vector
    /// `|Σ| + k`; every reference must point strictly backwards.
    pub fn new(
        alphabet: Alphabet,
        defs: Vec<Definition>,
        output: &str,
        output_position: OutputPosition,
    ) -> Result<Self, BraspError> {
        let base = alphabet.len();
        let mut names = std::collections::HashSet::new();
        for (k, def) in defs.iter().enumerate() {
            let id = base + k;
            let fail = |msg: &str| BraspError::Definition {
                name: def.name.clone(),
                msg: msg.to_string(),
            };
            if !is_identifier(&def.name) || def.name == "Q" {
                return Err(fail("vector names must be identifiers other than Q"));
            }
            if !names.insert(def.name.clone()) {
                return Err(BraspError::DuplicateName(def.name.clone()));
            }
            let exprs: Vec<&BoolExpr> = match &def.op {
                Operation::Positionwise(e) => {
                    if e.mentions(Pos::J) {
                        return Err(fail("position-wise definitions cannot read position j"));
                    }
                    vec![e]
                }
                Operation::Attention(a) => {
                    if a.default.mentions(Pos::J) {
                        return Err(fail("default expressions cannot read position j"));
                    }
                    vec![&a.score, &a.value, &a.default]
                }
            };
            if exprs.iter().any(|e| e.max_ref().is_some_and(|r| r >= id)) {
                return Err(fail("reference to a vector not defined earlier"));
            }
        }
        let output_id = defs
            .iter()
            .position(|d| d.name == output)
            .map(|k| base + k)
            .or_else(|| indicator_symbol(output).and_then(|s| alphabet.index_of(s)))
            .ok_or_else(|| BraspError::UnknownOutput(output.to_string()))?;
        Ok(BraspProgram {
            alphabet,
            defs,
            output: output_id,
            output_position,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn defs(&self) -> &[Definition] {
        &self.defs
    }

    pub fn output(&self) -> VecId {
        self.output
    }

    pub fn output_position(&self) -> OutputPosition {
        self.output_position
    }

    pub fn vector_count(&self) -> usize {
        self.alphabet.len() + self.defs.len()
    }

    /// DSL spelling of a vector: `Q['a']` for indicators, the name otherwise.
    pub fn vector_name(&self, v: VecId) -> String {
        if v < self.alphabet.len() {
            format!("Q['{}']", self.alphabet.symbol(v))
        } else {
            self.defs[v - self.alphabet.len()].name.clone()
        }
    }

    pub fn vector_id(&self, name: &str) -> Option<VecId> {
        self.defs
            .iter()
            .position(|d| d.name == name)
            .map(|k| k + self.alphabet.len())
    }

    pub fn definition(&self, v: VecId) -> Option<&Definition> {
        v.checked_sub(self.alphabet.len()).and_then(|k| self.defs.get(k))
    }

    /// Runs the program on `word`, materializing every vector.
    pub fn eval(&self, word: &[usize]) -> Result<BraspTrace, BraspError> {
        self.alphabet.check(word)?;
        let n = word.len();
        let mut vectors: Vec<Vec<bool>> = Vec::with_capacity(self.vector_count());
        for a in 0..self.alphabet.len() {
            vectors.push(word.iter().map(|&s| s == a).collect());
        }
        for def in &self.defs {
            let column = match &def.op {
                Operation::Positionwise(e) => (0..n).map(|i| e.eval(&vectors, i, None)).collect(),
                Operation::Attention(op) => (0..n).map(|i| attend(op, &vectors, n, i)).collect(),
            };
            vectors.push(column);
        }
        Ok(BraspTrace {
            names: (0..self.vector_count()).map(|v| self.vector_name(v)).collect(),
            vectors,
        })
    }

    pub fn accepts(&self, word: &[usize]) -> Result<bool, BraspError> {
        let trace = self.eval(word)?;
        Ok(trace.vectors[self.output][self.output_position.index(word.len())])
    }

    /// The program in DSL syntax; [`parse_brasp`] reads it back.
    pub fn to_dsl(&self) -> String {
        self.to_string()
    }
}

/// The position attended by `op` at query `i`, if any.
pub fn attended_position(op: &AttentionOp, vectors: &[Vec<bool>], n: usize, i: usize) -> Option<usize> {
    let qualifies = |j: &usize| op.mask.allows(i, *j) && op.score.eval(vectors, i, Some(*j));
    match op.direction {
        Direction::Min => (0..n).find(qualifies),
        Direction::Max => (0..n).rev().find(qualifies),
    }
}

fn attend(op: &AttentionOp, vectors: &[Vec<bool>], n: usize, i: usize) -> bool {
    match attended_position(op, vectors, n, i) {
        Some(j) => op.value.eval(vectors, i, Some(j)),
        None => op.default.eval(vectors, i, None),
    }
}

impl fmt::Display for BraspProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = |v: VecId| self.vector_name(v);
        let quoted: Vec<String> = self
            .alphabet
            .symbols()
            .iter()
            .map(|s| format!("'{s}'"))
            .collect();
        writeln!(f, "alphabet: {}", quoted.join(" "))?;
        writeln!(f, "output: {} {}", self.vector_name(self.output), self.output_position)?;
        for def in &self.defs {
            let mut line = format!("def {}(i) = ", def.name);
            match &def.op {
                Operation::Positionwise(e) => e.write_dsl(&mut line, &names),
                Operation::Attention(op) => {
                    line.push_str(match op.direction {
                        Direction::Min => "attn min j [",
                        Direction::Max => "attn max j [",
                    });
                    line.push_str(match op.mask {
                        Mask::None => "*",
                        Mask::Future => "j<i",
                        Mask::Past => "j>i",
                    });
                    line.push_str(" | ");
                    op.score.write_dsl(&mut line, &names);
                    line.push_str("] ");
                    op.value.write_dsl(&mut line, &names);
                    line.push_str(" default ");
                    op.default.write_dsl(&mut line, &names);
                }
            }
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Every vector of a program evaluated on one word, including the symbol
/// indicators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BraspTrace {
    pub names: Vec<String>,
    pub vectors: Vec<Vec<bool>>,
}

impl BraspTrace {
    pub fn len(&self) -> usize {
        self.vectors.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn vector(&self, name: &str) -> Option<&[bool]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|k| self.vectors[k].as_slice())
    }

    /// One row per vector, one 0/1 column per position.
    pub fn table(&self, alphabet: &Alphabet, word: &Word) -> String {
        let width = self.names.iter().map(String::len).max().unwrap_or(0);
        let cell = word.iter().map(|&s| alphabet.symbol(s).len()).max().unwrap_or(1).max(1);
        let mut out = format!("{:width$} |", "");
        for &s in word {
            out.push_str(&format!(" {:>cell$}", alphabet.symbol(s)));
        }
        out.push('\n');
        for (name, bits) in self.names.iter().zip(&self.vectors) {
            out.push_str(&format!("{name:width$} |"));
            for &b in bits {
                out.push_str(&format!(" {:>cell$}", u8::from(b)));
            }
            out.push('\n');
        }
        out
    }
}
