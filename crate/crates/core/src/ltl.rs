//! Linear temporal logic over finite words with strict since and until.
//!
//! Formulas are immutable DAGs: subformulas are reference counted, so the
//! large formulas produced by [`crate::translate::uhat_to_ltl`] share
//! structure and are evaluated once per distinct node.
//!
//! Only `true`, `false`, `Q(a)`, `!`, `&`, `|`, `S` and `U` are stored. The
//! parser expands the derived forms:
//!
//! | sugar   | stored as          |
//! |---------|--------------------|
//! | `P φ`   | `true S φ`         |
//! | `F φ`   | `true U φ`         |
//! | `X φ`   | `false U φ`        |
//! | `G φ`   | `φ & !(true U !φ)` |
//! | `φ -> ψ`| `!φ \| ψ`          |

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lang::{Alphabet, OutputPosition, Word, WordError, Words};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LtlError {
    #[error("column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("symbol {0:?} is not in the alphabet")]
    UnknownSymbol(String),
    #[error("position {pos} is outside a word of length {len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("line {line}: {msg}")]
    File { line: usize, msg: String },
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Debug, PartialEq, Eq)]
pub enum Node {
    True,
    False,
    Atom(usize),
    Not(Ltl),
    And(Ltl, Ltl),
    Or(Ltl, Ltl),
    Since(Ltl, Ltl),
    Until(Ltl, Ltl),
}

/// Shared handle to a formula node. Equality is structural, with a pointer
/// check first.
#[derive(Clone)]
pub struct Ltl(Arc<Node>);

impl PartialEq for Ltl {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for Ltl {}

impl Ltl {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// True when both handles point at the same node.
    pub fn same(&self, other: &Ltl) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    fn mk(node: Node) -> Self {
        Ltl(Arc::new(node))
    }

    pub fn top() -> Self {
        Ltl::mk(Node::True)
    }

    pub fn bottom() -> Self {
        Ltl::mk(Node::False)
    }

    pub fn atom(symbol: usize) -> Self {
        Ltl::mk(Node::Atom(symbol))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Ltl) -> Self {
        Ltl::mk(Node::Not(a))
    }

    pub fn and(a: Ltl, b: Ltl) -> Self {
        Ltl::mk(Node::And(a, b))
    }

    pub fn or(a: Ltl, b: Ltl) -> Self {
        Ltl::mk(Node::Or(a, b))
    }

    pub fn since(a: Ltl, b: Ltl) -> Self {
        Ltl::mk(Node::Since(a, b))
    }

    pub fn until(a: Ltl, b: Ltl) -> Self {
        Ltl::mk(Node::Until(a, b))
    }

    pub fn implies(a: Ltl, b: Ltl) -> Self {
        Ltl::or(Ltl::not(a), b)
    }

    pub fn past(a: Ltl) -> Self {
        Ltl::since(Ltl::top(), a)
    }

    pub fn future(a: Ltl) -> Self {
        Ltl::until(Ltl::top(), a)
    }

    pub fn next(a: Ltl) -> Self {
        Ltl::until(Ltl::bottom(), a)
    }

    pub fn globally(a: Ltl) -> Self {
        Ltl::and(a.clone(), Ltl::not(Ltl::future(Ltl::not(a))))
    }

    pub fn is_true(&self) -> bool {
        matches!(*self.0, Node::True)
    }

    pub fn is_false(&self) -> bool {
        matches!(*self.0, Node::False)
    }

    // Constant-folding constructors used by the translators.

    pub fn not_s(a: Ltl) -> Self {
        match a.node() {
            Node::True => Ltl::bottom(),
            Node::False => Ltl::top(),
            Node::Not(inner) => inner.clone(),
            _ => Ltl::not(a),
        }
    }

    pub fn and_s(a: Ltl, b: Ltl) -> Self {
        if a.is_false() || b.is_false() {
            Ltl::bottom()
        } else if a.is_true() {
            b
        } else if b.is_true() || a.same(&b) {
            a
        } else {
            Ltl::and(a, b)
        }
    }

    pub fn or_s(a: Ltl, b: Ltl) -> Self {
        if a.is_true() || b.is_true() {
            Ltl::top()
        } else if a.is_false() {
            b
        } else if b.is_false() || a.same(&b) {
            a
        } else {
            Ltl::or(a, b)
        }
    }

    pub fn since_s(a: Ltl, b: Ltl) -> Self {
        if b.is_false() {
            Ltl::bottom()
        } else {
            Ltl::since(a, b)
        }
    }

    pub fn until_s(a: Ltl, b: Ltl) -> Self {
        if b.is_false() {
            Ltl::bottom()
        } else {
            Ltl::until(a, b)
        }
    }

    /// Balanced folded conjunction; empty is `true`.
    pub fn all(items: impl IntoIterator<Item = Ltl>) -> Self {
        balanced(items.into_iter().collect(), Ltl::top(), &Ltl::and_s)
    }

    /// Balanced folded disjunction; empty is `false`.
    pub fn any(items: impl IntoIterator<Item = Ltl>) -> Self {
        balanced(items.into_iter().collect(), Ltl::bottom(), &Ltl::or_s)
    }

    /// Number of distinct nodes in the DAG.
    pub fn node_count(&self) -> usize {
        let mut seen = HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(f) = stack.pop() {
            if !seen.insert(f.id()) {
                continue;
            }
            match f.node() {
                Node::True | Node::False | Node::Atom(_) => {}
                Node::Not(a) => stack.push(a.clone()),
                Node::And(a, b) | Node::Or(a, b) | Node::Since(a, b) | Node::Until(a, b) => {
                    stack.push(a.clone());
                    stack.push(b.clone());
                }
            }
        }
        seen.len()
    }

    /// Nesting depth of the syntax tree.
    pub fn depth(&self) -> usize {
        fn go(f: &Ltl, memo: &mut HashMap<usize, usize>) -> usize {
            if let Some(&d) = memo.get(&f.id()) {
                return d;
            }
            let d = match f.node() {
                Node::True | Node::False | Node::Atom(_) => 0,
                Node::Not(a) => 1 + go(a, memo),
                Node::And(a, b) | Node::Or(a, b) | Node::Since(a, b) | Node::Until(a, b) => {
                    1 + go(a, memo).max(go(b, memo))
                }
            };
            memo.insert(f.id(), d);
            d
        }
        go(self, &mut HashMap::new())
    }

    /// Truth value at every position of `word`.
    pub fn eval_all(&self, word: &[usize]) -> Vec<bool> {
        Evaluator::new(word).eval(self).to_vec()
    }

    /// `w, i ⊨ φ` with a 0-based position `i`.
    pub fn eval_at(&self, word: &[usize], i: usize) -> Result<bool, LtlError> {
        if i >= word.len() {
            return Err(LtlError::PositionOutOfRange { pos: i, len: word.len() });
        }
        Ok(self.eval_all(word)[i])
    }

    /// Acceptance at the first or last position.
    pub fn accepts(&self, word: &[usize], output: OutputPosition) -> Result<bool, LtlError> {
        if word.is_empty() {
            return Err(WordError::Empty.into());
        }
        Ok(self.eval_all(word)[output.index(word.len())])
    }

    /// Writes the formula with symbols named by `alphabet`.
    pub fn display<'a>(&'a self, alphabet: &'a Alphabet) -> impl fmt::Display + 'a {
        Shown { f: self, alphabet }
    }
}

impl fmt::Debug for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

fn balanced(mut items: Vec<Ltl>, empty: Ltl, join: &dyn Fn(Ltl, Ltl) -> Ltl) -> Ltl {
    match items.len() {
        0 => empty,
        1 => items.pop().unwrap(),
        n => {
            let right = items.split_off(n / 2);
            let l = balanced(items, empty.clone(), join);
            let r = balanced(right, empty, join);
            join(l, r)
        }
    }
}

/// Bottom-up evaluator memoized on node identity. Since and until use the
/// running-state recurrences
/// `since(i) = φ₂(i−1) ∨ (φ₁(i−1) ∧ since(i−1))` and its mirror.
pub struct Evaluator<'w> {
    word: &'w [usize],
    memo: HashMap<usize, Arc<Vec<bool>>>,
}

impl<'w> Evaluator<'w> {
    pub fn new(word: &'w [usize]) -> Self {
        Evaluator {
            word,
            memo: HashMap::new(),
        }
    }

    pub fn eval(&mut self, f: &Ltl) -> Arc<Vec<bool>> {
        if let Some(v) = self.memo.get(&f.id()) {
            return v.clone();
        }
        let n = self.word.len();
        let out: Vec<bool> = match f.node() {
            Node::True => vec![true; n],
            Node::False => vec![false; n],
            Node::Atom(a) => self.word.iter().map(|s| s == a).collect(),
            Node::Not(a) => self.eval(a).iter().map(|x| !x).collect(),
            Node::And(a, b) => {
                let (x, y) = (self.eval(a), self.eval(b));
                x.iter().zip(y.iter()).map(|(p, q)| *p && *q).collect()
            }
            Node::Or(a, b) => {
                let (x, y) = (self.eval(a), self.eval(b));
                x.iter().zip(y.iter()).map(|(p, q)| *p || *q).collect()
            }
            Node::Since(a, b) => {
                let (hold, target) = (self.eval(a), self.eval(b));
                let mut out = vec![false; n];
                for i in 1..n {
                    out[i] = target[i - 1] || (hold[i - 1] && out[i - 1]);
                }
                out
            }
            Node::Until(a, b) => {
                let (hold, target) = (self.eval(a), self.eval(b));
                let mut out = vec![false; n];
                for i in (0..n.saturating_sub(1)).rev() {
                    out[i] = target[i + 1] || (hold[i + 1] && out[i + 1]);
                }
                out
            }
        };
        let out = Arc::new(out);
        self.memo.insert(f.id(), out.clone());
        out
    }
}

struct Shown<'a> {
    f: &'a Ltl,
    alphabet: &'a Alphabet,
}

fn precedence(f: &Ltl) -> u8 {
    match f.node() {
        Node::Since(..) | Node::Until(..) => 1,
        Node::Or(..) => 3,
        Node::And(..) => 4,
        Node::Not(_) => 5,
        Node::True | Node::False | Node::Atom(_) => 6,
    }
}

fn symbol_text(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        s.to_string()
    } else {
        format!("'{s}'")
    }
}

impl fmt::Display for Shown<'_> {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let alphabet = self.alphabet;
        let wrap = |out: &mut fmt::Formatter<'_>, g: &Ltl, paren: bool| {
            let sub = Shown { f: g, alphabet };
            if paren {
                write!(out, "({sub})")
            } else {
                write!(out, "{sub}")
            }
        };
        let me = precedence(self.f);
        match self.f.node() {
            Node::True => out.write_str("true"),
            Node::False => out.write_str("false"),
            Node::Atom(a) => write!(out, "Q({})", symbol_text(self.alphabet.symbol(*a))),
            Node::Not(a) => {
                out.write_str("!")?;
                wrap(out, a, precedence(a) < me)
            }
            Node::And(a, b) | Node::Or(a, b) | Node::Since(a, b) | Node::Until(a, b) => {
                let op = match self.f.node() {
                    Node::And(..) => " & ",
                    Node::Or(..) => " | ",
                    Node::Since(..) => " S ",
                    _ => " U ",
                };
                wrap(out, a, precedence(a) < me)?;
                out.write_str(op)?;
                wrap(out, b, precedence(b) <= me)
            }
        }
    }
}

// ---------------------------------------------------------------- parsing

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Sym(String),
    LParen,
    RParen,
    Bang,
    Amp,
    Pipe,
    Arrow,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, LtlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let col = k + 1;
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let len = chars[k..]
                .iter()
                .take_while(|c| c.is_ascii_alphanumeric() || **c == '_')
                .count();
            let word: String = chars[k..k + len].iter().collect();
            k += len;
            if word == "Q" {
                // Q(<symbol>): the argument is read verbatim up to ')'
                let open = chars[k..].iter().position(|c| !c.is_whitespace()).map(|p| k + p);
                let Some(open) = open.filter(|&p| chars[p] == '(') else {
                    return Err(LtlError::Syntax { col, msg: "expected '(' after Q".into() });
                };
                let close = chars[open..]
                    .iter()
                    .position(|&c| c == ')')
                    .map(|p| open + p)
                    .ok_or(LtlError::Syntax { col, msg: "unterminated Q(...)".into() })?;
                let raw: String = chars[open + 1..close].iter().collect();
                let raw = raw.trim();
                let sym = raw
                    .strip_prefix('\'')
                    .and_then(|s| s.strip_suffix('\''))
                    .unwrap_or(raw);
                toks.push((Tok::Sym(sym.to_string()), col));
                k = close + 1;
            } else {
                toks.push((Tok::Word(word), col));
            }
        } else if c == '-' && chars.get(k + 1) == Some(&'>') {
            toks.push((Tok::Arrow, col));
            k += 2;
        } else {
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                _ => return Err(LtlError::Syntax { col, msg: format!("unexpected character {c:?}") }),
            };
            toks.push((tok, col));
            k += 1;
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
    alphabet: &'a Alphabet,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> LtlError {
        LtlError::Syntax {
            col: self.toks.get(self.pos).map_or(self.end, |t| t.1),
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        self.eat(&Tok::Word(w.to_string()))
    }

    fn temporal(&mut self) -> Result<Ltl, LtlError> {
        let mut lhs = self.implication()?;
        loop {
            if self.eat_word("S") {
                lhs = Ltl::since(lhs, self.implication()?);
            } else if self.eat_word("U") {
                lhs = Ltl::until(lhs, self.implication()?);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn implication(&mut self) -> Result<Ltl, LtlError> {
        let lhs = self.disjunction()?;
        if self.eat(&Tok::Arrow) {
            return Ok(Ltl::implies(lhs, self.implication()?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Ltl, LtlError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Tok::Pipe) {
            lhs = Ltl::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Ltl, LtlError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            lhs = Ltl::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Ltl, LtlError> {
        if self.eat(&Tok::Bang) {
            return Ok(Ltl::not(self.unary()?));
        }
        let ops: [(&str, fn(Ltl) -> Ltl); 4] = [
            ("X", Ltl::next),
            ("F", Ltl::future),
            ("G", Ltl::globally),
            ("P", Ltl::past),
        ];
        for (kw, build) in ops {
            if self.eat_word(kw) {
                return Ok(build(self.unary()?));
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Ltl, LtlError> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.temporal()?;
                if !self.eat(&Tok::RParen) {
                    return Err(self.error("expected ')'"));
                }
                Ok(f)
            }
            Some(Tok::Word(w)) if w == "true" => {
                self.pos += 1;
                Ok(Ltl::top())
            }
            Some(Tok::Word(w)) if w == "false" => {
                self.pos += 1;
                Ok(Ltl::bottom())
            }
            Some(Tok::Sym(s)) => {
                let a = self
                    .alphabet
                    .index_of(&s)
                    .ok_or_else(|| LtlError::UnknownSymbol(s.clone()))?;
                self.pos += 1;
                Ok(Ltl::atom(a))
            }
            _ => Err(self.error("expected a formula")),
        }
    }
}

/// Parses a formula over `alphabet`, expanding derived operators.
pub fn parse_ltl(text: &str, alphabet: &Alphabet) -> Result<Ltl, LtlError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count() + 1,
        alphabet,
    };
    let f = p.temporal()?;
    if p.pos < p.toks.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(f)
}

/// A formula together with its alphabet and output position: a complete
/// language acceptor.
#[derive(Clone, Debug)]
pub struct LtlModel {
    pub alphabet: Alphabet,
    pub output: OutputPosition,
    pub formula: Ltl,
}

impl LtlModel {
    pub fn accepts(&self, word: &[usize]) -> Result<bool, LtlError> {
        self.alphabet.check(word)?;
        self.formula.accepts(word, self.output)
    }

    /// Reads the `.ltl` file format: `alphabet:` and `output:` header lines
    /// followed by the formula (which may span several lines). `//` starts
    /// a comment.
    pub fn parse(text: &str) -> Result<Self, LtlError> {
        let mut alphabet = None;
        let mut output = OutputPosition::Last;
        let mut body = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split("//").next().unwrap_or("").trim();
            let file_err = |msg: &str| LtlError::File { line: k + 1, msg: msg.into() };
            if let Some(rest) = line.strip_prefix("alphabet:") {
                let syms: Vec<String> = rest
                    .split_whitespace()
                    .map(|s| s.trim_matches('\'').to_string())
                    .collect();
                alphabet = Some(Alphabet::new(syms).map_err(|e| file_err(&e.to_string()))?);
            } else if let Some(rest) = line.strip_prefix("output:") {
                output = OutputPosition::parse(rest.trim())
                    .ok_or_else(|| file_err("output must be first or last"))?;
            } else if !line.is_empty() {
                body.push_str(line);
                body.push(' ');
            }
        }
        let alphabet = alphabet.ok_or(LtlError::File { line: 1, msg: "missing 'alphabet:' header".into() })?;
        let formula = parse_ltl(&body, &alphabet)?;
        Ok(LtlModel { alphabet, output, formula })
    }
}

impl fmt::Display for LtlModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let syms: Vec<String> = self.alphabet.symbols().iter().map(|s| symbol_text(s)).collect();
        writeln!(f, "alphabet: {}", syms.join(" "))?;
        writeln!(f, "output: {}", self.output)?;
        writeln!(f, "{}", self.formula.display(&self.alphabet))
    }
}

/// Shortest accepted word of length at most `max_len`, in length-then-
/// lexicographic order.
pub fn bounded_sat(formula: &Ltl, alphabet: &Alphabet, max_len: usize, output: OutputPosition) -> Option<Word> {
    Words::new(alphabet.len(), max_len).find(|w| formula.eval_all(w)[output.index(w.len())])
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const AB_STAR: &str = "G (Q(a) -> X Q(b)) & G (Q(b) & X true -> X Q(a))";

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    #[test]
    fn parses_atoms_and_sugar() {
        let sigma = Alphabet::new(["a", "b", "c"]).unwrap();
        assert_eq!(parse_ltl("Q(a)", &sigma).unwrap(), Ltl::atom(0));
        assert_eq!(
            parse_ltl("P Q(c)", &sigma).unwrap(),
            Ltl::since(Ltl::top(), Ltl::atom(2))
        );
        assert_eq!(
            parse_ltl("X Q(b)", &sigma).unwrap(),
            Ltl::until(Ltl::bottom(), Ltl::atom(1))
        );
        assert!(matches!(parse_ltl("Q(z)", &sigma), Err(LtlError::UnknownSymbol(_))));
        assert!(matches!(parse_ltl("Q(a) &", &sigma), Err(LtlError::Syntax { .. })));
        assert!(matches!(parse_ltl("(Q(a)", &sigma), Err(LtlError::Syntax { .. })));
    }

    #[test]
    fn ab_star_formula_structure() {
        let sigma = ab();
        let f = parse_ltl(AB_STAR, &sigma).unwrap();
        let a = || Ltl::atom(0);
        let b = || Ltl::atom(1);
        let expected = Ltl::and(
            Ltl::globally(Ltl::implies(a(), Ltl::next(b()))),
            Ltl::globally(Ltl::implies(Ltl::and(b(), Ltl::next(Ltl::top())), Ltl::next(a()))),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn strict_since_and_next() {
        let sigma = ab();
        let w = sigma.parse_word("ab").unwrap();
        let since = parse_ltl("Q(a) S Q(b)", &sigma).unwrap();
        assert!(!since.eval_at(&w, 0).unwrap());
        let next = parse_ltl("X Q(b)", &sigma).unwrap();
        assert!(next.eval_at(&w, 0).unwrap());
        assert!(!next.eval_at(&w, 1).unwrap());
        assert!(next.eval_at(&w, 2).is_err());
    }

    #[test]
    fn ab_star_membership() {
        let sigma = ab();
        let f = parse_ltl(AB_STAR, &sigma).unwrap();
        let at = |w: &str| f.accepts(&sigma.parse_word(w).unwrap(), OutputPosition::First).unwrap();
        assert!(at("ab"));
        assert!(at("abab"));
        assert!(!at("aba"));
        assert!(!at("ba"));
        assert!(!at("abb"));
    }

    #[test]
    fn accept_edge_cases() {
        let sigma = ab();
        assert!(Ltl::top().accepts(&[1], OutputPosition::Last).unwrap());
        assert!(!Ltl::atom(0).accepts(&[1, 0], OutputPosition::First).unwrap());
        assert!(Ltl::top().accepts(&[], OutputPosition::Last).is_err());
        let _ = sigma;
    }

    #[test]
    fn bounded_satisfiability() {
        let a = Alphabet::new(["a"]).unwrap();
        let f = parse_ltl("F Q(a)", &a).unwrap();
        // strict F: the shortest witness at the first position has length 2
        assert_eq!(bounded_sat(&f, &a, 3, OutputPosition::First), Some(vec![0, 0]));
        // at the last position nothing lies strictly ahead
        assert_eq!(bounded_sat(&f, &a, 3, OutputPosition::Last), None);
        assert_eq!(bounded_sat(&Ltl::bottom(), &ab(), 4, OutputPosition::Last), None);
        let sigma = ab();
        let star = parse_ltl(AB_STAR, &sigma).unwrap();
        // "b" satisfies both clauses vacuously
        assert_eq!(bounded_sat(&star, &sigma, 4, OutputPosition::First), Some(vec![1]));
    }

    #[test]
    fn display_round_trips() {
        let sigma = Alphabet::new(["a", "b", "#"]).unwrap();
        for text in [AB_STAR, "(Q(a) S Q(b)) U Q('#')", "Q(a) S (Q(b) U Q(a))", "!(Q(a) & Q(b)) | Q(a)", "!!Q(a)"] {
            let f = parse_ltl(text, &sigma).unwrap();
            let shown = f.display(&sigma).to_string();
            assert_eq!(parse_ltl(&shown, &sigma).unwrap(), f, "{shown}");
        }
    }

    #[test]
    fn folding_constructors() {
        assert!(Ltl::any(Vec::new()).is_false());
        assert!(Ltl::all(Vec::new()).is_true());
        assert_eq!(Ltl::and_s(Ltl::top(), Ltl::atom(1)), Ltl::atom(1));
        assert!(Ltl::since_s(Ltl::atom(0), Ltl::bottom()).is_false());
        let many = Ltl::any((0..1000).map(|k| Ltl::atom(k % 2)));
        assert!(many.depth() <= 11);
    }

    #[test]
    fn model_file() {
        let text = "alphabet: a b\noutput: first\n// (ab)*\nG (Q(a) -> X Q(b)) &\n  G (Q(b) & X true -> X Q(a))\n";
        let m = LtlModel::parse(text).unwrap();
        assert!(m.accepts(&[0, 1]).unwrap());
        let again = LtlModel::parse(&m.to_string()).unwrap();
        assert_eq!(again.formula, m.formula);
        assert_eq!(again.output, OutputPosition::First);
    }
}
