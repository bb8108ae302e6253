//! Line-oriented text format for B-RASP programs.
//!
//! ```text
//! alphabet: a b '#'
//! output: Y last
//! def P(i) = Q['a'](i) & !Q['#'](i)
//! def Y(i) = attn max j [j<i | P(j)] Q['b'](i) default 0
//! ```
//!
//! `//` starts a comment. Connectives bind `!` > `&` > `|` > `->` > `<->`.

use std::collections::HashMap;

use super::{
    is_identifier, AttentionOp, BoolExpr, BraspError, BraspProgram, Definition, Direction,
    Operation, Pos, VecId,
};
use crate::lang::{Alphabet, Mask, OutputPosition};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Quoted(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bang,
    Amp,
    Pipe,
    Arrow,
    DArrow,
    Lt,
    Gt,
    Eq,
    Star,
}

struct Lexed {
    toks: Vec<(Tok, usize)>,
    end_col: usize,
}

fn lex(line: &str, line_no: usize) -> Result<Lexed, BraspError> {
    let chars: Vec<char> = line.chars().collect();
    let mut toks = Vec::new();
    let mut k = 0;
    let err = |col: usize, msg: String| BraspError::Syntax { line: line_no, col, msg };
    while k < chars.len() {
        let c = chars[k];
        let col = k + 1;
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        let two: String = chars[k..chars.len().min(k + 3)].iter().collect();
        let (tok, width) = if two.starts_with("<->") {
            (Tok::DArrow, 3)
        } else if two.starts_with("->") {
            (Tok::Arrow, 2)
        } else if c.is_ascii_alphanumeric() || c == '_' {
            let len = chars[k..]
                .iter()
                .take_while(|c| c.is_ascii_alphanumeric() || **c == '_')
                .count();
            (Tok::Ident(chars[k..k + len].iter().collect()), len)
        } else if c == '\'' {
            let len = chars[k + 1..]
                .iter()
                .position(|&c| c == '\'')
                .ok_or_else(|| err(col, "unterminated quoted symbol".into()))?;
            (Tok::Quoted(chars[k + 1..k + 1 + len].iter().collect()), len + 2)
        } else {
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '!' => Tok::Bang,
                '&' => Tok::Amp,
                '|' => Tok::Pipe,
                '<' => Tok::Lt,
                '>' => Tok::Gt,
                '=' => Tok::Eq,
                '*' => Tok::Star,
                other => return Err(err(col, format!("unexpected character {other:?}"))),
            };
            (tok, 1)
        };
        toks.push((tok, col));
        k += width;
    }
    Ok(Lexed {
        toks,
        end_col: chars.len() + 1,
    })
}

struct LineParser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end_col: usize,
    line: usize,
    alphabet: &'a Alphabet,
    scope: &'a HashMap<String, VecId>,
}

impl LineParser<'_> {
    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |t| t.1)
    }

    fn error(&self, msg: impl Into<String>) -> BraspError {
        BraspError::Syntax {
            line: self.line,
            col: self.col(),
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), BraspError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, BraspError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.error(format!("expected {what}"))),
        }
    }

    fn position(&mut self) -> Result<Pos, BraspError> {
        self.expect(Tok::LParen, "'('")?;
        let pos = match self.ident("position i or j")?.as_str() {
            "i" => Pos::I,
            "j" => Pos::J,
            _ => {
                self.pos -= 1;
                return Err(self.error("expected position i or j"));
            }
        };
        self.expect(Tok::RParen, "')'")?;
        Ok(pos)
    }

    fn expr(&mut self) -> Result<BoolExpr, BraspError> {
        let mut lhs = self.implies()?;
        while self.eat(&Tok::DArrow) {
            let rhs = self.implies()?;
            lhs = BoolExpr::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implies(&mut self) -> Result<BoolExpr, BraspError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.implies()?;
            return Ok(BoolExpr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<BoolExpr, BraspError> {
        let mut items = vec![self.and()?];
        while self.eat(&Tok::Pipe) {
            items.push(self.and()?);
        }
        Ok(BoolExpr::or(items))
    }

    fn and(&mut self) -> Result<BoolExpr, BraspError> {
        let mut items = vec![self.unary()?];
        while self.eat(&Tok::Amp) {
            items.push(self.unary()?);
        }
        Ok(BoolExpr::and(items))
    }

    fn unary(&mut self) -> Result<BoolExpr, BraspError> {
        if self.eat(&Tok::Bang) {
            return Ok(BoolExpr::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<BoolExpr, BraspError> {
        let col = self.col();
        match self.bump() {
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some(Tok::Ident(s)) if s == "0" => Ok(BoolExpr::Const(false)),
            Some(Tok::Ident(s)) if s == "1" => Ok(BoolExpr::Const(true)),
            Some(Tok::Ident(s)) if s == "Q" && self.peek() == Some(&Tok::LBracket) => {
                self.pos += 1;
                let sym = match self.bump() {
                    Some(Tok::Quoted(s)) | Some(Tok::Ident(s)) => s,
                    _ => {
                        self.pos -= 1;
                        return Err(self.error("expected a symbol"));
                    }
                };
                let id = self.alphabet.index_of(&sym).ok_or_else(|| BraspError::Syntax {
                    line: self.line,
                    col,
                    msg: format!("symbol {sym:?} is not in the alphabet"),
                })?;
                self.expect(Tok::RBracket, "']'")?;
                Ok(BoolExpr::Ref(id, self.position()?))
            }
            Some(Tok::Ident(name)) if is_identifier(&name) => {
                let id = *self.scope.get(&name).ok_or(BraspError::Scope {
                    line: self.line,
                    name: name.clone(),
                })?;
                Ok(BoolExpr::Ref(id, self.position()?))
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error("expected an expression"))
            }
        }
    }

    fn mask(&mut self) -> Result<Mask, BraspError> {
        if self.eat(&Tok::Star) {
            return Ok(Mask::None);
        }
        let start = self.pos;
        if self.eat_keyword("j") {
            let mask = if self.eat(&Tok::Lt) {
                Mask::Future
            } else if self.eat(&Tok::Gt) {
                Mask::Past
            } else {
                return Err(self.error("expected '<' or '>'"));
            };
            if self.eat_keyword("i") {
                return Ok(mask);
            }
        }
        self.pos = start;
        Err(self.error("expected mask '*', 'j<i' or 'j>i'"))
    }

    fn operation(&mut self) -> Result<Operation, BraspError> {
        if !self.eat_keyword("attn") {
            return Ok(Operation::Positionwise(self.expr()?));
        }
        let direction = if self.eat_keyword("max") {
            Direction::Max
        } else if self.eat_keyword("min") {
            Direction::Min
        } else {
            return Err(self.error("expected 'min' or 'max'"));
        };
        if !self.eat_keyword("j") {
            return Err(self.error("expected 'j'"));
        }
        self.expect(Tok::LBracket, "'['")?;
        let mask = self.mask()?;
        self.expect(Tok::Pipe, "'|'")?;
        let score = self.expr()?;
        self.expect(Tok::RBracket, "']'")?;
        let value = self.expr()?;
        if !self.eat_keyword("default") {
            return Err(self.error("expected 'default'"));
        }
        let default = self.expr()?;
        Ok(Operation::Attention(AttentionOp {
            direction,
            mask,
            score,
            value,
            default,
        }))
    }

    fn finish(&self) -> Result<(), BraspError> {
        if self.pos < self.toks.len() {
            Err(self.error("unexpected trailing input"))
        } else {
            Ok(())
        }
    }
}

fn parse_symbols(rest: &str, line: usize) -> Result<Vec<String>, BraspError> {
    rest.split_whitespace()
        .map(|tok| {
            let sym = tok
                .strip_prefix('\'')
                .and_then(|t| t.strip_suffix('\''))
                .unwrap_or(tok);
            if sym.is_empty() || sym.contains('\'') {
                Err(BraspError::Syntax {
                    line,
                    col: 1,
                    msg: format!("bad alphabet symbol {tok:?}"),
                })
            } else {
                Ok(sym.to_string())
            }
        })
        .collect()
}

/// Parses a program in the DSL.
pub fn parse_brasp(text: &str) -> Result<BraspProgram, BraspError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut output: Option<(String, OutputPosition)> = None;
    let mut defs: Vec<Definition> = Vec::new();
    let mut scope: HashMap<String, VecId> = HashMap::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |msg: &str| BraspError::Syntax {
            line: line_no,
            col: 1,
            msg: msg.to_string(),
        };
        if let Some(rest) = line.strip_prefix("alphabet:") {
            if alphabet.is_some() {
                return Err(syntax("duplicate alphabet header"));
            }
            let sigma = Alphabet::new(parse_symbols(rest, line_no)?)?;
            alphabet = Some(sigma);
            continue;
        }
        if let Some(rest) = line.strip_prefix("output:") {
            let parts: Vec<&str> = rest.split_whitespace().collect();
            let [name, pos] = parts.as_slice() else {
                return Err(syntax("expected 'output: <name> first|last'"));
            };
            let pos = OutputPosition::parse(pos).ok_or_else(|| syntax("output position must be first or last"))?;
            output = Some((name.to_string(), pos));
            continue;
        }
        let sigma = alphabet
            .as_ref()
            .ok_or_else(|| syntax("the alphabet header must precede definitions"))?;
        let lexed = lex(line, line_no)?;
        let mut p = LineParser {
            toks: lexed.toks,
            pos: 0,
            end_col: lexed.end_col,
            line: line_no,
            alphabet: sigma,
            scope: &scope,
        };
        if !p.eat_keyword("def") {
            return Err(p.error("expected 'def', 'alphabet:' or 'output:'"));
        }
        let name = p.ident("a vector name")?;
        if p.position()? != Pos::I {
            return Err(p.error("definitions are written Name(i)"));
        }
        p.expect(Tok::Eq, "'='")?;
        let op = p.operation()?;
        p.finish()?;
        let id = sigma.len() + defs.len();
        if scope.insert(name.clone(), id).is_some() {
            return Err(BraspError::DuplicateName(name));
        }
        defs.push(Definition { name, op });
    }

    let alphabet = alphabet.ok_or(BraspError::Syntax {
        line: 1,
        col: 1,
        msg: "missing 'alphabet:' header".into(),
    })?;
    let (output, position) = output.ok_or(BraspError::Syntax {
        line: 1,
        col: 1,
        msg: "missing 'output:' header".into(),
    })?;
    BraspProgram::new(alphabet, defs, &output, position)
}
