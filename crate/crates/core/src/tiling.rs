//! The 2ⁿ-tiling problem, its encoding as words, and its reduction to
//! B-RASP emptiness.
//!
//! A grid has `2ⁿ` columns and `m` rows; row 1 is the bottom row. A grid
//! is encoded row by row, bottom row first, each cell as its 0-based
//! column number in `n` bits (most significant first), the tile symbol and
//! `#`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::brasp::{AttentionOp, BoolExpr, BraspError, BraspProgram, Definition, Direction, Operation, VecId};
use crate::lang::{Alphabet, Mask, OutputPosition, Word};

/// Largest supported counter width; rows have `2ⁿ` cells.
pub const MAX_N: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TilingError {
    #[error("grid has {actual} columns, the instance needs {expected}")]
    Width { expected: usize, actual: usize },
    #[error("grid has no rows")]
    NoRows,
    #[error("tile index {0} is not in the instance")]
    UnknownTile(usize),
    #[error("unknown tile name {0:?}")]
    UnknownTileName(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tile {
    pub name: String,
    pub left: u64,
    pub up: u64,
    pub right: u64,
    pub down: u64,
}

impl Tile {
    pub fn new(name: &str, left: u64, up: u64, right: u64, down: u64) -> Self {
        Tile { name: name.to_string(), left, up, right, down }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingInstance {
    n: u32,
    tiles: Vec<Tile>,
    final_tile: usize,
}

const RESERVED: [&str; 3] = ["0", "1", "#"];

impl TilingInstance {
    pub fn new(n: u32, tiles: Vec<Tile>, final_tile: &str) -> Result<Self, TilingError> {
        if n == 0 || n > MAX_N {
            return Err(TilingError::Instance(format!("n must lie in 1..={MAX_N}")));
        }
        if tiles.is_empty() {
            return Err(TilingError::Instance("no tiles".into()));
        }
        let mut seen = HashSet::new();
        for t in &tiles {
            if RESERVED.contains(&t.name.as_str()) || t.name.is_empty() || t.name.chars().any(char::is_whitespace) {
                return Err(TilingError::Instance(format!("invalid tile name {:?}", t.name)));
            }
            if !seen.insert(t.name.clone()) {
                return Err(TilingError::Instance(format!("duplicate tile name {:?}", t.name)));
            }
        }
        let final_tile = tiles
            .iter()
            .position(|t| t.name == final_tile)
            .ok_or_else(|| TilingError::UnknownTileName(final_tile.to_string()))?;
        Ok(TilingInstance { n, tiles, final_tile })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn columns(&self) -> usize {
        1 << self.n
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn final_tile(&self) -> usize {
        self.final_tile
    }

    pub fn tile_index(&self, name: &str) -> Option<usize> {
        self.tiles.iter().position(|t| t.name == name)
    }

    /// `0 1 #` followed by the tile names in instance order.
    pub fn alphabet(&self) -> Alphabet {
        let symbols = RESERVED.iter().map(|s| s.to_string()).chain(self.tiles.iter().map(|t| t.name.clone()));
        Alphabet::new(symbols).expect("tile names are distinct and not reserved")
    }

    /// Alphabet index of tile `t`.
    pub fn tile_symbol(&self, t: usize) -> usize {
        RESERVED.len() + t
    }

    /// Reads the instance format: `n <int>`, one `tile <name> <left> <up>
    /// <right> <down>` line per tile, and `final <name>`. `//` starts a
    /// comment.
    pub fn parse(text: &str) -> Result<Self, TilingError> {
        let mut n = None;
        let mut tiles = Vec::new();
        let mut fin = None;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split("//").next().unwrap_or("").trim();
            let err = |msg: &str| TilingError::Parse { line: k + 1, msg: msg.to_string() };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [] => {}
                ["n", v] => n = Some(v.parse::<u32>().map_err(|_| err("n must be a positive integer"))?),
                ["tile", name, l, u, r, d] => {
                    let c = |s: &str| s.parse::<u64>().map_err(|_| err("edge colors must be natural numbers"));
                    tiles.push(Tile::new(name, c(l)?, c(u)?, c(r)?, c(d)?));
                }
                ["final", name] => fin = Some(name.to_string()),
                _ => return Err(err("expected 'n <int>', 'tile <name> <l> <u> <r> <d>' or 'final <name>'")),
            }
        }
        let n = n.ok_or(TilingError::Parse { line: 0, msg: "missing 'n' line".into() })?;
        let fin = fin.ok_or(TilingError::Parse { line: 0, msg: "missing 'final' line".into() })?;
        TilingInstance::new(n, tiles, &fin)
    }
}

impl fmt::Display for TilingInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n)?;
        for t in &self.tiles {
            writeln!(f, "tile {} {} {} {} {}", t.name, t.left, t.up, t.right, t.down)?;
        }
        writeln!(f, "final {}", self.tiles[self.final_tile].name)
    }
}

/// `rows[0]` is row 1 (the bottom row); `rows[j][i]` is the tile index in
/// column `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TilingGrid {
    pub rows: Vec<Vec<usize>>,
}

impl TilingGrid {
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    fn check(&self, inst: &TilingInstance) -> Result<(), TilingError> {
        if self.rows.is_empty() {
            return Err(TilingError::NoRows);
        }
        for row in &self.rows {
            if row.len() != inst.columns() {
                return Err(TilingError::Width { expected: inst.columns(), actual: row.len() });
            }
            if let Some(&t) = row.iter().find(|&&t| t >= inst.tiles.len()) {
                return Err(TilingError::UnknownTile(t));
            }
        }
        Ok(())
    }

    /// Reads `m` lines of whitespace-separated tile names, row 1 first.
    pub fn parse(text: &str, inst: &TilingInstance) -> Result<Self, TilingError> {
        let mut rows = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split("//").next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let row = line
                .split_whitespace()
                .map(|name| inst.tile_index(name).ok_or_else(|| TilingError::UnknownTileName(name.to_string())))
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| TilingError::Parse { line: k + 1, msg: e.to_string() })?;
            rows.push(row);
        }
        let grid = TilingGrid { rows };
        grid.check(inst)?;
        Ok(grid)
    }

    pub fn render(&self, inst: &TilingInstance) -> String {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&t| inst.tiles[t].name.as_str()).collect::<Vec<_>>().join(" ") + "\n")
            .collect()
    }
}

/// Checks the five tiling conditions directly.
pub fn verify_tiling(inst: &TilingInstance, grid: &TilingGrid) -> Result<bool, TilingError> {
    grid.check(inst)?;
    let t = |j: usize, i: usize| &inst.tiles[grid.rows[j][i]];
    let (w, m) = (inst.columns(), grid.m());
    let final_ok = grid.rows[m - 1][w - 1] == inst.final_tile;
    let border_rows = (0..w).all(|i| t(0, i).down == 0 && t(m - 1, i).up == 0);
    let border_cols = (0..m).all(|j| t(j, 0).left == 0 && t(j, w - 1).right == 0);
    let horizontal = (0..m).all(|j| (0..w - 1).all(|i| t(j, i).right == t(j, i + 1).left));
    let vertical = (0..m - 1).all(|j| (0..w).all(|i| t(j, i).up == t(j + 1, i).down));
    Ok(final_ok && border_rows && border_cols && horizontal && vertical)
}

fn push_counter(word: &mut Word, value: usize, n: u32) {
    for bit in (0..n).rev() {
        word.push((value >> bit) & 1);
    }
}

pub fn encode_grid(inst: &TilingInstance, grid: &TilingGrid) -> Result<Word, TilingError> {
    grid.check(inst)?;
    let mut word = Vec::with_capacity(grid.m() * inst.columns() * (inst.n as usize + 2));
    for row in &grid.rows {
        for (i, &t) in row.iter().enumerate() {
            push_counter(&mut word, i, inst.n);
            word.push(inst.tile_symbol(t));
            word.push(2);
        }
    }
    Ok(word)
}

/// Inverse of [`encode_grid`]: `None` unless `word` is exactly the encoding
/// of some grid.
pub fn decode_grid(inst: &TilingInstance, word: &[usize]) -> Option<TilingGrid> {
    let block = inst.n as usize + 2;
    let row_len = block * inst.columns();
    if word.is_empty() || word.len() % row_len != 0 {
        return None;
    }
    let mut rows = Vec::new();
    for chunk in word.chunks(row_len) {
        let mut row = Vec::with_capacity(inst.columns());
        for (i, cell) in chunk.chunks(block).enumerate() {
            let mut expected = Vec::new();
            push_counter(&mut expected, i, inst.n);
            let (bits, rest) = cell.split_at(inst.n as usize);
            if bits != expected.as_slice() || rest[1] != 2 || rest[0] < RESERVED.len() {
                return None;
            }
            row.push(rest[0] - RESERVED.len());
        }
        rows.push(row);
    }
    let grid = TilingGrid { rows };
    grid.check(inst).ok()?;
    Some(grid)
}

/// Smallest-height valid grid with at most `max_rows` rows. Within one
/// height the first grid in row-major lexicographic tile order is returned.
pub fn search_tiling(inst: &TilingInstance, max_rows: usize) -> Option<TilingGrid> {
    (1..=max_rows).find_map(|m| first_grid(inst, m))
}

fn first_grid(inst: &TilingInstance, m: usize) -> Option<TilingGrid> {
    let w = inst.columns();
    let cells = w * m;
    let mut placed: Vec<usize> = Vec::with_capacity(cells);
    let mut next_choice = 0;
    // depth-first in lexicographic order, checking each cell against its
    // left and lower neighbours as it is placed
    loop {
        let pos = placed.len();
        if pos == cells {
            let rows = placed.chunks(w).map(<[usize]>::to_vec).collect();
            return Some(TilingGrid { rows });
        }
        let (j, i) = (pos / w, pos % w);
        let fits = |t: usize| {
            let tile = &inst.tiles[t];
            (j > 0 || tile.down == 0)
                && (j + 1 < m || tile.up == 0)
                && (i > 0 || tile.left == 0)
                && (i + 1 < w || tile.right == 0)
                && (i == 0 || inst.tiles[placed[pos - 1]].right == tile.left)
                && (j == 0 || inst.tiles[placed[pos - w]].up == tile.down)
                && (pos + 1 < cells || t == inst.final_tile)
        };
        match (next_choice..inst.tiles.len()).find(|&t| fits(t)) {
            Some(t) => {
                placed.push(t);
                next_choice = 0;
            }
            None => {
                let last = placed.pop()?;
                next_choice = last + 1;
            }
        }
    }
}

/// Incremental builder for generated programs.
struct ProgramBuilder {
    alphabet: Alphabet,
    defs: Vec<Definition>,
    ids: HashMap<String, VecId>,
}

impl ProgramBuilder {
    fn new(alphabet: Alphabet) -> Self {
        ProgramBuilder { alphabet, defs: Vec::new(), ids: HashMap::new() }
    }

    fn push(&mut self, name: String, op: Operation) -> VecId {
        let id = self.alphabet.len() + self.defs.len();
        self.ids.insert(name.clone(), id);
        self.defs.push(Definition { name, op });
        id
    }

    fn pos(&mut self, name: impl Into<String>, e: BoolExpr) -> VecId {
        self.push(name.into(), Operation::Positionwise(e))
    }

    /// `name(i) = attn max j [j<i | score] value default default`
    fn max_left(&mut self, name: impl Into<String>, score: BoolExpr, value: BoolExpr, default: BoolExpr) -> VecId {
        self.push(
            name.into(),
            Operation::Attention(AttentionOp {
                direction: Direction::Max,
                mask: Mask::Future,
                score,
                value,
                default,
            }),
        )
    }

    fn finish(self, output: &str) -> Result<BraspProgram, BraspError> {
        BraspProgram::new(self.alphabet, self.defs, output, OutputPosition::Last)
    }
}

fn t() -> BoolExpr {
    BoolExpr::Const(true)
}

fn f() -> BoolExpr {
    BoolExpr::Const(false)
}

/// Vectors shared by the tiling and H-chain programs: `A` (every block so
/// far is well formed) and the counter bits `C_1..C_n`, least significant
/// first.
struct Common {
    a: VecId,
    counter: Vec<VecId>,
}

const HASH: VecId = 2;

fn format_and_counters(p: &mut ProgramBuilder, n: u32, payload: &[VecId]) -> Common {
    let j = BoolExpr::j;
    let i = BoolExpr::i;
    let n = n as usize;
    let any_payload = |at: fn(VecId) -> BoolExpr| BoolExpr::or(payload.iter().map(|&s| at(s)));
    let bit = |at: fn(VecId) -> BoolExpr| BoolExpr::or([at(0), at(1)]);

    let a_t = p.max_left("A_T", t(), any_payload(j), f());
    let mut a_c = vec![p.max_left("A_C_1", t(), bit(j), f())];
    for k in 2..=n {
        let prev = a_c[k - 2];
        a_c.push(p.max_left(format!("A_C_{k}"), t(), j(prev), f()));
    }
    let mut a_h = vec![p.max_left("A_hash_1", t(), j(HASH), t())];
    for k in 2..=n + 1 {
        let prev = a_h[k - 2];
        a_h.push(p.max_left(format!("A_hash_{k}"), t(), j(prev), t()));
    }
    let a_enc = p.pos(
        "A_enc",
        BoolExpr::and([
            BoolExpr::implies(i(HASH), i(a_t)),
            BoolExpr::implies(
                any_payload(i),
                BoolExpr::and(a_c.iter().map(|&c| i(c)).chain([i(a_h[n])])),
            ),
        ]),
    );
    let a = p.max_left("A", BoolExpr::not(j(a_enc)), f(), i(a_enc));

    let mut counter = vec![p.max_left("C_1", bit(j), j(1), f())];
    for k in 2..=n {
        let prev = counter[k - 2];
        counter.push(p.max_left(format!("C_{k}"), bit(j), j(prev), f()));
    }
    Common { a, counter }
}

/// The increment check between the current block's counter and the
/// previous block's.
fn increment(counter: &[VecId]) -> BoolExpr {
    let (i, j) = (BoolExpr::i, BoolExpr::j);
    let n = counter.len();
    BoolExpr::or((0..n).map(|k| {
        let lower = (0..k).map(|r| BoolExpr::and([BoolExpr::not(i(counter[r])), j(counter[r])]));
        let here = [i(counter[k]), BoolExpr::not(j(counter[k]))];
        let higher = (k + 1..n).map(|r| BoolExpr::iff(i(counter[r]), j(counter[r])));
        BoolExpr::and(lower.chain(here).chain(higher))
    }))
}

fn all_of(ids: &[VecId], at: fn(VecId) -> BoolExpr, negate: bool) -> BoolExpr {
    BoolExpr::and(ids.iter().map(|&v| if negate { BoolExpr::not(at(v)) } else { at(v) }))
}

/// Compiles a tiling instance to a program that accepts exactly the
/// encodings of valid grids.
///
/// The combining vector `C` uses `C_wrap ∨ C_inc` as its default: the last
/// block of every grid has counter `1ⁿ`, where the wrap check is false.
pub fn compile_tiling_to_brasp(inst: &TilingInstance) -> BraspProgram {
    let (i, j) = (BoolExpr::i, BoolExpr::j);
    let mut p = ProgramBuilder::new(inst.alphabet());
    let tiles: Vec<VecId> = (0..inst.tiles.len()).map(|t| inst.tile_symbol(t)).collect();
    let Common { a, counter: c } = format_and_counters(&mut p, inst.n, &tiles);

    let c_inc = p.max_left("C_inc", j(HASH), increment(&c), f());
    let c_wrap = p.max_left(
        "C_wrap",
        j(HASH),
        BoolExpr::and(c.iter().flat_map(|&k| [BoolExpr::not(i(k)), j(k)])),
        all_of(&c, i, true),
    );
    let c_all = p.max_left(
        "C",
        BoolExpr::and([j(HASH), BoolExpr::not(j(c_wrap)), BoolExpr::not(j(c_inc))]),
        f(),
        BoolExpr::or([i(c_wrap), i(c_inc)]),
    );

    let b: Vec<VecId> = inst
        .tiles
        .iter()
        .zip(&tiles)
        .map(|(tile, &s)| p.max_left(format!("B_{}", sanitize(&tile.name)), BoolExpr::or(tiles.iter().map(|&x| j(x))), j(s), f()))
        .collect();
    let b_where = |pred: &dyn Fn(&Tile) -> bool, at: fn(VecId) -> BoolExpr| {
        BoolExpr::or(inst.tiles.iter().zip(&b).filter(|(tile, _)| pred(tile)).map(|(_, &v)| at(v)))
    };
    let f_vec = p.pos(
        "F",
        BoolExpr::and([i(HASH), i(b[inst.final_tile])].into_iter().chain(c.iter().map(|&k| i(k)))),
    );

    let same_counter = BoolExpr::and([j(HASH)].into_iter().chain(c.iter().map(|&k| BoolExpr::iff(i(k), j(k)))));
    let e_bot = p.max_left("E_bot", same_counter.clone(), t(), b_where(&|t| t.down == 0, i));
    let e_top = p.max_left(
        "E_top",
        BoolExpr::and([j(HASH), BoolExpr::or([b_where(&|t| t.up != 0, j), all_of(&c, j, true)])]),
        BoolExpr::and([b_where(&|t| t.up == 0, j), b_where(&|t| t.up == 0, i)]),
        f(),
    );
    let e_left = p.pos("E_left", BoolExpr::implies(all_of(&c, i, true), b_where(&|t| t.left == 0, i)));
    let e_right = p.pos("E_right", BoolExpr::implies(all_of(&c, i, false), b_where(&|t| t.right == 0, i)));
    let e = p.max_left(
        "E",
        BoolExpr::and([j(HASH), BoolExpr::not(BoolExpr::and([j(e_bot), j(e_left), j(e_right)]))]),
        f(),
        BoolExpr::and([i(e_bot), i(e_top), i(e_left), i(e_right)]),
    );

    let pairs = |rel: &dyn Fn(&Tile, &Tile) -> bool| {
        let mut out = Vec::new();
        for (x, &bx) in inst.tiles.iter().zip(&b) {
            for (y, &by) in inst.tiles.iter().zip(&b) {
                if rel(x, y) {
                    out.push(BoolExpr::and([i(bx), j(by)]));
                }
            }
        }
        BoolExpr::or(out)
    };
    let m_down = p.max_left("M_down", same_counter, pairs(&|x, y| x.down == y.up), t());
    let m_left = p.max_left(
        "M_left",
        j(HASH),
        BoolExpr::implies(BoolExpr::or(c.iter().map(|&k| i(k))), pairs(&|x, y| x.left == y.right)),
        t(),
    );
    let m = p.max_left(
        "M",
        BoolExpr::and([j(HASH), BoolExpr::not(BoolExpr::and([j(m_down), j(m_left)]))]),
        f(),
        BoolExpr::and([i(m_down), i(m_left)]),
    );
    p.pos("Y", BoolExpr::and([i(a), i(c_all), i(f_vec), i(e), i(m)]));
    p.finish("Y").expect("generated program is well formed")
}

/// Tile names may contain characters that are not valid in identifiers.
fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' }).collect()
}

/// Words of Example-style counter chains: blocks `⟨k⟩ x_k #` for
/// `k = 0..2ⁿ−1` whose consecutive payload symbols are related by `pairs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HChainSpec {
    pub n: u32,
    pub symbols: Vec<String>,
    pub pairs: Vec<(String, String)>,
}

impl HChainSpec {
    /// Three symbols with `H = {(a,b), (b,c), (b,a), (c,b)}`.
    pub fn example(n: u32) -> Self {
        let pair = |x: &str, y: &str| (x.to_string(), y.to_string());
        HChainSpec {
            n,
            symbols: ["a", "b", "c"].iter().map(|s| s.to_string()).collect(),
            pairs: vec![pair("a", "b"), pair("b", "c"), pair("b", "a"), pair("c", "b")],
        }
    }

    pub fn alphabet(&self) -> Result<Alphabet, TilingError> {
        Alphabet::new(RESERVED.iter().map(|s| s.to_string()).chain(self.symbols.iter().cloned()))
            .map_err(|e| TilingError::Instance(e.to_string()))
    }

    fn pair_indices(&self) -> Result<Vec<(usize, usize)>, TilingError> {
        let idx = |s: &str| {
            self.symbols
                .iter()
                .position(|x| x == s)
                .ok_or_else(|| TilingError::UnknownTileName(s.to_string()))
        };
        self.pairs.iter().map(|(x, y)| Ok((idx(x)?, idx(y)?))).collect()
    }
}

/// The chain language as a program plus a generator of all its words.
pub struct HChain {
    pub program: BraspProgram,
    pub spec: HChainSpec,
    alphabet: Alphabet,
    pairs: Vec<(usize, usize)>,
}

pub fn make_h_chain(spec: &HChainSpec) -> Result<HChain, TilingError> {
    if spec.n == 0 || spec.n > MAX_N {
        return Err(TilingError::Instance(format!("n must lie in 1..={MAX_N}")));
    }
    if spec.symbols.iter().any(|s| !crate::brasp::is_identifier(s)) {
        return Err(TilingError::Instance("chain symbols must be identifiers".into()));
    }
    let alphabet = spec.alphabet()?;
    let pairs = spec.pair_indices()?;
    let (i, j) = (BoolExpr::i, BoolExpr::j);
    let mut p = ProgramBuilder::new(alphabet.clone());
    let syms: Vec<VecId> = (0..spec.symbols.len()).map(|s| RESERVED.len() + s).collect();
    let Common { a, counter: c } = format_and_counters(&mut p, spec.n, &syms);

    let c_inc = p.max_left("C_inc", j(HASH), increment(&c), t());
    let c_zero = p.max_left("C_zero", j(HASH), t(), all_of(&c, i, true));
    let cnt = p.max_left(
        "Cnt",
        BoolExpr::and([j(HASH), BoolExpr::not(BoolExpr::and([j(c_inc), j(c_zero)]))]),
        f(),
        BoolExpr::and([i(c_inc), i(c_zero)]),
    );
    let fin = p.pos("F", BoolExpr::and([i(HASH)].into_iter().chain(c.iter().map(|&k| i(k)))));
    let any_sym = |at: fn(VecId) -> BoolExpr| BoolExpr::or(syms.iter().map(|&s| at(s)));
    let related = BoolExpr::or(pairs.iter().map(|&(x, y)| BoolExpr::and([j(syms[x]), i(syms[y])])));
    let m_left = p.max_left("M_left", any_sym(j), related, t());
    let mh = p.max_left(
        "MH",
        BoolExpr::and([any_sym(j), BoolExpr::not(j(m_left))]),
        f(),
        t(),
    );
    p.pos("Y", BoolExpr::and([i(a), i(cnt), i(fin), i(mh)]));
    let program = p.finish("Y").map_err(|e| TilingError::Instance(e.to_string()))?;
    Ok(HChain { program, spec: spec.clone(), alphabet, pairs })
}

impl HChain {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// The word for a payload sequence of length `2ⁿ`.
    pub fn word_for(&self, payload: &[usize]) -> Word {
        let mut word = Vec::new();
        for (k, &s) in payload.iter().enumerate() {
            push_counter(&mut word, k, self.spec.n);
            word.push(RESERVED.len() + s);
            word.push(HASH);
        }
        word
    }

    /// Whether `word` is in the chain language, checked directly.
    pub fn is_member(&self, word: &[usize]) -> bool {
        let blocks = 1usize << self.spec.n;
        let block = self.spec.n as usize + 2;
        if word.len() != blocks * block {
            return false;
        }
        let mut payload = Vec::with_capacity(blocks);
        for (k, cell) in word.chunks(block).enumerate() {
            let mut expected = Vec::new();
            push_counter(&mut expected, k, self.spec.n);
            let (bits, rest) = cell.split_at(self.spec.n as usize);
            if bits != expected.as_slice() || rest[1] != HASH || rest[0] < RESERVED.len() {
                return false;
            }
            payload.push(rest[0] - RESERVED.len());
        }
        payload.windows(2).all(|w| self.pairs.contains(&(w[0], w[1])))
    }

    /// Every word of the language, in lexicographic payload order.
    pub fn words(&self) -> impl Iterator<Item = Word> + '_ {
        let len = 1usize << self.spec.n;
        let k = self.spec.symbols.len();
        let mut stack: Vec<usize> = Vec::with_capacity(len);
        let mut next = 0usize;
        std::iter::from_fn(move || loop {
            if stack.len() == len {
                let word = self.word_for(&stack);
                next = stack.pop().expect("nonempty") + 1;
                return Some(word);
            }
            let candidate = (next..k).find(|&s| stack.last().is_none_or(|&prev| self.pairs.contains(&(prev, s))));
            match candidate {
                Some(s) => {
                    stack.push(s);
                    next = 0;
                }
                None => {
                    next = stack.pop()? + 1;
                }
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_tile() -> TilingInstance {
        TilingInstance::new(1, vec![Tile::new("t1", 0, 0, 0, 0)], "t1").unwrap()
    }

    #[test]
    fn degenerate_instance() {
        let inst = zero_tile();
        let g = TilingGrid { rows: vec![vec![0, 0]] };
        assert!(verify_tiling(&inst, &g).unwrap());
        let word = encode_grid(&inst, &g).unwrap();
        assert_eq!(inst.alphabet().render(&word), "0t1#1t1#");
        assert_eq!(decode_grid(&inst, &word), Some(g.clone()));
        assert_eq!(search_tiling(&inst, 3), Some(g));

        let two = TilingInstance::new(1, vec![Tile::new("t1", 0, 0, 0, 0), Tile::new("t2", 0, 0, 0, 0)], "t2").unwrap();
        assert!(!verify_tiling(&two, &TilingGrid { rows: vec![vec![0, 0]] }).unwrap());
    }

    #[test]
    fn unsolvable_without_left_border() {
        let inst = TilingInstance::new(1, vec![Tile::new("x", 1, 0, 0, 0)], "x").unwrap();
        assert_eq!(search_tiling(&inst, 4), None);
    }

    #[test]
    fn dimension_errors() {
        let inst = zero_tile();
        assert!(matches!(
            verify_tiling(&inst, &TilingGrid { rows: vec![vec![0]] }),
            Err(TilingError::Width { expected: 2, actual: 1 })
        ));
        assert!(matches!(verify_tiling(&inst, &TilingGrid { rows: vec![] }), Err(TilingError::NoRows)));
    }

    #[test]
    fn file_formats() {
        let text = "// two tiles\nn 1\ntile lo 0 1 0 0\ntile hi 0 0 0 1\nfinal hi\n";
        let inst = TilingInstance::parse(text).unwrap();
        assert_eq!(TilingInstance::parse(&inst.to_string()).unwrap(), inst);
        let grid = TilingGrid::parse("lo lo\nhi hi\n", &inst).unwrap();
        assert!(verify_tiling(&inst, &grid).unwrap());
        assert_eq!(TilingGrid::parse(&grid.render(&inst), &inst).unwrap(), grid);
        assert!(TilingGrid::parse("lo\n", &inst).is_err());
        assert!(TilingInstance::parse("n 1\ntile 0 0 0 0 0\nfinal 0\n").is_err());
    }

    #[test]
    fn compiled_program_checks_format() {
        let inst = zero_tile();
        let p = compile_tiling_to_brasp(&inst);
        let sigma = inst.alphabet();
        assert!(p.accepts(&sigma.parse_word("0t1#1t1#").unwrap()).unwrap());
        assert!(!p.accepts(&sigma.parse_word("##").unwrap()).unwrap());
        assert!(!p.accepts(&sigma.parse_word("0t1#1t1#0t1#").unwrap()).unwrap());
        // the program round-trips through the DSL
        assert_eq!(crate::brasp::parse_brasp(&p.to_dsl()).unwrap(), p);
    }

    #[test]
    fn h_chain_words() {
        let chain = make_h_chain(&HChainSpec::example(1)).unwrap();
        let words: Vec<Word> = chain.words().collect();
        // payloads ab, ba, bc, cb
        assert_eq!(words.len(), 4);
        for w in &words {
            assert!(chain.is_member(w));
            assert!(chain.program.accepts(w).unwrap());
        }
        let sigma = chain.alphabet();
        assert!(!chain.program.accepts(&sigma.parse_word("0a#1a#").unwrap()).unwrap());
        assert!(!chain.program.accepts(&sigma.parse_word("0a#1b#0a#").unwrap()).unwrap());
    }
}
