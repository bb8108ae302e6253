//! Masked unique hard-attention transformers over exact rationals.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang::{Alphabet, Mask, OutputPosition, WordError};
use crate::numeric::{dot, AffineMap, NumericError, Rational, RationalVector};

pub const DEFAULT_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum UhatError {
    #[error("layer {layer}: {msg}")]
    Model { layer: usize, msg: String },
    #[error("embedding: {0}")]
    Embedding(String),
    #[error("value set of layer {layer} exceeds the cap of {cap} vectors")]
    Blowup { layer: usize, cap: usize },
    #[error("model file: {0}")]
    File(String),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Which maximizer an attention head picks when several positions share the
/// top score.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tie {
    Leftmost,
    Rightmost,
}

impl Tie {
    pub const ALL: [Tie; 2] = [Tie::Leftmost, Tie::Rightmost];
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenEmbedding {
    alphabet: Alphabet,
    vectors: Vec<RationalVector>,
}

impl TokenEmbedding {
    /// `vectors[k]` is the embedding of symbol `k`.
    pub fn new(alphabet: Alphabet, vectors: Vec<RationalVector>) -> Result<Self, UhatError> {
        if vectors.len() != alphabet.len() {
            return Err(UhatError::Embedding(format!(
                "{} vectors for {} symbols",
                vectors.len(),
                alphabet.len()
            )));
        }
        let d = vectors[0].width();
        if let Some(k) = vectors.iter().position(|v| v.width() != d) {
            return Err(UhatError::Embedding(format!(
                "symbol {:?} has width {}, expected {d}",
                alphabet.symbol(k),
                vectors[k].width()
            )));
        }
        Ok(TokenEmbedding { alphabet, vectors })
    }

    /// One-hot embedding: symbol `k` maps to the `k`-th unit vector.
    pub fn one_hot(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        let vectors = (0..k)
            .map(|s| (0..k).map(|c| Rational::from((c == s) as i64)).collect())
            .collect();
        TokenEmbedding { alphabet, vectors }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn width(&self) -> usize {
        self.vectors[0].width()
    }

    pub fn vector(&self, symbol: usize) -> &RationalVector {
        &self.vectors[symbol]
    }

    pub fn vectors(&self) -> &[RationalVector] {
        &self.vectors
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttentionLayer {
    pub a: AffineMap,
    pub b: AffineMap,
    pub c: AffineMap,
    pub mask: Mask,
    pub tie: Tie,
}

/// Result of one attention layer over a whole sequence.
#[derive(Clone, Debug)]
pub struct Attended {
    pub outputs: Vec<RationalVector>,
    pub chosen: Vec<Option<usize>>,
    pub score_bits: u64,
}

impl AttentionLayer {
    pub fn input_width(&self) -> usize {
        self.a.input_width()
    }

    pub fn output_width(&self) -> usize {
        self.c.output_width()
    }

    fn check(&self) -> Result<(), String> {
        let r = self.a.input_width();
        for (name, m) in [("A", &self.a), ("B", &self.b)] {
            if m.input_width() != r || m.output_width() != r {
                return Err(format!(
                    "{name} is {}x{}, expected {r}x{r}",
                    m.output_width(),
                    m.input_width()
                ));
            }
        }
        if self.c.input_width() != 2 * r {
            return Err(format!("C takes width {}, expected {}", self.c.input_width(), 2 * r));
        }
        Ok(())
    }

    pub fn score(&self, vi: &RationalVector, vj: &RationalVector) -> Result<Rational, NumericError> {
        dot(&self.a.apply(vi)?, &self.b.apply(vj)?)
    }

    pub fn apply(&self, seq: &[RationalVector]) -> Result<Attended, NumericError> {
        let queries = seq.iter().map(|v| self.a.apply(v)).collect::<Result<Vec<_>, _>>()?;
        let keys = seq.iter().map(|v| self.b.apply(v)).collect::<Result<Vec<_>, _>>()?;
        let r = self.input_width();
        let zero = RationalVector::zeros(r);
        let mut outputs = Vec::with_capacity(seq.len());
        let mut chosen = Vec::with_capacity(seq.len());
        let mut score_bits = 0;
        for (i, q) in queries.iter().enumerate() {
            let mut best: Option<(usize, Rational)> = None;
            for (j, k) in keys.iter().enumerate() {
                if !self.mask.allows(i, j) {
                    continue;
                }
                let s = dot(q, k)?;
                score_bits = score_bits.max(s.bit_length());
                let better = match &best {
                    None => true,
                    Some((_, top)) => match self.tie {
                        Tie::Leftmost => s > *top,
                        Tie::Rightmost => s >= *top,
                    },
                };
                if better {
                    best = Some((j, s));
                }
            }
            let j = best.map(|(j, _)| j);
            let a = j.map_or(&zero, |j| &seq[j]);
            outputs.push(self.c.apply_concat(&seq[i], a)?);
            chosen.push(j);
        }
        Ok(Attended { outputs, chosen, score_bits })
    }
}

/// Replaces one coordinate (0-based) by its positive part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReluLayer {
    pub coord: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Layer {
    Attention(AttentionLayer),
    Relu(ReluLayer),
}

impl Layer {
    pub fn output_width(&self, input: usize) -> usize {
        match self {
            Layer::Attention(l) => l.output_width(),
            Layer::Relu(_) => input,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Uhat {
    embedding: TokenEmbedding,
    layers: Vec<Layer>,
    accept: RationalVector,
    output: OutputPosition,
}

/// Every intermediate sequence of one run.
///
/// `layers[0]` is the embedded word and `layers[ℓ]` the output of layer ℓ.
/// `chosen[ℓ-1]` holds the attended position for each query when layer ℓ is
/// an attention layer.
#[derive(Clone, Debug)]
pub struct UhatTrace {
    pub layers: Vec<Vec<RationalVector>>,
    pub chosen: Vec<Option<Vec<Option<usize>>>>,
    pub score_bits: u64,
}

impl UhatTrace {
    pub fn last(&self) -> &[RationalVector] {
        self.layers.last().expect("trace has the embedding layer")
    }

    /// Column `comp` of layer `layer` as a sequence of values.
    pub fn component(&self, layer: usize, comp: usize) -> Vec<Rational> {
        self.layers[layer].iter().map(|v| v[comp].clone()).collect()
    }
}

impl Uhat {
    pub fn new(
        embedding: TokenEmbedding,
        layers: Vec<Layer>,
        accept: RationalVector,
        output: OutputPosition,
    ) -> Result<Self, UhatError> {
        let mut width = embedding.width();
        for (k, layer) in layers.iter().enumerate() {
            let err = |msg: String| UhatError::Model { layer: k + 1, msg };
            match layer {
                Layer::Attention(l) => {
                    if l.input_width() != width {
                        return Err(err(format!("input width {} but previous width is {width}", l.input_width())));
                    }
                    l.check().map_err(err)?;
                }
                Layer::Relu(l) => {
                    if l.coord >= width {
                        return Err(err(format!("ReLU coordinate {} outside width {width}", l.coord + 1)));
                    }
                }
            }
            width = layer.output_width(width);
        }
        if accept.width() != width {
            return Err(UhatError::Model {
                layer: layers.len(),
                msg: format!("acceptance vector has width {}, final width is {width}", accept.width()),
            });
        }
        Ok(Uhat { embedding, layers, accept, output })
    }

    pub fn embedding(&self) -> &TokenEmbedding {
        &self.embedding
    }

    pub fn alphabet(&self) -> &Alphabet {
        self.embedding.alphabet()
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn accept(&self) -> &RationalVector {
        &self.accept
    }

    pub fn output(&self) -> OutputPosition {
        self.output
    }

    /// Same model with a different acceptance vector.
    pub fn with_accept(&self, accept: RationalVector) -> Result<Self, UhatError> {
        Uhat::new(self.embedding.clone(), self.layers.clone(), accept, self.output)
    }

    /// Widths of the embedding and every layer output.
    pub fn widths(&self) -> Vec<usize> {
        let mut out = vec![self.embedding.width()];
        for layer in &self.layers {
            out.push(layer.output_width(*out.last().unwrap()));
        }
        out
    }

    pub fn attention_layers(&self) -> usize {
        self.layers.iter().filter(|l| matches!(l, Layer::Attention(_))).count()
    }

    pub fn simulate(&self, word: &[usize]) -> Result<UhatTrace, UhatError> {
        self.alphabet().check(word)?;
        let mut seq: Vec<RationalVector> = word.iter().map(|&s| self.embedding.vector(s).clone()).collect();
        let mut layers = Vec::with_capacity(self.layers.len() + 1);
        let mut chosen = Vec::with_capacity(self.layers.len());
        let mut score_bits = 0;
        for layer in &self.layers {
            let next = match layer {
                Layer::Attention(l) => {
                    let out = l.apply(&seq)?;
                    score_bits = score_bits.max(out.score_bits);
                    chosen.push(Some(out.chosen));
                    out.outputs
                }
                Layer::Relu(l) => {
                    chosen.push(None);
                    seq.iter().map(|v| v.relu_at(l.coord)).collect()
                }
            };
            layers.push(std::mem::replace(&mut seq, next));
        }
        layers.push(seq);
        Ok(UhatTrace { layers, chosen, score_bits })
    }

    /// Whether the acceptance score at the output position is strictly positive.
    pub fn accepts_trace(&self, trace: &UhatTrace) -> Result<bool, UhatError> {
        let last = trace.last();
        let v = &last[self.output.index(last.len())];
        Ok(dot(&self.accept, v)?.is_positive())
    }

    pub fn accepts(&self, word: &[usize]) -> Result<bool, UhatError> {
        let trace = self.simulate(word)?;
        self.accepts_trace(&trace)
    }

    /// Layer-wise sets of vectors any run can produce, ignoring which
    /// combinations co-occur in one word. `sets[0]` is the embedding range.
    pub fn reachable_value_sets(&self, cap: usize) -> Result<Vec<Vec<RationalVector>>, UhatError> {
        let mut current = Distinct::default();
        for v in self.embedding.vectors() {
            current.insert(v.clone());
        }
        if current.len() > cap {
            return Err(UhatError::Blowup { layer: 0, cap });
        }
        let mut sets = vec![current.items.clone()];
        for (k, layer) in self.layers.iter().enumerate() {
            let mut next = Distinct::default();
            match layer {
                Layer::Relu(l) => {
                    for v in &current.items {
                        next.insert(v.relu_at(l.coord));
                    }
                }
                Layer::Attention(l) => {
                    let zero = RationalVector::zeros(l.input_width());
                    for u in &current.items {
                        for a in current.items.iter().chain(std::iter::once(&zero)) {
                            next.insert(l.c.apply_concat(u, a)?);
                            if next.len() > cap {
                                return Err(UhatError::Blowup { layer: k + 1, cap });
                            }
                        }
                    }
                }
            }
            if next.len() > cap {
                return Err(UhatError::Blowup { layer: k + 1, cap });
            }
            sets.push(next.items.clone());
            current = next;
        }
        Ok(sets)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&ModelFile::from(self)).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, UhatError> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| UhatError::File(e.to_string()))?;
        file.into_model()
    }
}

/// Largest bit length among all values and scores of a run.
pub fn value_bound_report(trace: &UhatTrace) -> u64 {
    trace
        .layers
        .iter()
        .flatten()
        .map(RationalVector::max_bit_length)
        .max()
        .unwrap_or(0)
        .max(trace.score_bits)
}

/// Insertion-ordered set.
#[derive(Default)]
struct Distinct {
    seen: HashSet<RationalVector>,
    items: Vec<RationalVector>,
}

impl Distinct {
    fn insert(&mut self, v: RationalVector) {
        if !self.seen.contains(&v) {
            self.seen.insert(v.clone());
            self.items.push(v);
        }
    }

    fn len(&self) -> usize {
        self.items.len()
    }
}

// ------------------------------------------------------------ file format

/// Matrices are written densely unless most entries are zero.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MatrixFile {
    Dense(Vec<Vec<Rational>>),
    Sparse {
        rows: usize,
        cols: usize,
        entries: Vec<(usize, usize, Rational)>,
    },
}

#[derive(Serialize, Deserialize)]
struct AffineFile {
    matrix: MatrixFile,
    bias: RationalVector,
}

impl From<&AffineMap> for AffineFile {
    fn from(m: &AffineMap) -> Self {
        let (rows, cols) = (m.output_width(), m.input_width());
        let matrix = if rows * cols <= 64 || m.nonzeros() * 4 > rows * cols {
            MatrixFile::Dense(m.to_dense())
        } else {
            let entries = (0..rows)
                .flat_map(|r| m.row(r).iter().map(move |(c, x)| (r, *c, x.clone())))
                .collect();
            MatrixFile::Sparse { rows, cols, entries }
        };
        AffineFile { matrix, bias: m.bias().clone() }
    }
}

impl AffineFile {
    fn into_map(self, cols_hint: usize) -> Result<AffineMap, NumericError> {
        match self.matrix {
            MatrixFile::Dense(m) if m.is_empty() => Ok(AffineMap::zero(0, cols_hint)),
            MatrixFile::Dense(m) => AffineMap::from_dense(m, self.bias),
            MatrixFile::Sparse { rows, cols, entries } => AffineMap::from_entries(rows, cols, entries, self.bias),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind")]
enum LayerFile {
    #[serde(rename = "attn")]
    Attn {
        #[serde(rename = "A")]
        a: AffineFile,
        #[serde(rename = "B")]
        b: AffineFile,
        #[serde(rename = "C")]
        c: AffineFile,
        mask: Mask,
        tie: Tie,
    },
    /// `coord` is 1-based in files.
    #[serde(rename = "relu")]
    Relu { coord: usize },
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    alphabet: Alphabet,
    embedding: BTreeMap<String, RationalVector>,
    layers: Vec<LayerFile>,
    accept: RationalVector,
    output_position: OutputPosition,
}

impl From<&Uhat> for ModelFile {
    fn from(m: &Uhat) -> Self {
        let alphabet = m.alphabet().clone();
        let embedding = alphabet
            .symbols()
            .iter()
            .zip(m.embedding.vectors())
            .map(|(s, v)| (s.clone(), v.clone()))
            .collect();
        let layers = m
            .layers
            .iter()
            .map(|l| match l {
                Layer::Attention(l) => LayerFile::Attn {
                    a: (&l.a).into(),
                    b: (&l.b).into(),
                    c: (&l.c).into(),
                    mask: l.mask,
                    tie: l.tie,
                },
                Layer::Relu(l) => LayerFile::Relu { coord: l.coord + 1 },
            })
            .collect();
        ModelFile {
            alphabet,
            embedding,
            layers,
            accept: m.accept.clone(),
            output_position: m.output,
        }
    }
}

impl ModelFile {
    fn into_model(mut self) -> Result<Uhat, UhatError> {
        let mut vectors = Vec::with_capacity(self.alphabet.len());
        for s in self.alphabet.symbols() {
            let v = self
                .embedding
                .remove(s)
                .ok_or_else(|| UhatError::Embedding(format!("no vector for symbol {s:?}")))?;
            vectors.push(v);
        }
        if let Some(extra) = self.embedding.keys().next() {
            return Err(UhatError::Embedding(format!("symbol {extra:?} is not in the alphabet")));
        }
        let embedding = TokenEmbedding::new(self.alphabet, vectors)?;
        let mut width = embedding.width();
        let mut layers = Vec::with_capacity(self.layers.len());
        for (k, l) in self.layers.into_iter().enumerate() {
            let err = |e: NumericError| UhatError::Model { layer: k + 1, msg: e.to_string() };
            let layer = match l {
                LayerFile::Attn { a, b, c, mask, tie } => Layer::Attention(AttentionLayer {
                    a: a.into_map(width).map_err(err)?,
                    b: b.into_map(width).map_err(err)?,
                    c: c.into_map(2 * width).map_err(err)?,
                    mask,
                    tie,
                }),
                LayerFile::Relu { coord } => {
                    if coord == 0 {
                        return Err(UhatError::Model { layer: k + 1, msg: "ReLU coordinates start at 1".into() });
                    }
                    Layer::Relu(ReluLayer { coord: coord - 1 })
                }
            };
            width = layer.output_width(width);
            layers.push(layer);
        }
        Uhat::new(embedding, layers, self.accept, self.output_position)
    }
}

impl fmt::Display for Uhat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let widths = self.widths();
        writeln!(f, "UHAT over {:?}, output {}", self.alphabet().symbols(), self.output)?;
        writeln!(f, "  embedding width {}", widths[0])?;
        for (k, layer) in self.layers.iter().enumerate() {
            match layer {
                Layer::Attention(l) => writeln!(
                    f,
                    "  layer {}: attention {:?}/{:?} {} -> {}",
                    k + 1,
                    l.mask,
                    l.tie,
                    widths[k],
                    widths[k + 1]
                )?,
                Layer::Relu(l) => writeln!(f, "  layer {}: relu on coordinate {}", k + 1, l.coord + 1)?,
            }
        }
        write!(f, "  accept {}", self.accept)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"]).unwrap()
    }

    fn scalar_model(ea: &str, eb: &str, layers: Vec<Layer>, t: &str) -> Uhat {
        let emb = TokenEmbedding::new(ab(), vec![RationalVector::new(vec![q(ea)]), RationalVector::new(vec![q(eb)])]).unwrap();
        Uhat::new(emb, layers, RationalVector::new(vec![q(t)]), OutputPosition::Last).unwrap()
    }

    #[test]
    fn embedding_only_trace() {
        let m = Uhat::new(TokenEmbedding::one_hot(ab()), vec![], RationalVector::from_ints(&[1, 0]), OutputPosition::Last).unwrap();
        let t = m.simulate(&[0, 1]).unwrap();
        assert_eq!(t.last(), &[RationalVector::from_ints(&[1, 0]), RationalVector::from_ints(&[0, 1])]);
        assert_eq!(value_bound_report(&t), 1);
        assert!(!m.accepts(&[0, 1]).unwrap());
        assert!(m.accepts(&[1, 0]).unwrap());
        assert!(m.simulate(&[]).is_err());
        assert!(m.simulate(&[2]).is_err());
    }

    #[test]
    fn strict_acceptance() {
        assert!(!scalar_model("1", "1", vec![], "0").accepts(&[0]).unwrap());
        assert!(scalar_model("1", "1", vec![], "1").accepts(&[0]).unwrap());
        assert!(!scalar_model("1/2", "1/2", vec![], "-1").accepts(&[1]).unwrap());
    }

    /// C(v, a) = a on width 1.
    fn copy_attention(mask: Mask, tie: Tie) -> Layer {
        Layer::Attention(AttentionLayer {
            a: AffineMap::identity(1),
            b: AffineMap::identity(1),
            c: AffineMap::from_dense(vec![vec![q("0"), q("1")]], RationalVector::zeros(1)).unwrap(),
            mask,
            tie,
        })
    }

    #[test]
    fn future_mask_first_position_gets_zero_vector() {
        let m = scalar_model("3", "5", vec![copy_attention(Mask::Future, Tie::Leftmost)], "1");
        let t = m.simulate(&[1, 0, 1]).unwrap();
        assert_eq!(t.chosen[0].as_ref().unwrap()[0], None);
        assert!(t.last()[0][0].is_zero());
    }

    #[test]
    fn equality_layer_example() {
        let width = 4;
        let proj = AffineMap::identity(width);
        let c = AffineMap::from_entries(width, 2 * width, (0..width).map(|k| (k, k, Rational::one())), RationalVector::zeros(width)).unwrap();
        let layer = AttentionLayer { a: proj.clone(), b: proj, c, mask: Mask::None, tie: Tie::Rightmost };
        let seq = vec![
            RationalVector::from_ints(&[1, 0, 0, 1]),
            RationalVector::from_ints(&[0, 1, 1, 0]),
            RationalVector::from_ints(&[1, 0, 0, 1]),
        ];
        let out = layer.apply(&seq).unwrap();
        assert_eq!(out.chosen[0], Some(2));
    }

    #[test]
    fn relu_and_sets() {
        let relu = Layer::Relu(ReluLayer { coord: 0 });
        let m = scalar_model("-1", "2", vec![relu.clone()], "1");
        let t = m.simulate(&[0, 1]).unwrap();
        assert_eq!(t.last()[0], RationalVector::from_ints(&[0]));
        let sets = m.reachable_value_sets(10).unwrap();
        assert_eq!(sets[0].len(), 2);
        assert_eq!(sets[1], vec![RationalVector::from_ints(&[0]), RationalVector::from_ints(&[2])]);
    }

    #[test]
    fn reachable_sum_layer() {
        let sum = Layer::Attention(AttentionLayer {
            a: AffineMap::identity(1),
            b: AffineMap::identity(1),
            c: AffineMap::from_dense(vec![vec![q("1"), q("1")]], RationalVector::zeros(1)).unwrap(),
            mask: Mask::None,
            tie: Tie::Leftmost,
        });
        let m = scalar_model("0", "1", vec![sum.clone(), sum], "1");
        let sets = m.reachable_value_sets(100).unwrap();
        for v in [0, 1, 2] {
            assert!(sets[1].contains(&RationalVector::from_ints(&[v])));
        }
        assert!(matches!(m.reachable_value_sets(3), Err(UhatError::Blowup { layer: 2, cap: 3 })));
    }

    #[test]
    fn width_errors() {
        let emb = TokenEmbedding::one_hot(ab());
        let bad = Layer::Attention(AttentionLayer {
            a: AffineMap::identity(2),
            b: AffineMap::identity(3),
            c: AffineMap::zero(1, 4),
            mask: Mask::None,
            tie: Tie::Leftmost,
        });
        assert!(matches!(
            Uhat::new(emb.clone(), vec![bad], RationalVector::zeros(1), OutputPosition::Last),
            Err(UhatError::Model { layer: 1, .. })
        ));
        assert!(Uhat::new(emb, vec![], RationalVector::zeros(3), OutputPosition::Last).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = scalar_model("1/2", "-3", vec![copy_attention(Mask::Past, Tie::Rightmost), Layer::Relu(ReluLayer { coord: 0 })], "7/8");
        let text = m.to_json();
        assert!(text.contains("\"coord\": 1"));
        assert_eq!(Uhat::from_json(&text).unwrap(), m);
        let wide = Uhat::new(
            TokenEmbedding::one_hot(Alphabet::new((0..12).map(|k| format!("s{k}"))).unwrap()),
            vec![Layer::Attention(AttentionLayer {
                a: AffineMap::identity(12),
                b: AffineMap::zero(12, 12),
                c: AffineMap::identity(24),
                mask: Mask::None,
                tie: Tie::Leftmost,
            })],
            RationalVector::zeros(24),
            OutputPosition::First,
        )
        .unwrap();
        let text = wide.to_json();
        assert!(text.contains("entries"));
        assert_eq!(Uhat::from_json(&text).unwrap(), wide);
    }
}
