//! Bounded searches over word spaces: emptiness, shortest witnesses,
//! equivalence and mutation testing.
//!
//! Words are enumerated shortest first, then lexicographically by the
//! alphabet's declaration order, starting at length 1.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::brasp::{BraspError, BraspProgram};
use crate::lang::{count_words, Alphabet, Word, WordError, Words};
use crate::ltl::{LtlError, LtlModel};
use crate::uhat::{Uhat, UhatError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("alphabets differ: {0:?} vs {1:?}")]
    AlphabetMismatch(Vec<String>, Vec<String>),
    #[error("the word to mutate is empty")]
    EmptyWord,
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Brasp(#[from] BraspError),
    #[error(transparent)]
    Uhat(#[from] UhatError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
}

/// Any of the three acceptor kinds behind one interface.
#[derive(Clone, Debug)]
pub enum Acceptor {
    Brasp(BraspProgram),
    Uhat(Uhat),
    Ltl(LtlModel),
}

impl Acceptor {
    pub fn kind(&self) -> &'static str {
        match self {
            Acceptor::Brasp(_) => "brasp",
            Acceptor::Uhat(_) => "uhat",
            Acceptor::Ltl(_) => "ltl",
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Acceptor::Brasp(p) => p.alphabet(),
            Acceptor::Uhat(u) => u.alphabet(),
            Acceptor::Ltl(m) => &m.alphabet,
        }
    }

    pub fn accepts(&self, word: &[usize]) -> Result<bool, AnalysisError> {
        Ok(match self {
            Acceptor::Brasp(p) => p.accepts(word)?,
            Acceptor::Uhat(u) => u.accepts(word)?,
            Acceptor::Ltl(m) => m.accepts(word)?,
        })
    }
}

impl From<BraspProgram> for Acceptor {
    fn from(p: BraspProgram) -> Self {
        Acceptor::Brasp(p)
    }
}

impl From<Uhat> for Acceptor {
    fn from(u: Uhat) -> Self {
        Acceptor::Uhat(u)
    }
}

impl From<LtlModel> for Acceptor {
    fn from(m: LtlModel) -> Self {
        Acceptor::Ltl(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Witness(Word),
    Exhausted(usize),
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub outcome: Outcome,
    /// words tested in enumeration order up to and including the witness
    pub examined: u128,
    pub elapsed: Duration,
}

impl SearchReport {
    pub fn witness(&self) -> Option<&Word> {
        match &self.outcome {
            Outcome::Witness(w) => Some(w),
            Outcome::Exhausted(_) => None,
        }
    }

    /// `key: value` lines. Wall time is left out unless `timing` is set so
    /// that reports are reproducible.
    pub fn to_text(&self, alphabet: &Alphabet, timing: bool) -> String {
        let mut out = String::new();
        match &self.outcome {
            Outcome::Witness(w) => {
                out += "outcome: witness\n";
                out += &format!("word: {}\nlength: {}\n", alphabet.render(w), w.len());
            }
            Outcome::Exhausted(n) => out += &format!("outcome: exhausted\nmax_len: {n}\n"),
        }
        out += &format!("examined: {}\n", self.examined);
        if timing {
            out += &format!("elapsed_ms: {}\n", self.elapsed.as_millis());
        }
        out
    }

    /// One JSON object on a single line.
    pub fn to_record(&self, alphabet: &Alphabet, timing: bool) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            outcome: &'a str,
            #[serde(skip_serializing_if = "Option::is_none")]
            word: Option<String>,
            #[serde(skip_serializing_if = "Option::is_none")]
            length: Option<usize>,
            #[serde(skip_serializing_if = "Option::is_none")]
            max_len: Option<usize>,
            examined: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            elapsed_ms: Option<u128>,
        }
        let (outcome, word, length, max_len) = match &self.outcome {
            Outcome::Witness(w) => ("witness", Some(alphabet.render(w)), Some(w.len()), None),
            Outcome::Exhausted(n) => ("exhausted", None, None, Some(*n)),
        };
        let rec = Record {
            outcome,
            word,
            length,
            max_len,
            examined: self.examined.to_string(),
            elapsed_ms: timing.then(|| self.elapsed.as_millis()),
        };
        serde_json::to_string(&rec).expect("record serializes")
    }
}

/// Position of `word` in the enumeration order, counting from 1.
fn rank(k: usize, word: &[usize]) -> u128 {
    let within = word.iter().fold(0u128, |acc, &s| acc * k as u128 + s as u128);
    count_words(k, word.len() - 1) + within + 1
}

/// First accepted word of length at most `max_len`, scanning sequentially.
pub fn bounded_emptiness(a: &Acceptor, max_len: usize) -> Result<SearchReport, AnalysisError> {
    let start = Instant::now();
    let k = a.alphabet().len();
    let mut examined = 0u128;
    for w in Words::new(k, max_len) {
        examined += 1;
        if a.accepts(&w)? {
            return Ok(SearchReport { outcome: Outcome::Witness(w), examined, elapsed: start.elapsed() });
        }
    }
    Ok(SearchReport { outcome: Outcome::Exhausted(max_len), examined, elapsed: start.elapsed() })
}

/// Same result as [`bounded_emptiness`], with each length split by first
/// symbol across `workers` threads. The smallest first symbol with a
/// witness wins, so the outcome does not depend on scheduling.
pub fn bounded_emptiness_parallel(a: &Acceptor, max_len: usize, workers: usize) -> Result<SearchReport, AnalysisError> {
    let start = Instant::now();
    let k = a.alphabet().len();
    let workers = workers.max(1);
    for len in 1..=max_len {
        let found = first_with_prefix_split(k, len, workers, &|w| a.accepts(w))?;
        if let Some(w) = found {
            let examined = rank(k, &w);
            return Ok(SearchReport { outcome: Outcome::Witness(w), examined, elapsed: start.elapsed() });
        }
    }
    Ok(SearchReport {
        outcome: Outcome::Exhausted(max_len),
        examined: count_words(k, max_len),
        elapsed: start.elapsed(),
    })
}

type Pred<'a> = dyn Fn(&[usize]) -> Result<bool, AnalysisError> + Sync + 'a;

/// Lexicographically first word of length `len` satisfying `pred`.
fn first_with_prefix_split(k: usize, len: usize, workers: usize, pred: &Pred) -> Result<Option<Word>, AnalysisError> {
    if k == 0 {
        return Ok(None);
    }
    let next_symbol = AtomicUsize::new(0);
    // smallest first symbol known to have a witness; blocks beyond it are skipped
    let best = AtomicUsize::new(usize::MAX);
    let results: Vec<Result<Vec<(usize, Word)>, AnalysisError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers.min(k))
            .map(|_| {
                scope.spawn(|| {
                    let mut hits = Vec::new();
                    loop {
                        let s = next_symbol.fetch_add(1, Ordering::SeqCst);
                        if s >= k || s > best.load(Ordering::SeqCst) {
                            return Ok(hits);
                        }
                        for w in Words::with_prefix(k, &[s], len) {
                            if s > best.load(Ordering::SeqCst) {
                                break;
                            }
                            if pred(&w)? {
                                best.fetch_min(s, Ordering::SeqCst);
                                hits.push((s, w));
                                break;
                            }
                        }
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut hits = Vec::new();
    for r in results {
        hits.extend(r?);
    }
    Ok(hits.into_iter().min_by_key(|(s, _)| *s).map(|(_, w)| w))
}

pub fn min_witness(a: &Acceptor, max_len: usize) -> Result<Option<Word>, AnalysisError> {
    Ok(bounded_emptiness(a, max_len)?.witness().cloned())
}

fn same_alphabet(a1: &Acceptor, a2: &Acceptor) -> Result<(), AnalysisError> {
    if a1.alphabet() != a2.alphabet() {
        return Err(AnalysisError::AlphabetMismatch(
            a1.alphabet().symbols().to_vec(),
            a2.alphabet().symbols().to_vec(),
        ));
    }
    Ok(())
}

/// First word of length at most `max_len` accepted by exactly one of the two.
pub fn bounded_equivalence(a1: &Acceptor, a2: &Acceptor, max_len: usize) -> Result<Option<Word>, AnalysisError> {
    same_alphabet(a1, a2)?;
    for w in Words::new(a1.alphabet().len(), max_len) {
        if a1.accepts(&w)? != a2.accepts(&w)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

pub fn bounded_equivalence_parallel(
    a1: &Acceptor,
    a2: &Acceptor,
    max_len: usize,
    workers: usize,
) -> Result<Option<Word>, AnalysisError> {
    same_alphabet(a1, a2)?;
    let k = a1.alphabet().len();
    for len in 1..=max_len {
        let differs = |w: &[usize]| Ok(a1.accepts(w)? != a2.accepts(w)?);
        if let Some(w) = first_with_prefix_split(k, len, workers.max(1), &differs)? {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mutant {
    pub position: usize,
    pub from: usize,
    pub to: usize,
    pub accepted: bool,
}

impl Mutant {
    pub fn apply(&self, word: &[usize]) -> Word {
        let mut w = word.to_vec();
        w[self.position] = self.to;
        w
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MutationReport {
    pub original_accepted: bool,
    pub trials: usize,
    pub rejected: usize,
    pub mutants: Vec<Mutant>,
}

impl MutationReport {
    pub fn accepting(&self) -> impl Iterator<Item = &Mutant> {
        self.mutants.iter().filter(|m| m.accepted)
    }

    pub fn to_text(&self, alphabet: &Alphabet, word: &[usize]) -> String {
        let mut out = format!(
            "operator: single-position substitution\noriginal: {}\ntrials: {}\nrejected: {}\naccepted: {}\n",
            if self.original_accepted { "accept" } else { "reject" },
            self.trials,
            self.rejected,
            self.trials - self.rejected,
        );
        for m in self.accepting() {
            out += &format!(
                "accepting_mutant: position={} {}->{} word={}\n",
                m.position,
                alphabet.symbol(m.from),
                alphabet.symbol(m.to),
                alphabet.render(&m.apply(word))
            );
        }
        out
    }

    pub fn to_records(&self, alphabet: &Alphabet) -> String {
        #[derive(Serialize)]
        struct Summary {
            operator: &'static str,
            original_accepted: bool,
            trials: usize,
            rejected: usize,
        }
        #[derive(Serialize)]
        struct Line<'a> {
            position: usize,
            from: &'a str,
            to: &'a str,
            accepted: bool,
        }
        let mut out = serde_json::to_string(&Summary {
            operator: "substitution",
            original_accepted: self.original_accepted,
            trials: self.trials,
            rejected: self.rejected,
        })
        .expect("record serializes");
        out.push('\n');
        for m in &self.mutants {
            let line = Line { position: m.position, from: alphabet.symbol(m.from), to: alphabet.symbol(m.to), accepted: m.accepted };
            out += &serde_json::to_string(&line).expect("record serializes");
            out.push('\n');
        }
        out
    }
}

/// Applies `trials` single-position substitutions drawn from a ChaCha8
/// stream seeded with `seed`. Each mutant differs from `word` in exactly
/// one position; with a one-symbol alphabet there are none.
pub fn mutation_test(a: &Acceptor, word: &[usize], trials: usize, seed: u64) -> Result<MutationReport, AnalysisError> {
    if word.is_empty() {
        return Err(AnalysisError::EmptyWord);
    }
    a.alphabet().check(word)?;
    let k = a.alphabet().len();
    let original_accepted = a.accepts(word)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mutants = Vec::with_capacity(trials);
    if k > 1 {
        for _ in 0..trials {
            let position = rng.gen_range(0..word.len());
            let from = word[position];
            let mut to = rng.gen_range(0..k - 1);
            if to >= from {
                to += 1;
            }
            let mut m = Mutant { position, from, to, accepted: false };
            m.accepted = a.accepts(&m.apply(word))?;
            mutants.push(m);
        }
    }
    let rejected = mutants.iter().filter(|m| !m.accepted).count();
    Ok(MutationReport { original_accepted, trials: mutants.len(), rejected, mutants })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::OutputPosition;
    use crate::ltl::parse_ltl;

    fn ltl(text: &str) -> Acceptor {
        let alphabet = Alphabet::new(["a", "b"]).unwrap();
        let formula = parse_ltl(text, &alphabet).unwrap();
        Acceptor::Ltl(LtlModel { alphabet, output: OutputPosition::Last, formula })
    }

    #[test]
    fn false_is_empty() {
        let r = bounded_emptiness(&ltl("false"), 4).unwrap();
        assert_eq!(r.outcome, Outcome::Exhausted(4));
        assert_eq!(r.examined, 30);
    }

    #[test]
    fn witness_for_past_b() {
        // "b" itself fails: P is strict
        let a = ltl("P Q(b)");
        let r = bounded_emptiness(&a, 3).unwrap();
        assert_eq!(r.witness(), Some(&vec![1, 0]));
        assert_eq!(r.examined, 5);
        let p = bounded_emptiness_parallel(&a, 3, 4).unwrap();
        assert_eq!(p.outcome, r.outcome);
        assert_eq!(p.examined, r.examined);
    }

    #[test]
    fn rank_matches_enumeration() {
        for (n, w) in Words::new(3, 4).enumerate() {
            assert_eq!(rank(3, &w), n as u128 + 1);
        }
    }

    #[test]
    fn equivalence_finds_smallest_difference() {
        let cex = bounded_equivalence(&ltl("Q(a)"), &ltl("Q(a) | P Q(b)"), 4).unwrap();
        assert_eq!(cex, Some(vec![1, 1]));
        let par = bounded_equivalence_parallel(&ltl("Q(a)"), &ltl("Q(a) | P Q(b)"), 4, 3).unwrap();
        assert_eq!(par, cex);
    }

    #[test]
    fn alphabet_mismatch() {
        let other = Alphabet::new(["a", "c"]).unwrap();
        let b = Acceptor::Ltl(LtlModel { alphabet: other.clone(), output: OutputPosition::Last, formula: parse_ltl("true", &other).unwrap() });
        assert!(matches!(bounded_equivalence(&ltl("true"), &b, 2), Err(AnalysisError::AlphabetMismatch(..))));
    }

    #[test]
    fn mutation_is_seeded() {
        let a = ltl("true");
        let r1 = mutation_test(&a, &[0, 1, 0], 20, 7).unwrap();
        let r2 = mutation_test(&a, &[0, 1, 0], 20, 7).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.rejected, 0);
        assert!(r1.mutants.iter().all(|m| m.from != m.to));
        assert_eq!(mutation_test(&a, &[], 3, 0), Err(AnalysisError::EmptyWord));
    }
}
