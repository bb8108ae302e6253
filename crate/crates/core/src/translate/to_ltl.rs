use std::collections::HashMap;

use crate::lang::Mask;
use crate::ltl::{Ltl, LtlModel};
use crate::numeric::{dot, Rational, RationalVector};
use crate::uhat::{AttentionLayer, Layer, Tie, Uhat};

use super::TranslateError;

/// Per-layer value sets with one formula per value: `formulas[ℓ][k]` holds
/// at a position exactly when layer ℓ outputs `sets[ℓ][k]` there.
#[derive(Clone, Debug)]
pub struct UhatToLtl {
    pub model: LtlModel,
    pub sets: Vec<Vec<RationalVector>>,
    pub formulas: Vec<Vec<Ltl>>,
}

/// Disjunctions of value formulas grouped by score, for one query value.
struct ScoreBands {
    levels: Vec<Rational>,
    below: Vec<Ltl>,
    above: Vec<Ltl>,
    at_least: Vec<Ltl>,
}

impl ScoreBands {
    fn new(scores: &[Rational], formulas: &[Ltl]) -> Self {
        let mut levels: Vec<Rational> = scores.to_vec();
        levels.sort();
        levels.dedup();
        let mut groups: Vec<Vec<Ltl>> = vec![Vec::new(); levels.len()];
        for (s, f) in scores.iter().zip(formulas) {
            let k = levels.binary_search(s).expect("score is a level");
            groups[k].push(f.clone());
        }
        let groups: Vec<Ltl> = groups.into_iter().map(Ltl::any).collect();
        let n = levels.len();
        let mut below = Vec::with_capacity(n);
        let mut acc = Ltl::bottom();
        for g in &groups {
            below.push(acc.clone());
            acc = Ltl::or_s(acc, g.clone());
        }
        let mut above = vec![Ltl::bottom(); n];
        let mut at_least = vec![Ltl::bottom(); n];
        let mut acc = Ltl::bottom();
        for k in (0..n).rev() {
            above[k] = acc.clone();
            acc = Ltl::or_s(acc, groups[k].clone());
            at_least[k] = acc.clone();
        }
        ScoreBands { levels, below, above, at_least }
    }

    fn level(&self, s: &Rational) -> usize {
        self.levels.binary_search(s).expect("score is a level")
    }
}

fn ignores_attended(layer: &AttentionLayer) -> bool {
    let r = layer.input_width();
    (0..layer.c.output_width()).all(|row| layer.c.row(row).iter().all(|(c, _)| *c < r))
}

/// Formula for "the attended position carries a value from the group
/// `phi_a`, whose score against the query is at level `k`".
fn attended(layer: &AttentionLayer, bands: &ScoreBands, k: usize, phi_a: Ltl, self_level: usize) -> Ltl {
    let past = Ltl::past;
    let future = Ltl::future;
    let not = Ltl::not_s;
    let and = |xs: Vec<Ltl>| Ltl::all(xs);
    let (below, above, at_least) = (&bands.below[k], &bands.above[k], &bands.at_least[k]);
    match (layer.mask, layer.tie) {
        (Mask::Future, Tie::Rightmost) => Ltl::since_s(below.clone(), and(vec![phi_a, not(past(above.clone()))])),
        (Mask::Future, Tie::Leftmost) => and(vec![
            past(and(vec![phi_a, not(past(at_least.clone()))])),
            not(past(above.clone())),
        ]),
        (Mask::Past, Tie::Leftmost) => Ltl::until_s(below.clone(), and(vec![phi_a, not(future(above.clone()))])),
        (Mask::Past, Tie::Rightmost) => and(vec![
            future(and(vec![phi_a, not(future(at_least.clone()))])),
            not(future(above.clone())),
        ]),
        (Mask::None, tie) => {
            // the attended position lies strictly left or strictly right of
            // the query; the query itself is handled by the caller
            let (left_ok, right_ok) = match tie {
                Tie::Rightmost => (k > self_level, k >= self_level),
                Tie::Leftmost => (k >= self_level, k > self_level),
            };
            let mut cases = Vec::new();
            if left_ok {
                let left = match tie {
                    Tie::Rightmost => and(vec![
                        not(future(at_least.clone())),
                        Ltl::since_s(below.clone(), and(vec![phi_a.clone(), not(past(above.clone()))])),
                    ]),
                    Tie::Leftmost => and(vec![
                        not(future(above.clone())),
                        past(and(vec![phi_a.clone(), not(past(at_least.clone()))])),
                        not(past(above.clone())),
                    ]),
                };
                cases.push(left);
            }
            if right_ok {
                let right = match tie {
                    Tie::Rightmost => and(vec![
                        not(past(above.clone())),
                        future(and(vec![phi_a.clone(), not(future(at_least.clone()))])),
                        not(future(above.clone())),
                    ]),
                    Tie::Leftmost => and(vec![
                        not(past(at_least.clone())),
                        Ltl::until_s(below.clone(), and(vec![phi_a, not(future(above.clone()))])),
                    ]),
                };
                cases.push(right);
            }
            Ltl::any(cases)
        }
    }
}

fn attention_formulas(
    layer: &AttentionLayer,
    values: &[RationalVector],
    formulas: &[Ltl],
    out_index: &mut HashMap<RationalVector, usize>,
    out_sets: &mut Vec<RationalVector>,
) -> Result<Vec<Vec<Ltl>>, TranslateError> {
    let zero = RationalVector::zeros(layer.input_width());
    let mut parts: Vec<Vec<Ltl>> = Vec::new();
    let mut slot = |v: RationalVector, out_index: &mut HashMap<RationalVector, usize>, parts: &mut Vec<Vec<Ltl>>| {
        let next = out_sets.len();
        let k = *out_index.entry(v.clone()).or_insert(next);
        if k == next {
            out_sets.push(v);
            parts.push(Vec::new());
        }
        k
    };
    if ignores_attended(layer) {
        // the output is a function of the query value alone
        for (u, phi_u) in values.iter().zip(formulas) {
            let k = slot(layer.c.apply_concat(u, &zero)?, out_index, &mut parts);
            parts[k].push(phi_u.clone());
        }
        return Ok(parts);
    }
    let queries = values.iter().map(|u| layer.a.apply(u)).collect::<Result<Vec<_>, _>>()?;
    let keys = values.iter().map(|b| layer.b.apply(b)).collect::<Result<Vec<_>, _>>()?;
    for (ui, (u, phi_u)) in values.iter().zip(formulas).enumerate() {
        let scores = keys.iter().map(|k| dot(&queries[ui], k)).collect::<Result<Vec<_>, _>>()?;
        let bands = ScoreBands::new(&scores, formulas);
        let self_level = bands.level(&scores[ui]);
        // group attended values by (output, score level)
        let mut groups: Vec<((usize, usize), Vec<Ltl>)> = Vec::new();
        let mut group_of: HashMap<(usize, usize), usize> = HashMap::new();
        for (ai, a) in values.iter().enumerate() {
            let v = slot(layer.c.apply_concat(u, a)?, out_index, &mut parts);
            let key = (v, bands.level(&scores[ai]));
            let g = *group_of.entry(key).or_insert_with(|| {
                groups.push((key, Vec::new()));
                groups.len() - 1
            });
            groups[g].1.push(formulas[ai].clone());
        }
        for ((v, level), phis) in groups {
            let located = attended(layer, &bands, level, Ltl::any(phis), self_level);
            parts[v].push(Ltl::and_s(phi_u.clone(), located));
        }
        match layer.mask {
            Mask::None => {
                // attending to the query position itself
                let v = slot(layer.c.apply_concat(u, u)?, out_index, &mut parts);
                let (before, after) = match layer.tie {
                    Tie::Rightmost => (&bands.above[self_level], &bands.at_least[self_level]),
                    Tie::Leftmost => (&bands.at_least[self_level], &bands.above[self_level]),
                };
                parts[v].push(Ltl::all([
                    phi_u.clone(),
                    Ltl::not_s(Ltl::past(before.clone())),
                    Ltl::not_s(Ltl::future(after.clone())),
                ]));
            }
            Mask::Future | Mask::Past => {
                // no unmasked position: the attention vector is zero
                let v = slot(layer.c.apply_concat(u, &zero)?, out_index, &mut parts);
                let edge = match layer.mask {
                    Mask::Future => Ltl::past(Ltl::top()),
                    _ => Ltl::future(Ltl::top()),
                };
                parts[v].push(Ltl::and_s(Ltl::not(edge), phi_u.clone()));
            }
        }
    }
    Ok(parts)
}

/// Builds an equivalent formula by tracking, layer by layer, which value
/// each position holds. Value sets are the reachable sets of
/// [`Uhat::reachable_value_sets`], bounded by `cap`.
pub fn uhat_to_ltl(uhat: &Uhat, cap: usize) -> Result<UhatToLtl, TranslateError> {
    // fail early with the layer that blows up
    uhat.reachable_value_sets(cap)?;
    let emb = uhat.embedding();
    let mut values: Vec<RationalVector> = Vec::new();
    let mut formulas: Vec<Vec<Ltl>> = Vec::new();
    for (s, v) in emb.vectors().iter().enumerate() {
        match values.iter().position(|x| x == v) {
            Some(k) => formulas[k].push(Ltl::atom(s)),
            None => {
                values.push(v.clone());
                formulas.push(vec![Ltl::atom(s)]);
            }
        }
    }
    let mut current: Vec<Ltl> = formulas.into_iter().map(Ltl::any).collect();
    let mut all_sets = vec![values.clone()];
    let mut all_formulas = vec![current.clone()];
    for layer in uhat.layers() {
        let mut index = HashMap::new();
        let mut next_values = Vec::new();
        let parts = match layer {
            Layer::Relu(l) => {
                let mut parts: Vec<Vec<Ltl>> = Vec::new();
                for (u, phi) in values.iter().zip(&current) {
                    let v = u.relu_at(l.coord);
                    let k = *index.entry(v.clone()).or_insert_with(|| {
                        next_values.push(v);
                        parts.push(Vec::new());
                        parts.len() - 1
                    });
                    parts[k].push(phi.clone());
                }
                parts
            }
            Layer::Attention(l) => attention_formulas(l, &values, &current, &mut index, &mut next_values)?,
        };
        values = next_values;
        current = parts.into_iter().map(Ltl::any).collect();
        all_sets.push(values.clone());
        all_formulas.push(current.clone());
    }
    let mut accepting = Vec::new();
    for (v, phi) in values.iter().zip(&current) {
        if dot(uhat.accept(), v)?.is_positive() {
            accepting.push(phi.clone());
        }
    }
    let model = LtlModel {
        alphabet: uhat.alphabet().clone(),
        output: uhat.output(),
        formula: Ltl::any(accepting),
    };
    Ok(UhatToLtl {
        model,
        sets: all_sets,
        formulas: all_formulas,
    })
}
