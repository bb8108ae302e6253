//! wasm bindings for the demo page in `www/`. Every export takes source text
//! and returns a JSON string; errors come back as plain messages.

use hardattn::brasp::parse_brasp;
use hardattn::ltl::LtlModel;
use hardattn::numeric::Rational;
use hardattn::tiling::{compile_tiling_to_brasp, encode_grid, search_tiling, verify_tiling, TilingGrid, TilingInstance};
use hardattn::translate::ltl_to_uhat;
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize, Debug)]
pub struct TraceView {
    pub symbols: Vec<String>,
    pub names: Vec<String>,
    pub rows: Vec<Vec<bool>>,
    pub output: String,
    pub accepted: bool,
}

#[derive(Serialize, Debug)]
pub struct CompileView {
    pub formula: String,
    pub formula_nodes: usize,
    pub layers: usize,
    pub max_width: usize,
    pub symbols: Vec<String>,
    /// truth of the formula at each position
    pub formula_truth: Vec<bool>,
    /// the root component of the compiled model at each position
    pub model_truth: Vec<bool>,
    pub accepted: bool,
}

#[derive(Serialize, Debug)]
pub struct TilingView {
    pub valid: Option<bool>,
    pub encoding: Option<String>,
    pub program_accepts: Option<bool>,
    pub found: Option<String>,
    pub found_encoding: Option<String>,
    pub program_size: usize,
}

fn msg<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("view types serialize")
}

pub fn trace_view(program: &str, word: &str) -> Result<TraceView, String> {
    let p = parse_brasp(program).map_err(msg)?;
    let w = p.alphabet().parse_word(word).map_err(msg)?;
    let trace = p.eval(&w).map_err(msg)?;
    Ok(TraceView {
        symbols: w.iter().map(|&s| p.alphabet().symbol(s).to_string()).collect(),
        names: trace.names.clone(),
        rows: trace.vectors.clone(),
        output: p.vector_name(p.output()),
        accepted: p.accepts(&w).map_err(msg)?,
    })
}

pub fn compile_view(model: &str, word: &str) -> Result<CompileView, String> {
    let m = LtlModel::parse(model).map_err(msg)?;
    let w = m.alphabet.parse_word(word).map_err(msg)?;
    let t = ltl_to_uhat(&m.formula, &m.alphabet, m.output);
    let sim = t.uhat.simulate(&w).map_err(msg)?;
    let last = sim.layers.len() - 1;
    let formula = m.formula.display(&m.alphabet).to_string();
    Ok(CompileView {
        formula,
        formula_nodes: m.formula.node_count(),
        layers: t.uhat.layers().len(),
        max_width: t.uhat.widths().into_iter().max().unwrap_or(0),
        symbols: w.iter().map(|&s| m.alphabet.symbol(s).to_string()).collect(),
        formula_truth: m.formula.eval_all(&w),
        model_truth: sim.component(last, t.root).into_iter().map(|v| v == Rational::from(1)).collect(),
        accepted: t.uhat.accepts(&w).map_err(msg)?,
    })
}

/// Checks `grid` when it is non-empty, otherwise searches up to `max_rows`.
pub fn tiling_view(instance: &str, grid: &str, max_rows: usize) -> Result<TilingView, String> {
    let inst = TilingInstance::parse(instance).map_err(msg)?;
    let program = compile_tiling_to_brasp(&inst);
    let alphabet = inst.alphabet();
    let mut view = TilingView {
        valid: None,
        encoding: None,
        program_accepts: None,
        found: None,
        found_encoding: None,
        program_size: program.vector_count(),
    };
    if grid.trim().is_empty() {
        if let Some(g) = search_tiling(&inst, max_rows) {
            let w = encode_grid(&inst, &g).map_err(msg)?;
            view.found = Some(g.render(&inst));
            view.found_encoding = Some(alphabet.render(&w));
            view.program_accepts = Some(program.accepts(&w).map_err(msg)?);
        }
    } else {
        let g = TilingGrid::parse(grid, &inst).map_err(msg)?;
        let w = encode_grid(&inst, &g).map_err(msg)?;
        view.valid = Some(verify_tiling(&inst, &g).map_err(msg)?);
        view.encoding = Some(alphabet.render(&w));
        view.program_accepts = Some(program.accepts(&w).map_err(msg)?);
    }
    Ok(view)
}

#[wasm_bindgen]
pub fn brasp_trace(program: &str, word: &str) -> Result<String, String> {
    trace_view(program, word).map(|v| json(&v))
}

#[wasm_bindgen]
pub fn ltl_compile(model: &str, word: &str) -> Result<String, String> {
    compile_view(model, word).map(|v| json(&v))
}

#[wasm_bindgen]
pub fn tiling_check(instance: &str, grid: &str, max_rows: usize) -> Result<String, String> {
    tiling_view(instance, grid, max_rows).map(|v| json(&v))
}
