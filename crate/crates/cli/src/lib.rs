//! Argument handling for the `hardattn` binary. [`dispatch`] does all the
//! work and returns the exit code with everything that would be printed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hardattn::analysis::{
    bounded_emptiness, bounded_emptiness_parallel, bounded_equivalence, mutation_test, Acceptor, Outcome,
};
use hardattn::brasp::parse_brasp;
use hardattn::lang::{Alphabet, Word};
use hardattn::ltl::LtlModel;
use hardattn::tiling::{
    compile_tiling_to_brasp, encode_grid, make_h_chain, search_tiling, verify_tiling, HChainSpec, TilingGrid,
    TilingInstance,
};
use hardattn::translate::{brasp_to_uhat, ltl_to_uhat, uhat_to_ltl, TranslationReport};
use hardattn::uhat::{Uhat, DEFAULT_CAP};

#[derive(Parser, Debug)]
#[command(name = "hardattn", about = "Hard-attention transformers, B-RASP and LTL as language acceptors")]
struct Cli {
    /// report format
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Records,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Uhat,
    Brasp,
    Ltl,
}

#[derive(Args, Debug)]
struct ModelArg {
    /// model file (.uhat, .brasp or .ltl)
    #[arg(short, long)]
    model: PathBuf,
    /// model kind, overriding the file extension
    #[arg(long, value_enum)]
    kind: Option<Kind>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a model on one word
    Run {
        #[command(flatten)]
        model: ModelArg,
        #[arg(short, long)]
        word: String,
        /// print every intermediate vector
        #[arg(long)]
        trace: bool,
    },
    /// Translate between model kinds
    Translate {
        #[arg(long, value_enum)]
        from: Option<Kind>,
        #[arg(long, value_enum)]
        to: Kind,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// bound on reachable values per layer
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Compile a tiling instance to a B-RASP program
    CompileTiling {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the counter-chain program and list its first words
    Hchain {
        #[arg(short, long, default_value_t = 1)]
        n: u32,
        /// comma-separated payload symbols
        #[arg(long, default_value = "a,b,c")]
        symbols: String,
        /// comma-separated related pairs, each as two symbols joined by '-'
        #[arg(long, default_value = "a-b,b-c,b-a,c-b")]
        pairs: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// how many words of the language to print
        #[arg(long, default_value_t = 3)]
        words: usize,
    },
    /// Search for the first accepted word up to a length
    Empty {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        max_len: usize,
        /// worker threads; 1 scans sequentially
        #[arg(long, default_value_t = 1)]
        workers: usize,
        /// include wall time in the report
        #[arg(long)]
        timing: bool,
    },
    /// Print the shortest accepted word up to a length
    MinWitness {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        max_len: usize,
    },
    /// Compare two models on all words up to a length
    Equiv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum)]
        kind_a: Option<Kind>,
        #[arg(long, value_enum)]
        kind_b: Option<Kind>,
        #[arg(long)]
        max_len: usize,
    },
    /// Run single-symbol substitutions of a word
    Mutate {
        #[command(flatten)]
        model: ModelArg,
        #[arg(short, long)]
        word: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a grid against a tiling instance
    VerifyTiling {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        grid: PathBuf,
    },
    /// Find the lowest valid grid of a tiling instance
    SearchTiling {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_rows: usize,
    },
    /// Per-layer reachable value sets of a UHAT
    Reachable {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
}

/// Subcommand names, in help order.
pub const SUBCOMMANDS: &[&str] = &[
    "run",
    "translate",
    "compile-tiling",
    "hchain",
    "empty",
    "min-witness",
    "equiv",
    "mutate",
    "verify-tiling",
    "search-tiling",
    "reachable",
];

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Res<()> {
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

fn in_file<T, E: std::fmt::Display>(path: &Path, r: Result<T, E>) -> Res<T> {
    r.map_err(|e| Failure(format!("{}: {e}", path.display())))
}

pub fn kind_of(path: &Path, explicit: Option<Kind>) -> Option<Kind> {
    explicit.or_else(|| match path.extension()?.to_str()? {
        "uhat" | "json" => Some(Kind::Uhat),
        "brasp" => Some(Kind::Brasp),
        "ltl" => Some(Kind::Ltl),
        _ => None,
    })
}

fn load(path: &Path, kind: Option<Kind>) -> Res<Acceptor> {
    let kind = kind_of(path, kind)
        .ok_or_else(|| Failure(format!("{}: cannot tell the model kind; pass --kind", path.display())))?;
    let text = read(path)?;
    Ok(match kind {
        Kind::Uhat => Acceptor::Uhat(in_file(path, Uhat::from_json(&text))?),
        Kind::Brasp => Acceptor::Brasp(in_file(path, parse_brasp(&text))?),
        Kind::Ltl => Acceptor::Ltl(in_file(path, LtlModel::parse(&text))?),
    })
}

fn load_instance(path: &Path) -> Res<TilingInstance> {
    in_file(path, TilingInstance::parse(&read(path)?))
}

fn parse_word(alphabet: &Alphabet, text: &str) -> Res<Word> {
    alphabet.parse_word(text).map_err(|e| Failure(format!("word {text:?}: {e}")))
}

fn verdict(b: bool) -> &'static str {
    if b {
        "accept"
    } else {
        "reject"
    }
}

fn json_line(value: serde_json::Value) -> String {
    value.to_string() + "\n"
}

fn run_trace(a: &Acceptor, word: &Word) -> Res<String> {
    let alphabet = a.alphabet();
    let mut out = String::new();
    match a {
        Acceptor::Brasp(p) => out += &p.eval(word)?.table(alphabet, word),
        Acceptor::Uhat(u) => {
            let trace = u.simulate(word)?;
            for (l, seq) in trace.layers.iter().enumerate() {
                let cells: Vec<String> = seq.iter().map(|v| v.to_string()).collect();
                writeln!(out, "layer {l}: {}", cells.join(" ")).unwrap();
            }
        }
        Acceptor::Ltl(m) => {
            let truth: Vec<&str> = m.formula.eval_all(word).into_iter().map(|b| if b { "1" } else { "0" }).collect();
            writeln!(out, "truth: {}", truth.join(" ")).unwrap();
        }
    }
    Ok(out)
}

fn report_text(r: &TranslationReport) -> String {
    let mut out = format!("source: {}\ntarget: {}\n", r.source, r.target);
    for (key, value) in [
        ("layers", r.layers),
        ("attention_layers", r.attention_layers),
        ("max_width", r.max_width),
        ("formula_nodes", r.formula_nodes),
    ] {
        if let Some(v) = value {
            writeln!(out, "{key}: {v}").unwrap();
        }
    }
    for note in &r.notes {
        writeln!(out, "note: {note}").unwrap();
    }
    out
}

fn translate(from: Kind, to: Kind, input: &Path, out: &Path, cap: usize) -> Res<TranslationReport> {
    let model = load(input, Some(from))?;
    let (text, report) = match (model, to) {
        (Acceptor::Ltl(m), Kind::Uhat) => {
            let t = ltl_to_uhat(&m.formula, &m.alphabet, m.output);
            let notes = vec![format!("{} subformula components", t.subformulas.len())];
            (t.uhat.to_json(), TranslationReport::for_uhat("ltl", &t.uhat, notes))
        }
        (Acceptor::Brasp(p), Kind::Uhat) => {
            let t = brasp_to_uhat(&p)?;
            let notes = vec![format!("{} complement components", t.complements.len())];
            (t.uhat.to_json(), TranslationReport::for_uhat("brasp", &t.uhat, notes))
        }
        (Acceptor::Uhat(u), Kind::Ltl) => {
            let t = uhat_to_ltl(&u, cap)?;
            let sizes: Vec<String> = t.sets.iter().map(|s| s.len().to_string()).collect();
            let notes = vec![format!("value set sizes per layer: {}", sizes.join(" "))];
            let report = TranslationReport::for_ltl("uhat", &t.model.formula, notes);
            (t.model.to_string(), report)
        }
        (Acceptor::Brasp(p), Kind::Ltl) => {
            let u = brasp_to_uhat(&p)?.uhat;
            let t = uhat_to_ltl(&u, cap)?;
            let notes = vec![format!("via a UHAT with {} layers", u.layers().len())];
            (t.model.to_string(), TranslationReport::for_ltl("brasp", &t.model.formula, notes))
        }
        (m, to) => return Err(Failure(format!("no translation from {} to {to:?}", m.kind()))),
    };
    write(out, &text)?;
    Ok(report)
}

fn parse_pairs(text: &str) -> Res<Vec<(String, String)>> {
    text.split(',')
        .filter(|s| !s.is_empty())
        .map(|p| match p.split_once('-') {
            Some((x, y)) => Ok((x.trim().to_string(), y.trim().to_string())),
            None => Err(Failure(format!("pair {p:?} must look like x-y"))),
        })
        .collect()
}

fn render_grid(inst: &TilingInstance, grid: &TilingGrid) -> Res<String> {
    let word = encode_grid(inst, grid)?;
    Ok(format!("rows: {}\n{}encoding: {}\n", grid.m(), grid.render(inst), inst.alphabet().render(&word)))
}

fn execute(cli: Cli) -> Res<(i32, String)> {
    let records = cli.format == Format::Records;
    let mut out = String::new();
    let code = match cli.command {
        Command::Run { model, word, trace } => {
            let a = load(&model.model, model.kind)?;
            let w = parse_word(a.alphabet(), &word)?;
            let accepted = a.accepts(&w)?;
            if records {
                out += &json_line(serde_json::json!({ "word": a.alphabet().render(&w), "result": verdict(accepted) }));
            } else {
                if trace {
                    out += &run_trace(&a, &w)?;
                }
                writeln!(out, "{}", verdict(accepted)).unwrap();
            }
            0
        }
        Command::Translate { from, to, input, out: target, cap } => {
            let from = kind_of(&input, from)
                .ok_or_else(|| Failure(format!("{}: cannot tell the model kind; pass --from", input.display())))?;
            let report = translate(from, to, &input, &target, cap)?;
            out += &if records { serde_json::to_string(&report).expect("report serializes") + "\n" } else { report_text(&report) };
            0
        }
        Command::CompileTiling { input, out: target } => {
            let inst = load_instance(&input)?;
            let program = compile_tiling_to_brasp(&inst);
            write(&target, &program.to_dsl())?;
            if records {
                out += &json_line(serde_json::json!({ "vectors": program.vector_count(), "definitions": program.defs().len() }));
            } else {
                writeln!(out, "vectors: {}\ndefinitions: {}", program.vector_count(), program.defs().len()).unwrap();
            }
            0
        }
        Command::Hchain { n, symbols, pairs, out: target, words } => {
            let spec = HChainSpec {
                n,
                symbols: symbols.split(',').filter(|s| !s.is_empty()).map(|s| s.trim().to_string()).collect(),
                pairs: parse_pairs(&pairs)?,
            };
            let chain = make_h_chain(&spec)?;
            if let Some(path) = target {
                write(&path, &chain.program.to_dsl())?;
            }
            for w in chain.words().take(words) {
                let rendered = chain.alphabet().render(&w);
                if records {
                    out += &json_line(serde_json::json!({ "word": rendered, "length": w.len() }));
                } else {
                    writeln!(out, "{rendered}").unwrap();
                }
            }
            0
        }
        Command::Empty { model, max_len, workers, timing } => {
            let a = load(&model.model, model.kind)?;
            let report = if workers > 1 { bounded_emptiness_parallel(&a, max_len, workers)? } else { bounded_emptiness(&a, max_len)? };
            out += &if records {
                report.to_record(a.alphabet(), timing) + "\n"
            } else {
                report.to_text(a.alphabet(), timing)
            };
            match report.outcome {
                Outcome::Witness(_) => 0,
                Outcome::Exhausted(_) => 1,
            }
        }
        Command::MinWitness { model, max_len } => {
            let a = load(&model.model, model.kind)?;
            let report = bounded_emptiness(&a, max_len)?;
            let w = report.witness().map(|w| a.alphabet().render(w));
            if records {
                out += &json_line(serde_json::json!({ "witness": w, "max_len": max_len }));
            } else {
                writeln!(out, "{}", w.as_deref().unwrap_or("none")).unwrap();
            }
            if w.is_some() {
                0
            } else {
                1
            }
        }
        Command::Equiv { a, b, kind_a, kind_b, max_len } => {
            let (x, y) = (load(&a, kind_a)?, load(&b, kind_b)?);
            let cex = bounded_equivalence(&x, &y, max_len)?;
            match &cex {
                None if records => out += &json_line(serde_json::json!({ "equivalent": true, "max_len": max_len })),
                None => writeln!(out, "equivalent up to length {max_len}").unwrap(),
                Some(w) => {
                    let rendered = x.alphabet().render(w);
                    let (ra, rb) = (verdict(x.accepts(w)?), verdict(y.accepts(w)?));
                    if records {
                        out += &json_line(serde_json::json!({ "equivalent": false, "counterexample": rendered, "a": ra, "b": rb }));
                    } else {
                        writeln!(out, "counterexample: {rendered}\na: {ra}\nb: {rb}").unwrap();
                    }
                }
            }
            cex.is_some() as i32
        }
        Command::Mutate { model, word, trials, seed } => {
            let a = load(&model.model, model.kind)?;
            let w = parse_word(a.alphabet(), &word)?;
            let report = mutation_test(&a, &w, trials, seed)?;
            out += &if records { report.to_records(a.alphabet()) } else { report.to_text(a.alphabet(), &w) };
            0
        }
        Command::VerifyTiling { input, grid } => {
            let inst = load_instance(&input)?;
            let g = in_file(&grid, TilingGrid::parse(&read(&grid)?, &inst))?;
            let ok = verify_tiling(&inst, &g)?;
            let verdict = if ok { "valid" } else { "invalid" };
            if records {
                out += &json_line(serde_json::json!({ "tiling": verdict, "rows": g.m() }));
            } else {
                writeln!(out, "{verdict}").unwrap();
            }
            0
        }
        Command::SearchTiling { input, max_rows } => {
            let inst = load_instance(&input)?;
            match search_tiling(&inst, max_rows.max(1)) {
                Some(g) => {
                    if records {
                        let word = inst.alphabet().render(&encode_grid(&inst, &g)?);
                        out += &json_line(serde_json::json!({ "rows": g.m(), "grid": g.rows, "encoding": word }));
                    } else {
                        out += &render_grid(&inst, &g)?;
                    }
                    0
                }
                None => {
                    if records {
                        out += &json_line(serde_json::json!({ "rows": null, "max_rows": max_rows }));
                    } else {
                        writeln!(out, "no tiling with at most {max_rows} rows").unwrap();
                    }
                    1
                }
            }
        }
        Command::Reachable { model, cap } => {
            let Acceptor::Uhat(u) = load(&model.model, model.kind.or(Some(Kind::Uhat)))? else {
                return Err(Failure("reachable needs a UHAT model".into()));
            };
            let sets = u.reachable_value_sets(cap.max(1))?;
            for (l, set) in sets.iter().enumerate() {
                let values: Vec<String> = set.iter().map(|v| v.to_string()).collect();
                if records {
                    out += &json_line(serde_json::json!({ "layer": l, "size": set.len(), "values": values }));
                } else {
                    writeln!(out, "layer {l}: {} values: {}", set.len(), values.join(" ")).unwrap();
                }
            }
            0
        }
    };
    Ok((code, out))
}

/// Parses `argv` (program name first) and runs the command. Usage errors
/// and failures exit with 2.
pub fn dispatch<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return (code, e.render().to_string());
        }
    };
    match execute(cli) {
        Ok(result) => result,
        Err(Failure(msg)) => (2, format!("error: {msg}\n")),
    }
}
