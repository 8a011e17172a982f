//! Command-line front end. [`run`] maps argv to an exit code:
//! 0 success, 1 invalid model, 2 usage error, 3 resource guard tripped,
//! 4 Markov soundness violation.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::decompose::{chain_components, component_subgraphs};
use crate::error::{GraphError, OracleError, PlateError};
use crate::factorize::{eliminate_deterministic, Format};
use crate::graph::{validate_chain_graph, ChainGraph};
use crate::lang::{self, Resolved};
use crate::markov::{
    implies_ci, max_cliques, moralize_chain, simplify_conditional_directed, simplify_conditional_undirected, CiQuery,
    UndirectedGraph,
};
use crate::oracle::{check_global_markov, MarkovOptions, DEFAULT_CI_TOL};
use crate::plates::{expand, factorize_plated, Binding, PlateModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;
pub const EXIT_UNSOUND: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "chaingraph", version, about = "Compile and check chain-graph models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Input {
    /// Model file (.cg).
    model: PathBuf,
    /// Plate cardinality, `SYM=INT` or `SYM=INT,INT,...` for per-instance
    /// counts of a nested plate. With any binding the model is expanded
    /// first.
    #[arg(long = "bind", value_name = "SYM=INT[,INT...]")]
    bind: Vec<String>,
    /// Write output to this file instead of stdout.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Text,
    Latex,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the model; diagnostics go to stderr.
    Validate(Input),
    /// Chain components, one per line.
    Components(Input),
    /// Component subgraphs, one per line.
    Subgraphs(Input),
    /// Edges of the moral graph.
    Moralize(Input),
    /// Maximal cliques of the moral graph.
    Cliques {
        #[command(flatten)]
        input: Input,
        /// Use the skeleton (directions dropped, no moralization).
        #[arg(long)]
        skeleton: bool,
    },
    /// Decide an independence statement, e.g. `a,b _||_ c | d`.
    Query {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        ci: String,
    },
    /// Print the factorization.
    Factorize {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value = "text")]
        format: FormatArg,
    },
    /// Drop edges made redundant by the observed nodes.
    Simplify(Input),
    /// Eliminate deterministic nodes.
    ElimDet(Input),
    /// Expand plates into a ground model.
    Expand(Input),
    /// Graphviz DOT export.
    Dot(Input),
    /// Numerically check every implied independence on random tables.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CI_TOL)]
        tol: f64,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Write one JSON record per query to this file.
        #[arg(long)]
        records: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<GraphError> for Failure {
    fn from(e: GraphError) -> Self {
        let code = match e {
            GraphError::TooLarge { .. } => EXIT_RESOURCE,
            GraphError::Query(_) => EXIT_USAGE,
            _ => EXIT_INVALID,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<PlateError> for Failure {
    fn from(e: PlateError) -> Self {
        match e {
            PlateError::Graph(g) => g.into(),
            PlateError::Unbound(_)
            | PlateError::ZeroCardinality(_)
            | PlateError::RaggedMismatch { .. }
            | PlateError::RaggedTopLevel(_) => Failure::new(EXIT_USAGE, e.to_string()),
            _ => Failure::new(EXIT_INVALID, e.to_string()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Graph(g) => g.into(),
            OracleError::StateSpace(_) | OracleError::TooManyNodes(_) => Failure::new(EXIT_RESOURCE, e.to_string()),
            _ => Failure::new(EXIT_INVALID, e.to_string()),
        }
    }
}

type CmdResult = Result<String, Failure>;

struct Loaded {
    resolved: Resolved,
    binding: Option<Binding>,
}

impl Loaded {
    fn model(&self) -> &PlateModel {
        &self.resolved.model
    }

    /// The template graph, or its expansion when a binding was given.
    fn graph(&self) -> Result<ChainGraph, Failure> {
        match &self.binding {
            Some(b) => Ok(expand(self.model(), b)?),
            None => Ok(self.model().graph.clone()),
        }
    }

    fn name(&self) -> &str {
        &self.resolved.name
    }
}

fn load(input: &Input, err: &mut dyn Write) -> Result<Loaded, Failure> {
    let path = input.model.display().to_string();
    let src = std::fs::read_to_string(&input.model)
        .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot read {path}: {e}")))?;
    let binding = if input.bind.is_empty() {
        None
    } else {
        let mut b = Binding::new();
        for a in &input.bind {
            b.parse_assignment(a).map_err(|m| Failure::new(EXIT_USAGE, m))?;
        }
        Some(b)
    };
    match lang::load(&src) {
        Ok(resolved) => {
            for w in &resolved.warnings {
                let _ = err.write_all(w.report(&path, &src).as_bytes());
            }
            Ok(Loaded { resolved, binding })
        }
        Err(diags) => {
            let mut text = String::new();
            for d in &diags {
                text.push_str(&d.report(&path, &src));
            }
            let n = diags.iter().filter(|d| d.is_error()).count();
            let _ = writeln!(text, "{n} error(s) in {path}");
            Err(Failure::new(EXIT_INVALID, text.trim_end().to_string()))
        }
    }
}

fn lines(blocks: Vec<Vec<&str>>) -> String {
    blocks.into_iter().map(|b| b.join(" ") + "\n").collect()
}

fn edge_lines(g: &ChainGraph, u: &UndirectedGraph) -> String {
    u.edges()
        .into_iter()
        .map(|(a, b)| format!("{} -- {}\n", g.name(a), g.name(b)))
        .collect()
}

fn execute(cmd: &Command, err: &mut dyn Write) -> Result<(String, Option<PathBuf>, i32), Failure> {
    let input = match cmd {
        Command::Validate(i)
        | Command::Components(i)
        | Command::Subgraphs(i)
        | Command::Moralize(i)
        | Command::Simplify(i)
        | Command::ElimDet(i)
        | Command::Expand(i)
        | Command::Dot(i) => i,
        Command::Cliques { input, .. }
        | Command::Query { input, .. }
        | Command::Factorize { input, .. }
        | Command::Oracle { input, .. } => input,
    };
    let m = load(input, err)?;
    let mut code = EXIT_OK;
    let out: CmdResult = (|| match cmd {
        Command::Validate(_) => {
            let g = m.graph()?;
            let report = validate_chain_graph(&g);
            if !report.is_valid() {
                return Err(Failure::new(
                    EXIT_INVALID,
                    report
                        .errors
                        .iter()
                        .map(|e| format!("error: {e}"))
                        .collect::<Vec<_>>()
                        .join("\n"),
                ));
            }
            Ok(format!(
                "valid: {} nodes, {} edges, {} plates\n",
                g.len(),
                g.edges().len(),
                if m.binding.is_some() { 0 } else { m.model().plates.len() }
            ))
        }
        Command::Components(_) => {
            let g = m.graph()?;
            Ok(lines(chain_components(&g).names(&g)))
        }
        Command::Subgraphs(_) => {
            let g = m.graph()?;
            Ok(lines(component_subgraphs(&g).names(&g)))
        }
        Command::Moralize(_) => {
            let g = m.graph()?;
            Ok(edge_lines(&g, &moralize_chain(&g)))
        }
        Command::Cliques { skeleton, .. } => {
            let g = m.graph()?;
            let u = if *skeleton {
                UndirectedGraph::skeleton(&g, &g.all_nodes())
            } else {
                moralize_chain(&g)
            };
            let cliques = max_cliques(&u)?;
            Ok(lines(cliques.cliques().iter().map(|c| g.names_of(c)).collect()))
        }
        Command::Query { ci, .. } => {
            let g = m.graph()?;
            let q = CiQuery::parse(&g, ci).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            Ok(format!("{}\n", implies_ci(&g, &q)?))
        }
        Command::Factorize { format, .. } => {
            let f = factorize_plated(m.model(), m.binding.as_ref())?;
            let format = match format {
                FormatArg::Text => Format::Text,
                FormatArg::Latex => Format::Latex,
            };
            Ok(f.render(format) + "\n")
        }
        Command::Simplify(_) => {
            let g = m.graph()?;
            let s = if g.is_directed() {
                simplify_conditional_directed(&g)?
            } else if g.is_undirected() {
                simplify_conditional_undirected(&g)?
            } else {
                return Err(Failure::new(
                    EXIT_INVALID,
                    "simplify needs a purely directed or purely undirected graph",
                ));
            };
            Ok(lang::print_graph(&s, m.name()))
        }
        Command::ElimDet(_) => {
            let g = m.graph()?;
            Ok(lang::print_graph(&eliminate_deterministic(&g)?, m.name()))
        }
        Command::Expand(_) => {
            if m.binding.is_none() && !m.model().plates.is_empty() {
                return Err(Failure::new(EXIT_USAGE, "expand needs --bind for every plate symbol"));
            }
            Ok(lang::print_graph(&m.graph()?, m.name()))
        }
        Command::Dot(_) => match &m.binding {
            Some(_) => Ok(lang::graph_to_dot(&m.graph()?, m.name())),
            None => Ok(lang::to_dot(m.model(), m.name())),
        },
        Command::Oracle {
            trials,
            seed,
            tol,
            jobs,
            records,
            ..
        } => {
            let g = m.graph()?;
            let opts = MarkovOptions {
                trials: *trials,
                seed: *seed,
                tol: *tol,
            };
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.unwrap_or(0))
                .build()
                .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
            let report = pool.install(|| check_global_markov(&g, opts))?;
            if let Some(path) = records {
                let mut text = String::new();
                for q in &report.queries {
                    text.push_str(&serde_json::to_string(q).expect("records serialize"));
                    text.push('\n');
                }
                std::fs::write(path, text)
                    .map_err(|e| Failure::new(EXIT_USAGE, format!("cannot write {}: {e}", path.display())))?;
            }
            let implied = report.queries.iter().filter(|q| q.implied).count();
            let mut out = String::new();
            let _ = writeln!(out, "queries: {}", report.queries.len());
            let _ = writeln!(out, "implied: {implied}");
            let _ = writeln!(out, "trials: {}", report.trials);
            let _ = writeln!(out, "soundness violations: {}", report.violations.len());
            let _ = writeln!(out, "completeness warnings: {}", report.completeness_warnings.len());
            if g.is_directed() {
                let _ = writeln!(out, "route mismatches: {}", report.route_mismatches.len());
            }
            for v in &report.violations {
                let _ = writeln!(
                    out,
                    "violation: {} (trial {}, seed {}, deviation {:e})",
                    v.query, v.trial, v.seed, v.deviation
                );
            }
            for q in &report.route_mismatches {
                let _ = writeln!(out, "route mismatch: {q}");
            }
            for q in &report.completeness_warnings {
                let _ = writeln!(err, "warning: no trial showed dependence for {q}");
            }
            if !report.is_sound() {
                code = EXIT_UNSOUND;
            }
            Ok(out)
        }
    })();
    out.map(|s| (s, input.output.clone(), code))
}

/// Runs the command line `argv` (program name first), writing results to
/// `out` and diagnostics to `err`.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match execute(&cli.command, err) {
        Ok((text, path, code)) => {
            let written = match path {
                Some(p) => {
                    std::fs::write(&p, text.as_bytes()).map_err(|e| format!("cannot write {}: {e}", p.display()))
                }
                None => out.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(m) => {
                    let _ = writeln!(err, "error: {m}");
                    EXIT_USAGE
                }
            }
        }
        Err(f) => {
            let msg = if f.message.starts_with("error") || f.message.contains(": error: ") {
                f.message
            } else {
                format!("error: {}", f.message)
            };
            let _ = writeln!(err, "{msg}");
            f.code
        }
    }
}

/// [`run_with`] on the process's stdout and stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}
