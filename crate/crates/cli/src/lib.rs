//! Argument model and command dispatch for the `codegraph` binary.
//!
//! Every command produces one report. JSON reports have a fixed field order
//! and contain only integers, strings and booleans, so identical
//! configurations give byte-identical output.

use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use codegraph_core::autgroup::gl_order;
use codegraph_core::cliques::{check_star_criterion, CliqueVerdict};
use codegraph_core::fqlinalg::format_blocks;
use codegraph_core::hmap::verify_h_on;
use codegraph_core::{
    build_graph, certify_in, code_graph_aut_group, connected_components, count_graph_automorphisms,
    enumerate_maximal_cliques, enumerate_subspaces, grassmann_aut_group, CertifyOptions, CodeGraph,
    Error, Field, GraphKind, TheoremContext,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Enum,
    Graph,
    Cliques,
    HmapVerify,
    Aut,
    Theorem,
}

#[derive(Parser, Debug)]
#[command(name = "codegraph", version, about = "Grassmann and linear-code graphs over small prime fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Subcommand, Debug)]
pub enum CliCommand {
    /// List every k-subspace of F_q^n in canonical form.
    Enum(CommonArgs),
    /// Build the Grassmann graph or the code graph and export it.
    Graph(CommonArgs),
    /// Enumerate and classify maximal cliques.
    Cliques(CommonArgs),
    /// Exhaustively check the map h on C(n,2)_2.
    HmapVerify(CommonArgs),
    /// Order of the automorphism group, optionally rechecked by direct search.
    Aut(CommonArgs),
    /// Classify every adjacency-preserving injection of Γ(n,2)_2 into Γ_2(V).
    Theorem(CommonArgs),
}

#[derive(Args, Debug, Clone)]
pub struct CommonArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    /// Restrict to non-degenerate codes.
    #[arg(long)]
    pub nondegenerate: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub budget_secs: Option<u64>,
    /// Report file; sidecars are written next to it.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `aut`: also count automorphisms by direct search.
    #[arg(long)]
    pub direct: bool,
    /// `theorem`: dump one witness record per enumerated embedding.
    #[arg(long)]
    pub witnesses: bool,
    /// Report zero wall time so that reports compare byte for byte.
    #[arg(long)]
    pub omit_timing: bool,
    /// `theorem`: search one representative per orbit of images of this
    /// many pattern vertices (0 searches everything).
    #[arg(long, default_value_t = 0)]
    pub orbit_depth: usize,
    /// Flip one adjacency bit before checking; for testing the failure path.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// A validated invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub n: usize,
    pub k: usize,
    pub field: Field,
    pub nondegenerate: bool,
    pub format: Format,
    pub jobs: usize,
    pub budget: Option<Duration>,
    pub out: Option<PathBuf>,
    pub direct: bool,
    pub witnesses: bool,
    pub omit_timing: bool,
    pub orbit_depth: usize,
    pub inject_fault: bool,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<RunConfig, Error> {
        let (command, a) = match cli.command {
            CliCommand::Enum(a) => (Command::Enum, a),
            CliCommand::Graph(a) => (Command::Graph, a),
            CliCommand::Cliques(a) => (Command::Cliques, a),
            CliCommand::HmapVerify(a) => (Command::HmapVerify, a),
            CliCommand::Aut(a) => (Command::Aut, a),
            CliCommand::Theorem(a) => (Command::Theorem, a),
        };
        let field = Field::new(a.q)?;
        field.check_dim(a.n)?;
        if a.k == 0 || a.k >= a.n {
            return Err(Error::OutOfRange(format!("need 1 <= k < n (n = {}, k = {})", a.n, a.k)));
        }
        if matches!(command, Command::HmapVerify | Command::Theorem) && (a.k != 2 || a.q != 2) {
            return Err(Error::OutOfRange("this command is defined for k = 2, q = 2 only".into()));
        }
        let jobs = a.jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |p| p.get()));
        if jobs == 0 {
            return Err(Error::OutOfRange("jobs must be at least 1".into()));
        }
        Ok(RunConfig {
            command,
            n: a.n,
            k: a.k,
            field,
            nondegenerate: a.nondegenerate,
            format: a.format,
            jobs,
            budget: a.budget_secs.map(Duration::from_secs),
            out: a.out,
            direct: a.direct,
            witnesses: a.witnesses,
            omit_timing: a.omit_timing,
            orbit_depth: a.orbit_depth,
            inject_fault: a.inject_fault,
        })
    }

    fn kind(&self) -> GraphKind {
        if self.nondegenerate {
            GraphKind::NonDegenerate
        } else {
            GraphKind::FullGrassmann
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// A checked assertion failed; the report holds the counterexample.
    Falsified,
    Invalid,
    BudgetExhausted,
}

impl Status {
    pub fn code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Falsified => 1,
            Status::Invalid => 2,
            Status::BudgetExhausted => 3,
        }
    }

    pub fn of_error(e: &Error) -> Status {
        match e {
            Error::BudgetExceeded(_) => Status::BudgetExhausted,
            _ => Status::Invalid,
        }
    }
}

/// A finished run: the main report and any sidecar files.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub report: String,
    /// Suffixes appended to `--out`, with contents.
    pub sidecars: Vec<(&'static str, String)>,
}

impl Outcome {
    fn new(status: Status, report: String) -> Outcome {
        Outcome { status, report, sidecars: Vec::new() }
    }
}

fn fail_if(bad: bool) -> Status {
    if bad {
        Status::Falsified
    } else {
        Status::Ok
    }
}

/// Flattens a JSON object into `key value` lines, nested keys dotted.
pub fn text_lines(value: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, v, out);
                }
            }
            Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
                for (i, v) in items.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), v, out);
                }
            }
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect();
                out.push_str(&format!("{prefix} [{}]\n", parts.join(" ")));
            }
            _ => out.push_str(&format!("{prefix} {}\n", scalar(v))),
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::String(s) => s.replace('\n', ","),
            other => other.to_string(),
        }
    }
    let mut out = String::new();
    walk("", value, &mut out);
    out
}

fn render<T: Serialize>(format: Format, report: &T) -> String {
    let value = serde_json::to_value(report).expect("report serialises");
    match format {
        Format::Json => serde_json::to_string_pretty(&value).expect("report serialises") + "\n",
        Format::Text => text_lines(&value),
    }
}

fn graph(config: &RunConfig) -> Result<CodeGraph, Error> {
    let mut g = build_graph(config.n, config.k, config.field, config.kind())?;
    if config.inject_fault {
        inject(&mut g)?;
    }
    Ok(g)
}

/// Adds an edge between the first non-adjacent pair.
fn inject(g: &mut CodeGraph) -> Result<(), Error> {
    let count = g.vertex_count();
    let (i, j) = (0..count)
        .flat_map(|i| (i + 1..count).map(move |j| (i, j)))
        .find(|&(i, j)| !g.has_edge(i, j))
        .ok_or_else(|| Error::WrongGraph("graph is complete; nothing to corrupt".into()))?;
    g.toggle_edge(i, j);
    Ok(())
}

pub fn run(config: &RunConfig) -> Result<Outcome, Error> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::OutOfRange(e.to_string()))?;
    pool.install(|| match config.command {
        Command::Enum => run_enum(config),
        Command::Graph => run_graph(config),
        Command::Cliques => run_cliques(config),
        Command::HmapVerify => run_hmap(config),
        Command::Aut => run_aut(config),
        Command::Theorem => run_theorem(config),
    })
}

#[derive(Serialize)]
struct EnumReport {
    n: usize,
    k: usize,
    q: u32,
    kind: String,
    count: usize,
    subspaces: Vec<codegraph_core::Subspace>,
}

fn run_enum(config: &RunConfig) -> Result<Outcome, Error> {
    let mut all = enumerate_subspaces(config.n, config.k, config.field)?;
    if config.nondegenerate {
        all.retain(codegraph_core::is_nondegenerate);
    }
    let report = match config.format {
        Format::Text => format_blocks(&all),
        Format::Json => render(
            Format::Json,
            &EnumReport {
                n: config.n,
                k: config.k,
                q: config.field.q(),
                kind: config.kind().to_string(),
                count: all.len(),
                subspaces: all,
            },
        ),
    };
    Ok(Outcome::new(Status::Ok, report))
}

#[derive(Serialize)]
struct GraphReport {
    n: usize,
    k: usize,
    q: u32,
    kind: String,
    vertices: usize,
    edges: usize,
    components: usize,
    complete_regime: bool,
    /// First stored adjacency bit that disagrees with the subspaces.
    invalid_pair: Option<[usize; 2]>,
    adjacency: Vec<String>,
}

fn run_graph(config: &RunConfig) -> Result<Outcome, Error> {
    let g = graph(config)?;
    let invalid = g.validate();
    let report = match config.format {
        Format::Text => {
            let mut text = g.export_text();
            if let Some((i, j)) = invalid {
                text.push_str(&format!("invalid_pair {i} {j}\n"));
            }
            text
        }
        Format::Json => render(
            Format::Json,
            &GraphReport {
                n: g.n(),
                k: g.k(),
                q: g.field().q(),
                kind: g.kind().to_string(),
                vertices: g.vertex_count(),
                edges: g.edge_count(),
                components: connected_components(&g).len(),
                complete_regime: g.is_complete_regime(),
                invalid_pair: invalid.map(|(i, j)| [i, j]),
                adjacency: g.adjacency().iter().map(|r| r.to_hex()).collect(),
            },
        ),
    };
    let mut outcome = Outcome::new(fail_if(invalid.is_some()), report);
    outcome.sidecars.push((".vertices", g.export_vertices()));
    Ok(outcome)
}

#[derive(Serialize)]
struct CliqueRow {
    verdict: &'static str,
    subspace: Option<String>,
    size: usize,
    also_top: bool,
    maximal_in_code_graph: bool,
    is_maximal_star: bool,
    vertices: Vec<usize>,
}

#[derive(Serialize)]
struct CliquesReport {
    n: usize,
    k: usize,
    q: u32,
    kind: String,
    cliques: usize,
    stars: usize,
    tops: usize,
    neither: usize,
    maximal_stars: usize,
    /// Centres where the star criterion disagrees with enumeration; code
    /// graphs only.
    criterion_checked: Option<usize>,
    criterion_mismatches: Option<Vec<String>>,
    rows: Vec<CliqueRow>,
}

fn run_cliques(config: &RunConfig) -> Result<Outcome, Error> {
    let g = graph(config)?;
    let cliques = enumerate_maximal_cliques(&g)?;
    let count = |label: &str| cliques.iter().filter(|c| c.verdict.label() == label).count();
    let (checked, mismatches) = if g.kind() == GraphKind::NonDegenerate && g.k() >= 2 {
        let checks = check_star_criterion(&g, &cliques)?;
        let bad = checks.iter().filter(|c| c.predicted != c.enumerated).map(|c| c.center.rows_joined(",")).collect();
        (Some(checks.len()), Some(bad))
    } else {
        (None, None)
    };
    let report = CliquesReport {
        n: g.n(),
        k: g.k(),
        q: g.field().q(),
        kind: g.kind().to_string(),
        cliques: cliques.len(),
        stars: count("star"),
        tops: count("top"),
        neither: count("neither"),
        maximal_stars: cliques.iter().filter(|c| c.is_maximal_star).count(),
        criterion_checked: checked,
        criterion_mismatches: mismatches,
        rows: cliques
            .iter()
            .map(|c| CliqueRow {
                verdict: c.verdict.label(),
                subspace: c.verdict.subspace().map(|s| s.rows_joined(",")),
                size: c.vertices.len(),
                also_top: c.also_top,
                maximal_in_code_graph: c.maximal_in_code_graph,
                is_maximal_star: c.is_maximal_star,
                vertices: c.vertices.clone(),
            })
            .collect(),
    };
    // every maximal clique of a full Grassmann graph is a star or a top
    let full = g.kind() == GraphKind::FullGrassmann && 1 < g.k() && g.k() + 1 < g.n();
    let untyped = full && cliques.iter().any(|c| c.verdict == CliqueVerdict::Neither);
    let disagree = report.criterion_mismatches.as_ref().is_some_and(|m| !m.is_empty());
    let status = fail_if(untyped || disagree);
    Ok(Outcome::new(status, render(config.format, &report)))
}

fn run_hmap(config: &RunConfig) -> Result<Outcome, Error> {
    let mut g = build_graph(config.n, 2, config.field, GraphKind::NonDegenerate)?;
    if config.inject_fault {
        inject(&mut g)?;
    }
    let report = verify_h_on(&g)?;
    Ok(Outcome::new(fail_if(!report.all_pass()), render(config.format, &report)))
}

#[derive(Serialize)]
struct AutReport {
    n: usize,
    k: usize,
    q: u32,
    kind: String,
    generated_order: u128,
    gl_order: u128,
    direct_order: Option<u64>,
}

fn run_aut(config: &RunConfig) -> Result<Outcome, Error> {
    let group = match config.kind() {
        GraphKind::FullGrassmann => grassmann_aut_group(config.n, config.k, config.field)?,
        GraphKind::NonDegenerate => code_graph_aut_group(config.n, config.k, config.field)?,
    };
    let direct = if config.direct {
        let g = graph(config)?;
        Some(count_graph_automorphisms(&g, config.jobs))
    } else {
        None
    };
    let report = AutReport {
        n: config.n,
        k: config.k,
        q: config.field.q(),
        kind: config.kind().to_string(),
        generated_order: group.order(),
        gl_order: gl_order(config.n as u32, config.field.q()),
        direct_order: direct,
    };
    let status = fail_if(direct.is_some_and(|d| d as u128 != group.order()));
    Ok(Outcome::new(status, render(config.format, &report)))
}

fn run_theorem(config: &RunConfig) -> Result<Outcome, Error> {
    let mut ctx = TheoremContext::new(config.n)?;
    if config.inject_fault {
        // drop a target edge that the identity embedding uses
        let p = ctx.pattern();
        let (u, v) = (0..p.vertex_count())
            .find_map(|u| p.neighbors(u).iter().next().map(|v| (u, v)))
            .expect("pattern has edges");
        let ident = ctx.identity_embedding();
        let (i, j) = (ident[u] as usize, ident[v] as usize);
        ctx.toggle_target_edge(i, j);
    }
    let opts = CertifyOptions {
        jobs: config.jobs,
        budget: config.budget,
        witnesses: config.witnesses,
        omit_timing: config.omit_timing,
        orbit_depth: config.orbit_depth,
        ..CertifyOptions::default()
    };
    let (cert, dump) = certify_in(&ctx, &opts)?;
    let status = if !cert.complete {
        Status::BudgetExhausted
    } else {
        fail_if(!cert.conclusive())
    };
    let mut outcome = Outcome::new(status, render(config.format, &cert));
    if let Some(dump) = dump {
        outcome.sidecars.push((".witnesses", dump));
    }
    Ok(outcome)
}

/// Path of a sidecar next to the report.
pub fn sidecar_path(out: &Path, suffix: &str) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

/// Writes the report to `out` (with sidecars) or to standard output
/// (sidecars follow the report).
pub fn emit(outcome: &Outcome, out: Option<&Path>) -> std::io::Result<()> {
    use std::io::Write;
    match out {
        Some(path) => {
            std::fs::write(path, &outcome.report)?;
            for (suffix, body) in &outcome.sidecars {
                std::fs::write(sidecar_path(path, suffix), body)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(outcome.report.as_bytes())?;
            for (suffix, body) in &outcome.sidecars {
                if *suffix == ".witnesses" {
                    stdout.write_all(body.as_bytes())?;
                }
            }
            stdout.flush()?;
        }
    }
    Ok(())
}
