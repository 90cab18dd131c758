//! Command-line front end for `arrival-core`.
//!
//! Every command prints one JSON document:
//!
//! ```text
//! {"schema_version":1,"command":...,"inputs":{...},"mode":...,"result":{...}}
//! ```
//!
//! Failures replace `result` with `error: {kind, message}`. Exit codes are
//! 0 on success, 1 on a computational error and 2 on a usage error.

use std::path::PathBuf;

use arrival_core::bounds::{
    bounds_report, conjecture_scan, default_q_grid, effective_resistance, insertion_probability,
    reliability_polynomial,
};
use arrival_core::engine::{
    arrival_pmf, arrival_pmf_to_tail, build_state_space, expected_arrival, ogf_eval, DEFAULT_MAX_STATES,
    DEFAULT_TAIL,
};
use arrival_core::montecarlo::{
    chi_square_gof, chi_square_two_sample, pmf_bins, sample_exponential_sp, sample_geometric_sp,
    simulate_spread, ChiSquareTest, SimConfig, SimEstimate,
};
use arrival_core::resistance::{exponential_expectation, spreading_resistance};
use arrival_core::scalar::{format_ratio, parse_ratio};
use arrival_core::series::{
    expectation_from_survival, parallel_reduce, path_ogf, series_reduce, two_paths_ogf,
};
use arrival_core::special::{kn_expected, kn_resistance, parallel_paths_resistance, ParallelPathSpec};
use arrival_core::{BigInt, BigRational, Error, Mode, MultiGraph, PowerSeries, Scalar};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::One;
use serde_json::{json, Map, Value as Json};

pub const SCHEMA_VERSION: u64 = 1;
pub const DEFAULT_RATIONAL_N_MAX: usize = 40;
pub const DEFAULT_TRUNC: usize = 40;
const FLOAT_N_CAP: usize = 1 << 20;
const EQUIV_ALPHA: f64 = 0.01;

#[derive(Debug, Parser)]
#[command(name = "arrival", version, about = "First arrival times of spread processes on multigraphs")]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
    /// Indent the JSON output.
    #[arg(long, global = true)]
    pretty: bool,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Graph file.
    #[arg(short = 'g', long = "graph")]
    graph: PathBuf,
    /// Source vertex name.
    #[arg(short = 's')]
    s: String,
    /// Target vertex name.
    #[arg(short = 't')]
    t: String,
}

#[derive(Debug, Args)]
struct ProbArgs {
    /// Infection probability applied to every edge.
    #[arg(long = "p", conflicts_with = "q", value_parser = parse_number)]
    p: Option<BigRational>,
    /// Noninfection probability `1 - p` applied to every edge.
    #[arg(long = "q", value_parser = parse_number)]
    q: Option<BigRational>,
}

#[derive(Debug, Args)]
struct ModeArgs {
    #[arg(long, default_value = "rational", value_parser = parse_mode)]
    mode: Mode,
}

#[derive(Debug, Args)]
struct StateArgs {
    /// Cap on the number of chain states.
    #[arg(long = "max-states", default_value_t = DEFAULT_MAX_STATES)]
    max_states: usize,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Total number of samples, split evenly over the replicas.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 8)]
    replicas: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sampler {
    Spread,
    Geometric,
    Exponential,
}

impl Sampler {
    fn as_str(self) -> &'static str {
        match self {
            Sampler::Spread => "spread",
            Sampler::Geometric => "geometric",
            Sampler::Exponential => "exponential",
        }
    }
}

#[derive(Debug, Subcommand)]
enum CliCommand {
    /// Expected first arrival time.
    Exact {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        prob: ProbArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[command(flatten)]
        states: StateArgs,
    },
    /// Distribution of the first arrival time.
    Pmf {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        prob: ProbArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[command(flatten)]
        states: StateArgs,
        /// Largest arrival time reported; float mode otherwise runs until the
        /// tail mass drops below 1e-9.
        #[arg(long = "n-max")]
        n_max: Option<usize>,
    },
    /// Generating function of the first arrival time at a point.
    OgfEval {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        prob: ProbArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[command(flatten)]
        states: StateArgs,
        #[arg(long, value_parser = parse_number)]
        z: BigRational,
    },
    /// Spreading resistance.
    Resistance {
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Expected shortest path with exponential edge lengths of rate p.
    Tau {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        prob: ProbArgs,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Complete graph closed forms.
    SpecialKn {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        prob: ProbArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// Size of the labelled set.
        #[arg(long, default_value_t = 1)]
        i: usize,
    },
    /// Spreading resistance of internally disjoint parallel paths.
    SpecialPpaths {
        /// Comma-separated path lengths.
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<usize>,
    },
    /// Series and parallel composition of two paths.
    ReduceDemo {
        /// Two comma-separated path lengths.
        #[arg(long, value_delimiter = ',', required = true)]
        lengths: Vec<usize>,
        #[command(flatten)]
        prob: ProbArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// Truncation degree of the power series.
        #[arg(long, default_value_t = DEFAULT_TRUNC)]
        trunc: usize,
    },
    /// Lower and upper bounds at a common noninfection probability.
    Bounds {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        prob: ProbArgs,
        #[command(flatten)]
        mode: ModeArgs,
        #[command(flatten)]
        states: StateArgs,
    },
    /// Two-terminal reliability polynomial.
    Reliability {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        prob: ProbArgs,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Monte Carlo estimate of the arrival time.
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        prob: ProbArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_enum, default_value_t = Sampler::Spread)]
        sampler: Sampler,
    },
    /// Compares the spread process with geometric shortest paths.
    EquivCheck {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        prob: ProbArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        states: StateArgs,
    },
    /// Compares τ with the exact expectation over a grid of q.
    ConjectureScan {
        #[command(flatten)]
        graph: GraphArgs,
        #[command(flatten)]
        mode: ModeArgs,
        /// Comma-separated q values; defaults to 0.1, ..., 0.9.
        #[arg(long = "q-grid", value_delimiter = ',', value_parser = parse_number)]
        q_grid: Vec<BigRational>,
    },
}

fn parse_number(text: &str) -> Result<BigRational, String> {
    parse_ratio(text).map_err(|e| e.to_string())
}

fn parse_mode(text: &str) -> Result<Mode, String> {
    text.parse().map_err(|e: Error| e.to_string())
}

/// Which probability the user supplied; echoed back verbatim.
#[derive(Debug, Clone, PartialEq)]
pub enum Prob {
    P(BigRational),
    Q(BigRational),
}

impl Prob {
    fn from_args(args: ProbArgs) -> Option<Self> {
        match (args.p, args.q) {
            (Some(p), None) => Some(Prob::P(p)),
            (None, Some(q)) => Some(Prob::Q(q)),
            _ => None,
        }
    }

    pub fn p(&self) -> BigRational {
        match self {
            Prob::P(p) => p.clone(),
            Prob::Q(q) => BigRational::one() - q,
        }
    }

    pub fn q(&self) -> BigRational {
        match self {
            Prob::P(p) => BigRational::one() - p,
            Prob::Q(q) => q.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphInput {
    pub path: PathBuf,
    pub s: String,
    pub t: String,
}

impl From<GraphArgs> for GraphInput {
    fn from(a: GraphArgs) -> Self {
        GraphInput { path: a.graph, s: a.s, t: a.t }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimParams {
    pub seed: u64,
    pub samples: usize,
    pub replicas: usize,
}

impl From<SimArgs> for SimParams {
    fn from(a: SimArgs) -> Self {
        SimParams { seed: a.seed, samples: a.samples, replicas: a.replicas }
    }
}

/// A validated command.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Exact { graph: GraphInput, prob: Option<Prob>, max_states: usize },
    Pmf { graph: GraphInput, prob: Option<Prob>, max_states: usize, n_max: Option<usize> },
    OgfEval { graph: GraphInput, prob: Option<Prob>, max_states: usize, z: BigRational },
    Resistance { graph: GraphInput },
    Tau { graph: GraphInput, prob: Prob },
    SpecialKn { n: usize, prob: Prob, i: usize },
    SpecialPpaths { lengths: Vec<usize> },
    ReduceDemo { n: usize, m: usize, prob: Prob, trunc: usize },
    Bounds { graph: GraphInput, prob: Prob, max_states: usize },
    Reliability { graph: GraphInput, prob: Option<Prob> },
    Simulate { graph: GraphInput, prob: Option<Prob>, sim: SimParams, sampler: Sampler },
    EquivCheck { graph: GraphInput, prob: Option<Prob>, sim: SimParams, max_states: usize },
    ConjectureScan { graph: GraphInput, q_grid: Vec<BigRational> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandRequest {
    pub command: Command,
    pub mode: Mode,
    pub pretty: bool,
}

impl CommandRequest {
    pub fn name(&self) -> &'static str {
        match self.command {
            Command::Exact { .. } => "exact",
            Command::Pmf { .. } => "pmf",
            Command::OgfEval { .. } => "ogf-eval",
            Command::Resistance { .. } => "resistance",
            Command::Tau { .. } => "tau",
            Command::SpecialKn { .. } => "special-kn",
            Command::SpecialPpaths { .. } => "special-ppaths",
            Command::ReduceDemo { .. } => "reduce-demo",
            Command::Bounds { .. } => "bounds",
            Command::Reliability { .. } => "reliability",
            Command::Simulate { .. } => "simulate",
            Command::EquivCheck { .. } => "equiv-check",
            Command::ConjectureScan { .. } => "conjecture-scan",
        }
    }
}

/// Rejected command line.
#[derive(Debug, Clone, PartialEq)]
pub enum UsageError {
    /// `--help` or `--version`; the text goes to standard output, exit 0.
    Info(String),
    /// One-line reason, exit 2.
    Invalid(String),
}

fn usage(reason: impl Into<String>) -> UsageError {
    UsageError::Invalid(reason.into())
}

fn required_prob(prob: ProbArgs) -> Result<Prob, UsageError> {
    Prob::from_args(prob).ok_or_else(|| usage("one of --p or --q is required"))
}

/// Parses and validates a command line; `argv[0]` is the program name.
pub fn parse_args<I, T>(argv: I) -> Result<CommandRequest, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => UsageError::Info(e.to_string()),
            _ => {
                // first paragraph of clap's message, folded onto one line
                let text = e.to_string();
                let reason: Vec<&str> = text
                    .lines()
                    .map(str::trim)
                    .take_while(|l| !l.is_empty())
                    .collect();
                usage(reason.join(" ").trim_start_matches("error: ").to_string())
            }
        }
    })?;
    let (command, mode) = match cli.command {
        CliCommand::Exact { graph, prob, mode, states } => (
            Command::Exact { graph: graph.into(), prob: Prob::from_args(prob), max_states: states.max_states },
            mode.mode,
        ),
        CliCommand::Pmf { graph, prob, mode, states, n_max } => (
            Command::Pmf { graph: graph.into(), prob: Prob::from_args(prob), max_states: states.max_states, n_max },
            mode.mode,
        ),
        CliCommand::OgfEval { graph, prob, mode, states, z } => (
            Command::OgfEval { graph: graph.into(), prob: Prob::from_args(prob), max_states: states.max_states, z },
            mode.mode,
        ),
        CliCommand::Resistance { graph } => (Command::Resistance { graph: graph.into() }, Mode::Rational),
        CliCommand::Tau { graph, prob, mode } => {
            (Command::Tau { graph: graph.into(), prob: required_prob(prob)? }, mode.mode)
        }
        CliCommand::SpecialKn { n, prob, mode, i } => {
            (Command::SpecialKn { n, prob: required_prob(prob)?, i }, mode.mode)
        }
        CliCommand::SpecialPpaths { lengths } => (Command::SpecialPpaths { lengths }, Mode::Rational),
        CliCommand::ReduceDemo { lengths, prob, mode, trunc } => {
            let [n, m] = lengths[..] else {
                return Err(usage("--lengths takes exactly two values"));
            };
            (Command::ReduceDemo { n, m, prob: required_prob(prob)?, trunc }, mode.mode)
        }
        CliCommand::Bounds { graph, prob, mode, states } => (
            Command::Bounds { graph: graph.into(), prob: required_prob(prob)?, max_states: states.max_states },
            mode.mode,
        ),
        CliCommand::Reliability { graph, prob, mode } => {
            (Command::Reliability { graph: graph.into(), prob: Prob::from_args(prob) }, mode.mode)
        }
        CliCommand::Simulate { graph, prob, sim, sampler } => {
            let prob = Prob::from_args(prob);
            if sampler == Sampler::Exponential && prob.is_none() {
                return Err(usage("the exponential sampler needs --p or --q"));
            }
            (Command::Simulate { graph: graph.into(), prob, sim: sim.into(), sampler }, Mode::Float)
        }
        CliCommand::EquivCheck { graph, prob, sim, states } => (
            Command::EquivCheck {
                graph: graph.into(),
                prob: Prob::from_args(prob),
                sim: sim.into(),
                max_states: states.max_states,
            },
            Mode::Float,
        ),
        CliCommand::ConjectureScan { graph, mode, q_grid } => {
            let q_grid = if q_grid.is_empty() { default_q_grid() } else { q_grid };
            (Command::ConjectureScan { graph: graph.into(), q_grid }, mode.mode)
        }
    };
    Ok(CommandRequest { command, mode, pretty: cli.pretty })
}

/// JSON rendering of a scalar: `"num/den"` strings for rationals, numbers
/// for floats.
pub trait Emit {
    fn emit(&self) -> Json;
}

impl Emit for BigRational {
    fn emit(&self) -> Json {
        Json::String(format_ratio(self))
    }
}

impl Emit for f64 {
    fn emit(&self) -> Json {
        serde_json::Number::from_f64(*self).map_or(Json::Null, Json::Number)
    }
}

fn emit_all<S: Emit>(xs: &[S]) -> Json {
    Json::Array(xs.iter().map(Emit::emit).collect())
}

fn emit_int(i: &BigInt) -> Json {
    Json::String(i.to_string())
}

/// Failure while running a valid request.
#[derive(Debug)]
pub enum RunError {
    Core(Error),
    Io(String),
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Core(e)
    }
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Core(e) => e.kind(),
            RunError::Io(_) => "IoError",
        }
    }

    pub fn message(&self) -> String {
        match self {
            RunError::Core(e) => e.to_string(),
            RunError::Io(m) => m.clone(),
        }
    }
}

type RunResult<T> = Result<T, RunError>;

struct Loaded {
    graph: MultiGraph,
    s: usize,
    t: usize,
}

fn load(input: &GraphInput, prob: Option<&Prob>) -> RunResult<Loaded> {
    let text = read_graph(input)?;
    let graph = match prob {
        Some(prob) => MultiGraph::parse_with_default(&text, &prob.p())?.with_uniform_p(&prob.p())?,
        None => MultiGraph::parse(&text)?,
    };
    locate(graph, input)
}

/// Loads a graph for commands that read only its edges; edges without a
/// probability are accepted.
fn load_topology(input: &GraphInput) -> RunResult<Loaded> {
    locate(MultiGraph::parse_with_default(&read_graph(input)?, &BigRational::one())?, input)
}

fn read_graph(input: &GraphInput) -> RunResult<String> {
    std::fs::read_to_string(&input.path).map_err(|e| RunError::Io(format!("{}: {e}", input.path.display())))
}

fn locate(graph: MultiGraph, input: &GraphInput) -> RunResult<Loaded> {
    let s = graph.vertex_index(&input.s)?;
    let t = graph.vertex_index(&input.t)?;
    Ok(Loaded { graph, s, t })
}

fn echo_inputs(req: &CommandRequest) -> Json {
    let mut m = Map::new();
    let graph = |m: &mut Map<String, Json>, g: &GraphInput| {
        m.insert("graph".into(), json!(g.path.display().to_string()));
        m.insert("s".into(), json!(g.s));
        m.insert("t".into(), json!(g.t));
    };
    let prob = |m: &mut Map<String, Json>, p: Option<&Prob>| match p {
        Some(Prob::P(p)) => {
            m.insert("p".into(), p.emit());
        }
        Some(Prob::Q(q)) => {
            m.insert("q".into(), q.emit());
        }
        None => {}
    };
    let sim = |m: &mut Map<String, Json>, s: &SimParams| {
        m.insert("seed".into(), json!(s.seed));
        m.insert("samples".into(), json!(s.samples));
        m.insert("replicas".into(), json!(s.replicas));
    };
    match &req.command {
        Command::Exact { graph: g, prob: p, max_states } => {
            graph(&mut m, g);
            prob(&mut m, p.as_ref());
            m.insert("max_states".into(), json!(max_states));
        }
        Command::Pmf { graph: g, prob: p, max_states, n_max } => {
            graph(&mut m, g);
            prob(&mut m, p.as_ref());
            m.insert("max_states".into(), json!(max_states));
            if let Some(n) = n_max {
                m.insert("n_max".into(), json!(n));
            }
        }
        Command::OgfEval { graph: g, prob: p, max_states, z } => {
            graph(&mut m, g);
            prob(&mut m, p.as_ref());
            m.insert("max_states".into(), json!(max_states));
            m.insert("z".into(), z.emit());
        }
        Command::Resistance { graph: g } => graph(&mut m, g),
        Command::Tau { graph: g, prob: p } => {
            graph(&mut m, g);
            prob(&mut m, Some(p));
        }
        Command::SpecialKn { n, prob: p, i } => {
            m.insert("n".into(), json!(n));
            prob(&mut m, Some(p));
            m.insert("i".into(), json!(i));
        }
        Command::SpecialPpaths { lengths } => {
            m.insert("lengths".into(), json!(lengths));
        }
        Command::ReduceDemo { n, m: len_m, prob: p, trunc } => {
            m.insert("lengths".into(), json!([n, len_m]));
            prob(&mut m, Some(p));
            m.insert("trunc".into(), json!(trunc));
        }
        Command::Bounds { graph: g, prob: p, max_states } => {
            graph(&mut m, g);
            prob(&mut m, Some(p));
            m.insert("max_states".into(), json!(max_states));
        }
        Command::Reliability { graph: g, prob: p } => {
            graph(&mut m, g);
            prob(&mut m, p.as_ref());
        }
        Command::Simulate { graph: g, prob: p, sim: s, sampler } => {
            graph(&mut m, g);
            prob(&mut m, p.as_ref());
            sim(&mut m, s);
            m.insert("sampler".into(), json!(sampler.as_str()));
        }
        Command::EquivCheck { graph: g, prob: p, sim: s, max_states } => {
            graph(&mut m, g);
            prob(&mut m, p.as_ref());
            sim(&mut m, s);
            m.insert("max_states".into(), json!(max_states));
        }
        Command::ConjectureScan { graph: g, q_grid } => {
            graph(&mut m, g);
            m.insert("q_grid".into(), emit_all(q_grid));
        }
    }
    Json::Object(m)
}

/// Outcome of [`run`]: the JSON document and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub document: Json,
    pub exit_code: i32,
}

impl Output {
    pub fn render(&self, pretty: bool) -> String {
        if pretty {
            serde_json::to_string_pretty(&self.document).expect("serialisable")
        } else {
            serde_json::to_string(&self.document).expect("serialisable")
        }
    }
}

pub fn run(req: &CommandRequest) -> Output {
    let result = match req.mode {
        Mode::Rational => dispatch::<BigRational>(req),
        Mode::Float => dispatch::<f64>(req),
    };
    let mut doc = Map::new();
    doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
    doc.insert("command".into(), json!(req.name()));
    doc.insert("inputs".into(), echo_inputs(req));
    doc.insert("mode".into(), json!(req.mode.as_str()));
    let exit_code = match result {
        Ok(value) => {
            doc.insert("result".into(), value);
            0
        }
        Err(e) => {
            doc.insert("error".into(), json!({"kind": e.kind(), "message": e.message()}));
            1
        }
    };
    Output { document: Json::Object(doc), exit_code }
}

/// Document printed for a usage error.
pub fn usage_document(reason: &str) -> Json {
    json!({
        "schema_version": SCHEMA_VERSION,
        "error": {"kind": "UsageError", "message": reason},
    })
}

fn dispatch<S: Scalar + Emit>(req: &CommandRequest) -> RunResult<Json> {
    match &req.command {
        Command::Exact { graph, prob, max_states } => {
            let l = load(graph, prob.as_ref())?;
            let space = build_state_space::<S>(&l.graph, &l.graph.singleton(l.s), l.t, *max_states)?;
            Ok(json!({
                "expected": expected_arrival(&space).value.emit(),
                "states": space.len(),
            }))
        }
        Command::Pmf { graph, prob, max_states, n_max } => {
            let l = load(graph, prob.as_ref())?;
            let space = build_state_space::<S>(&l.graph, &l.graph.singleton(l.s), l.t, *max_states)?;
            let pmf = match (n_max, S::MODE) {
                (Some(n), _) => arrival_pmf(&space, *n),
                (None, Mode::Rational) => arrival_pmf(&space, DEFAULT_RATIONAL_N_MAX),
                (None, Mode::Float) => arrival_pmf_to_tail(&space, DEFAULT_TAIL, FLOAT_N_CAP),
            };
            Ok(json!({
                "n_max": pmf.n_max(),
                "pmf": emit_all(&pmf.probs),
                "tail": pmf.tail.emit(),
            }))
        }
        Command::OgfEval { graph, prob, max_states, z } => {
            let l = load(graph, prob.as_ref())?;
            let space = build_state_space::<S>(&l.graph, &l.graph.singleton(l.s), l.t, *max_states)?;
            Ok(json!({"value": ogf_eval(&space, &S::from_ratio(z))?.emit()}))
        }
        Command::Resistance { graph } => {
            let l = load_topology(graph)?;
            Ok(json!({"rho": spreading_resistance(&l.graph, &l.graph.singleton(l.s), l.t)?.emit()}))
        }
        Command::Tau { graph, prob } => {
            let l = load(graph, Some(prob))?;
            let a = l.graph.singleton(l.s);
            let rho = spreading_resistance(&l.graph, &a, l.t)?;
            let tau = exponential_expectation(&l.graph, &a, l.t, &S::from_ratio(&prob.p()))?;
            Ok(json!({"rho": rho.emit(), "tau": tau.emit()}))
        }
        Command::SpecialKn { n, prob, i } => Ok(json!({
            "expected": kn_expected(*n, &S::from_ratio(&prob.q()), *i)?.emit(),
            "rho": kn_resistance(*n)?.emit(),
        })),
        Command::SpecialPpaths { lengths } => {
            let spec = ParallelPathSpec::new(lengths.clone())?;
            Ok(json!({"rho": parallel_paths_resistance(&spec).emit()}))
        }
        Command::ReduceDemo { n, m, prob, trunc } => reduce_demo::<S>(*n, *m, prob, *trunc),
        Command::Bounds { graph, prob, max_states } => {
            let l = load(graph, Some(prob))?;
            let r = bounds_report::<S>(&l.graph, l.s, l.t, &prob.q(), *max_states)?;
            let res = effective_resistance(&l.graph, l.s, l.t)?;
            Ok(json!({
                "distance": r.distance,
                "lower_reliability": r.lower_reliability.emit(),
                "upper_distance": r.upper_distance.emit(),
                "effective_resistance": res.emit(),
                "lower_lyons_tau": r.lower_lyons_tau.emit(),
                "exact_T": r.exact_t.as_ref().map_or(Json::Null, Emit::emit),
                "exact_tau": r.exact_tau.as_ref().map_or(Json::Null, Emit::emit),
            }))
        }
        Command::Reliability { graph, prob } => {
            let l = load_topology(graph)?;
            let c = reliability_polynomial(&l.graph, l.s, l.t)?;
            let mut out = Map::new();
            out.insert("edges".into(), json!(c.edges()));
            out.insert("coefficients".into(), Json::Array(c.c.iter().map(emit_int).collect()));
            if let Some(prob) = prob {
                let q = S::from_ratio(&prob.q());
                out.insert("value".into(), c.evaluate(&q).emit());
                out.insert("insertion".into(), insertion_probability(&c, &q)?.emit());
            }
            Ok(Json::Object(out))
        }
        Command::Simulate { graph, prob, sim, sampler } => {
            let l = load(graph, prob.as_ref())?;
            let cfg = SimConfig::with_total(sim.seed, sim.samples, sim.replicas)?;
            let est = match sampler {
                Sampler::Spread => simulate_spread(&l.graph, l.s, l.t, &cfg)?,
                Sampler::Geometric => sample_geometric_sp(&l.graph, l.s, l.t, &cfg)?,
                Sampler::Exponential => {
                    let p = prob.as_ref().expect("validated").p();
                    sample_exponential_sp(&l.graph, l.s, l.t, &p, &cfg)?
                }
            };
            Ok(emit_estimate(&est))
        }
        Command::EquivCheck { graph, prob, sim, max_states } => {
            let l = load(graph, prob.as_ref())?;
            if l.graph.uniform_p().is_none() && l.graph.edge_count() > 0 {
                return Err(Error::NonUniformProbabilities.into());
            }
            let cfg = SimConfig::with_total(sim.seed, sim.samples, sim.replicas)?;
            let spread = simulate_spread(&l.graph, l.s, l.t, &cfg)?;
            let geo = sample_geometric_sp(&l.graph, l.s, l.t, &SimConfig { seed: !cfg.seed, ..cfg })?;
            let space = build_state_space::<f64>(&l.graph, &l.graph.singleton(l.s), l.t, *max_states)?;
            let exact = pmf_bins(&arrival_pmf_to_tail(&space, DEFAULT_TAIL, FLOAT_N_CAP).probs, spread.histogram.len());
            let two = chi_square_two_sample(&spread.histogram, &geo.histogram);
            let spread_fit = chi_square_gof(&spread.histogram, &exact);
            let geo_fit = chi_square_gof(&geo.histogram, &exact);
            let consistent = [&two, &spread_fit, &geo_fit].iter().all(|t| !t.rejects_at(EQUIV_ALPHA));
            Ok(json!({
                "exact_mean": expected_arrival(&space).value,
                "spread": emit_estimate(&spread),
                "geometric": emit_estimate(&geo),
                "two_sample": emit_test(&two),
                "spread_vs_exact": emit_test(&spread_fit),
                "geometric_vs_exact": emit_test(&geo_fit),
                "alpha": EQUIV_ALPHA,
                "consistent": consistent,
            }))
        }
        Command::ConjectureScan { graph, q_grid } => {
            let l = load_topology(graph)?;
            let report = conjecture_scan::<S>(&l.graph, l.s, l.t, q_grid)?;
            let row = |r: &arrival_core::bounds::ConjectureRow<S>| {
                json!({"q": r.q.emit(), "tau": r.tau.emit(), "T": r.t.emit(), "holds": r.holds})
            };
            Ok(json!({
                "rho": report.rho.emit(),
                "rows": report.rows.iter().map(row).collect::<Vec<_>>(),
                "violations": report.violations().map(row).collect::<Vec<_>>(),
            }))
        }
    }
}

fn reduce_demo<S: Scalar + Emit>(n: usize, m: usize, prob: &Prob, trunc: usize) -> RunResult<Json> {
    let (short, long) = (n.min(m), n.max(m));
    let q = S::from_ratio(&prob.q());
    let pn = path_ogf(short, &q, trunc)?;
    let pm = path_ogf(long, &q, trunc)?;
    let series = series_reduce(&pn, &pm)?;
    let parallel = parallel_reduce(&pn, &pm)?;
    let closed = two_paths_ogf(short, long, &q, trunc)?;
    let coeffs = |s: &PowerSeries<S>| emit_all(s.coeffs());
    let mean = |s: &PowerSeries<S>| -> RunResult<Json> {
        let e = expectation_from_survival(s, true)?;
        Ok(json!({"retained": e.retained.emit(), "estimate": e.value.emit()}))
    };
    Ok(json!({
        "series": {
            "coefficients": coeffs(&series),
            "matches_path": series == path_ogf(short + long, &q, trunc)?,
            "expectation": mean(&series)?,
        },
        "parallel": {
            "coefficients": coeffs(&parallel),
            "closed_form": coeffs(&closed),
            "matches_closed_form": parallel == closed,
            "expectation": mean(&parallel)?,
        },
    }))
}

fn emit_estimate(e: &SimEstimate) -> Json {
    let cap = e.histogram.len() - 1;
    let used = e.histogram[..cap].iter().rposition(|&c| c > 0).map_or(0, |i| i + 1);
    json!({
        "mean": e.mean,
        "stderr": e.stderr,
        "n": e.n,
        "histogram": &e.histogram[..used],
        "overflow": e.overflow(),
        "hist_cap": cap,
    })
}

fn emit_test(t: &ChiSquareTest) -> Json {
    json!({"statistic": t.statistic, "dof": t.dof, "p_value": t.p_value})
}
