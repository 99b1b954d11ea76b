//! The `conpole` command line.

mod serve;

pub use serve::serve;

use std::fs;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::env::{format_trace, make_env, validate_trace, Environment, MAX_DEPTH, TEST_SEEDS};
use crate::eval::{
    compute_stats, edit_distance_knn, embedding_knn, levenshtein, load_labeled_csv, pca_project,
    shuffled_label_chance, success_rate, synthetic_equation_set, LabeledSet, SamplingLaw, StatsConfig,
};
use crate::learner::{LearnError, LearnerKind, TrainConfig, Trainer};
use crate::nn::scorer::ValuePolicy;
use crate::nn::{load_checkpoint, save_checkpoint, Scorer};
use crate::search::{beam_search, bfs, bwas, greedy_rollout, BwasConfig, Policy, SearchOutcome, UniformPolicy};

pub const BUILD_ID: &str = concat!("conpole ", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "conpole", version, about = "Symbolic reasoning environments and contrastive policy learning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print `seed<TAB>state` for consecutive seeds.
    Gen {
        env: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Solve one problem and print its trace.
    Solve(SolveArgs),
    /// Run a learner from a JSON config.
    Train(TrainArgs),
    /// Branching factor and BFS success rate.
    Stats(StatsArgs),
    /// Success rate of a checkpoint on the test seeds.
    Eval(EvalArgs),
    /// Export embeddings and nearest-neighbour accuracies for labelled states.
    Embed(EmbedArgs),
    /// Line-delimited JSON environment service on stdin/stdout.
    Serve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Bfs,
    Beam,
    Greedy,
    Bwas,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub env: String,
    #[arg(long, conflicts_with = "seed")]
    pub state: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Method::Bfs)]
    pub method: Method,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Edge budget for BFS, node budget for BWAS.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long, default_value_t = 10)]
    pub beam_size: usize,
    #[arg(long, default_value_t = MAX_DEPTH)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 0.6)]
    pub weight: f64,
    #[arg(long, default_value_t = 100)]
    pub batch_size: usize,
    /// Print the search outcome as JSON instead of the trace.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub env: Option<String>,
    #[arg(long)]
    pub learner: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Environment-step budget.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Continue from a checkpoint written by an earlier run.
    #[arg(long)]
    pub resume: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub env: String,
    #[arg(long, default_value_t = 100_000)]
    pub states: u64,
    #[arg(long, default_value_t = 1000)]
    pub problems: u64,
    #[arg(long, default_value_t = 10_000_000)]
    pub budget: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Law::Walk)]
    pub law: Law,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Law {
    Walk,
    Start,
    Endpoint,
}

impl From<Law> for SamplingLaw {
    fn from(l: Law) -> Self {
        match l {
            Law::Walk => SamplingLaw::Walk,
            Law::Start => SamplingLaw::Start,
            Law::Endpoint => SamplingLaw::Endpoint,
        }
    }
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    pub env: String,
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub problems: u64,
    #[arg(long, value_enum, default_value_t = Method::Greedy)]
    pub method: Method,
    /// Node budget for BWAS.
    #[arg(long, default_value_t = 100_000)]
    pub budget: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// CSV with an `equation,label` header.
    #[arg(long, conflicts_with = "synthetic")]
    pub input: Option<PathBuf>,
    /// Use the generated four-section stand-in set with this seed.
    #[arg(long)]
    pub synthetic: Option<u64>,
    /// Embedding rows: `state,label,e0,e1,...`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Two-component PCA rows: `state,label,x,y`.
    #[arg(long)]
    pub pca: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub shuffles: usize,
}

/// Contents of a `train --config` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub env: String,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub checkpoint: Option<PathBuf>,
    #[serde(default)]
    pub train: TrainConfig,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failure(String),
}

impl From<LearnError> for CliError {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::InvalidConfig(m) => CliError::Usage(m),
            other => CliError::Failure(other.to_string()),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

type CliResult = Result<i32, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run(
    args: impl IntoIterator<Item = String>,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(stdout, "{e}")
            } else {
                write!(stderr, "{e}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen { env, seed, count } => cmd_gen(&env, seed, count, stdout),
        Command::Solve(a) => cmd_solve(&a, stdout, stderr),
        Command::Train(a) => cmd_train(&a, stdout, stderr),
        Command::Stats(a) => cmd_stats(&a, stdout),
        Command::Eval(a) => cmd_eval(&a, stdout, stderr),
        Command::Embed(a) => cmd_embed(&a, stdout, stderr),
        Command::Serve => serve(stdin, stdout).map(|_| EXIT_OK).map_err(failure),
    };
    match result {
        Ok(code) => code,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(CliError::Failure(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_FAILURE
        }
    }
}

fn env_or_usage(name: &str) -> Result<std::sync::Arc<dyn Environment>, CliError> {
    make_env(name).map_err(usage)
}

fn write_out(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| failure(format!("{}: {e}", p.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(failure),
    }
}

fn cmd_gen(env: &str, seed: u64, count: u64, stdout: &mut dyn Write) -> CliResult {
    let env = env_or_usage(env)?;
    for s in seed..seed.saturating_add(count) {
        writeln!(stdout, "{s}\t{}", env.generate(s)).map_err(failure)?;
    }
    Ok(EXIT_OK)
}

/// A learned policy loaded from a checkpoint, or the uniform policy.
struct LoadedPolicy {
    scorer: Option<Scorer<f32>>,
    value: bool,
}

impl LoadedPolicy {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(LoadedPolicy {
                scorer: None,
                value: false,
            });
        };
        let ckpt = load_checkpoint(path).map_err(|e| failure(format!("{}: {e}", path.display())))?;
        let value = ckpt.metadata["train"]["config"]["learner"] == "cvi";
        Ok(LoadedPolicy {
            scorer: Some(ckpt.to_scorer().map_err(failure)?),
            value,
        })
    }

    fn policy(&self) -> Box<dyn Policy + '_> {
        match &self.scorer {
            None => Box::new(UniformPolicy),
            Some(s) if self.value => Box::new(ValuePolicy(s)),
            Some(s) => Box::new(s),
        }
    }
}

fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let env = env_or_usage(&a.env)?;
    let start = match (&a.state, a.seed) {
        (Some(s), _) => env.canonicalize(s).map_err(usage)?,
        (None, Some(seed)) => env.generate(seed),
        (None, None) => return Err(usage("one of --state or --seed is required")),
    };
    if a.checkpoint.is_none() && matches!(a.method, Method::Greedy | Method::Beam | Method::Bwas) {
        writeln!(stderr, "warning: no --checkpoint given, using the uniform policy").map_err(failure)?;
    }
    let loaded = LoadedPolicy::load(a.checkpoint.as_deref())?;
    let policy = loaded.policy();
    let outcome: SearchOutcome = match a.method {
        Method::Bfs => bfs(&*env, &start, a.budget.unwrap_or(10_000_000)),
        Method::Beam => beam_search(&*env, &*policy, &start, a.beam_size, a.max_depth),
        Method::Greedy => greedy_rollout(&*env, &*policy, &start, a.max_depth),
        Method::Bwas => {
            let config = BwasConfig {
                weight: a.weight,
                batch_size: a.batch_size,
                node_budget: a.budget.unwrap_or(100_000),
                ..Default::default()
            };
            bwas(&*env, &*policy, &start, &config)
        }
    };
    if let Some(steps) = &outcome.solution {
        validate_trace(&*env, steps).map_err(failure)?;
    }
    if a.json {
        writeln!(stdout, "{}", outcome.to_json()).map_err(failure)?;
    } else if let Some(steps) = &outcome.solution {
        writeln!(stdout, "{}", format_trace(steps)).map_err(failure)?;
    }
    if outcome.solved() {
        Ok(EXIT_OK)
    } else {
        writeln!(stderr, "unsolved").map_err(failure)?;
        Ok(EXIT_FAILURE)
    }
}

fn resolve_run_config(a: &TrainArgs) -> Result<RunConfig, CliError> {
    let mut rc = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<RunConfig>(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
        }
        None => RunConfig {
            env: String::new(),
            out_dir: None,
            checkpoint: None,
            train: TrainConfig::default(),
        },
    };
    if let Some(e) = &a.env {
        rc.env = e.clone();
    }
    if let Some(l) = &a.learner {
        rc.train.learner = LearnerKind::parse(l).ok_or_else(|| usage(format!("unknown learner {l:?}")))?;
    }
    if let Some(s) = a.seed {
        rc.train.seed = s;
    }
    if let Some(s) = a.steps {
        rc.train.env_steps = s;
    }
    if let Some(o) = &a.out {
        rc.out_dir = Some(o.clone());
    }
    if let Some(r) = &a.resume {
        rc.checkpoint = Some(r.clone());
    }
    if rc.env.is_empty() {
        return Err(usage("no environment given (--env or \"env\" in the config)"));
    }
    rc.train.validate()?;
    Ok(rc)
}

fn cmd_train(a: &TrainArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let rc = resolve_run_config(a)?;
    let env = env_or_usage(&rc.env)?;
    let mut trainer = match &rc.checkpoint {
        Some(p) => {
            let ckpt = load_checkpoint(p).map_err(|e| failure(format!("{}: {e}", p.display())))?;
            let mut t = Trainer::from_checkpoint(&ckpt)?;
            t.extend_budget(rc.train.env_steps);
            t.config.max_episodes = rc.train.max_episodes;
            t
        }
        None => Trainer::new(rc.train.clone())?,
    };
    let header = serde_json::json!({ "build": BUILD_ID, "config": rc });
    let mut metrics: Box<dyn Write> = match &rc.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(failure)?;
            let path = dir.join("metrics.jsonl");
            let fresh = rc.checkpoint.is_none() || !path.exists();
            let mut f = fs::OpenOptions::new()
                .create(true)
                .append(!fresh)
                .write(true)
                .truncate(fresh)
                .open(&path)
                .map_err(failure)?;
            if fresh {
                writeln!(f, "{header}").map_err(failure)?;
            }
            Box::new(f)
        }
        None => {
            writeln!(stdout, "{header}").map_err(failure)?;
            Box::new(std::io::sink())
        }
    };
    let out_dir = rc.out_dir.clone();
    let mut lines: Vec<String> = Vec::new();
    trainer.run(&*env, |rec, t| {
        let line = serde_json::to_string(rec).expect("record serialises");
        writeln!(metrics, "{line}").map_err(|e| LearnError::Io(e.to_string()))?;
        metrics.flush().map_err(|e| LearnError::Io(e.to_string()))?;
        if let Some(dir) = &out_dir {
            let mut ckpt = t.to_checkpoint();
            ckpt.metadata["build"] = serde_json::json!(BUILD_ID);
            ckpt.metadata["env"] = serde_json::json!(rc.env);
            save_checkpoint(&dir.join("checkpoint.bin"), &ckpt)?;
        }
        lines.push(line);
        Ok(())
    })?;
    if out_dir.is_none() {
        for l in &lines {
            writeln!(stdout, "{l}").map_err(failure)?;
        }
    }
    if trainer.config.learner == LearnerKind::Bc && trainer.buffer_len() == 0 {
        writeln!(stderr, "warning: no successful rollouts; policy is untrained").map_err(failure)?;
    }
    Ok(EXIT_OK)
}

fn cmd_stats(a: &StatsArgs, stdout: &mut dyn Write) -> CliResult {
    let env = env_or_usage(&a.env)?;
    let config = StatsConfig {
        states: a.states,
        problems: a.problems,
        edge_budget: a.budget,
        seed: a.seed,
        law: a.law.into(),
    };
    let stats = compute_stats(&*env, &config);
    let doc = serde_json::json!({ "build": BUILD_ID, "config": config, "stats": stats });
    let text = serde_json::to_string_pretty(&doc).map_err(failure)? + "\n";
    write_out(a.out.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_eval(a: &EvalArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let env = env_or_usage(&a.env)?;
    if a.checkpoint.is_none() {
        writeln!(stderr, "warning: no --checkpoint given, using the uniform policy").map_err(failure)?;
    }
    let loaded = LoadedPolicy::load(a.checkpoint.as_deref())?;
    let policy = loaded.policy();
    let end = TEST_SEEDS.start + a.problems.min(TEST_SEEDS.end - TEST_SEEDS.start);
    let rate = match a.method {
        Method::Greedy => success_rate(&*env, &*policy, TEST_SEEDS.start..end),
        Method::Bwas => {
            let config = BwasConfig {
                node_budget: a.budget,
                ..Default::default()
            };
            let seeds: Vec<u64> = (TEST_SEEDS.start..end).collect();
            let solved = crate::par::par_map(&seeds, |&s| bwas(&*env, &*policy, &env.generate(s), &config).solved())
                .into_iter()
                .filter(|&b| b)
                .count();
            solved as f64 / seeds.len().max(1) as f64
        }
        Method::Beam => {
            let seeds: Vec<u64> = (TEST_SEEDS.start..end).collect();
            let solved = crate::par::par_map(&seeds, |&s| {
                beam_search(&*env, &*policy, &env.generate(s), 10, MAX_DEPTH).solved()
            })
            .into_iter()
            .filter(|&b| b)
            .count();
            solved as f64 / seeds.len().max(1) as f64
        }
        Method::Bfs => return Err(usage("eval supports greedy, beam and bwas")),
    };
    let doc = serde_json::json!({
        "build": BUILD_ID,
        "env": a.env,
        "checkpoint": a.checkpoint,
        "method": format!("{:?}", a.method).to_lowercase(),
        "problems": end - TEST_SEEDS.start,
        "success_rate": rate,
    });
    let text = serde_json::to_string_pretty(&doc).map_err(failure)? + "\n";
    write_out(a.out.as_deref(), &text, stdout)?;
    Ok(EXIT_OK)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cmd_embed(a: &EmbedArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult {
    let set: LabeledSet = match (&a.input, a.synthetic) {
        (Some(p), _) => load_labeled_csv(p).map_err(usage)?,
        (None, Some(seed)) => synthetic_equation_set(seed),
        (None, None) => return Err(usage("one of --input or --synthetic is required")),
    };
    let scorer: Scorer<f32> = match &a.checkpoint {
        Some(p) => load_checkpoint(p)
            .and_then(|c| c.to_scorer())
            .map_err(|e| failure(format!("{}: {e}", p.display())))?,
        None => {
            writeln!(stderr, "warning: no --checkpoint given, using an untrained encoder").map_err(failure)?;
            Scorer::new(Default::default())
        }
    };
    let refs: Vec<&str> = set.items.iter().map(String::as_str).collect();
    let emb = scorer.encode(&refs).map_err(failure)?.mapv(f64::from);
    if let Some(path) = &a.out {
        let mut text = String::from("state,label");
        for j in 0..emb.ncols() {
            text.push_str(&format!(",e{j}"));
        }
        text.push('\n');
        for (i, row) in emb.rows().into_iter().enumerate() {
            text.push_str(&csv_field(&set.items[i]));
            text.push(',');
            text.push_str(&csv_field(&set.labels[i]));
            for v in row {
                text.push_str(&format!(",{v}"));
            }
            text.push('\n');
        }
        write_out(Some(path), &text, stdout)?;
    }
    if let Some(path) = &a.pca {
        let p = pca_project(&emb, 2).map_err(usage)?;
        let mut text = String::from("state,label,x,y\n");
        for i in 0..emb.nrows() {
            text.push_str(&format!(
                "{},{},{},{}\n",
                csv_field(&set.items[i]),
                csv_field(&set.labels[i]),
                p.coords[[i, 0]],
                p.coords[[i, 1]]
            ));
        }
        write_out(Some(path), &text, stdout)?;
    }
    let ids = set.label_ids();
    let items = &set.items;
    let doc = serde_json::json!({
        "build": BUILD_ID,
        "checkpoint": a.checkpoint,
        "items": set.items.len(),
        "cosine_knn": embedding_knn(&emb, &ids).map_err(usage)?,
        "edit_distance_knn": edit_distance_knn(&set).map_err(usage)?,
        "shuffled_label_chance": shuffled_label_chance(
            &ids,
            &|i, j| levenshtein(&items[i], &items[j]) as f64,
            a.shuffles,
            0,
        )
        .map_err(usage)?,
    });
    writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).map_err(failure)?).map_err(failure)?;
    Ok(EXIT_OK)
}
