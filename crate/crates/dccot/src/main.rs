//! `dccot` command-line interface.
//!
//! File/stdio driven: every subcommand reads JSON or JSONL, writes JSON to
//! stdout (or `--out`), and never mutates its inputs. Exit codes: 0 success,
//! 1 error, 2 budget exhausted (`infer` only).

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::json;

use dccot::backend::{
    GenerationBackend, HttpBackend, HttpBackendConfig, ScriptRule, ScriptedBackend,
};
use dccot::config::{CounterChoice, GlobalConfig};
use dccot::counter::CounterHandle;
use dccot::eval::{
    compare_to_baseline, maj_summary, pass_at_1, render_table, CommandOracle, Delta,
    EquivalenceOracle, EvalRecord, ExactMatchOracle, MethodPoint, ReportRow,
};
use dccot::orchestrator::{run_episode, OrchestratorConfig};
use dccot::prompts;
use dccot::rlmath::presets::{all_presets, preset};
use dccot::rlmath::{
    filter_include_easy, filter_remove_easy, group_advantages, score_response, RolloutGroup,
    ScoredResponse,
};
use dccot::tags::TagConfig;
use dccot::trainseq::{build_training_sequence, DEFAULT_MAX_LEN};
use dccot::transcript::{
    parse_transcript, validate_format, Terminated, Transcript, TranscriptJson,
};

#[derive(Parser)]
#[command(name = "dccot", version, about = "Divide-and-conquer chain-of-thought toolkit")]
struct Cli {
    /// JSON config file; per-command flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run director/worker episodes against a backend.
    Infer(InferArgs),
    /// Parse flat response text into transcript JSON.
    Parse(ParseArgs),
    /// Render transcript JSON back to flat response text.
    Render(RenderArgs),
    /// Check format compliance of response text.
    Validate(ValidateArgs),
    /// Longest path length, total tokens, and degree of parallelism.
    Metrics(MetricsArgs),
    /// Build packed training sequences from transcripts.
    Batch(BatchArgs),
    /// Score responses under a stage preset.
    Reward(RewardArgs),
    /// Group-normalized advantages from rewards.
    Advantages(AdvantagesArgs),
    /// Apply a group-level data filter to scored responses.
    Filter(FilterArgs),
    /// pass@1 / maj@k evaluation over rollout records.
    Eval(EvalArgs),
    /// List or show training-stage presets.
    Presets(PresetsArgs),
}

#[derive(Args)]
struct SharedFormat {
    /// Tag set: `default` or a JSON file with the tag strings.
    #[arg(long, default_value = "default")]
    tags: String,
    /// Token counter: `whitespace`, `chars`, or `external:CMD`.
    #[arg(long)]
    counter: Option<String>,
}

#[derive(Args)]
struct InferArgs {
    /// File holding the prompt (or the bare question with `--template`).
    #[arg(long)]
    prompt_file: PathBuf,
    /// Wrap the file content as a question in a shipped prompt template.
    #[arg(long, value_enum, default_value_t = Template::None)]
    template: Template,
    #[arg(long, value_enum)]
    backend: BackendKind,
    /// Script file (JSON list of rules) for the scripted backend.
    #[arg(long)]
    script: Option<PathBuf>,
    /// Connection settings (JSON) for the HTTP backend.
    #[arg(long)]
    backend_config: Option<PathBuf>,
    /// Workers per spawn round.
    #[arg(long, default_value_t = 3)]
    workers: usize,
    /// Longest-path token budget.
    #[arg(long, default_value_t = 12_000)]
    budget: usize,
    /// Cap on spawn rounds.
    #[arg(long)]
    max_rounds: Option<usize>,
    /// Independent episodes to run concurrently.
    #[arg(long, default_value_t = 1)]
    parallel_episodes: usize,
    /// Transcript JSON destination (stdout when omitted); one line per
    /// episode.
    #[arg(long)]
    out_transcript: Option<PathBuf>,
    /// Episode trace JSON destination; one line per episode.
    #[arg(long)]
    out_trace: Option<PathBuf>,
    #[command(flatten)]
    format: SharedFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Template {
    None,
    Parallel,
    Sequential,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Scripted,
    Http,
}

#[derive(Args)]
struct ParseArgs {
    /// File with the flat response text.
    #[arg(long)]
    text: PathBuf,
    /// Prompt to record in the transcript.
    #[arg(long)]
    prompt_file: Option<PathBuf>,
    /// Termination cause to record.
    #[arg(long, value_enum, default_value_t = TerminatedFlag::Eos)]
    terminated: TerminatedFlag,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    format: SharedFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TerminatedFlag {
    Eos,
    BudgetExhausted,
}

impl From<TerminatedFlag> for Terminated {
    fn from(f: TerminatedFlag) -> Self {
        match f {
            TerminatedFlag::Eos => Terminated::Eos,
            TerminatedFlag::BudgetExhausted => Terminated::BudgetExhausted,
        }
    }
}

#[derive(Args)]
struct RenderArgs {
    /// Transcript JSON file.
    #[arg(long)]
    transcript: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    format: SharedFormat,
}

#[derive(Args)]
struct ValidateArgs {
    /// File with the flat response text.
    #[arg(long)]
    text: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    format: SharedFormat,
}

#[derive(Args)]
struct MetricsArgs {
    /// Transcript JSON file.
    #[arg(long)]
    transcript: PathBuf,
    #[command(flatten)]
    format: SharedFormat,
}

#[derive(Args)]
struct BatchArgs {
    /// Transcript JSONL file, one response per line.
    #[arg(long)]
    transcripts: PathBuf,
    /// Output directory for the per-sequence artifacts.
    #[arg(long)]
    out: PathBuf,
    /// Length cap; longer sequences are flagged in their artifact.
    #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
    max_len: usize,
    #[command(flatten)]
    format: SharedFormat,
}

#[derive(Args)]
struct RewardArgs {
    /// Scored-response JSONL: {problem_id, correct, format_ok, lpl}.
    #[arg(long)]
    scored: PathBuf,
    /// Stage preset name (see `dccot presets`).
    #[arg(long)]
    preset: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdvantagesArgs {
    /// Reward JSONL grouped by problem: {problem_id, reward}.
    #[arg(long)]
    groups: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FilterArgs {
    /// Scored-response JSONL: {problem_id, correct, format_ok, lpl}.
    #[arg(long)]
    scored: PathBuf,
    #[arg(long, value_enum)]
    strategy: StrategyFlag,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyFlag {
    IncludeEasy,
    RemoveEasy,
}

#[derive(Args)]
struct EvalArgs {
    /// Rollout records JSONL: {problem_id, responses: [...]}.
    #[arg(long)]
    records: PathBuf,
    #[arg(long, value_enum)]
    mode: EvalMode,
    /// Votes per subset in maj mode.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Answer equivalence: `exact` or `cmd:PROGRAM ARGS`.
    #[arg(long, default_value = "exact")]
    oracle: String,
    /// Baseline operating point `ACC_PCT,LPL` for delta columns.
    #[arg(long)]
    baseline: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalMode {
    Pass1,
    Maj3,
}

#[derive(Args)]
struct PresetsArgs {
    /// Show one preset in full instead of listing names.
    #[arg(long)]
    show: Option<String>,
}

/// Scored-response JSONL line.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ScoredLine {
    problem_id: String,
    correct: bool,
    format_ok: bool,
    lpl: usize,
}

/// Reward JSONL line.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RewardLine {
    problem_id: String,
    reward: f64,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(message) => {
            eprintln!("error: {message}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<i32, String> {
    let global = match &cli.config {
        Some(path) => GlobalConfig::load(path)?,
        None => GlobalConfig::default(),
    };
    match cli.command {
        Cmd::Infer(args) => cmd_infer(&global, args),
        Cmd::Parse(args) => cmd_parse(&global, args),
        Cmd::Render(args) => cmd_render(&global, args),
        Cmd::Validate(args) => cmd_validate(&global, args),
        Cmd::Metrics(args) => cmd_metrics(&global, args),
        Cmd::Batch(args) => cmd_batch(&global, args),
        Cmd::Reward(args) => cmd_reward(args),
        Cmd::Advantages(args) => cmd_advantages(args),
        Cmd::Filter(args) => cmd_filter(args),
        Cmd::Eval(args) => cmd_eval(args),
        Cmd::Presets(args) => cmd_presets(args),
    }
}

fn resolve_tags(global: &GlobalConfig, flag: &str) -> Result<TagConfig, String> {
    let tags = if flag == "default" {
        global.tags.clone()
    } else {
        let text =
            std::fs::read_to_string(flag).map_err(|e| format!("cannot read tags {flag}: {e}"))?;
        serde_json::from_str(&text).map_err(|e| format!("invalid tags {flag}: {e}"))?
    };
    tags.validate().map_err(|e| e.to_string())?;
    Ok(tags)
}

fn resolve_counter(global: &GlobalConfig, flag: &Option<String>) -> Result<CounterHandle, String> {
    let choice = match flag {
        Some(f) => CounterChoice::from_flag(f)?,
        None => global.token_counter.clone(),
    };
    choice.build()
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, String> {
    let text = read_file(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line).map_err(|e| format!("{}:{}: {e}", path.display(), i + 1))
        })
        .collect()
}

/// Writes to the file, or to stdout when no path is given.
fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            std::fs::write(path, content).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|e| format!("cannot write stdout: {e}")),
    }
}

fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), String> {
    let mut text = serde_json::to_string(value).map_err(|e| e.to_string())?;
    text.push('\n');
    emit(out, &text)
}

fn load_script(path: &Path) -> Result<Vec<ScriptRule>, String> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| format!("invalid script {}: {e}", path.display()))
}

fn cmd_infer(global: &GlobalConfig, args: InferArgs) -> Result<i32, String> {
    let tags = resolve_tags(global, &args.format.tags)?;
    let counter = resolve_counter(global, &args.format.counter)?;

    let raw = read_file(&args.prompt_file)?;
    let content = raw.trim_end_matches(['\n', '\r']);
    let prompt = match args.template {
        Template::None => content.to_string(),
        Template::Parallel => prompts::parallel_prompt(content),
        Template::Sequential => prompts::sequential_prompt(content),
    };

    let backend: Box<dyn GenerationBackend> = match args.backend {
        BackendKind::Scripted => {
            let script_path = args
                .script
                .as_ref()
                .ok_or("the scripted backend needs --script FILE")?;
            let rules = load_script(script_path)?;
            Box::new(ScriptedBackend::new(rules, &tags, counter.clone()))
        }
        BackendKind::Http => {
            let cfg = match &args.backend_config {
                Some(path) => serde_json::from_str::<HttpBackendConfig>(&read_file(path)?)
                    .map_err(|e| format!("invalid backend config: {e}"))?,
                None => global.http.clone().unwrap_or_default(),
            }
            .with_env_overrides();
            Box::new(HttpBackend::new(cfg, counter.clone()).map_err(|e| e.to_string())?)
        }
    };

    let cfg = OrchestratorConfig {
        num_workers: args.workers,
        budget: args.budget,
        tags,
        max_rounds: args.max_rounds,
        ..OrchestratorConfig::default()
    };

    let episodes = args.parallel_episodes.max(1);
    let results: Vec<_> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..episodes)
            .map(|_| scope.spawn(|| run_episode(backend.as_ref(), &prompt, &cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("episode thread"))
            .collect()
    });

    let mut transcripts = String::new();
    let mut traces = String::new();
    let mut exhausted = false;
    for result in results {
        let (transcript, trace) = result.map_err(|e| e.to_string())?;
        exhausted |= transcript.terminated == Terminated::BudgetExhausted;
        transcripts
            .push_str(&serde_json::to_string(&transcript.to_json()).map_err(|e| e.to_string())?);
        transcripts.push('\n');
        traces.push_str(&serde_json::to_string(&trace).map_err(|e| e.to_string())?);
        traces.push('\n');
    }
    emit(&args.out_transcript, &transcripts)?;
    if args.out_trace.is_some() {
        emit(&args.out_trace, &traces)?;
    }
    Ok(if exhausted { 2 } else { 0 })
}

fn cmd_parse(global: &GlobalConfig, args: ParseArgs) -> Result<i32, String> {
    let tags = resolve_tags(global, &args.format.tags)?;
    let counter = resolve_counter(global, &args.format.counter)?;
    let text = read_file(&args.text)?;
    let prompt = match &args.prompt_file {
        Some(p) => read_file(p)?,
        None => String::new(),
    };
    let t = parse_transcript(&text, &tags, counter.as_ref())
        .map_err(|e| e.to_string())?
        .with_prompt(prompt)
        .with_terminated(args.terminated.into());
    emit_json(&args.out, &t.to_json())?;
    Ok(0)
}

fn load_transcript(
    global: &GlobalConfig,
    format: &SharedFormat,
    path: &Path,
) -> Result<(Transcript, TagConfig, CounterHandle), String> {
    let tags = resolve_tags(global, &format.tags)?;
    let counter = resolve_counter(global, &format.counter)?;
    let json: TranscriptJson =
        serde_json::from_str(&read_file(path)?).map_err(|e| format!("invalid transcript: {e}"))?;
    let t = Transcript::from_json(&json, counter.as_ref())?;
    Ok((t, tags, counter))
}

fn cmd_render(global: &GlobalConfig, args: RenderArgs) -> Result<i32, String> {
    let (t, tags, _) = load_transcript(global, &args.format, &args.transcript)?;
    emit(&args.out, &t.render(&tags))?;
    Ok(0)
}

fn cmd_validate(global: &GlobalConfig, args: ValidateArgs) -> Result<i32, String> {
    let tags = resolve_tags(global, &args.format.tags)?;
    let text = read_file(&args.text)?;
    let report = validate_format(&text, &tags);
    emit_json(&args.out, &report)?;
    Ok(0)
}

fn cmd_metrics(global: &GlobalConfig, args: MetricsArgs) -> Result<i32, String> {
    let (t, _, _) = load_transcript(global, &args.format, &args.transcript)?;
    let lpl = t.longest_path_length();
    let total = t.total_tokens();
    let dp = t
        .degree_of_parallelism()
        .ok()
        .map(|v| (v * 1000.0).round() / 1000.0);
    emit_json(&None, &json!({ "lpl": lpl, "total": total, "dp": dp }))?;
    Ok(0)
}

fn cmd_batch(global: &GlobalConfig, args: BatchArgs) -> Result<i32, String> {
    let tags = resolve_tags(global, &args.format.tags)?;
    let counter = resolve_counter(global, &args.format.counter)?;
    let lines: Vec<TranscriptJson> = read_jsonl(&args.transcripts)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| format!("cannot create {}: {e}", args.out.display()))?;

    let mut flagged = 0usize;
    for (i, line) in lines.iter().enumerate() {
        let t = Transcript::from_json(line, counter.as_ref())?;
        let seq = build_training_sequence(&t, &tags, counter.as_ref());
        let artifact = seq.to_json(args.max_len);
        if artifact.over_max_len {
            flagged += 1;
        }
        let path = args.out.join(format!("seq_{i:06}.json"));
        let text = serde_json::to_string(&artifact).map_err(|e| e.to_string())?;
        std::fs::write(&path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?;
    }
    emit_json(
        &None,
        &json!({
            "sequences": lines.len(),
            "flagged_over_max": flagged,
            "out_dir": args.out.display().to_string(),
        }),
    )?;
    Ok(0)
}

fn cmd_reward(args: RewardArgs) -> Result<i32, String> {
    let stage = preset(&args.preset)
        .ok_or_else(|| format!("unknown preset `{}` (try `dccot presets`)", args.preset))?;
    let lines: Vec<ScoredLine> = read_jsonl(&args.scored)?;
    let mut out = String::new();
    for line in &lines {
        let scored = ScoredResponse {
            correct: line.correct,
            format_ok: line.format_ok,
            lpl: line.lpl,
        };
        let reward = score_response(&scored, &stage.reward);
        out.push_str(
            &serde_json::to_string(&RewardLine {
                problem_id: line.problem_id.clone(),
                reward,
            })
            .map_err(|e| e.to_string())?,
        );
        out.push('\n');
    }
    emit(&args.out, &out)?;
    Ok(0)
}

fn cmd_advantages(args: AdvantagesArgs) -> Result<i32, String> {
    let lines: Vec<RewardLine> = read_jsonl(&args.groups)?;
    // Group by problem in first-appearance order.
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<f64>> = HashMap::new();
    for line in &lines {
        if !groups.contains_key(&line.problem_id) {
            order.push(line.problem_id.clone());
        }
        groups
            .entry(line.problem_id.clone())
            .or_default()
            .push(line.reward);
    }

    let mut out = String::new();
    let mut skipped = 0usize;
    for id in &order {
        let rewards = &groups[id];
        match group_advantages(rewards) {
            Ok(advantages) => {
                for advantage in advantages {
                    out.push_str(
                        &serde_json::to_string(&json!({
                            "problem_id": id,
                            "advantage": advantage,
                        }))
                        .map_err(|e| e.to_string())?,
                    );
                    out.push('\n');
                }
            }
            Err(_) => skipped += 1,
        }
    }
    if skipped > 0 {
        eprintln!("skipped {skipped} group(s) with constant or too-few rewards");
    }
    emit(&args.out, &out)?;
    Ok(0)
}

fn cmd_filter(args: FilterArgs) -> Result<i32, String> {
    let lines: Vec<ScoredLine> = read_jsonl(&args.scored)?;
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<ScoredLine>> = HashMap::new();
    for line in lines {
        if !groups.contains_key(&line.problem_id) {
            order.push(line.problem_id.clone());
        }
        groups.entry(line.problem_id.clone()).or_default().push(line);
    }

    let mut out = String::new();
    for id in &order {
        let members = &groups[id];
        let group = RolloutGroup {
            problem_id: id.clone(),
            responses: members
                .iter()
                .map(|l| ScoredResponse {
                    correct: l.correct,
                    format_ok: l.format_ok,
                    lpl: l.lpl,
                })
                .collect(),
        };
        let keep = match args.strategy {
            StrategyFlag::IncludeEasy => filter_include_easy(&group),
            StrategyFlag::RemoveEasy => filter_remove_easy(&group),
        };
        if keep {
            for line in members {
                out.push_str(&serde_json::to_string(line).map_err(|e| e.to_string())?);
                out.push('\n');
            }
        }
    }
    emit(&args.out, &out)?;
    Ok(0)
}

fn parse_baseline(flag: &str) -> Result<MethodPoint, String> {
    let parts: Vec<&str> = flag.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("--baseline expects `ACC_PCT,LPL`, got `{flag}`"));
    }
    Ok(MethodPoint {
        accuracy_pct: parts[0]
            .trim()
            .parse()
            .map_err(|e| format!("bad baseline accuracy: {e}"))?,
        lpl: parts[1]
            .trim()
            .parse()
            .map_err(|e| format!("bad baseline lpl: {e}"))?,
    })
}

fn cmd_eval(args: EvalArgs) -> Result<i32, String> {
    let records: Vec<EvalRecord> = read_jsonl(&args.records)?;
    let oracle: Box<dyn EquivalenceOracle> = if args.oracle == "exact" {
        Box::new(ExactMatchOracle)
    } else if let Some(cmd) = args.oracle.strip_prefix("cmd:") {
        Box::new(
            CommandOracle::from_command_line(cmd)
                .ok_or_else(|| format!("empty oracle command `{}`", args.oracle))?,
        )
    } else {
        return Err(format!(
            "unknown oracle `{}` (expected `exact` or `cmd:PROGRAM`)",
            args.oracle
        ));
    };

    let (label, summary, per_problem) = match args.mode {
        EvalMode::Pass1 => {
            let s = pass_at_1(&records).map_err(|e| e.to_string())?;
            ("pass1".to_string(), s, None)
        }
        EvalMode::Maj3 => {
            let (s, scores) =
                maj_summary(&records, oracle.as_ref(), args.k).map_err(|e| e.to_string())?;
            (format!("maj{}", args.k), s, Some(scores))
        }
    };

    let point = MethodPoint {
        accuracy_pct: summary.accuracy * 100.0,
        lpl: summary.lpl,
    };
    let baseline = args.baseline.as_deref().map(parse_baseline).transpose()?;
    let delta: Option<Delta> = baseline.map(|b| compare_to_baseline(point, b));

    let mut report = json!({
        "mode": label,
        "problems": records.len(),
        "accuracy": summary.accuracy,
        "accuracy_pct": point.accuracy_pct,
        "lpl": summary.lpl,
    });
    if let Some(scores) = &per_problem {
        report["sampled_problems"] = json!(scores.iter().filter(|s| s.sampled).count());
        report["per_problem"] = serde_json::to_value(scores).map_err(|e| e.to_string())?;
    }
    if let (Some(b), Some(d)) = (baseline, delta) {
        report["baseline"] = serde_json::to_value(b).map_err(|e| e.to_string())?;
        report["delta"] = serde_json::to_value(d).map_err(|e| e.to_string())?;
    }
    emit_json(&args.out, &report)?;

    // Human-readable table on stderr so stdout stays machine-parseable.
    let mut rows = Vec::new();
    if let Some(b) = baseline {
        rows.push(ReportRow {
            label: "baseline".to_string(),
            point: b,
            delta: None,
        });
    }
    rows.push(ReportRow {
        label,
        point,
        delta,
    });
    eprint!("{}", render_table(&rows));
    Ok(0)
}

fn cmd_presets(args: PresetsArgs) -> Result<i32, String> {
    match &args.show {
        Some(name) => {
            let stage = preset(name)
                .ok_or_else(|| format!("unknown preset `{name}` (try `dccot presets`)"))?;
            emit_json(&None, &stage)?;
        }
        None => {
            let names: Vec<&str> = all_presets().iter().map(|p| p.name).collect();
            emit_json(&None, &json!({ "presets": names }))?;
        }
    }
    Ok(0)
}
