//! Command-line experiment runner.
//!
//! Each command prints a CSV table on stdout and, with `--out DIR`, writes
//! `DIR/<command>.json` (full resolved config, seed and result) and
//! `DIR/<command>.csv`. A `--config FILE` JSON object overrides flags field by
//! field. Exit codes: 0 ok, 1 failure or failed audit, 2 usage, 3 cap hit.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::commsim::{dist_cc, equality_protocol, protocol_error, ErrorMode, EvalTable};
use crate::concepts::{make_builtin, vc_dimension, Builtin, ConceptClass};
use crate::distribution::{FiniteDistribution, PairDistribution};
use crate::dpaudit::{
    audit, AuditMode, AuditReport, EmMechanism, LeakyMechanism, LineLearnerMechanism, LineReleaseMechanism,
    RandomizedResponse, Verdict,
};
use crate::dplearn::{
    dist_specific_learner, label_private_learner, line_boosted_learner, line_overall_learner, line_setting,
    pac_evaluate, stability_probs, DistOracle, Hypothesis, LabelPrivateConfig, LabeledSample, LineInput,
    LineLearnerConfig, PacTask, SampleOracle,
};
use crate::error::{Error, Result};
use crate::mistaketree::{ldim, validate_tree};
use crate::rational::{fmt_q, parse_q, to_f64, Q};
use crate::repdim::{max_packing_and_duality, min_cover, IMPROPER_EXACT_MAX_DOMAIN};
use crate::stats::rng_stream;

#[derive(Parser, Debug)]
#[command(name = "dpcc", version, about = "Private learning and one-way communication experiments")]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Directory for `<command>.json` and `<command>.csv`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON object whose fields override the flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// VC and Littlestone dimension of a built-in class.
    Dims(ClassArgs),
    /// Littlestone dimension with a validated witness tree.
    Ldim(ClassArgs),
    /// One-way communication cost of augmented index, Eval_C or equality.
    Cc(CcArgs),
    /// Representation dimension under the uniform distribution.
    Repdim(CoverArgs),
    /// Minimum cover, greedy packing and their duality check.
    Cover(CoverArgs),
    /// Private learner for lines over Z_p^2.
    LearnLine(LineArgs),
    /// Private learner with a known input distribution.
    LearnDist(DistArgs),
    /// Label-private learner.
    LearnLabel(LabelArgs),
    /// Privacy audit of a mechanism on neighboring inputs.
    Audit(AuditArgs),
    /// None/One/Two event probabilities and their lower bounds.
    Stability(StabilityArgs),
    /// Dimensions and covers of every built-in class at small size.
    Report(ReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Dims(_) => "dims",
            Command::Ldim(_) => "ldim",
            Command::Cc(_) => "cc",
            Command::Repdim(_) => "repdim",
            Command::Cover(_) => "cover",
            Command::LearnLine(_) => "learn-line",
            Command::LearnDist(_) => "learn-dist",
            Command::LearnLabel(_) => "learn-label",
            Command::Audit(_) => "audit",
            Command::Stability(_) => "stability",
            Command::Report(_) => "report",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassKind {
    Point,
    Thr,
    Line,
    Box,
    Hs,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ClassArgs {
    #[arg(long, value_enum, default_value = "thr")]
    pub class: ClassKind,
    /// Bits per coordinate.
    #[arg(long, default_value_t = 2)]
    pub b: u32,
    /// Dimension (boxes, halfspaces, augmented index).
    #[arg(long, default_value_t = 2)]
    pub d: u32,
    /// Prime modulus for lines.
    #[arg(long, default_value_t = 5)]
    pub p: u64,
}

impl ClassArgs {
    pub fn builtin(&self) -> Builtin {
        match self.class {
            ClassKind::Point => Builtin::Point { b: self.b },
            ClassKind::Thr => Builtin::Threshold { b: self.b },
            ClassKind::Line => Builtin::Line { p: self.p },
            ClassKind::Box => Builtin::Box { b: self.b, d: self.d },
            ClassKind::Hs => Builtin::Halfspace { b: self.b, d: self.d },
        }
    }

    pub fn build(&self) -> Result<ConceptClass> {
        make_builtin(self.builtin())
    }

    fn label(&self) -> String {
        match self.class {
            ClassKind::Point => format!("point(b={})", self.b),
            ClassKind::Thr => format!("thr(b={})", self.b),
            ClassKind::Line => format!("line(p={})", self.p),
            ClassKind::Box => format!("box(b={},d={})", self.b, self.d),
            ClassKind::Hs => format!("hs(b={},d={})", self.b, self.d),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Augindex,
    Eval,
    Equality,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CcArgs {
    #[arg(long, value_enum, default_value = "augindex")]
    pub problem: Problem,
    #[command(flatten)]
    #[serde(flatten)]
    pub class: ClassArgs,
    /// Error allowed, as a decimal or fraction.
    #[arg(long, default_value = "0")]
    pub eps: String,
    /// Repetitions for the equality protocol.
    #[arg(long, default_value_t = 1)]
    pub k: u32,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CoverArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub class: ClassArgs,
    #[arg(long, default_value = "1/4")]
    pub eps: String,
    #[arg(long, default_value = "1/4")]
    pub delta: String,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LineMode {
    Overall,
    Boosted,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LineArgs {
    #[arg(long, default_value_t = 11)]
    pub p: u64,
    #[arg(long, default_value_t = 0.2)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.05)]
    pub beta: f64,
    /// Replace the 6/delta width of the range of log2 t.
    #[arg(long)]
    pub scale_range: Option<u32>,
    /// Replace the number of subsamples.
    #[arg(long)]
    pub scale_ell: Option<usize>,
    #[arg(long, value_enum, default_value = "boosted")]
    pub mode: LineMode,
    /// Target line y = a x + b.
    #[arg(long, default_value_t = 1)]
    pub a: u64,
    #[arg(long = "line-b", default_value_t = 0)]
    #[serde(rename = "line_b")]
    pub line_b: u64,
    #[arg(long, value_enum, default_value = "uniform")]
    pub input: InputKind,
    /// Number of seeded runs; more than one reports the success rate.
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputKind {
    Uniform,
    LineHeavy,
    PointHeavy,
}

impl From<InputKind> for LineInput {
    fn from(k: InputKind) -> Self {
        match k {
            InputKind::Uniform => LineInput::Uniform,
            InputKind::LineHeavy => LineInput::LineHeavy,
            InputKind::PointHeavy => LineInput::PointHeavy,
        }
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DistArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub class: ClassArgs,
    /// Index of the target concept.
    #[arg(long, default_value_t = 0)]
    pub target: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Labeled samples; defaults to the selection-size formula.
    #[arg(long)]
    pub n: Option<usize>,
    /// Accuracy for the success rate.
    #[arg(long, default_value = "1/4")]
    pub eps: String,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LabelArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub dist: DistArgs,
    /// Unlabeled first-phase samples.
    #[arg(long)]
    pub t: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mech {
    Em,
    Rr,
    Leak,
    Release,
    Line,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Mc,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct AuditArgs {
    #[arg(long, value_enum, default_value = "em")]
    pub mech: Mech,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    /// Flip probability of randomized response.
    #[arg(long, default_value_t = 0.25)]
    pub flip: f64,
    /// Quality vectors for the exponential mechanism, `10,8:9,8`.
    #[arg(long, default_value = "10,8:9,8")]
    pub qualities: String,
    /// Parameters of the line learner (mech = release or line).
    #[arg(long, default_value_t = 5)]
    pub p: u64,
    #[arg(long, default_value_t = 0.4)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long = "learner-beta", default_value_t = 0.05)]
    pub learner_beta: f64,
    #[arg(long, default_value = "2")]
    pub scale_range: Option<u32>,
    #[arg(long, default_value = "12")]
    pub scale_ell: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct StabilityArgs {
    #[arg(long)]
    pub r: f64,
    /// Comma-separated masses of the positive points.
    #[arg(long, default_value = "")]
    pub atoms: String,
    #[arg(long)]
    pub t: u64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ReportArgs {
    #[arg(long, default_value = "1/4")]
    pub eps: String,
}

/// Tabular plus structured result of one command.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub command: &'static str,
    pub json: Value,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Nonzero exit code for a completed run that should still fail (audits).
    pub status: i32,
}

impl Output {
    pub fn csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.iter().map(|c| csv_cell(c)).collect::<Vec<_>>().join(","));
            s.push('\n');
        }
        s
    }

    pub fn json_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
        s.push('\n');
        s
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(format!("{}.json", self.command)), self.json_text())?;
        fs::write(dir.join(format!("{}.csv", self.command)), self.csv())?;
        Ok(())
    }
}

fn csv_cell(c: &str) -> String {
    if c.contains([',', '"', '\n']) {
        format!("\"{}\"", c.replace('"', "\"\""))
    } else {
        c.to_string()
    }
}

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

/// Applies the fields of `overrides` to `args`.
fn merge<T: Serialize + DeserializeOwned>(args: &T, overrides: &Map<String, Value>) -> Result<T> {
    let mut v = serde_json::to_value(args)?;
    if let Value::Object(m) = &mut v {
        for (k, x) in overrides {
            if k != "seed" {
                m.insert(k.clone(), x.clone());
            }
        }
    }
    serde_json::from_value(v).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
}

fn apply_config(cmd: &Command, overrides: &Map<String, Value>) -> Result<Command> {
    Ok(match cmd {
        Command::Dims(a) => Command::Dims(merge(a, overrides)?),
        Command::Ldim(a) => Command::Ldim(merge(a, overrides)?),
        Command::Cc(a) => Command::Cc(merge(a, overrides)?),
        Command::Repdim(a) => Command::Repdim(merge(a, overrides)?),
        Command::Cover(a) => Command::Cover(merge(a, overrides)?),
        Command::LearnLine(a) => Command::LearnLine(merge(a, overrides)?),
        Command::LearnDist(a) => Command::LearnDist(merge(a, overrides)?),
        Command::LearnLabel(a) => Command::LearnLabel(merge(a, overrides)?),
        Command::Audit(a) => Command::Audit(merge(a, overrides)?),
        Command::Stability(a) => Command::Stability(merge(a, overrides)?),
        Command::Report(a) => Command::Report(merge(a, overrides)?),
    })
}

fn config_value(cmd: &Command) -> Value {
    let v = match cmd {
        Command::Dims(a) | Command::Ldim(a) => serde_json::to_value(a),
        Command::Cc(a) => serde_json::to_value(a),
        Command::Repdim(a) | Command::Cover(a) => serde_json::to_value(a),
        Command::LearnLine(a) => serde_json::to_value(a),
        Command::LearnDist(a) => serde_json::to_value(a),
        Command::LearnLabel(a) => serde_json::to_value(a),
        Command::Audit(a) => serde_json::to_value(a),
        Command::Stability(a) => serde_json::to_value(a),
        Command::Report(a) => serde_json::to_value(a),
    };
    v.expect("arguments serialize")
}

/// Runs one resolved command.
pub fn execute(cmd: &Command, seed: u64) -> Result<Output> {
    let (result, header, rows, flags, status) = match cmd {
        Command::Dims(a) => dims(a)?,
        Command::Ldim(a) => ldim_cmd(a)?,
        Command::Cc(a) => cc(a)?,
        Command::Repdim(a) => repdim(a)?,
        Command::Cover(a) => cover(a)?,
        Command::LearnLine(a) => learn_line(a, seed)?,
        Command::LearnDist(a) => learn_dist(a, seed)?,
        Command::LearnLabel(a) => learn_label(a, seed)?,
        Command::Audit(a) => audit_cmd(a, seed)?,
        Command::Stability(a) => stability(a)?,
        Command::Report(a) => report(a)?,
    };
    let json = json!({
        "command": cmd.name(),
        "config": config_value(cmd),
        "seed": seed,
        "deviation_flags": flags,
        "result": result,
    });
    Ok(Output {
        command: cmd.name(),
        json,
        header,
        rows,
        status,
    })
}

type Parts = (Value, Vec<String>, Vec<Vec<String>>, Vec<String>, i32);

fn ok(result: Value, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<Parts> {
    Ok((result, header, rows, Vec::new(), 0))
}

fn dims(a: &ClassArgs) -> Result<Parts> {
    let c = a.build()?;
    let vc = vc_dimension(&c)?;
    let (l, _) = ldim(&c)?;
    ok(
        json!({"class": a.label(), "domain_size": c.domain_size(), "concepts": c.len(),
               "vc": vc.dimension, "vc_witness": vc.witness, "ldim": l}),
        header(&["class", "domain_size", "concepts", "vc", "ldim"]),
        vec![vec![a.label(), c.domain_size().to_string(), c.len().to_string(), vc.dimension.to_string(), l.to_string()]],
    )
}

fn ldim_cmd(a: &ClassArgs) -> Result<Parts> {
    let c = a.build()?;
    let (l, tree) = ldim(&c)?;
    let check = validate_tree(&tree, &c)?;
    ok(
        json!({"class": a.label(), "ldim": l, "tree": tree, "valid": check.valid, "complete": check.complete}),
        header(&["class", "ldim", "tree_valid", "tree_complete", "tree_depth"]),
        vec![vec![a.label(), l.to_string(), check.valid.to_string(), check.complete.to_string(), check.depth.to_string()]],
    )
}

fn q_arg(s: &str) -> Result<Q> {
    parse_q(s)
}

fn cc(a: &CcArgs) -> Result<Parts> {
    let eps = q_arg(&a.eps)?;
    match a.problem {
        Problem::Augindex | Problem::Eval => {
            let (name, table) = if a.problem == Problem::Augindex {
                (format!("augindex(d={})", a.class.d), EvalTable::augindex(a.class.d)?)
            } else {
                (format!("eval[{}]", a.class.label()), EvalTable::from_class(&a.class.build()?))
            };
            let mu = table.uniform_mu()?;
            let cost = dist_cc(&table, &mu, &eps)?;
            ok(
                json!({"problem": name, "eps": fmt_q(&eps), "dist_cc": cost}),
                header(&["problem", "eps", "dist_cc"]),
                vec![vec![name, fmt_q(&eps), cost.to_string()]],
            )
        }
        Problem::Equality => {
            let b = a.class.b;
            let p = equality_protocol(b, a.k)?;
            let n = 1usize << b;
            let table = EvalTable::new(n, n, (0..n * n).map(|i| Some(i / n == i % n)).collect())?;
            let worst = protocol_error(&p, &table, ErrorMode::WorstCase, None)?;
            let uniform = PairDistribution::uniform(n, n)?;
            let avg = protocol_error(&p, &table, ErrorMode::Distributional(&uniform), None)?;
            let (w, u) = (worst.exact().cloned(), avg.exact().cloned());
            let show = |x: &Option<Q>| x.as_ref().map(fmt_q).unwrap_or_default();
            let name = format!("equality(b={b},k={})", a.k);
            ok(
                json!({"problem": name, "cost_bits": worst.cost_bits, "worst_error": worst, "uniform_error": avg}),
                header(&["problem", "cost_bits", "worst_error", "uniform_error"]),
                vec![vec![name, worst.cost_bits.to_string(), show(&w), show(&u)]],
            )
        }
    }
}

fn uniform_for(c: &ConceptClass) -> Result<FiniteDistribution> {
    FiniteDistribution::uniform(c.domain_size())
}

fn repdim(a: &CoverArgs) -> Result<Parts> {
    let c = a.class.build()?;
    let d = uniform_for(&c)?;
    let eps = q_arg(&a.eps)?;
    let proper = min_cover(&c, &d, &eps, true, true)?;
    let improper = if c.domain_size() <= IMPROPER_EXACT_MAX_DOMAIN {
        Some(min_cover(&c, &d, &eps, false, false)?)
    } else {
        None
    };
    let log_c = (c.len() as f64).log2();
    let imp_dim = improper.as_ref().map(|h| h.dimension());
    ok(
        json!({"class": a.class.label(), "eps": fmt_q(&eps), "log2_class": log_c,
               "proper_cover": proper.len(), "proper_dimension": proper.dimension(), "proper_optimal": proper.optimal,
               "improper_cover": improper.as_ref().map(|h| h.len()), "improper_dimension": imp_dim}),
        header(&["class", "eps", "log2_class", "proper_cover", "proper_dimension", "improper_dimension"]),
        vec![vec![
            a.class.label(),
            fmt_q(&eps),
            log_c.to_string(),
            proper.len().to_string(),
            proper.dimension().to_string(),
            imp_dim.map(|x| x.to_string()).unwrap_or_default(),
        ]],
    )
}

fn cover(a: &CoverArgs) -> Result<Parts> {
    let c = a.class.build()?;
    let d = uniform_for(&c)?;
    let (eps, delta) = (q_arg(&a.eps)?, q_arg(&a.delta)?);
    let rep = max_packing_and_duality(&c, &d, &eps, &delta, None)?;
    ok(
        json!({"class": a.class.label(), "eps": fmt_q(&eps), "delta": fmt_q(&delta), "report": rep}),
        header(&["class", "eps", "packing", "packing_is_cover", "min_cover", "min_cover_optimal"]),
        vec![vec![
            a.class.label(),
            fmt_q(&eps),
            rep.packing.len().to_string(),
            rep.packing_is_cover.to_string(),
            rep.min_cover_size.to_string(),
            rep.min_cover_optimal.to_string(),
        ]],
    )
}

fn error_fields(err: &Q) -> (String, String) {
    (err.numer().to_string(), err.denom().to_string())
}

fn learn_line(a: &LineArgs, seed: u64) -> Result<Parts> {
    let mut cfg = LineLearnerConfig::new(a.p, a.eps, a.delta, a.alpha, a.beta);
    cfg.range_width_override = a.scale_range;
    cfg.ell_override = a.scale_ell;
    cfg.validate()?;
    let (target, d) = line_setting(a.p, a.a, a.line_b, a.input.into())?;
    let n = d.len();
    let task = PacTask::realizable(&d, &target)?;
    let flags = cfg.deviation_flags();
    let run = |oracle: &mut DistOracle, rng: &mut rand_chacha::ChaCha8Rng| -> Result<Hypothesis> {
        Ok(match a.mode {
            LineMode::Overall => line_overall_learner(&cfg, oracle, rng)?.hypothesis,
            LineMode::Boosted => line_boosted_learner(&cfg, oracle, rng)?.hypothesis,
        })
    };
    if a.trials <= 1 {
        let mut rng = rng_stream(seed, 0);
        let mut oracle = task.oracle();
        let h = run(&mut oracle, &mut rng)?;
        let err = task.error(&h.to_row(n))?;
        let (num, den) = error_fields(&err);
        let result = json!({"hypothesis": h, "exact_error_num": num, "exact_error_den": den,
                            "error": to_f64(&err), "samples_drawn": oracle.drawn()});
        let row = vec![h.to_string(), num, den, oracle.drawn().to_string()];
        return Ok((result, header(&["hypothesis", "error_num", "error_den", "samples"]), vec![row], flags, 0));
    }
    let eps_q = parse_q(&a.eps.to_string())?;
    let rep = pac_evaluate(|o, r| run(o, r).map(|h| h.to_row(n)), &task, a.trials, &eps_q, seed)?;
    let row = vec![
        a.trials.to_string(),
        rep.successes.to_string(),
        rep.success_rate.to_string(),
        rep.ci.low.to_string(),
        rep.ci.high.to_string(),
    ];
    Ok((
        json!({"pac": rep}),
        header(&["trials", "successes", "success_rate", "ci_low", "ci_high"]),
        vec![row],
        flags,
        0,
    ))
}

fn target_row(c: &ConceptClass, target: usize) -> Result<crate::bits::BitRow> {
    if target >= c.len() {
        return Err(Error::InvalidParameter(format!("target {target} out of range 0..{}", c.len())));
    }
    Ok(c.row(target).clone())
}

fn learn_dist(a: &DistArgs, seed: u64) -> Result<Parts> {
    let c = a.class.build()?;
    let d = uniform_for(&c)?;
    let f = target_row(&c, a.target)?;
    let task = PacTask::realizable(&d, &f)?;
    if a.trials <= 1 {
        let mut rng = rng_stream(seed, 0);
        let mut oracle = task.oracle();
        let out = dist_specific_learner(&c, &d, &mut oracle, a.n, a.alpha, &mut rng)?;
        let err = task.error(&out.hypothesis)?;
        let (num, den) = error_fields(&err);
        let result = json!({"hypothesis": out.hypothesis, "cover_size": out.cover.len(), "n": out.n,
                            "exact_error_num": num, "exact_error_den": den, "probs": out.em.probs});
        let row = vec![out.hypothesis.to_string(), out.cover.len().to_string(), out.n.to_string(), num, den];
        return ok(result, header(&["hypothesis", "cover_size", "n", "error_num", "error_den"]), vec![row]);
    }
    let eps = q_arg(&a.eps)?;
    let rep = pac_evaluate(
        |o, r| dist_specific_learner(&c, &d, o, a.n, a.alpha, r).map(|x| x.hypothesis),
        &task,
        a.trials,
        &eps,
        seed,
    )?;
    pac_parts(rep, a.trials)
}

fn pac_parts(rep: crate::dplearn::PacReport, trials: u64) -> Result<Parts> {
    let row = vec![
        trials.to_string(),
        rep.successes.to_string(),
        rep.success_rate.to_string(),
        rep.ci.low.to_string(),
        rep.ci.high.to_string(),
    ];
    ok(json!({"pac": rep}), header(&["trials", "successes", "success_rate", "ci_low", "ci_high"]), vec![row])
}

fn learn_label(a: &LabelArgs, seed: u64) -> Result<Parts> {
    let c = a.dist.class.build()?;
    let d = uniform_for(&c)?;
    let f = target_row(&c, a.dist.target)?;
    let task = PacTask::realizable(&d, &f)?;
    let cfg = LabelPrivateConfig { t: a.t, n: a.dist.n };
    if a.dist.trials <= 1 {
        let mut rng = rng_stream(seed, 0);
        let mut oracle = task.oracle();
        let out = label_private_learner(&c, &mut oracle, a.dist.alpha, &cfg, &mut rng)?;
        let err = task.error(&out.hypothesis)?;
        let (num, den) = error_fields(&err);
        let result = json!({"hypothesis": out.hypothesis, "t": out.t, "cover_size": out.selection.cover.len(),
                            "n": out.selection.n, "exact_error_num": num, "exact_error_den": den});
        let row = vec![out.hypothesis.to_string(), out.t.to_string(), out.selection.cover.len().to_string(), num, den];
        return ok(result, header(&["hypothesis", "t", "cover_size", "error_num", "error_den"]), vec![row]);
    }
    let eps = q_arg(&a.dist.eps)?;
    let rep = pac_evaluate(
        |o, r| label_private_learner(&c, o, a.dist.alpha, &cfg, r).map(|x| x.hypothesis),
        &task,
        a.dist.trials,
        &eps,
        seed,
    )?;
    pac_parts(rep, a.dist.trials)
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|_| Error::InvalidParameter(format!("cannot parse {x:?}"))))
        .collect()
}

fn audit_cmd(a: &AuditArgs, seed: u64) -> Result<Parts> {
    let mode = match a.mode {
        Mode::Exact => AuditMode::Exact,
        Mode::Mc => AuditMode::MonteCarlo { trials: a.trials, seed },
    };
    let mut cfg = LineLearnerConfig::new(a.p, a.eps, a.delta, a.alpha, a.learner_beta);
    cfg.range_width_override = a.scale_range;
    cfg.ell_override = a.scale_ell;
    let report: AuditReport = match a.mech {
        Mech::Em => {
            let (s, t) = a
                .qualities
                .split_once(':')
                .ok_or_else(|| Error::InvalidParameter("qualities must look like 10,8:9,8".into()))?;
            let (s, t): (Vec<i64>, Vec<i64>) = (parse_list(s)?, parse_list(t)?);
            audit(&EmMechanism { alpha: a.alpha }, &[(s, t)], a.alpha, a.beta, mode)?
        }
        Mech::Rr => audit(&RandomizedResponse { flip: a.flip }, &[(true, false)], a.alpha, a.beta, mode)?,
        Mech::Leak => audit(&LeakyMechanism, &[(true, false)], a.alpha, a.beta, mode)?,
        Mech::Release => {
            cfg.validate()?;
            let p = a.p;
            let h = Hypothesis::line(1, 0, p);
            let g = Hypothesis::point(0, 1, p);
            let pairs = [((h.clone(), 4), (h.clone(), 3)), ((h, 1), (g, 1))];
            audit(&LineReleaseMechanism { cfg: cfg.clone() }, &pairs, a.alpha, a.beta, mode)?
        }
        Mech::Line => {
            cfg.validate()?;
            let m = LineLearnerMechanism { cfg: cfg.clone() };
            let n = m.dataset_len();
            let (target, d) = line_setting(a.p, 1, 0, LineInput::Uniform)?;
            let mut rng = rng_stream(seed, u64::MAX);
            let s = DistOracle::realizable(&d, &target)?.draw_n(n, &mut rng)?;
            let mut t = s.clone();
            t[0] = LabeledSample::new(t[0].point, !t[0].label);
            audit(&m, &[(s, t)], a.alpha, a.beta, mode)?
        }
    };
    let status = if report.verdict == Verdict::Fail { 1 } else { 0 };
    let row = vec![
        format!("{:?}", a.mech).to_lowercase(),
        report.mode.to_string(),
        report.max_ratio.to_string(),
        report.delta_needed.to_string(),
        serde_json::to_value(report.verdict)?.as_str().unwrap_or_default().to_string(),
    ];
    let flags = if matches!(a.mech, Mech::Release | Mech::Line) { cfg.deviation_flags() } else { Vec::new() };
    Ok((
        serde_json::to_value(&report)?,
        header(&["mechanism", "mode", "max_ratio", "delta_needed", "verdict"]),
        vec![row],
        flags,
        status,
    ))
}

fn stability(a: &StabilityArgs) -> Result<Parts> {
    let atoms: Vec<f64> = parse_list(&a.atoms)?;
    let s = stability_probs(a.r, &atoms, a.t)?;
    let row = vec![
        s.none.to_string(),
        s.one.to_string(),
        s.two.to_string(),
        s.none_bound.to_string(),
        s.one_bound.to_string(),
        s.two_bound.to_string(),
        s.bounds_ok.to_string(),
    ];
    ok(
        serde_json::to_value(&s)?,
        header(&["none", "one", "two", "none_bound", "one_bound", "two_bound", "bounds_ok"]),
        vec![row],
    )
}

fn report(a: &ReportArgs) -> Result<Parts> {
    let eps = q_arg(&a.eps)?;
    let classes = [
        ClassArgs { class: ClassKind::Point, b: 2, d: 1, p: 2 },
        ClassArgs { class: ClassKind::Thr, b: 3, d: 1, p: 2 },
        ClassArgs { class: ClassKind::Line, b: 1, d: 1, p: 3 },
        ClassArgs { class: ClassKind::Box, b: 1, d: 2, p: 2 },
        ClassArgs { class: ClassKind::Hs, b: 1, d: 2, p: 2 },
    ];
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for a in &classes {
        let c = a.build()?;
        let vc = vc_dimension(&c)?.dimension;
        let (l, _) = ldim(&c)?;
        let cover = min_cover(&c, &uniform_for(&c)?, &eps, true, true)?;
        entries.push(json!({"class": a.label(), "concepts": c.len(), "vc": vc, "ldim": l,
                            "proper_cover": cover.len(), "cover_optimal": cover.optimal}));
        rows.push(vec![
            a.label(),
            c.len().to_string(),
            vc.to_string(),
            l.to_string(),
            cover.len().to_string(),
        ]);
    }
    ok(
        json!({"eps": fmt_q(&eps), "classes": entries}),
        header(&["class", "concepts", "vc", "ldim", "proper_cover"]),
        rows,
    )
}

fn read_config(path: &Path) -> Result<Map<String, Value>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text)? {
        Value::Object(m) => Ok(m),
        _ => Err(Error::InvalidParameter("config must be a JSON object".into())),
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_cap_violation() {
        3
    } else {
        match e {
            Error::InvalidParameter(_) | Error::NotPrime(_) | Error::LengthMismatch { .. } => 2,
            _ => 1,
        }
    }
}

/// Resolves flags and config, runs, and writes outputs.
pub fn run_cli(cli: &Cli) -> Result<Output> {
    let mut seed = cli.seed;
    let mut cmd = cli.command.clone();
    if let Some(path) = &cli.config {
        let overrides = read_config(path)?;
        if let Some(s) = overrides.get("seed") {
            seed = s.as_u64().ok_or_else(|| Error::InvalidParameter("config seed must be an integer".into()))?;
        }
        cmd = apply_config(&cmd, &overrides)?;
    }
    let out = execute(&cmd, seed)?;
    if let Some(dir) = &cli.out {
        out.write_to(dir)?;
    }
    Ok(out)
}

/// Entry point for the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run_cli(&cli) {
        Ok(out) => {
            print!("{}", out.csv());
            out.status
        }
        Err(e) => {
            let code = exit_code(&e);
            let kind = if code == 3 { "cap_exceeded" } else { "error" };
            eprintln!("{}", json!({"error": kind, "message": e.to_string()}));
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Output {
        let cli = Cli::try_parse_from(std::iter::once("dpcc").chain(args.iter().copied())).unwrap();
        run_cli(&cli).unwrap()
    }

    #[test]
    fn dims_thresholds() {
        let out = run(&["dims", "--class", "thr", "--b", "3"]);
        assert_eq!(out.csv(), "class,domain_size,concepts,vc,ldim\nthr(b=3),8,8,1,3\n");
    }

    #[test]
    fn cc_augindex() {
        let out = run(&["cc", "--problem", "augindex", "--d", "3", "--eps", "0"]);
        assert_eq!(out.rows[0][2], "3");
    }

    #[test]
    fn stability_row() {
        let out = run(&["stability", "--r", "0.5", "--atoms", "0.25,0.25", "--t", "8"]);
        let none: f64 = out.rows[0][0].parse().unwrap();
        let one: f64 = out.rows[0][1].parse().unwrap();
        assert!((none - 0.00390625).abs() < 1e-12);
        assert!((one - 2.0 * (0.75f64.powi(8) - 0.5f64.powi(8))).abs() < 1e-12);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(main_with_args(["dpcc", "dims", "--class", "circle"]), 2);
        assert_eq!(main_with_args(["dpcc", "nope"]), 2);
        assert_eq!(main_with_args(["dpcc", "dims", "--class", "line", "--p", "4"]), 2);
    }

    #[test]
    fn caps_exit_three() {
        assert_eq!(main_with_args(["dpcc", "dims", "--class", "thr", "--b", "30"]), 3);
    }

    #[test]
    fn config_overrides_flags() {
        let dir = std::env::temp_dir().join(format!("dpcc-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        fs::write(&path, r#"{"b": 4, "seed": 9}"#).unwrap();
        let out = run(&["dims", "--b", "2", "--config", path.to_str().unwrap()]);
        assert_eq!(out.rows[0][4], "4");
        assert_eq!(out.json["seed"], 9);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn flags_recorded_for_overrides() {
        let out = run(&["learn-line", "--p", "5", "--eps", "0.4", "--scale-range", "2", "--scale-ell", "10", "--mode", "overall"]);
        assert_eq!(out.json["deviation_flags"].as_array().unwrap().len(), 2);
    }

    #[test]
    fn audit_failure_sets_status() {
        let out = run(&["audit", "--mech", "rr", "--alpha", "1"]);
        assert_eq!(out.status, 1);
        let out = run(&["audit", "--mech", "rr", "--alpha", "1.0986123"]);
        assert_eq!(out.status, 0);
    }
}
