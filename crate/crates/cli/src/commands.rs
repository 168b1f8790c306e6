use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use jfp::eval::{evaluate, evaluate_conditional, EvalConfig};
use jfp::graph::GraphType;
use jfp::metrics::{MetricConfig, MetricReport};
use jfp::model::{InferenceConfig, JfpModel, ModelConfig, PotentialMode};
use jfp::scene::{generate_dataset, generate_scene, read_dataset, write_dataset, GeneratorConfig, ScenarioKind, Scene};
use jfp::tensor::{read_checkpoint, write_checkpoint, GradCheckConfig};
use jfp::training::{gradient_equivalence_check, model_gradient_check, train, LossRecord, TrainConfig};

use crate::config::{Settings, UsageError};
use crate::report::{render_table, series_files};
use crate::{AblateArgs, CheckArgs, Command, EvalArgs, GenDataArgs, InferenceOpts, MetricOpts, TrainArgs, TrainOpts};

pub fn run(config: Option<&Path>, command: Command) -> Result<ExitCode> {
    let mut s = Settings::load(config)?;
    match command {
        Command::GenData(a) => gen_data(&mut s, a),
        Command::Train(a) => train_cmd(&mut s, a),
        Command::Eval(a) => eval_cmd(&mut s, a, false),
        Command::ConditionalEval(a) => eval_cmd(&mut s, a, true),
        Command::AblateGraphs(a) => ablate(&mut s, a),
        Command::CheckGradients(a) => check_gradients(&mut s, a),
    }
}

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: Display,
{
    raw.parse().map_err(|e| anyhow!(UsageError(format!("--{}: {e}", key.replace('_', "-")))))
}

fn inference(s: &mut Settings, o: InferenceOpts) -> Result<InferenceConfig> {
    let d = InferenceConfig::default();
    let graph = s.get(o.graph, "graph", d.graph_type.to_string())?;
    let potential = s.get(o.potential, "potential", d.potential.to_string())?;
    let mut cfg = InferenceConfig {
        graph_type: parse_value("graph", &graph)?,
        potential: parse_value("potential", &potential)?,
        bp_iterations: s.get(o.bp_iterations, "bp_iterations", d.bp_iterations)?,
    };
    if cfg.graph_type == GraphType::None {
        cfg.potential = PotentialMode::None;
    }
    Ok(cfg)
}

fn metric_config(s: &mut Settings, o: MetricOpts) -> Result<MetricConfig> {
    let d = MetricConfig::default();
    Ok(MetricConfig {
        miss_threshold: s.get(o.miss_threshold, "miss_threshold", d.miss_threshold)?,
        top_n: s.get(o.top_n, "top_n", d.top_n)?,
        pair_radius: s.get(o.pair_radius, "pair_radius", d.pair_radius)?,
    })
}

fn train_config(s: &mut Settings, o: TrainOpts, seed: u64, inference: InferenceConfig) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let mut cfg = TrainConfig {
        seed,
        steps: s.get(o.steps, "steps", d.steps)?,
        lr_decay: s.get(o.lr_decay, "lr_decay", d.lr_decay)?,
        inference,
        model: ModelConfig {
            k: s.get(o.k, "k", d.model.k)?,
            ..d.model
        },
        ..d
    };
    cfg.optimizer.lr = s.get(o.lr, "lr", d.optimizer.lr)?;
    cfg.optimizer.weight_decay = s.get(o.weight_decay, "weight_decay", d.optimizer.weight_decay)?;
    let at = s.get(o.lr_decay_at, "lr_decay_at", d.lr_decay_at.unwrap_or(1.0))?;
    cfg.lr_decay_at = (at < 1.0).then_some(at);
    cfg.validate().map_err(|e| anyhow!(UsageError(e.to_string())))?;
    Ok(cfg)
}

fn load_data(path: &Path) -> Result<Vec<Scene>> {
    let data = read_dataset(path).with_context(|| format!("reading dataset {}", path.display()))?;
    if data.is_empty() {
        anyhow::bail!("dataset {} is empty", path.display());
    }
    Ok(data)
}

fn load_model(path: &Path) -> Result<JfpModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading checkpoint {}", path.display()))?;
    let params = read_checkpoint(&text).with_context(|| format!("parsing checkpoint {}", path.display()))?;
    Ok(JfpModel::from_params(params)?)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit(reports: &[MetricReport], json: Option<&Path>, series_dir: Option<&Path>) -> Result<()> {
    let table = render_table(reports);
    print!("{table}");
    if let Some(p) = json {
        let body = if reports.len() == 1 {
            serde_json::to_string_pretty(&reports[0])?
        } else {
            serde_json::to_string_pretty(reports)?
        };
        write(p, &(body + "\n"))?;
    }
    if let Some(dir) = series_dir {
        write(&dir.join("table.txt"), &table)?;
        for (name, body) in series_files(reports) {
            write(&dir.join(name), &body)?;
        }
    }
    Ok(())
}

fn gen_data(s: &mut Settings, a: GenDataArgs) -> Result<ExitCode> {
    let kinds_raw = s.get(a.kind, "kind", "intersection".to_string())?;
    let count = s.get(a.count, "count", 100usize)?;
    let seed = s.get(a.seed, "seed", 0u64)?;
    let agents = s.optional(a.agents, "agents")?;
    let out: PathBuf = s.required(a.out, "out")?;
    s.finish()?;
    let kinds = kinds_raw
        .split(',')
        .map(|k| parse_value::<ScenarioKind>("kind", k.trim()))
        .collect::<Result<Vec<_>>>()?;
    let cfg = GeneratorConfig {
        agents,
        ..GeneratorConfig::default()
    };
    let scenes = generate_dataset(&kinds, count, seed, &cfg)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    write_dataset(&out, &scenes).with_context(|| format!("writing {}", out.display()))?;
    log::info!("wrote {} scenes to {}", scenes.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

fn write_training(model: &JfpModel, log: &[LossRecord], ckpt: &Path, loss_log: &Path) -> Result<()> {
    write(ckpt, &write_checkpoint(&model.params))?;
    let mut csv = String::from(LossRecord::CSV_HEADER);
    csv.push('\n');
    for r in log {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    write(loss_log, &csv)
}

fn train_cmd(s: &mut Settings, a: TrainArgs) -> Result<ExitCode> {
    let data: PathBuf = s.required(a.data, "data")?;
    let out: PathBuf = s.required(a.out, "out")?;
    let loss_log: Option<PathBuf> = s.optional(a.loss_log, "loss_log")?;
    let init: Option<PathBuf> = s.optional(a.init, "init")?;
    let seed = s.get(a.seed, "seed", 0u64)?;
    let inf = inference(s, a.inference)?;
    let mut cfg = train_config(s, a.train, seed, inf)?;
    s.finish()?;
    let dataset = load_data(&data)?;
    let init = init.map(|p| load_model(&p)).transpose()?;
    if let Some(m) = &init {
        cfg.model = m.config;
    }
    let outcome = train(&dataset, &cfg, init)?;
    let loss_log = loss_log.unwrap_or_else(|| PathBuf::from(format!("{}.loss.csv", out.display())));
    write_training(&outcome.model, &outcome.log, &out, &loss_log)?;
    if let Some(last) = outcome.log.last() {
        println!("trained {} steps, final loss {:.6}", last.step + 1, last.loss.total);
    }
    Ok(ExitCode::SUCCESS)
}

fn eval_cmd(s: &mut Settings, a: EvalArgs, conditional: bool) -> Result<ExitCode> {
    let data: PathBuf = s.required(a.data, "data")?;
    let ckpt: PathBuf = s.required(a.checkpoint, "checkpoint")?;
    let out: Option<PathBuf> = s.optional(a.out, "out")?;
    let series: Option<PathBuf> = s.optional(a.series_dir, "series_dir")?;
    let seed = s.get(a.seed, "seed", 0u64)?;
    let inference = inference(s, a.inference)?;
    let metrics = metric_config(s, a.metrics)?;
    let default_label = if conditional { "conditional" } else { "eval" };
    let label = s.get(a.label, "label", default_label.to_string())?;
    s.finish()?;
    let dataset = load_data(&data)?;
    let model = load_model(&ckpt)?;
    let cfg = EvalConfig { inference, metrics, seed };
    let report = if conditional {
        evaluate_conditional(&model, &dataset, &cfg, &label)?
    } else {
        evaluate(&model, &dataset, &cfg, &label)?
    };
    emit(&[report], out.as_deref(), series.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn ablate(s: &mut Settings, a: AblateArgs) -> Result<ExitCode> {
    let data: PathBuf = s.required(a.data, "data")?;
    let train_data: Option<PathBuf> = s.optional(a.train_data, "train_data")?;
    let ckpt: Option<PathBuf> = s.optional(a.checkpoint, "checkpoint")?;
    let out_dir: PathBuf = s.required(a.out_dir, "out_dir")?;
    let seed = s.get(a.seed, "seed", 0u64)?;
    let potential_raw = s.get(a.potential, "potential", PotentialMode::Learned.to_string())?;
    let potential: PotentialMode = parse_value("potential", &potential_raw)?;
    let bp_iterations = s.get(a.bp_iterations, "bp_iterations", InferenceConfig::default().bp_iterations)?;
    let metrics = metric_config(s, a.metrics)?;
    let base_train = train_config(s, a.train, seed, InferenceConfig::default())?;
    s.finish()?;
    let source = match (train_data, ckpt) {
        (Some(t), None) => Ok(load_data(&t)?),
        (None, Some(c)) => Err(load_model(&c)?),
        _ => return Err(anyhow!(UsageError("ablate-graphs needs exactly one of --train-data or --checkpoint".into()))),
    };
    let dataset = load_data(&data)?;

    let mut reports = Vec::new();
    for graph_type in GraphType::ALL {
        let inference = InferenceConfig {
            graph_type,
            potential: if graph_type == GraphType::None { PotentialMode::None } else { potential },
            bp_iterations,
        };
        let model = match &source {
            Ok(train_set) => {
                let cfg = TrainConfig { inference, ..base_train };
                log::info!("training with graph {graph_type}");
                let outcome = train(train_set, &cfg, None)?;
                let stem = out_dir.join(format!("model-{graph_type}"));
                write_training(&outcome.model, &outcome.log, &stem.with_extension("ckpt"), &stem.with_extension("loss.csv"))?;
                outcome.model
            }
            Err(model) => model.clone(),
        };
        let cfg = EvalConfig { inference, metrics, seed };
        reports.push(evaluate(&model, &dataset, &cfg, graph_type.as_str())?);
    }
    emit(&reports, Some(&out_dir.join("reports.json")), Some(&out_dir))?;
    Ok(ExitCode::SUCCESS)
}

/// Widths small enough that every coordinate can be checked in seconds.
pub fn narrow_config(k: usize) -> ModelConfig {
    let mut cfg = ModelConfig { k, ..ModelConfig::default() };
    cfg.backbone.hidden = 16;
    cfg.pair.inner = [32, 16];
    cfg.pair.outer_hidden = 16;
    cfg
}

fn check_gradients(s: &mut Settings, a: CheckArgs) -> Result<ExitCode> {
    let seed = s.get(a.seed, "seed", 0u64)?;
    let k = s.get(a.k, "k", ModelConfig::default().k)?;
    let full = a.full || s.get(None, "full", false)?;
    let narrow = a.narrow || s.get(None, "narrow", false)?;
    let coords = s.get(a.coords, "coords", 20usize)?;
    let eps = s.get(a.eps, "eps", 1e-6)?;
    let tol = s.get(a.tolerance, "tolerance", 1e-4)?;
    s.finish()?;

    let config = if narrow { narrow_config(k) } else { ModelConfig { k, ..ModelConfig::default() } };
    let model = JfpModel::new(config, seed)?;
    let scene_cfg = GeneratorConfig {
        agents: Some(3),
        ..GeneratorConfig::default()
    };
    let scene = generate_scene(ScenarioKind::Intersection, seed, &scene_cfg)?;
    let gc = GradCheckConfig {
        eps,
        max_coords_per_param: (!full).then_some(coords),
        seed,
    };
    let fd = model_gradient_check(&model, &scene, GraphType::AvStar, &gc)?;
    println!(
        "finite_diff_check: {} coordinates, max rel err {:.3e} at {}[{}] (analytic {:.6e}, numeric {:.6e})",
        fd.checked, fd.max_rel_err, fd.worst_param, fd.worst_index, fd.worst_analytic, fd.worst_numeric
    );
    let eq = gradient_equivalence_check(&model, &scene, eps)?;
    println!(
        "gradient_equivalence_check: {} coordinates, max rel err {:.3e}, max abs dev {:.3e}",
        eq.checked, eq.max_rel_err, eq.max_abs_dev
    );
    let ok = fd.passes(tol) && eq.max_rel_err < tol;
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
