use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use linkprob::evaluation::{compare_convergence, CompareConfig, InitMode};
use linkprob::generate::{random_tree, GeneratorSpec};
use linkprob::io;
use linkprob::learner::DEFAULT_EPSILON;
use linkprob::tree_model::ValidationReport;
use linkprob::{
    draw_full, parameter_error, CausalTree, Initializer, LearnerOptions, LearnerState,
    SampleRng, StopCriterion,
};

use crate::config::{parse_u64_list, parse_weighting, sibling, ConfigFile, InitArg};
use crate::{CompareArgs, EvalArgs, GenArgs, LearnArgs, SampleArgs};

fn pick<T: Clone>(flag: Option<T>, file: &Option<T>) -> Option<T> {
    flag.or_else(|| file.clone())
}

fn required<T>(value: Option<T>, name: &str) -> Result<T> {
    value.with_context(|| format!("--{name} is required"))
}

fn report_warnings(report: &ValidationReport) {
    for w in &report.warnings {
        eprintln!("{w}");
    }
}

fn load_tree(path: &Path) -> Result<CausalTree> {
    let (tree, report) =
        io::read_tree(path).with_context(|| format!("loading tree {}", path.display()))?;
    report_warnings(&report);
    Ok(tree)
}

fn learner_options(
    epsilon: Option<f64>,
    weighting: Option<String>,
    forgetting: Option<f64>,
) -> Result<LearnerOptions> {
    Ok(LearnerOptions {
        epsilon: epsilon.unwrap_or(DEFAULT_EPSILON),
        weighting: weighting.as_deref().map(parse_weighting).transpose()?.unwrap_or_default(),
        forgetting,
        ..Default::default()
    })
}

fn init_arg(raw: Option<String>, default: InitArg) -> Result<InitArg> {
    raw.map(|s| s.parse()).transpose().map(|v| v.unwrap_or(default))
}

pub fn gen(args: GenArgs, cfg: &ConfigFile) -> Result<()> {
    let defaults = GeneratorSpec::default();
    let spec = GeneratorSpec {
        depth: pick(args.depth, &cfg.depth).unwrap_or(defaults.depth),
        branching: pick(args.branching, &cfg.branching).unwrap_or(defaults.branching),
        lo: pick(args.param_min, &cfg.param_min).unwrap_or(defaults.lo),
        hi: pick(args.param_max, &cfg.param_max).unwrap_or(defaults.hi),
        min_gap: pick(args.min_gap, &cfg.min_gap).unwrap_or(defaults.min_gap),
    };
    let seed = pick(args.seed, &cfg.seed).unwrap_or(0);
    let out = required(pick(args.out, &cfg.out), "out")?;
    let tree = random_tree(&spec, seed)?;
    report_warnings(&linkprob::validate(&tree));
    io::write_tree(&out, &tree).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

pub fn sample(args: SampleArgs, cfg: &ConfigFile) -> Result<()> {
    let tree = load_tree(&required(pick(args.tree, &cfg.tree), "tree")?)?;
    let n = required(pick(args.samples, &cfg.samples), "samples")?;
    let seed = pick(args.seed, &cfg.seed).unwrap_or(0);
    let full = args.full || cfg.full.unwrap_or(false);
    let out = required(pick(args.out, &cfg.out), "out")?;

    let mut rng = SampleRng::new(seed);
    let fulls: Vec<_> = (0..n).map(|_| draw_full(&tree, &mut rng)).collect();
    let writer = io::create(&out).with_context(|| format!("creating {}", out.display()))?;
    if full {
        io::write_full_samples(writer, tree.structure(), &fulls)?;
    } else {
        let leaves: Vec<_> = fulls.iter().map(|f| f.project(tree.structure())).collect();
        io::write_samples(writer, tree.structure(), &leaves)?;
    }
    Ok(())
}

pub fn learn(args: LearnArgs, cfg: &ConfigFile) -> Result<()> {
    let tree = load_tree(&required(pick(args.tree, &cfg.tree), "tree")?)?;
    let data_path = required(pick(args.data, &cfg.data), "data")?;
    let out = required(pick(args.out, &cfg.out), "out")?;
    let estimates_out = pick(args.estimates_out, &cfg.estimates_out)
        .unwrap_or_else(|| sibling(&out, "estimates.json"));
    let seed = pick(args.seed, &cfg.seed).unwrap_or(0);
    let truth = pick(args.truth, &cfg.truth).map(|p| load_tree(&p)).transpose()?;
    let options = learner_options(
        pick(args.epsilon, &cfg.epsilon),
        pick(args.weighting, &cfg.weighting),
        pick(args.forgetting, &cfg.forgetting),
    )?;
    let stop = StopCriterion {
        max_samples: pick(args.samples, &cfg.samples).unwrap_or(u64::MAX),
        tolerance: pick(args.tol, &cfg.tol).unwrap_or(0.0),
        window: pick(args.window, &cfg.window).unwrap_or(1000),
    };
    let checkpoint_every = pick(args.checkpoint_every, &cfg.checkpoint_every).unwrap_or(1000);

    let structure = tree.structure();
    let initializer = match init_arg(pick(args.init, &cfg.init), InitArg::Random)? {
        InitArg::Random => Initializer::Random { seed },
        InitArg::Perturb(sigma) => Initializer::Perturb {
            truth: tree.clone(),
            sigma,
            seed,
        },
        InitArg::File(path) => Initializer::Explicit(load_tree(&path)?),
    };
    let samples = io::read_samples(&data_path, structure)
        .with_context(|| format!("reading samples {}", data_path.display()))?;

    let mut state = LearnerState::init(structure, &initializer, options)?;
    let trace = state.run(&samples, &stop, checkpoint_every)?;

    let errors = match &truth {
        Some(truth) => Some(
            trace
                .checkpoints
                .iter()
                .map(|cp| parameter_error(&cp.estimates, truth, true).map(|r| r.max_abs_error))
                .collect::<linkprob::Result<Vec<_>>>()?,
        ),
        None => None,
    };
    io::write_trace(io::create(&out)?, &trace, errors.as_deref())
        .with_context(|| format!("writing {}", out.display()))?;
    io::write_tree(&estimates_out, state.estimates())
        .with_context(|| format!("writing {}", estimates_out.display()))?;
    eprintln!(
        "learned from {} samples ({:?})",
        state.samples_seen(),
        trace.stop_reason
    );
    Ok(())
}

pub fn eval(args: EvalArgs, cfg: &ConfigFile) -> Result<()> {
    let est = load_tree(&required(pick(args.estimates, &cfg.estimates), "estimates")?)?;
    let truth = load_tree(&required(pick(args.truth, &cfg.truth), "truth")?)?;
    let modulo_flips = args.modulo_flips || cfg.modulo_flips.unwrap_or(false);
    let report = parameter_error(&est, &truth, modulo_flips)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    match pick(args.out, &cfg.out) {
        Some(path) => std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

pub fn compare(args: CompareArgs, cfg: &ConfigFile) -> Result<()> {
    let truth = load_tree(&required(pick(args.truth, &cfg.truth), "truth")?)?;
    let seeds = parse_u64_list(&pick(args.seeds, &cfg.seeds).unwrap_or_else(|| "0..10".into()))?;
    let checkpoints = parse_u64_list(
        &pick(args.checkpoints, &cfg.checkpoints).unwrap_or_else(|| "1000,10000,100000".into()),
    )?;
    let n_max = pick(args.n_max, &cfg.n_max)
        .or_else(|| checkpoints.iter().copied().max())
        .unwrap_or(0);
    let out: PathBuf = required(pick(args.out, &cfg.out), "out")?;
    let summary = pick(args.summary, &cfg.summary).unwrap_or_else(|| sibling(&out, "summary.json"));
    if summary == out {
        bail!("--summary and --out must differ");
    }

    let init = match init_arg(pick(args.init, &cfg.init), InitArg::Perturb(0.1))? {
        InitArg::Random => InitMode::Random,
        InitArg::Perturb(sigma) => InitMode::Perturb(sigma),
        InitArg::File(path) => InitMode::Explicit(load_tree(&path)?),
    };
    let config = CompareConfig {
        init,
        learner: learner_options(
            pick(args.epsilon, &cfg.epsilon),
            pick(args.weighting, &cfg.weighting),
            pick(args.forgetting, &cfg.forgetting),
        )?,
        pseudo: pick(args.pseudo, &cfg.pseudo).unwrap_or(1.0),
    };

    let table = compare_convergence(&truth, &seeds, n_max, &checkpoints, &config)?;
    io::write_comparison(io::create(&out)?, &table)
        .with_context(|| format!("writing {}", out.display()))?;
    std::fs::write(&summary, io::comparison_summary_json(&table))
        .with_context(|| format!("writing {}", summary.display()))?;
    Ok(())
}
