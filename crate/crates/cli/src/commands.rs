use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use ordkern::dop::{build_profile, mine_discriminative, DiscriminativePattern};
use ordkern::graph::{
    generate_dataset, load_graph, load_manifest, write_dataset, Label, PlantSpec, WeightedGraph,
};
use ordkern::kernels::{gram, gram_exact, write_gram_text, write_libsvm, GramMatrix};
use ordkern::learn::{loocv, robustness_eval, shuffled_labels, EvalOptions};
use ordkern::Exec;

use crate::args::{
    EvalArgs, GenArgs, GramArgs, GridArgs, Job, KernelArgs, MineArgs, RobustArgs, RunConfig,
    SCHEMA_VERSION,
};
use crate::error::{CliError, CliResult};
use crate::schema::EVAL_REPORT_SCHEMA;

pub const RUN_CONFIG: &str = "run_config.json";

fn create_dir(dir: &Path) -> CliResult<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    fs::canonicalize(dir).map_err(|e| CliError::io(dir, e))
}

fn absolute(path: &Path) -> CliResult<PathBuf> {
    fs::canonicalize(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    write_text(path, &text)
}

fn write_run_config(job: &Job, out: &Path) -> CliResult<()> {
    let config = RunConfig {
        schema_version: SCHEMA_VERSION,
        job: job.clone(),
    };
    write_json(&out.join(RUN_CONFIG), &config)
}

pub fn load_run_config(path: &Path) -> CliResult<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let config: RunConfig = serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(CliError::Usage(format!(
            "{}: unsupported schema_version {} (expected {SCHEMA_VERSION})",
            path.display(),
            config.schema_version
        )));
    }
    Ok(config)
}

pub fn run(job: Job) -> CliResult<()> {
    match job {
        Job::Gen(a) => gen(a),
        Job::Gram(a) => gram_cmd(a),
        Job::Eval(a) => eval(a),
        Job::Robust(a) => robust(a),
        Job::Mine(a) => mine(a),
    }
}

fn gen(mut a: GenArgs) -> CliResult<()> {
    let plant_a = a
        .plant_a
        .clone()
        .unwrap_or_else(|| (0..a.nodes.min(5)).collect());
    let plant_b = a
        .plant_b
        .clone()
        .unwrap_or_else(|| plant_a.iter().rev().copied().collect());
    let spec_a = PlantSpec::new(plant_a.clone(), a.strength);
    let spec_b = PlantSpec::new(plant_b.clone(), a.strength);
    // generate fully before touching the file system
    let ds = generate_dataset(a.classes, a.nodes, a.timepoints, (&spec_a, &spec_b), a.seed)?;
    a.out = create_dir(&a.out)?;
    a.plant_a = Some(plant_a);
    a.plant_b = Some(plant_b);
    let manifest = write_dataset(&ds, &a.out)?;
    write_run_config(&Job::Gen(a), manifest.parent().unwrap_or(Path::new(".")))?;
    println!("wrote {} graphs and {}", ds.len(), manifest.display());
    Ok(())
}

fn write_gram_outputs(g: &GramMatrix, labels: &[Label], out: &Path) -> CliResult<String> {
    write_gram_text(g, labels, out.join("gram.txt"))?;
    write_libsvm(g, labels, out.join("gram.libsvm"))?;
    let diag = g.psd(1e-8).to_string();
    write_text(&out.join("psd.txt"), &format!("{diag}\n"))?;
    Ok(diag)
}

fn gram_cmd(mut a: GramArgs) -> CliResult<()> {
    a.manifest = absolute(&a.manifest)?;
    let ds = load_manifest(&a.manifest)?;
    let g = if a.exact {
        gram_exact(
            &ds,
            a.depth_cap,
            a.lambda,
            a.budget,
            a.kernel.normalize,
            Exec::Parallel,
        )?
    } else {
        gram(&ds, &a.kernel.config(a.lambda), Exec::Parallel)?
    };
    a.out = create_dir(&a.out)?;
    let diag = write_gram_outputs(&g, ds.labels(), &a.out)?;
    let out = a.out.clone();
    write_run_config(&Job::Gram(a), &out)?;
    println!("n={} {diag}", g.len());
    Ok(())
}

fn eval_options(kernel: &KernelArgs, grid: &GridArgs) -> EvalOptions {
    EvalOptions {
        kernel: kernel.config(1.0),
        lambdas: grid.lambdas.clone(),
        cs: grid.cs.clone(),
        tuning: grid.tuning(),
        tol: grid.tol,
        max_updates: grid.max_updates,
        exec: Exec::Parallel,
    }
}

fn eval(mut a: EvalArgs) -> CliResult<()> {
    a.manifest = absolute(&a.manifest)?;
    let mut ds = load_manifest(&a.manifest)?;
    if let Some(seed) = a.shuffle_labels {
        ds = ds.with_labels(shuffled_labels(ds.labels(), seed))?;
    }
    let report = loocv(&ds, &eval_options(&a.kernel, &a.grid))?;
    a.out = create_dir(&a.out)?;
    write_json(&a.out.join("eval_report.json"), &report)?;
    write_text(&a.out.join("folds.csv"), &report.folds_csv())?;
    write_text(&a.out.join("eval_report.schema.json"), EVAL_REPORT_SCHEMA)?;
    let out = a.out.clone();
    write_run_config(&Job::Eval(a), &out)?;
    println!(
        "accuracy={} folds={} failures={} best_lambda={} best_c={}",
        report.accuracy, report.n_folds, report.n_failures, report.best_lambda, report.best_c
    );
    Ok(())
}

fn robust(mut a: RobustArgs) -> CliResult<()> {
    a.manifest = absolute(&a.manifest)?;
    let ds = load_manifest(&a.manifest)?;
    let seeds: Vec<u64> = (0..a.seeds).collect();
    let report = robustness_eval(&ds, &a.rates, &seeds, &eval_options(&a.kernel, &a.grid))?;
    a.out = create_dir(&a.out)?;
    let csv = report.to_csv();
    write_text(&a.out.join("robustness.csv"), &csv)?;
    write_json(&a.out.join("robustness.json"), &report)?;
    let out = a.out.clone();
    write_run_config(&Job::Robust(a), &out)?;
    print!("{csv}");
    Ok(())
}

fn load_folder(dir: &Path) -> CliResult<Vec<WeightedGraph>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| CliError::io(dir, e)))
        .collect::<CliResult<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|x| x == "json"));
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no graph JSON files",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| load_graph(p).map_err(CliError::from))
        .collect()
}

#[derive(Serialize)]
struct RankedPattern<'a> {
    rank: usize,
    #[serde(flatten)]
    pattern: &'a DiscriminativePattern,
}

fn mine(mut a: MineArgs) -> CliResult<()> {
    let (class_a, class_b) = match (&a.manifest, &a.class_a, &a.class_b) {
        (Some(m), _, _) => {
            let m = absolute(m)?;
            let ds = load_manifest(&m)?;
            a.manifest = Some(m);
            let pick = |label| -> Vec<WeightedGraph> {
                ds.indices_of(label)
                    .into_iter()
                    .map(|i| ds.graphs()[i].clone())
                    .collect()
            };
            (pick(Label::Pos), pick(Label::Neg))
        }
        (None, Some(da), Some(db)) => {
            let (da, db) = (absolute(da)?, absolute(db)?);
            let graphs = (load_folder(&da)?, load_folder(&db)?);
            a.class_a = Some(da);
            a.class_b = Some(db);
            graphs
        }
        _ => {
            return Err(CliError::Usage(
                "mine needs --manifest or both --class-a and --class-b".into(),
            ))
        }
    };
    let pa: Vec<_> = class_a.iter().map(build_profile).collect();
    let pb: Vec<_> = class_b.iter().map(build_profile).collect();
    let top = mine_discriminative(&pa, &pb, a.start_node, a.top_k)?;

    a.out = create_dir(&a.out)?;
    let ranked: Vec<RankedPattern<'_>> = top
        .iter()
        .enumerate()
        .map(|(i, pattern)| RankedPattern {
            rank: i + 1,
            pattern,
        })
        .collect();
    write_json(&a.out.join("patterns.json"), &ranked)?;
    let mut listing = String::new();
    for r in &ranked {
        listing.push_str(&format!(
            "{:>2}. {}  score={:.4} freq_a={:.4} freq_b={:.4}\n",
            r.rank,
            r.pattern.labels.join(" > "),
            r.pattern.score,
            r.pattern.freq_a,
            r.pattern.freq_b
        ));
    }
    write_text(&a.out.join("patterns.txt"), &listing)?;
    let out = a.out.clone();
    write_run_config(&Job::Mine(a), &out)?;
    print!("{listing}");
    Ok(())
}
