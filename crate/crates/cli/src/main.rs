use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};
use hsi_core::body::{forward, BodyTemplate};
use hsi_core::io::{
    load_bundle, load_bundle_template, load_config, load_ground_truth, read_contacts, read_log, read_params,
    save_bundle, save_ground_truth, write_atomic, write_outputs, GroundTruthFile, Ply,
};
use hsi_core::metrics::{compute_metrics, ContactCounts, MetricsReport};
use hsi_core::optim::run_pipeline;
use hsi_core::scene::{build_scene, SceneInputs};
use hsi_core::synth::{fixture_template, synth_fixture, FixtureKind};
use hsi_core::Error;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "hsi", version, about = "Metric human and scene reconstruction from per-image perception outputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the metric scene point cloud of a bundle and write it as PLY.
    BuildScene {
        bundle: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(short, long)]
        config: Option<PathBuf>,
    },
    /// Run the full fit and write scene, parameters, contacts and a log.
    Optimize {
        bundle: PathBuf,
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Summarise the contacts of an `optimize` output directory.
    Contacts { dir: PathBuf },
    /// Compare an `optimize` output directory against a fixture's ground truth.
    Metrics { pred: PathBuf, gt: PathBuf },
    /// Generate a synthetic bundle together with its ground truth.
    Synth {
        kind: FixtureKind,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let validation = e.chain().any(|c| c.downcast_ref::<Error>().is_some_and(Error::is_validation));
            ExitCode::from(if validation { 1 } else { 2 })
        }
    }
}

fn template_for(bundle_dir: &Path) -> anyhow::Result<BodyTemplate> {
    Ok(load_bundle_template(bundle_dir)?.unwrap_or_else(fixture_template))
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::BuildScene { bundle, output, config } => {
            let cfg = load_config(config.as_deref())?;
            let b = load_bundle(&bundle)?;
            let inputs = SceneInputs {
                depth: &b.scene_depth,
                relpoints: &b.scene_relpoints,
                floor_mask: b.floor_mask.as_ref(),
                depth_intrinsics: b.intrinsics_hint,
            };
            let scaffold = build_scene(&inputs, &cfg.scene_config())?;
            write_atomic(&output, Ply::points(scaffold.points.clone()).encode().as_bytes())?;
            eprintln!("{} scene points, floor {}", scaffold.points.len(), if scaffold.floor.is_some() { "found" } else { "absent" });
        }
        Command::Optimize { bundle, config, output } => {
            let start = Instant::now();
            let cfg = load_config(config.as_deref())?;
            let b = load_bundle(&bundle)?;
            let template = template_for(&bundle)?;
            let out = run_pipeline(&b, &template, &cfg)?;
            write_outputs(&output, &out, &template, &cfg)?;
            eprintln!(
                "{} person(s), scene scale {:.4}, {:.1} s{}",
                out.state.humans.len(),
                out.state.scale,
                start.elapsed().as_secs_f64(),
                if out.aborted { ", stopped early on a non-finite loss" } else { "" }
            );
        }
        Command::Contacts { dir } => {
            let log = read_log(&dir)?;
            for i in 0..log.people {
                let c = read_contacts(&dir, i)?;
                println!("person {i}: {} of {} vertices in contact", c.indices.len(), c.num_vertices);
            }
        }
        Command::Metrics { pred, gt } => {
            let truth = load_ground_truth(&gt)?;
            let template = template_for(&gt)?;
            let report = metrics(&pred, &truth, &template)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Synth { kind, seed, output } => {
            let (bundle, truth) = synth_fixture(kind, seed);
            save_bundle(&bundle, &output)?;
            save_ground_truth(&GroundTruthFile::from(&truth), &output)?;
            eprintln!("{kind} fixture with {} person(s) written to {}", bundle.people.len(), output.display());
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct MetricsOutput {
    people: Vec<MetricsReport>,
    /// Pose errors averaged over people; contact scores from pooled counts.
    overall: MetricsReport,
}

fn metrics(pred: &Path, truth: &GroundTruthFile, template: &BodyTemplate) -> anyhow::Result<MetricsOutput> {
    let log = read_log(pred)?;
    if log.people != truth.params.len() {
        return Err(Error::CardinalityMismatch(format!("{} predicted people vs {} in ground truth", log.people, truth.params.len())).into());
    }
    if truth.params.is_empty() {
        return Err(anyhow!("ground truth lists no people"));
    }
    let mut people = Vec::new();
    let mut pooled = ContactCounts::default();
    for (i, gt_params) in truth.params.iter().enumerate() {
        let p = forward(template, &read_params(pred, i)?).with_context(|| format!("person {i} prediction"))?;
        let g = forward(template, gt_params).with_context(|| format!("person {i} ground truth"))?;
        let pc = read_contacts(pred, i)?.labels();
        let gc = truth.contacts[i].labels();
        people.push(compute_metrics(&p.vertices, &p.joints, &g.vertices, &g.joints, &pc, &gc)?);
        pooled.add(ContactCounts::from_labels(&pc, &gc)?);
    }
    let n = people.len() as f64;
    let mean = |f: fn(&MetricsReport) -> f64| people.iter().map(f).sum::<f64>() / n;
    let overall = MetricsReport {
        mpjpe: mean(|m| m.mpjpe),
        pa_mpjpe: mean(|m| m.pa_mpjpe),
        mpvpe: mean(|m| m.mpvpe),
        precision: pooled.precision(),
        recall: pooled.recall(),
        f1: pooled.f1(),
    };
    Ok(MetricsOutput { people, overall })
}
