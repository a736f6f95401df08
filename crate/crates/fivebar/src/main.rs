use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use fivebar::config::ProjectConfig;
use fivebar::export::{write_curves, write_path, write_path_xy};
use fivebar::format::{GraphFile, Stage};
use fivebar::pipeline::{self, artifact_path, Summary, WeightMode};
use fivebar::{exit, exit_code};
use fivebar_core::curve::TraceSettings;
use fivebar_core::homotopy::TrackerSettings;
use fivebar_core::planner::{extract_curves, CurveKind};
use fivebar_core::Configuration;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "fivebar", version, about = "Singularity-aware configuration-space graphs for five-bar linkages")]
struct Cli {
    /// Project configuration file.
    #[arg(short, long, global = true, default_value = "fivebar.toml")]
    config: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the feature size and write the epsilon-sample.
    Sample {
        /// Override the configured epsilon.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Connect the sample into the radius graph.
    Graph,
    /// Attach singularity clearances to nodes and edges.
    Weight {
        #[arg(long)]
        threshold: Option<f64>,
        /// Solve only the edges that can change the mode counts.
        #[arg(long)]
        modes_only: bool,
    },
    /// Drop edges whose clearance is below the threshold.
    Prune {
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Print the (input, output, input/output) mode counts.
    Modes {
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Shortest path between two configurations.
    Plan {
        /// Start configuration `x,y,cφ,sφ,cψ,sψ` in the canonical frame.
        #[arg(long, value_parser = parse_config, requires = "goal", conflicts_with = "auto")]
        start: Option<Configuration>,
        #[arg(long, value_parser = parse_config)]
        goal: Option<Configuration>,
        /// Pick endpoints with one of the case-study searches.
        #[arg(long, value_enum)]
        auto: Option<AutoEndpoints>,
        #[arg(long, value_enum, default_value = "both")]
        avoid: AvoidMode,
        /// Base name of the output files.
        #[arg(long, default_value = "path")]
        name: String,
    },
    /// Trace workspace-boundary and singularity curves as plot data.
    Curves {
        #[arg(long, value_enum, default_value = "all")]
        kind: CurveChoice,
    },
    /// Bundle graph statistics, mode counts and saved paths.
    Report,
    /// Plain-text export of a graph file.
    Export {
        #[arg(long, value_enum, default_value = "weighted")]
        stage: StageChoice,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AutoEndpoints {
    /// IK pair with perpendicular 4:1 velocity ellipses.
    Perpendicular,
    /// Ceiling of one output mode to the floor of another.
    CeilingFloor,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AvoidMode {
    On,
    Off,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CurveChoice {
    Boundary,
    Input,
    Output,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum StageChoice {
    Sample,
    Graph,
    Weighted,
    Pruned,
}

fn parse_config(s: &str) -> Result<Configuration, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != 6 {
        return Err(format!("expected 6 comma-separated numbers, got {}", v.len()));
    }
    Ok(Configuration::from_slice(&v))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(exit::OK as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn load(path: &Path, min: Stage) -> Result<GraphFile> {
    GraphFile::load_stage(path, min).with_context(|| format!("{} (run the earlier stages first)", path.display()))
}

fn save(file: &GraphFile, path: &Path, summary: &Summary) -> Result<()> {
    file.save(path).with_context(|| format!("writing {}", path.display()))?;
    print!("{summary}");
    println!("  wrote  {}", path.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = ProjectConfig::load(&cli.config)?;
    let threads = cfg.parallelism;
    match cli.command {
        Command::Sample { epsilon } => {
            if epsilon.is_some() {
                cfg.epsilon = epsilon;
                cfg.validate()?;
            }
            let (file, sum) = pipeline::sample(&cfg)?;
            save(&file, &artifact_path(&cfg, Stage::Sample), &sum)
        }
        Command::Graph => {
            let input = load(&artifact_path(&cfg, Stage::Sample), Stage::Sample)?;
            let (file, sum) = pipeline::graph(input);
            save(&file, &artifact_path(&cfg, Stage::Graph), &sum)
        }
        Command::Weight { threshold, modes_only } => {
            let threshold = threshold.or(cfg.threshold);
            check_threshold(threshold)?;
            let input = load(&artifact_path(&cfg, Stage::Graph), Stage::Graph)?;
            let (svc, mut cache) = pipeline::open_service(&input.graph.design, cfg.seed, threads, Some(&cfg.paths.cache))?;
            let mode = if modes_only { WeightMode::Modes } else { WeightMode::Full };
            let (mut file, sum) = pipeline::weight(input, &svc, threshold, mode, threads)?;
            file.cache = relative_to(&cfg.paths.cache, &cfg.paths.graph).display().to_string();
            svc.export(&mut cache);
            cache.save(&cfg.paths.cache)?;
            save(&file, &artifact_path(&cfg, Stage::Weighted), &sum)
        }
        Command::Prune { threshold } => {
            check_threshold(threshold)?;
            let input = load(&artifact_path(&cfg, Stage::Weighted), Stage::Weighted)?;
            let t = threshold.or(cfg.threshold).unwrap_or(input.graph.threshold);
            let (file, sum) = pipeline::prune(&input, t)?;
            save(&file, &artifact_path(&cfg, Stage::Pruned), &sum)
        }
        Command::Modes { threshold } => {
            check_threshold(threshold)?;
            let input = load(&artifact_path(&cfg, Stage::Weighted), Stage::Weighted)?;
            let t = threshold.unwrap_or(input.graph.threshold);
            let (m, sum) = pipeline::modes(&input.graph, t)?;
            print!("{sum}");
            let (i, o, io) = m.triple();
            println!("{i} {o} {io}");
            Ok(())
        }
        Command::Plan {
            start,
            goal,
            auto,
            avoid,
            name,
        } => {
            let input = load(&artifact_path(&cfg, Stage::Weighted), Stage::Weighted)?;
            let mut g = input.graph;
            let (svc, mut cache) = pipeline::open_service(&g.design, cfg.seed, threads, Some(&cfg.paths.cache))?;
            let candidates: Vec<(Configuration, Configuration)> = match (start, goal, auto) {
                (Some(s), Some(t), _) => vec![(s, t)],
                (_, _, Some(AutoEndpoints::Perpendicular)) => pipeline::perpendicular_endpoints(&g)
                    .into_iter()
                    .map(|p| (p.configs[0], p.configs[1]))
                    .collect(),
                (_, _, Some(AutoEndpoints::CeilingFloor)) => pipeline::ceiling_floor_endpoints(&g)
                    .into_iter()
                    .map(|(a, b, _)| {
                        (
                            Configuration::from_array(g.configs[a as usize]),
                            Configuration::from_array(g.configs[b as usize]),
                        )
                    })
                    .collect(),
                _ => bail!(fivebar::config::ConfigError::Invalid("give --start and --goal, or --auto".into())),
            };
            let modes: &[bool] = match avoid {
                AvoidMode::On => &[true],
                AvoidMode::Off => &[false],
                AvoidMode::Both => &[true, false],
            };
            let mut last_err = None;
            for (s, t) in candidates.iter().take(16) {
                let mut results = Vec::new();
                for &a in modes {
                    match pipeline::plan(&mut g, &svc, s, t, a) {
                        Ok(p) => results.push((a, p)),
                        Err(e) => {
                            last_err = Some(e);
                            break;
                        }
                    }
                }
                if results.len() < modes.len() {
                    continue;
                }
                std::fs::create_dir_all(&cfg.paths.output)?;
                for (a, p) in &results {
                    let tag = if *a { "avoid" } else { "free" };
                    let path_file = cfg.paths.output.join(format!("{name}.{tag}.path"));
                    let xy_file = cfg.paths.output.join(format!("{name}.{tag}.tsv"));
                    write_path(std::fs::File::create(&path_file)?, p, &g, *a)?;
                    write_path_xy(std::fs::File::create(&xy_file)?, p, &g.design)?;
                    println!(
                        "{tag}: length {:.6}, min clearance {:.6}, {} configurations, {} sign changes",
                        p.total_length,
                        p.min_clearance,
                        p.configs.len(),
                        p.sign_changes()
                    );
                    println!("  wrote  {}", path_file.display());
                }
                println!("ambient distance {:.6}", s.distance(t));
                svc.export(&mut cache);
                cache.save(&cfg.paths.cache)?;
                return Ok(());
            }
            Err(last_err.unwrap_or_else(|| anyhow!("no endpoint candidates found")))
        }
        Command::Curves { kind } => {
            let d = pipeline::canonical(&cfg)?;
            let kinds: Vec<(CurveKind, &str)> = match kind {
                CurveChoice::Boundary => vec![(CurveKind::WorkspaceBoundary, "boundary")],
                CurveChoice::Input => vec![(CurveKind::InputSingProjection, "input_singular")],
                CurveChoice::Output => vec![(CurveKind::OutputSingProjection, "output_singular")],
                CurveChoice::All => vec![
                    (CurveKind::WorkspaceBoundary, "boundary"),
                    (CurveKind::InputSingProjection, "input_singular"),
                    (CurveKind::OutputSingProjection, "output_singular"),
                ],
            };
            std::fs::create_dir_all(&cfg.paths.output)?;
            for (k, stem) in kinds {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let curves = extract_curves(&d, k, &TraceSettings::default(), &mut rng, &TrackerSettings::default());
                let out = cfg.paths.output.join(format!("{stem}.tsv"));
                write_curves(std::fs::File::create(&out)?, &curves, &d)?;
                println!("{stem}: {} polylines, {} points", curves.len(), curves.iter().map(|c| c.points.len()).sum::<usize>());
                println!("  wrote  {}", out.display());
            }
            Ok(())
        }
        Command::Report => {
            let input = load(&artifact_path(&cfg, Stage::Weighted), Stage::Weighted)?;
            let mut paths: Vec<PathBuf> = match std::fs::read_dir(&cfg.paths.output) {
                Ok(dir) => dir
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x == "path"))
                    .collect(),
                Err(_) => Vec::new(),
            };
            paths.sort();
            let (report, sum) = pipeline::report(&input.graph, &paths)?;
            std::fs::create_dir_all(&cfg.paths.output)?;
            let out = cfg.paths.output.join("report.json");
            std::fs::write(&out, serde_json::to_string_pretty(&report)?)?;
            print!("{sum}");
            println!("  wrote  {}", out.display());
            Ok(())
        }
        Command::Export { stage, out } => {
            let stage = match stage {
                StageChoice::Sample => Stage::Sample,
                StageChoice::Graph => Stage::Graph,
                StageChoice::Weighted => Stage::Weighted,
                StageChoice::Pruned => Stage::Pruned,
            };
            let input = load(&artifact_path(&cfg, stage), stage)?;
            input.write_text(std::fs::File::create(&out)?)?;
            println!("wrote {}", out.display());
            Ok(())
        }
    }
}

fn check_threshold(t: Option<f64>) -> Result<()> {
    match t {
        Some(t) if !(t >= 0.0) => Err(fivebar_core::Error::InvalidThreshold(t).into()),
        _ => Ok(()),
    }
}

/// `path` relative to `base` when both are absolute or both relative.
fn relative_to(path: &Path, base: &Path) -> PathBuf {
    use std::path::Component;
    if path.is_absolute() != base.is_absolute() {
        return path.to_owned();
    }
    let p: Vec<Component> = path.components().collect();
    let b: Vec<Component> = base.components().collect();
    let common = p.iter().zip(&b).take_while(|(x, y)| x == y).count();
    let mut out = PathBuf::new();
    for _ in common..b.len() {
        out.push("..");
    }
    for c in &p[common..] {
        out.push(c);
    }
    out
}
