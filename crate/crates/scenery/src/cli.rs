//! Command-line front end: one pipeline per subcommand, deterministic
//! byte-for-byte output, exit 0 on success (situation blindness included),
//! exit 2 on any input problem.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::descriptor::{build_description, parse, propose_fixations, serialize, SceneDescription};
use crate::infodensity::{scale_scan, select_working_level};
use crate::raster::{build_pyramid, load_pnm, Pyramid, Raster, StopRule};
use crate::segmenter::{build_hierarchy, AminRule, LevelState, SegConfig};
use crate::semantics::{match_scene, Interpretation, MemoryStores, DEFAULT_SIGMA};

#[derive(Parser)]
#[command(name = "scenery", about = "Coarse-to-fine scene description and interpretation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the canonical scene description for an image.
    Describe(DescribeArgs),
    /// Print the per-level information density curve as CSV.
    ScaleScan(ScaleScanArgs),
    /// Write per-level label maps as PGM plus the description.
    Segment(SegmentArgs),
    /// Print ranked fixation proposals for the working level.
    Fixate(FixateArgs),
    /// Match a description against a story library directory.
    Match(MatchArgs),
}

#[derive(Args, Clone)]
struct PipelineFlags {
    /// Seed deviation threshold, gray levels.
    #[arg(long, default_value_t = 16)]
    theta: u32,
    /// Fixed minimum seed area in pixels; defaults to the scale rule.
    #[arg(long)]
    amin: Option<u32>,
    /// Boundary relaxation sweep cap per level.
    #[arg(long, default_value_t = 5)]
    sweeps: usize,
    /// Cluster cap for the working-level k-means.
    #[arg(long, default_value_t = 8)]
    kmax: usize,
    /// Allowed relative density drop when picking the working level.
    #[arg(long, default_value_t = 0.15)]
    tau: f64,
}

#[derive(Args)]
struct DescribeArgs {
    image: PathBuf,
    #[command(flatten)]
    flags: PipelineFlags,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScaleScanArgs {
    image: PathBuf,
    /// Allowed relative density drop when picking the working level.
    #[arg(long, default_value_t = 0.15)]
    tau: f64,
}

#[derive(Args)]
struct SegmentArgs {
    image: PathBuf,
    #[command(flatten)]
    flags: PipelineFlags,
    /// Output directory for level_<idx>.pgm files and description.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FixateArgs {
    image: PathBuf,
    #[command(flatten)]
    flags: PipelineFlags,
    /// Maximum number of fixations to print.
    #[arg(long, default_value_t = 3)]
    n: usize,
}

#[derive(Args)]
struct MatchArgs {
    description: PathBuf,
    library: PathBuf,
    /// Interpretation threshold; stories may override it.
    #[arg(long, default_value_t = DEFAULT_SIGMA)]
    sigma: f64,
}

fn seg_config(f: &PipelineFlags) -> Result<SegConfig, String> {
    let cfg = SegConfig {
        theta: f.theta,
        a_min: f.amin.map_or(AminRule::ScaleRelative, AminRule::Fixed),
        max_sweeps: f.sweeps,
        k_max: f.kmax,
    };
    cfg.validate()?;
    if !(0.0..=1.0).contains(&f.tau) {
        return Err(String::from("tau must be within [0,1]"));
    }
    Ok(cfg)
}

fn load_image(path: &Path) -> Result<Raster, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let r = load_pnm(&bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(r.to_luma())
}

fn build_scene(
    img: &Raster,
    cfg: &SegConfig,
    tau: f64,
) -> (Pyramid, Vec<LevelState>, SceneDescription) {
    let p = build_pyramid(img, StopRule::default());
    let working = select_working_level(&scale_scan(&p), tau);
    let states = build_hierarchy(&p, working, cfg);
    let d = build_description(&p, &states, cfg);
    (p, states, d)
}

fn cmd_describe(a: &DescribeArgs) -> Result<(), String> {
    let cfg = seg_config(&a.flags)?;
    let img = load_image(&a.image)?;
    let (_, _, d) = build_scene(&img, &cfg, a.flags.tau);
    let text = serialize(&d);
    match &a.out {
        Some(path) => fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_scale_scan(a: &ScaleScanArgs) -> Result<(), String> {
    if !(0.0..=1.0).contains(&a.tau) {
        return Err(String::from("tau must be within [0,1]"));
    }
    let img = load_image(&a.image)?;
    let p = build_pyramid(&img, StopRule::default());
    let rows = scale_scan(&p);
    let mut out = String::from("level,width,height,pixels,spid\n");
    for r in &rows {
        out.push_str(&format!("{},{},{},{},{:.4}\n", r.level, r.width, r.height, r.pixels, r.spid));
    }
    out.push_str(&format!("working_level={}\n", select_working_level(&rows, a.tau)));
    print!("{out}");
    Ok(())
}

/// Stable id-to-gray mapping that keeps small consecutive ids visually
/// distinct.
fn label_shade(id: u32) -> u8 {
    ((u64::from(id) * 37) % 255) as u8
}

fn cmd_segment(a: &SegmentArgs) -> Result<(), String> {
    let cfg = seg_config(&a.flags)?;
    let img = load_image(&a.image)?;
    let (_, states, d) = build_scene(&img, &cfg, a.flags.tau);
    fs::create_dir_all(&a.out).map_err(|e| format!("{}: {e}", a.out.display()))?;
    for s in &states {
        let map = s.label_map();
        let shades: Vec<u8> = map.labels().iter().map(|&l| label_shade(l)).collect();
        let pgm = Raster::luma(map.width(), map.height(), shades);
        let mut bytes = Vec::new();
        pgm.write_pnm(&mut bytes).expect("vec writes cannot fail");
        let path = a.out.join(format!("level_{}.pgm", s.level()));
        fs::write(&path, bytes).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    let path = a.out.join("description.txt");
    fs::write(&path, serialize(&d)).map_err(|e| format!("{}: {e}", path.display()))
}

fn cmd_fixate(a: &FixateArgs) -> Result<(), String> {
    let cfg = seg_config(&a.flags)?;
    let img = load_image(&a.image)?;
    let (_, states, d) = build_scene(&img, &cfg, a.flags.tau);
    let mut out = String::new();
    for f in propose_fixations(&d.levels[0].records, &states[0], a.n) {
        out.push_str(&format!("FIX {} {:.4} {:.4}\n", f.id, f.nx, f.ny));
    }
    print!("{out}");
    Ok(())
}

fn cmd_match(a: &MatchArgs) -> Result<(), String> {
    if !(0.0..=1.0).contains(&a.sigma) {
        return Err(String::from("sigma must be within [0,1]"));
    }
    let text = fs::read_to_string(&a.description)
        .map_err(|e| format!("{}: {e}", a.description.display()))?;
    let d = parse(&text).map_err(|e| format!("{}: {e}", a.description.display()))?;

    let mut story_paths: Vec<PathBuf> = fs::read_dir(&a.library)
        .map_err(|e| format!("{}: {e}", a.library.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "story"))
        .collect();
    story_paths.sort();
    let mut sources = Vec::with_capacity(story_paths.len());
    for path in story_paths {
        let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        sources.push((path.display().to_string(), text));
    }
    let stores = MemoryStores::load_library(&sources).map_err(|e| e.to_string())?;

    match match_scene(&d, &stores, a.sigma) {
        Interpretation::Match { story, score, assignment } => {
            let mut out = format!("MATCH {story} {score:.4}\n");
            for (leaf, seg) in &assignment {
                out.push_str(&format!("ASSIGN {leaf} {seg}\n"));
            }
            print!("{out}");
        }
        Interpretation::SituationBlindness => println!("BLIND"),
    }
    Ok(())
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Describe(a) => cmd_describe(a),
        Command::ScaleScan(a) => cmd_scale_scan(a),
        Command::Segment(a) => cmd_segment(a),
        Command::Fixate(a) => cmd_fixate(a),
        Command::Match(a) => cmd_match(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
