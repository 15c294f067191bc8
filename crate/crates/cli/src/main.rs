//! `stillmotion`: run the still-image animation pipeline from a JSON config,
//! one stage at a time or end to end, or serve it over HTTP.
//!
//! Exit codes: 0 on success, 2 for an invalid config or command line, 3 when
//! a pipeline stage fails.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use stillmotion::meshanim::AnimationKind;
use stillmotion::pipeline::{run_pipeline, run_stage, ClicksSource, PipelineConfig, PipelineError, Stage};
use stillmotion::render::Sampling;
use stillmotion::segmentation::ComponentPolicy;
use stillmotion_service::ServiceConfig;

const EXIT_VALIDATION: u8 = 2;
const EXIT_STAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "stillmotion", version, about = "Animate the subject of a still image")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write the configured outputs.
    Run(StageArgs),
    /// Write the subject mask to the artifacts directory.
    Segment(StageArgs),
    /// Fill the masked subject from the stored mask.
    Inpaint(StageArgs),
    /// Render the clip from the stored mask and plate.
    Animate(StageArgs),
    /// Serve the HTTP session API.
    Serve {
        /// Overrides the PORT environment variable.
        #[arg(long)]
        port: Option<u16>,
        /// Directory mirroring sessions for crash recovery; overrides SESSION_DIR.
        #[arg(long)]
        session_dir: Option<PathBuf>,
    },
}

/// A config file plus flag overrides; flags win.
#[derive(Args)]
struct StageArgs {
    /// Pipeline config JSON. Relative paths inside it are relative to the file.
    #[arg(short, long)]
    config: PathBuf,
    /// GIF output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    frames_dir: Option<PathBuf>,
    #[arg(long)]
    artifacts_dir: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    /// ClickSet JSON file.
    #[arg(long)]
    clicks: Option<PathBuf>,

    /// Cluster count.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    closing_radius: Option<u32>,
    /// all, largest or clicked.
    #[arg(long, value_parser = parse_serde::<ComponentPolicy>)]
    policy: Option<ComponentPolicy>,

    #[arg(long)]
    inpaint_dilation: Option<u32>,
    #[arg(long)]
    inpaint_tol: Option<f64>,
    #[arg(long)]
    inpaint_iters: Option<u32>,

    /// hwave, vwave or jump.
    #[arg(long, value_parser = parse_serde::<AnimationKind>)]
    kind: Option<AnimationKind>,
    #[arg(long)]
    amplitude: Option<f64>,
    #[arg(long)]
    waves: Option<f64>,
    #[arg(long)]
    speed: Option<f64>,
    #[arg(long)]
    frames: Option<u32>,
    /// Clip length in seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Per-frame GIF delay in hundredths of a second.
    #[arg(long)]
    delay: Option<u16>,
    /// nearest or bilinear.
    #[arg(long, value_parser = parse_serde::<Sampling>)]
    sampling: Option<Sampling>,
    /// Subject mesh cells as NXxNY, e.g. 24x24.
    #[arg(long, value_parser = parse_mesh)]
    mesh: Option<(u32, u32)>,
}

fn parse_serde<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_owned())).map_err(|e| e.to_string())
}

fn parse_mesh(s: &str) -> Result<(u32, u32), String> {
    let (nx, ny) = s.split_once(['x', 'X']).ok_or("expected NXxNY")?;
    let cells = |v: &str| v.trim().parse::<u32>().map_err(|e| format!("{v:?}: {e}"));
    Ok((cells(nx)?, cells(ny)?))
}

impl StageArgs {
    fn load(&self) -> Result<PipelineConfig, PipelineError> {
        let mut cfg = PipelineConfig::load(&self.config)?;
        self.apply(&mut cfg);
        Ok(cfg)
    }

    fn apply(&self, cfg: &mut PipelineConfig) {
        fn set<T: Clone>(slot: &mut T, flag: &Option<T>) {
            if let Some(v) = flag {
                *slot = v.clone();
            }
        }
        if let Some(out) = &self.out {
            cfg.output.gif = Some(out.clone());
        }
        if let Some(dir) = &self.frames_dir {
            cfg.output.frames_dir = Some(dir.clone());
        }
        if let Some(dir) = &self.artifacts_dir {
            cfg.output.artifacts_dir = Some(dir.clone());
        }
        if self.delay.is_some() {
            cfg.output.delay_cs = self.delay;
        }
        set(&mut cfg.input, &self.input);
        if let Some(path) = &self.clicks {
            cfg.clicks = ClicksSource::Path(path.clone());
        }

        let seg = &mut cfg.segmentation;
        set(&mut seg.k, &self.k);
        set(&mut seg.seed, &self.seed);
        set(&mut seg.closing_radius, &self.closing_radius);
        set(&mut seg.policy, &self.policy);

        let fill = &mut cfg.inpaint;
        set(&mut fill.pre_dilation, &self.inpaint_dilation);
        set(&mut fill.tolerance, &self.inpaint_tol);
        set(&mut fill.max_iterations, &self.inpaint_iters);

        let anim = &mut cfg.animation;
        set(&mut anim.kind, &self.kind);
        set(&mut anim.amplitude, &self.amplitude);
        set(&mut anim.waves, &self.waves);
        set(&mut anim.speed, &self.speed);
        set(&mut anim.frames, &self.frames);
        set(&mut anim.duration, &self.duration);

        set(&mut cfg.sampling, &self.sampling);
        if let Some((nx, ny)) = self.mesh {
            cfg.mesh.nx = nx;
            cfg.mesh.ny = ny;
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value).context("serializing report")?);
    Ok(())
}

fn pipeline(args: &StageArgs, stage: Option<Stage>) -> anyhow::Result<ExitCode> {
    let result = args.load().and_then(|cfg| match stage {
        None => run_pipeline(&cfg).map(|r| print_json(&r)),
        Some(stage) => run_stage(&cfg, stage).map(|r| print_json(&r)),
    });
    match result {
        Ok(printed) => printed.map(|()| ExitCode::SUCCESS),
        Err(PipelineError::Validation(problems)) => {
            eprintln!("error: invalid config");
            for problem in problems {
                eprintln!("  - {problem}");
            }
            Ok(ExitCode::from(EXIT_VALIDATION))
        }
        Err(e) => {
            eprintln!("error: {e}");
            Ok(ExitCode::from(EXIT_STAGE))
        }
    }
}

fn serve(port: Option<u16>, session_dir: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let mut config = match ServiceConfig::from_env() {
        Ok(config) => config,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_VALIDATION));
        }
    };
    if let Some(port) = port {
        config.port = port;
    }
    if session_dir.is_some() {
        config.persist_dir = session_dir;
    }
    let runtime = tokio::runtime::Runtime::new().context("starting async runtime")?;
    runtime.block_on(async {
        let addr = std::net::SocketAddr::from(([0, 0, 0, 0], config.port));
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on {}", listener.local_addr()?);
        stillmotion_service::serve_on(listener, config).await.context("serving")
    })?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => pipeline(args, None),
        Command::Segment(args) => pipeline(args, Some(Stage::Segment)),
        Command::Inpaint(args) => pipeline(args, Some(Stage::Inpaint)),
        Command::Animate(args) => pipeline(args, Some(Stage::Animate)),
        Command::Serve { port, session_dir } => serve(*port, session_dir.clone()),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
