//! `posture-bench`: command-line front door for the posture-control bench.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use futures::StreamExt;
use posture_client::Client;
use posture_core::api::{self, PlanMode, TargetRequest};
use posture_core::control::{Command, Frame, LogWriter, Mode, Session, SplitRequest};
use posture_core::emg::{self, ConditionId, EmgFixture};
use posture_core::posture::{fit_plane, load_track, plane_to_posture, posture_to_gravity};
use posture_core::BenchConfig;
use posture_service::{Service, ServiceOptions};

#[derive(Parser)]
#[command(name = "posture-bench", version, about = "Seated echocardiography posture-control bench simulator")]
struct Cli {
    /// Bench configuration (JSON). Defaults are built in.
    #[arg(long, global = true, env = "POSTURE_BENCH_CONFIG")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the HTTP control service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Append the session log (JSONL) to this file.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Simulated ticks per real tick period.
        #[arg(long, default_value_t = 1)]
        speedup: u32,
    },
    /// Move to a posture and report the final state.
    Simulate {
        /// Target posture as ROLL,PITCH in degrees.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        target: (f64, f64),
        /// Roll split as LAT,THOR in degrees. Chosen by the load optimizer if omitted.
        #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
        split: Option<(f64, f64)>,
        /// Drive a running service instead of a local session.
        #[arg(long)]
        url: Option<String>,
        /// Write the local session log (JSONL) here.
        #[arg(long, conflicts_with = "url")]
        log: Option<PathBuf>,
    },
    /// Fit the chest plane to a probe track CSV (t,x,y,z) and print the posture angles.
    FitPosture { track: PathBuf },
    /// Compute EMG load ratios between conditions A-D.
    Emg {
        /// One subject's recordings: A=a.csv,B=b.csv,C=c.csv,D=d.csv. Repeat per subject.
        #[arg(long = "conditions", value_parser = parse_conditions)]
        conditions: Vec<BTreeMap<ConditionId, PathBuf>>,
        /// Synthetic fixture to analyse instead of recordings.
        #[arg(long, conflicts_with = "conditions")]
        fixture: Option<PathBuf>,
        /// Sidecar JSON mapping CSV column names to muscle channels.
        #[arg(long)]
        channel_map: Option<PathBuf>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Plan a low-load posture diagnosable for the given views.
    Plan {
        /// Comma-separated view ids or aliases (plax, a4c).
        #[arg(long)]
        views: String,
        #[arg(long)]
        subject: Option<String>,
        /// Plan each view separately instead of one shared posture.
        #[arg(long)]
        per_view: bool,
        #[arg(long)]
        url: Option<String>,
    },
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got `{s}`"))?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    Ok((num(a)?, num(b)?))
}

fn parse_conditions(s: &str) -> Result<BTreeMap<ConditionId, PathBuf>, String> {
    let mut out = BTreeMap::new();
    for part in s.split(',') {
        let (id, path) = part
            .split_once('=')
            .ok_or_else(|| format!("expected COND=path, got `{part}`"))?;
        let id: ConditionId = id.parse().map_err(|e: posture_core::Error| e.to_string())?;
        if out.insert(id, PathBuf::from(path.trim())).is_some() {
            return Err(format!("condition {id} given twice"));
        }
    }
    if let Some(missing) = ConditionId::ALL.into_iter().find(|c| !out.contains_key(c)) {
        return Err(format!("condition {missing} is missing"));
    }
    Ok(out)
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn split_request(split: Option<(f64, f64)>) -> SplitRequest {
    match split {
        Some((lat_deg, thor_deg)) => SplitRequest::Manual { lat_deg, thor_deg },
        None => SplitRequest::default(),
    }
}

fn simulate_local(config: BenchConfig, target: (f64, f64), split: Option<(f64, f64)>, log: Option<&Path>) -> Result<Frame> {
    let mut session = match log {
        Some(_) => Session::recording(config)?,
        None => Session::new(config)?,
    };
    session.command(Command::SetTarget {
        roll_deg: target.0,
        pitch_deg: target.1,
        split: split_request(split),
    })?;
    let dt = session.tick_period_s();
    let mut frame = session.snapshot();
    while frame.mode == Mode::Moving {
        frame = session.tick(dt)?;
    }
    if let Some(path) = log {
        let mut w = LogWriter::create(path)?;
        w.append(&session.take_log())?;
        w.flush()?;
    }
    Ok(frame)
}

async fn simulate_remote(url: &str, target: (f64, f64), split: Option<(f64, f64)>) -> Result<Frame> {
    let client = Client::new(url);
    let mut frames = client.telemetry().await?;
    let mut frame = client
        .set_target(&TargetRequest {
            roll_deg: target.0,
            pitch_deg: target.1,
            split: split_request(split),
        })
        .await?;
    let issued = frame.t;
    while frame.mode == Mode::Moving || frame.t <= issued {
        frame = frames.next().await.context("telemetry stream ended")??;
    }
    Ok(frame)
}

fn run_emg(
    config: &BenchConfig,
    conditions: Vec<BTreeMap<ConditionId, PathBuf>>,
    fixture: Option<PathBuf>,
    channel_map: Option<PathBuf>,
    report: Option<PathBuf>,
) -> Result<()> {
    let map = channel_map.map(emg::load_channel_map).transpose()?;
    let mut subjects = Vec::new();
    if let Some(path) = fixture {
        let fx = EmgFixture::load(&path).with_context(|| format!("loading {}", path.display()))?;
        for (i, s) in fx.subjects.iter().enumerate() {
            let mut loads = BTreeMap::new();
            for c in ConditionId::ALL {
                loads.insert(c, emg::load_estimate(&fx.synthesize(i, c)?, &config.emg)?);
            }
            subjects.push((s.id.clone(), loads));
        }
    } else {
        if conditions.is_empty() {
            bail!("give --conditions once per subject, or --fixture");
        }
        for (i, files) in conditions.into_iter().enumerate() {
            let mut loads = BTreeMap::new();
            for (c, path) in files {
                let rec = emg::load_emg_csv(&path, map.as_ref()).with_context(|| format!("reading {}", path.display()))?;
                loads.insert(c, emg::load_estimate(&rec, &config.emg)?);
            }
            subjects.push((format!("S{}", i + 1), loads));
        }
    }
    let report_data = emg::ratio_report(subjects)?;
    print!("{}", report_data.to_text());
    if let Some(path) = report {
        std::fs::write(&path, report_data.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

#[tokio::main]
async fn main() -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let config = BenchConfig::resolve(cli.config.as_deref())?;

    match cli.command {
        Cmd::Serve { port, host, log, speedup } => {
            let svc = Service::start(
                (host.as_str(), port),
                ServiceOptions {
                    config,
                    log_path: log,
                    speedup,
                },
            )
            .await?;
            println!("listening on {}", svc.url());
            svc.run_until_ctrl_c().await?;
        }
        Cmd::Simulate { target, split, url, log } => {
            let frame = match url {
                Some(url) => simulate_remote(&url, target, split).await?,
                None => simulate_local(config, target, split, log.as_deref())?,
            };
            print_json(&frame)?;
        }
        Cmd::FitPosture { track } => {
            let track = load_track(&track).with_context(|| format!("reading {}", track.display()))?;
            let plane = fit_plane(&track)?;
            let posture = plane_to_posture(&plane);
            print_json(&serde_json::json!({
                "samples": track.samples.len(),
                "plane": plane,
                "posture": posture,
                "gravity_angles": posture_to_gravity(posture),
            }))?;
        }
        Cmd::Emg {
            conditions,
            fixture,
            channel_map,
            report,
        } => run_emg(&config, conditions, fixture, channel_map, report)?,
        Cmd::Plan {
            views,
            subject,
            per_view,
            url,
        } => {
            let mode = if per_view { PlanMode::PerView } else { PlanMode::Joint };
            let views = api::parse_views(&views);
            let plan = match url {
                Some(url) => Client::new(url).plan(&views, subject.as_deref(), mode).await?,
                None => api::plan(&config, &views, subject.as_deref(), config.weights, mode)?,
            };
            print_json(&plan)?;
        }
    }
    Ok(())
}
