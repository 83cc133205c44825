use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use srsbs::config::{self, SEED_ENV};
use srsbs::formats::{self, DetailedRow, Manifest, ResultRow, SweepSpec};
use srsbs::{runner, Error, ExperimentConfig, Result};
use srsbs_core::channel::ScenarioPreset;
use srsbs_core::harness::{self, Metrics, Scenario};

#[derive(Parser, Debug)]
#[command(name = "srsbs", version, about = "SRS ambient backscatter simulator and detector")]
struct Cli {
    /// JSON experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed (and SRSBS_SEED).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Manifest path; defaults to `<out>.manifest.json`, or stderr when
    /// writing to stdout.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// Channel preset: noiseless, indoor_short, indoor_long or outdoor.
    #[arg(long)]
    scenario: Option<ScenarioPreset>,
    /// Code id the TAG transmits.
    #[arg(long)]
    code: Option<usize>,
    /// Number of messages R.
    #[arg(long = "messages", short = 'R')]
    messages: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the 33 candidate codes as CSV.
    GenCodes,
    /// Run one experiment and write the results table.
    Simulate {
        #[command(flatten)]
        overrides: Overrides,
        /// Run with the TAG switched off.
        #[arg(long)]
        tag_off: bool,
        /// Write the a^(k) trace, one value per line.
        #[arg(long)]
        export_trace: Option<PathBuf>,
        /// Write every raw detection event as CSV.
        #[arg(long)]
        export_events: Option<PathBuf>,
    },
    /// Run the detector over an amplitude trace and write the events.
    Detect {
        #[arg(long)]
        trace: PathBuf,
        /// Collapse runs of events into one detection each.
        #[arg(long)]
        dedup: bool,
    },
    /// TAG-OFF then TAG-ON runs over the same channel realisation.
    Baseline {
        #[command(flatten)]
        overrides: Overrides,
        /// Writes `<prefix>.off.txt` and `<prefix>.on.txt`.
        #[arg(long)]
        export_traces: Option<PathBuf>,
    },
    /// One experiment per value of a scalar parameter.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// base_gain, modulation_depth, noise_sigma, spike_probability, spike_gain,
        /// drift_rate, theta, alpha, u, P or Q.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
    },
}

impl Cli {
    fn resolve(&self, overrides: &Overrides) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => config::load(path)?,
            None => ExperimentConfig::default(),
        };
        let env = std::env::var(SEED_ENV).ok();
        cfg.seed = config::resolve_seed(cfg.seed, env.as_deref(), self.seed)?;
        if let Some(p) = overrides.scenario {
            cfg.scenario = Scenario::Preset(p);
        }
        if let Some(c) = overrides.code {
            cfg.tag_code_id = c;
        }
        if let Some(r) = overrides.messages {
            cfg.messages = r;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn write_output(&self, bytes: &[u8]) -> Result<()> {
        match &self.out {
            Some(path) => std::fs::write(path, bytes).map_err(|e| Error::Io {
                path: path.clone(),
                source: e,
            }),
            None => std::io::stdout().write_all(bytes).map_err(|e| Error::Io {
                path: "<stdout>".into(),
                source: e,
            }),
        }
    }

    fn write_manifest(&self, mut manifest: Manifest) -> Result<()> {
        if let Some(out) = &self.out {
            manifest.outputs.insert(0, out.display().to_string());
        }
        let target = self.manifest.clone().or_else(|| {
            self.out.as_ref().map(|o| {
                let mut name = o.as_os_str().to_owned();
                name.push(".manifest.json");
                PathBuf::from(name)
            })
        });
        let json = manifest.to_json();
        match target {
            Some(path) => std::fs::write(&path, json + "\n").map_err(|e| Error::Io { path, source: e }),
            None => {
                eprintln!("{json}");
                Ok(())
            }
        }
    }

    fn results(&self, rows: Vec<(ResultRow, &Metrics)>) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        match self.format {
            Format::Csv => {
                let plain: Vec<ResultRow> = rows.iter().map(|(r, _)| r.clone()).collect();
                formats::write_results(&plain, &mut buf)?;
            }
            Format::Json => {
                let detailed: Vec<DetailedRow> =
                    rows.into_iter().map(|(r, m)| DetailedRow::new(r, m)).collect();
                serde_json::to_writer_pretty(&mut buf, &detailed).expect("rows serialize");
                buf.push(b'\n');
            }
        }
        Ok(buf)
    }
}

fn export(path: &Path, trace: &[f64], manifest: &mut Manifest) -> Result<()> {
    formats::save_trace(path, trace)?;
    manifest.outputs.push(path.display().to_string());
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenCodes => {
            let cfg = cli.resolve(&Overrides::default())?;
            let mut buf = Vec::new();
            formats::write_codes(&cfg.codes.code_set()?, &mut buf)?;
            cli.write_output(&buf)?;
            cli.write_manifest(Manifest::new("gen-codes", &cfg))
        }
        Command::Simulate {
            overrides,
            tag_off,
            export_trace,
            export_events,
        } => {
            let mut cfg = cli.resolve(overrides)?;
            if *tag_off {
                cfg.tag_enabled = false;
            }
            let run = harness::simulate(&cfg)?;
            let mut manifest = Manifest::new("simulate", &cfg);
            if let Some(path) = export_trace {
                export(path, &run.trace, &mut manifest)?;
            }
            if let Some(path) = export_events {
                let file = std::fs::File::create(path).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                formats::write_events(&run.metrics.events, std::io::BufWriter::new(file))?;
                manifest.outputs.push(path.display().to_string());
            }
            let out = cli.results(vec![(ResultRow::new("", &run.metrics, cfg.seed), &run.metrics)])?;
            cli.write_output(&out)?;
            cli.write_manifest(manifest)
        }
        Command::Detect { trace, dedup } => {
            let cfg = cli.resolve(&Overrides::default())?;
            let samples = formats::load_trace(trace)?;
            let mut events = harness::detect_trace(&cfg, &samples)?;
            if *dedup {
                events = harness::deduplicate(&events, cfg.message_periods());
            }
            let mut buf = Vec::new();
            match cli.format {
                Format::Csv => formats::write_events(&events, &mut buf)?,
                Format::Json => {
                    serde_json::to_writer_pretty(&mut buf, &events).expect("events serialize");
                    buf.push(b'\n');
                }
            }
            cli.write_output(&buf)?;
            let mut manifest = Manifest::new("detect", &cfg);
            manifest.outputs.push(trace.display().to_string());
            cli.write_manifest(manifest)
        }
        Command::Baseline {
            overrides,
            export_traces,
        } => {
            let cfg = cli.resolve(overrides)?;
            let (off, on) = harness::run_phases(&cfg)?;
            let mut manifest = Manifest::new("baseline", &cfg);
            if let Some(prefix) = export_traces {
                export(&with_suffix(prefix, ".off.txt"), &off.trace, &mut manifest)?;
                export(&with_suffix(prefix, ".on.txt"), &on.trace, &mut manifest)?;
            }
            let out = cli.results(vec![
                (ResultRow::new("tag_off", &off.metrics, cfg.seed), &off.metrics),
                (ResultRow::new("tag_on", &on.metrics, cfg.seed), &on.metrics),
            ])?;
            cli.write_output(&out)?;
            cli.write_manifest(manifest)
        }
        Command::Sweep {
            overrides,
            param,
            values,
        } => {
            let cfg = cli.resolve(overrides)?;
            let table = runner::sweep(&cfg, param, values)?;
            let rows = table
                .iter()
                .map(|(v, c, m)| (ResultRow::new(v.to_string(), m, c.seed), m))
                .collect();
            let out = cli.results(rows)?;
            cli.write_output(&out)?;
            let mut manifest = Manifest::new("sweep", &cfg);
            manifest.sweep = Some(SweepSpec {
                parameter: param.clone(),
                values: values.clone(),
                seeds: table.iter().map(|(_, c, _)| c.seed).collect(),
            });
            cli.write_manifest(manifest)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("srsbs: {e}");
            ExitCode::from(2)
        }
    }
}
