use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;

use tec_core::config::{parse_config, RunConfig, SweepConfig};
use tec_core::network::ChannelPath;
use tec_core::output::{emit_plot, write_csv};
use tec_core::safety;
use tec_core::sweeps::{path_comparison, run_sweep, SweepParam, SweepResult};
use tec_core::Error;

#[derive(Debug, Parser)]
#[command(
    name = "tec",
    version,
    about = "Galvanic-coupled intra-body channel model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Placement(s): ss, sm, ms, mm or all; comma separated.
    #[arg(long, global = true)]
    path: Option<String>,

    /// Frequency in Hz, or `start:stop[:count]` for a log grid.
    #[arg(long, global = true)]
    freq: Option<String>,

    /// One-factor sweep, `param=start:stop:count` in mm or Hz.
    #[arg(long, global = true)]
    sweep: Option<String>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write an SVG plot.
    #[arg(long, global = true)]
    plot: bool,

    /// Treat empty results as errors.
    #[arg(long, global = true)]
    strict: bool,

    /// Inline override, `section.key=value`; may be repeated.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gain and phase over the frequency grid.
    Gain,
    /// One-factor parameter sweep.
    Sweep,
    /// Contact current, current density and frequency checks.
    Safety,
    /// All four placements side by side.
    Compare,
}

fn flag_overrides(cli: &Cli) -> Result<Vec<String>, Error> {
    let mut ov = cli.overrides.clone();
    if let Some(p) = &cli.path {
        let list: Vec<String> = p.split(',').map(|s| format!("\"{}\"", s.trim())).collect();
        ov.push(format!("paths=[{}]", list.join(",")));
    }
    if let Some(f) = &cli.freq {
        let parts: Vec<&str> = f.split(':').collect();
        let num = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| Error::Validation {
                field: "--freq".into(),
                message: format!("`{s}` is not a number"),
            })
        };
        match parts.as_slice() {
            [one] => {
                let v = num(one)?;
                ov.push(format!("frequency.start_hz={v:e}"));
                ov.push(format!("frequency.stop_hz={v:e}"));
            }
            [a, b] | [a, b, _] => {
                ov.push(format!("frequency.start_hz={:e}", num(a)?));
                ov.push(format!("frequency.stop_hz={:e}", num(b)?));
                if let [_, _, c] = parts.as_slice() {
                    let n: usize = c.trim().parse().map_err(|_| Error::Validation {
                        field: "--freq".into(),
                        message: format!("`{c}` is not a point count"),
                    })?;
                    ov.push(format!("frequency.count={n}"));
                }
            }
            _ => {
                return Err(Error::Validation {
                    field: "--freq".into(),
                    message: format!("expected Hz or start:stop[:count], got `{f}`"),
                })
            }
        }
    }
    if let Some(dir) = &cli.out {
        ov.push(format!("output.dir={:?}", dir.display().to_string()));
    }
    if cli.plot {
        ov.push("output.plot=true".into());
    }
    if cli.strict {
        ov.push("output.strict=true".into());
    }
    Ok(ov)
}

fn parse_sweep_flag(s: &str) -> Result<SweepConfig, Error> {
    let bad = |msg: String| Error::Validation {
        field: "--sweep".into(),
        message: msg,
    };
    let (name, range) = s
        .split_once('=')
        .ok_or_else(|| bad(format!("expected param=start:stop:count, got `{s}`")))?;
    let param: SweepParam = name.parse()?;
    let parts: Vec<&str> = range.split(':').collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(bad(format!("expected start:stop:count, got `{range}`")));
    };
    let num = |v: &str| {
        v.trim()
            .parse::<f64>()
            .map_err(|_| bad(format!("`{v}` is not a number")))
    };
    Ok(SweepConfig {
        param: param.label(),
        start: num(a)?,
        stop: num(b)?,
        count: c
            .trim()
            .parse()
            .map_err(|_| bad(format!("`{c}` is not a point count")))?,
        log_spacing: param == SweepParam::Frequency,
    })
}

fn resolve(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = parse_config(cli.config.as_deref(), &flag_overrides(cli)?)?;
    if let Some(s) = &cli.sweep {
        cfg.sweep = Some(parse_sweep_flag(s)?);
        cfg.validate()?;
    }
    Ok(cfg)
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_outputs(cfg: &RunConfig, stem: &str, result: &SweepResult) -> Result<(), Error> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(io(dir))?;
    let meta = dir.join(format!("{stem}.config.toml"));
    fs::write(&meta, cfg.to_toml_string()).map_err(io(&meta))?;
    let csv = dir.join(format!("{stem}.csv"));
    write_csv(result, &csv, cfg.output.strict)?;
    println!("wrote {}", csv.display());
    if cfg.output.plot {
        let svg = dir.join(format!("{stem}.svg"));
        if emit_plot(result, &svg, cfg.output.strict)? {
            println!("wrote {}", svg.display());
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let mut cfg = resolve(cli)?;
    let table = cfg.load_table()?;
    info!("resolved configuration:\n{}", cfg.to_toml_string());
    match cli.command {
        Command::Gain => {
            cfg.sweep = None;
            let result = run_sweep(&cfg.sweep_spec(&table)?)?;
            for r in &result.records {
                println!(
                    "{:>12.1} Hz  {:<4} {:>9.3} dB {:>8.3}°",
                    r.point.frequency_hz, r.path, r.point.gain_db, r.point.phase_deg
                );
            }
            write_outputs(&cfg, "gain", &result)
        }
        Command::Sweep => {
            if cfg.sweep.is_none() {
                return Err(Error::Config(
                    "sweep needs --sweep param=start:stop:count or a [sweep] section".into(),
                ));
            }
            let result = run_sweep(&cfg.sweep_spec(&table)?)?;
            let stem = format!("sweep_{}", result.param.name());
            write_outputs(&cfg, &stem, &result)
        }
        Command::Safety => {
            let scenario = cfg.scenario(&table)?;
            let paths = cfg.channel_paths()?;
            let dir = &cfg.output.dir;
            fs::create_dir_all(dir).map_err(io(dir))?;
            let mut reports = Vec::new();
            for p in paths {
                let report = safety::evaluate(
                    &table,
                    &scenario.stack,
                    &p.place(&scenario.geom),
                    &scenario.elec,
                    scenario.freq_hz,
                    cfg.safety.drive_current_ma * 1e-3,
                    &cfg.safety.limits(),
                )?;
                println!(
                    "{p:<4} contact {:.4e} A  density {:.4e} A/m²  verdict {}",
                    report.contact_current_a,
                    report.contact_density_a_per_m2,
                    if report.verdict.passed() {
                        "pass"
                    } else {
                        "fail"
                    }
                );
                if let safety::Verdict::Fail(reasons) = &report.verdict {
                    for r in reasons {
                        println!("     - {r}");
                    }
                }
                reports.push((p.label(), report));
            }
            let json = dir.join("safety.json");
            let text = serde_json::to_string_pretty(&reports).expect("report serializes");
            fs::write(&json, text + "\n").map_err(io(&json))?;
            let meta = dir.join("safety.config.toml");
            fs::write(&meta, cfg.to_toml_string()).map_err(io(&meta))?;
            println!("wrote {}", json.display());
            Ok(())
        }
        Command::Compare => {
            cfg.sweep = None;
            cfg.paths = vec!["all".into()];
            let base = cfg.scenario(&table)?;
            let freqs = cfg.frequency.grid();
            let cmp = path_comparison(&base, &freqs)?;
            println!(
                "{:>12}  {:>9} {:>9} {:>9} {:>9}  ordering",
                "Hz", "S-S", "S-M", "M-S", "M-M"
            );
            for (i, f) in freqs.iter().enumerate() {
                let g = |p| cmp.gain(i, p);
                println!(
                    "{:>12.1}  {:>9.3} {:>9.3} {:>9.3} {:>9.3}  {}",
                    f,
                    g(ChannelPath::SS),
                    g(ChannelPath::SM),
                    g(ChannelPath::MS),
                    g(ChannelPath::MM),
                    cmp.ranking(i)
                        .iter()
                        .map(|p| p.label())
                        .collect::<Vec<_>>()
                        .join(" > ")
                );
            }
            let spec = cfg.sweep_spec(&table)?;
            let result = SweepResult {
                param: spec.param,
                base,
                records: freqs
                    .iter()
                    .enumerate()
                    .flat_map(|(i, &f)| {
                        cmp.rows[i]
                            .iter()
                            .map(move |pt| tec_core::sweeps::SweepRecord {
                                value: f,
                                path: pt.path.expect("placement path"),
                                point: *pt,
                            })
                    })
                    .collect(),
            };
            write_outputs(&cfg, "compare", &result)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
