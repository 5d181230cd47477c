//! Experiment runner for the ccim simulator.
//!
//! Every subcommand echoes its effective configuration into a JSON summary
//! on stdout and writes file artifacts atomically, so identical
//! (config, seed) pairs produce byte-identical outputs. Timestamps appear
//! only in the stderr log line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::SystemTime;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use ccim::cmacro::MacroMode;
use ccim::costmodel::{self, ComponentCosts};
use ccim::doa::{self, AngleDraw};
use ccim::metrology;
use ccim::numfmt::{Complex8, Smf8, VECTOR_LEN};
use ccim::runcfg::{cost_config_from_toml, doa_scenario_from_toml, RunConfig};
use ccim::wimage;
use ccim::{selftest, WeightMemory};

#[derive(Parser)]
#[command(name = "ccim", version, about = "Hybrid digital/analog complex-CIM macro simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Args)]
struct CommonOpts {
    /// TOML run configuration file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial-count override.
    #[arg(long)]
    trials: Option<u64>,
    /// Unit-capacitor mismatch override (relative rms).
    #[arg(long)]
    sigma_u: Option<f64>,
    /// Draw a mismatch instance with this seed instead of running ideal.
    #[arg(long)]
    mismatch_seed: Option<u64>,
    /// Output file for the primary artifact.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Primary artifact format (default: csv for curves, json for
    /// summary-only commands).
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Transfer sweep: input from -FS to +FS, weights fixed at -FS.
    Xfer(XferArgs),
    /// Uniform-input RMS error of the complex MAC.
    Rms(RmsArgs),
    /// Monte Carlo RMS error across capacitor mismatch levels.
    McMismatch(McArgs),
    /// SAR ADC DNL/INL characterization across mismatch seeds.
    AdcChar(AdcArgs),
    /// Direction-of-arrival demo: macro engine vs float engine.
    Doa(DoaArgs),
    /// Relative area/latency/power accounting vs baseline architectures.
    Cost(CostArgs),
    /// Oracle-equivalence self checks (exit code 2 on failure).
    Selftest(SelftestArgs),
    /// Weight-image utilities (generate, convert, inspect).
    Wimg(WimgArgs),
}

#[derive(Args)]
struct XferArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Number of mismatch seeds for the zero-crossing INL report (0 skips).
    #[arg(long, default_value_t = 25)]
    inl_seeds: u32,
}

#[derive(Args)]
struct RmsArgs {
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Comma-separated mismatch levels, e.g. 0,0.0148,0.0296,0.0592.
    #[arg(long, value_delimiter = ',')]
    sigma_list: Option<Vec<f64>>,
    /// Mismatch seeds per sigma point.
    #[arg(long)]
    seeds: Option<u32>,
    /// Complex outputs per seed.
    #[arg(long)]
    trials_per_seed: Option<u64>,
}

#[derive(Args)]
struct AdcArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Mismatch seeds.
    #[arg(long)]
    seeds: Option<u32>,
    /// Unit capacitors composing the CDAC LSB.
    #[arg(long)]
    lsb_units: Option<u32>,
}

#[derive(Args)]
struct DoaArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Standalone scenario TOML (overrides the run config scenario).
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Snapshot SNR in dB.
    #[arg(long)]
    snr_db: Option<f64>,
    /// Snapshots per trial.
    #[arg(long)]
    snapshots: Option<usize>,
    /// Paired trials.
    #[arg(long)]
    doa_trials: Option<u32>,
    /// How source angles are drawn.
    #[arg(long, value_enum)]
    angle_draw: Option<AngleDrawArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AngleDrawArg {
    OnGrid,
    Continuous,
}

#[derive(Args)]
struct CostArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// Standalone component-cost TOML (overrides the run config costs).
    #[arg(long)]
    costs: Option<PathBuf>,
}

#[derive(Args)]
struct SelftestArgs {
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct WimgArgs {
    #[command(subcommand)]
    action: WimgAction,
}

#[derive(Subcommand)]
enum WimgAction {
    /// Generate a weight image.
    Gen {
        /// Fill pattern.
        #[arg(long, value_enum, default_value_t = WimgPattern::NegFs)]
        pattern: WimgPattern,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// bin or hex; inferred from the extension when omitted.
        #[arg(long, value_enum)]
        format: Option<WimgFormat>,
    },
    /// Convert between binary and hex-text images.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse an image and print a content summary.
    Info {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WimgPattern {
    NegFs,
    Zero,
    Random,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WimgFormat {
    Bin,
    Hex,
}

/// Config-file problems exit with code 1; selftest failures with code 2.
fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let started = SystemTime::now();
    let code = match cli.command {
        Command::Xfer(args) => cmd_xfer(args)?,
        Command::Rms(args) => cmd_rms(args)?,
        Command::McMismatch(args) => cmd_mc(args)?,
        Command::AdcChar(args) => cmd_adc(args)?,
        Command::Doa(args) => cmd_doa(args)?,
        Command::Cost(args) => cmd_cost(args)?,
        Command::Selftest(args) => cmd_selftest(args)?,
        Command::Wimg(args) => cmd_wimg(args)?,
    };
    if let Ok(elapsed) = started.elapsed() {
        eprintln!("ccim: done in {:.3}s", elapsed.as_secs_f64());
    }
    Ok(code)
}

/// Load the run config and apply the shared flag overrides.
fn effective_config(common: &CommonOpts) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            RunConfig::from_toml_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.experiment.seed = seed;
    }
    if let Some(trials) = common.trials {
        cfg.experiment.trials = trials;
    }
    if let Some(sigma) = common.sigma_u {
        cfg.macro_cfg.analog.sigma_u = sigma;
    }
    if let Some(seed) = common.mismatch_seed {
        cfg.macro_cfg.mode = MacroMode::Mismatch { seed };
    }
    cfg.validate().context("invalid effective config")?;
    Ok(cfg)
}

#[derive(Serialize)]
struct Summary<'a, R: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    results: R,
    #[serde(skip_serializing_if = "Option::is_none")]
    artifact: Option<String>,
}

/// Print the JSON summary to stdout and optionally write the primary
/// artifact. `csv` is used when the format resolves to CSV.
fn emit<R: Serialize>(
    command: &str,
    cfg: &RunConfig,
    results: R,
    common: &CommonOpts,
    default_format: OutFormat,
    csv: Option<String>,
) -> Result<()> {
    let format = common.format.unwrap_or(default_format);
    let mut artifact = None;
    if let Some(out) = &common.out {
        let body = match (format, &csv) {
            (OutFormat::Csv, Some(text)) => text.clone(),
            _ => {
                let summary = Summary { command, config: cfg, results: &results, artifact: None };
                serde_json::to_string_pretty(&summary)? + "\n"
            }
        };
        write_atomic(out, body.as_bytes())?;
        artifact = Some(out.display().to_string());
    }
    let summary = Summary { command, config: cfg, results: &results, artifact };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let tmp = tempfile::NamedTempFile::new_in(dir)?;
    std::fs::write(tmp.path(), bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

#[derive(Serialize)]
struct XferResults {
    gain: f64,
    offset: f64,
    max_abs_inl: f64,
    max_abs_inl_fit: f64,
    argmax_inl_fit_input: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    zero_crossing: Option<metrology::ZeroCrossingReport>,
    points: usize,
}

fn cmd_xfer(args: XferArgs) -> Result<ExitCode> {
    let cfg = effective_config(&args.common)?;
    let sweep = metrology::transfer_sweep(&cfg.macro_cfg);
    let zero_crossing = if args.inl_seeds > 0 {
        Some(metrology::zero_crossing_inl(&cfg.macro_cfg, args.inl_seeds, cfg.experiment.seed))
    } else {
        None
    };
    let results = XferResults {
        gain: sweep.gain,
        offset: sweep.offset,
        max_abs_inl: sweep.max_abs_inl,
        max_abs_inl_fit: sweep.max_abs_inl_fit,
        argmax_inl_fit_input: sweep.argmax_inl_fit_input,
        zero_crossing,
        points: sweep.points.len(),
    };
    emit("xfer", &cfg, results, &args.common, OutFormat::Csv, Some(sweep.to_csv()))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_rms(args: RmsArgs) -> Result<ExitCode> {
    let cfg = effective_config(&args.common)?;
    let report = metrology::rms_error(&cfg.macro_cfg, cfg.experiment.trials, cfg.experiment.seed);
    emit("rms", &cfg, report, &args.common, OutFormat::Json, None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_mc(args: McArgs) -> Result<ExitCode> {
    let mut cfg = effective_config(&args.common)?;
    if let Some(list) = &args.sigma_list {
        cfg.experiment.sigma_list = list.clone();
    }
    if let Some(seeds) = args.seeds {
        cfg.experiment.seeds_per_point = seeds;
    }
    if let Some(trials) = args.trials_per_seed {
        cfg.experiment.trials_per_seed = trials;
    }
    cfg.validate().context("invalid effective config")?;
    let curve = metrology::mismatch_sweep(
        &cfg.macro_cfg,
        &cfg.experiment.sigma_list,
        cfg.experiment.seeds_per_point,
        cfg.experiment.trials_per_seed,
        cfg.experiment.seed,
    );
    let csv = metrology::curve_to_csv(&curve);
    emit("mc-mismatch", &cfg, curve, &args.common, OutFormat::Csv, Some(csv))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_adc(args: AdcArgs) -> Result<ExitCode> {
    let mut cfg = effective_config(&args.common)?;
    if let Some(seeds) = args.seeds {
        cfg.experiment.adc_seeds = seeds;
    }
    if let Some(lsb) = args.lsb_units {
        cfg.macro_cfg.adc.lsb_units = lsb;
    }
    cfg.validate().context("invalid effective config")?;
    let report = metrology::adc_characterization(
        cfg.macro_cfg.analog.sigma_u,
        cfg.macro_cfg.adc.lsb_units,
        cfg.experiment.adc_seeds,
        cfg.experiment.seed,
    );
    emit("adc-char", &cfg, report, &args.common, OutFormat::Json, None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_doa(args: DoaArgs) -> Result<ExitCode> {
    let mut cfg = effective_config(&args.common)?;
    if let Some(path) = &args.scenario {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        cfg.doa.scenario = doa_scenario_from_toml(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
    }
    if let Some(snr) = args.snr_db {
        cfg.doa.scenario.snr_db = snr;
    }
    if let Some(snaps) = args.snapshots {
        cfg.doa.scenario.n_snapshots = snaps;
    }
    if let Some(trials) = args.doa_trials {
        cfg.doa.trials = trials;
    }
    if let Some(draw) = args.angle_draw {
        cfg.doa.angle_draw = match draw {
            AngleDrawArg::OnGrid => AngleDraw::OnGrid,
            AngleDrawArg::Continuous => AngleDraw::Continuous,
        };
    }
    cfg.validate().context("invalid effective config")?;
    let report = doa::rmse_experiment(
        &cfg.doa.scenario,
        cfg.doa.trials,
        &cfg.macro_cfg,
        cfg.doa.angle_draw,
        cfg.experiment.seed,
    )?;
    let csv = report.to_csv();
    emit("doa", &cfg, report, &args.common, OutFormat::Csv, Some(csv))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct CostResults {
    table: costmodel::CostTable,
    reductions: costmodel::ReductionReport,
}

fn cmd_cost(args: CostArgs) -> Result<ExitCode> {
    let mut cfg = effective_config(&args.common)?;
    match &args.costs {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading costs {}", path.display()))?;
            cfg.cost = cost_config_from_toml(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
        }
        None if args.common.config.is_none() => {
            cfg.cost = ComponentCosts::illustrative();
        }
        None => {}
    }
    let table = costmodel::evaluate_architectures(&cfg.cost)?;
    let reductions = costmodel::reduction_report(&table);
    let csv = table.to_csv();
    let results = CostResults { table, reductions };
    emit("cost", &cfg, results, &args.common, OutFormat::Csv, Some(csv))?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SelftestResults {
    checks: Vec<SelftestLine>,
    passed: bool,
}

#[derive(Serialize)]
struct SelftestLine {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn cmd_selftest(args: SelftestArgs) -> Result<ExitCode> {
    let cfg = effective_config(&args.common)?;
    let trials = if args.common.trials.is_some() { cfg.experiment.trials } else { 10_000 };
    let checks = selftest::run(trials);
    let passed = selftest::all_passed(&checks);
    for check in &checks {
        eprintln!("[{}] {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
    }
    let results = SelftestResults {
        checks: checks
            .into_iter()
            .map(|c| SelftestLine { name: c.name, passed: c.passed, detail: c.detail })
            .collect(),
        passed,
    };
    emit("selftest", &cfg, results, &args.common, OutFormat::Json, None)?;
    Ok(if passed { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn wimg_format_for(path: &Path, requested: Option<WimgFormat>) -> WimgFormat {
    requested.unwrap_or_else(|| match path.extension().and_then(|e| e.to_str()) {
        Some("hex") | Some("txt") => WimgFormat::Hex,
        _ => WimgFormat::Bin,
    })
}

fn read_wimage(path: &Path) -> Result<WeightMemory> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.len() == wimage::IMAGE_BYTES {
        return Ok(wimage::from_bytes(&bytes)?);
    }
    let text = String::from_utf8(bytes).context("image is neither 8192 bytes nor hex text")?;
    Ok(wimage::from_hex(&text)?)
}

fn cmd_wimg(args: WimgArgs) -> Result<ExitCode> {
    match args.action {
        WimgAction::Gen { pattern, seed, out, format } => {
            let mut mem = WeightMemory::new();
            let fill: Box<dyn FnMut() -> Complex8> = match pattern {
                WimgPattern::Zero => Box::new(|| Complex8::ZERO),
                WimgPattern::NegFs => {
                    Box::new(|| Complex8::encode(-127, -127).expect("in range"))
                }
                WimgPattern::Random => {
                    let mut rng = ccim::seeds::rng(seed, &[u64::from_le_bytes(*b"wimg-gen")]);
                    Box::new(move || Complex8 {
                        re: Smf8::from_byte(rand::Rng::gen(&mut rng)),
                        im: Smf8::from_byte(rand::Rng::gen(&mut rng)),
                    })
                }
            };
            let mut fill = fill;
            for unit in 0..ccim::cmacro::UNITS {
                for row in 0..ccim::cmacro::ROWS_PER_UNIT {
                    let v: [Complex8; VECTOR_LEN] = core::array::from_fn(|_| fill());
                    mem.write_row(unit, row, &v).expect("in range");
                }
            }
            match wimg_format_for(&out, format) {
                WimgFormat::Bin => write_atomic(&out, &wimage::to_bytes(&mem))?,
                WimgFormat::Hex => write_atomic(&out, wimage::to_hex(&mem).as_bytes())?,
            }
            println!("{{\"command\":\"wimg-gen\",\"out\":\"{}\"}}", out.display());
        }
        WimgAction::Convert { input, out } => {
            let mem = read_wimage(&input)?;
            match wimg_format_for(&out, None) {
                WimgFormat::Bin => write_atomic(&out, &wimage::to_bytes(&mem))?,
                WimgFormat::Hex => write_atomic(&out, wimage::to_hex(&mem).as_bytes())?,
            }
            println!("{{\"command\":\"wimg-convert\",\"out\":\"{}\"}}", out.display());
        }
        WimgAction::Info { input } => {
            let mem = read_wimage(&input)?;
            let mut nonzero = 0u32;
            let mut sum_mag = 0u64;
            for unit in 0..ccim::cmacro::UNITS {
                for row in 0..ccim::cmacro::ROWS_PER_UNIT {
                    for elem in mem.read_row(unit, row).expect("in range") {
                        let mags = elem.re.mag() as u64 + elem.im.mag() as u64;
                        sum_mag += mags;
                        nonzero += (mags != 0) as u32;
                    }
                }
            }
            println!(
                "{{\"command\":\"wimg-info\",\"rows\":{},\"nonzero_elements\":{},\"mean_mag\":{:.4}}}",
                wimage::IMAGE_ROWS,
                nonzero,
                sum_mag as f64 / (2.0 * 8.0 * wimage::IMAGE_ROWS as f64)
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
