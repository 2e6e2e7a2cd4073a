//! `permfilter` command-line tool: filtering, precision and overlap sweeps,
//! and the accelerator model.

mod report;
mod settings;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use permfilter::fp::{filter_flow, format_sweep, pf_exact, pf_quantized, SweepInput};
use permfilter::hw::{
    frag_step, memory_vs_tile_size, simulate_bank_access, simulate_pipeline, write_access_trace,
    BankMap, BankSimResult, FragDirection, FragState, PassDirection, PipelineConfig,
    PipelineReport,
};
use permfilter::io::{read_flow, read_image, write_atomic, write_flow, write_image};
use permfilter::{
    model_report, overlap_sweep, FilterMode, FilterParams, FpFormat, Image2D, ModelReport, Overlap,
    PermeabilityKind, SystemConfig, TileGeometry,
};
use serde::Serialize;

use report::{emit, ReportFormat, Table};
use settings::Layers;

#[derive(Parser)]
#[command(
    name = "permfilter",
    version,
    about = "Permeability filter, tiled filter and accelerator model"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Filter an image (.pgm/.pfm) or a flow field (.flo).
    Filter(FilterCmd),
    /// Number-format or tile-overlap sweep.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
    /// Analytical memory, bandwidth and throughput figures.
    Model(ModelCmd),
    /// Cycle-level simulations of the tile datapath.
    Simulate {
        #[command(subcommand)]
        kind: SimKind,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mode {
    Global,
    Tiled,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "global" => Ok(Mode::Global),
            "tiled" => Ok(Mode::Tiled),
            other => Err(format!("unknown mode '{other}' (expected global or tiled)")),
        }
    }
}

#[derive(Args)]
struct FilterOpts {
    /// Guiding image; defaults to the input itself.
    #[arg(long)]
    guide: Option<PathBuf>,
    #[arg(long)]
    mode: Option<Mode>,
    /// Number of XY-passes K.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Permeability function: rational, exp or zero (every edge blocks).
    #[arg(long)]
    permeability: Option<PermeabilityKind>,
    /// Tile edge length.
    #[arg(long)]
    tile: Option<usize>,
    /// Tile overlap: 2/3, 3/5 or 1/2.
    #[arg(long)]
    overlap: Option<Overlap>,
    /// Flat `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

const FILTER_KEYS: &[&str] = &[
    "guide",
    "mode",
    "iterations",
    "lambda",
    "sigma",
    "alpha",
    "permeability",
    "tile",
    "overlap",
];

struct FilterSetup {
    params: FilterParams,
    mode: FilterMode,
    guide: Option<PathBuf>,
}

impl FilterOpts {
    fn resolve(&self, layers: &Layers) -> Result<FilterSetup> {
        let d = FilterParams::default();
        let g = TileGeometry::default();
        let params = FilterParams::new(
            layers.or(self.sigma, "sigma", d.sigma)?,
            layers.or(self.alpha, "alpha", d.alpha)?,
            layers.or(self.lambda, "lambda", d.lambda)?,
            layers.or(self.iterations, "iterations", d.iterations)?,
        )?
        .with_permeability(layers.or(
            self.permeability,
            "permeability",
            d.permeability,
        )?);
        let tile = layers.or(self.tile, "tile", g.tile_side)?;
        let overlap = layers.or(self.overlap, "overlap", Overlap::TwoThirds)?;
        let mode = match layers.or(self.mode, "mode", Mode::Tiled)? {
            Mode::Global => FilterMode::Global,
            Mode::Tiled => FilterMode::Tiled(TileGeometry::with_overlap(tile, overlap)?),
        };
        Ok(FilterSetup {
            params,
            mode,
            guide: layers.pick(self.guide.clone(), "guide")?,
        })
    }
}

#[derive(Args)]
struct FilterCmd {
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Emulate every arithmetic operation in this format, e.g. `6,17`.
    #[arg(long)]
    fp: Option<FpFormat>,
    #[command(flatten)]
    opts: FilterOpts,
}

#[derive(Subcommand)]
enum SweepKind {
    /// PSNR (and flow AEE) of reduced-precision formats against double.
    Formats(FormatSweepCmd),
    /// Tiled filter at overlaps 1/2, 3/5 and 2/3 against the global filter.
    Overlap(OverlapSweepCmd),
}

#[derive(Args)]
struct FormatSweepCmd {
    input: PathBuf,
    /// Formats to evaluate, `exp,mant`; repeat the flag for several.
    #[arg(long = "fp")]
    formats: Vec<FpFormat>,
    /// PSNR peak; defaults to the largest magnitude of the reference output.
    #[arg(long)]
    peak: Option<f64>,
    /// Optional flow field (.flo) scored by average endpoint error.
    #[arg(long)]
    flow: Option<PathBuf>,
    /// Guide for the flow field; defaults to `--guide` or the input.
    #[arg(long)]
    flow_guide: Option<PathBuf>,
    #[arg(long)]
    report: Option<ReportFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    opts: FilterOpts,
}

#[derive(Args)]
struct OverlapSweepCmd {
    input: PathBuf,
    /// Directory for `|tiled - global|` images, one PFM per overlap.
    #[arg(long)]
    diff_dir: Option<PathBuf>,
    #[arg(long)]
    report: Option<ReportFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    opts: FilterOpts,
}

#[derive(Args)]
struct SystemOpts {
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Bits per stored sample.
    #[arg(long)]
    word_bits: Option<usize>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    fps: Option<f64>,
    /// Core clock in Hz.
    #[arg(long)]
    core_freq: Option<f64>,
    /// Tile edge; the step is a third of it.
    #[arg(long)]
    tile: Option<usize>,
    #[arg(long)]
    fus: Option<usize>,
    #[arg(long)]
    banks: Option<usize>,
    #[arg(long)]
    interleave: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    report: Option<ReportFormat>,
    #[arg(long)]
    out: Option<PathBuf>,
}

const SYSTEM_KEYS: &[&str] = &[
    "width",
    "height",
    "word_bits",
    "iterations",
    "fps",
    "core_freq",
    "tile",
    "fus",
    "banks",
    "interleave",
    "report",
];

impl SystemOpts {
    fn resolve(&self) -> Result<(SystemConfig, ReportFormat)> {
        let layers = Layers::load(self.config.as_deref(), SYSTEM_KEYS)?;
        let d = SystemConfig::default();
        let tile = layers.or(self.tile, "tile", d.tile_side)?;
        if tile % 3 != 0 {
            bail!(permfilter::Error::Input(format!(
                "tile side {tile} is not divisible by 3"
            )));
        }
        let cfg = SystemConfig {
            width: layers.or(self.width, "width", d.width)?,
            height: layers.or(self.height, "height", d.height)?,
            word_bits: layers.or(self.word_bits, "word_bits", d.word_bits)?,
            iterations: layers.or(self.iterations, "iterations", d.iterations)?,
            fps: layers.or(self.fps, "fps", d.fps)?,
            core_freq: layers.or(self.core_freq, "core_freq", d.core_freq)?,
            tile_side: tile,
            step: tile / 3,
            num_fus: layers.or(self.fus, "fus", d.num_fus)?,
            num_banks: layers.or(self.banks, "banks", d.num_banks)?,
            square: d.square,
            interleave_depth: layers.or(self.interleave, "interleave", d.interleave_depth)?,
        };
        cfg.validate()?;
        Ok((cfg, layers.or(self.report, "report", ReportFormat::Table)?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SimTarget {
    Banks,
    Pipeline,
}

impl FromStr for SimTarget {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "banks" => Ok(Self::Banks),
            "pipeline" => Ok(Self::Pipeline),
            other => Err(format!(
                "unknown simulation '{other}' (expected banks or pipeline)"
            )),
        }
    }
}

#[derive(Args)]
struct ModelCmd {
    /// Also run a datapath simulation.
    #[arg(long)]
    simulate: Option<SimTarget>,
    /// Tile edges for an on-chip memory vs. tile size table, e.g. `24,48,96`.
    #[arg(long, value_delimiter = ',')]
    tile_sizes: Vec<usize>,
    #[command(flatten)]
    system: SystemOpts,
}

#[derive(Subcommand)]
enum SimKind {
    /// SRAM bank conflicts of the checkerboard and row-major maps.
    Banks {
        /// Write the per-cycle access trace of the checkerboard map (CSV).
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        system: SystemOpts,
    },
    /// Adder / multiplier / divider utilization of one tile.
    Pipeline {
        #[command(flatten)]
        system: SystemOpts,
    },
    /// Fragmentation state along a sequence of tile steps.
    Frag {
        /// Steps such as `r,r,d,l,l` (right, left, down).
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<FragDirection>,
        #[command(flatten)]
        system: SystemOpts,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            // Bad parameters are usage errors; everything else is a runtime failure.
            match err.downcast_ref::<permfilter::Error>() {
                Some(permfilter::Error::Input(_)) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Filter(cmd) => cmd_filter(cmd),
        Command::Sweep {
            kind: SweepKind::Formats(cmd),
        } => cmd_format_sweep(cmd),
        Command::Sweep {
            kind: SweepKind::Overlap(cmd),
        } => cmd_overlap_sweep(cmd),
        Command::Model(cmd) => cmd_model(cmd),
        Command::Simulate { kind } => cmd_simulate(kind),
    }
}

fn is_flow(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("flo"))
}

fn load_image(path: &Path) -> Result<Image2D> {
    read_image(path).with_context(|| format!("reading {}", path.display()))
}

/// The guide, or the data itself when none was given.
fn load_guide(guide: Option<&Path>, data: &Image2D) -> Result<Image2D> {
    match guide {
        Some(p) => load_image(p),
        None => Ok(data.clone()),
    }
}

fn describe_mode(mode: &FilterMode) -> String {
    match mode {
        FilterMode::Global => "global".into(),
        FilterMode::Tiled(g) => format!("tiled T={} S={}", g.tile_side, g.step),
    }
}

fn cmd_filter(cmd: FilterCmd) -> Result<()> {
    let mut keys = FILTER_KEYS.to_vec();
    keys.push("fp");
    let layers = Layers::load(cmd.opts.config.as_deref(), &keys)?;
    let setup = cmd.opts.resolve(&layers)?;
    let fp = layers.pick(cmd.fp, "fp")?;
    let start = Instant::now();
    let (width, height) = if is_flow(&cmd.input) {
        let flow =
            read_flow(&cmd.input).with_context(|| format!("reading {}", cmd.input.display()))?;
        let Some(guide) = setup.guide.as_deref() else {
            bail!(permfilter::Error::Input(
                "filtering a flow field needs --guide".into()
            ));
        };
        let guide = load_image(guide)?;
        let out = filter_flow(&guide, &flow, &setup.params, &setup.mode, fp.as_ref())?;
        if !is_flow(&cmd.out) {
            bail!(permfilter::Error::Input(
                "flow output must be a .flo file".into()
            ));
        }
        write_flow(&cmd.out, &out)?;
        (out.width(), out.height())
    } else {
        let data = load_image(&cmd.input)?;
        let guide = load_guide(setup.guide.as_deref(), &data)?;
        let out = match &fp {
            Some(fmt) => pf_quantized(&guide, &data, &setup.params, &setup.mode, fmt)?,
            None => pf_exact(&guide, &data, &setup.params, &setup.mode)?,
        };
        write_image(&cmd.out, &out)?;
        (out.width(), out.height())
    };
    let p = &setup.params;
    eprintln!(
        "filtered {width}x{height} | {} | K={} lambda={} sigma={} alpha={} | {} | {:.3} s",
        describe_mode(&setup.mode),
        p.iterations,
        p.lambda,
        p.sigma,
        p.alpha,
        fp.map_or("f64".to_string(), |f| f.to_string()),
        start.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_format_sweep(cmd: FormatSweepCmd) -> Result<()> {
    let mut keys = FILTER_KEYS.to_vec();
    keys.extend(["fp", "peak", "flow", "flow_guide", "report"]);
    let layers = Layers::load(cmd.opts.config.as_deref(), &keys)?;
    let setup = cmd.opts.resolve(&layers)?;
    let formats = layers.list(cmd.formats, "fp")?;
    if formats.is_empty() {
        bail!(permfilter::Error::Input(
            "format sweep needs at least one --fp exp,mant".into()
        ));
    }
    let report = layers.or(cmd.report, "report", ReportFormat::Csv)?;
    let data = load_image(&cmd.input)?;
    let guide = load_guide(setup.guide.as_deref(), &data)?;
    let flow = match layers.pick(cmd.flow, "flow")? {
        Some(p) => {
            let field = read_flow(&p).with_context(|| format!("reading {}", p.display()))?;
            let fg = match layers.pick(cmd.flow_guide, "flow_guide")? {
                Some(g) => load_image(&g)?,
                None => guide.clone(),
            };
            Some((fg, field))
        }
        None => None,
    };
    let input = SweepInput {
        guide: &guide,
        data: &data,
        peak: layers.pick(cmd.peak, "peak")?,
        flow: flow.as_ref().map(|(g, f)| (g, f)),
    };
    let reports = format_sweep(&input, &formats, &setup.params, &setup.mode)?;
    let mut table = Table::new(&["exp_bits", "mant_bits", "psnr_db", "aee"]);
    for r in &reports {
        table.push(vec![
            r.format.exp_bits.to_string(),
            r.format.mant_bits.to_string(),
            r.psnr_db.to_string(),
            r.aee.map_or(String::new(), |a| a.to_string()),
        ]);
    }
    emit(report, &reports, &table, cmd.out.as_deref())
}

fn cmd_overlap_sweep(cmd: OverlapSweepCmd) -> Result<()> {
    let mut keys = FILTER_KEYS.to_vec();
    keys.extend(["report", "diff_dir"]);
    let layers = Layers::load(cmd.opts.config.as_deref(), &keys)?;
    let setup = cmd.opts.resolve(&layers)?;
    let report = layers.or(cmd.report, "report", ReportFormat::Csv)?;
    let diff_dir: Option<PathBuf> = layers.pick(cmd.diff_dir, "diff_dir")?;
    let tile = match setup.mode {
        FilterMode::Tiled(g) => g.tile_side,
        FilterMode::Global => TileGeometry::default().tile_side,
    };
    let data = load_image(&cmd.input)?;
    let guide = load_guide(setup.guide.as_deref(), &data)?;
    let results = overlap_sweep(&guide, &data, &setup.params, tile)?;

    // Compute every difference image before writing any file.
    let diffs = match &diff_dir {
        Some(dir) => {
            let global = pf_exact(&guide, &data, &setup.params, &FilterMode::Global)?;
            results
                .iter()
                .map(|(r, img)| {
                    let name = format!("overlap_{}.pfm", r.overlap.replace('/', "-"));
                    Ok((dir.join(name), img.abs_diff(&global)?))
                })
                .collect::<Result<Vec<_>>>()?
        }
        None => Vec::new(),
    };
    let reports: Vec<_> = results.into_iter().map(|(r, _)| r).collect();
    let mut table = Table::new(&["overlap", "step", "mean_abs_dev", "seam_residual"]);
    for r in &reports {
        table.push(vec![
            r.overlap.clone(),
            r.step.to_string(),
            r.mean_abs_dev.to_string(),
            r.seam_residual.to_string(),
        ]);
    }
    if let Some(dir) = &diff_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    for (path, img) in &diffs {
        write_image(path, img)?;
    }
    emit(report, &reports, &table, cmd.out.as_deref())
}

#[derive(Serialize)]
struct ModelOutput {
    model: ModelReport,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    tile_sizes: Vec<TileMemory>,
    #[serde(skip_serializing_if = "Option::is_none")]
    banks: Option<Vec<BankSimResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pipeline: Option<PipelineReport>,
}

#[derive(Serialize)]
struct TileMemory {
    tile_side: usize,
    sram_bytes: f64,
}

fn model_rows(table: &mut Table, r: &ModelReport) {
    let t = &r.traffic;
    let rows: [(&str, String, &str); 16] = [
        ("working_memory", r.working_memory_bits.to_string(), "bit"),
        (
            "global_bandwidth",
            r.global_bandwidth_bytes_per_s.to_string(),
            "B/s",
        ),
        ("tile_sram", r.tile_sram_bytes.to_string(), "B"),
        ("tile_count", r.tile_count.to_string(), "tiles"),
        ("divisions", r.divisions_per_s.to_string(), "div/s"),
        (
            "dividers_fractional",
            format!("{:.3}", r.dividers_fractional),
            "units",
        ),
        ("min_dividers", r.min_dividers.to_string(), "units"),
        ("dividers_rounded", r.dividers_rounded.to_string(), "units"),
        (
            "traffic_input_data",
            t.input_data_bytes.to_string(),
            "B/frame",
        ),
        (
            "traffic_input_pi_x",
            t.input_pi_x_bytes.to_string(),
            "B/frame",
        ),
        (
            "traffic_input_pi_y",
            t.input_pi_y_bytes.to_string(),
            "B/frame",
        ),
        ("traffic_output", t.output_bytes.to_string(), "B/frame"),
        (
            "traffic_partial_blend",
            t.partial_blend_bytes.to_string(),
            "B/frame",
        ),
        ("bytes_per_frame", r.bytes_per_frame.to_string(), "B/frame"),
        (
            "tiled_bandwidth",
            r.tiled_bandwidth_bytes_per_s.to_string(),
            "B/s",
        ),
        (
            "bandwidth_reduction",
            format!("{:.3}", r.bandwidth_reduction_factor),
            "x",
        ),
    ];
    for (name, value, unit) in rows {
        table.push(vec!["model".into(), name.into(), value, unit.into()]);
    }
}

fn bank_runs(cfg: &SystemConfig, keep_trace: bool) -> Result<Vec<BankSimResult>> {
    let mut out = Vec::new();
    for map in [BankMap::Checkerboard, BankMap::RowMajor] {
        for dir in [PassDirection::Horizontal, PassDirection::Vertical] {
            out.push(simulate_bank_access(
                cfg,
                dir,
                map,
                keep_trace && map == BankMap::Checkerboard,
            )?);
        }
    }
    Ok(out)
}

fn bank_rows(table: &mut Table, runs: &[BankSimResult]) {
    for r in runs {
        let section = format!("banks/{}/{}", name_of(&r.map), name_of(&r.direction));
        table.push(vec![
            section.clone(),
            "cycles".into(),
            r.cycles.to_string(),
            "cycles".into(),
        ]);
        table.push(vec![
            section.clone(),
            "conflict_count".into(),
            r.conflict_cycles.to_string(),
            "cycles".into(),
        ]);
        table.push(vec![
            section,
            "worst_fanin".into(),
            r.worst_fanin.to_string(),
            "FUs".into(),
        ]);
    }
}

fn pipeline_rows(table: &mut Table, r: &PipelineReport) {
    let rows = [
        ("cycles", r.cycles.to_string(), "cycles"),
        (
            "adder_utilization",
            format!("{:.4}", r.adder_utilization),
            "fraction",
        ),
        (
            "multiplier_utilization",
            format!("{:.4}", r.multiplier_utilization),
            "fraction",
        ),
        (
            "divider_utilization",
            format!("{:.4}", r.divider_utilization),
            "fraction",
        ),
        ("bubbles", r.bubbles.to_string(), "slots"),
    ];
    for (name, value, unit) in rows {
        table.push(vec!["pipeline".into(), name.into(), value, unit.into()]);
    }
}

/// Lower-case serde name of a unit enum.
fn name_of<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(str::to_string))
        .unwrap_or_default()
}

const REPORT_HEADER: &[&str] = &["section", "quantity", "value", "unit"];

fn cmd_model(cmd: ModelCmd) -> Result<()> {
    let (cfg, report) = cmd.system.resolve()?;
    let model = model_report(&cfg);
    let mut table = Table::new(REPORT_HEADER);
    model_rows(&mut table, &model);
    let tile_sizes: Vec<TileMemory> = memory_vs_tile_size(&cmd.tile_sizes, cfg.word_bits)
        .into_iter()
        .map(|(tile_side, sram_bytes)| TileMemory {
            tile_side,
            sram_bytes,
        })
        .collect();
    for t in &tile_sizes {
        table.push(vec![
            "tile_memory".into(),
            format!("T={}", t.tile_side),
            t.sram_bytes.to_string(),
            "B".into(),
        ]);
    }
    let mut out = ModelOutput {
        model,
        tile_sizes,
        banks: None,
        pipeline: None,
    };
    match cmd.simulate {
        Some(SimTarget::Banks) => {
            let runs = bank_runs(&cfg, false)?;
            bank_rows(&mut table, &runs);
            out.banks = Some(runs);
        }
        Some(SimTarget::Pipeline) => {
            let r = simulate_pipeline(&PipelineConfig::from_system(&cfg))?;
            pipeline_rows(&mut table, &r);
            out.pipeline = Some(r);
        }
        None => {}
    }
    emit(report, &out, &table, cmd.system.out.as_deref())
}

#[derive(Serialize)]
struct FragRow {
    step: usize,
    direction: FragDirection,
    sx: usize,
    sy: usize,
    retained: usize,
    replaced: (usize, usize, usize, usize),
}

fn cmd_simulate(kind: SimKind) -> Result<()> {
    match kind {
        SimKind::Banks { trace, system } => {
            let (cfg, report) = system.resolve()?;
            let runs = bank_runs(&cfg, trace.is_some())?;
            let mut table = Table::new(REPORT_HEADER);
            bank_rows(&mut table, &runs);
            if let Some(path) = &trace {
                let checker = runs
                    .iter()
                    .filter(|r| r.map == BankMap::Checkerboard)
                    .flat_map(|r| r.trace.iter().copied())
                    .collect::<Vec<_>>();
                write_atomic(path, |w| write_access_trace(&checker, w))?;
            }
            emit(report, &runs, &table, system.out.as_deref())
        }
        SimKind::Pipeline { system } => {
            let (cfg, report) = system.resolve()?;
            let r = simulate_pipeline(&PipelineConfig::from_system(&cfg))?;
            let mut table = Table::new(REPORT_HEADER);
            pipeline_rows(&mut table, &r);
            emit(report, &r, &table, system.out.as_deref())
        }
        SimKind::Frag { steps, system } => {
            let (cfg, report) = system.resolve()?;
            let mut state = FragState::default();
            let mut rows = Vec::new();
            for (i, &dir) in steps.iter().enumerate() {
                let s = frag_step(state, dir, cfg.tile_side)?;
                state = s.state;
                rows.push(FragRow {
                    step: i + 1,
                    direction: dir,
                    sx: s.state.sx,
                    sy: s.state.sy,
                    retained: s.retained,
                    replaced: s.replaced,
                });
            }
            let mut table = Table::new(&["step", "direction", "sx", "sy", "retained", "replaced"]);
            for r in &rows {
                let (row, col, h, w) = r.replaced;
                table.push(vec![
                    r.step.to_string(),
                    name_of(&r.direction),
                    r.sx.to_string(),
                    r.sy.to_string(),
                    r.retained.to_string(),
                    format!("{h}x{w}@({row},{col})"),
                ]);
            }
            emit(report, &rows, &table, system.out.as_deref())
        }
    }
}
