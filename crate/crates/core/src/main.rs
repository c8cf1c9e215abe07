#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use coupled_de::channel::{ChannelFamily, ChannelKind};
use coupled_de::coupled::{self, ChainProfile, CoupledSpec, CoupledSystem, SweepOptions};
use coupled_de::de::{self, DeStatus, StopRule};
use coupled_de::potential::{self, CandidateStrategy, PotentialEstimator};
use coupled_de::{EnsembleSpec, Error, GridSpec};

const DEFAULT_ENSEMBLE: &str = r#"{"kind":"ldpc","lambda":[0,0,1],"rho":[0,0,0,0,0,1]}"#;

#[derive(Parser, Debug)]
#[command(name = "coupled-de", version, about = "Density evolution and threshold saturation batch runs")]
struct Cli {
    /// JSON run config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Ensemble JSON file.
    #[arg(long, global = true)]
    ensemble: Option<PathBuf>,
    #[arg(long, global = true)]
    channel: Option<ChannelKind>,
    /// Channel entropy.
    #[arg(long, global = true)]
    h: Option<f64>,
    /// Native channel parameter (erasure prob, crossover prob or sigma).
    #[arg(long, global = true)]
    param: Option<f64>,
    /// Grid bins; defaults to $COUPLED_DE_BINS or 4096.
    #[arg(long, global = true)]
    bins: Option<usize>,
    #[arg(long, global = true)]
    tol_dh: Option<f64>,
    #[arg(long, global = true)]
    tol_h: Option<f64>,
    #[arg(long, global = true)]
    max_iter: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
enum ThresholdKind {
    Bp,
    Potential,
    Stability,
    /// LDGM: where DE from Δ0 stops landing on the minimal fixed point.
    LdgmEmergence,
    /// LDGM: where the energy gap changes sign.
    LdgmGap,
}

#[derive(Subcommand, Debug)]
enum Command {
    Threshold {
        #[arg(long)]
        kind: ThresholdKind,
        #[arg(long)]
        estimator: Option<PotentialEstimator>,
        /// Skip running the other potential estimator.
        #[arg(long)]
        no_cross_check: bool,
        #[arg(long)]
        lo: Option<f64>,
        #[arg(long)]
        hi: Option<f64>,
    },
    De {
        /// Start from Δ∞ instead of Δ0.
        #[arg(long)]
        from_perfect: bool,
    },
    Coupled {
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        w: Option<usize>,
        #[arg(long)]
        modified: bool,
        #[arg(long)]
        i0: Option<usize>,
        /// Profile snapshot interval; 0 writes only the start and terminal profiles.
        #[arg(long)]
        snapshot_every: Option<usize>,
    },
    Sweep {
        #[arg(long = "N", value_delimiter = ',')]
        ns: Vec<usize>,
        #[arg(long = "w", value_delimiter = ',')]
        ws: Vec<usize>,
        #[arg(long = "hs", value_delimiter = ',')]
        hs: Vec<f64>,
        #[arg(long)]
        modified: bool,
        /// Skip the energy-gap width bound.
        #[arg(long)]
        no_width_bound: bool,
    },
    PotentialCurve {
        #[arg(long)]
        probe: Option<ChannelKind>,
        #[arg(long)]
        points: Option<usize>,
    },
    EnergyGap {
        #[arg(long)]
        probes: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum EnsembleRef {
    Path(PathBuf),
    Inline(serde_json::Value),
}

/// Everything a run depends on. Written into every output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    ensemble: EnsembleRef,
    channel: ChannelKind,
    h: Option<f64>,
    param: Option<f64>,
    bins: usize,
    tol_dh: f64,
    tol_h: f64,
    max_iter: usize,
    order: usize,
    seed: u64,
    out: Option<PathBuf>,
    threshold_kind: Option<ThresholdKind>,
    estimator: PotentialEstimator,
    cross_check: bool,
    lo: f64,
    hi: f64,
    from_perfect: bool,
    n: usize,
    w: usize,
    modified: bool,
    i0: Option<usize>,
    snapshot_every: usize,
    sweep_n: Vec<usize>,
    sweep_w: Vec<usize>,
    sweep_h: Vec<f64>,
    width_bound: bool,
    probe: ChannelKind,
    probe_points: usize,
    gap_probes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let stop = StopRule::default();
        Self {
            ensemble: EnsembleRef::Inline(serde_json::from_str(DEFAULT_ENSEMBLE).expect("default ensemble")),
            channel: ChannelKind::Bsc,
            h: None,
            param: None,
            bins: GridSpec::default().bins(),
            tol_dh: stop.tol_dh,
            tol_h: 1e-4,
            max_iter: stop.max_iter,
            order: stop.order,
            seed: 0,
            out: None,
            threshold_kind: None,
            estimator: PotentialEstimator::ForwardFpSign,
            cross_check: true,
            lo: 0.0,
            hi: 1.0,
            from_perfect: false,
            n: 32,
            w: 3,
            modified: false,
            i0: None,
            snapshot_every: 0,
            sweep_n: vec![16],
            sweep_w: vec![1, 2, 3, 4],
            sweep_h: vec![0.40, 0.42, 0.44, 0.46, 0.48],
            width_bound: true,
            probe: ChannelKind::Bawgn,
            probe_points: 101,
            gap_probes: CandidateStrategy::default().probes,
        }
    }
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

impl RunConfig {
    fn load(path: &Path) -> Result<Self, Error> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        if let EnsembleRef::Path(p) = &cfg.ensemble {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.ensemble = EnsembleRef::Path(base.join(p));
            }
        }
        Ok(cfg)
    }

    fn apply(&mut self, cli: &Cli) {
        macro_rules! take {
            ($($field:ident),*) => { $(if let Some(v) = cli.$field.clone() { self.$field = v; })* };
        }
        take!(channel, bins, tol_dh, tol_h, max_iter, seed);
        if let Some(p) = &cli.ensemble {
            self.ensemble = EnsembleRef::Path(p.clone());
        }
        if cli.h.is_some() || cli.param.is_some() {
            self.h = cli.h;
            self.param = cli.param;
        }
        if cli.out.is_some() {
            self.out = cli.out.clone();
        }
        match &cli.command {
            Command::Threshold { kind, estimator, no_cross_check, lo, hi } => {
                self.threshold_kind = Some(*kind);
                self.estimator = estimator.unwrap_or(self.estimator);
                self.cross_check &= !no_cross_check;
                self.lo = lo.unwrap_or(self.lo);
                self.hi = hi.unwrap_or(self.hi);
            }
            Command::De { from_perfect } => self.from_perfect |= from_perfect,
            Command::Coupled { n, w, modified, i0, snapshot_every } => {
                self.n = n.unwrap_or(self.n);
                self.w = w.unwrap_or(self.w);
                self.modified |= modified;
                self.i0 = i0.or(self.i0);
                self.snapshot_every = snapshot_every.unwrap_or(self.snapshot_every);
            }
            Command::Sweep { ns, ws, hs, modified, no_width_bound } => {
                if !ns.is_empty() {
                    self.sweep_n = ns.clone();
                }
                if !ws.is_empty() {
                    self.sweep_w = ws.clone();
                }
                if !hs.is_empty() {
                    self.sweep_h = hs.clone();
                }
                self.modified |= modified;
                self.width_bound &= !no_width_bound;
            }
            Command::PotentialCurve { probe, points } => {
                self.probe = probe.unwrap_or(self.probe);
                self.probe_points = points.unwrap_or(self.probe_points);
            }
            Command::EnergyGap { probes } => self.gap_probes = probes.unwrap_or(self.gap_probes),
        }
    }

    /// Reads a file-backed ensemble into the config so the header is self-contained.
    fn resolve(&mut self) -> Result<EnsembleSpec, Error> {
        if let EnsembleRef::Path(p) = &self.ensemble {
            let text = std::fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            self.ensemble = EnsembleRef::Inline(value);
        }
        let EnsembleRef::Inline(v) = &self.ensemble else { unreachable!() };
        let e = EnsembleSpec::from_json(&v.to_string())?;
        for (name, t) in [("tol_dh", self.tol_dh), ("tol_h", self.tol_h)] {
            if !(t > 0.0) {
                return Err(config_err(format!("{name} must be positive, got {t}")));
            }
        }
        if self.max_iter == 0 || self.order == 0 {
            return Err(config_err("max_iter and order must be positive"));
        }
        if let Some(h) = self.h {
            if !(0.0..=1.0).contains(&h) {
                return Err(config_err(format!("h = {h} outside [0,1]")));
            }
        }
        if self.h.is_some() && self.param.is_some() {
            return Err(config_err("give either h or param, not both"));
        }
        if !(self.lo < self.hi) {
            return Err(config_err(format!("empty bracket [{}, {}]", self.lo, self.hi)));
        }
        GridSpec::new(self.bins)?;
        Ok(e)
    }

    fn grid(&self) -> GridSpec {
        GridSpec::new(self.bins).expect("validated")
    }

    fn family(&self) -> ChannelFamily {
        ChannelFamily::new(self.channel, self.grid())
    }

    fn stop(&self) -> StopRule {
        StopRule { tol_dh: self.tol_dh, max_iter: self.max_iter, order: self.order, absorb_below: None }
    }

    fn channel_density(&self) -> Result<coupled_de::HatMeasure, Error> {
        let fam = self.family();
        match (self.h, self.param) {
            (Some(h), None) => fam.density(h),
            (None, Some(p)) => fam.density_from_param(p),
            _ => Err(config_err("this command needs --h or --param")),
        }
    }

    fn strategy(&self) -> CandidateStrategy {
        CandidateStrategy { probes: self.gap_probes, stop: self.stop(), ..CandidateStrategy::default() }
    }
}

#[derive(Serialize)]
struct Provenance<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config: &'a RunConfig,
}

enum Outcome {
    Ok,
    Flagged(Vec<String>),
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Threshold { .. } => "threshold",
        Command::De { .. } => "de",
        Command::Coupled { .. } => "coupled",
        Command::Sweep { .. } => "sweep",
        Command::PotentialCurve { .. } => "potential-curve",
        Command::EnergyGap { .. } => "energy-gap",
    }
}

fn open_out(cfg: &RunConfig) -> Result<Box<dyn Write>, Error> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn csv_header(out: &mut dyn Write, prov: &Provenance) -> Result<(), Error> {
    writeln!(out, "# {}", serde_json::to_string(prov)?)?;
    Ok(())
}

fn json_report(out: &mut dyn Write, prov: &Provenance, report: &impl Serialize) -> Result<(), Error> {
    let doc = serde_json::json!({ "provenance": prov, "report": report });
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: &Cli) -> Result<Outcome, Error> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply(cli);
    let e = cfg.resolve()?;
    let prov = Provenance {
        tool: "coupled-de",
        version: env!("CARGO_PKG_VERSION"),
        command: command_name(&cli.command),
        config: &cfg,
    };
    let stop = cfg.stop();
    let mut flags = Vec::new();
    let mut out = open_out(&cfg)?;
    match &cli.command {
        Command::Threshold { kind, .. } => {
            let fam = cfg.family();
            let report = match kind {
                ThresholdKind::Bp => de::bp_threshold(&e, fam, cfg.tol_h, stop)?,
                ThresholdKind::Stability => de::stability_threshold(&e, fam, cfg.tol_h)?,
                ThresholdKind::Potential => {
                    potential::potential_threshold(&e, fam, cfg.estimator, cfg.tol_h, cfg.cross_check, &cfg.strategy())?
                }
                ThresholdKind::LdgmEmergence => {
                    potential::ldgm_second_fixed_point(&e, fam, cfg.lo, cfg.hi, cfg.tol_h, stop)?
                }
                ThresholdKind::LdgmGap => {
                    potential::ldgm_gap_sign_change(&e, fam, cfg.lo, cfg.hi, cfg.tol_h, &cfg.strategy())?
                }
            };
            if report.flagged() {
                flags.extend(report.flags.iter().cloned());
                if let Some(c) = &report.cross_check {
                    flags.extend(c.flags.iter().cloned());
                }
            }
            json_report(&mut out, &prov, &report)?;
        }
        Command::De { .. } => {
            let c = cfg.channel_density()?;
            let x0 = if cfg.from_perfect {
                coupled_de::HatMeasure::delta_inf(c.grid())
            } else {
                coupled_de::HatMeasure::delta0(c.grid())
            };
            let trace = de::de_fixed_point(&e, &x0, &c, stop)?;
            if trace.status == DeStatus::MaxIterReached {
                flags.push(format!("DE stopped at max_iter = {}", cfg.max_iter));
            }
            csv_header(&mut out, &prov)?;
            de::write_trace_csv(&trace, &mut out)?;
        }
        Command::Coupled { .. } => {
            let c = cfg.channel_density()?;
            let mut spec = CoupledSpec::new(e, cfg.n, cfg.w)?;
            if cfg.modified {
                spec = spec.modified();
            }
            if let Some(i0) = cfg.i0 {
                spec = spec.with_i0(i0)?;
            }
            let len = spec.len();
            let sys = CoupledSystem::new(spec, c, stop)?;
            let chain_stop = StopRule { absorb_below: Some(de::ABSORB_ENTROPY), ..stop };
            let trace =
                sys.fixed_point(&ChainProfile::delta0(cfg.grid(), len), chain_stop, Some(cfg.snapshot_every))?;
            if trace.status == DeStatus::MaxIterReached {
                flags.push(format!("coupled DE stopped at max_iter = {}", cfg.max_iter));
            }
            csv_header(&mut out, &prov)?;
            writeln!(
                out,
                "# status={:?} iterations={} terminal_max_H={:e}",
                trace.status,
                trace.iterations(),
                trace.terminal.max_entropy()
            )?;
            coupled::write_profile_csv(&trace, &mut out)?;
        }
        Command::Sweep { .. } => {
            let opts = SweepOptions {
                stop: StopRule { absorb_below: Some(de::ABSORB_ENTROPY), ..stop },
                modified: cfg.modified,
                gap_strategy: cfg.width_bound.then(|| cfg.strategy()),
            };
            let report = coupled::saturation_sweep(&e, cfg.family(), &cfg.sweep_n, &cfg.sweep_w, &cfg.sweep_h, &opts)?;
            for c in report.cells.iter().filter(|c| c.status == DeStatus::MaxIterReached) {
                flags.push(format!("cell N={} w={} h={} hit max_iter", c.n, c.w, c.h));
            }
            for b in report.width_bounds.iter().filter(|b| !b.consistent) {
                flags.push(format!("width bound below the empirical width at h={}", b.h));
            }
            csv_header(&mut out, &prov)?;
            writeln!(out, "# K={}", report.k)?;
            for t in &report.thresholds {
                writeln!(out, "# threshold {}", serde_json::to_string(t)?)?;
            }
            for b in &report.width_bounds {
                writeln!(out, "# width_bound {}", serde_json::to_string(b)?)?;
            }
            coupled::write_sweep_csv(&report, &mut out)?;
        }
        Command::PotentialCurve { .. } => {
            if cfg.probe_points < 2 {
                return Err(config_err("probe_points must be at least 2"));
            }
            let c = cfg.channel_density()?;
            let probe = ChannelFamily::new(cfg.probe, cfg.grid());
            let grid: Vec<f64> = (0..cfg.probe_points).map(|k| k as f64 / (cfg.probe_points - 1) as f64).collect();
            let rows = potential::potential_curve(&e, &c, probe, &grid)?;
            csv_header(&mut out, &prov)?;
            potential::write_curve_csv(&rows, &mut out)?;
        }
        Command::EnergyGap { .. } => {
            let c = cfg.channel_density()?;
            let report = potential::energy_gap(&e, &c, &cfg.strategy())?;
            if report.unverified {
                flags.push("some candidates could not be classified".into());
            }
            json_report(&mut out, &prov, &report)?;
        }
    }
    out.flush()?;
    Ok(if flags.is_empty() { Outcome::Ok } else { Outcome::Flagged(flags) })
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Config(_)
        | Error::Json(_)
        | Error::Io(_)
        | Error::Ensemble(_)
        | Error::Polynomial(_)
        | Error::Parameter(_)
        | Error::Precondition(_) => 2,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Flagged(flags)) => {
            for f in flags {
                eprintln!("flag: {f}");
            }
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
