//! `revmix` command line: curves, fixed points, regime maps, cascades,
//! rescaling checks and the mixed-dynamics probe, each written as CSV.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use revmix::limit::sample_curves;
use revmix::orbit::{
    cascade_scan, find_fixed_points_with, mixed_dynamics_probe, return_map_fixed_points, search_mixed_mu,
};
use revmix::output::{self, plot_script, PlotKind, RescaleRow};
use revmix::return_map::{mu_for_parameter, rescale_residual};
use revmix::sweep::{family_map, regime_map, threads_from_env, with_threads};
use revmix::{Classification, FixedPointRecord, LimitFamily, Orientation, Rect, ReturnKind, ReturnMapSpec, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "revmix",
    version,
    about = "Return maps, limit maps and bifurcation cascades of reversible planar maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Config file path or the built-in name `ref-model`.
    #[arg(long, default_value = "ref-model")]
    config: String,
    /// CSV destination (stdout when neither this nor the config sets one).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write a gnuplot script next to the CSV.
    #[arg(long)]
    plot_script: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate the closed-form bifurcation curves of a limit family.
    Curves {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        family: Option<LimitFamily>,
        #[arg(long)]
        orientation: Option<Orientation>,
        /// Abscissa range `lo:hi:n` (`c̃` for productH, `M2` for henon).
        #[arg(long, alias = "m2-range", value_parser = parse_sampled_range, allow_hyphen_values = true)]
        ctilde_range: Option<(f64, f64, usize)>,
    },
    /// Fixed points of a limit map or of a first-return map.
    FixedPoints {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        family: Option<LimitFamily>,
        /// `c̃` (productH) or `M2` (henon).
        #[arg(long, allow_hyphen_values = true)]
        abscissa: Option<f64>,
        /// `M̃` (productH) or `M1` (henon).
        #[arg(long, allow_hyphen_values = true)]
        ordinate: Option<f64>,
        /// Period of the limit-map orbits.
        #[arg(long, default_value_t = 1)]
        period: usize,
        /// First-return map kind (T1k, T2k, T12km); replaces the limit map.
        #[arg(long)]
        kind: Option<ReturnKind>,
        #[arg(long)]
        k: Option<usize>,
        /// Second block length of T12km (defaults to k).
        #[arg(long)]
        m: Option<usize>,
        /// Splitting parameter (defaults to the config value).
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
    },
    /// Regime codes on a grid over the config window.
    RegimeMap {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        family: Option<LimitFamily>,
        /// Abscissa range `lo:hi`.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        abscissa_range: Option<(f64, f64)>,
        /// Ordinate range `lo:hi`.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        ordinate_range: Option<(f64, f64)>,
        #[arg(long)]
        nx: Option<usize>,
        #[arg(long)]
        ny: Option<usize>,
        /// Worker threads (0 = all cores); overrides REVMIX_THREADS.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Sink/source and elliptic windows for each k.
    Cascade {
        #[command(flatten)]
        common: Common,
        /// Inclusive range `k0:k1`.
        #[arg(long, value_parser = parse_k_range)]
        k: Option<(usize, usize)>,
    },
    /// Distance between rescaled return maps and their limit maps.
    RescaleCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "T1k")]
        kind: ReturnKind,
        /// Inclusive range `k0:k1`.
        #[arg(long, value_parser = parse_k_range)]
        k: Option<(usize, usize)>,
        /// Half-width of the square window in rescaled coordinates.
        #[arg(long, default_value_t = 2.0)]
        half: f64,
        /// Samples per axis.
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Value of the rescaled parameter (`M1` or `M̃`) to evaluate at.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        target: f64,
    },
    /// Inventory of all first-return fixed points at one μ.
    ProbeMixed {
        #[command(flatten)]
        common: Common,
        /// Inclusive range `k0:k1`.
        #[arg(long, value_parser = parse_k_range)]
        k: Option<(usize, usize)>,
        /// Probe this μ instead of searching for a mixed one.
        #[arg(long, allow_hyphen_values = true)]
        mu: Option<f64>,
        /// Largest |m - k| of the T12km maps.
        #[arg(long)]
        m_offset: Option<usize>,
    },
}

/// A failure of the numerics rather than of the input (exit code 2).
#[derive(Debug)]
struct Numerical(String);

impl std::fmt::Display for Numerical {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Numerical {}

fn numerical(e: revmix::Error) -> anyhow::Error {
    match e {
        revmix::Error::InvalidParameter(_) | revmix::Error::Config(_) | revmix::Error::Io(_) => e.into(),
        other => Numerical(other.to_string()).into(),
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse().map_err(|_| format!("'{s}' is not a number"))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi] = parts[..] else { return Err(format!("expected lo:hi, got '{s}'")) };
    let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
    if !(lo < hi) {
        return Err(format!("range '{s}' needs lo < hi"));
    }
    Ok((lo, hi))
}

fn parse_sampled_range(s: &str) -> Result<(f64, f64, usize), String> {
    let (head, n) = s.rsplit_once(':').ok_or_else(|| format!("expected lo:hi:n, got '{s}'"))?;
    let (lo, hi) = parse_range(head)?;
    let n: usize = n.trim().parse().map_err(|_| format!("'{n}' is not a sample count"))?;
    if n < 2 {
        return Err("sample count must be at least 2".into());
    }
    Ok((lo, hi, n))
}

fn parse_k_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(':').unwrap_or((s, s));
    let a: usize = a.trim().parse().map_err(|_| format!("'{a}' is not a block length"))?;
    let b: usize = b.trim().parse().map_err(|_| format!("'{b}' is not a block length"))?;
    if a == 0 || a > b {
        return Err(format!("k range '{s}' needs 1 <= k0 <= k1"));
    }
    Ok((a, b))
}

struct Sink {
    path: Option<PathBuf>,
    plot: bool,
}

impl Sink {
    fn new(common: &Common, cfg: &RunConfig) -> Self {
        Self { path: common.output.clone().or_else(|| cfg.output.clone()), plot: common.plot_script || cfg.plot_script }
    }

    fn write(
        &self,
        kind: Option<PlotKind>,
        f: impl FnOnce(&mut dyn Write) -> revmix::Result<()>,
    ) -> anyhow::Result<()> {
        match &self.path {
            Some(path) => {
                let file = File::create(path).with_context(|| format!("cannot create '{}'", path.display()))?;
                let mut w = BufWriter::new(file);
                f(&mut w)?;
                w.flush()?;
                if let (true, Some(kind)) = (self.plot, kind) {
                    let script = path.with_extension("gp");
                    std::fs::write(&script, plot_script(kind, path))
                        .with_context(|| format!("cannot write '{}'", script.display()))?;
                }
            }
            None => {
                if self.plot {
                    bail!("--plot-script needs an output path");
                }
                let stdout = io::stdout();
                let mut lock = stdout.lock();
                f(&mut lock)?;
                lock.flush()?;
            }
        }
        Ok(())
    }

    /// Summary goes to stderr when the CSV occupies stdout.
    fn summary(&self, line: &str) {
        if self.path.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}

fn load(common: &Common) -> anyhow::Result<RunConfig> {
    Ok(RunConfig::load(&common.config)?)
}

fn threads(cfg: &RunConfig, flag: Option<usize>) -> anyhow::Result<usize> {
    if let Some(t) = flag {
        return Ok(t);
    }
    Ok(match std::env::var_os(revmix::sweep::THREADS_ENV) {
        Some(_) => threads_from_env()?,
        None => cfg.regime.threads,
    })
}

fn class_summary(records: &[FixedPointRecord]) -> String {
    let n = |c| records.iter().filter(|r| r.classification == c).count();
    format!(
        "{} sink, {} source, {} saddle, {} elliptic, {} marginal",
        n(Classification::Sink),
        n(Classification::Source),
        n(Classification::Saddle),
        n(Classification::Elliptic),
        n(Classification::Marginal)
    )
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Curves { common, family, orientation, ctilde_range } => {
            let cfg = load(&common)?;
            let family = family.unwrap_or(cfg.family);
            let orientation = orientation.unwrap_or(cfg.model.global.orientation);
            let (lo, hi, n) = ctilde_range.unwrap_or((cfg.window.x0, cfg.window.x1, cfg.grid.0));
            let samples = sample_curves(family, orientation, lo, hi, n)?;
            let sink = Sink::new(&common, &cfg);
            sink.write(Some(PlotKind::Curves), |w| output::write_curves(w, &samples))?;
            let curves = samples.len() / n;
            sink.summary(&format!("{curves} curves over {n} abscissae ({} rows)", samples.len()));
        }
        Command::FixedPoints { common, family, abscissa, ordinate, period, kind, k, m, mu } => {
            let cfg = load(&common)?;
            let threads = threads(&cfg, None)?;
            let records = match kind {
                Some(kind) => {
                    let k = k.ok_or_else(|| anyhow!("--kind needs --k"))?;
                    let mu = mu.unwrap_or(cfg.model.global.mu);
                    let spec = match kind {
                        ReturnKind::T1k => ReturnMapSpec::t1k(k, mu),
                        ReturnKind::T2k => ReturnMapSpec::t2k(k, mu),
                        ReturnKind::T12km => ReturnMapSpec::t12km(k, m.unwrap_or(k), mu),
                    };
                    spec.validate(&cfg.model)?;
                    if period != 1 {
                        bail!("return maps support --period 1 only");
                    }
                    with_threads(threads, || return_map_fixed_points(&cfg.model, spec, &cfg.regime.solver))?
                        .map_err(numerical)?
                }
                None => {
                    let (Some(x), Some(y)) = (abscissa, ordinate) else {
                        bail!("limit maps need --abscissa and --ordinate (or use --kind)");
                    };
                    let family = family.unwrap_or(cfg.family);
                    let map = family_map(family, x, y)?;
                    let seeds = Rect::square(cfg.regime.seed_half).grid(cfg.regime.seed_grid);
                    with_threads(threads, || find_fixed_points_with(map.as_ref(), &seeds, period, &cfg.regime.solver))?
                        .map_err(numerical)?
                }
            };
            let sink = Sink::new(&common, &cfg);
            sink.write(None, |w| output::write_fixed_points(w, &records))?;
            sink.summary(&format!("{} records: {}", records.len(), class_summary(&records)));
        }
        Command::RegimeMap { common, family, abscissa_range, ordinate_range, nx, ny, threads: t } => {
            let mut cfg = load(&common)?;
            if let Some((lo, hi)) = abscissa_range {
                (cfg.window.x0, cfg.window.x1) = (lo, hi);
            }
            if let Some((lo, hi)) = ordinate_range {
                (cfg.window.y0, cfg.window.y1) = (lo, hi);
            }
            cfg.grid = (nx.unwrap_or(cfg.grid.0), ny.unwrap_or(cfg.grid.1));
            cfg.regime.threads = threads(&cfg, t)?;
            cfg.validate()?;
            let family = family.unwrap_or(cfg.family);
            let cells = regime_map(family, cfg.window, cfg.grid, &cfg.regime)?;
            let sink = Sink::new(&common, &cfg);
            sink.write(Some(PlotKind::Regime), |w| output::write_regime(w, &cells))?;
            let failed = cells.iter().filter(|c| c.regime_code == revmix::sweep::FAILURE_CODE).count();
            let mut codes: Vec<u32> = cells.iter().map(|c| c.regime_code).collect();
            codes.sort_unstable();
            codes.dedup();
            sink.summary(&format!(
                "{} cells, {} distinct regime codes, {failed} failed cells",
                cells.len(),
                codes.len()
            ));
        }
        Command::Cascade { common, k } => {
            let cfg = load(&common)?;
            let k_range = k.unwrap_or(cfg.k_range);
            let threads = threads(&cfg, None)?;
            let rows =
                with_threads(threads, || cascade_scan(&cfg.model, k_range, &cfg.regime.solver))?.map_err(numerical)?;
            let sink = Sink::new(&common, &cfg);
            sink.write(Some(PlotKind::Cascade), |w| output::write_cascade(w, &rows))?;
            let verified = rows.iter().filter(|r| r.coexistence_verified).count();
            sink.summary(&format!("{verified}/{} k-values verified", rows.len()));
        }
        Command::RescaleCheck { common, kind, k, half, grid, target } => {
            let cfg = load(&common)?;
            let (k0, k1) = k.unwrap_or((10, 16));
            if !(half > 0.0) || grid < 2 {
                bail!("--half must be positive and --grid at least 2");
            }
            let window = Rect::square(half);
            let model = &cfg.model;
            let rows = (k0..=k1)
                .map(|k| {
                    let m = if kind == ReturnKind::T12km { k } else { 0 };
                    let mu = mu_for_parameter(model, kind, k, m, target);
                    let spec = ReturnMapSpec { kind, k, m, mu };
                    let rep = rescale_residual(model, spec, window, grid).map_err(numerical)?;
                    Ok(RescaleRow {
                        kind,
                        k,
                        m,
                        mu,
                        residual: rep.residual,
                        excluded_fraction: rep.excluded_fraction(),
                    })
                })
                .collect::<anyhow::Result<Vec<_>>>()?;
            let sink = Sink::new(&common, &cfg);
            sink.write(Some(PlotKind::Rescale), |w| output::write_rescale(w, &rows))?;
            let ratios: Vec<f64> = rows.windows(2).map(|w| w[1].residual / w[0].residual).collect();
            let (lo, hi) = ratios.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &r| (a.min(r), b.max(r)));
            let span = if ratios.is_empty() { "n/a".to_string() } else { format!("[{lo:.3}, {hi:.3}]") };
            sink.summary(&format!(
                "{kind} k={k0}..{k1}: successive residual ratios {span}, lambda = {}",
                model.lambda()
            ));
        }
        Command::ProbeMixed { common, k, mu, m_offset } => {
            let cfg = load(&common)?;
            let k_range = k.unwrap_or(cfg.k_range);
            let offset = m_offset.unwrap_or(cfg.m_offset);
            let threads = threads(&cfg, None)?;
            let inv = with_threads(threads, || match mu {
                Some(mu) => Some(mixed_dynamics_probe(&cfg.model, mu, k_range, offset, &cfg.regime.solver)),
                None => search_mixed_mu(&cfg.model, k_range, offset, &cfg.regime.solver),
            })?
            .ok_or_else(|| Numerical("no mu with a coexisting sink, source and elliptic point was found".into()))?;
            let sink = Sink::new(&common, &cfg);
            sink.write(None, |w| output::write_inventory(w, &inv))?;
            let records: Vec<FixedPointRecord> = inv.entries.iter().map(|e| e.record.clone()).collect();
            sink.summary(&format!(
                "mu = {:e}: {}; mixed: {}",
                inv.mu,
                class_summary(&records),
                if inv.is_mixed() { "yes" } else { "no" }
            ));
        }
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|e| e.is::<Numerical>()) {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_range_with_negative_bounds() {
        assert_eq!(parse_sampled_range("-2:-0.1:64"), Ok((-2.0, -0.1, 64)));
        assert!(parse_sampled_range("-2:-0.1:1").is_err());
        assert!(parse_sampled_range("1:-1:8").is_err());
    }

    #[test]
    fn k_range_forms() {
        assert_eq!(parse_k_range("8:14"), Ok((8, 14)));
        assert_eq!(parse_k_range("9"), Ok((9, 9)));
        assert!(parse_k_range("0:3").is_err());
        assert!(parse_k_range("5:4").is_err());
    }

    #[test]
    fn numerical_errors_map_to_exit_2() {
        let e = numerical(revmix::Error::SingularJacobian);
        assert_eq!(exit_code(&e), 2);
        let e = numerical(revmix::Error::InvalidParameter("x".into()));
        assert_eq!(exit_code(&e), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
