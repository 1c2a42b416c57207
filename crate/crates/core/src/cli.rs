//! The `staircase-dp` command line.
//!
//! Every subcommand is a pure function of its flags and `--seed`, so equal
//! invocations print equal bytes. Random draws come from fixed shards of
//! 65536 with one substream per `(seed, tag, shard)`; the worker count
//! (capped by `STAIRCASE_DP_THREADS`) never changes the output. `sample`
//! and `cost` share the `draws` tag, so `cost --from-file` on a `sample`
//! dump reproduces the Monte Carlo estimate of the same configuration.
//!
//! Errors are printed to stderr as one JSON object, `{"error", "message"}`,
//! with exit status 2 for invalid input and 1 otherwise.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::cost::{expected_cost_mc_sharded, expected_cost_series, mean_and_stderr, CostSpec};
use crate::dpverify::{check_ratio_pairs, ExponentialRadial, RadialDensity};
use crate::error::{Error, Result};
use crate::norms::NormSpec;
use crate::optimize::{
    find_gamma_star, tradeoff_sweep, McCheck, DEFAULT_GRID_POINTS, DEFAULT_REFINE_ITERS, SERIES_TOL,
};
use crate::profile::RadialProfile;
use crate::rearrange::{find_mass_matching_y, random_dp_profile, rearrange_profile};
use crate::rng;
use crate::staircase::{BandTable, StaircaseParams};

/// Substream tag shared by `sample` and the Monte Carlo part of `cost`.
pub const DRAWS_TAG: &str = "draws";

#[derive(Debug, Parser)]
#[command(name = "staircase-dp", version, about = "Staircase noise for ε-DP vector queries under ℓp norms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw noise vectors (CSV or JSON).
    Sample {
        #[command(flatten)]
        mech: Mechanism,
        #[command(flatten)]
        gamma: GammaChoice,
        #[command(flatten)]
        cost: CostArgs,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[command(flatten)]
        io: Output,
    },
    /// Expected cost by series and Monte Carlo (JSON).
    Cost {
        #[command(flatten)]
        mech: Mechanism,
        #[command(flatten)]
        gamma: GammaChoice,
        #[command(flatten)]
        cost: CostArgs,
        /// Monte Carlo draws; 0 skips the estimate.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Estimate from the draws in a `sample` CSV instead of sampling.
        #[arg(long)]
        from_file: Option<PathBuf>,
        #[command(flatten)]
        io: Output,
    },
    /// Search γ* on a grid with golden-section refinement (JSON).
    Optimize {
        #[command(flatten)]
        mech: Mechanism,
        #[command(flatten)]
        cost: CostArgs,
        #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
        grid_points: usize,
        #[arg(long, default_value_t = DEFAULT_REFINE_ITERS)]
        refine_iters: usize,
        #[command(flatten)]
        io: Output,
    },
    /// Staircase vs Laplace cost over a grid of ε and n (CSV or JSON).
    Sweep {
        #[arg(long, value_delimiter = ',', required = true)]
        eps_list: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        #[arg(long, default_value = "1", value_parser = parse_p)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[command(flatten)]
        cost: CostArgs,
        /// Cross-check every row by Monte Carlo with `--samples` draws.
        #[arg(long)]
        mc_check: bool,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[command(flatten)]
        io: Output,
    },
    /// Fuzz the ε-DP density ratio (JSON report).
    Verify {
        #[command(flatten)]
        mech: Mechanism,
        #[command(flatten)]
        gamma: GammaChoice,
        #[command(flatten)]
        cost: CostArgs,
        #[arg(long, value_enum, default_value_t = DensityKind::Staircase)]
        density: DensityKind,
        #[arg(long, default_value_t = 100_000)]
        pairs: usize,
        #[command(flatten)]
        io: Output,
    },
    /// Rearrange a random non-monotone ε-DP profile and move it into the
    /// maximal-decay class (CSV).
    RearrangeDemo {
        #[command(flatten)]
        mech: Mechanism,
        #[arg(long, default_value_t = 3)]
        periods: usize,
        #[arg(long, default_value_t = 4)]
        cells_per_period: usize,
        #[command(flatten)]
        io: Output,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Mechanism {
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Norm exponent p ≥ 1, or `inf`.
    #[arg(long, default_value = "1", value_parser = parse_p)]
    pub p: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tail_tol: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GammaChoice {
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Use γ* for the selected cost instead of `--gamma`.
    #[arg(long, conflicts_with = "gamma")]
    pub optimize: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CostKind {
    Power,
    Threshold,
    Truncated,
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    #[arg(long, value_enum, default_value_t = CostKind::Power)]
    pub cost: CostKind,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub cap: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DensityKind {
    /// The staircase density at the chosen γ.
    Staircase,
    /// Radial Laplace, `∝ e^{-ε‖x‖/Δ}`.
    Laplace,
    /// `∝ e^{-2ε‖x‖/Δ}`, which is not ε-DP.
    Violator,
}

#[derive(Debug, Clone, Args)]
pub struct Output {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output format for `sample` and `sweep` (default csv); the other
    /// commands accept only their own format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_p(s: &str) -> std::result::Result<f64, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => Ok(f64::INFINITY),
        other => other.parse::<f64>().map_err(|e| format!("invalid norm exponent {s:?}: {e}")),
    }
}

impl CostArgs {
    pub fn spec(&self) -> Result<CostSpec> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| Error::InvalidParameter(format!("--cost {} needs {flag}", self.kind_name())))
        };
        match self.cost {
            CostKind::Power => CostSpec::power(self.q),
            CostKind::Threshold => CostSpec::threshold(need(self.lambda, "--lambda")?),
            CostKind::Truncated => CostSpec::truncated(need(self.cap, "--cap")?),
        }
    }

    fn kind_name(&self) -> &'static str {
        match self.cost {
            CostKind::Power => "power",
            CostKind::Threshold => "threshold",
            CostKind::Truncated => "truncated",
        }
    }
}

impl Mechanism {
    fn norm(&self) -> Result<NormSpec> {
        NormSpec::new(self.p, self.dim)
    }

    fn check(&self) -> Result<()> {
        StaircaseParams::new(self.eps, self.delta, 0.5, self.norm()?)?;
        if !(self.tail_tol > 0.0 && self.tail_tol < 1.0) {
            return Err(Error::InvalidParameter(format!("--tail-tol must lie in (0, 1), got {}", self.tail_tol)));
        }
        Ok(())
    }

    fn table(&self, gamma: f64) -> Result<BandTable> {
        BandTable::build(&StaircaseParams::new(self.eps, self.delta, gamma, self.norm()?)?, self.tail_tol)
    }

    fn header(&self, out: &mut String, gamma: Option<f64>) {
        let _ = writeln!(out, "# eps={}", self.eps);
        let _ = writeln!(out, "# delta={}", self.delta);
        let _ = writeln!(out, "# n={}", self.dim);
        let _ = writeln!(out, "# p={}", self.p);
        if let Some(g) = gamma {
            let _ = writeln!(out, "# gamma={g}");
        }
    }
}

/// Resolves `γ` from `--gamma` or `--optimize`.
fn resolve_gamma(mech: &Mechanism, choice: &GammaChoice, cost: &CostSpec) -> Result<f64> {
    match (choice.gamma, choice.optimize) {
        (Some(g), false) => {
            StaircaseParams::new(mech.eps, mech.delta, g, mech.norm()?)?;
            Ok(g)
        }
        (None, true) => {
            Ok(find_gamma_star(mech.eps, mech.delta, mech.norm()?, cost, DEFAULT_GRID_POINTS, DEFAULT_REFINE_ITERS)?
                .gamma_star)
        }
        _ => Err(Error::InvalidParameter("pass either --gamma or --optimize".into())),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Error::Io(e.to_string()))
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Rejects `--format` values a single-format command cannot produce.
fn require_format(io: &Output, only: Format) -> Result<()> {
    match io.format {
        Some(f) if f != only => Err(Error::InvalidParameter(format!(
            "this command only writes {}",
            if only == Format::Json { "json" } else { "csv" }
        ))),
        _ => Ok(()),
    }
}

/// Runs a parsed command and returns the artifact text.
pub fn execute(cli: &Cli) -> Result<String> {
    match &cli.command {
        Command::Cost { io, .. } | Command::Optimize { io, .. } | Command::Verify { io, .. } => {
            require_format(io, Format::Json)?
        }
        Command::RearrangeDemo { io, .. } => require_format(io, Format::Csv)?,
        Command::Sample { .. } | Command::Sweep { .. } => {}
    }
    match &cli.command {
        Command::Sample { mech, gamma, cost, samples, io } => {
            mech.check()?;
            let gamma = resolve_gamma(mech, gamma, &cost.spec()?)?;
            let table = mech.table(gamma)?;
            let draws = table.sample_sharded(io.seed, DRAWS_TAG, *samples);
            match io.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    let mut out = String::new();
                    mech.header(&mut out, Some(gamma));
                    let _ = writeln!(out, "# seed={}", io.seed);
                    let cols: Vec<String> = (1..=mech.dim).map(|i| format!("x_{i}")).collect();
                    let _ = writeln!(out, "{}", cols.join(","));
                    for x in &draws {
                        let _ = writeln!(out, "{}", join(x));
                    }
                    Ok(out)
                }
                Format::Json => {
                    #[derive(Serialize)]
                    struct Dump<'a> {
                        eps: f64,
                        delta: f64,
                        n: usize,
                        p: f64,
                        gamma: f64,
                        seed: u64,
                        draws: &'a [Vec<f64>],
                    }
                    to_json(&Dump {
                        eps: mech.eps,
                        delta: mech.delta,
                        n: mech.dim,
                        p: mech.p,
                        gamma,
                        seed: io.seed,
                        draws: &draws,
                    })
                }
            }
        }
        Command::Cost { mech, gamma, cost, samples, from_file, io } => {
            mech.check()?;
            let spec = cost.spec()?;
            let gamma = resolve_gamma(mech, gamma, &spec)?;
            let table = mech.table(gamma)?;
            let series = expected_cost_series(&table, &spec, SERIES_TOL)?;
            let estimate = match from_file {
                Some(path) => {
                    let norm = mech.norm()?;
                    let draws = read_sample_csv(path, mech.dim)?;
                    let values = draws.iter().map(|x| norm.norm(x).map(|r| spec.phi(r))).collect::<Result<Vec<f64>>>()?;
                    Some(mean_and_stderr(&values)?)
                }
                None if *samples == 0 => None,
                None => Some(expected_cost_mc_sharded(&table, &spec, io.seed, DRAWS_TAG, *samples)?),
            };
            #[derive(Serialize)]
            struct CostReport {
                gamma: f64,
                cost: CostSpec,
                series: f64,
                mc_mean: Option<f64>,
                mc_stderr: Option<f64>,
                mc_samples: usize,
            }
            to_json(&CostReport {
                gamma,
                cost: spec,
                series,
                mc_mean: estimate.map(|e| e.mean),
                mc_stderr: estimate.map(|e| e.stderr),
                mc_samples: estimate.map_or(0, |e| e.samples),
            })
        }
        Command::Optimize { mech, cost, grid_points, refine_iters, io: _ } => {
            mech.check()?;
            let spec = cost.spec()?;
            let star = find_gamma_star(mech.eps, mech.delta, mech.norm()?, &spec, *grid_points, *refine_iters)?;
            to_json(&star)
        }
        Command::Sweep { eps_list, dims, p, delta, cost, mc_check, samples, io } => {
            let spec = cost.spec()?;
            for &eps in eps_list {
                for &n in dims {
                    StaircaseParams::new(eps, *delta, 0.5, NormSpec::new(*p, n)?)?;
                }
            }
            let mc = mc_check.then_some(McCheck { samples: *samples, seed: io.seed });
            let rows = tradeoff_sweep(eps_list, dims, *p, *delta, &spec, mc)?;
            match io.format.unwrap_or(Format::Csv) {
                Format::Json => to_json(&rows),
                Format::Csv => {
                    let mut out = String::new();
                    let _ = writeln!(out, "# command=sweep");
                    let _ = writeln!(out, "# delta={delta}");
                    let _ = writeln!(out, "# p={p}");
                    let _ = writeln!(out, "# cost={}", serde_json::to_string(&spec).map_err(|e| Error::Io(e.to_string()))?);
                    let _ = writeln!(out, "# eps_list={}", join(eps_list));
                    let _ = writeln!(out, "# dims={}", join(dims));
                    if *mc_check {
                        let _ = writeln!(out, "# mc_samples={samples}");
                        let _ = writeln!(out, "# seed={}", io.seed);
                    }
                    let _ = writeln!(
                        out,
                        "eps,dim,p,gamma_star,staircase_cost,laplace_cost,cost_kind,mc_mean,mc_stderr,mc_consistent"
                    );
                    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
                    for r in &rows {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{},{},{},{},{}",
                            r.eps,
                            r.dim,
                            r.p,
                            r.gamma_star,
                            r.staircase_cost,
                            r.laplace_cost,
                            r.cost_kind,
                            opt(r.mc_mean),
                            opt(r.mc_stderr),
                            r.mc_consistent.map_or(String::new(), |b| b.to_string())
                        );
                    }
                    Ok(out)
                }
            }
        }
        Command::Verify { mech, gamma, cost, density, pairs, io } => {
            mech.check()?;
            let norm = mech.norm()?;
            let report = match density {
                DensityKind::Staircase => {
                    let g = resolve_gamma(mech, gamma, &cost.spec()?)?;
                    let table = mech.table(g)?;
                    check_ratio_pairs(&table, mech.eps, mech.delta, io.seed, *pairs)?
                }
                DensityKind::Laplace | DensityKind::Violator => {
                    let factor = if *density == DensityKind::Laplace { 1.0 } else { 2.0 };
                    let d = ExponentialRadial::new(factor * mech.eps / mech.delta, norm)?;
                    check_ratio_pairs(&d as &dyn RadialDensity, mech.eps, mech.delta, io.seed, *pairs)?
                }
            };
            to_json(&report)
        }
        Command::RearrangeDemo { mech, periods, cells_per_period, io } => {
            mech.check()?;
            let norm = mech.norm()?;
            let mut r = rng::substream(io.seed, "rearrange-demo", 0);
            let before = random_dp_profile(&mut r, mech.eps, mech.delta, *periods, *cells_per_period)?
                .normalized(&norm)?;
            let rearranged = rearrange_profile(&before, &norm)?;
            let (y, matched) = find_mass_matching_y(&rearranged, &norm, mech.eps, mech.delta, 1e-12)?;
            let matched = matched.normalized(&norm)?;
            Ok(demo_csv(mech, io.seed, y, &norm, [&before, &rearranged, &matched]))
        }
    }
}

fn demo_csv(mech: &Mechanism, seed: u64, y: f64, norm: &NormSpec, profiles: [&RadialProfile; 3]) -> String {
    let mut out = String::new();
    mech.header(&mut out, None);
    let _ = writeln!(out, "# seed={seed}");
    let _ = writeln!(out, "# y={y}");
    let reach = profiles[0].window_end() + 2.0 * mech.delta;
    let mut grid: Vec<f64> = profiles
        .iter()
        .flat_map(|p| p.cells_until(reach).into_iter().map(|c| c.start))
        .filter(|&b| b < reach)
        .collect();
    grid.push(reach);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let _ = writeln!(out, "r_lo,r_hi,before,rearranged,matched,cdf_before,cdf_rearranged,cdf_matched");
    for w in grid.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            w[0],
            w[1],
            profiles[0].value_at(mid),
            profiles[1].value_at(mid),
            profiles[2].value_at(mid),
            profiles[0].radial_cdf(norm, w[1]),
            profiles[1].radial_cdf(norm, w[1]),
            profiles[2].radial_cdf(norm, w[1]),
        );
    }
    out
}

/// Reads the draws of a `sample` CSV, checking the dimension.
pub fn read_sample_csv(path: &std::path::Path, dim: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)?;
    let mut draws = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("x_") {
            continue;
        }
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<f64>, _>>()
            .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", lineno + 1)))?;
        if row.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
        }
        draws.push(row);
    }
    Ok(draws)
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
}

fn fail(kind: &str, message: String, code: i32) -> i32 {
    let json = serde_json::to_string(&ErrorReport { error: kind, message }).unwrap_or_default();
    eprintln!("{json}");
    code
}

/// Parses `args`, runs the command and writes the artifact; returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            return fail("invalid_parameter", e.kind().to_string() + ": " + e.to_string().lines().next().unwrap_or(""), 2);
        }
    };
    let out = match &cli.command {
        Command::Sample { io, .. }
        | Command::Cost { io, .. }
        | Command::Optimize { io, .. }
        | Command::Sweep { io, .. }
        | Command::Verify { io, .. }
        | Command::RearrangeDemo { io, .. } => io.out.clone(),
    };
    match execute(&cli) {
        Ok(text) => {
            let written = match out {
                Some(path) => std::fs::write(&path, text.as_bytes()),
                None => std::io::stdout().lock().write_all(text.as_bytes()),
            };
            match written {
                Ok(()) => 0,
                Err(e) => fail("io", e.to_string(), 1),
            }
        }
        Err(e) => {
            let code = match e {
                Error::InvalidParameter(_) | Error::DimensionMismatch { .. } | Error::FlavorMismatch(_) => 2,
                _ => 1,
            };
            fail(e.kind(), e.to_string(), code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> Result<String> {
        let cli = Cli::try_parse_from(std::iter::once("staircase-dp").chain(args.iter().copied()))
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        execute(&cli)
    }

    #[test]
    fn zero_samples_give_a_header_only_csv() {
        let out = run(&["sample", "--eps", "1", "--dim", "2", "--gamma", "0.5", "--samples", "0"]).unwrap();
        assert!(out.lines().all(|l| l.starts_with('#') || l == "x_1,x_2"));
        assert!(out.contains("# gamma=0.5"));
    }

    #[test]
    fn gamma_is_required_unless_optimizing() {
        assert!(matches!(run(&["sample", "--eps", "1"]), Err(Error::InvalidParameter(_))));
        assert!(run(&["sample", "--eps", "1", "--optimize", "--samples", "3"]).is_ok());
        assert!(run(&["sample", "--eps", "-1", "--gamma", "0.5"]).is_err());
        assert!(run(&["cost", "--eps", "1", "--gamma", "0.5", "--cost", "threshold"]).is_err());
    }

    #[test]
    fn optimize_reports_the_scalar_optimum() {
        let out = run(&["optimize", "--eps", "2"]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let g = v["gamma_star"].as_f64().unwrap();
        assert!((g - 1.0 / (1.0 + 1f64.exp())).abs() < 1e-3);
    }

    #[test]
    fn sweep_csv_is_below_laplace() {
        let out = run(&["sweep", "--eps-list", "1,2,4,8,15", "--dims", "3"]).unwrap();
        let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#') && !l.starts_with("eps")).collect();
        assert_eq!(rows.len(), 5);
        for row in rows {
            let f: Vec<&str> = row.split(',').collect();
            let (s, l): (f64, f64) = (f[4].parse().unwrap(), f[5].parse().unwrap());
            assert!(s < l, "{row}");
        }
    }

    #[test]
    fn sample_csv_round_trips_through_cost() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("draws.csv");
        let base = ["--eps", "1.5", "--dim", "3", "--p", "2", "--gamma", "0.4", "--seed", "17"];
        let csv = run(&[&["sample"][..], &base, &["--samples", "70000"]].concat()).unwrap();
        std::fs::write(&path, csv).unwrap();
        let direct = run(&[&["cost"][..], &base, &["--samples", "70000"]].concat()).unwrap();
        let file = run(&[&["cost"][..], &base, &["--from-file", path.to_str().unwrap()]].concat()).unwrap();
        let a: serde_json::Value = serde_json::from_str(&direct).unwrap();
        let b: serde_json::Value = serde_json::from_str(&file).unwrap();
        let (ma, mb) = (a["mc_mean"].as_f64().unwrap(), b["mc_mean"].as_f64().unwrap());
        assert!((ma - mb).abs() <= 1e-12 * ma.abs());
    }

    #[test]
    fn verify_flags_the_violator() {
        let ok = run(&["verify", "--eps", "1", "--dim", "2", "--gamma", "0.3", "--pairs", "2000"]).unwrap();
        assert!(ok.contains("\"passed\": true"));
        let bad = run(&["verify", "--eps", "1", "--dim", "2", "--density", "violator", "--pairs", "100"]).unwrap();
        assert!(bad.contains("\"passed\": false"));
    }

    #[test]
    fn rearrange_demo_emits_profiles() {
        let out = run(&["rearrange-demo", "--eps", "1", "--dim", "2", "--seed", "3"]).unwrap();
        assert!(out.contains("r_lo,r_hi,before,rearranged,matched"));
        assert!(out.lines().filter(|l| !l.starts_with('#')).count() > 5);
    }

    #[test]
    fn single_format_commands_reject_the_other_format() {
        assert!(run(&["optimize", "--eps", "1", "--format", "csv"]).is_err());
        assert!(run(&["optimize", "--eps", "1", "--format", "json"]).is_ok());
        assert!(run(&["rearrange-demo", "--eps", "1", "--format", "json"]).is_err());
    }

    #[test]
    fn p_accepts_infinity() {
        assert_eq!(parse_p("inf").unwrap(), f64::INFINITY);
        assert_eq!(parse_p("2.5").unwrap(), 2.5);
        assert!(parse_p("x").is_err());
    }
}
