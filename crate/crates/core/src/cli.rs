//! Command-line surface.
//!
//! Values resolve as flag > `--config` file > default. The config file holds
//! `key = value` lines keyed by long flag names (`seed = 7`,
//! `delta-m = 5.02e11`); `#` starts a comment. Every effective value except
//! `--threads` and `--config` is echoed into the output metadata.
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 I/O, 4 insufficient
//! data, 1 anything else.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bell::{
    analytic_report, combination_search, lrt_bound_exponential, p_threshold, r_factor_estimate, theta_scan,
    x_threshold, BellReport, SearchResult, TimeQuadruple,
};
use crate::error::{Error, Result};
use crate::io::{self, EventSidecar, Fig3Row, Metadata};
use crate::kinematics::{default_meson_cm_speed, ps_curve, uniform_grid, BoostConfig, SeparationCriterion};
use crate::lrt::model_by_name;
use crate::model::{bell_delta_t_range, self_check, MesonParams};
use crate::montecarlo::{bin_delta, generate_events, DeltaHistogram, DEFAULT_BIN_LIFETIMES, DEFAULT_RANGE_LIFETIMES};
use crate::rng::with_threads;

/// Environment variable that, when set to anything but `0` or the empty
/// string, makes `--seed` mandatory for randomized commands.
pub const CI_ENV: &str = "MESONBELL_CI";

#[derive(Parser, Debug)]
#[command(name = "mesonbell", version, about = "Bell-test feasibility toolkit for entangled neutral-meson pairs")]
pub struct Cli {
    /// key = value file with defaults for any long flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Worker threads. Never changes output bytes.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

/// Meson species: a built-in name, explicit `--delta-m`/`--gamma`, or a bare
/// ratio `--x` in natural units.
#[derive(Args, Debug, Clone, Default)]
pub struct SpeciesArgs {
    /// Built-in species, B or K.
    #[arg(long)]
    pub species: Option<String>,
    /// Mass splitting in 1/s (requires --gamma).
    #[arg(long)]
    pub delta_m: Option<f64>,
    /// Decay width in 1/s (requires --delta-m).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Ratio delta_m / gamma with gamma = 1.
    #[arg(long)]
    pub x: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print delta_m, gamma, x and the feasibility thresholds.
    Constants {
        #[arg(value_name = "SPECIES")]
        species_name: Option<String>,
        #[command(flatten)]
        species: SpeciesArgs,
    },
    /// Quantum R and the loosened local bound along the theta family.
    Fig2 {
        #[command(flatten)]
        species: SpeciesArgs,
        #[arg(long)]
        theta_min: Option<f64>,
        #[arg(long)]
        theta_max: Option<f64>,
        /// Number of grid points including both ends.
        #[arg(long)]
        steps: Option<usize>,
        /// Output CSV, `-` for stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Space-like fraction against proper-time difference for several boosts.
    Fig3 {
        #[command(flatten)]
        species: SpeciesArgs,
        /// Comma-separated lab boosts.
        #[arg(long)]
        betas: Option<String>,
        /// full or longitudinal.
        #[arg(long)]
        criterion: Option<String>,
        /// Pair-frame meson speed; defaults to the Upsilon(4S) -> B B value.
        #[arg(long)]
        meson_speed: Option<f64>,
        /// Largest time difference in seconds.
        #[arg(long)]
        dt_max: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate events and their binned correlation.
    Simulate {
        #[command(flatten)]
        species: SpeciesArgs,
        /// qm, const-anti, osc-sign or demo-qm.
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Time-difference bin width in seconds.
        #[arg(long)]
        dt: Option<f64>,
        /// Binning range in seconds.
        #[arg(long)]
        dt_max: Option<f64>,
        /// Writes PREFIX.events.csv, PREFIX.events.json and PREFIX.binned.csv.
        #[arg(long, value_name = "PREFIX")]
        out: Option<String>,
    },
    /// R factor and loosened bound for four measurement times.
    Bell {
        #[command(flatten)]
        species: SpeciesArgs,
        /// t1,t1',t2,t2' in seconds.
        #[arg(long, conflicts_with = "phases")]
        times: Option<String>,
        /// The same four times as phases delta_m * t.
        #[arg(long)]
        phases: Option<String>,
        /// Estimate correlations from an events CSV instead of the analytic model.
        #[arg(long)]
        events: Option<PathBuf>,
        /// Time-difference bin width in seconds for --events.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random search for quadruples where quantum R beats the loosened bound.
    Search {
        #[command(flatten)]
        species: SpeciesArgs,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Upper end of the sampled time range in seconds.
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A comma-separated list of reals.
#[derive(Debug, Clone, PartialEq)]
pub struct RealList(pub Vec<f64>);

impl FromStr for RealList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(',')
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("'{p}' in list '{s}': {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(RealList)
    }
}

impl Display for RealList {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(f64::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// How a resolved value is echoed into metadata. Reals use `{:e}` so that
/// times in seconds stay readable.
pub trait Echo {
    fn echo(&self) -> String;
}

impl Echo for f64 {
    fn echo(&self) -> String {
        format!("{self:e}")
    }
}

macro_rules! echo_display {
    ($($t:ty),*) => {$(
        impl Echo for $t {
            fn echo(&self) -> String {
                self.to_string()
            }
        }
    )*};
}

echo_display!(u64, usize, String, RealList, SeparationCriterion);

/// Parses a `key = value` config file.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("config line {}: expected key = value", k + 1)))?;
        out.insert(key.trim().replace('_', "-"), value.trim().to_string());
    }
    Ok(out)
}

fn ci_mode() -> bool {
    std::env::var(CI_ENV).is_ok_and(|v| !v.is_empty() && v != "0")
}

struct Settings {
    file: BTreeMap<String, String>,
    meta: Metadata,
}

impl Settings {
    fn new(command: &str, file: BTreeMap<String, String>) -> Self {
        Self {
            file,
            meta: Metadata::new(command),
        }
    }

    fn value<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr + Echo,
        T::Err: Display,
    {
        let v = match flag {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(s) => Some(
                    s.parse::<T>()
                        .map_err(|e| Error::Config(format!("config key '{key}' = '{s}': {e}")))?,
                ),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.meta.insert(key, v.echo());
        }
        Ok(v)
    }

    fn or<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T>
    where
        T: FromStr + Echo,
        T::Err: Display,
    {
        match self.value(key, flag)? {
            Some(v) => Ok(v),
            None => {
                self.meta.insert(key, default.echo());
                Ok(default)
            }
        }
    }

    fn seed(&mut self, flag: Option<u64>) -> Result<u64> {
        match self.value("seed", flag)? {
            Some(s) => Ok(s),
            None if ci_mode() => Err(Error::Config(format!("--seed is required when {CI_ENV} is set"))),
            None => {
                self.meta.insert("seed", 0);
                Ok(0)
            }
        }
    }

    fn params(&mut self, args: &SpeciesArgs, positional: Option<String>) -> Result<MesonParams> {
        let delta_m = self.value("delta-m", args.delta_m)?;
        let gamma = self.value("gamma", args.gamma)?;
        let x = self.value("x", args.x)?;
        let params = match (delta_m, gamma, x) {
            (Some(dm), Some(g), None) => MesonParams::new("custom", dm, g)?,
            (Some(_), None, _) | (None, Some(_), _) => {
                return Err(Error::Config("--delta-m and --gamma must be given together".into()))
            }
            (Some(_), Some(_), Some(_)) => {
                return Err(Error::Config("--x cannot be combined with --delta-m/--gamma".into()))
            }
            (None, None, Some(x)) => MesonParams::from_ratio(x)?,
            (None, None, None) => {
                let name = self.or("species", positional.or_else(|| args.species.clone()), "B".to_string())?;
                MesonParams::lookup(&name)?
            }
        };
        self_check(&params)?;
        Ok(params)
    }
}

/// Exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) | Error::Config(_) | Error::Parse(_) => 2,
        Error::Io(_) => 3,
        Error::Csv(e) if e.is_io_error() => 3,
        Error::InsufficientData { .. } | Error::EmptySubensemble(_) => 4,
        _ => 1,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn main_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => parse_config(&std::fs::read_to_string(path).map_err(|e| {
            Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
        })?)?,
        None => BTreeMap::new(),
    };
    let threads = cli.threads;
    with_threads(threads, move || dispatch(cli.command, file))?
}

fn out_path(s: &mut Settings, flag: Option<PathBuf>) -> Result<PathBuf> {
    let out = s.or("out", flag.map(|p| p.display().to_string()), "-".to_string())?;
    s.meta.params.remove("out");
    Ok(PathBuf::from(out))
}

#[derive(Serialize)]
struct WithMeta<'a, T: Serialize> {
    #[serde(flatten)]
    body: &'a T,
    meta: &'a Metadata,
}

fn write_json_out<T: Serialize>(path: &Path, body: &T, meta: &Metadata) -> Result<()> {
    io::with_output(path, |w| io::write_json(w, &WithMeta { body, meta }))
}

fn dispatch(command: Command, file: BTreeMap<String, String>) -> Result<()> {
    match command {
        Command::Constants { species_name, species } => {
            let mut s = Settings::new("constants", file);
            let p = s.params(&species, species_name)?;
            cmd_constants(&p, &mut std::io::stdout().lock())
        }
        Command::Fig2 {
            species,
            theta_min,
            theta_max,
            steps,
            out,
        } => {
            let mut s = Settings::new("fig2", file);
            let p = s.params(&species, None)?;
            let lo = s.or("theta-min", theta_min, 0.0)?;
            let hi = s.or("theta-max", theta_max, std::f64::consts::FRAC_PI_2)?;
            let steps = s.or("steps", steps, 200)?;
            let out = out_path(&mut s, out)?;
            let rows = theta_scan(&p, lo, hi, steps)?;
            io::with_output(&out, |w| io::write_fig2(w, &rows, &s.meta))
        }
        Command::Fig3 {
            species,
            betas,
            criterion,
            meson_speed,
            dt_max,
            points,
            n,
            seed,
            out,
        } => {
            let mut s = Settings::new("fig3", file);
            let p = s.params(&species, None)?;
            let betas: RealList = s.or("betas", betas.map(|b| b.parse()).transpose()?, RealList(vec![0.39, 0.59, 0.99]))?;
            let criterion: SeparationCriterion = s.or("criterion", criterion.map(|c| c.parse()).transpose()?, SeparationCriterion::FullInterval)?;
            let u = s.or("meson-speed", meson_speed, default_meson_cm_speed())?;
            let dt_max = s.or("dt-max", dt_max, 2.0 * bell_delta_t_range(&p).1)?;
            let points = s.or("points", points, 41)?;
            let n = s.or("n", n, 100_000)?;
            let seed = s.seed(seed)?;
            let out = out_path(&mut s, out)?;
            let grid = uniform_grid(dt_max, points)?;
            let mut rows = Vec::new();
            let mut summary = Vec::new();
            let mut any = false;
            for &beta in &betas.0 {
                let config = BoostConfig::new(beta, u)?;
                let curve = ps_curve(&config, &p, &grid, criterion, n, seed)?;
                let sm = curve.summary;
                any |= sm.attainable;
                summary.push(format!(
                    "beta {beta} ({criterion}): min p_s over [{:e}, {:e}] s is {} against threshold {}: {}",
                    sm.required_range.0,
                    sm.required_range.1,
                    sm.min_p_s_in_range,
                    sm.threshold,
                    if sm.attainable { "attainable" } else { "not attainable" }
                ));
                rows.extend(curve.rows.iter().map(|r| Fig3Row {
                    delta_t: r.delta_t,
                    beta,
                    criterion: criterion.to_string(),
                    p_s: r.p_s,
                    stderr: r.stderr,
                }));
            }
            summary.push(format!(
                "summary: threshold {}",
                if any { "attainable for at least one beta" } else { "not attainable" }
            ));
            io::with_output(&out, |w| io::write_fig3(w, &rows, &s.meta))?;
            let text = summary.join("\n");
            if out.as_os_str() == "-" {
                eprintln!("{text}");
            } else {
                println!("{text}");
            }
            Ok(())
        }
        Command::Simulate {
            species,
            model,
            n,
            seed,
            dt,
            dt_max,
            out,
        } => {
            let mut s = Settings::new("simulate", file);
            let p = s.params(&species, None)?;
            let model_name = s.or("model", model, "qm".to_string())?;
            let n = s.or("n", n, 100_000)?;
            let seed = s.seed(seed)?;
            let dt = s.or("dt", dt, DEFAULT_BIN_LIFETIMES / p.gamma)?;
            let dt_max = s.or("dt-max", dt_max, DEFAULT_RANGE_LIFETIMES / p.gamma)?;
            let prefix = s
                .value("out", out)?
                .ok_or_else(|| Error::Config("simulate needs --out PREFIX".into()))?;
            s.meta.params.remove("out");
            let model = model_by_name(&model_name, &p)?;
            let batch = generate_events(model.as_ref(), &p, n, seed)?;
            let hist = bin_delta(&batch.records, dt, dt_max)?;
            let events_path = PathBuf::from(format!("{prefix}.events.csv"));
            io::with_output(&events_path, |w| io::write_events(w, &batch.records, &s.meta))?;
            let sidecar = EventSidecar::from_batch(&batch.meta, s.meta.clone());
            io::with_output(&io::sidecar_path(&events_path), |w| io::write_json(w, &sidecar))?;
            let binned_path = PathBuf::from(format!("{prefix}.binned.csv"));
            io::with_output(&binned_path, |w| io::write_binned(w, &hist.correlations(), &s.meta))?;
            println!(
                "wrote {} events to {} and {} occupied bins to {}",
                batch.records.len(),
                events_path.display(),
                hist.correlations().len(),
                binned_path.display()
            );
            Ok(())
        }
        Command::Bell {
            species,
            times,
            phases,
            events,
            dt,
            out,
        } => {
            let mut s = Settings::new("bell", file);
            let sidecar = match &events {
                Some(path) => {
                    let side = io::sidecar_path(path);
                    side.exists().then(|| io::read_sidecar(&side)).transpose()?
                }
                None => None,
            };
            let p = match &sidecar {
                Some(sc) => {
                    s.meta.insert("delta-m", sc.delta_m.echo());
                    s.meta.insert("gamma", sc.gamma.echo());
                    sc.params()?
                }
                None => s.params(&species, None)?,
            };
            let times: Option<RealList> = s.value("times", times.map(|t| t.parse()).transpose()?)?;
            let phases: Option<RealList> = s.value("phases", phases.map(|t| t.parse()).transpose()?)?;
            let q = match (times, phases) {
                (Some(_), Some(_)) => return Err(Error::Config("give either --times or --phases".into())),
                (Some(t), None) => quadruple(&t.0, |x| x)?,
                (None, Some(ph)) => quadruple(&ph.0, |x| x / p.delta_m)?,
                (None, None) => TimeQuadruple::qm_optimum(&p),
            };
            let out = out_path(&mut s, out)?;
            let report = match events {
                None => analytic_report(&p, &q),
                Some(path) => {
                    s.meta.insert("events", path.display());
                    let dt = s.or("dt", dt, DEFAULT_BIN_LIFETIMES / p.gamma)?;
                    let records = io::read_events_file(&path)?;
                    empirical_report(&p, &q, &records, dt)?
                }
            };
            write_json_out(&out, &report, &s.meta)
        }
        Command::Search {
            species,
            samples,
            seed,
            t_max,
            out,
        } => {
            let mut s = Settings::new("search", file);
            let p = s.params(&species, None)?;
            let samples = s.or("samples", samples, 100_000)?;
            let seed = s.seed(seed)?;
            let t_max = s.or("t-max", t_max, DEFAULT_RANGE_LIFETIMES / p.gamma)?;
            let out = out_path(&mut s, out)?;
            let result: SearchResult = combination_search(&p, samples, seed, (0.0, t_max))?;
            write_json_out(&out, &result, &s.meta)
        }
    }
}

fn quadruple(values: &[f64], to_time: impl Fn(f64) -> f64) -> Result<TimeQuadruple> {
    match values {
        &[a, b, c, d] => TimeQuadruple::new(to_time(a), to_time(b), to_time(c), to_time(d)),
        _ => Err(Error::Config(format!("expected four comma-separated times, got {}", values.len()))),
    }
}

/// `R` from binned events, with every required time-difference bin checked.
pub fn empirical_report(
    params: &MesonParams,
    q: &TimeQuadruple,
    records: &[crate::model::DecayRecord],
    bin_width: f64,
) -> Result<BellReport> {
    let dts = q.delta_ts();
    let dt_max = dts.iter().copied().fold(0.0, f64::max) + 2.0 * bin_width;
    let mut hist = DeltaHistogram::new(bin_width, dt_max)?;
    for r in records {
        hist.push(r);
    }
    let mut estimates = Vec::with_capacity(4);
    let mut offending = Vec::new();
    for dt in dts {
        match hist.correlation_at(dt) {
            Ok(e) => estimates.push(e),
            Err(_) => offending.push(format!("{dt:e} s")),
        }
    }
    if !offending.is_empty() {
        return Err(Error::InsufficientData {
            what: "time-difference bins".into(),
            offending,
        });
    }
    let est: [_; 4] = estimates.try_into().expect("four estimates");
    let (r, se) = r_factor_estimate(&est);
    Ok(BellReport::new(r, lrt_bound_exponential(params, q)).with_stderr(se))
}

/// Human-readable constants report.
pub fn cmd_constants<W: Write>(p: &MesonParams, w: &mut W) -> Result<()> {
    let x_thr = x_threshold();
    writeln!(w, "species: {}", p.label)?;
    writeln!(w, "delta_m: {:e} 1/s", p.delta_m)?;
    writeln!(w, "gamma: {:e} 1/s", p.gamma)?;
    writeln!(w, "lifetime: {:e} s", p.lifetime())?;
    writeln!(w, "x: {:.6}", p.x())?;
    writeln!(w, "x_threshold: {x_thr:.6}")?;
    writeln!(w, "p_threshold: {:.6}", p_threshold())?;
    writeln!(
        w,
        "violation possible at optimum: {}",
        if p.x() > x_thr { "yes" } else { "no" }
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let m = parse_config("# defaults\nseed = 7\n\ndelta_m=1.5 # inline\n").unwrap();
        assert_eq!(m["seed"], "7");
        assert_eq!(m["delta-m"], "1.5");
        assert!(parse_config("seed 7").is_err());
    }

    #[test]
    fn precedence_flag_file_default() {
        let mut s = Settings::new("t", parse_config("n = 5\nsteps = 9").unwrap());
        assert_eq!(s.or("n", Some(3usize), 1).unwrap(), 3);
        assert_eq!(s.or("steps", None, 1usize).unwrap(), 9);
        assert_eq!(s.or("points", None, 1usize).unwrap(), 1);
        assert_eq!(s.meta.params["n"], "3");
        let mut bad = Settings::new("t", parse_config("n = many").unwrap());
        assert!(matches!(bad.or("n", None, 1usize), Err(Error::Config(_))));
    }

    #[test]
    fn species_resolution() {
        let mut s = Settings::new("t", BTreeMap::new());
        assert_eq!(s.params(&SpeciesArgs::default(), Some("K".into())).unwrap().delta_m, 0.95);
        let custom = SpeciesArgs {
            delta_m: Some(2.0),
            gamma: Some(1.0),
            ..Default::default()
        };
        assert_eq!(s.params(&custom, None).unwrap().x(), 2.0);
        let half = SpeciesArgs {
            delta_m: Some(2.0),
            ..Default::default()
        };
        assert!(s.params(&half, None).is_err());
        assert!(matches!(
            s.params(&SpeciesArgs::default(), Some("D".into())),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn real_list() {
        let l: RealList = "0.39, 0.59,0.99".parse().unwrap();
        assert_eq!(l.0, vec![0.39, 0.59, 0.99]);
        assert_eq!(l.to_string(), "0.39,0.59,0.99");
        assert!("1,x".parse::<RealList>().is_err());
    }

    #[test]
    fn constants_report() {
        let mut buf = Vec::new();
        cmd_constants(&MesonParams::b_meson(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("x: 0.773498"));
        assert!(text.contains("x_threshold: 5.874"));
        assert!(text.contains("violation possible at optimum: no"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), 3);
        assert_eq!(
            exit_code(&Error::InsufficientData {
                what: "bins".into(),
                offending: vec![]
            }),
            4
        );
        assert_eq!(exit_code(&Error::Numeric("x".into())), 1);
    }
}
