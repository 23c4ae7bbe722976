#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Arg, ArgAction, ArgMatches, Command};

use irrspec::aliasfree::{certify_band, max_aliasfree_band, Band, CertifierSettings};
use irrspec::estimate::{masry_estimate, EstimatorConfig, FrequencyGrid, RaisedCosine};
use irrspec::harness::{
    contour_rows, run_aliasing_control, run_aliasing_demo, run_certifier_demo, run_d_sweep, run_theta_sweep,
    verdict_line, write_aliasing_report, write_certifier_report, write_csv, write_csv_to, write_sweep_report,
    AliasingDemoConfig, ExperimentConfig, Provenance, SweepPoint,
};
use irrspec::simulate::{simulate_path, SampledPath, SynthesisMethod};
use irrspec::{Error, Result, SamplingScheme, Seed, SpectrumModel};

/// Resolved parameters: command-line flags override the config file, which
/// overrides built-in defaults. Every value read is echoed into the output.
struct Params {
    values: BTreeMap<String, String>,
    echo: Vec<(String, String)>,
}

impl Params {
    fn new(config: BTreeMap<String, String>, matches: &ArgMatches, keys: &[String]) -> Result<Self> {
        for k in config.keys() {
            if !keys.contains(k) {
                return Err(Error::Parameter(format!("unknown config key `{k}` for this command")));
            }
        }
        let mut values = config;
        for k in keys {
            if let Some(v) = matches.get_one::<String>(k) {
                values.insert(k.clone(), v.clone());
            }
        }
        Ok(Self { values, echo: Vec::new() })
    }

    fn text(&mut self, key: &str, default: &str) -> String {
        let v = self.values.get(key).cloned().unwrap_or_else(|| default.to_string());
        self.echo.push((key.to_string(), v.clone()));
        v
    }

    fn optional(&mut self, key: &str) -> Option<String> {
        let v = self.values.get(key).cloned()?;
        self.echo.push((key.to_string(), v.clone()));
        Some(v)
    }

    fn parse<T: FromStr>(&mut self, key: &str, default: &str) -> Result<T> {
        let v = self.text(key, default);
        v.trim()
            .parse()
            .map_err(|_| Error::Parameter(format!("cannot parse {key}={v}")))
    }

    fn list(&mut self, key: &str, default: &str) -> Result<Vec<f64>> {
        let v = self.text(key, default);
        v.split(',')
            .map(|x| {
                x.trim()
                    .parse()
                    .map_err(|_| Error::Parameter(format!("cannot parse {key}={v}")))
            })
            .collect()
    }

    fn model(&mut self) -> Result<SpectrumModel<f64>> {
        SpectrumModel::parse(&self.text("model", "sim5"))
    }

    fn scheme(&mut self, default: &str) -> Result<SamplingScheme<f64>> {
        SamplingScheme::parse(&self.text("scheme", default))
    }

    fn method(&mut self) -> Result<SynthesisMethod> {
        SynthesisMethod::parse(&self.text("method", "exact"))
    }

    fn settings(&mut self) -> Result<CertifierSettings<f64>> {
        let d = CertifierSettings::<f64>::default();
        Ok(CertifierSettings {
            points: self.parse("points", &d.points.to_string())?,
            resolution: self.parse("resolution", &d.resolution.to_string())?,
        })
    }
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Parameter(format!("cannot read config {}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        out.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(out)
}

fn flag(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name).long(name).value_name("VALUE").help(help)
}

const MODEL: (&str, &str) = ("model", "spectrum model id [default: sim5]");
const SEED: (&str, &str) = ("seed", "master seed [default: 1]");
const N: (&str, &str) = ("n", "samples per path [default: 1000]");
const BN: (&str, &str) = ("bn", "lag-window bandwidth b_n [default: 0.02]");
const GRID: (&str, &str) = ("grid", "frequency grid lo:hi:count [default: 0:2π:512]");
const METHOD: (&str, &str) = ("method", "exact or spectral:<components> [default: exact]");
const POINTS: (&str, &str) = ("points", "contour points [default: 1024]");
const RESOLUTION: (&str, &str) = ("resolution", "raster cell size [default: 0.0078125]");

fn command(name: &'static str, about: &'static str, out: &'static str, flags: &[(&'static str, &'static str)]) -> Command {
    let mut c = Command::new(name)
        .about(about)
        .arg(flag("out", out));
    for &(k, h) in flags {
        c = c.arg(flag(k, h));
    }
    c
}

/// Keys a config file may set for `m`.
fn keys(m: &Command) -> Vec<String> {
    m.get_arguments()
        .map(|a| a.get_id().to_string())
        .filter(|k| !matches!(k.as_str(), "out" | "help" | "config"))
        .collect()
}

fn cli() -> Command {
    let sweep = |name: &'static str, about: &'static str, d: &'static str, theta: &'static str| {
        command(
            name,
            about,
            "output directory [default: current directory]",
            &[
                MODEL,
                ("d", d),
                ("theta", theta),
                N,
                ("runs", "replicates per sweep point [default: 100]"),
                BN,
                GRID,
                SEED,
                METHOD,
            ],
        )
    };
    Command::new("irrspec")
        .about("Spectral estimation from irregularly sampled stationary processes")
        .version(env!("CARGO_PKG_VERSION"))
        .subcommand_required(true)
        .arg(
            Arg::new("config")
                .long("config")
                .global(true)
                .value_name("FILE")
                .action(ArgAction::Set)
                .help("flat key=value config file; flags take precedence"),
        )
        .subcommand(command(
            "simulate",
            "Draw sampling times and a Gaussian path",
            "output CSV [default: stdout]",
            &[
                MODEL,
                ("scheme", "sampling scheme id [default: shifted-exp:d=1,theta=1]"),
                N,
                SEED,
                ("run", "run index [default: 0]"),
                METHOD,
            ],
        ))
        .subcommand(command(
            "estimate",
            "Lag-window spectral estimate from a t,x CSV",
            "output CSV [default: stdout]",
            &[
                ("input", "input CSV with columns t,x"),
                BN,
                ("beta", "mean sampling rate [default: (n - 1)/(t_n - t_1)]"),
                GRID,
            ],
        ))
        .subcommand(command(
            "contour",
            "Trace f′ over a band and decide whether it divides the plane",
            "output CSV [default: stdout]",
            &[
                ("scheme", "sampling scheme id [default: shifted-exp:d=1,theta=1]"),
                ("c", "band [-cπ/d, cπ/d] [default: 1]"),
                ("band", "explicit band lo:hi, overrides c"),
                POINTS,
                RESOLUTION,
            ],
        ))
        .subcommand(command(
            "band-search",
            "Largest symmetric band whose contour does not divide the plane",
            "output CSV [default: stdout]",
            &[
                ("scheme", "sampling scheme id [default: two-point:d=1,p=0.68,g1=1,g2=2.1]"),
                ("c-max", "largest band multiplier [default: 2]"),
                ("step", "multiplier step [default: 0.05]"),
                POINTS,
                RESOLUTION,
            ],
        ))
        .subcommand(sweep(
            "d-sweep",
            "Monte Carlo MSE study over the truncation d",
            "truncations [default: 0,0.5,1,2,4,8]",
            "exponential rate [default: 1]",
        ))
        .subcommand(sweep(
            "theta-sweep",
            "Monte Carlo MSE study over the exponential rate θ",
            "truncation [default: 1]",
            "rates [default: 0,0.05,0.1,0.2,0.5,1,2,5,10,20]",
        ))
        .subcommand(command(
            "aliasing-demo",
            "Compare two spectra that agree under a constrained scheme",
            "output directory [default: current directory]",
            &[
                ("a", "triangle width [default: 1]"),
                ("scheme", "sampling scheme id [default: shifted-exp:d=1,theta=1]"),
                ("runs", "replicates per model [default: 200]"),
                N,
                ("max-lag", "largest lag [default: 20]"),
                SEED,
                ("control", "true to skip the a ≤ d requirement [default: false]"),
            ],
        ))
        .subcommand(command(
            "certifier-demo",
            "Contours and verdicts for the three reference schemes",
            "output directory [default: current directory]",
            &[POINTS, RESOLUTION],
        ))
}

/// Writes to `out` or stdout.
fn emit(out: Option<&String>, prov: &Provenance, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    match out {
        Some(p) => write_csv(Path::new(p), prov, header, rows),
        None => write_csv_to(io::stdout().lock(), prov, header, rows),
    }
}

fn out_dir(m: &ArgMatches) -> PathBuf {
    m.get_one::<String>("out").map_or_else(|| PathBuf::from("."), PathBuf::from)
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        eprintln!("wrote {}", f.display());
    }
}

fn simulate(p: &mut Params, m: &ArgMatches) -> Result<()> {
    let model = p.model()?;
    let scheme = p.scheme("shifted-exp:d=1,theta=1")?;
    let n: usize = p.parse("n", "1000")?;
    let seed = Seed::new(p.parse("seed", "1")?).run(p.parse("run", "0")?);
    let method = p.method()?;
    let path = simulate_path(&model, &scheme, n, seed, method)?;
    let prov = Provenance::new("simulate", p.echo.clone())
        .note("variance", model.variance())
        .note("jitter", path.jitter);
    let rows: Vec<Vec<String>> = path
        .times
        .iter()
        .zip(&path.values)
        .map(|(t, x)| vec![t.to_string(), x.to_string()])
        .collect();
    emit(m.get_one("out"), &prov, &["t", "x"], &rows)
}

fn read_path(file: &str) -> Result<SampledPath<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(file)
        .map_err(|e| Error::Parameter(format!("cannot read {file}: {e}")))?;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parameter(format!("{file}: row {} needs numeric t,x", i + 1)))
        };
        times.push(field(0)?);
        values.push(field(1)?);
    }
    if times.len() < 2 || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Parameter(format!(
            "{file}: need at least two rows with strictly increasing t"
        )));
    }
    Ok(SampledPath {
        times,
        values,
        model_id: "unknown".into(),
        scheme_id: "unknown".into(),
        seed: Seed::new(0),
        jitter: 0.0,
        method: SynthesisMethod::Exact,
    })
}

fn estimate(p: &mut Params, m: &ArgMatches) -> Result<()> {
    let input = p
        .optional("input")
        .ok_or_else(|| Error::Parameter("estimate needs --input".into()))?;
    let path = read_path(&input)?;
    let bn: f64 = p.parse("bn", "0.02")?;
    let grid = match p.optional("grid") {
        Some(g) => FrequencyGrid::parse(&g)?,
        None => FrequencyGrid::default_grid(),
    };
    let n = path.len();
    let span = path.times[n - 1] - path.times[0];
    let beta = match p.optional("beta") {
        Some(b) => b.parse().map_err(|_| Error::Parameter(format!("cannot parse beta={b}")))?,
        None => (n - 1) as f64 / span,
    };
    let cfg = EstimatorConfig::new(RaisedCosine, bn, beta, grid.clone())?;
    let est = masry_estimate(&path, &cfg)?;
    let prov = Provenance::new("estimate", p.echo.clone()).note("beta", beta);
    let rows: Vec<Vec<String>> = grid
        .values()
        .iter()
        .zip(&est)
        .map(|(l, e)| vec![l.to_string(), e.to_string()])
        .collect();
    emit(m.get_one("out"), &prov, &["lambda", "phi_hat"], &rows)
}

fn parse_band(spec: &str) -> Result<Band<f64>> {
    let (lo, hi) = spec
        .split_once(':')
        .ok_or_else(|| Error::Parameter(format!("band `{spec}` is not lo:hi")))?;
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parameter(format!("band `{spec}` is not lo:hi")))
    };
    Band::new(num(lo)?, num(hi)?)
}

fn contour(p: &mut Params, m: &ArgMatches) -> Result<()> {
    let scheme = p.scheme("shifted-exp:d=1,theta=1")?;
    let band = match p.optional("band") {
        Some(b) => parse_band(&b)?,
        None => Band::symmetric(p.parse("c", "1")?, scheme.d())?,
    };
    let settings = p.settings()?;
    let verdict = certify_band(&scheme, band, settings)?;
    let line = verdict_line(&verdict);
    eprintln!("{line}");
    let prov = Provenance::new("contour", p.echo.clone())
        .note("band", format!("[{}, {}]", band.lo, band.hi))
        .note("verdict", line);
    emit(m.get_one("out"), &prov, &["lambda", "re_f", "im_f"], &contour_rows(&verdict))
}

fn band_search(p: &mut Params, m: &ArgMatches) -> Result<()> {
    let scheme = p.scheme("two-point:d=1,p=0.68,g1=1,g2=2.1")?;
    let c_max: f64 = p.parse("c-max", "2")?;
    let step: f64 = p.parse("step", "0.05")?;
    let settings = p.settings()?;
    let search = max_aliasfree_band(&scheme, c_max, step, settings)?;
    let best = search.best.map_or_else(|| "none".to_string(), |c| c.to_string());
    eprintln!("largest alias-free multiplier: {best}");
    let prov = Provenance::new("band-search", p.echo.clone()).note("best_c", &best);
    let rows: Vec<Vec<String>> = search
        .verdicts
        .iter()
        .map(|(c, v)| {
            vec![
                c.to_string(),
                v.divides_plane.to_string(),
                v.bounded_region_count.to_string(),
                v.conservative.to_string(),
            ]
        })
        .collect();
    emit(
        m.get_one("out"),
        &prov,
        &["c", "divides_plane", "bounded_regions", "conservative"],
        &rows,
    )
}

fn sweep(p: &mut Params, m: &ArgMatches, name: &str) -> Result<()> {
    let mut cfg = if name == "d-sweep" {
        ExperimentConfig::<f64>::d_sweep()
    } else {
        ExperimentConfig::<f64>::theta_sweep()
    };
    cfg.model = p.model()?;
    let (ds, thetas) = if name == "d-sweep" {
        (p.list("d", "0,0.5,1,2,4,8")?, vec![p.parse("theta", "1")?])
    } else {
        (vec![p.parse("d", "1")?], p.list("theta", "0,0.05,0.1,0.2,0.5,1,2,5,10,20")?)
    };
    cfg.sweep = ds
        .iter()
        .flat_map(|&d| thetas.iter().map(move |&theta| SweepPoint { d, theta }))
        .collect();
    cfg.n = p.parse("n", "1000")?;
    cfg.runs = p.parse("runs", "100")?;
    cfg.bandwidth = p.parse("bn", "0.02")?;
    if let Some(g) = p.optional("grid") {
        cfg.grid = FrequencyGrid::parse(&g)?;
    }
    cfg.master_seed = p.parse("seed", "1")?;
    cfg.synthesis = p.method()?;
    let report = if name == "d-sweep" {
        run_d_sweep(&cfg)?
    } else {
        run_theta_sweep(&cfg)?
    };
    for point in &report.points {
        let status = point.error.as_deref().unwrap_or("ok");
        eprintln!(
            "{}: {:.1} s, {status}",
            point.scheme_id,
            point.elapsed.as_secs_f64()
        );
    }
    report_files(&write_sweep_report(&report, &out_dir(m), name)?);
    Ok(())
}

fn aliasing(p: &mut Params, m: &ArgMatches) -> Result<()> {
    let cfg = AliasingDemoConfig {
        a: p.parse("a", "1")?,
        scheme: p.scheme("shifted-exp:d=1,theta=1")?,
        runs: p.parse("runs", "200")?,
        n: p.parse("n", "500")?,
        max_lag: p.parse("max-lag", "20")?,
        master_seed: p.parse("seed", "1")?,
    };
    let control: bool = p.parse("control", "false")?;
    let report = if control {
        run_aliasing_control(&cfg)?
    } else {
        run_aliasing_demo(&cfg)?
    };
    eprintln!(
        "{}",
        if report.distinguishable {
            "DISTINGUISHABLE"
        } else {
            "NOT DISTINGUISHABLE"
        }
    );
    report_files(&write_aliasing_report(&report, &out_dir(m), "aliasing-demo")?);
    Ok(())
}

fn certifier(p: &mut Params, m: &ArgMatches) -> Result<()> {
    let settings = p.settings()?;
    let cases = run_certifier_demo(settings)?;
    for c in &cases {
        eprintln!("{}: {}", c.label, verdict_line(&c.verdict));
    }
    report_files(&write_certifier_report(&cases, settings, &out_dir(m), "certifier-demo")?);
    Ok(())
}

fn run() -> Result<()> {
    let app = cli();
    let matches = match app.clone().try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (name, sub) = matches.subcommand().expect("subcommand required");
    let config = match sub.get_one::<String>("config") {
        Some(path) => read_config(Path::new(path))?,
        None => BTreeMap::new(),
    };
    let spec = app.find_subcommand(name).expect("known subcommand");
    let mut p = Params::new(config, sub, &keys(spec))?;
    match name {
        "simulate" => simulate(&mut p, sub),
        "estimate" => estimate(&mut p, sub),
        "contour" => contour(&mut p, sub),
        "band-search" => band_search(&mut p, sub),
        "d-sweep" | "theta-sweep" => sweep(&mut p, sub, name),
        "aliasing-demo" => aliasing(&mut p, sub),
        "certifier-demo" => certifier(&mut p, sub),
        _ => unreachable!("clap rejects unknown subcommands"),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("irrspec: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
