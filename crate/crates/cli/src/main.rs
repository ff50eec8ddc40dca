mod config;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::warn;

use stokes_lab::analysis::experiments::{
    convergence_experiment, dirac_convergence_experiment, green_decay_experiment, infsup_experiment, mesh_report, stability_experiment,
    weight_report, DiracSetup, GreenSetup, LevelPlan,
};
use stokes_lab::analysis::ExperimentReport;
use stokes_lab::{ElementPair, ExactSolution, Pattern, Rect, WeightSpec};

use config::{layer, parse_bool, parse_config, parse_point, parse_points};

#[derive(Parser, Debug)]
#[command(name = "stokes-lab", version, about = "Stokes finite element experiments in weighted spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Mesh statistics per level
    MeshInfo,
    /// Weight diagnostics per level
    WeightsDiag,
    /// Smooth convergence rates of the Stokes projection
    Convergence,
    /// Weighted stability ratio of the Stokes projection
    Stability,
    /// Discrete inf-sup constant per level
    Infsup,
    /// Point-source convergence against a fine reference
    Dirac,
    /// Localized Green's function error
    Green,
}

impl Command {
    fn default_base(self) -> usize {
        match self {
            Command::Dirac => 2,
            _ => 4,
        }
    }

    fn default_levels(self) -> usize {
        match self {
            Command::Green => 3,
            _ => 4,
        }
    }
}

#[derive(Args, Debug, Default)]
struct Flags {
    /// Element pair: mini or th
    #[arg(long, global = true)]
    pair: Option<String>,
    /// Mesh pattern: right or criss-cross
    #[arg(long, global = true)]
    pattern: Option<String>,
    /// Number of mesh levels
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Subdivisions per side on the coarsest level
    #[arg(long = "base-n", global = true)]
    base_n: Option<usize>,
    /// Weight, e.g. `dist:0.5,0.5:1` or `const:1`
    #[arg(long, global = true)]
    weight: Option<String>,
    /// Integrability exponent
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Distance weight exponent
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Point `x,y` (`;`-separated list for green)
    #[arg(long, global = true)]
    z: Option<String>,
    /// Point force `fx,fy` for dirac
    #[arg(long, global = true, allow_negative_numbers = true)]
    force: Option<String>,
    /// Run even when a certification gate refuses
    #[arg(long = "force-gates", global = true)]
    force_gates: bool,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// `key = value` configuration file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Green's function component indices, 1 or 2
    #[arg(long, global = true)]
    i: Option<usize>,
    #[arg(long, global = true)]
    j: Option<usize>,
    /// Exact pair for convergence and stability
    #[arg(long, global = true)]
    exact: Option<String>,
    /// Reference levels beyond the finest level
    #[arg(long = "reference-extra", global = true)]
    reference_extra: Option<usize>,
}

impl Flags {
    fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v);
            }
        };
        put("pair", self.pair.clone());
        put("pattern", self.pattern.clone());
        put("levels", self.levels.map(|v| v.to_string()));
        put("base_n", self.base_n.map(|v| v.to_string()));
        put("weight", self.weight.clone());
        put("p", self.p.map(|v| v.to_string()));
        put("alpha", self.alpha.map(|v| v.to_string()));
        put("z", self.z.clone());
        put("force", self.force.clone());
        put("force_gates", self.force_gates.then(|| "true".to_string()));
        put("out", self.out.as_ref().map(|p| p.display().to_string()));
        put("seed", self.seed.map(|v| v.to_string()));
        put("kappa", self.kappa.map(|v| v.to_string()));
        put("lambda", self.lambda.map(|v| v.to_string()));
        put("i", self.i.map(|v| v.to_string()));
        put("j", self.j.map(|v| v.to_string()));
        put("exact", self.exact.clone());
        put("reference_extra", self.reference_extra.map(|v| v.to_string()));
        m
    }
}

enum Failure {
    Gate(String),
    Other(String),
}

impl From<stokes_lab::Error> for Failure {
    fn from(e: stokes_lab::Error) -> Self {
        if e.is_gate() {
            Failure::Gate(e.to_string())
        } else {
            Failure::Other(e.to_string())
        }
    }
}

impl From<String> for Failure {
    fn from(s: String) -> Self {
        Failure::Other(s)
    }
}

struct Settings {
    eff: BTreeMap<String, String>,
}

impl Settings {
    fn get(&self, key: &str) -> Option<&str> {
        self.eff.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<T, String>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.get(key).ok_or_else(|| format!("missing setting `{key}`"))?;
        v.parse::<T>().map_err(|e| format!("invalid {key} `{v}`: {e}"))
    }

    fn point(&self, key: &str) -> Result<[f64; 2], String> {
        parse_point(self.get(key).unwrap_or_default()).map_err(|e| format!("{key}: {e}"))
    }

    fn pair(&self) -> Result<ElementPair, String> {
        self.parse("pair")
    }

    fn plan(&self) -> Result<LevelPlan, String> {
        let pattern: Pattern = self.parse("pattern")?;
        let plan = LevelPlan { pattern, base_n: self.parse("base_n")?, levels: self.parse("levels")?, domain: Rect::unit() };
        if plan.levels == 0 || plan.base_n == 0 {
            return Err("levels and base_n must be positive".into());
        }
        Ok(plan)
    }

    fn weight(&self) -> Result<Option<WeightSpec>, String> {
        self.get("weight").map(|s| s.parse::<WeightSpec>().map_err(|e| e.to_string())).transpose()
    }

    fn force_gates(&self) -> Result<bool, String> {
        parse_bool(self.get("force_gates").unwrap_or("false"))
    }
}

fn print_table(rep: &ExperimentReport) {
    let mut header = format!("{:>5} {:>11} {:>9}", "level", "h", "dofs");
    for q in &rep.quantities {
        header.push_str(&format!(" {q:>16}"));
    }
    for q in &rep.eoc_of {
        header.push_str(&format!(" {:>16}", format!("eoc_{q}")));
    }
    println!("{}", rep.experiment);
    println!("{header}");
    let rates: Vec<Vec<Option<f64>>> = rep.eoc_of.iter().map(|q| rep.eoc_column(q).unwrap_or_default()).collect();
    for (k, row) in rep.rows.iter().enumerate() {
        let mut line = format!("{:>5} {:>11.4e} {:>9}", row.level, row.h, row.dofs);
        for v in &row.values {
            line.push_str(&format!(" {v:>16.6e}"));
        }
        for r in &rates {
            match r.get(k).copied().flatten() {
                Some(v) => line.push_str(&format!(" {v:>16.4}")),
                None => line.push_str(&format!(" {:>16}", "-")),
            }
        }
        println!("{line}");
    }
    for n in &rep.notes {
        println!("note: {n}");
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            let f = parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))?;
            for w in &f.warnings {
                warn!("{}: {w}", path.display());
            }
            Some(f)
        }
        None => None,
    };
    let mut eff = layer(file.as_ref(), &cli.flags.to_map());
    eff.entry("base_n".into()).or_insert_with(|| cli.command.default_base().to_string());
    if cli.flags.levels.is_none() && !file.as_ref().is_some_and(|f| f.entries.contains_key("levels")) {
        eff.insert("levels".into(), cli.command.default_levels().to_string());
    }
    let s = Settings { eff };
    let plan = s.plan()?;
    let force = s.force_gates()?;
    let out: PathBuf = s.parse("out")?;
    let mut rep = match cli.command {
        Command::MeshInfo => mesh_report(&plan)?,
        Command::WeightsDiag => {
            let w = match s.weight()? {
                Some(w) => w,
                None => WeightSpec::dist_point(s.point("z")?, s.parse("alpha")?),
            };
            weight_report(&w, s.parse("p")?, &plan)?
        }
        Command::Convergence => {
            let exact: ExactSolution = s.parse("exact")?;
            convergence_experiment(&exact, &exact.to_string(), s.pair()?, &plan)?
        }
        Command::Stability => {
            let exact: ExactSolution = s.parse("exact")?;
            let w = match s.weight()? {
                Some(w) => w,
                None => WeightSpec::dist_point(s.point("z")?, s.parse("alpha")?),
            };
            stability_experiment(&exact, &exact.to_string(), s.pair()?, Some(&w), s.parse("p")?, &plan, force)?
        }
        Command::Infsup => {
            let p: f64 = s.parse("p")?;
            if p != 2.0 && !force {
                return Err(Failure::Gate(format!("p = {p}: the inf-sup eigenproblem is certified for p = 2 only")));
            }
            infsup_experiment(s.pair()?, s.weight()?.as_ref(), &plan, force)?
        }
        Command::Dirac => {
            let setup = DiracSetup {
                points: vec![(s.point("z")?, s.point("force")?)],
                alpha: s.parse("alpha")?,
                reference_extra: s.parse("reference_extra")?,
            };
            dirac_convergence_experiment(&setup, s.pair()?, &plan, force)?
        }
        Command::Green => {
            let idx = |k: &str| -> Result<usize, String> {
                match s.parse::<usize>(k)? {
                    v @ (1 | 2) => Ok(v - 1),
                    v => Err(format!("{k} must be 1 or 2, got {v}")),
                }
            };
            let setup = GreenSetup {
                zs: parse_points(s.get("z").unwrap_or_default()).map_err(|e| format!("z: {e}"))?,
                i: idx("i")?,
                j: idx("j")?,
                lambda: s.parse("lambda")?,
                kappa: s.parse("kappa")?,
                reference_extra: s.parse("reference_extra")?,
            };
            green_decay_experiment(&setup, s.pair()?, &plan)?
        }
    };
    for (k, v) in &s.eff {
        rep.set(&format!("cli.{k}"), v);
    }
    print_table(&rep);
    rep.write(&out).map_err(|e| format!("writing reports: {e}"))?;
    println!("wrote {}/{}.csv and .json", out.display(), rep.experiment);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Gate(msg)) => {
            eprintln!("refused: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
