//! `siegel`: command-line access to the siegel-core computations.

mod store;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use siegel_core::fourier::{check_weight_rank_congruence, mod_pm_singular_rank, QExpansion};
use siegel_core::genus::GenusCache;
use siegel_core::lambda::HalfIntegralMatrix;
use siegel_core::padic::{direct_limit_coefficient, empirical_limit, fit_and_verify_with, FitConfig};
use siegel_core::theta::theta_series;
use siegel_core::{Error, GenusRecord, WeightSequence, WeightTarget};

use store::Store;

#[derive(Parser, Debug)]
#[command(name = "siegel", version, about = "Exact Siegel modular form computations")]
struct Cli {
    /// Directory for genus and expansion caches.
    #[arg(long, global = true, env = "SIEGEL_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classes of even positive definite forms with level dividing `level`.
    Classes(LatticeArgs),
    /// Classes partitioned into genera, in the genus cache format.
    Genera(LatticeArgs),
    /// Theta series of one form.
    Theta {
        /// Matrix text `n; rows of 2T`, or a file containing it.
        #[arg(long)]
        form: String,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Siegel–Eisenstein series of level one.
    Eisenstein {
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Singular p-rank of a dumped expansion modulo `p^m`.
    SingularRank {
        /// Expansion dump produced by `theta` or `eisenstein`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        m: u32,
        /// Weight for the weight-rank congruence check.
        #[arg(long)]
        k: Option<u64>,
    },
    /// Residue ladders of Eisenstein windows along a converging weight sequence.
    Limit {
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        window: WindowArgs,
        /// Ladder of primitive coefficients at this form instead of a window.
        #[arg(long)]
        form: Option<String>,
    },
    /// Fit genus theta series to the limit and verify on held-out indices.
    VerifyMain {
        #[command(flatten)]
        target: TargetArgs,
        #[command(flatten)]
        window: WindowArgs,
    },
}

#[derive(Args, Debug)]
struct LatticeArgs {
    #[arg(long)]
    rank: usize,
    #[arg(long)]
    level: u64,
}

#[derive(Args, Debug)]
struct WindowArgs {
    #[arg(long, default_value_t = 1)]
    degree: usize,
    #[arg(long)]
    bound: i64,
}

#[derive(Args, Debug)]
struct TargetArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    k: u64,
    #[arg(long, default_value_t = 0)]
    j: u8,
    #[arg(long, default_value_t = 3)]
    m_max: u32,
    /// Comma-separated exponents `b(1) < b(2) < …`; overrides `--m-max`.
    #[arg(long, value_delimiter = ',')]
    schedule: Option<Vec<u32>>,
    /// Allow `p ≤ 2k + 1`.
    #[arg(long)]
    exploratory: bool,
}

impl TargetArgs {
    fn sequence(&self) -> Result<WeightSequence, Error> {
        let target = WeightTarget::new(self.p, self.k, self.j, self.exploratory)?;
        match &self.schedule {
            Some(s) => WeightSequence::new(target, s.clone()),
            None => WeightSequence::linear(target, self.m_max),
        }
    }
}

/// Failure of one pipeline stage.
struct Failure {
    stage: &'static str,
    error: Error,
}

trait Stage<T> {
    fn at(self, stage: &'static str) -> Result<T, Failure>;
}

impl<T> Stage<T> for Result<T, Error> {
    fn at(self, stage: &'static str) -> Result<T, Failure> {
        self.map_err(|error| Failure { stage, error })
    }
}

#[derive(Serialize)]
struct FailureReport<'a> {
    passed: bool,
    failed_stage: &'a str,
    error: String,
}

#[derive(Serialize)]
struct ClassList<'a> {
    rank: usize,
    level: u64,
    classes: &'a [siegel_core::genus::CachedClass],
}

#[derive(Serialize)]
struct SingularRankReport {
    p: u64,
    m: u32,
    rank: Option<usize>,
    weight: Option<u64>,
    weight_rank_congruence: Option<bool>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let store = Store::new(cli.cache_dir.clone());
    match run(&cli, &store) {
        Ok((text, verdict)) => match emit(cli.out.as_deref(), &text) {
            Ok(()) if verdict => ExitCode::SUCCESS,
            Ok(()) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error [stage=output]: {e}");
                ExitCode::from(2)
            }
        },
        Err(f) => {
            eprintln!("error [stage={}]: {}", f.stage, f.error);
            let report = FailureReport { passed: false, failed_stage: f.stage, error: f.error.to_string() };
            if matches!(cli.command, Command::VerifyMain { .. }) {
                let _ = emit(cli.out.as_deref(), &to_json(&report));
            }
            ExitCode::from(2)
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> std::io::Result<()> {
    match out {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn parse_form(arg: &str) -> Result<HalfIntegralMatrix, Error> {
    let path = Path::new(arg);
    if !arg.contains(';') && path.exists() {
        HalfIntegralMatrix::parse(fs::read_to_string(path)?.trim())
    } else {
        HalfIntegralMatrix::parse(arg)
    }
}

fn check_lattice(a: &LatticeArgs) -> Result<(), Error> {
    if a.rank == 0 || a.rank % 2 == 1 || a.rank > 4 {
        return Err(Error::OutOfScale(format!("rank {} must be even and at most 4", a.rank)));
    }
    Ok(())
}

/// Returns the output text and the verdict.
fn run(cli: &Cli, store: &Store) -> Result<(String, bool), Failure> {
    match &cli.command {
        Command::Classes(a) => {
            check_lattice(a).at("config")?;
            let cache = store.genus_cache(a.rank, a.level).at("genera")?;
            Ok((to_json(&ClassList { rank: cache.rank, level: cache.level, classes: &cache.classes }), true))
        }
        Command::Genera(a) => {
            check_lattice(a).at("config")?;
            Ok((store.genus_cache(a.rank, a.level).at("genera")?.to_json(), true))
        }
        Command::Theta { form, window } => {
            let s = parse_form(form).at("config")?;
            let f = theta_series(&s, window.degree, window.bound).at("theta")?;
            Ok((dump(&f).at("theta")?, true))
        }
        Command::Eisenstein { k, window } => {
            let f = store.eisenstein(*k as u64, window.degree, window.bound).at("eisenstein")?;
            Ok((dump(&f).at("eisenstein")?, true))
        }
        Command::SingularRank { input, p, m, k } => {
            let text = fs::read_to_string(input).map_err(Error::from).at("input")?;
            let f = serde_json::from_str(&text).map_err(Error::from).and_then(|d| QExpansion::from_dump(&d)).at("input")?;
            let rank = mod_pm_singular_rank(&f, *p, *m).at("singular-rank")?;
            let check = match (k, rank) {
                (Some(k), Some(r)) => Some(check_weight_rank_congruence(*k, r as u64, *p, *m)),
                _ => None,
            };
            let report = SingularRankReport { p: *p, m: *m, rank, weight: *k, weight_rank_congruence: check };
            Ok((to_json(&report), check != Some(false)))
        }
        Command::Limit { target, window, form } => {
            let seq = target.sequence().at("config")?;
            match form {
                Some(form) => {
                    let s = parse_form(form).at("config")?;
                    let ladder = direct_limit_coefficient(&s, &seq).at("limit")?;
                    Ok((to_json(&ladder), true))
                }
                None => {
                    let lim = empirical_limit(&seq, window.degree, window.bound, |k, n, b| store.eisenstein(k, n, b))
                        .at("limit")?;
                    let clean = lim.flagged().is_empty();
                    Ok((to_json(&lim), clean))
                }
            }
        }
        Command::VerifyMain { target, window } => {
            let seq = target.sequence().at("config")?;
            let genera = store.candidate_genera(&seq.target)?;
            let cfg = FitConfig {
                schedule: seq.schedule.clone(),
                exploratory: target.exploratory,
                ..FitConfig::new(seq.target, window.degree, window.bound, 1)
            };
            let report = fit_and_verify_with(&cfg, &genera, |k, n, b| store.eisenstein(k, n, b)).at("fit")?;
            Ok((report.to_json() + "\n", report.passed))
        }
    }
}

fn dump(f: &QExpansion) -> Result<String, Error> {
    Ok(f.to_json()? + "\n")
}

impl Store {
    /// Genera of rank `2k`, level dividing `p` and character `χ_p^j`.
    /// Reading or validating an existing cache belongs to the fit stage.
    fn candidate_genera(&self, target: &WeightTarget) -> Result<Vec<GenusRecord>, Failure> {
        let rank = 2 * target.k as usize;
        let all = match self.cached_genus_file(rank, target.p) {
            Some(path) => GenusCache::load(&path).and_then(|c| c.genera()).at("fit")?,
            None => self.genus_cache(rank, target.p).and_then(|c| c.genera()).at("genera")?,
        };
        Ok(all
            .into_iter()
            .filter(|g| target.p.is_multiple_of(g.level) && g.character_is_legendre_power(target.p, target.j))
            .collect())
    }
}
