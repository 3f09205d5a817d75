//! Command-line and config-file parameters.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

pub const WORKERS_ENV: &str = "WGLAB_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "wglab", version, about = "Averaged ternary Waring-Goldbach experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub params: Params,
    /// key=value file; flags given on the command line win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// R(n; k) for n = N.
    Count,
    /// Unweighted and weighted sums of R(n; k) over N < n ≤ N + H.
    Interval,
    /// Error profile over an N-grid.
    Scan,
    /// Weighted interval identity by exact grid quadrature.
    Identity,
    /// Major/minor split of the identity integral.
    Decompose,
    /// Single-lemma diagnostics.
    Lemma {
        #[arg(value_enum)]
        name: LemmaName,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Count => "count",
            Command::Interval => "interval",
            Command::Scan => "scan",
            Command::Identity => "identity",
            Command::Decompose => "decompose",
            Command::Lemma { .. } => "lemma",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LemmaName {
    Laplace,
    Mt,
    Tolev,
    Lp,
    WeightedL2,
    Parseval,
}

impl LemmaName {
    pub fn as_str(&self) -> &'static str {
        match self {
            LemmaName::Laplace => "laplace",
            LemmaName::Mt => "mt",
            LemmaName::Tolev => "tolev",
            LemmaName::Lp => "lp",
            LemmaName::WeightedL2 => "weighted-l2",
            LemmaName::Parseval => "parseval",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    List(Vec<u64>),
    Geometric { start: u64, stop: u64, factor: f64 },
}

impl Grid {
    pub fn points(&self) -> Vec<u64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Geometric { start, stop, factor } => {
                let mut out = Vec::new();
                let mut x = *start as f64;
                // Tolerate the rounding in repeated multiplication.
                while x.round() <= *stop as f64 * (1.0 + 1e-12) {
                    let v = x.round() as u64;
                    if out.last() != Some(&v) {
                        out.push(v.min(*stop));
                    }
                    x *= factor;
                }
                out
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Grid::List(v) => v.iter().map(u64::to_string).collect::<Vec<_>>().join(";"),
            Grid::Geometric { start, stop, factor } => format!("{start}:{stop}:{factor}"),
        }
    }
}

/// Accepts plain integers and exact float spellings such as `1e6`.
pub fn parse_count(s: &str) -> Result<u64, String> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("not an integer: {s:?}"))?;
    if f >= 0.0 && f.fract() == 0.0 && f < 2f64.powi(64) {
        Ok(f as u64)
    } else {
        Err(format!("not a non-negative integer: {s:?}"))
    }
}

/// Exponent list from `--k`: one value or a triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exponents(pub Vec<u32>);

pub fn parse_exponents(s: &str) -> Result<Exponents, String> {
    let ks = s
        .split(',')
        .map(|t| t.trim().parse::<u32>().map_err(|_| format!("bad exponent {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    if ks.len() == 1 || ks.len() == 3 {
        Ok(Exponents(ks))
    } else {
        Err(format!("expected one or three exponents, got {}", ks.len()))
    }
}

pub fn parse_grid(s: &str) -> Result<Grid, String> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Grid::List(Vec::new()));
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("geometric grid must be start:stop:factor, got {s:?}"));
        }
        let start = parse_count(parts[0])?;
        let stop = parse_count(parts[1])?;
        let factor: f64 = parts[2].trim().parse().map_err(|_| format!("bad factor {:?}", parts[2]))?;
        if !(factor > 1.0) || start == 0 {
            return Err("geometric grid needs start ≥ 1 and factor > 1".into());
        }
        return Ok(Grid::Geometric { start, stop, factor });
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_count)
        .collect::<Result<Vec<_>, _>>()
        .map(Grid::List)
}

#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    #[arg(long = "N", global = true, value_parser = parse_count)]
    pub n: Option<u64>,
    #[arg(long = "H", global = true, value_parser = parse_count)]
    pub h: Option<u64>,
    /// k1,k2,k3 (a single k for the one-sum lemmas).
    #[arg(long = "k", global = true, value_parser = parse_exponents)]
    pub k: Option<Exponents>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long = "B", global = true)]
    pub b: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long = "eps-trunc", global = true)]
    pub eps_trunc: Option<f64>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub mu: Option<f64>,
    #[arg(long = "X", global = true)]
    pub x: Option<f64>,
    #[arg(long, global = true)]
    pub xi: Option<f64>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub theta: Option<f64>,
    /// Comma list of N values or start:stop:factor.
    #[arg(long, global = true, value_parser = parse_grid)]
    pub grid: Option<Grid>,
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long = "per-n", global = true)]
    pub per_n: bool,
}

#[derive(Parser)]
#[command(no_binary_name = true)]
struct FileParams {
    #[command(flatten)]
    params: Params,
}

const FILE_KEYS: &[&str] = &[
    "N", "H", "k", "epsilon", "B", "c", "eps-trunc", "tolerance", "lambda", "mu", "X", "xi", "tau",
    "theta", "grid", "out", "format", "workers", "per-n",
];

/// Reads `key=value` lines (`#` comments and blank lines ignored). Keys are
/// the long flag names; `_` and `-` are interchangeable.
pub fn read_config_file(path: &Path) -> Result<Params, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
    let mut argv: Vec<String> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::invalid("config-line-format", format!("{}:{}: expected key=value", path.display(), no + 1))
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if !FILE_KEYS.contains(&key.as_str()) {
            return Err(CliError::invalid(
                "config-known-key",
                format!("{}:{}: unknown key {key:?}", path.display(), no + 1),
            ));
        }
        if key == "per-n" {
            match value {
                "true" | "1" | "yes" => argv.push("--per-n".into()),
                "false" | "0" | "no" => {}
                _ => {
                    return Err(CliError::invalid("config-per-n-bool", format!("per-n must be true or false, got {value:?}")))
                }
            }
        } else {
            argv.push(format!("--{key}={value}"));
        }
    }
    FileParams::try_parse_from(argv)
        .map(|f| f.params)
        .map_err(|e| CliError::invalid("config-value", format!("{}: {}", path.display(), e.to_string().trim())))
}

impl Params {
    /// Field-wise merge; values already set on `self` win.
    pub fn or(self, other: Params) -> Params {
        Params {
            n: self.n.or(other.n),
            h: self.h.or(other.h),
            k: self.k.or(other.k),
            epsilon: self.epsilon.or(other.epsilon),
            b: self.b.or(other.b),
            c: self.c.or(other.c),
            eps_trunc: self.eps_trunc.or(other.eps_trunc),
            tolerance: self.tolerance.or(other.tolerance),
            lambda: self.lambda.or(other.lambda),
            mu: self.mu.or(other.mu),
            x: self.x.or(other.x),
            xi: self.xi.or(other.xi),
            tau: self.tau.or(other.tau),
            theta: self.theta.or(other.theta),
            grid: self.grid.or(other.grid),
            out: self.out.or(other.out),
            format: self.format.or(other.format),
            workers: self.workers.or(other.workers),
            per_n: self.per_n || other.per_n,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_accept_float_spelling() {
        assert_eq!(parse_count("1e6"), Ok(1_000_000));
        assert_eq!(parse_count("250"), Ok(250));
        assert!(parse_count("2.5").is_err());
        assert!(parse_count("-3").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1e4,1e5").unwrap().points(), vec![10_000, 100_000]);
        assert_eq!(parse_grid("1000:1000000:10").unwrap().points(), vec![1000, 10_000, 100_000, 1_000_000]);
        assert_eq!(parse_grid("100:1000:3").unwrap().points(), vec![100, 300, 900]);
        assert!(parse_grid("").unwrap().points().is_empty());
        assert!(parse_grid("10:100:1").is_err());
        assert!(parse_grid("10:100").is_err());
    }

    #[test]
    fn exponents() {
        assert_eq!(parse_exponents("2,2,3"), Ok(Exponents(vec![2, 2, 3])));
        assert_eq!(parse_exponents("3"), Ok(Exponents(vec![3])));
        assert!(parse_exponents("2,3").is_err());
    }

    #[test]
    fn flags_after_subcommand() {
        let cli = Cli::try_parse_from(["wglab", "interval", "--N", "1000", "--H", "10", "--k", "2,2,2"]).unwrap();
        assert_eq!(cli.command, Command::Interval);
        assert_eq!(cli.params.n, Some(1000));
        let cli = Cli::try_parse_from(["wglab", "lemma", "mt", "--lambda", "-0.5"]).unwrap();
        assert_eq!(cli.command, Command::Lemma { name: LemmaName::Mt });
        assert_eq!(cli.params.lambda, Some(-0.5));
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("wglab-args-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        fs::write(&path, "# comment\nN=500\nH = 20\nk=2,2,3\neps_trunc=1e-12\nper-n=true\n").unwrap();
        let file = read_config_file(&path).unwrap();
        let flags = Params { h: Some(7), ..Params::default() };
        let merged = flags.or(file);
        assert_eq!(merged.n, Some(500));
        assert_eq!(merged.h, Some(7));
        assert_eq!(merged.k, Some(Exponents(vec![2, 2, 3])));
        assert_eq!(merged.eps_trunc, Some(1e-12));
        assert!(merged.per_n);

        fs::write(&path, "bogus=1\n").unwrap();
        assert_eq!(read_config_file(&path).unwrap_err().kind, "invalid-argument");
        fs::remove_dir_all(&dir).unwrap();
    }
}
