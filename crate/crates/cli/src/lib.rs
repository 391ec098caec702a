//! The `garnier` command line: argument handling, configuration files and report streaming.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use garnier_core::checks::{self, Settings};
use garnier_core::hamiltonian::hamiltonians;
use garnier_core::solution::Branch;
use garnier_core::tau::{build_varpi, displayed_potential, potential_and_tau};
use garnier_core::{ExactScalar, VerificationReport, VerifyMode};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "garnier", version, about = "Verification kit for a degenerate Garnier system and its algebraic solution")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags shared by every subcommand; unset values fall back to the config file, then to defaults.
#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// Seed for randomized identity testing.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Working precision in decimal digits.
    #[arg(long, global = true)]
    pub digits: Option<u32>,
    /// Number of identity-testing trials.
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// pit or full.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    /// Sample point a,b,c (rationals such as 1/2 or 0.25).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub s: Option<String>,
    /// Sign pattern of t_i = ±s_i^{3/2}, e.g. +-+.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub branch: Option<String>,
    /// Integration tolerance.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub tol: Option<f64>,
    /// Complex step in t_i: re, re,im or re+imi.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub delta: Option<String>,
    /// key=value file providing defaults for the flags above.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print one Hamiltonian.
    Hamiltonian {
        #[arg(long)]
        index: usize,
        /// canonical-text or json.
        #[arg(long, default_value = "canonical-text")]
        emit: String,
    },
    /// The compatibility identity for one pair, or all pairs.
    CheckCompatibility {
        #[arg(long)]
        i: Option<usize>,
        #[arg(long)]
        j: Option<usize>,
    },
    /// The symmetric-function system and the η-equations at s.
    VerifySolution,
    /// Hamiltonians from the formal data of the connection.
    DeriveHamiltonians,
    /// Apparentness of q_1, q_2, q_3 for given parameters.
    CheckApparent {
        #[arg(long, allow_hyphen_values = true)]
        q: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        p: Option<String>,
        /// Also shift the coefficient at q_1 by one and expect a failure of apparentness.
        #[arg(long)]
        perturb: bool,
    },
    /// The pull-back along the degree-six cover against the family.
    VerifyPullback {
        #[arg(long, conflicts_with = "s")]
        symbolic: bool,
    },
    /// The one-form, its potential and the tau function.
    Tau {
        /// F, varpi or report.
        #[arg(long, default_value = "report")]
        emit: String,
    },
    /// Integrate one flow direction from a point of the algebraic solution.
    Flow {
        #[arg(long)]
        direction: usize,
        #[arg(long, allow_hyphen_values = true)]
        start_from_s: Option<String>,
        /// report or trajectory.
        #[arg(long, default_value = "report")]
        emit: String,
    },
    /// Every check with the current settings.
    VerifyAll,
}

#[derive(Debug)]
pub struct UsageError(pub String);

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

pub fn parse_triple(v: &str) -> Result<[ExactScalar; 3], UsageError> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 3 {
        return Err(usage(format!("expected three comma-separated rationals, got '{v}'")));
    }
    let mut out = Vec::with_capacity(3);
    for p in parts {
        out.push(p.parse::<ExactScalar>().map_err(|e| usage(e.to_string()))?);
    }
    Ok(out.try_into().expect("three"))
}

/// `re`, `re,im`, or `re±imi`.
pub fn parse_complex(v: &str) -> Result<(f64, f64), UsageError> {
    let bad = || usage(format!("not a complex number: '{v}'"));
    let v = v.trim();
    if let Some((a, b)) = v.split_once(',') {
        return Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?));
    }
    if let Some(body) = v.strip_suffix('i') {
        let bytes = body.as_bytes();
        let split = (1..bytes.len()).rev().find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
        return match split {
            Some(k) => {
                let im = &body[k..];
                let im = if im == "+" || im == "-" { format!("{im}1") } else { im.to_string() };
                Ok((body[..k].parse().map_err(|_| bad())?, im.parse().map_err(|_| bad())?))
            }
            None => {
                let im = match body {
                    "" | "+" => "1",
                    "-" => "-1",
                    b => b,
                };
                Ok((0.0, im.parse().map_err(|_| bad())?))
            }
        };
    }
    Ok((v.parse().map_err(|_| bad())?, 0.0))
}

/// Reads `key=value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, UsageError> {
    const KEYS: [&str; 8] = ["seed", "digits", "trials", "mode", "s", "branch", "tol", "delta"];
    let mut out = BTreeMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| usage(format!("config line {}: expected key=value", n + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(usage(format!("config line {}: unknown key '{k}'", n + 1)));
        }
        out.insert(k.to_string(), v.trim().to_string());
    }
    Ok(out)
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, UsageError> {
    v.parse().map_err(|_| usage(format!("invalid value for {key}: '{v}'")))
}

/// Flags over config over defaults.
pub fn resolve_settings(a: &CommonArgs) -> Result<Settings, UsageError> {
    let cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| usage(format!("cannot read config {}: {e}", p.display())))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };
    let pick = |flag: Option<String>, key: &str| flag.or_else(|| cfg.get(key).cloned());
    let mut set = Settings::default();
    if let Some(v) = pick(a.seed.map(|x| x.to_string()), "seed") {
        set.seed = parse_num("seed", &v)?;
    }
    if let Some(v) = pick(a.digits.map(|x| x.to_string()), "digits") {
        set.digits = parse_num("digits", &v)?;
        if set.digits < 15 {
            return Err(usage("digits must be at least 15"));
        }
    }
    if let Some(v) = pick(a.trials.map(|x| x.to_string()), "trials") {
        set.trials = parse_num("trials", &v)?;
        if set.trials == 0 {
            return Err(usage("trials must be positive"));
        }
    }
    if let Some(v) = pick(a.mode.clone(), "mode") {
        set.mode = v.parse::<VerifyMode>().map_err(usage)?;
    }
    if let Some(v) = pick(a.s.clone(), "s") {
        set.s = parse_triple(&v)?;
    }
    if let Some(v) = pick(a.branch.clone(), "branch") {
        set.branch = v.parse::<Branch>().map_err(usage)?;
    }
    if let Some(v) = pick(a.tol.map(|x| x.to_string()), "tol") {
        set.tol = parse_num("tol", &v)?;
        if !(set.tol > 0.0) {
            return Err(usage("tol must be positive"));
        }
    }
    if let Some(v) = pick(a.delta.clone(), "delta") {
        set.delta = parse_complex(&v)?;
    }
    Ok(set)
}

fn emit_reports(out: &mut dyn Write, reports: &[VerificationReport]) -> std::io::Result<i32> {
    for r in reports {
        writeln!(out, "{}", r.to_json_line())?;
    }
    Ok(if reports.iter().all(VerificationReport::passed) { EXIT_PASS } else { EXIT_FAIL })
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32, UsageError> {
    let set = resolve_settings(&cli.common)?;
    let io = |e: std::io::Error| usage(format!("write failed: {e}"));
    let reports = match cli.command {
        Command::Hamiltonian { index, emit } => {
            if index > 2 {
                return Err(usage(format!("--index must be 0, 1 or 2 (got {index})")));
            }
            let h = &hamiltonians()[index];
            match emit.as_str() {
                "canonical-text" => write!(out, "{}", h.to_ratfunc().to_canonical_text()).map_err(io)?,
                "json" => {
                    let v = serde_json::json!({
                        "index": index,
                        "numerator_terms": h.expr().num().len(),
                        "numerator_degree": h.expr().num().total_degree(),
                        "denominator_exponents": h.expr().den_exponents(),
                        "numerator": h.expr().num().to_string(),
                    });
                    writeln!(out, "{v}").map_err(io)?;
                }
                other => return Err(usage(format!("unknown --emit '{other}' (canonical-text or json)"))),
            }
            return Ok(EXIT_PASS);
        }
        Command::CheckCompatibility { i, j } => match (i, j) {
            (Some(i), Some(j)) => vec![checks::compatibility(i, j, &set)],
            (None, None) => [(0, 1), (0, 2), (1, 2)].iter().map(|&(i, j)| checks::compatibility(i, j, &set)).collect(),
            _ => return Err(usage("give both --i and --j, or neither")),
        },
        Command::VerifySolution => vec![checks::sigma_system(), checks::eta_equations(&set.s, &set)],
        Command::DeriveHamiltonians => checks::derived_hamiltonians(&set),
        Command::CheckApparent { q, t, p, perturb } => {
            let (dq, dp, dt) = checks::default_apparent_params();
            let q = q.map(|v| parse_triple(&v)).transpose()?.unwrap_or(dq);
            let t = t.map(|v| parse_triple(&v)).transpose()?.unwrap_or(dt);
            let p = p.map(|v| parse_triple(&v)).transpose()?.unwrap_or(dp);
            let mut v = checks::apparent(q.clone(), p.clone(), t.clone(), false);
            if perturb {
                v.extend(checks::apparent(q, p, t, true));
            }
            v
        }
        Command::VerifyPullback { symbolic } => {
            if symbolic {
                vec![checks::pullback_symbolic()]
            } else {
                vec![checks::pullback_exact(&set.s, set.branch)]
            }
        }
        Command::Tau { emit } => match emit.to_ascii_lowercase().as_str() {
            "report" => checks::tau(),
            "f" => {
                let f = match potential_and_tau() {
                    Ok((f, _)) => f,
                    Err(e) => return emit_reports(out, &[VerificationReport::precondition("tau", checks::ANCHOR_TAU, &e.to_string())]).map_err(io),
                };
                writeln!(out, "{}", serde_json::json!({"potential": f.to_string(), "printed_potential": displayed_potential().to_string(), "tau": format!("c*exp({f})")})).map_err(io)?;
                return Ok(EXIT_PASS);
            }
            "varpi" => {
                let w = match build_varpi() {
                    Ok(w) => w,
                    Err(e) => return emit_reports(out, &[VerificationReport::precondition("tau", checks::ANCHOR_TAU, &e.to_string())]).map_err(io),
                };
                let c: Vec<String> = w.coeffs().iter().map(ToString::to_string).collect();
                writeln!(out, "{}", serde_json::json!({"ds0": c[0], "ds1": c[1], "ds2": c[2]})).map_err(io)?;
                return Ok(EXIT_PASS);
            }
            other => return Err(usage(format!("unknown --emit '{other}' (F, varpi or report)"))),
        },
        Command::Flow { direction, start_from_s, emit } => {
            if direction > 2 {
                return Err(usage(format!("--direction must be 0, 1 or 2 (got {direction})")));
            }
            let s = start_from_s.map(|v| parse_triple(&v)).transpose()?.unwrap_or_else(|| set.s.clone());
            match emit.as_str() {
                "report" => vec![checks::flow_locus(direction, &s, &set)],
                "trajectory" => {
                    let (rep, traj) = checks::flow_locus_with_trajectory(direction, &s, &set);
                    for line in traj.iter().flat_map(|t| t.json_lines(set.digits as usize)) {
                        writeln!(out, "{line}").map_err(io)?;
                    }
                    vec![rep]
                }
                other => return Err(usage(format!("unknown --emit '{other}' (report or trajectory)"))),
            }
        }
        Command::VerifyAll => checks::verify_all(&set),
    };
    emit_reports(out, &reports).map_err(io)
}

/// Parses `args` (including the program name) and runs the command, writing reports to `out`
/// and usage problems to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}\n\nUsage: garnier [OPTIONS] <COMMAND>\nRun 'garnier --help' for details.");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_forms() {
        assert_eq!(parse_complex("0.1").unwrap(), (0.1, 0.0));
        assert_eq!(parse_complex("0.1,-0.2").unwrap(), (0.1, -0.2));
        assert_eq!(parse_complex("0.1-0.2i").unwrap(), (0.1, -0.2));
        assert_eq!(parse_complex("1e-2+3e-1i").unwrap(), (0.01, 0.3));
        assert_eq!(parse_complex("-i").unwrap(), (0.0, -1.0));
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn config_keys() {
        let c = parse_config("# defaults\nseed = 7\ns=1,2,3\n").unwrap();
        assert_eq!(c["seed"], "7");
        assert!(parse_config("colour=red").is_err());
        assert!(parse_config("seed").is_err());
    }

    #[test]
    fn triples() {
        let t = parse_triple("1,-1/2,0.25").unwrap();
        assert_eq!(t[1], ExactScalar::ratio(-1, 2));
        assert!(parse_triple("1,2").is_err());
    }
}
