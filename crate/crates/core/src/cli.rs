//! Command line: argument parsing, dispatch, text and JSON rendering.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use crate::arith::gcd;
use crate::cyclo::CycloNum;
use crate::digamma::{
    morita_gamma_zp, verify_diamond, verify_gauss, verify_logsym, GammaConvention,
};
use crate::error::{Error, Result};
use crate::independence::{
    check_property_ii, concordance, oracle_rank, unit_system, unit_system_criterion,
    verify_p4_with, Clause3Reading, IndependenceReport,
};
use crate::linear_form::{digamma_value, nonvanishing_check, verify_reduction};
use crate::padic::PadicApprox;
use crate::suite::{run_criterion, CriterionOutcome, CRITERIA};

pub const SCHEMA: u32 = 1;
pub const THREADS_ENV: &str = "PADIC_LAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "padic-lab",
    version,
    about = "p-adic digamma values, cyclotomic identities and independence criteria"
)]
pub struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Product range for Morita's gamma.
    #[arg(long, global = true, value_enum, default_value_t = Convention::Inclusive)]
    pub gamma_convention: Convention,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Inclusive,
    Classical,
}

impl From<Convention> for GammaConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Inclusive => GammaConvention::Inclusive,
            Convention::Classical => GammaConvention::Classical,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Reading {
    Verbatim,
    Mixed,
}

impl From<Reading> for Clause3Reading {
    fn from(r: Reading) -> Self {
        match r {
            Reading::Verbatim => Clause3Reading::Verbatim,
            Reading::Mixed => Clause3Reading::Mixed,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Digamma-type value at r/f plus the Euler constant, by the route the valuation of r/f selects.
    Psi {
        #[arg(short)]
        p: u64,
        #[arg(short)]
        r: i64,
        #[arg(short)]
        f: u64,
        #[arg(short = 'N', default_value_t = 6)]
        n: i64,
    },
    /// Morita's gamma at a rational p-adic integer.
    Gamma {
        #[arg(short)]
        p: u64,
        /// Integer or fraction a/b.
        #[arg(short)]
        x: String,
        #[arg(short = 'N', default_value_t = 6)]
        n: u32,
    },
    /// Run one family of identity checks.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Independence criteria for a conductor, a range of conductors, or a set.
    Criteria(CriteriaArgs),
    /// Acceptance criteria (all when no number is given).
    Acceptance {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=9))]
        criterion: Option<u8>,
    },
}

#[derive(Args, Debug)]
pub struct CriteriaArgs {
    /// Composite conductor, or a single property-I candidate.
    pub q: Option<u64>,
    /// Comma-separated set checked for property II.
    #[arg(long, value_delimiter = ',')]
    pub set: Option<Vec<u64>>,
    /// Every composite conductor up to this bound, against the rank oracle.
    #[arg(long)]
    pub upto: Option<u64>,
    /// Append the rank oracle on the unit system.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, default_value_t = 40)]
    pub digits: u32,
    #[arg(long, value_enum, default_value_t = Reading::Verbatim)]
    pub reading: Reading,
}

#[derive(Subcommand, Debug)]
pub enum Suite {
    /// Digamma side against the cyclotomic log sum.
    Gauss {
        #[arg(short)]
        p: u64,
        #[arg(short)]
        f: u64,
        #[arg(short)]
        r: Option<i64>,
        #[arg(long)]
        all_r: bool,
        #[arg(short = 'N', default_value_t = 6)]
        n: i64,
    },
    /// q·γ_p(r, q) against γ_p minus the cyclotomic log sum.
    Diamond {
        #[arg(short)]
        p: u64,
        #[arg(short)]
        q: u64,
        #[arg(short)]
        r: Option<u64>,
        #[arg(long)]
        all_r: bool,
        #[arg(short = 'N', default_value_t = 5)]
        n: i64,
    },
    /// log(1 − ζ^{−t}) against log(1 − ζ^t).
    Logsym {
        #[arg(short)]
        p: u64,
        #[arg(short)]
        f: u64,
        #[arg(short = 'N', default_value_t = 8)]
        n: i64,
    },
    /// Difference of two values against its linear form, given as r/f pairs.
    Reduction {
        #[arg(short)]
        p: u64,
        /// Given twice.
        #[arg(long, value_parser = parse_pair, required = true)]
        pair: Vec<(i64, u64)>,
        #[arg(short = 'N', default_value_t = 5)]
        n: i64,
    },
    /// Both oracles on the list attached to a property-II set.
    P4 {
        #[arg(short = 'M', value_delimiter = ',', required = true)]
        m: Vec<u64>,
        #[arg(short = 'B', default_value_t = 3)]
        b: i64,
        #[arg(long, default_value_t = 40)]
        digits: u32,
        /// Append a copy of the first unit ratio.
        #[arg(long)]
        duplicate: bool,
    },
}

fn parse_pair(s: &str) -> std::result::Result<(i64, u64), String> {
    let (r, f) = s.split_once('/').ok_or("expected r/f")?;
    Ok((
        r.trim().parse().map_err(|e| format!("{e}"))?,
        f.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

/// What a command produced: text lines, the JSON body, and whether every check passed.
pub struct Output {
    pub text: Vec<String>,
    pub json: Value,
    pub pass: bool,
}

fn all_r(flag: bool, r: Option<i64>, lo: i64, hi: i64) -> Result<Vec<i64>> {
    match (flag, r) {
        (true, _) => Ok((lo..hi).collect()),
        (false, Some(r)) => Ok(vec![r]),
        (false, None) => Err(Error::Precondition("give -r or --all-r".into())),
    }
}

fn batch<T: serde::Serialize>(items: Vec<(String, bool, T)>) -> Output {
    let pass = items.iter().all(|(_, ok, _)| *ok);
    Output {
        text: items.iter().map(|(l, _, _)| l.clone()).collect(),
        json: Value::Array(
            items
                .iter()
                .map(|(_, _, v)| serde_json::to_value(v).unwrap())
                .collect(),
        ),
        pass,
    }
}

fn independence_text(r: &IndependenceReport) -> Vec<String> {
    let mut out = vec![r.line()];
    if let Some(c) = &r.cross_check {
        out.push(c.line());
    }
    if let Some(n) = &r.note {
        out.push(format!("note: {n}"));
    }
    out
}

pub fn execute(cli: &Cli) -> Result<Output> {
    match &cli.command {
        Command::Psi { p, r, f, n } => {
            if *r < 1 || *r as u64 >= *f || gcd(*r as u64, *f) != 1 {
                return Err(Error::Precondition(format!(
                    "need 1 <= r < f and gcd(r, f) = 1, got r={r}, f={f}"
                )));
            }
            let (v, route) = digamma_value(*p, *r, *f, *n)?;
            Ok(Output {
                text: vec![format!("psi_p({r}/{f}) + gamma_p [{route}] = {v}")],
                json: json!({"p": p, "r": r, "f": f, "N": n, "route": route, "value": v}),
                pass: true,
            })
        }
        Command::Gamma { p, x, n } => {
            let (a, b) = match x.split_once('/') {
                Some((a, b)) => (a.trim().to_string(), b.trim().to_string()),
                None => (x.trim().to_string(), "1".into()),
            };
            let parse = |s: &str| {
                s.parse::<BigInt>()
                    .map_err(|e| Error::Precondition(format!("bad number {s}: {e}")))
            };
            let xv = PadicApprox::from_rational(&parse(&a)?, &parse(&b)?, *p, n + 8)?;
            let g = morita_gamma_zp(*p, &xv, *n, cli.gamma_convention.into())?;
            Ok(Output {
                text: vec![format!(
                    "Gamma_{p}({x}) = {} (stable from p^{})",
                    g.value, g.k_used
                )],
                json: json!({"p": p, "x": x, "N": n, "convention": GammaConvention::from(cli.gamma_convention), "value": g.value, "k_used": g.k_used}),
                pass: true,
            })
        }
        Command::Verify { suite } => verify(suite),
        Command::Criteria(args) => criteria(args),
        Command::Acceptance { criterion } => {
            let ids: Vec<u8> = match criterion {
                Some(k) => vec![*k],
                None => (1..=CRITERIA).collect(),
            };
            let mut outcomes = Vec::new();
            for k in ids {
                outcomes.push(if k == 9 {
                    determinism(
                        &std::env::current_exe().map_err(|e| Error::Domain(e.to_string()))?,
                    )?
                } else {
                    run_criterion(k)?
                });
            }
            let items = outcomes
                .into_iter()
                .map(|o| (o.line(), o.pass, o))
                .collect();
            Ok(batch::<CriterionOutcome>(items))
        }
    }
}

fn verify(suite: &Suite) -> Result<Output> {
    match suite {
        Suite::Gauss {
            p,
            f,
            r,
            all_r: all,
            n,
        } => {
            let rs: Vec<i64> = all_r(*all, *r, 1, *f as i64)?
                .into_iter()
                .filter(|&r| gcd(r as u64, *f) == 1)
                .collect();
            let items = rs
                .into_iter()
                .map(|r| verify_gauss(*p, r, *f, *n).map(|rep| (rep.line(), rep.pass, rep)))
                .collect::<Result<Vec<_>>>()?;
            Ok(batch(items))
        }
        Suite::Diamond {
            p,
            q,
            r,
            all_r: all,
            n,
        } => {
            let rs = all_r(*all, r.map(|x| x as i64), 0, *q as i64)?;
            let items = rs
                .into_iter()
                .map(|r| {
                    verify_diamond(*p, r as u64, *q, *n).map(|rep| (rep.line(), rep.pass, rep))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(batch(items))
        }
        Suite::Logsym { p, f, n } => {
            let rep = verify_logsym(*p, *f, *n)?;
            Ok(batch(vec![(rep.line(), rep.pass, rep)]))
        }
        Suite::Reduction { p, pair, n } => {
            if pair.len() != 2 {
                return Err(Error::Precondition(format!(
                    "need exactly two --pair values, got {}",
                    pair.len()
                )));
            }
            let rep = verify_reduction(*p, pair[0], pair[1], *n)?;
            let nv = nonvanishing_check(&rep.form);
            let text = vec![
                rep.line(),
                format!("form: {}", rep.form),
                format!(
                    "unit-ratio coefficients not all zero: {}",
                    nv.unit_ratio_not_all_zero
                ),
            ];
            Ok(Output {
                text,
                json: json!({"reduction": rep, "nonvanishing": nv}),
                pass: rep.check.pass,
            })
        }
        Suite::P4 {
            m,
            b,
            digits,
            duplicate,
        } => {
            let extra = if *duplicate {
                let first = m[0];
                let a = (2..first).find(|&a| gcd(a, first) == 1).unwrap_or(2);
                vec![(
                    format!("duplicate (1-z{first}^{a})/(1-z{first})"),
                    CycloNum::unit_ratio(first, a),
                )]
            } else {
                Vec::new()
            };
            let rep = verify_p4_with(m, &extra, *b, *digits)?;
            Ok(Output {
                text: independence_text(&rep),
                pass: rep.verdict == crate::independence::Verdict::Independent,
                json: serde_json::to_value(&rep).unwrap(),
            })
        }
    }
}

fn criteria(args: &CriteriaArgs) -> Result<Output> {
    let reading: Clause3Reading = args.reading.into();
    if let Some(set) = &args.set {
        let rep = check_property_ii(set);
        let mut text = vec![rep.line()];
        text.extend(rep.evidence.iter().map(|e| {
            format!(
                "  {} mod {}: order {} of {} -> {:?}",
                e.base, e.modulus, e.order, e.phi, e.classification
            )
        }));
        return Ok(Output {
            text,
            pass: rep.verdict,
            json: serde_json::to_value(&rep).unwrap(),
        });
    }
    if let Some(upto) = args.upto {
        let rows = concordance(upto, args.digits, reading)?;
        let text = rows
            .iter()
            .map(|r| {
                format!(
                    "q={:>3} criterion {:<5} [{}] oracle {:?}{}",
                    r.q,
                    r.criterion,
                    r.case_tag,
                    r.oracle,
                    if r.agree { "" } else { "  DISAGREE" }
                )
            })
            .collect();
        return Ok(Output {
            text,
            pass: rows.iter().all(|r| r.agree),
            json: serde_json::to_value(&rows).unwrap(),
        });
    }
    let q = args
        .q
        .ok_or_else(|| Error::Precondition("give q, --set or --upto".into()))?;
    let rep = unit_system_criterion(q, reading)?;
    let mut text = vec![rep.line()];
    text.extend(rep.evidence.iter().map(|e| {
        format!(
            "  {} mod {}: order {} of {} -> {:?}",
            e.base, e.modulus, e.order, e.phi, e.classification
        )
    }));
    let mut json = json!({"criterion": rep});
    if args.oracle {
        let nums: Vec<CycloNum> = unit_system(q).into_iter().map(|(_, x)| x).collect();
        let orc = oracle_rank(&nums, args.digits)?;
        text.extend(independence_text(&orc));
        json["oracle"] = serde_json::to_value(&orc).unwrap();
    }
    Ok(Output {
        text,
        pass: rep.verdict,
        json,
    })
}

/// Runs every in-process criterion under one worker and under several, in
/// fresh processes, and compares the JSON byte for byte.
pub fn determinism(exe: &Path) -> Result<CriterionOutcome> {
    let run = |k: u8, threads: &str| -> Result<Vec<u8>> {
        let out = Process::new(exe)
            .args(["--json", "acceptance", &k.to_string()])
            .env(THREADS_ENV, threads)
            .output()
            .map_err(|e| Error::Domain(format!("cannot run {}: {e}", exe.display())))?;
        Ok(out.stdout)
    };
    let mut checks = Vec::new();
    let mut same = 0;
    for k in 1..CRITERIA {
        let one = run(k, "1")?;
        let many = run(k, "4")?;
        let ok = one == many && !one.is_empty();
        same += usize::from(ok);
        checks.push(json!({"criterion": k, "bytes": one.len(), "identical": ok}));
    }
    Ok(CriterionOutcome {
        id: 9,
        title: "identical JSON with 1 and 4 worker threads".into(),
        pass: same == (CRITERIA - 1) as usize,
        summary: format!("{same} of {} criteria byte-identical", CRITERIA - 1),
        checks,
    })
}

/// Installs the worker count from the environment, if set.
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Precondition(_)
        | Error::Domain(_)
        | Error::NotPrime(_)
        | Error::UnsupportedConductor(_)
        | Error::PrecisionOverflow(_)
        | Error::SearchCap(_)
        | Error::PrimeMismatch(..) => 2,
        _ => 1,
    }
}

/// Parses, runs, prints; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    configure_threads();
    let name = match &cli.command {
        Command::Psi { .. } => "psi",
        Command::Gamma { .. } => "gamma",
        Command::Verify { suite } => match suite {
            Suite::Gauss { .. } => "verify gauss",
            Suite::Diamond { .. } => "verify diamond",
            Suite::Logsym { .. } => "verify logsym",
            Suite::Reduction { .. } => "verify reduction",
            Suite::P4 { .. } => "verify p4",
        },
        Command::Criteria(_) => "criteria",
        Command::Acceptance { .. } => "acceptance",
    };
    match execute(&cli) {
        Ok(out) => {
            let doc =
                json!({"schema": SCHEMA, "command": name, "pass": out.pass, "result": out.json});
            let rendered = serde_json::to_string_pretty(&doc).unwrap();
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, format!("{rendered}\n")) {
                    eprintln!("cannot write {}: {e}", path.display());
                    return 2;
                }
            }
            // A closed pipe downstream is not an error worth a panic.
            let mut stdout = std::io::stdout().lock();
            if cli.json {
                let _ = writeln!(stdout, "{rendered}");
            } else {
                for line in &out.text {
                    if writeln!(stdout, "{line}").is_err() {
                        break;
                    }
                }
            }
            if out.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            if cli.json {
                let doc = json!({"schema": SCHEMA, "command": name, "error": e.to_string()});
                println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            }
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
