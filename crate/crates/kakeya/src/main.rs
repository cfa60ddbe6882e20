//! Command-line front end: certified series representations, sorted
//! partial-sum landscapes, achievement-set classification, cover
//! bounds, and the self-factorial special series.
//!
//! Exit codes: 0 success, 2 parse error, 3 out-of-range input,
//! 4 tolerance/digits unreachable, 5 enumeration cap exceeded.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kakeya::achievement::{classify, measure_limit_enclosure, Classification};
use kakeya::construct::{build_representation, verify_certificate, TargetRange};
use kakeya::cover::{
    cover_measure_bound, landscape, landscape_csv, measure_bound_report, LandscapeSpec,
    DEFAULT_ENUMERATION_CAP,
};
use kakeya::error::{BuildError, CoverError};
use kakeya::exec::ExecMode;
use kakeya::families;
use kakeya::rational::Rat;
use kakeya::series::{integral_term_check, special_series_enclosure, term_nf};

const EXIT_PARSE: u8 = 2;
const EXIT_RANGE: u8 = 3;
const EXIT_UNREACHABLE: u8 = 4;
const EXIT_CAP: u8 = 5;

/// Environment variable overriding the enumeration cap.
const CAP_ENV: &str = "KAKEYA_ENUM_CAP";

#[derive(Parser)]
#[command(name = "kakeya", about = "exact-rational series toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify a certified series representation of a target.
    Represent {
        #[arg(long)]
        target: String,
        #[arg(long)]
        theta: String,
        #[arg(long = "M")]
        m_bound: String,
        #[arg(long)]
        tol: String,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Enumerate assignments, sort their exact sums, emit a CSV.
    Landscape {
        #[arg(long)]
        length: usize,
        /// Per-index ranges "lo:hi,lo:hi,..."; a single pair is
        /// broadcast to the full length.
        #[arg(long)]
        ranges: String,
        #[arg(long, default_value_t = false)]
        monotone: bool,
        #[arg(long, default_value_t = 3000)]
        top: usize,
        #[arg(long)]
        out: std::path::PathBuf,
    },
    /// Classify the achievement set of a built-in series family.
    Classify {
        /// geometric(p/q) | triadic | fat-cantor | eg-stage(j)
        #[arg(long)]
        series: String,
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// Exact cover-measure bounds for the box [0, M] at cap N.
    Bounds {
        #[arg(long = "N")]
        n_cap: u64,
        #[arg(long = "M")]
        m_bound: u64,
    },
    /// Certified decimal enclosure of sum_n 1/((n+1)...(2n)).
    VerifySpecial {
        #[arg(long, default_value_t = 64)]
        terms: u64,
        #[arg(long, default_value_t = 24)]
        digits: usize,
    },
}

fn parse_rat(label: &str, text: &str) -> Result<Rat, u8> {
    text.parse::<Rat>().map_err(|e| {
        eprintln!("error: {label}: {e}");
        EXIT_PARSE
    })
}

fn enumeration_cap() -> u128 {
    std::env::var(CAP_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_ENUMERATION_CAP)
}

fn cmd_represent(
    target: &str,
    theta: &str,
    m_bound: &str,
    tol: &str,
    out: &std::path::Path,
) -> Result<(), u8> {
    let range = TargetRange::new(
        parse_rat("--theta", theta)?,
        parse_rat("--M", m_bound)?,
        parse_rat("--target", target)?,
    )
    .map_err(|e| {
        eprintln!("error: {e}");
        EXIT_RANGE
    })?;
    let tolerance = parse_rat("--tol", tol)?;
    let cert = build_representation(&range, &tolerance).map_err(|e| {
        eprintln!("error: {e}");
        match e {
            BuildError::ToleranceUnreachable { .. } | BuildError::NonPositiveTolerance => {
                EXIT_UNREACHABLE
            }
            BuildError::TargetOutOfRange { .. } | BuildError::InvalidRange => EXIT_RANGE,
            _ => 1,
        }
    })?;
    let (ok, violations) = verify_certificate(&cert);
    if !ok {
        for v in &violations {
            eprintln!("violation: {v}");
        }
        return Err(1);
    }
    std::fs::write(out, cert.to_json()).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", out.display());
        1
    })?;
    println!("stages={}", cert.stages.len());
    println!("partial={}", cert.partial.to_fraction_string());
    println!(
        "residual=[{},{}]",
        cert.residual.lo().to_fraction_string(),
        cert.residual.hi().to_fraction_string()
    );
    println!("width={}", cert.residual.width().decimal(30));
    println!("verified=true");
    Ok(())
}

fn parse_ranges(length: usize, text: &str) -> Result<Vec<(u64, u64)>, u8> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let (lo, hi) = part.split_once(':').ok_or_else(|| {
            eprintln!("error: --ranges entries must look like lo:hi");
            EXIT_PARSE
        })?;
        let parse = |s: &str| {
            s.trim().parse::<u64>().map_err(|_| {
                eprintln!("error: --ranges bound {s:?} is not an integer");
                EXIT_PARSE
            })
        };
        out.push((parse(lo)?, parse(hi)?));
    }
    if out.len() == 1 {
        out = vec![out[0]; length];
    }
    if out.len() != length {
        eprintln!(
            "error: --ranges lists {} pairs but --length is {length}",
            out.len()
        );
        return Err(EXIT_PARSE);
    }
    Ok(out)
}

fn cmd_landscape(
    length: usize,
    ranges: &str,
    monotone: bool,
    top: usize,
    out: &std::path::Path,
) -> Result<(), u8> {
    let spec = LandscapeSpec {
        ranges: parse_ranges(length, ranges)?,
        monotone,
        top_count: top,
    };
    let result = landscape(&spec, enumeration_cap(), ExecMode::default()).map_err(|e| {
        eprintln!("error: {e}");
        match e {
            CoverError::EnumerationCap { .. } => EXIT_CAP,
            _ => EXIT_PARSE,
        }
    })?;
    std::fs::write(out, landscape_csv(&result)).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", out.display());
        1
    })?;
    println!("total={}", result.total);
    println!("emitted={}", result.rows.len());
    Ok(())
}

fn parse_series(name: &str, depth: usize) -> Result<kakeya::achievement::ChoiceSeq, u8> {
    let unknown = || {
        eprintln!(
            "error: unknown series {name:?}; expected geometric(p/q), triadic, fat-cantor, or eg-stage(j)"
        );
        EXIT_PARSE
    };
    let prefix_len = depth + 2;
    if name == "triadic" {
        return Ok(families::triadic(prefix_len));
    }
    if name == "fat-cantor" {
        return Ok(families::fat_cantor(prefix_len));
    }
    if let Some(arg) = name.strip_prefix("geometric(").and_then(|s| s.strip_suffix(')')) {
        let ratio = arg.parse::<Rat>().map_err(|_| unknown())?;
        return families::geometric(ratio, prefix_len).map_err(|e| {
            eprintln!("error: {e}");
            EXIT_RANGE
        });
    }
    if let Some(arg) = name.strip_prefix("eg-stage(").and_then(|s| s.strip_suffix(')')) {
        let j = arg.parse::<u32>().map_err(|_| unknown())?;
        return families::eg_stage(j, prefix_len).map_err(|e| {
            eprintln!("error: {e}");
            EXIT_RANGE
        });
    }
    Err(unknown())
}

fn cmd_classify(series: &str, depth: usize) -> Result<(), u8> {
    let seq = parse_series(series, depth)?;
    println!("series={series}");
    match classify(&seq, depth) {
        Classification::SingleInterval(iv) => {
            println!(
                "classification=single-interval [{},{}]",
                iv.lo().to_fraction_string(),
                iv.hi().to_fraction_string()
            );
        }
        Classification::IntervalUnion { from_index } => {
            println!("classification=interval-union from={from_index}");
        }
        Classification::EmptyInterior { from_index } => {
            println!("classification=empty-interior from={from_index}");
            match measure_limit_enclosure(&seq, depth) {
                Ok(iv) => {
                    println!(
                        "measure_value_at_depth=[{},{}]",
                        iv.lo().to_fraction_string(),
                        iv.hi().to_fraction_string()
                    );
                    println!(
                        "measure_value_decimal=[{},{}]",
                        iv.lo().decimal(12),
                        iv.hi().decimal(12)
                    );
                }
                Err(e) => println!("measure_value_at_depth=unavailable ({e})"),
            }
        }
        Classification::Indeterminate => {
            println!("classification=indeterminate");
        }
    }
    Ok(())
}

fn cmd_bounds(n_cap: u64, m_bound: u64) -> Result<(), u8> {
    let bound = cover_measure_bound(n_cap, m_bound).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_RANGE
    })?;
    print!("{}", measure_bound_report(n_cap, m_bound, &bound));
    Ok(())
}

fn cmd_verify_special(terms: u64, digits: usize) -> Result<(), u8> {
    let enclosure = special_series_enclosure(terms).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_PARSE
    })?;
    let lo = enclosure.lo().decimal(digits);
    let hi = enclosure.hi().decimal(digits);
    if lo != hi {
        // Find how many terms certify the requested digits: the
        // remainder bound is 2 * term(T+1, T+1).
        let goal = Rat::new(1.into(), num_bigint::BigInt::from(10u32).pow(digits as u32 + 1));
        let mut t = terms;
        while Rat::from_int(2) * term_nf(t + 1, t + 1).unwrap() >= goal && t < terms + 10_000 {
            t += 1;
        }
        eprintln!("error: {digits} digits are not certified by {terms} terms; try --terms {t}");
        return Err(EXIT_UNREACHABLE);
    }
    println!(
        "enclosure=[{},{}]",
        enclosure.lo().to_fraction_string(),
        enclosure.hi().to_fraction_string()
    );
    println!("certified_digits={lo}");
    let checked = terms.min(30);
    for n in 1..=checked {
        let (lhs, rhs) = integral_term_check(n).map_err(|e| {
            eprintln!("error: {e}");
            EXIT_PARSE
        })?;
        if lhs != rhs {
            eprintln!("error: integral identity failed at n={n}");
            return Err(1);
        }
    }
    println!("integral_identity=ok(n<={checked})");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Represent {
            target,
            theta,
            m_bound,
            tol,
            out,
        } => cmd_represent(target, theta, m_bound, tol, out),
        Command::Landscape {
            length,
            ranges,
            monotone,
            top,
            out,
        } => cmd_landscape(*length, ranges, *monotone, *top, out),
        Command::Classify { series, depth } => cmd_classify(series, *depth),
        Command::Bounds { n_cap, m_bound } => cmd_bounds(*n_cap, *m_bound),
        Command::VerifySpecial { terms, digits } => cmd_verify_special(*terms, *digits),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
