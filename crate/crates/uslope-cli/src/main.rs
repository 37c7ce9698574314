//! `uslope` — exact 2-adic spectral computations from the command line.
//!
//! Subcommands cover standard series generation (`series`), closed-form
//! operator matrices (`matrix`), exact characteristic polynomials
//! (`charpoly`), Newton-polygon slope tables (`slopes`), weight-parameter
//! classification (`classify`), kernel witnesses (`kernel`) and the
//! verification suites (`verify`). All numeric output is exact: rationals
//! and scalars are printed as strings, never as floating point.
//!
//! Exit codes: `0` success, `1` verification failure, `2` usage error,
//! `3` precondition violation (the violated inequality is named).

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use uslope::error::Error;
use uslope::kernel::{classify, kernel_witness};
use uslope::opmatrices::{closed_matrix, Kind};
use uslope::qseries::{self, QSeries};
use uslope::scalar::{parse_rat, rat_string, Rat, Scalar};
use uslope::spectral::{charpoly, slope_table};
use uslope::verify::{run_suite_with, SuiteOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Parser)]
#[command(name = "uslope", version, about = "Exact 2-adic spectral computations")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a standard q-series to a given precision.
    Series {
        /// One of: f, g, h, delta, e2, h_eighth, h_third, hpow.
        #[arg(long)]
        name: String,
        /// Number of q-coefficients.
        #[arg(long)]
        prec: usize,
        /// Exponent for `hpow` (scalar literal like "1/3" or "1/4*sqrt2").
        #[arg(long, allow_hyphen_values = true)]
        s: Option<String>,
    },
    /// Print a closed-form operator matrix truncation.
    Matrix {
        #[arg(long)]
        kind: String,
        /// Weight parameter, e.g. "0", "-1", "1/4*sqrt2".
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        /// Radius, a rational literal.
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        r: String,
        #[arg(long)]
        size: usize,
    },
    /// Exact characteristic polynomial of the size-N truncation.
    Charpoly {
        #[arg(long)]
        kind: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        r: String,
        #[arg(long)]
        size: usize,
    },
    /// Newton-polygon slope table with N vs 2N stability flags.
    Slopes {
        #[arg(long)]
        kind: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long)]
        size: usize,
        /// Only slopes below this bound are tabulated.
        #[arg(long, allow_hyphen_values = true)]
        bound: String,
    },
    /// Classify a weight parameter and report its critical radius.
    Classify {
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// Exact kernel witness of Id + W_N with its valuation-decay scan.
    Kernel {
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long)]
        size: usize,
        /// Comparison radius below the critical one.
        #[arg(long = "r-alt", default_value = "1/12")]
        r_alt: String,
        /// W or Wprime.
        #[arg(long, default_value = "W")]
        kind: String,
    },
    /// Run a verification suite and print its ledger.
    Verify {
        /// identities, matrices, combinatorial, valuations, spectral,
        /// kernel, or all.
        #[arg(long)]
        suite: String,
        /// Override the series-precision scale of the suite.
        #[arg(long)]
        prec: Option<usize>,
        /// Override the sweep-size scale of the suite.
        #[arg(long)]
        size: Option<usize>,
    },
}

fn parse_scalar(t: &str) -> Result<Scalar, Error> {
    t.parse()
}

fn parse_radius(t: &str) -> Result<Rat, Error> {
    parse_rat(t)
}

fn parse_kind(t: &str) -> Result<Kind, Error> {
    t.parse()
}

/// Render a q-series without the trailing O-term.
fn series_text(x: &QSeries) -> String {
    let s = x.to_string();
    match s.rfind(" + O(") {
        Some(k) => s[..k].to_string(),
        None => s,
    }
}

fn run(cli: &Cli) -> Result<(String, bool), Error> {
    match &cli.cmd {
        Cmd::Series { name, prec, s } => {
            let x = match name.as_str() {
                "f" => qseries::f_form(*prec),
                "g" => qseries::g_form(*prec),
                "h" => qseries::h_form(*prec),
                "delta" => qseries::delta(*prec),
                "e2" => qseries::e2_form(*prec),
                "h_eighth" => qseries::h_eighth(*prec),
                "h_third" => qseries::h_third(*prec),
                "hpow" => {
                    let s = s.as_deref().ok_or_else(|| {
                        Error::invalid("`series --name hpow` requires --s")
                    })?;
                    qseries::h_pow(&parse_scalar(s)?, *prec)?
                }
                other => {
                    return Err(Error::invalid(format!(
                        "unknown series `{other}` (expected f, g, h, delta, e2, \
                         h_eighth, h_third, or hpow)"
                    )))
                }
            };
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&x).expect("series json"),
                Format::Text => series_text(&x),
                Format::Csv => {
                    let mut out = String::from("n,coeff\n");
                    for (n, c) in x.coeffs().iter().enumerate() {
                        out.push_str(&format!("{n},{c}\n"));
                    }
                    out
                }
            };
            Ok((out, true))
        }
        Cmd::Matrix { kind, s, r, size } => {
            let m = closed_matrix(parse_kind(kind)?, &parse_scalar(s)?, &parse_radius(r)?, *size)?;
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&m).expect("matrix json"),
                Format::Text | Format::Csv => {
                    let mut out = String::from("i,j,coef,exp2\n");
                    for i in 0..*size {
                        for j in 0..*size {
                            let e = m.entry(i, j);
                            if !e.is_zero() {
                                out.push_str(&format!(
                                    "{i},{j},{},{}\n",
                                    e.coef,
                                    rat_string(&e.exp2)
                                ));
                            }
                        }
                    }
                    out
                }
            };
            Ok((out, true))
        }
        Cmd::Charpoly { kind, s, r, size } => {
            let p = charpoly(parse_kind(kind)?, &parse_scalar(s)?, *size, &parse_radius(r)?)?;
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&p).expect("charpoly json"),
                Format::Text => {
                    let terms: Vec<String> = p
                        .coeffs
                        .iter()
                        .enumerate()
                        .filter(|(_, c)| !c.is_zero())
                        .map(|(k, c)| match k {
                            0 => format!("{c}"),
                            1 => format!("({c})*T"),
                            _ => format!("({c})*T^{k}"),
                        })
                        .collect();
                    terms.join(" + ")
                }
                Format::Csv => {
                    let mut out = String::from("k,coeff\n");
                    for (k, c) in p.coeffs.iter().enumerate() {
                        out.push_str(&format!("{k},{c}\n"));
                    }
                    out
                }
            };
            Ok((out, true))
        }
        Cmd::Slopes { kind, s, size, bound } => {
            let t = slope_table(
                parse_kind(kind)?,
                &parse_scalar(s)?,
                *size,
                &parse_radius(bound)?,
            )?;
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&t).expect("slopes json"),
                Format::Csv => t.csv(),
                Format::Text => {
                    let mut out = String::new();
                    for row in &t.rows {
                        out.push_str(&format!(
                            "slope {} multiplicity {} {}\n",
                            rat_string(&row.slope),
                            row.multiplicity,
                            if row.stable { "stable" } else { "UNSTABLE" }
                        ));
                    }
                    out
                }
            };
            Ok((out, true))
        }
        Cmd::Classify { s } => {
            let c = classify(&parse_scalar(s)?)?;
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&c).expect("classify json"),
                Format::Text | Format::Csv => {
                    let mut out = format!("case {}", c.tag);
                    if let Some(r) = &c.r_critical {
                        out.push_str(&format!("; r_critical {}", rat_string(r)));
                    }
                    if let Some(sh) = &c.s_shift {
                        out.push_str(&format!(
                            "; excluded from the analysis — use the weight-2 twist \
                             (kinds Uprime/Wprime) at the shifted parameter s'' = {sh}"
                        ));
                    }
                    out
                }
            };
            Ok((out, true))
        }
        Cmd::Kernel { s, size, r_alt, kind } => {
            let w = kernel_witness(
                parse_kind(kind)?,
                &parse_scalar(s)?,
                *size,
                &parse_radius(r_alt)?,
            )?;
            let out = match cli.format {
                Format::Json => serde_json::to_string_pretty(&w).expect("kernel json"),
                Format::Text | Format::Csv => {
                    let mut out = format!(
                        "rows_verified {}; r_critical {}; sigma spread {}; sigma' increasing {}\n",
                        w.rows_verified,
                        rat_string(&w.r_critical),
                        w.sigma_spread.as_ref().map(rat_string).unwrap_or_else(|| "-".into()),
                        w.sigma_prime_increasing
                    );
                    out.push_str("i,v_b,sigma,sigma_prime\n");
                    for row in &w.sigma_rows {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            row.i, row.v_b, row.sigma, row.sigma_prime
                        ));
                    }
                    out
                }
            };
            Ok((out, true))
        }
        Cmd::Verify { suite, prec, size } => {
            let opts = SuiteOptions { prec: *prec, size: *size };
            let ledger = run_suite_with(suite, &opts)?;
            let out = match cli.format {
                Format::Json => ledger.to_json(),
                Format::Text | Format::Csv => ledger.to_text(),
            };
            Ok((out, ledger.ok()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((out, ok)) => {
            println!("{out}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Precondition(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
