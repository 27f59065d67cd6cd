//! Command-line front end: input parsing, subcommand dispatch and JSON
//! reports.
//!
//! Exit codes: `0` when the tested property holds or the requested object
//! exists, `1` when it does not, `2` on input or convergence errors. All
//! indices in the output are 1-based.

use std::fs;
use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::consistency::{check_assumption_a, check_cyclical_consistency, ConsistencyVerdict};
use crate::error::{input, Error, Result};
use crate::housing::{is_pareto, no_trade_prices, top_trading_cycles, verify_equilibrium, welfare_gap, ParetoVerdict};
use crate::indices::{full_report, SimplexWeights};
use crate::lp::LpTolerances;
use crate::model::{Allocation, CostMatrix, DemandDataset, RMatrix, SignTolerance};
use crate::rationalize::{
    afriat_efficiency_index, afriat_utility, find_certificate, rationalizable, verify_certificate, CertificateOutcome,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    DemandCsv,
    RJson,
    CostJson,
}

#[derive(Debug, Parser)]
#[command(name = "afriat", version, about = "Revealed-preference and housing-market audits")]
pub struct Cli {
    /// Input file; standard input when omitted or `-`.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Input format; inferred from the file extension and subcommand when omitted.
    #[arg(long, global = true, value_enum)]
    pub kind: Option<InputKind>,
    /// Sign tolerance τ: entries with |x| ≤ τ count as zero.
    #[arg(long, global = true, default_value_t = SignTolerance::DEFAULT)]
    pub tol: f64,
    /// Lower bound ε on the welfare weights used for A*.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Revealed-preference analyses.
    #[command(subcommand)]
    Rp(RpCommand),
    /// Housing-market analyses.
    #[command(subcommand)]
    Housing(HousingCommand),
}

#[derive(Debug, Subcommand)]
pub enum RpCommand {
    /// Cyclical consistency test with a witness cycle.
    Check,
    /// Afriat certificate (v, λ).
    Certify,
    /// Indices A*, A, B, G.
    Indices,
    /// Afriat efficiency index.
    AfriatIndex(AfriatIndexArgs),
    /// Evaluate the Afriat utility at a bundle.
    UtilityEval(UtilityArgs),
}

#[derive(Debug, Args)]
pub struct AfriatIndexArgs {
    /// Comma-separated positive b; defaults to expenditures for demand data
    /// or the `b` field of an R matrix file.
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct UtilityArgs {
    /// Comma-separated bundle quantities.
    #[arg(long, value_delimiter = ',', required = true)]
    pub bundle: Vec<f64>,
}

#[derive(Debug, Subcommand)]
pub enum HousingCommand {
    /// Pareto audit of an allocation (identity by default).
    Pareto {
        /// Comma-separated 1-based house of each individual.
        #[arg(long, value_delimiter = ',')]
        allocation: Option<Vec<usize>>,
    },
    /// No-trade equilibrium prices for the initial allocation.
    Prices,
    /// Top trading cycles from the initial allocation.
    Ttc,
    /// Weighted welfare gap of the initial allocation.
    WelfareGap {
        /// Comma-separated weights summing to one; uniform by default.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<f64>>,
    },
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

// ---------------------------------------------------------------- parsing

/// Demand CSV: header `id,p1,…,pL,x1,…,xL`, one row per observation.
pub fn parse_demand_csv(text: &str) -> Result<DemandDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Input(format!("header: {e}")))?
        .iter()
        .map(str::to_owned)
        .collect();
    if header.len() < 3 || header.len().is_multiple_of(2) || header[0] != "id" {
        return input("header must be id,p1,...,pL,x1,...,xL");
    }
    let goods = (header.len() - 1) / 2;
    for k in 0..goods {
        if header[1 + k] != format!("p{}", k + 1) || header[1 + goods + k] != format!("x{}", k + 1) {
            return input("header must be id,p1,...,pL,x1,...,xL");
        }
    }

    let mut prices = Vec::new();
    let mut bundles = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| Error::Input(format!("row {row}: {e}")))?;
        if record.len() != header.len() {
            return input(format!("row {row}: expected {} fields, found {}", header.len(), record.len()));
        }
        let mut values = Vec::with_capacity(2 * goods);
        for (c, field) in record.iter().enumerate().skip(1) {
            let v: f64 = field
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Input(format!("row {row}, column {}: cannot parse {field:?}", header[c])))?;
            if c <= goods && v <= 0.0 {
                return input(format!("row {row}, column {}: price must be positive", header[c]));
            }
            if c > goods && v < 0.0 {
                return input(format!("row {row}, column {}: quantity must be nonnegative", header[c]));
            }
            values.push(v);
        }
        bundles.push(values.split_off(goods));
        prices.push(values);
    }
    if prices.is_empty() {
        return input("no observations");
    }
    DemandDataset::new(prices, bundles)
}

pub fn demand_to_csv(ds: &DemandDataset) -> String {
    let goods = ds.goods();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["id".to_owned()];
    header.extend((1..=goods).map(|k| format!("p{k}")));
    header.extend((1..=goods).map(|k| format!("x{k}")));
    writer.write_record(&header).expect("in-memory write");
    for i in 0..ds.observations() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(ds.price(i).iter().chain(ds.bundle(i)).map(|v| v.to_string()));
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// A matrix file: `{"n": …, "R": [[…]]}` (optionally with `"b": […]`) or
/// `{"n": …, "c": [[…]]}`.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixInput {
    R { r: RMatrix, b: Option<Vec<f64>> },
    Cost(CostMatrix),
}

fn json_rows(doc: &Value, field: &str) -> Result<Vec<Vec<f64>>> {
    let n = doc
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Input("missing integer field \"n\"".into()))? as usize;
    let rows = doc
        .get(field)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Input(format!("missing array field \"{field}\"")))?;
    if rows.len() != n {
        return input(format!("\"{field}\" has {} rows, expected n = {n}", rows.len()));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row
                .as_array()
                .ok_or_else(|| Error::Input(format!("row {} is not an array", i + 1)))?;
            if row.len() != n {
                return input(format!("row {} has {} entries, expected n = {n}", i + 1, row.len()));
            }
            row.iter()
                .enumerate()
                .map(|(j, v)| {
                    v.as_f64()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::Input(format!("entry ({}, {}) is not a finite number", i + 1, j + 1)))
                })
                .collect()
        })
        .collect()
}

pub fn parse_matrix_json(text: &str, kind: InputKind, tol: SignTolerance) -> Result<MatrixInput> {
    let doc: Value = serde_json::from_str(text).map_err(|e| Error::Input(format!("invalid JSON: {e}")))?;
    match kind {
        InputKind::RJson => {
            let r = RMatrix::from_rows_snapped(json_rows(&doc, "R")?, tol)?;
            let b = match doc.get("b") {
                None | Some(Value::Null) => None,
                Some(v) => Some(
                    v.as_array()
                        .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
                        .ok_or_else(|| Error::Input("\"b\" must be an array of numbers".into()))?,
                ),
            };
            Ok(MatrixInput::R { r, b })
        }
        InputKind::CostJson => Ok(MatrixInput::Cost(CostMatrix::from_rows(json_rows(&doc, "c")?)?)),
        InputKind::DemandCsv => input("demand-csv is not a JSON matrix kind"),
    }
}

pub fn matrix_to_json(m: &MatrixInput) -> String {
    let doc = match m {
        MatrixInput::R { r, b } => {
            let mut doc = serde_json::json!({ "n": r.size(), "R": r.rows() });
            if let Some(b) = b {
                doc["b"] = serde_json::json!(b);
            }
            doc
        }
        MatrixInput::Cost(c) => serde_json::json!({ "n": c.size(), "c": c.rows() }),
    };
    doc.to_string()
}

// ---------------------------------------------------------------- output

/// Rounds to 12 significant digits and clears negative zero.
pub fn round12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    let v: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if v == 0.0 {
        0.0
    } else {
        v
    }
}

fn round_all(xs: &[f64]) -> Vec<f64> {
    xs.iter().copied().map(round12).collect()
}

#[derive(Serialize)]
struct CertificateJson {
    v: Vec<f64>,
    lambda: Vec<f64>,
}

#[derive(Serialize)]
struct VerdictJson {
    verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    cycle: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified: Option<bool>,
}

#[derive(Serialize)]
struct WitnessesJson {
    a_star_weights: Vec<f64>,
    a_weights: Vec<f64>,
    b_allocation: Vec<usize>,
    g_allocation: Vec<usize>,
    g_weights: Vec<f64>,
}

#[derive(Serialize)]
struct ReportJson {
    a_star: f64,
    a: f64,
    b: f64,
    g: f64,
    epsilon: f64,
    witnesses: WitnessesJson,
}

#[derive(Serialize)]
struct IndicesJson {
    rationalizable: bool,
    assumption_a: bool,
    report: ReportJson,
}

#[derive(Serialize)]
struct EfficiencyJson {
    e: f64,
    breakpoint: Option<[usize; 2]>,
    attained: bool,
}

#[derive(Serialize)]
struct UtilityJson {
    utility: f64,
    certificate: CertificateJson,
    verified: bool,
}

#[derive(Serialize)]
struct ParetoJson {
    verdict: &'static str,
    allocation: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cycle: Option<Vec<usize>>,
}

#[derive(Serialize)]
struct PricesJson {
    prices: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verified: Option<bool>,
}

#[derive(Serialize)]
struct AllocationJson {
    allocation: Vec<usize>,
    verified: bool,
}

#[derive(Serialize)]
struct GapJson {
    gap: f64,
    weights: Vec<f64>,
}

fn emit<T: Serialize>(code: i32, body: &T) -> Outcome {
    Outcome {
        code,
        stdout: serde_json::to_string(body).expect("report serializes") + "\n",
    }
}

// ---------------------------------------------------------------- dispatch

fn read_input(path: Option<&PathBuf>) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Error::Input(format!("stdin: {e}")))?;
            Ok(text)
        }
    }
}

fn infer_kind(cli: &Cli) -> InputKind {
    if let Some(kind) = cli.kind {
        return kind;
    }
    let csv = cli
        .input
        .as_ref()
        .and_then(|p| p.extension())
        .is_some_and(|ext| ext.eq_ignore_ascii_case("csv"));
    match (&cli.command, csv) {
        (_, true) => InputKind::DemandCsv,
        (Command::Rp(_), false) => InputKind::RJson,
        (Command::Housing(_), false) => InputKind::CostJson,
    }
}

enum Loaded {
    Demand(DemandDataset),
    Matrix(MatrixInput),
}

impl Loaded {
    fn r_matrix(&self) -> RMatrix {
        match self {
            Loaded::Demand(ds) => ds.r_matrix(),
            Loaded::Matrix(MatrixInput::R { r, .. }) => r.clone(),
            Loaded::Matrix(MatrixInput::Cost(c)) => c.r_matrix(),
        }
    }
}

fn load(text: &str, kind: InputKind, tol: SignTolerance) -> Result<Loaded> {
    match kind {
        InputKind::DemandCsv => parse_demand_csv(text).map(Loaded::Demand),
        _ => parse_matrix_json(text, kind, tol).map(Loaded::Matrix),
    }
}

fn violation(cycle: Vec<usize>) -> VerdictJson {
    VerdictJson {
        verdict: "violation",
        cycle: Some(cycle),
        certificate: None,
        verified: None,
    }
}

/// Runs a parsed command line against already-read input text.
pub fn execute(cli: &Cli, text: &str) -> Result<Outcome> {
    let tol = SignTolerance::new(cli.tol)?;
    let kind = infer_kind(cli);
    let loaded = load(text, kind, tol)?;
    if let Some(eps) = cli.eps {
        let n = loaded.r_matrix().size();
        if !(eps > 0.0 && eps <= 1.0 / n as f64) {
            return input(format!("--eps must lie in (0, 1/{n}], got {eps}"));
        }
    }
    match &cli.command {
        Command::Rp(cmd) => run_rp(cmd, &loaded, cli.eps, tol),
        Command::Housing(cmd) => {
            let Loaded::Matrix(MatrixInput::Cost(c)) = &loaded else {
                return input("housing commands need a cost matrix (--kind cost-json)");
            };
            run_housing(cmd, c, tol)
        }
    }
}

fn run_rp(cmd: &RpCommand, loaded: &Loaded, eps: Option<f64>, tol: SignTolerance) -> Result<Outcome> {
    let r = loaded.r_matrix();
    match cmd {
        RpCommand::Check => Ok(match check_cyclical_consistency(&r, tol) {
            ConsistencyVerdict::Consistent => emit(
                0,
                &VerdictJson {
                    verdict: "consistent",
                    cycle: None,
                    certificate: None,
                    verified: None,
                },
            ),
            ConsistencyVerdict::Violation(c) => emit(1, &violation(c.to_one_based())),
        }),
        RpCommand::Certify => Ok(match find_certificate(&r, tol)? {
            CertificateOutcome::Found(cert) => {
                let verified = verify_certificate(&r, &cert, tol);
                emit(
                    0,
                    &VerdictJson {
                        verdict: "consistent",
                        cycle: None,
                        certificate: Some(CertificateJson {
                            v: round_all(&cert.v),
                            lambda: round_all(&cert.lambda),
                        }),
                        verified: Some(verified),
                    },
                )
            }
            CertificateOutcome::Infeasible(c) => emit(1, &violation(c.to_one_based())),
        }),
        RpCommand::Indices => {
            let report = full_report(&r, eps, tol)?;
            let ok = rationalizable(&r, tol);
            let body = IndicesJson {
                rationalizable: ok,
                assumption_a: check_assumption_a(&r, tol),
                report: ReportJson {
                    a_star: round12(report.a_star),
                    a: round12(report.a),
                    b: round12(report.b),
                    g: round12(report.g),
                    epsilon: round12(report.epsilon),
                    witnesses: WitnessesJson {
                        a_star_weights: round_all(report.a_star_weights.as_slice()),
                        a_weights: round_all(report.a_weights.as_slice()),
                        b_allocation: report.b_allocation.to_one_based(),
                        g_allocation: report.g_allocation.to_one_based(),
                        g_weights: round_all(report.g_weights.as_slice()),
                    },
                },
            };
            Ok(emit(if ok { 0 } else { 1 }, &body))
        }
        RpCommand::AfriatIndex(args) => {
            let b = match (&args.b, loaded) {
                (Some(b), _) => b.clone(),
                (None, Loaded::Demand(ds)) => (0..ds.observations()).map(|i| ds.expenditure(i)).collect(),
                (None, Loaded::Matrix(MatrixInput::R { b: Some(b), .. })) => b.clone(),
                (None, _) => return input("afriat-index needs --b or demand data"),
            };
            let res = afriat_efficiency_index(&r, &b, tol)?;
            let body = EfficiencyJson {
                e: round12(res.e),
                breakpoint: res.breakpoint.map(|(i, j)| [i + 1, j + 1]),
                attained: res.attained,
            };
            Ok(emit(if res.e == 1.0 && res.attained { 0 } else { 1 }, &body))
        }
        RpCommand::UtilityEval(args) => {
            let Loaded::Demand(ds) = loaded else {
                return input("utility-eval needs demand data (--kind demand-csv)");
            };
            Ok(match find_certificate(&r, tol)? {
                CertificateOutcome::Found(cert) => {
                    let utility = afriat_utility(ds, &cert, &args.bundle)?;
                    emit(
                        0,
                        &UtilityJson {
                            utility: round12(utility),
                            verified: verify_certificate(&r, &cert, tol),
                            certificate: CertificateJson {
                                v: round_all(&cert.v),
                                lambda: round_all(&cert.lambda),
                            },
                        },
                    )
                }
                CertificateOutcome::Infeasible(c) => emit(1, &violation(c.to_one_based())),
            })
        }
    }
}

fn run_housing(cmd: &HousingCommand, c: &CostMatrix, tol: SignTolerance) -> Result<Outcome> {
    match cmd {
        HousingCommand::Pareto { allocation } => {
            let sigma = match allocation {
                Some(a) => Allocation::from_one_based(a)?,
                None => Allocation::identity(c.size()),
            };
            Ok(match is_pareto(c, &sigma, tol)? {
                ParetoVerdict::Efficient => emit(
                    0,
                    &ParetoJson {
                        verdict: "efficient",
                        allocation: sigma.to_one_based(),
                        cycle: None,
                    },
                ),
                ParetoVerdict::Blocked(cycle) => emit(
                    1,
                    &ParetoJson {
                        verdict: "blocked",
                        allocation: sigma.to_one_based(),
                        cycle: Some(cycle.to_one_based()),
                    },
                ),
            })
        }
        HousingCommand::Prices => Ok(match no_trade_prices(c, tol)? {
            Some(prices) => {
                let verified = verify_equilibrium(&c.r_matrix(), &prices, tol);
                emit(
                    0,
                    &PricesJson {
                        prices: Some(round_all(prices.as_slice())),
                        verified: Some(verified),
                    },
                )
            }
            None => emit(1, &PricesJson { prices: None, verified: None }),
        }),
        HousingCommand::Ttc => {
            let sigma = top_trading_cycles(c, tol);
            let verified = is_pareto(c, &sigma, tol)?.is_efficient();
            Ok(emit(
                0,
                &AllocationJson {
                    allocation: sigma.to_one_based(),
                    verified,
                },
            ))
        }
        HousingCommand::WelfareGap { weights } => {
            let w = match weights {
                Some(w) => SimplexWeights::new(w.clone())?,
                None => SimplexWeights::uniform(c.size()),
            };
            let gap = welfare_gap(c, Some(&w))?;
            let code = if gap <= LpTolerances::DEFAULT_FEAS { 0 } else { 1 };
            Ok(emit(
                code,
                &GapJson {
                    gap: round12(gap),
                    weights: round_all(w.as_slice()),
                },
            ))
        }
    }
}

/// Reads the input named on the command line and runs it. Errors become
/// exit code 2 with the message returned for standard error.
pub fn run(cli: &Cli) -> std::result::Result<Outcome, String> {
    let text = read_input(cli.input.as_ref()).map_err(|e| e.to_string())?;
    execute(cli, &text).map_err(|e| e.to_string())
}
