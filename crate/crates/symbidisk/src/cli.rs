//! JSON-in/JSON-out command-line surface.
//!
//! Every subcommand reads one JSON document (from a file path argument,
//! inline JSON, or stdin) and prints one JSON document to stdout. Complex
//! scalars are `[re, im]` pairs and matrices are nested arrays of such
//! pairs throughout. Floating-point output is printed with 17 significant
//! digits so results round-trip bit-exactly.
//!
//! Exit codes: 0 on success (an infeasible interpolation problem is still
//! a success, reported in the `status` field), 1 on domain errors, 2 on
//! input or schema errors. Errors are reported as
//! `{"error":{"code":...,"message":...}}` with machine-readable codes.

use std::ffi::OsString;
use std::io::{self, Read, Write};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::detrep::{self, DetRep, KBlocks};
use crate::error::{Error, Result};
use crate::numkit::{cx, ComplexMatrix, Cx};
use crate::pick::{
    self, AglerCertificate, FeasOptions, FeasStatus, PickProblemG, SolveDiagnostics,
    SolveOptions, SymOrbit,
};
use crate::poly2::{self, Coords, Poly2, SigmaDirection};
use crate::realize::{self, AnyColligation};

#[derive(Parser)]
#[command(
    name = "symbidisk",
    version,
    about = "Transfer-function realizations, determinantal representations, and \
             Nevanlinna-Pick interpolation on the bidisk and symmetrized bidisk"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Numerical tolerance for the feasibility solver and certificates.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,

    /// Iteration cap for the feasibility solver.
    #[arg(long, global = true, default_value_t = 50_000)]
    max_iter: usize,

    /// Points per grid axis for sup-norm and root scans.
    #[arg(long, global = true, default_value_t = 41)]
    grid: usize,

    /// Seed for supplementary pseudo-random sampling.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Permit evaluation at closure points of the domain.
    #[arg(long, global = true)]
    allow_boundary: bool,
}

/// Each subcommand takes one input: a file path, inline JSON, or `-` /
/// nothing for stdin.
#[derive(Subcommand)]
enum Command {
    /// Evaluate a general or symmetric colligation at a bidisk point.
    EvalD2 { input: Option<String> },
    /// Evaluate a gamma colligation at a symmetrized-bidisk point.
    EvalG { input: Option<String> },
    /// Average a general colligation into a symmetric one.
    Symmetrize { input: Option<String> },
    /// Convert a symmetric colligation to gamma form.
    ToGamma { input: Option<String> },
    /// Convert a general colligation straight to gamma form.
    GeneralToGamma { input: Option<String> },
    /// Report the operator norm and dimensions of a colligation.
    CheckColligation { input: Option<String> },
    /// Sample the transfer-function sup norm over the domain grid.
    Supnorm { input: Option<String> },
    /// Build a determinantal representation from a block contraction.
    DetrepFromK { input: Option<String> },
    /// Compare a representation against a target polynomial.
    DetrepVerify { input: Option<String> },
    /// Divide the pencil of a representation by a scale R > 1.
    DetrepRescale { input: Option<String> },
    /// Convert a polynomial between zzeta, sp, and sigmae coordinates.
    PolyConvert { input: Option<String> },
    /// Expand the determinant polynomial of a representation.
    DetPoly { input: Option<String> },
    /// Lift a symmetrized-bidisk point to its bidisk root pair.
    PickLift { input: Option<String> },
    /// Build the Pick kernel matrices of an interpolation problem.
    PickKernels { input: Option<String> },
    /// Decide feasibility of the kernel identity by Dykstra projections.
    PickFeas { input: Option<String> },
    /// Check a candidate certificate against the kernel identity.
    PickCheck { input: Option<String> },
    /// Solve an interpolation problem on the symmetrized bidisk.
    PickSolve { input: Option<String> },
}

/// Run the CLI against `argv`, writing the JSON result to `out`.
/// Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(err) => {
            let (code, exit) = classify(&err);
            let payload = ErrorOut {
                error: ErrorBody {
                    code,
                    message: err.to_string(),
                },
            };
            let _ = emit(out, &payload);
            exit
        }
    }
}

#[derive(Serialize)]
struct ErrorOut {
    error: ErrorBody,
}

#[derive(Serialize)]
struct ErrorBody {
    code: &'static str,
    message: String,
}

/// Map an error to its machine-readable code and exit status.
fn classify(err: &Error) -> (&'static str, i32) {
    match err {
        Error::Stage { source, .. } => (classify(source).0, classify(source).1),
        Error::DimensionMismatch(_) | Error::NotSquare { .. } | Error::NonFinite { .. } => {
            ("dimension-mismatch", 2)
        }
        Error::WrongCoords { .. } => ("wrong-coords", 2),
        Error::BadGrid { .. } | Error::BadScale(_) => ("bad-parameter", 2),
        Error::InvalidInput(_) => ("invalid-input", 2),
        Error::OutsideDomain { .. } => ("outside-domain", 1),
        Error::EvalSingular { .. } | Error::SingularSystem => ("evaluation-singularity", 1),
        Error::NotPsd { .. } => ("not-psd", 1),
        Error::NotContraction { .. } => ("not-contractive", 1),
        Error::NotSymmetric { .. } => ("not-symmetric", 1),
        Error::ConflictingNode { .. } => ("conflicting-node", 1),
        Error::CertificateResidual { .. } => ("certificate-residual", 1),
    }
}

/// JSON formatter printing every float with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        write!(writer, "{value:.7e}")
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *out, SciFormatter);
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidInput(format!("serialization failed: {e}")))?;
    writeln!(out).map_err(|e| Error::InvalidInput(format!("write failed: {e}")))?;
    Ok(())
}

/// Fetch the input document: inline JSON if the argument starts with a
/// brace or bracket, stdin for `-` or no argument, a file path otherwise.
fn read_input(arg: &Option<String>) -> Result<String> {
    match arg.as_deref() {
        None | Some("-") => {
            let mut buf = String::new();
            io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| Error::InvalidInput(format!("cannot read stdin: {e}")))?;
            Ok(buf)
        }
        Some(s) if s.trim_start().starts_with(['{', '[']) => Ok(s.to_string()),
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidInput(format!("cannot read {path}: {e}"))),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| match e.classify() {
        serde_json::error::Category::Syntax | serde_json::error::Category::Eof => {
            Error::InvalidInput(format!("malformed JSON: {e}"))
        }
        _ => Error::InvalidInput(format!("schema violation: {e}")),
    })
}

fn parse_from(arg: &Option<String>) -> Result<serde_json::Value> {
    parse(&read_input(arg)?)
}

fn from_value<T: for<'de> Deserialize<'de>>(value: serde_json::Value) -> Result<T> {
    serde_json::from_value(value)
        .map_err(|e| Error::InvalidInput(format!("schema violation: {e}")))
}

type CxPair = (f64, f64);

fn to_cx(p: CxPair) -> Cx {
    cx(p.0, p.1)
}

fn pair(c: Cx) -> CxPair {
    (c.re, c.im)
}

/// Scalar transfer values print as one `[re, im]` pair; matrix values as
/// nested rows.
#[derive(Serialize)]
#[serde(untagged)]
enum ValueOut {
    Scalar(CxPair),
    Matrix(ComplexMatrix),
}

impl ValueOut {
    fn new(m: ComplexMatrix) -> Self {
        if m.rows() == 1 && m.cols() == 1 {
            ValueOut::Scalar(pair(m[(0, 0)]))
        } else {
            ValueOut::Matrix(m)
        }
    }
}

#[derive(Serialize)]
struct EvalOut {
    value: ValueOut,
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::EvalD2 { input } => {
            #[derive(Deserialize)]
            struct In {
                colligation: AnyColligation,
                z: CxPair,
                zeta: CxPair,
            }
            let parsed: In = from_value(parse_from(input)?)?;
            let (z, zeta) = (to_cx(parsed.z), to_cx(parsed.zeta));
            let value = match &parsed.colligation {
                AnyColligation::General(c) => {
                    realize::eval_general_with(c, z, zeta, cli.allow_boundary)?
                }
                AnyColligation::Symmetric(c) => {
                    realize::eval_symmetric_with(c, z, zeta, cli.allow_boundary)?
                }
                AnyColligation::Gamma(_) => {
                    return Err(Error::InvalidInput(
                        "eval-d2 expects a general or symmetric colligation; \
                         use eval-g for gamma colligations"
                            .to_string(),
                    ))
                }
            };
            emit(out, &EvalOut {
                value: ValueOut::new(value),
            })
        }
        Command::EvalG { input } => {
            #[derive(Deserialize)]
            struct In {
                colligation: AnyColligation,
                s: CxPair,
                p: CxPair,
            }
            let parsed: In = from_value(parse_from(input)?)?;
            let AnyColligation::Gamma(c) = &parsed.colligation else {
                return Err(Error::InvalidInput(
                    "eval-g expects a gamma colligation".to_string(),
                ));
            };
            let value =
                realize::eval_gamma_with(c, to_cx(parsed.s), to_cx(parsed.p), cli.allow_boundary)?;
            emit(out, &EvalOut {
                value: ValueOut::new(value),
            })
        }
        Command::Symmetrize { input } => {
            let parsed: AnyColligation = from_value(parse_from(input)?)?;
            let AnyColligation::General(c) = &parsed else {
                return Err(Error::InvalidInput(
                    "symmetrize expects a general colligation".to_string(),
                ));
            };
            emit(out, &AnyColligation::Symmetric(realize::symmetrize(c)))
        }
        Command::ToGamma { input } => {
            let parsed: AnyColligation = from_value(parse_from(input)?)?;
            let AnyColligation::Symmetric(c) = &parsed else {
                return Err(Error::InvalidInput(
                    "to-gamma expects a symmetric colligation".to_string(),
                ));
            };
            emit(out, &AnyColligation::Gamma(realize::to_gamma(c)))
        }
        Command::GeneralToGamma { input } => {
            let parsed: AnyColligation = from_value(parse_from(input)?)?;
            let AnyColligation::General(c) = &parsed else {
                return Err(Error::InvalidInput(
                    "general-to-gamma expects a general colligation".to_string(),
                ));
            };
            emit(out, &AnyColligation::Gamma(realize::general_to_gamma(c)))
        }
        Command::CheckColligation { input } => {
            let parsed: AnyColligation = from_value(parse_from(input)?)?;
            emit(out, &realize::check_colligation(&parsed))
        }
        Command::Supnorm { input } => {
            #[derive(Serialize)]
            struct Out {
                max: f64,
                argmax: (CxPair, CxPair),
                evaluated: usize,
                singular_skipped: usize,
            }
            let parsed: AnyColligation = from_value(parse_from(input)?)?;
            let report = realize::sup_norm_grid(&parsed, cli.grid)?;
            emit(out, &Out {
                max: report.max,
                argmax: (pair(report.argmax.0), pair(report.argmax.1)),
                evaluated: report.evaluated,
                singular_skipped: report.singular_skipped,
            })
        }
        Command::DetrepFromK { input } => {
            #[derive(Deserialize)]
            struct In {
                n: usize,
                m: usize,
                #[serde(rename = "K")]
                k: ComplexMatrix,
                constant: CxPair,
            }
            let parsed: In = from_value(parse_from(input)?)?;
            let blocks = KBlocks::from_assembled(parsed.n, parsed.m, &parsed.k)?;
            emit(out, &detrep::from_k(&blocks, to_cx(parsed.constant))?)
        }
        Command::DetrepVerify { input } => {
            #[derive(Deserialize)]
            struct In {
                rep: DetRep,
                target: Poly2,
            }
            let parsed: In = from_value(parse_from(input)?)?;
            emit(out, &detrep::verify(&parsed.rep, &parsed.target)?)
        }
        Command::DetrepRescale { input } => {
            #[derive(Deserialize)]
            struct In {
                rep: DetRep,
                #[serde(rename = "R")]
                r: f64,
            }
            let parsed: In = from_value(parse_from(input)?)?;
            emit(out, &detrep::strict_rescale(&parsed.rep, parsed.r)?)
        }
        Command::PolyConvert { input } => {
            #[derive(Deserialize)]
            struct In {
                poly: Poly2,
                to: Coords,
            }
            let parsed: In = from_value(parse_from(input)?)?;
            emit(out, &convert_poly(&parsed.poly, parsed.to)?)
        }
        Command::DetPoly { input } => {
            #[derive(Deserialize)]
            struct In {
                rep: Option<DetRep>,
                kblocks: Option<KBlocksIn>,
            }
            #[derive(Deserialize)]
            struct KBlocksIn {
                n: usize,
                m: usize,
                #[serde(rename = "K")]
                k: ComplexMatrix,
            }
            let parsed: In = from_value(parse_from(input)?)?;
            let poly = match (parsed.rep, parsed.kblocks) {
                (Some(rep), None) => detrep::det_poly(&rep),
                (None, Some(kb)) => {
                    let blocks = KBlocks::from_assembled(kb.n, kb.m, &kb.k)?;
                    detrep::det_poly_sigma_e(&blocks)
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "det-poly expects exactly one of \"rep\" or \"kblocks\"".to_string(),
                    ))
                }
            };
            emit(out, &poly)
        }
        Command::PickLift { input } => {
            #[derive(Deserialize)]
            struct In {
                s: CxPair,
                p: CxPair,
            }
            #[derive(Serialize)]
            struct Out {
                z: CxPair,
                zeta: CxPair,
                in_g: bool,
            }
            let parsed: In = from_value(parse_from(input)?)?;
            let lifted = pick::lift_point(to_cx(parsed.s), to_cx(parsed.p));
            emit(out, &Out {
                z: pair(lifted.z),
                zeta: pair(lifted.zeta),
                in_g: lifted.in_g,
            })
        }
        Command::PickKernels { input } => {
            #[derive(Serialize)]
            struct NodeOut {
                z: CxPair,
                zeta: CxPair,
            }
            #[derive(Serialize)]
            struct Out {
                #[serde(rename = "W")]
                w: ComplexMatrix,
                #[serde(rename = "Pz")]
                pz: ComplexMatrix,
                #[serde(rename = "Pzeta")]
                pzeta: ComplexMatrix,
                nodes: Vec<NodeOut>,
                values: Vec<CxPair>,
                sym_orbits: Vec<SymOrbit>,
            }
            let problem: PickProblemG = from_value(parse_from(input)?)?;
            let d2 = pick::build_symm_data(&problem)?;
            let (w, pz, pzeta) = pick::kernel_matrices(&d2);
            emit(out, &Out {
                w,
                pz,
                pzeta,
                nodes: d2
                    .nodes()
                    .iter()
                    .map(|&(z, zeta)| NodeOut {
                        z: pair(z),
                        zeta: pair(zeta),
                    })
                    .collect(),
                values: d2.values().iter().map(|&v| pair(v)).collect(),
                sym_orbits: d2.sym_orbits().to_vec(),
            })
        }
        Command::PickFeas { input } => {
            #[derive(Deserialize)]
            struct In {
                #[serde(rename = "W")]
                w: ComplexMatrix,
                #[serde(rename = "Pz")]
                pz: ComplexMatrix,
                #[serde(rename = "Pzeta")]
                pzeta: ComplexMatrix,
            }
            #[derive(Serialize)]
            struct Out {
                status: FeasStatus,
                iterations: usize,
                #[serde(flatten, skip_serializing_if = "Option::is_none")]
                certificate: Option<AglerCertificate>,
                #[serde(skip_serializing_if = "Option::is_none")]
                explanation: Option<String>,
            }
            let parsed: In = from_value(parse_from(input)?)?;
            let outcome = pick::feasibility(
                &parsed.w,
                &parsed.pz,
                &parsed.pzeta,
                FeasOptions {
                    max_iter: cli.max_iter,
                    tol: cli.tol,
                },
            )?;
            emit(out, &Out {
                status: outcome.status,
                iterations: outcome.iterations,
                certificate: outcome.certificate,
                explanation: outcome.explanation,
            })
        }
        Command::PickCheck { input } => {
            #[derive(Deserialize)]
            struct In {
                #[serde(rename = "K1")]
                k1: ComplexMatrix,
                #[serde(rename = "K2")]
                k2: ComplexMatrix,
                #[serde(rename = "W")]
                w: ComplexMatrix,
                #[serde(rename = "Pz")]
                pz: ComplexMatrix,
                #[serde(rename = "Pzeta")]
                pzeta: ComplexMatrix,
            }
            let parsed: In = from_value(parse_from(input)?)?;
            emit(
                out,
                &pick::check_certificate(&parsed.k1, &parsed.k2, &parsed.w, &parsed.pz, &parsed.pzeta)?,
            )
        }
        Command::PickSolve { input } => {
            #[derive(Serialize)]
            struct Out {
                status: FeasStatus,
                iterations: usize,
                seed: u64,
                #[serde(skip_serializing_if = "Option::is_none")]
                gamma: Option<AnyColligation>,
                #[serde(skip_serializing_if = "Option::is_none")]
                certificate: Option<AglerCertificate>,
                #[serde(skip_serializing_if = "Option::is_none")]
                diagnostics: Option<SolveDiagnostics>,
                #[serde(skip_serializing_if = "Option::is_none")]
                explanation: Option<String>,
            }
            let problem: PickProblemG = from_value(parse_from(input)?)?;
            let outcome = pick::solve_g(
                &problem,
                SolveOptions {
                    max_iter: cli.max_iter,
                    tol: cli.tol,
                    grid: cli.grid,
                    seed: cli.seed,
                    lurking_threshold: pick::LURKING_RESIDUAL_THRESHOLD,
                },
            )?;
            emit(out, &Out {
                status: outcome.status,
                iterations: outcome.iterations,
                seed: cli.seed,
                gamma: outcome.gamma.map(AnyColligation::Gamma),
                certificate: outcome.certificate,
                diagnostics: outcome.diagnostics,
                explanation: outcome.explanation,
            })
        }
    }
}

/// Conversion table for `poly-convert`; zzeta <-> sigmae goes through sp.
fn convert_poly(poly: &Poly2, to: Coords) -> Result<Poly2> {
    let from = poly.coords();
    if from == to {
        return Ok(poly.clone());
    }
    match (from, to) {
        (Coords::ZZeta, Coords::SP) => poly2::to_sp_basis(poly),
        (Coords::SP, Coords::ZZeta) => poly2::compose_sym(poly),
        (Coords::SP, Coords::SigmaE) => poly2::change_sigma_e(poly, SigmaDirection::SpToSigmaE),
        (Coords::SigmaE, Coords::SP) => poly2::change_sigma_e(poly, SigmaDirection::SigmaEToSp),
        (Coords::ZZeta, Coords::SigmaE) => {
            let sp = poly2::to_sp_basis(poly)?;
            poly2::change_sigma_e(&sp, SigmaDirection::SpToSigmaE)
        }
        (Coords::SigmaE, Coords::ZZeta) => {
            let sp = poly2::change_sigma_e(poly, SigmaDirection::SigmaEToSp)?;
            poly2::compose_sym(&sp)
        }
        _ => unreachable!("identical coordinates handled above"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String) {
        let mut buf = Vec::new();
        let argv: Vec<OsString> = std::iter::once("symbidisk")
            .chain(args.iter().copied())
            .map(OsString::from)
            .collect();
        let code = run(argv, &mut buf);
        (code, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn eval_g_scalar_output() {
        let input = r#"{
            "colligation": {
                "type": "gamma",
                "alpha1": [[[0,0],[1,0]],[[0,0],[0,0]]],
                "alpha2": [[[0,0],[-1,0]],[[0,0],[0,0]]],
                "beta": [[[0,0]],[[1,0]]],
                "gamma": [[[1,0],[0,0]]],
                "delta": [[[0,0]]]
            },
            "s": [0.0, 0.0],
            "p": [0.5, 0.0]
        }"#;
        let (code, text) = run_capture(&["eval-g", input]);
        assert_eq!(code, 0, "{text}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!((v["value"][0].as_f64().unwrap() - 0.5).abs() < 1e-14);
        assert_eq!(v["value"][1].as_f64().unwrap(), 0.0);
        // 17 significant digits on the wire.
        assert!(text.contains("5.0000000000000000e-1"), "{text}");
    }

    #[test]
    fn malformed_and_schema_errors() {
        let (code, text) = run_capture(&["pick-lift", "{not json"]);
        assert_eq!(code, 2);
        assert!(text.contains("malformed JSON"), "{text}");

        let (code, text) = run_capture(&["pick-lift", r#"{"s":[0,0]}"#]);
        assert_eq!(code, 2);
        assert!(text.contains("schema"), "{text}");

        let (code, text) = run_capture(&[
            "pick-check",
            r#"{"K1":[[[1,0]]],"K2":[[[1,0]]],"W":[[[1,0],[1,0]],[[1,0],[1,0]]],"Pz":[[[1,0]]],"Pzeta":[[[1,0]]]}"#,
        ]);
        assert_eq!(code, 2);
        assert!(text.contains("dimension-mismatch"), "{text}");
    }

    #[test]
    fn domain_error_exit_code() {
        let input = r#"{
            "colligation": {
                "type": "general",
                "A11": [[[0,0]]], "A12": [], "A21": [], "A22": [],
                "B1": [[[1,0]]], "B2": [],
                "C1": [[[1,0]]], "C2": [],
                "D": [[[0,0]]]
            },
            "z": [1.5, 0.0],
            "zeta": [0.0, 0.0]
        }"#;
        let (code, text) = run_capture(&["eval-d2", input]);
        assert_eq!(code, 1, "{text}");
        assert!(text.contains("outside-domain"));
    }

    #[test]
    fn infeasible_is_exit_zero() {
        let input = r#"{"nodes":[{"s":[0,0],"p":[0,0]}],"values":[[2,0]]}"#;
        let (code, text) = run_capture(&["pick-solve", input]);
        assert_eq!(code, 0, "{text}");
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["status"], "infeasible");
    }

    #[test]
    fn poly_convert_round_trip() {
        let input = r#"{
            "poly": {"coords":"zzeta","deg":[2,2],
                     "coeffs":[[[0,0],[0,0],[1,0]],[[0,0],[0,0],[0,0]],[[1,0],[0,0],[0,0]]]},
            "to": "sp"
        }"#;
        let (code, text) = run_capture(&["poly-convert", input]);
        assert_eq!(code, 0, "{text}");
        let converted: Poly2 = serde_json::from_str(&text).unwrap();
        assert_eq!(converted.coords(), Coords::SP);
        assert_eq!(converted.coeff(2, 0), Cx::ONE);
        assert_eq!(converted.coeff(0, 1), cx(-2.0, 0.0));
    }
}
