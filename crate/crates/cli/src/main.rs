use std::collections::BTreeMap;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use bdtk::bdt::correction;
use bdtk::calculus::{bd_exp, bd_invert_auto, bdt_exp, bdt_invert, bdt_norm_upper, k_exp, smooth_calc, DEFAULT_INVERT_SIZES};
use bdtk::derivations::{der_apply, der_component, der_reconstruct, DerivationSpec};
use bdtk::index::{fredholm_index, k0_demo, DEFAULT_SCHEDULE, DEFAULT_SVD_THRESHOLD};
use bdtk::json::{self as bj, float_value, Json};
use bdtk::verify::{run_suite, SUITES};
use bdtk::{BdElement, BdtElement, CompactMatrix, Error, GsRational, NormBound, Supernatural};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

/// Exact and certified computation with Bunce-Deddens-Toeplitz elements.
///
/// Elements are JSON files (`-` reads standard input, an argument starting
/// with `{` is read as inline JSON). Exit codes: 0 success, 1 mathematical
/// failure, 2 malformed input. BDTK_THREADS caps the worker threads.
#[derive(Parser)]
#[command(name = "bdtk", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// Ambient supernatural number, e.g. "2:inf,3:1", for inputs that do not carry one.
    #[arg(long = "S", global = true)]
    s: Option<String>,
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Product of two elements.
    Mul { a: String, b: String },
    Adjoint { a: String },
    /// P-norm of a bd element, MN-norm of a compact, or the operator norm.
    Norm {
        a: String,
        #[arg(long = "P")]
        p: Option<u32>,
        #[arg(long = "M", requires = "n")]
        m: Option<u32>,
        #[arg(long = "N", requires = "m")]
        n: Option<u32>,
    },
    /// T(b).
    Toeplitz { b: String },
    /// Image in the quotient.
    Tau { a: String },
    /// T(b1)T(b2) - T(b1 b2).
    Correction { b1: String, b2: String },
    /// n-th Fourier component under the gauge action.
    Fourier {
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
    },
    /// Certified inverse.
    Invert { a: String },
    /// Certified e^{ia} for self-adjoint a.
    Exp {
        a: String,
        /// Band cutoff for bd elements; chosen from the input when omitted.
        #[arg(long)]
        max_band: Option<u64>,
    },
    /// f(a) = Σ f_n e^{2πina/L} for self-adjoint a.
    Calc {
        a: String,
        /// JSON list of [n, coefficient] pairs.
        #[arg(long)]
        coeffs: String,
        #[arg(long, default_value_t = 1.0)]
        period: f64,
        /// Bound on the omitted Fourier terms, added to the certificate.
        #[arg(long, default_value_t = 0.0)]
        tail: f64,
    },
    #[command(subcommand)]
    Derivation(DerivationCmd),
    /// Fredholm index from rectangular sections.
    Index {
        a: String,
        /// Comma-separated section sizes.
        #[arg(long, value_delimiter = ',')]
        schedule: Option<Vec<usize>>,
        #[arg(long, default_value_t = DEFAULT_SVD_THRESHOLD)]
        threshold: f64,
    },
    /// Membership in G_S, optionally with a sum, or the K_0 demonstration.
    Gs {
        #[arg(long, allow_hyphen_values = true, required_unless_present = "demo")]
        q: Option<String>,
        /// Second rational to add to q.
        #[arg(long, allow_hyphen_values = true, requires = "q")]
        plus: Option<String>,
        #[arg(long)]
        demo: bool,
    },
    /// Run a seeded property suite.
    Verify {
        #[arg(required_unless_present = "list")]
        suite: Option<String>,
        #[arg(long)]
        cases: Option<usize>,
        /// List the suites.
        #[arg(long)]
        list: bool,
    },
}

#[derive(Subcommand)]
enum DerivationCmd {
    /// d(a) for d = γ d_K + [T(b) + c, ·].
    Apply { d: String, a: String },
    /// The n-covariant component of d.
    Component {
        d: String,
        #[arg(long, allow_hyphen_values = true)]
        n: i64,
    },
    /// Recover c from an inner derivation [c, ·] with finite-support c.
    Reconstruct {
        d: String,
        #[arg(long, default_value_t = 8)]
        band_limit: u64,
    },
}

enum Elem {
    Bd(BdElement),
    Bdt(BdtElement),
    K(CompactMatrix),
}

impl Elem {
    fn s(&self) -> Option<&Supernatural> {
        match self {
            Elem::Bd(b) => Some(b.s()),
            Elem::Bdt(a) => Some(a.s()),
            Elem::K(_) => None,
        }
    }
}

fn input_error(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

fn read_text(src: &str) -> Result<String, Error> {
    if src.trim_start().starts_with(['{', '[']) {
        return Ok(src.to_string());
    }
    if src == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| input_error(format!("reading standard input: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(src).map_err(|e| input_error(format!("reading {src}: {e}")))
}

fn read_value(src: &str) -> Result<Value, Error> {
    bj::parse(&read_text(src)?)
}

fn read_elem(src: &str) -> Result<Elem, Error> {
    let v = read_value(src)?;
    if v.get("symbol").is_some() {
        Ok(Elem::Bdt(BdtElement::from_json(&v)?))
    } else if v.get("bands").is_some() {
        Ok(Elem::Bd(BdElement::from_json(&v)?))
    } else if v.get("entries").is_some() {
        Ok(Elem::K(CompactMatrix::from_json(&v)?))
    } else {
        Err(input_error("expected an element with \"symbol\", \"bands\" or \"entries\""))
    }
}

struct Ctx<'a> {
    g: &'a Global,
}

impl Ctx<'_> {
    fn s(&self, hint: Option<&Supernatural>) -> Result<Supernatural, Error> {
        match (&self.g.s, hint) {
            (Some(t), _) => t.parse(),
            (None, Some(s)) => Ok(s.clone()),
            (None, None) => Err(input_error("--S is required for this input")),
        }
    }

    fn bdt(&self, e: Elem, hint: Option<&Supernatural>) -> Result<BdtElement, Error> {
        Ok(match e {
            Elem::Bd(b) => BdtElement::toeplitz(b),
            Elem::Bdt(a) => a,
            Elem::K(c) => BdtElement::compact_only(self.s(hint)?, c),
        })
    }
}

fn expect_bd(e: Elem, what: &str) -> Result<BdElement, Error> {
    match e {
        Elem::Bd(b) => Ok(b),
        _ => Err(input_error(format!("{what} takes a bd element"))),
    }
}

fn bound_json(nb: NormBound) -> Value {
    json!({ "value": float_value(nb.mid()), "lower": float_value(nb.lower), "upper": float_value(nb.upper) })
}

/// Output value and whether the run counts as a mathematical failure.
fn run(cmd: Command, ctx: &Ctx) -> Result<(Value, bool), Error> {
    let tol = ctx.g.tol;
    if !(tol > 0.0) {
        return Err(input_error("--tol must be positive"));
    }
    let ok = |v: Value| Ok((v, false));
    match cmd {
        Command::Mul { a, b } => {
            let (a, b) = (read_elem(&a)?, read_elem(&b)?);
            match (a, b) {
                (Elem::Bd(x), Elem::Bd(y)) => ok(x.mul(&y).to_json()),
                (Elem::K(x), Elem::K(y)) => ok(x.mul(&y).to_json()),
                (x, y) => {
                    let hint = x.s().or(y.s()).cloned();
                    let (x, y) = (ctx.bdt(x, hint.as_ref())?, ctx.bdt(y, hint.as_ref())?);
                    ok(x.mul(&y).to_json())
                }
            }
        }
        Command::Adjoint { a } => ok(match read_elem(&a)? {
            Elem::Bd(b) => b.adjoint().to_json(),
            Elem::Bdt(x) => x.adjoint().to_json(),
            Elem::K(c) => c.adjoint().to_json(),
        }),
        Command::Norm { a, p, m, n } => {
            let e = read_elem(&a)?;
            match (e, p, m.zip(n)) {
                (Elem::Bd(b), Some(p), None) => ok(bound_json(b.p_norm_bounds(p, tol)?)),
                (Elem::K(c), None, Some((m, n))) => ok(json!({ "value": float_value(c.mn_norm(m, n)) })),
                (Elem::Bd(b), None, None) => ok(bound_json(b.norm_bounds(tol)?)),
                (Elem::K(c), None, None) => ok(json!({ "value": float_value(c.op_norm()) })),
                (Elem::Bdt(x), None, None) => ok(json!({ "upper": float_value(bdt_norm_upper(&x, tol)?) })),
                _ => Err(input_error("--P takes a bd element, --M/--N a compact element")),
            }
        }
        Command::Toeplitz { b } => ok(BdtElement::toeplitz(expect_bd(read_elem(&b)?, "toeplitz")?).to_json()),
        Command::Tau { a } => {
            let e = read_elem(&a)?;
            let x = ctx.bdt(e, None)?;
            ok(x.tau().to_json())
        }
        Command::Correction { b1, b2 } => {
            let b1 = expect_bd(read_elem(&b1)?, "correction")?;
            let b2 = expect_bd(read_elem(&b2)?, "correction")?;
            if b1.s() != b2.s() {
                return Err(input_error("operands live over different S"));
            }
            ok(correction(&b1, &b2).to_json())
        }
        Command::Fourier { a, n } => ok(match read_elem(&a)? {
            Elem::Bd(b) => {
                let f = b.fourier(n);
                BdElement::monomial(b.s().clone(), n, f)?.to_json()
            }
            Elem::Bdt(x) => x.fourier(n).to_json(),
            Elem::K(c) => c.fourier(n).to_json(),
        }),
        Command::Invert { a } => ok(match read_elem(&a)? {
            Elem::Bd(b) => bd_invert_auto(&b, tol)?.to_json(),
            e => {
                let x = ctx.bdt(e, None)?;
                bdt_invert(&x, tol, &DEFAULT_INVERT_SIZES)?.to_json()
            }
        }),
        Command::Exp { a, max_band } => ok(match read_elem(&a)? {
            Elem::Bd(b) => {
                let mb = max_band.unwrap_or_else(|| (8 * (b.l1_norm().ceil() as u64 + 2) * b.bandwidth().max(1)).max(32));
                bd_exp(&b, tol, mb)?.to_json()
            }
            Elem::Bdt(x) => bdt_exp(&x, tol)?.to_json(),
            Elem::K(c) => k_exp(&ctx.s(None)?, &c)?.to_json(),
        }),
        Command::Calc { a, coeffs, period, tail } => {
            let e = read_elem(&a)?;
            let x = ctx.bdt(e, None)?;
            let list = bj::parse(&coeffs)?;
            let mut map = BTreeMap::new();
            for item in list.as_array().ok_or_else(|| input_error("--coeffs must be a JSON list"))? {
                match item.as_array().map(Vec::as_slice) {
                    Some([n, z]) => {
                        let n = n.as_i64().ok_or_else(|| input_error("coefficient index must be an integer"))?;
                        map.insert(n, bj::scalar_from_loose(z)?);
                    }
                    _ => return Err(input_error("--coeffs entries are [n, coefficient]")),
                }
            }
            ok(smooth_calc(&x, &map, period, tol, tail)?.to_json())
        }
        Command::Derivation(sub) => match sub {
            DerivationCmd::Apply { d, a } => {
                let d = DerivationSpec::from_json(&read_value(&d)?)?;
                let e = read_elem(&a)?;
                let x = ctx.bdt(e, Some(d.b.s()))?;
                ok(der_apply(&d, &x).to_json())
            }
            DerivationCmd::Component { d, n } => {
                let d = DerivationSpec::from_json(&read_value(&d)?)?;
                ok(der_component(&d, n).to_json())
            }
            DerivationCmd::Reconstruct { d, band_limit } => {
                let d = DerivationSpec::from_json(&read_value(&d)?)?;
                let s = d.b.s().clone();
                let apply = |a: &BdtElement| der_apply(&d, a);
                ok(json!({ "c": der_reconstruct(&apply, &s, band_limit)?.to_json() }))
            }
        },
        Command::Index { a, schedule, threshold } => {
            let e = read_elem(&a)?;
            let x = ctx.bdt(e, None)?;
            let sched = schedule.unwrap_or_else(|| DEFAULT_SCHEDULE.to_vec());
            let r = fredholm_index(&x, &sched, threshold)?;
            ok(serde_json::to_value(&r).expect("plain data"))
        }
        Command::Gs { q, plus, demo } => {
            let s = ctx.s(None)?;
            if demo {
                return ok(serde_json::to_value(k0_demo(&s)?).expect("plain data"));
            }
            let q = q.expect("required by the parser");
            let (num, den) = bj::parse_rational(&q)?;
            let member = bdtk::arith::gs_contains(num, den, &s)?;
            let mut out = json!({ "member": member });
            if let Some(r) = plus {
                let (n2, d2) = bj::parse_rational(&r)?;
                if member && bdtk::arith::gs_contains(n2, d2, &s)? {
                    let sum = bdtk::arith::gs_add(GsRational::new(num, den, &s)?, GsRational::new(n2, d2, &s)?, &s)?;
                    out["sum"] = bj::gs_to_json(&sum);
                } else {
                    return Err(Error::NotMember("both summands must lie in G_S".into()));
                }
            }
            ok(out)
        }
        Command::Verify { suite, cases, list } => {
            if list {
                let v: Vec<Value> = SUITES
                    .iter()
                    .map(|s| json!({ "name": s.name, "cases": s.default_cases, "description": s.description }))
                    .collect();
                return ok(Value::Array(v));
            }
            let report = run_suite(&suite.expect("required by the parser"), ctx.g.seed, cases)?;
            Ok((report.to_json(), !report.all_pass()))
        }
    }
}

fn emit(v: &Value, out: Option<&PathBuf>) -> std::io::Result<()> {
    let text = bj::to_string_pretty(v) + "\n";
    match out {
        Some(p) => std::fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("BDTK_THREADS").ok().and_then(|t| t.parse::<usize>().ok()) {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let ctx = Ctx { g: &cli.global };
    match run(cli.cmd, &ctx) {
        Ok((v, failed)) => {
            if let Err(e) = emit(&v, cli.global.out.as_ref()) {
                eprintln!("bdtk: writing output: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(u8::from(failed))
        }
        Err(e) => {
            let code = if e.is_input_error() { 2 } else { 1 };
            let body = json!({ "error": e.to_string(), "exit_code": code });
            eprintln!("{}", bj::to_string(&body));
            ExitCode::from(code)
        }
    }
}
