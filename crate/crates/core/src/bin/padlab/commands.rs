use std::path::Path;

use num_rational::BigRational;
use serde_json::{json, Map, Value};

use padlab::dynamics::{
    atom_representatives, bowen_ball, bowen_count_oracle, bowen_volume_ratio, decompose, min_partition_level,
    HorosphericalDecomposition, OracleMode, DEFAULT_ORACLE_BUDGET,
};
use padlab::entropy_lab::{
    entropy_gap, function_from_json, markov_from_json, parse_real, pinsker_check, telescope_bound_check, ProbVector,
};
use padlab::format::decimal;
use padlab::liegroup::{bch, exp, horospherical_factor, log, BchMode, GroupSpec};
use padlab::padic::rational_string;
use padlab::spectral::{cartan_valuations, equidistribution_bound, kappa, oh_bound, theorem1_rhs, xi_pgl2, ConstantsBundle};
use padlab::{Error, PadicContext, PadicMatrix};

use crate::args::{BchChoice, Cli, Command, ElementArgs, GroupKind, OracleChoice};

/// Exit code for a failed self-check (oracle DISAGREE, factor FAIL, ...).
pub const EXIT_VERIFICATION: i32 = 8;

pub struct Outcome {
    pub doc: Map<String, Value>,
    pub exit: i32,
}

impl Outcome {
    fn ok(doc: Map<String, Value>) -> Self {
        Self { doc, exit: 0 }
    }

    fn checked(doc: Map<String, Value>, passed: bool) -> Self {
        Self { doc, exit: if passed { 0 } else { EXIT_VERIFICATION } }
    }
}

/// Documented exit code of each error class.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotDiagonalizable(_) => 2,
        Error::NoHyperbolicity => 3,
        Error::NegativeGap(_) => 4,
        Error::DomainError(_) | Error::LevelTooSmall(_) | Error::DivergentSeries(_) | Error::NegativeExponent(_) => 5,
        Error::PrecisionExhausted(_)
        | Error::SingularAtPrecision
        | Error::NoConvergence(_)
        | Error::NotSplitAtPrecision(_)
        | Error::DivisionByZero => 6,
        Error::BudgetExceeded { .. } => 7,
        Error::InvalidContext(_)
        | Error::ContextMismatch
        | Error::DimensionMismatch(_)
        | Error::NotUnimodular { .. }
        | Error::SupportMismatch(_)
        | Error::SymbolCountMismatch { .. }
        | Error::InvalidInput(_)
        | Error::Parse(_) => 1,
    }
}

pub fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidContext(_) => "InvalidContext",
        Error::ContextMismatch => "ContextMismatch",
        Error::PrecisionExhausted(_) => "PrecisionExhausted",
        Error::DivisionByZero => "DivisionByZero",
        Error::DimensionMismatch(_) => "DimensionMismatch",
        Error::SingularAtPrecision => "SingularAtPrecision",
        Error::NotSplitAtPrecision(_) => "NotSplitAtPrecision",
        Error::DomainError(_) => "DomainError",
        Error::NoConvergence(_) => "NoConvergence",
        Error::NotDiagonalizable(_) => "NotDiagonalizable",
        Error::NoHyperbolicity => "NoHyperbolicity",
        Error::NotUnimodular { .. } => "NotUnimodular",
        Error::LevelTooSmall(_) => "LevelTooSmall",
        Error::BudgetExceeded { .. } => "BudgetExceeded",
        Error::SupportMismatch(_) => "SupportMismatch",
        Error::SymbolCountMismatch { .. } => "SymbolCountMismatch",
        Error::NegativeExponent(_) => "NegativeExponent",
        Error::DivergentSeries(_) => "DivergentSeries",
        Error::NegativeGap(_) => "NegativeGap",
        Error::InvalidInput(_) => "InvalidInput",
        Error::Parse(_) => "Parse",
    }
}

/// A literal when the argument starts with `[` or `{`, otherwise a file path.
fn read_json(arg: &str) -> Result<Value, Error> {
    let text = if arg.trim_start().starts_with(['[', '{']) {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(|e| Error::InvalidInput(format!("cannot read {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{arg}: {e}")))
}

fn context(cli: &Cli) -> Result<PadicContext, Error> {
    let p = prime(cli)?;
    PadicContext::new(p, cli.precision)
}

fn prime(cli: &Cli) -> Result<u64, Error> {
    cli.p.ok_or_else(|| Error::InvalidInput("this command needs --p".into()))
}

fn matrix(arg: &str, ctx: PadicContext) -> Result<PadicMatrix, Error> {
    PadicMatrix::from_json(&read_json(arg)?, ctx)
}

fn ratio(r: &BigRational) -> Value {
    Value::String(rational_string(r))
}

fn group_for(args: &ElementArgs, ctx: PadicContext) -> Result<(PadicMatrix, GroupSpec), Error> {
    let a = matrix(&args.element, ctx)?;
    if !a.is_square() {
        return Err(Error::DimensionMismatch("the element must be square".into()));
    }
    let d = args.dim.unwrap_or(a.rows());
    if d != a.rows() {
        return Err(Error::DimensionMismatch(format!("--dim {d} but the element is {0}x{0}", a.rows())));
    }
    let group = match args.group {
        GroupKind::Sl => GroupSpec::sl(d, ctx)?,
        GroupKind::Gl => GroupSpec::gl(d, ctx)?,
    };
    Ok((a, group))
}

fn decomposition(args: &ElementArgs, ctx: PadicContext) -> Result<HorosphericalDecomposition, Error> {
    let (a, group) = group_for(args, ctx)?;
    decompose(&a, &group)
}

fn doc(value: Value) -> Map<String, Value> {
    match value {
        Value::Object(m) => m,
        _ => unreachable!("command documents are objects"),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::Analyze(args) => {
            let ctx = context(cli)?;
            let dec = decomposition(args, ctx)?;
            let entropy = dec.entropy();
            let mut d = doc(dec.to_json());
            d.insert("dim".into(), json!(dec.dim()));
            d.insert(
                "entropy".into(),
                json!({
                    "log_p_units": entropy.log_p_units,
                    "exact": format!("{}·log {}", entropy.log_p_units, ctx.p()),
                    "nats": decimal(entropy.nats),
                }),
            );
            d.insert("mod_character".into(), ratio(&dec.mod_character()));
            d.insert("min_partition_level".into(), json!(min_partition_level(&dec)));
            d.insert("classification".into(), json!(dec.classes().iter().map(|c| c.label()).collect::<Vec<_>>()));
            Ok(Outcome::ok(d))
        }
        Command::Exp { matrix: m } => {
            let ctx = context(cli)?;
            let x = matrix(m, ctx)?;
            let g = exp(&x)?;
            let e = PadicMatrix::identity(g.dim(), ctx);
            Ok(Outcome::ok(doc(json!({
                "result": g.to_literal(),
                "norm_input": ratio(&x.max_norm()),
                "norm_distance_to_identity": ratio(&(&g - &e).max_norm()),
            }))))
        }
        Command::Log { matrix: m } => {
            let ctx = context(cli)?;
            let g = matrix(m, ctx)?;
            let x = log(&g)?;
            let e = PadicMatrix::identity(g.dim(), ctx);
            Ok(Outcome::ok(doc(json!({
                "result": x.to_literal(),
                "norm_result": ratio(&x.max_norm()),
                "norm_distance_to_identity": ratio(&(&g - &e).max_norm()),
            }))))
        }
        Command::Bch { x, y, mode } => {
            let ctx = context(cli)?;
            let (x, y) = (matrix(x, ctx)?, matrix(y, ctx)?);
            let mut d = Map::new();
            let mut passed = true;
            let dynkin = matches!(mode, BchChoice::Dynkin | BchChoice::Both)
                .then(|| bch(&x, &y, BchMode::DynkinSeries))
                .transpose()?;
            let direct =
                matches!(mode, BchChoice::Direct | BchChoice::Both).then(|| bch(&x, &y, BchMode::Direct)).transpose()?;
            if let Some(z) = &dynkin {
                d.insert("dynkin".into(), z.to_literal());
            }
            if let Some(z) = &direct {
                d.insert("direct".into(), z.to_literal());
            }
            if let (Some(a), Some(b)) = (&dynkin, &direct) {
                let digits = ctx.precision() as i64 - 2;
                passed = a.agrees_to(b, digits);
                d.insert("agree_mod".into(), json!(format!("{}^{}", ctx.p(), digits)));
                d.insert("verdict".into(), json!(if passed { "AGREE" } else { "DISAGREE" }));
            }
            Ok(Outcome::checked(d, passed))
        }
        Command::Factor { element, g, k } => {
            let ctx = context(cli)?;
            let dec = decomposition(element, ctx)?;
            let g = matrix(g, ctx)?;
            let fac = horospherical_factor(&g, *k, &dec)?;
            let product_ok = (&fac.f * &fac.h).agrees_to(&g, ctx.precision() as i64);
            let f_ok = dec.in_unstable_ball(&fac.f, *k);
            let h_ok = dec.in_thickened_stable_ball(&fac.h, *k, *k);
            let passed = product_ok && f_ok && h_ok;
            Ok(Outcome::checked(
                doc(json!({
                    "f": fac.f.to_literal(),
                    "h": fac.h.to_literal(),
                    "iterations": fac.iterations,
                    "f_in_unstable_ball": f_ok,
                    "h_in_thickened_stable_ball": h_ok,
                    "product_matches": product_ok,
                    "check": if passed { "PASS" } else { "FAIL" },
                })),
                passed,
            ))
        }
        Command::Bowen { element, k, n } => {
            let ctx = context(cli)?;
            let dec = decomposition(element, ctx)?;
            let ball = bowen_ball(&dec, *k, *n)?;
            let mut d = doc(json!({
                "k": k,
                "n": n,
                "levels": ball.levels,
                "classification": dec.classes().iter().map(|c| c.label()).collect::<Vec<_>>(),
            }));
            if *n >= 1 {
                d.insert("volume_ratio".into(), ratio(&bowen_volume_ratio(&dec, *k, *n)?));
            }
            Ok(Outcome::ok(d))
        }
        Command::Oracle { element, k, n, level, mode, budget } => {
            let ctx = context(cli)?;
            let dec = decomposition(element, ctx)?;
            let level = level.unwrap_or(k + (*n as i64 - 1).max(0) * dec.max_nu() as i64 + 1);
            let mode = match mode {
                OracleChoice::Full => OracleMode::Full,
                OracleChoice::Factored => OracleMode::Factored,
            };
            let res = bowen_count_oracle(&dec, *k, *n, level, mode, budget.unwrap_or(DEFAULT_ORACLE_BUDGET))?;
            let closed = bowen_volume_ratio(&dec, *k, *n)?;
            let oracle = res.ratios.last().expect("n >= 1").clone();
            let agree = oracle == closed;
            Ok(Outcome::checked(
                doc(json!({
                    "k": k,
                    "n": n,
                    "level": level,
                    "mode": match mode { OracleMode::Full => "FULL", OracleMode::Factored => "FACTORED" },
                    "counts": res.counts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                    "ratios": res.ratios.iter().map(ratio).collect::<Vec<_>>(),
                    "oracle_ratio": ratio(&oracle),
                    "closed_form_ratio": ratio(&closed),
                    "verdict": if agree { "AGREE" } else { "DISAGREE" },
                })),
                agree,
            ))
        }
        Command::Atoms { element, k } => {
            let ctx = context(cli)?;
            let dec = decomposition(element, ctx)?;
            let k = k.unwrap_or_else(|| min_partition_level(&dec));
            let reps = atom_representatives(&dec, k)?;
            Ok(Outcome::ok(doc(json!({
                "k": k,
                "count": reps.len(),
                "expected_count": ratio(&dec.mod_character()),
                "representatives": reps.iter().map(PadicMatrix::to_literal).collect::<Vec<_>>(),
            }))))
        }
        Command::Gap { markov, nu } => {
            let p = prime(cli)?;
            let m = markov_from_json(&read_json(markov)?)?;
            let rep = entropy_gap(&m, *nu, p)?;
            Ok(Outcome::checked(
                doc(json!({
                    "symbols": m.symbol_count(),
                    "nu_total": nu,
                    "max_entropy": decimal(rep.max_entropy),
                    "entropy_rate": decimal(rep.entropy_rate),
                    "side_a": decimal(rep.side_a),
                    "side_b": decimal(rep.side_b),
                    "gap": decimal(rep.gap()),
                    "stationary": m.stationary().weights().iter().map(|w| decimal(*w)).collect::<Vec<_>>(),
                    "verdict": if rep.agree { "AGREE" } else { "DISAGREE" },
                })),
                rep.agree,
            ))
        }
        Command::Pinsker { p_vector, q_vector } => {
            let (p, q) = (prob_vector(p_vector)?, prob_vector(q_vector)?);
            let rep = pinsker_check(&p, &q)?;
            Ok(Outcome::checked(
                doc(json!({
                    "l1": decimal(rep.l1),
                    "l1_squared": decimal(rep.l1 * rep.l1),
                    "bound": decimal(rep.bound),
                    "holds": rep.holds,
                })),
                rep.holds,
            ))
        }
        Command::Telescope { markov, f } => {
            let mdoc = read_json(markov)?;
            let m = markov_from_json(&mdoc)?;
            let fdoc = match f {
                Some(path) => read_json(path)?,
                None => mdoc,
            };
            let f = function_from_json(&fdoc)?;
            let rep = telescope_bound_check(&f, &m)?;
            let steps: Vec<Value> = rep
                .steps
                .iter()
                .map(|s| {
                    json!({
                        "n": s.n,
                        "delta": decimal(s.delta),
                        "l1_step": decimal(s.l1_step),
                        "sup_norm": decimal(s.sup_norm),
                        "bound": decimal(s.bound),
                        "holds": s.holds,
                    })
                })
                .collect();
            Ok(Outcome::checked(
                doc(json!({
                    "gap": decimal(rep.gap),
                    "mean": decimal(rep.mean),
                    "mu_f": decimal(rep.mu_f),
                    "total": decimal(rep.total),
                    "delta_sum": decimal(rep.delta_sum),
                    "steps": steps,
                    "holds": rep.holds,
                })),
                rep.holds,
            ))
        }
        Command::Xi { k } => {
            let p = prime(cli)?;
            Ok(Outcome::ok(doc(json!({ "p": p, "k": k, "xi": decimal(xi_pgl2(p, *k)) }))))
        }
        Command::Oh { cartan, element, dim_kv, dim_kw } => {
            let p = prime(cli)?;
            let ks: Vec<i64> = match (cartan, element) {
                (Some(c), None) => serde_json::from_value(read_json(c)?)
                    .map_err(|e| Error::Parse(format!("Cartan data must be an integer array: {e}")))?,
                (None, Some(g)) => cartan_valuations(&matrix(g, context(cli)?)?)?,
                _ => return Err(Error::InvalidInput("give exactly one of --cartan and --element".into())),
            };
            let bound = oh_bound(p, &ks, *dim_kv, *dim_kw)?;
            Ok(Outcome::ok(doc(json!({ "cartan": ks, "dim_kv": dim_kv, "dim_kw": dim_kw, "bound": decimal(bound) }))))
        }
        Command::Kappa { bundle } => {
            let b = ConstantsBundle::from_json(&read_json(bundle)?)?;
            let k = kappa(&b)?;
            Ok(Outcome::ok(doc(json!({ "bundle": b.to_json(), "kappa": decimal(k) }))))
        }
        Command::Bound { bundle, l_f, f_norm, gap, gap_report, n } => {
            let b = ConstantsBundle::from_json(&read_json(bundle)?)?;
            let gap = match (gap, gap_report) {
                (Some(g), None) => *g,
                (None, Some(path)) => {
                    let report = read_json(path)?;
                    let g = report.get("gap").ok_or_else(|| Error::Parse("gap report has no \"gap\"".into()))?;
                    match g {
                        Value::String(s) => parse_real(s)?,
                        Value::Number(x) => x.as_f64().ok_or_else(|| Error::Parse("bad gap".into()))?,
                        _ => return Err(Error::Parse("gap must be a real".into())),
                    }
                }
                _ => return Err(Error::InvalidInput("give exactly one of --gap and --gap-report".into())),
            };
            let k = kappa(&b)?;
            let rhs = theorem1_rhs(k, b.p, b.mixing.alpha, b.d, *l_f, *f_norm, gap)?;
            let eq = equidistribution_bound(&b, *l_f, *n);
            Ok(Outcome::ok(doc(json!({
                "kappa": decimal(k),
                "gap": decimal(gap),
                "l_f": l_f,
                "f_norm": decimal(*f_norm),
                "rhs": decimal(rhs),
                "n": n,
                "equidistribution_bound": decimal(eq.value),
                "test_vector_norm": decimal(eq.test_vector_norm),
                "lf_shift_applied": b.lf_shift_applied,
            }))))
        }
    }
}

fn prob_vector(arg: &str) -> Result<ProbVector, Error> {
    let value = read_json(arg)?;
    let items = value.as_array().ok_or_else(|| Error::Parse("probability vector must be an array".into()))?;
    let weights = items
        .iter()
        .map(|v| match v {
            Value::Number(x) => x.as_f64().ok_or_else(|| Error::Parse("bad number".into())),
            Value::String(s) => parse_real(s),
            _ => Err(Error::Parse("probabilities must be numbers or rational strings".into())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    ProbVector::new(weights)
}
