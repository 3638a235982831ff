use std::io::{Read, Write};
use std::time::Instant;

use num_complex::Complex64;
use num_rational::Ratio;
use serde_json::{json, Value};

use ugpf::cluster::approx_log_z_cluster;
use ugpf::decider::{decide_cug, exact_log_z, threshold_log_w, CugParams, VerdictKind};
use ugpf::exact::{coeffs_to_json, z_brute, z_coeffs_sat, z_coeffs_subgraph, z_subgraph};
use ugpf::instance::{gen_planted, gen_random_regular, instance_value_brute};
use ugpf::interp::roots::empirical_zero_free;
use ugpf::interp::{approx_log_z_interp, ZeroFreeCertificate};
use ugpf::zerofree::{
    check_forward_invariant, constants, maximize_p_bound, phase_w_o, phase_w_u, small_k_csv, solve_small_k_table,
};
use ugpf::{Budget, Error, UgInstance};

use crate::render::{render, Format};
use crate::{
    BenchArgs, Cli, CoeffKind, CoeffsArgs, Command, DecideArgs, DecideMethod, EvalArgs, EvalMethod, GenArgs, Global,
    PhaseArgs, Which, ZerofreeCommand,
};

pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Instance(_) | Error::InvalidParameter(_) | Error::Precondition(_) => 2,
            Error::BudgetExceeded { .. } => 3,
            Error::NoConvergence(_) | Error::Validation(_) => 6,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<ugpf::instance::InstanceError> for Failure {
    fn from(e: ugpf::instance::InstanceError) -> Self {
        Error::from(e).into()
    }
}

type Outcome = Result<u8, Failure>;

pub fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Validate(a) => {
            let inst = load(&a.instance)?;
            emit(g, Format::Json, &shape(&inst))
        }
        Command::Value(a) => {
            let inst = load(&a.instance)?;
            let v = instance_value_brute(&inst, &budget(g))?;
            let report = json!({
                "value": v.to_string(),
                "value_f64": *v.numer() as f64 / *v.denom() as f64,
                "satisfied_edges": (v * Ratio::from_integer(inst.edge_count() as u64)).to_integer(),
            });
            emit(g, Format::Json, &report)
        }
        Command::Eval(a) => eval(g, a),
        Command::Coeffs(a) => coeffs(g, a),
        Command::Decide(a) => decide(g, a),
        Command::Zerofree(z) => zerofree(g, z),
        Command::Phase(a) => phase(g, a),
        Command::Bench(a) => bench(g, a),
    }
}

fn budget(g: &Global) -> Budget {
    let mut b = Budget::default();
    let set = |slot: &mut u64, v: Option<u64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(&mut b.colorings, g.max_colorings);
    set(&mut b.subsets, g.max_subsets);
    set(&mut b.polymers, g.max_polymers);
    set(&mut b.clusters, g.max_clusters);
    set(&mut b.interp_terms, g.max_interp_terms);
    b
}

fn read_input(path: &str) -> Result<String, Failure> {
    let mut text = String::new();
    let res = if path == "-" {
        std::io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|e| Failure::input(format!("cannot read {path}: {e}")))?;
    Ok(text)
}

fn write_output(path: &str, text: &str) -> Result<(), Failure> {
    let res = if path == "-" {
        std::io::stdout().write_all(text.as_bytes())
    } else {
        std::fs::write(path, text)
    };
    res.map_err(|e| Failure::input(format!("cannot write {path}: {e}")))
}

fn load(path: &str) -> Result<UgInstance, Failure> {
    Ok(UgInstance::parse(&read_input(path)?)?)
}

fn emit(g: &Global, default: Format, report: &Value) -> Outcome {
    write_output("-", &render(report, g.format.unwrap_or(default)))?;
    Ok(0)
}

fn shape(inst: &UgInstance) -> Value {
    json!({
        "k": inst.k(),
        "n": inst.n(),
        "edges": inst.edge_count(),
        "max_degree": inst.max_degree(),
        "regular": inst.is_regular(),
    })
}

/// Parses `p/q` or a finite decimal into an exact ratio.
pub fn parse_ratio(text: &str) -> Result<Ratio<u64>, Failure> {
    let bad = || Failure::input(format!("expected a non-negative decimal or p/q, got {text:?}"));
    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: u64 = p.trim().parse().map_err(|_| bad())?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let scale = 10u64.pow(frac.len() as u32);
    let frac: u64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let numer = int.checked_mul(scale).and_then(|x| x.checked_add(frac)).ok_or_else(bad)?;
    Ok(Ratio::new(numer, scale))
}

/// Parses `a`, `bi`, `a+bi` or `a-bi`.
pub fn parse_complex(text: &str) -> Result<Complex64, Failure> {
    let bad = || Failure::input(format!("expected a complex number like 1.5+0.5i, got {text:?}"));
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0));
    };
    // Split at the last sign that is not the leading one or part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => s.parse().map_err(|_| bad())?,
    };
    Ok(Complex64::new(re.parse().map_err(|_| bad())?, im))
}

fn gen(a: &GenArgs) -> Outcome {
    let text = if a.planted {
        let eps = parse_ratio(&a.eps)?;
        let p = gen_planted(a.n, a.delta, a.k, eps, a.seed)?;
        eprintln!("planted value: {}", p.planted_value);
        p.instance.to_json()
    } else {
        gen_random_regular(a.n, a.delta, a.k, a.seed)?.to_json()
    };
    // Files hold exactly the canonical serialization; stdout gets a newline.
    let text = if a.out == "-" { format!("{text}\n") } else { text };
    write_output(&a.out, &text)?;
    Ok(0)
}

fn log_value(z: Complex64) -> Value {
    json!({ "log_abs": z.norm().ln(), "phase": z.arg() })
}

/// Zero-free radius actually used for interpolation at `w*`: the caller's
/// `eta`, or nine tenths of the distance from the roots of `Z` to
/// `[1, w*]`, capped below `|w* − 1|` so the Taylor degree stays bounded.
fn interp_eta(inst: &UgInstance, w_star: f64, eta: Option<f64>, b: &Budget) -> Result<(f64, ZeroFreeCertificate), Failure> {
    if let Some(e) = eta {
        return Ok((e, ZeroFreeCertificate::AssumedByTheorem));
    }
    let found = empirical_zero_free(inst, w_star, b)?;
    if !(found > 0.0) {
        return Err(Error::Precondition("Z has a root on the interpolation segment".into()).into());
    }
    let s = (w_star - 1.0).abs();
    let eta = if s > 0.0 { (0.9 * found).min(0.99 * s) } else { 0.9 * found.min(1.0) };
    Ok((eta, ZeroFreeCertificate::EmpiricalRoots))
}

fn eval(g: &Global, a: &EvalArgs) -> Outcome {
    let inst = load(&a.instance)?;
    let w = parse_complex(&a.w)?;
    let b = budget(g);
    let mut code = 0;
    let report = match a.method {
        EvalMethod::Brute | EvalMethod::Subgraph => {
            let z = if a.method == EvalMethod::Brute { z_brute(&inst, w, &b)? } else { z_subgraph(&inst, w, &b)? };
            json!({
                "method": if a.method == EvalMethod::Brute { "brute" } else { "subgraph" },
                "w": [w.re, w.im],
                "z": [z.re, z.im],
                "log_z": log_value(z),
            })
        }
        EvalMethod::Cluster => {
            let r = approx_log_z_cluster(&inst, w, a.alpha, &b)?;
            if a.strict && !(r.conditions_verified && r.bound_meets_alpha) {
                code = 4;
            }
            json!({ "method": "cluster", "w": [w.re, w.im], "result": r })
        }
        EvalMethod::Interp => {
            if w.im != 0.0 {
                return Err(Failure::input("interpolation runs along the real segment [1, w]; w must be real"));
            }
            let (eta, cert) = interp_eta(&inst, w.re, a.eta, &b)?;
            let r = approx_log_z_interp(&inst, w.re, eta, a.alpha, cert, &b)?;
            json!({ "method": "interp", "w": [w.re, w.im], "eta": eta, "result": r })
        }
    };
    emit(g, Format::Json, &report)?;
    if code == 4 {
        eprintln!("cluster-expansion hypotheses not verified for this instance and w");
    }
    Ok(code)
}

fn coeffs(g: &Global, a: &CoeffsArgs) -> Outcome {
    let inst = load(&a.instance)?;
    let b = budget(g);
    let c = match a.kind {
        CoeffKind::Sat => z_coeffs_sat(&inst, &b)?,
        CoeffKind::Subgraph => z_coeffs_subgraph(&inst, inst.edge_count() + 1, &b)?,
    };
    match g.format.unwrap_or(Format::Json) {
        Format::Json => write_output("-", &format!("{}\n", coeffs_to_json(&c)))?,
        fmt => {
            let rows: Vec<Value> = c.iter().enumerate().map(|(i, x)| json!({"degree": i, "coeff": x.to_string()})).collect();
            write_output("-", &render(&Value::Array(rows), fmt))?;
        }
    }
    Ok(0)
}

fn decide(g: &Global, a: &DecideArgs) -> Outcome {
    let inst = load(&a.instance)?;
    let b = budget(g);
    let params = CugParams::new(a.f, a.eps, a.delta, inst.k())?;
    let alpha = if a.method == DecideMethod::Exact { 0.0 } else { a.alpha };
    let threshold = threshold_log_w(inst.n(), inst.edge_count(), &params, alpha)?;
    let w = a.w.unwrap_or_else(|| if threshold > 0.0 { (1.5 * threshold).exp() } else { std::f64::consts::E });
    let (log_xi, method) = match a.method {
        DecideMethod::Exact => (exact_log_z(&inst, w, &b)?, "exact"),
        DecideMethod::Cluster => (approx_log_z_cluster(&inst, Complex64::new(w, 0.0), alpha, &b)?.log_xi.log_abs, "cluster"),
        DecideMethod::Interp => {
            let (eta, cert) = interp_eta(&inst, w, a.eta, &b)?;
            (approx_log_z_interp(&inst, w, eta, alpha, cert, &b)?.log_xi.log_abs, "interp")
        }
    };
    let v = decide_cug(&inst, &params, w, log_xi, alpha, method)?;
    emit(g, Format::Json, &serde_json::to_value(&v).expect("verdict serializes"))?;
    Ok(match v.verdict {
        VerdictKind::ManySatisfying => 0,
        VerdictKind::AllLowValue => 1,
        VerdictKind::Inconclusive => 5,
    })
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn zerofree(g: &Global, z: &ZerofreeCommand) -> Outcome {
    match z {
        ZerofreeCommand::Constants(a) => emit(g, Format::Json, &to_value(&constants(a.k, a.delta)?)),
        ZerofreeCommand::Table(a) => {
            if a.k_min < 3 || a.k_max < a.k_min {
                return Err(Failure::input("need 3 ≤ k-min ≤ k-max"));
            }
            let ks: Vec<usize> = (a.k_min..=a.k_max).collect();
            match g.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    write_output("-", &small_k_csv(&ks)?)?;
                    Ok(0)
                }
                fmt => {
                    let rows = ks.iter().map(|&k| solve_small_k_table(k).map(|r| to_value(&r))).collect::<Result<Vec<_>, _>>()?;
                    write_output("-", &render(&Value::Array(rows), fmt))?;
                    Ok(0)
                }
            }
        }
        ZerofreeCommand::Pbound(a) => {
            let r = maximize_p_bound(a.k, a.delta, a.d)?;
            emit(g, Format::Json, &to_value(&r))?;
            Ok(if r.passed { 0 } else { 6 })
        }
        ZerofreeCommand::Invariant(a) => {
            let r = check_forward_invariant(a.k, a.delta, a.d, a.samples, a.seed)?;
            emit(g, Format::Json, &to_value(&r))?;
            Ok(if r.passed() { 0 } else { 6 })
        }
    }
}

fn phase(g: &Global, a: &PhaseArgs) -> Outcome {
    let mut report = serde_json::Map::new();
    report.insert("k".into(), json!(a.k));
    report.insert("delta".into(), json!(a.delta));
    if matches!(a.which, Which::U | Which::Both) {
        report.insert("w_u".into(), to_value(&phase_w_u(a.k, a.delta)?));
    }
    if matches!(a.which, Which::O | Which::Both) {
        report.insert("w_o".into(), json!(phase_w_o(a.k, a.delta)?));
    }
    emit(g, Format::Json, &Value::Object(report))
}

fn bench(g: &Global, a: &BenchArgs) -> Outcome {
    let b = budget(g);
    let mut rows = Vec::new();
    let mut n = a.delta + 1;
    while n <= a.max_n {
        if n * a.delta % 2 == 0 {
            let inst = gen_random_regular(n, a.delta, a.k, a.seed)?;
            let w = Complex64::new(1.05, 0.0);
            let mut time = |name: &str, f: &dyn Fn() -> Result<(), Error>| -> Result<(), Failure> {
                let start = Instant::now();
                let outcome = f();
                let secs = start.elapsed().as_secs_f64();
                let status = match outcome {
                    Ok(()) => "ok".to_string(),
                    Err(Error::BudgetExceeded { .. }) => "budget".to_string(),
                    Err(e) => return Err(e.into()),
                };
                rows.push(json!({"n": n, "edges": inst.edge_count(), "method": name, "seconds": secs, "status": status}));
                Ok(())
            };
            time("brute", &|| z_brute(&inst, w, &b).map(drop))?;
            time("subgraph", &|| z_subgraph(&inst, w, &b).map(drop))?;
            time("cluster", &|| approx_log_z_cluster(&inst, w, 0.1, &b).map(drop))?;
        }
        n += 1;
    }
    write_output("-", &render(&Value::Array(rows), g.format.unwrap_or(Format::Csv)))?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!(parse_ratio("0").ok().unwrap(), Ratio::new(0, 1));
        assert_eq!(parse_ratio("0.25").ok().unwrap(), Ratio::new(1, 4));
        assert_eq!(parse_ratio("3/9").ok().unwrap(), Ratio::new(1, 3));
        assert_eq!(parse_ratio(".5").ok().unwrap(), Ratio::new(1, 2));
        assert!(parse_ratio("1/0").is_err());
        assert!(parse_ratio("-0.1").is_err());
        assert!(parse_ratio("abc").is_err());
    }

    #[test]
    fn complex_numbers() {
        let c = |s: &str| parse_complex(s).ok().unwrap();
        assert_eq!(c("2"), Complex64::new(2.0, 0.0));
        assert_eq!(c("1.5+0.5i"), Complex64::new(1.5, 0.5));
        assert_eq!(c("1-2i"), Complex64::new(1.0, -2.0));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("1e-3+2e+1i"), Complex64::new(1e-3, 20.0));
        assert_eq!(c("-0.5i"), Complex64::new(0.0, -0.5));
        assert!(parse_complex("1+xi").is_err());
    }
}
