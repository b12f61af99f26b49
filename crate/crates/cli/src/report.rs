//! Builds analysis reports as JSON values; text output is rendered from
//! the same value so both formats carry identical verdicts.

use std::fmt::Write as _;
use std::time::Instant;

use clap::ValueEnum;
use serde_json::{json, Map, Value};

use avcdos::capacity::{avc_capacity_avg_with, CapacityError, CapacityOutcome};
use avcdos::channel::{Avc, CostFn, Distribution};
use avcdos::constrained::{
    classify_state_constrained, in_dos_constrained, lambda0_dual, max_min_lambda,
    max_min_upper_certificate, ConstraintSpec, StateClassification,
};
use avcdos::hull::{is_dos_full_knowledge, HullIntersection};
use avcdos::io::channel_to_json;
use avcdos::rational::{ExtRational, Rational};
use avcdos::symmetrize::{is_symmetrizable, symmetrizability_margin, SymmetrizabilityDecision};

use crate::error::CliError;
use crate::exact::{matrix, num, vec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Symmetrizability (average-error capacity zero or not).
    Partial,
    /// Pairwise hull intersection (max-error capacity zero or not).
    Full,
    /// State-cost constrained jammer at a fixed input distribution.
    State,
    /// State-cost jammer against an input-cost constrained transmitter.
    InputState,
    /// Average-error capacity estimate.
    Capacity,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Partial => "partial",
            Mode::Full => "full",
            Mode::State => "state",
            Mode::InputState => "input-state",
            Mode::Capacity => "capacity",
        }
    }
}

pub struct Params {
    pub state_cost: Option<CostFn>,
    pub input_cost: Option<CostFn>,
    pub lambda: Option<Rational>,
    pub gamma: Option<Rational>,
    pub input_dist: Option<Distribution>,
    pub witness: bool,
    pub certificate: bool,
    pub full_report: bool,
    pub tol: f64,
    pub max_iter: usize,
}

pub fn tool() -> Value {
    json!({ "name": "avcdos", "version": env!("CARGO_PKG_VERSION") })
}

fn ext(v: &ExtRational) -> Value {
    match v.finite() {
        Some(r) => num(r),
        None => json!("inf"),
    }
}

fn ext_text(v: &ExtRational) -> String {
    match v.finite() {
        Some(r) => avcdos::rational::format_rational(r),
        None => "inf".into(),
    }
}

/// Mode-specific part of a report.
struct Body {
    verdict: &'static str,
    summary: String,
    details: Value,
    witness: Option<Value>,
    certificate: Option<Value>,
}

fn need<'a, T>(v: &'a Option<T>, flag: &str, mode: Mode) -> Result<&'a T, CliError> {
    v.as_ref()
        .ok_or_else(|| CliError::Input(format!("--mode {} requires {flag}", mode.name())))
}

fn partial(w: &Avc, p: &Params) -> Body {
    let dec = is_symmetrizable(w);
    let sym = dec.is_symmetrizable();
    Body {
        verdict: if sym {
            "Symmetrizable"
        } else {
            "NonSymmetrizable"
        },
        summary: if sym {
            "DoS possible: the channel is symmetrizable, so its average-error capacity is 0".into()
        } else {
            "DoS impossible: no symmetrizer exists, so the average-error capacity is positive"
                .into()
        },
        details: json!({
            "dos_possible": sym,
            "symmetrizability_margin": num(&symmetrizability_margin(w)),
        }),
        witness: dec
            .witness()
            .filter(|_| p.witness)
            .map(|u| json!({ "kind": "symmetrizer", "u": matrix(u) })),
        certificate: dec
            .certificate()
            .filter(|_| p.certificate)
            .map(|y| json!({ "kind": "farkas", "y": vec(y) })),
    }
}

fn full(w: &Avc, p: &Params) -> Body {
    let rep = is_dos_full_knowledge(w, p.full_report);
    let pairs: Vec<Value> = rep
        .pairs
        .iter()
        .map(
            |pr| json!({ "x": pr.x, "xhat": pr.xhat, "hulls_intersect": !pr.result.is_disjoint() }),
        )
        .collect();
    let disjoint = rep
        .first_disjoint()
        .map(|pr| json!({ "x": pr.x, "xhat": pr.xhat }));
    let summary = match rep.first_disjoint() {
        Some(pr) => format!(
            "DoS impossible (C_max > 0): the output hulls of inputs {} and {} are disjoint",
            pr.x, pr.xhat
        ),
        None => "DoS possible (C_max = 0): the output hulls of every input pair intersect".into(),
    };
    let mut meets = Vec::new();
    let mut separators = Vec::new();
    for pr in &rep.pairs {
        match &pr.result {
            HullIntersection::Intersect {
                q_x,
                q_xhat,
                common_point,
            } => meets.push(json!({
                "x": pr.x,
                "xhat": pr.xhat,
                "q_x": vec(q_x.probs()),
                "q_xhat": vec(q_xhat.probs()),
                "common_point": vec(common_point.probs()),
            })),
            HullIntersection::Disjoint {
                separator,
                threshold,
                gap,
            } => separators.push(json!({
                "x": pr.x,
                "xhat": pr.xhat,
                "separator": vec(separator),
                "threshold": num(threshold),
                "gap": num(gap),
            })),
        }
    }
    Body {
        verdict: if rep.dos_possible {
            "DoSPossible"
        } else {
            "DoSImpossible"
        },
        summary,
        details: json!({ "dos_possible": rep.dos_possible, "pairs": pairs, "disjoint_pair": disjoint }),
        witness: (p.witness && !meets.is_empty())
            .then(|| json!({ "kind": "hull_intersections", "pairs": meets })),
        certificate: (p.certificate && !separators.is_empty())
            .then(|| json!({ "kind": "separators", "pairs": separators })),
    }
}

fn state(w: &Avc, p: &Params) -> Result<Body, CliError> {
    let dist = need(&p.input_dist, "--input-dist", Mode::State)?;
    let l = need(&p.state_cost, "--state-cost", Mode::State)?;
    let lambda = need(&p.lambda, "--lambda", Mode::State)?;
    let spec = ConstraintSpec::state_only(l.clone(), lambda.clone())
        .map_err(|e| CliError::Input(e.to_string()))?;
    let v =
        classify_state_constrained(w, dist, &spec).map_err(|e| CliError::Input(e.to_string()))?;
    let (l0, lam) = (
        ext_text(&v.lambda0),
        avcdos::rational::format_rational(lambda),
    );
    let (verdict, summary) = match v.classification {
        StateClassification::DoSPossible => (
            "DoSPossible",
            format!("DoS possible: the cheapest symmetrizer costs {l0} < Λ = {lam}"),
        ),
        StateClassification::NoDoS => (
            "NoDoS",
            format!("DoS impossible: every symmetrizer costs at least {l0} > Λ = {lam}"),
        ),
        StateClassification::Boundary => (
            "Boundary",
            format!("Boundary: the cheapest symmetrizer costs exactly Λ = {lam}; this case is left open"),
        ),
        StateClassification::NotSymmetrizable => (
            "NotSymmetrizable",
            "DoS impossible: the channel is not symmetrizable at any cost".into(),
        ),
    };
    let witness = v.witness_u.as_ref().filter(|_| p.witness).map(
        |u| json!({ "kind": "cheapest_symmetrizer", "u": matrix(u), "cost": ext(&v.lambda0) }),
    );
    let certificate = if !p.certificate {
        None
    } else if v.classification == StateClassification::NotSymmetrizable {
        is_symmetrizable(w)
            .certificate()
            .map(|y| json!({ "kind": "farkas", "y": vec(y) }))
    } else {
        lambda0_dual(w, dist, l)
            .map_err(|e| CliError::Input(e.to_string()))?
            .map(|y| json!({ "kind": "dual_lower_bound", "y": vec(&y), "bound": ext(&v.lambda0) }))
    };
    Ok(Body {
        verdict,
        summary,
        details: json!({ "lambda0": ext(&v.lambda0), "lambda": num(lambda) }),
        witness,
        certificate,
    })
}

fn input_state(w: &Avc, p: &Params) -> Result<Body, CliError> {
    let mode = Mode::InputState;
    let l = need(&p.state_cost, "--state-cost", mode)?;
    let g = need(&p.input_cost, "--input-cost", mode)?;
    let lambda = need(&p.lambda, "--lambda", mode)?;
    let gamma = need(&p.gamma, "--gamma", mode)?;
    let spec = ConstraintSpec::with_input(l.clone(), g.clone(), lambda.clone(), gamma.clone())
        .map_err(|e| CliError::Input(e.to_string()))?;
    let res = in_dos_constrained(w, &spec).map_err(|e| CliError::Input(e.to_string()))?;
    let (value, lam) = (
        ext_text(&res.max_value),
        avcdos::rational::format_rational(lambda),
    );
    let summary = match (res.in_dos, res.max_value.is_finite()) {
        (true, _) => format!("DoS possible: max over admissible P of the symmetrization cost is {value} < Λ = {lam}"),
        (false, true) => format!("Outside the DoS set: max over admissible P of the symmetrization cost is {value} ≥ Λ = {lam}"),
        (false, false) => "Outside the DoS set: the channel is not symmetrizable at any cost".into(),
    };
    let mut witness = None;
    let mut certificate = None;
    if p.witness && res.max_value.is_finite() {
        let mm = max_min_lambda(w, l, g, gamma).map_err(|e| CliError::Input(e.to_string()))?;
        if let (Some(pd), Some(y)) = (&mm.optimal_p, &mm.dual_y) {
            witness = Some(json!({
                "kind": "max_min_lower",
                "p": vec(pd.probs()),
                "y": vec(y),
                "bound": ext(&mm.value),
            }));
        }
    }
    if p.certificate {
        certificate = match max_min_upper_certificate(w, l, g, gamma)
            .map_err(|e| CliError::Input(e.to_string()))?
        {
            Some(c) => Some(json!({
                "kind": "max_min_upper",
                "u": matrix(&c.u),
                "nu": num(&c.nu),
                "bound": ext(&res.max_value),
            })),
            None => is_symmetrizable(w)
                .certificate()
                .map(|y| json!({ "kind": "farkas", "y": vec(y) })),
        };
    }
    Ok(Body {
        verdict: if res.in_dos { "InDoS" } else { "NotInDoS" },
        summary,
        details: json!({
            "in_dos": res.in_dos,
            "max_min_lambda": ext(&res.max_value),
            "lambda": num(lambda),
            "gamma": num(gamma),
            "optimal_p": res.optimal_p.as_ref().map(|d| vec(d.probs())),
        }),
        witness,
        certificate,
    })
}

fn capacity(w: &Avc, p: &Params) -> Result<Body, CliError> {
    let outcome = avc_capacity_avg_with(w, p.tol, p.max_iter).map_err(|e| match e {
        CapacityError::InvalidTolerance(_) | CapacityError::NonStochastic(_) => {
            CliError::Input(e.to_string())
        }
        CapacityError::MaxIterExceeded { .. } | CapacityError::ToleranceNotReached { .. } => {
            CliError::Cap(e.to_string())
        }
    })?;
    let dec = is_symmetrizable(w);
    Ok(match outcome {
        CapacityOutcome::ExactZero => Body {
            verdict: "ZeroCapacity",
            summary: "Average-error capacity is exactly 0 (symmetrizable channel)".into(),
            details: json!({ "exact_zero": true, "estimate": null }),
            witness: dec
                .witness()
                .filter(|_| p.witness)
                .map(|u| json!({ "kind": "symmetrizer", "u": matrix(u) })),
            certificate: None,
        },
        CapacityOutcome::Estimate(e) => Body {
            verdict: "PositiveCapacity",
            summary: format!(
                "Average-error capacity is positive: {:.6} bits per use, within [{:.6}, {:.6}]",
                e.value, e.lower_bound, e.upper_bound
            ),
            details: json!({ "exact_zero": false, "estimate": e }),
            witness: None,
            certificate: match (&dec, p.certificate) {
                (SymmetrizabilityDecision::NonSymmetrizable { certificate }, true) => {
                    Some(json!({ "kind": "farkas", "y": vec(certificate) }))
                }
                _ => None,
            },
        },
    })
}

fn params_json(mode: Mode, p: &Params) -> Value {
    let mut m = Map::new();
    let mut put = |k: &str, v: Option<Value>| {
        if let Some(v) = v {
            m.insert(k.into(), v);
        }
    };
    put("state_cost", p.state_cost.as_ref().map(|c| vec(c.costs())));
    put("input_cost", p.input_cost.as_ref().map(|c| vec(c.costs())));
    put("lambda", p.lambda.as_ref().map(num));
    put("gamma", p.gamma.as_ref().map(num));
    put("input_dist", p.input_dist.as_ref().map(|d| vec(d.probs())));
    if mode == Mode::Capacity {
        put("tol", Some(json!(p.tol.to_string())));
        put("max_iter", Some(json!(p.max_iter)));
    }
    put("witness", Some(json!(p.witness)));
    put("certificate", Some(json!(p.certificate)));
    put("full_report", Some(json!(p.full_report)));
    Value::Object(m)
}

pub fn analyze(
    w: &Avc,
    mode: Mode,
    params: &Params,
    channel_file: &str,
) -> Result<Value, CliError> {
    let start = Instant::now();
    let body = match mode {
        Mode::Partial => partial(w, params),
        Mode::Full => full(w, params),
        Mode::State => state(w, params)?,
        Mode::InputState => input_state(w, params)?,
        Mode::Capacity => capacity(w, params)?,
    };
    let d = w.dims();
    let mut report = json!({
        "tool": tool(),
        "query": { "mode": mode.name(), "channel_file": channel_file, "parameters": params_json(mode, params) },
        "channel": serde_json::from_str::<Value>(&channel_to_json(w)).expect("channel JSON"),
        "dims": { "X": d.nx, "S": d.ns, "Y": d.ny },
        "verdict": body.verdict,
        "summary": body.summary,
        "details": body.details,
    });
    if let Some(v) = body.witness {
        report["witness"] = v;
    }
    if let Some(v) = body.certificate {
        report["certificate"] = v;
    }
    report["timing_us"] = json!(start.elapsed().as_micros() as u64);
    debug_assert!(
        crate::exact::no_floats(&report),
        "float outside the capacity estimate"
    );
    Ok(report)
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn render_text(r: &Value) -> String {
    let mut out = String::new();
    let q = &r["query"];
    let d = &r["dims"];
    let _ = writeln!(out, "mode: {}", compact(&q["mode"]));
    let _ = writeln!(
        out,
        "channel: {} (X={}, S={}, Y={})",
        compact(&q["channel_file"]),
        d["X"],
        d["S"],
        d["Y"]
    );
    let _ = writeln!(out, "verdict: {}", compact(&r["verdict"]));
    let _ = writeln!(out, "{}", compact(&r["summary"]));
    if let Some(details) = r["details"].as_object() {
        for (k, v) in details {
            let _ = writeln!(out, "  {k}: {}", compact(v));
        }
    }
    for key in ["witness", "certificate"] {
        if let Some(v) = r.get(key) {
            let _ = writeln!(out, "{key} ({}): {}", compact(&v["kind"]), v);
        }
    }
    let _ = writeln!(out, "time: {} us", r["timing_us"]);
    out
}
