//! Re-checks the witnesses and certificates in a saved report against the
//! channel embedded in it, using only exact arithmetic.

use serde_json::{json, Value};

use avcdos::channel::{Avc, CostFn, Distribution, StochMatrix};
use avcdos::constrained::{dual_lower_bound, upper_certificate_bound, MaxMinUpperCertificate};
use avcdos::hull::{verify_hull_result, HullIntersection};
use avcdos::linear::verify_farkas;
use avcdos::rational::{dot, Rational};
use avcdos::symmetrize::{build_symmetrizing_system, verify_symmetrizer};

use crate::error::CliError;
use crate::exact::{read_num, read_rows, read_vec};

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

struct Ctx<'a> {
    w: Avc,
    verdict: &'a str,
    params: &'a Value,
}

impl Ctx<'_> {
    fn cost(&self, key: &str) -> Result<CostFn, CliError> {
        CostFn::new(read_vec(&self.params[key], key)?).map_err(|e| bad(format!("{key}: {e}")))
    }

    fn num(&self, key: &str) -> Result<Rational, CliError> {
        read_num(&self.params[key], key)
    }

    fn dist(&self, v: &Value, what: &str) -> Result<Distribution, CliError> {
        Distribution::new(read_vec(v, what)?).map_err(|e| bad(format!("{what}: {e}")))
    }
}

fn stoch(v: &Value, what: &str) -> Result<StochMatrix, CliError> {
    StochMatrix::new(read_rows(v, what)?).map_err(|e| bad(format!("{what}: {e}")))
}

fn is_symmetrizer(w: &Avc, u: &StochMatrix) -> bool {
    verify_symmetrizer(w, u).unwrap_or(false)
}

/// Returns (valid, detail).
fn check(ctx: &Ctx, item: &Value) -> Result<(bool, String), CliError> {
    let w = &ctx.w;
    let v = ctx.verdict;
    let kind = item["kind"]
        .as_str()
        .ok_or_else(|| bad("item without a kind"))?;
    Ok(match kind {
        "symmetrizer" => {
            let u = stoch(&item["u"], "u")?;
            let ok = is_symmetrizer(w, &u) && matches!(v, "Symmetrizable" | "ZeroCapacity");
            (ok, "U symmetrizes the channel".into())
        }
        "farkas" => {
            let y = read_vec(&item["y"], "y")?;
            let ok = verify_farkas(&build_symmetrizing_system(w), &y)
                && matches!(
                    v,
                    "NonSymmetrizable" | "PositiveCapacity" | "NotSymmetrizable" | "NotInDoS"
                );
            (ok, "y certifies that no symmetrizer exists".into())
        }
        "hull_intersections" => {
            let pairs = item["pairs"]
                .as_array()
                .ok_or_else(|| bad("pairs: expected an array"))?;
            let mut ok = true;
            for p in pairs {
                let (x, xh) = pair_indices(p)?;
                let res = HullIntersection::Intersect {
                    q_x: ctx.dist(&p["q_x"], "q_x")?,
                    q_xhat: ctx.dist(&p["q_xhat"], "q_xhat")?,
                    common_point: ctx.dist(&p["common_point"], "common_point")?,
                };
                ok &= verify_hull_result(w, x, xh, &res);
            }
            let n = w.dims().nx;
            if v == "DoSPossible" {
                ok &= pairs.len() == n * (n - 1) / 2;
            }
            (ok, format!("{} hull intersections", pairs.len()))
        }
        "separators" => {
            let pairs = item["pairs"]
                .as_array()
                .ok_or_else(|| bad("pairs: expected an array"))?;
            let mut ok = !pairs.is_empty() && v == "DoSImpossible";
            for p in pairs {
                let (x, xh) = pair_indices(p)?;
                let res = HullIntersection::Disjoint {
                    separator: read_vec(&p["separator"], "separator")?,
                    threshold: read_num(&p["threshold"], "threshold")?,
                    gap: read_num(&p["gap"], "gap")?,
                };
                ok &= verify_hull_result(w, x, xh, &res);
            }
            (ok, format!("{} separating hyperplanes", pairs.len()))
        }
        "cheapest_symmetrizer" => {
            let u = stoch(&item["u"], "u")?;
            let p = ctx.dist(&ctx.params["input_dist"], "input_dist")?;
            let l = ctx.cost("state_cost")?;
            let lambda = ctx.num("lambda")?;
            let cost: Rational = (0..w.dims().nx)
                .map(|x| &p.probs()[x] * dot(u.row(x), l.costs()))
                .sum();
            let ok = is_symmetrizer(w, &u)
                && read_num(&item["cost"], "cost")? == cost
                && match v {
                    "DoSPossible" => cost < lambda,
                    "Boundary" => cost == lambda,
                    _ => false,
                };
            (
                ok,
                "U symmetrizes the channel within the claimed cost".into(),
            )
        }
        "dual_lower_bound" => {
            let y = read_vec(&item["y"], "y")?;
            let p = ctx.dist(&ctx.params["input_dist"], "input_dist")?;
            let l = ctx.cost("state_cost")?;
            let lambda = ctx.num("lambda")?;
            let bound = dual_lower_bound(w, &p, &l, &y);
            let ok = bound.as_ref() == Some(&read_num(&item["bound"], "bound")?)
                && bound.is_some_and(|b| match v {
                    "NoDoS" => b > lambda,
                    "Boundary" => b == lambda,
                    "DoSPossible" => true,
                    _ => false,
                });
            (
                ok,
                "y is dual feasible and bounds every symmetrizer's cost".into(),
            )
        }
        "max_min_lower" => {
            let p = ctx.dist(&item["p"], "p")?;
            let y = read_vec(&item["y"], "y")?;
            let (l, g) = (ctx.cost("state_cost")?, ctx.cost("input_cost")?);
            let (lambda, gamma) = (ctx.num("lambda")?, ctx.num("gamma")?);
            let admissible = g.expected(&p).map_err(|e| bad(e.to_string()))? <= gamma;
            let bound = dual_lower_bound(w, &p, &l, &y);
            let ok = admissible
                && bound.as_ref() == Some(&read_num(&item["bound"], "bound")?)
                && bound.is_some_and(|b| v == "InDoS" || b >= lambda);
            (
                ok,
                "P is admissible and y bounds its symmetrization cost from below".into(),
            )
        }
        "max_min_upper" => {
            let cert = MaxMinUpperCertificate {
                u: stoch(&item["u"], "u")?,
                nu: read_num(&item["nu"], "nu")?,
            };
            let (l, g) = (ctx.cost("state_cost")?, ctx.cost("input_cost")?);
            let (lambda, gamma) = (ctx.num("lambda")?, ctx.num("gamma")?);
            let bound = upper_certificate_bound(w, &l, &g, &gamma, &cert);
            let ok = bound.as_ref() == Some(&read_num(&item["bound"], "bound")?)
                && bound.is_some_and(|b| v == "NotInDoS" || b < lambda);
            (
                ok,
                "(U, ν) bounds the max-min symmetrization cost from above".into(),
            )
        }
        other => return Err(bad(format!("unknown item kind {other:?}"))),
    })
}

fn pair_indices(p: &Value) -> Result<(usize, usize), CliError> {
    let idx = |k: &str| {
        p[k].as_u64()
            .map(|i| i as usize)
            .ok_or_else(|| bad(format!("{k}: expected an index")))
    };
    Ok((idx("x")?, idx("xhat")?))
}

pub fn verify_report(text: &str) -> Result<Value, CliError> {
    let report: Value = serde_json::from_str(text).map_err(|e| bad(format!("report: {e}")))?;
    if report.get("error").is_some() {
        return Err(bad("the file is an error object, not a report"));
    }
    let w = avcdos::io::parse_channel(&report["channel"].to_string())
        .map_err(|e| bad(format!("channel: {e}")))?;
    let verdict = report["verdict"]
        .as_str()
        .ok_or_else(|| bad("report has no verdict"))?;
    let ctx = Ctx {
        w,
        verdict,
        params: &report["query"]["parameters"],
    };
    let mut checks = Vec::new();
    for key in ["witness", "certificate"] {
        if let Some(item) = report.get(key) {
            let (ok, detail) = check(&ctx, item)?;
            checks.push(json!({ "item": key, "kind": item["kind"], "ok": ok, "detail": detail }));
        }
    }
    let verified = checks.iter().all(|c| c["ok"] == json!(true));
    Ok(json!({
        "tool": crate::report::tool(),
        "verification": {
            "mode": report["query"]["mode"],
            "verdict": verdict,
            "verified": verified,
            "checks": checks,
        },
    }))
}
