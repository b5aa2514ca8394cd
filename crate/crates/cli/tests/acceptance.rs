//! Acceptance criteria, one line each. Lines go straight to the stderr
//! handle so they show up without `--nocapture`.

use std::io::Write;
use std::process::Command;
use std::time::{Duration, Instant};

use germlens::directions::DirectionParams;
use germlens::fixtures::{catalog, equality_triples, Hypotheses};
use germlens::geom::{dist, dot, random_in_ball, random_unit, rng_for};
use germlens::volume::invariant_check;
use germlens::Verdict;
use germlens_puiseux::{parse_puiseux, px_compare, PuiseuxNumber, PxOrdering};
use rand::Rng;
use serde_json::{json, Value};

struct Run {
    code: i32,
    report: Value,
    csv: String,
    elapsed: Duration,
}

fn germ_lens(args: &[&str], config: Option<Value>, seed: u64) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_germ-lens"));
    cmd.args(args).arg("--out").arg(dir.path()).arg("--seed").arg(seed.to_string());
    if let Some(cfg) = config {
        let path = dir.path().join("config.json");
        std::fs::write(&path, cfg.to_string()).unwrap();
        cmd.arg("--config").arg(&path);
    }
    let start = Instant::now();
    let out = cmd.output().unwrap();
    let elapsed = start.elapsed();
    let code = out.status.code().unwrap_or(-1);
    let read = |ext: &str| std::fs::read_to_string(dir.path().join(format!("{}.{ext}", args[0])));
    let report = read("json").ok().and_then(|s| serde_json::from_str(&s).ok()).unwrap_or(Value::Null);
    if report.is_null() {
        panic!("{args:?} produced no report: {}", String::from_utf8_lossy(&out.stderr));
    }
    Run { code, report, csv: read("csv").unwrap_or_default(), elapsed }
}

fn role(r: &str) -> Value {
    json!({ "params": { "role": r } })
}

struct Line {
    ok: bool,
    detail: String,
}

fn line(ok: bool, detail: impl Into<String>) -> Line {
    Line { ok, detail: detail.into() }
}

fn under(run: &Run, secs: u64) -> bool {
    run.elapsed < Duration::from_secs(secs)
}

fn c1_horn_directions() -> Line {
    let v = germ_lens(&["dirset", "--fixture", "horn"], None, 0);
    let hv = germ_lens(&["dirset", "--fixture", "horn"], Some(role("hA")), 0);
    let r = &v.report["result"];
    let reps: Vec<Vec<f64>> = serde_json::from_value(r["representatives"].clone()).unwrap();
    let antipodal = reps.len() == 2 && dist(&reps[0], &reps[1].iter().map(|x| -x).collect::<Vec<_>>()) < 0.05;
    let hr = &hv.report["result"];
    let ok = r["dim"] == 0
        && r["clusters"] == 2
        && antipodal
        && hr["dim"] == 1
        && hr["confidence"].as_f64().unwrap() >= 0.8
        && under(&v, 60)
        && under(&hv, 60);
    line(
        ok,
        format!(
            "dim D(V) = {} with {} antipodal clusters, dim D(h(V)) = {} at confidence {}; {:.1}s, {:.1}s",
            r["dim"], r["clusters"], hr["dim"], hr["confidence"], v.elapsed.as_secs_f64(), hv.elapsed.as_secs_f64()
        ),
    )
}

fn c2_oscillation() -> Line {
    let a = germ_lens(&["dirset", "--fixture", "oscillation"], None, 0);
    let ha = germ_lens(&["dirset", "--fixture", "oscillation"], Some(role("hA")), 0);
    let inv = germ_lens(&["invariant", "--fixture", "oscillation"], None, 0);
    let rep = &inv.report["result"]["report"];
    let flagged = rep["hypotheses"]["image_definable"] == false
        && rep["violations"].as_array().unwrap().iter().any(|v| v.as_str().unwrap().contains("image"));
    let ok = a.report["result"]["dim"] == 0
        && ha.report["result"]["dim"] == 1
        && inv.code == 2
        && flagged
        && [&a, &ha, &inv].iter().all(|r| under(r, 60));
    line(
        ok,
        format!(
            "dim D(x-axis) = {}, dim D(graph) = {}, invariant exit {} ({}); {:.1}s",
            a.report["result"]["dim"],
            ha.report["result"]["dim"],
            inv.code,
            inv.report["explanation"].as_str().unwrap_or(""),
            inv.elapsed.as_secs_f64()
        ),
    )
}

fn c3_equality_suite() -> Line {
    let definable = Hypotheses { definable: true, bi_lipschitz: true, image_definable: true };
    let triples = equality_triples();
    let mut failed = Vec::new();
    for t in &triples {
        let r = invariant_check(&t.a, &t.b, &t.map, definable, &DirectionParams::default()).unwrap();
        if !(r.verdict == Verdict::Pass && r.before.dim == t.expected) {
            failed.push(format!("{} ({} -> {}, {:?})", t.name, r.before.dim, r.after.dim, r.violations));
        }
    }
    let passed = triples.len() - failed.len();
    line(triples.len() >= 10 && failed.is_empty(), format!("{passed}/{} triples keep their intersection dimension {failed:?}", triples.len()))
}

fn c4_gauge_fits() -> Line {
    let mut ok = true;
    let mut parts = Vec::new();
    for (fixture, exponent, tol) in [("horn", 2.0, 0.15), ("cusp", 0.5, 0.1)] {
        let run = germ_lens(&["st-fit", "--fixture", fixture], None, 0);
        let fit = &run.report["result"]["fit"];
        let slope = fit["slope"].as_f64().unwrap();
        let cert = &fit["certificate"];
        let clean = cert["relation"] == "included" && cert["counterexamples"].as_array().unwrap().is_empty();
        ok &= run.code == 0 && (slope - exponent).abs() <= tol && clean;
        parts.push(format!("{fixture} exponent {slope:.3} (target {exponent} ± {tol}), certified {clean}"));
    }
    line(ok, parts.join("; "))
}

fn c5_flat_horn() -> Line {
    let run = germ_lens(&["st-fit", "--fixture", "flat-horn"], None, 0);
    let fit = &run.report["result"]["fit"];
    let slope = fit["slope"].as_f64().unwrap();
    line(
        fit["outcome"] == "no_monomial_gauge" && slope <= 0.02,
        format!("outcome {}, fitted exponent {slope:.4}", fit["outcome"]),
    )
}

fn random_rows(n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = rng_for(seed, 0x5a);
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.6..0.6)).collect()).collect()
}

fn c6_sandwich() -> Line {
    let gauges = [json!({"form": "monomial", "c": 0.5, "alpha": 1}), json!({"form": "monomial", "c": 0.3, "alpha": 0.5})];
    let (mut decided, mut outside, mut runs) = (0u64, 0u64, 0);
    for (fixture, n) in [("horn", 3), ("round-cone", 3), ("cusp", 2)] {
        for k in 0..5 {
            for g in &gauges {
                let cfg = json!({
                    "map": { "kind": "linear", "rows": random_rows(n, k * 7 + n as u64) },
                    "params": { "gauge": g, "per_shell": 40, "finest": 6 },
                });
                let run = germ_lens(&["sandwich", "--fixture", fixture], Some(cfg), k);
                let r = &run.report["result"]["report"];
                for side in ["forward", "backward"] {
                    let c = &r[side];
                    decided += c["inside"].as_u64().unwrap() + c["outside"].as_u64().unwrap();
                    outside += c["outside"].as_u64().unwrap();
                }
                runs += 1;
            }
        }
    }
    line(decided >= 10_000 && outside == 0, format!("{runs} map/fixture/gauge cases, {decided} decided samples, {outside} outside"))
}

fn c7_banach() -> Line {
    let mut violations = 0;
    for seed in 0..20u64 {
        let mut rng = rng_for(seed, 0xba);
        let n = rng.random_range(1..=4);
        let count = rng.random_range(5..=40);
        let lip: f64 = rng.random_range(0.1..10.0);
        let c = random_in_ball(n, 1.0, &mut rng);
        let u = random_unit(n, &mut rng);
        let anchors: Vec<Vec<f64>> = (0..count).map(|_| random_in_ball(n, 2.0, &mut rng)).collect();
        let values: Vec<f64> = anchors.iter().map(|a| 0.5 * lip * (dist(a, &c) + dot(a, &u))).collect();
        let cfg = json!({ "params": { "anchors": anchors, "values": values, "lipschitz": lip, "probes": 10_000 } });
        let run = germ_lens(&["extend"], Some(cfg), seed);
        violations += run.report["result"]["violations"].as_array().unwrap().len();
        if run.code != 0 {
            violations += 1;
        }
    }
    line(violations == 0, format!("20 instances, 10^4 probes and pairs each, {violations} violations"))
}

/// Exact share of `S^2` within relative distance `s` of a line and of a plane.
fn line_fraction(s: f64) -> f64 {
    1.0 - (1.0 - s * s).sqrt()
}

/// `int_0^eps r^2 f(r) dr` by composite Simpson.
fn radial_integral(eps: f64, f: impl Fn(f64) -> f64) -> f64 {
    let n = 2000;
    let h = eps / n as f64;
    (0..=n)
        .map(|i| {
            let r = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            w * r * r * f(r)
        })
        .sum::<f64>()
        * h
        / 3.0
}

fn c8_volumes() -> Line {
    let cfg = json!({
        "a": {"kind": "fixture", "name": "line", "role": null},
        "b": {"kind": "fixture", "name": "plane", "role": null},
        "params": {"expect": "decays_to_zero"},
    });
    let vr = germ_lens(&["vol-ratio"], Some(cfg), 0);
    let rep = &vr.report["result"]["report"];
    let slope = rep["slope"].as_f64().unwrap();
    let mut worst: f64 = 0.0;
    for row in rep["rows"].as_array().unwrap() {
        let eps = row["eps"].as_f64().unwrap();
        let oracle = radial_integral(eps, line_fraction) / radial_integral(eps, |r| r);
        let (ratio, ci) = (row["ratio"].as_f64().unwrap(), row["ci"].as_f64().unwrap());
        worst = worst.max((ratio - oracle).abs() / (3.0 * ci).max(0.1 * oracle));
    }
    let ct = germ_lens(&["ctimes", "--fixture", "line"], None, 0);
    let k = ct.report["result"]["report"]["verdict"]["k"].as_f64().unwrap_or(f64::NAN);
    let ok = rep["verdict"]["verdict"] == "decays_to_zero"
        && (slope - 1.0).abs() <= 0.2
        && worst <= 1.0
        && ct.report["result"]["report"]["verdict"]["verdict"] == "comparable"
        && (k / 4.0 - 1.0).abs() <= 0.15
        && under(&vr, 300)
        && under(&ct, 300);
    line(
        ok,
        format!(
            "line/plane slope {slope:.3}, worst oracle deviation {worst:.2} of tolerance, ctimes ratio {k:.3}; {:.1}s, {:.1}s",
            vr.elapsed.as_secs_f64(),
            ct.elapsed.as_secs_f64()
        ),
    )
}

fn c9_ssp_wssp() -> Line {
    let (mut agree, mut counted, mut toys, mut disagree) = (0, 0, Vec::new(), Vec::new());
    for f in catalog() {
        for (r, _) in &f.germs {
            let run = germ_lens(&["ssp", "--fixture", f.name], Some(role(r)), 0);
            let res = &run.report["result"];
            if f.toy {
                toys.push(format!("{}:{r}", f.name));
                continue;
            }
            counted += 1;
            if res["agree"] == true {
                agree += 1;
            } else {
                disagree.push(format!("{}:{r}", f.name));
            }
        }
    }
    line(
        agree == counted && counted > 0,
        format!("{agree}/{counted} germs agree {disagree:?}; toy fixtures not counted: {}", toys.join(", ")),
    )
}

fn c10_puiseux() -> Line {
    let run = germ_lens(&["puiseux"], None, 0);
    let strip = run.report["result"]["vol strip over diagonal"] == "[0, t]";
    let mut rng = rng_for(10, 0);
    let literal = |rng: &mut rand_chacha::ChaCha8Rng| {
        let terms: Vec<String> = (0..rng.random_range(1..=4))
            .map(|_| {
                format!("{}/{}*t^({}/{})", rng.random_range(-9..=9), rng.random_range(1..=4), rng.random_range(0..12), rng.random_range(1..=3))
            })
            .collect();
        parse_puiseux(&terms.join(" + ").replace("+ -", "- ")).unwrap()
    };
    // Truncated arithmetic agrees only below the precision it still trusts.
    let same = |l: &PuiseuxNumber, r: &PuiseuxNumber| {
        let d = l - r;
        match d.reliable_to() {
            None => d.is_zero(),
            Some(e) => d.terms().iter().all(|(x, _)| *x >= e),
        }
    };
    let mut failures = 0;
    for _ in 0..1000 {
        let (x, y, z) = (literal(&mut rng), literal(&mut rng), literal(&mut rng));
        let assoc = same(&(&(&x * &y) * &z), &(&x * &(&y * &z))) && same(&(&(&x + &y) + &z), &(&x + &(&y + &z)));
        let distributive = same(&(&x * &(&y + &z)), &(&(&x * &y) + &(&x * &z)));
        let inverse = x.is_zero() || same(&(&x * &x.inv().unwrap()), &PuiseuxNumber::one());
        if !(assoc && distributive && inverse) {
            failures += 1;
        }
    }
    let eps = PuiseuxNumber::epsilon();
    let infinitesimal = ["1", "1/2", "1/1000", "1/1000000", "1/1000000000000"]
        .iter()
        .all(|q| px_compare(&eps, &parse_puiseux(q).unwrap()) == PxOrdering::Less);
    // Grid squares of side 1/32 inside {0 < y < x < 1}: 32 * 31 / 2 of them.
    let k = 32.0;
    let packing = (k * (k - 1.0) / 2.0) / (k * k);
    let tri = run.report["result"]["vol triangle"] == "[0, 1/2]";
    let ok = strip && failures == 0 && infinitesimal && tri && 0.5 - packing <= 1.0 / 64.0;
    line(ok, format!("strip volume [0, t] {strip}, {failures} field-axiom failures in 1000 triples, eps infinitesimal {infinitesimal}, triangle gap {:.4}", 0.5 - packing))
}

fn strip_timestamp(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        m.remove("timestamp");
    }
    v
}

fn c11_determinism() -> Line {
    let small_vol = json!({ "params": { "samples": 20000, "eps": [0.1, 0.05, 0.02] } });
    let vol_pair = json!({
        "a": {"kind": "fixture", "name": "line", "role": null},
        "b": {"kind": "fixture", "name": "plane", "role": null},
        "params": { "samples": 20000, "eps": [0.1, 0.05, 0.02] },
    });
    let cases: Vec<(Vec<&str>, Option<Value>)> = vec![
        (vec!["dirset", "--fixture", "round-cone"], None),
        (vec!["cone", "--fixture", "horn"], None),
        (vec!["st-fit", "--fixture", "cusp"], None),
        (vec!["st-equiv", "--fixture", "cubic"], None),
        (vec!["sandwich", "--fixture", "shear"], None),
        (vec!["ssp", "--fixture", "plane"], None),
        (vec!["ld-image", "--fixture", "rotation"], None),
        (vec!["vol", "--fixture", "line"], Some(small_vol.clone())),
        (vec!["vol-ratio"], Some(vol_pair)),
        (vec!["ctimes", "--fixture", "line"], Some(small_vol)),
        (vec!["invariant", "--fixture", "shear"], None),
        (vec!["extend", "--fixture", "cusp"], None),
        (vec!["puiseux"], None),
        (vec!["fixtures"], None),
    ];
    let mut differing = Vec::new();
    for (args, cfg) in &cases {
        let first = germ_lens(args, cfg.clone(), 42);
        let mut threaded: Vec<&str> = args.clone();
        threaded.extend(["--threads", "1"]);
        let second = germ_lens(&threaded, cfg.clone(), 42);
        if strip_timestamp(first.report) != strip_timestamp(second.report) || first.csv != second.csv {
            differing.push(args[0]);
        }
    }
    line(differing.is_empty(), format!("{} subcommands rerun on one thread: differing {differing:?}", cases.len()))
}

#[test]
fn acceptance_criteria() {
    let criteria: [(&str, fn() -> Line); 11] = [
        ("direction sets of the horn and its image", c1_horn_directions),
        ("graph of x sin ln|x| breaks the invariant and is flagged", c2_oscillation),
        ("intersection dimension equality suite", c3_equality_suite),
        ("gauge exponents and certificates", c4_gauge_fits),
        ("flat horn has no monomial gauge", c5_flat_horn),
        ("sandwich gauges", c6_sandwich),
        ("extremal Lipschitz extensions", c7_banach),
        ("volume asymptotics", c8_volumes),
        ("strong and weak selection probes agree", c9_ssp_wssp),
        ("exact series arithmetic and volumes", c10_puiseux),
        ("reports are deterministic", c11_determinism),
    ];
    let mut failed = Vec::new();
    let mut err = std::io::stderr();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let l = check();
        let status = if l.ok { "PASS" } else { "FAIL" };
        writeln!(err, "criterion {:>2} {status} {name}: {} [{:.1}s]", i + 1, l.detail, start.elapsed().as_secs_f64()).unwrap();
        if !l.ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
