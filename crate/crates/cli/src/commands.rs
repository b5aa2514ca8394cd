//! One function per subcommand, each returning a report and a data table.

use germlens::directions::{direction_set_estimate, tangent_cone, DirectionParams, DirectionSample};
use germlens::fixtures::{catalog, fixture, Fixture, Hypotheses};
use germlens::geom::{dist, mix_seed, norm, random_in_ball, rng_for, Point};
use germlens::germ::GermKind;
use germlens::lipschitz::{banach_extension, constants_estimate};
use germlens::seatangle::{gauge_fit, sandwich_check, st_equivalence_search, FitOutcome, InclusionParams, Relation};
use germlens::ssp::{ld_image_check, ssp_pair, SspConfig};
use germlens::volume::{
    ctimes_check, default_eps_schedule, invariant_check, ratio_curve, RatioReport, RatioVerdict, VolParams,
    VolumeEstimator,
};
use germlens::{Budget, Gauge, GermSet, LipschitzMap, Schedule, Verdict};
use germlens_puiseux::{
    parse_puiseux, px_compare, px_norm, px_vol_cell, px_vol_scaling_check, CellForm2D, PuiseuxNumber, PxPoly,
};
use serde_json::{json, Value};

use crate::config::{Command, ExperimentConfig, Expect, GaugeSpec};
use crate::error::{CliError, Result};
use crate::report::{Report, Table};

/// Roles tried, in order, for the second germ of a fixture.
const SECOND_ROLES: [&str; 3] = ["B", "LD", "hA"];

pub fn run(cfg: &ExperimentConfig) -> Result<(Report, Table)> {
    cfg.validate()?;
    let cmd = cfg.subcommand.ok_or_else(|| CliError::Invalid("no subcommand given".into()))?;
    let ctx = Context::new(cfg)?;
    let out = match cmd {
        Command::Dirset => dirset(&ctx),
        Command::Cone => cone(&ctx),
        Command::StFit => st_fit(&ctx),
        Command::StEquiv => st_equiv(&ctx),
        Command::Sandwich => sandwich(&ctx),
        Command::Ssp => ssp(&ctx),
        Command::LdImage => ld_image(&ctx),
        Command::Vol => vol(&ctx),
        Command::VolRatio => vol_ratio(&ctx),
        Command::Ctimes => ctimes(&ctx),
        Command::Invariant => invariant(&ctx),
        Command::Extend => extend(&ctx),
        Command::Puiseux => puiseux(&ctx),
        Command::Fixtures => fixtures(&ctx),
    }?;
    let report = Report {
        subcommand: cmd,
        config: cfg.clone(),
        operations: out.operations,
        verdict: out.verdict,
        explanation: out.explanation,
        notes: out.notes,
        result: out.result,
    };
    Ok((report, out.table))
}

struct Outcome {
    operations: Vec<&'static str>,
    verdict: Verdict,
    explanation: Option<String>,
    notes: Vec<String>,
    result: Value,
    table: Table,
}

impl Outcome {
    fn new(operations: Vec<&'static str>, verdict: Verdict, result: Value, table: Table) -> Self {
        Outcome { operations, verdict, explanation: None, notes: Vec::new(), result, table }
    }

    fn explain(mut self, why: impl Into<String>) -> Self {
        self.explanation = Some(why.into());
        self
    }
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    fixture: Option<Fixture>,
}

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn coords(p: &[f64]) -> Vec<String> {
    p.iter().map(|v| fmt(*v)).collect()
}

fn coord_header(prefix: &[&str], n: usize, suffix: &[&str]) -> Table {
    let mut h: Vec<String> = prefix.iter().map(|s| s.to_string()).collect();
    h.extend((1..=n).map(|i| format!("x{i}")));
    h.extend(suffix.iter().map(|s| s.to_string()));
    Table::new(h)
}

impl<'a> Context<'a> {
    fn new(cfg: &'a ExperimentConfig) -> Result<Self> {
        let fixture = cfg.fixture.as_deref().map(fixture).transpose()?;
        Ok(Context { cfg, fixture })
    }

    fn seed(&self) -> u64 {
        self.cfg.seed
    }

    fn role_a(&self) -> &str {
        self.cfg.params.role.as_deref().unwrap_or("A")
    }

    fn germ_a(&self) -> Result<GermSet> {
        if let Some(spec) = &self.cfg.a {
            return Ok(spec.build()?);
        }
        let f = self.fixture.as_ref().ok_or_else(|| CliError::Invalid("need a fixture or an inline germ a".into()))?;
        Ok(f.germ(self.role_a())?.clone())
    }

    fn germ_b(&self) -> Result<Option<GermSet>> {
        if let Some(spec) = &self.cfg.b {
            return Ok(Some(spec.build()?));
        }
        let Some(f) = &self.fixture else { return Ok(None) };
        if let Some(role) = &self.cfg.params.role_b {
            return Ok(Some(f.germ(role)?.clone()));
        }
        Ok(SECOND_ROLES.iter().find_map(|r| f.germ(r).ok()).cloned())
    }

    fn need_b(&self) -> Result<GermSet> {
        self.germ_b()?.ok_or_else(|| CliError::Invalid("need a second germ b (inline or a fixture role)".into()))
    }

    fn map(&self) -> Result<Option<LipschitzMap>> {
        if let Some(spec) = &self.cfg.map {
            return Ok(Some(spec.build()?));
        }
        Ok(self.fixture.as_ref().and_then(|f| f.map.clone()))
    }

    fn need_map(&self) -> Result<LipschitzMap> {
        self.map()?.ok_or_else(|| CliError::Invalid("need a map (inline or from the fixture)".into()))
    }

    fn schedule(&self) -> Schedule {
        self.cfg.params.schedule.or(self.fixture.as_ref().map(|f| f.schedule)).unwrap_or_default()
    }

    fn budget(&self) -> Budget {
        self.cfg.params.budget.map_or_else(Budget::default, Budget)
    }

    fn directions(&self) -> DirectionParams {
        let p = &self.cfg.params;
        let d = DirectionParams::default();
        DirectionParams {
            schedule: self.schedule(),
            per_shell: p.per_shell.unwrap_or(d.per_shell),
            eta: p.eta.unwrap_or(d.eta),
            active_shells: p.active_shells.unwrap_or(d.active_shells),
            seed: self.seed(),
        }
    }

    fn inclusion(&self) -> InclusionParams {
        let p = &self.cfg.params;
        let d = InclusionParams::default();
        InclusionParams {
            schedule: self.schedule(),
            per_shell: p.per_shell.unwrap_or(d.per_shell),
            finest: p.finest.unwrap_or(d.finest),
            budget: self.budget(),
            seed: self.seed(),
        }
    }

    fn ssp(&self) -> SspConfig {
        let p = &self.cfg.params;
        let d = SspConfig::default();
        SspConfig {
            eps_grid: p.eps_grid.clone().unwrap_or(d.eps_grid),
            schedule: self.schedule(),
            tail: p.tail.unwrap_or(d.tail),
            probes_per_cell: p.probes_per_cell.unwrap_or(d.probes_per_cell),
            max_directions: p.max_directions.unwrap_or(d.max_directions),
            budget: self.budget(),
            seed: self.seed(),
        }
    }

    fn volume(&self) -> VolParams {
        let p = &self.cfg.params;
        let d = VolParams::default();
        VolParams {
            samples: p.samples.unwrap_or(d.samples),
            budget: p.budget.map_or(d.budget, Budget),
            importance: p.importance.unwrap_or(d.importance),
            seed: self.seed(),
        }
    }

    fn eps(&self) -> Vec<f64> {
        self.cfg.params.eps.clone().unwrap_or_else(default_eps_schedule)
    }

    fn gauge(&self, default: GaugeSpec) -> Result<Gauge> {
        self.cfg.params.gauge.unwrap_or(default).build()
    }

    fn truth(&self, key: &str) -> Option<Value> {
        self.fixture.as_ref().and_then(|f| f.truth(key).cloned())
    }
}

const LINEAR: GaugeSpec = GaugeSpec::Monomial { c: 1.0, alpha: 1.0 };

fn sample_table(d: &DirectionSample) -> Table {
    let mut t = coord_header(&["shell", "radius", "active", "cluster"], d.dim, &[]);
    for i in 0..d.points.len() {
        let mut row = vec![
            d.shell[i].to_string(),
            fmt(d.radii[i]),
            d.active[i].to_string(),
            d.clusters[i].map_or(String::new(), |c| c.to_string()),
        ];
        row.extend(coords(&d.points[i]));
        t.push(row);
    }
    t
}

fn dirset(ctx: &Context) -> Result<Outcome> {
    let a = ctx.germ_a()?;
    let p = ctx.directions();
    let d = direction_set_estimate(&a, &p)?;
    let expected = ctx.truth(&format!("dim_D_{}", ctx.role_a())).and_then(|v| v.as_i64());
    let result = json!({
        "germ": a.name,
        "params": p,
        "dim": d.estimate.dim,
        "confidence": d.estimate.confidence,
        "low_confidence": d.estimate.low_confidence,
        "clusters": d.n_clusters,
        "representatives": d.representatives(),
        "drift": d.drift,
        "unstable": d.unstable,
        "expected_dim": expected,
    });
    let mut out = Outcome::new(vec!["direction_set_estimate", "dimension_estimate"], Verdict::Pass, result, sample_table(&d));
    if let Some(e) = expected {
        if e != d.estimate.dim as i64 {
            out.verdict = Verdict::Fail;
            return Ok(out.explain(format!("estimated dimension {} differs from the catalog value {e}", d.estimate.dim)));
        }
    }
    if d.estimate.low_confidence {
        out.verdict = Verdict::Abstain;
        out = out.explain(format!("low confidence {:.2}", d.estimate.confidence));
    }
    if d.unstable {
        out.notes.push("direction clouds of the two finest shells differ by more than eta".into());
    }
    Ok(out)
}

fn cone(ctx: &Context) -> Result<Outcome> {
    let a = ctx.germ_a()?;
    let p = ctx.directions();
    let d = direction_set_estimate(&a, &p)?;
    let c = tangent_cone(&d)?;
    let GermKind::Cone { generators, edges, .. } = c.kind() else { unreachable!("tangent cones are cones") };
    let mut t = coord_header(&["generator"], a.dim, &[]);
    for (i, g) in generators.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(coords(g));
        t.push(row);
    }
    let result = json!({
        "germ": a.name,
        "params": p,
        "dim": d.estimate.dim,
        "cone_dim": d.estimate.dim + 1,
        "generators": generators,
        "edges": edges,
    });
    let verdict = if d.estimate.low_confidence { Verdict::Abstain } else { Verdict::Pass };
    Ok(Outcome::new(vec!["direction_set_estimate", "tangent_cone"], verdict, result, t))
}

fn relation_verdict(r: Relation) -> Verdict {
    match r {
        Relation::Included | Relation::Equivalent => Verdict::Pass,
        Relation::NotIncluded | Relation::NotEquivalent => Verdict::Fail,
        Relation::Abstain => Verdict::Abstain,
    }
}

fn st_fit(ctx: &Context) -> Result<Outcome> {
    let (a, b) = (ctx.germ_a()?, ctx.need_b()?);
    let p = ctx.inclusion();
    let fit = gauge_fit(&a, &b, &p)?;
    let mut t = Table::new(["radius", "norm", "max_g", "residual"]);
    let mut residuals = fit.residuals.iter();
    for s in &fit.shells {
        let r = if s.max_g > 1e-15 { residuals.next().map_or(String::new(), |r| fmt(*r)) } else { String::new() };
        t.push(vec![fmt(s.radius), fmt(s.norm), fmt(s.max_g), r]);
    }
    let verdict = match fit.outcome {
        FitOutcome::ZeroDistance => Verdict::Pass,
        FitOutcome::NoMonomialGauge => Verdict::Fail,
        FitOutcome::Monomial => relation_verdict(fit.certificate.as_ref().map_or(Relation::Abstain, |c| c.relation)),
    };
    let explanation = match fit.outcome {
        FitOutcome::NoMonomialGauge => Some(format!(
            "no monomial gauge: fitted exponent {:.4} does not exceed {}",
            fit.slope.unwrap_or(0.0),
            germlens::seatangle::MIN_SLOPE
        )),
        _ => None,
    };
    let result = json!({ "a": a.name, "b": b.name, "params": p, "fit": fit, "expected_exponent": ctx.truth("gauge_exponent_to_LD") });
    let mut out = Outcome::new(vec!["gauge_fit", "st_inclusion_test"], verdict, result, t);
    out.explanation = explanation;
    Ok(out)
}

fn st_equiv(ctx: &Context) -> Result<Outcome> {
    let (a, b) = (ctx.germ_a()?, ctx.need_b()?);
    let p = ctx.inclusion();
    let v = st_equivalence_search(&a, &b, &p)?;
    let mut t = coord_header(&["ratio"], a.dim, &[]);
    for c in &v.counterexamples {
        let mut row = vec![fmt(c.ratio)];
        row.extend(coords(&c.point));
        t.push(row);
    }
    let mut out = Outcome::new(
        vec!["st_equivalence_search", "st_inclusion_test"],
        relation_verdict(v.relation),
        json!({ "a": a.name, "b": b.name, "params": p, "verdict": v }),
        t,
    );
    if let Some(f) = &v.failed {
        out = out.explain(format!("no gauge found for {f}"));
    }
    Ok(out)
}

fn sandwich(ctx: &Context) -> Result<Outcome> {
    let a = ctx.germ_a()?;
    let h = ctx.need_map()?;
    let theta = ctx.gauge(GaugeSpec::Monomial { c: 0.5, alpha: 1.0 })?;
    let (constants, source) = match (ctx.cfg.params.constants, h.constants) {
        (Some(k), _) => (k, "config"),
        (None, Some(k)) => (k, "map"),
        (None, None) => {
            let est = constants_estimate(&h, h.region_radius, 4000, ctx.seed())?;
            if est.inverse_unbounded || est.forward_unbounded {
                let result = json!({ "germ": a.name, "map": h.name, "constants": est });
                return Ok(Outcome::new(vec!["constants_estimate"], Verdict::Abstain, result, Table::new(["side"]))
                    .explain("map shows no bi-Lipschitz constants"));
            }
            ((est.k1, est.k2), "estimate")
        }
    };
    let p = ctx.inclusion();
    let r = sandwich_check(&a, &h, &theta, constants, &p)?;
    let mut t = Table::new(["side", "inside", "outside", "indeterminate"]);
    for (side, c) in [("forward", Some(r.forward)), ("backward", r.backward)] {
        if let Some(c) = c {
            t.push(vec![side.into(), c.inside.to_string(), c.outside.to_string(), c.indeterminate.to_string()]);
        }
    }
    let decided = r.forward.decided() + r.backward.map_or(0, |c| c.decided());
    let outside = r.forward.outside + r.backward.map_or(0, |c| c.outside);
    let verdict = if outside > 0 {
        Verdict::Fail
    } else if decided == 0 {
        Verdict::Abstain
    } else {
        Verdict::Pass
    };
    let result = json!({ "germ": a.name, "map": h.name, "gauge": theta, "constants_source": source, "params": p, "report": r });
    let mut out = Outcome::new(vec!["sandwich_gauges", "st_contains"], verdict, result, t);
    if outside > 0 {
        out = out.explain(format!("{outside} sampled points fall outside the transported neighbourhood"));
    }
    Ok(out)
}

fn ssp(ctx: &Context) -> Result<Outcome> {
    let a = ctx.germ_a()?;
    let dp = ctx.directions();
    let cfg = ctx.ssp();
    let d = direction_set_estimate(&a, &dp)?;
    let (strong, weak) = ssp_pair(&a, &d, &cfg)?;
    let mut t = Table::new(["probe", "eps", "pass", "pass_rate", "delta", "failures"]);
    for (name, r) in [("strong", &strong), ("weak", &weak)] {
        for row in &r.rows {
            t.push(vec![
                name.into(),
                fmt(row.eps),
                row.pass.to_string(),
                fmt(row.pass_rate),
                row.delta.map_or(String::new(), fmt),
                row.failures.to_string(),
            ]);
        }
    }
    let mut out = Outcome::new(
        vec!["direction_set_estimate", "ssp_probe", "wssp_probe"],
        strong.verdict,
        json!({ "germ": a.name, "config": cfg, "strong": strong, "weak": weak, "agree": strong.verdict == weak.verdict }),
        t,
    );
    out.notes.push(format!(
        "the weak probe replaces subsequences by a majority of the finest {} shells per direction",
        cfg.tail
    ));
    if ctx.fixture.as_ref().is_some_and(|f| f.toy) {
        out.notes.push("toy fixture: not counted in strong/weak agreement".into());
    }
    Ok(out)
}

fn ld_image(ctx: &Context) -> Result<Outcome> {
    let a = ctx.germ_a()?;
    let h = ctx.need_map()?;
    let p = ctx.directions();
    let r = ld_image_check(&h, &a, &p)?;
    let mut t = Table::new(["gap", "resolution", "eta", "image_dim", "cone_image_dim"]);
    t.push(vec![fmt(r.gap), fmt(r.resolution), fmt(r.eta), r.image_dim.to_string(), r.cone_image_dim.to_string()]);
    let verdict = if r.unstable { Verdict::Abstain } else { Verdict::from_bool(r.pass) };
    Ok(Outcome::new(
        vec!["direction_set_estimate", "tangent_cone", "ld_image_check"],
        verdict,
        json!({ "germ": a.name, "map": h.name, "params": p, "report": r }),
        t,
    ))
}

fn vol(ctx: &Context) -> Result<Outcome> {
    let a = ctx.germ_a()?;
    let theta = ctx.gauge(LINEAR)?;
    let p = ctx.volume();
    let est = VolumeEstimator::new(&a, p);
    let mut t = Table::new(["eps", "value", "ci_halfwidth", "n_samples", "sampler", "indeterminate_fraction"]);
    let mut rows = Vec::new();
    for (i, &e) in ctx.eps().iter().enumerate() {
        let v = est.estimate(&theta, e, mix_seed(ctx.seed(), i as u64))?;
        t.push(vec![
            fmt(v.eps),
            fmt(v.value),
            fmt(v.ci_halfwidth),
            v.n_samples.to_string(),
            serde_json::to_value(v.sampler)?.as_str().unwrap_or_default().to_string(),
            fmt(v.indeterminate_fraction),
        ]);
        rows.push(v);
    }
    let warnings: Vec<String> = rows.iter().filter_map(|v| v.warning.clone()).collect();
    let mut out = Outcome::new(
        vec!["vol_st_ball"],
        if warnings.is_empty() { Verdict::Pass } else { Verdict::Abstain },
        json!({ "germ": a.name, "gauge": theta, "params": p, "estimates": rows }),
        t,
    );
    if !warnings.is_empty() {
        out = out.explain(warnings.join("; "));
    }
    Ok(out)
}

fn ratio_table(r: &RatioReport) -> Table {
    let mut t = Table::new(["eps", "ratio", "ci", "numerator", "denominator"]);
    for row in &r.rows {
        t.push(vec![fmt(row.eps), fmt(row.ratio), fmt(row.ci), fmt(row.numerator.value), fmt(row.denominator.value)]);
    }
    t
}

fn ratio_verdict(r: &RatioReport, expect: Option<Expect>) -> (Verdict, Option<String>) {
    let got = match r.verdict {
        RatioVerdict::DecaysToZero => Expect::DecaysToZero,
        RatioVerdict::Comparable { .. } => Expect::Comparable,
        RatioVerdict::Increases => Expect::Increases,
        RatioVerdict::Degenerate => return (Verdict::Abstain, Some("volumes too small to classify".into())),
    };
    match expect {
        Some(e) if e != got => (Verdict::Fail, Some(format!("expected {e:?}, observed {got:?}"))),
        _ => (Verdict::Pass, None),
    }
}

fn vol_ratio(ctx: &Context) -> Result<Outcome> {
    let (a, b) = (ctx.germ_a()?, ctx.need_b()?);
    let theta = ctx.gauge(LINEAR)?;
    let p = ctx.volume();
    let r = ratio_curve(&a, &b, &theta, &ctx.eps(), &p)?;
    let (verdict, why) = ratio_verdict(&r, ctx.cfg.params.expect);
    let t = ratio_table(&r);
    let mut out = Outcome::new(
        vec!["vol_st_ball", "ratio_curve"],
        verdict,
        json!({ "a": a.name, "b": b.name, "gauge": theta, "params": p, "report": r }),
        t,
    );
    out.explanation = why;
    Ok(out)
}

fn ctimes(ctx: &Context) -> Result<Outcome> {
    let a = ctx.germ_a()?;
    let theta = ctx.gauge(LINEAR)?;
    let c = ctx.cfg.params.factor.unwrap_or(2.0);
    let p = ctx.volume();
    let r = ctimes_check(&a, &theta, c, &ctx.eps(), &p)?;
    let (verdict, why) = ratio_verdict(&r, Some(ctx.cfg.params.expect.unwrap_or(Expect::Comparable)));
    let t = ratio_table(&r);
    let mut out = Outcome::new(
        vec!["vol_st_ball", "ctimes_check"],
        verdict,
        json!({ "germ": a.name, "gauge": theta, "factor": c, "params": p, "report": r }),
        t,
    );
    out.explanation = why;
    Ok(out)
}

fn invariant(ctx: &Context) -> Result<Outcome> {
    let a = ctx.germ_a()?;
    let b = match ctx.germ_b()? {
        Some(b) if ctx.cfg.b.is_some() || ctx.cfg.params.role_b.is_some() => b,
        _ => ctx.fixture.as_ref().and_then(|f| f.germ("B").ok().cloned()).unwrap_or_else(|| a.clone()),
    };
    let h = ctx.need_map()?;
    let declared = Hypotheses { definable: true, bi_lipschitz: true, image_definable: true };
    let hypotheses = match (ctx.cfg.params.hypotheses, &ctx.cfg.map, &ctx.fixture) {
        (Some(hy), _, _) => hy,
        (None, None, Some(f)) => f.flags,
        (None, Some(_), Some(f)) => Hypotheses { bi_lipschitz: true, image_definable: f.flags.definable, ..f.flags },
        _ => declared,
    };
    let p = ctx.directions();
    let r = invariant_check(&a, &b, &h, hypotheses, &p)?;
    let mut t = Table::new(["stage", "dim", "confidence", "points_at_eta", "points_at_half_eta", "count_ratio"]);
    for (stage, i) in [("before", &r.before), ("after", &r.after)] {
        t.push(vec![
            stage.into(),
            i.dim.to_string(),
            fmt(i.confidence),
            i.points_at_eta.to_string(),
            i.points_at_half_eta.to_string(),
            i.count_ratio.map_or(String::new(), fmt),
        ]);
    }
    let explanation = if !r.violations.is_empty() {
        Some(format!("hypotheses violated: {}", r.violations.join("; ")))
    } else if !r.equal {
        Some(format!("intersection dimension {} before the map, {} after", r.before.dim, r.after.dim))
    } else {
        None
    };
    let mut out = Outcome::new(
        vec!["direction_set_estimate", "direction_intersection_dim", "constants_estimate", "invariant_check"],
        r.verdict,
        json!({ "a": a.name, "b": b.name, "map": h.name, "params": p, "report": r }),
        t,
    );
    out.explanation = explanation;
    Ok(out)
}

fn extend(ctx: &Context) -> Result<Outcome> {
    let p = &ctx.cfg.params;
    let (anchors, values, lip, source) = match (&p.anchors, &p.values) {
        (Some(a), Some(v)) => (a.clone(), v.clone(), p.lipschitz.unwrap_or(1.0), "config"),
        (None, None) => {
            let a = ctx.germ_a()?;
            let anchors: Vec<Point> =
                ctx.schedule().radii().into_iter().flat_map(|r| a.sample_shell(r, p.per_shell.unwrap_or(8), ctx.seed())).collect();
            let values = anchors.iter().map(|x| norm(x)).collect();
            (anchors, values, p.lipschitz.unwrap_or(1.0), "germ samples with values |x|")
        }
        _ => return Err(CliError::Invalid("params.anchors and params.values go together".into())),
    };
    let e = banach_extension(anchors, values, lip)?;
    let n = e.anchors()[0].len();
    let reach = 2.0 * e.anchors().iter().map(|a| norm(a)).fold(0.0, f64::max).max(1e-12);
    let mut rng = rng_for(ctx.seed(), 0xe7);
    let probes: Vec<Point> = (0..p.probes.unwrap_or(1000)).map(|_| random_in_ball(n, reach, &mut rng)).collect();
    let mut t = coord_header(&[], n, &["alpha", "beta"]);
    let mut violations = Vec::new();
    let max_restriction = e.anchors().iter().zip(e.values()).map(|(a, v)| (e.alpha(a) - v).abs().max((e.beta(a) - v).abs())).fold(0.0, f64::max);
    if max_restriction > 1e-12 {
        violations.push(format!("extension misses an anchor value by {max_restriction}"));
    }
    let evals: Vec<(f64, f64)> = probes.iter().map(|x| (e.alpha(x), e.beta(x))).collect();
    let mut max_quotient: f64 = 0.0;
    for (i, x) in probes.iter().enumerate() {
        let (al, be) = evals[i];
        if be > al + 1e-12 * (1.0 + al.abs()) {
            violations.push(format!("beta above alpha at probe {i}"));
        }
        let j = (i + 1) % probes.len();
        let d = dist(x, &probes[j]);
        if d > 0.0 {
            let q = ((al - evals[j].0).abs() / d).max((be - evals[j].1).abs() / d);
            max_quotient = max_quotient.max(q);
        }
        let mut row = coords(x);
        row.extend([fmt(al), fmt(be)]);
        t.push(row);
    }
    if max_quotient > lip * (1.0 + 1e-6) {
        violations.push(format!("sampled quotient {max_quotient} exceeds {lip}"));
    }
    let verdict = Verdict::from_bool(violations.is_empty());
    let result = json!({
        "anchors": e.anchors().len(),
        "anchor_source": source,
        "lipschitz": lip,
        "probes": probes.len(),
        "max_restriction_error": max_restriction,
        "max_sampled_quotient": max_quotient,
        "violations": violations,
    });
    let mut out = Outcome::new(vec!["banach_extension"], verdict, result, t);
    if verdict == Verdict::Fail {
        out = out.explain(violations.join("; "));
    }
    Ok(out)
}

fn puiseux(ctx: &Context) -> Result<Outcome> {
    let literals = ctx.cfg.params.literals.clone().unwrap_or_else(|| vec!["1 + t".into(), "1 - t".into()]);
    let xs = literals.iter().map(|s| parse_puiseux(s)).collect::<std::result::Result<Vec<_>, _>>()?;
    let mut t = Table::new(["quantity", "value"]);
    let mut result = serde_json::Map::new();
    let mut put = |t: &mut Table, k: &str, v: String| {
        t.push(vec![k.into(), v.clone()]);
        result.insert(k.into(), Value::String(v));
    };
    for (i, x) in xs.iter().enumerate() {
        put(&mut t, &format!("x{i}"), x.to_string());
    }
    if let [x, y, ..] = xs.as_slice() {
        put(&mut t, "x0 + x1", (x + y).to_string());
        put(&mut t, "x0 - x1", (x - y).to_string());
        put(&mut t, "x0 * x1", (x * y).to_string());
        put(&mut t, "x0 / x1", x.checked_div(y).map_or_else(|e| e.to_string(), |q| q.to_string()));
        put(&mut t, "compare(x0, x1)", format!("{:?}", px_compare(x, y)));
        put(&mut t, "max norm", px_norm(&[x.clone(), y.clone()]).map_or_else(|e| e.to_string(), |n| n.to_string()));
    }
    let (zero, one, eps) = (PuiseuxNumber::zero(), PuiseuxNumber::one(), PuiseuxNumber::epsilon());
    let strip = CellForm2D::new(zero.clone(), PxPoly::identity(), one.clone(), PxPoly::identity().add(&PxPoly::constant(eps.clone())))?;
    let strip_vol = px_vol_cell(&strip)?;
    let triangle = CellForm2D::new(zero.clone(), PxPoly::constant(zero), one, PxPoly::identity())?;
    let tri_vol = px_vol_cell(&triangle)?;
    let three = parse_puiseux("3")?.constant_term();
    let scaling = px_vol_scaling_check(&strip, &three)?;
    put(&mut t, "vol strip over diagonal", format!("[0, {}]", strip_vol.right_end));
    put(&mut t, "vol triangle", format!("[0, {}]", tri_vol.right_end));
    put(&mut t, "strip scaling ratio (c = 3)", scaling.ratio.to_string());
    let ok = strip_vol.right_end == eps && tri_vol.right_end == parse_puiseux("1/2")? && scaling.exact;
    let mut out =
        Outcome::new(vec!["px_arith", "px_norm", "px_vol_cell", "px_vol_scaling_check"], Verdict::from_bool(ok), Value::Object(result), t);
    if !ok {
        out = out.explain("a reference volume differs from its exact value");
    }
    Ok(out)
}

fn fixtures(ctx: &Context) -> Result<Outcome> {
    let list: Vec<Fixture> = match &ctx.fixture {
        Some(f) => vec![f.clone()],
        None => catalog(),
    };
    let mut t = Table::new(["name", "roles", "has_map", "toy", "description"]);
    for f in &list {
        let roles: Vec<&str> = f.germs.iter().map(|(r, _)| *r).collect();
        t.push(vec![f.name.into(), roles.join(" "), f.map.is_some().to_string(), f.toy.to_string(), f.description.into()]);
    }
    let result = json!({ "fixtures": list.iter().map(Fixture::summary).collect::<Vec<_>>() });
    Ok(Outcome::new(vec!["fixture_catalog"], Verdict::Pass, result, t))
}
