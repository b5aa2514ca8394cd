use germlens::fixtures::{cusp, deep_schedule, fixture, horn, round_cone};
use germlens::geom::{add, mix_seed, norm, random_in_ball, rng_for, Point};
use germlens::seatangle::{
    gauge_fit, sandwich_gauges, st_probe, FitOutcome, InclusionParams, Membership, Relation,
};
use germlens::{Budget, Gauge, GermSet, LipschitzMap, Schedule};
use rand::Rng;

/// Points of `ST_theta(A)`: samples of `A` moved by less than the horn width,
/// kept only when membership is decided inside.
fn horn_points(a: &GermSet, theta: &Gauge, per_shell: usize, seed: u64) -> Vec<Point> {
    let mut rng = rng_for(seed, 0);
    let mut out = Vec::new();
    for (j, r) in Schedule::default().finest(6).into_iter().enumerate() {
        for x in a.sample_shell(r, per_shell, mix_seed(seed, j as u64)) {
            let w = theta.eval_unchecked(norm(&x)) * norm(&x);
            let y = add(&x, &random_in_ball(a.dim, 0.9 * w, &mut rng));
            if st_probe(&y, a, theta, Budget::default(), seed).membership == Membership::Inside {
                out.push(y);
            }
        }
    }
    out
}

fn random_linear(n: usize, seed: u64) -> LipschitzMap {
    let mut rng = rng_for(seed, 0x11);
    let rows: Vec<Point> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 } + rng.random_range(-0.6..0.6)).collect())
        .collect();
    LipschitzMap::linear("random linear", &rows).expect("generic matrices are invertible")
}

#[test]
fn sandwich_gauges_contain_the_transported_horns() {
    let germs = [horn(), round_cone(2), cusp()];
    let gauges = [Gauge::monomial(0.5, 1.0).unwrap(), Gauge::monomial(0.3, 0.5).unwrap()];
    let (mut decided, mut outside, mut undecided) = (0usize, Vec::new(), 0usize);
    for (gi, a) in germs.iter().enumerate() {
        for k in 0..5u64 {
            let h = random_linear(a.dim, mix_seed(gi as u64, k));
            let (k1, k2) = h.constants.unwrap();
            let ha = GermSet::mapped(a.clone(), h.clone()).unwrap();
            let inv = h.inverted().unwrap();
            for theta in &gauges {
                let (outer, inner) = sandwich_gauges(theta, k1, k2).unwrap();
                let seed = mix_seed(k, gi as u64);
                // h(ST_theta(A)) inside ST_outer(h(A)).
                let forward = horn_points(a, theta, 40, seed).into_iter().map(|x| (h.apply(&x), &ha, &outer));
                // ST_inner(h(A)) inside h(ST_theta(A)), checked after pulling back.
                let backward =
                    horn_points(&ha, &inner, 40, seed).into_iter().map(|y| (inv.apply(&y), a, theta));
                for (p, set, gauge) in forward.chain(backward) {
                    match st_probe(&p, set, gauge, Budget::default(), seed).membership {
                        Membership::Inside => decided += 1,
                        Membership::Outside => {
                            decided += 1;
                            outside.push((set.name.clone(), p));
                        }
                        Membership::Indeterminate => undecided += 1,
                    }
                }
            }
        }
    }
    eprintln!("sandwich: {decided} decided, {undecided} undecided, {} outside", outside.len());
    assert!(decided >= 10_000, "only {decided} decided samples");
    assert!(outside.is_empty(), "{outside:?}");
}

#[test]
fn flat_horn_has_no_monomial_gauge() {
    let f = fixture("flat-horn").unwrap();
    let p = InclusionParams { schedule: deep_schedule(), ..Default::default() };
    let fit = gauge_fit(f.germ("A").unwrap(), f.germ("LD").unwrap(), &p).unwrap();
    assert_eq!(fit.outcome, FitOutcome::NoMonomialGauge, "slope {:?}", fit.slope);
    assert!(fit.slope.unwrap() <= 0.02);
    // The same machinery still finds the square-root gauge of the cusp.
    let f = fixture("cusp").unwrap();
    let fit = gauge_fit(f.germ("A").unwrap(), f.germ("LD").unwrap(), &p).unwrap();
    assert!((fit.slope.unwrap() - 0.5).abs() <= 0.1, "{:?}", fit.slope);
}

#[test]
fn fitted_gauges_certify_on_every_shell() {
    for (name, exponent, tol) in [("horn", 2.0, 0.15), ("cusp", 0.5, 0.1), ("cubic", 2.0, 0.15)] {
        let f = fixture(name).unwrap();
        let fit = gauge_fit(f.germ("A").unwrap(), f.germ("LD").unwrap(), &InclusionParams::default()).unwrap();
        assert_eq!(fit.outcome, FitOutcome::Monomial, "{name}");
        assert!((fit.slope.unwrap() - exponent).abs() <= tol, "{name}: {:?}", fit.slope);
        let cert = fit.certificate.unwrap();
        assert_eq!(cert.relation, Relation::Included, "{name}");
        assert!(cert.counterexamples.is_empty(), "{name}");
        assert_eq!(cert.shells_checked, Schedule::default().shells, "{name}");
    }
}
