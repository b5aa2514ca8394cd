use germlens::geom::{dist, dot, random_in_ball, random_unit, rng_for, Point};
use germlens::lipschitz::banach_extension;
use proptest::prelude::*;
use rand::Rng;

/// A random finite set with values of a known `L`-Lipschitz function:
/// half a cone `|x - c|` plus half a linear form of unit slope.
fn instance(seed: u64) -> (Vec<Point>, Vec<f64>, f64) {
    let mut rng = rng_for(seed, 0);
    let n = rng.random_range(1..=4);
    let count = rng.random_range(5..=40);
    let lip = rng.random_range(0.1..10.0);
    let c = random_in_ball(n, 1.0, &mut rng);
    let u = random_unit(n, &mut rng);
    let anchors: Vec<Point> = (0..count).map(|_| random_in_ball(n, 2.0, &mut rng)).collect();
    let values = anchors.iter().map(|a| 0.5 * lip * (dist(a, &c) + dot(a, &u))).collect();
    (anchors, values, lip)
}

#[test]
fn extensions_restrict_exactly_and_stay_lipschitz() {
    let mut violations = Vec::new();
    for seed in 0..20 {
        let (anchors, values, lip) = instance(seed);
        let n = anchors[0].len();
        let e = banach_extension(anchors.clone(), values.clone(), lip).unwrap();
        for (a, v) in anchors.iter().zip(&values) {
            for (which, got) in [("alpha", e.alpha(a)), ("beta", e.beta(a))] {
                if (got - v).abs() > 1e-12 {
                    violations.push(format!("seed {seed}: {which} misses anchor value by {}", (got - v).abs()));
                }
            }
        }
        let mut rng = rng_for(seed, 1);
        for _ in 0..10_000 {
            let x = random_in_ball(n, 4.0, &mut rng);
            let y = random_in_ball(n, 4.0, &mut rng);
            let d = dist(&x, &y);
            for (which, fx, fy) in [("alpha", e.alpha(&x), e.alpha(&y)), ("beta", e.beta(&x), e.beta(&y))] {
                if (fx - fy).abs() > lip * (1.0 + 1e-6) * d {
                    violations.push(format!("seed {seed}: {which} quotient {} above {lip}", (fx - fy).abs() / d));
                }
            }
            // Where alpha and beta coincide they may differ by rounding.
            let (lo, hi) = (e.beta(&x), e.alpha(&x));
            if lo > hi + 1e-12 * (1.0 + hi.abs()) {
                violations.push(format!("seed {seed}: beta above alpha by {} at {x:?}", lo - hi));
            }
        }
    }
    assert!(violations.is_empty(), "{violations:#?}");
}

#[test]
fn values_breaking_the_constant_are_rejected() {
    let (anchors, mut values, lip) = instance(3);
    values[0] += 10.0 * lip * 8.0;
    assert!(banach_extension(anchors, values, lip).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every `L`-Lipschitz extension lies between the two extremes, so any
    /// convex combination does too.
    #[test]
    fn extremes_bracket_convex_combinations(seed in 0u64..1_000, t in 0.0f64..=1.0, x in prop::collection::vec(-3.0f64..3.0, 4)) {
        let (anchors, values, lip) = instance(seed);
        let n = anchors[0].len();
        let e = banach_extension(anchors, values, lip).unwrap();
        let x = &x[..n];
        let mid = e.eval(x, germlens::lipschitz::ExtensionMode::Convex(t));
        prop_assert!(e.beta(x) <= mid + 1e-9 && mid <= e.alpha(x) + 1e-9);
    }
}
