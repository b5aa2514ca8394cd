use super::*;
use crate::fixtures::{cusp, flat_horn, horn, oscillating_graph, quartic_sequence, round_cone};
use crate::geom::dist;

fn check_sampler(g: &GermSet, tol: f64) {
    for r in Schedule::default().radii() {
        let pts = g.sample_shell(r, 40, 11);
        assert!(!pts.is_empty(), "{} empty at {r}", g.name);
        for x in &pts {
            let n = norm(x);
            assert!(0.5 * r <= n && n <= r, "{}: norm {n} outside shell {r}", g.name);
            assert!(g.contains(x, tol), "{}: sample {x:?} not a member", g.name);
            if g.has_exact_distance() {
                assert!(g.dist(x) <= tol * n, "{}: oracle nonzero on sample", g.name);
            }
        }
    }
}

#[test]
fn samplers_respect_shells_and_membership() {
    check_sampler(&horn(), 1e-9);
    check_sampler(&round_cone(2), 1e-9);
    check_sampler(&cusp(), 1e-9);
    check_sampler(&GermSet::axis(3, 2), 1e-12);
    check_sampler(&GermSet::coordinate_hyperplane(3, 0), 1e-12);
    check_sampler(&GermSet::ray("r", &[1.0, 2.0]).unwrap(), 1e-12);
    check_sampler(&GermSet::whole(4), 0.0);
    check_sampler(&oscillating_graph(), 1e-9);
    check_sampler(&flat_horn(), 1e-9);
}

#[test]
fn samplers_are_pure_functions_of_their_inputs() {
    let v = horn();
    assert_eq!(v.sample_shell(0.01, 30, 5), v.sample_shell(0.01, 30, 5));
    assert_ne!(v.sample_shell(0.01, 30, 5), v.sample_shell(0.01, 30, 6));
}

#[test]
fn half_line_samples() {
    let g = GermSet::ray("half-line", &[1.0, 0.0]).unwrap();
    for x in g.sample_shell(0.2, 50, 1) {
        assert_eq!(x[1], 0.0);
        assert!((0.1..=0.2).contains(&x[0]));
    }
}

#[test]
fn trivial_distances() {
    let z = GermSet::axis(3, 2);
    let b = z.distance_estimate(&[0.0, 0.0, 0.5], Budget::default(), 0);
    assert_eq!((b.lower, b.upper), (0.0, 0.0));
    let line = GermSet::axis(2, 0);
    let b = line.distance_estimate(&[1.0, 1.0], Budget::default(), 0);
    assert_eq!((b.lower, b.upper), (1.0, 1.0));
}

#[test]
fn quartic_sequence_distance_is_exact() {
    let g = quartic_sequence();
    let x = [2.5 * 0.25f64.powi(6), 0.0];
    let b = g.distance_estimate(&x, Budget::default(), 0);
    assert!(!b.exhausted);
    assert!((b.upper - 1.5 * 0.25f64.powi(6)).abs() < 1e-18);
}

#[test]
fn parametric_bounds_bracket_truth_and_tighten() {
    // curve (u, u^2) without an oracle; compare with a dense sweep
    let g = GermSet::parametric(
        "parabola",
        2,
        vec![Branch { curve: Arc::new(|u: f64| vec![u, u * u]), u_max: 1.0 }],
    )
    .unwrap();
    let x = [0.05, 0.01];
    let truth = (0..=1_000_000)
        .map(|i| {
            let u = 0.2 * i as f64 / 1e6;
            dist(&x, &[u, u * u])
        })
        .fold(f64::INFINITY, f64::min);
    let mut prev = (0.0, f64::INFINITY);
    for b in [64, 256, 1024, 4096] {
        let e = g.distance_estimate(&x, Budget(b), 3);
        assert!(e.lower <= truth + 1e-12 && truth <= e.upper + 1e-12);
        assert!(e.lower >= prev.0 && e.upper <= prev.1);
        prev = (e.lower, e.upper);
    }
    assert!(prev.1 - prev.0 < 1e-2 * truth);
    assert!((prev.1 - truth).abs() < 1e-12);
}

#[test]
fn mapped_distance_uses_the_inverse() {
    let g = oscillating_graph();
    let t = 0.01f64;
    let on = [t, t * t.ln().sin()];
    assert!(g.dist(&on) < 1e-15);
    let off = [t, t * t.ln().sin() + 1e-4];
    let b = g.distance_estimate(&off, Budget::default(), 0);
    assert!(b.lower <= b.upper && b.upper <= 1e-4 + 1e-15);
}

#[test]
fn algebraic_without_oracle_gives_upper_bounds() {
    let p = crate::poly::Poly::from_terms([(1.0, vec![0, 1]), (-1.0, vec![2, 0])]);
    let g = GermSet::algebraic("parabola", 2, vec![p], vec![]).unwrap();
    let x = [0.05, 0.01];
    let b = g.distance_estimate(&x, Budget::default(), 0);
    assert_eq!(b.lower, 0.0);
    let truth = (0..=200_000)
        .map(|i| {
            let u = 0.1 * i as f64 / 2e5;
            dist(&x, &[u, u * u])
        })
        .fold(f64::INFINITY, f64::min);
    assert!(b.upper >= truth - 1e-12 && b.upper <= truth * 1.001);
}

#[test]
fn empty_germs_are_rejected() {
    let far = GermSet::radial_bands("far", 2, vec![(1.0, 2.0)]).unwrap();
    assert!(matches!(far.check_adherent(&Schedule::default(), 0), Err(GermError::EmptyGerm(_))));
    assert!(horn().check_adherent(&Schedule::default(), 0).is_ok());
}
