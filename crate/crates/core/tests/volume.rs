use std::f64::consts::PI;

use germlens::geom::ball_volume;
use germlens::volume::{
    ctimes_check, default_eps_schedule, ratio_curve, vol_st_ball, RatioVerdict, VolParams, VolumeEstimator,
};
use germlens::{Gauge, GermSet};

/// Midpoint quadrature of `4 pi s^2 * fraction(theta(s))` over `[0, eps]`.
fn shell_integral(eps: f64, theta: impl Fn(f64) -> f64, fraction: impl Fn(f64) -> f64) -> f64 {
    let m = 20_000;
    let h = eps / m as f64;
    (0..m)
        .map(|i| {
            let s = h * (i as f64 + 0.5);
            4.0 * PI * s * s * fraction(theta(s).min(1.0)) * h
        })
        .sum()
}

/// Points within relative distance `t` of a line form two caps.
fn line_fraction(t: f64) -> f64 {
    1.0 - (1.0 - t * t).sqrt()
}

/// ... and of a plane, a band of relative height `t`.
fn plane_fraction(t: f64) -> f64 {
    t
}

fn z_axis() -> GermSet {
    GermSet::axis(3, 2)
}

fn xy_plane() -> GermSet {
    GermSet::coordinate_hyperplane(3, 2)
}

#[test]
fn estimates_match_quadrature() {
    let eps = 0.1;
    let cases = [
        (z_axis(), shell_integral(eps, |s| s, line_fraction)),
        (xy_plane(), shell_integral(eps, |s| s, plane_fraction)),
    ];
    for (g, exact) in cases {
        let v = vol_st_ball(&g, &Gauge::linear(), eps, 200_000, 3).unwrap();
        let sigma = v.ci_halfwidth / 1.96;
        assert!((v.value - exact).abs() <= 3.0 * sigma, "{}: {} vs {exact}", g.name, v.value);
        assert!(v.value <= ball_volume(3, eps));
    }
}

#[test]
fn independent_seeds_agree() {
    let g = xy_plane();
    let a = vol_st_ball(&g, &Gauge::linear(), 0.05, 100_000, 1).unwrap();
    let b = vol_st_ball(&g, &Gauge::linear(), 0.05, 100_000, 2).unwrap();
    assert!((a.value - b.value).abs() <= 3.0 * (a.ci_halfwidth.powi(2) + b.ci_halfwidth.powi(2)).sqrt() / 1.96);
}

#[test]
fn line_against_plane_decays_with_unit_slope() {
    let eps = default_eps_schedule();
    let r = ratio_curve(&z_axis(), &xy_plane(), &Gauge::linear(), &eps, &VolParams::default()).unwrap();
    assert_eq!(r.verdict, RatioVerdict::DecaysToZero);
    let oracle: Vec<(f64, f64)> = eps
        .iter()
        .map(|&e| (e.ln(), (shell_integral(e, |s| s, line_fraction) / shell_integral(e, |s| s, plane_fraction)).ln()))
        .collect();
    let (oracle_slope, _) = germlens::seatangle::least_squares(&oracle);
    let slope = r.slope.unwrap();
    assert!((slope - 1.0).abs() <= 0.2, "{slope}");
    assert!((slope - oracle_slope).abs() <= 0.2);
    for row in &r.rows {
        let exact = shell_integral(row.eps, |s| s, line_fraction) / shell_integral(row.eps, |s| s, plane_fraction);
        assert!((row.ratio - exact).abs() <= 1.5 * row.ci, "eps {}: {} ± {} vs {exact}", row.eps, row.ratio, row.ci);
    }
}

#[test]
fn square_root_gauge_also_decays() {
    let theta = Gauge::monomial(1.0, 0.5).unwrap();
    let p = VolParams { samples: 200_000, ..VolParams::default() };
    // the ratio falls like eps^(1/2), so the schedule spans four decades
    let eps: Vec<f64> = (0..9).map(|i| 10f64.powf(-1.0 - 0.5 * i as f64)).collect();
    let r = ratio_curve(&z_axis(), &xy_plane(), &theta, &eps, &p).unwrap();
    assert_eq!(r.verdict, RatioVerdict::DecaysToZero);
}

#[test]
fn doubled_gauge_on_a_line_quadruples_volume() {
    let r = ctimes_check(&z_axis(), &Gauge::linear(), 2.0, &default_eps_schedule(), &VolParams::default()).unwrap();
    match r.verdict {
        RatioVerdict::Comparable { k } => assert!(k < 5.0),
        v => panic!("{v:?}"),
    }
    for row in &r.rows {
        assert!((row.ratio / 4.0 - 1.0).abs() < 0.15, "eps {}: {}", row.eps, row.ratio);
    }
}

#[test]
fn reciprocal_and_trivial_ratios() {
    let p = VolParams { samples: 100_000, ..VolParams::default() };
    let eps = default_eps_schedule();
    let r = ratio_curve(&xy_plane(), &z_axis(), &Gauge::linear(), &eps, &p).unwrap();
    assert_eq!(r.verdict, RatioVerdict::Increases);
    let r = ctimes_check(&xy_plane(), &Gauge::linear(), 1.0, &eps, &p).unwrap();
    assert!(r.rows.iter().all(|row| row.ratio == 1.0));
}

#[test]
fn estimates_are_reproducible() {
    let g = z_axis();
    let est = VolumeEstimator::new(&g, VolParams { samples: 50_000, ..VolParams::default() });
    let a = est.estimate(&Gauge::linear(), 1e-3, 9).unwrap();
    let b = est.estimate(&Gauge::linear(), 1e-3, 9).unwrap();
    assert_eq!(a, b);
}
