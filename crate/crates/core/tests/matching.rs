mod common;

use common::{line, p, quarter_annulus, rectangle, Lcg};
use scmatch::matching::*;
use scmatch::splines::{KnotVector, NurbsCurve};
use scmatch::{Brep, Error, Side};

/// Piecewise-affine map taking `from[i]` to `to[i]`.
fn piecewise_affine(t: f64, from: &[f64], to: &[f64]) -> f64 {
    let k = from.windows(2).position(|w| t <= w[1]).unwrap_or(from.len() - 2);
    let s = (t - from[k]) / (from[k + 1] - from[k]);
    to[k] + s * (to[k + 1] - to[k])
}

fn wavy_rational(rng: &mut Lcg) -> NurbsCurve {
    let n = 9;
    let knots = KnotVector::uniform(3, n - 3, 0.0, 1.0);
    let pts = (0..n).map(|i| p(rng.range(-0.3, 0.3), i as f64 + rng.range(-0.2, 0.2))).collect();
    let ws = (0..n).map(|_| rng.range(0.5, 2.0)).collect();
    NurbsCurve::new(knots, pts, ws).unwrap()
}

/// 5 × 1 rectangle (long sides vertical) whose East side is a cubic with a
/// strongly nonuniform speed.
fn distorted_rectangle() -> Brep {
    let east = NurbsCurve::bspline(KnotVector::bezier(3, 0.0, 1.0), vec![p(1.0, 0.0), p(1.0, 0.1), p(1.0, 0.5), p(1.0, 5.0)])
        .unwrap();
    let r = rectangle(1.0, 5.0);
    Brep::new(r.west, east, r.south, r.north).unwrap()
}

#[test]
fn marker_params_on_a_straight_line() {
    let c = line((0.0, 0.0), (1.0, 0.0));
    let markers: Vec<_> = [0.0, 0.25, 0.5, 0.75, 1.0].iter().map(|&x| p(x, 0.0)).collect();
    let t = marker_params(&c, &markers, 1e-6).unwrap();
    for (a, b) in t.iter().zip([0.0, 0.25, 0.5, 0.75, 1.0]) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn marker_params_on_a_rational_arc() {
    let arc = common::arc(1.0);
    let angles = [0.0, 0.3, 0.7, 1.1, std::f64::consts::FRAC_PI_2];
    let markers: Vec<_> = angles.iter().map(|a: &f64| p(a.cos(), a.sin())).collect();
    let t = marker_params(&arc, &markers, 1e-6).unwrap();
    for (k, &tk) in t.iter().enumerate() {
        let q = arc.point_at(tk);
        assert!((q - markers[k]).norm() < 1e-10);
    }
    assert!(t.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn marker_params_rejects_far_points() {
    let c = line((0.0, 0.0), (1.0, 0.0));
    let markers = vec![p(0.0, 0.0), p(0.5, 0.3), p(1.0, 0.0)];
    assert!(matches!(marker_params(&c, &markers, 1e-3), Err(Error::Markers(_))));
}

#[test]
fn marker_params_rejects_reversed_order() {
    let c = line((0.0, 0.0), (1.0, 0.0));
    let markers = vec![p(0.0, 0.0), p(0.7, 0.0), p(0.3, 0.0), p(1.0, 0.0)];
    assert!(matches!(marker_params(&c, &markers, 1e-3), Err(Error::Markers(_))));
}

#[test]
fn reparameterize_east_moves_markers() {
    let c = line((0.0, 0.0), (1.0, 0.0));
    let r = reparameterize_east(&c, &[0.0, 0.5, 1.0], &[0.0, 0.25, 1.0]).unwrap();
    assert!((r.point_at(0.25) - c.point_at(0.5)).norm() < 1e-12);
    assert!((r.point_at(0.625) - c.point_at(0.75)).norm() < 1e-12);
    assert_eq!(r.range(), (0.0, 1.0));
}

#[test]
fn reparameterize_east_preserves_the_point_set() {
    let mut rng = Lcg(7);
    for _ in 0..5 {
        let c = wavy_rational(&mut rng);
        let mut east = vec![0.0];
        let mut west = vec![0.0];
        for _ in 0..6 {
            east.push(east.last().unwrap() + rng.range(0.05, 0.3));
            west.push(west.last().unwrap() + rng.range(0.05, 0.3));
        }
        let (es, ws) = (*east.last().unwrap(), *west.last().unwrap());
        let east: Vec<f64> = east.iter().map(|t| t / es).collect();
        let west: Vec<f64> = west.iter().map(|t| 2.0 * t / ws).collect();
        let r = reparameterize_east(&c, &east, &west).unwrap();
        let diam = c.bbox_diagonal();
        let mut worst = 0.0f64;
        for k in 0..2000 {
            let t = k as f64 / 1999.0;
            let s = piecewise_affine(t, &east, &west);
            worst = worst.max((r.point_at(s) - c.point_at(t)).norm());
        }
        assert!(worst <= 1e-12 * diam.max(1.0), "piecewise-affine identity off by {worst:e}");
        assert_eq!(r.start_point(), c.start_point());
        assert!((r.end_point() - c.end_point()).norm() <= 1e-14 * diam);
    }
}

#[test]
fn reparameterize_east_rejects_bad_parameters() {
    let c = line((0.0, 0.0), (1.0, 0.0));
    assert!(reparameterize_east(&c, &[0.0, 0.5, 1.0], &[0.0, 1.0]).is_err());
    assert!(reparameterize_east(&c, &[0.0, 0.6, 0.5, 1.0], &[0.0, 0.2, 0.4, 1.0]).is_err());
    assert!(reparameterize_east(&c, &[0.1, 0.5, 1.0], &[0.0, 0.2, 1.0]).is_err());
}

#[test]
fn distorted_east_is_matched_to_the_west() {
    let brep = distorted_rectangle();
    let opts = MatchOptions {
        markers: Some(21),
        ..Default::default()
    };
    let m = match_boundaries(&brep, &opts).unwrap();
    assert_eq!(m.brep.west, brep.west);
    let w = &m.provenance.markers.west_params;
    assert_eq!(w.len(), 21);
    for (k, &t) in w.iter().enumerate() {
        // conformal markers on a rectangle are evenly spaced along both long sides
        assert!((t - k as f64 / 20.0).abs() < 1e-3, "West marker {k} at {t}");
        let dy = m.brep.east.point_at(t).y - m.brep.west.point_at(t).y;
        assert!(dy.abs() < 5e-3, "marker {k}: heights differ by {dy}");
    }
    // the new East keeps its shape
    for k in 0..2000 {
        let t = k as f64 / 1999.0;
        let q = m.brep.east.point_at(t);
        assert!((q.x - 1.0).abs() < 1e-12 && q.y > -1e-12 && q.y < 5.0 + 1e-12);
    }
    assert!(m.provenance.sc_residual < 1e-8);
    assert!((m.provenance.conformal_modulus - 5.0).abs() < 1e-3);
}

#[test]
fn matched_rectangle_is_a_fixed_point() {
    let brep = rectangle(1.0, 5.0);
    let m = match_boundaries(&brep, &MatchOptions::default()).unwrap();
    for k in 0..=200 {
        let t = k as f64 / 200.0;
        let d = (m.brep.east.point_at(t) - brep.east.point_at(t)).norm();
        assert!(d <= 1e-9, "East moved by {d:e} at t = {t}");
    }
}

#[test]
fn matching_is_idempotent() {
    let first = match_boundaries(&distorted_rectangle(), &MatchOptions::default()).unwrap();
    let second = match_boundaries(&first.brep, &MatchOptions::default()).unwrap();
    let mut worst = 0.0f64;
    for k in 0..=500 {
        let t = k as f64 / 500.0;
        worst = worst.max((second.brep.east.point_at(t) - first.brep.east.point_at(t)).norm());
    }
    assert!(worst <= 1e-6 * first.brep.diameter(), "second pass moved East by {worst:e}");
}

#[test]
fn annulus_matching_keeps_the_arcs() {
    let brep = quarter_annulus();
    let m = match_boundaries(&brep, &MatchOptions::default()).unwrap();
    for k in 0..=400 {
        let t = k as f64 / 400.0;
        let r = m.brep.east.point_at(t).coords.norm();
        assert!((r - 2.0).abs() < 1e-12);
    }
    // symmetric domain: the reparameterized outer arc sweeps the same angle
    // as the inner arc at every marker
    for &t in &m.provenance.markers.west_params {
        let a = m.brep.west.point_at(t);
        let b = m.brep.east.point_at(t);
        assert!((a.y.atan2(a.x) - b.y.atan2(b.x)).abs() < 1e-3);
    }
}

#[test]
fn east_can_be_the_fixed_side() {
    let brep = distorted_rectangle();
    let opts = MatchOptions {
        markers: Some(21),
        fixed_side: Side::East,
        ..Default::default()
    };
    let m = match_boundaries(&brep, &opts).unwrap();
    assert_eq!(m.provenance.fixed_side, Side::East);
    for k in 0..=200 {
        let t = k as f64 / 200.0;
        assert!((m.brep.east.point_at(t) - brep.east.point_at(t)).norm() < 1e-12);
    }
    let mk = &m.provenance.markers;
    assert!(mk.east_params.windows(2).all(|w| w[1] > w[0]));
    assert!(mk.west_params.windows(2).all(|w| w[1] > w[0]));
    for &t in &mk.east_params {
        let dy = m.brep.east.point_at(t).y - m.brep.west.point_at(t).y;
        assert!(dy.abs() < 5e-3);
    }
}

#[test]
fn errors_name_the_failing_stage() {
    let mut brep = rectangle(1.0, 5.0);
    brep.north = line((0.0, 5.0), (1.0, 5.5));
    let err = match_boundaries(&brep, &MatchOptions::default()).unwrap_err();
    assert!(matches!(err, Error::Stage { stage: "input", .. }), "{err}");
    assert!(err.to_string().starts_with("input:"));
    assert!(!err.is_numerical());

    let opts = MatchOptions {
        fixed_side: Side::South,
        ..Default::default()
    };
    assert!(match_boundaries(&rectangle(1.0, 5.0), &opts).is_err());
}
