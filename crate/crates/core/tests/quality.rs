mod common;

use std::f64::consts::PI;

use common::{p, quarter_annulus, rectangle, Lcg};
use nalgebra::Point2;
use scmatch::paramgen::{coons_patch, linear_only_pipeline};
use scmatch::quality::*;
use scmatch::splines::{KnotVector, NurbsSurface};

fn bilinear(corners: [Point2<f64>; 4]) -> NurbsSurface {
    let k = || KnotVector::bezier(1, 0.0, 1.0);
    NurbsSurface::new(k(), k(), corners.to_vec(), vec![1.0; 4]).unwrap()
}

fn mapped(f: impl Fn(f64, f64) -> (f64, f64)) -> NurbsSurface {
    let c = |u: f64, v: f64| {
        let (x, y) = f(u, v);
        p(x, y)
    };
    bilinear([c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(1.0, 1.0)])
}

#[test]
fn identity_has_unit_scaled_jacobian_and_zero_uniformity() {
    let s = mapped(|u, v| (u, v));
    for (u, v) in [(0.0, 0.0), (0.3, 0.8), (1.0, 1.0)] {
        assert!((scaled_jacobian(&s, u, v).unwrap() - 1.0).abs() <= 1e-15);
        assert!(uniformity(&s, u, v, 1.0).unwrap() <= 1e-15);
    }
    assert_eq!(area_ratio(&s), 1.0);
}

#[test]
fn shear_has_the_cosine_of_the_cell_angle() {
    let s = mapped(|u, v| (u + v, v));
    let want = 1.0 / 2.0f64.sqrt();
    for (u, v) in [(0.1, 0.2), (0.5, 0.5), (0.9, 0.4)] {
        assert!((scaled_jacobian(&s, u, v).unwrap() - want).abs() <= 1e-10);
    }
}

#[test]
fn reflection_is_reported_as_a_fold() {
    let s = mapped(|u, v| (v, u));
    assert!((scaled_jacobian(&s, 0.4, 0.6).unwrap() + 1.0).abs() <= 1e-15);
    let q = quality_report(&s, 11, 11).unwrap();
    assert!(q.fold);
    assert_eq!(q.min_sj, -1.0);
    assert_eq!((q.max_unif, q.avg_unif), (None, None));
    assert!(q.csv_row("flip", "test").ends_with(",-1.0,-1.0,,,true"));
}

#[test]
fn uniform_scaling_has_zero_uniformity() {
    let s = mapped(|u, v| (3.0 * u, 3.0 * v));
    assert!((area_ratio(&s) - 9.0).abs() < 1e-12);
    let q = quality_report(&s, 21, 21).unwrap();
    assert!(q.max_unif.unwrap() < 1e-14);
    assert_eq!(q.min_sj, 1.0);
}

#[test]
fn quadratic_stretch_has_the_expected_uniformity() {
    // x = ξ², y = η has |J| = 2ξ and area ratio 1
    let ku = KnotVector::bezier(2, 0.0, 1.0);
    let kv = KnotVector::bezier(1, 0.0, 1.0);
    let pts = vec![p(0.0, 0.0), p(0.0, 0.0), p(1.0, 0.0), p(0.0, 1.0), p(0.0, 1.0), p(1.0, 1.0)];
    let s = NurbsSurface::new(ku, kv, pts, vec![1.0; 6]).unwrap();
    assert!((area_ratio(&s) - 1.0).abs() < 1e-14);
    let m = uniformity(&s, 0.25, 0.5, area_ratio(&s)).unwrap();
    assert!((m - 0.5).abs() < 1e-14);
    let sample = jacobian_sample(&s, 0.0, 0.5).unwrap();
    assert!(sample.degenerate);
    assert_eq!(sample.scaled, 0.0);
}

#[test]
fn area_ratios_of_reference_domains() {
    let square = coons_patch(&rectangle(1.0, 1.0)).unwrap();
    assert!((area_ratio(&square) - 1.0).abs() <= 1e-8);
    let rect = linear_only_pipeline(&rectangle(1.0, 5.0)).unwrap();
    assert!((area_ratio(&rect) - 5.0).abs() <= 1e-8);
    let annulus = linear_only_pipeline(&quarter_annulus()).unwrap();
    let r = area_ratio(&annulus);
    assert!((r - 0.75 * PI).abs() <= 1e-8, "annulus area ratio {r}");
}

#[test]
fn uniformity_rejects_nonpositive_area_ratio() {
    let s = mapped(|u, v| (u, v));
    assert!(uniformity(&s, 0.5, 0.5, 0.0).is_err());
    assert!(uniformity(&s, 0.5, 0.5, -1.0).is_err());
}

#[test]
fn scaled_jacobian_is_similarity_invariant() {
    let s = linear_only_pipeline(&quarter_annulus()).unwrap();
    let mut rng = Lcg(5);
    for _ in 0..10 {
        let (angle, scale) = (rng.range(0.0, 2.0 * PI), rng.range(0.1, 10.0));
        let (tx, ty) = (rng.range(-5.0, 5.0), rng.range(-5.0, 5.0));
        let (c, sn) = (angle.cos(), angle.sin());
        let moved: Vec<Point2<f64>> =
            s.control().iter().map(|q| p(scale * (c * q.x - sn * q.y) + tx, scale * (sn * q.x + c * q.y) + ty)).collect();
        let t = s.with_control(moved).unwrap();
        for _ in 0..10 {
            let (u, v) = (rng.next(), rng.next());
            let a = scaled_jacobian(&s, u, v).unwrap();
            let b = scaled_jacobian(&t, u, v).unwrap();
            assert!((a - b).abs() <= 1e-12);
        }
        let (qa, qb) = (quality_report(&s, 15, 15).unwrap(), quality_report(&t, 15, 15).unwrap());
        assert!((qa.max_unif.unwrap() - qb.max_unif.unwrap()).abs() <= 1e-10);
    }
}

#[test]
fn scaled_jacobian_lies_in_the_unit_interval() {
    let mut rng = Lcg(17);
    for _ in 0..50 {
        let s = bilinear([
            p(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
            p(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
            p(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
            p(rng.range(-1.0, 1.0), rng.range(-1.0, 1.0)),
        ]);
        let q = quality_report(&s, 9, 9).unwrap();
        assert!((-1.0..=1.0).contains(&q.min_sj) && q.avg_sj <= 1.0);
    }
}

#[test]
fn finer_grids_never_raise_the_minimum() {
    let s = linear_only_pipeline(&scmatch::io::corpus::s_channel()).unwrap();
    let coarse = quality_report(&s, 11, 11).unwrap();
    let fine = quality_report(&s, 21, 21).unwrap();
    assert!(fine.min_sj <= coarse.min_sj);
}

#[test]
fn identity_csv_row() {
    let s = mapped(|u, v| (u, v));
    let q = quality_report(&s, 101, 101).unwrap();
    let row = q.csv_row("square", "coons");
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(&fields[..3], &["square", "coons", "101x101"]);
    let want = [1.0, 1.0, 0.0, 0.0];
    for (f, w) in fields[3..7].iter().zip(want) {
        assert!((f.parse::<f64>().unwrap() - w).abs() <= 1e-15, "{row}");
    }
    assert_eq!(fields[7], "false");
    assert_eq!(QUALITY_HEADER.split(',').count(), q.csv_row("a", "b").split(',').count());
}

#[test]
fn report_rejects_tiny_grids() {
    let s = mapped(|u, v| (u, v));
    assert!(quality_report(&s, 1, 5).is_err());
}
