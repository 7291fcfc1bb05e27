//! Acceptance suite: one PASS/FAIL line per criterion with its runtime.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use nalgebra::Point2;
use num_complex::Complex64;
use scmatch::conformal::{
    cross_ratio, disk_to_rectangle, polygonize, solve_parameter_problem, split_long_edges, Polygon, RectCorners,
    ScDiskMap, ScOptions, DEFAULT_KAPPA,
};
use scmatch::io::corpus::{corpus, quarter_annulus, rectangle, s_channel};
use scmatch::matching::{match_boundaries, MatchOptions};
use scmatch::paramgen::{
    assemble_elliptic, convergence_rates, elliptic_improve, k_refine, linear_only_pipeline, poisson_demo,
    EllipticOptions,
};
use scmatch::quality::{area_ratio, quality_report, scaled_jacobian, uniformity};
use scmatch::splines::{KnotVector, NurbsCurve, NurbsSurface};
use scmatch::Brep;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, a: f64, b: f64) -> f64 {
        a + (b - a) * self.next()
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn p(x: f64, y: f64) -> Point2<f64> {
    Point2::new(x, y)
}

/// Textbook Cox–de Boor recursion with the right-closed last span.
fn cox_de_boor(u: &[f64], i: usize, p: usize, t: f64) -> f64 {
    if p == 0 {
        let last = u[u.len() - 1];
        let inside = if t == last { u[i] < t && t <= u[i + 1] } else { u[i] <= t && t < u[i + 1] };
        return if inside { 1.0 } else { 0.0 };
    }
    let mut v = 0.0;
    if u[i + p] > u[i] {
        v += (t - u[i]) / (u[i + p] - u[i]) * cox_de_boor(u, i, p - 1, t);
    }
    if u[i + p + 1] > u[i + 1] {
        v += (u[i + p + 1] - t) / (u[i + p + 1] - u[i + 1]) * cox_de_boor(u, i + 1, p - 1, t);
    }
    v
}

fn criterion_1() -> Outcome {
    let mut rng = Lcg(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let p = 1 + (rng.next() * 5.0) as usize;
        let n_int = (rng.next() * 6.0) as usize;
        let mut interior: Vec<f64> = (0..n_int).map(|_| rng.range(0.01, 0.99)).collect();
        interior.sort_by(f64::total_cmp);
        let mut u = vec![0.0; p + 1];
        u.extend(&interior);
        u.extend(std::iter::repeat(1.0).take(p + 1));
        let (s, shift, x) = (rng.range(0.1, 10.0), rng.range(-5.0, 5.0), rng.next());
        let k = KnotVector::new(u.clone(), p).map_err(|e| e.to_string())?;
        let ka = k.affine(s, shift).map_err(|e| e.to_string())?;
        let ua: Vec<f64> = u.iter().map(|t| s * t + shift).collect();
        let xa = (s * x + shift).clamp(ka.start(), ka.end());
        for i in 0..k.num_basis() {
            let a = k.basis_eval(i, x).map_err(|e| e.to_string())?;
            let b = ka.basis_eval(i, xa).map_err(|e| e.to_string())?;
            worst = worst.max((a - b).abs()).max((a - cox_de_boor(&u, i, p, x)).abs());
            worst = worst.max((b - cox_de_boor(&ua, i, p, xa)).abs());
        }
    }
    check(worst <= 1e-13, format!("max error {worst:e}"))?;
    Ok(format!("max error {worst:.2e} over 1000 cases"))
}

fn piecewise_affine(t: f64, from: &[f64], to: &[f64]) -> f64 {
    let k = from.windows(2).position(|w| t <= w[1]).unwrap_or(from.len() - 2);
    let s = (t - from[k]) / (from[k + 1] - from[k]);
    to[k] + s * (to[k + 1] - to[k])
}

fn one_sided_distance(from: &NurbsCurve, to: &NurbsCurve, map: impl Fn(f64) -> f64, n: usize) -> Result<f64, String> {
    let (a, b) = from.range();
    let mut worst = 0.0f64;
    for k in 0..=n {
        let t = a + (b - a) * k as f64 / n as f64;
        let q = from.point_at(t);
        let s = to.closest_point(q, map(t)).map_err(|e| e.to_string())?;
        worst = worst.max((to.point_at(s) - q).norm());
    }
    Ok(worst)
}

fn criterion_2() -> Outcome {
    let (mut worst_id, mut worst_h) = (0.0f64, 0.0f64);
    for (name, brep) in corpus() {
        let m = match_boundaries(&brep, &MatchOptions::default()).map_err(|e| format!("{name}: {e}"))?;
        check(m.brep.west == brep.west, format!("{name}: West changed"))?;
        let (old, new) = (&brep.east, &m.brep.east);
        let (from, to) = (&m.provenance.markers.east_params, &m.provenance.markers.west_params);
        let diam = brep.diameter();
        let mut id = 0.0f64;
        for k in 0..2000 {
            let t = k as f64 / 1999.0;
            id = id.max((new.point_at(piecewise_affine(t, from, to)) - old.point_at(t)).norm());
        }
        let h = one_sided_distance(old, new, |t| piecewise_affine(t, from, to), 1000)?
            .max(one_sided_distance(new, old, |s| piecewise_affine(s, to, from), 1000)?);
        check(id <= 1e-12 * diam.max(1.0), format!("{name}: identity off by {id:e}"))?;
        check(h <= 1e-9 * diam, format!("{name}: Hausdorff {h:e}"))?;
        worst_id = worst_id.max(id / diam.max(1.0));
        worst_h = worst_h.max(h / diam);
    }
    Ok(format!("identity {worst_id:.1e}, Hausdorff/diameter {worst_h:.1e} on 6 geometries"))
}

fn solved(brep: &Brep) -> Result<(Polygon, ScDiskMap), String> {
    let poly = split_long_edges(&polygonize(brep, 1e-3).map_err(|e| e.to_string())?, DEFAULT_KAPPA);
    let map = solve_parameter_problem(&poly, &ScOptions::default()).map_err(|e| e.to_string())?;
    Ok((poly, map))
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    while (a - b).abs() > 4.0 * f64::EPSILON * a {
        let m = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = m;
    }
    a
}

fn ellip_k(k: f64) -> f64 {
    FRAC_PI_2 / agm(1.0, (1.0 - k * k).sqrt())
}

/// Modulus `k` whose half-plane rectangle map has aspect `2K/K' = aspect`.
fn modulus_for_aspect(aspect: f64) -> f64 {
    let (mut lo, mut hi) = (1e-12, 1.0 - 1e-16);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if 2.0 * ellip_k(mid) / ellip_k((1.0 - mid * mid).sqrt()) > aspect {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Möbius map sending `z[0], z[1], z[2]` to `w[0], w[1], w[2]`.
fn mobius_through(z: [Complex64; 3], w: [Complex64; 3]) -> impl Fn(Complex64) -> Complex64 {
    move |x| {
        let r = (x - z[0]) * (z[1] - z[2]) / ((x - z[2]) * (z[1] - z[0]));
        let a = (w[1] - w[2]) / (w[1] - w[0]);
        (w[0] * a - r * w[2]) / (a - r)
    }
}

fn criterion_3() -> Outcome {
    let (_, map) = solved(&rectangle(1.0, 1.0))?;
    check(map.residual() <= 1e-8, format!("square residual {:e}", map.residual()))?;
    let pv = map.prevertices();
    let z: Vec<Complex64> = (0..4).map(|k| pv.z(k)).collect();
    let m = mobius_through([z[0], z[1], z[2]], [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0)]);
    let args = [0.0, FRAC_PI_2, PI, m(z[3]).arg().rem_euclid(TAU)];
    let gap_err = (0..4)
        .map(|k| ((args[(k + 1) % 4] - args[k]).rem_euclid(TAU) - FRAC_PI_2).abs())
        .fold(0.0, f64::max);
    check(gap_err <= 1e-6, format!("square arc gaps off by {gap_err:e}"))?;

    let (poly, map) = solved(&rectangle(1.0, 5.0))?;
    check(map.residual() <= 1e-8, format!("rectangle residual {:e}", map.residual()))?;
    let rect = disk_to_rectangle(&map, RectCorners::from_polygon_corners(poly.corners)).map_err(|e| e.to_string())?;
    let modulus = rect.modulus();
    let k = modulus_for_aspect(5.0);
    let oracle = 4.0 * k / ((1.0 - k) * (1.0 - k));
    let zc: Vec<Complex64> = poly.corners.iter().map(|&j| pv_z(&map, j)).collect();
    let rho = cross_ratio(zc[0], zc[1], zc[2], zc[3]).map_err(|e| e.to_string())?.norm();
    check((modulus - 5.0).abs() <= 1e-3, format!("modulus {modulus}"))?;
    check(((rho - oracle) / oracle).abs() <= 1e-6, format!("corner cross-ratio {rho} vs {oracle}"))?;
    Ok(format!("gaps {gap_err:.1e}, modulus {modulus:.6}, cross-ratio rel. error {:.1e}", ((rho - oracle) / oracle).abs()))
}

fn pv_z(map: &ScDiskMap, j: usize) -> Complex64 {
    map.prevertices().z(j)
}

fn segment_distance(q: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = (((q - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0);
    (a + d * t - q).norm()
}

fn criterion_4() -> Outcome {
    let (poly, map) = solved(&rectangle(1.0, 1.0))?;
    let mut rng = Lcg(9);
    let h = 1e-6;
    let mut worst_cr = 0.0f64;
    for _ in 0..50 {
        let z = Complex64::from_polar(0.95 * rng.next().sqrt(), rng.range(0.0, TAU));
        let f = |d: Complex64| map.eval_at(z + d).map_err(|e| e.to_string());
        let fx = (f(c(h, 0.0))? - f(c(-h, 0.0))?) / (2.0 * h);
        let fy = (f(c(0.0, h))? - f(c(0.0, -h))?) / (2.0 * h);
        let scale = fx.norm().max(fy.norm());
        worst_cr = worst_cr.max((fx.re - fy.im).abs() / scale).max((fy.re + fx.im).abs() / scale);
    }
    let v = &poly.vertices;
    let mut worst_b = 0.0f64;
    for _ in 0..200 {
        let w = map.eval_at(Complex64::cis(rng.range(0.0, TAU))).map_err(|e| e.to_string())?;
        let d = (0..v.len()).map(|j| segment_distance(w, v[j], v[(j + 1) % v.len()])).fold(f64::INFINITY, f64::min);
        worst_b = worst_b.max(d / poly.diameter());
    }
    check(worst_cr <= 1e-4, format!("Cauchy-Riemann defect {worst_cr:e}"))?;
    check(worst_b <= 1e-5, format!("boundary distance {worst_b:e}"))?;
    Ok(format!("Cauchy-Riemann {worst_cr:.1e}, boundary/diameter {worst_b:.1e}"))
}

fn criterion_5() -> Outcome {
    let east = NurbsCurve::bspline(KnotVector::bezier(3, 0.0, 1.0), vec![p(1.0, 0.0), p(1.0, 0.1), p(1.0, 0.5), p(1.0, 5.0)])
        .map_err(|e| e.to_string())?;
    let r = rectangle(1.0, 5.0);
    let brep = Brep::new(r.west, east, r.south, r.north).map_err(|e| e.to_string())?;
    let opts = MatchOptions {
        markers: Some(21),
        ..Default::default()
    };
    let m = match_boundaries(&brep, &opts).map_err(|e| e.to_string())?;
    let mk = &m.provenance.markers;
    // after matching, the k-th marker sits at the same parameter on both sides
    let mut worst = 0.0f64;
    for (k, &tw) in mk.west_params.iter().enumerate() {
        let target = m.brep.west.point_at(tw).y;
        let te = m.brep.east.closest_point(p(1.0, target), tw).map_err(|e| e.to_string())?;
        worst = worst.max((te - tw).abs()).max((tw - k as f64 / 20.0).abs());
    }
    check(worst <= 1e-3, format!("marker parameters differ by {worst:e}"))?;
    Ok(format!("max marker parameter difference {worst:.1e} over 21 markers"))
}

fn criterion_6() -> Outcome {
    let brep = s_channel();
    let before = quality_report(&linear_only_pipeline(&brep).map_err(|e| e.to_string())?, 101, 101).map_err(|e| e.to_string())?;
    let m = match_boundaries(&brep, &MatchOptions::default()).map_err(|e| e.to_string())?;
    let after = quality_report(&linear_only_pipeline(&m.brep).map_err(|e| e.to_string())?, 101, 101).map_err(|e| e.to_string())?;
    check(before.fold && before.min_sj <= 0.0, format!("unmatched min_sj {}", before.min_sj))?;
    check(!after.fold && after.min_sj > 0.0, format!("matched min_sj {}", after.min_sj))?;
    Ok(format!("min |J|_s {:.4} unmatched, {:.4} matched", before.min_sj, after.min_sj))
}

fn criterion_7() -> Outcome {
    let m = match_boundaries(&s_channel(), &MatchOptions::default()).map_err(|e| e.to_string())?;
    let opts = EllipticOptions::default();
    let guess = k_refine(&linear_only_pipeline(&m.brep).map_err(|e| e.to_string())?, &opts).map_err(|e| e.to_string())?;
    let r0 = assemble_elliptic(&guess, &opts).residual_norm();
    let rep = elliptic_improve(&guess, &opts).map_err(|e| e.to_string())?;
    let r1 = assemble_elliptic(&rep.surface, &opts).residual_norm();
    let boundary_fixed = (0..guess.control().len())
        .filter(|&i| guess.is_boundary_index(i))
        .all(|i| guess.control()[i] == rep.surface.control()[i] && guess.weights()[i] == rep.surface.weights()[i]);
    check(r1 * 10.0 <= r0, format!("residual {r0:e} -> {r1:e}"))?;
    check(boundary_fixed, "boundary control data moved")?;
    check(rep.iterations <= opts.max_picard_iters, format!("{} iterations", rep.iterations))?;
    Ok(format!("residual {r0:.2e} -> {r1:.2e} ({:.1e}x) in {} iterations", r0 / r1, rep.iterations))
}

fn bilinear(f: impl Fn(f64, f64) -> (f64, f64)) -> Result<NurbsSurface, String> {
    let q = |u: f64, v: f64| {
        let (x, y) = f(u, v);
        p(x, y)
    };
    let k = || KnotVector::bezier(1, 0.0, 1.0);
    NurbsSurface::new(k(), k(), vec![q(0.0, 0.0), q(1.0, 0.0), q(0.0, 1.0), q(1.0, 1.0)], vec![1.0; 4]).map_err(|e| e.to_string())
}

fn criterion_8() -> Outcome {
    let e = |r: scmatch::Result<f64>| r.map_err(|e| e.to_string());
    let id = bilinear(|u, v| (u, v))?;
    let q = quality_report(&id, 101, 101).map_err(|e| e.to_string())?;
    check((q.min_sj - 1.0).abs() <= 1e-12 && q.max_unif.unwrap_or(1.0) <= 1e-12, "identity")?;
    let shear = bilinear(|u, v| (u + v, v))?;
    let sj = e(scaled_jacobian(&shear, 0.3, 0.6))?;
    check((sj - FRAC_1_SQRT_2).abs() <= 1e-9, format!("shear {sj}"))?;
    let flip = bilinear(|u, v| (v, u))?;
    let q = quality_report(&flip, 101, 101).map_err(|e| e.to_string())?;
    check(q.fold && q.max_unif.is_none(), "reflection")?;
    let scaled = bilinear(|u, v| (2.5 * u, 2.5 * v))?;
    let r = area_ratio(&scaled);
    let m = e(uniformity(&scaled, 0.7, 0.2, r))?;
    let q = quality_report(&scaled, 101, 101).map_err(|e| e.to_string())?;
    check(m <= 1e-12 && q.max_unif.unwrap() <= 1e-12, format!("scaling uniformity {m:e}"))?;
    let annulus = linear_only_pipeline(&quarter_annulus()).map_err(|e| e.to_string())?;
    let ra = area_ratio(&annulus);
    check((ra - 0.75 * PI).abs() <= 1e-8, format!("annulus area ratio {ra}"))?;
    Ok(format!("shear |J|_s {sj:.10}, scaling m_unif {m:.1e}"))
}

fn criterion_9() -> Outcome {
    let square = linear_only_pipeline(&rectangle(1.0, 1.0)).map_err(|e| e.to_string())?;
    let rows = poisson_demo(&square, 4).map_err(|e| e.to_string())?;
    let &(l2, h1) = convergence_rates(&rows).last().ok_or("no rates")?;
    check((l2 - 3.0).abs() <= 0.2, format!("L2 rate {l2}"))?;
    check((h1 - 2.0).abs() <= 0.2, format!("H1 rate {h1}"))?;
    Ok(format!("L2 rate {l2:.3}, H1 rate {h1:.3}, {} dofs on the finest level", rows.last().unwrap().dofs))
}

/// File contents with every `"seconds": <number>` value blanked.
fn without_timings(bytes: &[u8]) -> String {
    let text = String::from_utf8_lossy(bytes);
    text.lines()
        .map(|l| if l.trim_start().starts_with("\"seconds\":") { "\"seconds\": _" } else { l })
        .collect::<Vec<_>>()
        .join("\n")
}

fn run_commands(dir: &Path) -> Result<Vec<(String, String)>, String> {
    let bin = env!("CARGO_BIN_EXE_scmatch");
    let d = |name: &str| dir.join(name).to_string_lossy().into_owned();
    let corpus = d("corpus");
    let steps: Vec<Vec<String>> = vec![
        vec!["corpus".into(), "--out".into(), corpus.clone()],
        vec!["match".into(), format!("{corpus}/s_channel.json"), "--out".into(), d("matched.json")],
        vec!["match".into(), format!("{corpus}/rect5.json"), "--fixed-side".into(), "east".into(), "--out".into(), d("m5.json")],
        vec!["surface".into(), d("matched.json"), "--out".into(), d("coons.json")],
        vec!["surface".into(), d("matched.json"), "--method".into(), "pde".into(), "--out".into(), d("pde.json")],
        vec!["quality".into(), d("pde.json"), "--grid".into(), "51".into(), "--field".into(), d("field.csv")],
        vec!["plot".into(), d("pde.json"), "--metric".into(), "sj".into(), "--out".into(), d("plot.svg")],
        vec!["poisson".into(), d("coons.json"), "--levels".into(), "2".into(), "--out".into(), d("poisson.csv")],
        vec!["scmap".into(), format!("{corpus}/annulus.json"), "--out".into(), d("scmap.json")],
    ];
    let mut outputs = Vec::new();
    for args in steps {
        let out = Command::new(bin).args(&args).output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
        }
        outputs.push((format!("{} stdout", args[0]), without_timings(&out.stdout)));
    }
    let mut files: Vec<_> = walk(dir)?;
    files.sort();
    for f in files {
        let bytes = std::fs::read(&f).map_err(|e| e.to_string())?;
        outputs.push((f.strip_prefix(dir).unwrap().display().to_string(), without_timings(&bytes)));
    }
    Ok(outputs)
}

fn walk(dir: &Path) -> Result<Vec<std::path::PathBuf>, String> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        if path.is_dir() {
            out.extend(walk(&path)?);
        } else {
            out.push(path);
        }
    }
    Ok(out)
}

fn criterion_10() -> Outcome {
    let (a, b) = (tempfile::TempDir::new().map_err(|e| e.to_string())?, tempfile::TempDir::new().map_err(|e| e.to_string())?);
    let first = run_commands(a.path())?;
    let second = run_commands(b.path())?;
    check(first.len() == second.len(), "different number of outputs")?;
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        check(x == y, format!("{name} differs between runs"))?;
    }
    Ok(format!("{} outputs byte-identical over two runs of 7 commands", first.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, f64, fn() -> Outcome); 10] = [
        ("basis invariance under affine knot maps", 5.0, criterion_1),
        ("geometry preservation of the free side", 30.0, criterion_2),
        ("square and rectangle SC oracles", 60.0, criterion_3),
        ("conformality of the square map", 30.0, criterion_4),
        ("rectangle marker pairing", 60.0, criterion_5),
        ("fold repair on the S-channel", 120.0, criterion_6),
        ("elliptic improvement on the S-channel", 120.0, criterion_7),
        ("quality metric unit suite", 5.0, criterion_8),
        ("Poisson convergence rates", 120.0, criterion_9),
        ("CLI determinism", 60.0, criterion_10),
    ];
    let mut failures = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed().as_secs_f64();
        let result = match result {
            Ok(detail) if secs > *budget => Err(format!("{detail}; runtime over the {budget} s budget")),
            other => other,
        };
        match result {
            Ok(detail) => println!("criterion {:>2} PASS [{secs:7.2} s] {name}: {detail}", k + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL [{secs:7.2} s] {name}: {why}", k + 1);
            }
        }
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
