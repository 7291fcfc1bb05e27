mod common;

use common::{line, p, rectangle};
use scmatch::brep::Side;
use scmatch::io::corpus::{corpus, s_channel, write_corpus};
use scmatch::io::{plot_svg, BrepFile, PlotMetric, SurfaceFile, SurfaceProvenance, StageTiming, BREP_FORMAT};
use scmatch::matching::{match_boundaries, MatchOptions};
use scmatch::paramgen::linear_only_pipeline;
use scmatch::quality::quality_report;
use scmatch::splines::{KnotVector, NurbsCurve};
use scmatch::{Brep, Error};

fn schema_message(text: &str) -> String {
    match BrepFile::from_json(text).and_then(|f| f.to_brep()) {
        Err(Error::Schema(m)) => m,
        other => panic!("expected a schema error, got {other:?}"),
    }
}

fn rect_json() -> String {
    BrepFile::from_brep(&rectangle(1.0, 5.0)).to_json()
}

fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(&rect_json()).unwrap();
    f(&mut v);
    serde_json::to_string(&v).unwrap()
}

#[test]
fn brep_files_round_trip_byte_for_byte() {
    for (name, brep) in corpus() {
        let text = BrepFile::from_brep(&brep).to_json();
        let back = BrepFile::from_json(&text).unwrap().to_brep().unwrap();
        for side in Side::ALL {
            assert_eq!(back.curve(side), brep.curve(side), "{name} {side}");
        }
        assert_eq!(BrepFile::from_brep(&back).to_json(), text, "{name}");
    }
}

#[test]
fn matched_brep_round_trips_with_provenance() {
    let m = match_boundaries(&rectangle(1.0, 3.0), &MatchOptions::default()).unwrap();
    let mut file = BrepFile::from_brep(&m.brep);
    file.provenance = Some(m.provenance.clone());
    let text = file.to_json();
    let back = BrepFile::from_json(&text).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_json(), text);
}

#[test]
fn surface_files_round_trip() {
    let s = linear_only_pipeline(&s_channel()).unwrap();
    let prov = SurfaceProvenance {
        method: "coons".into(),
        stages: vec![StageTiming { stage: "coons".into(), seconds: 0.25 }],
        matching: None,
        elliptic: None,
    };
    let file = SurfaceFile::from_surface(&s, Some(prov));
    let text = file.to_json();
    let back = SurfaceFile::from_json(&text).unwrap();
    assert_eq!(back.to_surface().unwrap(), s);
    assert_eq!(back.to_json(), text);
}

#[test]
fn missing_label_is_named() {
    let text = edit(|v| {
        v["curves"].as_array_mut().unwrap().retain(|c| c["label"] != "East");
    });
    let m = schema_message(&text);
    assert!(m.contains("East"), "{m}");
}

#[test]
fn duplicate_and_unknown_labels_are_rejected() {
    let dup = edit(|v| {
        let c = v["curves"][0].clone();
        v["curves"].as_array_mut().unwrap().push(c);
    });
    assert!(schema_message(&dup).contains("more than once"));
    let unknown = edit(|v| v["curves"][0]["label"] = "Up".into());
    assert!(schema_message(&unknown).contains("Up"));
}

#[test]
fn invalid_curves_are_rejected() {
    let knots = edit(|v| v["curves"][0]["knots"] = serde_json::json!([0.0, 1.0, 0.5, 1.0]));
    schema_message(&knots);
    let weights = edit(|v| v["curves"][1]["weights"] = serde_json::json!([1.0, -1.0]));
    schema_message(&weights);
    let count = edit(|v| v["curves"][1]["control_points"] = serde_json::json!([[1.0, 0.0]]));
    schema_message(&count);
}

#[test]
fn open_loops_are_rejected() {
    let text = edit(|v| v["curves"][1]["control_points"][0] = serde_json::json!([1.0, 0.1]));
    schema_message(&text);
}

#[test]
fn wrong_format_and_extra_fields_are_rejected() {
    let fmt = edit(|v| v["format"] = "something-else".into());
    assert!(schema_message(&fmt).contains(BREP_FORMAT));
    let extra = edit(|v| v["colour"] = "red".into());
    schema_message(&extra);
    schema_message("{ not json");
}

#[test]
fn corpus_is_deterministic_and_valid() {
    let dir = std::env::temp_dir().join(format!("scmatch-corpus-{}", std::process::id()));
    let a = write_corpus(&dir.join("a")).unwrap();
    let b = write_corpus(&dir.join("b")).unwrap();
    assert_eq!(a.len(), 6);
    for (x, y) in a.iter().zip(&b) {
        let (tx, ty) = (std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        assert_eq!(tx, ty);
        BrepFile::read(x).unwrap().to_brep().unwrap();
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn unmatched_s_channel_coons_folds() {
    let s = linear_only_pipeline(&s_channel()).unwrap();
    let q = quality_report(&s, 101, 101).unwrap();
    assert!(q.fold && q.min_sj < 0.0);
}

#[test]
fn l_channel_has_a_sharp_corner_and_closes() {
    let (_, b) = corpus().into_iter().find(|(n, _)| *n == "l_channel").unwrap();
    b.check_closure().unwrap();
    assert_eq!(b.west.degree(), 1);
}

fn tags_balance(svg: &str) -> bool {
    let mut stack = Vec::new();
    let mut rest = svg;
    while let Some(start) = rest.find('<') {
        let end = start + rest[start..].find('>').unwrap();
        let tag = &rest[start + 1..end];
        rest = &rest[end + 1..];
        if tag.starts_with('?') || tag.ends_with('/') {
            continue;
        }
        let name = tag.trim_start_matches('/').split_whitespace().next().unwrap();
        if tag.starts_with('/') {
            if stack.pop() != Some(name.to_string()) {
                return false;
            }
        } else {
            stack.push(name.to_string());
        }
    }
    stack.is_empty()
}

#[test]
fn svg_is_well_formed() {
    let s = linear_only_pipeline(&common::quarter_annulus()).unwrap();
    for metric in [PlotMetric::ScaledJacobian, PlotMetric::Uniformity, PlotMetric::None] {
        let svg = plot_svg(&s, 11, metric).unwrap();
        assert!(svg.starts_with("<?xml"));
        assert!(tags_balance(&svg));
        let cells = svg.matches("<polygon points=").count();
        assert_eq!(cells, if metric == PlotMetric::None { 0 } else { 100 });
        assert_eq!(svg.matches("<polyline").count(), 22);
    }
    assert!(plot_svg(&s, 1, PlotMetric::None).is_err());
}

#[test]
fn svg_colors_folded_cells_red() {
    let k = KnotVector::bezier(1, 0.0, 1.0);
    let flipped = Brep::new(
        line((0.0, 0.0), (1.0, 0.0)),
        line((0.0, 1.0), (1.0, 1.0)),
        line((0.0, 0.0), (0.0, 1.0)),
        NurbsCurve::bspline(k, vec![p(1.0, 0.0), p(1.0, 1.0)]).unwrap(),
    )
    .unwrap();
    let s = linear_only_pipeline(&flipped).unwrap();
    let svg = plot_svg(&s, 3, PlotMetric::ScaledJacobian).unwrap();
    assert!(svg.contains("fill=\"#ff0000\""));
    assert_eq!(PlotMetric::parse("sj"), Some(PlotMetric::ScaledJacobian));
    assert_eq!(PlotMetric::parse("bogus"), None);
}
