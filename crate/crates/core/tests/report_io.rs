use std::f64::consts::PI;

use eigbound::manifold::{build_circle, build_flat_torus, build_icosphere, parse_off, Manifold};
use eigbound::model::flat_mu_p;
use eigbound::report::{
    classify, default_slack, sweep, verify_bound, verify_bound_with, write_sweep_csv, BoundReport, DiameterSource,
    Direction, Overrides, SweepParam, SweepSpec, Verdict, VerifyOptions,
};
use eigbound::sl::MuOptions;
use proptest::prelude::*;

fn octahedron() -> Manifold {
    parse_off(
        "OFF\n6 8 12\n1 0 0\n-1 0 0\n0 1 0\n0 -1 0\n0 0 1\n0 0 -1\n\
         3 0 2 4\n3 2 1 4\n3 1 3 4\n3 3 0 4\n3 2 0 5\n3 1 2 5\n3 3 1 5\n3 0 3 5\n"
            .as_bytes(),
    )
    .unwrap()
    .into()
}

#[test]
fn torus_holds_with_default_slack() {
    let m: Manifold = build_flat_torus(2.0 * PI, PI, 48, 24).unwrap().into();
    let r = verify_bound_with(&m, &Overrides::default(), &VerifyOptions::default()).unwrap();
    assert_eq!(r.verdict, Verdict::Holds);
    assert_eq!(r.diameter_source, DiameterSource::Analytic);
    assert!((r.mu_bound - 0.8).abs() < 1e-9);
    let h = r.solver_tolerances.mesh_size;
    let expected = default_slack(r.mu_bound, 0.0, h, r.lambda_estimate.unwrap());
    assert!(r.slack_used >= expected && r.slack_used < expected * (1.0 + 1e-6));
    assert!(r.margin.unwrap() > r.slack_used);
}

#[test]
fn loaded_mesh_uses_clamped_graph_diameter() {
    let o = Overrides {
        n: Some(2),
        kappa: Some(4.0),
        diameter: None,
    };
    let r = verify_bound(&octahedron(), &o, 0.5).unwrap();
    assert_eq!(r.diameter_source, DiameterSource::Graph);
    assert_eq!(r.diameter_used, PI / 2.0);
    assert!(r.diameter_graph.unwrap() > PI / 2.0);
    assert_eq!(r.recomputed_verdict(), r.verdict);

    let flat = Overrides {
        kappa: Some(0.0),
        ..o
    };
    let r = verify_bound(&octahedron(), &flat, 0.5).unwrap();
    assert_eq!(r.diameter_used, r.diameter_graph.unwrap());
}

#[test]
fn p_runs_are_model_only() {
    let m: Manifold = build_circle(2.0 * PI, 64).unwrap().into();
    let options = VerifyOptions {
        p: Some(3.0),
        ..VerifyOptions::default()
    };
    let r = verify_bound_with(&m, &Overrides::default(), &options).unwrap();
    assert_eq!(r.verdict, Verdict::ModelOnly);
    assert!((r.mu_bound / flat_mu_p(3.0, PI) - 1.0).abs() < 1e-6);
    let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert!(json.get("lambda_estimate").is_none());
    assert!(json.get("margin").is_none());
    assert_eq!(json["verdict"], "model_only");
}

#[test]
fn json_round_trip_is_exact() {
    let m: Manifold = build_icosphere(1.0, 2).unwrap().into();
    let r = verify_bound(&m, &Overrides::default(), 0.05).unwrap();
    let text = r.to_json();
    let back: BoundReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, r);
    assert_eq!(back.to_json(), text);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    for key in [
        "manifold_name", "n", "kappa", "diameter_used", "diameter_source", "lambda_estimate",
        "lambda_exact", "mu_bound", "p", "margin", "verdict", "slack_used", "solver_tolerances",
    ] {
        assert!(value.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn sweep_examples() {
    let options = MuOptions::default();
    let spec = SweepSpec {
        varying: SweepParam::Diameter,
        from: 1.0,
        to: 3.0,
        steps: 5,
        n: 2,
        kappa: 0.0,
        diameter: 1.0,
        p: None,
    };
    let rows = sweep(&spec, &options).unwrap();
    assert_eq!(rows.len(), 5);
    for row in &rows {
        assert!((row.mu - PI * PI / (row.param * row.param)).abs() < 1e-9 * row.mu);
    }
    assert_eq!(rows[0].monotone_direction, Direction::Start);
    assert!(rows[1..].iter().all(|r| r.monotone_direction == Direction::Decreasing));

    let kappa = SweepSpec {
        varying: SweepParam::Kappa,
        from: -1.0,
        to: 1.0,
        n: 1,
        diameter: 2.0,
        ..spec
    };
    let rows = sweep(&kappa, &options).unwrap();
    for row in &rows {
        assert!((row.mu - PI * PI / 4.0).abs() < 1e-9);
    }
    assert!(rows[1..].iter().all(|r| r.monotone_direction == Direction::Constant));

    let p = SweepSpec {
        varying: SweepParam::P,
        from: 1.2,
        to: 3.0,
        n: 2,
        kappa: 0.0,
        diameter: 2.0,
        ..spec
    };
    for row in sweep(&p, &options).unwrap() {
        assert!((row.mu / flat_mu_p(row.param, 2.0) - 1.0).abs() < 1e-6);
    }
}

#[test]
fn csv_round_trip_is_exact() {
    let spec = SweepSpec {
        varying: SweepParam::N,
        from: 1.0,
        to: 4.0,
        steps: 4,
        n: 1,
        kappa: -1.0,
        diameter: 1.7,
        p: None,
    };
    let rows = sweep(&spec, &MuOptions::default()).unwrap();
    let mut buf = Vec::new();
    write_sweep_csv(&rows, &mut buf).unwrap();
    let mut reader = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(reader.headers().unwrap(), vec!["param", "mu", "monotone_direction"]);
    let parsed: Vec<(f64, f64, String)> = reader.deserialize().map(|r| r.unwrap()).collect();
    assert_eq!(parsed.len(), rows.len());
    for (row, (param, mu, dir)) in rows.iter().zip(parsed) {
        assert_eq!(row.param, param);
        assert_eq!(row.mu, mu);
        assert_eq!(row.monotone_direction.as_str(), dir);
    }
    // Under negative curvature the bound weakens as the dimension grows.
    assert!(rows[1..].iter().all(|r| r.monotone_direction == Direction::Decreasing));
}

proptest! {
    #[test]
    fn verdict_is_a_function_of_margin_and_slack(margin in -1.0f64..1.0, slack in 1e-6f64..0.5) {
        let v = classify(margin, slack);
        prop_assert_ne!(v, Verdict::ModelOnly);
        prop_assert_eq!(v == Verdict::Sharp, margin.abs() <= slack);
        prop_assert_eq!(v == Verdict::Violated, margin < -slack);
    }
}
