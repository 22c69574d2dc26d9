use trapped::catalog::{self, EntryKind, EntryRef};
use trapped::checks::check_scenario;
use trapped::variation::conformal_check;
use trapped::{CoordinatePoint, GeomError, GridSpec, Tolerances};

fn chart_samples(m: &trapped::MetricField, n: usize) -> Vec<CoordinatePoint> {
    // Deterministic points inside the chart, away from its edges.
    let d = m.dimension();
    (0..n)
        .map(|k| {
            let coords = (0..d)
                .map(|i| {
                    let s = ((k * (2 * i + 3) + i) as f64 * 0.618_033_988_75).fract();
                    let (lo, hi) = (m.chart().lower[i], m.chart().upper[i]);
                    match (lo.is_finite(), hi.is_finite()) {
                        (true, true) => lo + (hi - lo) * (0.1 + 0.8 * s),
                        (true, false) => lo + 0.5 + 2.5 * s,
                        _ => -2.0 + 4.0 * s,
                    }
                })
                .collect();
            CoordinatePoint::new(coords)
        })
        .collect()
}

#[test]
fn scenario_expectations_reproduce() {
    let tol = Tolerances::default();
    let mut failures = Vec::new();
    for name in catalog::names_of(EntryKind::Scenario) {
        let s = catalog::scenario(name).unwrap();
        for o in check_scenario(&s, &tol).unwrap() {
            println!("{name:20} {:18} expected {:32} actual {} [{}]", o.quantity, o.expected, o.actual, o.pass);
            if !o.pass {
                failures.push(format!("{name}: {}", o.quantity));
            }
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn declared_conformal_fields_pass_conformal_check() {
    for e in catalog::list_entries().iter().filter(|e| e.kind == EntryKind::VectorField) {
        for m in &e.conformal_in {
            let metric = catalog::metric(&m.parse().unwrap()).unwrap();
            let xi = catalog::vector_field(&EntryRef::new(e.name), &metric).unwrap();
            let c = conformal_check(&metric, &xi, &chart_samples(&metric, 50), 1e-8).unwrap();
            assert!(c.accepted, "{} in {m}: residual {:e}", e.name, c.normalized_residual);
        }
    }
}

#[test]
fn metrics_are_symmetric_and_time_oriented() {
    for name in catalog::names_of(EntryKind::Metric) {
        let m = catalog::metric(&EntryRef::new(name)).unwrap();
        let samples = chart_samples(&m, 100);
        m.validate_at(&samples).unwrap();
        for p in &samples {
            let g = m.metric_at(p.coords()).unwrap();
            assert_eq!(g.clone(), g.transpose(), "{name}");
            let t = m.time_orientation_at(p.coords()).unwrap();
            assert!(m.inner(p.coords(), &t, &t).unwrap() < 0.0, "{name} at {p:?}");
        }
    }
}

#[test]
fn embeddings_are_immersed_on_default_grid() {
    for name in catalog::names_of(EntryKind::Embedding) {
        let e = catalog::embedding(&EntryRef::new(name)).unwrap();
        let grid = GridSpec::default_for(e.dim());
        let g = e.grid(&grid).unwrap();
        let result: Result<Vec<_>, GeomError> = g.points.iter().map(|p| e.induced_point_data(&p.u)).collect();
        if name == "null_line" {
            assert!(matches!(result, Err(GeomError::DegenerateInducedMetric { .. })));
        } else {
            result.unwrap_or_else(|err| panic!("{name}: {err}"));
        }
    }
}

#[test]
fn listing_contains_required_entries() {
    let names: Vec<_> = catalog::list_entries().iter().map(|e| e.name).collect();
    for required in [
        "minkowski",
        "schwarzschild_ef",
        "robertson_walker",
        "ppwave",
        "round_sphere",
        "flat_torus",
        "straight_line",
        "accelerated_curve",
        "comoving_sphere_rw",
        "t_const_hypersurface_rw",
        "ef_sphere",
        "time_translation",
        "dilation",
        "rw_conformal",
        "ppwave_null_killing",
        "radial_unit",
    ] {
        assert!(names.contains(&required), "{required}");
    }
}

#[test]
fn out_of_range_parameters_are_rejected() {
    let r: EntryRef = "schwarzschild_ef:M=0".parse().unwrap();
    assert!(matches!(catalog::metric(&r), Err(GeomError::ParamOutOfRange { .. })));
    let r: EntryRef = "comoving_sphere_rw:t0=-1".parse().unwrap();
    assert!(matches!(catalog::embedding(&r), Err(GeomError::ParamOutOfRange { .. })));
}
