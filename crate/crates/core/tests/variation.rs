use std::f64::consts::PI;

use trapped::catalog::{self, EntryKind, EntryRef};
use trapped::variation::{
    conformal_factor, first_variation_density, flow_volume_oracle, killing_integral_check, volume_variation,
    BoundaryPolicy, FlowSpec,
};
use trapped::{Embedding, GeomError, GridSpec, QuadratureRule, Tolerances, VectorField};

fn embedding(r: &str) -> Embedding {
    catalog::embedding(&r.parse().unwrap()).unwrap()
}

fn embedding_in(r: &str, metric: &str) -> Embedding {
    let m = catalog::metric(&metric.parse().unwrap()).unwrap();
    catalog::embedding_in(&r.parse().unwrap(), m).unwrap()
}

fn field(r: &str, e: &Embedding) -> VectorField {
    catalog::vector_field(&r.parse().unwrap(), e.ambient()).unwrap()
}

fn compatible(field_name: &str, metric: &str) -> Vec<Embedding> {
    let base: EntryRef = metric.parse().unwrap();
    let chart = catalog::entry(&base.name).unwrap().charts[0];
    let accepted = catalog::entry(field_name).unwrap().charts.clone();
    if !accepted.contains(&chart) {
        return Vec::new();
    }
    catalog::closed_embeddings()
        .into_iter()
        .filter(|n| catalog::entry(n).unwrap().charts.contains(&chart))
        .map(|n| {
            // The Robertson–Walker chart needs t > 0.
            let has_t0 = catalog::entry(n).unwrap().params.iter().any(|p| p.name == "t0");
            if metric.starts_with("robertson_walker") && has_t0 {
                embedding_in(&format!("{n}:t0=1"), metric)
            } else {
                embedding_in(n, metric)
            }
        })
        .collect()
}

/// Surfaces that are quotients of a plane by coordinate translations. Only
/// fields invariant under those translations descend to them.
const IDENTIFIED: [&str; 3] = ["flat_torus", "t_const_hypersurface_rw", "ppwave_null_torus"];
const TRANSLATION_INVARIANT: [&str; 4] = ["time_translation", "translation", "rw_conformal", "ppwave_null_killing"];

fn descends(field: &str, surface: &str) -> bool {
    !IDENTIFIED.contains(&surface) || TRANSLATION_INVARIANT.contains(&field)
}

const SAMPLE_U: [[f64; 2]; 4] = [[0.3, 0.1], [1.0, 2.0], [1.6, 4.0], [2.7, 5.9]];

#[test]
fn translation_density_vanishes() {
    let e = embedding("round_sphere:r=1.3");
    for axis in 1..4 {
        let xi = field(&format!("translation:axis={axis}"), &e);
        for u in SAMPLE_U {
            assert!(first_variation_density(&e, &xi, &u).unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn dilation_density_is_dimension() {
    for name in ["round_sphere:r=0.7", "revolution_torus", "tilted_sphere"] {
        let e = embedding(name);
        let xi = field("dilation", &e);
        for u in SAMPLE_U {
            let v = first_variation_density(&e, &xi, &u).unwrap();
            assert!((v - 2.0).abs() < 1e-10, "{name}: {v}");
        }
    }
    let c = embedding("circle:r=2");
    let xi = field("dilation", &c);
    for s in [0.1, 2.0, 5.0] {
        assert!((first_variation_density(&c, &xi, &[s]).unwrap() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn radial_density_is_two_over_r() {
    for r in [0.5, 2.0, 3.0] {
        let e = embedding(&format!("round_sphere:r={r}"));
        let xi = field("radial_unit", &e);
        for u in SAMPLE_U {
            let v = first_variation_density(&e, &xi, &u).unwrap();
            assert!((v - 2.0 / r).abs() < 1e-10, "r = {r}: {v}");
        }
    }
}

#[test]
fn rigid_translation_of_flat_torus() {
    let e = embedding("flat_torus");
    let grid = GridSpec::default_for(2);
    for axis in 1..4 {
        let xi = field(&format!("translation:axis={axis}"), &e);
        let vv = volume_variation(&e, &xi, &grid, BoundaryPolicy::RequireClosed).unwrap();
        assert!(vv.derivative.abs() < 1e-9, "{}", vv.derivative);
        let oracle = flow_volume_oracle(&e, &FlowSpec::new(xi, 1e-3), &grid).unwrap();
        assert!(oracle.derivative.abs() < 1e-7, "{}", oracle.derivative);
    }
}

#[test]
fn killing_fields_preserve_volume() {
    let grid = GridSpec::default_for(2);
    let cases = [
        ("rotation_xy", "round_sphere:r=1.5"),
        ("rotation_xy", "tilted_sphere"),
        ("rotation_xy", "revolution_torus"),
        ("boost_tx", "round_sphere"),
        ("time_translation", "boosted_sphere"),
        ("translation:axis=2", "revolution_torus"),
    ];
    for (f, s) in cases {
        let e = embedding(s);
        let xi = field(f, &e);
        let vv = volume_variation(&e, &xi, &grid, BoundaryPolicy::RequireClosed).unwrap();
        let oracle = flow_volume_oracle(&e, &FlowSpec::new(xi, 1e-3), &grid).unwrap();
        assert!(vv.derivative.abs() < 1e-7, "{f} on {s}: {}", vv.derivative);
        assert!(oracle.derivative.abs() < 1e-7, "{f} on {s}: oracle {}", oracle.derivative);
    }
}

#[test]
fn tangential_divergence_integrates_to_zero() {
    // Polynomials in angular chart coordinates are not single valued, so only
    // Cartesian-chart surfaces that are not identifications qualify.
    for name in catalog::closed_embeddings() {
        if IDENTIFIED.contains(&name) || !catalog::entry(name).unwrap().charts.contains(&"cartesian") {
            continue;
        }
        let e = embedding(name);
        let xi = field("polynomial:seed=11,degree=2,scale=0.5", &e);
        let grid = GridSpec::default_for(e.dim());
        let vv = volume_variation(&e, &xi, &grid, BoundaryPolicy::RequireClosed).unwrap();
        let scale = 1.0 + vv.normal_integral.abs() + vv.volume;
        assert!(vv.divergence_integral.abs() < 1e-6 * scale, "{name}: {:e}", vv.divergence_integral);
        assert!((vv.derivative - vv.lie_integral).abs() < 1e-6 * scale, "{name}");
    }
}

#[test]
fn open_surfaces_need_explicit_boundary_policy() {
    let e = embedding("plane");
    let xi = field("dilation", &e);
    let grid = GridSpec::default_for(2);
    let err = volume_variation(&e, &xi, &grid, BoundaryPolicy::RequireClosed).unwrap_err();
    assert!(matches!(err, GeomError::NotClosed(_)));
    let vv = volume_variation(&e, &xi, &grid, BoundaryPolicy::AcceptBoundary).unwrap();
    assert!(vv.boundary_unverified);
}

#[test]
fn conformal_factors() {
    let m = catalog::metric(&EntryRef::new("minkowski")).unwrap();
    let p = [0.3, -1.0, 2.0, 0.5];
    let dil = catalog::vector_field(&EntryRef::new("dilation"), &m).unwrap();
    assert!((conformal_factor(&m, &dil, &p).unwrap() - 1.0).abs() < 1e-12);
    let tr = catalog::vector_field(&"translation:axis=3".parse().unwrap(), &m).unwrap();
    assert!(conformal_factor(&m, &tr, &p).unwrap().abs() < 1e-12);

    for (a0, power) in [(1.0, 1.0), (2.0, 0.5), (0.7, 2.0)] {
        let r = format!("robertson_walker:a0={a0},power={power}");
        let m = catalog::metric(&r.parse().unwrap()).unwrap();
        let xi = catalog::vector_field(&format!("rw_conformal:a0={a0},power={power}").parse().unwrap(), &m).unwrap();
        for t in [0.5, 1.0, 2.5] {
            let adot = a0 * power * f64::powf(t, power - 1.0);
            let psi = conformal_factor(&m, &xi, &[t, 0.2, -0.4, 1.0]).unwrap();
            assert!((psi - adot).abs() < 1e-10 * (1.0 + adot), "{r} t = {t}: {psi} vs {adot}");
        }
    }
}

#[test]
fn killing_identity_holds_for_every_conformal_pair() {
    let tol = Tolerances::default();
    let mut checked = 0;
    for f in catalog::list_entries().iter().filter(|e| e.kind == EntryKind::VectorField) {
        for metric in &f.conformal_in {
            for e in compatible(f.name, metric) {
                if !descends(f.name, e.name()) {
                    continue;
                }
                let xi = field(f.name, &e);
                let k = killing_integral_check(&e, &xi, &GridSpec::default_for(e.dim()), &tol).unwrap();
                assert!(k.residual < 1e-6, "{} on {} in {metric}: {:e}", f.name, e.name(), k.residual);
                checked += 1;
            }
        }
    }
    assert!(checked >= 20, "only {checked} pairs");
}

#[test]
fn dilation_integral_is_area() {
    let e = embedding("round_sphere:r=2");
    let xi = field("dilation", &e);
    let k = killing_integral_check(&e, &xi, &GridSpec::default_for(2), &Tolerances::default()).unwrap();
    assert!((k.lhs - 16.0 * PI).abs() < 1e-9);
    assert!((k.rhs - 16.0 * PI).abs() < 1e-9);
}

#[test]
fn non_conformal_field_is_rejected() {
    let e = embedding("round_sphere");
    let xi = field("polynomial:seed=5,degree=2", &e);
    let err = killing_integral_check(&e, &xi, &GridSpec::default_for(2), &Tolerances::default()).unwrap_err();
    assert!(matches!(err, GeomError::NotConformal { .. }), "{err}");
}

#[test]
fn killing_check_needs_closed_surface() {
    let e = embedding("plane");
    let xi = field("time_translation", &e);
    let err = killing_integral_check(&e, &xi, &GridSpec::default_for(2), &Tolerances::default()).unwrap_err();
    assert!(matches!(err, GeomError::NotClosed(_)));
}

#[test]
fn flow_leaving_chart_is_reported() {
    let e = embedding_in("ef_sphere:r=1", "schwarzschild_ef:M=1");
    let xi = field("ef_radial:speed=-2000", &e);
    let err = flow_volume_oracle(&e, &FlowSpec::new(xi, 1e-3), &GridSpec::default_for(2)).unwrap_err();
    assert!(matches!(err, GeomError::FlowLeftChart { .. }), "{err}");
}

#[test]
fn reparametrized_sphere_has_same_volume() {
    let grid = GridSpec::new(vec![48, 48], QuadratureRule::GaussLegendre).unwrap();
    for r in [0.5, 1.0, 2.0] {
        let a = embedding(&format!("round_sphere:r={r}")).volume(&grid).unwrap();
        let b = embedding(&format!("round_sphere_z:r={r}")).volume(&grid).unwrap();
        assert!((a - b).abs() < 1e-8 * a, "{a} vs {b}");
    }
}

#[test]
fn trapezoid_converges_at_second_order() {
    let e = embedding("round_sphere");
    let exact = 4.0 * PI;
    let err = |n: usize| {
        let g = GridSpec::new(vec![n, 16], QuadratureRule::Trapezoid).unwrap();
        (e.volume(&g).unwrap() - exact).abs()
    };
    let (e1, e2, e3) = (err(16), err(32), err(64));
    assert!(e1 / e2 > 3.5 && e2 / e3 > 3.5, "{e1:e} {e2:e} {e3:e}");

    let t = embedding("revolution_torus");
    let exact = 4.0 * PI * PI * 2.0 * 0.5;
    let g = GridSpec::new(vec![12, 12], QuadratureRule::Trapezoid).unwrap();
    assert!((t.volume(&g).unwrap() - exact).abs() < 1e-10 * exact);
}
