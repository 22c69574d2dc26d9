use nalgebra::DVector;
use proptest::prelude::*;

use trapped::catalog::{self, EntryKind, EntryRef};
use trapped::embedding::AxisBoundary;
use trapped::extrinsic::{expansion, second_fundamental_form, shape_tensor};
use trapped::geometry::causal_character_with;
use trapped::{AmbientVector, CausalKind, Embedding, MetricField};

fn metrics() -> Vec<MetricField> {
    catalog::names_of(EntryKind::Metric).iter().map(|n| catalog::metric(&EntryRef::new(n)).unwrap()).collect()
}

fn embeddings() -> Vec<Embedding> {
    catalog::nondegenerate_embeddings().iter().map(|n| catalog::embedding(&EntryRef::new(n)).unwrap()).collect()
}

/// Maps fractions in [0, 1) to a chart point away from the chart edges.
fn chart_point(m: &MetricField, s: &[f64]) -> Vec<f64> {
    (0..m.dimension())
        .map(|i| {
            let (lo, hi) = (m.chart().lower[i], m.chart().upper[i]);
            let f = s[i % s.len()];
            match (lo.is_finite(), hi.is_finite()) {
                (true, true) => lo + (hi - lo) * (0.05 + 0.9 * f),
                (true, false) => lo + 0.3 + 3.0 * f,
                _ => -2.0 + 4.0 * f,
            }
        })
        .collect()
}

fn param_point(e: &Embedding, s: &[f64]) -> Vec<f64> {
    e.domain()
        .axes()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let f = s[i % s.len()];
            let f = if a.boundary == AxisBoundary::Periodic { f } else { 0.02 + 0.96 * f };
            a.lower + f * a.length()
        })
        .collect()
}

fn fractions() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, 6)
}

fn components() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0..3.0f64, 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn causal_label_is_scale_invariant(mi in 0usize..5, s in fractions(), c in components(), lambda in 0.01..100.0f64) {
        let ms = metrics();
        let m = &ms[mi % ms.len()];
        let p = chart_point(m, &s);
        let g = m.metric_at(&p).unwrap();
        let t = m.time_orientation_at(&p).unwrap();
        let v = DVector::from_iterator(m.dimension(), c.iter().copied().cycle().take(m.dimension()));
        let base = causal_character_with(&g, &t, &v, 1e-9);
        let scaled = causal_character_with(&g, &t, &(&v * lambda), 1e-9);
        let negated = causal_character_with(&g, &t, &(-&v), 1e-9);
        prop_assert_eq!(base, scaled);
        prop_assert_eq!(negated.kind, base.kind);
        if base.is_causal() {
            prop_assert_eq!(negated.time, base.time.flipped());
        }
    }

    #[test]
    fn christoffels_are_metric_compatible(mi in 0usize..5, s in fractions(), fd in any::<bool>()) {
        let ms = metrics();
        let m = if fd { ms[mi % ms.len()].without_analytic_derivatives() } else { ms[mi % ms.len()].clone() };
        let p = chart_point(&m, &s);
        let g = m.metric_at(&p).unwrap();
        let dg = m.metric_derivatives_at(&p).unwrap();
        let gam = m.christoffel_at(&p).unwrap();
        let d = m.dimension();
        let mut worst: f64 = 0.0;
        for (rho, dg_rho) in dg.iter().enumerate() {
            for mu in 0..d {
                for nu in 0..d {
                    let mut v = dg_rho[(mu, nu)];
                    for sg in 0..d {
                        v -= gam.get(sg, rho, mu) * g[(sg, nu)] + gam.get(sg, rho, nu) * g[(mu, sg)];
                    }
                    worst = worst.max(v.abs());
                }
            }
        }
        let limit = if fd { 1e-5 } else { 1e-8 };
        prop_assert!(worst < limit, "∇g = {worst:e}");
    }

    #[test]
    fn analytic_metric_derivatives_match_fd(mi in 0usize..5, s in fractions()) {
        let ms = metrics();
        let m = &ms[mi % ms.len()];
        let p = chart_point(m, &s);
        let an = m.metric_derivatives_at(&p).unwrap();
        let fd = m.fd_metric_derivatives_at(&p).unwrap();
        let scale = an.iter().map(|x| x.amax()).fold(0.0, f64::max);
        let diff = an.iter().zip(&fd).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-6 * (1.0 + scale));
    }

    #[test]
    fn decomposition_is_a_projection_pair(ei in 0usize..64, s in fractions(), c in components()) {
        let es = embeddings();
        let e = &es[ei % es.len()];
        let u = param_point(e, &s);
        let data = e.induced_point_data(&u).unwrap();
        let d = e.ambient().dimension();
        let v = AmbientVector::new(data.p.clone(), DVector::from_iterator(d, c.iter().copied().cycle().take(d)));
        let (tan, nor) = e.decompose(&u, &v).unwrap();
        let scale = 1.0 + v.components.amax();
        prop_assert!((&tan.components + &nor.components - &v.components).amax() < 1e-10 * scale);
        for a in 0..e.dim() {
            let ea = data.frame_vector(a);
            let overlap = data.inner(&nor.components, &ea).abs();
            prop_assert!(overlap < 1e-10 * scale * (1.0 + ea.amax()), "g(v⊥, e_{a}) = {overlap:e}");
        }
        let twice = data.tangent_part(&tan.components);
        prop_assert!((twice - &tan.components).amax() < 1e-10 * scale);
    }

    #[test]
    fn pullback_matches_fd_jacobian(ei in 0usize..64, s in fractions()) {
        let es = embeddings();
        let e = &es[ei % es.len()];
        let u = param_point(e, &s);
        let data = e.induced_point_data(&u).unwrap();
        let j = e.fd_jacobian_at(&u).unwrap();
        let gamma_fd = j.transpose() * &data.metric * &j;
        prop_assert!((gamma_fd - &data.gamma).amax() < 1e-6 * (1.0 + data.gamma.amax()));
    }

    #[test]
    fn shape_tensor_is_symmetric_and_normal(ei in 0usize..64, s in fractions(), fd in any::<bool>()) {
        let es = embeddings();
        let e = if fd { es[ei % es.len()].without_analytic_derivatives() } else { es[ei % es.len()].clone() };
        let u = param_point(&e, &s);
        let k = shape_tensor(&e, &u).unwrap();
        let (sym_tol, normal_tol) = if fd { (1e-6, 1e-5) } else { (1e-10, 1e-8) };
        prop_assert!(k.shape_asymmetry() < sym_tol, "asymmetry {:e}", k.shape_asymmetry());
        prop_assert!(k.normality_defect() < normal_tol, "normality {:e}", k.normality_defect());
    }

    #[test]
    fn expansion_is_trace_of_second_fundamental_form(ei in 0usize..64, s in fractions(), c in components()) {
        let es = embeddings();
        let e = &es[ei % es.len()];
        let u = param_point(e, &s);
        let data = e.induced_point_data(&u).unwrap();
        let d = e.ambient().dimension();
        let v = DVector::from_iterator(d, c.iter().copied().cycle().take(d));
        let n = AmbientVector::new(data.p.clone(), data.normal_part(&v));
        prop_assume!(n.max_abs() > 1e-3);
        let kn = second_fundamental_form(e, &u, &n).unwrap();
        let trace = data.gamma_inv.component_mul(&kn).sum();
        let theta = expansion(e, &u, &n).unwrap();
        prop_assert!((trace - theta).abs() < 1e-10 * (1.0 + theta.abs()));
    }
}

#[test]
fn timelike_and_null_labels_are_exclusive() {
    let m = catalog::metric(&EntryRef::new("minkowski")).unwrap();
    let p = [0.0, 0.0, 0.0, 0.0];
    let g = m.metric_at(&p).unwrap();
    let t = m.time_orientation_at(&p).unwrap();
    let label = |v: [f64; 4]| causal_character_with(&g, &t, &DVector::from_column_slice(&v), 1e-9).kind;
    assert_eq!(label([1.0, 0.0, 0.0, 0.0]), CausalKind::Timelike);
    assert_eq!(label([1.0, 1.0, 0.0, 0.0]), CausalKind::Null);
    assert_eq!(label([0.0, 1.0, 0.0, 0.0]), CausalKind::Spacelike);
    assert_eq!(label([0.0, 0.0, 0.0, 0.0]), CausalKind::Zero);
}
