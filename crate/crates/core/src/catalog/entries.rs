use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Basis, CatalogEntry, EntryKind, Expected, ExpectedValue, ParamSpec, Params, ScenarioRefs};
use crate::embedding::{AxisBoundary, Embedding, ParamAxis, ParamDomain};
use crate::error::{GeomError, Result};
use crate::extrinsic::Verdict;
use crate::geometry::{ChartDomain, MetricField, VectorField};
use crate::symbolic::{self, Constants};

const MINKOWSKI_COORDS: [&str; 6] = ["t", "x", "y", "z", "x4", "x5"];
const TWO_PI: f64 = 2.0 * PI;

fn param(name: &'static str, default: f64, min: f64, max: f64, doc: &'static str) -> ParamSpec {
    ParamSpec { name, default, min, max, integer: false, doc }
}

fn int_param(name: &'static str, default: f64, min: f64, max: f64, doc: &'static str) -> ParamSpec {
    ParamSpec { name, default, min, max, integer: true, doc }
}

fn blank(name: &'static str, kind: EntryKind, summary: &'static str) -> CatalogEntry {
    CatalogEntry {
        name,
        kind,
        summary,
        params: Vec::new(),
        charts: Vec::new(),
        default_metric: None,
        closed: None,
        conformal_in: Vec::new(),
        scenario: None,
        expected: Vec::new(),
        notes: Vec::new(),
    }
}

fn metric_entry(
    name: &'static str,
    chart: &'static str,
    summary: &'static str,
    params: Vec<ParamSpec>,
) -> CatalogEntry {
    CatalogEntry { params, charts: vec![chart], ..blank(name, EntryKind::Metric, summary) }
}

fn surface_entry(
    name: &'static str,
    charts: &[&'static str],
    default_metric: &'static str,
    closed: bool,
    summary: &'static str,
    params: Vec<ParamSpec>,
) -> CatalogEntry {
    CatalogEntry {
        params,
        charts: charts.to_vec(),
        default_metric: Some(default_metric),
        closed: Some(closed),
        ..blank(name, EntryKind::Embedding, summary)
    }
}

fn field_entry(
    name: &'static str,
    charts: &[&'static str],
    default_metric: &'static str,
    conformal_in: &[&'static str],
    summary: &'static str,
    params: Vec<ParamSpec>,
) -> CatalogEntry {
    CatalogEntry {
        params,
        charts: charts.to_vec(),
        default_metric: Some(default_metric),
        conformal_in: conformal_in.to_vec(),
        ..blank(name, EntryKind::VectorField, summary)
    }
}

fn verdict(v: Verdict, basis: Basis) -> Expected {
    Expected { value: ExpectedValue::Verdict { verdict: v }, basis }
}

fn scalar(quantity: &'static str, value: f64, tolerance: f64, basis: Basis) -> Expected {
    Expected { value: ExpectedValue::Scalar { quantity, value, tolerance }, basis }
}

fn closed_form(oracle: &'static str) -> Basis {
    Basis::ClosedForm { oracle }
}

fn scenario_entry(
    name: &'static str,
    summary: &'static str,
    metric: &'static str,
    embedding: &'static str,
    fields: &[&'static str],
    grid: &[usize],
    expected: Vec<Expected>,
) -> CatalogEntry {
    CatalogEntry {
        scenario: Some(ScenarioRefs { metric, embedding, fields: fields.to_vec(), grid: grid.to_vec() }),
        expected,
        ..blank(name, EntryKind::Scenario, summary)
    }
}

const FLAT: &[&str] = &["cartesian", "robertson_walker"];
const PPWAVES: &[&str] = &["ppwave", "ppwave_periodic"];
const FUTURE_FAMILY_AND_EXTREMAL: [Verdict; 4] =
    [Verdict::FutureTrapped, Verdict::NearlyFutureTrapped, Verdict::MarginallyFutureTrapped, Verdict::Extremal];
const ALL_TRAPPED: [Verdict; 6] = [
    Verdict::FutureTrapped,
    Verdict::NearlyFutureTrapped,
    Verdict::MarginallyFutureTrapped,
    Verdict::PastTrapped,
    Verdict::NearlyPastTrapped,
    Verdict::MarginallyPastTrapped,
];

fn excluded(v: &[Verdict]) -> Expected {
    Expected { value: ExpectedValue::Excluded { verdicts: v.to_vec() }, basis: Basis::Theorem }
}

fn aligned() -> Expected {
    Expected { value: ExpectedValue::Aligned, basis: Basis::Theorem }
}

pub(super) fn all() -> Vec<CatalogEntry> {
    let t0 = || param("t0", 0.0, -100.0, 100.0, "time of the slice");
    let radius = |d| param("r", d, 1e-3, 1e3, "coordinate radius");
    let mut v = vec![
        // Metrics.
        CatalogEntry {
            notes: vec!["T = ∂_t"],
            ..metric_entry(
                "minkowski",
                "cartesian",
                "flat spacetime ds² = −dt² + Σ dx_i²",
                vec![int_param("D", 4.0, 2.0, 6.0, "spacetime dimension")],
            )
        },
        CatalogEntry {
            notes: vec![
                "coordinates (v, r, θ, φ), chart r > 0, 0 < θ < π; r = 2M is interior to the chart",
                "T = ∂_v − (1/2 + M/r) ∂_r, timelike everywhere with g(T,T) = −2",
                "future null normals of the spheres r = const: ∂_v + (f/2) ∂_r and −∂_r, f = 1 − 2M/r",
            ],
            ..metric_entry(
                "schwarzschild_ef",
                "eddington_finkelstein",
                "Schwarzschild in ingoing Eddington–Finkelstein coordinates, ds² = −f dv² + 2 dv dr + r² dΩ²",
                vec![param("M", 1.0, 1e-6, 1e3, "mass")],
            )
        },
        CatalogEntry {
            notes: vec!["T = ∂_t; a = t is expanding, power = 0 is static", "chart t > 0"],
            ..metric_entry(
                "robertson_walker",
                "robertson_walker",
                "flat Robertson–Walker, ds² = −dt² + a(t)² Σ dx_i², a(t) = a0 t^power",
                vec![
                    param("a0", 1.0, 1e-3, 1e3, "scale factor prefactor"),
                    param("power", 1.0, 0.0, 3.0, "exponent of t"),
                ],
            )
        },
        CatalogEntry {
            notes: vec![
                "coordinates (u, v, x, y); ∂_v is a null Killing field",
                "T = ∂_u + (1 + H)/2 ∂_v with g(T,T) = −1",
                "vacuum when a + b = 0",
            ],
            ..metric_entry(
                "ppwave",
                "ppwave",
                "pp-wave ds² = −2 du dv + H du² + dx² + dy², H = a x² + 2c xy + b y²",
                vec![
                    param("a", 1.0, -10.0, 10.0, "x² coefficient"),
                    param("b", -1.0, -10.0, 10.0, "y² coefficient"),
                    param("c", 0.0, -10.0, 10.0, "xy coefficient"),
                ],
            )
        },
        CatalogEntry {
            notes: vec![
                "profile periodic in x and y, so the quotient by 2π-translations is a spacetime containing closed tori",
                "T = ∂_u + (1 + H)/2 ∂_v with g(T,T) = −1",
            ],
            ..metric_entry(
                "ppwave_periodic",
                "ppwave_periodic",
                "pp-wave with H = A cos x cos y, identified with period 2π in x and y",
                vec![param("A", 0.5, -10.0, 10.0, "profile amplitude")],
            )
        },
        // Embeddings.
        surface_entry(
            "round_sphere",
            FLAT,
            "minkowski",
            true,
            "sphere of radius r in the slice t = t0",
            vec![radius(1.0), t0()],
        ),
        surface_entry(
            "round_sphere_z",
            FLAT,
            "minkowski",
            true,
            "the round sphere parametrized by (z, φ); area density r²",
            vec![radius(1.0), t0()],
        ),
        surface_entry(
            "tilted_sphere",
            &["cartesian"],
            "minkowski",
            true,
            "sphere of radius r in the tilted graph t = t0 + eps·z",
            vec![radius(1.0), t0(), param("eps", 0.5, 0.0, 0.9, "tilt")],
        ),
        surface_entry(
            "boosted_sphere",
            &["cartesian"],
            "minkowski",
            true,
            "round sphere mapped by a Lorentz boost of velocity beta along x",
            vec![radius(1.0), t0(), param("beta", 0.6, -0.99, 0.99, "boost velocity")],
        ),
        surface_entry(
            "circle",
            FLAT,
            "minkowski",
            true,
            "circle of radius r in the xy-plane at t = t0",
            vec![radius(1.0), t0()],
        ),
        surface_entry(
            "flat_torus",
            FLAT,
            "minkowski",
            true,
            "the plane t = t0, z = z0 with x, y identified with period L",
            vec![t0(), param("z0", 0.0, -100.0, 100.0, "height"), param("L", TWO_PI, 1e-3, 1e3, "period")],
        ),
        surface_entry(
            "revolution_torus",
            FLAT,
            "minkowski",
            true,
            "torus of revolution with radii R > rho in the slice t = t0",
            vec![param("R", 2.0, 1e-3, 1e3, "axis radius"), param("rho", 0.5, 1e-3, 1e3, "tube radius"), t0()],
        ),
        surface_entry("plane", FLAT, "minkowski", false, "square [−1,1]² of the plane t = t0, z = 0", vec![t0()]),
        surface_entry(
            "timelike_plane",
            &["cartesian"],
            "minkowski",
            false,
            "square [−1,1]² of the timelike plane y = z = 0",
            vec![],
        ),
        CatalogEntry {
            notes: vec!["degenerate by construction: exercises DegenerateInducedMetric"],
            ..surface_entry("null_line", &["cartesian"], "minkowski", false, "null segment t = x", vec![])
        },
        surface_entry("straight_line", FLAT, "minkowski", false, "spacelike segment along x at t = t0", vec![t0()]),
        surface_entry(
            "accelerated_curve",
            &["cartesian"],
            "minkowski",
            false,
            "uniformly accelerated worldline (sinh(as)/a, cosh(as)/a, 0, 0), proper time s ∈ [−1, 1]",
            vec![param("a", 1.0, 1e-3, 10.0, "proper acceleration")],
        ),
        surface_entry(
            "comoving_geodesic_rw",
            FLAT,
            "robertson_walker",
            false,
            "comoving worldline x = x0 for t ∈ [1, 2]",
            vec![param("x0", 0.0, -100.0, 100.0, "comoving position")],
        ),
        surface_entry(
            "comoving_sphere_rw",
            FLAT,
            "robertson_walker",
            true,
            "comoving sphere of coordinate radius R at t = t0",
            vec![param("R", 2.0, 1e-3, 1e3, "comoving radius"), param("t0", 1.0, 1e-3, 100.0, "time of the slice")],
        ),
        surface_entry(
            "t_const_hypersurface_rw",
            FLAT,
            "robertson_walker",
            true,
            "the slice t = t0 with x, y, z identified with period L (a flat 3-torus)",
            vec![param("t0", 1.0, 1e-3, 100.0, "time of the slice"), param("L", 1.0, 1e-3, 1e3, "period")],
        ),
        surface_entry(
            "ef_sphere",
            &["eddington_finkelstein"],
            "schwarzschild_ef",
            true,
            "sphere r = const, v = v0",
            vec![radius(1.0), param("v0", 0.0, -100.0, 100.0, "advanced time")],
        ),
        surface_entry(
            "ppwave_sphere",
            PPWAVES,
            "ppwave",
            true,
            "sphere of radius r about the origin at t0, with u = (t − z)/√2, v = (t + z)/√2",
            vec![param("r", 1.0, 1e-3, 1.2, "radius"), t0()],
        ),
        CatalogEntry {
            notes: vec!["H = 2 eps cos x cos y ∂_v: null, proportional to ∂_v, of both time orientations"],
            ..surface_entry(
                "ppwave_null_torus",
                &["ppwave_periodic"],
                "ppwave_periodic",
                true,
                "torus u = u0, v = eps cos x cos y over the periodic (x, y) plane",
                vec![param("eps", 0.1, -10.0, 10.0, "amplitude"), param("u0", 0.0, -100.0, 100.0, "retarded time")],
            )
        },
        // Vector fields.
        field_entry(
            "time_translation",
            &[],
            "minkowski",
            &["minkowski", "schwarzschild_ef", "robertson_walker:power=0", "ppwave", "ppwave_periodic"],
            "coordinate field of the first coordinate (∂_t, ∂_v or ∂_u)",
            vec![],
        ),
        field_entry(
            "translation",
            &[],
            "minkowski",
            &["minkowski"],
            "coordinate field ∂_k",
            vec![int_param("axis", 1.0, 0.0, 5.0, "coordinate index k")],
        ),
        field_entry("dilation", FLAT, "minkowski", &["minkowski"], "position field x^μ ∂_μ", vec![]),
        field_entry(
            "rw_conformal",
            &["robertson_walker"],
            "robertson_walker",
            &["robertson_walker"],
            "conformal Killing field a(t) ∂_t with Ψ = ȧ",
            vec![param("a0", 1.0, 1e-3, 1e3, "scale factor prefactor"), param("power", 1.0, 0.0, 3.0, "exponent of t")],
        ),
        field_entry(
            "ppwave_null_killing",
            PPWAVES,
            "ppwave",
            &["ppwave", "ppwave_periodic"],
            "null Killing field ∂_v",
            vec![],
        ),
        field_entry("radial_unit", FLAT, "minkowski", &[], "unit spatial radial field x^i/|x| ∂_i", vec![]),
        field_entry(
            "rotation_xy",
            FLAT,
            "minkowski",
            &["minkowski", "robertson_walker"],
            "rotation −y ∂_x + x ∂_y",
            vec![],
        ),
        field_entry("boost_tx", &["cartesian"], "minkowski", &["minkowski"], "boost x ∂_t + t ∂_x", vec![]),
        field_entry(
            "ef_radial",
            &["eddington_finkelstein"],
            "schwarzschild_ef",
            &[],
            "radial field speed·∂_r",
            vec![param("speed", 1.0, -1e4, 1e4, "coefficient of ∂_r")],
        ),
        field_entry(
            "polynomial",
            &[],
            "minkowski",
            &[],
            "random polynomial field with coefficients drawn uniformly from [−scale, scale]",
            vec![
                int_param("seed", 0.0, 0.0, 1e15, "generator seed"),
                int_param("degree", 2.0, 0.0, 3.0, "total degree"),
                param("scale", 1.0, 0.0, 100.0, "coefficient bound"),
            ],
        ),
    ];

    let ef = |r: f64| {
        closed_form(if r < 2.0 {
            "θ± = (1 − 2M/r)/r, −2/r: both negative"
        } else if r == 2.0 {
            "θ+ = 0, θ− = −2/r at r = 2M"
        } else {
            "θ+ > 0 > θ−; H = (2/r)(∂_v + f ∂_r) spacelike"
        })
    };
    v.extend([
        scenario_entry(
            "ef_trapped",
            "sphere r = 1 inside the Schwarzschild horizon (M = 1)",
            "schwarzschild_ef:M=1",
            "ef_sphere:r=1",
            &["time_translation", "ef_radial:speed=1"],
            &[32, 64],
            vec![
                verdict(Verdict::FutureTrapped, ef(1.0)),
                scalar("g(H,H)", -4.0, 1e-8, closed_form("g(H,H) = 4f/r²")),
                scalar("theta_plus", -1.0, 1e-8, closed_form("θ+ = f/r")),
                scalar("theta_minus", -2.0, 1e-8, closed_form("θ− = −2/r")),
            ],
        ),
        scenario_entry(
            "ef_horizon",
            "sphere on the Schwarzschild horizon r = 2M (M = 1)",
            "schwarzschild_ef:M=1",
            "ef_sphere:r=2",
            &["time_translation", "ef_radial:speed=1"],
            &[32, 64],
            vec![
                verdict(Verdict::MarginallyFutureTrapped, ef(2.0)),
                scalar("g(H,H)", 0.0, 1e-8, closed_form("g(H,H) = 4f/r²")),
                scalar("theta_plus", 0.0, 1e-8, closed_form("θ+ = f/r")),
                scalar("theta_minus", -1.0, 1e-8, closed_form("θ− = −2/r")),
            ],
        ),
        scenario_entry(
            "ef_exterior",
            "sphere r = 3 outside the Schwarzschild horizon (M = 1)",
            "schwarzschild_ef:M=1",
            "ef_sphere:r=3",
            &["time_translation", "ef_radial:speed=1"],
            &[32, 64],
            vec![
                verdict(Verdict::AbsolutelyNonTrapped, ef(3.0)),
                scalar("g(H,H)", 4.0 / 27.0, 1e-8, closed_form("g(H,H) = 4f/r²")),
                scalar("theta_plus", 1.0 / 9.0, 1e-8, closed_form("θ+ = f/r")),
                scalar("theta_minus", -2.0 / 3.0, 1e-8, closed_form("θ− = −2/r")),
            ],
        ),
        scenario_entry(
            "minkowski_sphere",
            "round sphere r = 2 in Minkowski space",
            "minkowski",
            "round_sphere:r=2",
            &["time_translation", "radial_unit"],
            &[32, 32],
            vec![
                verdict(Verdict::AbsolutelyNonTrapped, closed_form("H = (2/r) n̂ spacelike")),
                scalar("g(H,H)", 1.0, 1e-8, closed_form("g(H,H) = 4/r²")),
                scalar("volume", 16.0 * PI, 1e-10, closed_form("area 4πr²")),
                scalar("dV/dtau[1]", 16.0 * PI, 16.0 * PI * 1e-6, closed_form("d(4πr²)/dr = 8πr")),
                scalar("flux_integral[0]", 0.0, 1e-8, Basis::Theorem),
                excluded(&ALL_TRAPPED),
            ],
        ),
        scenario_entry(
            "minkowski_torus",
            "flat torus in a flat slice of Minkowski space",
            "minkowski",
            "flat_torus",
            &["time_translation", "translation:axis=1"],
            &[16, 16],
            vec![
                verdict(Verdict::Extremal, Basis::Construction),
                scalar("volume", 4.0 * PI * PI, 1e-10, Basis::Construction),
                scalar("flux_integral[0]", 0.0, 1e-8, Basis::Construction),
                scalar("dV/dtau[1]", 0.0, 1e-10, Basis::Construction),
            ],
        ),
        scenario_entry(
            "rw_comoving_sphere",
            "comoving sphere R = 2 at t = 1 in Robertson–Walker with a = t",
            "robertson_walker:a0=1,power=1",
            "comoving_sphere_rw:R=2,t0=1",
            &["rw_conformal:a0=1,power=1"],
            &[24, 24],
            vec![
                verdict(Verdict::PastTrapped, closed_form("H = −2(ȧ/a)∂_t + (2/(Ra²)) n̂, timelike past")),
                scalar("g(H,H)", -3.0, 1e-8, closed_form("g(H,H) = (4/a²)(1/R² − ȧ²)")),
                scalar("killing_lhs[0]", 16.0 * PI, 1e-8, closed_form("Ψ = ȧ times area 4πR²a²")),
                scalar("killing_rhs[0]", 16.0 * PI, 1e-8, closed_form("g(ξ,H) = 2ȧ")),
                excluded(&FUTURE_FAMILY_AND_EXTREMAL),
            ],
        ),
        scenario_entry(
            "rw_slice",
            "the slice t = 1 of Robertson–Walker with a = t, as a 3-torus",
            "robertson_walker:a0=1,power=1",
            "t_const_hypersurface_rw:t0=1,L=1",
            &["rw_conformal:a0=1,power=1"],
            &[8, 8, 8],
            vec![
                verdict(Verdict::PastTrapped, closed_form("H = −3(ȧ/a)∂_t")),
                scalar("theta", -3.0, 1e-8, closed_form("θ = −3ȧ/a")),
                scalar("volume", 1.0, 1e-10, closed_form("volume L³a³")),
                scalar("killing_lhs[0]", 1.0, 1e-8, closed_form("Ψ = ȧ times volume")),
                scalar("killing_rhs[0]", 1.0, 1e-8, closed_form("g(ξ,H) = 3ȧ")),
                excluded(&FUTURE_FAMILY_AND_EXTREMAL),
            ],
        ),
        scenario_entry(
            "rw_static_sphere",
            "comoving sphere in static Robertson–Walker (a = 1), a stationary region",
            "robertson_walker:power=0",
            "comoving_sphere_rw:R=1,t0=1",
            &["time_translation"],
            &[16, 32],
            vec![
                verdict(Verdict::AbsolutelyNonTrapped, closed_form("H = (2/R) n̂ spacelike")),
                scalar("flux_integral[0]", 0.0, 1e-8, Basis::Theorem),
                excluded(&ALL_TRAPPED),
            ],
        ),
        scenario_entry(
            "ppwave_round",
            "round sphere in the quadratic pp-wave",
            "ppwave",
            "ppwave_sphere:r=1",
            &["ppwave_null_killing"],
            &[24, 32],
            vec![scalar("flux_integral[0]", 0.0, 1e-8, Basis::Theorem), aligned()],
        ),
        scenario_entry(
            "ppwave_torus",
            "torus with null mean curvature proportional to the null Killing field",
            "ppwave_periodic",
            "ppwave_null_torus:eps=0.1",
            &["ppwave_null_killing"],
            &[16, 16],
            vec![
                verdict(Verdict::Mixed, closed_form("H = 2ε cos x cos y ∂_v changes orientation")),
                scalar("g(H,H)", 0.0, 1e-8, closed_form("H ∝ ∂_v null")),
                scalar("flux_integral[0]", 0.0, 1e-8, Basis::Theorem),
                aligned(),
            ],
        ),
        scenario_entry(
            "tilted",
            "sphere in a tilted spacelike graph of Minkowski space",
            "minkowski",
            "tilted_sphere:r=1,eps=0.5",
            &["time_translation"],
            &[32, 32],
            vec![scalar("flux_integral[0]", 0.0, 1e-8, Basis::Theorem), excluded(&ALL_TRAPPED)],
        ),
        scenario_entry(
            "boosted",
            "boosted round sphere in Minkowski space",
            "minkowski",
            "boosted_sphere:r=1,beta=0.6",
            &["time_translation"],
            &[32, 32],
            vec![
                verdict(Verdict::AbsolutelyNonTrapped, closed_form("boost is an isometry")),
                scalar("g(H,H)", 4.0, 1e-8, closed_form("boost is an isometry; g(H,H) = 4/r²")),
                scalar("flux_integral[0]", 0.0, 1e-8, Basis::Theorem),
            ],
        ),
        scenario_entry(
            "minkowski_dilation",
            "round sphere r = 1 with the Minkowski homothety",
            "minkowski",
            "round_sphere:r=1",
            &["dilation"],
            &[24, 24],
            vec![
                scalar("killing_lhs[0]", 4.0 * PI, 1e-8, closed_form("Ψ = 1 times area 4πr²")),
                scalar("killing_rhs[0]", 4.0 * PI, 1e-8, closed_form("g(x, H) = 2")),
            ],
        ),
    ]);
    v
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn consts(p: &Params) -> Constants {
    p.as_map().clone()
}

pub(super) fn build_metric(name: &str, p: &Params) -> Result<MetricField> {
    let c = consts(p);
    match name {
        "minkowski" => {
            let d = p.get("D") as usize;
            let coords = names(&MINKOWSKI_COORDS[..d]);
            let entries: Vec<_> =
                (0..d).map(|i| ((i, i), if i == 0 { "-1".to_string() } else { "1".to_string() })).collect();
            let mut t = vec!["0".to_string(); d];
            t[0] = "1".into();
            let sig = (0..d).map(|i| if i == 0 { -1 } else { 1 }).collect();
            symbolic::metric("minkowski", &coords, sig, ChartDomain::unbounded("cartesian", d), &entries, Some(&t), &c)
        }
        "schwarzschild_ef" => symbolic::metric(
            "schwarzschild_ef",
            &names(&["v", "r", "th", "ph"]),
            vec![-1, 1, 1, 1],
            ChartDomain::unbounded("eddington_finkelstein", 4)
                .with_bounds(1, 0.0, f64::INFINITY)
                .with_bounds(2, 0.0, PI),
            &[
                ((0, 0), "-(1 - 2*M/r)".into()),
                ((0, 1), "1".into()),
                ((2, 2), "r^2".into()),
                ((3, 3), "r^2*sin(th)^2".into()),
            ],
            Some(&names(&["1", "-(1/2 + M/r)", "0", "0"])),
            &c,
        ),
        "robertson_walker" => symbolic::metric(
            "robertson_walker",
            &names(&["t", "x", "y", "z"]),
            vec![-1, 1, 1, 1],
            ChartDomain::unbounded("robertson_walker", 4).with_bounds(0, 0.0, f64::INFINITY),
            &[
                ((0, 0), "-1".into()),
                ((1, 1), "(a0*t^power)^2".into()),
                ((2, 2), "(a0*t^power)^2".into()),
                ((3, 3), "(a0*t^power)^2".into()),
            ],
            Some(&names(&["1", "0", "0", "0"])),
            &c,
        ),
        "ppwave" | "ppwave_periodic" => {
            let h = if name == "ppwave" { "(a*x^2 + 2*c*x*y + b*y^2)" } else { "(A*cos(x)*cos(y))" };
            symbolic::metric(
                name,
                &names(&["u", "v", "x", "y"]),
                vec![-1, 1, 1, 1],
                ChartDomain::unbounded(name, 4),
                &[((0, 0), h.into()), ((0, 1), "-1".into()), ((2, 2), "1".into()), ((3, 3), "1".into())],
                Some(&["1".to_string(), format!("(1 + {h})/2"), "0".into(), "0".into()]),
                &c,
            )
        }
        _ => Err(GeomError::UnknownEntry(name.to_string())),
    }
}

fn sphere_axes() -> Vec<ParamAxis> {
    vec![ParamAxis::new(0.0, PI, AxisBoundary::Pole), ParamAxis::new(0.0, TWO_PI, AxisBoundary::Periodic)]
}

fn box_axes(n: usize, lo: f64, hi: f64, boundary: AxisBoundary) -> Vec<ParamAxis> {
    (0..n).map(|_| ParamAxis::new(lo, hi, boundary)).collect()
}

fn surface(
    name: &str,
    ambient: MetricField,
    params: &[&str],
    axes: Vec<ParamAxis>,
    comps: &[&str],
    c: &Constants,
) -> Result<Embedding> {
    let big_d = ambient.dimension();
    if comps.len() > big_d {
        return Err(GeomError::DimensionMismatch { expected: comps.len(), found: big_d });
    }
    let mut comps = names(comps);
    comps.resize(big_d, "0".to_string());
    symbolic::embedding(name, ambient, &names(params), ParamDomain::new(axes), &comps, c)
}

pub(super) fn build_embedding(name: &str, p: &Params, m: MetricField) -> Result<Embedding> {
    let mut c = consts(p);
    let sphere = ["t0", "r*sin(th)*cos(ph)", "r*sin(th)*sin(ph)", "r*cos(th)"];
    let e = match name {
        "round_sphere" => surface(name, m, &["th", "ph"], sphere_axes(), &sphere, &c)?,
        "round_sphere_z" => surface(
            name,
            m,
            &["z", "ph"],
            vec![ParamAxis::new(-1.0, 1.0, AxisBoundary::Pole), ParamAxis::new(0.0, TWO_PI, AxisBoundary::Periodic)],
            &["t0", "r*sqrt(1 - z^2)*cos(ph)", "r*sqrt(1 - z^2)*sin(ph)", "r*z"],
            &c,
        )?,
        "tilted_sphere" => surface(
            name,
            m,
            &["th", "ph"],
            sphere_axes(),
            &["t0 + eps*r*cos(th)", sphere[1], sphere[2], sphere[3]],
            &c,
        )?,
        "boosted_sphere" => {
            let beta = p.get("beta");
            c.insert("gam".into(), 1.0 / (1.0 - beta * beta).sqrt());
            surface(
                name,
                m,
                &["th", "ph"],
                sphere_axes(),
                &["gam*(t0 + beta*r*sin(th)*cos(ph))", "gam*(r*sin(th)*cos(ph) + beta*t0)", sphere[2], sphere[3]],
                &c,
            )?
        }
        "circle" => surface(
            name,
            m,
            &["ph"],
            vec![ParamAxis::new(0.0, TWO_PI, AxisBoundary::Periodic)],
            &["t0", "r*cos(ph)", "r*sin(ph)"],
            &c,
        )?,
        "flat_torus" => surface(
            name,
            m,
            &["p", "q"],
            box_axes(2, 0.0, p.get("L"), AxisBoundary::Periodic),
            &["t0", "p", "q", "z0"],
            &c,
        )?,
        "revolution_torus" => {
            if p.get("rho") >= p.get("R") {
                return Err(GeomError::InvalidEmbedding("revolution_torus needs rho < R".into()));
            }
            surface(
                name,
                m,
                &["a", "b"],
                box_axes(2, 0.0, TWO_PI, AxisBoundary::Periodic),
                &["t0", "(R + rho*cos(a))*cos(b)", "(R + rho*cos(a))*sin(b)", "rho*sin(a)"],
                &c,
            )?
        }
        "plane" => surface(name, m, &["p", "q"], box_axes(2, -1.0, 1.0, AxisBoundary::Open), &["t0", "p", "q"], &c)?,
        "timelike_plane" => surface(name, m, &["p", "q"], box_axes(2, -1.0, 1.0, AxisBoundary::Open), &["p", "q"], &c)?,
        "null_line" => surface(name, m, &["s"], box_axes(1, -1.0, 1.0, AxisBoundary::Open), &["s", "s"], &c)?,
        "straight_line" => surface(name, m, &["s"], box_axes(1, -1.0, 1.0, AxisBoundary::Open), &["t0", "s"], &c)?,
        "accelerated_curve" => {
            surface(name, m, &["s"], box_axes(1, -1.0, 1.0, AxisBoundary::Open), &["sinh(a*s)/a", "cosh(a*s)/a"], &c)?
        }
        "comoving_geodesic_rw" => {
            surface(name, m, &["s"], box_axes(1, 1.0, 2.0, AxisBoundary::Open), &["s", "x0"], &c)?
        }
        "comoving_sphere_rw" => surface(
            name,
            m,
            &["th", "ph"],
            sphere_axes(),
            &["t0", "R*sin(th)*cos(ph)", "R*sin(th)*sin(ph)", "R*cos(th)"],
            &c,
        )?,
        "t_const_hypersurface_rw" => surface(
            name,
            m,
            &["p", "q", "w"],
            box_axes(3, 0.0, p.get("L"), AxisBoundary::Periodic),
            &["t0", "p", "q", "w"],
            &c,
        )?,
        "ef_sphere" => surface(name, m, &["th", "ph"], sphere_axes(), &["v0", "r", "th", "ph"], &c)?,
        "ppwave_sphere" => surface(
            name,
            m,
            &["th", "ph"],
            sphere_axes(),
            &["(t0 - r*cos(th))/sqrt(2)", "(t0 + r*cos(th))/sqrt(2)", "r*sin(th)*cos(ph)", "r*sin(th)*sin(ph)"],
            &c,
        )?,
        "ppwave_null_torus" => surface(
            name,
            m,
            &["p", "q"],
            box_axes(2, 0.0, TWO_PI, AxisBoundary::Periodic),
            &["u0", "eps*cos(p)*cos(q)", "p", "q"],
            &c,
        )?,
        _ => return Err(GeomError::UnknownEntry(name.to_string())),
    };
    Ok(e)
}

pub(super) fn build_field(name: &str, p: &Params, m: &MetricField) -> Result<VectorField> {
    let c = consts(p);
    let coords = m.coordinates().to_vec();
    let d = coords.len();
    let mut comps = vec!["0".to_string(); d];
    let need = |n: usize| {
        if d < n {
            Err(GeomError::DimensionMismatch { expected: n, found: d })
        } else {
            Ok(())
        }
    };
    match name {
        "time_translation" => comps[0] = "1".into(),
        "translation" => {
            let k = p.get("axis") as usize;
            need(k + 1)?;
            comps[k] = "1".into();
        }
        "dilation" => comps.clone_from(&coords),
        "rw_conformal" => comps[0] = format!("a0*{}^power", coords[0]),
        "ppwave_null_killing" => comps[1] = "1".into(),
        "radial_unit" => {
            let norm =
                format!("sqrt({})", coords[1..].iter().map(|x| format!("{x}^2")).collect::<Vec<_>>().join(" + "));
            for i in 1..d {
                comps[i] = format!("{}/{norm}", coords[i]);
            }
        }
        "rotation_xy" => {
            need(3)?;
            comps[1] = format!("-{}", coords[2]);
            comps[2] = coords[1].clone();
        }
        "boost_tx" => {
            comps[0] = coords[1].clone();
            comps[1] = coords[0].clone();
        }
        "ef_radial" => comps[1] = "speed".into(),
        "polynomial" => {
            comps = polynomial_components(&coords, p.get("seed") as u64, p.get("degree") as usize, p.get("scale"))
        }
        _ => return Err(GeomError::UnknownEntry(name.to_string())),
    }
    symbolic::vector_field(name, &coords, &comps, &c)
}

/// Exponent tuples of total degree ≤ `degree` in `n` variables, in lexicographic order.
fn monomials(n: usize, degree: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for k in 0..=degree {
        for mut rest in monomials(n - 1, degree - k) {
            rest.insert(0, k);
            out.push(rest);
        }
    }
    out
}

fn polynomial_components(coords: &[String], seed: u64, degree: usize, scale: f64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let monos = monomials(coords.len(), degree);
    coords
        .iter()
        .map(|_| {
            let terms: Vec<String> = monos
                .iter()
                .map(|m| {
                    let coef: f64 = scale * rng.random_range(-1.0..1.0);
                    let mut t = format!("({coef:?})");
                    for (x, k) in coords.iter().zip(m) {
                        if *k > 0 {
                            t.push_str(&format!("*{x}^{k}"));
                        }
                    }
                    t
                })
                .collect();
            terms.join(" + ")
        })
        .collect()
}
