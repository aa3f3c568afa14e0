use num_complex::Complex64;
use proptest::prelude::*;

use weierstrass_lab::estimates::{curvature_constant, zalcman_rescale, PropertySpec};
use weierstrass_lab::expr::{chordal, from_sphere, parse_mero, spherical_gradient, stereographic};
use weierstrass_lab::geodesy::hyperbolic_distance;
use weierstrass_lab::surfaces::Hermitian;
use weierstrass_lab::{DomainSpec, ExtComplex, MTriple, MeroExpr, MobiusMap, Region};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn point(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

fn ext_point() -> impl Strategy<Value = ExtComplex> {
    prop_oneof![
        9 => point(5.0).prop_map(ExtComplex::Finite),
        1 => Just(ExtComplex::Infinity),
    ]
}

fn disk_point(r: f64) -> impl Strategy<Value = Complex64> {
    (0.0..r, 0.0..std::f64::consts::TAU).prop_map(|(m, a)| Complex64::from_polar(m, a))
}

fn small_int() -> impl Strategy<Value = f64> {
    (-4i32..=4).prop_map(f64::from)
}

fn expr() -> impl Strategy<Value = MeroExpr> {
    let leaf = prop_oneof![
        Just(MeroExpr::var()),
        (small_int(), small_int()).prop_map(|(a, b)| MeroExpr::constant(c(a, b))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a * b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a / b),
            (inner.clone(), 0i32..4).prop_map(|(a, n)| MeroExpr::powi(a, n)),
            inner.clone().prop_map(|a| -a),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn chordal_is_a_bounded_metric(a in ext_point(), b in ext_point(), d in ext_point()) {
        let ab = chordal(a, b);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&ab));
        prop_assert!((ab - chordal(b, a)).abs() < 1e-15);
        prop_assert!(chordal(a, a) < 1e-15);
        prop_assert!(ab <= chordal(a, d) + chordal(d, b) + 1e-12);
    }

    #[test]
    fn chordal_is_half_the_sphere_chord(a in ext_point(), b in ext_point()) {
        let (p, q) = (stereographic(a), stereographic(b));
        let chord = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2) + (p[2] - q[2]).powi(2)).sqrt();
        prop_assert!((chordal(a, b) - 0.5 * chord).abs() < 1e-12);
    }

    #[test]
    fn stereographic_lands_on_the_sphere_and_inverts(z in point(50.0)) {
        let p = stereographic(ExtComplex::Finite(z));
        prop_assert!((p[0] * p[0] + p[1] * p[1] + p[2] * p[2] - 1.0).abs() < 1e-13);
        match from_sphere(p) {
            ExtComplex::Finite(w) => prop_assert!((w - z).norm() <= 1e-10 * (1.0 + z.norm_sqr())),
            ExtComplex::Infinity => prop_assert!(false, "finite point sent to infinity"),
        }
    }

    #[test]
    fn spherical_gradient_is_inversion_invariant(e in expr(), z in point(2.0)) {
        let inv = MeroExpr::one() / e.clone();
        if let (Ok(a), Ok(b)) = (spherical_gradient(&e, z), spherical_gradient(&inv, z)) {
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a), "{e}: {a} vs {b}");
        }
    }

    #[test]
    fn derivative_matches_central_difference(e in expr(), z in point(2.0)) {
        let h = 1e-4;
        let d = e.derivative();
        let samples = [z, z + h, z - h, z + c(0.0, h), z - c(0.0, h)].map(|w| e.try_eval(w));
        if let (Some(dv), [Some(v), Some(a), Some(b), Some(p), Some(q)]) = (d.try_eval(z), samples) {
            let scale = [v, a, b, p, q].iter().map(|x| x.norm()).fold(1.0, f64::max);
            prop_assume!(scale < 1e4 && dv.norm() < 1e4);
            let fd = (a - b) / (2.0 * h);
            let fd_i = (p - q) / c(0.0, 2.0 * h);
            let tol = 1e-4 * (1.0 + dv.norm()) * scale;
            prop_assert!((fd - dv).norm() < tol, "{e}: {fd} vs {dv}");
            prop_assert!((fd_i - dv).norm() < tol, "{e}: {fd_i} vs {dv}");
        }
    }

    #[test]
    fn printing_then_parsing_preserves_values(e in expr(), z in point(2.0)) {
        let printed = e.to_string();
        let back = parse_mero(&printed).unwrap();
        if let (Some(a), Some(b)) = (e.try_eval(z), back.try_eval(z)) {
            prop_assert!((a - b).norm() <= 1e-9 * (1.0 + a.norm()), "{printed}: {a} vs {b}");
        }
    }

    #[test]
    fn disk_automorphisms_are_isometries(z0 in disk_point(0.95), a in disk_point(0.95), b in disk_point(0.95)) {
        let t = MobiusMap::disk_automorphism(z0).unwrap();
        let img = |w: Complex64| t.apply(ExtComplex::Finite(w)).finite().unwrap();
        let (ta, tb) = (img(a), img(b));
        prop_assert!(ta.norm() < 1.0 && tb.norm() < 1.0);
        let d0 = hyperbolic_distance(a, b).unwrap();
        let d1 = hyperbolic_distance(ta, tb).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-8 * (1.0 + d0));
        prop_assert!((img(ta) - a).norm() < 1e-10);
    }

    #[test]
    fn curvature_scales_inversely_with_f(
        m in 1u32..=3,
        a in small_int(),
        k in 1i32..=3,
        mag in 0.1f64..10.0,
        arg in 0.0f64..std::f64::consts::TAU,
        z in disk_point(0.8),
    ) {
        let d = DomainSpec::new(Region::disk(c(0.0, 0.0), 1.0), vec![]).unwrap();
        let f = MeroExpr::one() / (MeroExpr::var() - MeroExpr::real(3.0));
        let g = MeroExpr::powi(MeroExpr::var(), k) + MeroExpr::real(a);
        let t = MTriple::unchecked(d, f, g, m).unwrap();
        let s = Complex64::from_polar(mag, arg);
        let ts = t.scaled(s).unwrap();
        let (l0, l1) = (t.density_at(z).unwrap(), ts.density_at(z).unwrap());
        prop_assert!((l1 - mag * l0).abs() <= 1e-12 * l1.max(1.0));
        let (k0, k1) = (t.curvature_at(z).unwrap(), ts.curvature_at(z).unwrap());
        prop_assert!((k1 * mag * mag - k0).abs() <= 1e-10 * k0.abs().max(1e-300));
    }

    #[test]
    fn curvature_constant_is_monotone(l0 in 0.01f64..50.0, dl in 0.0f64..10.0, m in 1u32..6) {
        let k = |l: f64, m: u32| curvature_constant(&PropertySpec::Bounded(l), m).unwrap();
        prop_assert!(k(l0 + dl, m) >= k(l0, m));
        prop_assert!(k(l0, m + 1) >= k(l0, m));
        let explicit = (2.0 * m as f64 * l0 * l0 * (1.0 + l0 * l0).powi(m as i32)).sqrt();
        prop_assert!((k(l0, m) - explicit).abs() <= 1e-12 * explicit);
    }

    #[test]
    fn sl2_lifts_give_unit_determinant(p in point(3.0), q in point(3.0), r in point(3.0)) {
        prop_assume!(p.norm() > 0.1);
        let s = (Complex64::new(1.0, 0.0) + q * r) / p;
        let h = Hermitian::from_lift(&[p, q, r, s]);
        let scale = h.trace() * h.trace();
        prop_assert!((h.det() - 1.0).abs() <= 1e-12 * scale);
        let x = h.minkowski();
        prop_assert!((x[0] * x[0] - x[1] * x[1] - x[2] * x[2] - x[3] * x[3] - 1.0).abs() <= 1e-12 * scale);
        let b = h.ball();
        prop_assert!(b[0] * b[0] + b[1] * b[1] + b[2] * b[2] < 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn zalcman_output_is_normalized(a in point(2.0), b in point(2.0)) {
        prop_assume!(b.norm() > 0.2);
        let h = MeroExpr::constant(b) * MeroExpr::var() + MeroExpr::constant(a);
        let (f, diag) = zalcman_rescale(&h, 60).unwrap();
        prop_assert!((spherical_gradient(&f, c(0.0, 0.0)).unwrap() - 1.0).abs() < 1e-9);
        prop_assert!(diag.envelope_ok);
    }
}

#[test]
fn chordal_distance_from_zero_to_infinity_is_one() {
    assert_eq!(chordal(ExtComplex::Finite(c(0.0, 0.0)), ExtComplex::Infinity), 1.0);
}
