mod common;

use common::{gaussian_vec, orthant_point, orthogonal, rel_err, rng, spd, sym};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use riemgrad::geometry::{self, Point, Tangent};
use riemgrad::objectives::*;
use riemgrad::orthant::OrthantPoint;
use riemgrad::spd::{spd_fn, MatrixFn, SpdMatrix, SymMatrix};

fn random_p1(r: &mut ChaCha8Rng, n: usize) -> Log2Log {
    let mut p = Problem1Params::uniform(n, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        p.a[i] = r.random_range(0.0..1.0);
        p.b[i] = r.random_range(0.0..2.0);
        p.c[i] = p.a[i] + r.random_range(0.01..1.0);
        p.d[i] = r.random_range(0.01..1.0);
    }
    log2log(p).unwrap()
}

fn random_p2(r: &mut ChaCha8Rng, n: usize) -> LogLog {
    let mut p = Problem2Params::uniform(n, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        p.a[i] = r.random_range(0.1..2.0);
        p.b[i] = r.random_range(0.1..2.0);
        p.d[i] = r.random_range(2.0..4.0);
        p.c[i] = p.a[i] * p.d[i] * r.random_range(0.05..0.95);
    }
    loglog(p).unwrap()
}

fn random_karcher(r: &mut ChaCha8Rng, n: usize, m: usize) -> KarcherSpd {
    karcher_spd(KarcherSpdData::new((0..m).map(|_| spd(r, n, 0.2, 5.0)).collect()).unwrap()).unwrap()
}

fn random_com(r: &mut ChaCha8Rng, n: usize, m: usize) -> ComOrthant {
    com_orthant(ComOrthantData::new((0..m).map(|_| orthant_point(r, n, 2.0)).collect()).unwrap()).unwrap()
}

fn orthant_pt(r: &mut ChaCha8Rng, n: usize) -> Point {
    Point::Orthant(orthant_point(r, n, 1.5))
}

fn spd_pt(r: &mut ChaCha8Rng, n: usize) -> Point {
    Point::Spd(spd(r, n, 0.3, 3.0))
}

/// Unit tangent (in the metric) of matching shape.
fn unit_tangent(r: &mut ChaCha8Rng, obj: &dyn Objective, p: &Point) -> Tangent {
    let v = match p {
        Point::Orthant(x) => Tangent::Orthant(gaussian_vec(r, x.dim(), 1.0).component_mul(x.coords())),
        Point::Spd(x) => Tangent::Spd(sym(r, x.dim(), 1.0)),
    };
    let nv = geometry::norm(obj.kind(), p, &v).unwrap();
    v.scale(1.0 / nv)
}

/// Central difference of `f(exp_p(h v))` against `⟨grad f, v⟩_p`.
fn fd_check(obj: &dyn Objective, p: &Point, v: &Tangent) {
    let kind = obj.kind();
    let h = 1e-5;
    let fp = obj.value(&geometry::exp_map(kind, p, &v.scale(h)).unwrap()).unwrap();
    let fm = obj.value(&geometry::exp_map(kind, p, &v.scale(-h)).unwrap()).unwrap();
    let fd = (fp - fm) / (2.0 * h);
    let g = obj.rgrad(p).unwrap();
    let exact = geometry::inner(kind, p, &g, v).unwrap();
    let scale = geometry::norm(kind, p, &g).unwrap() * geometry::norm(kind, p, v).unwrap();
    let f0 = obj.value(p).unwrap().abs();
    assert!(
        (fd - exact).abs() <= 1e-5 * scale.max(1e-3 * (1.0 + f0)),
        "{}: fd {fd} vs exact {exact}",
        obj.name()
    );
}

fn check_gradients(obj: &dyn Objective, r: &mut ChaCha8Rng, sample: &dyn Fn(&mut ChaCha8Rng) -> Point) {
    for _ in 0..10 {
        let p = sample(r);
        let v = unit_tangent(r, obj, &p);
        fd_check(obj, &p, &v);
        let converted = geometry::egrad_to_rgrad(obj.kind(), &p, &obj.egrad(&p).unwrap()).unwrap();
        let direct = obj.rgrad(&p).unwrap();
        let (eg, rg) = obj.gradients(&p).unwrap();
        assert!(direct.add_scaled(-1.0, &converted).unwrap().flat_norm() <= 1e-10 * converted.flat_norm().max(1.0));
        assert!(rg.add_scaled(-1.0, &direct).unwrap().flat_norm() <= 1e-12 * direct.flat_norm().max(1.0));
        assert!(eg.add_scaled(-1.0, &obj.egrad(&p).unwrap()).unwrap().flat_norm() <= 1e-12 * eg.flat_norm().max(1.0));
    }
}

#[test]
fn log2log_gradient_matches_finite_differences() {
    let mut r = rng(1);
    for n in [1, 3, 8] {
        let obj = random_p1(&mut r, n);
        check_gradients(&obj, &mut r, &|r| orthant_pt(r, n));
    }
}

#[test]
fn loglog_gradient_matches_finite_differences() {
    let mut r = rng(2);
    for n in [1, 4, 10] {
        let obj = random_p2(&mut r, n);
        check_gradients(&obj, &mut r, &|r| orthant_pt(r, n));
    }
}

#[test]
fn com_orthant_gradient_matches_finite_differences() {
    let mut r = rng(3);
    for (n, m) in [(1, 1), (5, 3), (12, 7)] {
        let obj = random_com(&mut r, n, m);
        assert!(obj.has_rgrad_shortcut());
        check_gradients(&obj, &mut r, &|r| orthant_pt(r, n));
    }
}

#[test]
fn logdet2_gradient_matches_finite_differences() {
    let mut r = rng(4);
    for n in [1, 3, 6] {
        let obj = logdet2(Problem3Params { a: r.random_range(0.1..2.0), b: r.random_range(0.1..2.0) }, n).unwrap();
        check_gradients(&obj, &mut r, &|r| spd_pt(r, n));
    }
}

#[test]
fn logdetratio_gradient_matches_finite_differences() {
    let mut r = rng(5);
    for n in [1, 3, 6] {
        let p = Problem4Params { a: 1.5, b1: 0.8, b2: 2.0, c: 0.4 };
        let obj = logdetratio(p, n).unwrap();
        check_gradients(&obj, &mut r, &|r| spd_pt(r, n));
    }
}

#[test]
fn karcher_gradient_matches_finite_differences() {
    let mut r = rng(6);
    for (n, m) in [(1, 2), (3, 4), (5, 3)] {
        let obj = random_karcher(&mut r, n, m);
        assert!(obj.has_rgrad_shortcut());
        check_gradients(&obj, &mut r, &|r| spd_pt(r, n));
    }
}

#[test]
fn known_minimizers_are_stationary() {
    let mut r = rng(7);
    let objs: Vec<Box<dyn Objective>> = vec![
        Box::new(random_p2(&mut r, 6)),
        Box::new(random_com(&mut r, 6, 4)),
        Box::new(
            karcher_spd(
                KarcherSpdData::new(vec![
                    SpdMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap(),
                    SpdMatrix::from_diagonal(&[4.0, 0.5, 1.0]).unwrap(),
                ])
                .unwrap(),
            )
            .unwrap(),
        ),
    ];
    for obj in &objs {
        let x = obj.known_minimizer().unwrap_or_else(|| panic!("{} has no minimizer", obj.name()));
        let g = obj.rgrad(&x).unwrap();
        assert!(geometry::norm(obj.kind(), &x, &g).unwrap() <= 1e-8, "{}", obj.name());
        assert!((obj.known_fstar().unwrap() - obj.value(&x).unwrap()).abs() <= 1e-12 * (1.0 + obj.value(&x).unwrap().abs()));
    }
}

#[test]
fn karcher_with_general_anchors_has_no_closed_form() {
    let mut r = rng(8);
    assert!(random_karcher(&mut r, 3, 3).known_minimizer().is_none());
    let single = random_karcher(&mut r, 3, 1);
    let a = single.data().matrices()[0].clone();
    assert_eq!(single.known_minimizer().unwrap().as_spd().unwrap().matrix(), a.matrix());
    assert!(single.known_fstar().unwrap() < 1e-20);
}

#[test]
fn scalar_reduction_values() {
    let p3 = logdet2(Problem3Params { a: 2.0, b: 3.0 }, 5).unwrap();
    assert!((p3.known_fstar().unwrap() + 9.0 / 8.0).abs() < 1e-14);
    let x = Point::Spd(p3.scalar_minimizer());
    assert!((p3.value(&x).unwrap() + 9.0 / 8.0).abs() < 1e-13);
    assert!(geometry::norm(p3.kind(), &x, &p3.rgrad(&x).unwrap()).unwrap() < 1e-12);
    assert!(p3.known_minimizer().is_none());
    let p4 = logdetratio(Problem4Params::default(), 3).unwrap();
    // a b1 b2 / (a b1 − c) = 2 and c b2 / (a b1 − c) = 1
    assert!((p4.known_fstar().unwrap() - 2f64.ln()).abs() < 1e-14);
    let t = (p4.critical_ln_det() / 3.0).exp();
    let x = Point::Spd(SpdMatrix::from_diagonal(&[t, t, t]).unwrap());
    assert!(geometry::norm(p4.kind(), &x, &p4.rgrad(&x).unwrap()).unwrap() < 1e-12);
    assert!((p4.value(&x).unwrap() - 2f64.ln()).abs() < 1e-14);
}

/// In log-coordinates `u = ln x` the orthant is flat: `hess f(x)[v] / x` equals
/// the derivative of `x ∘ f'(x)` along `u + t (v / x)`.
fn orthant_hessian_fd(obj: &dyn Objective, x: &OrthantPoint, v: &DVector<f64>) {
    let h = 1e-5;
    let w = |t: f64| {
        let y = OrthantPoint::new(x.coords().zip_map(v, |xi, vi| xi * (t * vi / xi).exp())).unwrap();
        let g = obj.egrad(&Point::Orthant(y.clone())).unwrap();
        g.as_orthant().unwrap().component_mul(y.coords())
    };
    let fd = (w(h) - w(-h)) / (2.0 * h);
    let hv = obj.hess_apply(&Point::Orthant(x.clone()), &Tangent::Orthant(v.clone())).unwrap();
    let exact = hv.as_orthant().unwrap().component_div(x.coords());
    assert!((&fd - &exact).amax() <= 1e-5 * exact.amax().max(1e-2), "{}: {fd} vs {exact}", obj.name());
}

#[test]
fn orthant_hessians_match_finite_differences() {
    let mut r = rng(9);
    for _ in 0..5 {
        let n = 4;
        let objs: Vec<Box<dyn Objective>> =
            vec![Box::new(random_p1(&mut r, n)), Box::new(random_p2(&mut r, n)), Box::new(random_com(&mut r, n, 3))];
        for obj in &objs {
            let x = orthant_point(&mut r, n, 1.5);
            let v = gaussian_vec(&mut r, n, 1.0).component_mul(x.coords());
            orthant_hessian_fd(obj.as_ref(), &x, &v);
        }
    }
}

#[test]
fn log2log_second_derivative_matches_finite_differences() {
    let mut r = rng(10);
    let obj = random_p1(&mut r, 3);
    for _ in 0..10 {
        let x = orthant_point(&mut r, 3, 1.0);
        for i in 0..3 {
            let h = 1e-6 * x.coords()[i];
            let at = |dx: f64| {
                let mut c = x.coords().clone();
                c[i] += dx;
                obj.egrad(&Point::Orthant(OrthantPoint::new(c).unwrap())).unwrap().as_orthant().unwrap()[i]
            };
            let fd = (at(h) - at(-h)) / (2.0 * h);
            let exact = obj.second_derivative(i, x.coords()[i]);
            assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0));
        }
    }
}

/// Largest eigenvalue magnitude of the hessian in the metric, by power iteration.
fn hessian_spectral_radius(obj: &dyn Objective, p: &Point, r: &mut ChaCha8Rng) -> f64 {
    let kind = obj.kind();
    let mut v = unit_tangent(r, obj, p);
    let mut est = 0.0;
    for _ in 0..200 {
        let hv = obj.hess_apply(p, &v).unwrap();
        let nh = geometry::norm(kind, p, &hv).unwrap();
        if nh == 0.0 {
            return 0.0;
        }
        est = nh;
        v = hv.scale(1.0 / nh);
    }
    est
}

#[test]
fn hessians_stay_below_lipschitz_bounds() {
    let mut r = rng(11);
    for _ in 0..5 {
        let p1 = random_p1(&mut r, 5);
        let p2 = random_p2(&mut r, 5);
        let com = random_com(&mut r, 5, 4);
        let p3 = logdet2(Problem3Params { a: r.random_range(0.2..2.0), b: 1.0 }, 4).unwrap();
        let p4 = logdetratio(Problem4Params::default(), 4).unwrap();
        let cases: Vec<(&dyn Objective, Point)> = vec![
            (&p1, orthant_pt(&mut r, 5)),
            (&p2, orthant_pt(&mut r, 5)),
            (&com, orthant_pt(&mut r, 5)),
            (&p3, spd_pt(&mut r, 4)),
            (&p4, spd_pt(&mut r, 4)),
        ];
        for (obj, p) in cases {
            let rho = hessian_spectral_radius(obj, &p, &mut r);
            let l = obj.lipschitz_bound().unwrap();
            assert!(rho <= l * (1.0 + 1e-8), "{}: {rho} > {l}", obj.name());
        }
        let x = orthant_pt(&mut r, 5);
        assert!(hessian_spectral_radius(&p2, &x, &mut r) <= p2.tight_lipschitz() * (1.0 + 1e-8));
    }
}

#[test]
fn orthant_problems_are_geodesically_convex() {
    let mut r = rng(12);
    for _ in 0..20 {
        let n = 4;
        let objs: Vec<Box<dyn Objective>> =
            vec![Box::new(random_p1(&mut r, n)), Box::new(random_p2(&mut r, n)), Box::new(random_com(&mut r, n, 2))];
        for obj in &objs {
            let x = orthant_point(&mut r, n, 2.0);
            let y = orthant_point(&mut r, n, 2.0);
            for t in [0.1, 0.3, 0.5, 0.8] {
                let z = OrthantPoint::new(x.coords().zip_map(y.coords(), |a, b| a.powf(1.0 - t) * b.powf(t))).unwrap();
                let fz = obj.value(&Point::Orthant(z)).unwrap();
                let fx = obj.value(&Point::Orthant(x.clone())).unwrap();
                let fy = obj.value(&Point::Orthant(y.clone())).unwrap();
                let chord = (1.0 - t) * fx + t * fy;
                assert!(fz <= chord + 1e-10 * chord.abs().max(1.0), "{}", obj.name());
            }
        }
    }
}

/// Geodesic between commuting `Q diag(a) Qᵀ` and `Q diag(b) Qᵀ`.
fn commuting_geodesic(q: &DMatrix<f64>, a: &[f64], b: &[f64], t: f64) -> SpdMatrix {
    let d = DVector::from_fn(a.len(), |i, _| a[i].powf(1.0 - t) * b[i].powf(t));
    SpdMatrix::new(q * DMatrix::from_diagonal(&d) * q.transpose()).unwrap()
}

#[test]
fn logdet_problems_are_convex_on_commuting_pairs() {
    let mut r = rng(13);
    let n = 3;
    let p3 = logdet2(Problem3Params::default(), n).unwrap();
    let p4 = logdetratio(Problem4Params::default(), n).unwrap();
    for _ in 0..20 {
        let q = orthogonal(&mut r, n);
        let a: Vec<f64> = (0..n).map(|_| r.random_range(0.05..20.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| r.random_range(0.05..20.0)).collect();
        for obj in [&p3 as &dyn Objective, &p4] {
            let f = |t: f64| obj.value(&Point::Spd(commuting_geodesic(&q, &a, &b, t))).unwrap();
            for t in [0.2, 0.5, 0.7] {
                let chord = (1.0 - t) * f(0.0) + t * f(1.0);
                assert!(f(t) <= chord + 1e-10 * chord.abs().max(1.0));
            }
        }
    }
}

#[test]
fn karcher_is_strongly_convex_along_geodesics() {
    let mut r = rng(14);
    for _ in 0..10 {
        let n = 3;
        let obj = random_karcher(&mut r, n, 3);
        let x = spd(&mut r, n, 0.3, 3.0);
        let y = spd(&mut r, n, 0.3, 3.0);
        let xs = x.sqrt();
        let xi = x.inv_sqrt();
        let inner = SymMatrix::symmetrize(xi.matrix() * y.matrix() * xi.matrix()).unwrap();
        let ln = spd_fn(&inner, MatrixFn::Log).unwrap();
        let d = ln.matrix().norm();
        let gamma = |t: f64| {
            let e = spd_fn(&ln.scale(t), MatrixFn::Exp).unwrap();
            Point::Spd(SpdMatrix::new(xs.matrix() * e.matrix() * xs.matrix()).unwrap())
        };
        let m = obj.data().matrices().len() as f64;
        for t in [0.25, 0.5, 0.75] {
            let chord = (1.0 - t) * obj.value(&gamma(0.0)).unwrap() + t * obj.value(&gamma(1.0)).unwrap();
            let strong = 0.5 * m * t * (1.0 - t) * d * d;
            let ft = obj.value(&gamma(t)).unwrap();
            assert!(ft <= chord - strong + 1e-9 * chord.max(1.0), "{ft} vs {}", chord - strong);
        }
        assert!(rel_err(obj.value(&gamma(1.0)).unwrap(), obj.value(&Point::Spd(y.clone())).unwrap()) < 1e-8);
    }
}
