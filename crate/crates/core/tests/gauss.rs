mod common;

use std::sync::Arc;

use adsgauss_core::curve_frames::CurvatureFn;
use adsgauss_core::gauss_type::{
    bscroll_decomposition, classify_field, default_grid, derivative_identity_residual,
    fit_annihilator, fit_laplacian_coefficients, gauss_field, laplacian_identity_residual,
    GaussField, Thresholds, Verdict, Witness,
};
use adsgauss_core::geometry_engine::{curvature_summary, ChartGrid};
use adsgauss_core::multivector::{wedge, Multivector};
use adsgauss_core::pseudo_linear::{PVec, Signature};
use adsgauss_core::surface_catalog::{pair_index, ChartBox, Immersion, Jet, SpaceForm};
use adsgauss_core::GeomError;
use common::{circle, scroll};

fn field(m: &dyn Immersion) -> GaussField {
    gauss_field(m, default_grid(m).unwrap()).unwrap()
}

/// `α = −2cd/(c²+d²)`, `β = 1/(c²+d²)` for `κ = −1 + i·im`.
fn alpha_beta(im: f64) -> (f64, f64) {
    let r = adsgauss_core::surface_catalog::ComplexRadius::from_im(im);
    let (c, d) = (r.c(), r.d());
    let s = c * c + d * d;
    (-2.0 * c * d / s, 1.0 / s)
}

#[test]
fn unit_circle_gauss_map_at_origin() {
    let m = circle(0.0);
    let grid = ChartGrid::new(vec![-0.1, -0.1], vec![0.1, 0.1], vec![3, 3]).unwrap();
    let g = gauss_field(&m, grid).unwrap();
    let sig = Signature::new(4, 2).unwrap();
    let e = |i| PVec::basis(sig, i);
    let expected = wedge(&[e(0), e(1), e(3)]).unwrap().scaled(-1.0);
    let got = Multivector::new(sig, 3, g.nu.get(4).unwrap().to_vec()).unwrap();
    let mut diff = got;
    diff.axpy(-1.0, &expected);
    assert!(diff.max_abs() < 1e-14);
    assert_eq!(g.pairing_sign(), Some(1.0));
}

#[test]
fn pairing_sign_is_constant_on_catalog_grids() {
    for im in [0.0, 2.0 * 2f64.sqrt(), -0.7] {
        assert_eq!(field(&circle(im)).pairing_sign(), Some(1.0));
    }
    let g = field(&scroll(CurvatureFn::constant(1.0), 2.0));
    assert!(g.pairing_sign().is_some());
    assert_eq!(g.valid_count(), g.grid().len());
}

#[test]
fn derivative_identity_holds_and_detects_corruption() {
    let mut g = field(&circle(0.0));
    assert!(derivative_identity_residual(&g) < 1e-6);
    let b = field(&scroll(CurvatureFn::constant(1.0), 2.0));
    let rb = derivative_identity_residual(&b);
    assert!(rb < 1e-6, "{rb}");
    for node in g.nodes.iter_mut().flatten() {
        node.h[(0, 1)] += 1e-3;
    }
    assert!(derivative_identity_residual(&g) > 1e-4);
}

#[test]
fn laplacian_identities_on_constant_mean_curvature_members() {
    for im in [0.0, 2.0 * 2f64.sqrt()] {
        let r = laplacian_identity_residual(&field(&circle(im)));
        assert!(r.r1 < 1e-5 && r.r2 < 1e-5, "{r:?}");
        assert!(r.gradient_term < 1e-8, "{r:?}");
    }
    let r = laplacian_identity_residual(&field(&scroll(CurvatureFn::constant(1.0), 2.0)));
    assert!(r.r1 < 1e-5 && r.r2 < 1e-5, "{r:?}");
}

#[test]
fn complex_circle_laplacian_coefficients() {
    let im = 2.0 * 2f64.sqrt();
    let (a, b) = alpha_beta(im);
    let fit = fit_laplacian_coefficients(&field(&circle(im))).unwrap();
    assert!((fit.a - 2.0 * (a * a - b * b)).abs() < 1e-6, "{fit:?}");
    assert!((fit.b - 2.0 * a).abs() < 1e-6, "{fit:?}");
    assert!(fit.residual < 1e-6);
}

#[test]
fn flat_b_scroll_laplacian() {
    let k2 = 1.0;
    let fit = fit_laplacian_coefficients(&field(&scroll(CurvatureFn::constant(1.0), k2))).unwrap();
    assert!(
        (fit.a - 2.0).abs() < 1e-6 && (fit.b + 2.0 * k2).abs() < 1e-6,
        "{fit:?}"
    );
}

#[test]
fn annihilator_matches_closed_forms() {
    for im in [2.0 * 2f64.sqrt(), 1.3, -0.4] {
        let (a, b) = alpha_beta(im);
        let fit = fit_annihilator(&field(&circle(im)));
        let (p, q) = (-2.0 * (a * a - b * b - 1.0), 4.0 * b * b);
        assert!(
            (fit.p - p).abs() < 1e-4 && (fit.q - q).abs() < 1e-4,
            "{im} {fit:?}"
        );
        assert!(fit.complex_roots && !fit.fallback);
    }
    let fit = fit_annihilator(&field(&circle(2.0 * 2f64.sqrt())));
    assert!((fit.p - 4.0 / 9.0).abs() < 1e-4 && (fit.q - 4.0 / 9.0).abs() < 1e-4);
    let disc = fit.p * fit.p - 4.0 * fit.q;
    assert!((disc + 128.0 / 81.0).abs() < 1e-3, "{disc}");

    for k2 in [2.0, -1.5, 0.5] {
        let fit = fit_annihilator(&field(&scroll(CurvatureFn::constant(1.0), k2)));
        let p = -2.0 * (k2 * k2 - 1.0);
        assert!(
            (fit.p - p).abs() < 1e-4 && fit.q.abs() < 1e-4,
            "{k2} {fit:?}"
        );
    }
}

#[test]
fn unit_circle_annihilator_falls_back() {
    let fit = fit_annihilator(&field(&circle(0.0)));
    assert!(fit.fallback);
    assert!((fit.p - 2.0).abs() < 1e-5, "{fit:?}");
}

#[test]
fn b_scroll_decomposition() {
    let m = scroll(CurvatureFn::constant(1.0), 2.0);
    let g = field(&m);
    let d = bscroll_decomposition(&g, &m).unwrap();
    assert_eq!(d.lambda2, 6.0);
    assert!(d.harmonic_residual < 1e-5, "{}", d.harmonic_residual);
    assert!(d.eigen_residual < 1e-5, "{}", d.eigen_residual);
    assert!(d.witness_ratio > 0.5, "{}", d.witness_ratio);
    assert!(d.witness_mismatch < 1e-6, "{}", d.witness_mismatch);
    assert!(
        d.alternate_form_mismatch > 0.1,
        "{}",
        d.alternate_form_mismatch
    );

    let flat = scroll(CurvatureFn::constant(1.0), 1.0);
    assert_eq!(
        bscroll_decomposition(&field(&flat), &flat).unwrap_err(),
        GeomError::DecompositionUndefined
    );
}

#[test]
fn decomposition_witness_for_varying_k1() {
    let m = scroll(
        CurvatureFn::Sinusoid {
            amp: 0.5,
            freq: 1.0,
            phase: 0.3,
            offset: 1.0,
        },
        -1.5,
    );
    let g = field(&m);
    let d = bscroll_decomposition(&g, &m).unwrap();
    assert!(
        d.harmonic_residual < 1e-5 && d.eigen_residual < 1e-5,
        "{d:?}"
    );
    assert!(d.witness_ratio > 0.5 && d.witness_mismatch < 1e-6, "{d:?}");
}

#[test]
fn classifier_verdicts() {
    let th = Thresholds::default();
    let r = classify_field(&field(&circle(0.0)), &th);
    match r.verdict {
        Verdict::OneType { lambda } => assert!((lambda + 2.0).abs() < 1e-6),
        ref v => panic!("{v:?}"),
    }
    let r = classify_field(&field(&circle(2.0 * 2f64.sqrt())), &th);
    assert_eq!(
        r.verdict,
        Verdict::InfiniteTypeConsistent {
            witness: Witness::ComplexRoots
        }
    );

    let m = scroll(CurvatureFn::constant(1.0), 2.0);
    let r = classify_field(&field(&m), &th);
    let s = curvature_summary(&m, &[0.0, 1.0]).unwrap().scalar_curvature;
    match r.verdict {
        Verdict::NullTwoType { lambda1, lambda2 } => {
            assert_eq!(lambda1, 0.0);
            assert!((lambda2 - 6.0).abs() < 1e-4 && (lambda2 - s).abs() < 1e-4);
        }
        ref v => panic!("{v:?} {r:?}"),
    }
    let r = classify_field(&field(&scroll(CurvatureFn::constant(1.0), 1.0)), &th);
    assert_eq!(
        r.verdict,
        Verdict::InfiniteTypeConsistent {
            witness: Witness::Biharmonic
        },
        "{r:?}"
    );
}

#[test]
fn report_serializes_with_kind_tag() {
    let r = classify_field(&field(&circle(0.0)), &Thresholds::default());
    let v: serde_json::Value = serde_json::to_value(&r).unwrap();
    assert_eq!(v["verdict"]["kind"], "one_type");
    assert!(v["lambda1"]["lambda"].is_number() && v["lambda1"]["res"].is_number());
    assert_eq!(v["annihilator"]["roots"].as_array().unwrap().len(), 2);
    assert_eq!(v["thresholds"]["tau_fit"], 1e-4);
}

#[test]
fn non_anti_de_sitter_ambients_are_rejected() {
    struct Plane;
    impl Immersion for Plane {
        fn chart_dim(&self) -> usize {
            2
        }
        fn ambient(&self) -> Signature {
            Signature::new(3, 1).unwrap()
        }
        fn space_form(&self) -> Option<SpaceForm> {
            None
        }
        fn domain(&self) -> ChartBox {
            ChartBox::new(vec![0.0, 0.0], vec![1.0, 1.0]).unwrap()
        }
        fn jet(&self, p: &[f64]) -> Jet {
            let sig = self.ambient();
            Jet {
                x: PVec::new(sig, vec![p[0], p[1], 0.0]).unwrap(),
                d1: vec![PVec::basis(sig, 0), PVec::basis(sig, 1)],
                d2: vec![PVec::zeros(sig); 3],
            }
        }
        fn normal_jet(&self, _p: &[f64]) -> Option<Jet> {
            None
        }
        fn provenance(&self) -> String {
            "plane".into()
        }
    }
    let grid = default_grid(&Plane).unwrap();
    assert!(matches!(
        gauss_field(&Plane, grid),
        Err(GeomError::Unsupported(_))
    ));
}

/// `x = (√F, v, u, λuv)` with `F = 1 − v² + u² + λ²u²v²`, a Lorentzian surface in
/// anti-de Sitter space whose mean curvature varies.
struct Graph {
    lambda: f64,
}

impl Immersion for Graph {
    fn chart_dim(&self) -> usize {
        2
    }
    fn ambient(&self) -> Signature {
        Signature::new(4, 2).unwrap()
    }
    fn space_form(&self) -> Option<SpaceForm> {
        Some(SpaceForm::ANTI_DE_SITTER)
    }
    fn domain(&self) -> ChartBox {
        ChartBox::new(vec![-0.3, -0.3], vec![0.3, 0.3]).unwrap()
    }
    fn jet(&self, p: &[f64]) -> Jet {
        let (u, v, l2) = (p[0], p[1], self.lambda * self.lambda);
        let f = 1.0 - v * v + u * u + l2 * u * u * v * v;
        let fd = [
            2.0 * u + 2.0 * l2 * u * v * v,
            -2.0 * v + 2.0 * l2 * u * u * v,
        ];
        let fdd = [
            [2.0 + 2.0 * l2 * v * v, 4.0 * l2 * u * v],
            [4.0 * l2 * u * v, -2.0 + 2.0 * l2 * u * u],
        ];
        let r = f.sqrt();
        let sig = self.ambient();
        let vec = |c: [f64; 4]| PVec::new(sig, c.to_vec()).unwrap();
        let l = self.lambda;
        let x0i = |i: usize| fd[i] / (2.0 * r);
        let x0ij = |i: usize, j: usize| fdd[i][j] / (2.0 * r) - fd[i] * fd[j] / (4.0 * f * r);
        let mut d2 = vec![PVec::zeros(sig); 3];
        d2[pair_index(2, 0, 0)] = vec([x0ij(0, 0), 0.0, 0.0, 0.0]);
        d2[pair_index(2, 0, 1)] = vec([x0ij(0, 1), 0.0, 0.0, l]);
        d2[pair_index(2, 1, 1)] = vec([x0ij(1, 1), 0.0, 0.0, 0.0]);
        Jet {
            x: vec([r, v, u, l * u * v]),
            d1: vec![
                vec([x0i(0), 0.0, 1.0, l * v]),
                vec([x0i(1), 1.0, 0.0, l * u]),
            ],
            d2,
        }
    }
    fn normal_jet(&self, _p: &[f64]) -> Option<Jet> {
        None
    }
    fn provenance(&self) -> String {
        format!("graph(lambda={})", self.lambda)
    }
}

#[test]
fn graph_jets_are_consistent() {
    let m = Graph { lambda: 1.3 };
    for p in common::chart_points(&m, 5) {
        assert!((m.jet(&p).x.norm_sq() + 1.0).abs() < 1e-14);
        assert!(common::jet_fd_deviation(|q| m.jet(q), &p, 1e-5) < 1e-8);
    }
}

#[test]
fn gradient_term_is_needed_for_varying_mean_curvature() {
    let m = Graph { lambda: 1.3 };
    let g = field(&m);
    let r = laplacian_identity_residual(&g);
    assert!(r.gradient_term > 1e-2, "{r:?}");
    assert!(r.r1 < 1e-6 && r.r2 < 1e-6, "{r:?}");
    assert!(derivative_identity_residual(&g) < 1e-6);
}

#[test]
fn hypersurface_n4_companion_identity() {
    let m = Arc::new(common::hypersurface_n4());
    let g = field(m.as_ref());
    let r = laplacian_identity_residual(&g);
    assert!(r.r1 < 1e-4 && r.r2 < 1e-4, "{r:?}");
    let fit = fit_laplacian_coefficients(&g).unwrap();
    assert!(
        (fit.a - 4.0).abs() < 1e-4 && (fit.b + 4.0).abs() < 1e-4,
        "{fit:?}"
    );
}
