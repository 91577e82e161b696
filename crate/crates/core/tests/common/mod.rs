//! Test-only oracles shared by the integration suites.
#![allow(dead_code)]

use nalgebra::DMatrix;

/// `exp(A)` by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.amax() * n as f64;
    let squarings = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=24 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Max of `|a - b|` relative to `max(1, |b|)`.
pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

use std::sync::Arc;

use adsgauss_core::curve_frames::{
    solve_space_frame, CurvatureFn, CurvatureProfile, CurveSpace, FrameField, FrameSample,
};
use adsgauss_core::pseudo_linear::PVec;
use adsgauss_core::surface_catalog::{Immersion, Jet};

/// Anti-de Sitter frame with the standard initial frame at `span.0`.
pub fn ads_frame(k: Vec<CurvatureFn>, span: (f64, f64)) -> Arc<FrameField> {
    let prof = CurvatureProfile::new(k.len() + 1, k).unwrap();
    let f0 = FrameSample::standard(CurveSpace::AntiDeSitter, prof.order);
    Arc::new(solve_space_frame(&prof, -1.0, &f0, span, None).unwrap())
}

pub fn constants(k: &[f64]) -> Vec<CurvatureFn> {
    k.iter().map(|&v| CurvatureFn::constant(v)).collect()
}

/// Largest deviation of analytic partials from central differences of lower-order data,
/// relative to the size of the analytic value.
pub fn jet_fd_deviation(jet: impl Fn(&[f64]) -> Jet, p: &[f64], h: f64) -> f64 {
    let n = p.len();
    let at = |i: usize, s: f64| {
        let mut q = p.to_vec();
        q[i] += s;
        jet(&q)
    };
    let j0 = jet(p);
    let scale = 1.0 + j0.x.max_abs();
    let mut worst = 0.0_f64;
    let dev = |a: &PVec, b: &PVec| (a - b).max_abs() / (scale + b.max_abs());
    for i in 0..n {
        let (jp, jm) = (at(i, h), at(i, -h));
        let fd = (&jp.x - &jm.x).scaled(0.5 / h);
        worst = worst.max(dev(&fd, &j0.d1[i]));
        for k in 0..n {
            let fd2 = (&jp.d1[k] - &jm.d1[k]).scaled(0.5 / h);
            worst = worst.max(dev(&fd2, j0.d2(i, k)));
        }
    }
    worst
}

/// Every node of an `m`-per-axis grid inside the immersion's chart.
pub fn chart_points(imm: &dyn Immersion, per_axis: usize) -> Vec<Vec<f64>> {
    let dom = imm.domain();
    let n = dom.dim();
    let total = per_axis.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|k| {
                    let i = idx % per_axis;
                    idx /= per_axis;
                    dom.lower[k] + (dom.upper[k] - dom.lower[k]) * i as f64 / (per_axis - 1) as f64
                })
                .collect()
        })
        .collect()
}

use adsgauss_core::surface_catalog::{
    b_scroll, complex_circle, generalized_b_scroll, BScroll, ComplexCircle, ComplexRadius,
    GeneralizedBScroll,
};

pub fn circle(im: f64) -> ComplexCircle {
    complex_circle(ComplexRadius::from_im(im))
}

/// B-scroll over `s ∈ [−0.5, 0.5]`, `t ∈ [0.5, 1.5]`.
pub fn scroll(k1: CurvatureFn, k2: f64) -> BScroll {
    b_scroll(ads_frame(vec![k1, CurvatureFn::constant(k2)], (-0.5, 0.5))).unwrap()
}

/// The n = 4 hypersurface with k = (1, 1, 0.5, 0.7).
pub fn hypersurface_n4() -> GeneralizedBScroll {
    generalized_b_scroll(ads_frame(constants(&[1.0, 1.0, 0.5, 0.7]), (0.0, 1.0))).unwrap()
}
