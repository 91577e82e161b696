//! Closed-form immersions with analytic jets: complex circles in H³₁,
//! B-scrolls over null curves, the generalized B-scroll hypersurface,
//! parallel families and their focal parameters.
//!
//! Complex vectors of ℂ² are realified into 𝔼⁴₂ with the axis order
//! `(Im z₁, Im z₂, Re z₁, Re z₂)`, so `⟨a, b⟩ = Re(a₁b₁ + a₂b₂)`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::curve_frames::{CurveSpace, FrameField, FrameJet};
use crate::error::{GeomError, Result};
use crate::pseudo_linear::{PVec, Signature};

/// Distance kept from excluded loci by grid generators.
pub const DELTA_LOCUS: f64 = 1e-2;

/// Space form containing an immersion: `⟨x,x⟩ = eps` and sectional curvature `eps·c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceForm {
    pub eps: f64,
    pub c: f64,
}

impl SpaceForm {
    pub const ANTI_DE_SITTER: SpaceForm = SpaceForm { eps: -1.0, c: 1.0 };
    pub const DE_SITTER: SpaceForm = SpaceForm { eps: 1.0, c: 1.0 };
}

/// Axis-aligned chart box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl ChartBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
            return Err(GeomError::Dimension(format!(
                "invalid chart box {lower:?} .. {upper:?}"
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (a, b))| *x >= *a && *x <= *b)
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }
}

/// Position of `∂ᵢ∂ⱼ` in the packed list of second partials
/// `(0,0), (0,1), …, (0,n−1), (1,1), …`.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

/// Value with first and packed second partials.
#[derive(Clone, Debug)]
pub struct Jet {
    pub x: PVec,
    pub d1: Vec<PVec>,
    pub d2: Vec<PVec>,
}

impl Jet {
    pub fn d2(&self, i: usize, j: usize) -> &PVec {
        &self.d2[pair_index(self.d1.len(), i, j)]
    }

    fn combine(a: f64, p: &Jet, b: f64, q: &Jet) -> Jet {
        let lin = |x: &PVec, y: &PVec| {
            let mut r = x.scaled(a);
            r.axpy(b, y);
            r
        };
        Jet {
            x: lin(&p.x, &q.x),
            d1: p.d1.iter().zip(&q.d1).map(|(x, y)| lin(x, y)).collect(),
            d2: p.d2.iter().zip(&q.d2).map(|(x, y)| lin(x, y)).collect(),
        }
    }
}

/// A parameterized immersion with analytic jets.
pub trait Immersion: Send + Sync {
    fn chart_dim(&self) -> usize;
    fn ambient(&self) -> Signature;
    fn space_form(&self) -> Option<SpaceForm>;
    fn domain(&self) -> ChartBox;
    /// Position with first and second partials at chart point `p`.
    fn jet(&self, p: &[f64]) -> Jet;
    /// A unit normal field with its first and second partials, when known in closed form.
    fn normal_jet(&self, p: &[f64]) -> Option<Jet>;
    /// Points that grid generators must avoid (within [`DELTA_LOCUS`]).
    fn excluded(&self, _p: &[f64]) -> bool {
        false
    }
    /// Which catalog object this is.
    fn provenance(&self) -> String;

    fn point(&self, p: &[f64]) -> PVec {
        self.jet(p).x
    }
}

/// Which square root of κ is used.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootBranch {
    /// Argument in (−π/2, π/2].
    #[default]
    Principal,
    Negated,
}

/// `κ` with `Re κ = −1` and its chosen root `√κ = c + i d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexRadius {
    pub kappa: Complex64,
    pub root: Complex64,
    pub branch: RootBranch,
}

impl ComplexRadius {
    pub fn new(kappa: Complex64, branch: RootBranch) -> Result<Self> {
        if (kappa.re + 1.0).abs() > 1e-12 * kappa.norm().max(1.0) {
            return Err(GeomError::NotInAntiDeSitter(kappa.re));
        }
        // normalize −0.0 so that κ = −1 maps to root i
        let k = Complex64::new(kappa.re, if kappa.im == 0.0 { 0.0 } else { kappa.im });
        let mut root = k.sqrt();
        if branch == RootBranch::Negated {
            root = -root;
        }
        Ok(Self {
            kappa,
            root,
            branch,
        })
    }

    /// `κ = −1 + i·im`.
    pub fn from_im(im: f64) -> Self {
        Self::new(Complex64::new(-1.0, im), RootBranch::Principal).expect("Re = -1")
    }

    /// Radius determined by a root `c + i d` with `c² − d² = −1`.
    pub fn from_root(root: Complex64) -> Self {
        Self {
            kappa: root * root,
            root,
            branch: RootBranch::Principal,
        }
    }

    pub fn c(&self) -> f64 {
        self.root.re
    }

    pub fn d(&self) -> f64 {
        self.root.im
    }
}

fn realify(sig: Signature, z1: Complex64, z2: Complex64) -> PVec {
    PVec::new(sig, vec![z1.im, z2.im, z1.re, z2.re]).expect("four coordinates")
}

/// `x(z) = √κ (cos z, sin z)`, `z = x + i y`.
#[derive(Clone, Debug)]
pub struct ComplexCircle {
    pub radius: ComplexRadius,
    pub domain: ChartBox,
}

/// Complex circle on the default chart `[−1, 1]²`.
pub fn complex_circle(radius: ComplexRadius) -> ComplexCircle {
    ComplexCircle {
        radius,
        domain: ChartBox::new(vec![-1.0, -1.0], vec![1.0, 1.0]).expect("valid box"),
    }
}

impl ComplexCircle {
    pub fn with_domain(mut self, domain: ChartBox) -> Self {
        self.domain = domain;
        self
    }

    // jet of μ·(cos z, sin z) for a holomorphic coefficient μ
    fn holo_jet(&self, mu: Complex64, p: &[f64]) -> Jet {
        let sig = self.ambient();
        let z = Complex64::new(p[0], p[1]);
        let (c, s) = (z.cos(), z.sin());
        let i = Complex64::i();
        let w = |f: Complex64| realify(sig, f * c, f * s);
        let dw = |f: Complex64| realify(sig, -f * s, f * c);
        Jet {
            x: w(mu),
            d1: vec![dw(mu), dw(i * mu)],
            d2: vec![w(-mu), w(-i * mu), w(mu)],
        }
    }
}

impl Immersion for ComplexCircle {
    fn chart_dim(&self) -> usize {
        2
    }

    fn ambient(&self) -> Signature {
        Signature::new(4, 2).expect("E^4_2")
    }

    fn space_form(&self) -> Option<SpaceForm> {
        Some(SpaceForm::ANTI_DE_SITTER)
    }

    fn domain(&self) -> ChartBox {
        self.domain.clone()
    }

    fn jet(&self, p: &[f64]) -> Jet {
        self.holo_jet(self.radius.root, p)
    }

    fn normal_jet(&self, p: &[f64]) -> Option<Jet> {
        let mu = Complex64::new(self.radius.d(), self.radius.c());
        Some(self.holo_jet(mu, p))
    }

    fn provenance(&self) -> String {
        format!(
            "complex circle, kappa = {} + {}i",
            self.radius.kappa.re, self.radius.kappa.im
        )
    }
}

fn check_frame_space(field: &FrameField) -> Result<SpaceForm> {
    match field.space() {
        CurveSpace::AntiDeSitter => Ok(SpaceForm::ANTI_DE_SITTER),
        CurveSpace::DeSitter => Ok(SpaceForm::DE_SITTER),
        CurveSpace::Flat => Err(GeomError::Hypothesis(
            "a B-scroll needs a frame solved in a space form".into(),
        )),
    }
}

fn constant_curvature(field: &FrameField, i: usize) -> Result<f64> {
    let f = &field.profile().k[i - 1];
    if !f.is_constant() {
        return Err(GeomError::Hypothesis(format!("k{i} must be constant")));
    }
    Ok(f.value(field.span().0))
}

fn s_range_check(field: &FrameField, domain: &ChartBox) -> Result<()> {
    let (a, b) = field.span();
    if domain.lower[0] < a || domain.upper[0] > b {
        return Err(GeomError::OutOfSpan(if domain.lower[0] < a {
            domain.lower[0]
        } else {
            domain.upper[0]
        }));
    }
    Ok(())
}

/// `x(s, t) = γ(s) + t B(s)` over an order-3 null curve.
#[derive(Clone, Debug)]
pub struct BScroll {
    frame: Arc<FrameField>,
    k2: f64,
    space: SpaceForm,
    domain: ChartBox,
}

/// B-scroll over the whole frame span with `t ∈ [0.5, 1.5]`.
pub fn b_scroll(frame: Arc<FrameField>) -> Result<BScroll> {
    let (a, b) = frame.span();
    let domain = ChartBox::new(vec![a, 0.5], vec![b, 1.5])?;
    b_scroll_on(frame, domain)
}

/// B-scroll on an explicit `(s, t)` box.
pub fn b_scroll_on(frame: Arc<FrameField>, domain: ChartBox) -> Result<BScroll> {
    if frame.order() != 3 {
        return Err(GeomError::Hypothesis(format!(
            "a B-scroll needs an order-3 frame, got order {}",
            frame.order()
        )));
    }
    let space = check_frame_space(&frame)?;
    let k2 = constant_curvature(&frame, 2)?;
    if domain.dim() != 2 {
        return Err(GeomError::Dimension("B-scroll charts are (s, t)".into()));
    }
    s_range_check(&frame, &domain)?;
    Ok(BScroll {
        frame,
        k2,
        space,
        domain,
    })
}

impl BScroll {
    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn k1(&self, s: f64) -> f64 {
        self.frame.profile().k(1, s)
    }

    pub fn frame(&self) -> &FrameField {
        &self.frame
    }

    fn frame_jet(&self, s: f64) -> FrameJet {
        self.frame.jet_at(s).expect("chart inside the frame span")
    }
}

impl Immersion for BScroll {
    fn chart_dim(&self) -> usize {
        2
    }

    fn ambient(&self) -> Signature {
        self.frame.ambient()
    }

    fn space_form(&self) -> Option<SpaceForm> {
        Some(self.space)
    }

    fn domain(&self) -> ChartBox {
        self.domain.clone()
    }

    fn jet(&self, p: &[f64]) -> Jet {
        let t = p[1];
        let FrameJet { value: f, d1, d2 } = self.frame_jet(p[0]);
        let sig = self.ambient();
        let x = PVec::combination(sig, &[(1.0, &f.gamma), (t, &f.b)]);
        let xs = PVec::combination(sig, &[(1.0, &d1.gamma), (t, &d1.b)]);
        let xss = PVec::combination(sig, &[(1.0, &d2.gamma), (t, &d2.b)]);
        Jet {
            x,
            d1: vec![xs, f.b.clone()],
            d2: vec![xss, d1.b.clone(), PVec::zeros(sig)],
        }
    }

    fn normal_jet(&self, p: &[f64]) -> Option<Jet> {
        let t = p[1];
        let k2 = self.k2;
        let FrameJet { value: f, d1, d2 } = self.frame_jet(p[0]);
        let sig = self.ambient();
        let n = PVec::combination(sig, &[(k2 * t, &f.b), (1.0, &f.c)]);
        let ns = PVec::combination(sig, &[(k2 * t, &d1.b), (1.0, &d1.c)]);
        let nss = PVec::combination(sig, &[(k2 * t, &d2.b), (1.0, &d2.c)]);
        Some(Jet {
            x: n,
            d1: vec![ns, f.b.scaled(k2)],
            d2: vec![nss, d1.b.scaled(k2), PVec::zeros(sig)],
        })
    }

    fn excluded(&self, p: &[f64]) -> bool {
        p[1].abs() < DELTA_LOCUS
    }

    fn provenance(&self) -> String {
        format!("B-scroll, k2 = {}", self.k2)
    }
}

/// The hypersurface
/// `x = (1+ρ)γ + tB + Σ zⱼZⱼ − k₂ρC`, `ρ = |z|²/2`, over a null curve of
/// order `n+1` in H^{n+1}₁ with `k₂² = 1` and constant `k₃, k₄, …`.
#[derive(Clone, Debug)]
pub struct GeneralizedBScroll {
    frame: Arc<FrameField>,
    k2: f64,
    domain: ChartBox,
}

/// Generalized B-scroll over the frame span, `t ∈ [0.5, 1.5]`, `zⱼ ∈ [−0.5, 0.5]`.
pub fn generalized_b_scroll(frame: Arc<FrameField>) -> Result<GeneralizedBScroll> {
    let n = frame.order() - 1;
    let (a, b) = frame.span();
    let mut lo = vec![a, 0.5];
    let mut hi = vec![b, 1.5];
    lo.extend(std::iter::repeat(-0.5).take(n - 2));
    hi.extend(std::iter::repeat(0.5).take(n - 2));
    generalized_b_scroll_on(frame, ChartBox::new(lo, hi)?)
}

pub fn generalized_b_scroll_on(
    frame: Arc<FrameField>,
    domain: ChartBox,
) -> Result<GeneralizedBScroll> {
    if frame.space() != CurveSpace::AntiDeSitter {
        return Err(GeomError::Hypothesis(
            "the generalized B-scroll lives in anti-de Sitter space".into(),
        ));
    }
    if frame.order() < 4 {
        return Err(GeomError::Hypothesis(format!(
            "frame order must be at least 4 (hypersurface dimension ≥ 3), got {}",
            frame.order()
        )));
    }
    let k2 = constant_curvature(&frame, 2)?;
    if (k2 * k2 - 1.0).abs() > 1e-12 {
        return Err(GeomError::Hypothesis(format!(
            "k2^2 = 1 violated: k2 = {k2}"
        )));
    }
    for i in 3..frame.order() {
        let v = constant_curvature(&frame, i)?;
        if v == 0.0 {
            return Err(GeomError::Hypothesis(format!("k{i} must be nonzero")));
        }
    }
    if domain.dim() != frame.order() - 1 {
        return Err(GeomError::Dimension(format!(
            "chart dimension {} does not match frame order {}",
            domain.dim(),
            frame.order()
        )));
    }
    s_range_check(&frame, &domain)?;
    Ok(GeneralizedBScroll { frame, k2, domain })
}

impl GeneralizedBScroll {
    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn frame(&self) -> &FrameField {
        &self.frame
    }
}

impl Immersion for GeneralizedBScroll {
    fn chart_dim(&self) -> usize {
        self.domain.dim()
    }

    fn ambient(&self) -> Signature {
        self.frame.ambient()
    }

    fn space_form(&self) -> Option<SpaceForm> {
        Some(SpaceForm::ANTI_DE_SITTER)
    }

    fn domain(&self) -> ChartBox {
        self.domain.clone()
    }

    fn jet(&self, p: &[f64]) -> Jet {
        let n = self.chart_dim();
        let (t, z) = (p[1], &p[2..]);
        let rho = 0.5 * z.iter().map(|v| v * v).sum::<f64>();
        let k2 = self.k2;
        let sig = self.ambient();
        let fj = self
            .frame
            .jet_at(p[0])
            .expect("chart inside the frame span");
        let main = |f: &crate::curve_frames::FrameSample| {
            let mut v =
                PVec::combination(sig, &[(1.0 + rho, &f.gamma), (t, &f.b), (-k2 * rho, &f.c)]);
            for (zj, zv) in z.iter().zip(&f.z) {
                v.axpy(*zj, zv);
            }
            v
        };
        // ∂_{z_j} of the position, applied to a frame sample
        let dz = |f: &crate::curve_frames::FrameSample, j: usize| {
            PVec::combination(sig, &[(z[j], &f.gamma), (1.0, &f.z[j]), (-k2 * z[j], &f.c)])
        };
        let mut d1 = vec![main(&fj.d1), fj.value.b.clone()];
        d1.extend((0..n - 2).map(|j| dz(&fj.value, j)));
        let mut d2 = vec![PVec::zeros(sig); n * (n + 1) / 2];
        d2[pair_index(n, 0, 0)] = main(&fj.d2);
        d2[pair_index(n, 0, 1)] = fj.d1.b.clone();
        let diag = PVec::combination(sig, &[(1.0, &fj.value.gamma), (-k2, &fj.value.c)]);
        for j in 0..n - 2 {
            d2[pair_index(n, 0, j + 2)] = dz(&fj.d1, j);
            d2[pair_index(n, j + 2, j + 2)] = diag.clone();
        }
        Jet {
            x: main(&fj.value),
            d1,
            d2,
        }
    }

    fn normal_jet(&self, p: &[f64]) -> Option<Jet> {
        let n = self.chart_dim();
        let (t, z) = (p[1], &p[2..]);
        let rho = 0.5 * z.iter().map(|v| v * v).sum::<f64>();
        let k2 = self.k2;
        let sig = self.ambient();
        let fj = self
            .frame
            .jet_at(p[0])
            .expect("chart inside the frame span");
        let main = |f: &crate::curve_frames::FrameSample| {
            let mut v = PVec::combination(
                sig,
                &[(k2 * t, &f.b), (1.0 - rho, &f.c), (k2 * rho, &f.gamma)],
            );
            for (zj, zv) in z.iter().zip(&f.z) {
                v.axpy(k2 * zj, zv);
            }
            v
        };
        let dz = |f: &crate::curve_frames::FrameSample, j: usize| {
            PVec::combination(sig, &[(k2, &f.z[j]), (-z[j], &f.c), (k2 * z[j], &f.gamma)])
        };
        let mut d1 = vec![main(&fj.d1), fj.value.b.scaled(k2)];
        d1.extend((0..n - 2).map(|j| dz(&fj.value, j)));
        let mut d2 = vec![PVec::zeros(sig); n * (n + 1) / 2];
        d2[pair_index(n, 0, 0)] = main(&fj.d2);
        d2[pair_index(n, 0, 1)] = fj.d1.b.scaled(k2);
        let diag = PVec::combination(sig, &[(-1.0, &fj.value.c), (k2, &fj.value.gamma)]);
        for j in 0..n - 2 {
            d2[pair_index(n, 0, j + 2)] = dz(&fj.d1, j);
            d2[pair_index(n, j + 2, j + 2)] = diag.clone();
        }
        Some(Jet {
            x: main(&fj.value),
            d1,
            d2,
        })
    }

    fn provenance(&self) -> String {
        format!(
            "generalized B-scroll, n = {}, k2 = {}",
            self.chart_dim(),
            self.k2
        )
    }
}

/// `xᵘ = cosh u·x + sinh u·N` (anti-de Sitter) or `cos u·x + sin u·N` (de Sitter).
pub struct ParallelImmersion {
    base: Arc<dyn Immersion>,
    u: f64,
    space: SpaceForm,
}

impl std::fmt::Debug for ParallelImmersion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ParallelImmersion")
            .field("base", &self.base.provenance())
            .field("u", &self.u)
            .finish()
    }
}

impl ParallelImmersion {
    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn base(&self) -> &Arc<dyn Immersion> {
        &self.base
    }

    // coefficients (a, b, a', b') of x^u = a x + b N, N^u = a' x + b' N
    fn coefficients(&self) -> (f64, f64, f64, f64) {
        let u = self.u;
        if self.space.eps < 0.0 {
            (u.cosh(), u.sinh(), u.sinh(), u.cosh())
        } else {
            (u.cos(), u.sin(), -u.sin(), u.cos())
        }
    }
}

/// Sample points for the focal test: a 5ⁿ grid over the chart.
fn probe_points(b: &ChartBox) -> Vec<Vec<f64>> {
    let n = b.dim();
    let per = 5usize;
    let total = per.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            (0..n)
                .map(|k| {
                    let i = idx % per;
                    idx /= per;
                    b.lower[k] + (b.upper[k] - b.lower[k]) * (i as f64 + 0.5) / per as f64
                })
                .collect()
        })
        .collect()
}

fn metric_det(j: &Jet) -> f64 {
    let n = j.d1.len();
    let g = nalgebra::DMatrix::from_fn(n, n, |a, b| j.d1[a].ip(&j.d1[b]));
    g.determinant()
}

/// Parallel immersion at distance `u`; fails with focal degeneration when the
/// induced metric collapses relative to the base.
pub fn parallel_immersion(base: Arc<dyn Immersion>, u: f64) -> Result<ParallelImmersion> {
    let space = base.space_form().ok_or_else(|| {
        GeomError::Hypothesis("parallel surfaces need an ambient space form".into())
    })?;
    let dom = base.domain();
    if base.normal_jet(&dom.center()).is_none() {
        return Err(GeomError::Hypothesis(
            "parallel surfaces need a closed-form unit normal".into(),
        ));
    }
    let par = ParallelImmersion { base, u, space };
    for p in probe_points(&dom) {
        if par.base.excluded(&p) {
            continue;
        }
        let d0 = metric_det(&par.base.jet(&p));
        let du = metric_det(&par.jet(&p));
        if (du / d0).abs() < 1e-10 {
            return Err(GeomError::FocalDegeneration(u));
        }
    }
    Ok(par)
}

impl Immersion for ParallelImmersion {
    fn chart_dim(&self) -> usize {
        self.base.chart_dim()
    }

    fn ambient(&self) -> Signature {
        self.base.ambient()
    }

    fn space_form(&self) -> Option<SpaceForm> {
        Some(self.space)
    }

    fn domain(&self) -> ChartBox {
        self.base.domain()
    }

    fn jet(&self, p: &[f64]) -> Jet {
        let (a, b, _, _) = self.coefficients();
        let nj = self.base.normal_jet(p).expect("checked at construction");
        Jet::combine(a, &self.base.jet(p), b, &nj)
    }

    fn normal_jet(&self, p: &[f64]) -> Option<Jet> {
        let (_, _, a, b) = self.coefficients();
        let nj = self.base.normal_jet(p)?;
        Some(Jet::combine(a, &self.base.jet(p), b, &nj))
    }

    fn excluded(&self, p: &[f64]) -> bool {
        self.base.excluded(p)
    }

    fn provenance(&self) -> String {
        format!("parallel at u = {} of {}", self.u, self.base.provenance())
    }
}

/// `√κᵘ = (c cosh u + d sinh u) + i(d cosh u + c sinh u)`.
pub fn parallel_complex_circle_radius(kappa: &ComplexRadius, u: f64) -> ComplexRadius {
    let (c, d) = (kappa.c(), kappa.d());
    let (ch, sh) = (u.cosh(), u.sinh());
    let mut r = ComplexRadius::from_root(Complex64::new(c * ch + d * sh, d * ch + c * sh));
    r.branch = kappa.branch;
    r
}

/// Focal interval `(u₋, u₊)` of the parallel family of a B-scroll with second curvature `k₂`.
pub fn focal_parameters(k2: f64, eps: f64) -> (f64, f64) {
    use std::f64::consts::FRAC_PI_2;
    if eps < 0.0 {
        let lo = if k2 > 1.0 {
            (-1.0 / k2).atanh()
        } else {
            f64::NEG_INFINITY
        };
        let hi = if k2 < -1.0 {
            (-1.0 / k2).atanh()
        } else {
            f64::INFINITY
        };
        (lo, hi)
    } else if k2 > 0.0 {
        ((-1.0 / k2).atan(), FRAC_PI_2)
    } else if k2 < 0.0 {
        (-FRAC_PI_2, (-1.0 / k2).atan())
    } else {
        (-FRAC_PI_2, FRAC_PI_2)
    }
}

/// Closed-form data of the parallel B-scroll in H³₁ at distance `u`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParallelBScrollData {
    pub k2: f64,
    pub u: f64,
    /// `r(u) = cosh u + k₂ sinh u`
    pub r: f64,
    /// `α = (k₂ + r sinh u)/(r cosh u)`, the negated mean curvature
    pub alpha: f64,
    pub admissible: (f64, f64),
    /// `α² = 1`
    pub flat: bool,
}

pub fn parallel_bscroll_data(k2: f64, u: f64) -> Result<ParallelBScrollData> {
    let (lower, upper) = focal_parameters(k2, -1.0);
    if !(u > lower && u < upper) {
        return Err(GeomError::Inadmissible { u, lower, upper });
    }
    let r = u.cosh() + k2 * u.sinh();
    let alpha = (k2 + r * u.sinh()) / (r * u.cosh());
    Ok(ParallelBScrollData {
        k2,
        u,
        r,
        alpha,
        admissible: (lower, upper),
        flat: (alpha * alpha - 1.0).abs() < 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packed_pair_indices() {
        let n = 4;
        let mut seen = vec![];
        for i in 0..n {
            for j in i..n {
                seen.push(pair_index(n, i, j));
                assert_eq!(pair_index(n, i, j), pair_index(n, j, i));
            }
        }
        assert_eq!(seen, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn principal_root_of_minus_one() {
        let r = ComplexRadius::from_im(0.0);
        assert_eq!(r.root, Complex64::new(0.0, 1.0));
        let r = ComplexRadius::new(Complex64::new(-1.0, -0.0), RootBranch::Principal).unwrap();
        assert_eq!(r.root, Complex64::new(0.0, 1.0));
        let r = ComplexRadius::new(Complex64::new(-1.0, 0.0), RootBranch::Negated).unwrap();
        assert_eq!(r.root, Complex64::new(0.0, -1.0));
    }

    #[test]
    fn off_quadric_radius_is_rejected() {
        let err = ComplexRadius::new(Complex64::new(-0.5, 1.0), RootBranch::Principal).unwrap_err();
        assert!(err.to_string().contains("not in H³₁"));
    }

    #[test]
    fn complex_circle_at_origin() {
        let m = complex_circle(ComplexRadius::from_im(0.0));
        let j = m.jet(&[0.0, 0.0]);
        assert_eq!(j.x.coords(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn focal_parameter_cases() {
        let (lo, hi) = focal_parameters(2.0, -1.0);
        assert_eq!(lo, (-0.5f64).atanh());
        assert_eq!(hi, f64::INFINITY);
        assert_eq!(
            focal_parameters(-0.5, -1.0),
            (f64::NEG_INFINITY, f64::INFINITY)
        );
        assert_eq!(
            focal_parameters(1.0, -1.0),
            (f64::NEG_INFINITY, f64::INFINITY)
        );
        let (lo, hi) = focal_parameters(-3.0, -1.0);
        assert_eq!((lo, hi), (f64::NEG_INFINITY, (1.0f64 / 3.0).atanh()));
        let (lo, hi) = focal_parameters(2.0, 1.0);
        assert_eq!((lo, hi), ((-0.5f64).atan(), std::f64::consts::FRAC_PI_2));
    }

    #[test]
    fn parallel_bscroll_reference_values() {
        let d = parallel_bscroll_data(2.0, 0.0).unwrap();
        assert_eq!((d.r, d.alpha, d.flat), (1.0, 2.0, false));
        let d = parallel_bscroll_data(2.0, 0.1).unwrap();
        let r = 0.1f64.cosh() + 2.0 * 0.1f64.sinh();
        assert!((d.r - r).abs() < 1e-15);
        assert!((d.r - 1.205_337_668_1).abs() < 1e-9);
        assert!((d.alpha - 1.750_692_060_8).abs() < 1e-9, "{}", d.alpha);
        for u in [-3.0, -0.4, 0.0, 0.7, 2.5] {
            let d = parallel_bscroll_data(1.0, u).unwrap();
            assert!(d.flat && (d.alpha - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            parallel_bscroll_data(2.0, (-0.5f64).atanh()),
            Err(GeomError::Inadmissible { .. })
        ));
    }
}
