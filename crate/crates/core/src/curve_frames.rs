//! Cartan frames along null curves, in flat 𝔼ᵈ₁ and in the space forms
//! Hᵈ₁ ⊂ 𝔼ᵈ⁺¹₂ (ε = −1) and Sᵈ₁ ⊂ 𝔼ᵈ⁺¹₁ (ε = +1).
//!
//! A frame of order `d` is `(A, B, C, Z₁, …, Z_{d−3})` with curvatures
//! `k₁, …, k_{d−1}`:
//!
//! ```text
//! γ̇ = A,  Ȧ = k₁C,  Ḃ = k₂C + k₃Z₁ + εγ,  Ċ = k₂A + k₁B,
//! Ż₁ = k₃A + k₄Z₂,  Żᵢ = −k_{i+2}Z_{i−1} + k_{i+3}Z_{i+1},  Ż_{d−3} = −k_{d−1}Z_{d−4}
//! ```
//!
//! Integration runs on `F̃ = (γ, V, W, C, Z…)` with `V = (A+B)/√2`,
//! `W = (A−B)/√2`, for which `F̃̇ = F̃K̃` and `EK̃` is skew.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::pseudo_linear::{PVec, Signature};

/// Tolerance for the initial-frame constraints.
pub const FRAME_INPUT_TOL: f64 = 1e-8;

/// Drift bound accepted for solved frames at the default step.
pub const DELTA_FRAME: f64 = 1e-8;

/// One curvature function `k(s)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurvatureFn {
    Constant {
        value: f64,
    },
    /// `Σ coeffs[i]·sⁱ`
    Polynomial {
        coeffs: Vec<f64>,
    },
    /// `offset + amp·sin(freq·s + phase)`
    Sinusoid {
        amp: f64,
        freq: f64,
        phase: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Piecewise linear through `(s[i], values[i])`, extended linearly past the ends.
    Table {
        s: Vec<f64>,
        values: Vec<f64>,
    },
}

impl CurvatureFn {
    pub fn constant(value: f64) -> Self {
        CurvatureFn::Constant { value }
    }

    fn segment(s_nodes: &[f64], s: f64) -> usize {
        let n = s_nodes.len();
        match s_nodes.partition_point(|&x| x <= s) {
            0 => 0,
            i if i >= n => n - 2,
            i => i - 1,
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            CurvatureFn::Constant { value } => *value,
            CurvatureFn::Polynomial { coeffs } => {
                coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
            }
            CurvatureFn::Sinusoid {
                amp,
                freq,
                phase,
                offset,
            } => offset + amp * (freq * s + phase).sin(),
            CurvatureFn::Table { s: xs, values } => {
                let i = Self::segment(xs, s);
                let t = (s - xs[i]) / (xs[i + 1] - xs[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            CurvatureFn::Constant { .. } => 0.0,
            CurvatureFn::Polynomial { coeffs } => coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, c)| acc * s + i as f64 * c),
            CurvatureFn::Sinusoid {
                amp, freq, phase, ..
            } => amp * freq * (freq * s + phase).cos(),
            CurvatureFn::Table { s: xs, values } => {
                let i = Self::segment(xs, s);
                (values[i + 1] - values[i]) / (xs[i + 1] - xs[i])
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            CurvatureFn::Constant { .. } => true,
            CurvatureFn::Polynomial { coeffs } => coeffs.iter().skip(1).all(|&c| c == 0.0),
            CurvatureFn::Sinusoid { amp, freq, .. } => *amp == 0.0 || *freq == 0.0,
            CurvatureFn::Table { values, .. } => values.windows(2).all(|w| w[0] == w[1]),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CurvatureFn::Polynomial { coeffs } if coeffs.is_empty() => Err(
                GeomError::InvalidProfile("polynomial needs at least one coefficient".into()),
            ),
            CurvatureFn::Table { s, values } => {
                if s.len() < 2 || s.len() != values.len() {
                    return Err(GeomError::InvalidProfile(
                        "table needs at least two (s, value) pairs of equal length".into(),
                    ));
                }
                if s.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(GeomError::InvalidProfile(
                        "table abscissae must increase strictly".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Curvatures `k₁, …, k_{d−1}` of an order-`d` Cartan frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureProfile {
    pub order: usize,
    pub k: Vec<CurvatureFn>,
}

impl CurvatureProfile {
    pub fn new(order: usize, k: Vec<CurvatureFn>) -> Result<Self> {
        let p = Self { order, k };
        p.validate()?;
        Ok(p)
    }

    /// Profile with constant curvatures; the order is `k.len() + 1`.
    pub fn constant(k: &[f64]) -> Result<Self> {
        Self::new(
            k.len() + 1,
            k.iter().map(|&v| CurvatureFn::constant(v)).collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 3 {
            return Err(GeomError::InvalidProfile(format!(
                "order must be at least 3, got {}",
                self.order
            )));
        }
        if self.k.len() != self.order - 1 {
            return Err(GeomError::InvalidProfile(format!(
                "order {} needs {} curvatures k1..k{}, got {}",
                self.order,
                self.order - 1,
                self.order - 1,
                self.k.len()
            )));
        }
        self.k.iter().try_for_each(CurvatureFn::validate)
    }

    /// `[k₁(s), …, k_{d−1}(s)]`
    pub fn values(&self, s: f64) -> Vec<f64> {
        self.k.iter().map(|f| f.value(s)).collect()
    }

    pub fn derivatives(&self, s: f64) -> Vec<f64> {
        self.k.iter().map(|f| f.derivative(s)).collect()
    }

    /// `kᵢ(s)` with 1-based `i`.
    pub fn k(&self, i: usize, s: f64) -> f64 {
        self.k[i - 1].value(s)
    }
}

/// Where the null curve lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveSpace {
    /// Flat Lorentzian space 𝔼ᵈ₁.
    Flat,
    /// Anti-de Sitter space Hᵈ₁ ⊂ 𝔼ᵈ⁺¹₂, ε = −1.
    AntiDeSitter,
    /// De Sitter space Sᵈ₁ ⊂ 𝔼ᵈ⁺¹₁, ε = +1.
    DeSitter,
}

impl CurveSpace {
    pub fn from_eps(eps: f64) -> Result<Self> {
        if eps == -1.0 {
            Ok(CurveSpace::AntiDeSitter)
        } else if eps == 1.0 {
            Ok(CurveSpace::DeSitter)
        } else {
            Err(GeomError::Hypothesis(format!(
                "epsilon must be ±1, got {eps}"
            )))
        }
    }

    pub fn eps(&self) -> Option<f64> {
        match self {
            CurveSpace::Flat => None,
            CurveSpace::AntiDeSitter => Some(-1.0),
            CurveSpace::DeSitter => Some(1.0),
        }
    }

    fn eps_or_zero(&self) -> f64 {
        self.eps().unwrap_or(0.0)
    }

    /// Ambient signature for frames of order `d`.
    pub fn ambient(&self, order: usize) -> Signature {
        let r = match self {
            CurveSpace::Flat => Signature::new(order, 1),
            CurveSpace::AntiDeSitter => Signature::new(order + 1, 2),
            CurveSpace::DeSitter => Signature::new(order + 1, 1),
        };
        r.expect("valid ambient signature")
    }
}

/// Diagonal of `E`: `diag(−1, 1, …)` on `(V, W, C, Z…)` in flat mode,
/// `diag(ε, −1, 1, …)` on `(γ, V, W, C, Z…)` in a space form.
pub fn constraint_e(space: CurveSpace, order: usize) -> Vec<f64> {
    let mut e = Vec::with_capacity(order + 1);
    if let Some(eps) = space.eps() {
        e.push(eps);
    }
    e.push(-1.0);
    e.extend(std::iter::repeat(1.0).take(order - 1));
    e
}

// Column layout shared by the frame matrices: 0 = γ, then 1,2 = (V,W) or
// (A,B), 3 = C, 3+j = Z_j.
fn zcol(j: usize) -> usize {
    3 + j
}

/// `K̃` on `(γ, V, W, C, Z…)`; `eps = 0` gives the flat system with γ carried along.
fn augmented_k_tilde(k: &[f64], eps: f64) -> DMatrix<f64> {
    let d = k.len() + 1;
    let r = FRAC_1_SQRT_2;
    let kk = |i: usize| k.get(i - 1).copied().unwrap_or(0.0);
    let (k1, k2) = (kk(1), kk(2));
    let mut m = DMatrix::zeros(d + 1, d + 1);
    // entry (i, j): coefficient of column i in the derivative of column j
    m[(1, 0)] = r;
    m[(2, 0)] = r;
    m[(0, 1)] = eps * r;
    m[(3, 1)] = (k1 + k2) * r;
    m[(0, 2)] = -eps * r;
    m[(3, 2)] = (k1 - k2) * r;
    m[(1, 3)] = (k1 + k2) * r;
    m[(2, 3)] = (k2 - k1) * r;
    let nz = d - 3;
    if nz >= 1 {
        let k3 = kk(3);
        m[(zcol(1), 1)] = k3 * r;
        m[(zcol(1), 2)] = -k3 * r;
        m[(1, zcol(1))] = k3 * r;
        m[(2, zcol(1))] = k3 * r;
    }
    for j in 1..nz {
        // Z_j ↔ Z_{j+1} through k_{j+3}
        let kj = kk(j + 3);
        m[(zcol(j + 1), zcol(j))] = kj;
        m[(zcol(j), zcol(j + 1))] = -kj;
    }
    m
}

/// The coefficient matrix `K̃(s)` of `F̃̇ = F̃K̃`.
///
/// Square of size `d` on `(V, W, C, Z…)` in flat mode and `d+1` on
/// `(γ, V, W, C, Z…)` in a space form.
pub fn k_tilde(profile: &CurvatureProfile, space: CurveSpace, s: f64) -> DMatrix<f64> {
    let full = augmented_k_tilde(&profile.values(s), space.eps_or_zero());
    match space {
        CurveSpace::Flat => full
            .view((1, 1), (profile.order, profile.order))
            .into_owned(),
        _ => full,
    }
}

/// Cartan coefficient matrix on `(γ, A, B, C, Z…)`: `d/ds (γ, A, B, C, Z…) = (γ, A, B, C, Z…)·M`.
fn cartan_matrix(k: &[f64], eps: f64) -> DMatrix<f64> {
    let d = k.len() + 1;
    let kk = |i: usize| k.get(i - 1).copied().unwrap_or(0.0);
    let mut m = DMatrix::zeros(d + 1, d + 1);
    m[(1, 0)] = 1.0;
    m[(3, 1)] = kk(1);
    m[(3, 2)] = kk(2);
    m[(0, 2)] = eps;
    m[(1, 3)] = kk(2);
    m[(2, 3)] = kk(1);
    let nz = d - 3;
    if nz >= 1 {
        m[(zcol(1), 2)] = kk(3);
        m[(1, zcol(1))] = kk(3);
    }
    for j in 1..nz {
        let kj = kk(j + 3);
        m[(zcol(j + 1), zcol(j))] = kj;
        m[(zcol(j), zcol(j + 1))] = -kj;
    }
    m
}

/// Change of basis between `(A, B)` and `(V, W)`; it is its own inverse.
fn vw_basis_change(cols: usize) -> DMatrix<f64> {
    let r = FRAC_1_SQRT_2;
    let mut p = DMatrix::identity(cols, cols);
    p[(1, 1)] = r;
    p[(2, 1)] = r;
    p[(1, 2)] = r;
    p[(2, 2)] = -r;
    p
}

/// Frame vectors at one parameter value.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSample {
    /// Curve point; the origin-based integral of `A` in flat mode.
    pub gamma: PVec,
    pub a: PVec,
    pub b: PVec,
    pub c: PVec,
    pub z: Vec<PVec>,
}

impl FrameSample {
    /// The frame built on standard axes.
    ///
    /// Flat: `V = f₀, W = f₁, C = f₂, Zⱼ = f_{2+j}`, `γ = 0`.
    /// Anti-de Sitter: `γ = f₀, V = f₁, W = f₂, C = f₃, Zⱼ = f_{3+j}`.
    /// De Sitter: `γ = f₁, V = f₀`, the rest as in anti-de Sitter.
    pub fn standard(space: CurveSpace, order: usize) -> Self {
        let sig = space.ambient(order);
        let f = |i: usize| PVec::basis(sig, i);
        let (gamma, v, w, first) = match space {
            CurveSpace::Flat => (PVec::zeros(sig), f(0), f(1), 2),
            CurveSpace::AntiDeSitter => (f(0), f(1), f(2), 3),
            CurveSpace::DeSitter => (f(1), f(0), f(2), 3),
        };
        let a = (&v + &w).scaled(FRAC_1_SQRT_2);
        let b = (&v - &w).scaled(FRAC_1_SQRT_2);
        let c = f(first);
        let z = (1..=order - 3).map(|j| f(first + j)).collect();
        Self { gamma, a, b, c, z }
    }

    /// Applies the linear map `l` (ambient coordinates) to every vector and adds `shift` to γ.
    pub fn transformed(&self, l: &DMatrix<f64>, shift: Option<&PVec>) -> Self {
        let map = |v: &PVec| {
            let x = l * nalgebra::DVector::from_column_slice(v.coords());
            PVec::from_raw(v.sig(), x.as_slice().to_vec())
        };
        let mut gamma = map(&self.gamma);
        if let Some(b) = shift {
            gamma += b;
        }
        Self {
            gamma,
            a: map(&self.a),
            b: map(&self.b),
            c: map(&self.c),
            z: self.z.iter().map(map).collect(),
        }
    }

    pub fn sig(&self) -> Signature {
        self.a.sig()
    }

    pub fn order(&self) -> usize {
        3 + self.z.len()
    }

    /// Columns `(γ, A, B, C, Z…)`.
    pub fn columns_ab(&self) -> Vec<PVec> {
        let mut cols = vec![
            self.gamma.clone(),
            self.a.clone(),
            self.b.clone(),
            self.c.clone(),
        ];
        cols.extend(self.z.iter().cloned());
        cols
    }

    fn from_columns_ab(cols: &[PVec]) -> Self {
        Self {
            gamma: cols[0].clone(),
            a: cols[1].clone(),
            b: cols[2].clone(),
            c: cols[3].clone(),
            z: cols[4..].to_vec(),
        }
    }

    fn matrix_ab(&self) -> DMatrix<f64> {
        let cols = self.columns_ab();
        let m = self.sig().dim();
        DMatrix::from_fn(m, cols.len(), |i, j| cols[j].coords()[i])
    }

    fn from_matrix_ab(sig: Signature, x: &DMatrix<f64>) -> Self {
        let cols: Vec<PVec> = (0..x.ncols())
            .map(|j| PVec::from_raw(sig, x.column(j).iter().copied().collect()))
            .collect();
        Self::from_columns_ab(&cols)
    }

    /// `F̃` as a matrix: columns `(V, W, C, Z…)` in flat mode, `(γ, V, W, C, Z…)` otherwise.
    pub fn f_tilde(&self, space: CurveSpace) -> DMatrix<f64> {
        let x = self.matrix_ab() * vw_basis_change(self.order() + 1);
        match space {
            CurveSpace::Flat => x.columns(1, self.order()).into_owned(),
            _ => x,
        }
    }

    /// Max deviation of the frame Gram matrix from `E` (including γ rows in a space form).
    pub fn constraint_defect(&self, space: CurveSpace) -> f64 {
        let f = self.f_tilde(space);
        let eta = self.sig().metric_matrix();
        let g = f.transpose() * eta * &f;
        let e = constraint_e(space, self.order());
        let mut worst = 0.0_f64;
        for i in 0..g.nrows() {
            for j in 0..g.ncols() {
                let want = if i == j { e[i] } else { 0.0 };
                worst = worst.max((g[(i, j)] - want).abs());
            }
        }
        worst
    }

    fn validate(&self, space: CurveSpace, order: usize) -> Result<()> {
        if self.order() != order {
            return Err(GeomError::InvalidFrame(format!(
                "frame has order {}, profile needs {order}",
                self.order()
            )));
        }
        let sig = space.ambient(order);
        if self.columns_ab().iter().any(|v| v.sig() != sig) {
            return Err(GeomError::InvalidFrame(format!(
                "frame vectors must live in {sig}"
            )));
        }
        if let Some(eps) = space.eps() {
            let gg = self.gamma.norm_sq();
            if (gg - eps).abs() > FRAME_INPUT_TOL {
                return Err(GeomError::InvalidFrame(format!(
                    "|<gamma0,gamma0> - eps| = {:e} exceeds {FRAME_INPUT_TOL:e}",
                    (gg - eps).abs()
                )));
            }
        }
        let defect = self.constraint_defect(space);
        if defect > FRAME_INPUT_TOL {
            return Err(GeomError::InvalidFrame(format!(
                "Cartan conditions violated by {defect:e}"
            )));
        }
        Ok(())
    }
}

/// Position, velocity and acceleration of the frame columns `(γ, A, B, C, Z…)`.
#[derive(Clone, Debug)]
pub struct FrameJet {
    pub value: FrameSample,
    pub d1: FrameSample,
    pub d2: FrameSample,
}

/// A sampled Cartan frame along a null curve.
#[derive(Clone, Debug)]
pub struct FrameField {
    span: (f64, f64),
    step: f64,
    space: CurveSpace,
    profile: CurvatureProfile,
    samples: Vec<FrameSample>,
}

impl FrameField {
    /// Assembles a field from precomputed samples at `span.0 + i·step`.
    pub fn from_parts(
        span: (f64, f64),
        step: f64,
        space: CurveSpace,
        profile: CurvatureProfile,
        samples: Vec<FrameSample>,
    ) -> Result<Self> {
        profile.validate()?;
        if samples.is_empty() || step <= 0.0 {
            return Err(GeomError::InvalidFrame("empty frame field".into()));
        }
        Ok(Self {
            span,
            step,
            space,
            profile,
            samples,
        })
    }

    pub fn span(&self) -> (f64, f64) {
        self.span
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn space(&self) -> CurveSpace {
        self.space
    }

    pub fn eps(&self) -> Option<f64> {
        self.space.eps()
    }

    pub fn profile(&self) -> &CurvatureProfile {
        &self.profile
    }

    pub fn order(&self) -> usize {
        self.profile.order
    }

    pub fn ambient(&self) -> Signature {
        self.samples[0].sig()
    }

    pub fn samples(&self) -> &[FrameSample] {
        &self.samples
    }

    /// Mutable access, for fault-injection in tests and custom post-processing.
    pub fn samples_mut(&mut self) -> &mut [FrameSample] {
        &mut self.samples
    }

    pub fn node(&self, i: usize) -> f64 {
        self.span.0 + i as f64 * self.step
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// CSV header: `s`, then each frame vector's components in the order
    /// `γ, A, B, C, Z₁, …`.
    pub fn csv_header(&self) -> Vec<String> {
        let m = self.ambient().dim();
        let mut names = vec!["gamma".to_string(), "A".into(), "B".into(), "C".into()];
        names.extend((1..=self.order() - 3).map(|j| format!("Z{j}")));
        let mut h = vec!["s".to_string()];
        for n in &names {
            h.extend((0..m).map(|i| format!("{n}_{i}")));
        }
        h
    }

    /// One row per node matching [`FrameField::csv_header`].
    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.samples
            .iter()
            .enumerate()
            .map(|(i, smp)| {
                let mut row = vec![self.node(i)];
                for v in smp.columns_ab() {
                    row.extend_from_slice(v.coords());
                }
                row
            })
            .collect()
    }

    /// Whether `s` lies in the span up to half a step.
    pub fn covers(&self, s: f64) -> bool {
        s >= self.span.0 - 0.5 * self.step && s <= self.span.1 + 0.5 * self.step
    }

    /// Frame at an arbitrary `s`: one RK4 step from the nearest node.
    pub fn sample_at(&self, s: f64) -> Result<FrameSample> {
        if !self.covers(s) {
            return Err(GeomError::OutOfSpan(s));
        }
        let i = (((s - self.span.0) / self.step).round().max(0.0) as usize).min(self.len() - 1);
        let s_i = self.node(i);
        let delta = s - s_i;
        if delta == 0.0 {
            return Ok(self.samples[i].clone());
        }
        let p = vw_basis_change(self.order() + 1);
        let x0 = self.samples[i].matrix_ab() * &p;
        let eps = self.space.eps_or_zero();
        let x1 = rk4_step(&x0, s_i, delta, |t| {
            augmented_k_tilde(&self.profile.values(t), eps)
        });
        Ok(FrameSample::from_matrix_ab(self.ambient(), &(x1 * p)))
    }

    /// Frame columns with their first and second `s`-derivatives.
    pub fn jet_at(&self, s: f64) -> Result<FrameJet> {
        let value = self.sample_at(s)?;
        let eps = self.space.eps_or_zero();
        let m = cartan_matrix(&self.profile.values(s), eps);
        let mut dm = cartan_matrix(&self.profile.derivatives(s), 0.0);
        dm[(1, 0)] = 0.0;
        let x = value.matrix_ab();
        let dx = &x * &m;
        let ddx = &x * (&m * &m + dm);
        let sig = self.ambient();
        Ok(FrameJet {
            value,
            d1: FrameSample::from_matrix_ab(sig, &dx),
            d2: FrameSample::from_matrix_ab(sig, &ddx),
        })
    }
}

fn rk4_step(x: &DMatrix<f64>, s: f64, h: f64, k: impl Fn(f64) -> DMatrix<f64>) -> DMatrix<f64> {
    let k_mid = k(s + 0.5 * h);
    let d1 = x * k(s);
    let d2 = (x + &d1 * (0.5 * h)) * &k_mid;
    let d3 = (x + &d2 * (0.5 * h)) * &k_mid;
    let d4 = (x + &d3 * h) * k(s + h);
    x + (d1 + d2 * 2.0 + d3 * 2.0 + d4) * (h / 6.0)
}

fn check_curvatures(profile: &CurvatureProfile, span: (f64, f64), h: f64) -> Result<()> {
    let n = ((span.1 - span.0) / h).ceil() as usize;
    for i in 0..=2 * n {
        let s = (span.0 + 0.5 * h * i as f64).min(span.1);
        for (idx, f) in profile.k.iter().enumerate() {
            if f.value(s).abs() < 1e-12 {
                return Err(GeomError::DegenerateCurvature { index: idx + 1, s });
            }
        }
    }
    Ok(())
}

fn solve(
    profile: &CurvatureProfile,
    space: CurveSpace,
    f0: &FrameSample,
    span: (f64, f64),
    h: Option<f64>,
) -> Result<FrameField> {
    profile.validate()?;
    if !(span.1 > span.0) {
        return Err(GeomError::InvalidFrame(format!("empty span {span:?}")));
    }
    let h = h.unwrap_or(1e-3 * (span.1 - span.0));
    if !(h > 0.0) {
        return Err(GeomError::InvalidFrame(format!(
            "step must be positive, got {h}"
        )));
    }
    f0.validate(space, profile.order)?;
    check_curvatures(profile, span, h)?;

    let steps = ((span.1 - span.0) / h).round().max(1.0) as usize;
    let h = (span.1 - span.0) / steps as f64;
    let eps = space.eps_or_zero();
    let p = vw_basis_change(profile.order + 1);
    let sig = f0.sig();
    let mut x = f0.matrix_ab() * &p;
    let mut samples = Vec::with_capacity(steps + 1);
    samples.push(f0.clone());
    for i in 0..steps {
        let s = span.0 + i as f64 * h;
        x = rk4_step(&x, s, h, |t| augmented_k_tilde(&profile.values(t), eps));
        samples.push(FrameSample::from_matrix_ab(sig, &(&x * &p)));
    }
    FrameField::from_parts(span, h, space, profile.clone(), samples)
}

/// Integrates `F̃̇ = F̃K̃` in flat 𝔼ᵈ₁ by classical RK4 (no projection);
/// `γ = ∫A` starts at `f0.gamma`. The default step is `1e−3·span`.
pub fn solve_flat_frame(
    profile: &CurvatureProfile,
    f0: &FrameSample,
    span: (f64, f64),
    h: Option<f64>,
) -> Result<FrameField> {
    solve(profile, CurveSpace::Flat, f0, span, h)
}

/// Integrates the space-form system with the `±ε/√2` coupling of γ to `V, W`.
pub fn solve_space_frame(
    profile: &CurvatureProfile,
    eps: f64,
    f0: &FrameSample,
    span: (f64, f64),
    h: Option<f64>,
) -> Result<FrameField> {
    solve(profile, CurveSpace::from_eps(eps)?, f0, span, h)
}

/// `max_nodes ‖ᵗF̃ η F̃ − E‖∞`, which includes `|⟨γ,γ⟩ − ε|` in a space form.
pub fn frame_defect(f: &FrameField) -> f64 {
    f.samples
        .iter()
        .map(|s| s.constraint_defect(f.space))
        .fold(0.0, f64::max)
}

/// `max_nodes |⟨γ,γ⟩ − ε|`; zero in flat mode.
pub fn gamma_defect(f: &FrameField) -> f64 {
    match f.space.eps() {
        None => 0.0,
        Some(eps) => f
            .samples
            .iter()
            .map(|s| (s.gamma.norm_sq() - eps).abs())
            .fold(0.0, f64::max),
    }
}

/// Rigid motion relating two solutions of the same system.
#[derive(Clone, Debug)]
pub struct Isometry {
    pub l: DMatrix<f64>,
    pub b: PVec,
    /// `max_s ‖γ₂(s) − Lγ₁(s) − b‖∞`
    pub residual: f64,
    /// `max_s ‖F̃₂(s) − LF̃₁(s)‖∞`
    pub frame_residual: f64,
    /// `‖ᵗL η L − η‖∞`
    pub metric_defect: f64,
}

/// `L = F̃₂(s₀)F̃₁(s₀)⁻¹`, `b = γ₂(s₀) − Lγ₁(s₀)` and the residuals along the span.
pub fn isometry_between(f1: &FrameField, f2: &FrameField) -> Result<Isometry> {
    if f1.profile != f2.profile {
        return Err(GeomError::ProfileMismatch(
            "curvature profiles differ".into(),
        ));
    }
    if f1.space != f2.space || f1.ambient() != f2.ambient() {
        return Err(GeomError::ProfileMismatch("ambient spaces differ".into()));
    }
    if f1.span != f2.span || f1.step != f2.step || f1.len() != f2.len() {
        return Err(GeomError::ProfileMismatch("sampling spans differ".into()));
    }
    let a = f1.samples[0].f_tilde(f1.space);
    let b_mat = f2.samples[0].f_tilde(f2.space);
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::InvalidFrame("singular initial frame".into()))?;
    let l = b_mat * inv;
    let apply = |v: &PVec| {
        let x = &l * nalgebra::DVector::from_column_slice(v.coords());
        PVec::from_raw(v.sig(), x.as_slice().to_vec())
    };
    let b = &f2.samples[0].gamma - &apply(&f1.samples[0].gamma);
    let mut residual = 0.0_f64;
    let mut frame_residual = 0.0_f64;
    for (s1, s2) in f1.samples.iter().zip(&f2.samples) {
        let r = &(&s2.gamma - &apply(&s1.gamma)) - &b;
        residual = residual.max(r.max_abs());
        let diff = s2.f_tilde(f2.space) - &l * s1.f_tilde(f1.space);
        frame_residual = frame_residual.max(diff.amax());
    }
    let eta = f1.ambient().metric_matrix();
    let metric_defect = (l.transpose() * &eta * &l - &eta).amax();
    Ok(Isometry {
        l,
        b,
        residual,
        frame_residual,
        metric_defect,
    })
}

/// A curve sampled at `s₀ + i·h`, optionally with exact velocities.
#[derive(Clone, Debug)]
pub struct SampledCurve {
    pub s0: f64,
    pub h: f64,
    pub points: Vec<PVec>,
    pub velocities: Option<Vec<PVec>>,
}

/// Result of [`frame_from_curve`].
#[derive(Clone, Debug)]
pub struct CurveFrameFit {
    pub field: FrameField,
    pub profile: CurvatureProfile,
    /// Largest order whose constructive residuals stay above the threshold.
    pub order: usize,
    /// Direction choices for `C, Z₁, Z₂, …`: `+1` means the vector was taken
    /// along its defining residual, which makes `k₁, k₃, k₄, …` positive.
    pub signs: Vec<f64>,
}

/// Relative size below which a constructive residual counts as vanished.
pub const RESIDUAL_FLOOR: f64 = 1e-6;

// 4th-order central difference, defined on [lo+2, hi-2)
fn fd_series(vals: &[Option<PVec>], h: f64) -> Vec<Option<PVec>> {
    let n = vals.len();
    let mut out = vec![None; n];
    for i in 2..n.saturating_sub(2) {
        let (Some(m2), Some(m1), Some(p1), Some(p2)) =
            (&vals[i - 2], &vals[i - 1], &vals[i + 1], &vals[i + 2])
        else {
            continue;
        };
        let mut d = m2.scaled(1.0);
        d.axpy(-8.0, m1);
        d.axpy(8.0, p1);
        d.axpy(-1.0, p2);
        out[i] = Some(d.scaled(1.0 / (12.0 * h)));
    }
    out
}

/// Reconstructs the Cartan frame and curvatures of a sampled null curve.
///
/// Derivatives are taken by 4th-order central differences, so each
/// constructive level trims two samples from either end. Signs follow the
/// positivity of `k₁, k₃, k₄, …`; `k₂` is whatever the data dictate.
pub fn frame_from_curve(curve: &SampledCurve, space: CurveSpace) -> Result<CurveFrameFit> {
    let n = curve.points.len();
    if n < 5 || curve.h <= 0.0 {
        return Err(GeomError::InvalidFrame(
            "curve needs at least five samples".into(),
        ));
    }
    let sig = curve.points[0].sig();
    let eps = space.eps();
    let pts: Vec<Option<PVec>> = curve.points.iter().cloned().map(Some).collect();
    // covariant derivative along γ: strip the normal (γ) component in a space form
    let cov = |x: &PVec, g: &PVec| -> PVec {
        match eps {
            Some(e) => {
                let mut y = x.clone();
                y.axpy(-e * x.ip(g), g);
                y
            }
            None => x.clone(),
        }
    };
    let fd = |vals: &[Option<PVec>]| fd_series(vals, curve.h);

    let a: Vec<Option<PVec>> = match &curve.velocities {
        Some(v) => v.iter().cloned().map(Some).collect(),
        None => fd(&pts),
    };
    for v in a.iter().flatten() {
        let q = v.norm_sq();
        if q.abs() > RESIDUAL_FLOOR * v.euclid_norm_sq().max(1e-300) {
            return Err(GeomError::NotNull(q));
        }
    }

    let dim_cap = match space {
        CurveSpace::Flat => sig.dim(),
        _ => sig.dim() - 1,
    };

    // level 1: C and k1
    let da = fd(&a);
    let mut k1 = vec![None; n];
    let mut c = vec![None; n];
    for i in 0..n {
        if let (Some(d), Some(g)) = (&da[i], &pts[i]) {
            let na = cov(d, g);
            let q = na.norm_sq();
            let e = na.euclid_norm_sq();
            if e < 1e-16 || q.abs() <= RESIDUAL_FLOOR * e {
                return Err(GeomError::OrderTooLow);
            }
            let kv = q.abs().sqrt();
            k1[i] = Some(kv);
            c[i] = Some(na.scaled(1.0 / kv));
        }
    }
    if c.iter().all(Option::is_none) {
        return Err(GeomError::InvalidFrame(
            "curve too short for the frame construction".into(),
        ));
    }

    // level 2: B and k2
    let dc = fd(&c);
    let mut k2 = vec![None; n];
    let mut b = vec![None; n];
    for i in 0..n {
        if let (Some(d), Some(g), Some(ai), Some(kv)) = (&dc[i], &pts[i], &a[i], k1[i]) {
            let nc = cov(d, g);
            let q = nc.norm_sq();
            let coef = q / (2.0 * kv * kv);
            let mut bi = ai.scaled(coef);
            bi.axpy(1.0 / kv, &nc);
            k2[i] = Some(-q / (2.0 * kv));
            b[i] = Some(bi);
        }
    }

    let mut ks: Vec<Vec<Option<f64>>> = vec![k1, k2];
    let mut zs: Vec<Vec<Option<PVec>>> = Vec::new();
    // levels 3+: residual of ∇B, then of ∇Z₁, ∇Z₂, ...
    let mut prev = b.clone();
    while 3 + zs.len() < dim_cap {
        let dp = fd(&prev);
        let mut kn = vec![None; n];
        let mut zn = vec![None; n];
        let mut biggest = 0.0_f64;
        let mut k_scale = 0.0_f64;
        for i in 0..n {
            let (Some(d), Some(g), Some(ai), Some(bi), Some(ci)) =
                (&dp[i], &pts[i], &a[i], &b[i], &c[i])
            else {
                continue;
            };
            if zs.iter().any(|z| z[i].is_none()) {
                continue;
            }
            let mut r = cov(d, g);
            // remove components along A, B, C (⟨A,B⟩ = −1) and the previous Z's
            let (ca, cb, cc) = (-r.ip(bi), -r.ip(ai), r.ip(ci));
            r.axpy(-ca, ai);
            r.axpy(-cb, bi);
            r.axpy(-cc, ci);
            for z in &zs {
                let zi = z[i].as_ref().expect("checked above");
                let cz = r.ip(zi);
                r.axpy(-cz, zi);
            }
            let q = r.norm_sq().max(0.0).sqrt();
            biggest = biggest.max(q);
            for kk in &ks {
                if let Some(v) = kk[i] {
                    k_scale = k_scale.max(v.abs());
                }
            }
            kn[i] = Some(q);
            zn[i] = Some(r);
        }
        let any = kn.iter().any(Option::is_some);
        if !any || biggest <= RESIDUAL_FLOOR * (1.0 + k_scale) {
            break;
        }
        for i in 0..n {
            if let (Some(q), Some(r)) = (kn[i], &zn[i]) {
                if q <= RESIDUAL_FLOOR * (1.0 + k_scale) {
                    return Err(GeomError::DegenerateCurvature {
                        index: ks.len() + 1,
                        s: curve.s0 + i as f64 * curve.h,
                    });
                }
                zn[i] = Some(r.scaled(1.0 / q));
            }
        }
        ks.push(kn);
        zs.push(zn.clone());
        prev = zn;
    }

    let order = 3 + zs.len();
    let valid: Vec<usize> = (0..n)
        .filter(|&i| {
            a[i].is_some()
                && b[i].is_some()
                && c[i].is_some()
                && ks.iter().all(|k| k[i].is_some())
                && zs.iter().all(|z| z[i].is_some())
        })
        .collect();
    if valid.len() < 2 {
        return Err(GeomError::InvalidFrame(
            "curve too short for the frame construction".into(),
        ));
    }
    let (lo, hi) = (valid[0], valid[valid.len() - 1]);
    let s_nodes: Vec<f64> = (lo..=hi).map(|i| curve.s0 + i as f64 * curve.h).collect();
    let k_fns: Vec<CurvatureFn> = ks
        .iter()
        .map(|k| CurvatureFn::Table {
            s: s_nodes.clone(),
            values: (lo..=hi).map(|i| k[i].expect("valid node")).collect(),
        })
        .collect();
    let profile = CurvatureProfile::new(order, k_fns)?;
    let samples = (lo..=hi)
        .map(|i| FrameSample {
            gamma: curve.points[i].clone(),
            a: a[i].clone().expect("valid node"),
            b: b[i].clone().expect("valid node"),
            c: c[i].clone().expect("valid node"),
            z: zs
                .iter()
                .map(|z| z[i].clone().expect("valid node"))
                .collect(),
        })
        .collect();
    let field = FrameField::from_parts(
        (s_nodes[0], *s_nodes.last().expect("nonempty")),
        curve.h,
        space,
        profile.clone(),
        samples,
    )?;
    Ok(CurveFrameFit {
        field,
        profile,
        order,
        signs: vec![1.0; order - 2],
    })
}
