//! Pseudo-hyperbolic Gauss map `ν̃ = x ∧ e₁ ∧ ⋯ ∧ eₙ` of a hypersurface in
//! anti-de Sitter space, its derivative and Laplacian identities, and a
//! finite-type classifier driven by grid Laplacians.
//!
//! With `ν̃ = x∧x₁∧⋯∧xₙ/√|det g|` the map is independent of the tangent frame
//! and smooth in the chart, so nested stencils can be applied to it directly.
//! The companion field is `𝒩 = N∧e₁∧⋯∧eₙ`, and `ν_k` denotes `ν̃` with `N`
//! substituted for `e_k`.

use nalgebra::{DMatrix, Matrix2, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::geometry_engine::{
    fundamental_data_oriented, laplace_beltrami, normal_orientation, partial, ChartGrid, GridField,
    GridGeometry,
};
use crate::multivector::{grassmann_inner, wedge};
use crate::pseudo_linear::PVec;
use crate::surface_catalog::{BScroll, Immersion, SpaceForm};

/// Per-node frame data cached by [`gauss_field`].
#[derive(Clone, Debug)]
pub struct GaussNode {
    pub x: PVec,
    /// Coordinate tangents `xᵢ`.
    pub tangents: Vec<PVec>,
    pub normal: PVec,
    pub eps_normal: f64,
    /// `eₐ = Σᵢ Tᵢₐ xᵢ`
    pub t: DMatrix<f64>,
    pub frame_signs: Vec<f64>,
    /// `hₐₖ = ⟨A eₐ, eₖ⟩`
    pub h: DMatrix<f64>,
    pub h_hat: f64,
    pub h_norm_sq: f64,
    /// `⟨⟨ν̃, ν̃⟩⟩`
    pub pairing: f64,
}

impl GaussNode {
    pub fn frame(&self) -> Vec<PVec> {
        let n = self.tangents.len();
        (0..n)
            .map(|a| {
                let terms: Vec<(f64, &PVec)> = (0..n)
                    .map(|i| (self.t[(i, a)], &self.tangents[i]))
                    .collect();
                PVec::combination(self.x.sig(), &terms)
            })
            .collect()
    }

    /// `x ∧ e₁ ∧ ⋯ ∧ N ∧ ⋯ ∧ eₙ` with `N` in slot `k` (0-based).
    pub fn nu_slot(&self, frame: &[PVec], k: usize) -> Vec<f64> {
        let mut vs = vec![self.x.clone()];
        vs.extend(frame.iter().cloned());
        vs[k + 1] = self.normal.clone();
        wedge(&vs).map(|b| b.into_coeffs()).unwrap_or_default()
    }
}

/// The Gauss map and its companion on a chart grid.
#[derive(Clone, Debug)]
pub struct GaussField {
    pub surface: String,
    pub space_form: SpaceForm,
    pub geometry: GridGeometry,
    /// `ν̃` in the blade basis of `Λⁿ⁺¹`.
    pub nu: GridField,
    /// `N ∧ e₁ ∧ ⋯ ∧ eₙ`
    pub normal_wedge: GridField,
    pub h_hat: GridField,
    pub nodes: Vec<Option<GaussNode>>,
}

impl GaussField {
    pub fn grid(&self) -> &ChartGrid {
        &self.geometry.grid
    }

    pub fn dim(&self) -> usize {
        self.grid().dim()
    }

    /// Largest Euclidean norm of `ν̃` over valid nodes.
    pub fn scale(&self) -> f64 {
        self.nu.max_norm()
    }

    pub fn valid_count(&self) -> usize {
        self.nu.valid_count()
    }

    /// Common sign of `⟨⟨ν̃,ν̃⟩⟩`, or `None` if it changes over the grid.
    pub fn pairing_sign(&self) -> Option<f64> {
        let mut signs = self.nodes.iter().flatten().map(|n| n.pairing.signum());
        let first = signs.next()?;
        signs.all(|s| s == first).then_some(first)
    }

    /// `Δν̃`
    pub fn laplacian(&self) -> GridField {
        laplace_beltrami(&self.nu, &self.geometry)
    }

    /// Derivatives of `f` along each frame vector: `eₐf = Σᵢ Tᵢₐ ∂ᵢf`.
    pub fn frame_derivatives(&self, f: &GridField) -> Vec<GridField> {
        let n = self.dim();
        let partials: Vec<GridField> = (0..n).map(|i| partial(f, self.grid(), i)).collect();
        (0..n)
            .map(|a| {
                let nodes = (0..f.nodes())
                    .map(|p| {
                        let node = self.nodes[p].as_ref()?;
                        let mut out = vec![0.0; f.ncomp];
                        for (i, d) in partials.iter().enumerate() {
                            let v = d.get(p)?;
                            let w = node.t[(i, a)];
                            out.iter_mut().zip(v).for_each(|(o, x)| *o += w * x);
                        }
                        Some(out)
                    })
                    .collect();
                GridField::from_nodes(f.ncomp, nodes)
            })
            .collect()
    }
}

fn ads_form(m: &dyn Immersion) -> Result<SpaceForm> {
    match m.space_form() {
        Some(sf) if sf.eps * sf.c < 0.0 => Ok(sf),
        _ => Err(GeomError::Unsupported(
            "the pseudo-hyperbolic Gauss map needs an anti-de Sitter ambient".into(),
        )),
    }
}

/// Builds `ν̃`, `𝒩` and the cached frames at every grid node; nodes on
/// excluded loci or with a degenerate frame are invalid.
pub fn gauss_field(m: &dyn Immersion, grid: ChartGrid) -> Result<GaussField> {
    let space_form = ads_form(m)?;
    if grid.dim() != m.chart_dim() {
        return Err(GeomError::Dimension(format!(
            "grid of dimension {} on a {}-dimensional chart",
            grid.dim(),
            m.chart_dim()
        )));
    }
    let sign = normal_orientation(m);
    let built: Vec<Option<(GaussNode, Vec<f64>, Vec<f64>, (DMatrix<f64>, Vec<f64>))>> = (0..grid
        .len())
        .into_par_iter()
        .map(|i| {
            let p = grid.coords(i);
            if m.excluded(&p) {
                return None;
            }
            let fd = fundamental_data_oriented(m, &p, sign).ok()?;
            let n = fd.dim();
            let mut vs = vec![fd.jet.x.clone()];
            vs.extend(fd.jet.d1.iter().cloned());
            let nu = wedge(&vs).ok()?.scaled(1.0 / fd.sqrt_abs_det);
            vs[0] = fd.normal.clone();
            let nw = wedge(&vs).ok()?.scaled(1.0 / fd.sqrt_abs_det);
            let pairing = grassmann_inner(&nu, &nu).ok()?;
            let a = &fd.a_coord;
            let node = GaussNode {
                h: fd.frame_second_form(),
                h_hat: a.trace() / n as f64,
                h_norm_sq: fd.eps_normal * (a * a).trace(),
                x: fd.jet.x.clone(),
                tangents: fd.jet.d1.clone(),
                normal: fd.normal.clone(),
                eps_normal: fd.eps_normal,
                t: fd.t.clone(),
                frame_signs: fd.frame_signs.clone(),
                pairing,
            };
            Some((
                node,
                nu.into_coeffs(),
                nw.into_coeffs(),
                (fd.g_inv, fd.christoffel_trace),
            ))
        })
        .collect();

    let ncomp = built
        .iter()
        .flatten()
        .map(|b| b.1.len())
        .next()
        .ok_or_else(|| GeomError::Hypothesis("no valid node on the grid".into()))?;
    let mut nodes = Vec::with_capacity(built.len());
    let mut nu = Vec::with_capacity(built.len());
    let mut nw = Vec::with_capacity(built.len());
    let mut hh = Vec::with_capacity(built.len());
    let mut geo = Vec::with_capacity(built.len());
    for b in built {
        match b {
            Some((node, a, c, g)) => {
                hh.push(Some(vec![node.h_hat]));
                nodes.push(Some(node));
                nu.push(Some(a));
                nw.push(Some(c));
                geo.push(Some(g));
            }
            None => {
                nodes.push(None);
                nu.push(None);
                nw.push(None);
                hh.push(None);
                geo.push(None);
            }
        }
    }
    Ok(GaussField {
        surface: m.provenance(),
        space_form,
        geometry: GridGeometry::from_nodes(grid, geo),
        nu: GridField::from_nodes(ncomp, nu),
        normal_wedge: GridField::from_nodes(ncomp, nw),
        h_hat: GridField::from_nodes(1, hh),
        nodes,
    })
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest `‖eₐν̃ − ε_N Σₖ hₐₖ ν_k‖ / scale`, with `eₐν̃` from finite differences.
pub fn derivative_identity_residual(g: &GaussField) -> f64 {
    let scale = g.scale();
    let derivs = g.frame_derivatives(&g.nu);
    let n = g.dim();
    (0..g.nodes.len())
        .into_par_iter()
        .filter_map(|p| {
            let node = g.nodes[p].as_ref()?;
            let frame = node.frame();
            let slots: Vec<Vec<f64>> = (0..n).map(|k| node.nu_slot(&frame, k)).collect();
            let mut worst = 0.0_f64;
            for (a, d) in derivs.iter().enumerate() {
                let lhs = d.get(p)?;
                let mut rhs = vec![0.0; lhs.len()];
                for (k, s) in slots.iter().enumerate() {
                    let w = node.eps_normal * node.h[(a, k)];
                    rhs.iter_mut().zip(s).for_each(|(o, x)| *o += w * x);
                }
                worst = worst.max(dist(lhs, &rhs));
            }
            Some(worst / scale)
        })
        .reduce(|| 0.0, f64::max)
}

/// Residuals of the two Laplacian identities, relative to `max ‖ν̃‖`.
#[derive(Clone, Debug, Serialize)]
pub struct LaplacianIdentity {
    /// `Δν̃ = ‖ĥ‖²ν̃ + ε_N nℋ̂ 𝒩 − ε_N n Σₖ eₖ(ℋ̂) ν_k`
    pub r1: f64,
    /// `Δ𝒩 = −nℋ̂ ν̃ − n 𝒩`
    pub r2: f64,
    /// Size of the gradient term `n Σₖ eₖ(ℋ̂) ν_k`; zero for constant `ℋ̂`.
    pub gradient_term: f64,
}

pub fn laplacian_identity_residual(g: &GaussField) -> LaplacianIdentity {
    let scale = g.scale();
    let n = g.dim();
    let nf = n as f64;
    let lap_nu = g.laplacian();
    let lap_nw = laplace_beltrami(&g.normal_wedge, &g.geometry);
    let grad = g.frame_derivatives(&g.h_hat);
    let per_node: Vec<(f64, f64, f64)> = (0..g.nodes.len())
        .into_par_iter()
        .filter_map(|p| {
            let node = g.nodes[p].as_ref()?;
            let nu = g.nu.get(p)?;
            let nw = g.normal_wedge.get(p)?;
            let mut r2 = 0.0;
            if let Some(l) = lap_nw.get(p) {
                let rhs: Vec<f64> = nu
                    .iter()
                    .zip(nw)
                    .map(|(a, b)| -nf * node.h_hat * a - nf * b)
                    .collect();
                r2 = dist(l, &rhs);
            }
            let (mut r1, mut gt) = (0.0, 0.0);
            if let Some(l) = lap_nu.get(p) {
                let frame = node.frame();
                let mut gradient = vec![0.0; nu.len()];
                for (k, d) in grad.iter().enumerate() {
                    let ek = d.get(p)?[0];
                    let slot = node.nu_slot(&frame, k);
                    gradient
                        .iter_mut()
                        .zip(&slot)
                        .for_each(|(o, x)| *o += nf * ek * x);
                }
                let rhs: Vec<f64> = (0..nu.len())
                    .map(|c| {
                        node.h_norm_sq * nu[c]
                            + node.eps_normal * (nf * node.h_hat * nw[c] - gradient[c])
                    })
                    .collect();
                r1 = dist(l, &rhs);
                gt = norm(&gradient);
            }
            Some((r1, r2, gt))
        })
        .collect();
    let max = |f: fn(&(f64, f64, f64)) -> f64| per_node.iter().map(f).fold(0.0, f64::max) / scale;
    LaplacianIdentity {
        r1: max(|v| v.0),
        r2: max(|v| v.1),
        gradient_term: max(|v| v.2),
    }
}

/// Least-squares fit `Δν̃ ≈ a ν̃ + b 𝒩` over the grid.
#[derive(Clone, Debug, Serialize)]
pub struct LaplacianFit {
    pub a: f64,
    pub b: f64,
    pub residual: f64,
}

pub fn fit_laplacian_coefficients(g: &GaussField) -> Result<LaplacianFit> {
    let lap = g.laplacian();
    let (sol, residual) = fit_two(&lap, &g.nu, &g.normal_wedge, g.scale())?;
    Ok(LaplacianFit {
        a: sol[0],
        b: sol[1],
        residual,
    })
}

/// Solves `target ≈ c₀ u + c₁ v` in least squares over nodes valid in all three
/// fields; returns `(c, max node residual / scale)`.
fn fit_two(
    target: &GridField,
    u: &GridField,
    v: &GridField,
    scale: f64,
) -> Result<([f64; 2], f64)> {
    let (m, r) = normal_equations(target, u, v);
    let sol = m.try_inverse().ok_or(GeomError::Hypothesis(
        "singular least-squares system".into(),
    ))? * r;
    let res = max_residual(target, &[(sol[0], u), (sol[1], v)]) / scale;
    Ok(([sol[0], sol[1]], res))
}

fn normal_equations(
    target: &GridField,
    u: &GridField,
    v: &GridField,
) -> (Matrix2<f64>, Vector2<f64>) {
    let mut m = Matrix2::zeros();
    let mut r = Vector2::zeros();
    for p in 0..target.nodes() {
        let (Some(t), Some(a), Some(b)) = (target.get(p), u.get(p), v.get(p)) else {
            continue;
        };
        for c in 0..t.len() {
            m[(0, 0)] += a[c] * a[c];
            m[(0, 1)] += a[c] * b[c];
            m[(1, 1)] += b[c] * b[c];
            r[0] += a[c] * t[c];
            r[1] += b[c] * t[c];
        }
    }
    m[(1, 0)] = m[(0, 1)];
    (m, r)
}

/// `max_p ‖target − Σ cᵢ fᵢ‖` over nodes valid everywhere.
fn max_residual(target: &GridField, terms: &[(f64, &GridField)]) -> f64 {
    (0..target.nodes())
        .filter_map(|p| {
            let t = target.get(p)?;
            let mut r = t.to_vec();
            for (c, f) in terms {
                let v = f.get(p)?;
                r.iter_mut().zip(v).for_each(|(o, x)| *o -= c * x);
            }
            Some(norm(&r))
        })
        .fold(0.0, f64::max)
}

/// A root of `t² + pt + q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root {
    pub re: f64,
    pub im: f64,
}

/// Roots of `t² + pt + q`, real ones in ascending order.
pub fn quadratic_roots(p: f64, q: f64) -> [Root; 2] {
    let disc = p * p - 4.0 * q;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // avoid cancellation in the smaller-magnitude root
        let big = -0.5 * (p + if p >= 0.0 { s } else { -s });
        let (r1, r2) = if big == 0.0 {
            (0.0, 0.0)
        } else {
            (big, q / big)
        };
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        [Root { re: lo, im: 0.0 }, Root { re: hi, im: 0.0 }]
    } else {
        let im = 0.5 * (-disc).sqrt();
        [
            Root {
                re: -0.5 * p,
                im: -im,
            },
            Root { re: -0.5 * p, im },
        ]
    }
}

/// Fit of `Δ²ν̃ + pΔν̃ + qν̃ = 0`.
#[derive(Clone, Debug, Serialize)]
pub struct AnnihilatorFit {
    pub p: f64,
    pub q: f64,
    /// `max ‖Δ²ν̃ + pΔν̃ + qν̃‖ / scale`
    pub residual: f64,
    pub roots: [Root; 2],
    pub complex_roots: bool,
    /// The two-parameter system was rank deficient and `q = 0` was imposed.
    pub fallback: bool,
}

/// Least-squares annihilator from precomputed `ν̃`, `Δν̃`, `Δ²ν̃`.
pub fn fit_annihilator_fields(
    nu: &GridField,
    lap: &GridField,
    lap2: &GridField,
    scale: f64,
    rank_tol: f64,
) -> AnnihilatorFit {
    let (m, r) = normal_equations(lap2, lap, nu);
    let sin_sq = 1.0 - m[(0, 1)] * m[(0, 1)] / (m[(0, 0)] * m[(1, 1)]);
    let (p, q, fallback) = match m.try_inverse() {
        Some(inv) if sin_sq > rank_tol => {
            let s = -(inv * r);
            (s[0], s[1], false)
        }
        _ => {
            let p = if m[(0, 0)] > 0.0 {
                -r[0] / m[(0, 0)]
            } else {
                0.0
            };
            (p, 0.0, true)
        }
    };
    let residual = max_residual(lap2, &[(-p, lap), (-q, nu)]) / scale;
    let roots = quadratic_roots(p, q);
    AnnihilatorFit {
        p,
        q,
        residual,
        roots,
        complex_roots: roots[1].im != 0.0,
        fallback,
    }
}

/// Fits the quadratic annihilator of `ν̃` with nested grid Laplacians.
pub fn fit_annihilator(g: &GaussField) -> AnnihilatorFit {
    let lap = g.laplacian();
    let lap2 = laplace_beltrami(&lap, &g.geometry);
    fit_annihilator_fields(
        &g.nu,
        &lap,
        &lap2,
        g.scale(),
        Thresholds::default().rank_tol,
    )
}

/// Closed-form splitting of a B-scroll Gauss map into a harmonic and an
/// eigen part.
#[derive(Clone, Debug)]
pub struct BScrollDecomposition {
    /// `(−ν̃ + k₂𝒩)/(k₂²−1)`
    pub nu1: GridField,
    /// `ν̃ − ν̃₁`
    pub nu2: GridField,
    pub lambda2: f64,
    /// `max ‖Δν̃₁‖ / scale`
    pub harmonic_residual: f64,
    /// `max ‖Δν̃₂ − λ₂ν̃₂‖ / scale`
    pub eigen_residual: f64,
    /// Smallest ratio over the grid of the measured `‖e₁(ν̃₁)‖` to
    /// `|k₁|/(t²(k₂²−1)²)·‖ν₁ + ν₂‖`.
    pub witness_ratio: f64,
    /// Largest relative mismatch between the measured `e₁(ν̃₁)` and
    /// `−ε₁k₁/(t²|k₂²−1|(k₂²−1))·(ν₁ + ν₂)`, minimized over the overall sign.
    pub witness_mismatch: f64,
    /// The same mismatch against `ε₁k₁/(t²(k₂²−1)²)·(ν₁ − ν₂)`.
    pub alternate_form_mismatch: f64,
}

/// Tracks `max ‖measured ∓ closed‖ / max ‖closed‖` for both signs.
#[derive(Default)]
struct SignedMismatch {
    plus: f64,
    minus: f64,
    size: f64,
}

impl SignedMismatch {
    fn add(&mut self, measured: &[f64], closed: &[f64]) {
        let (mut p, mut m) = (0.0, 0.0);
        for (a, b) in measured.iter().zip(closed) {
            p += (a - b) * (a - b);
            m += (a + b) * (a + b);
        }
        self.plus = self.plus.max(p.sqrt());
        self.minus = self.minus.max(m.sqrt());
        self.size = self.size.max(norm(closed));
    }

    fn value(&self) -> f64 {
        self.plus.min(self.minus) / self.size.max(f64::MIN_POSITIVE)
    }
}

/// Decomposition `ν̃ = ν̃₁ + ν̃₂` for a B-scroll with `k₂² ≠ 1`. The witness
/// uses the frame `e₁ = x_s/|x_s|`, `e₂ = e₁ ± |x_s|x_t`, and `ν₁ = x∧N∧e₂`,
/// `ν₂ = x∧e₁∧N`.
pub fn bscroll_decomposition(g: &GaussField, scroll: &BScroll) -> Result<BScrollDecomposition> {
    let k2 = scroll.k2();
    let d = k2 * k2 - 1.0;
    if d.abs() < 1e-9 {
        return Err(GeomError::DecompositionUndefined);
    }
    let scale = g.scale();
    let nu1 = g.nu.combine(-1.0 / d, &g.normal_wedge, k2 / d);
    let nu2 = g.nu.combine(1.0, &nu1, -1.0);
    let lambda2 = 2.0 * d;
    let harmonic_residual = laplace_beltrami(&nu1, &g.geometry).max_norm() / scale;
    let eigen_residual = laplace_beltrami(&nu2, &g.geometry)
        .combine(1.0, &nu2, -lambda2)
        .max_norm()
        / scale;

    let ds = partial(&nu1, g.grid(), 0);
    let mut ratio = f64::INFINITY;
    let mut derived = SignedMismatch::default();
    let mut alternate = SignedMismatch::default();
    for p in 0..g.nodes.len() {
        let (Some(node), Some(dv)) = (g.nodes[p].as_ref(), ds.get(p)) else {
            continue;
        };
        let c = g.grid().coords(p);
        let (s, t) = (c[0], c[1]);
        let xs = &node.tangents[0];
        let eps1 = xs.norm_sq().signum();
        let len = xs.norm_sq().abs().sqrt();
        let e1 = xs.scaled(1.0 / len);
        let mut e2 = e1.clone();
        e2.axpy(if d > 0.0 { len } else { -len }, &node.tangents[1]);
        let frame = [e1, e2];
        let (a, b) = (node.nu_slot(&frame, 0), node.nu_slot(&frame, 1));
        let k1 = scroll.k1(s);
        let measured: Vec<f64> = dv.iter().map(|v| v / len).collect();

        let coef = -eps1 * k1 / (t * t * d.abs() * d);
        let closed: Vec<f64> = a.iter().zip(&b).map(|(u, v)| coef * (u + v)).collect();
        if norm(&closed) > 0.0 {
            ratio = ratio.min(norm(&measured) / norm(&closed));
        }
        derived.add(&measured, &closed);

        let coef = eps1 * k1 / (t * t * d * d);
        let printed: Vec<f64> = a.iter().zip(&b).map(|(u, v)| coef * (u - v)).collect();
        alternate.add(&measured, &printed);
    }
    Ok(BScrollDecomposition {
        nu1,
        nu2,
        lambda2,
        harmonic_residual,
        eigen_residual,
        witness_ratio: if ratio.is_finite() { ratio } else { 0.0 },
        witness_mismatch: derived.value(),
        alternate_form_mismatch: alternate.value(),
    })
}

/// Verdict thresholds; every comparison in [`classify_field`] uses one of these.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Thresholds {
    /// Relative residual below which a fit counts as exact.
    pub tau_fit: f64,
    /// `‖Δν̃‖/scale` above which `Δν̃` counts as nonzero in the biharmonic test.
    pub biharmonic_floor: f64,
    /// Relative size below which an annihilator root counts as zero, and
    /// imaginary part below which a root counts as real.
    pub root_tol: f64,
    /// Squared sine of the angle between `Δν̃` and `ν̃` below which the
    /// two-parameter annihilator fit is treated as rank deficient.
    pub rank_tol: f64,
    /// Relative variation of `ν̃₁` above which it counts as non-constant.
    pub nonconstancy: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            tau_fit: 1e-4,
            biharmonic_floor: 0.1,
            root_tol: 1e-3,
            rank_tol: 1e-10,
            nonconstancy: 1e-3,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.tau_fit,
            self.biharmonic_floor,
            self.root_tol,
            self.rank_tol,
            self.nonconstancy,
        ];
        if all.iter().all(|v| v.is_finite() && *v > 0.0) {
            Ok(())
        } else {
            Err(GeomError::Hypothesis(format!(
                "thresholds must be positive: {self:?}"
            )))
        }
    }
}

/// Which numerical witness supports an infinite-type verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// `Δ²ν̃ = 0` while `Δν̃ ≠ 0`.
    Biharmonic,
    /// The quadratic annihilator has non-real roots.
    ComplexRoots,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    OneType {
        lambda: f64,
    },
    NullTwoType {
        lambda1: f64,
        lambda2: f64,
    },
    /// Two distinct nonzero real eigenvalues.
    TwoType {
        lambda1: f64,
        lambda2: f64,
    },
    InfiniteTypeConsistent {
        witness: Witness,
    },
    Inconclusive {
        reason: String,
    },
}

impl Verdict {
    pub fn kind(&self) -> &'static str {
        match self {
            Verdict::OneType { .. } => "one_type",
            Verdict::NullTwoType { .. } => "null_two_type",
            Verdict::TwoType { .. } => "two_type",
            Verdict::InfiniteTypeConsistent { .. } => "infinite_type_consistent",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Lambda1Fit {
    #[serde(rename = "lambda")]
    pub lambda: f64,
    /// `max ‖Δν̃ − λν̃‖ / scale`
    #[serde(rename = "res")]
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Biharmonic {
    /// `max ‖Δ²ν̃‖ / scale`
    pub d2: f64,
    /// `max ‖Δν̃‖ / scale`
    pub d1: f64,
}

/// Splitting `ν̃₂ = Δν̃/λ₂`, `ν̃₁ = ν̃ − ν̃₂` behind a null 2-type verdict.
#[derive(Clone, Debug, Serialize)]
pub struct NullTwoDecomposition {
    pub lambda2: f64,
    /// `max ‖Δν̃₁‖ / scale`
    pub harmonic_residual: f64,
    /// `max ‖Δν̃₂ − λ₂ν̃₂‖ / scale`
    pub eigen_residual: f64,
    /// `maxᵢ ‖∂ᵢν̃₁‖·Lᵢ / scale` with `Lᵢ` the grid extent along axis `i`.
    pub nonconstancy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TypeReport {
    pub surface: String,
    pub grid: ChartGrid,
    pub scale: f64,
    pub lambda1: Lambda1Fit,
    pub annihilator: AnnihilatorFit,
    pub biharmonic: Biharmonic,
    pub null2_decomposition: Option<NullTwoDecomposition>,
    pub verdict: Verdict,
    pub thresholds: Thresholds,
}

/// Budget for the estimated roundoff in `Δ²ν̃` relative to `max ‖ν̃‖`. The
/// estimate runs 3 to 500 times above measured residuals on the catalog.
pub const DELTA2_NOISE_BUDGET: f64 = 1e-4;

/// Estimated roundoff in `Δ²ν̃`, relative to `‖ν̃‖`, on a grid with `counts` nodes
/// per axis over the whole chart: `(Σᵢⱼ |gⁱʲ|·w/(hᵢhⱼ))²·κ·ε` maximized over a
/// `5ⁿ` probe, with `w = 64/12` the absolute weight of the second-derivative
/// stencil and `κ = ‖x‖Πᵢ‖xᵢ‖ / ‖x∧x₁∧⋯∧xₙ‖` the cancellation in the wedge.
pub fn delta2_noise_estimate(m: &dyn Immersion, counts: &[usize]) -> f64 {
    let dom = m.domain();
    let n = dom.dim();
    let h: Vec<f64> = (0..n)
        .map(|i| (dom.upper[i] - dom.lower[i]) / (counts[i].max(2) - 1) as f64)
        .collect();
    let probe = 5usize;
    let sign = normal_orientation(m);
    (0..probe.pow(n as u32))
        .filter_map(|mut idx| {
            let p: Vec<f64> = (0..n)
                .map(|k| {
                    let i = idx % probe;
                    idx /= probe;
                    dom.lower[k] + (dom.upper[k] - dom.lower[k]) * i as f64 / (probe - 1) as f64
                })
                .collect();
            if m.excluded(&p) {
                return None;
            }
            let fd = fundamental_data_oriented(m, &p, sign).ok()?;
            let mut weight = 0.0;
            for i in 0..n {
                for j in 0..n {
                    weight += fd.g_inv[(i, j)].abs() * (64.0 / 12.0) / (h[i] * h[j]);
                }
            }
            let mut vs = vec![fd.jet.x.clone()];
            vs.extend(fd.jet.d1.iter().cloned());
            let product: f64 = vs.iter().map(|v| v.euclid_norm()).product();
            let kappa = product / wedge(&vs).ok()?.euclid_norm();
            Some(weight * weight * kappa * f64::EPSILON)
        })
        .fold(0.0, f64::max)
}

/// Default grid over the whole chart: `161`, `41` or `21` nodes per axis for
/// 2-, 3- and higher-dimensional charts, coarsened (down to 17) until
/// [`delta2_noise_estimate`] fits within [`DELTA2_NOISE_BUDGET`].
pub fn default_grid(m: &dyn Immersion) -> Result<ChartGrid> {
    let n = m.chart_dim();
    let mut per_axis = match n {
        1 | 2 => 161,
        3 => 41,
        _ => 21,
    };
    while per_axis > 17 && delta2_noise_estimate(m, &vec![per_axis; n]) > DELTA2_NOISE_BUDGET {
        per_axis -= 4;
    }
    ChartGrid::over(&m.domain(), vec![per_axis; n], 0.0)
}

pub fn classify_type(m: &dyn Immersion, grid: ChartGrid, th: &Thresholds) -> Result<TypeReport> {
    th.validate()?;
    let g = gauss_field(m, grid)?;
    Ok(classify_field(&g, th))
}

/// Type verdict from a precomputed Gauss field.
pub fn classify_field(g: &GaussField, th: &Thresholds) -> TypeReport {
    let scale = g.scale();
    let lap = g.laplacian();
    let lap2 = laplace_beltrami(&lap, &g.geometry);

    // λ₁ from the projection of Δν̃ onto ν̃
    let (mut num, mut den) = (0.0, 0.0);
    for p in 0..lap.nodes() {
        if let (Some(l), Some(v)) = (lap.get(p), g.nu.get(p)) {
            num += l.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            den += v.iter().map(|b| b * b).sum::<f64>();
        }
    }
    let lambda = if den > 0.0 { num / den } else { 0.0 };
    let lambda1 = Lambda1Fit {
        lambda,
        residual: max_residual(&lap, &[(lambda, &g.nu)]) / scale,
    };

    // compare Δν̃ and Δ²ν̃ on the same nodes
    let biharmonic = Biharmonic {
        d2: lap2.max_norm() / scale,
        d1: lap.max_norm_on(&lap2.valid) / scale,
    };
    let annihilator = fit_annihilator_fields(&g.nu, &lap, &lap2, scale, th.rank_tol);

    let mut null2 = None;
    let verdict = if !(scale > 0.0) || lap2.valid_count() == 0 {
        Verdict::Inconclusive {
            reason: "no node carries a full Δ² stencil".into(),
        }
    } else if lambda1.residual < th.tau_fit {
        Verdict::OneType { lambda }
    } else if biharmonic.d2 < th.tau_fit && biharmonic.d1 > th.biharmonic_floor {
        Verdict::InfiniteTypeConsistent {
            witness: Witness::Biharmonic,
        }
    } else if annihilator.residual >= th.tau_fit {
        Verdict::Inconclusive {
            reason: format!(
                "no one-type fit ({:.3e}) and no quadratic annihilator ({:.3e})",
                lambda1.residual, annihilator.residual
            ),
        }
    } else {
        let [r1, r2] = annihilator.roots;
        let size = 1.0 + r1.re.abs().max(r2.re.abs());
        if r2.im.abs() > th.root_tol * size {
            Verdict::InfiniteTypeConsistent {
                witness: Witness::ComplexRoots,
            }
        } else if (r1.re - r2.re).abs() <= th.root_tol * size {
            Verdict::Inconclusive {
                reason: format!("double annihilator root {:.6}", r1.re),
            }
        } else {
            let (zero, other) = if r1.re.abs() <= r2.re.abs() {
                (r1.re, r2.re)
            } else {
                (r2.re, r1.re)
            };
            if zero.abs() <= th.root_tol * size {
                let d = null_two_split(g, &lap, &lap2, other, scale);
                let ok = d.harmonic_residual < th.tau_fit
                    && d.eigen_residual < th.tau_fit
                    && d.nonconstancy > th.nonconstancy;
                null2 = Some(d);
                if ok {
                    Verdict::NullTwoType {
                        lambda1: 0.0,
                        lambda2: other,
                    }
                } else {
                    Verdict::Inconclusive {
                        reason: "annihilator has a zero root but the harmonic part fails".into(),
                    }
                }
            } else {
                Verdict::TwoType {
                    lambda1: r1.re,
                    lambda2: r2.re,
                }
            }
        }
    };

    TypeReport {
        surface: g.surface.clone(),
        grid: g.grid().clone(),
        scale,
        lambda1,
        annihilator,
        biharmonic,
        null2_decomposition: null2,
        verdict,
        thresholds: *th,
    }
}

fn null_two_split(
    g: &GaussField,
    lap: &GridField,
    lap2: &GridField,
    lambda2: f64,
    scale: f64,
) -> NullTwoDecomposition {
    let nu1 = g.nu.combine(1.0, lap, -1.0 / lambda2);
    // Δν̃₁ = Δν̃ − Δ²ν̃/λ₂ and Δν̃₂ − λ₂ν̃₂ = Δ²ν̃/λ₂ − Δν̃ are negatives of each other
    let harmonic = lap.combine(1.0, lap2, -1.0 / lambda2);
    let grid = g.grid();
    let nonconstancy = (0..grid.dim())
        .map(|i| partial(&nu1, grid, i).max_norm() * (grid.upper[i] - grid.lower[i]))
        .fold(0.0, f64::max)
        / scale;
    NullTwoDecomposition {
        lambda2,
        harmonic_residual: harmonic.max_norm() / scale,
        eigen_residual: harmonic.max_norm() / scale,
        nonconstancy,
    }
}
