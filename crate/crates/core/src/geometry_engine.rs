//! First and second fundamental forms, unit normal, shape operator, curvature
//! summaries and the Laplace–Beltrami operator on Lorentzian charts.
//!
//! The Laplacian follows the geometric sign convention
//! `Δ = Σ εᵢ(∇_{eᵢ}eᵢ − eᵢeᵢ)`, i.e. `Δf = −gⁱʲ(∂ᵢ∂ⱼf − Γᵏᵢⱼ∂ₖf)`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::multivector::{hodge_complement_vector, wedge};
use crate::pseudo_linear::{orthonormalize_null_mixing, orthonormalize_with, PVec, TAU_DEGENERATE};
use crate::surface_catalog::{ChartBox, Immersion, Jet};

/// Pivot size (relative) below which the strict Gram–Schmidt frame is
/// abandoned for the null-mixing construction.
pub const NEAR_NULL_PIVOT: f64 = 1e-6;

/// Pointwise first/second order geometry of a hypersurface in a space form.
#[derive(Clone, Debug)]
pub struct FundamentalData {
    pub point: Vec<f64>,
    pub jet: Jet,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub sqrt_abs_det: f64,
    /// Unit normal inside the space form.
    pub normal: PVec,
    /// `⟨N, N⟩`
    pub eps_normal: f64,
    /// `bᵢⱼ = ⟨xᵢⱼ, N⟩`
    pub second_form: DMatrix<f64>,
    /// Shape operator on `(x₁, …, xₙ)`; column `j` holds the image of `xⱼ`.
    pub a_coord: DMatrix<f64>,
    /// Pseudo-orthonormal frame `eₐ = Σⱼ Tⱼₐ xⱼ` with `det T > 0`.
    pub frame: Vec<PVec>,
    pub frame_signs: Vec<f64>,
    pub t: DMatrix<f64>,
    /// Shape operator in the frame: `T⁻¹ A_coord T`.
    pub a_ortho: DMatrix<f64>,
    /// `cᵏ = gⁱʲΓᵏᵢⱼ` with `Γᵏᵢⱼ = gᵏˡ⟨xᵢⱼ, xₗ⟩`.
    pub christoffel_trace: Vec<f64>,
}

impl FundamentalData {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `hₐₖ = ⟨A eₐ, eₖ⟩`
    pub fn frame_second_form(&self) -> DMatrix<f64> {
        let n = self.dim();
        // ⟨A eₐ, eₖ⟩ = (ᵗT g A T)ₖₐ
        let m = self.t.transpose() * &self.g * &self.a_coord * &self.t;
        DMatrix::from_fn(n, n, |a, k| m[(k, a)])
    }
}

/// Orientation sign relating the Hodge-complement normal to the closed-form
/// normal of `m` at a reference point; `+1` when no closed form is known.
pub fn normal_orientation(m: &dyn Immersion) -> f64 {
    let dom = m.domain();
    let mut p = dom.center();
    // step off excluded loci along the last axis
    let n = p.len();
    let mut tries = 0;
    while m.excluded(&p) && tries < 8 {
        p[n - 1] += 0.1 * (dom.upper[n - 1] - dom.lower[n - 1]);
        tries += 1;
    }
    let Some(nj) = m.normal_jet(&p) else {
        return 1.0;
    };
    let j = m.jet(&p);
    let mut vs = vec![j.x.clone()];
    vs.extend(j.d1.iter().cloned());
    match wedge(&vs).and_then(|b| hodge_complement_vector(&b)) {
        Ok(h) if h.ip(&nj.x) < 0.0 => -1.0,
        _ => 1.0,
    }
}

/// Geometry at `p`, orienting the normal with [`normal_orientation`].
pub fn fundamental_data(m: &dyn Immersion, p: &[f64]) -> Result<FundamentalData> {
    fundamental_data_oriented(m, p, normal_orientation(m))
}

/// Geometry at `p` with an explicit normal orientation sign.
pub fn fundamental_data_oriented(
    m: &dyn Immersion,
    p: &[f64],
    orientation: f64,
) -> Result<FundamentalData> {
    let jet = m.jet(p);
    let n = jet.d1.len();
    let g = DMatrix::from_fn(n, n, |i, j| jet.d1[i].ip(&jet.d1[j]));
    let scale: f64 = jet.d1.iter().map(|v| v.euclid_norm_sq()).product();
    let det = g.determinant();
    if det.abs() <= TAU_DEGENERATE * scale.max(1e-300) {
        return Err(GeomError::MetricDegenerate(p.to_vec()));
    }
    let g_inv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::MetricDegenerate(p.to_vec()))?;

    let mut vs = vec![jet.x.clone()];
    vs.extend(jet.d1.iter().cloned());
    let blade = wedge(&vs)?;
    let normal = hodge_complement_vector(&blade)
        .map_err(|_| GeomError::NullNormal(p.to_vec()))?
        .scaled(orientation);
    let eps_normal = normal.norm_sq().signum();

    let second_form = DMatrix::from_fn(n, n, |i, j| jet.d2(i, j).ip(&normal));
    let a_coord = &g_inv * &second_form;

    // Γᵏᵢⱼ contracted with gⁱʲ
    let mut christoffel_trace = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let gij = g_inv[(i, j)];
            if gij == 0.0 {
                continue;
            }
            let xij = jet.d2(i, j);
            for (k, ck) in christoffel_trace.iter_mut().enumerate() {
                let gamma: f64 = (0..n).map(|l| g_inv[(k, l)] * xij.ip(&jet.d1[l])).sum();
                *ck += gij * gamma;
            }
        }
    }

    let (mut frame, frame_signs) = tangent_frame(&jet.d1)?;
    let pairing = DMatrix::from_fn(n, n, |i, a| jet.d1[i].ip(&frame[a]));
    let mut t = &g_inv * pairing;
    if t.determinant() < 0.0 {
        frame[n - 1] = -&frame[n - 1];
        t.column_mut(n - 1).neg_mut();
    }
    let t_inv = t
        .clone()
        .try_inverse()
        .ok_or_else(|| GeomError::MetricDegenerate(p.to_vec()))?;
    let a_ortho = &t_inv * &a_coord * &t;

    Ok(FundamentalData {
        point: p.to_vec(),
        jet,
        sqrt_abs_det: det.abs().sqrt(),
        g,
        g_inv,
        normal,
        eps_normal,
        second_form,
        a_coord,
        frame,
        frame_signs,
        t,
        a_ortho,
        christoffel_trace,
    })
}

/// Pseudo-orthonormal frame of the tangent space: strict Gram–Schmidt when
/// every pivot is comfortably non-null, null-mixing otherwise.
pub fn tangent_frame(tangents: &[PVec]) -> Result<(Vec<PVec>, Vec<f64>)> {
    orthonormalize_with(tangents, NEAR_NULL_PIVOT, TAU_DEGENERATE)
        .or_else(|_| orthonormalize_null_mixing(tangents, NEAR_NULL_PIVOT))
}

/// Curvature scalars at a point.
#[derive(Clone, Debug, Serialize)]
pub struct CurvatureSummary {
    /// `ℋ̂ = tr A / n`
    pub h_hat: f64,
    /// `‖ĥ‖² = ε_N tr A²`
    pub h_norm_sq: f64,
    /// `εcn(n−1) + n²ε_Nℋ̂² − ‖ĥ‖²`
    pub scalar_curvature: f64,
    /// `n²⟨H,H⟩ − ‖h‖²` from the second fundamental form in the flat ambient space.
    pub scalar_curvature_direct: f64,
    /// `‖H − (Ĥ − εc x)‖∞ / (1 + ‖x‖∞)`
    pub mean_curvature_residual: f64,
    pub diagonalizable: bool,
    /// Eigenvalues of the shape operator as `(re, im)`.
    pub eigenvalues: Vec<(f64, f64)>,
    /// `‖(A − ℋ̂I)²‖∞`
    pub nilpotency_witness: f64,
    /// `‖A − ℋ̂I‖∞`
    pub umbilicity_defect: f64,
}

pub fn curvature_summary(m: &dyn Immersion, p: &[f64]) -> Result<CurvatureSummary> {
    let fd = fundamental_data(m, p)?;
    summarize(m, &fd)
}

/// Curvature scalars from precomputed fundamental data.
pub fn summarize(m: &dyn Immersion, fd: &FundamentalData) -> Result<CurvatureSummary> {
    let sf = m.space_form().ok_or_else(|| {
        GeomError::Hypothesis("curvature summaries need an ambient space form".into())
    })?;
    let n = fd.dim();
    let nf = n as f64;
    let a = &fd.a_coord;
    let h_hat = a.trace() / nf;
    let h_norm_sq = fd.eps_normal * (a * a).trace();
    let scalar_curvature =
        sf.eps * sf.c * nf * (nf - 1.0) + nf * nf * fd.eps_normal * h_hat * h_hat - h_norm_sq;

    // flat-ambient second fundamental form hᵢⱼ = xᵢⱼ − Γᵏᵢⱼxₖ
    let jet = &fd.jet;
    let h: Vec<Vec<PVec>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let xij = jet.d2(i, j);
                    let mut v = xij.clone();
                    for k in 0..n {
                        let gamma: f64 =
                            (0..n).map(|l| fd.g_inv[(k, l)] * xij.ip(&jet.d1[l])).sum();
                        v.axpy(-gamma, &jet.d1[k]);
                    }
                    v
                })
                .collect()
        })
        .collect();
    let sig = jet.x.sig();
    let mut mean = PVec::zeros(sig);
    for i in 0..n {
        for j in 0..n {
            mean.axpy(fd.g_inv[(i, j)] / nf, &h[i][j]);
        }
    }
    let mut h_sq = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    h_sq += fd.g_inv[(i, k)] * fd.g_inv[(j, l)] * h[i][j].ip(&h[k][l]);
                }
            }
        }
    }
    let scalar_curvature_direct = nf * nf * mean.norm_sq() - h_sq;
    let mut expected = fd.normal.scaled(fd.eps_normal * h_hat);
    expected.axpy(-sf.eps * sf.c, &jet.x);
    let mean_curvature_residual = (&mean - &expected).max_abs() / (1.0 + jet.x.max_abs());

    let shifted = a - DMatrix::identity(n, n) * h_hat;
    let (diagonalizable, eigenvalues) = diagonalizability(a);
    Ok(CurvatureSummary {
        h_hat,
        h_norm_sq,
        scalar_curvature,
        scalar_curvature_direct,
        mean_curvature_residual,
        diagonalizable,
        eigenvalues,
        nilpotency_witness: (&shifted * &shifted).amax(),
        umbilicity_defect: shifted.amax(),
    })
}

/// Real-diagonalizability of a small matrix: real spectrum and geometric
/// multiplicity equal to algebraic multiplicity for every eigenvalue cluster.
pub fn diagonalizability(a: &DMatrix<f64>) -> (bool, Vec<(f64, f64)>) {
    let n = a.nrows();
    let eig: Vec<(f64, f64)> = a
        .clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| (z.re, z.im))
        .collect();
    let scale = 1.0 + a.amax();
    let tol = 1e-6 * scale;
    if eig.iter().any(|(_, im)| im.abs() > tol) {
        return (false, eig);
    }
    let mut reals: Vec<f64> = eig.iter().map(|(re, _)| *re).collect();
    reals.sort_by(f64::total_cmp);
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for v in reals {
        match clusters.last_mut() {
            Some((c, k)) if (v - *c / *k as f64).abs() <= 1e-4 * scale => {
                *c += v;
                *k += 1;
            }
            _ => clusters.push((v, 1)),
        }
    }
    let ok = clusters.iter().all(|&(sum, k)| {
        let lambda = sum / k as f64;
        let shifted = a - DMatrix::identity(n, n) * lambda;
        let sv = shifted.singular_values();
        let rank = sv.iter().filter(|s| **s > tol).count();
        rank == n - k
    });
    (ok, eig)
}

/// Uniform tensor grid over a chart box.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChartGrid {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

impl ChartGrid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != counts.len() || lower.is_empty() {
            return Err(GeomError::Dimension(
                "grid bounds and counts disagree".into(),
            ));
        }
        if counts.iter().any(|&c| c < 2) || lower.iter().zip(&upper).any(|(a, b)| !(a < b)) {
            return Err(GeomError::Dimension(format!(
                "degenerate grid {lower:?} .. {upper:?} with counts {counts:?}"
            )));
        }
        Ok(Self {
            lower,
            upper,
            counts,
        })
    }

    /// Grid over `domain` shrunk by `margin` on every side.
    pub fn over(domain: &ChartBox, counts: Vec<usize>, margin: f64) -> Result<Self> {
        let lower = domain.lower.iter().map(|v| v + margin).collect();
        let upper = domain.upper.iter().map(|v| v - margin).collect();
        Self::new(lower, upper, counts)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.upper[axis] - self.lower[axis]) / (self.counts[axis] - 1) as f64
    }

    /// Multi-index of a flat node index (axis 0 varies fastest).
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        self.counts
            .iter()
            .map(|&c| {
                let i = idx % c;
                idx /= c;
                i
            })
            .collect()
    }

    pub fn flat_index(&self, mi: &[usize]) -> usize {
        mi.iter()
            .zip(&self.counts)
            .rev()
            .fold(0, |acc, (&i, &c)| acc * c + i)
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi_index(idx)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lower[k] + i as f64 * self.step(k))
            .collect()
    }

    /// Node reached by moving `delta` steps along `axis`, if it exists.
    pub fn shifted(&self, idx: usize, axis: usize, delta: isize) -> Option<usize> {
        let mut mi = self.multi_index(idx);
        let v = mi[axis] as isize + delta;
        if v < 0 || v >= self.counts[axis] as isize {
            return None;
        }
        mi[axis] = v as usize;
        Some(self.flat_index(&mi))
    }

    fn stride(&self, axis: usize) -> usize {
        self.counts[..axis].iter().product()
    }

    fn axis_pos(&self, idx: usize, axis: usize) -> usize {
        (idx / self.stride(axis)) % self.counts[axis]
    }

    fn offset(&self, idx: usize, axis: usize, delta: isize) -> Option<usize> {
        let p = self.axis_pos(idx, axis) as isize + delta;
        if p < 0 || p >= self.counts[axis] as isize {
            None
        } else {
            Some((idx as isize + delta * self.stride(axis) as isize) as usize)
        }
    }
}

/// A field of `ncomp` reals per grid node with a validity mask.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub ncomp: usize,
    pub data: Vec<f64>,
    pub valid: Vec<bool>,
}

impl GridField {
    pub fn new(ncomp: usize, nodes: usize) -> Self {
        Self {
            ncomp,
            data: vec![0.0; ncomp * nodes],
            valid: vec![false; nodes],
        }
    }

    /// Collects per-node optional values (all of length `ncomp`).
    pub fn from_nodes(ncomp: usize, nodes: Vec<Option<Vec<f64>>>) -> Self {
        let mut f = Self::new(ncomp, nodes.len());
        for (i, v) in nodes.into_iter().enumerate() {
            if let Some(v) = v {
                f.data[i * ncomp..(i + 1) * ncomp].copy_from_slice(&v);
                f.valid[i] = true;
            }
        }
        f
    }

    /// Evaluates `f` at every node of `grid` in parallel.
    pub fn sample(
        grid: &ChartGrid,
        ncomp: usize,
        f: impl Fn(&[f64]) -> Option<Vec<f64>> + Sync,
    ) -> Self {
        let nodes = (0..grid.len())
            .into_par_iter()
            .map(|i| f(&grid.coords(i)))
            .collect();
        Self::from_nodes(ncomp, nodes)
    }

    pub fn nodes(&self) -> usize {
        self.valid.len()
    }

    pub fn get(&self, i: usize) -> Option<&[f64]> {
        self.valid[i].then(|| &self.data[i * self.ncomp..(i + 1) * self.ncomp])
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncomp..(i + 1) * self.ncomp]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|v| **v).count()
    }

    /// `a·self + b·other` on nodes valid in both.
    pub fn combine(&self, a: f64, other: &GridField, b: f64) -> GridField {
        let nodes = self.nodes();
        let mut out = GridField::new(self.ncomp, nodes);
        for i in 0..nodes {
            if let (Some(x), Some(y)) = (self.get(i), other.get(i)) {
                out.valid[i] = true;
                for (k, o) in out.data[i * self.ncomp..(i + 1) * self.ncomp]
                    .iter_mut()
                    .enumerate()
                {
                    *o = a * x[k] + b * y[k];
                }
            }
        }
        out
    }

    /// Restricts validity to nodes valid in `mask` as well.
    pub fn masked(&self, mask: &[bool]) -> GridField {
        let mut out = self.clone();
        for (v, m) in out.valid.iter_mut().zip(mask) {
            *v &= *m;
        }
        out
    }

    /// Largest Euclidean node norm over valid nodes.
    pub fn max_norm(&self) -> f64 {
        (0..self.nodes())
            .filter_map(|i| self.get(i))
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    /// Largest Euclidean node norm over nodes valid here and in `mask`.
    pub fn max_norm_on(&self, mask: &[bool]) -> f64 {
        self.masked(mask).max_norm()
    }
}

/// Metric data needed by the grid Laplacian.
#[derive(Clone, Debug)]
pub struct GridGeometry {
    pub grid: ChartGrid,
    pub valid: Vec<bool>,
    g_inv: Vec<f64>,
    ctr: Vec<f64>,
}

impl GridGeometry {
    /// Builds the per-node inverse metric and contracted Christoffel symbols.
    pub fn from_nodes(grid: ChartGrid, nodes: Vec<Option<(DMatrix<f64>, Vec<f64>)>>) -> Self {
        let n = grid.dim();
        let len = grid.len();
        let mut g_inv = vec![0.0; len * n * n];
        let mut ctr = vec![0.0; len * n];
        let mut valid = vec![false; len];
        for (i, node) in nodes.into_iter().enumerate() {
            if let Some((gi, c)) = node {
                valid[i] = true;
                for a in 0..n {
                    for b in 0..n {
                        g_inv[i * n * n + a * n + b] = gi[(a, b)];
                    }
                }
                ctr[i * n..(i + 1) * n].copy_from_slice(&c);
            }
        }
        Self {
            grid,
            valid,
            g_inv,
            ctr,
        }
    }

    /// Geometry of `m` at every grid node not on an excluded locus.
    pub fn from_immersion(m: &dyn Immersion, grid: ChartGrid) -> Self {
        let sign = normal_orientation(m);
        let nodes = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let p = grid.coords(i);
                if m.excluded(&p) {
                    return None;
                }
                fundamental_data_oriented(m, &p, sign)
                    .ok()
                    .map(|fd| (fd.g_inv, fd.christoffel_trace))
            })
            .collect();
        Self::from_nodes(grid, nodes)
    }

    fn g_inv_at(&self, i: usize, a: usize, b: usize) -> f64 {
        let n = self.grid.dim();
        self.g_inv[i * n * n + a * n + b]
    }
}

const D1: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
const D2: [(isize, f64); 5] = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)];

/// 4th-order central first derivative along `axis`; nodes whose stencil
/// leaves the grid or touches an invalid node are marked invalid.
pub fn partial(f: &GridField, grid: &ChartGrid, axis: usize) -> GridField {
    let h = grid.step(axis);
    let nc = f.ncomp;
    let nodes = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            f.get(i)?;
            let mut out = vec![0.0; nc];
            for (d, w) in D1 {
                let j = grid.offset(i, axis, d)?;
                let v = f.get(j)?;
                for (o, x) in out.iter_mut().zip(v) {
                    *o += w * x;
                }
            }
            out.iter_mut().for_each(|o| *o /= 12.0 * h);
            Some(out)
        })
        .collect();
    GridField::from_nodes(nc, nodes)
}

/// Componentwise `Δf = −gⁱʲ∂ᵢ∂ⱼf + cᵏ∂ₖf` with 4th-order central stencils
/// (mixed derivatives as tensor products of first-derivative stencils).
pub fn laplace_beltrami(f: &GridField, geom: &GridGeometry) -> GridField {
    let grid = &geom.grid;
    let n = grid.dim();
    let nc = f.ncomp;
    let nodes = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            if !geom.valid[i] {
                return None;
            }
            f.get(i)?;
            let mut out = vec![0.0; nc];
            for a in 0..n {
                let ha = grid.step(a);
                // pure second derivative and first derivative along a
                let mut d2 = vec![0.0; nc];
                let mut d1 = vec![0.0; nc];
                for (d, w) in D2 {
                    let v = f.get(grid.offset(i, a, d)?)?;
                    for (o, x) in d2.iter_mut().zip(v) {
                        *o += w * x;
                    }
                }
                for (d, w) in D1 {
                    let v = f.get(grid.offset(i, a, d)?)?;
                    for (o, x) in d1.iter_mut().zip(v) {
                        *o += w * x;
                    }
                }
                let gaa = geom.g_inv_at(i, a, a) / (12.0 * ha * ha);
                let ca = geom.ctr[i * n + a] / (12.0 * ha);
                for k in 0..nc {
                    out[k] += -gaa * d2[k] + ca * d1[k];
                }
                for b in a + 1..n {
                    let gab = geom.g_inv_at(i, a, b) + geom.g_inv_at(i, b, a);
                    if gab == 0.0 {
                        continue;
                    }
                    let hb = grid.step(b);
                    let mut mixed = vec![0.0; nc];
                    for (da, wa) in D1 {
                        let ia = grid.offset(i, a, da)?;
                        for (db, wb) in D1 {
                            let v = f.get(grid.offset(ia, b, db)?)?;
                            for (o, x) in mixed.iter_mut().zip(v) {
                                *o += wa * wb * x;
                            }
                        }
                    }
                    let coef = gab / (144.0 * ha * hb);
                    for k in 0..nc {
                        out[k] -= coef * mixed[k];
                    }
                }
            }
            Some(out)
        })
        .collect();
    GridField::from_nodes(nc, nodes)
}
