//! Indefinite linear algebra over the pseudo-Euclidean spaces 𝔼ᵐₛ.
//!
//! The `s` timelike axes come first: axis `i` has metric sign −1 for
//! `i < s` and +1 otherwise. When ℂ² is realified into 𝔼⁴₂ the coordinates
//! are ordered `(y₁, y₂, x₁, x₂)`, so imaginary parts sit on the timelike axes.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;

use crate::error::{GeomError, Result};

/// Default tolerance for treating a vector as null, relative to its
/// squared Euclidean length.
pub const TAU_NULL: f64 = 1e-9;

/// Default tolerance for a degenerate Gram determinant, relative to the
/// product of squared Euclidean lengths.
pub const TAU_DEGENERATE: f64 = 1e-12;

/// Dimension and index of a pseudo-Euclidean space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Signature {
    dim: usize,
    index: usize,
}

impl Signature {
    pub fn new(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 || index > dim {
            return Err(GeomError::Dimension(format!(
                "signature needs dim > 0 and index <= dim, got ({dim}, {index})"
            )));
        }
        Ok(Self { dim, index })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Metric sign of axis `i`.
    #[inline]
    pub fn sign(&self, i: usize) -> f64 {
        if i < self.index {
            -1.0
        } else {
            1.0
        }
    }

    pub fn metric_diag(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.sign(i)).collect()
    }

    pub fn metric_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.metric_diag()))
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E^{}_{}", self.dim, self.index)
    }
}

/// A vector of 𝔼ᵐₛ.
#[derive(Clone, Debug, PartialEq)]
pub struct PVec {
    sig: Signature,
    coords: Vec<f64>,
}

impl PVec {
    pub fn new(sig: Signature, coords: Vec<f64>) -> Result<Self> {
        if coords.len() != sig.dim() {
            return Err(GeomError::Dimension(format!(
                "expected {} coordinates, got {}",
                sig.dim(),
                coords.len()
            )));
        }
        Ok(Self { sig, coords })
    }

    pub fn zeros(sig: Signature) -> Self {
        Self {
            sig,
            coords: vec![0.0; sig.dim()],
        }
    }

    /// Standard basis vector `f_i`.
    pub fn basis(sig: Signature, i: usize) -> Self {
        let mut v = Self::zeros(sig);
        v.coords[i] = 1.0;
        v
    }

    pub(crate) fn from_raw(sig: Signature, coords: Vec<f64>) -> Self {
        debug_assert_eq!(coords.len(), sig.dim());
        Self { sig, coords }
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Inner product for vectors already known to share a signature.
    ///
    /// # Panics
    /// On signature mismatch. Use [`inner`] for a fallible version.
    #[inline]
    pub fn ip(&self, other: &PVec) -> f64 {
        assert_eq!(self.sig, other.sig, "signature mismatch in inner product");
        let s = self.sig.index();
        let mut acc = 0.0;
        for (i, (a, b)) in self.coords.iter().zip(&other.coords).enumerate() {
            if i < s {
                acc -= a * b;
            } else {
                acc += a * b;
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.ip(self)
    }

    pub fn euclid_norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum()
    }

    pub fn euclid_norm(&self) -> f64 {
        self.euclid_norm_sq().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coords.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, k: f64) -> PVec {
        PVec {
            sig: self.sig,
            coords: self.coords.iter().map(|c| c * k).collect(),
        }
    }

    /// `self += k * other`
    pub fn axpy(&mut self, k: f64, other: &PVec) {
        assert_eq!(self.sig, other.sig, "signature mismatch in axpy");
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            *a += k * b;
        }
    }

    /// Linear combination `Σ wᵢ vᵢ` of vectors sharing `sig`.
    pub fn combination(sig: Signature, terms: &[(f64, &PVec)]) -> PVec {
        let mut out = PVec::zeros(sig);
        for (w, v) in terms {
            out.axpy(*w, v);
        }
        out
    }
}

impl Add for &PVec {
    type Output = PVec;
    fn add(self, rhs: &PVec) -> PVec {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &PVec {
    type Output = PVec;
    fn sub(self, rhs: &PVec) -> PVec {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Add for PVec {
    type Output = PVec;
    fn add(mut self, rhs: PVec) -> PVec {
        self.axpy(1.0, &rhs);
        self
    }
}

impl Sub for PVec {
    type Output = PVec;
    fn sub(mut self, rhs: PVec) -> PVec {
        self.axpy(-1.0, &rhs);
        self
    }
}

impl AddAssign<&PVec> for PVec {
    fn add_assign(&mut self, rhs: &PVec) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&PVec> for PVec {
    fn sub_assign(&mut self, rhs: &PVec) {
        self.axpy(-1.0, rhs);
    }
}

impl Neg for &PVec {
    type Output = PVec;
    fn neg(self) -> PVec {
        self.scaled(-1.0)
    }
}

impl Neg for PVec {
    type Output = PVec;
    fn neg(self) -> PVec {
        self.scaled(-1.0)
    }
}

impl Mul<f64> for &PVec {
    type Output = PVec;
    fn mul(self, k: f64) -> PVec {
        self.scaled(k)
    }
}

impl Mul<f64> for PVec {
    type Output = PVec;
    fn mul(self, k: f64) -> PVec {
        self.scaled(k)
    }
}

/// Indefinite inner product `−Σ_{i<s} uᵢvᵢ + Σ_{j≥s} uⱼvⱼ`.
pub fn inner(u: &PVec, v: &PVec) -> Result<f64> {
    if u.sig != v.sig {
        return Err(GeomError::SignatureMismatch(
            u.sig.to_string(),
            v.sig.to_string(),
        ));
    }
    Ok(u.ip(v))
}

/// Causal character of a vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CausalCharacter {
    Spacelike,
    Timelike,
    Null,
}

/// Classifies `v`; `|⟨v,v⟩| ≤ τ·‖v‖²` counts as null. The zero vector is spacelike.
pub fn causal_character(v: &PVec, tau_null: f64) -> CausalCharacter {
    let e = v.euclid_norm_sq();
    if e == 0.0 {
        return CausalCharacter::Spacelike;
    }
    let q = v.norm_sq();
    if q.abs() <= tau_null * e {
        CausalCharacter::Null
    } else if q > 0.0 {
        CausalCharacter::Spacelike
    } else {
        CausalCharacter::Timelike
    }
}

/// Gram matrix `⟨vᵢ, vⱼ⟩`.
pub fn gram(vs: &[PVec]) -> DMatrix<f64> {
    let k = vs.len();
    DMatrix::from_fn(k, k, |i, j| vs[i].ip(&vs[j]))
}

fn check_same_sig(vs: &[PVec]) -> Result<Signature> {
    let sig = vs
        .first()
        .map(|v| v.sig)
        .ok_or_else(|| GeomError::Dimension("empty vector list".into()))?;
    for v in vs {
        if v.sig != sig {
            return Err(GeomError::SignatureMismatch(
                sig.to_string(),
                v.sig.to_string(),
            ));
        }
    }
    Ok(sig)
}

fn gram_is_degenerate(vs: &[PVec], tau_degenerate: f64) -> bool {
    let g = gram(vs);
    let scale: f64 = vs.iter().map(|v| v.euclid_norm_sq()).product();
    if scale == 0.0 {
        return true;
    }
    g.determinant().abs() <= tau_degenerate * scale
}

fn project_out(v: &PVec, frame: &[PVec], signs: &[f64]) -> PVec {
    // two passes of classical Gram-Schmidt keep round-off orthogonal
    let mut w = v.clone();
    for _ in 0..2 {
        for (e, s) in frame.iter().zip(signs) {
            let c = s * w.ip(e);
            w.axpy(-c, e);
        }
    }
    w
}

/// Sequential pseudo-orthonormalization with the default tolerances.
///
/// The first output vector is parallel to `vs[0]` and the span of every
/// prefix is preserved. A null pivot or a degenerate Gram matrix yields
/// [`GeomError::DegenerateSubspace`].
pub fn orthonormalize(vs: &[PVec]) -> Result<(Vec<PVec>, Vec<f64>)> {
    orthonormalize_with(vs, TAU_NULL, TAU_DEGENERATE)
}

pub fn orthonormalize_with(
    vs: &[PVec],
    tau_null: f64,
    tau_degenerate: f64,
) -> Result<(Vec<PVec>, Vec<f64>)> {
    check_same_sig(vs)?;
    if gram_is_degenerate(vs, tau_degenerate) {
        return Err(GeomError::DegenerateSubspace);
    }
    let mut frame: Vec<PVec> = Vec::with_capacity(vs.len());
    let mut signs: Vec<f64> = Vec::with_capacity(vs.len());
    for v in vs {
        let w = project_out(v, &frame, &signs);
        let q = w.norm_sq();
        if q.abs() <= tau_null * w.euclid_norm_sq() || w.euclid_norm_sq() == 0.0 {
            return Err(GeomError::DegenerateSubspace);
        }
        frame.push(w.scaled(1.0 / q.abs().sqrt()));
        signs.push(q.signum());
    }
    Ok((frame, signs))
}

/// Pseudo-orthonormalization that survives null pivots.
///
/// When the next candidate is null, it is replaced by `w ± w'` for a later
/// candidate `w'` pairing non-trivially with it (the null-mixing frames
/// `(x_s ± x_t)/√2` of a flat B-scroll arise this way). The span is kept,
/// the first direction is not.
pub fn orthonormalize_null_mixing(vs: &[PVec], tau_null: f64) -> Result<(Vec<PVec>, Vec<f64>)> {
    check_same_sig(vs)?;
    if gram_is_degenerate(vs, TAU_DEGENERATE) {
        return Err(GeomError::DegenerateSubspace);
    }
    let mut pending: Vec<PVec> = vs.to_vec();
    let mut frame: Vec<PVec> = Vec::with_capacity(vs.len());
    let mut signs: Vec<f64> = Vec::with_capacity(vs.len());
    while !pending.is_empty() {
        for w in pending.iter_mut() {
            *w = project_out(w, &frame, &signs);
        }
        let w0 = pending[0].clone();
        let q0 = w0.norm_sq();
        let chosen = if q0.abs() > tau_null * w0.euclid_norm_sq() {
            w0
        } else {
            // pick the partner with the strongest pairing
            let mut best: Option<(usize, f64)> = None;
            for (j, wj) in pending.iter().enumerate().skip(1) {
                let denom = (w0.euclid_norm_sq() * wj.euclid_norm_sq()).sqrt();
                if denom == 0.0 {
                    continue;
                }
                let r = w0.ip(wj).abs() / denom;
                if r > tau_null && best.map_or(true, |(_, b)| r > b) {
                    best = Some((j, r));
                }
            }
            let (j, _) = best.ok_or(GeomError::DegenerateSubspace)?;
            let plus = &w0 + &pending[j];
            let minus = &w0 - &pending[j];
            let rp = plus.norm_sq().abs() / plus.euclid_norm_sq();
            let rm = minus.norm_sq().abs() / minus.euclid_norm_sq();
            if rp >= rm {
                plus
            } else {
                minus
            }
        };
        let q = chosen.norm_sq();
        if q.abs() <= tau_null * chosen.euclid_norm_sq() {
            return Err(GeomError::DegenerateSubspace);
        }
        frame.push(chosen.scaled(1.0 / q.abs().sqrt()));
        signs.push(q.signum());
        pending.remove(0);
    }
    Ok((frame, signs))
}
