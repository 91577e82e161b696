//! Homogeneous elements of the exterior algebra Λᵏ𝔼ᵐₛ.
//!
//! Coefficients are stored densely over the lexicographically ordered
//! index sets `I ⊂ {0..m−1}` with `|I| = k`. The pairing is the bilinear
//! extension of `⟨⟨e_I, e_J⟩⟩ = det(⟨e_{iₗ}, e_{jₖ}⟩)`, which on the axis
//! basis is diagonal with entry `∏_{i∈I} ηᵢ`.

use std::ops::{Add, Mul, Sub};

use crate::error::{GeomError, Result};
use crate::pseudo_linear::{PVec, Signature};

/// Lexicographically ordered `k`-subsets of `{0..m−1}`.
pub fn blades(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > m {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // rightmost slot that can still advance
        let Some(i) = (0..k).rev().find(|&i| idx[i] < m - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut r: usize = 1;
    for i in 0..k {
        r = r * (n - i) / (i + 1);
    }
    r
}

/// Position of the sorted index set `set` in the lexicographic blade order.
pub fn blade_position(m: usize, set: &[usize]) -> usize {
    // combinatorial ranking of lexicographic combinations
    let k = set.len();
    let mut rank = 0;
    let mut prev: usize = 0;
    for (pos, &v) in set.iter().enumerate() {
        let start = if pos == 0 { 0 } else { prev + 1 };
        for skipped in start..v {
            rank += binomial(m - skipped - 1, k - pos - 1);
        }
        prev = v;
    }
    rank
}

/// Determinant of a small row-major `n×n` matrix by partial pivoting (destroys `a`).
pub(crate) fn small_det(a: &mut [f64], n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        let mut best = a[col * n + col].abs();
        for r in col + 1..n {
            let v = a[r * n + col].abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != col {
            for c in 0..n {
                a.swap(col * n + c, piv * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col];
        det *= p;
        for r in col + 1..n {
            let f = a[r * n + col] / p;
            if f != 0.0 {
                for c in col..n {
                    a[r * n + c] -= f * a[col * n + c];
                }
            }
        }
    }
    det
}

/// A grade-`k` multivector.
#[derive(Clone, Debug, PartialEq)]
pub struct Multivector {
    sig: Signature,
    grade: usize,
    coeffs: Vec<f64>,
}

impl Multivector {
    pub fn new(sig: Signature, grade: usize, coeffs: Vec<f64>) -> Result<Self> {
        let want = binomial(sig.dim(), grade);
        if grade > sig.dim() || coeffs.len() != want {
            return Err(GeomError::Dimension(format!(
                "grade {grade} in {sig} needs {want} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Self { sig, grade, coeffs })
    }

    pub fn zero(sig: Signature, grade: usize) -> Self {
        Self {
            sig,
            grade,
            coeffs: vec![0.0; binomial(sig.dim(), grade)],
        }
    }

    /// `e_{i₁} ∧ ⋯ ∧ e_{iₖ}` for arbitrary (possibly unsorted) indices.
    pub fn basis_blade(sig: Signature, indices: &[usize]) -> Result<Self> {
        let m = sig.dim();
        if indices.iter().any(|&i| i >= m) {
            return Err(GeomError::Dimension(format!(
                "axis index out of range for {sig}"
            )));
        }
        let mut out = Self::zero(sig, indices.len());
        let mut sorted = indices.to_vec();
        // parity of the sorting permutation
        let mut parity = 1.0;
        for i in 0..sorted.len() {
            for j in 0..sorted.len() - 1 - i {
                if sorted[j] > sorted[j + 1] {
                    sorted.swap(j, j + 1);
                    parity = -parity;
                } else if sorted[j] == sorted[j + 1] {
                    return Ok(out);
                }
            }
        }
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Ok(out);
        }
        out.coeffs[blade_position(m, &sorted)] = parity;
        Ok(out)
    }

    pub fn from_vector(v: &PVec) -> Self {
        Self {
            sig: v.sig(),
            grade: 1,
            coeffs: v.coords().to_vec(),
        }
    }

    /// The underlying vector of a grade-1 element.
    pub fn as_vector(&self) -> Option<PVec> {
        (self.grade == 1).then(|| PVec::from_raw(self.sig, self.coeffs.clone()))
    }

    pub fn sig(&self) -> Signature {
        self.sig
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of the sorted blade `set`.
    pub fn coeff(&self, set: &[usize]) -> f64 {
        self.coeffs[blade_position(self.sig.dim(), set)]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            sig: self.sig,
            grade: self.grade,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn axpy(&mut self, k: f64, other: &Multivector) {
        assert_eq!(self.sig, other.sig, "signature mismatch");
        assert_eq!(self.grade, other.grade, "grade mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += k * b;
        }
    }

    /// Euclidean length of the coefficient vector.
    pub fn euclid_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

impl Add for &Multivector {
    type Output = Multivector;
    fn add(self, rhs: &Multivector) -> Multivector {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &Multivector {
    type Output = Multivector;
    fn sub(self, rhs: &Multivector) -> Multivector {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &Multivector {
    type Output = Multivector;
    fn mul(self, k: f64) -> Multivector {
        self.scaled(k)
    }
}

/// `v₁ ∧ ⋯ ∧ vₖ`: the coefficient on blade `I` is the minor of the
/// coordinate matrix on rows `I`.
pub fn wedge(vs: &[PVec]) -> Result<Multivector> {
    let sig = match vs.first() {
        Some(v) => v.sig(),
        None => {
            return Err(GeomError::Dimension("wedge of an empty list".into()));
        }
    };
    if let Some(bad) = vs.iter().find(|v| v.sig() != sig) {
        return Err(GeomError::SignatureMismatch(
            sig.to_string(),
            bad.sig().to_string(),
        ));
    }
    let k = vs.len();
    let m = sig.dim();
    if k > m {
        return Err(GeomError::Dimension(format!(
            "wedge of {k} vectors in {sig}"
        )));
    }
    let sets = blades(m, k);
    let mut coeffs = Vec::with_capacity(sets.len());
    let mut buf = vec![0.0; k * k];
    for set in &sets {
        for (r, &row) in set.iter().enumerate() {
            for (c, v) in vs.iter().enumerate() {
                buf[r * k + c] = v.coords()[row];
            }
        }
        coeffs.push(small_det(&mut buf, k));
    }
    Ok(Multivector {
        sig,
        grade: k,
        coeffs,
    })
}

/// Indefinite Grassmann pairing `⟨⟨P, Q⟩⟩`.
pub fn grassmann_inner(p: &Multivector, q: &Multivector) -> Result<f64> {
    if p.grade != q.grade {
        return Err(GeomError::GradeMismatch(p.grade, q.grade));
    }
    if p.sig != q.sig {
        return Err(GeomError::SignatureMismatch(
            p.sig.to_string(),
            q.sig.to_string(),
        ));
    }
    let sets = blades(p.sig.dim(), p.grade);
    let s = p.sig.index();
    let mut acc = 0.0;
    for ((set, a), b) in sets.iter().zip(&p.coeffs).zip(&q.coeffs) {
        // blade sign is (−1)^{#timelike axes in I}
        let neg = set.iter().filter(|&&i| i < s).count() % 2 == 1;
        acc += if neg { -a * b } else { a * b };
    }
    Ok(acc)
}

/// Generator of the orthogonal complement of a decomposable grade-(m−1) blade.
///
/// Returns a unit grade-1 element `n` with `P ∧ n = ⟨n,n⟩·c·e_{0…m−1}`, `c > 0`.
pub fn hodge_complement_line(p: &Multivector) -> Result<Multivector> {
    let v = hodge_complement_vector(p)?;
    Ok(Multivector::from_vector(&v))
}

pub(crate) fn hodge_complement_vector(p: &Multivector) -> Result<PVec> {
    let sig = p.sig;
    let m = sig.dim();
    if p.grade + 1 != m {
        return Err(GeomError::GradeMismatch(p.grade, m - 1));
    }
    // w_j is the coefficient of P on the complement of {j}, signed so that
    // P ∧ v = (w·v) e_full; then η∘w is pseudo-orthogonal to span(P)
    let mut n = vec![0.0; m];
    let sets = blades(m, m - 1);
    for (set, c) in sets.iter().zip(&p.coeffs) {
        let j = (0..m).find(|j| !set.contains(j)).expect("complement index");
        let sgn = if (m - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
        n[j] = sgn * c * sig.sign(j);
    }
    let v = PVec::from_raw(sig, n);
    let e = v.euclid_norm_sq();
    let q = v.norm_sq();
    if e == 0.0 || q.abs() <= crate::pseudo_linear::TAU_NULL * e {
        return Err(GeomError::NullComplement);
    }
    Ok(v.scaled(1.0 / q.abs().sqrt()))
}
