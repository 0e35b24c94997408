//! Homogeneous bivariate polynomials over real or complex coefficients.
//!
//! A polynomial of degree `d` is stored as `d + 1` complex coefficients,
//! with the coefficient of `x^{d-i} y^i` at index `i`. Filters embed into
//! this space through [`embed`]: the filter entry `w[i]` becomes the
//! coefficient of `x^{s(k-1-i)} y^{s i}`, so the image lives on the
//! stride-`s` grid. Real polynomials keep exactly zero imaginary parts;
//! embedding, multiplication and division preserve that exactness.
//!
//! The zero polynomial is a distinct sentinel with an empty coefficient
//! vector (its degree is undefined); factorization routines reject it.

mod hyperroot;
mod roots;

pub use hyperroot::{
    hyperroot_extract, real_hyperroot_profile, s_factorization, HyperrootExtraction,
    RealHyperrootProfile, SFactorization,
};
pub(crate) use hyperroot::hyperroot_values;
pub use roots::{roots, ProjectiveRootSet, RootPoint};

use num_complex::Complex;
use num_traits::{Float, Zero};
use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum PolyError {
    #[error("empty filter")]
    EmptyFilter,
    #[error("stride must be positive")]
    InvalidStride,
    #[error("operation rejects the zero polynomial")]
    ZeroPolynomial,
    #[error("coefficient at index {index} is off the stride-{stride} grid")]
    NotInSGrid { stride: usize, index: usize },
    #[error("imaginary part too large for a real polynomial (relative norm {norm:.3e})")]
    NotReal { norm: f64 },
    #[error("not divisible (relative remainder {remainder:.3e})")]
    NotDivisible { remainder: f64 },
    #[error("root finder failed to converge (best relative residual {residual:.3e})")]
    RootNonConvergence {
        residual: f64,
        /// Best root estimates found before giving up, as [re, im] pairs.
        partial: Vec<[f64; 2]>,
    },
}

/// Homogeneous bivariate polynomial; see the module docs for the layout.
#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousPoly<T> {
    coeffs: Vec<Complex<T>>,
}

impl<T: Scalar> HomogeneousPoly<T> {
    /// The zero polynomial sentinel.
    pub fn zero() -> Self {
        HomogeneousPoly { coeffs: Vec::new() }
    }

    /// The constant polynomial 1 (degree 0).
    pub fn one() -> Self {
        HomogeneousPoly { coeffs: vec![Complex::new(T::one(), T::zero())] }
    }

    pub fn constant(c: Complex<T>) -> Self {
        if c.is_zero() {
            Self::zero()
        } else {
            HomogeneousPoly { coeffs: vec![c] }
        }
    }

    /// Builds from complex coefficients; an all-zero vector collapses to
    /// the zero sentinel.
    pub fn from_complex_coeffs(coeffs: Vec<Complex<T>>) -> Self {
        if coeffs.iter().all(|c| c.is_zero()) {
            Self::zero()
        } else {
            HomogeneousPoly { coeffs }
        }
    }

    pub fn from_real_coeffs(coeffs: &[T]) -> Self {
        Self::from_complex_coeffs(
            coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of the homogeneous polynomial, `None` for zero.
    pub fn degree(&self) -> Option<usize> {
        if self.is_zero() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    /// Real parts of the coefficients.
    pub fn real_coeffs(&self) -> Vec<T> {
        self.coeffs.iter().map(|c| c.re).collect()
    }

    /// Largest absolute imaginary part.
    pub fn max_imag(&self) -> T {
        self.coeffs
            .iter()
            .map(|c| Float::abs(c.im))
            .fold(T::zero(), Float::max)
    }

    /// Largest coefficient modulus.
    pub fn norm_inf(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), Float::max)
    }

    pub fn is_real(&self, rel_tol: T) -> bool {
        self.max_imag() <= rel_tol * Float::max(T::one(), self.norm_inf())
    }

    /// Zeroes out all imaginary parts.
    pub fn symmetrize_real(&mut self) {
        for c in &mut self.coeffs {
            c.im = T::zero();
        }
    }

    pub fn conj(&self) -> Self {
        HomogeneousPoly { coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        Self::from_complex_coeffs(self.coeffs.iter().map(|&c| c * factor).collect())
    }

    /// Evaluates at a projective point, branching on the larger modulus
    /// for stability.
    pub fn eval(&self, x: Complex<T>, y: Complex<T>) -> Complex<T> {
        if self.is_zero() {
            return Complex::zero();
        }
        let d = self.coeffs.len() - 1;
        if x.norm_sqr() >= y.norm_sqr() {
            // x^d * q(y/x) with q ascending in t = y/x
            let t = y / x;
            let mut acc = Complex::<T>::zero();
            for &c in self.coeffs.iter().rev() {
                acc = acc * t + c;
            }
            acc * x.powu(d as u32)
        } else {
            let t = x / y;
            let mut acc = Complex::<T>::zero();
            for &c in self.coeffs.iter() {
                acc = acc * t + c;
            }
            acc * y.powu(d as u32)
        }
    }

    /// Coefficient convolution.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let (a, b) = (&self.coeffs, &other.coeffs);
        let mut out = vec![Complex::<T>::zero(); a.len() + b.len() - 1];
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                out[i + j] = out[i + j] + ai * bj;
            }
        }
        HomogeneousPoly { coeffs: out }
    }

    /// Number of leading zero coefficients: the multiplicity of the root
    /// at infinity `(1:0)`, i.e. the power of `y` dividing the polynomial.
    pub fn infinity_mult(&self, rel_tol: T) -> usize {
        let cut = rel_tol * self.norm_inf();
        self.coeffs.iter().take_while(|c| c.norm() <= cut).count()
    }

    /// Number of trailing zero coefficients: the multiplicity of the root
    /// `(0:1)`, i.e. the power of `x` dividing the polynomial.
    pub fn zero_root_mult(&self, rel_tol: T) -> usize {
        let cut = rel_tol * self.norm_inf();
        self.coeffs.iter().rev().take_while(|c| c.norm() <= cut).count()
    }
}

/// Maps a filter to the stride-`s` grid: entry `w[i]` becomes the
/// coefficient of `x^{s(k-1-i)} y^{s i}` of a degree `s(k-1)` polynomial.
pub fn embed<T: Scalar>(filter: &[T], stride: usize) -> Result<HomogeneousPoly<T>, PolyError> {
    let complex: Vec<Complex<T>> =
        filter.iter().map(|&w| Complex::new(w, T::zero())).collect();
    embed_complex(&complex, stride)
}

/// Complex-coefficient version of [`embed`].
pub fn embed_complex<T: Scalar>(
    filter: &[Complex<T>],
    stride: usize,
) -> Result<HomogeneousPoly<T>, PolyError> {
    if filter.is_empty() {
        return Err(PolyError::EmptyFilter);
    }
    if stride == 0 {
        return Err(PolyError::InvalidStride);
    }
    let mut coeffs = vec![Complex::<T>::zero(); stride * (filter.len() - 1) + 1];
    for (i, &w) in filter.iter().enumerate() {
        coeffs[stride * i] = w;
    }
    Ok(HomogeneousPoly::from_complex_coeffs(coeffs))
}

/// Inverse of [`embed`]: reads the stride-`s` grid coefficients back into
/// a real filter. Fails when an off-grid coefficient or an imaginary part
/// exceeds `tol_grid` relative to the coefficient norm.
pub fn unembed<T: Scalar>(
    p: &HomogeneousPoly<T>,
    stride: usize,
    tol_grid: T,
) -> Result<Vec<T>, PolyError> {
    let complex = unembed_complex(p, stride, tol_grid)?;
    let norm = p.norm_inf();
    let worst = complex.iter().map(|c| Float::abs(c.im)).fold(T::zero(), Float::max);
    if worst > tol_grid * norm {
        return Err(PolyError::NotReal { norm: (worst / norm).to_f64().unwrap_or(f64::NAN) });
    }
    Ok(complex.into_iter().map(|c| c.re).collect())
}

/// Complex-coefficient version of [`unembed`].
pub fn unembed_complex<T: Scalar>(
    p: &HomogeneousPoly<T>,
    stride: usize,
    tol_grid: T,
) -> Result<Vec<Complex<T>>, PolyError> {
    if stride == 0 {
        return Err(PolyError::InvalidStride);
    }
    let deg = p.degree().ok_or(PolyError::ZeroPolynomial)?;
    if deg % stride != 0 {
        return Err(PolyError::NotInSGrid { stride, index: deg });
    }
    let cut = tol_grid * p.norm_inf();
    for (i, c) in p.coeffs().iter().enumerate() {
        if i % stride != 0 && c.norm() > cut {
            return Err(PolyError::NotInSGrid { stride, index: i });
        }
    }
    Ok(p.coeffs().iter().step_by(stride).copied().collect())
}

/// Exact polynomial division: returns the quotient when the relative
/// remainder norm stays below `tol`.
pub fn divide_exact<T: Scalar>(
    p: &HomogeneousPoly<T>,
    q: &HomogeneousPoly<T>,
    tol: T,
) -> Result<HomogeneousPoly<T>, PolyError> {
    if q.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if p.is_zero() {
        return Ok(HomogeneousPoly::zero());
    }
    let p_norm = p.norm_inf();
    let structural = T::epsilon() * T::of(32.0);
    // Powers of y divide through leading zeros; they must match up.
    let p_inf = p.infinity_mult(structural);
    let q_inf = q.infinity_mult(structural);
    let (dp, dq) = (p.degree().unwrap() - p_inf, q.degree().unwrap() - q_inf);
    if q_inf > p_inf || dq > dp {
        return Err(PolyError::NotDivisible { remainder: 1.0 });
    }
    let a = &p.coeffs()[p_inf..];
    let b = &q.coeffs()[q_inf..];
    // Long division on the dehomogenized polynomials (descending powers).
    let mut rem: Vec<Complex<T>> = a.to_vec();
    let mut quot = vec![Complex::<T>::zero(); dp - dq + 1];
    let lead = b[0];
    for i in 0..quot.len() {
        let c = rem[i] / lead;
        quot[i] = c;
        for (j, &bj) in b.iter().enumerate() {
            rem[i + j] = rem[i + j] - c * bj;
        }
    }
    let worst =
        rem[quot.len()..].iter().map(|c| c.norm()).fold(T::zero(), Float::max);
    if worst > tol * p_norm {
        return Err(PolyError::NotDivisible {
            remainder: (worst / p_norm).to_f64().unwrap_or(f64::NAN),
        });
    }
    let mut coeffs = vec![Complex::<T>::zero(); p_inf - q_inf];
    coeffs.extend_from_slice(&quot);
    Ok(HomogeneousPoly::from_complex_coeffs(coeffs))
}

/// Expands a multiset of projective roots into the monic product
/// `scale · Π (x - r y)^m · y^inf`.
pub fn from_roots<T: Scalar>(
    finite: &[(Complex<T>, usize)],
    infinity: usize,
    scale: Complex<T>,
) -> HomogeneousPoly<T> {
    let mut out = HomogeneousPoly::constant(scale);
    if out.is_zero() {
        return out;
    }
    for &(r, mult) in finite {
        let factor = HomogeneousPoly::from_complex_coeffs(vec![
            Complex::new(T::one(), T::zero()),
            -r,
        ]);
        for _ in 0..mult {
            out = out.mul(&factor);
        }
    }
    if infinity > 0 {
        let mut coeffs = vec![Complex::<T>::zero(); infinity];
        coeffs.push(Complex::new(T::one(), T::zero()));
        out = out.mul(&HomogeneousPoly::from_complex_coeffs(coeffs));
    }
    out
}

/// Expands a polynomial in compressed variables `(u, v) = (x^s, y^s)`
/// back to `(x, y)`.
pub fn expand_compressed<T: Scalar>(
    q: &HomogeneousPoly<T>,
    stride: usize,
) -> Result<HomogeneousPoly<T>, PolyError> {
    if q.is_zero() {
        return Ok(HomogeneousPoly::zero());
    }
    embed_complex(q.coeffs(), stride)
}

/// Largest relative coefficient difference between two polynomials of the
/// same degree (∞ when degrees differ).
pub fn rel_coeff_distance<T: Scalar>(a: &HomogeneousPoly<T>, b: &HomogeneousPoly<T>) -> T {
    if a.coeffs().len() != b.coeffs().len() {
        return T::infinity();
    }
    let scale = Float::max(a.norm_inf(), b.norm_inf());
    if scale == T::zero() {
        return T::zero();
    }
    a.coeffs()
        .iter()
        .zip(b.coeffs())
        .map(|(&x, &y)| (x - y).norm())
        .fold(T::zero(), Float::max)
        / scale
}

impl<T: Scalar + Serialize> Serialize for HomogeneousPoly<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&[c.re, c.im])?;
        }
        seq.end()
    }
}

impl<'de, T: Scalar + Deserialize<'de>> Deserialize<'de> for HomogeneousPoly<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V<T>(std::marker::PhantomData<T>);
        impl<'de, T: Scalar + Deserialize<'de>> Visitor<'de> for V<T> {
            type Value = HomogeneousPoly<T>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a sequence of [re, im] coefficient pairs")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                let mut coeffs = Vec::new();
                while let Some([re, im]) = seq.next_element::<[T; 2]>()? {
                    coeffs.push(Complex::new(re, im));
                }
                Ok(HomogeneousPoly::from_complex_coeffs(coeffs))
            }
        }
        deserializer.deserialize_seq(V(std::marker::PhantomData))
    }
}
