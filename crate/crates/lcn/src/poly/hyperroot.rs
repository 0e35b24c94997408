//! Hyperroot extraction and layered factorizations.
//!
//! An `s`-hyperroot is a binomial `a x^s + b y^s`. A finite hyperroot of
//! value `c` (the factor `x^s - c y^s`) divides `p` exactly when all `s`
//! roots of `t^s = c` appear among the roots of `p`; the factors `x^s`
//! and `y^s` correspond to the roots `0` and infinity taken `s` at a
//! time. Extraction therefore groups the roots of `p` by their `s`-th
//! power and keeps the full orbits.

use num_complex::Complex;
use num_traits::{Float, Zero};

use super::roots::{roots, ProjectiveRootSet, RootPoint};
use super::{expand_compressed, from_roots, HomogeneousPoly, PolyError};
use crate::tol::Tolerances;
use crate::Scalar;

/// Relative metric used to match hyperroot values in the `r^s` image
/// space, where powering amplifies root error multiplicatively.
pub(crate) fn image_close<T: Scalar>(a: Complex<T>, b: Complex<T>, tol: T) -> bool {
    (a - b).norm() <= tol * (T::one() + a.norm() + b.norm())
}

/// One hyperroot orbit of a root multiset: the value `c` of the factor
/// `x^s - c y^s` (or the points `0`/infinity for `x^s`/`y^s`) together
/// with its multiplicity.
#[derive(Clone, Debug)]
pub(crate) struct HyperrootOrbit<T> {
    pub value: RootPoint<T>,
    pub mult: usize,
}

/// Groups a root multiset into stride-`s` hyperroot orbits.
///
/// Finite nonzero roots form an orbit when all `s` distinct `s`-th roots
/// of a common value are present; the orbit multiplicity is the minimum
/// multiplicity over its members. Roots at `0` and infinity contribute
/// `floor(mult / s)` orbits of `x^s` and `y^s` respectively.
pub(crate) fn hyperroot_orbits<T: Scalar>(
    set: &ProjectiveRootSet<T>,
    stride: usize,
    tol: &Tolerances<T>,
) -> Vec<HyperrootOrbit<T>> {
    let mut orbits: Vec<HyperrootOrbit<T>> = Vec::new();
    // Finite nonzero roots, grouped by s-th power.
    let mut groups: Vec<(Complex<T>, Vec<usize>)> = Vec::new();
    for (idx, &(z, _)) in set.finite.iter().enumerate() {
        if z.is_zero() {
            continue;
        }
        let image = z.powu(stride as u32);
        match groups.iter_mut().find(|(v, _)| image_close(*v, image, tol.orbit)) {
            Some((_, members)) => members.push(idx),
            None => groups.push((image, vec![idx])),
        }
    }
    for (_, members) in groups {
        if members.len() != stride {
            continue; // incomplete orbit
        }
        let mult = members.iter().map(|&i| set.finite[i].1).min().unwrap();
        if mult > 0 {
            // Realness of the value decides realness of the hyperroot:
            // average with the conjugate-symmetric estimate.
            let mean = members
                .iter()
                .fold(Complex::<T>::zero(), |acc, &i| acc + set.finite[i].0.powu(stride as u32))
                * Complex::new(T::from_usize(members.len()).unwrap().recip(), T::zero());
            let mut v = mean;
            if Float::abs(v.im) <= tol.real * (T::one() + v.norm()) {
                v.im = T::zero();
            }
            orbits.push(HyperrootOrbit { value: RootPoint::Finite(v), mult });
        }
    }
    if let Some(&(_, m0)) = set.finite.iter().find(|(z, _)| z.is_zero()) {
        if m0 / stride > 0 {
            orbits.push(HyperrootOrbit {
                value: RootPoint::Finite(Complex::zero()),
                mult: m0 / stride,
            });
        }
    }
    if set.infinity / stride > 0 {
        orbits.push(HyperrootOrbit { value: RootPoint::Infinity, mult: set.infinity / stride });
    }
    orbits.sort_by(|a, b| {
        a.value.sort_key().partial_cmp(&b.value.sort_key()).unwrap_or(std::cmp::Ordering::Equal)
    });
    orbits
}

/// Hyperroot orbit values of a root multiset at the given stride, as
/// `(value, multiplicity)` pairs.
pub(crate) fn hyperroot_values<T: Scalar>(
    set: &ProjectiveRootSet<T>,
    stride: usize,
    tol: &Tolerances<T>,
) -> Vec<(RootPoint<T>, usize)> {
    hyperroot_orbits(set, stride, tol).into_iter().map(|o| (o.value, o.mult)).collect()
}

/// Builds the compressed-variable polynomial `Π (u - c v)^m · u^{m_0} v^{m_inf}`
/// from a list of orbits (monic).
pub(crate) fn poly_from_orbits<T: Scalar>(orbits: &[HyperrootOrbit<T>]) -> HomogeneousPoly<T> {
    let mut finite = Vec::new();
    let mut infinity = 0usize;
    for orbit in orbits {
        match orbit.value {
            RootPoint::Finite(c) => finite.push((c, orbit.mult)),
            RootPoint::Infinity => infinity += orbit.mult,
        }
    }
    from_roots(&finite, infinity, Complex::new(T::one(), T::zero()))
}

/// Removes the orbit members from a root multiset (one copy of each
/// member per orbit multiplicity).
fn remove_orbit_members<T: Scalar>(
    set: &mut ProjectiveRootSet<T>,
    orbit: &HyperrootOrbit<T>,
    stride: usize,
    tol: &Tolerances<T>,
) {
    match orbit.value {
        RootPoint::Infinity => set.infinity -= stride * orbit.mult,
        RootPoint::Finite(c) if c.is_zero() => {
            for entry in set.finite.iter_mut() {
                if entry.0.is_zero() {
                    entry.1 -= stride * orbit.mult;
                }
            }
        }
        RootPoint::Finite(c) => {
            for entry in set.finite.iter_mut() {
                if !entry.0.is_zero()
                    && image_close(entry.0.powu(stride as u32), c, tol.orbit)
                {
                    entry.1 -= orbit.mult;
                }
            }
        }
    }
    set.finite.retain(|&(_, m)| m > 0);
}

/// Result of splitting off the maximal stride-`s` grid factor.
#[derive(Clone, Debug)]
pub struct HyperrootExtraction<T> {
    /// Maximal grid factor in the compressed variables `(u, v) = (x^s, y^s)`, monic.
    pub grid_factor: HomogeneousPoly<T>,
    /// Remainder in `(x, y)`; carries the overall scale so that
    /// `expand(grid_factor) · remainder ≈ p`. Has no stride-`s` hyperroot.
    pub remainder: HomogeneousPoly<T>,
    /// The extracted orbits (root structure of `grid_factor`).
    pub orbits: ProjectiveRootSet<T>,
    pub stride: usize,
}

impl<T: Scalar> HyperrootExtraction<T> {
    /// Degree of the grid factor in the compressed variables.
    pub fn grid_degree(&self) -> usize {
        self.grid_factor.degree().map_or(0, |d| d)
    }

    /// Reassembles `expand(Q) · R` for verification.
    pub fn reconstruct(&self) -> Result<HomogeneousPoly<T>, PolyError> {
        Ok(expand_compressed(&self.grid_factor, self.stride)?.mul(&self.remainder))
    }
}

/// Factors `p = Q(x^s, y^s) · R(x, y)` with `Q` maximal, via the root
/// orbit structure. The remainder is rebuilt from the leftover roots, so
/// re-extraction of `R` returns a trivial factor by construction.
pub fn hyperroot_extract<T: Scalar>(
    p: &HomogeneousPoly<T>,
    stride: usize,
    tol: &Tolerances<T>,
) -> Result<HyperrootExtraction<T>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if stride == 0 {
        return Err(PolyError::InvalidStride);
    }
    let all = roots(p, tol)?;
    extract_from_roots(p, &all, stride, tol)
}

/// Extraction when the projective roots of `p` are already known.
pub(crate) fn extract_from_roots<T: Scalar>(
    p: &HomogeneousPoly<T>,
    all: &ProjectiveRootSet<T>,
    stride: usize,
    tol: &Tolerances<T>,
) -> Result<HyperrootExtraction<T>, PolyError> {
    let orbits = hyperroot_orbits(all, stride, tol);
    let grid_factor = if orbits.is_empty() { HomogeneousPoly::one() } else { poly_from_orbits(&orbits) };

    let mut leftover = all.clone();
    for orbit in &orbits {
        remove_orbit_members(&mut leftover, orbit, stride, tol);
    }
    // Scale: the first nonzero coefficient of p against the monic product.
    let lead_idx = p.infinity_mult(tol.coeff_zero);
    let scale = p.coeffs()[lead_idx];
    let remainder = from_roots(&leftover.finite, leftover.infinity, scale);

    let mut orbit_set = ProjectiveRootSet { finite: Vec::new(), infinity: 0 };
    for orbit in &orbits {
        match orbit.value {
            RootPoint::Finite(c) => orbit_set.finite.push((c, orbit.mult)),
            RootPoint::Infinity => orbit_set.infinity += orbit.mult,
        }
    }
    orbit_set.sort();
    Ok(HyperrootExtraction { grid_factor, remainder, orbits: orbit_set, stride })
}

/// Layered factorization `p = Q_L(x^{S_L}, y^{S_L}) ··· Q_1(x, y)`, where
/// each `Q_l` collects the maximal stride-`S_l` grid factor remaining
/// after the higher layers were removed.
#[derive(Clone, Debug)]
pub struct SFactorization<T> {
    /// Factors in the compressed variables of their layer, ascending by
    /// layer (`factors[0]` is the innermost, stride-1 factor), monic.
    pub factors: Vec<HomogeneousPoly<T>>,
    /// Degrees of the factors in their compressed variables, ascending.
    pub degrees: Vec<usize>,
    /// Cumulative stride of each factor, ascending.
    pub strides: Vec<usize>,
    /// Global real scale.
    pub scale: T,
}

impl<T: Scalar> SFactorization<T> {
    /// Weighted suffix sum `Σ_{i ≥ l} d_i S_i` for a 1-based layer index.
    pub fn weighted_suffix(&self, l: usize) -> usize {
        (l..=self.degrees.len()).map(|i| self.degrees[i - 1] * self.strides[i - 1]).sum()
    }

    /// Multiplies the expanded factors back together, times the scale.
    pub fn reconstruct(&self) -> Result<HomogeneousPoly<T>, PolyError> {
        let mut acc = HomogeneousPoly::constant(Complex::new(self.scale, T::zero()));
        for (q, &s) in self.factors.iter().zip(&self.strides) {
            acc = acc.mul(&expand_compressed(q, s)?);
        }
        Ok(acc)
    }
}

/// Computes the layered factorization of a nonzero real polynomial along
/// the cumulative strides `cum` (ascending, `cum[0] = 1`, each dividing
/// the next). All factors of a real input are real; imaginary residue is
/// checked against `tol.real` and then zeroed.
pub fn s_factorization<T: Scalar>(
    p: &HomogeneousPoly<T>,
    cum: &[usize],
    tol: &Tolerances<T>,
) -> Result<SFactorization<T>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if !p.is_real(tol.real) {
        return Err(PolyError::NotReal {
            norm: (p.max_imag() / p.norm_inf()).to_f64().unwrap_or(f64::NAN),
        });
    }
    let layers = cum.len();
    let mut remaining = roots(p, tol)?;
    let mut factors = vec![HomogeneousPoly::one(); layers];
    let mut degrees = vec![0usize; layers];
    for l in (1..layers).rev() {
        let stride = cum[l];
        let orbits = hyperroot_orbits(&remaining, stride, tol);
        if orbits.is_empty() {
            continue;
        }
        let mut q = poly_from_orbits(&orbits);
        let imag = q.max_imag();
        if imag > tol.real * Float::max(T::one(), q.norm_inf()) {
            return Err(PolyError::NotReal {
                norm: (imag / q.norm_inf()).to_f64().unwrap_or(f64::NAN),
            });
        }
        q.symmetrize_real();
        degrees[l] = q.degree().unwrap();
        factors[l] = q;
        for orbit in &orbits {
            remove_orbit_members(&mut remaining, orbit, stride, tol);
        }
    }
    // Innermost factor: everything left, monic in (x, y).
    let mut q1 = from_roots(&remaining.finite, remaining.infinity, Complex::new(T::one(), T::zero()));
    let imag = q1.max_imag();
    if imag > tol.real * Float::max(T::one(), q1.norm_inf()) {
        return Err(PolyError::NotReal {
            norm: (imag / q1.norm_inf()).to_f64().unwrap_or(f64::NAN),
        });
    }
    q1.symmetrize_real();
    degrees[0] = q1.degree().unwrap();
    factors[0] = q1;
    let scale = p.coeffs()[p.infinity_mult(tol.coeff_zero)].re;
    Ok(SFactorization { factors, degrees, strides: cum.to_vec(), scale })
}

/// Multiplicity profile of the real and conjugate-pair stride-`s`
/// hyperroots of a real polynomial.
#[derive(Clone, Debug)]
pub struct RealHyperrootProfile<T> {
    /// Real hyperroot values with multiplicities (includes the factors
    /// `x^s` and `y^s` as the points `0` and infinity).
    pub real_values: Vec<(RootPoint<T>, usize)>,
    /// One representative per conjugate pair (positive imaginary part).
    pub pair_values: Vec<(Complex<T>, usize)>,
    /// Multiplicities of the real hyperroots.
    pub rho: Vec<usize>,
    /// Multiplicities of the conjugate-pair hyperroots.
    pub gamma: Vec<usize>,
    /// Degree (in x, y) of the non-hyperroot remainder.
    pub residual_degree: usize,
}

impl<T> RealHyperrootProfile<T> {
    /// Count of real hyperroots with multiplicity.
    pub fn rho_total(&self) -> usize {
        self.rho.iter().sum()
    }

    pub fn gamma_total(&self) -> usize {
        self.gamma.iter().sum()
    }

    pub fn has_real_double(&self) -> bool {
        self.rho.iter().any(|&m| m >= 2)
    }
}

/// Extracts the maximal stride-`s` grid factor of a real polynomial and
/// splits its irreducible real factors into the real hyperroots (linear
/// in the compressed variables) and the conjugate pairs (irreducible
/// quadratics).
pub fn real_hyperroot_profile<T: Scalar>(
    p: &HomogeneousPoly<T>,
    stride: usize,
    tol: &Tolerances<T>,
) -> Result<RealHyperrootProfile<T>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    if !p.is_real(tol.real) {
        return Err(PolyError::NotReal {
            norm: (p.max_imag() / p.norm_inf()).to_f64().unwrap_or(f64::NAN),
        });
    }
    let extraction = hyperroot_extract(p, stride, tol)?;
    let mut real_values = Vec::new();
    let mut pair_values: Vec<(Complex<T>, usize)> = Vec::new();
    if extraction.orbits.infinity > 0 {
        real_values.push((RootPoint::Infinity, extraction.orbits.infinity));
    }
    for &(z, m) in &extraction.orbits.finite {
        if z.im.is_zero() || Float::abs(z.im) <= tol.real * (T::one() + z.norm()) {
            real_values.push((RootPoint::Finite(z), m));
        } else if z.im > T::zero() {
            pair_values.push((z, m));
        }
        // negative-imaginary partners are implied by conjugation closure
    }
    let rho: Vec<usize> = real_values.iter().map(|&(_, m)| m).collect();
    let gamma: Vec<usize> = pair_values.iter().map(|&(_, m)| m).collect();
    let residual_degree = extraction.remainder.degree().map_or(0, |d| d);
    let profile =
        RealHyperrootProfile { real_values, pair_values, rho, gamma, residual_degree };
    debug_assert_eq!(
        stride * (profile.rho_total() + 2 * profile.gamma_total()) + profile.residual_degree,
        p.degree().unwrap()
    );
    Ok(profile)
}
