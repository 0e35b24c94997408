//! Projective root finding for homogeneous bivariate polynomials.
//!
//! Structural roots at `(0:1)` and `(1:0)` come from trailing and leading
//! zero coefficients. The remaining finite roots are found on the chart
//! `y = 1` with a simultaneous Aberth–Ehrlich iteration, then grouped into
//! multiplicity clusters. A cluster of size `m` computed in floating point
//! scatters over a radius on the order of `eps^(1/m)`, far beyond any
//! fixed linkage radius, so base single-linkage clustering is followed by
//! a certified merge pass: candidate merges must pass a derivative
//! smallness test at a representative refined by Newton iteration on the
//! `(m-1)`-th derivative.

use num_complex::Complex;
use num_traits::{Float, Zero};

use super::{HomogeneousPoly, PolyError};
use crate::tol::Tolerances;
use crate::Scalar;

/// A point on the complex projective line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RootPoint<T> {
    /// The point `(r : 1)`, i.e. the linear factor `x - r y`.
    Finite(Complex<T>),
    /// The point `(1 : 0)`, i.e. the linear factor `y`.
    Infinity,
}

impl<T: Scalar> RootPoint<T> {
    pub fn is_real(&self, tol: T) -> bool {
        match self {
            RootPoint::Finite(z) => Float::abs(z.im) <= tol * (T::one() + z.norm()),
            RootPoint::Infinity => true,
        }
    }

    pub fn conj(&self) -> Self {
        match self {
            RootPoint::Finite(z) => RootPoint::Finite(z.conj()),
            RootPoint::Infinity => RootPoint::Infinity,
        }
    }

    /// Deterministic ordering key: finite points by (re, im), infinity last.
    pub fn sort_key(&self) -> (u8, f64, f64) {
        match self {
            RootPoint::Finite(z) => {
                (0, z.re.to_f64().unwrap_or(f64::MAX), z.im.to_f64().unwrap_or(f64::MAX))
            }
            RootPoint::Infinity => (1, 0.0, 0.0),
        }
    }
}

/// Multiset of projective roots with multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectiveRootSet<T> {
    /// Finite roots `(r : 1)` with multiplicities, sorted by (re, im).
    pub finite: Vec<(Complex<T>, usize)>,
    /// Multiplicity of the root at infinity `(1 : 0)`.
    pub infinity: usize,
}

impl<T: Scalar> ProjectiveRootSet<T> {
    pub fn total(&self) -> usize {
        self.infinity + self.finite.iter().map(|&(_, m)| m).sum::<usize>()
    }

    pub fn sort(&mut self) {
        self.finite.sort_by(|a, b| {
            let ka = (a.0.re.to_f64().unwrap_or(0.0), a.0.im.to_f64().unwrap_or(0.0));
            let kb = (b.0.re.to_f64().unwrap_or(0.0), b.0.im.to_f64().unwrap_or(0.0));
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        });
    }

    /// Checks conjugation closure of the finite roots within `tol`.
    pub fn is_conj_closed(&self, tol: T) -> bool {
        self.finite.iter().all(|&(z, m)| {
            if Float::abs(z.im) <= tol * (T::one() + z.norm()) {
                return true;
            }
            self.finite.iter().any(|&(w, mw)| {
                mw == m && (w - z.conj()).norm() <= tol * (T::one() + z.norm())
            })
        })
    }
}

/// All projective roots of a nonzero polynomial, with multiplicities.
pub fn roots<T: Scalar>(
    p: &HomogeneousPoly<T>,
    tol: &Tolerances<T>,
) -> Result<ProjectiveRootSet<T>, PolyError> {
    if p.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let coeffs = p.coeffs();
    let infinity = p.infinity_mult(tol.coeff_zero);
    let zero_mult = p.zero_root_mult(tol.coeff_zero);
    let core = &coeffs[infinity..coeffs.len() - zero_mult];
    let real_input = p.max_imag() <= tol.real * p.norm_inf();

    let mut finite: Vec<(Complex<T>, usize)> = Vec::new();
    if core.len() > 1 {
        let raw = aberth(core, tol)?;
        let mut clusters = cluster_roots(&raw, core, tol);
        if real_input {
            symmetrize_conjugates(&mut clusters, tol);
        }
        finite = clusters;
    }
    if zero_mult > 0 {
        finite.push((Complex::zero(), zero_mult));
    }
    let mut set = ProjectiveRootSet { finite, infinity };
    set.sort();
    debug_assert_eq!(set.total(), p.degree().unwrap());
    Ok(set)
}

/// Evaluates `q` (descending coefficients) and its derivative at `z`.
fn horner_pair<T: Scalar>(q: &[Complex<T>], z: Complex<T>) -> (Complex<T>, Complex<T>) {
    let mut p = q[0];
    let mut dp = Complex::<T>::zero();
    for &c in &q[1..] {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Evaluation-noise bound `Σ |q_j| |z|^{D-j}`.
fn abs_horner<T: Scalar>(q: &[Complex<T>], zabs: T) -> T {
    let mut acc = T::zero();
    for c in q {
        acc = acc * zabs + c.norm();
    }
    acc
}

/// Coefficients (descending) of the `order`-th derivative.
fn derivative_coeffs<T: Scalar>(q: &[Complex<T>], order: usize) -> Vec<Complex<T>> {
    let mut cur = q.to_vec();
    for _ in 0..order {
        let d = cur.len() - 1;
        if d == 0 {
            return vec![Complex::zero()];
        }
        cur = cur[..d]
            .iter()
            .enumerate()
            .map(|(i, &c)| c * Complex::new(T::from_usize(d - i).unwrap(), T::zero()))
            .collect();
    }
    cur
}

fn quadratic_roots<T: Scalar>(q: &[Complex<T>]) -> Vec<Complex<T>> {
    let (a, b, c) = (q[0], q[1], q[2]);
    let disc = b * b - a * c * Complex::new(T::of(4.0), T::zero());
    let mut s = disc.sqrt();
    if (b.conj() * s).re < T::zero() {
        s = -s;
    }
    let sum = -(b + s) / Complex::new(T::of(2.0), T::zero());
    if sum.is_zero() {
        // b = s = 0: roots are ±sqrt(-c/a)
        let r = (-c / a).sqrt();
        return vec![r, -r];
    }
    vec![sum / a, c / sum]
}

/// Simultaneous Aberth–Ehrlich iteration with deterministic restarts.
///
/// A root is accepted when its correction falls below the relative
/// tolerance or its residual reaches the evaluation-noise floor; the
/// latter is what terminates multiple roots, whose corrections stagnate
/// at the `eps^(1/m)` scatter scale.
fn aberth<T: Scalar>(
    q: &[Complex<T>],
    tol: &Tolerances<T>,
) -> Result<Vec<Complex<T>>, PolyError> {
    let d = q.len() - 1;
    if d == 1 {
        return Ok(vec![-q[1] / q[0]]);
    }
    if d == 2 {
        return Ok(quadratic_roots(q));
    }
    let noise = T::epsilon() * T::from_usize(4 * (d + 1)).unwrap();
    let radius = {
        let r = (q[d].norm() / q[0].norm()).powf(T::one() / T::from_usize(d).unwrap());
        if r.is_finite() && r > T::of(1e-3) {
            r
        } else {
            T::one()
        }
    };

    let mut best: Option<(T, Vec<Complex<T>>)> = None;
    for attempt in 0..4 {
        let phase = T::of(0.25 + 0.7391 * attempt as f64);
        let scale = radius * T::of(1.0 + 0.3 * attempt as f64);
        let tau = T::of(2.0) * T::PI();
        let mut z: Vec<Complex<T>> = (0..d)
            .map(|j| {
                let ang = tau * (T::from_usize(j).unwrap() + phase) / T::from_usize(d).unwrap();
                Complex::from_polar(scale * (T::one() + T::of(0.05 * j as f64 / d as f64)), ang)
            })
            .collect();

        let mut stagnant = 0usize;
        let mut best_corr = T::infinity();
        for _ in 0..tol.max_root_iters {
            let mut max_corr = T::zero();
            for i in 0..d {
                let (p, dp) = horner_pair(q, z[i]);
                if p.norm() <= noise * abs_horner(q, z[i].norm()) {
                    continue; // residual at rounding level
                }
                let newton = if dp.is_zero() {
                    Complex::new(tol.root, tol.root)
                } else {
                    p / dp
                };
                let mut repulsion = Complex::<T>::zero();
                for j in 0..d {
                    if j != i {
                        let diff = z[i] - z[j];
                        if !diff.is_zero() {
                            repulsion = repulsion + diff.inv();
                        }
                    }
                }
                let denom = Complex::new(T::one(), T::zero()) - newton * repulsion;
                let w = if denom.norm() < T::of(1e-12) { newton } else { newton / denom };
                z[i] = z[i] - w;
                let corr = w.norm() / (T::one() + z[i].norm());
                max_corr = Float::max(max_corr, corr);
            }
            if max_corr <= tol.root {
                return Ok(z);
            }
            if max_corr < best_corr * T::of(0.5) {
                best_corr = max_corr;
                stagnant = 0;
            } else {
                stagnant += 1;
                if stagnant > 60 {
                    break;
                }
            }
        }
        // Accept on the noise-floor criterion alone.
        let worst = z
            .iter()
            .map(|&zi| horner_pair(q, zi).0.norm() / abs_horner(q, zi.norm()))
            .fold(T::zero(), Float::max);
        if worst <= noise * T::of(16.0) {
            return Ok(z);
        }
        if best.as_ref().map_or(true, |(b, _)| worst < *b) {
            best = Some((worst, z));
        }
    }
    let (residual, partial) = best.unwrap();
    Err(PolyError::RootNonConvergence {
        residual: residual.to_f64().unwrap_or(f64::NAN),
        partial: partial
            .iter()
            .map(|z| [z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN)])
            .collect(),
    })
}

/// Newton iteration on the `(m-1)`-th derivative, which has a simple root
/// at an `m`-fold root of `q`. Returns the refined point, or the start
/// point when the iteration drifts.
fn refine_representative<T: Scalar>(q: &[Complex<T>], start: Complex<T>, m: usize) -> Complex<T> {
    let g = derivative_coeffs(q, m - 1);
    if g.len() < 2 {
        return start;
    }
    let leash = T::of(0.05) * (T::one() + start.norm());
    let mut c = start;
    for _ in 0..40 {
        let (val, der) = horner_pair(&g, c);
        if der.is_zero() {
            break;
        }
        let step = val / der;
        c = c - step;
        if (c - start).norm() > leash {
            return start;
        }
        if step.norm() <= T::epsilon() * T::of(4.0) * (T::one() + c.norm()) {
            break;
        }
    }
    c
}

/// True when all derivatives of order `< m` vanish at `c` up to a strict
/// multiple of their evaluation-noise bounds.
fn certify_multiplicity<T: Scalar>(q: &[Complex<T>], c: Complex<T>, m: usize) -> bool {
    let tau = T::of(1e-7).max(T::epsilon() * T::of(1e4));
    for j in 0..m {
        let g = derivative_coeffs(q, j);
        let bound = abs_horner(&g, c.norm());
        if horner_pair(&g, c).0.norm() > tau * bound {
            return false;
        }
    }
    true
}

/// Candidate radius for certified merges. An `m`-fold root computed in
/// floating point scatters over ~eps^(1/m), up to ~1e-2 relative for the
/// multiplicities seen here; the derivative certification rejects false
/// candidates, so the radius only has to stay below genuine root
/// separations.
fn merge_candidate_radius<T: Scalar>() -> T {
    T::of(0.02)
}

/// Groups raw root estimates into multiplicity clusters.
fn cluster_roots<T: Scalar>(
    raw: &[Complex<T>],
    q: &[Complex<T>],
    tol: &Tolerances<T>,
) -> Vec<(Complex<T>, usize)> {
    let n = raw.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            let thr = tol.cluster * (T::one() + Float::max(raw[i].norm(), raw[j].norm()));
            if (raw[i] - raw[j]).norm() <= thr {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut clusters: Vec<(Complex<T>, usize)> = groups
        .values()
        .map(|idxs| {
            let inv = T::from_usize(idxs.len()).unwrap().recip();
            let centroid = idxs
                .iter()
                .fold(Complex::<T>::zero(), |acc, &i| acc + raw[i])
                * Complex::new(inv, T::zero());
            (refine_representative(q, centroid, idxs.len()), idxs.len())
        })
        .collect();

    // Certified merge pass for multiplicities whose floating-point scatter
    // exceeds the base linkage radius.
    loop {
        let mut merged = false;
        'outer: for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                let (zi, mi) = clusters[i];
                let (zj, mj) = clusters[j];
                let m = mi + mj;
                let rel = (zi - zj).norm() / (T::one() + Float::max(zi.norm(), zj.norm()));
                if rel > merge_candidate_radius::<T>() {
                    continue;
                }
                let wi = T::from_usize(mi).unwrap() / T::from_usize(m).unwrap();
                let centroid = zi * Complex::new(wi, T::zero())
                    + zj * Complex::new(T::one() - wi, T::zero());
                let c = refine_representative(q, centroid, m);
                if certify_multiplicity(q, c, m) {
                    clusters[i] = (c, m);
                    clusters.remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    clusters
}

/// Snaps near-real representatives onto the axis and averages conjugate
/// pairs so that root sets of real polynomials are exactly closed under
/// conjugation.
fn symmetrize_conjugates<T: Scalar>(clusters: &mut [(Complex<T>, usize)], tol: &Tolerances<T>) {
    for (z, _) in clusters.iter_mut() {
        if Float::abs(z.im) <= tol.real * (T::one() + z.norm()) {
            z.im = T::zero();
        }
    }
    let n = clusters.len();
    let mut used = vec![false; n];
    for i in 0..n {
        if used[i] || clusters[i].0.im <= T::zero() {
            continue;
        }
        let (zi, mi) = clusters[i];
        let mut best: Option<(usize, T)> = None;
        for (j, &(zj, mj)) in clusters.iter().enumerate() {
            if i == j || used[j] || mj != mi || zj.im >= T::zero() {
                continue;
            }
            let d = (zj - zi.conj()).norm();
            if best.as_ref().map_or(true, |&(_, bd)| d < bd) {
                best = Some((j, d));
            }
        }
        if let Some((j, d)) = best {
            if d <= tol.cluster * T::of(100.0) * (T::one() + zi.norm()) {
                let half = T::of(0.5);
                let avg = Complex::new(
                    (zi.re + clusters[j].0.re) * half,
                    (zi.im - clusters[j].0.im) * half,
                );
                clusters[i].0 = avg;
                clusters[j].0 = avg.conj();
                used[i] = true;
                used[j] = true;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::from_roots;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn assert_root(set: &ProjectiveRootSet<f64>, expect: Complex<f64>, mult: usize) {
        let hit = set
            .finite
            .iter()
            .find(|(z, _)| (z - expect).norm() < 1e-6 * (1.0 + expect.norm()))
            .unwrap_or_else(|| panic!("missing root {expect} in {:?}", set.finite));
        assert_eq!(hit.1, mult, "multiplicity at {expect}");
    }

    #[test]
    fn simple_real_roots() {
        let p = HomogeneousPoly::from_real_coeffs(&[1.0, 0.0, -1.0]);
        let set = roots(&p, &tol()).unwrap();
        assert_eq!(set.total(), 2);
        assert_root(&set, c(1.0, 0.0), 1);
        assert_root(&set, c(-1.0, 0.0), 1);
        assert_eq!(set.infinity, 0);
    }

    #[test]
    fn structural_roots_from_zero_coefficients() {
        // x²y: roots x = 0 (mult 2) and (1:0) (mult 1)
        let p = HomogeneousPoly::from_real_coeffs(&[0.0, 1.0, 0.0, 0.0]);
        let set = roots(&p, &tol()).unwrap();
        assert_eq!(set.infinity, 1);
        assert_root(&set, c(0.0, 0.0), 2);
    }

    #[test]
    fn triple_root_multiplicity_is_recovered() {
        let p = from_roots(&[(c(2.0, 0.0), 3), (c(-1.0, 0.0), 1)], 0, c(1.0, 0.0));
        let set = roots(&p, &tol()).unwrap();
        assert_eq!(set.finite.len(), 2);
        assert_root(&set, c(2.0, 0.0), 3);
        assert_root(&set, c(-1.0, 0.0), 1);
        // refined representative should be very accurate
        let two = set.finite.iter().find(|(z, _)| (z.re - 2.0).abs() < 1e-3).unwrap();
        assert!((two.0 - c(2.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn mixed_multiplicities_and_conjugate_pairs() {
        let p = from_roots(
            &[(c(-0.5, 0.0), 2), (c(1.5, 2.0), 2), (c(1.5, -2.0), 2), (c(3.0, 0.0), 1)],
            1,
            c(2.0, 0.0),
        );
        let set = roots(&p, &tol()).unwrap();
        assert_eq!(set.infinity, 1);
        assert_root(&set, c(-0.5, 0.0), 2);
        assert_root(&set, c(1.5, 2.0), 2);
        assert_root(&set, c(1.5, -2.0), 2);
        assert_root(&set, c(3.0, 0.0), 1);
        assert!(set.is_conj_closed(1e-9));
        // conjugate pairs are exactly mirrored after symmetrization
        let up = set.finite.iter().find(|(z, _)| z.im > 0.5).unwrap().0;
        let dn = set.finite.iter().find(|(z, _)| z.im < -0.5).unwrap().0;
        assert_eq!(up.conj(), dn);
    }

    #[test]
    fn quintuple_root_stress() {
        let p = from_roots(&[(c(1.0, 0.0), 5)], 0, c(1.0, 0.0));
        let set = roots(&p, &tol()).unwrap();
        assert_eq!(set.finite.len(), 1);
        assert_root(&set, c(1.0, 0.0), 5);
    }

    #[test]
    fn nearby_simple_roots_stay_separate() {
        let p = from_roots(&[(c(1.0, 0.0), 1), (c(1.1, 0.0), 1), (c(-2.0, 0.0), 1)], 0, c(1.0, 0.0));
        let set = roots(&p, &tol()).unwrap();
        assert_eq!(set.finite.len(), 3);
        assert_root(&set, c(1.0, 0.0), 1);
        assert_root(&set, c(1.1, 0.0), 1);
    }

    #[test]
    fn zero_polynomial_is_rejected() {
        assert_eq!(
            roots(&HomogeneousPoly::<f64>::zero(), &tol()).unwrap_err(),
            PolyError::ZeroPolynomial
        );
    }
}
