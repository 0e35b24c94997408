//! Function-space oracles.
//!
//! Membership of an end-to-end filter in the function space and in its
//! Zariski closure, singularity detection, boundary tests where a
//! complete criterion exists (stride-one architectures and two-layer
//! reduced ones), the necessary boundary conditions for general reduced
//! architectures, random sampling through the parameterization map, and
//! the hard-coded implicit equations of two five-dimensional spaces.
//!
//! Closure membership reads off the layered factorization degrees and
//! checks the weighted suffix inequalities. Full membership is a brute
//! force oracle: hyperroot orbits of the filter polynomial are assigned
//! to the layers of the reduced architecture (conjugation-closed per
//! layer), and each merged block must additionally pass the real-root
//! count criterion of its stride-one sub-architecture. The first complete
//! assignment yields an explicit per-layer witness factorization.


use num_traits::Float;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::ops::ControlFlow;
use thiserror::Error;

use crate::arch::{ArchError, Architecture, Reduction};
use crate::fiber::{self, LayerSpec, Mode};
use crate::param::{self, monic_from_points, ParamError};
use crate::poly::{
    embed, expand_compressed, real_hyperroot_profile, roots, s_factorization, HomogeneousPoly,
    PolyError, ProjectiveRootSet, RootPoint, SFactorization,
};
use crate::tol::Tolerances;
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum SpaceError {
    #[error("filter length {got} does not match the ambient dimension {expected}")]
    FilterLength { expected: usize, got: usize },
    #[error("assignment search exceeded {cap} nodes")]
    CombinatorialBudgetExceeded { cap: usize },
    #[error("filter is not in the Zariski closure")]
    NotInClosure,
    #[error("operation requires a two-layer reduced architecture")]
    WrongArity,
    #[error("operation requires a stride-one architecture")]
    NotStrideOne,
    #[error("filter has no real hyperroot structure to perturb")]
    NoPerturbableStructure,
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Arch(#[from] ArchError),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Options of the brute-force membership oracle.
#[derive(Clone, Debug)]
pub struct MembershipOptions<T> {
    pub tol: Tolerances<T>,
    /// Node cap of the assignment search.
    pub cap: usize,
}

impl<T: Scalar> Default for MembershipOptions<T> {
    fn default() -> Self {
        MembershipOptions { tol: Tolerances::default(), cap: 1_000_000 }
    }
}

/// The three necessary conditions satisfied by nonzero relative boundary
/// points of a reduced architecture. All false certifies an interior
/// point; any true is necessary, not sufficient.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct BoundaryFlags {
    /// Some layer `l ≥ 2` has a real double stride-`S_l` hyperroot.
    pub double_real_hyperroot: bool,
    /// At least two weighted suffix inequalities are strict.
    pub multiple_strict: bool,
    /// Some weighted suffix exceeds its bound by at least `2 S_l`.
    pub large_excess: bool,
}

impl BoundaryFlags {
    pub fn any(&self) -> bool {
        self.double_real_hyperroot || self.multiple_strict || self.large_excess
    }
}

/// Result of the membership oracle.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar + Serialize")]
pub struct MembershipReport<T> {
    pub in_closure: bool,
    pub in_space: bool,
    /// Layered factorization degrees of the reduced architecture,
    /// ascending by layer (empty for the zero filter).
    pub factor_degrees: Vec<usize>,
    /// A real factorization witness, one filter per original layer.
    pub witness: Option<Vec<Vec<T>>>,
    /// Nonzero closure point with exact factorization degrees.
    pub smooth: bool,
    /// Complete boundary decision where a criterion exists (stride-one
    /// architectures, two-layer reduced ones); `None` otherwise.
    pub boundary: Option<bool>,
    pub boundary_flags: BoundaryFlags,
}

fn check_length<T>(w: &[T], arch: &Architecture) -> Result<(), SpaceError> {
    if w.len() != arch.end_filter_size() {
        Err(SpaceError::FilterLength { expected: arch.end_filter_size(), got: w.len() })
    } else {
        Ok(())
    }
}

fn is_zero_filter<T: Scalar>(w: &[T]) -> bool {
    w.iter().all(|&v| v == T::zero())
}

/// Closure membership and the layered factorization degrees (ascending
/// by reduced layer). The zero filter is in the closure by convention.
pub fn closure_membership<T: Scalar>(
    w: &[T],
    arch: &Architecture,
    tol: &Tolerances<T>,
) -> Result<(bool, Vec<usize>), SpaceError> {
    check_length(w, arch)?;
    if is_zero_filter(w) {
        return Ok((true, Vec::new()));
    }
    let red = arch.reduce().reduced;
    let sf = s_factorization(&embed(w, 1)?, red.cumulative_strides(), tol)?;
    let ok = closure_from_degrees(&sf, &red);
    Ok((ok, sf.degrees.clone()))
}

fn closure_from_degrees<T: Scalar>(sf: &SFactorization<T>, red: &Architecture) -> bool {
    (1..=red.layer_count()).all(|l| sf.weighted_suffix(l) >= red.weighted_suffix(l))
}

/// Singularity of a closure point: the zero filter, or strict excess in
/// some weighted suffix (equivalently, containment in a smaller function
/// space with the same strides).
pub fn is_singular<T: Scalar>(
    w: &[T],
    arch: &Architecture,
    tol: &Tolerances<T>,
) -> Result<bool, SpaceError> {
    check_length(w, arch)?;
    if is_zero_filter(w) {
        return Ok(true);
    }
    let red = arch.reduce().reduced;
    let sf = s_factorization(&embed(w, 1)?, red.cumulative_strides(), tol)?;
    if !closure_from_degrees(&sf, &red) {
        return Err(SpaceError::NotInClosure);
    }
    Ok((2..=red.layer_count()).any(|l| sf.weighted_suffix(l) > red.weighted_suffix(l)))
}

/// Real projective root multiplicities of a real polynomial (finite real
/// roots plus the root at infinity), sorted descending.
fn real_root_multiplicities<T: Scalar>(set: &ProjectiveRootSet<T>) -> Vec<usize> {
    let mut alphas: Vec<usize> =
        set.finite.iter().filter(|(z, _)| z.im.is_zero()).map(|&(_, m)| m).collect();
    if set.infinity > 0 {
        alphas.push(set.infinity);
    }
    alphas.sort_unstable_by(|a, b| b.cmp(a));
    alphas
}

/// Complete membership + boundary criterion for stride-one architectures:
/// the filter polynomial needs at least `e` real roots (with
/// multiplicity), where `e` counts the even filter sizes; it lies on the
/// relative boundary iff additionally at most `e - 2` of the real root
/// multiplicities are odd.
pub fn stride_one_boundary<T: Scalar>(
    w: &[T],
    arch: &Architecture,
    tol: &Tolerances<T>,
) -> Result<bool, SpaceError> {
    if !arch.is_stride_one() {
        return Err(SpaceError::NotStrideOne);
    }
    check_length(w, arch)?;
    let evens = arch.filter_sizes().iter().filter(|&&k| k % 2 == 0).count();
    if is_zero_filter(w) {
        return Ok(!arch.classify().zariski_closed);
    }
    if evens < 2 {
        return Ok(false); // space is closed, no boundary
    }
    let set = roots(&embed(w, 1)?, tol)?;
    let alphas = real_root_multiplicities(&set);
    let member = alphas.iter().sum::<usize>() >= evens;
    let odd = alphas.iter().filter(|&&m| m % 2 == 1).count();
    Ok(member && odd <= evens - 2)
}

/// Complete boundary criterion for two-layer reduced architectures with a
/// non-closed function space, in terms of the real hyperroot
/// multiplicities of the filter polynomial.
pub fn two_layer_boundary<T: Scalar>(
    w: &[T],
    arch: &Architecture,
    tol: &Tolerances<T>,
) -> Result<bool, SpaceError> {
    if arch.layer_count() != 2 || !arch.is_reduced() {
        return Err(SpaceError::WrongArity);
    }
    check_length(w, arch)?;
    if arch.classify().zariski_closed {
        return Ok(false);
    }
    if is_zero_filter(w) {
        return Ok(true); // limits of scaled non-members reach zero
    }
    let profile = real_hyperroot_profile(&embed(w, 1)?, arch.strides()[0], tol)?;
    let pairs: usize = profile.gamma_total() + profile.rho.iter().map(|&r| r / 2).sum::<usize>();
    Ok(pairs >= arch.filter_sizes()[1] / 2 && profile.rho_total() >= 1)
}

/// Necessary boundary conditions for a nonzero filter of a reduced
/// architecture; all false certifies the point is not on the relative
/// boundary.
pub fn boundary_conditions<T: Scalar>(
    w: &[T],
    arch: &Architecture,
    tol: &Tolerances<T>,
) -> Result<BoundaryFlags, SpaceError> {
    check_length(w, arch)?;
    if is_zero_filter(w) {
        return Ok(BoundaryFlags::default());
    }
    let red = arch.reduce().reduced;
    let p = embed(w, 1)?;
    let sf = s_factorization(&p, red.cumulative_strides(), tol)?;
    let mut flags = BoundaryFlags::default();
    let mut strict = 0usize;
    for l in 2..=red.layer_count() {
        let stride = red.cumulative_strides()[l - 1];
        let have = sf.weighted_suffix(l);
        let need = red.weighted_suffix(l);
        if have > need {
            strict += 1;
        }
        if have >= need + 2 * stride {
            flags.large_excess = true;
        }
        if real_hyperroot_profile(&p, stride, tol)?.has_real_double() {
            flags.double_real_hyperroot = true;
        }
    }
    flags.multiple_strict = strict >= 2;
    Ok(flags)
}

/// Splits a conjugation-closed point multiset into parts of prescribed
/// degrees, each part itself conjugation-closed: odd budgets receive one
/// real point first, the rest is filled with degree-two chunks (either a
/// conjugate pair or two real points).
fn split_real_points<T: Scalar>(
    points: &[(RootPoint<T>, usize)],
    budgets: &[usize],
) -> Option<Vec<Vec<(RootPoint<T>, usize)>>> {
    let mut reals: Vec<RootPoint<T>> = Vec::new();
    let mut pairs: Vec<(RootPoint<T>, RootPoint<T>)> = Vec::new();
    let mut sorted: Vec<(RootPoint<T>, usize)> = points.to_vec();
    sorted.sort_by(|a, b| {
        a.0.sort_key().partial_cmp(&b.0.sort_key()).unwrap_or(std::cmp::Ordering::Equal)
    });
    for &(p, m) in &sorted {
        match p {
            RootPoint::Finite(z) if !z.im.is_zero() => {
                if z.im > T::zero() {
                    for _ in 0..m {
                        pairs.push((p, RootPoint::Finite(z.conj())));
                    }
                }
            }
            _ => {
                for _ in 0..m {
                    reals.push(p);
                }
            }
        }
    }
    let mut assigned: Vec<Vec<RootPoint<T>>> = vec![Vec::new(); budgets.len()];
    // one real point per odd budget
    for (i, &b) in budgets.iter().enumerate() {
        if b % 2 == 1 {
            assigned[i].push(reals.pop()?);
        }
    }
    // leftover reals pair up (their count is even by parity)
    while reals.len() >= 2 {
        let a = reals.pop().unwrap();
        let b = reals.pop().unwrap();
        pairs.push((a, b));
    }
    if !reals.is_empty() {
        return None;
    }
    // fill the even remainders with degree-two chunks
    for (i, &b) in budgets.iter().enumerate() {
        while assigned[i].len() < b {
            let (a, bb) = pairs.pop()?;
            assigned[i].push(a);
            assigned[i].push(bb);
        }
    }
    if !pairs.is_empty() {
        return None;
    }
    Some(
        assigned
            .into_iter()
            .map(|pts| {
                let mut counted: Vec<(RootPoint<T>, usize)> = Vec::new();
                for p in pts {
                    match counted.iter_mut().find(|(q, _)| {
                        q.sort_key().partial_cmp(&p.sort_key()) == Some(std::cmp::Ordering::Equal)
                    }) {
                        Some(entry) => entry.1 += 1,
                        None => counted.push((p, 1)),
                    }
                }
                counted
            })
            .collect(),
    )
}

fn remainder_points<T: Scalar>(set: &ProjectiveRootSet<T>) -> Vec<(RootPoint<T>, usize)> {
    let mut pts: Vec<(RootPoint<T>, usize)> =
        set.finite.iter().map(|&(z, m)| (RootPoint::Finite(z), m)).collect();
    if set.infinity > 0 {
        pts.push((RootPoint::Infinity, set.infinity));
    }
    pts
}

/// Builds the per-original-layer witness filters from a complete
/// assignment. Returns `None` when the split degenerates (which would
/// indicate a violated block criterion).
fn build_witness<T: Scalar>(
    assignment: &fiber::Assignment<T>,
    reduction: &Reduction,
    arch: &Architecture,
    p: &HomogeneousPoly<T>,
    tol: &Tolerances<T>,
) -> Option<Vec<Vec<T>>> {
    // Selections run outermost-first; block 1 takes the remainder.
    let mut block_points: Vec<Vec<(RootPoint<T>, usize)>> =
        vec![remainder_points(&assignment.remainder)];
    for sel in assignment.selections.iter().rev() {
        block_points.push(sel.clone());
    }
    debug_assert_eq!(block_points.len(), reduction.layer_groups.len());

    let mut witness: Vec<Vec<T>> = vec![Vec::new(); arch.layer_count()];
    for (j, pts) in block_points.iter().enumerate() {
        let group = &reduction.layer_groups[j];
        let budgets: Vec<usize> = group.iter().map(|&l| arch.filter_sizes()[l - 1] - 1).collect();
        let parts = split_real_points(pts, &budgets)?;
        for (&layer, part) in group.iter().zip(parts) {
            let mut poly = monic_from_points(&part);
            if poly.max_imag() > tol.real * Float::max(T::one(), poly.norm_inf()) {
                return None;
            }
            poly.symmetrize_real();
            witness[layer - 1] = poly.real_coeffs();
        }
    }
    // Distribute the global scale onto the first layer.
    let product = witness
        .iter()
        .zip(arch.cumulative_strides())
        .map(|(wl, &s)| embed(wl, s))
        .try_fold(HomogeneousPoly::one(), |acc, q| q.map(|q| acc.mul(&q)))
        .ok()?;
    let idx = product
        .coeffs()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())?
        .0;
    let denom = product.coeffs()[idx].re;
    if denom == T::zero() {
        return None;
    }
    let ratio = p.coeffs()[idx].re / denom;
    for v in witness[0].iter_mut() {
        *v = *v * ratio;
    }
    Some(witness)
}

/// Brute-force membership oracle; see the module docs.
pub fn membership<T: Scalar>(
    w: &[T],
    arch: &Architecture,
    opts: &MembershipOptions<T>,
) -> Result<MembershipReport<T>, SpaceError> {
    check_length(w, arch)?;
    let tol = &opts.tol;
    if is_zero_filter(w) {
        return Ok(MembershipReport {
            in_closure: true,
            in_space: true,
            factor_degrees: Vec::new(),
            witness: None,
            smooth: arch.classify().thick,
            boundary: complete_boundary(w, arch, tol)?,
            boundary_flags: BoundaryFlags::default(),
        });
    }
    let reduction = arch.reduce();
    let red = &reduction.reduced;
    let p = embed(w, 1)?;
    let sf = s_factorization(&p, red.cumulative_strides(), tol)?;
    let in_closure = closure_from_degrees(&sf, red);
    let smooth =
        in_closure && sf.degrees.iter().zip(red.filter_sizes()).all(|(&d, &k)| d == k - 1);
    let boundary_flags = boundary_conditions(w, arch, tol)?;

    let mut witness = None;
    let mut in_space = false;
    if in_closure {
        let set = roots(&p, tol)?;
        let evens = |group: &Vec<usize>| {
            group.iter().filter(|&&l| arch.filter_sizes()[l - 1] % 2 == 0).count()
        };
        let blocks = reduction.layer_groups.len();
        let layer_specs: Vec<LayerSpec> = (2..=blocks)
            .rev()
            .map(|j| LayerSpec {
                stride: red.cumulative_strides()[j - 1],
                budget: red.filter_sizes()[j - 1] - 1,
                min_real: evens(&reduction.layer_groups[j - 1]),
            })
            .collect();
        let e1 = evens(&reduction.layer_groups[0]);
        let result = fiber::enumerate_assignments(
            &set,
            &layer_specs,
            Mode::RealClosed,
            tol,
            opts.cap,
            |assignment| {
                let alphas = real_root_multiplicities(&assignment.remainder);
                if alphas.iter().sum::<usize>() < e1 {
                    return ControlFlow::Continue(());
                }
                match build_witness(assignment, &reduction, arch, &p, tol) {
                    Some(found) => {
                        witness = Some(found);
                        in_space = true;
                        ControlFlow::Break(())
                    }
                    None => ControlFlow::Continue(()),
                }
            },
        );
        if let Err(e) = result {
            return Err(SpaceError::CombinatorialBudgetExceeded { cap: e.cap });
        }
    }
    Ok(MembershipReport {
        in_closure,
        in_space,
        factor_degrees: sf.degrees.clone(),
        witness,
        smooth,
        boundary: complete_boundary(w, arch, tol)?,
        boundary_flags,
    })
}

/// A complete boundary decision where the criteria apply, `None`
/// elsewhere.
fn complete_boundary<T: Scalar>(
    w: &[T],
    arch: &Architecture,
    tol: &Tolerances<T>,
) -> Result<Option<bool>, SpaceError> {
    if arch.is_stride_one() {
        return stride_one_boundary(w, arch, tol).map(Some);
    }
    if arch.layer_count() == 2 && arch.is_reduced() {
        return two_layer_boundary(w, arch, tol).map(Some);
    }
    Ok(None)
}

/// Draws `n` filters from the function space: per-layer standard normal
/// filters pushed through the parameterization map.
pub fn sample<T: Scalar, R: Rng + ?Sized>(
    arch: &Architecture,
    rng: &mut R,
    n: usize,
) -> Vec<Vec<T>> {
    (0..n).map(|_| param::mu(&sample_parameters(arch, rng), arch).expect("shapes match")).collect()
}

/// Per-layer standard normal parameter draw.
pub fn sample_parameters<T: Scalar, R: Rng + ?Sized>(
    arch: &Architecture,
    rng: &mut R,
) -> Vec<Vec<T>> {
    arch.filter_sizes()
        .iter()
        .map(|&k| (0..k).map(|_| T::of(rng.sample::<f64, _>(StandardNormal))).collect())
        .collect()
}

/// One member of the constructive outside-sequence approaching a
/// boundary-positive filter of a two-layer reduced architecture: real
/// double hyperroots split into conjugate pairs at offset `eps`, leftover
/// single real hyperroots are pushed off the stride grid by an `eps`
/// cross-term. The result lies in the closure but outside the function
/// space, at coefficient distance `O(eps)` from the input.
pub fn two_layer_outside_point<T: Scalar>(
    w: &[T],
    arch: &Architecture,
    eps: T,
    tol: &Tolerances<T>,
) -> Result<Vec<T>, SpaceError> {
    if arch.layer_count() != 2 || !arch.is_reduced() {
        return Err(SpaceError::WrongArity);
    }
    check_length(w, arch)?;
    let stride = arch.strides()[0];
    let p = embed(w, 1)?;
    let profile = real_hyperroot_profile(&p, stride, tol)?;
    if profile.rho_total() == 0 {
        return Err(SpaceError::NoPerturbableStructure);
    }
    let mut factors: Vec<HomogeneousPoly<T>> = Vec::new();
    // untouched conjugate-pair hyperroots
    for &(v, m) in &profile.pair_values {
        let q =
            monic_from_points(&[(RootPoint::Finite(v), m), (RootPoint::Finite(v.conj()), m)]);
        factors.push(expand_compressed(&q, stride)?);
    }
    for &(point, m) in &profile.real_values {
        let (doubles, single) = (m / 2, m % 2);
        if doubles > 0 {
            let q = match point {
                RootPoint::Finite(c) => {
                    // (u - (c+iδ)v)(u - (c-iδ)v), real by conjugation
                    let delta = eps * (T::one() + c.norm());
                    let mut q = monic_from_points(&[
                        (RootPoint::Finite(Complex::new(c.re, delta)), doubles),
                        (RootPoint::Finite(Complex::new(c.re, -delta)), doubles),
                    ]);
                    q.symmetrize_real();
                    q
                }
                RootPoint::Infinity => {
                    // v² -> v² + δ²u² per double
                    let base =
                        HomogeneousPoly::from_real_coeffs(&[eps * eps, T::zero(), T::one()]);
                    let mut acc = HomogeneousPoly::one();
                    for _ in 0..doubles {
                        acc = acc.mul(&base);
                    }
                    acc
                }
            };
            factors.push(expand_compressed(&q, stride)?);
        }
        if single > 0 {
            // push the lone real hyperroot off the grid
            let grid = match point {
                RootPoint::Finite(c) => {
                    let mut e =
                        expand_compressed(&monic_from_points(&[(RootPoint::Finite(c), 1)]), stride)?;
                    e.symmetrize_real();
                    e
                }
                RootPoint::Infinity => {
                    expand_compressed(&monic_from_points(&[(RootPoint::Infinity, 1)]), stride)?
                }
            };
            let mut coeffs = grid.real_coeffs();
            let scale = eps * grid.norm_inf();
            coeffs[1] = coeffs[1] + scale; // x^{s-1} y cross-term
            factors.push(HomogeneousPoly::from_real_coeffs(&coeffs));
        }
    }
    // residual (non-hyperroot) part carries the overall scale
    let residual = crate::poly::hyperroot_extract(&p, stride, tol)?.remainder;
    let perturbed = factors.iter().fold(residual, |acc, f| acc.mul(f));
    let mut out = perturbed.real_coeffs();
    debug_assert_eq!(out.len(), w.len());
    // match the original normalization
    let idx = (0..w.len())
        .max_by(|&a, &b| {
            Float::abs(w[a]).partial_cmp(&Float::abs(w[b])).unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();
    if out[idx] != T::zero() {
        let ratio = w[idx] / out[idx];
        for v in out.iter_mut() {
            *v = *v * ratio;
        }
    }
    Ok(out)
}

/// The two hard-coded implicit function-space descriptions in ambient
/// dimension five.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ImplicitExample {
    /// Architecture (3,2) with strides (2,1): one cubic equation and one
    /// quadratic inequality.
    Ex1,
    /// Architecture (2,2,2) with strides (1,2,1): the same equation plus
    /// three more inequality constraints.
    Ex2,
}

/// Residuals of the implicit description at a filter `(A, B, C, D, E)`.
/// Equalities should vanish; inequalities should be nonnegative.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ImplicitResiduals<T> {
    /// `A D² + B² E - B C D`
    pub equality: T,
    /// `C² - 4 A E`
    pub discriminant: T,
    /// `B⁴ - 4 A B (B C - A D)` (second example only)
    pub quartic_b: Option<T>,
    /// `D⁴ - 4 D E (C D - B E)` (second example only)
    pub quartic_d: Option<T>,
    /// `max(-A E, -A C)`, the disjunction `A E ≤ 0 or A C ≤ 0`
    pub sign_disjunction: Option<T>,
}

impl<T: Scalar> ImplicitResiduals<T> {
    /// Scale-relative satisfaction test; `scale` is the max-norm of the
    /// filter, weighted by the homogeneity degree of each polynomial.
    pub fn satisfied(&self, rel_tol: T, scale: T) -> bool {
        let s = Float::max(scale, T::one());
        let s2 = s * s;
        let s3 = s2 * s;
        let s4 = s2 * s2;
        let mut ok =
            Float::abs(self.equality) <= rel_tol * s3 && self.discriminant >= -rel_tol * s2;
        if let Some(q) = self.quartic_b {
            ok = ok && q >= -rel_tol * s4;
        }
        if let Some(q) = self.quartic_d {
            ok = ok && q >= -rel_tol * s4;
        }
        if let Some(d) = self.sign_disjunction {
            ok = ok && d >= -rel_tol * s2;
        }
        ok
    }
}

/// Evaluates the implicit equations of the chosen example at a 5-vector.
pub fn implicit_residuals<T: Scalar>(
    w: &[T],
    which: ImplicitExample,
) -> Result<ImplicitResiduals<T>, SpaceError> {
    if w.len() != 5 {
        return Err(SpaceError::FilterLength { expected: 5, got: w.len() });
    }
    let (a, b, c, d, e) = (w[0], w[1], w[2], w[3], w[4]);
    let equality = a * d * d + b * b * e - b * c * d;
    let discriminant = c * c - T::of(4.0) * a * e;
    let (quartic_b, quartic_d, sign_disjunction) = match which {
        ImplicitExample::Ex1 => (None, None, None),
        ImplicitExample::Ex2 => (
            Some(b * b * b * b - T::of(4.0) * a * b * (b * c - a * d)),
            Some(d * d * d * d - T::of(4.0) * d * e * (c * d - b * e)),
            Some(Float::max(-(a * e), -(a * c))),
        ),
    };
    Ok(ImplicitResiduals { equality, discriminant, quartic_b, quartic_d, sign_disjunction })
}

/// Grid specification of the slice `A = 1, C = -1` over `(B, D, E)`.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec<T> {
    pub min: T,
    pub max: T,
    pub resolution: usize,
}

/// One row of the slice data.
#[derive(Clone, Copy, Debug)]
pub struct FigureRow<T> {
    pub b: T,
    pub d: T,
    pub e: T,
    pub residuals: ImplicitResiduals<T>,
    pub in_set: bool,
}

/// Streams the slice of the chosen implicit set over a `(B, D, E)` grid
/// at `A = 1, C = -1`.
pub fn figure_rows<T: Scalar>(
    which: ImplicitExample,
    grid: GridSpec<T>,
    rel_tol: T,
) -> impl Iterator<Item = FigureRow<T>> {
    let n = grid.resolution.max(1);
    let step =
        if n == 1 { T::zero() } else { (grid.max - grid.min) / T::from_usize(n - 1).unwrap() };
    let value = move |i: usize| grid.min + T::from_usize(i).unwrap() * step;
    (0..n).flat_map(move |bi| {
        (0..n).flat_map(move |di| {
            (0..n).map(move |ei| {
                let (b, d, e) = (value(bi), value(di), value(ei));
                let w = [T::one(), b, -T::one(), d, e];
                let residuals = implicit_residuals(&w, which).expect("length 5");
                let scale = w.iter().map(|&v| Float::abs(v)).fold(T::zero(), Float::max);
                FigureRow { b, d, e, residuals, in_set: residuals.satisfied(rel_tol, scale) }
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rel_coeff_distance;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn arch(k: &[usize], s: &[usize]) -> Architecture {
        Architecture::new(k.to_vec(), s.to_vec()).unwrap()
    }

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn opts() -> MembershipOptions<f64> {
        MembershipOptions::default()
    }

    fn poly_of(w: &[f64]) -> HomogeneousPoly<f64> {
        embed(w, 1).unwrap()
    }

    /// (x²+y²)(x²+xy-2y²) = x⁴+x³y-x²y²+xy³-2y⁴
    fn member_filter() -> Vec<f64> {
        vec![1.0, 1.0, -1.0, 1.0, -2.0]
    }

    #[test]
    fn closure_membership_reads_suffix_inequalities() {
        let a = arch(&[3, 2], &[2, 1]);
        let (ok, d) = closure_membership(&member_filter(), &a, &tol()).unwrap();
        assert!(ok);
        assert_eq!(d, vec![2, 1]);

        // generic quartic with no 2-hyperroot
        let (ok, d) = closure_membership(&[1.0, 2.0, 0.5, -1.0, 3.0], &a, &tol()).unwrap();
        assert!(!ok);
        assert_eq!(d[1], 0);

        // zero filter by convention
        let (ok, _) = closure_membership(&[0.0; 5], &a, &tol()).unwrap();
        assert!(ok);
    }

    #[test]
    fn implicit_equation_agrees_with_closure_oracle() {
        let w = member_filter();
        let r = implicit_residuals(&w, ImplicitExample::Ex1).unwrap();
        assert!(r.equality.abs() < 1e-12);
    }

    #[test]
    fn membership_finds_the_expected_witness() {
        let a = arch(&[3, 2], &[2, 1]);
        let report = membership(&member_filter(), &a, &opts()).unwrap();
        assert!(report.in_closure && report.in_space);
        assert!(report.smooth);
        let witness = report.witness.unwrap();
        // outer layer x² + y², inner x² + xy - 2y²
        assert!(
            rel_coeff_distance(
                &poly_of(&witness[1]),
                &HomogeneousPoly::from_real_coeffs(&[1.0, 1.0])
            ) < 1e-8
        );
        assert!(
            rel_coeff_distance(
                &poly_of(&witness[0]),
                &HomogeneousPoly::from_real_coeffs(&[1.0, 1.0, -2.0])
            ) < 1e-8
        );
        // witness reconstructs the filter
        let prod = embed(&witness[0], 1).unwrap().mul(&embed(&witness[1], 2).unwrap());
        assert!(rel_coeff_distance(&prod, &poly_of(&member_filter())) < 1e-8);
    }

    #[test]
    fn closure_member_without_real_hyperroot_is_rejected() {
        // x⁴ + 4y⁴: in the closure (two conjugate hyperroots), not in the
        // space (no real one).
        let a = arch(&[3, 2], &[2, 1]);
        let w = vec![1.0, 0.0, 0.0, 0.0, 4.0];
        let report = membership(&w, &a, &opts()).unwrap();
        assert!(report.in_closure);
        assert!(!report.in_space);
        assert!(!report.smooth);
        assert_eq!(report.factor_degrees, vec![0, 2]);
        assert!(is_singular(&w, &a, &tol()).unwrap());
    }

    #[test]
    fn zero_filter_is_a_member_and_singular() {
        let a = arch(&[3, 2], &[2, 1]);
        let report = membership(&[0.0; 5], &a, &opts()).unwrap();
        assert!(report.in_space);
        assert!(is_singular(&[0.0; 5], &a, &tol()).unwrap());
    }

    #[test]
    fn singularity_follows_degree_excess() {
        let a = arch(&[3, 2], &[2, 1]);
        assert!(is_singular(&[1.0, 0.0, 0.0, 0.0, 4.0], &a, &tol()).unwrap());
        assert!(!is_singular(&member_filter(), &a, &tol()).unwrap());
        assert_eq!(
            is_singular(&[1.0, 2.0, 0.5, -1.0, 3.0], &a, &tol()).unwrap_err(),
            SpaceError::NotInClosure
        );
    }

    #[test]
    fn membership_under_non_reduced_architecture_checks_blocks() {
        // (2,2,2),(1,2,1): block 1 = layers {1,2} (both sizes even, e=2),
        // block 2 = layer {3}.
        let a = arch(&[2, 2, 2], &[1, 2, 1]);
        // (x-y)(x+2y)(x²+y²): block 1 gets the two real roots.
        let p = poly_of(&[1.0, 1.0, -2.0]).mul(&poly_of(&[1.0, 0.0, 1.0]));
        let w = p.real_coeffs();
        let report = membership(&w, &a, &opts()).unwrap();
        assert!(report.in_space);
        let witness = report.witness.unwrap();
        let prod = embed(&witness[0], 1)
            .unwrap()
            .mul(&embed(&witness[1], 1).unwrap())
            .mul(&embed(&witness[2], 2).unwrap());
        assert!(rel_coeff_distance(&prod, &p) < 1e-8);

        // (x²+2xy+2y²)(x²+y²): conjugate roots only in block 1 -> rejected,
        // though the reduced architecture (3,2),(2,1) accepts it.
        let q = poly_of(&[1.0, 2.0, 2.0]).mul(&poly_of(&[1.0, 0.0, 1.0]));
        let wq = q.real_coeffs();
        let report = membership(&wq, &a, &opts()).unwrap();
        assert!(report.in_closure);
        assert!(!report.in_space);
        let red = arch(&[3, 2], &[2, 1]);
        assert!(membership(&wq, &red, &opts()).unwrap().in_space);
    }

    #[test]
    fn stride_one_membership_and_boundary() {
        let a = arch(&[2, 2], &[1, 1]);
        // (x-y)²: double real root -> member, on the boundary
        let w = vec![1.0, -2.0, 1.0];
        assert!(stride_one_boundary(&w, &a, &tol()).unwrap());
        assert!(membership(&w, &a, &opts()).unwrap().in_space);
        // (x-y)(x+y): two odd multiplicities -> interior member
        let w = vec![1.0, 0.0, -1.0];
        assert!(!stride_one_boundary(&w, &a, &tol()).unwrap());
        assert!(membership(&w, &a, &opts()).unwrap().in_space);
        // x²+y²: no real roots -> not a member at all
        let w = vec![1.0, 0.0, 1.0];
        assert!(!membership(&w, &a, &opts()).unwrap().in_space);
        assert!(!stride_one_boundary(&w, &a, &tol()).unwrap());
        // closed space (3,3),(1,1): boundary always false
        let b = arch(&[3, 3], &[1, 1]);
        assert!(!stride_one_boundary(&[1.0, 0.0, 0.0, 0.0, 1.0], &b, &tol()).unwrap());
    }

    #[test]
    fn two_layer_boundary_criterion() {
        let a = arch(&[3, 2], &[2, 1]);
        // (x²-y²)²: double real hyperroot -> boundary
        let p = poly_of(&[1.0, 0.0, -1.0]).mul(&poly_of(&[1.0, 0.0, -1.0]));
        assert!(two_layer_boundary(&p.real_coeffs(), &a, &tol()).unwrap());
        // (x²+y²)(x²+xy-2y²): single real hyperroot -> interior
        assert!(!two_layer_boundary(&member_filter(), &a, &tol()).unwrap());
        // closed space: no boundary
        let closed = arch(&[3, 3], &[2, 1]);
        assert!(
            !two_layer_boundary(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0], &closed, &tol()).unwrap()
        );
        assert_eq!(
            two_layer_boundary(&member_filter(), &arch(&[2, 2, 2], &[1, 2, 1]), &tol())
                .unwrap_err(),
            SpaceError::WrongArity
        );
    }

    #[test]
    fn necessary_flags_on_fixtures() {
        let a = arch(&[3, 2], &[2, 1]);
        // (x²-y²)²: real double hyperroot
        let p = poly_of(&[1.0, 0.0, -1.0]).mul(&poly_of(&[1.0, 0.0, -1.0]));
        let flags = boundary_conditions(&p.real_coeffs(), &a, &tol()).unwrap();
        assert!(flags.double_real_hyperroot);

        // generic member: all flags false
        let flags = boundary_conditions(&member_filter(), &a, &tol()).unwrap();
        assert!(!flags.any());

        // x⁴: d = (0, 2), doubled grid factor; excess is S₂, not 2S₂
        let flags = boundary_conditions(&[1.0, 0.0, 0.0, 0.0, 0.0], &a, &tol()).unwrap();
        assert!(flags.double_real_hyperroot);
        assert!(!flags.large_excess);
        assert!(!flags.multiple_strict);
    }

    #[test]
    fn outside_sequence_leaves_the_space_but_stays_in_closure() {
        let a = arch(&[3, 2], &[2, 1]);
        let p = poly_of(&[1.0, 0.0, -3.0]).mul(&poly_of(&[1.0, 0.0, -3.0]));
        let w = p.real_coeffs();
        assert!(two_layer_boundary(&w, &a, &tol()).unwrap());
        let mut last = f64::INFINITY;
        for i in 0..8 {
            let eps = 1e-3 * 0.5f64.powi(i);
            let out = two_layer_outside_point(&w, &a, eps, &tol()).unwrap();
            let report = membership(&out, &a, &opts()).unwrap();
            assert!(report.in_closure, "eps = {eps}");
            assert!(!report.in_space, "eps = {eps}");
            let dist: f64 =
                w.iter().zip(&out).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            assert!(dist < last, "distance should shrink");
            last = dist;
        }
    }

    #[test]
    fn samples_live_in_the_space_and_closure() {
        let a = arch(&[3, 2], &[2, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for w in sample::<f64, _>(&a, &mut rng, 25) {
            let (ok, _) = closure_membership(&w, &a, &tol()).unwrap();
            assert!(ok);
            let r = implicit_residuals(&w, ImplicitExample::Ex1).unwrap();
            let scale = w.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            assert!(r.equality.abs() <= 1e-9 * scale.powi(3).max(1e-12));
            assert!(r.discriminant >= -1e-9 * scale.powi(2));
        }
    }

    #[test]
    fn implicit_point_checks() {
        // μ((1,1,1),(1,1)) = (1,1,2,1,1): equality and discriminant both 0
        let r = implicit_residuals(&[1.0, 1.0, 2.0, 1.0, 1.0], ImplicitExample::Ex1).unwrap();
        assert_eq!(r.equality, 0.0);
        assert_eq!(r.discriminant, 0.0);
        // x⁴
        let r = implicit_residuals(&[1.0, 0.0, 0.0, 0.0, 0.0], ImplicitExample::Ex1).unwrap();
        assert_eq!(r.equality, 0.0);
        assert_eq!(r.discriminant, 0.0);
    }

    #[test]
    fn figure_rows_slice_values() {
        // (B,D,E) = (1,1,1) at A=1, C=-1: equality residual 3
        let grid = GridSpec { min: 1.0, max: 1.0, resolution: 1 };
        let rows: Vec<_> = figure_rows(ImplicitExample::Ex1, grid, 1e-9).collect();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].residuals.equality, 3.0);
        assert!(!rows[0].in_set);

        let grid = GridSpec { min: -1.0, max: 1.0, resolution: 3 };
        let rows: Vec<_> = figure_rows(ImplicitExample::Ex2, grid, 1e-9).collect();
        assert_eq!(rows.len(), 27);
    }

    #[test]
    fn reduction_enlarges_membership() {
        let a = arch(&[2, 2, 2], &[1, 2, 1]);
        let red = arch(&[3, 2], &[2, 1]);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for w in sample::<f64, _>(&a, &mut rng, 20) {
            assert!(membership(&w, &red, &opts()).unwrap().in_space);
        }
    }
}
