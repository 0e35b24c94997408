//! The parameterization map of an LCN, its differential, and criticality.
//!
//! A parameter point is one filter per layer; the map multiplies the
//! layer polynomials on their stride grids and reads off the end-to-end
//! filter. Criticality of the map at a point with nonzero value is
//! governed by the common hyperroot degree: the total degree (in
//! compressed variables) of the common grid factors between each layer
//! polynomial and the product of the layers below it.

use nalgebra::{DMatrix, RealField};
use num_complex::Complex;
use num_traits::Float;
use serde::Serialize;
use std::ops::ControlFlow;
use thiserror::Error;

use crate::arch::{ArchError, Architecture};
use crate::fiber::{self, LayerSpec, Mode};
use crate::poly::{
    embed, from_roots, roots, HomogeneousPoly, PolyError, ProjectiveRootSet, RootPoint,
};
use crate::tol::Tolerances;
use crate::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("layer {layer} expects a filter of length {expected}, got {got}")]
    ShapeMismatch { layer: usize, expected: usize, got: usize },
    #[error("expected {expected} layer filters, got {got}")]
    LayerCountMismatch { expected: usize, got: usize },
    #[error("layer {layer} is the zero filter")]
    ZeroLayer { layer: usize },
    #[error("filter must be nonzero")]
    ZeroFilter,
    #[error("fiber enumeration exceeded {cap} nodes")]
    FiberCapExceeded { cap: usize },
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Arch(#[from] ArchError),
}

fn check_shapes<T>(theta: &[Vec<T>], arch: &Architecture) -> Result<(), ParamError> {
    if theta.len() != arch.layer_count() {
        return Err(ParamError::LayerCountMismatch {
            expected: arch.layer_count(),
            got: theta.len(),
        });
    }
    for (l, (w, &k)) in theta.iter().zip(arch.filter_sizes()).enumerate() {
        if w.len() != k {
            return Err(ParamError::ShapeMismatch { layer: l + 1, expected: k, got: w.len() });
        }
    }
    Ok(())
}

/// The layer polynomials `π_{S_l}(w_l)` in the ambient variables.
pub fn layer_polys<T: Scalar>(
    theta: &[Vec<T>],
    arch: &Architecture,
) -> Result<Vec<HomogeneousPoly<T>>, ParamError> {
    check_shapes(theta, arch)?;
    theta
        .iter()
        .zip(arch.cumulative_strides())
        .map(|(w, &s)| embed(w, s).map_err(ParamError::from))
        .collect()
}

/// Evaluates the parameterization map: the end-to-end filter of the
/// composed convolution. Multiplicative in per-layer scalings.
pub fn mu<T: Scalar>(theta: &[Vec<T>], arch: &Architecture) -> Result<Vec<T>, ParamError> {
    let polys = layer_polys(theta, arch)?;
    let product = polys.iter().fold(HomogeneousPoly::one(), |acc, p| acc.mul(p));
    if product.is_zero() {
        return Ok(vec![T::zero(); arch.end_filter_size()]);
    }
    debug_assert_eq!(product.degree(), Some(arch.end_filter_size() - 1));
    Ok(product.real_coeffs())
}

/// Analytic Jacobian of the parameterization map, `k_end × Σ k_l`.
///
/// The block of layer `l` maps a unit perturbation of `w_l[j]` to the
/// coefficient vector of `x^{S_l(k_l-1-j)} y^{S_l j}` times the product
/// of the other layer polynomials.
pub fn jacobian<T: Scalar>(
    theta: &[Vec<T>],
    arch: &Architecture,
) -> Result<DMatrix<T>, ParamError> {
    let polys = layer_polys(theta, arch)?;
    let layers = arch.layer_count();
    let k_end = arch.end_filter_size();
    let mut prefix = vec![HomogeneousPoly::<T>::one(); layers + 1];
    for l in 0..layers {
        prefix[l + 1] = prefix[l].mul(&polys[l]);
    }
    let mut suffix = vec![HomogeneousPoly::<T>::one(); layers + 1];
    for l in (0..layers).rev() {
        suffix[l] = suffix[l + 1].mul(&polys[l]);
    }
    let total_cols: usize = arch.filter_sizes().iter().sum();
    let mut jac = DMatrix::<T>::zeros(k_end, total_cols);
    let mut col = 0usize;
    for l in 0..layers {
        let others = prefix[l].mul(&suffix[l + 1]);
        let stride = arch.cumulative_strides()[l];
        for j in 0..arch.filter_sizes()[l] {
            if !others.is_zero() {
                let offset = stride * j;
                for (i, c) in others.coeffs().iter().enumerate() {
                    jac[(offset + i, col)] = c.re;
                }
            }
            col += 1;
        }
    }
    Ok(jac)
}

/// Number of singular values above `rel_tol` times the largest.
pub fn numerical_rank<T: Scalar + RealField>(m: &DMatrix<T>, rel_tol: T) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(T::zero(), Float::max);
    if top == T::zero() {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * top).count()
}

/// Per-layer common grid factors of a parameter point.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar + Serialize")]
pub struct ChdReport<T> {
    /// For each layer `l ≥ 2`, the common stride-`S_l` factor of the
    /// layer polynomial and the product of the layers below, in the
    /// compressed variables; the first entry (layer 1) is always 1.
    pub gcd_factors: Vec<HomogeneousPoly<T>>,
    /// Total degree of the common factors in compressed variables.
    pub chd: usize,
    pub is_critical: bool,
    /// 1-based index of a zero layer filter, if any.
    pub zero_layer: Option<usize>,
}

/// Detects criticality of the parameterization map at a point: a zero
/// layer filter, or a nontrivial common grid factor between some layer
/// polynomial and its prefix product. The factors are found by matching
/// hyperroot orbit values within `tol.orbit`.
pub fn criticality<T: Scalar>(
    theta: &[Vec<T>],
    arch: &Architecture,
    tol: &Tolerances<T>,
) -> Result<ChdReport<T>, ParamError> {
    check_shapes(theta, arch)?;
    let layers = arch.layer_count();
    let one = HomogeneousPoly::one;
    if let Some(l) = theta.iter().position(|w| w.iter().all(|&v| v == T::zero())) {
        return Ok(ChdReport {
            gcd_factors: vec![one(); layers],
            chd: 0,
            is_critical: layers > 1,
            zero_layer: Some(l + 1),
        });
    }
    let polys = layer_polys(theta, arch)?;
    let mut gcd_factors = vec![one(); layers];
    let mut chd = 0usize;
    let mut prefix = polys[0].clone();
    for l in 2..=layers {
        let stride = arch.cumulative_strides()[l - 1];
        // Hyperroot values of the layer polynomial are the projective
        // roots of the filter polynomial in compressed variables.
        let layer_values = roots(&embed(&theta[l - 1], 1)?, tol)?;
        let prefix_roots = roots(&prefix, tol)?;
        let prefix_orbits = crate::poly::hyperroot_values(&prefix_roots, stride, tol);
        let mut common: Vec<(Complex<T>, usize)> = Vec::new();
        let mut common_inf = 0usize;
        for &(v, m) in &layer_values.finite {
            let hit = prefix_orbits.iter().find_map(|&(pv, pm)| match pv {
                RootPoint::Finite(c)
                    if (c - v).norm() <= tol.orbit * (T::one() + c.norm() + v.norm()) =>
                {
                    Some(pm)
                }
                _ => None,
            });
            if let Some(pm) = hit {
                common.push((v, m.min(pm)));
            }
        }
        if layer_values.infinity > 0 {
            if let Some(&(_, pm)) =
                prefix_orbits.iter().find(|(pv, _)| matches!(pv, RootPoint::Infinity))
            {
                common_inf = layer_values.infinity.min(pm);
            }
        }
        let deg: usize = common_inf + common.iter().map(|&(_, m)| m).sum::<usize>();
        if deg > 0 {
            gcd_factors[l - 1] =
                from_roots(&common, common_inf, Complex::new(T::one(), T::zero()));
            chd += deg;
        }
        prefix = prefix.mul(&polys[l - 1]);
    }
    Ok(ChdReport { gcd_factors, chd, is_critical: layers > 1 && chd >= 1, zero_layer: None })
}

/// Rank versus common-hyperroot-degree bound at a parameter point.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct RankBoundReport {
    pub rank: usize,
    pub chd: usize,
    pub dimension: usize,
    /// `rank >= dimension - chd`
    pub bound_ok: bool,
}

pub fn rank_bound_check<T: Scalar + RealField>(
    theta: &[Vec<T>],
    arch: &Architecture,
    tol: &Tolerances<T>,
    rank_rel_tol: T,
) -> Result<RankBoundReport, ParamError> {
    check_shapes(theta, arch)?;
    if let Some(l) = theta.iter().position(|w| w.iter().all(|&v| v == T::zero())) {
        return Err(ParamError::ZeroLayer { layer: l + 1 });
    }
    let rank = numerical_rank(&jacobian(theta, arch)?, rank_rel_tol);
    let chd = criticality(theta, arch, tol)?.chd;
    let dimension = arch.dimension();
    Ok(RankBoundReport { rank, chd, dimension, bound_ok: rank + chd >= dimension })
}

/// All factorizations of an end-to-end filter according to the
/// architecture, up to per-factor scaling.
#[derive(Clone, Debug)]
pub struct FiberEnumeration<T> {
    /// Number of distinct assignments found (capped).
    pub count: usize,
    /// Monic layer factors in their compressed variables, innermost
    /// first, one entry per assignment.
    pub factorizations: Vec<Vec<HomogeneousPoly<T>>>,
}

/// Enumerates the complex factorizations of `π_1(w)` according to the
/// architecture by assigning hyperroot orbits to the layers above the
/// first. Errors out beyond `cap` search nodes.
pub fn enumerate_factorizations<T: Scalar>(
    w: &[T],
    arch: &Architecture,
    cap: usize,
    tol: &Tolerances<T>,
) -> Result<FiberEnumeration<T>, ParamError> {
    if w.iter().all(|&v| v == T::zero()) {
        return Err(ParamError::ZeroFilter);
    }
    if w.len() != arch.end_filter_size() {
        return Err(ParamError::ShapeMismatch {
            layer: 0,
            expected: arch.end_filter_size(),
            got: w.len(),
        });
    }
    let p = embed(w, 1)?;
    let set = roots(&p, tol)?;
    let layers: Vec<LayerSpec> = (2..=arch.layer_count())
        .rev()
        .map(|l| LayerSpec {
            stride: arch.cumulative_strides()[l - 1],
            budget: arch.filter_sizes()[l - 1] - 1,
            min_real: 0,
        })
        .collect();
    let mut count = 0usize;
    let mut factorizations = Vec::new();
    fiber::enumerate_assignments(&set, &layers, Mode::Complex, tol, cap, |assignment| {
        count += 1;
        let mut per_layer: Vec<HomogeneousPoly<T>> = Vec::with_capacity(arch.layer_count());
        per_layer.push(monic_from_points(&to_points(&assignment.remainder)));
        for selection in assignment.selections.iter().rev() {
            per_layer.push(monic_from_points(selection));
        }
        factorizations.push(per_layer);
        ControlFlow::Continue(())
    })
    .map_err(|e| ParamError::FiberCapExceeded { cap: e.cap })?;
    Ok(FiberEnumeration { count, factorizations })
}

fn to_points<T: Scalar>(set: &ProjectiveRootSet<T>) -> Vec<(RootPoint<T>, usize)> {
    let mut pts: Vec<(RootPoint<T>, usize)> =
        set.finite.iter().map(|&(z, m)| (RootPoint::Finite(z), m)).collect();
    if set.infinity > 0 {
        pts.push((RootPoint::Infinity, set.infinity));
    }
    pts
}

pub(crate) fn monic_from_points<T: Scalar>(
    points: &[(RootPoint<T>, usize)],
) -> HomogeneousPoly<T> {
    let mut finite = Vec::new();
    let mut infinity = 0usize;
    for &(p, m) in points {
        match p {
            RootPoint::Finite(z) => finite.push((z, m)),
            RootPoint::Infinity => infinity += m,
        }
    }
    from_roots(&finite, infinity, Complex::new(T::one(), T::zero()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch(k: &[usize], s: &[usize]) -> Architecture {
        Architecture::new(k.to_vec(), s.to_vec()).unwrap()
    }

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    #[test]
    fn mu_matches_the_closed_form_for_two_layers() {
        let a = arch(&[3, 2], &[2, 1]);
        let theta = vec![vec![2.0, -1.0, 3.0], vec![0.5, 4.0]];
        let (w1, w2) = (&theta[0], &theta[1]);
        let expect = vec![
            w2[0] * w1[0],
            w2[0] * w1[1],
            w2[0] * w1[2] + w2[1] * w1[0],
            w2[1] * w1[1],
            w2[1] * w1[2],
        ];
        assert_eq!(mu(&theta, &a).unwrap(), expect);

        assert_eq!(
            mu(&vec![vec![1.0, 1.0, 1.0], vec![1.0, 1.0]], &a).unwrap(),
            vec![1.0, 1.0, 2.0, 1.0, 1.0]
        );
        assert_eq!(
            mu(&vec![vec![1.0, 0.0, 0.0], vec![1.0, 0.0]], &a).unwrap(),
            vec![1.0, 0.0, 0.0, 0.0, 0.0]
        );
    }

    #[test]
    fn mu_is_multiplicative_in_layer_scalings() {
        let a = arch(&[2, 3, 2], &[2, 2, 1]);
        let theta = vec![vec![1.0, -0.5], vec![0.3, 2.0, 1.0], vec![-1.0, 0.25]];
        let scaled: Vec<Vec<f64>> = theta
            .iter()
            .zip([2.0, -3.0, 0.5])
            .map(|(w, c)| w.iter().map(|&v| c * v).collect())
            .collect();
        let base = mu(&theta, &a).unwrap();
        let expect: Vec<f64> = base.iter().map(|&v| v * 2.0 * -3.0 * 0.5).collect();
        let got = mu(&scaled, &a).unwrap();
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }

    #[test]
    fn zero_layer_maps_to_zero_filter() {
        let a = arch(&[3, 2], &[2, 1]);
        let theta = vec![vec![0.0, 0.0, 0.0], vec![1.0, 2.0]];
        assert_eq!(mu(&theta, &a).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn jacobian_is_identity_for_single_layer() {
        let a = arch(&[4], &[1]);
        let j = jacobian(&vec![vec![1.0, 2.0, 3.0, 4.0]], &a).unwrap();
        assert_eq!(j, DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn jacobian_agrees_with_finite_differences() {
        let a = arch(&[3, 2], &[2, 1]);
        let theta = vec![vec![0.7, -1.3, 0.4], vec![1.1, 0.6]];
        let j = jacobian(&theta, &a).unwrap();
        let h = 1e-6;
        let mut col = 0;
        for l in 0..2 {
            for i in 0..theta[l].len() {
                let mut plus = theta.clone();
                let mut minus = theta.clone();
                plus[l][i] += h;
                minus[l][i] -= h;
                let fp = mu(&plus, &a).unwrap();
                let fm = mu(&minus, &a).unwrap();
                for r in 0..5 {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    assert!(
                        (j[(r, col)] - fd).abs() < 1e-6 * (1.0 + fd.abs()),
                        "entry ({r}, {col})"
                    );
                }
                col += 1;
            }
        }
    }

    #[test]
    fn zero_first_layer_bounds_the_rank() {
        let a = arch(&[3, 2], &[2, 1]);
        let theta = vec![vec![0.0, 0.0, 0.0], vec![1.0, 2.0]];
        let j = jacobian(&theta, &a).unwrap();
        assert!(numerical_rank(&j, 1e-8) <= 3);
    }

    #[test]
    fn generic_point_has_full_rank_equal_to_dimension() {
        let a = arch(&[3, 2], &[2, 1]);
        let theta = vec![vec![0.9, 0.2, -1.4], vec![0.8, 1.7]];
        let j = jacobian(&theta, &a).unwrap();
        assert_eq!(numerical_rank(&j, 1e-8), a.dimension());
    }

    #[test]
    fn shared_hyperroot_is_critical_with_unit_chd() {
        // P_2 = x² + y², P_1 = (x² + y²)(x - y): shared 2-hyperroot value -1.
        let a = arch(&[4, 2], &[2, 1]);
        let p1 = embed(&[1.0, 0.0, 1.0], 1)
            .unwrap()
            .mul(&embed(&[1.0, -1.0], 1).unwrap());
        let theta = vec![p1.real_coeffs(), vec![1.0, 1.0]];
        let report = criticality(&theta, &a, &tol()).unwrap();
        assert!(report.is_critical);
        assert_eq!(report.chd, 1);
        assert_eq!(report.zero_layer, None);
        assert_eq!(report.gcd_factors[1].degree(), Some(1));

        let bound = rank_bound_check(&theta, &a, &tol(), 1e-8).unwrap();
        assert!(bound.bound_ok);
        assert!(bound.rank < a.dimension());
    }

    #[test]
    fn generic_point_is_regular() {
        let a = arch(&[3, 2], &[2, 1]);
        let theta = vec![vec![0.9, 0.2, -1.4], vec![0.8, 1.7]];
        let report = criticality(&theta, &a, &tol()).unwrap();
        assert!(!report.is_critical);
        assert_eq!(report.chd, 0);
    }

    #[test]
    fn zero_layer_reports_criticality() {
        let a = arch(&[3, 2], &[2, 1]);
        let theta = vec![vec![1.0, 2.0, 3.0], vec![0.0, 0.0]];
        let report = criticality(&theta, &a, &tol()).unwrap();
        assert!(report.is_critical);
        assert_eq!(report.zero_layer, Some(2));
        assert!(matches!(
            rank_bound_check(&theta, &a, &tol(), 1e-8).unwrap_err(),
            ParamError::ZeroLayer { layer: 2 }
        ));
    }

    #[test]
    fn single_layer_map_is_never_critical() {
        let a = arch(&[4], &[1]);
        let report = criticality(&vec![vec![1.0, 0.0, 0.0, -2.0]], &a, &tol()).unwrap();
        assert!(!report.is_critical);
    }

    #[test]
    fn fiber_of_smooth_point_is_a_singleton() {
        let a = arch(&[3, 2], &[2, 1]);
        let theta = vec![vec![0.9, 0.2, -1.4], vec![0.8, 1.7]];
        let w = mu(&theta, &a).unwrap();
        let f = enumerate_factorizations(&w, &a, 100_000, &tol()).unwrap();
        assert_eq!(f.count, 1);
    }

    #[test]
    fn fiber_of_singular_point_splits() {
        // x⁴ + 4y⁴: either complex 2-hyperroot can sit in the outer layer.
        let a = arch(&[3, 2], &[2, 1]);
        let f =
            enumerate_factorizations(&[1.0, 0.0, 0.0, 0.0, 4.0], &a, 100_000, &tol()).unwrap();
        assert!(f.count >= 2);
    }

    #[test]
    fn fiber_of_stride_one_pair_counts_root_splits() {
        // (x - y)(x + 2y) under (2,2),(1,1): either root in either layer.
        let a = arch(&[2, 2], &[1, 1]);
        let f = enumerate_factorizations(&[1.0, 1.0, -2.0], &a, 100_000, &tol()).unwrap();
        assert_eq!(f.count, 2);
    }
}
