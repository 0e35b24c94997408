//! LCN architecture combinatorics.
//!
//! An architecture is a pair of integer sequences: filter sizes `k` and
//! strides `s`, one per layer. Everything here is exact integer
//! arithmetic: cumulative strides, reduction into a reduced architecture
//! plus stride-one sub-architectures, the dimension formula, the
//! thick/thin and Zariski-closed classification, the singular index set,
//! and containment between function spaces with shared strides.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArchError {
    #[error("architecture needs at least one layer")]
    Empty,
    #[error("filter sizes must be at least 2 (layer {layer} has k = {value})")]
    FilterTooSmall { layer: usize, value: usize },
    #[error("strides must be positive (layer {layer})")]
    NonPositiveStride { layer: usize },
    #[error("filter and stride lists differ in length: {k_len} vs {s_len}")]
    LengthMismatch { k_len: usize, s_len: usize },
    #[error("operation requires a reduced architecture")]
    NotReduced,
    #[error("stride vectors differ")]
    StrideMismatch,
    #[error("weighted filter totals differ: {left} vs {right}")]
    TotalDegreeMismatch { left: usize, right: usize },
}

#[derive(Serialize, Deserialize)]
struct RawArchitecture {
    k: Vec<usize>,
    s: Vec<usize>,
}

/// A validated LCN architecture.
///
/// The final stride is normalized to 1 on construction (it has no effect
/// on the function space); [`Architecture::final_stride_normalized`]
/// reports whether a normalization happened.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawArchitecture", into = "RawArchitecture")]
pub struct Architecture {
    k: Vec<usize>,
    s: Vec<usize>,
    cum: Vec<usize>,
    k_end: usize,
    s_end: usize,
    normalized: bool,
}

impl TryFrom<RawArchitecture> for Architecture {
    type Error = ArchError;
    fn try_from(raw: RawArchitecture) -> Result<Self, ArchError> {
        Architecture::new(raw.k, raw.s)
    }
}

impl From<Architecture> for RawArchitecture {
    fn from(a: Architecture) -> Self {
        RawArchitecture { k: a.k, s: a.s }
    }
}

impl Architecture {
    /// Validates filter sizes and strides (every `k_l >= 2`) and
    /// normalizes the final stride to 1.
    pub fn new(k: Vec<usize>, s: Vec<usize>) -> Result<Self, ArchError> {
        if let Some((layer, &value)) = k.iter().enumerate().find(|&(_, &v)| v < 2) {
            return Err(ArchError::FilterTooSmall { layer: layer + 1, value });
        }
        Self::build(k, s)
    }

    /// Like [`Architecture::new`] but permits filter size 1 (scalar
    /// layers). Singular strata of a function space are indexed by such
    /// tuples, so containment checks and parameterization need them.
    pub fn relaxed(k: Vec<usize>, s: Vec<usize>) -> Result<Self, ArchError> {
        if let Some((layer, _)) = k.iter().enumerate().find(|&(_, &v)| v < 1) {
            return Err(ArchError::FilterTooSmall { layer: layer + 1, value: 0 });
        }
        Self::build(k, s)
    }

    fn build(k: Vec<usize>, mut s: Vec<usize>) -> Result<Self, ArchError> {
        if k.is_empty() {
            return Err(ArchError::Empty);
        }
        if k.len() != s.len() {
            return Err(ArchError::LengthMismatch { k_len: k.len(), s_len: s.len() });
        }
        if let Some((layer, _)) = s.iter().enumerate().find(|&(_, &v)| v == 0) {
            return Err(ArchError::NonPositiveStride { layer: layer + 1 });
        }
        let last = s.len() - 1;
        let normalized = s[last] != 1;
        s[last] = 1;
        let mut cum = Vec::with_capacity(k.len());
        let mut acc = 1usize;
        for &stride in s.iter() {
            cum.push(acc);
            acc *= stride;
        }
        let s_end = acc;
        let k_end = 1 + k.iter().zip(&cum).map(|(&kl, &sl)| (kl - 1) * sl).sum::<usize>();
        Ok(Architecture { k, s, cum, k_end, s_end, normalized })
    }

    pub fn layer_count(&self) -> usize {
        self.k.len()
    }

    pub fn filter_sizes(&self) -> &[usize] {
        &self.k
    }

    pub fn strides(&self) -> &[usize] {
        &self.s
    }

    /// Cumulative strides `S_l = s_1 · ... · s_{l-1}` (so `S_1 = 1`).
    pub fn cumulative_strides(&self) -> &[usize] {
        &self.cum
    }

    /// End-to-end filter size `k = k_1 + Σ_{l≥2} (k_l - 1) S_l`; the
    /// ambient dimension of the function space.
    pub fn end_filter_size(&self) -> usize {
        self.k_end
    }

    /// End-to-end stride, the product of all strides.
    pub fn end_stride(&self) -> usize {
        self.s_end
    }

    /// True when the supplied final stride exceeded 1 and was replaced.
    pub fn final_stride_normalized(&self) -> bool {
        self.normalized
    }

    /// Dimension of the function space: `Σ k_l - (L - 1)`, independent of
    /// the strides.
    pub fn dimension(&self) -> usize {
        self.k.iter().sum::<usize>() - (self.layer_count() - 1)
    }

    pub fn is_stride_one(&self) -> bool {
        self.s.iter().all(|&v| v == 1)
    }

    /// Reduced means every stride before the last exceeds one.
    pub fn is_reduced(&self) -> bool {
        self.s[..self.s.len() - 1].iter().all(|&v| v > 1)
    }

    /// Weighted suffix sum `Σ_{l ≥ l0} (k_l - 1) S_l` for a 1-based layer
    /// index `l0`.
    pub fn weighted_suffix(&self, l0: usize) -> usize {
        (l0..=self.layer_count()).map(|l| (self.k[l - 1] - 1) * self.cum[l - 1]).sum()
    }

    /// Merges consecutive stride-one layers into a reduced architecture
    /// and records the stride-one sub-architecture of each merged block.
    pub fn reduce(&self) -> Reduction {
        let len = self.layer_count();
        // Block ends: layers with stride > 1, plus the final layer.
        let mut ends: Vec<usize> = (1..len).filter(|&l| self.s[l - 1] > 1).collect();
        ends.push(len);
        let mut reduced_k = Vec::with_capacity(ends.len());
        let mut reduced_s = Vec::with_capacity(ends.len());
        let mut groups = Vec::with_capacity(ends.len());
        let mut sub = Vec::with_capacity(ends.len());
        let mut start = 1usize;
        for &end in &ends {
            let block: Vec<usize> = (start..=end).collect();
            let merged = block.iter().map(|&l| self.k[l - 1] - 1).sum::<usize>() + 1;
            reduced_k.push(merged);
            reduced_s.push(self.s[end - 1]);
            let block_k: Vec<usize> = block.iter().map(|&l| self.k[l - 1]).collect();
            let ones = vec![1; block_k.len()];
            sub.push(Architecture::new(block_k, ones).expect("valid sub-architecture"));
            groups.push(block);
            start = end + 1;
        }
        let reduced = Architecture::new(reduced_k, reduced_s).expect("valid reduced architecture");
        debug_assert_eq!(reduced.k_end, self.k_end);
        debug_assert_eq!(reduced.s_end, self.s_end);
        Reduction { reduced, sub_architectures: sub, layer_groups: groups }
    }

    /// Full geometric classification of the function space.
    pub fn classify(&self) -> ClassificationReport {
        let reduction = self.reduce();
        let red = &reduction.reduced;
        let dimension = self.dimension();
        let thick = dimension == self.k_end;
        // Reduced architecture closed: every layer has odd filter size or a
        // stride gap larger than the prefix filter span.
        let reduced_closed = (1..=red.layer_count()).all(|l| {
            red.k[l - 1] % 2 == 1 || red.cum[l - 1] > prefix_span(red, l)
        });
        // Each stride-one block closed: at most one even filter size.
        let blocks_closed = reduction
            .sub_architectures
            .iter()
            .all(|a| a.k.iter().filter(|&&v| v % 2 == 0).count() <= 1);
        let singular_index_set = red.singular_index_set().expect("reduced by construction");
        let only_zero_singular = singular_index_set.is_empty();
        ClassificationReport {
            dimension,
            ambient_dim: self.k_end,
            thick,
            smooth: thick,
            zariski_closed: reduced_closed && blocks_closed,
            singular_index_set,
            only_zero_singular,
            final_stride_normalized: self.normalized,
        }
    }

    /// Enumerates the index set of singular strata: all filter tuples
    /// `k' ≠ k` with the same weighted total whose weighted suffix sums
    /// dominate those of `k`. Requires a reduced architecture.
    ///
    /// Depth-first over `k'_L, ..., k'_1`; the fixed weighted total and
    /// the suffix lower bounds keep the tree small.
    pub fn singular_index_set(&self) -> Result<Vec<Vec<usize>>, ArchError> {
        if !self.is_reduced() {
            return Err(ArchError::NotReduced);
        }
        let len = self.layer_count();
        let total = self.weighted_suffix(1);
        let mut out = Vec::new();
        let mut partial = vec![0usize; len];
        self.enumerate_suffix(len, 0, total, &mut partial, &mut out);
        out.retain(|kp| kp != &self.k);
        out.sort();
        Ok(out)
    }

    fn enumerate_suffix(
        &self,
        layer: usize,
        suffix_so_far: usize,
        total: usize,
        partial: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if layer == 1 {
            // S_1 = 1, so the first entry absorbs the remaining weight.
            let e1 = total - suffix_so_far;
            partial[0] = e1 + 1;
            out.push(partial.clone());
            return;
        }
        let sl = self.cum[layer - 1];
        let need = self.weighted_suffix(layer);
        let lower = need.saturating_sub(suffix_so_far).div_ceil(sl);
        let upper = (total - suffix_so_far) / sl;
        for e in lower..=upper {
            partial[layer - 1] = e + 1;
            self.enumerate_suffix(layer - 1, suffix_so_far + e * sl, total, partial, out);
        }
    }

    /// Compares the function spaces of two architectures sharing strides
    /// and weighted total: does `self` contain `other`?
    pub fn containment(&self, other: &Architecture) -> Result<Containment, ArchError> {
        if self.s != other.s {
            return Err(ArchError::StrideMismatch);
        }
        let (lt, rt) = (self.weighted_suffix(1), other.weighted_suffix(1));
        if lt != rt {
            return Err(ArchError::TotalDegreeMismatch { left: lt, right: rt });
        }
        if self.k == other.k {
            return Ok(Containment::Equal);
        }
        // self ⊋ other iff other's weighted suffixes dominate self's.
        let dominated = (2..=self.layer_count())
            .all(|l| other.weighted_suffix(l) >= self.weighted_suffix(l));
        if dominated {
            Ok(Containment::StrictlyContains)
        } else {
            Ok(Containment::Incomparable)
        }
    }
}

/// Result of merging consecutive stride-one layers.
#[derive(Clone, Debug, Serialize)]
pub struct Reduction {
    /// The reduced architecture (all strides before the last exceed one).
    pub reduced: Architecture,
    /// Stride-one sub-architecture of each merged block.
    pub sub_architectures: Vec<Architecture>,
    /// The merged blocks as 1-based layer indices, in order.
    pub layer_groups: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Containment {
    Equal,
    StrictlyContains,
    Incomparable,
}

/// Geometric classification of an LCN function space.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub dimension: usize,
    pub ambient_dim: usize,
    pub thick: bool,
    pub smooth: bool,
    pub zariski_closed: bool,
    /// Singular strata of the reduced architecture (`K`); each entry is a
    /// filter-size tuple with the reduced strides.
    #[serde(rename = "K")]
    pub singular_index_set: Vec<Vec<usize>>,
    /// True iff `K` is empty, i.e. the zero filter is the only singular
    /// point of the closure (for thin spaces).
    pub only_zero_singular: bool,
    /// Supplied final stride exceeded 1 and was silently replaced.
    pub final_stride_normalized: bool,
}

/// `Σ_{i < l} (k_i - 1) S_i`, the filter span of the first `l - 1` layers.
fn prefix_span(a: &Architecture, l: usize) -> usize {
    (1..l).map(|i| (a.k[i - 1] - 1) * a.cum[i - 1]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch(k: &[usize], s: &[usize]) -> Architecture {
        Architecture::new(k.to_vec(), s.to_vec()).unwrap()
    }

    #[test]
    fn validate_populates_derived_quantities() {
        let a = arch(&[3, 2], &[2, 1]);
        assert_eq!(a.layer_count(), 2);
        assert_eq!(a.cumulative_strides(), &[1, 2]);
        assert_eq!(a.end_filter_size(), 5);
        assert_eq!(a.end_stride(), 2);
        assert!(!a.final_stride_normalized());

        let b = arch(&[4], &[1]);
        assert_eq!(b.layer_count(), 1);
        assert_eq!(b.cumulative_strides(), &[1]);
        assert_eq!(b.end_filter_size(), 4);

        let c = arch(&[2, 2, 2], &[1, 2, 1]);
        assert_eq!(c.cumulative_strides(), &[1, 1, 2]);
        assert_eq!(c.end_filter_size(), 2 + 1 + 2);
    }

    #[test]
    fn validate_rejects_degenerate_input() {
        assert_eq!(
            Architecture::new(vec![1, 2], vec![1, 1]).unwrap_err(),
            ArchError::FilterTooSmall { layer: 1, value: 1 }
        );
        assert_eq!(Architecture::new(vec![], vec![]).unwrap_err(), ArchError::Empty);
        assert_eq!(
            Architecture::new(vec![2, 2], vec![0, 1]).unwrap_err(),
            ArchError::NonPositiveStride { layer: 1 }
        );
        assert_eq!(
            Architecture::new(vec![2, 2], vec![1]).unwrap_err(),
            ArchError::LengthMismatch { k_len: 2, s_len: 1 }
        );
    }

    #[test]
    fn final_stride_is_normalized_with_flag() {
        let a = Architecture::new(vec![3, 2], vec![2, 3]).unwrap();
        assert_eq!(a.strides(), &[2, 1]);
        assert!(a.final_stride_normalized());
        assert_eq!(a.end_stride(), 2);
        assert!(a.classify().final_stride_normalized);
    }

    #[test]
    fn reduce_merges_stride_one_blocks() {
        let r = arch(&[2, 2, 2], &[1, 2, 1]).reduce();
        assert_eq!(r.reduced.filter_sizes(), &[3, 2]);
        assert_eq!(r.reduced.strides(), &[2, 1]);
        assert_eq!(r.layer_groups, vec![vec![1, 2], vec![3]]);
        let subs: Vec<_> = r.sub_architectures.iter().map(|a| a.filter_sizes().to_vec()).collect();
        assert_eq!(subs, vec![vec![2, 2], vec![2]]);
        assert!(r.sub_architectures.iter().all(|a| a.is_stride_one()));

        let already = arch(&[3, 2], &[2, 1]);
        let r = already.reduce();
        assert_eq!(r.reduced, already);
        let subs: Vec<_> = r.sub_architectures.iter().map(|a| a.filter_sizes().to_vec()).collect();
        assert_eq!(subs, vec![vec![3], vec![2]]);

        let r = arch(&[2, 3, 2, 2], &[1, 2, 1, 1]).reduce();
        assert_eq!(r.reduced.filter_sizes(), &[4, 3]);
        assert_eq!(r.reduced.strides(), &[2, 1]);
    }

    #[test]
    fn reduce_preserves_end_to_end_data_and_is_idempotent() {
        for (k, s) in sweep(4, 5, 4) {
            let a = Architecture::new(k, s).unwrap();
            let r = a.reduce();
            assert_eq!(r.reduced.end_filter_size(), a.end_filter_size());
            assert_eq!(r.reduced.end_stride(), a.end_stride());
            assert!(r.reduced.is_reduced());
            assert_eq!(r.reduced.reduce().reduced, r.reduced);
            for (sub, merged) in r.sub_architectures.iter().zip(r.reduced.filter_sizes()) {
                assert_eq!(sub.end_filter_size(), *merged);
            }
        }
    }

    #[test]
    fn classification_of_minimal_examples() {
        let case = |k: &[usize], s: &[usize]| {
            let c = arch(k, s).classify();
            (c.thick, c.zariski_closed)
        };
        assert_eq!(case(&[3, 2], &[1, 1]), (true, true));
        assert_eq!(case(&[2, 2], &[1, 1]), (true, false));
        assert_eq!(case(&[3, 3], &[2, 1]), (false, true));
        assert_eq!(case(&[2, 2], &[2, 1]), (false, true));
        assert_eq!(case(&[2, 2, 2], &[1, 2, 1]), (false, false));
        assert_eq!(case(&[3, 2], &[2, 1]), (false, false));
    }

    #[test]
    fn smoothness_coincides_with_thickness() {
        for (k, s) in sweep(3, 4, 3) {
            let c = Architecture::new(k, s).unwrap().classify();
            assert_eq!(c.smooth, c.thick);
            assert_eq!(c.thick, c.dimension == c.ambient_dim);
        }
    }

    #[test]
    fn singular_index_set_examples() {
        assert_eq!(arch(&[3, 2], &[2, 1]).singular_index_set().unwrap(), vec![vec![1, 3]]);
        assert_eq!(arch(&[2, 2], &[2, 1]).singular_index_set().unwrap(), Vec::<Vec<usize>>::new());
        assert_eq!(arch(&[3, 3], &[2, 1]).singular_index_set().unwrap(), vec![vec![1, 4]]);
        assert_eq!(
            arch(&[2, 2, 2], &[1, 2, 1]).singular_index_set().unwrap_err(),
            ArchError::NotReduced
        );
    }

    /// Independent oracle: direct enumeration of every `k'` with entries
    /// bounded by the weighted total, checking the defining constraints.
    fn brute_force_index_set(a: &Architecture) -> Vec<Vec<usize>> {
        let len = a.layer_count();
        let total = a.weighted_suffix(1);
        let cum = a.cumulative_strides();
        let mut out = Vec::new();
        let mut kp = vec![1usize; len];
        loop {
            let tot: usize = kp.iter().zip(cum).map(|(&kl, &sl)| (kl - 1) * sl).sum();
            if tot == total && kp != a.filter_sizes() {
                let dominated = (2..=len).all(|l| {
                    let suff: usize =
                        (l..=len).map(|i| (kp[i - 1] - 1) * cum[i - 1]).sum();
                    suff >= a.weighted_suffix(l)
                });
                if dominated {
                    out.push(kp.clone());
                }
            }
            // odometer over 1..=total/S_l + 1
            let mut pos = 0;
            loop {
                if pos == len {
                    out.sort();
                    return out;
                }
                kp[pos] += 1;
                if (kp[pos] - 1) * cum[pos] <= total {
                    break;
                }
                kp[pos] = 1;
                pos += 1;
            }
        }
    }

    #[test]
    fn singular_index_set_matches_brute_force_and_emptiness_rule() {
        for (k, s) in sweep(3, 5, 4) {
            let a = Architecture::new(k, s).unwrap();
            if !a.is_reduced() {
                continue;
            }
            let fast = a.singular_index_set().unwrap();
            assert_eq!(fast, brute_force_index_set(&a), "arch {:?}/{:?}", a.k, a.s);
            let gap = (1..=a.layer_count())
                .all(|l| a.cumulative_strides()[l - 1] > prefix_span(&a, l));
            assert_eq!(fast.is_empty(), gap, "arch {:?}/{:?}", a.k, a.s);
        }
    }

    #[test]
    fn containment_trichotomy() {
        let a = arch(&[3, 2], &[2, 1]);
        let b = Architecture::relaxed(vec![1, 3], vec![2, 1]).unwrap();
        assert_eq!(a.containment(&b).unwrap(), Containment::StrictlyContains);
        assert_eq!(a.containment(&a).unwrap(), Containment::Equal);
        assert_eq!(b.containment(&a).unwrap(), Containment::Incomparable);

        let c = arch(&[3, 2], &[3, 1]);
        assert_eq!(a.containment(&c).unwrap_err(), ArchError::StrideMismatch);
        let d = arch(&[4, 2], &[2, 1]);
        assert_eq!(
            a.containment(&d).unwrap_err(),
            ArchError::TotalDegreeMismatch { left: 4, right: 5 }
        );
    }

    #[test]
    fn singular_strata_are_strictly_contained_and_lower_dimensional() {
        for (k, s) in sweep(3, 5, 3) {
            let a = Architecture::new(k, s).unwrap();
            if !a.is_reduced() {
                continue;
            }
            for kp in a.singular_index_set().unwrap() {
                let sub = Architecture::relaxed(kp, a.strides().to_vec()).unwrap();
                assert_eq!(a.containment(&sub).unwrap(), Containment::StrictlyContains);
                assert!(sub.dimension() < a.dimension());
            }
        }
    }

    #[test]
    fn stride_one_closedness_is_the_even_filter_count_rule() {
        for (k, s) in sweep(4, 5, 1) {
            let a = Architecture::new(k, s).unwrap();
            let evens = a.filter_sizes().iter().filter(|&&v| v % 2 == 0).count();
            assert_eq!(a.classify().zariski_closed, evens <= 1);
        }
    }

    /// Exhaustive sweep over architectures with `L <= max_len`,
    /// `2 <= k_l <= max_k`, `1 <= s_l <= max_s` (final stride fixed to 1).
    fn sweep(max_len: usize, max_k: usize, max_s: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
        let mut out = Vec::new();
        for len in 1..=max_len {
            let mut k = vec![2usize; len];
            loop {
                let mut s = vec![1usize; len];
                loop {
                    out.push((k.clone(), s.clone()));
                    // advance strides (last entry stays 1)
                    let mut pos = 0;
                    loop {
                        if pos + 1 >= len {
                            break;
                        }
                        s[pos] += 1;
                        if s[pos] <= max_s {
                            break;
                        }
                        s[pos] = 1;
                        pos += 1;
                    }
                    if pos + 1 >= len {
                        break;
                    }
                }
                let mut pos = 0;
                loop {
                    if pos == len {
                        break;
                    }
                    k[pos] += 1;
                    if k[pos] <= max_k {
                        break;
                    }
                    k[pos] = 2;
                    pos += 1;
                }
                if pos == len {
                    break;
                }
            }
        }
        out
    }
}
