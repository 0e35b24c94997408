//! Orbit-assignment engine.
//!
//! A factorization of a polynomial according to an architecture assigns,
//! for each layer from the outermost down, a multiset of stride-`S_l`
//! hyperroot orbits of the remaining root supply; whatever is left feeds
//! the innermost layer. This module enumerates those assignments over the
//! actual (clustered) root multiset, either over the complex numbers or
//! restricted to conjugation-closed selections per layer, with an optional
//! lower bound on the number of real-valued instances per layer.

use num_complex::Complex;
use num_traits::{Float, Zero};
use std::ops::ControlFlow;

use crate::poly::{ProjectiveRootSet, RootPoint};
use crate::tol::Tolerances;
use crate::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Mode {
    /// Selections must be closed under conjugation (real factorizations).
    RealClosed,
    /// Free complex selections.
    Complex,
}

/// One layer of the assignment problem, in processing order (outermost
/// first).
#[derive(Clone, Copy, Debug)]
pub(crate) struct LayerSpec {
    pub stride: usize,
    /// Required degree of the selection in the compressed variables.
    pub budget: usize,
    /// Minimum number of real-valued orbit instances (with multiplicity).
    pub min_real: usize,
}

/// A complete assignment: per processed layer the chosen orbit values
/// with counts, and the leftover roots for the innermost layer.
#[derive(Clone, Debug)]
pub(crate) struct Assignment<T> {
    pub selections: Vec<Vec<(RootPoint<T>, usize)>>,
    pub remainder: ProjectiveRootSet<T>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct BudgetExceeded {
    pub cap: usize,
}

struct Pool<T> {
    finite: Vec<(Complex<T>, usize)>,
    infinity: usize,
}

impl<T: Scalar> Pool<T> {
    fn to_root_set(&self) -> ProjectiveRootSet<T> {
        let mut set = ProjectiveRootSet {
            finite: self.finite.iter().filter(|&&(_, m)| m > 0).cloned().collect(),
            infinity: self.infinity,
        };
        set.sort();
        set
    }
}

/// A selectable orbit class at the current layer.
struct Choice<T> {
    value: RootPoint<T>,
    /// Indices into the pool consumed per instance (empty for infinity).
    members: Vec<usize>,
    avail: usize,
    real: bool,
    /// Partner index for non-real values (set after sorting).
    conj: Option<usize>,
}

fn orbit_choices<T: Scalar>(pool: &Pool<T>, stride: usize, tol: &Tolerances<T>) -> Vec<Choice<T>> {
    let mut choices: Vec<Choice<T>> = Vec::new();
    let mut groups: Vec<(Complex<T>, Vec<usize>)> = Vec::new();
    for (idx, &(z, m)) in pool.finite.iter().enumerate() {
        if m == 0 || z.is_zero() {
            continue;
        }
        let image = z.powu(stride as u32);
        match groups
            .iter_mut()
            .find(|(v, _)| (*v - image).norm() <= tol.orbit * (T::one() + v.norm() + image.norm()))
        {
            Some((_, members)) => members.push(idx),
            None => groups.push((image, vec![idx])),
        }
    }
    for (_, members) in groups {
        if members.len() != stride {
            continue;
        }
        let avail = members.iter().map(|&i| pool.finite[i].1).min().unwrap();
        if avail == 0 {
            continue;
        }
        let mean = members
            .iter()
            .fold(Complex::<T>::zero(), |acc, &i| acc + pool.finite[i].0.powu(stride as u32))
            * Complex::new(T::from_usize(members.len()).unwrap().recip(), T::zero());
        let mut value = mean;
        let real = Float::abs(value.im) <= tol.real * (T::one() + value.norm());
        if real {
            value.im = T::zero();
        }
        choices.push(Choice { value: RootPoint::Finite(value), members, avail, real, conj: None });
    }
    if let Some(idx) = pool.finite.iter().position(|&(z, m)| z.is_zero() && m > 0) {
        let avail = pool.finite[idx].1 / stride;
        if avail > 0 {
            choices.push(Choice {
                value: RootPoint::Finite(Complex::zero()),
                members: vec![idx],
                avail,
                real: true,
                conj: None,
            });
        }
    }
    if pool.infinity / stride > 0 {
        choices.push(Choice {
            value: RootPoint::Infinity,
            members: Vec::new(),
            avail: pool.infinity / stride,
            real: true,
            conj: None,
        });
    }
    choices.sort_by(|a, b| {
        a.value.sort_key().partial_cmp(&b.value.sort_key()).unwrap_or(std::cmp::Ordering::Equal)
    });
    // Pair conjugate values.
    for i in 0..choices.len() {
        if choices[i].real || choices[i].conj.is_some() {
            continue;
        }
        if let RootPoint::Finite(v) = choices[i].value {
            let partner = (0..choices.len()).find(|&j| {
                j != i && !choices[j].real && choices[j].conj.is_none() && {
                    if let RootPoint::Finite(w) = choices[j].value {
                        (w - v.conj()).norm() <= tol.orbit * (T::one() + v.norm() + w.norm())
                    } else {
                        false
                    }
                }
            });
            if let Some(j) = partner {
                choices[i].conj = Some(j);
                choices[j].conj = Some(i);
            }
        }
    }
    choices
}

fn apply_choice<T: Scalar>(
    pool: &mut Pool<T>,
    choice: &Choice<T>,
    stride: usize,
    count: usize,
    remove: bool,
) {
    match choice.value {
        RootPoint::Infinity => {
            if remove {
                pool.infinity -= stride * count;
            } else {
                pool.infinity += stride * count;
            }
        }
        RootPoint::Finite(v) if v.is_zero() => {
            let idx = choice.members[0];
            if remove {
                pool.finite[idx].1 -= stride * count;
            } else {
                pool.finite[idx].1 += stride * count;
            }
        }
        RootPoint::Finite(_) => {
            for &idx in &choice.members {
                if remove {
                    pool.finite[idx].1 -= count;
                } else {
                    pool.finite[idx].1 += count;
                }
            }
        }
    }
}

struct Enumerator<'a, T, F> {
    layers: &'a [LayerSpec],
    mode: Mode,
    tol: &'a Tolerances<T>,
    cap: usize,
    nodes: usize,
    on_complete: F,
}

/// Enumerates assignments of the root multiset to the layer specs.
///
/// `on_complete` receives each complete assignment and may stop the
/// search early (`ControlFlow::Break`). Deterministic: choices are sorted
/// by value and counts are enumerated from high to low.
pub(crate) fn enumerate_assignments<T: Scalar, F>(
    roots: &ProjectiveRootSet<T>,
    layers: &[LayerSpec],
    mode: Mode,
    tol: &Tolerances<T>,
    cap: usize,
    on_complete: F,
) -> Result<usize, BudgetExceeded>
where
    F: FnMut(&Assignment<T>) -> ControlFlow<()>,
{
    let mut pool = Pool { finite: roots.finite.clone(), infinity: roots.infinity };
    let mut enumerator = Enumerator { layers, mode, tol, cap, nodes: 0, on_complete };
    let mut selections: Vec<Vec<(RootPoint<T>, usize)>> = Vec::new();
    match enumerator.layer(0, &mut pool, &mut selections) {
        Ok(()) | Err(Interrupt::Stop) => Ok(enumerator.nodes),
        Err(Interrupt::Budget) => Err(BudgetExceeded { cap }),
    }
}

enum Interrupt {
    Budget,
    Stop,
}

impl<T: Scalar, F> Enumerator<'_, T, F>
where
    F: FnMut(&Assignment<T>) -> ControlFlow<()>,
{
    fn layer(
        &mut self,
        depth: usize,
        pool: &mut Pool<T>,
        selections: &mut Vec<Vec<(RootPoint<T>, usize)>>,
    ) -> Result<(), Interrupt> {
        if depth == self.layers.len() {
            let assignment =
                Assignment { selections: selections.clone(), remainder: pool.to_root_set() };
            return match (self.on_complete)(&assignment) {
                ControlFlow::Continue(()) => Ok(()),
                ControlFlow::Break(()) => Err(Interrupt::Stop),
            };
        }
        let spec = self.layers[depth];
        let choices = orbit_choices(pool, spec.stride, self.tol);
        let mut picked: Vec<(usize, usize)> = Vec::new();
        self.select(depth, pool, selections, &choices, 0, spec.budget, 0, &mut picked)
    }

    #[allow(clippy::too_many_arguments)]
    fn select(
        &mut self,
        depth: usize,
        pool: &mut Pool<T>,
        selections: &mut Vec<Vec<(RootPoint<T>, usize)>>,
        choices: &[Choice<T>],
        idx: usize,
        budget_left: usize,
        real_count: usize,
        picked: &mut Vec<(usize, usize)>,
    ) -> Result<(), Interrupt> {
        self.nodes += 1;
        if self.nodes > self.cap {
            return Err(Interrupt::Budget);
        }
        let spec = self.layers[depth];
        if budget_left == 0 {
            if real_count < spec.min_real {
                return Ok(());
            }
            let selection: Vec<(RootPoint<T>, usize)> = picked
                .iter()
                .flat_map(|&(ci, n)| {
                    let mut v = vec![(choices[ci].value, n)];
                    if self.mode == Mode::RealClosed {
                        if let Some(cj) = choices[ci].conj {
                            v.push((choices[cj].value, n));
                        }
                    }
                    v
                })
                .collect();
            selections.push(selection);
            let result = self.layer(depth + 1, pool, selections);
            selections.pop();
            return result;
        }
        if idx == choices.len() {
            return Ok(());
        }
        let choice = &choices[idx];
        // In real mode, non-real values are driven by their partner with
        // the smaller index; unpaired non-real values cannot be selected.
        let skip = match self.mode {
            Mode::RealClosed => !choice.real && choice.conj.map_or(true, |j| j < idx),
            Mode::Complex => false,
        };
        if skip {
            return self.select(
                depth,
                pool,
                selections,
                choices,
                idx + 1,
                budget_left,
                real_count,
                picked,
            );
        }
        let pair = match (self.mode, choice.real) {
            (Mode::RealClosed, false) => choice.conj,
            _ => None,
        };
        let unit = if pair.is_some() { 2 } else { 1 };
        let max_by_avail = match pair {
            Some(j) => choice.avail.min(choices[j].avail),
            None => choice.avail,
        };
        let max_count = max_by_avail.min(budget_left / unit);
        for count in (0..=max_count).rev() {
            if count > 0 {
                apply_choice(pool, choice, spec.stride, count, true);
                if let Some(j) = pair {
                    apply_choice(pool, &choices[j], spec.stride, count, true);
                }
                picked.push((idx, count));
            }
            let new_real = real_count + if choice.real { count } else { 0 };
            let result = self.select(
                depth,
                pool,
                selections,
                choices,
                idx + 1,
                budget_left - unit * count,
                new_real,
                picked,
            );
            if count > 0 {
                picked.pop();
                apply_choice(pool, choice, spec.stride, count, false);
                if let Some(j) = pair {
                    apply_choice(pool, &choices[j], spec.stride, count, false);
                }
            }
            result?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{embed, roots};

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn collect_assignments(w: &[f64], layers: &[LayerSpec], mode: Mode) -> Vec<Assignment<f64>> {
        let p = embed(w, 1).unwrap();
        let set = roots(&p, &tol()).unwrap();
        let mut out = Vec::new();
        enumerate_assignments(&set, layers, mode, &tol(), 100_000, |a| {
            out.push(a.clone());
            ControlFlow::Continue(())
        })
        .unwrap();
        out
    }

    #[test]
    fn two_complex_hyperroots_give_two_complex_assignments() {
        // x⁴ + 4y⁴ has 2-hyperroot orbits ±2i; budget 1 at stride 2.
        let layers = [LayerSpec { stride: 2, budget: 1, min_real: 0 }];
        let found = collect_assignments(&[1.0, 0.0, 0.0, 0.0, 4.0], &layers, Mode::Complex);
        assert_eq!(found.len(), 2);
        // No conjugation-closed selection of odd budget exists.
        let real = collect_assignments(&[1.0, 0.0, 0.0, 0.0, 4.0], &layers, Mode::RealClosed);
        assert!(real.is_empty());
    }

    #[test]
    fn real_orbit_value_counts_as_real_instance() {
        // (x²+y²)(x²+xy-2y²): one real 2-hyperroot value (-1).
        let p = embed(&[1.0, 0.0, 1.0], 1).unwrap().mul(&embed(&[1.0, 1.0, -2.0], 1).unwrap());
        let set = roots(&p, &tol()).unwrap();
        let layers = [LayerSpec { stride: 2, budget: 1, min_real: 1 }];
        let mut count = 0;
        enumerate_assignments(&set, &layers, Mode::RealClosed, &tol(), 100_000, |a| {
            count += 1;
            assert_eq!(a.remainder.total(), 2);
            ControlFlow::Continue(())
        })
        .unwrap();
        assert_eq!(count, 1);
    }

    #[test]
    fn stride_one_layers_assign_individual_roots() {
        // (x-y)(x+2y) under two stride-1 layers of budget 1 each: 2 ways.
        let layers = [LayerSpec { stride: 1, budget: 1, min_real: 0 }];
        let found = collect_assignments(&[1.0, 1.0, -2.0], &layers, Mode::Complex);
        assert_eq!(found.len(), 2);
    }

    #[test]
    fn double_root_collapses_identical_assignments() {
        // (x-y)²: only one way to put one copy in each of two layers.
        let layers = [LayerSpec { stride: 1, budget: 1, min_real: 0 }];
        let found = collect_assignments(&[1.0, -2.0, 1.0], &layers, Mode::Complex);
        assert_eq!(found.len(), 1);
    }

    #[test]
    fn budget_cap_is_enforced() {
        let p = embed(&[1.0, 2.0, 3.0, -1.0, 0.5, 2.0, 1.0], 1).unwrap();
        let set = roots(&p, &tol()).unwrap();
        let layers = [
            LayerSpec { stride: 1, budget: 2, min_real: 0 },
            LayerSpec { stride: 1, budget: 2, min_real: 0 },
        ];
        let r = enumerate_assignments(&set, &layers, Mode::Complex, &tol(), 3, |_| {
            ControlFlow::Continue(())
        });
        assert!(r.is_err());
    }
}
