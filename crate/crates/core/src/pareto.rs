//! Dominance over (maximize reward, minimize exposure), non-dominated
//! sorting, diversity measures and 2D hypervolume.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParetoError {
    #[error("point {index} does not dominate the hypervolume reference")]
    ReferenceNotDominated { index: usize },
    #[error("front is empty")]
    EmptyFront,
}

/// Objective values of one solution. `length` is reported but is not an
/// objective; it only has to respect the travel budget.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Fitness<T> {
    pub reward: T,
    pub exposure: T,
    pub length: T,
}

impl<T: Real> Fitness<T> {
    pub fn new(reward: T, exposure: T, length: T) -> Self {
        Fitness {
            reward,
            exposure,
            length,
        }
    }

    pub fn same_objectives(&self, other: &Self) -> bool {
        self.reward == other.reward && self.exposure == other.exposure
    }
}

/// `a` dominates `b`: no worse in both objectives and strictly better in one.
pub fn dominates<T: Real>(a: &Fitness<T>, b: &Fitness<T>) -> bool {
    a.reward >= b.reward
        && a.exposure <= b.exposure
        && (a.reward > b.reward || a.exposure < b.exposure)
}

/// Fast non-dominated sort. Returns fronts as index lists into `points`,
/// each front in ascending index order.
pub fn non_dominated_sort<T: Real>(points: &[Fitness<T>]) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            if dominates(&points[i], &points[j]) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if dominates(&points[j], &points[i]) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut fronts = Vec::new();
    let mut current: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        next.sort_unstable();
        fronts.push(current);
        current = next;
    }
    fronts
}

/// Crowding distance within one front (indices into `points`). Boundary
/// solutions of each objective get `+∞`.
pub fn crowding_distance<T: Real>(points: &[Fitness<T>], front: &[usize]) -> Vec<T> {
    let m = front.len();
    let mut dist = vec![T::zero(); m];
    if m <= 2 {
        return vec![T::infinity(); m];
    }
    let objectives: [fn(&Fitness<T>) -> T; 2] = [|f| f.reward, |f| f.exposure];
    for obj in objectives {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| {
            obj(&points[front[a]])
                .partial_cmp(&obj(&points[front[b]]))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let lo = obj(&points[front[order[0]]]);
        let hi = obj(&points[front[order[m - 1]]]);
        dist[order[0]] = T::infinity();
        dist[order[m - 1]] = T::infinity();
        let span = hi - lo;
        if span <= T::zero() {
            continue;
        }
        for k in 1..m - 1 {
            let gap = obj(&points[front[order[k + 1]]]) - obj(&points[front[order[k - 1]]]);
            dist[order[k]] = dist[order[k]] + gap / span;
        }
    }
    dist
}

/// Area dominated by `front` and bounded by `reference` in
/// (reward, exposure) space.
pub fn hypervolume_2d<T: Real>(front: &[Fitness<T>], reference: (T, T)) -> Result<T, ParetoError> {
    let (r0, e0) = reference;
    let ref_point = Fitness::new(r0, e0, T::zero());
    for (index, p) in front.iter().enumerate() {
        if !dominates(p, &ref_point) {
            return Err(ParetoError::ReferenceNotDominated { index });
        }
    }
    let mut sorted: Vec<&Fitness<T>> = front.iter().collect();
    sorted.sort_by(|a, b| {
        b.reward
            .partial_cmp(&a.reward)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(
                a.exposure
                    .partial_cmp(&b.exposure)
                    .unwrap_or(std::cmp::Ordering::Equal),
            )
    });
    let mut area = T::zero();
    let mut ceiling = e0;
    for p in sorted {
        if p.exposure < ceiling {
            area = area + (p.reward - r0) * (ceiling - p.exposure);
            ceiling = p.exposure;
        }
    }
    Ok(area)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremes<T> {
    pub reward: (T, T),
    pub exposure: (T, T),
    pub length: (T, T),
}

/// Componentwise (min, max) over a non-empty set of fitness values.
pub fn extremes<'a, T: Real>(
    front: impl IntoIterator<Item = &'a Fitness<T>>,
) -> Result<Extremes<T>, ParetoError> {
    let mut iter = front.into_iter();
    let first = iter.next().ok_or(ParetoError::EmptyFront)?;
    let init = Extremes {
        reward: (first.reward, first.reward),
        exposure: (first.exposure, first.exposure),
        length: (first.length, first.length),
    };
    let widen = |(lo, hi): (T, T), v: T| (lo.min(v), hi.max(v));
    Ok(iter.fold(init, |acc, f| Extremes {
        reward: widen(acc.reward, f.reward),
        exposure: widen(acc.exposure, f.exposure),
        length: widen(acc.length, f.length),
    }))
}

/// A solution paired with its fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution<C, T> {
    pub solution: C,
    pub fitness: Fitness<T>,
}

/// Mutually non-dominated solutions, ascending by reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront<C, T> {
    pub solutions: Vec<Solution<C, T>>,
}

impl<C, T: Real> ParetoFront<C, T> {
    /// Keeps the non-dominated members of `candidates`, sorted by ascending
    /// reward (then ascending exposure, then input order).
    pub fn from_candidates(candidates: Vec<Solution<C, T>>) -> Self {
        let fits: Vec<Fitness<T>> = candidates.iter().map(|s| s.fitness).collect();
        let keep: Vec<bool> = (0..fits.len())
            .map(|i| !fits.iter().any(|other| dominates(other, &fits[i])))
            .collect();
        let mut solutions: Vec<(usize, Solution<C, T>)> = candidates
            .into_iter()
            .enumerate()
            .filter(|(i, _)| keep[*i])
            .collect();
        solutions.sort_by(|(ia, a), (ib, b)| {
            a.fitness
                .reward
                .partial_cmp(&b.fitness.reward)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(
                    a.fitness
                        .exposure
                        .partial_cmp(&b.fitness.exposure)
                        .unwrap_or(std::cmp::Ordering::Equal),
                )
                .then(ia.cmp(ib))
        });
        ParetoFront {
            solutions: solutions.into_iter().map(|(_, s)| s).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn fitnesses(&self) -> Vec<Fitness<T>> {
        self.solutions.iter().map(|s| s.fitness).collect()
    }

    pub fn extremes(&self) -> Result<Extremes<T>, ParetoError> {
        extremes(self.solutions.iter().map(|s| &s.fitness))
    }

    pub fn hypervolume(&self, reference: (T, T)) -> Result<T, ParetoError> {
        hypervolume_2d(&self.fitnesses(), reference)
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn fit(r: f64, e: f64) -> Fitness<f64> {
        Fitness::new(r, e, 0.0)
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&fit(5.0, 10.0), &fit(4.0, 12.0)));
        assert!(!dominates(&fit(5.0, 10.0), &fit(5.0, 10.0)));
        assert!(!dominates(&fit(5.0, 10.0), &fit(6.0, 8.0)));
        assert!(dominates(&fit(6.0, 8.0), &fit(5.0, 10.0)));
        // Length is not an objective.
        assert!(!dominates(
            &Fitness::new(1.0, 1.0, 1.0),
            &Fitness::new(1.0, 1.0, 9.0)
        ));
    }

    #[test]
    fn sorting_examples() {
        let flat = vec![fit(1.0, 1.0), fit(2.0, 2.0), fit(3.0, 3.0)];
        assert_eq!(non_dominated_sort(&flat), vec![vec![0, 1, 2]]);
        let chain = vec![fit(1.0, 3.0), fit(3.0, 1.0), fit(2.0, 2.0)];
        assert_eq!(non_dominated_sort(&chain), vec![vec![1], vec![2], vec![0]]);
        assert!(non_dominated_sort::<f64>(&[]).is_empty());
        let ties = vec![fit(1.0, 1.0), fit(1.0, 1.0)];
        assert_eq!(non_dominated_sort(&ties), vec![vec![0, 1]]);
    }

    #[test]
    fn crowding_marks_boundaries_infinite() {
        let pts = vec![fit(0.0, 0.0), fit(1.0, 1.0), fit(2.0, 4.0), fit(4.0, 5.0)];
        let d = crowding_distance(&pts, &[0, 1, 2, 3]);
        assert!(d[0].is_infinite() && d[3].is_infinite());
        assert!((d[1] - (2.0 / 4.0 + 4.0 / 5.0)).abs() < 1e-12);
        assert!((d[2] - (3.0 / 4.0 + 4.0 / 5.0)).abs() < 1e-12);
    }

    #[test]
    fn hypervolume_examples() {
        let hv = hypervolume_2d(&[fit(3.0, 2.0)], (0.0, 10.0)).unwrap();
        assert_eq!(hv, 3.0 * 8.0);
        let dup = hypervolume_2d(&[fit(3.0, 2.0), fit(3.0, 2.0)], (0.0, 10.0)).unwrap();
        assert_eq!(dup, hv);
        // Two steps: (1, 1) and (3, 5) against (0, 10): 3*5 + 1*4.
        let two = hypervolume_2d(&[fit(1.0, 1.0), fit(3.0, 5.0)], (0.0, 10.0)).unwrap();
        assert_eq!(two, 19.0);
        assert!(hypervolume_2d::<f64>(&[], (0.0, 1.0)).unwrap() == 0.0);
        assert_eq!(
            hypervolume_2d(&[fit(1.0, 1.0), fit(0.0, 10.0)], (0.0, 10.0)),
            Err(ParetoError::ReferenceNotDominated { index: 1 })
        );
    }

    #[test]
    fn extremes_examples() {
        let single = extremes(&[Fitness::new(2.0, 3.0, 4.0)]).unwrap();
        assert_eq!(single.reward, (2.0, 2.0));
        assert_eq!(single.length, (4.0, 4.0));
        let pair = [
            Fitness::new(1.4, 2682.81, 36.67),
            Fitness::new(7.6, 6671.75, 88.91),
        ];
        let ex = extremes(&pair).unwrap();
        assert_eq!(ex.reward, (1.4, 7.6));
        assert_eq!(ex.exposure, (2682.81, 6671.75));
        assert_eq!(ex.length, (36.67, 88.91));
        assert_eq!(extremes::<f64>(&[]), Err(ParetoError::EmptyFront));
    }

    #[test]
    fn front_filters_and_orders() {
        let cands = vec![
            Solution {
                solution: 'a',
                fitness: fit(3.0, 5.0),
            },
            Solution {
                solution: 'b',
                fitness: fit(1.0, 1.0),
            },
            Solution {
                solution: 'c',
                fitness: fit(2.0, 6.0),
            },
            Solution {
                solution: 'd',
                fitness: fit(2.0, 2.0),
            },
        ];
        let front = ParetoFront::from_candidates(cands);
        let ids: Vec<char> = front.solutions.iter().map(|s| s.solution).collect();
        assert_eq!(ids, vec!['b', 'd', 'a']);
    }

    fn arb_fit() -> impl Strategy<Value = Fitness<f64>> {
        // Coarse grid so ties occur.
        (0u8..6, 0u8..6).prop_map(|(r, e)| fit(r as f64, e as f64))
    }

    proptest! {
        #[test]
        fn dominance_is_a_strict_partial_order(a in arb_fit(), b in arb_fit(), c in arb_fit()) {
            prop_assert!(!dominates(&a, &a));
            prop_assert!(!(dominates(&a, &b) && dominates(&b, &a)));
            if dominates(&a, &b) && dominates(&b, &c) {
                prop_assert!(dominates(&a, &c));
            }
        }

        #[test]
        fn first_front_is_the_undominated_set(pts in proptest::collection::vec(arb_fit(), 0..60)) {
            let fronts = non_dominated_sort(&pts);
            let expected: Vec<usize> = (0..pts.len())
                .filter(|&i| !pts.iter().any(|p| dominates(p, &pts[i])))
                .collect();
            let first = fronts.first().cloned().unwrap_or_default();
            prop_assert_eq!(first, expected);
            let mut all: Vec<usize> = fronts.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..pts.len()).collect::<Vec<_>>());
        }

        #[test]
        fn hypervolume_is_monotone(pts in proptest::collection::vec((0.1..10.0f64, 0.0..99.0f64), 1..30),
                                   extra in (0.1..10.0f64, 0.0..99.0f64)) {
            let front: Vec<Fitness<f64>> = pts.iter().map(|&(r, e)| fit(r, e)).collect();
            let before = hypervolume_2d(&front, (0.0, 100.0)).unwrap();
            let mut more = front.clone();
            more.push(fit(extra.0, extra.1));
            let after = hypervolume_2d(&more, (0.0, 100.0)).unwrap();
            prop_assert!(after >= before - 1e-9);
        }
    }
}
