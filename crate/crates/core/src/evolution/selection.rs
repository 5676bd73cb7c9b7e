//! Mating and environmental selection.
//!
//! Objectives are handled in minimization form, `(-reward, exposure)`.
//! Environmental selection keeps whole non-dominated fronts while they fit and
//! truncates the splitting front either by reference-point niching or by
//! crowding distance. In both schemes the first copy of each distinct
//! objective vector is preferred over duplicates, so the distinct points of
//! the best front survive whenever there is room for them.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;

use super::params::Selection;
use crate::pareto::{crowding_distance, non_dominated_sort, Fitness};

fn objectives(f: &Fitness<f64>) -> [f64; 2] {
    [-f.reward, f.exposure]
}

fn objective_key(f: &Fitness<f64>) -> (u64, u64) {
    (f.reward.to_bits(), f.exposure.to_bits())
}

/// Simplex-lattice reference directions for two objectives with
/// `max(count - 1, 1)` divisions.
pub fn reference_points(count: usize) -> Vec<[f64; 2]> {
    let divisions = count.saturating_sub(1).max(1);
    (0..=divisions)
        .map(|j| {
            let w = j as f64 / divisions as f64;
            [w, 1.0 - w]
        })
        .collect()
}

/// Per-objective translation and scale from the ideal and nadir points of
/// the first front among `members`.
fn normalization(fits: &[Fitness<f64>], first_front: &[usize]) -> ([f64; 2], [f64; 2]) {
    let mut ideal = [f64::INFINITY; 2];
    let mut nadir = [f64::NEG_INFINITY; 2];
    for &i in first_front {
        let o = objectives(&fits[i]);
        for k in 0..2 {
            ideal[k] = ideal[k].min(o[k]);
            nadir[k] = nadir[k].max(o[k]);
        }
    }
    let mut scale = [1.0; 2];
    for k in 0..2 {
        let span = nadir[k] - ideal[k];
        if span > 1e-12 {
            scale[k] = span;
        }
    }
    (ideal, scale)
}

/// Closest reference direction (perpendicular distance) for a normalized point.
fn associate(point: [f64; 2], refs: &[[f64; 2]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, w) in refs.iter().enumerate() {
        let ww = w[0] * w[0] + w[1] * w[1];
        let t = (point[0] * w[0] + point[1] * w[1]) / ww;
        let dx = point[0] - t * w[0];
        let dy = point[1] - t * w[1];
        let d = (dx * dx + dy * dy).sqrt();
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn normalized(f: &Fitness<f64>, ideal: [f64; 2], scale: [f64; 2]) -> [f64; 2] {
    let o = objectives(f);
    [(o[0] - ideal[0]) / scale[0], (o[1] - ideal[1]) / scale[1]]
}

/// Picks `k` candidates by reference-point niching, updating niche counts.
fn niche_fill<R: Rng + ?Sized>(
    candidates: &[usize],
    mut k: usize,
    association: &dyn Fn(usize) -> (usize, f64),
    counts: &mut [usize],
    out: &mut Vec<usize>,
    rng: &mut R,
) {
    let mut groups: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for &c in candidates {
        let (j, d) = association(c);
        groups.entry(j).or_default().push((c, d));
    }
    while k > 0 && !groups.is_empty() {
        let min_count = groups.keys().map(|&j| counts[j]).min().expect("non-empty");
        let tied: Vec<usize> = groups
            .keys()
            .copied()
            .filter(|&j| counts[j] == min_count)
            .collect();
        let j = tied[rng.gen_range(0..tied.len())];
        let members = groups.get_mut(&j).expect("present");
        let pick = if counts[j] == 0 {
            members
                .iter()
                .enumerate()
                .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.1 .0.cmp(&b.1 .0)))
                .map(|(pos, _)| pos)
                .expect("non-empty group")
        } else {
            rng.gen_range(0..members.len())
        };
        let (chosen, _) = members.swap_remove(pick);
        if members.is_empty() {
            groups.remove(&j);
        }
        counts[j] += 1;
        out.push(chosen);
        k -= 1;
    }
}

/// Splits a front into first occurrences of objective vectors not yet
/// represented, and everything else.
fn split_duplicates(
    fits: &[Fitness<f64>],
    front: &[usize],
    represented: &mut HashSet<(u64, u64)>,
) -> (Vec<usize>, Vec<usize>) {
    let mut fresh = Vec::new();
    let mut repeats = Vec::new();
    for &i in front {
        if represented.insert(objective_key(&fits[i])) {
            fresh.push(i);
        } else {
            repeats.push(i);
        }
    }
    (fresh, repeats)
}

/// Chooses `n` survivors out of `fits` (parents and offspring together).
pub fn environmental_selection<R: Rng + ?Sized>(
    fits: &[Fitness<f64>],
    n: usize,
    mode: Selection,
    refs: &[[f64; 2]],
    rng: &mut R,
) -> Vec<usize> {
    if fits.len() <= n {
        return (0..fits.len()).collect();
    }
    let fronts = non_dominated_sort(fits);
    let mut selected = Vec::with_capacity(n);
    let mut last: &[usize] = &[];
    for front in &fronts {
        if selected.len() + front.len() <= n {
            selected.extend_from_slice(front);
            if selected.len() == n {
                return selected;
            }
        } else {
            last = front;
            break;
        }
    }
    let mut represented: HashSet<(u64, u64)> =
        selected.iter().map(|&i| objective_key(&fits[i])).collect();
    let (fresh, repeats) = split_duplicates(fits, last, &mut represented);
    match mode {
        Selection::ReferencePoint => {
            let (ideal, scale) = normalization(fits, &fronts[0]);
            let association = |i: usize| associate(normalized(&fits[i], ideal, scale), refs);
            let mut counts = vec![0usize; refs.len()];
            for &i in &selected {
                counts[association(i).0] += 1;
            }
            for pool in [fresh, repeats] {
                let k = n - selected.len();
                let mut picked = Vec::new();
                niche_fill(&pool, k, &association, &mut counts, &mut picked, rng);
                selected.extend(picked);
            }
        }
        Selection::CrowdingDistance => {
            let crowd = crowding_distance(fits, last);
            let dist =
                |i: usize| crowd[last.iter().position(|&x| x == i).expect("member of front")];
            for mut pool in [fresh, repeats] {
                pool.sort_by(|&a, &b| dist(b).total_cmp(&dist(a)).then(a.cmp(&b)));
                let k = (n - selected.len()).min(pool.len());
                selected.extend_from_slice(&pool[..k]);
            }
        }
    }
    selected
}

/// Reward-only truncation: best rewards first, distinct fitness before
/// duplicates.
pub fn reward_survivors(fits: &[Fitness<f64>], n: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..fits.len()).collect();
    order.sort_by(|&a, &b| fits[b].reward.total_cmp(&fits[a].reward).then(a.cmp(&b)));
    let mut seen = HashSet::new();
    let (mut fresh, mut repeats): (Vec<usize>, Vec<usize>) = (Vec::new(), Vec::new());
    for i in order {
        let key = (fits[i].reward.to_bits(), fits[i].length.to_bits());
        if seen.insert(key) {
            fresh.push(i);
        } else {
            repeats.push(i);
        }
    }
    fresh.extend(repeats);
    fresh.truncate(n);
    fresh
}

/// Rank and diversity of each population member, used by the tournament.
#[derive(Debug, Clone)]
pub struct Standing {
    pub rank: Vec<usize>,
    /// Larger is better.
    pub diversity: Vec<f64>,
}

pub fn assess(fits: &[Fitness<f64>], mode: Selection, refs: &[[f64; 2]]) -> Standing {
    let n = fits.len();
    let fronts = non_dominated_sort(fits);
    let mut rank = vec![0; n];
    for (r, front) in fronts.iter().enumerate() {
        for &i in front {
            rank[i] = r;
        }
    }
    let mut diversity = vec![0.0; n];
    match mode {
        Selection::CrowdingDistance => {
            for front in &fronts {
                for (&i, d) in front.iter().zip(crowding_distance(fits, front)) {
                    diversity[i] = d;
                }
            }
        }
        Selection::ReferencePoint => {
            if let Some(first) = fronts.first() {
                let (ideal, scale) = normalization(fits, first);
                let niche: Vec<usize> = fits
                    .iter()
                    .map(|f| associate(normalized(f, ideal, scale), refs).0)
                    .collect();
                let mut counts = vec![0usize; refs.len()];
                for &j in &niche {
                    counts[j] += 1;
                }
                for i in 0..n {
                    diversity[i] = -(counts[niche[i]] as f64);
                }
            }
        }
    }
    Standing { rank, diversity }
}

/// Binary tournament on (rank, diversity); exact ties are decided by a coin.
pub fn tournament<R: Rng + ?Sized>(standing: &Standing, rng: &mut R) -> usize {
    let n = standing.rank.len();
    let a = rng.gen_range(0..n);
    let b = rng.gen_range(0..n);
    let key = |i: usize| (standing.rank[i], -standing.diversity[i]);
    let (ka, kb) = (key(a), key(b));
    if ka.0 != kb.0 {
        return if ka.0 < kb.0 { a } else { b };
    }
    match ka.1.total_cmp(&kb.1) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if rng.gen_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}

/// Binary tournament on reward alone.
pub fn reward_tournament<R: Rng + ?Sized>(fits: &[Fitness<f64>], rng: &mut R) -> usize {
    let n = fits.len();
    let a = rng.gen_range(0..n);
    let b = rng.gen_range(0..n);
    match fits[a].reward.total_cmp(&fits[b].reward) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if rng.gen_bool(0.5) {
                a
            } else {
                b
            }
        }
    }
}
