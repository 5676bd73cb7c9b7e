//! Independent reference computations used to cross-check the solver.
//!
//! Nothing here shares code with the production kernels beyond the public
//! data types: the Dubins solver integrates its own kinematics and finds each
//! word by root bracketing, exposure is compared with a closed form, sorting
//! with a quadratic peel, and so on. The CLI `oracle` command and the test
//! suites both run these checks.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::evolution::sample_von_mises;
use crate::geometry::{build_tour, dubins_shortest, Curve, Family, Pose, Steer};
use crate::pareto::{dominates, hypervolume_2d, non_dominated_sort, Fitness};
use crate::sensing::{exposure, SensorField};

/// Outcome of one oracle check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckReport {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckReport {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// Names accepted by [`run_check`], in the order [`run_all`] runs them.
pub const CHECKS: [&str; 6] = [
    "dubins",
    "exposure-arctan",
    "dominance",
    "von-mises",
    "hypervolume",
    "chord-length",
];

fn wrap(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

// Unicycle kinematics at unit speed; kept apart from the geometry module on
// purpose.
fn drive(p: (f64, f64, f64), turn: i8, r: f64, s: f64) -> (f64, f64, f64) {
    let (x, y, h) = p;
    if turn == 0 {
        return (x + s * h.cos(), y + s * h.sin(), h);
    }
    let k = f64::from(turn);
    let e = h + k * s / r;
    (
        x + k * r * (e.sin() - h.sin()),
        y - k * r * (e.cos() - h.cos()),
        e,
    )
}

fn turn_of(s: Steer) -> i8 {
    match s {
        Steer::Left => 1,
        Steer::Straight => 0,
        Steer::Right => -1,
    }
}

fn center(p: (f64, f64, f64), turn: i8, r: f64) -> (f64, f64) {
    let k = f64::from(turn);
    (p.0 - k * r * p.2.sin(), p.1 + k * r * p.2.cos())
}

// Heading at point q on the circle around c for the given turn direction.
fn tangent_heading(c: (f64, f64), q: (f64, f64), turn: i8) -> f64 {
    let (ux, uy) = (q.0 - c.0, q.1 - c.1);
    if turn > 0 {
        ux.atan2(-uy)
    } else {
        (-ux).atan2(uy)
    }
}

// Arc angle needed to rotate heading `from` into `to` with the given turn.
fn sweep(from: f64, to: f64, turn: i8) -> f64 {
    wrap(f64::from(turn) * (to - from))
}

fn endpoint_error(a: (f64, f64, f64), b: &Pose<f64>) -> (f64, f64) {
    let pos = (a.0 - b.x).hypot(a.1 - b.y);
    let d = wrap(a.2 - b.theta);
    (pos, d.min(TAU - d))
}

/// A curve found by [`dubins_family_numeric`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericCurve {
    /// Piece lengths in meters.
    pub lengths: [f64; 3],
    pub length: f64,
    pub position_error: f64,
    pub heading_error: f64,
}

/// Every curve of one word joining `start` to `end`, found numerically.
///
/// The first arc angle is scanned on a fine grid, sign changes of a tangency
/// residual are refined by bisection, and each candidate is integrated
/// forward and kept only if it lands within 1e-6 of the goal.
pub fn dubins_family_numeric(
    family: Family,
    start: &Pose<f64>,
    end: &Pose<f64>,
    radius: f64,
) -> Vec<NumericCurve> {
    let steer = family.steering().map(turn_of);
    let p0 = (start.x, start.y, start.theta);
    let goal_c = center((end.x, end.y, end.theta), steer[2], radius);

    // Returns (residual, [t, p, q]) for a first arc angle t.
    let solve = |t: f64| -> (f64, [f64; 3]) {
        let p1 = drive(p0, steer[0], radius, t * radius);
        if steer[1] == 0 {
            let k = f64::from(steer[2]);
            let h = p1.2;
            let q = (
                goal_c.0 + k * radius * h.sin(),
                goal_c.1 - k * radius * h.cos(),
            );
            let (dx, dy) = (q.0 - p1.0, q.1 - p1.1);
            let cross = h.cos() * dy - h.sin() * dx;
            let along = h.cos() * dx + h.sin() * dy;
            (cross, [t, along, sweep(h, end.theta, steer[2])])
        } else {
            let c2 = center(p1, steer[1], radius);
            let gap = (c2.0 - goal_c.0).hypot(c2.1 - goal_c.1);
            let mid = ((c2.0 + goal_c.0) / 2.0, (c2.1 + goal_c.1) / 2.0);
            let h2 = tangent_heading(c2, mid, steer[1]);
            (
                gap - 2.0 * radius,
                [t, sweep(p1.2, h2, steer[1]), sweep(h2, end.theta, steer[2])],
            )
        }
    };

    let verify = |params: [f64; 3]| -> Option<NumericCurve> {
        let lengths = if steer[1] == 0 {
            if params[1] < -1e-9 {
                return None;
            }
            [params[0] * radius, params[1].max(0.0), params[2] * radius]
        } else {
            params.map(|a| a * radius)
        };
        let mut p = p0;
        for i in 0..3 {
            p = drive(p, steer[i], radius, lengths[i]);
        }
        let (pe, he) = endpoint_error(p, end);
        (pe < 1e-6 * (1.0 + radius) && he < 1e-6).then(|| NumericCurve {
            lengths,
            length: lengths.iter().sum(),
            position_error: pe,
            heading_error: he,
        })
    };

    const GRID: usize = 720;
    let mut found: Vec<NumericCurve> = Vec::new();
    let mut push = |c: Option<NumericCurve>| {
        if let Some(c) = c {
            if !found.iter().any(|f| (f.length - c.length).abs() < 1e-7) {
                found.push(c);
            }
        }
    };
    let at = |i: usize| TAU * i as f64 / GRID as f64;
    let residuals: Vec<f64> = (0..=GRID).map(|i| solve(at(i)).0).collect();
    for i in 0..=GRID {
        if residuals[i].abs() < 1e-12 {
            push(verify(solve(at(i)).1));
        } else if i > 0
            && residuals[i - 1].abs() >= 1e-12
            && residuals[i - 1].signum() != residuals[i].signum()
        {
            let (mut lo, mut hi, mut flo) = (at(i - 1), at(i), residuals[i - 1]);
            while hi - lo > 1e-15 {
                let mid = 0.5 * (lo + hi);
                let fm = solve(mid).0;
                if fm == 0.0 {
                    (lo, hi) = (mid, mid);
                } else if fm.signum() == flo.signum() {
                    (lo, flo) = (mid, fm);
                } else {
                    hi = mid;
                }
                if mid == lo && mid == hi {
                    break;
                }
            }
            push(verify(solve(wrap(0.5 * (lo + hi))).1));
        }
    }
    // Residuals that only touch zero (double roots) are missed by the sign
    // scan; local minima of |residual| get a second chance.
    for i in 1..GRID {
        let (a, b, c) = (
            residuals[i - 1].abs(),
            residuals[i].abs(),
            residuals[i + 1].abs(),
        );
        if b <= a && b <= c && b < 0.05 * radius.max(1.0) {
            let t = golden_min(|t| solve(t).0.abs(), at(i - 1), at(i + 1));
            push(verify(solve(t).1));
        }
    }
    found
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    wrap(0.5 * (a + b))
}

/// Result of comparing `dubins_shortest` with the numeric solver on one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DubinsComparison {
    pub endpoint_error: f64,
    pub heading_error: f64,
    pub length: f64,
    /// Shortest length among the numeric candidates of all six words.
    pub oracle_length: f64,
}

pub fn compare_dubins(start: &Pose<f64>, end: &Pose<f64>, radius: f64) -> DubinsComparison {
    let path = dubins_shortest(*start, *end, radius).expect("positive radius");
    let steer = path.family.steering().map(turn_of);
    let p = steer
        .iter()
        .zip(path.segments)
        .fold((start.x, start.y, start.theta), |p, (&turn, s)| {
            drive(p, turn, radius, s)
        });
    let (pe, he) = endpoint_error(p, end);
    let oracle_length = Family::ALL
        .iter()
        .flat_map(|f| dubins_family_numeric(*f, start, end, radius))
        .map(|c| c.length)
        .fold(f64::INFINITY, f64::min);
    DubinsComparison {
        endpoint_error: pe,
        heading_error: he,
        length: path.length,
        oracle_length,
    }
}

/// Random pose pair inside a 20 m box with a radius in `[0.5, 4]`.
pub fn random_pose_pair<R: Rng + ?Sized>(rng: &mut R) -> (Pose<f64>, Pose<f64>, f64) {
    let pose = |rng: &mut R| {
        Pose::new(
            rng.gen_range(-10.0..10.0),
            rng.gen_range(-10.0..10.0),
            rng.gen_range(0.0..TAU),
        )
    };
    let a = pose(rng);
    let b = pose(rng);
    (a, b, rng.gen_range(0.5..=4.0))
}

/// Exposure of a straight pass of `length` meters at perpendicular distance
/// `d` from a single node, centred on the foot of the perpendicular, for
/// `μ = 2` and no saturation.
pub fn straight_exposure_closed_form(alpha: f64, d: f64, length: f64) -> f64 {
    let h = length / 2.0;
    alpha / d * ((h / d).atan() - (-h / d).atan())
}

/// Numeric and exact exposure for the standard construction: node at
/// `(0, 5)`, straight path from `(-10, 0)` to `(10, 0)`, `α = 50`, `μ = 2`.
pub fn arctan_exposure(step: f64) -> (f64, f64) {
    let field = SensorField::new(vec![[0.0, 5.0]], 50.0, 2.0, 1e9).expect("valid field");
    let path = build_tour(
        &[Pose::new(-10.0, 0.0, 0.0), Pose::new(10.0, 0.0, 0.0)],
        &[1.0],
    )
    .expect("two poses");
    let numeric = exposure(&field, &path, step).expect("positive step");
    (numeric, straight_exposure_closed_form(50.0, 5.0, 20.0))
}

/// Layers of non-domination by repeated quadratic peeling. Indices within a
/// layer are ascending.
pub fn brute_force_fronts(points: &[Fitness<f64>]) -> Vec<Vec<usize>> {
    let mut left: Vec<usize> = (0..points.len()).collect();
    let mut fronts = Vec::new();
    while !left.is_empty() {
        let (front, rest): (Vec<usize>, Vec<usize>) = left.iter().partition(|&&i| {
            !left
                .iter()
                .any(|&j| j != i && dominates(&points[j], &points[i]))
        });
        fronts.push(front);
        left = rest;
    }
    fronts
}

/// Modified Bessel function of the first kind, integer order, by its power
/// series.
pub fn bessel_i(order: u32, x: f64) -> f64 {
    let half = x / 2.0;
    let mut term = half.powi(order as i32) / (1..=order).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..500u32 {
        term *= half * half / (f64::from(k) * f64::from(k + order));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Mean resultant length of `samples` angles.
pub fn mean_resultant_length(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let (c, s) = samples
        .iter()
        .fold((0.0, 0.0), |(c, s), a| (c + a.cos(), s + a.sin()));
    (c / n).hypot(s / n)
}

/// Probability of each of `bins` equal arcs of `[0, 2π)` under the von Mises
/// density, by Simpson's rule on the density itself.
pub fn von_mises_bin_probabilities(mean: f64, kappa: f64, bins: usize) -> Vec<f64> {
    let norm = 1.0 / (TAU * bessel_i(0, kappa));
    let pdf = |x: f64| norm * (kappa * (x - mean).cos()).exp();
    let w = TAU / bins as f64;
    (0..bins)
        .map(|b| {
            let (a, n) = (b as f64 * w, 64);
            let h = w / n as f64;
            let inner: f64 = (1..n)
                .map(|i| pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
                .sum();
            h / 3.0 * (pdf(a) + pdf(a + w) + inner)
        })
        .collect()
}

/// Pearson chi-square statistic of the samples against the von Mises
/// density over `bins` equal arcs.
pub fn von_mises_chi_square(samples: &[f64], mean: f64, kappa: f64, bins: usize) -> f64 {
    let mut counts = vec![0usize; bins];
    for &a in samples {
        let b = ((wrap(a) / TAU) * bins as f64) as usize;
        counts[b.min(bins - 1)] += 1;
    }
    let n = samples.len() as f64;
    von_mises_bin_probabilities(mean, kappa, bins)
        .iter()
        .zip(&counts)
        .map(|(p, &c)| {
            let e = p * n;
            (c as f64 - e).powi(2) / e
        })
        .sum()
}

/// Upper 1% point of the chi-square distribution with 49 degrees of
/// freedom (50 bins).
pub const CHI_SQUARE_49_1PCT: f64 = 74.9195;

/// Monte-Carlo estimate of the dominated area and its standard error,
/// sampling the box spanned by the reference and the front's extremes.
pub fn hypervolume_monte_carlo<R: Rng + ?Sized>(
    front: &[Fitness<f64>],
    reference: (f64, f64),
    samples: usize,
    rng: &mut R,
) -> (f64, f64) {
    let r_hi = front.iter().map(|f| f.reward).fold(reference.0, f64::max);
    let e_lo = front.iter().map(|f| f.exposure).fold(reference.1, f64::min);
    let area = (r_hi - reference.0) * (reference.1 - e_lo);
    if area <= 0.0 || samples == 0 {
        return (0.0, 0.0);
    }
    let hits = (0..samples)
        .filter(|_| {
            let r = rng.gen_range(reference.0..r_hi);
            let e = rng.gen_range(e_lo..reference.1);
            front.iter().any(|f| f.reward >= r && f.exposure <= e)
        })
        .count();
    let p = hits as f64 / samples as f64;
    (area * p, area * (p * (1.0 - p) / samples as f64).sqrt())
}

/// Sum of chord lengths between samples spaced at most `step` apart.
pub fn chord_length<C: Curve<f64>>(curve: &C, step: f64) -> f64 {
    let total = curve.length();
    let n = ((total / step).ceil() as usize).max(1);
    let mut prev = curve.start_pose();
    let mut sum = 0.0;
    for i in 1..=n {
        let s = (total * i as f64 / n as f64).min(total);
        let p = curve.sample(s).expect("within range");
        sum += prev.distance(&p);
        prev = p;
    }
    sum
}

/// Runs one named check. `n` scales the sample count; `None` picks the
/// default for that check. Unknown names yield `None`.
pub fn run_check(name: &str, n: Option<usize>, seed: u64) -> Option<CheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let report = match name {
        "dubins" => {
            let n = n.unwrap_or(2000);
            let (mut worst_end, mut worst_gap, mut worst_head) =
                (0.0f64, f64::NEG_INFINITY, 0.0f64);
            for _ in 0..n {
                let (a, b, r) = random_pose_pair(&mut rng);
                let c = compare_dubins(&a, &b, r);
                worst_end = worst_end.max(c.endpoint_error);
                worst_head = worst_head.max(c.heading_error);
                worst_gap = worst_gap.max(c.length - c.oracle_length);
            }
            CheckReport::new(
                name,
                worst_end < 1e-6 && worst_head < 1e-6 && worst_gap <= 1e-9,
                format!(
                    "{n} pairs: max endpoint error {worst_end:.3e}, max heading error {worst_head:.3e}, max excess over oracle {worst_gap:.3e}"
                ),
            )
        }
        "exposure-arctan" => {
            let (numeric, exact) = arctan_exposure(0.01);
            let rel = (numeric - exact).abs() / exact;
            CheckReport::new(
                name,
                rel <= 1e-4,
                format!("numeric {numeric:.8} exact {exact:.8} relative error {rel:.3e}"),
            )
        }
        "dominance" => {
            let n = n.unwrap_or(500);
            let points: Vec<Fitness<f64>> = (0..n)
                .map(|_| {
                    // Coarse values so that ties and duplicates occur.
                    Fitness::new(
                        f64::from(rng.gen_range(0..40u32)) / 4.0,
                        f64::from(rng.gen_range(0..400u32)) * 2.5,
                        0.0,
                    )
                })
                .collect();
            let fast = non_dominated_sort(&points);
            let slow = brute_force_fronts(&points);
            CheckReport::new(
                name,
                fast == slow,
                format!(
                    "{n} points: {} fronts sorted, {} by brute force",
                    fast.len(),
                    slow.len()
                ),
            )
        }
        "von-mises" => {
            let n = n.unwrap_or(1_000_000);
            let (kappa, mean) = (2.0, 1.0);
            let samples: Vec<f64> = (0..n)
                .map(|_| sample_von_mises(mean, kappa, &mut rng))
                .collect();
            let head = &samples[..n.min(100_000)];
            let rbar = mean_resultant_length(head);
            let expect = bessel_i(1, kappa) / bessel_i(0, kappa);
            let chi = von_mises_chi_square(&samples, mean, kappa, 50);
            CheckReport::new(
                name,
                (rbar - expect).abs() <= 0.01 && chi <= CHI_SQUARE_49_1PCT,
                format!(
                    "mean resultant length {rbar:.5} vs {expect:.5}; chi-square {chi:.2} (critical {CHI_SQUARE_49_1PCT}, {n} samples)"
                ),
            )
        }
        "hypervolume" => {
            let n = n.unwrap_or(1_000_000);
            let front: Vec<Fitness<f64>> = (0..50)
                .map(|_| {
                    let r: f64 = rng.gen_range(0.0..10.0);
                    Fitness::new(r, 100.0 * r + rng.gen_range(0.0..200.0), 0.0)
                })
                .collect();
            let reference = (-1.0, 1500.0);
            let exact = hypervolume_2d(&front, reference).expect("reference dominated");
            let (estimate, se) = hypervolume_monte_carlo(&front, reference, n, &mut rng);
            let dev = (estimate - exact).abs();
            CheckReport::new(
                name,
                dev <= 3.0 * se.max(1e-12),
                format!("sweep {exact:.4} monte-carlo {estimate:.4} ± {se:.4} ({n} samples)"),
            )
        }
        "chord-length" => {
            let n = n.unwrap_or(200);
            let mut worst = 0.0f64;
            for _ in 0..n {
                let poses: Vec<Pose<f64>> = (0..4).map(|_| random_pose_pair(&mut rng).0).collect();
                let radii: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..4.0)).collect();
                let path = build_tour(&poses, &radii).expect("valid tour");
                if path.length() > 0.0 {
                    let rel = (chord_length(&path, 0.05) - path.length()).abs() / path.length();
                    worst = worst.max(rel);
                }
            }
            CheckReport::new(
                name,
                worst <= 1e-3,
                format!("{n} tours: max relative gap between chord sum and length {worst:.3e}"),
            )
        }
        _ => return None,
    };
    Some(report)
}

/// Runs every check in [`CHECKS`] with default sizes.
pub fn run_all(seed: u64) -> Vec<CheckReport> {
    CHECKS
        .iter()
        .filter_map(|c| run_check(c, None, seed))
        .collect()
}
