//! Shortest bounded-curvature (Dubins) curves between oriented poses.
//!
//! A Dubins curve is a concatenation of three pieces, each either a circular
//! arc turning left (`L`), turning right (`R`), or a straight segment (`S`).
//! The shortest curve between two poses always belongs to one of six words:
//! `LSL`, `RSR`, `LSR`, `RSL`, `RLR`, `LRL`. All six are solved in closed form
//! here, in the normalized frame where the start sits at the origin and the
//! goal lies on the positive x-axis.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{normalize_angle, Real};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("turning radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("arc length {s} outside [0, {length}]")]
    OutOfRange { s: f64, length: f64 },
    #[error("a tour needs at least 2 poses, got {0}")]
    TooFewPoses(usize),
    #[error("expected {expected} segment radii, got {got}")]
    RadiusCount { expected: usize, got: usize },
}

/// Planar position plus heading. The heading is kept in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

impl<T: Real> Pose<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Pose {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    pub fn position(&self) -> [T; 2] {
        [self.x, self.y]
    }

    pub fn distance(&self, other: &Pose<T>) -> T {
        (other.x - self.x).hypot(other.y - self.y)
    }

    /// Smallest absolute angular difference between the two headings.
    pub fn heading_error(&self, other: &Pose<T>) -> T {
        let d = normalize_angle(other.theta - self.theta);
        d.min(T::two_pi() - d)
    }
}

/// Motion primitive of one piece of a Dubins word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Steer {
    Left,
    Straight,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "LSL")]
    Lsl,
    #[serde(rename = "RSR")]
    Rsr,
    #[serde(rename = "LSR")]
    Lsr,
    #[serde(rename = "RSL")]
    Rsl,
    #[serde(rename = "RLR")]
    Rlr,
    #[serde(rename = "LRL")]
    Lrl,
}

impl Family {
    /// Enumeration order, which is also the tie-break order.
    pub const ALL: [Family; 6] = [
        Family::Lsl,
        Family::Rsr,
        Family::Lsr,
        Family::Rsl,
        Family::Rlr,
        Family::Lrl,
    ];

    pub fn steering(self) -> [Steer; 3] {
        use Steer::*;
        match self {
            Family::Lsl => [Left, Straight, Left],
            Family::Rsr => [Right, Straight, Right],
            Family::Lsr => [Left, Straight, Right],
            Family::Rsl => [Right, Straight, Left],
            Family::Rlr => [Right, Left, Right],
            Family::Lrl => [Left, Right, Left],
        }
    }

    pub fn is_ccc(self) -> bool {
        matches!(self, Family::Rlr | Family::Lrl)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Lsl => "LSL",
            Family::Rsr => "RSR",
            Family::Lsr => "LSR",
            Family::Rsl => "RSL",
            Family::Rlr => "RLR",
            Family::Lrl => "LRL",
        };
        f.write_str(s)
    }
}

/// Pose reached after travelling `s` meters along one primitive.
pub fn advance<T: Real>(from: &Pose<T>, steer: Steer, radius: T, s: T) -> Pose<T> {
    let (sin_h, cos_h) = from.theta.sin_cos();
    match steer {
        Steer::Straight => Pose {
            x: from.x + s * cos_h,
            y: from.y + s * sin_h,
            theta: from.theta,
        },
        Steer::Left => {
            let h = from.theta + s / radius;
            let (sin_e, cos_e) = h.sin_cos();
            Pose::new(
                from.x + radius * (sin_e - sin_h),
                from.y + radius * (cos_h - cos_e),
                h,
            )
        }
        Steer::Right => {
            let h = from.theta - s / radius;
            let (sin_e, cos_e) = h.sin_cos();
            Pose::new(
                from.x + radius * (sin_h - sin_e),
                from.y + radius * (cos_e - cos_h),
                h,
            )
        }
    }
}

/// One primitive of a Dubins curve, anchored at its start pose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece<T> {
    pub steer: Steer,
    pub start: Pose<T>,
    pub length: T,
    pub radius: T,
}

impl<T: Real> Piece<T> {
    pub fn pose_at(&self, s: T) -> Pose<T> {
        advance(&self.start, self.steer, self.radius, s)
    }

    pub fn end(&self) -> Pose<T> {
        self.pose_at(self.length)
    }
}

/// Anything that can be sampled by arc length.
pub trait Curve<T: Real> {
    fn length(&self) -> T;

    fn sample(&self, s: T) -> Result<Pose<T>, GeometryError>;

    fn start_pose(&self) -> Pose<T>;

    fn end_pose(&self) -> Pose<T>;
}

fn out_of_range<T: Real>(s: T, length: T) -> GeometryError {
    GeometryError::OutOfRange {
        s: s.to_f64().unwrap_or(f64::NAN),
        length: length.to_f64().unwrap_or(f64::NAN),
    }
}

/// A single Dubins curve. `segments` holds the three piece lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DubinsPath<T> {
    pub family: Family,
    pub radius: T,
    pub segments: [T; 3],
    pub start: Pose<T>,
    pub length: T,
}

impl<T: Real> DubinsPath<T> {
    fn from_params(family: Family, start: Pose<T>, radius: T, params: [T; 3]) -> Self {
        let segments = params.map(|p| p * radius);
        DubinsPath {
            family,
            radius,
            segments,
            start,
            length: segments[0] + segments[1] + segments[2],
        }
    }

    /// The three primitives, each anchored at the pose where it begins.
    pub fn pieces(&self) -> [Piece<T>; 3] {
        let steer = self.family.steering();
        let mut at = self.start;
        let mut out = [Piece {
            steer: steer[0],
            start: at,
            length: T::zero(),
            radius: self.radius,
        }; 3];
        for i in 0..3 {
            out[i] = Piece {
                steer: steer[i],
                start: at,
                length: self.segments[i],
                radius: self.radius,
            };
            at = out[i].end();
        }
        out
    }
}

impl<T: Real> Curve<T> for DubinsPath<T> {
    fn length(&self) -> T {
        self.length
    }

    fn sample(&self, s: T) -> Result<Pose<T>, GeometryError> {
        if !(s >= T::zero() && s <= self.length) {
            return Err(out_of_range(s, self.length));
        }
        let mut rest = s;
        let pieces = self.pieces();
        for piece in &pieces[..2] {
            if rest <= piece.length {
                return Ok(piece.pose_at(rest));
            }
            rest = rest - piece.length;
        }
        Ok(pieces[2].pose_at(rest.min(pieces[2].length)))
    }

    fn start_pose(&self) -> Pose<T> {
        self.start
    }

    fn end_pose(&self) -> Pose<T> {
        self.pieces()[2].end()
    }
}

/// Length of a single Dubins curve.
pub fn path_length<T: Real>(path: &DubinsPath<T>) -> T {
    path.length
}

/// Tangent configurations produce squares that are zero up to rounding.
fn snap_square<T: Real>(v: T) -> Option<T> {
    if v < -T::lit(1e-10) {
        None
    } else {
        Some(v.max(T::zero()))
    }
}

fn snap_cosine<T: Real>(c: T) -> Option<T> {
    if c.abs() > T::one() + T::lit(1e-10) {
        None
    } else {
        Some(c.max(-T::one()).min(T::one()))
    }
}

/// Word parameters (normalized by the radius) for one family, or `None` when
/// the family has no solution for this configuration.
fn family_params<T: Real>(family: Family, alpha: T, beta: T, d: T) -> Option<[T; 3]> {
    let two = T::lit(2.0);
    let (sa, ca) = alpha.sin_cos();
    let (sb, cb) = beta.sin_cos();
    let c_ab = (alpha - beta).cos();
    let m = normalize_angle::<T>;
    match family {
        Family::Lsl => {
            let p_sq = two + d * d - two * c_ab + two * d * (sa - sb);
            let p_sq = snap_square(p_sq)?;
            let (vy, vx) = (cb - ca, d + sa - sb);
            if vx.hypot(vy) < T::lit(1e-9) {
                // Both turning circles coincide: a single arc.
                return Some([m(beta - alpha), T::zero(), T::zero()]);
            }
            let tmp = vy.atan2(vx);
            Some([m(tmp - alpha), p_sq.sqrt(), m(beta - tmp)])
        }
        Family::Rsr => {
            let p_sq = two + d * d - two * c_ab + two * d * (sb - sa);
            let p_sq = snap_square(p_sq)?;
            let (vy, vx) = (ca - cb, d - sa + sb);
            if vx.hypot(vy) < T::lit(1e-9) {
                return Some([m(alpha - beta), T::zero(), T::zero()]);
            }
            let tmp = vy.atan2(vx);
            Some([m(alpha - tmp), p_sq.sqrt(), m(tmp - beta)])
        }
        Family::Lsr => {
            let p_sq = -two + d * d + two * c_ab + two * d * (sa + sb);
            let p_sq = snap_square(p_sq)?;
            let p = p_sq.sqrt();
            let tmp = (-ca - cb).atan2(d + sa + sb) - (-two).atan2(p);
            Some([m(tmp - alpha), p, m(tmp - beta)])
        }
        Family::Rsl => {
            let p_sq = d * d - two + two * c_ab - two * d * (sa + sb);
            let p_sq = snap_square(p_sq)?;
            let p = p_sq.sqrt();
            let tmp = (ca + cb).atan2(d - sa - sb) - two.atan2(p);
            Some([m(alpha - tmp), p, m(beta - tmp)])
        }
        Family::Rlr => {
            let c = (T::lit(6.0) - d * d + two * c_ab + two * d * (sa - sb)) / T::lit(8.0);
            let c = snap_cosine(c)?;
            let p = m(T::two_pi() - c.acos());
            let t = m(alpha - (ca - cb).atan2(d - sa + sb) + p / two);
            Some([t, p, m(alpha - beta - t + p)])
        }
        Family::Lrl => {
            let c = (T::lit(6.0) - d * d + two * c_ab + two * d * (sb - sa)) / T::lit(8.0);
            let c = snap_cosine(c)?;
            let p = m(T::two_pi() - c.acos());
            let t = m(-alpha - (ca - cb).atan2(d + sa - sb) + p / two);
            Some([t, p, m(beta - alpha - t + p)])
        }
    }
}

/// The curve of one specific family, if it exists for this pose pair.
pub fn dubins_family<T: Real>(
    family: Family,
    start: Pose<T>,
    end: Pose<T>,
    radius: T,
) -> Option<DubinsPath<T>> {
    let dx = end.x - start.x;
    let dy = end.y - start.y;
    let d = dx.hypot(dy) / radius;
    let heading = if d > T::zero() {
        dy.atan2(dx)
    } else {
        T::zero()
    };
    let alpha = normalize_angle(start.theta - heading);
    let beta = normalize_angle(end.theta - heading);
    let mut params = family_params(family, alpha, beta, d)?;
    // An arc of 2π − ε is rounding noise around an empty arc.
    for (k, steer) in family.steering().iter().enumerate() {
        if *steer != Steer::Straight && params[k] > T::two_pi() - T::lit(1e-9) {
            params[k] = T::zero();
        }
    }
    let path = DubinsPath::from_params(family, start, radius, params);
    // Reject numerically inconsistent candidates (acos/atan2 branch noise
    // near the CCC feasibility boundary).
    let reached = path.end_pose();
    let tol = T::lit(1e-6) * (T::one() + radius);
    if reached.distance(&end) > tol || reached.heading_error(&end) > T::lit(1e-6) {
        return None;
    }
    Some(path)
}

/// Shortest Dubins curve from `start` to `end` with the given turning radius.
///
/// Ties go to the earlier family in [`Family::ALL`]. Identical poses yield a
/// zero-length curve rather than a full loop.
pub fn dubins_shortest<T: Real>(
    start: Pose<T>,
    end: Pose<T>,
    radius: T,
) -> Result<DubinsPath<T>, GeometryError> {
    if !(radius > T::zero()) || !radius.is_finite() {
        return Err(GeometryError::InvalidRadius(
            radius.to_f64().unwrap_or(f64::NAN),
        ));
    }
    let start = Pose::new(start.x, start.y, start.theta);
    let end = Pose::new(end.x, end.y, end.theta);
    if start.x == end.x && start.y == end.y && start.theta == end.theta {
        return Ok(DubinsPath::from_params(
            Family::Lsl,
            start,
            radius,
            [T::zero(); 3],
        ));
    }
    let mut best: Option<DubinsPath<T>> = None;
    for family in Family::ALL {
        if let Some(candidate) = dubins_family(family, start, end, radius) {
            if best.is_none_or(|b| candidate.length < b.length) {
                best = Some(candidate);
            }
        }
    }
    // At least one CSC word exists for distinct poses; the fallback only
    // triggers if every candidate was rejected by the endpoint check.
    Ok(best.unwrap_or_else(|| {
        let d = start.distance(&end) / radius;
        let heading = (end.y - start.y).atan2(end.x - start.x);
        let alpha = normalize_angle(start.theta - heading);
        let beta = normalize_angle(end.theta - heading);
        let params = family_params(Family::Lsl, alpha, beta, d)
            .or_else(|| family_params(Family::Rsr, alpha, beta, d))
            .expect("LSL or RSR always exists");
        DubinsPath::from_params(Family::Lsl, start, radius, params)
    }))
}

/// A tour-level chain of Dubins curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositePath<T> {
    pub curves: Vec<DubinsPath<T>>,
    pub total_length: T,
}

impl<T: Real> CompositePath<T> {
    pub fn from_curves(curves: Vec<DubinsPath<T>>) -> Self {
        let total_length = curves.iter().fold(T::zero(), |acc, c| acc + c.length);
        CompositePath {
            curves,
            total_length,
        }
    }

    /// Concatenation; the caller is responsible for pose continuity.
    pub fn concat(&self, other: &CompositePath<T>) -> Self {
        let mut curves = self.curves.clone();
        curves.extend(other.curves.iter().copied());
        Self::from_curves(curves)
    }

    /// Largest position/heading mismatch between consecutive curves.
    pub fn continuity_error(&self) -> (T, T) {
        self.curves
            .windows(2)
            .fold((T::zero(), T::zero()), |(dp, dh), w| {
                let a = w[0].end_pose();
                let b = w[1].start;
                (dp.max(a.distance(&b)), dh.max(a.heading_error(&b)))
            })
    }
}

impl<T: Real> Curve<T> for CompositePath<T> {
    fn length(&self) -> T {
        self.total_length
    }

    fn sample(&self, s: T) -> Result<Pose<T>, GeometryError> {
        if !(s >= T::zero() && s <= self.total_length) || self.curves.is_empty() {
            return Err(out_of_range(s, self.total_length));
        }
        let mut rest = s;
        let last = self.curves.len() - 1;
        for curve in &self.curves[..last] {
            if rest <= curve.length {
                return curve.sample(rest);
            }
            rest = rest - curve.length;
        }
        let tail = &self.curves[last];
        tail.sample(rest.min(tail.length))
    }

    fn start_pose(&self) -> Pose<T> {
        self.curves.first().map(|c| c.start).unwrap_or_default()
    }

    fn end_pose(&self) -> Pose<T> {
        self.curves.last().map(|c| c.end_pose()).unwrap_or_default()
    }
}

/// Chains `dubins_shortest` over consecutive poses; curve `i` uses `radii[i]`.
pub fn build_tour<T: Real>(
    poses: &[Pose<T>],
    radii: &[T],
) -> Result<CompositePath<T>, GeometryError> {
    if poses.len() < 2 {
        return Err(GeometryError::TooFewPoses(poses.len()));
    }
    if radii.len() != poses.len() - 1 {
        return Err(GeometryError::RadiusCount {
            expected: poses.len() - 1,
            got: radii.len(),
        });
    }
    let curves = poses
        .windows(2)
        .zip(radii)
        .map(|(w, &r)| dubins_shortest(w[0], w[1], r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CompositePath::from_curves(curves))
}

/// Total length of the chained tour without materializing the curves.
pub fn tour_length<T: Real>(poses: &[Pose<T>], radii: &[T]) -> Result<T, GeometryError> {
    if poses.len() < 2 {
        return Err(GeometryError::TooFewPoses(poses.len()));
    }
    let mut total = T::zero();
    for (w, &r) in poses.windows(2).zip(radii) {
        total = total + dubins_shortest(w[0], w[1], r)?.length;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};

    use proptest::prelude::*;

    use super::*;

    fn pose(x: f64, y: f64, t: f64) -> Pose<f64> {
        Pose::new(x, y, t)
    }

    #[test]
    fn collinear_aligned_is_a_straight_line() {
        let p = dubins_shortest(pose(0.0, 0.0, 0.0), pose(10.0, 0.0, 0.0), 1.0).unwrap();
        assert_eq!(p.family, Family::Lsl);
        assert!((p.length - 10.0).abs() < 1e-12);
        assert!(p.segments[0].abs() < 1e-12 && p.segments[2].abs() < 1e-12);
    }

    #[test]
    fn identical_poses_give_zero_length() {
        let p = dubins_shortest(pose(0.0, 0.0, 0.0), pose(0.0, 0.0, 0.0), 1.0).unwrap();
        assert_eq!(p.length, 0.0);
        assert_eq!(path_length(&p), 0.0);
        assert_eq!(p.sample(0.0).unwrap(), pose(0.0, 0.0, 0.0));
    }

    #[test]
    fn rejects_non_positive_radius() {
        let r = dubins_shortest(pose(0.0, 0.0, 0.0), pose(1.0, 0.0, 0.0), 0.0);
        assert!(matches!(r, Err(GeometryError::InvalidRadius(_))));
        let r = dubins_shortest(pose(0.0, 0.0, 0.0), pose(1.0, 0.0, 0.0), -1.0);
        assert!(r.is_err());
    }

    #[test]
    fn length_is_the_sum_of_parts() {
        // Quarter turn left at radius 2, 5 m straight, then whatever closes the word.
        let start = pose(0.0, 0.0, 0.0);
        let after_arc = advance(&start, Steer::Left, 2.0, PI);
        let after_straight = advance(&after_arc, Steer::Straight, 2.0, 5.0);
        let end = advance(&after_straight, Steer::Left, 2.0, 1.0);
        let p = dubins_family(Family::Lsl, start, end, 2.0).unwrap();
        assert!((p.segments[0] - PI).abs() < 1e-9);
        assert!((p.segments[1] - 5.0).abs() < 1e-9);
        assert!((p.segments[2] - 1.0).abs() < 1e-9);
        assert!((p.length - (PI + 5.0 + 1.0)).abs() < 1e-9);
    }

    #[test]
    fn samples_straight_and_quarter_circle() {
        let p = dubins_shortest(pose(0.0, 0.0, 0.0), pose(10.0, 0.0, 0.0), 1.0).unwrap();
        let mid = p.sample(5.0).unwrap();
        assert!((mid.x - 5.0).abs() < 1e-12 && mid.y.abs() < 1e-12 && mid.theta.abs() < 1e-12);

        let arc = dubins_shortest(pose(0.0, 0.0, 0.0), pose(1.0, 1.0, FRAC_PI_2), 1.0).unwrap();
        assert!((arc.length - FRAC_PI_2).abs() < 1e-9);
        let q = arc.sample(FRAC_PI_2).unwrap();
        assert!((q.x - 1.0).abs() < 1e-9 && (q.y - 1.0).abs() < 1e-9);
        assert!((q.theta - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn sample_outside_range_is_an_error() {
        let p = dubins_shortest(pose(0.0, 0.0, 0.0), pose(10.0, 0.0, 0.0), 1.0).unwrap();
        assert!(p.sample(-1e-9).is_err());
        assert!(p.sample(10.0 + 1e-9).is_err());
        assert!(p.sample(f64::NAN).is_err());
    }

    #[test]
    fn tour_requires_two_poses_and_matching_radii() {
        assert_eq!(
            build_tour::<f64>(&[pose(0.0, 0.0, 0.0)], &[]),
            Err(GeometryError::TooFewPoses(1))
        );
        assert!(matches!(
            build_tour(&[pose(0.0, 0.0, 0.0), pose(1.0, 0.0, 0.0)], &[1.0, 1.0]),
            Err(GeometryError::RadiusCount {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn tour_is_additive_and_continuous() {
        let poses = [
            pose(0.0, 0.0, 0.3),
            pose(6.0, 2.0, 2.0),
            pose(1.0, 7.0, 4.0),
        ];
        let radii = [1.0, 2.5];
        let tour = build_tour(&poses, &radii).unwrap();
        let a = dubins_shortest(poses[0], poses[1], 1.0).unwrap();
        let b = dubins_shortest(poses[1], poses[2], 2.5).unwrap();
        assert_eq!(tour.curves.len(), 2);
        assert!((tour.total_length - (a.length + b.length)).abs() < 1e-12);
        let (dp, dh) = tour.continuity_error();
        assert!(dp < 1e-9 && dh < 1e-9);
        assert!((tour_length(&poses, &radii).unwrap() - tour.total_length).abs() < 1e-12);
        let end = tour.sample(tour.total_length).unwrap();
        assert!(end.distance(&poses[2]) < 1e-9);
    }

    #[test]
    fn works_in_single_precision() {
        let p = dubins_shortest(
            Pose::new(0.0_f32, 0.0, 0.0),
            Pose::new(0.0_f32, 4.0, std::f32::consts::PI),
            1.0,
        )
        .unwrap();
        let q = dubins_shortest(pose(0.0, 0.0, 0.0), pose(0.0, 4.0, PI), 1.0).unwrap();
        assert!((p.length as f64 - q.length).abs() < 1e-4);
    }

    fn arb_pose() -> impl Strategy<Value = Pose<f64>> {
        (-20.0..20.0f64, -20.0..20.0f64, 0.0..std::f64::consts::TAU)
            .prop_map(|(x, y, t)| pose(x, y, t))
    }

    proptest! {
        #[test]
        fn shortest_beats_every_family(a in arb_pose(), b in arb_pose(), r in 0.5..4.0f64) {
            let best = dubins_shortest(a, b, r).unwrap();
            for fam in Family::ALL {
                if let Some(p) = dubins_family(fam, a, b, r) {
                    prop_assert!(best.length <= p.length + 1e-12);
                }
            }
            let end = best.sample(best.length).unwrap();
            prop_assert!(end.distance(&b) < 1e-6);
            prop_assert!(end.heading_error(&b) < 1e-6);
        }

        #[test]
        fn rigid_motion_invariance(a in arb_pose(), b in arb_pose(), r in 0.5..4.0f64,
                                   tx in -50.0..50.0f64, ty in -50.0..50.0f64,
                                   rot in 0.0..std::f64::consts::TAU) {
            let (s, c) = rot.sin_cos();
            let move_pose = |p: Pose<f64>| pose(
                c * p.x - s * p.y + tx,
                s * p.x + c * p.y + ty,
                p.theta + rot,
            );
            let l0 = dubins_shortest(a, b, r).unwrap().length;
            let l1 = dubins_shortest(move_pose(a), move_pose(b), r).unwrap().length;
            // Family switches near ties make the error proportional to length.
            prop_assert!((l0 - l1).abs() < 1e-9 * (1.0 + l0));
        }
    }
}
