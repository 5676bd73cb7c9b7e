//! Von Mises (circular normal) sampling.

use std::f64::consts::PI;

use rand::Rng;

use crate::scalar::normalize_angle;

/// Draws one angle from the von Mises distribution with the given mean and
/// concentration, using the Best–Fisher wrapped-Cauchy envelope. The result
/// lies in `[0, 2π)`.
pub fn sample_von_mises<R: Rng + ?Sized>(mean: f64, kappa: f64, rng: &mut R) -> f64 {
    debug_assert!(kappa > 0.0);
    let tau = 1.0 + (1.0 + 4.0 * kappa * kappa).sqrt();
    let rho = (tau - (2.0 * tau).sqrt()) / (2.0 * kappa);
    let r = (1.0 + rho * rho) / (2.0 * rho);
    loop {
        let u1: f64 = rng.gen();
        let u2: f64 = rng.gen();
        let z = (PI * u1).cos();
        let f = (1.0 + r * z) / (r + z);
        let c = kappa * (r - f);
        if c * (2.0 - c) - u2 > 0.0 || (c / u2).ln() + 1.0 - c >= 0.0 {
            let u3: f64 = rng.gen();
            let offset = f.clamp(-1.0, 1.0).acos();
            let theta = if u3 > 0.5 {
                mean + offset
            } else {
                mean - offset
            };
            return normalize_angle(theta);
        }
    }
}
