//! Coloring of orbit outcomes.
//!
//! Parameter pixels average one color per critical value: black when the
//! orbit is bounded, blue when `v_plus` escapes and red when `v_minus`
//! escapes. Both escaping therefore gives purple, one escaping a dark red or
//! dark blue.

use serde::Serialize;

use crate::dynamics::{OrbitResult, Outcome};
use crate::maps::MapParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Palette {
    pub plus_escape: [u8; 3],
    pub minus_escape: [u8; 3],
    /// Escape color for dynamical-plane renders.
    pub julia_escape: [u8; 3],
    /// Brightest gray used for bounded orbits that converge quickly.
    pub bounded_max_gray: u8,
    /// Overlay markers and degenerate parameters.
    pub marker: [u8; 3],
    pub center_marker: [u8; 3],
}

impl Default for Palette {
    fn default() -> Self {
        Palette {
            plus_escape: [0, 0, 255],
            minus_escape: [255, 0, 0],
            julia_escape: [255, 190, 60],
            bounded_max_gray: 72,
            marker: [255, 255, 255],
            center_marker: [255, 0, 0],
        }
    }
}

/// Fractional escape count. The bailout radius is measured through the
/// involution for inner escapes, `|a|^{1/n}/|z| > s` being the same event as
/// `|z| < t`.
pub fn smooth_escape_count(result: &OrbitResult, p: &MapParams, outer: f64) -> f64 {
    let k = result.iterations as f64;
    if result.pole {
        return k;
    }
    let z = result.final_value.norm();
    let mirrored = p.a().norm().powf(1.0 / p.n() as f64) / z;
    let radius = z.max(mirrored);
    if radius <= outer || outer <= 1.0 {
        return k;
    }
    let ratio = radius.ln() / outer.ln();
    (k + 1.0 - ratio.ln() / (p.n() as f64).ln()).max(0.0)
}

impl Palette {
    fn escape_shade(&self, result: &OrbitResult, p: &MapParams, max_iter: u32) -> f64 {
        let outer = crate::geometry::k_annulus(p).outer;
        let nu = smooth_escape_count(result, p, outer).min(max_iter as f64);
        1.0 - 0.75 * (1.0 + nu).ln() / (1.0 + max_iter as f64).ln()
    }

    /// Gray level for bounded orbits, from `log(1 + entry_iter)`.
    fn bounded_gray(&self, result: &OrbitResult, max_iter: u32) -> f64 {
        match (result.outcome, result.entry_iter) {
            (Outcome::AttractedToVPlus | Outcome::FixedVMinus, Some(entry)) => {
                let scale = (1.0 + entry as f64).ln() / (1.0 + max_iter as f64).ln();
                self.bounded_max_gray as f64 * scale.min(1.0)
            }
            _ => 0.0,
        }
    }

    fn orbit_rgb(&self, hue: [u8; 3], result: &OrbitResult, p: &MapParams, max_iter: u32) -> [f64; 3] {
        if result.outcome == Outcome::Escaped {
            let s = self.escape_shade(result, p, max_iter);
            hue.map(|h| h as f64 * s)
        } else {
            [self.bounded_gray(result, max_iter); 3]
        }
    }

    pub fn parameter_color(&self, plus: &OrbitResult, minus: &OrbitResult, p: &MapParams, max_iter: u32) -> [u8; 3] {
        let a = self.orbit_rgb(self.plus_escape, plus, p, max_iter);
        let b = self.orbit_rgb(self.minus_escape, minus, p, max_iter);
        [0, 1, 2].map(|i| ((a[i] + b[i]) / 2.0).round() as u8)
    }

    pub fn dynamical_color(&self, result: &OrbitResult, p: &MapParams, max_iter: u32) -> [u8; 3] {
        let rgb = self.orbit_rgb(self.julia_escape, result, p, max_iter);
        rgb.map(|v| v.round() as u8)
    }
}

/// Whether a rendered parameter color belongs to the bounded (gray) family.
pub fn is_gray(rgb: [u8; 3]) -> bool {
    rgb[0] == rgb[1] && rgb[1] == rgb[2]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::critical_orbits;
    use num_complex::Complex64;

    #[test]
    fn color_families() {
        let pal = Palette::default();
        // v_minus fixed, v_plus fixed: bounded gray.
        let p = MapParams::subfamily(3, Complex64::new(0.125, 0.0)).unwrap();
        let (plus, minus) = critical_orbits(&p, 256);
        let col = pal.parameter_color(&plus, &minus, &p, 256);
        assert!(is_gray(col));

        // v_minus escapes in the subfamily: dark red, half intensity at most.
        let p = MapParams::subfamily(3, Complex64::new(0.02, 0.2)).unwrap();
        let (plus, minus) = critical_orbits(&p, 256);
        let col = pal.parameter_color(&plus, &minus, &p, 256);
        assert!(col[0] > 0 && col[0] <= 128 && col[1] == 0 && col[2] == 0);

        // Both escape in a general slice: purple.
        let g = MapParams::general(5, Complex64::new(1000.0, 0.0), Complex64::new(0.5, 0.0)).unwrap();
        let (plus, minus) = critical_orbits(&g, 256);
        let col = pal.parameter_color(&plus, &minus, &g, 256);
        assert!(col[0] > 0 && col[2] > 0 && col[1] == 0);
    }
}
