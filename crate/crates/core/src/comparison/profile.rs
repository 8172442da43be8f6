use std::f64::consts::PI;
use std::fmt::Write as _;

use super::bubble::BubbleParam;
use crate::error::{Error, Result};
use crate::field::GAUSS_LEGENDRE5;

/// A radial function `ψ(|x|)` with the quantities the radial checks need.
pub trait Radial {
    fn value(&self, r: f64) -> f64;
    /// `ψ'(r)`.
    fn slope(&self, r: f64) -> f64;
    /// `∫_{B_r} e^ψ`.
    fn mass(&self, r: f64) -> f64;
    /// Sample radii for pointwise checks on `(0, radius]`.
    fn sample_radii(&self, radius: f64) -> Vec<f64> {
        (1..=256).map(|k| radius * k as f64 / 256.0).collect()
    }
    /// Whether `ψ` is non-increasing on `[0, radius]`.
    fn is_nonincreasing(&self, _radius: f64) -> bool {
        true
    }
}

impl Radial for BubbleParam {
    fn value(&self, r: f64) -> f64 {
        BubbleParam::value(self, r)
    }

    fn slope(&self, r: f64) -> f64 {
        BubbleParam::slope(self, r)
    }

    fn mass(&self, r: f64) -> f64 {
        BubbleParam::mass(self, r)
    }
}

/// Piecewise-linear radial profile through `(r_k, ψ_k)`, with `r_0 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    radii: Vec<f64>,
    values: Vec<f64>,
    /// Cumulative `∫_{B_{r_k}} e^ψ`.
    cumulative: Vec<f64>,
}

fn segment_mass(r0: f64, r1: f64, v0: f64, v1: f64) -> f64 {
    let h = r1 - r0;
    GAUSS_LEGENDRE5
        .iter()
        .map(|&(x, w)| {
            let r = r0 + x * h;
            w * 2.0 * PI * r * (v0 + x * (v1 - v0)).exp()
        })
        .sum::<f64>()
        * h
}

impl RadialProfile {
    pub fn new(radii: Vec<f64>, values: Vec<f64>) -> Result<RadialProfile> {
        if radii.len() != values.len() || radii.is_empty() {
            return Err(Error::PreconditionViolated("profile needs matching, non-empty radii and values".into()));
        }
        if radii[0] != 0.0 {
            return Err(Error::PreconditionViolated("profile radii must start at 0".into()));
        }
        if radii.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::PreconditionViolated("profile radii must be strictly increasing".into()));
        }
        if let Some(node) = values.iter().chain(&radii).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { node: node % values.len() });
        }
        let mut cumulative = Vec::with_capacity(radii.len());
        cumulative.push(0.0);
        for k in 1..radii.len() {
            let m = segment_mass(radii[k - 1], radii[k], values[k - 1], values[k]);
            cumulative.push(cumulative[k - 1] + m);
        }
        Ok(RadialProfile { radii, values, cumulative })
    }

    /// Samples `f` at `n + 1` equally spaced radii on `[0, radius]`.
    pub fn from_fn(f: impl Fn(f64) -> f64, radius: f64, n: usize) -> Result<RadialProfile> {
        let radii: Vec<f64> = (0..=n).map(|k| radius * k as f64 / n as f64).collect();
        let values = radii.iter().map(|&r| f(r)).collect();
        RadialProfile::new(radii, values)
    }

    /// Samples `f` at the given radii.
    pub fn sample(f: impl Fn(f64) -> f64, radii: Vec<f64>) -> Result<RadialProfile> {
        let values = radii.iter().map(|&r| f(r)).collect();
        RadialProfile::new(radii, values)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn outer_radius(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }

    pub fn is_strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0])
    }

    pub fn is_nonincreasing_profile(&self) -> bool {
        self.values.windows(2).all(|w| w[1] <= w[0])
    }

    /// Segment index containing `r` (clamped to the last segment).
    fn segment(&self, r: f64) -> usize {
        let k = self.radii.partition_point(|&x| x <= r);
        k.clamp(1, self.radii.len().max(2) - 1) - 1
    }

    /// Linear interpolation, constant beyond the outer radius.
    pub fn value_at(&self, r: f64) -> f64 {
        if self.radii.len() == 1 || r >= self.outer_radius() {
            return self.values[self.values.len() - 1];
        }
        let k = self.segment(r);
        let (r0, r1) = (self.radii[k], self.radii[k + 1]);
        let s = (r - r0) / (r1 - r0);
        self.values[k] + s * (self.values[k + 1] - self.values[k])
    }

    /// Largest `r` with `ψ(r) > t` for a non-increasing profile (0 when `t ≥ ψ(0)`).
    pub fn crossing_radius(&self, t: f64) -> f64 {
        if t >= self.values[0] {
            return 0.0;
        }
        for k in (0..self.values.len() - 1).rev() {
            let (v0, v1) = (self.values[k], self.values[k + 1]);
            if v1 > t {
                return self.radii[k + 1];
            }
            if v0 > t {
                return self.radii[k] + (v0 - t) / (v0 - v1) * (self.radii[k + 1] - self.radii[k]);
            }
        }
        self.outer_radius()
    }

    /// Adds a radial function to the profile, sampling on the union of the
    /// profile radii and `extra` equally spaced radii.
    pub fn plus(&self, f: impl Fn(f64) -> f64, extra: usize) -> Result<RadialProfile> {
        let outer = self.outer_radius();
        let mut radii: Vec<f64> = self.radii.clone();
        radii.extend((1..extra).map(|k| outer * k as f64 / extra as f64));
        radii.sort_by(f64::total_cmp);
        radii.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * outer);
        RadialProfile::sample(|r| self.value_at(r) + f(r), radii)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value\n");
        for (r, v) in self.radii.iter().zip(&self.values) {
            let _ = writeln!(out, "{r},{v}");
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<RadialProfile> {
        let mut radii = Vec::new();
        let mut values = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (n == 0 && line.starts_with('r')) {
                continue;
            }
            let mut parts = line.split(',');
            let parse = |s: Option<&str>| -> Result<f64> {
                s.and_then(|x| x.trim().parse().ok())
                    .ok_or_else(|| Error::PreconditionViolated(format!("bad profile row {}: {line}", n + 1)))
            };
            radii.push(parse(parts.next())?);
            values.push(parse(parts.next())?);
        }
        RadialProfile::new(radii, values)
    }
}

impl Radial for RadialProfile {
    fn value(&self, r: f64) -> f64 {
        self.value_at(r)
    }

    fn slope(&self, r: f64) -> f64 {
        if self.radii.len() == 1 || r >= self.outer_radius() {
            return 0.0;
        }
        let k = self.segment(r);
        (self.values[k + 1] - self.values[k]) / (self.radii[k + 1] - self.radii[k])
    }

    fn mass(&self, r: f64) -> f64 {
        if self.radii.len() == 1 {
            return PI * r * r * self.values[0].exp();
        }
        let r = r.min(self.outer_radius());
        let k = self.segment(r);
        self.cumulative[k] + segment_mass(self.radii[k], r, self.values[k], self.value_at(r))
    }

    /// Midpoints of the profile segments inside `(0, radius]`.
    fn sample_radii(&self, radius: f64) -> Vec<f64> {
        self.radii.windows(2).map(|w| 0.5 * (w[0] + w[1])).filter(|&r| r <= radius).collect()
    }

    fn is_nonincreasing(&self, radius: f64) -> bool {
        self.radii.iter().zip(self.values.windows(2)).filter(|(&r, _)| r < radius).all(|(_, w)| w[1] <= w[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_bubble_mass_matches_closed_form() {
        let b = BubbleParam::new(2.0).unwrap();
        let p = RadialProfile::from_fn(|r| b.value(r), 2.0, 2000).unwrap();
        assert!(p.is_strictly_decreasing());
        for r in [0.3, 1.0, 1.77, 2.0] {
            assert!((p.mass(r) - b.mass(r)).abs() < 1e-6 * b.mass(r), "{r}");
        }
    }

    #[test]
    fn crossing_radius_inverts_value() {
        let p = RadialProfile::new(vec![0.0, 1.0, 2.0], vec![3.0, 1.0, 0.0]).unwrap();
        assert_eq!(p.crossing_radius(5.0), 0.0);
        assert!((p.crossing_radius(2.0) - 0.5).abs() < 1e-15);
        assert!((p.crossing_radius(0.5) - 1.5).abs() < 1e-15);
        assert_eq!(p.crossing_radius(-1.0), 2.0);
    }

    #[test]
    fn rejects_bad_radii_and_round_trips_csv() {
        assert!(RadialProfile::new(vec![0.1, 1.0], vec![0.0, 0.0]).is_err());
        assert!(RadialProfile::new(vec![0.0, 1.0, 1.0], vec![0.0, 0.0, 0.0]).is_err());
        let p = RadialProfile::new(vec![0.0, 0.5, 1.25], vec![2.0, 1.0, -0.5]).unwrap();
        let back = RadialProfile::from_csv(&p.to_csv()).unwrap();
        assert_eq!(back.radii(), p.radii());
        assert_eq!(back.values(), p.values());
    }
}
