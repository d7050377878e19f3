use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Seeded sampler of `(x, y)`: `x` uniform in a ball, `y` uniform on the
/// unit sphere. The stream is ChaCha8 seeded from `seed`, so the points
/// are the same on every platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub seed: u64,
    /// Radius of the ball the base points are drawn from.
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_count() -> usize {
    25
}

fn default_radius() -> f64 {
    0.5
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler {
            count: default_count(),
            seed: 0,
            radius: default_radius(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// Rejections tolerated per requested sample before giving up.
const ATTEMPTS_PER_SAMPLE: usize = 1000;

fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

impl Sampler {
    pub fn new(count: usize, seed: u64) -> Self {
        Sampler {
            count,
            seed,
            ..Sampler::default()
        }
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    /// Draws `count` points in dimension `n` accepted by `admissible`.
    pub fn draw(&self, n: usize, admissible: impl Fn(&[f64], &[f64]) -> bool) -> Result<Vec<Sample>> {
        if self.count == 0 {
            return Err(Error::InvalidParameter("sample count must be at least 1".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.count);
        let budget = self.count * ATTEMPTS_PER_SAMPLE;
        let mut attempts = 0;
        while out.len() < self.count {
            if attempts == budget {
                return Err(Error::NoAdmissibleSamples { attempts });
            }
            attempts += 1;
            let dir = unit_vector(&mut rng, n);
            let r = self.radius * rng.gen::<f64>().powf(1.0 / n as f64);
            let x: Vec<f64> = dir.iter().map(|c| c * r).collect();
            let y = unit_vector(&mut rng, n);
            if admissible(&x, &y) {
                out.push(Sample { index: out.len(), x, y });
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_ball() {
        let s = Sampler::new(50, 7);
        let a = s.draw(3, |_, _| true).unwrap();
        let b = s.draw(3, |_, _| true).unwrap();
        assert_eq!(a, b);
        for p in &a {
            assert!(p.x.iter().map(|c| c * c).sum::<f64>().sqrt() <= 0.5);
            assert!((p.y.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-14);
        }
        assert_ne!(a, Sampler::new(50, 8).draw(3, |_, _| true).unwrap());
    }

    #[test]
    fn all_rejected() {
        let r = Sampler::new(2, 0).draw(3, |_, _| false);
        assert!(matches!(r, Err(Error::NoAdmissibleSamples { .. })));
    }

    #[test]
    fn rejection_keeps_indices_dense() {
        let pts = Sampler::new(10, 1).draw(3, |x, _| x[0] > 0.0).unwrap();
        assert!(pts.iter().enumerate().all(|(i, p)| p.index == i && p.x[0] > 0.0));
    }
}
