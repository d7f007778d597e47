//! Batch free-space sampling and the connection radius.

use crate::error::{Error, Result};
use crate::geometry::{point_free, Config, World};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Dimension of the configuration space.
pub const DIM: usize = 2;

/// Draws allowed per requested sample before rejection sampling gives up.
pub const MAX_DRAWS_PER_SAMPLE: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerParams {
    /// Number of free samples (excluding start and goal).
    pub n: usize,
    /// Radius tuning factor, must exceed 1.
    pub gamma_s: f64,
    pub seed: u64,
}

impl SamplerParams {
    pub fn new(n: usize, seed: u64) -> Self {
        SamplerParams { n, gamma_s: 1.1, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::TooFewSamples(self.n));
        }
        if !(self.gamma_s > 1.0) {
            return Err(Error::InvalidParam(format!("gamma_s must exceed 1, got {}", self.gamma_s)));
        }
        Ok(())
    }
}

/// Samples with the start and goal appended: ids `0..n` are free samples,
/// `n` is the start and `n + 1` the goal.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    pub configs: Vec<Config>,
}

impl SampleSet {
    pub fn start_id(&self) -> usize {
        self.configs.len() - 2
    }

    pub fn goal_id(&self) -> usize {
        self.configs.len() - 1
    }

    pub fn free_samples(&self) -> &[Config] {
        &self.configs[..self.configs.len() - 2]
    }
}

/// Volume of the unit ball in `d` dimensions.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Draw one uniform free configuration, counting draws in `draws`.
pub fn draw_free<R: Rng + ?Sized>(
    world: &World,
    inflation: f64,
    rng: &mut R,
    draws: &mut usize,
    max_draws: usize,
) -> Option<Config> {
    while *draws < max_draws {
        *draws += 1;
        let p = Config::new(
            rng.gen_range(0.0..=world.bounds.width),
            rng.gen_range(0.0..=world.bounds.height),
        );
        if point_free(p, world, inflation) {
            return Some(p);
        }
    }
    None
}

/// Rejection-sample `n` free configurations (static obstacles only) and
/// append the start and goal.
pub fn sample_free<R: Rng + ?Sized>(
    world: &World,
    inflation: f64,
    n: usize,
    start: Config,
    goal: Config,
    rng: &mut R,
) -> Result<SampleSet> {
    for p in [start, goal] {
        if !point_free(p, world, inflation) {
            return Err(Error::NotFree { x: p.x, y: p.y });
        }
    }
    let max_draws = MAX_DRAWS_PER_SAMPLE.saturating_mul(n.max(1));
    let mut draws = 0;
    let mut configs = Vec::with_capacity(n + 2);
    while configs.len() < n {
        match draw_free(world, inflation, rng, &mut draws, max_draws) {
            Some(p) => configs.push(p),
            None => {
                return Err(Error::SamplingExhausted {
                    attempts: draws,
                    accepted: configs.len(),
                })
            }
        }
    }
    configs.push(start);
    configs.push(goal);
    Ok(SampleSet { configs })
}

/// PRM*-style connection radius
/// `gamma_s * 2 * (1 + 1/d)^(1/d) * (mu_free / zeta_d)^(1/d) * (ln n / n)^(1/d)`.
pub fn neighborhood_radius(n: usize, d: usize, mu_free: f64, gamma_s: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::TooFewSamples(n));
    }
    if !(mu_free > 0.0) {
        return Err(Error::EmptyFreeSpace(mu_free));
    }
    if d == 0 {
        return Err(Error::InvalidParam("dimension must be positive".into()));
    }
    let inv_d = 1.0 / d as f64;
    let n = n as f64;
    Ok(gamma_s
        * 2.0
        * (1.0 + inv_d).powf(inv_d)
        * (mu_free / unit_ball_volume(d)).powf(inv_d)
        * (n.ln() / n).powf(inv_d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::StaticObstacle;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radius_reference_value() {
        // Evaluated independently in double precision:
        // 1.1 * 2 * sqrt(1.5) * sqrt(10000 / pi) * sqrt(ln(1000) / 1000)
        let r = neighborhood_radius(1000, 2, 10000.0, 1.1).unwrap();
        assert!((r - 12.634610141826276).abs() < 1e-9, "{r}");
    }

    #[test]
    fn radius_linear_in_gamma_and_boundaries() {
        let a = neighborhood_radius(500, 2, 2500.0, 1.1).unwrap();
        let b = neighborhood_radius(500, 2, 2500.0, 2.2).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-12);
        assert!(neighborhood_radius(2, 2, 1.0, 1.1).is_ok());
        assert_eq!(neighborhood_radius(1, 2, 1.0, 1.1), Err(Error::TooFewSamples(1)));
        assert!(neighborhood_radius(10, 2, 0.0, 1.1).is_err());
    }

    #[test]
    fn unit_ball() {
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn empty_world_samples() {
        let w = World::empty(10.0, 10.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_free(&w, 0.0, 10, Config::new(1.0, 1.0), Config::new(9.0, 9.0), &mut rng).unwrap();
        assert_eq!(s.configs.len(), 12);
        assert!(s.free_samples().iter().all(|p| w.bounds.contains(*p)));
        assert_eq!(s.configs[s.start_id()], Config::new(1.0, 1.0));
        assert_eq!(s.configs[s.goal_id()], Config::new(9.0, 9.0));
    }

    #[test]
    fn deterministic_given_seed() {
        let w = World::empty(10.0, 10.0);
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            sample_free(&w, 0.0, 50, Config::new(1.0, 1.0), Config::new(9.0, 9.0), &mut rng).unwrap()
        };
        assert_eq!(run(3), run(3));
        assert_ne!(run(3), run(4));
    }

    #[test]
    fn nearly_full_world_gives_up() {
        let mut w = World::empty(10.0, 10.0);
        w.obstacles.push(StaticObstacle::from_origin_size(0.0, 0.0, 10.0, 9.9999));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = sample_free(&w, 0.0, 100, Config::new(1.0, 9.99995), Config::new(9.0, 9.99995), &mut rng);
        assert!(matches!(err, Err(Error::SamplingExhausted { .. })));
    }

    #[test]
    fn start_in_obstacle_rejected() {
        let mut w = World::empty(10.0, 10.0);
        w.obstacles.push(StaticObstacle::from_origin_size(0.0, 0.0, 5.0, 5.0));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_free(&w, 0.0, 10, Config::new(1.0, 1.0), Config::new(9.0, 9.0), &mut rng).is_err());
    }

    #[test]
    fn quadrant_histogram_is_uniform() {
        let w = World::empty(20.0, 20.0);
        let n = 20_000;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let s = sample_free(&w, 0.0, n, Config::new(1.0, 1.0), Config::new(2.0, 2.0), &mut rng).unwrap();
        let mut counts = [0usize; 4];
        for p in s.free_samples() {
            counts[(p.x >= 10.0) as usize + 2 * (p.y >= 10.0) as usize] += 1;
        }
        let expect = n as f64 / 4.0;
        let sigma = (n as f64 * 0.25 * 0.75).sqrt();
        for c in counts {
            assert!((c as f64 - expect).abs() < 3.0 * sigma, "{counts:?}");
        }
    }
}
