//! Configuration-space primitives for a planar point robot.
//!
//! Static obstacles are axis-aligned rectangles. Collision queries inflate
//! them by the robot radius, so the robot itself is treated as a point. The
//! free set is closed: a point at distance exactly `inflation` from an
//! obstacle is free.

use serde::{Deserialize, Serialize};

/// A point in the plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Config {
    pub x: f64,
    pub y: f64,
}

impl Config {
    pub const fn new(x: f64, y: f64) -> Self {
        Config { x, y }
    }

    pub fn dist(&self, other: &Config) -> f64 {
        dist(*self, *other)
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Point at fraction `t` of the way from `self` to `other`.
    pub fn lerp(&self, other: &Config, t: f64) -> Config {
        Config::new(self.x + (other.x - self.x) * t, self.y + (other.y - self.y) * t)
    }
}

impl std::ops::Add for Config {
    type Output = Config;
    fn add(self, rhs: Config) -> Config {
        Config::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Config {
    type Output = Config;
    fn sub(self, rhs: Config) -> Config {
        Config::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Config {
    type Output = Config;
    fn mul(self, rhs: f64) -> Config {
        Config::new(self.x * rhs, self.y * rhs)
    }
}

/// Euclidean distance. This is also the edge cost used by every planner.
pub fn dist(u: Config, v: Config) -> f64 {
    let (dx, dy) = (v.x - u.x, v.y - u.y);
    (dx * dx + dy * dy).sqrt()
}

/// Axis-aligned rectangular obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticObstacle {
    pub min: Config,
    pub max: Config,
}

impl StaticObstacle {
    pub fn new(min: Config, max: Config) -> Self {
        StaticObstacle { min, max }
    }

    /// Rectangle from its lower-left corner and size.
    pub fn from_origin_size(x: f64, y: f64, w: f64, h: f64) -> Self {
        StaticObstacle::new(Config::new(x, y), Config::new(x + w, y + h))
    }

    pub fn area(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y)
    }

    pub fn is_valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min.x < self.max.x && self.min.y < self.max.y
    }

    /// Distance from `p` to the closed rectangle (zero inside).
    pub fn distance_to_point(&self, p: Config) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        (dx * dx + dy * dy).sqrt()
    }

    fn contains_strictly(&self, p: Config) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    /// Parameter interval of `a + t (b - a)`, `t` in [0, 1], lying in the closed rectangle.
    fn clip_segment(&self, a: Config, b: Config) -> Option<(f64, f64)> {
        let d = b - a;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for (p, q) in [
            (-d.x, a.x - self.min.x),
            (d.x, self.max.x - a.x),
            (-d.y, a.y - self.min.y),
            (d.y, self.max.y - a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return None;
                }
            }
        }
        Some((t0, t1))
    }

    /// Distance between segment `ab` and the closed rectangle.
    pub fn distance_to_segment(&self, a: Config, b: Config) -> f64 {
        if self.clip_segment(a, b).is_some() {
            return 0.0;
        }
        let corners = [
            self.min,
            Config::new(self.max.x, self.min.y),
            self.max,
            Config::new(self.min.x, self.max.y),
        ];
        corners
            .iter()
            .map(|c| point_segment_distance(*c, a, b))
            .fold(self.distance_to_point(a).min(self.distance_to_point(b)), f64::min)
    }

    /// True if `p` lies in the obstacle grown by `inflation` (open set).
    pub fn blocks_point(&self, p: Config, inflation: f64) -> bool {
        if inflation > 0.0 {
            self.distance_to_point(p) < inflation
        } else {
            self.contains_strictly(p)
        }
    }

    /// True if some point of segment `ab` lies in the obstacle grown by `inflation`.
    pub fn blocks_segment(&self, a: Config, b: Config, inflation: f64) -> bool {
        if inflation > 0.0 {
            return self.distance_to_segment(a, b) < inflation;
        }
        match self.clip_segment(a, b) {
            // a chord of a convex set touches the open interior iff its midpoint does
            Some((t0, t1)) => self.contains_strictly(a.lerp(&b, 0.5 * (t0 + t1))),
            None => false,
        }
    }
}

/// Distance from `p` to segment `ab`.
pub fn point_segment_distance(p: Config, a: Config, b: Config) -> f64 {
    let d = b - a;
    let len2 = d.x * d.x + d.y * d.y;
    if len2 == 0.0 {
        return dist(p, a);
    }
    let t = (((p.x - a.x) * d.x + (p.y - a.y) * d.y) / len2).clamp(0.0, 1.0);
    dist(p, a.lerp(&b, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MotionPolicy {
    /// Straight-line motion with a heading redrawn periodically and on wall contact.
    RandomDirection,
    /// Vertical motion that reverses at the ends of its hallway.
    VerticalSweep,
}

/// Moving disc obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicObstacle {
    pub center: Config,
    pub radius: f64,
    pub speed: f64,
    pub policy: MotionPolicy,
    /// Unit heading vector.
    pub heading: Config,
}

impl DynamicObstacle {
    pub fn is_valid(&self) -> bool {
        self.center.is_finite()
            && self.radius > 0.0
            && self.speed >= 0.0
            && (self.heading.norm() - 1.0).abs() < 1e-9
    }
}

/// Rectangular workspace `[0, width] x [0, height]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldBounds {
    pub width: f64,
    pub height: f64,
}

impl WorldBounds {
    pub fn contains(&self, p: Config) -> bool {
        p.x >= 0.0 && p.x <= self.width && p.y >= 0.0 && p.y <= self.height
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub bounds: WorldBounds,
    pub obstacles: Vec<StaticObstacle>,
    #[serde(default)]
    pub dynamic: Vec<DynamicObstacle>,
}

impl World {
    pub fn empty(width: f64, height: f64) -> Self {
        World {
            bounds: WorldBounds { width, height },
            obstacles: Vec::new(),
            dynamic: Vec::new(),
        }
    }

    /// Minimum distance from `p` to any static obstacle, `+inf` when there are none.
    pub fn clearance(&self, p: Config) -> f64 {
        self.obstacles
            .iter()
            .map(|o| o.distance_to_point(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// True iff `p` is inside the bounds and at distance `>= inflation` from
/// every static obstacle.
pub fn point_free(p: Config, world: &World, inflation: f64) -> bool {
    world.bounds.contains(p) && !world.obstacles.iter().any(|o| o.blocks_point(p, inflation))
}

/// Exact segment test against inflated rectangles.
pub fn segment_free(u: Config, v: Config, world: &World, inflation: f64) -> bool {
    world.bounds.contains(u)
        && world.bounds.contains(v)
        && !world.obstacles.iter().any(|o| o.blocks_segment(u, v, inflation))
}

/// Whether a tree node at `p` is blocked by `obstacle` under blocking radius `r_b`.
pub fn node_blocked_by(p: Config, obstacle: &DynamicObstacle, r_b: f64) -> bool {
    dist(p, obstacle.center) <= r_b
}

/// Area of the static free space estimated by midpoint rasterization on a
/// `resolution x resolution` grid. Dynamic obstacles are ignored.
pub fn free_space_measure(world: &World, inflation: f64, resolution: usize) -> f64 {
    let res = resolution.max(1);
    let cw = world.bounds.width / res as f64;
    let ch = world.bounds.height / res as f64;
    let mut free = 0usize;
    for j in 0..res {
        let y = (j as f64 + 0.5) * ch;
        // only rectangles overlapping this row can matter
        let row: Vec<&StaticObstacle> = world
            .obstacles
            .iter()
            .filter(|o| y > o.min.y - inflation && y < o.max.y + inflation)
            .collect();
        for i in 0..res {
            let p = Config::new((i as f64 + 0.5) * cw, y);
            if !row.iter().any(|o| o.blocks_point(p, inflation)) {
                free += 1;
            }
        }
    }
    free as f64 * cw * ch
}
