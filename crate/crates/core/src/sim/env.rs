//! Environment generators and obstacle motion.

use crate::geometry::{dist, Config, DynamicObstacle, MotionPolicy, StaticObstacle, World};
use crate::planner::PlannerParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{RobotSpec, Scenario, SimParams};

/// Seconds between heading redraws of a random-direction obstacle.
pub const REDRAW_PERIOD: f64 = 2.0;

pub const MAZE_SIZE: f64 = 30.0;
pub const MAZE_WALLS: usize = 3;
pub const MAZE_WALL_THICKNESS: f64 = 1.0;
pub const MAZE_GAP: f64 = 5.0;

pub const MINE_PILLAR: f64 = 20.0;
pub const MINE_HALLWAY: f64 = 8.0;
pub const MINE_COLS: usize = 6;
pub const MINE_ROWS: usize = 3;
pub const TRUCK_RADIUS: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Maze,
    Mine,
}

impl EnvKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EnvKind::Maze => "maze",
            EnvKind::Mine => "mine",
        }
    }

    pub fn scenario(self, seed: u64) -> Scenario {
        match self {
            EnvKind::Maze => maze_scenario(seed),
            EnvKind::Mine => mine_scenario(seed),
        }
    }
}

impl std::str::FromStr for EnvKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "maze" => Ok(EnvKind::Maze),
            "mine" => Ok(EnvKind::Mine),
            _ => Err(format!("unknown environment `{s}` (expected maze or mine)")),
        }
    }
}

fn random_heading<R: Rng>(rng: &mut R) -> Config {
    let a = rng.gen_range(0.0..std::f64::consts::TAU);
    Config::new(a.cos(), a.sin())
}

fn corridor_height() -> f64 {
    (MAZE_SIZE - MAZE_WALLS as f64 * MAZE_WALL_THICKNESS) / (MAZE_WALLS + 1) as f64
}

/// Center line of maze corridor `k`, counted from the bottom.
pub fn maze_corridor_y(k: usize) -> f64 {
    let h = corridor_height();
    k as f64 * (h + MAZE_WALL_THICKNESS) + h / 2.0
}

/// Serpentine maze: horizontal walls leave a gap alternately at the right and
/// left end. One obstacle per corridor starts at a fixed position and moves
/// in random directions (headings depend on `seed`).
pub fn make_maze(seed: u64) -> World {
    let mut world = World::empty(MAZE_SIZE, MAZE_SIZE);
    let h = corridor_height();
    for k in 0..MAZE_WALLS {
        let y = (k + 1) as f64 * h + k as f64 * MAZE_WALL_THICKNESS;
        let x = if k % 2 == 0 { 0.0 } else { MAZE_GAP };
        world.obstacles.push(StaticObstacle::from_origin_size(
            x,
            y,
            MAZE_SIZE - MAZE_GAP,
            MAZE_WALL_THICKNESS,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..=MAZE_WALLS {
        let x = if k % 2 == 0 { 20.0 } else { 10.0 };
        world.dynamic.push(DynamicObstacle {
            center: Config::new(x, maze_corridor_y(k)),
            radius: 0.5,
            speed: 1.0,
            policy: MotionPolicy::RandomDirection,
            heading: random_heading(&mut rng),
        });
    }
    world
}

pub fn maze_scenario(seed: u64) -> Scenario {
    let robot = RobotSpec { speed: 2.0, radius: 0.5 };
    let last = if MAZE_WALLS % 2 == 0 { MAZE_SIZE - 3.0 } else { 3.0 };
    Scenario {
        env: Some(EnvKind::Maze),
        world: make_maze(seed),
        start: Config::new(3.0, maze_corridor_y(0)),
        goal: Config::new(last, maze_corridor_y(MAZE_WALLS)),
        robot,
        planner: PlannerParams::new(2.0, 10.0, robot.radius),
        sim: SimParams::new(robot.radius, 300.0),
        seed,
        min_spacing: 2.0 * robot.radius,
    }
}

/// Room-and-pillar layout: a grid of square pillars separated by hallways,
/// with trucks driving up or down the interior vertical hallways.
pub fn make_mine(seed: u64) -> World {
    let pitch = MINE_PILLAR + MINE_HALLWAY;
    let width = MINE_HALLWAY + MINE_COLS as f64 * pitch;
    let height = MINE_HALLWAY + MINE_ROWS as f64 * pitch;
    let mut world = World::empty(width, height);
    for r in 0..MINE_ROWS {
        for c in 0..MINE_COLS {
            world.obstacles.push(StaticObstacle::from_origin_size(
                MINE_HALLWAY + c as f64 * pitch,
                MINE_HALLWAY + r as f64 * pitch,
                MINE_PILLAR,
                MINE_PILLAR,
            ));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for c in 1..MINE_COLS {
        let x = c as f64 * pitch + MINE_HALLWAY / 2.0;
        let y = rng.gen_range(TRUCK_RADIUS..height - TRUCK_RADIUS);
        let down = y > height / 2.0;
        world.dynamic.push(DynamicObstacle {
            center: Config::new(x, y),
            radius: TRUCK_RADIUS,
            speed: 2.0,
            policy: MotionPolicy::VerticalSweep,
            heading: Config::new(0.0, if down { -1.0 } else { 1.0 }),
        });
    }
    world
}

pub fn mine_scenario(seed: u64) -> Scenario {
    let robot = RobotSpec { speed: 4.0, radius: 1.5 };
    let world = make_mine(seed);
    let half = MINE_HALLWAY / 2.0;
    let start = Config::new(half, half);
    let goal = Config::new(world.bounds.width - half, world.bounds.height - half);
    Scenario {
        env: Some(EnvKind::Mine),
        world,
        start,
        goal,
        robot,
        planner: PlannerParams::new(14.0, 50.0, robot.radius),
        sim: SimParams::new(robot.radius, 400.0),
        seed,
        min_spacing: 2.0 * robot.radius,
    }
}

/// Advances the dynamic obstacles of a world. Owns the RNG stream used for
/// heading redraws and the per-obstacle redraw clocks.
#[derive(Debug, Clone)]
pub struct ObstacleMotion {
    rng: ChaCha8Rng,
    since_redraw: Vec<f64>,
}

/// Heading redraws tried before an obstacle gives up moving for a tick.
const REDRAW_TRIES: usize = 32;

impl ObstacleMotion {
    pub fn new(seed: u64, obstacles: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        ObstacleMotion { rng, since_redraw: vec![0.0; obstacles] }
    }

    fn fits(world: &World, o: &DynamicObstacle, c: Config) -> bool {
        let b = world.bounds;
        c.x >= o.radius
            && c.x <= b.width - o.radius
            && c.y >= o.radius
            && c.y <= b.height - o.radius
            && world.obstacles.iter().all(|s| s.distance_to_point(c) >= o.radius)
    }

    /// Moves every dynamic obstacle by `speed * dt` along its policy.
    pub fn step(&mut self, world: &mut World, dt: f64) {
        if self.since_redraw.len() < world.dynamic.len() {
            self.since_redraw.resize(world.dynamic.len(), 0.0);
        }
        if dt <= 0.0 {
            return;
        }
        let mut dynamic = std::mem::take(&mut world.dynamic);
        for (i, o) in dynamic.iter_mut().enumerate() {
            let step = o.speed * dt;
            match o.policy {
                MotionPolicy::RandomDirection => {
                    self.since_redraw[i] += dt;
                    if self.since_redraw[i] >= REDRAW_PERIOD {
                        self.since_redraw[i] = 0.0;
                        o.heading = random_heading(&mut self.rng);
                    }
                    let mut next = o.center + o.heading * step;
                    let mut tries = 0;
                    while !Self::fits(world, o, next) && tries < REDRAW_TRIES {
                        o.heading = random_heading(&mut self.rng);
                        next = o.center + o.heading * step;
                        tries += 1;
                    }
                    if Self::fits(world, o, next) {
                        o.center = next;
                    }
                }
                MotionPolicy::VerticalSweep => {
                    let mut next = o.center + o.heading * step;
                    if !Self::fits(world, o, next) {
                        o.heading = o.heading * -1.0;
                        next = o.center + o.heading * step;
                    }
                    if Self::fits(world, o, next) {
                        o.center = next;
                    }
                }
            }
        }
        world.dynamic = dynamic;
    }
}

/// Whether the robot disc overlaps any dynamic obstacle disc.
pub fn robot_collides(world: &World, robot: Config, radius: f64) -> bool {
    world.dynamic.iter().any(|o| dist(o.center, robot) < o.radius + radius)
}
