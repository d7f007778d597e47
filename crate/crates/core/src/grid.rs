//! Uniform bucket grid over the workspace for fixed-radius neighbor queries.

use crate::geometry::{dist, Config, WorldBounds};

#[derive(Debug, Clone)]
pub struct SpatialGrid {
    cell: f64,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<usize>>,
}

impl SpatialGrid {
    /// Grid covering `bounds` with square cells of side `cell` (clamped so
    /// that the grid has at most 1024 cells per axis).
    pub fn new(bounds: WorldBounds, cell: f64) -> Self {
        let longest = bounds.width.max(bounds.height).max(f64::MIN_POSITIVE);
        let cell = if cell.is_finite() && cell > 0.0 { cell.max(longest / 1024.0) } else { longest };
        let cols = ((bounds.width / cell).ceil() as usize).max(1);
        let rows = ((bounds.height / cell).ceil() as usize).max(1);
        SpatialGrid {
            cell,
            cols,
            rows,
            cells: vec![Vec::new(); cols * rows],
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn coords(&self, p: Config) -> (usize, usize) {
        let cx = ((p.x / self.cell).floor().max(0.0) as usize).min(self.cols - 1);
        let cy = ((p.y / self.cell).floor().max(0.0) as usize).min(self.rows - 1);
        (cx, cy)
    }

    pub fn insert(&mut self, id: usize, p: Config) {
        let (cx, cy) = self.coords(p);
        self.cells[cy * self.cols + cx].push(id);
    }

    /// Calls `f` for every stored id whose cell intersects the square of
    /// half-side `radius` around `center`. For `radius <= cell` this is the
    /// 3x3 block around the center cell.
    pub fn for_each_candidate(&self, center: Config, radius: f64, mut f: impl FnMut(usize)) {
        let reach = (radius / self.cell).ceil().max(1.0) as usize;
        let (cx, cy) = self.coords(center);
        let x0 = cx.saturating_sub(reach);
        let x1 = (cx + reach).min(self.cols - 1);
        let y0 = cy.saturating_sub(reach);
        let y1 = (cy + reach).min(self.rows - 1);
        for gy in y0..=y1 {
            for gx in x0..=x1 {
                for &id in &self.cells[gy * self.cols + gx] {
                    f(id);
                }
            }
        }
    }

    /// Ids within `radius` of `center` accepted by `keep`, sorted by
    /// ascending distance with ties broken by id.
    pub fn within(
        &self,
        pos: impl Fn(usize) -> Config,
        center: Config,
        radius: f64,
        keep: impl FnMut(usize) -> bool,
    ) -> Vec<usize> {
        self.within_dist(pos, center, radius, keep).into_iter().map(|(_, id)| id).collect()
    }

    /// Like [`SpatialGrid::within`], keeping the distances.
    pub fn within_dist(
        &self,
        pos: impl Fn(usize) -> Config,
        center: Config,
        radius: f64,
        keep: impl FnMut(usize) -> bool,
    ) -> Vec<(f64, usize)> {
        let mut found = self.within_unsorted(pos, center, radius, keep);
        found.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        found
    }

    /// `(distance, id)` pairs within `radius` in grid scan order, which only
    /// depends on the insertion history.
    pub fn within_unsorted(
        &self,
        pos: impl Fn(usize) -> Config,
        center: Config,
        radius: f64,
        mut keep: impl FnMut(usize) -> bool,
    ) -> Vec<(f64, usize)> {
        let mut found: Vec<(f64, usize)> = Vec::with_capacity(64);
        self.for_each_candidate(center, radius, |id| {
            if keep(id) {
                let d = dist(center, pos(id));
                if d <= radius {
                    found.push((d, id));
                }
            }
        });
        found
    }

    /// Nearest id accepted by `keep`, searching outward ring by ring.
    pub fn nearest(
        &self,
        pos: impl Fn(usize) -> Config,
        center: Config,
        mut keep: impl FnMut(usize) -> bool,
    ) -> Option<usize> {
        let (cx, cy) = self.coords(center);
        let max_ring = self.cols.max(self.rows);
        let mut best: Option<(f64, usize)> = None;
        for ring in 0..=max_ring {
            // every cell in this ring is at least (ring - 1) * cell away
            if let Some((bd, _)) = best {
                if bd < (ring as f64 - 1.0) * self.cell {
                    break;
                }
            }
            let x0 = cx as isize - ring as isize;
            let x1 = cx as isize + ring as isize;
            let y0 = cy as isize - ring as isize;
            let y1 = cy as isize + ring as isize;
            for gy in y0..=y1 {
                for gx in x0..=x1 {
                    let on_ring = gx == x0 || gx == x1 || gy == y0 || gy == y1;
                    if !on_ring || gx < 0 || gy < 0 || gx >= self.cols as isize || gy >= self.rows as isize {
                        continue;
                    }
                    for &id in &self.cells[gy as usize * self.cols + gx as usize] {
                        if !keep(id) {
                            continue;
                        }
                        let d = dist(center, pos(id));
                        let better = match best {
                            None => true,
                            Some((bd, bid)) => d < bd || (d == bd && id < bid),
                        };
                        if better {
                            best = Some((d, id));
                        }
                    }
                }
            }
        }
        best.map(|(_, id)| id)
    }
}
