//! Realized field geometry: stems, leaf occluders and a uniform grid for ray
//! and footprint queries.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::centerline::Centerline;
use crate::rng::{stream, Stream};
use crate::spec::{FieldSpec, RowSide};
use crate::SimError;

/// Centerline continues this far past the row ends so the robot can finish.
pub const END_MARGIN_M: f64 = 5.0;
const CELL_SIZE: f64 = 0.5;
const GRID_PAD: f64 = 1.0;
const LEAF_LENGTH: (f64, f64) = (0.05, 0.2);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stem {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
    /// Nominal centerline station the stem was planted at.
    pub station: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub a: (f64, f64),
    pub b: (f64, f64),
}

/// Row identity, from the lane's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RowId {
    /// Positive to the left of the centerline; lane rows are -1 and +1.
    pub index: i32,
}

impl RowId {
    pub fn offset(self, row_spacing: f64) -> f64 {
        f64::from(self.index.signum()) * (f64::from(self.index.abs()) - 0.5) * row_spacing
    }

    fn side(self) -> Option<RowSide> {
        match self.index {
            1 => Some(RowSide::Left),
            -1 => Some(RowSide::Right),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct Grid {
    x0: f64,
    y0: f64,
    nx: usize,
    ny: usize,
    cell_start: Vec<u32>,
    items: Vec<u32>,
}

impl Grid {
    fn build(boxes: &[(f64, f64, f64, f64)]) -> Grid {
        let (mut lo_x, mut lo_y, mut hi_x, mut hi_y) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
        for &(a, b, c, d) in boxes {
            lo_x = lo_x.min(a);
            lo_y = lo_y.min(b);
            hi_x = hi_x.max(c);
            hi_y = hi_y.max(d);
        }
        let (x0, y0) = (lo_x - GRID_PAD, lo_y - GRID_PAD);
        let nx = ((hi_x + GRID_PAD - x0) / CELL_SIZE).ceil() as usize + 1;
        let ny = ((hi_y + GRID_PAD - y0) / CELL_SIZE).ceil() as usize + 1;
        let mut grid = Grid { x0, y0, nx, ny, cell_start: vec![0; nx * ny + 1], items: Vec::new() };

        let spans: Vec<_> = boxes.iter().map(|b| grid.cell_span(b)).collect();
        for &(ix0, iy0, ix1, iy1) in &spans {
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    grid.cell_start[iy * nx + ix + 1] += 1;
                }
            }
        }
        for i in 0..nx * ny {
            grid.cell_start[i + 1] += grid.cell_start[i];
        }
        let mut fill = grid.cell_start.clone();
        grid.items = vec![0; *grid.cell_start.last().unwrap() as usize];
        for (item, &(ix0, iy0, ix1, iy1)) in spans.iter().enumerate() {
            for iy in iy0..=iy1 {
                for ix in ix0..=ix1 {
                    let c = iy * nx + ix;
                    grid.items[fill[c] as usize] = item as u32;
                    fill[c] += 1;
                }
            }
        }
        grid
    }

    fn cell_of(&self, x: f64, y: f64) -> (usize, usize) {
        let ix = ((x - self.x0) / CELL_SIZE).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let iy = ((y - self.y0) / CELL_SIZE).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (ix, iy)
    }

    fn cell_span(&self, b: &(f64, f64, f64, f64)) -> (usize, usize, usize, usize) {
        let (ix0, iy0) = self.cell_of(b.0, b.1);
        let (ix1, iy1) = self.cell_of(b.2, b.3);
        (ix0, iy0, ix1, iy1)
    }

    fn cell(&self, ix: usize, iy: usize) -> &[u32] {
        let c = iy * self.nx + ix;
        &self.items[self.cell_start[c] as usize..self.cell_start[c + 1] as usize]
    }
}

/// Distance along a unit ray to a circle; `None` on a miss or when the origin
/// is inside the circle.
pub fn ray_circle(o: (f64, f64), d: (f64, f64), c: (f64, f64), r: f64) -> Option<f64> {
    let (fx, fy) = (o.0 - c.0, o.1 - c.1);
    let b = fx * d.0 + fy * d.1;
    let cc = fx * fx + fy * fy - r * r;
    if cc <= 0.0 {
        return None;
    }
    let disc = b * b - cc;
    if disc < 0.0 {
        return None;
    }
    let t = -b - disc.sqrt();
    (t >= 0.0).then_some(t)
}

/// Distance along a unit ray to a segment.
pub fn ray_segment(o: (f64, f64), d: (f64, f64), s: &Segment) -> Option<f64> {
    let e = (s.b.0 - s.a.0, s.b.1 - s.a.1);
    let denom = d.0 * e.1 - d.1 * e.0;
    if denom.abs() < 1e-15 {
        return None;
    }
    let w = (s.a.0 - o.0, s.a.1 - o.1);
    let t = (w.0 * e.1 - w.1 * e.0) / denom;
    let u = (w.0 * d.1 - w.1 * d.0) / denom;
    (t >= 0.0 && (0.0..=1.0).contains(&u)).then_some(t)
}

#[derive(Debug, Clone)]
pub struct Field {
    pub spec: FieldSpec,
    pub centerline: Centerline,
    pub stems: Vec<Stem>,
    pub occluders: Vec<Segment>,
    pub lane_halfwidth: f64,
    grid: Grid,
}

impl Field {
    pub fn row_length(&self) -> f64 {
        self.spec.row_length
    }

    /// SHA-256 over the realized geometry, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for s in &self.stems {
            for v in [s.x, s.y, s.radius, s.station] {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        for o in &self.occluders {
            for v in [o.a.0, o.a.1, o.b.0, o.b.1] {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Nearest hit along a ray from `(x, y)` at world angle `angle`, up to `max_range`.
    pub fn cast(&self, x: f64, y: f64, angle: f64, max_range: f64) -> Option<f64> {
        self.cast_dir(x, y, (angle.cos(), angle.sin()), max_range)
    }

    /// As [`Field::cast`] with a unit direction vector.
    pub fn cast_dir(&self, x: f64, y: f64, d: (f64, f64), max_range: f64) -> Option<f64> {
        let g = &self.grid;
        let (gx1, gy1) = (g.x0 + g.nx as f64 * CELL_SIZE, g.y0 + g.ny as f64 * CELL_SIZE);

        // clip the ray to the grid box
        let mut t_enter = 0.0f64;
        let mut t_exit = max_range;
        for (o, dir, lo, hi) in [(x, d.0, g.x0, gx1), (y, d.1, g.y0, gy1)] {
            if dir.abs() < 1e-300 {
                if o < lo || o > hi {
                    return None;
                }
            } else {
                let (a, b) = ((lo - o) / dir, (hi - o) / dir);
                t_enter = t_enter.max(a.min(b));
                t_exit = t_exit.min(a.max(b));
            }
        }
        if t_enter > t_exit {
            return None;
        }

        let (px, py) = (x + d.0 * t_enter, y + d.1 * t_enter);
        let (mut ix, mut iy) = g.cell_of(px, py);
        let step_x: isize = if d.0 >= 0.0 { 1 } else { -1 };
        let step_y: isize = if d.1 >= 0.0 { 1 } else { -1 };
        let boundary = |i: usize, step: isize, origin: f64| origin + (i as f64 + if step > 0 { 1.0 } else { 0.0 }) * CELL_SIZE;
        let mut t_max_x =
            if d.0.abs() < 1e-300 { f64::INFINITY } else { (boundary(ix, step_x, g.x0) - x) / d.0 };
        let mut t_max_y =
            if d.1.abs() < 1e-300 { f64::INFINITY } else { (boundary(iy, step_y, g.y0) - y) / d.1 };
        let t_delta_x = if d.0.abs() < 1e-300 { f64::INFINITY } else { CELL_SIZE / d.0.abs() };
        let t_delta_y = if d.1.abs() < 1e-300 { f64::INFINITY } else { CELL_SIZE / d.1.abs() };

        let o = (x, y);
        let n_stems = self.stems.len() as u32;
        let mut best = f64::INFINITY;
        loop {
            for &item in g.cell(ix, iy) {
                let t = if item < n_stems {
                    let s = &self.stems[item as usize];
                    ray_circle(o, d, (s.x, s.y), s.radius)
                } else {
                    ray_segment(o, d, &self.occluders[(item - n_stems) as usize])
                };
                if let Some(t) = t {
                    best = best.min(t);
                }
            }
            let t_next = t_max_x.min(t_max_y);
            if best <= t_next || t_next > t_exit {
                break;
            }
            if t_max_x < t_max_y {
                let next = ix as isize + step_x;
                if next < 0 || next >= g.nx as isize {
                    break;
                }
                ix = next as usize;
                t_max_x += t_delta_x;
            } else {
                let next = iy as isize + step_y;
                if next < 0 || next >= g.ny as isize {
                    break;
                }
                iy = next as usize;
                t_max_y += t_delta_y;
            }
        }
        (best <= max_range).then_some(best)
    }

    /// Whether an oriented rectangle centered at `(x, y)` touches any stem.
    pub fn footprint_hits_stem(&self, x: f64, y: f64, heading: f64, half_len: f64, half_wid: f64) -> bool {
        let reach = half_len.hypot(half_wid) + self.spec.stem_radius;
        let g = &self.grid;
        let (ix0, iy0) = g.cell_of(x - reach, y - reach);
        let (ix1, iy1) = g.cell_of(x + reach, y + reach);
        let (s, c) = heading.sin_cos();
        let n_stems = self.stems.len() as u32;
        for iy in iy0..=iy1 {
            for ix in ix0..=ix1 {
                for &item in g.cell(ix, iy) {
                    if item >= n_stems {
                        continue;
                    }
                    let stem = &self.stems[item as usize];
                    let (dx, dy) = (stem.x - x, stem.y - y);
                    let fwd = dx * c + dy * s;
                    let lat = dy * c - dx * s;
                    let ex = fwd.clamp(-half_len, half_len) - fwd;
                    let ey = lat.clamp(-half_wid, half_wid) - lat;
                    if ex * ex + ey * ey <= stem.radius * stem.radius {
                        return true;
                    }
                }
            }
        }
        false
    }
}

/// Stations along a row `offset` meters left of the centerline, spaced
/// `spacing` apart along the row itself, from station 0 to `end`.
pub fn row_stations(center: &Centerline, offset: f64, spacing: f64, end: f64) -> Vec<f64> {
    let pieces: Vec<_> = center
        .offset_pieces(offset)
        .filter(|&(s0, _, _)| s0 < end)
        .map(|(s0, len, off_len)| {
            let clip = len.min(end - s0);
            (s0, clip, off_len * clip / len)
        })
        .collect();
    let total: f64 = pieces.iter().map(|p| p.2).sum();
    let count = (total / spacing + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(count);
    let mut piece = 0;
    let mut cum = 0.0;
    for k in 0..count {
        let u = k as f64 * spacing;
        while piece + 1 < pieces.len() && u >= cum + pieces[piece].2 {
            cum += pieces[piece].2;
            piece += 1;
        }
        let (s0, len, off_len) = pieces[piece];
        out.push((s0 + (u - cum) * len / off_len).min(end));
    }
    out
}

pub fn row_ids(spec: &FieldSpec) -> Vec<RowId> {
    let n = spec.neighbor_rows_per_side as i32 + 1;
    (-n..=n).filter(|&i| i != 0).map(|index| RowId { index }).collect()
}

impl Field {
    /// Field with explicit geometry on the spec's centerline. Intended for
    /// synthetic sensor tests; gaps and clutter in `spec` are not applied.
    pub fn from_parts(spec: &FieldSpec, stems: Vec<Stem>, occluders: Vec<Segment>) -> Result<Field, SimError> {
        spec.validate()?;
        let centerline = Centerline::new(spec.row_length + END_MARGIN_M, spec.curve.as_ref());
        Ok(Field::assemble(spec, centerline, stems, occluders))
    }

    fn assemble(spec: &FieldSpec, centerline: Centerline, stems: Vec<Stem>, occluders: Vec<Segment>) -> Field {
        let boxes: Vec<_> = stems
            .iter()
            .map(|s| (s.x - s.radius, s.y - s.radius, s.x + s.radius, s.y + s.radius))
            .chain(occluders.iter().map(|o| (o.a.0.min(o.b.0), o.a.1.min(o.b.1), o.a.0.max(o.b.0), o.a.1.max(o.b.1))))
            .collect();
        let grid = Grid::build(&boxes);
        Field { spec: spec.clone(), centerline, stems, occluders, lane_halfwidth: spec.row_spacing / 2.0, grid }
    }
}

pub fn build_field(spec: &FieldSpec) -> Result<Field, SimError> {
    spec.validate()?;
    let centerline = Centerline::new(spec.row_length + END_MARGIN_M, spec.curve.as_ref());
    let mut rng = stream(spec.seed, Stream::Field);

    let mut stems = Vec::new();
    for row in row_ids(spec) {
        let offset = row.offset(spec.row_spacing);
        for station in row_stations(&centerline, offset, spec.plant_spacing, spec.row_length) {
            let jx: f64 = rng.sample(StandardNormal);
            let jy: f64 = rng.sample(StandardNormal);
            if in_gap(spec, row, station) {
                continue;
            }
            let (x, y) = centerline.pose_at(station).offset_point(offset);
            stems.push(Stem { x: x + spec.stem_jitter * jx, y: y + spec.stem_jitter * jy, radius: spec.stem_radius, station });
        }
    }

    let mut occluders = Vec::new();
    for row in row_ids(spec).into_iter().filter(|r| r.side().is_some()) {
        let offset = row.offset(spec.row_spacing);
        let inward = -offset.signum();
        let count = (spec.clutter_density * spec.row_length).round() as usize;
        for _ in 0..count {
            let station = rng.random_range(0.0..spec.row_length);
            let spread: f64 = rng.random_range(-1.0..1.0);
            let length = rng.random_range(LEAF_LENGTH.0..LEAF_LENGTH.1);
            if in_gap(spec, row, station) {
                continue;
            }
            let pose = centerline.pose_at(station);
            let a = pose.offset_point(offset);
            // within 60 degrees of the inward normal
            let dir = pose.heading + inward * std::f64::consts::FRAC_PI_2 - inward * spread * std::f64::consts::FRAC_PI_3;
            occluders.push(Segment { a, b: (a.0 + length * dir.cos(), a.1 + length * dir.sin()) });
        }
    }
    for leaf in &spec.blocking_leaves {
        let sides: &[f64] = match leaf.row_side {
            RowSide::Left => &[1.0],
            RowSide::Right => &[-1.0],
            RowSide::Both => &[1.0, -1.0],
        };
        for &sign in sides {
            let offset = sign * (spec.row_spacing / 2.0 - leaf.inset_m);
            let pieces = (leaf.length_m / 0.1).ceil().max(1.0) as usize;
            let step = leaf.length_m / pieces as f64;
            for k in 0..pieces {
                let a = centerline.pose_at(leaf.start_m + k as f64 * step).offset_point(offset);
                let b = centerline.pose_at(leaf.start_m + (k + 1) as f64 * step).offset_point(offset);
                occluders.push(Segment { a, b });
            }
        }
    }

    Ok(Field::assemble(spec, centerline, stems, occluders))
}

fn in_gap(spec: &FieldSpec, row: RowId, station: f64) -> bool {
    let Some(side) = row.side() else { return false };
    spec.gaps.iter().any(|g| {
        let hits_side = match side {
            RowSide::Left => g.row_side.covers_left(),
            _ => g.row_side.covers_right(),
        };
        hits_side && g.contains(station)
    })
}
