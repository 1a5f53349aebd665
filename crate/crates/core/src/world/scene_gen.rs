//! Procedural indoor scenes: BSP floorplans with doors, optional clutter.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::camera::Pose;
use super::grid::{GridGeometry, VoxelGrid, VoxelState};
use super::WorldError;

const MAX_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SceneParams {
    pub rooms_min: usize,
    pub rooms_max: usize,
    /// Outer extent in meters, walls included.
    pub extent: [f64; 3],
    pub door_width: f64,
    pub door_height: f64,
    pub resolution: f64,
    /// Smallest room side, meters.
    pub min_room: f64,
    /// Upper bound on clutter boxes per room.
    pub clutter: usize,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            rooms_min: 4,
            rooms_max: 6,
            extent: [12.0, 12.0, 2.5],
            door_width: 0.9,
            door_height: 2.0,
            resolution: 0.1,
            min_room: 2.0,
            clutter: 2,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<(), WorldError> {
        let bad = |m: &str| Err(WorldError::InvalidParams(m.to_string()));
        if !(self.resolution > 0.0) {
            return bad("resolution must be positive");
        }
        if self.rooms_min == 0 || self.rooms_max < self.rooms_min {
            return bad("room count range must satisfy 1 <= min <= max");
        }
        if self.extent[0] < 4.0 || self.extent[1] < 4.0 {
            return bad("horizontal extent must be at least 4 m");
        }
        if !(self.door_width > 0.0 && self.door_height > 0.0 && self.min_room > 0.0) {
            return bad("door size and room size must be positive");
        }
        if self.extent[2] < self.door_height + 2.0 * self.resolution {
            return bad("extent z must fit the door height plus floor and ceiling");
        }
        if self.door_width + 2.0 * self.resolution > self.min_room {
            return bad("door must fit inside the smallest room side");
        }
        Ok(())
    }
}

/// Interior of one room as an inclusive voxel box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Room {
    pub lo: [usize; 3],
    pub hi: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScene {
    pub grid: VoxelGrid,
    pub rooms: Vec<Room>,
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: usize,
    x1: usize,
    y0: usize,
    y1: usize,
}

#[derive(Debug, Clone, Copy)]
struct Split {
    axis: usize,
    at: usize,
    lo: usize,
    hi: usize,
}

fn vox(m: f64, res: f64) -> usize {
    (m / res).round() as usize
}

/// Deterministic BSP floorplan. Retries with derived seeds until the free
/// space is one 6-connected component.
pub fn generate_scene(seed: u64, params: &SceneParams) -> Result<GeneratedScene, WorldError> {
    params.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        if let Some(s) = try_generate(&mut rng, params) {
            if s.grid.component_count(VoxelState::Free) == 1 {
                return Ok(s);
            }
        }
    }
    Err(WorldError::GenerationFailed(format!(
        "no connected layout after {MAX_ATTEMPTS} attempts"
    )))
}

fn try_generate(rng: &mut ChaCha8Rng, p: &SceneParams) -> Option<GeneratedScene> {
    let res = p.resolution;
    let dims = [vox(p.extent[0], res), vox(p.extent[1], res), vox(p.extent[2], res)];
    let geom = GridGeometry::new(dims, res, Vector3::zeros()).ok()?;
    let mut grid = VoxelGrid::new(geom, VoxelState::Occupied);
    let [nx, ny, nz] = dims;
    let min_side = vox(p.min_room, res).max(3);
    let door_w = vox(p.door_width, res).max(1);
    let door_h = vox(p.door_height, res).clamp(1, nz - 2);

    let target = rng.gen_range(p.rooms_min..=p.rooms_max);
    let mut leaves = vec![Rect {
        x0: 1,
        x1: nx - 1,
        y0: 1,
        y1: ny - 1,
    }];
    let mut splits = Vec::new();
    while leaves.len() < target {
        let pick = leaves
            .iter()
            .enumerate()
            .filter(|(_, r)| (r.x1 - r.x0).max(r.y1 - r.y0) > 2 * min_side)
            .max_by_key(|(i, r)| ((r.x1 - r.x0) * (r.y1 - r.y0), usize::MAX - i))
            .map(|(i, _)| i);
        let Some(i) = pick else { break };
        let r = leaves.swap_remove(i);
        let (w, h) = (r.x1 - r.x0, r.y1 - r.y0);
        let axis = if w > h || (w == h && rng.gen_bool(0.5)) { 0 } else { 1 };
        let (a0, a1) = if axis == 0 { (r.x0, r.x1) } else { (r.y0, r.y1) };
        if a1 - a0 < 2 * min_side + 1 {
            leaves.push(r);
            break;
        }
        let at = rng.gen_range(a0 + min_side..=a1 - min_side - 1);
        if axis == 0 {
            splits.push(Split { axis, at, lo: r.y0, hi: r.y1 });
            leaves.push(Rect { x1: at, ..r });
            leaves.push(Rect { x0: at + 1, ..r });
        } else {
            splits.push(Split { axis, at, lo: r.x0, hi: r.x1 });
            leaves.push(Rect { y1: at, ..r });
            leaves.push(Rect { y0: at + 1, ..r });
        }
    }

    for r in &leaves {
        grid.fill_box([r.x0, r.y0, 1], [r.x1 - 1, r.y1 - 1, nz - 2], VoxelState::Free);
    }

    for s in &splits {
        let other = 1 - s.axis;
        let cell = |t: usize, off: i64| {
            let mut c = [0usize; 3];
            c[s.axis] = (s.at as i64 + off) as usize;
            c[other] = t;
            c[2] = 1;
            c
        };
        let candidates: Vec<usize> = (s.lo..=s.hi.saturating_sub(door_w))
            .filter(|&start| {
                (start..start + door_w).all(|t| {
                    grid.state_at(cell(t, -1)) == VoxelState::Free && grid.state_at(cell(t, 1)) == VoxelState::Free
                })
            })
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let start = candidates[rng.gen_range(0..candidates.len())];
        for t in start..start + door_w {
            let mut c = cell(t, 0);
            for z in 1..=door_h {
                c[2] = z;
                grid.set_at(c, VoxelState::Free);
            }
        }
    }

    leaves.sort_by_key(|r| (r.y0, r.x0));
    let margin = vox(0.6, res).max(1);
    let mut rooms = Vec::with_capacity(leaves.len());
    for r in &leaves {
        rooms.push(Room {
            lo: [r.x0, r.y0, 1],
            hi: [r.x1 - 1, r.y1 - 1, nz - 2],
        });
        if p.clutter == 0 {
            continue;
        }
        let n = rng.gen_range(0..=p.clutter);
        for _ in 0..n {
            let (sx, sy) = (rng.gen_range(vox(0.3, res)..=vox(0.8, res)), rng.gen_range(vox(0.3, res)..=vox(0.8, res)));
            let sz = rng.gen_range(vox(0.4, res)..=vox(0.9, res)).min(nz - 3);
            if r.x1 < r.x0 + 2 * margin + sx || r.y1 < r.y0 + 2 * margin + sy {
                continue;
            }
            let x = rng.gen_range(r.x0 + margin..=r.x1 - margin - sx);
            let y = rng.gen_range(r.y0 + margin..=r.y1 - margin - sy);
            grid.fill_box([x, y, 1], [x + sx - 1, y + sy - 1, sz], VoxelState::Occupied);
        }
    }
    Some(GeneratedScene { grid, rooms })
}

/// Single closed room with no openings; `extent` includes the walls.
pub fn sealed_room(extent: [f64; 3], resolution: f64) -> Result<VoxelGrid, WorldError> {
    let dims = [vox(extent[0], resolution), vox(extent[1], resolution), vox(extent[2], resolution)];
    if dims.iter().any(|&d| d < 3) {
        return Err(WorldError::InvalidParams("sealed room needs at least 3 voxels per axis".into()));
    }
    let geom = GridGeometry::new(dims, resolution, Vector3::zeros())?;
    let mut grid = VoxelGrid::new(geom, VoxelState::Occupied);
    grid.fill_box([1, 1, 1], [dims[0] - 2, dims[1] - 2, dims[2] - 2], VoxelState::Free);
    Ok(grid)
}

/// Two rooms joined by a single door, with a camera in the first room
/// aimed roughly at the door.
#[derive(Debug, Clone, PartialEq)]
pub struct DoorwayScene {
    pub grid: VoxelGrid,
    pub pose: Pose,
    /// World-frame centre of the door opening.
    pub door_center: Vector3<f64>,
}

pub fn generate_doorway_scene(seed: u64, resolution: f64) -> Result<DoorwayScene, WorldError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let res = resolution;
    let len_a = rng.gen_range(3.0..4.5);
    let len_b = rng.gen_range(1.5..4.0);
    let width = rng.gen_range(4.0..6.0);
    let height = 2.5;
    let dims = [vox(len_a + len_b + 0.3, res), vox(width, res), vox(height, res)];
    let geom = GridGeometry::new(dims, res, Vector3::zeros())?;
    let mut grid = VoxelGrid::new(geom, VoxelState::Occupied);
    let wall = vox(len_a, res) + 1;
    let [nx, ny, nz] = dims;
    grid.fill_box([1, 1, 1], [nx - 2, ny - 2, nz - 2], VoxelState::Free);
    grid.fill_box([wall, 0, 0], [wall, ny - 1, nz - 1], VoxelState::Occupied);

    let door_w = vox(0.9, res);
    let door_h = vox(2.0, res);
    let y0 = rng.gen_range(vox(0.5, res)..=ny - vox(0.5, res) - door_w);
    grid.fill_box([wall, y0, 1], [wall, y0 + door_w - 1, door_h], VoxelState::Free);
    let door_center = Vector3::new(
        (wall as f64 + 0.5) * res,
        (y0 as f64 + door_w as f64 / 2.0) * res,
        (1.0 + door_h as f64 / 2.0) * res,
    );

    let dist = rng.gen_range(1.2..2.6f64).min(len_a - 0.5);
    let lateral = rng.gen_range(-1.0..1.0);
    let cam_y = (door_center.y + lateral).clamp(0.5, width - 0.5);
    let position = Vector3::new(door_center.x - dist, cam_y, 1.05);
    let to_door = door_center - position;
    let yaw = to_door.y.atan2(to_door.x) + rng.gen_range(-0.25..0.25);
    let pose = Pose::from_yaw_pitch(position, yaw, 0.0);
    Ok(DoorwayScene { grid, pose, door_center })
}

/// Free positions at a fixed height whose voxel ball of `clearance`
/// meters contains no Occupied voxel.
pub fn clear_positions(grid: &VoxelGrid, height: f64, clearance: f64) -> Vec<Vector3<f64>> {
    let g = grid.geometry();
    let z = ((height - g.origin.z) / g.resolution).floor();
    if z < 0.0 || z >= g.dims[2] as f64 {
        return Vec::new();
    }
    let z = z as usize;
    let r = (clearance / g.resolution).ceil() as i64;
    let mut out = Vec::new();
    for y in 0..g.dims[1] {
        for x in 0..g.dims[0] {
            let ok = (-r..=r).all(|dz| {
                (-r..=r).all(|dy| {
                    (-r..=r).all(|dx| {
                        let c = [x as i64 + dx, y as i64 + dy, z as i64 + dz];
                        g.contains_coord(c)
                            && grid.state_at([c[0] as usize, c[1] as usize, c[2] as usize]) != VoxelState::Occupied
                    })
                })
            });
            if ok {
                out.push(g.center([x, y, z]));
            }
        }
    }
    out
}
