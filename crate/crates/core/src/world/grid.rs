use nalgebra::Vector3;

use super::WorldError;

/// Ternary occupancy. The derived ordering (`Unknown < Free < Occupied`) is
/// the merge lattice used during integration: taking the max of two
/// observations makes Occupied win over Free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
#[repr(u8)]
pub enum VoxelState {
    #[default]
    Unknown = 0,
    Free = 1,
    Occupied = 2,
}

impl VoxelState {
    pub fn to_char(self) -> char {
        match self {
            VoxelState::Occupied => 'O',
            VoxelState::Free => 'F',
            VoxelState::Unknown => 'U',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'O' => Some(VoxelState::Occupied),
            'F' => Some(VoxelState::Free),
            'U' => Some(VoxelState::Unknown),
            _ => None,
        }
    }

    #[inline]
    pub fn is_known(self) -> bool {
        self != VoxelState::Unknown
    }
}

/// Integer voxel coordinate `[x, y, z]`.
pub type VoxelCoord = [usize; 3];

/// Lattice layout shared by scenes, robot maps and per-voxel bitsets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridGeometry {
    pub dims: [usize; 3],
    /// Voxel edge length in meters.
    pub resolution: f64,
    /// World coordinates of the minimum corner of voxel (0,0,0).
    pub origin: Vector3<f64>,
}

impl GridGeometry {
    pub fn new(dims: [usize; 3], resolution: f64, origin: Vector3<f64>) -> Result<Self, WorldError> {
        if dims.contains(&0) {
            return Err(WorldError::InvalidDimensions(format!("dims must be positive, got {dims:?}")));
        }
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(WorldError::InvalidDimensions(format!("resolution must be positive, got {resolution}")));
        }
        Ok(Self {
            dims,
            resolution,
            origin,
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, c: VoxelCoord) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    #[inline]
    pub fn coord(&self, index: usize) -> VoxelCoord {
        let x = index % self.dims[0];
        let rest = index / self.dims[0];
        [x, rest % self.dims[1], rest / self.dims[1]]
    }

    #[inline]
    pub fn contains_coord(&self, c: [i64; 3]) -> bool {
        (0..3).all(|a| c[a] >= 0 && (c[a] as usize) < self.dims[a])
    }

    /// Voxel containing `p`, if inside the grid bounds.
    pub fn voxel_of(&self, p: &Vector3<f64>) -> Option<VoxelCoord> {
        let mut c = [0usize; 3];
        for a in 0..3 {
            let f = ((p[a] - self.origin[a]) / self.resolution).floor();
            if !(f >= 0.0 && f < self.dims[a] as f64) {
                return None;
            }
            c[a] = f as usize;
        }
        Some(c)
    }

    #[inline]
    pub fn center(&self, c: VoxelCoord) -> Vector3<f64> {
        Vector3::new(
            self.origin.x + (c[0] as f64 + 0.5) * self.resolution,
            self.origin.y + (c[1] as f64 + 0.5) * self.resolution,
            self.origin.z + (c[2] as f64 + 0.5) * self.resolution,
        )
    }

    #[inline]
    pub fn center_of_index(&self, index: usize) -> Vector3<f64> {
        self.center(self.coord(index))
    }

    /// Minimum corner of the bounding box.
    pub fn min_corner(&self) -> Vector3<f64> {
        self.origin
    }

    pub fn max_corner(&self) -> Vector3<f64> {
        self.origin
            + Vector3::new(
                self.dims[0] as f64 * self.resolution,
                self.dims[1] as f64 * self.resolution,
                self.dims[2] as f64 * self.resolution,
            )
    }

    /// Linear indices of the (up to six) face neighbours of `c`.
    pub fn face_neighbors(&self, c: VoxelCoord) -> impl Iterator<Item = usize> + '_ {
        const OFFSETS: [[i64; 3]; 6] = [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]];
        OFFSETS.iter().filter_map(move |o| {
            let n = [c[0] as i64 + o[0], c[1] as i64 + o[1], c[2] as i64 + o[2]];
            self.contains_coord(n)
                .then(|| self.index([n[0] as usize, n[1] as usize, n[2] as usize]))
        })
    }

    /// Clamped inclusive voxel range covering the axis-aligned box `[lo, hi]`.
    pub fn voxel_range(&self, lo: &Vector3<f64>, hi: &Vector3<f64>) -> Option<([usize; 3], [usize; 3])> {
        let mut a_lo = [0usize; 3];
        let mut a_hi = [0usize; 3];
        for a in 0..3 {
            let l = ((lo[a] - self.origin[a]) / self.resolution).floor();
            let h = ((hi[a] - self.origin[a]) / self.resolution).floor();
            if h < 0.0 || l >= self.dims[a] as f64 {
                return None;
            }
            a_lo[a] = l.max(0.0) as usize;
            a_hi[a] = (h as i64).min(self.dims[a] as i64 - 1) as usize;
        }
        Some((a_lo, a_hi))
    }
}

/// Ternary occupancy lattice. Used both for ground-truth scenes (no
/// Unknown cells) and for the robot's incrementally built map.
#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    geometry: GridGeometry,
    states: Vec<VoxelState>,
}

impl VoxelGrid {
    pub fn new(geometry: GridGeometry, fill: VoxelState) -> Self {
        Self {
            states: vec![fill; geometry.len()],
            geometry,
        }
    }

    pub fn from_states(geometry: GridGeometry, states: Vec<VoxelState>) -> Result<Self, WorldError> {
        if states.len() != geometry.len() {
            return Err(WorldError::InvalidDimensions(format!(
                "expected {} states, got {}",
                geometry.len(),
                states.len()
            )));
        }
        Ok(Self { geometry, states })
    }

    /// An all-Unknown map laid out like `self`.
    pub fn unknown_like(&self) -> Self {
        Self::new(self.geometry, VoxelState::Unknown)
    }

    #[inline]
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    #[inline]
    pub fn dims(&self) -> [usize; 3] {
        self.geometry.dims
    }

    #[inline]
    pub fn resolution(&self) -> f64 {
        self.geometry.resolution
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.states.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    #[inline]
    pub fn state(&self, index: usize) -> VoxelState {
        self.states[index]
    }

    #[inline]
    pub fn state_at(&self, c: VoxelCoord) -> VoxelState {
        self.states[self.geometry.index(c)]
    }

    /// State of the voxel containing `p`; `None` outside the grid.
    pub fn state_at_point(&self, p: &Vector3<f64>) -> Option<VoxelState> {
        self.geometry.voxel_of(p).map(|c| self.state_at(c))
    }

    #[inline]
    pub fn set(&mut self, index: usize, s: VoxelState) {
        self.states[index] = s;
    }

    #[inline]
    pub fn set_at(&mut self, c: VoxelCoord, s: VoxelState) {
        let i = self.geometry.index(c);
        self.states[i] = s;
    }

    pub fn states(&self) -> &[VoxelState] {
        &self.states
    }

    pub fn count(&self, s: VoxelState) -> usize {
        self.states.iter().filter(|&&v| v == s).count()
    }

    /// |V_known|: voxels whose state is not Unknown.
    pub fn known_count(&self) -> usize {
        self.states.iter().filter(|s| s.is_known()).count()
    }

    pub fn same_layout(&self, other: &VoxelGrid) -> bool {
        self.geometry == other.geometry
    }

    /// Fills the inclusive voxel box `[lo, hi]` with `s`.
    pub fn fill_box(&mut self, lo: VoxelCoord, hi: VoxelCoord, s: VoxelState) {
        for z in lo[2]..=hi[2] {
            for y in lo[1]..=hi[1] {
                for x in lo[0]..=hi[0] {
                    self.set_at([x, y, z], s);
                }
            }
        }
    }

    /// Number of 6-connected components among voxels in state `s`.
    pub fn component_count(&self, s: VoxelState) -> usize {
        let mut seen = vec![false; self.len()];
        let mut components = 0;
        let mut stack = Vec::new();
        for start in 0..self.len() {
            if seen[start] || self.states[start] != s {
                continue;
            }
            components += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                let c = self.geometry.coord(i);
                for n in self.geometry.face_neighbors(c) {
                    if !seen[n] && self.states[n] == s {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        components
    }
}
