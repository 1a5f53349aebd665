//! Pinhole camera model and yaw/pitch poses.
//!
//! Camera frame: +Z forward, +X right, +Y down. World frame is z-up. Poses
//! carry no roll: the camera's right axis always lies in the horizontal
//! plane.

use nalgebra::{Matrix3, Rotation3, UnitQuaternion, Vector3};

use super::WorldError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub width: usize,
    pub height: usize,
    pub fov_x_deg: f64,
    pub fov_y_deg: f64,
    /// Maximum sensing range in meters.
    pub max_range: f64,
}

impl Default for CameraModel {
    fn default() -> Self {
        Self {
            width: 480,
            height: 480,
            fov_x_deg: 77.32,
            fov_y_deg: 77.32,
            max_range: 3.5,
        }
    }
}

impl CameraModel {
    pub fn new(width: usize, height: usize, fov_x_deg: f64, fov_y_deg: f64, max_range: f64) -> Result<Self, WorldError> {
        let cam = Self {
            width,
            height,
            fov_x_deg,
            fov_y_deg,
            max_range,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), WorldError> {
        let fov_ok = |f: f64| f > 0.0 && f < 180.0;
        if self.width == 0 || self.height == 0 {
            return Err(WorldError::InvalidCamera("image size must be positive".into()));
        }
        if !fov_ok(self.fov_x_deg) || !fov_ok(self.fov_y_deg) {
            return Err(WorldError::InvalidCamera("field of view must lie in (0, 180) degrees".into()));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(WorldError::InvalidCamera("max_range must be positive".into()));
        }
        Ok(())
    }

    /// Same optics and range at a different pixel resolution.
    pub fn with_resolution(&self, width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            ..*self
        }
    }

    #[inline]
    pub fn focal(&self) -> (f64, f64) {
        let fx = self.width as f64 / 2.0 / (self.fov_x_deg.to_radians() / 2.0).tan();
        let fy = self.height as f64 / 2.0 / (self.fov_y_deg.to_radians() / 2.0).tan();
        (fx, fy)
    }

    #[inline]
    pub fn principal_point(&self) -> (f64, f64) {
        (self.width as f64 / 2.0, self.height as f64 / 2.0)
    }

    /// Unit ray through continuous image coordinates `(u, v)`, camera frame.
    pub fn ray_dir(&self, u: f64, v: f64) -> Vector3<f64> {
        let (fx, fy) = self.focal();
        let (cx, cy) = self.principal_point();
        Vector3::new((u - cx) / fx, (v - cy) / fy, 1.0).normalize()
    }

    /// Unit ray through the centre of pixel `(x, y)`, camera frame.
    #[inline]
    pub fn pixel_ray(&self, x: usize, y: usize) -> Vector3<f64> {
        self.ray_dir(x as f64 + 0.5, y as f64 + 0.5)
    }

    /// All pixel rays, row-major.
    pub fn pixel_rays(&self) -> Vec<Vector3<f64>> {
        let mut rays = Vec::with_capacity(self.width * self.height);
        for y in 0..self.height {
            for x in 0..self.width {
                rays.push(self.pixel_ray(x, y));
            }
        }
        rays
    }

    /// Continuous image coordinates of a camera-frame point in front of the
    /// camera.
    pub fn project(&self, p_cam: &Vector3<f64>) -> Option<(f64, f64)> {
        if p_cam.z <= 0.0 {
            return None;
        }
        let (fx, fy) = self.focal();
        let (cx, cy) = self.principal_point();
        Some((fx * p_cam.x / p_cam.z + cx, fy * p_cam.y / p_cam.z + cy))
    }

    /// True if `(u, v)` lies inside the image rectangle.
    #[inline]
    pub fn in_image(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64
    }

    /// Largest angle between the optical axis and any pixel-centre ray.
    pub fn max_off_axis_angle(&self) -> f64 {
        let corner = self.pixel_ray(0, 0);
        corner.z.clamp(-1.0, 1.0).acos()
    }

    /// Number of voxel centres of a lattice with spacing `resolution` that
    /// fall inside the frustum truncated at `max_range`, with the camera at a
    /// lattice corner.
    pub fn frustum_voxel_count(&self, resolution: f64) -> usize {
        let n = (self.max_range / resolution).ceil() as i64 + 1;
        let r2 = self.max_range * self.max_range;
        let mut count = 0usize;
        for k in 0..n {
            let z = (k as f64 + 0.5) * resolution;
            for j in -n..n {
                let y = (j as f64 + 0.5) * resolution;
                for i in -n..n {
                    let x = (i as f64 + 0.5) * resolution;
                    if x * x + y * y + z * z > r2 {
                        continue;
                    }
                    if let Some((u, v)) = self.project(&Vector3::new(x, y, z)) {
                        if self.in_image(u, v) {
                            count += 1;
                        }
                    }
                }
            }
        }
        count
    }
}

/// Identifier of a robot pose node in the frontier tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PoseId(pub u64);

/// Camera pose `x = (p, q)`; `q` rotates camera-frame vectors into the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

impl Pose {
    /// Yaw about world +z (0 looks along +x), pitch positive looking up.
    pub fn from_yaw_pitch(position: Vector3<f64>, yaw: f64, pitch: f64) -> Self {
        let (sy, cy) = yaw.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let forward = Vector3::new(cp * cy, cp * sy, sp);
        let right = Vector3::new(sy, -cy, 0.0);
        let down = forward.cross(&right);
        let m = Matrix3::from_columns(&[right, down, forward]);
        let rot = Rotation3::from_matrix_unchecked(m);
        Self {
            position,
            orientation: UnitQuaternion::from_rotation_matrix(&rot),
        }
    }

    pub fn from_yaw_pitch_deg(position: Vector3<f64>, yaw_deg: f64, pitch_deg: f64) -> Self {
        Self::from_yaw_pitch(position, yaw_deg.to_radians(), pitch_deg.to_radians())
    }

    /// Pose at `position` whose optical axis points along `dir`.
    pub fn looking_along(position: Vector3<f64>, dir: &Vector3<f64>) -> Self {
        let (yaw, pitch) = yaw_pitch_of(dir);
        Self::from_yaw_pitch(position, yaw, pitch)
    }

    #[inline]
    pub fn forward(&self) -> Vector3<f64> {
        self.orientation * Vector3::z()
    }

    pub fn yaw(&self) -> f64 {
        yaw_pitch_of(&self.forward()).0
    }

    pub fn pitch(&self) -> f64 {
        yaw_pitch_of(&self.forward()).1
    }

    #[inline]
    pub fn to_world_dir(&self, v_cam: &Vector3<f64>) -> Vector3<f64> {
        self.orientation * v_cam
    }

    #[inline]
    pub fn to_world(&self, p_cam: &Vector3<f64>) -> Vector3<f64> {
        self.orientation * p_cam + self.position
    }

    #[inline]
    pub fn to_camera(&self, p_world: &Vector3<f64>) -> Vector3<f64> {
        self.orientation.inverse_transform_vector(&(p_world - self.position))
    }

    /// Angle in radians between the optical axes of two poses.
    pub fn angle_to(&self, other: &Pose) -> f64 {
        angle_between(&self.forward(), &other.forward())
    }
}

/// Yaw and pitch (radians) of a direction. Vertical directions get yaw 0.
pub fn yaw_pitch_of(dir: &Vector3<f64>) -> (f64, f64) {
    let n = dir.norm();
    if n == 0.0 {
        return (0.0, 0.0);
    }
    let d = dir / n;
    let horizontal = (d.x * d.x + d.y * d.y).sqrt();
    let yaw = if horizontal < 1e-12 { 0.0 } else { d.y.atan2(d.x) };
    (yaw, d.z.clamp(-1.0, 1.0).asin())
}

/// Angle in radians between two non-zero vectors.
pub fn angle_between(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let denom = a.norm() * b.norm();
    if denom == 0.0 {
        return 0.0;
    }
    (a.dot(b) / denom).clamp(-1.0, 1.0).acos()
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = a % std::f64::consts::TAU;
    if w <= -std::f64::consts::PI {
        w += std::f64::consts::TAU;
    } else if w > std::f64::consts::PI {
        w -= std::f64::consts::TAU;
    }
    w
}
