use serde::{Deserialize, Serialize};

use super::{RenderConfig, RenderError};
use crate::asset::{cross, norm, sub, IndexedMesh};

/// Fraction of the smaller image dimension covered by the bounding sphere's silhouette.
pub const FRAME_FILL: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Viewpoint {
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    /// Camera distance in multiples of the bounding-sphere radius.
    pub distance: f64,
}

impl Viewpoint {
    /// The configured main viewpoint at the framing distance.
    pub fn main(config: &RenderConfig) -> Self {
        Self {
            azimuth_deg: config.main_azimuth_deg,
            elevation_deg: config.main_elevation_deg,
            distance: framing_distance(config),
        }
    }
}

/// Bounding sphere: box center and the farthest vertex from it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingSphere {
    pub center: [f64; 3],
    pub radius: f64,
}

pub fn bounding_sphere(mesh: &IndexedMesh) -> Result<BoundingSphere, RenderError> {
    let aabb = mesh.aabb().ok_or(RenderError::EmptyMesh)?;
    if mesh.is_empty() {
        return Err(RenderError::EmptyMesh);
    }
    let center = aabb.center();
    let radius = mesh
        .positions
        .iter()
        .map(|p| norm(sub(*p, center)))
        .fold(0.0, f64::max);
    if radius == 0.0 {
        return Err(RenderError::EmptyMesh);
    }
    Ok(BoundingSphere { center, radius })
}

/// Focal length in pixels for the configured vertical field of view.
pub fn focal_length(config: &RenderConfig) -> f64 {
    0.5 * config.height as f64 / (0.5 * config.fov_deg.to_radians()).tan()
}

/// Distance, in radii, at which a sphere's silhouette spans `FRAME_FILL` of the smaller
/// image dimension.
pub fn framing_distance(config: &RenderConfig) -> f64 {
    let tau = FRAME_FILL * config.width.min(config.height) as f64 / (2.0 * focal_length(config));
    (1.0 + tau * tau).sqrt() / tau
}

/// `n` viewpoints at elevation 0 with uniformly spaced azimuths starting at the main azimuth.
pub fn ring_viewpoints(n: usize, config: &RenderConfig) -> Vec<Viewpoint> {
    let d = framing_distance(config);
    (0..n)
        .map(|i| Viewpoint {
            azimuth_deg: (config.main_azimuth_deg + 360.0 * i as f64 / n as f64).rem_euclid(360.0),
            elevation_deg: 0.0,
            distance: d,
        })
        .collect()
}

/// Pinhole camera with an orthonormal basis; `back` points from the target towards the eye.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Camera {
    pub eye: [f64; 3],
    pub target: [f64; 3],
    pub right: [f64; 3],
    pub up: [f64; 3],
    pub back: [f64; 3],
    pub focal: f64,
    pub near: f64,
}

impl Camera {
    /// Camera-space coordinates (x right, y up, z towards the viewer).
    pub fn to_view(&self, p: [f64; 3]) -> [f64; 3] {
        let d = sub(p, self.eye);
        [
            crate::asset::dot(d, self.right),
            crate::asset::dot(d, self.up),
            crate::asset::dot(d, self.back),
        ]
    }

    pub fn camera_to_world(&self, v: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|k| v[0] * self.right[k] + v[1] * self.up[k] + v[2] * self.back[k])
    }
}

/// Places the camera around the mesh's bounding sphere for the given viewpoint. Azimuth 0
/// looks from +Z towards the center; positive elevation lifts the camera along +Y.
pub fn frame_model(mesh: &IndexedMesh, config: &RenderConfig, viewpoint: &Viewpoint) -> Result<Camera, RenderError> {
    if viewpoint.distance.is_nan() || viewpoint.distance <= 0.0 {
        return Err(RenderError::InvalidConfig("viewpoint distance must be positive".into()));
    }
    let sphere = bounding_sphere(mesh)?;
    let (az, el) = (viewpoint.azimuth_deg.to_radians(), viewpoint.elevation_deg.to_radians());
    let back = [az.sin() * el.cos(), el.sin(), az.cos() * el.cos()];
    let d = viewpoint.distance * sphere.radius;
    let eye = [0, 1, 2].map(|k| sphere.center[k] + d * back[k]);
    let world_up = if el.cos().abs() < 1e-9 { [0.0, 0.0, -el.sin().signum()] } else { [0.0, 1.0, 0.0] };
    let right = cross(world_up, back);
    let rl = norm(right);
    let right = right.map(|v| v / rl);
    let up = cross(back, right);
    Ok(Camera {
        eye,
        target: sphere.center,
        right,
        up,
        back,
        focal: focal_length(config),
        near: 1e-3 * sphere.radius,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_of_four() {
        let cfg = RenderConfig::default();
        let az: Vec<f64> = ring_viewpoints(4, &cfg).iter().map(|v| v.azimuth_deg).collect();
        assert_eq!(az, vec![0.0, 90.0, 180.0, 270.0]);
        let one = ring_viewpoints(1, &cfg);
        assert_eq!(one, vec![Viewpoint::main(&cfg)]);
    }

    #[test]
    fn ring_gaps_are_uniform() {
        let cfg = RenderConfig {
            main_azimuth_deg: 10.0,
            ..Default::default()
        };
        let vs = ring_viewpoints(7, &cfg);
        for w in vs.windows(2) {
            let gap = (w[1].azimuth_deg - w[0].azimuth_deg).rem_euclid(360.0);
            assert!((gap - 360.0 / 7.0).abs() < 1e-9);
        }
    }

    #[test]
    fn basis_is_orthonormal_and_looks_at_target() {
        let m = crate::fixtures::uv_sphere(6, 8);
        let cfg = RenderConfig::default();
        for (az, el) in [(0.0, 0.0), (37.0, 20.0), (200.0, -60.0), (0.0, 90.0)] {
            let vp = Viewpoint {
                azimuth_deg: az,
                elevation_deg: el,
                distance: 3.0,
            };
            let c = frame_model(&m, &cfg, &vp).unwrap();
            let v = c.to_view(c.target);
            assert!(v[0].abs() < 1e-9 && v[1].abs() < 1e-9 && v[2] < 0.0);
            assert!((crate::asset::dot(c.right, c.up)).abs() < 1e-12);
        }
    }
}
