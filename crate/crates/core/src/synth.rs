//! Deterministic test data: fixed inter-frame bone transforms, rotation and
//! screw families, seeded random rigid transforms, ellipsoid masks and a
//! three-bone synthetic joint.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::field::{write_field, AnyField, Field, Grid3, MaskField, ScalarField};
use crate::linalg::Mat4;
use crate::polyrigid::{normalize, Component, FusionModel, SceneComponent, SceneFile, WeightParams};
use crate::se3::RigidTransform;

/// A named matrix with a short description of where it comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub matrix: Mat4,
    pub provenance: String,
}

const T0: [[f64; 4]; 4] = [
    [0.9941718578, 0.1057560965, 0.02092652582, -10.089325],
    [-0.1060616449, 0.9942600131, 0.01407066546, 11.20823699],
    [-0.0193183478, -0.01620816253, 0.9996820092, 3.384391194],
    [0.0, 0.0, 0.0, 1.0],
];

const T1: [[f64; 4]; 4] = [
    [0.9969449639, 0.07495416701, 0.02196962386, -7.610509439],
    [-0.0742572844, 0.9967576861, -0.03098434582, 8.603319055],
    [-0.02422079816, 0.02925828099, 0.9992784262, 0.1743830604],
    [0.0, 0.0, 0.0, 1.0],
];

const T2: [[f64; 4]; 4] = [
    [0.9999853969, -0.002367701847, -0.004865686409, -0.5515243692],
    [0.002382844221, 0.9999923706, 0.003108616918, 0.1245495693],
    [0.004858288914, -0.003120165784, 0.9999833703, 0.09221866638],
    [0.0, 0.0, 0.0, 1.0],
];

pub const FIXTURE_NAMES: [&str; 3] = ["T0", "T1", "T2"];

/// Inter-frame rigid estimates for three ankle bones, as transcribed to ten
/// significant digits. Their rotation blocks are orthonormal only to about
/// 1e-8.
pub fn fixture(name: &str) -> Result<Mat4> {
    match name {
        "T0" => Ok(Mat4(T0)),
        "T1" => Ok(Mat4(T1)),
        "T2" => Ok(Mat4(T2)),
        other => Err(Error::InvalidArgument(format!("unknown fixture {other:?}"))),
    }
}

pub fn fixtures() -> Vec<Fixture> {
    let bones = ["calcaneus", "talus", "tibia"];
    FIXTURE_NAMES
        .iter()
        .zip(bones)
        .map(|(name, bone)| Fixture {
            name: name.to_string(),
            matrix: fixture(name).unwrap(),
            provenance: format!("{bone}, rigid motion between successive dynamic MRI frames"),
        })
        .collect()
}

fn rotation_about(axis: [f64; 3], angle: f64) -> [[f64; 3]; 3] {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|v| v / n);
    let (s, c) = angle.sin_cos();
    let k = 1.0 - c;
    [
        [c + x * x * k, x * y * k - z * s, x * z * k + y * s],
        [y * x * k + z * s, c + y * y * k, y * z * k - x * s],
        [z * x * k - y * s, z * y * k + x * s, c + z * z * k],
    ]
}

/// Rotation by `angle` about the line through `center` along `axis`.
pub fn rotation_about_point(axis: [f64; 3], angle: f64, center: [f64; 3]) -> Mat4 {
    let r = rotation_about(axis, angle);
    let d = [0, 1, 2].map(|i| center[i] - (0..3).map(|j| r[i][j] * center[j]).sum::<f64>());
    Mat4::from_block(r, d)
}

pub fn rot_z(theta: f64) -> RigidTransform {
    screw_z(theta, [0.0; 3])
}

/// z-rotation with translation `d`; a screw motion iff `d[2] ≠ 0` and `θ ≠ 0`.
pub fn screw_z(theta: f64, d: [f64; 3]) -> RigidTransform {
    let (s, c) = theta.sin_cos();
    RigidTransform::new(Mat4::from_block([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]], d)).unwrap()
}

fn unit_vector(rng: &mut ChaCha8Rng) -> [f64; 3] {
    loop {
        let v: [f64; 3] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n > 1e-3 && n <= 1.0 {
            return v.map(|x| x / n);
        }
    }
}

fn random_parts(rng: &mut ChaCha8Rng, max_angle_deg: f64, max_trans_mm: f64) -> ([f64; 3], f64, [f64; 3]) {
    let axis = unit_vector(rng);
    let angle = rng.gen_range(0.0..max_angle_deg.to_radians());
    let d = [0; 3].map(|_| if max_trans_mm > 0.0 { rng.gen_range(-max_trans_mm..max_trans_mm) } else { 0.0 });
    (axis, angle, d)
}

/// Rigid transform with a uniformly random axis, angle in
/// `[0, max_angle_deg)` and translation uniform in the cube of half-width
/// `max_trans_mm`.
pub fn random_rigid(seed: u64, max_angle_deg: f64, max_trans_mm: f64) -> RigidTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (axis, angle, d) = random_parts(&mut rng, max_angle_deg, max_trans_mm);
    RigidTransform::new(Mat4::from_block(rotation_about(axis, angle), d)).unwrap()
}

/// As [`random_rigid`], with the translation projected off the rotation axis
/// so that the pitch is zero.
pub fn random_rigid_non_screw(seed: u64, max_angle_deg: f64, max_trans_mm: f64) -> RigidTransform {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (axis, angle, d) = random_parts(&mut rng, max_angle_deg, max_trans_mm);
    let along = d[0] * axis[0] + d[1] * axis[1] + d[2] * axis[2];
    let d = [0, 1, 2].map(|i| d[i] - along * axis[i]);
    RigidTransform::new(Mat4::from_block(rotation_about(axis, angle), d)).unwrap()
}

/// Voxels whose centres satisfy `Σ ((x − c)/a)² ≤ 1` (mm).
pub fn ellipsoid_mask(grid: &Grid3, center: [f64; 3], semi_axes: [f64; 3]) -> MaskField {
    Field::from_fn(*grid, |idx| ellipsoid_radius(grid.position(idx), center, semi_axes) <= 1.0)
}

fn ellipsoid_radius(p: [f64; 3], center: [f64; 3], semi: [f64; 3]) -> f64 {
    (0..3).map(|a| ((p[a] - center[a]) / semi[a]).powi(2)).sum::<f64>().sqrt()
}

/// Isotropic scaling by 1.5 combined with a 10° z-rotation about `center`.
pub fn affine_example(center: [f64; 3]) -> Mat4 {
    let mut m = rotation_about_point([0.0, 0.0, 1.0], 10f64.to_radians(), center);
    for i in 0..3 {
        for j in 0..3 {
            m.0[i][j] *= 1.5;
        }
        m.0[i][3] = center[i] - (0..3).map(|j| m.0[i][j] * center[j]).sum::<f64>();
    }
    m
}

/// Pure 30° z-rotation about `center`.
pub fn rigid_example(center: [f64; 3]) -> Mat4 {
    rotation_about_point([0.0, 0.0, 1.0], 30f64.to_radians(), center)
}

/// One rigid body of the synthetic joint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bone {
    pub id: String,
    pub center: [f64; 3],
    pub semi_axes: [f64; 3],
    pub intensity: f64,
    /// Rotation axis through the joint centre.
    pub axis: [f64; 3],
    /// Rotation angle (radians) between the two frames.
    pub angle: f64,
}

/// Three disjoint ellipsoid bones rotating about a shared joint centre,
/// over a constant background.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointScene {
    pub grid: Grid3,
    pub joint_center: [f64; 3],
    pub bones: Vec<Bone>,
    pub background: f64,
    pub weight: WeightParams,
}

/// Default weight of the synthetic scene: sharp enough that bones stay
/// rigid, smooth enough that the gaps between them blend.
pub const SCENE_DECAY: f64 = 2.0;

pub fn joint_scene(grid: &Grid3, seed: u64) -> JointScene {
    joint_scene_with(grid, seed, WeightParams::Exponential { decay: SCENE_DECAY })
}

pub fn joint_scene_with(grid: &Grid3, seed: u64, weight: WeightParams) -> JointScene {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ext = [0, 1, 2].map(|a| (grid.dims[a] - 1) as f64 * grid.spacing[a]);
    let c = grid.center();
    let at = |f: [f64; 3]| [0, 1, 2].map(|a| c[a] + f[a] * ext[a]);
    // At least one voxel per semi-axis so that small grids keep every bone.
    let size = |f: [f64; 3]| [0, 1, 2].map(|a| (f[a] * ext[a]).max(grid.spacing[a]));
    let layout = [
        ("tibia", at([0.0, 0.0, 0.26]), size([0.12, 0.12, 0.17])),
        ("talus", at([-0.04, 0.0, -0.12]), size([0.13, 0.12, 0.09])),
        ("calcaneus", at([0.3, 0.0, -0.28]), size([0.1, 0.1, 0.08])),
    ];
    let bones = layout
        .into_iter()
        .map(|(id, center, semi_axes)| {
            // Hinge-like motion: axes within a 20° cone around y.
            let tilt = rng.gen_range(0.0..20f64.to_radians());
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let axis = [tilt.sin() * phi.cos(), tilt.cos(), tilt.sin() * phi.sin()];
            let angle = rng.gen_range(4f64.to_radians()..10f64.to_radians());
            let intensity = rng.gen_range(0.5..0.9);
            Bone { id: id.to_string(), center, semi_axes, intensity, axis, angle }
        })
        .collect();
    JointScene { grid: *grid, joint_center: c, bones, background: 0.1, weight }
}

impl JointScene {
    /// Pose of bone `k` at fraction `s` of its motion.
    pub fn pose(&self, k: usize, s: f64) -> Mat4 {
        let b = &self.bones[k];
        rotation_about_point(b.axis, s * b.angle, self.joint_center)
    }

    /// Full frame-to-frame motion of each bone.
    pub fn motions(&self) -> Vec<Mat4> {
        (0..self.bones.len()).map(|k| self.pose(k, 1.0)).collect()
    }

    fn local(&self, k: usize, s: f64, p: [f64; 3]) -> [f64; 3] {
        let b = &self.bones[k];
        rotation_about_point(b.axis, -s * b.angle, self.joint_center).transform_point(p)
    }

    pub fn masks_at(&self, s: f64) -> Vec<MaskField> {
        (0..self.bones.len())
            .map(|k| {
                let b = &self.bones[k];
                Field::from_fn(self.grid, |idx| ellipsoid_radius(self.local(k, s, self.grid.position(idx)), b.center, b.semi_axes) <= 1.0)
            })
            .collect()
    }

    /// Intensity volume with every bone at fraction `s` of its motion. Bones
    /// carry a smooth texture and a soft edge so that resampling is well posed.
    pub fn render(&self, s: f64) -> ScalarField {
        Field::from_fn(self.grid, |idx| {
            let p = self.grid.position(idx);
            let mut value = self.background;
            for (k, b) in self.bones.iter().enumerate() {
                let q = self.local(k, s, p);
                let rho = ellipsoid_radius(q, b.center, b.semi_axes);
                let edge = smoothstep((1.15 - rho) / 0.3);
                if edge > 0.0 {
                    let u = [0, 1, 2].map(|a| (q[a] - b.center[a]) / b.semi_axes[a]);
                    let texture = 0.85 + 0.15 * (2.0 * u[0]).cos() * (1.5 * u[1] + 0.5 * u[2]).cos();
                    value += edge * (b.intensity * texture - self.background);
                }
            }
            value
        })
    }

    /// Fusion model of the frame-0 masks and the full bone motions.
    pub fn model(&self, backend: &Backend) -> Result<FusionModel> {
        let masks = self.masks_at(0.0);
        let comps = self
            .bones
            .iter()
            .zip(&masks)
            .zip(self.motions())
            .map(|((b, m), t)| Component::from_mask(b.id.clone(), t, m, self.weight, backend))
            .collect::<Result<Vec<_>>>()?;
        Ok(normalize(FusionModel::new(comps)?))
    }

    /// Write `scene.json`, one mask per bone, and the frame-0 and frame-1
    /// volumes into `dir`. Returns the scene file path.
    pub fn write(&self, dir: impl AsRef<Path>) -> Result<PathBuf> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let mut comps = Vec::new();
        for ((b, m), t) in self.bones.iter().zip(self.masks_at(0.0)).zip(self.motions()) {
            let mask_name = format!("mask_{}.pgf", b.id);
            write_field(&AnyField::Mask(m), dir.join(&mask_name))?;
            comps.push(SceneComponent { id: b.id.clone(), matrix: t.0, mask: mask_name, weight: self.weight });
        }
        write_field(&AnyField::Scalar(self.render(0.0)), dir.join("volume_t0.pgf"))?;
        write_field(&AnyField::Scalar(self.render(1.0)), dir.join("volume_t1.pgf"))?;
        let path = dir.join("scene.json");
        std::fs::write(&path, serde_json::to_string_pretty(&SceneFile { components: comps })?)?;
        std::fs::write(dir.join("joint.json"), serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}
