//! Humanoid-mode kinematics: homogeneous transforms, the seven-frame leg
//! chain, whole-body COM, ZMP from segment accelerations and two-link leg IK.
//!
//! Frames (all joints pitch about their local y axis):
//!
//! | index | frame | parent |
//! |-------|-------|--------|
//! | 0 | base, between the feet on the ground | |
//! | 1 | right ankle | base, at the right ankle joint |
//! | 2 | right knee | 1, `l1` up the calf |
//! | 3 | right hip / pelvis | 2, `l2` up the thigh |
//! | 4 | left hip | 3, `w` across the pelvis |
//! | 5 | left knee | 4, `l2` down the thigh |
//! | 6 | left ankle | 5, `l1` down the calf |
//! | 7 | lift joint carrying the upper body and slider | 3 |
//! | 8 | right foot (sole-aligned, auxiliary) | base |
//!
//! The pelvis is upright when `θ1 + θ2 + θ3 = 0`. The left leg is traversed
//! hip-to-ankle with negated angles, so both legs use the same IK branch.

use nalgebra::{Matrix2, Matrix3, Rotation3, Vector2, Vector3};

use crate::error::{Error, Result};

pub const FRAME_COUNT: usize = 9;
pub const RIGHT_FOOT_FRAME: usize = 8;
pub const LIFT_FRAME: usize = 7;

/// Rigid transform `p ↦ R·p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameTransform {
    pub rotation: Matrix3<f64>,
    pub translation: Vector3<f64>,
}

impl Default for FrameTransform {
    fn default() -> Self {
        Self::identity()
    }
}

impl FrameTransform {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    pub fn translation(x: f64, y: f64, z: f64) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::new(x, y, z),
        }
    }

    pub fn rot_y(theta: f64) -> Self {
        Self {
            rotation: *Rotation3::from_axis_angle(&Vector3::y_axis(), theta).matrix(),
            translation: Vector3::zeros(),
        }
    }

    /// `self · other`
    pub fn then(&self, other: &FrameTransform) -> FrameTransform {
        FrameTransform {
            rotation: self.rotation * other.rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> FrameTransform {
        let rt = self.rotation.transpose();
        FrameTransform {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Homogeneous 4×4 form.
    pub fn to_homogeneous(&self) -> nalgebra::Matrix4<f64> {
        let mut m = nalgebra::Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// Largest deviation of `RᵀR` from identity and of `det R` from one.
    pub fn orthonormality_residual(&self) -> f64 {
        let e = (self.rotation.transpose() * self.rotation - Matrix3::identity())
            .abs()
            .max();
        e.max((self.rotation.determinant() - 1.0).abs())
    }
}

/// Neighbouring-frame transform `Rz(θz)·Ry(θy)·Rx(θx)` followed by the
/// translation `(lx, ly, lz)`.
pub fn compose_transform(angles: (f64, f64, f64), offsets: (f64, f64, f64)) -> FrameTransform {
    let (tx, ty, tz) = angles;
    let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), tz)
        * Rotation3::from_axis_angle(&Vector3::y_axis(), ty)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), tx);
    FrameTransform {
        rotation: *rot.matrix(),
        translation: Vector3::new(offsets.0, offsets.1, offsets.2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Right,
    Left,
}

/// Joint configuration and geometry of the leg chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    /// θ1..θ6: right ankle, knee, hip, then left hip, knee, ankle (rad).
    pub joint_angles: [f64; 6],
    /// Lift joint pitch (rad).
    pub lift_angle: f64,
    /// Calf length (m).
    pub l1: f64,
    /// Thigh length (m).
    pub l2: f64,
    /// Lateral distance between the hip joints (m).
    pub hip_width: f64,
    /// Right ankle joint position in the base frame (m).
    pub right_ankle: Vector3<f64>,
    /// Offset from the right hip frame to the lift joint (m). Its y part
    /// includes half the hip width plus any lateral body shift.
    pub lift_offset: Vector3<f64>,
}

pub const DEFAULT_L1: f64 = 0.5;
pub const DEFAULT_L2: f64 = 0.5;
pub const DEFAULT_HIP_WIDTH: f64 = 0.3;
pub const DEFAULT_ANKLE_HEIGHT: f64 = 0.08;

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            joint_angles: [0.0; 6],
            lift_angle: 0.0,
            l1: DEFAULT_L1,
            l2: DEFAULT_L2,
            hip_width: DEFAULT_HIP_WIDTH,
            right_ankle: Vector3::new(0.0, -0.5 * DEFAULT_HIP_WIDTH, DEFAULT_ANKLE_HEIGHT),
            lift_offset: Vector3::new(0.0, 0.5 * DEFAULT_HIP_WIDTH, 0.0),
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.l1 > 0.0 && self.l2 > 0.0) {
            return Err(Error::param("link_lengths", "l1 and l2 must be positive"));
        }
        if !(self.hip_width >= 0.0) {
            return Err(Error::param("hip_width", "must be non-negative"));
        }
        Ok(())
    }

    /// Stores leg angles into θ1..θ3 (right) or θ4..θ6 (left).
    pub fn set_leg(&mut self, side: Side, angles: LegAngles) {
        match side {
            Side::Right => {
                self.joint_angles[0] = angles.ankle;
                self.joint_angles[1] = angles.knee;
                self.joint_angles[2] = angles.hip;
            }
            Side::Left => {
                self.joint_angles[3] = angles.hip;
                self.joint_angles[4] = angles.knee;
                self.joint_angles[5] = angles.ankle;
            }
        }
    }

    pub fn leg(&self, side: Side) -> LegAngles {
        let a = &self.joint_angles;
        match side {
            Side::Right => LegAngles {
                ankle: a[0],
                knee: a[1],
                hip: a[2],
            },
            Side::Left => LegAngles {
                ankle: a[5],
                knee: a[4],
                hip: a[3],
            },
        }
    }
}

/// Frames 0..=8 (see the module table) expressed in the base frame.
pub fn forward_chain(cfg: &ChainConfig) -> [FrameTransform; FRAME_COUNT] {
    let th = &cfg.joint_angles;
    let mut f = [FrameTransform::identity(); FRAME_COUNT];
    let ankle =
        FrameTransform::translation(cfg.right_ankle.x, cfg.right_ankle.y, cfg.right_ankle.z);
    f[1] = ankle.then(&FrameTransform::rot_y(th[0]));
    f[2] = f[1]
        .then(&FrameTransform::translation(0.0, 0.0, cfg.l1))
        .then(&FrameTransform::rot_y(th[1]));
    f[3] = f[2]
        .then(&FrameTransform::translation(0.0, 0.0, cfg.l2))
        .then(&FrameTransform::rot_y(th[2]));
    f[4] = f[3]
        .then(&FrameTransform::translation(0.0, cfg.hip_width, 0.0))
        .then(&FrameTransform::rot_y(-th[3]));
    f[5] = f[4]
        .then(&FrameTransform::translation(0.0, 0.0, -cfg.l2))
        .then(&FrameTransform::rot_y(-th[4]));
    f[6] = f[5]
        .then(&FrameTransform::translation(0.0, 0.0, -cfg.l1))
        .then(&FrameTransform::rot_y(-th[5]));
    f[7] = f[3]
        .then(&FrameTransform::translation(
            cfg.lift_offset.x,
            cfg.lift_offset.y,
            cfg.lift_offset.z,
        ))
        .then(&FrameTransform::rot_y(cfg.lift_angle));
    f[8] = ankle;
    f
}

/// The same frames computed by walking the chain from the left ankle, given
/// that frame's pose in the base frame.
pub fn forward_chain_from_left(
    cfg: &ChainConfig,
    left_ankle: &FrameTransform,
) -> [FrameTransform; FRAME_COUNT] {
    let th = &cfg.joint_angles;
    let mut f = [FrameTransform::identity(); FRAME_COUNT];
    f[6] = *left_ankle;
    f[5] = f[6]
        .then(&FrameTransform::rot_y(th[5]))
        .then(&FrameTransform::translation(0.0, 0.0, cfg.l1));
    f[4] = f[5]
        .then(&FrameTransform::rot_y(th[4]))
        .then(&FrameTransform::translation(0.0, 0.0, cfg.l2));
    f[3] = f[4]
        .then(&FrameTransform::rot_y(th[3]))
        .then(&FrameTransform::translation(0.0, -cfg.hip_width, 0.0));
    f[2] = f[3]
        .then(&FrameTransform::rot_y(-th[2]))
        .then(&FrameTransform::translation(0.0, 0.0, -cfg.l2));
    f[1] = f[2]
        .then(&FrameTransform::rot_y(-th[1]))
        .then(&FrameTransform::translation(0.0, 0.0, -cfg.l1));
    f[8] = f[1].then(&FrameTransform::rot_y(-th[0]));
    f[7] = f[3]
        .then(&FrameTransform::translation(
            cfg.lift_offset.x,
            cfg.lift_offset.y,
            cfg.lift_offset.z,
        ))
        .then(&FrameTransform::rot_y(cfg.lift_angle));
    f
}

/// A rigid body segment: mass and COM in its parent frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodySegment {
    pub name: &'static str,
    pub mass: f64,
    pub local_com: Vector3<f64>,
    pub parent_frame: usize,
}

impl BodySegment {
    pub fn world_com(&self, frames: &[FrameTransform]) -> Vector3<f64> {
        frames[self.parent_frame].apply(&self.local_com)
    }
}

/// Index of the slider segment in [`default_segments`].
pub const SLIDER_SEGMENT: usize = 1;

/// Default mass table (450 kg total). The upper-body COM height is set so
/// that the whole-body COM sits 0.9 m above ground in the nominal walking
/// pose (hip at 0.9 m, feet together under the hips).
pub fn default_segments() -> Vec<BodySegment> {
    let mut segs = vec![
        BodySegment {
            name: "upper_body",
            mass: 318.0,
            local_com: Vector3::new(0.0, 0.0, 0.0),
            parent_frame: 7,
        },
        BodySegment {
            name: "slider",
            mass: 60.0,
            local_com: Vector3::new(0.0, 0.0, SLIDER_HEIGHT),
            parent_frame: 7,
        },
        BodySegment {
            name: "right_calf",
            mass: 12.0,
            local_com: Vector3::new(0.0, 0.0, 0.5 * DEFAULT_L1),
            parent_frame: 1,
        },
        BodySegment {
            name: "right_thigh",
            mass: 18.0,
            local_com: Vector3::new(0.0, 0.0, 0.5 * DEFAULT_L2),
            parent_frame: 2,
        },
        BodySegment {
            name: "left_thigh",
            mass: 18.0,
            local_com: Vector3::new(0.0, 0.0, -0.5 * DEFAULT_L2),
            parent_frame: 4,
        },
        BodySegment {
            name: "left_calf",
            mass: 12.0,
            local_com: Vector3::new(0.0, 0.0, -0.5 * DEFAULT_L1),
            parent_frame: 5,
        },
        BodySegment {
            name: "right_foot",
            mass: 6.0,
            local_com: Vector3::new(0.0, 0.0, -0.5 * DEFAULT_ANKLE_HEIGHT),
            parent_frame: RIGHT_FOOT_FRAME,
        },
        BodySegment {
            name: "left_foot",
            mass: 6.0,
            local_com: Vector3::new(0.0, 0.0, -0.5 * DEFAULT_ANKLE_HEIGHT),
            parent_frame: 6,
        },
    ];
    // Nominal pose: hip at 0.9 m over the ankles.
    let mut cfg = ChainConfig::default();
    let hip = (0.0, NOMINAL_HIP_HEIGHT);
    let ankle = (0.0, DEFAULT_ANKLE_HEIGHT);
    let legs = leg_ik(hip, ankle, cfg.l1, cfg.l2).expect("nominal pose reachable");
    cfg.set_leg(Side::Right, legs);
    cfg.set_leg(Side::Left, legs);
    let frames = forward_chain(&cfg);
    let total: f64 = segs.iter().map(|s| s.mass).sum();
    let others: f64 = segs
        .iter()
        .skip(1)
        .map(|s| s.mass * s.world_com(&frames).z)
        .sum();
    let lift_z = frames[7].translation.z;
    segs[0].local_com.z = (NOMINAL_COM_HEIGHT * total - others) / segs[0].mass - lift_z;
    segs
}

pub const NOMINAL_HIP_HEIGHT: f64 = 0.9;
pub const NOMINAL_COM_HEIGHT: f64 = 0.9;
/// Slider height above the lift joint (m).
pub const SLIDER_HEIGHT: f64 = 0.15;

pub fn total_mass(segments: &[BodySegment]) -> f64 {
    segments.iter().map(|s| s.mass).sum()
}

/// Mass-weighted mean of the segment COMs in the base frame.
pub fn whole_body_com(segments: &[BodySegment], frames: &[FrameTransform]) -> Result<Vector3<f64>> {
    let m = total_mass(segments);
    if !(m > 0.0) {
        return Err(Error::param("segments", "total mass must be positive"));
    }
    let sum = segments.iter().fold(Vector3::zeros(), |acc, s| {
        acc + s.world_com(frames) * s.mass
    });
    Ok(sum / m)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ZmpPoint {
    pub x: f64,
    pub y: f64,
}

/// Point-mass ZMP from per-segment positions and accelerations.
pub fn zmp_from_accel(
    masses: &[f64],
    positions: &[Vector3<f64>],
    accels: &[Vector3<f64>],
    g: f64,
) -> Result<ZmpPoint> {
    let mut den = 0.0;
    let mut nx = 0.0;
    let mut ny = 0.0;
    for ((m, p), a) in masses.iter().zip(positions).zip(accels) {
        let w = m * (a.z + g);
        den += w;
        nx += w * p.x - m * a.x * p.z;
        ny += w * p.y - m * a.y * p.z;
    }
    if !(den > 0.0) {
        return Err(Error::BallisticPhase { denominator: den });
    }
    Ok(ZmpPoint {
        x: nx / den,
        y: ny / den,
    })
}

/// Second derivative of uniformly sampled data: central differences inside,
/// one-sided second-order stencils at both ends.
pub fn second_difference(samples: &[Vector3<f64>], dt: f64) -> Vec<Vector3<f64>> {
    let n = samples.len();
    let h2 = dt * dt;
    match n {
        0 => Vec::new(),
        1 | 2 => vec![Vector3::zeros(); n],
        3 => {
            let a = (samples[0] - 2.0 * samples[1] + samples[2]) / h2;
            vec![a; 3]
        }
        _ => (0..n)
            .map(|i| {
                if i == 0 {
                    (2.0 * samples[0] - 5.0 * samples[1] + 4.0 * samples[2] - samples[3]) / h2
                } else if i == n - 1 {
                    (2.0 * samples[n - 1] - 5.0 * samples[n - 2] + 4.0 * samples[n - 3]
                        - samples[n - 4])
                        / h2
                } else {
                    (samples[i - 1] - 2.0 * samples[i] + samples[i + 1]) / h2
                }
            })
            .collect(),
    }
}

/// ZMP along sampled segment COM trajectories. `trajectories[i][k]` is the
/// COM of segment `i` at sample `k`.
pub fn zmp(
    masses: &[f64],
    trajectories: &[Vec<Vector3<f64>>],
    dt: f64,
    g: f64,
) -> Result<Vec<ZmpPoint>> {
    if masses.len() != trajectories.len() {
        return Err(Error::param(
            "trajectories",
            "one trajectory per segment required",
        ));
    }
    let n = trajectories.first().map_or(0, |t| t.len());
    if trajectories.iter().any(|t| t.len() != n) {
        return Err(Error::param(
            "trajectories",
            "all trajectories must have equal length",
        ));
    }
    let accels: Vec<Vec<Vector3<f64>>> = trajectories
        .iter()
        .map(|t| second_difference(t, dt))
        .collect();
    let mut pos = vec![Vector3::zeros(); masses.len()];
    let mut acc = vec![Vector3::zeros(); masses.len()];
    (0..n)
        .map(|k| {
            for i in 0..masses.len() {
                pos[i] = trajectories[i][k];
                acc[i] = accels[i][k];
            }
            zmp_from_accel(masses, &pos, &acc, g)
        })
        .collect()
}

/// Ankle, knee and hip pitch angles of one leg.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LegAngles {
    pub ankle: f64,
    pub knee: f64,
    pub hip: f64,
}

/// Two-link sagittal IK from ankle `(x1, z1)` to hip `(x3, z3)` with the
/// pelvis kept upright. The knee bends forward; its angle is zero at full
/// extension and negative when bent.
pub fn leg_ik(hip: (f64, f64), ankle: (f64, f64), l1: f64, l2: f64) -> Result<LegAngles> {
    let (dx, dz) = (hip.0 - ankle.0, hip.1 - ankle.1);
    let d = dx.hypot(dz);
    let (min, max) = ((l1 - l2).abs(), l1 + l2);
    let tol = 1e-12 * max;
    if d > max + tol || d < min - tol || d == 0.0 {
        return Err(Error::Unreachable {
            distance: d,
            min,
            max,
        });
    }
    if d > max * (1.0 - 1e-9) {
        log::warn!("leg nearly singular: hip-ankle distance {d:.9} m at full extension {max:.9} m");
    }
    let phi = dx.atan2(dz);
    let alpha = ((d * d + l1 * l1 - l2 * l2) / (2.0 * l1 * d))
        .clamp(-1.0, 1.0)
        .acos();
    let kappa = ((l1 * l1 + l2 * l2 - d * d) / (2.0 * l1 * l2))
        .clamp(-1.0, 1.0)
        .acos();
    let ankle_angle = phi + alpha;
    Ok(LegAngles {
        ankle: ankle_angle,
        knee: kappa - std::f64::consts::PI,
        hip: std::f64::consts::PI - kappa - ankle_angle,
    })
}

/// Planar forward kinematics of one leg: hip `(x, z)` reached from the ankle.
pub fn leg_fk(ankle: (f64, f64), angles: &LegAngles, l1: f64, l2: f64) -> (f64, f64) {
    let t1 = angles.ankle;
    let t12 = t1 + angles.knee;
    (
        ankle.0 + l1 * t1.sin() + l2 * t12.sin(),
        ankle.1 + l1 * t1.cos() + l2 * t12.cos(),
    )
}

/// Brute-force ZMP: the ground point about which gravity and inertial forces
/// produce no horizontal moment, found by solving the affine moment equations.
pub fn zmp_moment_balance(
    masses: &[f64],
    positions: &[Vector3<f64>],
    accels: &[Vector3<f64>],
    g: f64,
) -> Option<ZmpPoint> {
    let moment = |p: Vector3<f64>| -> Vector2<f64> {
        let mut m = Vector3::zeros();
        for ((mi, c), a) in masses.iter().zip(positions).zip(accels) {
            let f = Vector3::new(-a.x, -a.y, -(a.z + g)) * *mi;
            m += (c - p).cross(&f);
        }
        Vector2::new(m.x, m.y)
    };
    let m0 = moment(Vector3::zeros());
    let jx = moment(Vector3::x()) - m0;
    let jy = moment(Vector3::y()) - m0;
    let jac = Matrix2::from_columns(&[jx, jy]);
    let sol = jac.lu().solve(&(-m0))?;
    Some(ZmpPoint { x: sol.x, y: sol.y })
}
