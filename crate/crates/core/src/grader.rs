//! Walking-stability grading by K-means clustering.
//!
//! Samples are `(|ZMPe|, |ZMPec|)` pairs: the ZMP tracking error and its
//! change over one grading interval. Five clusters ordered by `|ZMPe|` give
//! levels L1 (very stable) to L5 (destabilized). Online classification picks
//! the nearest centre under `ρ = √(0.7·Δe² + 0.3·Δec²)`.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::mechanism::Axis;

pub const WEIGHT_E: f64 = 0.7;
pub const WEIGHT_EC: f64 = 0.3;
pub const LEVELS: usize = 5;
pub const DEFAULT_MAX_ITER: usize = 1000;
pub const CONVERGENCE_SHIFT: f64 = 1e-9;
/// Points per work item in the assignment step. Fixed so that partial sums
/// are combined in the same order regardless of [`Exec`] mode.
const CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilitySample {
    pub zmpe: f64,
    pub zmpec: f64,
    pub axis: Axis,
}

impl StabilitySample {
    pub fn magnitude(&self) -> [f64; 2] {
        [self.zmpe.abs(), self.zmpec.abs()]
    }
}

/// Weighted distance between a point and a centre.
pub fn weighted_distance(p: [f64; 2], c: [f64; 2]) -> f64 {
    weighted_sq(p, c).sqrt()
}

fn weighted_sq(p: [f64; 2], c: [f64; 2]) -> f64 {
    let (de, dec) = (p[0] - c[0], p[1] - c[1]);
    WEIGHT_E * de * de + WEIGHT_EC * dec * dec
}

/// Five ordered centres for one axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterModel {
    pub axis: Axis,
    /// `centers[i]` is level `i + 1`.
    pub centers: [[f64; 2]; LEVELS],
}

/// Pretrained X-axis centres `(|ZMPe|, |ZMPec|)`.
pub const PRETRAINED_X: [[f64; 2]; LEVELS] = [
    [0.0079, 0.0195],
    [0.0315, 0.0293],
    [0.0611, 0.0411],
    [0.0937, 0.0506],
    [0.1149, 0.0586],
];
/// Pretrained Y-axis centres `(|ZMPe|, |ZMPec|)`.
pub const PRETRAINED_Y: [[f64; 2]; LEVELS] = [
    [0.0152, 0.00405],
    [0.0213, 0.01313],
    [0.0352, 0.0252],
    [0.0457, 0.0406],
    [0.0607, 0.0506],
];

impl ClusterModel {
    pub fn pretrained(axis: Axis) -> Self {
        let centers = match axis {
            Axis::X => PRETRAINED_X,
            Axis::Y => PRETRAINED_Y,
        };
        Self { axis, centers }
    }

    /// Level (1..=5) of the nearest centre; ties go to the higher level.
    pub fn classify(&self, zmpe: f64, zmpec: f64) -> u8 {
        let p = [zmpe.abs(), zmpec.abs()];
        let mut best = (f64::INFINITY, 0usize);
        for (i, c) in self.centers.iter().enumerate() {
            let d = weighted_sq(p, *c);
            if d <= best.0 {
                best = (d, i);
            }
        }
        best.1 as u8 + 1
    }

    /// Plain-text form: one `axis level zmpe zmpec` line per centre.
    pub fn to_text(&self) -> String {
        self.centers
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{} {} {:.9} {:.9}\n", self.axis.name(), i + 1, c[0], c[1]))
            .collect()
    }
}

/// Classifies a sample with the model of its axis.
pub fn classify(sample: &StabilitySample, model: &ClusterModel) -> u8 {
    model.classify(sample.zmpe, sample.zmpec)
}

/// Writes both axis models in the plain-text format.
pub fn models_to_text(models: &[ClusterModel]) -> String {
    let mut s = String::from("# axis level zmpe_center zmpec_center\n");
    for m in models {
        s.push_str(&m.to_text());
    }
    s
}

/// Parses the plain-text model format; every axis present must list all
/// five levels exactly once.
pub fn models_from_text(text: &str) -> Result<Vec<ClusterModel>> {
    let mut found: Vec<(Axis, [Option<[f64; 2]>; LEVELS])> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: &str| Error::ModelFormat(format!("line {}: {msg}", lineno + 1));
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(err("expected `axis level zmpe zmpec`"));
        }
        let axis: Axis = f[0].parse().map_err(|_| err("axis must be x or y"))?;
        let level: usize = f[1].parse().map_err(|_| err("level must be an integer"))?;
        if !(1..=LEVELS).contains(&level) {
            return Err(err("level must be 1..5"));
        }
        let e: f64 = f[2].parse().map_err(|_| err("bad zmpe"))?;
        let ec: f64 = f[3].parse().map_err(|_| err("bad zmpec"))?;
        let slot = match found.iter_mut().find(|(a, _)| *a == axis) {
            Some(s) => s,
            None => {
                found.push((axis, [None; LEVELS]));
                found.last_mut().expect("just pushed")
            }
        };
        if slot.1[level - 1].replace([e, ec]).is_some() {
            return Err(err("duplicate level"));
        }
    }
    found
        .into_iter()
        .map(|(axis, levels)| {
            let mut centers = [[0.0; 2]; LEVELS];
            for (i, c) in levels.iter().enumerate() {
                centers[i] = c.ok_or_else(|| {
                    Error::ModelFormat(format!("axis {} misses level {}", axis.name(), i + 1))
                })?;
            }
            Ok(ClusterModel { axis, centers })
        })
        .collect()
}

/// Clustering result with diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    /// Centres sorted ascending by the first coordinate.
    pub centers: Vec<[f64; 2]>,
    /// Cluster of every point, referring to the sorted centres.
    pub labels: Vec<usize>,
    /// Sum of squared weighted distances after every assignment step.
    pub inertia_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl KMeansFit {
    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().unwrap_or(&0.0)
    }

    pub fn into_model(self, axis: Axis) -> Result<ClusterModel> {
        let centers: [[f64; 2]; LEVELS] = self
            .centers
            .try_into()
            .map_err(|_| Error::param("k", "a stability model needs exactly five clusters"))?;
        Ok(ClusterModel { axis, centers })
    }
}

struct ChunkStats {
    sums: Vec<[f64; 2]>,
    counts: Vec<usize>,
    inertia: f64,
}

fn assign(
    points: &[[f64; 2]],
    centers: &[[f64; 2]],
    labels: &mut [usize],
    exec: Exec,
) -> (Vec<[f64; 2]>, Vec<usize>, f64) {
    let k = centers.len();
    let chunks: Vec<(&[[f64; 2]], usize)> =
        points.chunks(CHUNK).zip((0..).step_by(CHUNK)).collect();
    let results: Vec<(Vec<usize>, ChunkStats)> = exec.map(&chunks, |&(pts, _)| {
        let mut stats = ChunkStats {
            sums: vec![[0.0; 2]; k],
            counts: vec![0; k],
            inertia: 0.0,
        };
        let mut lab = Vec::with_capacity(pts.len());
        for p in pts {
            let (mut best, mut bi) = (f64::INFINITY, 0);
            for (j, c) in centers.iter().enumerate() {
                let d = weighted_sq(*p, *c);
                if d < best {
                    best = d;
                    bi = j;
                }
            }
            stats.sums[bi][0] += p[0];
            stats.sums[bi][1] += p[1];
            stats.counts[bi] += 1;
            stats.inertia += best;
            lab.push(bi);
        }
        (lab, stats)
    });
    let mut sums = vec![[0.0; 2]; k];
    let mut counts = vec![0; k];
    let mut inertia = 0.0;
    for ((lab, st), &(_, start)) in results.into_iter().zip(&chunks) {
        labels[start..start + lab.len()].copy_from_slice(&lab);
        for j in 0..k {
            sums[j][0] += st.sums[j][0];
            sums[j][1] += st.sums[j][1];
            counts[j] += st.counts[j];
        }
        inertia += st.inertia;
    }
    (sums, counts, inertia)
}

/// Lloyd iteration under the weighted distance with seeded k-means++
/// initialisation. Empty clusters are re-seeded at the point farthest from
/// its current centre.
pub fn kmeans(
    points: &[[f64; 2]],
    k: usize,
    max_iter: usize,
    seed: u64,
    exec: Exec,
) -> Result<KMeansFit> {
    if k == 0 {
        return Err(Error::param("k", "must be positive"));
    }
    if points.len() < k {
        return Err(Error::InsufficientData {
            needed: k,
            got: points.len(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = plus_plus_init(points, k, &mut rng);
    kmeans_from(points, init, max_iter, exec)
}

/// k-means++ seeding under the weighted distance: each further centre is
/// drawn with probability proportional to its squared distance from the
/// nearest centre chosen so far.
fn plus_plus_init(points: &[[f64; 2]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 2]> {
    let mut centers = vec![points[rng.random_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|p| weighted_sq(*p, centers[0])).collect();
    while centers.len() < k {
        let idx = match WeightedIndex::new(&d2) {
            Ok(dist) => dist.sample(rng),
            // Every point coincides with a centre.
            Err(_) => rng.random_range(0..points.len()),
        };
        let c = points[idx];
        centers.push(c);
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(weighted_sq(*p, c));
        }
    }
    centers
}

/// Lloyd iteration from explicit initial centres.
pub fn kmeans_from(
    points: &[[f64; 2]],
    init: Vec<[f64; 2]>,
    max_iter: usize,
    exec: Exec,
) -> Result<KMeansFit> {
    let k = init.len();
    if k == 0 {
        return Err(Error::param("k", "must be positive"));
    }
    if points.len() < k {
        return Err(Error::InsufficientData {
            needed: k,
            got: points.len(),
        });
    }
    let mut centers = init;
    let mut labels = vec![0usize; points.len()];
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let (mut sums, mut counts, inertia) = assign(points, &centers, &mut labels, exec);
        history.push(inertia);
        // Repair empty clusters by stealing the worst-fitting point.
        for j in 0..k {
            if counts[j] > 0 {
                continue;
            }
            let (idx, _) = points
                .iter()
                .enumerate()
                .filter(|(i, _)| counts[labels[*i]] > 1)
                .map(|(i, p)| (i, weighted_sq(*p, centers[labels[i]])))
                .fold(
                    (usize::MAX, -1.0),
                    |acc, x| if x.1 > acc.1 { x } else { acc },
                );
            if idx == usize::MAX {
                continue;
            }
            let old = labels[idx];
            let p = points[idx];
            sums[old][0] -= p[0];
            sums[old][1] -= p[1];
            counts[old] -= 1;
            sums[j] = p;
            counts[j] = 1;
            labels[idx] = j;
        }
        let mut shift: f64 = 0.0;
        for j in 0..k {
            if counts[j] == 0 {
                continue;
            }
            let c = [sums[j][0] / counts[j] as f64, sums[j][1] / counts[j] as f64];
            shift = shift.max(
                (c[0] - centers[j][0])
                    .abs()
                    .max((c[1] - centers[j][1]).abs()),
            );
            centers[j] = c;
        }
        if shift < CONVERGENCE_SHIFT {
            converged = true;
            break;
        }
    }
    // Final assignment against the final centres.
    let (_, _, inertia) = assign(points, &centers, &mut labels, exec);
    history.push(inertia);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        centers[a][0]
            .total_cmp(&centers[b][0])
            .then(centers[a][1].total_cmp(&centers[b][1]))
    });
    let mut rank = vec![0; k];
    for (r, &o) in order.iter().enumerate() {
        rank[o] = r;
    }
    let sorted: Vec<[f64; 2]> = order.iter().map(|&o| centers[o]).collect();
    for l in labels.iter_mut() {
        *l = rank[*l];
    }
    Ok(KMeansFit {
        centers: sorted,
        labels,
        inertia_history: history,
        iterations,
        converged,
    })
}

/// Clusters samples of one axis into a five-level model.
pub fn kmeans_train(
    samples: &[StabilitySample],
    axis: Axis,
    max_iter: usize,
    seed: u64,
    exec: Exec,
) -> Result<ClusterModel> {
    let points: Vec<[f64; 2]> = samples
        .iter()
        .filter(|s| s.axis == axis)
        .map(StabilitySample::magnitude)
        .collect();
    kmeans(&points, LEVELS, max_iter, seed, exec)?.into_model(axis)
}

/// Builds samples from an error trace sampled every `dt`: the error change
/// is taken over `lag` samples.
pub fn samples_from_errors(errors: &[f64], lag: usize, axis: Axis) -> Vec<StabilitySample> {
    if lag == 0 || errors.len() <= lag {
        return Vec::new();
    }
    (lag..errors.len())
        .map(|k| StabilitySample {
            zmpe: errors[k],
            zmpec: errors[k] - errors[k - lag],
            axis,
        })
        .collect()
}
