use serde::{Deserialize, Serialize};

use crate::par::{for_each_chunk_mut, map_indices, Parallelism};

use super::{Costmap, GridSpec, LethalMask, LETHAL};

/// Exponential falloff `254 · exp(−γ·δ)` away from inflated obstacles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayParams {
    /// Decay rate γ (1/m).
    pub gamma: f64,
}

impl Default for DecayParams {
    fn default() -> Self {
        Self { gamma: 2.0 }
    }
}

impl DecayParams {
    /// Cost of a free cell `distance` meters from the nearest lethal cell.
    pub fn cost(&self, distance: f64) -> u8 {
        let c = (254.0 * (-self.gamma * distance).exp()).round();
        if c.is_finite() {
            c.clamp(0.0, 254.0) as u8
        } else {
            0
        }
    }
}

const FAR: f64 = 1e20;

/// Squared Euclidean distance (in cells²) from each cell to the nearest
/// lethal cell, via the separable lower-envelope transform. `None` when the
/// mask has no lethal cells.
pub fn squared_distance_transform(mask: &LethalMask, exec: Parallelism) -> Option<Vec<f64>> {
    if mask.is_empty() {
        return None;
    }
    let spec = mask.spec();
    let (w, h) = (spec.width, spec.height);
    let mut rows: Vec<f64> = mask.cells().iter().map(|&l| if l { 0.0 } else { FAR }).collect();
    for_each_chunk_mut(&mut rows, w, exec, |_, row| envelope_1d(row));

    let mut cols = transpose(&rows, w, h);
    for_each_chunk_mut(&mut cols, h, exec, |_, col| envelope_1d(col));
    Some(transpose(&cols, h, w))
}

fn transpose(data: &[f64], w: usize, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; data.len()];
    for y in 0..h {
        for x in 0..w {
            out[x * h + y] = data[y * w + x];
        }
    }
    out
}

/// In-place 1-D squared distance transform of a sampled function.
fn envelope_1d(f: &mut [f64]) {
    let n = f.len();
    if n == 0 {
        return;
    }
    let src = f.to_vec();
    let mut v = vec![0usize; n];
    let mut z = vec![0f64; n + 1];
    let mut k = 0usize;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    for q in 1..n {
        let qf = q as f64;
        let intersect = |p: usize| {
            let pf = p as f64;
            ((src[q] + qf * qf) - (src[p] + pf * pf)) / (2.0 * qf - 2.0 * pf)
        };
        let mut s = intersect(v[k]);
        // z[0] = −∞ stops the walk at the first parabola.
        while s <= z[k] {
            k -= 1;
            s = intersect(v[k]);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, out) in f.iter_mut().enumerate() {
        let qf = q as f64;
        while z[k + 1] < qf {
            k += 1;
        }
        let p = v[k] as f64;
        *out = (qf - p) * (qf - p) + src[v[k]];
    }
}

/// Obstacle cost layer: 255 inside the mask, decayed cost elsewhere.
pub fn compute_g_obs(
    mask: &LethalMask,
    spec: &GridSpec,
    decay: &DecayParams,
    exec: Parallelism,
) -> Costmap {
    assert_eq!(mask.spec(), spec, "mask and costmap grids differ");
    let Some(dist2) = squared_distance_transform(mask, exec) else {
        return Costmap::zeros(*spec);
    };
    let res = spec.resolution;
    let cells = map_indices(spec.len(), exec, |i| {
        if mask.is_lethal(i) {
            LETHAL
        } else {
            decay.cost(dist2[i].sqrt() * res)
        }
    });
    Costmap::new(*spec, cells)
}
