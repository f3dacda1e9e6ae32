//! Bowen-ball neighbor search over a finite point set.
//!
//! When `ε·‖A_i‖ < 1/2` for every linear part, the lifted difference `v` of
//! two points at Bowen distance `≤ ε` satisfies `|v| ≤ ε` and `|M v| ≤ ε` with
//! `M = A_{n-2}⋯A_0`. In the right singular basis of `M` this confines `v` to
//! a box of half-widths `ε/σ_1` and `ε`, which is what the cell hash indexes.
//! Otherwise cells have width `ε` in both axes. Candidates are always
//! confirmed by an exact Bowen distance.

use crate::skew::{bowen_distance_with, FiberPoint, LinearPart};

pub struct NeighborIndex<'a> {
    points: &'a [FiberPoint],
    parts: Vec<LinearPart>,
    eps: f64,
    dim: usize,
    axes: [[f64; 2]; 2],
    widths: [f64; 2],
    keys: Vec<([i64; 2], u32)>,
}

/// Product of linear parts as a real 2×2 matrix (rows).
fn product(parts: &[LinearPart]) -> [[f64; 2]; 2] {
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for a in parts {
        let b = match a {
            LinearPart::Matrix(t) => [[t.a as f64, t.b as f64], [t.c as f64, t.d as f64]],
            LinearPart::Scalar(s) => [[*s as f64, 0.0], [0.0, 1.0]],
        };
        m = [
            [b[0][0] * m[0][0] + b[0][1] * m[1][0], b[0][0] * m[0][1] + b[0][1] * m[1][1]],
            [b[1][0] * m[0][0] + b[1][1] * m[1][0], b[1][0] * m[0][1] + b[1][1] * m[1][1]],
        ];
    }
    m
}

/// Top right-singular vector and singular value of a 2×2 matrix.
fn top_singular(m: [[f64; 2]; 2]) -> ([f64; 2], f64) {
    // Eigen-decomposition of MᵀM = [[p, q], [q, r]].
    let p = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let q = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let r = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let half = (p - r) / 2.0;
    let root = half.hypot(q);
    let top = (p + r) / 2.0 + root;
    let v = if q.abs() > 1e-300 {
        [q, top - p]
    } else if p >= r {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let n = v[0].hypot(v[1]);
    ([v[0] / n, v[1] / n], top.sqrt())
}

impl<'a> NeighborIndex<'a> {
    /// Index for the Bowen metric along `parts` (one per time step, length `n`).
    pub fn new(points: &'a [FiberPoint], parts: &[LinearPart], eps: f64) -> NeighborIndex<'a> {
        let dim = points.first().map(|p| p.dim()).unwrap_or(2);
        let max_norm = parts.iter().map(|a| a.op_norm()).fold(0.0, f64::max);
        let fast = eps * max_norm < 0.5 && !parts.is_empty();
        // Widths are padded so rounding never moves a true neighbor two cells away.
        let pad = 1.0 + 1e-9;
        let (axes, widths) = if fast {
            let m = product(&parts[..parts.len() - 1]);
            if dim == 1 {
                ([[1.0, 0.0], [0.0, 1.0]], [pad * eps / m[0][0].abs(), 1.0])
            } else {
                let (r1, sigma) = top_singular(m);
                ([r1, [-r1[1], r1[0]]], [pad * eps / sigma, pad * eps])
            }
        } else {
            ([[1.0, 0.0], [0.0, 1.0]], [pad * eps, if dim == 1 { 1.0 } else { pad * eps }])
        };
        let mut index = NeighborIndex {
            points,
            parts: parts.to_vec(),
            eps,
            dim,
            axes,
            widths,
            keys: Vec::with_capacity(points.len()),
        };
        for (i, p) in points.iter().enumerate() {
            let k = index.key(p.coords());
            index.keys.push((k, i as u32));
        }
        index.keys.sort_unstable();
        index
    }

    fn key(&self, x: [f64; 2]) -> [i64; 2] {
        let c0 = self.axes[0][0] * x[0] + self.axes[0][1] * x[1];
        let c1 = if self.dim == 1 {
            0.0
        } else {
            self.axes[1][0] * x[0] + self.axes[1][1] * x[1]
        };
        [(c0 / self.widths[0]).floor() as i64, (c1 / self.widths[1]).floor() as i64]
    }

    /// Entries with first key `k0` and second key in `[k1 - 1, k1 + 1]`.
    fn row(&self, k0: i64, k1: i64) -> &[([i64; 2], u32)] {
        let lo = self.keys.partition_point(|e| e.0 < [k0, k1 - 1]);
        let hi = lo + self.keys[lo..].partition_point(|e| e.0 <= [k0, k1 + 1]);
        &self.keys[lo..hi]
    }

    /// Indices `j` with `d_n(x, points[j]) ≤ radius` (`radius ≤ ε`), sorted.
    pub fn within(&self, x: &FiberPoint, radius: f64) -> Vec<u32> {
        let c = x.coords();
        // A neighbor p = c + s + v has |v| ≤ ε, so translate s matters only
        // when c + s lies within ε of the unit cube.
        let reach = self.eps * (1.0 + 1e-9) + 1e-12;
        let useful = |v: f64| v >= -reach && v < 1.0 + reach;
        let s1: &[f64] = if self.dim == 1 { &[0.0] } else { &[-1.0, 0.0, 1.0] };
        let mut out = Vec::new();
        for s0 in [-1.0, 0.0, 1.0] {
            if !useful(c[0] + s0) {
                continue;
            }
            for &t in s1 {
                if self.dim == 2 && !useful(c[1] + t) {
                    continue;
                }
                let k = self.key([c[0] + s0, c[1] + t]);
                for a in -1..=1 {
                    for &(_, j) in self.row(k[0] + a, k[1]) {
                        let d = bowen_distance_with(&self.parts, x, &self.points[j as usize], radius);
                        if d <= radius {
                            out.push(j);
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Neighbor lists of every indexed point in compressed form
    /// `(offsets, targets)`.
    pub fn adjacency(&self) -> (Vec<usize>, Vec<u32>) {
        let lists: Vec<Vec<u32>> = crate::parallel::map_chunks(self.points.len(), |i| {
            self.within(&self.points[i], self.eps)
        });
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(lists.iter().map(|l| l.len()).sum());
        for l in lists {
            targets.extend_from_slice(&l);
            offsets.push(targets.len());
        }
        (offsets, targets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skew::{bowen_distance, Forcing, SkewSystem};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(sys: &SkewSystem, pts: &[FiberPoint], n: usize, eps: f64, i: usize) -> Vec<u32> {
        let w = sys.driving.point(0.2);
        (0..pts.len())
            .filter(|&j| bowen_distance(sys, &w, &pts[i], &pts[j], n) <= eps)
            .map(|j| j as u32)
            .collect()
    }

    #[test]
    fn matches_brute_force_on_cat_map() {
        let sys = SkewSystem::cat_map(std::f64::consts::SQRT_2 - 1.0, Forcing::zero()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<FiberPoint> = (0..3000)
            .map(|_| FiberPoint::torus(rng.random(), rng.random()))
            .collect();
        for (n, eps) in [(1, 0.05), (4, 0.1), (6, 0.15), (3, 0.3)] {
            let parts = sys.linear_parts(&sys.driving.point(0.2), n);
            let idx = NeighborIndex::new(&pts, &parts, eps);
            for i in (0..pts.len()).step_by(97) {
                assert_eq!(idx.within(&pts[i], eps), brute(&sys, &pts, n, eps, i), "n={n} eps={eps}");
            }
        }
    }

    #[test]
    fn matches_brute_force_on_doubling() {
        let sys = SkewSystem::doubling();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<FiberPoint> = (0..2000).map(|_| FiberPoint::circle(rng.random())).collect();
        for (n, eps) in [(5, 0.08), (3, 0.4)] {
            let parts = sys.linear_parts(&crate::base::BasePoint::Unit, n);
            let idx = NeighborIndex::new(&pts, &parts, eps);
            for i in (0..pts.len()).step_by(61) {
                assert_eq!(idx.within(&pts[i], eps), brute(&sys, &pts, n, eps, i));
            }
        }
    }
}
