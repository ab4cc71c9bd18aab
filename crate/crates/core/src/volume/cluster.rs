use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::sampling::ShellSampler;
use crate::error::{invalid, Result};
use crate::geometry::{GramKernel, TangencyConfig};
use crate::mc::run_chunks;

/// Single-linkage clusters of the low-`||J||` part of the refined unit shell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterReport {
    pub cluster_count: usize,
    pub diameters: Vec<f64>,
    pub rho: f64,
    pub t: f64,
    pub linkage: f64,
    /// Accepted points.
    pub sample_count: usize,
    /// Proposals drawn.
    pub proposals: usize,
}

impl ClusterReport {
    pub fn is_empty(&self) -> bool {
        self.sample_count == 0
    }

    pub fn max_diameter(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterParams {
    pub rho: f64,
    pub delta: f64,
    pub c_n: f64,
    /// Linkage constant; points closer than `2 C rho / t` are joined.
    pub linkage_const: f64,
    pub samples: usize,
    pub seed: u64,
}

/// Rejection-samples `{ 1 - delta < |w|^2 < 1 + delta, |w_k|^3 >= 2 c_n,
/// ||J(w)|| < rho }` and clusters the accepted points.
pub fn low_jacobian_cluster(cfg: &TangencyConfig<f64>, p: &ClusterParams) -> Result<ClusterReport> {
    let t = *cfg.t();
    if !(p.delta > 0.0 && p.delta <= p.rho && p.rho <= 1.0) {
        return Err(invalid("rho", format!("need 0 < delta <= rho <= 1, got delta={} rho={}", p.delta, p.rho)));
    }
    if !(t > 0.0 && t <= 2.0) {
        return Err(invalid("t", format!("{t} not in (0, 2]")));
    }
    let points = low_jacobian_points(cfg, p.rho, p.delta, p.c_n, p.samples, p.seed);
    let linkage = 2.0 * p.linkage_const * p.rho / t;
    let labels = single_linkage(&points, linkage);
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let diameters = (0..count)
        .map(|c| {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(&labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p)
                .collect();
            diameter(&members)
        })
        .collect();
    Ok(ClusterReport {
        cluster_count: count,
        diameters,
        rho: p.rho,
        t,
        linkage,
        sample_count: points.len(),
        proposals: p.samples,
    })
}

/// Accepted shell points, in sample order.
pub fn low_jacobian_points(
    cfg: &TangencyConfig<f64>,
    rho: f64,
    delta: f64,
    c_n: f64,
    m: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    let n = cfg.dim();
    let k = cfg.k();
    let sampler = ShellSampler::new(n, delta);
    let gram = GramKernel::new(cfg);
    run_chunks(m, seed, 0, |rng, len| {
        let mut out = Vec::new();
        let mut w = vec![0.0; n];
        for _ in 0..len {
            sampler.sample_into(rng, &mut w);
            if w[k].abs().powi(3) >= 2.0 * c_n && gram.norm(&w) < rho {
                out.push(w.clone());
            }
        }
        out
    })
    .into_iter()
    .flatten()
    .collect()
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the graph `|p - q| < h`; labels are numbered in
/// order of first appearance.
pub fn single_linkage(points: &[Vec<f64>], h: f64) -> Vec<usize> {
    let m = points.len();
    let mut parent: Vec<usize> = (0..m).collect();
    let cell = |p: &[f64]| -> Vec<i64> { p.iter().map(|v| (v / h).floor() as i64).collect() };
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let h2 = h * h;
    for (i, p) in points.iter().enumerate() {
        let c = cell(p);
        let dim = c.len();
        let total = 3usize.pow(dim as u32);
        let mut key = c.clone();
        for code in 0..total {
            let mut rem = code;
            for d in 0..dim {
                key[d] = c[d] + (rem % 3) as i64 - 1;
                rem /= 3;
            }
            if let Some(list) = grid.get(&key) {
                for &j in list.iter().filter(|&&j| j > i) {
                    let d2: f64 = p.iter().zip(&points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
                    if d2 < h2 {
                        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                        if ri != rj {
                            parent[ri.max(rj)] = ri.min(rj);
                        }
                    }
                }
            }
        }
    }
    let mut label_of = HashMap::new();
    (0..m)
        .map(|i| {
            let r = find(&mut parent, i);
            let next = label_of.len();
            *label_of.entry(r).or_insert(next)
        })
        .collect()
}

/// Largest pairwise distance.
pub fn diameter(points: &[&Vec<f64>]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d2: f64 = points[i].iter().zip(points[j]).map(|(a, b)| (a - b) * (a - b)).sum();
            best = best.max(d2);
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{default_c_n, jacobian_gram_norm, AxisFrame, Radii};
    use crate::mc::RngStream;

    #[test]
    fn linkage_on_known_layout() {
        let pts = vec![
            vec![0.0, 0.0],
            vec![0.05, 0.0],
            vec![0.1, 0.0],
            vec![1.0, 1.0],
            vec![1.04, 1.0],
            vec![-3.0, 2.0],
        ];
        let l = single_linkage(&pts, 0.06);
        assert_eq!(l, vec![0, 0, 0, 1, 1, 2]);
        let members: Vec<&Vec<f64>> = pts[..3].iter().collect();
        assert!((diameter(&members) - 0.1).abs() < 1e-15);
    }

    #[test]
    fn linkage_matches_brute_force() {
        let mut rng = RngStream::new(1, 0);
        let pts: Vec<Vec<f64>> = (0..300).map(|_| (0..3).map(|_| rng.uniform()).collect()).collect();
        let h = 0.08;
        let l = single_linkage(&pts, h);
        // Flood fill over the full graph.
        let mut lab = vec![usize::MAX; pts.len()];
        let mut next = 0;
        for s in 0..pts.len() {
            if lab[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            lab[s] = next;
            while let Some(i) = stack.pop() {
                for j in 0..pts.len() {
                    let d2: f64 = pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).powi(2)).sum();
                    if lab[j] == usize::MAX && d2 < h * h {
                        lab[j] = next;
                        stack.push(j);
                    }
                }
            }
            next += 1;
        }
        assert_eq!(l, lab);
    }

    #[test]
    fn accepted_points_satisfy_the_filters() {
        let cfg = TangencyConfig::new(AxisFrame::new(3, 0).unwrap(), 0.7, Radii::new(vec![0.8, 1.3, 1.1]).unwrap()).unwrap();
        let c = default_c_n(3);
        let pts = low_jacobian_points(&cfg, 0.2, 0.05, c, 200_000, 3);
        assert!(!pts.is_empty());
        for w in &pts {
            let s: f64 = w.iter().map(|v| v * v).sum();
            assert!((s - 1.0).abs() < 0.05);
            assert!(w[0].abs().powi(3) >= 2.0 * c);
            assert!(jacobian_gram_norm(&cfg, w).unwrap().value() < 0.2 + 1e-12);
        }
    }

    #[test]
    fn empty_set_is_not_an_error() {
        // Large t with tiny rho: the functional stays well above rho.
        let cfg = TangencyConfig::new(AxisFrame::new(3, 0).unwrap(), 2.0, Radii::uniform(3, 0.5).unwrap()).unwrap();
        let p = ClusterParams { rho: 0.011, delta: 0.01, c_n: default_c_n(3), linkage_const: 8.0, samples: 20_000, seed: 0 };
        let r = low_jacobian_cluster(&cfg, &p).unwrap();
        assert!(r.is_empty());
        assert_eq!(r.cluster_count, 0);
        let bad = ClusterParams { rho: 0.001, ..p };
        assert!(low_jacobian_cluster(&cfg, &bad).is_err());
    }
}
