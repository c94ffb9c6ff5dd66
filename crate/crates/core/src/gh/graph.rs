//! Weighted graph model of one radial profile's geodesic metric.

use super::directions::DirectionSet;
use crate::constants::SPHERE_DIAMETER_FACTOR;
use crate::flow::FlowError;
use crate::geometry::{radial_length, Profile, RadialCoord};
use crate::scalar::Real;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Ring radii for the graph: a subset of grid nodes, uniform in the cell
/// index so the innermost and outermost nodes are always included.
#[derive(Clone, Debug)]
pub struct RingChoice<F> {
    pub rho: Vec<F>,
}

impl<F: Real> RingChoice<F> {
    pub fn uniform(p: &Profile<F>, count: usize) -> Result<Self, FlowError> {
        let n = p.len();
        if count < 2 || count > n {
            return Err(FlowError::InvalidParams {
                reason: format!("ring count must lie in [2, {n}]"),
            });
        }
        let rho = (0..count)
            .map(|k| p.grid.rho[k * (n - 1) / (count - 1)])
            .collect();
        Ok(RingChoice { rho })
    }
}

/// Node layout: `0` is the central point, then ring-major direction-minor.
pub struct MetricGraph<F> {
    pub rings: usize,
    pub dirs: usize,
    /// Flat adjacency: `(neighbor, weight)` per node.
    adj: Vec<Vec<(u32, F)>>,
}

impl<F: Real> MetricGraph<F> {
    /// `1 + rings * dirs` nodes.
    pub fn node_count(&self) -> usize {
        1 + self.rings * self.dirs
    }

    /// Assemble the graph of `profile` on the shared node set: node 0 is
    /// the central point, node `1 + ring * dirs + dir` the sample point.
    ///
    /// Radial edges carry the geodesic length between consecutive rings,
    /// angular edges the scaled projective distance on each ring's sphere,
    /// and the central point connects to every direction of the innermost
    /// ring through the radial tail.
    pub fn build(
        profile: &Profile<F>,
        rings: &RingChoice<F>,
        dirs: &DirectionSet<F>,
        pairwise: &[Vec<F>],
    ) -> Result<Self, FlowError> {
        let r = rings.rho.len();
        let m = dirs.len();
        let mut g = MetricGraph {
            rings: r,
            dirs: m,
            adj: vec![Vec::new(); 1 + r * m],
        };
        let mut connect = |u: usize, v: usize, w: F| {
            g.adj[u].push((v as u32, w));
            g.adj[v].push((u as u32, w));
        };
        let tail = radial_length(profile, RadialCoord::Apex, rings.rho[0])?;
        for j in 0..m {
            let v = 1 + j;
            connect(0, v, tail);
        }
        for i in 0..r - 1 {
            let w = radial_length(profile, RadialCoord::At(rings.rho[i]), rings.rho[i + 1])?;
            for j in 0..m {
                let u = 1 + i * m + j;
                let v = 1 + (i + 1) * m + j;
                connect(u, v, w);
            }
        }
        let c1 = F::of(SPHERE_DIAMETER_FACTOR);
        for i in 0..r {
            let scale = c1 * profile.value_at(rings.rho[i]).max(F::zero()).sqrt();
            for j in 0..m {
                for k in (j + 1)..m {
                    let u = 1 + i * m + j;
                    let v = 1 + i * m + k;
                    connect(u, v, scale * pairwise[j][k]);
                }
            }
        }
        Ok(g)
    }

    fn dijkstra(&self, source: usize) -> Vec<F> {
        struct Entry<F> {
            dist: F,
            node: u32,
        }
        impl<F: Real> PartialEq for Entry<F> {
            fn eq(&self, other: &Self) -> bool {
                self.dist == other.dist
            }
        }
        impl<F: Real> Eq for Entry<F> {}
        impl<F: Real> Ord for Entry<F> {
            fn cmp(&self, other: &Self) -> Ordering {
                // Reverse: the heap must pop the smallest distance first.
                other.dist.partial_cmp(&self.dist).unwrap()
            }
        }
        impl<F: Real> PartialOrd for Entry<F> {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        let n = self.node_count();
        let mut dist = vec![F::infinity(); n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::with_capacity(n);
        dist[source] = F::zero();
        heap.push(Entry {
            dist: F::zero(),
            node: source as u32,
        });
        while let Some(Entry { dist: d, node }) = heap.pop() {
            let u = node as usize;
            if done[u] {
                continue;
            }
            done[u] = true;
            for &(v, w) in &self.adj[u] {
                let v = v as usize;
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    heap.push(Entry {
                        dist: nd,
                        node: v as u32,
                    });
                }
            }
        }
        dist
    }

    /// All-pairs shortest paths, one Dijkstra per source.
    pub fn distances(&self) -> Vec<Vec<F>> {
        (0..self.node_count())
            .into_par_iter()
            .map(|s| self.dijkstra(s))
            .collect()
    }
}
