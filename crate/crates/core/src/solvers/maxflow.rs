//! Minimum s–t cuts on an implicit 8-neighbour lattice graph.
//!
//! Highest-label push–relabel with periodic global relabelling. Only the
//! first phase runs: once no active node can reach the sink, the nodes that
//! cannot reach it in the residual graph form the source side of a minimum
//! cut.

use crate::geometry::Grid;

pub(crate) const DIRS: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (-1, -1),
    (1, -1),
    (-1, 1),
];

const INF: u32 = u32::MAX;

/// Target largest integer capacity after scaling.
const SCALE_TARGET: f64 = 1e9;

pub(crate) struct GridCut {
    offsets: [isize; 8],
    active_dirs: [bool; 8],
    in_graph: Vec<bool>,
    res: Vec<i64>,
    sink: Vec<i64>,
    excess: Vec<i64>,
    height: Vec<u32>,
    current: Vec<u8>,
    graph_nodes: usize,
}

impl GridCut {
    /// `weights[d]` is the capacity of every edge in direction `DIRS[d]`
    /// between two graph nodes (equal for opposite directions); `source` and
    /// `sink` are terminal capacities per lattice node. Graph nodes must not
    /// lie on the window edge.
    pub fn new(
        grid: &Grid,
        in_graph: Vec<bool>,
        weights: [f64; 8],
        source: &[f64],
        sink: &[f64],
    ) -> Self {
        let n = grid.len();
        let nx = grid.nx() as isize;
        let mut offsets = [0isize; 8];
        let mut active_dirs = [false; 8];
        for (d, &(dx, dy)) in DIRS.iter().enumerate() {
            offsets[d] = dx as isize + nx * dy as isize;
            active_dirs[d] = weights[d] > 0.0 && (grid.dim == 2 || dy == 0);
        }
        debug_assert!((0..n).all(|v| !in_graph[v] || !grid.on_window_edge(v)));
        let mut top = 0.0f64;
        for d in 0..8 {
            if active_dirs[d] {
                top = top.max(weights[d]);
            }
        }
        for v in 0..n {
            if in_graph[v] {
                top = top.max(source[v]).max(sink[v]);
            }
        }
        let scale = if top > 0.0 { SCALE_TARGET / top } else { 1.0 };
        let q = |x: f64| (x * scale).round().max(0.0) as i64;
        let mut res = vec![0i64; n * 8];
        let mut sink_cap = vec![0i64; n];
        let mut excess = vec![0i64; n];
        for v in 0..n {
            if !in_graph[v] {
                continue;
            }
            for d in 0..8 {
                if active_dirs[d] {
                    let w = (v as isize + offsets[d]) as usize;
                    if in_graph[w] {
                        res[v * 8 + d] = q(weights[d]);
                    }
                }
            }
            let (s, t) = (q(source[v]), q(sink[v]));
            let m = s.min(t);
            excess[v] = s - m;
            sink_cap[v] = t - m;
        }
        let graph_nodes = in_graph.iter().filter(|&&b| b).count();
        GridCut {
            offsets,
            active_dirs,
            in_graph,
            res,
            sink: sink_cap,
            excess,
            height: vec![INF; n],
            current: vec![0; n],
            graph_nodes,
        }
    }

    #[inline]
    fn neighbor(&self, v: usize, d: usize) -> usize {
        (v as isize + self.offsets[d]) as usize
    }

    fn global_relabel(&mut self) {
        self.height.iter_mut().for_each(|h| *h = INF);
        let mut queue = Vec::with_capacity(self.graph_nodes);
        for v in 0..self.in_graph.len() {
            if self.in_graph[v] && self.sink[v] > 0 {
                self.height[v] = 1;
                queue.push(v as u32);
            }
        }
        let mut head = 0;
        while head < queue.len() {
            let u = queue[head] as usize;
            head += 1;
            let hu = self.height[u];
            for d in 0..8 {
                if !self.active_dirs[d] {
                    continue;
                }
                let w = self.neighbor(u, d);
                if self.in_graph[w] && self.height[w] == INF && self.res[w * 8 + (d ^ 1)] > 0 {
                    self.height[w] = hu + 1;
                    queue.push(w as u32);
                }
            }
        }
        self.current.iter_mut().for_each(|c| *c = 0);
    }

    /// Runs the preflow phase and returns the source side of a minimum cut.
    pub fn solve(mut self) -> Vec<bool> {
        let n = self.in_graph.len();
        let max_h = self.graph_nodes as u32 + 2;
        self.global_relabel();
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); max_h as usize + 1];
        let mut top = 0usize;
        let fill = |s: &Self, buckets: &mut Vec<Vec<u32>>, top: &mut usize| {
            buckets.iter_mut().for_each(|b| b.clear());
            *top = 0;
            for v in 0..n {
                if s.in_graph[v] && s.excess[v] > 0 && s.height[v] < max_h {
                    let h = s.height[v] as usize;
                    buckets[h].push(v as u32);
                    *top = (*top).max(h);
                }
            }
        };
        fill(&self, &mut buckets, &mut top);
        let relabel_period = self.graph_nodes.max(64);
        let mut relabels = 0usize;
        loop {
            while top > 0 && buckets[top].is_empty() {
                top -= 1;
            }
            let Some(v) = buckets[top].pop() else { break };
            let v = v as usize;
            if self.excess[v] == 0 || self.height[v] as usize != top {
                continue;
            }
            // Discharge v.
            if self.sink[v] > 0 {
                let a = self.excess[v].min(self.sink[v]);
                self.excess[v] -= a;
                self.sink[v] -= a;
            }
            let hv = self.height[v];
            while self.excess[v] > 0 {
                let mut d = self.current[v] as usize;
                while d < 8 {
                    if self.active_dirs[d] && self.res[v * 8 + d] > 0 {
                        let w = self.neighbor(v, d);
                        if self.height[w] != INF && self.height[w] + 1 == hv {
                            let a = self.excess[v].min(self.res[v * 8 + d]);
                            self.res[v * 8 + d] -= a;
                            self.res[w * 8 + (d ^ 1)] += a;
                            self.excess[v] -= a;
                            if self.excess[w] == 0 && self.height[w] > 0 {
                                buckets[self.height[w] as usize].push(w as u32);
                            }
                            self.excess[w] += a;
                            if self.excess[v] == 0 {
                                break;
                            }
                        }
                    }
                    d += 1;
                }
                if self.excess[v] == 0 {
                    self.current[v] = d.min(7) as u8;
                    break;
                }
                // Relabel.
                let mut m = INF;
                for d in 0..8 {
                    if self.active_dirs[d] && self.res[v * 8 + d] > 0 {
                        let hw = self.height[self.neighbor(v, d)];
                        m = m.min(hw);
                    }
                }
                self.current[v] = 0;
                relabels += 1;
                let nh = if m == INF || m + 1 >= max_h {
                    INF
                } else {
                    m + 1
                };
                self.height[v] = nh;
                if nh != INF {
                    buckets[nh as usize].push(v as u32);
                    top = top.max(nh as usize);
                }
                break;
            }
            if relabels >= relabel_period {
                relabels = 0;
                self.global_relabel();
                fill(&self, &mut buckets, &mut top);
            }
        }
        // Source side: nodes that cannot reach the sink in the residual graph.
        self.global_relabel();
        (0..n)
            .map(|v| self.in_graph[v] && self.height[v] == INF)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force(
        nx: usize,
        ny: usize,
        in_graph: &[bool],
        w: [f64; 8],
        s: &[f64],
        t: &[f64],
    ) -> f64 {
        let nodes: Vec<usize> = (0..in_graph.len()).filter(|&v| in_graph[v]).collect();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << nodes.len()) {
            let side: Vec<bool> = {
                let mut x = vec![false; nx * ny];
                for (b, &v) in nodes.iter().enumerate() {
                    x[v] = mask & (1 << b) != 0;
                }
                x
            };
            best = best.min(cut_value(nx, in_graph, &side, w, s, t));
        }
        best
    }

    fn cut_value(
        nx: usize,
        in_graph: &[bool],
        side: &[bool],
        w: [f64; 8],
        s: &[f64],
        t: &[f64],
    ) -> f64 {
        let mut c = 0.0;
        for v in 0..side.len() {
            if !in_graph[v] {
                continue;
            }
            if side[v] {
                c += t[v];
                for (d, &(dx, dy)) in DIRS.iter().enumerate() {
                    let u = (v as i64 + dx + nx as i64 * dy) as usize;
                    if in_graph[u] && !side[u] {
                        c += w[d];
                    }
                }
            } else {
                c += s[v];
            }
        }
        c
    }

    #[test]
    fn matches_brute_force_on_small_grids() {
        let (nx, ny) = (6, 5);
        let grid = Grid::new(2, [nx, ny], 1.0, [0.0, 0.0]).unwrap();
        let mut state = 12345u64;
        let mut rnd = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1000) as f64 / 100.0
        };
        for _ in 0..20 {
            let in_graph: Vec<bool> = (0..nx * ny).map(|v| !grid.on_window_edge(v)).collect();
            let w = [1.0, 1.0, 1.3, 1.3, 0.7, 0.7, 0.4, 0.4];
            let s: Vec<f64> = (0..nx * ny).map(|_| rnd()).collect();
            let t: Vec<f64> = (0..nx * ny).map(|_| rnd()).collect();
            let side = GridCut::new(&grid, in_graph.clone(), w, &s, &t).solve();
            let got = cut_value(nx, &in_graph, &side, w, &s, &t);
            let want = brute_force(nx, ny, &in_graph, w, &s, &t);
            assert!((got - want).abs() < 1e-6 * want.max(1.0), "{got} {want}");
        }
    }
}
