//! Exact nearest-neighbour search over a static point set.
//!
//! Ties are broken toward the lower point index so results never depend on
//! tree layout.

use super::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Debug, Clone)]
enum Node {
    Leaf {
        start: usize,
        end: usize,
    },
    Split {
        dim: usize,
        value: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone)]
pub struct KdTree {
    points: Vec<Vec3>,
    order: Vec<usize>,
    nodes: Vec<Node>,
    /// Tight bounding box per node.
    bounds: Vec<(Vec3, Vec3)>,
}

#[inline]
fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

impl KdTree {
    pub fn new(points: &[Vec3]) -> Self {
        let mut tree = Self {
            points: points.to_vec(),
            order: (0..points.len()).collect(),
            nodes: Vec::new(),
            bounds: Vec::new(),
        };
        if !points.is_empty() {
            tree.build(0, points.len());
        }
        tree
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let id = self.nodes.len();
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        for &i in &self.order[start..end] {
            lo = lo.inf(&self.points[i]);
            hi = hi.sup(&self.points[i]);
        }
        self.bounds.push((lo, hi));
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dim = (hi - lo).imax();
        if hi[dim] - lo[dim] <= 0.0 {
            // all points coincide
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let mid = start + (end - start) / 2;
        let points = &self.points;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            points[a][dim].total_cmp(&points[b][dim]).then(a.cmp(&b))
        });
        let value = self.points[self.order[mid]][dim];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Split {
            dim,
            value,
            left,
            right,
        };
        id
    }

    /// Index and squared distance of the nearest point, or `None` when empty.
    pub fn nearest(&self, q: &Vec3) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (f64::INFINITY, usize::MAX);
        self.nearest_rec(0, q, &mut best);
        Some((best.1, best.0))
    }

    /// Like [`KdTree::nearest`], seeded with a candidate index to tighten pruning.
    pub fn nearest_from(&self, q: &Vec3, hint: usize) -> Option<(usize, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = ((self.points[hint] - q).norm_squared(), hint);
        self.nearest_rec(0, q, &mut best);
        Some((best.1, best.0))
    }

    fn box_distance_sq(&self, node: usize, q: &Vec3) -> f64 {
        let (lo, hi) = &self.bounds[node];
        (0..3)
            .map(|a| {
                let d = (lo[a] - q[a]).max(q[a] - hi[a]).max(0.0);
                d * d
            })
            .sum()
    }

    fn nearest_rec(&self, node: usize, q: &Vec3, best: &mut (f64, usize)) {
        // equal distances are still visited so lower indices can win ties
        if self.box_distance_sq(node, q) > best.0 {
            return;
        }
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = ((self.points[i] - q).norm_squared(), i);
                    if better(cand, *best) {
                        *best = cand;
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let (near, far) = if q[dim] < value { (left, right) } else { (right, left) };
                self.nearest_rec(near, q, best);
                self.nearest_rec(far, q, best);
            }
        }
    }

    /// The `k` nearest points as `(index, squared distance)`, closest first.
    pub fn k_nearest(&self, q: &Vec3, k: usize) -> Vec<(usize, f64)> {
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let mut heap: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        self.knn_rec(0, q, k, &mut heap);
        heap.into_iter().map(|(d, i)| (i, d)).collect()
    }

    // `found` is kept sorted ascending; k is small so insertion is cheap.
    fn knn_rec(&self, node: usize, q: &Vec3, k: usize, found: &mut Vec<(f64, usize)>) {
        if found.len() == k && self.box_distance_sq(node, q) > found[k - 1].0 {
            return;
        }
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    let cand = ((self.points[i] - q).norm_squared(), i);
                    if found.len() < k || better(cand, found[found.len() - 1]) {
                        let pos = found.partition_point(|&e| better(e, cand));
                        found.insert(pos, cand);
                        found.truncate(k);
                    }
                }
            }
            Node::Split { dim, value, left, right } => {
                let (near, far) = if q[dim] < value { (left, right) } else { (right, left) };
                self.knn_rec(near, q, k, found);
                self.knn_rec(far, q, k, found);
            }
        }
    }
}

/// Linear-scan nearest neighbour with the same tie rule as [`KdTree::nearest`].
pub fn nearest_brute_force(points: &[Vec3], q: &Vec3) -> Option<(usize, f64)> {
    let mut best = (f64::INFINITY, usize::MAX);
    for (i, p) in points.iter().enumerate() {
        let cand = ((p - q).norm_squared(), i);
        if better(cand, best) {
            best = cand;
        }
    }
    (best.1 != usize::MAX).then_some((best.1, best.0))
}
