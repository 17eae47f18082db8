//! Binary BVH over triangles, median split on the widest centroid axis.

use super::Vec3;

const LEAF_SIZE: usize = 4;

#[derive(Debug, Clone, Copy)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Self {
            lo: Vec3::repeat(f64::INFINITY),
            hi: Vec3::repeat(f64::NEG_INFINITY),
        }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn merge(&mut self, o: &Aabb) {
        self.lo = self.lo.inf(&o.lo);
        self.hi = self.hi.sup(&o.hi);
    }

    /// Entry distance if the slab test passes within `[0, t_max]`.
    #[inline]
    fn hit(&self, origin: &Vec3, inv_dir: &Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for a in 0..3 {
            let mut near = (self.lo[a] - origin[a]) * inv_dir[a];
            let mut far = (self.hi[a] - origin[a]) * inv_dir[a];
            if near > far {
                std::mem::swap(&mut near, &mut far);
            }
            // NaN (0 * inf) leaves the interval unchanged
            if near > t0 {
                t0 = near;
            }
            if far < t1 {
                t1 = far;
            }
            if t0 > t1 * (1.0 + 4.0 * f64::EPSILON) {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    bounds: Aabb,
    // leaf: first index into `order`; interior: index of the right child
    // (left child is always the next node)
    offset: u32,
    count: u32,
}

#[derive(Debug, Clone)]
pub(crate) struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(vertices: &[Vec3], triangles: &[[u32; 3]]) -> Self {
        let mut boxes = Vec::with_capacity(triangles.len());
        let mut centroids = Vec::with_capacity(triangles.len());
        for tri in triangles {
            let mut b = Aabb::empty();
            for &i in tri {
                b.grow(&vertices[i as usize]);
            }
            centroids.push((b.lo + b.hi) * 0.5);
            boxes.push(b);
        }
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len().max(1));
        if !triangles.is_empty() {
            build_node(&mut nodes, &mut order, 0, triangles.len(), &boxes, &centroids);
        }
        Self { nodes, order }
    }

    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        self.nodes.first().map(|n| (n.bounds.lo, n.bounds.hi))
    }

    /// Visits candidate triangles front to back. `visit` may shrink `t_max`;
    /// returning `true` stops the traversal.
    pub fn traverse(
        &self,
        origin: &Vec3,
        dir: &Vec3,
        t_max: &mut f64,
        mut visit: impl FnMut(u32, &mut f64) -> bool,
    ) {
        if self.nodes.is_empty() {
            return;
        }
        let inv = Vec3::new(1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z);
        let mut stack: [u32; 64] = [0; 64];
        let mut sp = 0usize;
        let mut current = 0u32;
        loop {
            let node = &self.nodes[current as usize];
            if node.bounds.hit(origin, &inv, *t_max).is_some() {
                if node.count > 0 {
                    let first = node.offset as usize;
                    for &tri in &self.order[first..first + node.count as usize] {
                        if visit(tri, t_max) {
                            return;
                        }
                    }
                } else {
                    let left = current + 1;
                    let right = node.offset;
                    let l = self.nodes[left as usize].bounds.hit(origin, &inv, *t_max);
                    let r = self.nodes[right as usize].bounds.hit(origin, &inv, *t_max);
                    match (l, r) {
                        (Some(tl), Some(tr)) => {
                            let (near, far) = if tl <= tr { (left, right) } else { (right, left) };
                            stack[sp] = far;
                            sp += 1;
                            current = near;
                            continue;
                        }
                        (Some(_), None) => {
                            current = left;
                            continue;
                        }
                        (None, Some(_)) => {
                            current = right;
                            continue;
                        }
                        (None, None) => {}
                    }
                }
            }
            if sp == 0 {
                return;
            }
            sp -= 1;
            current = stack[sp];
        }
    }
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    start: usize,
    end: usize,
    boxes: &[Aabb],
    centroids: &[Vec3],
) -> u32 {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &i in &order[start..end] {
        bounds.merge(&boxes[i as usize]);
        cbounds.grow(&centroids[i as usize]);
    }
    let index = nodes.len() as u32;
    nodes.push(Node {
        bounds,
        offset: start as u32,
        count: (end - start) as u32,
    });
    let extent = cbounds.hi - cbounds.lo;
    let axis = extent.imax();
    if end - start <= LEAF_SIZE || extent[axis] <= 0.0 {
        return index;
    }
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |a, b| {
        centroids[*a as usize][axis]
            .total_cmp(&centroids[*b as usize][axis])
            .then(a.cmp(b))
    });
    build_node(nodes, order, start, mid, boxes, centroids);
    let right = build_node(nodes, order, mid, end, boxes, centroids);
    nodes[index as usize].offset = right;
    nodes[index as usize].count = 0;
    index
}
