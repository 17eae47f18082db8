use std::fmt::Write as _;
use std::path::Path;

use super::bvh::Bvh;
use super::Vec3;
use crate::{Error, Result};

/// Nearest intersection along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    /// Ray parameter, in units of the (possibly unnormalized) ray direction.
    pub t: f64,
    pub triangle: u32,
}

/// Indexed triangle mesh with a bounding volume hierarchy.
///
/// Zero-area triangles are dropped at construction, so triangle ids refer to
/// the cleaned list.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[u32; 3]>,
    normals: Vec<Vec3>,
    bvh: Bvh,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[u32; 3]>) -> Result<Self> {
        for (i, tri) in triangles.iter().enumerate() {
            if let Some(bad) = tri.iter().find(|&&v| v as usize >= vertices.len()) {
                return Err(Error::invalid(format!(
                    "triangle {i} references vertex {bad} of {}",
                    vertices.len()
                )));
            }
        }
        if let Some(v) = vertices.iter().find(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(Error::invalid(format!("non-finite vertex {v:?}")));
        }
        let before = triangles.len();
        let mut kept = Vec::with_capacity(before);
        let mut normals = Vec::with_capacity(before);
        for tri in triangles {
            let [a, b, c] = tri.map(|i| vertices[i as usize]);
            let cross = (b - a).cross(&(c - a));
            let len = cross.norm();
            let scale = (b - a).norm_squared().max((c - a).norm_squared());
            if len > 1e-12 * scale && len > 0.0 {
                kept.push(tri);
                normals.push(cross / len);
            }
        }
        if kept.len() < before {
            log::warn!("dropped {} degenerate triangles", before - kept.len());
        }
        let bvh = Bvh::build(&vertices, &kept);
        Ok(Self {
            vertices,
            triangles: kept,
            normals,
            bvh,
        })
    }

    pub fn empty() -> Self {
        Self::new(Vec::new(), Vec::new()).expect("empty mesh is valid")
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[u32; 3]] {
        &self.triangles
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    /// Unit geometric normal from the winding order.
    pub fn normal(&self, triangle: u32) -> Vec3 {
        self.normals[triangle as usize]
    }

    pub fn corners(&self, triangle: u32) -> [Vec3; 3] {
        self.triangles[triangle as usize].map(|i| self.vertices[i as usize])
    }

    /// Axis-aligned bounds of the referenced vertices, or `None` for an empty mesh.
    pub fn bounds(&self) -> Option<(Vec3, Vec3)> {
        self.bvh.bounds()
    }

    /// Length of the bounding-box diagonal (0 for an empty mesh).
    pub fn diagonal(&self) -> f64 {
        self.bounds().map(|(lo, hi)| (hi - lo).norm()).unwrap_or(0.0)
    }

    /// Default ray offset against self-intersection: 1e-3 of the scene diagonal.
    pub fn default_ray_offset(&self) -> f64 {
        1e-3 * self.diagonal()
    }

    /// Closest hit with `t` in `(t_min, t_max)`. Ties on `t` go to the lowest
    /// triangle index.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> Option<Hit> {
        let mut best: Option<Hit> = None;
        let mut limit = t_max;
        self.bvh.traverse(origin, dir, &mut limit, |tri, limit| {
            if let Some(t) = self.intersect_triangle(tri, origin, dir) {
                if t > t_min && t <= *limit {
                    let better = match best {
                        None => true,
                        Some(b) => t < b.t || (t == b.t && tri < b.triangle),
                    };
                    if better {
                        best = Some(Hit { t, triangle: tri });
                        *limit = t;
                    }
                }
            }
            false
        });
        best
    }

    /// Whether anything lies along the ray within `(t_min, t_max)`.
    pub fn occluded(&self, origin: &Vec3, dir: &Vec3, t_min: f64, t_max: f64) -> bool {
        let mut limit = t_max;
        let mut found = false;
        self.bvh.traverse(origin, dir, &mut limit, |tri, limit| {
            if let Some(t) = self.intersect_triangle(tri, origin, dir) {
                if t > t_min && t < *limit {
                    found = true;
                    return true;
                }
            }
            false
        });
        found
    }

    // Möller–Trumbore, two-sided.
    #[inline]
    fn intersect_triangle(&self, tri: u32, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        let [a, b, c] = self.corners(tri);
        let e1 = b - a;
        let e2 = c - a;
        let p = dir.cross(&e2);
        let det = e1.dot(&p);
        if det.abs() < 1e-14 * e1.norm() * e2.norm() * dir.norm() {
            return None;
        }
        let inv = 1.0 / det;
        let s = origin - a;
        let u = s.dot(&p) * inv;
        if !(0.0..=1.0).contains(&u) {
            return None;
        }
        let q = s.cross(&e1);
        let v = dir.dot(&q) * inv;
        if v < 0.0 || u + v > 1.0 {
            return None;
        }
        Some(e2.dot(&q) * inv)
    }

    /// Parses Wavefront OBJ text: `v` and `f` records only. Faces with more
    /// than three vertices are fan-triangulated; `v/vt/vn` references and
    /// negative indices are accepted.
    pub fn parse_obj(text: &str) -> Result<Self> {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let mut parts = line.split_whitespace();
            let err = |msg: String| Error::Parse {
                location: format!("line {}", lineno + 1),
                message: msg,
            };
            match parts.next() {
                Some("v") => {
                    let coords: Vec<f64> = parts
                        .take(3)
                        .map(|s| s.parse::<f64>().map_err(|e| err(e.to_string())))
                        .collect::<Result<_>>()?;
                    if coords.len() != 3 {
                        return Err(err("vertex needs 3 coordinates".into()));
                    }
                    vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
                }
                Some("f") => {
                    let idx: Vec<u32> = parts
                        .map(|s| {
                            let first = s.split('/').next().unwrap_or("");
                            let i: i64 = first.parse().map_err(|_| err(format!("bad index {s}")))?;
                            let resolved = if i < 0 { vertices.len() as i64 + i } else { i - 1 };
                            if resolved < 0 {
                                return Err(err(format!("index {i} out of range")));
                            }
                            Ok(resolved as u32)
                        })
                        .collect::<Result<_>>()?;
                    if idx.len() < 3 {
                        return Err(err("face needs at least 3 vertices".into()));
                    }
                    for k in 1..idx.len() - 1 {
                        triangles.push([idx[0], idx[k], idx[k + 1]]);
                    }
                }
                _ => {}
            }
        }
        Self::new(vertices, triangles)
    }

    pub fn read_obj(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_obj(&text)
    }

    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            // {:?} on f64 round-trips exactly
            let _ = writeln!(out, "v {:?} {:?} {:?}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }

    pub fn write_obj(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_obj()).map_err(|e| Error::io(path, e))
    }
}
