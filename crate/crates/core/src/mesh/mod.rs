//! Triangulations of the plate domain with the edge topology needed by
//! the interior-penalty edge loops.

mod generate;
mod locate;
mod msh;

use std::collections::HashMap;

pub use generate::generate_disc_mesh;
pub use locate::PointLocator;
pub use msh::{import_msh, parse_msh, write_msh, write_msh_string};

use crate::error::{FvkError, Result};
use crate::geom::{self, Vec2};

/// Tolerance used by geometric predicates.
pub const EPS_GEOM: f64 = 1e-12;

/// Incident triangles of an edge. `minus` is always present; `plus` is
/// `None` on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeCells {
    pub minus: usize,
    pub plus: Option<usize>,
}

/// Unit normal, tangent and size data of a single edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeGeometry {
    /// Points from `T⁻` into `T⁺` (interior) or out of the domain (boundary).
    pub normal: Vec2,
    /// Normal rotated counterclockwise by a quarter turn.
    pub tangent: Vec2,
    pub length: f64,
    pub midpoint: Vec2,
    /// Average of the incident triangle diameters.
    pub avg_diameter: f64,
}

/// A conforming triangulation with counterclockwise cells.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Vec2>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    edge_cells: Vec<EdgeCells>,
    /// Local edge `k` of a triangle joins its vertices `k` and `k + 1`.
    triangle_edges: Vec<[usize; 3]>,
    diameters: Vec<f64>,
    boundary: Vec<bool>,
    boundary_vertex: Vec<bool>,
}

impl Mesh {
    /// Builds the edge structures of a triangulation. Clockwise triangles are
    /// reoriented; degenerate ones and non-manifold edges are rejected.
    pub fn new(vertices: Vec<Vec2>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(FvkError::Geometry("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= vertices.len()) {
                return Err(FvkError::Geometry(format!(
                    "triangle {t} references a missing vertex"
                )));
            }
            let area = geom::signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area.abs() <= EPS_GEOM {
                return Err(FvkError::Geometry(format!("triangle {t} is degenerate")));
            }
            if area < 0.0 {
                tri.swap(1, 2);
            }
        }

        let mut lookup: HashMap<[usize; 2], usize> = HashMap::with_capacity(triangles.len() * 2);
        let mut edges = Vec::new();
        let mut incident: Vec<Vec<usize>> = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [0usize; 3];
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = if a < b { [a, b] } else { [b, a] };
                let id = *lookup.entry(key).or_insert_with(|| {
                    edges.push(key);
                    incident.push(Vec::with_capacity(2));
                    edges.len() - 1
                });
                incident[id].push(t);
                local[k] = id;
            }
            triangle_edges.push(local);
        }

        let mut edge_cells = Vec::with_capacity(edges.len());
        for (e, cells) in incident.iter().enumerate() {
            match cells.as_slice() {
                [a] => edge_cells.push(EdgeCells { minus: *a, plus: None }),
                [a, b] => edge_cells.push(EdgeCells {
                    minus: (*a).min(*b),
                    plus: Some((*a).max(*b)),
                }),
                _ => {
                    return Err(FvkError::Geometry(format!(
                        "edge {:?} has {} incident triangles",
                        edges[e],
                        cells.len()
                    )))
                }
            }
        }

        let diameters = triangles
            .iter()
            .map(|tri| {
                let [a, b, c] = tri.map(|v| vertices[v]);
                geom::dist(a, b).max(geom::dist(b, c)).max(geom::dist(c, a))
            })
            .collect();
        let boundary: Vec<bool> = edge_cells.iter().map(|c| c.plus.is_none()).collect();
        let mut boundary_vertex = vec![false; vertices.len()];
        for (e, &[a, b]) in edges.iter().enumerate() {
            if boundary[e] {
                boundary_vertex[a] = true;
                boundary_vertex[b] = true;
            }
        }

        Ok(Mesh {
            vertices,
            triangles,
            edges,
            edge_cells,
            triangle_edges,
            diameters,
            boundary,
            boundary_vertex,
        })
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn edge_cells(&self, e: usize) -> EdgeCells {
        self.edge_cells[e]
    }

    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.triangle_edges[t]
    }

    pub fn diameter(&self, t: usize) -> f64 {
        self.diameters[t]
    }

    pub fn diameters(&self) -> &[f64] {
        &self.diameters
    }

    pub fn max_diameter(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.boundary[e]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.boundary_vertex[v]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [Vec2; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn signed_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        geom::signed_area(a, b, c)
    }

    pub fn centroid(&self, t: usize) -> Vec2 {
        let [a, b, c] = self.triangle_coords(t);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Partitions the edges into `(interior, boundary)` id lists.
    pub fn classify_edges(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.edges.len()).partition(|&e| !self.boundary[e])
    }

    pub fn edge_geometry(&self, e: usize) -> EdgeGeometry {
        let [a, b] = self.edges[e].map(|v| self.vertices[v]);
        let length = geom::dist(a, b);
        let tangent0 = [(b[0] - a[0]) / length, (b[1] - a[1]) / length];
        let mut normal = [tangent0[1], -tangent0[0]];
        let midpoint = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
        let cells = self.edge_cells[e];
        let inside = self.centroid(cells.minus);
        if geom::dot(normal, geom::sub(midpoint, inside)) < 0.0 {
            normal = [-normal[0], -normal[1]];
        }
        let avg_diameter = match cells.plus {
            Some(p) => 0.5 * (self.diameters[cells.minus] + self.diameters[p]),
            None => self.diameters[cells.minus],
        };
        EdgeGeometry {
            normal,
            tangent: [-normal[1], normal[0]],
            length,
            midpoint,
            avg_diameter,
        }
    }

    pub fn boundary_length(&self) -> f64 {
        (0..self.n_edges())
            .filter(|&e| self.boundary[e])
            .map(|e| {
                let [a, b] = self.edges[e];
                geom::dist(self.vertices[a], self.vertices[b])
            })
            .sum()
    }

    pub fn area(&self) -> f64 {
        (0..self.n_triangles()).map(|t| self.signed_area(t)).sum()
    }

    /// Euler characteristic `V − E + T`.
    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_triangles() as i64
    }

    /// Copy of the mesh whose interior edges carry swapped `(T⁻, T⁺)` labels.
    /// Jump/average based quantities must not change.
    pub fn with_swapped_edge_labels(&self) -> Mesh {
        let mut out = self.clone();
        for cells in &mut out.edge_cells {
            if let Some(p) = cells.plus {
                *cells = EdgeCells {
                    minus: p,
                    plus: Some(cells.minus),
                };
            }
        }
        out
    }
}
