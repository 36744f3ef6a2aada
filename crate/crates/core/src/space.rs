//! Continuous piecewise cubics vanishing on the boundary.

use crate::element::{eval_basis, physical_derivatives, AffineMap, N_NODES, NODES};
use crate::error::Result;
use crate::geom::{Sym2, Vec2};
use crate::mesh::{Mesh, PointLocator};

/// Marker for a local dof that is eliminated by the boundary condition.
pub const CONSTRAINED: usize = usize::MAX;

/// Global numbering: vertex dofs first, then two dofs per edge (the first
/// one nearer the lower vertex index), then one per cell.
#[derive(Debug, Clone)]
pub struct DofMap {
    n_total: usize,
    n_free: usize,
    cell_dofs: Vec<[usize; N_NODES]>,
    cell_free: Vec<[usize; N_NODES]>,
    free_index: Vec<usize>,
    free_to_global: Vec<usize>,
    coords: Vec<Vec2>,
}

impl DofMap {
    pub fn n_total(&self) -> usize {
        self.n_total
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn n_constrained(&self) -> usize {
        self.n_total - self.n_free
    }

    pub fn cell_dofs(&self, t: usize) -> &[usize; N_NODES] {
        &self.cell_dofs[t]
    }

    /// Free indices of the cell's dofs, [`CONSTRAINED`] where eliminated.
    pub fn cell_free(&self, t: usize) -> &[usize; N_NODES] {
        &self.cell_free[t]
    }

    pub fn free_index(&self, global: usize) -> Option<usize> {
        let f = self.free_index[global];
        (f != CONSTRAINED).then_some(f)
    }

    pub fn free_to_global(&self, free: usize) -> usize {
        self.free_to_global[free]
    }

    /// Physical location of a global dof.
    pub fn coord(&self, global: usize) -> Vec2 {
        self.coords[global]
    }
}

pub fn build_dofmap(mesh: &Mesh) -> DofMap {
    let nv = mesh.n_vertices();
    let ne = mesh.n_edges();
    let nt = mesh.n_triangles();
    let n_total = nv + 2 * ne + nt;

    let mut constrained = vec![false; n_total];
    let mut coords = vec![[0.0; 2]; n_total];
    for (v, p) in mesh.vertices().iter().enumerate() {
        coords[v] = *p;
        constrained[v] = mesh.is_boundary_vertex(v);
    }
    for (e, &[a, b]) in mesh.edges().iter().enumerate() {
        let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
        for k in 0..2 {
            let s = (k + 1) as f64 / 3.0;
            coords[nv + 2 * e + k] = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
            constrained[nv + 2 * e + k] = mesh.is_boundary_edge(e);
        }
    }
    for t in 0..nt {
        coords[nv + 2 * ne + t] = mesh.centroid(t);
    }

    let mut cell_dofs = Vec::with_capacity(nt);
    for t in 0..nt {
        let tri = mesh.triangles()[t];
        let edges = mesh.triangle_edges(t);
        let mut dofs = [0usize; N_NODES];
        dofs[..3].copy_from_slice(&tri);
        for k in 0..3 {
            let e = edges[k];
            let base = nv + 2 * e;
            // local node 3 + 2k sits next to local vertex k
            let forward = mesh.edges()[e][0] == tri[k];
            let (near, far) = if forward { (base, base + 1) } else { (base + 1, base) };
            dofs[3 + 2 * k] = near;
            dofs[4 + 2 * k] = far;
        }
        dofs[9] = nv + 2 * ne + t;
        cell_dofs.push(dofs);
    }

    let mut free_index = vec![CONSTRAINED; n_total];
    let mut free_to_global = Vec::new();
    for g in 0..n_total {
        if !constrained[g] {
            free_index[g] = free_to_global.len();
            free_to_global.push(g);
        }
    }
    let cell_free = cell_dofs.iter().map(|d| d.map(|g| free_index[g])).collect();

    DofMap {
        n_total,
        n_free: free_to_global.len(),
        cell_dofs,
        cell_free,
        free_index,
        free_to_global,
        coords,
    }
}

/// Coefficients of a discrete function over the free dofs.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    coeffs: Vec<f64>,
}

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field { coeffs: vec![0.0; n] }
    }

    pub fn from_vec(coeffs: Vec<f64>) -> Self {
        Field { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn scaled(&self, s: f64) -> Field {
        Field::from_vec(self.coeffs.iter().map(|c| c * s).collect())
    }
}

/// Value, gradient and Hessian of a field at a point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PointValue {
    pub value: f64,
    pub grad: Vec2,
    pub hessian: Sym2,
}

/// Mesh, dof map and point locator bundled together.
#[derive(Debug, Clone)]
pub struct Space {
    mesh: Mesh,
    dofmap: DofMap,
    maps: Vec<AffineMap>,
    locator: PointLocator,
}

impl Space {
    pub fn new(mesh: Mesh) -> Result<Self> {
        let dofmap = build_dofmap(&mesh);
        let maps = (0..mesh.n_triangles())
            .map(|t| AffineMap::from_triangle(mesh.triangle_coords(t)))
            .collect::<Result<Vec<_>>>()?;
        let locator = PointLocator::new(&mesh);
        Ok(Space {
            mesh,
            dofmap,
            maps,
            locator,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn n_free(&self) -> usize {
        self.dofmap.n_free
    }

    pub fn map(&self, t: usize) -> &AffineMap {
        &self.maps[t]
    }

    pub fn zero_field(&self) -> Field {
        Field::zeros(self.n_free())
    }

    /// Containing cell and its barycentric coordinates.
    pub fn locate_point(&self, p: Vec2) -> Result<(usize, [f64; 3])> {
        self.locator.locate(&self.mesh, p)
    }

    /// Cell-local coefficients with zeros in constrained slots.
    pub fn local_coeffs(&self, field: &Field, t: usize) -> [f64; N_NODES] {
        self.dofmap.cell_free[t].map(|f| if f == CONSTRAINED { 0.0 } else { field.coeffs[f] })
    }

    pub fn eval_in_cell(&self, field: &Field, t: usize, reference: Vec2) -> PointValue {
        let c = self.local_coeffs(field, t);
        let e = eval_basis(reference);
        let (g, h) = physical_derivatives(&e, &self.maps[t]);
        let mut out = PointValue::default();
        for i in 0..N_NODES {
            out.value += c[i] * e.values[i];
            out.grad[0] += c[i] * g[i][0];
            out.grad[1] += c[i] * g[i][1];
            out.hessian = out.hessian.add(h[i].scale(c[i]));
        }
        out
    }

    pub fn evaluate(&self, field: &Field, p: Vec2) -> Result<f64> {
        Ok(self.evaluate_full(field, p)?.value)
    }

    pub fn evaluate_full(&self, field: &Field, p: Vec2) -> Result<PointValue> {
        let (t, _) = self.locate_point(p)?;
        Ok(self.eval_in_cell(field, t, self.maps[t].to_reference(p)))
    }

    /// Nodal interpolant; constrained dofs are dropped (set to zero).
    pub fn interpolate(&self, f: impl Fn(Vec2) -> f64) -> Field {
        let coeffs = self
            .dofmap
            .free_to_global
            .iter()
            .map(|&g| f(self.dofmap.coords[g]))
            .collect();
        Field { coeffs }
    }

    /// Reference coordinates of the ten nodes mapped into cell `t`.
    pub fn cell_nodes(&self, t: usize) -> [Vec2; N_NODES] {
        NODES.map(|n| self.maps[t].to_physical(n))
    }
}
