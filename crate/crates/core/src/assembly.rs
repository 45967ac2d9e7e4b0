//! Assembly of the two-field least-squares blocks.
//!
//! Stress rows live in lowest-order Raviart-Thomas space (one H(div) field
//! per tensor row, degree of freedom = integral normal flux through an edge
//! with respect to the global edge normal); the displacement is continuous
//! piecewise linear with homogeneous Dirichlet conditions on the whole
//! boundary. The four blocks are
//!
//! ```text
//!   A : (A sigma, A tau) + (div sigma, div tau)      n_sigma x n_sigma
//!   B : -(A sigma, eps(v))                           n_u x n_sigma
//!   C : (eps(u), eps(v))                             n_u x n_u
//!   D : -(u, div tau)                                n_sigma x n_u
//! ```
//!
//! where `A` inside the forms is the compliance tensor. All block integrands
//! are piecewise polynomials of degree <= 2, so the default 3-point rule is
//! exact; load and functional terms involving a user right-hand side use the
//! 6-point degree-4 rule.

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::SparseMatrix;
use crate::mesh::TriangleMesh;

/// Quadrature degree used for the bilinear-form blocks (exact).
pub const BLOCK_QUADRATURE_DEGREE: usize = 2;
/// Quadrature degree used for terms involving a user right-hand side.
pub const LOAD_QUADRATURE_DEGREE: usize = 4;

/// Lame parameters (mu, lambda) with the derived 2D compliance coefficient
/// `c = lambda / (2 lambda + 2 mu)`; `c -> 1/2` in the incompressible limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LameParameters {
    pub mu: f64,
    pub lambda: f64,
}

impl LameParameters {
    pub fn new(mu: f64, lambda: f64) -> Result<LameParameters> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::parameter(format!("mu must be positive (got {mu})")));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::parameter(format!(
                "lambda must be positive (got {lambda})"
            )));
        }
        Ok(LameParameters { mu, lambda })
    }

    /// 2D compliance coefficient `lambda / (2 lambda + 2 mu)`.
    pub fn compliance_coefficient(&self) -> f64 {
        self.lambda / (2.0 * self.lambda + 2.0 * self.mu)
    }
}

/// Applies the 2D compliance tensor:
/// `A tau = (1/2 mu) (tau - c tr(tau) I)`.
pub fn apply_compliance(tau: [[f64; 2]; 2], params: &LameParameters) -> [[f64; 2]; 2] {
    let c = params.compliance_coefficient();
    let tr = tau[0][0] + tau[1][1];
    let s = 1.0 / (2.0 * params.mu);
    [
        [s * (tau[0][0] - c * tr), s * tau[0][1]],
        [s * tau[1][0], s * (tau[1][1] - c * tr)],
    ]
}

/// Degree-of-freedom maps: stress dofs are `2*edge + row` (interleaved so
/// the stiffness profile stays banded); displacement dofs run over interior
/// vertices times two components, Dirichlet dofs eliminated.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub n_sigma: usize,
    pub n_u: usize,
    /// Interior vertices in ascending index order.
    pub interior_vertices: Vec<usize>,
    /// `2*vertex + component -> dof` or `None` when eliminated.
    u_dof: Vec<Option<usize>>,
}

impl DofMap {
    pub fn new(mesh: &TriangleMesh) -> DofMap {
        let interior_vertices: Vec<usize> = (0..mesh.n_vertices())
            .filter(|v| !mesh.boundary_vertices.contains(v))
            .collect();
        let mut u_dof = vec![None; 2 * mesh.n_vertices()];
        for (k, &v) in interior_vertices.iter().enumerate() {
            u_dof[2 * v] = Some(2 * k);
            u_dof[2 * v + 1] = Some(2 * k + 1);
        }
        DofMap {
            n_sigma: 2 * mesh.n_edges(),
            n_u: 2 * interior_vertices.len(),
            interior_vertices,
            u_dof,
        }
    }

    #[inline]
    pub fn sigma_dof(&self, edge: usize, row: usize) -> usize {
        2 * edge + row
    }

    #[inline]
    pub fn u_dof(&self, vertex: usize, component: usize) -> Option<usize> {
        self.u_dof[2 * vertex + component]
    }
}

/// Rank-one penalty data for the global constant-trace stress mode, used
/// near the incompressible limit where that mode nearly annihilates A.
#[derive(Debug, Clone)]
pub struct TraceDeflation {
    /// Penalty strength.
    pub theta: f64,
    /// `weights^T sigma = integral of tr(sigma_h)` over the domain.
    pub weights: Vec<f64>,
}

/// The four assembled blocks plus dof maps and parameters.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub a: SparseMatrix,
    pub b: SparseMatrix,
    pub c: SparseMatrix,
    pub d: SparseMatrix,
    pub dofmap: DofMap,
    pub params: LameParameters,
    /// Present when the constant-trace deflation was requested; consumed by
    /// the factorization of A inside the spectral module.
    pub trace_deflation: Option<TraceDeflation>,
}

#[derive(Debug, Clone, Copy)]
pub struct AssemblyOptions {
    pub deflate_trace: bool,
    pub quadrature_degree: usize,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            deflate_trace: false,
            quadrature_degree: BLOCK_QUADRATURE_DEGREE,
        }
    }
}

/// Per-triangle geometry: oriented RT0 edge data and P1 gradients.
pub(crate) struct ElementGeometry {
    pub verts: [[f64; 2]; 3],
    pub area: f64,
    /// Per local edge (opposite the same-index vertex): global edge, sign.
    pub edges: [(usize, f64); 3],
    /// Gradients of the three hat functions.
    pub grad_p1: [[f64; 2]; 3],
}

impl ElementGeometry {
    pub fn new(mesh: &TriangleMesh, t: usize) -> ElementGeometry {
        let tri = mesh.triangles[t];
        let verts = [
            mesh.vertices[tri[0]],
            mesh.vertices[tri[1]],
            mesh.vertices[tri[2]],
        ];
        let area = mesh.signed_area(t);
        let mut edges = [(0usize, 0.0f64); 3];
        for l in 0..3 {
            let (e, s) = mesh.triangle_edges[t][l];
            edges[l] = (e, f64::from(s));
        }
        let mut grad_p1 = [[0.0f64; 2]; 3];
        for l in 0..3 {
            let p1 = verts[(l + 1) % 3];
            let p2 = verts[(l + 2) % 3];
            // perp(p2 - p1) / (2 area)
            grad_p1[l] = [
                -(p2[1] - p1[1]) / (2.0 * area),
                (p2[0] - p1[0]) / (2.0 * area),
            ];
        }
        ElementGeometry {
            verts,
            area,
            edges,
            grad_p1,
        }
    }

    /// RT0 basis field for local edge `l` at point `x`, normalized to unit
    /// integral flux through its edge (w.r.t. the global edge normal).
    #[inline]
    pub fn rt0(&self, l: usize, x: [f64; 2]) -> [f64; 2] {
        let s = self.edges[l].1;
        let p = self.verts[l];
        [
            s * (x[0] - p[0]) / (2.0 * self.area),
            s * (x[1] - p[1]) / (2.0 * self.area),
        ]
    }

    #[inline]
    pub fn rt0_div(&self, l: usize) -> f64 {
        self.edges[l].1 / self.area
    }

    /// Hat function of local vertex `l` at `x` (barycentric coordinate).
    #[inline]
    pub fn p1(&self, l: usize, x: [f64; 2]) -> f64 {
        let p1 = self.verts[(l + 1) % 3];
        let p2 = self.verts[(l + 2) % 3];
        let twice = (p2[0] - p1[0]) * (x[1] - p1[1]) - (p2[1] - p1[1]) * (x[0] - p1[0]);
        twice / (2.0 * self.area)
    }

    pub fn centroid(&self) -> [f64; 2] {
        [
            (self.verts[0][0] + self.verts[1][0] + self.verts[2][0]) / 3.0,
            (self.verts[0][1] + self.verts[1][1] + self.verts[2][1]) / 3.0,
        ]
    }
}

/// Symmetric quadrature rules on the triangle in barycentric coordinates;
/// weights sum to one (multiply by the element area).
pub(crate) fn quadrature_rule(degree: usize) -> &'static [([f64; 3], f64)] {
    const MID: [([f64; 3], f64); 3] = [
        ([0.5, 0.5, 0.0], 1.0 / 3.0),
        ([0.0, 0.5, 0.5], 1.0 / 3.0),
        ([0.5, 0.0, 0.5], 1.0 / 3.0),
    ];
    // 6-point degree-4 rule (Dunavant).
    const A1: f64 = 0.816_847_572_980_459;
    const B1: f64 = 0.091_576_213_509_771;
    const W1: f64 = 0.109_951_743_655_322;
    const A2: f64 = 0.108_103_018_168_070;
    const B2: f64 = 0.445_948_490_915_965;
    const W2: f64 = 0.223_381_589_678_011;
    const D4: [([f64; 3], f64); 6] = [
        ([A1, B1, B1], W1),
        ([B1, A1, B1], W1),
        ([B1, B1, A1], W1),
        ([A2, B2, B2], W2),
        ([B2, A2, B2], W2),
        ([B2, B2, A2], W2),
    ];
    if degree <= 2 {
        &MID
    } else {
        &D4
    }
}

#[inline]
pub(crate) fn barycentric_point(verts: &[[f64; 2]; 3], bary: [f64; 3]) -> [f64; 2] {
    [
        bary[0] * verts[0][0] + bary[1] * verts[1][0] + bary[2] * verts[2][0],
        bary[0] * verts[0][1] + bary[1] * verts[1][1] + bary[2] * verts[2][1],
    ]
}

#[inline]
fn frobenius(a: &[[f64; 2]; 2], b: &[[f64; 2]; 2]) -> f64 {
    a[0][0] * b[0][0] + a[0][1] * b[0][1] + a[1][0] * b[1][0] + a[1][1] * b[1][1]
}

/// Strain tensor of the vector hat function `phi_l e_c`.
#[inline]
fn p1_strain(grad: [f64; 2], c: usize) -> [[f64; 2]; 2] {
    let mut eps = [[0.0f64; 2]; 2];
    for j in 0..2 {
        eps[c][j] += 0.5 * grad[j];
        eps[j][c] += 0.5 * grad[j];
    }
    eps
}

/// Stress basis tensor `e_r (x) psi` evaluated as a 2x2 matrix.
#[inline]
fn stress_tensor(r: usize, psi: [f64; 2]) -> [[f64; 2]; 2] {
    let mut t = [[0.0f64; 2]; 2];
    t[r][0] = psi[0];
    t[r][1] = psi[1];
    t
}

pub fn assemble_blocks(mesh: &TriangleMesh, params: &LameParameters) -> Result<BlockSystem> {
    assemble_blocks_with(mesh, params, &AssemblyOptions::default())
}

pub fn assemble_blocks_with(
    mesh: &TriangleMesh,
    params: &LameParameters,
    options: &AssemblyOptions,
) -> Result<BlockSystem> {
    let dofmap = DofMap::new(mesh);
    if dofmap.n_u == 0 {
        return Err(Error::parameter(format!(
            "mesh too coarse for the displacement space: no interior vertices \
             (V={}, E={}, T={}); refine the mesh",
            mesh.n_vertices(),
            mesh.n_edges(),
            mesh.n_triangles()
        )));
    }

    let rule = quadrature_rule(options.quadrature_degree);
    let mut ta = Vec::new();
    let mut tb = Vec::new();
    let mut tc = Vec::new();
    let mut td = Vec::new();
    let mut trace_weights = if options.deflate_trace {
        Some(vec![0.0f64; dofmap.n_sigma])
    } else {
        None
    };

    for t in 0..mesh.n_triangles() {
        let geo = ElementGeometry::new(mesh, t);
        let w_area: Vec<f64> = rule.iter().map(|&(_, w)| w * geo.area).collect();
        let points: Vec<[f64; 2]> = rule
            .iter()
            .map(|&(b, _)| barycentric_point(&geo.verts, b))
            .collect();

        // Precompute compliance-applied stress basis tensors at each point,
        // divergences, and P1 strains.
        let mut a_stress = vec![[[[0.0f64; 2]; 2]; 6]; points.len()];
        for (qp, &x) in points.iter().enumerate() {
            for l in 0..3 {
                let psi = geo.rt0(l, x);
                for r in 0..2 {
                    a_stress[qp][2 * l + r] = apply_compliance(stress_tensor(r, psi), params);
                }
            }
        }
        let div: [f64; 3] = [geo.rt0_div(0), geo.rt0_div(1), geo.rt0_div(2)];
        let mut strain = [[[[0.0f64; 2]; 2]; 2]; 3];
        for l in 0..3 {
            for c in 0..2 {
                strain[l][c] = p1_strain(geo.grad_p1[l], c);
            }
        }

        // A block.
        for l in 0..3 {
            for r in 0..2 {
                let i = dofmap.sigma_dof(geo.edges[l].0, r);
                for lj in 0..3 {
                    for rj in 0..2 {
                        let j = dofmap.sigma_dof(geo.edges[lj].0, rj);
                        let mut val = 0.0;
                        for qp in 0..points.len() {
                            val += w_area[qp]
                                * frobenius(&a_stress[qp][2 * l + r], &a_stress[qp][2 * lj + rj]);
                        }
                        if r == rj {
                            val += div[l] * div[lj] * geo.area;
                        }
                        ta.push((i, j, val));
                    }
                }
            }
        }

        // B and C blocks (rows: interior displacement dofs).
        for lv in 0..3 {
            let v = mesh.triangles[t][lv];
            for c in 0..2 {
                let Some(row) = dofmap.u_dof(v, c) else {
                    continue;
                };
                // B: -(A sigma, eps(v))
                for l in 0..3 {
                    for r in 0..2 {
                        let col = dofmap.sigma_dof(geo.edges[l].0, r);
                        let mut val = 0.0;
                        for qp in 0..points.len() {
                            val -= w_area[qp] * frobenius(&a_stress[qp][2 * l + r], &strain[lv][c]);
                        }
                        tb.push((row, col, val));
                    }
                }
                // C: (eps(u), eps(v))
                for lu in 0..3 {
                    let vu = mesh.triangles[t][lu];
                    for cu in 0..2 {
                        let Some(col) = dofmap.u_dof(vu, cu) else {
                            continue;
                        };
                        let val = frobenius(&strain[lu][cu], &strain[lv][c]) * geo.area;
                        tc.push((row, col, val));
                    }
                }
            }
        }

        // D block: -(u, div tau); integrand phi_lv * div psi_l, affine.
        for l in 0..3 {
            for r in 0..2 {
                let row = dofmap.sigma_dof(geo.edges[l].0, r);
                for lv in 0..3 {
                    let v = mesh.triangles[t][lv];
                    // Only the component matching the tensor row couples.
                    let Some(col) = dofmap.u_dof(v, r) else {
                        continue;
                    };
                    let mut val = 0.0;
                    for (qp, &x) in points.iter().enumerate() {
                        val -= w_area[qp] * geo.p1(lv, x) * div[l];
                    }
                    td.push((row, col, val));
                }
            }
        }

        if let Some(weights) = trace_weights.as_deref_mut() {
            // integral of component r of psi_l over the element.
            let centroid = geo.centroid();
            for l in 0..3 {
                let psi_bar = geo.rt0(l, centroid);
                for r in 0..2 {
                    weights[dofmap.sigma_dof(geo.edges[l].0, r)] += psi_bar[r] * geo.area;
                }
            }
        }
    }

    let a = SparseMatrix::from_triplets(dofmap.n_sigma, dofmap.n_sigma, ta);
    let b = SparseMatrix::from_triplets(dofmap.n_u, dofmap.n_sigma, tb);
    let c = SparseMatrix::from_triplets(dofmap.n_u, dofmap.n_u, tc);
    let d = SparseMatrix::from_triplets(dofmap.n_sigma, dofmap.n_u, td);

    let trace_deflation = trace_weights.map(|weights| {
        let wtw: f64 = weights.iter().map(|x| x * x).sum();
        TraceDeflation {
            theta: a.max_abs_diag() / wtw,
            weights,
        }
    });

    Ok(BlockSystem {
        a,
        b,
        c,
        d,
        dofmap,
        params: *params,
        trace_deflation,
    })
}

/// Assembles the load vector with entries `-(f, div tau_j)` using the
/// degree-4 rule (the right-hand side is generally not polynomial).
pub fn assemble_load<F>(mesh: &TriangleMesh, dofmap: &DofMap, f: F) -> Vec<f64>
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    let rule = quadrature_rule(LOAD_QUADRATURE_DEGREE);
    let mut load = vec![0.0f64; dofmap.n_sigma];
    for t in 0..mesh.n_triangles() {
        let geo = ElementGeometry::new(mesh, t);
        for &(bary, w) in rule {
            let x = barycentric_point(&geo.verts, bary);
            let fx = f(x);
            let wa = w * geo.area;
            for l in 0..3 {
                let dv = geo.rt0_div(l);
                for r in 0..2 {
                    load[dofmap.sigma_dof(geo.edges[l].0, r)] -= wa * fx[r] * dv;
                }
            }
        }
    }
    load
}

/// Evaluates the least-squares functional
/// `|| A sigma_h - eps(u_h) ||_0^2 + || div sigma_h + f ||_0^2`.
pub fn evaluate_functional<F>(
    mesh: &TriangleMesh,
    params: &LameParameters,
    dofmap: &DofMap,
    sigma_h: &[f64],
    u_h: &[f64],
    f: F,
) -> f64
where
    F: Fn([f64; 2]) -> [f64; 2],
{
    assert_eq!(sigma_h.len(), dofmap.n_sigma);
    assert_eq!(u_h.len(), dofmap.n_u);
    let rule = quadrature_rule(LOAD_QUADRATURE_DEGREE);
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        let geo = ElementGeometry::new(mesh, t);

        // eps(u_h) and div sigma_h are constant on the element.
        let mut eps_u = [[0.0f64; 2]; 2];
        for lv in 0..3 {
            let v = mesh.triangles[t][lv];
            for c in 0..2 {
                if let Some(dof) = dofmap.u_dof(v, c) {
                    let coeff = u_h[dof];
                    let strain = p1_strain(geo.grad_p1[lv], c);
                    for i in 0..2 {
                        for j in 0..2 {
                            eps_u[i][j] += coeff * strain[i][j];
                        }
                    }
                }
            }
        }
        let mut div_sigma = [0.0f64; 2];
        for l in 0..3 {
            let dv = geo.rt0_div(l);
            for r in 0..2 {
                div_sigma[r] += sigma_h[dofmap.sigma_dof(geo.edges[l].0, r)] * dv;
            }
        }

        for &(bary, w) in rule {
            let x = barycentric_point(&geo.verts, bary);
            let wa = w * geo.area;

            let mut sigma = [[0.0f64; 2]; 2];
            for l in 0..3 {
                let psi = geo.rt0(l, x);
                for r in 0..2 {
                    let coeff = sigma_h[dofmap.sigma_dof(geo.edges[l].0, r)];
                    sigma[r][0] += coeff * psi[0];
                    sigma[r][1] += coeff * psi[1];
                }
            }
            let a_sigma = apply_compliance(sigma, params);
            let mut first = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let d = a_sigma[i][j] - eps_u[i][j];
                    first += d * d;
                }
            }
            let fx = f(x);
            let d0 = div_sigma[0] + fx[0];
            let d1 = div_sigma[1] + fx[1];
            total += wa * (first + d0 * d0 + d1 * d1);
        }
    }
    total
}

/// Coefficient vector representing a globally constant stress tensor
/// (each RT0 dof is the integral flux of the constant field through its edge).
pub fn constant_tensor_coefficients(mesh: &TriangleMesh, tensor: [[f64; 2]; 2]) -> Vec<f64> {
    let mut coeffs = vec![0.0f64; 2 * mesh.n_edges()];
    for (e, &[lo, hi]) in mesh.edges.iter().enumerate() {
        let (pa, pb) = (mesh.vertices[lo], mesh.vertices[hi]);
        let t = [pb[0] - pa[0], pb[1] - pa[1]];
        // Global normal: tangent rotated by -90 degrees, times edge length.
        let n_scaled = [t[1], -t[0]];
        for r in 0..2 {
            coeffs[2 * e + r] = tensor[r][0] * n_scaled[0] + tensor[r][1] * n_scaled[1];
        }
    }
    coeffs
}

/// H1-norm error of a discrete displacement against an exact field,
/// integrated with the degree-4 rule.
pub fn displacement_h1_error<F, G>(
    mesh: &TriangleMesh,
    dofmap: &DofMap,
    u_h: &[f64],
    exact: F,
    exact_grad: G,
) -> f64
where
    F: Fn([f64; 2]) -> [f64; 2],
    G: Fn([f64; 2]) -> [[f64; 2]; 2],
{
    let rule = quadrature_rule(LOAD_QUADRATURE_DEGREE);
    let mut total = 0.0;
    for t in 0..mesh.n_triangles() {
        let geo = ElementGeometry::new(mesh, t);
        // Discrete gradient (constant) and nodal values.
        let mut grad_h = [[0.0f64; 2]; 2]; // grad_h[c][j] = d u_c / d x_j
        let mut nodal = [[0.0f64; 2]; 3];
        for lv in 0..3 {
            let v = mesh.triangles[t][lv];
            for c in 0..2 {
                if let Some(dof) = dofmap.u_dof(v, c) {
                    let coeff = u_h[dof];
                    nodal[lv][c] = coeff;
                    grad_h[c][0] += coeff * geo.grad_p1[lv][0];
                    grad_h[c][1] += coeff * geo.grad_p1[lv][1];
                }
            }
        }
        for &(bary, w) in rule {
            let x = barycentric_point(&geo.verts, bary);
            let wa = w * geo.area;
            let ue = exact(x);
            let ge = exact_grad(x);
            let mut uh = [0.0f64; 2];
            for lv in 0..3 {
                let phi = bary[lv];
                uh[0] += phi * nodal[lv][0];
                uh[1] += phi * nodal[lv][1];
            }
            let mut err = (uh[0] - ue[0]).powi(2) + (uh[1] - ue[1]).powi(2);
            for c in 0..2 {
                for j in 0..2 {
                    err += (grad_h[c][j] - ge[c][j]).powi(2);
                }
            }
            total += wa * err;
        }
    }
    total.sqrt()
}

impl BlockSystem {
    /// Dumps the four blocks in Matrix Market coordinate format
    /// (`A.mtx`, `B.mtx`, `C.mtx`, `D.mtx`) into `dir`.
    pub fn write_matrix_market(&self, dir: &Path, comments: &[String]) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, m) in [("A", &self.a), ("B", &self.b), ("C", &self.c), ("D", &self.d)] {
            let file = std::fs::File::create(dir.join(format!("{name}.mtx")))?;
            m.write_matrix_market(std::io::BufWriter::new(file), comments)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_mesh, FamilyName, MeshFamily};

    fn params(mu: f64, lambda: f64) -> LameParameters {
        LameParameters::new(mu, lambda).unwrap()
    }

    #[test]
    fn compliance_of_identity() {
        // mu = lambda = 1: c = 1/4 and A(I) = I/4.
        let p = params(1.0, 1.0);
        assert!((p.compliance_coefficient() - 0.25).abs() < 1e-15);
        let out = apply_compliance([[1.0, 0.0], [0.0, 1.0]], &p);
        for i in 0..2 {
            for j in 0..2 {
                let want = if i == j { 0.25 } else { 0.0 };
                assert!((out[i][j] - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn compliance_of_trace_free_tensor() {
        // Trace-free input: the trace term vanishes for any lambda.
        for lambda in [1.0, 100.0, 1e8] {
            let p = params(1.0, lambda);
            let out = apply_compliance([[0.0, 1.0], [1.0, 0.0]], &p);
            assert!((out[0][1] - 0.5).abs() < 1e-15);
            assert!((out[1][0] - 0.5).abs() < 1e-15);
            assert!(out[0][0].abs() < 1e-15 && out[1][1].abs() < 1e-15);
        }
    }

    #[test]
    fn compliance_near_incompressible_limit() {
        let p = params(1.0, 1e8);
        let out = apply_compliance([[1.0, 0.0], [0.0, 1.0]], &p);
        // (1 - 2c)/2 = 1/(2 lambda + 2)
        let want = 1.0 / (2e8 + 2.0);
        assert!((out[0][0] - want).abs() < 1e-8 * want);
        assert!((out[0][0] - 5.0e-9).abs() < 1e-16);
    }

    #[test]
    fn compliance_is_linear() {
        use rand::{Rng, SeedableRng};
        let p = params(1.3, 7.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let mut s = [[0.0; 2]; 2];
            let mut t = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    s[i][j] = rng.gen_range(-1.0..1.0);
                    t[i][j] = rng.gen_range(-1.0..1.0);
                }
            }
            let (alpha, beta): (f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let mut combo = [[0.0; 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    combo[i][j] = alpha * s[i][j] + beta * t[i][j];
                }
            }
            let lhs = apply_compliance(combo, &p);
            let (as_, at) = (apply_compliance(s, &p), apply_compliance(t, &p));
            for i in 0..2 {
                for j in 0..2 {
                    assert!((lhs[i][j] - alpha * as_[i][j] - beta * at[i][j]).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn dof_counts_on_square_right_n2() {
        let mesh = generate_mesh(&MeshFamily::new(FamilyName::SquareRight, 2)).unwrap();
        let sys = assemble_blocks(&mesh, &params(1.0, 1.0)).unwrap();
        assert_eq!(sys.dofmap.n_sigma, 32);
        assert_eq!(sys.dofmap.n_u, 2);
    }

    #[test]
    fn too_coarse_mesh_is_rejected() {
        let mesh = generate_mesh(&MeshFamily::new(FamilyName::SquareRight, 1)).unwrap();
        let err = assemble_blocks(&mesh, &params(1.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::Parameter(_)));
        assert!(err.to_string().contains("too coarse"));
    }

    #[test]
    fn blocks_are_exactly_symmetric() {
        let mesh = generate_mesh(&MeshFamily::new(FamilyName::SquareCrossed, 3)).unwrap();
        let sys = assemble_blocks(&mesh, &params(1.0, 100.0)).unwrap();
        assert_eq!(sys.a.symmetry_defect(), 0.0);
        assert_eq!(sys.c.symmetry_defect(), 0.0);
    }

    #[test]
    fn identity_tensor_energy() {
        // x^T A x for the coefficient vector of tau = I on the unit square,
        // mu = lambda = 1: integral |A I|^2 = 2 * (1/4)^2 = 1/8, div I = 0.
        let mesh = generate_mesh(&MeshFamily::new(FamilyName::SquareRight, 2)).unwrap();
        let sys = assemble_blocks(&mesh, &params(1.0, 1.0)).unwrap();
        let x = constant_tensor_coefficients(&mesh, [[1.0, 0.0], [0.0, 1.0]]);
        let mut ax = vec![0.0; x.len()];
        sys.a.matvec(&x, &mut ax);
        let energy: f64 = x.iter().zip(&ax).map(|(xi, yi)| xi * yi).sum();
        assert!((energy - 0.125).abs() < 1e-13, "got {energy}");
    }

    #[test]
    fn zero_load_and_constant_load() {
        let mesh = generate_mesh(&MeshFamily::new(FamilyName::SquareRight, 2)).unwrap();
        let dofmap = DofMap::new(&mesh);
        let zero = assemble_load(&mesh, &dofmap, |_| [0.0, 0.0]);
        assert!(zero.iter().all(|&v| v == 0.0));

        // Constant f: entry is -f . (net flux of the basis field) by the
        // divergence theorem; interior edges see both signs cancel to the
        // unit flux convention.
        let f = [2.0, -1.0];
        let load = assemble_load(&mesh, &dofmap, move |_| f);
        for (e, _) in mesh.edges.iter().enumerate() {
            for r in 0..2 {
                // Net flux of basis (e,r) over the mesh: sum of s*div*area
                // over incident triangles = sum of signs, which is 0 for
                // interior edges (opposite signs) and 1 for boundary.
                let mut net = 0.0;
                for t in 0..mesh.n_triangles() {
                    for l in 0..3 {
                        let (ge, s) = mesh.triangle_edges[t][l];
                        if ge == e {
                            net += f64::from(s);
                        }
                    }
                }
                let want = -f[r] * net;
                assert!(
                    (load[dofmap.sigma_dof(e, r)] - want).abs() < 1e-12,
                    "edge {e} row {r}"
                );
            }
        }
    }

    #[test]
    fn functional_of_zero_solution_is_f_norm() {
        let mesh = generate_mesh(&MeshFamily::new(FamilyName::SquareRight, 4)).unwrap();
        let p = params(1.0, 1.0);
        let dofmap = DofMap::new(&mesh);
        let sigma = vec![0.0; dofmap.n_sigma];
        let u = vec![0.0; dofmap.n_u];
        let zero = evaluate_functional(&mesh, &p, &dofmap, &sigma, &u, |_| [0.0, 0.0]);
        assert_eq!(zero, 0.0);

        // f = (1, 2): ||f||^2 = 5 over the unit square.
        let val = evaluate_functional(&mesh, &p, &dofmap, &sigma, &u, |_| [1.0, 2.0]);
        assert!((val - 5.0).abs() < 1e-12);
    }

    #[test]
    fn trace_weights_integrate_trace() {
        let mesh = generate_mesh(&MeshFamily::new(FamilyName::SquareRight, 3)).unwrap();
        let opts = AssemblyOptions {
            deflate_trace: true,
            ..Default::default()
        };
        let sys = assemble_blocks_with(&mesh, &params(1.0, 1.0), &opts).unwrap();
        let deflation = sys.trace_deflation.as_ref().unwrap();
        // w^T coeffs(I) = integral tr(I) = 2 * area = 2.
        let x = constant_tensor_coefficients(&mesh, [[1.0, 0.0], [0.0, 1.0]]);
        let wt: f64 = deflation.weights.iter().zip(&x).map(|(w, c)| w * c).sum();
        assert!((wt - 2.0).abs() < 1e-12, "got {wt}");
        // And a trace-free constant field integrates to zero.
        let y = constant_tensor_coefficients(&mesh, [[0.0, 1.0], [1.0, 0.0]]);
        let wt0: f64 = deflation.weights.iter().zip(&y).map(|(w, c)| w * c).sum();
        assert!(wt0.abs() < 1e-12);
    }
}
