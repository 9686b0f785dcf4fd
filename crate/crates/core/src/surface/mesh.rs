//! Chart grids, quad meshes and OBJ/PLY/JSON export.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path as FsPath, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::diff::curvature;
use super::{ImmersionField, SCHEMA};
use crate::domain::{Path, DEFAULT_MARGIN};
use crate::error::{Error, Result};
use crate::linalg::{re_part, RVec, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpec {
    /// Axis-aligned rectangle in the chart, corners included.
    Rect { lo: C64, hi: C64 },
    /// `r_min ≤ |z − center| ≤ r_max`, angles `angle0..angle1`, both ends included.
    Polar { center: C64, r_min: f64, r_max: f64, angle0: f64, angle1: f64, log_radial: bool },
}

/// `nu × nv` vertices; vertex `(i, j)` has index `j·nu + i`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshGrid {
    pub spec: GridSpec,
    pub nu: usize,
    pub nv: usize,
}

impl MeshGrid {
    pub fn new(spec: GridSpec, nu: usize, nv: usize) -> Result<Self> {
        if nu == 0 || nv == 0 {
            return Err(Error::EmptyGrid);
        }
        if nu < 2 || nv < 2 {
            return Err(Error::InvalidInput("a mesh grid needs at least 2 × 2 vertices".into()));
        }
        if let GridSpec::Polar { r_min, r_max, log_radial, .. } = spec {
            if !(r_max > r_min && r_min >= 0.0) || (log_radial && r_min == 0.0) {
                return Err(Error::InvalidInput(
                    "polar grid needs 0 ≤ r_min < r_max (r_min > 0 if logarithmic)".into(),
                ));
            }
        }
        Ok(MeshGrid { spec, nu, nv })
    }

    fn u_coord(&self, i: usize) -> f64 {
        let s = i as f64 / (self.nu - 1) as f64;
        match self.spec {
            GridSpec::Rect { lo, hi } => lo.re + s * (hi.re - lo.re),
            GridSpec::Polar { r_min, r_max, log_radial: true, .. } => {
                (r_min.ln() + s * (r_max.ln() - r_min.ln())).exp()
            }
            GridSpec::Polar { r_min, r_max, .. } => r_min + s * (r_max - r_min),
        }
    }

    fn v_coord(&self, j: usize) -> f64 {
        let s = j as f64 / (self.nv - 1) as f64;
        match self.spec {
            GridSpec::Rect { lo, hi } => lo.im + s * (hi.im - lo.im),
            GridSpec::Polar { angle0, angle1, .. } => angle0 + s * (angle1 - angle0),
        }
    }

    pub fn point(&self, i: usize, j: usize) -> C64 {
        let (u, v) = (self.u_coord(i), self.v_coord(j));
        match self.spec {
            GridSpec::Rect { .. } => C64::new(u, v),
            GridSpec::Polar { center, .. } => center + C64::from_polar(u, v),
        }
    }

    pub fn points(&self) -> Vec<C64> {
        (0..self.nv).flat_map(|j| (0..self.nu).map(move |i| self.point(i, j))).collect()
    }

    /// Chart path from vertex `(i, j)` to `(i, j + 1)`.
    fn column_step(&self, i: usize, j: usize) -> Path {
        match self.spec {
            GridSpec::Rect { .. } => Path::segment(self.point(i, j), self.point(i, j + 1)),
            GridSpec::Polar { center, .. } => {
                let (a0, a1) = (self.v_coord(j), self.v_coord(j + 1));
                Path::arc(center, self.u_coord(i), a0, a1 - a0)
            }
        }
    }

    fn center(&self) -> C64 {
        match self.spec {
            GridSpec::Rect { .. } => C64::new(0.0, 0.0),
            GridSpec::Polar { center, .. } => center,
        }
    }

    pub fn quads(&self) -> Vec<[usize; 4]> {
        let idx = |i: usize, j: usize| j * self.nu + i;
        (0..self.nv - 1)
            .flat_map(|j| (0..self.nu - 1).map(move |i| [idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)]))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceMesh {
    pub grid: MeshGrid,
    pub dim: usize,
    pub params: Vec<C64>,
    pub vertices: Vec<RVec>,
    pub quads: Vec<[usize; 4]>,
    pub lambda: Vec<f64>,
    pub curvature: Vec<f64>,
}

impl SurfaceMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn quad_count(&self) -> usize {
        self.quads.len()
    }

    pub fn max_curvature(&self) -> f64 {
        self.curvature.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_lambda(&self) -> f64 {
        self.lambda.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Finite entries everywhere and `λ > 0` at every vertex.
    pub fn validate(&self) -> Result<()> {
        let finite = self.vertices.iter().all(|v| v.iter().all(|x| x.is_finite()))
            && self.lambda.iter().chain(&self.curvature).all(|x| x.is_finite());
        if !finite {
            return Err(Error::DataCheck("mesh has nonfinite entries".into()));
        }
        if !(self.min_lambda() > 0.0) {
            return Err(Error::DataCheck("conformal factor vanishes at a mesh vertex".into()));
        }
        Ok(())
    }
}

/// Evaluates `F` on the grid: the first row is integrated sequentially, then
/// each column is swept in parallel from its first-row value.
pub fn mesh_export(field: &ImmersionField, grid: &MeshGrid) -> Result<SurfaceMesh> {
    let data = field.data();
    let params = grid.points();
    for &z in &params {
        let near = field.singularities().iter().any(|q| (q - z).norm() < DEFAULT_MARGIN);
        if near || !data.domain.contains(z) {
            return Err(Error::InvalidInput(format!("grid vertex {z} is outside the domain or on a singularity")));
        }
    }
    let mut row = Vec::with_capacity(grid.nu);
    row.push(field.evaluate(grid.point(0, 0))?);
    for i in 1..grid.nu {
        let (a, b) = (grid.point(i - 1, 0), grid.point(i, 0));
        let step = re_part(&field.integrate(&Path::segment(a, b))?);
        row.push(&row[i - 1] + step);
    }
    let columns: Vec<Vec<RVec>> = (0..grid.nu)
        .into_par_iter()
        .map(|i| -> Result<Vec<RVec>> {
            let mut col = vec![row[i].clone()];
            for j in 0..grid.nv - 1 {
                let path = grid.column_step(i, j);
                let next =
                    if path.length() == 0.0 { col[j].clone() } else { &col[j] + re_part(&field.integrate(&path)?) };
                col.push(next);
            }
            Ok(col)
        })
        .collect::<Result<_>>()?;
    let vertices: Vec<RVec> = (0..grid.nv).flat_map(|j| columns.iter().map(move |c| c[j].clone())).collect();
    let (lambda, curv): (Vec<f64>, Vec<f64>) = curvature(data, &params, grid.center()).into_iter().unzip();
    Ok(SurfaceMesh { grid: *grid, dim: data.dim(), params, vertices, quads: grid.quads(), lambda, curvature: curv })
}

fn check_finite(mesh: &SurfaceMesh) -> Result<()> {
    if mesh.vertices.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
        return Err(Error::DataCheck("mesh has nonfinite vertices".into()));
    }
    Ok(())
}

/// Wavefront OBJ of the first three coordinates.
pub fn write_obj(mesh: &SurfaceMesh) -> Result<String> {
    check_finite(mesh)?;
    let mut s = String::new();
    let _ = writeln!(s, "# equimin surface mesh, {} vertices, {} quads", mesh.vertex_count(), mesh.quad_count());
    if mesh.dim > 3 {
        let _ = writeln!(s, "# coordinates 1..3 of R^{}", mesh.dim);
    }
    for v in &mesh.vertices {
        let x = |k: usize| if k < v.len() { v[k] } else { 0.0 };
        let _ = writeln!(s, "v {} {} {}", x(0), x(1), x(2));
    }
    for q in &mesh.quads {
        let _ = writeln!(s, "f {} {} {} {}", q[0] + 1, q[1] + 1, q[2] + 1, q[3] + 1);
    }
    Ok(s)
}

/// ASCII PLY with all coordinates plus per-vertex `K` and `lambda`.
pub fn write_ply(mesh: &SurfaceMesh) -> Result<String> {
    check_finite(mesh)?;
    let mut s = String::new();
    let _ = writeln!(s, "ply\nformat ascii 1.0\ncomment equimin surface mesh");
    let _ = writeln!(s, "element vertex {}", mesh.vertex_count());
    for k in 0..mesh.dim {
        let name = match k {
            0 => "x".to_string(),
            1 => "y".to_string(),
            2 => "z".to_string(),
            _ => format!("x{}", k + 1),
        };
        let _ = writeln!(s, "property double {name}");
    }
    let _ = writeln!(s, "property double K\nproperty double lambda");
    let _ = writeln!(s, "element face {}\nproperty list uchar int vertex_indices\nend_header", mesh.quad_count());
    for (idx, v) in mesh.vertices.iter().enumerate() {
        let coords: Vec<String> = v.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{} {} {}", coords.join(" "), mesh.curvature[idx], mesh.lambda[idx]);
    }
    for q in &mesh.quads {
        let _ = writeln!(s, "4 {} {} {} {}", q[0], q[1], q[2], q[3]);
    }
    Ok(s)
}

#[derive(Serialize)]
struct Sidecar<'a> {
    schema: &'static str,
    grid: &'a MeshGrid,
    dim: usize,
    vertex_count: usize,
    quad_count: usize,
    lambda_min: f64,
    curvature_max: f64,
    params: Vec<[f64; 2]>,
    lambda: &'a [f64],
    curvature: &'a [f64],
}

fn sidecar(mesh: &SurfaceMesh) -> Result<String> {
    let s = Sidecar {
        schema: SCHEMA,
        grid: &mesh.grid,
        dim: mesh.dim,
        vertex_count: mesh.vertex_count(),
        quad_count: mesh.quad_count(),
        lambda_min: mesh.min_lambda(),
        curvature_max: mesh.max_curvature(),
        params: mesh.params.iter().map(|z| [z.re, z.im]).collect(),
        lambda: &mesh.lambda,
        curvature: &mesh.curvature,
    };
    Ok(serde_json::to_string_pretty(&s)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportedFile {
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: usize,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `<stem>.obj`, `<stem>.ply` and `<stem>.mesh.json` into `dir`, creating it if needed.
pub fn export_mesh(mesh: &SurfaceMesh, dir: &FsPath, stem: &str) -> Result<Vec<ExportedFile>> {
    fs::create_dir_all(dir)?;
    let files = [
        (format!("{stem}.obj"), write_obj(mesh)?),
        (format!("{stem}.ply"), write_ply(mesh)?),
        (format!("{stem}.mesh.json"), sidecar(mesh)?),
    ];
    let mut out = Vec::new();
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text.as_bytes())?;
        out.push(ExportedFile { path, sha256: sha256_hex(text.as_bytes()), bytes: text.len() });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::wdata::gallery;
    use std::f64::consts::PI;

    fn catenoid_grid(n: usize) -> MeshGrid {
        let spec = GridSpec::Polar {
            center: c(0.0, 0.0),
            r_min: 0.5,
            r_max: 2.0,
            angle0: 0.0,
            angle1: 2.0 * PI,
            log_radial: true,
        };
        MeshGrid::new(spec, n, n).unwrap()
    }

    #[test]
    fn catenoid_mesh_combinatorics() {
        let f = ImmersionField::from_data(gallery::catenoid(6).unwrap(), 1e-12).unwrap();
        let m = mesh_export(&f, &catenoid_grid(64)).unwrap();
        assert_eq!(m.vertex_count(), 4096);
        assert_eq!(m.quad_count(), 3969);
        m.validate().unwrap();
        assert!(m.max_curvature() <= 1e-6);
        // sweeping matches direct evaluation
        for idx in [0, 100, 2047, 4095] {
            let d = (&m.vertices[idx] - f.evaluate(m.params[idx]).unwrap()).amax();
            assert!(d < 1e-10, "{idx}: {d}");
        }
    }

    #[test]
    fn empty_grid_is_an_error() {
        let spec = GridSpec::Rect { lo: c(0.0, 0.0), hi: c(1.0, 1.0) };
        assert!(matches!(MeshGrid::new(spec, 0, 4), Err(Error::EmptyGrid)));
        assert!(MeshGrid::new(spec, 1, 4).is_err());
    }

    #[test]
    fn enneper_disk_mesh_through_center() {
        let f = ImmersionField::from_data(gallery::enneper(1).unwrap(), 1e-12).unwrap();
        let spec = GridSpec::Polar {
            center: c(0.0, 0.0),
            r_min: 0.0,
            r_max: 2.0,
            angle0: 0.0,
            angle1: 2.0 * PI,
            log_radial: false,
        };
        let m = mesh_export(&f, &MeshGrid::new(spec, 9, 17).unwrap()).unwrap();
        m.validate().unwrap();
        assert!(m.vertices[0].amax() < 1e-12);
    }

    #[test]
    fn exports_are_deterministic() {
        let f = ImmersionField::from_data(gallery::catenoid(6).unwrap(), 1e-12).unwrap();
        let m = mesh_export(&f, &catenoid_grid(8)).unwrap();
        let d1 = tempfile::tempdir().unwrap();
        let d2 = tempfile::tempdir().unwrap();
        let a = export_mesh(&m, &d1.path().join("new"), "cat").unwrap();
        let m2 = mesh_export(&f, &catenoid_grid(8)).unwrap();
        let b = export_mesh(&m2, d2.path(), "cat").unwrap();
        assert_eq!(a.len(), 3);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.sha256, y.sha256);
            assert_eq!(fs::read(&x.path).unwrap(), fs::read(&y.path).unwrap());
        }
        let obj = fs::read_to_string(&a[0].path).unwrap();
        assert_eq!(obj.lines().filter(|l| l.starts_with("v ")).count(), 64);
        assert_eq!(obj.lines().filter(|l| l.starts_with("f ")).count(), 49);
        let ply = fs::read_to_string(&a[1].path).unwrap();
        assert!(ply.contains("element vertex 64") && ply.contains("property double K"));
    }
}
