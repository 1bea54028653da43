use std::sync::Arc;

use super::config::{CaseConfig, CaseKind};
use crate::error::{Error, Result};
use crate::sparse::PartitionMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMarker {
    Inlet,
    Outlet,
    Wall,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceNeighbor {
    Node(usize),
    Boundary(BoundaryMarker),
}

/// A control-volume face. `normal` points from `left` towards `right`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Face {
    pub left: usize,
    pub right: FaceNeighbor,
    pub area: f64,
    pub normal: [f64; 2],
}

/// Cell-centred structured mesh, one node per cell, numbered `iy * nx + ix`.
/// In one dimension the x-face areas carry the duct cross-section.
#[derive(Debug, Clone)]
pub struct Mesh {
    dim: usize,
    nx: usize,
    ny: usize,
    dx: f64,
    dy: f64,
    periodic_y: bool,
    coords: Vec<[f64; 2]>,
    volumes: Vec<f64>,
    x_face_area: Vec<f64>,
    y_face_area: f64,
    faces: Vec<Face>,
    partitions: Arc<PartitionMap>,
}

pub fn build_mesh(config: &CaseConfig) -> Result<Mesh> {
    let nx = config.nx;
    if nx < 4 {
        return Err(Error::Config(format!("nx must be at least 4, got {nx}")));
    }
    match config.kind {
        CaseKind::NozzleEuler | CaseKind::ScalarAdvDiff1d => {
            let dx = config.length_x / nx as f64;
            let area = |x: f64| match config.kind {
                CaseKind::NozzleEuler => config.nozzle.area.area(x, config.length_x),
                _ => 1.0,
            };
            let coords: Vec<[f64; 2]> = (0..nx).map(|i| [(i as f64 + 0.5) * dx, 0.0]).collect();
            let volumes = coords.iter().map(|c| area(c[0]) * dx).collect();
            let x_face_area = (0..=nx).map(|k| area(k as f64 * dx)).collect();
            Mesh::assemble(1, nx, 1, dx, 1.0, false, coords, volumes, x_face_area, 1.0)
        }
        CaseKind::ScalarAdvDiff2d => {
            let ny = config.ny;
            if ny < 4 {
                return Err(Error::Config(format!("ny must be at least 4, got {ny}")));
            }
            let dx = config.length_x / nx as f64;
            let dy = config.length_y / ny as f64;
            let coords = (0..nx * ny).map(|i| [((i % nx) as f64 + 0.5) * dx, ((i / nx) as f64 + 0.5) * dy]).collect();
            Mesh::assemble(2, nx, ny, dx, dy, config.periodic_y, coords, vec![dx * dy; nx * ny], vec![dy; nx + 1], dx)
        }
    }
}

impl Mesh {
    #[allow(clippy::too_many_arguments)]
    fn assemble(
        dim: usize,
        nx: usize,
        ny: usize,
        dx: f64,
        dy: f64,
        periodic_y: bool,
        coords: Vec<[f64; 2]>,
        volumes: Vec<f64>,
        x_face_area: Vec<f64>,
        y_face_area: f64,
    ) -> Result<Self> {
        if let Some((i, v)) = volumes.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::Config(format!("cell {i} has non-positive volume {v}")));
        }
        if x_face_area.iter().any(|a| !(*a > 0.0)) || !(y_face_area > 0.0) {
            return Err(Error::Config("face areas must be positive".into()));
        }
        let node = |ix: usize, iy: usize| iy * nx + ix;
        let mut faces = Vec::new();
        for iy in 0..ny {
            faces.push(Face {
                left: node(0, iy),
                right: FaceNeighbor::Boundary(BoundaryMarker::Inlet),
                area: x_face_area[0],
                normal: [-1.0, 0.0],
            });
            for k in 1..nx {
                faces.push(Face {
                    left: node(k - 1, iy),
                    right: FaceNeighbor::Node(node(k, iy)),
                    area: x_face_area[k],
                    normal: [1.0, 0.0],
                });
            }
            faces.push(Face {
                left: node(nx - 1, iy),
                right: FaceNeighbor::Boundary(BoundaryMarker::Outlet),
                area: x_face_area[nx],
                normal: [1.0, 0.0],
            });
        }
        if dim == 2 {
            for ix in 0..nx {
                if periodic_y {
                    faces.push(Face {
                        left: node(ix, ny - 1),
                        right: FaceNeighbor::Node(node(ix, 0)),
                        area: y_face_area,
                        normal: [0.0, 1.0],
                    });
                } else {
                    faces.push(Face {
                        left: node(ix, 0),
                        right: FaceNeighbor::Boundary(BoundaryMarker::Wall),
                        area: y_face_area,
                        normal: [0.0, -1.0],
                    });
                    faces.push(Face {
                        left: node(ix, ny - 1),
                        right: FaceNeighbor::Boundary(BoundaryMarker::Wall),
                        area: y_face_area,
                        normal: [0.0, 1.0],
                    });
                }
                for k in 1..ny {
                    faces.push(Face {
                        left: node(ix, k - 1),
                        right: FaceNeighbor::Node(node(ix, k)),
                        area: y_face_area,
                        normal: [0.0, 1.0],
                    });
                }
            }
        }
        Ok(Self {
            dim,
            nx,
            ny,
            dx,
            dy,
            periodic_y,
            coords,
            volumes,
            x_face_area,
            y_face_area,
            faces,
            partitions: Arc::new(PartitionMap::single(nx * ny)),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn n_nodes(&self) -> usize {
        self.nx * self.ny
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    pub fn periodic_y(&self) -> bool {
        self.periodic_y
    }

    pub fn node(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn ix(&self, node: usize) -> usize {
        node % self.nx
    }

    pub fn iy(&self, node: usize) -> usize {
        node / self.nx
    }

    pub fn coord(&self, node: usize) -> [f64; 2] {
        self.coords[node]
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn volume(&self, node: usize) -> f64 {
        self.volumes[node]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn total_volume(&self) -> f64 {
        self.volumes.iter().sum()
    }

    /// Area of x-face `k` (`0` is the inlet, `nx` the outlet).
    pub fn x_face_area(&self, k: usize) -> f64 {
        self.x_face_area[k]
    }

    pub fn x_face_areas(&self) -> &[f64] {
        &self.x_face_area
    }

    pub fn y_face_area(&self) -> f64 {
        self.y_face_area
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Pairs of nodes sharing a face.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.faces.iter().filter_map(|f| match f.right {
            FaceNeighbor::Node(r) => Some((f.left, r)),
            FaceNeighbor::Boundary(_) => None,
        })
    }

    pub fn neighbors(&self, node: usize) -> Vec<usize> {
        let mut n: Vec<usize> = self
            .edges()
            .filter_map(|(a, b)| if a == node { Some(b) } else if b == node { Some(a) } else { None })
            .collect();
        n.sort_unstable();
        n.dedup();
        n
    }

    pub fn inlet_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ny).map(move |iy| self.node(0, iy))
    }

    pub fn outlet_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.ny).map(move |iy| self.node(self.nx - 1, iy))
    }

    /// Node `offset` cells away along y, wrapping when periodic.
    pub fn y_neighbor(&self, node: usize, offset: isize) -> Option<usize> {
        let iy = self.iy(node) as isize + offset;
        let ny = self.ny as isize;
        if self.periodic_y {
            Some(self.node(self.ix(node), iy.rem_euclid(ny) as usize))
        } else if (0..ny).contains(&iy) {
            Some(self.node(self.ix(node), iy as usize))
        } else {
            None
        }
    }

    pub fn partitions(&self) -> &Arc<PartitionMap> {
        &self.partitions
    }

    pub fn with_partitions(mut self, partitions: PartitionMap) -> Result<Self> {
        if partitions.len() != self.n_nodes() {
            return Err(Error::Shape(format!(
                "partition map covers {} nodes, mesh has {}",
                partitions.len(),
                self.n_nodes()
            )));
        }
        self.partitions = Arc::new(partitions);
        Ok(self)
    }

    /// Agglomerates pairs (1D) or 2x2 blocks (2D) of cells. Returns the
    /// coarse mesh and the coarse node of every fine node.
    pub fn coarsen(&self) -> Result<(Mesh, Vec<usize>)> {
        if !self.nx.is_multiple_of(2) || self.nx < 4 {
            return Err(Error::Coarsening(format!("cannot pair {} cells along x", self.nx)));
        }
        let (cnx, cny) = if self.dim == 2 {
            if !self.ny.is_multiple_of(2) || self.ny < 4 || (self.periodic_y && self.ny < 6) {
                return Err(Error::Coarsening(format!("cannot pair {} cells along y", self.ny)));
            }
            (self.nx / 2, self.ny / 2)
        } else {
            (self.nx / 2, 1)
        };
        let parent: Vec<usize> = (0..self.n_nodes())
            .map(|i| {
                let (ix, iy) = (self.ix(i), self.iy(i));
                if self.dim == 2 {
                    (iy / 2) * cnx + ix / 2
                } else {
                    ix / 2
                }
            })
            .collect();
        let mut volumes = vec![0.0; cnx * cny];
        let mut moments = vec![[0.0; 2]; cnx * cny];
        for (i, &c) in parent.iter().enumerate() {
            volumes[c] += self.volumes[i];
            moments[c][0] += self.volumes[i] * self.coords[i][0];
            moments[c][1] += self.volumes[i] * self.coords[i][1];
        }
        let coords = moments.iter().zip(&volumes).map(|(m, v)| [m[0] / v, m[1] / v]).collect();
        let widen = if self.dim == 2 { 2.0 } else { 1.0 };
        let x_face_area = self.x_face_area.iter().step_by(2).map(|a| a * widen).collect();
        let coarse = Mesh::assemble(
            self.dim,
            cnx,
            cny,
            2.0 * self.dx,
            self.dy * widen,
            self.periodic_y,
            coords,
            volumes,
            x_face_area,
            self.y_face_area * widen,
        )?;
        Ok((coarse, parent))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> CaseConfig {
        CaseConfig::parse(text).unwrap()
    }

    #[test]
    fn uniform_duct_volumes() {
        let m = build_mesh(&cfg("kind = nozzle-euler\nnx = 10\narea_curvature = 0\n")).unwrap();
        for v in m.volumes() {
            assert!((v - 0.1).abs() < 1e-15);
        }
    }

    #[test]
    fn nozzle_volumes_follow_area_at_centres() {
        let m = build_mesh(&cfg("kind = nozzle-euler\nnx = 10\n")).unwrap();
        for i in 0..10 {
            let x = 0.05 + 0.1 * i as f64;
            let expect = (1.0 + (x - 0.5) * (x - 0.5)) * 0.1;
            assert!((m.volume(i) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn two_d_interior_node_has_four_neighbors() {
        let m = build_mesh(&cfg("kind = scalar-advdiff-2d\nnx = 4\nny = 4\nperiodic_y = false\n")).unwrap();
        assert_eq!(m.neighbors(m.node(1, 1)).len(), 4);
        assert_eq!(m.neighbors(m.node(0, 0)).len(), 2);
    }

    #[test]
    fn every_face_has_positive_area_and_valid_sides() {
        let m = build_mesh(&cfg("kind = scalar-advdiff-2d\nnx = 6\nny = 4\n")).unwrap();
        for f in m.faces() {
            assert!(f.area > 0.0);
            if let FaceNeighbor::Node(r) = f.right {
                assert_ne!(r, f.left);
            }
        }
        assert!((m.total_volume() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coarsen_pairs_volumes() {
        let m = build_mesh(&cfg("kind = scalar-advdiff-1d\nnx = 8\n")).unwrap();
        let (c, parent) = m.coarsen().unwrap();
        assert_eq!(c.n_nodes(), 4);
        assert_eq!(parent, vec![0, 0, 1, 1, 2, 2, 3, 3]);
        for i in 0..4 {
            assert!((c.volume(i) - 2.0 * m.volume(0)).abs() < 1e-15);
        }
    }

    #[test]
    fn coarsen_2d_quadruples_volumes() {
        let m = build_mesh(&cfg("kind = scalar-advdiff-2d\nnx = 4\nny = 4\nperiodic_y = false\n")).unwrap();
        let (c, _) = m.coarsen().unwrap();
        assert_eq!((c.nx(), c.ny()), (2, 2));
        for v in c.volumes() {
            assert!((v - 4.0 * m.volume(0)).abs() < 1e-15);
        }
        assert!((c.x_face_area(0) - 2.0 * m.x_face_area(0)).abs() < 1e-15);
    }

    #[test]
    fn odd_count_refuses_to_coarsen() {
        let m = build_mesh(&cfg("kind = scalar-advdiff-1d\nnx = 9\n")).unwrap();
        assert!(matches!(m.coarsen(), Err(Error::Coarsening(_))));
    }

    #[test]
    fn coarse_coordinate_is_volume_centroid() {
        let m = build_mesh(&cfg("kind = nozzle-euler\nnx = 8\n")).unwrap();
        let (c, _) = m.coarsen().unwrap();
        let (v0, v1) = (m.volume(0), m.volume(1));
        let x = (v0 * m.coord(0)[0] + v1 * m.coord(1)[0]) / (v0 + v1);
        assert!((c.coord(0)[0] - x).abs() < 1e-15);
        assert!((c.volume(0) - (v0 + v1)).abs() < 1e-15);
    }
}
