use std::sync::Arc;

use super::{CellKind, Mesh};
use crate::error::{Error, Result};

fn check_resolution(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "mesh resolution must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Uniform partition of [0, 1] into `n` cells.
pub fn unit_interval_mesh(n: usize) -> Result<Arc<Mesh>> {
    check_resolution(n)?;
    let coords = (0..=n).map(|i| i as f64 / n as f64).collect();
    let cells = (0..n).flat_map(|i| [i, i + 1]).collect();
    Mesh::new(CellKind::Interval, 1, coords, cells)
}

/// Uniform triangulation of [0, 1]^2 with `n` squares per side, each split
/// along its lower-left to upper-right diagonal.
///
/// Vertices are numbered row by row starting from the top edge (y = 1),
/// x ascending within a row.
pub fn unit_square_mesh(n: usize) -> Result<Arc<Mesh>> {
    check_resolution(n)?;
    let h = n as f64;
    let vid = |i: usize, j: usize| (n - j) * (n + 1) + i;
    let mut coords = vec![0.0; 2 * (n + 1) * (n + 1)];
    for j in 0..=n {
        for i in 0..=n {
            let v = vid(i, j);
            coords[2 * v] = i as f64 / h;
            coords[2 * v + 1] = j as f64 / h;
        }
    }
    let mut cells = Vec::with_capacity(6 * n * n);
    for j in 0..n {
        for i in 0..n {
            let ll = vid(i, j);
            let lr = vid(i + 1, j);
            let ul = vid(i, j + 1);
            let ur = vid(i + 1, j + 1);
            cells.extend_from_slice(&[ll, ur, lr]);
            cells.extend_from_slice(&[ll, ur, ul]);
        }
    }
    Mesh::new(CellKind::Triangle, 2, coords, cells)
}

/// Uniform tetrahedralization of [0, 1]^3: every cube is split into six
/// tetrahedra sharing its main diagonal.
pub fn unit_cube_mesh(n: usize) -> Result<Arc<Mesh>> {
    check_resolution(n)?;
    let h = n as f64;
    let m = n + 1;
    let vid = |i: usize, j: usize, k: usize| i + j * m + k * m * m;
    let mut coords = Vec::with_capacity(3 * m * m * m);
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                coords.extend_from_slice(&[i as f64 / h, j as f64 / h, k as f64 / h]);
            }
        }
    }
    // monotone lattice paths from (0,0,0) to (1,1,1)
    const PATHS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut cells = Vec::with_capacity(24 * n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                for path in PATHS {
                    let mut p = [i, j, k];
                    cells.push(vid(p[0], p[1], p[2]));
                    for axis in path {
                        p[axis] += 1;
                        cells.push(vid(p[0], p[1], p[2]));
                    }
                }
            }
        }
    }
    Mesh::new(CellKind::Tetrahedron, 3, coords, cells)
}
