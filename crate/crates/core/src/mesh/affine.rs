use crate::error::{Error, Result};
use crate::linalg::dense;

use super::Mesh;

/// Affine map `x = origin + J X` from reference coordinates (`tdim`) to
/// physical coordinates (`gdim >= tdim`).
#[derive(Clone, Debug)]
pub struct AffineMap {
    pub tdim: usize,
    pub gdim: usize,
    pub origin: Vec<f64>,
    /// `gdim x tdim`, row-major.
    pub jacobian: Vec<f64>,
    /// `(J^T J)^{-1}`, `tdim x tdim`.
    metric_inv: Vec<f64>,
    /// Volume scaling `sqrt(det(J^T J))` (`|det J|` for square maps).
    pub scale: f64,
}

impl AffineMap {
    /// Map defined by simplex vertex coordinates (stride `gdim`).
    pub fn from_vertices(tdim: usize, gdim: usize, coords: &[f64]) -> AffineMap {
        let origin = coords[..gdim].to_vec();
        let mut jacobian = vec![0.0; gdim * tdim];
        for c in 0..tdim {
            for r in 0..gdim {
                jacobian[r * tdim + c] = coords[(c + 1) * gdim + r] - origin[r];
            }
        }
        let mut metric = vec![0.0; tdim * tdim];
        for a in 0..tdim {
            for b in 0..tdim {
                metric[a * tdim + b] = (0..gdim)
                    .map(|r| jacobian[r * tdim + a] * jacobian[r * tdim + b])
                    .sum();
            }
        }
        let scale = if tdim == 0 { 1.0 } else { dense::det(tdim, &metric).max(0.0).sqrt() };
        let metric_inv = dense::invert(tdim, &metric).unwrap_or_else(|| vec![0.0; tdim * tdim]);
        AffineMap {
            tdim,
            gdim,
            origin,
            jacobian,
            metric_inv,
            scale,
        }
    }

    pub fn for_cell(mesh: &Mesh, cell: usize) -> AffineMap {
        AffineMap::from_vertices(mesh.tdim(), mesh.gdim(), &mesh.cell_coordinates(cell))
    }

    /// Errors when the map is (numerically) singular relative to its size.
    pub fn check_nondegenerate(&self, cell: usize) -> Result<()> {
        if self.tdim == 0 {
            return Ok(());
        }
        let h = (0..self.tdim)
            .map(|c| {
                (0..self.gdim)
                    .map(|r| self.jacobian[r * self.tdim + c].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(0.0, f64::max);
        if !(self.scale >= 1e-14 * h.powi(self.tdim as i32)) || h == 0.0 {
            return Err(Error::DegenerateCell {
                cell,
                det: self.scale,
            });
        }
        Ok(())
    }

    pub fn push_forward(&self, xref: &[f64]) -> Vec<f64> {
        (0..self.gdim)
            .map(|r| {
                self.origin[r]
                    + (0..self.tdim)
                        .map(|c| self.jacobian[r * self.tdim + c] * xref[c])
                        .sum::<f64>()
            })
            .collect()
    }

    /// Least-squares inverse; exact for points on the cell's affine hull.
    pub fn pull_back(&self, x: &[f64]) -> Vec<f64> {
        let t = self.tdim;
        let rhs: Vec<f64> = (0..t)
            .map(|c| {
                (0..self.gdim)
                    .map(|r| self.jacobian[r * t + c] * (x[r] - self.origin[r]))
                    .sum()
            })
            .collect();
        (0..t)
            .map(|a| (0..t).map(|b| self.metric_inv[a * t + b] * rhs[b]).sum())
            .collect()
    }

    /// `G = J (J^T J)^{-1}` (`gdim x tdim`): physical gradient = `G` times
    /// reference gradient. Equals `J^{-T}` for square maps.
    pub fn gradient_transform(&self) -> Vec<f64> {
        let (g, t) = (self.gdim, self.tdim);
        let mut out = vec![0.0; g * t];
        for r in 0..g {
            for c in 0..t {
                out[r * t + c] = (0..t)
                    .map(|k| self.jacobian[r * t + k] * self.metric_inv[k * t + c])
                    .sum();
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_scale() {
        let m = AffineMap::from_vertices(2, 2, &[1.0, 1.0, 3.0, 1.0, 1.0, 2.0]);
        assert_eq!(m.scale, 2.0);
        let x = m.push_forward(&[0.25, 0.5]);
        assert_eq!(x, vec![1.5, 1.5]);
        let back = m.pull_back(&x);
        assert!((back[0] - 0.25).abs() < 1e-15 && (back[1] - 0.5).abs() < 1e-15);
        let g = m.gradient_transform();
        assert_eq!(g, vec![0.5, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn embedded_segment() {
        let m = AffineMap::from_vertices(1, 2, &[0.0, 0.0, 3.0, 4.0]);
        assert!((m.scale - 5.0).abs() < 1e-15);
        assert!((m.pull_back(&[1.5, 2.0])[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn degenerate_detected() {
        let m = AffineMap::from_vertices(2, 2, &[0.0, 0.0, 1.0, 1.0, 2.0, 2.0]);
        assert!(matches!(m.check_nondegenerate(7), Err(Error::DegenerateCell { cell: 7, .. })));
    }
}
