use crate::error::{Error, Result};
use crate::mesh::CellKind;

/// Highest polynomial degree for which a rule can be requested.
pub const MAX_QUADRATURE_DEGREE: usize = 30;

/// Quadrature points (reference coordinates, stride `tdim`) and weights.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub kind: CellKind,
    pub degree: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn num_points(&self) -> usize {
        self.weights.len()
    }

    pub fn point(&self, q: usize) -> &[f64] {
        let t = self.kind.tdim();
        &self.points[q * t..(q + 1) * t]
    }
}

/// Legendre polynomial P_m and its derivative at `z` in [-1, 1].
fn legendre(m: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=m {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Gauss–Legendre nodes (ascending) and weights on [0, 1].
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(m, z);
        x[m - 1 - i] = 0.5 * (1.0 + z);
        w[m - 1 - i] = 1.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Rule integrating every polynomial of total degree `<= degree` exactly.
///
/// Degree 0 and 1 use the centroid; higher degrees use collapsed
/// (Duffy) tensor products of Gauss–Legendre rules.
pub fn quadrature_rule(kind: CellKind, degree: usize) -> Result<QuadratureRule> {
    if degree > MAX_QUADRATURE_DEGREE {
        return Err(Error::UnsupportedDegree {
            requested: degree,
            max: MAX_QUADRATURE_DEGREE,
        });
    }
    let tdim = kind.tdim();
    if kind == CellKind::Point {
        return Ok(QuadratureRule {
            kind,
            degree,
            points: vec![],
            weights: vec![1.0],
        });
    }
    if degree <= 1 {
        return Ok(QuadratureRule {
            kind,
            degree,
            points: vec![1.0 / (tdim as f64 + 1.0); tdim],
            weights: vec![kind.reference_volume()],
        });
    }
    let (points, weights) = match kind {
        CellKind::Interval => gauss_legendre(degree / 2 + 1),
        CellKind::Triangle => {
            let (x, w) = gauss_legendre((degree + 2).div_ceil(2));
            let mut pts = Vec::new();
            let mut wts = Vec::new();
            for (a, wa) in x.iter().zip(&w) {
                for (b, wb) in x.iter().zip(&w) {
                    pts.extend_from_slice(&[a * (1.0 - b), *b]);
                    wts.push(wa * wb * (1.0 - b));
                }
            }
            (pts, wts)
        }
        CellKind::Tetrahedron => {
            let (x, w) = gauss_legendre((degree + 3).div_ceil(2));
            let mut pts = Vec::new();
            let mut wts = Vec::new();
            for (a, wa) in x.iter().zip(&w) {
                for (b, wb) in x.iter().zip(&w) {
                    for (c, wc) in x.iter().zip(&w) {
                        pts.extend_from_slice(&[a * (1.0 - b) * (1.0 - c), b * (1.0 - c), *c]);
                        wts.push(wa * wb * wc * (1.0 - b) * (1.0 - c) * (1.0 - c));
                    }
                }
            }
            (pts, wts)
        }
        CellKind::Point => unreachable!(),
    };
    Ok(QuadratureRule {
        kind,
        degree,
        points,
        weights,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    /// Integral of x^a y^b z^c over the reference simplex of dimension d.
    fn monomial_integral(exps: &[usize]) -> f64 {
        let d = exps.len();
        let s: usize = exps.iter().sum();
        exps.iter().map(|&e| factorial(e)).product::<f64>() / factorial(s + d)
    }

    fn exponents(tdim: usize, max: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        match tdim {
            1 => (0..=max).for_each(|a| out.push(vec![a])),
            2 => {
                for a in 0..=max {
                    for b in 0..=max - a {
                        out.push(vec![a, b]);
                    }
                }
            }
            3 => {
                for a in 0..=max {
                    for b in 0..=max - a {
                        for c in 0..=max - a - b {
                            out.push(vec![a, b, c]);
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }

    #[test]
    fn centroid_rule() {
        let r = quadrature_rule(CellKind::Triangle, 1).unwrap();
        assert_eq!(r.num_points(), 1);
        assert_eq!(r.weights, vec![0.5]);
        assert!((r.points[0] - 1.0 / 3.0).abs() < 1e-16);
    }

    #[test]
    fn two_point_gauss() {
        let r = quadrature_rule(CellKind::Interval, 3).unwrap();
        assert_eq!(r.num_points(), 2);
        let s = 1.0 / 3f64.sqrt();
        assert!((r.points[0] - (1.0 - s) / 2.0).abs() < 1e-15);
        assert!((r.points[1] - (1.0 + s) / 2.0).abs() < 1e-15);
        for w in &r.weights {
            assert!((w - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn weights_sum_to_volume() {
        for kind in [CellKind::Interval, CellKind::Triangle, CellKind::Tetrahedron] {
            for q in 0..=12 {
                let r = quadrature_rule(kind, q).unwrap();
                let s: f64 = r.weights.iter().sum();
                assert!((s - kind.reference_volume()).abs() < 1e-14, "{kind:?} q={q}");
            }
        }
    }

    #[test]
    fn monomials_integrated_exactly() {
        for kind in [CellKind::Interval, CellKind::Triangle, CellKind::Tetrahedron] {
            let t = kind.tdim();
            for q in 0..=10 {
                let r = quadrature_rule(kind, q).unwrap();
                for e in exponents(t, q) {
                    let approx: f64 = (0..r.num_points())
                        .map(|i| {
                            let p = r.point(i);
                            r.weights[i] * e.iter().zip(p).map(|(&k, x)| x.powi(k as i32)).product::<f64>()
                        })
                        .sum();
                    let exact = monomial_integral(&e);
                    assert!(
                        (approx - exact).abs() <= 1e-12 * exact.abs(),
                        "{kind:?} q={q} {e:?}: {approx} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn degree_cap() {
        assert!(quadrature_rule(CellKind::Triangle, MAX_QUADRATURE_DEGREE).is_ok());
        assert!(matches!(
            quadrature_rule(CellKind::Triangle, MAX_QUADRATURE_DEGREE + 1),
            Err(Error::UnsupportedDegree { .. })
        ));
    }
}
