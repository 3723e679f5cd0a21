//! Finite point configurations in the Gaussian-rational plane.

use std::cmp::Ordering;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::gauss::{direction_cmp, GaussRat};
use crate::scalar::Rational;

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Configuration {
    points: Vec<GaussRat>,
}

impl Configuration {
    pub fn new(points: Vec<GaussRat>) -> Result<Self> {
        for (i, p) in points.iter().enumerate() {
            if points[..i].contains(p) {
                return Err(Error::DuplicatePoint(p.to_string()));
            }
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[GaussRat] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &GaussRat {
        &self.points[i]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, p: &GaussRat) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }

    /// Indices of points strictly inside the segment from point `i` to point `j`,
    /// ordered from `i` towards `j`.
    pub fn intermediate_indices(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        let (a, b) = (&self.points[i], &self.points[j]);
        if a == b {
            return Err(Error::DegenerateInterval);
        }
        let d = b - a;
        let len = d.norm_sqr();
        let mut inner: Vec<(Rational, usize)> = self
            .points
            .iter()
            .enumerate()
            .filter_map(|(k, p)| {
                let v = p - a;
                let t = d.dot(&v);
                (d.cross(&v).is_zero() && t.is_positive() && t < len).then_some((t, k))
            })
            .collect();
        inner.sort();
        Ok(inner.into_iter().map(|(_, k)| k).collect())
    }

    /// Points of the configuration strictly between `a` and `b`, ordered from `a`.
    pub fn intermediate_points(&self, a: &GaussRat, b: &GaussRat) -> Result<Vec<GaussRat>> {
        let find = |p: &GaussRat| {
            self.index_of(p)
                .ok_or_else(|| Error::UnknownPoint(p.to_text()))
        };
        let (i, j) = (find(a)?, find(b)?);
        Ok(self
            .intermediate_indices(i, j)?
            .into_iter()
            .map(|k| self.points[k].clone())
            .collect())
    }

    /// First pair of points differing by a real number.
    pub fn horizontal_pair(&self) -> Option<(usize, usize)> {
        let n = self.len();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| self.points[i].im == self.points[j].im)
    }

    pub fn collinear_triple(&self) -> Option<(usize, usize, usize)> {
        let n = self.len();
        for i in 0..n {
            for j in i + 1..n {
                let d = &self.points[j] - &self.points[i];
                for k in j + 1..n {
                    if d.cross(&(&self.points[k] - &self.points[i])).is_zero() {
                        return Some((i, j, k));
                    }
                }
            }
        }
        None
    }

    /// No three points on a line and no horizontal difference.
    pub fn is_general_position(&self) -> bool {
        self.collinear_triple().is_none() && self.horizontal_pair().is_none()
    }

    /// Distinct directions `b - a` as primitive Gaussian integers, sorted by argument.
    pub fn stokes_directions(&self) -> Vec<GaussRat> {
        let mut dirs: Vec<GaussRat> = Vec::new();
        for a in &self.points {
            for b in &self.points {
                if a == b {
                    continue;
                }
                let (x, y) = (b - a).canonical_direction().expect("distinct points");
                let z = GaussRat::new(Rational::from_integer(x), Rational::from_integer(y));
                if !dirs.contains(&z) {
                    dirs.push(z);
                }
            }
        }
        dirs.sort_by(|u, v| direction_cmp(u, v).expect("nonzero"));
        dirs
    }

    pub fn is_stokes_direction(&self, zeta: &GaussRat) -> Result<bool> {
        if zeta.is_zero() {
            return Err(Error::DegenerateDirection);
        }
        Ok(self.stokes_directions().iter().any(|d| d.same_ray(zeta)))
    }

    /// Maximal chains of points on lines parallel to `zeta`, each ordered by
    /// increasing `Re(a * conj(zeta))`. Chains appear in order of their first
    /// point in the configuration.
    pub fn ray_order(&self, zeta: &GaussRat) -> Result<Vec<Vec<usize>>> {
        if zeta.is_zero() {
            return Err(Error::DegenerateDirection);
        }
        let mut chains: Vec<(Rational, Vec<usize>)> = Vec::new();
        for (k, p) in self.points.iter().enumerate() {
            let key = zeta.cross(p);
            match chains.iter_mut().find(|(c, _)| *c == key) {
                Some((_, v)) => v.push(k),
                None => chains.push((key, vec![k])),
            }
        }
        Ok(chains
            .into_iter()
            .map(|(_, mut v)| {
                v.sort_by_key(|&k| zeta.dot(&self.points[k]));
                v
            })
            .collect())
    }

    /// Every point is a strict vertex of the convex hull.
    pub fn is_convex_position(&self) -> bool {
        let n = self.len();
        if n <= 2 {
            return true;
        }
        if self.collinear_triple().is_some() {
            return false;
        }
        // In general position a point fails to be a vertex exactly when it
        // lies inside a triangle of three other points.
        for p in 0..n {
            for i in 0..n {
                for j in i + 1..n {
                    for k in j + 1..n {
                        if [i, j, k].contains(&p) {
                            continue;
                        }
                        if self.inside_triangle(p, i, j, k) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn inside_triangle(&self, p: usize, i: usize, j: usize, k: usize) -> bool {
        let pt = &self.points;
        let side = |u: usize, v: usize| {
            let c = (&pt[v] - &pt[u]).cross(&(&pt[p] - &pt[u]));
            c.signum()
        };
        let (s1, s2, s3) = (side(i, j), side(j, k), side(k, i));
        s1 == s2 && s2 == s3
    }

    pub fn map_points<F: Fn(&GaussRat) -> GaussRat>(&self, f: F) -> Result<Self> {
        Self::new(self.points.iter().map(f).collect())
    }
}

/// A direction on the circle together with a winding number; the lift of
/// an angle `arg(dir) + 2 pi winding` with `arg` taken in `[0, 2 pi)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LiftedDirection {
    pub dir: GaussRat,
    pub winding: i64,
}

impl LiftedDirection {
    pub fn new(dir: GaussRat, winding: i64) -> Result<Self> {
        if dir.is_zero() {
            return Err(Error::DegenerateDirection);
        }
        Ok(Self { dir, winding })
    }

    pub fn cmp_lift(&self, other: &Self) -> Ordering {
        self.winding
            .cmp(&other.winding)
            .then_with(|| direction_cmp(&self.dir, &other.dir).expect("nonzero"))
    }
}

/// Power of the monodromy realizing transport between two lifted directions
/// in the stalk trivialization by counterclockwise arcs from the positive
/// real axis.
pub fn lifted_transport_count(from: &LiftedDirection, to: &LiftedDirection) -> Result<i64> {
    if from.dir.is_zero() || to.dir.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    Ok(to.winding - from.winding)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::gauss;

    #[test]
    fn intermediates_on_diagonal() {
        let c =
            Configuration::new(vec![gauss(0, 0), gauss(2, 2), gauss(1, 1), gauss(3, 0)]).unwrap();
        assert_eq!(c.intermediate_indices(0, 1).unwrap(), vec![2]);
        assert_eq!(c.intermediate_indices(1, 0).unwrap(), vec![2]);
        assert!(c.intermediate_indices(0, 3).unwrap().is_empty());
    }

    #[test]
    fn stokes_directions_of_triangle() {
        let c = Configuration::new(vec![gauss(0, 0), gauss(1, 2), gauss(2, 1)]).unwrap();
        let d = c.stokes_directions();
        assert_eq!(d.len(), 6);
        assert_eq!(d[0], gauss(2, 1));
        assert!(c.is_stokes_direction(&gauss(-2, -4)).unwrap());
        assert!(!c.is_stokes_direction(&gauss(1, 0)).unwrap());
    }

    #[test]
    fn ray_order_groups_lines() {
        let c =
            Configuration::new(vec![gauss(0, 0), gauss(1, 1), gauss(2, 2), gauss(5, 0)]).unwrap();
        assert_eq!(
            c.ray_order(&gauss(1, 1)).unwrap(),
            vec![vec![0, 1, 2], vec![3]]
        );
        assert_eq!(
            c.ray_order(&gauss(-1, -1)).unwrap(),
            vec![vec![2, 1, 0], vec![3]]
        );
    }

    #[test]
    fn lifted_counts() {
        let l = |re, im, w| LiftedDirection::new(gauss(re, im), w).unwrap();
        assert_eq!(lifted_transport_count(&l(1, 0, 0), &l(0, 1, 0)).unwrap(), 0);
        assert_eq!(lifted_transport_count(&l(1, 0, 0), &l(1, 0, 1)).unwrap(), 1);
        assert_eq!(
            lifted_transport_count(&l(0, -1, 0), &l(0, 1, 1)).unwrap(),
            1
        );
        assert!(LiftedDirection::new(gauss(0, 0), 0).is_err());
    }

    #[test]
    fn convexity() {
        let sq =
            Configuration::new(vec![gauss(0, 0), gauss(3, 1), gauss(4, 4), gauss(1, 3)]).unwrap();
        assert!(sq.is_convex_position());
        let inner =
            Configuration::new(vec![gauss(0, 0), gauss(6, 1), gauss(1, 6), gauss(2, 3)]).unwrap();
        assert!(!inner.is_convex_position());
        let line = Configuration::new(vec![gauss(0, 0), gauss(1, 1), gauss(2, 2)]).unwrap();
        assert!(!line.is_convex_position());
    }
}
