//! Polynomial roots in double precision: simultaneous Aberth iteration for
//! a cold start, Newton continuation along paths in the value plane.

use num_complex::Complex64 as C;

use crate::LefschetzError;

/// Polynomial with ascending complex coefficients.
#[derive(Clone, Debug)]
pub struct Poly {
    pub coeffs: Vec<C>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::new(0.0, 0.0), |acc, c| acc * x + c)
    }

    /// Value and derivative.
    pub fn eval2(&self, x: C) -> (C, C) {
        let mut p = C::new(0.0, 0.0);
        let mut dp = C::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * k as f64)
                .collect(),
        )
    }

    pub fn shifted(&self, w: C) -> Self {
        let mut c = self.coeffs.clone();
        c[0] -= w;
        Self { coeffs: c }
    }

    /// Upper bound for |p'| on the disk of radius `r` about `z`.
    pub fn derivative_bound(&self, z: C, r: f64) -> f64 {
        let m = z.norm() + r;
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c.norm() * m.powi(k as i32 - 1))
            .sum()
    }

    /// All roots by Aberth iteration, polished by Newton.
    pub fn roots(&self) -> Result<Vec<C>, LefschetzError> {
        let n = self.degree();
        if n == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[n];
        let radius = 1.0
            + self.coeffs[..n]
                .iter()
                .map(|c| (c / lead).norm())
                .fold(0.0, f64::max);
        let mut z: Vec<C> = (0..n)
            .map(|k| {
                C::from_polar(
                    radius * 0.7,
                    0.4 + std::f64::consts::TAU * k as f64 / n as f64,
                )
            })
            .collect();
        for _ in 0..500 {
            let mut change: f64 = 0.0;
            for k in 0..n {
                let (p, dp) = self.eval2(z[k]);
                if p.norm() == 0.0 {
                    continue;
                }
                let ratio = p / dp;
                let s: C = (0..n)
                    .filter(|&j| j != k)
                    .map(|j| 1.0 / (z[k] - z[j]))
                    .sum();
                let step = ratio / (1.0 - ratio * s);
                z[k] -= step;
                change = change.max(step.norm() / (1.0 + z[k].norm()));
            }
            if change < 1e-15 {
                break;
            }
        }
        for r in z.iter_mut() {
            *r = self.newton(*r, 1e-15, 8).unwrap_or(*r);
        }
        Ok(z)
    }

    pub fn newton(&self, mut x: C, tol: f64, max_iter: usize) -> Option<C> {
        for _ in 0..max_iter {
            let (p, dp) = self.eval2(x);
            if dp.norm() == 0.0 {
                return None;
            }
            let step = p / dp;
            x -= step;
            if step.norm() <= tol * (1.0 + x.norm()) {
                return Some(x);
            }
        }
        let (p, dp) = self.eval2(x);
        (dp.norm() > 0.0 && (p / dp).norm() <= tol.sqrt() * (1.0 + x.norm())).then_some(x)
    }

    /// Radius of a disk about `z` guaranteed to contain a root.
    pub fn inclusion_radius(&self, z: C) -> f64 {
        let (p, dp) = self.eval2(z);
        if p.norm() == 0.0 {
            return 0.0;
        }
        self.degree() as f64 * (p / dp).norm()
    }
}

pub fn min_separation(z: &[C]) -> f64 {
    let mut m = f64::INFINITY;
    for i in 0..z.len() {
        for j in i + 1..z.len() {
            m = m.min((z[i] - z[j]).norm());
        }
    }
    m
}

/// A path in the value plane, parametrized over [0, 1].
#[derive(Clone, Debug)]
pub enum Piece {
    Line(C, C),
    /// Arc about `center` from angle `from` to angle `to` (radians, either sense).
    Arc {
        center: C,
        radius: f64,
        from: f64,
        to: f64,
    },
}

impl Piece {
    pub fn at(&self, t: f64) -> C {
        match *self {
            Piece::Line(a, b) => a + (b - a) * t,
            Piece::Arc {
                center,
                radius,
                from,
                to,
            } => center + C::from_polar(radius, from + (to - from) * t),
        }
    }

    pub fn end(&self) -> C {
        self.at(1.0)
    }
}

/// Continues the roots of `f(x) = w` as `w` follows `path`. Root `k` of the
/// result is the continuation of root `k` of the input.
pub fn track(
    f: &Poly,
    roots: &[C],
    path: &[Piece],
    precision: u32,
) -> Result<Vec<C>, LefschetzError> {
    let tol = 10f64.powi(-(precision.min(14) as i32));
    let safety = 0.25 * 12.0 / precision.max(12) as f64;
    let mut z = roots.to_vec();
    for piece in path {
        let mut t: f64 = 0.0;
        let mut h: f64 = 1.0 / 32.0;
        while t < 1.0 {
            let t1 = (t + h).min(1.0);
            let g = f.shifted(piece.at(t1));
            let sep = min_separation(&z);
            let next: Option<Vec<C>> = z
                .iter()
                .map(|&x| {
                    g.newton(x, tol, 40)
                        .filter(|y| (y - x).norm() < safety * sep)
                })
                .collect();
            match next {
                Some(next) if min_separation(&next) > 0.5 * sep => {
                    z = next;
                    t = t1;
                    h = (h * 1.5).min(0.25);
                }
                _ => {
                    h *= 0.5;
                    if h < 1e-12 {
                        return Err(LefschetzError::PrecisionExhausted(format!(
                            "root continuation stalled at w = {}",
                            piece.at(t)
                        )));
                    }
                }
            }
        }
    }
    Ok(z)
}

/// Index of the root in `z` nearest to `x`, checked to be unambiguous.
pub fn nearest(z: &[C], x: C) -> Result<usize, LefschetzError> {
    let mut d: Vec<(f64, usize)> = z
        .iter()
        .enumerate()
        .map(|(k, y)| ((y - x).norm(), k))
        .collect();
    d.sort_by(|a, b| a.0.total_cmp(&b.0));
    if d.len() > 1 && d[0].0 * 4.0 > d[1].0 {
        return Err(LefschetzError::PrecisionExhausted(
            "ambiguous root matching".into(),
        ));
    }
    Ok(d[0].1)
}
