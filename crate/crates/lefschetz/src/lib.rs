//! Localized perverse sheaves of Lefschetz type: for a Morse polynomial `S`
//! the pushforward `S_* k[1]` has rank-one vanishing cycles with monodromy
//! `-1` at each critical value. Transports are computed by continuing the
//! fiber roots of `S(x) = w` along explicit paths and pairing vanishing
//! classes, which yields integers.
//!
//! Critical values are generally irrational; the output configuration uses
//! Gaussian-rational surrogates chosen to keep every orientation and
//! collinearity relation among the true values, then rotated by a fixed
//! Gaussian integer when needed to avoid horizontal pairs.

pub mod roots;

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use num_complex::Complex64 as C;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use locperv::geometry::Configuration;
use locperv::{
    gauss, CircleLocalSystem, GaussRat, LocalizedPerv, QMatrix, QPerv, Rational, Sign, SignWord,
};

use roots::{min_separation, nearest, track, Piece, Poly};

#[derive(Debug, Error)]
pub enum LefschetzError {
    #[error("polynomial is not Morse with distinct critical values: {0}")]
    DegenerateFunction(String),
    #[error("numerical precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error(transparent)]
    Core(#[from] locperv::Error),
}

pub type Result<T> = std::result::Result<T, LefschetzError>;

const ROTATIONS: [(i64, i64); 8] = [
    (1, 0),
    (2, 1),
    (3, 1),
    (1, 2),
    (3, 2),
    (4, 1),
    (5, 2),
    (5, 3),
];

/// Reference direction that orders the two roots of a vanishing pair.
fn pair_reference() -> C {
    C::from_polar(1.0, 0.3)
}

fn arg0(z: C) -> f64 {
    let a = z.im.atan2(z.re);
    if a < 0.0 {
        a + TAU
    } else {
        a
    }
}

fn to_c(z: &GaussRat) -> C {
    let (re, im) = z.to_f64();
    C::new(re, im)
}

/// A Morse polynomial together with its generated object.
#[derive(Clone, Debug)]
pub struct Lefschetz {
    /// `q S` with ascending coefficients.
    map: Poly,
    rotation: GaussRat,
    critical_points: Vec<C>,
    /// True critical values of `q S`, in the order of the configuration.
    values: Vec<C>,
    radius: f64,
    precision: u32,
    perv: QPerv,
}

impl Lefschetz {
    /// `coeffs` are ascending: `c0 + c1 x + ...`.
    pub fn generate(coeffs: &[Rational], precision: u32) -> Result<Self> {
        let mut p = precision.max(8);
        let mut last: Option<Self> = None;
        for _ in 0..4 {
            match Self::generate_once(coeffs, p) {
                Ok(g) => {
                    if let Some(prev) = &last {
                        if prev.perv == g.perv {
                            return Ok(g);
                        }
                    }
                    last = Some(g);
                }
                Err(LefschetzError::PrecisionExhausted(_)) => {}
                Err(e) => return Err(e),
            }
            p *= 2;
        }
        Err(LefschetzError::PrecisionExhausted(format!(
            "no two consecutive precisions agreed up to {p} digits"
        )))
    }

    fn generate_once(coeffs: &[Rational], precision: u32) -> Result<Self> {
        let s = real_poly(coeffs)?;
        let ds = s.derivative();
        let crit = if ds.degree() == 0 {
            Vec::new()
        } else {
            ds.roots()?
        };
        certify_distinct(&ds, &crit, |z, r| (z, r), "critical points")?;
        let vals: Vec<C> = crit.iter().map(|&c| s.eval(c)).collect();
        certify_distinct(
            &ds,
            &crit,
            |z, r| (s.eval(z), r * s.derivative_bound(z, r)),
            "critical values",
        )?;

        let surrogate = surrogate_points(&vals)?;
        let (rotation, config) = ROTATIONS
            .iter()
            .map(|&(a, b)| gauss(a, b))
            .find_map(|q| {
                let cfg = Configuration::new(surrogate.iter().map(|p| &q * p).collect()).ok()?;
                cfg.horizontal_pair().is_none().then_some((q, cfg))
            })
            .ok_or_else(|| LefschetzError::DegenerateFunction("no admissible rotation".into()))?;
        let qc = to_c(&rotation);
        let map = Poly::new(s.coeffs.iter().map(|c| c * qc).collect());
        let values: Vec<C> = vals.iter().map(|v| v * qc).collect();
        let radius = if values.len() > 1 {
            0.2 * min_separation(&values)
        } else {
            0.5
        };

        let n = values.len();
        let phi = vec![CircleLocalSystem::new(QMatrix::from_ints(&[[-1]]))?; n];
        let mut me = Self {
            map,
            rotation,
            critical_points: crit,
            values,
            radius,
            precision,
            perv: LocalizedPerv::new(config, phi.clone(), BTreeMap::new())?,
        };
        let mut direction = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let r = me.perv.intermediates(i, j).len();
                    direction.insert((i, j), me.transport(i, j, &SignWord::all(Sign::Plus, r))?);
                }
            }
        }
        me.perv = LocalizedPerv::from_direction_frame(me.perv.config().clone(), phi, direction)?;
        Ok(me)
    }

    pub fn perv(&self) -> &QPerv {
        &self.perv
    }

    pub fn into_perv(self) -> QPerv {
        self.perv
    }

    /// Working digits of the run that was accepted.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn rotation(&self) -> &GaussRat {
        &self.rotation
    }

    pub fn critical_points(&self) -> &[C] {
        &self.critical_points
    }

    /// Critical values after rotation, matching the configuration order.
    pub fn critical_values(&self) -> &[C] {
        &self.values
    }

    /// Roots at `w` with the vanishing pair of critical point `k` labelled.
    fn labelled_fiber(&self, k: usize, w: C) -> Result<(Vec<C>, usize, usize)> {
        let roots = self.map.shifted(w).roots()?;
        let c = self.critical_points[k];
        let mut d: Vec<(f64, usize)> = roots
            .iter()
            .enumerate()
            .map(|(i, x)| ((x - c).norm(), i))
            .collect();
        d.sort_by(|a, b| a.0.total_cmp(&b.0));
        if d.len() > 2 && d[1].0 * 2.0 > d[2].0 {
            return Err(LefschetzError::PrecisionExhausted(
                "vanishing pair not isolated".into(),
            ));
        }
        let (i1, i2) = (d[0].1, d[1].1);
        let key = |x: C| ((x - c) * pair_reference().conj()).re;
        Ok(if key(roots[i1]) >= key(roots[i2]) {
            (roots, i1, i2)
        } else {
            (roots, i2, i1)
        })
    }

    /// Straight path from near `a` to near `b` with semicircular detours
    /// around the intermediate points on the sides given by `word`.
    fn segment_path(&self, i: usize, j: usize, word: &SignWord) -> Vec<Piece> {
        let (a, b) = (self.values[i], self.values[j]);
        let u = (b - a) / (b - a).norm();
        let th = arg0(u);
        let rho = self.radius;
        let mut pieces = Vec::new();
        let mut at = a + u * rho;
        for (&k, s) in self.perv.intermediates(i, j).iter().zip(&word.0) {
            let c = self.values[k];
            pieces.push(Piece::Line(at, c - u * rho));
            // Plus keeps the point on the left: counterclockwise about it.
            let to = match s {
                Sign::Plus => th + TAU,
                Sign::Minus => th,
            };
            pieces.push(Piece::Arc {
                center: c,
                radius: rho,
                from: th + TAU / 2.0,
                to,
            });
            at = c + u * rho;
        }
        pieces.push(Piece::Line(at, b - u * rho));
        pieces
    }

    /// Signed intersection of the transported class of `i` with the class of `j`.
    fn pairing(
        &self,
        end: &[C],
        x: (usize, usize),
        target: &[C],
        y: (usize, usize),
    ) -> Result<i64> {
        let img = |k: usize| nearest(target, end[k]);
        let (a, b) = (img(x.0)?, img(x.1)?);
        let delta = |s: usize, t: usize| i64::from(s == t);
        Ok(delta(a, y.0) - delta(a, y.1) - delta(b, y.0) + delta(b, y.1))
    }

    /// Transport between direction stalks along the avoidance word `word`.
    pub fn transport(&self, i: usize, j: usize, word: &SignWord) -> Result<QMatrix> {
        let (a, b) = (self.values[i], self.values[j]);
        let u = (b - a) / (b - a).norm();
        let p = self.precision;
        let eps = self.radius;

        let (start, xp, xm) = self.labelled_fiber(i, a + eps)?;
        let mut path = vec![Piece::Arc {
            center: a,
            radius: eps,
            from: 0.0,
            to: arg0(u),
        }];
        path.extend(self.segment_path(i, j, word));
        let end = track(&self.map, &start, &path, p)?;

        let (base_b, yp, ym) = self.labelled_fiber(j, b + eps)?;
        let arrive = [Piece::Arc {
            center: b,
            radius: eps,
            from: 0.0,
            to: arg0(-u),
        }];
        let target = track(&self.map, &base_b, &arrive, p)?;
        let v = self.pairing(&end, (xp, xm), &target, (yp, ym))?;
        Ok(QMatrix::from_ints(&[[v]]))
    }

    /// Based all-plus transport computed directly from the half-turn recipe:
    /// leave and re-enter through the upper half plane when `b` is above `a`,
    /// through the lower half plane otherwise.
    pub fn based_transport(&self, i: usize, j: usize) -> Result<QMatrix> {
        let (a, b) = (self.values[i], self.values[j]);
        let u = (b - a) / (b - a).norm();
        let up = self.perv.up(i, j);
        let eps = self.radius;
        let (th_ab, th_ba) = (arg0(u), arg0(-u));
        let (start, xp, xm) = self.labelled_fiber(i, a + eps)?;
        let leave = if up { th_ab } else { th_ab - TAU };
        let enter = if up { TAU } else { 0.0 };
        let mut path = vec![Piece::Arc {
            center: a,
            radius: eps,
            from: 0.0,
            to: leave,
        }];
        let r = self.perv.intermediates(i, j).len();
        path.extend(self.segment_path(i, j, &SignWord::all(Sign::Plus, r)));
        path.push(Piece::Arc {
            center: b,
            radius: eps,
            from: th_ba,
            to: enter,
        });
        let end = track(&self.map, &start, &path, self.precision)?;
        let (base_b, yp, ym) = self.labelled_fiber(j, b + eps)?;
        let v = self.pairing(&end, (xp, xm), &base_b, (yp, ym))?;
        Ok(QMatrix::from_ints(&[[v]]))
    }
}

fn real_poly(coeffs: &[Rational]) -> Result<Poly> {
    let mut c: Vec<Rational> = coeffs.to_vec();
    while c.last().is_some_and(Zero::is_zero) {
        c.pop();
    }
    if c.len() < 2 {
        return Err(LefschetzError::DegenerateFunction(
            "constant polynomial".into(),
        ));
    }
    Ok(Poly::new(
        c.iter()
            .map(|x| C::new(x.to_f64().unwrap_or(f64::NAN), 0.0))
            .collect(),
    ))
}

/// Proves the roots `z` of `p` simple and their images under `image`
/// (a centre and radius for each inclusion disk) pairwise disjoint.
fn certify_distinct<F: Fn(C, f64) -> (C, f64)>(
    p: &Poly,
    z: &[C],
    image: F,
    what: &str,
) -> Result<()> {
    let disks: Vec<(C, f64)> = z
        .iter()
        .map(|&x| image(x, p.inclusion_radius(x) + 1e-14 * (1.0 + x.norm())))
        .collect();
    for i in 0..disks.len() {
        for j in i + 1..disks.len() {
            if (disks[i].0 - disks[j].0).norm() <= disks[i].1 + disks[j].1 {
                return Err(LefschetzError::DegenerateFunction(format!(
                    "{what} {i} and {j} are not separated"
                )));
            }
        }
    }
    Ok(())
}

fn round_to(x: f64, bits: i32) -> Rational {
    let scale = 2f64.powi(bits);
    let n = (x * scale).round();
    Rational::new((n as i64).into(), (1i64 << bits).into())
}

/// Gaussian-rational points with the same orientation type as `vals`.
fn surrogate_points(vals: &[C]) -> Result<Vec<GaussRat>> {
    let scale = 1.0 + vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    'bits: for bits in (12..=40).step_by(4) {
        let pts: Vec<GaussRat> = vals
            .iter()
            .map(|v| GaussRat::new(round_to(v.re, bits), round_to(v.im, bits)))
            .collect();
        let n = pts.len();
        let diffs: Vec<(C, GaussRat)> = (0..n)
            .flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b)))
            .map(|(a, b)| (vals[b] - vals[a], &pts[b] - &pts[a]))
            .collect();
        for (f1, e1) in &diffs {
            if e1.is_zero() {
                continue 'bits;
            }
            for (f2, e2) in &diffs {
                let fc = f1.re * f2.im - f1.im * f2.re;
                let ec = e1.cross(e2);
                let tol = 1e-9 * scale * scale;
                let agree = if fc.abs() > tol {
                    ec.to_f64()
                        .is_some_and(|x| x.signum() == fc.signum() && x != 0.0)
                } else {
                    ec.is_zero()
                };
                if !agree {
                    continue 'bits;
                }
            }
        }
        return Ok(pts);
    }
    Err(LefschetzError::PrecisionExhausted(
        "no surrogate configuration preserved the geometry".into(),
    ))
}

/// Generates the object for `coeffs` (ascending).
pub fn lefschetz_sheaf(coeffs: &[Rational], precision: u32) -> Result<QPerv> {
    Lefschetz::generate(coeffs, precision).map(Lefschetz::into_perv)
}

/// Monodromy of the fiber roots around a large circle, acting on reduced
/// degree-zero cohomology (basis `e_k - e_d`).
pub fn monodromy_at_infinity(coeffs: &[Rational], precision: u32) -> Result<QMatrix> {
    let s = real_poly(coeffs)?;
    let d = s.degree();
    let ds = s.derivative();
    let crit = if ds.degree() == 0 {
        Vec::new()
    } else {
        ds.roots()?
    };
    let r =
        2.0 * crit.iter().map(|&c| s.eval(c).norm()).fold(0.0, f64::max) + 2.0 + s.coeffs[0].norm();
    let base = s.shifted(C::new(r, 0.0)).roots()?;
    let end = track(
        &s,
        &base,
        &[Piece::Arc {
            center: C::new(0.0, 0.0),
            radius: r,
            from: 0.0,
            to: TAU,
        }],
        precision.max(8),
    )?;
    let perm: Vec<usize> = end
        .iter()
        .map(|&x| nearest(&base, x))
        .collect::<Result<_>>()?;
    let cycle = std::iter::successors(Some(perm[0]), |&k| Some(perm[k]))
        .skip(1)
        .take(d)
        .position(|k| k == perm[0]);
    if cycle != Some(d - 1) {
        return Err(LefschetzError::PrecisionExhausted(
            "roots at infinity do not form a single cycle".into(),
        ));
    }
    let mut m = QMatrix::zeros(d - 1, d - 1);
    // e_k - e_d maps to e_perm(k) - e_perm(d); coordinates are the first d-1 entries.
    for k in 0..d - 1 {
        let mut v = vec![0i64; d];
        v[perm[k]] += 1;
        v[perm[d - 1]] -= 1;
        for (row, &x) in v.iter().take(d - 1).enumerate() {
            m[(row, k)] = Rational::from_integer(x.into());
        }
    }
    Ok(m)
}
