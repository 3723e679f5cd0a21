//! Small isomonodromic motions of the points. Each point moves along a
//! straight line `a_k + t d_k`, `t` in `[0, 1]`. A motion is admissible when
//! no triple becomes collinear on the way, no pair becomes horizontal and
//! no two points meet; triples that start collinear may split at once.
//! Splitting an intermediate point off a segment turns the stored
//! transport into the avoidance transport on the side it lands on.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::gauss::GaussRat;
use crate::geometry::Configuration;
use crate::scalar::{rat, Rational, Scalar};
use crate::sheaf::{LocalizedPerv, Sign, SignWord};
use crate::transport::{solve_plus, TransportEngine};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Perturbation {
    pub displacement: Vec<GaussRat>,
}

impl Perturbation {
    pub fn new(displacement: Vec<GaussRat>) -> Self {
        Self { displacement }
    }

    /// Moves point `k` by `d`, all others fixed.
    pub fn single(n: usize, k: usize, d: GaussRat) -> Self {
        let mut displacement = vec![GaussRat::zero(); n];
        displacement[k] = d;
        Self { displacement }
    }
}

/// Sides taken by the formerly intermediate points of each pair, in the
/// order along the original segment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub displacement: Vec<GaussRat>,
    pub sides: BTreeMap<(usize, usize), SignWord>,
}

/// Whether `c0 + c1 t + c2 t^2` vanishes somewhere on `(0, 1]`.
fn has_root_in_unit(c0: &Rational, c1: &Rational, c2: &Rational) -> bool {
    let eval = |t: &Rational| c0 + c1 * t + c2 * t * t;
    let one = rat(1, 1);
    if c0.is_zero() {
        // t (c1 + c2 t)
        if c2.is_zero() {
            return c1.is_zero();
        }
        let r = -c1 / c2;
        return r.is_positive() && r <= one;
    }
    let end = eval(&one);
    if end.is_zero() || end.signum() != c0.signum() {
        return true;
    }
    if c2.is_zero() {
        return false;
    }
    let vertex = -c1 / (c2 * rat(2, 1));
    if vertex.is_positive() && vertex < one {
        let v = eval(&vertex);
        return v.is_zero() || v.signum() != c0.signum();
    }
    false
}

/// `cross(B(t), C(t))` for `B = b0 + t b1`, `C = c0 + t c1`, as coefficients.
fn cross_poly(b0: &GaussRat, b1: &GaussRat, c0: &GaussRat, c1: &GaussRat) -> [Rational; 3] {
    [b0.cross(c0), b0.cross(c1) + b1.cross(c0), b1.cross(c1)]
}

#[derive(Debug)]
enum Event {
    Meet(usize, usize),
    Horizontal(usize, usize),
    Collinear(usize, usize, usize),
    Split(usize, usize, usize),
}

impl Event {
    fn describe(&self) -> String {
        match self {
            Event::Meet(i, j) => format!("points {i} and {j} meet"),
            Event::Horizontal(i, j) => format!("points {i} and {j} become horizontal"),
            Event::Collinear(i, j, k) => format!("points {i}, {j}, {k} become collinear"),
            Event::Split(i, j, k) => format!("point {k} leaves the line through {i} and {j}"),
        }
    }
}

/// All events along the motion; splits of initially collinear triples are
/// reported separately from forbidden events.
fn events(config: &Configuration, d: &[GaussRat]) -> Vec<Event> {
    let n = config.len();
    let p = config.points();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (d0, d1) = (&p[j] - &p[i], &d[j] - &d[i]);
            if has_root_in_unit(&d0.im, &d1.im, &Rational::zero()) {
                out.push(Event::Horizontal(i, j));
            }
            // D(t) = 0 forces both coordinates to vanish at the same t.
            if !d1.is_zero()
                && d0.cross(&d1).is_zero()
                && d0.dot(&d1).is_negative()
                && d1.norm_sqr() >= d0.norm_sqr()
            {
                out.push(Event::Meet(i, j));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let [c0, c1, c2] = cross_poly(
                    &(&p[j] - &p[i]),
                    &(&d[j] - &d[i]),
                    &(&p[k] - &p[i]),
                    &(&d[k] - &d[i]),
                );
                let identically_zero = c0.is_zero() && c1.is_zero() && c2.is_zero();
                if identically_zero {
                    continue;
                }
                if c0.is_zero() {
                    if has_root_in_unit(&c1, &c2, &Rational::zero()) {
                        out.push(Event::Collinear(i, j, k));
                    } else {
                        out.push(Event::Split(i, j, k));
                    }
                } else if has_root_in_unit(&c0, &c1, &c2) {
                    out.push(Event::Collinear(i, j, k));
                }
            }
        }
    }
    out
}

fn moved(config: &Configuration, d: &[GaussRat]) -> Result<Configuration> {
    if d.len() != config.len() {
        return Err(Error::InvalidPerturbation(format!(
            "{} displacements for {} points",
            d.len(),
            config.len()
        )));
    }
    Configuration::new(config.points().iter().zip(d).map(|(a, x)| a + x).collect())
        .map_err(|e| Error::InvalidPerturbation(e.to_string()))
}

/// Checks the motion and reads off the side word of every pair.
pub fn certify(config: &Configuration, p: &Perturbation) -> Result<(Configuration, Certificate)> {
    let target = moved(config, &p.displacement)?;
    if let Some(e) = events(config, &p.displacement)
        .iter()
        .find(|e| !matches!(e, Event::Split(..)))
    {
        return Err(Error::InvalidPerturbation(e.describe()));
    }
    let mut sides = BTreeMap::new();
    for i in 0..config.len() {
        for j in 0..config.len() {
            if i == j {
                continue;
            }
            let inter = config.intermediate_indices(i, j)?;
            if inter.is_empty() {
                continue;
            }
            let still = target.intermediate_indices(i, j)?;
            let seg = target.point(j) - target.point(i);
            let word = inter
                .iter()
                .map(|&k| {
                    let c = seg.cross(&(target.point(k) - target.point(i)));
                    if still.contains(&k) || c.is_positive() {
                        Sign::Plus
                    } else {
                        Sign::Minus
                    }
                })
                .collect();
            sides.insert((i, j), SignWord(word));
        }
    }
    Ok((
        target,
        Certificate {
            displacement: p.displacement.clone(),
            sides,
        },
    ))
}

/// Moves the points; each stored transport becomes the avoidance transport
/// matching the sides its intermediate points move to.
pub fn perturb<K: Scalar>(
    f: &LocalizedPerv<K>,
    p: &Perturbation,
) -> Result<(LocalizedPerv<K>, Certificate)> {
    let (target, cert) = certify(f.config(), p)?;
    let e = TransportEngine::new(f);
    let mut direction = BTreeMap::new();
    for i in 0..f.len() {
        for j in 0..f.len() {
            if i == j {
                continue;
            }
            let m = match cert.sides.get(&(i, j)) {
                Some(w) => e.m_eps(i, j, w)?,
                None => e.m_eps(i, j, &SignWord::default())?,
            };
            direction.insert((i, j), m);
        }
    }
    let g = LocalizedPerv::from_direction_frame(target, f.phis().to_vec(), direction)
        .map_err(|e| Error::InvalidPerturbation(e.to_string()))?;
    Ok((g, cert))
}

/// Inverse of [`perturb`]: `moved` lives on the displaced configuration,
/// `target` is the original one.
pub fn specialize<K: Scalar>(
    moved_perv: &LocalizedPerv<K>,
    target: &Configuration,
    cert: &Certificate,
) -> Result<LocalizedPerv<K>> {
    let (landing, expected) = certify(target, &Perturbation::new(cert.displacement.clone()))?;
    if &landing != moved_perv.config() {
        return Err(Error::InvalidPerturbation(
            "displacement does not lead to the given configuration".into(),
        ));
    }
    if &expected != cert {
        return Err(Error::InvalidPerturbation(
            "side assignments do not match the geometry".into(),
        ));
    }
    solve_plus(
        target.clone(),
        moved_perv.phis().to_vec(),
        |_, i, j| Ok(moved_perv.mplus_in(i, j, crate::sheaf::Frame::DirectionStalks)),
        |e, i, j| {
            let w = cert.sides.get(&(i, j)).cloned().unwrap_or_default();
            e.m_eps(i, j, &w)
        },
    )
}

/// Drags point `k` around the closed polyline `vertices` (absolute
/// positions, starting and ending at its current position) and reports
/// whether the data come back unchanged. Any event on the way is an error.
pub fn drag_check<K: Scalar>(
    f: &LocalizedPerv<K>,
    k: usize,
    vertices: &[GaussRat],
) -> Result<bool> {
    f.check_index(k)?;
    let start = f.point(k).clone();
    let mut path = vec![start.clone()];
    path.extend(vertices.iter().cloned());
    if path.last() != Some(&start) {
        path.push(start);
    }
    let mut g = f.clone();
    for leg in path.windows(2) {
        let p = Perturbation::single(g.len(), k, &leg[1] - &leg[0]);
        if let Some(e) = events(g.config(), &p.displacement).first() {
            return Err(Error::EventOnPath(e.describe()));
        }
        g = perturb(&g, &p)?.0;
    }
    Ok(&g == f)
}

/// Displacement sending the intermediate points of `i -> j` to the sides
/// given by `word` (plus = left of the directed segment), by a small
/// multiple of the normal; halves the step until the motion is admissible.
pub fn side_perturbation<K: Scalar>(
    f: &LocalizedPerv<K>,
    i: usize,
    j: usize,
    word: &SignWord,
) -> Result<Perturbation> {
    let inter = f.config().intermediate_indices(i, j)?;
    if inter.len() != word.len() {
        return Err(Error::WordLength {
            expected: inter.len(),
            got: word.len(),
        });
    }
    let normal = &GaussRat::i() * &(f.point(j) - f.point(i));
    let mut step = rat(1, 8 * (f.len() as i64 + 1));
    for _ in 0..40 {
        let mut d = vec![GaussRat::zero(); f.len()];
        for (&k, s) in inter.iter().zip(&word.0) {
            let sign = if *s == Sign::Plus {
                rat(1, 1)
            } else {
                rat(-1, 1)
            };
            d[k] = normal.scale(&(&step * &sign));
        }
        let p = Perturbation::new(d);
        if let Ok((_, cert)) = certify(f.config(), &p) {
            if cert.sides.get(&(i, j)) == Some(word) {
                return Ok(p);
            }
        }
        step /= rat(2, 1);
    }
    Err(Error::InvalidPerturbation(
        "no admissible side displacement found".into(),
    ))
}
