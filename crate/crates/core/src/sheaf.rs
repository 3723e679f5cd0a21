//! Localized perverse sheaves presented by vanishing-cycle local systems and
//! transport matrices along straight segments.
//!
//! Stalk convention: the stalk of `Phi_a` at a direction `d` is identified
//! with the stalk at the positive real direction by the counterclockwise arc
//! from angle 0 to `arg d` in `[0, 2 pi)`. In these coordinates transport
//! between lifted directions is a power of the monodromy (see
//! [`crate::geometry::lifted_transport_count`]).
//!
//! The stored transports are in the *based* frame: `B_ab` is the transport
//! from direction 1 at `a` to direction 1 at `b`, leaving and arriving through
//! the half-turns prescribed by whether `b` lies above or below `a`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Signed;

use crate::error::{Error, Result};
use crate::gauss::{direction_cmp, GaussRat};
use crate::geometry::Configuration;
use crate::matrix::Matrix;
use crate::scalar::Scalar;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Sign {
    /// Pass the point keeping it on the left (detour to the right).
    Plus,
    Minus,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct SignWord(pub Vec<Sign>);

impl SignWord {
    pub fn all(sign: Sign, len: usize) -> Self {
        Self(vec![sign; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, s: Sign) -> usize {
        self.0.iter().filter(|&&x| x == s).count()
    }

    /// All words of the given length, in lexicographic order with `+` first.
    pub fn enumerate(len: usize) -> impl Iterator<Item = SignWord> {
        (0u64..1 << len).map(move |bits| {
            SignWord(
                (0..len)
                    .map(|i| {
                        if bits >> (len - 1 - i) & 1 == 0 {
                            Sign::Plus
                        } else {
                            Sign::Minus
                        }
                    })
                    .collect(),
            )
        })
    }
}

impl fmt::Display for SignWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            f.write_str(if *s == Sign::Plus { "+" } else { "-" })?;
        }
        Ok(())
    }
}

impl FromStr for SignWord {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '+' => Ok(Sign::Plus),
                '-' => Ok(Sign::Minus),
                _ => Err(Error::Parse(format!("bad sign {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(SignWord)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PathKind {
    Word(SignWord),
    Alien,
}

/// `i->j:+-+`, `i->j:alien`, or `i->j` (all-plus).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PathSpec {
    pub from: usize,
    pub to: usize,
    pub kind: PathKind,
}

impl FromStr for PathSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected i->j[:word|:alien], got {s:?}"));
        let (pair, kind) = match s.split_once(':') {
            Some((p, k)) => (p, Some(k)),
            None => (s, None),
        };
        let (i, j) = pair.split_once("->").ok_or_else(bad)?;
        let from = i.trim().parse().map_err(|_| bad())?;
        let to = j.trim().parse().map_err(|_| bad())?;
        let kind = match kind {
            Some("alien") => PathKind::Alien,
            Some(w) => PathKind::Word(w.parse()?),
            None => PathKind::Word(SignWord::default()),
        };
        Ok(Self { from, to, kind })
    }
}

impl fmt::Display for PathSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            PathKind::Alien => write!(f, "{}->{}:alien", self.from, self.to),
            PathKind::Word(w) => write!(f, "{}->{}:{}", self.from, self.to, w),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Frame {
    Based,
    DirectionStalks,
}

/// Finite-dimensional local system on the circle: the stalk at angle 0 and
/// its counterclockwise monodromy.
#[derive(Clone, PartialEq, Debug)]
pub struct CircleLocalSystem<K> {
    monodromy: Matrix<K>,
    inverse: Matrix<K>,
}

impl<K: Scalar> CircleLocalSystem<K> {
    pub fn new(monodromy: Matrix<K>) -> Result<Self> {
        let inverse = monodromy.inverse()?;
        Ok(Self { monodromy, inverse })
    }

    pub fn trivial(dim: usize) -> Self {
        Self {
            monodromy: Matrix::identity(dim),
            inverse: Matrix::identity(dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.monodromy.rows()
    }

    pub fn monodromy(&self) -> &Matrix<K> {
        &self.monodromy
    }

    pub fn inverse(&self) -> &Matrix<K> {
        &self.inverse
    }

    /// Clockwise half-turn from `-zeta` to `zeta`, in trivialized coordinates.
    pub fn junction(&self, zeta: &GaussRat) -> Matrix<K> {
        if zeta.in_upper_half() {
            Matrix::identity(self.dim())
        } else {
            self.inverse.clone()
        }
    }

    /// Counterclockwise half-turn from `theta` to `-theta`; the inverse of
    /// [`Self::junction`].
    pub fn spectator(&self, theta: &GaussRat) -> Matrix<K> {
        if theta.in_upper_half() {
            Matrix::identity(self.dim())
        } else {
            self.monodromy.clone()
        }
    }

    pub fn power(&self, n: i64) -> Matrix<K> {
        let (m, e) = if n >= 0 {
            (&self.monodromy, n)
        } else {
            (&self.inverse, -n)
        };
        m.pow(e).expect("square")
    }
}

/// `b` lies above `a`, so the segment direction points into the upper half plane.
pub fn upward(a: &GaussRat, b: &GaussRat) -> bool {
    a.im < b.im
}

/// Based transport from the transport between direction stalks.
pub fn based_from_direction<K: Scalar>(
    m: &Matrix<K>,
    phi_a: &CircleLocalSystem<K>,
    phi_b: &CircleLocalSystem<K>,
    up: bool,
) -> Matrix<K> {
    if up {
        phi_b.monodromy() * m
    } else {
        m * phi_a.inverse()
    }
}

pub fn direction_from_based<K: Scalar>(
    b: &Matrix<K>,
    phi_a: &CircleLocalSystem<K>,
    phi_b: &CircleLocalSystem<K>,
    up: bool,
) -> Matrix<K> {
    if up {
        phi_b.inverse() * b
    } else {
        b * phi_a.monodromy()
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct LocalizedPerv<K> {
    config: Configuration,
    phi: Vec<CircleLocalSystem<K>>,
    mplus: BTreeMap<(usize, usize), Matrix<K>>,
}

pub type Transports<K> = BTreeMap<(usize, usize), Matrix<K>>;

impl<K: Scalar> LocalizedPerv<K> {
    /// Missing transports default to zero.
    pub fn new(
        config: Configuration,
        phi: Vec<CircleLocalSystem<K>>,
        mut mplus: Transports<K>,
    ) -> Result<Self> {
        let n = config.len();
        if phi.len() != n {
            return Err(Error::Shape(format!(
                "{} local systems for {n} points",
                phi.len()
            )));
        }
        if let Some((i, j)) = config.horizontal_pair() {
            return Err(Error::HorizontalPair(i, j));
        }
        for &(i, j) in mplus.keys() {
            if i >= n || j >= n || i == j {
                return Err(Error::UnknownPoint(format!("{i}->{j}")));
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let m = mplus
                    .entry((i, j))
                    .or_insert_with(|| Matrix::zeros(phi[j].dim(), phi[i].dim()));
                if m.shape() != (phi[j].dim(), phi[i].dim()) {
                    return Err(Error::Shape(format!(
                        "transport {i}->{j} is {}x{}, expected {}x{}",
                        m.rows(),
                        m.cols(),
                        phi[j].dim(),
                        phi[i].dim()
                    )));
                }
            }
        }
        Ok(Self { config, phi, mplus })
    }

    /// The object supported at one point with trivial monodromy.
    pub fn skyscraper(a: GaussRat, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyObject);
        }
        Ok(Self {
            config: Configuration::new(vec![a])?,
            phi: vec![CircleLocalSystem::trivial(dim)],
            mplus: BTreeMap::new(),
        })
    }

    /// The unit for convolution: a rank-one skyscraper at the origin.
    pub fn unit() -> Self {
        Self::skyscraper(GaussRat::zero(), 1).expect("rank one")
    }

    pub fn zero() -> Self {
        Self {
            config: Configuration::default(),
            phi: Vec::new(),
            mplus: BTreeMap::new(),
        }
    }

    /// Built from direction-frame transports.
    pub fn from_direction_frame(
        config: Configuration,
        phi: Vec<CircleLocalSystem<K>>,
        direction: Transports<K>,
    ) -> Result<Self> {
        let mut based = BTreeMap::new();
        for ((i, j), m) in direction {
            if i >= phi.len() || j >= phi.len() || i == j {
                return Err(Error::UnknownPoint(format!("{i}->{j}")));
            }
            let up = upward(config.point(i), config.point(j));
            based.insert((i, j), based_from_direction(&m, &phi[i], &phi[j], up));
        }
        Self::new(config, phi, based)
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.config.len()
    }

    pub fn is_empty(&self) -> bool {
        self.config.is_empty()
    }

    pub fn point(&self, i: usize) -> &GaussRat {
        self.config.point(i)
    }

    pub fn phi(&self, i: usize) -> &CircleLocalSystem<K> {
        &self.phi[i]
    }

    pub fn phis(&self) -> &[CircleLocalSystem<K>] {
        &self.phi
    }

    pub fn dim(&self, i: usize) -> usize {
        self.phi[i].dim()
    }

    pub fn total_dim(&self) -> usize {
        self.phi.iter().map(CircleLocalSystem::dim).sum()
    }

    /// Starting row of each `Phi_a` in the direct sum.
    pub fn offsets(&self) -> Vec<usize> {
        self.phi
            .iter()
            .scan(0, |acc, p| {
                let o = *acc;
                *acc += p.dim();
                Some(o)
            })
            .collect()
    }

    pub fn mplus(&self, i: usize, j: usize) -> &Matrix<K> {
        &self.mplus[&(i, j)]
    }

    pub fn transports(&self) -> &Transports<K> {
        &self.mplus
    }

    pub fn mplus_in(&self, i: usize, j: usize, frame: Frame) -> Matrix<K> {
        match frame {
            Frame::Based => self.mplus(i, j).clone(),
            Frame::DirectionStalks => self.to_direction(i, j, self.mplus(i, j)),
        }
    }

    pub fn direction_transports(&self) -> Transports<K> {
        self.mplus
            .iter()
            .map(|(&(i, j), m)| ((i, j), self.to_direction(i, j, m)))
            .collect()
    }

    pub fn up(&self, i: usize, j: usize) -> bool {
        upward(self.point(i), self.point(j))
    }

    pub fn to_direction(&self, i: usize, j: usize, based: &Matrix<K>) -> Matrix<K> {
        direction_from_based(based, &self.phi[i], &self.phi[j], self.up(i, j))
    }

    pub fn to_based(&self, i: usize, j: usize, direction: &Matrix<K>) -> Matrix<K> {
        based_from_direction(direction, &self.phi[i], &self.phi[j], self.up(i, j))
    }

    pub fn total_monodromy(&self) -> Matrix<K> {
        let blocks: Vec<_> = self.phi.iter().map(|p| p.monodromy().clone()).collect();
        Matrix::block_diag(&blocks)
    }

    /// Direct sum; coincident points merge with `self`'s block first.
    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        let mut points = self.config.points().to_vec();
        let mut from_other = Vec::with_capacity(other.len());
        for p in other.config.points() {
            match points.iter().position(|q| q == p) {
                Some(k) => from_other.push(k),
                None => {
                    points.push(p.clone());
                    from_other.push(points.len() - 1);
                }
            }
        }
        let n = points.len();
        let config = Configuration::new(points)?;
        let owner_f: Vec<Option<usize>> = (0..n).map(|k| (k < self.len()).then_some(k)).collect();
        let owner_g: Vec<Option<usize>> = (0..n)
            .map(|k| from_other.iter().position(|&x| x == k))
            .collect();
        let dim = |k: usize| -> (usize, usize) {
            (
                owner_f[k].map_or(0, |i| self.dim(i)),
                owner_g[k].map_or(0, |i| other.dim(i)),
            )
        };
        let phi = (0..n)
            .map(|k| {
                let mut blocks = Vec::new();
                if let Some(i) = owner_f[k] {
                    blocks.push(self.phi[i].monodromy().clone());
                }
                if let Some(i) = owner_g[k] {
                    blocks.push(other.phi[i].monodromy().clone());
                }
                CircleLocalSystem::new(Matrix::block_diag(&blocks))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut mplus = BTreeMap::new();
        for c in 0..n {
            for d in 0..n {
                if c == d {
                    continue;
                }
                let (fc, gc) = dim(c);
                let (fd, gd) = dim(d);
                let mut m = Matrix::zeros(fd + gd, fc + gc);
                if let (Some(i), Some(j)) = (owner_f[c], owner_f[d]) {
                    m.set_block(0, 0, self.mplus(i, j));
                }
                if let (Some(i), Some(j)) = (owner_g[c], owner_g[d]) {
                    m.set_block(fd, fc, other.mplus(i, j));
                }
                mplus.insert((c, d), m);
            }
        }
        Self::new(config, phi, mplus)
    }

    /// Relabels points: point `k` of the result is point `perm[k]` of `self`.
    pub fn reorder(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::Shape("not a permutation".into()));
        }
        let config = Configuration::new(perm.iter().map(|&p| self.point(p).clone()).collect())?;
        let phi = perm.iter().map(|&p| self.phi[p].clone()).collect();
        let mut mplus = BTreeMap::new();
        for (i, &pi) in perm.iter().enumerate() {
            for (j, &pj) in perm.iter().enumerate() {
                if i != j {
                    mplus.insert((i, j), self.mplus(pi, pj).clone());
                }
            }
        }
        Self::new(config, phi, mplus)
    }

    /// Rotation by `q`, lifting its argument to `(-pi, pi]`.
    pub fn rotate_by(&self, q: &GaussRat) -> Result<Self> {
        let winding = if q.im.is_negative() { -1 } else { 0 };
        self.rotate_by_lifted(q, winding)
    }

    /// Pushforward along `z -> q z`, the rotation angle lifted to
    /// `arg q + 2 pi winding` with `arg q` in `[0, 2 pi)`. New base stalks are
    /// transported from the old ones along this lifted angle.
    pub fn rotate_by_lifted(&self, q: &GaussRat, winding: i64) -> Result<Self> {
        if q.is_zero() {
            return Err(Error::DegenerateDirection);
        }
        let config = self.config.map_points(|p| q * p)?;
        if let Some((i, j)) = config.horizontal_pair() {
            return Err(Error::HorizontalPair(i, j));
        }
        let shift = |d: &GaussRat| -> i64 {
            let wraps = direction_cmp(&(q * d), d).expect("nonzero") == std::cmp::Ordering::Less;
            -(wraps as i64) - winding
        };
        let mut direction = BTreeMap::new();
        for (&(i, j), based) in &self.mplus {
            let m = self.to_direction(i, j, based);
            let d = self.point(j) - self.point(i);
            let n_a = shift(&d);
            let n_b = shift(&-&d);
            let m = &(&self.phi[j].power(-n_b) * &m) * &self.phi[i].power(n_a);
            direction.insert((i, j), m);
        }
        Self::from_direction_frame(config, self.phi.clone(), direction)
    }

    /// Translation by `t`; stalk directions are unchanged.
    pub fn translate(&self, t: &GaussRat) -> Result<Self> {
        Ok(Self {
            config: self.config.map_points(|p| p + t)?,
            phi: self.phi.clone(),
            mplus: self.mplus.clone(),
        })
    }

    /// Pairwise intermediate point indices.
    pub fn intermediates(&self, i: usize, j: usize) -> Vec<usize> {
        self.config
            .intermediate_indices(i, j)
            .expect("distinct points")
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownPoint(i.to_string()))
        }
    }

    /// Points `i` with `Re(a_i conj(zeta))` and the sum offsets, for grading.
    pub fn levels_along(&self, zeta: &GaussRat) -> Vec<crate::scalar::Rational> {
        let mut out = Vec::with_capacity(self.total_dim());
        for (i, p) in self.phi.iter().enumerate() {
            let l = zeta.dot(self.point(i));
            out.extend(std::iter::repeat(l).take(p.dim()));
        }
        out
    }
}
