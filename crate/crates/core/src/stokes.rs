//! Stokes operators, alien derivations and the Fourier-side monodromy.
//!
//! Operators act on `(+)_a Phi_a` in configuration order, each summand in
//! trivialized coordinates. The block from `a` to `b = a + omega` is
//! `H_b(omega) m_ab`, with `H_b` the clockwise half-turn of `Phi_b`.

use std::cmp::Ordering;

use crate::convolution::{convolve, thom_sebastiani, to_tensor_side};
use crate::error::{Error, Result};
use crate::gauss::{direction_cmp, GaussRat};
use crate::matrix::{Grading, Matrix};
use crate::scalar::{Rational, Scalar};
use crate::sheaf::{LocalizedPerv, Sign, SignWord};
use crate::transport::{AlienMethod, TransportEngine};

/// Which transport fills the blocks of an operator.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BlockKind {
    Plus,
    Minus,
    Alien,
}

fn assemble<K: Scalar, P>(
    f: &LocalizedPerv<K>,
    pick: P,
    kind: BlockKind,
    with_identity: bool,
) -> Matrix<K>
where
    P: Fn(&GaussRat) -> bool,
{
    let e = TransportEngine::new(f);
    let off = f.offsets();
    let n = f.total_dim();
    let mut m = if with_identity {
        Matrix::identity(n)
    } else {
        Matrix::zeros(n, n)
    };
    for i in 0..f.len() {
        for j in 0..f.len() {
            if i == j {
                continue;
            }
            let d = f.point(j) - f.point(i);
            if !pick(&d) {
                continue;
            }
            let r = f.intermediates(i, j).len();
            let t = match kind {
                BlockKind::Plus => e.m_eps(i, j, &SignWord::all(Sign::Plus, r)),
                BlockKind::Minus => e.m_eps(i, j, &SignWord::all(Sign::Minus, r)),
                BlockKind::Alien => e.m_alien(i, j, AlienMethod::EcalleWeights),
            }
            .expect("valid pair");
            let block = &f.phi(j).junction(&d) * &t;
            m.set_block(off[j], off[i], &block);
        }
    }
    m
}

fn sign_kind(sign: Sign) -> BlockKind {
    match sign {
        Sign::Plus => BlockKind::Plus,
        Sign::Minus => BlockKind::Minus,
    }
}

/// `Id` plus the blocks for pairs differing by exactly `omega`.
pub fn c_omega<K: Scalar>(f: &LocalizedPerv<K>, omega: &GaussRat, sign: Sign) -> Result<Matrix<K>> {
    if omega.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    Ok(assemble(f, |d| d == omega, sign_kind(sign), true))
}

/// Blocks only, without the identity; `omega = 0` gives the identity.
pub fn c_omega_graded<K: Scalar>(f: &LocalizedPerv<K>, omega: &GaussRat, sign: Sign) -> Matrix<K> {
    if omega.is_zero() {
        return Matrix::identity(f.total_dim());
    }
    assemble(f, |d| d == omega, sign_kind(sign), false)
}

/// Alien derivation: blocks `H_b m^Delta_ab` for pairs differing by `omega`.
pub fn alien_operator<K: Scalar>(f: &LocalizedPerv<K>, omega: &GaussRat) -> Result<Matrix<K>> {
    if omega.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    Ok(assemble(f, |d| d == omega, BlockKind::Alien, false))
}

/// `Id + sum_{omega on the ray of zeta} C_omega`.
pub fn stokes_operator<K: Scalar>(
    f: &LocalizedPerv<K>,
    zeta: &GaussRat,
    sign: Sign,
) -> Result<Matrix<K>> {
    if zeta.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    Ok(assemble(f, |d| zeta.same_ray(d), sign_kind(sign), true))
}

/// Grading by `Re(a conj(zeta))` under which Stokes operators at `zeta` are unipotent.
pub fn ray_grading<K: Scalar>(f: &LocalizedPerv<K>, zeta: &GaussRat) -> Grading {
    Grading::lower(f.levels_along(zeta))
}

pub fn log_stokes<K: Scalar>(f: &LocalizedPerv<K>, zeta: &GaussRat) -> Result<Matrix<K>> {
    stokes_operator(f, zeta, Sign::Minus)?.nilpotent_log(&ray_grading(f, zeta))
}

/// Differences realized on the ray of `zeta`, nearest first.
pub fn ray_differences<K: Scalar>(f: &LocalizedPerv<K>, zeta: &GaussRat) -> Vec<GaussRat> {
    let mut out: Vec<GaussRat> = Vec::new();
    for a in f.config().points() {
        for b in f.config().points() {
            let d = b - a;
            if zeta.same_ray(&d) && !out.contains(&d) {
                out.push(d);
            }
        }
    }
    out.sort_by_key(|d| d.norm_sqr());
    out
}

/// `log St_zeta = sum Delta_omega` over differences on the ray.
pub fn log_stokes_check<K: Scalar>(f: &LocalizedPerv<K>, zeta: &GaussRat) -> Result<bool> {
    let n = f.total_dim();
    let mut sum = Matrix::zeros(n, n);
    for w in ray_differences(f, zeta) {
        sum = &sum + &alien_operator(f, &w)?;
    }
    Ok(sum.near(&log_stokes(f, zeta)?))
}

/// `Delta^{F*G} = Delta^F (x) Id + Id (x) Delta^G`.
pub fn leibniz_check<K: Scalar>(
    f: &LocalizedPerv<K>,
    g: &LocalizedPerv<K>,
    omega: &GaussRat,
) -> Result<bool> {
    let fg = convolve(f, g)?;
    let pi = thom_sebastiani(f, g, &fg.index);
    let lhs = to_tensor_side(&pi, &alien_operator(&fg.perv, omega)?);
    let (idf, idg) = (
        Matrix::identity(f.total_dim()),
        Matrix::identity(g.total_dim()),
    );
    let rhs = &alien_operator(f, omega)?.kron(&idg) + &idf.kron(&alien_operator(g, omega)?);
    Ok(lhs.near(&rhs))
}

/// `St^{F*G}_zeta = St^F_zeta (x) St^G_zeta`.
pub fn stokes_multiplicativity_check<K: Scalar>(
    f: &LocalizedPerv<K>,
    g: &LocalizedPerv<K>,
    zeta: &GaussRat,
    sign: Sign,
) -> Result<bool> {
    let fg = convolve(f, g)?;
    let pi = thom_sebastiani(f, g, &fg.index);
    let lhs = to_tensor_side(&pi, &stokes_operator(&fg.perv, zeta, sign)?);
    Ok(lhs.near(&stokes_operator(f, zeta, sign)?.kron(&stokes_operator(g, zeta, sign)?)))
}

/// Graded parts multiply: `C^{F*G}_omega = sum C^F_{omega'} (x) C^G_{omega''}`
/// over `omega' + omega'' = omega` with both on the closed segment `[0, omega]`.
pub fn c_omega_multiplicativity_check<K: Scalar>(
    f: &LocalizedPerv<K>,
    g: &LocalizedPerv<K>,
    omega: &GaussRat,
    sign: Sign,
) -> Result<bool> {
    if omega.is_zero() {
        return Err(Error::DegenerateDirection);
    }
    let fg = convolve(f, g)?;
    let pi = thom_sebastiani(f, g, &fg.index);
    let lhs = to_tensor_side(&pi, &c_omega_graded(&fg.perv, omega, sign));
    let mut candidates = vec![GaussRat::zero(), omega.clone()];
    candidates.extend(ray_differences(f, omega));
    candidates.sort_by_key(|d| d.norm_sqr());
    candidates.dedup();
    let n = lhs.rows();
    let mut rhs = Matrix::zeros(n, n);
    for w1 in candidates {
        let w2 = omega - &w1;
        if !(w2.is_zero() || omega.same_ray(&w2)) {
            continue;
        }
        rhs = &rhs + &c_omega_graded(f, &w1, sign).kron(&c_omega_graded(g, &w2, sign));
    }
    Ok(lhs.near(&rhs))
}

#[derive(Clone, Debug)]
pub struct StokesData<K> {
    pub direction: GaussRat,
    pub operator: Matrix<K>,
    pub log: Matrix<K>,
    pub deltas: Vec<(GaussRat, Matrix<K>)>,
}

impl<K: Scalar> StokesData<K> {
    /// `log St = sum Delta_omega`.
    pub fn log_matches_deltas(&self) -> bool {
        let n = self.operator.rows();
        let sum = self
            .deltas
            .iter()
            .fold(Matrix::zeros(n, n), |acc, (_, d)| &acc + d);
        sum.near(&self.log)
    }
}

pub fn stokes_data<K: Scalar>(f: &LocalizedPerv<K>) -> Result<Vec<StokesData<K>>> {
    f.config()
        .stokes_directions()
        .into_iter()
        .map(|zeta| {
            let deltas = ray_differences(f, &zeta)
                .into_iter()
                .map(|w| alien_operator(f, &w).map(|d| (w, d)))
                .collect::<Result<Vec<_>>>()?;
            Ok(StokesData {
                operator: stokes_operator(f, &zeta, Sign::Minus)?,
                log: log_stokes(f, &zeta)?,
                deltas,
                direction: zeta,
            })
        })
        .collect()
}

/// Points with `Re(a conj(zeta)) >= -lambda`; `zeta` must not be a Stokes direction.
pub fn stokes_filtration<K: Scalar>(
    f: &LocalizedPerv<K>,
    zeta: &GaussRat,
    lambda: &Rational,
) -> Result<Vec<usize>> {
    if f.config().is_stokes_direction(zeta)? {
        return Err(Error::StokesDirection);
    }
    let bound = -lambda.clone();
    Ok((0..f.len())
        .filter(|&i| zeta.dot(f.point(i)) >= bound)
        .collect())
}

/// Distinct thresholds at which the filtration at `zeta` jumps, descending
/// in size of the filtered piece. Each entry is (lambda, points).
pub fn stokes_flag<K: Scalar>(
    f: &LocalizedPerv<K>,
    zeta: &GaussRat,
) -> Result<Vec<(Rational, Vec<usize>)>> {
    let mut lambdas: Vec<Rational> = (0..f.len()).map(|i| -zeta.dot(f.point(i))).collect();
    lambdas.sort();
    lambdas.dedup();
    lambdas
        .into_iter()
        .map(|l| stokes_filtration(f, zeta, &l).map(|s| (l, s)))
        .collect()
}

/// Factors met going once counterclockwise around the circle from `base`,
/// in order of traversal. `None` marks the crossing of the positive real
/// axis, where trivialized coordinates pick up the monodromy.
fn circuit(dirs: &[GaussRat], base: &GaussRat) -> Result<Vec<Option<GaussRat>>> {
    let after: Vec<_> = dirs
        .iter()
        .filter(|d| {
            direction_cmp(d, base)
                .map(|o| o == Ordering::Greater)
                .unwrap_or(false)
        })
        .cloned()
        .map(Some)
        .collect();
    let before = dirs
        .iter()
        .filter(|d| {
            direction_cmp(d, base)
                .map(|o| o == Ordering::Less)
                .unwrap_or(false)
        })
        .cloned()
        .map(Some);
    Ok(after
        .into_iter()
        .chain(std::iter::once(None))
        .chain(before)
        .collect())
}

/// Monodromy of the generic Fourier stalk, counterclockwise from `base`,
/// as an operator on `(+)_a Phi_a` in trivialized coordinates.
pub fn ft_monodromy<K: Scalar>(f: &LocalizedPerv<K>, base: &GaussRat) -> Result<Matrix<K>> {
    if f.config().is_stokes_direction(base)? {
        return Err(Error::StokesDirection);
    }
    let mut m = Matrix::identity(f.total_dim());
    for step in circuit(&f.config().stokes_directions(), base)? {
        let factor = match step {
            Some(z) => stokes_operator(f, &z, Sign::Minus)?,
            None => f.total_monodromy(),
        };
        m = &factor * &m;
    }
    Ok(m)
}

/// `P` with `ft_monodromy(to) = P ft_monodromy(from) P^-1`: the Stokes
/// operators crossed going counterclockwise from `from` to `to`.
pub fn ft_conjugator<K: Scalar>(
    f: &LocalizedPerv<K>,
    from: &GaussRat,
    to: &GaussRat,
) -> Result<Matrix<K>> {
    for b in [from, to] {
        if f.config().is_stokes_direction(b)? {
            return Err(Error::StokesDirection);
        }
    }
    let mut m = Matrix::identity(f.total_dim());
    for step in circuit(&f.config().stokes_directions(), from)? {
        match step {
            Some(z) => {
                if direction_cmp(&z, from)? == Ordering::Greater
                    && direction_cmp(&z, to)? == Ordering::Less
                    || direction_cmp(from, to)? == Ordering::Greater
                        && (direction_cmp(&z, from)? == Ordering::Greater
                            || direction_cmp(&z, to)? == Ordering::Less)
                {
                    m = &stokes_operator(f, &z, Sign::Minus)? * &m;
                }
            }
            None => {
                if direction_cmp(from, to)? == Ordering::Greater {
                    m = &f.total_monodromy() * &m;
                }
            }
        }
    }
    Ok(m)
}
