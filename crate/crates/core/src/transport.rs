//! Transports along straight paths with prescribed avoidance of collinear
//! intermediate points, and alien transports.
//!
//! All recursion happens between direction stalks. The primitive rule flips
//! one avoidance sign:
//!
//! `m^{.. - ..} = m^{.. + ..} + m_{c,b}^{after} H_c m_{a,c}^{before}`
//!
//! where `c` is the flipped intermediate point and `H_c` the clockwise
//! half-turn of `Phi_c` from `-zeta` to `zeta`.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::gauss::GaussRat;
use crate::geometry::Configuration;
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};
use crate::sheaf::{
    based_from_direction, upward, CircleLocalSystem, Frame, LocalizedPerv, PathKind, PathSpec,
    Sign, SignWord, Transports,
};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum AlienMethod {
    /// Sum over avoidance words with weights `|+|! |-|! / (r+1)!`.
    EcalleWeights,
    /// Sum over subsets of intermediate points with weights `1 / (s+1)`.
    SubsetSum,
}

type Key = (usize, usize, SignWord);

pub struct TransportEngine<'a, K> {
    config: &'a Configuration,
    phi: &'a [CircleLocalSystem<K>],
    plus: Transports<K>,
    cache: RefCell<HashMap<Key, Matrix<K>>>,
}

impl<'a, K: Scalar> TransportEngine<'a, K> {
    pub fn new(perv: &'a LocalizedPerv<K>) -> Self {
        Self::from_parts(perv.config(), perv.phis(), perv.direction_transports())
    }

    /// `plus` holds the all-plus transports between direction stalks.
    pub fn from_parts(
        config: &'a Configuration,
        phi: &'a [CircleLocalSystem<K>],
        plus: Transports<K>,
    ) -> Self {
        Self {
            config,
            phi,
            plus,
            cache: RefCell::new(HashMap::new()),
        }
    }

    pub fn set_plus(&mut self, i: usize, j: usize, m: Matrix<K>) {
        self.plus.insert((i, j), m);
        self.cache.get_mut().clear();
    }

    pub fn plus_table(&self) -> &Transports<K> {
        &self.plus
    }

    pub fn into_plus_table(self) -> Transports<K> {
        self.plus
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        let n = self.config.len();
        for k in [i, j] {
            if k >= n {
                return Err(Error::UnknownPoint(k.to_string()));
            }
        }
        if i == j {
            return Err(Error::DegenerateInterval);
        }
        Ok(())
    }

    pub fn intermediates(&self, i: usize, j: usize) -> Result<Vec<usize>> {
        self.check(i, j)?;
        self.config.intermediate_indices(i, j)
    }

    fn direction(&self, i: usize, j: usize) -> GaussRat {
        self.config.point(j) - self.config.point(i)
    }

    /// Junction at point `k` for a path heading along `i -> j`.
    pub fn junction(&self, k: usize, i: usize, j: usize) -> Matrix<K> {
        self.phi[k].junction(&self.direction(i, j))
    }

    pub fn to_based(&self, i: usize, j: usize, m: &Matrix<K>) -> Matrix<K> {
        based_from_direction(
            m,
            &self.phi[i],
            &self.phi[j],
            upward(self.config.point(i), self.config.point(j)),
        )
    }

    fn plus(&self, i: usize, j: usize) -> Matrix<K> {
        self.plus
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.phi[j].dim(), self.phi[i].dim()))
    }

    /// Transport between direction stalks along the path with avoidance word `word`.
    pub fn m_eps(&self, i: usize, j: usize, word: &SignWord) -> Result<Matrix<K>> {
        let inter = self.intermediates(i, j)?;
        if word.len() != inter.len() {
            return Err(Error::WordLength {
                expected: inter.len(),
                got: word.len(),
            });
        }
        Ok(self.m_eps_unchecked(i, j, &inter, word))
    }

    fn m_eps_unchecked(&self, i: usize, j: usize, inter: &[usize], word: &SignWord) -> Matrix<K> {
        let Some(p) = word.0.iter().rposition(|&s| s == Sign::Minus) else {
            return self.plus(i, j);
        };
        let key = (i, j, word.clone());
        if let Some(m) = self.cache.borrow().get(&key) {
            return m.clone();
        }
        let mut flipped = word.clone();
        flipped.0[p] = Sign::Plus;
        let m =
            &self.m_eps_unchecked(i, j, inter, &flipped) + &self.correction(i, j, inter, word, p);
        self.cache.borrow_mut().insert(key, m.clone());
        m
    }

    /// `m_{c,b}^{word after p} H_c m_{a,c}^{word before p}` for `c = inter[p]`.
    fn correction(
        &self,
        i: usize,
        j: usize,
        inter: &[usize],
        word: &SignWord,
        p: usize,
    ) -> Matrix<K> {
        let c = inter[p];
        let before = SignWord(word.0[..p].to_vec());
        let after = SignWord(word.0[p + 1..].to_vec());
        let left = self.m_eps_unchecked(i, c, &inter[..p], &before);
        let right = self.m_eps_unchecked(c, j, &inter[p + 1..], &after);
        &(&right * &self.junction(c, i, j)) * &left
    }

    /// Same transport, reached from the all-plus word by flipping the minus
    /// positions of `word` one at a time in the given order.
    pub fn m_eps_by_flips(
        &self,
        i: usize,
        j: usize,
        word: &SignWord,
        order: &[usize],
    ) -> Result<Matrix<K>> {
        let inter = self.intermediates(i, j)?;
        if word.len() != inter.len() {
            return Err(Error::WordLength {
                expected: inter.len(),
                got: word.len(),
            });
        }
        let mut minus: Vec<usize> = (0..word.len())
            .filter(|&k| word.0[k] == Sign::Minus)
            .collect();
        let mut sorted = order.to_vec();
        sorted.sort_unstable();
        minus.sort_unstable();
        if sorted != minus {
            return Err(Error::Shape(
                "flip order must list each minus position once".into(),
            ));
        }
        let mut current = SignWord::all(Sign::Plus, word.len());
        let mut m = self.plus(i, j);
        for &p in order {
            current.0[p] = Sign::Minus;
            m = &m + &self.correction(i, j, &inter, &current, p);
        }
        Ok(m)
    }

    /// `m_{c_s,b} H ... H m_{a,c_1}` through the chosen intermediate points,
    /// each leg all-plus.
    fn chain(&self, i: usize, j: usize, through: &[usize]) -> Matrix<K> {
        let mut stops = vec![i];
        stops.extend_from_slice(through);
        stops.push(j);
        let mut m = self.plus(stops[0], stops[1]);
        for w in stops.windows(3) {
            m = &(&self.plus(w[1], w[2]) * &self.junction(w[1], i, j)) * &m;
        }
        m
    }

    fn subsets(inter: &[usize]) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0u64..1 << inter.len()).map(move |bits| {
            inter
                .iter()
                .enumerate()
                .filter(|(k, _)| bits >> k & 1 == 1)
                .map(|(_, &c)| c)
                .collect()
        })
    }

    /// All-minus transport as a sum over chains of all-plus legs.
    pub fn m_minus_subset_sum(&self, i: usize, j: usize) -> Result<Matrix<K>> {
        let inter = self.intermediates(i, j)?;
        let mut acc = Matrix::zeros(self.phi[j].dim(), self.phi[i].dim());
        for s in Self::subsets(&inter) {
            acc = &acc + &self.chain(i, j, &s);
        }
        Ok(acc)
    }

    pub fn m_alien(&self, i: usize, j: usize, method: AlienMethod) -> Result<Matrix<K>> {
        let inter = self.intermediates(i, j)?;
        let r = inter.len();
        let mut acc = Matrix::zeros(self.phi[j].dim(), self.phi[i].dim());
        match method {
            AlienMethod::EcalleWeights => {
                for w in SignWord::enumerate(r) {
                    let coeff = ecalle_weight(w.count(Sign::Plus), w.count(Sign::Minus));
                    let m = self.m_eps_unchecked(i, j, &inter, &w);
                    acc = &acc + &m.scale(&K::from_rational(&coeff));
                }
            }
            AlienMethod::SubsetSum => {
                for s in Self::subsets(&inter) {
                    let coeff = K::ratio(1, s.len() as i64 + 1);
                    acc = &acc + &self.chain(i, j, &s).scale(&coeff);
                }
            }
        }
        Ok(acc)
    }

    /// `m^- = m^+ + sum_k m^+_{a_k,b} H_k m^-_{a,a_k}`, evaluated with the
    /// all-minus legs computed by the same rule.
    pub fn m_minus_by_last_stop(&self, i: usize, j: usize) -> Result<Matrix<K>> {
        let inter = self.intermediates(i, j)?;
        let mut acc = self.plus(i, j);
        for &c in &inter {
            let left = self.m_minus_by_last_stop(i, c)?;
            acc = &acc + &(&(&self.plus(c, j) * &self.junction(c, i, j)) * &left);
        }
        Ok(acc)
    }

    /// Both sides of the composition identity: the product of consecutive
    /// transports through every intermediate point, and the signed sum
    /// `sum_eps (-1)^{|+|} m^eps`.
    pub fn compose_chain(&self, i: usize, j: usize) -> Result<(Matrix<K>, Matrix<K>)> {
        let inter = self.intermediates(i, j)?;
        let lhs = self.chain(i, j, &inter);
        let mut rhs = Matrix::zeros(self.phi[j].dim(), self.phi[i].dim());
        for w in SignWord::enumerate(inter.len()) {
            let m = self.m_eps_unchecked(i, j, &inter, &w);
            rhs = if w.count(Sign::Plus) % 2 == 0 {
                &rhs + &m
            } else {
                &rhs - &m
            };
        }
        Ok((lhs, rhs))
    }
}

/// `p! m! / (p + m + 1)!`.
pub fn ecalle_weight(plus: usize, minus: usize) -> Rational {
    let fact = |n: usize| (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
    Rational::new(fact(plus) * fact(minus), fact(plus + minus + 1))
}

pub fn ecalle_coefficient(word: &SignWord) -> Rational {
    ecalle_weight(word.count(Sign::Plus), word.count(Sign::Minus))
}

/// `sum_k (-1)^k C(m,k) / (a+k+1) = m! a! / (m+a+1)!`.
pub fn beta_sum_check(a: u64, m: u64) -> bool {
    let mut binom = BigInt::one();
    let mut lhs = Rational::from_integer(0.into());
    for k in 0..=m {
        let term = Rational::new(binom.clone(), BigInt::from(a + k + 1));
        lhs = if k % 2 == 0 { lhs + term } else { lhs - term };
        binom = binom * BigInt::from(m - k) / BigInt::from(k + 1);
    }
    lhs == ecalle_weight(a as usize, m as usize)
}

/// Solves for all-plus transports pair by pair, in order of increasing
/// number of intermediate points, given a target `want(i, j)` in the
/// direction frame and a transport `known` that is affine in `m^+_ij` with
/// unit linear part once shorter pairs are fixed.
pub(crate) fn solve_plus<K: Scalar, W, T>(
    config: Configuration,
    phi: Vec<CircleLocalSystem<K>>,
    want: W,
    known: T,
) -> Result<LocalizedPerv<K>>
where
    W: Fn(&LocalizedPerv<K>, usize, usize) -> Result<Matrix<K>>,
    T: Fn(&TransportEngine<'_, K>, usize, usize) -> Result<Matrix<K>>,
{
    let skeleton = LocalizedPerv::new(config, phi, BTreeMap::new())?;
    let n = skeleton.len();
    let mut pairs: Vec<(usize, usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| (skeleton.intermediates(i, j).len(), i, j))
        .collect();
    pairs.sort_unstable();
    let mut engine =
        TransportEngine::from_parts(skeleton.config(), skeleton.phis(), BTreeMap::new());
    for (_, i, j) in pairs {
        let target = want(&skeleton, i, j)?;
        if target.shape() != (skeleton.dim(j), skeleton.dim(i)) {
            return Err(Error::Shape(format!("transport {i}->{j}")));
        }
        engine.set_plus(i, j, Matrix::zeros(skeleton.dim(j), skeleton.dim(i)));
        let rest = known(&engine, i, j)?;
        engine.set_plus(i, j, &target - &rest);
    }
    let plus = engine.into_plus_table();
    LocalizedPerv::from_direction_frame(skeleton.config().clone(), skeleton.phis().to_vec(), plus)
}

/// Recovers the all-plus transports from based alien transports.
pub fn alien_to_mplus<K: Scalar>(
    config: Configuration,
    phi: Vec<CircleLocalSystem<K>>,
    alien: &Transports<K>,
) -> Result<LocalizedPerv<K>> {
    solve_plus(
        config,
        phi,
        |s, i, j| {
            Ok(match alien.get(&(i, j)) {
                Some(b) => s.to_direction(i, j, b),
                None => Matrix::zeros(s.dim(j), s.dim(i)),
            })
        },
        |e, i, j| e.m_alien(i, j, AlienMethod::SubsetSum),
    )
}

/// Recovers the all-plus transports from all-minus ones given between direction stalks.
pub fn minus_to_mplus<K: Scalar>(
    config: Configuration,
    phi: Vec<CircleLocalSystem<K>>,
    minus: &Transports<K>,
) -> Result<LocalizedPerv<K>> {
    solve_plus(
        config,
        phi,
        |s, i, j| {
            Ok(minus
                .get(&(i, j))
                .cloned()
                .unwrap_or_else(|| Matrix::zeros(s.dim(j), s.dim(i))))
        },
        |e, i, j| e.m_minus_subset_sum(i, j),
    )
}

fn frame_out<K: Scalar>(
    e: &TransportEngine<'_, K>,
    i: usize,
    j: usize,
    m: Matrix<K>,
    frame: Frame,
) -> Matrix<K> {
    match frame {
        Frame::DirectionStalks => m,
        Frame::Based => e.to_based(i, j, &m),
    }
}

pub fn m_eps<K: Scalar>(
    f: &LocalizedPerv<K>,
    i: usize,
    j: usize,
    word: &SignWord,
    frame: Frame,
) -> Result<Matrix<K>> {
    let e = TransportEngine::new(f);
    let m = e.m_eps(i, j, word)?;
    Ok(frame_out(&e, i, j, m, frame))
}

pub fn m_plus<K: Scalar>(
    f: &LocalizedPerv<K>,
    i: usize,
    j: usize,
    frame: Frame,
) -> Result<Matrix<K>> {
    let r = TransportEngine::new(f).intermediates(i, j)?.len();
    m_eps(f, i, j, &SignWord::all(Sign::Plus, r), frame)
}

pub fn m_minus<K: Scalar>(
    f: &LocalizedPerv<K>,
    i: usize,
    j: usize,
    frame: Frame,
) -> Result<Matrix<K>> {
    let r = TransportEngine::new(f).intermediates(i, j)?.len();
    m_eps(f, i, j, &SignWord::all(Sign::Minus, r), frame)
}

pub fn m_alien<K: Scalar>(
    f: &LocalizedPerv<K>,
    i: usize,
    j: usize,
    method: AlienMethod,
    frame: Frame,
) -> Result<Matrix<K>> {
    let e = TransportEngine::new(f);
    let m = e.m_alien(i, j, method)?;
    Ok(frame_out(&e, i, j, m, frame))
}

/// Evaluates a path spec such as `0->2:+-` or `0->2:alien`. An empty word
/// stands for all-plus.
pub fn transport<K: Scalar>(
    f: &LocalizedPerv<K>,
    spec: &PathSpec,
    frame: Frame,
) -> Result<Matrix<K>> {
    match &spec.kind {
        PathKind::Alien => m_alien(f, spec.from, spec.to, AlienMethod::EcalleWeights, frame),
        PathKind::Word(w) if w.is_empty() => m_plus(f, spec.from, spec.to, frame),
        PathKind::Word(w) => m_eps(f, spec.from, spec.to, w, frame),
    }
}
