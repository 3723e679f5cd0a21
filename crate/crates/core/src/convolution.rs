//! Additive convolution. Vanishing cycles at a sum point are the direct sum
//! of tensor products over its splittings. Left-avoiding transports split
//! along parallel pairs of segments as tensor products; the stored
//! right-avoiding ones are recovered from them.

use std::collections::BTreeMap;

use crate::error::Result;
use crate::gauss::GaussRat;
use crate::geometry::Configuration;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::sheaf::{CircleLocalSystem, LocalizedPerv, Sign, SignWord, Transports};
use crate::transport::{minus_to_mplus, TransportEngine};

/// One summand `Phi_p(F) (x) Phi_q(G)` of a sum point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splitting {
    pub left: usize,
    pub right: usize,
    pub offset: usize,
    pub left_dim: usize,
    pub right_dim: usize,
}

impl Splitting {
    pub fn dim(&self) -> usize {
        self.left_dim * self.right_dim
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorIndex {
    pub point: GaussRat,
    pub splittings: Vec<Splitting>,
}

impl TensorIndex {
    pub fn dim(&self) -> usize {
        self.splittings.iter().map(Splitting::dim).sum()
    }
}

#[derive(Clone, Debug)]
pub struct Convolution<K> {
    pub perv: LocalizedPerv<K>,
    pub index: Vec<TensorIndex>,
}

fn sum_index<K: Scalar>(f: &LocalizedPerv<K>, g: &LocalizedPerv<K>) -> Vec<TensorIndex> {
    let mut index: Vec<TensorIndex> = Vec::new();
    for p in 0..f.len() {
        for q in 0..g.len() {
            let c = f.point(p) + g.point(q);
            let k = match index.iter().position(|t| t.point == c) {
                Some(k) => k,
                None => {
                    index.push(TensorIndex {
                        point: c,
                        splittings: Vec::new(),
                    });
                    index.len() - 1
                }
            };
            let t = &mut index[k];
            let offset = t.dim();
            t.splittings.push(Splitting {
                left: p,
                right: q,
                offset,
                left_dim: f.dim(p),
                right_dim: g.dim(q),
            });
        }
    }
    index
}

/// Leg of a split transport: a real transport when the factor moves, the
/// counterclockwise half-turn from `zeta` to `-zeta` when it stays put.
fn leg<K: Scalar>(
    e: &TransportEngine<'_, K>,
    f: &LocalizedPerv<K>,
    from: usize,
    to: usize,
    zeta: &GaussRat,
    sign: Sign,
) -> Option<Matrix<K>> {
    if from == to {
        return Some(f.phi(from).spectator(zeta));
    }
    let d = f.point(to) - f.point(from);
    if !zeta.same_ray(&d) {
        return None;
    }
    let r = f.intermediates(from, to).len();
    Some(
        e.m_eps(from, to, &SignWord::all(sign, r))
            .expect("valid pair"),
    )
}

/// Transport between direction stalks of the sum from point `c` to point
/// `d`, assembled from the factors.
pub fn split_transport<K: Scalar>(
    f: &LocalizedPerv<K>,
    g: &LocalizedPerv<K>,
    index: &[TensorIndex],
    c: usize,
    d: usize,
    sign: Sign,
) -> Matrix<K> {
    let (ef, eg) = (TransportEngine::new(f), TransportEngine::new(g));
    let zeta = &index[d].point - &index[c].point;
    let mut m = Matrix::zeros(index[d].dim(), index[c].dim());
    for s in &index[c].splittings {
        for t in &index[d].splittings {
            if let (Some(x), Some(y)) = (
                leg(&ef, f, s.left, t.left, &zeta, sign),
                leg(&eg, g, s.right, t.right, &zeta, sign),
            ) {
                m.set_block(t.offset, s.offset, &x.kron(&y));
            }
        }
    }
    m
}

pub fn convolve<K: Scalar>(f: &LocalizedPerv<K>, g: &LocalizedPerv<K>) -> Result<Convolution<K>> {
    let index = sum_index(f, g);
    let config = Configuration::new(index.iter().map(|t| t.point.clone()).collect())?;
    let phi = index
        .iter()
        .map(|t| {
            let blocks: Vec<Matrix<K>> = t
                .splittings
                .iter()
                .map(|s| f.phi(s.left).monodromy().kron(g.phi(s.right).monodromy()))
                .collect();
            CircleLocalSystem::new(Matrix::block_diag(&blocks))
        })
        .collect::<Result<Vec<_>>>()?;
    // Validates the configuration before any transport is computed.
    LocalizedPerv::new(config.clone(), phi.clone(), BTreeMap::new())?;
    let mut minus: Transports<K> = BTreeMap::new();
    for c in 0..index.len() {
        for d in 0..index.len() {
            if c != d {
                minus.insert((c, d), split_transport(f, g, &index, c, d, Sign::Minus));
            }
        }
    }
    let perv = minus_to_mplus(config, phi, &minus)?;
    Ok(Convolution { perv, index })
}

/// Permutation taking `(+)_c Phi_c(F*G)` to `((+)_p Phi_p) (x) ((+)_q Phi_q)`.
pub fn thom_sebastiani<K: Scalar>(
    f: &LocalizedPerv<K>,
    g: &LocalizedPerv<K>,
    index: &[TensorIndex],
) -> Matrix<K> {
    let (of, og) = (f.offsets(), g.offsets());
    let dg = g.total_dim();
    let n = f.total_dim() * dg;
    let mut pi = Matrix::zeros(n, n);
    let mut base = 0;
    for t in index {
        for s in &t.splittings {
            for i in 0..s.left_dim {
                for k in 0..s.right_dim {
                    let src = base + s.offset + i * s.right_dim + k;
                    let dst = (of[s.left] + i) * dg + og[s.right] + k;
                    pi[(dst, src)] = K::one();
                }
            }
        }
        base += t.dim();
    }
    pi
}

/// Conjugates an operator on `(+)_c Phi_c(F*G)` to the tensor product of
/// the factors' sums.
pub fn to_tensor_side<K: Scalar>(pi: &Matrix<K>, m: &Matrix<K>) -> Matrix<K> {
    &(pi * m) * &pi.transpose()
}

/// Canonical isomorphism `F*G -> G*F`.
#[derive(Clone, Debug)]
pub struct BraidIso<K> {
    /// Point `k` of `F*G` is point `perm[k]` of `G*F`.
    pub perm: Vec<usize>,
    /// Per point of `F*G`, the map `Phi_k(F*G) -> Phi_perm[k](G*F)`.
    pub blocks: Vec<Matrix<K>>,
}

impl<K: Scalar> BraidIso<K> {
    /// Transports the data of `F*G` along the isomorphism, in the point order of `G*F`.
    pub fn apply(&self, fg: &LocalizedPerv<K>) -> Result<LocalizedPerv<K>> {
        let n = self.perm.len();
        let mut inv = vec![0; n];
        for (k, &p) in self.perm.iter().enumerate() {
            inv[p] = k;
        }
        let config = Configuration::new(inv.iter().map(|&k| fg.point(k).clone()).collect())?;
        let phi = inv
            .iter()
            .map(|&k| {
                let b = &self.blocks[k];
                CircleLocalSystem::new(&(b * fg.phi(k).monodromy()) * &b.transpose())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut mplus = BTreeMap::new();
        for (a, &ka) in inv.iter().enumerate() {
            for (b, &kb) in inv.iter().enumerate() {
                if a != b {
                    let m = &(&self.blocks[kb] * fg.mplus(ka, kb)) * &self.blocks[ka].transpose();
                    mplus.insert((a, b), m);
                }
            }
        }
        LocalizedPerv::new(config, phi, mplus)
    }
}

pub fn braid_iso<K: Scalar>(fg: &[TensorIndex], gf: &[TensorIndex]) -> BraidIso<K> {
    let perm: Vec<usize> = fg
        .iter()
        .map(|t| {
            gf.iter()
                .position(|u| u.point == t.point)
                .expect("same point set")
        })
        .collect();
    let blocks = fg
        .iter()
        .zip(&perm)
        .map(|(t, &k)| {
            let u = &gf[k];
            let mut m = Matrix::zeros(u.dim(), t.dim());
            for s in &t.splittings {
                let w = u
                    .splittings
                    .iter()
                    .find(|w| w.left == s.right && w.right == s.left)
                    .expect("swapped splitting");
                for i in 0..s.left_dim {
                    for k in 0..s.right_dim {
                        m[(
                            w.offset + k * s.left_dim + i,
                            s.offset + i * s.right_dim + k,
                        )] = K::one();
                    }
                }
            }
            m
        })
        .collect();
    BraidIso { perm, blocks }
}
