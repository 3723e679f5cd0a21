//! Presentation by one nearby-cycle space `Psi` with maps `u_i: Phi_i -> Psi`
//! and `v_i: Psi -> Phi_i`. For points in convex position the paths to a
//! far basepoint are isotopic to straight segments, so transports are
//! `m_ij = v_j u_i` and `T_i = Id - v_i u_i`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geometry::Configuration;
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::sheaf::{CircleLocalSystem, LocalizedPerv};

#[derive(Clone, Debug, PartialEq)]
pub struct GmvQData<K> {
    psi: usize,
    u: Vec<Matrix<K>>,
    v: Vec<Matrix<K>>,
}

impl<K: Scalar> GmvQData<K> {
    pub fn new(psi: usize, u: Vec<Matrix<K>>, v: Vec<Matrix<K>>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::Shape(format!(
                "{} maps u, {} maps v",
                u.len(),
                v.len()
            )));
        }
        for (i, (ui, vi)) in u.iter().zip(&v).enumerate() {
            if ui.rows() != psi || vi.cols() != psi || ui.cols() != vi.rows() {
                return Err(Error::Shape(format!("maps at slot {i}")));
            }
            (&Matrix::identity(ui.cols()) - &(vi * ui)).inverse()?;
        }
        Ok(Self { psi, u, v })
    }

    pub fn psi(&self) -> usize {
        self.psi
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn phi_dims(&self) -> Vec<usize> {
        self.u.iter().map(Matrix::cols).collect()
    }

    pub fn u(&self, i: usize) -> &Matrix<K> {
        &self.u[i]
    }

    pub fn v(&self, i: usize) -> &Matrix<K> {
        &self.v[i]
    }

    /// `Id - v_i u_i`.
    pub fn phi_monodromy(&self, i: usize) -> Matrix<K> {
        &Matrix::identity(self.u[i].cols()) - &(&self.v[i] * &self.u[i])
    }

    /// `Id - u_i v_i`.
    pub fn psi_monodromy(&self, i: usize) -> Matrix<K> {
        &Matrix::identity(self.psi) - &(&self.u[i] * &self.v[i])
    }

    /// `det(Id - v_i u_i) = det(Id - u_i v_i)` for every slot.
    pub fn sylvester_holds(&self) -> bool {
        (0..self.len()).all(
            |i| match (self.phi_monodromy(i).det(), self.psi_monodromy(i).det()) {
                (Ok(a), Ok(b)) => a.near(&b),
                _ => false,
            },
        )
    }

    /// Product of the `Id - u_i v_i`, slot 0 applied first.
    pub fn total_psi_monodromy(&self) -> Matrix<K> {
        (0..self.len()).fold(Matrix::identity(self.psi), |acc, i| {
            &self.psi_monodromy(i) * &acc
        })
    }
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n
        || order
            .iter()
            .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
    {
        return Err(Error::Shape("spider order is not a permutation".into()));
    }
    Ok(())
}

/// Slot `k` holds point `order[k]`. Transports are the based ones.
pub fn to_gmv<K: Scalar>(f: &LocalizedPerv<K>, order: &[usize]) -> Result<GmvQData<K>> {
    check_permutation(order, f.len())?;
    if !f.config().is_convex_position() {
        return Err(Error::NotConvex);
    }
    let dims: Vec<usize> = order.iter().map(|&p| f.dim(p)).collect();
    let psi: usize = dims.iter().sum();
    let offsets: Vec<usize> = dims
        .iter()
        .scan(0, |acc, d| Some(std::mem::replace(acc, *acc + d)))
        .collect();
    let mut u = Vec::with_capacity(order.len());
    let mut v = Vec::with_capacity(order.len());
    for (k, &pk) in order.iter().enumerate() {
        let mut uk = Matrix::zeros(psi, dims[k]);
        uk.set_block(offsets[k], 0, &Matrix::identity(dims[k]));
        u.push(uk);
        let mut vk = Matrix::zeros(dims[k], psi);
        for (l, &pl) in order.iter().enumerate() {
            let block = if l == k {
                &Matrix::identity(dims[k]) - f.phi(pk).monodromy()
            } else {
                f.mplus(pl, pk).clone()
            };
            vk.set_block(0, offsets[l], &block);
        }
        v.push(vk);
    }
    GmvQData::new(psi, u, v)
}

/// Reads `m_ij = v_j u_i` back; slot `k` is placed at `positions[order[k]]`.
pub fn from_gmv<K: Scalar>(
    q: &GmvQData<K>,
    positions: &Configuration,
    order: &[usize],
) -> Result<LocalizedPerv<K>> {
    check_permutation(order, q.len())?;
    if positions.len() != q.len() {
        return Err(Error::Shape(format!(
            "{} positions for {} slots",
            positions.len(),
            q.len()
        )));
    }
    if !positions.is_convex_position() {
        return Err(Error::NotConvex);
    }
    let mut slot = vec![0; q.len()];
    for (k, &p) in order.iter().enumerate() {
        slot[p] = k;
    }
    let phi = slot
        .iter()
        .map(|&k| CircleLocalSystem::new(q.phi_monodromy(k)))
        .collect::<Result<Vec<_>>>()?;
    let mut mplus = BTreeMap::new();
    for (i, &ki) in slot.iter().enumerate() {
        for (j, &kj) in slot.iter().enumerate() {
            if i != j {
                mplus.insert((i, j), q.v(kj) * q.u(ki));
            }
        }
    }
    LocalizedPerv::new(positions.clone(), phi, mplus)
}
