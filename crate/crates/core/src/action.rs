//! Diagonalizable groups `T^r x Z/m_1 x ... x Z/m_f` acting diagonally on
//! affine space, their stabilizers and Luna slices.
//!
//! A character is an integer vector of length `r + f`: the torus part
//! followed by one residue per finite factor. Coordinates are 0-based.

use serde::{Deserialize, Serialize};

use crate::lattice::{quotient_group, Class, FgAbelianGroup, IntMatrix};
use crate::polyhedral::cone_is_linear_subspace;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalizableAction {
    pub torus_rank: usize,
    pub finite_orders: Vec<i64>,
    pub weights: Vec<Vec<i64>>,
    pub bundle: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coordinate_degrees: Option<Vec<u32>>,
}

/// Character group of a stabilizer together with the restriction map from
/// `X(G)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizerDesc {
    pub group: FgAbelianGroup,
    pub dim: usize,
}

impl StabilizerDesc {
    pub fn new(group: FgAbelianGroup) -> Self {
        let dim = group.free_rank;
        StabilizerDesc { group, dim }
    }

    pub fn restrict(&self, chi: &[i64]) -> Class {
        self.group.class_of(chi)
    }

    pub fn is_finite(&self) -> bool {
        self.dim == 0
    }
}

impl DiagonalizableAction {
    /// Validates shapes and reduces residues.
    pub fn new(
        torus_rank: usize,
        finite_orders: Vec<i64>,
        weights: Vec<Vec<i64>>,
        bundle: Vec<Vec<i64>>,
    ) -> Result<Self> {
        if let Some(m) = finite_orders.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidInput(format!("finite order {m} must be at least 2")));
        }
        let len = torus_rank + finite_orders.len();
        let reduce = |what: &str, v: Vec<Vec<i64>>| -> Result<Vec<Vec<i64>>> {
            v.into_iter()
                .map(|mut c| {
                    if c.len() != len {
                        return Err(Error::InvalidInput(format!(
                            "{what} character {c:?} has length {}, expected {len}",
                            c.len()
                        )));
                    }
                    for (k, &m) in finite_orders.iter().enumerate() {
                        c[torus_rank + k] = c[torus_rank + k].rem_euclid(m);
                    }
                    Ok(c)
                })
                .collect()
        };
        let weights = reduce("weight", weights)?;
        let bundle = reduce("bundle", bundle)?;
        Ok(DiagonalizableAction { torus_rank, finite_orders, weights, bundle, coordinate_degrees: None })
    }

    /// Torus action with the given weight columns (one row per coordinate).
    pub fn torus(weights: Vec<Vec<i64>>, bundle: Vec<Vec<i64>>) -> Result<Self> {
        let r = weights.first().map_or(0, Vec::len);
        Self::new(r, vec![], weights, bundle)
    }

    /// Rank-one torus with integer weights and bundle characters.
    pub fn gm(weights: &[i64], bundle: &[i64]) -> Self {
        Self::new(1, vec![], weights.iter().map(|&w| vec![w]).collect(), bundle.iter().map(|&c| vec![c]).collect())
            .expect("rank-one data is well formed")
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn char_len(&self) -> usize {
        self.torus_rank + self.finite_orders.len()
    }

    pub fn torus_part(&self, i: usize) -> Vec<i64> {
        self.weights[i][..self.torus_rank].to_vec()
    }

    /// Coordinates on which the identity component of `G` acts trivially.
    pub fn w0(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.weights[i][..self.torus_rank].iter().all(|&x| x == 0)).collect()
    }

    /// Blowup grading: given degrees, or 1 on coordinates with nonzero torus
    /// weight and 0 elsewhere.
    pub fn degrees(&self) -> Vec<u32> {
        match &self.coordinate_degrees {
            Some(d) => d.clone(),
            None => {
                let w0 = self.w0();
                (0..self.dim()).map(|i| u32::from(!w0.contains(&i))).collect()
            }
        }
    }

    /// Relations `m_k e_{r+k}` presenting `X(G)` as a quotient of `Z^{r+f}`.
    pub fn finite_relations(&self) -> Vec<Vec<i64>> {
        let n = self.char_len();
        self.finite_orders
            .iter()
            .enumerate()
            .map(|(k, &m)| {
                let mut e = vec![0; n];
                e[self.torus_rank + k] = m;
                e
            })
            .collect()
    }

    /// `X(G) / <chars>`.
    pub fn quotient_by(&self, chars: &[Vec<i64>]) -> StabilizerDesc {
        let mut rows = self.finite_relations();
        rows.extend(chars.iter().cloned());
        StabilizerDesc::new(quotient_group(self.char_len(), &IntMatrix::from_rows(self.char_len(), &rows)))
    }

    /// Character group of the kernel of the action.
    pub fn kernel(&self) -> StabilizerDesc {
        self.quotient_by(&self.weights)
    }

    pub fn is_faithful(&self) -> bool {
        self.kernel().group.is_trivial()
    }

    /// Rebuilds an action of the group with character group `group`.
    pub fn from_group(group: &FgAbelianGroup, weights: Vec<Class>, bundle: Vec<Class>) -> Self {
        DiagonalizableAction {
            torus_rank: group.free_rank,
            finite_orders: group.invariant_factors.clone(),
            weights,
            bundle,
            coordinate_degrees: None,
        }
    }
}

/// Stabilizer of a point whose nonzero coordinates are `support`:
/// `X(G_x) = X(G) / <a_i : i in support>`.
pub fn stabilizer(action: &DiagonalizableAction, support: &[usize]) -> StabilizerDesc {
    let chars: Vec<Vec<i64>> = support.iter().map(|&i| action.weights[i].clone()).collect();
    action.quotient_by(&chars)
}

pub fn restrict_character(chi: &[i64], stab: &StabilizerDesc) -> Class {
    stab.restrict(chi)
}

/// Linearised slice at a point with closed orbit: the stabilizer acting on
/// the normal space to the orbit.
pub fn luna_slice(action: &DiagonalizableAction, support: &[usize]) -> Result<DiagonalizableAction> {
    luna_slice_localized(action, support, &[])
}

/// As [`luna_slice`], but for the point viewed in the open set where the
/// coordinates in `inverted` (a subset of the support) are invertible; the
/// orbit only has to be closed there.
pub fn luna_slice_localized(
    action: &DiagonalizableAction,
    support: &[usize],
    inverted: &[usize],
) -> Result<DiagonalizableAction> {
    if let Some(i) = inverted.iter().find(|i| !support.contains(i)) {
        return Err(Error::InvalidInput(format!("inverted coordinate {i} is not in the support")));
    }
    let mut gens: Vec<Vec<i64>> = support.iter().map(|&i| action.torus_part(i)).collect();
    gens.extend(inverted.iter().map(|&i| action.torus_part(i).iter().map(|x| -x).collect()));
    if !cone_is_linear_subspace(&gens) {
        return Err(Error::OrbitNotClosed(support.to_vec()));
    }
    let stab = stabilizer(action, support);
    let orbit_dim = action.torus_rank - stab.dim;
    let mut sorted = support.to_vec();
    sorted.sort_unstable();
    let drop: Vec<usize> = sorted
        .iter()
        .copied()
        .filter(|&i| stab.restrict(&action.weights[i]).iter().all(|&x| x == 0))
        .take(orbit_dim)
        .collect();
    let weights = (0..action.dim())
        .filter(|i| !drop.contains(i))
        .map(|i| stab.restrict(&action.weights[i]))
        .collect();
    let bundle = action.bundle.iter().map(|c| stab.restrict(c)).collect();
    Ok(DiagonalizableAction::from_group(&stab.group, weights, bundle))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counterexample() -> DiagonalizableAction {
        DiagonalizableAction::torus(
            vec![vec![-2, 1], vec![-1, 1], vec![1, 1], vec![2, 1]],
            vec![vec![0, 0], vec![1, 0], vec![2, 0]],
        )
        .unwrap()
    }

    #[test]
    fn empty_support_is_whole_group() {
        let a = counterexample();
        let s = stabilizer(&a, &[]);
        assert_eq!(s.dim, 2);
        assert!(s.group.invariant_factors.is_empty());
    }

    #[test]
    fn counterexample_stabilizer_is_z4() {
        let a = counterexample();
        let s = stabilizer(&a, &[0, 3]);
        assert_eq!(s.dim, 0);
        assert_eq!(s.group.invariant_factors, vec![4]);
        assert_eq!(s.restrict(&[-1, 1]), vec![1]);
        assert_eq!(s.restrict(&[1, 1]), vec![3]);
        assert_eq!(s.restrict(&[0, 0]), vec![0]);
    }

    #[test]
    fn conifold_point_stabilizer_trivial() {
        let a = DiagonalizableAction::gm(&[-1, -1, 1, 1], &[0, 1]);
        let s = stabilizer(&a, &[0, 2]);
        assert!(s.group.is_trivial());
        assert_eq!(s.restrict(&[1]), Vec::<i64>::new());
    }

    #[test]
    fn slices() {
        let a = counterexample();
        assert!(matches!(luna_slice(&a, &[0, 3]), Err(Error::OrbitNotClosed(_))));
        let s = luna_slice_localized(&a, &[0, 3], &[0, 3]).unwrap();
        assert_eq!(s.finite_orders, vec![4]);
        assert_eq!(s.weights, vec![vec![1], vec![3]]);
        assert_eq!(s.bundle, vec![vec![0], vec![1], vec![2]]);

        let c = DiagonalizableAction::gm(&[-1, -1, 1, 1], &[0, 1]);
        let s = luna_slice(&c, &[0, 2]).unwrap();
        assert_eq!(s.dim(), 3);
        assert_eq!(s.torus_rank, 0);
        assert!(s.bundle.iter().all(Vec::is_empty));
    }

    #[test]
    fn finite_factors_and_faithfulness() {
        let a = DiagonalizableAction::new(0, vec![2], vec![vec![3]], vec![vec![-1]]).unwrap();
        assert_eq!(a.weights, vec![vec![1]]);
        assert_eq!(a.bundle, vec![vec![1]]);
        assert!(a.is_faithful());
        let b = DiagonalizableAction::gm(&[-2, 2], &[0]);
        assert!(!b.is_faithful());
        assert_eq!(b.kernel().group.invariant_factors, vec![2]);
        assert!(DiagonalizableAction::new(1, vec![], vec![vec![1, 2]], vec![]).is_err());
    }

    #[test]
    fn w0_and_degrees() {
        let a = DiagonalizableAction::gm(&[0, 1, -1], &[0]);
        assert_eq!(a.w0(), vec![0]);
        assert_eq!(a.degrees(), vec![0, 1, 1]);
    }
}
