//! Stacky fans of the quotient stacks and their K0 ranks.
//!
//! The quotient lattice is `N = Z^{d+f} / L` where `L` is spanned by the
//! torus rows of the weight matrix and, for each finite factor `Z/m_k`, the
//! row `(a_{., r+k}, m_k e_k)`. Coordinate rays map to `b_i = beta(e_i)`,
//! written as free coordinates followed by torsion residues.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::lattice::{quotient_group, unimodular_transform, FgAbelianGroup, IntMatrix};
use crate::polyhedral::{in_relative_interior, star_subdivide as fan_star_subdivide, Cone, Fan};
use crate::tower::AmbientStage;
use crate::{Error, Exec, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeDesc {
    pub rank: usize,
    pub torsion: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StackyFan {
    pub lattice: LatticeDesc,
    /// Marked ray generators, sorted lexicographically, never primitivized.
    pub rays: Vec<Vec<i64>>,
    /// Cones as sorted index sets into `rays`.
    pub cones: Vec<Vec<usize>>,
}

/// The map `beta` from the coordinate lattice of a stage to `N`.
#[derive(Clone, Debug)]
pub struct QuotientMap {
    group: FgAbelianGroup,
    d: usize,
    f: usize,
}

impl QuotientMap {
    pub fn new(stage: &AmbientStage) -> Self {
        let a = &stage.action;
        let d = a.dim();
        let f = a.finite_orders.len();
        let mut rows = Vec::new();
        for t in 0..a.torus_rank {
            let mut row: Vec<i64> = (0..d).map(|i| a.weights[i][t]).collect();
            row.extend(std::iter::repeat(0).take(f));
            rows.push(row);
        }
        for (k, &m) in a.finite_orders.iter().enumerate() {
            let mut row: Vec<i64> = (0..d).map(|i| a.weights[i][a.torus_rank + k]).collect();
            row.extend((0..f).map(|j| if j == k { m } else { 0 }));
            rows.push(row);
        }
        let group = quotient_group(d + f, &IntMatrix::from_rows(d + f, &rows));
        QuotientMap { group, d, f }
    }

    pub fn lattice(&self) -> LatticeDesc {
        LatticeDesc { rank: self.group.free_rank, torsion: self.group.invariant_factors.clone() }
    }

    pub fn beta(&self, v: &[i64]) -> Vec<i64> {
        assert_eq!(v.len(), self.d);
        let mut x = v.to_vec();
        x.extend(std::iter::repeat(0).take(self.f));
        self.group.class_of(&x)
    }
}

impl StackyFan {
    /// Builds a fan from marked rays and cones given as lists of ray
    /// vectors; duplicates are merged and everything is put in canonical
    /// order.
    pub fn from_cone_vectors(lattice: LatticeDesc, cones: &[Vec<Vec<i64>>]) -> Self {
        let rays: Vec<Vec<i64>> = cones.iter().flatten().cloned().collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<&Vec<i64>, usize> = rays.iter().enumerate().map(|(i, r)| (r, i)).collect();
        let cones: BTreeSet<Vec<usize>> = cones
            .iter()
            .map(|c| {
                let mut ids: Vec<usize> = c.iter().map(|r| index[r]).collect();
                ids.sort_unstable();
                ids.dedup();
                ids
            })
            .collect();
        StackyFan { lattice, rays: rays.clone(), cones: cones.into_iter().collect() }
    }

    pub fn free_part(&self, i: usize) -> Vec<i64> {
        self.rays[i][..self.lattice.rank].to_vec()
    }

    pub fn maximal_cones(&self) -> Vec<Vec<usize>> {
        self.cones
            .iter()
            .filter(|c| !self.cones.iter().any(|o| o.len() > c.len() && c.iter().all(|x| o.contains(x))))
            .cloned()
            .collect()
    }

    /// Maximal cones as sorted lists of marking vectors; equal for fans
    /// that differ only in ray numbering.
    pub fn canonical(&self) -> BTreeSet<Vec<Vec<i64>>> {
        self.maximal_cones()
            .into_iter()
            .map(|c| {
                let mut v: Vec<Vec<i64>> = c.iter().map(|&i| self.rays[i].clone()).collect();
                v.sort();
                v
            })
            .collect()
    }

    pub fn same_as(&self, other: &StackyFan) -> bool {
        self.lattice == other.lattice && self.canonical() == other.canonical()
    }

    fn free_rank_of(&self, cone: &[usize]) -> usize {
        if cone.is_empty() {
            return 0;
        }
        let rows: Vec<Vec<i64>> = cone.iter().map(|&i| self.free_part(i)).collect();
        IntMatrix::from_rows(self.lattice.rank, &rows).rank()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("fan serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Kept cones of the stage whose strata have closed orbits.
pub fn closed_orbit_cones(stage: &AmbientStage, exec: Exec) -> Vec<Vec<usize>> {
    let kept = stage.kept_cones();
    let closed = exec.map(&kept, |c| stage.orbit_closed(c));
    kept.into_iter().zip(closed).filter(|(_, c)| *c).map(|(k, _)| k).collect()
}

pub fn quotient_stacky_fan(stage: &AmbientStage, exec: Exec) -> StackyFan {
    let map = QuotientMap::new(stage);
    let cones: Vec<Vec<Vec<i64>>> = closed_orbit_cones(stage, exec)
        .iter()
        .map(|c| c.iter().map(|&rho| map.beta(&stage.fan.rays[rho])).collect())
        .collect();
    StackyFan::from_cone_vectors(map.lattice(), &cones)
}

/// `N_sigma / <b_rho>`, the torsion of `N / <b_rho>`.
pub fn local_group(fan: &StackyFan, cone: &[usize]) -> Result<FgAbelianGroup> {
    let rank = fan.free_rank_of(cone);
    if rank < cone.len() {
        return Err(Error::DependentMarkings { dim: cone.len() - rank });
    }
    let n = fan.lattice.rank;
    let t = fan.lattice.torsion.len();
    let mut rows: Vec<Vec<i64>> = fan
        .lattice
        .torsion
        .iter()
        .enumerate()
        .map(|(k, &m)| {
            let mut e = vec![0; n + t];
            e[n + k] = m;
            e
        })
        .collect();
    rows.extend(cone.iter().map(|&i| fan.rays[i].clone()));
    Ok(quotient_group(n + t, &IntMatrix::from_rows(n + t, &rows)).torsion_part())
}

/// Number of box elements: the sum over maximal cones of the order of the
/// local group.
pub fn k0_rank(fan: &StackyFan) -> Result<u64> {
    let mut total = 0;
    for c in fan.maximal_cones() {
        let g = local_group(fan, &c).map_err(|_| Error::NotDM)?;
        total += g.order().expect("local groups are finite");
    }
    Ok(total)
}

/// Star subdivision of a stacky fan at the cone `target` with the given
/// marking for the new ray.
pub fn star_subdivide(fan: &StackyFan, target: &[usize], marking: &[i64]) -> Result<StackyFan> {
    let n = fan.lattice.rank;
    let free: Vec<Vec<i64>> = (0..fan.rays.len()).map(|i| fan.free_part(i)).collect();
    let target_rays: Vec<Vec<i64>> = target.iter().map(|&i| free[i].clone()).collect();
    if !in_relative_interior(&target_rays, &marking[..n]) {
        return Err(Error::RayNotInterior { ray: marking.to_vec(), cone: target.to_vec() });
    }
    let mut cones: BTreeMap<Vec<usize>, bool> = fan.cones.iter().map(|c| (c.clone(), true)).collect();
    cones.entry(target.to_vec()).or_insert(true);
    let pf = Fan { lattice_rank: n, rays: free, cones };
    let out = fan_star_subdivide(&pf, &Cone::new(n, target.to_vec()), &marking[..n])?;
    let mut markings = fan.rays.clone();
    markings.push(marking.to_vec());
    let cones: Vec<Vec<Vec<i64>>> =
        out.cones.keys().map(|c| c.iter().map(|&i| markings[i].clone()).collect()).collect();
    Ok(StackyFan::from_cone_vectors(fan.lattice.clone(), &cones))
}

/// Finds the index set of the cone with exactly these markings.
pub fn cone_index(fan: &StackyFan, markings: &[Vec<i64>]) -> Option<Vec<usize>> {
    let mut ids = Vec::new();
    for m in markings {
        ids.push(fan.rays.iter().position(|r| r == m)?);
    }
    ids.sort_unstable();
    ids.dedup();
    Some(ids)
}

/// Whether some automorphism of `Z^n` maps the maximal cones of `a` onto
/// those of `b` (torsion-free fans only).
pub fn lattice_equivalent(a: &StackyFan, b: &StackyFan) -> bool {
    if a.lattice != b.lattice || !a.lattice.torsion.is_empty() || a.rays.len() != b.rays.len() {
        return false;
    }
    let n = a.lattice.rank;
    let Some(basis) = independent_subset(&a.rays, n) else { return false };
    let ca = a.canonical();
    let cb = b.canonical();
    let mut chosen = Vec::new();
    try_assign(a, b, &basis, &mut chosen, &ca, &cb)
}

fn independent_subset(rays: &[Vec<i64>], n: usize) -> Option<Vec<usize>> {
    let mut picked: Vec<usize> = Vec::new();
    for i in 0..rays.len() {
        let mut rows: Vec<Vec<i64>> = picked.iter().map(|&j| rays[j].clone()).collect();
        rows.push(rays[i].clone());
        if IntMatrix::from_rows(n, &rows).rank() == rows.len() {
            picked.push(i);
        }
        if picked.len() == n {
            return Some(picked);
        }
    }
    None
}

fn try_assign(
    a: &StackyFan,
    b: &StackyFan,
    basis: &[usize],
    chosen: &mut Vec<usize>,
    ca: &BTreeSet<Vec<Vec<i64>>>,
    cb: &BTreeSet<Vec<Vec<i64>>>,
) -> bool {
    if chosen.len() == basis.len() {
        return match solve_map(a, b, basis, chosen) {
            Some(m) => {
                let image: BTreeSet<Vec<Vec<i64>>> = ca
                    .iter()
                    .map(|c| {
                        let mut v: Vec<Vec<i64>> = c.iter().map(|x| apply(&m, x)).collect();
                        v.sort();
                        v
                    })
                    .collect();
                &image == cb
            }
            None => false,
        };
    }
    for j in 0..b.rays.len() {
        if chosen.contains(&j) {
            continue;
        }
        chosen.push(j);
        if try_assign(a, b, basis, chosen, ca, cb) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn apply(m: &[Vec<i64>], x: &[i64]) -> Vec<i64> {
    m.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

fn solve_map(a: &StackyFan, b: &StackyFan, basis: &[usize], chosen: &[usize]) -> Option<Vec<Vec<i64>>> {
    let src: Vec<Vec<i64>> = basis.iter().map(|&i| a.rays[i].clone()).collect();
    let dst: Vec<Vec<i64>> = chosen.iter().map(|&j| b.rays[j].clone()).collect();
    unimodular_transform(&src, &dst)
}

/// Torsion-free stacky fan from explicit cones of marking vectors.
pub fn reference_fan(lattice_rank: usize, cones: &[&[&[i64]]]) -> StackyFan {
    let cones: Vec<Vec<Vec<i64>>> = cones.iter().map(|c| c.iter().map(|r| r.to_vec()).collect()).collect();
    StackyFan::from_cone_vectors(LatticeDesc { rank: lattice_rank, torsion: vec![] }, &cones)
}
