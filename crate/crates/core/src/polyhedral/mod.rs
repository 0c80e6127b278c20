//! Rational polyhedral cones, exact feasibility tests and fans with star
//! subdivision.

pub mod lp;

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::lattice::{is_unimodular, IntMatrix};
use crate::Error;
use lp::{q, Feasibility, Q};

/// A cone of a fan, given by sorted indices into the fan's ray table.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Cone {
    pub ambient_dim: usize,
    pub ray_ids: Vec<usize>,
}

impl Cone {
    pub fn new(ambient_dim: usize, mut ray_ids: Vec<usize>) -> Self {
        ray_ids.sort_unstable();
        ray_ids.dedup();
        Cone { ambient_dim, ray_ids }
    }

    pub fn dim_hint(&self) -> usize {
        self.ray_ids.len()
    }

    pub fn contains_cone(&self, other: &Cone) -> bool {
        is_subset(&other.ray_ids, &self.ray_ids)
    }
}

pub(crate) fn is_subset(small: &[usize], big: &[usize]) -> bool {
    small.iter().all(|x| big.binary_search(x).is_ok())
}

fn qv(x: i64) -> Q {
    q(x)
}

/// True iff the cone spanned by `generators` is a linear subspace, i.e. the
/// origin lies in its relative interior. Decided by one exact LP: a strictly
/// positive combination of the generators vanishes.
pub fn cone_is_linear_subspace(generators: &[Vec<i64>]) -> bool {
    if generators.is_empty() {
        return true;
    }
    let dim = generators[0].len();
    let mut p = Feasibility::new();
    let lam = p.vars(generators.len(), false);
    for k in 0..dim {
        let terms: Vec<(usize, Q)> = lam.iter().zip(generators).map(|(&v, g)| (v, qv(g[k]))).collect();
        p.eq(&terms, Q::zero());
    }
    for &v in &lam {
        p.ge(&[(v, Q::one())], Q::one());
    }
    p.is_feasible()
}

/// Exact membership of `point` in the cone spanned by `generators`.
pub fn cone_contains(generators: &[Vec<i64>], point: &[i64]) -> bool {
    let pt: Vec<Q> = point.iter().map(|&x| qv(x)).collect();
    cone_contains_q(generators, &pt)
}

pub fn cone_contains_q(generators: &[Vec<i64>], point: &[Q]) -> bool {
    let dim = point.len();
    if generators.is_empty() {
        return point.iter().all(Zero::is_zero);
    }
    let mut p = Feasibility::new();
    let lam = p.vars(generators.len(), false);
    for k in 0..dim {
        let terms: Vec<(usize, Q)> = lam.iter().zip(generators).map(|(&v, g)| (v, qv(g[k]))).collect();
        p.eq(&terms, point[k].clone());
    }
    p.is_feasible()
}

/// Whether `point` lies in the relative interior of the cone spanned by
/// `generators` (which must be pointed).
pub fn in_relative_interior(generators: &[Vec<i64>], point: &[i64]) -> bool {
    let dim = point.len();
    let mut p = Feasibility::new();
    let lam = p.vars(generators.len(), false);
    let t = p.var(false);
    for k in 0..dim {
        let mut terms: Vec<(usize, Q)> = lam.iter().zip(generators).map(|(&v, g)| (v, qv(g[k]))).collect();
        terms.push((t, qv(-point[k])));
        p.eq(&terms, Q::zero());
    }
    for &v in &lam {
        p.ge(&[(v, Q::one())], Q::one());
    }
    p.ge(&[(t, Q::one())], Q::one());
    p.is_feasible()
}

/// Result of [`exists_strictly_positive_functional`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Functional {
    /// Empty generator set: any functional works; the zero vector is returned.
    Vacuous(Vec<i64>),
    /// Integer functional pairing to at least 1 with every generator.
    Witness(Vec<i64>),
}

impl Functional {
    pub fn vector(&self) -> &[i64] {
        match self {
            Functional::Vacuous(v) | Functional::Witness(v) => v,
        }
    }
}

/// Finds an integer functional `λ` with `⟨λ, g⟩ >= 1` for every generator.
///
/// `dim` is needed for the empty case.
pub fn exists_strictly_positive_functional(dim: usize, generators: &[Vec<i64>]) -> Option<Functional> {
    if generators.is_empty() {
        return Some(Functional::Vacuous(vec![0; dim]));
    }
    let mut p = Feasibility::new();
    let lam = p.vars(dim, true);
    for g in generators {
        let terms: Vec<(usize, Q)> = lam.iter().zip(g).map(|(&v, &c)| (v, qv(c))).collect();
        p.ge(&terms, Q::one());
    }
    let sol = p.solve()?;
    // clear denominators; the pairings only grow
    let den = sol.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let w: Vec<i64> = sol
        .iter()
        .map(|x| crate::lattice::big_to_i64(&(x.numer() * (&den / x.denom()))))
        .collect();
    Some(Functional::Witness(w))
}

/// Faces of the cone spanned by `rays` (indices into `rays`), including the
/// empty face and the cone itself.
pub fn cone_faces(rays: &[Vec<i64>]) -> Vec<Vec<usize>> {
    let k = rays.len();
    let independent = k == 0 || IntMatrix::from_rows(rays[0].len(), rays).rank() == k;
    let mut out = Vec::new();
    for mask in 0u64..(1u64 << k) {
        let subset: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        if independent || is_face(rays, &subset) {
            out.push(subset);
        }
    }
    out
}

/// Whether `subset` indexes a face: some functional vanishes on it and is
/// positive on every other ray.
pub fn is_face(rays: &[Vec<i64>], subset: &[usize]) -> bool {
    if rays.is_empty() {
        return true;
    }
    let dim = rays[0].len();
    let mut p = Feasibility::new();
    let u = p.vars(dim, true);
    for (i, r) in rays.iter().enumerate() {
        let terms: Vec<(usize, Q)> = u.iter().zip(r).map(|(&v, &c)| (v, qv(c))).collect();
        if subset.contains(&i) {
            p.eq(&terms, Q::zero());
        } else {
            p.ge(&terms, Q::one());
        }
    }
    p.is_feasible()
}

/// A fan: a shared ray table and a face-closed set of cones, each with a
/// flag recording whether its open stratum is kept.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    pub lattice_rank: usize,
    pub rays: Vec<Vec<i64>>,
    #[serde(with = "cone_list")]
    pub cones: BTreeMap<Vec<usize>, bool>,
}

/// JSON objects need string keys, so cones travel as `[ids, kept]` pairs.
mod cone_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &BTreeMap<Vec<usize>, bool>, s: S) -> Result<S::Ok, S::Error> {
        m.iter().collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Vec<usize>, bool>, D::Error> {
        Ok(Vec::<(Vec<usize>, bool)>::deserialize(d)?.into_iter().collect())
    }
}

impl Fan {
    /// Face lattice of the positive orthant in `Z^d`, all cones kept.
    pub fn orthant(d: usize) -> Fan {
        let rays = (0..d)
            .map(|i| {
                let mut e = vec![0; d];
                e[i] = 1;
                e
            })
            .collect();
        let mut cones = BTreeMap::new();
        for mask in 0u64..(1u64 << d) {
            let s: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
            cones.insert(s, true);
        }
        Fan { lattice_rank: d, rays, cones }
    }

    /// Fan consisting of one cone and all of its faces.
    pub fn from_cone(lattice_rank: usize, rays: Vec<Vec<i64>>) -> Fan {
        let faces = cone_faces(&rays);
        Fan { lattice_rank, rays, cones: faces.into_iter().map(|f| (f, true)).collect() }
    }

    pub fn cone_rays(&self, cone: &[usize]) -> Vec<Vec<i64>> {
        cone.iter().map(|&i| self.rays[i].clone()).collect()
    }

    pub fn contains(&self, cone: &[usize]) -> bool {
        self.cones.contains_key(cone)
    }

    pub fn is_kept(&self, cone: &[usize]) -> bool {
        self.cones.get(cone).copied().unwrap_or(false)
    }

    pub fn kept_cones(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.cones.iter().filter(|(_, &k)| k).map(|(c, _)| c)
    }

    /// Kept cones not properly contained in another kept cone.
    pub fn maximal_kept(&self) -> Vec<Vec<usize>> {
        let kept: Vec<&Vec<usize>> = self.kept_cones().collect();
        kept.iter()
            .filter(|c| !kept.iter().any(|o| o.len() > c.len() && is_subset(c, o)))
            .map(|c| (*c).clone())
            .collect()
    }

    /// All cones not properly contained in another cone.
    pub fn maximal_cones(&self) -> Vec<Vec<usize>> {
        let all: Vec<&Vec<usize>> = self.cones.keys().collect();
        all.iter()
            .filter(|c| !all.iter().any(|o| o.len() > c.len() && is_subset(c, o)))
            .map(|c| (*c).clone())
            .collect()
    }

    pub fn is_unimodular_cone(&self, cone: &[usize]) -> bool {
        let rays = self.cone_rays(cone);
        rays.is_empty() || is_unimodular(&IntMatrix::from_rows(self.lattice_rank, &rays))
    }

    /// Whether a point lies in the support of the fan.
    pub fn support_contains(&self, point: &[Q]) -> bool {
        self.maximal_cones().iter().any(|c| cone_contains_q(&self.cone_rays(c), point))
    }
}

/// Star subdivision of `fan` at `new_ray`, which must lie in the relative
/// interior of `target`. Every cone containing `target` is replaced by the
/// joins of its faces not containing `target` with the new ray.
///
/// A new cone is kept iff it lies in some kept cone of the original fan.
pub fn star_subdivide(fan: &Fan, target: &Cone, new_ray: &[i64]) -> Result<Fan, Error> {
    if !fan.contains(&target.ray_ids) {
        return Err(Error::InvalidInput(format!("cone {:?} is not in the fan", target.ray_ids)));
    }
    if !in_relative_interior(&fan.cone_rays(&target.ray_ids), new_ray) {
        return Err(Error::RayNotInterior { ray: new_ray.to_vec(), cone: target.ray_ids.clone() });
    }
    let v = fan.rays.len();
    let mut rays = fan.rays.clone();
    rays.push(new_ray.to_vec());

    let mut cones: BTreeMap<Vec<usize>, bool> = BTreeMap::new();
    let mut star = Vec::new();
    for (c, &kept) in &fan.cones {
        if is_subset(&target.ray_ids, c) {
            star.push((c.clone(), kept));
        } else {
            cones.insert(c.clone(), kept);
        }
    }
    let mut joined: BTreeSet<Vec<usize>> = BTreeSet::new();
    for (c, _) in &star {
        let crays = fan.cone_rays(c);
        for face in cone_faces(&crays) {
            let face: Vec<usize> = face.iter().map(|&i| c[i]).collect();
            if is_subset(&target.ray_ids, &face) {
                continue;
            }
            let mut j = face.clone();
            j.push(v);
            joined.insert(j);
        }
    }
    for j in joined {
        let base: Vec<usize> = j.iter().copied().filter(|&i| i != v).collect();
        let kept = star
            .iter()
            .any(|(c, k)| *k && is_subset(&base, c));
        cones.insert(j, kept);
    }
    Ok(Fan { lattice_rank: fan.lattice_rank, rays, cones })
}

/// Rational sample point used by support tests: `Σ c_i r_i` with the given
/// nonnegative weights.
pub fn combination(rays: &[Vec<i64>], weights: &[i64]) -> Vec<Q> {
    let dim = rays.first().map_or(0, Vec::len);
    let mut out = vec![Q::zero(); dim];
    for (r, &w) in rays.iter().zip(weights) {
        for k in 0..dim {
            out[k] += qv(r[k] * w);
        }
    }
    out
}
