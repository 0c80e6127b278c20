//! Reichstein transforms of a torus representation, modelled on a fan in
//! the coordinate lattice `Z^d`.
//!
//! A stage is a smooth toric variety over the orthant together with the
//! set of torus strata that survive the removals. The group acts through
//! the weight map `A: Z^d -> X(G)`; the stratum of a cone `s` has
//! stabilizer with character group `X(G) / A(s^perp)`.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::action::{DiagonalizableAction, StabilizerDesc};
use crate::git::{unstable_codim, ExtNat};
use crate::lattice::{big_to_i64, extend_to_basis, kernel_basis, Class, IntMatrix};
use crate::polyhedral::lp::{q, Feasibility, Q};
use crate::polyhedral::{exists_strictly_positive_functional, is_subset, star_subdivide, Cone, Fan};
use crate::{Error, Exec, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmbientStage {
    pub action: DiagonalizableAction,
    pub fan: Fan,
    /// `(ray id, step)` for every exceptional ray, steps counted from 1.
    pub exceptional_rays: Vec<(usize, usize)>,
    /// For each exceptional ray, the rays of the center it subdivides.
    pub center_of_ray: BTreeMap<usize, Vec<usize>>,
    pub step_index: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterDesc {
    pub cone: Vec<usize>,
    pub codim: usize,
    pub stabilizer: StabilizerDesc,
    pub center_is_point: bool,
    pub center_ray: Vec<i64>,
    /// Classes in the stabilizer's character group of the normal coordinates.
    pub local_weights: Vec<Class>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub mu: usize,
    pub centers: Vec<CenterDesc>,
    pub new_rays: Vec<usize>,
    pub descent_period: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionLog {
    pub stages: Vec<AmbientStage>,
    pub steps: Vec<StepRecord>,
    pub final_is_dm: bool,
}

impl ResolutionLog {
    pub fn final_stage(&self) -> &AmbientStage {
        self.stages.last().expect("log has a stage")
    }

    pub fn mu_sequence(&self) -> Vec<usize> {
        self.stages.iter().map(AmbientStage::mu).collect()
    }
}

impl AmbientStage {
    /// Stage 0: the orthant with every stratum present.
    pub fn initial(action: &DiagonalizableAction) -> Self {
        AmbientStage {
            action: action.clone(),
            fan: Fan::orthant(action.dim()),
            exceptional_rays: vec![],
            center_of_ray: BTreeMap::new(),
            step_index: 0,
        }
    }

    pub fn d(&self) -> usize {
        self.action.dim()
    }

    /// `A m = sum_i m_i a_i` in `Z^{r+f}`.
    pub fn weight_of(&self, m: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.action.char_len()];
        for (mi, a) in m.iter().zip(&self.action.weights) {
            for (o, ai) in out.iter_mut().zip(a) {
                *o += mi * ai;
            }
        }
        out
    }

    /// Lattice basis of `s^perp` in `Z^d`.
    pub fn perp_basis(&self, cone: &[usize]) -> Vec<Vec<i64>> {
        let d = self.d();
        if cone.is_empty() {
            return IntMatrix::identity(d).to_i64_rows();
        }
        kernel_basis(&IntMatrix::from_rows(d, &self.fan.cone_rays(cone))).to_i64_rows()
    }

    pub fn stratum_stabilizer(&self, cone: &[usize]) -> StabilizerDesc {
        let chars: Vec<Vec<i64>> = self.perp_basis(cone).iter().map(|m| self.weight_of(m)).collect();
        self.action.quotient_by(&chars)
    }

    pub fn stratum_stabilizer_dim(&self, cone: &[usize]) -> usize {
        self.stratum_stabilizer(cone).dim
    }

    /// Dual basis `m_rho` (in cone order) of a unimodular cone.
    pub fn dual_basis(&self, cone: &[usize]) -> Result<Vec<Vec<i64>>> {
        let d = self.d();
        if cone.is_empty() {
            return Ok(vec![]);
        }
        let rays = IntMatrix::from_rows(d, &self.fan.cone_rays(cone));
        let basis = extend_to_basis(&rays)
            .ok_or_else(|| Error::Assertion(format!("cone {cone:?} is not unimodular")))?;
        let inv = basis.inverse_unimodular().expect("basis is unimodular");
        Ok((0..cone.len()).map(|j| inv.col_vec(j).iter().map(big_to_i64).collect()).collect())
    }

    /// Characters by which the stratum stabilizer acts on the normal
    /// coordinates of the chart of `cone`.
    pub fn local_weights(&self, cone: &[usize], stab: &StabilizerDesc) -> Result<Vec<Class>> {
        Ok(self.dual_basis(cone)?.iter().map(|m| stab.restrict(&self.weight_of(m))).collect())
    }

    /// The linear model of the stage near a point of the stratum of `cone`.
    pub fn local_model(&self, cone: &[usize]) -> Result<DiagonalizableAction> {
        let stab = self.stratum_stabilizer(cone);
        let w = self.local_weights(cone, &stab)?;
        Ok(DiagonalizableAction::from_group(&stab.group, w, vec![]))
    }

    pub fn kept_cones(&self) -> Vec<Vec<usize>> {
        self.fan.kept_cones().cloned().collect()
    }

    pub fn mu(&self) -> usize {
        self.fan.kept_cones().map(|c| self.stratum_stabilizer_dim(c)).max().unwrap_or(0)
    }

    /// Whether the orbits in the stratum of `cone` are closed in the stage:
    /// no one-parameter subgroup has a limit in a smaller kept stratum.
    pub fn orbit_closed(&self, cone: &[usize]) -> bool {
        let maximal: Vec<Vec<usize>> = self
            .fan
            .maximal_kept()
            .into_iter()
            .filter(|m| m.len() > cone.len() && is_subset(cone, m))
            .collect();
        !maximal.iter().any(|big| self.limit_lands(cone, big, false))
    }

    /// LP: a one-parameter subgroup pushes points of the stratum of `tau`
    /// into the chart of `big`, landing in a stratum strictly below `tau`
    /// (`exact = false`) or exactly in the stratum of `big` (`exact = true`).
    fn limit_lands(&self, tau: &[usize], big: &[usize], exact: bool) -> bool {
        let r = self.action.torus_rank;
        let d = self.d();
        let mut p = Feasibility::new();
        let lam = p.vars(r, true);
        let cs: Vec<(usize, usize)> = big.iter().map(|&rho| (rho, p.var(tau.contains(&rho)))).collect();
        for k in 0..d {
            let mut terms: Vec<(usize, Q)> =
                lam.iter().enumerate().map(|(i, &v)| (v, q(self.action.weights[k][i]))).collect();
            for &(rho, c) in &cs {
                let x = self.fan.rays[rho][k];
                if x != 0 {
                    terms.push((c, q(-x)));
                }
            }
            p.eq(&terms, Q::from_integer(0.into()));
        }
        let outside: Vec<usize> = cs.iter().filter(|(rho, _)| !tau.contains(rho)).map(|&(_, c)| c).collect();
        if exact {
            for &c in &outside {
                p.ge(&[(c, Q::one())], Q::one());
            }
        } else {
            if outside.is_empty() {
                return false;
            }
            let terms: Vec<(usize, Q)> = outside.iter().map(|&c| (c, Q::one())).collect();
            p.ge(&terms, Q::one());
        }
        p.is_feasible()
    }

    pub fn is_stable(&self, cone: &[usize]) -> bool {
        self.stratum_stabilizer_dim(cone) == 0 && self.orbit_closed(cone)
    }

    /// Codimension of the unstable locus of the stage.
    pub fn unstable_codim(&self, exec: Exec) -> ExtNat {
        let kept = self.kept_cones();
        let flags = exec.map(&kept, |c| self.is_stable(c));
        kept.iter()
            .zip(flags)
            .filter(|(_, s)| !s)
            .map(|(c, _)| c.len())
            .min()
            .map_or(ExtNat::Infinite, ExtNat::Finite)
    }

    pub fn has_stable_point(&self, exec: Exec) -> bool {
        let kept = self.kept_cones();
        exec.map(&kept, |c| self.is_stable(c)).into_iter().any(|s| s)
    }

    /// (H2) checked in the linear model of every kept stratum with closed
    /// orbits.
    pub fn chart_local_h2(&self, exec: Exec) -> Result<bool> {
        let kept = self.kept_cones();
        let verdicts = exec.map(&kept, |c| -> Result<bool> {
            if !self.orbit_closed(c) {
                return Ok(true);
            }
            let model = self.local_model(c)?;
            Ok(unstable_codim(&model, Exec::Sequential)? >= ExtNat::Finite(2))
        });
        verdicts.into_iter().try_fold(true, |acc, v| Ok(acc && v?))
    }

    /// Coefficients of the pullback of the exceptional divisor of ray `e`
    /// on every ray of the current fan.
    pub fn divisor_coefficients(&self, e: usize) -> Vec<i64> {
        let mut coef = vec![0i64; self.fan.rays.len()];
        coef[e] = 1;
        for (&v, center) in &self.center_of_ray {
            if v > e {
                coef[v] = center.iter().map(|&rho| coef[rho]).sum();
            }
        }
        coef
    }

    /// Character of the stabilizer of the stratum of `cone` on the fibre of
    /// the pulled-back exceptional divisor `e`.
    pub fn twist_class(&self, e: usize, cone: &[usize], stab: &StabilizerDesc) -> Result<Class> {
        let coef = self.divisor_coefficients(e);
        let dual = self.dual_basis(cone)?;
        let mut m = vec![0i64; self.d()];
        for (rho, mr) in cone.iter().zip(&dual) {
            for (x, y) in m.iter_mut().zip(mr) {
                *x += coef[*rho] * y;
            }
        }
        Ok(stab.restrict(&self.weight_of(&m)))
    }

    /// Character on the fibre of the pulled-back exceptional divisor of
    /// `step` (the sum over that step's exceptional rays).
    pub fn step_twist_class(&self, step: usize, cone: &[usize], stab: &StabilizerDesc) -> Result<Class> {
        let mut acc = stab.group.zero();
        for e in self.exceptional_of_step(step) {
            acc = stab.group.add(&acc, &self.twist_class(e, cone, stab)?);
        }
        Ok(acc)
    }

    /// Exceptional ray introduced at `step`.
    pub fn exceptional_of_step(&self, step: usize) -> Vec<usize> {
        self.exceptional_rays.iter().filter(|(_, s)| *s == step).map(|(r, _)| *r).collect()
    }
}

/// Minimal kept cones of maximal stabilizer dimension.
pub fn max_stab_centers(stage: &AmbientStage) -> Result<Vec<CenterDesc>> {
    let kept = stage.kept_cones();
    let dims: Vec<usize> = kept.iter().map(|c| stage.stratum_stabilizer_dim(c)).collect();
    let mu = dims.iter().copied().max().unwrap_or(0);
    if mu == 0 {
        return Err(Error::AlreadyDM);
    }
    let attaining: Vec<&Vec<usize>> = kept.iter().zip(&dims).filter(|(_, &m)| m == mu).map(|(c, _)| c).collect();
    let minimal: Vec<Vec<usize>> = attaining
        .iter()
        .filter(|c| !attaining.iter().any(|o| o.len() < c.len() && is_subset(o, c)))
        .map(|c| (*c).clone())
        .collect();
    let maximal = stage.fan.maximal_kept();
    for (a, s1) in minimal.iter().enumerate() {
        for s2 in &minimal[a + 1..] {
            let mut u = s1.clone();
            u.extend(s2);
            u.sort_unstable();
            u.dedup();
            if maximal.iter().any(|m| is_subset(&u, m)) {
                return Err(Error::Assertion(format!("centers {s1:?} and {s2:?} meet")));
            }
        }
    }
    let d = stage.d();
    let r = stage.action.torus_rank;
    minimal
        .into_iter()
        .map(|cone| {
            let stab = stage.stratum_stabilizer(&cone);
            let local = stage.local_weights(&cone, &stab)?;
            let w1: Vec<usize> = cone
                .iter()
                .zip(&local)
                .filter(|(_, w)| w[..stab.dim].iter().any(|&x| x != 0))
                .map(|(&rho, _)| rho)
                .collect();
            if w1 != cone {
                return Err(Error::Assertion(format!("center {cone:?} has rays fixed by the stabilizer torus")));
            }
            let mut v = vec![0i64; d];
            for &rho in &w1 {
                for (x, y) in v.iter_mut().zip(&stage.fan.rays[rho]) {
                    *x += y;
                }
            }
            Ok(CenterDesc {
                codim: cone.len(),
                center_is_point: d - cone.len() == r - mu,
                center_ray: v,
                local_weights: local,
                stabilizer: stab,
                cone,
            })
        })
        .collect()
}

/// One Reichstein transform: blow up the centers and delete the strict
/// transform of the saturation of the center.
pub fn reichstein_step(stage: &AmbientStage, exec: Exec) -> Result<(AmbientStage, StepRecord)> {
    let mu = stage.mu();
    let centers = max_stab_centers(stage)?;
    let d = stage.d();
    let mut fan = stage.fan.clone();
    let mut new_rays = Vec::new();
    for c in &centers {
        fan = star_subdivide(&fan, &Cone::new(d, c.cone.clone()), &c.center_ray)?;
        new_rays.push(fan.rays.len() - 1);
    }
    let old_maximal = stage.fan.maximal_kept();
    let candidates: Vec<Vec<usize>> = fan.kept_cones().cloned().collect();
    let removed = exec.map(&candidates, |kappa| -> bool {
        let expanded: Vec<usize> = {
            let mut e: Vec<usize> = kappa.iter().copied().filter(|x| !new_rays.contains(x)).collect();
            for (c, v) in centers.iter().zip(&new_rays) {
                if kappa.contains(v) {
                    e.extend(&c.cone);
                }
            }
            e.sort_unstable();
            e.dedup();
            e
        };
        centers.iter().any(|c| {
            let mut u = expanded.clone();
            u.extend(&c.cone);
            u.sort_unstable();
            u.dedup();
            if !old_maximal.iter().any(|m| is_subset(&u, m)) {
                return false;
            }
            let gens: Vec<Vec<i64>> = c
                .cone
                .iter()
                .zip(&c.local_weights)
                .filter(|(rho, _)| !kappa.contains(rho))
                .map(|(_, w)| w[..c.stabilizer.dim].to_vec())
                .collect();
            exists_strictly_positive_functional(c.stabilizer.dim, &gens).is_some()
        })
    });
    for (kappa, gone) in candidates.iter().zip(removed) {
        if gone {
            fan.cones.insert(kappa.clone(), false);
        }
    }
    let step = stage.step_index + 1;
    let mut next = AmbientStage {
        action: stage.action.clone(),
        fan,
        exceptional_rays: stage.exceptional_rays.clone(),
        center_of_ray: stage.center_of_ray.clone(),
        step_index: step,
    };
    for (c, &v) in centers.iter().zip(&new_rays) {
        next.exceptional_rays.push((v, step));
        next.center_of_ray.insert(v, c.cone.clone());
    }
    check_stage_shape(&next)?;
    if !next.has_stable_point(exec) {
        return Err(Error::HypothesisViolation("H1: no stable points after the transform".into()));
    }
    let n = descent_period(&next, &new_rays)?;
    Ok((next, StepRecord { step, mu, centers, new_rays, descent_period: n }))
}

/// Kept cones form a subfan of unimodular cones.
fn check_stage_shape(stage: &AmbientStage) -> Result<()> {
    for (c, &k) in &stage.fan.cones {
        if !k {
            continue;
        }
        if !stage.fan.is_unimodular_cone(c) {
            return Err(Error::Assertion(format!("kept cone {c:?} is not unimodular")));
        }
        for i in 0..c.len() {
            let mut face = c.clone();
            face.remove(i);
            if !stage.fan.is_kept(&face) {
                return Err(Error::Assertion(format!("face {face:?} of kept cone {c:?} was removed")));
            }
        }
    }
    Ok(())
}

/// Smallest `N` such that `N` times the new exceptional divisor descends:
/// the lcm over kept closed-orbit strata on the divisor of the order of
/// the stabilizer character on its fibre.
pub fn descent_period(stage: &AmbientStage, new_rays: &[usize]) -> Result<u64> {
    let mut n: u64 = 1;
    for cone in stage.fan.kept_cones() {
        let Some(&v) = cone.iter().find(|x| new_rays.contains(x)) else { continue };
        if !stage.orbit_closed(cone) {
            continue;
        }
        let stab = stage.stratum_stabilizer(cone);
        let pos = cone.iter().position(|&x| x == v).expect("ray in cone");
        let m = &stage.dual_basis(cone)?[pos];
        let class = stab.restrict(&stage.weight_of(m));
        let ord = stab.group.element_order(&class).ok_or_else(|| {
            Error::Assertion(format!("exceptional fibre character has infinite order on cone {cone:?}"))
        })?;
        n = n.lcm(&ord);
    }
    Ok(n)
}

/// Iterates Reichstein transforms until every stabilizer is finite.
pub fn kirwan_resolve(action: &DiagonalizableAction, exec: Exec) -> Result<ResolutionLog> {
    let stage = AmbientStage::initial(action);
    if !stage.has_stable_point(exec) {
        return Err(Error::HypothesisViolation("H1: no stable points".into()));
    }
    let mut stages = vec![stage];
    let mut steps = Vec::new();
    let mut mu = stages[0].mu();
    while mu > 0 {
        if steps.len() >= action.torus_rank {
            return Err(Error::Assertion("tower did not terminate within the torus rank".into()));
        }
        let (next, rec) = reichstein_step(stages.last().expect("stage"), exec)?;
        let next_mu = next.mu();
        if next_mu >= mu {
            return Err(Error::Assertion(format!("stabilizer dimension did not drop ({mu} -> {next_mu})")));
        }
        mu = next_mu;
        stages.push(next);
        steps.push(rec);
    }
    Ok(ResolutionLog { stages, steps, final_is_dm: true })
}

/// Independent description of the removed locus: old strata whose orbit
/// closure meets a center, and every new cone having such a stratum as a
/// face. Returns the cones of `new_fan` that must not be kept.
pub fn strict_transform_oracle(old: &AmbientStage, centers: &[Vec<usize>], new_fan: &Fan) -> BTreeSet<Vec<usize>> {
    let kept_old = old.kept_cones();
    let zbar: Vec<&Vec<usize>> = kept_old
        .iter()
        .filter(|tau| !centers.iter().any(|s| is_subset(s, tau)))
        .filter(|tau| {
            centers.iter().any(|s| {
                kept_old.iter().any(|big| {
                    is_subset(s, big) && is_subset(tau, big) && old.limit_lands(tau, big, true)
                })
            })
        })
        .collect();
    new_fan
        .cones
        .keys()
        .filter(|k| zbar.iter().any(|z| is_subset(z, k)))
        .cloned()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conifold() -> DiagonalizableAction {
        DiagonalizableAction::gm(&[-1, -1, 1, 1], &[0, 1])
    }

    #[test]
    fn stage0_stabilizers_match_supports() {
        let a = DiagonalizableAction::torus(
            vec![vec![-2, 1], vec![-1, 1], vec![1, 1], vec![2, 1]],
            vec![],
        )
        .unwrap();
        let st = AmbientStage::initial(&a);
        for cone in st.kept_cones() {
            let support: Vec<usize> = (0..4).filter(|i| !cone.contains(i)).collect();
            let s = crate::action::stabilizer(&a, &support);
            assert_eq!(st.stratum_stabilizer(&cone), s, "{cone:?}");
            assert_eq!(st.orbit_closed(&cone), crate::git::orbit_closed(&a, &support));
        }
    }

    #[test]
    fn conifold_one_step() {
        let log = kirwan_resolve(&conifold(), Exec::Sequential).unwrap();
        assert_eq!(log.steps.len(), 1);
        let step = &log.steps[0];
        assert_eq!(step.centers.len(), 1);
        assert_eq!(step.centers[0].codim, 4);
        assert!(step.centers[0].center_is_point);
        assert_eq!(step.centers[0].center_ray, vec![1, 1, 1, 1]);
        assert_eq!(step.descent_period, 2);
        let fin = log.final_stage();
        assert_eq!(fin.mu(), 0);
        let max = fin.fan.maximal_kept();
        assert_eq!(max.len(), 4);
        assert!(max.iter().all(|c| c.len() == 3 && c.contains(&4)));
    }

    #[test]
    fn centers_with_fixed_axis() {
        let a = DiagonalizableAction::gm(&[0, 1, -1], &[0]);
        let st = AmbientStage::initial(&a);
        let c = max_stab_centers(&st).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].cone, vec![1, 2]);
        assert_eq!(c[0].codim, 2);
        assert!(!c[0].center_is_point);
        let (next, rec) = reichstein_step(&st, Exec::Sequential).unwrap();
        assert_eq!(rec.descent_period, 2);
        // both planes x2 = 0 and x3 = 0 map onto the image of the center, so
        // their strict transforms go and only W0 x (C^* in P(W1)) remains
        assert_eq!(next.fan.maximal_cones(), vec![vec![0, 1, 3], vec![0, 2, 3]]);
        assert_eq!(next.fan.maximal_kept(), vec![vec![0, 3]]);
    }

    #[test]
    fn descent_periods() {
        for (w, n) in [(vec![-1, 1, 0], 2), (vec![-1, 2], 3), (vec![-1, -1, 1, 1], 2)] {
            let a = DiagonalizableAction::gm(&w, &[0]);
            let st = AmbientStage::initial(&a);
            let (_, rec) = reichstein_step(&st, Exec::Sequential).unwrap();
            assert_eq!(rec.descent_period, n, "{w:?}");
        }
    }

    #[test]
    fn already_dm() {
        let a = DiagonalizableAction::new(0, vec![], vec![vec![]; 2], vec![]).unwrap();
        let st = AmbientStage::initial(&a);
        assert_eq!(max_stab_centers(&st).unwrap_err(), Error::AlreadyDM);
        let log = kirwan_resolve(&a, Exec::Sequential).unwrap();
        assert!(log.steps.is_empty() && log.final_is_dm);
    }

    #[test]
    fn removal_agrees_with_oracle() {
        for w in [vec![-1, -1, 1, 1], vec![-2, -1, 1, 2], vec![0, 1, -1], vec![-1, -1, -1, 1, 1, 1]] {
            let a = DiagonalizableAction::gm(&w, &[0]);
            let st = AmbientStage::initial(&a);
            let (next, rec) = reichstein_step(&st, Exec::Sequential).unwrap();
            let centers: Vec<Vec<usize>> = rec.centers.iter().map(|c| c.cone.clone()).collect();
            let gone = strict_transform_oracle(&st, &centers, &next.fan);
            for (c, &k) in &next.fan.cones {
                let kept_before = {
                    let base: Vec<usize> = c.iter().copied().filter(|x| !rec.new_rays.contains(x)).collect();
                    st.fan.maximal_kept().iter().any(|m| {
                        let mut u = base.clone();
                        if c.len() != base.len() {
                            u.extend(&rec.centers[0].cone);
                            u.sort_unstable();
                            u.dedup();
                        }
                        is_subset(&u, m)
                    })
                };
                if kept_before {
                    assert_eq!(k, !gone.contains(c), "{w:?} {c:?}");
                }
            }
        }
    }

    #[test]
    fn twist_classes_on_conifold() {
        let log = kirwan_resolve(&conifold(), Exec::Sequential).unwrap();
        let fin = log.final_stage();
        let cone = vec![0, 2, 4];
        let stab = fin.stratum_stabilizer(&cone);
        assert_eq!(stab.group.invariant_factors, vec![2]);
        let t = fin.twist_class(4, &cone, &stab).unwrap();
        assert_eq!(stab.group.element_order(&t), Some(2));
    }
}
