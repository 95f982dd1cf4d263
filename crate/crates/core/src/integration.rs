//! Seeded random exact polynomial skew products and weighted vertical cocycles,
//! for exercising [`integrate_poly_cocycle`] at scale.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::abelian::{all_subgroups, FinAbGroup, GroupElem, Subgroup, TorusValue};
use crate::error::{Error, Result};
use crate::phase_poly::{constraint_kernel, degree_rows, Constraint};
use crate::systems::{exactness_check, integrate_poly_cocycle, skew_product, Cocycle, GammaSystem, SkewProduct, WeightFiltration};
use crate::target::{Torus, TorusFunction};

const GAMMAS: &[&[i64]] = &[&[2], &[3], &[4], &[6], &[2, 2], &[2, 4], &[3, 3]];
const FIBERS: &[&[i64]] = &[&[2], &[3], &[4], &[8], &[2, 2], &[2, 4]];

/// A skew product `X x_rho U` together with a weight filtration making `rho` exact of degree `< k`.
#[derive(Clone, Debug)]
pub struct ExactSkew {
    pub k: usize,
    pub weights: WeightFiltration,
    pub skew: SkewProduct,
}

#[derive(Clone, Debug)]
pub struct IntegrationInstance {
    pub seed: u64,
    pub exact: ExactSkew,
    pub modulus: i64,
    /// `f_u` for `u` in the fiber's canonical order.
    pub f: Vec<TorusFunction>,
    /// Candidates discarded because the sampled cocycle was not exact.
    pub rejected: usize,
}

fn random_elem(h: &Subgroup, rng: &mut impl Rng) -> GroupElem {
    let g = h.ambient();
    let e = g.exponent();
    let mut acc = g.zero();
    for gen in h.generators() {
        acc = g.add(&acc, &g.mul(&gen, rng.gen_range(0..e)));
    }
    acc
}

/// `Gamma` acting on `Gamma / H` by translation.
fn quotient_system(gamma: &FinAbGroup, h: &Subgroup) -> GammaSystem {
    let q = h.quotient();
    let qg = q.group();
    let pts: Vec<GroupElem> = qg.elements().collect();
    let action = (0..gamma.rank())
        .map(|i| {
            let step = q.project(&gamma.basis(i));
            pts.iter().map(|x| qg.index_of(&qg.add(x, &step)) as u32).collect()
        })
        .collect();
    GammaSystem::new(pts.len(), gamma.clone(), action).expect("translation action")
}

/// One sample of a polynomial cocycle `rho : Gamma x X -> U` with `rho mod U_{>l}` of degree `< l`.
fn sample_cocycle(sys: &Arc<GammaSystem>, w: &WeightFiltration, rng: &mut impl Rng, guard: u128) -> Result<Cocycle<FinAbGroup>> {
    let u = w.group();
    let n = sys.len();
    let r = sys.gamma().rank();
    let last = w.chain().len() - 1;
    let var = |i: usize, x: usize| i * n + x;
    let mut rows = Vec::new();
    for i in 0..r {
        let o = sys.gamma().moduli()[i];
        for x in 0..n {
            let mut y = x;
            let mut terms = Vec::new();
            for _ in 0..o {
                terms.push((var(i, y), 1));
                y = sys.step(i, y);
            }
            rows.push(Constraint::new(terms, last));
            for j in i + 1..r {
                rows.push(Constraint::new(
                    vec![(var(i, x), 1), (var(j, sys.step(i, x)), 1), (var(j, x), -1), (var(i, sys.step(j, x)), -1)],
                    last,
                ));
            }
        }
        for l in 1..w.chain().len() {
            rows.extend(degree_rows(sys, l as i64 - 1, l, |x| vec![(var(i, x), 1)]));
        }
    }
    let kernel = constraint_kernel(u, r * n, w.chain(), rows, guard)?;
    let v = random_elem(&kernel, rng);
    let ur = u.rank();
    let tables = (0..r)
        .map(|i| (0..n).map(|x| GroupElem::new(v.coeffs[var(i, x) * ur..(var(i, x) + 1) * ur].to_vec())).collect())
        .collect();
    Cocycle::new(sys.clone(), u.clone(), tables)
}

/// Draws random exact polynomial skew products with at most `max_points` points.
pub fn random_exact_skew(rng: &mut impl Rng, max_points: usize, max_k: usize, guard: u128) -> Result<(ExactSkew, usize)> {
    let mut rejected = 0;
    for _ in 0..1000 {
        let gamma = FinAbGroup::new(GAMMAS.choose(rng).expect("nonempty").to_vec())?;
        let subs = all_subgroups(&gamma, 1 << 12)?;
        let h = subs.choose(rng).expect("nonempty");
        let base = Arc::new(quotient_system(&gamma, h));
        let fibers: Vec<&&[i64]> = FIBERS.iter().filter(|m| base.len() * m.iter().product::<i64>() as usize <= max_points).collect();
        let Some(moduli) = fibers.choose(rng) else { continue };
        let u = FinAbGroup::new(moduli.to_vec())?;
        let k = rng.gen_range(1..=max_k);
        let levels = rng.gen_range(1..=k);
        let lattice = all_subgroups(&u, 1 << 12)?;
        let mut above: Vec<Subgroup> = Vec::new();
        for _ in 1..levels {
            let top = above.last().cloned().unwrap_or_else(|| Subgroup::whole(&u));
            let below: Vec<&Subgroup> = lattice.iter().filter(|s| s.is_subgroup_of(&top)).collect();
            above.push((*below.choose(rng).expect("trivial subgroup")).clone());
        }
        let weights = WeightFiltration::new(&u, above)?;
        let rho = sample_cocycle(&base, &weights, rng, guard)?;
        if !exactness_check(&rho, k, u128::MAX)?.exact {
            rejected += 1;
            continue;
        }
        let skew = skew_product(&rho)?;
        return Ok((ExactSkew { k, weights, skew }, rejected));
    }
    Err(Error::Precondition("no exact skew product found in 1000 draws".into()))
}

/// Numerator terms of `f_u(p)` in the unknowns `f_{e_j}(q)`, expanding `u` along the standard basis.
fn path_terms(skew: &SkewProduct, verts: &[Vec<u32>], u: &GroupElem, p: usize) -> Vec<(usize, i64)> {
    let g = skew.fiber();
    let n = skew.system().len();
    let mut cur = g.zero();
    let mut out = Vec::new();
    for (j, &c) in u.coeffs.iter().enumerate() {
        for _ in 0..c {
            out.push((j * n + verts[g.index_of(&cur)][p] as usize, 1));
            cur = g.add(&cur, &g.basis(j));
        }
    }
    out
}

/// A random vertical cocycle `(f_u)` with `f_u` of degree `<= k - wt(u)`, valued in `(1/M)Z/Z`.
pub fn random_vertical_family(es: &ExactSkew, modulus: i64, rng: &mut impl Rng, guard: u128) -> Result<Vec<TorusFunction>> {
    let skew = &es.skew;
    let g = skew.fiber();
    let sys = skew.system();
    let n = sys.len();
    let verts: Vec<Vec<u32>> = g.elements().map(|u| skew.vertical(&u)).collect();
    let zm = FinAbGroup::cyclic(modulus)?;
    let mods = [Subgroup::trivial(&zm)];
    let mut rows = Vec::new();
    for j in 0..g.rank() {
        let full = GroupElem::new((0..g.rank()).map(|i| if i == j { g.moduli()[j] } else { 0 }).collect());
        let ej = g.basis(j);
        for p in 0..n {
            rows.push(Constraint::new(path_terms(skew, &verts, &full, p), 0));
            for i in j + 1..g.rank() {
                let ei = g.basis(i);
                let vi = verts[g.index_of(&ei)][p] as usize;
                let vj = verts[g.index_of(&ej)][p] as usize;
                rows.push(Constraint::new(vec![(i * n + p, 1), (j * n + vi, 1), (j * n + p, -1), (i * n + vj, -1)], 0));
            }
        }
    }
    for u in g.elements().filter(|u| !u.is_zero()) {
        let w = es.weights.weight(&u).expect("nonzero");
        rows.extend(degree_rows(sys, es.k as i64 - w as i64, 0, |p| path_terms(skew, &verts, &u, p)));
    }
    let kernel = constraint_kernel(&zm, g.rank() * n, &mods, rows, guard)?;
    let v = random_elem(&kernel, rng);
    Ok(g.elements()
        .map(|u| {
            TorusFunction::from_fn(sys, Torus, |p| {
                let s: i64 = path_terms(skew, &verts, &u, p).iter().map(|&(x, c)| c * v.coeffs[x]).sum();
                TorusValue::new(s, modulus)
            })
        })
        .collect())
}

pub fn random_integration_instance(seed: u64, max_points: usize, max_k: usize, guard: u128) -> Result<IntegrationInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (exact, rejected) = random_exact_skew(&mut rng, max_points, max_k, guard)?;
    let e = exact.skew.system().gamma().exponent() * exact.skew.fiber().exponent();
    let modulus = e.pow(exact.k as u32).min(1 << 12);
    let f = random_vertical_family(&exact, modulus, &mut rng, guard)?;
    Ok(IntegrationInstance {
        seed,
        exact,
        modulus,
        f,
        rejected,
    })
}

#[derive(Clone, Debug, Default)]
pub struct IntegrationSweep {
    pub instances: usize,
    pub max_points: usize,
    pub rejected: usize,
    /// Instances by `k`.
    pub by_k: [usize; 4],
    pub nonconstant_f: usize,
    pub failures: Vec<(u64, String)>,
}

/// Integrates `count` random instances seeded `seed, seed + 1, ...`.
pub fn integration_sweep(count: usize, seed: u64, max_points: usize, max_k: usize, guard: u128) -> Result<IntegrationSweep> {
    let mut out = IntegrationSweep::default();
    for s in seed..seed + count as u64 {
        let inst = random_integration_instance(s, max_points, max_k, guard)?;
        let es = &inst.exact;
        out.instances += 1;
        out.rejected += inst.rejected;
        out.max_points = out.max_points.max(es.skew.system().len());
        out.by_k[es.k.min(3)] += 1;
        out.nonconstant_f += inst.f.iter().any(|fu| !fu.is_zero()) as usize;
        if let Err(e) = integrate_poly_cocycle(&es.skew, &inst.f, es.k, &es.weights) {
            out.failures.push((s, e.to_string()));
        }
    }
    Ok(out)
}
