//! Seeded invariant checks shared by the property tests and the acceptance run.
//! Each check returns `Err(message)` describing the first violation, or `Ok(summary)`.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hofa_core::abelian::{all_subgroups, closure, FinAbGroup, GroupElem, Subgroup, TorusValue};
use hofa_core::cube::{delta_cube, hk_seminorm, type_leq, CubeCache, DEFAULT_CUBE_GUARD};
use hofa_core::filtered::{
    pure_criterion_cyclic, retraction, split_section, verify_section, FilteredEmbedding, FilteredGroup,
};
use hofa_core::gowers::{correlate, gowers_inner, gowers_norm, ComplexFunction, DEFAULT_GUARD_CELLS};
use hofa_core::integration::random_exact_skew;
use hofa_core::inverse::{correlation_search, SearchOptions, Strategy};
use hofa_core::phase_poly::{degree, degree_at_most, poly_group_basis};
use hofa_core::systems::{coboundary_solve, integrate_u_cocycle, minimal_reduce, skew_product, Cocycle, GammaSystem};
use hofa_core::target::{TableFn, Torus, TorusFunction};
use hofa_core::towers::{hamming_example, poly_translation_group, rotation_spec, structure_check, PolyTower};

pub type Check = Result<(), String>;
pub type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Invariant factor lists `d_1 | d_2 | ...` of every abelian group of order `2..=n`.
pub fn groups_up_to(n: i64) -> Vec<Vec<i64>> {
    fn rec(prefix: &mut Vec<i64>, order: i64, n: i64, out: &mut Vec<Vec<i64>>) {
        let last = prefix.last().copied().unwrap_or(1);
        let mut d = if prefix.is_empty() { 2 } else { last };
        while order * d <= n {
            if d % last == 0 {
                prefix.push(d);
                out.push(prefix.clone());
                rec(prefix, order * d, n, out);
                prefix.pop();
            }
            d += 1;
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), 1, n, &mut out);
    out.sort_by_key(|m| (m.iter().product::<i64>(), m.clone()));
    out
}

fn grp(m: &[i64]) -> FinAbGroup {
    FinAbGroup::new(m.to_vec()).expect("valid moduli")
}

fn tsys(m: &[i64]) -> Arc<GammaSystem> {
    Arc::new(GammaSystem::translation(&grp(m)))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_fn(s: &Arc<GammaSystem>, r: &mut impl Rng) -> ComplexFunction {
    let v: Vec<Complex64> =
        (0..s.len()).map(|_| Complex64::from_polar(r.gen_range(0.0..1.0), r.gen_range(0.0..std::f64::consts::TAU))).collect();
    ComplexFunction::from_fn(s, |x| v[x])
}

fn random_elem(g: &FinAbGroup, r: &mut impl Rng) -> GroupElem {
    GroupElem::new(g.moduli().iter().map(|&m| r.gen_range(0..m)).collect())
}

/// Every `A <= B` with every chain `B >= B_1 >= B_2 >= 0` on `B`.
pub fn all_embeddings(b: &FinAbGroup, degree: usize) -> Vec<FilteredEmbedding> {
    let lattice = all_subgroups(b, 1 << 12).expect("small group");
    let mut chains: Vec<Vec<Subgroup>> = vec![vec![]];
    for _ in 0..degree {
        let mut next = Vec::new();
        for c in &chains {
            for s in &lattice {
                if c.last().map_or(true, |t| s.is_subgroup_of(t)) {
                    let mut c2 = c.clone();
                    c2.push(s.clone());
                    next.push(c2);
                }
            }
        }
        chains = next;
    }
    let mut out = Vec::new();
    for c in chains {
        let amb = FilteredGroup::new(b, c).and_then(|f| f.with_degree(degree)).expect("decreasing chain");
        for a in &lattice {
            out.push(FilteredEmbedding::from_subgroup(&amb, a).expect("induced filtration"));
        }
    }
    out
}

/// Brute-force search over all lifts of the generators of `C`.
pub fn section_exists_brute(e: &FilteredEmbedding) -> bool {
    let c = e.quotient();
    let cg = c.group();
    let bg = e.amb().group();
    let fiber: Vec<GroupElem> = e.sub().group().elements().map(|a| e.iota().apply(&a)).collect();
    let r = cg.rank();
    let base: Vec<GroupElem> = (0..r)
        .map(|i| {
            let target = cg.basis(i);
            bg.elements().find(|b| e.project(b) == target).expect("pi is onto")
        })
        .collect();
    let elems: Vec<GroupElem> = cg.elements().collect();
    let mut idx = vec![0usize; r];
    loop {
        let lifts: Vec<GroupElem> = (0..r).map(|i| bg.add(&base[i], &fiber[idx[i]])).collect();
        let hom_ok = (0..r).all(|i| bg.mul(&lifts[i], cg.moduli()[i]).is_zero());
        if hom_ok {
            let ok = elems.iter().all(|x| {
                let y = bg.combine(&x.coeffs, &lifts);
                (1..c.chain().len()).all(|j| !c.level(j).contains(x) || e.amb().level(j).contains(&y))
            });
            if ok {
                return true;
            }
        }
        let mut v = r;
        loop {
            if v == 0 {
                return false;
            }
            v -= 1;
            idx[v] += 1;
            if idx[v] < fiber.len() {
                break;
            }
            idx[v] = 0;
        }
    }
}

/// Statistics of one sweep over filtered embeddings.
#[derive(Debug, Default, Clone, Copy)]
pub struct SplitSweep {
    pub embeddings: usize,
    pub split: usize,
    pub trivial_filtration: usize,
}

/// `split_section` against the brute-force oracle, the section/retraction checks and, for
/// trivial filtrations, the divisibility criterion.
pub fn check_split_sweep(groups: &[Vec<i64>], degree: usize) -> Result<SplitSweep, String> {
    let mut stats = SplitSweep::default();
    for moduli in groups {
        let b = FinAbGroup::new(moduli.clone()).map_err(|e| e.to_string())?;
        for e in all_embeddings(&b, degree) {
            stats.embeddings += 1;
            let out = split_section(&e, u128::MAX).map_err(|err| err.to_string())?;
            let brute = section_exists_brute(&e);
            if out.is_split() != brute {
                return Err(format!(
                    "{moduli:?}: split_section says {} but brute force says {brute} for {:?}",
                    out.label(),
                    e.image()
                ));
            }
            if let Some(s) = out.section() {
                stats.split += 1;
                if !verify_section(&e, s) {
                    return Err(format!("{moduli:?}: returned section fails pi o s = id or the filtration"));
                }
                let r = retraction(&e, s).map_err(|err| err.to_string())?;
                for a in e.sub().group().elements() {
                    if r.apply(&e.iota().apply(&a)) != a {
                        return Err(format!("{moduli:?}: retraction is not a left inverse"));
                    }
                }
            }
            let trivial = e.amb().chain().iter().skip(1).all(Subgroup::is_trivial);
            if trivial {
                stats.trivial_filtration += 1;
                if pure_criterion_cyclic(&e) != out.is_split() {
                    return Err(format!("{moduli:?}: divisibility criterion disagrees for {:?}", e.image()));
                }
            }
        }
    }
    Ok(stats)
}

// ---- abelian groups ----

pub fn abelian_pairing_additive(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut checked = 0u64;
    for m in groups_up_to(64) {
        let g = grp(&m);
        let elems: Vec<GroupElem> = g.elements().collect();
        let extra: Vec<GroupElem> = (0..g.rank()).map(|i| g.basis(i)).chain((0..4).map(|_| random_elem(&g, &mut r))).collect();
        for xi in g.characters() {
            for a in &elems {
                let pa = g.pair(&xi, a).map_err(e2s)?;
                for b in &extra {
                    let lhs = g.pair(&xi, &g.add(a, b)).map_err(e2s)?;
                    ensure!(lhs == pa + g.pair(&xi, b).map_err(e2s)?, "{m:?}: pairing not additive at {xi:?}, {a:?}, {b:?}");
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} triples"))
}

pub fn abelian_exponent_and_annihilators(_seed: u64) -> Outcome {
    let mut subs = 0;
    for m in groups_up_to(64) {
        let g = grp(&m);
        for x in g.elements() {
            ensure!(g.mul(&x, g.exponent()).is_zero(), "{m:?}: exponent does not kill {x:?}");
        }
        for h in all_subgroups(&g, 1 << 16).map_err(e2s)? {
            ensure!(h.annihilator().annihilator() == h, "{m:?}: Ann(Ann(H)) != H for {h:?}");
            subs += 1;
        }
    }
    Ok(format!("{subs} subgroups"))
}

pub fn abelian_membership_vs_closure(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let all = groups_up_to(256);
    let mut cases = 0;
    for _ in 0..200 {
        let m = &all[r.gen_range(0..all.len())];
        let g = grp(m);
        let gens: Vec<GroupElem> = (0..r.gen_range(0..=3)).map(|_| random_elem(&g, &mut r)).collect();
        let h = Subgroup::span(&g, gens.clone()).map_err(e2s)?;
        let cl = closure(&g, &gens);
        ensure!(h.order() as usize == cl.len(), "{m:?}: order {} but closure has {}", h.order(), cl.len());
        for x in g.elements() {
            ensure!(h.contains(&x) == cl.contains(&x), "{m:?}: membership of {x:?} disagrees");
        }
        cases += 1;
    }
    Ok(format!("{cases} random spans"))
}

// ---- filtered groups ----

/// Exhaustive up to order 16, plus seeded samples of order <= 64.
pub fn filtered_oracle_equivalence(seed: u64) -> Outcome {
    let small: Vec<Vec<i64>> = groups_up_to(16);
    let mut stats = SplitSweep::default();
    for d in 1..=2 {
        let s = check_split_sweep(&small, d)?;
        stats.embeddings += s.embeddings;
        stats.split += s.split;
    }
    let mut r = rng(seed);
    let big: Vec<Vec<i64>> = groups_up_to(64).into_iter().filter(|m| m.iter().product::<i64>() > 16).collect();
    let mut sampled = 0;
    for _ in 0..120 {
        let m = &big[r.gen_range(0..big.len())];
        let b = grp(m);
        let lattice = all_subgroups(&b, 1 << 16).map_err(e2s)?;
        let pick = |r: &mut ChaCha8Rng, below: &Subgroup| -> Subgroup {
            let c: Vec<&Subgroup> = lattice.iter().filter(|s| s.is_subgroup_of(below)).collect();
            c[r.gen_range(0..c.len())].clone()
        };
        let b1 = pick(&mut r, &Subgroup::whole(&b));
        let b2 = pick(&mut r, &b1);
        let a = pick(&mut r, &Subgroup::whole(&b));
        let amb = FilteredGroup::new(&b, vec![b1, b2]).and_then(|f| f.with_degree(2)).map_err(e2s)?;
        let e = FilteredEmbedding::from_subgroup(&amb, &a).map_err(e2s)?;
        let out = split_section(&e, u128::MAX).map_err(e2s)?;
        ensure!(out.is_split() == section_exists_brute(&e), "{m:?}: split_section disagrees with brute force on {:?}", e.image());
        if let Some(s) = out.section() {
            ensure!(verify_section(&e, s), "{m:?}: bad section");
        }
        sampled += 1;
    }
    Ok(format!("{} exhaustive embeddings ({} split), {sampled} sampled", stats.embeddings, stats.split))
}

pub fn filtered_cyclic_criterion(_seed: u64) -> Outcome {
    let mut pairs = 0;
    for m in groups_up_to(32) {
        let b = grp(&m);
        let amb = FilteredGroup::trivial_filtration(&b);
        for a in all_subgroups(&b, 1 << 16).map_err(e2s)? {
            let e = FilteredEmbedding::from_subgroup(&amb, &a).map_err(e2s)?;
            let split = split_section(&e, u128::MAX).map_err(e2s)?.is_split();
            ensure!(pure_criterion_cyclic(&e) == split, "{m:?}: criterion and split_section disagree on {a:?}");
            pairs += 1;
        }
    }
    Ok(format!("{pairs} subgroup pairs"))
}

// ---- phase polynomials ----

fn poly_systems() -> Vec<(Vec<i64>, usize)> {
    let mut v = Vec::new();
    for m in [vec![2], vec![3], vec![4], vec![2, 2], vec![6], vec![8], vec![2, 4], vec![2, 2, 2], vec![3, 3], vec![4, 4], vec![2, 2, 2, 2], vec![16]] {
        for k in 1..=3usize {
            let n: i64 = m.iter().product();
            if k == 3 && n > 16 {
                continue;
            }
            v.push((m.clone(), k));
        }
    }
    v.push((vec![2; 6], 1));
    v.push((vec![2, 2, 2, 8], 1));
    v.push((vec![4, 4, 4], 1));
    v
}

pub fn poly_mtimes_drop(_seed: u64) -> Outcome {
    let mut checked = 0;
    for (m, k) in poly_systems() {
        let s = tsys(&m);
        let e = s.gamma().exponent();
        let basis = poly_group_basis(&s, k, None, DEFAULT_GUARD_CELLS).map_err(e2s)?;
        for p in &basis.basis {
            if degree(p, k) == Some(k) {
                ensure!(degree_at_most(&p.scale(e), k as i64 - 1), "{m:?}, k={k}: exponent times a degree-{k} basis element keeps degree {k}");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} basis elements of exact degree k"))
}

fn l2_dist(p: &TorusFunction, q: &TorusFunction) -> f64 {
    let n = p.values().len() as f64;
    (p.values().iter().zip(q.values()).map(|(a, b)| (a.expi() - b.expi()).norm_sqr()).sum::<f64>() / n).sqrt()
}

/// Minimum `||e(P) - e(Q)||_2` over basis pairs for each `k`.
pub fn poly_min_separation() -> Result<Vec<(usize, f64, Vec<i64>)>, String> {
    let mut best: Vec<(usize, f64, Vec<i64>)> = (1..=3).map(|k| (k, f64::INFINITY, vec![])).collect();
    for (m, k) in poly_systems() {
        let s = tsys(&m);
        let basis = poly_group_basis(&s, k, None, DEFAULT_GUARD_CELLS).map_err(e2s)?;
        let zero = TorusFunction::zero(&s, Torus);
        let mut cands: Vec<&TorusFunction> = basis.basis.iter().collect();
        cands.push(&zero);
        for i in 0..cands.len() {
            for j in i + 1..cands.len() {
                if cands[i].sub(cands[j]).is_constant() {
                    continue;
                }
                let d = l2_dist(cands[i], cands[j]);
                if d < best[k - 1].1 {
                    best[k - 1] = (k, d, m.clone());
                }
            }
        }
    }
    Ok(best)
}

/// Literal bound `sqrt(2) / 2^(k-2)`.
pub fn poly_separation_literal(_seed: u64) -> Outcome {
    let mut msgs = Vec::new();
    for (k, d, m) in poly_min_separation()? {
        let bound = 2f64.sqrt() / 2f64.powi(k as i32 - 2);
        let ok = d >= bound - 1e-12;
        msgs.push(format!("k={k}: min {d:.6} vs {bound:.6} on {m:?} {}", if ok { "ok" } else { "VIOLATED" }));
    }
    let summary = msgs.join("; ");
    if summary.contains("VIOLATED") {
        Err(summary)
    } else {
        Ok(summary)
    }
}

/// Bound `sqrt(2) / 2^(k-1)`.
pub fn poly_separation_halved(_seed: u64) -> Outcome {
    let mut msgs = Vec::new();
    for (k, d, m) in poly_min_separation()? {
        let bound = 2f64.sqrt() / 2f64.powi(k as i32 - 1);
        ensure!(d >= bound - 1e-12, "k={k}: min distance {d} below {bound} on {m:?}");
        msgs.push(format!("k={k}: {d:.6} >= {bound:.6}"));
    }
    Ok(msgs.join("; "))
}

pub fn poly_exponent_kills(_seed: u64) -> Outcome {
    let mut checked = 0;
    for (m, k) in poly_systems() {
        let s = tsys(&m);
        let ek = s.gamma().exponent().pow(k as u32);
        let basis = poly_group_basis(&s, k, Some(ek * 2), DEFAULT_GUARD_CELLS).map_err(e2s)?;
        for p in &basis.basis {
            let base = p.get(0).clone();
            let shifted = p.map_values(|v| *v - base);
            ensure!(shifted.scale(ek).is_zero(), "{m:?}, k={k}: exponent^k does not kill P - P(x0)");
            checked += 1;
        }
    }
    Ok(format!("{checked} polynomials (modulus widened to 2 exp^k)"))
}

pub fn poly_derivative_drops(_seed: u64) -> Outcome {
    let mut checked = 0;
    for (m, k) in poly_systems() {
        let s = tsys(&m);
        let basis = poly_group_basis(&s, k, None, DEFAULT_GUARD_CELLS).map_err(e2s)?;
        for p in &basis.basis {
            let d = degree(p, k).ok_or("basis element above degree k")?;
            for i in 0..s.gamma().rank() {
                ensure!(degree_at_most(&p.derivative_gen(i), d as i64 - 1), "{m:?}: derivative did not drop degree {d}");
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} derivatives"))
}

// ---- Gowers norms ----

const NORM_GROUPS: &[&[i64]] = &[&[2], &[3], &[4], &[5], &[6], &[2, 2], &[8], &[2, 4], &[2, 2, 2], &[3, 3], &[2, 2, 2, 2], &[16]];

pub fn gowers_monotone(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut n = 0;
    for m in NORM_GROUPS {
        let s = tsys(m);
        for _ in 0..5 {
            let f = random_fn(&s, &mut r);
            let mut prev = 0.0;
            for d in 1..=3 {
                let v = gowers_norm(&f, d, DEFAULT_GUARD_CELLS).map_err(e2s)?;
                ensure!(v + 1e-9 >= prev, "{m:?}: U^{d} = {v} below U^{} = {prev}", d - 1);
                prev = v;
            }
            n += 1;
        }
    }
    Ok(format!("{n} functions, d <= 3"))
}

pub fn gowers_cauchy_schwarz(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut n = 0;
    for m in [&[2, 2, 2][..], &[4], &[8], &[2, 4], &[3, 3], &[6]] {
        let s = tsys(m);
        for k in 1..=2 {
            let basis = poly_group_basis(&s, k, None, DEFAULT_GUARD_CELLS).map_err(e2s)?;
            for _ in 0..3 {
                let f = random_fn(&s, &mut r);
                let norm = gowers_norm(&f, k + 1, DEFAULT_GUARD_CELLS).map_err(e2s)?;
                for p in &basis.basis {
                    let c = correlate(&f, p).map_err(e2s)?.norm();
                    ensure!(c <= norm + 1e-9, "{m:?}: |corr| {c} exceeds U^{} norm {norm}", k + 1);
                    n += 1;
                }
            }
        }
    }
    Ok(format!("{n} (f, P) pairs"))
}

pub fn gowers_inner_agrees(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut n = 0;
    for m in NORM_GROUPS {
        let s = tsys(m);
        let f = random_fn(&s, &mut r);
        for d in 1..=3 {
            let norm = gowers_norm(&f, d, DEFAULT_GUARD_CELLS).map_err(e2s)?;
            let slots = vec![f.clone(); 1 << d];
            let inner = gowers_inner(&slots, DEFAULT_GUARD_CELLS).map_err(e2s)?;
            ensure!(inner.im.abs() < 1e-12, "{m:?}: self inner product not real");
            let via = inner.re.max(0.0).powf(1.0 / (1u64 << d) as f64);
            ensure!((norm.powi(1 << d) - inner.re).abs() < 1e-12, "{m:?}, d={d}: {norm} vs {via}");
            n += 1;
        }
    }
    Ok(format!("{n} cases"))
}

/// `sum_xi |hat f(xi)|^4` on a translation system.
pub fn fourier_l4(f: &ComplexFunction) -> f64 {
    let g = f.domain().translation_group().expect("translation system").clone();
    let n = f.values().len() as f64;
    let mut total = 0.0;
    for xi in g.characters() {
        let mut s = Complex64::new(0.0, 0.0);
        for (x, v) in f.values().iter().enumerate() {
            let t = g.pair(&xi, &g.elem_at(x)).expect("shape");
            s += v * (-t).expi();
        }
        total += (s / n).norm_sqr().powi(2);
    }
    total
}

pub fn gowers_u2_fourier(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for m in [&[2, 2, 2, 2][..], &[8]] {
        let s = tsys(m);
        for _ in 0..50 {
            let f = random_fn(&s, &mut r);
            let u2 = gowers_norm(&f, 2, DEFAULT_GUARD_CELLS).map_err(e2s)?;
            let four = fourier_l4(&f).powf(0.25);
            worst = worst.max((u2 - four).abs());
            ensure!((u2 - four).abs() <= 1e-9, "{m:?}: U^2 {u2} vs Fourier {four}");
        }
    }
    Ok(format!("100 functions, max error {worst:.2e}"))
}

pub fn gowers_cube_agreement(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut n = 0;
    let mut worst: f64 = 0.0;
    for m in NORM_GROUPS {
        let s = tsys(m);
        let size = s.len();
        let kmax = if size <= 6 { 3 } else { 2 };
        let mut cache = CubeCache::new(s.clone(), DEFAULT_CUBE_GUARD);
        let f = random_fn(&s, &mut r);
        for k in 1..=kmax {
            let a = gowers_norm(&f, k, DEFAULT_GUARD_CELLS).map_err(e2s)?;
            let b = hk_seminorm(&f, k, &mut cache).map_err(e2s)?;
            worst = worst.max((a - b).abs());
            ensure!((a - b).abs() <= 1e-9, "{m:?}, k={k}: recursive {a} vs cube {b}");
            n += 1;
        }
    }
    Ok(format!("{n} cases, max error {worst:.2e}"))
}

// ---- cocycles ----

fn small_systems() -> Vec<(String, Arc<GammaSystem>)> {
    let mut v: Vec<(String, Arc<GammaSystem>)> =
        [&[2][..], &[3], &[4], &[2, 2], &[6]].iter().map(|m| (format!("Z{m:?}"), tsys(m))).collect();
    let z2 = GammaSystem::translation(&grp(&[2]));
    v.push(("Z[2] on 2+2".into(), Arc::new(z2.disjoint_union(&z2).expect("same group"))));
    let pt = GammaSystem::one_point(&grp(&[2]));
    v.push(("Z[2] on 2+1".into(), Arc::new(z2.disjoint_union(&pt).expect("same group"))));
    v
}

/// All torus cocycles with values in `(1/M)Z/Z`, enumerated over generator tables.
fn all_torus_cocycles(s: &Arc<GammaSystem>, m: i64, cap: usize) -> Vec<Cocycle<Torus>> {
    let cells = s.gamma().rank() * s.len();
    let total = (m as usize).checked_pow(cells as u32).unwrap_or(usize::MAX);
    let mut out = Vec::new();
    if total > cap {
        return out;
    }
    for idx in 0..total {
        let mut c = idx;
        let tables: Vec<Vec<TorusValue>> = (0..s.gamma().rank())
            .map(|_| {
                (0..s.len())
                    .map(|_| {
                        let v = (c % m as usize) as i64;
                        c /= m as usize;
                        TorusValue::new(v, m)
                    })
                    .collect()
            })
            .collect();
        if let Ok(rho) = Cocycle::new(s.clone(), Torus, tables) {
            out.push(rho);
        }
    }
    out
}

pub fn systems_poly_cocycle_type(_seed: u64) -> Outcome {
    let mut checked = 0;
    for (name, s) in small_systems() {
        let mut cache = CubeCache::new(s.clone(), DEFAULT_CUBE_GUARD);
        for m in [2, 3, 4] {
            for rho in all_torus_cocycles(&s, m, 1 << 12) {
                for k in 1..=2usize {
                    if rho.degree_at_most(k as i64 - 1) {
                        ensure!(type_leq(&rho, k, &mut cache).map_err(e2s)?, "{name}: degree <= {} cocycle fails type <= {k}", k - 1);
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{checked} (cocycle, k) pairs"))
}

pub fn systems_cohomologous_roundtrip(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut n = 0;
    for (name, s) in small_systems() {
        let cocycles = all_torus_cocycles(&s, 4, 1 << 12);
        for rho in cocycles.iter().take(64) {
            let vals: Vec<i64> = (0..s.len()).map(|_| r.gen_range(0..8)).collect();
            let f = TorusFunction::from_fn(&s, Torus, |x| TorusValue::new(vals[x], 8));
            let rho2 = rho.add(&Cocycle::coboundary_of(&f));
            ensure!(coboundary_solve(&rho.sub(&rho2)).is_some(), "{name}: difference of cohomologous cocycles not a coboundary");
            ensure!(coboundary_solve(rho).is_some() == coboundary_solve(&rho2).is_some(), "{name}: solvability changed under a coboundary");
            n += 1;
        }
    }
    Ok(format!("{n} pairs"))
}

fn all_group_cocycles(s: &Arc<GammaSystem>, u: &FinAbGroup) -> Vec<Cocycle<FinAbGroup>> {
    let elems: Vec<GroupElem> = u.elements().collect();
    let cells = s.gamma().rank() * s.len();
    let total = elems.len().pow(cells as u32);
    (0..total)
        .filter_map(|mut c| {
            let tables = (0..s.gamma().rank())
                .map(|_| {
                    (0..s.len())
                        .map(|_| {
                            let v = elems[c % elems.len()].clone();
                            c /= elems.len();
                            v
                        })
                        .collect()
                })
                .collect();
            Cocycle::new(s.clone(), u.clone(), tables).ok()
        })
        .collect()
}

pub fn systems_skew_transitive_iff_minimal(_seed: u64) -> Outcome {
    let mut n = 0;
    for base in [&[2][..], &[3]] {
        let s = tsys(base);
        for um in [&[2][..], &[4]] {
            let u = grp(um);
            for rho in all_group_cocycles(&s, &u) {
                let transitive = skew_product(&rho).map_err(e2s)?.system().is_transitive();
                let whole = minimal_reduce(&rho, 1 << 12).map_err(e2s)?.subgroup.is_whole();
                ensure!(transitive == whole, "Z{base:?} -> Z{um:?}: transitive {transitive} but minimal subgroup whole {whole}");
                n += 1;
            }
        }
    }
    Ok(format!("{n} cocycles"))
}

pub fn systems_u_cocycle_integration(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut n = 0;
    for _ in 0..30 {
        let (es, _) = random_exact_skew(&mut r, 32, 2, DEFAULT_GUARD_CELLS).map_err(e2s)?;
        let skew = &es.skew;
        let sys = skew.system();
        let vals: Vec<i64> = (0..sys.len()).map(|_| r.gen_range(0..12)).collect();
        let big = TorusFunction::from_fn(sys, Torus, |x| TorusValue::new(vals[x], 12));
        let family = skew.vertical_derivative(&big);
        let f = integrate_u_cocycle(skew, &family).map_err(e2s)?;
        ensure!(skew.vertical_derivative(&f) == family, "integrated function has the wrong vertical derivative");
        let diff = f.sub(&big);
        for u in skew.fiber().elements() {
            ensure!(diff.pull_back(&skew.vertical(&u)) == diff, "difference of integrals is not U-invariant");
        }
        let zero: Vec<TorusFunction> = skew.fiber().elements().map(|_| TorusFunction::zero(sys, Torus)).collect();
        ensure!(integrate_u_cocycle(skew, &zero).map_err(e2s)?.is_zero(), "kernel element is not normalized");
        if skew.fiber().order() > 1 {
            let mut bad = family.clone();
            let last = bad.len() - 1;
            let c = TorusValue::new(1, 2 * skew.fiber().order());
            bad[last] = bad[last].map_values(|v| *v + c);
            ensure!(integrate_u_cocycle(skew, &bad).is_err(), "a non-cocycle family was integrated");
        }
        n += 1;
    }
    Ok(format!("{n} skew products"))
}

// ---- cube measures ----

pub fn cube_difference_characterizes_degree(_seed: u64) -> Outcome {
    let mut n = 0;
    for (name, s) in small_systems() {
        let mut cache = CubeCache::new(s.clone(), DEFAULT_CUBE_GUARD);
        let m: i64 = if s.len() <= 4 { 4 } else { 2 };
        let total = (m as usize).pow(s.len() as u32);
        for mdeg in 1..=3usize {
            let cube = cache.get(mdeg).map_err(e2s)?.clone();
            for idx in 0..total {
                let f = TableFn::from_fn(&s, Torus, |x| TorusValue::new((idx / (m as usize).pow(x as u32) % m as usize) as i64, m));
                let lhs = degree_at_most(&f, mdeg as i64 - 1);
                let rhs = delta_cube(&f, &cube).is_zero();
                ensure!(lhs == rhs, "{name}, m={mdeg}: degree test {lhs} but cube difference vanishing {rhs}");
                n += 1;
            }
        }
    }
    Ok(format!("{n} (function, m) pairs"))
}

pub fn cube_seminorm_monotone(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut n = 0;
    for (name, s) in small_systems() {
        let mut cache = CubeCache::new(s.clone(), DEFAULT_CUBE_GUARD);
        for _ in 0..4 {
            let f = random_fn(&s, &mut r);
            let mut prev = 0.0;
            for k in 1..=3 {
                let v = hk_seminorm(&f, k, &mut cache).map_err(e2s)?;
                ensure!(v + 1e-9 >= prev, "{name}: seminorm drops at k={k}");
                if s.translation_group().is_some() {
                    let g = gowers_norm(&f, k, DEFAULT_GUARD_CELLS).map_err(e2s)?;
                    ensure!((g - v).abs() <= 1e-9, "{name}, k={k}: cube {v} vs recursive {g}");
                }
                prev = v;
                n += 1;
            }
        }
    }
    Ok(format!("{n} seminorms"))
}

pub fn cube_measure_symmetry(_seed: u64) -> Outcome {
    let mut n = 0;
    for (name, s) in small_systems() {
        let mut cache = CubeCache::new(s.clone(), DEFAULT_CUBE_GUARD);
        for k in 1..=3 {
            let cube = cache.get(k).map_err(e2s)?;
            let half = 1usize << (k - 1);
            let index: HashMap<&[u32], usize> = (0..cube.len()).map(|i| (cube.tuple(i), i)).collect();
            let total: Ratio<i128> = cube.weights().iter().sum();
            ensure!(total == Ratio::from_integer(1), "{name}: weights sum to {total}");
            for i in 0..cube.len() {
                let t = cube.tuple(i);
                let swapped: Vec<u32> = t[half..].iter().chain(&t[..half]).copied().collect();
                let j = *index.get(swapped.as_slice()).ok_or(format!("{name}: swapped tuple outside the support"))?;
                ensure!(cube.weights()[i] == cube.weights()[j], "{name}: half swap changes the weight");
                for perm in cube.system().generators() {
                    let img = perm[i] as usize;
                    ensure!(cube.weights()[img] == cube.weights()[i], "{name}: diagonal action changes the weight");
                }
                n += 1;
            }
        }
    }
    Ok(format!("{n} support tuples"))
}

// ---- polynomial towers ----

fn towers_for_checks() -> Result<Vec<(String, PolyTower)>, String> {
    Ok(vec![
        ("hamming(2,1)".into(), hamming_example(2, 1).map_err(e2s)?),
        ("rotation(5)".into(), PolyTower::new(&rotation_spec(5).map_err(e2s)?).map_err(e2s)?),
        ("rotation(4)".into(), PolyTower::new(&rotation_spec(4).map_err(e2s)?).map_err(e2s)?),
    ])
}

pub fn towers_filtration(_seed: u64) -> Outcome {
    let mut msgs = Vec::new();
    for (name, t) in towers_for_checks()? {
        let tg = poly_translation_group(&t, DEFAULT_GUARD_CELLS).map_err(e2s)?;
        let ax = tg.check_axioms(DEFAULT_GUARD_CELLS).map_err(e2s)?;
        ensure!(ax.commutators, "{name}: [G_a, G_b] not inside G_(a+b)");
        ensure!(ax.top_trivial, "{name}: G_(k+1) is not trivial");
        ensure!(ax.ok(), "{name}: axioms fail {ax:?}");
        msgs.push(format!("{name}: |G| = {}", ax.order));
    }
    Ok(msgs.join("; "))
}

/// Degree `<= d` plus the vertical weighted condition must give the `G(X)` condition.
pub fn towers_multilevel_calculus(_seed: u64) -> Outcome {
    let t = hamming_example(2, 1).map_err(e2s)?;
    let tg = poly_translation_group(&t, DEFAULT_GUARD_CELLS).map_err(e2s)?;
    let mut msgs = Vec::new();
    let mut bad = false;
    for d in 0..=2 {
        let s = structure_check(&tg, d, 4, u128::MAX).map_err(e2s)?;
        bad |= s.vertical_not_group > 0;
        msgs.push(format!("d={d}: {} of {} counterexamples", s.vertical_not_group, s.by_degree));
    }
    let summary = format!("hamming(2,1): {}", msgs.join(", "));
    if bad {
        Err(summary)
    } else {
        Ok(summary)
    }
}

/// Degree `<= d` iff `Delta_r P` has degree `<= d - level(r)` for all `r in G(X)`.
pub fn towers_structure_equivalence(_seed: u64) -> Outcome {
    let t = hamming_example(2, 1).map_err(e2s)?;
    let tg = poly_translation_group(&t, DEFAULT_GUARD_CELLS).map_err(e2s)?;
    let mut msgs = Vec::new();
    let mut bad = false;
    for d in 0..=2 {
        let s = structure_check(&tg, d, 4, u128::MAX).map_err(e2s)?;
        bad |= !s.agree;
        msgs.push(format!("d={d}: degree {} vs G(X) {} (group-not-degree {})", s.by_degree, s.by_group, s.group_not_degree));
    }
    let summary = format!("hamming(2,1): {}", msgs.join(", "));
    if bad {
        Err(summary)
    } else {
        Ok(summary)
    }
}

// ---- inverse search ----

fn inverse_cases(seed: u64) -> Vec<(Vec<i64>, usize, ComplexFunction)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for (m, k) in [(vec![2, 2, 2], 1), (vec![2, 2, 2], 2), (vec![4], 2), (vec![8], 1), (vec![2, 4], 1), (vec![3, 3], 1), (vec![2, 2, 2, 2], 2)] {
        let s = tsys(&m);
        for _ in 0..3 {
            out.push((m.clone(), k, random_fn(&s, &mut r)));
        }
    }
    out
}

pub fn inverse_consistency_and_greedy(seed: u64) -> Outcome {
    let mut n = 0;
    for (m, k, f) in inverse_cases(seed) {
        let ex = correlation_search(&f, k, &SearchOptions { seed, ..Default::default() }).map_err(e2s)?;
        let gr = correlation_search(&f, k, &SearchOptions { seed, strategy: Strategy::Greedy, ..Default::default() }).map_err(e2s)?;
        for rep in [&ex, &gr] {
            ensure!(rep.correlation <= rep.norm + 1e-9, "{m:?}: {} correlation {} exceeds norm {}", rep.strategy, rep.correlation, rep.norm);
            let again = correlate(&f, &rep.polynomial).map_err(e2s)?.norm();
            ensure!((again - rep.correlation).abs() < 1e-12, "{m:?}: reported correlation is not reproducible");
        }
        ensure!(gr.correlation <= ex.correlation + 1e-12, "{m:?}: greedy {} beats exhaustive {}", gr.correlation, ex.correlation);
        n += 1;
    }
    Ok(format!("{n} functions"))
}

pub fn inverse_constant_shift(seed: u64) -> Outcome {
    let mut r = rng(seed);
    let mut n = 0;
    for (m, k, f) in inverse_cases(seed) {
        let basis = poly_group_basis(f.domain(), k, None, DEFAULT_GUARD_CELLS).map_err(e2s)?;
        for p in basis.basis.iter().take(8) {
            let c = TorusValue::new(r.gen_range(0..basis.modulus), basis.modulus);
            let a = correlate(&f, p).map_err(e2s)?.norm();
            let b = correlate(&f, &p.map_values(|v| *v + c)).map_err(e2s)?.norm();
            ensure!((a - b).abs() < 1e-12, "{m:?}: constant shift changes |corr| from {a} to {b}");
            n += 1;
        }
    }
    Ok(format!("{n} shifts"))
}

/// Every invariant with its module, in a stable order.
pub fn suite() -> Vec<(&'static str, fn(u64) -> Outcome)> {
    vec![
        ("abelian: pairing is additive", abelian_pairing_additive),
        ("abelian: exponent kills, Ann(Ann(H)) = H", abelian_exponent_and_annihilators),
        ("abelian: canonical membership = closure", abelian_membership_vs_closure),
        ("filtered: split_section = brute-force sections", filtered_oracle_equivalence),
        ("filtered: divisibility criterion (trivial filtrations)", filtered_cyclic_criterion),
        ("phase_poly: exponent times P drops the degree", poly_mtimes_drop),
        ("phase_poly: separation >= sqrt2/2^(k-2)", poly_separation_literal),
        ("phase_poly: separation >= sqrt2/2^(k-1)", poly_separation_halved),
        ("phase_poly: exponent^k kills P - P(x0)", poly_exponent_kills),
        ("phase_poly: derivatives drop the degree", poly_derivative_drops),
        ("gowers: monotone in d", gowers_monotone),
        ("gowers: |corr| <= U^(k+1) norm", gowers_cauchy_schwarz),
        ("gowers: norm = inner product of copies", gowers_inner_agrees),
        ("gowers: U^2 = Fourier l4", gowers_u2_fourier),
        ("gowers: recursive = cube seminorm", gowers_cube_agreement),
        ("systems: degree <= k-1 cocycles have type <= k", systems_poly_cocycle_type),
        ("systems: cohomologous cocycles round trip", systems_cohomologous_roundtrip),
        ("systems: skew transitive iff minimal reduction is U", systems_skew_transitive_iff_minimal),
        ("systems: U-cocycles integrate, kernel is U-invariant", systems_u_cocycle_integration),
        ("cube: degree <= m-1 iff cube difference vanishes", cube_difference_characterizes_degree),
        ("cube: seminorms monotone and match norms", cube_seminorm_monotone),
        ("cube: measure invariant and half-swap symmetric", cube_measure_symmetry),
        ("towers: G(X) filtration and commutators", towers_filtration),
        ("towers: multi-level degree calculus", towers_multilevel_calculus),
        ("towers: degree <= d iff G(X) derivative bounds", towers_structure_equivalence),
        ("inverse: consistency and greedy <= exhaustive", inverse_consistency_and_greedy),
        ("inverse: constant shifts keep |corr|", inverse_constant_shift),
    ]
}
