//! Polynomial towers `pt <- X_1 <- ... <- X_j`, the Hamming example and the
//! translation group `G(X)`.
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abelian::{FinAbGroup, GroupElem, Subgroup, TorusValue};
use crate::error::{check_guard, Error, Result};
use crate::gowers::phase_gowers_exact;
use crate::phase_poly::{binom_mod2, binom_parity, degree, degree_at_most, exact_poly_group};
use crate::systems::{
    coboundary_solve, exactness_check, skew_product, Cocycle, ExactnessReport, GammaSystem, SkewProduct,
    WeightFiltration,
};
use crate::target::{GroupValuedFunction, TableFn, Torus, TorusFunction};

/// One level: the fiber with its weights and the cocycle on the previous level.
#[derive(Clone, Debug)]
pub struct LevelSpec {
    pub weights: WeightFiltration,
    /// One table per generator of `Gamma`, over the points of the previous level.
    pub tables: Vec<Vec<GroupElem>>,
}

#[derive(Clone, Debug)]
pub struct TowerSpec {
    pub gamma: FinAbGroup,
    pub k: usize,
    pub levels: Vec<LevelSpec>,
}

#[derive(Clone, Debug)]
pub struct TowerLevel {
    pub weights: WeightFiltration,
    pub skew: SkewProduct,
}

impl TowerLevel {
    pub fn fiber(&self) -> &FinAbGroup {
        self.weights.group()
    }

    pub fn cocycle(&self) -> &Cocycle<FinAbGroup> {
        self.skew.cocycle()
    }
}

/// A tower of skew products over a point with polynomial cocycles of degree `<= k - 1`.
#[derive(Clone, Debug)]
pub struct PolyTower {
    gamma: FinAbGroup,
    k: usize,
    point: Arc<GammaSystem>,
    levels: Vec<TowerLevel>,
}

impl PolyTower {
    /// Builds the systems without checking degrees.
    pub fn assemble(spec: &TowerSpec) -> Result<Self> {
        let point = Arc::new(GammaSystem::one_point(&spec.gamma));
        let mut tower = PolyTower {
            gamma: spec.gamma.clone(),
            k: spec.k,
            point,
            levels: Vec::new(),
        };
        for (i, lvl) in spec.levels.iter().enumerate() {
            let below = tower.system(i).clone();
            let rho = Cocycle::new(below, lvl.weights.group().clone(), lvl.tables.clone())
                .map_err(|e| Error::NotACocycle(format!("level {}: {e}", i + 1)))?;
            let skew = skew_product(&rho)?;
            tower.levels.push(TowerLevel {
                weights: lvl.weights.clone(),
                skew,
            });
        }
        Ok(tower)
    }

    /// Builds the systems and rejects levels whose cocycle has degree above `k - 1`.
    pub fn new(spec: &TowerSpec) -> Result<Self> {
        let tower = Self::assemble(spec)?;
        for (i, lvl) in tower.levels.iter().enumerate() {
            if !lvl.cocycle().degree_at_most(tower.k as i64 - 1) {
                return Err(Error::DegreeExceeded(format!(
                    "level {} cocycle has degree above {}",
                    i + 1,
                    tower.k as i64 - 1
                )));
            }
        }
        Ok(tower)
    }

    pub fn gamma(&self) -> &FinAbGroup {
        &self.gamma
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn height(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[TowerLevel] {
        &self.levels
    }

    /// `X_i`; `X_0` is a point.
    pub fn system(&self, i: usize) -> &Arc<GammaSystem> {
        if i == 0 {
            &self.point
        } else {
            self.levels[i - 1].skew.system()
        }
    }

    pub fn top(&self) -> &Arc<GammaSystem> {
        self.system(self.height())
    }
}

#[derive(Clone, Debug)]
pub struct LevelReport {
    pub degree: Option<usize>,
    pub degree_ok: bool,
    /// `rho mod U_{>l}` has degree `<= l - 1` for every `l`.
    pub weighted_ok: bool,
    pub exactness: Option<ExactnessReport>,
    /// The degree chain reproduces the declared weights.
    pub weights_match: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct TowerReport {
    pub levels: Vec<LevelReport>,
    pub valid: bool,
}

/// Per-level degree checks, optionally with the exactness chains up to `exactness_d`.
pub fn tower_validate(spec: &TowerSpec, exactness_d: Option<usize>, guard: u128) -> Result<TowerReport> {
    let tower = PolyTower::assemble(spec)?;
    let k = tower.k as i64;
    let mut levels = Vec::new();
    for lvl in tower.levels() {
        let rho = lvl.cocycle();
        let d_max = tower.k + 1;
        let degree = (0..=d_max).find(|&d| rho.degree_at_most(d as i64));
        let degree_ok = rho.degree_at_most(k - 1);
        let weighted_ok = lvl
            .weights
            .chain()
            .iter()
            .enumerate()
            .skip(1)
            .all(|(l, sub)| rho.modulo(sub).degree_at_most(l as i64 - 1));
        let (exactness, weights_match) = match exactness_d {
            Some(d) => {
                let rep = exactness_check(rho, d, guard)?;
                let chain = lvl.weights.chain();
                let matches = (0..=d).all(|i| {
                    let declared = chain.get(i).cloned().unwrap_or_else(|| Subgroup::trivial(lvl.fiber()));
                    rep.degree_chain[i] == declared
                });
                (Some(rep), Some(matches))
            }
            None => (None, None),
        };
        levels.push(LevelReport {
            degree,
            degree_ok,
            weighted_ok,
            exactness,
            weights_match,
        });
    }
    let valid = levels.iter().all(|l| l.degree_ok && l.weighted_ok);
    Ok(TowerReport { levels, valid })
}

/// `Gamma = (Z/2)^n`, `X_1 = (Z/2)^n`, `X_2 = X_1 x Z/2^l` with `rho(e_i, x) = 1 - 2 x_i`.
pub fn hamming_spec(n: usize, k: usize, l: u32) -> Result<TowerSpec> {
    if n == 0 || l == 0 {
        return Err(Error::Precondition("the Hamming model needs n >= 1 and l >= 1".into()));
    }
    if n > 20 || l > 20 {
        return Err(Error::guard("Hamming model size", (n + l as usize) as u128, 40));
    }
    let gamma = FinAbGroup::new(vec![2; n])?;
    let u1 = gamma.clone();
    let first = LevelSpec {
        weights: WeightFiltration::constant(&u1, 1)?,
        tables: (0..n).map(|i| vec![u1.basis(i)]).collect(),
    };
    let m = 1i64 << l;
    let x1 = GammaSystem::translation(&gamma);
    let tables = (0..n)
        .map(|i| {
            (0..x1.len())
                .map(|x| {
                    let bit = u1.elem_at(x).coeffs[i];
                    GroupElem::new(vec![(1 - 2 * bit).rem_euclid(m)])
                })
                .collect()
        })
        .collect();
    let second = LevelSpec {
        weights: WeightFiltration::two_adic(l)?,
        tables,
    };
    Ok(TowerSpec {
        gamma,
        k,
        levels: vec![first, second],
    })
}

/// The Hamming tower with `l = k`.
pub fn hamming_example(k: usize, n: usize) -> Result<PolyTower> {
    if k == 0 {
        return Err(Error::Precondition("the Hamming example needs k >= 1".into()));
    }
    PolyTower::new(&hamming_spec(n, k, k as u32)?)
}

/// The Hamming system `(Z/2)^n x Z/2^l` on its own; point `(x, s)` is `x * 2^l + s`.
pub fn hamming_model(n: usize, l: u32) -> Result<Arc<GammaSystem>> {
    let t = PolyTower::assemble(&hamming_spec(n, l as usize, l)?)?;
    Ok(t.top().clone())
}

fn bits(x: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((x >> (n - 1 - i)) & 1) as u8).collect()
}

/// `prod_i cos(2 pi a c_i 2^k / 2^m)` with `c_i = prod_j h_j[i]`.
pub fn cosine_formula(k: usize, m: u32, a: i64, hs: &[Vec<u8>]) -> f64 {
    let n = hs.first().map_or(0, |h| h.len());
    (0..n)
        .map(|i| {
            let c = hs.iter().all(|h| h[i] == 1) as i64;
            (2.0 * PI * (a * c) as f64 * (1u64 << k) as f64 / (1u64 << m) as f64).cos()
        })
        .product()
}

/// `E_{(x,s)} e(Delta_{h_1} ... Delta_{h_{k+1}} chi)` for `chi(x, s) = a s / 2^m`, computed on
/// the model with `l = max(k, m)`.
pub fn cosine_brute(k: usize, n: usize, m: u32, a: i64, hs: &[Vec<u8>]) -> Result<f64> {
    if hs.len() != k + 1 || hs.iter().any(|h| h.len() != n) {
        return Err(Error::ShapeMismatch {
            expected: k + 1,
            got: hs.len(),
        });
    }
    let l = (k as u32).max(m);
    let sys = hamming_model(n, l)?;
    let q = 1i64 << l;
    let scale = 1i64 << (l - m);
    let mut f = TorusFunction::from_fn(&sys, Torus, |p| TorusValue::new(a * scale * (p as i64 % q), q));
    for h in hs {
        let g = GroupElem::new(h.iter().map(|&b| b as i64).collect());
        f = f.derivative(&g)?;
    }
    let total: f64 = f.values().iter().map(|v| (2.0 * PI * v.to_f64()).cos()).sum();
    Ok(total / sys.len() as f64)
}

#[derive(Clone, Debug, Serialize)]
pub struct CosineRow {
    pub m: u32,
    pub a: i64,
    pub hs: Vec<Vec<u8>>,
    pub formula: f64,
    pub brute: f64,
    pub abs_err: f64,
}

/// Random tuples `(m, a, h_1..h_{k+1})` with `m <= k + 2` and `a` odd.
pub fn cosine_check(k: usize, n: usize, samples: usize, seed: u64) -> Result<Vec<CosineRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let m = rng.gen_range(1..=k as u32 + 2);
            let a = 2 * rng.gen_range(0..(1i64 << m).max(2) / 2) + 1;
            let hs: Vec<Vec<u8>> = (0..=k).map(|_| (0..n).map(|_| rng.gen_range(0..2u8)).collect()).collect();
            let formula = cosine_formula(k, m, a, &hs);
            let brute = cosine_brute(k, n, m, a, &hs)?;
            Ok(CosineRow {
                m,
                a,
                hs,
                formula,
                brute,
                abs_err: (formula - brute).abs(),
            })
        })
        .collect()
}

/// `||e(s/2^{k+1})||_{U^{k+1}}^{2^{k+1}}` on the Hamming model.
#[derive(Clone, Debug, Serialize)]
pub struct BoundaryReport {
    pub k: usize,
    pub n: usize,
    #[serde(serialize_with = "ser_ratio")]
    pub value: Ratio<i128>,
    #[serde(serialize_with = "ser_ratio")]
    pub expected: Ratio<i128>,
    pub matches: bool,
    /// `"brute"` over all points and shift tuples, or `"factored"` from the one-coordinate model.
    pub method: &'static str,
    pub cells: u64,
}

fn ser_ratio<S: serde::Serializer>(r: &Ratio<i128>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

/// Largest `n` for which the boundary value is computed by brute force.
pub const BOUNDARY_BRUTE_MAX_N: usize = 4;

pub fn boundary_average(k: usize, n: usize, guard: u128) -> Result<BoundaryReport> {
    if k == 0 || n == 0 {
        return Err(Error::Precondition("boundary case needs k >= 1 and n >= 1".into()));
    }
    let expected = (Ratio::new(1i128, 1) - Ratio::new(1, 1i128 << k)).pow(n as i32);
    let brute = |n: usize| -> Result<(Ratio<i128>, u64)> {
        let l = k as u32 + 1;
        let sys = hamming_model(n, l)?;
        let q = 1i64 << l;
        let chi = TorusFunction::from_fn(&sys, Torus, |p| TorusValue::new(p as i64 % q, q));
        let pg = phase_gowers_exact(&chi, k + 1, guard)?;
        let v = pg.exact.ok_or_else(|| Error::Precondition("phases outside {0, 1/2}".into()))?;
        Ok((v, pg.cells))
    };
    let (value, method, cells) = if n <= BOUNDARY_BRUTE_MAX_N {
        let (v, c) = brute(n)?;
        (v, "brute", c)
    } else {
        let (v, c) = brute(1)?;
        (v.pow(n as i32), "factored", c)
    };
    Ok(BoundaryReport {
        k,
        n,
        value,
        expected,
        matches: value == expected,
        method,
        cells,
    })
}

/// `(x, s) -> 2^{k-1} binom(s, 2^{k-1}) mod 2^k` on the model with `l = k`.
pub fn hamming_u(n: usize, k: usize) -> Result<GroupValuedFunction> {
    if k == 0 {
        return Err(Error::Precondition("needs k >= 1".into()));
    }
    let sys = hamming_model(n, k as u32)?;
    let q = 1i64 << k;
    let top = 1u64 << (k - 1);
    let u = FinAbGroup::cyclic(q)?;
    Ok(TableFn::from_fn(&sys, u, |p| {
        let s = (p as i64 % q) as u64;
        GroupElem::new(vec![if binom_parity(s, top) { top as i64 } else { 0 }])
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct StraighteningReport {
    pub k: usize,
    pub n: usize,
    pub homomorphisms_tried: usize,
    /// Homomorphisms `phi` (as images of the generators) with `rho_k - phi` a coboundary.
    pub straightenings: Vec<Vec<i64>>,
    pub obstruction_holds: bool,
}

/// Searches for a degree-0 straightening of the carry cocycle
/// `rho_k(e_i, (x, s)) = [s + rho(e_i, x) >= 2^{k-1}]` on `X_1 x Z/2^{k-1}`.
pub fn straightening_search(k: usize, n: usize) -> Result<StraighteningReport> {
    if k < 2 {
        return Err(Error::Precondition("the carry cocycle needs k >= 2".into()));
    }
    let l = k as u32 - 1;
    let sys = hamming_model(n, l)?;
    let q = 1i64 << l;
    let full = 1i64 << k;
    let z2 = FinAbGroup::cyclic(2)?;
    let tables: Vec<Vec<GroupElem>> = (0..n)
        .map(|i| {
            (0..sys.len())
                .map(|p| {
                    let s = p as i64 % q;
                    let x = bits(p / q as usize, n);
                    let r = (1 - 2 * x[i] as i64).rem_euclid(full);
                    let carry = (s + r - (s + r).rem_euclid(q)).rem_euclid(full) / q;
                    GroupElem::new(vec![carry % 2])
                })
                .collect()
        })
        .collect();
    let rho = Cocycle::new(sys.clone(), z2.clone(), tables)?;
    let mut straightenings = Vec::new();
    let total = 1usize << n;
    for mask in 0..total {
        let images: Vec<GroupElem> = bits(mask, n).into_iter().map(|b| GroupElem::new(vec![b as i64])).collect();
        let phi = Cocycle::homomorphism(&sys, z2.clone(), images)?;
        if coboundary_solve(&rho.sub(&phi)).is_some() {
            straightenings.push(bits(mask, n).into_iter().map(i64::from).collect());
        }
    }
    Ok(StraighteningReport {
        k,
        n,
        homomorphisms_tried: total,
        obstruction_holds: straightenings.is_empty(),
        straightenings,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FactsReport {
    pub k: usize,
    pub n: usize,
    /// Degree of each `rho(e_i, .)` as a `Z/2^k`-valued function.
    pub rho_degrees: Vec<Option<usize>>,
    pub rho_degree_ok: bool,
    pub u_degree: Option<usize>,
    pub u_bound: usize,
    pub u_degree_ok: bool,
    /// Minimal period of `s -> binom(s, 2^{k-1}) mod 2`.
    pub binom_period: u64,
    pub cosine: Vec<CosineRow>,
    pub cosine_max_err: f64,
    pub boundary: BoundaryReport,
    pub straightening: Option<StraighteningReport>,
}

pub fn facts_report(k: usize, n: usize, samples: usize, seed: u64, guard: u128) -> Result<FactsReport> {
    let tower = hamming_example(k, n)?;
    let rho = tower.levels()[1].cocycle();
    let rho_degrees: Vec<Option<usize>> = (0..n).map(|i| degree(&rho.generator_fn(i), k + 1)).collect();
    let rho_degree_ok = rho_degrees.iter().all(|d| *d == Some(k - 1));
    let u = hamming_u(n, k)?;
    let u_bound = 1usize << (k - 1);
    let u_degree = degree(&u, u_bound + 1);
    let binom_period = binom_mod2(k as u32, 1 << (k - 1))?.period;
    let cosine = cosine_check(k, n, samples, seed)?;
    let cosine_max_err = cosine.iter().map(|r| r.abs_err).fold(0.0, f64::max);
    let boundary = boundary_average(k, n, guard)?;
    let straightening = if k == 2 && n <= 4 { Some(straightening_search(k, n)?) } else { None };
    Ok(FactsReport {
        k,
        n,
        rho_degree_ok,
        rho_degrees,
        u_degree_ok: u_degree.is_some_and(|d| d <= u_bound),
        u_degree,
        u_bound,
        binom_period,
        cosine,
        cosine_max_err,
        boundary,
        straightening,
    })
}

/// `G(X) = prod_i Poly^i(X_i, U_{i+1})` with its filtration, realized by enumeration.
#[derive(Clone, Debug)]
pub struct TranslationGroup {
    tower: PolyTower,
    /// `polys[i][e]`: table over `X_i` of indices into `U_{i+1}`.
    polys: Vec<Vec<Vec<u32>>>,
    lookup: Vec<HashMap<Vec<u32>, usize>>,
    /// Largest `d <= k + 1` with the element in `Poly^i_{-d}`.
    poly_level: Vec<Vec<usize>>,
    radix: Vec<usize>,
    /// `perms[g][i]`: `V_g` on `X_i`.
    perms: Vec<Vec<Vec<u32>>>,
}

fn compose_level(
    tower: &PolyTower,
    polys: &[Vec<Vec<u32>>],
    comps: &[usize],
) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![vec![0]];
    for i in 1..=tower.height() {
        let u = tower.levels()[i - 1].fiber();
        let nu = u.order() as usize;
        let below = &out[i - 1];
        let table = &polys[i - 1][comps[i - 1]];
        let mut perm = vec![0u32; below.len() * nu];
        for (x, &vx) in below.iter().enumerate() {
            let shift = u.elem_at(table[x] as usize);
            for w in 0..nu {
                let nw = u.index_of(&u.add(&u.elem_at(w), &shift));
                perm[x * nu + w] = (vx as usize * nu + nw) as u32;
            }
        }
        out.push(perm);
    }
    out
}

pub fn poly_translation_group(tower: &PolyTower, guard: u128) -> Result<TranslationGroup> {
    let k = tower.k();
    let mut polys = Vec::new();
    let mut lookup = Vec::new();
    let mut poly_level = Vec::new();
    for i in 0..tower.height() {
        let sys = tower.system(i);
        let lvl = &tower.levels()[i];
        let u = lvl.fiber();
        let subs: Vec<Subgroup> =
            (0..=k + 1).map(|d| exact_poly_group(sys, &lvl.weights, d, guard)).collect::<Result<_>>()?;
        check_guard("Poly^i elements", subs[0].order() as u128, guard)?;
        let r = u.rank();
        let mut tables = Vec::new();
        let mut levels = Vec::new();
        let mut map = HashMap::new();
        for e in subs[0].elements() {
            let table: Vec<u32> =
                (0..sys.len()).map(|x| u.index_of(&GroupElem::new(e.coeffs[x * r..(x + 1) * r].to_vec())) as u32).collect();
            let d = (0..=k + 1).rev().find(|&d| subs[d].contains(&e)).unwrap_or(0);
            map.insert(table.clone(), tables.len());
            tables.push(table);
            levels.push(d);
        }
        polys.push(tables);
        lookup.push(map);
        poly_level.push(levels);
    }
    let radix: Vec<usize> = polys.iter().map(|p| p.len()).collect();
    let order: u128 = radix.iter().map(|&r| r as u128).product();
    let width: u128 = (0..=tower.height()).map(|i| tower.system(i).len() as u128).sum();
    check_guard("translation group tables", order * width, guard)?;
    let mut tg = TranslationGroup {
        tower: tower.clone(),
        polys,
        lookup,
        poly_level,
        radix,
        perms: Vec::new(),
    };
    tg.perms = (0..order as usize).map(|g| compose_level(tower, &tg.polys, &tg.components(g))).collect();
    Ok(tg)
}

#[derive(Clone, Debug, Serialize)]
pub struct AxiomReport {
    pub order: usize,
    /// `|G_d|` for `d = 0..=k+1`.
    pub filtration_orders: Vec<usize>,
    pub closure: bool,
    pub associativity: bool,
    pub identity: bool,
    pub inverses: bool,
    pub action: bool,
    pub nested: bool,
    pub commutators: bool,
    pub top_trivial: bool,
}

impl AxiomReport {
    pub fn ok(&self) -> bool {
        self.closure
            && self.associativity
            && self.identity
            && self.inverses
            && self.action
            && self.nested
            && self.commutators
            && self.top_trivial
    }
}

impl TranslationGroup {
    pub fn tower(&self) -> &PolyTower {
        &self.tower
    }

    pub fn order(&self) -> usize {
        self.radix.iter().product()
    }

    pub fn components(&self, g: usize) -> Vec<usize> {
        let mut out = vec![0; self.radix.len()];
        let mut g = g;
        for i in (0..self.radix.len()).rev() {
            out[i] = g % self.radix[i];
            g /= self.radix[i];
        }
        out
    }

    fn index(&self, comps: &[usize]) -> usize {
        comps.iter().zip(&self.radix).fold(0, |acc, (&c, &r)| acc * r + c)
    }

    /// Value tables `p_i : X_i -> U_{i+1}` (as element indices).
    pub fn tables(&self, g: usize) -> Vec<&[u32]> {
        self.components(g).iter().enumerate().map(|(i, &c)| self.polys[i][c].as_slice()).collect()
    }

    /// `V_g` on the top level.
    pub fn action(&self, g: usize) -> &[u32] {
        self.perms[g].last().expect("at least X_0")
    }

    /// Largest `d <= k + 1` with `g in G_d`.
    pub fn level(&self, g: usize) -> usize {
        self.components(g).iter().enumerate().map(|(i, &c)| self.poly_level[i][c]).min().unwrap_or(self.tower.k() + 1)
    }

    /// Whether every component of `g` is constant.
    pub fn is_vertical(&self, g: usize) -> bool {
        self.tables(g).iter().all(|t| t.windows(2).all(|w| w[0] == w[1]))
    }

    pub fn identity(&self) -> usize {
        let comps: Vec<usize> = (0..self.radix.len())
            .map(|i| {
                let zero = vec![0u32; self.polys[i][0].len()];
                self.lookup[i][&zero]
            })
            .collect();
        self.index(&comps)
    }

    fn table_of(&self, i: usize, table: Vec<u32>) -> Option<usize> {
        self.lookup[i].get(&table).copied()
    }

    /// `p q`, or `None` if the result leaves `G`.
    pub fn try_mul(&self, p: usize, q: usize) -> Option<usize> {
        let pc = self.tables(p);
        let qc = self.tables(q);
        let mut comps = Vec::with_capacity(self.radix.len());
        for i in 0..self.radix.len() {
            let u = self.tower.levels()[i].fiber();
            let v = &self.perms[q][i];
            let table = (0..qc[i].len())
                .map(|x| {
                    let a = u.elem_at(qc[i][x] as usize);
                    let b = u.elem_at(pc[i][v[x] as usize] as usize);
                    u.index_of(&u.add(&a, &b)) as u32
                })
                .collect();
            comps.push(self.table_of(i, table)?);
        }
        Some(self.index(&comps))
    }

    pub fn mul(&self, p: usize, q: usize) -> usize {
        self.try_mul(p, q).expect("G(X) is closed under multiplication")
    }

    /// `p^{-1}`, or `None` if the formula leaves `G`.
    pub fn try_inv(&self, p: usize) -> Option<usize> {
        let pc = self.tables(p);
        let mut comps = Vec::with_capacity(self.radix.len());
        for i in 0..self.radix.len() {
            let u = self.tower.levels()[i].fiber();
            let v = &self.perms[p][i];
            let mut vinv = vec![0u32; v.len()];
            for (x, &y) in v.iter().enumerate() {
                vinv[y as usize] = x as u32;
            }
            let table =
                (0..pc[i].len()).map(|x| u.index_of(&u.neg(&u.elem_at(pc[i][vinv[x] as usize] as usize))) as u32).collect();
            comps.push(self.table_of(i, table)?);
        }
        Some(self.index(&comps))
    }

    /// Exhaustive check of the group, action and filtration axioms.
    pub fn check_axioms(&self, guard: u128) -> Result<AxiomReport> {
        let n = self.order();
        check_guard("translation group triples", (n as u128).pow(3), guard)?;
        let k = self.tower.k();
        let mut table = vec![usize::MAX; n * n];
        let mut closure = true;
        for p in 0..n {
            for q in 0..n {
                match self.try_mul(p, q) {
                    Some(r) => table[p * n + q] = r,
                    None => closure = false,
                }
            }
        }
        let mut associativity = closure;
        if closure {
            'outer: for p in 0..n {
                for q in 0..n {
                    let pq = table[p * n + q];
                    for r in 0..n {
                        if table[pq * n + r] != table[p * n + table[q * n + r]] {
                            associativity = false;
                            break 'outer;
                        }
                    }
                }
            }
        }
        let e = self.identity();
        let ident_perm = |perm: &[u32]| perm.iter().enumerate().all(|(x, &y)| x == y as usize);
        let identity = closure
            && (0..n).all(|p| table[e * n + p] == p && table[p * n + e] == p)
            && self.perms[e].iter().all(|v| ident_perm(v));
        let inverses = closure
            && (0..n).all(|p| match self.try_inv(p) {
                Some(q) => table[p * n + q] == e && table[q * n + p] == e,
                None => false,
            });
        let mut action = closure;
        if closure {
            'act: for p in 0..n {
                for q in 0..n {
                    let vp = self.action(p);
                    let vq = self.action(q);
                    let vpq = self.action(table[p * n + q]);
                    if (0..vp.len()).any(|x| vpq[x] != vp[vq[x] as usize]) {
                        action = false;
                        break 'act;
                    }
                }
            }
        }
        let levels: Vec<usize> = (0..n).map(|g| self.level(g)).collect();
        let filtration_orders: Vec<usize> = (0..=k + 1).map(|d| levels.iter().filter(|&&l| l >= d).count()).collect();
        let nested = filtration_orders.windows(2).all(|w| w[0] >= w[1]) && filtration_orders[0] == n;
        let top_trivial = (0..n).all(|g| g == e || levels[g] < k + 1);
        let mut commutators = closure && inverses;
        if commutators {
            let inv: Vec<usize> = (0..n).map(|p| self.try_inv(p).expect("checked")).collect();
            'comm: for p in 0..n {
                for q in 0..n {
                    let c = table[table[table[p * n + q] * n + inv[p]] * n + inv[q]];
                    let need = (levels[p] + levels[q]).min(k + 1);
                    if c != e && levels[c] < need {
                        commutators = false;
                        break 'comm;
                    }
                }
            }
        }
        Ok(AxiomReport {
            order: n,
            filtration_orders,
            closure,
            associativity,
            identity,
            inverses,
            action,
            nested,
            commutators,
            top_trivial,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TranslationalRepr {
    /// `phi(gamma)` for `gamma` in the canonical order of `Gamma`; `None` if it leaves `G`.
    pub phi: Vec<Option<usize>>,
    pub stabilizer: Vec<usize>,
    pub points: usize,
    pub index_matches: bool,
    pub transitive: bool,
    pub homomorphism: bool,
    pub matches_action: bool,
}

impl TranslationalRepr {
    pub fn ok(&self) -> bool {
        self.phi.iter().all(Option::is_some) && self.index_matches && self.transitive && self.homomorphism && self.matches_action
    }
}

/// `G/Lambda` with `Lambda` the stabilizer of the base point, and `Gamma -> G` via the cocycles.
pub fn translational_repr(tg: &TranslationGroup) -> Result<TranslationalRepr> {
    let tower = tg.tower();
    let gamma = tower.gamma();
    let top = tower.top();
    let n = tg.order();
    let stabilizer: Vec<usize> = (0..n).filter(|&g| tg.action(g)[0] == 0).collect();
    let mut orbit = vec![false; top.len()];
    for g in 0..n {
        orbit[tg.action(g)[0] as usize] = true;
    }
    let transitive = orbit.iter().all(|&b| b);
    let phi: Vec<Option<usize>> = gamma
        .elements()
        .map(|g| {
            let comps: Option<Vec<usize>> = (0..tower.height())
                .map(|i| {
                    let lvl = &tower.levels()[i];
                    let u = lvl.fiber();
                    let table = (0..tower.system(i).len()).map(|x| u.index_of(&lvl.cocycle().eval(&g, x)) as u32).collect();
                    tg.table_of(i, table)
                })
                .collect();
            comps.map(|c| tg.index(&c))
        })
        .collect();
    let mut homomorphism = phi.iter().all(Option::is_some);
    let mut matches_action = homomorphism;
    if homomorphism {
        let ng = gamma.order() as usize;
        for a in 0..ng {
            let perm = top.shift_perm(&gamma.elem_at(a))?;
            if tg.action(phi[a].expect("checked")) != perm.as_slice() {
                matches_action = false;
            }
            for b in 0..ng {
                let s = gamma.index_of(&gamma.add(&gamma.elem_at(a), &gamma.elem_at(b)));
                if tg.try_mul(phi[a].expect("checked"), phi[b].expect("checked")) != phi[s] {
                    homomorphism = false;
                }
            }
        }
    }
    Ok(TranslationalRepr {
        index_matches: n % stabilizer.len() == 0 && n / stabilizer.len() == top.len(),
        stabilizer,
        points: top.len(),
        transitive,
        homomorphism,
        matches_action,
        phi,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub d: usize,
    pub modulus: i64,
    pub functions: usize,
    /// Functions of degree `<= d`.
    pub by_degree: usize,
    /// Functions with `Delta_u P` of degree `<= d - level(u)` for all vertical `u`.
    pub by_vertical: usize,
    /// Functions with `Delta_r P` of degree `<= d - level(r)` for all `r in G`.
    pub by_group: usize,
    /// Functions satisfying the group condition but not of degree `<= d`.
    pub group_not_degree: usize,
    /// Functions of degree `<= d` failing the group condition.
    pub degree_not_group: usize,
    /// Functions of degree `<= d` passing the vertical condition but failing the group condition.
    pub vertical_not_group: usize,
    pub agree: bool,
}

/// Compares degree `<= d` with the `G(X)` derivative conditions over all
/// `P : X -> (1/M)Z/Z` vanishing at the base point.
pub fn structure_check(tg: &TranslationGroup, d: usize, modulus: i64, guard: u128) -> Result<StructureReport> {
    let top = tg.tower().top().clone();
    let n = top.len();
    let count = (modulus as u128).checked_pow(n as u32 - 1).unwrap_or(u128::MAX);
    check_guard("structure check functions", count.saturating_mul(tg.order() as u128), guard)?;
    let group: Vec<(usize, bool, Vec<u32>)> = (0..tg.order())
        .filter(|&g| g != tg.identity())
        .map(|g| (tg.level(g), tg.is_vertical(g), tg.action(g).to_vec()))
        .collect();
    let mut digits = vec![0i64; n];
    let mut functions = 0;
    let mut by_degree = 0;
    let mut by_group = 0;
    let mut by_vertical = 0;
    let mut group_not_degree = 0;
    let mut degree_not_group = 0;
    let mut vertical_not_group = 0;
    loop {
        let f = TorusFunction::from_fn(&top, Torus, |x| TorusValue::new(digits[x], modulus));
        let a = degree_at_most(&f, d as i64);
        let ok: Vec<(bool, bool)> = group
            .iter()
            .map(|(lvl, vert, perm)| (*vert, degree_at_most(&f.pull_back(perm).sub(&f), d as i64 - *lvl as i64)))
            .collect();
        let b = ok.iter().all(|t| t.1);
        let c = ok.iter().filter(|t| t.0).all(|t| t.1);
        functions += 1;
        by_degree += a as usize;
        by_group += b as usize;
        by_vertical += c as usize;
        group_not_degree += (b && !a) as usize;
        degree_not_group += (a && !b) as usize;
        vertical_not_group += (a && c && !b) as usize;
        let mut i = 1;
        while i < n {
            digits[i] += 1;
            if digits[i] < modulus {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    Ok(StructureReport {
        d,
        modulus,
        functions,
        by_degree,
        by_vertical,
        by_group,
        group_not_degree,
        degree_not_group,
        vertical_not_group,
        agree: group_not_degree == 0 && degree_not_group == 0,
    })
}

/// A one-level tower: `Gamma = Z/m` rotating `U = Z/m` by its generator.
pub fn rotation_spec(m: i64) -> Result<TowerSpec> {
    let gamma = FinAbGroup::cyclic(m)?;
    Ok(TowerSpec {
        gamma: gamma.clone(),
        k: 1,
        levels: vec![LevelSpec {
            weights: WeightFiltration::constant(&gamma, 1)?,
            tables: vec![vec![gamma.basis(0)]],
        }],
    })
}
