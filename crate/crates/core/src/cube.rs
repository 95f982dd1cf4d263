use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;

use crate::error::{check_guard, Error, Result};
use crate::gowers::{CSum, ComplexFunction};
use crate::systems::{coboundary_solve, Cocycle, GammaSystem};
use crate::target::{TableFn, Target};

/// Default `|X|^{2^k}` limit for cube constructions.
pub const DEFAULT_CUBE_GUARD: u128 = 10_000_000;

/// The support of `mu^{[k]}` with exact weights and the diagonal action.
/// Vertex `w` of a tuple sits at offset `w`; the top bit of `w` selects the half.
#[derive(Clone, Debug)]
pub struct CubeSystem {
    base: Arc<GammaSystem>,
    k: usize,
    tuples: Vec<u32>,
    weights: Vec<Ratio<i128>>,
    system: Arc<GammaSystem>,
}

fn cube_cells(n: usize, k: usize) -> u128 {
    let mut c: u128 = 1;
    for _ in 0..(1u64 << k.min(7)) {
        c = c.saturating_mul(n as u128);
    }
    c
}

impl CubeSystem {
    fn level0(base: &Arc<GammaSystem>) -> Self {
        let n = base.len();
        CubeSystem {
            base: base.clone(),
            k: 0,
            tuples: (0..n as u32).collect(),
            weights: vec![Ratio::new(1, n as i128); n],
            system: base.clone(),
        }
    }

    fn next(&self) -> Self {
        let width = 1usize << self.k;
        let sys = &self.system;
        let mut pos = vec![0u32; sys.len()];
        let mut offsets = Vec::with_capacity(sys.orbits().len());
        let mut total = 0usize;
        for orbit in sys.orbits() {
            for (i, &s) in orbit.iter().enumerate() {
                pos[s as usize] = i as u32;
            }
            offsets.push(total);
            total += orbit.len() * orbit.len();
        }
        let mut tuples = Vec::with_capacity(total * width * 2);
        let mut weights = Vec::with_capacity(total);
        for orbit in sys.orbits() {
            let mass: Ratio<i128> = orbit.iter().map(|&s| self.weights[s as usize]).sum();
            for &s in orbit {
                for &t in orbit {
                    let s = s as usize;
                    let t = t as usize;
                    tuples.extend_from_slice(&self.tuples[s * width..(s + 1) * width]);
                    tuples.extend_from_slice(&self.tuples[t * width..(t + 1) * width]);
                    weights.push(self.weights[s] * self.weights[t] / mass);
                }
            }
        }
        let action = sys
            .generators()
            .iter()
            .map(|perm| {
                let mut out = vec![0u32; total];
                for (o, orbit) in sys.orbits().iter().enumerate() {
                    let len = orbit.len();
                    for (a, &s) in orbit.iter().enumerate() {
                        for (b, &t) in orbit.iter().enumerate() {
                            let ts = pos[perm[s as usize] as usize] as usize;
                            let tt = pos[perm[t as usize] as usize] as usize;
                            out[offsets[o] + a * len + b] = (offsets[o] + ts * len + tt) as u32;
                        }
                    }
                }
                out
            })
            .collect();
        let system = Arc::new(GammaSystem::from_parts_unchecked(total, sys.gamma().clone(), action));
        CubeSystem {
            base: self.base.clone(),
            k: self.k + 1,
            tuples,
            weights,
            system,
        }
    }

    pub fn base(&self) -> &Arc<GammaSystem> {
        &self.base
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn tuple(&self, i: usize) -> &[u32] {
        let w = 1usize << self.k;
        &self.tuples[i * w..(i + 1) * w]
    }

    pub fn weights(&self) -> &[Ratio<i128>] {
        &self.weights
    }

    /// The diagonal action on the support.
    pub fn system(&self) -> &Arc<GammaSystem> {
        &self.system
    }

    /// One row per support tuple: vertices then the weight as `p/q`.
    pub fn to_csv(&self) -> String {
        let w = 1usize << self.k;
        let mut out = String::new();
        let header: Vec<String> = (0..w).map(|i| format!("x{i}")).chain(["weight".to_string()]).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for i in 0..self.len() {
            for v in self.tuple(i) {
                let _ = write!(out, "{v},");
            }
            let r = self.weights[i];
            let _ = writeln!(out, "{}/{}", r.numer(), r.denom());
        }
        out
    }
}

pub fn cube_system(base: &Arc<GammaSystem>, k: usize, guard: u128) -> Result<CubeSystem> {
    let mut cache = CubeCache::new(base.clone(), guard);
    cache.get(k).cloned()
}

/// Incrementally built cube systems over one base.
#[derive(Debug)]
pub struct CubeCache {
    base: Arc<GammaSystem>,
    guard: u128,
    levels: Vec<CubeSystem>,
}

impl CubeCache {
    pub fn new(base: Arc<GammaSystem>, guard: u128) -> Self {
        CubeCache {
            base,
            guard,
            levels: Vec::new(),
        }
    }

    pub fn base(&self) -> &Arc<GammaSystem> {
        &self.base
    }

    pub fn get(&mut self, k: usize) -> Result<&CubeSystem> {
        check_guard("cube tuples |X|^(2^k)", cube_cells(self.base.len(), k), self.guard)?;
        if self.levels.is_empty() {
            self.levels.push(CubeSystem::level0(&self.base));
        }
        while self.levels.len() <= k {
            let next = self.levels.last().expect("nonempty").next();
            self.levels.push(next);
        }
        Ok(&self.levels[k])
    }
}

/// `(int prod_w C^{|w|} f(x_w) dmu^{[k]})^{1/2^k}`.
pub fn hk_seminorm(f: &ComplexFunction, k: usize, cache: &mut CubeCache) -> Result<f64> {
    if k == 0 {
        return Err(Error::Precondition("seminorms need k >= 1".into()));
    }
    if **f.domain() != **cache.base() {
        return Err(Error::Precondition("function and cube live on different systems".into()));
    }
    let cube = cache.get(k)?;
    let vals = f.values();
    let mut s = CSum::default();
    for (i, w) in cube.weights().iter().enumerate() {
        let mut prod = Complex64::new(1.0, 0.0);
        for (omega, &x) in cube.tuple(i).iter().enumerate() {
            let v = vals[x as usize];
            prod *= if omega.count_ones() & 1 == 1 { v.conj() } else { v };
        }
        s.add(prod * (*w.numer() as f64 / *w.denom() as f64));
    }
    let z = s.value();
    if z.re < -1e-12 || z.im.abs() > 1e-9 {
        return Err(Error::Precondition(format!("cube integral {z} is not a nonnegative real")));
    }
    Ok(z.re.max(0.0).powf(1.0 / (1u64 << k) as f64))
}

/// `sum_w (-1)^{|w|} f(x_w)` on the support.
pub fn delta_cube<T: Target>(f: &TableFn<T>, cube: &CubeSystem) -> TableFn<T> {
    let tg = f.target().clone();
    let vals = f.values();
    TableFn::from_fn(cube.system(), tg.clone(), |i| {
        let mut acc = tg.zero();
        for (omega, &x) in cube.tuple(i).iter().enumerate() {
            let v = &vals[x as usize];
            acc = if omega.count_ones() & 1 == 1 { tg.sub(&acc, v) } else { tg.add(&acc, v) };
        }
        acc
    })
}

/// Whether `Delta^{[k]} rho` is a coboundary on every orbit of the cube support.
pub fn type_leq<T: Target>(rho: &Cocycle<T>, k: usize, cache: &mut CubeCache) -> Result<bool> {
    if **rho.system() != **cache.base() {
        return Err(Error::Precondition("cocycle and cube live on different systems".into()));
    }
    if k == 0 {
        return Ok(coboundary_solve(rho).is_some());
    }
    let cube = cache.get(k)?;
    let tables = (0..rho.tables().len())
        .map(|i| delta_cube(&rho.generator_fn(i), cube).values().to_vec())
        .collect();
    let lifted = Cocycle::new_unchecked(cube.system().clone(), rho.target().clone(), tables);
    Ok(coboundary_solve(&lifted).is_some())
}
