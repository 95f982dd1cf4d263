use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::abelian::GroupElem;
use crate::error::{Error, Result};
use crate::gowers::{correlate, gowers_norm, mult_derivative, ComplexFunction};
use crate::phase_poly::{default_modulus, poly_group_basis, PolyBasis};
use crate::target::TorusFunction;

/// Largest span the exhaustive strategy will walk.
pub const EXHAUSTIVE_LIMIT: u128 = 1_000_000;

/// Scores within this distance of the best count as ties.
const TIE_TOL: f64 = 1e-12;

/// At most this many tied optima are listed in a report.
pub const MAX_OPTIMA: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exhaustive,
    Greedy,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Greedy => "greedy",
        })
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exhaustive" => Ok(Strategy::Exhaustive),
            "greedy" => Ok(Strategy::Greedy),
            _ => Err(Error::Parse(format!("unknown strategy {s:?} (exhaustive|greedy)"))),
        }
    }
}

/// Knobs for the search. The default matches the CLI defaults.
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub strategy: Strategy,
    pub modulus: Option<i64>,
    pub seed: u64,
    /// Greedy only: derivative directions sampled per level.
    pub samples: usize,
    /// Greedy only: random restarts of the coordinate ascent.
    pub restarts: usize,
    pub guard: u128,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            strategy: Strategy::Exhaustive,
            modulus: None,
            seed: 0,
            samples: 8,
            restarts: 4,
            guard: crate::gowers::DEFAULT_GUARD_CELLS,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub k: usize,
    pub strategy: Strategy,
    pub modulus: i64,
    /// `||f||_{U^{k+1}}`.
    pub norm: f64,
    /// Coordinates of the best polynomial in `basis`.
    pub coords: Vec<i64>,
    pub polynomial: TorusFunction,
    pub correlation: f64,
    /// Polynomials evaluated.
    pub search_size: u128,
    /// Exhaustive only: polynomials attaining the best correlation.
    pub maximizers: u128,
    /// Exhaustive only: the first [`MAX_OPTIMA`] maximizers in lexicographic order.
    pub optima: Vec<Vec<i64>>,
    /// Greedy results are lower bounds on the true maximum.
    pub lower_bound: bool,
    pub basis: PolyBasis,
}

impl SearchReport {
    /// Whether `p` attains the reported correlation (up to `1e-12`).
    pub fn attains(&self, f: &ComplexFunction, p: &TorusFunction) -> bool {
        correlate(f, p).map_or(false, |c| (c.norm() - self.correlation).abs() <= TIE_TOL)
    }
}

struct Evaluator<'a> {
    vals: &'a [Complex64],
    phases: Vec<Complex64>,
    m: i64,
}

impl<'a> Evaluator<'a> {
    fn new(f: &'a ComplexFunction, m: i64) -> Self {
        let phases = (0..m).map(|t| Complex64::from_polar(1.0, -TAU * t as f64 / m as f64)).collect();
        Evaluator {
            vals: f.values(),
            phases,
            m,
        }
    }

    fn score(&self, cur: &[i64]) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (v, &t) in self.vals.iter().zip(cur) {
            s += v * self.phases[t as usize];
        }
        s.norm() / self.vals.len().max(1) as f64
    }

    fn shift(&self, cur: &mut [i64], row: &[i64], times: i64) {
        for (c, &r) in cur.iter_mut().zip(row) {
            *c = (*c + times * r).rem_euclid(self.m);
        }
    }
}

#[derive(Clone, Debug)]
struct ChunkBest {
    score: f64,
    optima: Vec<Vec<i64>>,
    ties: u128,
}

impl ChunkBest {
    fn tie(&mut self, digits: &[i64]) {
        self.ties += 1;
        if self.optima.len() < MAX_OPTIMA {
            self.optima.push(digits.to_vec());
        }
    }
}

fn walk_chunk(ev: &Evaluator, basis: &PolyBasis, prefix: &[i64]) -> ChunkBest {
    let r = basis.orders.len();
    let n = ev.vals.len();
    let mut cur = vec![0i64; n];
    for (j, &c) in prefix.iter().enumerate() {
        ev.shift(&mut cur, basis.numerators(j), c);
    }
    let mut digits = prefix.to_vec();
    digits.resize(r, 0);
    let start = prefix.len();
    let mut best = ChunkBest {
        score: ev.score(&cur),
        optima: vec![digits.clone()],
        ties: 1,
    };
    loop {
        let mut v = r;
        loop {
            if v == start {
                return best;
            }
            v -= 1;
            digits[v] += 1;
            ev.shift(&mut cur, basis.numerators(v), 1);
            if digits[v] < basis.orders[v] {
                break;
            }
            digits[v] = 0;
        }
        let s = ev.score(&cur);
        if s > best.score + TIE_TOL {
            best = ChunkBest {
                score: s,
                optima: vec![digits.clone()],
                ties: 1,
            };
        } else if s >= best.score - TIE_TOL {
            best.tie(&digits);
        }
    }
}

fn exhaustive(f: &ComplexFunction, basis: &PolyBasis) -> Result<(Vec<Vec<i64>>, u128)> {
    let size = basis.span_size();
    if size > EXHAUSTIVE_LIMIT {
        return Err(Error::guard("exhaustive search over the polynomial span (try the greedy strategy)", size, EXHAUSTIVE_LIMIT));
    }
    let ev = Evaluator::new(f, basis.modulus);
    let mut split = 0;
    let mut chunks: u128 = 1;
    while split < basis.orders.len() && chunks < 256 {
        chunks *= basis.orders[split] as u128;
        split += 1;
    }
    let prefixes: Vec<Vec<i64>> = (0..chunks)
        .map(|mut c| {
            let mut p = vec![0i64; split];
            for j in (0..split).rev() {
                let o = basis.orders[j] as u128;
                p[j] = (c % o) as i64;
                c /= o;
            }
            p
        })
        .collect();
    let bests: Vec<ChunkBest> = prefixes.par_iter().map(|p| walk_chunk(&ev, basis, p)).collect();
    let top = bests.iter().map(|b| b.score).fold(f64::NEG_INFINITY, f64::max);
    let mut optima = Vec::new();
    let mut ties = 0;
    for b in bests {
        if b.score >= top - TIE_TOL {
            ties += b.ties;
            let room = MAX_OPTIMA - optima.len();
            optima.extend(b.optima.into_iter().take(room));
        }
    }
    Ok((optima, ties))
}

/// Coordinate ascent on `|E f e(-P)|` starting from `coords`.
fn ascend(ev: &Evaluator, basis: &PolyBasis, coords: &mut [i64], evals: &mut u128) -> f64 {
    let mut cur = basis_values(basis, coords);
    let mut best = ev.score(&cur);
    loop {
        let mut improved = false;
        for j in 0..coords.len() {
            let o = basis.orders[j];
            let row = basis.numerators(j);
            let mut pick = (coords[j], best);
            let mut c = coords[j];
            for _ in 1..o {
                ev.shift(&mut cur, row, 1);
                c = (c + 1) % o;
                let s = ev.score(&cur);
                *evals += 1;
                if s > pick.1 + TIE_TOL {
                    pick = (c, s);
                }
            }
            ev.shift(&mut cur, row, 1);
            ev.shift(&mut cur, row, (pick.0 - coords[j]).rem_euclid(o));
            if pick.0 != coords[j] {
                coords[j] = pick.0;
                best = pick.1;
                improved = true;
            }
        }
        if !improved {
            return best;
        }
    }
}

fn basis_values(basis: &PolyBasis, coords: &[i64]) -> Vec<i64> {
    let m = basis.modulus;
    let mut cur = vec![0i64; basis.domain().len()];
    for (j, &c) in coords.iter().enumerate() {
        for (a, &r) in cur.iter_mut().zip(basis.numerators(j)) {
            *a = (*a + c * r).rem_euclid(m);
        }
    }
    cur
}

/// How many `(h, x)` pairs satisfy `d_h P(x) = Q_h(x) + c_h` for the best constant `c_h`.
fn lift_score(derivs: &[Vec<Vec<i64>>], targets: &[Vec<i64>], coords: &[i64], m: i64) -> usize {
    let mut total = 0;
    for (dh, q) in derivs.iter().zip(targets) {
        let mut counts = vec![0usize; m as usize];
        for (x, &qx) in q.iter().enumerate() {
            let mut v = -qx;
            for (row, &c) in dh.iter().zip(coords) {
                v += c * row[x];
            }
            counts[v.rem_euclid(m) as usize] += 1;
        }
        total += counts.into_iter().max().unwrap_or(0);
    }
    total
}

fn greedy_coords(f: &ComplexFunction, k: usize, m: i64, opts: &SearchOptions, rng: &mut ChaCha8Rng, evals: &mut u128) -> Result<(PolyBasis, Vec<i64>)> {
    let sys = f.domain();
    let basis = poly_group_basis(sys, k, Some(m), opts.guard)?;
    let r = basis.orders.len();
    let ev = Evaluator::new(f, m);
    let mut starts: Vec<Vec<i64>> = vec![vec![0; r]];
    if k >= 1 && r > 0 {
        let gamma = sys.gamma();
        let nonzero: Vec<GroupElem> = gamma.elements().filter(|g| !g.is_zero()).collect();
        let mut dirs = Vec::new();
        for _ in 0..opts.samples.min(nonzero.len()) {
            dirs.push(nonzero[rng.gen_range(0..nonzero.len())].clone());
        }
        let mut derivs = Vec::with_capacity(dirs.len());
        let mut targets = Vec::with_capacity(dirs.len());
        for h in &dirs {
            let g = mult_derivative(f, h)?;
            let (qb, qc) = greedy_coords(&g, k - 1, m, &SearchOptions { restarts: 1, ..*opts }, rng, evals)?;
            targets.push(basis_values(&qb, &qc));
            let perm = sys.shift_perm(h)?;
            derivs.push(
                (0..r)
                    .map(|j| {
                        let row = basis.numerators(j);
                        perm.iter().zip(row).map(|(&y, &v)| (row[y as usize] - v).rem_euclid(m)).collect()
                    })
                    .collect::<Vec<Vec<i64>>>(),
            );
        }
        let mut lift = vec![0i64; r];
        let mut best = lift_score(&derivs, &targets, &lift, m);
        loop {
            let mut improved = false;
            for j in 0..r {
                let keep = lift[j];
                for c in 0..basis.orders[j] {
                    lift[j] = c;
                    *evals += 1;
                    let s = lift_score(&derivs, &targets, &lift, m);
                    if s > best {
                        best = s;
                        improved = true;
                        break;
                    }
                    lift[j] = keep;
                }
            }
            if !improved {
                break;
            }
        }
        starts.push(lift);
    }
    for _ in 0..opts.restarts {
        starts.push(basis.orders.iter().map(|&o| rng.gen_range(0..o)).collect());
    }
    let mut best: Option<(f64, Vec<i64>)> = None;
    for mut c in starts {
        let s = ascend(&ev, &basis, &mut c, evals);
        if best.as_ref().map_or(true, |(b, _)| s > *b + TIE_TOL) {
            best = Some((s, c));
        }
    }
    let (_, coords) = best.expect("at least one start");
    Ok((basis, coords))
}

/// Searches the degree-`<= k` phase polynomials (mod constants) for the best correlate of `f`.
pub fn correlation_search(f: &ComplexFunction, k: usize, opts: &SearchOptions) -> Result<SearchReport> {
    let norm = gowers_norm(f, k + 1, opts.guard)?;
    let m = match opts.modulus {
        Some(m) => m,
        None => default_modulus(f.domain(), k)?,
    };
    let (basis, coords, search_size, maximizers, optima) = match opts.strategy {
        Strategy::Exhaustive => {
            let basis = poly_group_basis(f.domain(), k, Some(m), opts.guard)?;
            let (optima, ties) = exhaustive(f, &basis)?;
            let size = basis.span_size();
            (basis, optima[0].clone(), size, ties, optima)
        }
        Strategy::Greedy => {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            let mut evals = 0;
            let (basis, coords) = greedy_coords(f, k, m, opts, &mut rng, &mut evals)?;
            (basis, coords, evals, 0, vec![])
        }
    };
    let polynomial = basis.combine(&coords);
    let correlation = correlate(f, &polynomial)?.norm();
    Ok(SearchReport {
        k,
        strategy: opts.strategy,
        modulus: basis.modulus,
        norm,
        coords,
        polynomial,
        correlation,
        search_size,
        maximizers,
        optima,
        lower_bound: opts.strategy == Strategy::Greedy,
        basis,
    })
}

#[derive(Clone, Debug)]
pub struct InverseReport {
    pub delta: f64,
    pub norm: f64,
    pub above_delta: bool,
    pub correlation: f64,
    pub search: SearchReport,
}

/// Runs the search and checks `|corr| <= ||f||_{U^{k+1}} + 1e-9`.
pub fn inverse_report(f: &ComplexFunction, delta: f64, k: usize, opts: &SearchOptions) -> Result<InverseReport> {
    if !f.is_one_bounded(1e-9) {
        return Err(Error::Precondition("f must be 1-bounded".into()));
    }
    let search = correlation_search(f, k, opts)?;
    if search.correlation > search.norm + 1e-9 {
        return Err(Error::Precondition(format!(
            "correlation {} exceeds the U^{} norm {}",
            search.correlation,
            k + 1,
            search.norm
        )));
    }
    Ok(InverseReport {
        delta,
        norm: search.norm,
        above_delta: search.norm > delta,
        correlation: search.correlation,
        search,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::abelian::{FinAbGroup, TorusValue};
    use crate::systems::GammaSystem;
    use crate::target::Torus;

    fn cube4() -> Arc<GammaSystem> {
        Arc::new(GammaSystem::translation(&FinAbGroup::new(vec![2; 4]).unwrap()))
    }

    fn quad(s: &Arc<GammaSystem>) -> TorusFunction {
        TorusFunction::from_fn(s, Torus, |x| {
            let b = |i: usize| ((x >> i) & 1) as i64;
            TorusValue::new(b(0) * b(1) * 2 + b(2) * b(3) * 2 + b(0) + 2 * b(3), 4)
        })
    }

    fn flipped(p: &TorusFunction, pts: &[usize]) -> ComplexFunction {
        let mut f = ComplexFunction::phase(p);
        for &x in pts {
            f.values_mut()[x] = -f.values()[x];
        }
        f
    }

    #[test]
    fn planted_phase_is_found() {
        let s = cube4();
        let p = quad(&s);
        let rep = correlation_search(&ComplexFunction::phase(&p), 2, &SearchOptions::default()).unwrap();
        assert!((rep.correlation - 1.0).abs() < 1e-12);
        assert!((rep.norm - 1.0).abs() < 1e-9);
        assert!(rep.polynomial.sub(&p).is_constant());
        assert_eq!(rep.maximizers, 1);
    }

    #[test]
    fn two_flips_tie() {
        let s = cube4();
        let p = quad(&s);
        let f = flipped(&p, &[3, 12]);
        let rep = correlation_search(&f, 2, &SearchOptions::default()).unwrap();
        assert!((rep.correlation - 0.75).abs() < 1e-12);
        assert_eq!(rep.maximizers, 8);
        assert_eq!(rep.optima.len(), 8);
        let want = rep.basis.coords(&p).unwrap();
        assert!(rep.optima.contains(&want));
        assert!(rep.optima.windows(2).all(|w| w[0] < w[1]));
        for c in &rep.optima {
            assert!(rep.attains(&f, &rep.basis.combine(c)));
        }
    }

    #[test]
    fn one_flip() {
        let s = cube4();
        let p = quad(&s);
        let f = flipped(&p, &[5]);
        let rep = correlation_search(&f, 2, &SearchOptions::default()).unwrap();
        assert!((rep.correlation - 0.875).abs() < 1e-12);
        assert!(rep.polynomial.sub(&p).is_constant());
        let g = correlation_search(&f, 2, &SearchOptions { strategy: Strategy::Greedy, ..Default::default() }).unwrap();
        assert!(g.lower_bound);
        assert!(g.correlation <= rep.correlation + 1e-12);
        assert!((g.correlation - correlate(&f, &g.polynomial).unwrap().norm()).abs() < 1e-15);
    }

    #[test]
    fn zero_and_characters() {
        let s = cube4();
        let z = ComplexFunction::constant(&s, Complex64::new(0.0, 0.0));
        let rep = inverse_report(&z, 0.1, 2, &SearchOptions::default()).unwrap();
        assert_eq!(rep.correlation, 0.0);
        assert!(!rep.above_delta);
        let chi = ComplexFunction::phase(&TorusFunction::from_fn(&s, Torus, |x| TorusValue::new((x & 1) as i64 + (x >> 3) as i64, 2)));
        let rep = inverse_report(&chi, 0.5, 1, &SearchOptions::default()).unwrap();
        assert!((rep.norm - 1.0).abs() < 1e-9 && (rep.correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn span_limit() {
        let s = Arc::new(GammaSystem::translation(&FinAbGroup::new(vec![2; 6]).unwrap()));
        let f = ComplexFunction::constant(&s, Complex64::new(1.0, 0.0));
        let err = correlation_search(&f, 2, &SearchOptions::default()).unwrap_err();
        assert!(err.is_guard() && err.to_string().contains("greedy"), "{err}");
        let rep = correlation_search(&f, 2, &SearchOptions { strategy: Strategy::Greedy, ..Default::default() }).unwrap();
        assert!((rep.correlation - 1.0).abs() < 1e-12);
    }

    #[test]
    fn strategy_names() {
        assert_eq!("greedy".parse::<Strategy>().unwrap(), Strategy::Greedy);
        assert!("best".parse::<Strategy>().is_err());
        assert_eq!(Strategy::Exhaustive.to_string(), "exhaustive");
    }

}
