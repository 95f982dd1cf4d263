use std::collections::HashMap;
use std::sync::Arc;

use crate::abelian::{kernel_mod, FinAbGroup, GroupElem, Subgroup, TorusValue};
use crate::error::{check_guard, Error, Result};
use crate::systems::GammaSystem;
use crate::target::{TableFn, Target, Torus, TorusFunction};

/// `f(T^g x) - f(x)`.
pub fn derivative<T: Target>(f: &TableFn<T>, g: &GroupElem) -> Result<TableFn<T>> {
    f.derivative(g)
}

/// Walks nondecreasing generator multisets level by level, deduplicating tables.
/// Returns the number of derivative steps after which everything vanished, if `<= max_steps`.
fn vanishing_depth<T: Target>(f: &TableFn<T>, max_steps: usize) -> Option<usize> {
    if f.is_zero() {
        return Some(0);
    }
    let r = f.domain().gamma().rank();
    let mut frontier: Vec<(usize, TableFn<T>)> = vec![(0, f.clone())];
    for step in 1..=max_steps {
        let mut best: HashMap<Vec<T::Elem>, usize> = HashMap::new();
        let mut order = Vec::new();
        for (last, g) in &frontier {
            for i in *last..r {
                let h = g.derivative_gen(i);
                if h.is_zero() {
                    continue;
                }
                let key = h.values().to_vec();
                match best.get_mut(&key) {
                    Some(l) => *l = (*l).min(i),
                    None => {
                        best.insert(key.clone(), i);
                        order.push((key, h));
                    }
                }
            }
        }
        if order.is_empty() {
            return Some(step);
        }
        frontier = order.into_iter().map(|(key, h)| (best[&key], h)).collect();
    }
    None
}

/// Whether all `(d+1)`-fold generator derivatives vanish; `d < 0` asks for the zero function.
pub fn degree_at_most<T: Target>(f: &TableFn<T>, d: i64) -> bool {
    if d < 0 {
        return f.is_zero();
    }
    vanishing_depth(f, d as usize + 1).is_some()
}

/// Least `k >= 0` with all `(k+1)`-fold generator derivatives zero; `None` past `d_max`.
pub fn degree<T: Target>(f: &TableFn<T>, d_max: usize) -> Option<usize> {
    vanishing_depth(f, d_max + 1).map(|s| s.saturating_sub(1))
}

/// Generators of the group of degree-`<= k` polynomials with values in `(1/M)Z/Z`,
/// normalized to vanish at the least point of every orbit.
#[derive(Clone, Debug)]
pub struct PolyBasis {
    pub modulus: i64,
    pub k: usize,
    pub basis: Vec<TorusFunction>,
    /// Additive order of each basis element.
    pub orders: Vec<i64>,
    raw: Vec<Vec<i64>>,
    domain: Arc<GammaSystem>,
}

impl PolyBasis {
    /// Number of distinct polynomials in the span.
    pub fn span_size(&self) -> u128 {
        self.orders.iter().map(|&o| o as u128).product()
    }

    pub fn domain(&self) -> &Arc<GammaSystem> {
        &self.domain
    }

    /// Numerators (over `modulus`) of the `i`-th basis element.
    pub fn numerators(&self, i: usize) -> &[i64] {
        &self.raw[i]
    }

    /// `sum c_i b_i`.
    pub fn combine(&self, coeffs: &[i64]) -> TorusFunction {
        let m = self.modulus;
        let n = self.domain.len();
        let mut acc = vec![0i64; n];
        for (c, row) in coeffs.iter().zip(&self.raw) {
            for (a, &v) in acc.iter_mut().zip(row) {
                *a = (*a + c.rem_euclid(m) * v) % m;
            }
        }
        TorusFunction::new_unchecked(self.domain.clone(), Torus, acc.into_iter().map(|a| TorusValue::new(a, m)).collect())
    }

    /// Coordinates of `p` in the basis, if it lies in the span.
    pub fn coords(&self, p: &TorusFunction) -> Option<Vec<i64>> {
        let g = FinAbGroup::new(self.orders.clone()).ok()?;
        let amb = FinAbGroup::new(vec![self.modulus; self.domain.len()]).ok()?;
        let images = self.raw.iter().map(|r| GroupElem::new(r.clone())).collect();
        let hom = crate::abelian::Hom::new(g, amb, images).ok()?;
        let target: Vec<i64> = p
            .values()
            .iter()
            .map(|v| {
                let q = self.modulus / v.denom();
                (self.modulus % v.denom() == 0).then_some(v.numer() * q)
            })
            .collect::<Option<_>>()?;
        hom.solve(&GroupElem::new(target)).map(|e| e.coeffs)
    }
}

/// Coefficients of `prod_j (T_{i_j} - 1)` at `x` as `(point, sign)` pairs.
fn alternating_terms(sys: &GammaSystem, gens: &[usize], x: usize) -> Vec<(usize, i64)> {
    let mut terms = vec![(x, 1i64)];
    for &i in gens {
        let mut next = Vec::with_capacity(terms.len() * 2);
        for &(y, s) in &terms {
            next.push((sys.step(i, y), s));
            next.push((y, -s));
        }
        terms = next;
    }
    terms
}

fn multisets(r: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(len);
    fn rec(r: usize, len: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == len {
            out.push(cur.clone());
            return;
        }
        for i in start..r {
            cur.push(i);
            rec(r, len, i, cur, out);
            cur.pop();
        }
    }
    rec(r, len, 0, &mut cur, &mut out);
    out
}

/// Default value modulus `exponent(Gamma)^k`.
pub fn default_modulus(sys: &GammaSystem, k: usize) -> Result<i64> {
    let e = sys.gamma().exponent();
    e.checked_pow(k as u32).ok_or(Error::Overflow("computing the default value modulus"))
}

pub fn poly_group_basis(sys: &Arc<GammaSystem>, k: usize, modulus: Option<i64>, guard: u128) -> Result<PolyBasis> {
    let m = match modulus {
        Some(m) if m >= 1 => m,
        Some(m) => return Err(Error::InvalidGroup(format!("value modulus {m} must be positive"))),
        None => default_modulus(sys, k)?,
    };
    let n = sys.len();
    let sets = multisets(sys.gamma().rank(), k + 1);
    let rows_needed = (sets.len() * n + sys.orbits().len()) as u128;
    check_guard("polynomial kernel cells", rows_needed * n as u128, guard)?;
    if m == 1 {
        return Ok(PolyBasis {
            modulus: 1,
            k,
            basis: vec![],
            orders: vec![],
            raw: vec![],
            domain: sys.clone(),
        });
    }
    let mut rows: Vec<Vec<i64>> = Vec::with_capacity(rows_needed as usize);
    for gens in &sets {
        for x in 0..n {
            let mut row = vec![0i64; n];
            for (y, s) in alternating_terms(sys, gens, x) {
                row[y] += s;
            }
            if row.iter().any(|&v| v.rem_euclid(m) != 0) {
                rows.push(row.into_iter().map(|v| v.rem_euclid(m)).collect());
            }
        }
    }
    for orbit in sys.orbits() {
        let mut row = vec![0i64; n];
        row[orbit[0] as usize] = 1;
        rows.push(row);
    }
    rows.sort();
    rows.dedup();
    let amb = FinAbGroup::new(vec![m; n])?;
    let kernel: Vec<GroupElem> = kernel_mod(&rows, n, m)
        .into_iter()
        .filter(|(_, ord)| *ord > 1)
        .map(|(v, _)| GroupElem::new(v))
        .collect();
    let iso = Subgroup::span(&amb, kernel)?.structure();
    let mut raw = Vec::new();
    let mut orders = Vec::new();
    for (b, &o) in iso.basis().iter().zip(iso.group().moduli()) {
        if o > 1 {
            raw.push(b.coeffs.clone());
            orders.push(o);
        }
    }
    let basis = raw
        .iter()
        .map(|r| TorusFunction::new_unchecked(sys.clone(), Torus, r.iter().map(|&v| TorusValue::new(v, m)).collect()))
        .collect();
    Ok(PolyBasis {
        modulus: m,
        k,
        basis,
        orders,
        raw,
        domain: sys.clone(),
    })
}

/// One linear condition `sum c_v x_v == 0` in `U / mods[modulo]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub(crate) struct Constraint {
    pub terms: Vec<(usize, i64)>,
    pub modulo: usize,
}

impl Constraint {
    pub(crate) fn new(mut terms: Vec<(usize, i64)>, modulo: usize) -> Self {
        terms.sort_unstable();
        let mut merged: Vec<(usize, i64)> = Vec::with_capacity(terms.len());
        for (v, c) in terms {
            match merged.last_mut() {
                Some((w, d)) if *w == v => *d += c,
                _ => merged.push((v, c)),
            }
        }
        merged.retain(|&(_, c)| c != 0);
        Constraint { terms: merged, modulo }
    }
}

/// `{x in U^nvars : every constraint holds}`.
pub(crate) fn constraint_kernel(
    u: &FinAbGroup,
    nvars: usize,
    mods: &[Subgroup],
    rows: Vec<Constraint>,
    guard: u128,
) -> Result<Subgroup> {
    let domain = u.power(nvars)?;
    let quotients: Vec<_> = mods.iter().map(|m| m.quotient()).collect();
    let mut rows: Vec<Constraint> = rows
        .into_iter()
        .map(|mut r| {
            let e = quotients[r.modulo].group().exponent().max(1);
            for t in &mut r.terms {
                t.1 = t.1.rem_euclid(e);
            }
            r.terms.retain(|t| t.1 != 0);
            r
        })
        .filter(|r| !r.terms.is_empty() && quotients[r.modulo].group().order() > 1)
        .collect();
    rows.sort();
    rows.dedup();
    let mut offsets = Vec::with_capacity(rows.len());
    let mut moduli = Vec::new();
    for r in &rows {
        offsets.push(moduli.len());
        moduli.extend_from_slice(quotients[r.modulo].group().moduli());
    }
    check_guard("constraint matrix cells", moduli.len() as u128 * (nvars * u.rank()) as u128, guard)?;
    if moduli.is_empty() {
        return Ok(Subgroup::whole(&domain));
    }
    let codomain = FinAbGroup::new(moduli.clone())?;
    let proj: Vec<Vec<GroupElem>> =
        quotients.iter().map(|q| (0..u.rank()).map(|c| q.project(&u.basis(c))).collect()).collect();
    let mut images = vec![vec![0i64; moduli.len()]; nvars * u.rank()];
    for (r, off) in rows.iter().zip(&offsets) {
        for &(v, a) in &r.terms {
            for c in 0..u.rank() {
                let img = &proj[r.modulo][c];
                let dst = &mut images[v * u.rank() + c];
                for (t, &x) in img.coeffs.iter().enumerate() {
                    let m = moduli[off + t];
                    dst[off + t] = (dst[off + t] + (a % m) * x) % m;
                }
            }
        }
    }
    let hom = crate::abelian::Hom::new(domain, codomain, images.into_iter().map(GroupElem::new).collect())?;
    Ok(hom.kernel())
}

/// Rows forcing `P mod mods[modulo]` to have degree `<= bound` (zero when `bound < 0`),
/// where the value of `P` at point `x` is variable `var(x)`.
pub(crate) fn degree_rows(
    sys: &GammaSystem,
    bound: i64,
    modulo: usize,
    var: impl Fn(usize) -> Vec<(usize, i64)>,
) -> Vec<Constraint> {
    let n = sys.len();
    if bound < 0 {
        return (0..n).map(|x| Constraint::new(var(x), modulo)).collect();
    }
    let mut rows = Vec::new();
    for gens in multisets(sys.gamma().rank(), bound as usize + 1) {
        for y in 0..n {
            let mut terms = Vec::new();
            for (z, s) in alternating_terms(sys, &gens, y) {
                terms.extend(var(z).into_iter().map(|(v, c)| (v, c * s)));
            }
            let c = Constraint::new(terms, modulo);
            if !c.terms.is_empty() {
                rows.push(c);
            }
        }
    }
    rows
}

/// Maps `P : X -> U` with `P mod U_{>l}` of degree `<= l - d` for every level `l`,
/// as a subgroup of `U^{|X|}`.
pub fn exact_poly_group(
    sys: &GammaSystem,
    weights: &crate::systems::WeightFiltration,
    d: usize,
    guard: u128,
) -> Result<Subgroup> {
    let u = weights.group();
    let chain = weights.chain();
    let mut rows = Vec::new();
    for l in 1..chain.len() {
        rows.extend(degree_rows(sys, l as i64 - d as i64, l, |x| vec![(x, 1)]));
    }
    constraint_kernel(u, sys.len(), chain, rows, guard)
}

/// `s -> binom(s, d)/2 mod 1` on `Z/2^l`, with its minimal period.
#[derive(Clone, Debug)]
pub struct BinomTable {
    pub function: TorusFunction,
    pub period: u64,
}

/// `binom(s, d)` mod 2 by Lucas' theorem.
pub fn binom_parity(s: u64, d: u64) -> bool {
    s & d == d
}

pub fn binom_mod2(l: u32, d: u64) -> Result<BinomTable> {
    if l >= 40 {
        return Err(Error::guard("binomial table size", 1u128 << l, 1u128 << 40));
    }
    let size = 1u64 << l;
    let vals: Vec<bool> = (0..size).map(|s| binom_parity(s, d)).collect();
    if (0..size).any(|s| binom_parity(s + size, d) != vals[s as usize]) {
        return Err(Error::Precondition(format!(
            "binom(s, {d}) mod 2 is not periodic modulo 2^{l}"
        )));
    }
    let mut period = size;
    while period > 1 && (0..size).all(|s| vals[s as usize] == vals[(s % (period / 2)) as usize]) {
        period /= 2;
    }
    let g = FinAbGroup::cyclic(size as i64)?;
    let sys = Arc::new(GammaSystem::translation(&g));
    let function = TorusFunction::from_fn(&sys, Torus, |s| {
        if vals[s] {
            TorusValue::new(1, 2)
        } else {
            TorusValue::ZERO
        }
    });
    Ok(BinomTable { function, period })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tsys(moduli: Vec<i64>) -> Arc<GammaSystem> {
        Arc::new(GammaSystem::translation(&FinAbGroup::new(moduli).unwrap()))
    }

    fn tf(sys: &Arc<GammaSystem>, vals: &[(i64, i64)]) -> TorusFunction {
        TorusFunction::new(sys.clone(), Torus, vals.iter().map(|&(p, q)| TorusValue::new(p, q)).collect()).unwrap()
    }

    #[test]
    fn degree_examples() {
        let z4 = tsys(vec![4]);
        assert_eq!(degree(&tf(&z4, &[(1, 3); 4]), 5), Some(0));
        assert_eq!(degree(&tf(&z4, &[(0, 4), (1, 4), (2, 4), (3, 4)]), 5), Some(1));
        let z2 = tsys(vec![2]);
        let f = tf(&z2, &[(0, 1), (1, 4)]);
        assert_eq!(degree(&f, 5), Some(2));
        assert_eq!(degree(&f, 1), None);
        assert_eq!(derivative(&f, &GroupElem::new(vec![1])).unwrap(), tf(&z2, &[(1, 4), (3, 4)]));
        assert!(degree_at_most(&TorusFunction::zero(&z2, Torus), -1));
        assert!(!degree_at_most(&f, -1));
    }

    #[test]
    fn basis_examples() {
        let z2 = tsys(vec![2]);
        let b = poly_group_basis(&z2, 1, Some(2), 1 << 20).unwrap();
        assert_eq!(b.orders, vec![2]);
        assert_eq!(b.basis[0], tf(&z2, &[(0, 1), (1, 2)]));
        assert!(poly_group_basis(&z2, 0, Some(5), 1 << 20).unwrap().basis.is_empty());
        let b = poly_group_basis(&z2, 2, Some(4), 1 << 20).unwrap();
        assert!(b.coords(&tf(&z2, &[(0, 1), (1, 4)])).is_some());
        let v = poly_group_basis(&tsys(vec![2, 2, 2, 2]), 2, None, 1 << 24).unwrap();
        assert_eq!(v.span_size(), 1 << 14);
    }

    #[test]
    fn binomials() {
        let t = binom_mod2(2, 1).unwrap();
        assert_eq!(t.period, 2);
        assert_eq!(binom_mod2(2, 2).unwrap().period, 4);
        assert!(binom_mod2(2, 4).is_err());
        assert_eq!(binom_mod2(3, 4).unwrap().period, 8);
    }
}
