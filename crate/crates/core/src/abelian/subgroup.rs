use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};

use num_integer::Integer;

use super::group::{FinAbGroup, GroupElem};
use super::linalg::{diagonalize, mulmod, Hom};
use crate::error::{check_guard, Error, Result};

/// A subgroup of a finite abelian group, kept in a canonical echelon form.
///
/// Row `c` of the canonical matrix has zeros before column `c`, a pivot `p_c | m_c`
/// at column `c`, and entries reduced into `[0, p_j)` in later pivot columns `j`.
#[derive(Clone)]
pub struct Subgroup {
    ambient: FinAbGroup,
    gens: Vec<GroupElem>,
    rows: Vec<Vec<i64>>,
    order: i64,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.ambient == other.ambient && self.rows == other.rows
    }
}

impl Eq for Subgroup {}

impl Hash for Subgroup {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ambient.hash(state);
        self.rows.hash(state);
    }
}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{:?}> in {:?}", self.generators(), self.ambient)
    }
}

fn reduce_tail(v: &mut [i128], from: usize, moduli: &[i64]) {
    for (x, m) in v.iter_mut().zip(moduli).skip(from) {
        *x = x.rem_euclid(*m as i128);
    }
}

impl Subgroup {
    pub fn span(ambient: &FinAbGroup, gens: Vec<GroupElem>) -> Result<Self> {
        let r = ambient.rank();
        let moduli = ambient.moduli();
        let mut pool: Vec<Vec<i128>> = Vec::with_capacity(gens.len());
        let mut kept = Vec::with_capacity(gens.len());
        for g in gens {
            if g.coeffs.len() != r {
                return Err(Error::ShapeMismatch {
                    expected: r,
                    got: g.coeffs.len(),
                });
            }
            let g = ambient.reduce(&g.coeffs);
            pool.push(g.coeffs.iter().map(|&x| x as i128).collect());
            kept.push(g);
        }
        let mut rows: Vec<Vec<i128>> = Vec::with_capacity(r);
        for c in 0..r {
            let mut piv = vec![0i128; r];
            piv[c] = moduli[c] as i128;
            for v in pool.iter_mut() {
                let x = v[c];
                if x == 0 {
                    continue;
                }
                let g0 = piv[c];
                let eg = g0.extended_gcd(&x);
                let h = eg.gcd;
                let (a, b, cc, d) = (eg.x, eg.y, -(x / h), g0 / h);
                for j in c..r {
                    let (p, y) = (piv[j], v[j]);
                    piv[j] = a * p + b * y;
                    v[j] = cc * p + d * y;
                }
                piv[c] = h;
                v[c] = 0;
                reduce_tail(&mut piv, c + 1, moduli);
                reduce_tail(v, c + 1, moduli);
            }
            rows.push(piv);
        }
        for c in 0..r {
            for j in c + 1..r {
                let pj = rows[j][j];
                let q = rows[c][j].div_euclid(pj);
                if q != 0 {
                    let bj = rows[j].clone();
                    for (x, y) in rows[c].iter_mut().zip(&bj).skip(j) {
                        *x -= q * y;
                    }
                    reduce_tail(&mut rows[c], j + 1, moduli);
                }
            }
        }
        let rows: Vec<Vec<i64>> = rows
            .into_iter()
            .map(|row| row.into_iter().map(|x| x as i64).collect())
            .collect();
        let order = (0..r).fold(1i64, |acc, c| acc.saturating_mul(moduli[c] / rows[c][c]));
        Ok(Subgroup {
            ambient: ambient.clone(),
            gens: kept,
            rows,
            order,
        })
    }

    pub fn trivial(ambient: &FinAbGroup) -> Self {
        Self::span(ambient, vec![]).expect("empty span")
    }

    pub fn whole(ambient: &FinAbGroup) -> Self {
        Self::span(ambient, (0..ambient.rank()).map(|i| ambient.basis(i)).collect())
            .expect("basis has ambient shape")
    }

    /// The span of the standard generators with the given indices.
    pub fn coordinate(ambient: &FinAbGroup, indices: &[usize]) -> Self {
        Self::span(ambient, indices.iter().map(|&i| ambient.basis(i)).collect())
            .expect("basis has ambient shape")
    }

    pub fn ambient(&self) -> &FinAbGroup {
        &self.ambient
    }

    /// The generators the subgroup was built from (reduced).
    pub fn given_generators(&self) -> &[GroupElem] {
        &self.gens
    }

    /// A canonical generating set: the nontrivial rows of the echelon form.
    pub fn generators(&self) -> Vec<GroupElem> {
        let moduli = self.ambient.moduli();
        self.rows
            .iter()
            .enumerate()
            .filter(|(c, row)| row[*c] < moduli[*c])
            .map(|(_, row)| self.ambient.reduce(row))
            .collect()
    }

    pub fn canonical_rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    /// Saturates at `i64::MAX`.
    pub fn order(&self) -> i64 {
        self.order
    }

    /// Saturates at `i64::MAX`.
    pub fn index(&self) -> i64 {
        (0..self.rows.len()).fold(1i64, |acc, c| acc.saturating_mul(self.rows[c][c]))
    }

    pub fn is_trivial(&self) -> bool {
        self.order == 1
    }

    pub fn is_whole(&self) -> bool {
        (0..self.rows.len()).all(|c| self.rows[c][c] == 1)
    }

    pub fn contains(&self, g: &GroupElem) -> bool {
        if g.coeffs.len() != self.ambient.rank() {
            return false;
        }
        let moduli = self.ambient.moduli();
        let mut x: Vec<i128> = g
            .coeffs
            .iter()
            .zip(moduli)
            .map(|(c, m)| c.rem_euclid(*m) as i128)
            .collect();
        for (c, row) in self.rows.iter().enumerate() {
            let p = row[c] as i128;
            if x[c] % p != 0 {
                return false;
            }
            let q = x[c] / p;
            if q != 0 {
                for (xj, rj) in x.iter_mut().zip(row).skip(c) {
                    *xj -= q * *rj as i128;
                }
                reduce_tail(&mut x, c, moduli);
            }
        }
        true
    }

    pub fn is_subgroup_of(&self, other: &Subgroup) -> bool {
        self.ambient == other.ambient && self.generators().iter().all(|g| other.contains(g))
    }

    /// All elements, sorted lexicographically.
    pub fn elements(&self) -> Vec<GroupElem> {
        let moduli = self.ambient.moduli();
        let gens: Vec<(usize, i64)> = (0..self.rows.len())
            .filter(|&c| self.rows[c][c] < moduli[c])
            .map(|c| (c, moduli[c] / self.rows[c][c]))
            .collect();
        let mut out = vec![self.ambient.zero()];
        for (c, n) in gens {
            let b = self.ambient.reduce(&self.rows[c]);
            let mut next = Vec::with_capacity(out.len() * n as usize);
            for x in &out {
                let mut y = x.clone();
                for _ in 0..n {
                    next.push(y.clone());
                    y = self.ambient.add(&y, &b);
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    pub fn sum(&self, other: &Subgroup) -> Subgroup {
        let mut g = self.generators();
        g.extend(other.generators());
        Subgroup::span(&self.ambient, g).expect("same ambient")
    }

    pub fn intersection(&self, other: &Subgroup) -> Subgroup {
        self.annihilator()
            .sum(&other.annihilator())
            .annihilator()
    }

    /// `n H`.
    pub fn scaled(&self, n: i64) -> Subgroup {
        let g = self
            .generators()
            .iter()
            .map(|x| self.ambient.mul(x, n))
            .collect();
        Subgroup::span(&self.ambient, g).expect("same ambient")
    }

    /// The annihilator in the dual group, which carries the same moduli as the ambient group.
    pub fn annihilator(&self) -> Subgroup {
        let gens = self.generators();
        if gens.is_empty() {
            return Subgroup::whole(&self.ambient);
        }
        let e = self.ambient.exponent();
        let moduli = self.ambient.moduli();
        let codomain = FinAbGroup::from_moduli(vec![e; gens.len()]).expect("small codomain");
        let images = (0..self.ambient.rank())
            .map(|i| {
                GroupElem::new(
                    gens.iter()
                        .map(|h| mulmod(h.coeffs[i], e / moduli[i], e))
                        .collect(),
                )
            })
            .collect();
        Hom::new(self.ambient.clone(), codomain, images)
            .expect("characters pair into Z/exp")
            .kernel()
    }

    pub fn quotient(&self) -> Quotient {
        let g = &self.ambient;
        let r = g.rank();
        let e = g.exponent();
        let gens = self.generators();
        let mat: Vec<Vec<i64>> = (0..r)
            .map(|i| {
                let mut row: Vec<i64> = (0..r).map(|j| if i == j { g.moduli()[i] % e } else { 0 }).collect();
                row.extend(gens.iter().map(|h| h.coeffs[i]));
                row
            })
            .collect();
        let ncols = r + gens.len();
        let d = diagonalize(&mat, ncols, e, true, &mut []);
        let p = d.p.expect("tracked");
        let pinv = d.p_inv.expect("tracked");
        let mut moduli = vec![];
        let mut proj = vec![];
        let mut lifts = vec![];
        for i in 0..r {
            let di = d.diag[i];
            if di > 1 {
                moduli.push(di);
                proj.push(p[i].clone());
                lifts.push(g.reduce(&pinv.iter().map(|row| row[i]).collect::<Vec<_>>()));
            }
        }
        Quotient {
            ambient: g.clone(),
            group: FinAbGroup::from_moduli(moduli).expect("divisors of the ambient order"),
            proj,
            lifts,
        }
    }

    /// Moduli of `ambient / self`.
    pub fn quotient_structure(&self) -> Vec<i64> {
        self.quotient().group.moduli().to_vec()
    }

    /// `self` and `other` form an internal direct sum equal to the ambient group.
    pub fn is_direct_complement(&self, other: &Subgroup) -> bool {
        self.ambient == other.ambient
            && self.intersection(other).is_trivial()
            && self.index() == other.order()
    }

    /// An abstract isomorphism `self ~ sum Z/d_i` with an independent basis.
    pub fn structure(&self) -> SubgroupIso {
        let gens = self.generators();
        let e = self.ambient.exponent();
        let free = FinAbGroup::from_moduli(vec![e; gens.len()]).expect("small group");
        let hom = Hom::new(free, self.ambient.clone(), gens).expect("generators have order dividing exp");
        let quotient = hom.kernel().quotient();
        let basis = quotient.lifts.iter().map(|f| hom.apply(f)).collect();
        SubgroupIso {
            group: quotient.group.clone(),
            basis,
            hom,
            quotient,
        }
    }

    /// Sort key: order first, then the sorted element list.
    pub fn lex_key(&self) -> (i64, Vec<GroupElem>) {
        (self.order, self.elements())
    }
}

/// `ambient / H` as an explicit group with projection and lift maps.
#[derive(Clone, Debug)]
pub struct Quotient {
    ambient: FinAbGroup,
    group: FinAbGroup,
    proj: Vec<Vec<i64>>,
    lifts: Vec<GroupElem>,
}

impl Quotient {
    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    pub fn ambient(&self) -> &FinAbGroup {
        &self.ambient
    }

    pub fn project(&self, g: &GroupElem) -> GroupElem {
        let e = self.ambient.exponent() as i128;
        let coeffs: Vec<i64> = self
            .proj
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&g.coeffs)
                    .fold(0i128, |acc, (a, b)| (acc + *a as i128 * *b as i128) % e) as i64
            })
            .collect();
        self.group.reduce(&coeffs)
    }

    /// A preimage of a quotient element.
    pub fn lift(&self, q: &GroupElem) -> GroupElem {
        self.ambient.combine(&q.coeffs, &self.lifts)
    }

    pub fn lifts(&self) -> &[GroupElem] {
        &self.lifts
    }
}

/// An explicit isomorphism between a subgroup and `sum Z/d_i`.
#[derive(Clone, Debug)]
pub struct SubgroupIso {
    group: FinAbGroup,
    basis: Vec<GroupElem>,
    hom: Hom,
    quotient: Quotient,
}

impl SubgroupIso {
    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    /// Independent generators; `basis[i]` has order `group.moduli()[i]`.
    pub fn basis(&self) -> &[GroupElem] {
        &self.basis
    }

    pub fn to_ambient(&self, c: &GroupElem) -> GroupElem {
        self.hom.codomain().combine(&c.coeffs, &self.basis)
    }

    /// Coordinates of an element of the subgroup, `None` if outside.
    pub fn coords(&self, h: &GroupElem) -> Option<GroupElem> {
        if self.group.rank() == 0 {
            return h.is_zero().then(|| self.group.zero());
        }
        self.hom.solve(h).map(|y| self.quotient.project(&y))
    }
}

/// Every subgroup of `g`, sorted by order and then by element list.
pub fn all_subgroups(g: &FinAbGroup, limit: usize) -> Result<Vec<Subgroup>> {
    check_guard("group order for subgroup enumeration", g.order() as u128, 1 << 16)?;
    let mut cyclic: Vec<Subgroup> = vec![];
    let mut seen_cyclic = HashSet::new();
    for x in g.elements() {
        let c = Subgroup::span(g, vec![x])?;
        if seen_cyclic.insert(c.clone()) {
            cyclic.push(c);
        }
    }
    let mut seen: HashSet<Subgroup> = HashSet::new();
    let mut out = vec![];
    let mut queue = VecDeque::new();
    let zero = Subgroup::trivial(g);
    seen.insert(zero.clone());
    queue.push_back(zero);
    while let Some(h) = queue.pop_front() {
        for c in &cyclic {
            if c.is_subgroup_of(&h) {
                continue;
            }
            let j = h.sum(c);
            if seen.insert(j.clone()) {
                check_guard("subgroup lattice size", seen.len() as u128, limit as u128)?;
                queue.push_back(j);
            }
        }
        out.push(h);
    }
    let mut keyed: Vec<_> = out.into_iter().map(|h| (h.lex_key(), h)).collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, h)| h).collect())
}

/// Closure of a generating set by repeated addition (an oracle for tests and small searches).
pub fn closure(g: &FinAbGroup, gens: &[GroupElem]) -> Vec<GroupElem> {
    let mut seen: HashSet<GroupElem> = HashSet::new();
    let zero = g.zero();
    seen.insert(zero.clone());
    let mut stack = vec![zero];
    while let Some(x) = stack.pop() {
        for h in gens {
            let y = g.add(&x, &g.reduce(&h.coeffs));
            if seen.insert(y.clone()) {
                stack.push(y);
            }
        }
    }
    let mut v: Vec<_> = seen.into_iter().collect();
    v.sort();
    v
}
