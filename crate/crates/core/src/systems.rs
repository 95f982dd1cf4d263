use std::collections::VecDeque;
use std::sync::Arc;

use crate::abelian::{all_subgroups, Character, FinAbGroup, GroupElem, Subgroup};
use crate::cube::{type_leq, CubeCache};
use crate::error::{check_guard, Error, Result};
use crate::phase_poly::degree_at_most;
use crate::target::{GroupValuedFunction, TableFn, Target, Torus, TorusFunction};

/// A finite set with a measure-preserving action of a finite abelian group, given by
/// one permutation per generator of `gamma`. The measure is uniform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaSystem {
    gamma: FinAbGroup,
    action: Vec<Vec<u32>>,
    orbit_of: Vec<u32>,
    orbits: Vec<Vec<u32>>,
    translation: Option<FinAbGroup>,
}

impl GammaSystem {
    pub fn new(n: usize, gamma: FinAbGroup, action: Vec<Vec<u32>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSystem("a system needs at least one point".into()));
        }
        check_guard("system points", n as u128, u32::MAX as u128)?;
        if action.len() != gamma.rank() {
            return Err(Error::ShapeMismatch {
                expected: gamma.rank(),
                got: action.len(),
            });
        }
        for (i, perm) in action.iter().enumerate() {
            if perm.len() != n {
                return Err(Error::InvalidSystem(format!(
                    "generator {i}: permutation has length {}, expected {n}",
                    perm.len()
                )));
            }
            let mut seen = vec![false; n];
            for &y in perm {
                let y = y as usize;
                if y >= n || seen[y] {
                    return Err(Error::InvalidSystem(format!("generator {i} is not a bijection")));
                }
                seen[y] = true;
            }
            let m = gamma.moduli()[i];
            for x in 0..n {
                let mut y = x;
                for _ in 0..m {
                    y = perm[y] as usize;
                }
                if y != x {
                    return Err(Error::InvalidSystem(format!(
                        "generator {i} has order not dividing {m} at point {x}"
                    )));
                }
            }
        }
        for i in 0..action.len() {
            for j in i + 1..action.len() {
                for x in 0..n {
                    let a = action[i][action[j][x] as usize];
                    let b = action[j][action[i][x] as usize];
                    if a != b {
                        return Err(Error::InvalidSystem(format!(
                            "generators {i} and {j} do not commute at point {x}"
                        )));
                    }
                }
            }
        }
        Ok(Self::assemble(n, gamma, action, None))
    }

    fn assemble(n: usize, gamma: FinAbGroup, action: Vec<Vec<u32>>, translation: Option<FinAbGroup>) -> Self {
        let mut orbit_of = vec![u32::MAX; n];
        let mut orbits = Vec::new();
        for start in 0..n {
            if orbit_of[start] != u32::MAX {
                continue;
            }
            let id = orbits.len() as u32;
            let mut members = vec![start as u32];
            orbit_of[start] = id;
            let mut head = 0;
            while head < members.len() {
                let y = members[head] as usize;
                head += 1;
                for perm in &action {
                    let z = perm[y] as usize;
                    if orbit_of[z] == u32::MAX {
                        orbit_of[z] = id;
                        members.push(z as u32);
                    }
                }
            }
            members.sort_unstable();
            orbits.push(members);
        }
        GammaSystem {
            gamma,
            action,
            orbit_of,
            orbits,
            translation,
        }
    }

    /// `G` acting on itself by translation; points are indexed in `G`'s canonical order.
    pub fn translation(g: &FinAbGroup) -> Self {
        let n = g.order() as usize;
        let action = (0..g.rank())
            .map(|i| {
                let e = g.basis(i);
                (0..n).map(|x| g.index_of(&g.add(&g.elem_at(x), &e)) as u32).collect()
            })
            .collect();
        Self::assemble(n, g.clone(), action, Some(g.clone()))
    }

    /// A single point with trivial action.
    pub fn one_point(gamma: &FinAbGroup) -> Self {
        Self::assemble(1, gamma.clone(), vec![vec![0]; gamma.rank()], None)
    }

    /// Points of `self` followed by points of `other`.
    pub fn disjoint_union(&self, other: &GammaSystem) -> Result<Self> {
        if self.gamma != other.gamma {
            return Err(Error::InvalidSystem("disjoint union needs a common acting group".into()));
        }
        let off = self.len() as u32;
        let action = self
            .action
            .iter()
            .zip(&other.action)
            .map(|(a, b)| a.iter().copied().chain(b.iter().map(|&y| y + off)).collect())
            .collect();
        Ok(Self::assemble(self.len() + other.len(), self.gamma.clone(), action, None))
    }

    pub(crate) fn from_parts_unchecked(n: usize, gamma: FinAbGroup, action: Vec<Vec<u32>>) -> Self {
        Self::assemble(n, gamma, action, None)
    }

    pub fn len(&self) -> usize {
        self.orbit_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbit_of.is_empty()
    }

    pub fn gamma(&self) -> &FinAbGroup {
        &self.gamma
    }

    /// The group this system is a translation system of, if built by [`GammaSystem::translation`].
    pub fn translation_group(&self) -> Option<&FinAbGroup> {
        self.translation.as_ref()
    }

    pub fn generator(&self, i: usize) -> &[u32] {
        &self.action[i]
    }

    pub fn generators(&self) -> &[Vec<u32>] {
        &self.action
    }

    pub fn step(&self, i: usize, x: usize) -> usize {
        self.action[i][x] as usize
    }

    pub fn act(&self, g: &GroupElem, x: usize) -> usize {
        let mut y = x;
        for (i, &c) in g.coeffs.iter().enumerate() {
            for _ in 0..c {
                y = self.action[i][y] as usize;
            }
        }
        y
    }

    /// The permutation `x -> T^g x`.
    pub fn shift_perm(&self, g: &GroupElem) -> Result<Vec<u32>> {
        if !self.gamma.contains(g) {
            return Err(Error::ShapeMismatch {
                expected: self.gamma.rank(),
                got: g.coeffs.len(),
            });
        }
        Ok((0..self.len()).map(|x| self.act(g, x) as u32).collect())
    }

    /// Row `j` is the permutation of the `j`-th element of `gamma` in canonical order.
    pub fn shift_table(&self, guard: u128) -> Result<Vec<Vec<u32>>> {
        let cells = self.gamma.order() as u128 * self.len() as u128;
        check_guard("shift table cells", cells, guard)?;
        let n = self.len();
        let mut table: Vec<Vec<u32>> = Vec::with_capacity(self.gamma.order() as usize);
        table.push((0..n as u32).collect());
        let moduli = self.gamma.moduli();
        for idx in 1..self.gamma.order() as usize {
            // predecessor in canonical order: decrement the last nonzero coordinate
            let g = self.gamma.elem_at(idx);
            let i = (0..moduli.len()).rev().find(|&i| g.coeffs[i] != 0).expect("nonzero element");
            let mut prev = g.clone();
            prev.coeffs[i] -= 1;
            let p = &table[self.gamma.index_of(&prev)];
            let row = p.iter().map(|&y| self.action[i][y as usize]).collect();
            table.push(row);
        }
        Ok(table)
    }

    pub fn orbit_of(&self, x: usize) -> usize {
        self.orbit_of[x] as usize
    }

    /// Orbits sorted by least point, each sorted ascending.
    pub fn orbits(&self) -> &[Vec<u32>] {
        &self.orbits
    }

    /// Finite ergodicity: a single orbit.
    pub fn is_transitive(&self) -> bool {
        self.orbits.len() == 1
    }
}

/// A cocycle stored by its values on the generators of the acting group.
#[derive(Clone, Debug)]
pub struct Cocycle<T: Target> {
    system: Arc<GammaSystem>,
    target: T,
    tables: Vec<Vec<T::Elem>>,
}

impl<T: Target> PartialEq for Cocycle<T> {
    fn eq(&self, other: &Self) -> bool {
        *self.system == *other.system && self.target == other.target && self.tables == other.tables
    }
}

impl<T: Target> Cocycle<T> {
    pub fn new(system: Arc<GammaSystem>, target: T, tables: Vec<Vec<T::Elem>>) -> Result<Self> {
        let r = system.gamma().rank();
        if tables.len() != r {
            return Err(Error::ShapeMismatch {
                expected: r,
                got: tables.len(),
            });
        }
        for (i, t) in tables.iter().enumerate() {
            if t.len() != system.len() {
                return Err(Error::ShapeMismatch {
                    expected: system.len(),
                    got: t.len(),
                });
            }
            if let Some(x) = t.iter().position(|v| !target.validate(v)) {
                return Err(Error::NotACocycle(format!(
                    "generator {i} at point {x}: value is not a reduced target element"
                )));
            }
        }
        let c = Cocycle {
            system,
            target,
            tables,
        };
        c.verify()?;
        Ok(c)
    }

    pub(crate) fn new_unchecked(system: Arc<GammaSystem>, target: T, tables: Vec<Vec<T::Elem>>) -> Self {
        let c = Cocycle {
            system,
            target,
            tables,
        };
        debug_assert!(c.verify().is_ok());
        c
    }

    fn verify(&self) -> Result<()> {
        let sys = &self.system;
        let n = sys.len();
        for (i, t) in self.tables.iter().enumerate() {
            let m = sys.gamma().moduli()[i];
            let perm = sys.generator(i);
            for x in 0..n {
                let mut acc = self.target.zero();
                let mut y = x;
                for _ in 0..m {
                    acc = self.target.add(&acc, &t[y]);
                    y = perm[y] as usize;
                }
                if !self.target.is_zero(&acc) {
                    return Err(Error::NotACocycle(format!(
                        "cycle condition fails for generator {i} at point {x}"
                    )));
                }
            }
        }
        for i in 0..self.tables.len() {
            for j in i + 1..self.tables.len() {
                let (pi, pj) = (sys.generator(i), sys.generator(j));
                for x in 0..n {
                    let lhs = self.target.sub(&self.tables[i][pj[x] as usize], &self.tables[i][x]);
                    let rhs = self.target.sub(&self.tables[j][pi[x] as usize], &self.tables[j][x]);
                    if lhs != rhs {
                        return Err(Error::NotACocycle(format!(
                            "cross condition fails for generators {i}, {j} at point {x}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn zero(system: &Arc<GammaSystem>, target: T) -> Self {
        let z = target.zero();
        let tables = vec![vec![z; system.len()]; system.gamma().rank()];
        Cocycle {
            system: system.clone(),
            target,
            tables,
        }
    }

    /// The cocycle `gamma -> phi(gamma)` that is constant in `x`.
    pub fn homomorphism(system: &Arc<GammaSystem>, target: T, images: Vec<T::Elem>) -> Result<Self> {
        let tables = images.into_iter().map(|v| vec![v; system.len()]).collect();
        Self::new(system.clone(), target, tables)
    }

    /// `gamma -> f o T^gamma - f`.
    pub fn coboundary_of(f: &TableFn<T>) -> Self {
        let sys = f.domain().clone();
        let tables = (0..sys.gamma().rank()).map(|i| f.derivative_gen(i).values().to_vec()).collect();
        Cocycle {
            system: sys,
            target: f.target().clone(),
            tables,
        }
    }

    pub fn system(&self) -> &Arc<GammaSystem> {
        &self.system
    }

    pub fn target(&self) -> &T {
        &self.target
    }

    pub fn tables(&self) -> &[Vec<T::Elem>] {
        &self.tables
    }

    pub fn table(&self, i: usize) -> &[T::Elem] {
        &self.tables[i]
    }

    /// `rho_{e_i}` as a function.
    pub fn generator_fn(&self, i: usize) -> TableFn<T> {
        TableFn::new_unchecked(self.system.clone(), self.target.clone(), self.tables[i].clone())
    }

    /// `rho_gamma(x)`, expanded along the generators in order.
    pub fn eval(&self, g: &GroupElem, x: usize) -> T::Elem {
        let mut acc = self.target.zero();
        let mut y = x;
        for (i, &c) in g.coeffs.iter().enumerate() {
            for _ in 0..c {
                acc = self.target.add(&acc, &self.tables[i][y]);
                y = self.system.step(i, y);
            }
        }
        acc
    }

    /// `rho_gamma` as a function.
    pub fn gamma_fn(&self, g: &GroupElem) -> TableFn<T> {
        TableFn::from_fn(&self.system, self.target.clone(), |x| self.eval(g, x))
    }

    fn zip(&self, other: &Self, f: impl Fn(&T::Elem, &T::Elem) -> T::Elem) -> Self {
        assert!(*self.system == *other.system, "cocycles on different systems");
        let tables = self
            .tables
            .iter()
            .zip(&other.tables)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| f(x, y)).collect())
            .collect();
        Cocycle {
            system: self.system.clone(),
            target: self.target.clone(),
            tables,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip(other, |a, b| self.target.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip(other, |a, b| self.target.sub(a, b))
    }

    /// Pushes values through a homomorphism of targets.
    pub fn map_target<S: Target>(&self, target: S, f: impl Fn(&T::Elem) -> S::Elem) -> Cocycle<S> {
        let tables = self.tables.iter().map(|t| t.iter().map(&f).collect()).collect();
        Cocycle {
            system: self.system.clone(),
            target,
            tables,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.tables.iter().flatten().all(|v| self.target.is_zero(v))
    }

    /// Whether every generator function has degree `<= d` (`d < 0` means zero).
    pub fn degree_at_most(&self, d: i64) -> bool {
        (0..self.tables.len()).all(|i| degree_at_most(&self.generator_fn(i), d))
    }
}

impl Cocycle<FinAbGroup> {
    /// `xi o rho`.
    pub fn character(&self, xi: &Character) -> Cocycle<Torus> {
        let u = self.target.clone();
        self.map_target(Torus, |v| u.pair(xi, v).expect("character of the target"))
    }

    /// `rho mod H`, valued in the quotient's standard form.
    pub fn modulo(&self, h: &Subgroup) -> Cocycle<FinAbGroup> {
        let q = h.quotient();
        self.map_target(q.group().clone(), |v| q.project(v))
    }
}

/// Solves `dF = rho` with `F(x0) = 0` at the least point of every orbit; `None` if `rho` is
/// not a coboundary.
pub fn coboundary_solve<T: Target>(rho: &Cocycle<T>) -> Option<TableFn<T>> {
    let sys = rho.system();
    let tg = rho.target();
    let n = sys.len();
    let mut vals: Vec<Option<T::Elem>> = vec![None; n];
    let mut queue = VecDeque::new();
    for orbit in sys.orbits() {
        let x0 = orbit[0] as usize;
        vals[x0] = Some(tg.zero());
        queue.push_back(x0);
        while let Some(y) = queue.pop_front() {
            let fy = vals[y].clone().expect("visited");
            for (i, perm) in sys.generators().iter().enumerate() {
                let z = perm[y] as usize;
                let v = tg.add(&fy, &rho.tables[i][y]);
                match &vals[z] {
                    None => {
                        vals[z] = Some(v);
                        queue.push_back(z);
                    }
                    Some(w) if *w == v => {}
                    Some(_) => return None,
                }
            }
        }
    }
    let values = vals.into_iter().map(|v| v.expect("every point lies in an orbit")).collect();
    Some(TableFn::new_unchecked(sys.clone(), tg.clone(), values))
}

/// The skew product `X x_rho U` with `T^g(x, u) = (T^g x, u + rho_g(x))`.
/// Point `(x, u)` has index `x * |U| + index(u)`.
#[derive(Clone, Debug)]
pub struct SkewProduct {
    cocycle: Cocycle<FinAbGroup>,
    system: Arc<GammaSystem>,
}

pub fn skew_product(rho: &Cocycle<FinAbGroup>) -> Result<SkewProduct> {
    let base = rho.system();
    let u = rho.target();
    let nu = u.order() as usize;
    check_guard("skew product points", base.len() as u128 * nu as u128, u32::MAX as u128)?;
    let action: Vec<Vec<u32>> = (0..base.gamma().rank())
        .map(|i| {
            let mut perm = vec![0u32; base.len() * nu];
            for x in 0..base.len() {
                let y = base.step(i, x);
                for ui in 0..nu {
                    let v = u.add(&u.elem_at(ui), &rho.table(i)[x]);
                    perm[x * nu + ui] = (y * nu + u.index_of(&v)) as u32;
                }
            }
            perm
        })
        .collect();
    let system = Arc::new(GammaSystem::from_parts_unchecked(base.len() * nu, base.gamma().clone(), action));
    let sp = SkewProduct {
        cocycle: rho.clone(),
        system,
    };
    for j in 0..u.rank() {
        let v = sp.vertical(&u.basis(j));
        for perm in sp.system.generators() {
            for p in 0..perm.len() {
                if perm[v[p] as usize] != v[perm[p] as usize] {
                    return Err(Error::InvalidSystem("vertical translations do not commute with the action".into()));
                }
            }
        }
    }
    Ok(sp)
}

impl SkewProduct {
    pub fn base(&self) -> &Arc<GammaSystem> {
        self.cocycle.system()
    }

    pub fn fiber(&self) -> &FinAbGroup {
        self.cocycle.target()
    }

    pub fn cocycle(&self) -> &Cocycle<FinAbGroup> {
        &self.cocycle
    }

    pub fn system(&self) -> &Arc<GammaSystem> {
        &self.system
    }

    pub fn point(&self, x: usize, u: &GroupElem) -> usize {
        x * self.fiber().order() as usize + self.fiber().index_of(u)
    }

    pub fn split(&self, p: usize) -> (usize, GroupElem) {
        let nu = self.fiber().order() as usize;
        (p / nu, self.fiber().elem_at(p % nu))
    }

    /// The permutation `(x, w) -> (x, w + u)`.
    pub fn vertical(&self, u: &GroupElem) -> Vec<u32> {
        let g = self.fiber();
        let nu = g.order() as usize;
        let shift: Vec<usize> = (0..nu).map(|w| g.index_of(&g.add(&g.elem_at(w), u))).collect();
        (0..self.system.len()).map(|p| ((p / nu) * nu + shift[p % nu]) as u32).collect()
    }

    /// `u -> F o V_u - F`, indexed by the fiber's canonical order.
    pub fn vertical_derivative<T: Target>(&self, f: &TableFn<T>) -> Vec<TableFn<T>> {
        self.fiber().elements().map(|u| f.pull_back(&self.vertical(&u)).sub(f)).collect()
    }
}

/// Integrates a `U`-cocycle `f` (indexed by the fiber's canonical order):
/// returns `F` with `F o V_u - F = f_u` for all `u` and `F(., 0) = 0`.
pub fn integrate_u_cocycle<T: Target>(skew: &SkewProduct, f: &[TableFn<T>]) -> Result<TableFn<T>> {
    let g = skew.fiber();
    let nu = g.order() as usize;
    if f.len() != nu {
        return Err(Error::ShapeMismatch {
            expected: nu,
            got: f.len(),
        });
    }
    let n = skew.system().len();
    if let Some(fu) = f.iter().find(|fu| fu.values().len() != n) {
        return Err(Error::ShapeMismatch {
            expected: n,
            got: fu.values().len(),
        });
    }
    let tg = f[0].target().clone();
    let verts: Vec<Vec<u32>> = g.elements().map(|u| skew.vertical(&u)).collect();
    for ui in 0..nu {
        let u = g.elem_at(ui);
        for vi in 0..nu {
            let w = g.index_of(&g.add(&u, &g.elem_at(vi)));
            for p in 0..n {
                let rhs = tg.add(f[ui].get(p), f[vi].get(verts[ui][p] as usize));
                if *f[w].get(p) != rhs {
                    return Err(Error::NotACocycle(format!(
                        "U-cocycle equation fails for u = {ui}, v = {vi} at point {p}"
                    )));
                }
            }
        }
    }
    let values = (0..n).map(|p| f[p % nu].get((p / nu) * nu).clone()).collect();
    Ok(TableFn::new_unchecked(skew.system().clone(), tg, values))
}

/// A decreasing chain `U = U_{>0} >= U_{>1} >= ... >= U_{>l} = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightFiltration {
    group: FinAbGroup,
    chain: Vec<Subgroup>,
}

impl WeightFiltration {
    /// `above` lists `U_{>1}, U_{>2}, ...`; a trailing trivial subgroup is appended if missing.
    pub fn new(group: &FinAbGroup, above: Vec<Subgroup>) -> Result<Self> {
        let mut chain = vec![Subgroup::whole(group)];
        for s in above {
            if s.ambient() != group {
                return Err(Error::InvalidGroup("filtration subgroup in a different group".into()));
            }
            if !s.is_subgroup_of(chain.last().expect("nonempty")) {
                return Err(Error::InvalidGroup("weight filtration is not decreasing".into()));
            }
            chain.push(s);
        }
        if !chain.last().expect("nonempty").is_trivial() {
            chain.push(Subgroup::trivial(group));
        }
        Ok(WeightFiltration {
            group: group.clone(),
            chain,
        })
    }

    /// `Z/2^k` with `U_{>i} = 2^i Z/2^k`.
    pub fn two_adic(k: u32) -> Result<Self> {
        let g = FinAbGroup::cyclic(1i64 << k)?;
        let above = (1..=k).map(|i| Subgroup::span(&g, vec![GroupElem::new(vec![(1i64 << i) % (1i64 << k)])])).collect::<Result<_>>()?;
        Self::new(&g, above)
    }

    /// All nonzero elements in weight `w`: `U_{>i} = U` for `i < w`, then `0`.
    pub fn constant(group: &FinAbGroup, w: usize) -> Result<Self> {
        let above = (1..w).map(|_| Subgroup::whole(group)).collect();
        Self::new(group, above)
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    /// `chain()[i] = U_{>i}`.
    pub fn chain(&self) -> &[Subgroup] {
        &self.chain
    }

    /// `sup{i + 1 : u in U_{>i}}`; `None` (infinite) for `u = 0`.
    pub fn weight(&self, u: &GroupElem) -> Option<usize> {
        if u.is_zero() {
            return None;
        }
        (0..self.chain.len()).rev().find(|&i| self.chain[i].contains(u)).map(|i| i + 1)
    }
}

/// Integrates a vertical cocycle on a skew product with polynomial cocycle `rho`,
/// checking the weighted degree bounds on `f` and that the result has degree `<= k`.
pub fn integrate_poly_cocycle(
    skew: &SkewProduct,
    f: &[TorusFunction],
    k: usize,
    weights: &WeightFiltration,
) -> Result<TorusFunction> {
    let g = skew.fiber();
    if weights.group() != g {
        return Err(Error::InvalidGroup("weight filtration is on a different group".into()));
    }
    let rho = skew.cocycle();
    for (l, sub) in weights.chain().iter().enumerate().skip(1) {
        if !rho.modulo(sub).degree_at_most(l as i64 - 1) {
            return Err(Error::Precondition(format!(
                "cocycle modulo U_>{l} does not have degree <= {}",
                l as i64 - 1
            )));
        }
    }
    if f.len() != g.order() as usize {
        return Err(Error::ShapeMismatch {
            expected: g.order() as usize,
            got: f.len(),
        });
    }
    for (ui, fu) in f.iter().enumerate() {
        let u = g.elem_at(ui);
        let bound = match weights.weight(&u) {
            None => -1,
            Some(w) => k as i64 - w as i64,
        };
        if fu.domain().len() != skew.system().len() || !degree_at_most(fu, bound) {
            return Err(Error::Precondition(format!(
                "f_u for u = {u:?} does not have degree <= {bound}"
            )));
        }
    }
    let out = integrate_u_cocycle(skew, f)?;
    if !degree_at_most(&out, k as i64) {
        return Err(Error::DegreeExceeded(format!(
            "integrated function exceeds degree {k}; the cocycle is not exact"
        )));
    }
    Ok(out)
}

/// Result of [`minimal_reduce`]: `rho - dF` takes values in `subgroup`.
#[derive(Clone, Debug)]
pub struct MinimalReduction {
    pub subgroup: Subgroup,
    pub transfer: GroupValuedFunction,
    pub reduced: Cocycle<FinAbGroup>,
}

/// Smallest subgroup (by order, then lexicographically) to which `rho` is cohomologous.
pub fn minimal_reduce(rho: &Cocycle<FinAbGroup>, lattice_limit: usize) -> Result<MinimalReduction> {
    let sys = rho.system();
    if !sys.is_transitive() {
        return Err(Error::Precondition("minimal reduction needs a transitive base".into()));
    }
    let u = rho.target();
    for sub in all_subgroups(u, lattice_limit)? {
        let ann = sub.annihilator();
        let ok = ann
            .generators()
            .iter()
            .all(|xi| coboundary_solve(&rho.character(&Character::new(xi.coeffs.clone()))).is_some());
        if !ok {
            continue;
        }
        let q = sub.quotient();
        let bar = coboundary_solve(&rho.modulo(&sub))
            .ok_or_else(|| Error::Precondition("quotient cocycle is not a coboundary".into()))?;
        let transfer = bar.map_target(u.clone(), |v| q.lift(v));
        let reduced = rho.sub(&Cocycle::coboundary_of(&transfer));
        debug_assert!(reduced.tables().iter().flatten().all(|v| sub.contains(v)));
        return Ok(MinimalReduction {
            subgroup: sub,
            transfer,
            reduced,
        });
    }
    unreachable!("the whole group always qualifies")
}

#[derive(Clone, Debug)]
pub struct CharacterExactness {
    pub character: Character,
    /// Least `d <= d_max` with type `<= d`.
    pub min_type: Option<usize>,
    /// Least `d <= d_max` with degree `<= d - 1` (`d = 0` means zero).
    pub min_degree: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ExactnessReport {
    pub d_max: usize,
    pub rows: Vec<CharacterExactness>,
    /// `type_chain[d] = Ann{xi : type(xi o rho) <= d}`.
    pub type_chain: Vec<Subgroup>,
    /// `degree_chain[d] = Ann{xi : degree(xi o rho) <= d - 1}`.
    pub degree_chain: Vec<Subgroup>,
    pub exact: bool,
}

pub fn exactness_check(rho: &Cocycle<FinAbGroup>, d_max: usize, guard: u128) -> Result<ExactnessReport> {
    let u = rho.target();
    let mut cache = CubeCache::new(rho.system().clone(), guard);
    let mut rows = Vec::new();
    for xi in u.characters() {
        let c = rho.character(&xi);
        let min_degree = (0..=d_max).find(|&d| c.degree_at_most(d as i64 - 1));
        let mut min_type = None;
        for d in 0..=d_max {
            if type_leq(&c, d, &mut cache)? {
                min_type = Some(d);
                break;
            }
        }
        rows.push(CharacterExactness {
            character: xi,
            min_type,
            min_degree,
        });
    }
    let chain = |pick: &dyn Fn(&CharacterExactness) -> Option<usize>| -> Result<Vec<Subgroup>> {
        (0..=d_max)
            .map(|d| {
                let gens = rows
                    .iter()
                    .filter(|r| pick(r).is_some_and(|m| m <= d))
                    .map(|r| r.character.as_elem())
                    .collect();
                Ok(Subgroup::span(u, gens)?.annihilator())
            })
            .collect()
    };
    let type_chain = chain(&|r| r.min_type)?;
    let degree_chain = chain(&|r| r.min_degree)?;
    let exact = type_chain == degree_chain;
    Ok(ExactnessReport {
        d_max,
        rows,
        type_chain,
        degree_chain,
        exact,
    })
}
