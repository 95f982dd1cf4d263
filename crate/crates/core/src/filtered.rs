//! Filtered finite abelian groups, purity and splitting of short exact sequences.
use crate::abelian::{FinAbGroup, GroupElem, Hom, Quotient, Subgroup};
use crate::error::{check_guard, Error, Result};

/// `A = A_0 >= A_1 >= ... >= A_{k+1} = 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilteredGroup {
    group: FinAbGroup,
    chain: Vec<Subgroup>,
}

impl FilteredGroup {
    /// `above` lists `A_1, A_2, ...`; a trailing zero subgroup is appended when missing.
    pub fn new(group: &FinAbGroup, above: Vec<Subgroup>) -> Result<Self> {
        let mut chain = vec![Subgroup::whole(group)];
        for (i, s) in above.into_iter().enumerate() {
            if s.ambient() != group {
                return Err(Error::InvalidGroup(format!("A_{} lives in a different group", i + 1)));
            }
            if !s.is_subgroup_of(chain.last().expect("nonempty")) {
                return Err(Error::InvalidGroup(format!("A_{} is not contained in A_{i}", i + 1)));
            }
            chain.push(s);
        }
        if chain.len() == 1 || !chain.last().expect("nonempty").is_trivial() {
            chain.push(Subgroup::trivial(group));
        }
        Ok(FilteredGroup {
            group: group.clone(),
            chain,
        })
    }

    /// `A_1 = 0`.
    pub fn trivial_filtration(group: &FinAbGroup) -> Self {
        Self::new(group, vec![]).expect("valid")
    }

    /// Pads the chain with zero subgroups up to degree `k`.
    pub fn with_degree(&self, k: usize) -> Result<Self> {
        if k < self.degree() {
            return Err(Error::InvalidGroup(format!("cannot lower the degree {} to {k}", self.degree())));
        }
        let mut chain = self.chain.clone();
        while chain.len() < k + 2 {
            chain.push(Subgroup::trivial(&self.group));
        }
        Ok(FilteredGroup {
            group: self.group.clone(),
            chain,
        })
    }

    pub fn group(&self) -> &FinAbGroup {
        &self.group
    }

    /// `chain()[i] = A_i`.
    pub fn chain(&self) -> &[Subgroup] {
        &self.chain
    }

    pub fn level(&self, i: usize) -> Subgroup {
        self.chain.get(i).cloned().unwrap_or_else(|| Subgroup::trivial(&self.group))
    }

    pub fn degree(&self) -> usize {
        self.chain.len() - 2
    }
}

/// A homomorphism with `phi(A_i) <= B_i`.
#[derive(Clone, Debug)]
pub struct FilteredMorphism {
    pub source: FilteredGroup,
    pub target: FilteredGroup,
    hom: Hom,
}

impl FilteredMorphism {
    pub fn new(source: FilteredGroup, target: FilteredGroup, images: Vec<GroupElem>) -> Result<Self> {
        let hom = Hom::new(source.group.clone(), target.group.clone(), images)?;
        for i in 1..source.chain.len() {
            let b = target.level(i);
            for g in source.chain[i].generators() {
                if !b.contains(&hom.apply(&g)) {
                    return Err(Error::InvalidGroup(format!("morphism maps A_{i} outside B_{i}")));
                }
            }
        }
        Ok(FilteredMorphism { source, target, hom })
    }

    pub fn apply(&self, x: &GroupElem) -> GroupElem {
        self.hom.apply(x)
    }

    pub fn hom(&self) -> &Hom {
        &self.hom
    }
}

/// An injective `iota: A -> B` with `iota(A_i) = iota(A) cap B_i`, and the quotient `C = B / iota(A)`.
#[derive(Clone, Debug)]
pub struct FilteredEmbedding {
    sub: FilteredGroup,
    amb: FilteredGroup,
    iota: Hom,
    image: Subgroup,
    quotient: Quotient,
    c: FilteredGroup,
}

impl FilteredEmbedding {
    pub fn new(sub: FilteredGroup, amb: FilteredGroup, iota: Hom) -> Result<Self> {
        if iota.domain() != sub.group() || iota.codomain() != amb.group() {
            return Err(Error::InvalidGroup("inclusion does not match the groups".into()));
        }
        if !iota.kernel().is_trivial() {
            return Err(Error::InvalidGroup("inclusion is not injective".into()));
        }
        let k = sub.degree().max(amb.degree());
        let sub = sub.with_degree(k)?;
        let amb = amb.with_degree(k)?;
        let image = iota.image();
        for i in 0..=k + 1 {
            let mapped = Subgroup::span(amb.group(), sub.chain[i].generators().iter().map(|g| iota.apply(g)).collect())?;
            if mapped != image.intersection(&amb.chain[i]) {
                return Err(Error::InvalidGroup(format!("iota(A_{i}) differs from iota(A) cap B_{i}")));
            }
        }
        let quotient = image.quotient();
        let cg = quotient.group().clone();
        let above = (1..=k + 1)
            .map(|j| Subgroup::span(&cg, amb.chain[j].generators().iter().map(|g| quotient.project(g)).collect()))
            .collect::<Result<Vec<_>>>()?;
        let c = FilteredGroup::new(&cg, above)?.with_degree(k)?;
        Ok(FilteredEmbedding {
            sub,
            amb,
            iota,
            image,
            quotient,
            c,
        })
    }

    /// A subgroup of `amb` with the induced filtration, as an abstract group.
    pub fn from_subgroup(amb: &FilteredGroup, a: &Subgroup) -> Result<Self> {
        if a.ambient() != amb.group() {
            return Err(Error::InvalidGroup("subgroup lives in a different group".into()));
        }
        let iso = a.structure();
        let ag = iso.group().clone();
        let above = (1..amb.chain.len())
            .map(|i| {
                let gens = a
                    .intersection(&amb.chain[i])
                    .generators()
                    .iter()
                    .map(|g| iso.coords(g).expect("element of the subgroup"))
                    .collect();
                Subgroup::span(&ag, gens)
            })
            .collect::<Result<Vec<_>>>()?;
        let sub = FilteredGroup::new(&ag, above)?.with_degree(amb.degree())?;
        let iota = Hom::new(ag, amb.group().clone(), iso.basis().to_vec())?;
        Self::new(sub, amb.clone(), iota)
    }

    pub fn sub(&self) -> &FilteredGroup {
        &self.sub
    }

    pub fn amb(&self) -> &FilteredGroup {
        &self.amb
    }

    /// `C = B / iota(A)` with `C_j = pi(B_j)`.
    pub fn quotient(&self) -> &FilteredGroup {
        &self.c
    }

    pub fn iota(&self) -> &Hom {
        &self.iota
    }

    pub fn image(&self) -> &Subgroup {
        &self.image
    }

    pub fn project(&self, b: &GroupElem) -> GroupElem {
        self.quotient.project(b)
    }

    pub fn degree(&self) -> usize {
        self.amb.degree()
    }
}

/// Relations `(m, j)` in `n` variables: `m . x in A_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationSystem {
    pub n: usize,
    pub relations: Vec<(Vec<i64>, usize)>,
}

impl RelationSystem {
    pub fn new(n: usize, relations: Vec<(Vec<i64>, usize)>) -> Result<Self> {
        for (i, (m, j)) in relations.iter().enumerate() {
            if m.len() != n {
                return Err(Error::ShapeMismatch { expected: n, got: m.len() });
            }
            if *j == 0 {
                return Err(Error::Parse(format!("relation {i} has level 0; levels start at 1")));
            }
        }
        Ok(RelationSystem { n, relations })
    }

    /// Coefficients reduced into `[0, e)`.
    pub fn reduced(&self, e: i64) -> Self {
        RelationSystem {
            n: self.n,
            relations: self.relations.iter().map(|(m, j)| (m.iter().map(|x| x.rem_euclid(e)).collect(), *j)).collect(),
        }
    }

    fn check_levels(&self, k: usize) -> Result<()> {
        match self.relations.iter().position(|(_, j)| *j > k + 1) {
            Some(i) => Err(Error::Parse(format!("relation {i} has level above {}", k + 1))),
            None => Ok(()),
        }
    }
}

fn dot(g: &FinAbGroup, m: &[i64], fam: &[GroupElem]) -> GroupElem {
    g.combine(m, fam)
}

fn check_family(g: &FinAbGroup, fam: &[GroupElem], n: usize) -> Result<()> {
    if fam.len() != n {
        return Err(Error::ShapeMismatch { expected: n, got: fam.len() });
    }
    if let Some(i) = fam.iter().position(|x| !g.contains(x)) {
        return Err(Error::InvalidGroup(format!("family member {i} is not an element of the group")));
    }
    Ok(())
}

/// Whether `m . fam in A_j` for every relation.
pub fn relation_check(a: &FilteredGroup, fam: &[GroupElem], r: &RelationSystem) -> Result<bool> {
    check_family(a.group(), fam, r.n)?;
    Ok(r.relations.iter().all(|(m, j)| a.level(*j).contains(&dot(a.group(), m, fam))))
}

/// Default `|A|^n` limit for the exhaustive witness search.
pub const DEFAULT_WITNESS_SEARCH: u128 = 1 << 16;

/// Solves `iota(m . a) = m . b mod B_j` for all relations, over `a in A^n`.
fn solve_relations(
    e: &FilteredEmbedding,
    rels: &[(Vec<i64>, usize)],
    b: &[GroupElem],
    guard: u128,
) -> Result<Option<Vec<GroupElem>>> {
    let n = b.len();
    let ag = e.sub.group();
    let bg = e.amb.group();
    let quotients: Vec<Quotient> = (0..=e.degree() + 1).map(|j| e.amb.level(j).quotient()).collect();
    let mut moduli = Vec::new();
    let mut offsets = Vec::new();
    for (_, j) in rels {
        offsets.push(moduli.len());
        moduli.extend_from_slice(quotients[*j].group().moduli());
    }
    if moduli.is_empty() {
        return Ok(Some(vec![ag.zero(); n]));
    }
    check_guard("relation system cells", moduli.len() as u128 * (n * ag.rank()) as u128, guard)?;
    let domain = ag.power(n)?;
    let codomain = FinAbGroup::new(moduli.clone())?;
    let mut images = Vec::with_capacity(n * ag.rank());
    for v in 0..n {
        for c in 0..ag.rank() {
            let x = e.iota.apply(&ag.basis(c));
            let mut img = vec![0i64; moduli.len()];
            for ((m, j), off) in rels.iter().zip(&offsets) {
                let y = quotients[*j].project(&bg.mul(&x, m[v]));
                img[*off..*off + y.coeffs.len()].copy_from_slice(&y.coeffs);
            }
            images.push(GroupElem::new(img));
        }
    }
    let hom = Hom::new(domain, codomain, images)?;
    let mut target = vec![0i64; moduli.len()];
    for ((m, j), off) in rels.iter().zip(&offsets) {
        let y = quotients[*j].project(&dot(bg, m, b));
        target[*off..*off + y.coeffs.len()].copy_from_slice(&y.coeffs);
    }
    Ok(hom.solve(&GroupElem::new(target)).map(|sol| {
        (0..n).map(|v| GroupElem::new(sol.coeffs[v * ag.rank()..(v + 1) * ag.rank()].to_vec())).collect()
    }))
}

/// A family `a` in `A` with `m . (b - iota(a)) in B_j` for all relations. Fails with
/// `PremiseViolated` when some `m . b` is not in `iota(A) + B_j`.
pub fn purity_witness(
    e: &FilteredEmbedding,
    r: &RelationSystem,
    b: &[GroupElem],
    search_limit: u128,
) -> Result<Option<Vec<GroupElem>>> {
    let bg = e.amb.group();
    check_family(bg, b, r.n)?;
    r.check_levels(e.degree())?;
    let r = r.reduced(bg.exponent());
    for (i, (m, j)) in r.relations.iter().enumerate() {
        if !e.image.sum(&e.amb.level(*j)).contains(&dot(bg, m, b)) {
            return Err(Error::PremiseViolated { relation: i });
        }
    }
    let ag = e.sub.group();
    let space = (ag.order() as u128).checked_pow(r.n as u32).unwrap_or(u128::MAX);
    if space <= search_limit {
        let images: Vec<GroupElem> = ag.elements().map(|a| e.iota.apply(&a)).collect();
        let na = images.len();
        let mut idx = vec![0usize; r.n];
        loop {
            let diff: Vec<GroupElem> = (0..r.n).map(|v| bg.sub(&b[v], &images[idx[v]])).collect();
            if r.relations.iter().all(|(m, j)| e.amb.level(*j).contains(&dot(bg, m, &diff))) {
                return Ok(Some(idx.iter().map(|&i| ag.elem_at(i)).collect()));
            }
            let mut v = r.n;
            loop {
                if v == 0 {
                    return Ok(None);
                }
                v -= 1;
                idx[v] += 1;
                if idx[v] < na {
                    break;
                }
                idx[v] = 0;
            }
        }
    }
    solve_relations(e, &r.relations, b, u128::MAX)
}

#[derive(Clone, Debug)]
pub enum SplitOutcome {
    Split(FilteredMorphism),
    /// No filtered section exists.
    NoSection,
    /// The linear system exceeded the size limit.
    Undecided,
}

impl SplitOutcome {
    pub fn section(&self) -> Option<&FilteredMorphism> {
        match self {
            SplitOutcome::Split(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_split(&self) -> bool {
        matches!(self, SplitOutcome::Split(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            SplitOutcome::Split(_) => "split",
            SplitOutcome::NoSection => "none",
            SplitOutcome::Undecided => "undecided",
        }
    }
}

/// Generators of `{l in (Z/E)^n : l . fam in H}`.
fn relation_lattice(g: &FinAbGroup, fam: &[GroupElem], h: &Subgroup, e: i64) -> Result<Vec<Vec<i64>>> {
    let q = h.quotient();
    let n = fam.len();
    if n == 0 {
        return Ok(vec![]);
    }
    let dom = FinAbGroup::new(vec![e; n])?;
    if q.group().rank() == 0 {
        return Ok((0..n).map(|i| dom.basis(i).coeffs).collect());
    }
    let images = fam.iter().map(|x| q.project(x)).collect();
    let _ = g;
    let hom = Hom::new(dom, q.group().clone(), images)?;
    Ok(hom.kernel().generators().into_iter().map(|x| x.coeffs).filter(|c| c.iter().any(|&v| v != 0)).collect())
}

/// A filtered section `s: C -> B` with `pi o s = id`, built from a purity witness for the
/// relations satisfied by the standard generators of `C`.
pub fn split_section(e: &FilteredEmbedding, guard: u128) -> Result<SplitOutcome> {
    let c = &e.c;
    let cg = c.group();
    let bg = e.amb.group();
    let ex = bg.exponent();
    let gens: Vec<GroupElem> = (0..cg.rank()).map(|i| cg.basis(i)).collect();
    let lifts: Vec<GroupElem> = gens.iter().map(|g| e.quotient.lift(g)).collect();
    let mut rels = Vec::new();
    for j in 1..=e.degree() + 1 {
        for m in relation_lattice(cg, &gens, &c.level(j), ex)? {
            rels.push((m, j));
        }
    }
    let a = match solve_relations(e, &rels, &lifts, guard) {
        Ok(a) => a,
        Err(err) if err.is_guard() => return Ok(SplitOutcome::Undecided),
        Err(err) => return Err(err),
    };
    let Some(a) = a else {
        return Ok(SplitOutcome::NoSection);
    };
    let images: Vec<GroupElem> = lifts.iter().zip(&a).map(|(b, a)| bg.sub(b, &e.iota.apply(a))).collect();
    let s = FilteredMorphism::new(c.clone(), e.amb.clone(), images)?;
    Ok(SplitOutcome::Split(s))
}

/// `pi o s = id` and `s(C_j) <= B_j`, checked on every element of `C`.
pub fn verify_section(e: &FilteredEmbedding, s: &FilteredMorphism) -> bool {
    let c = &e.c;
    c.group().elements().all(|x| {
        let y = s.apply(&x);
        e.project(&y) == x && (1..=e.degree() + 1).all(|j| !c.level(j).contains(&x) || e.amb.level(j).contains(&y))
    })
}

/// `r(b) = iota^{-1}(b - s(pi(b)))`.
pub fn retraction(e: &FilteredEmbedding, s: &FilteredMorphism) -> Result<FilteredMorphism> {
    let bg = e.amb.group();
    let images = (0..bg.rank())
        .map(|i| {
            let b = bg.basis(i);
            let d = bg.sub(&b, &s.apply(&e.project(&b)));
            e.iota.solve(&d).ok_or_else(|| Error::Precondition("section does not split the quotient map".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    FilteredMorphism::new(e.amb.clone(), e.sub.clone(), images)
}

/// `iota(A) cap nB = n iota(A)` for every `n` dividing `exp(B)` (filtrations ignored).
pub fn pure_criterion_cyclic(e: &FilteredEmbedding) -> bool {
    let b = Subgroup::whole(e.amb.group());
    let ex = e.amb.group().exponent();
    (1..=ex).filter(|n| ex % n == 0).all(|n| e.image.intersection(&b.scaled(n)) == e.image.scaled(n))
}

/// Splitting of `0 -> A -> B' -> pi(B') -> 0` with `B' = iota(A) + <gens>`.
pub fn finite_split_check(e: &FilteredEmbedding, gens: &[GroupElem], guard: u128) -> Result<SplitOutcome> {
    let bg = e.amb.group();
    let mut all = e.image.generators();
    all.extend(gens.iter().cloned());
    let bp = Subgroup::span(bg, all)?;
    let iso = bp.structure();
    let g = iso.group().clone();
    let above = (1..=e.degree() + 1)
        .map(|i| {
            let gens = bp
                .intersection(&e.amb.level(i))
                .generators()
                .iter()
                .map(|x| iso.coords(x).expect("element of B'"))
                .collect();
            Subgroup::span(&g, gens)
        })
        .collect::<Result<Vec<_>>>()?;
    let amb = FilteredGroup::new(&g, above)?.with_degree(e.degree())?;
    let ag = e.sub.group();
    let images = (0..ag.rank()).map(|i| iso.coords(&e.iota.apply(&ag.basis(i))).expect("iota(A) <= B'")).collect();
    let iota = Hom::new(ag.clone(), g, images)?;
    let restricted = FilteredEmbedding::new(e.sub.clone(), amb, iota)?;
    split_section(&restricted, guard)
}

#[derive(Clone, Debug)]
pub struct PurityReport {
    pub n: usize,
    pub families: u128,
    pub pure: bool,
    /// A family `b` in `B^n` without a witness for its full relation system.
    pub counterexample: Option<Vec<GroupElem>>,
    /// Largest number of generating relations used for one family.
    pub max_relations: usize,
}

/// Purity for all families of length `n`, each tested against every relation it satisfies
/// modulo `iota(A) + B_j`.
pub fn is_pure_up_to(e: &FilteredEmbedding, n: usize, bound: u128) -> Result<PurityReport> {
    let bg = e.amb.group();
    let nb = bg.order() as u128;
    let families = nb.checked_pow(n as u32).unwrap_or(u128::MAX);
    check_guard("families B^n", families, bound)?;
    let ex = bg.exponent();
    let mods: Vec<Subgroup> = (1..=e.degree() + 1).map(|j| e.image.sum(&e.amb.level(j))).collect();
    let mut idx = vec![0usize; n];
    let mut max_relations = 0;
    for _ in 0..families {
        let fam: Vec<GroupElem> = idx.iter().map(|&i| bg.elem_at(i)).collect();
        let mut rels = Vec::new();
        for (j, h) in mods.iter().enumerate() {
            for m in relation_lattice(bg, &fam, h, ex)? {
                rels.push((m, j + 1));
            }
        }
        max_relations = max_relations.max(rels.len());
        if solve_relations(e, &rels, &fam, u128::MAX)?.is_none() {
            return Ok(PurityReport {
                n,
                families,
                pure: false,
                counterexample: Some(fam),
                max_relations,
            });
        }
        for v in (0..n).rev() {
            idx[v] += 1;
            if idx[v] < nb as usize {
                break;
            }
            idx[v] = 0;
        }
    }
    Ok(PurityReport {
        n,
        families,
        pure: true,
        counterexample: None,
        max_relations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(m: &[i64]) -> FinAbGroup {
        FinAbGroup::new(m.to_vec()).unwrap()
    }

    fn span(grp: &FinAbGroup, gens: &[&[i64]]) -> Subgroup {
        Subgroup::span(grp, gens.iter().map(|c| GroupElem::new(c.to_vec())).collect()).unwrap()
    }

    fn z4_example() -> FilteredEmbedding {
        let b = g(&[4]);
        let amb = FilteredGroup::new(&b, vec![span(&b, &[&[2]])]).unwrap();
        FilteredEmbedding::from_subgroup(&amb, &span(&b, &[&[2]])).unwrap()
    }

    #[test]
    fn relations() {
        let a = FilteredGroup::new(&g(&[4]), vec![span(&g(&[4]), &[&[2]])]).unwrap();
        let one = [GroupElem::new(vec![1])];
        assert!(relation_check(&a, &[GroupElem::new(vec![0])], &RelationSystem::new(1, vec![(vec![1], 1)]).unwrap()).unwrap());
        assert!(relation_check(&a, &one, &RelationSystem::new(1, vec![(vec![2], 1)]).unwrap()).unwrap());
        assert!(!relation_check(&a, &one, &RelationSystem::new(1, vec![(vec![1], 1)]).unwrap()).unwrap());
        assert!(relation_check(&a, &one, &RelationSystem::new(2, vec![]).unwrap()).is_err());
    }

    #[test]
    fn z4_does_not_split() {
        let e = z4_example();
        assert_eq!(e.quotient().group().moduli(), &[2]);
        let r = RelationSystem::new(1, vec![(vec![2], 2)]).unwrap();
        let b = [GroupElem::new(vec![1])];
        assert_eq!(purity_witness(&e, &r, &b, DEFAULT_WITNESS_SEARCH).unwrap(), None);
        assert_eq!(purity_witness(&e, &r, &b, 0).unwrap(), None);
        assert!(matches!(split_section(&e, u128::MAX).unwrap(), SplitOutcome::NoSection));
        assert!(!pure_criterion_cyclic(&e));
        assert!(!finite_split_check(&e, &[GroupElem::new(vec![1])], u128::MAX).unwrap().is_split());
        assert!(finite_split_check(&e, &[], u128::MAX).unwrap().is_split());
        let bad = RelationSystem::new(1, vec![(vec![1], 2)]).unwrap();
        assert_eq!(purity_witness(&e, &bad, &b, DEFAULT_WITNESS_SEARCH), Err(Error::PremiseViolated { relation: 0 }));
        let rep = is_pure_up_to(&e, 1, 1 << 10).unwrap();
        assert!(!rep.pure);
    }

    #[test]
    fn direct_sums_split() {
        let b = g(&[2, 4]);
        let amb = FilteredGroup::trivial_filtration(&b);
        let e = FilteredEmbedding::from_subgroup(&amb, &span(&b, &[&[1, 0]])).unwrap();
        assert!(pure_criterion_cyclic(&e));
        let out = split_section(&e, u128::MAX).unwrap();
        let s = out.section().unwrap();
        assert!(verify_section(&e, s));
        let r = retraction(&e, s).unwrap();
        for a in e.sub().group().elements() {
            assert_eq!(r.apply(&e.iota().apply(&a)), a);
        }
        let fam = [GroupElem::new(vec![1, 2])];
        let rs = RelationSystem::new(1, vec![(vec![2], 1)]).unwrap();
        let w = purity_witness(&e, &rs, &fam, DEFAULT_WITNESS_SEARCH).unwrap().unwrap();
        assert_eq!(e.iota().apply(&w[0]), GroupElem::new(vec![0, 0]));
        let a_part = [GroupElem::new(vec![1])];
        let diff = [b.sub(&fam[0], &e.iota().apply(&a_part[0]))];
        assert!(relation_check(e.amb(), &diff, &rs).unwrap());
        assert!(finite_split_check(&e, &[GroupElem::new(vec![0, 1])], u128::MAX).unwrap().is_split());

        let v = g(&[2, 2]);
        let e2 = FilteredEmbedding::from_subgroup(&FilteredGroup::trivial_filtration(&v), &span(&v, &[&[1, 0]])).unwrap();
        assert!(split_section(&e2, u128::MAX).unwrap().is_split());
        let whole = FilteredEmbedding::from_subgroup(&amb, &Subgroup::whole(&b)).unwrap();
        assert!(pure_criterion_cyclic(&whole));
        assert!(split_section(&whole, u128::MAX).unwrap().is_split());
    }

    #[test]
    fn witness_inside_image() {
        let e = z4_example();
        let b = [GroupElem::new(vec![2])];
        let r = RelationSystem::new(1, vec![(vec![1], 1), (vec![1], 2)]).unwrap();
        let w = purity_witness(&e, &r, &b, DEFAULT_WITNESS_SEARCH).unwrap().unwrap();
        assert_eq!(e.iota().apply(&w[0]), b[0]);
    }

    #[test]
    fn filtration_checks() {
        let b = g(&[4]);
        assert!(FilteredGroup::new(&b, vec![span(&b, &[&[2]]), span(&b, &[&[1]])]).is_err());
        let amb = FilteredGroup::new(&b, vec![span(&b, &[&[2]])]).unwrap();
        assert_eq!(amb.degree(), 1);
        let a = g(&[2]);
        let sub = FilteredGroup::trivial_filtration(&a);
        let iota = Hom::new(a, b, vec![GroupElem::new(vec![2])]).unwrap();
        // A_1 = 0 but iota(A) cap B_1 = {0, 2}
        assert!(FilteredEmbedding::new(sub, amb, iota).is_err());
    }
}
