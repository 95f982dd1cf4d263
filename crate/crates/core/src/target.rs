use std::fmt;
use std::hash::Hash;
use std::sync::Arc;

use crate::abelian::{Character, FinAbGroup, GroupElem, TorusValue};
use crate::error::{Error, Result};
use crate::systems::GammaSystem;

/// A finite or circle-valued abelian group that functions and cocycles take values in.
pub trait Target: Clone + fmt::Debug + PartialEq + Send + Sync {
    type Elem: Clone + PartialEq + Eq + Hash + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul_int(&self, a: &Self::Elem, n: i64) -> Self::Elem;
    /// Whether `a` is a well-formed (reduced) element.
    fn validate(&self, a: &Self::Elem) -> bool;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        *a == self.zero()
    }
}

/// The circle group `R/Z` with exact rational values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Torus;

impl Target for Torus {
    type Elem = TorusValue;

    fn zero(&self) -> TorusValue {
        TorusValue::ZERO
    }
    fn add(&self, a: &TorusValue, b: &TorusValue) -> TorusValue {
        *a + *b
    }
    fn neg(&self, a: &TorusValue) -> TorusValue {
        -*a
    }
    fn mul_int(&self, a: &TorusValue, n: i64) -> TorusValue {
        a.mul_int(n)
    }
    fn validate(&self, _: &TorusValue) -> bool {
        true
    }
}

impl Target for FinAbGroup {
    type Elem = GroupElem;

    fn zero(&self) -> GroupElem {
        FinAbGroup::zero(self)
    }
    fn add(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        FinAbGroup::add(self, a, b)
    }
    fn neg(&self, a: &GroupElem) -> GroupElem {
        FinAbGroup::neg(self, a)
    }
    fn mul_int(&self, a: &GroupElem, n: i64) -> GroupElem {
        FinAbGroup::mul(self, a, n)
    }
    fn validate(&self, a: &GroupElem) -> bool {
        self.contains(a)
    }
    fn sub(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        FinAbGroup::sub(self, a, b)
    }
    fn is_zero(&self, a: &GroupElem) -> bool {
        a.is_zero()
    }
}

/// A dense table of values over the points of a finite system.
#[derive(Clone)]
pub struct TableFn<T: Target> {
    domain: Arc<GammaSystem>,
    target: T,
    values: Vec<T::Elem>,
}

pub type TorusFunction = TableFn<Torus>;
pub type GroupValuedFunction = TableFn<FinAbGroup>;

impl<T: Target> fmt::Debug for TableFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.values)
    }
}

impl<T: Target> PartialEq for TableFn<T> {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.domain, &other.domain) || self.domain == other.domain)
            && self.target == other.target
            && self.values == other.values
    }
}

impl<T: Target> Eq for TableFn<T> {}

impl<T: Target> TableFn<T> {
    pub fn new(domain: Arc<GammaSystem>, target: T, values: Vec<T::Elem>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::ShapeMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !target.validate(v)) {
            return Err(Error::Parse(format!("value at point {i} is not a reduced target element")));
        }
        Ok(TableFn {
            domain,
            target,
            values,
        })
    }

    pub(crate) fn new_unchecked(domain: Arc<GammaSystem>, target: T, values: Vec<T::Elem>) -> Self {
        debug_assert_eq!(values.len(), domain.len());
        TableFn {
            domain,
            target,
            values,
        }
    }

    pub fn from_fn(domain: &Arc<GammaSystem>, target: T, f: impl Fn(usize) -> T::Elem) -> Self {
        let values = (0..domain.len()).map(f).collect();
        TableFn {
            domain: domain.clone(),
            target,
            values,
        }
    }

    pub fn zero(domain: &Arc<GammaSystem>, target: T) -> Self {
        let z = target.zero();
        Self::from_fn(domain, target, |_| z.clone())
    }

    pub fn domain(&self) -> &Arc<GammaSystem> {
        &self.domain
    }

    pub fn target(&self) -> &T {
        &self.target
    }

    pub fn values(&self) -> &[T::Elem] {
        &self.values
    }

    pub fn get(&self, x: usize) -> &T::Elem {
        &self.values[x]
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&T::Elem, &T::Elem) -> T::Elem) -> Self {
        assert_eq!(self.values.len(), other.values.len(), "functions on different domains");
        TableFn {
            domain: self.domain.clone(),
            target: self.target.clone(),
            values: self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn map_values(&self, f: impl Fn(&T::Elem) -> T::Elem) -> Self {
        TableFn {
            domain: self.domain.clone(),
            target: self.target.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    /// Applies a homomorphism of targets pointwise.
    pub fn map_target<S: Target>(&self, target: S, f: impl Fn(&T::Elem) -> S::Elem) -> TableFn<S> {
        TableFn {
            domain: self.domain.clone(),
            target,
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| self.target.add(a, b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| self.target.sub(a, b))
    }

    pub fn neg(&self) -> Self {
        self.map_values(|a| self.target.neg(a))
    }

    pub fn scale(&self, n: i64) -> Self {
        self.map_values(|a| self.target.mul_int(a, n))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| self.target.is_zero(v))
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    /// `x -> f(perm[x])`.
    pub fn pull_back(&self, perm: &[u32]) -> Self {
        TableFn {
            domain: self.domain.clone(),
            target: self.target.clone(),
            values: perm.iter().map(|&y| self.values[y as usize].clone()).collect(),
        }
    }

    /// `f(T^{e_i} x) - f(x)`.
    pub fn derivative_gen(&self, i: usize) -> Self {
        let perm = self.domain.generator(i);
        TableFn {
            domain: self.domain.clone(),
            target: self.target.clone(),
            values: (0..self.values.len())
                .map(|x| self.target.sub(&self.values[perm[x] as usize], &self.values[x]))
                .collect(),
        }
    }

    /// `f(T^g x) - f(x)`.
    pub fn derivative(&self, g: &GroupElem) -> Result<Self> {
        let perm = self.domain.shift_perm(g)?;
        Ok(self.pull_back(&perm).sub(self))
    }
}

impl GroupValuedFunction {
    /// `xi o f`.
    pub fn character(&self, xi: &Character) -> TorusFunction {
        let g = self.target.clone();
        self.map_target(Torus, |u| g.pair(xi, u).expect("character shape checked by caller"))
    }
}
