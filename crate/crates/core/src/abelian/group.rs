use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::torus::TorusValue;
use crate::error::{Error, Result};

/// The finite abelian group `Z/m_1 + ... + Z/m_r`.
///
/// Moduli of 1 are accepted as padding factors. Elements iterate in
/// lexicographic order of their coefficient vectors (last coordinate fastest).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FinAbGroup {
    moduli: Vec<i64>,
    exponent: i64,
    order: i64,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupElem {
    pub coeffs: Vec<i64>,
}

/// A character `xi`, identified with `(xi_i / m_i)_i`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Character {
    pub coeffs: Vec<i64>,
}

impl fmt::Debug for GroupElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coeffs)
    }
}

impl fmt::Debug for Character {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "xi{:?}", self.coeffs)
    }
}

impl fmt::Debug for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.moduli.iter().map(|m| format!("Z/{m}")).collect();
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join("+"))
        }
    }
}

impl FinAbGroup {
    pub fn new(moduli: Vec<i64>) -> Result<Self> {
        if moduli.is_empty() {
            return Err(Error::InvalidGroup("empty moduli list".into()));
        }
        Self::from_moduli(moduli)
    }

    /// Like [`FinAbGroup::new`] but also accepts the empty list (the trivial group).
    pub fn from_moduli(moduli: Vec<i64>) -> Result<Self> {
        let mut order: i64 = 1;
        let mut exponent: i64 = 1;
        for &m in &moduli {
            if m < 1 {
                return Err(Error::InvalidGroup(format!("modulus {m} is not positive")));
            }
            order = order.saturating_mul(m);
            exponent = exponent.lcm(&m);
        }
        Ok(FinAbGroup {
            moduli,
            exponent,
            order,
        })
    }

    /// Validates that every modulus divides the declared exponent `m`.
    pub fn with_declared_exponent(moduli: Vec<i64>, m: i64) -> Result<Self> {
        let g = Self::new(moduli)?;
        if let Some(bad) = g.moduli.iter().find(|&&mi| m % mi != 0) {
            return Err(Error::InvalidGroup(format!(
                "modulus {bad} does not divide declared exponent {m}"
            )));
        }
        Ok(g)
    }

    pub fn trivial() -> Self {
        FinAbGroup {
            moduli: vec![],
            exponent: 1,
            order: 1,
        }
    }

    pub fn cyclic(m: i64) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn moduli(&self) -> &[i64] {
        &self.moduli
    }

    pub fn rank(&self) -> usize {
        self.moduli.len()
    }

    /// Saturates at `i64::MAX` for groups too large to enumerate.
    pub fn order(&self) -> i64 {
        self.order
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn direct_sum(&self, other: &FinAbGroup) -> Result<FinAbGroup> {
        let mut m = self.moduli.clone();
        m.extend_from_slice(&other.moduli);
        Self::from_moduli(m)
    }

    /// `self` repeated `n` times.
    pub fn power(&self, n: usize) -> Result<FinAbGroup> {
        let mut m = Vec::with_capacity(self.rank() * n);
        for _ in 0..n {
            m.extend_from_slice(&self.moduli);
        }
        Self::from_moduli(m)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.rank() {
            return Err(Error::ShapeMismatch {
                expected: self.rank(),
                got: len,
            });
        }
        Ok(())
    }

    /// Builds an element, reducing each coefficient modulo its cyclic order.
    pub fn elem(&self, coeffs: &[i64]) -> Result<GroupElem> {
        self.check_len(coeffs.len())?;
        Ok(self.reduce(coeffs))
    }

    pub(crate) fn reduce(&self, coeffs: &[i64]) -> GroupElem {
        GroupElem {
            coeffs: coeffs
                .iter()
                .zip(&self.moduli)
                .map(|(c, m)| c.rem_euclid(*m))
                .collect(),
        }
    }

    pub fn character(&self, coeffs: &[i64]) -> Result<Character> {
        self.check_len(coeffs.len())?;
        Ok(Character {
            coeffs: self.reduce(coeffs).coeffs,
        })
    }

    pub fn contains(&self, g: &GroupElem) -> bool {
        g.coeffs.len() == self.rank()
            && g
                .coeffs
                .iter()
                .zip(&self.moduli)
                .all(|(c, m)| (0..*m).contains(c))
    }

    pub fn zero(&self) -> GroupElem {
        GroupElem {
            coeffs: vec![0; self.rank()],
        }
    }

    /// The `i`-th standard generator.
    pub fn basis(&self, i: usize) -> GroupElem {
        let mut c = vec![0; self.rank()];
        c[i] = 1 % self.moduli[i];
        GroupElem { coeffs: c }
    }

    pub fn add(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        GroupElem {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .zip(&self.moduli)
                .map(|((x, y), m)| (x + y) % m)
                .collect(),
        }
    }

    pub fn sub(&self, a: &GroupElem, b: &GroupElem) -> GroupElem {
        GroupElem {
            coeffs: a
                .coeffs
                .iter()
                .zip(&b.coeffs)
                .zip(&self.moduli)
                .map(|((x, y), m)| (x - y).rem_euclid(*m))
                .collect(),
        }
    }

    pub fn neg(&self, a: &GroupElem) -> GroupElem {
        GroupElem {
            coeffs: a
                .coeffs
                .iter()
                .zip(&self.moduli)
                .map(|(x, m)| (-x).rem_euclid(*m))
                .collect(),
        }
    }

    pub fn mul(&self, a: &GroupElem, n: i64) -> GroupElem {
        GroupElem {
            coeffs: a
                .coeffs
                .iter()
                .zip(&self.moduli)
                .map(|(x, m)| ((*x as i128 * n as i128).rem_euclid(*m as i128)) as i64)
                .collect(),
        }
    }

    /// Integer combination `sum_t c_t * g_t`.
    pub fn combine(&self, coeffs: &[i64], elems: &[GroupElem]) -> GroupElem {
        let mut acc = self.zero();
        for (c, g) in coeffs.iter().zip(elems) {
            acc = self.add(&acc, &self.mul(g, *c));
        }
        acc
    }

    pub fn elem_order(&self, a: &GroupElem) -> i64 {
        a.coeffs
            .iter()
            .zip(&self.moduli)
            .fold(1i64, |acc, (x, m)| acc.lcm(&(m / x.gcd(m))))
    }

    pub fn index_of(&self, g: &GroupElem) -> usize {
        let mut idx = 0usize;
        for (c, m) in g.coeffs.iter().zip(&self.moduli) {
            idx = idx * (*m as usize) + (*c as usize);
        }
        idx
    }

    pub fn elem_at(&self, mut idx: usize) -> GroupElem {
        let mut coeffs = vec![0i64; self.rank()];
        for (slot, m) in coeffs.iter_mut().zip(&self.moduli).rev() {
            *slot = (idx % *m as usize) as i64;
            idx /= *m as usize;
        }
        GroupElem { coeffs }
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElem> + '_ {
        (0..self.order as usize).map(move |i| self.elem_at(i))
    }

    pub fn characters(&self) -> impl Iterator<Item = Character> + '_ {
        self.elements().map(|g| Character { coeffs: g.coeffs })
    }

    /// The pairing `sum_i xi_i g_i / m_i mod 1`.
    pub fn pair(&self, xi: &Character, g: &GroupElem) -> Result<TorusValue> {
        self.check_len(xi.coeffs.len())?;
        self.check_len(g.coeffs.len())?;
        let e = self.exponent as i128;
        let mut acc: i128 = 0;
        for ((x, y), m) in xi.coeffs.iter().zip(&g.coeffs).zip(&self.moduli) {
            acc = (acc + (*x as i128) * (*y as i128) % e * (e / *m as i128)) % e;
        }
        Ok(TorusValue::new(acc as i64, self.exponent))
    }
}

impl GroupElem {
    pub fn new(coeffs: Vec<i64>) -> Self {
        GroupElem { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

impl Character {
    pub fn new(coeffs: Vec<i64>) -> Self {
        Character { coeffs }
    }

    pub fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn as_elem(&self) -> GroupElem {
        GroupElem {
            coeffs: self.coeffs.clone(),
        }
    }
}
