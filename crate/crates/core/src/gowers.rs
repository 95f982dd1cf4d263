use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use num_rational::Ratio;
use rayon::prelude::*;

use crate::abelian::{GroupElem, TorusValue};
use crate::error::{check_guard, Error, Result};
use crate::systems::GammaSystem;
use crate::target::TorusFunction;

/// Default cap on the number of `(x, h_1, ..., h_d)` cells a Gowers computation may visit.
pub const DEFAULT_GUARD_CELLS: u128 = 50_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexFunction {
    domain: Arc<GammaSystem>,
    values: Vec<Complex64>,
}

impl ComplexFunction {
    pub fn new(domain: Arc<GammaSystem>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::ShapeMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Parse("non-finite complex value".into()));
        }
        Ok(ComplexFunction { domain, values })
    }

    pub fn from_fn(domain: &Arc<GammaSystem>, f: impl Fn(usize) -> Complex64) -> Self {
        ComplexFunction {
            domain: domain.clone(),
            values: (0..domain.len()).map(f).collect(),
        }
    }

    pub fn constant(domain: &Arc<GammaSystem>, c: Complex64) -> Self {
        Self::from_fn(domain, |_| c)
    }

    /// `e(P)`.
    pub fn phase(p: &TorusFunction) -> Self {
        ComplexFunction {
            domain: p.domain().clone(),
            values: p.values().iter().map(TorusValue::expi).collect(),
        }
    }

    pub fn domain(&self) -> &Arc<GammaSystem> {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn is_one_bounded(&self, tol: f64) -> bool {
        self.max_abs() <= 1.0 + tol
    }

    pub fn mean(&self) -> Complex64 {
        let mut s = CSum::default();
        for v in &self.values {
            s.add(*v);
        }
        s.value() / self.values.len() as f64
    }
}

/// Neumaier-compensated complex sum.
#[derive(Clone, Copy, Default, Debug)]
pub(crate) struct CSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn neumaier(acc: &mut (f64, f64), x: f64) {
    let (s, c) = *acc;
    let t = s + x;
    let c = if s.abs() >= x.abs() { c + ((s - t) + x) } else { c + ((x - t) + s) };
    *acc = (t, c);
}

impl CSum {
    pub(crate) fn add(&mut self, z: Complex64) {
        neumaier(&mut self.re, z.re);
        neumaier(&mut self.im, z.im);
    }

    pub(crate) fn merge(&mut self, other: &CSum) {
        self.add(Complex64::new(other.re.0, other.im.0));
        self.add(Complex64::new(other.re.1, other.im.1));
    }

    pub(crate) fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

/// `x -> f(T^h x) conj(f(x))`.
pub fn mult_derivative(f: &ComplexFunction, h: &GroupElem) -> Result<ComplexFunction> {
    let perm = f.domain.shift_perm(h)?;
    Ok(shifted_product(f, &perm))
}

fn shifted_product(f: &ComplexFunction, perm: &[u32]) -> ComplexFunction {
    ComplexFunction {
        domain: f.domain.clone(),
        values: perm.iter().zip(&f.values).map(|(&y, v)| f.values[y as usize] * v.conj()).collect(),
    }
}

/// `E_x |A f(x)|^2` where `A` averages over the `Gamma`-orbit; `|E f|^2` on transitive systems.
fn u1_power(f: &ComplexFunction) -> f64 {
    let sys = &f.domain;
    let mut total = CSum::default();
    for orbit in sys.orbits() {
        let mut s = CSum::default();
        for &x in orbit {
            s.add(f.values[x as usize]);
        }
        let avg = s.value() / orbit.len() as f64;
        total.add(Complex64::new(avg.norm_sqr() * orbit.len() as f64, 0.0));
    }
    total.value().re / sys.len() as f64
}

fn power_rec(f: &ComplexFunction, d: usize, shifts: &[Vec<u32>]) -> f64 {
    if d == 1 {
        return u1_power(f);
    }
    let mut s = CSum::default();
    for perm in shifts {
        s.add(Complex64::new(power_rec(&shifted_product(f, perm), d - 1, shifts), 0.0));
    }
    s.value().re / shifts.len() as f64
}

/// `||f||_{U^d}^{2^d}`.
pub fn gowers_power(f: &ComplexFunction, d: usize, guard: u128) -> Result<f64> {
    if d == 0 {
        return Err(Error::Precondition("Gowers norms need d >= 1".into()));
    }
    let sys = &f.domain;
    let g = sys.gamma().order() as u128;
    let cells = g.checked_pow(d as u32 - 1).and_then(|c| c.checked_mul(sys.len() as u128)).unwrap_or(u128::MAX);
    check_guard("Gowers cells", cells, guard)?;
    if d == 1 {
        return Ok(u1_power(f));
    }
    let shifts = sys.shift_table(guard)?;
    let parts: Vec<f64> = shifts
        .par_iter()
        .map(|perm| power_rec(&shifted_product(f, perm), d - 1, &shifts))
        .collect();
    let mut s = CSum::default();
    for p in parts {
        s.add(Complex64::new(p, 0.0));
    }
    let v = s.value().re / shifts.len() as f64;
    if v < -1e-12 {
        return Err(Error::Precondition(format!("negative Gowers power {v}")));
    }
    Ok(v.max(0.0))
}

pub fn gowers_norm(f: &ComplexFunction, d: usize, guard: u128) -> Result<f64> {
    Ok(gowers_power(f, d, guard)?.powf(1.0 / (1u64 << d) as f64))
}

/// `E_{x, h_1..h_d} prod_w C^{|w|} f_w(T^{w.h} x)` with `fs.len() == 2^d`; bit `j` of `w` pairs with `h_j`.
pub fn gowers_inner(fs: &[ComplexFunction], guard: u128) -> Result<Complex64> {
    let count = fs.len();
    if count == 0 || !count.is_power_of_two() {
        return Err(Error::Precondition(format!("gowers_inner needs 2^d functions, got {count}")));
    }
    let d = count.trailing_zeros() as usize;
    let sys = fs[0].domain.clone();
    if fs.iter().any(|f| *f.domain != *sys) {
        return Err(Error::Precondition("gowers_inner functions live on different domains".into()));
    }
    let g = sys.gamma().order() as u128;
    let cells = g.checked_pow(d as u32).and_then(|c| c.checked_mul(sys.len() as u128 * count as u128)).unwrap_or(u128::MAX);
    check_guard("Gowers inner cells", cells, guard)?;
    let shifts = sys.shift_table(guard)?;
    let gamma = sys.gamma().clone();
    let ng = shifts.len();
    let total_h = ng.pow(d as u32);
    let parts: Vec<CSum> = (0..total_h)
        .into_par_iter()
        .map(|hidx| {
            let mut hs = Vec::with_capacity(d);
            let mut r = hidx;
            for _ in 0..d {
                hs.push(gamma.elem_at(r % ng));
                r /= ng;
            }
            let perms: Vec<&Vec<u32>> = (0..count)
                .map(|w| {
                    let mut acc = gamma.zero();
                    for (j, h) in hs.iter().enumerate() {
                        if w >> j & 1 == 1 {
                            acc = gamma.add(&acc, h);
                        }
                    }
                    &shifts[gamma.index_of(&acc)]
                })
                .collect();
            let mut s = CSum::default();
            for x in 0..sys.len() {
                let mut prod = Complex64::new(1.0, 0.0);
                for (w, perm) in perms.iter().enumerate() {
                    let v = fs[w].values[perm[x] as usize];
                    prod *= if (w.count_ones() & 1) == 1 { v.conj() } else { v };
                }
                s.add(prod);
            }
            s
        })
        .collect();
    let mut s = CSum::default();
    for p in &parts {
        s.merge(p);
    }
    Ok(s.value() / (total_h as f64 * sys.len() as f64))
}

/// `E_x f(x) e(-P(x))`.
pub fn correlate(f: &ComplexFunction, p: &TorusFunction) -> Result<Complex64> {
    if f.values.len() != p.values().len() {
        return Err(Error::ShapeMismatch {
            expected: f.values.len(),
            got: p.values().len(),
        });
    }
    let mut s = CSum::default();
    for (v, q) in f.values.iter().zip(p.values()) {
        s.add(v * (-*q).expi());
    }
    Ok(s.value() / f.values.len() as f64)
}

/// `||e(P)||_{U^d}^{2^d}` from the multiset of top-level phases.
#[derive(Clone, Debug)]
pub struct PhaseGowers {
    pub d: usize,
    pub cells: u64,
    pub phases: BTreeMap<TorusValue, u64>,
    /// Present when every phase lies in `{0, 1/2}`.
    pub exact: Option<Ratio<i128>>,
    pub value: f64,
}

fn phase_hist(p: &[TorusValue], level: usize, shifts: &[Vec<u32>], out: &mut BTreeMap<TorusValue, u64>) {
    if level == 0 {
        for v in p {
            *out.entry(*v).or_insert(0) += 1;
        }
        return;
    }
    for perm in shifts {
        let dp: Vec<TorusValue> = perm.iter().zip(p).map(|(&y, v)| p[y as usize] - *v).collect();
        phase_hist(&dp, level - 1, shifts, out);
    }
}

pub fn phase_gowers_exact(p: &TorusFunction, d: usize, guard: u128) -> Result<PhaseGowers> {
    let sys = p.domain();
    let g = sys.gamma().order() as u128;
    let cells = g.checked_pow(d as u32).and_then(|c| c.checked_mul(sys.len() as u128)).unwrap_or(u128::MAX);
    check_guard("phase Gowers cells", cells, guard)?;
    let shifts = sys.shift_table(guard)?;
    let parts: Vec<BTreeMap<TorusValue, u64>> = if d == 0 {
        let mut m = BTreeMap::new();
        phase_hist(p.values(), 0, &shifts, &mut m);
        vec![m]
    } else {
        shifts
            .par_iter()
            .map(|perm| {
                let vals = p.values();
                let dp: Vec<TorusValue> = perm.iter().zip(vals).map(|(&y, v)| vals[y as usize] - *v).collect();
                let mut m = BTreeMap::new();
                phase_hist(&dp, d - 1, &shifts, &mut m);
                m
            })
            .collect()
    };
    let mut phases = BTreeMap::new();
    for m in parts {
        for (k, v) in m {
            *phases.entry(k).or_insert(0u64) += v;
        }
    }
    let half = TorusValue::new(1, 2);
    let exact = phases.keys().all(|v| v.is_zero() || *v == half).then(|| {
        let zeros = *phases.get(&TorusValue::ZERO).unwrap_or(&0) as i128;
        let halves = *phases.get(&half).unwrap_or(&0) as i128;
        Ratio::new(zeros - halves, cells as i128)
    });
    let mut s = CSum::default();
    for (v, &c) in &phases {
        s.add(v.expi() * c as f64);
    }
    let value = match exact {
        Some(r) => *r.numer() as f64 / *r.denom() as f64,
        None => s.value().re / cells as f64,
    };
    Ok(PhaseGowers {
        d,
        cells: cells as u64,
        phases,
        exact,
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abelian::FinAbGroup;
    use crate::target::Torus;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tsys(moduli: Vec<i64>) -> Arc<GammaSystem> {
        Arc::new(GammaSystem::translation(&FinAbGroup::new(moduli).unwrap()))
    }

    #[test]
    fn constants_and_characters() {
        let s = tsys(vec![4]);
        let one = ComplexFunction::constant(&s, Complex64::new(1.0, 0.0));
        for d in 1..4 {
            assert!((gowers_norm(&one, d, DEFAULT_GUARD_CELLS).unwrap() - 1.0).abs() < 1e-12);
        }
        let p = TorusFunction::from_fn(&s, Torus, |x| TorusValue::new(x as i64, 4));
        let f = ComplexFunction::phase(&p);
        let df = mult_derivative(&f, &GroupElem::new(vec![1])).unwrap();
        assert!(df.values().iter().all(|v| (*v - Complex64::new(0.0, 1.0)).norm() < 1e-15));
        assert!(gowers_norm(&f, 1, DEFAULT_GUARD_CELLS).unwrap() < 1e-12);
        assert!((gowers_norm(&f, 2, DEFAULT_GUARD_CELLS).unwrap() - 1.0).abs() < 1e-12);
        assert!((correlate(&f, &p).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn u2_fourier_and_inner() {
        let g = FinAbGroup::new(vec![2, 2, 2, 2]).unwrap();
        let s = Arc::new(GammaSystem::translation(&g));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let vals = (0..16).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.7).collect();
        let f = ComplexFunction::new(s.clone(), vals).unwrap();
        let mut four = 0.0;
        for xi in g.characters() {
            let mut c = Complex64::new(0.0, 0.0);
            for (x, v) in g.elements().zip(f.values()) {
                c += v * (-g.pair(&xi, &x).unwrap()).expi();
            }
            four += (c / 16.0).norm_sqr().powi(2);
        }
        let u2 = gowers_norm(&f, 2, DEFAULT_GUARD_CELLS).unwrap();
        assert!((u2 - four.powf(0.25)).abs() < 1e-9);
        let inner = gowers_inner(&vec![f.clone(); 4], DEFAULT_GUARD_CELLS).unwrap();
        assert!((inner.re - u2.powi(4)).abs() < 1e-12 && inner.im.abs() < 1e-12);
    }

    #[test]
    fn exact_phase_values() {
        let s = tsys(vec![2]);
        let p = TorusFunction::from_fn(&s, Torus, |x| TorusValue::new(x as i64, 2));
        let r = phase_gowers_exact(&p, 1, DEFAULT_GUARD_CELLS).unwrap();
        assert_eq!(r.exact, Some(Ratio::new(0, 1)));
        let r = phase_gowers_exact(&p, 2, DEFAULT_GUARD_CELLS).unwrap();
        assert_eq!(r.exact, Some(Ratio::new(1, 1)));
    }
}
