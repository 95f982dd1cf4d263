use num_integer::Integer;

use super::group::{FinAbGroup, GroupElem};
use super::subgroup::Subgroup;
use crate::error::{Error, Result};

pub(crate) fn mulmod(a: i64, b: i64, m: i64) -> i64 {
    (a as i128 * b as i128).rem_euclid(m as i128) as i64
}

pub fn inv_mod(a: i64, m: i64) -> Option<i64> {
    let eg = a.rem_euclid(m).extended_gcd(&m);
    (eg.gcd == 1).then(|| eg.x.rem_euclid(m))
}

/// Returns `(u, g)` with `u` a unit mod `e`, `g = gcd(a, e)` and `u * a = g (mod e)`.
fn normalizing_unit(a: i64, e: i64) -> (i64, i64) {
    let g = a.gcd(&e);
    let f = e / g;
    let mut u = inv_mod(a / g, f).unwrap_or(0);
    while u.gcd(&e) != 1 {
        u += f;
    }
    (u % e, g)
}

/// `P A Q = diag(d)` over `Z/e`, with `P`, `Q` invertible.
///
/// Diagonal entries are divisors of `e`; a zero entry is stored as `e`.
pub struct Diagonalization {
    pub e: i64,
    pub rows: usize,
    pub cols: usize,
    pub diag: Vec<i64>,
    pub q: Vec<Vec<i64>>,
    pub p: Option<Vec<Vec<i64>>>,
    pub p_inv: Option<Vec<Vec<i64>>>,
}

struct Work<'a> {
    e: i64,
    m: Vec<Vec<i64>>,
    q: Vec<Vec<i64>>,
    p: Option<(Vec<Vec<i64>>, Vec<Vec<i64>>)>,
    rhs: &'a mut [Vec<i64>],
}

impl Work<'_> {
    fn swap_rows(&mut self, a: usize, b: usize) {
        self.m.swap(a, b);
        if let Some((p, pinv)) = &mut self.p {
            p.swap(a, b);
            for row in pinv.iter_mut() {
                row.swap(a, b);
            }
        }
        for v in self.rhs.iter_mut() {
            v.swap(a, b);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for row in self.m.iter_mut() {
            row.swap(a, b);
        }
        for row in self.q.iter_mut() {
            row.swap(a, b);
        }
    }

    fn scale_row(&mut self, t: usize, u: i64) {
        let e = self.e;
        for x in self.m[t].iter_mut() {
            *x = mulmod(*x, u, e);
        }
        if let Some((p, pinv)) = &mut self.p {
            for x in p[t].iter_mut() {
                *x = mulmod(*x, u, e);
            }
            let ui = inv_mod(u, e).expect("unit");
            for row in pinv.iter_mut() {
                row[t] = mulmod(row[t], ui, e);
            }
        }
        for v in self.rhs.iter_mut() {
            v[t] = mulmod(v[t], u, e);
        }
    }

    /// Replaces rows `(t, i)` by `(a*t + b*i, c*t + d*i)` for a determinant-one matrix.
    fn mix_rows(&mut self, t: usize, i: usize, [a, b, c, d]: [i64; 4]) {
        let e = self.e;
        let mix = |x: i64, y: i64| {
            (
                (a as i128 * x as i128 + b as i128 * y as i128).rem_euclid(e as i128) as i64,
                (c as i128 * x as i128 + d as i128 * y as i128).rem_euclid(e as i128) as i64,
            )
        };
        let (rt, ri) = pair_mut(&mut self.m, t, i);
        for (x, y) in rt.iter_mut().zip(ri.iter_mut()) {
            (*x, *y) = mix(*x, *y);
        }
        if let Some((p, pinv)) = &mut self.p {
            let (rt, ri) = pair_mut(p, t, i);
            for (x, y) in rt.iter_mut().zip(ri.iter_mut()) {
                (*x, *y) = mix(*x, *y);
            }
            // inverse of [[a,b],[c,d]] is [[d,-b],[-c,a]], applied on the right
            for row in pinv.iter_mut() {
                let (x, y) = (row[t] as i128, row[i] as i128);
                row[t] = (x * d as i128 - y * c as i128).rem_euclid(e as i128) as i64;
                row[i] = (-x * b as i128 + y * a as i128).rem_euclid(e as i128) as i64;
            }
        }
        for v in self.rhs.iter_mut() {
            (v[t], v[i]) = mix(v[t], v[i]);
        }
    }

    fn mix_cols(&mut self, t: usize, j: usize, [a, b, c, d]: [i64; 4]) {
        let e = self.e as i128;
        for mat in [&mut self.m, &mut self.q] {
            for row in mat.iter_mut() {
                let (x, y) = (row[t] as i128, row[j] as i128);
                row[t] = (a as i128 * x + b as i128 * y).rem_euclid(e) as i64;
                row[j] = (c as i128 * x + d as i128 * y).rem_euclid(e) as i64;
            }
        }
    }
}

fn pair_mut<T>(v: &mut [T], a: usize, b: usize) -> (&mut T, &mut T) {
    assert!(a < b);
    let (lo, hi) = v.split_at_mut(b);
    (&mut lo[a], &mut hi[0])
}

fn bezout(g: i64, x: i64) -> [i64; 4] {
    let eg = g.extended_gcd(&x);
    let h = eg.gcd;
    [eg.x, eg.y, -(x / h), g / h]
}

/// Diagonalizes `mat` (a list of rows with `ncols` entries each) over `Z/e`.
///
/// The row operations are also applied to every vector in `rhs` (each of length `rows`).
pub fn diagonalize(
    mat: &[Vec<i64>],
    ncols: usize,
    e: i64,
    track_p: bool,
    rhs: &mut [Vec<i64>],
) -> Diagonalization {
    let rows = mat.len();
    let identity = |n: usize| -> Vec<Vec<i64>> {
        (0..n)
            .map(|i| (0..n).map(|j| i64::from(i == j) % e).collect())
            .collect()
    };
    for v in rhs.iter_mut() {
        for x in v.iter_mut() {
            *x = x.rem_euclid(e);
        }
    }
    let mut w = Work {
        e,
        m: mat
            .iter()
            .map(|r| {
                debug_assert_eq!(r.len(), ncols);
                r.iter().map(|x| x.rem_euclid(e)).collect()
            })
            .collect(),
        q: identity(ncols),
        p: track_p.then(|| (identity(rows), identity(rows))),
        rhs,
    };
    let n = rows.min(ncols);
    let mut diag = vec![e; n];
    for t in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        'search: for i in t..rows {
            for j in t..ncols {
                let x = w.m[i][j];
                if x != 0 {
                    let g = x.gcd(&e);
                    if best.map_or(true, |(bg, _, _)| g < bg) {
                        best = Some((g, i, j));
                        if g == 1 {
                            break 'search;
                        }
                    }
                }
            }
        }
        let Some((_, pi, pj)) = best else { break };
        if pi != t {
            w.swap_rows(t, pi);
        }
        if pj != t {
            w.swap_cols(t, pj);
        }
        let g = loop {
            let (u, g) = normalizing_unit(w.m[t][t], e);
            if u != 1 {
                w.scale_row(t, u);
            }
            if let Some(i) = (t + 1..rows).find(|&i| w.m[i][t] % g != 0) {
                let x = w.m[i][t];
                w.mix_rows(t, i, bezout(g, x));
                continue;
            }
            if let Some(j) = (t + 1..ncols).find(|&j| w.m[t][j] % g != 0) {
                let x = w.m[t][j];
                w.mix_cols(t, j, bezout(g, x));
                continue;
            }
            break g;
        };
        for i in t + 1..rows {
            let x = w.m[i][t];
            if x != 0 {
                w.mix_rows(t, i, [1, 0, -(x / g), 1]);
            }
        }
        for j in t + 1..ncols {
            let x = w.m[t][j];
            if x != 0 {
                w.mix_cols(t, j, [1, 0, -(x / g), 1]);
            }
        }
        diag[t] = g;
    }
    let (p, p_inv) = match w.p {
        Some((p, pi)) => (Some(p), Some(pi)),
        None => (None, None),
    };
    Diagonalization {
        e,
        rows,
        cols: ncols,
        diag,
        q: w.q,
        p,
        p_inv,
    }
}

impl Diagonalization {
    /// Order of the `i`-th kernel coordinate (1 means no kernel in that direction).
    pub fn kernel_order(&self, i: usize) -> i64 {
        self.diag.get(i).copied().unwrap_or(self.e)
    }

    /// An independent cyclic basis of the kernel in `(Z/e)^cols`, with orders.
    pub fn kernel_basis(&self) -> Vec<(Vec<i64>, i64)> {
        (0..self.cols)
            .filter_map(|i| {
                let d = self.kernel_order(i);
                (d > 1).then(|| {
                    let s = self.e / d;
                    (self.q.iter().map(|row| mulmod(row[i], s, self.e)).collect(), d)
                })
            })
            .collect()
    }

    /// Solves `A x = b` given `c = P b` (obtained through the `rhs` argument).
    pub fn solve_transformed(&self, c: &[i64]) -> Option<Vec<i64>> {
        let mut y = vec![0i64; self.cols];
        for (i, &ci) in c.iter().enumerate() {
            if i < self.diag.len() {
                let d = self.diag[i];
                if ci % d != 0 {
                    return None;
                }
                y[i] = if d == self.e { 0 } else { ci / d };
            } else if ci != 0 {
                return None;
            }
        }
        Some(
            self.q
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&y)
                        .fold(0i128, |acc, (a, b)| (acc + *a as i128 * *b as i128) % self.e as i128)
                        as i64
                })
                .collect(),
        )
    }
}

pub fn kernel_mod(mat: &[Vec<i64>], ncols: usize, e: i64) -> Vec<(Vec<i64>, i64)> {
    diagonalize(mat, ncols, e, false, &mut []).kernel_basis()
}

pub fn solve_mod(mat: &[Vec<i64>], ncols: usize, e: i64, b: &[i64]) -> Option<Vec<i64>> {
    let mut rhs = vec![b.to_vec()];
    let d = diagonalize(mat, ncols, e, false, &mut rhs);
    d.solve_transformed(&rhs[0])
}

/// A homomorphism between finite abelian groups, given by the images of the standard generators.
#[derive(Clone, Debug)]
pub struct Hom {
    domain: FinAbGroup,
    codomain: FinAbGroup,
    images: Vec<GroupElem>,
}

impl Hom {
    pub fn new(domain: FinAbGroup, codomain: FinAbGroup, images: Vec<GroupElem>) -> Result<Self> {
        if images.len() != domain.rank() {
            return Err(Error::ShapeMismatch {
                expected: domain.rank(),
                got: images.len(),
            });
        }
        for (j, img) in images.iter().enumerate() {
            if !codomain.contains(img) {
                return Err(Error::InvalidGroup(format!(
                    "image of generator {j} is not a reduced element of the codomain"
                )));
            }
            if !codomain.mul(img, domain.moduli()[j]).is_zero() {
                return Err(Error::InvalidGroup(format!(
                    "generator {j} has order dividing {} but its image does not",
                    domain.moduli()[j]
                )));
            }
        }
        Ok(Hom {
            domain,
            codomain,
            images,
        })
    }

    pub fn domain(&self) -> &FinAbGroup {
        &self.domain
    }

    pub fn codomain(&self) -> &FinAbGroup {
        &self.codomain
    }

    pub fn images(&self) -> &[GroupElem] {
        &self.images
    }

    pub fn apply(&self, x: &GroupElem) -> GroupElem {
        self.codomain.combine(&x.coeffs, &self.images)
    }

    fn modulus(&self) -> i64 {
        self.domain.exponent().lcm(&self.codomain.exponent())
    }

    fn scaled_rows(&self) -> Vec<Vec<i64>> {
        let e = self.modulus();
        self.codomain
            .moduli()
            .iter()
            .enumerate()
            .map(|(i, m)| {
                self.images
                    .iter()
                    .map(|img| mulmod(img.coeffs[i], e / m, e))
                    .collect()
            })
            .collect()
    }

    pub fn kernel(&self) -> Subgroup {
        let e = self.modulus();
        let basis = kernel_mod(&self.scaled_rows(), self.domain.rank(), e);
        let gens = basis
            .into_iter()
            .map(|(v, _)| self.domain.reduce(&v))
            .collect();
        Subgroup::span(&self.domain, gens).expect("kernel vectors have domain shape")
    }

    pub fn image(&self) -> Subgroup {
        Subgroup::span(&self.codomain, self.images.clone()).expect("validated images")
    }

    /// Some `x` with `self.apply(x) == b`, if one exists.
    pub fn solve(&self, b: &GroupElem) -> Option<GroupElem> {
        let e = self.modulus();
        let rhs: Vec<i64> = b
            .coeffs
            .iter()
            .zip(self.codomain.moduli())
            .map(|(x, m)| mulmod(*x, e / m, e))
            .collect();
        solve_mod(&self.scaled_rows(), self.domain.rank(), e, &rhs).map(|x| self.domain.reduce(&x))
    }
}
