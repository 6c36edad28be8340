//! Polynomial differential forms on standard simplices.
//!
//! `(A_PL)_n` is the graded commutative algebra
//! `Q[t_0..t_n, dt_0..dt_n] / (1 - sum t_i, sum dt_i)`. Canonical
//! representatives eliminate the top coordinate: stored terms involve only
//! `t_0..t_{n-1}` and `dt_0..dt_{n-1}`, with `dt` factors strictly
//! increasing. Face maps pull back along the coordinate inclusions, and the
//! orientation convention for integration is that `dt_1 ∧ … ∧ dt_n` is
//! positive on the simplex in coordinates `(t_1..t_n)`, `t_0 = 1 - Σ`.

use crate::error::{Error, Result};
use crate::sign::{insert_sign, merge_sign, pow_sign};
use crate::{linalg, qi, Q};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;

/// Monomial part of a form term: `t` exponents (length = simplex dimension)
/// and the strictly increasing list of `dt` indices.
pub type AplMono = (Vec<u32>, Vec<u8>);

/// A homogeneous polynomial differential form on the `dim`-simplex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct APLForm {
    pub dim: usize,
    pub degree: usize,
    pub terms: BTreeMap<AplMono, Q>,
}

impl APLForm {
    pub fn zero(dim: usize, degree: usize) -> APLForm {
        APLForm {
            dim,
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: Q) -> APLForm {
        let mut f = APLForm::zero(dim, 0);
        if !c.is_zero() {
            f.terms.insert((vec![0; dim], vec![]), c);
        }
        f
    }

    pub fn one(dim: usize) -> APLForm {
        APLForm::constant(dim, qi(1))
    }

    /// The coordinate `t_j` as a form; `j == dim` yields the eliminated
    /// coordinate `1 - t_0 - … - t_{dim-1}`.
    pub fn t(dim: usize, j: usize) -> APLForm {
        assert!(j <= dim, "coordinate index out of range");
        let mut f = APLForm::zero(dim, 0);
        if j < dim {
            let mut e = vec![0; dim];
            e[j] = 1;
            f.terms.insert((e, vec![]), qi(1));
        } else {
            f.terms.insert((vec![0; dim], vec![]), qi(1));
            for i in 0..dim {
                let mut e = vec![0; dim];
                e[i] = 1;
                f.terms.insert((e, vec![]), qi(-1));
            }
        }
        f
    }

    /// The one-form `dt_j`; `j == dim` yields `-dt_0 - … - dt_{dim-1}`.
    pub fn dt(dim: usize, j: usize) -> APLForm {
        assert!(j <= dim, "coordinate index out of range");
        let mut f = APLForm::zero(dim, 1);
        if j < dim {
            f.terms.insert((vec![0; dim], vec![j as u8]), qi(1));
        } else {
            for i in 0..dim {
                f.terms.insert((vec![0; dim], vec![i as u8]), qi(-1));
            }
        }
        f
    }

    pub fn monomial(dim: usize, t_exp: Vec<u32>, dts: Vec<u8>, c: Q) -> APLForm {
        assert_eq!(t_exp.len(), dim);
        assert!(dts.windows(2).all(|w| w[0] < w[1]));
        assert!(dts.iter().all(|&j| (j as usize) < dim));
        let degree = dts.len();
        let mut f = APLForm::zero(dim, degree);
        if !c.is_zero() {
            f.terms.insert((t_exp, dts), c);
        }
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, m: AplMono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &APLForm) -> APLForm {
        assert_eq!(self.dim, other.dim);
        assert!(
            self.degree == other.degree || self.is_zero() || other.is_zero(),
            "adding forms of different degree"
        );
        let mut out = self.clone();
        if out.is_zero() {
            out.degree = other.degree;
        }
        for (m, c) in &other.terms {
            out.insert(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> APLForm {
        APLForm {
            dim: self.dim,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &APLForm) -> APLForm {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Q) -> APLForm {
        if c.is_zero() {
            return APLForm::zero(self.dim, self.degree);
        }
        APLForm {
            dim: self.dim,
            degree: self.degree,
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    /// Graded commutative product.
    pub fn wedge(&self, other: &APLForm) -> Result<APLForm> {
        if self.dim != other.dim {
            return Err(Error::Argument(format!(
                "wedge of forms on different simplices ({} vs {})",
                self.dim, other.dim
            )));
        }
        let mut out = APLForm::zero(self.dim, self.degree + other.degree);
        for ((e1, s1), c1) in &self.terms {
            for ((e2, s2), c2) in &other.terms {
                let Some((merged, sign)) = merge_sign(s1, s2) else {
                    continue;
                };
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.insert((e, merged), c1 * c2 * qi(sign as i64));
            }
        }
        Ok(out)
    }

    /// The differential; degree `+1`, `d∘d = 0`.
    pub fn d(&self) -> APLForm {
        let mut out = APLForm::zero(self.dim, self.degree + 1);
        for ((e, s), c) in &self.terms {
            for j in 0..self.dim {
                if e[j] == 0 {
                    continue;
                }
                let Some((dts, sign)) = insert_sign(j as u8, s) else {
                    continue;
                };
                let mut e2 = e.clone();
                e2[j] -= 1;
                out.insert((e2, dts), c * qi(e[j] as i64) * qi(sign as i64));
            }
        }
        out
    }

    /// Substitutes degree-zero forms for the coordinates; `dt_j` maps to
    /// `d(images[j])`. All images must share a common simplex dimension.
    fn substitute(&self, images: &[APLForm]) -> APLForm {
        assert_eq!(images.len(), self.dim);
        let out_dim = images.first().map_or(0, |f| f.dim);
        let d_images: Vec<APLForm> = images.iter().map(|f| f.d()).collect();
        let mut out = APLForm::zero(out_dim, self.degree);
        for ((e, s), c) in &self.terms {
            let mut acc = APLForm::constant(out_dim, c.clone());
            for (j, &ej) in e.iter().enumerate() {
                for _ in 0..ej {
                    acc = acc.wedge(&images[j]).unwrap();
                }
                if acc.is_zero() {
                    break;
                }
            }
            for &j in s {
                acc = acc.wedge(&d_images[j as usize]).unwrap();
                if acc.is_zero() {
                    break;
                }
            }
            for (m, k) in acc.terms {
                out.insert(m, k);
            }
        }
        out
    }

    /// Face map: pullback along the inclusion of the `dim-1`-simplex that
    /// omits vertex `k`.
    pub fn face(&self, k: usize) -> Result<APLForm> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Argument("no faces on the 0-simplex".into()));
        }
        if k > n {
            return Err(Error::Argument(format!("face index {k} out of range 0..={n}")));
        }
        let images: Vec<APLForm> = (0..n)
            .map(|j| {
                if j < k {
                    APLForm::t(n - 1, j)
                } else if j == k {
                    APLForm::zero(n - 1, 0)
                } else {
                    APLForm::t(n - 1, j - 1)
                }
            })
            .collect();
        Ok(self.substitute(&images))
    }

    /// Exact integral over the simplex; zero unless `degree == dim`.
    pub fn integrate(&self) -> Q {
        let n = self.dim;
        if self.degree != n {
            return Q::zero();
        }
        if n == 0 {
            return self
                .terms
                .get(&(vec![], vec![]))
                .cloned()
                .unwrap_or_else(Q::zero);
        }
        // rewrite in the coordinates (t_1..t_n): t_0 becomes the eliminated
        // expression, t_j becomes coordinate j-1
        let images: Vec<APLForm> = (0..n)
            .map(|j| {
                if j == 0 {
                    APLForm::t(n, n)
                } else {
                    APLForm::t(n, j - 1)
                }
            })
            .collect();
        let rewritten = self.substitute(&images);
        let full: Vec<u8> = (0..n as u8).collect();
        let mut total = Q::zero();
        for ((e, s), c) in &rewritten.terms {
            if *s != full {
                continue;
            }
            // Dirichlet integral: prod e_j! / (n + sum e_j)!
            let mut num = Q::one();
            for &ej in e {
                num *= factorial(ej as u64);
            }
            let sum: u64 = e.iter().map(|&x| x as u64).sum();
            total += c * num / factorial(n as u64 + sum);
        }
        total
    }

    /// All monomials of the given form degree with total degree `<= bound`.
    fn monomials_up_to(dim: usize, degree: usize, bound: usize) -> Vec<AplMono> {
        let mut out = Vec::new();
        if degree > dim || degree > bound {
            return out;
        }
        let poly_bound = bound - degree;
        fn rec(exps: &mut Vec<u32>, idx: usize, left: usize, out: &mut Vec<Vec<u32>>) {
            if idx == exps.len() {
                out.push(exps.clone());
                return;
            }
            for e in 0..=left {
                exps[idx] = e as u32;
                rec(exps, idx + 1, left - e, out);
            }
            exps[idx] = 0;
        }
        let mut polys = Vec::new();
        let mut exps = vec![0u32; dim];
        rec(&mut exps, 0, poly_bound, &mut polys);
        let dts = subsets(dim as u8, degree);
        for e in polys {
            for s in &dts {
                out.push((e.clone(), s.clone()));
            }
        }
        out.sort();
        out
    }
}

fn subsets(n: u8, k: usize) -> Vec<Vec<u8>> {
    fn rec(start: u8, n: u8, k: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for j in start..n {
            cur.push(j);
            rec(j + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn factorial(n: u64) -> Q {
    let mut out = Q::one();
    for i in 2..=n {
        out *= qi(i as i64);
    }
    out
}

/// Solves the face-prescription problem: returns a form on the
/// `faces.len()-1`-simplex whose `k`-th face is `faces[k]`, found by an exact
/// linear solve over all monomials of total degree `<= bound`, escalating the
/// bound up to `ceiling`. The solution is the deterministic minimal one
/// (lowest solvable degree, free coefficients zero).
pub fn extend(faces: &[APLForm], ceiling: usize) -> Result<APLForm> {
    if faces.len() < 2 {
        return Err(Error::Argument("need at least two faces".into()));
    }
    let n = faces.len() - 1;
    let degree = faces[0].degree;
    for f in faces {
        if f.dim != n - 1 || f.degree != degree {
            return Err(Error::Argument(
                "faces must live on the boundary simplex with a common degree".into(),
            ));
        }
    }
    // pairwise compatibility: faces of faces must agree
    if n >= 2 {
        for k in 0..=n {
            for j in k..n {
                let left = faces[k].face(j)?;
                let right = faces[j + 1].face(k)?;
                if left != right {
                    return Err(Error::Precondition(format!(
                        "incompatible faces: face {j} of input {k} differs from face {k} of input {}",
                        j + 1
                    )));
                }
            }
        }
    }
    let start = faces
        .iter()
        .flat_map(|f| {
            f.terms
                .keys()
                .map(|(e, s)| e.iter().sum::<u32>() as usize + s.len())
        })
        .max()
        .unwrap_or(degree)
        .max(degree);
    let ceiling = ceiling.max(start);
    for bound in start..=ceiling {
        let basis = APLForm::monomials_up_to(n, degree, bound);
        if basis.is_empty() {
            continue;
        }
        let mut face_images: Vec<Vec<APLForm>> = Vec::new();
        for m in &basis {
            let form = APLForm::monomial(n, m.0.clone(), m.1.clone(), qi(1));
            face_images.push((0..=n).map(|k| form.face(k).unwrap()).collect());
        }
        // rows: one per (face index, target monomial); columns: basis
        let mut row_index: BTreeMap<(usize, AplMono), usize> = BTreeMap::new();
        let mut keys: Vec<(usize, AplMono)> = Vec::new();
        for imgs in &face_images {
            for (k, img) in imgs.iter().enumerate() {
                for m in img.terms.keys() {
                    row_index.entry((k, m.clone())).or_insert_with(|| {
                        keys.push((k, m.clone()));
                        keys.len() - 1
                    });
                }
            }
        }
        for (k, f) in faces.iter().enumerate() {
            for m in f.terms.keys() {
                row_index.entry((k, m.clone())).or_insert_with(|| {
                    keys.push((k, m.clone()));
                    keys.len() - 1
                });
            }
        }
        let mut rows = vec![vec![Q::zero(); basis.len()]; keys.len()];
        let mut rhs = vec![Q::zero(); keys.len()];
        for (col, imgs) in face_images.iter().enumerate() {
            for (k, img) in imgs.iter().enumerate() {
                for (m, c) in &img.terms {
                    rows[row_index[&(k, m.clone())]][col] = c.clone();
                }
            }
        }
        for (k, f) in faces.iter().enumerate() {
            for (m, c) in &f.terms {
                rhs[row_index[&(k, m.clone())]] = c.clone();
            }
        }
        if let Some(sol) = linalg::solve(&rows, &rhs) {
            let mut out = APLForm::zero(n, degree);
            for (col, m) in basis.iter().enumerate() {
                out.insert(m.clone(), sol.solution[col].clone());
            }
            return Ok(out);
        }
    }
    Err(Error::Resource(format!(
        "no extension found up to total degree {ceiling}"
    )))
}

impl fmt::Display for APLForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((e, s), c) in &self.terms {
            let neg = c < &Q::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mut factors = Vec::new();
            if !abs.is_one() || (e.iter().all(|&x| x == 0) && s.is_empty()) {
                factors.push(abs.to_string());
            }
            for (j, &ej) in e.iter().enumerate() {
                if ej == 1 {
                    factors.push(format!("t{j}"));
                } else if ej > 1 {
                    factors.push(format!("t{j}^{ej}"));
                }
            }
            for &j in s {
                factors.push(format!("dt{j}"));
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// Stokes defect `∫ d a - Σ_k (-1)^k ∫ face_k(a)`; zero for every form when
/// the orientation conventions are consistent.
pub fn stokes_defect(a: &APLForm) -> Result<Q> {
    let lhs = a.d().integrate();
    let mut rhs = Q::zero();
    for k in 0..=a.dim {
        rhs += a.face(k)?.integrate() * qi(pow_sign(k as i64) as i64);
    }
    Ok(lhs - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wedge_examples() {
        let t0 = APLForm::t(1, 0);
        let dt0 = APLForm::dt(1, 0);
        let w = t0.wedge(&dt0).unwrap();
        assert_eq!(w, APLForm::monomial(1, vec![1], vec![0], qi(1)));
        assert!(dt0.wedge(&dt0).unwrap().is_zero());
        let a = APLForm::dt(2, 0);
        let b = APLForm::dt(2, 1);
        assert_eq!(a.wedge(&b).unwrap(), b.wedge(&a).unwrap().neg());
        assert!(APLForm::t(1, 0).wedge(&APLForm::t(2, 0)).is_err());
    }

    #[test]
    fn differential_examples() {
        let t0 = APLForm::t(1, 0);
        let sq = t0.wedge(&t0).unwrap();
        assert_eq!(sq.d(), APLForm::monomial(1, vec![1], vec![0], qi(2)));
        assert!(APLForm::dt(1, 0).d().is_zero());
        let p = APLForm::t(2, 0).wedge(&APLForm::t(2, 1)).unwrap();
        let expected = APLForm::monomial(2, vec![0, 1], vec![0], qi(1))
            .add(&APLForm::monomial(2, vec![1, 0], vec![1], qi(1)));
        assert_eq!(p.d(), expected);
        let w = APLForm::monomial(2, vec![3, 2], vec![], qi(5))
            .add(&APLForm::monomial(2, vec![1, 1], vec![], qi(-2)));
        assert!(w.d().d().is_zero());
    }

    #[test]
    fn face_examples() {
        let t0 = APLForm::t(1, 0);
        assert!(t0.face(0).unwrap().is_zero());
        assert_eq!(t0.face(1).unwrap(), APLForm::one(0));
        // a term containing dt_k dies on face k
        let w = APLForm::monomial(2, vec![1, 0], vec![1], qi(1));
        assert!(w.face(1).unwrap().is_zero());
        // semisimplicial identity: face_j face_k = face_k face_{j+1}, j >= k
        let w = APLForm::monomial(2, vec![2, 1], vec![0], qi(3))
            .add(&APLForm::monomial(2, vec![0, 2], vec![1], qi(-1)));
        for k in 0..=1 {
            for j in k..=1 {
                assert_eq!(
                    w.face(k).unwrap().face(j).unwrap(),
                    w.face(j + 1).unwrap().face(k).unwrap(),
                    "identity fails at j={j}, k={k}"
                );
            }
        }
        assert!(w.face(3).is_err());
    }

    #[test]
    fn eliminated_coordinate_face() {
        // on the 2-simplex, t_2 = 1 - t_0 - t_1; its face 2 sends t_2 to 0
        let t2 = APLForm::t(2, 2);
        assert!(t2.face(2).unwrap().is_zero());
        // and face 0 turns it into the eliminated coordinate of the 1-simplex
        assert_eq!(t2.face(0).unwrap(), APLForm::t(1, 1));
    }

    #[test]
    fn integrate_examples() {
        assert_eq!(APLForm::dt(1, 1).integrate(), qi(1));
        let t1 = APLForm::t(1, 1);
        assert_eq!(
            t1.wedge(&APLForm::dt(1, 1)).unwrap().integrate(),
            crate::qr(1, 2)
        );
        assert_eq!(APLForm::dt(2, 0).integrate(), Q::zero());
        // volume of the 2-simplex
        let vol = APLForm::dt(2, 1).wedge(&APLForm::dt(2, 2)).unwrap();
        assert_eq!(vol.integrate(), crate::qr(1, 2));
    }

    #[test]
    fn stokes_on_samples() {
        let samples = vec![
            APLForm::monomial(1, vec![3], vec![], qi(2)),
            APLForm::monomial(2, vec![1, 1], vec![0], qi(1)),
            APLForm::monomial(2, vec![0, 2], vec![1], qi(-3)),
            APLForm::monomial(2, vec![2, 0], vec![0], qi(1))
                .add(&APLForm::monomial(2, vec![0, 1], vec![1], qi(4))),
        ];
        for a in &samples {
            assert_eq!(stokes_defect(a).unwrap(), Q::zero(), "Stokes fails on {a}");
        }
    }

    #[test]
    fn extend_examples() {
        let z = extend(&[APLForm::zero(0, 0), APLForm::zero(0, 0)], 6).unwrap();
        assert!(z.is_zero());
        // vertex values a, b -> a + (b-a) t_0
        let a = APLForm::constant(0, qi(3));
        let b = APLForm::constant(0, qi(7));
        let w = extend(&[a.clone(), b.clone()], 6).unwrap();
        assert_eq!(w.face(0).unwrap(), a);
        assert_eq!(w.face(1).unwrap(), b);
        let expected =
            APLForm::constant(1, qi(3)).add(&APLForm::monomial(1, vec![1], vec![], qi(4)));
        assert_eq!(w, expected);
        // restriction of a known form on the 2-simplex
        let known = APLForm::monomial(2, vec![1, 2], vec![1], qi(2))
            .add(&APLForm::monomial(2, vec![0, 1], vec![0], qi(-1)));
        let faces: Vec<APLForm> = (0..=2).map(|k| known.face(k).unwrap()).collect();
        let w = extend(&faces, 8).unwrap();
        for (k, f) in faces.iter().enumerate() {
            assert_eq!(&w.face(k).unwrap(), f);
        }
        // incompatible faces are rejected
        let bad = extend(
            &[
                APLForm::constant(1, qi(1)),
                APLForm::zero(1, 0),
                APLForm::zero(1, 0),
            ],
            6,
        );
        assert!(matches!(bad, Err(Error::Precondition(_))));
    }
}
