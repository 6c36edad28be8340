//! Polyvector fields on affine log charts as Gerstenhaber algebras.
//!
//! A chart carries named log-derivation generators with explicit action
//! tables on the ring variables, log parts on the monoid generators, and a
//! bracket table expanded over the generators. Polyvector fields are the free
//! module on strictly increasing wedge monomials of the generators, graded in
//! degrees `-d..0`. The bracket is the negative of the Schouten–Nijenhuis
//! bracket, so on the curve charts `[∂_yz, y] = -y` and `[∂_yz, z] = z`.

use crate::error::{Error, Result};
use crate::exactalg::{ChartRing, InvertibleHom, Mono, PolyElement};
use crate::sign::pow_sign;
use crate::{qi, Q};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Chart-level log structure: the monoid is `N^rank`, `alpha` sends each
/// monoid generator to a ring monomial (Laurent allowed), and
/// `base_in_monoid[b]` expresses the image of base generator `b` in the
/// monoid, so that `alpha` of it equals the ring's base image.
#[derive(Debug, Clone, PartialEq)]
pub struct LogStructure {
    pub rank: usize,
    pub alpha: Vec<Mono>,
    pub base_in_monoid: Vec<Vec<u32>>,
}

/// A log-derivation generator: its action on every ring variable and its log
/// part on every monoid generator.
#[derive(Debug, Clone, PartialEq)]
pub struct DerGen {
    pub name: String,
    pub action: Vec<PolyElement>,
    pub log_part: Vec<PolyElement>,
}

/// A chart ring together with its log structure, derivation generators and
/// generator bracket table.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyvectorChart {
    pub ring: Arc<ChartRing>,
    pub log: LogStructure,
    pub gens: Vec<DerGen>,
    /// `[gen_i, gen_j]` for `i < j` in this crate's (negated) convention,
    /// expanded over the generators. Missing entries are zero.
    pub brackets: BTreeMap<(usize, usize), Vec<PolyElement>>,
}

impl PolyvectorChart {
    pub fn new(
        ring: Arc<ChartRing>,
        log: LogStructure,
        gens: Vec<DerGen>,
        brackets: BTreeMap<(usize, usize), Vec<PolyElement>>,
    ) -> Result<Arc<PolyvectorChart>> {
        if log.alpha.len() != log.rank {
            return Err(Error::Construction("alpha length != monoid rank".into()));
        }
        if log.base_in_monoid.len() != ring.base.rank {
            return Err(Error::Construction(
                "base_in_monoid length != base rank".into(),
            ));
        }
        for (b, coeffs) in log.base_in_monoid.iter().enumerate() {
            if coeffs.len() != log.rank {
                return Err(Error::Construction("base_in_monoid entry length".into()));
            }
            let mut prod = Mono::one(ring.n_vars());
            for (i, &n) in coeffs.iter().enumerate() {
                prod = prod.mul(&log.alpha[i].pow(n as i32));
            }
            if prod != ring.base_images[b] {
                return Err(Error::Construction(format!(
                    "alpha of the base inclusion does not give the base image t_{b}"
                )));
            }
        }
        let chart = Arc::new(PolyvectorChart {
            ring,
            log,
            gens,
            brackets,
        });
        chart.validate()?;
        Ok(chart)
    }

    fn validate(&self) -> Result<()> {
        let ring = &self.ring;
        for g in &self.gens {
            if g.action.len() != ring.n_vars() || g.log_part.len() != self.log.rank {
                return Err(Error::Construction(format!(
                    "generator {} has mismatched tables",
                    g.name
                )));
            }
            for b in 0..ring.base.rank {
                let img = ring.base_image(b);
                if !img.apply_derivation(&g.action).is_zero() {
                    return Err(Error::Construction(format!(
                        "generator {} does not kill base image t_{b}",
                        g.name
                    )));
                }
            }
            // alpha-compatibility D(alpha(e)) = alpha(e) * log_part(e)
            for (i, a) in self.log.alpha.iter().enumerate() {
                let am = ring.monomial(a.clone(), qi(1));
                let lhs = am.apply_derivation(&g.action);
                let rhs = am.mul(&g.log_part[i]);
                if lhs != rhs {
                    return Err(Error::Construction(format!(
                        "generator {} violates the log compatibility on e_{i}",
                        g.name
                    )));
                }
            }
            // log part vanishes on base inclusions
            for (b, coeffs) in self.log.base_in_monoid.iter().enumerate() {
                let mut sum = ring.zero();
                for (i, &n) in coeffs.iter().enumerate() {
                    sum = sum.add(&g.log_part[i].scale(&qi(n as i64)));
                }
                if !sum.is_zero() {
                    return Err(Error::Construction(format!(
                        "generator {} has nonzero log part on base generator {b}",
                        g.name
                    )));
                }
            }
        }
        // bracket table: the stored value must be the negated commutator
        for ((i, j), coeffs) in &self.brackets {
            if *i >= *j || *j >= self.gens.len() || coeffs.len() != self.gens.len() {
                return Err(Error::Construction("malformed bracket table entry".into()));
            }
            for v in 0..ring.n_vars() {
                let x = ring.monomial(Mono::var(ring.n_vars(), v), qi(1));
                let di_dj = x
                    .apply_derivation(&self.gens[*j].action)
                    .apply_derivation(&self.gens[*i].action);
                let dj_di = x
                    .apply_derivation(&self.gens[*i].action)
                    .apply_derivation(&self.gens[*j].action);
                let commutator = di_dj.sub(&dj_di);
                let mut table = ring.zero();
                for (m, c) in coeffs.iter().enumerate() {
                    table = table.add(&c.mul(&self.gens[m].action[v]));
                }
                if table != commutator.neg() {
                    return Err(Error::Construction(format!(
                        "bracket table [{i},{j}] disagrees with the commutator on variable {}",
                        ring.vars[v].name
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.gens.len()
    }

    /// `[gen_i, gen_j]` as a coefficient vector, any argument order.
    fn gen_bracket(&self, i: usize, j: usize) -> Vec<PolyElement> {
        let zero = vec![self.ring.zero(); self.gens.len()];
        if i == j {
            return zero;
        }
        let (key, flip) = if i < j { ((i, j), false) } else { ((j, i), true) };
        match self.brackets.get(&key) {
            None => zero,
            Some(v) => {
                if flip {
                    v.iter().map(|c| c.neg()).collect()
                } else {
                    v.clone()
                }
            }
        }
    }
}

pub fn same_chart(a: &Arc<PolyvectorChart>, b: &Arc<PolyvectorChart>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Element of a chart's polyvector algebra: a sum of ring coefficients times
/// strictly increasing wedge monomials of generators; a wedge of `p`
/// generators has degree `-p`.
#[derive(Debug, Clone)]
pub struct GerstElement {
    pub chart: Arc<PolyvectorChart>,
    pub degree: i32,
    pub terms: BTreeMap<Vec<u8>, PolyElement>,
}

impl PartialEq for GerstElement {
    fn eq(&self, other: &Self) -> bool {
        if !same_chart(&self.chart, &other.chart) {
            return false;
        }
        if self.terms.is_empty() && other.terms.is_empty() {
            return true;
        }
        self.degree == other.degree && self.terms == other.terms
    }
}

impl GerstElement {
    pub fn zero(chart: &Arc<PolyvectorChart>, degree: i32) -> GerstElement {
        GerstElement {
            chart: chart.clone(),
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_poly(chart: &Arc<PolyvectorChart>, p: PolyElement) -> GerstElement {
        assert!(*p.ring == *chart.ring, "coefficient from a foreign ring");
        let mut terms = BTreeMap::new();
        if !p.is_zero() {
            terms.insert(vec![], p);
        }
        GerstElement {
            chart: chart.clone(),
            degree: 0,
            terms,
        }
    }

    pub fn generator(chart: &Arc<PolyvectorChart>, i: usize) -> GerstElement {
        let mut terms = BTreeMap::new();
        terms.insert(vec![i as u8], chart.ring.one());
        GerstElement {
            chart: chart.clone(),
            degree: -1,
            terms,
        }
    }

    pub fn from_gen_coeffs(chart: &Arc<PolyvectorChart>, coeffs: &[PolyElement]) -> GerstElement {
        let mut out = GerstElement::zero(chart, -1);
        for (i, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                out.terms.insert(vec![i as u8], c.clone());
            }
        }
        out
    }

    /// Coefficient vector of a degree `-1` element over the generators.
    pub fn gen_coeffs(&self) -> Result<Vec<PolyElement>> {
        if !self.is_zero() && self.degree != -1 {
            return Err(Error::Argument("expected a degree -1 element".into()));
        }
        let mut out = vec![self.chart.ring.zero(); self.chart.gens.len()];
        for (w, c) in &self.terms {
            out[w[0] as usize] = c.clone();
        }
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, wedge: Vec<u8>, c: PolyElement) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(wedge) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &GerstElement) -> GerstElement {
        assert!(same_chart(&self.chart, &other.chart), "chart mismatch");
        assert!(
            self.degree == other.degree || self.is_zero() || other.is_zero(),
            "adding elements of different degree"
        );
        let mut out = self.clone();
        if out.is_zero() {
            out.degree = other.degree;
        }
        for (w, c) in &other.terms {
            out.insert(w.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> GerstElement {
        GerstElement {
            chart: self.chart.clone(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (w.clone(), c.neg()))
                .collect(),
        }
    }

    pub fn sub(&self, other: &GerstElement) -> GerstElement {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Q) -> GerstElement {
        use num_traits::Zero;
        if c.is_zero() {
            return GerstElement::zero(&self.chart, self.degree);
        }
        GerstElement {
            chart: self.chart.clone(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(w, k)| (w.clone(), k.scale(c)))
                .collect(),
        }
    }

    pub fn mul_poly(&self, p: &PolyElement) -> GerstElement {
        GerstElement {
            chart: self.chart.clone(),
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(w, k)| (w.clone(), k.mul(p)))
                .filter(|(_, k)| !k.is_zero())
                .collect(),
        }
    }

    pub fn coeffs_in_ideal(&self, power: usize) -> bool {
        self.terms.values().all(|c| c.ideal_membership(power))
    }

    /// Kills every coefficient monomial lying in `I^{k'+1}`.
    pub fn truncate_base(&self, new_order: usize) -> Result<GerstElement> {
        let mut out = GerstElement::zero(&self.chart, self.degree);
        for (w, c) in &self.terms {
            out.insert(w.clone(), c.truncate_base(new_order)?);
        }
        Ok(out)
    }

    /// The derivation action on the ring induced by a degree `-1` element.
    pub fn as_derivation_action(&self) -> Result<Vec<PolyElement>> {
        if self.degree != -1 && !self.is_zero() {
            return Err(Error::Argument(format!(
                "degree {} element is not a derivation",
                self.degree
            )));
        }
        let ring = &self.chart.ring;
        let mut action = vec![ring.zero(); ring.n_vars()];
        for (w, c) in &self.terms {
            let g = &self.chart.gens[w[0] as usize];
            for (v, a) in action.iter_mut().enumerate() {
                *a = a.add(&c.mul(&g.action[v]));
            }
        }
        Ok(action)
    }
}

/// Graded commutative wedge product; degrees add.
pub fn g_wedge(x: &GerstElement, y: &GerstElement) -> Result<GerstElement> {
    if !same_chart(&x.chart, &y.chart) {
        return Err(Error::Argument("wedge across different charts".into()));
    }
    let mut out = GerstElement::zero(&x.chart, x.degree + y.degree);
    for (w1, c1) in &x.terms {
        for (w2, c2) in &y.terms {
            let Some((merged, sign)) = crate::sign::merge_sign(w1, w2) else {
                continue;
            };
            out.insert(merged, c1.mul(c2).scale(&qi(sign as i64)));
        }
    }
    Ok(out)
}

/// The negated Schouten–Nijenhuis bracket; lands in degree `|x| + |y| + 1`.
pub fn g_bracket(x: &GerstElement, y: &GerstElement) -> Result<GerstElement> {
    if !same_chart(&x.chart, &y.chart) {
        return Err(Error::Argument("bracket across different charts".into()));
    }
    let chart = &x.chart;
    let target = (x.degree + y.degree + 1).min(0);
    let mut out = GerstElement::zero(chart, target);
    for (w1, c1) in &x.terms {
        for (w2, c2) in &y.terms {
            let t = bracket_term(chart, c1, w1, c2, w2)?;
            if !t.is_zero() {
                out = out.add(&t);
            }
        }
    }
    Ok(out)
}

/// `[f·Γ, g·Λ]` for single wedge terms, reducing the left argument via
/// `[x∧y, z] = (-1)^{|y|(|z|+1)} [x,z] ∧ y + x ∧ [y,z]`.
fn bracket_term(
    chart: &Arc<PolyvectorChart>,
    f: &PolyElement,
    gamma: &[u8],
    g: &PolyElement,
    lambda: &[u8],
) -> Result<GerstElement> {
    let p = gamma.len() as i64;
    let q = lambda.len() as i64;
    if p == 0 && q == 0 {
        return Ok(GerstElement::zero(chart, 0));
    }
    if p == 0 {
        // graded antisymmetry: [f, gΛ] = -(-1)^{(|f|+1)(|gΛ|+1)} [gΛ, f]
        let sign = -pow_sign(-q + 1);
        let flipped = bracket_term(chart, g, lambda, f, &[])?;
        return Ok(flipped.scale(&qi(sign as i64)));
    }
    let z_deg = -q;
    let mut out = GerstElement::zero(chart, (-p - q + 1).min(0) as i32);
    // [f∧Γ, z] = (-1)^{|Γ|(|z|+1)} [f, z] ∧ Γ + f ∧ [Γ, z]
    if q > 0 {
        let f_part = bracket_term(chart, f, &[], g, lambda)?;
        if !f_part.is_zero() {
            let sign = pow_sign((-p) * (z_deg + 1));
            out = out.add(&g_wedge(
                &f_part.scale(&qi(sign as i64)),
                &wedge_of(chart, gamma),
            )?);
        }
    }
    let gamma_part = bracket_pure_left(chart, gamma, g, lambda)?;
    if !gamma_part.is_zero() {
        out = out.add(&gamma_part.mul_poly(f));
    }
    Ok(out)
}

/// `[Γ, g·Λ]` for a coefficient-one wedge `Γ = γ ∧ Γ̃`.
fn bracket_pure_left(
    chart: &Arc<PolyvectorChart>,
    gamma: &[u8],
    g: &PolyElement,
    lambda: &[u8],
) -> Result<GerstElement> {
    let head = gamma[0] as usize;
    let tail = &gamma[1..];
    let q = lambda.len() as i64;
    let z_deg = -q;
    let mut out = GerstElement::zero(chart, (-(gamma.len() as i64) - q + 1).min(0) as i32);
    // [γ∧Γ̃, z] = (-1)^{|Γ̃|(|z|+1)} [γ, z] ∧ Γ̃ + γ ∧ [Γ̃, z]
    let head_part = bracket_gen(chart, head, g, lambda)?;
    if !head_part.is_zero() {
        let sign = pow_sign(-(tail.len() as i64) * (z_deg + 1));
        out = out.add(&g_wedge(
            &head_part.scale(&qi(sign as i64)),
            &wedge_of(chart, tail),
        )?);
    }
    if !tail.is_empty() {
        let rest = bracket_pure_left(chart, tail, g, lambda)?;
        if !rest.is_zero() {
            out = out.add(&g_wedge(&GerstElement::generator(chart, head), &rest)?);
        }
    }
    Ok(out)
}

/// `[γ, g·Λ] = (-D_γ g) ∧ Λ + g · [γ, Λ]` (the sign in front of the second
/// summand is `+` because `|γ|+1 = 0`).
fn bracket_gen(
    chart: &Arc<PolyvectorChart>,
    gen: usize,
    g: &PolyElement,
    lambda: &[u8],
) -> Result<GerstElement> {
    let dg = g.apply_derivation(&chart.gens[gen].action).neg();
    let mut out = if dg.is_zero() {
        GerstElement::zero(chart, -(lambda.len() as i32))
    } else {
        g_wedge(
            &GerstElement::from_poly(chart, dg),
            &wedge_of(chart, lambda),
        )?
    };
    if !lambda.is_empty() {
        let pure = bracket_gen_pure(chart, gen, lambda)?;
        if !pure.is_zero() {
            out = out.add(&pure.mul_poly(g));
        }
    }
    Ok(out)
}

/// `[γ, Λ]` for a coefficient-one wedge `Λ = λ ∧ Λ̃`:
/// `[γ,λ] ∧ Λ̃ + λ ∧ [γ, Λ̃]`.
fn bracket_gen_pure(
    chart: &Arc<PolyvectorChart>,
    gen: usize,
    lambda: &[u8],
) -> Result<GerstElement> {
    let head = lambda[0] as usize;
    let tail = &lambda[1..];
    let table = GerstElement::from_gen_coeffs(chart, &chart.gen_bracket(gen, head));
    let mut out = if table.is_zero() {
        GerstElement::zero(chart, -(lambda.len() as i32))
    } else {
        g_wedge(&table, &wedge_of(chart, tail))?
    };
    if !tail.is_empty() {
        let rest = bracket_gen_pure(chart, gen, tail)?;
        if !rest.is_zero() {
            out = out.add(&g_wedge(&GerstElement::generator(chart, head), &rest)?);
        }
    }
    Ok(out)
}

fn wedge_of(chart: &Arc<PolyvectorChart>, gens: &[u8]) -> GerstElement {
    if gens.is_empty() {
        return GerstElement::from_poly(chart, chart.ring.one());
    }
    let mut terms = BTreeMap::new();
    terms.insert(gens.to_vec(), chart.ring.one());
    GerstElement {
        chart: chart.clone(),
        degree: -(gens.len() as i32),
        terms,
    }
}

/// Solves `M c = rhs` over the chart ring: first by Gaussian elimination
/// with unit pivots, then (when no unit pivots exist, as on the vertex
/// charts) by an exact rational linear solve over a closed set of candidate
/// monomials. The result is verified against the full system.
pub(crate) fn solve_in_ring(
    m: Vec<Vec<PolyElement>>,
    rhs: Vec<PolyElement>,
) -> Result<Vec<PolyElement>> {
    if m.is_empty() {
        return Ok(vec![]);
    }
    match solve_in_ring_pivot(m.clone(), rhs.clone()) {
        Ok(sol) => Ok(sol),
        Err(_) => solve_in_ring_linear(&m, &rhs),
    }
}

fn solve_in_ring_pivot(
    mut m: Vec<Vec<PolyElement>>,
    mut rhs: Vec<PolyElement>,
) -> Result<Vec<PolyElement>> {
    let rows = m.len();
    let cols = m[0].len();
    let orig_m = m.clone();
    let orig_rhs = rhs.clone();
    let zero = orig_rhs[0].ring.zero();
    let mut pivot_row_of_col = vec![None; cols];
    let mut next_row = 0usize;
    for col in 0..cols {
        let Some(pr) = (next_row..rows).find(|&r| m[r][col].is_unit()) else {
            continue;
        };
        m.swap(next_row, pr);
        rhs.swap(next_row, pr);
        let inv = m[next_row][col].unit_inverse()?;
        for c in 0..cols {
            m[next_row][c] = m[next_row][c].mul(&inv);
        }
        rhs[next_row] = rhs[next_row].mul(&inv);
        for r in 0..rows {
            if r != next_row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in 0..cols {
                    let delta = factor.mul(&m[next_row][c]);
                    m[r][c] = m[r][c].sub(&delta);
                }
                rhs[r] = rhs[r].sub(&factor.mul(&rhs[next_row]));
            }
        }
        pivot_row_of_col[col] = Some(next_row);
        next_row += 1;
    }
    let mut sol = vec![zero; cols];
    for col in 0..cols {
        if let Some(r) = pivot_row_of_col[col] {
            sol[col] = rhs[r].clone();
        }
    }
    verify_ring_solution(&orig_m, &orig_rhs, &sol)?;
    Ok(sol)
}

/// Rational linear solve with unknowns the coefficients of candidate
/// monomials per column. Candidates are the componentwise differences
/// `rhs monomial - matrix monomial`, closed twice under the products they
/// generate, which covers solutions whose individual products vanish in the
/// quotient.
fn solve_in_ring_linear(
    m: &[Vec<PolyElement>],
    rhs: &[PolyElement],
) -> Result<Vec<PolyElement>> {
    let ring = rhs[0].ring.clone();
    let rows = m.len();
    let cols = m[0].len();
    let valid = |mono: &Mono| -> bool {
        mono.0
            .iter()
            .enumerate()
            .all(|(i, &e)| e >= 0 || ring.vars[i].invertible)
    };
    let mut candidates: Vec<std::collections::BTreeSet<Mono>> =
        vec![std::collections::BTreeSet::new(); cols];
    let mut outputs: std::collections::BTreeSet<Mono> = std::collections::BTreeSet::new();
    for r in rhs {
        for mono in r.terms.keys() {
            outputs.insert(mono.clone());
        }
    }
    for _round in 0..2 {
        for (col, cands) in candidates.iter_mut().enumerate() {
            for row in m.iter().take(rows) {
                for alpha in row[col].terms.keys() {
                    for out in &outputs {
                        let diff = out.mul(&alpha.inv());
                        if valid(&diff) {
                            cands.insert(diff);
                        }
                    }
                }
            }
        }
        // grow the output set by the products the candidates can reach
        for (col, cands) in candidates.iter().enumerate() {
            for row in m.iter().take(rows) {
                for alpha in row[col].terms.keys() {
                    for c in cands.iter() {
                        outputs.insert(c.mul(alpha));
                    }
                }
            }
        }
    }
    let unknowns: Vec<(usize, Mono)> = candidates
        .iter()
        .enumerate()
        .flat_map(|(col, set)| set.iter().map(move |mo| (col, mo.clone())))
        .collect();
    if unknowns.is_empty() {
        let sol = vec![ring.zero(); cols];
        verify_ring_solution(m, rhs, &sol)?;
        return Ok(sol);
    }
    // rows of the rational system: (equation row, output monomial)
    let mut row_index: BTreeMap<(usize, Mono), usize> = BTreeMap::new();
    let mut contribs: Vec<Vec<(usize, Q)>> = Vec::with_capacity(unknowns.len());
    for (col, mono) in &unknowns {
        let basis = ring.monomial(mono.clone(), qi(1));
        let mut entry = Vec::new();
        for (r, row) in m.iter().enumerate().take(rows) {
            let prod = basis.mul(&row[*col]);
            for (out, c) in &prod.terms {
                let next = row_index.len();
                let idx = *row_index.entry((r, out.clone())).or_insert(next);
                entry.push((idx, c.clone()));
            }
        }
        contribs.push(entry);
    }
    for (r, rv) in rhs.iter().enumerate() {
        for out in rv.terms.keys() {
            let next = row_index.len();
            row_index.entry((r, out.clone())).or_insert(next);
        }
    }
    let n_rows = row_index.len();
    let mut a = vec![vec![Q::zero(); unknowns.len()]; n_rows];
    let mut b = vec![Q::zero(); n_rows];
    for (u, entry) in contribs.iter().enumerate() {
        for (idx, c) in entry {
            a[*idx][u] = &a[*idx][u] + c;
        }
    }
    for ((r, out), idx) in &row_index {
        if let Some(c) = rhs[*r].terms.get(out) {
            b[*idx] = c.clone();
        }
    }
    let solved = crate::linalg::solve(&a, &b).ok_or_else(|| {
        Error::Domain("element is not in the span of the generators".into())
    })?;
    let mut sol = vec![ring.zero(); cols];
    for (u, (col, mono)) in unknowns.iter().enumerate() {
        if !solved.solution[u].is_zero() {
            sol[*col] = sol[*col].add(&ring.monomial(mono.clone(), solved.solution[u].clone()));
        }
    }
    verify_ring_solution(m, rhs, &sol)?;
    Ok(sol)
}

fn verify_ring_solution(
    m: &[Vec<PolyElement>],
    rhs: &[PolyElement],
    sol: &[PolyElement],
) -> Result<()> {
    for (r, row) in m.iter().enumerate() {
        let mut acc = rhs[r].neg();
        for (c, entry) in row.iter().enumerate() {
            acc = acc.add(&entry.mul(&sol[c]));
        }
        if !acc.is_zero() {
            return Err(Error::Domain(
                "element is not in the span of the generators".into(),
            ));
        }
    }
    Ok(())
}

/// Transports a polyvector field along a ring isomorphism: degree zero by the
/// map itself, generators by conjugation re-expanded in the target basis,
/// higher wedges multiplicatively.
pub fn transport(
    iso: &InvertibleHom,
    target: &Arc<PolyvectorChart>,
    x: &GerstElement,
) -> Result<GerstElement> {
    let source = &x.chart;
    if *source.ring != *iso.fwd.source || *target.ring != *iso.fwd.target {
        return Err(Error::Argument(
            "transport charts do not match the map".into(),
        ));
    }
    let n_tgt = target.ring.n_vars();
    let mut gen_images: Vec<GerstElement> = Vec::with_capacity(source.gens.len());
    for g in &source.gens {
        let mut conj = Vec::with_capacity(n_tgt);
        for v in 0..n_tgt {
            let v_poly = target.ring.monomial(Mono::var(n_tgt, v), qi(1));
            let pulled = iso.bwd.apply(&v_poly)?;
            conj.push(iso.fwd.apply(&pulled.apply_derivation(&g.action))?);
        }
        let mut matrix = Vec::with_capacity(n_tgt);
        for v in 0..n_tgt {
            matrix.push(
                target
                    .gens
                    .iter()
                    .map(|tg| tg.action[v].clone())
                    .collect::<Vec<_>>(),
            );
        }
        let coeffs = solve_in_ring(matrix, conj)?;
        gen_images.push(GerstElement::from_gen_coeffs(target, &coeffs));
    }
    let mut out = GerstElement::zero(target, x.degree);
    for (w, c) in &x.terms {
        let mut acc = GerstElement::from_poly(target, iso.fwd.apply(c)?);
        for &i in w {
            acc = g_wedge(&acc, &gen_images[i as usize])?;
            if acc.is_zero() {
                break;
            }
        }
        out = out.add(&acc);
    }
    Ok(out)
}

/// Report of the four Gerstenhaber relations checked on sample triples.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AxiomReport {
    pub cases: usize,
    pub pass: bool,
    pub witness: Option<String>,
}

/// Verifies associativity and graded commutativity of the wedge, the odd
/// Leibniz rule, graded antisymmetry and the graded Jacobi identity.
pub fn check_gerstenhaber_axioms(
    triples: &[(GerstElement, GerstElement, GerstElement)],
) -> Result<AxiomReport> {
    let mut cases = 0usize;
    for (x, y, z) in triples {
        cases += 1;
        let fail = |w: String| {
            Ok(AxiomReport {
                cases,
                pass: false,
                witness: Some(w),
            })
        };
        if g_wedge(x, &g_wedge(y, z)?)? != g_wedge(&g_wedge(x, y)?, z)? {
            return fail(format!("associativity fails on case {cases}"));
        }
        let comm = g_wedge(y, x)?.scale(&qi(pow_sign((x.degree * y.degree) as i64) as i64));
        if g_wedge(x, y)? != comm {
            return fail(format!("graded commutativity fails on case {cases}"));
        }
        let lhs = g_bracket(x, &g_wedge(y, z)?)?;
        let sign = qi(pow_sign(((x.degree + 1) * y.degree) as i64) as i64);
        let rhs = g_wedge(&g_bracket(x, y)?, z)?.add(&g_wedge(y, &g_bracket(x, z)?)?.scale(&sign));
        if lhs != rhs {
            return fail(format!("odd Leibniz fails on case {cases}"));
        }
        let anti = g_bracket(y, x)?
            .scale(&qi(-pow_sign(((x.degree + 1) * (y.degree + 1)) as i64) as i64));
        if g_bracket(x, y)? != anti {
            return fail(format!("graded antisymmetry fails on case {cases}"));
        }
        let jac_l = g_bracket(x, &g_bracket(y, z)?)?;
        let jac_r = g_bracket(&g_bracket(x, y)?, z)?.add(
            &g_bracket(y, &g_bracket(x, z)?)?
                .scale(&qi(pow_sign(((x.degree + 1) * (y.degree + 1)) as i64) as i64)),
        );
        if jac_l != jac_r {
            return fail(format!("graded Jacobi fails on case {cases}"));
        }
    }
    Ok(AxiomReport {
        cases,
        pass: true,
        witness: None,
    })
}

/// Verdict of the `(-1)`-injectivity probe.
#[derive(Debug, Clone)]
pub enum MinusOneVerdict {
    Zero,
    Witness { var: String, value: PolyElement },
}

/// For a degree `-1` element, finds a ring variable `f` with `[θ, f] != 0`,
/// or confirms the element is zero.
pub fn minus_one_injectivity(theta: &GerstElement) -> Result<MinusOneVerdict> {
    if theta.is_zero() {
        return Ok(MinusOneVerdict::Zero);
    }
    if theta.degree != -1 {
        return Err(Error::Argument("probe expects a degree -1 element".into()));
    }
    let ring = &theta.chart.ring;
    let action = theta.as_derivation_action()?;
    for v in 0..ring.n_vars() {
        let f = ring.monomial(Mono::var(ring.n_vars(), v), qi(1));
        let bracket = f.apply_derivation(&action).neg();
        if !bracket.is_zero() {
            return Ok(MinusOneVerdict::Witness {
                var: ring.vars[v].name.clone(),
                value: bracket,
            });
        }
    }
    Err(Error::Invariant(
        "nonzero degree -1 element brackets to zero with every variable".into(),
    ))
}

impl fmt::Display for GerstElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (w, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if w.is_empty() {
                write!(f, "{c}")?;
            } else {
                let gens: Vec<&str> = w
                    .iter()
                    .map(|&i| self.chart.gens[i as usize].name.as_str())
                    .collect();
                write!(f, "({c})*{}", gens.join("^"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{ArtinBase, RingHom};

    /// The curve chart V_x with its relative generator.
    fn vx_chart(k: usize) -> Arc<PolyvectorChart> {
        let ring = ChartRing::new(
            "Vx",
            vec![("y", false), ("z", false)],
            ArtinBase::new(1, k),
            vec![vec![(0, 1), (1, 1)]],
            vec![],
        )
        .unwrap();
        let gen = DerGen {
            name: "d_yz".into(),
            action: vec![ring.parse("y").unwrap(), ring.parse("-z").unwrap()],
            log_part: vec![ring.one(), ring.parse("-1").unwrap()],
        };
        PolyvectorChart::new(
            ring,
            LogStructure {
                rank: 2,
                alpha: vec![Mono(vec![1, 0]), Mono(vec![0, 1])],
                base_in_monoid: vec![vec![1, 1]],
            },
            vec![gen],
            BTreeMap::new(),
        )
        .unwrap()
    }

    /// A rank-2 chart so wedge degree -2 and cross-brackets are exercised.
    fn rank2_chart(k: usize) -> Arc<PolyvectorChart> {
        let ring = ChartRing::new(
            "W",
            vec![("y", false), ("z", false), ("u", false), ("v", false)],
            ArtinBase::new(1, k),
            vec![vec![(0, 1), (1, 1)]],
            vec![],
        )
        .unwrap();
        let g1 = DerGen {
            name: "d1".into(),
            action: vec![
                ring.parse("y").unwrap(),
                ring.parse("-z").unwrap(),
                ring.zero(),
                ring.zero(),
            ],
            log_part: vec![
                ring.one(),
                ring.parse("-1").unwrap(),
                ring.zero(),
                ring.zero(),
            ],
        };
        let g2 = DerGen {
            name: "d2".into(),
            action: vec![
                ring.zero(),
                ring.zero(),
                ring.parse("u").unwrap(),
                ring.zero(),
            ],
            log_part: vec![ring.zero(), ring.zero(), ring.one(), ring.zero()],
        };
        PolyvectorChart::new(
            ring,
            LogStructure {
                rank: 4,
                alpha: vec![
                    Mono(vec![1, 0, 0, 0]),
                    Mono(vec![0, 1, 0, 0]),
                    Mono(vec![0, 0, 1, 0]),
                    Mono(vec![0, 0, 0, 1]),
                ],
                base_in_monoid: vec![vec![1, 1, 0, 0]],
            },
            vec![g1, g2],
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn wedge_examples() {
        let ch = vx_chart(2);
        let f = GerstElement::from_poly(&ch, ch.ring.parse("y + 1").unwrap());
        let g = GerstElement::from_poly(&ch, ch.ring.parse("z").unwrap());
        assert_eq!(
            g_wedge(&f, &g).unwrap(),
            GerstElement::from_poly(&ch, ch.ring.parse("y*z + z").unwrap())
        );
        let d = GerstElement::generator(&ch, 0);
        assert!(g_wedge(&d, &d).unwrap().is_zero());
        let ch2 = rank2_chart(1);
        let d1 = GerstElement::generator(&ch2, 0);
        let d2 = GerstElement::generator(&ch2, 1);
        assert_eq!(g_wedge(&d1, &d2).unwrap(), g_wedge(&d2, &d1).unwrap().neg());
    }

    #[test]
    fn bracket_golden_values() {
        let ch = vx_chart(2);
        let d = GerstElement::generator(&ch, 0);
        let y = GerstElement::from_poly(&ch, ch.ring.parse("y").unwrap());
        let z = GerstElement::from_poly(&ch, ch.ring.parse("z").unwrap());
        assert_eq!(
            g_bracket(&d, &y).unwrap(),
            GerstElement::from_poly(&ch, ch.ring.parse("-y").unwrap())
        );
        assert_eq!(
            g_bracket(&d, &z).unwrap(),
            GerstElement::from_poly(&ch, ch.ring.parse("z").unwrap())
        );
        assert!(g_bracket(&y, &z).unwrap().is_zero());
        let theta = d.mul_poly(&ch.ring.parse("1 + y").unwrap());
        assert!(g_bracket(&theta, &theta).unwrap().is_zero());
    }

    #[test]
    fn axioms_on_structured_samples() {
        let ch = rank2_chart(1);
        let r = &ch.ring;
        let d1 = GerstElement::generator(&ch, 0);
        let d2 = GerstElement::generator(&ch, 1);
        let f = GerstElement::from_poly(&ch, r.parse("1 + y*u").unwrap());
        let w = g_wedge(&d1.mul_poly(&r.parse("z").unwrap()), &d2).unwrap();
        let triples = vec![
            (d1.clone(), d2.clone(), f.clone()),
            (f.clone(), d1.clone(), w.clone()),
            (w.clone(), d2.clone(), d1.clone()),
            (
                d1.mul_poly(&r.parse("u").unwrap()),
                d2.mul_poly(&r.parse("y + v").unwrap()),
                w.clone(),
            ),
        ];
        let report = check_gerstenhaber_axioms(&triples).unwrap();
        assert!(report.pass, "{:?}", report.witness);
    }

    #[test]
    fn minus_one_injectivity_examples() {
        let ch = vx_chart(2);
        let d = GerstElement::generator(&ch, 0);
        match minus_one_injectivity(&d).unwrap() {
            MinusOneVerdict::Witness { var, value } => {
                assert_eq!(var, "y");
                assert_eq!(value, ch.ring.parse("-y").unwrap());
            }
            v => panic!("unexpected verdict {v:?}"),
        }
        let zero = GerstElement::zero(&ch, -1);
        assert!(matches!(
            minus_one_injectivity(&zero).unwrap(),
            MinusOneVerdict::Zero
        ));
        let theta = d.mul_poly(&ch.ring.parse("t").unwrap());
        assert!(matches!(
            minus_one_injectivity(&theta).unwrap(),
            MinusOneVerdict::Witness { .. }
        ));
    }

    #[test]
    fn transport_conjugates_generators() {
        // curve edge charts: source Q[y,t]_y, target Q[x,t]_x with y |-> 1/x;
        // the source generator acts by y on y, the target by -x on x
        let src_ring = ChartRing::new(
            "side_x",
            vec![("y", true), ("t", false)],
            ArtinBase::new(1, 2),
            vec![vec![(1, 1)]],
            vec![],
        )
        .unwrap();
        let tgt_ring = ChartRing::new(
            "side_y",
            vec![("x", true), ("t", false)],
            ArtinBase::new(1, 2),
            vec![vec![(1, 1)]],
            vec![],
        )
        .unwrap();
        let src = PolyvectorChart::new(
            src_ring.clone(),
            LogStructure {
                rank: 2,
                alpha: vec![Mono(vec![1, 0]), Mono(vec![-1, 1])],
                base_in_monoid: vec![vec![1, 1]],
            },
            vec![DerGen {
                name: "d".into(),
                action: vec![src_ring.parse("y").unwrap(), src_ring.zero()],
                log_part: vec![src_ring.one(), src_ring.parse("-1").unwrap()],
            }],
            BTreeMap::new(),
        )
        .unwrap();
        let tgt = PolyvectorChart::new(
            tgt_ring.clone(),
            LogStructure {
                rank: 2,
                alpha: vec![Mono(vec![1, 0]), Mono(vec![-1, 1])],
                base_in_monoid: vec![vec![1, 1]],
            },
            vec![DerGen {
                name: "d".into(),
                action: vec![tgt_ring.parse("-x").unwrap(), tgt_ring.zero()],
                log_part: vec![tgt_ring.parse("-1").unwrap(), tgt_ring.one()],
            }],
            BTreeMap::new(),
        )
        .unwrap();
        let iso = InvertibleHom::new(
            RingHom::new(
                &src_ring,
                &tgt_ring,
                vec![
                    tgt_ring.parse("x^-1").unwrap(),
                    tgt_ring.parse("t").unwrap(),
                ],
            )
            .unwrap(),
            RingHom::new(
                &tgt_ring,
                &src_ring,
                vec![
                    src_ring.parse("y^-1").unwrap(),
                    src_ring.parse("t").unwrap(),
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let d_src = GerstElement::generator(&src, 0);
        let moved = transport(&iso, &tgt, &d_src).unwrap();
        assert_eq!(moved, GerstElement::generator(&tgt, 0));
        // module compatibility: transport(f · d) = h(f) · transport(d)
        let f = src_ring.parse("t*y^-1").unwrap();
        let moved2 = transport(&iso, &tgt, &d_src.mul_poly(&f)).unwrap();
        assert_eq!(
            moved2,
            GerstElement::generator(&tgt, 0).mul_poly(&iso.fwd.apply(&f).unwrap())
        );
        let id = InvertibleHom::identity(&src_ring);
        let back = transport(&id, &src, &d_src.mul_poly(&f)).unwrap();
        assert_eq!(back, d_src.mul_poly(&f));
    }
}
