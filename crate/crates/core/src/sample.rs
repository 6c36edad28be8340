//! Seeded random generation of ring elements, polyvectors, derivations,
//! automorphisms and valid Thom–Whitney elements.
//!
//! All suites draw from one seeded generator so failures are reproducible;
//! the CLI records the seed in every report.

use crate::apl::{APLForm, AplMono};
use crate::error::{Error, Result};
use crate::exactalg::{ChartRing, Mono, PolyElement};
use crate::gerst::{GerstElement, PolyvectorChart};
use crate::logdef::{gerst_to_derivation, LogAutomorphism, LogDerivation};
use crate::tw::{tw_validate, CoverNerve, TWElement};
use crate::{qi, qr, Q};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::collections::BTreeMap;
use std::sync::Arc;

pub struct Sampler {
    rng: StdRng,
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler {
            rng: StdRng::seed_from_u64(seed),
        }
    }

    pub fn small_q(&mut self) -> Q {
        let n = loop {
            let n = self.rng.gen_range(-3i64..=3);
            if n != 0 {
                break n;
            }
        };
        if self.rng.gen_bool(0.2) {
            qr(n, 2)
        } else {
            qi(n)
        }
    }

    fn mono(&mut self, ring: &Arc<ChartRing>, max_deg: i32) -> Mono {
        let e = ring
            .vars
            .iter()
            .map(|v| {
                if v.invertible {
                    self.rng.gen_range(-max_deg..=max_deg)
                } else {
                    self.rng.gen_range(0..=max_deg)
                }
            })
            .collect();
        Mono(e)
    }

    /// A sparse element; with `in_ideal` every monomial gets a base factor.
    pub fn poly(&mut self, ring: &Arc<ChartRing>, in_ideal: bool) -> PolyElement {
        let n_terms = self.rng.gen_range(1..=3);
        let mut out = ring.zero();
        for _ in 0..n_terms {
            let mut m = self.mono(ring, 2);
            if in_ideal {
                let b = self.rng.gen_range(0..ring.base.rank);
                m = m.mul(&ring.base_images[b]);
            }
            out = out.add(&ring.monomial(m, self.small_q()));
        }
        out
    }

    pub fn nonzero_poly(&mut self, ring: &Arc<ChartRing>, in_ideal: bool) -> PolyElement {
        for _ in 0..50 {
            let p = self.poly(ring, in_ideal);
            if !p.is_zero() {
                return p;
            }
        }
        // truncation can kill everything at order zero with in_ideal
        ring.zero()
    }

    /// Homogeneous polyvector of the given degree `p <= 0`.
    pub fn gerst(&mut self, chart: &Arc<PolyvectorChart>, degree: i32, in_ideal: bool) -> GerstElement {
        let len = (-degree) as usize;
        if len > chart.gens.len() {
            return GerstElement::zero(chart, degree);
        }
        let mut out = GerstElement::zero(chart, degree);
        let n_terms = self.rng.gen_range(1..=2);
        for _ in 0..n_terms {
            // random strictly increasing wedge of the requested length
            let mut idx: Vec<u8> = (0..chart.gens.len() as u8).collect();
            for i in (1..idx.len()).rev() {
                let j = self.rng.gen_range(0..=i);
                idx.swap(i, j);
            }
            let mut wedge: Vec<u8> = idx.into_iter().take(len).collect();
            wedge.sort_unstable();
            let coeff = self.poly(&chart.ring, in_ideal);
            if coeff.is_zero() {
                continue;
            }
            let mut term = BTreeMap::new();
            term.insert(wedge, coeff);
            out = out.add(&GerstElement {
                chart: chart.clone(),
                degree,
                terms: term,
            });
        }
        out
    }

    /// A log derivation with values in the base ideal.
    pub fn log_derivation(&mut self, chart: &Arc<PolyvectorChart>) -> Result<LogDerivation> {
        let theta = self.gerst(chart, -1, true);
        gerst_to_derivation(&theta)
    }

    /// A log automorphism sampled through its unit corrections; supports the
    /// charts of this crate, where every `α(e_i)` is a single variable or has
    /// exactly one constrained partner per base direction.
    pub fn log_automorphism(&mut self, chart: &Arc<PolyvectorChart>) -> Result<LogAutomorphism> {
        let ring = &chart.ring;
        let rank = chart.log.rank;
        // assign units: walk the base constraints, leaving one generator per
        // constraint determined by the others
        let mut units: Vec<Option<PolyElement>> = vec![None; rank];
        for coeffs in &chart.log.base_in_monoid {
            let involved: Vec<usize> = (0..rank).filter(|&i| coeffs[i] > 0).collect();
            let Some((&last, free)) = involved.split_last() else {
                continue;
            };
            if coeffs[last] != 1 {
                return Err(Error::Argument(
                    "automorphism sampling needs a unit-coefficient generator per base constraint"
                        .into(),
                ));
            }
            let mut prod = ring.one();
            for &i in free {
                if units[i].is_none() {
                    let u = ring.one().add(&self.poly(ring, true));
                    units[i] = Some(u);
                }
                prod = prod.mul(&units[i].as_ref().unwrap().pow(coeffs[i]));
            }
            units[last] = Some(prod.unit_inverse()?);
        }
        let units: Vec<PolyElement> = units
            .into_iter()
            .map(|u| u.unwrap_or_else(|| ring.one()))
            .collect();
        // variable images: α(e_i) a single variable gets u_i · that variable;
        // remaining variables must be base images and stay fixed
        let n = ring.n_vars();
        let mut images: Vec<Option<PolyElement>> = vec![None; n];
        for (i, a) in chart.log.alpha.iter().enumerate() {
            let support: Vec<usize> = (0..n).filter(|&v| a.0[v] != 0).collect();
            if support.len() == 1 && a.0[support[0]] == 1 {
                let v = support[0];
                images[v] = Some(units[i].mul(&ring.monomial(Mono::var(n, v), qi(1))));
            }
        }
        for v in 0..n {
            if images[v].is_none() {
                let var_mono = Mono::var(n, v);
                if ring.base_images.contains(&var_mono) {
                    images[v] = Some(ring.monomial(var_mono, qi(1)));
                } else {
                    return Err(Error::Argument(format!(
                        "cannot sample an automorphism image for variable {}",
                        ring.vars[v].name
                    )));
                }
            }
        }
        LogAutomorphism::new(chart, images.into_iter().map(|i| i.unwrap()).collect(), units)
    }

    /// A form of the given degree on the `dim`-simplex.
    pub fn apl_form(&mut self, dim: usize, degree: usize, max_deg: u32) -> APLForm {
        let mut out = APLForm::zero(dim, degree);
        if degree > dim {
            return out;
        }
        for _ in 0..self.rng.gen_range(1..=2) {
            let e: Vec<u32> = (0..dim).map(|_| self.rng.gen_range(0..=max_deg)).collect();
            let mut all: Vec<u8> = (0..dim as u8).collect();
            for i in (1..all.len()).rev() {
                let j = self.rng.gen_range(0..=i);
                all.swap(i, j);
            }
            let mut dts: Vec<u8> = all.into_iter().take(degree).collect();
            dts.sort_unstable();
            out = out.add(&APLForm::monomial(dim, e, dts, self.small_q()));
        }
        out
    }

    /// A valid Thom–Whitney element of bidegree `(p, q)` on a nerve of
    /// dimension `<= 2`: free data on the highest-constraint stratum, the
    /// rest reconstructed (interpolation on edges, exact face extension on
    /// triangles), plus bubble terms that vanish on all faces.
    pub fn tw_element(
        &mut self,
        nerve: &Arc<CoverNerve>,
        p: i32,
        q: usize,
        in_ideal: bool,
    ) -> Result<TWElement> {
        if nerve.dimension() > 2 {
            return Err(Error::Argument("sampling supports nerves of dimension <= 2".into()));
        }
        let mut out = TWElement::zero(nerve, p, q);
        match q {
            0 => {
                // free vertex values
                for (si, s) in nerve.simplices.iter().enumerate() {
                    if s.dim() == 0 {
                        let v = self.gerst(&s.chart, p, in_ideal);
                        out.insert_term(si, &APLForm::one(0), &v);
                    }
                }
                // edges: interpolate between the two coface images, plus a
                // vanishing-at-both-ends tail
                self.fill_edges_q0(nerve, &mut out, p, in_ideal)?;
                self.fill_triangles(nerve, &mut out, in_ideal)?;
            }
            1 => {
                // vertices carry no 1-forms; edges are free
                for (si, s) in nerve.simplices.iter().enumerate() {
                    if s.dim() == 1 {
                        let form = self.apl_form(1, 1, 2);
                        let v = self.gerst(&s.chart, p, in_ideal);
                        out.insert_term(si, &form, &v);
                    }
                }
                self.fill_triangles(nerve, &mut out, in_ideal)?;
            }
            2 => {
                for (si, s) in nerve.simplices.iter().enumerate() {
                    if s.dim() == 2 {
                        let form = self.apl_form(2, 2, 2);
                        let v = self.gerst(&s.chart, p, in_ideal);
                        out.insert_term(si, &form, &v);
                    }
                }
            }
            _ => {}
        }
        let report = tw_validate(&out);
        if !report.valid {
            return Err(Error::Invariant(format!(
                "sampled element is invalid: {}",
                report.witness.unwrap_or_default()
            )));
        }
        Ok(out)
    }

    fn fill_edges_q0(
        &mut self,
        nerve: &Arc<CoverNerve>,
        out: &mut TWElement,
        p: i32,
        in_ideal: bool,
    ) -> Result<()> {
        for (si, s) in nerve.simplices.iter().enumerate() {
            if s.dim() != 1 {
                continue;
            }
            let (f0, m0) = &s.faces[0];
            let (f1, m1) = &s.faces[1];
            let v0 = out
                .component(*f0)
                .remove(&(vec![], vec![]))
                .unwrap_or_else(|| GerstElement::zero(&nerve.simplices[*f0].chart, p));
            let v1 = out
                .component(*f1)
                .remove(&(vec![], vec![]))
                .unwrap_or_else(|| GerstElement::zero(&nerve.simplices[*f1].chart, p));
            let a = m0.apply(&s.chart, &v0)?; // value at t_0 = 0
            let b = m1.apply(&s.chart, &v1)?; // value at t_0 = 1
            let t0 = APLForm::t(1, 0);
            out.insert_term(si, &APLForm::one(1), &a);
            out.insert_term(si, &t0, &b.sub(&a));
            // tail: t_0(1 - t_0) g(t_0) ⊗ w
            if self.rng.gen_bool(0.7) {
                let g = self.apl_form(1, 0, 1);
                let bump = t0.wedge(&APLForm::t(1, 1))?.wedge(&g)?;
                let w = self.gerst(&s.chart, p, in_ideal);
                out.insert_term(si, &bump, &w);
            }
        }
        Ok(())
    }

    /// Extends edge data over every 2-simplex by exact face extension, then
    /// adds a bubble supported in the interior.
    fn fill_triangles(
        &mut self,
        nerve: &Arc<CoverNerve>,
        out: &mut TWElement,
        in_ideal: bool,
    ) -> Result<()> {
        let q = out.q;
        for (si, s) in nerve.simplices.iter().enumerate() {
            if s.dim() != 2 {
                continue;
            }
            // face data, transported into this simplex's chart
            let mut faces: Vec<BTreeMap<AplMono, GerstElement>> = Vec::with_capacity(3);
            for (fi, map) in &s.faces {
                let mut data: BTreeMap<AplMono, GerstElement> = BTreeMap::new();
                for (m, v) in out.component(*fi) {
                    let moved = map.apply(&s.chart, &v)?;
                    if !moved.is_zero() {
                        data.insert(m, moved);
                    }
                }
                faces.push(data);
            }
            // decompose by polyvector basis direction (wedge, ring monomial)
            let mut directions: std::collections::BTreeSet<(Vec<u8>, Mono)> =
                std::collections::BTreeSet::new();
            for data in &faces {
                for v in data.values() {
                    for (w, c) in &v.terms {
                        for mono in c.terms.keys() {
                            directions.insert((w.clone(), mono.clone()));
                        }
                    }
                }
            }
            for (w, mono) in directions {
                let mut scalar_faces = Vec::with_capacity(3);
                for data in &faces {
                    let mut f = APLForm::zero(1, q);
                    for (m, v) in data {
                        if let Some(c) = v.terms.get(&w) {
                            if let Some(coef) = c.terms.get(&mono) {
                                f = f.add(&APLForm::monomial(1, m.0.clone(), m.1.clone(), coef.clone()));
                            }
                        }
                    }
                    scalar_faces.push(f);
                }
                let extended = crate::apl::extend(&scalar_faces, 12)?;
                let mut term = BTreeMap::new();
                term.insert(w.clone(), s.chart.ring.monomial(mono.clone(), qi(1)));
                let value = GerstElement {
                    chart: s.chart.clone(),
                    degree: out.p,
                    terms: term,
                };
                out.insert_term(si, &extended, &value);
            }
            // bubble: t_0 t_1 t_2 · (form) vanishes on every face
            if q <= 2 && self.rng.gen_bool(0.6) {
                let cup = APLForm::t(2, 0)
                    .wedge(&APLForm::t(2, 1))?
                    .wedge(&APLForm::t(2, 2))?;
                let form = cup.wedge(&self.apl_form(2, q, 1))?;
                let v = self.gerst(&s.chart, out.p, in_ideal);
                out.insert_term(si, &form, &v);
            }
        }
        Ok(())
    }
}
