//! Thom–Whitney elements over the nerve of a finite cover.
//!
//! The nerve stores, for every ordered tuple of charts with nonempty
//! overlap, an overlap chart and one module map per face (a ring map plus
//! generator images, possibly through a gluing transport), validated against
//! the semicosimplicial identities. A Thom–Whitney element of bidegree
//! `(p, q)` assigns to each `n`-simplex a finite sum of (degree-`q` form on
//! the `n`-simplex) ⊗ (degree-`p` polyvector over the overlap chart),
//! subject to the face-compatibility equations. Spaces are never
//! materialized; every operation is element-wise.
//!
//! The bigraded operations carry the sign twists
//! `(a⊗v) ∧ (b⊗w) = (-1)^{|b||v|} (a∧b) ⊗ (v∧w)` and
//! `[a⊗v, b⊗w] = (-1)^{(|v|+1)|b|} (a∧b) ⊗ [v,w]`,
//! and the differential acts on the form part only.

use crate::apl::{APLForm, AplMono};
use crate::error::{Error, Result};
use crate::exactalg::{Mono, PolyElement, RingHom};
use crate::gerst::{g_bracket, g_wedge, same_chart, GerstElement, PolyvectorChart};
use crate::logdef::LieElement;
use crate::sign::pow_sign;
use crate::{qi, Q};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::sync::Arc;

/// A coface: ring map from a face chart into an overlap chart together with
/// the images of the face chart's derivation generators.
#[derive(Debug, Clone, PartialEq)]
pub struct ModuleMap {
    pub hom: RingHom,
    pub gen_images: Vec<GerstElement>,
}

impl ModuleMap {
    /// Builds a module map and verifies that each claimed generator image is
    /// the pushforward of that generator: `D_img(hom(v)) = hom(D_gen(v))`.
    pub fn new(
        source: &Arc<PolyvectorChart>,
        target: &Arc<PolyvectorChart>,
        hom: RingHom,
        gen_images: Vec<GerstElement>,
    ) -> Result<ModuleMap> {
        if *hom.source != *source.ring || *hom.target != *target.ring {
            return Err(Error::Construction("module map over wrong rings".into()));
        }
        if gen_images.len() != source.gens.len() {
            return Err(Error::Construction("one image per generator needed".into()));
        }
        for img in &gen_images {
            if !same_chart(&img.chart, target) || (!img.is_zero() && img.degree != -1) {
                return Err(Error::Construction(
                    "generator image must be a degree -1 element of the target".into(),
                ));
            }
        }
        for (g, img) in source.gens.iter().zip(&gen_images) {
            let img_action = img.as_derivation_action()?;
            for v in 0..source.ring.n_vars() {
                let var = source
                    .ring
                    .monomial(Mono::var(source.ring.n_vars(), v), qi(1));
                let lhs = hom.apply(&var)?.apply_derivation(&img_action);
                let rhs = hom.apply(&g.action[v])?;
                if lhs != rhs {
                    return Err(Error::Construction(format!(
                        "generator image of {} is not its pushforward (variable {})",
                        g.name, source.ring.vars[v].name
                    )));
                }
            }
        }
        Ok(ModuleMap { hom, gen_images })
    }

    pub fn identity(chart: &Arc<PolyvectorChart>) -> ModuleMap {
        ModuleMap {
            hom: RingHom::identity(&chart.ring),
            gen_images: (0..chart.gens.len())
                .map(|i| GerstElement::generator(chart, i))
                .collect(),
        }
    }

    pub fn apply(&self, target: &Arc<PolyvectorChart>, x: &GerstElement) -> Result<GerstElement> {
        let mut out = GerstElement::zero(target, x.degree);
        for (w, c) in &x.terms {
            let mut acc = GerstElement::from_poly(target, self.hom.apply(c)?);
            for &i in w {
                acc = g_wedge(&acc, &self.gen_images[i as usize])?;
                if acc.is_zero() {
                    break;
                }
            }
            out = out.add(&acc);
        }
        Ok(out)
    }
}

/// One simplex of the nerve: its vertex tuple, overlap chart, and for each
/// face the index of the face simplex plus the module map into this one.
#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub tuple: Vec<usize>,
    pub chart: Arc<PolyvectorChart>,
    /// `faces[k]` omits `tuple[k]`; empty for vertices.
    pub faces: Vec<(usize, ModuleMap)>,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.tuple.len() - 1
    }
}

/// The nerve of a finite cover: finitely many simplices, closed under faces,
/// with coface maps satisfying the semicosimplicial identity.
#[derive(Debug, PartialEq)]
pub struct CoverNerve {
    pub order: usize,
    pub simplices: Vec<Simplex>,
    index: BTreeMap<Vec<usize>, usize>,
}

impl CoverNerve {
    /// Assembles and validates a nerve. `simplices` must contain every
    /// vertex tuple `[i]` and be closed under taking faces.
    pub fn new(order: usize, simplices: Vec<Simplex>) -> Result<Arc<CoverNerve>> {
        let mut index = BTreeMap::new();
        for (i, s) in simplices.iter().enumerate() {
            if s.tuple.is_empty() || s.tuple.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Construction(format!(
                    "tuple {:?} is not strictly increasing",
                    s.tuple
                )));
            }
            if s.chart.ring.base.order != order {
                return Err(Error::Construction(format!(
                    "chart {} has truncation order {} instead of {order}",
                    s.chart.ring.name, s.chart.ring.base.order
                )));
            }
            if index.insert(s.tuple.clone(), i).is_some() {
                return Err(Error::Construction(format!(
                    "duplicate simplex {:?}",
                    s.tuple
                )));
            }
        }
        for s in &simplices {
            if s.faces.len() != s.tuple.len() && s.dim() > 0 {
                return Err(Error::Construction(format!(
                    "simplex {:?} needs {} faces",
                    s.tuple,
                    s.tuple.len()
                )));
            }
            for (k, (fi, map)) in s.faces.iter().enumerate() {
                let mut face_tuple = s.tuple.clone();
                face_tuple.remove(k);
                let expect = index.get(&face_tuple).ok_or_else(|| {
                    Error::Construction(format!("missing face {face_tuple:?} of {:?}", s.tuple))
                })?;
                if expect != fi {
                    return Err(Error::Construction(format!(
                        "face {k} of {:?} points at the wrong simplex",
                        s.tuple
                    )));
                }
                if *map.hom.source != *simplices[*fi].chart.ring
                    || *map.hom.target != *s.chart.ring
                {
                    return Err(Error::Construction(format!(
                        "face map {k} of {:?} has wrong endpoint rings",
                        s.tuple
                    )));
                }
            }
        }
        let nerve = Arc::new(CoverNerve {
            order,
            simplices,
            index,
        });
        nerve.check_semicosimplicial()?;
        Ok(nerve)
    }

    /// Builds the nerve of a cover from overlap data, wiring faces by tuple.
    pub fn from_overlaps(
        order: usize,
        data: Vec<(Vec<usize>, Arc<PolyvectorChart>, Vec<ModuleMap>)>,
    ) -> Result<Arc<CoverNerve>> {
        let mut sorted = data;
        sorted.sort_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)));
        let mut index: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for (i, (tuple, _, _)) in sorted.iter().enumerate() {
            index.insert(tuple.clone(), i);
        }
        let mut simplices = Vec::new();
        for (tuple, chart, maps) in sorted {
            let mut faces = Vec::new();
            if tuple.len() > 1 {
                if maps.len() != tuple.len() {
                    return Err(Error::Construction(format!(
                        "simplex {tuple:?} needs {} face maps",
                        tuple.len()
                    )));
                }
                for (k, map) in maps.into_iter().enumerate() {
                    let mut face_tuple = tuple.clone();
                    face_tuple.remove(k);
                    let fi = index.get(&face_tuple).ok_or_else(|| {
                        Error::Construction(format!("missing face {face_tuple:?} of {tuple:?}"))
                    })?;
                    faces.push((*fi, map));
                }
            }
            simplices.push(Simplex {
                tuple,
                chart,
                faces,
            });
        }
        CoverNerve::new(order, simplices)
    }

    pub fn simplex(&self, tuple: &[usize]) -> Option<&Simplex> {
        self.index.get(tuple).map(|&i| &self.simplices[i])
    }

    pub fn vertices(&self) -> Vec<&Simplex> {
        self.simplices.iter().filter(|s| s.dim() == 0).collect()
    }

    pub fn dimension(&self) -> usize {
        self.simplices.iter().map(|s| s.dim()).max().unwrap_or(0)
    }

    /// `∂_{l,n+1} ∂_{k,n} = ∂_{k+1,n+1} ∂_{l,n}` for `l <= k`, verified on
    /// all ring variables and generators of the double-face charts.
    fn check_semicosimplicial(&self) -> Result<()> {
        for s in &self.simplices {
            if s.dim() < 2 {
                continue;
            }
            for l in 0..s.faces.len() {
                for k in l..s.faces.len() - 1 {
                    // going down: face l of s, then face k of that simplex,
                    // equals face k+1 of s followed by its face l
                    let (fl, map_l) = &s.faces[l];
                    let (fk1, map_k1) = &s.faces[k + 1];
                    let (src_a, inner_a) = &self.simplices[*fl].faces[k];
                    let (src_b, inner_b) = &self.simplices[*fk1].faces[l];
                    if src_a != src_b {
                        return Err(Error::Construction(format!(
                            "face bookkeeping broken at {:?} (l={l}, k={k})",
                            s.tuple
                        )));
                    }
                    let chart = &self.simplices[*src_a].chart;
                    let ring = &chart.ring;
                    for v in 0..ring.n_vars() {
                        let x = GerstElement::from_poly(
                            chart,
                            ring.monomial(Mono::var(ring.n_vars(), v), qi(1)),
                        );
                        let via_a =
                            map_l.apply(&s.chart, &inner_a.apply(&self.simplices[*fl].chart, &x)?)?;
                        let via_b = map_k1
                            .apply(&s.chart, &inner_b.apply(&self.simplices[*fk1].chart, &x)?)?;
                        if via_a != via_b {
                            return Err(Error::Construction(format!(
                                "semicosimplicial identity fails at {:?} (l={l}, k={k}) on variable {}",
                                s.tuple, ring.vars[v].name
                            )));
                        }
                    }
                    for gi in 0..chart.gens.len() {
                        let x = GerstElement::generator(chart, gi);
                        let via_a =
                            map_l.apply(&s.chart, &inner_a.apply(&self.simplices[*fl].chart, &x)?)?;
                        let via_b = map_k1
                            .apply(&s.chart, &inner_b.apply(&self.simplices[*fk1].chart, &x)?)?;
                        if via_a != via_b {
                            return Err(Error::Construction(format!(
                                "semicosimplicial identity fails at {:?} (l={l}, k={k}) on generator {}",
                                s.tuple, chart.gens[gi].name
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

pub fn same_nerve(a: &Arc<CoverNerve>, b: &Arc<CoverNerve>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// A Thom–Whitney element: per-simplex sums of form ⊗ polyvector, stored as
/// a map from form monomials to polyvector elements.
#[derive(Debug, Clone)]
pub struct TWElement {
    pub nerve: Arc<CoverNerve>,
    /// Polyvector degree `p <= 0`.
    pub p: i32,
    /// Form degree `q >= 0`.
    pub q: usize,
    /// Component on each simplex (by index); missing means zero.
    pub components: BTreeMap<usize, BTreeMap<AplMono, GerstElement>>,
}

impl PartialEq for TWElement {
    fn eq(&self, other: &Self) -> bool {
        if !same_nerve(&self.nerve, &other.nerve) {
            return false;
        }
        if self.is_zero() && other.is_zero() {
            return true;
        }
        (self.p, self.q) == (other.p, other.q) && self.components == other.components
    }
}

impl TWElement {
    pub fn zero(nerve: &Arc<CoverNerve>, p: i32, q: usize) -> TWElement {
        TWElement {
            nerve: nerve.clone(),
            p,
            q,
            components: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.values().all(|c| c.is_empty())
    }

    /// Adds one `form ⊗ value` term on the simplex with the given index.
    pub fn insert_term(&mut self, simplex: usize, form: &APLForm, value: &GerstElement) {
        if value.is_zero() || form.is_zero() {
            return;
        }
        let comp = self.components.entry(simplex).or_default();
        for (m, c) in &form.terms {
            let scaled = value.scale(c);
            match comp.entry(m.clone()) {
                std::collections::btree_map::Entry::Vacant(v) => {
                    v.insert(scaled);
                }
                std::collections::btree_map::Entry::Occupied(mut o) => {
                    let s = o.get().add(&scaled);
                    if s.is_zero() {
                        o.remove();
                    } else {
                        *o.get_mut() = s;
                    }
                }
            }
        }
        if comp.is_empty() {
            self.components.remove(&simplex);
        }
    }

    pub fn component(&self, simplex: usize) -> BTreeMap<AplMono, GerstElement> {
        self.components.get(&simplex).cloned().unwrap_or_default()
    }

    pub fn add(&self, other: &TWElement) -> TWElement {
        assert!(same_nerve(&self.nerve, &other.nerve), "nerve mismatch");
        assert!(
            (self.p, self.q) == (other.p, other.q) || self.is_zero() || other.is_zero(),
            "adding elements of different bidegree"
        );
        let mut out = self.clone();
        if out.is_zero() {
            out.p = other.p;
            out.q = other.q;
        }
        for (&si, comp) in &other.components {
            for (m, v) in comp {
                let form = mono_form(self.nerve.simplices[si].dim(), m);
                out.insert_term(si, &form, v);
            }
        }
        out
    }

    pub fn neg(&self) -> TWElement {
        self.scale(&qi(-1))
    }

    pub fn sub(&self, other: &TWElement) -> TWElement {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Q) -> TWElement {
        if c.is_zero() {
            return TWElement::zero(&self.nerve, self.p, self.q);
        }
        TWElement {
            nerve: self.nerve.clone(),
            p: self.p,
            q: self.q,
            components: self
                .components
                .iter()
                .map(|(&si, comp)| {
                    (
                        si,
                        comp.iter().map(|(m, v)| (m.clone(), v.scale(c))).collect(),
                    )
                })
                .collect(),
        }
    }

    pub fn coeffs_in_ideal(&self, power: usize) -> bool {
        self.components
            .values()
            .all(|comp| comp.values().all(|v| v.coeffs_in_ideal(power)))
    }
}

fn mono_form(dim: usize, m: &AplMono) -> APLForm {
    APLForm::monomial(dim, m.0.clone(), m.1.clone(), qi(1))
}

/// Face-compatibility report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub witness: Option<String>,
}

/// Checks every face equation `(δ_k ⊗ id)(x_n) = (id ⊗ ∂_k)(x_{n-1})`.
pub fn tw_validate(x: &TWElement) -> ValidationReport {
    for (si, s) in x.nerve.simplices.iter().enumerate() {
        if s.dim() == 0 {
            continue;
        }
        for (k, (fi, map)) in s.faces.iter().enumerate() {
            // left side: apply the form face map to this simplex's component
            let mut lhs: BTreeMap<AplMono, GerstElement> = BTreeMap::new();
            for (m, v) in x.component(si) {
                let faced = mono_form(s.dim(), &m).face(k).expect("face in range");
                for (fm, c) in &faced.terms {
                    let scaled = v.scale(c);
                    match lhs.entry(fm.clone()) {
                        std::collections::btree_map::Entry::Vacant(e) => {
                            e.insert(scaled);
                        }
                        std::collections::btree_map::Entry::Occupied(mut e) => {
                            let sum = e.get().add(&scaled);
                            if sum.is_zero() {
                                e.remove();
                            } else {
                                *e.get_mut() = sum;
                            }
                        }
                    }
                }
            }
            // right side: apply the module coface to the face component
            let mut rhs: BTreeMap<AplMono, GerstElement> = BTreeMap::new();
            for (m, v) in x.component(*fi) {
                match map.apply(&s.chart, &v) {
                    Ok(moved) if moved.is_zero() => {}
                    Ok(moved) => {
                        rhs.insert(m, moved);
                    }
                    Err(e) => {
                        return ValidationReport {
                            valid: false,
                            witness: Some(format!(
                                "coface failed on simplex {:?}, face {k}: {e}",
                                s.tuple
                            )),
                        }
                    }
                }
            }
            if lhs != rhs {
                return ValidationReport {
                    valid: false,
                    witness: Some(format!(
                        "face equation fails on simplex {:?}, face {k}",
                        s.tuple
                    )),
                };
            }
        }
    }
    ValidationReport {
        valid: true,
        witness: None,
    }
}

/// The differential: form part only, `a ⊗ v -> da ⊗ v`; bidegree `(p, q+1)`.
pub fn tw_d(x: &TWElement) -> TWElement {
    let mut out = TWElement::zero(&x.nerve, x.p, x.q + 1);
    for (&si, comp) in &x.components {
        let dim = x.nerve.simplices[si].dim();
        for (m, v) in comp {
            let da = mono_form(dim, m).d();
            out.insert_term(si, &da, v);
        }
    }
    out
}

/// `(a⊗v) ∧ (b⊗w) = (-1)^{|b||v|} (a∧b) ⊗ (v∧w)`; bidegrees add.
pub fn tw_wedge(x: &TWElement, y: &TWElement) -> Result<TWElement> {
    if !same_nerve(&x.nerve, &y.nerve) {
        return Err(Error::Argument("wedge across different nerves".into()));
    }
    let sign = qi(pow_sign(y.q as i64 * x.p as i64) as i64);
    let mut out = TWElement::zero(&x.nerve, x.p + y.p, x.q + y.q);
    for (&si, xc) in &x.components {
        let Some(yc) = y.components.get(&si) else {
            continue;
        };
        let dim = x.nerve.simplices[si].dim();
        for (mx, vx) in xc {
            for (my, vy) in yc {
                let ab = mono_form(dim, mx).wedge(&mono_form(dim, my))?;
                if ab.is_zero() {
                    continue;
                }
                let vw = g_wedge(vx, vy)?.scale(&sign);
                out.insert_term(si, &ab, &vw);
            }
        }
    }
    Ok(out)
}

/// `[a⊗v, b⊗w] = (-1)^{(|v|+1)|b|} (a∧b) ⊗ [v,w]`; `p` gains one.
pub fn tw_bracket(x: &TWElement, y: &TWElement) -> Result<TWElement> {
    if !same_nerve(&x.nerve, &y.nerve) {
        return Err(Error::Argument("bracket across different nerves".into()));
    }
    let sign = qi(pow_sign((x.p as i64 + 1) * y.q as i64) as i64);
    let mut out = TWElement::zero(&x.nerve, (x.p + y.p + 1).min(0), x.q + y.q);
    for (&si, xc) in &x.components {
        let Some(yc) = y.components.get(&si) else {
            continue;
        };
        let dim = x.nerve.simplices[si].dim();
        for (mx, vx) in xc {
            for (my, vy) in yc {
                let ab = mono_form(dim, mx).wedge(&mono_form(dim, my))?;
                if ab.is_zero() {
                    continue;
                }
                let vw = g_bracket(vx, vy)?.scale(&sign);
                out.insert_term(si, &ab, &vw);
            }
        }
    }
    Ok(out)
}

impl LieElement for TWElement {
    fn lie_add(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn lie_scale(&self, c: &Q) -> Self {
        self.scale(c)
    }
    fn lie_bracket(&self, other: &Self) -> Result<Self> {
        tw_bracket(self, other)
    }
    fn lie_is_zero(&self) -> bool {
        self.is_zero()
    }
}

/// Gauge transform `exp([θ,-])` for nilpotent θ of bidegree `(-1, 0)`.
pub fn tw_gauge(theta: &TWElement, x: &TWElement) -> Result<TWElement> {
    if !theta.coeffs_in_ideal(1) {
        return Err(Error::Precondition(
            "gauge transform needs nilpotent coefficients".into(),
        ));
    }
    let order = theta.nerve.order;
    let mut acc = x.clone();
    let mut power = x.clone();
    let mut fact = qi(1);
    for k in 1..=order + 1 {
        power = tw_bracket(theta, &power)?;
        if power.is_zero() {
            break;
        }
        fact = fact * qi(k as i64);
        acc = acc.add(&power.scale(&fact.recip()));
    }
    Ok(acc)
}

/// The canonical inclusion of a compatible family of vertex sections: every
/// higher simplex carries the constant form times the common restriction.
pub fn include_global(
    nerve: &Arc<CoverNerve>,
    vertex_values: &[GerstElement],
) -> Result<TWElement> {
    let vertices = nerve.vertices();
    if vertex_values.len() != vertices.len() {
        return Err(Error::Argument("one value per vertex needed".into()));
    }
    let degree = vertex_values
        .iter()
        .find(|v| !v.is_zero())
        .map(|v| v.degree)
        .unwrap_or(0);
    let mut out = TWElement::zero(nerve, degree, 0);
    let by_vertex: BTreeMap<usize, &GerstElement> = vertices
        .iter()
        .zip(vertex_values)
        .map(|(s, v)| (s.tuple[0], v))
        .collect();
    for (si, s) in nerve.simplices.iter().enumerate() {
        // restrict from the first vertex through any face path down to it;
        // compatibility is certified by tw_validate afterwards
        let value = restrict_to_simplex(nerve, s, &by_vertex)?;
        out.insert_term(si, &APLForm::one(s.dim()), &value);
    }
    let report = tw_validate(&out);
    if !report.valid {
        return Err(Error::Precondition(format!(
            "vertex family is not compatible: {}",
            report.witness.unwrap_or_default()
        )));
    }
    Ok(out)
}

fn restrict_to_simplex(
    nerve: &Arc<CoverNerve>,
    s: &Simplex,
    by_vertex: &BTreeMap<usize, &GerstElement>,
) -> Result<GerstElement> {
    if s.dim() == 0 {
        return Ok((*by_vertex[&s.tuple[0]]).clone());
    }
    // walk down the 0th face chain
    let (fi, map) = &s.faces[0];
    let below = restrict_to_simplex(nerve, &nerve.simplices[*fi], by_vertex)?;
    map.apply(&s.chart, &below)
}

/// Extracts the glued global section from a closed element of bidegree
/// `(p, 0)`: all higher components must be constant forms, and the family of
/// vertex values is returned.
pub fn extract_h0(x: &TWElement) -> Result<Vec<GerstElement>> {
    if x.q != 0 {
        return Err(Error::Argument("only bidegree (p, 0) carries sections".into()));
    }
    if !tw_d(x).is_zero() {
        return Err(Error::Precondition("element is not closed".into()));
    }
    let report = tw_validate(x);
    if !report.valid {
        return Err(Error::Precondition(format!(
            "element is not a Thom-Whitney element: {}",
            report.witness.unwrap_or_default()
        )));
    }
    for (&si, comp) in &x.components {
        let dim = x.nerve.simplices[si].dim();
        for m in comp.keys() {
            let constant = m.0.iter().all(|&e| e == 0) && m.1.is_empty();
            if dim > 0 && !constant {
                return Err(Error::Invariant(format!(
                    "closed degree-0 component on {:?} is not constant",
                    x.nerve.simplices[si].tuple
                )));
            }
        }
    }
    Ok(x.nerve
        .vertices()
        .iter()
        .map(|s| {
            let si = x.nerve.index[&s.tuple];
            x.component(si)
                .remove(&(vec![], vec![]))
                .unwrap_or_else(|| GerstElement::zero(&s.chart, x.p))
        })
        .collect())
}

/// Base change to a lower truncation order: rebuilds the nerve and maps all
/// coefficients.
pub fn tw_base_change(x: &TWElement, target: &Arc<CoverNerve>) -> Result<TWElement> {
    if target.order > x.nerve.order {
        return Err(Error::Argument(
            "base change can only lower the truncation order".into(),
        ));
    }
    if target.simplices.len() != x.nerve.simplices.len() {
        return Err(Error::Argument("target nerve has a different shape".into()));
    }
    let mut out = TWElement::zero(target, x.p, x.q);
    for (&si, comp) in &x.components {
        let chart = &target.simplices[si].chart;
        if target.simplices[si].tuple != x.nerve.simplices[si].tuple {
            return Err(Error::Argument("target nerve has a different shape".into()));
        }
        for (m, v) in comp {
            let mut moved = GerstElement::zero(chart, v.degree);
            for (w, c) in &v.terms {
                let c2 = c.into_order(&chart.ring)?;
                if !c2.is_zero() {
                    moved = moved.add(&GerstElement {
                        chart: chart.clone(),
                        degree: v.degree,
                        terms: BTreeMap::from([(w.clone(), c2)]),
                    });
                }
            }
            out.insert_term(
                si,
                &mono_form(target.simplices[si].dim(), m),
                &moved,
            );
        }
    }
    Ok(out)
}

/// Witness that `[θ,-]` is nonzero for a nonzero θ of bidegree `(-1, q)`:
/// a simplex together with a pure tensor `1 ⊗ f`, `f` a chart variable,
/// whose bracket against the local component is nonzero.
#[derive(Debug, Clone)]
pub struct NonzeroWitness {
    pub simplex: Vec<usize>,
    pub var: String,
    pub value: GerstElement,
}

/// Scans pure tensors `(1 ⊗ f)` over ring variables per simplex.
pub fn tw_minus_one_nonzero(theta: &TWElement) -> Result<NonzeroWitness> {
    if theta.is_zero() {
        return Err(Error::Argument("zero element has no witness".into()));
    }
    if theta.p != -1 {
        return Err(Error::Argument("probe expects polyvector degree -1".into()));
    }
    for (&si, comp) in &theta.components {
        let s = &theta.nerve.simplices[si];
        let ring = &s.chart.ring;
        for v in 0..ring.n_vars() {
            let f = GerstElement::from_poly(
                &s.chart,
                ring.monomial(Mono::var(ring.n_vars(), v), qi(1)),
            );
            // bracket the whole local component against 1 ⊗ f
            let mut nonzero = false;
            for val in comp.values() {
                if !g_bracket(val, &f)?.is_zero() {
                    nonzero = true;
                    break;
                }
            }
            if nonzero {
                return Ok(NonzeroWitness {
                    simplex: s.tuple.clone(),
                    var: ring.vars[v].name.clone(),
                    value: f,
                });
            }
        }
    }
    Err(Error::Invariant(
        "no variable witness found for a nonzero element".into(),
    ))
}

/// Rebuilds a chart at a lower truncation order.
pub fn chart_at_order(
    chart: &Arc<PolyvectorChart>,
    new_order: usize,
) -> Result<Arc<PolyvectorChart>> {
    let ring = chart.ring.at_order(new_order)?;
    let move_poly = |p: &PolyElement| p.into_order(&ring);
    let gens = chart
        .gens
        .iter()
        .map(|g| {
            Ok(crate::gerst::DerGen {
                name: g.name.clone(),
                action: g.action.iter().map(move_poly).collect::<Result<_>>()?,
                log_part: g.log_part.iter().map(move_poly).collect::<Result<_>>()?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let brackets = chart
        .brackets
        .iter()
        .map(|(k, v)| Ok((*k, v.iter().map(move_poly).collect::<Result<Vec<_>>>()?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    PolyvectorChart::new(ring, chart.log.clone(), gens, brackets)
}

/// Rebuilds a whole nerve at a lower truncation order.
pub fn nerve_at_order(nerve: &Arc<CoverNerve>, new_order: usize) -> Result<Arc<CoverNerve>> {
    let charts: Vec<Arc<PolyvectorChart>> = nerve
        .simplices
        .iter()
        .map(|s| chart_at_order(&s.chart, new_order))
        .collect::<Result<_>>()?;
    let simplices = nerve
        .simplices
        .iter()
        .enumerate()
        .map(|(si, s)| {
            let faces = s
                .faces
                .iter()
                .map(|(fi, map)| {
                    let hom = RingHom::new(
                        &charts[*fi].ring,
                        &charts[si].ring,
                        map.hom
                            .images
                            .iter()
                            .map(|im| im.into_order(&charts[si].ring))
                            .collect::<Result<_>>()?,
                    )?;
                    let gen_images = map
                        .gen_images
                        .iter()
                        .map(|img| {
                            let mut out = GerstElement::zero(&charts[si], -1);
                            for (w, c) in &img.terms {
                                let c2 = c.into_order(&charts[si].ring)?;
                                if !c2.is_zero() {
                                    out.terms.insert(w.clone(), c2);
                                }
                            }
                            Ok(out)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    ModuleMap::new(&charts[*fi], &charts[si], hom, gen_images)
                        .map(|m| (*fi, m))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Simplex {
                tuple: s.tuple.clone(),
                chart: charts[si].clone(),
                faces,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CoverNerve::new(new_order, simplices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::toy_nerve;

    #[test]
    fn toy_nerve_builds_and_unit_is_valid() {
        let nerve = toy_nerve(2).unwrap();
        assert_eq!(nerve.dimension(), 2);
        let unit_values: Vec<GerstElement> = nerve
            .vertices()
            .iter()
            .map(|s| GerstElement::from_poly(&s.chart, s.chart.ring.one()))
            .collect();
        let unit = include_global(&nerve, &unit_values).unwrap();
        assert!(tw_validate(&unit).valid);
        assert!(tw_d(&unit).is_zero());
        let back = extract_h0(&unit).unwrap();
        assert_eq!(back, unit_values);
    }

    #[test]
    fn d_squared_zero_and_leibniz_on_toy() {
        let nerve = toy_nerve(1).unwrap();
        let mut sampler = crate::sample::Sampler::new(11);
        for _ in 0..10 {
            let x = sampler.tw_element(&nerve, -1, 1, false).unwrap();
            assert!(tw_validate(&x).valid);
            assert!(tw_d(&tw_d(&x)).is_zero());
            let y = sampler.tw_element(&nerve, 0, 0, false).unwrap();
            // d(x ∧ y) = dx ∧ y + (-1)^{|x|} x ∧ dy with |x| the total degree
            let lhs = tw_d(&tw_wedge(&x, &y).unwrap());
            let sign = qi(pow_sign(x.p as i64 + x.q as i64) as i64);
            let rhs = tw_wedge(&tw_d(&x), &y)
                .unwrap()
                .add(&tw_wedge(&x, &tw_d(&y)).unwrap().scale(&sign));
            assert_eq!(lhs, rhs);
            // d[x,y] = [dx,y] + (-1)^{|x|+1}[x,dy]
            let lhs = tw_d(&tw_bracket(&x, &y).unwrap());
            let sign = qi(pow_sign(x.p as i64 + x.q as i64 + 1) as i64);
            let rhs = tw_bracket(&tw_d(&x), &y)
                .unwrap()
                .add(&tw_bracket(&x, &tw_d(&y)).unwrap().scale(&sign));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn operations_preserve_validity() {
        let nerve = toy_nerve(1).unwrap();
        let mut sampler = crate::sample::Sampler::new(5);
        for _ in 0..8 {
            let x = sampler.tw_element(&nerve, 0, 0, false).unwrap();
            let y = sampler.tw_element(&nerve, -1, 1, false).unwrap();
            assert!(tw_validate(&tw_d(&x)).valid);
            assert!(tw_validate(&tw_wedge(&x, &y).unwrap()).valid);
            assert!(tw_validate(&tw_bracket(&y, &x).unwrap()).valid);
        }
    }

    #[test]
    fn gauge_agrees_with_chart_gauge_componentwise() {
        let nerve = toy_nerve(2).unwrap();
        let mut sampler = crate::sample::Sampler::new(7);
        // θ = inclusion of a global chart gauge element
        let eta_chart = sampler.gerst(&nerve.simplices[0].chart, -1, true);
        let theta_values: Vec<GerstElement> = nerve
            .vertices()
            .iter()
            .map(|_| eta_chart.clone())
            .collect();
        let theta = include_global(&nerve, &theta_values).unwrap();
        let x_chart = sampler.gerst(&nerve.simplices[0].chart, 0, false);
        let x = include_global(&nerve, &vec![x_chart.clone(); 3]).unwrap();
        let moved = tw_gauge(&theta, &x).unwrap();
        let local = crate::logdef::gauge_exp(&eta_chart, &x_chart).unwrap();
        let vertex0 = moved.component(0);
        assert_eq!(vertex0.get(&(vec![], vec![])), Some(&local));
    }

    #[test]
    fn base_change_commutes_with_operations() {
        let nerve2 = toy_nerve(2).unwrap();
        let nerve1 = nerve_at_order(&nerve2, 1).unwrap();
        let mut sampler = crate::sample::Sampler::new(3);
        for _ in 0..6 {
            let x = sampler.tw_element(&nerve2, -1, 0, false).unwrap();
            let y = sampler.tw_element(&nerve2, -1, 1, false).unwrap();
            let down = |e: &TWElement| tw_base_change(e, &nerve1).unwrap();
            assert_eq!(down(&tw_d(&x)), tw_d(&down(&x)));
            assert_eq!(
                down(&tw_wedge(&x, &y).unwrap()),
                tw_wedge(&down(&x), &down(&y)).unwrap()
            );
            assert_eq!(
                down(&tw_bracket(&x, &y).unwrap()),
                tw_bracket(&down(&x), &down(&y)).unwrap()
            );
            assert!(tw_validate(&down(&x)).valid);
        }
    }

    #[test]
    fn minus_one_witness_found() {
        let nerve = toy_nerve(1).unwrap();
        let mut sampler = crate::sample::Sampler::new(19);
        let theta = sampler.tw_element(&nerve, -1, 1, false).unwrap();
        if theta.is_zero() {
            return;
        }
        let w = tw_minus_one_nonzero(&theta).unwrap();
        assert!(!w.var.is_empty());
        let zero = TWElement::zero(&nerve, -1, 1);
        assert!(tw_minus_one_nonzero(&zero).is_err());
    }
}
