//! Exact sparse Laurent-polynomial arithmetic in finitely presented chart
//! rings over Artin bases.
//!
//! A chart ring is `Q[v_1..v_n]` (some `v_i` Laurent-invertible) modulo a
//! terminating, confluent system of monomial rewrite rules. Quotients are
//! presented by rewriting rather than Gröbner machinery: every ring used here
//! admits a presentation in which the base variables `t_i` are either chart
//! variables themselves or eliminated into a monomial (e.g. `t := yz`), and
//! the only relations are nilpotent truncations `B_i^{k+1} -> 0`.
//!
//! Coefficients are exact rationals; Laurent variables are exact sparse
//! objects with no truncation window. Only the base ideal is nilpotently
//! truncated. Monomials are ordered lexicographically on the fixed variable
//! order, which makes every serialization canonical.

mod parse;

use crate::error::{Error, Result};
use crate::{qi, Q};
use num_traits::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Rewriting step budget; exceeding it flags the ring as malformed.
const REWRITE_BUDGET: usize = 100_000;

/// Exponent vector aligned with the owning ring's variable list.
/// Negative exponents are allowed only on invertible variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct Mono(pub Vec<i32>);

impl Mono {
    pub fn one(n_vars: usize) -> Self {
        Mono(vec![0; n_vars])
    }

    pub fn var(n_vars: usize, idx: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[idx] = 1;
        Mono(e)
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn pow(&self, n: i32) -> Mono {
        Mono(self.0.iter().map(|e| e * n).collect())
    }

    pub fn inv(&self) -> Mono {
        self.pow(-1)
    }

    /// Componentwise quotient; caller guarantees divisibility.
    fn div(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    fn divisible_by(&self, other: &Mono) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
    }

    fn lcm(&self, other: &Mono) -> Mono {
        Mono(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }
}

/// The Artin base ring `Q[t_1..t_r]/(t_i^{k+1})`: `rank` is the number of
/// base directions, `order` the truncation exponent `k`. `order == 0` gives
/// the residue field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ArtinBase {
    pub rank: usize,
    pub order: usize,
}

impl ArtinBase {
    pub fn new(rank: usize, order: usize) -> Self {
        ArtinBase { rank, order }
    }

    /// Names of the base variables: `t` for rank one, `t1, t2, ...` otherwise.
    pub fn var_names(&self) -> Vec<String> {
        if self.rank == 1 {
            vec!["t".to_string()]
        } else {
            (1..=self.rank).map(|i| format!("t{i}")).collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct VarSpec {
    pub name: String,
    pub invertible: bool,
}

/// Monomial-to-polynomial rewrite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub lhs: Mono,
    pub rhs: BTreeMap<Mono, Q>,
}

/// A finitely presented commutative ring over an Artin base.
#[derive(Debug, Clone, PartialEq)]
pub struct ChartRing {
    pub name: String,
    pub vars: Vec<VarSpec>,
    pub base: ArtinBase,
    /// Image of each base variable as a monomial in the chart variables.
    pub base_images: Vec<Mono>,
    /// Rewrite rules: auto-generated nilpotent truncations plus extras.
    pub rules: Vec<Rule>,
    /// Extra rules as supplied, kept so base change can regenerate the ring.
    extra_rules: Vec<Rule>,
}

impl ChartRing {
    /// Builds a chart ring and validates its rewriting system.
    ///
    /// For each base image `B_i` a truncation rule `B_i^{k+1} -> 0` is
    /// generated, with invertible-variable factors stripped from the left
    /// hand side so the rule stays applicable on Laurent normal forms.
    pub fn new(
        name: &str,
        vars: Vec<(&str, bool)>,
        base: ArtinBase,
        base_images: Vec<Vec<(usize, i32)>>,
        extra_rules: Vec<Rule>,
    ) -> Result<Arc<ChartRing>> {
        let vars: Vec<VarSpec> = vars
            .into_iter()
            .map(|(n, inv)| VarSpec {
                name: n.to_string(),
                invertible: inv,
            })
            .collect();
        let n = vars.len();
        {
            let mut names: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
            names.sort_unstable();
            names.dedup();
            if names.len() != n {
                return Err(Error::Construction(format!("duplicate variable in {name}")));
            }
        }
        if base_images.len() != base.rank {
            return Err(Error::Construction(format!(
                "{name}: {} base images for rank {}",
                base_images.len(),
                base.rank
            )));
        }
        let base_images: Vec<Mono> = base_images
            .into_iter()
            .map(|pairs| {
                let mut e = vec![0i32; n];
                for (idx, exp) in pairs {
                    e[idx] += exp;
                }
                Mono(e)
            })
            .collect();
        for b in &base_images {
            if b.0.iter().any(|&e| e < 0) {
                return Err(Error::Construction(format!(
                    "{name}: base image with negative exponent"
                )));
            }
            let has_noninv = b
                .0
                .iter()
                .enumerate()
                .any(|(i, &e)| e > 0 && !vars[i].invertible);
            if !has_noninv {
                return Err(Error::Construction(format!(
                    "{name}: base image is a unit; the base ideal would not be nilpotent"
                )));
            }
        }
        let mut rules = Vec::new();
        for b in &base_images {
            // strip invertible factors: they are units and never block rewriting
            let lhs = Mono(
                b.0.iter()
                    .enumerate()
                    .map(|(i, &e)| if vars[i].invertible { 0 } else { e * (base.order as i32 + 1) })
                    .collect(),
            );
            let rule = Rule {
                lhs,
                rhs: BTreeMap::new(),
            };
            if !rules.contains(&rule) {
                rules.push(rule);
            }
        }
        for r in &extra_rules {
            if r.lhs.0.len() != n || r.lhs.0.iter().any(|&e| e < 0) {
                return Err(Error::Construction(format!("{name}: malformed rule lhs")));
            }
            if !rules.contains(r) {
                rules.push(r.clone());
            }
        }
        let ring = Arc::new(ChartRing {
            name: name.to_string(),
            vars,
            base,
            base_images,
            rules,
            extra_rules,
        });
        ring.check_rewriting()?;
        Ok(ring)
    }

    /// The same presentation truncated to base order `k'`.
    pub fn at_order(self: &Arc<Self>, new_order: usize) -> Result<Arc<ChartRing>> {
        if new_order > self.base.order {
            return Err(Error::Argument(format!(
                "cannot raise truncation order {} to {}",
                self.base.order, new_order
            )));
        }
        ChartRing::new(
            &self.name,
            self.vars
                .iter()
                .map(|v| (v.name.as_str(), v.invertible))
                .collect(),
            ArtinBase::new(self.base.rank, new_order),
            self.base_images
                .iter()
                .map(|m| {
                    m.0.iter()
                        .enumerate()
                        .filter(|(_, &e)| e != 0)
                        .map(|(i, &e)| (i, e))
                        .collect()
                })
                .collect(),
            self.extra_rules.clone(),
        )
    }

    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Local confluence on all critical pairs plus a termination probe.
    fn check_rewriting(self: &Arc<Self>) -> Result<()> {
        for (i, a) in self.rules.iter().enumerate() {
            for b in self.rules.iter().skip(i) {
                let overlap = a.lhs.lcm(&b.lhs);
                let via_a = self.reduce_once(&overlap, a);
                let via_b = self.reduce_once(&overlap, b);
                let na = self.normal_form_terms(via_a)?;
                let nb = self.normal_form_terms(via_b)?;
                if na != nb {
                    return Err(Error::MalformedRing(format!(
                        "{}: critical pair of {:?} and {:?} does not join",
                        self.name, a.lhs, b.lhs
                    )));
                }
            }
        }
        Ok(())
    }

    fn reduce_once(&self, m: &Mono, rule: &Rule) -> BTreeMap<Mono, Q> {
        let quot = m.div(&rule.lhs);
        let mut out = BTreeMap::new();
        for (rm, rc) in &rule.rhs {
            add_term(&mut out, quot.mul(rm), rc.clone());
        }
        out
    }

    /// Rewrites a raw term map to its unique normal form.
    pub fn normal_form_terms(&self, mut terms: BTreeMap<Mono, Q>) -> Result<BTreeMap<Mono, Q>> {
        let mut budget = REWRITE_BUDGET;
        loop {
            let hit = terms.iter().find_map(|(m, _)| {
                self.rules
                    .iter()
                    .find(|r| m.divisible_by(&r.lhs))
                    .map(|r| (m.clone(), r.clone()))
            });
            let Some((m, rule)) = hit else {
                terms.retain(|_, c| !c.is_zero());
                return Ok(terms);
            };
            if budget == 0 {
                return Err(Error::MalformedRing(format!(
                    "{}: rewriting exceeded {} steps",
                    self.name, REWRITE_BUDGET
                )));
            }
            budget -= 1;
            let c = terms.remove(&m).unwrap();
            let quot = m.div(&rule.lhs);
            for (rm, rc) in &rule.rhs {
                add_term(&mut terms, quot.mul(rm), &c * rc);
            }
        }
    }

    pub fn zero(self: &Arc<Self>) -> PolyElement {
        PolyElement {
            ring: self.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(self: &Arc<Self>) -> PolyElement {
        self.constant(qi(1))
    }

    pub fn constant(self: &Arc<Self>, c: Q) -> PolyElement {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Mono::one(self.n_vars()), c);
        }
        PolyElement {
            ring: self.clone(),
            terms,
        }
    }

    pub fn var(self: &Arc<Self>, name: &str) -> Result<PolyElement> {
        let idx = self
            .var_index(name)
            .ok_or_else(|| Error::Argument(format!("no variable {name} in {}", self.name)))?;
        Ok(self.monomial(Mono::var(self.n_vars(), idx), qi(1)))
    }

    pub fn monomial(self: &Arc<Self>, m: Mono, c: Q) -> PolyElement {
        let mut terms = BTreeMap::new();
        terms.insert(m, c);
        PolyElement::make(self.clone(), terms)
    }

    /// The image of the base variable `t_i` in this ring, as an element.
    pub fn base_image(self: &Arc<Self>, i: usize) -> PolyElement {
        self.monomial(self.base_images[i].clone(), qi(1))
    }

    pub fn from_terms(self: &Arc<Self>, terms: BTreeMap<Mono, Q>) -> PolyElement {
        PolyElement::make(self.clone(), terms)
    }
}

impl fmt::Display for ChartRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

fn add_term(terms: &mut BTreeMap<Mono, Q>, m: Mono, c: Q) {
    if c.is_zero() {
        return;
    }
    let entry = terms.entry(m);
    match entry {
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

/// Sparse element of a chart ring, always stored in normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyElement {
    pub ring: Arc<ChartRing>,
    pub terms: BTreeMap<Mono, Q>,
}

impl PolyElement {
    fn make(ring: Arc<ChartRing>, terms: BTreeMap<Mono, Q>) -> PolyElement {
        let terms = ring
            .normal_form_terms(terms)
            .expect("rewriting budget exceeded on a validated ring");
        PolyElement { ring, terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .all(|(m, c)| m.is_one() && c.is_one())
    }

    fn assert_same_ring(&self, other: &PolyElement) {
        assert!(
            Arc::ptr_eq(&self.ring, &other.ring) || *self.ring == *other.ring,
            "ring mismatch: {} vs {}",
            self.ring.name,
            other.ring.name
        );
    }

    pub fn add(&self, other: &PolyElement) -> PolyElement {
        self.assert_same_ring(other);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut terms, m.clone(), c.clone());
        }
        PolyElement::make(self.ring.clone(), terms)
    }

    pub fn sub(&self, other: &PolyElement) -> PolyElement {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> PolyElement {
        PolyElement {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> PolyElement {
        if c.is_zero() {
            return self.ring.zero();
        }
        PolyElement {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul(&self, other: &PolyElement) -> PolyElement {
        self.assert_same_ring(other);
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                add_term(&mut terms, m1.mul(m2), c1 * c2);
            }
        }
        PolyElement::make(self.ring.clone(), terms)
    }

    pub fn pow(&self, n: u32) -> PolyElement {
        let mut out = self.ring.one();
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// True iff every monomial of the normal form is divisible by `power`
    /// base-monomial factors (invertible variables never constrain).
    pub fn ideal_membership(&self, power: usize) -> bool {
        if power == 0 {
            return true;
        }
        self.terms
            .keys()
            .all(|m| mono_in_ideal_power(&self.ring, m, power))
    }

    /// Representative of the image in the ring truncated to base order `k'`:
    /// kills exactly the monomials lying in `I^{k'+1}`.
    pub fn truncate_base(&self, new_order: usize) -> Result<PolyElement> {
        if new_order > self.ring.base.order {
            return Err(Error::Argument(format!(
                "truncation order {} exceeds ring order {}",
                new_order, self.ring.base.order
            )));
        }
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| !mono_in_ideal_power(&self.ring, m, new_order + 1))
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        Ok(PolyElement {
            ring: self.ring.clone(),
            terms,
        })
    }

    /// The image of this element in `ring.at_order(k')` (a genuine base
    /// change; the target is a different ring object).
    pub fn into_order(&self, target: &Arc<ChartRing>) -> Result<PolyElement> {
        if target.name != self.ring.name
            || target.vars != self.ring.vars
            || target.base_images != self.ring.base_images
        {
            return Err(Error::Argument(format!(
                "{} is not a truncation of {}",
                target.name, self.ring.name
            )));
        }
        Ok(target.from_terms(self.terms.clone()))
    }

    /// Multiplicative inverse of a unit. A unit is a Laurent monomial times
    /// `1 + nilpotent`; everything else is rejected.
    pub fn unit_inverse(&self) -> Result<PolyElement> {
        if self.is_zero() {
            return Err(Error::Domain("zero is not a unit".into()));
        }
        let head = self.truncate_base(0)?;
        if head.terms.len() != 1 {
            return Err(Error::Domain(format!("{self} is not a unit")));
        }
        let (m, c) = head.terms.iter().next().unwrap();
        let invertible_support = m
            .0
            .iter()
            .enumerate()
            .all(|(i, &e)| e == 0 || self.ring.vars[i].invertible);
        if !invertible_support {
            return Err(Error::Domain(format!("{self} is not a unit")));
        }
        let u_inv = self.ring.monomial(m.inv(), c.recip());
        let v = self.mul(&u_inv).sub(&self.ring.one());
        if !v.ideal_membership(1) {
            return Err(Error::Domain(format!("{self} is not a unit")));
        }
        // (u(1+v))^{-1} = u^{-1} sum (-v)^j, finite by nilpotency
        let mut series = self.ring.one();
        let mut power = self.ring.one();
        for _ in 0..self.ring.base.order {
            power = power.mul(&v.neg());
            if power.is_zero() {
                break;
            }
            series = series.add(&power);
        }
        Ok(u_inv.mul(&series))
    }

    pub fn is_unit(&self) -> bool {
        self.unit_inverse().is_ok()
    }

    /// Applies the derivation with the given action on variables.
    /// `action[i]` is the image of the i-th variable.
    pub fn apply_derivation(&self, action: &[PolyElement]) -> PolyElement {
        let mut out = self.ring.zero();
        for (m, c) in &self.terms {
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 || action[i].is_zero() {
                    continue;
                }
                let mut lowered = m.clone();
                lowered.0[i] -= 1;
                let partial = self
                    .ring
                    .monomial(lowered, c * qi(e as i64))
                    .mul(&action[i]);
                out = out.add(&partial);
            }
        }
        out
    }
}

fn mono_in_ideal_power(ring: &ChartRing, m: &Mono, power: usize) -> bool {
    // does some split power = a_1 + .. + a_r make m divisible by prod B_i^{a_i}
    // on the non-invertible variables?
    fn rec(ring: &ChartRing, remaining: &[i64], idx: usize, left: usize) -> bool {
        if idx == ring.base.rank {
            return left == 0;
        }
        let b = &ring.base_images[idx];
        // max multiplicity of B_idx still dividing
        let mut cap = left;
        for (i, &be) in b.0.iter().enumerate() {
            if be > 0 && !ring.vars[i].invertible {
                cap = cap.min((remaining[i].max(0) as usize) / be as usize);
            }
        }
        for a in (0..=cap).rev() {
            let next: Vec<i64> = remaining
                .iter()
                .zip(&b.0)
                .map(|(r, &be)| r - (a as i64) * be as i64)
                .collect();
            if rec(ring, &next, idx + 1, left - a) {
                return true;
            }
        }
        false
    }
    let remaining: Vec<i64> = m.0.iter().map(|&e| e as i64).collect();
    rec(ring, &remaining, 0, power)
}

impl fmt::Display for PolyElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c < &Q::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut factors: Vec<String> = Vec::new();
            if !abs.is_one() || m.is_one() {
                factors.push(abs.to_string());
            }
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if e == 1 {
                    factors.push(self.ring.vars[i].name.clone());
                } else {
                    factors.push(format!("{}^{}", self.ring.vars[i].name, e));
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

/// A structure-preserving map between chart rings, given by the images of the
/// source variables.
#[derive(Debug, Clone, PartialEq)]
pub struct RingHom {
    pub source: Arc<ChartRing>,
    pub target: Arc<ChartRing>,
    pub images: Vec<PolyElement>,
}

impl RingHom {
    pub fn new(
        source: &Arc<ChartRing>,
        target: &Arc<ChartRing>,
        images: Vec<PolyElement>,
    ) -> Result<RingHom> {
        if images.len() != source.n_vars() {
            return Err(Error::Argument(format!(
                "{} images for {} variables",
                images.len(),
                source.n_vars()
            )));
        }
        for im in &images {
            if *im.ring != **target {
                return Err(Error::Argument(
                    "image not an element of the target ring".into(),
                ));
            }
        }
        Ok(RingHom {
            source: source.clone(),
            target: target.clone(),
            images,
        })
    }

    pub fn identity(ring: &Arc<ChartRing>) -> RingHom {
        let images = (0..ring.n_vars())
            .map(|i| ring.monomial(Mono::var(ring.n_vars(), i), qi(1)))
            .collect();
        RingHom {
            source: ring.clone(),
            target: ring.clone(),
            images,
        }
    }

    /// Applies the map. Negative source exponents require the corresponding
    /// image to be a unit of the target.
    pub fn apply(&self, x: &PolyElement) -> Result<PolyElement> {
        if *x.ring != *self.source {
            return Err(Error::Argument(format!(
                "element of {} fed to a map out of {}",
                x.ring.name, self.source.name
            )));
        }
        let mut inverses: Vec<Option<PolyElement>> = vec![None; self.images.len()];
        let mut out = self.target.zero();
        for (m, c) in &x.terms {
            let mut prod = self.target.constant(c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let factor = if e > 0 {
                    self.images[i].pow(e as u32)
                } else {
                    if inverses[i].is_none() {
                        inverses[i] = Some(self.images[i].unit_inverse().map_err(|_| {
                            Error::Domain(format!(
                                "negative exponent on {} but its image is not a unit",
                                self.source.vars[i].name
                            ))
                        })?);
                    }
                    inverses[i].as_ref().unwrap().pow((-e) as u32)
                };
                prod = prod.mul(&factor);
            }
            out = out.add(&prod);
        }
        Ok(out)
    }

    pub fn compose(&self, inner: &RingHom) -> Result<RingHom> {
        if *inner.target != *self.source {
            return Err(Error::Argument("homs do not compose".into()));
        }
        let images = inner
            .images
            .iter()
            .map(|im| self.apply(im))
            .collect::<Result<Vec<_>>>()?;
        RingHom::new(&inner.source, &self.target, images)
    }
}

/// Validation report for a ring homomorphism.
#[derive(Debug, Clone, serde::Serialize)]
pub struct HomReport {
    pub well_defined: bool,
    pub base_compatible: bool,
    pub units_to_units: bool,
    pub inverse_ok: Option<bool>,
    pub witness: Option<String>,
}

impl HomReport {
    pub fn valid(&self) -> bool {
        self.well_defined && self.base_compatible && self.units_to_units
            && self.inverse_ok.unwrap_or(true)
    }
}

/// Checks well-definedness (relations map to zero), base compatibility
/// (`t_i` goes to `t_i`), unit preservation, and optionally a two-sided
/// inverse on generators.
pub fn check_hom(h: &RingHom, inverse: Option<&RingHom>) -> HomReport {
    let mut witness = None;
    let mut well_defined = true;
    for rule in &h.source.rules {
        // relation lhs - rhs must map to zero
        let mut terms = BTreeMap::new();
        terms.insert(rule.lhs.clone(), qi(1));
        let lhs = PolyElement {
            ring: h.source.clone(),
            terms: rule.rhs.iter().fold(terms, |mut t, (m, c)| {
                add_term(&mut t, m.clone(), -c.clone());
                t
            }),
        };
        match h.apply(&lhs) {
            Ok(v) if v.is_zero() => {}
            Ok(v) => {
                well_defined = false;
                witness.get_or_insert(format!("relation {:?} maps to {v}", rule.lhs));
            }
            Err(e) => {
                well_defined = false;
                witness.get_or_insert(format!("relation image failed: {e}"));
            }
        }
    }
    let mut base_compatible = h.source.base == h.target.base;
    if base_compatible {
        for i in 0..h.source.base.rank {
            let src = h.source.base_image(i);
            match h.apply(&src) {
                Ok(v) if v == h.target.base_image(i) => {}
                Ok(v) => {
                    base_compatible = false;
                    witness.get_or_insert(format!("base image t_{i} maps to {v}"));
                }
                Err(e) => {
                    base_compatible = false;
                    witness.get_or_insert(format!("base image failed: {e}"));
                }
            }
        }
    }
    let mut units_to_units = true;
    for (i, v) in h.source.vars.iter().enumerate() {
        if v.invertible && !h.images[i].is_unit() {
            units_to_units = false;
            witness.get_or_insert(format!("image of invertible {} is not a unit", v.name));
        }
    }
    let inverse_ok = inverse.map(|g| {
        let mut ok = *g.source == *h.target && *g.target == *h.source;
        if ok {
            for i in 0..h.source.n_vars() {
                let x = h
                    .source
                    .monomial(Mono::var(h.source.n_vars(), i), qi(1));
                match h.apply(&x).and_then(|y| g.apply(&y)) {
                    Ok(back) if back == x => {}
                    _ => {
                        ok = false;
                        witness.get_or_insert(format!(
                            "inverse fails on {}",
                            h.source.vars[i].name
                        ));
                    }
                }
            }
            for i in 0..h.target.n_vars() {
                let x = g
                    .source
                    .monomial(Mono::var(g.source.n_vars(), i), qi(1));
                match g.apply(&x).and_then(|y| h.apply(&y)) {
                    Ok(back) if back == x => {}
                    _ => {
                        ok = false;
                        witness.get_or_insert(format!(
                            "inverse fails on {}",
                            g.source.vars[i].name
                        ));
                    }
                }
            }
        }
        ok
    });
    HomReport {
        well_defined,
        base_compatible,
        units_to_units,
        inverse_ok,
        witness,
    }
}

/// A ring isomorphism stored with its inverse; both directions are validated
/// at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct InvertibleHom {
    pub fwd: RingHom,
    pub bwd: RingHom,
}

impl InvertibleHom {
    pub fn new(fwd: RingHom, bwd: RingHom) -> Result<InvertibleHom> {
        let report = check_hom(&fwd, Some(&bwd));
        if !report.valid() {
            return Err(Error::Construction(format!(
                "invalid isomorphism: {}",
                report.witness.unwrap_or_default()
            )));
        }
        let back = check_hom(&bwd, None);
        if !back.valid() {
            return Err(Error::Construction(format!(
                "invalid inverse: {}",
                back.witness.unwrap_or_default()
            )));
        }
        Ok(InvertibleHom { fwd, bwd })
    }

    pub fn identity(ring: &Arc<ChartRing>) -> InvertibleHom {
        InvertibleHom {
            fwd: RingHom::identity(ring),
            bwd: RingHom::identity(ring),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The vertex chart `Q[y,z,t]/(yz - t, t^{k+1})` with `t` eliminated.
    fn vertex_chart(k: usize) -> Arc<ChartRing> {
        ChartRing::new(
            "Vx",
            vec![("y", false), ("z", false)],
            ArtinBase::new(1, k),
            vec![vec![(0, 1), (1, 1)]],
            vec![],
        )
        .unwrap()
    }

    /// Edge chart `Q[y,t]_y/(t^{k+1})`: here `t` is itself a chart variable
    /// and the base maps to it identically.
    fn edge_chart(k: usize) -> Arc<ChartRing> {
        ChartRing::new(
            "Exy",
            vec![("y", true), ("t", false)],
            ArtinBase::new(1, k),
            vec![vec![(1, 1)]],
            vec![],
        )
        .unwrap()
    }

    /// Independent oracle for the vertex chart: multiply in Q[y,z] and drop
    /// monomials y^a z^b with min(a,b) >= k+1.
    fn vertex_oracle_nf(terms: &[(i32, i32, i64)], k: usize) -> BTreeMap<(i32, i32), i64> {
        let mut out = BTreeMap::new();
        for &(a, b, c) in terms {
            if a >= (k as i32 + 1) && b >= (k as i32 + 1) {
                continue;
            }
            *out.entry((a, b)).or_insert(0) += c;
        }
        out.retain(|_, c| *c != 0);
        out
    }

    #[test]
    fn normal_form_matches_substitution_oracle() {
        // k = 2, so t^3 = 0
        let r = vertex_chart(2);
        // y^2 z^2 * t -> substitute t = yz: y^3 z^3 -> 0
        let x = r.parse("y^2 * z^2 * t").unwrap();
        assert!(x.is_zero());
        assert_eq!(
            vertex_oracle_nf(&[(3, 3, 1)], 2),
            BTreeMap::new()
        );
        // t + yz -> 2yz
        let x = r.parse("t + y*z").unwrap();
        let expected = r.parse("2*y*z").unwrap();
        assert_eq!(x, expected);
        assert_eq!(vertex_oracle_nf(&[(1, 1, 1), (1, 1, 1)], 2).len(), 1);
        // already normal
        let y = r.var("y").unwrap();
        assert_eq!(r.parse("y").unwrap(), y);
    }

    #[test]
    fn normal_form_idempotent_and_zero_is_empty() {
        let r = vertex_chart(1);
        let x = r.parse("(y*z)^2 + y - y").unwrap();
        assert!(x.is_zero());
        let w = r.parse("3*y^2*z - z").unwrap();
        let again = r.from_terms(w.terms.clone());
        assert_eq!(w, again);
    }

    #[test]
    fn laurent_inverse_and_units() {
        let r = edge_chart(2);
        let u = r.var("y").unwrap();
        let inv = u.unit_inverse().unwrap();
        assert!(u.mul(&inv).is_one());
        // 1 + t is a unit with inverse 1 - t + t^2
        let x = r.parse("1 + t").unwrap();
        let xi = x.unit_inverse().unwrap();
        assert!(x.mul(&xi).is_one());
        assert_eq!(xi, r.parse("1 - t + t^2").unwrap());
        // y + t is a unit (y times (1 + t/y)); y + z in the vertex chart is not
        assert!(r.parse("y + t").unwrap().is_unit());
        let v = vertex_chart(2);
        assert!(!v.parse("y + z").unwrap().is_unit());
        assert!(!v.parse("y").unwrap().is_unit());
    }

    #[test]
    fn ideal_membership_examples() {
        let r = vertex_chart(2);
        assert!(r.parse("y*z").unwrap().ideal_membership(1));
        assert!(!r.parse("1").unwrap().ideal_membership(1));
        assert!(r.parse("(y*z)^2").unwrap().ideal_membership(2));
        assert!(!r.parse("y*z").unwrap().ideal_membership(2));
        assert!(r.parse("y^2*z").unwrap().ideal_membership(1));
        let e = edge_chart(2);
        assert!(e.parse("t * y^-5").unwrap().ideal_membership(1));
        assert!(!e.parse("y^-1").unwrap().ideal_membership(1));
    }

    #[test]
    fn truncate_base_examples() {
        let r = vertex_chart(2);
        let x = r.parse("1 + y*z").unwrap();
        assert_eq!(x.truncate_base(0).unwrap(), r.one());
        assert_eq!(x.truncate_base(2).unwrap(), x);
        let w = r.parse("2*y*z + y").unwrap();
        assert_eq!(w.truncate_base(0).unwrap(), r.var("y").unwrap());
        // order lowering is a ring map into the truncated ring
        let r1 = r.at_order(1).unwrap();
        let img = x.into_order(&r1).unwrap();
        assert_eq!(img, r1.parse("1 + y*z").unwrap());
        assert!(x.truncate_base(3).is_err());
    }

    #[test]
    fn nilpotency_of_base_ideal() {
        for k in 0..4usize {
            let r = vertex_chart(k);
            let t = r.base_image(0);
            assert!(t.pow(k as u32 + 1).is_zero());
            assert!(!t.pow(k as u32).is_zero() || k == 0);
        }
    }

    #[test]
    fn hom_apply_gluing() {
        // V_x|_{xy} -> V_y|_{xy} reduced charts: y |-> x^{-1}, t |-> t
        let src = edge_chart(2);
        let tgt = ChartRing::new(
            "Eyx",
            vec![("x", true), ("t", false)],
            ArtinBase::new(1, 2),
            vec![vec![(1, 1)]],
            vec![],
        )
        .unwrap();
        let h = RingHom::new(
            &src,
            &tgt,
            vec![tgt.parse("x^-1").unwrap(), tgt.parse("t").unwrap()],
        )
        .unwrap();
        // y |-> 1/x
        assert_eq!(h.apply(&src.var("y").unwrap()).unwrap(), tgt.parse("x^-1").unwrap());
        // z = t/y |-> t*x, i.e. the z |-> z x^2 rule in reduced coordinates
        assert_eq!(
            h.apply(&src.parse("t/y").unwrap()).unwrap(),
            tgt.parse("t*x").unwrap()
        );
        let report = check_hom(&h, None);
        assert!(report.valid(), "{:?}", report.witness);
        let back = RingHom::new(
            &tgt,
            &src,
            vec![src.parse("y^-1").unwrap(), src.parse("t").unwrap()],
        )
        .unwrap();
        let iso = InvertibleHom::new(h, back);
        assert!(iso.is_ok());
    }

    #[test]
    fn check_hom_detects_broken_relation() {
        let src = vertex_chart(1);
        let tgt = edge_chart(1);
        // y |-> y, z |-> y: the relation (yz)^2 maps to y^4 != 0
        let h = RingHom::new(
            &src,
            &tgt,
            vec![tgt.var("y").unwrap(), tgt.var("y").unwrap()],
        )
        .unwrap();
        let report = check_hom(&h, None);
        assert!(!report.well_defined);
        assert!(report.witness.is_some());
    }

    #[test]
    fn identity_hom_is_valid() {
        let r = vertex_chart(2);
        let id = RingHom::identity(&r);
        let report = check_hom(&id, Some(&id));
        assert!(report.valid());
        let x = r.parse("y^2 - 3*z").unwrap();
        assert_eq!(id.apply(&x).unwrap(), x);
    }

    #[test]
    fn derivation_application() {
        let r = vertex_chart(3);
        // the relative generator: D(y) = y, D(z) = -z
        let action = vec![r.var("y").unwrap(), r.parse("-z").unwrap()];
        let x = r.parse("y^2*z").unwrap();
        // D(y^2 z) = 2 y^2 z - y^2 z = y^2 z
        assert_eq!(x.apply_derivation(&action), r.parse("y^2*z").unwrap());
        // D kills the base image t = yz
        assert!(r.base_image(0).apply_derivation(&action).is_zero());
    }

    #[test]
    fn non_confluent_system_rejected() {
        // y^2 -> y and y^2 -> 0 cannot join
        let bad = ChartRing::new(
            "bad",
            vec![("y", false), ("z", false)],
            ArtinBase::new(1, 1),
            vec![vec![(0, 1), (1, 1)]],
            vec![
                Rule {
                    lhs: Mono(vec![2, 0]),
                    rhs: BTreeMap::from([(Mono(vec![1, 0]), qi(1))]),
                },
                Rule {
                    lhs: Mono(vec![2, 0]),
                    rhs: BTreeMap::new(),
                },
            ],
        );
        assert!(matches!(bad, Err(Error::MalformedRing(_))));
    }
}
