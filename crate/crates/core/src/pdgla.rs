//! Truncated predifferential graded Lie algebras over a cover nerve.
//!
//! The carrier in degree `j` is the space of Thom–Whitney elements of
//! bidegree `(-1, j)`; the bracket is the Thom–Whitney bracket and the
//! predifferential is the form differential plus an optional stored offset
//! `[η_d, -]`. The defect of `d` from being a differential is measured by
//! the unique `ℓ` with `d² = [ℓ,-]`; a nilpotent `η` solves the
//! Maurer–Cartan equation `dη + ½[η,η] + ℓ = 0` exactly when `d + [η,-]`
//! squares to zero. Only finite truncations are materialized; the projective
//! system over the orders is realized by base-change maps.

use crate::error::{Error, Result};
use crate::exactalg::Mono;
use crate::gerst::GerstElement;
use crate::logdef::bch_with_depth;
use crate::sample::Sampler;
use crate::tw::{
    include_global, tw_base_change, tw_bracket, tw_d, tw_gauge, tw_minus_one_nonzero, tw_validate,
    CoverNerve, TWElement,
};
use crate::{qi, qr};
use std::sync::Arc;

/// A truncated predifferential graded Lie algebra.
#[derive(Debug, Clone)]
pub struct Pdgla {
    pub nerve: Arc<CoverNerve>,
    /// Offset `η_d` with `d = d_0 + [η_d,-]`; `None` is the plain form
    /// differential.
    pub offset: Option<TWElement>,
    /// The curvature element with `d² = [ℓ,-]`, of bidegree `(-1, 2)`.
    pub ell: TWElement,
}

impl Pdgla {
    pub fn new(
        nerve: &Arc<CoverNerve>,
        offset: Option<TWElement>,
        ell: TWElement,
    ) -> Result<Pdgla> {
        if let Some(o) = &offset {
            if (o.p, o.q) != (-1, 1) && !o.is_zero() {
                return Err(Error::Construction("offset must have bidegree (-1,1)".into()));
            }
            if !o.coeffs_in_ideal(1) {
                return Err(Error::Construction("offset must have ideal coefficients".into()));
            }
            if !tw_validate(o).valid {
                return Err(Error::Construction("offset is not a valid element".into()));
            }
        }
        if (ell.p, ell.q) != (-1, 2) && !ell.is_zero() {
            return Err(Error::Construction("ℓ must have bidegree (-1,2)".into()));
        }
        if !ell.coeffs_in_ideal(1) {
            return Err(Error::Construction("ℓ must have ideal coefficients".into()));
        }
        Ok(Pdgla {
            nerve: nerve.clone(),
            offset,
            ell,
        })
    }

    /// The honest differential (zero offset, zero curvature).
    pub fn differential(nerve: &Arc<CoverNerve>) -> Pdgla {
        Pdgla {
            nerve: nerve.clone(),
            offset: None,
            ell: TWElement::zero(nerve, -1, 2),
        }
    }

    pub fn d(&self, x: &TWElement) -> Result<TWElement> {
        let mut out = tw_d(x);
        if let Some(o) = &self.offset {
            out = out.add(&tw_bracket(o, x)?);
        }
        Ok(out)
    }

    /// `dη + ½[η,η] + ℓ` for nilpotent `η` of bidegree `(-1, 1)`.
    pub fn mc_residual(&self, eta: &TWElement) -> Result<TWElement> {
        if !eta.coeffs_in_ideal(1) {
            return Err(Error::Precondition("η must have ideal coefficients".into()));
        }
        if (eta.p, eta.q) != (-1, 1) && !eta.is_zero() {
            return Err(Error::Argument("η must have bidegree (-1,1)".into()));
        }
        let quad = tw_bracket(eta, eta)?.scale(&qr(1, 2));
        Ok(self.d(eta)?.add(&quad).add(&self.ell))
    }

    pub fn is_mc(&self, eta: &TWElement) -> Result<bool> {
        Ok(self.mc_residual(eta)?.is_zero())
    }

    /// The operator `T([θ,-])` with `T(x) = (exp(x)-1)/x`.
    pub fn t_operator(&self, theta: &TWElement, x: &TWElement) -> Result<TWElement> {
        let mut acc = x.clone();
        let mut power = x.clone();
        let mut fact = qi(1);
        for j in 1..=self.nerve.order + 1 {
            power = tw_bracket(theta, &power)?;
            if power.is_zero() {
                break;
            }
            fact = fact * qi((j + 1) as i64);
            acc = acc.add(&power.scale(&fact.recip()));
        }
        Ok(acc)
    }

    /// Gauge action on Maurer–Cartan unknowns:
    /// `η' = exp_θ(η) - T([θ,-])(dθ)`, so that
    /// `exp_θ ∘ (d + [η,-]) ∘ exp_{-θ} = d + [η',-]`.
    pub fn gauge_action(&self, theta: &TWElement, eta: &TWElement) -> Result<TWElement> {
        if !theta.coeffs_in_ideal(1) || !eta.coeffs_in_ideal(1) {
            return Err(Error::Precondition(
                "gauge action needs nilpotent inputs".into(),
            ));
        }
        if (theta.p, theta.q) != (-1, 0) && !theta.is_zero() {
            return Err(Error::Argument("θ must have bidegree (-1,0)".into()));
        }
        let moved = tw_gauge(theta, eta)?;
        let correction = self.t_operator(theta, &self.d(theta)?)?;
        Ok(moved.sub(&correction))
    }

    /// Exact equality test `gauge_action(θ, η') = η`, with the computed
    /// action returned as certificate.
    pub fn gauge_equivalent(
        &self,
        eta: &TWElement,
        eta_prime: &TWElement,
        theta: &TWElement,
    ) -> Result<(bool, TWElement)> {
        let moved = self.gauge_action(theta, eta_prime)?;
        Ok((moved == *eta, moved))
    }

    /// Conjugation defect `exp_θ(d_η(exp_{-θ}(x))) - (d + [η',-])(x)` on one
    /// argument; zero for every argument when the gauge formula holds.
    pub fn conjugation_defect(
        &self,
        theta: &TWElement,
        eta: &TWElement,
        eta_prime: &TWElement,
        x: &TWElement,
    ) -> Result<TWElement> {
        let minus_theta = theta.neg();
        let unconj = tw_gauge(&minus_theta, x)?;
        let inner = self.d(&unconj)?.add(&tw_bracket(eta, &unconj)?);
        let lhs = tw_gauge(theta, &inner)?;
        let rhs = self.d(x)?.add(&tw_bracket(eta_prime, x)?);
        Ok(lhs.sub(&rhs))
    }
}

/// Canonical degree-(0,0) probe family: the unit section, every compatible
/// ring-variable family, and every compatible generator family.
pub fn canonical_h0_samples(nerve: &Arc<CoverNerve>) -> Vec<TWElement> {
    let mut out = Vec::new();
    let vertices = nerve.vertices();
    let unit: Vec<GerstElement> = vertices
        .iter()
        .map(|s| GerstElement::from_poly(&s.chart, s.chart.ring.one()))
        .collect();
    if let Ok(e) = include_global(nerve, &unit) {
        out.push(e);
    }
    let max_vars = vertices
        .iter()
        .map(|s| s.chart.ring.n_vars())
        .max()
        .unwrap_or(0);
    for v in 0..max_vars {
        let family: Option<Vec<GerstElement>> = vertices
            .iter()
            .map(|s| {
                let ring = &s.chart.ring;
                if v < ring.n_vars() {
                    Some(GerstElement::from_poly(
                        &s.chart,
                        ring.monomial(Mono::var(ring.n_vars(), v), qi(1)),
                    ))
                } else {
                    None
                }
            })
            .collect();
        if let Some(f) = family {
            if let Ok(e) = include_global(nerve, &f) {
                out.push(e);
            }
        }
    }
    let max_gens = vertices
        .iter()
        .map(|s| s.chart.gens.len())
        .max()
        .unwrap_or(0);
    for g in 0..max_gens {
        let family: Option<Vec<GerstElement>> = vertices
            .iter()
            .map(|s| {
                if g < s.chart.gens.len() {
                    Some(GerstElement::generator(&s.chart, g))
                } else {
                    None
                }
            })
            .collect();
        if let Some(f) = family {
            if let Ok(e) = include_global(nerve, &f) {
                out.push(e);
            }
        }
    }
    out
}

/// Solves `d²(x) = [ℓ, x]` for the unique curvature element, over the
/// canonical probe family, one overlap and form monomial at a time (this is
/// an exact ring-linear solve with self-escalating candidate monomials).
/// The result is verified against every probe; non-uniqueness relative to
/// the probes is reported as an invariant violation.
pub fn find_ell(
    nerve: &Arc<CoverNerve>,
    d_op: &dyn Fn(&TWElement) -> Result<TWElement>,
    extra_samples: &[TWElement],
) -> Result<TWElement> {
    let probes: Vec<TWElement> = canonical_h0_samples(nerve)
        .into_iter()
        .chain(extra_samples.iter().cloned())
        .collect();
    let squares: Vec<TWElement> = probes
        .iter()
        .map(|x| d_op(&d_op(x)?))
        .collect::<Result<_>>()?;
    let mut ell = TWElement::zero(nerve, -1, 2);
    for (si, s) in nerve.simplices.iter().enumerate() {
        if s.dim() != 2 {
            // only 2-simplices carry degree-2 forms on nerves of dim <= 2
            continue;
        }
        // form monomials appearing in any d²(x) at this simplex
        let mut monos: std::collections::BTreeSet<crate::apl::AplMono> =
            std::collections::BTreeSet::new();
        for sq in &squares {
            for m in sq.component(si).keys() {
                monos.insert(m.clone());
            }
        }
        for mu in monos {
            // unknown: coefficient vector over the generators at (si, mu):
            // [c·γ, 1⊗f] = -c·γ(f) per constant probe f
            let mut matrix = Vec::new();
            let mut rhs = Vec::new();
            for (x, sq) in probes.iter().zip(&squares) {
                let xc = x.component(si);
                let Some(xv) = xc.get(&(vec![0, 0], vec![])) else {
                    continue;
                };
                if xv.degree != 0 {
                    continue;
                }
                let Some(f) = xv.terms.get(&vec![]).cloned() else {
                    continue;
                };
                let row: Vec<_> = s
                    .chart
                    .gens
                    .iter()
                    .map(|g| f.apply_derivation(&g.action).neg())
                    .collect();
                let target = sq
                    .component(si)
                    .get(&mu)
                    .and_then(|v| v.terms.get(&vec![]).cloned())
                    .unwrap_or_else(|| s.chart.ring.zero());
                matrix.push(row);
                rhs.push(target);
            }
            if matrix.is_empty() {
                continue;
            }
            let coeffs = crate::gerst::solve_in_ring(matrix, rhs)?;
            let value = GerstElement::from_gen_coeffs(&s.chart, &coeffs);
            if !value.is_zero() {
                let form =
                    crate::apl::APLForm::monomial(2, mu.0.clone(), mu.1.clone(), qi(1));
                ell.insert_term(si, &form, &value);
            }
        }
    }
    // global verification on every probe
    for (x, sq) in probes.iter().zip(&squares) {
        let predicted = tw_bracket(&ell, x)?;
        if predicted != *sq {
            return Err(Error::Invariant(
                "no curvature element matches d² on the probe family".into(),
            ));
        }
    }
    if !ell.coeffs_in_ideal(1) {
        return Err(Error::Invariant(
            "computed curvature element is not ideal-valued".into(),
        ));
    }
    Ok(ell)
}

/// Cross-check that two curvature candidates agreeing as operators are equal:
/// a nonzero difference must produce a variable witness.
pub fn ell_uniqueness_witness(a: &TWElement, b: &TWElement) -> Result<Option<String>> {
    let diff = a.sub(b);
    if diff.is_zero() {
        return Ok(None);
    }
    let w = tw_minus_one_nonzero(&diff)?;
    Ok(Some(format!(
        "candidates differ: bracket against {} on {:?} is nonzero",
        w.var, w.simplex
    )))
}

/// Validation report for the pdgla axioms on a sample set.
#[derive(Debug, Clone, serde::Serialize)]
pub struct PdglaReport {
    pub cases: usize,
    pub pass: bool,
    pub witness: Option<String>,
}

/// Checks the derivation law, graded Jacobi, `d² = [ℓ,-]` and the
/// ideal-valuedness of `ℓ` on seeded samples.
pub fn validate_pdgla(pd: &Pdgla, sampler: &mut Sampler, samples: usize) -> Result<PdglaReport> {
    let nerve = &pd.nerve;
    let mut cases = 0;
    let fail = |cases, w: String| {
        Ok(PdglaReport {
            cases,
            pass: false,
            witness: Some(w),
        })
    };
    if !pd.ell.coeffs_in_ideal(1) {
        return fail(0, "ℓ is not ideal-valued".into());
    }
    let bidegrees = [(-1, 0), (-1, 1), (0, 0)];
    for i in 0..samples {
        cases += 1;
        let (px, qx) = bidegrees[i % 3];
        let (py, qy) = bidegrees[(i + 1) % 3];
        let x = sampler.tw_element(nerve, px, qx, false)?;
        let y = sampler.tw_element(nerve, py, qy, false)?;
        let z = sampler.tw_element(nerve, -1, 0, false)?;
        // d[x,y] = [dx,y] + (-1)^{|x|+1}[x,dy] with |x| the total degree
        let lhs = pd.d(&tw_bracket(&x, &y)?)?;
        let sign = qi(crate::sign::pow_sign((px + qx as i32 + 1) as i64) as i64);
        let rhs = tw_bracket(&pd.d(&x)?, &y)?.add(&tw_bracket(&x, &pd.d(&y)?)?.scale(&sign));
        if lhs != rhs {
            return fail(cases, format!("derivation law fails on sample {cases}"));
        }
        // graded Jacobi in total degree
        let tx = px + qx as i32;
        let ty = py + qy as i32;
        let jl = tw_bracket(&x, &tw_bracket(&y, &z)?)?;
        let jr = tw_bracket(&tw_bracket(&x, &y)?, &z)?.add(
            &tw_bracket(&y, &tw_bracket(&x, &z)?)?
                .scale(&qi(crate::sign::pow_sign(((tx + 1) * (ty + 1)) as i64) as i64)),
        );
        if jl != jr {
            return fail(cases, format!("graded Jacobi fails on sample {cases}"));
        }
        // d² = [ℓ,-]
        let sq = pd.d(&pd.d(&x)?)?;
        if sq != tw_bracket(&pd.ell, &x)? {
            return fail(cases, format!("d² != [ℓ,-] on sample {cases}"));
        }
    }
    Ok(PdglaReport {
        cases,
        pass: true,
        witness: None,
    })
}

/// BCH product on the gauge group `(-1, 0)` of a pdgla.
pub fn bch_tw(theta: &TWElement, xi: &TWElement) -> Result<TWElement> {
    if !theta.coeffs_in_ideal(1) || !xi.coeffs_in_ideal(1) {
        return Err(Error::Precondition(
            "BCH needs ideal coefficients".into(),
        ));
    }
    bch_with_depth(theta, xi, theta.nerve.order)
}

/// The underlying graded-Lie map of a pdgla homomorphism.
#[derive(Debug, Clone)]
pub enum PdglaMap {
    Identity,
    /// Base change to a lower order (the target nerve).
    Truncation(Arc<CoverNerve>),
    /// Conjugation by a gauge transform on the same pdgla.
    GaugeConj(TWElement),
}

impl PdglaMap {
    pub fn apply(&self, x: &TWElement) -> Result<TWElement> {
        match self {
            PdglaMap::Identity => Ok(x.clone()),
            PdglaMap::Truncation(target) => tw_base_change(x, target),
            PdglaMap::GaugeConj(theta) => tw_gauge(theta, x),
        }
    }
}

/// A pdgla homomorphism: a bracket-compatible map plus the correction
/// `κ ∈ m·M¹` with `d_M ∘ ψ - ψ ∘ d_L = [κ, ψ(-)]` and
/// `ψ(ℓ_L) = ℓ_M - d_M κ + ½[κ,κ]`.
#[derive(Debug, Clone)]
pub struct PdglaHom {
    pub map: PdglaMap,
    pub kappa: TWElement,
}

impl PdglaHom {
    pub fn identity(nerve: &Arc<CoverNerve>) -> PdglaHom {
        PdglaHom {
            map: PdglaMap::Identity,
            kappa: TWElement::zero(nerve, -1, 1),
        }
    }

    /// The base-change homomorphism with zero correction.
    pub fn truncation(target: &Arc<CoverNerve>) -> PdglaHom {
        PdglaHom {
            map: PdglaMap::Truncation(target.clone()),
            kappa: TWElement::zero(target, -1, 1),
        }
    }

    /// Conjugation by `exp_θ`, whose correction is `T([θ,-])(dθ)`.
    pub fn gauge_conj(src: &Pdgla, theta: &TWElement) -> Result<PdglaHom> {
        let kappa = src.t_operator(theta, &src.d(theta)?)?;
        Ok(PdglaHom {
            map: PdglaMap::GaugeConj(theta.clone()),
            kappa,
        })
    }

    /// The induced map on Maurer–Cartan unknowns: `η ↦ ψ(η) - κ`.
    pub fn def_map(&self, eta: &TWElement) -> Result<TWElement> {
        Ok(self.map.apply(eta)?.sub(&self.kappa))
    }
}

/// Checks the two defining identities of a pdgla homomorphism on samples.
pub fn validate_hom(
    src: &Pdgla,
    tgt: &Pdgla,
    hom: &PdglaHom,
    sampler: &mut Sampler,
    samples: usize,
) -> Result<PdglaReport> {
    let mut cases = 0;
    let fail = |cases, w: String| {
        Ok(PdglaReport {
            cases,
            pass: false,
            witness: Some(w),
        })
    };
    let bidegrees = [(-1, 0), (-1, 1), (0, 0)];
    for i in 0..samples {
        cases += 1;
        let (p, q) = bidegrees[i % 3];
        let x = sampler.tw_element(&src.nerve, p, q, false)?;
        let y = sampler.tw_element(&src.nerve, -1, 0, false)?;
        // bracket compatibility
        let bl = hom.map.apply(&tw_bracket(&x, &y)?)?;
        let br = tw_bracket(&hom.map.apply(&x)?, &hom.map.apply(&y)?)?;
        if bl != br {
            return fail(cases, format!("ψ is not a Lie map on sample {cases}"));
        }
        // d_M ψ - ψ d_L = [κ, ψ(-)]
        let lhs = tgt.d(&hom.map.apply(&x)?)?.sub(&hom.map.apply(&src.d(&x)?)?);
        let rhs = tw_bracket(&hom.kappa, &hom.map.apply(&x)?)?;
        if lhs != rhs {
            return fail(cases, format!("κ identity fails on sample {cases}"));
        }
    }
    // ψ(ℓ_L) = ℓ_M - d_M κ + ½[κ,κ]
    let lhs = hom.map.apply(&src.ell)?;
    let rhs = tgt
        .ell
        .sub(&tgt.d(&hom.kappa)?)
        .add(&tw_bracket(&hom.kappa, &hom.kappa)?.scale(&qr(1, 2)));
    if lhs != rhs {
        return fail(cases, "curvature identity fails".into());
    }
    Ok(PdglaReport {
        cases,
        pass: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy::{toy_nerve, toy_two_chart_nerve};
    use crate::tw::nerve_at_order;

    #[test]
    fn honest_differential_has_zero_ell() {
        let nerve = toy_nerve(2).unwrap();
        let pd = Pdgla::differential(&nerve);
        let d = |x: &TWElement| pd.d(x);
        let mut sampler = Sampler::new(2);
        let extra: Vec<TWElement> = (0..3)
            .map(|_| sampler.tw_element(&nerve, 0, 0, false).unwrap())
            .collect();
        let ell = find_ell(&nerve, &d, &extra).unwrap();
        assert!(ell.is_zero());
    }

    #[test]
    fn find_ell_matches_residual_formula() {
        let nerve = toy_nerve(2).unwrap();
        let pd = Pdgla::differential(&nerve);
        let mut sampler = Sampler::new(4);
        for _ in 0..5 {
            let eta = sampler.tw_element(&nerve, -1, 1, true).unwrap();
            let d_op = move |x: &TWElement| -> Result<TWElement> {
                Ok(tw_d(x).add(&tw_bracket(&eta, x)?))
            };
            let eta2 = sampler.tw_element(&nerve, -1, 1, true).unwrap();
            let found = find_ell(&nerve, &d_op, &[]).unwrap();
            let expected = pd.mc_residual(&eta2);
            // the oracle is the residual of the same offset; recompute it
            // with the actual eta by reading it back from d - d_0 on probes
            let _ = expected;
            let oracle = pd.mc_residual(&read_offset(&nerve, &d_op).unwrap()).unwrap();
            if found != oracle {
                let w = ell_uniqueness_witness(&found, &oracle).unwrap();
                panic!("curvature mismatch: {w:?}");
            }
        }
    }

    // recovers η with d = d_0 + [η,-] from the probes, for the test oracle
    fn read_offset(
        nerve: &Arc<CoverNerve>,
        d_op: &dyn Fn(&TWElement) -> Result<TWElement>,
    ) -> Result<TWElement> {
        // on the toy nerve the constant u-family and v-family probes see the
        // full offset; solve [η, x] = d(x) - d_0(x) like find_ell does
        let probes = canonical_h0_samples(nerve);
        let diffs: Vec<TWElement> = probes
            .iter()
            .map(|x| Ok(d_op(x)?.sub(&tw_d(x))))
            .collect::<Result<_>>()?;
        let mut eta = TWElement::zero(nerve, -1, 1);
        for (si, s) in nerve.simplices.iter().enumerate() {
            let mut monos: std::collections::BTreeSet<crate::apl::AplMono> = Default::default();
            for d in &diffs {
                for m in d.component(si).keys() {
                    monos.insert(m.clone());
                }
            }
            for mu in monos {
                let mut matrix = Vec::new();
                let mut rhs = Vec::new();
                for (x, df) in probes.iter().zip(&diffs) {
                    let xc = x.component(si);
                    let key = (vec![0u32; s.dim()], vec![]);
                    let Some(xv) = xc.get(&key) else { continue };
                    let Some(f) = xv.terms.get(&vec![]).cloned() else {
                        continue;
                    };
                    matrix.push(
                        s.chart
                            .gens
                            .iter()
                            .map(|g| f.apply_derivation(&g.action).neg())
                            .collect::<Vec<_>>(),
                    );
                    rhs.push(
                        df.component(si)
                            .get(&mu)
                            .and_then(|v| v.terms.get(&vec![]).cloned())
                            .unwrap_or_else(|| s.chart.ring.zero()),
                    );
                }
                if matrix.is_empty() {
                    continue;
                }
                let coeffs = crate::gerst::solve_in_ring(matrix, rhs)?;
                let value = GerstElement::from_gen_coeffs(&s.chart, &coeffs);
                if !value.is_zero() {
                    let form = crate::apl::APLForm::monomial(
                        s.dim(),
                        mu.0.clone(),
                        mu.1.clone(),
                        qi(1),
                    );
                    eta.insert_term(si, &form, &value);
                }
            }
        }
        Ok(eta)
    }

    #[test]
    fn mc_residual_measures_square() {
        let nerve = toy_nerve(2).unwrap();
        let pd = Pdgla::differential(&nerve);
        let mut sampler = Sampler::new(9);
        for _ in 0..4 {
            let eta = sampler.tw_element(&nerve, -1, 1, true).unwrap();
            let rho = pd.mc_residual(&eta).unwrap();
            for _ in 0..3 {
                let x = sampler.tw_element(&nerve, 0, 0, false).unwrap();
                let d_eta =
                    |w: &TWElement| -> Result<TWElement> { Ok(pd.d(w)?.add(&tw_bracket(&eta, w)?)) };
                let sq = d_eta(&d_eta(&x).unwrap()).unwrap();
                assert_eq!(sq, tw_bracket(&rho, &x).unwrap());
            }
        }
    }

    #[test]
    fn two_chart_nerve_has_no_curvature_space() {
        let nerve = toy_two_chart_nerve(2).unwrap();
        let pd = Pdgla::differential(&nerve);
        let mut sampler = Sampler::new(14);
        for _ in 0..5 {
            let eta = sampler.tw_element(&nerve, -1, 1, true).unwrap();
            // bidegree (-1,2) vanishes identically on a 1-dimensional nerve
            assert!(pd.mc_residual(&eta).unwrap().is_zero());
        }
    }

    #[test]
    fn gauge_action_examples() {
        let nerve = toy_nerve(2).unwrap();
        let pd = Pdgla::differential(&nerve);
        let mut sampler = Sampler::new(21);
        let eta = sampler.tw_element(&nerve, -1, 1, true).unwrap();
        // θ = 0 is the identity on unknowns
        let zero = TWElement::zero(&nerve, -1, 0);
        assert_eq!(pd.gauge_action(&zero, &eta).unwrap(), eta);
        // closed θ drops the correction term
        let theta_closed = {
            let values: Vec<GerstElement> = nerve
                .vertices()
                .iter()
                .map(|s| {
                    GerstElement::generator(&s.chart, 0)
                        .mul_poly(&s.chart.ring.parse("t").unwrap())
                })
                .collect();
            include_global(&nerve, &values).unwrap()
        };
        if tw_d(&theta_closed).is_zero() {
            assert_eq!(
                pd.gauge_action(&theta_closed, &eta).unwrap(),
                tw_gauge(&theta_closed, &eta).unwrap()
            );
        }
        // conjugation identity on sample arguments
        let theta = sampler.tw_element(&nerve, -1, 0, true).unwrap();
        let eta_prime = pd.gauge_action(&theta, &eta).unwrap();
        for _ in 0..4 {
            let x = sampler.tw_element(&nerve, 0, 0, false).unwrap();
            let defect = pd.conjugation_defect(&theta, &eta, &eta_prime, &x).unwrap();
            assert!(defect.is_zero(), "conjugation defect nonzero");
        }
        let (ok, _) = pd.gauge_equivalent(&eta_prime, &eta, &theta).unwrap();
        assert!(ok);
    }

    #[test]
    fn gauge_action_is_group_action() {
        let nerve = toy_nerve(2).unwrap();
        let pd = Pdgla::differential(&nerve);
        let mut sampler = Sampler::new(31);
        for _ in 0..3 {
            let theta = sampler.tw_element(&nerve, -1, 0, true).unwrap();
            let xi = sampler.tw_element(&nerve, -1, 0, true).unwrap();
            let eta = sampler.tw_element(&nerve, -1, 1, true).unwrap();
            let two = pd
                .gauge_action(&theta, &pd.gauge_action(&xi, &eta).unwrap())
                .unwrap();
            let one = pd
                .gauge_action(&bch_tw(&theta, &xi).unwrap(), &eta)
                .unwrap();
            assert_eq!(two, one);
        }
    }

    #[test]
    fn mc_is_gauge_invariant() {
        let nerve = toy_nerve(2).unwrap();
        let pd = Pdgla::differential(&nerve);
        let mut sampler = Sampler::new(41);
        for _ in 0..4 {
            let theta = sampler.tw_element(&nerve, -1, 0, true).unwrap();
            let eta = sampler.tw_element(&nerve, -1, 1, true).unwrap();
            let eta_prime = pd.gauge_action(&theta, &eta).unwrap();
            let r = pd.mc_residual(&eta).unwrap();
            let r_prime = pd.mc_residual(&eta_prime).unwrap();
            // residuals are exchanged by the gauge transform
            assert_eq!(r_prime, tw_gauge(&theta, &r).unwrap());
            assert_eq!(r.is_zero(), r_prime.is_zero());
        }
    }

    #[test]
    fn homomorphisms_validate() {
        let nerve2 = toy_nerve(2).unwrap();
        let nerve1 = nerve_at_order(&nerve2, 1).unwrap();
        let pd2 = Pdgla::differential(&nerve2);
        let pd1 = Pdgla::differential(&nerve1);
        let mut sampler = Sampler::new(51);
        // identity
        let id = PdglaHom::identity(&nerve2);
        let r = validate_hom(&pd2, &pd2, &id, &mut sampler, 4).unwrap();
        assert!(r.pass, "{:?}", r.witness);
        let eta = sampler.tw_element(&nerve2, -1, 1, true).unwrap();
        assert_eq!(id.def_map(&eta).unwrap(), eta);
        // base change
        let tr = PdglaHom::truncation(&nerve1);
        let r = validate_hom(&pd2, &pd1, &tr, &mut sampler, 4).unwrap();
        assert!(r.pass, "{:?}", r.witness);
        // MC solutions map to MC solutions
        if pd2.is_mc(&eta).unwrap() {
            assert!(pd1.is_mc(&tr.def_map(&eta).unwrap()).unwrap());
        }
        // gauge conjugation with its canonical correction
        let theta = sampler.tw_element(&nerve2, -1, 0, true).unwrap();
        let conj = PdglaHom::gauge_conj(&pd2, &theta).unwrap();
        let r = validate_hom(&pd2, &pd2, &conj, &mut sampler, 4).unwrap();
        assert!(r.pass, "{:?}", r.witness);
        // its def_map is the gauge action
        let eta2 = sampler.tw_element(&nerve2, -1, 1, true).unwrap();
        assert_eq!(
            conj.def_map(&eta2).unwrap(),
            pd2.gauge_action(&theta, &eta2).unwrap()
        );
    }
}
