//! A small test nerve with a triple overlap.
//!
//! Three copies of one affine chart, fully overlapping with identity
//! restrictions. Its nerve has a 2-simplex, so bidegree `(-1, 2)` is nonzero
//! and Maurer–Cartan residuals can be genuinely nonvanishing — unlike on the
//! curve, whose nerve is one-dimensional.

use crate::error::Result;
use crate::exactalg::{ArtinBase, ChartRing, Mono};
use crate::gerst::{DerGen, GerstElement, LogStructure, PolyvectorChart};
use crate::tw::{CoverNerve, ModuleMap};
use std::collections::BTreeMap;
use std::sync::Arc;

/// The chart used for all toy vertices: `Q[u,v]/((uv)^{k+1})` with the
/// relative generator `u∂_u - v∂_v`.
pub fn toy_chart(order: usize) -> Result<Arc<PolyvectorChart>> {
    let ring = ChartRing::new(
        "T",
        vec![("u", false), ("v", false)],
        ArtinBase::new(1, order),
        vec![vec![(0, 1), (1, 1)]],
        vec![],
    )?;
    PolyvectorChart::new(
        ring.clone(),
        LogStructure {
            rank: 2,
            alpha: vec![Mono(vec![1, 0]), Mono(vec![0, 1])],
            base_in_monoid: vec![vec![1, 1]],
        },
        vec![DerGen {
            name: "d".into(),
            action: vec![ring.parse("u")?, ring.parse("-v")?],
            log_part: vec![ring.one(), ring.parse("-1")?],
        }],
        BTreeMap::new(),
    )
}

/// Three charts, all overlaps nonempty (including the triple one), identity
/// restriction maps everywhere.
pub fn toy_nerve(order: usize) -> Result<Arc<CoverNerve>> {
    let chart = toy_chart(order)?;
    let id = || ModuleMap::identity(&chart);
    let mut data: Vec<(Vec<usize>, Arc<PolyvectorChart>, Vec<ModuleMap>)> = Vec::new();
    for v in 0..3usize {
        data.push((vec![v], chart.clone(), vec![]));
    }
    for e in [[0usize, 1], [0, 2], [1, 2]] {
        data.push((e.to_vec(), chart.clone(), vec![id(), id()]));
    }
    data.push((vec![0, 1, 2], chart.clone(), vec![id(), id(), id()]));
    CoverNerve::from_overlaps(order, data)
}

/// A two-chart sub-nerve (no triple overlap) of the same charts, for the
/// degenerate cases where every `(-1, 2)` piece vanishes.
pub fn toy_two_chart_nerve(order: usize) -> Result<Arc<CoverNerve>> {
    let chart = toy_chart(order)?;
    let id = || ModuleMap::identity(&chart);
    let data = vec![
        (vec![0], chart.clone(), vec![]),
        (vec![1], chart.clone(), vec![]),
        (vec![0, 1], chart.clone(), vec![id(), id()]),
    ];
    CoverNerve::from_overlaps(order, data)
}

/// The unit section of a nerve, included as a Thom–Whitney element.
pub fn unit_element(nerve: &Arc<CoverNerve>) -> Result<crate::tw::TWElement> {
    let values: Vec<GerstElement> = nerve
        .vertices()
        .iter()
        .map(|s| GerstElement::from_poly(&s.chart, s.chart.ring.one()))
        .collect();
    crate::tw::include_global(nerve, &values)
}
