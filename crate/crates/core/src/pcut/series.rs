//! Assembly of boundary-entropy and Wilson-loop series and their channel
//! decomposition.
//!
//! Each geometry gets an exact series from the linked-cluster expansion. The
//! coefficients are then split into geometric channels (L, K, n, const) or
//! (L′, H′, n, const) by solving an exact linear system over a family of
//! geometries; any residual is an error, never absorbed.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use super::cluster::{ClusterEngine, ClusterStats};
use super::flow::{flow_expand, FlowExpansion};
use super::model::ClusterObservable;
use super::operator::{build_generators, Generators, Regime, SiteLabel};
use super::power::PowerSeries;
use crate::error::{Error, Result};
use crate::lattice::{
    build_partition_at, BoundaryGeometry, EdgeDir, PartitionCase, Star, StarRegion, Variant,
};

/// Largest supported order in the raw expansion parameter.
pub const MAX_ORDER: usize = 8;

/// Geometric channels of a series.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Channel {
    L,
    K,
    #[serde(rename = "n")]
    N,
    #[serde(rename = "L'")]
    LPrime,
    #[serde(rename = "H'")]
    HPrime,
    #[serde(rename = "const")]
    Const,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::L => "L",
            Channel::K => "K",
            Channel::N => "n",
            Channel::LPrime => "L'",
            Channel::HPrime => "H'",
            Channel::Const => "const",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Quantity a series expands.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    /// ln 2 · (S₂ − S₂ at the unperturbed point).
    Renyi,
    /// −ln W (2D) or −ln W₀ (quasi-1D).
    WilsonLog,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Renyi => "renyi",
            Target::WilsonLog => "wilson_log",
        }
    }
}

/// Channel coefficients; `channels[c][k−1]` multiplies x^k, x = λ² (small
/// field) or λ⁻² (large field).
#[derive(Clone, Debug, PartialEq)]
pub struct SeriesPolynomial {
    pub regime: Regime,
    pub variant: Variant,
    pub target: Target,
    pub channels: BTreeMap<Channel, Vec<BigRational>>,
}

impl SeriesPolynomial {
    pub fn variable(&self) -> &'static str {
        match self.regime {
            Regime::SmallField => "lambda^2",
            Regime::LargeField => "lambda^-2",
        }
    }

    /// Number of computed powers of the variable.
    pub fn terms(&self) -> usize {
        self.channels.values().map(Vec::len).max().unwrap_or(0)
    }

    /// Coefficient of x^k in a channel (zero if absent).
    pub fn coefficient(&self, channel: Channel, k: usize) -> BigRational {
        self.channels
            .get(&channel)
            .and_then(|v| v.get(k.wrapping_sub(1)))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    /// Σ_k c_k x^k for one channel, in floating point.
    pub fn channel_value(&self, channel: Channel, x: f64) -> f64 {
        self.channels.get(&channel).map_or(0.0, |v| {
            v.iter()
                .enumerate()
                .map(|(i, c)| c.to_f64().unwrap_or(f64::NAN) * x.powi(i as i32 + 1))
                .sum()
        })
    }

    pub fn to_json(&self) -> Value {
        let channels: serde_json::Map<String, Value> = self
            .channels
            .iter()
            .map(|(ch, v)| {
                let list: Vec<Value> = v
                    .iter()
                    .enumerate()
                    .map(|(i, c)| {
                        json!({
                            "order": i + 1,
                            "num": c.numer().to_string(),
                            "den": c.denom().to_string(),
                        })
                    })
                    .collect();
                (ch.name().to_string(), Value::Array(list))
            })
            .collect();
        json!({
            "regime": self.regime.to_string(),
            "variant": self.variant.to_string(),
            "target": self.target.name(),
            "variable": self.variable(),
            "channels": channels,
        })
    }
}

/// Channel vector of a boundary geometry.
fn renyi_channels(variant: Variant) -> [Channel; 4] {
    match variant {
        Variant::Isotropic2d => [Channel::L, Channel::K, Channel::N, Channel::Const],
        Variant::Quasi1d => [Channel::LPrime, Channel::HPrime, Channel::N, Channel::Const],
    }
}

fn channel_value(g: &BoundaryGeometry, c: Channel) -> i64 {
    (match c {
        Channel::L => g.length,
        Channel::K => g.corners,
        Channel::N => g.loop_count,
        Channel::LPrime => g.horizontal_length,
        Channel::HPrime => g.horizontal_sections,
        Channel::Const => 1,
    }) as i64
}

fn flow_for(regime: Regime, variant: Variant, order: usize) -> Result<FlowExpansion> {
    let letters: Vec<i8> = match (regime, variant) {
        (Regime::LargeField, Variant::Isotropic2d) => vec![-4, -2, 0, 2, 4],
        _ => vec![-2, 0, 2],
    };
    flow_expand(&letters, order)
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::InvalidConfig(format!(
            "order {order} exceeds {MAX_ORDER}"
        )));
    }
    Ok(())
}

/// Evaluates ln 2·(S₂ − S₂ at the unperturbed point) on individual geometries.
pub struct RenyiSeriesEngine<'a> {
    regime: Regime,
    variant: Variant,
    order: usize,
    engine: ClusterEngine<'a>,
}

impl<'a> RenyiSeriesEngine<'a> {
    pub fn new(regime: Regime, variant: Variant, flow: &'a FlowExpansion, order: usize) -> Self {
        let observable = match regime {
            Regime::SmallField => ClusterObservable::SmallRenyi,
            Regime::LargeField => ClusterObservable::LargeRenyi,
        };
        Self {
            regime,
            variant,
            order,
            engine: ClusterEngine::new(observable, flow, order),
        }
    }

    /// Series in the raw parameter (λ or μ = 1/λ) for one geometry.
    pub fn geometry(&mut self, g: &BoundaryGeometry) -> Result<(PowerSeries, ClusterStats)> {
        let gens = build_generators(self.regime, self.variant, g.lattice_n, self.order)?;
        let labels = self.labels(&gens, g);
        let seeds: Vec<bool> = gens
            .terms
            .iter()
            .map(|t| t.iter().any(|&s| labels[s] > 0))
            .collect();
        let (f, stats) = self.engine.expand(&gens, |t| seeds[t], |s| labels[s]);
        let target = f.scaled(&-BigRational::from_integer(1.into()));
        if !target.is_even() {
            return Err(Error::Numerical(format!(
                "odd powers in boundary series: {target}"
            )));
        }
        Ok((target, stats))
    }

    fn labels(&self, gens: &Generators, g: &BoundaryGeometry) -> Vec<u8> {
        let mut labels = vec![0u8; gens.sites.len()];
        match self.regime {
            Regime::SmallField => {
                for (star, li) in g.star_loops() {
                    let s = gens.site_of(SiteLabel::Star(star)).expect("star site");
                    labels[s] = u8::try_from(li + 1).expect("fewer than 255 loops");
                }
            }
            Regime::LargeField => {
                for e in g.boundary_edges() {
                    if self.variant == Variant::Quasi1d && e.dir == EdgeDir::Vertical {
                        continue;
                    }
                    let s = gens.site_of(SiteLabel::Spin(e)).expect("spin site");
                    labels[s] = 1;
                }
            }
        }
        labels
    }
}

/// Exact channel decomposition of S₂^∂A over a family of geometries.
pub fn series_renyi(
    regime: Regime,
    variant: Variant,
    geometries: &[BoundaryGeometry],
    order: usize,
) -> Result<SeriesPolynomial> {
    check_order(order)?;
    let channels = renyi_channels(variant);
    if order < 2 {
        return Ok(empty(regime, variant, Target::Renyi, &channels));
    }
    let flow = flow_for(regime, variant, order)?;
    let mut engine = RenyiSeriesEngine::new(regime, variant, &flow, order);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    for g in geometries {
        rows.push(
            channels
                .iter()
                .map(|&c| channel_value(g, c))
                .collect::<Vec<_>>(),
        );
        values.push(engine.geometry(g)?.0);
    }
    let names: Vec<String> = geometries.iter().map(describe_geometry).collect();
    solve_channels(
        regime,
        variant,
        Target::Renyi,
        &channels,
        &rows,
        &values,
        &names,
    )
}

fn describe_geometry(g: &BoundaryGeometry) -> String {
    match g.case {
        Some(c) => format!("case{}(D={},d={})", c.m, c.extent, c.thickness),
        None => format!("L={},K={},n={}", g.length, g.corners, g.loop_count),
    }
}

fn empty(regime: Regime, variant: Variant, target: Target, ch: &[Channel]) -> SeriesPolynomial {
    SeriesPolynomial {
        regime,
        variant,
        target,
        channels: ch.iter().map(|&c| (c, Vec::new())).collect(),
    }
}

/// Solves rows·x = values for every even power, exactly.
fn solve_channels(
    regime: Regime,
    variant: Variant,
    target: Target,
    channels: &[Channel],
    rows: &[Vec<i64>],
    values: &[PowerSeries],
    names: &[String],
) -> Result<SeriesPolynomial> {
    let order = values.first().map_or(0, |v| v.order());
    let powers: Vec<usize> = (2..=order).step_by(2).collect();
    let cols = channels.len();
    // Augmented matrix [A | b_2 b_4 …].
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .zip(values)
        .map(|(r, v)| {
            r.iter()
                .map(|&x| BigRational::from_integer(BigInt::from(x)))
                .chain(powers.iter().map(|&p| v.coeff(p).clone()))
                .collect()
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if pivots.len() < cols {
        return Err(Error::InvalidConfig(format!(
            "geometry family has rank {} < {cols} for channels {:?}: {}",
            pivots.len(),
            channels,
            names.join(", ")
        )));
    }
    if m[r..]
        .iter()
        .any(|row| row[cols..].iter().any(|x| !x.is_zero()))
    {
        return Err(Error::NonzeroResidual {
            geometries: names.join(", "),
        });
    }
    let mut out = empty(regime, variant, target, channels);
    for (row, &c) in pivots.iter().enumerate() {
        out.channels.insert(channels[c], m[row][cols..].to_vec());
    }
    Ok(out)
}

/// Corner separation used by the default families.
fn separation(order: usize) -> usize {
    (order + 1).max(3)
}

/// Even lattice size leaving `2·order + 4` stars of margin around a shape of
/// the given extent.
pub fn family_lattice(extent: usize, order: usize) -> usize {
    let n = (extent + 2 * order + 4).max(4 * order).max(4);
    n + n % 2
}

/// Rectangles, annulus, horseshoe and two strips with corners at least
/// `order + 1` apart; five geometries for four channels, so the solve is
/// over-determined.
pub fn renyi_family(order: usize) -> Result<Vec<BoundaryGeometry>> {
    renyi_family_on(order, family_lattice(3 * separation(order), order))
}

/// [`renyi_family`] on an explicit lattice size, at least the default one.
pub fn renyi_family_on(order: usize, n: usize) -> Result<Vec<BoundaryGeometry>> {
    let s = separation(order);
    let big = 3 * s;
    let need = family_lattice(big, order);
    if n < need {
        return Err(Error::LatticeTooSmall { n, order, need });
    }
    let origin = Star::new(0, 0);
    Ok(vec![
        BoundaryGeometry::rectangle(s, s, origin, n)?,
        BoundaryGeometry::rectangle(s, s + 1, origin, n)?,
        build_partition_at(PartitionCase::new(1, big, s)?, n, origin)?,
        build_partition_at(PartitionCase::new(2, big, s)?, n, origin)?,
        build_partition_at(PartitionCase::new(4, big, s)?, n, origin)?,
    ])
}

/// Star regions for the Wilson series: squares, an L-shape and a rectangle in
/// 2D; horizontal segments (the reduced loop W₀ of one chain) in quasi-1D.
pub fn wilson_family(variant: Variant, order: usize) -> Result<Vec<StarRegion>> {
    wilson_family_on(
        variant,
        order,
        family_lattice(2 * separation(order) + 2, order),
    )
}

/// [`wilson_family`] on an explicit lattice size, at least the default one.
pub fn wilson_family_on(variant: Variant, order: usize, n: usize) -> Result<Vec<StarRegion>> {
    let s = separation(order);
    let need = family_lattice(2 * s + 2, order);
    if n < need {
        return Err(Error::LatticeTooSmall { n, order, need });
    }
    let origin = Star::new(0, 0);
    match variant {
        Variant::Isotropic2d => {
            let l_shape = (0..2 * s)
                .flat_map(|r| (0..2 * s).map(move |c| (r, c)))
                .filter(|&(r, c)| r < s || c < s)
                .map(|(r, c)| Star::new(r, c))
                .collect();
            Ok(vec![
                StarRegion::square(s, origin, n)?,
                StarRegion::square(s + 1, origin, n)?,
                StarRegion::from_stars(l_shape, n)?,
                StarRegion::rectangle(s, s + 2, origin, n)?,
            ])
        }
        Variant::Quasi1d => (s..s + 3)
            .map(|d| StarRegion::rectangle(1, d, origin, n))
            .collect(),
    }
}

fn wilson_channels(variant: Variant) -> Vec<Channel> {
    match variant {
        Variant::Isotropic2d => vec![Channel::L, Channel::K, Channel::Const],
        Variant::Quasi1d => vec![Channel::L, Channel::Const],
    }
}

/// −ln W_R for one region in the small-field regime, as a series in λ.
pub fn wilson_region_series(
    engine: &mut ClusterEngine<'_>,
    variant: Variant,
    region: &StarRegion,
) -> Result<PowerSeries> {
    let gens = build_generators(Regime::SmallField, variant, region.lattice_n, engine.order)?;
    let inside: Vec<bool> = gens
        .sites
        .iter()
        .map(|s| matches!(s, SiteLabel::Star(st) if region.contains(*st)))
        .collect();
    let seeds: Vec<bool> = gens
        .terms
        .iter()
        .map(|t| inside[t[0]] != inside[t[1]])
        .collect();
    let (f, _) = engine.expand(&gens, |t| seeds[t], |s| inside[s] as u8);
    if !f.is_even() {
        return Err(Error::Numerical(format!(
            "odd powers in Wilson series: {f}"
        )));
    }
    Ok(f)
}

/// Exact channel decomposition of −ln W (2D squares) or −ln W₀ (quasi-1D
/// chain segments) in the small-field regime.
pub fn series_wilson(
    variant: Variant,
    regions: &[StarRegion],
    order: usize,
) -> Result<SeriesPolynomial> {
    check_order(order)?;
    let channels = wilson_channels(variant);
    if order < 2 {
        return Ok(empty(
            Regime::SmallField,
            variant,
            Target::WilsonLog,
            &channels,
        ));
    }
    let flow = flow_for(Regime::SmallField, variant, order)?;
    let mut engine = ClusterEngine::new(ClusterObservable::WilsonLog, &flow, order);
    let mut rows = Vec::new();
    let mut values = Vec::new();
    let mut names = Vec::new();
    for region in regions {
        rows.push(
            channels
                .iter()
                .map(|c| match c {
                    Channel::L => region.perimeter as i64,
                    Channel::K => region.corners as i64,
                    _ => 1,
                })
                .collect(),
        );
        values.push(wilson_region_series(&mut engine, variant, region)?);
        names.push(format!(
            "region(L={},K={})",
            region.perimeter, region.corners
        ));
    }
    solve_channels(
        Regime::SmallField,
        variant,
        Target::WilsonLog,
        &channels,
        &rows,
        &values,
        &names,
    )
}

/// First non-vanishing order of the Wilson loop deep in the large-field phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LeadingOrder {
    /// Order in μ = 1/λ at which the loop first becomes non-zero.
    pub order: usize,
    /// W ∝ λ^exponent.
    pub exponent: i64,
    /// True for exp(−β D²) scaling of W_R.
    pub area_law: bool,
}

/// Every star inside a D×D region has to be flipped, and each order of the
/// star perturbation flips two of them (2D), or each chain segment of length
/// D needs D/2 bond flips (quasi-1D, on W₀).
pub fn wilson_leading_order_large_field(extent: usize, variant: Variant) -> LeadingOrder {
    let (stars, exponent) = match variant {
        Variant::Isotropic2d => (extent * extent, -((extent * extent) as i64)),
        Variant::Quasi1d => (extent, -(extent as i64)),
    };
    LeadingOrder {
        order: stars.div_ceil(2),
        exponent,
        area_law: extent > 0,
    }
}

/// The three default series of the small-field regime plus the large-field
/// Rényi series, for one variant.
pub fn default_series(variant: Variant, order: usize) -> Result<Vec<SeriesPolynomial>> {
    let fam = renyi_family(order)?;
    let mut out = vec![
        series_renyi(Regime::SmallField, variant, &fam, order)?,
        series_wilson(variant, &wilson_family(variant, order)?, order)?,
        series_renyi(Regime::LargeField, variant, &fam, order)?,
    ];
    out.sort_by_key(|s| (s.regime == Regime::LargeField, s.target == Target::Renyi));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcut::model::ratio;

    #[test]
    fn order_zero_is_empty() {
        let s = series_renyi(Regime::SmallField, Variant::Isotropic2d, &[], 0).unwrap();
        assert!(s.channels.values().all(|v| v.is_empty()));
        assert_eq!(s.terms(), 0);
    }

    #[test]
    fn leading_order_large_field() {
        let l = wilson_leading_order_large_field(2, Variant::Isotropic2d);
        assert_eq!((l.order, l.exponent), (2, -4));
        let l = wilson_leading_order_large_field(4, Variant::Quasi1d);
        assert_eq!((l.order, l.exponent), (2, -4));
        let l = wilson_leading_order_large_field(0, Variant::Isotropic2d);
        assert_eq!((l.order, l.exponent, l.area_law), (0, 0, false));
    }

    #[test]
    fn quasi1d_small_field_order_two() {
        let s = series_renyi(
            Regime::SmallField,
            Variant::Quasi1d,
            &renyi_family(2).unwrap(),
            2,
        )
        .unwrap();
        assert_eq!(s.coefficient(Channel::LPrime, 1), ratio(-1, 4));
        assert_eq!(s.coefficient(Channel::N, 1), ratio(0, 1));
    }
}
