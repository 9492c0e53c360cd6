//! EBP (G)EXIT curves and area-theorem MAP bounds for the joint decoder.
//!
//! On the BEC the extended BP EXIT curve has a closed parametric form
//! ([`ebp_exit_bec`]); on general BMS channels the curve is traced
//! numerically by an entropy-matching continuation ([`ebp_gexit_bms`]) that
//! follows the stable *and* unstable fixed-point branches. Either curve feeds
//! [`map_threshold_area`], which integrates h dε backward from the (1,1) end
//! until the area-theorem budget γ·H(U₁,U₂)/(2(1−γ)) is spent; the channel
//! parameter where that happens is the MAP-threshold upper bound.

use alloc::vec::Vec;

use crate::densities::{ChannelFamily, Grid, LDensity};
use crate::ensembles::DegreeDistribution;
use crate::sources::{correlation_f, source_entropies, CorrelationKind, SourceModel};
use crate::Error;

/// One point of an EBP EXIT or GEXIT curve.
///
/// `x` is the curve's own parametrization: the fixed-point erasure value on
/// the BEC, the target message entropy on BMS channels. `h_channel` is the
/// channel parameter at which that fixed point lives (erasure probability,
/// or channel entropy 𝗁), and `h_exit` is the EXIT/GEXIT ordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    /// Parametrization value (BEC fixed point x, or BMS entropy target).
    pub x: f64,
    /// Channel parameter (ε on the BEC, channel entropy 𝗁 on BMS).
    pub h_channel: f64,
    /// EXIT or GEXIT ordinate.
    pub h_exit: f64,
}

/// The analytic (1,1) endpoint every EBP curve approaches as the channel
/// becomes useless. The BEC closed form reaches it exactly at x = 1; the BMS
/// continuation starts below it, so prepend this before area integration.
pub fn unit_anchor() -> CurvePoint {
    CurvePoint {
        x: 1.0,
        h_channel: 1.0,
        h_exit: 1.0,
    }
}

/// The area-theorem right-hand side γ·H(U₁,U₂)/(2(1−γ)).
///
/// For the punctured (4,6) ensemble (γ = 1/3) with erasure correlation
/// p = 0.5 this is (1/3 · 1.5)/(2 · 2/3) = 0.375; with BSC correlation
/// p = 0.1 it is (1 + h2(0.1))/4 ≈ 0.367249.
pub fn area_target(dd: &DegreeDistribution, m: &SourceModel) -> Result<f64, Error> {
    let gamma = dd.puncture_fraction()?;
    let (_, joint) = source_entropies(m);
    Ok(gamma * joint / (2.0 * (1.0 - gamma)))
}

/// Closed-form EBP EXIT curve on the BEC with erasure correlation.
///
/// Samples x on the uniform grid k/samples for k = 1..=samples (x = 0 is
/// excluded: λ(0) = 0 there) and evaluates
///
/// ```text
/// h(x) = L(1 − ρ(1−x))
/// ε(x) = [ x/λ(1 − ρ(1−x)) − γ·((1−p) + p·h(x)) ] / (1−γ)
/// ```
///
/// Points with ε outside [0,1] are retained — EBP curves legitimately leave
/// the unit box. The last sample (x = 1) lands exactly on (1,1).
pub fn ebp_exit_bec(
    dd: &DegreeDistribution,
    m: &SourceModel,
    samples: usize,
) -> Result<Vec<CurvePoint>, Error> {
    if m.kind != CorrelationKind::Erasure {
        return Err(Error::invalid_parameter(
            "ebp_exit_bec needs the erasure correlation model",
        ));
    }
    if samples < 2 {
        return Err(Error::invalid_parameter("need at least 2 curve samples"));
    }
    let gamma = dd.puncture_fraction()?;
    let p = m.p;
    let mut points = Vec::with_capacity(samples);
    for k in 1..=samples {
        let x = k as f64 / samples as f64;
        let y = 1.0 - dd.eval_rho(1.0 - x);
        let h = dd.eval_node(y);
        let eps = (x / dd.eval_lambda(y) - gamma * ((1.0 - p) + p * h)) / (1.0 - gamma);
        points.push(CurvePoint {
            x,
            h_channel: eps,
            h_exit: h,
        });
    }
    Ok(points)
}

/// The curve point with the smallest channel parameter — the BP threshold
/// knee of an EBP curve. Returns None on an empty curve.
pub fn bp_knee(points: &[CurvePoint]) -> Option<CurvePoint> {
    points
        .iter()
        .copied()
        .reduce(|best, p| if p.h_channel < best.h_channel { p } else { best })
}

/// MAP-threshold upper bound from an EBP curve via the area theorem.
///
/// Integrates h_exit·d(h_channel) by signed trapezoids, walking from the
/// curve's (1,1) end (recognized as the end with the larger ordinate) toward
/// the other end, and returns the channel parameter at which the accumulated
/// area first equals γ·H(U₁,U₂)/(2(1−γ)) (linear interpolation inside the
/// crossing segment). The curve must be ordered along its parametrization;
/// non-monotone stretches (unstable branches) contribute negative increments,
/// which is what makes the construction a Maxwell equal-areas rule.
///
/// Fails with [`Error::CurveTruncated`] when the curve ends before the
/// budget is reached.
pub fn map_threshold_area(
    points: &[CurvePoint],
    m: &SourceModel,
    dd: &DegreeDistribution,
) -> Result<f64, Error> {
    let area = area_target(dd, m)?;
    integrate_to_area(points, area)
}

/// Area walk shared by [`map_threshold_area`] and the self-consistency
/// checks: find the channel parameter where the signed area from the (1,1)
/// end first reaches `area`.
pub fn integrate_to_area(points: &[CurvePoint], area: f64) -> Result<f64, Error> {
    if !(area > 0.0) {
        return Err(Error::invalid_parameter("area budget must be positive"));
    }
    if points.len() < 2 {
        return Err(Error::CurveTruncated);
    }
    let n = points.len();
    let forward = points[0].h_exit >= points[n - 1].h_exit;
    let at = |step: usize| {
        if forward {
            points[step]
        } else {
            points[n - 1 - step]
        }
    };
    let mut acc = 0.0;
    let mut prev = at(0);
    for step in 1..n {
        let cur = at(step);
        let ds = 0.5 * (cur.h_exit + prev.h_exit) * (prev.h_channel - cur.h_channel);
        if ds > 0.0 && acc + ds >= area {
            let frac = (area - acc) / ds;
            return Ok(prev.h_channel + frac * (cur.h_channel - prev.h_channel));
        }
        acc += ds;
        prev = cur;
    }
    Err(Error::CurveTruncated)
}

/// Signed area accumulated between the (1,1) end and the given channel
/// parameter, for self-consistency checks against [`area_target`].
pub fn area_up_to(points: &[CurvePoint], h_channel_stop: f64) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let forward = points[0].h_exit >= points[n - 1].h_exit;
    let at = |step: usize| {
        if forward {
            points[step]
        } else {
            points[n - 1 - step]
        }
    };
    let mut acc = 0.0;
    let mut prev = at(0);
    for step in 1..n {
        let cur = at(step);
        // Stop inside the first descending segment that brackets the target.
        if cur.h_channel <= h_channel_stop && h_channel_stop <= prev.h_channel {
            let width = prev.h_channel - cur.h_channel;
            if width > 0.0 {
                let frac = (prev.h_channel - h_channel_stop) / width;
                let h_mid = prev.h_exit + frac * (cur.h_exit - prev.h_exit);
                acc += 0.5 * (h_mid + prev.h_exit) * (prev.h_channel - h_channel_stop);
                return acc;
            }
        }
        acc += 0.5 * (cur.h_exit + prev.h_exit) * (prev.h_channel - cur.h_channel);
        prev = cur;
    }
    acc
}

/// Knobs for the BMS entropy-matching continuation.
#[derive(Debug, Clone, Copy)]
pub struct GexitSettings {
    /// Outer fixed-point iteration cap per target.
    pub max_outer: usize,
    /// Outer stop: L1 distance between successive densities.
    pub fixed_point_l1: f64,
    /// Lower end of the channel-entropy search bracket.
    pub h_min: f64,
    /// Upper end of the channel-entropy search bracket.
    pub h_max: f64,
    /// Inner bisection width on the channel entropy.
    pub h_tol: f64,
    /// Seed each target from the previous target's fixed point instead of
    /// from a fresh BAWGNC density. Off by default: targets are then
    /// independent (parallelizable), and the entropy-pinned map reaches the
    /// same fixed points either way.
    pub warm_start: bool,
}

impl Default for GexitSettings {
    fn default() -> Self {
        GexitSettings {
            max_outer: 400,
            fixed_point_l1: 1e-6,
            h_min: 1e-4,
            h_max: 1.0 - 1e-6,
            h_tol: 1e-7,
            warm_start: false,
        }
    }
}

/// Why a continuation target produced no curve point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GexitFailure {
    /// The requested entropy was outside [F(h_min), F(h_max)] for the
    /// current density, so no channel entropy can pin it.
    BracketOutOfRange,
    /// The entropy-pinned map did not reach a fixed point in max_outer steps.
    NoFixedPoint,
}

/// A traced GEXIT curve plus the targets that could not be pinned.
#[derive(Debug, Clone)]
pub struct GexitCurve {
    /// Converged points, in the order the targets were given.
    pub points: Vec<CurvePoint>,
    /// Targets that failed, with the reason; callers should surface these
    /// as warnings.
    pub failed: Vec<(f64, GexitFailure)>,
}

/// The canonical target-entropy ladder 0.98, 0.96, …, 0.32 used for the
/// punctured-(4,6) BAWGNC curve; it covers the upper branch, the knee near
/// 𝗁 ≈ 0.372, and the start of the unstable branch.
pub fn default_bms_targets() -> Vec<f64> {
    (0..34).map(|k| (98 - 2 * k) as f64 / 100.0).collect()
}

/// EBP GEXIT curve on the BAWGNC by entropy-matching continuation.
///
/// For each target message entropy t, iterate the symmetric joint-DE map
/// with the channel entropy 𝗁 re-solved by bisection at every step so the
/// step output has entropy exactly t:
///
/// ```text
/// F(𝗁) = H( [γ·f(L(ρ(a))) + (1−γ)·c_𝗁] ⊛ λ(ρ(a)) ),   solve F(𝗁) = t,
/// ```
///
/// then replace a by that step output, until successive densities agree to
/// `fixed_point_l1`. Pinning the entropy keeps the iteration attached to a
/// fixed point even on the unstable branch, which an ordinary DE sweep can
/// never reach. At convergence the point (t, 𝗁, G(c_𝗁, L(ρ(a)))) is emitted,
/// with G the BAWGNC GEXIT functional.
///
/// Targets are independent (each seeds from the BAWGNC density of entropy t
/// unless `warm_start` is set), so callers may partition the target list
/// across workers and concatenate the results.
pub fn ebp_gexit_bms(
    grid: &Grid,
    dd: &DegreeDistribution,
    m: &SourceModel,
    targets: &[f64],
    settings: &GexitSettings,
) -> Result<GexitCurve, Error> {
    let gamma = dd.puncture_fraction()?;
    if !(settings.h_min > 0.0 && settings.h_max < 1.0 && settings.h_min < settings.h_max) {
        return Err(Error::invalid_parameter(
            "entropy bracket must satisfy 0 < h_min < h_max < 1",
        ));
    }
    let mut points = Vec::new();
    let mut failed = Vec::new();
    let mut carried: Option<LDensity> = None;
    for &t in targets {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::invalid_parameter(
                "target entropies must lie in (0,1)",
            ));
        }
        let mut a = match (settings.warm_start, &carried) {
            (true, Some(d)) => d.clone(),
            _ => {
                let seed = grid.channel_from_entropy(ChannelFamily::Bawgnc, t)?;
                grid.channel_density(seed)
            }
        };
        let mut outcome = Err(GexitFailure::NoFixedPoint);
        for _ in 0..settings.max_outer {
            let rho_a = grid.edge_poly_chk(dd, &a);
            let lam = grid.edge_poly_var(dd, &rho_a);
            let lfull = grid.var_conv(&lam, &rho_a);
            let f = correlation_f(grid, m, &lfull);
            let step = |h: f64| -> Result<LDensity, Error> {
                let spec = grid.channel_from_entropy(ChannelFamily::Bawgnc, h)?;
                let ch = grid.channel_density(spec);
                let mixed = grid.mix(&[(gamma, &f), (1.0 - gamma, &ch)]);
                Ok(grid.var_conv(&mixed, &lam))
            };
            let mut lo = settings.h_min;
            let mut hi = settings.h_max;
            let e_lo = step(lo)?.entropy();
            let e_hi = step(hi)?.entropy();
            if !(e_lo <= t && t <= e_hi) {
                outcome = Err(GexitFailure::BracketOutOfRange);
                break;
            }
            while hi - lo > settings.h_tol {
                let mid = 0.5 * (lo + hi);
                if step(mid)?.entropy() < t {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let h_star = 0.5 * (lo + hi);
            let nxt = step(h_star)?;
            if grid.l1_distance(&nxt, &a) < settings.fixed_point_l1 {
                let kernel = grid.gexit_kernel_bawgnc(h_star)?;
                let g = grid.gexit_functional(&kernel, &lfull);
                points.push(CurvePoint {
                    x: t,
                    h_channel: h_star,
                    h_exit: g,
                });
                outcome = Ok(nxt);
                break;
            }
            a = nxt;
        }
        match outcome {
            Ok(fixed) => carried = Some(fixed),
            Err(reason) => {
                failed.push((t, reason));
                carried = None;
            }
        }
    }
    Ok(GexitCurve { points, failed })
}
