//! Slepian-Wolf regions and DE-computed achievable-channel-parameter
//! regions (ACPR) on a 2-D lattice of per-user channel parameters, with
//! staircase boundary extraction and a monotonicity audit.
//!
//! Both supported parameterizations — erasure probability on the BEC,
//! channel entropy on BMS families — measure noisiness with capacity
//! C(x) = 1 − x, so the analytic Slepian-Wolf test is one formula. The MAC
//! sweeps reuse the same lattice with the opposite orientation (there the
//! parameter is a fading gain: larger is better).

use alloc::vec;
use alloc::vec::Vec;

use crate::densities::ChannelFamily;
use crate::sources::{source_entropies, SourceModel};
use crate::Error;

/// Slack for the closed-region inequality tests: keeps lattice points that
/// land exactly on a constraint (0.75, the 0.625 symmetric point, ...)
/// inside despite decimal-step rounding.
const EDGE_TOL: f64 = 1e-9;

/// One axis of the parameter lattice: `start + k*delta` for
/// `k = 0..count`, never exceeding `stop`. A `delta` wider than the range
/// degenerates to the single point `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridAxis {
    /// First lattice value.
    pub start: f64,
    /// Inclusive upper limit (hit only when the spacing divides the range).
    pub stop: f64,
    /// Lattice spacing.
    pub delta: f64,
}

impl GridAxis {
    /// Validated axis; `delta` must be positive and the range non-empty.
    pub fn new(start: f64, stop: f64, delta: f64) -> Result<Self, Error> {
        if !(start.is_finite() && stop.is_finite() && delta.is_finite()) {
            return Err(Error::invalid_parameter("grid axis must be finite"));
        }
        if !(delta > 0.0) {
            return Err(Error::invalid_parameter("grid spacing must be positive"));
        }
        if stop < start {
            return Err(Error::invalid_parameter("grid axis runs backwards"));
        }
        Ok(GridAxis { start, stop, delta })
    }

    /// Number of lattice points.
    pub fn len(&self) -> usize {
        (((self.stop - self.start) / self.delta + EDGE_TOL) as usize) + 1
    }

    /// Whether the axis is empty (it never is; kept for clippy's `len`
    /// convention).
    pub fn is_empty(&self) -> bool {
        false
    }

    /// The lattice values.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| self.start + k as f64 * self.delta)
            .collect()
    }
}

/// Which direction of a channel parameter is "better" (more decodable).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// Noise-like parameters: erasure probability, channel entropy.
    SmallerBetter,
    /// Gain-like parameters: MAC fading coefficients.
    LargerBetter,
}

/// How a sweep walks each row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowStrategy {
    /// Bisect over the row assuming the achievable set is a prefix in the
    /// better-to-worse order — O(log n) probes per row. The cross-row audit
    /// guards the assumption.
    Bisect,
    /// Probe every lattice point — O(n) but assumption-free; the audit then
    /// also checks within-row monotonicity.
    Scan,
}

/// A computed region on the lattice.
#[derive(Debug, Clone)]
pub struct Region {
    /// First-user axis (rows).
    pub axis1: GridAxis,
    /// Second-user axis (columns).
    pub axis2: GridAxis,
    /// Row-major achievability, `axis1.len() * axis2.len()` entries.
    pub achievable: Vec<bool>,
    /// Ordered boundary: analytic vertices for [`sw_region`], one
    /// worst-achievable point per non-empty row for [`acpr_sweep`].
    pub boundary: Vec<(f64, f64)>,
    /// Staircase-audit failures as (row, column) lattice indices; empty for
    /// a clean monotone region. Reported, never repaired.
    pub violations: Vec<(usize, usize)>,
}

impl Region {
    /// Achievability at lattice indices (row, column).
    pub fn at(&self, i: usize, j: usize) -> bool {
        self.achievable[i * self.axis2.len() + j]
    }
}

/// Analytic Slepian-Wolf region for joint rate `R` per user: a lattice point
/// is achievable iff C(α₁) ≥ R·H(U₁|U₂), C(α₂) ≥ R·H(U₂|U₁), and
/// C(α₁) + C(α₂) ≥ R·H(U₁,U₂), with C(x) = 1 − x under the family's
/// noisiness parameterization (erasure probability for the BEC, channel
/// entropy for BMS families).
///
/// The boundary is emitted analytically — corner, kink, and symmetric-point
/// vertices exact, ordered by increasing α₂ — rather than read off the
/// lattice.
pub fn sw_region(
    m: &SourceModel,
    family: ChannelFamily,
    rate: f64,
    axis1: &GridAxis,
    axis2: &GridAxis,
) -> Result<Region, Error> {
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::invalid_parameter("rate must be positive"));
    }
    let range_error = match family {
        ChannelFamily::Bec => "erasure-probability axis must lie within [0,1]",
        ChannelFamily::Bsc | ChannelFamily::Bawgnc => {
            "channel-entropy axis must lie within [0,1]"
        }
    };
    for axis in [axis1, axis2] {
        if axis.start < -EDGE_TOL || axis.stop > 1.0 + EDGE_TOL {
            return Err(Error::invalid_parameter(range_error));
        }
    }
    let (h_cond, h_joint) = source_entropies(m);
    // Symmetric sources give symmetric conditionals; keep the general form.
    let h1_given_2 = h_cond;
    let h2_given_1 = h_cond;
    // Constraint lines in parameter space.
    let a1_max = 1.0 - rate * h1_given_2;
    let a2_max = 1.0 - rate * h2_given_1;
    let sum_max = 2.0 - rate * h_joint;

    let v1 = axis1.values();
    let v2 = axis2.values();
    let n2 = v2.len();
    let mut achievable = vec![false; v1.len() * n2];
    for (i, &a1) in v1.iter().enumerate() {
        for (j, &a2) in v2.iter().enumerate() {
            achievable[i * n2 + j] = a1 <= a1_max + EDGE_TOL
                && a2 <= a2_max + EDGE_TOL
                && a1 + a2 <= sum_max + EDGE_TOL;
        }
    }

    // Exact boundary polyline. The sum constraint is active when the corner
    // (a1_max, a2_max) violates it; the kinks sit where it meets the
    // single-user lines, and the symmetric point lies on it.
    let clamp01 = |x: f64| x.max(0.0).min(1.0);
    let mut boundary: Vec<(f64, f64)> = Vec::new();
    if a1_max >= 0.0 && a2_max >= 0.0 && sum_max >= 0.0 {
        if a1_max + a2_max <= sum_max {
            // Rectangle: the sum constraint never binds.
            boundary.push((clamp01(a1_max), 0.0));
            boundary.push((clamp01(a1_max), clamp01(a2_max)));
            boundary.push((0.0, clamp01(a2_max)));
        } else {
            let kink2 = sum_max - a1_max; // on the a1 = a1_max edge
            let kink1 = sum_max - a2_max; // on the a2 = a2_max edge
            let sym = sum_max / 2.0;
            boundary.push((clamp01(a1_max), 0.0));
            boundary.push((clamp01(a1_max), clamp01(kink2)));
            if sym < a1_max && sym < a2_max {
                boundary.push((sym, sym));
            }
            boundary.push((clamp01(kink1), clamp01(a2_max)));
            boundary.push((0.0, clamp01(a2_max)));
        }
        boundary.dedup_by(|a, b| a == b);
    }

    Ok(Region {
        axis1: *axis1,
        axis2: *axis2,
        achievable,
        boundary,
        violations: Vec::new(),
    })
}

/// Fill one row of a sweep. `probe` answers "is this second-axis value
/// achievable at the row's fixed first parameter"; the result is in lattice
/// order (not orientation order).
pub fn sweep_row(
    axis2: &GridAxis,
    orientation: Orientation,
    strategy: RowStrategy,
    mut probe: impl FnMut(f64) -> Result<bool, Error>,
) -> Result<Vec<bool>, Error> {
    let vals = axis2.values();
    let n = vals.len();
    // Index map so that oriented index 0 is the best value of the row.
    let orig = |k: usize| match orientation {
        Orientation::SmallerBetter => k,
        Orientation::LargerBetter => n - 1 - k,
    };
    let mut row = vec![false; n];
    match strategy {
        RowStrategy::Scan => {
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = probe(vals[k])?;
            }
        }
        RowStrategy::Bisect => {
            // Achievability is assumed to be a prefix in oriented order.
            if !probe(vals[orig(0)])? {
                return Ok(row);
            }
            let cut = if n == 1 || probe(vals[orig(n - 1)])? {
                n - 1
            } else {
                let mut lo = 0; // achievable
                let mut hi = n - 1; // not
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if probe(vals[orig(mid)])? {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            };
            for k in 0..=cut {
                row[orig(k)] = true;
            }
        }
    }
    Ok(row)
}

/// DE-backed region sweep. Rows iterate the first axis; each row is filled
/// by [`sweep_row`] with `probe(α₁, α₂)`. The boundary records each
/// non-empty row's worst achievable second parameter, and the staircase
/// audit cross-checks rows pairwise: anything achievable in a row must stay
/// achievable in the componentwise-better neighboring row. Violations are
/// reported in [`Region::violations`], never repaired.
pub fn acpr_sweep(
    axis1: &GridAxis,
    axis2: &GridAxis,
    orientation: Orientation,
    strategy: RowStrategy,
    mut probe: impl FnMut(f64, f64) -> Result<bool, Error>,
) -> Result<Region, Error> {
    let v1 = axis1.values();
    let rows: Vec<Vec<bool>> = v1
        .iter()
        .map(|&a1| sweep_row(axis2, orientation, strategy, |a2| probe(a1, a2)))
        .collect::<Result<_, _>>()?;
    assemble_region(axis1, axis2, orientation, rows)
}

/// Build a [`Region`] from per-row achievability (rows in `axis1` lattice
/// order). Split out so callers that farm rows onto threads can reassemble
/// deterministically.
pub fn assemble_region(
    axis1: &GridAxis,
    axis2: &GridAxis,
    orientation: Orientation,
    rows: Vec<Vec<bool>>,
) -> Result<Region, Error> {
    let v1 = axis1.values();
    let v2 = axis2.values();
    let n2 = v2.len();
    if rows.len() != v1.len() || rows.iter().any(|r| r.len() != n2) {
        return Err(Error::invalid_parameter("row data does not match the axes"));
    }

    let mut boundary = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        // Worst achievable value of the row: the largest under
        // SmallerBetter, the smallest under LargerBetter.
        let worst = match orientation {
            Orientation::SmallerBetter => row.iter().rposition(|&a| a),
            Orientation::LargerBetter => row.iter().position(|&a| a),
        };
        if let Some(j) = worst {
            boundary.push((v1[i], v2[j]));
        }
    }

    let mut violations = Vec::new();
    // Within-row staircase: in oriented order nothing achievable may follow
    // something unachievable. Bisect rows satisfy this by construction;
    // scanned rows can break it.
    for (i, row) in rows.iter().enumerate() {
        let oriented: Vec<bool> = match orientation {
            Orientation::SmallerBetter => row.clone(),
            Orientation::LargerBetter => row.iter().rev().copied().collect(),
        };
        let mut seen_gap = false;
        for (k, &a) in oriented.iter().enumerate() {
            if !a {
                seen_gap = true;
            } else if seen_gap {
                let j = match orientation {
                    Orientation::SmallerBetter => k,
                    Orientation::LargerBetter => n2 - 1 - k,
                };
                violations.push((i, j));
                break;
            }
        }
    }
    // Cross-row: each point must stay achievable when the first parameter
    // improves by one lattice step.
    for i in 1..rows.len() {
        let (better, worse, worse_idx) = match orientation {
            Orientation::SmallerBetter => (&rows[i - 1], &rows[i], i),
            Orientation::LargerBetter => (&rows[i], &rows[i - 1], i - 1),
        };
        for j in 0..n2 {
            if worse[j] && !better[j] {
                violations.push((worse_idx, j));
                break;
            }
        }
    }

    Ok(Region {
        axis1: *axis1,
        axis2: *axis2,
        achievable: rows.into_iter().flatten().collect(),
        boundary,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{ChannelSpec, Grid};
    use crate::ensembles::DegreeDistribution;
    use crate::joint_de::{run_de, DESettings};

    fn axis01() -> GridAxis {
        GridAxis::new(0.0, 1.0, 0.1).unwrap()
    }

    #[test]
    fn axis_lattice_and_degenerate_cases() {
        let a = GridAxis::new(0.0, 1.0, 0.01).unwrap();
        assert_eq!(a.len(), 101);
        let v = a.values();
        assert!((v[100] - 1.0).abs() < 1e-9);
        assert!((v[27] - 0.27).abs() < 1e-12);
        // Spacing wider than the range: a single point.
        let single = GridAxis::new(0.3, 0.9, 5.0).unwrap();
        assert_eq!(single.values(), vec![0.3]);
        assert!(GridAxis::new(0.5, 0.4, 0.1).is_err());
        assert!(GridAxis::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn sw_erasure_half_rate_half() {
        let m = SourceModel::erasure(0.5).unwrap();
        let a = GridAxis::new(0.0, 1.0, 0.01).unwrap();
        let r = sw_region(&m, ChannelFamily::Bec, 0.5, &a, &a).unwrap();
        // Exact vertices: corners at 0.75, sum line through (0.625, 0.625).
        assert!(r.boundary.contains(&(0.75, 0.0)));
        assert!(r.boundary.contains(&(0.75, 0.5)));
        assert!(r.boundary.contains(&(0.625, 0.625)));
        assert!(r.boundary.contains(&(0.5, 0.75)));
        assert!(r.boundary.contains(&(0.0, 0.75)));
        // Lattice checks straddling each constraint.
        let idx = |x: f64| (x * 100.0).round() as usize;
        assert!(r.at(idx(0.75), idx(0.0)));
        assert!(!r.at(idx(0.76), idx(0.0)));
        assert!(r.at(idx(0.62), idx(0.62)));
        assert!(!r.at(idx(0.63), idx(0.63)));
        assert!(r.at(idx(0.75), idx(0.5)));
        assert!(!r.at(idx(0.75), idx(0.51)));
        assert!(r.violations.is_empty());
    }

    #[test]
    fn sw_erasure_rate_04798() {
        let m = SourceModel::erasure(0.5).unwrap();
        let a = GridAxis::new(0.0, 1.0, 0.01).unwrap();
        let r = sw_region(&m, ChannelFamily::Bec, 0.4798, &a, &a).unwrap();
        let corner: f64 = 1.0 - 0.4798 * 0.5;
        let sym: f64 = 1.0 - 0.4798 * 1.5 / 2.0;
        assert!((corner - 0.7601).abs() < 1e-12);
        assert!((sym - 0.64015).abs() < 1e-12);
        assert!(r
            .boundary
            .iter()
            .any(|&(x, y)| (x - corner).abs() < 1e-12 && y == 0.0));
        assert!(r
            .boundary
            .iter()
            .any(|&(x, y)| (x - sym).abs() < 1e-12 && (y - sym).abs() < 1e-12));
    }

    #[test]
    fn sw_bsc_symmetric_bound() {
        let m = SourceModel::bsc(0.1).unwrap();
        let a = GridAxis::new(0.0, 1.0, 0.02).unwrap();
        let r = sw_region(&m, ChannelFamily::Bawgnc, 0.5, &a, &a).unwrap();
        let sym = 1.0 - 0.5 * (1.0 + crate::h2(0.1)) / 2.0;
        assert!((sym - 0.6327511).abs() < 1e-7, "sym {sym}");
        assert!(r
            .boundary
            .iter()
            .any(|&(x, y)| (x - sym).abs() < 1e-12 && (y - sym).abs() < 1e-12));
    }

    #[test]
    fn bisect_agrees_with_scan_on_a_monotone_set() {
        let a = axis01();
        let probe = |a1: f64, a2: f64| Ok(a1 + a2 <= 0.9 + 1e-12);
        let scan = acpr_sweep(&a, &a, Orientation::SmallerBetter, RowStrategy::Scan, probe)
            .unwrap();
        let bis = acpr_sweep(&a, &a, Orientation::SmallerBetter, RowStrategy::Bisect, probe)
            .unwrap();
        assert_eq!(scan.achievable, bis.achievable);
        assert_eq!(scan.boundary, bis.boundary);
        assert!(scan.violations.is_empty() && bis.violations.is_empty());
        // Row a1 = 0.5: worst achievable a2 is 0.4.
        assert!(bis
            .boundary
            .iter()
            .any(|&(x, y)| (x - 0.5).abs() < 1e-12 && (y - 0.4).abs() < 1e-9));
    }

    #[test]
    fn larger_better_orientation_flips_the_staircase() {
        let a = axis01();
        let probe = |a1: f64, a2: f64| Ok(a1 + a2 >= 1.1 - 1e-12);
        let r = acpr_sweep(&a, &a, Orientation::LargerBetter, RowStrategy::Bisect, probe)
            .unwrap();
        assert!(r.violations.is_empty());
        // Row a1 = 0.5: achievable a2 starts at 0.6, so that is the
        // boundary (worst achievable) entry.
        assert!(r
            .boundary
            .iter()
            .any(|&(x, y)| (x - 0.5).abs() < 1e-12 && (y - 0.6).abs() < 1e-9));
        let idx = |x: f64| (x * 10.0).round() as usize;
        assert!(r.at(idx(0.5), idx(0.6)));
        assert!(!r.at(idx(0.5), idx(0.5)));
    }

    #[test]
    fn audit_reports_staircase_breaks() {
        let a = GridAxis::new(0.0, 0.4, 0.1).unwrap();
        // Rigged: row 0.2 reaches further than the better row 0.1.
        let probe = |a1: f64, a2: f64| {
            let cut = if (a1 - 0.2).abs() < 1e-9 { 0.3 } else { 0.1 };
            Ok(a2 <= cut + 1e-12)
        };
        let r = acpr_sweep(&a, &a, Orientation::SmallerBetter, RowStrategy::Bisect, probe)
            .unwrap();
        assert!(!r.violations.is_empty());
        assert!(r.violations.contains(&(2, 2)) || r.violations.contains(&(2, 3)));
        // Within-row break, only visible to a scan.
        let holes = |_a1: f64, a2: f64| Ok(a2 <= 0.05 || (a2 - 0.3).abs() < 1e-9);
        let r2 =
            acpr_sweep(&a, &a, Orientation::SmallerBetter, RowStrategy::Scan, holes).unwrap();
        assert!(r2.violations.iter().any(|&(_, j)| j == 3));
    }

    #[test]
    fn acpr_de_probe_matches_frozen_uncoupled_points() {
        // Scalar-exact BEC DE probes: the (4,6) punctured boundary passes
        // near (0.5, 0.27) and the symmetric threshold 0.3317.
        let g = Grid::new(8.0, 64).unwrap();
        let dd = DegreeDistribution::regular(4, 6).unwrap();
        let m = SourceModel::erasure(0.5).unwrap();
        let st = DESettings::default();
        let probe = |e1: f64, e2: f64| {
            let c1 = ChannelSpec::new(ChannelFamily::Bec, e1)?;
            let c2 = ChannelSpec::new(ChannelFamily::Bec, e2)?;
            Ok(run_de(&g, c1, c2, &m, &dd, &st)?.converged)
        };
        let col = GridAxis::new(0.0, 0.4, 0.01).unwrap();
        let row_a = sweep_row(&col, Orientation::SmallerBetter, RowStrategy::Bisect, |e2| {
            probe(0.5, e2)
        })
        .unwrap();
        let cut_a = row_a.iter().rposition(|&x| x).unwrap();
        assert_eq!(cut_a, 27, "frozen eps2*(0.5) = 0.2710");
        let row_b = sweep_row(&col, Orientation::SmallerBetter, RowStrategy::Bisect, |e2| {
            probe(0.33, e2)
        })
        .unwrap();
        let cut_b = row_b.iter().rposition(|&x| x).unwrap();
        assert_eq!(cut_b, 33, "boundary passes near (0.33, 0.33)");
    }

    #[test]
    fn acpr_is_inside_the_sw_region() {
        let g = Grid::new(8.0, 64).unwrap();
        let dd = DegreeDistribution::regular(4, 6).unwrap();
        let m = SourceModel::erasure(0.5).unwrap();
        let st = DESettings::default();
        let a = GridAxis::new(0.0, 0.8, 0.05).unwrap();
        let acpr = acpr_sweep(
            &a,
            &a,
            Orientation::SmallerBetter,
            RowStrategy::Bisect,
            |e1, e2| {
                let c1 = ChannelSpec::new(ChannelFamily::Bec, e1)?;
                let c2 = ChannelSpec::new(ChannelFamily::Bec, e2)?;
                Ok(run_de(&g, c1, c2, &m, &dd, &st)?.converged)
            },
        )
        .unwrap();
        let rate = dd.punctured_rate().unwrap();
        assert!((rate - 0.5).abs() < 1e-12);
        let sw = sw_region(&m, ChannelFamily::Bec, rate, &a, &a).unwrap();
        for i in 0..a.len() {
            for j in 0..a.len() {
                assert!(
                    !acpr.at(i, j) || sw.at(i, j),
                    "BP beat capacity at ({i}, {j})"
                );
            }
        }
        assert!(acpr.violations.is_empty());
    }
}
