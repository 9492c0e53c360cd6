//! Uncoupled joint-decoder density evolution for the punctured ensemble,
//! plus the fixed-point driver and symmetric-channel threshold bisection.
//!
//! One DE step updates each user's variable-to-check density as
//!
//! a' = [gamma f(L(rho(b))) + (1 - gamma) a_ch1] conv lambda(rho(a))
//!
//! where gamma is the puncture fraction, f the correlation-node map, L the
//! full-node-degree polynomial, and rho/lambda the edge-perspective check and
//! variable polynomials; b' is the mirror image with the users swapped. On
//! erasure-model BEC runs every quantity stays an [`LDensity::ErasureMix`],
//! so the whole recursion collapses to exact scalar arithmetic.

use crate::densities::{ChannelFamily, ChannelSpec, Grid, LDensity};
use crate::ensembles::DegreeDistribution;
use crate::sources::{correlation_f, SourceModel};
use crate::Error;

/// The pair of user densities at one DE iteration.
#[derive(Debug, Clone)]
pub struct JointDEState {
    /// User 1 variable-to-check density.
    pub a: LDensity,
    /// User 2 variable-to-check density.
    pub b: LDensity,
    /// Iterations applied so far.
    pub iteration: usize,
}

impl JointDEState {
    /// The all-ignorance starting state (both users at delta_0).
    pub fn ignorance() -> Self {
        Self {
            a: LDensity::delta_zero(),
            b: LDensity::delta_zero(),
            iteration: 0,
        }
    }

    /// Worse of the two users' error probabilities.
    pub fn worst_error_prob(&self) -> f64 {
        self.a.error_prob().max(self.b.error_prob())
    }
}

/// Iteration budget and stopping thresholds for DE drivers.
#[derive(Debug, Clone, Copy)]
pub struct DESettings {
    /// Hard iteration cap.
    pub max_iterations: usize,
    /// Error probability below which a run counts as converged.
    pub success_error_prob: f64,
    /// Declare a stall when successive error probabilities change less than
    /// this while still above the success bar.
    pub stall_delta: f64,
}

impl Default for DESettings {
    fn default() -> Self {
        Self {
            max_iterations: 20000,
            success_error_prob: 1e-10,
            stall_delta: 1e-12,
        }
    }
}

/// Outcome of a DE run: the convergence flag, the final state, and how many
/// iterations were spent.
#[derive(Debug, Clone)]
pub struct DERun {
    /// Whether the error probability dropped below the success bar.
    pub converged: bool,
    /// State at termination.
    pub state: JointDEState,
    /// Iterations executed.
    pub iterations: usize,
}

/// One flooding DE step of the punctured joint system.
///
/// Fails with `NotPuncturable` when the ensemble has no puncturing (the
/// bracketed mixture needs gamma in (0,1)).
pub fn de_step(
    grid: &Grid,
    state: &JointDEState,
    ch1: ChannelSpec,
    ch2: ChannelSpec,
    m: &SourceModel,
    dd: &DegreeDistribution,
) -> Result<JointDEState, Error> {
    let gamma = dd.puncture_fraction()?;
    let a_ch1 = grid.channel_density(ch1);
    let a_ch2 = grid.channel_density(ch2);
    let rho_a = grid.edge_poly_chk(dd, &state.a);
    let rho_b = grid.edge_poly_chk(dd, &state.b);
    let f_from_b = correlation_f(grid, m, &grid.node_poly_full(dd, &rho_b));
    let f_from_a = correlation_f(grid, m, &grid.node_poly_full(dd, &rho_a));
    // the affine mixture is formed first, then the outer conv, exactly as
    // the recursion brackets it
    let mix_a = grid.mix(&[(gamma, &f_from_b), (1.0 - gamma, &a_ch1)]);
    let mix_b = grid.mix(&[(gamma, &f_from_a), (1.0 - gamma, &a_ch2)]);
    let a = grid.var_conv(&mix_a, &grid.edge_poly_var(dd, &rho_a));
    let b = grid.var_conv(&mix_b, &grid.edge_poly_var(dd, &rho_b));
    Ok(JointDEState {
        a,
        b,
        iteration: state.iteration + 1,
    })
}

/// Run DE from the all-ignorance state until success, stall, or the
/// iteration budget. Failure to converge is a result, not an error.
pub fn run_de(
    grid: &Grid,
    ch1: ChannelSpec,
    ch2: ChannelSpec,
    m: &SourceModel,
    dd: &DegreeDistribution,
    settings: &DESettings,
) -> Result<DERun, Error> {
    let mut state = JointDEState::ignorance();
    let mut prev_pe = state.worst_error_prob();
    for iter in 1..=settings.max_iterations {
        state = de_step(grid, &state, ch1, ch2, m, dd)?;
        let pe = state.worst_error_prob();
        if pe < settings.success_error_prob {
            return Ok(DERun {
                converged: true,
                state,
                iterations: iter,
            });
        }
        if crate::math::abs(pe - prev_pe) < settings.stall_delta {
            return Ok(DERun {
                converged: false,
                state,
                iterations: iter,
            });
        }
        prev_pe = pe;
    }
    let iterations = state.iteration;
    Ok(DERun {
        converged: false,
        state,
        iterations,
    })
}

/// Convergence probe on the symmetric line for one channel parameter. For
/// the BEC the parameter is the erasure probability itself; for BMS families
/// it is the channel entropy (mapped to the family parameter internally).
pub fn symmetric_converges(
    grid: &Grid,
    family: ChannelFamily,
    param: f64,
    m: &SourceModel,
    dd: &DegreeDistribution,
    settings: &DESettings,
) -> Result<bool, Error> {
    let spec = match family {
        ChannelFamily::Bec => ChannelSpec::new(family, param)?,
        ChannelFamily::Bsc | ChannelFamily::Bawgnc => grid.channel_from_entropy(family, param)?,
    };
    Ok(run_de(grid, spec, spec, m, dd, settings)?.converged)
}

/// Generic boolean bisection over a channel parameter: assumes convergence
/// is monotone (true below, false above), requires the bracket endpoints to
/// differ in outcome, and returns the bracket midpoint once the width drops
/// under `tol`.
pub(crate) fn bisect_threshold(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    mut probe: impl FnMut(f64) -> Result<bool, Error>,
) -> Result<f64, Error> {
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::invalid_parameter("bad bracket or tolerance"));
    }
    if !probe(lo)? || probe(hi)? {
        return Err(Error::NoThresholdInRange);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if probe(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Symmetric-channel BP threshold by bisection over the bracket.
///
/// The returned value is an erasure probability for the BEC and a channel
/// entropy for BMS families. Errors with "no threshold in range" when both
/// bracket endpoints behave the same.
pub fn bp_threshold_symmetric(
    grid: &Grid,
    family: ChannelFamily,
    m: &SourceModel,
    dd: &DegreeDistribution,
    settings: &DESettings,
    tol: f64,
    bracket: (f64, f64),
) -> Result<f64, Error> {
    bisect_threshold(bracket.0, bracket.1, tol, |param| {
        symmetric_converges(grid, family, param, m, dd, settings)
    })
}
