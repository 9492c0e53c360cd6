//! 2-user Gaussian MAC joint DE under the random-coset assumption:
//! Y = h₁X₁ + h₂X₂ + Z with Z ∼ N(0,1) and X₁, X₂ ∈ {±1}.
//!
//! The function node turns the partner's aggregate message density into an
//! extrinsic channel-observation density by Monte Carlo: sample the partner
//! message m₂, the noise, and — because the receiver works on a random coset
//! — the partner's effective coset sign s′ ∈ {±1} with equal probability,
//! then histogram the exact two-hypothesis LLR. Keeping both sign branches
//! matters: the s′ = −1 branch (destructive superposition at equal gains)
//! carries no information until the partner is partially known, which is why
//! the joint threshold sits far above the single-user one.
//!
//! There is no puncturing here; the function-node output plays the channel
//! role directly: a′ = f(L(ρ(a))) ⊛ λ(ρ(a)) for symmetric fading, the
//! user-crossed pair form otherwise, and the g/Γ window machinery for the
//! spatially-coupled variant. Every Monte Carlo draw is addressed by
//! (seed, user, iteration, position, vote), so identical configurations
//! reproduce bit-identical histograms.

use alloc::vec;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::densities::{Grid, LDensity, Quantized};
use crate::ensembles::{CoupledSpec, DegreeDistribution, EnsembleKind};
use crate::joint_de::bisect_threshold;
use crate::math;
use crate::spatial_coupling::{check_side_mix, window_at};
use crate::Error;

/// MAC system description: fading gains, Monte Carlo budget, RNG seed.
/// The noise variance is fixed at 1 (gains absorb any scaling).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacSpec {
    /// User 1's fading coefficient.
    pub h1: f64,
    /// User 2's fading coefficient.
    pub h2: f64,
    /// Samples per function-node update.
    pub mc_samples: usize,
    /// Base RNG seed; all per-draw streams derive from it.
    pub seed: u64,
}

impl MacSpec {
    /// Validated spec. Gains must be finite and nonnegative — zero is
    /// allowed (an absent interferer is a meaningful edge case) — and the
    /// Monte Carlo budget at least 10⁴ samples.
    pub fn new(h1: f64, h2: f64, mc_samples: usize, seed: u64) -> Result<Self, Error> {
        for h in [h1, h2] {
            if !(h.is_finite() && h >= 0.0) {
                return Err(Error::invalid_parameter(
                    "fading coefficients must be finite and nonnegative",
                ));
            }
        }
        if mc_samples < 10_000 {
            return Err(Error::invalid_parameter(
                "mc_samples below 10^4 drowns the DE in sampling noise",
            ));
        }
        Ok(MacSpec {
            h1,
            h2,
            mc_samples,
            seed,
        })
    }

    /// Symmetric-fading spec h₁ = h₂ = h.
    pub fn symmetric(h: f64, mc_samples: usize, seed: u64) -> Result<Self, Error> {
        Self::new(h, h, mc_samples, seed)
    }
}

/// Which user's extrinsic density a function-node evaluation produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MacUser {
    /// Output for user 1 (own gain h₁, interferer h₂).
    User1,
    /// Output for user 2 (own gain h₂, interferer h₁).
    User2,
}

impl MacUser {
    fn gains(self, spec: &MacSpec) -> (f64, f64) {
        match self {
            MacUser::User1 => (spec.h1, spec.h2),
            MacUser::User2 => (spec.h2, spec.h1),
        }
    }

    fn index(self) -> u64 {
        match self {
            MacUser::User1 => 0,
            MacUser::User2 => 1,
        }
    }
}

/// Uniform in [0, 1) from the top 53 bits of one u64 draw.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// One standard normal via Box-Muller. Two uniforms per draw, cosine branch
/// only — wasteful of entropy but keeps the draw sequence trivially fixed.
fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1 = 1.0 - unit(rng); // (0, 1]: keeps the log finite
    let u2 = unit(rng);
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

/// Inverse-CDF sampler over a quantized density's atoms and bins.
struct DensitySampler<'g> {
    grid: &'g Grid,
    /// cum[j] = mass_neg_inf + sum of bins 0..=j.
    cum: Vec<f64>,
    mass_neg_inf: f64,
    finite_top: f64,
}

impl<'g> DensitySampler<'g> {
    fn new(grid: &'g Grid, q: &Quantized) -> Self {
        let total: f64 = q.mass_neg_inf + q.mass.iter().sum::<f64>() + q.mass_pos_inf;
        let scale = 1.0 / total;
        let mut cum = Vec::with_capacity(q.mass.len());
        let mut acc = q.mass_neg_inf * scale;
        for &m in &q.mass {
            acc += m * scale;
            cum.push(acc);
        }
        DensitySampler {
            grid,
            mass_neg_inf: q.mass_neg_inf * scale,
            finite_top: acc,
            cum,
        }
    }

    /// Draw an LLR value; ±∞ atoms come back as infinities.
    fn sample(&self, u: f64) -> f64 {
        if u < self.mass_neg_inf {
            return f64::NEG_INFINITY;
        }
        if u >= self.finite_top {
            return f64::INFINITY;
        }
        let j = self.cum.partition_point(|&c| c <= u);
        self.grid.center(j)
    }
}

/// Monte Carlo estimate of the extrinsic LLR density the function node hands
/// the target user, given the partner's aggregate density `b_other`.
///
/// Per sample: m₂ ∼ b_other, coset sign s′ ∈ {±1} uniform, z ∼ N(0,1),
/// observation y = h_own + s′·h_oth + z under the all-ones/coset-symmetrized
/// convention, and the exact LLR
///
/// log[(e^{m₂}·p(y|+,+s′) + p(y|+,−s′)) / (e^{m₂}·p(y|−,+s′) + p(y|−,−s′))]
///
/// with Gaussian likelihoods, histogrammed to the nearest grid value
/// (overflow to the ±∞ atoms). `nonce` addresses the draw stream — the run
/// drivers pass (iteration, position, vote) — so a repeated call is
/// bit-identical and any other address is an independent stream.
pub fn mac_node_density(
    grid: &Grid,
    b_other: &LDensity,
    spec: &MacSpec,
    which: MacUser,
    nonce: &[u64],
) -> LDensity {
    let (own, oth) = which.gains(spec);
    let q = grid.to_quantized(b_other);
    let sampler = DensitySampler::new(grid, &q);

    let mut words: Vec<u64> = Vec::with_capacity(2 + nonce.len());
    words.push(spec.seed);
    words.push(which.index());
    words.extend_from_slice(nonce);
    let mut rng = ChaCha8Rng::from_seed(math::derive_seed(&words));

    let bins = grid.bins();
    let gm = grid.grid_max();
    let delta = grid.delta();
    let weight = 1.0 / spec.mc_samples as f64;
    let mut mass = vec![0.0; bins + 1];
    let mut pos_inf = 0.0;
    let mut neg_inf = 0.0;
    for _ in 0..spec.mc_samples {
        let m2 = sampler.sample(unit(&mut rng));
        let sgn = if unit(&mut rng) < 0.5 { 1.0 } else { -1.0 };
        let z = standard_normal(&mut rng);
        let h2s = sgn * oth;
        let y = own + h2s + z;
        let d_a = y - own - h2s;
        let d_b = y - own + h2s;
        let d_c = y + own - h2s;
        let d_d = y + own + h2s;
        let ln_a = -0.5 * d_a * d_a;
        let ln_b = -0.5 * d_b * d_b;
        let ln_c = -0.5 * d_c * d_c;
        let ln_d = -0.5 * d_d * d_d;
        let llr = if m2 == f64::INFINITY {
            ln_a - ln_c
        } else if m2 == f64::NEG_INFINITY {
            ln_b - ln_d
        } else {
            math::logaddexp(m2 + ln_a, ln_b) - math::logaddexp(m2 + ln_c, ln_d)
        };
        let k = math::round((llr + gm) / delta);
        if k < 0.0 {
            neg_inf += weight;
        } else if k > bins as f64 {
            pos_inf += weight;
        } else {
            mass[k as usize] += weight;
        }
    }
    LDensity::Quantized(Quantized {
        grid_max: gm,
        bins,
        mass,
        mass_pos_inf: pos_inf,
        mass_neg_inf: neg_inf,
    })
}

/// Symmetric-fading MAC DE step: a′ = f(L(ρ(a))) ⊛ λ(ρ(a)), the function
/// node fed by the same density both users share. Requires h₁ = h₂.
///
/// Note one consequence of Δ₊∞ being ⊛-absorbing: a = Δ₊∞ maps to Δ₊∞ (the
/// λ(ρ(·)) factor absorbs everything), not to the bare interferer-cancelled
/// single-user density — that density is what [`mac_node_density`] alone
/// returns for b_other = Δ₊∞.
pub fn mac_de_step(
    grid: &Grid,
    a: &LDensity,
    spec: &MacSpec,
    dd: &DegreeDistribution,
    iteration: u64,
    vote: u64,
) -> Result<LDensity, Error> {
    if spec.h1 != spec.h2 {
        return Err(Error::invalid_parameter(
            "symmetric MAC step requires h1 = h2; use the pair step",
        ));
    }
    let rho_a = grid.edge_poly_chk(dd, a);
    let full = grid.node_poly_full(dd, &rho_a);
    let f = mac_node_density(grid, &full, spec, MacUser::User1, &[iteration, 0, vote]);
    Ok(grid.var_conv(&f, &grid.edge_poly_var(dd, &rho_a)))
}

/// Asymmetric-fading pair step, f crossing users exactly as in the
/// correlated-sources DE: a′ = f(L(ρ(b)); user 1) ⊛ λ(ρ(a)) and the
/// user-swapped update for b′.
pub fn mac_de_step_pair(
    grid: &Grid,
    a: &LDensity,
    b: &LDensity,
    spec: &MacSpec,
    dd: &DegreeDistribution,
    iteration: u64,
    vote: u64,
) -> Result<(LDensity, LDensity), Error> {
    let rho_a = grid.edge_poly_chk(dd, a);
    let rho_b = grid.edge_poly_chk(dd, b);
    let f_a = mac_node_density(
        grid,
        &grid.node_poly_full(dd, &rho_b),
        spec,
        MacUser::User1,
        &[iteration, 0, vote],
    );
    let f_b = mac_node_density(
        grid,
        &grid.node_poly_full(dd, &rho_a),
        spec,
        MacUser::User2,
        &[iteration, 0, vote],
    );
    let na = grid.var_conv(&f_a, &grid.edge_poly_var(dd, &rho_a));
    let nb = grid.var_conv(&f_b, &grid.edge_poly_var(dd, &rho_b));
    Ok((na, nb))
}

/// Stopping rules for Monte-Carlo DE runs. Sampling noise rules out the
/// deterministic stall test, so failure is a trend window instead: the run
/// fails once `trend_window` iterations pass without the error probability
/// improving on its best by the factor `trend_factor`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacSettings {
    /// Hard iteration cap.
    pub max_iterations: usize,
    /// Success once every tracked density's error probability is below this.
    pub success_error_prob: f64,
    /// Iterations without material improvement before declaring failure.
    pub trend_window: usize,
    /// "Material improvement" means dropping under best * trend_factor.
    pub trend_factor: f64,
}

impl Default for MacSettings {
    fn default() -> Self {
        MacSettings {
            max_iterations: 2000,
            success_error_prob: 1e-9,
            trend_window: 200,
            trend_factor: 0.98,
        }
    }
}

/// Outcome of a MAC DE run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacRun {
    /// Whether the error probability got under the success bar.
    pub converged: bool,
    /// Iterations taken.
    pub iterations: usize,
    /// Final (worst, over users and positions) error probability.
    pub error_prob: f64,
}

/// Shared driver logic: success on worst-case pe, trend window on mean pe
/// (for coupled chains the worst position sits still while the decoding
/// wave is in transit; the mean keeps falling).
struct Trend {
    best: f64,
    best_iteration: usize,
}

impl Trend {
    fn new() -> Self {
        Trend {
            best: f64::INFINITY,
            best_iteration: 0,
        }
    }

    fn stalled(&mut self, mean_pe: f64, iteration: usize, s: &MacSettings) -> bool {
        if mean_pe < self.best * s.trend_factor {
            self.best = mean_pe;
            self.best_iteration = iteration;
            false
        } else {
            iteration - self.best_iteration > s.trend_window
        }
    }
}

/// Run the uncoupled MAC DE from total ignorance. Symmetric gains use the
/// single-density form (one function-node evaluation per iteration and
/// exact user symmetry); otherwise the pair form.
pub fn run_mac(
    grid: &Grid,
    spec: &MacSpec,
    dd: &DegreeDistribution,
    settings: &MacSettings,
    vote: u64,
) -> Result<MacRun, Error> {
    let symmetric = spec.h1 == spec.h2;
    let mut a = LDensity::delta_zero();
    let mut b = LDensity::delta_zero();
    let mut trend = Trend::new();
    let mut pe = a.error_prob();
    for it in 1..=settings.max_iterations {
        if symmetric {
            a = mac_de_step(grid, &a, spec, dd, it as u64, vote)?;
            pe = a.error_prob();
        } else {
            let (na, nb) = mac_de_step_pair(grid, &a, &b, spec, dd, it as u64, vote)?;
            a = na;
            b = nb;
            pe = a.error_prob().max(b.error_prob());
        }
        if pe < settings.success_error_prob {
            return Ok(MacRun {
                converged: true,
                iterations: it,
                error_prob: pe,
            });
        }
        if trend.stalled(pe, it, settings) {
            return Ok(MacRun {
                converged: false,
                iterations: it,
                error_prob: pe,
            });
        }
    }
    Ok(MacRun {
        converged: false,
        iterations: settings.max_iterations,
        error_prob: pe,
    })
}

/// Run the spatially-coupled MAC DE (degrees and chain geometry from
/// `cspec`) from total ignorance, half-chain + mirror as in the
/// Slepian-Wolf coupled driver. Success needs every position of every user
/// under the bar; the trend window watches the position-mean.
pub fn run_mac_coupled(
    grid: &Grid,
    cspec: CoupledSpec,
    spec: &MacSpec,
    settings: &MacSettings,
    vote: u64,
) -> Result<MacRun, Error> {
    let symmetric = spec.h1 == spec.h2;
    let n = cspec.positions();
    let half = cspec.half_len;
    let plus = LDensity::delta_plus_inf();
    let mut a = vec![LDensity::delta_zero(); n];
    let mut b = if symmetric { Vec::new() } else { a.clone() };
    let mut trend = Trend::new();
    let mut worst = 0.5;
    for it in 1..=settings.max_iterations {
        let mut na = Vec::with_capacity(n);
        let mut nb = Vec::with_capacity(if symmetric { 0 } else { n });
        for pos in 0..=half {
            let wa = window_at(&a, pos, cspec.w, &plus);
            let ma = check_side_mix(grid, &wa, &cspec);
            let ga = grid.var_conv_pow(&ma, cspec.l - 1);
            let full_a = grid.var_conv(&ga, &ma);
            let nonce = [it as u64, pos as u64, vote];
            if symmetric {
                let f = mac_node_density(grid, &full_a, spec, MacUser::User1, &nonce);
                na.push(grid.var_conv(&f, &ga));
            } else {
                let wb = window_at(&b, pos, cspec.w, &plus);
                let mb = check_side_mix(grid, &wb, &cspec);
                let gb = grid.var_conv_pow(&mb, cspec.l - 1);
                let full_b = grid.var_conv(&gb, &mb);
                let f_a = mac_node_density(grid, &full_b, spec, MacUser::User1, &nonce);
                let f_b = mac_node_density(grid, &full_a, spec, MacUser::User2, &nonce);
                na.push(grid.var_conv(&f_a, &ga));
                nb.push(grid.var_conv(&f_b, &gb));
            }
        }
        for pos in half + 1..n {
            na.push(na[2 * half - pos].clone());
            if !symmetric {
                nb.push(nb[2 * half - pos].clone());
            }
        }
        a = na;
        if !symmetric {
            b = nb;
        }
        let pes = a.iter().chain(b.iter()).map(LDensity::error_prob);
        worst = pes.clone().fold(0.0, f64::max);
        let mean = pes.sum::<f64>() / (a.len() + b.len()) as f64;
        if worst < settings.success_error_prob {
            return Ok(MacRun {
                converged: true,
                iterations: it,
                error_prob: worst,
            });
        }
        if trend.stalled(mean, it, settings) {
            return Ok(MacRun {
                converged: false,
                iterations: it,
                error_prob: worst,
            });
        }
    }
    Ok(MacRun {
        converged: false,
        iterations: settings.max_iterations,
        error_prob: worst,
    })
}

/// Majority-of-3 convergence verdict for one (h₁, h₂) point, short-circuited
/// after two matching votes. Each vote reruns the full DE with an
/// independent derived stream.
pub fn mac_converges_voted(
    grid: &Grid,
    kind: &EnsembleKind,
    h1: f64,
    h2: f64,
    mc_samples: usize,
    seed: u64,
    settings: &MacSettings,
) -> Result<bool, Error> {
    let spec = MacSpec::new(h1, h2, mc_samples, seed)?;
    let mut yes = 0;
    let mut no = 0;
    for vote in 0..3u64 {
        let converged = match kind {
            EnsembleKind::Uncoupled(dd) => run_mac(grid, &spec, dd, settings, vote)?.converged,
            EnsembleKind::Coupled(cs) => {
                run_mac_coupled(grid, *cs, &spec, settings, vote)?.converged
            }
        };
        if converged {
            yes += 1;
        } else {
            no += 1;
        }
        if yes == 2 || no == 2 {
            break;
        }
    }
    Ok(yes > no)
}

/// Symmetric-fading threshold h* by bisection with voted probes. Gains run
/// opposite to noise parameters — small h fails, large h decodes — so the
/// probe hands [`bisect_threshold`] the negated verdict to recover its
/// true-below/false-above convention; the returned midpoint is where
/// failure flips to success.
pub fn mac_threshold_symmetric(
    grid: &Grid,
    kind: &EnsembleKind,
    mc_samples: usize,
    seed: u64,
    settings: &MacSettings,
    tol: f64,
    bracket: (f64, f64),
) -> Result<f64, Error> {
    bisect_threshold(bracket.0, bracket.1, tol, |h| {
        Ok(!mac_converges_voted(grid, kind, h, h, mc_samples, seed, settings)?)
    })
}
