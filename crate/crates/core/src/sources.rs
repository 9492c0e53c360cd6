//! Correlated-source models and the correlation-node density map.
//!
//! Two users observe binary sources (U1, U2) coupled by a single parameter p.
//! The erasure model places a degree-two parity check between the users'
//! systematic bits with probability p (and no check otherwise); the BSC model
//! relates them through a virtual crossover-p channel, U2 = U1 xor Z. Each
//! model induces a map f on L-densities describing what the correlation node
//! returns to one user given the other user's aggregated message, and a pair
//! of source entropies that drive rate bounds and area targets.

use crate::densities::{ChannelFamily, ChannelSpec, Grid, LDensity};
use crate::Error;

/// How the two sources are correlated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrelationKind {
    /// Degree-two parity check present with probability p.
    Erasure,
    /// Virtual BSC(p) between the sources.
    Bsc,
}

/// A correlation model: kind plus its probability parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceModel {
    /// Which correlation structure.
    pub kind: CorrelationKind,
    /// Correlation probability in [0,1].
    pub p: f64,
}

impl SourceModel {
    /// Validated constructor (p must lie in [0,1]).
    pub fn new(kind: CorrelationKind, p: f64) -> Result<Self, Error> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid_parameter(
                "correlation probability must be in [0,1]",
            ));
        }
        Ok(Self { kind, p })
    }

    /// Erasure correlation with check probability p.
    pub fn erasure(p: f64) -> Result<Self, Error> {
        Self::new(CorrelationKind::Erasure, p)
    }

    /// BSC correlation with crossover p.
    pub fn bsc(p: f64) -> Result<Self, Error> {
        Self::new(CorrelationKind::Bsc, p)
    }

    /// Parse the CLI form `erasure:0.5` / `bsc:0.1`.
    pub fn parse(s: &str) -> Result<Self, Error> {
        let (kind, num) = match s.split_once(':') {
            Some((k, n)) => (k.trim(), n.trim()),
            None => return Err(Error::parse_spec("source", s)),
        };
        let p: f64 = num.parse().map_err(|_| Error::parse_spec("source", s))?;
        let kind = match kind {
            "erasure" => CorrelationKind::Erasure,
            "bsc" => CorrelationKind::Bsc,
            _ => return Err(Error::parse_spec("source", s)),
        };
        Self::new(kind, p).map_err(|_| Error::parse_spec("source", s))
    }
}

/// The conditional and joint source entropies (H(U1|U2), H(U1,U2)).
///
/// Erasure model: (1-p, 2-p). BSC model: (h2(p), 1 + h2(p)). Both are
/// symmetric in the users, so H(U2|U1) equals the first component too.
pub fn source_entropies(m: &SourceModel) -> (f64, f64) {
    match m.kind {
        CorrelationKind::Erasure => (1.0 - m.p, 2.0 - m.p),
        CorrelationKind::Bsc => {
            let h = crate::math::h2(m.p);
            (h, 1.0 + h)
        }
    }
}

/// The correlation-node map f applied to the partner's aggregate density.
///
/// Erasure model: the check is present with probability p, so
/// f(a) = (1-p) delta_0 + p a — on erasure mixtures this is the scalar rule
/// f(u) = (1-p) + p u in erasure-mass arithmetic, keeping BEC runs exact.
/// BSC model: the partner's belief is passed through the virtual channel,
/// f(a) = a_BSC(p) boxplus a.
pub fn correlation_f(grid: &Grid, m: &SourceModel, a: &LDensity) -> LDensity {
    match m.kind {
        CorrelationKind::Erasure => {
            let absent = LDensity::delta_zero();
            grid.mix(&[(1.0 - m.p, &absent), (m.p, a)])
        }
        CorrelationKind::Bsc => {
            let spec = ChannelSpec::new(ChannelFamily::Bsc, m.p).expect("p validated in [0,1]");
            let bsc = grid.channel_density(spec);
            grid.chk_conv(&bsc, a)
        }
    }
}
