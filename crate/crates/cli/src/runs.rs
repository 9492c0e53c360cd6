//! The seven command implementations: resolve merged options to typed
//! settings, call the library, emit files and the summary line.

use std::path::Path;

use coupled_de_core::densities::{ChannelFamily, ChannelSpec, Grid};
use coupled_de_core::ensembles::{CoupledSpec, DegreeDistribution, EnsembleKind};
use coupled_de_core::exit_analysis::{
    bp_knee, default_bms_targets, ebp_exit_bec, ebp_gexit_bms, map_threshold_area, unit_anchor,
    GexitCurve, GexitSettings,
};
use coupled_de_core::joint_de::{run_de, DESettings};
use coupled_de_core::mac::{run_mac, run_mac_coupled, MacSettings, MacSpec};
use coupled_de_core::regions::{
    assemble_region, sw_region, sweep_row, GridAxis, Orientation, Region, RowStrategy,
};
use coupled_de_core::sources::{CorrelationKind, SourceModel};
use coupled_de_core::spatial_coupling::{coupled_ebp_gexit, run_coupled};
use coupled_de_core::Error as CoreError;

use crate::config::FileConfig;
use crate::emit;
use crate::{
    AcprArgs, ExitCurveArgs, Failure, GexitCurveArgs, MacAcprArgs, MacThresholdArgs, SwRegionArgs,
    ThresholdArgs,
};

// ---------------------------------------------------------------------------
// shared resolution helpers

fn load_cfg(path: &Option<String>) -> Result<FileConfig, Failure> {
    match path {
        Some(p) => FileConfig::load(p),
        None => Ok(FileConfig::empty()),
    }
}

fn parse_family(s: Option<String>) -> Result<ChannelFamily, Failure> {
    match s.as_deref() {
        Some("bec") => Ok(ChannelFamily::Bec),
        Some("bsc") => Ok(ChannelFamily::Bsc),
        Some("bawgnc") => Ok(ChannelFamily::Bawgnc),
        Some(other) => Err(Failure::Usage(format!(
            "unknown channel family {other:?} (expected bec, bsc, or bawgnc)"
        ))),
        None => Err(Failure::Usage("--channel is required".into())),
    }
}

fn family_name(family: ChannelFamily) -> &'static str {
    match family {
        ChannelFamily::Bec => "bec",
        ChannelFamily::Bsc => "bsc",
        ChannelFamily::Bawgnc => "bawgnc",
    }
}

fn parse_source(s: Option<String>) -> Result<SourceModel, Failure> {
    let s = s.ok_or_else(|| Failure::Usage("--source is required".into()))?;
    Ok(SourceModel::parse(&s)?)
}

/// Canonical `kind:p` form, for metadata and summaries.
fn source_string(m: &SourceModel) -> String {
    match m.kind {
        CorrelationKind::Erasure => format!("erasure:{}", m.p),
        CorrelationKind::Bsc => format!("bsc:{}", m.p),
    }
}

/// "lo:hi" bracket strings.
fn parse_bracket(s: &str) -> Result<(f64, f64), Failure> {
    let err = || Failure::Usage(format!("bracket {s:?} must be lo:hi with lo < hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(err)?;
    let lo: f64 = lo.trim().parse().map_err(|_| err())?;
    let hi: f64 = hi.trim().parse().map_err(|_| err())?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(err());
    }
    Ok((lo, hi))
}

/// "lo:hi:step" axis strings.
fn parse_axis(s: &str) -> Result<GridAxis, Failure> {
    let err = || Failure::Usage(format!("grid {s:?} must be lo:hi:step"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(err());
    }
    let lo: f64 = parts[0].trim().parse().map_err(|_| err())?;
    let hi: f64 = parts[1].trim().parse().map_err(|_| err())?;
    let step: f64 = parts[2].trim().parse().map_err(|_| err())?;
    Ok(GridAxis::new(lo, hi, step)?)
}

/// Comma-separated entropy targets.
fn parse_targets(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("bad target entropy {t:?}")))
        })
        .collect()
}

/// `--ensemble l,r[,L,w]` with an optional `--coupled L,w` upgrade.
fn resolve_ensemble(
    ensemble: Option<String>,
    coupled: Option<String>,
) -> Result<EnsembleKind, Failure> {
    let spec = ensemble.ok_or_else(|| Failure::Usage("--ensemble is required".into()))?;
    let kind = EnsembleKind::parse(&spec)?;
    match coupled {
        None => Ok(kind),
        Some(cw) => {
            let dd = match kind {
                EnsembleKind::Uncoupled(dd) => dd,
                EnsembleKind::Coupled(_) => {
                    return Err(Failure::Usage(
                        "--coupled conflicts with a 4-part --ensemble; give the coupling once"
                            .into(),
                    ))
                }
            };
            let parts: Vec<&str> = cw.split(',').collect();
            let err = || Failure::Usage(format!("coupled spec {cw:?} must be L,w"));
            if parts.len() != 2 {
                return Err(err());
            }
            let big_l: usize = parts[0].trim().parse().map_err(|_| err())?;
            let w: usize = parts[1].trim().parse().map_err(|_| err())?;
            let (l, r) = regular_degrees(&dd)?;
            Ok(EnsembleKind::Coupled(CoupledSpec::new(l, r, big_l, w)?))
        }
    }
}

/// Recover (l, r) from a regular degree distribution.
fn regular_degrees(dd: &DegreeDistribution) -> Result<(usize, usize), Failure> {
    match (dd.lambda(), dd.rho()) {
        ([(l, _)], [(r, _)]) => Ok((*l, *r)),
        _ => Err(Failure::Usage(
            "--coupled needs a regular l,r ensemble".into(),
        )),
    }
}

/// Canonical ensemble string for summaries and metadata.
fn ensemble_string(kind: &EnsembleKind) -> String {
    match kind {
        EnsembleKind::Uncoupled(dd) => match regular_degrees(dd) {
            Ok((l, r)) => format!("{l},{r}"),
            Err(_) => "irregular".into(),
        },
        EnsembleKind::Coupled(cs) => format!("{},{},{},{}", cs.l, cs.r, cs.half_len, cs.w),
    }
}

/// The SW-path analyses are defined on the punctured construction; its
/// puncture fraction drives the DE mixture, so the flag is a required
/// acknowledgement rather than an option.
fn require_punctured(punctured: bool) -> Result<(), Failure> {
    if punctured {
        Ok(())
    } else {
        Err(Failure::Usage(
            "this analysis is defined for the punctured construction; pass --punctured".into(),
        ))
    }
}

/// Channel spec from the sweep parameter: erasure probability for the BEC,
/// channel entropy for BMS families.
fn channel_spec(grid: &Grid, family: ChannelFamily, param: f64) -> Result<ChannelSpec, CoreError> {
    match family {
        ChannelFamily::Bec => ChannelSpec::new(family, param),
        ChannelFamily::Bsc | ChannelFamily::Bawgnc => grid.channel_from_entropy(family, param),
    }
}

/// Quantization defaults: the BEC path runs in exact erasure arithmetic, so
/// its grid is a small placeholder; BMS families get the reduced production
/// grid.
fn default_grid(family: ChannelFamily) -> (f64, usize) {
    match family {
        ChannelFamily::Bec => (8.0, 64),
        ChannelFamily::Bsc | ChannelFamily::Bawgnc => (25.0, 2048),
    }
}

fn default_jobs() -> usize {
    std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
}

fn out_path(out: Option<String>) -> Result<String, Failure> {
    out.ok_or_else(|| Failure::Usage("--out is required".into()))
}

// ---------------------------------------------------------------------------
// stat-counting bisection

struct BisectOutcome {
    value: f64,
    /// Final bracket; `lo` is the side where the probe answered true.
    lo: f64,
    probes: usize,
    iterations: usize,
}

/// Bisection with the library's convention — probe true at `lo`, false at
/// `hi` — that additionally counts probes and the DE iterations they spent.
fn bisect_stats(
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    probe: &mut dyn FnMut(f64) -> Result<(bool, usize), Failure>,
) -> Result<BisectOutcome, Failure> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Usage("tol must be positive".into()));
    }
    let mut probes = 0usize;
    let mut iterations = 0usize;
    let mut run = |x: f64, probes: &mut usize, iterations: &mut usize| -> Result<bool, Failure> {
        let (ok, its) = probe(x)?;
        *probes += 1;
        *iterations += its;
        Ok(ok)
    };
    if !run(lo, &mut probes, &mut iterations)? || run(hi, &mut probes, &mut iterations)? {
        return Err(Failure::Analysis(format!(
            "no threshold in range: bracket endpoints {lo} and {hi} do not straddle the transition"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if run(mid, &mut probes, &mut iterations)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BisectOutcome {
        value: 0.5 * (lo + hi),
        lo,
        probes,
        iterations,
    })
}

// ---------------------------------------------------------------------------
// parallel row fan-out

/// Farm sweep rows onto `jobs` threads (round-robin by row index) and return
/// them in lattice order. With one job this is a plain loop; errors surface
/// deterministically by row order.
fn sweep_rows_parallel<F>(
    axis1: &GridAxis,
    axis2: &GridAxis,
    orientation: Orientation,
    strategy: RowStrategy,
    jobs: usize,
    probe: F,
) -> Result<Vec<Vec<bool>>, CoreError>
where
    F: Fn(f64, f64) -> Result<bool, CoreError> + Sync,
{
    let v1 = axis1.values();
    let jobs = jobs.max(1).min(v1.len().max(1));
    if jobs <= 1 {
        return v1
            .iter()
            .map(|&a1| sweep_row(axis2, orientation, strategy, |a2| probe(a1, a2)))
            .collect();
    }
    let mut slots: Vec<Option<Result<Vec<bool>, CoreError>>> = Vec::new();
    slots.resize_with(v1.len(), || None);
    std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for worker in 0..jobs {
            let v1 = &v1;
            let probe = &probe;
            handles.push(scope.spawn(move || {
                let mut rows = Vec::new();
                let mut i = worker;
                while i < v1.len() {
                    let a1 = v1[i];
                    rows.push((i, sweep_row(axis2, orientation, strategy, |a2| probe(a1, a2))));
                    i += jobs;
                }
                rows
            }));
        }
        for handle in handles {
            for (i, row) in handle.join().expect("sweep worker panicked") {
                slots[i] = Some(row);
            }
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.expect("every row is assigned to exactly one worker"))
        .collect()
}

// ---------------------------------------------------------------------------
// threshold

pub fn threshold(args: ThresholdArgs) -> Result<(), Failure> {
    let mut cfg = load_cfg(&args.config)?;
    let ensemble = cfg.merge_str(args.ensemble, "ensemble");
    let coupled = cfg.merge_str(args.coupled, "coupled");
    let punctured = cfg.merge_bool(args.punctured, "punctured")?;
    let source = cfg.merge_str(args.source, "source");
    let channel = cfg.merge_str(args.channel, "channel");
    let tol = cfg.merge(args.tol, "tol")?;
    let bracket = cfg.merge_str(args.bracket, "bracket");
    let grid_max = cfg.merge(args.grid_max, "grid-max")?;
    let bins = cfg.merge(args.bins, "bins")?;
    let max_iters = cfg.merge(args.max_iters, "max-iters")?;
    let dump_density = cfg.merge_str(args.dump_density, "dump-density");
    let dump_profile = cfg.merge_str(args.dump_profile, "dump-profile");
    cfg.finish()?;

    require_punctured(punctured)?;
    let kind = resolve_ensemble(ensemble, coupled)?;
    let m = parse_source(source)?;
    let family = parse_family(channel)?;
    let tol = tol.unwrap_or(match family {
        ChannelFamily::Bec => 1e-4,
        _ => 1e-3,
    });
    let bracket = match bracket {
        Some(s) => parse_bracket(&s)?,
        None => match family {
            ChannelFamily::Bec => (0.01, 0.99),
            _ => (0.02, 0.98),
        },
    };
    let (gm_default, bins_default) = default_grid(family);
    let grid = Grid::new(grid_max.unwrap_or(gm_default), bins.unwrap_or(bins_default))?;
    let settings = DESettings {
        max_iterations: max_iters.unwrap_or_else(|| DESettings::default().max_iterations),
        ..DESettings::default()
    };
    if dump_profile.is_some() && matches!(kind, EnsembleKind::Uncoupled(_)) {
        return Err(Failure::Usage(
            "--dump-profile needs a coupled ensemble (uncoupled runs have no positions)".into(),
        ));
    }

    let outcome = match &kind {
        EnsembleKind::Uncoupled(dd) => {
            let dd = dd.clone();
            bisect_stats(bracket.0, bracket.1, tol, &mut |p| {
                let ch = channel_spec(&grid, family, p)?;
                let run = run_de(&grid, ch, ch, &m, &dd, &settings)?;
                Ok((run.converged, run.iterations))
            })?
        }
        EnsembleKind::Coupled(cs) => {
            let cs = *cs;
            bisect_stats(bracket.0, bracket.1, tol, &mut |p| {
                let ch = channel_spec(&grid, family, p)?;
                let run = run_coupled(&grid, cs, ch, ch, &m, &settings)?;
                Ok((run.converged, run.iterations))
            })?
        }
    };

    let params = vec![
        ("ensemble", ensemble_string(&kind)),
        ("punctured", "true".into()),
        ("source", source_string(&m)),
        ("channel", family_name(family).into()),
        ("tol", format!("{tol}")),
        ("bracket", format!("{}:{}", bracket.0, bracket.1)),
        ("grid-max", format!("{}", grid.grid_max())),
        ("bins", format!("{}", grid.bins())),
        ("max-iters", format!("{}", settings.max_iterations)),
    ];

    // Dumps re-run the converging side of the final bracket.
    if dump_density.is_some() || dump_profile.is_some() {
        let meta = emit::metadata_line("threshold", &params);
        let ch = channel_spec(&grid, family, outcome.lo)?;
        match &kind {
            EnsembleKind::Uncoupled(dd) => {
                let run = run_de(&grid, ch, ch, &m, dd, &settings)?;
                if let Some(path) = &dump_density {
                    let q = grid.to_quantized(&run.state.a);
                    emit::write_atomic(Path::new(path), &emit::density_csv(&q, &meta))?;
                }
            }
            EnsembleKind::Coupled(cs) => {
                let run = run_coupled(&grid, *cs, ch, ch, &m, &settings)?;
                if let Some(path) = &dump_density {
                    let center = &run.state.a[cs.half_len];
                    let q = grid.to_quantized(center);
                    emit::write_atomic(Path::new(path), &emit::density_csv(&q, &meta))?;
                }
                if let Some(path) = &dump_profile {
                    let profile = run.state.profile();
                    emit::write_atomic(Path::new(path), &emit::profile_csv(&profile, &meta))?;
                }
            }
        }
    }

    println!(
        "{}",
        emit::summary_line(
            "threshold",
            &params,
            &format!(
                "threshold={} probes={} de_iterations={}",
                outcome.value, outcome.probes, outcome.iterations
            ),
        )
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// exit-curve

pub fn exit_curve(args: ExitCurveArgs) -> Result<(), Failure> {
    let mut cfg = load_cfg(&args.config)?;
    let ensemble = cfg.merge_str(args.ensemble, "ensemble");
    let punctured = cfg.merge_bool(args.punctured, "punctured")?;
    let source = cfg.merge_str(args.source, "source");
    let channel = cfg.merge_str(args.channel, "channel");
    let samples = cfg.merge(args.samples, "samples")?;
    let out = cfg.merge_str(args.out, "out");
    cfg.finish()?;

    require_punctured(punctured)?;
    let kind = resolve_ensemble(ensemble, None)?;
    let dd = match &kind {
        EnsembleKind::Uncoupled(dd) => dd.clone(),
        EnsembleKind::Coupled(_) => {
            return Err(Failure::Usage(
                "exit-curve takes an uncoupled ensemble; the coupled curve is gexit-curve".into(),
            ))
        }
    };
    let m = parse_source(source)?;
    let family = parse_family(channel)?;
    if family != ChannelFamily::Bec {
        return Err(Failure::Usage(
            "exit-curve is the closed-form BEC curve; use gexit-curve for BMS families".into(),
        ));
    }
    let samples = samples.unwrap_or(2000);
    let out = out_path(out)?;

    let curve = ebp_exit_bec(&dd, &m, samples)?;

    let params = vec![
        ("ensemble", ensemble_string(&kind)),
        ("punctured", "true".into()),
        ("source", source_string(&m)),
        ("channel", "bec".into()),
        ("samples", format!("{samples}")),
        ("out", out.clone()),
    ];
    let meta = emit::metadata_line("exit-curve", &params);
    emit::write_atomic(Path::new(&out), &emit::curve_csv(&curve, &meta))?;

    let mut value = format!("points={}", curve.len());
    if let Some(knee) = bp_knee(&curve) {
        value.push_str(&format!(" bp_knee={}", knee.h_channel));
    }
    if let Ok(map) = map_threshold_area(&curve, &m, &dd) {
        value.push_str(&format!(" map_bound={map}"));
    }
    println!("{}", emit::summary_line("exit-curve", &params, &value));
    Ok(())
}

// ---------------------------------------------------------------------------
// gexit-curve

pub fn gexit_curve(args: GexitCurveArgs) -> Result<(), Failure> {
    let mut cfg = load_cfg(&args.config)?;
    let ensemble = cfg.merge_str(args.ensemble, "ensemble");
    let coupled = cfg.merge_str(args.coupled, "coupled");
    let punctured = cfg.merge_bool(args.punctured, "punctured")?;
    let source = cfg.merge_str(args.source, "source");
    let channel = cfg.merge_str(args.channel, "channel");
    let targets = cfg.merge_str(args.targets, "targets");
    let grid_max = cfg.merge(args.grid_max, "grid-max")?;
    let bins = cfg.merge(args.bins, "bins")?;
    let max_outer = cfg.merge(args.max_outer, "max-outer")?;
    let h_min = cfg.merge(args.h_min, "h-min")?;
    let h_max = cfg.merge(args.h_max, "h-max")?;
    let warm_start = cfg.merge_bool(args.warm_start, "warm-start")?;
    let out = cfg.merge_str(args.out, "out");
    cfg.finish()?;

    require_punctured(punctured)?;
    let kind = resolve_ensemble(ensemble, coupled)?;
    let m = parse_source(source)?;
    let family = parse_family(channel)?;
    if family != ChannelFamily::Bawgnc {
        return Err(Failure::Usage(
            "gexit-curve is the BAWGNC continuation; pass --channel bawgnc".into(),
        ));
    }
    let targets = match targets {
        Some(s) => parse_targets(&s)?,
        None => default_bms_targets(),
    };
    let grid = Grid::new(grid_max.unwrap_or(25.0), bins.unwrap_or(1024))?;
    let defaults = GexitSettings::default();
    let settings = GexitSettings {
        max_outer: max_outer.unwrap_or(defaults.max_outer),
        h_min: h_min.unwrap_or(defaults.h_min),
        h_max: h_max.unwrap_or(defaults.h_max),
        warm_start,
        ..defaults
    };
    let out = out_path(out)?;

    let GexitCurve { points, failed } = match &kind {
        EnsembleKind::Uncoupled(dd) => ebp_gexit_bms(&grid, dd, &m, &targets, &settings)?,
        EnsembleKind::Coupled(cs) => coupled_ebp_gexit(&grid, *cs, &m, &targets, &settings)?,
    };

    let params = vec![
        ("ensemble", ensemble_string(&kind)),
        ("punctured", "true".into()),
        ("source", source_string(&m)),
        ("channel", "bawgnc".into()),
        (
            "targets",
            targets
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        ("grid-max", format!("{}", grid.grid_max())),
        ("bins", format!("{}", grid.bins())),
        ("max-outer", format!("{}", settings.max_outer)),
        ("h-min", format!("{}", settings.h_min)),
        ("h-max", format!("{}", settings.h_max)),
        ("warm-start", format!("{warm_start}")),
        ("out", out.clone()),
    ];
    let meta = emit::metadata_line("gexit-curve", &params);
    emit::write_atomic(Path::new(&out), &emit::curve_csv(&points, &meta))?;

    for (t, reason) in &failed {
        eprintln!("warning: target {t} failed: {reason:?}");
    }
    let mut value = format!("points={} failed={}", points.len(), failed.len());
    if !points.is_empty() {
        let mut anchored = vec![unit_anchor()];
        anchored.extend(points.iter().copied());
        if let Ok(map) = map_threshold_area(&anchored, &m, kind_dd(&kind).as_ref()) {
            value.push_str(&format!(" map_bound={map}"));
        }
    }
    println!("{}", emit::summary_line("gexit-curve", &params, &value));

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Analysis(format!(
            "{} of {} continuation targets failed; partial curve retained in {}",
            failed.len(),
            targets.len(),
            out
        )))
    }
}

/// The degree distribution behind either ensemble kind (the coupled chain's
/// interior shares the uncoupled rate and puncture fraction).
fn kind_dd(kind: &EnsembleKind) -> std::borrow::Cow<'_, DegreeDistribution> {
    match kind {
        EnsembleKind::Uncoupled(dd) => std::borrow::Cow::Borrowed(dd),
        EnsembleKind::Coupled(cs) => std::borrow::Cow::Owned(cs.uncoupled()),
    }
}

// ---------------------------------------------------------------------------
// acpr

pub fn acpr(args: AcprArgs) -> Result<(), Failure> {
    let mut cfg = load_cfg(&args.config)?;
    let ensemble = cfg.merge_str(args.ensemble, "ensemble");
    let coupled = cfg.merge_str(args.coupled, "coupled");
    let punctured = cfg.merge_bool(args.punctured, "punctured")?;
    let source = cfg.merge_str(args.source, "source");
    let channel = cfg.merge_str(args.channel, "channel");
    let delta = cfg.merge(args.delta, "delta")?;
    let strategy = cfg.merge_str(args.strategy, "strategy");
    let jobs = cfg.merge(args.jobs, "jobs")?;
    let grid_max = cfg.merge(args.grid_max, "grid-max")?;
    let bins = cfg.merge(args.bins, "bins")?;
    let max_iters = cfg.merge(args.max_iters, "max-iters")?;
    let out = cfg.merge_str(args.out, "out");
    let boundary_out = cfg.merge_str(args.boundary_out, "boundary-out");
    cfg.finish()?;

    require_punctured(punctured)?;
    let kind = resolve_ensemble(ensemble, coupled)?;
    let m = parse_source(source)?;
    let family = parse_family(channel)?;
    let delta = delta.unwrap_or(match family {
        ChannelFamily::Bec => 0.01,
        _ => 0.02,
    });
    let strategy = match strategy.as_deref() {
        None | Some("bisect") => RowStrategy::Bisect,
        Some("scan") => RowStrategy::Scan,
        Some(other) => {
            return Err(Failure::Usage(format!(
                "unknown strategy {other:?} (expected bisect or scan)"
            )))
        }
    };
    let jobs = jobs.unwrap_or_else(default_jobs);
    let (gm_default, bins_default) = default_grid(family);
    let grid = Grid::new(grid_max.unwrap_or(gm_default), bins.unwrap_or(bins_default))?;
    let settings = DESettings {
        max_iterations: max_iters.unwrap_or_else(|| DESettings::default().max_iterations),
        ..DESettings::default()
    };
    let out = out_path(out)?;

    // Entropy axes stop one lattice step short of the degenerate 0/1
    // channels, which channel_from_entropy cannot represent.
    let axis = match family {
        ChannelFamily::Bec => GridAxis::new(0.0, 1.0, delta)?,
        _ => GridAxis::new(delta, 1.0 - delta, delta)?,
    };

    let probe = |a1: f64, a2: f64| -> Result<bool, CoreError> {
        let ch1 = channel_spec(&grid, family, a1)?;
        let ch2 = channel_spec(&grid, family, a2)?;
        Ok(match &kind {
            EnsembleKind::Uncoupled(dd) => run_de(&grid, ch1, ch2, &m, dd, &settings)?.converged,
            EnsembleKind::Coupled(cs) => {
                run_coupled(&grid, *cs, ch1, ch2, &m, &settings)?.converged
            }
        })
    };
    let rows = sweep_rows_parallel(&axis, &axis, Orientation::SmallerBetter, strategy, jobs, probe)?;
    let region = assemble_region(&axis, &axis, Orientation::SmallerBetter, rows)?;

    // Capacity containment: BP convergence can never beat the Slepian-Wolf
    // bound, so every achievable lattice point must also be SW-achievable
    // at the ensemble's punctured rate.
    let rate = kind_dd(&kind).punctured_rate()?;
    let sw = sw_region(&m, family, rate, &axis, &axis)?;
    let mut sw_violations = 0usize;
    for i in 0..axis.len() {
        for j in 0..axis.len() {
            if region.at(i, j) && !sw.at(i, j) {
                sw_violations += 1;
            }
        }
    }

    let params = vec![
        ("ensemble", ensemble_string(&kind)),
        ("punctured", "true".into()),
        ("source", source_string(&m)),
        ("channel", family_name(family).into()),
        ("delta", format!("{delta}")),
        (
            "strategy",
            match strategy {
                RowStrategy::Bisect => "bisect".into(),
                RowStrategy::Scan => "scan".into(),
            },
        ),
        ("jobs", format!("{jobs}")),
        ("grid-max", format!("{}", grid.grid_max())),
        ("bins", format!("{}", grid.bins())),
        ("max-iters", format!("{}", settings.max_iterations)),
        ("out", out.clone()),
    ];
    let meta = emit::metadata_line("acpr", &params);
    emit::write_atomic(Path::new(&out), &emit::region_csv(&region, &meta))?;
    if let Some(bpath) = &boundary_out {
        emit::write_atomic(Path::new(bpath), &emit::boundary_csv(&region.boundary, &meta))?;
    }

    report_region(
        "acpr",
        &params,
        &region,
        &format!(" sw_violations={sw_violations}"),
    );
    if sw_violations > 0 {
        eprintln!(
            "warning: {sw_violations} achievable points fall outside the Slepian-Wolf region"
        );
    }
    if region.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Audit(format!(
            "staircase audit found {} violations (region retained in {})",
            region.violations.len(),
            out
        )))
    }
}

/// Shared region summary printing: achievable count, boundary size, audit
/// count, plus any command-specific suffix.
fn report_region(command: &str, params: &[(&str, String)], region: &Region, extra: &str) {
    let total = region.axis1.len() * region.axis2.len();
    let achievable = region.achievable.iter().filter(|&&x| x).count();
    for &(i, j) in region.violations.iter().take(5) {
        eprintln!(
            "warning: staircase violation at lattice ({}, {})",
            region.axis1.values()[i],
            region.axis2.values()[j]
        );
    }
    if region.violations.len() > 5 {
        eprintln!(
            "warning: ... and {} more staircase violations",
            region.violations.len() - 5
        );
    }
    println!(
        "{}",
        emit::summary_line(
            command,
            params,
            &format!(
                "achievable={achievable}/{total} boundary={} violations={}{extra}",
                region.boundary.len(),
                region.violations.len()
            ),
        )
    );
}

// ---------------------------------------------------------------------------
// sw-region

pub fn sw_region_cmd(args: SwRegionArgs) -> Result<(), Failure> {
    let mut cfg = load_cfg(&args.config)?;
    let source = cfg.merge_str(args.source, "source");
    let channel = cfg.merge_str(args.channel, "channel");
    let rate = cfg.merge(args.rate, "rate")?;
    let delta = cfg.merge(args.delta, "delta")?;
    let out = cfg.merge_str(args.out, "out");
    let boundary_out = cfg.merge_str(args.boundary_out, "boundary-out");
    cfg.finish()?;

    let m = parse_source(source)?;
    let family = parse_family(channel)?;
    let rate = rate.unwrap_or(0.5);
    let delta = delta.unwrap_or(0.01);
    let out = out_path(out)?;
    let axis = GridAxis::new(0.0, 1.0, delta)?;

    let region = sw_region(&m, family, rate, &axis, &axis)?;

    let params = vec![
        ("source", source_string(&m)),
        ("channel", family_name(family).into()),
        ("rate", format!("{rate}")),
        ("delta", format!("{delta}")),
        ("out", out.clone()),
    ];
    let meta = emit::metadata_line("sw-region", &params);
    emit::write_atomic(Path::new(&out), &emit::region_csv(&region, &meta))?;
    if let Some(bpath) = &boundary_out {
        emit::write_atomic(Path::new(bpath), &emit::boundary_csv(&region.boundary, &meta))?;
    }

    let total = region.axis1.len() * region.axis2.len();
    let achievable = region.achievable.iter().filter(|&&x| x).count();
    println!(
        "{}",
        emit::summary_line(
            "sw-region",
            &params,
            &format!(
                "achievable={achievable}/{total} boundary_vertices={}",
                region.boundary.len()
            ),
        )
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// mac-threshold

/// Majority-of-3 convergence vote, mirroring the library's probe but
/// keeping the per-vote iteration counts for the summary line.
fn mac_probe_voted(
    grid: &Grid,
    kind: &EnsembleKind,
    h: f64,
    mc: usize,
    seed: u64,
    settings: &MacSettings,
) -> Result<(bool, usize), Failure> {
    let spec = MacSpec::new(h, h, mc, seed)?;
    let mut yes = 0;
    let mut no = 0;
    let mut iterations = 0;
    for vote in 0..3u64 {
        let run = match kind {
            EnsembleKind::Uncoupled(dd) => run_mac(grid, &spec, dd, settings, vote)?,
            EnsembleKind::Coupled(cs) => run_mac_coupled(grid, *cs, &spec, settings, vote)?,
        };
        iterations += run.iterations;
        if run.converged {
            yes += 1;
        } else {
            no += 1;
        }
        if yes == 2 || no == 2 {
            break;
        }
    }
    Ok((yes > no, iterations))
}

pub fn mac_threshold(args: MacThresholdArgs) -> Result<(), Failure> {
    let mut cfg = load_cfg(&args.config)?;
    let ensemble = cfg.merge_str(args.ensemble, "ensemble");
    let coupled = cfg.merge_str(args.coupled, "coupled");
    let mc = cfg.merge(args.mc, "mc")?;
    let seed = cfg.merge(args.seed, "seed")?;
    let tol = cfg.merge(args.tol, "tol")?;
    let bracket = cfg.merge_str(args.bracket, "bracket");
    let grid_max = cfg.merge(args.grid_max, "grid-max")?;
    let bins = cfg.merge(args.bins, "bins")?;
    let trend_window = cfg.merge(args.trend_window, "trend-window")?;
    let max_iters = cfg.merge(args.max_iters, "max-iters")?;
    cfg.finish()?;

    let kind = resolve_ensemble(ensemble, coupled)?;
    let mc = mc.unwrap_or(200_000);
    let seed = seed.unwrap_or(7);
    let tol = tol.unwrap_or(0.02);
    let bracket = match bracket {
        Some(s) => parse_bracket(&s)?,
        None => (1.0, 2.2),
    };
    let grid = Grid::new(grid_max.unwrap_or(20.0), bins.unwrap_or(512))?;
    // Coupled chains need a longer patience window: the decoding wave takes
    // many flat-looking iterations to cross the chain.
    let trend_window = trend_window.unwrap_or(match kind {
        EnsembleKind::Uncoupled(_) => MacSettings::default().trend_window,
        EnsembleKind::Coupled(_) => 300,
    });
    let settings = MacSettings {
        max_iterations: max_iters.unwrap_or_else(|| MacSettings::default().max_iterations),
        trend_window,
        ..MacSettings::default()
    };

    // Gains run opposite to noise parameters — small h fails, large h
    // decodes — so the probe is negated to match the bisection convention.
    let outcome = bisect_stats(bracket.0, bracket.1, tol, &mut |h| {
        let (converged, its) = mac_probe_voted(&grid, &kind, h, mc, seed, &settings)?;
        Ok((!converged, its))
    })?;

    let params = vec![
        ("ensemble", ensemble_string(&kind)),
        ("mc", format!("{mc}")),
        ("seed", format!("{seed}")),
        ("tol", format!("{tol}")),
        ("bracket", format!("{}:{}", bracket.0, bracket.1)),
        ("grid-max", format!("{}", grid.grid_max())),
        ("bins", format!("{}", grid.bins())),
        ("trend-window", format!("{trend_window}")),
        ("max-iters", format!("{}", settings.max_iterations)),
    ];
    println!(
        "{}",
        emit::summary_line(
            "mac-threshold",
            &params,
            &format!(
                "threshold={} probes={} de_iterations={}",
                outcome.value, outcome.probes, outcome.iterations
            ),
        )
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// mac-acpr

pub fn mac_acpr(args: MacAcprArgs) -> Result<(), Failure> {
    let mut cfg = load_cfg(&args.config)?;
    let ensemble = cfg.merge_str(args.ensemble, "ensemble");
    let coupled = cfg.merge_str(args.coupled, "coupled");
    let grid_axis = cfg.merge_str(args.grid, "grid");
    let mc = cfg.merge(args.mc, "mc")?;
    let seed = cfg.merge(args.seed, "seed")?;
    let trend_window = cfg.merge(args.trend_window, "trend-window")?;
    let max_iters = cfg.merge(args.max_iters, "max-iters")?;
    let jobs = cfg.merge(args.jobs, "jobs")?;
    let out = cfg.merge_str(args.out, "out");
    let boundary_out = cfg.merge_str(args.boundary_out, "boundary-out");
    cfg.finish()?;

    let kind = resolve_ensemble(ensemble, coupled)?;
    let axis = match grid_axis {
        Some(s) => parse_axis(&s)?,
        None => GridAxis::new(0.6, 2.4, 0.02)?,
    };
    let mc = mc.unwrap_or(200_000);
    let seed = seed.unwrap_or(7);
    let jobs = jobs.unwrap_or_else(default_jobs);
    let grid = Grid::new(20.0, 512)?;
    let trend_window = trend_window.unwrap_or(match kind {
        EnsembleKind::Uncoupled(_) => MacSettings::default().trend_window,
        EnsembleKind::Coupled(_) => 300,
    });
    let settings = MacSettings {
        max_iterations: max_iters.unwrap_or_else(|| MacSettings::default().max_iterations),
        trend_window,
        ..MacSettings::default()
    };
    let out = out_path(out)?;

    // The MAC region is legitimately non-monotone in the interferer's gain
    // (moderate interference is harder than either extreme), so rows are
    // scanned in full rather than bisected, and the staircase audit is
    // advisory: violations are reported in the summary but the sweep still
    // exits 0.
    let probe = |h1: f64, h2: f64| -> Result<bool, CoreError> {
        let spec = MacSpec::new(h1, h2, mc, seed)?;
        Ok(match &kind {
            EnsembleKind::Uncoupled(dd) => run_mac(&grid, &spec, dd, &settings, 0)?.converged,
            EnsembleKind::Coupled(cs) => {
                run_mac_coupled(&grid, *cs, &spec, &settings, 0)?.converged
            }
        })
    };
    let rows = sweep_rows_parallel(
        &axis,
        &axis,
        Orientation::LargerBetter,
        RowStrategy::Scan,
        jobs,
        probe,
    )?;
    let region = assemble_region(&axis, &axis, Orientation::LargerBetter, rows)?;

    let params = vec![
        ("ensemble", ensemble_string(&kind)),
        (
            "grid",
            format!("{}:{}:{}", axis.start, axis.stop, axis.delta),
        ),
        ("mc", format!("{mc}")),
        ("seed", format!("{seed}")),
        ("trend-window", format!("{trend_window}")),
        ("max-iters", format!("{}", settings.max_iterations)),
        ("jobs", format!("{jobs}")),
        ("out", out.clone()),
    ];
    let meta = emit::metadata_line("mac-acpr", &params);
    emit::write_atomic(Path::new(&out), &emit::region_csv(&region, &meta))?;
    if let Some(bpath) = &boundary_out {
        emit::write_atomic(Path::new(bpath), &emit::boundary_csv(&region.boundary, &meta))?;
    }

    report_region("mac-acpr", &params, &region, "");
    Ok(())
}
