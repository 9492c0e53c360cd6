//! Output plumbing: atomic file writes, the CSV builders for each schema,
//! and the metadata trailer every emitted file carries.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use coupled_de_core::densities::Quantized;
use coupled_de_core::exit_analysis::CurvePoint;
use coupled_de_core::regions::Region;

/// Write `content` to `path` atomically: a sibling temp file is written,
/// synced, and renamed over the target, so readers never observe a partial
/// file.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let tmp: PathBuf = {
        let mut name = path.file_name().unwrap_or_default().to_os_string();
        name.push(".tmp");
        path.with_file_name(name)
    };
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// The `# coupled-de <version> | <command + resolved flags>` line appended
/// to every emitted file, so a run can be reproduced from its output alone.
pub fn metadata_line(command: &str, params: &[(&str, String)]) -> String {
    let mut s = format!("# coupled-de {} | {command}", env!("CARGO_PKG_VERSION"));
    for (k, v) in params {
        s.push_str(&format!(" --{k} {v}"));
    }
    s.push('\n');
    s
}

/// The one-line stdout summary: `<command> <key-params> => <value>`.
pub fn summary_line(command: &str, params: &[(&str, String)], value: &str) -> String {
    let mut s = String::from(command);
    for (k, v) in params {
        s.push_str(&format!(" {k}={v}"));
    }
    s.push_str(&format!(" => {value}"));
    s
}

/// `x,channel_param,exit_value` rows for EXIT/GEXIT curves.
pub fn curve_csv(points: &[CurvePoint], meta: &str) -> String {
    let mut s = String::from("x,channel_param,exit_value\n");
    for p in points {
        s.push_str(&format!("{},{},{}\n", p.x, p.h_channel, p.h_exit));
    }
    s.push_str(meta);
    s
}

/// `param1,param2,achievable` rows for a region lattice (1 = achievable).
pub fn region_csv(region: &Region, meta: &str) -> String {
    let v1 = region.axis1.values();
    let v2 = region.axis2.values();
    let mut s = String::from("param1,param2,achievable\n");
    for (i, a1) in v1.iter().enumerate() {
        for (j, a2) in v2.iter().enumerate() {
            s.push_str(&format!(
                "{a1},{a2},{}\n",
                if region.at(i, j) { 1 } else { 0 }
            ));
        }
    }
    s.push_str(meta);
    s
}

/// `param1,param2` rows for a region boundary.
pub fn boundary_csv(boundary: &[(f64, f64)], meta: &str) -> String {
    let mut s = String::from("param1,param2\n");
    for (a1, a2) in boundary {
        s.push_str(&format!("{a1},{a2}\n"));
    }
    s.push_str(meta);
    s
}

/// `position,pe1,pe2` rows for a coupled-chain error-probability profile.
pub fn profile_csv(profile: &[(i64, f64, f64)], meta: &str) -> String {
    let mut s = String::from("position,pe1,pe2\n");
    for (pos, pe1, pe2) in profile {
        s.push_str(&format!("{pos},{pe1},{pe2}\n"));
    }
    s.push_str(meta);
    s
}

/// Columnar density dump: grid header comments, `bin_center,mass` rows, and
/// the metadata trailer.
pub fn density_csv(q: &Quantized, meta: &str) -> String {
    let delta = q.delta();
    let mut s = format!(
        "# grid_max {}\n# bins {}\n# mass_pos_inf {}\n# mass_neg_inf {}\nbin_center,mass\n",
        q.grid_max, q.bins, q.mass_pos_inf, q.mass_neg_inf
    );
    for (j, mass) in q.mass.iter().enumerate() {
        s.push_str(&format!("{},{}\n", q.center(j, delta), mass));
    }
    s.push_str(meta);
    s
}
