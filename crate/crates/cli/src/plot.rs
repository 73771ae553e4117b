//! Gnuplot scripts for the emitted CSV files.

use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub enum PlotKind {
    /// Monte Carlo curve: columns t_us, M, R, D, D_err.
    Curve,
    /// Law: columns t_us, neg2lnD, branch_id.
    Law,
    /// Sweep: columns T_K, gamma_phi, gamma_phi_long.
    Sweep,
}

pub fn script_path(csv: &Path) -> PathBuf {
    csv.with_extension("gp")
}

pub fn script(kind: PlotKind, csv: &Path) -> String {
    let data = csv.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let png = csv.with_extension("png");
    let png = png.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let body = match kind {
        PlotKind::Curve => format!(
            "set xlabel 't (us)'\nset ylabel '-2 ln D'\nset logscale xy\n\
             plot '{data}' skip 1 using 1:(-2*log($4)) with linespoints title 'Monte Carlo'\n"
        ),
        PlotKind::Law => format!(
            "set xlabel 't (us)'\nset ylabel '-2 ln D'\nset logscale xy\n\
             plot '{data}' skip 1 using 1:2:3 with lines linecolor variable title 'law'\n"
        ),
        PlotKind::Sweep => format!(
            "set xlabel 'T (K)'\nset ylabel 'rate (1/us)'\nset logscale xy\n\
             plot '{data}' skip 1 using 1:2 with linespoints title 'Gamma_phi', \\\n     \
             '{data}' skip 1 using 1:3 with lines title 'long-time rate'\n"
        ),
    };
    format!("set datafile separator ','\nset terminal pngcairo size 900,600\nset output '{png}'\n{body}")
}

pub fn write_script(kind: PlotKind, csv: &Path) -> CliResult<PathBuf> {
    let path = script_path(csv);
    std::fs::write(&path, script(kind, csv))
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
