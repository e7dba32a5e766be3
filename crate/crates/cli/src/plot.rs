//! gnuplot scripts, one per figure panel. Scripts are written out as text
//! and never run here.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    Ns,
    Us,
}

impl Axis {
    fn scale(self) -> &'static str {
        match self {
            Axis::Ns => "1e9",
            Axis::Us => "1e6",
        }
    }

    fn label(self) -> &'static str {
        match self {
            Axis::Ns => "t (ns)",
            Axis::Us => "t (μs)",
        }
    }
}

struct Figure {
    id: &'static str,
    title: &'static str,
    axis: Axis,
    /// Columns drawn from each file; with several files only the first column
    /// is drawn, once per file.
    columns: &'static [&'static str],
    overlay: bool,
}

const FIGURES: &[Figure] = &[
    Figure {
        id: "fig3a",
        title: "Concurrence and population of |f>, free evolution from |e1 g2>",
        axis: Axis::Ns,
        columns: &["C", "rho_ff"],
        overlay: false,
    },
    Figure {
        id: "fig3b",
        title: "Survival of |f> under repeated measurement",
        axis: Axis::Ns,
        columns: &["survival", "gaussian"],
        overlay: true,
    },
    Figure {
        id: "fig4a",
        title: "Free evolution from |L1 L2>",
        axis: Axis::Ns,
        columns: &["C", "rho_ss", "rho_aa"],
        overlay: false,
    },
    Figure {
        id: "fig4b",
        title: "Free evolution from |L1 L2>, populations of |p> and |q>",
        axis: Axis::Ns,
        columns: &["rho_pp", "rho_qq"],
        overlay: false,
    },
    Figure {
        id: "fig5a",
        title: "Resonant driving from |e1 e2>",
        axis: Axis::Us,
        columns: &["C", "rho44", "rho11"],
        overlay: false,
    },
    Figure {
        id: "fig5b",
        title: "Resonant driving, several values of Omega",
        axis: Axis::Us,
        columns: &["C"],
        overlay: true,
    },
    Figure {
        id: "fig5c",
        title: "Resonant driving, several values of J",
        axis: Axis::Us,
        columns: &["C"],
        overlay: true,
    },
    Figure {
        id: "fig5d",
        title: "Resonant driving, exchange-scale ripples",
        axis: Axis::Ns,
        columns: &["C"],
        overlay: false,
    },
    Figure {
        id: "fig6a",
        title: "Detuned driving, Delta_l = J",
        axis: Axis::Us,
        columns: &["C", "rho_ss", "rho_aa", "rho44"],
        overlay: false,
    },
    Figure {
        id: "fig6b",
        title: "Field switched off at the first maximum of rho_ss",
        axis: Axis::Us,
        columns: &["C"],
        overlay: true,
    },
];

pub fn figure_ids() -> Vec<&'static str> {
    FIGURES.iter().map(|f| f.id).collect()
}

/// A data file plus the legend entry it gets in overlays.
struct Series {
    path: PathBuf,
    label: String,
}

/// Sweep index files (`file,param,value`) expand to their listed CSVs,
/// resolved against the index's directory.
fn expand(paths: &[PathBuf]) -> Result<Vec<Series>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        let text = fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
        let mut lines = text.lines();
        if lines.next() != Some("file,param,value") {
            out.push(Series { path: p.clone(), label: file_stem(p) });
            continue;
        }
        let dir = p.parent().unwrap_or(Path::new(""));
        for line in lines.filter(|l| !l.is_empty()) {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(CliError::Usage(format!("{}: malformed index line `{line}`", p.display())));
            }
            let path = dir.join(f[0]);
            fs::metadata(&path).map_err(|e| CliError::io(&path, e))?;
            out.push(Series { path, label: format!("{} = {}", f[1], f[2]) });
        }
    }
    Ok(out)
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn header(path: &Path) -> Result<Vec<String>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let first = text.lines().next().unwrap_or("");
    Ok(first.split(',').map(str::to_string).collect())
}

fn quote(s: &str) -> String {
    format!("'{}'", s.replace('\'', "''"))
}

/// The gnuplot script for `figure` over the CSVs in `data`.
pub fn emit_plot_script(figure: &str, data: &[PathBuf]) -> Result<String, CliError> {
    let fig = FIGURES.iter().find(|f| f.id == figure).ok_or_else(|| {
        CliError::Usage(format!("unknown figure `{figure}`; known figures: {}", figure_ids().join(", ")))
    })?;
    if data.is_empty() {
        return Err(CliError::Usage(format!("{figure} needs at least one CSV")));
    }
    let series = expand(data)?;
    if series.is_empty() {
        return Err(CliError::Usage(format!("{figure}: the index lists no files")));
    }
    if !fig.overlay && series.len() > 1 {
        return Err(CliError::Usage(format!("{figure} plots a single CSV, got {}", series.len())));
    }
    for s in &series {
        let cols = header(&s.path)?;
        let wanted: &[&str] = if fig.overlay && series.len() > 1 { &fig.columns[..1] } else { fig.columns };
        for c in wanted {
            if !cols.iter().any(|h| h == c) {
                return Err(CliError::Usage(format!("{}: no `{c}` column", s.path.display())));
            }
        }
    }

    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "# {}: {}", fig.id, fig.title);
    let _ = writeln!(w, "set datafile separator ','");
    let _ = writeln!(w, "set key autotitle columnhead");
    let _ = writeln!(w, "set title {}", quote(fig.title));
    let _ = writeln!(w, "set xlabel {}", quote(fig.axis.label()));
    let _ = writeln!(w, "set yrange [0:1.05]");
    let _ = writeln!(w, "set key top right");
    let x = format!("($1*{})", fig.axis.scale());
    let mut items = Vec::new();
    if series.len() == 1 {
        let path = quote(&series[0].path.to_string_lossy());
        for (k, c) in fig.columns.iter().enumerate() {
            let dash = if k == 0 { "lw 2" } else { "lw 1 dt 2" };
            items.push(format!("{path} using {x}:(column('{c}')) with lines {dash} title '{c}'"));
        }
    } else {
        let c = fig.columns[0];
        for s in &series {
            let path = quote(&s.path.to_string_lossy());
            items.push(format!("{path} using {x}:(column('{c}')) with lines lw 2 title {}", quote(&s.label)));
        }
    }
    let _ = writeln!(w, "plot {}", items.join(", \\\n     "));
    Ok(out)
}
