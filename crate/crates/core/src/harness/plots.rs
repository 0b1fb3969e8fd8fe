//! Emits a self-contained Python script that plots every run CSV in a
//! directory on a log-scale residual axis.

use crate::error::Result;
use std::fs;
use std::path::{Path, PathBuf};

const TEMPLATE: &str = r#"import csv
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
FILES = [
__FILES__]

fig, ax = plt.subplots(figsize=(7.5, 5.0))
for name in FILES:
    ks, rs = [], []
    with open(os.path.join(HERE, name)) as fh:
        for row in csv.DictReader(fh):
            r = float(row["residual"])
            if r > 0.0:
                ks.append(int(row["k"]))
                rs.append(r)
    if ks:
        ax.semilogy(ks, rs, label=name.rsplit(".", 1)[0])
if FILES:
    ax.legend(fontsize=7)
ax.set_xlabel("iteration")
ax.set_ylabel("distance to minimizer")
ax.grid(True, which="both", alpha=0.3)
fig.tight_layout()
out = os.path.join(HERE, "residuals.png")
fig.savefig(out, dpi=160)
print("wrote", out)
"#;

/// Writes `plot.py` into `dir`, wired to every `*.csv` there except
/// `summary.csv`. The script is valid even when no run CSVs exist yet.
pub fn emit_plot_script(dir: &Path) -> Result<PathBuf> {
    let mut names: Vec<String> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok())
        .filter_map(|entry| {
            let name = entry.file_name().to_string_lossy().into_owned();
            (name.ends_with(".csv") && name != "summary.csv").then_some(name)
        })
        .collect();
    names.sort();
    let listing: String = names.iter().map(|n| format!("    {n:?},\n")).collect();
    let script = TEMPLATE.replace("__FILES__", &listing);
    let path = dir.join("plot.py");
    fs::write(&path, script)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_lists_run_csvs_and_skips_the_summary() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a-tvab-eta0.01-s1.csv"), "k,residual,tracking_gap\n").unwrap();
        fs::write(dir.path().join("b-tvab-eta0.02-s1.csv"), "k,residual,tracking_gap\n").unwrap();
        fs::write(dir.path().join("summary.csv"), "method\n").unwrap();
        fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
        let path = emit_plot_script(dir.path()).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert!(text.contains("a-tvab-eta0.01-s1.csv"));
        assert!(text.contains("b-tvab-eta0.02-s1.csv"));
        assert!(!text.contains("\"summary.csv\""));
        assert!(!text.contains("notes.txt"));
    }

    #[test]
    fn empty_directory_still_yields_a_script() {
        let dir = tempfile::tempdir().unwrap();
        let path = emit_plot_script(dir.path()).unwrap();
        let text = fs::read_to_string(path).unwrap();
        assert!(text.contains("FILES = [\n]"));
    }
}
