//! Output formatting shared by the experiment runners: trace CSVs, grid
//! CSVs, and the float convention used everywhere.

use std::io::Write;
use std::path::Path;

use mirror_pr_core::solver::SolverTrace;

/// All floating-point output uses 17 significant digits so results
/// round-trip exactly and reruns are byte-identical.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header of every per-trial trace CSV.
pub const TRACE_HEADER: &str = "iter,f,rel_error,L_k,backtracks";

/// Render a solver trace as CSV. Row `k` describes iterate `x_k`; the
/// `L_k`/`backtracks` columns describe the step that *produced* `x_k`, so
/// they are empty/zero on row 0. `L_k` is also empty for constant-step
/// runs, which have no backtracking state.
pub fn trace_to_csv(trace: &SolverTrace) -> String {
    let mut out = String::with_capacity(64 * trace.f_values.len());
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (k, &f) in trace.f_values.iter().enumerate() {
        let rel = trace
            .rel_errors
            .get(k)
            .map(|&r| fmt_float(r))
            .unwrap_or_default();
        let (l_k, backtracks) = if k == 0 {
            (String::new(), String::new())
        } else {
            let l = trace
                .l_history
                .get(k - 1)
                .map(|&l| fmt_float(l))
                .unwrap_or_default();
            let b = trace
                .backtrack_counts
                .get(k - 1)
                .map(|&b| b.to_string())
                .unwrap_or_else(|| "0".to_string());
            (l, b)
        };
        out.push_str(&format!("{k},{},{rel},{l_k},{backtracks}\n", fmt_float(f)));
    }
    out
}

/// One aggregated phase-diagram cell.
#[derive(Debug, Clone)]
pub struct GridCell {
    pub algorithm: String,
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub median_rel_error: f64,
}

pub const GRID_HEADER: &str = "algorithm,n,m,trials,successes,median_rel_error";

/// Render grid cells as CSV, sorted by (n, m, algorithm) so output is
/// independent of evaluation order.
pub fn grid_to_csv(cells: &mut [GridCell]) -> String {
    cells.sort_by(|a, b| {
        (a.n, a.m, a.algorithm.as_str()).cmp(&(b.n, b.m, b.algorithm.as_str()))
    });
    let mut out = String::new();
    out.push_str(GRID_HEADER);
    out.push('\n');
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            c.algorithm,
            c.n,
            c.m,
            c.trials,
            c.successes,
            fmt_float(c.median_rel_error)
        ));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(text.as_bytes())
}

/// Median of a slice (average of the two middle values for even length).
pub fn median(values: &[f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in median input"));
    let mid = v.len() / 2;
    if v.len() % 2 == 1 {
        v[mid]
    } else {
        0.5 * (v[mid - 1] + v[mid])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_full_precision() {
        let v = 0.1_f64 + 0.2_f64;
        let s = fmt_float(v);
        assert_eq!(s.parse::<f64>().unwrap(), v);
        assert!(s.contains('e'));
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median(&[3.0]), 3.0);
        assert_eq!(median(&[1.0, 2.0, 9.0]), 2.0);
        assert_eq!(median(&[1.0, 2.0, 3.0, 10.0]), 2.5);
    }

    #[test]
    fn grid_csv_is_sorted() {
        let mut cells = vec![
            GridCell {
                algorithm: "WF-spectral".into(),
                n: 16,
                m: 32,
                trials: 2,
                successes: 1,
                median_rel_error: 0.5,
            },
            GridCell {
                algorithm: "MD-spectral".into(),
                n: 16,
                m: 32,
                trials: 2,
                successes: 2,
                median_rel_error: 1e-7,
            },
            GridCell {
                algorithm: "MD-spectral".into(),
                n: 8,
                m: 64,
                trials: 2,
                successes: 2,
                median_rel_error: 1e-7,
            },
        ];
        let csv = grid_to_csv(&mut cells);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], GRID_HEADER);
        assert!(lines[1].starts_with("MD-spectral,8,64"));
        assert!(lines[2].starts_with("MD-spectral,16,32"));
        assert!(lines[3].starts_with("WF-spectral,16,32"));
    }
}
