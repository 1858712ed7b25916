//! Figure-ready data tables, the JSON report and a plain-text summary.
//!
//! `.dat` files carry two `#` header lines (column names, then a stamp naming
//! the study), followed by whitespace-separated rows. Numbers are written with
//! 17 significant digits so they parse back to the same bits; missing values
//! are written as `nan`.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use poem::estimator::{BetaOutcome, NormKind, NormSlopes, Norms};

use crate::study::StudyOutcome;

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{table}: column {column} has {got} rows, expected {want}")]
    Ragged {
        table: String,
        column: String,
        got: usize,
        want: usize,
    },
    #[error("{path}:{line}: {message}")]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
}

/// Named columns of equal length.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn push(&mut self, name: impl Into<String>, column: Vec<f64>) {
        self.names.push(name.into());
        self.columns.push(column);
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

/// Renders a table; `stamp` becomes the second header line.
pub fn render_dat(table: &Table, stamp: &str, label: &str) -> Result<String, OutputError> {
    let want = table.rows();
    for (name, col) in table.names.iter().zip(&table.columns) {
        if col.len() != want {
            return Err(OutputError::Ragged {
                table: label.to_string(),
                column: name.clone(),
                got: col.len(),
                want,
            });
        }
    }
    let mut out = format!("# {}\n# {}\n", table.names.join(" "), stamp);
    for i in 0..want {
        let row: Vec<String> = table.columns.iter().map(|c| format_value(c[i])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    Ok(out)
}

pub fn emit_dat(table: &Table, stamp: &str, path: &Path) -> Result<(), OutputError> {
    let text = render_dat(table, stamp, &path.display().to_string())?;
    write(path, &text)
}

/// Reads a file written by [`emit_dat`].
pub fn parse_dat(text: &str, origin: &Path) -> Result<Table, OutputError> {
    let mut lines = text.lines();
    let names_line = lines.next().unwrap_or_default();
    let Some(names) = names_line.strip_prefix('#') else {
        return Err(OutputError::Malformed {
            path: origin.to_path_buf(),
            line: 1,
            message: "missing column header".into(),
        });
    };
    let names: Vec<String> = names.split_whitespace().map(String::from).collect();
    if !lines.next().is_some_and(|l| l.starts_with('#')) {
        return Err(OutputError::Malformed {
            path: origin.to_path_buf(),
            line: 2,
            message: "missing stamp line".into(),
        });
    }
    let mut columns = vec![Vec::new(); names.len()];
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let bad = |message: String| OutputError::Malformed {
            path: origin.to_path_buf(),
            line: i + 3,
            message,
        };
        if fields.len() != names.len() {
            return Err(bad(format!("{} values for {} columns", fields.len(), names.len())));
        }
        for (col, f) in columns.iter_mut().zip(fields) {
            col.push(f.parse().map_err(|_| bad(format!("not a number: {f:?}")))?);
        }
    }
    Ok(Table { names, columns })
}

fn write(path: &Path, text: &str) -> Result<(), OutputError> {
    fs::write(path, text).map_err(|source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn log10_or_nan(v: f64) -> f64 {
    if v > 0.0 {
        v.log10()
    } else {
        f64::NAN
    }
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn order_label(p: f64) -> String {
    format!("{p}")
}

/// Log-norm columns of an optional per-window norm series.
fn norm_columns(t: &mut Table, prefix: &str, values: &[Option<Norms>]) {
    for kind in NormKind::ALL {
        let col = values
            .iter()
            .map(|n| n.map_or(f64::NAN, |n| log10_or_nan(n.get(kind))))
            .collect();
        t.push(format!("log10_{}_{prefix}", kind.name()), col);
    }
}

fn slope_columns(t: &mut Table, prefix: &str, slopes: Option<&NormSlopes>, len: usize) {
    for kind in NormKind::ALL {
        let col = match slopes {
            Some(s) => s.get(kind).iter().map(|v| opt(*v)).collect(),
            None => vec![f64::NAN; len],
        };
        t.push(format!("slope_{}_{prefix}", kind.name()), col);
    }
}

/// The tables written for a study, keyed by file name.
pub fn tables(outcome: &StudyOutcome) -> Vec<(&'static str, Table)> {
    let r = &outcome.report;
    let log_h: Vec<f64> = r.windows.iter().map(|w| w.log_h).collect();
    // Slopes are attributed to the coarser window of each pair.
    let slope_h: Vec<f64> = log_h.iter().take(log_h.len().saturating_sub(1)).copied().collect();
    let mut out = Vec::new();

    let mut t = Table::default();
    t.push("log10_h", log_h.clone());
    for (m, p) in r.orders.iter().enumerate() {
        let col = r.windows.iter().map(|w| log10_or_nan(w.term_norms[m].l2)).collect();
        t.push(format!("log10_L2_term_p{}", order_label(*p)), col);
    }
    out.push(("term_norms.dat", t));

    let mut t = Table::default();
    t.push("log10_h", slope_h.clone());
    for (m, p) in r.orders.iter().enumerate() {
        t.push(
            format!("slope_L2_term_p{}", order_label(*p)),
            r.term_slopes[m].iter().map(|v| opt(*v)).collect(),
        );
    }
    out.push(("term_slopes.dat", t));

    let mut t = Table::default();
    t.push("log10_h", log_h.clone());
    let est: Vec<Option<Norms>> = r.windows.iter().map(|w| Some(w.estimated_error)).collect();
    norm_columns(&mut t, "estimated", &est);
    let exact: Vec<Option<Norms>> = r.windows.iter().map(|w| w.exact_error_level).collect();
    norm_columns(&mut t, "exact", &exact);
    let est_shared: Vec<Option<Norms>> =
        r.windows.iter().map(|w| Some(w.estimated_error_shared)).collect();
    norm_columns(&mut t, "estimated_shared", &est_shared);
    let exact_shared: Vec<Option<Norms>> = r.windows.iter().map(|w| w.exact_error_shared).collect();
    norm_columns(&mut t, "exact_shared", &exact_shared);
    let extrap: Vec<Option<Norms>> = r.windows.iter().map(|w| w.extrapolation_error).collect();
    norm_columns(&mut t, "extrapolated", &extrap);
    out.push(("errors.dat", t));

    let mut t = Table::default();
    let n = slope_h.len();
    t.push("log10_h", slope_h.clone());
    slope_columns(&mut t, "estimated", Some(&r.estimated_error_slopes), n);
    slope_columns(&mut t, "exact", r.exact_error_slopes.as_ref(), n);
    slope_columns(&mut t, "extrapolated", r.extrapolation_error_slopes.as_ref(), n);
    out.push(("error_slopes.dat", t));

    let mut t = Table::default();
    t.push("log10_h", log_h.clone());
    t.push("beta_tilde", r.windows.iter().map(|w| opt(w.beta.beta_tilde())).collect());
    t.push(
        "asymptotic",
        r.windows
            .iter()
            .map(|w| match w.beta {
                BetaOutcome::Determined { asymptotic, .. } => f64::from(u8::from(asymptotic)),
                BetaOutcome::Indeterminate => f64::NAN,
            })
            .collect(),
    );
    out.push(("beta.dat", t));

    if outcome.midas {
        let mut t = Table::default();
        t.push("log10_h", outcome.midas_windows.iter().map(|w| w.log_h).collect());
        for (m, p) in r.orders.iter().enumerate() {
            t.push(
                format!("log10_L2_term_p{}_shared", order_label(*p)),
                outcome.midas_windows.iter().map(|w| log10_or_nan(w.shared_l2[m])).collect(),
            );
        }
        for (m, p) in r.orders.iter().enumerate() {
            t.push(
                format!("log10_L2_term_p{}_objective", order_label(*p)),
                outcome
                    .midas_windows
                    .iter()
                    .map(|w| w.objective_l2.as_ref().map_or(f64::NAN, |v| log10_or_nan(v[m])))
                    .collect(),
            );
        }
        out.push(("midas.dat", t));
    }
    out
}

fn stamp(outcome: &StudyOutcome) -> String {
    let orders: Vec<String> = outcome.report.orders.iter().map(|p| order_label(*p)).collect();
    format!(
        "poem {} study={} ratio={} orders=({}) midas={}",
        env!("CARGO_PKG_VERSION"),
        outcome.name,
        outcome.plan.ratio,
        orders.join(","),
        if outcome.midas { "on" } else { "off" }
    )
}

/// Writes every output file into `dir` (created if needed) and returns their paths.
pub fn write_all(outcome: &StudyOutcome, dir: &Path) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(dir).map_err(|source| OutputError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let stamp = stamp(outcome);
    let mut written = Vec::new();
    for (name, table) in tables(outcome) {
        let path = dir.join(name);
        emit_dat(&table, &stamp, &path)?;
        written.push(path);
    }
    if let Some(it) = &outcome.iteration {
        let path = dir.join("orders_trail.json");
        write(&path, &(serde_json::to_string_pretty(it)? + "\n"))?;
        written.push(path);
    }
    let path = dir.join("report.json");
    write(&path, &(serde_json::to_string_pretty(outcome)? + "\n"))?;
    written.push(path);
    let path = dir.join("summary.txt");
    write(&path, &summary(outcome))?;
    written.push(path);
    Ok(written)
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.prec$}"))
}

/// Human-readable digest of a study.
pub fn summary(outcome: &StudyOutcome) -> String {
    let r = &outcome.report;
    let mut s = String::new();
    let _ = writeln!(s, "study       {}", outcome.name);
    let _ = writeln!(s, "ratio       {}", outcome.plan.ratio);
    let _ = writeln!(s, "orders      {:?}", r.orders);
    let _ = writeln!(s, "midas       {}", if outcome.midas { "on" } else { "off" });
    let _ = writeln!(s, "work units  {}", outcome.work_units);
    let _ = writeln!(s);
    let mut head = format!("{:>8} {:>7}", "log10 h", "points");
    for p in &r.orders {
        let _ = write!(head, " {:>12}", format!("L2 p={p}"));
    }
    let _ = write!(head, " {:>12} {:>12} {:>12} {:>10}", "L2 est.", "L2 exact", "L2 extrap.", "beta");
    let _ = writeln!(s, "{head}");
    for w in &r.windows {
        let mut line = format!("{:>8.4} {:>7}", w.log_h, w.support);
        for n in &w.term_norms {
            let _ = write!(line, " {:>12.4e}", n.l2);
        }
        let beta = match w.beta {
            BetaOutcome::Determined { beta_tilde, asymptotic } => {
                format!("{beta_tilde:.4}{}", if asymptotic { "*" } else { "" })
            }
            BetaOutcome::Indeterminate => "indet.".into(),
        };
        let _ = write!(
            line,
            " {:>12.4e} {:>12} {:>12} {:>10}",
            w.estimated_error.l2,
            w.exact_error_level.map_or("-".into(), |n| format!("{:.4e}", n.l2)),
            w.extrapolation_error.map_or("-".into(), |n| format!("{:.4e}", n.l2)),
            beta
        );
        let _ = writeln!(s, "{line}");
    }
    let _ = writeln!(s, "(* marks windows in the asymptotic range, beta < {})", r.beta_threshold);
    let _ = writeln!(s);
    let _ = writeln!(s, "term slopes (L2, attributed to the coarser window)");
    for (i, w) in r.windows.iter().take(r.windows.len().saturating_sub(1)).enumerate() {
        let slopes: Vec<String> = r.term_slopes.iter().map(|t| fmt_opt(t[i], 4)).collect();
        let _ = writeln!(s, "  {:>8.4}  {}", w.log_h, slopes.join("  "));
    }
    if let Some(check) = &outcome.check {
        let _ = writeln!(s);
        let _ = writeln!(s, "order check (tolerance {})", check.tolerance);
        for v in &check.verdicts {
            let _ = writeln!(
                s,
                "  p = {:<5} observed {:>7.4}  {}",
                v.preset,
                v.observed_slope,
                if v.matches { "matches" } else { "deviates" }
            );
        }
        if let Some(mu) = check.mu {
            let _ = writeln!(s, "  suggested missing order {mu}");
        }
    }
    if let Some(it) = &outcome.iteration {
        let _ = writeln!(s);
        let trail: Vec<String> = it.trail.iter().map(|st| format!("{:?}", st.orders)).collect();
        let _ = writeln!(
            s,
            "order iteration {} after {} step(s): {}  final {:?}",
            if it.converged { "converged" } else { "did not converge" },
            it.trail.len(),
            trail.join(" -> "),
            it.final_orders
        );
    }
    if !outcome.midas_windows.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "midas: term L2 at shared / objective points");
        for w in &outcome.midas_windows {
            let obj = w.objective_l2.clone().unwrap_or_default();
            let pairs: Vec<String> = w
                .shared_l2
                .iter()
                .enumerate()
                .map(|(m, sh)| format!("{sh:.4e} / {}", obj.get(m).map_or("-".into(), |o| format!("{o:.4e}"))))
                .collect();
            let _ = writeln!(
                s,
                "  {:>8.4}  shared {:>6}  objective {:>6}  {}",
                w.log_h,
                w.shared_points,
                w.objective_points,
                pairs.join("  ")
            );
        }
    }
    if !outcome.gre.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "observed-order baseline (all-level shared points)");
        for g in &outcome.gre {
            let _ = writeln!(
                s,
                "  {:>8.4}  order mean {} range [{}, {}]  undefined {}/{}  L2 est. {}  L2 exact {}",
                g.log_h,
                fmt_opt(g.mean_order, 4),
                fmt_opt(g.min_order, 3),
                fmt_opt(g.max_order, 3),
                g.undefined,
                g.points,
                g.estimated_error_l2.map_or("-".into(), |v| format!("{v:.4e}")),
                g.exact_error_l2.map_or("-".into(), |v| format!("{v:.4e}")),
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::default();
        t.push("log10_h", vec![-2.0, -2.3010299956639813, -2.6020599913279625]);
        t.push("a", vec![0.1, f64::NAN, -1.0 / 3.0]);
        t.push("b", vec![f64::MIN_POSITIVE, 1e300, std::f64::consts::PI]);
        t
    }

    #[test]
    fn three_windows_five_lines() {
        let text = render_dat(&sample(), "stamp", "t").unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("# log10_h a b\n# stamp\n"));
        assert!(text.lines().nth(3).unwrap().contains("nan"));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let t = sample();
        let back = parse_dat(&render_dat(&t, "s", "t").unwrap(), Path::new("t")).unwrap();
        assert_eq!(back.names, t.names);
        for (a, b) in back.columns.iter().zip(&t.columns) {
            for (x, y) in a.iter().zip(b) {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
    }

    #[test]
    fn ragged_columns_rejected() {
        let mut t = sample();
        t.columns[1].pop();
        assert!(matches!(render_dat(&t, "s", "t"), Err(OutputError::Ragged { .. })));
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(format_value(0.1), "1.0000000000000001e-1");
        assert_eq!(format_value(-2.0), "-2.0000000000000000e0");
    }
}
