//! CSV rendering and companion plot scripts.

use std::cmp::Ordering;
use std::fmt::Write as _;

use hearability::e911::ComplianceRow;

/// Header of every sweep-style table.
pub const COLUMNS: &str = "beta_over_gamma_db,L,p,q,alpha,K,lambda,method,value,stderr";

/// Header of the E911 compliance table.
pub const COMPLIANCE_COLUMNS: &str = "L_min,p67,p90,pass,fixes,trials,no_fix_rate";

/// One line of a sweep-style table. `value = None` marks a row whose
/// evaluation failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub beta_over_gamma_db: f64,
    pub l: usize,
    pub p: f64,
    pub q: f64,
    pub alpha: f64,
    pub k: usize,
    pub lambda: f64,
    pub method: String,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
}

impl Row {
    fn order(&self, other: &Self) -> Ordering {
        self.method
            .cmp(&other.method)
            .then(self.beta_over_gamma_db.total_cmp(&other.beta_over_gamma_db))
            .then(self.l.cmp(&other.l))
            .then(self.p.total_cmp(&other.p))
            .then(self.q.total_cmp(&other.q))
            .then(self.alpha.total_cmp(&other.alpha))
            .then(self.k.cmp(&other.k))
            .then(self.lambda.total_cmp(&other.lambda))
    }
}

/// What a command produces.
#[derive(Debug, Clone)]
pub enum Table {
    Sweep(Vec<Row>),
    Compliance(Vec<ComplianceRow>),
}

/// Which column a plot script puts on the x-axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    BetaOverGamma,
    L,
    Alpha,
}

impl Axis {
    fn column(self) -> &'static str {
        match self {
            Axis::BetaOverGamma => "beta_over_gamma_db",
            Axis::L => "L",
            Axis::Alpha => "alpha",
        }
    }
}

/// Nine significant digits, plain decimal notation, shortest form.
pub fn fmt_num(x: f64) -> String {
    let rounded: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    let s = format!("{rounded}");
    if s == "-0" {
        "0".to_string()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

/// Renders a table; `timestamp` adds a leading `# generated` comment line.
pub fn render(table: &Table, timestamp: Option<u64>) -> String {
    let mut out = String::new();
    if let Some(t) = timestamp {
        let _ = writeln!(out, "# generated unix={t}");
    }
    match table {
        Table::Sweep(rows) => {
            let mut rows = rows.clone();
            rows.sort_by(Row::order);
            out.push_str(COLUMNS);
            out.push('\n');
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{},{}",
                    fmt_num(r.beta_over_gamma_db),
                    r.l,
                    fmt_num(r.p),
                    fmt_num(r.q),
                    fmt_num(r.alpha),
                    r.k,
                    fmt_num(r.lambda),
                    r.method,
                    opt(r.value),
                    opt(r.stderr),
                );
            }
        }
        Table::Compliance(rows) => {
            out.push_str(COMPLIANCE_COLUMNS);
            out.push('\n');
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.l_min,
                    opt(r.p67),
                    opt(r.p90),
                    r.pass,
                    r.fixes,
                    r.trials,
                    fmt_num(r.no_fix_rate),
                );
            }
        }
    }
    out
}

/// A standalone matplotlib script that reads `csv_name` from its own
/// directory and writes `png_name` next to it.
pub fn plot_script(table: &Table, axis: Axis, ylabel: &str, csv_name: &str, png_name: &str) -> String {
    let body = match table {
        Table::Sweep(_) => {
            let x = axis.column();
            let group: Vec<String> = COLUMNS
                .split(',')
                .filter(|c| *c != x && *c != "value" && *c != "stderr")
                .map(|c| format!("\"{c}\""))
                .collect();
            format!(
                r#"X = "{x}"
GROUP = [{group}]
curves = defaultdict(list)
for r in rows:
    if r["value"] == "":
        continue
    curves[tuple((c, r[c]) for c in GROUP)].append((float(r[X]), float(r["value"])))
constant = [c for c in GROUP if len({{dict(k)[c] for k in curves}}) <= 1]
for key, pts in sorted(curves.items()):
    pts.sort()
    label = ", ".join(f"{{c}}={{v}}" for c, v in key if c not in constant)
    plt.plot([a for a, _ in pts], [b for _, b in pts], marker=".", label=label)
plt.xlabel(X)
plt.ylabel("{ylabel}")
"#,
                group = group.join(", ")
            )
        }
        Table::Compliance(_) => r#"x = [int(r["L_min"]) for r in rows if r["p67"] != ""]
for col, limit in (("p67", 50.0), ("p90", 150.0)):
    y = [float(r[col]) for r in rows if r["p67"] != ""]
    line, = plt.plot(x, y, marker="o", label=col)
    plt.axhline(limit, color=line.get_color(), linestyle="--")
plt.xlabel("minimum hearability")
plt.ylabel("horizontal error (m)")
"#
        .to_string(),
    };
    format!(
        r##"import csv
import os
from collections import defaultdict

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
with open(os.path.join(HERE, "{csv_name}")) as f:
    rows = list(csv.DictReader(line for line in f if not line.startswith("#")))

{body}plt.grid(True, alpha=0.3)
plt.legend(fontsize="small")
plt.tight_layout()
plt.savefig(os.path.join(HERE, "{png_name}"), dpi=150)
"##
    )
}
