//! Standalone matplotlib scripts with the record data embedded.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::Mode;
use crate::error::{BenchError, Result};
use crate::record::BenchRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// Log-log absolute error versus total sweep time.
    Fig3,
    /// (a) expectation value and (b) absolute error versus total sweep time.
    Fig4,
}

impl std::str::FromStr for Figure {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig3" => Ok(Figure::Fig3),
            "fig4" => Ok(Figure::Fig4),
            other => Err(BenchError::Config(format!("unknown figure `{other}` (expected fig3 or fig4)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub label: String,
    pub t: Vec<f64>,
    pub value: Vec<f64>,
    pub abs_error: Vec<f64>,
    pub exact: f64,
}

fn label(r: &BenchRecord, multiple_observables: bool) -> String {
    let base = match r.mode {
        Mode::Qaa => "QAA".to_string(),
        Mode::Aev => match r.dephasing.as_str() {
            "ideal" => "AEV ideal".to_string(),
            "none" => "AEV T_d=0".to_string(),
            kind => format!("AEV {kind} T_d={}", r.t_d.unwrap_or(f64::NAN)),
        },
    };
    if multiple_observables {
        format!("{base} ({})", r.observable)
    } else {
        base
    }
}

/// Groups successful records into curves sorted by `T`.
pub fn curves(records: &[BenchRecord]) -> Result<Vec<Curve>> {
    let ok: Vec<&BenchRecord> = records.iter().filter(|r| r.is_ok() && r.value.is_some()).collect();
    if ok.is_empty() {
        return Err(BenchError::Records("no successful records to plot".into()));
    }
    let multiple = ok.iter().any(|r| r.observable != ok[0].observable);
    let mut map: BTreeMap<String, Vec<&BenchRecord>> = BTreeMap::new();
    for r in ok {
        map.entry(r.curve()).or_default().push(r);
    }
    let mut out: Vec<Curve> = map
        .into_values()
        .map(|mut rs| {
            rs.sort_by(|a, b| a.t.total_cmp(&b.t));
            Curve {
                label: label(rs[0], multiple),
                t: rs.iter().map(|r| r.t).collect(),
                value: rs.iter().map(|r| r.value.unwrap_or(f64::NAN)).collect(),
                abs_error: rs.iter().map(|r| r.abs_error.unwrap_or(f64::NAN)).collect(),
                exact: rs[0].exact.unwrap_or(f64::NAN),
            }
        })
        .collect();
    // QAA first, then AEV by increasing dephasing strength.
    let rank = |l: &str| {
        if l.starts_with("QAA") {
            0
        } else if l.starts_with("AEV T_d=0") {
            1
        } else if l.starts_with("AEV ideal") {
            3
        } else {
            2
        }
    };
    out.sort_by(|a, b| rank(&a.label).cmp(&rank(&b.label)).then(a.label.cmp(&b.label)));
    Ok(out)
}

fn py_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        "float('nan')".into()
    }
}

fn py_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|&x| py_float(x)).collect();
    format!("[{}]", items.join(", "))
}

/// Python source for `figure`, saving to `output` (e.g. `fig3.pdf`).
pub fn plot_script(records: &[BenchRecord], figure: Figure, output: &str) -> Result<String> {
    let curves = curves(records)?;
    let mut s = String::new();
    writeln!(s, "#!/usr/bin/env python3").unwrap();
    writeln!(s, "# Generated by `aev plot`; data embedded below.").unwrap();
    writeln!(s, "import matplotlib").unwrap();
    writeln!(s, "matplotlib.use(\"Agg\")").unwrap();
    writeln!(s, "import matplotlib.pyplot as plt\n").unwrap();
    writeln!(s, "CURVES = [").unwrap();
    for c in &curves {
        writeln!(
            s,
            "    {{\"label\": {:?}, \"T\": {}, \"value\": {}, \"abs_error\": {}, \"exact\": {}}},",
            c.label,
            py_list(&c.t),
            py_list(&c.value),
            py_list(&c.abs_error),
            py_float(c.exact),
        )
        .unwrap();
    }
    writeln!(s, "]\n").unwrap();
    match figure {
        Figure::Fig3 => {
            s.push_str(
                "fig, ax = plt.subplots(figsize=(5, 4))\n\
                 for c in CURVES:\n\
                 \x20   pts = [(t, e) for t, e in zip(c[\"T\"], c[\"abs_error\"]) if e > 0]\n\
                 \x20   if pts:\n\
                 \x20       ax.loglog(*zip(*pts), marker=\".\", label=c[\"label\"])\n\
                 ax.set_xlabel(\"total sweep time T\")\n\
                 ax.set_ylabel(\"absolute error\")\n\
                 ax.legend()\n",
            );
        }
        Figure::Fig4 => {
            s.push_str(
                "fig, (ax_a, ax_b) = plt.subplots(1, 2, figsize=(10, 4))\n\
                 for c in CURVES:\n\
                 \x20   ax_a.semilogx(c[\"T\"], c[\"value\"], marker=\".\", label=c[\"label\"])\n\
                 \x20   pts = [(t, e) for t, e in zip(c[\"T\"], c[\"abs_error\"]) if e > 0]\n\
                 \x20   if pts:\n\
                 \x20       ax_b.loglog(*zip(*pts), marker=\".\", label=c[\"label\"])\n\
                 ax_a.axhline(CURVES[0][\"exact\"], color=\"k\", ls=\"--\", lw=0.8, label=\"exact\")\n\
                 ax_a.set_xlabel(\"total sweep time T\")\n\
                 ax_a.set_ylabel(\"(a) expectation value\")\n\
                 ax_b.set_xlabel(\"total sweep time T\")\n\
                 ax_b.set_ylabel(\"(b) absolute error\")\n\
                 ax_a.legend()\n",
            );
        }
    }
    writeln!(s, "fig.tight_layout()").unwrap();
    writeln!(s, "fig.savefig({output:?})").unwrap();
    Ok(s)
}
