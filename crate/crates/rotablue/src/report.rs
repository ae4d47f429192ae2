//! Serializable reports and their JSON, CSV and pretty renderings.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use rotablue_core::checks::Check;
use rotablue_core::recurrence::{recurrence_coeffs, Outcome};
use rotablue_core::{Analysis, Complex64, OracleComparison, Tolerances};

use crate::simulate::SimulationReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotEvaluated,
}

impl Verdict {
    fn from_bool(pass: bool) -> Self {
        if pass {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Pass => "pass",
            Self::Fail => "fail",
            Self::NotEvaluated => "not-evaluated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Smallest pairwise root distance; absent with a single root.
    pub min_root_separation: Option<f64>,
    pub interval_distance: Option<f64>,
    pub rank: Option<usize>,
    pub expected_rank: Option<usize>,
    pub condition_number: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub root: f64,
    pub s_system: f64,
    pub conjugate_asymmetry: f64,
    pub a_imaginary: f64,
    pub r_imaginary: f64,
    pub r_gap: f64,
    pub variance_imaginary: f64,
}

/// Everything `analyze` found, up to the first failed assumption.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub pattern: String,
    pub rho: f64,
    pub n: usize,
    pub p: usize,
    /// Monomial coefficients of `Q_p`, constant term first.
    pub qp: Vec<f64>,
    pub roots: Vec<ComplexValue>,
    pub ds: Vec<ComplexValue>,
    pub a: Vec<f64>,
    pub r: Vec<Vec<f64>>,
    pub variance: Option<f64>,
    pub assumption1: Verdict,
    pub assumption2: Verdict,
    pub diagnostics: Diagnostics,
    pub residuals: Option<ResidualReport>,
}

impl SolutionReport {
    pub fn from_analysis(analysis: &Analysis) -> Self {
        let params = &analysis.params;
        let pattern = params.pattern();
        let a1 = &analysis.assumption_one;
        let ds: Vec<Complex64> = analysis
            .spectrum
            .as_ref()
            .map(|s| s.ds().to_vec())
            .unwrap_or_default();
        let (a, r, variance, residuals) = match &analysis.solution {
            Some(sol) => {
                let res = sol.residuals();
                (
                    sol.a().to_vec(),
                    sol.r().to_vec(),
                    Some(sol.variance()),
                    Some(ResidualReport {
                        root: res.root,
                        s_system: res.s_system,
                        conjugate_asymmetry: res.conjugate_asymmetry,
                        a_imaginary: res.a_imaginary,
                        r_imaginary: res.r_imaginary,
                        r_gap: res.r_gap,
                        variance_imaginary: res.variance_imaginary,
                    }),
                )
            }
            // the coefficients depend on the d_m alone
            None => (
                recurrence_coeffs(&ds, &Tolerances::default()).unwrap_or_default(),
                Vec::new(),
                None,
                None,
            ),
        };
        let a2 = analysis.assumption_two.as_ref();
        Self {
            pattern: pattern.to_bit_string(),
            rho: params.rho(),
            n: pattern.len(),
            p: pattern.coverage(),
            qp: analysis.qp.coeffs().to_vec(),
            roots: analysis.roots.iter().map(|&x| x.into()).collect(),
            ds: ds.into_iter().map(Into::into).collect(),
            a,
            r,
            variance,
            assumption1: Verdict::from_bool(a1.pass),
            assumption2: a2.map_or(Verdict::NotEvaluated, |d| Verdict::from_bool(d.pass)),
            diagnostics: Diagnostics {
                min_root_separation: finite(a1.min_separation),
                interval_distance: finite(a1.interval_distance),
                rank: a2.map(|d| d.rank),
                expected_rank: a2.map(|d| d.expected),
                condition_number: a2.and_then(|d| finite(d.condition_number())),
            },
            residuals,
        }
    }

    pub fn outcome(&self) -> Outcome {
        match (self.assumption1, self.assumption2) {
            (Verdict::Pass, Verdict::Pass) => Outcome::Solved,
            (Verdict::Pass, _) => Outcome::AssumptionTwoFailed,
            _ => Outcome::AssumptionOneFailed,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// One row per `(i, slot)` of the vector coefficients, slots 1-based.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["i", "slot", "observed", "r"]).unwrap();
        let observed: Vec<bool> = self.pattern.chars().map(|c| c == '1').collect();
        for (i, ri) in self.r.iter().enumerate() {
            for (slot, v) in ri.iter().enumerate() {
                w.write_record([
                    i.to_string(),
                    (slot + 1).to_string(),
                    u8::from(observed[slot]).to_string(),
                    v.to_string(),
                ])
                .unwrap();
            }
        }
        finish_csv(w)
    }

    /// Coefficients first, then the vector coefficients as columns.
    pub fn to_pretty(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "pattern {}  N = {}  p = {}  rho = {}",
            self.pattern,
            self.n,
            self.p,
            sig6(self.rho)
        );
        let _ = writeln!(out, "assumption I: {}", self.assumption1.as_str());
        let _ = writeln!(out, "assumption II: {}", self.assumption2.as_str());
        let _ = writeln!(out);
        for (m, x) in self.roots.iter().enumerate() {
            let d = self.ds.get(m).map_or(String::new(), |d| {
                format!("  d_{} = {}", m + 1, complex6(d))
            });
            let _ = writeln!(out, "x_{} = {}{}", m + 1, complex6(x), d);
        }
        if !self.a.is_empty() {
            let _ = writeln!(out);
            for (k, a) in self.a.iter().enumerate() {
                let _ = writeln!(out, "a_{} = {}", k + 1, sig6(*a));
            }
        }
        if !self.r.is_empty() {
            let _ = writeln!(out);
            let cells: Vec<Vec<String>> = self
                .r
                .iter()
                .map(|ri| ri.iter().map(|&v| sig6(v)).collect())
                .collect();
            let width = cells
                .iter()
                .flatten()
                .map(String::len)
                .max()
                .unwrap_or(0)
                .max(4);
            let mut header = String::from("slot");
            for i in 0..cells.len() {
                let _ = write!(header, "  {:>width$}", format!("r_{i}"));
            }
            let _ = writeln!(out, "{header}");
            for slot in 0..self.n {
                let _ = write!(out, "{:>4}", slot + 1);
                for col in &cells {
                    let _ = write!(out, "  {:>width$}", col[slot]);
                }
                let _ = writeln!(out);
            }
        }
        if let Some(v) = self.variance {
            let _ = writeln!(out);
            let _ = writeln!(out, "variance = {}", sig6(v));
        }
        out
    }
}

/// `x` with 6 significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn complex6(z: &ComplexValue) -> String {
    if z.im == 0.0 {
        sig6(z.re)
    } else {
        let sign = if z.im < 0.0 { '-' } else { '+' };
        format!("{} {} {}i", sig6(z.re), sign, sig6(z.im.abs()))
    }
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub variance: f64,
    pub variance_gap: f64,
    pub max_weight_gap: f64,
    pub pass: bool,
}

impl From<&OracleComparison> for OracleReport {
    fn from(c: &OracleComparison) -> Self {
        Self {
            horizon: c.horizon,
            variance: c.variance,
            variance_gap: c.variance_gap,
            max_weight_gap: c.max_weight_gap,
            pass: c.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    /// Absent when the measured value is not finite.
    pub value: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

impl From<&Check> for CheckReport {
    fn from(c: &Check) -> Self {
        Self {
            name: c.name.to_string(),
            value: finite(c.value),
            tolerance: c.tolerance,
            pass: c.pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub pattern: String,
    pub rho: f64,
    pub oracle: OracleReport,
    pub checks: Vec<CheckReport>,
    pub pass: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "value", "tolerance", "pass"])
            .unwrap();
        let o = &self.oracle;
        w.write_record([
            "oracle-weights".into(),
            o.max_weight_gap.to_string(),
            rotablue_core::oracle::WEIGHT_TOLERANCE.to_string(),
            o.pass.to_string(),
        ])
        .unwrap();
        w.write_record([
            "oracle-variance".into(),
            o.variance_gap.to_string(),
            rotablue_core::oracle::VARIANCE_TOLERANCE.to_string(),
            o.pass.to_string(),
        ])
        .unwrap();
        for c in &self.checks {
            w.write_record([
                c.name.clone(),
                c.value.map_or("nan".into(), |v| v.to_string()),
                c.tolerance.to_string(),
                c.pass.to_string(),
            ])
            .unwrap();
        }
        finish_csv(w)
    }

    pub fn to_pretty(&self) -> String {
        let mark = |p: bool| if p { "PASS" } else { "FAIL" };
        let mut out = String::new();
        let o = &self.oracle;
        let _ = writeln!(out, "pattern {}  rho = {}", self.pattern, sig6(self.rho));
        let _ = writeln!(
            out,
            "{}  oracle T = {}: weight gap {}, variance gap {}",
            mark(o.pass),
            o.horizon,
            sig6(o.max_weight_gap),
            sig6(o.variance_gap)
        );
        for c in &self.checks {
            let value = c.value.map_or("nan".into(), sig6);
            let _ = writeln!(
                out,
                "{}  {:<22} {} (tol {})",
                mark(c.pass),
                c.name,
                value,
                sig6(c.tolerance)
            );
        }
        let _ = writeln!(out, "overall: {}", mark(self.pass));
        out
    }
}

impl SimulationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(self).unwrap();
        finish_csv(w)
    }

    pub fn to_pretty(&self) -> String {
        format!(
            "replications {}  occasions {}  seed {}\n\
             theoretical variance {}\n\
             empirical variance   {} (se {})  {}\n\
             bias                 {} (se {})  {}\n",
            self.replications,
            self.occasions,
            self.seed,
            sig6(self.theoretical_variance),
            sig6(self.empirical_variance),
            sig6(self.stderr),
            if self.pass { "PASS" } else { "FAIL" },
            sig6(self.bias),
            sig6(self.bias_stderr),
            if self.bias_pass { "PASS" } else { "FAIL" },
        )
    }
}

/// One grid point of a `rho` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub assumption1: Verdict,
    pub assumption2: Verdict,
    pub pass: bool,
    pub variance: Option<f64>,
    pub a: Vec<f64>,
    pub error: Option<String>,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let p = rows.iter().map(|r| r.a.len()).max().unwrap_or(0);
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = ["rho", "assumption1", "assumption2", "status", "variance"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=p).map(|k| format!("a{k}")));
    header.push("error".into());
    w.write_record(&header).unwrap();
    for row in rows {
        let mut rec = vec![
            row.rho.to_string(),
            row.assumption1.as_str().into(),
            row.assumption2.as_str().into(),
            if row.pass { "PASS" } else { "FAIL" }.into(),
            row.variance.map_or(String::new(), |v| v.to_string()),
        ];
        rec.extend((0..p).map(|k| row.a.get(k).map_or(String::new(), |v| v.to_string())));
        rec.push(row.error.clone().unwrap_or_default());
        w.write_record(&rec).unwrap();
    }
    finish_csv(w)
}

pub fn sweep_pretty(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    for row in rows {
        let a: Vec<String> = row.a.iter().map(|&v| sig6(v)).collect();
        let _ = writeln!(
            out,
            "rho {:>8}  {}  I:{} II:{}  variance {}  a = [{}]{}",
            sig6(row.rho),
            if row.pass { "PASS" } else { "FAIL" },
            row.assumption1.as_str(),
            row.assumption2.as_str(),
            row.variance.map_or("-".into(), sig6),
            a.join(", "),
            row.error
                .as_ref()
                .map_or(String::new(), |e| format!("  ({e})")),
        );
    }
    out
}
