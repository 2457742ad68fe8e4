use serde::Serialize;
use stoklab_core::McEstimate;

/// Multiplier on the standard error in Monte Carlo tolerances.
pub const Z: f64 = 4.0;

/// How a row's estimate is compared with its oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Relation {
    /// |estimate − oracle| ≤ tolerance.
    Eq,
    /// estimate ≤ oracle + tolerance.
    Le,
    /// estimate ≥ oracle − tolerance.
    Ge,
}

impl Relation {
    pub fn as_str(self) -> &'static str {
        match self {
            Relation::Eq => "eq",
            Relation::Le => "le",
            Relation::Ge => "ge",
        }
    }

    pub fn holds(self, estimate: f64, oracle: f64, tolerance: f64) -> bool {
        match self {
            Relation::Eq => (estimate - oracle).abs() <= tolerance,
            Relation::Le => estimate <= oracle + tolerance,
            Relation::Ge => estimate >= oracle - tolerance,
        }
    }
}

/// One check in a report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub check_id: String,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub oracle: f64,
    pub oracle_source: String,
    pub tolerance: f64,
    pub relation: Relation,
    pub pass: bool,
    pub seconds: Option<f64>,
}

impl Row {
    pub fn new(
        id: impl Into<String>,
        estimate: f64,
        stderr: Option<f64>,
        relation: Relation,
        oracle: f64,
        tolerance: f64,
        source: impl Into<String>,
    ) -> Self {
        Self {
            check_id: id.into(),
            estimate,
            stderr,
            oracle,
            oracle_source: source.into(),
            tolerance,
            relation,
            pass: relation.holds(estimate, oracle, tolerance),
            seconds: None,
        }
    }

    /// Deterministic value against an oracle.
    pub fn exact(
        id: impl Into<String>,
        value: f64,
        oracle: f64,
        tolerance: f64,
        source: impl Into<String>,
    ) -> Self {
        Self::new(id, value, None, Relation::Eq, oracle, tolerance, source)
    }

    /// Monte Carlo estimate; tolerance is 4·stderr plus the declared bias.
    pub fn mc(
        id: impl Into<String>,
        est: &McEstimate,
        oracle: f64,
        bias: f64,
        source: impl Into<String>,
    ) -> Self {
        Self::new(
            id,
            est.mean,
            Some(est.stderr),
            Relation::Eq,
            oracle,
            Z * est.stderr + bias,
            source,
        )
    }

    pub fn at_most(
        id: impl Into<String>,
        value: f64,
        stderr: Option<f64>,
        bound: f64,
        tolerance: f64,
        source: impl Into<String>,
    ) -> Self {
        Self::new(id, value, stderr, Relation::Le, bound, tolerance, source)
    }

    pub fn at_least(
        id: impl Into<String>,
        value: f64,
        stderr: Option<f64>,
        bound: f64,
        tolerance: f64,
        source: impl Into<String>,
    ) -> Self {
        Self::new(id, value, stderr, Relation::Ge, bound, tolerance, source)
    }
}

/// Output format of a report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

pub const CSV_COLUMNS: [&str; 9] = [
    "check_id",
    "estimate",
    "stderr",
    "oracle",
    "oracle_source",
    "tolerance",
    "relation",
    "pass",
    "seconds",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub experiment: String,
    pub seed: u64,
    pub rows: Vec<Row>,
    /// Set when the run stopped on an error; the rows are then partial.
    pub failure: Option<String>,
}

/// 17 significant digits, locale-free.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.failure.is_none() && self.rows.iter().all(|r| r.pass)
    }

    /// 0 when every row passes, 1 otherwise.
    pub fn status(&self) -> i32 {
        if self.all_pass() {
            0
        } else {
            1
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.check_id.clone(),
                format_float(r.estimate),
                r.stderr.map(format_float).unwrap_or_default(),
                format_float(r.oracle),
                r.oracle_source.clone(),
                format_float(r.tolerance),
                r.relation.as_str().to_string(),
                r.pass.to_string(),
                r.seconds.map(|s| format!("{s:.3}")).unwrap_or_default(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> Report {
        Report {
            experiment: "demo".into(),
            seed: 1,
            rows: vec![
                Row::exact("demo.a", 0.5, 0.5, 0.0, "one half, exact"),
                Row::mc(
                    "demo.b",
                    &McEstimate::new(0.31, 0.001, 100, 4.0),
                    0.3,
                    0.0,
                    "some formula",
                ),
                Row::at_most("demo.c", 1.0, Some(0.1), 0.8, 0.4, "bound"),
            ],
            failure: None,
        }
    }

    #[test]
    fn pass_flags_follow_the_relation() {
        let r = report();
        assert!(r.rows[0].pass);
        assert!(!r.rows[1].pass);
        assert!(r.rows[2].pass);
        assert_eq!(r.status(), 1);
        assert!(Relation::Ge.holds(1.0, 1.5, 0.5));
        assert!(!Relation::Ge.holds(0.9, 1.5, 0.5));
    }

    #[test]
    fn csv_layout() {
        let csv = report().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        assert_eq!(
            lines.next().unwrap(),
            "demo.a,5.0000000000000000e-1,,5.0000000000000000e-1,\"one half, exact\",0.0000000000000000e0,eq,true,"
        );
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn floats_round_trip() {
        for x in [
            0.1,
            1.0 / 3.0,
            2f64.sqrt() * 1e-300,
            -7.25e12,
            f64::MIN_POSITIVE,
        ] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_float(f64::NAN), "NaN");
    }

    #[test]
    fn json_mirrors_rows() {
        let v: serde_json::Value = serde_json::from_str(&report().to_json()).unwrap();
        assert_eq!(v["rows"].as_array().unwrap().len(), 3);
        assert_eq!(v["rows"][2]["relation"], "le");
        assert_eq!(v["rows"][0]["stderr"], serde_json::Value::Null);
    }
}
