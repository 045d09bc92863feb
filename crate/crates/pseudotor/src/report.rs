use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Below,
    Above,
    AtLeast,
    Equal,
}

impl Relation {
    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::Below => value < threshold,
            Relation::Above => value > threshold,
            Relation::AtLeast => value >= threshold,
            Relation::Equal => value == threshold,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::Above => ">",
            Relation::AtLeast => ">=",
            Relation::Equal => "==",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Statistic {
    pub name: String,
    pub value: f64,
    pub relation: Relation,
    pub threshold: f64,
    pub passed: bool,
}

/// One named check with the statistics it is judged on.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: String,
    pub description: String,
    /// Short name of the statement the check verifies.
    pub anchor: String,
    pub statistics: Vec<Statistic>,
    pub error: Option<String>,
    pub passed: bool,
}

impl Check {
    pub fn new(id: &str, description: &str, anchor: &str) -> Self {
        Check { id: id.into(), description: description.into(), anchor: anchor.into(), statistics: Vec::new(), error: None, passed: true }
    }

    pub fn stat(&mut self, name: &str, value: f64, relation: Relation, threshold: f64) -> &mut Self {
        let passed = relation.holds(value, threshold);
        self.passed &= passed;
        self.statistics.push(Statistic { name: name.into(), value, relation, threshold, passed });
        self
    }

    pub fn below(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        self.stat(name, value, Relation::Below, threshold)
    }

    pub fn above(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        self.stat(name, value, Relation::Above, threshold)
    }

    pub fn at_least(&mut self, name: &str, value: f64, threshold: f64) -> &mut Self {
        self.stat(name, value, Relation::AtLeast, threshold)
    }

    pub fn equal(&mut self, name: &str, value: f64, expected: f64) -> &mut Self {
        self.stat(name, value, Relation::Equal, expected)
    }

    pub fn truth(&mut self, name: &str, ok: bool) -> &mut Self {
        self.equal(name, if ok { 1.0 } else { 0.0 }, 1.0)
    }

    pub fn fail_with(&mut self, err: impl core::fmt::Display) {
        self.error = Some(err.to_string());
        self.passed = false;
    }

    /// `PASS id: stat=value<thr, ...`.
    pub fn summary_line(&self) -> String {
        let mut s = format!("{} {}:", if self.passed { "PASS" } else { "FAIL" }, self.id);
        for st in &self.statistics {
            s.push_str(&format!(" {}={:.3e}{}{:.1e}{}", st.name, st.value, st.relation.symbol(), st.threshold, if st.passed { "" } else { "!" }));
        }
        if let Some(e) = &self.error {
            s.push_str(&format!(" error: {e}"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn new(checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        VerificationReport { checks, passed }
    }

    pub fn failed(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistics_decide_the_check() {
        let mut c = Check::new("x", "d", "a");
        c.below("r", 1e-9, 1e-8).above("ctl", 0.5, 0.1);
        assert!(c.passed);
        c.equal("count", 2.0, 3.0);
        assert!(!c.passed);
        assert!(c.summary_line().starts_with("FAIL x:"));
        let r = VerificationReport::new(vec![c, Check::new("y", "d", "a")]);
        assert!(!r.passed);
        assert_eq!(r.failed(), vec!["x"]);
    }
}
