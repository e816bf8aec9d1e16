use serde::Serialize;

/// One named check with its measured residual.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub passed: bool,
}

/// Outcome of a validation pass. Failures are carried, never raised.
#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct ValidationReport {
    pub tol: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn new(tol: f64) -> Self {
        ValidationReport { tol, checks: Vec::new() }
    }

    /// Record a residual that must not exceed the report tolerance.
    pub fn residual(&mut self, name: &str, residual: f64) {
        let passed = residual.is_finite() && residual <= self.tol;
        self.push(name, residual, passed);
    }

    pub fn push(&mut self, name: &str, residual: f64, passed: bool) {
        self.checks.push(Check { name: name.to_string(), residual, passed });
    }

    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn extend(&mut self, prefix: &str, other: ValidationReport) {
        for c in other.checks {
            self.checks.push(Check { name: format!("{prefix}.{}", c.name), ..c });
        }
    }
}
