//! Check reports: named residuals, a tolerance and a verdict.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub residual: f64,
}

/// Outcome of one verification. Passes iff every component residual is
/// strictly below the tolerance; a NaN residual never passes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_name: String,
    pub reference: String,
    pub tolerance: f64,
    pub components: Vec<Residual>,
    pub per_sample: Vec<SampleRecord>,
}

impl CheckReport {
    pub fn max_residual(&self) -> f64 {
        self.components
            .iter()
            .map(|r| r.value)
            .fold(0.0, nan_max)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() < self.tolerance
    }

    pub fn component(&self, name: &str) -> Option<f64> {
        self.components
            .iter()
            .find(|r| r.name == name)
            .map(|r| r.value)
    }

    /// Whether one named component is below tolerance.
    pub fn component_passed(&self, name: &str) -> Option<bool> {
        self.component(name).map(|v| v < self.tolerance)
    }
}

/// NaN-propagating maximum.
pub fn nan_max(a: f64, b: f64) -> f64 {
    if a.is_nan() || b.is_nan() {
        f64::NAN
    } else {
        a.max(b)
    }
}

/// Accumulates per-component and per-sample maxima in first-seen order.
#[derive(Debug, Clone)]
pub struct ResidualLog {
    check_name: String,
    reference: String,
    tolerance: f64,
    components: Vec<Residual>,
    per_sample: Vec<SampleRecord>,
}

impl ResidualLog {
    pub fn new(check_name: &str, reference: &str, tolerance: f64) -> Self {
        Self {
            check_name: check_name.to_string(),
            reference: reference.to_string(),
            tolerance,
            components: Vec::new(),
            per_sample: Vec::new(),
        }
    }

    pub fn record(&mut self, sample: usize, name: &str, value: f64) {
        match self.components.iter_mut().find(|r| r.name == name) {
            Some(r) => r.value = nan_max(r.value, value),
            None => self.components.push(Residual {
                name: name.to_string(),
                value,
            }),
        }
        match self.per_sample.iter_mut().find(|s| s.index == sample) {
            Some(s) => s.residual = nan_max(s.residual, value),
            None => self.per_sample.push(SampleRecord {
                index: sample,
                residual: value,
            }),
        }
    }

    pub fn absorb(&mut self, sample: usize, other: &CheckReport) {
        for r in &other.components {
            self.record(sample, &r.name, r.value);
        }
    }

    pub fn finish(mut self) -> CheckReport {
        self.per_sample.sort_by_key(|s| s.index);
        CheckReport {
            check_name: self.check_name,
            reference: self.reference,
            tolerance: self.tolerance,
            components: self.components,
            per_sample: self.per_sample,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_keeps_maxima_and_order() {
        let mut log = ResidualLog::new("demo", "wiring", 1e-3);
        log.record(1, "b", 2e-4);
        log.record(0, "a", 1e-5);
        log.record(1, "b", 5e-4);
        let r = log.finish();
        assert_eq!(r.components[0].name, "b");
        assert_eq!(r.component("b"), Some(5e-4));
        assert_eq!(r.per_sample[0].index, 0);
        assert!(r.passed());
    }

    #[test]
    fn nan_never_passes() {
        let mut log = ResidualLog::new("demo", "wiring", 1.0);
        log.record(0, "x", f64::NAN);
        assert!(!log.finish().passed());
    }
}
