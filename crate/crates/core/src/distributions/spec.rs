use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// Distribution family tag as it appears in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Exponential,
    Gamma,
    Beta,
    Lognormal,
    Pareto,
    Normal,
    Custom,
}

impl Family {
    /// Parameter names the family requires, in canonical order.
    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Family::Exponential => &["lambda"],
            Family::Gamma => &["alpha", "lambda"],
            Family::Beta => &["alpha", "beta"],
            Family::Lognormal => &["mu", "sigma2"],
            Family::Pareto => &["alpha"],
            Family::Normal => &["mu", "sigma2"],
            Family::Custom => &[],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::Gamma => "gamma",
            Family::Beta => "beta",
            Family::Lognormal => "lognormal",
            Family::Pareto => "pareto",
            Family::Normal => "normal",
            Family::Custom => "custom",
        }
    }
}

/// Interpolation rule for tabulated densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Monotone piecewise-cubic Hermite (C¹).
    #[default]
    Pchip,
    /// Piecewise linear; not differentiable at the knots.
    Linear,
}

/// Tabulated density values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PdfGrid {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
}

/// Declarative description of a continuous univariate distribution.
///
/// JSON form: `{"family": "gamma", "params": {"alpha": 2, "lambda": 1}}` or
/// `{"family": "custom", "grid": {"x": [...], "f": [...]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    pub family: Family,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<PdfGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation: Option<Interpolation>,
}

impl DistributionSpec {
    fn builtin(family: Family, values: &[f64]) -> Self {
        let params = family
            .param_names()
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), *v))
            .collect();
        Self {
            family,
            params,
            grid: None,
            interpolation: None,
        }
    }

    pub fn exponential(lambda: f64) -> Self {
        Self::builtin(Family::Exponential, &[lambda])
    }

    pub fn gamma(alpha: f64, lambda: f64) -> Self {
        Self::builtin(Family::Gamma, &[alpha, lambda])
    }

    pub fn beta(alpha: f64, beta: f64) -> Self {
        Self::builtin(Family::Beta, &[alpha, beta])
    }

    /// Log-normal with log-mean `mu` and log-variance `sigma2`.
    pub fn lognormal(mu: f64, sigma2: f64) -> Self {
        Self::builtin(Family::Lognormal, &[mu, sigma2])
    }

    /// Pareto with unit scale: `f(x) = α x^{-(α+1)}` on `(1, ∞)`.
    pub fn pareto(alpha: f64) -> Self {
        Self::builtin(Family::Pareto, &[alpha])
    }

    /// Normal with mean `mu` and variance `sigma2`.
    pub fn normal(mu: f64, sigma2: f64) -> Self {
        Self::builtin(Family::Normal, &[mu, sigma2])
    }

    pub fn custom(x: Vec<f64>, f: Vec<f64>) -> Self {
        Self {
            family: Family::Custom,
            params: BTreeMap::new(),
            grid: Some(PdfGrid { x, f }),
            interpolation: None,
        }
    }

    pub fn with_interpolation(mut self, rule: Interpolation) -> Self {
        self.interpolation = Some(rule);
        self
    }

    /// Parse from JSON text, rejecting unknown fields.
    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }

    pub(crate) fn param(&self, name: &str) -> f64 {
        self.params[name]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_builtin() {
        let s = DistributionSpec::from_json(r#"{"family":"pareto","params":{"alpha":3}}"#).unwrap();
        assert_eq!(s, DistributionSpec::pareto(3.0));
    }

    #[test]
    fn rejects_unknown_top_level_field() {
        let err = DistributionSpec::from_json(r#"{"family":"pareto","params":{"alpha":3},"shape":1}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("shape"), "{err}");
    }

    #[test]
    fn rejects_unknown_grid_field() {
        let err = DistributionSpec::from_json(r#"{"family":"custom","grid":{"x":[0,1],"f":[2,0],"w":[1]}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("`w`"), "{err}");
    }

    #[test]
    fn rejects_unknown_family() {
        assert!(DistributionSpec::from_json(r#"{"family":"weibull","params":{}}"#).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let s = DistributionSpec::custom(vec![0.0, 1.0], vec![2.0, 0.0]).with_interpolation(Interpolation::Linear);
        assert_eq!(DistributionSpec::from_json(&s.to_json()).unwrap(), s);
    }
}
