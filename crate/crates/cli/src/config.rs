use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const TOL_RANGE: (f64, f64) = (1e-12, 1e-2);

/// Settings shared by flags and the optional JSON config file. Every field
/// is optional; flags override file values, file values override defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: Option<f64>,
    pub tol: Option<f64>,
    pub n: Option<usize>,
    pub eps: Option<EpsInput>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub hbar: Option<f64>,
    pub alpha: Option<f64>,
    /// Offset `[re, im]` for the closure and weak suites.
    pub zeta: Option<[f64; 2]>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum EpsInput {
    Number(f64),
    Expr(String),
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// `self` wins over `base`.
    pub fn over(self, base: RunConfig) -> RunConfig {
        RunConfig {
            lambda: self.lambda.or(base.lambda),
            tol: self.tol.or(base.tol),
            n: self.n.or(base.n),
            eps: self.eps.or(base.eps),
            seed: self.seed.or(base.seed),
            samples: self.samples.or(base.samples),
            hbar: self.hbar.or(base.hbar),
            alpha: self.alpha.or(base.alpha),
            zeta: self.zeta.or(base.zeta),
        }
    }

    pub fn resolve(self) -> Result<Resolved, CliError> {
        let eps_text = match &self.eps {
            None => "sqrt2/35".to_string(),
            Some(EpsInput::Number(x)) => x.to_string(),
            Some(EpsInput::Expr(s)) => s.clone(),
        };
        let r = Resolved {
            lambda: self.lambda.unwrap_or(2.0),
            tol: self.tol.unwrap_or(1e-6),
            n: self.n.unwrap_or(33),
            eps: parse_eps(&eps_text)?,
            eps_expr: eps_text,
            seed: self.seed.unwrap_or(7),
            samples: self.samples.unwrap_or(20_000),
            hbar: self.hbar.unwrap_or(1.0),
            alpha: self.alpha.unwrap_or(1.0),
            zeta: self.zeta.unwrap_or([0.3, 0.2]),
        };
        r.validate()?;
        Ok(r)
    }
}

/// Fully resolved settings, embedded in every report.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub lambda: f64,
    pub tol: f64,
    pub n: usize,
    pub eps: f64,
    pub eps_expr: String,
    pub seed: u64,
    pub samples: usize,
    pub hbar: f64,
    pub alpha: f64,
    pub zeta: [f64; 2],
}

impl Resolved {
    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if !(self.tol >= TOL_RANGE.0 && self.tol <= TOL_RANGE.1) {
            return bad(format!("tol {} outside [{:e}, {:e}]", self.tol, TOL_RANGE.0, TOL_RANGE.1));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda {} must be positive", self.lambda));
        }
        if self.n < 2 {
            return bad("n must be at least 2".into());
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return bad(format!("eps {} must lie in (0, 0.5)", self.eps));
        }
        if self.samples < 2 {
            return bad("samples must be at least 2".into());
        }
        if !(self.hbar > 0.0 && self.alpha > 0.0 && self.hbar.is_finite() && self.alpha.is_finite()) {
            return bad("hbar and alpha must be positive".into());
        }
        let z = (self.zeta[0].powi(2) + self.zeta[1].powi(2)).sqrt();
        if !(z > 0.0 && z <= 1.0) {
            return bad(format!("|zeta| = {z} must lie in (0, 1]"));
        }
        Ok(())
    }
}

fn parse_atom(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let err = || CliError::Config(format!("cannot parse '{s}' as a number"));
    if let Some(rest) = s.strip_prefix("sqrt") {
        let inner = rest.trim().trim_start_matches('(').trim_end_matches(')');
        let v: f64 = inner.trim().parse().map_err(|_| err())?;
        if v < 0.0 {
            return Err(err());
        }
        return Ok(v.sqrt());
    }
    s.parse().map_err(|_| err())
}

/// Accepts `x`, `sqrtX`, `sqrt(X)` and quotients of those, e.g. `sqrt2/35`.
pub fn parse_eps(s: &str) -> Result<f64, CliError> {
    match s.split_once('/') {
        Some((a, b)) => {
            let d = parse_atom(b)?;
            if d == 0.0 {
                return Err(CliError::Config(format!("division by zero in '{s}'")));
            }
            Ok(parse_atom(a)? / d)
        }
        None => parse_atom(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_expressions() {
        assert_eq!(parse_eps("sqrt2/35").unwrap(), 2f64.sqrt() / 35.0);
        assert_eq!(parse_eps("sqrt(2)/35").unwrap(), 2f64.sqrt() / 35.0);
        assert_eq!(parse_eps("0.04").unwrap(), 0.04);
        assert!(parse_eps("two").is_err());
        assert!(parse_eps("1/0").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let file = RunConfig { lambda: Some(0.5), tol: Some(1e-4), ..Default::default() };
        let flags = RunConfig { lambda: Some(3.0), ..Default::default() };
        let r = flags.over(file).resolve().unwrap();
        assert_eq!((r.lambda, r.tol), (3.0, 1e-4));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"lamda": 2}"#).is_err());
        assert!(serde_json::from_str::<RunConfig>(r#"{"lambda": 2, "eps": "sqrt2/35"}"#).is_ok());
    }

    #[test]
    fn tolerance_range() {
        for t in [1e-13, 0.1] {
            assert!(RunConfig { tol: Some(t), ..Default::default() }.resolve().is_err());
        }
    }
}
