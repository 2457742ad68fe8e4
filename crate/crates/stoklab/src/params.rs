use std::collections::BTreeMap;

use crate::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    /// Any finite real.
    Real,
    /// A real > 0.
    Positive,
    /// An integer ≥ 1.
    Count,
}

/// One tunable parameter of an experiment.
#[derive(Clone, Copy, Debug)]
pub struct ParamSpec {
    pub key: &'static str,
    pub default: &'static str,
    pub kind: Kind,
    pub help: &'static str,
}

pub const fn real(key: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        default,
        kind: Kind::Real,
        help,
    }
}

pub const fn positive(key: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        default,
        kind: Kind::Positive,
        help,
    }
}

pub const fn count(key: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec {
        key,
        default,
        kind: Kind::Count,
        help,
    }
}

/// Resolved parameter values: defaults with overrides applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    values: BTreeMap<&'static str, f64>,
}

fn parse(spec: &ParamSpec, raw: &str) -> Result<f64, String> {
    match spec.kind {
        Kind::Count => match raw.parse::<u64>() {
            Ok(n) if n >= 1 => Ok(n as f64),
            _ => Err(format!(
                "`{}` expects an integer ≥ 1, got `{raw}`",
                spec.key
            )),
        },
        Kind::Real | Kind::Positive => match raw.parse::<f64>() {
            Ok(x) if x.is_finite() && (spec.kind == Kind::Real || x > 0.0) => Ok(x),
            _ => Err(format!(
                "`{}` expects a {} number, got `{raw}`",
                spec.key,
                if spec.kind == Kind::Real {
                    "finite"
                } else {
                    "positive"
                }
            )),
        },
    }
}

impl Params {
    pub fn resolve(specs: &[ParamSpec], overrides: &[(String, String)]) -> Result<Self, RunError> {
        let mut values = BTreeMap::new();
        for spec in specs {
            let v = parse(spec, spec.default).expect("parameter defaults parse");
            values.insert(spec.key, v);
        }
        for (key, raw) in overrides {
            let Some(spec) = specs.iter().find(|s| s.key == key) else {
                let known: Vec<&str> = specs.iter().map(|s| s.key).collect();
                return Err(RunError::Usage(format!(
                    "unknown parameter `{key}` (known: {})",
                    known.join(", ")
                )));
            };
            values.insert(spec.key, parse(spec, raw).map_err(RunError::Usage)?);
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> f64 {
        match self.values.get(key) {
            Some(&v) => v,
            None => panic!("experiment reads undeclared parameter `{key}`"),
        }
    }

    pub fn count(&self, key: &str) -> usize {
        self.get(key) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPECS: &[ParamSpec] = &[
        count("paths", "100", "paths"),
        positive("dt", "0.01", "step"),
        real("x0", "-1", "start"),
    ];

    fn o(k: &str, v: &str) -> (String, String) {
        (k.to_string(), v.to_string())
    }

    #[test]
    fn defaults_and_overrides() {
        let p = Params::resolve(SPECS, &[o("dt", "1e-3")]).unwrap();
        assert_eq!(p.count("paths"), 100);
        assert_eq!(p.get("dt"), 1e-3);
        assert_eq!(p.get("x0"), -1.0);
    }

    #[test]
    fn bad_overrides_are_usage_errors() {
        for bad in [
            o("nope", "1"),
            o("paths", "0"),
            o("paths", "2.5"),
            o("dt", "-1"),
            o("x0", "nan"),
            o("dt", "abc"),
        ] {
            assert!(matches!(
                Params::resolve(SPECS, &[bad]),
                Err(RunError::Usage(_))
            ));
        }
    }
}
