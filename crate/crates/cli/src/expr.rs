//! Numeric flag values: `pi`-expressions and `start:stop:intervals` ranges.

use evalexpr::{eval_number_with_context, ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Value};

use bzl_core::spectrum::DeltaRange;

use crate::error::{config_err, CliResult};

/// Evaluates an arithmetic expression in which `pi` is bound, e.g. `pi/2-0.1`.
pub fn eval_expr(text: &str) -> CliResult<f64> {
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    ctx.set_value("pi".into(), Value::Float(std::f64::consts::PI))
        .map_err(|e| config_err(e.to_string()))?;
    let v = eval_number_with_context(text.trim(), &ctx)
        .map_err(|e| config_err(format!("cannot evaluate `{text}`: {e}")))?;
    if !v.is_finite() {
        return Err(config_err(format!("`{text}` is not finite")));
    }
    Ok(v)
}

/// A single value `x`, or `start:stop:intervals` giving `intervals + 1`
/// evenly spaced points.
pub fn parse_range(text: &str) -> CliResult<DeltaRange> {
    let parts: Vec<&str> = text.split(':').collect();
    let range = match parts.as_slice() {
        [x] => {
            let x = eval_expr(x)?;
            DeltaRange::new(x, x, 1)
        }
        [a, b, n] => {
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| config_err(format!("bad interval count in `{text}`")))?;
            if n == 0 {
                return Err(config_err(format!("range `{text}` needs at least one interval")));
            }
            DeltaRange::new(eval_expr(a)?, eval_expr(b)?, n + 1)
        }
        _ => {
            return Err(config_err(format!(
                "expected `x` or `start:stop:intervals`, got `{text}`"
            )))
        }
    };
    Ok(range?)
}

/// A single value; ranges are rejected.
pub fn parse_single(text: &str, name: &str) -> CliResult<f64> {
    if text.contains(':') {
        return Err(config_err(format!("--{name} takes a single value here, got `{text}`")));
    }
    eval_expr(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions() {
        assert_eq!(eval_expr("pi/2-0.1").unwrap(), std::f64::consts::FRAC_PI_2 - 0.1);
        assert_eq!(eval_expr("0.25").unwrap(), 0.25);
        assert_eq!(eval_expr("2").unwrap(), 2.0);
        assert!(eval_expr("pie").is_err());
        assert!(eval_expr("1/0").is_err());
    }

    #[test]
    fn ranges() {
        let r = parse_range("0:1.2:120").unwrap();
        assert_eq!((r.min, r.max, r.n_steps), (0.0, 1.2, 121));
        let r = parse_range("0.7").unwrap();
        assert_eq!((r.min, r.max, r.n_steps), (0.7, 0.7, 1));
        assert!(parse_range("1:0:10").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert!(parse_range("0:1").is_err());
        assert!(parse_single("0:1:3", "delta").is_err());
    }
}
