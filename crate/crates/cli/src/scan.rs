//! Parameter scans: a cartesian grid of dotted-path overrides.

use toml::Value;

use crate::error::CliError;

/// One scan axis: a dotted config path and its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: String,
    pub values: Vec<Value>,
}

impl Axis {
    pub fn numeric(&self) -> Vec<f64> {
        self.values.iter().map(value_f64).collect()
    }
}

pub fn value_f64(v: &Value) -> f64 {
    match v {
        Value::Integer(i) => *i as f64,
        Value::Float(x) => *x,
        Value::Boolean(b) => *b as u8 as f64,
        _ => f64::NAN,
    }
}

fn is_integer_token(s: &str) -> bool {
    s.parse::<i64>().is_ok()
}

/// Parses `path=lo:hi:n` (inclusive, `n` points) or `path=v1,v2,...`.
pub fn parse_axis(spec: &str) -> Result<Axis, CliError> {
    let (path, grid) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Validation(format!("axis `{spec}` is not of the form path=grid")))?;
    let path = path.trim().to_string();
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(CliError::Validation(format!("axis `{spec}` has an empty path")));
    }
    let grid = grid.trim();
    if grid.is_empty() {
        return Err(CliError::Validation(format!("axis `{path}` has an empty grid")));
    }
    let parts: Vec<&str> = grid.split(':').map(str::trim).collect();
    let values = match parts.as_slice() {
        [lo, hi, n] => {
            let bad = || CliError::Validation(format!("axis `{path}`: range must be lo:hi:count"));
            let n: usize = n.parse().map_err(|_| bad())?;
            let a: f64 = lo.parse().map_err(|_| bad())?;
            let b: f64 = hi.parse().map_err(|_| bad())?;
            if n == 0 {
                return Err(CliError::Validation(format!("axis `{path}` has an empty grid")));
            }
            let ints = is_integer_token(lo) && is_integer_token(hi);
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let x = if n == 1 { a } else { a + (b - a) * i as f64 / (n - 1) as f64 };
                if ints && x.fract() == 0.0 {
                    out.push(Value::Integer(x as i64));
                } else if ints {
                    return Err(CliError::Validation(format!(
                        "axis `{path}`: integer range {lo}:{hi} does not divide into {n} points"
                    )));
                } else {
                    out.push(Value::Float(x));
                }
            }
            out
        }
        [list] => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(crate::config::parse_literal)
            .collect(),
        _ => return Err(CliError::Validation(format!("axis `{path}`: unrecognized grid `{grid}`"))),
    };
    if values.is_empty() {
        return Err(CliError::Validation(format!("axis `{path}` has an empty grid")));
    }
    Ok(Axis { path, values })
}

/// Grid points with the first axis varying fastest.
pub fn points(axes: &[Axis]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.values.len());
        for j in 0..axis.values.len() {
            for p in &out {
                let mut q = p.clone();
                q.push(j);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_and_list_axes() {
        let a = parse_axis("oscillator.a=0.5:1.5:3").unwrap();
        assert_eq!(a.numeric(), vec![0.5, 1.0, 1.5]);
        let b = parse_axis("quantum.sites=4:8:3").unwrap();
        assert_eq!(b.values, vec![Value::Integer(4), Value::Integer(6), Value::Integer(8)]);
        let c = parse_axis("pca.rule=toom,pi_toom").unwrap();
        assert_eq!(c.values.len(), 2);
    }

    #[test]
    fn empty_grids_rejected() {
        assert!(parse_axis("x=").is_err());
        assert!(parse_axis("x=0:1:0").is_err());
        assert!(parse_axis("x=,").is_err());
        assert!(parse_axis("=1,2").is_err());
        assert!(parse_axis("x=4:5:3").is_err());
    }

    #[test]
    fn first_axis_fastest() {
        let a = parse_axis("a=1,2,3").unwrap();
        let b = parse_axis("b=1,2").unwrap();
        let p = points(&[a, b]);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 0]);
        assert_eq!(p[1], vec![1, 0]);
        assert_eq!(p[3], vec![0, 1]);
    }
}
