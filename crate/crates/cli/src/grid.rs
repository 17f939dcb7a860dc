//! `min:max:count[:log]` grids and comma lists.

use crate::error::CliError;

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() == 1 {
            let v = parse_f64(parts[0], "grid point")?;
            return Ok(Self { min: v, max: v, count: 1, log: false });
        }
        if !(3..=4).contains(&parts.len()) {
            return Err(CliError::Config(format!("grid '{text}' must be min:max:count[:log] or a single number")));
        }
        let min = parse_f64(parts[0], "grid min")?;
        let max = parse_f64(parts[1], "grid max")?;
        let count: usize = parts[2]
            .parse()
            .map_err(|_| CliError::Config(format!("grid count '{}' is not a positive integer", parts[2])))?;
        let log = match parts.get(3) {
            None => false,
            Some(&"log") => true,
            Some(&"lin") | Some(&"linear") => false,
            Some(other) => return Err(CliError::Config(format!("grid spacing '{other}' must be 'log' or 'lin'"))),
        };
        if count < 2 {
            return Err(CliError::Config(format!("grid count must be at least 2, got {count}")));
        }
        if !(max > min) {
            return Err(CliError::Config(format!("grid max {max} must exceed min {min}")));
        }
        if log && !(min > 0.0) {
            return Err(CliError::Config("log grids need min > 0".into()));
        }
        Ok(Self { min, max, count, log })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let u = i as f64 / last;
                if i + 1 == self.count {
                    self.max
                } else if self.log {
                    (self.min.ln() + u * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + u * (self.max - self.min)
                }
            })
            .collect()
    }
}

pub fn parse_f64(text: &str, what: &str) -> Result<f64, CliError> {
    let v: f64 = text.trim().parse().map_err(|_| CliError::Config(format!("{what} '{text}' is not a number")))?;
    if !v.is_finite() {
        return Err(CliError::Config(format!("{what} must be finite")));
    }
    Ok(v)
}

/// Accepts `1e7` as well as `10000000`.
pub fn parse_count(text: &str) -> Result<usize, String> {
    let v: f64 = text.trim().parse().map_err(|_| format!("'{text}' is not a number"))?;
    if !(v >= 1.0) || v.fract() != 0.0 || v > 1e15 {
        return Err(format!("'{text}' is not a positive integer"));
    }
    Ok(v as usize)
}

pub fn parse_list(text: &str) -> Result<Vec<usize>, String> {
    text.split(',').map(parse_count).collect()
}
