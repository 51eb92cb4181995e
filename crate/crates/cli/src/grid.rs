//! Sweep grid files: one axis per line, `name = start:stop:count` or `name = v1, v2, ...`.
//! Blank lines and lines starting with `#` are ignored.

use hal_core::protocol::{Axis, SweepGrid};

#[derive(Debug, PartialEq)]
pub struct GridError {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for GridError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "grid line {}: {}", self.line, self.message)
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{}` is not a number", s.trim()))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{}` is not finite", s.trim()))
    }
}

fn values(spec: &str) -> Result<Vec<f64>, String> {
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err("range must be start:stop:count".into());
        };
        let (start, stop) = (number(start)?, number(stop)?);
        let count: usize = count.trim().parse().map_err(|_| format!("count `{}` is not a positive integer", count.trim()))?;
        return match count {
            0 => Err("count must be at least 1".into()),
            1 => Ok(vec![start]),
            // endpoints are taken verbatim
            _ => Ok((0..count)
                .map(|i| match i {
                    0 => start,
                    i if i == count - 1 => stop,
                    i => start + (stop - start) * i as f64 / (count - 1) as f64,
                })
                .collect()),
        };
    }
    spec.split(',').map(number).collect()
}

pub fn parse_grid(text: &str) -> Result<SweepGrid, GridError> {
    let mut grid = SweepGrid::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| GridError { line: i + 1, message };
        let (name, spec) = line.split_once('=').ok_or_else(|| err("expected `name = values`".into()))?;
        let name = name.trim();
        let axis = Axis::from_name(name).ok_or_else(|| err(format!("unknown axis `{name}`")))?;
        if grid.axes().iter().any(|(a, _)| *a == axis) {
            return Err(err(format!("axis `{name}` declared twice")));
        }
        grid.push(axis, values(spec).map_err(err)?);
    }
    if grid.axes().is_empty() {
        return Err(GridError { line: 0, message: "grid declares no axes".into() });
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_and_lists() {
        let g = parse_grid("# comment\nt = 0.1:0.3:3\n\ninv_t = 10, 20,30\n").unwrap();
        assert_eq!(g.axes()[0], (Axis::T, vec![0.1, 0.2, 0.3]));
        assert_eq!(g.axes()[1], (Axis::InvT, vec![10.0, 20.0, 30.0]));
        assert_eq!(g.len(), 9);
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(parse_grid("t = 0.1\nbogus = 1").unwrap_err().line, 2);
        assert_eq!(parse_grid("\n\nt = 0.1:0.2").unwrap_err().line, 3);
        assert_eq!(parse_grid("t 0.1").unwrap_err().line, 1);
        assert_eq!(parse_grid("t = 0.1, x").unwrap_err().line, 1);
        assert_eq!(parse_grid("t = 0.1:0.2:0").unwrap_err().line, 1);
        assert_eq!(parse_grid("t = 0.1\nt = 0.2").unwrap_err().line, 2);
    }
}
