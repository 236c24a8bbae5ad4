//! `key = value` config files, the grid syntax and flag/config/env/default resolution.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use biconf_core::Point;

use crate::error::CliError;

pub const TOL_ENV: &str = "BICONF_TOL";

pub const KEYS: &[&str] = &[
    "sigma", "rho", "A", "grid", "h", "alpha", "beta", "b", "rho0", "B", "C", "Ctilde", "alpha0",
    "gamma0", "delta0", "dt", "t-max", "tol", "out", "format", "expect-complete", "ricci-flat", "a",
];

/// Parsed config file. Keys are the long flag names without the leading dashes;
/// `_` and `-` are interchangeable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::validation(format!(
                    "config line {}: expected key = value",
                    n + 1
                )));
            };
            let key = k.trim().trim_start_matches('-').replace('_', "-");
            if !KEYS.contains(&key.as_str()) {
                return Err(CliError::validation(format!(
                    "config line {}: unknown key {key:?}",
                    n + 1
                )));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        self.raw(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| CliError::validation(format!("config: invalid value {v:?} for {key}")))
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool, CliError> {
        match self.raw(key) {
            None => Ok(false),
            Some("true" | "1" | "yes") => Ok(true),
            Some("false" | "0" | "no") => Ok(false),
            Some(v) => Err(CliError::validation(format!("config: invalid boolean {v:?} for {key}"))),
        }
    }
}

/// Flag value, then config value.
pub fn pick<T: FromStr>(flag: Option<T>, cfg: &ConfigFile, key: &str) -> Result<Option<T>, CliError> {
    match flag {
        Some(v) => Ok(Some(v)),
        None => cfg.get(key),
    }
}

/// Tolerance: flag, then config, then `BICONF_TOL`, then `default`.
pub fn tolerance(
    flag: Option<f64>,
    cfg: &ConfigFile,
    env: &dyn Fn(&str) -> Option<String>,
    default: f64,
) -> Result<f64, CliError> {
    let tol = match pick(flag, cfg, "tol")? {
        Some(t) => t,
        None => match env(TOL_ENV) {
            Some(v) => v
                .trim()
                .parse()
                .map_err(|_| CliError::validation(format!("{TOL_ENV}: invalid tolerance {v:?}")))?,
            None => default,
        },
    };
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(CliError::validation(format!("tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

pub fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::validation(format!("{name} must be positive, got {v}")))
    }
}

pub fn finite(name: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::validation(format!("{name} must be finite, got {v}")))
    }
}

/// Per-axis sample values; unspecified axes use `-0.4:0.4:5`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: [Vec<f64>; 4],
}

pub const DEFAULT_AXIS: (f64, f64, usize) = (-0.4, 0.4, 5);

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

impl Default for Grid {
    fn default() -> Self {
        let (lo, hi, n) = DEFAULT_AXIS;
        Grid { axes: std::array::from_fn(|_| linspace(lo, hi, n)) }
    }
}

impl Grid {
    /// `x1=lo:hi:n,x3=0.2,...`; `t` is accepted for `x1`.
    pub fn parse(spec: &str) -> Result<Self, CliError> {
        let mut grid = Grid::default();
        let bad = |msg: String| CliError::validation(format!("grid {spec:?}: {msg}"));
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, range) = part
                .split_once('=')
                .ok_or_else(|| bad(format!("expected axis=lo:hi:n in {part:?}")))?;
            let axis = match name.trim() {
                "x1" | "t" => 0,
                "x2" => 1,
                "x3" => 2,
                "x4" => 3,
                other => return Err(bad(format!("unknown axis {other:?}"))),
            };
            let num = |s: &str| -> Result<f64, CliError> {
                let v: f64 = s.trim().parse().map_err(|_| bad(format!("invalid number {s:?}")))?;
                finite("grid bound", v).map_err(|e| bad(e.to_string()))
            };
            let fields: Vec<&str> = range.split(':').collect();
            grid.axes[axis] = match fields.as_slice() {
                [v] => vec![num(v)?],
                [lo, hi, n] => {
                    let n: usize = n
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("invalid count {n:?}")))?;
                    if n == 0 {
                        return Err(bad("counts must be at least 1".into()));
                    }
                    linspace(num(lo)?, num(hi)?, n)
                }
                _ => return Err(bad(format!("expected lo:hi:n in {range:?}"))),
            };
        }
        Ok(grid)
    }

    /// Points in lexicographic order, `x1` slowest.
    pub fn points(&self) -> Vec<Point> {
        let mut pts = Vec::with_capacity(self.axes.iter().map(Vec::len).product());
        for &a in &self.axes[0] {
            for &b in &self.axes[1] {
                for &c in &self.axes[2] {
                    for &d in &self.axes[3] {
                        pts.push(Point::new([a, b, c, d]));
                    }
                }
            }
        }
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let c = ConfigFile::parse("# run\nsigma = (1 + x1^2)/2\nt_max=4 # end\n--A = -1\n").unwrap();
        assert_eq!(c.raw("sigma"), Some("(1 + x1^2)/2"));
        assert_eq!(c.get::<f64>("t-max").unwrap(), Some(4.0));
        assert_eq!(c.get::<f64>("A").unwrap(), Some(-1.0));
        assert!(ConfigFile::parse("bogus = 1").is_err());
        assert!(ConfigFile::parse("sigma").is_err());
        assert!(c.get::<f64>("sigma").is_err());
    }

    #[test]
    fn tolerance_precedence() {
        let cfg = ConfigFile::parse("tol = 1e-3").unwrap();
        let empty = ConfigFile::default();
        let env = |k: &str| (k == TOL_ENV).then(|| "1e-5".to_string());
        let none = |_: &str| None;
        assert_eq!(tolerance(Some(0.5), &cfg, &env, 1.0).unwrap(), 0.5);
        assert_eq!(tolerance(None, &cfg, &env, 1.0).unwrap(), 1e-3);
        assert_eq!(tolerance(None, &empty, &env, 1.0).unwrap(), 1e-5);
        assert_eq!(tolerance(None, &empty, &none, 1.0).unwrap(), 1.0);
        assert!(tolerance(Some(-1.0), &empty, &none, 1.0).is_err());
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(Grid::default().points().len(), 625);
        let g = Grid::parse("x1=0.5:2:4, x2=0, x3=0:0:1,x4=1").unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 4);
        assert_eq!(pts[3].0, [2.0, 0.0, 0.0, 1.0]);
        assert!(Grid::parse("x5=0:1:2").is_err());
        assert!(Grid::parse("x1=0:1:0").is_err());
        assert!(Grid::parse("x1=0:1").is_err());
        assert!(Grid::parse("x1=a:1:2").is_err());
    }
}
