//! `key=value` parameter files and sweep grids.

use semisparse::solver::{Init, WeightUpdate};
use semisparse::DenoiseParams;

/// Everything a `denoise` run needs besides its input.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub solver: DenoiseParams,
    pub vertex_iters: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self { solver: DenoiseParams::default(), vertex_iters: semisparse::vertex::DEFAULT_VERTEX_ITERS }
    }
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value `{value}` for `{key}`"))
}

impl Settings {
    /// Sets one named parameter. Dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let p = &mut self.solver;
        match key.replace('-', "_").as_str() {
            "lambda" => p.lambda = number(key, value)?,
            "alpha" => p.alpha = number(key, value)?,
            "beta" => p.beta = number(key, value)?,
            "rho1" => p.rho1 = number(key, value)?,
            "rho2" => p.rho2 = number(key, value)?,
            "sigma_e" => p.sigma_e = number(key, value)?,
            "sigma_l" => p.sigma_l = number(key, value)?,
            "eps" => p.eps = Some(number(key, value)?),
            "max_iters" => p.max_iters = number(key, value)?,
            "cg_tol" => p.cg_tol = number(key, value)?,
            "cg_max_iters" => p.cg_max_iters = Some(number(key, value)?),
            "vertex_iters" => self.vertex_iters = number(key, value)?,
            "weights_in_system" => p.weights_in_system = number(key, value)?,
            "normalize_scale" => p.normalize_scale = number(key, value)?,
            "weight_update" => {
                p.weight_update = match value {
                    "every_iter" | "every-iter" => WeightUpdate::EveryIter,
                    "frozen" => WeightUpdate::Frozen,
                    _ => return Err(format!("invalid value `{value}` for `{key}`")),
                }
            }
            "init" => {
                p.init = match value {
                    "noisy" => Init::Noisy,
                    "zero" => Init::Zero,
                    _ => return Err(format!("invalid value `{value}` for `{key}`")),
                }
            }
            _ => return Err(format!("unknown parameter `{key}`")),
        }
        Ok(())
    }
}

/// Splits `key=value` lines. Blank lines and `#` comments are skipped.
pub fn parse_assignments(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", i + 1))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(format!("line {}: expected key=value", i + 1));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Cartesian product of comma-separated value lists, e.g. `alpha=0.1,0.2`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Grid {
    axes: Vec<(String, Vec<String>)>,
}

impl Grid {
    pub fn parse(text: &str) -> Result<Self, String> {
        let axes = parse_assignments(text)?
            .into_iter()
            .map(|(k, v)| (k, v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect()))
            .collect();
        Ok(Self { axes })
    }

    /// Applies every grid point to `base`, skipping keys in `fixed` and
    /// dropping repeated settings.
    pub fn expand(&self, base: &Settings, fixed: &[&str]) -> Result<Vec<Settings>, String> {
        let mut points = vec![base.clone()];
        for (key, values) in &self.axes {
            if fixed.iter().any(|f| f.replace('-', "_") == key.replace('-', "_")) {
                continue;
            }
            let mut next = Vec::with_capacity(points.len() * values.len());
            for p in &points {
                for v in values {
                    let mut q = p.clone();
                    q.set(key, v)?;
                    next.push(q);
                }
            }
            points = next;
        }
        let mut unique: Vec<Settings> = Vec::with_capacity(points.len());
        for p in points {
            if !unique.contains(&p) {
                unique.push(p);
            }
        }
        Ok(unique)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignments_skip_comments() {
        let a = parse_assignments("# tuned\nalpha = 0.5\n\nbeta=2 # note\n").unwrap();
        assert_eq!(a, vec![("alpha".into(), "0.5".into()), ("beta".into(), "2".into())]);
        assert!(parse_assignments("alpha\n").is_err());
    }

    #[test]
    fn set_accepts_dashes() {
        let mut s = Settings::default();
        s.set("sigma-e", "0.7").unwrap();
        s.set("vertex_iters", "3").unwrap();
        s.set("weight_update", "frozen").unwrap();
        assert_eq!(s.solver.sigma_e, 0.7);
        assert_eq!(s.vertex_iters, 3);
        assert_eq!(s.solver.weight_update, WeightUpdate::Frozen);
        assert!(s.set("gamma", "1").is_err());
        assert!(s.set("alpha", "x").is_err());
    }

    #[test]
    fn grid_expands_and_respects_fixed_keys() {
        let g = Grid::parse("alpha=0.1,0.2\nbeta=1,2,3\n").unwrap();
        assert_eq!(g.expand(&Settings::default(), &[]).unwrap().len(), 6);
        let mut base = Settings::default();
        base.solver.beta = 0.0;
        let pts = g.expand(&base, &["beta"]).unwrap();
        assert_eq!(pts.len(), 2);
        assert!(pts.iter().all(|p| p.solver.beta == 0.0));
    }
}
