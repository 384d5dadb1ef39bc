//! Run configuration: flat `key = value` text with `#` comments.
//!
//! Every key is optional and defaults to the reference model and the
//! standard sweep. The name `ref-model` loads the defaults without a file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::geometry::Rect;
use crate::global::{Configuration, GlobalMapParams, Orientation};
use crate::limit::LimitFamily;
use crate::orbit::SolverOptions;
use crate::return_map::Model;
use crate::saddle::SaddleNormalForm;
use crate::sweep::RegimeOptions;
use crate::{Error, Result};

/// `P(s)` of the reference local map.
const REFERENCE_P: f64 = 0.1;

/// Built-in configuration name.
pub const REFERENCE_NAME: &str = "ref-model";

/// Recognised keys, in the order they are documented.
pub const KEYS: &[&str] = &[
    "lambda",
    "p_coeffs",
    "v_radius",
    "a",
    "b",
    "c",
    "d",
    "mu",
    "alpha1",
    "alpha2",
    "configuration",
    "orientation",
    "pi_radius",
    "family",
    "abscissa_min",
    "abscissa_max",
    "ordinate_min",
    "ordinate_max",
    "grid_nx",
    "grid_ny",
    "seed_half",
    "seed_grid",
    "threads",
    "newton_step_tol",
    "newton_max_iter",
    "residual_tol",
    "dedup_tol",
    "symmetry_tol",
    "unit_tol",
    "k_min",
    "k_max",
    "m_offset",
    "output",
    "plot_script",
];

/// Everything a CLI run needs, validated at load time.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub family: LimitFamily,
    /// x: abscissa (`c̃` or `M2`), y: ordinate (`M̃` or `M1`).
    pub window: Rect,
    pub grid: (usize, usize),
    pub regime: RegimeOptions,
    pub k_range: (usize, usize),
    /// Largest `|m − k|` of the `T12km` maps in the mixed-dynamics probe.
    pub m_offset: usize,
    pub output: Option<PathBuf>,
    pub plot_script: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: Model::reference(),
            family: LimitFamily::ProductH,
            window: Rect::new(-2.0, -0.2, -2.0, 2.0),
            grid: (128, 128),
            regime: RegimeOptions::default(),
            k_range: (8, 14),
            m_offset: 2,
            output: None,
            plot_script: false,
        }
    }
}

struct Entries {
    map: BTreeMap<String, (String, usize)>,
}

impl Entries {
    fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) =
                line.split_once('=').ok_or_else(|| Error::Config(format!("line {line_no}: expected 'key = value'")))?;
            let key = key.trim().to_string();
            if !KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("line {line_no}: unknown key '{key}'")));
            }
            if map.insert(key.clone(), (value.trim().to_string(), line_no)).is_some() {
                return Err(Error::Config(format!("line {line_no}: duplicate key '{key}'")));
            }
        }
        Ok(Self { map })
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.map.get(key) {
            None => Ok(default),
            Some((v, line)) => {
                v.parse().map_err(|_| Error::Config(format!("line {line}: cannot parse '{v}' for key '{key}'")))
            }
        }
    }
}

impl RunConfig {
    /// The built-in reference configuration.
    pub fn reference() -> Self {
        Self::default()
    }

    /// `ref-model` or a path to a config file.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if name_or_path == REFERENCE_NAME {
            return Ok(Self::reference());
        }
        Self::from_file(Path::new(name_or_path))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read '{}': {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let e = Entries::parse(text)?;
        let base = Self::default();
        let g = GlobalMapParams::reference();
        let s = SaddleNormalForm::reference();

        let lambda = e.get("lambda", s.lambda())?;
        let v_radius = e.get("v_radius", s.radius())?;
        let saddle = match e.map.get("p_coeffs") {
            None => SaddleNormalForm::product(lambda, vec![REFERENCE_P], v_radius)?,
            Some((v, line)) if v.eq_ignore_ascii_case("linear") || v.is_empty() => {
                SaddleNormalForm::linear(lambda, v_radius)
                    .map_err(|err| Error::Config(format!("line {line}: {err}")))?
            }
            Some((v, line)) => {
                let coeffs = v
                    .split(',')
                    .map(|c| c.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::Config(format!("line {line}: p_coeffs must be a comma list of reals")))?;
                SaddleNormalForm::product(lambda, coeffs, v_radius)?
            }
        };
        let configuration: Configuration = e.get("configuration", g.configuration)?;
        let orientation: Orientation = e.get("orientation", g.orientation)?;
        let global = GlobalMapParams::new(
            e.get("a", g.a)?,
            e.get("b", g.b)?,
            e.get("c", g.c)?,
            e.get("d", g.d)?,
            e.get("mu", g.mu)?,
            e.get("alpha1", g.alpha1)?,
            e.get("alpha2", g.alpha2)?,
            configuration,
            orientation,
        )?
        .with_pi_radius(e.get("pi_radius", g.pi_radius)?)?;
        let model = Model::new(saddle, global)?;

        let window = Rect::new(
            e.get("abscissa_min", base.window.x0)?,
            e.get("abscissa_max", base.window.x1)?,
            e.get("ordinate_min", base.window.y0)?,
            e.get("ordinate_max", base.window.y1)?,
        );
        let d = SolverOptions::default();
        let solver = SolverOptions {
            step_tol: e.get("newton_step_tol", d.step_tol)?,
            max_iter: e.get("newton_max_iter", d.max_iter)?,
            residual_tol: e.get("residual_tol", d.residual_tol)?,
            dedup_tol: e.get("dedup_tol", d.dedup_tol)?,
            symmetry_tol: e.get("symmetry_tol", d.symmetry_tol)?,
            unit_tol: e.get("unit_tol", d.unit_tol)?,
        };
        let regime = RegimeOptions {
            seed_half: e.get("seed_half", base.regime.seed_half)?,
            seed_grid: e.get("seed_grid", base.regime.seed_grid)?,
            threads: e.get("threads", base.regime.threads)?,
            solver,
        };
        let cfg = Self {
            model,
            family: e.get("family", base.family)?,
            window,
            grid: (e.get("grid_nx", base.grid.0)?, e.get("grid_ny", base.grid.1)?),
            regime,
            k_range: (e.get("k_min", base.k_range.0)?, e.get("k_max", base.k_range.1)?),
            m_offset: e.get("m_offset", base.m_offset)?,
            output: e.map.get("output").map(|(v, _)| PathBuf::from(v)),
            plot_script: e.get("plot_script", base.plot_script)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let w = self.window;
        if ![w.x0, w.x1, w.y0, w.y1].iter().all(|v| v.is_finite()) || !(w.x0 < w.x1 && w.y0 < w.y1) {
            return Err(Error::Config(
                "sweep window needs abscissa_min < abscissa_max and ordinate_min < ordinate_max".into(),
            ));
        }
        if self.grid.0 < 16 || self.grid.1 < 16 {
            return Err(Error::Config("grid_nx and grid_ny must be at least 16".into()));
        }
        if self.regime.seed_grid < 3 || !(self.regime.seed_half > 0.0) {
            return Err(Error::Config("seed_grid must be at least 3 and seed_half positive".into()));
        }
        let s = &self.regime.solver;
        let positive = [s.step_tol, s.residual_tol, s.dedup_tol, s.symmetry_tol, s.unit_tol];
        if !positive.iter().all(|v| *v > 0.0 && v.is_finite()) || s.max_iter == 0 {
            return Err(Error::Config("solver tolerances must be positive and newton_max_iter nonzero".into()));
        }
        if self.k_range.0 == 0 || self.k_range.0 > self.k_range.1 {
            return Err(Error::Config("k range needs 1 <= k_min <= k_max".into()));
        }
        Ok(())
    }

    /// The configuration as `key = value` text that [`RunConfig::parse`] reads back.
    pub fn to_text(&self) -> String {
        let g = &self.model.global;
        let s = &self.model.saddle;
        let p_coeffs = match s.nonlinearity() {
            crate::saddle::Nonlinearity::ProductPreserving(c) => {
                c.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(", ")
            }
            _ => "linear".into(),
        };
        let r = &self.regime;
        let mut lines = vec![
            format!("lambda = {:e}", s.lambda()),
            format!("p_coeffs = {p_coeffs}"),
            format!("v_radius = {:e}", s.radius()),
            format!("a = {:e}", g.a),
            format!("b = {:e}", g.b),
            format!("c = {:e}", g.c),
            format!("d = {:e}", g.d),
            format!("mu = {:e}", g.mu),
            format!("alpha1 = {:e}", g.alpha1),
            format!("alpha2 = {:e}", g.alpha2),
            format!("configuration = {}", g.configuration.name()),
            format!("orientation = {}", g.orientation.name()),
            format!("pi_radius = {:e}", g.pi_radius),
            format!("family = {}", self.family.name()),
            format!("abscissa_min = {:e}", self.window.x0),
            format!("abscissa_max = {:e}", self.window.x1),
            format!("ordinate_min = {:e}", self.window.y0),
            format!("ordinate_max = {:e}", self.window.y1),
            format!("grid_nx = {}", self.grid.0),
            format!("grid_ny = {}", self.grid.1),
            format!("seed_half = {:e}", r.seed_half),
            format!("seed_grid = {}", r.seed_grid),
            format!("threads = {}", r.threads),
            format!("newton_step_tol = {:e}", r.solver.step_tol),
            format!("newton_max_iter = {}", r.solver.max_iter),
            format!("residual_tol = {:e}", r.solver.residual_tol),
            format!("dedup_tol = {:e}", r.solver.dedup_tol),
            format!("symmetry_tol = {:e}", r.solver.symmetry_tol),
            format!("unit_tol = {:e}", r.solver.unit_tol),
            format!("k_min = {}", self.k_range.0),
            format!("k_max = {}", self.k_range.1),
            format!("m_offset = {}", self.m_offset),
            format!("plot_script = {}", self.plot_script),
        ];
        if let Some(p) = &self.output {
            lines.push(format!("output = {}", p.display()));
        }
        lines.join("\n") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_name_loads_defaults() {
        assert_eq!(RunConfig::load(REFERENCE_NAME).unwrap(), RunConfig::default());
    }

    #[test]
    fn empty_text_is_reference() {
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn overrides_and_comments() {
        let cfg = RunConfig::parse("mu = 1e-4  # small\nk_min = 9\nfamily = henon\ngrid_nx = 32\n").unwrap();
        assert_eq!(cfg.model.global.mu, 1e-4);
        assert_eq!(cfg.k_range, (9, 14));
        assert_eq!(cfg.family, LimitFamily::Henon);
        assert_eq!(cfg.grid, (32, 128));
    }

    #[test]
    fn unknown_key_rejected() {
        let err = RunConfig::parse("lamda = 0.5\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref m) if m.contains("unknown key 'lamda'")), "{err}");
    }

    #[test]
    fn duplicate_and_malformed_rejected() {
        assert!(RunConfig::parse("a = 1\na = 2\n").is_err());
        assert!(RunConfig::parse("a 1\n").is_err());
        assert!(RunConfig::parse("a = x\n").is_err());
    }

    #[test]
    fn module_invariants_checked() {
        // J1 = −bc must lie in (0, 1) in the orientable case
        assert!(RunConfig::parse("c = 0.5\n").is_err());
        assert!(RunConfig::parse("lambda = 1.5\n").is_err());
        assert!(RunConfig::parse("grid_nx = 8\n").is_err());
        assert!(RunConfig::parse("k_min = 15\nk_max = 14\n").is_err());
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = RunConfig::parse("mu = 2.5e-4\np_coeffs = 0.1, -0.05\n").unwrap();
        cfg.output = Some(PathBuf::from("out.csv"));
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn unreadable_file_is_config_error() {
        assert!(matches!(RunConfig::load("/nonexistent/revmix.cfg"), Err(Error::Config(_))));
    }
}
