//! Flat `key = value` run configuration files.
//!
//! Grammar: one `key`, optional spaces, `=`, value, newline per setting;
//! `#` starts a comment; blank lines are ignored. Unknown keys and values
//! that fail to parse are validation errors. Parse -> serialize -> parse is
//! the identity.

use mppfv::flux::MonotoneFluxKind;
use mppfv::integrate::DtRule;
use mppfv::problems::{make_problem, BarenblattMode, Problem, ProblemParams};
use mppfv::reconstruct::WeightMode;
use mppfv::{Result, SolverError};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub problem: String,
    pub nx: usize,
    pub ny: usize,
    pub order: usize,
    pub cflc: f64,
    pub cfld: f64,
    pub limiter: bool,
    pub limit_stages: bool,
    pub weight_mode: WeightMode,
    pub t_end: f64,
    pub monotone_flux: MonotoneFluxKind,
    pub dt_rule_kind: DtRuleKind,
    pub dt_cfl: f64,
    pub dt_exponent: f64,
    pub barenblatt_mode: BarenblattMode,
    pub m: usize,
    pub re: f64,
    pub swirl_period: Option<f64>,
    pub square_ic: bool,
    pub meshes: Vec<usize>,
    pub output_dir: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtRuleKind {
    Split,
    CflOverAlpha,
    Refined,
}

impl RunConfig {
    /// Registry defaults for a problem name; call before applying overrides.
    pub fn defaults_for(problem: &str) -> Result<Self> {
        let p = make_problem(problem, &ProblemParams::default())?;
        let d = p.defaults();
        let (kind, cfl, expo) = match d.dt_rule {
            DtRule::CflSplit => (DtRuleKind::Split, d.cflc, 1.0),
            DtRule::CflOverAlpha { cfl } => (DtRuleKind::CflOverAlpha, cfl, 1.0),
            DtRule::TemporalRefined { cfl, exponent } => (DtRuleKind::Refined, cfl, exponent),
        };
        Ok(Self {
            problem: problem.into(),
            nx: *d.meshes.last().unwrap_or(&100),
            ny: 0,
            order: 2 * d.k + 1,
            cflc: d.cflc,
            cfld: d.cfld,
            limiter: true,
            limit_stages: false,
            weight_mode: WeightMode::Linear,
            t_end: d.t_end,
            monotone_flux: d.monotone,
            dt_rule_kind: kind,
            dt_cfl: cfl,
            dt_exponent: expo,
            barenblatt_mode: BarenblattMode::Standard,
            m: 2,
            re: 100.0,
            swirl_period: None,
            square_ic: false,
            meshes: d.meshes.clone(),
            output_dir: ".".into(),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut problem: Option<String> = None;
        let mut pairs: Vec<(String, String)> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(i) => &raw[..i],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                return Err(SolverError::InvalidConfig(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            let key = line[..eq].trim().to_string();
            let value = line[eq + 1..].trim().to_string();
            if key == "problem" {
                problem = Some(value);
            } else {
                pairs.push((key, value));
            }
        }
        let problem = problem
            .ok_or_else(|| SolverError::InvalidConfig("missing required key `problem`".into()))?;
        let mut cfg = Self::defaults_for(&problem)?;
        for (key, value) in pairs {
            cfg.apply(&key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let bad =
            |what: &str| SolverError::InvalidConfig(format!("key `{what}`: cannot parse value"));
        match key {
            "nx" => self.nx = value.parse().map_err(|_| bad(key))?,
            "ny" => self.ny = value.parse().map_err(|_| bad(key))?,
            "order" => self.order = value.parse().map_err(|_| bad(key))?,
            "cflc" => self.cflc = value.parse().map_err(|_| bad(key))?,
            "cfld" => self.cfld = value.parse().map_err(|_| bad(key))?,
            "limiter" => self.limiter = parse_switch(value)?,
            "limit_stages" => self.limit_stages = parse_switch(value)?,
            "weight_mode" => {
                self.weight_mode = match value {
                    "linear" => WeightMode::Linear,
                    "weno" => WeightMode::WenoJs,
                    _ => return Err(bad(key)),
                }
            }
            "t_end" => self.t_end = value.parse().map_err(|_| bad(key))?,
            "monotone_flux" => {
                self.monotone_flux = match value {
                    "lf" => MonotoneFluxKind::GlobalLaxFriedrichs,
                    "godunov" => MonotoneFluxKind::Godunov,
                    "overdiffusive" => MonotoneFluxKind::OverDiffusiveLf { alpha: 1.2 },
                    _ => return Err(bad(key)),
                }
            }
            "alpha" => {
                let a: f64 = value.parse().map_err(|_| bad(key))?;
                if let MonotoneFluxKind::OverDiffusiveLf { alpha } = &mut self.monotone_flux {
                    *alpha = a;
                } else {
                    return Err(SolverError::InvalidConfig(
                        "`alpha` only applies to monotone_flux = overdiffusive".into(),
                    ));
                }
            }
            "dt_rule" => {
                self.dt_rule_kind = match value {
                    "split" => DtRuleKind::Split,
                    "cfl_over_alpha" => DtRuleKind::CflOverAlpha,
                    "refined" => DtRuleKind::Refined,
                    _ => return Err(bad(key)),
                }
            }
            "dt_cfl" => self.dt_cfl = value.parse().map_err(|_| bad(key))?,
            "dt_exponent" => self.dt_exponent = value.parse().map_err(|_| bad(key))?,
            "barenblatt_mode" => {
                self.barenblatt_mode = match value {
                    "standard" => BarenblattMode::Standard,
                    "alt" => BarenblattMode::AltExponent,
                    _ => return Err(bad(key)),
                }
            }
            "square_ic" => self.square_ic = parse_switch(value)?,
            "m" => self.m = value.parse().map_err(|_| bad(key))?,
            "re" => self.re = value.parse().map_err(|_| bad(key))?,
            "swirl_period" => {
                self.swirl_period = if value.is_empty() {
                    None
                } else {
                    Some(value.parse().map_err(|_| bad(key))?)
                }
            }
            "meshes" => {
                let mut meshes = Vec::new();
                for part in value.split(',') {
                    let part = part.trim();
                    if part.is_empty() {
                        continue;
                    }
                    meshes.push(part.parse().map_err(|_| bad(key))?);
                }
                self.meshes = meshes;
            }
            "output_dir" => self.output_dir = value.into(),
            other => return Err(SolverError::InvalidConfig(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if ![5usize, 7, 9].contains(&self.order) {
            return Err(SolverError::InvalidConfig(format!(
                "order must be 5, 7 or 9, got {}",
                self.order
            )));
        }
        if self.weight_mode == WeightMode::WenoJs && self.order != 5 {
            return Err(SolverError::InvalidConfig(
                "weight_mode = weno requires order = 5".into(),
            ));
        }
        if !(self.t_end > 0.0) {
            return Err(SolverError::InvalidConfig(format!(
                "t_end must be positive, got {}",
                self.t_end
            )));
        }
        if self.nx == 0 {
            return Err(SolverError::InvalidConfig("nx must be positive".into()));
        }
        // the problem must exist with these parameters
        let _ = self.build_problem()?;
        Ok(())
    }

    pub fn problem_params(&self) -> ProblemParams {
        ProblemParams {
            m: self.m,
            re: self.re,
            barenblatt_mode: self.barenblatt_mode,
            swirl_period: self.swirl_period,
            square_ic: self.square_ic,
        }
    }

    pub fn build_problem(&self) -> Result<Problem> {
        make_problem(&self.problem, &self.problem_params())
    }

    pub fn dt_rule(&self) -> DtRule {
        match self.dt_rule_kind {
            DtRuleKind::Split => DtRule::CflSplit,
            DtRuleKind::CflOverAlpha => DtRule::CflOverAlpha { cfl: self.dt_cfl },
            DtRuleKind::Refined => DtRule::TemporalRefined {
                cfl: self.dt_cfl,
                exponent: self.dt_exponent,
            },
        }
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        kv("problem", self.problem.clone());
        kv("nx", self.nx.to_string());
        kv("ny", self.ny.to_string());
        kv("order", self.order.to_string());
        kv("cflc", fmt_f64(self.cflc));
        kv("cfld", fmt_f64(self.cfld));
        kv("limiter", switch(self.limiter));
        kv("limit_stages", switch(self.limit_stages));
        kv(
            "weight_mode",
            match self.weight_mode {
                WeightMode::Linear => "linear".into(),
                WeightMode::WenoJs => "weno".into(),
            },
        );
        kv("t_end", fmt_f64(self.t_end));
        match self.monotone_flux {
            MonotoneFluxKind::GlobalLaxFriedrichs => kv("monotone_flux", "lf".into()),
            MonotoneFluxKind::Godunov => kv("monotone_flux", "godunov".into()),
            MonotoneFluxKind::OverDiffusiveLf { alpha } => {
                kv("monotone_flux", "overdiffusive".into());
                kv("alpha", fmt_f64(alpha));
            }
        }
        kv(
            "dt_rule",
            match self.dt_rule_kind {
                DtRuleKind::Split => "split".into(),
                DtRuleKind::CflOverAlpha => "cfl_over_alpha".into(),
                DtRuleKind::Refined => "refined".into(),
            },
        );
        kv("dt_cfl", fmt_f64(self.dt_cfl));
        kv("dt_exponent", fmt_f64(self.dt_exponent));
        kv(
            "barenblatt_mode",
            match self.barenblatt_mode {
                BarenblattMode::Standard => "standard".into(),
                BarenblattMode::AltExponent => "alt".into(),
            },
        );
        kv("m", self.m.to_string());
        kv("re", fmt_f64(self.re));
        if let Some(p) = self.swirl_period {
            kv("swirl_period", fmt_f64(p));
        }
        kv("square_ic", switch(self.square_ic));
        kv(
            "meshes",
            self.meshes
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        kv("output_dir", self.output_dir.clone());
        out
    }
}

fn parse_switch(value: &str) -> Result<bool> {
    match value {
        "on" | "true" | "1" => Ok(true),
        "off" | "false" | "0" => Ok(false),
        other => Err(SolverError::InvalidConfig(format!(
            "expected on/off, got `{other}`"
        ))),
    }
}

fn switch(v: bool) -> String {
    if v { "on" } else { "off" }.into()
}

/// Shortest decimal that round-trips the f64.
fn fmt_f64(v: f64) -> String {
    let s = format!("{v}");
    debug_assert_eq!(s.parse::<f64>().unwrap(), v);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_and_roundtrip() {
        let cfg = RunConfig::parse("problem = linear_1d\nnx = 50\n").unwrap();
        assert_eq!(cfg.problem, "linear_1d");
        assert_eq!(cfg.nx, 50);
        assert_eq!(cfg.order, 5);
        let text = cfg.serialize();
        let again = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(text, again.serialize());
    }

    #[test]
    fn comments_and_spacing() {
        let cfg =
            RunConfig::parse("# a comment\nproblem=burgers_1d # trailing\n  t_end =  0.01  \n\n")
                .unwrap();
        assert_eq!(cfg.problem, "burgers_1d");
        assert_eq!(cfg.t_end, 0.01);
    }

    #[test]
    fn unknown_problem_rejected() {
        assert!(RunConfig::parse("problem = nonexistent\n").is_err());
    }

    #[test]
    fn zero_t_end_rejected() {
        assert!(RunConfig::parse("problem = linear_1d\nt_end = 0\n").is_err());
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(RunConfig::parse("problem = linear_1d\nwumbo = 3\n").is_err());
    }

    #[test]
    fn weno_requires_order_five() {
        assert!(RunConfig::parse("problem = linear_1d\nweight_mode = weno\norder = 7\n").is_err());
        assert!(RunConfig::parse("problem = linear_1d\nweight_mode = weno\n").is_ok());
    }

    #[test]
    fn overdiffusive_alpha_roundtrip() {
        let cfg = RunConfig::parse(
            "problem = advection_study_1d\nmonotone_flux = overdiffusive\nalpha = 1.5\n",
        )
        .unwrap();
        assert_eq!(
            cfg.monotone_flux,
            MonotoneFluxKind::OverDiffusiveLf { alpha: 1.5 }
        );
        let again = RunConfig::parse(&cfg.serialize()).unwrap();
        assert_eq!(cfg, again);
    }
}
