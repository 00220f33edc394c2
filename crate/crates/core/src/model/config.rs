//! Model variants and prior hyperparameters.
//!
//! Configs are stored as plain `key = value` lines so they can be edited by
//! hand; see [`ModelConfig::to_config_string`] for the full key list.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointModel {
    /// Log-linear Poisson for the loser's baseline points, no upper limit.
    Poisson,
    /// Right-truncated negative binomial on `[0, r - 2]`.
    TruncNegBin,
    /// Truncated negative binomial plus zero-inflated Poisson extra points.
    ZipTruncNegBin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AbilityMode {
    /// Separate set and point abilities (`v1 = 1, v2 = 0`).
    Separate,
    /// Set probability driven by `theta` times the point abilities (`v1 = 0, v2 = 1`).
    Connected,
    /// Connected plus extra set abilities (`v1 = v2 = 1`).
    ConnectedPlusExtra,
}

impl AbilityMode {
    pub fn v1(self) -> bool {
        !matches!(self, AbilityMode::Connected)
    }

    pub fn v2(self) -> bool {
        !matches!(self, AbilityMode::Separate)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dynamics {
    None,
    DynamicBeta,
    DynamicAlpha,
}

/// Shape of the ability-difference term in the tie probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiForm {
    Null,
    Linear,
    AbsLinear,
    Quadratic,
    AbsQuadratic,
}

impl PhiForm {
    /// `(linear part, quadratic part)` of the basis at `x`; the coefficients
    /// multiplying these are `delta`/`gamma` and `delta_sq`/`gamma_sq`.
    pub fn basis(self, x: f64) -> (f64, f64) {
        match self {
            PhiForm::Null => (0.0, 0.0),
            PhiForm::Linear => (x, 0.0),
            PhiForm::AbsLinear => (x.abs(), 0.0),
            PhiForm::Quadratic => (x, x * x),
            PhiForm::AbsQuadratic => (x.abs(), x * x),
        }
    }

    pub fn has_linear(self) -> bool {
        self != PhiForm::Null
    }

    pub fn has_quadratic(self) -> bool {
        matches!(self, PhiForm::Quadratic | PhiForm::AbsQuadratic)
    }
}

/// League points awarded per match.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeagueScoring {
    /// 3-0 and 3-1 give 3/0, 3-2 gives 2/1.
    SuperLega,
    /// `3 * [margin > 1] + [margin = 1]` for the winner, nothing for the loser.
    Printed,
}

impl LeagueScoring {
    /// Points for a side that won `won` sets and lost `lost`.
    pub fn points(self, won: u32, lost: u32) -> u32 {
        match self {
            LeagueScoring::SuperLega => match (won, lost) {
                (3, 0) | (3, 1) => 3,
                (3, 2) => 2,
                (2, 3) => 1,
                _ => 0,
            },
            LeagueScoring::Printed => {
                if won > lost + 1 {
                    3
                } else if won == lost + 1 {
                    1
                } else {
                    0
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Priors {
    /// sd of the starred ability priors.
    pub ability_sd: f64,
    pub mu_sd: f64,
    pub theta_sd: f64,
    pub h_set_sd: f64,
    pub h_point_sd: f64,
    /// sd for `delta`, `gamma` and the quadratic coefficients.
    pub coef_sd: f64,
    pub m_sd: f64,
    /// log-normal `(lambda_log_mean, lambda_log_sd^2)` for lambda.
    pub lambda_log_mean: f64,
    pub lambda_log_sd: f64,
    pub eps_shape: f64,
    pub eps_scale: f64,
    pub alpha_var_shape: f64,
    pub alpha_var_scale: f64,
    pub beta_var_shape: f64,
    pub beta_var_scale: f64,
}

impl Default for Priors {
    fn default() -> Self {
        Priors {
            ability_sd: 2.0,
            mu_sd: 1e3,
            theta_sd: 1e3,
            h_set_sd: 1e3,
            h_point_sd: 1e3,
            coef_sd: 1e3,
            m_sd: 1.0,
            lambda_log_mean: 0.0,
            lambda_log_sd: 1.0,
            eps_shape: 0.001,
            eps_scale: 0.001,
            alpha_var_shape: 0.001,
            alpha_var_scale: 0.001,
            beta_var_shape: 0.001,
            beta_var_scale: 0.001,
        }
    }
}

const PRIOR_KEYS: [&str; 15] = [
    "ability_sd",
    "mu_sd",
    "theta_sd",
    "h_set_sd",
    "h_point_sd",
    "coef_sd",
    "m_sd",
    "lambda_log_mean",
    "lambda_log_sd",
    "eps_shape",
    "eps_scale",
    "alpha_var_shape",
    "alpha_var_scale",
    "beta_var_shape",
    "beta_var_scale",
];

impl Priors {
    pub fn keys() -> &'static [&'static str] {
        &PRIOR_KEYS
    }

    fn slot(&mut self, key: &str) -> Option<&mut f64> {
        Some(match key {
            "ability_sd" => &mut self.ability_sd,
            "mu_sd" => &mut self.mu_sd,
            "theta_sd" => &mut self.theta_sd,
            "h_set_sd" => &mut self.h_set_sd,
            "h_point_sd" => &mut self.h_point_sd,
            "coef_sd" => &mut self.coef_sd,
            "m_sd" => &mut self.m_sd,
            "lambda_log_mean" => &mut self.lambda_log_mean,
            "lambda_log_sd" => &mut self.lambda_log_sd,
            "eps_shape" => &mut self.eps_shape,
            "eps_scale" => &mut self.eps_scale,
            "alpha_var_shape" => &mut self.alpha_var_shape,
            "alpha_var_scale" => &mut self.alpha_var_scale,
            "beta_var_shape" => &mut self.beta_var_shape,
            "beta_var_scale" => &mut self.beta_var_scale,
            _ => return None,
        })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        let mut copy = *self;
        copy.slot(key).map(|v| *v)
    }

    /// Sets one hyperparameter by key. Shape/scale pairs can be set together
    /// with the `*_var` / `eps` shorthands (`alpha_var = 2` sets both).
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::Config(format!("{key} must be finite")));
        }
        let pair = match key {
            "eps" => Some(("eps_shape", "eps_scale")),
            "alpha_var" => Some(("alpha_var_shape", "alpha_var_scale")),
            "beta_var" => Some(("beta_var_shape", "beta_var_scale")),
            _ => None,
        };
        if let Some((a, b)) = pair {
            self.set(a, value)?;
            return self.set(b, value);
        }
        if key != "lambda_log_mean" && value <= 0.0 {
            return Err(Error::Config(format!("{key} must be positive")));
        }
        let slot = self
            .slot(key)
            .ok_or_else(|| Error::Config(format!("unknown prior key {key:?}")))?;
        *slot = value;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub point_model: PointModel,
    pub random_effects: bool,
    pub ability_mode: AbilityMode,
    /// Team names (or unique name fragments) carrying extra set abilities
    /// under [`AbilityMode::ConnectedPlusExtra`]. Empty means every team.
    pub extra_set_ability_teams: Vec<String>,
    pub attack_defence_split: bool,
    pub dynamics: Dynamics,
    pub phi_form: PhiForm,
    pub priors: Priors,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig::preset(9).expect("model 9 exists")
    }
}

impl ModelConfig {
    fn base(point_model: PointModel, ability_mode: AbilityMode) -> Self {
        ModelConfig {
            point_model,
            random_effects: false,
            ability_mode,
            extra_set_ability_teams: Vec::new(),
            attack_defence_split: false,
            dynamics: Dynamics::None,
            phi_form: PhiForm::Null,
            priors: Priors::default(),
        }
    }

    /// The numbered variants 1-15.
    pub fn preset(number: u8) -> Result<Self> {
        use AbilityMode::*;
        use PointModel::*;
        let two = || vec!["Verona".to_string(), "Padova".to_string()];
        let cfg = match number {
            1 => Self::base(Poisson, Separate),
            2 => Self::base(TruncNegBin, Separate),
            3 => Self::base(ZipTruncNegBin, Separate),
            4 => ModelConfig {
                random_effects: true,
                ..Self::base(ZipTruncNegBin, Separate)
            },
            5 => ModelConfig {
                attack_defence_split: true,
                ..Self::base(ZipTruncNegBin, Separate)
            },
            6 => Self::base(ZipTruncNegBin, Connected),
            7 => Self::base(ZipTruncNegBin, ConnectedPlusExtra),
            8 => ModelConfig {
                extra_set_ability_teams: vec!["Verona".to_string()],
                ..Self::base(ZipTruncNegBin, ConnectedPlusExtra)
            },
            9 => ModelConfig {
                extra_set_ability_teams: two(),
                ..Self::base(ZipTruncNegBin, ConnectedPlusExtra)
            },
            10 => ModelConfig {
                dynamics: Dynamics::DynamicBeta,
                ..Self::base(ZipTruncNegBin, Separate)
            },
            11 => ModelConfig {
                dynamics: Dynamics::DynamicAlpha,
                ..Self::base(ZipTruncNegBin, Separate)
            },
            12..=15 => ModelConfig {
                extra_set_ability_teams: two(),
                phi_form: match number {
                    12 => PhiForm::Linear,
                    13 => PhiForm::AbsLinear,
                    14 => PhiForm::Quadratic,
                    _ => PhiForm::AbsQuadratic,
                },
                ..Self::base(ZipTruncNegBin, ConnectedPlusExtra)
            },
            _ => return Err(Error::Config(format!("no model {number}; presets are 1-15"))),
        };
        Ok(cfg)
    }

    pub fn has_set_abilities(&self) -> bool {
        self.ability_mode.v1()
    }

    pub fn validate(&self) -> Result<()> {
        if self.phi_form != PhiForm::Null && self.point_model != PointModel::ZipTruncNegBin {
            return Err(Error::Config(
                "phi_form requires the zero-inflated point model".into(),
            ));
        }
        if self.dynamics == Dynamics::DynamicAlpha {
            if !self.has_set_abilities() {
                return Err(Error::Config("dynamic set abilities need v1 = 1".into()));
            }
            if !self.extra_set_ability_teams.is_empty() {
                return Err(Error::Config(
                    "dynamic set abilities are defined for all teams only".into(),
                ));
            }
        }
        if self.attack_defence_split && self.dynamics == Dynamics::DynamicBeta {
            return Err(Error::Config(
                "attack/defence split is static only".into(),
            ));
        }
        if self.ability_mode != AbilityMode::ConnectedPlusExtra
            && !self.extra_set_ability_teams.is_empty()
        {
            return Err(Error::Config(
                "extra_set_ability_teams only applies to connected_plus_extra".into(),
            ));
        }
        Ok(())
    }

    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        line("point_model", self.point_model.to_string());
        line("random_effects", self.random_effects.to_string());
        line("ability_mode", self.ability_mode.to_string());
        line("extra_set_ability_teams", self.extra_set_ability_teams.join(", "));
        line("attack_defence_split", self.attack_defence_split.to_string());
        line("dynamics", self.dynamics.to_string());
        line("phi_form", self.phi_form.to_string());
        for key in Priors::keys() {
            line(key, format!("{}", self.priors.get(key).unwrap()));
        }
        out
    }

    /// Parses `key = value` lines. `#` starts a comment. A `model = N` line
    /// starts from preset `N`; other keys override it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", no + 1)))?;
            entries.push((no + 1, k.trim().to_string(), v.trim().to_string()));
        }
        let mut cfg = match entries.iter().find(|(_, k, _)| k == "model") {
            Some((no, _, v)) => {
                let n: u8 = v
                    .parse()
                    .map_err(|_| Error::Config(format!("line {no}: bad model number {v:?}")))?;
                ModelConfig::preset(n)?
            }
            None => ModelConfig::preset(9)?,
        };
        for (no, k, v) in entries {
            let bad = |what: &str| Error::Config(format!("line {no}: bad {what} {v:?}"));
            match k.as_str() {
                "model" => {}
                "point_model" => cfg.point_model = v.parse().map_err(|_| bad("point_model"))?,
                "random_effects" => cfg.random_effects = parse_bool(&v).ok_or_else(|| bad("flag"))?,
                "ability_mode" => cfg.ability_mode = v.parse().map_err(|_| bad("ability_mode"))?,
                "extra_set_ability_teams" => {
                    cfg.extra_set_ability_teams = v
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect()
                }
                "attack_defence_split" => {
                    cfg.attack_defence_split = parse_bool(&v).ok_or_else(|| bad("flag"))?
                }
                "dynamics" => cfg.dynamics = v.parse().map_err(|_| bad("dynamics"))?,
                "phi_form" => cfg.phi_form = v.parse().map_err(|_| bad("phi_form"))?,
                key => {
                    let value: f64 = v.parse().map_err(|_| bad("number"))?;
                    cfg.priors
                        .set(key, value)
                        .map_err(|e| Error::Config(format!("line {no}: {e}")))?;
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_bool(v: &str) -> Option<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Some(true),
        "false" | "no" | "0" | "off" => Some(false),
        _ => None,
    }
}

macro_rules! keyword_enum {
    ($ty:ty { $($variant:path => $word:literal),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $word),+ })
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($word => Ok($variant),)+
                    _ => Err(Error::Config(format!("unknown value {s:?}"))),
                }
            }
        }
    };
}

keyword_enum!(PointModel {
    PointModel::Poisson => "poisson",
    PointModel::TruncNegBin => "trunc_negbin",
    PointModel::ZipTruncNegBin => "zip_trunc_negbin",
});

keyword_enum!(AbilityMode {
    AbilityMode::Separate => "separate",
    AbilityMode::Connected => "connected",
    AbilityMode::ConnectedPlusExtra => "connected_plus_extra",
});

keyword_enum!(Dynamics {
    Dynamics::None => "none",
    Dynamics::DynamicBeta => "dynamic_beta",
    Dynamics::DynamicAlpha => "dynamic_alpha",
});

keyword_enum!(PhiForm {
    PhiForm::Null => "null",
    PhiForm::Linear => "linear",
    PhiForm::AbsLinear => "abs_linear",
    PhiForm::Quadratic => "quadratic",
    PhiForm::AbsQuadratic => "abs_quadratic",
});

keyword_enum!(LeagueScoring {
    LeagueScoring::SuperLega => "superlega",
    LeagueScoring::Printed => "printed",
});

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_round_trip() {
        for n in 1..=15 {
            let cfg = ModelConfig::preset(n).unwrap();
            cfg.validate().unwrap();
            let back = ModelConfig::parse(&cfg.to_config_string()).unwrap();
            assert_eq!(back, cfg, "model {n}");
        }
        assert!(ModelConfig::preset(16).is_err());
    }

    #[test]
    fn parse_overrides_preset() {
        let cfg = ModelConfig::parse("model = 3\nrandom_effects = yes # model 4\nmu_sd = 10\n").unwrap();
        assert!(cfg.random_effects);
        assert_eq!(cfg.point_model, PointModel::ZipTruncNegBin);
        assert_eq!(cfg.priors.mu_sd, 10.0);
    }

    #[test]
    fn phi_needs_zip() {
        assert!(ModelConfig::parse("model = 2\nphi_form = linear").is_err());
    }

    #[test]
    fn bad_lines() {
        assert!(ModelConfig::parse("nonsense").is_err());
        assert!(ModelConfig::parse("mu_sd = -1").is_err());
        assert!(ModelConfig::parse("unknown_key = 1").is_err());
    }

    #[test]
    fn scoring_rules() {
        let s = LeagueScoring::SuperLega;
        assert_eq!((s.points(3, 0), s.points(0, 3)), (3, 0));
        assert_eq!((s.points(3, 1), s.points(1, 3)), (3, 0));
        assert_eq!((s.points(3, 2), s.points(2, 3)), (2, 1));
        let p = LeagueScoring::Printed;
        assert_eq!((p.points(3, 2), p.points(2, 3)), (1, 0));
        assert_eq!(p.points(3, 1), 3);
    }
}
