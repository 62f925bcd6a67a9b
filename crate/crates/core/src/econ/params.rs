use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Observable project quality. `B` projects succeed faster than `A` projects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProjectType {
    A,
    B,
}

impl ProjectType {
    pub const ALL: [ProjectType; 2] = [ProjectType::A, ProjectType::B];

    /// Success rate of a high-type agent matched to this project type.
    pub fn rate(self, params: &EconomyParams) -> f64 {
        match self {
            ProjectType::A => params.lambda_a,
            ProjectType::B => params.lambda_b,
        }
    }

    /// Mass of available projects of this type.
    pub fn mass(self, params: &EconomyParams) -> f64 {
        match self {
            ProjectType::A => params.phi_a,
            ProjectType::B => params.phi_b,
        }
    }
}

impl fmt::Display for ProjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectType::A => f.write_str("a"),
            ProjectType::B => f.write_str("b"),
        }
    }
}

/// The seven primitives of the economy.
///
/// Construction validates `r > 0`, `kappa, phi_a, phi_b >= 0` and
/// `0 < c < lambda_a < lambda_b`; a value of this type is always valid.
/// The JSON form is a flat object with exactly the seven keys below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, try_from = "RawParams")]
pub struct EconomyParams {
    r: f64,
    lambda_a: f64,
    lambda_b: f64,
    c: f64,
    kappa: f64,
    phi_a: f64,
    phi_b: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    r: f64,
    lambda_a: f64,
    lambda_b: f64,
    c: f64,
    kappa: f64,
    phi_a: f64,
    phi_b: f64,
}

impl TryFrom<RawParams> for EconomyParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        EconomyParams::new(
            raw.r,
            raw.lambda_a,
            raw.lambda_b,
            raw.c,
            raw.kappa,
            raw.phi_a,
            raw.phi_b,
        )
    }
}

impl EconomyParams {
    pub fn new(
        r: f64,
        lambda_a: f64,
        lambda_b: f64,
        c: f64,
        kappa: f64,
        phi_a: f64,
        phi_b: f64,
    ) -> Result<Self> {
        let params = EconomyParams {
            r,
            lambda_a,
            lambda_b,
            c,
            kappa,
            phi_a,
            phi_b,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        let all = [
            self.r,
            self.lambda_a,
            self.lambda_b,
            self.c,
            self.kappa,
            self.phi_a,
            self.phi_b,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all primitives must be finite".into()));
        }
        if self.r <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "r = {} must be positive",
                self.r
            )));
        }
        if self.kappa < 0.0 || self.phi_a < 0.0 || self.phi_b < 0.0 {
            return Err(Error::InvalidParams(
                "kappa, phi_a and phi_b must be non-negative".into(),
            ));
        }
        if !(0.0 < self.c && self.c < self.lambda_a && self.lambda_a < self.lambda_b) {
            return Err(Error::InvalidParams(format!(
                "need 0 < c < lambda_a < lambda_b, got c = {}, lambda_a = {}, lambda_b = {}",
                self.c, self.lambda_a, self.lambda_b
            )));
        }
        Ok(())
    }

    /// Reference low-cost economy for the learning model:
    /// `r = 0.9, λa = 1.8, λb = 3, c = 1.2, κ = 0.8, φa = 0.35, φb = 0.4`.
    pub fn learning_example() -> Self {
        EconomyParams::new(0.9, 1.8, 3.0, 1.2, 0.8, 0.35, 0.4).expect("valid example")
    }

    /// Reference low-cost economy for the no-learning benchmark:
    /// `r = 0.9, λa = 1.5, λb = 3.8, c = 0.6, κ = 2.1, φa = 3, φb = 0.4`.
    pub fn no_learning_example() -> Self {
        EconomyParams::new(0.9, 1.5, 3.8, 0.6, 2.1, 3.0, 0.4).expect("valid example")
    }

    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn lambda_a(&self) -> f64 {
        self.lambda_a
    }
    pub fn lambda_b(&self) -> f64 {
        self.lambda_b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn kappa(&self) -> f64 {
        self.kappa
    }
    pub fn phi_a(&self) -> f64 {
        self.phi_a
    }
    pub fn phi_b(&self) -> f64 {
        self.phi_b
    }

    /// Meeting rate with type-`q` projects, `κ φ_q`.
    pub fn meeting_rate(&self, q: ProjectType) -> f64 {
        self.kappa * q.mass(self)
    }

    /// Total meeting rate `κ (φ_a + φ_b)`.
    pub fn total_meeting_rate(&self) -> f64 {
        self.kappa * (self.phi_a + self.phi_b)
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::R => self.r,
            ParamName::LambdaA => self.lambda_a,
            ParamName::LambdaB => self.lambda_b,
            ParamName::C => self.c,
            ParamName::Kappa => self.kappa,
            ParamName::PhiA => self.phi_a,
            ParamName::PhiB => self.phi_b,
        }
    }

    /// Copy with one primitive replaced; fails if the result is invalid.
    pub fn with(&self, name: ParamName, value: f64) -> Result<Self> {
        let mut out = *self;
        match name {
            ParamName::R => out.r = value,
            ParamName::LambdaA => out.lambda_a = value,
            ParamName::LambdaB => out.lambda_b = value,
            ParamName::C => out.c = value,
            ParamName::Kappa => out.kappa = value,
            ParamName::PhiA => out.phi_a = value,
            ParamName::PhiB => out.phi_b = value,
        }
        out.validate()?;
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }
}

/// Name of one of the seven primitives, as used in JSON and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamName {
    R,
    LambdaA,
    LambdaB,
    C,
    Kappa,
    PhiA,
    PhiB,
}

impl ParamName {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::R => "r",
            ParamName::LambdaA => "lambda_a",
            ParamName::LambdaB => "lambda_b",
            ParamName::C => "c",
            ParamName::Kappa => "kappa",
            ParamName::PhiA => "phi_a",
            ParamName::PhiB => "phi_b",
        }
    }
}

impl fmt::Display for ParamName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ParamName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "r" => ParamName::R,
            "lambda_a" => ParamName::LambdaA,
            "lambda_b" => ParamName::LambdaB,
            "c" => ParamName::C,
            "kappa" => ParamName::Kappa,
            "phi_a" => ParamName::PhiA,
            "phi_b" => ParamName::PhiB,
            other => return Err(Error::InvalidParams(format!("unknown parameter `{other}`"))),
        })
    }
}
