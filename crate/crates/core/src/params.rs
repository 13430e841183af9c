//! Model configuration shared by every module.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Neumann,
    Dirichlet,
    Periodic,
}

impl Boundary {
    pub const ALL: [Boundary; 3] = [Boundary::Neumann, Boundary::Dirichlet, Boundary::Periodic];

    pub fn as_str(self) -> &'static str {
        match self {
            Boundary::Neumann => "neumann",
            Boundary::Dirichlet => "dirichlet",
            Boundary::Periodic => "periodic",
        }
    }
}

impl std::str::FromStr for Boundary {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann" => Ok(Boundary::Neumann),
            "dirichlet" => Ok(Boundary::Dirichlet),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(crate::Error::Parse(format!("unknown boundary condition `{other}`"))),
        }
    }
}

/// Named globally Lipschitz noise coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedSigma {
    /// `sin(u)`, Lipschitz constant 1.
    Sin,
    /// `tanh(u)`, Lipschitz constant 1.
    Tanh,
    /// `sqrt(1 + u^2)`, Lipschitz constant 1.
    SqrtOnePlusSquare,
}

impl NamedSigma {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            NamedSigma::Sin => u.sin(),
            NamedSigma::Tanh => u.tanh(),
            NamedSigma::SqrtOnePlusSquare => u.hypot(1.0),
        }
    }

    /// Smallest valid Lipschitz constant.
    pub fn lipschitz(self) -> f64 {
        1.0
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NamedSigma::Sin => "sin",
            NamedSigma::Tanh => "tanh",
            NamedSigma::SqrtOnePlusSquare => "sqrt-one-plus-square",
        }
    }
}

impl std::str::FromStr for NamedSigma {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin" => Ok(NamedSigma::Sin),
            "tanh" => Ok(NamedSigma::Tanh),
            "sqrt-one-plus-square" => Ok(NamedSigma::SqrtOnePlusSquare),
            other => Err(crate::Error::Parse(format!("unknown sigma function `{other}`"))),
        }
    }
}

/// Noise coefficient `sigma(u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Sigma {
    /// `sigma1 * u + sigma0`
    Affine { sigma1: f64, sigma0: f64 },
    /// A named nonlinear coefficient with its declared Lipschitz constant.
    Named { func: NamedSigma, lipschitz: f64 },
}

impl Sigma {
    pub fn affine(sigma1: f64, sigma0: f64) -> Self {
        Sigma::Affine { sigma1, sigma0 }
    }

    pub fn named(func: NamedSigma) -> Self {
        Sigma::Named {
            func,
            lipschitz: func.lipschitz(),
        }
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match *self {
            Sigma::Affine { sigma1, sigma0 } => sigma1 * u + sigma0,
            Sigma::Named { func, .. } => func.eval(u),
        }
    }

    /// `(sigma1, sigma0)` for affine coefficients.
    pub fn as_affine(&self) -> Option<(f64, f64)> {
        match *self {
            Sigma::Affine { sigma1, sigma0 } => Some((sigma1, sigma0)),
            Sigma::Named { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(*self, Sigma::Affine { sigma1, sigma0 } if sigma1 == 0.0 && sigma0 == 0.0)
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Sigma::Affine { sigma1, sigma0 } => {
                if !sigma1.is_finite() || !sigma0.is_finite() {
                    return Err(domain("affine sigma coefficients must be finite"));
                }
            }
            Sigma::Named { func, lipschitz } => {
                if !lipschitz.is_finite() || lipschitz < func.lipschitz() {
                    return Err(domain(format!(
                        "declared Lipschitz constant {lipschitz} for `{}` must be finite and >= {}",
                        func.as_str(),
                        func.lipschitz()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Physical and model configuration: leak rate `alpha`, twice the diffusion
/// rate `beta`, interval length `L`, time horizon `T`, boundary condition and
/// noise coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub beta: f64,
    pub domain_length: f64,
    pub horizon: f64,
    pub boundary: Boundary,
    pub sigma: Sigma,
}

impl ModelParams {
    pub fn new(
        alpha: f64,
        beta: f64,
        domain_length: f64,
        horizon: f64,
        boundary: Boundary,
        sigma: Sigma,
    ) -> Result<Self> {
        let params = ModelParams {
            alpha,
            beta,
            domain_length,
            horizon,
            boundary,
            sigma,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(domain("alpha must be finite"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(domain(format!("beta must be positive, got {}", self.beta)));
        }
        if !(self.domain_length >= 1.0 && self.domain_length.is_finite()) {
            return Err(domain(format!(
                "domain length must be >= 1, got {}",
                self.domain_length
            )));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        self.sigma.validate()
    }

    /// Same parameters on a different interval length.
    pub fn with_length(&self, domain_length: f64) -> Result<Self> {
        let mut p = *self;
        p.domain_length = domain_length;
        p.validate()?;
        Ok(p)
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        ModelParams { alpha, ..*self }
    }
}
