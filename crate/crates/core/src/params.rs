//! Game parameters and the two strategy sets.
//!
//! Every array in this crate that is indexed by strategy uses the orders
//! `[AllD, BMedia, GMedia, AllC]` for users and `[Unsafe, Safe]` for creators.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// User strategies, in canonical index order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UserStrategy {
    /// Never adopts.
    AllD,
    /// Follows a free media outlet that recommends at random.
    BMedia,
    /// Follows an investigating outlet, correct with probability `q`, at cost `c_i`.
    GMedia,
    /// Always adopts.
    AllC,
}

impl UserStrategy {
    pub const ALL: [UserStrategy; 4] = [
        UserStrategy::AllD,
        UserStrategy::BMedia,
        UserStrategy::GMedia,
        UserStrategy::AllC,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            UserStrategy::AllD => "AllD",
            UserStrategy::BMedia => "BMedia",
            UserStrategy::GMedia => "GMedia",
            UserStrategy::AllC => "AllC",
        }
    }
}

impl fmt::Display for UserStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Creator strategies, in canonical index order (`D = 0`, `C = 1`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CreatorStrategy {
    /// Ships an unsafe product (defects).
    Unsafe,
    /// Pays the surplus cost `c_c` for a safe product (cooperates).
    Safe,
}

impl CreatorStrategy {
    pub const ALL: [CreatorStrategy; 2] = [CreatorStrategy::Unsafe, CreatorStrategy::Safe];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            CreatorStrategy::Unsafe => "D",
            CreatorStrategy::Safe => "C",
        }
    }
}

impl fmt::Display for CreatorStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Names of the six payoff parameters, as used in config files, CLI flags
/// and sweep axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ParamName {
    BU,
    CU,
    BC,
    CC,
    CI,
    Q,
}

impl ParamName {
    pub const ALL: [ParamName; 6] = [
        ParamName::BU,
        ParamName::CU,
        ParamName::BC,
        ParamName::CC,
        ParamName::CI,
        ParamName::Q,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ParamName::BU => "b_u",
            ParamName::CU => "c_u",
            ParamName::BC => "b_c",
            ParamName::CC => "c_c",
            ParamName::CI => "c_i",
            ParamName::Q => "q",
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
        // `c_I` appears as an alternative spelling of the investigation cost.
        match s.trim() {
            "b_u" => Ok(ParamName::BU),
            "c_u" => Ok(ParamName::CU),
            "b_c" => Ok(ParamName::BC),
            "c_c" => Ok(ParamName::CC),
            "c_i" | "c_I" => Ok(ParamName::CI),
            "q" => Ok(ParamName::Q),
            other => Err(Error::InvalidConfig(format!(
                "unknown parameter `{other}` (expected one of b_u, c_u, b_c, c_c, c_i, q)"
            ))),
        }
    }
}

/// The six payoff and media-quality parameters of the game.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GameParams {
    /// User benefit from adopting a safe product.
    pub b_u: f64,
    /// User cost from adopting an unsafe product.
    pub c_u: f64,
    /// Creator benefit when the product is adopted.
    pub b_c: f64,
    /// Surplus cost of creating a safe product. May be negative.
    pub c_c: f64,
    /// Cost of an informed (investigated) recommendation.
    pub c_i: f64,
    /// Probability that an investigated recommendation is correct.
    pub q: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            b_u: 0.4,
            c_u: 0.8,
            b_c: 0.4,
            c_c: 0.1,
            c_i: 0.1,
            q: 0.9,
        }
    }
}

impl GameParams {
    /// Parameters of the oscillation / bistability experiments
    /// (`c_c = 0.2`, `c_i = 0.05`, rest as default).
    pub fn oscillation() -> Self {
        GameParams {
            c_c: 0.2,
            c_i: 0.05,
            ..GameParams::default()
        }
    }

    /// Checks every range constraint and returns the parameters unchanged.
    pub fn validate(self) -> Result<Self> {
        for name in ParamName::ALL {
            let value = self.get(name);
            if !value.is_finite() {
                return Err(Error::InvalidParam {
                    name: name.as_str(),
                    value,
                    reason: "must be finite",
                });
            }
        }
        for name in [ParamName::BU, ParamName::CU, ParamName::BC, ParamName::CI] {
            let value = self.get(name);
            if value < 0.0 {
                return Err(Error::InvalidParam {
                    name: name.as_str(),
                    value,
                    reason: "must be non-negative",
                });
            }
        }
        if !(0.0..=1.0).contains(&self.q) {
            return Err(Error::InvalidParam {
                name: "q",
                value: self.q,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(self)
    }

    /// Soft diagnostics that do not make the parameters invalid.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.c_u <= self.b_u {
            out.push(format!(
                "c_u = {} does not exceed b_u = {}; adopting unsafe products is not a net loss",
                self.c_u, self.b_u
            ));
        }
        out
    }

    pub fn get(&self, name: ParamName) -> f64 {
        match name {
            ParamName::BU => self.b_u,
            ParamName::CU => self.c_u,
            ParamName::BC => self.b_c,
            ParamName::CC => self.c_c,
            ParamName::CI => self.c_i,
            ParamName::Q => self.q,
        }
    }

    pub fn set(&mut self, name: ParamName, value: f64) {
        match name {
            ParamName::BU => self.b_u = value,
            ParamName::CU => self.c_u = value,
            ParamName::BC => self.b_c = value,
            ParamName::CC => self.c_c = value,
            ParamName::CI => self.c_i = value,
            ParamName::Q => self.q = value,
        }
    }

    pub fn with(mut self, name: ParamName, value: f64) -> Self {
        self.set(name, value);
        self
    }

    /// Multiplies every payoff parameter (all but `q`) by `factor`.
    pub fn scaled(self, factor: f64) -> Self {
        GameParams {
            b_u: self.b_u * factor,
            c_u: self.c_u * factor,
            b_c: self.b_c * factor,
            c_c: self.c_c * factor,
            c_i: self.c_i * factor,
            q: self.q,
        }
    }

    /// `(name, value)` pairs in canonical order, for manifests and tables.
    pub fn entries(&self) -> [(ParamName, f64); 6] {
        ParamName::ALL.map(|n| (n, self.get(n)))
    }
}
