pub mod bell;
pub mod grid;
pub mod homodyne;
pub mod oracle;

use clap::ValueEnum;
use ipsbell::{Family, Parameterization};
use serde::Serialize;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyArg {
    Vacuum,
    Twb,
    Ips,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
pub enum ParamArg {
    #[value(name = "B")]
    B,
    #[value(name = "C")]
    C,
}

impl From<ParamArg> for Parameterization {
    fn from(p: ParamArg) -> Self {
        match p {
            ParamArg::B => Parameterization::BOfJ,
            ParamArg::C => Parameterization::COfJ,
        }
    }
}

/// The state family; photon subtraction needs `tau_eff`.
pub fn family(arg: FamilyArg, tau_eff: Option<f64>) -> Result<Family, CliError> {
    match (arg, tau_eff) {
        (FamilyArg::Vacuum, _) => Ok(Family::Vacuum),
        (FamilyArg::Twb, _) => Ok(Family::Twb),
        (FamilyArg::Ips, Some(t)) => {
            if !(t > 0.0 && t <= 1.0) {
                return Err(CliError::invalid("invalid-parameter", format!("tau_eff = {t} must lie in (0, 1]")));
            }
            Ok(Family::Ips { tau_eff: t })
        }
        (FamilyArg::Ips, None) => Err(CliError::invalid("missing-parameter", "--family ips needs --tau-eff")),
    }
}

pub fn check_resolution(name: &str, points: usize) -> Result<(), CliError> {
    if points < 2 {
        return Err(CliError::invalid("invalid-parameter", format!("{name} = {points}: resolution must be at least 2")));
    }
    Ok(())
}

pub fn check_range(name: &str, lo: f64, hi: f64) -> Result<(), CliError> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(CliError::invalid("invalid-parameter", format!("{name} range [{lo}, {hi}] is empty or not finite")));
    }
    Ok(())
}
