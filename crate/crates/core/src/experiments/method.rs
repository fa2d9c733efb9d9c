use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::fem1d::BasisFlavor;
use crate::stage_system::{CollocationMethod, TimeBasis};
use crate::tableau::CollocationFamily;

/// Full description of a discretization: spatial basis and degree, time
/// family and stage count, time basis, and whether bounds are imposed.
///
/// Displays as e.g. `B2-RIIA(B2)-VI`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct MethodSpec {
    pub spatial_flavor: BasisFlavor,
    pub spatial_degree: usize,
    pub family: CollocationFamily,
    pub stages: usize,
    pub time_basis: TimeBasis,
    pub constrained: bool,
}

impl MethodSpec {
    pub fn new(
        spatial_flavor: BasisFlavor,
        spatial_degree: usize,
        family: CollocationFamily,
        stages: usize,
        time_basis: TimeBasis,
        constrained: bool,
    ) -> Self {
        Self {
            spatial_flavor,
            spatial_degree,
            family,
            stages,
            time_basis,
            constrained,
        }
    }

    /// Time discretization alone, for ODE problems.
    pub fn ode(family: CollocationFamily, stages: usize, time_basis: TimeBasis, constrained: bool) -> Self {
        Self::new(BasisFlavor::Lagrange, 1, family, stages, time_basis, constrained)
    }

    pub fn collocation_method(&self) -> Result<CollocationMethod> {
        CollocationMethod::new(self.family, self.stages, self.time_basis)
    }

    pub fn suffix(&self) -> &'static str {
        if self.constrained {
            "VI"
        } else {
            "VP"
        }
    }

    /// Label without the spatial part, e.g. `RIIA(L2)-VP`.
    pub fn time_label(&self) -> String {
        format!(
            "{}({}{})-{}",
            self.family.short_name(),
            self.time_basis.symbol(),
            self.stages,
            self.suffix()
        )
    }

    pub fn with_constrained(mut self, constrained: bool) -> Self {
        self.constrained = constrained;
        self
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}-{}",
            self.spatial_flavor.symbol(),
            self.spatial_degree,
            self.time_label()
        )
    }
}

pub fn parse_flavor(s: &str) -> Result<BasisFlavor> {
    match s.to_ascii_lowercase().as_str() {
        "lagrange" | "l" => Ok(BasisFlavor::Lagrange),
        "bernstein" | "b" => Ok(BasisFlavor::Bernstein),
        _ => Err(Error::Config(format!("unknown basis '{s}'"))),
    }
}

pub fn parse_time_basis(s: &str) -> Result<TimeBasis> {
    Ok(match parse_flavor(s)? {
        BasisFlavor::Lagrange => TimeBasis::Lagrange,
        BasisFlavor::Bernstein => TimeBasis::Bernstein,
    })
}

pub fn parse_family(s: &str) -> Result<CollocationFamily> {
    match s.to_ascii_lowercase().as_str() {
        "radau" | "radauiia" | "riia" => Ok(CollocationFamily::RadauIIA),
        "gauss" | "gausslegendre" | "gl" => Ok(CollocationFamily::GaussLegendre),
        "lobatto" | "lobattoiiia" | "liiia" => Ok(CollocationFamily::LobattoIIIA),
        _ => Err(Error::Config(format!("unknown collocation family '{s}'"))),
    }
}

pub fn parse_constrained(s: &str) -> Result<bool> {
    match s.to_ascii_lowercase().as_str() {
        "vi" => Ok(true),
        "vp" => Ok(false),
        _ => Err(Error::Config(format!("expected 'vp' or 'vi', got '{s}'"))),
    }
}

impl FromStr for MethodSpec {
    type Err = Error;

    /// Parses labels such as `B2-RIIA(L3)-VI`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("cannot parse method label '{s}'"));
        let (space, rest) = s.split_once('-').ok_or_else(bad)?;
        let (time, suffix) = rest.rsplit_once('-').ok_or_else(bad)?;
        let (fam, inner) = time.split_once('(').ok_or_else(bad)?;
        let inner = inner.strip_suffix(')').ok_or_else(bad)?;
        let split = |t: &str| -> Result<(String, usize)> {
            let mut chars = t.chars();
            let head = chars.next().ok_or_else(bad)?.to_string();
            let n = chars.as_str().parse().map_err(|_| bad())?;
            Ok((head, n))
        };
        let (sf, r) = split(space)?;
        let (tb, st) = split(inner)?;
        Ok(Self::new(
            parse_flavor(&sf)?,
            r,
            parse_family(fam)?,
            st,
            parse_time_basis(&tb)?,
            parse_constrained(suffix)?,
        ))
    }
}
