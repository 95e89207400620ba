use std::fmt;
use std::str::FromStr;

use crate::context::{Featlet, FeatureProduct, Template};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Stage {
    ArgId,
    RoleClass,
}

const ARG: [Featlet; 2] = [Featlet::ArgHead, Featlet::ArgSpan];
const ROLE: [Featlet; 2] = [Featlet::Role, Featlet::FrameRole];

impl Stage {
    pub const ALL: [Stage; 2] = [Stage::ArgId, Stage::RoleClass];

    pub fn name(self) -> &'static str {
        match self {
            Stage::ArgId => "argid",
            Stage::RoleClass => "roleclass",
        }
    }

    /// Whether a product made of templates with these featlets satisfies
    /// the stage: an argument extractor, plus a role extractor for role
    /// classification.
    pub fn admits_templates<'a>(
        self,
        templates: impl IntoIterator<Item = &'a Template> + Clone,
    ) -> bool {
        let has = |set: &[Featlet]| {
            templates
                .clone()
                .into_iter()
                .any(|t| set.iter().any(|&f| t.contains(f)))
        };
        match self {
            Stage::ArgId => has(&ARG),
            Stage::RoleClass => has(&ARG) && has(&ROLE),
        }
    }

    pub fn admits(self, p: &FeatureProduct) -> bool {
        self.admits_templates(p.templates())
    }

    /// Templates that can fire on this stage's instances. Argument
    /// identification instances carry no role, so role extractors never
    /// succeed there.
    pub fn can_fire(self, t: &Template) -> bool {
        match self {
            Stage::ArgId => !ROLE.iter().any(|&f| t.contains(f)),
            Stage::RoleClass => true,
        }
    }

    /// Fails on the first product violating the stage constraint.
    pub fn check(self, products: &[FeatureProduct]) -> Result<()> {
        match products.iter().find(|p| !self.admits(p)) {
            Some(p) => Err(Error::StageConstraint {
                stage: self.name(),
                product: p.id().to_string(),
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "argid" | "arg-id" => Ok(Stage::ArgId),
            "roleclass" | "role-class" | "role" => Ok(Stage::RoleClass),
            _ => Err(Error::Invalid(format!("unknown stage `{s}`"))),
        }
    }
}
