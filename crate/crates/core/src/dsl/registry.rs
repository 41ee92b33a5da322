use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The four primitive-producing statement shapes every registered statement
/// is an alias of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Archetype {
    /// center (3), full extents (3), Euler angles (3)
    CuboidCenter,
    /// front-bottom-left corner (3), full extents (3), elevation about x (1)
    CuboidCorner,
    /// start (3), end (3), radius (1)
    LineCylinder,
    /// center (3), height, radius, Euler angles (3)
    CylinderCenter,
}

impl Archetype {
    pub const ALL: [Archetype; 4] = [
        Archetype::CuboidCenter,
        Archetype::CuboidCorner,
        Archetype::LineCylinder,
        Archetype::CylinderCenter,
    ];

    pub fn arity(self) -> usize {
        match self {
            Archetype::CuboidCenter => 9,
            Archetype::CuboidCorner => 7,
            Archetype::LineCylinder => 7,
            Archetype::CylinderCenter => 8,
        }
    }

    pub fn default_param_names(self) -> &'static [&'static str] {
        match self {
            Archetype::CuboidCenter => &["cx", "cy", "cz", "sx", "sy", "sz", "qx", "qy", "qz"],
            Archetype::CuboidCorner => &["ox", "oy", "oz", "sx", "sy", "sz", "elevation"],
            Archetype::LineCylinder => &["ax", "ay", "az", "bx", "by", "bz", "radius"],
            Archetype::CylinderCenter => &["cx", "cy", "cz", "height", "radius", "qx", "qy", "qz"],
        }
    }

    /// Parameter indices that must stay strictly positive.
    pub fn size_slots(self) -> &'static [usize] {
        match self {
            Archetype::CuboidCenter | Archetype::CuboidCorner => &[3, 4, 5],
            Archetype::LineCylinder => &[6],
            Archetype::CylinderCenter => &[3, 4],
        }
    }

    /// Parameter indices that are object-frame positions (shifted by loops).
    pub fn position_slots(self) -> &'static [usize] {
        match self {
            Archetype::CuboidCenter | Archetype::CuboidCorner | Archetype::CylinderCenter => &[0, 1, 2],
            Archetype::LineCylinder => &[0, 1, 2, 3, 4, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementDef {
    pub name: String,
    pub archetype: Archetype,
    pub param_names: Vec<String>,
}

impl StatementDef {
    /// A definition using the archetype's default parameter names.
    pub fn alias(name: impl Into<String>, archetype: Archetype) -> Self {
        Self {
            name: name.into(),
            archetype,
            param_names: archetype
                .default_param_names()
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.archetype.arity()
    }

    fn check(&self) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidDefinition {
            name: self.name.clone(),
            reason: reason.to_string(),
        };
        if !is_identifier(&self.name) {
            return Err(invalid("name is not an identifier"));
        }
        if self.param_names.len() != self.archetype.arity() {
            return Err(invalid("parameter names do not match the archetype arity"));
        }
        Ok(())
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Name → definition map. Cloning is cheap; [`register`](Self::register)
/// returns a new registry and leaves the original untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct StatementRegistry {
    defs: Arc<BTreeMap<String, StatementDef>>,
}

impl StatementRegistry {
    pub fn empty() -> Self {
        Self {
            defs: Arc::new(BTreeMap::new()),
        }
    }

    /// The built-in statement catalog.
    pub fn builtin() -> Self {
        use Archetype::*;
        let catalog = [
            ("cuboid", CuboidCenter),
            ("chair_back", CuboidCorner),
            ("table_top", CuboidCorner),
            ("chair_seat", CuboidCorner),
            ("cabinet_body", CuboidCorner),
            ("line", LineCylinder),
            ("chair_leg", LineCylinder),
            ("table_leg", LineCylinder),
            ("cylinder", CylinderCenter),
        ];
        let defs = catalog
            .into_iter()
            .map(|(name, arch)| (name.to_string(), StatementDef::alias(name, arch)))
            .collect();
        Self { defs: Arc::new(defs) }
    }

    pub fn register(&self, def: StatementDef) -> Result<Self> {
        def.check()?;
        if self.defs.contains_key(&def.name) {
            return Err(Error::DuplicateStatement(def.name));
        }
        let mut defs = (*self.defs).clone();
        defs.insert(def.name.clone(), def);
        Ok(Self { defs: Arc::new(defs) })
    }

    pub fn get(&self, name: &str) -> Option<&StatementDef> {
        self.defs.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.defs.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &StatementDef> {
        self.defs.values()
    }
}

impl Default for StatementRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}
