//! Per-action energy table, one section per component class.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use super::architecture::ComponentClass;
use crate::error::{Error, Result};

/// Actions the scheduler emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Mac,
    ArrayActivate,
    SimdOp,
    Read,
    Write,
    Fetch,
}

impl Action {
    pub const ALL: [Action; 6] = [
        Action::Mac,
        Action::ArrayActivate,
        Action::SimdOp,
        Action::Read,
        Action::Write,
        Action::Fetch,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Action::Mac => "mac",
            Action::ArrayActivate => "array_activate",
            Action::SimdOp => "simd_op",
            Action::Read => "read",
            Action::Write => "write",
            Action::Fetch => "fetch",
        }
    }

    pub fn class(self) -> ComponentClass {
        match self {
            Action::Mac | Action::ArrayActivate => ComponentClass::Aimcore,
            Action::SimdOp => ComponentClass::Vfu,
            Action::Read | Action::Write => ComponentClass::Actbuf,
            Action::Fetch => ComponentClass::Imem,
        }
    }

    pub fn for_class(class: ComponentClass) -> impl Iterator<Item = Action> {
        Action::ALL.into_iter().filter(move |a| a.class() == class)
    }

    fn parse(class: ComponentClass, name: &str) -> Option<Action> {
        Action::for_class(class).find(|a| a.as_str() == name)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

type RawTable = BTreeMap<ComponentClass, BTreeMap<String, f64>>;

/// Joules per action. Every action in [`Action::ALL`] has an entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable {
    joules: [f64; Action::ALL.len()],
}

impl EnergyTable {
    pub fn from_entries(entries: impl IntoIterator<Item = (Action, f64)>) -> Result<Self> {
        let mut joules = [f64::NAN; Action::ALL.len()];
        for (action, e) in entries {
            if !(e >= 0.0 && e.is_finite()) {
                return Err(Error::invalid(
                    "energy table",
                    format!("{}.{action} must be finite and nonnegative, got {e}", action.class()),
                ));
            }
            joules[action as usize] = e;
        }
        if let Some(missing) = Action::ALL.iter().find(|a| joules[**a as usize].is_nan()) {
            return Err(Error::invalid(
                "energy table",
                format!("missing entry {}.{missing}", missing.class()),
            ));
        }
        Ok(EnergyTable { joules })
    }

    pub fn zero() -> Self {
        EnergyTable {
            joules: [0.0; Action::ALL.len()],
        }
    }

    pub fn energy(&self, action: Action) -> f64 {
        self.joules[action as usize]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        EnergyTable {
            joules: self.joules.map(|e| e * factor),
        }
    }

    pub fn parse_str(text: &str, origin: &Path) -> Result<Self> {
        let raw: RawTable = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut entries = Vec::new();
        for (class, actions) in raw {
            for (name, e) in actions {
                let action = Action::parse(class, &name).ok_or_else(|| Error::UnknownAction {
                    class: class.to_string(),
                    action: name.clone(),
                })?;
                entries.push((action, e));
            }
        }
        Self::from_entries(entries)
    }

    pub fn to_toml(&self) -> String {
        let mut raw = RawTable::new();
        for a in Action::ALL {
            raw.entry(a.class())
                .or_default()
                .insert(a.as_str().to_string(), self.energy(a));
        }
        toml::to_string(&raw).expect("energy table serializes")
    }
}

pub fn parse_energy_table(path: &Path) -> Result<EnergyTable> {
    EnergyTable::parse_str(&crate::io::read_to_string(path)?, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TABLE: &str = r#"
[aimcore]
mac = 1e-15
array_activate = 2e-12
[vfu]
simd_op = 3e-13
[actbuf]
read = 4e-13
write = 5e-13
[imem]
fetch = 6e-12
"#;

    #[test]
    fn parses_all_classes() {
        let t = EnergyTable::parse_str(TABLE, Path::new("e")).unwrap();
        assert_eq!(t.energy(Action::Write), 5e-13);
        assert_eq!(t.energy(Action::Fetch), 6e-12);
        let again = EnergyTable::parse_str(&t.to_toml(), Path::new("e")).unwrap();
        assert_eq!(t, again);
    }

    #[test]
    fn unknown_action_rejected() {
        let text = TABLE.replace("simd_op", "fma");
        assert!(matches!(
            EnergyTable::parse_str(&text, Path::new("e")),
            Err(Error::UnknownAction { .. })
        ));
        // a valid action name under the wrong class is also unknown
        let text = TABLE.replace("[vfu]\nsimd_op", "[vfu]\nmac");
        assert!(EnergyTable::parse_str(&text, Path::new("e")).is_err());
    }

    #[test]
    fn negative_and_missing_rejected() {
        let text = TABLE.replace("4e-13", "-4e-13");
        assert!(EnergyTable::parse_str(&text, Path::new("e")).is_err());
        let text = TABLE.replace("fetch = 6e-12", "");
        assert!(EnergyTable::parse_str(&text, Path::new("e")).is_err());
    }
}
