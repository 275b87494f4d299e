//! Strict INI-style configuration: `[section]` headers and `key = value` lines.
//!
//! Every command declares a schema of the keys it reads. Keys outside the schema,
//! duplicate keys and unparsable values are errors that carry line numbers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

/// Where an effective value came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => write!(f, "--set"),
            Origin::Default => write!(f, "default"),
        }
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Raw `section -> key -> (value, line)` as written in the file.
#[derive(Debug, Default)]
pub struct Ini {
    entries: BTreeMap<String, BTreeMap<String, (String, usize)>>,
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Ini {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut ini = Ini::default();
        let mut section: Option<String> = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').map(str::trim);
                match name {
                    Some(n) if is_name(n) => {
                        ini.entries.entry(n.to_string()).or_default();
                        section = Some(n.to_string());
                    }
                    _ => return err(format!("line {line_no}: malformed section header '{line}'")),
                }
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {line_no}: expected 'key = value', got '{line}'"));
            };
            let key = key.trim();
            if !is_name(key) {
                return err(format!("line {line_no}: invalid key '{key}'"));
            }
            let Some(sec) = &section else {
                return err(format!("line {line_no}: key '{key}' appears before any [section] header"));
            };
            let keys = ini.entries.get_mut(sec).expect("section registered");
            if let Some((_, first)) = keys.get(key) {
                return err(format!("duplicate key [{sec}] {key} at lines {first} and {line_no}"));
            }
            keys.insert(key.to_string(), (value.trim().to_string(), line_no));
        }
        Ok(ini)
    }
}

/// One schema entry; `None` marks a required key.
#[derive(Clone, Copy, Debug)]
pub struct Key {
    pub section: &'static str,
    pub name: &'static str,
    pub default: Option<&'static str>,
}

pub const fn key(section: &'static str, name: &'static str, default: &'static str) -> Key {
    Key { section, name, default: Some(default) }
}

pub const fn required(section: &'static str, name: &'static str) -> Key {
    Key { section, name, default: None }
}

/// Fully resolved configuration: every schema key with its value and origin.
#[derive(Clone, Debug)]
pub struct Effective {
    values: BTreeMap<String, BTreeMap<String, (String, Origin)>>,
}

/// Parses `section.key=value` from a `--set` flag.
pub fn parse_override(s: &str) -> Result<(String, String, String), ConfigError> {
    let Some((path, value)) = s.split_once('=') else {
        return err(format!("--set expects section.key=value, got '{s}'"));
    };
    let Some((section, name)) = path.trim().split_once('.') else {
        return err(format!("--set expects section.key=value, got '{s}'"));
    };
    Ok((section.to_string(), name.to_string(), value.trim().to_string()))
}

impl Effective {
    /// Applies overrides to the file contents and fills defaults. Unknown sections
    /// and keys are rejected, as are missing required keys.
    pub fn resolve(schema: &[Key], ini: &Ini, overrides: &[(String, String, String)]) -> Result<Self, ConfigError> {
        let known = |s: &str, k: &str| schema.iter().any(|e| e.section == s && e.name == k);
        let allowed = |s: &str| {
            schema.iter().filter(|e| e.section == s).map(|e| e.name).collect::<Vec<_>>().join(", ")
        };
        for (sec, keys) in &ini.entries {
            if !schema.iter().any(|e| e.section == sec) {
                let line = keys.values().map(|(_, l)| *l).min();
                let at = line.map(|l| format!("line {l}: ")).unwrap_or_default();
                return err(format!("{at}unknown section [{sec}] for this command"));
            }
            for (k, (_, line)) in keys {
                if !known(sec, k) {
                    return err(format!("line {line}: unknown key '{k}' in [{sec}] (allowed: {})", allowed(sec)));
                }
            }
        }
        for (sec, k, _) in overrides {
            if !known(sec, k) {
                return err(format!("--set {sec}.{k}: unknown key for this command"));
            }
        }
        let mut values: BTreeMap<String, BTreeMap<String, (String, Origin)>> = BTreeMap::new();
        for e in schema {
            let from_file = ini.entries.get(e.section).and_then(|m| m.get(e.name));
            let from_flag = overrides.iter().rev().find(|(s, k, _)| s == e.section && k == e.name);
            let (value, origin) = match (from_flag, from_file, e.default) {
                (Some((_, _, v)), _, _) => (v.clone(), Origin::Flag),
                (None, Some((v, line)), _) => (v.clone(), Origin::Line(*line)),
                (None, None, Some(d)) => (d.to_string(), Origin::Default),
                (None, None, None) => return err(format!("missing required key '{}' in section [{}]", e.name, e.section)),
            };
            values.entry(e.section.to_string()).or_default().insert(e.name.to_string(), (value, origin));
        }
        Ok(Effective { values })
    }

    fn raw(&self, section: &str, name: &str) -> (&str, Origin) {
        let (v, o) = self
            .values
            .get(section)
            .and_then(|m| m.get(name))
            .unwrap_or_else(|| panic!("[{section}] {name} is not in the command schema"));
        (v.as_str(), *o)
    }

    pub fn str(&self, section: &str, name: &str) -> &str {
        self.raw(section, name).0
    }

    pub fn get<T: FromStr>(&self, section: &str, name: &str) -> Result<T, ConfigError> {
        let (v, origin) = self.raw(section, name);
        v.parse().or_else(|_| {
            err(format!("[{section}] {name} ({origin}): cannot parse '{v}' as {}", type_label::<T>()))
        })
    }

    /// Comma-separated list.
    pub fn list<T: FromStr>(&self, section: &str, name: &str) -> Result<Vec<T>, ConfigError> {
        let (v, origin) = self.raw(section, name);
        v.split(',')
            .map(|p| {
                p.trim().parse().or_else(|_| {
                    err(format!("[{section}] {name} ({origin}): cannot parse '{}' as {}", p.trim(), type_label::<T>()))
                })
            })
            .collect()
    }

    /// `None` for an empty value.
    pub fn path(&self, section: &str, name: &str) -> Option<std::path::PathBuf> {
        let v = self.str(section, name);
        (!v.is_empty()).then(|| v.into())
    }

    pub fn sections(&self) -> &BTreeMap<String, BTreeMap<String, (String, Origin)>> {
        &self.values
    }

    /// `section -> key -> value`, the form embedded in reports.
    pub fn to_map(&self) -> BTreeMap<String, BTreeMap<String, String>> {
        self.values
            .iter()
            .map(|(s, m)| (s.clone(), m.iter().map(|(k, (v, _))| (k.clone(), v.clone())).collect()))
            .collect()
    }

    /// The configuration as INI text, which parses back to the same values.
    pub fn to_ini(&self) -> String {
        let mut out = String::new();
        for (s, m) in &self.values {
            out.push_str(&format!("[{s}]\n"));
            for (k, (v, _)) in m {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}

fn type_label<T>() -> &'static str {
    let name = std::any::type_name::<T>();
    match name {
        "f64" => "a number",
        "bool" => "true/false",
        "usize" | "u64" => "a non-negative integer",
        "i32" => "an integer",
        _ => name,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: &[Key] = &[required("grid", "n"), key("grid", "dim", "3"), key("solver", "dt", "0.05")];

    #[test]
    fn resolves_defaults_and_overrides() {
        let ini = Ini::parse("# comment\n[grid]\nn = 32\n\n[solver]\n").unwrap();
        let ov = vec![parse_override("solver.dt=0.1").unwrap()];
        let eff = Effective::resolve(SCHEMA, &ini, &ov).unwrap();
        assert_eq!(eff.get::<usize>("grid", "n").unwrap(), 32);
        assert_eq!(eff.get::<usize>("grid", "dim").unwrap(), 3);
        assert_eq!(eff.get::<f64>("solver", "dt").unwrap(), 0.1);
        assert_eq!(eff.raw("grid", "n").1, Origin::Line(3));
    }

    #[test]
    fn missing_required_key_names_it() {
        let e = Effective::resolve(SCHEMA, &Ini::parse("[grid]\ndim = 1\n").unwrap(), &[]).unwrap_err();
        assert!(e.0.contains("'n'") && e.0.contains("[grid]"), "{e}");
    }

    #[test]
    fn duplicate_key_reports_both_lines() {
        let e = Ini::parse("[grid]\nn = 8\ndim = 1\n\nn = 16\n").unwrap_err();
        assert!(e.0.contains("lines 2 and 5"), "{e}");
    }

    #[test]
    fn unknown_keys_and_sections_are_fatal() {
        let e = Effective::resolve(SCHEMA, &Ini::parse("[grid]\nn = 8\nnn = 3\n").unwrap(), &[]).unwrap_err();
        assert!(e.0.starts_with("line 3"), "{e}");
        let e = Effective::resolve(SCHEMA, &Ini::parse("[grid]\nn = 8\n[solvr]\ndt = 1\n").unwrap(), &[]).unwrap_err();
        assert!(e.0.contains("line 4") && e.0.contains("[solvr]"), "{e}");
        let ov = vec![parse_override("grid.m=3").unwrap()];
        assert!(Effective::resolve(SCHEMA, &Ini::parse("[grid]\nn = 8\n").unwrap(), &ov).is_err());
    }

    #[test]
    fn type_mismatch_carries_the_line() {
        let eff = Effective::resolve(SCHEMA, &Ini::parse("[grid]\nn = eight\n").unwrap(), &[]).unwrap();
        let e = eff.get::<usize>("grid", "n").unwrap_err();
        assert!(e.0.contains("line 2") && e.0.contains("'eight'"), "{e}");
    }

    #[test]
    fn malformed_lines() {
        assert!(Ini::parse("n = 3\n").unwrap_err().0.contains("before any"));
        assert!(Ini::parse("[grid\n").is_err());
        assert!(Ini::parse("[grid]\njust words\n").unwrap_err().0.starts_with("line 2"));
        assert!(parse_override("grid.n").is_err());
    }

    #[test]
    fn ini_echo_round_trips() {
        let ini = Ini::parse("[grid]\nn = 32\n").unwrap();
        let eff = Effective::resolve(SCHEMA, &ini, &[]).unwrap();
        let again = Effective::resolve(SCHEMA, &Ini::parse(&eff.to_ini()).unwrap(), &[]).unwrap();
        assert_eq!(eff.to_map(), again.to_map());
    }
}
