//! `key = value` configuration files and the layered effective settings.

use std::collections::BTreeMap;
use std::fmt;

pub const KEYS: &[&str] = &[
    "pair",
    "pattern",
    "levels",
    "base_n",
    "weight",
    "p",
    "alpha",
    "z",
    "force",
    "force_gates",
    "out",
    "seed",
    "kappa",
    "lambda",
    "i",
    "j",
    "exact",
    "reference_extra",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    pub entries: BTreeMap<String, String>,
    pub warnings: Vec<String>,
}

fn normalize_key(k: &str) -> String {
    k.trim().to_ascii_lowercase().replace('-', "_")
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are
/// skipped; a repeated key keeps its last value and records a warning.
pub fn parse_config(text: &str) -> Result<ConfigFile, ConfigError> {
    let mut out = ConfigFile::default();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((k, v)) = body.split_once('=') else {
            return Err(ConfigError { line, message: format!("expected `key = value`, got `{body}`") });
        };
        let key = normalize_key(k);
        let value = v.trim();
        if key.is_empty() {
            return Err(ConfigError { line, message: "empty key".into() });
        }
        if !KEYS.contains(&key.as_str()) {
            return Err(ConfigError { line, message: format!("unknown key `{key}`") });
        }
        if value.is_empty() {
            return Err(ConfigError { line, message: format!("empty value for `{key}`") });
        }
        if let Some(prev) = seen.insert(key.clone(), line) {
            out.warnings.push(format!("key `{key}` on line {line} overrides line {prev}"));
        }
        out.entries.insert(key, value.to_string());
    }
    Ok(out)
}

pub fn defaults() -> BTreeMap<String, String> {
    [
        ("pattern", "criss-cross"),
        ("pair", "th"),
        ("p", "2"),
        ("kappa", "2"),
        ("lambda", "0.1"),
        ("levels", "4"),
        ("alpha", "1"),
        ("z", "0.5,0.5"),
        ("force", "1,0"),
        ("force_gates", "false"),
        ("out", "out"),
        ("seed", "0"),
        ("exact", "smooth_curl"),
        ("i", "1"),
        ("j", "2"),
        ("reference_extra", "2"),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v.to_string()))
    .collect()
}

/// Defaults, then the file, then explicit flags.
pub fn layer(file: Option<&ConfigFile>, flags: &BTreeMap<String, String>) -> BTreeMap<String, String> {
    let mut eff = defaults();
    if let Some(f) = file {
        eff.extend(f.entries.clone());
    }
    eff.extend(flags.clone());
    eff
}

pub fn parse_point(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected `x,y`, got `{s}`"));
    }
    let x = parts[0].parse::<f64>().map_err(|e| format!("bad coordinate `{}`: {e}", parts[0]))?;
    let y = parts[1].parse::<f64>().map_err(|e| format!("bad coordinate `{}`: {e}", parts[1]))?;
    if !(x.is_finite() && y.is_finite()) {
        return Err(format!("non-finite point `{s}`"));
    }
    Ok([x, y])
}

/// `x,y[;x,y...]`
pub fn parse_points(s: &str) -> Result<Vec<[f64; 2]>, String> {
    s.split(';').map(parse_point).collect()
}

pub fn parse_bool(s: &str) -> Result<bool, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(format!("expected a boolean, got `{s}`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let f = parse_config("").unwrap();
        assert!(f.entries.is_empty());
        assert_eq!(layer(Some(&f), &BTreeMap::new()), defaults());
    }

    #[test]
    fn comments_blank_lines_and_spacing() {
        let f = parse_config("# header\n\n  pair = mini  # trailing\nlevels=3\n").unwrap();
        assert_eq!(f.entries["pair"], "mini");
        assert_eq!(f.entries["levels"], "3");
        assert!(f.warnings.is_empty());
    }

    #[test]
    fn dashes_normalize_to_underscores() {
        let f = parse_config("force-gates = true").unwrap();
        assert_eq!(f.entries["force_gates"], "true");
    }

    #[test]
    fn duplicate_key_last_wins_with_warning() {
        let f = parse_config("alpha = 0.5\nalpha = 1.5\n").unwrap();
        assert_eq!(f.entries["alpha"], "1.5");
        assert_eq!(f.warnings.len(), 1);
        assert!(f.warnings[0].contains("line 2") && f.warnings[0].contains("line 1"));
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let e = parse_config("pair = th\n\njunk line\n").unwrap_err();
        assert_eq!(e.line, 3);
        let e = parse_config("colour = red").unwrap_err();
        assert_eq!(e.line, 1);
        assert!(e.message.contains("colour"));
        let e = parse_config("p =").unwrap_err();
        assert!(e.message.contains("empty value"));
        assert!(parse_config(" = 3").is_err());
    }

    #[test]
    fn flags_override_file() {
        let f = parse_config("pair = mini\nlevels = 3").unwrap();
        let flags: BTreeMap<String, String> = [("pair".to_string(), "th".to_string())].into();
        let eff = layer(Some(&f), &flags);
        assert_eq!(eff["pair"], "th");
        assert_eq!(eff["levels"], "3");
    }

    #[test]
    fn points_and_bools() {
        assert_eq!(parse_point("0.25, 0.5").unwrap(), [0.25, 0.5]);
        assert!(parse_point("0.25").is_err());
        assert!(parse_point("a,b").is_err());
        assert_eq!(parse_points("0,1;2,3").unwrap(), vec![[0.0, 1.0], [2.0, 3.0]]);
        assert!(parse_bool("yes").unwrap());
        assert!(!parse_bool("0").unwrap());
        assert!(parse_bool("maybe").is_err());
    }
}
