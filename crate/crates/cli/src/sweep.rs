//! `key=value` overrides on a scenario config and their cartesian product.

use toml::Value;

use crate::config::ScenarioConfig;
use crate::error::CliError;

/// One override: a dotted key path and the values it takes.
#[derive(Debug, Clone, PartialEq)]
pub struct Override {
    pub key: String,
    pub values: Vec<String>,
}

/// Splits on commas outside brackets.
fn split_values(s: &str) -> Vec<String> {
    let (mut parts, mut cur, mut depth) = (Vec::new(), String::new(), 0i32);
    for ch in s.chars() {
        match ch {
            '[' | '{' => depth += 1,
            ']' | '}' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    parts.push(cur.trim().to_string());
    parts
}

pub fn parse_override(arg: &str) -> Result<Override, CliError> {
    let (key, rest) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override `{arg}` is not key=value")))?;
    let key = key.trim();
    if key.is_empty() || rest.trim().is_empty() {
        return Err(CliError::Config(format!("override `{arg}` is not key=value")));
    }
    Ok(Override {
        key: key.to_string(),
        values: split_values(rest),
    })
}

/// Parses a scalar or inline TOML value; bare words become strings.
fn parse_value(text: &str) -> Value {
    toml::from_str::<toml::Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(text.to_string()))
}

fn set_path(root: &mut Value, key: &str, raw: &str) -> Result<(), CliError> {
    let segments: Vec<&str> = key.split('.').collect();
    let mut node = root;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        let next = match node {
            Value::Table(t) => {
                if last {
                    let mut v = parse_value(raw);
                    if let (Some(Value::Float(_)), Value::Integer(n)) = (t.get(*seg), &v) {
                        v = Value::Float(*n as f64);
                    }
                    t.insert(seg.to_string(), v);
                    return Ok(());
                }
                t.get_mut(*seg)
            }
            Value::Array(a) => {
                let idx: usize = seg
                    .parse()
                    .map_err(|_| CliError::Config(format!("unknown key `{key}`: `{seg}` is not an index")))?;
                if last {
                    let slot = a
                        .get_mut(idx)
                        .ok_or_else(|| CliError::Config(format!("unknown key `{key}`: index {idx} out of range")))?;
                    *slot = parse_value(raw);
                    return Ok(());
                }
                a.get_mut(idx)
            }
            _ => None,
        };
        node = next.ok_or_else(|| CliError::Config(format!("unknown key `{key}`")))?;
    }
    Ok(())
}

/// Applies one assignment per override to `base`, re-validating the result.
pub fn apply(base: &ScenarioConfig, assignments: &[(String, String)]) -> Result<ScenarioConfig, CliError> {
    let mut value = Value::try_from(base).map_err(|e| CliError::Config(e.to_string()))?;
    for (key, raw) in assignments {
        set_path(&mut value, key, raw)?;
    }
    let cfg: ScenarioConfig = value
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("override: {}", e.message())))?;
    cfg.validate()?;
    Ok(cfg)
}

/// One sweep point: the assignments made and the resulting config.
pub type SweepPoint = (Vec<(String, String)>, ScenarioConfig);

/// Every combination of override values, in row-major order (last override
/// varies fastest).
pub fn expand(base: &ScenarioConfig, overrides: &[Override]) -> Result<Vec<SweepPoint>, CliError> {
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for o in overrides {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                o.values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((o.key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .map(|c| {
            let cfg = apply(base, &c)?;
            Ok((c, cfg))
        })
        .collect()
}
