//! `key = value` run files whose keys are long flag names.
//!
//! Keys apply to whichever subcommand accepts them and are ignored by the
//! others, so one file can drive a whole pipeline. A flag given on the
//! command line always wins over the file.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{ArgAction, Command};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEntry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

/// Parses `key = value` lines. `#` starts a comment; blank lines are skipped.
/// Keys may use `_` or `-`.
pub fn parse_config(text: &str) -> Result<Vec<ConfigEntry>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`, found {raw:?}", i + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        out.push(ConfigEntry {
            line: i + 1,
            key,
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

/// Value of `--config` in raw arguments, if any.
pub fn config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(v.into());
        }
    }
    None
}

fn given_flags(args: &[OsString]) -> BTreeSet<String> {
    args.iter()
        .map(|a| a.to_string_lossy().into_owned())
        .take_while(|a| a != "--")
        .filter_map(|a| a.strip_prefix("--").map(|f| f.split('=').next().unwrap_or(f).to_string()))
        .collect()
}

fn is_switch(action: &ArgAction) -> bool {
    matches!(action, ArgAction::SetTrue | ArgAction::SetFalse | ArgAction::Count)
}

fn parse_bool(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

/// Appends the file's settings to `args` as flags, skipping any flag the
/// user already gave. Unknown keys are errors.
pub fn merge_config(cmd: &Command, args: Vec<OsString>, entries: &[ConfigEntry]) -> Result<Vec<OsString>, String> {
    let sub = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy())
        .find_map(|a| cmd.get_subcommands().find(|s| s.get_name() == a));
    let given = given_flags(&args);
    let mut extra: Vec<OsString> = Vec::new();
    for e in entries {
        if e.key == "config" {
            return Err(format!("line {}: a config file cannot name another config file", e.line));
        }
        let known = cmd.get_arguments().any(|a| a.get_long() == Some(&e.key))
            || cmd
                .get_subcommands()
                .any(|s| s.get_arguments().any(|a| a.get_long() == Some(&e.key)));
        if !known {
            return Err(format!("line {}: unknown key {:?}", e.line, e.key));
        }
        let arg = cmd
            .get_arguments()
            .chain(sub.into_iter().flat_map(|s| s.get_arguments()))
            .find(|a| a.get_long() == Some(&e.key));
        let Some(arg) = arg else { continue };
        if given.contains(&e.key) {
            continue;
        }
        if is_switch(arg.get_action()) {
            match parse_bool(&e.value) {
                Some(true) => extra.push(format!("--{}", e.key).into()),
                Some(false) => {}
                None => return Err(format!("line {}: {} expects true or false, found {:?}", e.line, e.key, e.value)),
            }
        } else if matches!(arg.get_action(), ArgAction::Append) {
            for v in e.value.split(',').map(str::trim).filter(|v| !v.is_empty()) {
                extra.push(format!("--{}", e.key).into());
                extra.push(v.into());
            }
        } else {
            extra.push(format!("--{}", e.key).into());
            extra.push(e.value.clone().into());
        }
    }
    let mut args = args;
    let split = args.iter().position(|a| a == "--").unwrap_or(args.len());
    args.splice(split..split, extra);
    Ok(args)
}

pub fn read_config(path: &Path) -> Result<Vec<ConfigEntry>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Arg;

    fn cmd() -> Command {
        Command::new("t")
            .arg(Arg::new("json").long("json").global(true).action(ArgAction::SetTrue))
            .subcommand(
                Command::new("train")
                    .arg(Arg::new("epochs").long("epochs"))
                    .arg(Arg::new("checkpoint").long("checkpoint").action(ArgAction::Append)),
            )
            .subcommand(Command::new("synth").arg(Arg::new("n").long("n")))
    }

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn parses_comments_and_underscores() {
        let e = parse_config("# run\nbatch_size = 8  # small\n\nlr=0.01\n").unwrap();
        assert_eq!(e.len(), 2);
        assert_eq!((e[0].key.as_str(), e[0].value.as_str(), e[0].line), ("batch-size", "8", 2));
        assert_eq!(e[1].value, "0.01");
        assert!(parse_config("novalue\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let entries = parse_config("epochs = 9\nn = 5\njson = true\n").unwrap();
        let merged = merge_config(&cmd(), os(&["t", "train", "--epochs", "3"]), &entries).unwrap();
        assert_eq!(merged, os(&["t", "train", "--epochs", "3", "--json"]));
        let m = cmd().try_get_matches_from(merged).unwrap();
        let (_, sub) = m.subcommand().unwrap();
        assert_eq!(sub.get_one::<String>("epochs").unwrap(), "3");
    }

    #[test]
    fn file_fills_missing_flags() {
        let entries = parse_config("epochs = 9\ncheckpoint = a, b\njson = false\n").unwrap();
        let merged = merge_config(&cmd(), os(&["t", "train"]), &entries).unwrap();
        assert_eq!(merged, os(&["t", "train", "--epochs", "9", "--checkpoint", "a", "--checkpoint", "b"]));
    }

    #[test]
    fn unknown_key_is_an_error() {
        let entries = parse_config("epohcs = 9\n").unwrap();
        let err = merge_config(&cmd(), os(&["t", "train"]), &entries).unwrap_err();
        assert!(err.contains("epohcs"));
    }

    #[test]
    fn finds_config_path() {
        assert_eq!(config_path(&os(&["t", "train", "--config", "x.cfg"])), Some("x.cfg".into()));
        assert_eq!(config_path(&os(&["t", "--config=y", "train"])), Some("y".into()));
        assert_eq!(config_path(&os(&["t", "train"])), None);
    }
}
