//! `key = value` configuration files. Keys are flag names without the
//! leading dashes; values are spliced into the argument list right after
//! the subcommand, so anything typed on the command line takes precedence.

use clap::{ArgAction, CommandFactory};

use crate::{Cli, Failure};

/// Global flags that consume the following token.
const GLOBAL_VALUED: [&str; 4] = ["--seed", "--workers", "--config", "--out"];

/// The `--config` value, if any.
pub fn path_in(argv: &[String]) -> Option<String> {
    let mut it = argv.iter().skip(1);
    while let Some(tok) = it.next() {
        if tok == "--" {
            break;
        }
        if tok == "--config" {
            return it.next().cloned();
        }
        if let Some(v) = tok.strip_prefix("--config=") {
            return Some(v.to_string());
        }
    }
    None
}

fn subcommand_index(argv: &[String]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let tok = argv[i].as_str();
        if GLOBAL_VALUED.contains(&tok) {
            i += 2;
        } else if tok.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn given_on_command_line(argv: &[String], long: &str) -> bool {
    let flag = format!("--{long}");
    let with_value = format!("--{long}=");
    argv.iter().any(|a| *a == flag || a.starts_with(&with_value))
}

/// Returns `argv` with the file's settings inserted after the subcommand.
pub fn merge(argv: &[String], text: &str) -> Result<Vec<String>, Failure> {
    let Some(sub) = subcommand_index(argv) else {
        return Ok(argv.to_vec());
    };
    let root = Cli::command();
    let Some(cmd) = root.find_subcommand(&argv[sub]) else {
        return Ok(argv.to_vec());
    };
    let args: Vec<&clap::Arg> = root.get_arguments().chain(cmd.get_arguments()).collect();
    let mut spliced = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Failure::Usage(format!("config line {}: {msg}", lineno + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad("expected `key = value`".into()))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let arg = args
            .iter()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .ok_or_else(|| bad(format!("unknown key '{key}' for {}", argv[sub])))?;
        if given_on_command_line(argv, &key) {
            continue;
        }
        match arg.get_action() {
            ArgAction::SetTrue => match value {
                "true" => spliced.push(format!("--{key}")),
                "false" => {}
                other => return Err(bad(format!("'{key}' takes true or false, got '{other}'"))),
            },
            _ => spliced.push(format!("--{key}={value}")),
        }
    }
    let mut out = argv[..=sub].to_vec();
    out.extend(spliced);
    out.extend_from_slice(&argv[sub + 1..]);
    Ok(out)
}
