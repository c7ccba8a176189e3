//! `key = value` configuration files. Entries become command-line flags
//! placed ahead of the user's own, so explicit flags override them.

use std::path::Path;

use clap::CommandFactory;

use crate::args::Cli;
use crate::CliError;

/// Parse a config file into `(key, value)` pairs. Blank lines and lines
/// starting with `#` are skipped; keys may use `_` or `-`; values may be
/// quoted.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim().trim_matches('"').to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((key, value));
    }
    Ok(out)
}

/// Turn config entries into flags for `subcommand`. Keys that the
/// subcommand does not accept are ignored so one file can serve all of them.
pub fn flags_for(subcommand: &str, entries: &[(String, String)]) -> Result<Vec<String>, CliError> {
    let root = Cli::command();
    let sub = root
        .find_subcommand(subcommand)
        .ok_or_else(|| CliError::Usage(format!("unknown subcommand {subcommand}")))?;
    let mut flags = Vec::new();
    for (key, value) in entries {
        if key == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        let arg = sub
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()));
        let Some(arg) = arg else { continue };
        if arg.get_action().takes_values() {
            flags.push(format!("--{key}={value}"));
        } else {
            match value.as_str() {
                "true" => flags.push(format!("--{key}")),
                "false" => {}
                other => return Err(CliError::Usage(format!("config key {key} expects true or false, got {other}"))),
            }
        }
    }
    Ok(flags)
}

/// Splice the flags from `--config` (if any) into `argv` right after the
/// subcommand name.
pub fn expand_argv(argv: Vec<String>, subcommand: &str, config: Option<&Path>) -> Result<Vec<String>, CliError> {
    let Some(path) = config else { return Ok(argv) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    let flags = flags_for(subcommand, &parse(&text)?)?;
    let at = argv
        .iter()
        .skip(1)
        .position(|a| a == subcommand)
        .map(|i| i + 2)
        .ok_or_else(|| CliError::Usage(format!("subcommand {subcommand} not found in arguments")))?;
    let mut out = argv[..at].to_vec();
    out.extend(flags);
    out.extend_from_slice(&argv[at..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_quotes_and_underscores() {
        let entries = parse("# defaults\nseed = 7\n\ncurvature_bound=\"50\"\n").unwrap();
        assert_eq!(entries, vec![("seed".into(), "7".into()), ("curvature-bound".into(), "50".into())]);
        assert!(parse("no equals sign").is_err());
    }

    #[test]
    fn skips_keys_other_subcommands_use() {
        let entries = parse("samples = 10\ndimension = 4\nself_test = false").unwrap();
        assert_eq!(flags_for("cusp-coeff", &entries).unwrap(), vec!["--dimension=4"]);
        assert_eq!(flags_for("bk-function", &entries).unwrap(), vec!["--samples=10", "--dimension=4"]);
    }

    #[test]
    fn flags_follow_the_subcommand() {
        let dir = std::env::temp_dir().join(format!("orthospec-config-{}", std::process::id()));
        std::fs::write(&dir, "dimension = 5\n").unwrap();
        let argv: Vec<String> = ["orthospec", "--seed", "3", "cusp-coeff", "--dimension", "4"].map(String::from).into();
        let out = expand_argv(argv, "cusp-coeff", Some(&dir)).unwrap();
        std::fs::remove_file(&dir).unwrap();
        assert_eq!(out, ["orthospec", "--seed", "3", "cusp-coeff", "--dimension=5", "--dimension", "4"]);
    }
}
