//! Configuration, file formats and experiment drivers on top of `latnls-core`.

pub mod config;
pub mod datum;
pub mod experiment;
pub mod formats;
pub mod suite;

/// Environment variable naming the output directory.
pub const OUT_DIR_ENV: &str = "LATNLS_OUT_DIR";

/// Output directory precedence: command-line flag, then environment, then
/// config file, then `latnls-out`.
pub fn resolve_output_dir(
    flag: Option<&std::path::Path>,
    env: Option<&std::ffi::OsStr>,
    config: Option<&std::path::Path>,
) -> std::path::PathBuf {
    flag.map(Into::into)
        .or_else(|| env.filter(|e| !e.is_empty()).map(Into::into))
        .or_else(|| config.map(Into::into))
        .unwrap_or_else(|| "latnls-out".into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::OsStr;
    use std::path::Path;

    #[test]
    fn output_dir_precedence() {
        let flag = Path::new("a");
        let env = OsStr::new("b");
        let cfg = Path::new("c");
        assert_eq!(resolve_output_dir(Some(flag), Some(env), Some(cfg)), Path::new("a"));
        assert_eq!(resolve_output_dir(None, Some(env), Some(cfg)), Path::new("b"));
        assert_eq!(resolve_output_dir(None, Some(OsStr::new("")), Some(cfg)), Path::new("c"));
        assert_eq!(resolve_output_dir(None, None, None), Path::new("latnls-out"));
    }
}
