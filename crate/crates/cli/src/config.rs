//! TOML config files and their merge with command-line flags.

use std::path::Path;

use serde::Deserialize;

use crate::args::{EvolutionArgs, ModelArgs, NumericsArgs, WalkArgs};
use crate::error::{config_err, CliResult};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    /// If present, must name the subcommand being run.
    pub command: Option<String>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub model: ModelArgs,
    #[serde(default)]
    pub walk: WalkArgs,
    #[serde(default)]
    pub numerics: NumericsArgs,
    #[serde(default)]
    pub evolution: EvolutionArgs,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<std::path::PathBuf>,
}

impl FileConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| config_err(format!("bad config file: {e}")))
    }
}

/// Fill unset fields of `self` from a lower-priority source.
pub trait Merge {
    fn merge(&mut self, lower: &Self);
}

macro_rules! merge_options {
    ($ty:ty; $($field:ident),*) => {
        impl Merge for $ty {
            fn merge(&mut self, lower: &Self) {
                $(if self.$field.is_none() {
                    self.$field = lower.$field.clone();
                })*
            }
        }
    };
}

merge_options!(ModelArgs; model, t1, t2, delta, force);
merge_options!(WalkArgs; beta1, beta2, delta, m);
merge_options!(EvolutionArgs; periods, t_end, dt, sample_every, steps, revival_offset, transient, tol, map_threshold);

impl Merge for NumericsArgs {
    fn merge(&mut self, lower: &Self) {
        for (mine, theirs) in [
            (&mut self.n_k, lower.n_k),
            (&mut self.n_cells, lower.n_cells),
            (&mut self.max_cells, lower.max_cells),
            (&mut self.n_q, lower.n_q),
        ] {
            if mine.is_none() {
                *mine = theirs;
            }
        }
        if self.k_tol.is_none() {
            self.k_tol = lower.k_tol;
        }
        if self.eps_floor.is_none() {
            self.eps_floor = lower.eps_floor;
        }
        self.no_wkb |= lower.no_wkb;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections() {
        let c = FileConfig::parse(
            r#"
            command = "sweep"
            [model]
            kind = "rice-mele"
            t1 = 0.4
            t2 = 1
            delta = "0:1.2:120"
            force = 0.2
            [walk]
            beta1 = "pi/2-0.1"
            beta2 = 1.4208
            [numerics]
            n-k = 8192
            no-wkb = true
            "#,
        )
        .unwrap();
        assert_eq!(c.model.model.as_deref(), Some("rice-mele"));
        assert_eq!(c.model.t2, Some(1.0));
        assert_eq!(c.walk.beta2.as_deref(), Some("1.4208"));
        assert_eq!(c.numerics.n_k, Some(8192));
        assert!(c.numerics.no_wkb);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(FileConfig::parse("[model]\nkind = \"model1\"\nt3 = 1\n").is_err());
        assert!(FileConfig::parse("bogus = 1\n").is_err());
    }

    #[test]
    fn flags_win() {
        let mut flags = ModelArgs {
            t1: Some(0.3),
            ..Default::default()
        };
        let file = ModelArgs {
            t1: Some(0.2),
            t2: Some(1.0),
            ..Default::default()
        };
        flags.merge(&file);
        assert_eq!((flags.t1, flags.t2), (Some(0.3), Some(1.0)));
    }
}
