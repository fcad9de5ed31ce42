use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyArg {
    Longest,
    ReportAll,
}

/// Flags shared by every subcommand. Each can also be set in the `--config` file.
#[derive(Debug, Clone, Default, Args)]
pub struct RunFlags {
    /// JSON config file; flags given on the command line win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Transcript file or directory (ingest, classify), or annotation CSV (agree).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// CoNLL-U file or directory, used instead of --input.
    #[arg(long, global = true)]
    pub conllu: Option<PathBuf>,
    /// Pattern file (JSON); defaults to the bundled NEG1/NEG2/NEG3 patterns.
    #[arg(long, global = true)]
    pub patterns: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub policy: Option<PolicyArg>,
    /// Overrides the gap allowance of every pattern.
    #[arg(long, global = true)]
    pub max_gap: Option<usize>,
    /// Also count `n` and `ñ` as negators.
    #[arg(long, global = true)]
    pub variants: bool,
    /// Context tokens on each side of a match.
    #[arg(long, global = true)]
    pub context: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// `form<TAB>UPOS` lexicon; defaults to the bundled starter lexicon.
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Disfluency marker regex; repeat to give several. Replaces the defaults.
    #[arg(long, global = true)]
    pub markers: Vec<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
struct FileConfig {
    input: Option<PathBuf>,
    conllu: Option<PathBuf>,
    patterns: Option<PathBuf>,
    policy: Option<PolicyArg>,
    #[serde(alias = "max-gap")]
    max_gap: Option<usize>,
    variants: Option<bool>,
    context: Option<usize>,
    out: Option<PathBuf>,
    lexicon: Option<PathBuf>,
    markers: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputMode {
    Transcripts(PathBuf),
    Conllu(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input: Option<InputMode>,
    pub patterns: Option<PathBuf>,
    pub policy: PolicyArg,
    pub max_gap: Option<usize>,
    pub variants: bool,
    pub context: usize,
    pub out: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub markers: Option<Vec<String>>,
}

impl RunConfig {
    pub fn resolve(flags: &RunFlags) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let cfg: FileConfig =
                    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
                let base = path.parent().unwrap_or(Path::new(""));
                cfg.rebase(base)
            }
            None => FileConfig::default(),
        };
        let input = flags.input.clone().or(file.input);
        let conllu = flags.conllu.clone().or(file.conllu);
        let input = match (input, conllu) {
            (Some(_), Some(_)) => bail!("give either --input or --conllu, not both"),
            (Some(p), None) => Some(InputMode::Transcripts(p)),
            (None, Some(p)) => Some(InputMode::Conllu(p)),
            (None, None) => None,
        };
        Ok(RunConfig {
            input,
            patterns: flags.patterns.clone().or(file.patterns),
            policy: flags.policy.or(file.policy).unwrap_or(PolicyArg::Longest),
            max_gap: flags.max_gap.or(file.max_gap),
            variants: flags.variants || file.variants.unwrap_or(false),
            context: flags.context.or(file.context).unwrap_or(5),
            out: flags.out.clone().or(file.out),
            lexicon: flags.lexicon.clone().or(file.lexicon),
            markers: if flags.markers.is_empty() {
                file.markers
            } else {
                Some(flags.markers.clone())
            },
        })
    }

    pub fn out_dir(&self) -> Result<&Path> {
        let out = self.out.as_deref().context("missing --out")?;
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        Ok(out)
    }
}

impl FileConfig {
    /// Relative paths in a config file are taken relative to the file itself.
    fn rebase(self, base: &Path) -> Self {
        let fix = |p: Option<PathBuf>| p.map(|p| if p.is_relative() { base.join(p) } else { p });
        FileConfig {
            input: fix(self.input),
            conllu: fix(self.conllu),
            patterns: fix(self.patterns),
            out: fix(self.out),
            lexicon: fix(self.lexicon),
            ..self
        }
    }
}
