//! Optional TOML config file. Every key is optional; command-line flags
//! override whatever the file sets.

use std::path::Path;

use serde::Deserialize;

use hlmkit::experiment::ScheduleOrder;
use hlmkit::hlm::StdDivisor;
use hlmkit::uid::Aggregation;
use hlmkit::{Error, FleschConfig, LogBase};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub flesch: Option<FleschConfig>,
    #[serde(default)]
    pub uid: UidSection,
    #[serde(default)]
    pub lm: LmSection,
    #[serde(default)]
    pub hlm: HlmSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub converge: ConvergeSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UidSection {
    pub k: Option<f64>,
    pub mu_lang: Option<f64>,
    pub base: Option<LogBase>,
    pub aggregation: Option<Aggregation>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LmSection {
    pub order: Option<usize>,
    pub discount: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HlmSection {
    pub std_divisor: Option<StdDivisor>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    pub order: Option<ScheduleOrder>,
    pub seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub epsilon_rel: Option<f64>,
    pub smooth: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> hlmkit::Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source_name: &str) -> hlmkit::Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|span| text[..span.start].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse {
                source_name: source_name.to_string(),
                line,
                message: e.message().to_string(),
            }
        })
    }
}
