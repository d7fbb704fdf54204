use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six network variants, named by input frame length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConfigName {
    In50999,
    In32000,
    In16000,
    In16000G,
    In8000,
    In1600,
}

impl ConfigName {
    pub const ALL: [ConfigName; 6] = [
        ConfigName::In50999,
        ConfigName::In32000,
        ConfigName::In16000,
        ConfigName::In16000G,
        ConfigName::In8000,
        ConfigName::In1600,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ConfigName::In50999 => "in50999",
            ConfigName::In32000 => "in32000",
            ConfigName::In16000 => "in16000",
            ConfigName::In16000G => "in16000G",
            ConfigName::In8000 => "in8000",
            ConfigName::In1600 => "in1600",
        }
    }

    pub fn valid_names() -> String {
        Self::ALL.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(", ")
    }
}

impl fmt::Display for ConfigName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConfigName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::UnknownConfig {
                name: s.to_string(),
                valid: Self::valid_names(),
            })
    }
}

/// One convolution or pooling row of the architecture table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LayerSpec {
    Conv { filters: usize, size: usize, stride: usize },
    Pool { size: usize, stride: usize },
}

const fn conv(filters: usize, size: usize, stride: usize) -> LayerSpec {
    LayerSpec::Conv { filters, size, stride }
}

const fn pool(size: usize, stride: usize) -> LayerSpec {
    LayerSpec::Pool { size, stride }
}

const STACK_LONG: [LayerSpec; 8] = [
    conv(16, 64, 2),
    pool(8, 8),
    conv(32, 32, 2),
    pool(8, 8),
    conv(64, 16, 2),
    conv(128, 8, 2),
    conv(256, 4, 2),
    pool(4, 4),
];

const STACK_16000: [LayerSpec; 6] = [
    conv(16, 64, 2),
    pool(8, 8),
    conv(32, 32, 2),
    pool(8, 8),
    conv(64, 16, 2),
    conv(128, 8, 2),
];

const STACK_16000G: [LayerSpec; 6] = [
    conv(64, 512, 1),
    pool(8, 8),
    conv(32, 32, 2),
    pool(8, 8),
    conv(64, 16, 2),
    conv(128, 8, 2),
];

const STACK_8000: [LayerSpec; 5] = [conv(16, 64, 2), pool(8, 8), conv(32, 32, 2), pool(8, 8), conv(64, 16, 2)];

const STACK_1600: [LayerSpec; 5] = [conv(16, 32, 2), pool(2, 2), conv(32, 16, 2), pool(2, 2), conv(64, 8, 2)];

pub const FC_DIMS: [usize; 2] = [128, 64];
pub const N_CLASSES: usize = 10;
pub const DROPOUT_P: f64 = 0.25;

/// Full description of one network variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub name: ConfigName,
    pub input_len: usize,
    pub conv_stack: Vec<LayerSpec>,
    pub fc_dims: [usize; 2],
    pub n_classes: usize,
    pub dropout_p: f64,
    pub gammatone_first_layer: bool,
    /// First-layer filter count when widened for filter-response studies.
    pub widened_first_layer: Option<usize>,
}

impl ModelConfig {
    pub fn new(name: ConfigName) -> Self {
        let (input_len, stack): (usize, &[LayerSpec]) = match name {
            ConfigName::In50999 => (50_999, &STACK_LONG),
            ConfigName::In32000 => (32_000, &STACK_LONG),
            ConfigName::In16000 => (16_000, &STACK_16000),
            ConfigName::In16000G => (16_000, &STACK_16000G),
            ConfigName::In8000 => (8_000, &STACK_8000),
            ConfigName::In1600 => (1_600, &STACK_1600),
        };
        Self {
            name,
            input_len,
            conv_stack: stack.to_vec(),
            fc_dims: FC_DIMS,
            n_classes: N_CLASSES,
            dropout_p: DROPOUT_P,
            gammatone_first_layer: name == ConfigName::In16000G,
            widened_first_layer: None,
        }
    }

    /// Replaces the first convolution's filter count. Used only for
    /// filter-response analysis builds.
    pub fn widen_first_layer(mut self, filters: usize) -> Result<Self> {
        if filters == 0 {
            return Err(Error::InvalidArgument("widened first layer needs at least one filter".into()));
        }
        if self.gammatone_first_layer {
            return Err(Error::InvalidArgument(format!("{} has a fixed gammatone first layer", self.name)));
        }
        if let Some(LayerSpec::Conv { filters: f, .. }) = self.conv_stack.first_mut() {
            *f = filters;
        }
        self.widened_first_layer = Some(filters);
        Ok(self)
    }

    /// Identifier stored in checkpoints, e.g. `in16000` or `in16000+cl1x64`.
    pub fn id(&self) -> String {
        match self.widened_first_layer {
            Some(n) => format!("{}+cl1x{n}", self.name),
            None => self.name.to_string(),
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id.split_once("+cl1x") {
            Some((base, width)) => {
                let filters = width
                    .parse()
                    .map_err(|_| Error::InvalidArgument(format!("bad widened config id {id:?}")))?;
                Self::new(base.parse()?).widen_first_layer(filters)
            }
            None => Ok(Self::new(id.parse()?)),
        }
    }
}

impl FromStr for ModelConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_id(s)
    }
}
