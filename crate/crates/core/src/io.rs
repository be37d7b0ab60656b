//! JSON documents and named channel presets.

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, InputDistribution};
use crate::error::{Error, Result};
use crate::law::DiscreteLaw;

/// `{"W": [[...], ...], "Q": [...]}`; Q is optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelDocument {
    #[serde(rename = "W")]
    pub w: Channel,
    #[serde(rename = "Q", default, skip_serializing_if = "Option::is_none")]
    pub q: Option<InputDistribution>,
}

impl ChannelDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        if let Some(q) = &doc.q {
            doc.w.check_input(q)?;
        }
        Ok(doc)
    }
}

/// Parses `bsc:<p>`, `bec:<eps>`, `identity:<k>` or `typewriter:<k>`.
/// Returns `Ok(None)` when the string is not a preset name.
pub fn parse_preset(s: &str) -> Result<Option<Channel>> {
    let Some((name, arg)) = s.split_once(':') else {
        return Ok(None);
    };
    let float = || arg.parse::<f64>().map_err(|_| Error::Parse(format!("bad preset argument `{arg}`")));
    let int = || arg.parse::<usize>().map_err(|_| Error::Parse(format!("bad preset argument `{arg}`")));
    let prob = |p: f64| {
        if (0.0..=1.0).contains(&p) {
            Ok(p)
        } else {
            Err(Error::Parse(format!("preset probability {p} not in [0,1]")))
        }
    };
    let channel = match name {
        "bsc" => Channel::bsc(prob(float()?)?)?,
        "bec" => Channel::bec(prob(float()?)?)?,
        "identity" => {
            let k = int()?;
            if k == 0 {
                return Err(Error::EmptyAlphabet);
            }
            Channel::identity(k)?
        }
        "typewriter" => Channel::typewriter(int()?)?,
        _ => return Ok(None),
    };
    Ok(Some(channel))
}

/// Parses a Q specification: `uniform` or a comma-separated list of probabilities.
pub fn parse_input_distribution(s: &str, num_inputs: usize) -> Result<InputDistribution> {
    if s == "uniform" {
        return Ok(InputDistribution::uniform(num_inputs));
    }
    let values: std::result::Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let values = values.map_err(|_| Error::Parse(format!("bad distribution `{s}`")))?;
    if values.len() != num_inputs {
        return Err(Error::DimensionMismatch { expected: num_inputs, got: values.len() });
    }
    InputDistribution::new(values)
}

/// `{"atoms": [...], "probs": [...], "neg_inf": 0.1}`; `neg_inf` defaults to 0.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LawDocument {
    pub atoms: Vec<f64>,
    pub probs: Vec<f64>,
    #[serde(default)]
    pub neg_inf: f64,
}

impl LawDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn into_law(self) -> Result<DiscreteLaw> {
        DiscreteLaw::with_neg_inf(self.atoms, self.probs, self.neg_inf)
    }
}
