//! JSON channel description.
//!
//! ```json
//! {
//!   "x_size": 2, "s_size": 2, "y_size": 2, "z_size": 2,
//!   "state_prior": [0.6, 0.4],
//!   "kernel": [[[[1, 0], [0, 0]], [[1, 0], [0, 0]]],
//!              [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]],
//!   "distortion": [[0, 1], [1, 0]]
//! }
//! ```
//!
//! `kernel` is nested `[x][s][y][z]` and `distortion` is `[s][s_hat]`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dmc::{Alphabets, StateDmc};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelFile {
    pub x_size: usize,
    pub s_size: usize,
    pub y_size: usize,
    pub z_size: usize,
    pub state_prior: Vec<f64>,
    pub kernel: Vec<Vec<Vec<Vec<f64>>>>,
    pub distortion: Vec<Vec<f64>>,
}

fn shape_error(what: String, got: usize, expected: usize) -> Error {
    Error::InvalidChannel(format!("{what} has length {got}, expected {expected}"))
}

impl TryFrom<ChannelFile> for StateDmc {
    type Error = Error;

    fn try_from(f: ChannelFile) -> Result<Self> {
        let sizes = Alphabets {
            x: f.x_size,
            s: f.s_size,
            y: f.y_size,
            z: f.z_size,
        };
        if f.kernel.len() != sizes.x {
            return Err(shape_error("kernel".into(), f.kernel.len(), sizes.x));
        }
        let mut kernel = Vec::with_capacity(sizes.x * sizes.s * sizes.y * sizes.z);
        for (x, per_x) in f.kernel.iter().enumerate() {
            if per_x.len() != sizes.s {
                return Err(shape_error(format!("kernel[{x}]"), per_x.len(), sizes.s));
            }
            for (s, per_s) in per_x.iter().enumerate() {
                if per_s.len() != sizes.y {
                    return Err(shape_error(format!("kernel[{x}][{s}]"), per_s.len(), sizes.y));
                }
                for (y, per_y) in per_s.iter().enumerate() {
                    if per_y.len() != sizes.z {
                        return Err(shape_error(
                            format!("kernel[{x}][{s}][{y}]"),
                            per_y.len(),
                            sizes.z,
                        ));
                    }
                    kernel.extend_from_slice(per_y);
                }
            }
        }
        if f.distortion.len() != sizes.s {
            return Err(shape_error("distortion".into(), f.distortion.len(), sizes.s));
        }
        let mut distortion = Vec::with_capacity(sizes.s * sizes.s);
        for (s, row) in f.distortion.iter().enumerate() {
            if row.len() != sizes.s {
                return Err(shape_error(format!("distortion[{s}]"), row.len(), sizes.s));
            }
            distortion.extend_from_slice(row);
        }
        StateDmc::new(sizes, f.state_prior, kernel, distortion)
    }
}

impl From<StateDmc> for ChannelFile {
    fn from(dmc: StateDmc) -> Self {
        let a = dmc.sizes();
        let kernel = (0..a.x)
            .map(|x| {
                (0..a.s)
                    .map(|s| {
                        (0..a.y)
                            .map(|y| (0..a.z).map(|z| dmc.kernel(x, s, y, z)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let distortion = (0..a.s)
            .map(|s| (0..a.s).map(|t| dmc.distortion(s, t)).collect())
            .collect();
        ChannelFile {
            x_size: a.x,
            s_size: a.s,
            y_size: a.y,
            z_size: a.z,
            state_prior: dmc.state_prior().to_vec(),
            kernel,
            distortion,
        }
    }
}

pub fn from_json_str(text: &str) -> Result<StateDmc> {
    let file: ChannelFile = serde_json::from_str(text)?;
    StateDmc::try_from(file)
}

pub fn load(path: impl AsRef<Path>) -> Result<StateDmc> {
    from_json_str(&std::fs::read_to_string(path)?)
}

pub fn to_json_string(dmc: &StateDmc) -> Result<String> {
    Ok(serde_json::to_string_pretty(&ChannelFile::from(dmc.clone()))?)
}
