//! Versioned binary model files with a JSON sidecar for the encoding spec.
//!
//! Layout (little-endian): magic "PMLP", u32 version, u32 layer count,
//! u32 dims, then f32 parameters row-major (weights then biases per layer).
//! The sidecar at `<path>.json` holds the model kind and encoding spec.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{ForgeError, Result};

use super::encode::{EncodingSpec, ModelKind};
use super::mlp::MlpModel;

const MODEL_MAGIC: &[u8; 4] = b"PMLP";
const MODEL_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Sidecar {
    kind: ModelKind,
    spec: EncodingSpec,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

pub fn save_model(
    path: impl AsRef<Path>,
    model: &MlpModel,
    kind: ModelKind,
    spec: &EncodingSpec,
) -> Result<()> {
    let path = path.as_ref();
    let mut file = std::fs::File::create(path).map_err(|e| ForgeError::io(path, e))?;
    file.write_all(MODEL_MAGIC).map_err(|e| ForgeError::io(path, e))?;
    file.write_all(&MODEL_VERSION.to_le_bytes())
        .map_err(|e| ForgeError::io(path, e))?;
    file.write_all(&(model.layer_dims.len() as u32).to_le_bytes())
        .map_err(|e| ForgeError::io(path, e))?;
    for dim in &model.layer_dims {
        file.write_all(&(*dim as u32).to_le_bytes())
            .map_err(|e| ForgeError::io(path, e))?;
    }
    for l in 0..model.weights.len() {
        for w in &model.weights[l] {
            file.write_all(&(*w as f32).to_le_bytes())
                .map_err(|e| ForgeError::io(path, e))?;
        }
        for b in &model.biases[l] {
            file.write_all(&(*b as f32).to_le_bytes())
                .map_err(|e| ForgeError::io(path, e))?;
        }
    }
    let sidecar = Sidecar {
        kind,
        spec: spec.clone(),
    };
    let json = serde_json::to_string_pretty(&sidecar)
        .map_err(|e| ForgeError::Invalid(e.to_string()))?;
    std::fs::write(sidecar_path(path), json).map_err(|e| ForgeError::io(sidecar_path(path), e))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<(MlpModel, ModelKind, EncodingSpec)> {
    let path = path.as_ref();
    let mut file = std::fs::File::open(path).map_err(|e| ForgeError::io(path, e))?;
    let mut magic = [0u8; 4];
    file.read_exact(&mut magic).map_err(|e| ForgeError::io(path, e))?;
    if &magic != MODEL_MAGIC {
        return Err(ForgeError::BadMagic { expected: "PMLP" });
    }
    let mut u32_buf = [0u8; 4];
    file.read_exact(&mut u32_buf).map_err(|e| ForgeError::io(path, e))?;
    let version = u32::from_le_bytes(u32_buf);
    if version != MODEL_VERSION {
        return Err(ForgeError::Invalid(format!(
            "unsupported model version {}",
            version
        )));
    }
    file.read_exact(&mut u32_buf).map_err(|e| ForgeError::io(path, e))?;
    let layer_count = u32::from_le_bytes(u32_buf) as usize;
    if layer_count < 2 {
        return Err(ForgeError::Invalid("model needs at least two layers".into()));
    }
    let mut layer_dims = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        file.read_exact(&mut u32_buf).map_err(|e| ForgeError::io(path, e))?;
        layer_dims.push(u32::from_le_bytes(u32_buf) as usize);
    }
    let mut weights = Vec::new();
    let mut biases = Vec::new();
    for pair in layer_dims.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let mut w = Vec::with_capacity(fan_in * fan_out);
        for _ in 0..fan_in * fan_out {
            file.read_exact(&mut u32_buf).map_err(|e| ForgeError::io(path, e))?;
            w.push(f32::from_le_bytes(u32_buf) as f64);
        }
        let mut b = Vec::with_capacity(fan_out);
        for _ in 0..fan_out {
            file.read_exact(&mut u32_buf).map_err(|e| ForgeError::io(path, e))?;
            b.push(f32::from_le_bytes(u32_buf) as f64);
        }
        weights.push(w);
        biases.push(b);
    }
    let model = MlpModel {
        layer_dims,
        weights,
        biases,
        seed: 0,
    };
    let sidecar_file = sidecar_path(path);
    let json = std::fs::read_to_string(&sidecar_file).map_err(|e| ForgeError::io(&sidecar_file, e))?;
    let sidecar: Sidecar =
        serde_json::from_str(&json).map_err(|e| ForgeError::parse(&sidecar_file, 0, e.to_string()))?;
    Ok((model, sidecar.kind, sidecar.spec))
}
