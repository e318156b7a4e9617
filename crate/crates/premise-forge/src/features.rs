//! Dense feature vectors for images and word embeddings for tokens.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{ForgeError, Result};
use crate::lexicon::Token;

const FEATURE_MAGIC: &[u8; 4] = b"PFV1";

/// Image feature vectors of uniform dimension, keyed by image id.
///
/// File format (little-endian): magic "PFV1", u32 dim, u32 count, then
/// count records of (u64 image_id, dim x f32).
#[derive(Debug, Clone)]
pub struct FeatureStore {
    dim: usize,
    vectors: BTreeMap<u64, Vec<f32>>,
}

impl FeatureStore {
    pub fn new(dim: usize) -> FeatureStore {
        FeatureStore {
            dim,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, image_id: u64, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(ForgeError::DimMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        if vector.iter().any(|v| !v.is_finite()) {
            return Err(ForgeError::Invalid(format!(
                "non-finite feature entry for image {}",
                image_id
            )));
        }
        self.vectors.insert(image_id, vector);
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<FeatureStore> {
        let path = path.as_ref();
        let mut file = std::fs::File::open(path).map_err(|e| ForgeError::io(path, e))?;
        let mut magic = [0u8; 4];
        file.read_exact(&mut magic).map_err(|e| ForgeError::io(path, e))?;
        if &magic != FEATURE_MAGIC {
            return Err(ForgeError::BadMagic { expected: "PFV1" });
        }
        let mut u32_buf = [0u8; 4];
        file.read_exact(&mut u32_buf).map_err(|e| ForgeError::io(path, e))?;
        let dim = u32::from_le_bytes(u32_buf) as usize;
        file.read_exact(&mut u32_buf).map_err(|e| ForgeError::io(path, e))?;
        let count = u32::from_le_bytes(u32_buf) as usize;
        if dim == 0 {
            return Err(ForgeError::Invalid("feature dimension is zero".into()));
        }
        let mut store = FeatureStore::new(dim);
        let mut id_buf = [0u8; 8];
        let mut vec_buf = vec![0u8; dim * 4];
        for _ in 0..count {
            file.read_exact(&mut id_buf).map_err(|e| ForgeError::io(path, e))?;
            file.read_exact(&mut vec_buf).map_err(|e| ForgeError::io(path, e))?;
            let id = u64::from_le_bytes(id_buf);
            let vector: Vec<f32> = vec_buf
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
                .collect();
            store.insert(id, vector)?;
        }
        Ok(store)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = std::fs::File::create(path).map_err(|e| ForgeError::io(path, e))?;
        file.write_all(FEATURE_MAGIC).map_err(|e| ForgeError::io(path, e))?;
        file.write_all(&(self.dim as u32).to_le_bytes())
            .map_err(|e| ForgeError::io(path, e))?;
        file.write_all(&(self.vectors.len() as u32).to_le_bytes())
            .map_err(|e| ForgeError::io(path, e))?;
        for (id, vector) in &self.vectors {
            file.write_all(&id.to_le_bytes()).map_err(|e| ForgeError::io(path, e))?;
            for v in vector {
                file.write_all(&v.to_le_bytes()).map_err(|e| ForgeError::io(path, e))?;
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, image_id: u64) -> Option<&[f32]> {
        self.vectors.get(&image_id).map(Vec::as_slice)
    }

    pub fn require(&self, image_id: u64) -> Result<&[f32]> {
        self.get(image_id).ok_or(ForgeError::MissingFeature(image_id))
    }

    pub fn ids(&self) -> impl Iterator<Item = u64> + '_ {
        self.vectors.keys().copied()
    }

    /// Euclidean distance between two stored vectors.
    pub fn distance(&self, a: u64, b: u64) -> Result<f64> {
        let va = self.require(a)?;
        let vb = self.require(b)?;
        Ok(euclidean(va, vb))
    }

    /// Rescales every vector to unit L2 norm; zero vectors stay zero.
    pub fn l2_normalize(&mut self) {
        for vector in self.vectors.values_mut() {
            let norm: f64 = vector.iter().map(|v| (*v as f64).powi(2)).sum::<f64>().sqrt();
            if norm > 0.0 {
                for v in vector.iter_mut() {
                    *v = (*v as f64 / norm) as f32;
                }
            }
        }
    }
}

pub fn euclidean(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let d = *x as f64 - *y as f64;
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Word embedding table loaded from text lines of `token v1 v2 ... vd`.
#[derive(Debug, Clone)]
pub struct EmbeddingTable {
    dim: usize,
    vectors: HashMap<String, Vec<f32>>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> EmbeddingTable {
        EmbeddingTable {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, token: impl Into<String>, vector: Vec<f32>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(ForgeError::DimMismatch {
                expected: self.dim,
                got: vector.len(),
            });
        }
        self.vectors.insert(token.into().to_lowercase(), vector);
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<EmbeddingTable> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| ForgeError::io(path, e))?;
        let reader = BufReader::new(file);
        let mut table: Option<EmbeddingTable> = None;
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| ForgeError::io(path, e))?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().unwrap_or("").to_lowercase();
            let values: std::result::Result<Vec<f32>, _> =
                parts.map(str::parse::<f32>).collect();
            let values = values
                .map_err(|e| ForgeError::parse(path, idx + 1, format!("bad value: {}", e)))?;
            if values.is_empty() {
                return Err(ForgeError::parse(path, idx + 1, "no vector values"));
            }
            let table = table.get_or_insert_with(|| EmbeddingTable::new(values.len()));
            if values.len() != table.dim {
                return Err(ForgeError::parse(
                    path,
                    idx + 1,
                    format!("expected {} values, got {}", table.dim, values.len()),
                ));
            }
            table.vectors.insert(token, values);
        }
        table.ok_or_else(|| ForgeError::parse(path, 0, "empty embedding table"))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[f32]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    /// Mean of token vectors; looks up the surface then the lemma, skips
    /// out-of-vocabulary tokens, and yields a zero vector when all are OOV.
    pub fn mean_embedding(&self, tokens: &[Token]) -> Vec<f64> {
        let mut sum = vec![0.0f64; self.dim];
        let mut found = 0usize;
        for token in tokens {
            let vector = self
                .get(&token.surface)
                .or_else(|| self.get(&token.lemma));
            if let Some(v) = vector {
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += *x as f64;
                }
                found += 1;
            }
        }
        if found > 0 {
            for s in sum.iter_mut() {
                *s /= found as f64;
            }
        }
        sum
    }
}
