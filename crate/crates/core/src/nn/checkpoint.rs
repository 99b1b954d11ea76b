//! Binary parameter checkpoints.
//!
//! Layout (little-endian): the 8-byte magic `CPLCKPT\0`, a `u32` version,
//! then a body holding a JSON metadata document and a list of named 2-D
//! arrays, then the SHA-256 of the body. Each array records its element
//! width (4 or 8 bytes), so parameters saved from `f64` runs reload exactly.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;
use sha2::{Digest, Sha256};

use super::{Adam, NnError, Params, Real, Scorer, ScorerConfig};

const MAGIC: &[u8; 8] = b"CPLCKPT\0";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum ArrayData {
    F32(Vec<f32>),
    F64(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedArray {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: ArrayData,
}

impl NamedArray {
    fn from_array<T: Real>(name: String, a: &Array2<T>) -> Self {
        let data = if T::DTYPE == 8 {
            ArrayData::F64(a.iter().map(|v| v.to_f64().unwrap_or(0.0)).collect())
        } else {
            ArrayData::F32(a.iter().map(|v| v.to_f32().unwrap_or(0.0)).collect())
        };
        NamedArray {
            name,
            rows: a.nrows(),
            cols: a.ncols(),
            data,
        }
    }

    fn to_array<T: Real>(&self) -> Array2<T> {
        let values: Vec<T> = match &self.data {
            ArrayData::F32(v) => v.iter().map(|&x| T::from_f32(x).unwrap_or(T::zero())).collect(),
            ArrayData::F64(v) => v.iter().map(|&x| T::from_f64(x).unwrap_or(T::zero())).collect(),
        };
        Array2::from_shape_vec((self.rows, self.cols), values).expect("shape was validated on load")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    /// Holds at least `"scorer"`, the [`ScorerConfig`].
    pub metadata: serde_json::Value,
    pub arrays: Vec<NamedArray>,
}

impl Checkpoint {
    pub fn from_scorer<T: Real>(scorer: &Scorer<T>, adam: Option<&Adam<T>>) -> Self {
        let mut arrays: Vec<NamedArray> = scorer
            .params
            .names()
            .into_iter()
            .zip(scorer.params.tensors())
            .map(|(n, t)| NamedArray::from_array(n, t))
            .collect();
        let mut metadata = serde_json::json!({ "scorer": scorer.config });
        if let Some(adam) = adam {
            for (prefix, moments) in [("adam.m.", &adam.m), ("adam.v.", &adam.v)] {
                for (n, t) in moments.names().into_iter().zip(moments.tensors()) {
                    arrays.push(NamedArray::from_array(format!("{prefix}{n}"), t));
                }
            }
            metadata["adam"] = serde_json::json!({
                "lr": adam.lr, "beta1": adam.beta1, "beta2": adam.beta2, "eps": adam.eps, "t": adam.t,
            });
        }
        Checkpoint { metadata, arrays }
    }

    pub fn scorer_config(&self) -> Result<ScorerConfig, NnError> {
        serde_json::from_value(self.metadata["scorer"].clone())
            .map_err(|e| NnError::Checkpoint(format!("bad scorer config: {e}")))
    }

    fn fill<T: Real>(&self, prefix: &str, params: &mut Params<T>) -> Result<(), NnError> {
        let names = params.names();
        for (name, t) in names.iter().zip(params.tensors_mut()) {
            let full = format!("{prefix}{name}");
            let a = self
                .arrays
                .iter()
                .find(|a| a.name == full)
                .ok_or_else(|| NnError::Checkpoint(format!("missing array {full}")))?;
            if (a.rows, a.cols) != t.dim() {
                return Err(NnError::Checkpoint(format!(
                    "{full} has shape {}x{}, expected {:?}",
                    a.rows,
                    a.cols,
                    t.dim()
                )));
            }
            *t = a.to_array();
        }
        Ok(())
    }

    pub fn to_scorer<T: Real>(&self) -> Result<Scorer<T>, NnError> {
        let config = self.scorer_config()?;
        let mut params = Params::zeros(&config);
        self.fill("", &mut params)?;
        Ok(Scorer { config, params })
    }

    /// Optimizer state, when the checkpoint was saved with one.
    pub fn to_adam<T: Real>(&self) -> Result<Option<Adam<T>>, NnError> {
        let meta = &self.metadata["adam"];
        if meta.is_null() {
            return Ok(None);
        }
        let config = self.scorer_config()?;
        let num = |k: &str| {
            meta[k]
                .as_f64()
                .ok_or_else(|| NnError::Checkpoint(format!("adam.{k} missing")))
        };
        let mut adam = Adam::new(&config, num("lr")?);
        adam.beta1 = num("beta1")?;
        adam.beta2 = num("beta2")?;
        adam.eps = num("eps")?;
        adam.t = meta["t"].as_u64().unwrap_or(0);
        self.fill("adam.m.", &mut adam.m)?;
        self.fill("adam.v.", &mut adam.v)?;
        Ok(Some(adam))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut body = Vec::new();
        let meta = serde_json::to_vec(&self.metadata).expect("metadata serialises");
        body.extend((meta.len() as u64).to_le_bytes());
        body.extend(&meta);
        body.extend((self.arrays.len() as u32).to_le_bytes());
        for a in &self.arrays {
            body.extend((a.name.len() as u16).to_le_bytes());
            body.extend(a.name.as_bytes());
            match &a.data {
                ArrayData::F32(_) => body.push(4),
                ArrayData::F64(_) => body.push(8),
            }
            body.extend((a.rows as u64).to_le_bytes());
            body.extend((a.cols as u64).to_le_bytes());
            match &a.data {
                ArrayData::F32(v) => v.iter().for_each(|x| body.extend(x.to_le_bytes())),
                ArrayData::F64(v) => v.iter().for_each(|x| body.extend(x.to_le_bytes())),
            }
        }
        let mut out = Vec::with_capacity(body.len() + 44);
        out.extend(MAGIC);
        out.extend(VERSION.to_le_bytes());
        out.extend(&body);
        out.extend(&Sha256::digest(&body)[..]);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, NnError> {
        let bad = |m: &str| NnError::Checkpoint(m.to_string());
        if bytes.len() < 12 + 32 || &bytes[..8] != MAGIC {
            return Err(bad("not a checkpoint file"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
        if version != VERSION {
            return Err(NnError::Checkpoint(format!("unsupported version {version}")));
        }
        let (body, digest) = bytes[12..].split_at(bytes.len() - 12 - 32);
        if Sha256::digest(body)[..] != *digest {
            return Err(bad("digest mismatch"));
        }
        let mut r = Reader { buf: body, pos: 0 };
        let meta_len = r.u64()? as usize;
        let metadata = serde_json::from_slice(r.take(meta_len)?)
            .map_err(|e| NnError::Checkpoint(format!("bad metadata: {e}")))?;
        let n = r.u32()?;
        let mut arrays = Vec::with_capacity(n as usize);
        for _ in 0..n {
            let name_len = r.u16()? as usize;
            let name = String::from_utf8(r.take(name_len)?.to_vec()).map_err(|_| bad("bad name"))?;
            let width = r.take(1)?[0];
            let rows = r.u64()? as usize;
            let cols = r.u64()? as usize;
            let count = rows.checked_mul(cols).ok_or_else(|| bad("bad shape"))?;
            let data = match width {
                4 => ArrayData::F32(
                    r.take(count * 4)?
                        .chunks_exact(4)
                        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                        .collect(),
                ),
                8 => ArrayData::F64(
                    r.take(count * 8)?
                        .chunks_exact(8)
                        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                        .collect(),
                ),
                _ => return Err(bad("bad element width")),
            };
            arrays.push(NamedArray {
                name,
                rows,
                cols,
                data,
            });
        }
        if r.pos != body.len() {
            return Err(bad("trailing bytes"));
        }
        Ok(Checkpoint { metadata, arrays })
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], NnError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| NnError::Checkpoint("truncated".into()))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16, NnError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, NnError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, NnError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn save_checkpoint(path: &Path, ckpt: &Checkpoint) -> Result<(), NnError> {
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&ckpt.to_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint, NnError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    Checkpoint::from_bytes(&bytes)
}
