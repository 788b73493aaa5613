//! Binary checkpoint layout, all integers little-endian:
//!
//! ```text
//! magic      8 bytes  "MATRECHD"
//! version    u32
//! spec_len   u32, then spec JSON (canonical; head, backbone, init_seed)
//! cat_len    u32, then catalog JSON (canonical)
//! count      u64      number of f32 values
//! digest     32 bytes sha256(spec JSON ‖ catalog JSON ‖ blob)
//! blob       count × f32, tensors in HeadParams::tensors order
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::matrix::Matrix;
use super::params::{HeadParams, LayerParams};
use super::spec::{HeadSpec, LayerSpec};
use crate::backbone::BackboneSpec;
use crate::canonical::to_canonical_json;
use crate::dataset::ClassCatalog;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"MATRECHD";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SpecHeader {
    head: HeadSpec,
    backbone: BackboneSpec,
    init_seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub head: HeadSpec,
    pub backbone: BackboneSpec,
    pub catalog: ClassCatalog,
    pub params: HeadParams,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.params.check(&self.head)?;
        if self.head.out_classes != self.catalog.total_classes() {
            return Err(Error::Checkpoint(format!(
                "head has {} outputs but catalog has {} classes",
                self.head.out_classes,
                self.catalog.total_classes()
            )));
        }
        let spec_json = to_canonical_json(&SpecHeader {
            head: self.head.clone(),
            backbone: self.backbone.clone(),
            init_seed: self.params.init_seed,
        })?;
        let cat_json = to_canonical_json(&self.catalog)?;
        let mut blob = Vec::with_capacity(self.params.parameter_count() * 4);
        for t in self.params.tensors() {
            for &v in t {
                blob.extend_from_slice(&(v as f32).to_le_bytes());
            }
        }
        let digest = blob_digest(spec_json.as_bytes(), cat_json.as_bytes(), &blob);

        let mut out = Vec::with_capacity(blob.len() + spec_json.len() + cat_json.len() + 64);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(spec_json.len() as u32).to_le_bytes());
        out.extend_from_slice(spec_json.as_bytes());
        out.extend_from_slice(&(cat_json.len() as u32).to_le_bytes());
        out.extend_from_slice(cat_json.as_bytes());
        out.extend_from_slice(&((blob.len() / 4) as u64).to_le_bytes());
        out.extend_from_slice(&digest);
        out.extend_from_slice(&blob);
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let spec_len = r.u32()? as usize;
        let spec_json = r.take(spec_len)?;
        let cat_len = r.u32()? as usize;
        let cat_json = r.take(cat_len)?;
        let count = r.u64()? as usize;
        let digest: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
        let blob_len = count.checked_mul(4).ok_or_else(|| corrupt("parameter count overflow"))?;
        let blob = r.take(blob_len)?;
        if r.pos != bytes.len() {
            return Err(corrupt("trailing bytes"));
        }
        if blob_digest(spec_json, cat_json, blob) != digest {
            return Err(corrupt("digest mismatch"));
        }

        let header: SpecHeader = serde_json::from_slice(spec_json)?;
        let catalog: ClassCatalog = serde_json::from_slice(cat_json)?;
        catalog.validate()?;
        header.head.validate()?;
        if header.head.parameter_count() != count {
            return Err(corrupt("parameter count does not match the head spec"));
        }
        let mut values = blob
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
        let mut next = |n: usize| -> Vec<f64> { values.by_ref().take(n).collect() };
        let layers = header
            .head
            .layers
            .iter()
            .zip(header.head.widths())
            .map(|(l, w)| match *l {
                LayerSpec::Dense { units } => LayerParams::Dense {
                    weight: Matrix::from_vec(w, units, next(w * units)),
                    bias: next(units),
                },
                LayerSpec::BatchNorm { .. } => LayerParams::BatchNorm {
                    gamma: next(w),
                    beta: next(w),
                    running_mean: next(w),
                    running_var: next(w),
                },
                _ => LayerParams::None,
            })
            .collect();
        let params = HeadParams {
            layers,
            init_seed: header.init_seed,
        };
        params.check(&header.head)?;
        if header.head.out_classes != catalog.total_classes() {
            return Err(Error::Checkpoint("stored head and catalog disagree".into()));
        }
        Ok(Checkpoint {
            head: header.head,
            backbone: header.backbone,
            catalog,
            params,
        })
    }

    /// Fails unless the head's outputs match `catalog`.
    pub fn check_catalog(&self, catalog: &ClassCatalog) -> Result<()> {
        if self.head.out_classes != catalog.total_classes() {
            return Err(Error::Checkpoint(format!(
                "checkpoint head has {} outputs, catalog has {} classes",
                self.head.out_classes,
                catalog.total_classes()
            )));
        }
        if &self.catalog != catalog {
            return Err(Error::Checkpoint("checkpoint was trained on a different catalog".into()));
        }
        Ok(())
    }

    /// SHA-256 of the serialized checkpoint.
    pub fn digest(&self) -> Result<String> {
        Ok(crate::canonical::sha256_hex(&self.to_bytes()?))
    }
}

fn blob_digest(spec: &[u8], catalog: &[u8], blob: &[u8]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(spec);
    h.update(catalog);
    h.update(blob);
    h.finalize().into()
}

fn corrupt(what: &str) -> Error {
    Error::Checkpoint(format!("corrupt checkpoint: {what}"))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| corrupt("truncated"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

pub fn save_checkpoint(
    params: &HeadParams,
    head: &HeadSpec,
    backbone: &BackboneSpec,
    catalog: &ClassCatalog,
    path: &Path,
) -> Result<String> {
    let ckpt = Checkpoint {
        head: head.clone(),
        backbone: backbone.clone(),
        catalog: catalog.clone(),
        params: params.clone(),
    };
    let bytes = ckpt.to_bytes()?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    Ok(crate::canonical::sha256_hex(&bytes))
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
}
