//! Binary checkpoint container, versioned by the magic header "HKGE1".
//!
//! Layout (little endian): magic, model config (variant code, dimension,
//! init scale, seed), entity/relation vocab hashes, vocab sizes, then each
//! named parameter tensor as raw f64 data.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{ModelConfig, ModelParams, ModelVariant, TENSOR_COUNT, TENSOR_NAMES};

pub const MAGIC: &[u8; 5] = b"HKGE1";

/// A checkpoint pairs the trained parameters with hashes of the vocabularies
/// they were trained against.
#[derive(Debug, Clone)]
pub struct Checkpoint {
    pub params: ModelParams,
    pub entity_vocab_hash: u64,
    pub relation_vocab_hash: u64,
}

pub fn save(
    path: &Path,
    params: &ModelParams,
    entity_vocab_hash: u64,
    relation_vocab_hash: u64,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&[params.config.variant.code()])?;
    w.write_all(&(params.config.dim as u32).to_le_bytes())?;
    w.write_all(&params.config.init_scale.to_le_bytes())?;
    w.write_all(&params.config.seed.to_le_bytes())?;
    w.write_all(&entity_vocab_hash.to_le_bytes())?;
    w.write_all(&relation_vocab_hash.to_le_bytes())?;
    w.write_all(&(params.n_entities as u64).to_le_bytes())?;
    w.write_all(&(params.n_relations as u64).to_le_bytes())?;
    w.write_all(&(TENSOR_COUNT as u32).to_le_bytes())?;
    for (idx, name) in TENSOR_NAMES.iter().enumerate() {
        let data = params.tensor(idx);
        w.write_all(&(name.len() as u16).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(data.len() as u64).to_le_bytes())?;
        for v in data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

fn read_exact<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|_| Error::Checkpoint("truncated checkpoint file".into()))?;
    Ok(buf)
}

pub fn load(path: &Path) -> Result<Checkpoint> {
    let mut r = BufReader::new(File::open(path)?);
    let magic: [u8; 5] = read_exact(&mut r)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic header {magic:?}; not an HKGE1 checkpoint"
        )));
    }
    let variant = ModelVariant::from_code(read_exact::<1>(&mut r)?[0])?;
    let dim = u32::from_le_bytes(read_exact(&mut r)?) as usize;
    let init_scale = f64::from_le_bytes(read_exact(&mut r)?);
    let seed = u64::from_le_bytes(read_exact(&mut r)?);
    let entity_vocab_hash = u64::from_le_bytes(read_exact(&mut r)?);
    let relation_vocab_hash = u64::from_le_bytes(read_exact(&mut r)?);
    let n_entities = u64::from_le_bytes(read_exact(&mut r)?) as usize;
    let n_relations = u64::from_le_bytes(read_exact(&mut r)?) as usize;
    let tensor_count = u32::from_le_bytes(read_exact(&mut r)?) as usize;
    if tensor_count != TENSOR_COUNT {
        return Err(Error::Checkpoint(format!(
            "expected {TENSOR_COUNT} tensors, found {tensor_count}"
        )));
    }

    let mut tensors: [Vec<f64>; TENSOR_COUNT] = Default::default();
    for (idx, expected_name) in TENSOR_NAMES.iter().enumerate() {
        let name_len = u16::from_le_bytes(read_exact(&mut r)?) as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)
            .map_err(|_| Error::Checkpoint("truncated tensor name".into()))?;
        let name = String::from_utf8(name)
            .map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?;
        if name != *expected_name {
            return Err(Error::Checkpoint(format!(
                "tensor {idx} is '{name}', expected '{expected_name}'"
            )));
        }
        let count = u64::from_le_bytes(read_exact(&mut r)?) as usize;
        let mut data = Vec::with_capacity(count);
        for _ in 0..count {
            data.push(f64::from_le_bytes(read_exact(&mut r)?));
        }
        tensors[idx] = data;
    }

    let config = ModelConfig {
        variant,
        dim,
        init_scale,
        seed,
    };
    let params = ModelParams::from_tensors(config, n_entities, n_relations, tensors)?;
    Ok(Checkpoint {
        params,
        entity_vocab_hash,
        relation_vocab_hash,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_preserves_every_bit() {
        let config = ModelConfig {
            variant: ModelVariant::FftAttH,
            dim: 8,
            init_scale: 1e-3,
            seed: 77,
        };
        let params = ModelParams::init(6, 4, &config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save(&path, &params, 0xabcdef, 0x123456).unwrap();
        let loaded = load(&path).unwrap();
        assert_eq!(loaded.entity_vocab_hash, 0xabcdef);
        assert_eq!(loaded.relation_vocab_hash, 0x123456);
        assert_eq!(loaded.params.config, params.config);
        for t in 0..TENSOR_COUNT {
            let (a, b) = (params.tensor(t), loaded.params.tensor(t));
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(b) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn corrupt_header_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.ckpt");
        std::fs::write(&path, b"NOTAMODEL").unwrap();
        assert!(matches!(load(&path), Err(Error::Checkpoint(_))));
    }
}
