//! Debug dump of θ: one JSON header line, then the flat parameters as
//! little-endian f64.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{DecoderConfig, DecoderParams};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub config: DecoderConfig,
    pub seed: u64,
    pub step: u64,
    pub len: usize,
}

pub fn write_checkpoint<W: Write>(
    mut out: W,
    config: &DecoderConfig,
    seed: u64,
    step: u64,
    params: &DecoderParams,
) -> std::io::Result<()> {
    let header = CheckpointHeader { config: config.clone(), seed, step, len: params.len() };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for v in params.as_flat() {
        out.write_all(&v.to_le_bytes())?;
    }
    out.flush()
}

pub fn read_checkpoint<R: BufRead>(mut input: R) -> Result<(CheckpointHeader, DecoderParams)> {
    let mut line = String::new();
    input.read_line(&mut line).map_err(|e| invalid(format!("checkpoint read: {e}")))?;
    let header: CheckpointHeader =
        serde_json::from_str(line.trim_end()).map_err(|e| invalid(format!("checkpoint header: {e}")))?;
    let mut bytes = vec![0u8; header.len * 8];
    input.read_exact(&mut bytes).map_err(|e| invalid(format!("checkpoint body: {e}")))?;
    let theta: Vec<f64> =
        bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes"))).collect();
    let params = DecoderParams::from_flat(&header.config, &theta)?;
    Ok((header, params))
}

#[cfg(test)]
mod tests {
    use super::super::init_params;
    use super::*;

    #[test]
    fn roundtrip() {
        let cfg = DecoderConfig::for_image(8, 8, vec![3, 4]).unwrap();
        let p = init_params(&cfg, 2);
        let mut buf = Vec::new();
        write_checkpoint(&mut buf, &cfg, 2, 17, &p).unwrap();
        let (h, q) = read_checkpoint(&buf[..]).unwrap();
        assert_eq!((h.seed, h.step), (2, 17));
        assert_eq!(q, p);
        assert!(read_checkpoint(&buf[..buf.len() - 3]).is_err());
    }
}
