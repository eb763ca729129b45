//! Binary parameter container.
//!
//! Layout: magic bytes `OCCF`, format version (u32 LE), layer count
//! (u32 LE); then per layer a length-prefixed JSON `LayerSpec` followed by
//! its raw little-endian f64 parameter blocks, weights first, then bias if
//! the spec declares one. Round-trips are bit-exact.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::layer::LayerSpec;
use crate::network::Network;

pub const MAGIC: &[u8; 4] = b"OCCF";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_network<W: Write>(net: &Network, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    let layers = net.layers();
    w.write_all(&(layers.len() as u32).to_le_bytes())?;
    for layer in layers {
        let spec_json = serde_json::to_vec(layer.spec())
            .map_err(|e| Error::Format(format!("layer spec encode: {e}")))?;
        w.write_all(&(spec_json.len() as u32).to_le_bytes())?;
        w.write_all(&spec_json)?;
        if let Some(weights) = layer.weights() {
            write_f64_block(&mut w, weights.data())?;
        }
        if let Some(bias) = layer.bias() {
            write_f64_block(&mut w, bias.data())?;
        }
    }
    Ok(())
}

/// Reads the container back as `(spec, weights, bias)` records. The caller
/// supplies the input shape when rebuilding a `Network`; the container
/// itself only describes layers.
pub fn read_records<R: Read>(mut r: R) -> Result<Vec<(LayerSpec, Option<Vec<f64>>, Option<Vec<f64>>)>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!(
            "bad magic {:?}, expected {:?}",
            magic, MAGIC
        )));
    }
    let version = read_u32(&mut r)?;
    if version != FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported format version {version}"
        )));
    }
    let count = read_u32(&mut r)? as usize;
    let mut records = Vec::with_capacity(count);
    for i in 0..count {
        let spec_len = read_u32(&mut r)? as usize;
        let mut spec_json = vec![0u8; spec_len];
        r.read_exact(&mut spec_json)?;
        let spec: LayerSpec = serde_json::from_slice(&spec_json)
            .map_err(|e| Error::Format(format!("layer {i} spec decode: {e}")))?;
        let weights = match spec.weight_len() {
            0 => None,
            n => Some(read_f64_block(&mut r, n)?),
        };
        let bias = match spec.bias_len() {
            0 => None,
            n => Some(read_f64_block(&mut r, n)?),
        };
        records.push((spec, weights, bias));
    }
    Ok(records)
}

pub fn read_network<R: Read>(r: R, input_shape: &[usize]) -> Result<Network> {
    Network::from_params(input_shape, read_records(r)?)
}

fn write_f64_block<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

fn read_f64_block<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ActivationName;

    #[test]
    fn rejects_bad_magic_and_version() {
        let err = read_records(&b"NOPE\x01\x00\x00\x00\x00\x00\x00\x00"[..]).unwrap_err();
        assert!(err.to_string().contains("magic"));
        let err = read_records(&b"OCCF\x07\x00\x00\x00\x00\x00\x00\x00"[..]).unwrap_err();
        assert!(err.to_string().contains("version"));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let specs = vec![LayerSpec::Dense { in_dim: 2, out_dim: 2, bias: true }];
        let net = Network::new(&[2], specs, 1).unwrap();
        let mut bytes = Vec::new();
        write_network(&net, &mut bytes).unwrap();
        bytes.truncate(bytes.len() - 5);
        assert!(read_records(&bytes[..]).is_err());
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let specs = vec![
            LayerSpec::Conv2d { in_channels: 2, kernels: 3, kernel_size: 3, stride: 1, bias: true },
            LayerSpec::Activation { name: ActivationName::Relu, alpha: None },
            LayerSpec::MaxPool2d { window: 2, stride: 2 },
            LayerSpec::Flatten,
            LayerSpec::Dense { in_dim: 12, out_dim: 1, bias: false },
            LayerSpec::Activation { name: ActivationName::Sigmoid, alpha: None },
        ];
        let net = Network::new(&[4, 4, 2], specs, 42).unwrap();
        let mut bytes = Vec::new();
        write_network(&net, &mut bytes).unwrap();
        let back = read_network(&bytes[..], &[4, 4, 2]).unwrap();
        assert_eq!(net.specs(), back.specs());
        let a = net.flat_params();
        let b = back.flat_params();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
}
