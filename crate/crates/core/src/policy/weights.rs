//! `RGPW` policy weight container.
//!
//! ```text
//! magic "RGPW" | u16 version | u32 header_len | header JSON | f32 LE tensors
//! ```
//!
//! The header holds the architecture, the tensor table (name and shape, in
//! storage order) and the SHA-256 of the tensor bytes. Tensor names are
//! `expert.{k}.{layer}.weight`, `expert.{k}.{layer}.bias`,
//! `gate.{layer}.{weight,bias}` and `head.{layer}.{weight,bias}`, with
//! weights stored row-major as `[out, in]`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::moe::{MoEArch, MoEPolicy};
use super::nn::{Linear, Mlp};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RGPW";
const VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorEntry {
    pub name: String,
    pub shape: Vec<usize>,
}

impl TensorEntry {
    pub fn numel(&self) -> usize {
        self.shape.iter().product()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightsHeader {
    pub arch: MoEArch,
    pub tensors: Vec<TensorEntry>,
    pub sha256: String,
}

fn net_tensors(prefix: &str, net: &Mlp, out: &mut Vec<(TensorEntry, Vec<f32>)>) {
    for (i, layer) in net.layers.iter().enumerate() {
        out.push((
            TensorEntry {
                name: format!("{prefix}.{i}.weight"),
                shape: vec![layer.out_dim, layer.in_dim],
            },
            layer.weight.iter().map(|&v| v as f32).collect(),
        ));
        out.push((
            TensorEntry {
                name: format!("{prefix}.{i}.bias"),
                shape: vec![layer.out_dim],
            },
            layer.bias.iter().map(|&v| v as f32).collect(),
        ));
    }
}

fn tensor_list(policy: &MoEPolicy) -> Vec<(TensorEntry, Vec<f32>)> {
    let mut out = Vec::new();
    for (k, e) in policy.experts.iter().enumerate() {
        net_tensors(&format!("expert.{k}"), e, &mut out);
    }
    net_tensors("gate", &policy.gate, &mut out);
    net_tensors("head", &policy.head, &mut out);
    out
}

pub fn to_bytes(policy: &MoEPolicy) -> Result<Vec<u8>> {
    let tensors = tensor_list(policy);
    let mut data = Vec::with_capacity(tensors.iter().map(|(_, d)| d.len() * 4).sum());
    for (_, values) in &tensors {
        for v in values {
            data.extend_from_slice(&v.to_le_bytes());
        }
    }
    let header = WeightsHeader {
        arch: policy.arch.clone(),
        tensors: tensors.into_iter().map(|(e, _)| e).collect(),
        sha256: hex::encode(Sha256::digest(&data)),
    };
    let header = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(10 + header.len() + data.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&data);
    Ok(out)
}

pub fn save(policy: &MoEPolicy, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(&to_bytes(policy)?)?;
    Ok(())
}

pub fn read_header(bytes: &[u8]) -> Result<(WeightsHeader, usize)> {
    if bytes.len() < 10 || &bytes[..4] != MAGIC {
        return Err(Error::format("RGPW", "bad magic"));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::format("RGPW", format!("unsupported version {version}")));
    }
    let len = u32::from_le_bytes(bytes[6..10].try_into().expect("4 bytes")) as usize;
    let end = 10usize.checked_add(len).filter(|&e| e <= bytes.len());
    let end = end.ok_or_else(|| Error::format("RGPW", "truncated header"))?;
    Ok((serde_json::from_slice(&bytes[10..end])?, end))
}

pub fn from_bytes(bytes: &[u8]) -> Result<MoEPolicy> {
    let (header, start) = read_header(bytes)?;
    let data = &bytes[start..];
    if hex::encode(Sha256::digest(data)) != header.sha256 {
        return Err(Error::format("RGPW", "checksum mismatch"));
    }
    let total: usize = header.tensors.iter().map(TensorEntry::numel).sum();
    if data.len() != total * 4 {
        return Err(Error::format("RGPW", format!("expected {} tensor bytes, found {}", total * 4, data.len())));
    }
    let mut tensors = std::collections::HashMap::new();
    let mut offset = 0;
    for entry in &header.tensors {
        let n = entry.numel();
        let values: Vec<f64> = data[offset..offset + 4 * n]
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().expect("4 bytes"))))
            .collect();
        offset += 4 * n;
        tensors.insert(entry.name.clone(), (entry.shape.clone(), values));
    }
    let arch = header.arch;
    let mut take_net = |prefix: &str, dims: &[usize]| -> Result<Mlp> {
        let mut layers = Vec::new();
        for (i, pair) in dims.windows(2).enumerate() {
            let (in_dim, out_dim) = (pair[0], pair[1]);
            let mut get = |suffix: &str, shape: Vec<usize>| -> Result<Vec<f64>> {
                let name = format!("{prefix}.{i}.{suffix}");
                let (found, values) = tensors.remove(&name).ok_or_else(|| Error::format("RGPW", format!("missing tensor {name}")))?;
                if found != shape {
                    return Err(Error::Shape {
                        what: name,
                        expected: format!("{shape:?}"),
                        found: format!("{found:?}"),
                    });
                }
                Ok(values)
            };
            let w = get("weight", vec![out_dim, in_dim])?;
            let b = get("bias", vec![out_dim])?;
            layers.push(Linear::new(in_dim, out_dim, w, b)?);
        }
        Mlp::new(layers, arch.activation)
    };
    let experts = (0..arch.num_experts)
        .map(|k| take_net(&format!("expert.{k}"), &arch.expert_dims()))
        .collect::<Result<Vec<_>>>()?;
    let gate = take_net("gate", &arch.gate_dims())?;
    let head = take_net("head", &arch.head_dims())?;
    if let Some(extra) = tensors.keys().next() {
        return Err(Error::format("RGPW", format!("unexpected tensor {extra}")));
    }
    MoEPolicy::new(arch, experts, gate, head)
}

pub fn load(path: &Path) -> Result<MoEPolicy> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    from_bytes(&bytes)
}
