//! Architecture descriptors and checkpoint conversion.
//!
//! Descriptor format: `<kind> key=value ... norm=<0|1>`. When `norm=1` the
//! last two tensors are the per-feature normalizer minimum and maximum.

use std::collections::BTreeMap;
use std::path::Path;

use holab_core::dataset::NormalizationSpec;
use holab_core::NUM_FEATURES;
use holab_neural::{Checkpoint, Params, Tensor2D};

use crate::error::{ModelError, Result};

pub type Fields = BTreeMap<String, String>;

pub trait Architecture: Params + Sized {
    const KIND: &'static str;

    /// `key=value` tokens describing the shapes.
    fn fields(&self) -> Vec<(&'static str, String)>;

    /// A model of the described architecture with arbitrary weights.
    fn blank(fields: &Fields) -> Result<Self>;
}

fn mismatch(msg: impl Into<String>) -> ModelError {
    ModelError::Checkpoint(msg.into())
}

pub fn field<'a>(fields: &'a Fields, key: &str) -> Result<&'a str> {
    fields
        .get(key)
        .map(String::as_str)
        .ok_or_else(|| mismatch(format!("descriptor lacks `{key}`")))
}

pub fn parse_usize(fields: &Fields, key: &str) -> Result<usize> {
    field(fields, key)?
        .parse()
        .map_err(|_| mismatch(format!("`{key}` is not a count")))
}

/// Comma-separated layer widths; an empty value is an empty list.
pub fn parse_widths(fields: &Fields, key: &str) -> Result<Vec<usize>> {
    let v = field(fields, key)?;
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| {
            s.parse()
                .map_err(|_| mismatch(format!("`{key}` holds a bad width {s:?}")))
        })
        .collect()
}

pub fn widths(w: &[usize]) -> String {
    w.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

pub fn descriptor<M: Architecture>(model: &M, with_norm: bool) -> String {
    let mut s = M::KIND.to_string();
    for (k, v) in model.fields() {
        s.push_str(&format!(" {k}={v}"));
    }
    s.push_str(if with_norm { " norm=1" } else { " norm=0" });
    s
}

pub fn to_checkpoint<M: Architecture>(
    model: &M,
    norm: Option<&NormalizationSpec>,
) -> Result<Checkpoint> {
    let mut tensors: Vec<Tensor2D> = model.tensors().into_iter().cloned().collect();
    if let Some(n) = norm {
        tensors.push(Tensor2D::from_vec(1, NUM_FEATURES, n.min.clone())?);
        tensors.push(Tensor2D::from_vec(1, NUM_FEATURES, n.max.clone())?);
    }
    Ok(Checkpoint {
        descriptor: descriptor(model, norm.is_some()),
        tensors,
    })
}

pub fn from_checkpoint<M: Architecture>(ck: Checkpoint) -> Result<(M, Option<NormalizationSpec>)> {
    let mut tokens = ck.descriptor.split_whitespace();
    let kind = tokens.next().unwrap_or_default();
    if kind != M::KIND {
        return Err(mismatch(format!(
            "checkpoint holds `{kind}`, expected `{}`",
            M::KIND
        )));
    }
    let mut fields = Fields::new();
    for tok in tokens {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| mismatch(format!("bad descriptor token {tok:?}")))?;
        fields.insert(k.to_string(), v.to_string());
    }
    let with_norm = match field(&fields, "norm")? {
        "0" => false,
        "1" => true,
        other => return Err(mismatch(format!("bad norm flag {other:?}"))),
    };
    let mut model = M::blank(&fields)?;
    let mut tensors = ck.tensors;
    let norm = if with_norm {
        if tensors.len() < 2 {
            return Err(mismatch("normalizer tensors missing"));
        }
        let max = tensors.pop().unwrap();
        let min = tensors.pop().unwrap();
        Some(NormalizationSpec::from_parts(
            min.into_vec(),
            max.into_vec(),
        )?)
    } else {
        None
    };
    let slots = model.tensors_mut();
    if slots.len() != tensors.len() {
        return Err(mismatch(format!(
            "architecture has {} tensors, checkpoint {}",
            slots.len(),
            tensors.len()
        )));
    }
    for (i, (slot, t)) in slots.into_iter().zip(tensors).enumerate() {
        if slot.shape() != t.shape() {
            return Err(mismatch(format!(
                "tensor {i} has shape {:?}, expected {:?}",
                t.shape(),
                slot.shape()
            )));
        }
        *slot = t;
    }
    Ok((model, norm))
}

pub fn save_model<M: Architecture>(
    model: &M,
    norm: Option<&NormalizationSpec>,
    path: &Path,
) -> Result<()> {
    Ok(to_checkpoint(model, norm)?.save(path)?)
}

pub fn load_model<M: Architecture>(path: &Path) -> Result<(M, Option<NormalizationSpec>)> {
    from_checkpoint(Checkpoint::load(path)?)
}
