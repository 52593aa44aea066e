//! Checkpoint files: magic `HOLAB`, version, architecture descriptor, tensor
//! shapes, then every tensor as little-endian f64 in declaration order.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{NeuralError, Result};
use crate::tensor::Tensor2D;

const MAGIC: &[u8; 5] = b"HOLAB";
const VERSION: u32 = 1;
const MAX_DESCRIPTOR: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub descriptor: String,
    pub tensors: Vec<Tensor2D>,
}

fn format_err(msg: impl Into<String>) -> NeuralError {
    NeuralError::Format(msg.into())
}

impl Checkpoint {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        let desc = self.descriptor.as_bytes();
        w.write_all(&(desc.len() as u32).to_le_bytes())?;
        w.write_all(desc)?;
        w.write_all(&(self.tensors.len() as u32).to_le_bytes())?;
        for t in &self.tensors {
            w.write_all(&(t.rows() as u32).to_le_bytes())?;
            w.write_all(&(t.cols() as u32).to_le_bytes())?;
        }
        for t in &self.tensors {
            if !t.is_finite() {
                return Err(NeuralError::NonFinite("checkpoint tensor"));
            }
            for x in t.as_slice() {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut buf = Vec::new();
        r.read_to_end(&mut buf)?;
        let mut cur = Cursor { buf: &buf, pos: 0 };
        if cur.take(5)? != MAGIC {
            return Err(format_err("bad magic"));
        }
        let version = cur.u32()?;
        if version != VERSION {
            return Err(format_err(format!("unsupported version {version}")));
        }
        let dlen = cur.u32()? as usize;
        if dlen > MAX_DESCRIPTOR {
            return Err(format_err("descriptor too long"));
        }
        let descriptor = String::from_utf8(cur.take(dlen)?.to_vec())
            .map_err(|_| format_err("descriptor is not UTF-8"))?;
        let count = cur.u32()? as usize;
        let mut shapes = Vec::with_capacity(count.min(4096));
        let mut total: usize = 0;
        for _ in 0..count {
            let (rows, cols) = (cur.u32()? as usize, cur.u32()? as usize);
            total = rows
                .checked_mul(cols)
                .and_then(|n| total.checked_add(n))
                .ok_or_else(|| format_err("tensor sizes overflow"))?;
            shapes.push((rows, cols));
        }
        if cur.remaining() != total * 8 {
            return Err(format_err(format!(
                "{} data bytes, shapes imply {}",
                cur.remaining(),
                total * 8
            )));
        }
        let mut tensors = Vec::with_capacity(count);
        for (rows, cols) in shapes {
            let data: Vec<f64> = cur
                .take(rows * cols * 8)?
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect();
            if data.iter().any(|x| !x.is_finite()) {
                return Err(NeuralError::NonFinite("checkpoint tensor"));
            }
            tensors.push(Tensor2D::from_vec(rows, cols, data)?);
        }
        Ok(Checkpoint {
            descriptor,
            tensors,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.remaining() < n {
            return Err(format_err("truncated checkpoint"));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            descriptor: "lstm 84 62,42".into(),
            tensors: vec![
                Tensor2D::from_vec(2, 2, vec![1.0, -0.0, 1e-300, 3.5]).unwrap(),
                Tensor2D::zeros(0, 3),
            ],
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        let back = Checkpoint::read_from(&bytes[..]).unwrap();
        assert_eq!(back.descriptor, "lstm 84 62,42");
        let bits = |c: &Checkpoint| -> Vec<u64> {
            c.tensors
                .iter()
                .flat_map(|t| t.as_slice().iter().map(|x| x.to_bits()))
                .collect()
        };
        assert_eq!(bits(&back), bits(&sample()));
    }

    #[test]
    fn truncation_and_bad_magic_fail() {
        let mut bytes = Vec::new();
        sample().write_to(&mut bytes).unwrap();
        for cut in [0, 4, 12, bytes.len() - 1] {
            assert!(Checkpoint::read_from(&bytes[..cut]).is_err());
        }
        bytes[0] = b'X';
        assert!(Checkpoint::read_from(&bytes[..]).is_err());
    }
}
