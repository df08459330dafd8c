//! Binary parameter checkpoints.
//!
//! ```text
//! offset  size          field
//! 0       8             magic "DLPARAMS"
//! 8       4             format version (u32 LE, currently 1)
//! 12      4             input width  (u32 LE)
//! 16      4             hidden width (u32 LE)
//! 20      4             output width (u32 LE)
//! 24      8·P           f64 LE values: w1 row-major, b1, w2 row-major, b2
//! ```
//!
//! `P = hidden·(input+1) + output·(hidden+1)`.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::{Layout, NetworkParams};

pub const MAGIC: &[u8; 8] = b"DLPARAMS";
pub const VERSION: u32 = 1;

pub fn encode(params: &NetworkParams) -> Vec<u8> {
    let l = params.layout();
    let mut out = Vec::with_capacity(24 + 8 * l.num_params());
    out.extend_from_slice(MAGIC);
    for w in [VERSION, l.input as u32, l.hidden as u32, l.output as u32] {
        out.extend_from_slice(&w.to_le_bytes());
    }
    for v in params.iter() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn bad(msg: &str) -> Error {
    Error::InvalidConfig(format!("checkpoint: {msg}"))
}

pub fn decode(bytes: &[u8]) -> Result<NetworkParams> {
    if bytes.len() < 24 || &bytes[..8] != MAGIC {
        return Err(bad("missing DLPARAMS header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    if word(8) != VERSION as usize {
        return Err(bad("unsupported version"));
    }
    let layout = Layout::new(word(12), word(16), word(20));
    let expected = 24 + 8 * layout.num_params();
    if bytes.len() != expected {
        return Err(Error::TruncatedPayload {
            expected,
            found: bytes.len(),
        });
    }
    let mut params = NetworkParams::zeros(layout);
    let values = bytes[24..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    for (slot, v) in params.slices_mut().into_iter().flatten().zip(values) {
        *slot = v;
    }
    Ok(params)
}

pub fn save(params: &NetworkParams, path: &Path) -> Result<()> {
    fs::write(path, encode(params)).map_err(|e| Error::io(path, e))
}

pub fn load(path: &Path) -> Result<NetworkParams> {
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
