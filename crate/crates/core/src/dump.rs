//! Layout-independent lattice dumps.
//!
//! A dump is a 32-byte header followed by `lx * ly * npop` little-endian
//! `f64` values in canonical order, index `(p * lx + x) * ly + y`. The header
//! holds the 8-byte magic `D2Q37LAT` and then `lx`, `ly`, `npop` as
//! little-endian `u64`.

use std::io::{self, Read, Write};

pub const MAGIC: [u8; 8] = *b"D2Q37LAT";
pub const HEADER_LEN: usize = 32;

#[derive(Debug, thiserror::Error)]
pub enum DumpError {
    #[error("bad magic {0:?}")]
    BadMagic([u8; 8]),
    #[error("header says {want} values, got {got}")]
    Length { want: usize, got: usize },
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeDump {
    pub lx: usize,
    pub ly: usize,
    pub npop: usize,
    pub data: Vec<f64>,
}

impl LatticeDump {
    pub fn new(lx: usize, ly: usize, npop: usize, data: Vec<f64>) -> Result<Self, DumpError> {
        let want = lx * ly * npop;
        if data.len() != want {
            return Err(DumpError::Length {
                want,
                got: data.len(),
            });
        }
        Ok(Self { lx, ly, npop, data })
    }

    pub fn write_to(&self, mut out: impl Write) -> Result<(), DumpError> {
        let mut header = [0u8; HEADER_LEN];
        header[..8].copy_from_slice(&MAGIC);
        header[8..16].copy_from_slice(&(self.lx as u64).to_le_bytes());
        header[16..24].copy_from_slice(&(self.ly as u64).to_le_bytes());
        header[24..32].copy_from_slice(&(self.npop as u64).to_le_bytes());
        out.write_all(&header)?;
        let mut bytes = Vec::with_capacity(self.data.len() * 8);
        for v in &self.data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        out.write_all(&bytes)?;
        Ok(())
    }

    pub fn read_from(mut input: impl Read) -> Result<Self, DumpError> {
        let mut header = [0u8; HEADER_LEN];
        input.read_exact(&mut header)?;
        let magic: [u8; 8] = header[..8].try_into().unwrap();
        if magic != MAGIC {
            return Err(DumpError::BadMagic(magic));
        }
        let field =
            |r: std::ops::Range<usize>| u64::from_le_bytes(header[r].try_into().unwrap()) as usize;
        let (lx, ly, npop) = (field(8..16), field(16..24), field(24..32));
        let want = lx * ly * npop;
        let mut bytes = Vec::new();
        input.read_to_end(&mut bytes)?;
        if bytes.len() != want * 8 {
            return Err(DumpError::Length {
                want,
                got: bytes.len() / 8,
            });
        }
        let data = bytes
            .chunks_exact(8)
            .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Ok(Self { lx, ly, npop, data })
    }
}
