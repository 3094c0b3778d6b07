//! Versioned little-endian binary container for trained models.
//!
//! Layout: `b"GLAD"`, `u16` format version, `u8` blob kind, then the
//! kind-specific body. Floats are stored as raw IEEE-754 bits so a
//! save/load cycle is bit-exact.

use std::io::Cursor;
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use ndarray::{Array1, Array2};

use crate::error::{GladError, Result};

pub const MAGIC: [u8; 4] = *b"GLAD";
pub const FORMAT_VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum BlobKind {
    PvDm = 1,
    NodeEncoder = 2,
    Autoencoder = 3,
    OvrSvm = 4,
    PurposeModel = 5,
    Bundle = 6,
    Detector = 7,
}

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.write_u32::<LittleEndian>(v).unwrap();
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.write_u64::<LittleEndian>(v).unwrap();
    }

    pub fn usize(&mut self, v: usize) {
        self.u64(v as u64);
    }

    pub fn f64(&mut self, v: f64) {
        self.buf.write_u64::<LittleEndian>(v.to_bits()).unwrap();
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.usize(b.len());
        self.buf.extend_from_slice(b);
    }

    pub fn str(&mut self, s: &str) {
        self.bytes(s.as_bytes());
    }

    pub fn f64s(&mut self, v: &[f64]) {
        self.usize(v.len());
        for &x in v {
            self.f64(x);
        }
    }

    pub fn vector(&mut self, v: &Array1<f64>) {
        self.usize(v.len());
        for &x in v {
            self.f64(x);
        }
    }

    pub fn matrix(&mut self, m: &Array2<f64>) {
        self.usize(m.nrows());
        self.usize(m.ncols());
        for &x in m.iter() {
            self.f64(x);
        }
    }
}

pub struct Reader<'a> {
    cur: Cursor<&'a [u8]>,
}

fn truncated(e: std::io::Error) -> GladError {
    GladError::Format(format!("truncated input: {e}"))
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader {
            cur: Cursor::new(buf),
        }
    }

    pub fn u8(&mut self) -> Result<u8> {
        self.cur.read_u8().map_err(truncated)
    }

    pub fn u32(&mut self) -> Result<u32> {
        self.cur.read_u32::<LittleEndian>().map_err(truncated)
    }

    pub fn u64(&mut self) -> Result<u64> {
        self.cur.read_u64::<LittleEndian>().map_err(truncated)
    }

    pub fn usize(&mut self) -> Result<usize> {
        let v = self.u64()?;
        let remaining = self.remaining() as u64;
        // lengths larger than the input are corrupt and would over-allocate
        if v > remaining.saturating_mul(8).max(1 << 20) {
            return Err(GladError::Format(format!("implausible length {v}")));
        }
        Ok(v as usize)
    }

    pub fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }

    pub fn bytes(&mut self) -> Result<Vec<u8>> {
        let n = self.usize()?;
        let start = self.cur.position() as usize;
        let buf = *self.cur.get_ref();
        if start + n > buf.len() {
            return Err(GladError::Format("truncated byte block".into()));
        }
        self.cur.set_position((start + n) as u64);
        Ok(buf[start..start + n].to_vec())
    }

    pub fn str(&mut self) -> Result<String> {
        String::from_utf8(self.bytes()?).map_err(|e| GladError::Format(e.to_string()))
    }

    pub fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.usize()?;
        (0..n).map(|_| self.f64()).collect()
    }

    pub fn vector(&mut self) -> Result<Array1<f64>> {
        Ok(Array1::from(self.f64s()?))
    }

    pub fn matrix(&mut self) -> Result<Array2<f64>> {
        let r = self.usize()?;
        let c = self.usize()?;
        let data: Vec<f64> = (0..r * c).map(|_| self.f64()).collect::<Result<_>>()?;
        Array2::from_shape_vec((r, c), data).map_err(|e| GladError::Format(e.to_string()))
    }

    fn remaining(&self) -> usize {
        self.cur.get_ref().len() - self.cur.position() as usize
    }

    pub fn finish(self) -> Result<()> {
        if self.remaining() != 0 {
            return Err(GladError::Format(format!(
                "{} trailing bytes",
                self.remaining()
            )));
        }
        Ok(())
    }
}

/// A model that can live in the container.
pub trait Blob: Sized {
    const KIND: BlobKind;

    fn write_body(&self, w: &mut Writer);

    fn read_body(r: &mut Reader<'_>) -> Result<Self>;

    fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.buf.extend_from_slice(&MAGIC);
        w.buf.write_u16::<LittleEndian>(FORMAT_VERSION).unwrap();
        w.u8(Self::KIND as u8);
        self.write_body(&mut w);
        w.into_bytes()
    }

    fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 7 || bytes[..4] != MAGIC {
            return Err(GladError::Format("missing GLAD magic".into()));
        }
        let mut r = Reader::new(&bytes[4..]);
        let version = r.cur.read_u16::<LittleEndian>().map_err(truncated)?;
        if version != FORMAT_VERSION {
            return Err(GladError::Format(format!(
                "unsupported format version {version}"
            )));
        }
        let kind = r.u8()?;
        if kind != Self::KIND as u8 {
            return Err(GladError::Format(format!(
                "expected blob kind {}, found {kind}",
                Self::KIND as u8
            )));
        }
        let v = Self::read_body(&mut r)?;
        r.finish()?;
        Ok(v)
    }

    fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Probe(Array2<f64>, String);

    impl Blob for Probe {
        const KIND: BlobKind = BlobKind::Autoencoder;
        fn write_body(&self, w: &mut Writer) {
            w.matrix(&self.0);
            w.str(&self.1);
        }
        fn read_body(r: &mut Reader<'_>) -> Result<Self> {
            Ok(Probe(r.matrix()?, r.str()?))
        }
    }

    #[test]
    fn roundtrip_is_bit_exact() {
        let m = Array2::from_shape_vec((2, 2), vec![0.1, -0.0, f64::MIN_POSITIVE, 1e300]).unwrap();
        let p = Probe(m.clone(), "hé".into());
        let back = Probe::from_bytes(&p.to_bytes()).unwrap();
        for (a, b) in back.0.iter().zip(m.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.1, "hé");
    }

    #[test]
    fn rejects_wrong_kind_and_garbage() {
        let p = Probe(Array2::zeros((1, 1)), String::new());
        let mut bytes = p.to_bytes();
        bytes[6] = BlobKind::PvDm as u8;
        assert!(Probe::from_bytes(&bytes).is_err());
        assert!(Probe::from_bytes(b"nope").is_err());
        let mut long = p.to_bytes();
        long.push(0);
        assert!(Probe::from_bytes(&long).is_err());
    }
}
