//! The `.inr` model container: a little-endian binary header describing
//! the encoder and layer stack, the flat f64 parameter payload, and a
//! trailing CRC32 over everything before it.

use crate::errors::{CliError, CliResult};
use inrf_core::atom::Atom;
use inrf_core::encoding::{Encoder, FourierEncoder, HashGrid};
use inrf_core::model::{Field, Layer, Mlp};
use inrf_core::matrix::Matrix;

pub const MAGIC: [u8; 4] = *b"INRF";
pub const VERSION: u16 = 1;

const ENC_IDENTITY: u8 = 0;
const ENC_FOURIER: u8 = 1;
const ENC_HASH: u8 = 2;

/// CRC-32 (reflected, polynomial 0xEDB88320), as used by zip and PNG.
pub fn crc32(bytes: &[u8]) -> u32 {
    let mut crc = !0u32;
    for &b in bytes {
        crc ^= b as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xEDB8_8320 & mask);
        }
    }
    !crc
}

struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u16(&mut self, v: u16) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> CliResult<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(CliError::Io(format!("model file truncated at byte {}", self.buf.len())));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> CliResult<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> CliResult<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> CliResult<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> CliResult<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> CliResult<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn write_atom(w: &mut Writer, atom: &Atom) {
    w.u8(atom.id());
    match atom {
        Atom::Relu => {}
        Atom::Sine { omega } | Atom::Finer { omega } | Atom::Sinc { omega } => w.f64(*omega),
        Atom::Gaussian { s } => w.f64(*s),
        Atom::Wire { omega, s } => {
            w.f64(*omega);
            w.f64(*s);
        }
        Atom::Hosc { beta, omega } => {
            w.f64(*beta);
            w.f64(*omega);
        }
        Atom::Rc { omega1, omega2, s } => {
            w.f64(*omega1);
            w.f64(*omega2);
            w.f64(*s);
        }
        Atom::Chebyshev { coeffs } => {
            w.u32(coeffs.len() as u32);
            for &c in coeffs {
                w.f64(c);
            }
        }
    }
}

fn read_atom(r: &mut Reader) -> CliResult<Atom> {
    let id = r.u8()?;
    let atom = match id {
        0 => Atom::Relu,
        1 => Atom::Sine { omega: r.f64()? },
        2 => Atom::Gaussian { s: r.f64()? },
        3 => Atom::Wire { omega: r.f64()?, s: r.f64()? },
        4 => Atom::Finer { omega: r.f64()? },
        5 => Atom::Hosc { beta: r.f64()?, omega: r.f64()? },
        6 => Atom::Sinc { omega: r.f64()? },
        7 => Atom::Rc { omega1: r.f64()?, omega2: r.f64()?, s: r.f64()? },
        8 => {
            let len = r.u32()? as usize;
            let mut coeffs = Vec::with_capacity(len);
            for _ in 0..len {
                coeffs.push(r.f64()?);
            }
            Atom::Chebyshev { coeffs }
        }
        other => return Err(CliError::Io(format!("model file has unknown atom id {other}"))),
    };
    atom.validate().map_err(|e| CliError::Io(format!("model file: {e}")))?;
    Ok(atom)
}

/// Serialize a trained field, parameters and all.
pub fn save_model(field: &Field<f64>) -> Vec<u8> {
    let mut w = Writer(Vec::new());
    w.0.extend_from_slice(&MAGIC);
    w.u16(VERSION);
    w.u32(field.in_dim() as u32);
    w.u32(field.out_dim() as u32);
    match &field.encoder {
        Encoder::Identity { .. } => w.u8(ENC_IDENTITY),
        Encoder::Fourier(f) => {
            w.u8(ENC_FOURIER);
            w.u32(f.b.rows() as u32);
            w.u8(f.trainable as u8);
            for &v in f.b.data() {
                w.f64(v);
            }
        }
        Encoder::Hash(h) => {
            w.u8(ENC_HASH);
            w.u32(h.tables.len() as u32);
            w.u32(h.n0);
            w.f64(h.growth);
            w.u32(h.table_size as u32);
            w.u32(h.features as u32);
        }
    }
    w.u32(field.net.layers.len() as u32);
    for layer in &field.net.layers {
        w.u32(layer.w.rows() as u32);
        w.f64(layer.omega);
        write_atom(&mut w, &layer.atom);
    }
    let mut params = Vec::new();
    field.write_params(&mut params);
    w.u64(params.len() as u64);
    for v in params {
        w.f64(v);
    }
    let crc = crc32(&w.0);
    w.u32(crc);
    w.0
}

/// Rebuild a field from `.inr` bytes, checking the CRC and format version
/// before trusting anything else.
pub fn load_model(bytes: &[u8]) -> CliResult<Field<f64>> {
    if bytes.len() < MAGIC.len() + 2 + 4 {
        return Err(CliError::Io("model file is too short to be valid".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_le_bytes(tail.try_into().unwrap());
    let computed = crc32(body);
    if stored != computed {
        return Err(CliError::Io(format!(
            "model file CRC mismatch (stored {stored:08x}, computed {computed:08x})"
        )));
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(CliError::Io("not a model file (bad magic)".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(CliError::Io(format!(
            "unsupported model format version {version} (expected {VERSION})"
        )));
    }
    let in_dim = r.u32()? as usize;
    let out_dim = r.u32()? as usize;
    if in_dim == 0 || out_dim == 0 {
        return Err(CliError::Io("model file declares a zero dimension".into()));
    }
    let encoder: Encoder<f64> = match r.u8()? {
        ENC_IDENTITY => Encoder::Identity { dim: in_dim },
        ENC_FOURIER => {
            let rows = r.u32()? as usize;
            let trainable = r.u8()? != 0;
            let mut b = Matrix::zeros(rows, in_dim);
            for v in b.data_mut() {
                *v = r.f64()?;
            }
            Encoder::Fourier(FourierEncoder { b, trainable })
        }
        ENC_HASH => {
            let levels = r.u32()? as usize;
            let n0 = r.u32()?;
            let growth = r.f64()?;
            let table_size = r.u32()? as usize;
            let features = r.u32()? as usize;
            if levels == 0 || table_size == 0 || features == 0 {
                return Err(CliError::Io("model file declares an empty hash grid".into()));
            }
            Encoder::Hash(HashGrid {
                dim: in_dim,
                n0,
                growth,
                table_size,
                features,
                tables: vec![Matrix::zeros(table_size, features); levels],
            })
        }
        other => return Err(CliError::Io(format!("model file has unknown encoder tag {other}"))),
    };
    let layer_count = r.u32()? as usize;
    let mut layers: Vec<Layer<f64>> = Vec::with_capacity(layer_count);
    let mut prev = encoder.out_dim();
    for _ in 0..layer_count {
        let width = r.u32()? as usize;
        let omega = r.f64()?;
        let atom = read_atom(&mut r)?;
        if width == 0 || !omega.is_finite() {
            return Err(CliError::Io("model file declares a degenerate layer".into()));
        }
        layers.push(Layer { w: Matrix::zeros(width, prev), b: vec![0.0; width], atom, omega });
        prev = width;
    }
    let net = Mlp { layers, out_w: Matrix::zeros(out_dim, prev), out_b: vec![0.0; out_dim] };
    let mut field = Field { encoder, net };
    let payload_len = r.u64()? as usize;
    if payload_len != field.param_len() {
        return Err(CliError::Io(format!(
            "model file parameter payload holds {payload_len} values, architecture needs {}",
            field.param_len()
        )));
    }
    let mut params = Vec::with_capacity(payload_len);
    for _ in 0..payload_len {
        params.push(r.f64()?);
    }
    if r.pos != body.len() {
        return Err(CliError::Io(format!(
            "model file has {} trailing bytes after the payload",
            body.len() - r.pos
        )));
    }
    field.read_params(&params);
    Ok(field)
}
