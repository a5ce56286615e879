//! Self-describing share files.
//!
//! ```text
//! "CRGC" | version u8 | p u64 | m u8 | modulus (m bytes, absent if m = 1)
//! | n u16 | k u16 | r u16 | node_index u16 | stripe_count u64 | original_length u64
//! | evaluation points (n symbols) | payload (stripe-major, column in row order)
//! | CRC-32 of everything before it (u32)
//! ```
//!
//! All integers are big-endian. Modulus bytes list the lower coefficients of
//! the monic irreducible from `x^(m-1)` down to the constant term.

use super::{CodeParams, MscrError, NodeShare};
use crate::galois::{Field, FieldSpec};

pub const SHARE_MAGIC: &[u8; 4] = b"CRGC";
pub const SHARE_VERSION: u8 = 1;

fn u16_field(value: usize, what: &str) -> Result<[u8; 2], MscrError> {
    u16::try_from(value)
        .map(u16::to_be_bytes)
        .map_err(|_| MscrError::HeaderRange(format!("{what} = {value}")))
}

pub fn write_share(params: &CodeParams, share: &NodeShare) -> Result<Vec<u8>, MscrError> {
    let field = params.field();
    let spec = field.spec();
    let width = field.symbol_width();
    let mut out = Vec::with_capacity(64 + (params.n() + share.symbols().len()) * width);
    out.extend_from_slice(SHARE_MAGIC);
    out.push(SHARE_VERSION);
    out.extend_from_slice(&spec.characteristic().to_be_bytes());
    let m = u8::try_from(spec.degree())
        .map_err(|_| MscrError::HeaderRange(format!("m = {}", spec.degree())))?;
    out.push(m);
    for &c in spec.irreducible().iter().rev() {
        out.push(
            u8::try_from(c)
                .map_err(|_| MscrError::HeaderRange(format!("modulus coefficient {c}")))?,
        );
    }
    out.extend_from_slice(&u16_field(params.n(), "n")?);
    out.extend_from_slice(&u16_field(params.k(), "k")?);
    out.extend_from_slice(&u16_field(params.r(), "r")?);
    out.extend_from_slice(&u16_field(share.node_index(), "node_index")?);
    out.extend_from_slice(&(share.stripe_count() as u64).to_be_bytes());
    out.extend_from_slice(&share.original_length().to_be_bytes());
    for &a in params.points() {
        field.write_symbol(a, &mut out);
    }
    for &s in share.symbols() {
        field.write_symbol(s, &mut out);
    }
    let crc = crc32fast::hash(&out);
    out.extend_from_slice(&crc.to_be_bytes());
    Ok(out)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], MscrError> {
        let end = self.pos.checked_add(len).ok_or(MscrError::Truncated)?;
        let slice = self.bytes.get(self.pos..end).ok_or(MscrError::Truncated)?;
        self.pos = end;
        Ok(slice)
    }

    fn u8(&mut self) -> Result<u8, MscrError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<usize, MscrError> {
        Ok(u16::from_be_bytes(self.take(2)?.try_into().unwrap()) as usize)
    }

    fn u64(&mut self) -> Result<u64, MscrError> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Parses and verifies a share file, returning the code it belongs to and its contents.
pub fn read_share(bytes: &[u8]) -> Result<(CodeParams, NodeShare), MscrError> {
    if bytes.len() < 4 {
        return Err(MscrError::Truncated);
    }
    if &bytes[..4] != SHARE_MAGIC {
        return Err(MscrError::BadMagic);
    }
    if bytes.len() < 9 {
        return Err(MscrError::Truncated);
    }
    let (body, tail) = bytes.split_at(bytes.len() - 4);
    let stored = u32::from_be_bytes(tail.try_into().unwrap());
    let computed = crc32fast::hash(body);
    if stored != computed {
        return Err(MscrError::CrcMismatch { stored, computed });
    }
    let mut cur = Cursor {
        bytes: body,
        pos: 4,
    };
    let version = cur.u8()?;
    if version != SHARE_VERSION {
        return Err(MscrError::UnsupportedVersion(version));
    }
    let p = cur.u64()?;
    let m = cur.u8()? as u32;
    let mut modulus = Vec::new();
    if m > 1 {
        modulus = cur
            .take(m as usize)?
            .iter()
            .rev()
            .map(|&b| b as u64)
            .collect();
    }
    let field = Field::new(FieldSpec::new(p, m, modulus)?);
    let n = cur.u16()?;
    let k = cur.u16()?;
    let r = cur.u16()?;
    let node = cur.u16()?;
    let stripe_count = cur.u64()?;
    let original_length = cur.u64()?;
    let width = field.symbol_width();
    let points = (0..n)
        .map(|_| field.read_symbol(cur.take(width)?).map_err(MscrError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let params = CodeParams::with_points(n, k, r, field.clone(), points)?;
    params.check_node(node)?;
    let count = (stripe_count as usize)
        .checked_mul(r)
        .ok_or(MscrError::Truncated)?;
    if body.len() - cur.pos != count.checked_mul(width).ok_or(MscrError::Truncated)? {
        return Err(MscrError::Truncated);
    }
    let symbols = (0..count)
        .map(|_| field.read_symbol(cur.take(width)?).map_err(MscrError::from))
        .collect::<Result<Vec<_>, _>>()?;
    let share = NodeShare::new(node, r, original_length, symbols)?;
    Ok((params, share))
}
