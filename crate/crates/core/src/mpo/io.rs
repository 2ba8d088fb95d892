//! Versioned little-endian container for MPOs.
//!
//! | bytes          | content                                            |
//! |----------------|----------------------------------------------------|
//! | 8              | magic `LRMPO\0\0\0`                                |
//! | 4              | format version (`u32`)                             |
//! | 4              | `n` (`u32`)                                        |
//! | 4              | `d` (`u32`)                                        |
//! | 1 + 3          | scalar field (`0` real, `1` complex) and padding   |
//! | 8 (n + 1)      | bond profile (`u64`)                               |
//! | 8 (n + 1)      | bond ledger, natural log (`f64`)                   |
//! | 16 Σ cores     | `(re, im)` pairs, row-major `(left, out, in, right)` |
//!
//! Real MPOs still store both parts; the flag only records that every
//! imaginary part is zero.

use std::io::{Read, Write};

use super::Mpo;
use crate::error::{Error, Result};
use crate::C64;

pub const MAGIC: [u8; 8] = *b"LRMPO\0\0\0";
pub const VERSION: u32 = 1;

const MAX_SITES: usize = 1 << 16;
const MAX_BOND: usize = 1 << 20;

pub fn write_mpo(mpo: &Mpo, w: &mut impl Write) -> Result<()> {
    let real = mpo.cores.iter().flatten().all(|x| x.im == 0.0);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(mpo.n() as u32).to_le_bytes())?;
    w.write_all(&(mpo.d as u32).to_le_bytes())?;
    w.write_all(&[u8::from(!real), 0, 0, 0])?;
    for &b in &mpo.bonds {
        w.write_all(&(b as u64).to_le_bytes())?;
    }
    for &l in &mpo.ledger {
        w.write_all(&l.to_le_bytes())?;
    }
    let mut buf = Vec::new();
    for core in &mpo.cores {
        buf.clear();
        for x in core {
            buf.extend_from_slice(&x.re.to_le_bytes());
            buf.extend_from_slice(&x.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)
        .map_err(|e| Error::Format(format!("truncated MPO container: {e}")))?;
    Ok(b)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    Ok(u32::from_le_bytes(read_array(r)?))
}

fn read_u64(r: &mut impl Read) -> Result<u64> {
    Ok(u64::from_le_bytes(read_array(r)?))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array(r)?))
}

/// Reads one container and rejects trailing bytes.
pub fn read_mpo(r: &mut impl Read) -> Result<Mpo> {
    if read_array::<8>(r)? != MAGIC {
        return Err(Error::Format("not an MPO container (bad magic)".into()));
    }
    let version = read_u32(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported container version {version}")));
    }
    let n = read_u32(r)? as usize;
    let d = read_u32(r)? as usize;
    if n == 0 || n > MAX_SITES || !(2..=8).contains(&d) {
        return Err(Error::Format(format!("implausible header n = {n}, d = {d}")));
    }
    let [flag, ..] = read_array::<4>(r)?;
    if flag > 1 {
        return Err(Error::Format(format!("unknown scalar flag {flag}")));
    }
    let bonds = (0..=n)
        .map(|_| {
            let b = read_u64(r)? as usize;
            if b == 0 || b > MAX_BOND {
                return Err(Error::Format(format!("implausible bond {b}")));
            }
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    let ledger = (0..=n).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    let mut cores = Vec::with_capacity(n);
    for s in 0..n {
        let len = bonds[s] * d * d * bonds[s + 1];
        let mut raw = vec![0u8; len * 16];
        r.read_exact(&mut raw)
            .map_err(|e| Error::Format(format!("truncated core {s}: {e}")))?;
        let core: Vec<C64> = raw
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        if flag == 0 && core.iter().any(|x| x.im != 0.0) {
            return Err(Error::Format("real container holds imaginary parts".into()));
        }
        cores.push(core);
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after MPO container".into()));
    }
    Mpo::with_ledger(d, bonds, cores, ledger).map_err(|e| Error::Format(e.to_string()))
}

impl Mpo {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        write_mpo(self, &mut out).expect("writing to memory cannot fail");
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Mpo> {
        read_mpo(&mut &bytes[..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip_is_bit_exact() {
        let a = Mpo::random(5, 3, 4, &mut ChaCha8Rng::seed_from_u64(1));
        let bytes = a.to_bytes();
        let b = Mpo::from_bytes(&bytes).unwrap();
        assert_eq!(b.bonds(), a.bonds());
        for s in 0..a.n() {
            let bits = |m: &Mpo| m.core(s).iter().map(|x| (x.re.to_bits(), x.im.to_bits())).collect::<Vec<_>>();
            assert_eq!(bits(&a), bits(&b));
        }
        assert_eq!(b.to_bytes(), bytes);
    }

    #[test]
    fn header_layout() {
        let bytes = Mpo::identity(2, 2).to_bytes();
        assert_eq!(&bytes[..8], b"LRMPO\0\0\0");
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(bytes[12..16].try_into().unwrap()), 2);
        assert_eq!(bytes[20], 0);
        assert_eq!(bytes.len(), 24 + 3 * 8 * 2 + 2 * 4 * 16);
    }

    #[test]
    fn rejects_corruption() {
        let bytes = Mpo::identity(2, 2).to_bytes();
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(Mpo::from_bytes(&bad).is_err());
        assert!(Mpo::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(Mpo::from_bytes(&long).is_err());
        let mut version = bytes.clone();
        version[8] = 9;
        assert!(Mpo::from_bytes(&version).is_err());
    }
}
