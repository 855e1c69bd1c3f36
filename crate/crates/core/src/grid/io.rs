//! Binary container for grid states.
//!
//! Layout (all little-endian):
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `GURG`                            |
//! | 4      | 2    | version (u16, currently 1)              |
//! | 6      | 1    | n_particles (u8)                        |
//! | 7      | 1    | symmetry (0 none, 1 bosonic, 2 fermionic) |
//! | 8      | 4    | points_per_axis (u32)                   |
//! | 12     | 8    | x_min (f64)                             |
//! | 20     | 8    | x_max (f64)                             |
//! | 28     | 16·M^N | amplitudes as (re, im) f64 pairs, row-major, axis 0 slowest |

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{GridSpec, GridState, Symmetry};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GURG";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 28;

impl GridState {
    pub fn to_bytes(&self) -> Vec<u8> {
        let spec = self.spec();
        let mut out = Vec::with_capacity(HEADER_LEN + 16 * self.amps().len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(spec.n_particles() as u8);
        out.push(self.symmetry().tag());
        out.extend_from_slice(&(spec.points_per_axis() as u32).to_le_bytes());
        out.extend_from_slice(&spec.x_min().to_le_bytes());
        out.extend_from_slice(&spec.x_max().to_le_bytes());
        for a in self.amps() {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }

    /// Parses and re-validates a container; amplitudes are taken verbatim.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format("grid container shorter than its header".into()));
        }
        if &bytes[0..4] != MAGIC {
            return Err(Error::Format("bad magic, expected GURG".into()));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported container version {version}")));
        }
        let n = bytes[6] as usize;
        let symmetry = Symmetry::from_tag(bytes[7])?;
        let m = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let x_min = f64::from_le_bytes(bytes[12..20].try_into().unwrap());
        let x_max = f64::from_le_bytes(bytes[20..28].try_into().unwrap());
        let spec = GridSpec::new(n, m, x_min, x_max)?;
        let body = &bytes[HEADER_LEN..];
        if body.len() != 16 * spec.len() {
            return Err(Error::Format(format!(
                "expected {} amplitude bytes, found {}",
                16 * spec.len(),
                body.len()
            )));
        }
        let amps = body
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[0..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..16].try_into().unwrap()),
                )
            })
            .collect();
        GridState::from_parts(spec, amps, symmetry)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}
