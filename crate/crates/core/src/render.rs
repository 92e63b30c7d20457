//! Binary PPM rendering of stable sandpile states.

use crate::error::{Error, Result};
use crate::sandpile::SandpileState;

/// RGB colour for heights 0..=3.
pub fn palette(value: i64) -> Option<[u8; 3]> {
    match value {
        3 => Some([255, 255, 255]),
        2 => Some([0, 160, 0]),
        1 => Some([255, 220, 0]),
        0 => Some([220, 0, 0]),
        _ => None,
    }
}

/// P6 image of `phi`, top row = largest y. Guard-band vertices are drawn too.
pub fn to_ppm(phi: &SandpileState) -> Result<Vec<u8>> {
    let (w, h, ids) = phi.domain().raster().ok_or(Error::NoCoordinates)?;
    let mut out = Vec::with_capacity(20 + 3 * ids.len());
    out.extend_from_slice(format!("P6\n{w} {h}\n255\n").as_bytes());
    for v in ids {
        let rgb = palette(phi[v]).ok_or(Error::ValueOutOfPalette { vertex: v, value: phi[v] })?;
        out.extend_from_slice(&rgb);
    }
    Ok(out)
}

pub fn write_ppm(phi: &SandpileState, path: &std::path::Path) -> std::io::Result<()> {
    let bytes = to_ppm(phi).map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
    std::fs::write(path, bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{IntegerField, Lattice};

    #[test]
    fn header_and_orientation() {
        let d = Lattice::boxed(0, 2, 0, 2, 1).unwrap();
        let phi = IntegerField::from_coords(d, |x, y| if y == 2 && x == 0 { 0 } else { 3 }).unwrap();
        let img = to_ppm(&phi).unwrap();
        let header = b"P6\n3 3\n255\n";
        assert_eq!(&img[..header.len()], header);
        assert_eq!(&img[header.len()..header.len() + 3], &[220, 0, 0]);
        assert_eq!(img.len(), header.len() + 27);
    }

    #[test]
    fn rejects_unstable_values() {
        let d = Lattice::boxed(0, 2, 0, 2, 1).unwrap();
        let phi = IntegerField::constant(d, 4);
        assert!(matches!(to_ppm(&phi), Err(Error::ValueOutOfPalette { value: 4, .. })));
    }
}
