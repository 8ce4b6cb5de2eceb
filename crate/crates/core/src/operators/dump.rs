//! Binary operator dump: magic `BIEOP1`, little-endian `u64` rows and
//! columns, then row-major `(re, im)` pairs of `f64`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64;

use super::OperatorError;

const MAGIC: &[u8; 6] = b"BIEOP1";

pub fn write_operator(path: &Path, matrix: &Array2<Complex64>) -> Result<(), OperatorError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    let (rows, cols) = matrix.dim();
    w.write_all(&(rows as u64).to_le_bytes())?;
    w.write_all(&(cols as u64).to_le_bytes())?;
    for v in matrix.iter() {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_operator(path: &Path) -> Result<Array2<Complex64>, OperatorError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 6];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(OperatorError::Dump("bad magic".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let len = rows
        .checked_mul(cols)
        .ok_or_else(|| OperatorError::Dump("size overflow".into()))?;
    let mut data = Vec::with_capacity(len);
    for _ in 0..len {
        r.read_exact(&mut word)?;
        let re = f64::from_le_bytes(word);
        r.read_exact(&mut word)?;
        data.push(Complex64::new(re, f64::from_le_bytes(word)));
    }
    if r.read(&mut word)? != 0 {
        return Err(OperatorError::Dump("trailing bytes".into()));
    }
    Array2::from_shape_vec((rows, cols), data).map_err(|e| OperatorError::Dump(e.to_string()))
}
