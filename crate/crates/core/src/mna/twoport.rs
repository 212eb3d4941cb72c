use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParamKind {
    S,
    Y,
    Z,
}

impl ParamKind {
    fn label(self) -> &'static str {
        match self {
            ParamKind::S => "S",
            ParamKind::Y => "Y",
            ParamKind::Z => "Z",
        }
    }
}

impl fmt::Display for ParamKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for ParamKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "S" => Ok(ParamKind::S),
            "Y" => Ok(ParamKind::Y),
            "Z" => Ok(ParamKind::Z),
            other => Err(format!("unknown parameter kind `{other}`")),
        }
    }
}

/// Network parameters of a one- or two-port, referenced to a single real
/// impedance `z0` (meaningful for S only, carried along for Y and Z).
///
/// Indices are zero-based: `get(1, 0)` is S21 for an S matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPort {
    pub kind: ParamKind,
    pub matrix: DMatrix<Complex64>,
    pub z0: f64,
}

impl TwoPort {
    pub fn new(kind: ParamKind, matrix: DMatrix<Complex64>, z0: f64) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Domain(format!(
                "network matrix must be square and non-empty, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::Domain("network matrix has non-finite entries".into()));
        }
        if !(z0.is_finite() && z0 > 0.0) {
            return Err(Error::param("z0", format!("must be positive, got {z0}")));
        }
        Ok(TwoPort { kind, matrix, z0 })
    }

    pub fn from_rows(kind: ParamKind, rows: &[[Complex64; 2]; 2], z0: f64) -> Result<Self> {
        Self::new(kind, DMatrix::from_fn(2, 2, |i, j| rows[i][j]), z0)
    }

    pub fn ports(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    /// Largest singular value of the matrix.
    pub fn max_singular_value(&self) -> f64 {
        self.matrix
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Frobenius-norm distance to `other`, relative to this matrix's norm.
    pub fn relative_distance(&self, other: &TwoPort) -> f64 {
        let scale = self.matrix.norm().max(f64::MIN_POSITIVE);
        (&self.matrix - &other.matrix).norm() / scale
    }

    pub fn convert(&self, target: ParamKind, z0: f64) -> Result<TwoPort> {
        convert(self, target, z0)
    }
}

fn identity(n: usize) -> DMatrix<Complex64> {
    DMatrix::identity(n, n)
}

fn inverse(m: DMatrix<Complex64>, from: ParamKind, to: ParamKind) -> Result<DMatrix<Complex64>> {
    let inv = m.try_inverse().ok_or(Error::SingularConversion {
        from: from.label(),
        to: to.label(),
    })?;
    if inv.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(inv)
    } else {
        Err(Error::SingularConversion {
            from: from.label(),
            to: to.label(),
        })
    }
}

fn to_z(tp: &TwoPort) -> Result<DMatrix<Complex64>> {
    let n = tp.ports();
    match tp.kind {
        ParamKind::Z => Ok(tp.matrix.clone()),
        ParamKind::Y => inverse(tp.matrix.clone(), ParamKind::Y, ParamKind::Z),
        ParamKind::S => {
            let i = identity(n);
            let inv = inverse(&i - &tp.matrix, ParamKind::S, ParamKind::Z)?;
            Ok((&i + &tp.matrix) * inv * Complex64::from(tp.z0))
        }
    }
}

/// Converts between S, Y and Z with a common real reference impedance.
///
/// `Z -> S` is `(Z - z0 I)(Z + z0 I)^-1`; `S -> Z` is `z0 (I + S)(I - S)^-1`;
/// Y and Z are inverses. Converting to the same kind (and, for S, the same
/// `z0`) returns an exact copy.
pub fn convert(tp: &TwoPort, target: ParamKind, z0: f64) -> Result<TwoPort> {
    if !(z0.is_finite() && z0 > 0.0) {
        return Err(Error::param("z0", format!("must be positive, got {z0}")));
    }
    if tp.kind == target && (target != ParamKind::S || tp.z0 == z0) {
        return Ok(TwoPort {
            z0: if target == ParamKind::S { tp.z0 } else { z0 },
            ..tp.clone()
        });
    }
    let n = tp.ports();
    let i = identity(n);
    let matrix = match (tp.kind, target) {
        (ParamKind::S, ParamKind::Y) if tp.z0 == z0 => {
            let inv = inverse(&i + &tp.matrix, ParamKind::S, ParamKind::Y)?;
            (&i - &tp.matrix) * inv / Complex64::from(z0)
        }
        (ParamKind::Y, ParamKind::S) => {
            let zy = &tp.matrix * Complex64::from(z0);
            let inv = inverse(&i + &zy, ParamKind::Y, ParamKind::S)?;
            (&i - &zy) * inv
        }
        (_, ParamKind::Z) => to_z(tp)?,
        (_, ParamKind::Y) => inverse(to_z(tp)?, tp.kind, ParamKind::Y)?,
        (_, ParamKind::S) => {
            let z = to_z(tp)?;
            let z0i = &i * Complex64::from(z0);
            let inv = inverse(&z + &z0i, tp.kind, ParamKind::S)?;
            (&z - &z0i) * inv
        }
    };
    TwoPort::new(target, matrix, z0)
}
