//! JSON encodings shared by every serialized type: complex scalars as `[re, im]`,
//! matrices as row-major arrays of `[re, im]`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{CMat, C64};

#[derive(Deserialize)]
#[serde(untagged)]
enum ComplexRepr {
    Pair([f64; 2]),
    Real(f64),
}

impl From<ComplexRepr> for C64 {
    fn from(r: ComplexRepr) -> Self {
        match r {
            ComplexRepr::Pair([a, b]) => C64::new(a, b),
            ComplexRepr::Real(a) => C64::new(a, 0.0),
        }
    }
}

/// A complex number that (de)serializes as `[re, im]` (a bare number is read as real).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Cx(pub C64);

impl Serialize for Cx {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Cx {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Ok(Cx(ComplexRepr::deserialize(d)?.into()))
    }
}

pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        Cx(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(Cx::deserialize(d)?.0)
    }
}

pub mod complex_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[C64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| Cx(*z)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<C64>, D::Error> {
        Ok(Vec::<Cx>::deserialize(d)?.into_iter().map(|c| c.0).collect())
    }
}

pub mod matrix {
    use super::*;

    pub fn to_rows(m: &CMat) -> Vec<Vec<Cx>> {
        (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| Cx(m[(i, j)])).collect())
            .collect()
    }

    pub fn from_rows(rows: Vec<Vec<Cx>>) -> Result<CMat, String> {
        let n = rows.len();
        let m = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != m) {
            return Err("matrix rows have unequal length".into());
        }
        Ok(CMat::from_fn(n, m, |i, j| rows[i][j].0))
    }

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<Cx>>::deserialize(d)?;
        from_rows(rows).map_err(D::Error::custom)
    }
}

pub mod matrix_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[CMat], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(matrix::to_rows).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMat>, D::Error> {
        Vec::<Vec<Vec<Cx>>>::deserialize(d)?
            .into_iter()
            .map(|rows| matrix::from_rows(rows).map_err(D::Error::custom))
            .collect()
    }
}
