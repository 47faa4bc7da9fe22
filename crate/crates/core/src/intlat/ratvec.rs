use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::mat::ratio_to_f64;

/// Exact rational vector, serialized as strings such as `"1/3"`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RatVec(pub Vec<BigRational>);

impl RatVec {
    pub fn from_ints(num: &[i64], den: i64) -> Self {
        Self(num.iter().map(|&x| BigRational::new(BigInt::from(x), BigInt::from(den))).collect())
    }

    pub fn integer(v: &[i64]) -> Self {
        Self::from_ints(v, 1)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.0.iter().map(ratio_to_f64).collect()
    }

    pub fn add_int(&self, k: &[i64]) -> Self {
        Self(self.0.iter().zip(k).map(|(x, &v)| x + BigInt::from(v)).collect())
    }

    pub fn sub(&self, other: &RatVec) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Representative in `[0,1)^d`.
    pub fn mod_one(&self) -> Self {
        Self(self.0.iter().map(|x| BigRational::new(x.numer().mod_floor(x.denom()), x.denom().clone())).collect())
    }

    pub fn is_integral(&self) -> bool {
        self.0.iter().all(|x| x.is_integer())
    }

    /// Largest denominator among the coordinates.
    pub fn max_denom(&self) -> BigInt {
        self.0.iter().map(|x| x.denom().clone()).max().unwrap_or_else(|| BigInt::from(1))
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|x| x.to_string()).collect()
    }

    pub fn parse(items: &[String]) -> Result<Self, String> {
        items.iter().map(|s| BigRational::from_str(s.trim()).map_err(|e| format!("bad rational {s:?}: {e}"))).collect::<Result<_, _>>().map(Self)
    }
}

impl fmt::Display for RatVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.to_strings().join(", "))
    }
}

impl Serialize for RatVec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for RatVec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let items = Vec::<String>::deserialize(d)?;
        Self::parse(&items).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_reduction() {
        let v = RatVec::from_ints(&[-1, 4], 3);
        assert_eq!(v.mod_one(), RatVec::from_ints(&[2, 1], 3));
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"["-1/3","4/3"]"#);
        assert_eq!(serde_json::from_str::<RatVec>(&json).unwrap(), v);
        assert_eq!(v.to_string(), "(-1/3, 4/3)");
    }
}
