use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::intlat::{IVec, IntMatrix};
use crate::triples::{AffinePair, HadamardTriple};

/// Integer entry: a JSON number, or a string for values a reader might round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Int {
    Num(i64),
    Str(String),
}

impl Int {
    pub fn value(&self) -> Result<i64> {
        match self {
            Int::Num(v) => Ok(*v),
            Int::Str(s) => s.trim().parse().map_err(|_| Error::InvalidInput(format!("{s:?} is not a 64-bit integer"))),
        }
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int::Num(v)
    }
}

fn ints(rows: &[Vec<Int>]) -> Result<Vec<IVec>> {
    rows.iter().map(|r| r.iter().map(Int::value).collect()).collect()
}

fn wrap(rows: &[IVec]) -> Vec<Vec<Int>> {
    rows.iter().map(|r| r.iter().map(|&v| Int::Num(v)).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<Int>>,
    #[serde(rename = "B")]
    pub b: Vec<Vec<Int>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<Vec<Vec<Int>>>,
    #[serde(default)]
    pub config: PipelineConfig,
    #[serde(default)]
    pub seed: u64,
}

impl ProblemFile {
    pub fn new(r: &[IVec], b: &[IVec], l: Option<&[IVec]>) -> Self {
        Self { name: None, r: wrap(r), b: wrap(b), l: l.map(wrap), config: PipelineConfig::default(), seed: 0 }
    }

    pub fn from_triple(t: &HadamardTriple) -> Self {
        Self::new(&t.r().to_rows(), t.b(), Some(&t.l))
    }

    pub fn from_pair(p: &AffinePair) -> Self {
        Self::new(&p.r().to_rows(), p.digits(), None)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("problem file: {e}")))?;
        p.check()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn check(&self) -> Result<()> {
        let d = self.r.len();
        if d == 0 || self.r.iter().any(|row| row.len() != d) {
            return Err(Error::DimensionMismatch("R must be a non-empty square matrix".into()));
        }
        let sets = std::iter::once(("B", &self.b)).chain(self.l.as_ref().map(|l| ("L", l)));
        for (name, set) in sets {
            if set.is_empty() || set.iter().any(|v| v.len() != d) {
                return Err(Error::DimensionMismatch(format!("{name} must hold non-empty rows of length {d}")));
            }
        }
        ints(&self.r)?;
        ints(&self.b)?;
        self.l.as_deref().map(ints).transpose()?;
        Ok(())
    }

    pub fn matrix(&self) -> Result<IntMatrix> {
        IntMatrix::new(ints(&self.r)?)
    }

    pub fn digits(&self) -> Result<Vec<IVec>> {
        ints(&self.b)
    }

    pub fn dual(&self) -> Result<Option<Vec<IVec>>> {
        self.l.as_deref().map(ints).transpose()
    }

    pub fn pair(&self) -> Result<AffinePair> {
        AffinePair::new(self.matrix()?, self.digits()?)
    }

    pub fn triple(&self) -> Result<HadamardTriple> {
        let l = self.dual()?.ok_or_else(|| Error::InvalidInput("the problem has no dual digit set L".into()))?;
        HadamardTriple::new(self.pair()?, l)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("problem serializes").as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::quarter_cantor;

    #[test]
    fn string_entries_and_round_trip() {
        let p = ProblemFile::parse(r#"{"R": [["4"]], "B": [[0], [2]], "L": [[0], ["1"]]}"#).unwrap();
        assert_eq!(p.triple().unwrap(), quarter_cantor());
        let again = ProblemFile::parse(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(again, p);
        assert_eq!(again.digest(), p.digest());
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(ProblemFile::parse(r#"{"R": [[4]], "B": [[0]], "extra": 1}"#), Err(Error::InvalidInput(_))));
        assert!(matches!(ProblemFile::parse(r#"{"R": [[4, 1]], "B": [[0]]}"#), Err(Error::DimensionMismatch(_))));
        assert!(matches!(ProblemFile::parse(r#"{"R": [["x"]], "B": [[0]]}"#), Err(Error::InvalidInput(_))));
        let no_l = ProblemFile::parse(r#"{"R": [[4]], "B": [[0], [2]]}"#).unwrap();
        assert!(matches!(no_l.triple(), Err(Error::InvalidInput(_))));
    }
}
