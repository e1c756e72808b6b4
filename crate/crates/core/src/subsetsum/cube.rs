use std::fmt;

use crate::error::{Error, Result};

/// An explicit subset of {0,1}^n.
///
/// A member is a bitmask with coordinate `i` (0-based) stored at bit `i`.
/// Members are kept sorted by mask value and distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CubeSet {
    n: usize,
    members: Vec<u64>,
}

pub const MAX_CUBE_DIM: usize = 64;

impl CubeSet {
    pub fn new(n: usize, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        if n > MAX_CUBE_DIM {
            return Err(Error::TooLarge {
                what: "cube dimension",
                actual: n as u128,
                cap: MAX_CUBE_DIM as u128,
            });
        }
        let mut members: Vec<u64> = members.into_iter().collect();
        if n < 64 {
            if let Some(&bad) = members.iter().find(|&&m| m >> n != 0) {
                return Err(Error::BadParams(format!(
                    "mask {bad:#x} has bits beyond dimension {n}"
                )));
            }
        }
        members.sort_unstable();
        members.dedup();
        Ok(CubeSet { n, members })
    }

    pub fn empty(n: usize) -> Self {
        CubeSet {
            n,
            members: Vec::new(),
        }
    }

    /// The single vector 0^n.
    pub fn origin(n: usize) -> Self {
        CubeSet {
            n,
            members: vec![0],
        }
    }

    /// All of {0,1}^n.
    pub fn full(n: usize) -> Result<Self> {
        if n >= 32 {
            return Err(Error::TooLarge {
                what: "full cube dimension",
                actual: n as u128,
                cap: 31,
            });
        }
        Ok(CubeSet {
            n,
            members: (0..1u64 << n).collect(),
        })
    }

    pub(crate) fn from_sorted(n: usize, members: Vec<u64>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        CubeSet { n, members }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.members.binary_search(&mask).is_ok()
    }

    pub fn is_subset(&self, other: &CubeSet) -> bool {
        self.n == other.n && self.members.iter().all(|&m| other.contains(m))
    }

    pub fn bit(mask: u64, i: usize) -> u8 {
        ((mask >> i) & 1) as u8
    }

    /// Renders a member as a 0/1 string, coordinate 1 first.
    pub fn render(&self, mask: u64) -> String {
        (0..self.n)
            .map(|i| if Self::bit(mask, i) == 1 { '1' } else { '0' })
            .collect()
    }

    /// Parses a 0/1 string with coordinate 1 first.
    pub fn parse_member(s: &str) -> Result<(usize, u64)> {
        let s = s.trim();
        if s.is_empty() || s.len() > MAX_CUBE_DIM {
            return Err(Error::BadParams(format!("bad cube vector {s:?}")));
        }
        let mut mask = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => mask |= 1 << i,
                _ => return Err(Error::BadParams(format!("bad cube vector {s:?}"))),
            }
        }
        Ok((s.len(), mask))
    }

    /// Parses a comma-separated list of 0/1 strings of equal length.
    pub fn parse(list: &str) -> Result<Self> {
        let mut n = None;
        let mut members = Vec::new();
        for item in list.split(',') {
            let (len, mask) = Self::parse_member(item)?;
            if *n.get_or_insert(len) != len {
                return Err(Error::BadParams("cube vectors differ in length".into()));
            }
            members.push(mask);
        }
        let n = n.ok_or_else(|| Error::BadParams("empty cube set".into()))?;
        CubeSet::new(n, members)
    }
}

impl fmt::Display for CubeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, &m) in self.members.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", self.render(m))?;
        }
        write!(f, "}}")
    }
}
