//! Iterated sumsets k·B of cube subsets, with multiplicities, and the
//! comparisons against Bin(k)^{⊗n} used in the injectivity argument.
//!
//! Vectors in {0,…,k+1}^n are stored as fixed-radix integers with radix
//! k+2, coordinate i at digit i. Adding an A member (entries ≤ 1) to a
//! k·B member (entries ≤ k) never carries, so vector addition is integer
//! addition of keys.

use std::collections::{BTreeMap, HashMap};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::numerics::binom;
use crate::subsetsum::CubeSet;

pub const DEFAULT_ENUM_BUDGET: u128 = 100_000_000;

/// k·B with multiplicity μ_k(c) = #{(b_1,…,b_k) ∈ B^k : Σ b_i = c}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiSumset {
    n: usize,
    k: u32,
    entries: BTreeMap<u128, u128>,
}

/// Key codec for {0,…,radix-1}^n.
#[derive(Debug, Clone, Copy)]
struct Radix {
    base: u128,
    n: usize,
}

impl Radix {
    fn new(k: u32, n: usize) -> Result<Self> {
        let base = k as u128 + 2;
        let mut total: u128 = 1;
        for _ in 0..n {
            total = total.checked_mul(base).ok_or(Error::BudgetExceeded {
                what: "key space (k+2)^n",
                needed: u128::MAX,
                budget: u128::MAX,
            })?;
        }
        Ok(Radix { base, n })
    }

    fn mask_key(&self, mask: u64) -> u128 {
        let mut key = 0u128;
        let mut place = 1u128;
        for i in 0..self.n {
            if mask >> i & 1 == 1 {
                key += place;
            }
            place *= self.base;
        }
        key
    }

    fn decode(&self, mut key: u128) -> Vec<u32> {
        (0..self.n)
            .map(|_| {
                let d = (key % self.base) as u32;
                key /= self.base;
                d
            })
            .collect()
    }
}

fn check_k(k: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::BadParams("k must be at least 1".into()));
    }
    Ok(())
}

fn charge(spent: &mut u128, amount: u128, budget: u128, what: &'static str) -> Result<()> {
    *spent = spent.saturating_add(amount);
    if *spent > budget {
        return Err(Error::BudgetExceeded {
            what,
            needed: *spent,
            budget,
        });
    }
    Ok(())
}

impl MultiSumset {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of all multiplicities (|B|^k when built from B).
    pub fn total(&self) -> u128 {
        self.entries.values().sum()
    }

    /// Support vectors with multiplicities, in key order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<u32>, u128)> + '_ {
        let radix = Radix::new(self.k, self.n).expect("validated on construction");
        self.entries
            .iter()
            .map(move |(&key, &m)| (radix.decode(key), m))
    }

    pub fn multiplicity(&self, c: &[u32]) -> u128 {
        let Ok(radix) = Radix::new(self.k, self.n) else {
            return 0;
        };
        if c.len() != self.n || c.iter().any(|&x| x as u128 >= radix.base) {
            return 0;
        }
        let key = c
            .iter()
            .rev()
            .fold(0u128, |acc, &x| acc * radix.base + x as u128);
        self.entries.get(&key).copied().unwrap_or(0)
    }
}

/// k·B by k-1 sparse convolutions with B's indicator.
pub fn iterated_sumset(b: &CubeSet, k: u32, budget: u128) -> Result<MultiSumset> {
    check_k(k)?;
    let radix = Radix::new(k, b.dim())?;
    let keys: Vec<u128> = b.members().iter().map(|&m| radix.mask_key(m)).collect();
    let mut current: BTreeMap<u128, u128> = keys.iter().map(|&key| (key, 1)).collect();
    let mut spent = keys.len() as u128;
    for _ in 1..k {
        charge(
            &mut spent,
            current.len() as u128 * keys.len() as u128,
            budget,
            "sumset convolution",
        )?;
        let mut next: HashMap<u128, u128> = HashMap::with_capacity(current.len() * 2);
        for (&c, &m) in &current {
            for &b in &keys {
                let slot = next.entry(c + b).or_insert(0);
                *slot = slot.checked_add(m).ok_or(Error::BudgetExceeded {
                    what: "multiplicity",
                    needed: u128::MAX,
                    budget: u128::MAX,
                })?;
            }
        }
        current = next.into_iter().collect();
    }
    Ok(MultiSumset {
        n: b.dim(),
        k,
        entries: current,
    })
}

/// k·B by enumerating every k-tuple of B; independent of the convolution
/// route and used to cross-check it.
pub fn iterated_sumset_enumerate(b: &CubeSet, k: u32, budget: u128) -> Result<MultiSumset> {
    check_k(k)?;
    let radix = Radix::new(k, b.dim())?;
    let size = b.len() as u128;
    let tuples = (0..k).try_fold(1u128, |acc, _| acc.checked_mul(size));
    match tuples {
        Some(t) if t <= budget => {}
        other => {
            return Err(Error::BudgetExceeded {
                what: "k-tuple enumeration",
                needed: other.unwrap_or(u128::MAX),
                budget,
            })
        }
    }
    let mut entries = BTreeMap::new();
    if b.is_empty() {
        return Ok(MultiSumset {
            n: b.dim(),
            k,
            entries,
        });
    }
    let members = b.members();
    let mut idx = vec![0usize; k as usize];
    loop {
        let mut coords = vec![0u32; b.dim()];
        for &i in &idx {
            for (d, c) in coords.iter_mut().enumerate() {
                *c += CubeSet::bit(members[i], d) as u32;
            }
        }
        let key = coords
            .iter()
            .rev()
            .fold(0u128, |acc, &x| acc * radix.base + x as u128);
        *entries.entry(key).or_insert(0) += 1;
        // odometer
        let mut pos = 0;
        loop {
            if pos == idx.len() {
                return Ok(MultiSumset {
                    n: b.dim(),
                    k,
                    entries,
                });
            }
            idx[pos] += 1;
            if idx[pos] < members.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Two distinct pairs (a, c) with equal a + c.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    pub first: (Vec<u32>, Vec<u32>),
    pub second: (Vec<u32>, Vec<u32>),
    pub sum: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Injectivity {
    Holds,
    Violated(Box<Collision>),
}

impl Injectivity {
    pub fn holds(&self) -> bool {
        matches!(self, Injectivity::Holds)
    }
}

fn same_dim(a: &CubeSet, b: &CubeSet) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::BadParams(format!(
            "sets live in different dimensions {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(())
}

/// Whether (a, c) ↦ a + c is injective on A × (k·B).
pub fn check_injectivity(a: &CubeSet, b: &CubeSet, k: u32, budget: u128) -> Result<Injectivity> {
    same_dim(a, b)?;
    let kb = iterated_sumset(b, k, budget)?;
    let pairs = a.len() as u128 * kb.support_len() as u128;
    if pairs > budget {
        return Err(Error::BudgetExceeded {
            what: "A x kB pairs",
            needed: pairs,
            budget,
        });
    }
    let radix = Radix::new(k, a.dim())?;
    let mut seen: HashMap<u128, (u64, u128)> = HashMap::with_capacity(pairs as usize);
    for &am in a.members() {
        let ak = radix.mask_key(am);
        for &c in kb.entries.keys() {
            if let Some(&(prev_a, prev_c)) = seen.get(&(ak + c)) {
                return Ok(Injectivity::Violated(Box::new(Collision {
                    first: (radix.decode(radix.mask_key(prev_a)), radix.decode(prev_c)),
                    second: (radix.decode(ak), radix.decode(c)),
                    sum: radix.decode(ak + c),
                })));
            }
            seen.insert(ak + c, (am, c));
        }
    }
    Ok(Injectivity::Holds)
}

/// max over c in k·B of (μ_k(c) / |B|^k) / Π_i P[Bin(k) = c_i].
pub fn density_ratio_max(b: &CubeSet, k: u32, budget: u128) -> Result<BigRational> {
    if b.is_empty() {
        return Err(Error::BadParams("density of an empty set".into()));
    }
    let kb = iterated_sumset(b, k, budget)?;
    let row: Vec<BigUint> = (0..=k as i64)
        .map(|x| binom(k as u64, x).to_biguint().expect("nonnegative"))
        .collect();
    // maximize μ / Π C(k, c_i) by cross-multiplication
    let mut best: Option<(BigUint, BigUint)> = None;
    for (c, m) in kb.iter() {
        let weight: BigUint = c.iter().map(|&x| &row[x as usize]).product();
        let m = BigUint::from(m);
        let better = match &best {
            None => true,
            Some((bm, bw)) => &m * bw > bm * &weight,
        };
        if better {
            best = Some((m, weight));
        }
    }
    let (m, weight) = best.expect("nonempty sumset");
    let n = b.dim() as u64;
    let num = BigInt::from(m) << (k as u64 * n);
    let den = BigInt::from(weight) * num_traits::pow(BigInt::from(b.len()), k as usize);
    Ok(BigRational::new(num, den))
}

/// (2^n / |B|)^k, the bound on [`density_ratio_max`].
pub fn density_bound(b: &CubeSet, k: u32) -> BigRational {
    let base = BigRational::new(BigInt::one() << b.dim(), BigInt::from(b.len()));
    num_traits::pow(base, k as usize)
}

/// P[a + b_1 + … + b_k ∈ {0,…,k+1}^n] for uniform a ∈ A and b_i ∈ B.
pub fn partition_total(a: &CubeSet, b: &CubeSet, k: u32, budget: u128) -> Result<BigRational> {
    same_dim(a, b)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::BadParams(
            "partition total needs nonempty A and B".into(),
        ));
    }
    let kb = iterated_sumset(b, k, budget)?;
    let pairs = a.len() as u128 * kb.support_len() as u128;
    if pairs > budget {
        return Err(Error::BudgetExceeded {
            what: "A x kB pairs",
            needed: pairs,
            budget,
        });
    }
    let bound = k + 1;
    let mut inside = BigUint::zero();
    for &am in a.members() {
        for (c, m) in kb.iter() {
            let fits = c
                .iter()
                .enumerate()
                .all(|(i, &x)| x + CubeSet::bit(am, i) as u32 <= bound);
            if fits {
                inside += m;
            }
        }
    }
    let total = BigUint::from(a.len()) * BigUint::from(kb.total());
    Ok(BigRational::new(inside.into(), total.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subsetsum::{fiber, unique_preimages, Caps, Weights};
    use proptest::prelude::*;

    const BUDGET: u128 = DEFAULT_ENUM_BUDGET;

    fn cube(s: &str) -> CubeSet {
        CubeSet::parse(s).unwrap()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn w(v: &[i64]) -> Weights {
        Weights::from_i64(v).unwrap()
    }

    #[test]
    fn sumset_examples() {
        let s = iterated_sumset(&cube("10,01"), 2, BUDGET).unwrap();
        let got: Vec<_> = s.iter().collect();
        assert_eq!(got, vec![(vec![2, 0], 1), (vec![1, 1], 2), (vec![0, 2], 1)]);
        let b = cube("110,011,000");
        let one = iterated_sumset(&b, 1, BUDGET).unwrap();
        assert_eq!(one.support_len(), 3);
        assert!(one.iter().all(|(_, m)| m == 1));
        let z = iterated_sumset(&CubeSet::origin(4), 5, BUDGET).unwrap();
        assert_eq!(z.iter().collect::<Vec<_>>(), vec![(vec![0; 4], 1)]);
        assert_eq!(s.multiplicity(&[1, 1]), 2);
        assert_eq!(s.multiplicity(&[3, 0]), 0);
    }

    #[test]
    fn zero_k_rejected() {
        assert!(matches!(
            iterated_sumset(&cube("1"), 0, BUDGET),
            Err(Error::BadParams(_))
        ));
    }

    #[test]
    fn budget_enforced() {
        let full = CubeSet::full(6).unwrap();
        assert!(matches!(
            iterated_sumset(&full, 4, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(matches!(
            iterated_sumset_enumerate(&full, 4, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn injectivity_examples() {
        let ws = w(&[1, 1, 2]);
        let caps = Caps::default();
        let a = unique_preimages(&ws, &caps).unwrap();
        let b = fiber(&ws, &1.into(), &caps).unwrap();
        assert_eq!(a.len(), 5);
        assert_eq!(b.len(), 2);
        assert!(check_injectivity(&a, &b, 1, BUDGET).unwrap().holds());

        // exhaustive: 00+10, 00+01, 11+10, 11+01 are the four distinct sums
        // 10, 01, 21, 12
        assert!(check_injectivity(&cube("00,11"), &cube("10,01"), 1, BUDGET)
            .unwrap()
            .holds());

        match check_injectivity(&cube("00,11"), &cube("00,11"), 1, BUDGET).unwrap() {
            Injectivity::Violated(c) => {
                assert_eq!(c.sum, vec![1, 1]);
                assert_ne!(c.first, c.second);
            }
            Injectivity::Holds => panic!("00+11 = 11+00 must collide"),
        }

        let full = CubeSet::full(3).unwrap();
        for k in 1..4 {
            assert!(check_injectivity(&CubeSet::origin(3), &full, k, BUDGET)
                .unwrap()
                .holds());
        }
        assert!(check_injectivity(&CubeSet::origin(2), &full, 1, BUDGET).is_err());
    }

    #[test]
    fn density_examples() {
        for k in 1..6 {
            assert_eq!(
                density_ratio_max(&CubeSet::full(1).unwrap(), k, BUDGET).unwrap(),
                rat(1, 1)
            );
        }
        assert_eq!(
            density_ratio_max(&CubeSet::full(2).unwrap(), 1, BUDGET).unwrap(),
            rat(1, 1)
        );
        let b = fiber(&w(&[1, 1, 1]), &1.into(), &Caps::default()).unwrap();
        // pairs from {100,010,001}: c = 200 has μ = 1/9 against Bin mass 1/64
        let d = density_ratio_max(&b, 2, BUDGET).unwrap();
        assert_eq!(d, rat(64, 9));
        assert!(d <= density_bound(&b, 2));
        assert!(density_ratio_max(&CubeSet::empty(2), 1, BUDGET).is_err());
    }

    #[test]
    fn partition_examples() {
        let o = CubeSet::origin(3);
        assert_eq!(partition_total(&o, &o, 3, BUDGET).unwrap(), rat(1, 1));
        let ws = w(&[1, 1, 2]);
        let caps = Caps::default();
        let a = unique_preimages(&ws, &caps).unwrap();
        let b = fiber(&ws, &2.into(), &caps).unwrap();
        assert_eq!(partition_total(&a, &b, 2, BUDGET).unwrap(), rat(1, 1));
    }

    fn arb_cube(n: usize) -> impl Strategy<Value = CubeSet> {
        prop::collection::vec(0u64..(1 << n), 1..8).prop_map(move |m| CubeSet::new(n, m).unwrap())
    }

    proptest! {
        #[test]
        fn convolution_matches_enumeration(b in (1usize..5).prop_flat_map(arb_cube), k in 1u32..4) {
            let conv = iterated_sumset(&b, k, BUDGET).unwrap();
            let en = iterated_sumset_enumerate(&b, k, BUDGET).unwrap();
            prop_assert_eq!(&conv, &en);
            prop_assert_eq!(conv.total(), (b.len() as u128).pow(k));
        }

        #[test]
        fn density_within_bound(b in (1usize..5).prop_flat_map(arb_cube), k in 1u32..4) {
            let d = density_ratio_max(&b, k, BUDGET).unwrap();
            prop_assert!(d <= density_bound(&b, k));
        }

        #[test]
        fn lemma_injectivity(v in prop::collection::vec(-6i64..7, 1..7), k in 1u32..4) {
            let ws = w(&v);
            let caps = Caps::default();
            let p = crate::subsetsum::profile_naive(&ws, &caps).unwrap();
            let tau = p.max_fiber().0.clone();
            let a = unique_preimages(&ws, &caps).unwrap();
            let b = fiber(&ws, &tau, &caps).unwrap();
            prop_assert!(check_injectivity(&a, &b, k, BUDGET).unwrap().holds());
            prop_assert_eq!(partition_total(&a, &b, k, BUDGET).unwrap(), rat(1, 1));
        }
    }
}
