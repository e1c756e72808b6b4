use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::hash::Hash;
use std::ops::Add;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

use super::{Caps, CubeSet, SumProfile, Weights};
use crate::error::{Error, Result};

/// Machine or big integer used to accumulate subset sums.
trait SumInt: Clone + Ord + Hash + Zero + Add<Output = Self> {
    fn from_big(v: &BigInt) -> Self;
    fn to_big(&self) -> BigInt;
}

impl SumInt for i64 {
    fn from_big(v: &BigInt) -> Self {
        v.to_i64().expect("checked range")
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl SumInt for i128 {
    fn from_big(v: &BigInt) -> Self {
        v.to_i128().expect("checked range")
    }
    fn to_big(&self) -> BigInt {
        BigInt::from(*self)
    }
}

impl SumInt for BigInt {
    fn from_big(v: &BigInt) -> Self {
        v.clone()
    }
    fn to_big(&self) -> BigInt {
        self.clone()
    }
}

enum Width {
    I64,
    I128,
    Big,
}

fn sum_width(w: &Weights) -> Width {
    let total: BigInt = w.entries().iter().map(|x| x.abs()).sum();
    let bits = total.bits();
    if bits < 62 {
        Width::I64
    } else if bits < 126 {
        Width::I128
    } else {
        Width::Big
    }
}

fn check_n(what: &'static str, n: usize, cap: usize) -> Result<()> {
    if n > cap || n > 63 {
        return Err(Error::TooLarge {
            what,
            actual: n as u128,
            cap: cap.min(63) as u128,
        });
    }
    Ok(())
}

/// All 2^n subset sums, index `mask` holding the sum over set bits of `mask`.
fn all_sums<T: SumInt>(w: &[T]) -> Vec<T> {
    let mut sums = Vec::with_capacity(1 << w.len());
    sums.push(T::zero());
    for x in w {
        let len = sums.len();
        for i in 0..len {
            let s = sums[i].clone() + x.clone();
            sums.push(s);
        }
    }
    sums
}

/// Sorted (sum, count) runs of all subset sums.
fn half_profile<T: SumInt>(w: &[T]) -> Vec<(T, u64)> {
    let mut sums = all_sums(w);
    sums.sort_unstable();
    let mut out: Vec<(T, u64)> = Vec::new();
    for s in sums {
        match out.last_mut() {
            Some((last, c)) if *last == s => *c += 1,
            _ => out.push((s, 1)),
        }
    }
    out
}

fn finish<T: SumInt>(n: usize, runs: Vec<(T, u128)>) -> Result<SumProfile> {
    SumProfile::new(
        n,
        runs.into_iter()
            .map(|(s, c)| (s.to_big(), BigUint::from(c)))
            .collect(),
    )
}

fn naive_typed<T: SumInt>(w: &Weights) -> Result<SumProfile> {
    let typed: Vec<T> = w.entries().iter().map(T::from_big).collect();
    let runs = half_profile(&typed)
        .into_iter()
        .map(|(s, c)| (s, c as u128))
        .collect();
    finish(w.len(), runs)
}

/// Profile by enumerating all 2^n subsets.
pub fn profile_naive(w: &Weights, caps: &Caps) -> Result<SumProfile> {
    check_n("n for naive enumeration", w.len(), caps.naive)?;
    match sum_width(w) {
        Width::I64 => naive_typed::<i64>(w),
        Width::I128 => naive_typed::<i128>(w),
        Width::Big => naive_typed::<BigInt>(w),
    }
}

/// Merges the pairwise sums of two sorted run lists in increasing order.
fn merge_halves<T: SumInt>(left: &[(T, u64)], right: &[(T, u64)]) -> Vec<(T, u128)> {
    let mut heap: BinaryHeap<Reverse<(T, usize, usize)>> = left
        .iter()
        .enumerate()
        .map(|(i, (s, _))| Reverse((s.clone() + right[0].0.clone(), i, 0)))
        .collect();
    let mut out: Vec<(T, u128)> = Vec::new();
    while let Some(Reverse((sum, i, j))) = heap.pop() {
        let c = left[i].1 as u128 * right[j].1 as u128;
        match out.last_mut() {
            Some((last, acc)) if *last == sum => *acc += c,
            _ => out.push((sum, c)),
        }
        if j + 1 < right.len() {
            heap.push(Reverse((
                left[i].0.clone() + right[j + 1].0.clone(),
                i,
                j + 1,
            )));
        }
    }
    out
}

fn mitm_typed<T: SumInt>(w: &Weights) -> Result<SumProfile> {
    let typed: Vec<T> = w.entries().iter().map(T::from_big).collect();
    let (a, b) = typed.split_at(typed.len() / 2);
    let left = half_profile(a);
    let right = half_profile(b);
    finish(w.len(), merge_halves(&left, &right))
}

/// Profile by splitting `w` in halves, enumerating each half, and merging
/// the pairwise sums in sorted order.
pub fn profile_mitm(w: &Weights, caps: &Caps) -> Result<SumProfile> {
    check_n("n for meet-in-the-middle", w.len(), caps.mitm)?;
    match sum_width(w) {
        Width::I64 => mitm_typed::<i64>(w),
        Width::I128 => mitm_typed::<i128>(w),
        Width::Big => mitm_typed::<BigInt>(w),
    }
}

trait Count: Clone + Zero + for<'a> std::ops::AddAssign<&'a Self> {
    fn one() -> Self;
    fn into_big(self) -> BigUint;
}

impl Count for u128 {
    fn one() -> Self {
        1
    }
    fn into_big(self) -> BigUint {
        BigUint::from(self)
    }
}

impl Count for BigUint {
    fn one() -> Self {
        num_traits::One::one()
    }
    fn into_big(self) -> BigUint {
        self
    }
}

fn dp_typed<C: Count>(w: &[i64], offset: i64, width: usize, n: usize) -> Result<SumProfile> {
    let mut table = vec![C::zero(); width];
    table[offset as usize] = C::one();
    for &x in w {
        let d = x.unsigned_abs() as usize;
        if x == 0 {
            for c in table.iter_mut() {
                let v = c.clone();
                *c += &v;
            }
        } else if x > 0 {
            for s in (d..width).rev() {
                let v = table[s - d].clone();
                table[s] += &v;
            }
        } else {
            for s in 0..width - d {
                let v = table[s + d].clone();
                table[s] += &v;
            }
        }
    }
    SumProfile::new(
        n,
        table
            .into_iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(s, c)| (BigInt::from(s as i64 - offset), c.into_big()))
            .collect(),
    )
}

/// Profile by per-item convolution over an offset table spanning
/// `[sum of negatives, sum of positives]`, for `sum |w_i| <= caps.dp`.
pub fn profile_dp(w: &Weights, caps: &Caps) -> Result<SumProfile> {
    let (lo, hi) = w.sum_bounds();
    let span: BigInt = &hi - &lo;
    match span.to_u128() {
        Some(span) if span <= caps.dp && span < usize::MAX as u128 => {
            let width = span + 1;
            let typed: Vec<i64> = w
                .entries()
                .iter()
                .map(|x| x.to_i64().expect("bounded by dp capacity"))
                .collect();
            let offset = (-lo).to_i64().expect("bounded by dp capacity");
            if w.len() < 127 {
                dp_typed::<u128>(&typed, offset, width as usize, w.len())
            } else {
                dp_typed::<BigUint>(&typed, offset, width as usize, w.len())
            }
        }
        other => Err(Error::CapacityExceeded {
            width: other.unwrap_or(u128::MAX),
            cap: caps.dp,
        }),
    }
}

/// Picks the cheapest applicable algorithm: DP when the sum range fits,
/// otherwise meet-in-the-middle.
pub fn profile(w: &Weights, caps: &Caps) -> Result<SumProfile> {
    match profile_dp(w, caps) {
        Err(Error::CapacityExceeded { .. }) => profile_mitm(w, caps),
        other => other,
    }
}

/// Calls `visit(mask, sum)` for every subset in Gray-code order.
fn for_each_subset<T: SumInt>(w: &[T], neg: &[T], mut visit: impl FnMut(u64, &T)) {
    let n = w.len();
    let mut mask = 0u64;
    let mut sum = T::zero();
    visit(mask, &sum);
    for i in 1u64..(1u64 << n) {
        let bit = i.trailing_zeros() as usize;
        if mask >> bit & 1 == 1 {
            sum = sum + neg[bit].clone();
        } else {
            sum = sum + w[bit].clone();
        }
        mask ^= 1 << bit;
        visit(mask, &sum);
    }
}

fn typed_with_neg<T: SumInt>(w: &Weights) -> (Vec<T>, Vec<T>) {
    let pos = w.entries().iter().map(T::from_big).collect();
    let neg = w.entries().iter().map(|x| T::from_big(&-x)).collect();
    (pos, neg)
}

fn fiber_typed<T: SumInt>(w: &Weights, tau: &BigInt) -> CubeSet {
    let (pos, neg) = typed_with_neg::<T>(w);
    let target = T::from_big(tau);
    let mut members = Vec::new();
    for_each_subset(&pos, &neg, |mask, s| {
        if *s == target {
            members.push(mask);
        }
    });
    members.sort_unstable();
    CubeSet::from_sorted(w.len(), members)
}

/// All ξ in {0,1}^n with <w, ξ> = τ.
pub fn fiber(w: &Weights, tau: &BigInt, caps: &Caps) -> Result<CubeSet> {
    check_n("n for fiber enumeration", w.len(), caps.naive)?;
    let (lo, hi) = w.sum_bounds();
    if tau < &lo || tau > &hi {
        return Ok(CubeSet::empty(w.len()));
    }
    Ok(match sum_width(w) {
        Width::I64 => fiber_typed::<i64>(w, tau),
        Width::I128 => fiber_typed::<i128>(w, tau),
        Width::Big => fiber_typed::<BigInt>(w, tau),
    })
}

fn unique_typed<T: SumInt>(w: &Weights) -> CubeSet {
    let (pos, neg) = typed_with_neg::<T>(w);
    let mut first: HashMap<T, u64> = HashMap::new();
    for_each_subset(&pos, &neg, |mask, s| {
        first
            .entry(s.clone())
            .and_modify(|m| *m = (*m).min(mask))
            .or_insert(mask);
    });
    let mut members: Vec<u64> = first.into_values().collect();
    members.sort_unstable();
    CubeSet::from_sorted(w.len(), members)
}

/// One preimage per element of R(w): for each sum, the subset with the
/// smallest mask, where coordinate i is bit i.
pub fn unique_preimages(w: &Weights, caps: &Caps) -> Result<CubeSet> {
    check_n("n for preimage enumeration", w.len(), caps.naive)?;
    Ok(match sum_width(w) {
        Width::I64 => unique_typed::<i64>(w),
        Width::I128 => unique_typed::<i128>(w),
        Width::Big => unique_typed::<BigInt>(w),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(v: &[i64]) -> Weights {
        Weights::from_i64(v).unwrap()
    }

    fn runs(p: &SumProfile) -> Vec<(i64, u64)> {
        p.entries()
            .iter()
            .map(|(s, c)| (s.to_i64().unwrap(), c.to_u64().unwrap()))
            .collect()
    }

    fn cube(s: &str) -> CubeSet {
        CubeSet::parse(s).unwrap()
    }

    /// Independent oracle: evaluate every subset directly from its bits.
    fn brute(v: &[i64]) -> Vec<(i64, u64)> {
        let mut m: std::collections::BTreeMap<i64, u64> = Default::default();
        for mask in 0u64..(1 << v.len()) {
            let s: i64 = (0..v.len())
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| v[i])
                .sum();
            *m.entry(s).or_default() += 1;
        }
        m.into_iter().collect()
    }

    #[test]
    fn naive_examples() {
        let caps = Caps::default();
        assert_eq!(
            runs(&profile_naive(&w(&[0, 0, 0]), &caps).unwrap()),
            vec![(0, 8)]
        );
        let p = profile_naive(&w(&[1, 10, 100]), &caps).unwrap();
        assert_eq!(p.range_size(), 8);
        assert!(runs(&p).iter().all(|&(_, c)| c == 1));
        assert_eq!(
            runs(&profile_naive(&w(&[1, 1, 1]), &caps).unwrap()),
            vec![(0, 1), (1, 3), (2, 3), (3, 1)]
        );
    }

    #[test]
    fn dp_examples() {
        let caps = Caps::default();
        assert_eq!(
            runs(&profile_dp(&w(&[1, 1, 1]), &caps).unwrap()),
            brute(&[1, 1, 1])
        );
        assert_eq!(runs(&profile_dp(&w(&[0, 0]), &caps).unwrap()), vec![(0, 4)]);
        assert_eq!(
            runs(&profile_dp(&w(&[-1, 1]), &caps).unwrap()),
            vec![(-1, 1), (0, 2), (1, 1)]
        );
    }

    #[test]
    fn mitm_examples() {
        let caps = Caps::default();
        assert_eq!(
            runs(&profile_mitm(&w(&[1, 1, 1, 1]), &caps).unwrap()),
            vec![(0, 1), (1, 4), (2, 6), (3, 4), (4, 1)]
        );
        let p = profile_mitm(&w(&[1, 2, 4, 8]), &caps).unwrap();
        assert_eq!(runs(&p), (0..16).map(|s| (s, 1)).collect::<Vec<_>>());
        assert_eq!(
            runs(&profile_mitm(&w(&[5]), &caps).unwrap()),
            vec![(0, 1), (5, 1)]
        );
    }

    #[test]
    fn caps_are_enforced() {
        let caps = Caps {
            naive: 3,
            dp: 10,
            mitm: 4,
        };
        assert!(matches!(
            profile_naive(&w(&[1; 4]), &caps),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            profile_mitm(&w(&[1; 5]), &caps),
            Err(Error::TooLarge { .. })
        ));
        assert!(matches!(
            profile_dp(&w(&[5, -6]), &caps),
            Err(Error::CapacityExceeded { width: 11, cap: 10 })
        ));
        assert!(profile_dp(&w(&[5, -4]), &caps).is_ok());
    }

    #[test]
    fn auto_falls_back_to_mitm() {
        let caps = Caps::default();
        let big = w(&[1, 1 << 40, 3]);
        assert_eq!(
            profile(&big, &caps).unwrap(),
            profile_naive(&big, &caps).unwrap()
        );
    }

    #[test]
    fn huge_weights_use_big_integers() {
        let caps = Caps::default();
        let big: BigInt = BigInt::from(1) << 200u32;
        let weights = Weights::new(vec![big.clone(), big.clone(), BigInt::from(1)]).unwrap();
        let a = profile_naive(&weights, &caps).unwrap();
        assert_eq!(a, profile_mitm(&weights, &caps).unwrap());
        assert_eq!(a.range_size(), 6);
        assert_eq!(a.count(&big), BigUint::from(2u32));
        assert_eq!(
            fiber(&weights, &(&big + 1), &Caps::default())
                .unwrap()
                .len(),
            2
        );
    }

    #[test]
    fn dp_handles_large_n_counts() {
        let caps = Caps::default();
        let p = profile_dp(&w(&[1; 130]), &caps).unwrap();
        assert_eq!(p.range_size(), 131);
        assert_eq!(p.count(&BigInt::from(1)), BigUint::from(130u32));
    }

    #[test]
    fn fiber_examples() {
        assert_eq!(
            fiber(&w(&[1, 1, 1]), &1.into(), &Caps::default()).unwrap(),
            cube("100,010,001")
        );
        assert!(fiber(&w(&[1, 1, 1]), &5.into(), &Caps::default())
            .unwrap()
            .is_empty());
        assert_eq!(
            fiber(&w(&[0, 0]), &0.into(), &Caps::default()).unwrap(),
            CubeSet::full(2).unwrap()
        );
    }

    #[test]
    fn unique_preimage_examples() {
        assert_eq!(
            unique_preimages(&w(&[1, 1, 1]), &Caps::default()).unwrap(),
            cube("000,100,110,111")
        );
        assert_eq!(
            unique_preimages(&w(&[0, 0]), &Caps::default()).unwrap(),
            cube("00")
        );
        assert_eq!(
            unique_preimages(&w(&[1, 2]), &Caps::default()).unwrap(),
            cube("00,10,01,11")
        );
    }

    proptest! {
        #[test]
        fn three_routes_agree(v in prop::collection::vec(-40i64..40, 1..12)) {
            let caps = Caps::default();
            let ws = w(&v);
            let naive = profile_naive(&ws, &caps).unwrap();
            prop_assert_eq!(runs(&naive), brute(&v));
            prop_assert_eq!(&profile_dp(&ws, &caps).unwrap(), &naive);
            prop_assert_eq!(&profile_mitm(&ws, &caps).unwrap(), &naive);
        }

        #[test]
        fn permutation_invariant(mut v in prop::collection::vec(-30i64..30, 1..10), seed in any::<u64>()) {
            let caps = Caps::default();
            let before = profile_naive(&w(&v), &caps).unwrap();
            // deterministic shuffle from the seed
            let mut s = seed;
            for i in (1..v.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                v.swap(i, (s >> 33) as usize % (i + 1));
            }
            prop_assert_eq!(profile_naive(&w(&v), &caps).unwrap(), before);
        }

        #[test]
        fn sign_flip_translates(v in prop::collection::vec(-30i64..30, 1..10), idx in any::<prop::sample::Index>()) {
            let caps = Caps::default();
            let i = idx.index(v.len());
            let before = profile_naive(&w(&v), &caps).unwrap();
            let mut flipped = v.clone();
            flipped[i] = -flipped[i];
            let after = profile_naive(&w(&flipped), &caps).unwrap();
            let shift = BigInt::from(-v[i]);
            let translated: Vec<_> = before
                .entries()
                .iter()
                .map(|(s, c)| (s + &shift, c.clone()))
                .collect();
            prop_assert_eq!(after.entries(), &translated[..]);
        }

        #[test]
        fn scaling_preserves_counts(v in prop::collection::vec(-30i64..30, 1..10), k in 1i64..9) {
            let caps = Caps::default();
            let before = profile_naive(&w(&v), &caps).unwrap();
            let scaled: Vec<i64> = v.iter().map(|x| x * k).collect();
            let after = profile_naive(&w(&scaled), &caps).unwrap();
            let b: Vec<_> = before.entries().iter().map(|(s, c)| (s * k, c.clone())).collect();
            prop_assert_eq!(after.entries(), &b[..]);
        }

        #[test]
        fn fibers_partition_the_cube(v in prop::collection::vec(-9i64..9, 1..9)) {
            let caps = Caps::default();
            let ws = w(&v);
            let p = profile_naive(&ws, &caps).unwrap();
            let uniq = unique_preimages(&ws, &Caps::default()).unwrap();
            prop_assert_eq!(uniq.len(), p.range_size());
            let mut total = 0usize;
            for (s, c) in p.entries() {
                let f = fiber(&ws, s, &Caps::default()).unwrap();
                prop_assert_eq!(BigUint::from(f.len()), c.clone());
                // the chosen preimage is the smallest mask in its fiber
                prop_assert!(uniq.contains(f.members()[0]));
                total += f.len();
            }
            prop_assert_eq!(total, 1usize << v.len());
        }
    }
}
