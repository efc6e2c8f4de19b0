use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use tilelat_core::abelian::*;
use tilelat_core::exactvec::{Rational, SparseVector};
use tilelat_core::sampling::Sampler;

fn matrix() -> impl Strategy<Value = IntegerMatrix> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
        prop::collection::vec(-5i64..=5, r * c).prop_map(move |e| IntegerMatrix::new(r, c, e.into_iter().map(BigInt::from).collect()).unwrap())
    })
}

fn rows(m: &IntegerMatrix) -> Vec<SparseVector> {
    (0..m.rows())
        .map(|i| SparseVector::from_dense(&m.row(i).iter().map(|x| Rational::from_integer(x.clone())).collect::<Vec<_>>()))
        .collect()
}

fn is_diagonal_chain(s: &IntegerMatrix) -> bool {
    for i in 0..s.rows() {
        for j in 0..s.cols() {
            if i != j && !s.get(i, j).is_zero() {
                return false;
            }
        }
    }
    let d: Vec<&BigInt> = (0..s.rows().min(s.cols())).map(|i| s.get(i, i)).collect();
    d.windows(2).all(|w| if w[0].is_zero() { w[1].is_zero() } else { (w[1] % w[0]).is_zero() }) && d.iter().all(|x| !x.is_negative())
}

/// Random unimodular `n x n` matrix built from elementary row operations.
fn unimodular(s: &mut Sampler, n: usize, ops: usize) -> Vec<Vec<i64>> {
    let mut m: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    for _ in 0..ops {
        let a = s.below(n as u64) as usize;
        let b = s.below(n as u64) as usize;
        if a == b {
            m.swap(a, (a + 1) % n);
            continue;
        }
        let k = s.range_i64(-2, 2);
        let src = m[b].clone();
        for (x, y) in m[a].iter_mut().zip(&src) {
            *x += k * y;
        }
    }
    m
}

fn vecs(rows: &[Vec<i64>]) -> Vec<SparseVector> {
    rows.iter().map(|r| SparseVector::from_integers(r)).collect()
}

fn spans_same(a: &[SparseVector], b: &[SparseVector]) -> bool {
    a.iter().all(|x| subgroup_membership(b, x).is_some()) && b.iter().all(|x| subgroup_membership(a, x).is_some())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hermite_identities(a in matrix()) {
        let nf = hnf(&a);
        prop_assert_eq!(nf.u.mul(&a), nf.h.clone());
        prop_assert_eq!(nf.u.determinant().abs(), BigInt::one());
        prop_assert!(nf.h.is_hermite());
        prop_assert_eq!(hnf(&nf.h).h, nf.h.clone());
        prop_assert_eq!(nf.rank, (0..nf.h.rows()).filter(|&i| !nf.h.row_is_zero(i)).count());
    }

    #[test]
    fn smith_identities(a in matrix()) {
        let nf = smith(&a);
        let v = nf.v.clone().unwrap();
        prop_assert_eq!(nf.u.mul(&a).mul(&v), nf.h.clone());
        prop_assert_eq!(nf.u.determinant().abs(), BigInt::one());
        prop_assert_eq!(v.determinant().abs(), BigInt::one());
        prop_assert!(is_diagonal_chain(&nf.h));
        prop_assert_eq!(nf.rank, hnf(&a).rank);
        if a.rows() == a.cols() {
            let prod = nf.invariant_factors.iter().fold(BigInt::one(), |acc, f| acc * f);
            let det = a.determinant().abs();
            if nf.rank == a.rows() {
                prop_assert_eq!(prod, det);
            } else {
                prop_assert!(det.is_zero());
            }
        }
    }

    #[test]
    fn free_basis_round_trip(a in matrix()) {
        let gens = rows(&a);
        let (basis, transform) = free_basis_with_transform(&gens);
        prop_assert_eq!(basis.len(), hnf(&a).rank);
        prop_assert!(spans_same(&gens, &basis));
        for (b, t) in basis.iter().zip(&transform) {
            prop_assert_eq!(&combine(&gens, t), b);
        }
    }

    #[test]
    fn membership_coefficients_are_exact(a in matrix(), k in prop::collection::vec(-3i64..=3, 6)) {
        let gens = rows(&a);
        let coeffs: Vec<BigInt> = k.iter().take(gens.len()).map(|&c| BigInt::from(c)).collect();
        let x = combine(&gens, &coeffs);
        let found = subgroup_membership(&gens, &x).expect("element of the group");
        prop_assert_eq!(combine(&gens, &found), x);
    }
}

/// Index of the group generated by `gens` in `Z^2`, found by counting
/// cosets of the box `[0, n)^2` directly.
fn coset_count(gens: &[SparseVector], n: i64) -> usize {
    let mut reps: Vec<SparseVector> = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let p = SparseVector::from_integers(&[x, y]);
            if !reps.iter().any(|r| subgroup_membership(gens, &p.sub(r)).is_some()) {
                reps.push(p);
            }
        }
    }
    reps.len()
}

#[test]
fn index_matches_coset_count() {
    let mut s = Sampler::new(11, 0);
    let mut checked = 0;
    while checked < 40 {
        let m: Vec<Vec<i64>> = (0..2).map(|_| (0..2).map(|_| s.range_i64(-4, 4)).collect()).collect();
        let a = IntegerMatrix::from_rows(&m).unwrap();
        let det = a.determinant().abs();
        if det.is_zero() {
            continue;
        }
        let n: i64 = det.try_into().unwrap();
        let gens = vecs(&m);
        assert_eq!(coset_count(&gens, n) as i64, n, "{m:?}");
        let f = smith(&a).invariant_factors;
        assert_eq!(f.iter().fold(BigInt::one(), |acc, x| acc * x), BigInt::from(n));
        checked += 1;
    }
}

#[test]
fn extend_basis_on_random_chains() {
    let mut s = Sampler::new(5, 1);
    for _ in 0..50 {
        let n = 2 + s.below(4) as usize;
        let basis = unimodular(&mut s, n, 12);
        let mut cuts: Vec<usize> = (0..3).map(|_| 1 + s.below(n as u64) as usize).collect();
        cuts.sort();
        let chain: Vec<Vec<SparseVector>> = cuts
            .iter()
            .map(|&c| {
                let mut level = vecs(&basis[..c]);
                let extra = s.range_i64(-2, 2);
                level.push(level[0].scale_int(extra).add(&level[level.len() - 1]));
                level
            })
            .collect();
        let out = extend_basis(&chain).unwrap();
        for (i, b) in out.iter().enumerate() {
            assert_eq!(b.len(), cuts[i]);
            assert!(spans_same(b, &chain[i]));
            if i > 0 {
                assert_eq!(&b[..out[i - 1].len()], &out[i - 1][..]);
            }
        }
    }
}

#[test]
fn torsion_chains_are_refused() {
    let mut s = Sampler::new(6, 2);
    let mut factors = BTreeSet::new();
    for _ in 0..50 {
        let n = 2 + s.below(3) as usize;
        let basis = vecs(&unimodular(&mut s, n, 10));
        let k = 2 + s.below(4) as i64;
        let chain = vec![vec![basis[0].scale_int(k)], basis.clone()];
        match extend_basis(&chain) {
            Err(AlgebraError::TorsionQuotient { level: 1, factor }) => {
                assert_eq!(factor, BigInt::from(k));
                factors.insert(k);
            }
            other => panic!("expected torsion, got {other:?}"),
        }
    }
    assert!(factors.len() > 1);
}

#[test]
fn not_a_chain_is_reported() {
    let chain = vec![vecs(&[vec![1, 1]]), vecs(&[vec![2, 0], vec![0, 2]])];
    assert!(matches!(extend_basis(&chain), Err(AlgebraError::NotAChain { level: 1, index: 0 })));
}
