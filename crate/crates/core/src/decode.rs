//! First-stage evaluation and the two-stage decode.
//!
//! A variable is a sure zero when it sits in a negative test. It is a sure one
//! when it sits in a positive test whose other members are all sure zeros.
//! Sure ones are computed in a single pass after the sure zeros; there is no
//! iterative peeling. Everything else is undetermined and retested
//! individually, so `T = M + |U0| + |U1|`.

use crate::assignment::{Assignment, DecodeResult, TestOutcomes};
use crate::design::PoolDesign;
use crate::error::{Error, Result};

fn check_dims(design: &PoolDesign, x: &Assignment) -> Result<()> {
    if x.len() != design.n_variables() {
        return Err(Error::DimensionMismatch {
            expected: design.n_variables(),
            got: x.len(),
        });
    }
    Ok(())
}

/// `T_a` is the OR of the pool; an empty pool is negative.
pub fn run_tests(design: &PoolDesign, x: &Assignment) -> Result<TestOutcomes> {
    check_dims(design, x)?;
    let bits = design
        .pools()
        .iter()
        .map(|pool| pool.iter().any(|&i| x.is_defective(i as usize)))
        .collect();
    Ok(TestOutcomes::new(bits))
}

pub fn decode_two_stage(design: &PoolDesign, x: &Assignment) -> Result<DecodeResult> {
    let outcomes = run_tests(design, x)?;
    let n = design.n_variables();
    let sure_zero: Vec<bool> = (0..n)
        .map(|i| {
            design
                .tests_of(i)
                .iter()
                .any(|&a| !outcomes.is_positive(a as usize))
        })
        .collect();
    let sure_one: Vec<bool> = (0..n)
        .map(|i| {
            design.tests_of(i).iter().any(|&a| {
                outcomes.is_positive(a as usize)
                    && design
                        .pool(a as usize)
                        .iter()
                        .all(|&j| j as usize == i || sure_zero[j as usize])
            })
        })
        .collect();

    let mut res = DecodeResult {
        sure_zeros: Vec::new(),
        sure_ones: Vec::new(),
        undetermined_zeros: Vec::new(),
        undetermined_ones: Vec::new(),
        total_tests: design.n_tests(),
    };
    for i in 0..n {
        let idx = i as u32;
        match (x.is_defective(i), sure_zero[i], sure_one[i]) {
            (false, true, _) => res.sure_zeros.push(idx),
            (false, false, _) => res.undetermined_zeros.push(idx),
            (true, _, true) => res.sure_ones.push(idx),
            (true, _, false) => res.undetermined_ones.push(idx),
        }
        // a defective can never sit in a negative test, nor can a zero be
        // the lone unresolved member of a positive test
        debug_assert!(!(x.is_defective(i) && sure_zero[i]));
        debug_assert!(x.is_defective(i) || !sure_one[i]);
    }
    res.total_tests += res.undetermined_zeros.len() + res.undetermined_ones.len();
    Ok(res)
}

/// `(|U0|, |U1|)` without materialising the sets.
pub fn count_undetermined(design: &PoolDesign, x: &Assignment) -> Result<(usize, usize)> {
    check_dims(design, x)?;
    Ok(Decoder::new(design).count(&x.defectives()))
}

/// Reusable scratch space for repeated decodes of one design.
///
/// Work per call is proportional to the neighbourhood of the defectives, so
/// sparse assignments are cheap even on large designs.
pub struct Decoder<'a> {
    design: &'a PoolDesign,
    isolated: Vec<u32>,
    epoch: u32,
    defect_mark: Vec<u32>,
    positive_mark: Vec<u32>,
    /// `epoch * 2 + is_sure_zero` for zero variables already classified.
    zero_state: Vec<u64>,
    positive_tests: Vec<u32>,
}

impl<'a> Decoder<'a> {
    pub fn new(design: &'a PoolDesign) -> Self {
        let n = design.n_variables();
        Decoder {
            design,
            isolated: (0..n as u32)
                .filter(|&i| design.tests_of(i as usize).is_empty())
                .collect(),
            epoch: 0,
            defect_mark: vec![0; n],
            positive_mark: vec![0; design.n_tests()],
            zero_state: vec![0; n],
            positive_tests: Vec::new(),
        }
    }

    /// `(|U0|, |U1|)` for the assignment whose defectives are listed
    /// (distinct, in range).
    pub fn count(&mut self, defectives: &[u32]) -> (usize, usize) {
        if self.epoch == u32::MAX {
            self.defect_mark.fill(0);
            self.positive_mark.fill(0);
            self.zero_state.fill(0);
            self.epoch = 0;
        }
        self.epoch += 1;
        let e = self.epoch;
        let d = self.design;

        self.positive_tests.clear();
        for &i in defectives {
            self.defect_mark[i as usize] = e;
            for &a in d.tests_of(i as usize) {
                if self.positive_mark[a as usize] != e {
                    self.positive_mark[a as usize] = e;
                    self.positive_tests.push(a);
                }
            }
        }

        let mut u0 = self
            .isolated
            .iter()
            .filter(|&&i| self.defect_mark[i as usize] != e)
            .count();
        let base = e as u64 * 2;
        for &a in &self.positive_tests {
            for &j in d.pool(a as usize) {
                let j = j as usize;
                if self.defect_mark[j] == e || self.zero_state[j] >= base {
                    continue;
                }
                let all_positive = d
                    .tests_of(j)
                    .iter()
                    .all(|&b| self.positive_mark[b as usize] == e);
                self.zero_state[j] = base + u64::from(!all_positive);
                if all_positive {
                    u0 += 1;
                }
            }
        }

        // every zero sharing a positive test with a defective was classified above
        let mut u1 = 0;
        for &i in defectives {
            let sure = d.tests_of(i as usize).iter().any(|&a| {
                d.pool(a as usize).iter().all(|&j| {
                    j == i
                        || (self.defect_mark[j as usize] != e
                            && self.zero_state[j as usize] == base + 1)
                })
            });
            if !sure {
                u1 += 1;
            }
        }
        (u0, u1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::designs::gen_poisson_poisson;
    use crate::rng::stream;
    use rand::Rng as _;

    fn path() -> PoolDesign {
        PoolDesign::from_pools(3, &[&[0, 1], &[1, 2]]).unwrap()
    }

    fn x(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    #[test]
    fn run_tests_examples() {
        assert_eq!(
            run_tests(&path(), &x("000")).unwrap().bits(),
            &[false, false]
        );
        assert_eq!(
            run_tests(&path(), &x("100")).unwrap().bits(),
            &[true, false]
        );
        let with_empty = PoolDesign::from_pools(2, &[&[], &[0]]).unwrap();
        assert_eq!(
            run_tests(&with_empty, &x("11")).unwrap().bits(),
            &[false, true]
        );
    }

    #[test]
    fn decode_hand_examples() {
        let r = decode_two_stage(&path(), &x("100")).unwrap();
        assert_eq!(r.sure_zeros, vec![1, 2]);
        assert_eq!(r.sure_ones, vec![0]);
        assert!(r.undetermined_zeros.is_empty() && r.undetermined_ones.is_empty());
        assert_eq!(r.total_tests, 2);

        let r = decode_two_stage(&path(), &x("110")).unwrap();
        assert!(r.sure_zeros.is_empty() && r.sure_ones.is_empty());
        assert_eq!(r.undetermined_zeros, vec![2]);
        assert_eq!(r.undetermined_ones, vec![0, 1]);
        assert_eq!(r.total_tests, 5);
    }

    #[test]
    fn all_zero_assignment() {
        let d = PoolDesign::from_pools(5, &[&[0, 1], &[1, 2], &[]]).unwrap();
        let r = decode_two_stage(&d, &Assignment::zeros(5)).unwrap();
        assert_eq!(r.sure_zeros, vec![0, 1, 2]);
        assert_eq!(r.undetermined_zeros, vec![3, 4]);
        assert_eq!(r.total_tests, 3 + 2);
        assert_eq!(
            count_undetermined(&d, &Assignment::zeros(5)).unwrap(),
            (2, 0)
        );
    }

    #[test]
    fn single_pool_all_ones() {
        for n in 2..6u32 {
            let all: Vec<u32> = (0..n).collect();
            let d = PoolDesign::from_pools(n as usize, &[&all]).unwrap();
            let r = decode_two_stage(&d, &Assignment::ones(n as usize)).unwrap();
            assert!(r.sure_ones.is_empty());
            assert_eq!(r.undetermined_ones.len(), n as usize);
            assert_eq!(
                count_undetermined(&d, &Assignment::ones(n as usize)).unwrap(),
                (0, n as usize)
            );
        }
        let d = PoolDesign::from_pools(1, &[&[0]]).unwrap();
        let r = decode_two_stage(&d, &x("1")).unwrap();
        assert_eq!(r.sure_ones, vec![0]);
        assert_eq!(count_undetermined(&d, &x("1")).unwrap(), (0, 0));
    }

    #[test]
    fn isolated_defective_is_undetermined() {
        let d = PoolDesign::from_pools(2, &[&[0]]).unwrap();
        let r = decode_two_stage(&d, &x("01")).unwrap();
        assert_eq!(r.undetermined_ones, vec![1]);
        assert_eq!(r.sure_zeros, vec![0]);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            decode_two_stage(&path(), &x("10")),
            Err(Error::DimensionMismatch {
                expected: 3,
                got: 2
            })
        ));
        assert!(run_tests(&path(), &x("1000")).is_err());
        assert!(count_undetermined(&path(), &x("1")).is_err());
    }

    #[test]
    fn fast_counts_match_full_decode() {
        let mut rng = stream(99, 0);
        for k in 0..10_000u64 {
            let n = rng.random_range(1..14usize);
            let m = rng.random_range(1..8usize);
            let l = rng
                .random_range(0.2..(m as f64).min(4.0) + 0.2)
                .min(m as f64);
            let d = gen_poisson_poisson(n, m, l, k).unwrap();
            let p: f64 = rng.random_range(0.05..0.95);
            let bits: Vec<bool> = (0..n).map(|_| rng.random_bool(p)).collect();
            let x = Assignment::new(bits);
            let full = decode_two_stage(&d, &x).unwrap();
            assert_eq!(
                count_undetermined(&d, &x).unwrap(),
                (full.undetermined_zeros.len(), full.undetermined_ones.len())
            );
            assert_eq!(
                full.sure_zeros.len()
                    + full.sure_ones.len()
                    + full.undetermined_zeros.len()
                    + full.undetermined_ones.len(),
                n
            );
        }
    }
}
