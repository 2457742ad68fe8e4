use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::simcore::Path;

/// A set of reals, for first-entry times.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    Points(Vec<f64>),
    AtOrBelow(f64),
    AtOrAbove(f64),
    /// Complement of the open interval (lo, hi).
    Outside {
        lo: f64,
        hi: f64,
    },
}

impl Region {
    pub fn contains(&self, x: f64) -> bool {
        match self {
            Region::Points(pts) => pts.contains(&x),
            Region::AtOrBelow(l) => x <= *l,
            Region::AtOrAbove(l) => x >= *l,
            Region::Outside { lo, hi } => x <= *lo || x >= *hi,
        }
    }
}

/// A rule deciding, from the path observed so far, whether to stop.
#[derive(Clone, Debug, PartialEq)]
pub enum StoppingRule {
    FirstEntry(Region),
    FixedTime(usize),
    /// Stop as soon as either rule stops.
    Min(Box<StoppingRule>, Box<StoppingRule>),
    /// Stop once both rules have stopped.
    Max(Box<StoppingRule>, Box<StoppingRule>),
}

impl StoppingRule {
    pub fn min(self, other: StoppingRule) -> Self {
        StoppingRule::Min(Box::new(self), Box::new(other))
    }

    pub fn max(self, other: StoppingRule) -> Self {
        StoppingRule::Max(Box::new(self), Box::new(other))
    }

    /// Whether the rule has stopped by the last index of `observed`.
    pub fn has_stopped(&self, observed: &[f64]) -> bool {
        match self {
            StoppingRule::FirstEntry(r) => observed.iter().any(|&x| r.contains(x)),
            StoppingRule::FixedTime(n) => observed.len() > *n,
            StoppingRule::Min(a, b) => a.has_stopped(observed) || b.has_stopped(observed),
            StoppingRule::Max(a, b) => a.has_stopped(observed) && b.has_stopped(observed),
        }
    }

    fn first_index(&self, values: &[f64]) -> Option<usize> {
        match self {
            StoppingRule::FirstEntry(r) => values.iter().position(|&x| r.contains(x)),
            StoppingRule::FixedTime(n) => (*n < values.len()).then_some(*n),
            StoppingRule::Min(a, b) => match (a.first_index(values), b.first_index(values)) {
                (Some(i), Some(j)) => Some(i.min(j)),
                (i, j) => i.or(j),
            },
            StoppingRule::Max(a, b) => Some(a.first_index(values)?.max(b.first_index(values)?)),
        }
    }
}

/// Smallest index at which the rule stops, or `None` if it never does on
/// this finite path.
pub fn stopping_time(rule: &StoppingRule, path: &Path) -> Option<usize> {
    rule.first_index(path.values())
}

/// The stopped path X_{N ∧ n}.
pub fn stopped_path(path: &Path, rule: &StoppingRule) -> Path {
    match stopping_time(rule, path) {
        None => path.clone(),
        Some(n) => {
            let v = path.values()[n];
            let values = path
                .values()
                .iter()
                .enumerate()
                .map(|(i, &x)| if i <= n { x } else { v })
                .collect();
            Path::from_parts(path.times().to_vec(), values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discrete::simple_walk;
    use crate::simcore::{derive_stream, MomentAccumulator};
    use alloc::vec;
    use proptest::prelude::*;

    #[test]
    fn entry_at_start() {
        let p = Path::on_integer_grid(vec![0.0, 1.0, 0.0]).unwrap();
        assert_eq!(
            stopping_time(&StoppingRule::FirstEntry(Region::Points(vec![0.0])), &p),
            Some(0)
        );
        assert_eq!(
            stopping_time(&StoppingRule::FirstEntry(Region::AtOrAbove(5.0)), &p),
            None
        );
        assert_eq!(stopping_time(&StoppingRule::FixedTime(3), &p), None);
    }

    #[test]
    fn walk_stopped_at_zero_is_absorbed() {
        // Started from 1, stopped on hitting 0: nonnegative, and constant 0
        // after stopping.
        let rule = StoppingRule::FirstEntry(Region::Points(vec![0.0]));
        let mut stopped = 0;
        for id in 0..2000 {
            let w = simple_walk(&mut derive_stream(6, id), 2000).map(|x| x + 1.0);
            let s = stopped_path(&w, &rule);
            assert!(s.values().iter().all(|&x| x >= 0.0));
            if let Some(n) = stopping_time(&rule, &w) {
                stopped += 1;
                assert!(s.values()[n..].iter().all(|&x| x == 0.0));
            }
        }
        // P[τ_0 > 2000] ~ 0.018 from 1, so nearly every path stops.
        assert!(stopped > 1900);
    }

    #[test]
    fn optional_stopping_at_bounded_rule() {
        let rule = StoppingRule::FirstEntry(Region::Outside { lo: -3.0, hi: 5.0 })
            .min(StoppingRule::FixedTime(40));
        let mut acc = MomentAccumulator::default();
        for id in 0..100_000 {
            let w = simple_walk(&mut derive_stream(7, id), 60);
            let n = stopping_time(&rule, &w).unwrap();
            assert!(n <= 40);
            acc.push(w.values()[n]);
        }
        assert!(acc.estimate().unwrap().covers(0.0, 0.0));
    }

    fn rule_strategy() -> impl Strategy<Value = StoppingRule> {
        let leaf = prop_oneof![
            (-3i32..3).prop_map(|l| StoppingRule::FirstEntry(Region::AtOrBelow(f64::from(l)))),
            (-3i32..3).prop_map(|l| StoppingRule::FirstEntry(Region::AtOrAbove(f64::from(l)))),
            (-3i32..3).prop_map(|l| StoppingRule::FirstEntry(Region::Points(vec![f64::from(l)]))),
            (0usize..25).prop_map(StoppingRule::FixedTime),
        ];
        leaf.prop_recursive(3, 12, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(a, b)| a.min(b)),
                (inner.clone(), inner).prop_map(|(a, b)| a.max(b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn decisions_never_look_ahead(rule in rule_strategy(), steps in proptest::collection::vec(prop::bool::ANY, 1..30)) {
            let mut xs = vec![0.0];
            for up in steps {
                let last = *xs.last().unwrap();
                xs.push(last + if up { 1.0 } else { -1.0 });
            }
            let path = Path::on_integer_grid(xs.clone()).unwrap();
            let tau = stopping_time(&rule, &path);
            for k in 0..xs.len() {
                let prefix = &xs[..=k];
                prop_assert_eq!(rule.has_stopped(prefix), tau.is_some_and(|t| t <= k));
                // Same decision on the truncated path itself.
                let short = Path::on_integer_grid(prefix.to_vec()).unwrap();
                prop_assert_eq!(stopping_time(&rule, &short).is_some_and(|t| t <= k), rule.has_stopped(prefix));
            }
        }

        #[test]
        fn min_with_fixed_time_is_bounded(level in -5i32..5, n in 0usize..20) {
            let rule = StoppingRule::FirstEntry(Region::AtOrAbove(f64::from(level))).min(StoppingRule::FixedTime(n));
            let path = Path::on_integer_grid((0..30).map(|i| f64::from(i % 3)).collect()).unwrap();
            prop_assert!(stopping_time(&rule, &path).unwrap() <= n);
        }
    }
}
