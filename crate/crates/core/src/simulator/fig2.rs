//! The four-line motivating program and its six-input trace.
//!
//! ```c
//! void foo(int a, int b) {
//!   if (a > 10)          // line 3 reached when a > 10
//!     if (a > 20)        // line 4 reached when a > 20
//!       if (b > 10)      // line 5 reached when a > 20 && b > 10
//!         bug();
//! }                      // line 6 reached on every path
//! ```
//!
//! Lines 3, 4, 5 and 6 are coverage features 0..4. Replaying the trace
//! through the Thompson scheduler reproduces the published (alpha, beta, pbar)
//! table, except for the cells listed by [`compare`] where the published
//! table contradicts its own update rule.

use crate::bandit::Variant;
use crate::coverage::{CoverageMap, InputId, InputRecord, InterestingPolicy};
use crate::schedulers::{Scheduler, TScheduler};

use super::{CfgTarget, Edge};

pub const NODES: [&str; 4] = ["Line 3", "Line 4", "Line 5", "Line 6"];

/// `(a, b)` arguments of the six inputs, t = 1..=6.
pub const INPUTS: [(i32, i32); 6] = [(15, 0), (25, 0), (0, 15), (0, 25), (25, 5), (25, 25)];

/// Published values, `[t][node] = (alpha, beta, pbar)`.
pub const REFERENCE: [[(u32, u32, f64); 4]; 7] = [
    [(1, 1, 0.25), (1, 1, 0.25), (1, 1, 0.25), (1, 1, 0.25)],
    [(2, 1, 0.29), (1, 1, 0.21), (1, 1, 0.21), (2, 1, 0.29)],
    [(3, 1, 0.28), (2, 1, 0.25), (1, 1, 0.19), (3, 1, 0.28)],
    [(3, 1, 0.30), (2, 1, 0.26), (1, 1, 0.20), (3, 2, 0.24)],
    [(3, 1, 0.31), (2, 1, 0.28), (1, 1, 0.21), (3, 3, 0.21)],
    [(3, 2, 0.29), (2, 2, 0.24), (1, 1, 0.24), (3, 4, 0.24)],
    [(4, 2, 0.27), (3, 2, 0.25), (2, 1, 0.27), (3, 5, 0.21)],
];

/// Allowed |pbar - published| per cell.
pub const PBAR_TOLERANCE: f64 = 0.005;

/// Hit counts of one execution of `foo(a, b)`.
pub fn coverage(a: i32, b: i32) -> CoverageMap {
    let line3 = a > 10;
    let line4 = a > 20;
    let line5 = line4 && b > 10;
    CoverageMap::new(vec![line3 as u32, line4 as u32, line5 as u32, 1])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub t: usize,
    pub node: &'static str,
    pub alpha: f64,
    pub beta: f64,
    pub pbar: f64,
}

/// Rows for t = 0..=6, four nodes each, in (t, node) order.
pub fn replay() -> Vec<Row> {
    let mut sched = TScheduler::new(Variant::RareMinus, NODES.len(), 0).expect("k > 0");
    let mut rows = Vec::with_capacity(28);
    let mut emit = |t: usize, s: &TScheduler| {
        let post = s.posterior();
        for (k, (node, pbar)) in NODES.iter().zip(post.pbar()).enumerate() {
            rows.push(Row {
                t,
                node,
                alpha: post.alpha()[k],
                beta: post.beta()[k],
                pbar,
            });
        }
    };
    emit(0, &sched);
    for (i, &(a, b)) in INPUTS.iter().enumerate() {
        let cov = coverage(a, b);
        let interesting = sched
            .global()
            .classify(&cov, InterestingPolicy::NewFeature)
            .expect("dimensions match");
        let input = InputRecord::new(InputId(i as u64), 1, 1.0, cov.features());
        sched.observe(&input, &cov, interesting).expect("dimensions match");
        emit(i + 1, &sched);
    }
    rows
}

/// A cell where the replay disagrees with [`REFERENCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct Mismatch {
    pub t: usize,
    pub node: &'static str,
    pub field: &'static str,
    pub expected: f64,
    pub actual: f64,
}

pub fn compare(rows: &[Row]) -> Vec<Mismatch> {
    let mut out = Vec::new();
    for r in rows {
        let k = NODES.iter().position(|n| *n == r.node).expect("known node");
        let (alpha, beta, pbar) = REFERENCE[r.t][k];
        let mut check = |field, expected: f64, actual: f64, tol: f64| {
            if (expected - actual).abs() > tol {
                out.push(Mismatch {
                    t: r.t,
                    node: r.node,
                    field,
                    expected,
                    actual,
                });
            }
        };
        check("alpha", alpha.into(), r.alpha, 0.0);
        check("beta", beta.into(), r.beta, 0.0);
        check("pbar", pbar, r.pbar, PBAR_TOLERANCE);
    }
    out
}

/// `t,node,alpha,beta,pbar` with pbar to two decimals.
pub fn to_csv(rows: &[Row]) -> String {
    let mut s = String::from("t,node,alpha,beta,pbar\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{:.2}\n",
            r.t, r.node, r.alpha, r.beta, r.pbar
        ));
    }
    s
}

/// The program's CFG as a fuzzing target: lines 3 and 6 are roots, line 4
/// needs line 3 and line 5 needs line 4. Non-root edges unlock with `p`.
pub fn target(p: f64) -> CfgTarget {
    CfgTarget::new(vec![
        Edge::new(0, vec![], 1.0),
        Edge::new(1, vec![0], p),
        Edge::new(2, vec![1], p),
        Edge::new(3, vec![], 1.0),
    ])
    .expect("static target is valid")
}
