//! Correspondence assignment between two unlabeled projections of a rigid
//! body, and rigid-body membership tests.
//!
//! The first seven points of s1 are a fixed basis (roles R, Q, P, A, C, E, G
//! in index order); every ordered selection of seven s2 points is tried as
//! their counterpart. Each selection fixes the two-frame geometry, the
//! remaining points are scored by their distance to the predicted constraint
//! lines, and the bijection with the smallest total distance wins. The search
//! touches n!/(n-8)! ordered eight-point combinations, which is why a budget
//! guard is mandatory.

use serde::{Deserialize, Serialize};

use crate::epipolar::{line_residual, predict_from_basis};
use crate::error::{Error, Result};
use crate::focal::{locate_projected_focal, locate_with_quotients, FocalSolution, LocatorOptions};
use crate::frame::LabeledFrame;
use crate::geometry::Point2;
use crate::transfer::{basis_quotients, Quotients};

/// Scan/tolerance settings and the complexity budget for one match run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchOptions {
    /// Per-basis focal solve options. The default uses a coarser scan step
    /// than the standalone locator: the solve runs n!/(n-8)! times.
    pub locator: LocatorOptions,
    /// Upper bound on the n!/(n-8)! combination count.
    pub budget: u64,
    /// Worker threads for basis-selection evaluation; the reduction is
    /// order-independent, so any value yields identical results.
    pub threads: usize,
}

impl Default for MatchOptions {
    fn default() -> Self {
        Self {
            locator: LocatorOptions {
                scan_step: 0.1,
                reciprocal_step: 4e-3,
                ..LocatorOptions::default()
            },
            budget: 10_000_000,
            threads: 1,
        }
    }
}

/// Two equal-cardinality unlabeled point sets (n >= 8 each).
#[derive(Debug, Clone, PartialEq)]
pub struct MatchProblem {
    pub s1: Vec<Point2>,
    pub s2: Vec<Point2>,
    pub options: MatchOptions,
}

impl MatchProblem {
    pub fn new(s1: Vec<Point2>, s2: Vec<Point2>, options: MatchOptions) -> Result<Self> {
        if s1.len() != s2.len() {
            return Err(Error::InvalidInput(
                "point sets differ in cardinality".into(),
            ));
        }
        if s1.len() < 8 {
            return Err(Error::InvalidInput(
                "matching needs at least 8 points per set".into(),
            ));
        }
        Ok(Self { s1, s2, options })
    }

    /// The ordered eight-point combination count n!/(n-8)!.
    pub fn combination_count(&self) -> u128 {
        let n = self.s1.len() as u128;
        (n - 7..=n).product()
    }
}

/// Winning bijection with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// assignment[i] is the s2 index matched to s1[i].
    pub assignment: Vec<usize>,
    /// Sum of constraint-line residuals of the non-basis points.
    pub badness: f64,
    /// Ordered eight-point combinations examined.
    pub evaluated: u64,
    /// Badness of the second-best bijection (infinite if none was scored).
    pub runner_up_badness: f64,
}

/// Badness of one explicit bijection: the locator runs on the first seven
/// pairs and the remaining points accumulate their line residuals. Any
/// failure along the way maps to the infinite sentinel.
pub fn badness(assignment: &[usize], s1: &[Point2], s2: &[Point2], options: &MatchOptions) -> f64 {
    let n = s1.len();
    if assignment.len() != n || s2.len() != n || n < 8 || !is_bijection(assignment, n) {
        return f64::INFINITY;
    }
    let basis1: [Point2; 7] = std::array::from_fn(|i| s1[i]);
    let basis2: [Point2; 7] = std::array::from_fn(|i| s2[assignment[i]]);
    let Ok(quotients) = basis_quotients(&basis1) else {
        return f64::INFINITY;
    };
    let Ok(solution) = locate_with_quotients(&quotients, &basis2, &options.locator) else {
        return f64::INFINITY;
    };
    let mut total = 0.0;
    for i in 7..n {
        match predict_from_basis(s1[i], &basis1, &basis2, &solution) {
            Ok(line) => total += line_residual(s2[assignment[i]], &line),
            Err(_) => return f64::INFINITY,
        }
    }
    total
}

fn is_bijection(assignment: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    assignment
        .iter()
        .all(|&j| j < n && !std::mem::replace(&mut seen[j], true))
}

/// A scored bijection; orders by badness, ties by lexicographic assignment.
#[derive(Debug, Clone, PartialEq)]
struct Scored {
    badness: f64,
    assignment: Vec<usize>,
}

impl Scored {
    fn key(&self) -> (f64, &[usize]) {
        (self.badness, &self.assignment)
    }
}

/// Per-worker accumulator keeping the two best distinct bijections.
#[derive(Default)]
struct TopTwo {
    best: Option<Scored>,
    second: Option<Scored>,
}

impl TopTwo {
    fn offer(&mut self, s: Scored) {
        if !s.badness.is_finite() {
            return;
        }
        match &self.best {
            None => self.best = Some(s),
            Some(b) if s.key() < b.key() => {
                self.second = self.best.take();
                self.best = Some(s);
            }
            _ => match &self.second {
                None => self.second = Some(s),
                Some(r) if s.key() < r.key() => self.second = Some(s),
                _ => {}
            },
        }
    }

    fn merge(&mut self, other: TopTwo) {
        if let Some(b) = other.best {
            self.offer(b);
        }
        if let Some(r) = other.second {
            self.offer(r);
        }
    }
}

/// Exhaustive identity assignment. Deterministic for fixed inputs and
/// options, regardless of thread count.
pub fn match_identities(problem: &MatchProblem) -> Result<MatchResult> {
    let n = problem.s1.len();
    let required = problem.combination_count();
    if problem.options.budget < 1 || required > problem.options.budget as u128 {
        return Err(Error::BudgetExceeded {
            required,
            budget: problem.options.budget,
        });
    }
    let basis1: [Point2; 7] = std::array::from_fn(|i| problem.s1[i]);
    let quotients = basis_quotients(&basis1).map_err(|_| Error::NoValidAssignment)?;

    let threads = problem.options.threads.max(1).min(n);
    let ctx = SearchContext {
        problem,
        basis1: &basis1,
        quotients: &quotients,
    };
    let mut acc = TopTwo::default();
    let mut evaluated = 0u64;
    if threads == 1 {
        let (top, count) = scan_first_roles(&ctx, 0, n, 1);
        acc = top;
        evaluated = count;
    } else {
        let results: Vec<(TopTwo, u64)> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|w| {
                    let ctx = &ctx;
                    scope.spawn(move || scan_first_roles(ctx, w, n, threads))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("matcher worker panicked"))
                .collect()
        });
        for (top, count) in results {
            acc.merge(top);
            evaluated += count;
        }
    }

    let best = acc.best.ok_or(Error::NoValidAssignment)?;
    Ok(MatchResult {
        assignment: best.assignment,
        badness: best.badness,
        evaluated,
        runner_up_badness: acc.second.map_or(f64::INFINITY, |s| s.badness),
    })
}

/// Shared read-only context of one identity search.
struct SearchContext<'a> {
    problem: &'a MatchProblem,
    basis1: &'a [Point2; 7],
    quotients: &'a Quotients,
}

/// Evaluates every basis selection whose first role index j0 falls to this
/// worker (j0 % stride == worker).
fn scan_first_roles(ctx: &SearchContext, worker: usize, n: usize, stride: usize) -> (TopTwo, u64) {
    let mut top = TopTwo::default();
    let mut evaluated = 0u64;
    let mut selection = [0usize; 7];
    let mut used = vec![false; n];
    let mut j0 = worker;
    while j0 < n {
        selection[0] = j0;
        used[j0] = true;
        descend(ctx, &mut selection, &mut used, 1, &mut top, &mut evaluated);
        used[j0] = false;
        j0 += stride;
    }
    (top, evaluated)
}

fn descend(
    ctx: &SearchContext,
    selection: &mut [usize; 7],
    used: &mut [bool],
    depth: usize,
    top: &mut TopTwo,
    evaluated: &mut u64,
) {
    let n = ctx.problem.s1.len();
    if depth == 7 {
        *evaluated += (n - 7) as u64;
        if let Some(scored) = evaluate_selection(ctx, selection, used) {
            top.offer(scored);
        }
        return;
    }
    for j in 0..n {
        if used[j] {
            continue;
        }
        selection[depth] = j;
        used[j] = true;
        descend(ctx, selection, used, depth + 1, top, evaluated);
        used[j] = false;
    }
}

fn evaluate_selection(
    ctx: &SearchContext,
    selection: &[usize; 7],
    used: &[bool],
) -> Option<Scored> {
    let problem = ctx.problem;
    let n = problem.s1.len();
    let basis2: [Point2; 7] = std::array::from_fn(|i| problem.s2[selection[i]]);
    let solution = locate_with_quotients(ctx.quotients, &basis2, &problem.options.locator).ok()?;
    let rest2: Vec<usize> = (0..n).filter(|j| !used[*j]).collect();
    let m = n - 7;
    // residual of each remaining s1 point against each remaining s2 point
    let mut cost = vec![f64::INFINITY; m * m];
    for (i, s1_idx) in (7..n).enumerate() {
        if let Ok(line) = predict_from_basis(problem.s1[s1_idx], ctx.basis1, &basis2, &solution) {
            for (j, &s2_idx) in rest2.iter().enumerate() {
                cost[i * m + j] = line_residual(problem.s2[s2_idx], &line);
            }
        }
    }
    let rest_assignment = assign_rest(&cost, m)?;
    let mut total = 0.0;
    let mut assignment = Vec::with_capacity(n);
    assignment.extend_from_slice(selection);
    for (i, &j) in rest_assignment.iter().enumerate() {
        total += cost[i * m + j];
        assignment.push(rest2[j]);
    }
    if !total.is_finite() {
        return None;
    }
    Some(Scored {
        badness: total,
        assignment,
    })
}

/// One-to-one assignment on a small cost matrix: greedy smallest-cost choice
/// with deterministic tie-breaks, then pairwise-swap refinement by total
/// cost. Exact for a single remaining point (n = 8).
fn assign_rest(cost: &[f64], m: usize) -> Option<Vec<usize>> {
    if m == 0 {
        return Some(Vec::new());
    }
    let mut row_taken = vec![false; m];
    let mut col_taken = vec![false; m];
    let mut pick = vec![usize::MAX; m];
    for _ in 0..m {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..m {
            if row_taken[i] {
                continue;
            }
            for j in 0..m {
                if col_taken[j] {
                    continue;
                }
                let c = cost[i * m + j];
                if best.is_none_or(|(bc, bi, bj)| (c, i, j) < (bc, bi, bj)) {
                    best = Some((c, i, j));
                }
            }
        }
        let (c, i, j) = best?;
        if !c.is_finite() {
            return None;
        }
        pick[i] = j;
        row_taken[i] = true;
        col_taken[j] = true;
    }
    // pairwise swap refinement until stable
    let mut changed = true;
    let mut rounds = 0;
    while changed && rounds < 16 {
        changed = false;
        rounds += 1;
        for i1 in 0..m {
            for i2 in (i1 + 1)..m {
                let (j1, j2) = (pick[i1], pick[i2]);
                let current = cost[i1 * m + j1] + cost[i2 * m + j2];
                let swapped = cost[i1 * m + j2] + cost[i2 * m + j1];
                if swapped < current {
                    pick[i1] = j2;
                    pick[i2] = j1;
                    changed = true;
                }
            }
        }
    }
    Some(pick)
}

/// Tests whether a candidate correspondence (frame-1 image, frame-2 image)
/// is consistent with the rigid body defined by seven labeled pairs: its
/// frame-2 image must fall within `tol` of the predicted line. Necessary,
/// not sufficient — displacement along the line is invisible.
pub fn rigid_membership(
    frame1: &LabeledFrame,
    frame2: &LabeledFrame,
    candidate: (Point2, Point2),
    tol: f64,
    options: &LocatorOptions,
) -> Result<(bool, f64)> {
    let solution: FocalSolution = locate_projected_focal(frame1, frame2, options)?;
    let line = predict_from_basis(candidate.0, &frame1.basis()?, &frame2.basis()?, &solution)?;
    let residual = line_residual(candidate.1, &line);
    Ok((residual <= tol, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::BASIS_LABELS;
    use crate::scene::{project, random_rigid_scene};

    fn frames_for_seed(
        points: usize,
        seed: u64,
    ) -> (Vec<Point2>, Vec<Point2>, LabeledFrame, LabeledFrame) {
        let (scene, cam1, cam2) = random_rigid_scene(points, seed).unwrap();
        let f1 = project(&scene, &cam1).unwrap();
        let f2 = project(&scene, &cam2).unwrap();
        (f1.positions(), f2.positions(), f1, f2)
    }

    #[test]
    fn identity_assignment_wins_when_unshuffled() {
        let (s1, s2, _, _) = frames_for_seed(8, 31);
        let problem = MatchProblem::new(s1, s2, MatchOptions::default()).unwrap();
        let result = match_identities(&problem).unwrap();
        assert_eq!(result.assignment, vec![0, 1, 2, 3, 4, 5, 6, 7]);
        assert!(result.badness <= 1e-6);
        assert_eq!(result.evaluated, 40320);
    }

    #[test]
    fn shuffle_is_recovered() {
        let (s1, s2, _, _) = frames_for_seed(8, 37);
        // known permutation: s2_shuffled[k] = s2[perm[k]], so the truth map
        // s1[i] -> s2[i] becomes i -> position of i in perm
        let perm = [5usize, 2, 7, 0, 3, 6, 1, 4];
        let shuffled: Vec<Point2> = perm.iter().map(|&k| s2[k]).collect();
        let mut expected = vec![0usize; 8];
        for (pos, &orig) in perm.iter().enumerate() {
            expected[orig] = pos;
        }
        let problem = MatchProblem::new(s1, shuffled, MatchOptions::default()).unwrap();
        let result = match_identities(&problem).unwrap();
        assert_eq!(result.assignment, expected);
        assert!(result.badness <= 1e-6);
    }

    #[test]
    fn threading_does_not_change_the_result() {
        let (s1, s2, _, _) = frames_for_seed(8, 41);
        let mut options = MatchOptions::default();
        let single =
            match_identities(&MatchProblem::new(s1.clone(), s2.clone(), options).unwrap()).unwrap();
        options.threads = 3;
        let multi = match_identities(&MatchProblem::new(s1, s2, options).unwrap()).unwrap();
        assert_eq!(single, multi);
    }

    #[test]
    fn budget_guard_fires_upfront() {
        let (s1, s2, _, _) = frames_for_seed(8, 31);
        let options = MatchOptions {
            budget: 1000,
            ..MatchOptions::default()
        };
        let problem = MatchProblem::new(s1, s2, options).unwrap();
        match match_identities(&problem) {
            Err(Error::BudgetExceeded { required, budget }) => {
                assert_eq!(required, 40320);
                assert_eq!(budget, 1000);
            }
            other => panic!("expected BudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn twelve_points_exceed_a_small_budget() {
        // 12!/4! = 19,958,400 combinations
        let (s1, s2, _, _) = frames_for_seed(12, 43);
        let problem = MatchProblem::new(s1, s2, MatchOptions::default()).unwrap();
        assert_eq!(problem.combination_count(), 19_958_400);
        match match_identities(&problem) {
            Err(Error::BudgetExceeded { required, .. }) => assert_eq!(required, 19_958_400),
            other => panic!("expected BudgetExceeded, got {other:?}"),
        }
    }

    #[test]
    fn badness_of_true_assignment_is_tiny_and_single_term() {
        let (s1, s2, _, _) = frames_for_seed(8, 47);
        let identity: Vec<usize> = (0..8).collect();
        let options = MatchOptions::default();
        let b = badness(&identity, &s1, &s2, &options);
        assert!(b <= 1e-6, "badness {b}");
        // wrong eighth pairing equals that single point's residual: compare
        // against a direct prediction
        let basis1: [Point2; 7] = std::array::from_fn(|i| s1[i]);
        let basis2: [Point2; 7] = std::array::from_fn(|i| s2[i]);
        let q = basis_quotients(&basis1).unwrap();
        let sol = locate_with_quotients(&q, &basis2, &options.locator).unwrap();
        let line = predict_from_basis(s1[7], &basis1, &basis2, &sol).unwrap();
        // swap in a different s2 point for the eighth slot: use s2[0]..
        // not a bijection, so instead displace: build s2' with the eighth
        // point replaced by an off-line position
        let mut s2_mod = s2.clone();
        s2_mod[7] = Point2::new(s2[7].x + 0.3, s2[7].y - 0.2);
        let b_mod = badness(&identity, &s1, &s2_mod, &options);
        let expected = line_residual(s2_mod[7], &line);
        assert!((b_mod - expected).abs() < 1e-9);
    }

    #[test]
    fn membership_is_necessary_not_sufficient() {
        // any image placed exactly on the predicted line passes, even though
        // no rigid 3D point need sit behind it
        let (scene, cam1, cam2) = random_rigid_scene(8, 61).unwrap();
        let f1 = project(&scene, &cam1).unwrap();
        let f2 = project(&scene, &cam2).unwrap();
        let z1 = f1.require("Z1").unwrap();
        let options = LocatorOptions::default();
        let basis1 = f1.basis().unwrap();
        let basis2 = f2.basis().unwrap();
        let q = basis_quotients(&basis1).unwrap();
        let sol = locate_with_quotients(&q, &basis2, &options).unwrap();
        let line = predict_from_basis(z1, &basis1, &basis2, &sol).unwrap();
        // slide far along the line from the true observation
        let z2 = f2.require("Z1").unwrap();
        let along = Point2::new(z2.x - 0.8 * line.line.b, z2.y + 0.8 * line.line.a);
        let (ok, residual) = rigid_membership(&f1, &f2, (z1, along), 1e-6, &options).unwrap();
        assert!(ok, "on-line residual {residual}");
    }

    #[test]
    fn membership_accepts_on_body_and_rejects_moved_points() {
        let (scene, cam1, cam2) = random_rigid_scene(8, 53).unwrap();
        let f1 = project(&scene, &cam1).unwrap();
        let f2 = project(&scene, &cam2).unwrap();
        let mut b1 = LabeledFrame::new("b1");
        let mut b2 = LabeledFrame::new("b2");
        for label in BASIS_LABELS {
            b1.insert(label, f1.require(label).unwrap()).unwrap();
            b2.insert(label, f2.require(label).unwrap()).unwrap();
        }
        let z1 = f1.require("Z1").unwrap();
        let z2 = f2.require("Z1").unwrap();
        let options = LocatorOptions::default();
        let (ok, residual) = rigid_membership(&b1, &b2, (z1, z2), 1e-6, &options).unwrap();
        assert!(ok, "on-body residual {residual}");
        // move the 3D point independently between frames: reuse z1 but pair
        // it with the image of a displaced point
        let moved = crate::geometry::Point3::new(0.4, -0.35, 0.3);
        let z2_off = cam2.project(moved).unwrap();
        let (ok, residual) = rigid_membership(&b1, &b2, (z1, z2_off), 1e-6, &options).unwrap();
        assert!(!ok, "off-body residual {residual}");
    }
}
