//! Exhaustive branch-and-bound search for optimal difference triangle sets.
//!
//! Rulers are placed one at a time in strictly increasing order of length
//! (lengths are themselves differences, hence distinct). Each ruler is
//! normalized and kept only if it is not larger than its mirror image, so
//! every DTS is visited once up to ruler permutation and per-ruler
//! reflection. A bitset of used distances drives the pruning.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::bounds::{slen_bound_any, trivial_scope_bound};
use super::{DifferenceTriangleSet, Ruler};
use crate::error::{invalid, Result};

/// Largest scope cap accepted by [`search_optimal`].
pub const MAX_SCOPE_CAP: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MinScope,
    MinSumOfLengths,
    /// Minimize scope first, then report every scope at which the smallest
    /// attainable sum-of-lengths strictly improves.
    Pareto,
}

#[derive(Debug, Clone)]
pub struct SearchParams {
    pub rulers: usize,
    pub degree: usize,
    pub objective: Objective,
    pub scope_cap: u64,
    pub time_budget: Option<Duration>,
    /// Return every optimal DTS rather than the first in canonical order.
    pub find_all: bool,
}

impl SearchParams {
    pub fn new(rulers: usize, degree: usize, objective: Objective, scope_cap: u64) -> Self {
        SearchParams {
            rulers,
            degree,
            objective,
            scope_cap,
            time_budget: None,
            find_all: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    /// The search space below the cap was exhausted; results are optimal.
    Complete,
    /// The time budget ran out; results are whatever was found.
    TimedOut,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    /// Canonical-form solutions, sorted.
    pub solutions: Vec<DifferenceTriangleSet>,
    /// `(scope, sum_of_lengths)` points attained by the solutions.
    pub front: Vec<(i64, i64)>,
    pub status: SearchStatus,
    /// No DTS exists within the cap, established by exhaustion.
    pub proven_infeasible: bool,
}

pub fn search_optimal(params: &SearchParams) -> Result<SearchOutcome> {
    let (l, m) = (params.rulers, params.degree);
    if l == 0 || m == 0 {
        return invalid("search needs L >= 1 and M >= 1");
    }
    let trivial = trivial_scope_bound(l as u64, m as u64);
    if params.scope_cap < trivial || params.scope_cap > MAX_SCOPE_CAP {
        return invalid(format!(
            "scope cap {} outside [{trivial}, {MAX_SCOPE_CAP}]",
            params.scope_cap
        ));
    }
    let ctx = Context {
        l,
        m,
        deadline: params.time_budget.map(|b| Instant::now() + b),
        stop: AtomicBool::new(false),
    };
    match params.objective {
        Objective::MinScope => min_scope(&ctx, trivial, params.scope_cap, params.find_all),
        Objective::MinSumOfLengths => min_slen(&ctx, params.scope_cap, params.find_all),
        Objective::Pareto => pareto(&ctx, trivial, params.scope_cap, params.find_all),
    }
}

fn min_scope(ctx: &Context, from: u64, cap: u64, find_all: bool) -> Result<SearchOutcome> {
    for s in from..=cap {
        let run = ctx.explore(s, true, None, find_all);
        if !run.complete {
            return Ok(outcome(run.solutions, SearchStatus::TimedOut));
        }
        if !run.solutions.is_empty() {
            let sols = if find_all { run.solutions } else { first_only(run.solutions) };
            return Ok(outcome(sols, SearchStatus::Complete));
        }
    }
    Ok(infeasible())
}

fn min_slen(ctx: &Context, cap: u64, find_all: bool) -> Result<SearchOutcome> {
    let best = AtomicU64::new(u64::MAX);
    let run = ctx.explore(cap, false, Some(&best), find_all);
    let status = if run.complete { SearchStatus::Complete } else { SearchStatus::TimedOut };
    if run.solutions.is_empty() {
        return Ok(if run.complete { infeasible() } else { outcome(vec![], status) });
    }
    let min = run.solutions.iter().map(|s| slen_of(s)).min().unwrap();
    let sols: Vec<_> = run.solutions.into_iter().filter(|s| slen_of(s) == min).collect();
    let sols = if find_all { sols } else { first_only(sols) };
    Ok(outcome(sols, status))
}

fn pareto(ctx: &Context, from: u64, cap: u64, find_all: bool) -> Result<SearchOutcome> {
    let mut solutions = Vec::new();
    let mut best_slen = u64::MAX;
    let rest_bound = slen_bound_any(ctx.l as u64 - 1, ctx.m as u64);
    let mut seen_any = false;
    for s in from..=cap {
        if best_slen != u64::MAX && s + rest_bound >= best_slen {
            break;
        }
        // strict improvement only: prune anything not below the current best
        let bound = AtomicU64::new(best_slen.saturating_sub(1));
        let run = ctx.explore(s, true, Some(&bound), find_all);
        let found: Vec<_> = {
            let min = run.solutions.iter().map(|x| slen_of(x)).min();
            match min {
                Some(min) if min < best_slen => {
                    best_slen = min;
                    run.solutions.into_iter().filter(|x| slen_of(x) == min).collect()
                }
                _ => Vec::new(),
            }
        };
        if !found.is_empty() {
            seen_any = true;
            solutions.extend(if find_all { found } else { first_only(found) });
        }
        if !run.complete {
            return Ok(outcome(solutions, SearchStatus::TimedOut));
        }
    }
    if !seen_any {
        return Ok(infeasible());
    }
    Ok(outcome(solutions, SearchStatus::Complete))
}

fn slen_of(rulers: &[Vec<i64>]) -> u64 {
    rulers.iter().map(|r| *r.last().unwrap() as u64).sum()
}

fn first_only(mut sols: Vec<Vec<Vec<i64>>>) -> Vec<Vec<Vec<i64>>> {
    sols.sort();
    sols.truncate(1);
    sols
}

fn infeasible() -> SearchOutcome {
    SearchOutcome {
        solutions: Vec::new(),
        front: Vec::new(),
        status: SearchStatus::Complete,
        proven_infeasible: true,
    }
}

fn outcome(mut raw: Vec<Vec<Vec<i64>>>, status: SearchStatus) -> SearchOutcome {
    raw.sort();
    raw.dedup();
    let solutions: Vec<DifferenceTriangleSet> = raw
        .into_iter()
        .map(|rs| {
            let rulers = rs.into_iter().map(|r| Ruler::new(r).expect("search emits valid rulers"));
            DifferenceTriangleSet::validate(rulers.collect()).expect("search emits valid DTSs")
        })
        .collect();
    let mut front: Vec<(i64, i64)> = solutions
        .iter()
        .map(|d| (d.scope(), d.sum_of_lengths()))
        .collect();
    front.sort_unstable();
    front.dedup();
    SearchOutcome { solutions, front, status, proven_infeasible: false }
}

struct Context {
    l: usize,
    m: usize,
    deadline: Option<Instant>,
    stop: AtomicBool,
}

struct Run {
    solutions: Vec<Vec<Vec<i64>>>,
    complete: bool,
}

impl Context {
    /// Enumerates DTSs with every length at most `cap` (exactly `cap` for the
    /// longest ruler when `exact` is set). With `best` supplied, branches that
    /// cannot reach a sum-of-lengths `<= best` are cut and `best` tightens as
    /// solutions are found.
    fn explore(&self, cap: u64, exact: bool, best: Option<&AtomicU64>, find_all: bool) -> Run {
        if self.deadline.is_some_and(|d| Instant::now() >= d) {
            self.stop.store(true, Ordering::Relaxed);
        }
        if self.stop.load(Ordering::Relaxed) {
            return Run { solutions: Vec::new(), complete: false };
        }
        let firsts = {
            let mut w = Walker::new(self, cap, exact, best, true);
            w.collect_first_rulers();
            w.firsts
        };
        let results: Vec<(Vec<Vec<Vec<i64>>>, bool)> = firsts
            .into_par_iter()
            .map(|first| {
                let mut w = Walker::new(self, cap, exact, best, find_all);
                w.seed(&first);
                w.ruler(1, first[self.m] as u64 + 1, first[self.m] as u64);
                (w.found, w.complete)
            })
            .collect();
        let complete = results.iter().all(|r| r.1) && !self.stop.load(Ordering::Relaxed);
        let mut solutions = Vec::new();
        for (found, _) in results {
            if !find_all && !solutions.is_empty() {
                break;
            }
            solutions.extend(found);
        }
        Run { solutions, complete }
    }
}

struct Walker<'a> {
    ctx: &'a Context,
    cap: u64,
    exact: bool,
    best: Option<&'a AtomicU64>,
    find_all: bool,
    used: Vec<u64>,
    rulers: Vec<Vec<i64>>,
    marks: Vec<i64>,
    found: Vec<Vec<Vec<i64>>>,
    firsts: Vec<Vec<i64>>,
    collecting_firsts: bool,
    nodes: u64,
    complete: bool,
}

impl<'a> Walker<'a> {
    fn new(
        ctx: &'a Context,
        cap: u64,
        exact: bool,
        best: Option<&'a AtomicU64>,
        find_all: bool,
    ) -> Self {
        Walker {
            ctx,
            cap,
            exact,
            best,
            find_all,
            used: vec![0; cap as usize / 64 + 1],
            rulers: Vec::with_capacity(ctx.l),
            marks: vec![0; ctx.m + 1],
            found: Vec::new(),
            firsts: Vec::new(),
            collecting_firsts: false,
            nodes: 0,
            complete: true,
        }
    }

    #[inline]
    fn is_used(&self, d: u64) -> bool {
        self.used[(d / 64) as usize] >> (d % 64) & 1 == 1
    }

    #[inline]
    fn toggle(&mut self, d: u64) {
        self.used[(d / 64) as usize] ^= 1 << (d % 64);
    }

    fn collect_first_rulers(&mut self) {
        self.collecting_firsts = true;
        self.ruler(0, self.ctx.m as u64, 0);
    }

    fn seed(&mut self, first: &[i64]) {
        for (i, a) in first.iter().enumerate() {
            for b in &first[i + 1..] {
                self.toggle((b - a) as u64);
            }
        }
        self.rulers.push(first.to_vec());
    }

    fn should_stop(&mut self) -> bool {
        if !self.complete {
            return true;
        }
        if !self.find_all && !self.found.is_empty() {
            return true;
        }
        self.nodes += 1;
        if self.nodes.is_multiple_of(4096) {
            if self.ctx.stop.load(Ordering::Relaxed) {
                self.complete = false;
                return true;
            }
            if let Some(deadline) = self.ctx.deadline {
                if Instant::now() >= deadline {
                    self.ctx.stop.store(true, Ordering::Relaxed);
                    self.complete = false;
                    return true;
                }
            }
        }
        false
    }

    /// Lower bound on the lengths of `count` more rulers, all longer than `after`.
    fn remaining_lengths_bound(&self, count: usize, after: u64) -> Option<u64> {
        let mut sum = 0;
        let mut need = count;
        let mut d = after + 1;
        while need > 0 {
            if d > self.cap {
                return None;
            }
            if !self.is_used(d) {
                sum += d;
                need -= 1;
            }
            d += 1;
        }
        Some(sum)
    }

    fn free_distances(&self) -> u64 {
        let mut free = self.cap;
        for d in 1..=self.cap {
            if self.is_used(d) {
                free -= 1;
            }
        }
        free
    }

    /// Places ruler `idx` with length at least `min_len`.
    fn ruler(&mut self, idx: usize, min_len: u64, partial_slen: u64) {
        let (l, m) = (self.ctx.l, self.ctx.m);
        if idx == l {
            self.record();
            return;
        }
        if self.collecting_firsts && idx == 1 {
            self.firsts.push(self.rulers[0].clone());
            return;
        }
        let per_ruler = (m * (m + 1) / 2) as u64;
        if self.free_distances() < per_ruler * (l - idx) as u64 {
            return;
        }
        let last = idx == l - 1;
        let lo = if self.exact && last { self.cap.max(min_len) } else { min_len };
        // the longest ruler must reach the cap exactly, so earlier ones stay below it
        let hi = if self.exact && !last { self.cap - 1 } else { self.cap };
        for len in lo..=hi {
            if self.should_stop() {
                return;
            }
            if self.is_used(len) {
                continue;
            }
            if let Some(best) = self.best {
                let rest = if self.exact && !last {
                    // the final ruler has length exactly cap
                    match self.remaining_lengths_bound(l - idx - 2, len) {
                        Some(r) if !self.is_used(self.cap) => r + self.cap,
                        _ => return,
                    }
                } else {
                    match self.remaining_lengths_bound(l - idx - 1, len) {
                        Some(r) => r,
                        None => return,
                    }
                };
                if partial_slen + len + rest > best.load(Ordering::Relaxed) {
                    return;
                }
            }
            self.toggle(len);
            self.marks[0] = 0;
            self.marks[m] = len as i64;
            self.interior(idx, 1, len, partial_slen + len);
            self.toggle(len);
        }
    }

    fn interior(&mut self, idx: usize, pos: usize, len: u64, slen: u64) {
        let m = self.ctx.m;
        if pos == m {
            // keep the ruler only if it is not larger than its reflection
            let marks = &self.marks;
            let mirror: Vec<i64> = marks.iter().rev().map(|x| len as i64 - x).collect();
            if marks.as_slice() > mirror.as_slice() {
                return;
            }
            // later rulers reuse the mark buffer; the caller still reads it
            let saved = self.marks.clone();
            self.rulers.push(saved.clone());
            self.ruler(idx + 1, len + 1, slen);
            self.rulers.pop();
            self.marks = saved;
            return;
        }
        let prev = self.marks[pos - 1];
        let upper = len as i64 - (m - pos) as i64;
        let mut placed: Vec<u64> = Vec::with_capacity(pos + 1);
        for x in prev + 1..=upper {
            if self.should_stop() {
                return;
            }
            placed.clear();
            let mut ok = true;
            for a in 0..pos {
                let d = (x - self.marks[a]) as u64;
                if self.is_used(d) {
                    ok = false;
                    break;
                }
                self.toggle(d);
                placed.push(d);
            }
            if ok {
                let d = len - x as u64;
                if self.is_used(d) {
                    ok = false;
                } else {
                    self.toggle(d);
                    placed.push(d);
                }
            }
            if ok {
                self.marks[pos] = x;
                self.interior(idx, pos + 1, len, slen);
            }
            for &d in &placed {
                self.toggle(d);
            }
        }
    }

    fn record(&mut self) {
        if self.collecting_firsts {
            // single-ruler sets are complete at the top level
            self.firsts.push(self.rulers[0].clone());
            return;
        }
        let slen = self.rulers.iter().map(|r| *r.last().unwrap() as u64).sum::<u64>();
        if let Some(best) = self.best {
            if slen > best.load(Ordering::Relaxed) {
                return;
            }
            best.fetch_min(slen, Ordering::Relaxed);
        }
        self.found.push(self.rulers.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dts::{scope_lower_bound, sum_of_lengths_lower_bound};

    /// Independent oracle: every normalized DTS with marks <= cap, by
    /// brute-force enumeration of mark subsets.
    fn brute_force(l: usize, m: usize, cap: i64) -> Vec<Vec<Vec<i64>>> {
        fn subsets(cap: i64, m: usize) -> Vec<Vec<i64>> {
            let mut out = Vec::new();
            let mut cur = vec![0i64];
            fn rec(cur: &mut Vec<i64>, cap: i64, m: usize, out: &mut Vec<Vec<i64>>) {
                if cur.len() == m + 1 {
                    out.push(cur.clone());
                    return;
                }
                for x in cur.last().unwrap() + 1..=cap {
                    cur.push(x);
                    rec(cur, cap, m, out);
                    cur.pop();
                }
            }
            rec(&mut cur, cap, m, &mut out);
            out
        }
        let rulers = subsets(cap, m);
        let mut out = Vec::new();
        let mut choice = Vec::new();
        fn rec(
            rulers: &[Vec<i64>],
            start: usize,
            l: usize,
            choice: &mut Vec<usize>,
            out: &mut Vec<Vec<Vec<i64>>>,
        ) {
            if choice.len() == l {
                let set: Vec<Vec<i64>> = choice.iter().map(|&i| rulers[i].clone()).collect();
                let mut diffs: Vec<i64> = set
                    .iter()
                    .flat_map(|r| {
                        r.iter()
                            .enumerate()
                            .flat_map(move |(i, a)| r[i + 1..].iter().map(move |b| b - a))
                    })
                    .collect();
                let n = diffs.len();
                diffs.sort();
                diffs.dedup();
                if diffs.len() == n {
                    out.push(set);
                }
                return;
            }
            for i in start..rulers.len() {
                choice.push(i);
                rec(rulers, i + 1, l, choice, out);
                choice.pop();
            }
        }
        rec(&rulers, 0, l, &mut choice, &mut out);
        out
    }

    fn canonical_set(raw: &[Vec<Vec<i64>>]) -> Vec<DifferenceTriangleSet> {
        let mut v: Vec<DifferenceTriangleSet> = raw
            .iter()
            .map(|rs| {
                let refs: Vec<&[i64]> = rs.iter().map(|r| r.as_slice()).collect();
                DifferenceTriangleSet::from_marks(&refs).unwrap().canonical()
            })
            .collect();
        v.sort_by(|a, b| a.rulers().cmp(b.rulers()));
        v.dedup();
        v
    }

    #[test]
    fn small_optimal_scopes_match_brute_force() {
        for &(l, m) in &[(1usize, 1usize), (2, 1), (1, 2), (2, 2), (1, 3)] {
            let mut brute_scope = None;
            for cap in 1..=12i64 {
                if !brute_force(l, m, cap).is_empty() {
                    brute_scope = Some(cap);
                    break;
                }
            }
            let p = SearchParams::new(l, m, Objective::MinScope, 12);
            let out = search_optimal(&p).unwrap();
            assert_eq!(out.status, SearchStatus::Complete);
            assert_eq!(Some(out.solutions[0].scope()), brute_scope, "(L,M)=({l},{m})");
        }
    }

    #[test]
    fn all_min_scope_solutions_found() {
        // (2,2) at scope 7: compare full enumeration against brute force
        let p = SearchParams::new(2, 2, Objective::MinScope, 12);
        let out = search_optimal(&p).unwrap();
        let brute = canonical_set(&brute_force(2, 2, 7));
        assert_eq!(out.solutions, brute);
        assert!(out.solutions.len() > 1);
    }

    #[test]
    fn interior_marks_survive_deeper_rulers() {
        // four-mark rulers exercise the interior backtracking across rulers
        let out = search_optimal(&SearchParams::new(2, 3, Objective::MinScope, 20)).unwrap();
        assert_eq!(out.solutions[0].scope(), 13);
        assert_eq!(out.solutions, canonical_set(&brute_force(2, 3, 13)));
        assert!(brute_force(2, 3, 12).is_empty());
        let out = search_optimal(&SearchParams::new(3, 3, Objective::MinScope, 30)).unwrap();
        assert_eq!(out.solutions[0].scope(), 19);
    }

    #[test]
    fn pareto_for_two_rulers_of_three_marks() {
        let p = SearchParams::new(2, 2, Objective::Pareto, 12);
        let out = search_optimal(&p).unwrap();
        assert_eq!(out.front, vec![(7, 11)]);
        let want = DifferenceTriangleSet::from_marks(&[&[0, 1, 4], &[0, 2, 7]]).unwrap();
        assert!(out.solutions.contains(&want));
        // brute-force oracle: the minimum slen over scope <= 8
        let brute = brute_force(2, 2, 8);
        let min = brute.iter().map(|s| s.iter().map(|r| r[2]).sum::<i64>()).min().unwrap();
        assert_eq!(min, 11);
        assert_eq!(min as u64, sum_of_lengths_lower_bound(2, 2).unwrap());
    }

    #[test]
    fn golomb_four_marks() {
        let p = SearchParams::new(1, 3, Objective::MinScope, 10);
        let out = search_optimal(&p).unwrap();
        assert_eq!(out.solutions.len(), 1);
        assert_eq!(out.solutions[0].rulers()[0].marks(), &[0, 1, 4, 6]);
    }

    #[test]
    fn single_mark_pair() {
        let p = SearchParams::new(1, 1, Objective::MinScope, 3);
        let out = search_optimal(&p).unwrap();
        assert_eq!(out.solutions.len(), 1);
        assert_eq!(out.solutions[0].rulers()[0].marks(), &[0, 1]);
    }

    #[test]
    fn infeasible_cap_is_proven() {
        let p = SearchParams::new(2, 2, Objective::MinScope, 6);
        let out = search_optimal(&p).unwrap();
        assert!(out.proven_infeasible);
        assert!(out.solutions.is_empty());
        assert_eq!(out.status, SearchStatus::Complete);
    }

    #[test]
    fn rejects_bad_caps() {
        assert!(search_optimal(&SearchParams::new(2, 2, Objective::MinScope, 5)).is_err());
        assert!(search_optimal(&SearchParams::new(2, 2, Objective::MinScope, 5000)).is_err());
    }

    #[test]
    fn min_slen_objective() {
        let p = SearchParams::new(3, 2, Objective::MinSumOfLengths, 14);
        let out = search_optimal(&p).unwrap();
        let slen = out.solutions[0].sum_of_lengths() as u64;
        assert!(slen >= sum_of_lengths_lower_bound(3, 2).unwrap());
        for s in &out.solutions {
            assert_eq!(s.sum_of_lengths() as u64, slen);
        }
    }

    #[test]
    fn first_only_is_deterministic_and_a_member_of_all() {
        let mut p = SearchParams::new(3, 2, Objective::MinScope, 14);
        let all = search_optimal(&p).unwrap();
        p.find_all = false;
        let a = search_optimal(&p).unwrap();
        let b = search_optimal(&p).unwrap();
        assert_eq!(a.solutions.len(), 1);
        assert_eq!(a.solutions, b.solutions);
        assert!(all.solutions.contains(&a.solutions[0]));
        assert_eq!(a.solutions[0].scope() as u64, scope_lower_bound(3, 2).unwrap());
    }

    #[test]
    fn zero_budget_reports_timeout() {
        let mut p = SearchParams::new(6, 3, Objective::MinScope, 60);
        p.time_budget = Some(Duration::from_millis(0));
        let out = search_optimal(&p).unwrap();
        assert_eq!(out.status, SearchStatus::TimedOut);
        assert!(!out.proven_infeasible);
    }
}
