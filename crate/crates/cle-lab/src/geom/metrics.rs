//! Metrics on loops and loop ensembles.
//!
//! The continuum loop metric (infimum over reparameterizations of the sup
//! distance) is approximated by the discrete Fréchet distance between closed
//! polylines, minimized over cyclic shifts of one loop's start vertex;
//! monotone vertex correspondences realize the reparameterization infimum up
//! to one vertex spacing. Ensemble metrics build on it exactly as the loop
//! ensemble theory prescribes: an optimal-assignment sum capped at 1 for
//! equal cardinalities (1 otherwise), then a diameter-threshold integral,
//! then an exponentially weighted radial localization.

use super::{Loop, LoopEnsemble, Point, Region};

/// Discrete Fréchet distance between closed polylines, minimized over
/// cyclic shifts of `b`'s start vertex. Orientation is preserved (no
/// reversal is considered). Symmetric; zero iff the vertex sequences agree
/// up to a cyclic shift.
///
/// Complexity `O(n · m²)` for loops with `n` and `m` vertices.
pub fn loop_distance(a: &Loop, b: &Loop) -> f64 {
    let pa = a.points();
    let pb = b.points();
    let m = pb.len();
    let mut best = f64::INFINITY;
    for s in 0..m {
        let d = frechet_closed_with_shift(pa, pb, s);
        if d < best {
            best = d;
        }
        if best == 0.0 {
            break;
        }
    }
    best
}

/// Discrete Fréchet distance between the closed traversals of `a` (from
/// vertex 0) and `b` (from vertex `s`), both sequences closed by repeating
/// their start vertex.
fn frechet_closed_with_shift(a: &[Point], b: &[Point], s: usize) -> f64 {
    let n = a.len() + 1;
    let m = b.len() + 1;
    let pa = |i: usize| a[i % a.len()];
    let pb = |j: usize| b[(j + s) % b.len()];
    // Rolling-row DP over the (n x m) coupling grid.
    let mut prev = vec![0.0f64; m];
    let mut cur = vec![0.0f64; m];
    prev[0] = (pa(0) - pb(0)).norm();
    for j in 1..m {
        prev[j] = prev[j - 1].max((pa(0) - pb(j)).norm());
    }
    for i in 1..n {
        cur[0] = prev[0].max((pa(i) - pb(0)).norm());
        for j in 1..m {
            let reach = prev[j].min(cur[j - 1]).min(prev[j - 1]);
            cur[j] = reach.max((pa(i) - pb(j)).norm());
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m - 1]
}

/// Minimum-cost perfect assignment on a square cost matrix
/// (Jonker-style shortest augmenting paths, `O(n³)`).
///
/// Returns the total cost and the column assigned to each row.
pub fn hungarian(cost: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let n = cost.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1]; // row matched to each column (1-based; 0 = free)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    let mut total = 0.0;
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
        total += cost[p[j] - 1][j - 1];
    }
    (total, assign)
}

/// Assignment distance between two slices of loops, with a precomputed
/// pairwise cost matrix `cost[i][j] = loop_distance(a[i], b[j])` of which
/// only the leading `na x nb` block is used.
fn finite_distance_from_cache(cost: &[Vec<f64>], na: usize, nb: usize) -> f64 {
    if na != nb {
        return 1.0;
    }
    if na == 0 {
        return 0.0;
    }
    let sub: Vec<Vec<f64>> = (0..na).map(|i| cost[i][..nb].to_vec()).collect();
    let (total, _) = hungarian(&sub);
    total.min(1.0)
}

/// Distance between finite ensembles: 1 if the cardinalities differ,
/// otherwise the minimum over bijections of the summed loop distances,
/// capped at 1 (optimal-assignment solve on the pairwise cost matrix).
pub fn finite_ensemble_distance(a: &LoopEnsemble, b: &LoopEnsemble) -> f64 {
    let cost = cost_matrix(&a.loops, &b.loops);
    finite_distance_from_cache(&cost, a.loops.len(), b.loops.len())
}

fn cost_matrix(a: &[Loop], b: &[Loop]) -> Vec<Vec<f64>> {
    a.iter()
        .map(|la| b.iter().map(|lb| loop_distance(la, lb)).collect())
        .collect()
}

/// The threshold-integral ensemble distance
/// `∫₀¹ finite_ensemble_distance(A_ε, B_ε) dε`, where `A_ε` keeps the loops
/// of diameter greater than `ε`.
///
/// Evaluated **exactly**: the integrand is constant between consecutive
/// values of the sorted multiset of loop diameters (plus the endpoints 0
/// and 1), so the integral is a finite sum of interval lengths times
/// integrand values. Loops are assumed canonically ordered (diameter
/// descending), which [`LoopEnsemble::new`] guarantees.
pub fn ensemble_distance(a: &LoopEnsemble, b: &LoopEnsemble) -> f64 {
    let cost = cost_matrix(&a.loops, &b.loops);
    let da: Vec<f64> = a.loops.iter().map(|l| l.diameter()).collect();
    let db: Vec<f64> = b.loops.iter().map(|l| l.diameter()).collect();
    let mut breaks: Vec<f64> = vec![0.0, 1.0];
    breaks.extend(da.iter().chain(db.iter()).copied().filter(|d| *d > 0.0 && *d < 1.0));
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let eps = 0.5 * (lo + hi);
        // Diameter-descending order makes each threshold set a prefix.
        let na = da.iter().take_while(|&&d| d > eps).count();
        let nb = db.iter().take_while(|&&d| d > eps).count();
        total += (hi - lo) * finite_distance_from_cache(&cost, na, nb);
    }
    total
}

/// Localized ensemble distance
/// `∫₁^{R_max} e^{−R} · d(A(B_R), B(B_R)) dR`, where `A(B_R)` keeps the
/// loops meeting the closed ball of radius `R` about the origin and `d` is
/// [`ensemble_distance`].
///
/// The set of loops meeting `B_R` changes only at the finitely many radii
/// `R_i = dist(0, loop_i)`, so the integrand is piecewise constant in `R`
/// and the integral is evaluated exactly on those intervals. Returns
/// `(value, uncertainty)`; the uncertainty is the truncation bound
/// `e^{−R_max}` for the discarded tail `R > R_max`.
pub fn local_ensemble_distance(a: &LoopEnsemble, b: &LoopEnsemble, r_max: f64) -> (f64, f64) {
    assert!(r_max >= 1.0, "R_max must be at least 1");
    let origin = Point::new(0.0, 0.0);
    let entry = |l: &Loop| l.distance_to(origin);
    let mut breaks: Vec<f64> = vec![1.0, r_max];
    breaks.extend(
        a.loops
            .iter()
            .chain(b.loops.iter())
            .map(entry)
            .filter(|r| *r > 1.0 && *r < r_max),
    );
    breaks.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi <= lo {
            continue;
        }
        let r_mid = 0.5 * (lo + hi);
        let ball = Region::Ball { center: origin, radius: r_mid };
        let (_, a_meet) = super::restrict_ensemble(a, &ball);
        let (_, b_meet) = super::restrict_ensemble(b, &ball);
        let d = ensemble_distance(&a_meet, &b_meet);
        total += d * ((-lo).exp() - (-hi).exp());
    }
    (total, (-r_max).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{Domain, EnsembleMeta};
    use num_complex::Complex64 as C;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn circle(center: C, r: f64, n: usize) -> Loop {
        Loop::new(
            (0..n)
                .map(|k| {
                    let t = std::f64::consts::TAU * k as f64 / n as f64;
                    center + C::new(r * t.cos(), r * t.sin())
                })
                .collect(),
        )
        .unwrap()
    }

    fn ens(loops: Vec<Loop>) -> LoopEnsemble {
        LoopEnsemble::new(loops, Domain::Disk, EnsembleMeta::synthetic())
    }

    /// Exhaustive oracle: minimum over all monotone coupling paths and all
    /// cyclic shifts, by depth-first enumeration (exponential; tiny inputs
    /// only). Independent of the DP implementation.
    fn frechet_oracle(a: &Loop, b: &Loop) -> f64 {
        fn dfs(a: &[C], b: &[C], s: usize, i: usize, j: usize, running: f64) -> f64 {
            let n = a.len() + 1;
            let m = b.len() + 1;
            let pa = a[i % a.len()];
            let pb = b[(j + s) % b.len()];
            let here = running.max((pa - pb).norm());
            if i == n - 1 && j == m - 1 {
                return here;
            }
            let mut best = f64::INFINITY;
            if i + 1 < n {
                best = best.min(dfs(a, b, s, i + 1, j, here));
            }
            if j + 1 < m {
                best = best.min(dfs(a, b, s, i, j + 1, here));
            }
            if i + 1 < n && j + 1 < m {
                best = best.min(dfs(a, b, s, i + 1, j + 1, here));
            }
            best
        }
        let mut best = f64::INFINITY;
        for s in 0..b.len() {
            best = best.min(dfs(a.points(), b.points(), s, 0, 0, 0.0));
        }
        best
    }

    fn pseudo_loop(seed: u64, n: usize) -> Loop {
        // Small deterministic pseudo-random loops for oracle comparisons.
        let mut x = seed.wrapping_mul(0x9e3779b97f4a7c15) | 1;
        let mut next = move || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64
        };
        let pts: Vec<C> = (0..n)
            .map(|k| {
                let t = std::f64::consts::TAU * k as f64 / n as f64;
                let r = 0.5 + next();
                c(r * t.cos(), r * t.sin())
            })
            .collect();
        Loop::new(pts).unwrap()
    }

    #[test]
    fn identical_loops_distance_zero() {
        let l = circle(c(0.0, 0.0), 1.0, 24);
        assert_eq!(loop_distance(&l, &l), 0.0);
        // ... including under a cyclic relabeling of the second loop.
        assert_eq!(loop_distance(&l, &l.cyclic_shift(7)), 0.0);
    }

    #[test]
    fn translation_achieves_offset() {
        let a = circle(c(0.0, 0.0), 1.0, 200);
        let b = circle(c(0.25, 0.0), 1.0, 200);
        let d = loop_distance(&a, &b);
        assert!((d - 0.25).abs() < 1e-12, "got {d}");
    }

    #[test]
    fn matches_exhaustive_oracle_on_small_loops() {
        for seed in 0..12u64 {
            let a = pseudo_loop(seed, 5);
            let b = pseudo_loop(seed + 100, 6);
            let dp = loop_distance(&a, &b);
            let oracle = frechet_oracle(&a, &b);
            assert!(
                (dp - oracle).abs() < 1e-12,
                "seed {seed}: dp {dp} vs oracle {oracle}"
            );
        }
    }

    #[test]
    fn symmetry_and_triangle_inequality() {
        for seed in 0..30u64 {
            let a = pseudo_loop(3 * seed, 9);
            let b = pseudo_loop(3 * seed + 1, 8);
            let cc = pseudo_loop(3 * seed + 2, 10);
            let ab = loop_distance(&a, &b);
            let ba = loop_distance(&b, &a);
            assert_eq!(ab, ba, "symmetry must be exact");
            let ac = loop_distance(&a, &cc);
            let cb = loop_distance(&cc, &b);
            assert!(ab <= ac + cb + 1e-9, "triangle: {ab} > {ac} + {cb}");
        }
    }

    #[test]
    fn hungarian_matches_permutation_oracle() {
        fn permutations(n: usize) -> Vec<Vec<usize>> {
            if n == 1 {
                return vec![vec![0]];
            }
            let mut out = Vec::new();
            for p in permutations(n - 1) {
                for k in 0..n {
                    let mut q: Vec<usize> = p.iter().map(|&x| if x >= k { x + 1 } else { x }).collect();
                    q.insert(0, k);
                    out.push(q);
                }
            }
            out
        }
        let mut x = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            (x >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=5usize {
            for _ in 0..8 {
                let cost: Vec<Vec<f64>> =
                    (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
                let (fast, assign) = hungarian(&cost);
                let check: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
                assert!((fast - check).abs() < 1e-12);
                let brute = permutations(n)
                    .into_iter()
                    .map(|p| (0..n).map(|i| cost[i][p[i]]).sum::<f64>())
                    .fold(f64::INFINITY, f64::min);
                assert!((fast - brute).abs() < 1e-12, "n={n}: {fast} vs {brute}");
            }
        }
    }

    #[test]
    fn cardinality_mismatch_is_one() {
        let a = ens(vec![circle(c(0.0, 0.0), 0.4, 16)]);
        let b = ens(vec![]);
        assert_eq!(finite_ensemble_distance(&a, &b), 1.0);
    }

    #[test]
    fn equal_ensembles_are_zero() {
        let a = ens(vec![circle(c(0.0, 0.0), 0.4, 16), circle(c(0.1, 0.2), 0.2, 12)]);
        assert_eq!(finite_ensemble_distance(&a, &a), 0.0);
        assert_eq!(ensemble_distance(&a, &a), 0.0);
    }

    #[test]
    fn three_loop_assignment_matches_brute_force() {
        let a = ens(vec![
            circle(c(0.0, 0.0), 0.30, 14),
            circle(c(0.3, 0.1), 0.21, 14),
            circle(c(-0.2, 0.4), 0.12, 14),
        ]);
        let b = ens(vec![
            circle(c(0.05, 0.0), 0.29, 14),
            circle(c(0.28, 0.12), 0.22, 14),
            circle(c(-0.25, 0.38), 0.13, 14),
        ]);
        let fast = finite_ensemble_distance(&a, &b);
        let mut brute = f64::INFINITY;
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        for p in perms {
            let total: f64 = (0..3)
                .map(|i| loop_distance(&a.loops[i], &b.loops[p[i]]))
                .sum();
            brute = brute.min(total);
        }
        assert!((fast - brute.min(1.0)).abs() < 1e-12);
    }

    #[test]
    fn single_loop_versus_empty_integrates_to_diameter() {
        // One loop of diameter 0.5 against nothing: integrand is 1 for
        // thresholds below 0.5 and 0 above, so the integral is 0.5.
        let a = ens(vec![circle(c(0.0, 0.0), 0.25, 64)]);
        let b = ens(vec![]);
        let d = ensemble_distance(&a, &b);
        let diam = a.loops[0].diameter();
        assert!((d - diam).abs() < 1e-12, "got {d}, expected {diam}");
    }

    #[test]
    fn exact_integral_matches_quadrature_oracle() {
        // Midpoint-rule quadrature with many nodes as the independent
        // integration route.
        let a = ens(vec![
            circle(c(0.0, 0.0), 0.35, 12),
            circle(c(0.2, -0.1), 0.18, 10),
            circle(c(-0.3, 0.2), 0.09, 8),
        ]);
        let b = ens(vec![
            circle(c(0.02, 0.01), 0.34, 12),
            circle(c(0.2, -0.12), 0.20, 10),
        ]);
        let exact = ensemble_distance(&a, &b);
        let nodes = 10_000;
        let cost = super::cost_matrix(&a.loops, &b.loops);
        let da: Vec<f64> = a.loops.iter().map(|l| l.diameter()).collect();
        let db: Vec<f64> = b.loops.iter().map(|l| l.diameter()).collect();
        let mut quad = 0.0;
        for k in 0..nodes {
            let eps = (k as f64 + 0.5) / nodes as f64;
            let na = da.iter().take_while(|&&d| d > eps).count();
            let nb = db.iter().take_while(|&&d| d > eps).count();
            quad += super::finite_distance_from_cache(&cost, na, nb) / nodes as f64;
        }
        assert!((exact - quad).abs() < 1e-3, "exact {exact} vs quad {quad}");
    }

    #[test]
    fn local_distance_of_equal_ensembles_is_zero() {
        let a = ens(vec![circle(c(0.0, 0.0), 0.4, 16)]);
        let (v, err) = local_ensemble_distance(&a, &a, 5.0);
        assert_eq!(v, 0.0);
        assert!((err - (-5.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn local_distance_constant_integrand_closed_form() {
        // Ensembles inside B_1 differ everywhere: integrand is the constant
        // ensemble-distance value, so the integral is c (e^{-1} - e^{-R}).
        let a = ens(vec![circle(c(0.0, 0.0), 0.3, 16)]);
        let b = ens(vec![]);
        let c_val = ensemble_distance(&a, &b);
        let r_max = 4.0;
        let (v, _) = local_ensemble_distance(&a, &b, r_max);
        let expected = c_val * ((-1.0f64).exp() - (-r_max).exp());
        assert!((v - expected).abs() < 1e-12, "got {v}, expected {expected}");
    }
}
