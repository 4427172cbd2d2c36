//! One-dimensional search helpers shared by the bound and tradeoff
//! optimizers. Objectives return `None` where they are undefined; such
//! points rank below every defined value.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

fn rank(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NEG_INFINITY)
}

pub fn lin_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    lin_space(lo.ln(), hi.ln(), count)
        .into_iter()
        .map(f64::exp)
        .collect()
}

/// Golden-section maximization on `[lo, hi]`. Returns the best point seen.
pub fn golden_max(f: &dyn Fn(f64) -> Option<f64>, mut lo: f64, mut hi: f64) -> (f64, Option<f64>) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if hi - lo <= 1e-12 * (1.0 + lo.abs() + hi.abs()) {
            break;
        }
        if rank(f1) >= rank(f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if rank(f1) >= rank(f2) {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Scans `grid` (sorted ascending), then refines by golden section between
/// the neighbours of the best grid point. The result never ranks below the
/// best grid value. `None` if the objective is undefined on the whole grid.
pub fn scan_golden_max(f: &dyn Fn(f64) -> Option<f64>, grid: &[f64]) -> Option<(f64, f64)> {
    let values: Vec<Option<f64>> = grid.iter().map(|&x| f(x)).collect();
    refine_best(f, grid, &values)
}

/// [`scan_golden_max`] that also bisects every grid cell where the
/// objective changes between defined and undefined, keeping the defined
/// point closest to the edge as a candidate. Objectives that blow up at the
/// edge of their domain peak there, between grid points.
pub fn scan_golden_edges_max(f: &dyn Fn(f64) -> Option<f64>, grid: &[f64]) -> Option<(f64, f64)> {
    let values: Vec<Option<f64>> = grid.iter().map(|&x| f(x)).collect();
    let mut best = refine_best(f, grid, &values)?;
    for i in 1..grid.len() {
        let (inside, outside, v) = match (values[i - 1], values[i]) {
            (Some(v), None) => (grid[i - 1], grid[i], v),
            (None, Some(v)) => (grid[i], grid[i - 1], v),
            _ => continue,
        };
        let (x, v) = bisect_edge(f, inside, outside, v);
        if v > best.1 {
            best = (x, v);
        }
    }
    Some(best)
}

fn refine_best(
    f: &dyn Fn(f64) -> Option<f64>,
    grid: &[f64],
    values: &[Option<f64>],
) -> Option<(f64, f64)> {
    let (best, best_val) = values
        .iter()
        .enumerate()
        .filter_map(|(i, v)| v.map(|v| (i, v)))
        .fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        })?;
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    if hi > lo {
        let (x, v) = golden_max(f, lo, hi);
        if let Some(v) = v {
            if v > best_val {
                return Some((x, v));
            }
        }
    }
    Some((grid[best], best_val))
}

/// Last defined point on the way from `inside` to `outside`.
fn bisect_edge(
    f: &dyn Fn(f64) -> Option<f64>,
    mut inside: f64,
    mut outside: f64,
    mut value: f64,
) -> (f64, f64) {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        match f(mid) {
            Some(v) => {
                inside = mid;
                value = v;
            }
            None => outside = mid,
        }
    }
    (inside, value)
}

/// Pairwise summation; the result depends only on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        values.iter().sum()
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let f = |x: f64| Some(-(x - 0.3).powi(2));
        let (x, v) = golden_max(&f, -1.0, 2.0);
        assert!((x - 0.3).abs() < 1e-6);
        assert!(v.unwrap() <= 0.0);
    }

    #[test]
    fn scan_skips_undefined_region() {
        let f = |x: f64| if x < 1.0 { None } else { Some(-(x - 1.5).powi(2)) };
        let grid = lin_space(0.0, 3.0, 31);
        let (x, _) = scan_golden_max(&f, &grid).unwrap();
        assert!((x - 1.5).abs() < 1e-6);
        assert!(scan_golden_max(&|_| None, &grid).is_none());
    }

    #[test]
    fn scan_dominates_grid() {
        let f = |x: f64| Some((5.0 * x).sin() + x);
        let grid = lin_space(0.0, 3.0, 7);
        let (_, v) = scan_golden_max(&f, &grid).unwrap();
        let grid_best = grid.iter().map(|&x| f(x).unwrap()).fold(f64::MIN, f64::max);
        assert!(v >= grid_best);
    }

    #[test]
    fn edge_peak_is_found() {
        // Grows without bound toward x = 1.234, undefined beyond.
        let f = |x: f64| (x < 1.234).then(|| -(1.234 - x).ln());
        let grid = lin_space(0.0, 3.0, 11);
        let (x, v) = scan_golden_edges_max(&f, &grid).unwrap();
        assert!((x - 1.234).abs() < 1e-12 && v > 25.0, "{x} {v}");
        let (x, _) = scan_golden_max(&f, &grid).unwrap();
        assert!(x < 1.234);
    }

    #[test]
    fn spaces() {
        assert_eq!(lin_space(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let g = log_space(0.01, 20.0, 40);
        assert_eq!(g.len(), 40);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[39] - 20.0).abs() < 1e-12);
    }

    #[test]
    fn pairwise_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&v), 249_750.0);
    }
}
