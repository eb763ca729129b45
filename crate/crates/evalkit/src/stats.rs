//! Small statistics helpers for the analyses: Welch's t-test for the
//! per-window significance marks (low-power at n=3 splits), a one-sided
//! paired t-test, Kendall's tau for trend checks and Spearman correlation.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::auc::mean_std;

#[derive(Debug, Clone, Copy)]
pub struct WelchResult {
    pub t: f64,
    pub df: f64,
    pub p_two_sided: f64,
}

/// Welch's unequal-variance t-test. With zero variance in both groups the
/// p-value degenerates to 0 or 1 depending on the means.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> WelchResult {
    let (ma, sa) = mean_std(a);
    let (mb, sb) = mean_std(b);
    let na = a.len() as f64;
    let nb = b.len() as f64;
    let va = sa * sa / na;
    let vb = sb * sb / nb;
    if va + vb == 0.0 {
        let p = if ma == mb { 1.0 } else { 0.0 };
        return WelchResult { t: if ma == mb { 0.0 } else { f64::INFINITY }, df: na + nb - 2.0, p_two_sided: p };
    }
    let t = (ma - mb) / (va + vb).sqrt();
    let df = (va + vb) * (va + vb)
        / (va * va / (na - 1.0).max(1.0) + vb * vb / (nb - 1.0).max(1.0));
    let dist = StudentsT::new(0.0, 1.0, df.max(1.0)).expect("valid dof");
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    WelchResult { t, df, p_two_sided: p }
}

/// One-sided paired t-test that the differences are greater than zero.
pub fn paired_t_one_sided_greater(diffs: &[f64]) -> f64 {
    let n = diffs.len() as f64;
    let (mean, sd) = mean_std(diffs);
    if sd == 0.0 {
        return if mean > 0.0 { 0.0 } else { 1.0 };
    }
    let t = mean / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1.0).max(1.0)).expect("valid dof");
    1.0 - dist.cdf(t)
}

/// Kendall's tau; pairs tied in x are skipped, ties in y count as neither
/// concordant nor discordant.
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut pairs = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            if xs[i] == xs[j] {
                continue;
            }
            pairs += 1;
            let dx = xs[j] - xs[i];
            let dy = ys[j] - ys[i];
            let prod = dx * dy;
            if prod > 0.0 {
                concordant += 1;
            } else if prod < 0.0 {
                discordant += 1;
            }
        }
    }
    if pairs == 0 {
        return 0.0;
    }
    (concordant - discordant) as f64 / pairs as f64
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let mut out = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + 1 + j + 1) as f64 / 2.0;
        for &idx in &order[i..=j] {
            out[idx] = avg;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn welch_on_clearly_different_groups() {
        let a = [1.0, 1.1, 0.9, 1.05];
        let b = [2.0, 2.1, 1.95, 2.02];
        let r = welch_t_test(&a, &b);
        assert!(r.p_two_sided < 0.01, "p = {}", r.p_two_sided);
        let same = welch_t_test(&a, &a);
        assert!(same.p_two_sided > 0.9);
    }

    #[test]
    fn paired_t_detects_consistent_positive_shift() {
        let p = paired_t_one_sided_greater(&[0.10, 0.12, 0.11]);
        assert!(p < 0.05, "p = {p}");
        let p = paired_t_one_sided_greater(&[0.1, -0.12, 0.01]);
        assert!(p > 0.05, "p = {p}");
    }

    #[test]
    fn kendall_tau_signs() {
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(kendall_tau(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]), -1.0);
        let mixed = kendall_tau(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]);
        assert!(mixed > 0.0 && mixed < 1.0);
    }

    #[test]
    fn spearman_is_rank_based() {
        // Monotone but nonlinear relation has perfect rank correlation.
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [1.0, 10.0, 100.0, 1000.0];
        assert!((spearman(&xs, &ys) - 1.0).abs() < 1e-12);
    }
}
