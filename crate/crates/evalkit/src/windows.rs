//! Temporal-window AUC: each window pools every stable test sample with
//! the unstable samples whose day label falls inside the window.

use serde::{Deserialize, Serialize};

use crate::auc::{auc, ScoredSample};
use crate::error::Result;

/// Inclusive day range, e.g. (1, 2) covers D+1 and D+2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayWindow {
    pub start: i32,
    pub end: i32,
}

impl DayWindow {
    pub fn contains(&self, day: i32) -> bool {
        (self.start..=self.end).contains(&day)
    }

    pub fn label(&self) -> String {
        format!("D+{}..D+{}", self.start, self.end)
    }
}

/// The default analysis windows following the narrative breakpoints at
/// D+2, D+6 and D+10.
pub fn default_windows() -> Vec<DayWindow> {
    vec![
        DayWindow { start: 1, end: 2 },
        DayWindow { start: 2, end: 4 },
        DayWindow { start: 4, end: 6 },
        DayWindow { start: 6, end: 10 },
        DayWindow { start: 10, end: 18 },
    ]
}

/// Per-window AUC; a window with no unstable samples is reported as
/// absent, not zero.
pub fn windowed_auc(
    samples: &[ScoredSample],
    windows: &[DayWindow],
) -> Result<Vec<(DayWindow, Option<f64>)>> {
    let stable: Vec<ScoredSample> = samples
        .iter()
        .filter(|s| s.true_class == 0)
        .copied()
        .collect();
    let mut out = Vec::with_capacity(windows.len());
    for w in windows {
        let mut pool: Vec<ScoredSample> = samples
            .iter()
            .filter(|s| s.true_class == 1 && w.contains(s.day_label))
            .copied()
            .collect();
        if pool.is_empty() {
            out.push((*w, None));
            continue;
        }
        pool.extend_from_slice(&stable);
        out.push((*w, Some(auc(&pool)?)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(score: f64, class: u8, day: i32) -> ScoredSample {
        ScoredSample::new(score, class, day, 0)
    }

    #[test]
    fn all_days_window_equals_overall_auc() {
        let samples = vec![
            s(0.1, 0, -2),
            s(0.3, 0, -1),
            s(0.2, 1, 1),
            s(0.9, 1, 5),
            s(0.6, 1, 17),
        ];
        let overall = auc(&samples).unwrap();
        let per = windowed_auc(&samples, &[DayWindow { start: 1, end: 18 }]).unwrap();
        assert_eq!(per[0].1, Some(overall));
    }

    #[test]
    fn empty_window_is_absent() {
        let samples = vec![s(0.1, 0, -1), s(0.9, 1, 3)];
        let per = windowed_auc(
            &samples,
            &[DayWindow { start: 10, end: 18 }, DayWindow { start: 1, end: 4 }],
        )
        .unwrap();
        assert_eq!(per[0].1, None);
        assert_eq!(per[1].1, Some(1.0));
    }
}
