use alloc::vec;
use alloc::vec::Vec;

use super::{DocLabel, LabelDistribution};
use crate::cascade::{Evidence, IntervalPrediction};
use crate::date::DateStamp;
use crate::error::{Error, Result};

/// Path score with the tie-break counts, compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Score {
    logp: f64,
    n_pre: usize,
    n_mid: usize,
}

impl Score {
    fn beats(&self, other: &Score) -> bool {
        if self.logp != other.logp {
            return self.logp > other.logp;
        }
        (self.n_pre, self.n_mid) > (other.n_pre, other.n_mid)
    }

    fn extend(self, state: usize, logp: f64) -> Score {
        Score {
            logp: self.logp + logp,
            n_pre: self.n_pre + usize::from(state == 0),
            n_mid: self.n_mid + usize::from(state == 1),
        }
    }
}

/// Most probable label sequence of the form `PRE* MID* POST*`.
///
/// Left-to-right dynamic program over the three states where state `s` may
/// only follow states `<= s`. Score is the sum of per-position log
/// probabilities; exact ties prefer more PRE, then more MID.
pub fn constrained_decode(probs: &[LabelDistribution]) -> Vec<DocLabel> {
    let n = probs.len();
    if n == 0 {
        return Vec::new();
    }
    let logp = |t: usize, s: usize| libm::log(probs[t].as_array()[s]);
    let mut best: [Score; 3] = core::array::from_fn(|s| Score {
        logp: logp(0, s),
        n_pre: usize::from(s == 0),
        n_mid: usize::from(s == 1),
    });
    let mut back = vec![[0usize; 3]; n];
    #[allow(clippy::needless_range_loop)]
    for t in 1..n {
        let mut next = best;
        for s in 0..3 {
            let mut arg = 0;
            let mut cand = best[0].extend(s, logp(t, s));
            for prev in 1..=s {
                let c = best[prev].extend(s, logp(t, s));
                if c.beats(&cand) {
                    cand = c;
                    arg = prev;
                }
            }
            next[s] = cand;
            back[t][s] = arg;
        }
        best = next;
    }
    let mut state = 0;
    for s in 1..3 {
        if best[s].beats(&best[state]) {
            state = s;
        }
    }
    let mut labels = vec![DocLabel::Pre; n];
    for t in (0..n).rev() {
        labels[t] = DocLabel::from_index(state);
        state = back[t][state];
    }
    labels
}

pub fn is_monotone(labels: &[DocLabel]) -> bool {
    labels.windows(2).all(|w| w[0] <= w[1])
}

/// Turns a monotone label sequence into an interval: start at the first MID
/// (or the first POST when no MID exists), end at the first POST, ongoing
/// when there is no POST, not taken when everything is PRE.
pub fn interval_from_labels(labels: &[DocLabel], timestamps: &[DateStamp]) -> Result<IntervalPrediction> {
    if labels.len() != timestamps.len() {
        return Err(Error::LengthMismatch { left: labels.len(), right: timestamps.len() });
    }
    if !is_monotone(labels) {
        return Err(Error::NonMonotone);
    }
    let first = |want: DocLabel| labels.iter().position(|&l| l == want).map(|i| timestamps[i]);
    let first_mid = first(DocLabel::Mid);
    let first_post = first(DocLabel::Post);
    let Some(start) = first_mid.or(first_post) else {
        return Ok(IntervalPrediction::not_taken());
    };
    Ok(IntervalPrediction {
        taken: true,
        start: Some(start),
        end: first_post,
        start_evidence: Some(Evidence::Timeline),
        end_evidence: Some(Evidence::Timeline),
    })
}
