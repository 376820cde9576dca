use crate::{Error, Result};

/// Number of samples in a window of `window_s` seconds, at least one.
pub fn window_samples(window_s: f64, sample_rate_hz: f64) -> usize {
    ((window_s * sample_rate_hz).round() as usize).max(1)
}

/// Centered moving RMS. Windows are truncated at the edges, so the output has the
/// same length as the input.
pub fn rms_envelope(signal: &[f64], window: usize) -> Result<Vec<f64>> {
    let n = signal.len();
    if window == 0 {
        return Err(Error::Input("RMS window must be at least one sample".into()));
    }
    if n < window {
        return Err(Error::Input(format!(
            "signal of {n} samples is shorter than the {window}-sample RMS window"
        )));
    }
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in signal {
        acc += v * v;
        prefix.push(acc);
    }
    let left = (window - 1) / 2;
    let right = window - 1 - left;
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(left);
            let hi = (i + right).min(n - 1);
            let sum = (prefix[hi + 1] - prefix[lo]).max(0.0);
            (sum / (hi + 1 - lo) as f64).sqrt()
        })
        .collect())
}

/// Median; the mean of the two central order statistics for even lengths.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Input("median of an empty series".into()));
    }
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (_, upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if values.len() % 2 == 1 {
        Ok(upper)
    } else {
        let lower = v[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(0.5 * (lower + upper))
    }
}

/// Scalar load of one channel: the median of its envelope.
pub fn channel_load(envelope: &[f64]) -> Result<f64> {
    median(envelope)
}
