//! Sequence extrapolation: Richardson with an estimated order and Wynn's epsilon.

use serde::Serialize;

/// Limit estimate of a sequence sampled along a geometric parameter sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Extrapolation {
    pub value: f64,
    /// Estimated convergence order `p` in `q(h) = q∞ + C h^p`, `None` if not fitted.
    pub order: Option<f64>,
    /// Distance between the last two extrapolated values (or raw values if too short).
    pub spread: f64,
    /// False when the differences are not of one sign and shrinking.
    pub stable: bool,
}

fn richardson_triple(q0: f64, q1: f64, q2: f64, rho: f64) -> Option<(f64, f64)> {
    let d0 = q0 - q1;
    let d1 = q1 - q2;
    let scale = q0.abs().max(q1.abs()).max(q2.abs()).max(f64::MIN_POSITIVE);
    if d1.abs() <= 1e-14 * scale {
        return Some((q2, f64::INFINITY));
    }
    let ratio = d1 / d0;
    if !(ratio > 0.0 && ratio < 1.0) {
        return None;
    }
    let p = ratio.ln() / rho.ln();
    let rp = rho.powf(p);
    Some((q2 - d1 * rp / (1.0 - rp), p))
}

/// Richardson extrapolation of `q_k = q(h_0 ρ^k)` with `0 < ρ < 1` and unknown order.
pub fn richardson(q: &[f64], rho: f64) -> Extrapolation {
    let n = q.len();
    if n == 0 {
        return Extrapolation { value: f64::NAN, order: None, spread: f64::INFINITY, stable: false };
    }
    if n < 3 {
        let spread = if n == 2 { (q[1] - q[0]).abs() } else { f64::INFINITY };
        return Extrapolation { value: q[n - 1], order: None, spread, stable: false };
    }
    let estimates: Vec<Option<(f64, f64)>> = (0..n - 2).map(|k| richardson_triple(q[k], q[k + 1], q[k + 2], rho)).collect();
    match estimates[n - 3] {
        Some((value, p)) => {
            let spread = match n.checked_sub(4).and_then(|k| estimates[k]) {
                Some((prev, _)) => (value - prev).abs(),
                None => (value - q[n - 1]).abs(),
            };
            Extrapolation { value, order: p.is_finite().then_some(p), spread, stable: true }
        }
        None => Extrapolation { value: q[n - 1], order: None, spread: (q[n - 1] - q[n - 2]).abs(), stable: false },
    }
}

/// Wynn's epsilon algorithm applied to partial sums; returns the last even-column entry.
pub fn wynn_epsilon(partial_sums: &[f64]) -> f64 {
    let n = partial_sums.len();
    if n < 3 {
        return partial_sums.last().copied().unwrap_or(f64::NAN);
    }
    // cur holds column j of the epsilon table, prev column j-1.
    let mut prev = vec![0.0; n + 1];
    let mut cur: Vec<f64> = partial_sums.to_vec();
    let mut best = cur[n - 1];
    let mut j = 0usize;
    while cur.len() > 1 {
        let next: Vec<f64> = (0..cur.len() - 1)
            .map(|k| {
                let diff = cur[k + 1] - cur[k];
                if diff == 0.0 {
                    f64::INFINITY
                } else {
                    prev[k + 1] + 1.0 / diff
                }
            })
            .collect();
        if next.iter().any(|x| !x.is_finite()) {
            break;
        }
        prev = cur;
        cur = next;
        j += 1;
        if j % 2 == 0 {
            best = cur[cur.len() - 1];
        }
    }
    best
}
