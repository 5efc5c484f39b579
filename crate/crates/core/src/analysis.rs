//! Least-squares fits and curve comparisons used by the checks and reports.

/// Result of fitting `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2, "need at least two points");
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (xi, yi) in x.iter().zip(y) {
        sxx += (xi - mx) * (xi - mx);
        sxy += (xi - mx) * (yi - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms_residual = (x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - slope * xi - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    LinearFit {
        slope,
        intercept,
        rms_residual,
    }
}

/// Least squares for `y ≈ Σ c_j f_j(x)` with two basis functions.
pub fn two_term_fit(basis: [&[f64]; 2], y: &[f64]) -> [f64; 2] {
    let [f, g] = basis;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
    let (ff, fg, gg) = (dot(f, f), dot(f, g), dot(g, g));
    let (fy, gy) = (dot(f, y), dot(g, y));
    let det = ff * gg - fg * fg;
    [(fy * gg - gy * fg) / det, (ff * gy - fg * fy) / det]
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

pub fn rms(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v * v, n + 1));
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}

/// Abscissae where `y` changes sign, located by linear interpolation
/// between neighbouring samples. Exact zeros count once.
pub fn sign_changes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..x.len() {
        let (y0, y1) = (y[i - 1], y[i]);
        if y0 == 0.0 {
            continue;
        }
        if y1 == 0.0 {
            if i + 1 < x.len() && y[i + 1] * y0 < 0.0 {
                out.push(x[i]);
            }
            continue;
        }
        if y0 * y1 < 0.0 {
            out.push(x[i - 1] + (x[i] - x[i - 1]) * y0 / (y0 - y1));
        }
    }
    out
}

/// Indices of strict local maxima of `|y|` in the interior of the sample.
pub fn peak_indices(y: &[f64]) -> Vec<usize> {
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i].abs() > y[i - 1].abs() && y[i].abs() >= y[i + 1].abs())
        .collect()
}
