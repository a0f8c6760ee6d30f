pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

pub fn softmax3(scores: [f64; 3]) -> [f64; 3] {
    let m = scores[0].max(scores[1]).max(scores[2]);
    let e = scores.map(|s| libm::exp(s - m));
    let z = e[0] + e[1] + e[2];
    e.map(|v| v / z)
}

/// Cross-entropy of a softmax output against a class index.
pub fn cross_entropy(p: &[f64; 3], target: usize) -> f64 {
    -libm::log(p[target].max(f64::MIN_POSITIVE))
}

pub fn argmax3(p: &[f64; 3]) -> usize {
    let mut best = 0;
    for k in 1..3 {
        if p[k] > p[best] {
            best = k;
        }
    }
    best
}

/// `y += A x` with `A` row-major `rows x x.len()`.
pub fn gemv_add(a: &[f64], x: &[f64], y: &mut [f64]) {
    let cols = x.len();
    for (r, yr) in y.iter_mut().enumerate() {
        let row = &a[r * cols..(r + 1) * cols];
        let mut acc = 0.0;
        for (w, v) in row.iter().zip(x) {
            acc += w * v;
        }
        *yr += acc;
    }
}

/// `x_grad += A^T dy` and `a_grad += dy x^T`.
pub fn gemv_backward(a: &[f64], x: &[f64], dy: &[f64], a_grad: &mut [f64], x_grad: &mut [f64]) {
    let cols = x.len();
    for (r, &d) in dy.iter().enumerate() {
        if d == 0.0 {
            continue;
        }
        let row = &a[r * cols..(r + 1) * cols];
        let grow = &mut a_grad[r * cols..(r + 1) * cols];
        for c in 0..cols {
            grow[c] += d * x[c];
            x_grad[c] += d * row[c];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_sums_to_one() {
        for s in [[0.0, 0.0, 0.0], [1000.0, -1000.0, 3.0], [-5.0, 2.0, 2.0]] {
            let p = softmax3(s);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert_eq!(softmax3([0.0; 3]), [1.0 / 3.0; 3]);
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
    }
}
