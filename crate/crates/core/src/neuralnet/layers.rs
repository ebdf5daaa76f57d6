//! Dense and 1-D convolution parameter blocks with their forward and
//! backward kernels.

use rand::Rng;

/// Dot product with four independent accumulators so the compiler can keep
/// the loop in vector registers. Summation order is fixed.
#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn glorot<R: Rng + ?Sized>(rng: &mut R, n: usize, fan_in: usize, fan_out: usize) -> Vec<f64> {
    let a = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..n).map(|_| rng.random_range(-a..a)).collect()
}

/// Fully connected layer; `weight` is `out_dim x in_dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Dense {
    pub fn zeros(in_dim: usize, out_dim: usize) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: vec![0.0; in_dim * out_dim],
            bias: vec![0.0; out_dim],
        }
    }

    pub fn glorot<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, rng: &mut R) -> Self {
        Self {
            in_dim,
            out_dim,
            weight: glorot(rng, in_dim * out_dim, in_dim, out_dim),
            bias: vec![0.0; out_dim],
        }
    }

    pub fn row(&self, o: usize) -> &[f64] {
        &self.weight[o * self.in_dim..(o + 1) * self.in_dim]
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.in_dim);
        (0..self.out_dim)
            .map(|o| self.bias[o] + dot(self.row(o), x))
            .collect()
    }

    /// Accumulates parameter gradients into `grad` and returns the gradient
    /// with respect to the input.
    pub fn backward(&self, x: &[f64], dy: &[f64], grad: &mut Dense) -> Vec<f64> {
        let mut dx = vec![0.0; self.in_dim];
        for (o, &g) in dy.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            grad.bias[o] += g;
            axpy(
                g,
                x,
                &mut grad.weight[o * self.in_dim..(o + 1) * self.in_dim],
            );
            axpy(g, self.row(o), &mut dx);
        }
        dx
    }
}

/// One window size of the convolution layer. `kernel` holds, per filter,
/// `window x input_dim` weights laid out so a filter's kernel lines up with
/// `window` consecutive rows of a row-major chunk matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvBank {
    pub window: usize,
    pub filters: usize,
    pub input_dim: usize,
    pub kernel: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Max-over-time result for one filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoolTrace {
    /// Earliest time step attaining the maximum pre-activation.
    pub argmax: usize,
    /// Pooled value after ReLU.
    pub value: f64,
}

impl ConvBank {
    pub fn zeros(window: usize, filters: usize, input_dim: usize) -> Self {
        Self {
            window,
            filters,
            input_dim,
            kernel: vec![0.0; filters * window * input_dim],
            bias: vec![0.0; filters],
        }
    }

    pub fn glorot<R: Rng + ?Sized>(
        window: usize,
        filters: usize,
        input_dim: usize,
        rng: &mut R,
    ) -> Self {
        let span = window * input_dim;
        Self {
            window,
            filters,
            input_dim,
            kernel: glorot(rng, filters * span, span, window * filters),
            bias: vec![0.0; filters],
        }
    }

    fn span(&self) -> usize {
        self.window * self.input_dim
    }

    pub fn filter(&self, f: usize) -> &[f64] {
        let span = self.span();
        &self.kernel[f * span..(f + 1) * span]
    }

    /// Valid convolution over `n_steps` rows of `x`, ReLU, max over time.
    /// Ties go to the earliest step.
    pub fn forward_pool(&self, x: &[f64], n_steps: usize) -> Vec<PoolTrace> {
        let span = self.span();
        let positions = n_steps + 1 - self.window;
        (0..self.filters)
            .map(|f| {
                let k = self.filter(f);
                let mut best = f64::NEG_INFINITY;
                let mut argmax = 0;
                for t in 0..positions {
                    let start = t * self.input_dim;
                    let z = self.bias[f] + dot(k, &x[start..start + span]);
                    if z > best {
                        best = z;
                        argmax = t;
                    }
                }
                PoolTrace {
                    argmax,
                    value: best.max(0.0),
                }
            })
            .collect()
    }

    /// Routes each pooled gradient to the filter's argmax window. Filters
    /// whose maximum was clipped by the ReLU receive nothing.
    pub fn backward_pool(
        &self,
        x: &[f64],
        traces: &[PoolTrace],
        dpool: &[f64],
        grad: &mut ConvBank,
    ) {
        let span = self.span();
        for (f, (tr, &g)) in traces.iter().zip(dpool).enumerate() {
            if tr.value <= 0.0 || g == 0.0 {
                continue;
            }
            grad.bias[f] += g;
            let start = tr.argmax * self.input_dim;
            axpy(
                g,
                &x[start..start + span],
                &mut grad.kernel[f * span..(f + 1) * span],
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..37).map(|i| i as f64 * 0.5 - 3.0).collect();
        let b: Vec<f64> = (0..37).map(|i| (i as f64).cos()).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }

    #[test]
    fn pool_tie_breaks_to_earliest() {
        let mut bank = ConvBank::zeros(1, 1, 1);
        bank.kernel[0] = 1.0;
        let traces = bank.forward_pool(&[1.0, 3.0, 3.0, 2.0], 4);
        assert_eq!(
            traces[0],
            PoolTrace {
                argmax: 1,
                value: 3.0
            }
        );
    }

    #[test]
    fn relu_clips_negative_maximum() {
        let mut bank = ConvBank::zeros(2, 1, 1);
        bank.kernel.copy_from_slice(&[1.0, 1.0]);
        bank.bias[0] = -10.0;
        let x = [1.0, 2.0, 3.0];
        let traces = bank.forward_pool(&x, 3);
        assert_eq!(traces[0].value, 0.0);
        let mut grad = ConvBank::zeros(2, 1, 1);
        bank.backward_pool(&x, &traces, &[1.0], &mut grad);
        assert!(grad.kernel.iter().chain(&grad.bias).all(|g| *g == 0.0));
    }

    #[test]
    fn dense_forward_backward() {
        let mut d = Dense::zeros(2, 2);
        d.weight.copy_from_slice(&[1.0, 2.0, 3.0, 4.0]);
        d.bias.copy_from_slice(&[0.5, -0.5]);
        assert_eq!(d.forward(&[1.0, 1.0]), vec![3.5, 6.5]);
        let mut g = Dense::zeros(2, 2);
        let dx = d.backward(&[1.0, 2.0], &[1.0, -1.0], &mut g);
        assert_eq!(dx, vec![-2.0, -2.0]);
        assert_eq!(g.weight, vec![1.0, 2.0, -1.0, -2.0]);
        assert_eq!(g.bias, vec![1.0, -1.0]);
    }
}
