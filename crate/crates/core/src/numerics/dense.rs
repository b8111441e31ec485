use crate::error::{Error, Result};

/// Sampled vector-valued signal with cubic Hermite evaluation between samples.
///
/// Each sample carries the state and its time derivative, so evaluation
/// between samples is third-order accurate and exact at the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    values: Vec<f64>,
    derivatives: Vec<f64>,
}

impl Trajectory {
    /// Builds a trajectory from row-major sample buffers.
    pub fn new(dim: usize, times: Vec<f64>, values: Vec<f64>, derivatives: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("trajectory dimension must be positive".into()));
        }
        if times.is_empty() {
            return Err(Error::InvalidArgument("trajectory needs at least one sample".into()));
        }
        if values.len() != dim * times.len() || derivatives.len() != dim * times.len() {
            return Err(Error::DimensionMismatch {
                expected: dim * times.len(),
                found: values.len().min(derivatives.len()),
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("sample times must be strictly increasing".into()));
        }
        Ok(Self {
            dim,
            times,
            values,
            derivatives,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn derivative(&self, i: usize) -> &[f64] {
        &self.derivatives[i * self.dim..(i + 1) * self.dim]
    }

    pub fn first(&self) -> &[f64] {
        self.sample(0)
    }

    pub fn last(&self) -> &[f64] {
        self.sample(self.len() - 1)
    }

    /// Iterates over `(t, value)` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times
            .iter()
            .copied()
            .zip(self.values.chunks_exact(self.dim))
    }

    /// Evaluates the trajectory at `t`, writing into `out`.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        if out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: out.len(),
            });
        }
        let (start, end) = (self.start_time(), self.end_time());
        let slack = 1e-12 * (1.0 + start.abs().max(end.abs()));
        if !(t >= start - slack && t <= end + slack) {
            return Err(Error::OutOfDomain { t, start, end });
        }
        let t = t.clamp(start, end);

        // index of the first sample strictly after t
        let hi = self.times.partition_point(|&s| s <= t);
        if hi == 0 {
            out.copy_from_slice(self.sample(0));
            return Ok(());
        }
        let lo = hi - 1;
        if self.times[lo] == t || hi == self.len() {
            out.copy_from_slice(self.sample(lo));
            return Ok(());
        }

        let (t0, t1) = (self.times[lo], self.times[hi]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        let (v0, v1) = (self.sample(lo), self.sample(hi));
        let (d0, d1) = (self.derivative(lo), self.derivative(hi));
        for i in 0..self.dim {
            out[i] = h00 * v0[i] + h10 * h * d0[i] + h01 * v1[i] + h11 * h * d1[i];
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_into(t, &mut out)?;
        Ok(out)
    }

    /// Component `i` of every sample.
    pub fn component(&self, i: usize) -> Vec<f64> {
        self.values.chunks_exact(self.dim).map(|v| v[i]).collect()
    }
}
