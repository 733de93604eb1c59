use crate::error::{Error, Result};

/// Running sum with Neumaier's improvement of Kahan compensation.
///
/// The compensation term collects the low-order bits lost by each addition
/// and is folded back in only when the value is read.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, term: f64) {
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator in. Merging partials in a fixed order gives a
    /// reproducible total independent of how the partials were produced.
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }

    /// Like [`value`](Self::value), but reports overflow instead of returning
    /// an infinity or NaN.
    pub fn try_value(&self) -> Result<f64> {
        let v = self.value();
        if v.is_finite() && self.sum.is_finite() {
            Ok(v)
        } else {
            Err(Error::Overflow(format!(
                "compensated sum left the finite range (sum={}, comp={})",
                self.sum, self.comp
            )))
        }
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for t in iter {
            self.add(t);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        acc.extend(iter);
        acc
    }
}
