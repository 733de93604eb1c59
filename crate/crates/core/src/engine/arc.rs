//! Arcs of the circle and exact lengths of their intersections.

/// The half-open arc starting at `start` and running counter-clockwise for `len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arc {
    start: f64,
    len: f64,
}

impl Arc {
    /// `start` is reduced into `[0, 1)`; `len` is clamped to `[0, 1]`.
    pub fn new(start: f64, len: f64) -> Self {
        let s = start - start.floor();
        let s = if s >= 1.0 { 0.0 } else { s };
        Arc {
            start: s,
            len: len.clamp(0.0, 1.0),
        }
    }

    /// The arc `[a, b)` of an interval in `[0, 1]`.
    pub fn from_interval(a: f64, b: f64) -> Self {
        Arc::new(a, b - a)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0.0
    }

    /// Same length, new start point.
    pub fn with_start(&self, start: f64) -> Self {
        Arc::new(start, self.len)
    }

    /// At most two disjoint intervals of `[0, 1)` covering the arc.
    fn segments(&self) -> Segments {
        let end = self.start + self.len;
        if self.len >= 1.0 {
            Segments {
                items: [(0.0, 1.0), (0.0, 0.0)],
                n: 1,
            }
        } else if end <= 1.0 {
            Segments {
                items: [(self.start, end), (0.0, 0.0)],
                n: 1,
            }
        } else {
            Segments {
                items: [(self.start, 1.0), (0.0, end - 1.0)],
                n: 2,
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Segments {
    items: [(f64, f64); 2],
    n: usize,
}

impl Segments {
    fn as_slice(&self) -> &[(f64, f64)] {
        &self.items[..self.n]
    }
}

fn overlap(x: (f64, f64), y: (f64, f64)) -> Option<(f64, f64)> {
    let lo = x.0.max(y.0);
    let hi = x.1.min(y.1);
    (hi > lo).then_some((lo, hi))
}

/// Haar measure of the intersection of two arcs.
pub fn intersection_len2(a: &Arc, b: &Arc) -> f64 {
    let mut total = 0.0;
    for &x in a.segments().as_slice() {
        for &y in b.segments().as_slice() {
            if let Some((lo, hi)) = overlap(x, y) {
                total += hi - lo;
            }
        }
    }
    total
}

/// Haar measure of the intersection of three arcs.
pub fn intersection_len3(a: &Arc, b: &Arc, c: &Arc) -> f64 {
    let mut total = 0.0;
    for &x in a.segments().as_slice() {
        for &y in b.segments().as_slice() {
            let Some(xy) = overlap(x, y) else { continue };
            for &z in c.segments().as_slice() {
                if let Some((lo, hi)) = overlap(xy, z) {
                    total += hi - lo;
                }
            }
        }
    }
    total
}
