//! Upper envelope of a family of lines, `g(x) = max_k (a_k x + c_k)`.

/// The lines that attain the maximum somewhere, ordered by slope, with the
/// abscissae where consecutive lines hand over.
#[derive(Clone, Debug, PartialEq)]
pub struct UpperEnvelope {
    slopes: Vec<f64>,
    intercepts: Vec<f64>,
    rows: Vec<usize>,
    breaks: Vec<f64>,
}

impl UpperEnvelope {
    /// `lines` are `(slope, intercept)` pairs; returns `None` when empty.
    pub fn new(lines: impl IntoIterator<Item = (f64, f64)>) -> Option<Self> {
        let mut sorted: Vec<(f64, f64, usize)> = lines
            .into_iter()
            .enumerate()
            .map(|(i, (a, c))| (a, c, i))
            .collect();
        if sorted.is_empty() {
            return None;
        }
        sorted.sort_by(|x, y| {
            x.0.total_cmp(&y.0)
                .then(y.1.total_cmp(&x.1))
                .then(x.2.cmp(&y.2))
        });
        // Equal slopes: only the highest intercept can matter.
        sorted.dedup_by(|later, kept| later.0 == kept.0);

        let mut hull: Vec<(f64, f64, usize)> = Vec::with_capacity(sorted.len());
        for line in sorted {
            while hull.len() >= 2 {
                let (a1, c1, _) = hull[hull.len() - 2];
                let (a2, c2, _) = hull[hull.len() - 1];
                // The middle line is hidden when the outer two cross at or below it.
                if (c2 - line.1) * (a2 - a1) <= (c1 - c2) * (line.0 - a2) {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(line);
        }
        let breaks = hull
            .windows(2)
            .map(|w| (w[0].1 - w[1].1) / (w[1].0 - w[0].0))
            .collect();
        Some(UpperEnvelope {
            slopes: hull.iter().map(|l| l.0).collect(),
            intercepts: hull.iter().map(|l| l.1).collect(),
            rows: hull.iter().map(|l| l.2).collect(),
            breaks,
        })
    }

    fn segment(&self, x: f64) -> usize {
        self.breaks.partition_point(|b| *b < x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segment(x);
        self.slopes[i] * x + self.intercepts[i]
    }

    /// Input index of the line active at `x` (the left one at a breakpoint).
    pub fn active_row(&self, x: f64) -> usize {
        self.rows[self.segment(x)]
    }

    /// Abscissae where the active line changes, increasing.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Smallest minimizer of `g` on `[lo, hi]` and the minimum. When `hi` is
    /// infinite and every slope is negative the infimum is `-inf` at `+inf`.
    pub fn minimize(&self, lo: f64, hi: f64) -> (f64, f64) {
        let i = self.slopes.partition_point(|a| *a < 0.0);
        let unconstrained = if i == 0 {
            f64::NEG_INFINITY
        } else if i == self.slopes.len() {
            f64::INFINITY
        } else {
            self.breaks[i - 1]
        };
        let x = unconstrained.clamp(lo, hi);
        if x == f64::INFINITY {
            let last = self.slopes.len() - 1;
            let value = if self.slopes[last] < 0.0 { f64::NEG_INFINITY } else { self.intercepts[last] };
            return (x, value);
        }
        (x, self.eval(x))
    }
}
