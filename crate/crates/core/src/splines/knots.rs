use crate::error::{Error, Result};

/// Polynomial degree of every spline space in this crate.
pub const DEGREE: usize = 2;

/// Number of univariate basis functions that are nonzero on a knot span.
pub const SPAN_FUNCTIONS: usize = DEGREE + 1;

/// Values and first derivatives of the nonzero univariate B-splines on one span.
///
/// Entry `k` belongs to global basis function `span - DEGREE + k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpanBasis {
    pub span: usize,
    pub values: [f64; SPAN_FUNCTIONS],
    pub derivatives: [f64; SPAN_FUNCTIONS],
}

impl SpanBasis {
    /// Global index of the first nonzero function.
    pub fn first_index(&self) -> usize {
        self.span - DEGREE
    }
}

/// An open knot vector for a quadratic spline space with simple interior knots.
#[derive(Debug, Clone, PartialEq)]
pub struct KnotVector {
    degree: usize,
    knots: Vec<f64>,
}

impl KnotVector {
    pub fn new(degree: usize, knots: Vec<f64>) -> Result<Self> {
        if degree != DEGREE {
            return Err(Error::InvalidKnots(format!(
                "only degree {DEGREE} is supported, got {degree}"
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidKnots("non-finite knot".into()));
        }
        if knots.len() < 2 * (degree + 1) {
            return Err(Error::InvalidKnots(format!(
                "{} knots cannot hold an open degree-{degree} vector",
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidKnots("knots must be nondecreasing".into()));
        }
        let n = knots.len();
        let first = knots[0];
        let last = knots[n - 1];
        if knots[..=degree].iter().any(|&k| k != first)
            || knots[n - degree - 1..].iter().any(|&k| k != last)
            || knots[degree + 1] == first
            || knots[n - degree - 2] == last
        {
            return Err(Error::InvalidKnots(format!(
                "end knots must have multiplicity exactly {}",
                degree + 1
            )));
        }
        if first == last {
            return Err(Error::InvalidKnots("knot range is empty".into()));
        }
        let interior = &knots[degree + 1..n - degree - 1];
        if interior.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidKnots(
                "repeated interior knots are not supported".into(),
            ));
        }
        Ok(Self { degree, knots })
    }

    /// Open knot vector on [0, 1] with `elements` equal spans.
    pub fn uniform(elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidKnots("need at least one element".into()));
        }
        let mut knots = vec![0.0; DEGREE + 1];
        knots.extend((1..elements).map(|i| i as f64 / elements as f64));
        knots.extend(std::iter::repeat(1.0).take(DEGREE + 1));
        Self::new(DEGREE, knots)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn num_basis(&self) -> usize {
        self.knots.len() - self.degree - 1
    }

    pub fn num_elements(&self) -> usize {
        self.num_basis() - self.degree
    }

    pub fn first(&self) -> f64 {
        self.knots[0]
    }

    pub fn last(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }

    /// Distinct knot values, i.e. the element boundaries.
    pub fn breakpoints(&self) -> Vec<f64> {
        self.knots[self.degree..=self.num_basis()].to_vec()
    }

    /// Knot-span index of element `e` (elements are numbered left to right).
    pub fn element_span(&self, e: usize) -> usize {
        e + self.degree
    }

    /// Parametric bounds of element `e`.
    pub fn element_bounds(&self, e: usize) -> (f64, f64) {
        let s = self.element_span(e);
        (self.knots[s], self.knots[s + 1])
    }

    /// Span `i` with `knots[i] <= xi < knots[i + 1]`; the last knot maps to the last span.
    pub fn find_span(&self, xi: f64) -> Result<usize> {
        let (lo, hi) = (self.first(), self.last());
        if !(lo..=hi).contains(&xi) {
            return Err(Error::OutOfRange { value: xi, lo, hi });
        }
        let n = self.num_basis();
        if xi == hi {
            return Ok(n - 1);
        }
        // knots[p..=n] is sorted; the span is the last index with knots[i] <= xi.
        let slice = &self.knots[self.degree..=n];
        let pos = slice.partition_point(|&k| k <= xi);
        Ok(self.degree + pos - 1)
    }

    /// Nonzero basis functions and first derivatives at `xi`.
    pub fn eval_basis(&self, xi: f64) -> Result<SpanBasis> {
        let span = self.find_span(xi)?;
        Ok(self.eval_on_span(span, xi))
    }

    /// Basis evaluation on a known span. `xi` may sit on either end of the span,
    /// which is how one-sided values at element corners are obtained.
    pub fn eval_on_span(&self, span: usize, xi: f64) -> SpanBasis {
        let p = DEGREE;
        let u = &self.knots;
        let mut ndu = [[0.0; SPAN_FUNCTIONS]; SPAN_FUNCTIONS];
        let mut left = [0.0; SPAN_FUNCTIONS];
        let mut right = [0.0; SPAN_FUNCTIONS];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = xi - u[span + 1 - j];
            right[j] = u[span + j] - xi;
            let mut saved = 0.0;
            for r in 0..j {
                // lower triangle holds knot differences, upper triangle basis values
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let mut values = [0.0; SPAN_FUNCTIONS];
        let mut derivatives = [0.0; SPAN_FUNCTIONS];
        for r in 0..=p {
            values[r] = ndu[r][p];
        }
        for r in 0..=p {
            let mut d = 0.0;
            if r >= 1 {
                d += ndu[r - 1][p - 1] / ndu[p][r - 1];
            }
            if r < p {
                d -= ndu[r][p - 1] / ndu[p][r];
            }
            derivatives[r] = d * p as f64;
        }
        SpanBasis {
            span,
            values,
            derivatives,
        }
    }

    /// Knot vector with `value` inserted once.
    pub(crate) fn with_knot(&self, value: f64) -> Result<(Self, usize)> {
        let (lo, hi) = (self.first(), self.last());
        if !(value > lo && value < hi) {
            return Err(Error::KnotInsertion {
                value,
                reason: "value must lie strictly inside the knot range",
            });
        }
        if self.knots.contains(&value) {
            return Err(Error::KnotInsertion {
                value,
                reason: "value is already a knot; a repeated interior knot would break C1 continuity",
            });
        }
        let span = self.find_span(value)?;
        let mut knots = Vec::with_capacity(self.knots.len() + 1);
        knots.extend_from_slice(&self.knots[..=span]);
        knots.push(value);
        knots.extend_from_slice(&self.knots[span + 1..]);
        Ok((
            Self {
                degree: self.degree,
                knots,
            },
            span,
        ))
    }
}
