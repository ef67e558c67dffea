//! One-dimensional C¹ piecewise-quadratic functions.
//!
//! Pieces are stored in vertex form `a (x - h)² + k`. The hard instances built
//! in [`crate::instances`] have values around `ℓ x²` with `x` in the hundreds or
//! beyond, and the vertex form keeps the gradient `2a (x - h)` free of the
//! cancellation the expanded `a x² + b x + c` form would suffer.

use serde::{Deserialize, Serialize};

/// A single quadratic piece on the closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(with = "extended_f64")]
    pub lo: f64,
    #[serde(with = "extended_f64")]
    pub hi: f64,
    pub curvature: f64,
    pub center: f64,
    pub offset: f64,
}

impl Piece {
    pub fn new(lo: f64, hi: f64, curvature: f64, center: f64, offset: f64) -> Self {
        Piece { lo, hi, curvature, center, offset }
    }

    pub fn value(&self, x: f64) -> f64 {
        let d = x - self.center;
        self.curvature * d * d + self.offset
    }

    pub fn slope(&self, x: f64) -> f64 {
        2.0 * self.curvature * (x - self.center)
    }

    /// Expanded coefficients `(a, b, c)` of `a x² + b x + c`.
    pub fn coefficients(&self) -> (f64, f64, f64) {
        let a = self.curvature;
        let h = self.center;
        (a, -2.0 * a * h, a * h * h + self.offset)
    }

    /// Second derivative of the piece.
    pub fn second_derivative(&self) -> f64 {
        2.0 * self.curvature
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise")]
pub struct PiecewiseQuadratic {
    pieces: Vec<Piece>,
    /// Whether the pieces were produced by reflecting a half-line
    /// construction about `x = 0`.
    symmetric: bool,
}

#[derive(Deserialize)]
struct RawPiecewise {
    pieces: Vec<Piece>,
    symmetric: bool,
}

impl TryFrom<RawPiecewise> for PiecewiseQuadratic {
    type Error = crate::Error;
    fn try_from(raw: RawPiecewise) -> crate::Result<Self> {
        PiecewiseQuadratic::new(raw.pieces, raw.symmetric)
    }
}

/// JSON has no infinities; unbounded interval ends are written as the
/// strings `"-inf"` and `"inf"`.
mod extended_f64 {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else if *v == f64::NEG_INFINITY {
            s.serialize_str("-inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Repr::Str(s) => Err(de::Error::custom(format!("expected a number, \"inf\" or \"-inf\", got {s:?}"))),
        }
    }
}

/// Value/slope mismatch at one interior boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryJump {
    pub at: f64,
    pub value_jump: f64,
    pub slope_jump: f64,
    /// `max(1, |value|, |slope|)` at the boundary, used for relative tolerances.
    pub scale: f64,
}

impl PiecewiseQuadratic {
    /// Pieces must be sorted, contiguous (`pieces[i].hi == pieces[i+1].lo`)
    /// and cover the whole real line.
    pub fn new(pieces: Vec<Piece>, symmetric: bool) -> crate::Result<Self> {
        use crate::Error;
        let first = pieces
            .first()
            .ok_or_else(|| Error::Degenerate("piecewise quadratic needs at least one piece".into()))?;
        let last = pieces.last().unwrap();
        if first.lo != f64::NEG_INFINITY || last.hi != f64::INFINITY {
            return Err(Error::Degenerate("pieces must cover the whole real line".into()));
        }
        for w in pieces.windows(2) {
            if w[0].hi != w[1].lo {
                return Err(Error::Degenerate(format!(
                    "gap or overlap between pieces at {} / {}",
                    w[0].hi, w[1].lo
                )));
            }
        }
        if pieces.iter().any(|p| !(p.lo <= p.hi)) {
            return Err(Error::Degenerate("piece with lo > hi".into()));
        }
        Ok(PiecewiseQuadratic { pieces, symmetric })
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Index of the piece that owns `x`. A boundary point belongs to the
    /// piece on its left.
    pub fn locate(&self, x: f64) -> usize {
        let i = self.pieces.partition_point(|p| p.hi < x);
        i.min(self.pieces.len() - 1)
    }

    pub fn piece_at(&self, x: f64) -> &Piece {
        &self.pieces[self.locate(x)]
    }

    pub fn value(&self, x: f64) -> f64 {
        self.piece_at(x).value(x)
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.piece_at(x).slope(x)
    }

    /// Interior boundaries, in ascending order.
    pub fn boundaries(&self) -> Vec<f64> {
        self.pieces.windows(2).map(|w| w[0].hi).collect()
    }

    /// Largest `|f''|` over all pieces; the Lipschitz constant of the slope.
    pub fn max_abs_curvature(&self) -> f64 {
        self.pieces.iter().fold(0.0_f64, |m, p| m.max(p.second_derivative().abs()))
    }

    /// Jumps in value and slope between neighbouring pieces, evaluated from
    /// both sides at every interior boundary.
    pub fn boundary_jumps(&self) -> Vec<BoundaryJump> {
        self.pieces
            .windows(2)
            .map(|w| {
                let b = w[0].hi;
                let (vl, vr) = (w[0].value(b), w[1].value(b));
                let (sl, sr) = (w[0].slope(b), w[1].slope(b));
                BoundaryJump {
                    at: b,
                    value_jump: (vl - vr).abs(),
                    slope_jump: (sl - sr).abs(),
                    scale: 1.0_f64.max(vl.abs()).max(sl.abs()),
                }
            })
            .collect()
    }

    /// Replace one piece; used to build deliberately broken functions in tests.
    pub fn with_piece(&self, index: usize, piece: Piece) -> Self {
        let mut pieces = self.pieces.clone();
        pieces[index] = piece;
        PiecewiseQuadratic { pieces, symmetric: self.symmetric }
    }
}
