//! JSON input formats.
//!
//! Rationals are `[numerator, denominator]` pairs. Parse errors carry the
//! serde path, and validation errors name the offending field.

use serde::{Deserialize, Serialize};

use crate::error::{FrameError, Result};
use crate::expframe_line::{GridSpectrum, IntervalSpectrum, Rational, SamplingSet};
use crate::lca_finite::{BoxSubgroup, Element, FiniteAbelianGroup, GroupSpectrum};
use crate::numerics::{ComplexMatrix, MatrixFile};

pub type RationalPair = [i64; 2];

pub fn rational(pair: RationalPair, field: &str) -> Result<Rational> {
    if pair[1] == 0 {
        return Err(FrameError::validation(format!("field `{field}`: zero denominator")));
    }
    Ok(Rational::new(pair[0], pair[1]))
}

pub fn rational_pair(r: Rational) -> RationalPair {
    [*r.numer(), *r.denom()]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumFile {
    Intervals {
        d: RationalPair,
        intervals: Vec<[RationalPair; 2]>,
    },
    Grid {
        m: usize,
        cells: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Spectrum {
    Intervals(IntervalSpectrum),
    Grid(GridSpectrum),
}

impl SpectrumFile {
    pub fn into_spectrum(self) -> Result<Spectrum> {
        match self {
            SpectrumFile::Intervals { d, intervals } => {
                let d = rational(d, "d")?;
                let ivs = intervals
                    .iter()
                    .enumerate()
                    .map(|(i, [a, b])| {
                        Ok((
                            rational(*a, &format!("intervals[{i}][0]"))?,
                            rational(*b, &format!("intervals[{i}][1]"))?,
                        ))
                    })
                    .collect::<Result<Vec<_>>>()?;
                IntervalSpectrum::new(ivs, d)
                    .map(Spectrum::Intervals)
                    .map_err(|e| prefix(e, "intervals"))
            }
            SpectrumFile::Grid { m, cells } => GridSpectrum::new(m, cells)
                .map(Spectrum::Grid)
                .map_err(|e| prefix(e, "cells")),
        }
    }

    pub fn from_spectrum(s: &Spectrum) -> Self {
        match s {
            Spectrum::Grid(g) => SpectrumFile::Grid {
                m: g.m(),
                cells: g.cells().to_vec(),
            },
            Spectrum::Intervals(iv) => SpectrumFile::Intervals {
                d: rational_pair(iv.dilation()),
                intervals: iv
                    .intervals()
                    .iter()
                    .map(|&(a, b)| [rational_pair(a), rational_pair(b)])
                    .collect(),
            },
        }
    }
}

fn prefix(e: FrameError, field: &str) -> FrameError {
    match e {
        FrameError::Validation(msg) => FrameError::Validation(format!("field `{field}`: {msg}")),
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "finite_group")]
pub struct GroupSpectrumFile {
    pub orders: Vec<u64>,
    pub lattice_divisors: Vec<u64>,
    pub cells: Vec<Element>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_divisors: Option<Vec<u64>>,
}

impl GroupSpectrumFile {
    pub fn into_spectrum(self) -> Result<GroupSpectrum> {
        let g = FiniteAbelianGroup::new(self.orders).map_err(|e| prefix(e, "orders"))?;
        let s = GroupSpectrum::new(g, self.lattice_divisors, self.cells).map_err(|e| prefix(e, "lattice_divisors/cells"))?;
        match self.reference_divisors {
            Some(r) => s.with_reference(r).map_err(|e| prefix(e, "reference_divisors")),
            None => Ok(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "lift")]
pub struct LiftFile {
    pub orders: Vec<u64>,
    pub k_divisors: Vec<u64>,
    pub cells: Vec<Element>,
    pub gammas: Vec<Element>,
}

impl LiftFile {
    pub fn group(&self) -> Result<(FiniteAbelianGroup, BoxSubgroup)> {
        let g = FiniteAbelianGroup::new(self.orders.clone()).map_err(|e| prefix(e, "orders"))?;
        let k = BoxSubgroup::new(&g, self.k_divisors.clone()).map_err(|e| prefix(e, "k_divisors"))?;
        Ok((g, k))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointsFile {
    /// Explicit points; the window defaults to their hull.
    Points {
        points: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        window: Option<[f64; 2]>,
    },
    /// A periodic set `d^{-1}⋃_{j∈J}(j + mℤ)`, truncated to the scan window.
    SamplingSet {
        m: usize,
        indices: Vec<usize>,
        #[serde(default = "unit_pair")]
        d: RationalPair,
    },
}

fn unit_pair() -> RationalPair {
    [1, 1]
}

impl PointsFile {
    pub fn sampling_set(&self) -> Result<Option<SamplingSet>> {
        match self {
            PointsFile::SamplingSet { m, indices, d } => {
                let d = rational(*d, "d")?;
                SamplingSet::new(*m, indices.iter().copied(), d)
                    .map(Some)
                    .map_err(|e| prefix(e, "indices"))
            }
            PointsFile::Points { .. } => Ok(None),
        }
    }
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| FrameError::validation(format!("malformed input: {e}")))
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let file: MatrixFile = parse_json(text)?;
    ComplexMatrix::from_file(&file)
}
