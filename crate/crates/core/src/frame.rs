//! Labeled image frames: a map from point labels to 2D image positions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;

/// The seven basis labels every locator input must carry, in role order.
pub const BASIS_LABELS: [&str; 7] = ["R", "Q", "P", "A", "C", "E", "G"];

/// One frame of labeled observations.
///
/// Labels are unique; insertion order is preserved so that file round-trips
/// and unlabeled uses (the matcher) see a stable ordering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledFrame {
    pub id: String,
    order: Vec<String>,
    points: BTreeMap<String, Point2>,
}

impl LabeledFrame {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            order: Vec::new(),
            points: BTreeMap::new(),
        }
    }

    pub fn from_points<I, S>(id: impl Into<String>, points: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Point2)>,
        S: Into<String>,
    {
        let mut frame = Self::new(id);
        for (label, p) in points {
            frame.insert(label, p)?;
        }
        Ok(frame)
    }

    pub fn insert(&mut self, label: impl Into<String>, p: Point2) -> Result<()> {
        let label = label.into();
        if !p.is_finite() {
            return Err(Error::InvalidInput(format!(
                "non-finite position for label {label:?}"
            )));
        }
        if self.points.contains_key(&label) {
            return Err(Error::InvalidInput(format!("duplicate label {label:?}")));
        }
        self.order.push(label.clone());
        self.points.insert(label, p);
        Ok(())
    }

    pub fn get(&self, label: &str) -> Option<Point2> {
        self.points.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<Point2> {
        self.get(label).ok_or_else(|| Error::MissingLabel {
            frame: self.id.clone(),
            label: label.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Labels in insertion order.
    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    /// (label, position) pairs in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, Point2)> {
        self.order.iter().map(move |l| (l.as_str(), self.points[l]))
    }

    /// Positions in insertion order, labels dropped.
    pub fn positions(&self) -> Vec<Point2> {
        self.order.iter().map(|l| self.points[l]).collect()
    }

    /// The seven basis points in role order (R, Q, P, A, C, E, G).
    pub fn basis(&self) -> Result<[Point2; 7]> {
        let mut out = [Point2::new(0.0, 0.0); 7];
        for (slot, label) in out.iter_mut().zip(BASIS_LABELS) {
            *slot = self.require(label)?;
        }
        Ok(out)
    }
}
