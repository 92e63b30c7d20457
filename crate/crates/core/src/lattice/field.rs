use std::ops::{Index, IndexMut};
use std::sync::Arc;

use super::{Lattice, VertexId};
use crate::error::{Error, Result};

/// An integer-valued function on the vertices of a domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerField {
    domain: Arc<Lattice>,
    values: Vec<i64>,
}

impl IntegerField {
    pub fn new(domain: Arc<Lattice>, values: Vec<i64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidDomain(format!(
                "expected {} values, got {}",
                domain.len(),
                values.len()
            )));
        }
        Ok(IntegerField { domain, values })
    }

    pub fn constant(domain: Arc<Lattice>, c: i64) -> Self {
        let values = vec![c; domain.len()];
        IntegerField { domain, values }
    }

    pub fn from_fn<F: FnMut(VertexId) -> i64>(domain: Arc<Lattice>, f: F) -> Self {
        let values = domain.vertices().map(f).collect();
        IntegerField { domain, values }
    }

    pub fn from_coords<F: FnMut(i64, i64) -> i64>(domain: Arc<Lattice>, mut f: F) -> Result<Self> {
        if !domain.has_coordinates() {
            return Err(Error::NoCoordinates);
        }
        let values = domain
            .vertices()
            .map(|v| {
                let (x, y) = domain.coord(v).unwrap();
                f(x, y)
            })
            .collect();
        Ok(IntegerField { domain, values })
    }

    pub fn domain(&self) -> &Arc<Lattice> {
        &self.domain
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<i64> {
        self.values
    }

    pub fn same_domain(&self, other: &IntegerField) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    fn check_domain(&self, other: &IntegerField) -> Result<()> {
        if self.same_domain(other) {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }

    pub fn value_at(&self, x: i64, y: i64) -> Option<i64> {
        self.domain.vertex_at(x, y).map(|v| self.values[v])
    }

    pub fn map<F: FnMut(VertexId, i64) -> i64>(&self, mut f: F) -> Self {
        IntegerField {
            domain: self.domain.clone(),
            values: self.values.iter().enumerate().map(|(v, &x)| f(v, x)).collect(),
        }
    }

    pub fn zip_with<F: FnMut(i64, i64) -> i64>(&self, other: &IntegerField, mut f: F) -> Result<Self> {
        self.check_domain(other)?;
        Ok(IntegerField {
            domain: self.domain.clone(),
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &IntegerField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &IntegerField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn min_with(&self, other: &IntegerField) -> Result<Self> {
        self.zip_with(other, i64::min)
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &IntegerField) -> Result<bool> {
        self.check_domain(other)?;
        Ok(self.values.iter().zip(&other.values).all(|(a, b)| a <= b))
    }

    pub fn max_abs_diff(&self, other: &IntegerField) -> Result<i64> {
        self.check_domain(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0))
    }

    /// Vertices where the two fields differ.
    pub fn diff_set(&self, other: &IntegerField) -> Result<Vec<VertexId>> {
        self.check_domain(other)?;
        Ok(self.domain.vertices().filter(|&v| self.values[v] != other.values[v]).collect())
    }

    /// `-tau(v) f(v) + sum_{u ~ v} f(u)`; guard-band vertices are rejected.
    pub fn laplacian(&self, v: VertexId) -> Result<i64> {
        if v >= self.domain.len() || !self.domain.is_interior(v) {
            return Err(Error::BoundaryVertex(v));
        }
        Ok(self.laplacian_unchecked(v))
    }

    /// The graph formula at any vertex, including the guard band.
    pub fn laplacian_unchecked(&self, v: VertexId) -> i64 {
        let s: i64 = self.domain.neighbors(v).iter().map(|&u| self.values[u]).sum();
        s - self.domain.threshold(v) * self.values[v]
    }

    /// Laplacian on the interior, 0 on the guard band.
    pub fn laplacian_field(&self) -> IntegerField {
        let values = self
            .domain
            .vertices()
            .map(|v| if self.domain.is_interior(v) { self.laplacian_unchecked(v) } else { 0 })
            .collect();
        IntegerField { domain: self.domain.clone(), values }
    }

    /// First interior vertex with positive Laplacian, if any.
    pub fn first_subharmonic_vertex(&self) -> Option<VertexId> {
        self.domain.interior_vertices().find(|&v| self.laplacian_unchecked(v) > 0)
    }

    pub fn is_superharmonic_on_interior(&self) -> bool {
        self.first_subharmonic_vertex().is_none()
    }

    /// Interior vertices with nonzero Laplacian.
    pub fn deviation_set(&self) -> Vec<VertexId> {
        self.domain.interior_vertices().filter(|&v| self.laplacian_unchecked(v) != 0).collect()
    }
}

impl Index<VertexId> for IntegerField {
    type Output = i64;
    fn index(&self, v: VertexId) -> &i64 {
        &self.values[v]
    }
}

impl IndexMut<VertexId> for IntegerField {
    fn index_mut(&mut self, v: VertexId) -> &mut i64 {
        &mut self.values[v]
    }
}
