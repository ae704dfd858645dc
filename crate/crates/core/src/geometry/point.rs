use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// A point of the state space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point<T> {
    coords: Vec<T>,
}

impl<T: Scalar> Point<T> {
    pub fn new(coords: Vec<T>) -> Self {
        Self { coords }
    }

    pub fn xy(x: T, y: T) -> Self {
        Self { coords: vec![x, y] }
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: vec![T::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<T> {
        self.coords
    }

    pub fn x(&self) -> T {
        self.coords[0]
    }

    pub fn y(&self) -> T {
        self.coords[1]
    }

    pub fn is_finite(&self) -> bool {
        self.coords.iter().all(|c| c.is_finite())
    }

    pub fn dot(&self, other: &[T]) -> T {
        self.coords
            .iter()
            .zip(other)
            .fold(T::zero(), |acc, (a, b)| acc + *a * *b)
    }

    pub fn norm(&self) -> T {
        norm(&self.coords)
    }

    pub fn dist(&self, other: &Point<T>) -> T {
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(T::zero(), |acc, (a, b)| acc + (*a - *b) * (*a - *b))
            .sqrt()
    }

    pub fn sub(&self, other: &Point<T>) -> Point<T> {
        Point::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| *a - *b)
                .collect(),
        )
    }

    pub fn add(&self, other: &Point<T>) -> Point<T> {
        Point::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| *a + *b)
                .collect(),
        )
    }

    pub fn scaled(&self, factor: T) -> Point<T> {
        Point::new(self.coords.iter().map(|c| *c * factor).collect())
    }

    /// Point `self + t (other - self)`.
    pub fn lerp(&self, other: &Point<T>, t: T) -> Point<T> {
        Point::new(
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| *a + (*b - *a) * t)
                .collect(),
        )
    }

    pub fn midpoint(&self, other: &Point<T>) -> Point<T> {
        self.lerp(other, T::lit(0.5))
    }

    pub(crate) fn as_xy(&self) -> [T; 2] {
        [self.coords[0], self.coords[1]]
    }
}

impl<T> Index<usize> for Point<T> {
    type Output = T;

    fn index(&self, i: usize) -> &T {
        &self.coords[i]
    }
}

impl<T: Scalar> From<[T; 2]> for Point<T> {
    fn from(p: [T; 2]) -> Self {
        Point::xy(p[0], p[1])
    }
}

impl<T: Scalar> From<Vec<T>> for Point<T> {
    fn from(v: Vec<T>) -> Self {
        Point::new(v)
    }
}

pub fn norm<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, c| acc + *c * *c).sqrt()
}
