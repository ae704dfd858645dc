use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point, Tessellation};
use crate::scalar::{Scalar, TOL_GEO};

use super::dataset::{check_learnability, CoverageReport, Dataset, Sample};
use super::{evaluate, DynamicsError, VectorField};

/// Where samples are placed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SamplingStrategy {
    /// Uniform over the bounding box of the tessellation.
    Uniform,
    /// One sample at every tessellation vertex.
    OnVertices,
    /// Uniform samples, a ring outside the bounding box, then vertex samples
    /// until every vertex is covered or the cap is reached.
    Augmented { dilation: f64, cap_factor: usize },
}

impl SamplingStrategy {
    pub fn augmented() -> Self {
        SamplingStrategy::Augmented {
            dilation: 1.2,
            cap_factor: 4,
        }
    }
}

/// A generated dataset and its coverage of the mesh vertices.
#[derive(Clone, Debug)]
pub struct Generated<T> {
    pub data: Dataset<T>,
    pub coverage: CoverageReport<T>,
}

/// Builder for dataset generation with optional Lipschitz override and
/// prior samples to carry over.
#[derive(Clone, Debug)]
pub struct DataGenerator<T> {
    strategy: SamplingStrategy,
    count: usize,
    seed: u64,
    lipschitz: Option<T>,
    prior: Vec<Sample<T>>,
}

impl<T: Scalar> DataGenerator<T> {
    pub fn new(strategy: SamplingStrategy, count: usize, seed: u64) -> Self {
        DataGenerator {
            strategy,
            count,
            seed,
            lipschitz: None,
            prior: Vec::new(),
        }
    }

    /// Uses `m` instead of the field's own bound.
    pub fn lipschitz(mut self, m: T) -> Self {
        self.lipschitz = Some(m);
        self
    }

    /// Samples kept before any new ones are drawn.
    pub fn prior(mut self, prior: Vec<Sample<T>>) -> Self {
        self.prior = prior;
        self
    }

    pub fn generate<F: VectorField<T> + ?Sized>(
        &self,
        field: &F,
        tess: &Tessellation<T>,
    ) -> Result<Generated<T>, DynamicsError> {
        if self.count == 0 {
            return Err(DynamicsError::InvalidCount);
        }
        if field.dim() != tess.dim() {
            return Err(DynamicsError::DimensionMismatch {
                expected: tess.dim(),
                found: field.dim(),
            });
        }
        let m = self
            .lipschitz
            .or_else(|| field.lipschitz_bound())
            .ok_or(DynamicsError::InvalidLipschitz)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut pool = Pool::new(field, m);
        for s in &self.prior {
            pool.push(s.clone());
        }
        let (lo, hi) = tess.bounds();
        match self.strategy {
            SamplingStrategy::Uniform => {
                for _ in 0..self.count {
                    pool.sample(uniform_in(&mut rng, lo, hi))?;
                }
            }
            SamplingStrategy::OnVertices => {
                for v in tess.vertices() {
                    pool.sample(v.clone())?;
                }
            }
            SamplingStrategy::Augmented { dilation, cap_factor } => {
                let cap = cap_factor.max(1) * self.count + pool.samples.len();
                for _ in 0..self.count {
                    pool.sample(uniform_in(&mut rng, lo, hi))?;
                }
                let ring = self.count.div_ceil(4);
                let (dlo, dhi) = dilate(lo, hi, dilation);
                let mut drawn = 0;
                let mut attempts = 0;
                while drawn < ring && attempts < 100 * ring {
                    attempts += 1;
                    let p = uniform_in(&mut rng, dlo, dhi);
                    let inside = (0..2).all(|i| p[i] >= lo[i] && p[i] <= hi[i]);
                    if !inside {
                        pool.sample(p)?;
                        drawn += 1;
                    }
                }
                let report = pool.coverage(tess)?;
                for v in report.uncovered_vertices {
                    if pool.samples.len() >= cap {
                        log::warn!("sample cap {cap} reached before full vertex coverage");
                        break;
                    }
                    pool.sample(tess.vertices()[v].clone())?;
                }
            }
        }
        let data = Dataset::new(pool.samples, m)?;
        let coverage = check_learnability(tess, &data);
        Ok(Generated { data, coverage })
    }
}

/// Deterministic dataset generation, using the field's own Lipschitz bound.
pub fn generate_dataset<T: Scalar, F: VectorField<T> + ?Sized>(
    field: &F,
    tess: &Tessellation<T>,
    strategy: SamplingStrategy,
    count: usize,
    seed: u64,
) -> Result<Generated<T>, DynamicsError> {
    DataGenerator::new(strategy, count, seed).generate(field, tess)
}

struct Pool<'a, T, F: ?Sized> {
    field: &'a F,
    m: T,
    samples: Vec<Sample<T>>,
}

impl<'a, T: Scalar, F: VectorField<T> + ?Sized> Pool<'a, T, F> {
    fn new(field: &'a F, m: T) -> Self {
        Pool {
            field,
            m,
            samples: Vec::new(),
        }
    }

    fn push(&mut self, s: Sample<T>) -> bool {
        let tol = T::lit(TOL_GEO);
        if self.samples.iter().any(|q| q.x.dist(&s.x) <= tol) {
            return false;
        }
        self.samples.push(s);
        true
    }

    fn sample(&mut self, x: Point<T>) -> Result<bool, DynamicsError> {
        let f = evaluate(self.field, &x)?;
        Ok(self.push(Sample::new(x, f)))
    }

    fn coverage(&self, tess: &Tessellation<T>) -> Result<CoverageReport<T>, DynamicsError> {
        let data = Dataset::new(self.samples.clone(), self.m)?;
        Ok(check_learnability(tess, &data))
    }
}

fn uniform_in<T: Scalar>(rng: &mut ChaCha8Rng, lo: [T; 2], hi: [T; 2]) -> Point<T> {
    let mut c = [T::zero(); 2];
    for i in 0..2 {
        let u: f64 = rng.gen();
        c[i] = lo[i] + T::lit(u) * (hi[i] - lo[i]);
    }
    Point::xy(c[0], c[1])
}

fn dilate<T: Scalar>(lo: [T; 2], hi: [T; 2], factor: f64) -> ([T; 2], [T; 2]) {
    let half = T::lit(0.5);
    let k = T::lit(factor);
    let mut a = lo;
    let mut b = hi;
    for i in 0..2 {
        let c = (lo[i] + hi[i]) * half;
        let r = (hi[i] - lo[i]) * half * k;
        a[i] = c - r;
        b[i] = c + r;
    }
    (a, b)
}
